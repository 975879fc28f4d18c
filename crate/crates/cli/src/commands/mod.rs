pub mod analyze;
pub mod schedule;
pub mod simulate;
pub mod verify;
