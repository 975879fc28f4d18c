//! Run configuration: JSON file values, overridden by command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use kljn_core::NoiseParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Optional settings shared by every subcommand. Any field may come from the
/// config file; a flag always wins.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Network size N (hosts 0..=N)
    #[arg(long, value_parser = parse_size)]
    pub n: Option<u64>,
    /// Effective noise temperature in kelvin
    #[arg(long)]
    pub t_eff: Option<f64>,
    /// KLJN noise bandwidth in Hz
    #[arg(long)]
    pub b_kljn: Option<f64>,
    /// Bit-0 resistance in ohms
    #[arg(long)]
    pub r_low: Option<f64>,
    /// Bit-1 resistance in ohms
    #[arg(long)]
    pub r_high: Option<f64>,
    /// Correlation times per measurement slot
    #[arg(long)]
    pub window: Option<usize>,
    /// Key length in bits
    #[arg(long)]
    pub key_bits: Option<usize>,
    /// Master seed
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output path (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_size(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(0) => Err("network size must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// `self` with unset fields taken from `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            n: self.n.or(base.n),
            t_eff: self.t_eff.or(base.t_eff),
            b_kljn: self.b_kljn.or(base.b_kljn),
            r_low: self.r_low.or(base.r_low),
            r_high: self.r_high.or(base.r_high),
            window: self.window.or(base.window),
            key_bits: self.key_bits.or(base.key_bits),
            seed: self.seed.or(base.seed),
            format: self.format.or(base.format),
            out: self.out.or(base.out),
        }
    }

    pub fn params(&self) -> Result<NoiseParams, String> {
        let d = NoiseParams::default();
        let p = NoiseParams {
            t_eff: self.t_eff.unwrap_or(d.t_eff),
            b_kljn: self.b_kljn.unwrap_or(d.b_kljn),
            r_low: self.r_low.unwrap_or(d.r_low),
            r_high: self.r_high.unwrap_or(d.r_high),
            measurement_window_factor: self.window.unwrap_or(d.measurement_window_factor),
            ..d
        };
        p.validate().map_err(|e| e.to_string())?;
        Ok(p)
    }

    pub fn require_n(&self) -> Result<usize, String> {
        match self.n {
            Some(0) => Err("--n must be at least 1".into()),
            Some(n) => Ok(n as usize),
            None => Err("--n is required".into()),
        }
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn require_json(&self, command: &str) -> Result<(), String> {
        match self.format() {
            Format::Json => Ok(()),
            Format::Csv => Err(format!("{command} writes JSON only; use --trace for per-slot CSV")),
        }
    }

    pub fn key_bits(&self) -> usize {
        self.key_bits.unwrap_or(100)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: RunConfig = serde_json::from_str(r#"{"n": 5, "seed": 9, "b_kljn": 2e4}"#).unwrap();
        let flags = RunConfig {
            n: Some(7),
            ..Default::default()
        };
        let merged = flags.over(file);
        assert_eq!(merged.n, Some(7));
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.params().unwrap().b_kljn, 2e4);
    }

    #[test]
    fn rejects_bad_values() {
        let bad = RunConfig {
            r_low: Some(5e4),
            ..Default::default()
        };
        assert!(bad.params().is_err());
        assert!(RunConfig { n: Some(0), ..Default::default() }.require_n().is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"nn": 3}"#).is_err());
    }
}
