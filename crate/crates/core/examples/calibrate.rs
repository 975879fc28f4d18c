//! Monte Carlo calibration of per-slot misclassification and key BER at the
//! default parameters: 100 keys of 1000 bits, seeds 0..100.
use kljn_core::seed::rng_from;
use kljn_core::{exchange_key, Loop, Network, NoiseParams};

fn main() {
    let params = NoiseParams::default();
    let lp = Loop::new(&Network::new(1).unwrap(), 0, 1).unwrap();
    let (mut bits, mut errors, mut slots, mut miscls) = (0usize, 0usize, 0usize, 0usize);
    for seed in 0..100u64 {
        let r = exchange_key(lp, 1000, &params, &mut rng_from(seed)).unwrap();
        bits += r.key_length;
        errors += r.bit_errors;
        slots += r.slots;
        miscls += r.misclassified;
    }
    println!(
        "bits={bits} errors={errors} ber={:.3e} slots={slots} misclassified={miscls} rate={:.3e}",
        errors as f64 / bits as f64,
        miscls as f64 / slots as f64
    );
}
