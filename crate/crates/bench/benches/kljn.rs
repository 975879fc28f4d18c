use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kljn_core::fabric::{modes_for_round, verify_round_isolation};
use kljn_core::{exchange_key, full_schedule, min_rounds_oracle, simulate_slot, Loop, Network, NoiseParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn schedule(c: &mut Criterion) {
    let mut group = c.benchmark_group("full_schedule");
    for n in [8usize, 50, 200] {
        let net = Network::new(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &net, |b, net| b.iter(|| full_schedule(net)));
    }
    group.finish();
}

fn isolation(c: &mut Criterion) {
    let net = Network::new(50).unwrap();
    let sched = full_schedule(&net);
    c.bench_function("verify_isolation/n50_all_rounds", |b| {
        b.iter(|| {
            for (_, r) in sched.rounds() {
                let st = modes_for_round(&net, r).unwrap();
                assert!(verify_round_isolation(&st, r).is_empty());
            }
        })
    });
}

fn oracle(c: &mut Criterion) {
    c.bench_function("min_rounds_oracle/n12_d6", |b| b.iter(|| min_rounds_oracle(12, 6).unwrap()));
}

fn exchange(c: &mut Criterion) {
    let params = NoiseParams::default();
    c.bench_function("simulate_slot/default", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        b.iter(|| simulate_slot(false, true, &params, &mut rng))
    });
    let lp = Loop::new(&Network::new(1).unwrap(), 0, 1).unwrap();
    c.bench_function("exchange_key/100_bits", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        b.iter(|| exchange_key(lp, 100, &params, &mut rng).unwrap())
    });
}

criterion_group!(benches, schedule, isolation, oracle, exchange);
criterion_main!(benches);
