use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fermigauss::exec::{self, Execution};
use fermigauss::gaussian::random_even_state;
use fermigauss::lambda::{flo_twirl_mc, gaussianity_residual};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn twirl(c: &mut Criterion) {
    let x = random_even_state(4, 3, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let mut group = c.benchmark_group("twirl_m2");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 400), &mode, |b, &mode| {
            b.iter(|| flo_twirl_mc(black_box(&x), 400, 7, mode).unwrap())
        });
    }
    group.finish();
}

fn residual_corpus(c: &mut Criterion) {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let corpus: Vec<_> = (0..64).map(|_| random_even_state(4, 4, &mut r).unwrap()).collect();
    let mut group = c.benchmark_group("residual_corpus_m4");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::new(name, corpus.len()), &mode, |b, &mode| {
            b.iter(|| exec::map_slice(mode, black_box(&corpus), |rho| gaussianity_residual(rho).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, twirl, residual_corpus);
criterion_main!(benches);
