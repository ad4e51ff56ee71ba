use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mor_core::groups::{sl_generators, sp_generators};
use mor_core::lindec::{build_span_basis, inverse_images_with, linearize_with, matrix_dlog_bsgs_with, recover_plaintext_with};
use mor_core::mor::{encrypt, keygen, AutomorphismPresentation, KeygenParams, Plaintext};
use mor_core::{Execution, GroupSpec, Matrix, Prime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn conjugation(spec: &GroupSpec, rng: &mut ChaCha20Rng) -> AutomorphismPresentation {
    let a = spec.eval_word(&spec.random_word(20, rng)).unwrap();
    AutomorphismPresentation::conjugation(spec, &a).unwrap()
}

fn dlog(c: &mut Criterion) {
    let p = Prime::new(101).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let base = loop {
        let m = Matrix::from_fn(4, 4, p, |_, _| rng.gen_range(0..101));
        if m.is_invertible() {
            break m;
        }
    };
    // scalar target, almost surely not a power, so the full giant-step range runs
    let target = Matrix::scalar(4, 3, p);
    let mut group = c.benchmark_group("dlog_bsgs_4x4_f101_miss");
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| matrix_dlog_bsgs_with(&base, &target, 1 << 18, exec)));
    }
    group.finish();
}

fn linear_algebra(c: &mut Criterion) {
    let spec = sl_generators(4, Prime::new(101).unwrap()).unwrap();
    let basis = build_span_basis(&spec).unwrap();
    let psi = conjugation(&spec, &mut ChaCha20Rng::seed_from_u64(2));
    let mut group = c.benchmark_group("sl4_f101");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("linearize", name), &exec, |b, &exec| {
            b.iter(|| linearize_with(&basis, &psi, exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("inverse_images", name), &exec, |b, &exec| {
            b.iter(|| inverse_images_with(&spec, &basis, &psi, exec).unwrap())
        });
    }
    group.finish();
}

fn batch_attack(c: &mut Criterion) {
    let spec = sp_generators(4, Prime::new(101).unwrap()).unwrap();
    let params = KeygenParams { t_cap: 10_000, ..KeygenParams::default() };
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let cases: Vec<_> = (0..8)
        .map(|_| {
            let (_, pk, _) = keygen(&spec, &params, &mut rng).unwrap();
            let m = Plaintext::new(&spec, spec.eval_word(&spec.random_word(24, &mut rng)).unwrap()).unwrap();
            let ct = encrypt(&pk, &m, 10_000, &mut rng).unwrap();
            (pk, ct)
        })
        .collect();
    let mut group = c.benchmark_group("sp4_f101_attack_batch8");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                exec.map(&cases, |(pk, ct)| recover_plaintext_with(pk, ct, 1 << 20, Execution::Sequential).unwrap())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, dlog, linear_algebra, batch_attack);
criterion_main!(benches);
