use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use holoris_core::ce_uplink::partial_dft;
use holoris_core::rng::substream;
use holoris_core::sparse_recovery::{omp, KroneckerOperator, OmpConfig};
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use std::hint::black_box;

fn operator(n_p: usize, bb: usize, n_cp: usize, seed: u64) -> KroneckerOperator {
    let mut rng = substream(seed, &[]);
    let w = Array2::from_shape_fn((n_p, bb), |_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)));
    let used: Vec<usize> = (0..n_cp).step_by(4).collect();
    KroneckerOperator::new(w, partial_dft(n_cp, &used)).unwrap()
}

fn recovery(c: &mut Criterion) {
    let mut g = c.benchmark_group("omp");
    for bb in [16usize, 64, 256] {
        let op = operator(40, bb, 16, 1);
        let mut h = Array2::zeros((bb, 16));
        h[[bb / 3, 2]] = Complex64::new(1.0, 0.5);
        h[[bb / 2, 5]] = Complex64::new(-0.4, 0.2);
        let y = op.w.dot(&h).dot(&op.f_u);
        g.bench_with_input(BenchmarkId::new("n_max_20", bb), &bb, |b, _| {
            b.iter(|| omp(&op, black_box(y.view()), &OmpConfig::new(20)).unwrap())
        });
    }
    g.finish();

    let op = operator(40, 64, 16, 2);
    let r = vec![Complex64::new(1.0, 0.0); 40 * 4];
    c.bench_function("kronecker_adjoint_40x64", |b| b.iter(|| op.adjoint(black_box(&r)).unwrap()));
}

criterion_group!(benches, recovery);
criterion_main!(benches);
