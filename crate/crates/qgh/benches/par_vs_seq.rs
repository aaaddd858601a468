//! Parallel vs sequential timing of the pairwise state-distance table and a
//! window-norm sweep, the two hot loops of the library.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qgh::classical::{appendix1_instance, embed_cqms, random_metric_space};
use qgh::exec::{map_range, ExecMode};
use qgh::lipnorm::dual_seminorm;
use qgh::qtorus::{norm_theta, SkewMatrix, TorusElement};
use qgh::Tolerances;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pairwise_table(mode: ExecMode) -> f64 {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let x = random_metric_space(7, &mut rng);
    let (space, lip) = embed_cqms(&x, &tol).unwrap();
    let gens = &space.state_generators;
    let n = gens.len();
    let vals = map_range(mode, n * n, |idx| {
        let (i, j) = (idx / n, idx % n);
        let lambda: Vec<f64> = gens[i]
            .iter()
            .zip(gens[j].iter())
            .map(|(a, b)| a - b)
            .collect();
        dual_seminorm(&lip, &lambda, &space.unit, &tol).unwrap_or(0.0)
    });
    vals.into_iter().sum()
}

fn window_sweep(mode: ExecMode) -> f64 {
    let tol = Tolerances { window_max: 6, ..Tolerances::default() };
    let theta = SkewMatrix::elementary(2, 0, 1, 0.37).unwrap();
    let vals = map_range(mode, 8, |k| {
        let mut f = TorusElement::zero(2);
        f.add_term(vec![1, 0], num_complex::Complex64::new(1.0, 0.1 * k as f64));
        f.add_term(vec![0, 1], num_complex::Complex64::new(0.5, -0.2));
        f.add_term(vec![-1, 1], num_complex::Complex64::new(0.3, 0.0));
        norm_theta(&f, &theta, &tol).map(|n| n.estimate).unwrap_or(0.0)
    });
    vals.into_iter().sum()
}

fn bench_modes(c: &mut Criterion) {
    let inst = appendix1_instance();
    let _ = inst; // keep the golden instance linked for size parity

    let mut group = c.benchmark_group("pairwise_state_table");
    for mode in [ExecMode::Sequential, ExecMode::Parallel] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{mode:?}")),
            &mode,
            |b, &m| b.iter(|| pairwise_table(m)),
        );
    }
    group.finish();

    let mut group = c.benchmark_group("window_norm_sweep");
    for mode in [ExecMode::Sequential, ExecMode::Parallel] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{mode:?}")),
            &mode,
            |b, &m| b.iter(|| window_sweep(m)),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_modes);
criterion_main!(benches);
