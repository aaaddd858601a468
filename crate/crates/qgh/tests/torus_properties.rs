//! Structural identities of the twisted convolution algebra and its window
//! compressions, including the rational-parameter matrix oracle.

use num_complex::Complex64;
use qgh::qtorus::{
    norm_theta, rational_symbol_norm, rep_window, torus_sweep, SkewMatrix, TorusElement,
};
use qgh::Tolerances;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn random_element(rng: &mut ChaCha8Rng, d: usize, radius: i64, terms: usize) -> TorusElement {
    let mut f = TorusElement::zero(d);
    for _ in 0..terms {
        let p: Vec<i64> = (0..d).map(|_| rng.gen_range(-radius..=radius)).collect();
        f.add_term(
            p,
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
    }
    f.pruned(1e-15)
}

/// The window matrix of the involution is the conjugate transpose of the
/// window matrix, entrywise to 1e-12, on 100 random cases.
#[test]
fn involution_matrix_is_adjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for case in 0..100 {
        let d = 1 + case % 2;
        let theta = if d == 1 {
            SkewMatrix::zero(1)
        } else {
            SkewMatrix::elementary(2, 0, 1, rng.gen_range(-1.0..1.0)).unwrap()
        };
        let f = random_element(&mut rng, d, 2, 4);
        let m = 3;
        let a = rep_window(&f, &theta, m).unwrap();
        let b = rep_window(&f.involution(), &theta, m).unwrap();
        let n = a.matrix.len();
        for i in 0..n {
            for j in 0..n {
                let diff = (b.matrix[i][j] - a.matrix[j][i].conj()).norm();
                assert!(diff <= 1e-12, "entry ({i},{j}) differs by {diff}");
            }
        }
    }
}

/// Window compression norms are non-decreasing in the window radius and
/// never exceed the l^1 ceiling.
#[test]
fn window_norms_are_monotone_and_capped() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let mut t = tol();
    t.window_max = 6;
    t.residual = 0.0; // force the full window ladder
    for _ in 0..10 {
        let theta = SkewMatrix::elementary(2, 0, 1, rng.gen_range(-1.0..1.0)).unwrap();
        let f = random_element(&mut rng, 2, 1, 4);
        if f.coeffs.is_empty() {
            continue;
        }
        let est = norm_theta(&f, &theta, &t).unwrap();
        // each window value is a power-iteration lower bound of a truly
        // monotone sequence, so allow its convergence slack
        let mut prev = 0.0;
        for &(m, v) in &est.windows {
            assert!(v >= prev - 1e-3, "window {m} dropped: {v} < {prev}");
            assert!(v <= est.upper_l1 + 1e-9, "window {m}: {v} > l1 {}", est.upper_l1);
            prev = v;
        }
        assert!(est.estimate <= est.upper_l1 + 1e-9);
    }
}

/// The phase only sees the deformation parameter modulo even integers, so
/// shifting an entry by 2 leaves every window norm unchanged to 1e-9.
#[test]
fn norm_is_periodic_in_theta() {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    let mut t = tol();
    t.window_max = 4;
    for _ in 0..5 {
        let v = rng.gen_range(-1.0..1.0);
        let a = SkewMatrix::elementary(2, 0, 1, v).unwrap();
        let b = SkewMatrix::elementary(2, 0, 1, v + 2.0).unwrap();
        let f = random_element(&mut rng, 2, 2, 5);
        let na = norm_theta(&f, &a, &t).unwrap().estimate;
        let nb = norm_theta(&f, &b, &t).unwrap().estimate;
        assert!((na - nb).abs() <= 1e-9, "{na} vs {nb}");
    }
}

/// Harper operator u + u* + v + v* at parameter 1/2: the exact norm is
/// 2 sqrt 2 by the rational matrix model, and the window estimate brackets it.
#[test]
fn harper_norm_at_half() {
    let mut f = TorusElement::zero(2);
    for p in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
        f.add_term(p.to_vec(), Complex64::new(1.0, 0.0));
    }
    let exact = 2.0 * 2.0f64.sqrt();
    let oracle = rational_symbol_norm(&f, 1, 2, 64).unwrap();
    assert!((oracle - exact).abs() <= 1e-9, "oracle {oracle}");
    let theta = SkewMatrix::elementary(2, 0, 1, 0.5).unwrap();
    let mut t = tol();
    t.window_max = 8;
    let est = norm_theta(&f, &theta, &t).unwrap();
    assert!(est.estimate <= exact + 1e-9, "window exceeded exact: {}", est.estimate);
    assert!(est.estimate >= exact - 0.2, "window too loose: {}", est.estimate);
    assert!(est.upper_l1 >= exact);
}

/// A short sweep toward the base parameter: certificates shrink with the
/// offset and the zero offset gives zero.
#[test]
fn sweep_certificates_shrink() {
    let mut t = tol();
    t.window_max = 4;
    t.sphere_samples = 6;
    t.samples = 8;
    let freqs: Vec<Vec<i64>> = vec![
        vec![0, 0],
        vec![1, 0],
        vec![-1, 0],
        vec![0, 1],
        vec![0, -1],
    ];
    let rows = torus_sweep(0.3, &[0.04, 0.01, 0.0], &freqs, 0.5, &t).unwrap();
    assert!(rows[0].certificate > rows[1].certificate);
    assert!(rows[1].certificate > rows[2].certificate - 1e-12);
    assert!(rows[2].certificate <= 1e-9, "zero offset gave {}", rows[2].certificate);
}
