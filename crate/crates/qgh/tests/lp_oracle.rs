//! The dense simplex and the gauges built on it, checked against
//! independent brute-force oracles on instances small enough to enumerate.

use qgh::convexsolve::{nearest_point, Gauge, LinearProgram, Polytope};
use qgh::Tolerances;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

/// min |c1| + |c2| with c1 g1 + c2 g2 = x, solved exactly by inverting the
/// 2x2 system, against the decomposition gauge evaluated through the LP.
#[test]
fn decomposition_gauge_matches_two_by_two_inverse() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..50 {
        let g1 = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let g2 = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let det: f64 = g1[0] * g2[1] - g1[1] * g2[0];
        if det.abs() < 0.1 {
            continue;
        }
        let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let c1 = (x[0] * g2[1] - x[1] * g2[0]) / det;
        let c2 = (g1[0] * x[1] - g1[1] * x[0]) / det;
        let expected = c1.abs() + c2.abs();
        // evaluate the gauge as the distance from x to the origin polytope
        let origin = Polytope::new(vec![vec![0.0, 0.0]]).unwrap();
        let gauge = Gauge::DecompositionL1(vec![g1.to_vec(), g2.to_vec()]);
        let (_, value) = nearest_point(&x, &origin, &gauge, &t).unwrap();
        assert!(
            (value - expected).abs() <= 1e-8,
            "gauge {value} vs inverse {expected}"
        );
    }
}

/// Nearest point under a sup-functional gauge against a dense grid search
/// over convex combinations of three generators.
#[test]
fn nearest_point_matches_grid_search() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..20 {
        let gens: Vec<Vec<f64>> = (0..3)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let nus = vec![vec![1.0, 0.3], vec![-0.2, 1.0], vec![0.7, -0.7]];
        let z = vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let p = Polytope::new(gens.clone()).unwrap();
        let gauge = Gauge::SupFunctionals(nus.clone());
        let (_, lp_val) = nearest_point(&z, &p, &gauge, &t).unwrap();

        let eval = |pt: &[f64]| -> f64 {
            nus.iter()
                .map(|nu| (nu[0] * (z[0] - pt[0]) + nu[1] * (z[1] - pt[1])).abs())
                .fold(0.0, f64::max)
        };
        let steps = 120;
        let mut grid_min = f64::INFINITY;
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let a = i as f64 / steps as f64;
                let b = j as f64 / steps as f64;
                let c = 1.0 - a - b;
                let pt = [
                    a * gens[0][0] + b * gens[1][0] + c * gens[2][0],
                    a * gens[0][1] + b * gens[1][1] + c * gens[2][1],
                ];
                grid_min = grid_min.min(eval(&pt));
            }
        }
        // the LP value is a true minimum; the grid can only overshoot it,
        // and by no more than the gauge's modulus over one grid cell
        assert!(lp_val <= grid_min + 1e-8, "{lp_val} > grid {grid_min}");
        assert!(grid_min - lp_val <= 0.1, "grid too far: {grid_min} vs {lp_val}");
    }
}

/// Random bounded LPs against exhaustive enumeration over a fine grid of
/// the (two-variable) feasible box, restricted to feasible points.
#[test]
fn simplex_matches_box_grid_enumeration() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..25 {
        let c = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let a = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let b = rng.gen_range(0.5..1.5);
        // minimize c.x  s.t.  a.x <= b (as equality with slack), 0 <= x <= 1
        let lp = LinearProgram {
            objective: vec![c[0], c[1], 0.0],
            constraints: vec![vec![a[0], a[1], 1.0]],
            rhs: vec![b],
            bounds: vec![(0.0, 1.0), (0.0, 1.0), (0.0, f64::INFINITY)],
        };
        let sol = match qgh::convexsolve::solve_lp(&lp, &t) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let steps = 400;
        let mut best = f64::INFINITY;
        for i in 0..=steps {
            for j in 0..=steps {
                let x = [i as f64 / steps as f64, j as f64 / steps as f64];
                if a[0] * x[0] + a[1] * x[1] <= b + 1e-12 {
                    best = best.min(c[0] * x[0] + c[1] * x[1]);
                }
            }
        }
        assert!(sol.value <= best + 1e-8, "simplex {} vs grid {best}", sol.value);
        assert!(best - sol.value <= 0.02, "grid gap: {best} vs {}", sol.value);
    }
}
