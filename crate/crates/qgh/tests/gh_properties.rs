//! Properties of the exhaustive Gromov-Hausdorff computation and its
//! relation to the state-space distance bracket.

use qgh::classical::{compare_gh_vs_q, gh_distance, random_metric_space, FiniteMetricSpace};
use qgh::Tolerances;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn gh_of_a_space_with_itself_is_zero() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let x = random_metric_space(4, &mut rng);
        let r = gh_distance(&x, &x, true, &t).unwrap();
        assert!(r.exact);
        assert!(r.value.abs() <= 1e-12, "gh(X,X) = {}", r.value);
    }
}

#[test]
fn gh_is_symmetric() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..10 {
        let x = random_metric_space(4, &mut rng);
        let y = random_metric_space(5, &mut rng);
        let a = gh_distance(&x, &y, true, &t).unwrap().value;
        let b = gh_distance(&y, &x, true, &t).unwrap().value;
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }
}

/// Two-point spaces admit the closed form gh = |a - b| / 2.
#[test]
fn two_point_closed_form() {
    let t = tol();
    for (a, b) in [(1.0, 3.0), (2.0, 2.0), (0.5, 4.0)] {
        let x = FiniteMetricSpace {
            labels: vec!["0".into(), "1".into()],
            dist: vec![vec![0.0, a], vec![a, 0.0]],
        };
        let y = FiniteMetricSpace {
            labels: vec!["0".into(), "1".into()],
            dist: vec![vec![0.0, b], vec![b, 0.0]],
        };
        let r = gh_distance(&x, &y, true, &t).unwrap();
        assert!(
            (r.value - (a - b).abs() / 2.0).abs() <= 1e-12,
            "gh = {} for ({a}, {b})",
            r.value
        );
    }
}

/// The diameter gap halved never exceeds the GH distance.
#[test]
fn diameter_gap_is_a_lower_bound() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..15 {
        let x = random_metric_space(4, &mut rng);
        let y = random_metric_space(5, &mut rng);
        let r = gh_distance(&x, &y, true, &t).unwrap();
        let gap = (x.diameter() - y.diameter()).abs() / 2.0;
        assert!(gap <= r.value + 1e-12, "gap {gap} > gh {}", r.value);
    }
}

/// The state-space upper bound never exceeds the classical distance, and
/// the lower bound never exceeds the upper.
#[test]
fn state_bracket_sits_below_gh() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..10 {
        let x = random_metric_space(4, &mut rng);
        let y = random_metric_space(4, &mut rng);
        let rep = compare_gh_vs_q(&x, &y, &t).unwrap();
        assert!(rep.q_upper <= rep.gh + 1e-6, "{} > {}", rep.q_upper, rep.gh);
        assert!(rep.q_lower <= rep.q_upper + 1e-9);
    }
}
