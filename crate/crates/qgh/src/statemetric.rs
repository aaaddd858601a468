//! Metric geometry of state spaces: the dual-seminorm metric, Hausdorff
//! distances between state polytopes, ε-net/packing brackets, finite
//! approximation by restriction to a net's hull, and the base-norm stability
//! harness.

use serde::Serialize;
use thiserror::Error;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convexsolve::{dot, nearest_point, ConvexError, Gauge, Polytope};
use crate::exec::{map_indexed, ExecMode};
use crate::lipnorm::{decomposition_l1, dual_seminorm, LipError, LipNorm};
use crate::ouspace::{restrict_to_states, OrderUnitSpace, OuError, Projection};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Error)]
pub enum StateMetricError {
    #[error(transparent)]
    Lip(#[from] LipError),
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error(transparent)]
    Space(#[from] OuError),
    #[error("input is not a state: value on unit = {0}")]
    NotStates(f64),
    #[error("cached metric violates {0}")]
    BadCache(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
}

/// Space + Lip-norm with cached pairwise generator distances.
#[derive(Debug, Clone)]
pub struct StateMetricContext {
    pub space: OrderUnitSpace,
    pub lip: LipNorm,
    pub pairwise: Vec<Vec<f64>>,
}

impl StateMetricContext {
    /// Builds the cache and checks it is a metric (symmetry, zero diagonal,
    /// triangle inequality within `tol.lp`).
    pub fn new(
        space: OrderUnitSpace,
        lip: LipNorm,
        tol: &Tolerances,
    ) -> Result<Self, StateMetricError> {
        let gens = space.state_generators.clone();
        let g = gens.len();
        let rows = map_indexed(ExecMode::auto(), &gens, |i, mu| {
            let mut row = vec![0.0; g];
            for (j, nu) in gens.iter().enumerate() {
                if j > i {
                    let lambda: Vec<f64> =
                        mu.iter().zip(nu.iter()).map(|(a, b)| a - b).collect();
                    row[j] = dual_seminorm(&lip, &lambda, &space.unit, tol)
                        .unwrap_or(f64::NAN);
                }
            }
            row
        });
        let mut pairwise = rows;
        for i in 0..g {
            for j in 0..i {
                pairwise[i][j] = pairwise[j][i];
            }
        }
        if pairwise.iter().flatten().any(|v| v.is_nan()) {
            return Err(StateMetricError::BadCache("dual seminorm failed".into()));
        }
        for i in 0..g {
            for j in 0..g {
                for k in 0..g {
                    if pairwise[i][j] > pairwise[i][k] + pairwise[k][j] + tol.lp {
                        return Err(StateMetricError::BadCache(format!(
                            "triangle inequality at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(StateMetricContext { space, lip, pairwise })
    }
}

/// How strictly `rho` checks that its inputs are states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateCheck {
    /// Only `mu(e) = 1` is verified.
    UnitOnly,
    /// Additionally require membership in the generator hull.
    HullMembership,
}

/// `rho_L(mu, nu) = L'(mu - nu)`.
pub fn rho(
    ctx: &StateMetricContext,
    mu: &[f64],
    nu: &[f64],
    check: StateCheck,
    tol: &Tolerances,
) -> Result<f64, StateMetricError> {
    for s in [mu, nu] {
        let v = dot(s, &ctx.space.unit);
        if (v - 1.0).abs() > 1e-9 {
            return Err(StateMetricError::NotStates(v));
        }
        if check == StateCheck::HullMembership {
            let p = ctx.space.state_polytope();
            if !crate::convexsolve::membership(s, &p, tol)? {
                return Err(StateMetricError::NotStates(v));
            }
        }
    }
    let lambda: Vec<f64> = mu.iter().zip(nu.iter()).map(|(a, b)| a - b).collect();
    Ok(dual_seminorm(&ctx.lip, &lambda, &ctx.space.unit, tol)?)
}

/// Hausdorff distance between the embedded state polytopes of the two
/// summands of `A (+) B` under a combined polyhedral Lip-norm on the sum.
///
/// The outer max runs over generators only — distance to a convex set under
/// a convex metric is a convex function, so the sup over each state polytope
/// is attained at a vertex. The inner min over the opposite hull is one LP
/// (decomposition coefficients plus convex weights).
pub fn hausdorff_states(
    l_sum: &LipNorm,
    gens_a: &[Vec<f64>],
    gens_b: &[Vec<f64>],
    dim_a: usize,
    dim_b: usize,
    tol: &Tolerances,
) -> Result<f64, LipError> {
    let embed_a: Vec<Vec<f64>> = gens_a
        .iter()
        .map(|mu| {
            let mut v = mu.clone();
            v.extend(std::iter::repeat(0.0).take(dim_b));
            v
        })
        .collect();
    let embed_b: Vec<Vec<f64>> = gens_b
        .iter()
        .map(|nu| {
            let mut v = vec![0.0; dim_a];
            v.extend_from_slice(nu);
            v
        })
        .collect();
    hausdorff_embedded(l_sum, &embed_a, &embed_b, tol)
}

/// As `hausdorff_states` but with the generators already embedded in the
/// ambient sum space (used by chains, where the sum has more than two blocks).
pub fn hausdorff_embedded(
    l_sum: &LipNorm,
    emb_a: &[Vec<f64>],
    emb_b: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<f64, LipError> {
    let functionals = match l_sum {
        LipNorm::Polyhedral { functionals } => functionals,
        LipNorm::Oracle { .. } => return Err(LipError::NotPolyhedral),
    };
    let poly_b = Polytope::new(emb_b.to_vec()).map_err(|_| LipError::DimensionMismatch)?;
    let poly_a = Polytope::new(emb_a.to_vec()).map_err(|_| LipError::DimensionMismatch)?;
    let gauge = Gauge::DecompositionL1(functionals.clone());
    let d_ab = map_indexed(ExecMode::auto(), emb_a, |_, mu| {
        nearest_point(mu, &poly_b, &gauge, tol).map(|(_, d)| d)
    });
    let d_ba = map_indexed(ExecMode::auto(), emb_b, |_, nu| {
        nearest_point(nu, &poly_a, &gauge, tol).map(|(_, d)| d)
    });
    let mut h: f64 = 0.0;
    for r in d_ab.into_iter().chain(d_ba) {
        h = h.max(r.map_err(|e| LipError::NumericalFailure(e.to_string()))?);
    }
    Ok(h)
}

/// One-space variant: Hausdorff distance between the full state polytope
/// (generator list) and a convex subset `K` of it, under `rho_L`.
/// Since `K` is inside the state space only one direction is nonzero.
pub fn hausdorff_to_subset(
    lip: &LipNorm,
    gens: &[Vec<f64>],
    k: &Polytope,
    tol: &Tolerances,
) -> Result<f64, LipError> {
    let functionals = match lip {
        LipNorm::Polyhedral { functionals } => functionals,
        LipNorm::Oracle { .. } => return Err(LipError::NotPolyhedral),
    };
    let gauge = Gauge::DecompositionL1(functionals.clone());
    let dists = map_indexed(ExecMode::auto(), gens, |_, mu| {
        nearest_point(mu, k, &gauge, tol).map(|(_, d)| d)
    });
    let mut h: f64 = 0.0;
    for r in dists {
        h = h.max(r.map_err(|e| LipError::NumericalFailure(e.to_string()))?);
    }
    Ok(h)
}

/// Bracketed covering bounds.
#[derive(Debug, Clone, Serialize)]
pub struct ScvBounds {
    /// Size of a greedy ε-net over the candidate set (upper bound tag).
    pub upper: usize,
    /// Size of a greedy 2ε-separated packing (lower bound tag).
    pub lower: usize,
    /// The chosen net points.
    pub net: Vec<Vec<f64>>,
    pub candidates: usize,
}

/// Candidate states: generators plus `depth` rounds of pairwise midpoints.
fn candidate_states(gens: &[Vec<f64>], depth: usize, cap: usize) -> Vec<Vec<f64>> {
    let mut cands: Vec<Vec<f64>> = gens.to_vec();
    for _ in 0..depth {
        let snapshot = cands.clone();
        'outer: for i in 0..snapshot.len() {
            for j in (i + 1)..snapshot.len() {
                let mid: Vec<f64> = snapshot[i]
                    .iter()
                    .zip(snapshot[j].iter())
                    .map(|(a, b)| (a + b) / 2.0)
                    .collect();
                let dup = cands.iter().any(|c| {
                    c.iter()
                        .zip(mid.iter())
                        .all(|(a, b)| (a - b).abs() < 1e-12)
                });
                if !dup {
                    cands.push(mid);
                }
                if cands.len() >= cap {
                    break 'outer;
                }
            }
        }
    }
    cands
}

/// Bracket for the smallest ε-dense subset of the state space.
pub fn scv(
    ctx: &StateMetricContext,
    eps: f64,
    tol: &Tolerances,
) -> Result<ScvBounds, StateMetricError> {
    scv_with_depth(ctx, eps, 2, tol)
}

/// As `scv` with an explicit midpoint-grid depth (0 = generators only).
pub fn scv_with_depth(
    ctx: &StateMetricContext,
    eps: f64,
    depth: usize,
    tol: &Tolerances,
) -> Result<ScvBounds, StateMetricError> {
    let cands = candidate_states(&ctx.space.state_generators, depth, 256);
    let n = cands.len();
    // pairwise distances among candidates
    let rows = map_indexed(ExecMode::auto(), &cands, |i, a| {
        let mut row = vec![0.0; n];
        for (j, b) in cands.iter().enumerate() {
            if j > i {
                let lambda: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
                row[j] = dual_seminorm(&ctx.lip, &lambda, &ctx.space.unit, tol)
                    .unwrap_or(f64::NAN);
            }
        }
        row
    });
    let mut d = rows;
    for i in 0..n {
        for j in 0..i {
            d[i][j] = d[j][i];
        }
    }
    if d.iter().flatten().any(|v| v.is_nan()) {
        return Err(StateMetricError::BadCache("dual seminorm failed".into()));
    }
    // greedy max-coverage ε-net: repeatedly take the candidate whose ε-ball
    // covers the most uncovered candidates (lowest index on ties)
    let mut covered = vec![false; n];
    let mut net_idx: Vec<usize> = Vec::new();
    while covered.iter().any(|c| !c) {
        let (best, gain) = (0..n)
            .map(|c| {
                let gain = (0..n)
                    .filter(|&p| !covered[p] && d[c][p] <= eps + tol.lp)
                    .count();
                (c, gain)
            })
            .max_by_key(|&(c, gain)| (gain, usize::MAX - c))
            .unwrap();
        if gain == 0 {
            // isolated uncovered point (cannot happen: a point covers itself)
            break;
        }
        net_idx.push(best);
        for p in 0..n {
            if d[best][p] <= eps + tol.lp {
                covered[p] = true;
            }
        }
    }
    // greedy 2ε-separated packing
    let mut pack: Vec<usize> = Vec::new();
    for c in 0..n {
        if pack.iter().all(|&p| d[c][p] > 2.0 * eps + tol.lp) {
            pack.push(c);
        }
    }
    Ok(ScvBounds {
        upper: net_idx.len(),
        lower: pack.len(),
        net: net_idx.into_iter().map(|i| cands[i].clone()).collect(),
        candidates: n,
    })
}

/// Finite approximation: restrict to the hull of a greedy ε-net of states.
/// Returns the quotient space, its projection, and the certified Hausdorff
/// bound `dist_H(S(A), co(F)) <= ε`.
pub fn finite_approximation(
    ctx: &StateMetricContext,
    eps: f64,
    tol: &Tolerances,
) -> Result<(OrderUnitSpace, Projection, f64), StateMetricError> {
    let bounds = scv(ctx, eps, tol)?;
    let k = Polytope::new(bounds.net.clone())?;
    let (b, pi) = restrict_to_states(&ctx.space, &k, tol)?;
    let bound = hausdorff_to_subset(&ctx.lip, &ctx.space.state_generators, &k, tol)?;
    Ok((b, pi, bound))
}

/// Reference-norm descriptor for the stability harness.
pub type RefNorm = Gauge;

fn eval_gauge(g: &Gauge, x: &[f64], tol: &Tolerances) -> Result<f64, StateMetricError> {
    match g {
        Gauge::Euclidean => Ok(dot(x, x).sqrt()),
        Gauge::SupFunctionals(nus) => {
            Ok(nus.iter().map(|nu| dot(nu, x).abs()).fold(0.0, f64::max))
        }
        Gauge::DecompositionL1(gs) => Ok(decomposition_l1(gs, x, tol)?),
    }
}

/// Base norm of `x`: gauge of `co(S ∪ -S)` for the base polytope `S`,
/// i.e. `min sum |c_i|` over decompositions `x = sum c_i v_i`.
pub fn base_norm(base: &Polytope, x: &[f64], tol: &Tolerances) -> Result<f64, StateMetricError> {
    Ok(decomposition_l1(&base.generators, x, tol)?)
}

/// Report of the base-norm stability check.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// Measured closeness `max |‖x‖₁ − ‖x‖₂| / ‖x‖_*` over the samples.
    pub delta: f64,
    /// `4δ(1 + margin)` — the stability radius implied by the hypothesis.
    pub eps: f64,
    /// Exact vertex Hausdorff distance between the bases in the reference norm.
    pub hausdorff: f64,
    pub pass: bool,
    pub samples: usize,
}

/// Two base polytopes with a shared centering functional `eta` (value 1 on
/// every vertex); measures base-norm closeness by sampling and verifies the
/// Hausdorff stability bound by exact vertex-to-polytope nearest points.
pub fn base_norm_stability_check(
    base1: &Polytope,
    base2: &Polytope,
    ref_norm: &RefNorm,
    eta: &[f64],
    margin: f64,
    sample_count: usize,
    tol: &Tolerances,
) -> Result<StabilityReport, StateMetricError> {
    for (name, base) in [("base1", base1), ("base2", base2)] {
        for v in &base.generators {
            let e = dot(eta, v);
            if (e - 1.0).abs() > 1e-9 {
                return Err(StateMetricError::HypothesisViolated(format!(
                    "{name} vertex pairs with eta at {e}, not 1"
                )));
            }
        }
    }
    let dim = base1.dimension;
    let mut rng = ChaCha8Rng::seed_from_u64(tol.seed);
    let mut samples: Vec<Vec<f64>> = Vec::with_capacity(sample_count + 64);
    // vertex directions and differences carry the extremal behavior; always
    // include them alongside the random sphere sample
    for v in base1.generators.iter().chain(base2.generators.iter()) {
        samples.push(v.clone());
    }
    for a in &base1.generators {
        for b in &base2.generators {
            let d: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
            if d.iter().any(|v| v.abs() > 1e-12) {
                samples.push(d);
            }
        }
    }
    while samples.len() < sample_count {
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if x.iter().any(|v| v.abs() > 1e-9) {
            samples.push(x);
        }
    }
    let mut delta: f64 = 0.0;
    for x in &samples {
        let n1 = base_norm(base1, x, tol);
        let n2 = base_norm(base2, x, tol);
        let (n1, n2) = match (n1, n2) {
            (Ok(a), Ok(b)) => (a, b),
            // outside a span: the base norms are +inf there; skip — the
            // hypothesis concerns the common finite region
            _ => continue,
        };
        let nr = eval_gauge(ref_norm, x, tol)?;
        if nr <= tol.lp {
            continue;
        }
        if nr > n1 + 1e-7 || nr > n2 + 1e-7 {
            return Err(StateMetricError::HypothesisViolated(format!(
                "reference norm not dominated: ref {nr} vs base norms {n1}, {n2}"
            )));
        }
        delta = delta.max((n1 - n2).abs() / nr);
    }
    let eps = 4.0 * delta * (1.0 + margin);
    // exact Hausdorff between the polytopes in the reference norm: attained
    // at vertices for convex bodies
    let mut h: f64 = 0.0;
    for v in &base1.generators {
        let (_, d) = nearest_point(v, base2, ref_norm, tol)?;
        h = h.max(d);
    }
    for v in &base2.generators {
        let (_, d) = nearest_point(v, base1, ref_norm, tol)?;
        h = h.max(d);
    }
    let pass = h <= eps + tol.lp;
    Ok(StabilityReport { delta, eps, hausdorff: h, pass, samples: samples.len() })
}

/// CSV of the cached pairwise generator distances.
pub fn rho_table_csv(ctx: &StateMetricContext) -> String {
    let mut out = String::from("i,j,rho\n");
    for (i, row) in ctx.pairwise.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out.push_str(&format!("{i},{j},{v}\n"));
        }
    }
    out
}

/// CSV listing of a net/packing selection.
pub fn net_csv(bounds: &ScvBounds) -> String {
    let mut out = String::from("index,coords\n");
    for (i, p) in bounds.net.iter().enumerate() {
        let coords: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("{i},\"{}\"\n", coords.join(" ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{appendix1_instance, embed_cqms};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn ctx_y() -> StateMetricContext {
        let inst = appendix1_instance();
        let (space, lip) = embed_cqms(&inst.y, &tol()).unwrap();
        StateMetricContext::new(space, lip, &tol()).unwrap()
    }

    #[test]
    fn rho_vanishes_on_diagonal() {
        let ctx = ctx_y();
        let mu = vec![1.0, 0.0, 0.0];
        let v = rho(&ctx, &mu, &mu, StateCheck::UnitOnly, &tol()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn cached_pairwise_reproduces_the_metric() {
        let ctx = ctx_y();
        let inst = appendix1_instance();
        for i in 0..3 {
            for j in 0..3 {
                assert!((ctx.pairwise[i][j] - inst.y.dist[i][j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn one_point_space_scv_is_one() {
        let ctx = StateMetricContext::new(
            OrderUnitSpace::scalars(),
            LipNorm::Polyhedral { functionals: vec![] },
            &tol(),
        )
        .unwrap();
        for eps in [0.1, 1.0, 10.0] {
            let b = scv(&ctx, eps, &tol()).unwrap();
            assert_eq!((b.upper, b.lower), (1, 1));
        }
    }

    #[test]
    fn scv_large_eps_single_center() {
        // ε just above the radius: y2 is a center within 1.01 of everything
        let ctx = ctx_y();
        let b = scv_with_depth(&ctx, 1.01, 0, &tol()).unwrap();
        assert_eq!(b.upper, 1);
    }

    #[test]
    fn scv_packing_lower_bound() {
        let ctx = ctx_y();
        let b = scv(&ctx, 0.4, &tol()).unwrap();
        assert!(b.lower >= 3, "lower {}", b.lower);
        assert!(b.lower <= b.upper);
    }

    #[test]
    fn finite_approximation_tiny_eps_keeps_everything() {
        let ctx = ctx_y();
        let (b, _, bound) = finite_approximation(&ctx, 1e-6, &tol()).unwrap();
        assert!(bound <= 1e-6 + 1e-9);
        assert!(b.state_generators.len() >= 3);
    }

    #[test]
    fn stability_identical_bases() {
        // vertices inside the unit disk, so the Euclidean reference norm is
        // dominated by the base norm on their span
        let base = Polytope::new(vec![
            vec![0.5, 0.5],
            vec![0.5, -0.5],
        ])
        .unwrap();
        let rep = base_norm_stability_check(
            &base,
            &base,
            &Gauge::Euclidean,
            &[2.0, 0.0],
            1e-6,
            100,
            &tol(),
        )
        .unwrap();
        assert_eq!(rep.delta, 0.0);
        assert!(rep.hausdorff.abs() < 1e-9);
    }

    #[test]
    fn stability_rejects_scaled_base() {
        let base1 = Polytope::new(vec![vec![1.0, 0.5], vec![1.0, -0.5]]).unwrap();
        let base2 = Polytope::new(vec![vec![2.0, 1.0], vec![2.0, -1.0]]).unwrap();
        let err = base_norm_stability_check(
            &base1,
            &base2,
            &Gauge::Euclidean,
            &[1.0, 0.0],
            1e-6,
            100,
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, StateMetricError::HypothesisViolated(_)));
    }
}
