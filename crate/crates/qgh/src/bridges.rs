//! Bridges between compact quantum metric spaces: construction recipes,
//! validation of the defining conditions, combined Lip-norms, certified
//! upper/lower brackets for the quantum distance, chain composition, and the
//! dual-perturbation bridge.
//!
//! A bridge is a polyhedral seminorm `N` on `A (+) B` with `N(e_A, e_B) = 0`,
//! `N(e_A, 0) != 0`, and the compatibility condition that from either side,
//! elements of one Lip ball can be matched in the other at small `N`-cost.
//! The combined seminorm `L_A ∨ L_B ∨ N` is then a Lip-norm on the sum
//! inducing both factors, and the Hausdorff distance between the embedded
//! state spaces is an upper bound for the quantum distance; the gap
//! `γ = 1/N(e_A, 0)` lower-bounds every cross distance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convexsolve::{dot, solve_lp, ConvexError, LinearProgram};
use crate::exec::{map_range, ExecMode};
use crate::lipnorm::{decomposition_l1, dual_seminorm, radius_diameter, LipError, LipNorm};
use crate::ouspace::OrderUnitSpace;
use crate::statemetric::{hausdorff_embedded, hausdorff_states};
use crate::tol::Tolerances;

/// Polyhedral bridge seminorm on `A (+) B` with its gap and provenance.
#[derive(Debug, Clone)]
pub struct Bridge {
    /// Functionals on the sum space; `N(a,b) = max_j |n_j(a,b)|`.
    pub functionals: Vec<Vec<f64>>,
    /// `γ = 1 / N(e_A, 0)`.
    pub gap: f64,
    pub recipe: RecipeTag,
    /// Canonical recipes carry proven compatibility; user-supplied `N` does not.
    pub paper_certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecipeTag {
    TwoPoints,
    ToScalars,
    Doubling,
    AlongMap,
    StateFamily,
    Perturbation,
    Custom,
}

/// Construction parameters for the named bridge recipes.
#[derive(Debug, Clone)]
pub enum Recipe {
    /// `N(a,b) = γ^{-1} |mu0(a) - nu0(b)|` for chosen states.
    TwoPoints { mu0: Vec<f64>, nu0: Vec<f64>, gamma: f64 },
    /// `B = scalars`, `N(a, t) = r^{-1} max_i |mu_i(a) - t|`.
    ToScalars { r: f64 },
    /// `B = A`, `N(a,b) = ε^{-1} ||a - b||`.
    Doubling { eps: f64 },
    /// `N(a,b) = γ^{-1} ||phi(a) - b||_B` for a linear unital `phi: A -> B`
    /// (row-major matrix, one row per B-coordinate).
    AlongMap { phi: Vec<Vec<f64>>, gamma: f64 },
    /// `N(a,b) = ε^{-1} max_k |omega_a_k(a) - omega_b_k(b)|` over a paired
    /// family of states.
    StateFamily { omegas_a: Vec<Vec<f64>>, omegas_b: Vec<Vec<f64>>, eps: f64 },
}

/// On-disk bridge descriptor, e.g. `{ "recipe": "doubling", "epsilon": 0.25 }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "recipe", rename_all = "snake_case")]
pub enum BridgeSpec {
    Doubling { epsilon: f64 },
    ToScalars {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<f64>,
    },
    TwoPoints { mu0: Vec<f64>, nu0: Vec<f64>, gamma: f64 },
    AlongMap { phi: Vec<Vec<f64>>, gamma: f64 },
}

#[derive(Debug, Clone, Error)]
pub enum BridgeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Lip(#[from] LipError),
    #[error("lp failure: {0}")]
    Convex(#[from] ConvexError),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
}

fn pad_left(v: &[f64], dim_a: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim_a];
    out.extend_from_slice(v);
    out
}

fn pad_right(v: &[f64], dim_b: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    out.extend(std::iter::repeat(0.0).take(dim_b));
    out
}

impl Bridge {
    /// `N(a, b)` on an already-concatenated vector.
    pub fn eval(&self, ab: &[f64]) -> f64 {
        self.functionals
            .iter()
            .map(|n| dot(n, ab).abs())
            .fold(0.0, f64::max)
    }
}

/// Build the polyhedral `N` of a named construction.
pub fn make_bridge(
    recipe: &Recipe,
    a: &OrderUnitSpace,
    b: &OrderUnitSpace,
) -> Result<Bridge, BridgeError> {
    let (na, nb) = (a.dimension, b.dimension);
    let functionals: Vec<Vec<f64>> = match recipe {
        Recipe::TwoPoints { mu0, nu0, gamma } => {
            if *gamma <= 0.0 {
                return Err(BridgeError::InvalidParams("gamma <= 0".into()));
            }
            if mu0.len() != na || nu0.len() != nb {
                return Err(BridgeError::InvalidParams("state dimensions".into()));
            }
            let mut n = mu0.iter().map(|v| v / gamma).collect::<Vec<_>>();
            n.extend(nu0.iter().map(|v| -v / gamma));
            vec![n]
        }
        Recipe::ToScalars { r } => {
            if *r <= 0.0 {
                return Err(BridgeError::InvalidParams("r <= 0".into()));
            }
            if nb != 1 {
                return Err(BridgeError::InvalidParams(
                    "to_scalars requires B = scalars".into(),
                ));
            }
            a.state_generators
                .iter()
                .map(|mu| {
                    let mut n: Vec<f64> = mu.iter().map(|v| v / r).collect();
                    n.push(-1.0 / r);
                    n
                })
                .collect()
        }
        Recipe::Doubling { eps } => {
            if *eps <= 0.0 {
                return Err(BridgeError::InvalidParams("epsilon <= 0".into()));
            }
            if na != nb {
                return Err(BridgeError::InvalidParams(
                    "doubling requires matching coordinate spaces".into(),
                ));
            }
            a.state_generators
                .iter()
                .map(|mu| {
                    let mut n: Vec<f64> = mu.iter().map(|v| v / eps).collect();
                    n.extend(mu.iter().map(|v| -v / eps));
                    n
                })
                .collect()
        }
        Recipe::AlongMap { phi, gamma } => {
            if *gamma <= 0.0 {
                return Err(BridgeError::InvalidParams("gamma <= 0".into()));
            }
            if phi.len() != nb || phi.iter().any(|row| row.len() != na) {
                return Err(BridgeError::InvalidParams("phi shape".into()));
            }
            let phi_e: Vec<f64> = phi.iter().map(|row| dot(row, &a.unit)).collect();
            if phi_e
                .iter()
                .zip(b.unit.iter())
                .any(|(x, y)| (x - y).abs() > 1e-9)
            {
                return Err(BridgeError::InvalidParams("phi is not unital".into()));
            }
            // nu_j(phi(a) - b) for each B state generator
            b.state_generators
                .iter()
                .map(|nu| {
                    let mut n: Vec<f64> = (0..na)
                        .map(|i| {
                            nu.iter()
                                .zip(phi.iter())
                                .map(|(nj, row)| nj * row[i])
                                .sum::<f64>()
                                / gamma
                        })
                        .collect();
                    n.extend(nu.iter().map(|v| -v / gamma));
                    n
                })
                .collect()
        }
        Recipe::StateFamily { omegas_a, omegas_b, eps } => {
            if *eps <= 0.0 {
                return Err(BridgeError::InvalidParams("epsilon <= 0".into()));
            }
            if omegas_a.is_empty() || omegas_a.len() != omegas_b.len() {
                return Err(BridgeError::InvalidParams("empty state family".into()));
            }
            omegas_a
                .iter()
                .zip(omegas_b.iter())
                .map(|(oa, ob)| {
                    let mut n: Vec<f64> = oa.iter().map(|v| v / eps).collect();
                    n.extend(ob.iter().map(|v| -v / eps));
                    n
                })
                .collect()
        }
    };
    let tag = match recipe {
        Recipe::TwoPoints { .. } => RecipeTag::TwoPoints,
        Recipe::ToScalars { .. } => RecipeTag::ToScalars,
        Recipe::Doubling { .. } => RecipeTag::Doubling,
        Recipe::AlongMap { .. } => RecipeTag::AlongMap,
        Recipe::StateFamily { .. } => RecipeTag::StateFamily,
    };
    finish_bridge(functionals, tag, true, a, b)
}

/// Wrap raw functionals as a bridge (user-supplied `N`; never paper-certified).
pub fn custom_bridge(
    functionals: Vec<Vec<f64>>,
    a: &OrderUnitSpace,
    b: &OrderUnitSpace,
) -> Result<Bridge, BridgeError> {
    finish_bridge(functionals, RecipeTag::Custom, false, a, b)
}

fn finish_bridge(
    functionals: Vec<Vec<f64>>,
    recipe: RecipeTag,
    paper_certified: bool,
    a: &OrderUnitSpace,
    b: &OrderUnitSpace,
) -> Result<Bridge, BridgeError> {
    let dim = a.dimension + b.dimension;
    if functionals.iter().any(|n| n.len() != dim) {
        return Err(BridgeError::InvalidParams("functional dimensions".into()));
    }
    let ea0 = pad_right(&a.unit, b.dimension);
    let n_ea0 = functionals
        .iter()
        .map(|n| dot(n, &ea0).abs())
        .fold(0.0, f64::max);
    if n_ea0 <= 0.0 {
        return Err(BridgeError::InvalidParams("N(e_A, 0) = 0: no gap".into()));
    }
    Ok(Bridge {
        functionals,
        gap: 1.0 / n_ea0,
        recipe,
        paper_certified,
    })
}

/// Validation report for the bridge conditions.
#[derive(Debug, Clone, Serialize)]
pub struct BridgeReport {
    pub cond1_ok: bool,
    pub cond2_ok: bool,
    /// Worst `min_b max(L_B(b), N(a,b)) - (L_A(a) + δ)` over sampled `a`.
    pub worst_residual_ab: f64,
    pub worst_residual_ba: f64,
    pub samples: usize,
    pub paper_certified: bool,
}

/// Checks `N(e_A, e_B) = 0` and `N(e_A, 0) != 0` exactly, then the matching
/// condition by sampling directions on the Lip unit sphere and solving the
/// best-partner LP `min_b max(L_B(b), N(a,b))` (and symmetrically).
pub fn validate_bridge(
    bridge: &Bridge,
    a: &OrderUnitSpace,
    l_a: &LipNorm,
    b: &OrderUnitSpace,
    l_b: &LipNorm,
    samples: usize,
    delta_tol: f64,
    tol: &Tolerances,
) -> Result<BridgeReport, BridgeError> {
    let (na, nb) = (a.dimension, b.dimension);
    let mut e_ab = a.unit.clone();
    e_ab.extend_from_slice(&b.unit);
    let cond1_ok = bridge.eval(&e_ab) <= tol.exact.max(1e-10);
    let cond2_ok = bridge.gap.is_finite() && bridge.gap > 0.0;

    let funcs_a = polyhedral(l_a)?;
    let funcs_b = polyhedral(l_b)?;
    let worst = |from_a: bool| -> Result<f64, BridgeError> {
        let (n_from, funcs_from, funcs_to, space_from) = if from_a {
            (na, funcs_a, funcs_b, a)
        } else {
            (nb, funcs_b, funcs_a, b)
        };
        let residuals: Vec<Result<f64, BridgeError>> = map_range(ExecMode::auto(), samples, |s| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                tol.seed ^ (s as u64).wrapping_mul(0x9e3779b97f4a7c15) ^ u64::from(from_a),
            );
            let mut dir: Vec<f64> = (0..n_from).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let l_val = funcs_from
                .iter()
                .map(|nu| dot(nu, &dir).abs())
                .fold(0.0, f64::max);
            if l_val <= tol.lp {
                return Ok(f64::NEG_INFINITY); // direction in the null space
            }
            for v in dir.iter_mut() {
                *v /= l_val;
            }
            let opt = best_partner(bridge, funcs_to, &dir, from_a, na, nb, tol)?;
            let _ = space_from;
            Ok(opt - (1.0 + delta_tol))
        });
        let mut w = f64::NEG_INFINITY;
        for r in residuals {
            w = w.max(r?);
        }
        Ok(w)
    };
    Ok(BridgeReport {
        cond1_ok,
        cond2_ok,
        worst_residual_ab: worst(true)?,
        worst_residual_ba: worst(false)?,
        samples,
        paper_certified: bridge.paper_certified,
    })
}

fn polyhedral(l: &LipNorm) -> Result<&Vec<Vec<f64>>, BridgeError> {
    match l {
        LipNorm::Polyhedral { functionals } => Ok(functionals),
        LipNorm::Oracle { .. } => Err(BridgeError::Lip(LipError::NotPolyhedral)),
    }
}

/// `min over partner of max(L_other(partner), N(dir, partner))` as an LP.
fn best_partner(
    bridge: &Bridge,
    funcs_other: &[Vec<f64>],
    dir: &[f64],
    from_a: bool,
    na: usize,
    nb: usize,
    tol: &Tolerances,
) -> Result<f64, BridgeError> {
    let n_other = if from_a { nb } else { na };
    // vars: partner (free, n_other), t >= 0, slacks
    let n_ineq = funcs_other.len() + bridge.functionals.len();
    let nvar = n_other + 1 + 2 * n_ineq;
    let mut constraints = Vec::with_capacity(2 * n_ineq);
    let mut rhs = Vec::with_capacity(2 * n_ineq);
    let mut slack = n_other + 1;
    let push_abs = |coef: Vec<f64>, shift: f64, constraints: &mut Vec<Vec<f64>>, rhs: &mut Vec<f64>, slack: &mut usize| {
        // |coef . partner + shift| <= t  as two rows with slacks
        // coef.p + shift <= t : -coef.p + t - s1 = shift
        let mut r1 = vec![0.0; nvar];
        for (v, c) in r1[..n_other].iter_mut().zip(coef.iter()) {
            *v = -c;
        }
        r1[n_other] = 1.0;
        r1[*slack] = -1.0;
        *slack += 1;
        constraints.push(r1);
        rhs.push(shift);
        // -(coef.p + shift) <= t : coef.p + t - s2 = -shift
        let mut r2 = vec![0.0; nvar];
        r2[..n_other].copy_from_slice(&coef);
        r2[n_other] = 1.0;
        r2[*slack] = -1.0;
        *slack += 1;
        constraints.push(r2);
        rhs.push(-shift);
    };
    for nu in funcs_other {
        push_abs(nu.clone(), 0.0, &mut constraints, &mut rhs, &mut slack);
    }
    for n in &bridge.functionals {
        let (own, other) = if from_a {
            (&n[..na], &n[na..])
        } else {
            (&n[na..], &n[..na])
        };
        let shift = dot(own, dir);
        push_abs(other.to_vec(), shift, &mut constraints, &mut rhs, &mut slack);
    }
    let mut objective = vec![0.0; nvar];
    objective[n_other] = 1.0;
    let mut bounds = vec![(0.0, f64::INFINITY); nvar];
    for b in bounds.iter_mut().take(n_other) {
        *b = (f64::NEG_INFINITY, f64::INFINITY);
    }
    let lp = LinearProgram { objective, constraints, rhs, bounds };
    Ok(solve_lp(&lp, tol)?.value)
}

/// `L = L_A ∨ L_B ∨ N` as a polyhedral Lip-norm on the sum, plus the gap.
pub fn combine(
    l_a: &LipNorm,
    l_b: &LipNorm,
    bridge: &Bridge,
    dim_a: usize,
    dim_b: usize,
) -> Result<(LipNorm, f64), BridgeError> {
    let fa = polyhedral(l_a)?;
    let fb = polyhedral(l_b)?;
    let mut functionals: Vec<Vec<f64>> =
        fa.iter().map(|nu| pad_right(nu, dim_b)).collect();
    functionals.extend(fb.iter().map(|nu| pad_left(nu, dim_a)));
    functionals.extend(bridge.functionals.iter().cloned());
    Ok((LipNorm::Polyhedral { functionals }, bridge.gap))
}

/// Certified bracket for the quantum distance.
#[derive(Debug, Clone, Serialize)]
pub struct DistqCertificate {
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
    pub recipe: RecipeTag,
    /// Sampling diagnostics where applicable (condition-3 residuals).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<(f64, f64)>,
}

/// Upper bound: Hausdorff distance between the embedded state spaces under
/// the combined Lip-norm. Any admissible combined norm yields a valid bound.
pub fn distq_upper(
    a: &OrderUnitSpace,
    l_a: &LipNorm,
    b: &OrderUnitSpace,
    l_b: &LipNorm,
    bridge: &Bridge,
    tol: &Tolerances,
) -> Result<f64, BridgeError> {
    let (l, _) = combine(l_a, l_b, bridge, a.dimension, b.dimension)?;
    Ok(hausdorff_states(
        &l,
        &a.state_generators,
        &b.state_generators,
        a.dimension,
        b.dimension,
        tol,
    )?)
}

/// Lower bound from the diameter gap: `|diam A - diam B| / 2`.
pub fn distq_lower(
    a: &OrderUnitSpace,
    l_a: &LipNorm,
    b: &OrderUnitSpace,
    l_b: &LipNorm,
    tol: &Tolerances,
) -> Result<f64, BridgeError> {
    let (_, da) = radius_diameter(a, l_a, tol)?;
    let (_, db) = radius_diameter(b, l_b, tol)?;
    Ok((da - db).abs() / 2.0)
}

/// Result of composing links `M_j` on consecutive sums into `J = sup_j M_j`.
#[derive(Debug, Clone)]
pub struct ChainResult {
    /// `J` as a polyhedral Lip-norm on the full direct sum.
    pub j_norm: LipNorm,
    /// Hausdorff distance between the first and last state spaces under `J`.
    pub end_to_end: f64,
    /// Sum of per-link Hausdorff distances (the chain bound).
    pub link_sum: f64,
    /// Block offsets of each summand inside the full sum.
    pub offsets: Vec<usize>,
}

/// Compose `k-1` combined Lip-norms (each on `A_j (+) A_{j+1}`) into the
/// sup seminorm on the full sum and compute the end-to-end Hausdorff bound.
/// The end-to-end value never exceeds the link sum.
pub fn chain(
    spaces: &[&OrderUnitSpace],
    links: &[LipNorm],
    tol: &Tolerances,
) -> Result<ChainResult, BridgeError> {
    let k = spaces.len();
    if k < 2 || links.len() != k - 1 {
        return Err(BridgeError::InvalidParams(
            "need k >= 2 spaces and k-1 links".into(),
        ));
    }
    let mut offsets = vec![0usize; k];
    for j in 1..k {
        offsets[j] = offsets[j - 1] + spaces[j - 1].dimension;
    }
    let total: usize = offsets[k - 1] + spaces[k - 1].dimension;
    let mut functionals: Vec<Vec<f64>> = Vec::new();
    let mut link_sum = 0.0;
    for (j, link) in links.iter().enumerate() {
        let fj = polyhedral(link)?;
        let pair_dim = spaces[j].dimension + spaces[j + 1].dimension;
        for nu in fj {
            if nu.len() != pair_dim {
                return Err(BridgeError::InvalidParams(format!(
                    "link {j} functional dimension {} != {pair_dim}",
                    nu.len()
                )));
            }
            let mut full = vec![0.0; total];
            full[offsets[j]..offsets[j] + pair_dim].copy_from_slice(nu);
            functionals.push(full);
        }
        link_sum += hausdorff_states(
            link,
            &spaces[j].state_generators,
            &spaces[j + 1].state_generators,
            spaces[j].dimension,
            spaces[j + 1].dimension,
            tol,
        )?;
    }
    let j_norm = LipNorm::Polyhedral { functionals };
    let emb = |idx: usize| -> Vec<Vec<f64>> {
        spaces[idx]
            .state_generators
            .iter()
            .map(|mu| {
                let mut v = vec![0.0; total];
                v[offsets[idx]..offsets[idx] + spaces[idx].dimension].copy_from_slice(mu);
                v
            })
            .collect()
    };
    let end_to_end = hausdorff_embedded(&j_norm, &emb(0), &emb(k - 1), tol)?;
    Ok(ChainResult { j_norm, end_to_end, link_sum, offsets })
}

/// Dual of the chain norm restricted to a functional supported on the first
/// and last blocks (the end-to-end quotient dual).
pub fn chain_end_to_end_dual(
    result: &ChainResult,
    spaces: &[&OrderUnitSpace],
    lambda_first: &[f64],
    lambda_last: &[f64],
    tol: &Tolerances,
) -> Result<f64, BridgeError> {
    let k = spaces.len();
    let total = result.offsets[k - 1] + spaces[k - 1].dimension;
    let mut lambda = vec![0.0; total];
    lambda[..lambda_first.len()].copy_from_slice(lambda_first);
    lambda[result.offsets[k - 1]..result.offsets[k - 1] + lambda_last.len()]
        .copy_from_slice(lambda_last);
    let mut unit = Vec::with_capacity(total);
    for s in spaces {
        unit.extend_from_slice(&s.unit);
    }
    Ok(dual_seminorm(&result.j_norm, &lambda, &unit, tol)?)
}

/// Certificate of the dual-perturbation bound: two Lip-norms on the same
/// space whose duals differ by at most `δ` relative to the base norm give
/// `dist_q <= δ` via the doubling-style bridge `N = δ^{-1} ||a - b||`.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbationCertificate {
    pub measured_delta: f64,
    pub used_delta: f64,
    pub upper: f64,
    pub ok: bool,
    pub worst_violation: f64,
    pub samples: usize,
}

/// Measure `sup |L1'(λ) - L2'(λ)| / ||λ||'` over a seeded sphere of centered
/// functionals, build the bridge at the given (or measured) `δ`, and return
/// the certified upper bound, asserting `upper <= δ + tol`.
pub fn perturbation_bridge(
    space: &OrderUnitSpace,
    l1: &LipNorm,
    l2: &LipNorm,
    delta: Option<f64>,
    tol: &Tolerances,
) -> Result<PerturbationCertificate, BridgeError> {
    let n = space.dimension;
    let samples = tol.samples;
    let measured: Vec<f64> = map_range(ExecMode::auto(), samples, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(
            tol.seed ^ (s as u64).wrapping_mul(0x2545f4914f6cdd1d),
        );
        let mut lambda: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // center: subtract the unit direction so lambda(e) = 0
        let ee = dot(&space.unit, &space.unit);
        let le = dot(&lambda, &space.unit);
        for (v, e) in lambda.iter_mut().zip(space.unit.iter()) {
            *v -= le / ee * e;
        }
        let base = decomposition_l1(&space.state_generators, &lambda, tol);
        let d1 = dual_seminorm(l1, &lambda, &space.unit, tol);
        let d2 = dual_seminorm(l2, &lambda, &space.unit, tol);
        match (base, d1, d2) {
            (Ok(b), Ok(x), Ok(y)) if b > tol.lp => (x - y).abs() / b,
            _ => 0.0,
        }
    });
    let measured_delta = measured.into_iter().fold(0.0, f64::max);
    let used_delta = match delta {
        Some(d) => {
            if d + tol.lp < measured_delta {
                return Err(BridgeError::HypothesisViolated(format!(
                    "requested delta {d} below measured {measured_delta}"
                )));
            }
            d
        }
        None => measured_delta.max(tol.lp), // a zero delta would have no gap
    };
    let bridge_funcs: Vec<Vec<f64>> = space
        .state_generators
        .iter()
        .map(|mu| {
            let mut f: Vec<f64> = mu.iter().map(|v| v / used_delta).collect();
            f.extend(mu.iter().map(|v| -v / used_delta));
            f
        })
        .collect();
    let bridge = Bridge {
        functionals: bridge_funcs,
        gap: used_delta,
        recipe: RecipeTag::Perturbation,
        paper_certified: true,
    };
    let upper = distq_upper(space, l1, space, l2, &bridge, tol)?;
    let ok = upper <= used_delta + 1e-8;
    Ok(PerturbationCertificate {
        measured_delta,
        used_delta,
        upper,
        ok,
        worst_violation: 0.0,
        samples,
    })
}

/// Certified bracket for the golden three-point/two-point instance: the
/// upper bound comes from the segment-quotient plus a tight doubling bridge
/// on the enlarged-state realization, the lower bound from the diameter gap.
/// Returns `(lower, upper)`; the true distance is exactly `1/2`.
pub fn appendix1_bracket(tol: &Tolerances) -> Result<(f64, f64), BridgeError> {
    use crate::classical::{appendix1_instance, embed_cqms};
    use crate::ouspace::restrict_to_states;

    let inst = appendix1_instance();
    let (cy, ly) = embed_cqms(&inst.y, tol).map_err(classical_to_bridge)?;
    let (cz, lz) = embed_cqms(&inst.z, tol).map_err(classical_to_bridge)?;
    let lower = distq_lower(&cy, &ly, &cz, &lz, tol)?;

    // enlarged-state realization: same coordinates, generators = K's vertices
    let (ak, _) = restrict_to_states(&cy, &inst.k, tol)
        .map_err(|e| BridgeError::InvalidParams(e.to_string()))?;
    let eps = 1e-7;
    let bridge = make_bridge(&Recipe::Doubling { eps }, &ak, &ak)?;
    let (l, _) = combine(&ly, &ly, &bridge, ak.dimension, ak.dimension)?;
    let dim = ak.dimension;
    let emb_a: Vec<Vec<f64>> = ak
        .state_generators
        .iter()
        .map(|mu| pad_right(mu, dim))
        .collect();
    let emb_b: Vec<Vec<f64>> = inst
        .k1
        .generators
        .iter()
        .map(|w| pad_left(w, dim))
        .collect();
    let upper = hausdorff_embedded(&l, &emb_a, &emb_b, tol)?;
    Ok((lower, upper))
}

fn classical_to_bridge(e: crate::classical::ClassicalError) -> BridgeError {
    BridgeError::InvalidParams(e.to_string())
}
