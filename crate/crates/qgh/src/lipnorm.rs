//! Lip-norms: polyhedral and oracle forms, dual seminorms, radii and
//! diameters, quotient duals.
//!
//! A polyhedral Lip-norm is `L(a) = max_j |nu_j(a)|` with every `nu_j`
//! vanishing on the unit; its dual on centered functionals is computed by the
//! decomposition LP `L'(lambda) = min sum |c_j| s.t. lambda = sum c_j nu_j`
//! (the two descriptions agree by bipolarity). Quotient Lip-norms are handled
//! entirely dual-side: the dual of the quotient seminorm is the restriction of
//! the dual along the recorded projection, which is an isometry.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classical::FiniteMetricSpace;
use crate::convexsolve::{dot, solve_lp, LinearProgram};
use crate::ouspace::{matrix_rank, OrderUnitSpace, Projection};
use crate::tol::Tolerances;

/// Evaluation callback for non-polyhedral Lip-norms (the torus case).
pub type LipEvaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum LipNorm {
    /// `L(a) = max_j |nu_j(a)|`, each `nu_j(e) = 0`.
    Polyhedral { functionals: Vec<Vec<f64>> },
    /// Black-box evaluator plus a finite functional list giving dual lower
    /// approximations; every value derived from the list is an estimate.
    Oracle {
        evaluator: LipEvaluator,
        sampled_functionals: Vec<Vec<f64>>,
    },
}

impl std::fmt::Debug for LipNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LipNorm::Polyhedral { functionals } => f
                .debug_struct("LipNorm::Polyhedral")
                .field("functionals", &functionals.len())
                .finish(),
            LipNorm::Oracle { sampled_functionals, .. } => f
                .debug_struct("LipNorm::Oracle")
                .field("sampled_functionals", &sampled_functionals.len())
                .finish(),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LipError {
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("functional is not centered: lambda(e) = {0}")]
    NotCentered(f64),
    #[error("functional outside the span of the Lip functionals")]
    Infeasible,
    #[error("not a metric: {0}")]
    NotAMetric(String),
    #[error("operation requires a polyhedral Lip-norm")]
    NotPolyhedral,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

/// On-disk Lip-norm descriptor:
/// `{ "type": "polyhedral", "functionals": [[..],..] }` or
/// `{ "type": "metric", "space": { .. metric space .. } }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum LipNormSpec {
    Polyhedral { functionals: Vec<Vec<f64>> },
    Metric { space: FiniteMetricSpace },
}

impl LipNormSpec {
    pub fn build(&self, tol: &Tolerances) -> Result<LipNorm, LipError> {
        match self {
            LipNormSpec::Polyhedral { functionals } => Ok(LipNorm::Polyhedral {
                functionals: functionals.clone(),
            }),
            LipNormSpec::Metric { space } => lipnorm_from_metric(space, tol),
        }
    }
}

/// Slope seminorm of a finite metric space:
/// `L(f) = max over pairs of |f(x) - f(y)| / rho(x,y)`.
pub fn lipnorm_from_metric(
    x: &FiniteMetricSpace,
    tol: &Tolerances,
) -> Result<LipNorm, LipError> {
    x.validate(tol).map_err(LipError::NotAMetric)?;
    let n = x.len();
    let mut functionals = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = x.dist[i][j];
            let mut nu = vec![0.0; n];
            nu[i] = 1.0 / d;
            nu[j] = -1.0 / d;
            functionals.push(nu);
        }
    }
    Ok(LipNorm::Polyhedral { functionals })
}

/// `L(a)`.
pub fn eval_lip(l: &LipNorm, a: &[f64]) -> Result<f64, LipError> {
    match l {
        LipNorm::Polyhedral { functionals } => {
            if functionals.iter().any(|nu| nu.len() != a.len()) {
                return Err(LipError::DimensionMismatch);
            }
            Ok(functionals
                .iter()
                .map(|nu| dot(nu, a).abs())
                .fold(0.0, f64::max))
        }
        LipNorm::Oracle { evaluator, .. } => Ok(evaluator(a)),
    }
}

/// `L'(lambda) = sup { |lambda(a)| : L(a) <= 1 }` for centered `lambda`,
/// computed as the decomposition LP. For Oracle Lip-norms the value from the
/// sampled functional list is a lower estimate.
pub fn dual_seminorm(
    l: &LipNorm,
    lambda: &[f64],
    unit: &[f64],
    tol: &Tolerances,
) -> Result<f64, LipError> {
    let centered = dot(lambda, unit);
    if centered.abs() > 1e-9 {
        return Err(LipError::NotCentered(centered));
    }
    let functionals = match l {
        LipNorm::Polyhedral { functionals } => functionals,
        LipNorm::Oracle { sampled_functionals, .. } => sampled_functionals,
    };
    decomposition_l1(functionals, lambda, tol)
}

/// `min sum |c_j| s.t. sum c_j nu_j = lambda` via LP (p/q splitting).
pub(crate) fn decomposition_l1(
    functionals: &[Vec<f64>],
    lambda: &[f64],
    tol: &Tolerances,
) -> Result<f64, LipError> {
    let n = lambda.len();
    let jn = functionals.len();
    if functionals.iter().any(|nu| nu.len() != n) {
        return Err(LipError::DimensionMismatch);
    }
    if lambda.iter().all(|v| v.abs() <= tol.lp) {
        return Ok(0.0);
    }
    let nvar = 2 * jn;
    let mut constraints = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![0.0; nvar];
        for (j, nu) in functionals.iter().enumerate() {
            row[2 * j] = nu[i];
            row[2 * j + 1] = -nu[i];
        }
        constraints.push(row);
    }
    let lp = LinearProgram {
        objective: vec![1.0; nvar],
        constraints,
        rhs: lambda.to_vec(),
        bounds: vec![(0.0, f64::INFINITY); nvar],
    };
    match solve_lp(&lp, tol) {
        Ok(sol) => Ok(sol.value),
        Err(crate::convexsolve::ConvexError::Infeasible) => Err(LipError::Infeasible),
        Err(e) => Err(LipError::NumericalFailure(e.to_string())),
    }
}

/// `(radius, diameter)` of the state space under `rho_L`. The diameter is a
/// max over generator pairs, exact by convexity of the metric.
pub fn radius_diameter(
    space: &OrderUnitSpace,
    l: &LipNorm,
    tol: &Tolerances,
) -> Result<(f64, f64), LipError> {
    let gens = &space.state_generators;
    let mut diameter: f64 = 0.0;
    for i in 0..gens.len() {
        for j in (i + 1)..gens.len() {
            let lambda: Vec<f64> = gens[i]
                .iter()
                .zip(gens[j].iter())
                .map(|(a, b)| a - b)
                .collect();
            diameter = diameter.max(dual_seminorm(l, &lambda, &space.unit, tol)?);
        }
    }
    Ok((diameter / 2.0, diameter))
}

/// Dual of the quotient Lip-norm along `pi`: `(L_B)'(lambda) = L'(pi'(lambda))`.
pub fn quotient_dual(
    pi: &Projection,
    l: &LipNorm,
    lambda: &[f64],
    unit_b: &[f64],
    unit_a: &[f64],
    tol: &Tolerances,
) -> Result<f64, LipError> {
    let centered = dot(lambda, unit_b);
    if centered.abs() > 1e-9 {
        return Err(LipError::NotCentered(centered));
    }
    let pulled = pi.pull_back(lambda);
    dual_seminorm(l, &pulled, unit_a, tol)
}

/// Structural report from `validate_lipnorm`.
#[derive(Debug, Clone, Serialize)]
pub struct LipReport {
    pub l_of_unit: f64,
    pub null_space_rank_ok: bool,
    pub radius: Option<f64>,
    pub valid: bool,
}

/// Checks `L(e) = 0`, null space exactly the scalars (functional rank
/// `n - 1`), and finite radius. Total boundedness of the unit ball is
/// automatic in finite dimension, so nothing further is tested.
pub fn validate_lipnorm(
    space: &OrderUnitSpace,
    l: &LipNorm,
    tol: &Tolerances,
) -> Result<LipReport, LipError> {
    let l_of_unit = eval_lip(l, &space.unit)?;
    let rank_ok = match l {
        LipNorm::Polyhedral { functionals } => {
            matrix_rank(functionals, tol.lp) == space.dimension.saturating_sub(1)
        }
        // the sampled list is a lower approximation; rank can only be checked
        // against it
        LipNorm::Oracle { sampled_functionals, .. } => {
            matrix_rank(sampled_functionals, tol.lp) == space.dimension.saturating_sub(1)
        }
    };
    let radius = if rank_ok && l_of_unit.abs() <= tol.lp {
        radius_diameter(space, l, tol).ok().map(|(r, _)| r)
    } else {
        None
    };
    let valid = l_of_unit.abs() <= tol.lp && rank_ok && radius.is_some();
    Ok(LipReport { l_of_unit, null_space_rank_ok: rank_ok, radius, valid })
}

/// `||a||~ = min_t ||a - t e||`, by LP as used in the radius inequality
/// `||a||~ <= radius * L(a)`.
pub fn tilde_norm(
    space: &OrderUnitSpace,
    a: &[f64],
    tol: &Tolerances,
) -> Result<f64, LipError> {
    if a.len() != space.dimension {
        return Err(LipError::DimensionMismatch);
    }
    // min s  s.t.  -s <= mu_i(a) - t <= s  (mu_i(e) = 1)
    // vars: t free, s >= 0, slacks
    let g = space.state_generators.len();
    let nvar = 2 + 2 * g;
    let mut constraints = Vec::new();
    let mut rhs = Vec::new();
    for (i, mu) in space.state_generators.iter().enumerate() {
        let v = dot(mu, a);
        // t + s - s1 = v ;  -t + s - s2 = -v
        let mut r1 = vec![0.0; nvar];
        r1[0] = 1.0;
        r1[1] = 1.0;
        r1[2 + 2 * i] = -1.0;
        constraints.push(r1);
        rhs.push(v);
        let mut r2 = vec![0.0; nvar];
        r2[0] = -1.0;
        r2[1] = 1.0;
        r2[2 + 2 * i + 1] = -1.0;
        constraints.push(r2);
        rhs.push(-v);
    }
    let mut objective = vec![0.0; nvar];
    objective[1] = 1.0;
    let mut bounds = vec![(0.0, f64::INFINITY); nvar];
    bounds[0] = (f64::NEG_INFINITY, f64::INFINITY);
    let lp = LinearProgram { objective, constraints, rhs, bounds };
    solve_lp(&lp, tol)
        .map(|s| s.value)
        .map_err(|e| LipError::NumericalFailure(e.to_string()))
}
