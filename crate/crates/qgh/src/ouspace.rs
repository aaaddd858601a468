//! Finite-dimensional order-unit spaces given by a generating list of states.
//!
//! The norm is `||a|| = max_i |mu_i(a)|` over the state generators; the order
//! is the one they induce. Direct sums and restriction to a convex set of
//! states (the quotient construction) are the two structural operations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convexsolve::{dot, Polytope};
use crate::tol::Tolerances;

/// `(V, e)` with a finite separating family of states.
///
/// Serializes to the on-disk schema
/// `{ "dimension": n, "unit": [..], "states": [[..],..], "labels": [..] }`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OrderUnitSpace {
    pub dimension: usize,
    pub unit: Vec<f64>,
    #[serde(rename = "states")]
    pub state_generators: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// Linear map `A -> B` recorded by `restrict_to_states` so quotient Lip-norms
/// can be evaluated dual-side (`pi'(lambda) = pi^T lambda`).
#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    Identity,
    /// Row-major matrix of the map into the quotient coordinates.
    Matrix(Vec<Vec<f64>>),
}

impl Projection {
    /// Apply the map to an element of A.
    pub fn apply(&self, a: &[f64]) -> Vec<f64> {
        match self {
            Projection::Identity => a.to_vec(),
            Projection::Matrix(m) => m.iter().map(|row| dot(row, a)).collect(),
        }
    }

    /// Pull a functional on B back to a functional on A.
    pub fn pull_back(&self, lambda: &[f64]) -> Vec<f64> {
        match self {
            Projection::Identity => lambda.to_vec(),
            Projection::Matrix(m) => {
                let n = m.first().map_or(0, |r| r.len());
                let mut out = vec![0.0; n];
                for (li, row) in lambda.iter().zip(m.iter()) {
                    for (o, v) in out.iter_mut().zip(row.iter()) {
                        *o += li * v;
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OuError {
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("generator {index} evaluates to {value} on the unit (must be 1)")]
    UnitViolation { index: usize, value: f64 },
    #[error("state generators do not separate points (rank {rank} < {needed})")]
    DegenerateStates { rank: usize, needed: usize },
    #[error("empty polytope")]
    EmptyPolytope,
}

impl OrderUnitSpace {
    /// Validating constructor: each generator must evaluate to 1 on the unit
    /// (gate `tol.exact`) and the generators must separate points.
    pub fn new(
        unit: Vec<f64>,
        state_generators: Vec<Vec<f64>>,
        labels: Option<Vec<String>>,
        tol: &Tolerances,
    ) -> Result<Self, OuError> {
        let dimension = unit.len();
        let space = OrderUnitSpace { dimension, unit, state_generators, labels };
        space.validate(tol)?;
        Ok(space)
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<(), OuError> {
        if self.state_generators.is_empty() {
            return Err(OuError::EmptyPolytope);
        }
        for (i, mu) in self.state_generators.iter().enumerate() {
            if mu.len() != self.dimension {
                return Err(OuError::DimensionMismatch);
            }
            let v = dot(mu, &self.unit);
            if (v - 1.0).abs() > tol.exact {
                return Err(OuError::UnitViolation { index: i, value: v });
            }
        }
        let rank = matrix_rank(&self.state_generators, tol.lp);
        if rank < self.dimension {
            return Err(OuError::DegenerateStates { rank, needed: self.dimension });
        }
        Ok(())
    }

    /// The one-dimensional space of scalars.
    pub fn scalars() -> Self {
        OrderUnitSpace {
            dimension: 1,
            unit: vec![1.0],
            state_generators: vec![vec![1.0]],
            labels: None,
        }
    }

    /// `||a||` together with an `a >= 0` flag (both read off the generators).
    pub fn order_unit_norm(&self, a: &[f64]) -> Result<(f64, bool), OuError> {
        if a.len() != self.dimension {
            return Err(OuError::DimensionMismatch);
        }
        let mut norm: f64 = 0.0;
        let mut positive = true;
        for mu in &self.state_generators {
            let v = dot(mu, a);
            norm = norm.max(v.abs());
            if v < 0.0 {
                positive = false;
            }
        }
        Ok((norm, positive))
    }

    /// State generators as a polytope in the dual space.
    pub fn state_polytope(&self) -> Polytope {
        Polytope {
            generators: self.state_generators.clone(),
            dimension: self.dimension,
        }
    }
}

/// `A (+) B` with unit `(e_A, e_B)`; each summand's generator acts through
/// its own block and ignores the other.
pub fn direct_sum(a: &OrderUnitSpace, b: &OrderUnitSpace) -> OrderUnitSpace {
    let n = a.dimension;
    let m = b.dimension;
    let mut unit = a.unit.clone();
    unit.extend_from_slice(&b.unit);
    let mut gens = Vec::with_capacity(a.state_generators.len() + b.state_generators.len());
    for mu in &a.state_generators {
        let mut g = mu.clone();
        g.extend(std::iter::repeat(0.0).take(m));
        gens.push(g);
    }
    for nu in &b.state_generators {
        let mut g = vec![0.0; n];
        g.extend_from_slice(nu);
        gens.push(g);
    }
    let labels = match (&a.labels, &b.labels) {
        (Some(la), Some(lb)) => {
            let mut l: Vec<String> = la.iter().map(|s| format!("A:{s}")).collect();
            l.extend(lb.iter().map(|s| format!("B:{s}")));
            Some(l)
        }
        _ => None,
    };
    OrderUnitSpace {
        dimension: n + m,
        unit,
        state_generators: gens,
        labels,
    }
}

/// Restrict `a` to a convex set `K` of states (vertex list). When the
/// vertices of `K` still separate points of A the quotient is realized on the
/// same coordinate space with `K`'s vertices as the new generators; otherwise
/// the quotient collapses the joint kernel, realized as
/// `a -> (kappa_1(a), .., kappa_k(a))` with coordinate evaluations as states.
pub fn restrict_to_states(
    a: &OrderUnitSpace,
    k: &Polytope,
    tol: &Tolerances,
) -> Result<(OrderUnitSpace, Projection), OuError> {
    if k.generators.is_empty() {
        return Err(OuError::EmptyPolytope);
    }
    if k.dimension != a.dimension {
        return Err(OuError::DimensionMismatch);
    }
    for (i, kappa) in k.generators.iter().enumerate() {
        let v = dot(kappa, &a.unit);
        if (v - 1.0).abs() > tol.exact.max(1e-9) {
            return Err(OuError::UnitViolation { index: i, value: v });
        }
    }
    let rank = matrix_rank(&k.generators, tol.lp);
    if rank == a.dimension {
        let b = OrderUnitSpace {
            dimension: a.dimension,
            unit: a.unit.clone(),
            state_generators: k.generators.clone(),
            labels: None,
        };
        Ok((b, Projection::Identity))
    } else {
        let kk = k.generators.len();
        let b = OrderUnitSpace {
            dimension: kk,
            unit: vec![1.0; kk],
            state_generators: (0..kk)
                .map(|i| {
                    let mut e = vec![0.0; kk];
                    e[i] = 1.0;
                    e
                })
                .collect(),
            labels: None,
        };
        Ok((b, Projection::Matrix(k.generators.clone())))
    }
}

/// Numerical row rank by Gaussian elimination with partial pivoting.
pub(crate) fn matrix_rank(rows: &[Vec<f64>], eps: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let ncols = m[0].len();
    let mut rank = 0;
    let mut col = 0;
    while rank < m.len() && col < ncols {
        let (imax, vmax) = m[rank..]
            .iter()
            .enumerate()
            .map(|(i, r)| (i + rank, r[col].abs()))
            .fold((rank, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if vmax <= eps.max(1e-11) {
            col += 1;
            continue;
        }
        m.swap(rank, imax);
        let pivot_row = m[rank].clone();
        let piv = pivot_row[col];
        for r in m.iter_mut().skip(rank + 1) {
            let f = r[col] / piv;
            if f != 0.0 {
                for (v, p) in r.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * p;
                }
            }
        }
        rank += 1;
        col += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn c3() -> OrderUnitSpace {
        // C(X) on a 3-point set: Dirac states as coordinate evaluations.
        OrderUnitSpace::new(
            vec![1.0, 1.0, 1.0],
            vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            None,
            &Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn unit_has_norm_one_and_is_positive() {
        let a = c3();
        let (n, pos) = a.order_unit_norm(&a.unit.clone()).unwrap();
        assert_eq!(n, 1.0);
        assert!(pos);
    }

    #[test]
    fn sup_norm_on_functions() {
        let a = c3();
        let (n, pos) = a.order_unit_norm(&[-2.0, 1.0, 3.0]).unwrap();
        assert_eq!(n, 3.0);
        assert!(!pos);
    }

    #[test]
    fn unit_violation_rejected() {
        let err = OrderUnitSpace::new(
            vec![1.0, 1.0],
            vec![vec![0.5, 0.0]],
            None,
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, OuError::UnitViolation { .. }));
    }

    #[test]
    fn degenerate_generators_rejected() {
        let err = OrderUnitSpace::new(
            vec![1.0, 1.0],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            None,
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, OuError::DegenerateStates { .. }));
    }

    #[test]
    fn direct_sum_of_scalars() {
        let r = OrderUnitSpace::scalars();
        let s = direct_sum(&r, &r);
        assert_eq!(s.dimension, 2);
        assert_eq!(s.state_generators, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn restriction_to_all_generators_is_identity() {
        let a = c3();
        let (b, pi) = restrict_to_states(&a, &a.state_polytope(), &tol()).unwrap();
        assert_eq!(pi, Projection::Identity);
        assert_eq!(b.state_generators, a.state_generators);
    }

    #[test]
    fn restriction_to_single_state_is_scalars() {
        let a = c3();
        let k = Polytope::new(vec![vec![0.25, 0.5, 0.25]]).unwrap();
        let (b, pi) = restrict_to_states(&a, &k, &tol()).unwrap();
        assert_eq!(b.dimension, 1);
        let img = pi.apply(&[2.0, 2.0, 2.0]);
        assert!((img[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let a = c3();
        let s = serde_json::to_string(&a).unwrap();
        assert!(s.contains("\"states\""));
        let back: OrderUnitSpace = serde_json::from_str(&s).unwrap();
        assert_eq!(a, back);
    }
}
