//! Pair-swap Dirac operator realizing the metric Lipschitz seminorm as a
//! commutator norm.
//!
//! On a finite metric space `(X, ρ)` the Hilbert space is spanned by ordered
//! pairs `(i, j)` with `i != j`, with inner product weighted by `m_i m_j` for
//! a choice of positive weights `m`. The operator acts by
//! `(D ξ)(i, j) = ξ(j, i) / ρ(i, j)` and multiplication by a function `f`
//! acts by `(f ξ)(i, j) = f(i) ξ(i, j)`, so the commutator swaps each pair
//! with coefficient `(f(j) - f(i)) / ρ(i, j)`. Because the swap preserves the
//! weight, each unordered pair contributes an exactly solvable 2x2 block and
//! the operator norm is `max_{i<j} |f(i) - f(j)| / ρ(i, j)` — the metric
//! Lipschitz constant — independently of the weights.

use thiserror::Error;

use crate::classical::FiniteMetricSpace;
use crate::exec::{map_indexed, ExecMode};
use crate::tol::Tolerances;

/// Largest point count for which the dense-matrix oracle is built.
pub const DENSE_LIMIT: usize = 12;

#[derive(Debug, Clone)]
pub struct DiracTriple {
    pub points: FiniteMetricSpace,
    /// Strictly positive weight per point; enters only the inner product.
    pub weights: Vec<f64>,
    /// Ordered pairs `(i, j)`, `i != j`, indexing the Hilbert space basis.
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DiracError {
    #[error("need at least 2 points")]
    TooSmall,
    #[error("weight {index} is {value}; weights must be strictly positive")]
    NonpositiveWeight { index: usize, value: f64 },
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("not a metric: {0}")]
    NotAMetric(String),
    #[error("dense oracle limited to {DENSE_LIMIT} points, got {0}")]
    TooLargeForDense(usize),
}

/// Build the triple; `D` itself is implicit in the pair list and distances.
pub fn build_dirac(
    x: &FiniteMetricSpace,
    m: &[f64],
    tol: &Tolerances,
) -> Result<DiracTriple, DiracError> {
    let n = x.len();
    if n < 2 {
        return Err(DiracError::TooSmall);
    }
    x.validate(tol).map_err(DiracError::NotAMetric)?;
    if m.len() != n {
        return Err(DiracError::DimensionMismatch);
    }
    for (index, &value) in m.iter().enumerate() {
        if !(value > 0.0) {
            return Err(DiracError::NonpositiveWeight { index, value });
        }
    }
    let mut pairs = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                pairs.push((i, j));
            }
        }
    }
    Ok(DiracTriple {
        points: x.clone(),
        weights: m.to_vec(),
        pairs,
    })
}

/// `||[D, M_f]||`, computed exactly from the 2x2 block structure:
/// the maximum over unordered pairs of `|f(i) - f(j)| / ρ(i, j)`.
pub fn commutator_lipnorm(triple: &DiracTriple, f: &[f64]) -> Result<f64, DiracError> {
    let n = triple.points.len();
    if f.len() != n {
        return Err(DiracError::DimensionMismatch);
    }
    let blocks = map_indexed(ExecMode::auto(), &triple.pairs, |_, &(i, j)| {
        if i < j {
            (f[i] - f[j]).abs() / triple.points.dist[i][j]
        } else {
            0.0
        }
    });
    Ok(blocks.into_iter().fold(0.0, f64::max))
}

/// Dense matrix of an operator in the orthonormalized pair basis
/// `e_{(i,j)} / sqrt(m_i m_j)`. The swap preserves the weight, so the
/// weights cancel and the matrices are real symmetric / antisymmetric.
fn dense_operator(
    triple: &DiracTriple,
    coeff: impl Fn(usize, usize) -> f64,
) -> Result<Vec<Vec<f64>>, DiracError> {
    let n = triple.points.len();
    if n > DENSE_LIMIT {
        return Err(DiracError::TooLargeForDense(n));
    }
    let dim = triple.pairs.len();
    let index = |i: usize, j: usize| -> usize {
        triple
            .pairs
            .iter()
            .position(|&p| p == (i, j))
            .expect("pair present")
    };
    let mut mat = vec![vec![0.0; dim]; dim];
    for (row, &(i, j)) in triple.pairs.iter().enumerate() {
        mat[row][index(j, i)] = coeff(i, j);
    }
    Ok(mat)
}

/// Dense `D` in the orthonormalized basis.
pub fn dense_dirac(triple: &DiracTriple) -> Result<Vec<Vec<f64>>, DiracError> {
    dense_operator(triple, |i, j| 1.0 / triple.points.dist[i][j])
}

/// Dense `[D, M_f]` in the orthonormalized basis.
pub fn dense_commutator(
    triple: &DiracTriple,
    f: &[f64],
) -> Result<Vec<Vec<f64>>, DiracError> {
    if f.len() != triple.points.len() {
        return Err(DiracError::DimensionMismatch);
    }
    dense_operator(triple, |i, j| (f[j] - f[i]) / triple.points.dist[i][j])
}

/// `||D - D^T||_max` in the orthonormalized basis; zero by construction.
pub fn self_adjointness_residual(triple: &DiracTriple) -> Result<f64, DiracError> {
    let d = dense_dirac(triple)?;
    let mut worst: f64 = 0.0;
    for (r, row) in d.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            worst = worst.max((v - d[c][r]).abs());
        }
    }
    Ok(worst)
}

/// Spectral norm of a small dense real matrix by power iteration on `A^T A`.
pub fn spectral_norm(a: &[Vec<f64>], iterations: usize) -> f64 {
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let apply = |v: &[f64]| -> Vec<f64> {
        let av: Vec<f64> = a
            .iter()
            .map(|row| row.iter().zip(v.iter()).map(|(x, y)| x * y).sum())
            .collect();
        (0..a[0].len())
            .map(|c| a.iter().zip(av.iter()).map(|(row, y)| row[c] * y).sum())
            .collect()
    };
    // Deterministic start with incommensurate components so no eigenvector
    // of interest is missed.
    let mut v: Vec<f64> = (0..a[0].len())
        .map(|i| 1.0 + 0.5 * ((i as f64) + 1.0).sin())
        .collect();
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let w = apply(&v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v = w.into_iter().map(|x| x / norm).collect();
    }
    lambda.sqrt()
}

/// Dense-oracle commutator norm (independent check of the block reduction).
pub fn commutator_lipnorm_dense(
    triple: &DiracTriple,
    f: &[f64],
) -> Result<f64, DiracError> {
    let c = dense_commutator(triple, f)?;
    Ok(spectral_norm(&c, 600))
}
