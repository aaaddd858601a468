//! Character kernels on the torus: the non-negative character polynomial,
//! its normalized convolution powers, the approximation constant `delta_n`,
//! the finite frequency sets they select, and the multiplier projection that
//! truncates torus elements onto those frequencies.
//!
//! The default character is `chi = |chi_0|^2` for `chi_0` with frequency
//! multiset `{0, e_1, .., e_d}`, so `chi >= 0` and its coefficients are the
//! autocorrelation counts of that multiset. The kernel is
//! `phi_n = chi^n / ||chi^n||_1`, the multiplier is `p -> coeff(p)/coeff(0)`,
//! and `delta_n` is the integral of `phi_n` against a length function — the
//! constant controlling how well the truncation preserves Lip-norm data.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::exec::{map_range, ExecMode};
use crate::qtorus::{
    lie_lipnorm, norm_theta, wrap_to_fundamental, GNorm, QtError, SkewMatrix, TorusElement,
    TWO_PI,
};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Error)]
pub enum FejerError {
    #[error("quadrature residual {residual} above tolerance {limit}")]
    GridTooCoarse { residual: f64, limit: f64 },
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("grid must be at least 64 per axis, got {0}")]
    GridTooSmall(usize),
    #[error(transparent)]
    Qt(#[from] QtError),
}

/// Non-negative trigonometric polynomial with symmetric coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterPoly {
    pub d: usize,
    pub coeffs: BTreeMap<Vec<i64>, f64>,
}

impl CharacterPoly {
    /// `chi(x) = sum_p coeffs(p) exp(2 pi i p.x)`, real by symmetry.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .map(|(p, c)| {
                let px: f64 = p.iter().zip(x.iter()).map(|(&pi, xi)| pi as f64 * xi).sum();
                c * (TWO_PI * px).cos()
            })
            .sum()
    }
}

/// Autocorrelation character of the frequency multiset `{0, e_1, .., e_d}`:
/// `coeffs(p) = #{(q, q') : q - q' = p}`. For `d = 1` this is `2 + 2 cos`.
pub fn build_character(d: usize) -> CharacterPoly {
    let mut freqs: Vec<Vec<i64>> = vec![vec![0; d]];
    for i in 0..d {
        let mut e = vec![0; d];
        e[i] = 1;
        freqs.push(e);
    }
    let mut coeffs = BTreeMap::new();
    for q in &freqs {
        for qp in &freqs {
            let p: Vec<i64> = q.iter().zip(qp.iter()).map(|(a, b)| a - b).collect();
            *coeffs.entry(p).or_insert(0.0) += 1.0;
        }
    }
    CharacterPoly { d, coeffs }
}

fn convolve(
    a: &BTreeMap<Vec<i64>, f64>,
    b: &BTreeMap<Vec<i64>, f64>,
) -> BTreeMap<Vec<i64>, f64> {
    let mut out = BTreeMap::new();
    for (p, cp) in a {
        for (q, cq) in b {
            let r: Vec<i64> = p.iter().zip(q.iter()).map(|(x, y)| x + y).collect();
            *out.entry(r).or_insert(0.0) += cp * cq;
        }
    }
    out
}

/// Normalized kernel data for one power `n`.
#[derive(Debug, Clone, Serialize)]
pub struct FejerKernel {
    pub d: usize,
    pub n: usize,
    /// Fourier coefficients of `phi_n`, all in `[0, 1]` with value 1 at 0.
    pub multiplier: BTreeMap<Vec<i64>, f64>,
    /// `integral of phi_n * length`, from the finer of two midpoint grids.
    pub delta: f64,
    /// Difference between the two grid refinements (quadrature bound).
    pub delta_residual: f64,
    /// Frequency support, symmetric and containing 0.
    pub support: Vec<Vec<i64>>,
}

/// `phi_n = chi^n / ||chi^n||_1` with `||chi^n||_1` the constant coefficient
/// (valid because `chi >= 0`), and `delta_n` by midpoint quadrature of
/// `phi_n * length` at `grid` and `2 * grid` points per axis.
pub fn build_kernel(
    chi: &CharacterPoly,
    n: usize,
    length: &GNorm,
    grid: usize,
    max_residual: f64,
) -> Result<FejerKernel, FejerError> {
    if grid < 64 {
        return Err(FejerError::GridTooSmall(grid));
    }
    let mut power = BTreeMap::new();
    power.insert(vec![0i64; chi.d], 1.0);
    for _ in 0..n {
        power = convolve(&power, &chi.coeffs);
    }
    let norm1 = *power.get(&vec![0i64; chi.d]).expect("constant coefficient");
    let multiplier: BTreeMap<Vec<i64>, f64> = power
        .iter()
        .filter(|(_, c)| **c != 0.0)
        .map(|(p, c)| (p.clone(), c / norm1))
        .collect();
    let support: Vec<Vec<i64>> = multiplier.keys().cloned().collect();
    let phi = CharacterPoly {
        d: chi.d,
        coeffs: power.iter().map(|(p, c)| (p.clone(), c / norm1)).collect(),
    };
    let quad = |g: usize| -> f64 {
        let total = g.pow(chi.d as u32);
        let cell = 1.0 / total as f64;
        let step = 1.0 / g as f64;
        let sums = map_range(ExecMode::auto(), total, |mut idx| {
            let mut x = vec![0.0; chi.d];
            for xi in x.iter_mut().rev() {
                *xi = ((idx % g) as f64 + 0.5) * step;
                idx /= g;
            }
            let w = wrap_to_fundamental(&x);
            phi.eval(&x) * length.eval(&w)
        });
        sums.into_iter().sum::<f64>() * cell
    };
    let coarse = quad(grid);
    let fine = quad(2 * grid);
    let delta_residual = (fine - coarse).abs();
    if delta_residual > max_residual {
        return Err(FejerError::GridTooCoarse { residual: delta_residual, limit: max_residual });
    }
    Ok(FejerKernel {
        d: chi.d,
        n,
        multiplier,
        delta: fine,
        delta_residual,
        support,
    })
}

/// Frequency support of the `n`-th kernel without any quadrature: the
/// support of `chi^n` for the default character.
pub fn frequency_support(d: usize, n: usize) -> Vec<Vec<i64>> {
    let chi = build_character(d);
    let mut power = BTreeMap::new();
    power.insert(vec![0i64; d], 1.0);
    for _ in 0..n {
        power = convolve(&power, &chi.coeffs);
    }
    power
        .into_iter()
        .filter(|(_, c)| *c != 0.0)
        .map(|(p, _)| p)
        .collect()
}

/// Multiplier projection `(P_n f)(p) = multiplier(p) f(p)`.
pub fn apply_pn(kernel: &FejerKernel, f: &TorusElement) -> Result<TorusElement, FejerError> {
    if kernel.d != f.d {
        return Err(FejerError::DimensionMismatch);
    }
    let coeffs = f
        .coeffs
        .iter()
        .filter_map(|(p, c)| {
            kernel
                .multiplier
                .get(p)
                .map(|m| (p.clone(), c * Complex64::new(*m, 0.0)))
        })
        .filter(|(_, c)| c.norm() > 0.0)
        .collect();
    Ok(TorusElement { d: f.d, coeffs })
}

/// Joint check of the truncation bounds: the residual `||f - P_n f||` against
/// `delta_n` times the Lip value, and contractivity of `P_n` on the Lip-norm.
/// All operator norms are window estimates; the recorded bias direction is
/// that both sides are lower bounds, so a small slack absorbs estimator noise.
#[derive(Debug, Clone, Serialize)]
pub struct TruncationReport {
    pub residual_norm: f64,
    pub delta_times_lip: f64,
    pub residual_ok: bool,
    pub lip_f: f64,
    pub lip_pnf: f64,
    pub contraction_ok: bool,
    pub lip_exact: bool,
}

pub fn truncation_check(
    kernel: &FejerKernel,
    f: &TorusElement,
    theta: &SkewMatrix,
    tol: &Tolerances,
) -> Result<TruncationReport, FejerError> {
    let pnf = apply_pn(kernel, f)?;
    let diff = f.plus(&pnf.scaled(Complex64::new(-1.0, 0.0))).pruned(1e-15);
    let residual_norm = norm_theta(&diff, theta, tol)?.estimate;
    let g = GNorm::Euclidean;
    let lf = lie_lipnorm(f, theta, &g, tol.sphere_samples, tol)?;
    let lpf = lie_lipnorm(&pnf, theta, &g, tol.sphere_samples, tol)?;
    let slack = 1e-6 + 0.05 * lf.value;
    Ok(TruncationReport {
        residual_norm,
        delta_times_lip: kernel.delta * lf.value,
        residual_ok: residual_norm <= kernel.delta * lf.value + slack,
        lip_f: lf.value,
        lip_pnf: lpf.value,
        contraction_ok: lpf.value <= lf.value + slack,
        lip_exact: lf.exact,
    })
}

/// One row of the kernel table: `n, |support|, delta_n, residual`.
#[derive(Debug, Clone, Serialize)]
pub struct KernelRow {
    pub n: usize,
    pub support_size: usize,
    pub delta: f64,
    pub residual: f64,
}

pub fn kernel_table(
    d: usize,
    n_max: usize,
    length: &GNorm,
    grid: usize,
    max_residual: f64,
) -> Result<Vec<KernelRow>, FejerError> {
    let chi = build_character(d);
    (1..=n_max)
        .map(|n| {
            let k = build_kernel(&chi, n, length, grid, max_residual)?;
            Ok(KernelRow {
                n,
                support_size: k.support.len(),
                delta: k.delta,
                residual: k.delta_residual,
            })
        })
        .collect()
}

pub fn kernel_table_csv(rows: &[KernelRow]) -> String {
    let mut out = String::from("n,support_size,delta,residual\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.12},{:.3e}\n",
            r.n, r.support_size, r.delta, r.residual
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn character_dim_one_is_two_plus_two_cos() {
        let chi = build_character(1);
        assert_eq!(chi.coeffs.get(&vec![0]), Some(&2.0));
        assert_eq!(chi.coeffs.get(&vec![1]), Some(&1.0));
        assert_eq!(chi.coeffs.get(&vec![-1]), Some(&1.0));
        assert!((chi.eval(&[0.25]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn character_symmetry_and_diagonal_count() {
        for d in [1, 2, 3] {
            let chi = build_character(d);
            assert_eq!(chi.coeffs.get(&vec![0; d]), Some(&(d as f64 + 1.0)));
            for (p, c) in &chi.coeffs {
                let neg: Vec<i64> = p.iter().map(|x| -x).collect();
                assert_eq!(chi.coeffs.get(&neg), Some(c));
            }
        }
    }

    #[test]
    fn central_coefficient_is_central_binomial() {
        // ||chi^n||_1 for d = 1 is the central coefficient of (1+z)^n (1+1/z)^n
        let chi = build_character(1);
        let mut power = BTreeMap::new();
        power.insert(vec![0i64], 1.0);
        for _ in 0..3 {
            power = convolve(&power, &chi.coeffs);
        }
        assert_eq!(power.get(&vec![0]), Some(&20.0)); // C(6, 3)
    }

    #[test]
    fn delta_one_matches_closed_form() {
        let chi = build_character(1);
        let k = build_kernel(&chi, 1, &GNorm::Euclidean, 256, 1e-3).unwrap();
        let exact = 0.25 - 1.0 / (std::f64::consts::PI * std::f64::consts::PI);
        assert!((k.delta - exact).abs() < 1e-4, "{} vs {exact}", k.delta);
        assert_eq!(k.support, vec![vec![-1], vec![0], vec![1]]);
    }

    #[test]
    fn support_grows_with_n_and_multiplier_bounded() {
        let chi = build_character(1);
        let k3 = build_kernel(&chi, 3, &GNorm::Euclidean, 128, 1e-2).unwrap();
        let k4 = build_kernel(&chi, 4, &GNorm::Euclidean, 128, 1e-2).unwrap();
        let s3: Vec<i64> = k3.support.iter().map(|p| p[0]).collect();
        assert_eq!(s3, (-3..=3).collect::<Vec<i64>>());
        for p in &k3.support {
            assert!(k4.support.contains(p));
            let m = k3.multiplier[p];
            assert!((0.0..=1.0).contains(&m));
        }
        assert_eq!(k3.multiplier[&vec![0]], 1.0);
    }

    #[test]
    fn projection_contracts_l1_and_fixes_identity() {
        let chi = build_character(2);
        let k = build_kernel(&chi, 2, &GNorm::Euclidean, 64, 1e-2).unwrap();
        let id = TorusElement::delta(vec![0, 0]);
        assert_eq!(apply_pn(&k, &id).unwrap(), id);
        let mut f = TorusElement::zero(2);
        f.add_term(vec![1, 1], Complex64::new(0.7, -0.1));
        f.add_term(vec![5, 5], Complex64::new(2.0, 0.0)); // outside the support
        let pf = apply_pn(&k, &f).unwrap();
        assert!(pf.coeffs.get(&vec![5, 5]).is_none());
        assert!(pf.l1_norm() <= f.l1_norm());
    }

    #[test]
    fn coarse_grid_rejected() {
        let chi = build_character(1);
        assert!(matches!(
            build_kernel(&chi, 1, &GNorm::Euclidean, 32, 1e-3),
            Err(FejerError::GridTooSmall(32))
        ));
    }
}
