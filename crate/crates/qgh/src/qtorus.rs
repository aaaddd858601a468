//! Quantum tori at finite support: twisted convolution, window-compressed
//! operator norms, Lie and length Lip-norms, continuous families of states,
//! and sampled distance certificates between nearby deformation parameters.
//!
//! Elements are finitely supported functions on `Z^d` with the twisted
//! product `(f * g)(p) = sum_q f(q) g(p - q) sigma(q, p)` where
//! `sigma(p, q) = exp(i pi p . theta q)` for a real skew-symmetric `theta`.
//! The regular representation on `l^2(Z^d)` acts by the same formula; its
//! compressions to finite windows give operator-norm lower bounds that
//! increase with the window and are capped by the `l^1` norm.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exec::{map_indexed, map_range, ExecMode};
use crate::tol::Tolerances;

pub const TWO_PI: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, Error)]
pub enum QtError {
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("matrix is not skew-symmetric: {0}")]
    NotSkew(String),
    #[error("window {have} too small for support radius {needed}")]
    WindowTooSmall { needed: i64, have: i64 },
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("bridge invalid: {0}")]
    BridgeInvalid(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Real skew-symmetric deformation parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    pub d: usize,
    pub entries: Vec<Vec<f64>>,
}

impl SkewMatrix {
    /// Requires exact skewness (`entries[i][j] == -entries[j][i]` bitwise-compatible).
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self, QtError> {
        let d = entries.len();
        if entries.iter().any(|r| r.len() != d) {
            return Err(QtError::DimensionMismatch);
        }
        for i in 0..d {
            for j in 0..d {
                if entries[i][j] != -entries[j][i] {
                    return Err(QtError::NotSkew(format!(
                        "entry ({i},{j}) = {}, ({j},{i}) = {}",
                        entries[i][j], entries[j][i]
                    )));
                }
            }
        }
        Ok(SkewMatrix { d, entries })
    }

    pub fn zero(d: usize) -> Self {
        SkewMatrix { d, entries: vec![vec![0.0; d]; d] }
    }

    /// Skew matrix with `t` in entry `(i, j)` and `-t` in `(j, i)`.
    pub fn elementary(d: usize, i: usize, j: usize, t: f64) -> Result<Self, QtError> {
        if i >= d || j >= d || i == j {
            return Err(QtError::InvalidInput("elementary indices".into()));
        }
        let mut entries = vec![vec![0.0; d]; d];
        entries[i][j] = t;
        entries[j][i] = -t;
        Ok(SkewMatrix { d, entries })
    }

    /// Periodicity normalization: the phase only sees `theta` modulo even
    /// integers on integer arguments, so upper-triangle entries are reduced
    /// to `[0, 2)` (with the lower triangle keeping exact skewness).
    pub fn normalized(&self) -> Self {
        let mut entries = vec![vec![0.0; self.d]; self.d];
        for i in 0..self.d {
            for j in (i + 1)..self.d {
                let v = self.entries[i][j].rem_euclid(2.0);
                entries[i][j] = v;
                entries[j][i] = -v;
            }
        }
        SkewMatrix { d: self.d, entries }
    }
}

/// `sigma(p, q) = exp(i pi p . theta q)`.
pub fn sigma(theta: &SkewMatrix, p: &[i64], q: &[i64]) -> Complex64 {
    let mut s = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        if pi == 0 {
            continue;
        }
        for (j, &qj) in q.iter().enumerate() {
            s += (pi as f64) * theta.entries[i][j] * (qj as f64);
        }
    }
    Complex64::from_polar(1.0, std::f64::consts::PI * s)
}

/// Finitely supported function on `Z^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusElement {
    pub d: usize,
    pub coeffs: BTreeMap<Vec<i64>, Complex64>,
}

impl TorusElement {
    pub fn zero(d: usize) -> Self {
        TorusElement { d, coeffs: BTreeMap::new() }
    }

    pub fn delta(p: Vec<i64>) -> Self {
        let d = p.len();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(p, Complex64::new(1.0, 0.0));
        TorusElement { d, coeffs }
    }

    pub fn add_term(&mut self, p: Vec<i64>, c: Complex64) {
        if p.len() != self.d {
            return;
        }
        let e = self.coeffs.entry(p).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// Max-coordinate support radius.
    pub fn support_radius(&self) -> i64 {
        self.coeffs
            .keys()
            .flat_map(|p| p.iter().map(|x| x.abs()))
            .max()
            .unwrap_or(0)
    }

    /// `f*(p) = conj f(-p)`.
    pub fn involution(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(p, c)| (p.iter().map(|x| -x).collect(), c.conj()))
            .collect();
        TorusElement { d: self.d, coeffs }
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        let star = self.involution();
        let mut keys: Vec<&Vec<i64>> = self.coeffs.keys().collect();
        keys.extend(star.coeffs.keys());
        keys.iter().all(|p| {
            let a = self.coeffs.get(*p).copied().unwrap_or_default();
            let b = star.coeffs.get(*p).copied().unwrap_or_default();
            (a - b).norm() <= tol
        })
    }

    pub fn scaled(&self, t: Complex64) -> Self {
        let coeffs = self.coeffs.iter().map(|(p, c)| (p.clone(), c * t)).collect();
        TorusElement { d: self.d, coeffs }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (p, c) in &other.coeffs {
            out.add_term(p.clone(), *c);
        }
        out
    }

    /// Drop coefficients below `eps` in modulus.
    pub fn pruned(&self, eps: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(_, c)| c.norm() > eps)
            .map(|(p, c)| (p.clone(), *c))
            .collect();
        TorusElement { d: self.d, coeffs }
    }
}

/// On-disk torus element: `{ "d": 2, "theta": [[0,t],[-t,0]], "coeffs": [...] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorusInput {
    pub d: usize,
    pub theta: Vec<Vec<f64>>,
    pub coeffs: Vec<CoeffEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub p: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

impl TorusInput {
    pub fn into_parts(self) -> Result<(SkewMatrix, TorusElement), QtError> {
        let theta = SkewMatrix::new(self.theta)?;
        if theta.d != self.d {
            return Err(QtError::DimensionMismatch);
        }
        let mut f = TorusElement::zero(self.d);
        for e in self.coeffs {
            if e.p.len() != self.d {
                return Err(QtError::DimensionMismatch);
            }
            f.add_term(e.p, Complex64::new(e.re, e.im));
        }
        Ok((theta, f))
    }
}

/// `(f * g)(p) = sum_q f(q) g(p - q) sigma(q, p)`.
pub fn twisted_multiply(
    f: &TorusElement,
    g: &TorusElement,
    theta: &SkewMatrix,
) -> Result<TorusElement, QtError> {
    if f.d != g.d || theta.d != f.d {
        return Err(QtError::DimensionMismatch);
    }
    let mut out = TorusElement::zero(f.d);
    for (q, fq) in &f.coeffs {
        for (r, gr) in &g.coeffs {
            let p: Vec<i64> = q.iter().zip(r.iter()).map(|(a, b)| a + b).collect();
            let phase = sigma(theta, q, &p);
            out.add_term(p, fq * gr * phase);
        }
    }
    Ok(out.pruned(0.0))
}

/// Lexicographic enumeration of the window `{-m..m}^d`.
pub fn window_points(d: usize, m: i64) -> Vec<Vec<i64>> {
    let side = (2 * m + 1) as usize;
    let total = side.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            let mut p = vec![0i64; d];
            for x in p.iter_mut().rev() {
                *x = (idx % side) as i64 - m;
                idx /= side;
            }
            p
        })
        .collect()
}

fn window_index(p: &[i64], m: i64) -> Option<usize> {
    let side = (2 * m + 1) as usize;
    let mut idx = 0usize;
    for &x in p {
        if x.abs() > m {
            return None;
        }
        idx = idx * side + (x + m) as usize;
    }
    Some(idx)
}

/// Dense matrix of the window compression of the regular representation.
#[derive(Debug, Clone)]
pub struct WindowRep {
    pub d: usize,
    pub m: i64,
    /// Row `p`, column `r` over the lexicographic window points.
    pub matrix: Vec<Vec<Complex64>>,
}

/// `A_{p,r} = f(p - r) sigma(p - r, p)`.
pub fn rep_window(f: &TorusElement, theta: &SkewMatrix, m: i64) -> Result<WindowRep, QtError> {
    if f.d != theta.d {
        return Err(QtError::DimensionMismatch);
    }
    let points = window_points(f.d, m);
    let matrix = map_indexed(ExecMode::auto(), &points, |_, p| {
        points
            .iter()
            .map(|r| {
                let q: Vec<i64> = p.iter().zip(r.iter()).map(|(a, b)| a - b).collect();
                match f.coeffs.get(&q) {
                    Some(c) => c * sigma(theta, &q, p),
                    None => Complex64::new(0.0, 0.0),
                }
            })
            .collect()
    });
    Ok(WindowRep { d: f.d, m, matrix })
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value of the window compression by power iteration on
/// `A^* A` with a deterministic seeded start.
fn window_operator_norm(f: &TorusElement, theta: &SkewMatrix, m: i64, seed: u64) -> f64 {
    let points = window_points(f.d, m);
    let n = points.len();
    // precompute the sparse entries (p_idx, r_idx, f(q) sigma(q, p)) once so
    // the power iteration below is a pure multiply-add loop
    let mut entries: Vec<(usize, usize, Complex64)> = Vec::new();
    for (p_idx, p) in points.iter().enumerate() {
        for (q, fq) in &f.coeffs {
            let r: Vec<i64> = p.iter().zip(q.iter()).map(|(a, b)| a - b).collect();
            if let Some(r_idx) = window_index(&r, m) {
                entries.push((p_idx, r_idx, fq * sigma(theta, q, p)));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let nv = vec_norm(&v);
    if nv == 0.0 {
        return 0.0;
    }
    for c in v.iter_mut() {
        *c /= nv;
    }
    let mut lambda = 0.0;
    let mut av = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..250 {
        for a in av.iter_mut() {
            *a = Complex64::new(0.0, 0.0);
        }
        for &(p_idx, r_idx, c) in &entries {
            av[p_idx] += c * v[r_idx];
        }
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        for &(p_idx, r_idx, c) in &entries {
            w[r_idx] += c.conj() * av[p_idx];
        }
        let nw = vec_norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let rel = (nw - lambda).abs() / nw.max(1e-300);
        lambda = nw;
        v = w.into_iter().map(|c| c / nw).collect();
        if rel < 1e-12 {
            break;
        }
    }
    lambda.sqrt()
}

/// Window-compression estimate of `||f||_theta` with its honest bracket.
#[derive(Debug, Clone, Serialize)]
pub struct NormEstimate {
    /// Best (largest) window value: a certified lower bound.
    pub estimate: f64,
    /// `l^1` norm: a certified upper bound.
    pub upper_l1: f64,
    /// `(window radius, compression norm)` pairs, non-decreasing.
    pub windows: Vec<(i64, f64)>,
    /// Whether the increments dropped below the residual tolerance.
    pub converged: bool,
}

/// Increasing-window operator-norm bracket. Compression norms never exceed
/// the true norm and are non-decreasing in the window, so `estimate` is a
/// lower bound and `upper_l1` an upper bound.
pub fn norm_theta(
    f: &TorusElement,
    theta: &SkewMatrix,
    tol: &Tolerances,
) -> Result<NormEstimate, QtError> {
    if f.d != theta.d {
        return Err(QtError::DimensionMismatch);
    }
    let upper_l1 = f.l1_norm();
    if f.coeffs.is_empty() || upper_l1 == 0.0 {
        return Ok(NormEstimate {
            estimate: 0.0,
            upper_l1: 0.0,
            windows: vec![],
            converged: true,
        });
    }
    let m0 = f.support_radius().max(1);
    let cap = (tol.window_max as i64).max(m0);
    let mut windows = Vec::new();
    let mut converged = false;
    let mut prev = -1.0;
    let mut m = m0;
    loop {
        let v = window_operator_norm(f, theta, m, tol.seed ^ 0x77_75);
        windows.push((m, v));
        if prev >= 0.0 && (v - prev).abs() <= tol.residual {
            converged = true;
            break;
        }
        prev = v;
        if m >= cap {
            break;
        }
        m += 1;
    }
    let estimate = windows.iter().map(|&(_, v)| v).fold(0.0, f64::max);
    Ok(NormEstimate {
        estimate: estimate.min(upper_l1),
        upper_l1,
        windows,
        converged,
    })
}

/// Norm descriptor on `R^d` for Lie directions and length functions.
#[derive(Debug, Clone, PartialEq)]
pub enum GNorm {
    Euclidean,
    Max,
    Weighted(Vec<f64>),
}

impl GNorm {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            GNorm::Euclidean => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            GNorm::Max => x.iter().map(|v| v.abs()).fold(0.0, f64::max),
            GNorm::Weighted(w) => x
                .iter()
                .zip(w.iter())
                .map(|(v, wi)| (v * wi).abs())
                .fold(0.0, f64::max),
        }
    }
}

/// Directional derivative `(d_X f)(p) = 2 pi i (p . X) f(p)`.
pub fn directional_derivative(f: &TorusElement, x: &[f64]) -> TorusElement {
    let coeffs = f
        .coeffs
        .iter()
        .map(|(p, c)| {
            let px: f64 = p.iter().zip(x.iter()).map(|(&pi, xi)| pi as f64 * xi).sum();
            (p.clone(), c * Complex64::new(0.0, TWO_PI * px))
        })
        .collect();
    TorusElement { d: f.d, coeffs }
}

#[derive(Debug, Clone, Serialize)]
pub struct LieEstimate {
    pub value: f64,
    /// Number of sphere directions sampled; `exact` when `d = 1`.
    pub samples: usize,
    pub exact: bool,
    /// `l^1`-side ceiling `sup_X ||d_X f||_1` over the same directions.
    pub l1_ceiling: f64,
}

/// `L_theta(f) = sup over ||X||_g = 1 of ||d_X f||_theta`; exact for `d = 1`,
/// a sampled lower estimate for `d >= 2`.
pub fn lie_lipnorm(
    f: &TorusElement,
    theta: &SkewMatrix,
    g_norm: &GNorm,
    sphere_samples: usize,
    tol: &Tolerances,
) -> Result<LieEstimate, QtError> {
    if f.d != theta.d {
        return Err(QtError::DimensionMismatch);
    }
    let d = f.d;
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        directions.push(e);
    }
    if d >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(tol.seed ^ 0x11e_d17);
        for _ in 0..sphere_samples {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if g_norm.eval(&x) > 1e-9 {
                directions.push(x);
            }
        }
    }
    let evals = map_indexed(ExecMode::auto(), &directions, |_, x| {
        let g = g_norm.eval(x);
        if g <= 1e-12 {
            return (0.0, 0.0);
        }
        let unit: Vec<f64> = x.iter().map(|v| v / g).collect();
        let df = directional_derivative(f, &unit);
        let est = norm_theta(&df, theta, tol).map(|n| n.estimate).unwrap_or(0.0);
        (est, df.l1_norm())
    });
    let samples = directions.len();
    let (mut value, mut ceiling) = (0.0f64, 0.0f64);
    for (v, c) in evals {
        value = value.max(v);
        ceiling = ceiling.max(c);
    }
    Ok(LieEstimate {
        value,
        samples,
        exact: d == 1,
        l1_ceiling: ceiling,
    })
}

/// `(alpha_x f)(p) = exp(2 pi i p . x) f(p)`.
pub fn translate(f: &TorusElement, x: &[f64]) -> TorusElement {
    let coeffs = f
        .coeffs
        .iter()
        .map(|(p, c)| {
            let px: f64 = p.iter().zip(x.iter()).map(|(&pi, xi)| pi as f64 * xi).sum();
            (p.clone(), c * Complex64::from_polar(1.0, TWO_PI * px))
        })
        .collect();
    TorusElement { d: f.d, coeffs }
}

/// Wrap torus coordinates to the fundamental domain `[-1/2, 1/2)^d`.
pub fn wrap_to_fundamental(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| {
            let w = v.rem_euclid(1.0);
            if w >= 0.5 {
                w - 1.0
            } else {
                w
            }
        })
        .collect()
}

/// Length-function Lip-norm `sup_{x != 0} ||alpha_x f - f|| / l(x)` on a grid,
/// with the derivative form substituted in the cells bordering `x = 0`.
pub fn length_lipnorm(
    f: &TorusElement,
    theta: &SkewMatrix,
    length: &GNorm,
    grid: usize,
    tol: &Tolerances,
) -> Result<f64, QtError> {
    if f.d != theta.d {
        return Err(QtError::DimensionMismatch);
    }
    if grid < 2 {
        return Err(QtError::InvalidInput("grid too coarse".into()));
    }
    let d = f.d;
    let total = grid.pow(d as u32);
    let step = 1.0 / grid as f64;
    let values = map_range(ExecMode::auto(), total, |mut idx| {
        let mut x = vec![0.0; d];
        for xi in x.iter_mut().rev() {
            *xi = (idx % grid) as f64 * step;
            idx /= grid;
        }
        let w = wrap_to_fundamental(&x);
        let l = length.eval(&w);
        if l <= 1e-12 {
            return 0.0; // the origin itself
        }
        let near_zero = w.iter().all(|v| v.abs() <= step + 1e-12);
        if near_zero {
            // limit of the quotient along the ray through x
            let unit: Vec<f64> = w.iter().map(|v| v / l).collect();
            let df = directional_derivative(f, &unit);
            norm_theta(&df, theta, tol).map(|n| n.estimate).unwrap_or(0.0)
        } else {
            let diff = translate(f, &x).plus(&f.scaled(Complex64::new(-1.0, 0.0)));
            let n = norm_theta(&diff.pruned(1e-15), theta, tol)
                .map(|n| n.estimate)
                .unwrap_or(0.0);
            n / l
        }
    });
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Density matrix on a window, defining the state `f -> tr(pi_theta(f) T)`.
#[derive(Debug, Clone)]
pub struct StateField {
    pub d: usize,
    pub m: i64,
    /// Row-major dense matrix over the lexicographic window points.
    pub density: Vec<Vec<Complex64>>,
}

impl StateField {
    /// Validates hermiticity, unit trace, and positivity (within `1e-10`).
    pub fn new(d: usize, m: i64, density: Vec<Vec<Complex64>>) -> Result<Self, QtError> {
        let n = window_points(d, m).len();
        if density.len() != n || density.iter().any(|r| r.len() != n) {
            return Err(QtError::DimensionMismatch);
        }
        for i in 0..n {
            for j in 0..n {
                if (density[i][j] - density[j][i].conj()).norm() > 1e-10 {
                    return Err(QtError::InvalidDensity("not hermitian".into()));
                }
            }
        }
        let trace: Complex64 = (0..n).map(|i| density[i][i]).sum();
        if (trace - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(QtError::InvalidDensity(format!("trace {trace}")));
        }
        let t = StateField { d, m, density };
        let min_eig = t.min_eigenvalue();
        if min_eig < -1e-10 {
            return Err(QtError::InvalidDensity(format!("eigenvalue {min_eig}")));
        }
        Ok(t)
    }

    /// Rank-one projection onto the window basis vector at `p`.
    pub fn rank_one(d: usize, m: i64, p: &[i64]) -> Result<Self, QtError> {
        let n = window_points(d, m).len();
        let idx = window_index(p, m).ok_or(QtError::WindowTooSmall {
            needed: p.iter().map(|x| x.abs()).max().unwrap_or(0),
            have: m,
        })?;
        let mut density = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        density[idx][idx] = Complex64::new(1.0, 0.0);
        Ok(StateField { d, m, density })
    }

    /// Seeded random density matrix `B^* B / tr`.
    pub fn random(d: usize, m: i64, rng: &mut ChaCha8Rng) -> Self {
        let n = window_points(d, m).len();
        let b: Vec<Vec<Complex64>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        let mut density = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (row_k, _) in b.iter().enumerate() {
                    acc += b[row_k][i].conj() * b[row_k][j];
                }
                density[i][j] = acc;
            }
        }
        let trace: f64 = (0..n).map(|i| density[i][i].re).sum();
        for row in density.iter_mut() {
            for v in row.iter_mut() {
                *v /= trace;
            }
        }
        StateField { d, m, density }
    }

    /// Smallest eigenvalue of the (hermitian) density, by shifted power
    /// iteration: `lambda_min = c - lambda_max(c I - T)` with `c = 2`.
    fn min_eigenvalue(&self) -> f64 {
        let n = self.density.len();
        let c = 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0x0dd_ba11);
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut lambda = 0.0;
        for _ in 0..500 {
            let mut w: Vec<Complex64> = (0..n)
                .map(|i| {
                    let mut acc = c * v[i];
                    for j in 0..n {
                        acc -= self.density[i][j] * v[j];
                    }
                    acc
                })
                .collect();
            let nw = vec_norm(&w);
            if nw == 0.0 {
                return c;
            }
            for x in w.iter_mut() {
                *x /= nw;
            }
            let rel = (nw - lambda).abs() / nw;
            lambda = nw;
            v = w;
            if rel < 1e-13 {
                break;
            }
        }
        c - lambda
    }
}

/// `omega_theta^T(f) = tr(pi_theta(f) T)`, via the sparse trace formula
/// `sum_r sum_q f(q) sigma(q, r + q) T[r, r + q]`.
pub fn state_field_eval(
    t: &StateField,
    theta: &SkewMatrix,
    f: &TorusElement,
) -> Result<Complex64, QtError> {
    if t.d != f.d || theta.d != f.d {
        return Err(QtError::DimensionMismatch);
    }
    if f.support_radius() > t.m {
        return Err(QtError::WindowTooSmall { needed: f.support_radius(), have: t.m });
    }
    let points = window_points(f.d, t.m);
    let mut acc = Complex64::new(0.0, 0.0);
    for (r_idx, r) in points.iter().enumerate() {
        for (q, fq) in &f.coeffs {
            let p: Vec<i64> = r.iter().zip(q.iter()).map(|(a, b)| a + b).collect();
            if let Some(p_idx) = window_index(&p, t.m) {
                // matrix entry A_{p, r} = f(q) sigma(q, p); tr(A T) sums A_{p,r} T_{r,p}
                acc += fq * sigma(theta, q, &p) * t.density[r_idx][p_idx];
            }
        }
    }
    Ok(acc)
}

/// Finite-difference continuity scan of `theta -> omega_theta^T(f)`.
pub fn state_continuity_scan(
    t: &StateField,
    f: &TorusElement,
    base: &SkewMatrix,
    steps: &[f64],
    i: usize,
    j: usize,
) -> Result<Vec<f64>, QtError> {
    let v0 = state_field_eval(t, base, f)?;
    steps
        .iter()
        .map(|&h| {
            let mut entries = base.entries.clone();
            entries[i][j] += h;
            entries[j][i] -= h;
            let th = SkewMatrix::new(entries)?;
            Ok((state_field_eval(t, &th, f)? - v0).norm())
        })
        .collect()
}

/// Real coordinates for self-adjoint elements supported on a symmetric
/// frequency set: one coordinate for `p = 0`, and real/imaginary coordinates
/// for each `{p, -p}` pair.
#[derive(Debug, Clone)]
pub struct SelfAdjointBasis {
    pub d: usize,
    /// Basis elements as torus elements (each self-adjoint).
    pub elements: Vec<TorusElement>,
    /// Canonical representatives of the `{p, -p}` pairs, in coordinate order.
    pub canonical: Vec<Vec<i64>>,
    /// Index of the coordinate carrying the unit `delta_0`.
    pub unit_index: usize,
}

impl SelfAdjointBasis {
    pub fn new(d: usize, freqs: &[Vec<i64>]) -> Result<Self, QtError> {
        let mut canonical: Vec<Vec<i64>> = Vec::new();
        let mut has_zero = false;
        for p in freqs {
            if p.len() != d {
                return Err(QtError::DimensionMismatch);
            }
            if p.iter().all(|&x| x == 0) {
                has_zero = true;
                continue;
            }
            let neg: Vec<i64> = p.iter().map(|x| -x).collect();
            let rep = if *p > neg { p.clone() } else { neg };
            if !canonical.contains(&rep) {
                canonical.push(rep);
            }
        }
        if !has_zero {
            return Err(QtError::InvalidInput("frequency set must contain 0".into()));
        }
        canonical.sort();
        let mut elements = vec![TorusElement::delta(vec![0; d])];
        for p in &canonical {
            let neg: Vec<i64> = p.iter().map(|x| -x).collect();
            // real part: delta_p + delta_{-p}
            let mut re = TorusElement::zero(d);
            re.add_term(p.clone(), Complex64::new(1.0, 0.0));
            re.add_term(neg.clone(), Complex64::new(1.0, 0.0));
            elements.push(re);
            // imaginary part: i delta_p - i delta_{-p}
            let mut im = TorusElement::zero(d);
            im.add_term(p.clone(), Complex64::new(0.0, 1.0));
            im.add_term(neg, Complex64::new(0.0, -1.0));
            elements.push(im);
        }
        Ok(SelfAdjointBasis { d, elements, canonical, unit_index: 0 })
    }

    pub fn dimension(&self) -> usize {
        self.elements.len()
    }

    /// Coordinates of a self-adjoint element supported on the frequency set:
    /// `Re f(0)`, then `(Re f(p), Im f(p))` at each canonical representative.
    pub fn to_coords(&self, f: &TorusElement) -> Vec<f64> {
        let mut coords = Vec::with_capacity(self.dimension());
        coords.push(
            f.coeffs
                .get(&vec![0i64; self.d])
                .map(|z| z.re)
                .unwrap_or(0.0),
        );
        for p in &self.canonical {
            let z = f.coeffs.get(p).copied().unwrap_or_default();
            coords.push(z.re);
            coords.push(z.im);
        }
        coords
    }

    /// Evaluate a state functional (given in these coordinates) on `f`.
    pub fn eval_state(&self, omega: &[f64], f: &TorusElement) -> f64 {
        omega
            .iter()
            .zip(self.to_coords(f).iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Real coordinate vector to the self-adjoint element it represents.
    pub fn to_element(&self, coords: &[f64]) -> TorusElement {
        let mut out = TorusElement::zero(self.d);
        for (c, b) in coords.iter().zip(self.elements.iter()) {
            if *c != 0.0 {
                for (p, v) in &b.coeffs {
                    out.add_term(p.clone(), v * c);
                }
            }
        }
        out.pruned(0.0)
    }

    /// State functional in these coordinates: `k -> Re tr(pi(b_k) T)`.
    pub fn state_vector(
        &self,
        t: &StateField,
        theta: &SkewMatrix,
    ) -> Result<Vec<f64>, QtError> {
        self.elements
            .iter()
            .map(|b| state_field_eval(t, theta, b).map(|z| z.re))
            .collect()
    }
}

/// Sampled distance report between deformations `theta` and `psi` on the
/// truncated model spanned by a frequency set. Every number here is an
/// estimate: Lip-norms are sampled lower bounds and the Hausdorff value is an
/// inner approximation over the given state family.
#[derive(Debug, Clone, Serialize)]
pub struct TorusDistqReport {
    pub epsilon: f64,
    /// Worst excess of the bridge seminorm over 1 on matched unit-ball pairs.
    pub bridge_residual: f64,
    /// Max over the family of the sampled distance between paired states.
    pub certificate: f64,
    pub pair_values: Vec<f64>,
    /// Inner-approximation Hausdorff distance between the sampled state sets.
    pub hausdorff_estimate: f64,
    /// Measured distance from held-out states to the family (never assumed 0).
    pub density_residual: f64,
    pub samples: usize,
    pub provenance: &'static str,
}

/// Build the paired-state bridge `N(u, v) = eps^{-1} max_T |Omega_theta^T(u)
/// - Omega_psi^T(v)|` on the truncated model and evaluate its sampled
/// certificate. The matching condition is checked with the proof witness
/// `v = u(0) delta_0 + (L_theta(w) / L_psi(w)) w`, `w = u - u(0) delta_0`,
/// which preserves the Lip bound on the other side by construction.
pub fn torus_distq_upper(
    theta: &SkewMatrix,
    psi: &SkewMatrix,
    freqs: &[Vec<i64>],
    epsilon: f64,
    family: &[StateField],
    tol: &Tolerances,
) -> Result<TorusDistqReport, QtError> {
    if theta.d != psi.d {
        return Err(QtError::DimensionMismatch);
    }
    if epsilon <= 0.0 {
        return Err(QtError::InvalidInput("epsilon <= 0".into()));
    }
    if family.is_empty() {
        return Err(QtError::InvalidInput("empty state family".into()));
    }
    let basis = SelfAdjointBasis::new(theta.d, freqs)?;
    let dim = basis.dimension();
    let omega_theta: Vec<Vec<f64>> = family
        .iter()
        .map(|t| basis.state_vector(t, theta))
        .collect::<Result<_, _>>()?;
    let omega_psi: Vec<Vec<f64>> = family
        .iter()
        .map(|t| basis.state_vector(t, psi))
        .collect::<Result<_, _>>()?;

    let g = GNorm::Euclidean;
    let sphere = tol.sphere_samples.min(16);
    let lip = |f: &TorusElement, side: &SkewMatrix| -> f64 {
        lie_lipnorm(f, side, &g, sphere, tol).map(|e| e.value).unwrap_or(0.0)
    };

    let n_samples = tol.samples.min(24).max(4);
    // sampled unit-ball pairs (u, v) with their bridge values
    struct Pair {
        /// `u` with `L_theta(u) = 1` (before the combined-ball rescale).
        u_unit: TorusElement,
        u_vals_theta: Vec<f64>,
        v_vals_psi: Vec<f64>,
        bridge: f64,
    }
    let pairs: Vec<Option<Pair>> = map_range(ExecMode::auto(), n_samples, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(tol.seed ^ (s as u64).wrapping_mul(0x9e37));
        let coords: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u = basis.to_element(&coords);
        let lu = lip(&u, theta);
        if lu <= 1e-9 {
            return None;
        }
        let u = u.scaled(Complex64::new(1.0 / lu, 0.0));
        // witness on the other side; the derivative kills the constant term,
        // so L_theta(w) = L_theta(u) = 1 exactly after the rescale above
        let u0 = u.coeffs.get(&vec![0i64; theta.d]).copied().unwrap_or_default();
        let mut w = u.clone();
        w.add_term(vec![0; theta.d], -u0);
        let w = w.pruned(1e-15);
        let lw_psi = lip(&w, psi);
        if lw_psi <= 1e-12 {
            return None;
        }
        let scale = 1.0 / lw_psi;
        let mut v = w.scaled(Complex64::new(scale, 0.0));
        v.add_term(vec![0; theta.d], u0);
        // bridge seminorm over the state family
        let bridge = omega_theta
            .iter()
            .zip(omega_psi.iter())
            .map(|(ot, op)| {
                let a = basis.eval_state(ot, &u);
                let b = basis.eval_state(op, &v);
                (a - b).abs() / epsilon
            })
            .fold(0.0, f64::max);
        // normalize the pair into the combined unit ball; L_psi(v) =
        // scale * L_psi(w) = 1 by homogeneity of the estimator
        let lv = 1.0f64;
        let combined = lv.max(1.0).max(bridge);
        let inv = 1.0 / combined;
        let u_scaled = u.scaled(Complex64::new(inv, 0.0));
        let v_scaled = v.scaled(Complex64::new(inv, 0.0));
        Some(Pair {
            u_unit: u,
            u_vals_theta: omega_theta
                .iter()
                .map(|ot| basis.eval_state(ot, &u_scaled))
                .collect(),
            v_vals_psi: omega_psi
                .iter()
                .map(|op| basis.eval_state(op, &v_scaled))
                .collect(),
            bridge: bridge.max(lv) - 1.0,
        })
    });
    let pairs: Vec<Pair> = pairs.into_iter().flatten().collect();
    if pairs.is_empty() {
        return Err(QtError::BridgeInvalid("no usable samples".into()));
    }
    let bridge_residual = pairs.iter().map(|p| p.bridge).fold(0.0, f64::max);

    // sampled cross distance between a theta-state and a psi-state
    let cross = |i: usize, j: usize| -> f64 {
        pairs
            .iter()
            .map(|p| (p.u_vals_theta[i] - p.v_vals_psi[j]).abs())
            .fold(0.0, f64::max)
    };
    let k = family.len();
    let pair_values: Vec<f64> = (0..k).map(|i| cross(i, i)).collect();
    let certificate = pair_values.iter().copied().fold(0.0, f64::max);
    let h1 = (0..k)
        .map(|i| (0..k).map(|j| cross(i, j)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let h2 = (0..k)
        .map(|j| (0..k).map(|i| cross(i, j)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let hausdorff_estimate = h1.max(h2);

    // density of the family among held-out states, measured on the theta side
    // with the sampled Lip unit-ball elements (an underestimate of rho_L)
    let m = family[0].m;
    let mut rng = ChaCha8Rng::seed_from_u64(tol.seed ^ 0xdead_beef);
    let held_out: Vec<StateField> = (0..4)
        .map(|_| StateField::random(theta.d, m, &mut rng))
        .collect();
    let theta_side_distance = |va: &[f64], vb: &[f64]| -> f64 {
        pairs
            .iter()
            .map(|p| (basis.eval_state(va, &p.u_unit) - basis.eval_state(vb, &p.u_unit)).abs())
            .fold(0.0, f64::max)
    };
    let density_residual = held_out
        .iter()
        .map(|t| {
            let v = basis.state_vector(t, theta).unwrap_or_else(|_| vec![0.0; dim]);
            omega_theta
                .iter()
                .map(|o| theta_side_distance(&v, o))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);

    Ok(TorusDistqReport {
        epsilon,
        bridge_residual,
        certificate,
        pair_values,
        hausdorff_estimate,
        density_residual,
        samples: pairs.len(),
        provenance: "sampled-estimate",
    })
}

/// Rational-deformation oracle for `d = 2`, `theta_{12} = a / q`: maximize
/// the spectral norm of the `q x q` clock-and-shift symbol over a torus grid.
/// A grid maximum is a lower bound for the true norm.
pub fn rational_symbol_norm(
    f: &TorusElement,
    a: i64,
    q: i64,
    grid: usize,
) -> Result<f64, QtError> {
    if f.d != 2 {
        return Err(QtError::InvalidInput("rational oracle requires d = 2".into()));
    }
    if q <= 0 {
        return Err(QtError::InvalidInput("q must be positive".into()));
    }
    let theta12 = a as f64 / q as f64;
    let qu = q as usize;
    let omega = Complex64::from_polar(1.0, TWO_PI * theta12);
    let best = map_range(ExecMode::auto(), grid * grid, |idx| {
        let xi = (idx % grid) as f64 / grid as f64;
        let yi = (idx / grid) as f64 / grid as f64;
        let x = Complex64::from_polar(1.0, TWO_PI * xi);
        let y = Complex64::from_polar(1.0, TWO_PI * yi);
        // U -> x C, V -> y S with C = diag(omega^k), S the cyclic shift:
        // then U V = omega V U matches delta_{e1} * delta_{e2} up to the
        // sigma phase, absorbed below.
        let mut mat = vec![vec![Complex64::new(0.0, 0.0); qu]; qu];
        for (p, c) in &f.coeffs {
            let (p1, p2) = (p[0], p[1]);
            // delta_p = exp(-i pi p1 theta12 p2) U^{p1} V^{p2}
            let pre = Complex64::from_polar(
                1.0,
                -std::f64::consts::PI * p1 as f64 * theta12 * p2 as f64,
            );
            let scalar = c * pre * x.powi(p1 as i32) * y.powi(p2 as i32);
            // (C^{p1} S^{p2}) e_k = omega^{p1 (k + p2)} e_{k + p2}
            for k in 0..qu {
                let kk = ((k as i64 + p2).rem_euclid(q)) as usize;
                let ph = omega.powi((p1 * (k as i64 + p2)).rem_euclid(q) as i32);
                mat[kk][k] += scalar * ph;
            }
        }
        complex_spectral_norm(&mat)
    });
    Ok(best.into_iter().fold(0.0, f64::max))
}

/// Spectral norm of a small dense complex matrix via power iteration.
pub fn complex_spectral_norm(a: &[Vec<Complex64>]) -> f64 {
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5bec);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let mut lambda = 0.0;
    for _ in 0..250 {
        let av: Vec<Complex64> = a
            .iter()
            .map(|row| row.iter().zip(v.iter()).map(|(x, y)| x * y).sum())
            .collect();
        let w: Vec<Complex64> = (0..n)
            .map(|c| {
                a.iter()
                    .zip(av.iter())
                    .map(|(row, y)| row[c].conj() * y)
                    .sum()
            })
            .collect();
        let nw = vec_norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let rel = (nw - lambda).abs() / nw;
        lambda = nw;
        v = w.into_iter().map(|c| c / nw).collect();
        if rel < 1e-12 {
            break;
        }
    }
    lambda.sqrt()
}

/// Default state family for the paired-state bridge: rank-one projections on
/// every window basis vector plus seeded random density matrices.
pub fn default_state_family(
    d: usize,
    m: i64,
    random_count: usize,
    seed: u64,
) -> Result<Vec<StateField>, QtError> {
    let mut family = Vec::new();
    for p in window_points(d, m) {
        family.push(StateField::rank_one(d, m, &p)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfa_b1e);
    for _ in 0..random_count {
        family.push(StateField::random(d, m, &mut rng));
    }
    Ok(family)
}

/// One row of a deformation sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    pub psi: f64,
    pub epsilon: f64,
    pub bridge_residual: f64,
    pub certificate: f64,
    pub hausdorff_estimate: f64,
    pub density_residual: f64,
}

/// Sweep `psi_12 = theta0 + offset` against `theta_12 = theta0` for `d = 2`
/// on the model spanned by `freqs`, with a shared state family.
pub fn torus_sweep(
    theta0: f64,
    offsets: &[f64],
    freqs: &[Vec<i64>],
    epsilon: f64,
    tol: &Tolerances,
) -> Result<Vec<SweepRow>, QtError> {
    let theta = SkewMatrix::elementary(2, 0, 1, theta0)?;
    let m = freqs
        .iter()
        .flat_map(|p| p.iter().map(|x| x.abs()))
        .max()
        .unwrap_or(1)
        .max(1);
    let family = default_state_family(2, m, 4, tol.seed)?;
    offsets
        .iter()
        .map(|&off| {
            let psi = SkewMatrix::elementary(2, 0, 1, theta0 + off)?;
            let rep = torus_distq_upper(&theta, &psi, freqs, epsilon, &family, tol)?;
            Ok(SweepRow {
                theta: theta0,
                psi: theta0 + off,
                epsilon,
                bridge_residual: rep.bridge_residual,
                certificate: rep.certificate,
                hausdorff_estimate: rep.hausdorff_estimate,
                density_residual: rep.density_residual,
            })
        })
        .collect()
}
