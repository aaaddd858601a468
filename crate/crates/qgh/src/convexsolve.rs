//! Deterministic dense linear programming and convex-geometry kernel.
//!
//! A two-phase tableau simplex with Bland's rule (lowest-index entering and
//! leaving) over a fixed standard-form conversion. Problem sizes upstream are
//! at most a few hundred variables, so the tableau is dense and no effort is
//! spent on sparsity; the payoff is bit-reproducible pivoting.

use thiserror::Error;

use crate::tol::Tolerances;

/// `minimize objective · x  subject to  constraints · x = rhs,  bounds`.
///
/// Bounds are per-variable closed intervals; `f64::NEG_INFINITY` /
/// `f64::INFINITY` mark unbounded sides.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
}

/// Optimal value, one optimal point, and duals for the equality rows.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub value: f64,
    pub point: Vec<f64>,
    pub dual: Vec<f64>,
}

/// Vertex-represented convex body (hull of `generators`).
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    pub generators: Vec<Vec<f64>>,
    pub dimension: usize,
}

impl Polytope {
    pub fn new(generators: Vec<Vec<f64>>) -> Result<Self, ConvexError> {
        let dimension = match generators.first() {
            Some(g) => g.len(),
            None => return Err(ConvexError::EmptyPolytope),
        };
        if generators.iter().any(|g| g.len() != dimension) {
            return Err(ConvexError::DimensionMismatch);
        }
        Ok(Polytope { generators, dimension })
    }
}

/// Distance gauge for nearest-point computations.
#[derive(Debug, Clone)]
pub enum Gauge {
    /// `x -> max_j |nu_j(x)|` for the listed dual vectors.
    SupFunctionals(Vec<Vec<f64>>),
    /// `x -> min sum |c_j|` over decompositions `x = sum c_j g_j`
    /// (gauge of the symmetric convex hull of the listed vectors);
    /// infinite outside their span.
    DecompositionL1(Vec<Vec<f64>>),
    /// Euclidean norm; solved by projected iteration rather than an LP.
    Euclidean,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ConvexError {
    #[error("infeasible")]
    Infeasible,
    #[error("unbounded")]
    Unbounded,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("empty polytope")]
    EmptyPolytope,
}

/// Solve a bounded-variable LP by conversion to standard form and two-phase
/// dense simplex with Bland's rule.
pub fn solve_lp(lp: &LinearProgram, tol: &Tolerances) -> Result<LpSolution, ConvexError> {
    let n = lp.objective.len();
    let m = lp.constraints.len();
    if lp.rhs.len() != m || lp.bounds.len() != n {
        return Err(ConvexError::DimensionMismatch);
    }
    for row in &lp.constraints {
        if row.len() != n {
            return Err(ConvexError::DimensionMismatch);
        }
    }
    if lp.bounds.iter().any(|&(l, u)| l > u) {
        return Err(ConvexError::Infeasible);
    }

    // --- standard-form conversion: min c'.y, A'.y = b', y >= 0 ---
    // Column bookkeeping so the original point can be recovered.
    enum Col {
        Shifted { var: usize, lo: f64 },     // x = lo + y
        Reflected { var: usize, hi: f64 },   // x = hi - y
        FreePos { var: usize },              // x = y+ - y-
        FreeNeg { var: usize },
        Slack,
    }
    let mut cols: Vec<Col> = Vec::new();
    let mut a: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut b: Vec<f64> = lp.rhs.clone();
    let mut c: Vec<f64> = Vec::new();
    // rows appended for two-sided bounds: y_j + s = hi - lo
    let mut extra_rows: Vec<(usize, f64)> = Vec::new(); // (column of y_j, hi - lo)

    for j in 0..n {
        let (lo, hi) = lp.bounds[j];
        let col_a: Vec<f64> = lp.constraints.iter().map(|r| r[j]).collect();
        if lo.is_finite() {
            let yc = cols.len();
            cols.push(Col::Shifted { var: j, lo });
            c.push(lp.objective[j]);
            for i in 0..m {
                a[i].push(col_a[i]);
                b[i] -= col_a[i] * lo;
            }
            if hi.is_finite() {
                extra_rows.push((yc, hi - lo));
            }
        } else if hi.is_finite() {
            cols.push(Col::Reflected { var: j, hi });
            c.push(-lp.objective[j]);
            for i in 0..m {
                a[i].push(-col_a[i]);
                b[i] -= col_a[i] * hi;
            }
        } else {
            cols.push(Col::FreePos { var: j });
            c.push(lp.objective[j]);
            for (i, row) in a.iter_mut().enumerate() {
                row.push(col_a[i]);
            }
            cols.push(Col::FreeNeg { var: j });
            c.push(-lp.objective[j]);
            for (i, row) in a.iter_mut().enumerate() {
                row.push(-col_a[i]);
            }
        }
    }
    let base_cols = cols.len();
    // bound rows: y_j + s = cap
    for &(yc, cap) in &extra_rows {
        let mut row = vec![0.0; base_cols];
        row[yc] = 1.0;
        a.push(row);
        b.push(cap);
    }
    let total_rows = a.len();
    for row in a.iter_mut() {
        row.resize(base_cols + extra_rows.len(), 0.0);
    }
    for (k, _) in extra_rows.iter().enumerate() {
        a[m + k][base_cols + k] = 1.0;
        cols.push(Col::Slack);
        c.push(0.0);
    }

    let ncols = cols.len();
    let std = StandardLp { a, b, c, m: total_rows, n: ncols };
    let (y, mut dual) = simplex(&std, tol)?;

    // Recover the original point and value; duals for the original rows only,
    // with the sign flips applied during phase-1 setup already undone inside
    // `simplex`.
    dual.truncate(m);
    let mut point = vec![0.0; n];
    for (j, col) in cols.iter().enumerate() {
        match *col {
            Col::Shifted { var, lo } => point[var] = lo + y[j],
            Col::Reflected { var, hi } => point[var] = hi - y[j],
            Col::FreePos { var } => point[var] += y[j],
            Col::FreeNeg { var } => point[var] -= y[j],
            Col::Slack => {}
        }
    }
    let value = lp
        .objective
        .iter()
        .zip(point.iter())
        .map(|(ci, xi)| ci * xi)
        .sum();
    Ok(LpSolution { value, point, dual })
}

struct StandardLp {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    m: usize,
    n: usize,
}

const MAX_PIVOTS: usize = 200_000;

/// Two-phase tableau simplex on `min c.y, A y = b, y >= 0`.
/// Returns the optimal point and the duals of the rows.
fn simplex(lp: &StandardLp, tol: &Tolerances) -> Result<(Vec<f64>, Vec<f64>), ConvexError> {
    let m = lp.m;
    let n = lp.n;
    let eps = tol.lp;
    // tableau: m rows of [A | I(artificials) | rhs]
    let width = n + m + 1;
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut row_sign = vec![1.0; m];
    for i in 0..m {
        let mut row = vec![0.0; width];
        let s = if lp.b[i] < 0.0 { -1.0 } else { 1.0 };
        row_sign[i] = s;
        for j in 0..n {
            row[j] = s * lp.a[i][j];
        }
        row[n + i] = 1.0;
        row[width - 1] = s * lp.b[i];
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // phase 1: minimize sum of artificials
    let mut obj = vec![0.0; width];
    for j in n..n + m {
        obj[j] = 1.0;
    }
    for row in t.iter() {
        for (o, v) in obj.iter_mut().zip(row.iter()) {
            *o -= v;
        }
    }
    run_pivots(&mut t, &mut obj, &mut basis, n + m, eps, |_| true)?;
    let phase1 = -obj[width - 1];
    if phase1 > eps.max(1e-7) {
        return Err(ConvexError::Infeasible);
    }
    // drive remaining artificials out of the basis where possible
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > eps) {
                pivot(&mut t, &mut obj, i, j);
                basis[i] = j;
            }
            // a fully zero structural row is redundant; its artificial stays
            // basic at value 0, which is harmless below.
        }
    }

    // phase 2: the real objective; artificials are banned from entering.
    obj = vec![0.0; width];
    obj[..n].copy_from_slice(&lp.c);
    for (i, row) in t.iter().enumerate() {
        let cb = if basis[i] < n { lp.c[basis[i]] } else { 0.0 };
        if cb != 0.0 {
            for (o, v) in obj.iter_mut().zip(row.iter()) {
                *o -= cb * v;
            }
        }
    }
    run_pivots(&mut t, &mut obj, &mut basis, n + m, eps, |j| j < n)?;

    let mut y = vec![0.0; n];
    for (i, &bi) in basis.iter().enumerate() {
        if bi < n {
            y[bi] = t[i][width - 1];
        }
    }
    // duals from the reduced costs of the artificial columns (cost 0 there,
    // so r = -y_i in the sign-flipped system).
    let dual: Vec<f64> = (0..m).map(|i| -obj[n + i] * row_sign[i]).collect();
    Ok((y, dual))
}

/// Bland-rule pivot loop. `enter_ok` filters candidate entering columns.
fn run_pivots<F: Fn(usize) -> bool>(
    t: &mut [Vec<f64>],
    obj: &mut [f64],
    basis: &mut [usize],
    ncols: usize,
    eps: f64,
    enter_ok: F,
) -> Result<(), ConvexError> {
    let width = obj.len();
    for _ in 0..MAX_PIVOTS {
        // entering: lowest index with negative reduced cost
        let Some(enter) = (0..ncols).find(|&j| enter_ok(j) && obj[j] < -eps) else {
            return Ok(());
        };
        // leaving: min ratio, ties by lowest basis index (Bland)
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for (i, row) in t.iter().enumerate() {
            if row[enter] > eps {
                let ratio = row[width - 1] / row[enter];
                let better = match leave {
                    None => true,
                    Some(cur) => {
                        ratio < best - eps || (ratio < best + eps && basis[i] < basis[cur])
                    }
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return Err(ConvexError::Unbounded);
        };
        pivot(t, obj, leave, enter);
        basis[leave] = enter;
    }
    Err(ConvexError::NumericalFailure(
        "pivot iteration cap reached".into(),
    ))
}

fn pivot(t: &mut [Vec<f64>], obj: &mut [f64], row: usize, col: usize) {
    let piv = t[row][col];
    let inv = 1.0 / piv;
    for v in t[row].iter_mut() {
        *v *= inv;
    }
    t[row][col] = 1.0; // kill roundoff on the pivot itself
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i != row {
            let f = r[col];
            if f != 0.0 {
                for (v, p) in r.iter_mut().zip(pivot_row.iter()) {
                    *v -= f * p;
                }
                r[col] = 0.0;
            }
        }
    }
    let f = obj[col];
    if f != 0.0 {
        for (v, p) in obj.iter_mut().zip(pivot_row.iter()) {
            *v -= f * p;
        }
        obj[col] = 0.0;
    }
}

/// Nearest point of a polytope to `z` under a gauge; returns the point and
/// the attained distance.
pub fn nearest_point(
    z: &[f64],
    p: &Polytope,
    gauge: &Gauge,
    tol: &Tolerances,
) -> Result<(Vec<f64>, f64), ConvexError> {
    if z.len() != p.dimension {
        return Err(ConvexError::DimensionMismatch);
    }
    let k = p.generators.len();
    match gauge {
        Gauge::SupFunctionals(nus) => {
            // min t  s.t.  |nu_j(z - V w)| <= t,  sum w = 1,  w >= 0
            let jn = nus.len();
            let nvar = k + 1 + 2 * jn; // w, t, slacks
            let mut cons: Vec<Vec<f64>> = Vec::new();
            let mut rhs: Vec<f64> = Vec::new();
            let mut row = vec![0.0; nvar];
            row[..k].iter_mut().for_each(|v| *v = 1.0);
            cons.push(row);
            rhs.push(1.0);
            for (j, nu) in nus.iter().enumerate() {
                if nu.len() != p.dimension {
                    return Err(ConvexError::DimensionMismatch);
                }
                let beta: f64 = dot(nu, z);
                let alpha: Vec<f64> = p.generators.iter().map(|v| dot(nu, v)).collect();
                // alpha.w + t - s1 = beta
                let mut r1 = vec![0.0; nvar];
                r1[..k].copy_from_slice(&alpha);
                r1[k] = 1.0;
                r1[k + 1 + 2 * j] = -1.0;
                cons.push(r1);
                rhs.push(beta);
                // -alpha.w + t - s2 = -beta
                let mut r2 = vec![0.0; nvar];
                for (v, al) in r2[..k].iter_mut().zip(alpha.iter()) {
                    *v = -al;
                }
                r2[k] = 1.0;
                r2[k + 1 + 2 * j + 1] = -1.0;
                cons.push(r2);
                rhs.push(-beta);
            }
            let mut objective = vec![0.0; nvar];
            objective[k] = 1.0;
            let lp = LinearProgram {
                objective,
                constraints: cons,
                rhs,
                bounds: vec![(0.0, f64::INFINITY); nvar],
            };
            let sol = solve_lp(&lp, tol)?;
            let point = combine_weights(&sol.point[..k], &p.generators, p.dimension);
            Ok((point, sol.value))
        }
        Gauge::DecompositionL1(gs) => {
            // min sum(p+q)  s.t.  V w + G (p - q) = z,  sum w = 1
            let jn = gs.len();
            let nvar = k + 2 * jn;
            let mut cons: Vec<Vec<f64>> = Vec::new();
            let mut rhs: Vec<f64> = Vec::new();
            for i in 0..p.dimension {
                let mut row = vec![0.0; nvar];
                for (c, v) in row[..k].iter_mut().zip(p.generators.iter()) {
                    *c = v[i];
                }
                for (j, g) in gs.iter().enumerate() {
                    if g.len() != p.dimension {
                        return Err(ConvexError::DimensionMismatch);
                    }
                    row[k + 2 * j] = g[i];
                    row[k + 2 * j + 1] = -g[i];
                }
                cons.push(row);
                rhs.push(z[i]);
            }
            let mut row = vec![0.0; nvar];
            row[..k].iter_mut().for_each(|v| *v = 1.0);
            cons.push(row);
            rhs.push(1.0);
            let mut objective = vec![0.0; nvar];
            objective[k..].iter_mut().for_each(|v| *v = 1.0);
            let lp = LinearProgram {
                objective,
                constraints: cons,
                rhs,
                bounds: vec![(0.0, f64::INFINITY); nvar],
            };
            let sol = solve_lp(&lp, tol)?;
            let point = combine_weights(&sol.point[..k], &p.generators, p.dimension);
            Ok((point, sol.value))
        }
        Gauge::Euclidean => euclidean_nearest(z, p, tol),
    }
}

/// Projected-gradient minimization of `||z - V w||^2` over the simplex.
fn euclidean_nearest(
    z: &[f64],
    p: &Polytope,
    tol: &Tolerances,
) -> Result<(Vec<f64>, f64), ConvexError> {
    let k = p.generators.len();
    let d = p.dimension;
    // Lipschitz constant of the gradient: 2 lambda_max(V^T V) via power iteration.
    let vtv = |w: &[f64]| -> Vec<f64> {
        let vw = combine_weights(w, &p.generators, d);
        p.generators.iter().map(|g| dot(g, &vw)).collect()
    };
    let mut u = vec![1.0 / (k as f64).sqrt(); k];
    let mut lam = 1.0;
    for _ in 0..100 {
        let v = vtv(&u);
        lam = dot(&v, &v).sqrt().max(1e-12);
        for (ui, vi) in u.iter_mut().zip(v.iter()) {
            *ui = vi / lam;
        }
    }
    let step = 1.0 / (2.0 * lam.max(1e-12));
    let mut w = vec![1.0 / k as f64; k];
    let mut last_obj = f64::INFINITY;
    for _ in 0..200_000 {
        let vw = combine_weights(&w, &p.generators, d);
        let resid: Vec<f64> = z.iter().zip(vw.iter()).map(|(a, b)| a - b).collect();
        let obj = dot(&resid, &resid);
        let grad: Vec<f64> = p.generators.iter().map(|g| -2.0 * dot(g, &resid)).collect();
        let mut wn: Vec<f64> = w
            .iter()
            .zip(grad.iter())
            .map(|(wi, gi)| wi - step * gi)
            .collect();
        project_simplex(&mut wn);
        let moved = w
            .iter()
            .zip(wn.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        w = wn;
        if moved < tol.norm * 1e-3 && (last_obj - obj).abs() < tol.norm * tol.norm {
            break;
        }
        last_obj = obj;
    }
    let point = combine_weights(&w, &p.generators, d);
    let dist = z
        .iter()
        .zip(point.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok((point, dist))
}

/// Euclidean projection onto the probability simplex (sort-based).
fn project_simplex(w: &mut [f64]) {
    let k = w.len();
    let mut sorted = w.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cssv = 0.0;
    let mut rho = 0usize;
    let mut theta = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        cssv += v;
        let t = (cssv - 1.0) / (i as f64 + 1.0);
        if v - t > 0.0 {
            rho = i;
            theta = t;
        }
    }
    let _ = rho;
    let _ = k;
    for v in w.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}

/// Whether `z` lies in the hull of `p` (sup-norm distance below `tol.lp`).
pub fn membership(z: &[f64], p: &Polytope, tol: &Tolerances) -> Result<bool, ConvexError> {
    let coord: Vec<Vec<f64>> = (0..p.dimension)
        .map(|i| {
            let mut e = vec![0.0; p.dimension];
            e[i] = 1.0;
            e
        })
        .collect();
    let (_, d) = nearest_point(z, p, &Gauge::SupFunctionals(coord), tol)?;
    Ok(d <= tol.lp.max(1e-8))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub(crate) fn combine_weights(w: &[f64], gens: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for (wi, g) in w.iter().zip(gens.iter()) {
        for (o, gi) in out.iter_mut().zip(g.iter()) {
            *o += wi * gi;
        }
    }
    out
}
