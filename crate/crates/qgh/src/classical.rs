//! Finite metric spaces, classical Gromov–Hausdorff distance, their embedding
//! into compact quantum metric spaces, and the golden three-point/two-point
//! instance used throughout the test suite.
//!
//! GH distance is computed as half the minimal distortion over correspondences
//! (relations covering both sides). Every correspondence contains one of the
//! form `graph(f) ∪ graph(g)^T` with `f: X -> Y`, `g: Y -> X`, and passing to a
//! sub-relation cannot increase distortion, so minimizing over those unions is
//! exhaustive.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convexsolve::Polytope;
use crate::exec::{map_range, ExecMode};
use crate::lipnorm::{lipnorm_from_metric, LipError, LipNorm};
use crate::ouspace::OrderUnitSpace;
use crate::statemetric;
use crate::tol::Tolerances;

/// Labeled points with a symmetric distance matrix.
/// Schema: `{ "labels": [...], "dist": [[...]] }`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FiniteMetricSpace {
    pub labels: Vec<String>,
    pub dist: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ClassicalError {
    #[error("not a metric: {0}")]
    NotAMetric(String),
    #[error("instance too large for exhaustive mode (|X|*|Y| = {0} > 20)")]
    TooLarge(usize),
    #[error(transparent)]
    Lip(#[from] LipError),
}

impl FiniteMetricSpace {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        self.dist
            .iter()
            .flat_map(|r| r.iter().copied())
            .fold(0.0, f64::max)
    }

    /// Metric axioms: symmetry, zero diagonal, positivity off-diagonal,
    /// triangle inequality. Returns which axiom failed.
    pub fn validate(&self, tol: &Tolerances) -> Result<(), String> {
        let n = self.len();
        if self.dist.len() != n || self.dist.iter().any(|r| r.len() != n) {
            return Err("distance matrix shape does not match labels".into());
        }
        for i in 0..n {
            if self.dist[i][i].abs() > tol.exact {
                return Err(format!("nonzero diagonal at {i}"));
            }
            for j in 0..n {
                if (self.dist[i][j] - self.dist[j][i]).abs() > tol.exact {
                    return Err(format!("asymmetry at ({i},{j})"));
                }
                if i != j && self.dist[i][j] <= 0.0 {
                    return Err(format!("non-positive distance at ({i},{j})"));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.dist[i][j] > self.dist[i][k] + self.dist[k][j] + tol.lp {
                        return Err(format!("triangle violated at ({i},{j},{k})"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// GH result: value, exactness flag, and one optimal (or best found)
/// correspondence as index pairs.
#[derive(Debug, Clone)]
pub struct GhResult {
    pub value: f64,
    pub exact: bool,
    pub correspondence: Vec<(usize, usize)>,
}

/// Classical Gromov–Hausdorff distance. Exhaustive (exact) for
/// `|X|*|Y| <= 20`; otherwise a seeded local-search upper bound flagged
/// non-exact, or `TooLarge` when exactness is required.
pub fn gh_distance(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    require_exact: bool,
    tol: &Tolerances,
) -> Result<GhResult, ClassicalError> {
    x.validate(tol).map_err(ClassicalError::NotAMetric)?;
    y.validate(tol).map_err(ClassicalError::NotAMetric)?;
    let (n, m) = (x.len(), y.len());
    if n * m > 20 {
        if require_exact {
            return Err(ClassicalError::TooLarge(n * m));
        }
        return Ok(gh_local_search(x, y, tol));
    }
    // enumerate f: X -> Y in parallel over f's value at the first point
    let total_f: usize = m.pow(n as u32);
    let per_first = total_f / m;
    let candidates = map_range(ExecMode::auto(), m, |f0| {
        let mut best = (f64::INFINITY, Vec::new());
        let mut f = vec![0usize; n];
        f[0] = f0;
        for rest in 0..per_first {
            let mut r = rest;
            for slot in f.iter_mut().skip(1) {
                *slot = r % m;
                r /= m;
            }
            let dis_ff = distortion_within(&f, &x.dist, &y.dist);
            if dis_ff >= best.0 {
                continue;
            }
            let mut g = vec![0usize; m];
            loop {
                let dis = dis_ff
                    .max(distortion_within_rev(&g, &y.dist, &x.dist))
                    .max(distortion_cross(&f, &g, &x.dist, &y.dist));
                if dis < best.0 {
                    let mut corr: Vec<(usize, usize)> =
                        f.iter().enumerate().map(|(i, &fi)| (i, fi)).collect();
                    for (j, &gj) in g.iter().enumerate() {
                        if !corr.contains(&(gj, j)) {
                            corr.push((gj, j));
                        }
                    }
                    best = (dis, corr);
                }
                // next g
                let mut k = 0;
                loop {
                    if k == m {
                        break;
                    }
                    g[k] += 1;
                    if g[k] < n {
                        break;
                    }
                    g[k] = 0;
                    k += 1;
                }
                if k == m {
                    break;
                }
            }
        }
        best
    });
    let (dis, corr) = candidates
        .into_iter()
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap();
    Ok(GhResult { value: dis / 2.0, exact: true, correspondence: corr })
}

fn distortion_within(f: &[usize], dx: &[Vec<f64>], dy: &[Vec<f64>]) -> f64 {
    let mut dis: f64 = 0.0;
    for (i, &fi) in f.iter().enumerate() {
        for (j, &fj) in f.iter().enumerate().skip(i + 1) {
            dis = dis.max((dx[i][j] - dy[fi][fj]).abs());
        }
    }
    dis
}

fn distortion_within_rev(g: &[usize], dy: &[Vec<f64>], dx: &[Vec<f64>]) -> f64 {
    let mut dis: f64 = 0.0;
    for (i, &gi) in g.iter().enumerate() {
        for (j, &gj) in g.iter().enumerate().skip(i + 1) {
            dis = dis.max((dy[i][j] - dx[gi][gj]).abs());
        }
    }
    dis
}

fn distortion_cross(f: &[usize], g: &[usize], dx: &[Vec<f64>], dy: &[Vec<f64>]) -> f64 {
    let mut dis: f64 = 0.0;
    for (i, &fi) in f.iter().enumerate() {
        for (j, &gj) in g.iter().enumerate() {
            dis = dis.max((dx[i][gj] - dy[fi][j]).abs());
        }
    }
    dis
}

/// Seeded hill-climbing over (f, g) pairs for instances beyond the
/// exhaustive cap. Upper bound only.
fn gh_local_search(x: &FiniteMetricSpace, y: &FiniteMetricSpace, tol: &Tolerances) -> GhResult {
    let (n, m) = (x.len(), y.len());
    let mut rng = ChaCha8Rng::seed_from_u64(tol.seed);
    let mut best = (f64::INFINITY, vec![0usize; n], vec![0usize; m]);
    for _ in 0..32 {
        let mut f: Vec<usize> = (0..n).map(|_| rng.gen_range(0..m)).collect();
        let mut g: Vec<usize> = (0..m).map(|_| rng.gen_range(0..n)).collect();
        let eval = |f: &[usize], g: &[usize]| {
            distortion_within(f, &x.dist, &y.dist)
                .max(distortion_within_rev(g, &y.dist, &x.dist))
                .max(distortion_cross(f, g, &x.dist, &y.dist))
        };
        let mut cur = eval(&f, &g);
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..n {
                for v in 0..m {
                    let old = f[i];
                    f[i] = v;
                    let d = eval(&f, &g);
                    if d < cur - tol.lp {
                        cur = d;
                        improved = true;
                    } else {
                        f[i] = old;
                    }
                }
            }
            for j in 0..m {
                for v in 0..n {
                    let old = g[j];
                    g[j] = v;
                    let d = eval(&f, &g);
                    if d < cur - tol.lp {
                        cur = d;
                        improved = true;
                    } else {
                        g[j] = old;
                    }
                }
            }
        }
        if cur < best.0 {
            best = (cur, f, g);
        }
    }
    let mut corr: Vec<(usize, usize)> =
        best.1.iter().enumerate().map(|(i, &fi)| (i, fi)).collect();
    for (j, &gj) in best.2.iter().enumerate() {
        if !corr.contains(&(gj, j)) {
            corr.push((gj, j));
        }
    }
    GhResult { value: best.0 / 2.0, exact: false, correspondence: corr }
}

/// Covering-number result with exactness flag.
#[derive(Debug, Clone, PartialEq)]
pub struct CovResult {
    pub count: usize,
    pub exact: bool,
}

/// Minimal number of closed ε-balls centered at points of `X` covering `X`.
/// Exhaustive set cover for `|X| <= 15`, greedy upper bound above that.
pub fn cov_growth(x: &FiniteMetricSpace, eps: f64, tol: &Tolerances) -> CovResult {
    let _ = tol;
    let n = x.len();
    let ball_mask = |c: usize| -> u32 {
        let mut mask = 0u32;
        for (p, row) in x.dist[c].iter().enumerate() {
            if *row <= eps {
                mask |= 1 << p;
            }
        }
        mask
    };
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let balls: Vec<u32> = (0..n).map(ball_mask).collect();
    if n <= 15 {
        let mut best = n;
        for subset in 0u32..(1 << n) {
            let cnt = subset.count_ones() as usize;
            if cnt >= best {
                continue;
            }
            let mut covered = 0u32;
            for (c, b) in balls.iter().enumerate() {
                if subset & (1 << c) != 0 {
                    covered |= b;
                }
            }
            if covered == full {
                best = cnt;
            }
        }
        CovResult { count: best, exact: true }
    } else {
        let mut covered = 0u32;
        let mut count = 0;
        while covered != full {
            let (c, _) = balls
                .iter()
                .enumerate()
                .max_by_key(|(_, b)| (*b & !covered).count_ones())
                .unwrap();
            covered |= balls[c];
            count += 1;
        }
        CovResult { count, exact: false }
    }
}

/// `C(X)` with Dirac-state generators and the metric slope Lip-norm.
pub fn embed_cqms(
    x: &FiniteMetricSpace,
    tol: &Tolerances,
) -> Result<(OrderUnitSpace, LipNorm), ClassicalError> {
    x.validate(tol).map_err(ClassicalError::NotAMetric)?;
    let n = x.len();
    let space = OrderUnitSpace {
        dimension: n,
        unit: vec![1.0; n],
        state_generators: (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect(),
        labels: Some(x.labels.clone()),
    };
    let l = lipnorm_from_metric(x, tol)?;
    Ok((space, l))
}

/// Metric on the disjoint union `X ⊔ Y` built from a correspondence with
/// distortion `<= 2d`: cross distances
/// `rho(x, y) = d + min over (x', y') in R of rho_X(x, x') + rho_Y(y', y)`.
pub fn disjoint_union_metric(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    corr: &[(usize, usize)],
    d: f64,
) -> FiniteMetricSpace {
    let (n, m) = (x.len(), y.len());
    let total = n + m;
    let mut dist = vec![vec![0.0; total]; total];
    for i in 0..n {
        for j in 0..n {
            dist[i][j] = x.dist[i][j];
        }
    }
    for i in 0..m {
        for j in 0..m {
            dist[n + i][n + j] = y.dist[i][j];
        }
    }
    for i in 0..n {
        for j in 0..m {
            let v = corr
                .iter()
                .map(|&(a, b)| x.dist[i][a] + y.dist[b][j])
                .fold(f64::INFINITY, f64::min)
                + d;
            dist[i][n + j] = v;
            dist[n + j][i] = v;
        }
    }
    let mut labels: Vec<String> = x.labels.iter().map(|s| format!("X:{s}")).collect();
    labels.extend(y.labels.iter().map(|s| format!("Y:{s}")));
    FiniteMetricSpace { labels, dist }
}

/// Report of the classical-vs-quantum comparison.
#[derive(Debug, Clone, Serialize)]
pub struct GhVsQReport {
    pub gh: f64,
    pub gh_exact: bool,
    pub q_upper: f64,
    pub q_lower: f64,
    pub strict_gap: bool,
}

/// Realize the classical bound: the optimal-correspondence disjoint-union
/// metric induces a combined Lip-norm whose state-space Hausdorff distance is
/// at most the GH distance; the diameter gap supplies the lower bound.
pub fn compare_gh_vs_q(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    tol: &Tolerances,
) -> Result<GhVsQReport, ClassicalError> {
    let gh = gh_distance(x, y, false, tol)?;
    // a zero-distortion correspondence still needs a positive cross distance
    let d = gh.value.max(1e-9);
    let union = disjoint_union_metric(x, y, &gh.correspondence, d);
    let l_union = lipnorm_from_metric(&union, tol)?;
    let (space_x, _) = embed_cqms(x, tol)?;
    let (space_y, _) = embed_cqms(y, tol)?;
    let q_upper = statemetric::hausdorff_states(
        &l_union,
        &space_x.state_generators,
        &space_y.state_generators,
        x.len(),
        y.len(),
        tol,
    )
    .map_err(ClassicalError::Lip)?;
    let (_, diam_x) = crate::lipnorm::radius_diameter(&space_x, &embed_cqms(x, tol)?.1, tol)?;
    let (_, diam_y) = crate::lipnorm::radius_diameter(&space_y, &embed_cqms(y, tol)?.1, tol)?;
    let q_lower = (diam_x - diam_y).abs() / 2.0;
    Ok(GhVsQReport {
        gh: gh.value,
        gh_exact: gh.exact,
        q_upper,
        q_lower,
        strict_gap: q_upper < gh.value - 1e-9,
    })
}

/// The golden instance: a three-point path `Y` (1, 1, 2), a two-point space
/// `Z` at distance 3, the enlarged state set `K`, and the segment `K1`.
#[derive(Debug, Clone)]
pub struct Appendix1 {
    pub y: FiniteMetricSpace,
    pub z: FiniteMetricSpace,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub k: Polytope,
    pub k1: Polytope,
    /// (gh, distq) = (1, 1/2); diameters 2 and 3.
    pub expected_gh: f64,
    pub expected_distq: f64,
    pub expected_diam_y: f64,
    pub expected_diam_z: f64,
}

/// Build the golden instance with its expected constants.
pub fn appendix1_instance() -> Appendix1 {
    let y = FiniteMetricSpace {
        labels: vec!["y1".into(), "y2".into(), "y3".into()],
        dist: vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ],
    };
    let z = FiniteMetricSpace {
        labels: vec!["z1".into(), "z2".into()],
        dist: vec![vec![0.0, 3.0], vec![3.0, 0.0]],
    };
    // w1 = y1 + (y2 - y3)/2, w2 = y3 + (y2 - y1)/2 in Dirac coordinates
    let w1 = vec![1.0, 0.5, -0.5];
    let w2 = vec![-0.5, 0.5, 1.0];
    let y1 = vec![1.0, 0.0, 0.0];
    let y2 = vec![0.0, 1.0, 0.0];
    let y3 = vec![0.0, 0.0, 1.0];
    let k = Polytope::new(vec![y1, y2, y3, w1.clone(), w2.clone()]).unwrap();
    let k1 = Polytope::new(vec![w1.clone(), w2.clone()]).unwrap();
    Appendix1 {
        y,
        z,
        w1,
        w2,
        k,
        k1,
        expected_gh: 1.0,
        expected_distq: 0.5,
        expected_diam_y: 2.0,
        expected_diam_z: 3.0,
    }
}

/// Seeded random metric space generator used by tests and the CLI harness:
/// distances from a perturbed shortest-path completion, guaranteeing the
/// triangle inequality.
pub fn random_metric_space(n: usize, rng: &mut ChaCha8Rng) -> FiniteMetricSpace {
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.gen_range(0.5..3.0);
            dist[i][j] = v;
            dist[j][i] = v;
        }
    }
    // Floyd-Warshall to restore the triangle inequality
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i][k] + dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
    FiniteMetricSpace {
        labels: (0..n).map(|i| format!("p{i}")).collect(),
        dist,
    }
}
