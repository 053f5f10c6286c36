//! Acceptance gate. Runs the ten criteria in order, prints one PASS/FAIL
//! line per criterion (straight to stdout, so the lines survive output
//! capture) and fails if any criterion fails.

use std::f64::consts::PI;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use depthlab::experiments::{rate_slope, run_experiment, summarize, ExperimentConfig, ExperimentReport, ReportFormat, SlopeAxis};
use depthlab::location::{location_bound_rhs, population_hd, sample_hd, DepthMethod};
use depthlab::models::{make_gaussian_spherical, make_independent_stable, projection_law_test, AlphaModel, SampleMatrix};
use depthlab::norms::{alpha_norm, sphere_directions, zero_matrix_lemma_check, DirectionScheme, NormIndex, ScatterMatrix, ZeroMatrixCheck};
use depthlab::rng::rng_from_seed;
use depthlab::scatter::{population_alpha_scatter_sigma, population_alpha_shd, population_scatter_sigma, population_shd};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

type Verdict = (bool, String);

fn stdout_line(s: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{s}");
    let _ = out.flush();
}

fn run(id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> bool {
    let t = Instant::now();
    let (ok, detail) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(v) => v,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    let elapsed = t.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = ok && in_time;
    let budget = match limit {
        Some(l) => format!(" (budget {:.0}s{})", l.as_secs_f64(), if in_time { "" } else { ", EXCEEDED" }),
        None => String::new(),
    };
    stdout_line(&format!(
        "criterion {id:>2}: {} {name}: {detail} [{:.1}s{budget}]",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    ));
    pass
}

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).expect("config parses")
}

fn median_of(report: &ExperimentReport, n: usize, eps: f64) -> f64 {
    let d = report.records[0].d;
    report.median_deviation(n, d, eps).expect("cell present")
}

/// Number of adjacent pairs that go up instead of down.
fn inversions(v: &[f64]) -> usize {
    v.windows(2).filter(|w| w[1] > w[0]).count()
}

// 1 -------------------------------------------------------------------------

/// Minimum over `k` equally spaced directions of the closed-halfspace count
/// at `x`, via sorted angles of `X_i − x`.
fn angular_grid_min_count(x: [f64; 2], pts: &[[f64; 2]], k: usize) -> usize {
    let mut coincident = 0;
    let mut ang: Vec<f64> = Vec::with_capacity(pts.len());
    for p in pts {
        let (dx, dy) = (p[0] - x[0], p[1] - x[1]);
        if dx == 0.0 && dy == 0.0 {
            coincident += 1;
        } else {
            ang.push(dy.atan2(dx).rem_euclid(2.0 * PI));
        }
    }
    ang.sort_by(f64::total_cmp);
    let m = ang.len();
    // points with angle in [lo, lo + π], wrapping
    let in_half = |lo: f64| -> usize {
        let lo = lo.rem_euclid(2.0 * PI);
        let hi = lo + PI;
        let a = ang.partition_point(|&v| v < lo);
        if hi < 2.0 * PI {
            ang.partition_point(|&v| v <= hi) - a
        } else {
            (m - a) + ang.partition_point(|&v| v <= hi - 2.0 * PI)
        }
    };
    (0..k).map(|j| in_half(2.0 * PI * j as f64 / k as f64 - PI / 2.0)).min().unwrap() + coincident
}

fn criterion_1() -> Verdict {
    let c = make_independent_stable(1.0, 2).unwrap();
    let pop = population_hd(&[1.0, 1.0], &c).unwrap().value();
    let closed = (pop - 0.25).abs() <= 1e-12;
    let n = 100_000;
    let s = c.sample(n, 2024).unwrap();
    let pts: Vec<[f64; 2]> = s.rows().map(|r| [r[0], r[1]]).collect();
    let mc = angular_grid_min_count([1.0, 1.0], &pts, 200_000) as f64 / n as f64;
    let ok = closed && (mc - pop).abs() <= 0.01;
    (ok, format!("closed form {pop:.15}, Monte-Carlo infimum {mc:.5} (n = 1e5, 2e5 directions)"))
}

// 2 -------------------------------------------------------------------------

/// Brute force: closed-halfspace counts just either side of every critical
/// angle (where some `X_i − x` lies on the boundary).
fn jittered_oracle(x: [f64; 2], pts: &[[f64; 2]]) -> usize {
    let count = |t: f64| {
        let (ux, uy) = (t.cos(), t.sin());
        pts.iter().filter(|p| (p[0] - x[0]) * ux + (p[1] - x[1]) * uy >= 0.0).count()
    };
    let mut best = pts.len();
    let mut any = false;
    for p in pts {
        let (dx, dy) = (p[0] - x[0], p[1] - x[1]);
        if dx == 0.0 && dy == 0.0 {
            continue;
        }
        any = true;
        let phi = dy.atan2(dx);
        for side in [PI / 2.0, -PI / 2.0] {
            for jit in [1e-7, -1e-7] {
                best = best.min(count(phi + side + jit));
            }
        }
    }
    if !any {
        best = pts.len();
    }
    best
}

fn criterion_2() -> Verdict {
    let mut rng = rng_from_seed(77);
    let mut mismatches = 0;
    for inst in 0..500 {
        let n = rng.random_range(1..=50);
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|_| match inst % 3 {
                0 => [rng.sample(StandardNormal), rng.sample(StandardNormal)],
                1 => [rng.random_range(-3..=3) as f64, rng.random_range(-3..=3) as f64],
                _ => {
                    let t: f64 = rng.sample(StandardNormal);
                    [t, 0.5 * t + 1.0]
                }
            })
            .collect();
        let x = match rng.random_range(0..3) {
            0 => pts[rng.random_range(0..n)],
            1 => [rng.random_range(-3..=3) as f64, rng.random_range(-3..=3) as f64],
            _ => [rng.sample::<f64, _>(StandardNormal) * 0.5, rng.sample::<f64, _>(StandardNormal) * 0.5],
        };
        let s = SampleMatrix::from_rows(&pts.iter().map(|p| p.to_vec()).collect::<Vec<_>>()).unwrap();
        let got = sample_hd(&x, &s, DepthMethod::Exact2d).unwrap().value();
        let want = jittered_oracle(x, &pts) as f64 / n as f64;
        if got != want {
            mismatches += 1;
        }
    }
    (mismatches == 0, format!("{mismatches} mismatches on 500 instances"))
}

// 3 -------------------------------------------------------------------------

fn criterion_3() -> Verdict {
    let mut worst: f64 = 0.0;
    for d in [2usize, 4, 9, 16] {
        let s = population_scatter_sigma(&make_independent_stable(1.0, d).unwrap()).unwrap();
        worst = worst.max((s - (d as f64).powf(0.25)).abs());
    }
    let g = population_scatter_sigma(&make_gaussian_spherical(3).unwrap()).unwrap();
    let gerr = (g - 0.674_489_750_196_081_7).abs();
    (worst <= 1e-10 && gerr <= 1e-10, format!("max Cauchy error {worst:.2e}, Gaussian error {gerr:.2e}"))
}

// 4 -------------------------------------------------------------------------

fn criterion_4() -> Verdict {
    let mut worst: f64 = 0.0;
    for (d, want) in [(2usize, 0.445_115_100_292_896_5), (4, 0.391_826_552_030_607_3)] {
        let m = make_independent_stable(1.0, d).unwrap();
        let s = population_scatter_sigma(&m).unwrap();
        let v = population_shd(&ScatterMatrix::scaled_identity(d, s * s).unwrap(), &m).unwrap().value();
        worst = worst.max((v - want).abs()).max((v - 2.0 / PI * (d as f64).powf(-0.25).atan()).abs());
    }
    let mut alpha_worst: f64 = 0.0;
    let models: Vec<AlphaModel> = vec![
        make_independent_stable(1.0, 2).unwrap(),
        make_independent_stable(1.0, 4).unwrap(),
        make_gaussian_spherical(2).unwrap(),
        make_gaussian_spherical(3).unwrap(),
    ];
    for m in &models {
        let q = population_alpha_scatter_sigma(m);
        let v = population_alpha_shd(&ScatterMatrix::scaled_identity(m.dim(), q * q).unwrap(), m).unwrap().value();
        alpha_worst = alpha_worst.max((v - 0.5).abs());
    }
    (worst <= 1e-9 && alpha_worst <= 1e-9, format!("sHD max error {worst:.2e}, alpha-sHD max error {alpha_worst:.2e}"))
}

// 5 -------------------------------------------------------------------------

fn criterion_5() -> Verdict {
    let c1_ref: f64 = "683.2963274708710470519452581110864865151".parse().unwrap();
    let c2_ref: f64 = "5.631470258122641958001083704177712068748".parse().unwrap();
    let b = location_bound_rhs(0.1, 2, 10_000, 0.05).unwrap();
    let (e1, e2) = ((b.c1 - c1_ref).abs(), (b.c2 - c2_ref).abs());
    let recomputed = 0.1 / 0.9 + b.c1 * (2.0f64 / 10_000.0).sqrt() + b.c2 * ((1.0f64 / 0.05).ln() / 10_000.0).sqrt();
    let ok = e1 <= 1e-12 && e2 <= 1e-12 && b.c2 > 5.0 && (b.value - recomputed).abs() <= 1e-12;
    (ok, format!("c1 = {:.13} (error {e1:.1e}), c2 = {:.15} (error {e2:.1e})", b.c1, b.c2))
}

// 6 -------------------------------------------------------------------------

fn criterion_6() -> Verdict {
    let mut worst = 1.0f64;
    let mut ok = true;
    for family in ["gaussian", "cauchy"] {
        let c = config(&format!(
            r#"
            kind = "maxdepth_coverage"
            master_seed = 606
            replications = 200
            delta = 0.05
            n = [2000, 8000]
            d = [2, 3]
            epsilon = [0.0, 0.1, 0.2]
            threads = 4
            [model]
            family = "{family}"
            "#
        ));
        let r = run_experiment(&c).unwrap();
        for cell in &r.cells {
            worst = worst.min(cell.coverage);
            ok &= cell.coverage >= 0.90;
        }
        ok &= r.cells.len() == 12;
    }
    (ok, format!("minimum cell coverage {worst:.3} over 24 cells (required 0.90)"))
}

// 7 -------------------------------------------------------------------------

fn criterion_7() -> Verdict {
    let base = r#"
        kind = "location_rate"
        master_seed = 707
        replications = 200
        delta = 0.05
        d = [2]
        threads = 4
        [model]
        family = "gaussian"
        [growth]
        gamma = 1.0
        kappa = 0.34
    "#;
    let clean = run_experiment(&config(&format!("n = [500, 2000, 8000, 32000]\nepsilon = [0.0]\n{base}"))).unwrap();
    let n_fit = rate_slope(&clean, SlopeAxis::N).unwrap();
    let dirty = run_experiment(&config(&format!("n = [32000]\nepsilon = [0.05, 0.1, 0.2]\n{base}"))).unwrap();
    let e_fit = rate_slope(&dirty, SlopeAxis::Epsilon).unwrap();
    let ok = (-0.65..=-0.35).contains(&n_fit.slope) && (0.7..=1.3).contains(&e_fit.slope);
    (
        ok,
        format!(
            "n-slope {:.3} [{:.3}, {:.3}], epsilon-slope {:.3} [{:.3}, {:.3}]",
            n_fit.slope, n_fit.lower, n_fit.upper, e_fit.slope, e_fit.lower, e_fit.upper
        ),
    )
}

// 8 -------------------------------------------------------------------------

fn criterion_8() -> Verdict {
    let grid = [500usize, 2000, 8000, 32000];
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, family, depth, gamma, kappa) in
        [("alpha=2 op-norm", "gaussian", "standard", 0.4, 0.18), ("alpha=1 pseudometric", "cauchy", "alpha", 0.5, 0.125)]
    {
        let c = config(&format!(
            r#"
            kind = "scatter_rate"
            master_seed = 808
            replications = 100
            delta = 0.05
            n = [500, 2000, 8000, 32000]
            d = [2]
            epsilon = [0.0, 0.1]
            threads = 4
            [model]
            family = "{family}"
            [growth]
            gamma = {gamma}
            kappa = {kappa}
            [method]
            scatter_depth = "{depth}"
            "#
        ));
        let r = run_experiment(&c).unwrap();
        let clean: Vec<f64> = grid.iter().map(|&n| median_of(&r, n, 0.0)).collect();
        let dirty: Vec<f64> = grid.iter().map(|&n| median_of(&r, n, 0.1)).collect();
        let decreasing = inversions(&clean) <= 1;
        let (last, prev) = (dirty[3], dirty[2]);
        // plateau: quadrupling n moves the contaminated level by under 25%
        // (a clean √n rate would halve it), and it sits below 5ε
        let plateau = (last - prev).abs() <= 0.25 * last.max(prev) && last < 0.5 && last > clean[3];
        ok &= decreasing && plateau;
        detail.push(format!(
            "{label}: clean {} ({}), eps=0.1 {} ({})",
            clean.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(" > "),
            if decreasing { "monotone" } else { "not monotone" },
            dirty.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", "),
            if plateau { "plateau" } else { "no plateau" }
        ));
    }
    (ok, detail.join("; "))
}

// 9 -------------------------------------------------------------------------

fn random_signed_permutation(d: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let mut perm: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let mut a = DMatrix::zeros(d, d);
    for (i, &j) in perm.iter().enumerate() {
        a[(i, j)] = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    a
}

fn criterion_9() -> Verdict {
    let mut rng = rng_from_seed(909);
    // signed-permutation equivariance of the exact sample depth
    let mut equiv_fail = 0;
    for inst in 0..200 {
        let n = rng.random_range(5..=60);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                if inst % 2 == 0 {
                    vec![rng.sample(StandardNormal), rng.sample(StandardNormal)]
                } else {
                    vec![rng.random_range(-4..=4) as f64, rng.random_range(-4..=4) as f64]
                }
            })
            .collect();
        let s = SampleMatrix::from_rows(&rows).unwrap();
        let a = random_signed_permutation(2, &mut rng);
        let t = s.affine(&a, &[0.0, 0.0]).unwrap();
        let x = if inst % 2 == 0 { vec![rng.sample(StandardNormal), rng.sample(StandardNormal)] } else { rows[0].clone() };
        let ax: Vec<f64> = (0..2).map(|i| (0..2).map(|j| a[(i, j)] * x[j]).sum()).collect();
        if sample_hd(&x, &s, DepthMethod::Exact2d).unwrap() != sample_hd(&ax, &t, DepthMethod::Exact2d).unwrap() {
            equiv_fail += 1;
        }
    }

    // zero-matrix lemma: every nonzero symmetric zero-diagonal matrix has a
    // sign vector with a negative quadratic form
    let mut lemma_fail = 0;
    for k in 0..1000 {
        let d = rng.random_range(2..=6);
        let mut a = DMatrix::zeros(d, d);
        if k % 100 != 0 {
            for i in 0..d {
                for j in 0..i {
                    let v: f64 = if k % 3 == 0 { rng.random_range(-2..=2) as f64 } else { rng.sample(StandardNormal) };
                    a[(i, j)] = v;
                    a[(j, i)] = v;
                }
            }
        }
        let zero = a.iter().all(|&v| v == 0.0);
        let mut brute_min = f64::INFINITY;
        for mask in 0..(1u32 << d) {
            let v: Vec<f64> = (0..d).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
            let q: f64 = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| v[i] * a[(i, j)] * v[j]).sum();
            brute_min = brute_min.min(q);
        }
        let good = match zero_matrix_lemma_check(&a).unwrap() {
            ZeroMatrixCheck::Counterexample { signs, value } => {
                let q: f64 = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| signs[i] * a[(i, j)] * signs[j]).sum();
                !zero && value < 0.0 && q == value && brute_min < 0.0
            }
            ZeroMatrixCheck::AllNonnegative { lemma_violated } => zero && !lemma_violated && brute_min >= 0.0,
        };
        if !good {
            lemma_fail += 1;
        }
    }

    // norm sandwich ‖x‖_q ≤ ‖x‖_p ≤ d^{1/p − 1/q}‖x‖_q for p < q
    let indices = [0.5, 1.0, 1.5, 2.0, 3.0, f64::INFINITY];
    let mut sandwich_fail = 0;
    for _ in 0..10_000 {
        let d = rng.random_range(1..=8);
        let x: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal) * 10f64.powi(rng.random_range(-3..=3))).collect();
        let i = rng.random_range(0..indices.len() - 1);
        let j = rng.random_range(i + 1..indices.len());
        let (p, q) = (indices[i], indices[j]);
        let np = alpha_norm(&x, NormIndex::from_f64(p).unwrap()).unwrap();
        let nq = alpha_norm(&x, NormIndex::from_f64(q).unwrap()).unwrap();
        let factor = (d as f64).powf(1.0 / p - if q.is_infinite() { 0.0 } else { 1.0 / q });
        if nq > np * (1.0 + 1e-12) || np > factor * nq * (1.0 + 1e-12) {
            sandwich_fail += 1;
        }
    }

    // projection law at the 1% level, 20 directions per model
    let models = [
        ("gaussian d=3", make_gaussian_spherical(3).unwrap()),
        ("cauchy d=3", make_independent_stable(1.0, 3).unwrap()),
        ("stable 0.7 d=2", make_independent_stable(0.7, 2).unwrap()),
        ("stable 1.5 d=2", make_independent_stable(1.5, 2).unwrap()),
    ];
    let mut worst_model = 0;
    let mut ks_summary = Vec::new();
    for (mi, (name, m)) in models.iter().enumerate() {
        let dirs = sphere_directions(m.dim(), 20, DirectionScheme::UniformRandom, 900 + mi as u64).unwrap();
        let fails = dirs
            .iter()
            .enumerate()
            .filter(|(k, u)| !projection_law_test(m, u, 2000, 10_000 * mi as u64 + *k as u64).unwrap().passed)
            .count();
        worst_model = worst_model.max(fails);
        ks_summary.push(format!("{name} {fails}/20"));
    }

    let ok = equiv_fail == 0 && lemma_fail == 0 && sandwich_fail == 0 && worst_model <= 1;
    (
        ok,
        format!(
            "equivariance failures {equiv_fail}/200, lemma failures {lemma_fail}/1000, sandwich violations {sandwich_fail}/10000, KS rejections {}",
            ks_summary.join(", ")
        ),
    )
}

// 10 ------------------------------------------------------------------------

fn criterion_10() -> Verdict {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/location_rate_small.toml");
    let text = std::fs::read_to_string(path).expect("bundled config");
    let scatter = r#"
        kind = "scatter_rate"
        master_seed = 1010
        replications = 8
        delta = 0.05
        n = [400, 800]
        d = [2]
        epsilon = [0.0, 0.1]
        [model]
        family = "cauchy"
        [growth]
        gamma = 0.5
        kappa = 0.125
        [method]
        scatter_depth = "alpha"
        scatter_directions = 60
    "#;
    let mut identical = true;
    let mut sizes = Vec::new();
    for t in [text.as_str(), scatter] {
        let mut c = config(t);
        let mut outs = Vec::new();
        for threads in [1, 4] {
            c.threads = Some(threads);
            outs.push(summarize(&run_experiment(&c).unwrap(), ReportFormat::Csv).unwrap());
        }
        identical &= outs[0] == outs[1];
        sizes.push(outs[0].len());
    }
    (identical, format!("CSV bytes identical across 1 and 4 threads for 2 configs ({sizes:?} bytes)"))
}

#[test]
fn acceptance_suite() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "closed-form population depth", Some(secs(30)), criterion_1),
        run(2, "exact planar depth vs brute force", Some(secs(60)), criterion_2),
        run(3, "scatter sigma solver", Some(secs(1)), criterion_3),
        run(4, "maximum scatter depth values", None, criterion_4),
        run(5, "bound constants", None, criterion_5),
        run(6, "coverage of the depth bound", Some(secs(600)), criterion_6),
        run(7, "location rate slopes", Some(secs(900)), criterion_7),
        run(8, "scatter rates", Some(secs(900)), criterion_8),
        run(9, "invariant suites", None, criterion_9),
        run(10, "determinism across worker counts", None, criterion_10),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    stdout_line(&format!("acceptance: {passed}/10 criteria passed"));
    assert_eq!(passed, 10, "some acceptance criteria failed; see the lines above");
}
