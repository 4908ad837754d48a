//! Acceptance criteria, one line each on stderr:
//!
//! ```text
//! cargo test --test acceptance -- --nocapture
//! ```

use std::f64::consts::PI;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use bergman_lab::bergman::{bell_pullback_check, project_density, CounterexampleSpec, Density};
use bergman_lab::estimator::{
    blowup_experiment, dyadic_family, dyadic_grid, polydisc_inequality_suite, restricted_ratio_suite,
    volume_scan, SuiteMode, SuiteReport,
};
use bergman_lab::lattice::{analyze_domain, DomainAnalysis, IntegerMatrix};
use bergman_lab::measure::{angular_character_integral, region_integral_as, ReinhardtAngularSet};
use bergman_lab::ExponentVector;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn domain(rows: &[Vec<i64>]) -> DomainAnalysis {
    analyze_domain(&IntegerMatrix::from_i64(rows).unwrap()).unwrap()
}

fn hartogs() -> DomainAnalysis {
    domain(&[vec![1, -1], vec![0, 1]])
}

fn example_3d() -> DomainAnalysis {
    domain(&[vec![1, 0, 0], vec![-1, 1, 0], vec![1, -1, 1]])
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn within_time(t: Instant, limit: Duration, msg: String) -> Outcome {
    let took = t.elapsed();
    check(took <= limit, format!("{msg}; {:.1}s of {:.0}s", took.as_secs_f64(), limit.as_secs_f64()))
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let w = 2.0 / ((1.0 - x * x) * dp * dp);
                    return (x, w);
                }
            }
        })
        .collect()
}

fn composite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let mid = a + (k as f64 + 0.5) * h;
            rule.iter().map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

/// `∫_0^top r^d dr` with `r = t²`, exact in Gauss–Legendre for `2d+1 < 40`.
fn power_integral(d: f64, top: f64, rule: &[(f64, f64)]) -> f64 {
    composite(|t| 2.0 * t.powf(2.0 * d + 1.0), 0.0, top.sqrt(), 1, rule)
}

/// Tensor-product oracle for `∫ r^d dr` over `{r1 r2 < s, s < r1 < √s} × [0,1)^{n−2}`.
fn region_oracle(d: &[f64], s: f64) -> f64 {
    let rule = gauss_legendre(20);
    let outer = composite(
        |x| {
            let r1 = x.exp();
            r1 * r1.powf(d[0]) * power_integral(d[1], s / r1, &rule)
        },
        s.ln(),
        0.5 * s.ln(),
        32,
        &rule,
    );
    d[2..].iter().fold(outer, |acc, &dj| acc * power_integral(dj, 1.0, &rule))
}

fn ac1() -> Outcome {
    let t = Instant::now();
    let h = hartogs();
    let e = example_3d();
    let g = domain(&[vec![2, -1], vec![0, 1]]);
    let ok = h.p_star == ratio(4, 3)
        && h.q_star == Some(ratio(4, 1))
        && h.m == 1
        && e.p_star == ratio(4, 3)
        && e.m == 2
        && e.degree == BigInt::from(1)
        && g.p_star == ratio(3, 2)
        && g.q_star == Some(ratio(3, 1))
        && g.m == 1;
    let msg = format!(
        "hartogs [{}], example-3d [{}, degree {}], [[2,-1],[0,1]] [{}]",
        h.summary(),
        e.summary(),
        e.degree,
        g.summary()
    );
    if !ok {
        return Err(msg);
    }
    within_time(t, Duration::from_secs(1), msg)
}

fn ac2() -> Outcome {
    let t = Instant::now();
    let grid = dyadic_grid(8, 20);
    let mut parts = Vec::new();
    let mut ok = true;
    for alpha in [vec![1, 1], vec![2, 1], vec![1, 1, 0], vec![3, 3, 1]] {
        let scan = volume_scan(&ExponentVector::from_integers(&alpha), &grid).map_err(|e| e.to_string())?;
        let s_ok = (scan.s_exponent - scan.expected_s_exponent).abs() <= 0.02 * scan.expected_s_exponent;
        let l_ok = (scan.log_exponent - scan.expected_log_exponent).abs() <= 0.1;
        ok &= s_ok && l_ok;
        parts.push(format!(
            "{:?}: s {:.4}/{:.4}, log {:.3}/{}",
            alpha, scan.s_exponent, scan.expected_s_exponent, scan.log_exponent, scan.expected_log_exponent
        ));
    }
    let msg = parts.join("; ");
    if !ok {
        return Err(msg);
    }
    within_time(t, Duration::from_secs(30), msg)
}

fn ac3() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let n = if case % 2 == 0 { 2 } else { 3 };
        let mut halves: Vec<i64> = (0..n).map(|_| rng.random_range(0..=12)).collect();
        if case % 3 == 0 {
            halves[1] = halves[0];
        }
        let s = (rng.random_range(4.0f64.ln()..10.0f64.ln()) * -1.0).exp();
        let d = ExponentVector::from_ratios(&halves.iter().map(|&h| (h, 2)).collect::<Vec<_>>());
        let closed = region_integral_as(&d, s).map_err(|e| e.to_string())?;
        let oracle = region_oracle(&d.to_f64(), s);
        worst = worst.max((closed - oracle).abs() / oracle);
    }
    if worst > 1e-6 {
        return Err(format!("region integral relative error {worst:.2e} exceeds 1e-6"));
    }

    let samples = 1_000_000u64;
    let kappa0 = [1i64, 1, 0];
    let kappas: [[i64; 3]; 8] = [
        [0, 0, 0],
        [-1, -1, 0],
        [-2, -2, 0],
        [-3, -3, 0],
        [1, 1, 0],
        [1, 0, 0],
        [0, 0, 1],
        [-1, -2, 0],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut sums = vec![(Complex64::new(0.0, 0.0), 0.0f64); kappas.len()];
    for _ in 0..samples {
        let th: [f64; 3] = [rng.random::<f64>() * 2.0 * PI, rng.random::<f64>() * 2.0 * PI, rng.random::<f64>() * 2.0 * PI];
        let phase: f64 = th.iter().zip(&kappa0).map(|(a, &k)| a * k as f64).sum();
        if phase.sin() < 0.0 {
            continue;
        }
        for (kappa, acc) in kappas.iter().zip(sums.iter_mut()) {
            let c: f64 = th.iter().zip(kappa).map(|(a, &k)| a * k as f64).sum();
            acc.0 += Complex64::from_polar(1.0, c);
            acc.1 += 1.0;
        }
    }
    let torus = (2.0 * PI).powi(3);
    let mut worst_z: f64 = 0.0;
    let mut zeros = 0;
    for (kappa, (sum, _)) in kappas.iter().zip(&sums) {
        let exact = angular_character_integral(kappa, &kappa0).map_err(|e| e.to_string())?;
        if exact == Complex64::new(0.0, 0.0) {
            zeros += 1;
        }
        let mean = sum / samples as f64;
        // Each sample is 1_{sin ≥ 0}·e^{iκθ}, so E|X|² = 1/2.
        let se = ((0.5 - mean.norm_sqr()).max(0.0) / samples as f64).sqrt() * torus;
        let z = (mean * torus - exact).norm() / se;
        worst_z = worst_z.max(z);
    }
    let msg = format!(
        "region integrals: worst relative error {worst:.1e} over 50 cases; angular: worst deviation {worst_z:.2} standard errors over {} characters ({zeros} exact zeros)",
        kappas.len()
    );
    if worst_z > 3.0 {
        return Err(msg);
    }
    within_time(t, Duration::from_secs(120), msg)
}

fn ac4() -> Outcome {
    let spec = CounterexampleSpec::new(&example_3d(), &ExponentVector::from_integers(&[1, 1, 1])).map_err(|e| e.to_string())?;
    let c = 2.0 / (3.0 * PI);
    let mut worst: f64 = 0.0;
    for k in 4..=12 {
        let s = 2f64.powi(-k);
        let a = spec.coefficient(&[0, 0, 0], s).map_err(|e| e.to_string())?;
        let want = c * s.powi(3) * (1.0 / s).ln();
        worst = worst.max((a.norm() - want).abs() / want);
    }
    if worst > 1e-9 {
        return Err(format!("closed form relative error {worst:.2e} exceeds 1e-9"));
    }

    // a_0 = (det A/π³)·∫_{F_s} z1 z2 dV, sampled on z1 in the annulus s < |z1| < √s,
    // z2 in the disc |z2| < s/|z1|, z3 in the unit disc.
    let s: f64 = 1.0 / 16.0;
    let n = 1_000_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut sum = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        let r1 = (s * s + rng.random::<f64>() * (s - s * s)).sqrt();
        let z1 = Complex64::from_polar(r1, rng.random::<f64>() * 2.0 * PI);
        let big = s / r1;
        let z2 = Complex64::from_polar(big * rng.random::<f64>().sqrt(), rng.random::<f64>() * 2.0 * PI);
        let w = z1 * z2;
        if w.im >= 0.0 {
            sum += w * (PI * big * big);
        }
    }
    let annulus = PI * (s - s * s);
    let integral = sum / n as f64 * annulus * PI;
    let oracle = integral / PI.powi(3);
    let a = spec.coefficient(&[0, 0, 0], s).map_err(|e| e.to_string())?;
    let rel = (a.norm() - oracle.norm()).abs() / oracle.norm();
    check(
        rel <= 0.02,
        format!(
            "closed form within {worst:.1e} on s = 2^-4..2^-12; Monte Carlo oracle at 2^-4 {:.5e} vs {:.5e} ({:.2}%)",
            oracle.norm(),
            a.norm(),
            100.0 * rel
        ),
    )
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::from_polar(radius * rng.random::<f64>().sqrt(), rng.random::<f64>() * 2.0 * PI))
        .collect()
}

fn ac5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let truncation = 6u32;
    let mut reproduce: f64 = 0.0;
    for trial in 0..20 {
        let n = 2 + trial % 2;
        let terms: Vec<(Vec<i64>, Complex64)> = (0..6)
            .map(|_| {
                let gamma: Vec<i64> = (0..n).map(|_| rng.random_range(0..truncation as i64)).collect();
                (gamma, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            })
            .collect();
        let density = Density::polynomial(n, &terms);
        let series = project_density(&density, &ReinhardtAngularSet::full(n), truncation).map_err(|e| e.to_string())?;
        let mut want = std::collections::BTreeMap::<Vec<i64>, Complex64>::new();
        for (g, c) in &terms {
            *want.entry(g.clone()).or_default() += c;
        }
        for (g, c) in &want {
            reproduce = reproduce.max((series.coefficient(g) - c).norm());
        }
        for (g, c) in series.terms() {
            let w = want.get(g).copied().unwrap_or_default();
            reproduce = reproduce.max((c - w).norm());
        }
    }

    let mut annihilate: f64 = 0.0;
    let sets = [
        ReinhardtAngularSet::full(2),
        ReinhardtAngularSet::polyradius_box(&[0.6, 0.9]),
        ReinhardtAngularSet::sublevel(ExponentVector::from_integers(&[1, 2]), 0.1),
    ];
    for nu in [[1i64, 0], [0, 2], [3, 1]] {
        for set in &sets {
            let series = project_density(&Density::antiholomorphic(&nu), set, 8).map_err(|e| e.to_string())?;
            for _ in 0..10 {
                annihilate = annihilate.max(series.evaluate(&random_point(&mut rng, 2, 0.95)).norm());
            }
        }
    }

    let h = hartogs();
    let mut bell: f64 = 0.0;
    let images = [
        ReinhardtAngularSet::sublevel(ExponentVector::from_integers(&[0, 1]), 0.5),
        ReinhardtAngularSet::sublevel(ExponentVector::from_integers(&[1, 1]), 0.2),
        ReinhardtAngularSet::polyradius_box(&[0.5, 0.7]),
    ];
    for e in &images {
        for _ in 0..5 {
            let z = random_point(&mut rng, 2, 0.9);
            let chk = bell_pullback_check(&h, e, &z, 40).map_err(|e| e.to_string())?;
            bell = bell.max((chk.lhs - chk.rhs).norm());
        }
    }
    check(
        reproduce <= 1e-10 && annihilate <= 1e-12 && bell <= 1e-6,
        format!("reproducing {reproduce:.1e}, antiholomorphic {annihilate:.1e}, Bell pullback {bell:.1e}"),
    )
}

fn ac6() -> Outcome {
    let t = Instant::now();
    let report = blowup_experiment(
        &example_3d(),
        &ExponentVector::from_integers(&[1, 1, 1]),
        &dyadic_grid(4, 16),
        48,
        1_000_000,
        2024,
    )
    .map_err(|e| e.to_string())?;
    let msg = format!(
        "slope {:.4} (target {:.4} ± 0.15), growth {:.3} (need ≥ 1.5), K = {:.4}",
        report.slope,
        report.p_star - 1.0,
        report.growth,
        report.k_constant
    );
    if (report.slope - 1.0 / 3.0).abs() > 0.15 || report.growth < 1.5 {
        return Err(msg);
    }
    within_time(t, Duration::from_secs(600), msg)
}

fn suite_line(name: &str, report: &SuiteReport) -> (bool, String) {
    match report.fit {
        Some(f) => (
            f.is_bounded(),
            format!("{name}: slope {:.3}, max/median {:.2}", f.slope, f.max_ratio / f.median_ratio),
        ),
        None => (false, format!("{name}: no finite ratios")),
    }
}

fn ac7() -> Outcome {
    let samples = 40_000;
    let ks: Vec<u32> = (2..=10).collect();
    let h = hartogs();
    let mut parts = Vec::new();
    let mut ok = true;

    let family = dyadic_family(&h.weight_exponent, &ks);
    let restricted = restricted_ratio_suite(&h, &family, samples, 7).map_err(|e| e.to_string())?;
    let (pass, line) = suite_line("restricted (Hartogs)", &restricted);
    ok &= pass;
    parts.push(line);

    let alpha = ExponentVector::from_integers(&[1, 1, 0]);
    let family = dyadic_family(&alpha, &ks);
    for (name, mode) in [("endpoint", SuiteMode::Endpoint), ("concentration", SuiteMode::Holder)] {
        let report = polydisc_inequality_suite(&alpha, &family, mode, None, samples, 7).map_err(|e| e.to_string())?;
        let (pass, line) = suite_line(name, &report);
        ok &= pass;
        parts.push(line);
    }

    // Above the endpoint the bound is not attained on sublevel families and
    // the ratio decays, so only the absence of growth is checked.
    let sub = polydisc_inequality_suite(&alpha, &family, SuiteMode::Subcritical, Some(1.6), samples, 7)
        .map_err(|e| e.to_string())?;
    let first = sub.rows[0].ratio;
    let f = sub.fit.ok_or("subcritical suite has no finite ratios")?;
    let pass = f.slope <= 0.1 && f.max_ratio <= 3.0 * first;
    ok &= pass;
    parts.push(format!("subcritical p = 1.6: slope {:.3} (no growth), max/first {:.2}", f.slope, f.max_ratio / first));

    check(ok, parts.join("; "))
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_bergman-lab")
}

fn run_twice(command: &str, config: &str, files: &[&str], dir: &Path) -> Result<(), String> {
    let cfg = dir.join(format!("{command}.json"));
    std::fs::write(&cfg, config).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for round in 0..2 {
        let out = dir.join(format!("{command}-{round}"));
        let status = Command::new(bin())
            .args([command, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("{command} failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        let bytes: Vec<Vec<u8>> = files
            .iter()
            .map(|f| std::fs::read(out.join(f)).map_err(|e| format!("{f}: {e}")))
            .collect::<Result<_, _>>()?;
        outputs.push(bytes);
    }
    if outputs[0] != outputs[1] {
        return Err(format!("{command} output differs between runs"));
    }
    Ok(())
}

fn ac8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cases: [(&str, &str, &[&str]); 6] = [
        ("analyze", r#"{"domain": "example-3d"}"#, &["analysis.json"]),
        ("volume", r#"{"alpha": [3, 3, 1], "grid": {"from": 8, "to": 20}}"#, &["volume.csv"]),
        (
            "project",
            r#"{"kind": "weighted", "alpha": [1, 1, 0], "set": {"radial": [{"c": [1, 1, 0], "bound": "1/16", "rel": "lt"}], "angular": {"kappa0": [1, 1, 0]}}, "truncation": 6}"#,
            &["coefficients.csv", "series.json"],
        ),
        (
            "verify",
            r#"{"mode": "endpoint", "alpha": [1, 1, 0], "family": {"from": 2, "to": 6}, "samples": 4000, "seed": 3}"#,
            &["verify.csv"],
        ),
        (
            "blowup",
            r#"{"domain": "example-3d", "b": [1, 1, 1], "grid": {"from": 4, "to": 7}, "samples": 100000, "seed": 9}"#,
            &["blowup.csv"],
        ),
        (
            "verify",
            r#"{"mode": "restricted", "domain": "hartogs", "family": {"from": 2, "to": 5}, "samples": 4000, "seed": 3}"#,
            &["verify.csv"],
        ),
    ];
    for (i, (command, config, files)) in cases.iter().enumerate() {
        let sub = dir.path().join(i.to_string());
        std::fs::create_dir_all(&sub).map_err(|e| e.to_string())?;
        run_twice(command, config, files, &sub)?;
    }
    Ok(format!("{} command configurations reproduce byte-for-byte", cases.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("AC1 exact invariants", ac1),
        ("AC2 volume asymptotics", ac2),
        ("AC3 closed forms vs oracles", ac3),
        ("AC4 coefficient formula", ac4),
        ("AC5 projection identities", ac5),
        ("AC6 blow-up trend", ac6),
        ("AC7 uniform boundedness suites", ac7),
        ("AC8 determinism", ac8),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let line = match &outcome {
            Ok(detail) => format!("PASS {name}: {detail}\n"),
            Err(detail) => format!("FAIL {name}: {detail}\n"),
        };
        // Written past the test harness capture so the summary is always visible.
        let _ = std::io::stderr().write_all(line.as_bytes());
        if outcome.is_err() {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
