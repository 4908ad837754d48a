//! Weighted norms, weak-type quasinorms, positive-operator estimates and the
//! experiment drivers built from them.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bergman::{CounterexampleSpec, EngineError, MonomialSeries};
use crate::exact::rational_to_f64;
use crate::exponent::ExponentVector;
use crate::lattice::DomainAnalysis;
use crate::measure::{
    exponent_profile, radial_integral, region_integral_as, require_weight_exponent, rho_radii,
    sublevel_volume, CompiledSet, MeasureError, Relation, ReinhardtAngularSet,
};
use crate::quadrature::Tolerance;
use crate::report::{fmt_f64, ols, CsvTable};
use crate::sampling::{chunked, polydisc_point, stream_rng, task_seed, Moments};

/// Default `s` value below which the blow-up experiment is run.
pub const S0: f64 = 0.0625;
/// Radius of the box `Π` on which `|h_s|` is bounded below.
pub const PI_BOX_RADIUS: f64 = 0.125;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("integrand looks non-integrable: the top 1% of samples carry {fraction:.3} of the mass")]
    NonIntegrable { fraction: f64 },
    #[error("the domain is a polydisc (p* = 1); a nontrivial monomial polyhedron is required")]
    TrivialDomain,
    #[error("superlevel measure did not converge at s = {s:e}: 95% half-width is {relative:.3} of the estimate")]
    NonConvergent { s: f64, relative: f64 },
    #[error("range error: {0}")]
    Range(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Quadrature,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EstimateResult {
    pub value: f64,
    pub standard_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub method: Method,
}

impl EstimateResult {
    pub fn exact(value: f64) -> Self {
        EstimateResult {
            value,
            standard_error: 0.0,
            samples: 0,
            seed: 0,
            method: Method::Quadrature,
        }
    }

    fn monte_carlo(m: &Moments, seed: u64) -> Self {
        EstimateResult {
            value: m.mean(),
            standard_error: m.std_error(),
            samples: m.n,
            seed,
            method: Method::MonteCarlo,
        }
    }

    /// `value^{1/p}` with the delta-method standard error.
    pub fn root(self, p: f64) -> Self {
        if self.value <= 0.0 {
            return EstimateResult {
                value: 0.0,
                standard_error: 0.0,
                ..self
            };
        }
        let v = self.value.powf(1.0 / p);
        EstimateResult {
            value: v,
            standard_error: v / (p * self.value) * self.standard_error,
            ..self
        }
    }
}

/// `ρ_power · (−log ρ_logBase)^{logPower}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Weight {
    pub power: Vec<f64>,
    pub log_base: Vec<f64>,
    pub log_power: f64,
}

impl Weight {
    pub fn none(n: usize) -> Self {
        Weight {
            power: vec![0.0; n],
            log_base: vec![0.0; n],
            log_power: 0.0,
        }
    }

    /// `w^{p−2}` with `w = ρ_{1−1A⁻¹}`.
    pub fn target(analysis: &DomainAnalysis, p: f64) -> Self {
        let w = analysis.weight_exponent.to_f64();
        Weight {
            power: w.iter().map(|x| x * (p - 2.0)).collect(),
            log_base: w,
            log_power: 0.0,
        }
    }

    /// `(−log w)^{(m−1)(p*−1)}`.
    pub fn source(analysis: &DomainAnalysis) -> Self {
        let w = analysis.weight_exponent.to_f64();
        Weight {
            power: vec![0.0; w.len()],
            log_base: w,
            log_power: rational_to_f64(&analysis.log_weight_power()),
        }
    }

    pub fn eval_radii(&self, r: &[f64]) -> f64 {
        let mut v = if self.power.iter().all(|&a| a == 0.0) {
            1.0
        } else {
            self.power
                .iter()
                .zip(r)
                .filter(|(a, _)| **a != 0.0)
                .map(|(a, x)| x.powf(*a))
                .product()
        };
        if self.log_power != 0.0 {
            let t = -rho_radii(&self.log_base, r).ln();
            v *= t.max(0.0).powf(self.log_power);
        }
        v
    }
}

fn radii(z: &[Complex64]) -> Vec<f64> {
    z.iter().map(|w| w.norm()).collect()
}

/// Fails when the largest 1% of the nonzero contributions hold more than
/// half of their total.
fn check_tail(mut values: Vec<f64>) -> Result<(), EstimatorError> {
    if values.len() < 100 {
        return Ok(());
    }
    values.sort_by(|a, b| b.total_cmp(a));
    let top = values.len().div_ceil(100);
    let total: f64 = values.iter().sum();
    let head: f64 = values[..top].iter().sum();
    if total > 0.0 && head / total > 0.5 {
        return Err(EstimatorError::NonIntegrable {
            fraction: head / total,
        });
    }
    Ok(())
}

/// Runs `draw` on `samples` uniform points of the polydisc and returns the
/// moments of the draws and all nonzero draws, both in sample order.
fn sample_polydisc<F>(n: usize, samples: u64, seed: u64, draw: F) -> (Moments, Vec<f64>)
where
    F: Fn(&[Complex64], &mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    let parts = chunked(samples, seed, |rng, count| {
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        let mut m = Moments::default();
        let mut nz = Vec::new();
        for _ in 0..count {
            polydisc_point(rng, &mut z);
            let x = draw(&z, rng);
            m.push(x);
            if x != 0.0 {
                nz.push(x);
            }
        }
        (m, nz)
    });
    let mut total = Moments::default();
    let mut values = Vec::new();
    for (m, nz) in parts {
        total = total.merge(m);
        values.extend(nz);
    }
    (total, values)
}

/// `(∫_region |f|^p · weight dV)^{1/p}` by uniform Monte Carlo on the polydisc.
pub fn lp_norm<F>(
    f: F,
    region: &ReinhardtAngularSet,
    p: f64,
    weight: &Weight,
    samples: u64,
    seed: u64,
) -> Result<EstimateResult, EstimatorError>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    if !(p >= 1.0) {
        return Err(EstimatorError::Range(format!("p = {p} must be at least 1")));
    }
    let n = region.dimension;
    if weight.power.len() != n || weight.log_base.len() != n {
        return Err(MeasureError::Dimension {
            expected: n,
            got: weight.power.len(),
        }
        .into());
    }
    let vol = PI.powi(n as i32);
    let region = CompiledSet::new(region);
    let (m, values) = sample_polydisc(n, samples, seed, |z, _| {
        if !region.member(z) {
            return 0.0;
        }
        let v = f(z).abs();
        if v == 0.0 {
            0.0
        } else {
            vol * v.powf(p) * weight.eval_radii(&radii(z))
        }
    });
    check_tail(values)?;
    Ok(EstimateResult::monte_carlo(&m, seed).root(p))
}

/// Weak-type quasinorm `sup_y y·|{|f| ≥ y}|^{1/p}` over a 64-point geometric
/// grid spanning the sampled values.
pub fn weak_quasinorm<F>(
    f: F,
    region: &ReinhardtAngularSet,
    p: f64,
    samples: u64,
    seed: u64,
) -> Result<EstimateResult, EstimatorError>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    weak_quasinorm_grid(f, region, p, samples, seed, 64)
}

/// [`weak_quasinorm`] with a grid of `grid_points` points. Grids of
/// `64, 127, 253, …` points are nested.
pub fn weak_quasinorm_grid<F>(
    f: F,
    region: &ReinhardtAngularSet,
    p: f64,
    samples: u64,
    seed: u64,
    grid_points: usize,
) -> Result<EstimateResult, EstimatorError>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    if !(p > 1.0) {
        return Err(EstimatorError::Range(format!("p = {p} must exceed 1")));
    }
    let n = region.dimension;
    let vol = PI.powi(n as i32);
    let region = CompiledSet::new(region);
    let (_, mut values) = sample_polydisc(n, samples, seed, |z, _| {
        if region.member(z) {
            f(z).abs()
        } else {
            0.0
        }
    });
    let mut result = EstimateResult {
        value: 0.0,
        standard_error: 0.0,
        samples,
        seed,
        method: Method::MonteCarlo,
    };
    if values.is_empty() {
        return Ok(result);
    }
    values.sort_by(|a, b| b.total_cmp(a));
    let (lo, hi) = (values[values.len() - 1], values[0]);
    let g = grid_points.max(2);
    let total = samples as f64;
    for i in 0..g {
        let y = if lo == hi {
            hi
        } else {
            lo * (hi / lo).powf(i as f64 / (g - 1) as f64)
        };
        let count = values.partition_point(|&v| v >= y) as f64;
        let frac = count / total;
        let mu = vol * frac;
        let q = y * mu.powf(1.0 / p);
        if q > result.value {
            let se_mu = vol * (frac * (1.0 - frac) / total).sqrt();
            result.value = q;
            result.standard_error = y / p * mu.powf(1.0 / p - 1.0) * se_mu;
        }
        if lo == hi {
            break;
        }
    }
    Ok(result)
}

/// Importance sampler for `∫_F r^{α+1} g(r) dr` over the radial part of `F`,
/// drawn in `t = −log r` from shifted, exponentially tilted exponentials.
#[derive(Clone, Debug)]
struct RadialSampler {
    constraints: CompiledSet,
    tau: Vec<f64>,
    lambda_tilted: Vec<f64>,
    tilt: Option<(Vec<f64>, f64)>,
    log_scale: f64,
    empty: bool,
}

impl RadialSampler {
    fn new(alpha: &[f64], set: &ReinhardtAngularSet) -> Self {
        let constraints = &set.radial;
        let n = alpha.len();
        let lambda: Vec<f64> = alpha.iter().map(|a| a + 2.0).collect();
        let mut tau = vec![0.0f64; n];
        let mut tilt_c: Option<(Vec<f64>, f64)> = None;
        let mut empty = false;
        for k in constraints {
            let c = k.c.to_f64();
            let active: Vec<usize> = (0..n).filter(|&j| c[j] != 0.0).collect();
            if k.rel != Relation::Lt {
                continue;
            }
            if k.bound <= 0.0 && !active.is_empty() {
                empty = true;
                continue;
            }
            let level = -k.bound.ln();
            match active.as_slice() {
                [j] if c[*j] > 0.0 => tau[*j] = tau[*j].max(level / c[*j]),
                [_, _, ..] if tilt_c.is_none() && c.iter().all(|&x| x >= 0.0) => {
                    tilt_c = Some((c, level))
                }
                _ => {}
            }
        }
        let mut theta = 0.0;
        if let Some((c, level)) = &tilt_c {
            let shifted = level - c.iter().zip(&tau).map(|(a, b)| a * b).sum::<f64>();
            let mean = |th: f64| -> f64 {
                c.iter()
                    .zip(&lambda)
                    .filter(|(cj, _)| **cj > 0.0)
                    .map(|(cj, l)| cj / (l - th * cj))
                    .sum()
            };
            if mean(0.0) < shifted {
                let top = c
                    .iter()
                    .zip(&lambda)
                    .filter(|(cj, _)| **cj > 0.0)
                    .map(|(cj, l)| l / cj)
                    .fold(f64::INFINITY, f64::min);
                let (mut a, mut b) = (0.0, top);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mean(mid) < shifted {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                theta = a;
            }
        }
        let lambda_tilted: Vec<f64> = match &tilt_c {
            Some((c, _)) => lambda.iter().zip(c).map(|(l, cj)| l - theta * cj).collect(),
            None => lambda.clone(),
        };
        let log_scale = -lambda.iter().zip(&tau).map(|(l, t)| l * t).sum::<f64>()
            - lambda_tilted.iter().map(|l| l.ln()).sum::<f64>();
        RadialSampler {
            constraints: CompiledSet::new(set),
            tau,
            lambda_tilted,
            tilt: tilt_c.map(|(c, _)| (c, theta)),
            log_scale,
            empty,
        }
    }

    /// Draws radii into `r` and returns the importance weight, zero when the
    /// draw violates a constraint.
    fn draw<R: Rng>(&self, rng: &mut R, r: &mut [f64]) -> f64 {
        if self.empty {
            return 0.0;
        }
        let mut log_w = self.log_scale;
        let mut tilt_dot = 0.0;
        for j in 0..r.len() {
            let e = -(1.0 - rng.random::<f64>()).ln();
            let u = e / self.lambda_tilted[j];
            if let Some((c, _)) = &self.tilt {
                tilt_dot += c[j] * u;
            }
            r[j] = (-(self.tau[j] + u)).exp();
        }
        if let Some((_, theta)) = &self.tilt {
            log_w -= theta * tilt_dot;
        }
        if !self.constraints.holds_radial(r) {
            return 0.0;
        }
        log_w.exp()
    }
}

/// The positive Bergman operator of the polydisc applied to `ρ_α·1_F`.
#[derive(Clone, Debug)]
pub struct PositiveProjection {
    alpha: Vec<f64>,
    set: ReinhardtAngularSet,
    sampler: RadialSampler,
}

impl PositiveProjection {
    pub fn new(alpha: &[f64], set: &ReinhardtAngularSet) -> Result<Self, EstimatorError> {
        if alpha.len() != set.dimension {
            return Err(MeasureError::Dimension {
                expected: set.dimension,
                got: alpha.len(),
            }
            .into());
        }
        if alpha.iter().any(|&a| !(a >= 0.0)) {
            return Err(EstimatorError::Range("weight exponents must be nonnegative".into()));
        }
        Ok(PositiveProjection {
            alpha: alpha.to_vec(),
            set: set.clone(),
            sampler: RadialSampler::new(alpha, set),
        })
    }

    /// Unbiased single-draw estimate of `P⁺(ρ_α·1_F)(z)`.
    fn draw<R: Rng>(&self, z: &[Complex64], x: &[f64], rng: &mut R, r: &mut [f64], theta: &mut [f64]) -> f64 {
        let w = self.sampler.draw(rng, r);
        if w == 0.0 {
            return 0.0;
        }
        if self.set.is_radial() {
            // Angular average of |K| in closed form.
            let k: f64 = x
                .iter()
                .zip(r.iter())
                .map(|(a, b)| 2.0 / (1.0 - a * a * b * b))
                .product();
            return w * k;
        }
        for t in theta.iter_mut() {
            *t = 2.0 * PI * rng.random::<f64>();
        }
        if !self.sampler.constraints.holds_angular(theta) {
            return 0.0;
        }
        let k: f64 = z
            .iter()
            .zip(r.iter().zip(theta.iter()))
            .map(|(zj, (rj, tj))| {
                let d = Complex64::new(1.0, 0.0) - zj * Complex64::from_polar(*rj, -tj);
                2.0 / d.norm_sqr()
            })
            .product();
        w * k
    }

    /// Average of `inner` draws at `z`.
    pub fn estimate_at<R: Rng>(&self, z: &[Complex64], inner: usize, rng: &mut R) -> f64 {
        let n = z.len();
        let x = radii(z);
        let mut r = vec![0.0; n];
        let mut theta = vec![0.0; n];
        let sum: f64 = (0..inner)
            .map(|_| self.draw(z, &x, rng, &mut r, &mut theta))
            .sum();
        sum / inner as f64
    }

    /// `‖P⁺(ρ_α·1_F)‖_p^p` by nested Monte Carlo: uniform outer points,
    /// `⌈√outer⌉` inner draws each.
    pub fn norm_power(&self, p: f64, samples: u64, seed: u64) -> Result<EstimateResult, EstimatorError> {
        let n = self.alpha.len();
        let inner = ((samples as f64).sqrt().ceil() as usize).max(16);
        let vol = PI.powi(n as i32);
        let (m, values) = sample_polydisc(n, samples, seed, |z, rng| {
            vol * self.estimate_at(z, inner, rng).powf(p)
        });
        check_tail(values)?;
        Ok(EstimateResult::monte_carlo(&m, seed))
    }
}

/// `∫_F ρ_{2α}·(−log ρ_α)^η dV` (or `∫_F ρ_α dV` with `single`), exact up to quadrature.
fn weighted_set_integral(alpha: &[f64], set: &ReinhardtAngularSet, double: bool, eta: f64) -> Result<f64, EstimatorError> {
    let n = alpha.len();
    let k = if double { 2.0 } else { 1.0 };
    let d: Vec<f64> = alpha.iter().map(|a| k * a + 1.0).collect();
    let log_weight = |r: &[f64]| -> f64 { (-rho_radii(alpha, r).ln()).max(0.0).powf(eta) };
    let weight: Option<crate::measure::RadialWeight<'_>> = if eta != 0.0 { Some(&log_weight) } else { None };
    let radial = radial_integral(&d, &set.radial, weight, Tolerance::default())?;
    let angular = if set.is_radial() { 1.0 } else { 0.5 };
    Ok((2.0 * PI).powi(n as i32) * angular * radial)
}

/// One member of a family of sets; `k` is the family parameter used in trend fits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyMember {
    pub label: String,
    pub k: f64,
    pub set: ReinhardtAngularSet,
}

/// `{ρ_c < 2^{−k}}` for each `k`.
pub fn dyadic_family(c: &ExponentVector, ks: &[u32]) -> Vec<FamilyMember> {
    ks.iter()
        .map(|&k| FamilyMember {
            label: format!("rho<2^-{k}"),
            k: k as f64,
            set: ReinhardtAngularSet::sublevel(c.clone(), 2f64.powi(-(k as i32))),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteRow {
    pub label: String,
    pub k: f64,
    pub lhs: EstimateResult,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FamilyFit {
    /// OLS slope of `log ratio` against `k`.
    pub slope: f64,
    pub median_ratio: f64,
    pub max_ratio: f64,
}

impl FamilyFit {
    pub fn from_rows(rows: &[SuiteRow]) -> Option<Self> {
        let finite: Vec<&SuiteRow> = rows.iter().filter(|r| r.ratio.is_finite() && r.ratio > 0.0).collect();
        if finite.is_empty() {
            return None;
        }
        let mut ratios: Vec<f64> = finite.iter().map(|r| r.ratio).collect();
        ratios.sort_by(f64::total_cmp);
        let mid = ratios.len() / 2;
        let median = if ratios.len() % 2 == 1 {
            ratios[mid]
        } else {
            0.5 * (ratios[mid - 1] + ratios[mid])
        };
        let slope = if finite.len() >= 2 {
            let x: Vec<f64> = finite.iter().map(|r| r.k).collect();
            let y: Vec<f64> = finite.iter().map(|r| r.ratio.ln()).collect();
            ols(&x, &y).1
        } else {
            0.0
        };
        Some(FamilyFit {
            slope,
            median_ratio: median,
            max_ratio: ratios[ratios.len() - 1],
        })
    }

    /// No trend (`|slope| ≤ 0.1`) and every ratio within 3× the median.
    pub fn is_bounded(&self) -> bool {
        self.slope.abs() <= 0.1 && self.max_ratio <= 3.0 * self.median_ratio
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteMode {
    /// Restricted-type estimate on a monomial polyhedron, through the cover.
    Restricted,
    /// `‖P⁺(ρ_α 1_F)‖_{p*}^{p*} ≤ C ∫_F ρ_{2α}(−log ρ_α)^{(p*−1)(m−1)}`.
    Endpoint,
    /// `‖P⁺(ρ_α 1_F)‖_p^p ≤ C_p ∫_F ρ_{2α}` for `p ∈ (p*, 2]`.
    Subcritical,
    /// `∫_F ρ_α ≤ C (∫_F ρ_{2α}(−log ρ_α)^{(p*−1)(m−1)})^{1/p*}`.
    Holder,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub mode: SuiteMode,
    pub p: f64,
    #[serde(rename = "logPower")]
    pub log_power: f64,
    pub rows: Vec<SuiteRow>,
    pub fit: Option<FamilyFit>,
}

impl SuiteReport {
    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(
            format!(
                "mode {:?}, p = {}, log power = {}; label: set; k: family parameter; lhs, lhs_se: left side with standard error; rhs: right side; ratio: lhs/rhs",
                self.mode,
                fmt_f64(self.p),
                fmt_f64(self.log_power)
            ),
            &["label", "k", "lhs", "lhs_se", "rhs", "ratio"],
        );
        for r in &self.rows {
            t.push(vec![
                r.label.clone(),
                fmt_f64(r.k),
                fmt_f64(r.lhs.value),
                fmt_f64(r.lhs.standard_error),
                fmt_f64(r.rhs),
                fmt_f64(r.ratio),
            ]);
        }
        if let Some(f) = &self.fit {
            t.fit_value("slope", fmt_f64(f.slope));
            t.fit_value("median_ratio", fmt_f64(f.median_ratio));
            t.fit_value("max_ratio", fmt_f64(f.max_ratio));
        }
        t
    }
}

fn finish(mode: SuiteMode, p: f64, log_power: f64, rows: Vec<SuiteRow>) -> SuiteReport {
    let fit = FamilyFit::from_rows(&rows);
    SuiteReport {
        mode,
        p,
        log_power,
        rows,
        fit,
    }
}

/// Restricted-type ratios on `U_B`: for each image-side set `E`,
/// `lhs = ‖P⁺_{𝔻ⁿ}(ρ_{1A−1}·1_{φ⁻¹E})‖_{p*}` and
/// `rhs = ‖1_E‖_{L^{p*}((−log w)^{(m−1)(p*−1)})}`, the latter computed
/// exactly on the cover.
pub fn restricted_ratio_suite(
    analysis: &DomainAnalysis,
    sets: &[FamilyMember],
    samples: u64,
    seed: u64,
) -> Result<SuiteReport, EstimatorError> {
    if analysis.trivial {
        return Err(EstimatorError::TrivialDomain);
    }
    let p = analysis.p_star_f64();
    let eta = rational_to_f64(&analysis.log_weight_power());
    let alpha = analysis.alpha_cover.to_f64();
    let det = crate::bergman::degree_f64(analysis);
    let mut rows = Vec::with_capacity(sets.len());
    for (i, member) in sets.iter().enumerate() {
        if member.set.dimension != analysis.dim() {
            return Err(MeasureError::Dimension {
                expected: analysis.dim(),
                got: member.set.dimension,
            }
            .into());
        }
        let pulled = member.set.pullback(&analysis.a);
        let lhs = PositiveProjection::new(&alpha, &pulled)?
            .norm_power(p, samples, task_seed(seed, i as u64))?
            .root(p);
        let rhs = (det * weighted_set_integral(&alpha, &pulled, true, eta)?).powf(1.0 / p);
        rows.push(SuiteRow {
            label: member.label.clone(),
            k: member.k,
            lhs,
            rhs,
            ratio: lhs.value / rhs,
        });
    }
    Ok(finish(SuiteMode::Restricted, p, eta, rows))
}

/// `p* = (2‖α‖+2)/(‖α‖+2)` and `m(α)`.
pub fn polydisc_exponents(alpha: &ExponentVector) -> (f64, usize) {
    let (sup, m) = exponent_profile(alpha);
    ((2.0 * sup + 2.0) / (sup + 2.0), m)
}

/// Both sides of one of the polydisc inequalities for every set.
pub fn polydisc_inequality_suite(
    alpha: &ExponentVector,
    sets: &[FamilyMember],
    mode: SuiteMode,
    p: Option<f64>,
    samples: u64,
    seed: u64,
) -> Result<SuiteReport, EstimatorError> {
    require_weight_exponent(alpha)?;
    let (p_star, m) = polydisc_exponents(alpha);
    let eta = (p_star - 1.0) * (m as f64 - 1.0);
    let a = alpha.to_f64();
    let (p, log_power) = match mode {
        SuiteMode::Endpoint | SuiteMode::Holder => (p_star, eta),
        SuiteMode::Subcritical => {
            let p = p.ok_or_else(|| EstimatorError::Range("the subcritical inequality needs p".into()))?;
            if !(p > p_star && p <= 2.0) {
                return Err(EstimatorError::Range(format!(
                    "p = {p} is outside ({}, 2]",
                    fmt_f64(p_star)
                )));
            }
            (p, 0.0)
        }
        SuiteMode::Restricted => {
            return Err(EstimatorError::Range(
                "the restricted mode needs a domain; use restricted_ratio_suite".into(),
            ))
        }
    };
    let mut rows = Vec::with_capacity(sets.len());
    for (i, member) in sets.iter().enumerate() {
        let set = &member.set;
        let (lhs, rhs) = match mode {
            SuiteMode::Holder => (
                EstimateResult::exact(weighted_set_integral(&a, set, false, 0.0)?),
                weighted_set_integral(&a, set, true, eta)?.powf(1.0 / p),
            ),
            _ => (
                PositiveProjection::new(&a, set)?.norm_power(p, samples, task_seed(seed, i as u64))?,
                weighted_set_integral(&a, set, true, log_power)?,
            ),
        };
        rows.push(SuiteRow {
            label: member.label.clone(),
            k: member.k,
            lhs,
            rhs,
            ratio: lhs.value / rhs,
        });
    }
    Ok(finish(mode, p, log_power, rows))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VolumeScan {
    pub alpha: ExponentVector,
    pub rows: Vec<(f64, f64)>,
    /// Slope of `log V − (m−1)·log log(1/s)` against `log s`.
    pub s_exponent: f64,
    /// Slope of `log V − (2/‖α‖)·log s` against `log log(1/s)`.
    pub log_exponent: f64,
    pub expected_s_exponent: f64,
    pub expected_log_exponent: f64,
}

impl VolumeScan {
    /// `s`-exponent within 2% and log-exponent within 0.1 of the prediction.
    pub fn within_band(&self) -> bool {
        (self.s_exponent - self.expected_s_exponent).abs() <= 0.02 * self.expected_s_exponent
            && (self.log_exponent - self.expected_log_exponent).abs() <= 0.1
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(
            format!("alpha = {}; s: sublevel; volume: |{{rho_alpha < s}}|", self.alpha),
            &["s", "volume"],
        );
        for (s, v) in &self.rows {
            t.push(vec![fmt_f64(*s), fmt_f64(*v)]);
        }
        t.fit_value("s_exponent", fmt_f64(self.s_exponent));
        t.fit_value("log_exponent", fmt_f64(self.log_exponent));
        t.fit_value("expected_s_exponent", fmt_f64(self.expected_s_exponent));
        t.fit_value("expected_log_exponent", fmt_f64(self.expected_log_exponent));
        t
    }
}

/// Volumes of `{ρ_α < s}` on the grid and their fitted asymptotic exponents.
pub fn volume_scan(alpha: &ExponentVector, s_grid: &[f64]) -> Result<VolumeScan, EstimatorError> {
    require_weight_exponent(alpha)?;
    if s_grid.len() < 2 || s_grid.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
        return Err(EstimatorError::Range("need at least two grid points in (0, 1)".into()));
    }
    let (sup, m) = exponent_profile(alpha);
    let e = 2.0 / sup;
    let l = m as f64 - 1.0;
    let rows: Vec<(f64, f64)> = s_grid
        .par_iter()
        .map(|&s| sublevel_volume(alpha, s).map(|v| (s, v)))
        .collect::<Result<_, _>>()?;
    let ls: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let lls: Vec<f64> = rows.iter().map(|r| (1.0 / r.0).ln().ln()).collect();
    let lv: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    let y1: Vec<f64> = lv.iter().zip(&lls).map(|(v, q)| v - l * q).collect();
    let y2: Vec<f64> = lv.iter().zip(&ls).map(|(v, q)| v - e * q).collect();
    Ok(VolumeScan {
        alpha: alpha.clone(),
        s_exponent: ols(&ls, &y1).1,
        log_exponent: ols(&lls, &y2).1,
        expected_s_exponent: e,
        expected_log_exponent: l,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BlowupRow {
    pub s: f64,
    pub lambda_s: f64,
    pub superlevel_measure: EstimateResult,
    pub denominator: f64,
    pub ratio: f64,
    /// `min |h_s| / (s^{α1+2} log(1/s))` over the grid on `Π`.
    pub pi_minimum: f64,
    pub tail_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BlowupReport {
    pub rows: Vec<BlowupRow>,
    pub k_constant: f64,
    pub pi_measure: f64,
    pub p_star: f64,
    /// OLS slope of `log ratio` against `log log(1/s)`.
    pub slope: f64,
    pub intercept: f64,
    /// Ratio at the smallest `s` over ratio at the largest.
    pub growth: f64,
}

impl BlowupReport {
    /// Slope within `p*−1 ± 0.15`.
    pub fn within_band(&self) -> bool {
        (self.slope - (self.p_star - 1.0)).abs() <= 0.15
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(
            "s: set parameter; lambda_s: level; mu, mu_se: measure of {|h_s|/rho_alpha > lambda_s} with standard error; denominator: integral of rho_2alpha over F_s; ratio: lambda_s^p* mu / denominator",
            &["s", "lambda_s", "mu", "mu_se", "denominator", "ratio"],
        );
        for r in &self.rows {
            t.push(vec![
                fmt_f64(r.s),
                fmt_f64(r.lambda_s),
                fmt_f64(r.superlevel_measure.value),
                fmt_f64(r.superlevel_measure.standard_error),
                fmt_f64(r.denominator),
                fmt_f64(r.ratio),
            ]);
        }
        t.fit_value("slope", fmt_f64(self.slope));
        t.fit_value("intercept", fmt_f64(self.intercept));
        t.fit_value("K", fmt_f64(self.k_constant));
        t.fit_value("growth", fmt_f64(self.growth));
        t
    }
}

/// Points of `Π = 𝔻²_r × D`, `D` the polydisc of radius `r`: 33 points per
/// leading coordinate (origin plus 4 radii × 8 phases) and 5 per remaining one.
pub fn pi_grid(n: usize, r: f64) -> Vec<Vec<Complex64>> {
    let mut lead = vec![Complex64::new(0.0, 0.0)];
    for i in 1..=4 {
        for k in 0..8 {
            lead.push(Complex64::from_polar(r * i as f64 / 4.0, 2.0 * PI * k as f64 / 8.0));
        }
    }
    let mut rest = vec![Complex64::new(0.0, 0.0)];
    for k in 0..4 {
        rest.push(Complex64::from_polar(r, 2.0 * PI * k as f64 / 4.0));
    }
    let mut pts: Vec<Vec<Complex64>> = vec![Vec::new()];
    for j in 0..n {
        let axis = if j < 2 { &lead } else { &rest };
        pts = pts
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&w| {
                    let mut q = p.clone();
                    q.push(w);
                    q
                })
            })
            .collect();
    }
    pts
}

fn pi_minimum(series: &MonomialSeries, grid: &[Vec<Complex64>], scale: f64) -> f64 {
    grid.par_iter()
        .map(|z| series.evaluate(z).norm() / scale)
        .reduce(|| f64::INFINITY, f64::min)
}

const STRATA: usize = 16;

/// `μ{|h_s|/ρ_α > λ}` by stratified sampling in `u = |z|²` over the first
/// two coordinates, with 4× allocation for strata meeting `s² < u1 < s`.
fn superlevel_measure(
    series: &MonomialSeries,
    alpha: &[f64],
    lambda: f64,
    s: f64,
    samples: u64,
    seed: u64,
) -> EstimateResult {
    let n = alpha.len();
    let cells: Vec<(usize, usize, u64)> = {
        let weight = |i1: usize| {
            let (a, b) = (i1 as f64 / STRATA as f64, (i1 + 1) as f64 / STRATA as f64);
            if a < s && b > s * s {
                4
            } else {
                1
            }
        };
        let total: u64 = (0..STRATA).map(|i| weight(i) * STRATA as u64).sum();
        let mut cells = Vec::new();
        let mut used = 0;
        for i1 in 0..STRATA {
            for i2 in 0..STRATA {
                let k = samples * weight(i1) / total;
                used += k;
                cells.push((i1, i2, k));
            }
        }
        let mut left = samples - used;
        for c in cells.iter_mut() {
            if left == 0 {
                break;
            }
            c.2 += 1;
            left -= 1;
        }
        cells
    };
    let cell_volume = PI.powi(n as i32) / (STRATA * STRATA) as f64;
    let parts: Vec<(f64, f64)> = cells
        .par_iter()
        .enumerate()
        .map(|(idx, &(i1, i2, count))| {
            if count == 0 {
                return (0.0, 0.0);
            }
            let mut rng = stream_rng(seed, idx as u64);
            let mut z = vec![Complex64::new(0.0, 0.0); n];
            let mut hits = 0u64;
            for _ in 0..count {
                polydisc_point(&mut rng, &mut z);
                for (j, i) in [(0, i1), (1, i2)] {
                    let u = (i as f64 + rng.random::<f64>()) / STRATA as f64;
                    z[j] = Complex64::from_polar(u.sqrt(), z[j].arg());
                }
                let rho = rho_radii(alpha, &radii(&z));
                if series.evaluate(&z).norm() > lambda * rho {
                    hits += 1;
                }
            }
            let f = hits as f64 / count as f64;
            (cell_volume * f, cell_volume * cell_volume * f * (1.0 - f) / count as f64)
        })
        .collect();
    let value: f64 = parts.iter().map(|p| p.0).sum();
    let var: f64 = parts.iter().map(|p| p.1).sum();
    EstimateResult {
        value,
        standard_error: var.sqrt(),
        samples,
        seed,
        method: Method::MonteCarlo,
    }
}

/// Ratios `λ_s^{p*}·μ{|h_s|/ρ_α > λ_s} / ∫_{F_s} ρ_{2α}` over a decreasing
/// `s` grid, with `K` fitted on `Π` at the largest `s`.
pub fn blowup_experiment(
    analysis: &DomainAnalysis,
    b: &ExponentVector,
    s_grid: &[f64],
    truncation: u32,
    samples: u64,
    seed: u64,
) -> Result<BlowupReport, EstimatorError> {
    let spec = CounterexampleSpec::new(analysis, b)?;
    if s_grid.len() < 2 {
        return Err(EstimatorError::Range("the s grid needs at least two points".into()));
    }
    if s_grid.iter().any(|&s| !(s > 0.0 && s <= S0)) {
        return Err(EstimatorError::Range(format!("grid points must lie in (0, {S0}]")));
    }
    if s_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(EstimatorError::Range("the s grid must be strictly decreasing".into()));
    }
    let n = spec.dim();
    let p_star = analysis.p_star_f64();
    let alpha: Vec<f64> = spec.alpha.iter().map(|&a| a as f64).collect();
    let a1 = spec.alpha[0] as i32;
    let scale = |s: f64| s.powi(a1 + 2) * (1.0 / s).ln();
    let grid = pi_grid(n, PI_BOX_RADIUS);
    let s_max = s_grid[0];
    let k_constant = pi_minimum(&spec.series(s_max, truncation)?, &grid, scale(s_max));
    let level = 0.25f64.powi(spec.b[1] as i32 - 1) * k_constant;
    let mut rows = Vec::with_capacity(s_grid.len());
    for (i, &s) in s_grid.iter().enumerate() {
        let series = spec.series(s, truncation)?;
        let lambda_s = level * scale(s);
        let tail_bound = series.certify(PI_BOX_RADIUS, 1e-6 * lambda_s)?;
        let mu = superlevel_measure(&series, &alpha, lambda_s, s, samples, task_seed(seed, i as u64));
        let d: Vec<i64> = spec.alpha.iter().map(|a| 2 * a + 1).collect();
        let denominator = (2.0 * PI).powi(n as i32) / 2.0 * region_integral_as(&ExponentVector::from_integers(&d), s)?;
        rows.push(BlowupRow {
            s,
            lambda_s,
            ratio: lambda_s.powf(p_star) * mu.value / denominator,
            superlevel_measure: mu,
            denominator,
            pi_minimum: pi_minimum(&series, &grid, scale(s)),
            tail_bound,
        });
    }
    let last = rows.last().expect("nonempty grid");
    let mu = last.superlevel_measure;
    let relative = if mu.value > 0.0 {
        1.96 * mu.standard_error / mu.value
    } else {
        f64::INFINITY
    };
    if relative > 0.3 {
        return Err(EstimatorError::NonConvergent { s: last.s, relative });
    }
    let x: Vec<f64> = rows.iter().map(|r| (1.0 / r.s).ln().ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.ratio.ln()).collect();
    let (intercept, slope) = ols(&x, &y);
    let growth = rows[rows.len() - 1].ratio / rows[0].ratio;
    Ok(BlowupReport {
        rows,
        k_constant,
        pi_measure: (PI * PI_BOX_RADIUS * PI_BOX_RADIUS).powi(n as i32),
        p_star,
        slope,
        intercept,
        growth,
    })
}

/// Dyadic grid `2^{−k}` for `k` in `from..=to`.
pub fn dyadic_grid(from: u32, to: u32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-(k as i32))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{analyze_domain, IntegerMatrix};

    fn hartogs() -> DomainAnalysis {
        analyze_domain(&IntegerMatrix::from_i64(&[vec![1, -1], vec![0, 1]]).unwrap()).unwrap()
    }

    fn triangle() -> ReinhardtAngularSet {
        ReinhardtAngularSet::sublevel(ExponentVector::from_integers(&[1, -1]), 1.0)
    }

    #[test]
    fn lp_norm_examples() {
        let bidisc = ReinhardtAngularSet::full(2);
        let r = lp_norm(|_| 1.0, &bidisc, 2.0, &Weight::none(2), 100_000, 1).unwrap();
        assert!((r.value - PI).abs() < 1e-12);
        let r = lp_norm(|_| 1.0, &triangle(), 2.0, &Weight::target(&hartogs(), 2.0), 200_000, 2).unwrap();
        let want = (PI * PI / 2.0).sqrt();
        assert!((r.value - want).abs() < 3.0 * r.standard_error, "{r:?}");
        let r = lp_norm(|_| 0.0, &bidisc, 3.0, &Weight::none(2), 1000, 3).unwrap();
        assert_eq!((r.value, r.standard_error), (0.0, 0.0));
    }

    #[test]
    fn heavy_tails_are_flagged() {
        let disc = ReinhardtAngularSet::full(1);
        let r = lp_norm(|z| z[0].norm().powf(-0.999), &disc, 2.0, &Weight::none(1), 100_000, 4);
        assert!(matches!(r, Err(EstimatorError::NonIntegrable { .. })));
    }

    #[test]
    fn weak_quasinorm_of_indicators_and_constants() {
        let set = ReinhardtAngularSet::polyradius_box(&[0.5, 0.8]);
        let q = weak_quasinorm(|_| 1.0, &set, 1.5, 200_000, 5).unwrap();
        let vol = PI * PI * 0.25 * 0.64;
        assert!((q.value - vol.powf(1.0 / 1.5)).abs() < 3.0 * q.standard_error);
        let q = weak_quasinorm(|_| 2.5, &ReinhardtAngularSet::full(2), 2.0, 1000, 6).unwrap();
        assert!((q.value - 2.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn weak_is_dominated_by_strong() {
        let set = ReinhardtAngularSet::full(2);
        let f = |z: &[Complex64]| 1.0 / (0.05 + (z[0] * z[1]).norm());
        let q = weak_quasinorm(f, &set, 2.0, 100_000, 7).unwrap();
        let l = lp_norm(f, &set, 2.0, &Weight::none(2), 100_000, 7).unwrap();
        let se = (q.standard_error.powi(2) + l.standard_error.powi(2)).sqrt();
        assert!(q.value <= l.value + 3.0 * se);
    }

    #[test]
    fn grid_refinement_never_decreases() {
        let set = ReinhardtAngularSet::full(2);
        let f = |z: &[Complex64]| (z[0].re + 2.0 * z[1].im).abs();
        let v: Vec<f64> = [64, 127, 253]
            .iter()
            .map(|&g| weak_quasinorm_grid(f, &set, 2.0, 20_000, 8, g).unwrap().value)
            .collect();
        assert!(v[0] <= v[1] && v[1] <= v[2]);
    }

    #[test]
    fn positive_projection_of_constants() {
        // P⁺1(z) = ∏ −log(1−|z_j|²)/|z_j|².
        let p = PositiveProjection::new(&[0.0, 0.0], &ReinhardtAngularSet::full(2)).unwrap();
        let z = [Complex64::new(0.3, 0.4), Complex64::new(-0.2, 0.1)];
        let mut rng = stream_rng(9, 0);
        let est = p.estimate_at(&z, 400_000, &mut rng);
        let want: f64 = z.iter().map(|w| -(1.0 - w.norm_sqr()).ln() / w.norm_sqr()).product();
        assert!((est - want).abs() < 5e-3 * want, "{est} vs {want}");
    }

    #[test]
    fn tilted_sampler_is_unbiased() {
        let alpha = [1.0, 1.0, 0.0];
        let set = ReinhardtAngularSet::sublevel(ExponentVector::from_integers(&[1, 1, 0]), 2f64.powi(-8));
        let p = PositiveProjection::new(&alpha, &set).unwrap();
        let z = [Complex64::new(0.0, 0.0); 3];
        let mut rng = stream_rng(10, 0);
        let est = p.estimate_at(&z, 4_000_000, &mut rng);
        let exact = 8.0 * radial_integral(&[2.0, 2.0, 1.0], &set.radial, None, Tolerance::default()).unwrap();
        assert!((est - exact).abs() < 1e-2 * exact, "{est} vs {exact}");
    }

    #[test]
    fn angular_sets_use_the_full_kernel() {
        // F = {sin θ1 ≥ 0}: the angular average at z = 0 halves P⁺1(0) = 1.
        let set = ReinhardtAngularSet::new(1, vec![], Some(vec![1])).unwrap();
        let p = PositiveProjection::new(&[0.0], &set).unwrap();
        let mut rng = stream_rng(11, 0);
        let est = p.estimate_at(&[Complex64::new(0.0, 0.0)], 200_000, &mut rng);
        assert!((est - 0.5).abs() < 1e-2);
    }

    #[test]
    fn subcritical_range_is_checked() {
        let alpha = ExponentVector::from_integers(&[1, 1, 0]);
        let sets = dyadic_family(&alpha, &[2]);
        let r = polydisc_inequality_suite(&alpha, &sets, SuiteMode::Subcritical, Some(1.2), 100, 1);
        assert!(matches!(r, Err(EstimatorError::Range(_))));
        let (p, m) = polydisc_exponents(&alpha);
        assert!((p - 4.0 / 3.0).abs() < 1e-15 && m == 2);
    }

    #[test]
    fn trivial_domains_are_rejected() {
        let id = analyze_domain(&IntegerMatrix::identity(2)).unwrap();
        assert!(matches!(
            restricted_ratio_suite(&id, &[], 10, 1),
            Err(EstimatorError::TrivialDomain)
        ));
    }

    #[test]
    fn holder_suite_is_exact() {
        let alpha = ExponentVector::from_integers(&[1, 1]);
        let sets = dyadic_family(&alpha, &[2, 3]);
        let a = polydisc_inequality_suite(&alpha, &sets, SuiteMode::Holder, None, 0, 0).unwrap();
        // ∫_{𝔻²} ρ_(1,1) = (2π/3)².
        let full = vec![FamilyMember {
            label: "full".into(),
            k: 0.0,
            set: ReinhardtAngularSet::full(2),
        }];
        let b = polydisc_inequality_suite(&alpha, &full, SuiteMode::Holder, None, 0, 0).unwrap();
        assert!((b.rows[0].lhs.value - (2.0 * PI / 3.0).powi(2)).abs() < 1e-9);
        assert!(a.rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
    }

    #[test]
    fn pi_grid_shape() {
        let g = pi_grid(3, 0.125);
        assert_eq!(g.len(), 33 * 33 * 5);
        assert!(g.iter().all(|z| z.iter().all(|w| w.norm() <= 0.125 + 1e-15)));
    }
}
