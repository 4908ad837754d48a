//! Bergman projections on the polydisc, the monomial covering map
//! `φ(z) = z^A`, and the counterexample series `h_s`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::exact::rational_to_f64;
use crate::exponent::ExponentVector;
use crate::lattice::{is_gamma_invariant, DomainAnalysis, IntegerMatrix};
use crate::measure::{
    angular_character_integral, radial_integral, region_integral_as, region_integral_as_f64,
    MeasureError, RadialConstraint, ReinhardtAngularSet,
};
use crate::quadrature::Tolerance;
use crate::report::{fmt_f64, CsvTable};
use crate::sampling::stream_rng;

/// Default truncation degree per dimension for counterexample runs.
pub const DEFAULT_TRUNCATION: u32 = 48;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("truncation degree {degree} cannot reach tolerance {tolerance:e}: certified tail bound is {bound:e}")]
    TruncationTooSmall {
        degree: u32,
        bound: f64,
        tolerance: f64,
    },
    #[error("hypotheses not satisfied: {0}")]
    HypothesisViolated(String),
    #[error("unsupported set: {0}")]
    UnsupportedSet(String),
    #[error("range error: {0}")]
    Range(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientMethod {
    Exact,
    Quadrature,
    MonteCarlo,
}

/// Sparse truncated power series `Σ a_γ z^γ` on the unit polydisc.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialSeries {
    dimension: usize,
    truncation_degree: u32,
    terms: BTreeMap<Vec<i64>, Complex64>,
    /// Bound `M` with `|a_γ| ≤ M·∏ 2(γ_j+1)/(γ_j+2)` for every `γ`, stored or not.
    sup_bound: f64,
    method: CoefficientMethod,
}

impl MonomialSeries {
    pub fn new(dimension: usize, truncation_degree: u32) -> Self {
        MonomialSeries {
            dimension,
            truncation_degree,
            terms: BTreeMap::new(),
            sup_bound: f64::INFINITY,
            method: CoefficientMethod::Exact,
        }
    }

    pub fn with_sup_bound(mut self, bound: f64) -> Self {
        self.sup_bound = bound;
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn truncation_degree(&self) -> u32 {
        self.truncation_degree
    }

    pub fn method(&self) -> CoefficientMethod {
        self.method
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// Adds `c` to the coefficient of `z^γ`. Panics if `γ` is negative or
    /// beyond the truncation degree.
    pub fn add_term(&mut self, gamma: Vec<i64>, c: Complex64) {
        assert_eq!(gamma.len(), self.dimension, "dimension mismatch");
        assert!(
            gamma.iter().all(|&g| g >= 0 && g <= self.truncation_degree as i64),
            "index {gamma:?} outside the truncation box"
        );
        *self.terms.entry(gamma).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn coefficient(&self, gamma: &[i64]) -> Complex64 {
        self.terms
            .get(gamma)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ a_γ z^γ` over the stored terms, from per-coordinate power tables.
    pub fn evaluate(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.dimension, "dimension mismatch");
        let top = self
            .terms
            .keys()
            .flat_map(|g| g.iter().copied())
            .max()
            .unwrap_or(0) as usize;
        let powers: Vec<Vec<Complex64>> = z
            .iter()
            .map(|&w| {
                let mut p = Vec::with_capacity(top + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..=top {
                    p.push(acc);
                    acc *= w;
                }
                p
            })
            .collect();
        self.terms
            .iter()
            .map(|(g, c)| {
                g.iter()
                    .enumerate()
                    .fold(*c, |acc, (j, &k)| acc * powers[j][k as usize])
            })
            .sum()
    }

    /// Certified bound on `|Σ_{γ ∉ box} a_γ z^γ|` for `max |z_j| ≤ radius`,
    /// from `|a_γ| ≤ 2ⁿ·M`.
    pub fn tail_bound(&self, radius: f64) -> f64 {
        if !(0.0..1.0).contains(&radius) {
            return f64::INFINITY;
        }
        let n = self.dimension as i32;
        let t = self.truncation_degree as i32;
        let full = (1.0 / (1.0 - radius)).powi(n);
        // 1 − (1 − r^{T+1})ⁿ without cancellation
        let outside = -(n as f64 * (-radius.powi(t + 1)).ln_1p()).exp_m1();
        2f64.powi(n) * self.sup_bound * full * outside
    }

    /// Returns the tail bound on the polydisc of the given radius, or
    /// `TruncationTooSmall` if it exceeds `tolerance`.
    pub fn certify(&self, radius: f64, tolerance: f64) -> Result<f64, EngineError> {
        let bound = self.tail_bound(radius);
        if bound > tolerance {
            Err(EngineError::TruncationTooSmall {
                degree: self.truncation_degree,
                bound,
                tolerance,
            })
        } else {
            Ok(bound)
        }
    }

    pub fn to_csv(&self) -> CsvTable {
        let n = self.dimension;
        let mut header: Vec<String> = (1..=n).map(|j| format!("gamma_{j}")).collect();
        header.extend(["re", "im", "abs"].map(String::from));
        let header_ref: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        let mut t = CsvTable::new(
            format!(
                "gamma_j: multi-index; re, im, abs: coefficient of z^gamma; truncation degree {}; method {:?}",
                self.truncation_degree, self.method
            ),
            &header_ref,
        );
        for (g, c) in &self.terms {
            let mut row: Vec<String> = g.iter().map(|v| v.to_string()).collect();
            row.push(fmt_f64(c.re));
            row.push(fmt_f64(c.im));
            row.push(fmt_f64(c.norm()));
            t.push(row);
        }
        t
    }
}

impl Serialize for MonomialSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Row<'a> {
            gamma: &'a [i64],
            coefficient: [f64; 2],
        }
        let rows: Vec<Row<'_>> = self
            .terms
            .iter()
            .map(|(g, c)| Row {
                gamma: g,
                coefficient: [c.re, c.im],
            })
            .collect();
        let mut st = serializer.serialize_struct("MonomialSeries", 4)?;
        st.serialize_field("dimension", &self.dimension)?;
        st.serialize_field("truncationDegree", &self.truncation_degree)?;
        st.serialize_field("method", &self.method)?;
        st.serialize_field("terms", &rows)?;
        st.end()
    }
}

/// Bergman kernel of the unit polydisc, `∏ 1/(π(1 − z_j w̄_j)²)`.
pub fn polydisc_kernel(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter()
        .zip(w)
        .map(|(a, b)| {
            let d = Complex64::new(1.0, 0.0) - a * b.conj();
            1.0 / (PI * d * d)
        })
        .product()
}

/// `|K(z, w)|` without forming the complex product.
pub fn polydisc_kernel_abs(z: &[Complex64], w: &[Complex64]) -> f64 {
    z.iter()
        .zip(w)
        .map(|(a, b)| 1.0 / (PI * (Complex64::new(1.0, 0.0) - a * b.conj()).norm_sqr()))
        .product()
}

/// The branched cover `φ(z) = z^A`: `φ(z)_j = ∏_k z_k^{A_jk}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoveringMap {
    pub a: IntegerMatrix,
    a_rows: Vec<Vec<i64>>,
    c_rows: Vec<Vec<f64>>,
    pub alpha_cover: Vec<i64>,
    pub det_a: i64,
    pub degree: u64,
}

impl CoveringMap {
    pub fn new(analysis: &DomainAnalysis) -> Self {
        let det_a = analysis.det_a().to_i64().expect("det A fits in i64");
        CoveringMap {
            a: analysis.a.clone(),
            a_rows: analysis.a.to_i64_rows(),
            c_rows: analysis.c.to_f64_rows(),
            alpha_cover: analysis
                .alpha_cover
                .to_integers()
                .expect("alphaCover is integral"),
            det_a,
            degree: det_a.unsigned_abs(),
        }
    }

    pub fn dim(&self) -> usize {
        self.a_rows.len()
    }

    pub fn apply(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.a_rows.iter().map(|row| monomial(z, row)).collect()
    }

    /// `det φ′(z) = det A · z^{1A−1}`.
    pub fn det_phi_prime(&self, z: &[Complex64]) -> Complex64 {
        monomial(z, &self.alpha_cover) * self.det_a as f64
    }

    /// Deck transformation `σ_ν(z)_j = e^{2πi c^j·ν} z_j`, `c^j` the rows of `A⁻¹`.
    pub fn deck(&self, nu: &[i64], z: &[Complex64]) -> Vec<Complex64> {
        self.c_rows
            .iter()
            .zip(z)
            .map(|(row, &zj)| {
                let phase: f64 = row.iter().zip(nu).map(|(c, &v)| c * v as f64).sum();
                zj * Complex64::from_polar(1.0, 2.0 * PI * phase.fract())
            })
            .collect()
    }
}

/// `z^γ` for a nonnegative integer multi-index.
pub fn monomial(z: &[Complex64], gamma: &[i64]) -> Complex64 {
    z.iter()
        .zip(gamma)
        .fold(Complex64::new(1.0, 0.0), |acc, (w, &k)| acc * w.powi(k as i32))
}

/// `det φ′` of the covering map of an analysis.
pub fn det_phi_prime(map: &CoveringMap, z: &[Complex64]) -> Complex64 {
    map.det_phi_prime(z)
}

/// One term `c · z^μ · conj(z)^ν · ρ_a(z)` of a density.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityTerm {
    pub coeff: Complex64,
    pub mu: Vec<i64>,
    pub nu: Vec<i64>,
    pub rho: Vec<f64>,
}

/// Finite sum of [`DensityTerm`]s, the functions whose projections against
/// an indicator are computed in closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    pub dimension: usize,
    pub terms: Vec<DensityTerm>,
}

impl Density {
    /// `ρ_α`.
    pub fn modulus(alpha: &ExponentVector) -> Self {
        let n = alpha.len();
        Density {
            dimension: n,
            terms: vec![DensityTerm {
                coeff: Complex64::new(1.0, 0.0),
                mu: vec![0; n],
                nu: vec![0; n],
                rho: alpha.to_f64(),
            }],
        }
    }

    /// `c · z^μ`.
    pub fn monomial(mu: &[i64], coeff: Complex64) -> Self {
        let n = mu.len();
        Density {
            dimension: n,
            terms: vec![DensityTerm {
                coeff,
                mu: mu.to_vec(),
                nu: vec![0; n],
                rho: vec![0.0; n],
            }],
        }
    }

    /// `conj(z)^ν`.
    pub fn antiholomorphic(nu: &[i64]) -> Self {
        let n = nu.len();
        Density {
            dimension: n,
            terms: vec![DensityTerm {
                coeff: Complex64::new(1.0, 0.0),
                mu: vec![0; n],
                nu: nu.to_vec(),
                rho: vec![0.0; n],
            }],
        }
    }

    /// Holomorphic polynomial `Σ c_μ z^μ`.
    pub fn polynomial(n: usize, terms: &[(Vec<i64>, Complex64)]) -> Self {
        Density {
            dimension: n,
            terms: terms
                .iter()
                .map(|(mu, c)| DensityTerm {
                    coeff: *c,
                    mu: mu.clone(),
                    nu: vec![0; n],
                    rho: vec![0.0; n],
                })
                .collect(),
        }
    }

    pub fn evaluate(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                let modulus: f64 = t
                    .rho
                    .iter()
                    .zip(z)
                    .filter(|(a, _)| **a != 0.0)
                    .map(|(a, w)| w.norm().powf(*a))
                    .product();
                t.coeff * monomial(z, &t.mu) * monomial(z, &t.nu).conj() * modulus
            })
            .sum()
    }

    /// Supremum bound on the unit polydisc.
    pub fn sup_bound(&self) -> f64 {
        let ok = self.terms.iter().all(|t| {
            t.rho.iter().all(|&a| a >= 0.0)
                && t.mu.iter().all(|&k| k >= 0)
                && t.nu.iter().all(|&k| k >= 0)
        });
        if ok {
            self.terms.iter().map(|t| t.coeff.norm()).sum()
        } else {
            f64::INFINITY
        }
    }

    fn validate(&self) -> Result<(), EngineError> {
        for t in &self.terms {
            if t.mu.len() != self.dimension || t.nu.len() != self.dimension || t.rho.len() != self.dimension {
                return Err(EngineError::Measure(MeasureError::Dimension {
                    expected: self.dimension,
                    got: t.mu.len(),
                }));
            }
            if t.mu.iter().chain(&t.nu).any(|&k| k < 0) {
                return Err(EngineError::Range("density multi-indices must be nonnegative".into()));
            }
            if t.rho.iter().any(|&a| a < 0.0 || !a.is_finite()) {
                return Err(EngineError::Range("weight exponents must be nonnegative".into()));
            }
        }
        Ok(())
    }
}

/// Candidate indices `γ = μ − ν + m·κ₀` with `m = 0` or odd, inside the box.
fn candidate_indices(term: &DensityTerm, kappa0: Option<&[i64]>, truncation: u32) -> Vec<Vec<i64>> {
    let base: Vec<i64> = term.mu.iter().zip(&term.nu).map(|(a, b)| a - b).collect();
    let t = truncation as i64;
    let inside = |g: &[i64]| g.iter().all(|&x| (0..=t).contains(&x));
    match kappa0 {
        None => {
            if inside(&base) {
                vec![base]
            } else {
                Vec::new()
            }
        }
        Some(k0) => {
            let reach = k0
                .iter()
                .zip(&base)
                .filter(|(k, _)| **k != 0)
                .map(|(k, b)| (t + b.abs()) / k.abs())
                .min()
                .unwrap_or(0);
            (-reach..=reach)
                .filter(|m| m % 2 != 0 || *m == 0)
                .map(|m| base.iter().zip(k0).map(|(b, k)| b + m * k).collect::<Vec<i64>>())
                .filter(|g| inside(g))
                .collect()
        }
    }
}

fn radial_factor(
    d: &[f64],
    set: &ReinhardtAngularSet,
    seed: u64,
) -> Result<(f64, CoefficientMethod), EngineError> {
    if let Some(s) = set.region_parameter() {
        return Ok((region_integral_as_f64(d, s)?, CoefficientMethod::Exact));
    }
    match radial_integral(d, &set.radial, None, Tolerance::default()) {
        Ok(v) => Ok((v, CoefficientMethod::Quadrature)),
        Err(MeasureError::Quadrature(_)) => Ok((
            radial_monte_carlo(d, &set.radial, 1 << 20, seed),
            CoefficientMethod::MonteCarlo,
        )),
        Err(e) => Err(e.into()),
    }
}

/// Plain Monte Carlo fallback for `∫ r^d dr` over the constrained cube.
fn radial_monte_carlo(d: &[f64], cons: &[RadialConstraint], samples: u64, seed: u64) -> f64 {
    let parts = crate::sampling::chunked(samples, seed, |rng, count| {
        let mut r = vec![0.0; d.len()];
        let mut acc = 0.0;
        for _ in 0..count {
            for x in r.iter_mut() {
                *x = rng.random::<f64>();
            }
            if cons.iter().all(|c| c.holds(&r)) {
                acc += r.iter().zip(d).map(|(x, e)| x.powf(*e)).product::<f64>();
            }
        }
        acc
    });
    parts.iter().sum::<f64>() / samples as f64
}

fn index_seed(gamma: &[i64]) -> u64 {
    let mut rng = stream_rng(0x5eed, gamma.len() as u64);
    gamma.iter().fold(rng.random::<u64>(), |h, &g| {
        h.rotate_left(13) ^ (g as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
    })
}

/// `P_{𝔻ⁿ}(g · 1_F)` truncated at `truncation`, for a density `g`:
/// `a_γ = ((γ+1)^1/πⁿ)·⟨g·1_F, z^γ⟩`, each inner product split into a
/// radial integral over the radial part of `F` and an angular integral.
pub fn project_density(
    density: &Density,
    set: &ReinhardtAngularSet,
    truncation: u32,
) -> Result<MonomialSeries, EngineError> {
    let n = density.dimension;
    if set.dimension != n {
        return Err(EngineError::Measure(MeasureError::Dimension {
            expected: n,
            got: set.dimension,
        }));
    }
    density.validate()?;
    let kappa0 = set.angular.as_ref().map(|a| a.kappa0.as_slice());
    let mut work: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for (i, term) in density.terms.iter().enumerate() {
        for g in candidate_indices(term, kappa0, truncation) {
            work.entry(g).or_default().push(i);
        }
    }
    let jobs: Vec<(Vec<i64>, Vec<usize>)> = work.into_iter().collect();
    let torus = (2.0 * PI).powi(n as i32);
    let results: Vec<Result<(Vec<i64>, Complex64, CoefficientMethod), EngineError>> = jobs
        .into_par_iter()
        .map(|(gamma, idx)| {
            let mut inner = Complex64::new(0.0, 0.0);
            let mut method = CoefficientMethod::Exact;
            for i in idx {
                let t = &density.terms[i];
                let kappa: Vec<i64> = (0..n).map(|j| t.mu[j] - t.nu[j] - gamma[j]).collect();
                let angular = match kappa0 {
                    None if kappa.iter().all(|&k| k == 0) => Complex64::new(torus, 0.0),
                    None => continue,
                    Some(k0) => angular_character_integral(&kappa, k0)?,
                };
                if angular == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let d: Vec<f64> = (0..n)
                    .map(|j| (t.mu[j] + t.nu[j] + gamma[j]) as f64 + t.rho[j] + 1.0)
                    .collect();
                let (radial, m) = radial_factor(&d, set, index_seed(&gamma))?;
                method = method.max_rank(m);
                inner += t.coeff * angular * radial;
            }
            let norm: f64 = gamma.iter().map(|&g| (g as f64 + 1.0) / PI).product();
            Ok((gamma, inner * norm, method))
        })
        .collect();
    let mut series = MonomialSeries::new(n, truncation).with_sup_bound(density.sup_bound());
    for r in results {
        let (gamma, c, m) = r?;
        series.method = series.method.max_rank(m);
        if c != Complex64::new(0.0, 0.0) {
            series.add_term(gamma, c);
        }
    }
    Ok(series)
}

impl CoefficientMethod {
    fn rank(self) -> u8 {
        match self {
            CoefficientMethod::Exact => 0,
            CoefficientMethod::Quadrature => 1,
            CoefficientMethod::MonteCarlo => 2,
        }
    }

    fn max_rank(self, other: Self) -> Self {
        if other.rank() > self.rank() {
            other
        } else {
            self
        }
    }
}

/// `P_{𝔻ⁿ}(ρ_α · 1_F)` truncated at `truncation`.
pub fn project_weighted_indicator(
    alpha: &ExponentVector,
    set: &ReinhardtAngularSet,
    truncation: u32,
) -> Result<MonomialSeries, EngineError> {
    if !alpha.is_nonnegative() {
        return Err(EngineError::Range(format!("weight exponent {alpha} has a negative entry")));
    }
    project_density(&Density::modulus(alpha), set, truncation)
}

/// Data of a domain and monomial satisfying the hypotheses of the
/// counterexample construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleSpec {
    pub alpha: Vec<i64>,
    pub b: Vec<i64>,
    pub kappa0: Vec<i64>,
    pub det_a: i64,
    #[serde(skip)]
    analysis: DomainAnalysis,
}

impl CounterexampleSpec {
    /// Checks: nontrivial domain, `m ≥ 2`, `α1 = α2 = max α` with
    /// `α = 1A − 1`, `b` integral and Γ-invariant with `b1 = b2 = 1`, `b ⪰ 1`.
    pub fn new(analysis: &DomainAnalysis, b: &ExponentVector) -> Result<Self, EngineError> {
        let bad = |msg: String| Err(EngineError::HypothesisViolated(msg));
        let n = analysis.dim();
        if analysis.trivial {
            return bad("the domain is the polydisc".into());
        }
        if analysis.m < 2 {
            return bad(format!("m = {} but at least 2 is required", analysis.m));
        }
        let alpha = analysis.alpha_cover.to_integers().expect("integral");
        let top = *alpha.iter().max().expect("n >= 2");
        if alpha[0] != top || alpha[1] != top {
            return bad(format!(
                "coordinates must be ordered so that alpha_1 = alpha_2 = max alpha; alpha = {:?}",
                alpha
            ));
        }
        if b.len() != n {
            return bad(format!("b has {} entries, expected {n}", b.len()));
        }
        let bi = match b.to_integers() {
            Some(v) => v,
            None => return bad(format!("b = {b} is not an integer vector")),
        };
        if bi[0] != 1 || bi[1] != 1 {
            return bad(format!("b = {b} must have b_1 = b_2 = 1"));
        }
        if bi.iter().any(|&x| x < 1) {
            return bad(format!("b = {b} must satisfy b >= 1 entrywise"));
        }
        if !is_gamma_invariant(b, analysis) {
            return bad(format!("z^b with b = {b} is not invariant under the deck group"));
        }
        let kappa0: Vec<i64> = (0..n).map(|j| alpha[j] - bi[j] + 1).collect();
        Ok(CounterexampleSpec {
            alpha,
            b: bi,
            kappa0,
            det_a: analysis.det_a().to_i64().expect("det A fits in i64"),
            analysis: analysis.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// The set `F_s`.
    pub fn set(&self, s: f64) -> Result<ReinhardtAngularSet, EngineError> {
        Ok(ReinhardtAngularSet::counterexample_set(
            &ExponentVector::from_integers(&self.alpha),
            &ExponentVector::from_integers(&self.b),
            s,
        )?)
    }

    /// The coefficient `a_γ(s)` of `h_s = P(det φ′ · 1_{F_s})`; exactly zero
    /// off the invariant support and off the odd harmonics of `κ₀`.
    pub fn coefficient(&self, gamma: &[i64], s: f64) -> Result<Complex64, EngineError> {
        let n = self.dim();
        if !(s > 0.0 && s < 0.25) {
            return Err(EngineError::Range(format!("s = {s} is outside (0, 1/4)")));
        }
        let zero = Complex64::new(0.0, 0.0);
        if gamma.len() != n || gamma.iter().any(|&g| g < 0) {
            return Ok(zero);
        }
        let beta: Vec<i64> = gamma.iter().map(|g| g + 1).collect();
        if !is_gamma_invariant(&ExponentVector::from_integers(&beta), &self.analysis) {
            return Ok(zero);
        }
        let kappa: Vec<i64> = (0..n).map(|j| self.alpha[j] - gamma[j]).collect();
        let angular = angular_character_integral(&kappa, &self.kappa0)?;
        if angular == zero {
            return Ok(zero);
        }
        let d: Vec<i64> = (0..n).map(|j| gamma[j] + self.alpha[j] + 1).collect();
        let radial = region_integral_as(&ExponentVector::from_integers(&d), s)?;
        let norm: f64 = beta.iter().map(|&b| b as f64 / PI).product();
        Ok(angular * (norm * self.det_a as f64 * radial))
    }

    /// The truncated series of `h_s`.
    pub fn series(&self, s: f64, truncation: u32) -> Result<MonomialSeries, EngineError> {
        let n = self.dim();
        let term = DensityTerm {
            coeff: Complex64::new(self.det_a as f64, 0.0),
            mu: self.alpha.clone(),
            nu: vec![0; n],
            rho: vec![0.0; n],
        };
        let mut series = MonomialSeries::new(n, truncation).with_sup_bound(self.det_a.abs() as f64);
        for gamma in candidate_indices(&term, Some(&self.kappa0), truncation) {
            let beta: Vec<i64> = gamma.iter().map(|g| g + 1).collect();
            debug_assert!(is_gamma_invariant(
                &ExponentVector::from_integers(&beta),
                &self.analysis
            ));
            let c = self.coefficient(&gamma, s)?;
            if c != Complex64::new(0.0, 0.0) {
                series.add_term(gamma, c);
            }
        }
        Ok(series)
    }

    /// `|a_{b−1}(s)| / (s^{α1+2} log(1/s))`, which does not depend on `s`.
    pub fn leading_constant(&self) -> f64 {
        let s: f64 = 1.0 / 16.0;
        let gamma: Vec<i64> = self.b.iter().map(|v| v - 1).collect();
        let a = self.coefficient(&gamma, s).expect("s is in range");
        a.norm() / (s.powi(self.alpha[0] as i32 + 2) * (1.0 / s).ln())
    }
}

/// Series of `h_s` for the given domain and invariant monomial `z^b`.
pub fn counterexample_series(
    analysis: &DomainAnalysis,
    b: &ExponentVector,
    s: f64,
    truncation: u32,
) -> Result<MonomialSeries, EngineError> {
    CounterexampleSpec::new(analysis, b)?.series(s, truncation)
}

pub fn evaluate_series(series: &MonomialSeries, z: &[Complex64]) -> Complex64 {
    series.evaluate(z)
}

/// Both sides of `(P_U(1_E)∘φ)·det φ′ = P_{𝔻ⁿ}(det φ′ · 1_{φ⁻¹E})` at `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct BellCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// `|E|/|U_B|`, the constant value of `P_U(1_E)`.
    pub image_projection: f64,
    pub series: MonomialSeries,
}

/// Volume of `U_B`, `πⁿ / (det B · ∏ (1B⁻¹)_k)`.
pub fn domain_volume(analysis: &DomainAnalysis) -> f64 {
    let n = analysis.dim();
    let b_inv = analysis.b.to_rational().inverse().expect("B nonsingular");
    let ones = vec![num_rational::BigRational::from_integer(1.into()); n];
    let sums = b_inv.left_mul(&ones);
    let det_b = analysis.det_b.to_f64().expect("det B fits in f64");
    PI.powi(n as i32) / (det_b * sums.iter().map(rational_to_f64).product::<f64>())
}

/// Volume of `E ∩ U_B` for a radial set `E`, computed in the coordinates
/// `y = B·t`, `t = −log|w|`, where `U_B` becomes the positive orthant.
pub fn image_volume(analysis: &DomainAnalysis, e: &ReinhardtAngularSet) -> Result<f64, EngineError> {
    if !e.is_radial() {
        return Err(EngineError::UnsupportedSet(
            "sets with an angular constraint have no Reinhardt preimage description".into(),
        ));
    }
    let n = analysis.dim();
    let b_inv = analysis.b.to_rational().inverse().expect("B nonsingular");
    let ones = vec![num_rational::BigRational::from_integer(1.into()); n];
    let lambda: Vec<f64> = b_inv
        .left_mul(&ones)
        .iter()
        .map(|q| 2.0 * rational_to_f64(q))
        .collect();
    let cons: Vec<RadialConstraint> = e
        .radial
        .iter()
        .map(|k| RadialConstraint {
            c: ExponentVector::new(b_inv.left_mul(k.c.entries())),
            bound: k.bound,
            rel: k.rel,
        })
        .collect();
    let d: Vec<f64> = lambda.iter().map(|l| l - 1.0).collect();
    let integral = radial_integral(&d, &cons, None, Tolerance::relative(1e-10))?;
    let det_b = analysis.det_b.to_f64().expect("det B fits in f64");
    Ok((2.0 * PI).powi(n as i32) / det_b * integral)
}

pub fn bell_pullback_check(
    analysis: &DomainAnalysis,
    e: &ReinhardtAngularSet,
    z: &[Complex64],
    truncation: u32,
) -> Result<BellCheck, EngineError> {
    let n = analysis.dim();
    if e.dimension != n || z.len() != n {
        return Err(EngineError::Measure(MeasureError::Dimension {
            expected: n,
            got: z.len().min(e.dimension),
        }));
    }
    if z.iter().any(|w| w.norm() >= 1.0 || w.norm() == 0.0) {
        return Err(EngineError::Range(
            "z must lie in the punctured polydisc with no zero coordinate".into(),
        ));
    }
    let map = CoveringMap::new(analysis);
    // A radial set has only the constant term in its projection.
    let image_projection = image_volume(analysis, e)? / domain_volume(analysis);
    let lhs = map.det_phi_prime(z) * image_projection;
    let density = Density::monomial(&map.alpha_cover, Complex64::new(map.det_a as f64, 0.0));
    let series = project_density(&density, &e.pullback(&analysis.a), truncation)?;
    let rhs = series.evaluate(z);
    Ok(BellCheck {
        lhs,
        rhs,
        image_projection,
        series,
    })
}

/// Whether a multi-index satisfies `γ + 1` Γ-invariant.
pub fn shifted_invariant(analysis: &DomainAnalysis, gamma: &[i64]) -> bool {
    let beta: Vec<i64> = gamma.iter().map(|g| g + 1).collect();
    is_gamma_invariant(&ExponentVector::from_integers(&beta), analysis)
}

/// `|det A|` as `f64`.
pub fn degree_f64(analysis: &DomainAnalysis) -> f64 {
    analysis.degree.abs().to_f64().unwrap_or(f64::INFINITY)
}
