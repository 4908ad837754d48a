//! Monomial weights, Reinhardt-type regions of the polydisc and their
//! integrals.
//!
//! Volumes are taken in `z`-space: each angle contributes `2π` and each
//! radius carries the polar Jacobian `r`. [`region_integral_as`] and
//! [`radial_integral`] instead integrate over the radius cube with plain
//! `dr`, so callers add the Jacobian to the exponent themselves.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponent::ExponentVector;
use crate::lattice::IntegerMatrix;
use crate::quadrature::{integrate, integrate_with_breaks, QuadratureError, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("angular direction kappa0 must be nonzero")]
    ZeroDirection,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// `ρ_α(z) = ∏ |z_j|^{α_j}` with `0⁰ = 1`.
pub fn rho(alpha: &ExponentVector, z: &[Complex64]) -> Result<f64, MeasureError> {
    if alpha.len() != z.len() {
        return Err(MeasureError::Dimension {
            expected: alpha.len(),
            got: z.len(),
        });
    }
    let a = alpha.to_f64();
    let mut out = 1.0;
    for (j, (&aj, zj)) in a.iter().zip(z).enumerate() {
        if aj == 0.0 {
            continue;
        }
        let r = zj.norm();
        if r == 0.0 && aj < 0.0 {
            return Err(MeasureError::Domain(format!(
                "z_{} = 0 raised to negative power {}",
                j + 1,
                alpha.entries()[j]
            )));
        }
        out *= r.powf(aj);
    }
    Ok(out)
}

/// `ρ_α` on a radius vector, for `α ⪰ 0` given as floats.
pub fn rho_radii(alpha: &[f64], r: &[f64]) -> f64 {
    alpha
        .iter()
        .zip(r)
        .filter(|(a, _)| **a != 0.0)
        .map(|(a, r)| r.powf(*a))
        .product()
}

/// `log ρ_c(r)`, `NaN` when zero radii meet exponents of both signs.
fn log_rho(c: &[f64], r: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&cj, &rj) in c.iter().zip(r) {
        if cj != 0.0 {
            s += cj * rj.ln();
        }
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Lt,
    Ge,
}

/// `ρ_c(r) < bound` or `ρ_c(r) ≥ bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialConstraint {
    pub c: ExponentVector,
    #[serde(deserialize_with = "crate::exact::deserialize_real")]
    pub bound: f64,
    pub rel: Relation,
}

impl RadialConstraint {
    pub fn lt(c: ExponentVector, bound: f64) -> Self {
        RadialConstraint {
            c,
            bound,
            rel: Relation::Lt,
        }
    }

    pub fn ge(c: ExponentVector, bound: f64) -> Self {
        RadialConstraint {
            c,
            bound,
            rel: Relation::Ge,
        }
    }

    pub fn holds(&self, r: &[f64]) -> bool {
        self.holds_log(log_rho(&self.c.to_f64(), r))
    }

    fn holds_log(&self, lr: f64) -> bool {
        if lr.is_nan() {
            return false;
        }
        if self.bound <= 0.0 {
            return self.rel == Relation::Ge;
        }
        match self.rel {
            Relation::Lt => lr < self.bound.ln(),
            Relation::Ge => lr >= self.bound.ln(),
        }
    }
}

/// `0 ≤ Arg(z^{κ₀}) ≤ π`, i.e. `sin(κ₀·θ) ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngularConstraint {
    pub kappa0: Vec<i64>,
}

/// A subset of the unit polydisc cut out by monomial modulus inequalities
/// and at most one character-sign condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSet")]
pub struct ReinhardtAngularSet {
    pub dimension: usize,
    pub radial: Vec<RadialConstraint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angular: Option<AngularConstraint>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSet {
    dimension: Option<usize>,
    #[serde(default)]
    radial: Vec<RadialConstraint>,
    angular: Option<AngularConstraint>,
}

impl TryFrom<RawSet> for ReinhardtAngularSet {
    type Error = String;

    fn try_from(raw: RawSet) -> Result<Self, String> {
        let dimension = raw
            .dimension
            .or_else(|| raw.radial.first().map(|c| c.c.len()))
            .or_else(|| raw.angular.as_ref().map(|a| a.kappa0.len()))
            .ok_or("set without constraints needs an explicit \"dimension\"")?;
        let set = ReinhardtAngularSet {
            dimension,
            radial: raw.radial,
            angular: raw.angular,
        };
        set.validate().map_err(|e| e.to_string())?;
        Ok(set)
    }
}

impl ReinhardtAngularSet {
    /// The whole polydisc.
    pub fn full(n: usize) -> Self {
        ReinhardtAngularSet {
            dimension: n,
            radial: Vec::new(),
            angular: None,
        }
    }

    pub fn new(
        n: usize,
        radial: Vec<RadialConstraint>,
        angular: Option<Vec<i64>>,
    ) -> Result<Self, MeasureError> {
        let set = ReinhardtAngularSet {
            dimension: n,
            radial,
            angular: angular.map(|kappa0| AngularConstraint { kappa0 }),
        };
        set.validate()?;
        Ok(set)
    }

    fn validate(&self) -> Result<(), MeasureError> {
        let n = self.dimension;
        for c in &self.radial {
            if c.c.len() != n {
                return Err(MeasureError::Dimension {
                    expected: n,
                    got: c.c.len(),
                });
            }
            if !c.bound.is_finite() {
                return Err(MeasureError::Domain(format!(
                    "constraint bound {} is not finite",
                    c.bound
                )));
            }
        }
        if let Some(a) = &self.angular {
            if a.kappa0.len() != n {
                return Err(MeasureError::Dimension {
                    expected: n,
                    got: a.kappa0.len(),
                });
            }
            if a.kappa0.iter().all(|&k| k == 0) {
                return Err(MeasureError::ZeroDirection);
            }
        }
        Ok(())
    }

    /// `{ρ_c < bound}`.
    pub fn sublevel(c: ExponentVector, bound: f64) -> Self {
        ReinhardtAngularSet {
            dimension: c.len(),
            radial: vec![RadialConstraint::lt(c, bound)],
            angular: None,
        }
    }

    /// `{|z_j| < radii_j for all j}`.
    pub fn polyradius_box(radii: &[f64]) -> Self {
        let n = radii.len();
        ReinhardtAngularSet {
            dimension: n,
            radial: (0..n)
                .filter(|&j| radii[j] < 1.0)
                .map(|j| RadialConstraint::lt(unit(n, j), radii[j]))
                .collect(),
            angular: None,
        }
    }

    /// `F_s = {|z1 z2| < s, s < |z1| < √s, 0 ≤ Arg z^{α+1−b} ≤ π}`.
    pub fn counterexample_set(
        alpha: &ExponentVector,
        b: &ExponentVector,
        s: f64,
    ) -> Result<Self, MeasureError> {
        let n = alpha.len();
        if n < 2 || b.len() != n {
            return Err(MeasureError::Dimension {
                expected: n.max(2),
                got: b.len(),
            });
        }
        let kappa0 = alpha
            .add(&ExponentVector::ones(n))
            .sub(b)
            .to_integers()
            .ok_or_else(|| MeasureError::Domain("alpha and b must be integral".into()))?;
        let mut pair = vec![0i64; n];
        pair[0] = 1;
        pair[1] = 1;
        ReinhardtAngularSet::new(
            n,
            vec![
                RadialConstraint::lt(ExponentVector::from_integers(&pair), s),
                RadialConstraint::ge(unit(n, 0), s),
                RadialConstraint::lt(unit(n, 0), s.sqrt()),
            ],
            Some(kappa0),
        )
    }

    /// `Some(s)` when the radial part is exactly `{r1 r2 < s, s ≤ r1 < √s}`.
    pub fn region_parameter(&self) -> Option<f64> {
        let n = self.dimension;
        if n < 2 || self.radial.len() != 3 {
            return None;
        }
        let mut pair = vec![0i64; n];
        pair[0] = 1;
        pair[1] = 1;
        let pair = ExponentVector::from_integers(&pair);
        let e1 = unit(n, 0);
        let find = |c: &ExponentVector, rel: Relation| {
            self.radial
                .iter()
                .find(|k| k.c == *c && k.rel == rel)
                .map(|k| k.bound)
        };
        let s = find(&pair, Relation::Lt)?;
        let low = find(&e1, Relation::Ge)?;
        let high = find(&e1, Relation::Lt)?;
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y.abs();
        if close(low, s) && close(high, s.sqrt()) && s > 0.0 && s < 0.25 {
            Some(s)
        } else {
            None
        }
    }

    pub fn is_radial(&self) -> bool {
        self.angular.is_none()
    }

    pub fn member_polar(&self, r: &[f64], theta: &[f64]) -> bool {
        if r.iter().any(|&x| !(0.0..1.0).contains(&x)) {
            return false;
        }
        if !self.radial.iter().all(|c| c.holds(r)) {
            return false;
        }
        match &self.angular {
            None => true,
            Some(a) => {
                let u: f64 = a
                    .kappa0
                    .iter()
                    .zip(theta)
                    .map(|(&k, &t)| k as f64 * t)
                    .sum();
                u.sin() >= 0.0
            }
        }
    }

    pub fn member(&self, z: &[Complex64]) -> bool {
        let r: Vec<f64> = z.iter().map(|w| w.norm()).collect();
        let theta: Vec<f64> = z.iter().map(|w| w.arg()).collect();
        self.member_polar(&r, &theta)
    }

    /// Preimage under `z ↦ z^A`: radial exponents `c ↦ c·A`, angular
    /// direction `κ₀ ↦ κ₀·A`.
    pub fn pullback(&self, a: &IntegerMatrix) -> ReinhardtAngularSet {
        let ar = a.to_rational();
        ReinhardtAngularSet {
            dimension: self.dimension,
            radial: self
                .radial
                .iter()
                .map(|k| RadialConstraint {
                    c: ExponentVector::new(ar.left_mul(k.c.entries())),
                    bound: k.bound,
                    rel: k.rel,
                })
                .collect(),
            angular: self.angular.as_ref().map(|ang| {
                let v: Vec<BigInt> = ang.kappa0.iter().map(|&k| BigInt::from(k)).collect();
                AngularConstraint {
                    kappa0: a
                        .left_mul(&v)
                        .iter()
                        .map(|x| x.to_i64().expect("pulled-back direction exceeds i64"))
                        .collect(),
                }
            }),
        }
    }

    /// Lebesgue measure of the set.
    pub fn volume(&self) -> Result<f64, MeasureError> {
        let n = self.dimension;
        let radial = radial_integral(&vec![1.0; n], &self.radial, None, Tolerance::default())?;
        let angular = if self.angular.is_some() { 0.5 } else { 1.0 };
        Ok((2.0 * PI).powi(n as i32) * angular * radial)
    }
}

/// A [`ReinhardtAngularSet`] with exponents converted to floats once, for
/// membership tests inside sampling loops.
#[derive(Clone, Debug)]
pub struct CompiledSet {
    radial: Vec<(Vec<f64>, RadialConstraint)>,
    kappa0: Option<Vec<f64>>,
}

impl CompiledSet {
    pub fn new(set: &ReinhardtAngularSet) -> Self {
        CompiledSet {
            radial: set.radial.iter().map(|k| (k.c.to_f64(), k.clone())).collect(),
            kappa0: set
                .angular
                .as_ref()
                .map(|a| a.kappa0.iter().map(|&k| k as f64).collect()),
        }
    }

    pub fn holds_radial(&self, r: &[f64]) -> bool {
        self.radial.iter().all(|(c, k)| k.holds_log(log_rho(c, r)))
    }

    pub fn holds_angular(&self, theta: &[f64]) -> bool {
        match &self.kappa0 {
            None => true,
            Some(k) => k.iter().zip(theta).map(|(a, t)| a * t).sum::<f64>().sin() >= 0.0,
        }
    }

    pub fn member_polar(&self, r: &[f64], theta: &[f64]) -> bool {
        r.iter().all(|&x| (0.0..1.0).contains(&x)) && self.holds_radial(r) && self.holds_angular(theta)
    }

    pub fn member(&self, z: &[Complex64]) -> bool {
        let r: Vec<f64> = z.iter().map(|w| w.norm()).collect();
        if !r.iter().all(|&x| x < 1.0) || !self.holds_radial(&r) {
            return false;
        }
        match &self.kappa0 {
            None => true,
            Some(_) => {
                let theta: Vec<f64> = z.iter().map(|w| w.arg()).collect();
                self.holds_angular(&theta)
            }
        }
    }
}

fn unit(n: usize, j: usize) -> ExponentVector {
    let mut v = vec![0i64; n];
    v[j] = 1;
    ExponentVector::from_integers(&v)
}

/// Weight applied to the integrand of [`radial_integral`] at a radius vector.
pub type RadialWeight<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

struct Prepared {
    c: Vec<f64>,
    last: Option<usize>,
    log_bound: f64,
    rel: Relation,
}

struct RadialProblem<'a> {
    n: usize,
    d: &'a [f64],
    cons: Vec<Prepared>,
    weight: Option<RadialWeight<'a>>,
}

impl RadialProblem<'_> {
    /// Interval of `r_j` allowed by the constraints whose last active
    /// coordinate is `j`, given `log r_i` for `i < j`.
    fn bounds(&self, j: usize, logs: &[f64]) -> (f64, f64) {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for k in self.cons.iter().filter(|k| k.last == Some(j)) {
            let partial: f64 = (0..j).map(|i| k.c[i] * logs[i]).sum();
            let x = ((k.log_bound - partial) / k.c[j]).exp();
            let upper = (k.rel == Relation::Lt) == (k.c[j] > 0.0);
            if upper {
                hi = hi.min(x);
            } else {
                lo = lo.max(x);
            }
        }
        (lo, hi)
    }

    /// Radii in `(lo, hi)` where a later constraint starts to bind.
    fn breaks(&self, j: usize, logs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
        let mut pts = vec![lo, hi];
        for k in &self.cons {
            if k.last.is_some_and(|l| l > j) && k.c[j] != 0.0 {
                let partial: f64 = (0..j).map(|i| k.c[i] * logs[i]).sum();
                let x = ((k.log_bound - partial) / k.c[j]).exp();
                if x > lo && x < hi {
                    pts.push(x);
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn level(&self, j: usize, logs: &mut Vec<f64>, tol: Tolerance) -> Result<f64, QuadratureError> {
        let (lo, hi) = self.bounds(j, logs);
        if lo >= hi {
            return Ok(0.0);
        }
        let e = self.d[j] + 1.0;
        if j + 1 == self.n && self.weight.is_none() {
            return Ok((hi.powf(e) - lo.powf(e)) / e);
        }
        // Substitute u = r^{d+1}: ∫ r^d g(r) dr = (1/(d+1)) ∫ g(u^{1/(d+1)}) du.
        let pts: Vec<f64> = self
            .breaks(j, logs, lo, hi)
            .into_iter()
            .map(|x| x.powf(e))
            .collect();
        let base = logs.clone();
        let mut f = |u: f64| -> Result<f64, QuadratureError> {
            let r = u.powf(1.0 / e);
            let mut next = base.clone();
            next.push(r.ln());
            if j + 1 == self.n {
                let radii: Vec<f64> = next.iter().map(|l| l.exp()).collect();
                Ok((self.weight.expect("weighted leaf"))(&radii))
            } else {
                self.level(j + 1, &mut next, tol.inner())
            }
        };
        Ok(integrate_with_breaks(&mut f, &pts, tol)? / e)
    }
}

/// `∫ r^d · weight(r) dr` over the radii in `[0,1)ⁿ` satisfying every
/// constraint. Requires `d_j > −1`.
pub fn radial_integral(
    d: &[f64],
    constraints: &[RadialConstraint],
    weight: Option<RadialWeight<'_>>,
    tol: Tolerance,
) -> Result<f64, MeasureError> {
    let n = d.len();
    if let Some(bad) = d.iter().find(|&&x| x <= -1.0 || !x.is_finite()) {
        return Err(MeasureError::Domain(format!(
            "radial exponent {bad} makes the integral diverge"
        )));
    }
    let mut cons = Vec::new();
    for k in constraints {
        if k.c.len() != n {
            return Err(MeasureError::Dimension {
                expected: n,
                got: k.c.len(),
            });
        }
        let c = k.c.to_f64();
        let last = (0..n).rev().find(|&j| c[j] != 0.0);
        let log_bound = if k.bound > 0.0 {
            k.bound.ln()
        } else {
            f64::NEG_INFINITY
        };
        match last {
            None => {
                // ρ_0 = 1: the constraint is a constant truth value.
                if !k.holds_log(0.0) {
                    return Ok(0.0);
                }
            }
            Some(_) if k.bound <= 0.0 => {
                if k.rel == Relation::Lt {
                    return Ok(0.0);
                }
            }
            Some(_) => cons.push(Prepared {
                c,
                last,
                log_bound,
                rel: k.rel,
            }),
        }
    }
    let problem = RadialProblem {
        n,
        d,
        cons,
        weight,
    };
    Ok(problem.level(0, &mut Vec::with_capacity(n), tol)?)
}

/// `H(c, λ, L) = ∫_{t ⪰ 0, c·t > L} e^{−λ·t} dt` for `c ⪰ 0`, `λ ≻ 0`, by
/// peeling one coordinate at a time:
/// `H = e^{−λ_k L/c_k}/λ_k · ∏_{i≠k} 1/λ_i + ∫_0^{L/c_k} e^{−λ_k t} H(rest, L − c_k t) dt`.
pub fn sublevel_exponential(
    c: &[f64],
    lambda: &[f64],
    l: f64,
    tol: Tolerance,
) -> Result<f64, QuadratureError> {
    let mut factor = 1.0;
    let mut cc = Vec::with_capacity(c.len());
    let mut ll = Vec::with_capacity(c.len());
    for (&cj, &lj) in c.iter().zip(lambda) {
        if cj == 0.0 {
            factor /= lj;
        } else {
            cc.push(cj);
            ll.push(lj);
        }
    }
    if cc.is_empty() {
        return Ok(if l < 0.0 { factor } else { 0.0 });
    }
    if l <= 0.0 {
        return Ok(factor / ll.iter().product::<f64>());
    }
    let k = cc.len() - 1;
    if k == 0 {
        return Ok(factor * (-ll[0] * l / cc[0]).exp() / ll[0]);
    }
    let t_max = l / cc[k];
    let rest_prod: f64 = ll[..k].iter().map(|x| 1.0 / x).product();
    let first = (-ll[k] * t_max).exp() / ll[k] * rest_prod;
    let (c_rest, l_rest) = (&cc[..k], &ll[..k]);
    let inner = tol.inner();
    let integral = integrate(
        |t| Ok((-ll[k] * t).exp() * sublevel_exponential(c_rest, l_rest, l - cc[k] * t, inner)?),
        0.0,
        t_max,
        tol,
    )?;
    Ok(factor * (first + integral))
}

fn check_weight_exponent(alpha: &ExponentVector) -> Result<Vec<f64>, MeasureError> {
    if !alpha.is_nonnegative() {
        return Err(MeasureError::Domain(format!(
            "exponent {alpha} has a negative entry"
        )));
    }
    if alpha.is_zero() {
        return Err(MeasureError::Domain("exponent must be nonzero".into()));
    }
    Ok(alpha.to_f64())
}

/// `∫_{ρ_c(r) < bound} r^d dr` over the radius cube, for `c ⪰ 0`.
pub fn sublevel_radial_integral(c: &[f64], d: &[f64], bound: f64) -> Result<f64, MeasureError> {
    if bound <= 0.0 {
        return Ok(0.0);
    }
    let lambda: Vec<f64> = d.iter().map(|x| x + 1.0).collect();
    Ok(sublevel_exponential(c, &lambda, -bound.ln(), Tolerance::default())?)
}

/// Volume of `{z ∈ 𝔻ⁿ : ρ_α(z) < s}`.
pub fn sublevel_volume(alpha: &ExponentVector, s: f64) -> Result<f64, MeasureError> {
    let a = check_weight_exponent(alpha)?;
    if !(s > 0.0 && s <= 1.0) {
        return Err(MeasureError::Range(format!("s = {s} is outside (0, 1]")));
    }
    let n = a.len();
    let lambda = vec![2.0; n];
    let h = sublevel_exponential(&a, &lambda, -s.ln(), Tolerance::default())?;
    Ok((2.0 * PI).powi(n as i32) * h)
}

fn check_region_s(s: f64, n: usize) -> Result<(), MeasureError> {
    if n < 2 {
        return Err(MeasureError::Dimension {
            expected: 2,
            got: n,
        });
    }
    if !(s > 0.0 && s < 0.25) {
        return Err(MeasureError::Range(format!("s = {s} is outside (0, 1/4)")));
    }
    Ok(())
}

fn region_closed_form(d: &[f64], s: f64, equal: bool) -> f64 {
    let tail: f64 = d[1..].iter().map(|x| x + 1.0).product();
    let (d1, d2) = (d[0], d[1]);
    if equal {
        s.powf(d1 + 1.0) * (-s.ln()) / (2.0 * tail)
    } else {
        // s^{(d1+d2)/2+1} − s^{d1+1} = s^{d1+1}·expm1(((d2−d1)/2)·ln s)
        s.powf(d1 + 1.0) * (0.5 * (d2 - d1) * s.ln()).exp_m1() / ((d1 - d2) * tail)
    }
}

/// `∫_{A(s)} r^d dr` over `A(s) = {r ∈ [0,1)ⁿ : r1 r2 < s, s < r1 < √s}`,
/// choosing the logarithmic branch by exact equality of `d1` and `d2`.
pub fn region_integral_as(d: &ExponentVector, s: f64) -> Result<f64, MeasureError> {
    check_region_s(s, d.len())?;
    if !d.is_nonnegative() {
        return Err(MeasureError::Domain(format!("exponent {d} has a negative entry")));
    }
    let equal = d.entries()[0] == d.entries()[1];
    Ok(region_closed_form(&d.to_f64(), s, equal))
}

/// Floating-point version of [`region_integral_as`]; `d1`, `d2` closer than
/// `1e-12` take the logarithmic branch.
pub fn region_integral_as_f64(d: &[f64], s: f64) -> Result<f64, MeasureError> {
    check_region_s(s, d.len())?;
    if d.iter().any(|x| *x < 0.0 || !x.is_finite()) {
        return Err(MeasureError::Domain(format!("exponent {d:?} is not nonnegative")));
    }
    Ok(region_closed_form(d, s, (d[0] - d[1]).abs() <= 1e-12))
}

/// Square-wave Fourier coefficient of `1_{sin u ≥ 0}` at frequency `m`.
pub fn square_wave_coefficient(m: i64) -> Complex64 {
    if m == 0 {
        Complex64::new(0.5, 0.0)
    } else if m % 2 == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, -1.0 / (PI * m as f64))
    }
}

/// The integer `m` with `κ = −m·κ₀`, if any.
pub fn harmonic_index(kappa: &[i64], kappa0: &[i64]) -> Option<i64> {
    let mut m: Option<i64> = None;
    for (&k, &k0) in kappa.iter().zip(kappa0) {
        if k0 == 0 {
            if k != 0 {
                return None;
            }
            continue;
        }
        if k % k0 != 0 {
            return None;
        }
        let mj = -(k / k0);
        match m {
            Some(prev) if prev != mj => return None,
            _ => m = Some(mj),
        }
    }
    Some(m.unwrap_or(0))
}

/// `∫_{[0,2π)ⁿ} 1_{sin(κ₀·θ) ≥ 0} e^{iκ·θ} dθ`.
pub fn angular_character_integral(kappa: &[i64], kappa0: &[i64]) -> Result<Complex64, MeasureError> {
    if kappa.len() != kappa0.len() {
        return Err(MeasureError::Dimension {
            expected: kappa0.len(),
            got: kappa.len(),
        });
    }
    if kappa0.iter().all(|&k| k == 0) {
        return Err(MeasureError::ZeroDirection);
    }
    let torus = (2.0 * PI).powi(kappa.len() as i32);
    Ok(match harmonic_index(kappa, kappa0) {
        Some(m) => square_wave_coefficient(m) * torus,
        None => Complex64::new(0.0, 0.0),
    })
}

/// `‖z^γ‖² = πⁿ / ∏(γ_j + 1)` on the unit polydisc.
pub fn monomial_l2_norm_sq(gamma: &[i64]) -> f64 {
    gamma
        .iter()
        .map(|&g| PI / (g as f64 + 1.0))
        .product()
}

/// `Σ_{j∈I} j^μ γ^j / max_{j∈I} j^μ γ^j` with `0⁰ = 1`.
pub fn dominant_term_ratio(gamma: f64, mu: u32, indices: &[u32]) -> f64 {
    let term = |j: u32| (j as f64).powi(mu as i32) * gamma.powi(j as i32);
    let terms: Vec<f64> = indices.iter().map(|&j| if j == 0 { 1.0 } else { term(j) }).collect();
    let max = terms.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 1.0;
    }
    terms.iter().sum::<f64>() / max
}

/// `m(α)` and `‖α‖∞` as floats.
pub fn exponent_profile(alpha: &ExponentVector) -> (f64, usize) {
    (
        crate::exact::rational_to_f64(&alpha.sup_norm()),
        alpha.max_multiplicity(),
    )
}

/// Exact `α ⪰ 0, α ≠ 0` check shared by the estimator suites.
pub fn require_weight_exponent(alpha: &ExponentVector) -> Result<(), MeasureError> {
    check_weight_exponent(alpha).map(|_| ())
}
