//! Globally adaptive 7/15-point Gauss–Kronrod quadrature.

use thiserror::Error;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("adaptive quadrature hit the subdivision limit (depth {depth}) with estimated error {error:e} above target {target:e}")]
    DepthLimit { depth: u32, error: f64, target: f64 },
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
    #[error("{0}")]
    Inner(String),
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    /// Maximum bisection depth of any subinterval.
    pub max_depth: u32,
}

impl Tolerance {
    pub const fn relative(rel: f64) -> Self {
        Tolerance {
            rel,
            abs: 0.0,
            max_depth: 40,
        }
    }

    /// Tolerance for an integral nested inside this one.
    pub fn inner(&self) -> Self {
        Tolerance {
            rel: self.rel * 0.1,
            abs: self.abs * 0.1,
            max_depth: self.max_depth,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::relative(1e-8)
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64), QuadratureError>
where
    F: FnMut(f64) -> Result<f64, QuadratureError>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64, QuadratureError> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite(x))
        }
    };
    let fc = eval(c)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = eval(c - dx)? + eval(c + dx)?;
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    Ok((k * h, ((k - g) * h).abs()))
}

/// Integrates `f` over `[a, b]`, bisecting the worst segment until the summed
/// error estimate meets `max(abs, rel·|I|)`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64, QuadratureError>
where
    F: FnMut(f64) -> Result<f64, QuadratureError>,
{
    integrate_with_breaks(&mut f, &[a, b], tol)
}

/// Like [`integrate`] but starts from the given sorted breakpoints, which
/// should include the kinks of the integrand.
pub fn integrate_with_breaks<F>(
    f: &mut F,
    points: &[f64],
    tol: Tolerance,
) -> Result<f64, QuadratureError>
where
    F: FnMut(f64) -> Result<f64, QuadratureError>,
{
    let mut segs: Vec<Segment> = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (value, error) = kronrod(f, a, b)?;
        segs.push(Segment {
            a,
            b,
            value,
            error,
            depth: 0,
        });
    }
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        let target = tol.abs.max(tol.rel * total.abs());
        if err <= target || err == 0.0 {
            return Ok(total);
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let s = segs.swap_remove(worst);
        if s.depth >= tol.max_depth {
            // Rounding noise below the representable resolution of the
            // segment is not a convergence failure.
            if s.error <= 64.0 * f64::EPSILON * s.value.abs().max(total.abs()) {
                return Ok(total);
            }
            return Err(QuadratureError::DepthLimit {
                depth: s.depth,
                error: err,
                target,
            });
        }
        let mid = 0.5 * (s.a + s.b);
        for (a, b) in [(s.a, mid), (mid, s.b)] {
            let (value, error) = kronrod(f, a, b)?;
            segs.push(Segment {
                a,
                b,
                value,
                error,
                depth: s.depth + 1,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| Ok(x.powi(5) - 3.0 * x * x), -1.0, 2.0, Tolerance::default()).unwrap();
        assert!((v - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let v = integrate(|x| Ok(x.sqrt()), 0.0, 1.0, Tolerance::relative(1e-10)).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn kinks_with_breakpoints() {
        let mut f = |x: f64| Ok((x - 0.3).abs());
        let v = integrate_with_breaks(&mut f, &[0.0, 0.3, 1.0], Tolerance::default()).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn depth_limit_is_reported() {
        let tol = Tolerance {
            rel: 1e-14,
            abs: 0.0,
            max_depth: 2,
        };
        let r = integrate(|x: f64| Ok((1.0 / x).sin()), 1e-6, 1.0, tol);
        assert!(matches!(r, Err(QuadratureError::DepthLimit { .. })));
    }
}
