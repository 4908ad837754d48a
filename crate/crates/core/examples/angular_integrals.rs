//! Closed-form radial and angular integrals next to brute-force checks.

use std::f64::consts::PI;

use bergman_lab::measure::{angular_character_integral, region_integral_as};
use bergman_lab::quadrature::{integrate, Tolerance};
use bergman_lab::sampling::polydisc_mean;
use bergman_lab::ExponentVector;
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // ∫ r1^d1 r2^d2 over {r1 r2 < s, s < r1 < √s}, nested 1-D quadrature.
    let s = 1.0 / 64.0;
    for d in [[1.0, 1.0], [3.0, 1.0], [0.5, 2.0]] {
        let closed = region_integral_as(&ExponentVector::from_ratios(&[((2.0 * d[0]) as i64, 2), ((2.0 * d[1]) as i64, 2)]), s)?;
        let tol = Tolerance::default();
        let nested = integrate(
            |r1| {
                let top = (s / r1).min(1.0);
                Ok(r1.powf(d[0]) * top.powf(d[1] + 1.0) / (d[1] + 1.0))
            },
            s,
            s.sqrt(),
            tol,
        )?;
        println!("d = {d:?}: closed {closed:.10e}, quadrature {nested:.10e}");
    }

    // ∫ 1_{sin(κ₀·θ) ≥ 0} e^{iκ·θ} dθ against torus sampling.
    let kappa0 = [1i64, 1, 0];
    for kappa in [[0i64, 0, 0], [-1, -1, 0], [-2, -2, 0], [-3, -3, 0], [1, 0, 0]] {
        let exact = angular_character_integral(&kappa, &kappa0)?;
        let torus = (2.0 * PI).powi(3);
        let est = |part: fn(Complex64) -> f64| {
            polydisc_mean(3, 200_000, 11, move |z| {
                let th: Vec<f64> = z.iter().map(|w| w.arg()).collect();
                let phase: f64 = th.iter().zip(&kappa0).map(|(t, &k)| t * k as f64).sum();
                if phase.sin() < 0.0 {
                    return 0.0;
                }
                let c: f64 = th.iter().zip(&kappa).map(|(t, &k)| t * k as f64).sum();
                part(Complex64::from_polar(1.0, c))
            })
        };
        let (re, im) = (est(|w| w.re), est(|w| w.im));
        println!(
            "kappa {kappa:?}: exact {:.5}{:+.5}i, sampled {:.5}{:+.5}i (± {:.1e})",
            exact.re,
            exact.im,
            torus * re.mean(),
            torus * im.mean(),
            torus * re.std_error().max(im.std_error())
        );
    }
    Ok(())
}
