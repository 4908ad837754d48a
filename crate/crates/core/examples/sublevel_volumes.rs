//! Volumes of `{ρ_α < s}` and their fitted power/log exponents.

use bergman_lab::estimator::{dyadic_grid, volume_scan};
use bergman_lab::measure::sublevel_volume;
use bergman_lab::ExponentVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v = sublevel_volume(&ExponentVector::from_integers(&[1, 0]), 0.25)?;
    // {|z1| < 1/4} × 𝔻 has volume π/16 · π.
    println!("|{{|z1| < 1/4}}| = {v:.12} (exact {:.12})", std::f64::consts::PI.powi(2) / 16.0);

    let grid = dyadic_grid(8, 20);
    for alpha in [vec![1, 1], vec![2, 1], vec![1, 1, 0], vec![3, 3, 1]] {
        let scan = volume_scan(&ExponentVector::from_integers(&alpha), &grid)?;
        println!(
            "alpha {:?}: s-exponent {:.4} (want {:.4}), log-exponent {:.4} (want {}), in band: {}",
            alpha,
            scan.s_exponent,
            scan.expected_s_exponent,
            scan.log_exponent,
            scan.expected_log_exponent,
            scan.within_band()
        );
    }
    Ok(())
}
