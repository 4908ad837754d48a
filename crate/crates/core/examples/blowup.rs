//! Growth of the weak-type ratio for the counterexample family `h_s` on the
//! three-dimensional example domain.

use bergman_lab::bergman::DEFAULT_TRUNCATION;
use bergman_lab::estimator::{blowup_experiment, dyadic_grid};
use bergman_lab::lattice::{analyze_domain, IntegerMatrix};
use bergman_lab::ExponentVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let samples: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let b = IntegerMatrix::from_i64(&[vec![1, 0, 0], vec![-1, 1, 0], vec![1, -1, 1]])?;
    let analysis = analyze_domain(&b)?;
    let grid = dyadic_grid(4, 16);
    let report = blowup_experiment(
        &analysis,
        &ExponentVector::from_integers(&[1, 1, 1]),
        &grid,
        DEFAULT_TRUNCATION,
        samples,
        2024,
    )?;
    print!("{}", report.to_csv().to_csv_string());
    println!(
        "K = {:.6}, |Pi| = {:.3e}, slope = {:.4} (predicted {:.4}), growth = {:.4}",
        report.k_constant,
        report.pi_measure,
        report.slope,
        report.p_star - 1.0,
        report.growth
    );
    Ok(())
}
