//! Coefficients of `h_s = P(det φ′ · 1_{F_s})` on the three-dimensional example.

use bergman_lab::bergman::CounterexampleSpec;
use bergman_lab::lattice::{analyze_domain, IntegerMatrix};
use bergman_lab::ExponentVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let analysis = analyze_domain(&IntegerMatrix::from_i64(&[
        vec![1, 0, 0],
        vec![-1, 1, 0],
        vec![1, -1, 1],
    ])?)?;
    let spec = CounterexampleSpec::new(&analysis, &ExponentVector::from_integers(&[1, 1, 1]))?;
    println!("leading constant {:.12} (2/(3π) = {:.12})", spec.leading_constant(), 2.0 / (3.0 * std::f64::consts::PI));
    for k in 4..=12 {
        let s = 2f64.powi(-k);
        let a = spec.coefficient(&[0, 0, 0], s)?;
        let series = spec.series(s, 48)?;
        println!(
            "s = 2^-{k}: |a_0| = {:.6e}, {} terms, tail on radius 1/8 = {:.1e}",
            a.norm(),
            series.len(),
            series.tail_bound(0.125)
        );
    }
    Ok(())
}
