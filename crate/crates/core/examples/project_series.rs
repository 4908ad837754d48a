//! Polydisc projections of weighted indicators as monomial series.

use bergman_lab::bergman::{project_density, project_weighted_indicator, Density};
use bergman_lab::measure::{RadialConstraint, ReinhardtAngularSet};
use bergman_lab::ExponentVector;
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alpha = ExponentVector::from_integers(&[1, 1, 0]);
    let set = ReinhardtAngularSet::new(
        3,
        vec![RadialConstraint::lt(ExponentVector::from_integers(&[1, 1, 0]), 1.0 / 16.0)],
        Some(vec![1, 1, 0]),
    )?;
    let series = project_weighted_indicator(&alpha, &set, 8)?;
    print!("{}", series.to_csv().to_csv_string());
    let z = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4), Complex64::new(0.5, 0.0)];
    println!("P(rho 1_F)(z) = {:.6e}", series.evaluate(&z));
    println!("tail bound on radius 1/2: {:.3e}", series.tail_bound(0.5));

    // Polynomials are fixed, conjugates vanish.
    let poly = Density::polynomial(2, &[(vec![2, 1], Complex64::new(1.0, -1.0)), (vec![0, 3], Complex64::new(0.5, 0.0))]);
    let fixed = project_density(&poly, &ReinhardtAngularSet::full(2), 6)?;
    let w = [Complex64::new(0.4, 0.2), Complex64::new(0.1, -0.6)];
    println!("P(p)(w) = {:.12}, p(w) = {:.12}", fixed.evaluate(&w), poly.evaluate(&w));
    let conj = project_density(&Density::antiholomorphic(&[1, 2]), &ReinhardtAngularSet::full(2), 6)?;
    println!("P(conj z^(1,2)) has {} nonzero terms", conj.len());
    Ok(())
}
