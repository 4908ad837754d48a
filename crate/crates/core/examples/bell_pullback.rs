//! The Bell transformation identity on the Hartogs triangle.

use bergman_lab::bergman::bell_pullback_check;
use bergman_lab::lattice::{analyze_domain, IntegerMatrix};
use bergman_lab::measure::ReinhardtAngularSet;
use bergman_lab::ExponentVector;
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let hartogs = analyze_domain(&IntegerMatrix::from_i64(&[vec![1, -1], vec![0, 1]])?)?;
    let e = ReinhardtAngularSet::sublevel(ExponentVector::from_integers(&[0, 1]), 0.5);
    for z in [
        [Complex64::new(0.3, 0.4), Complex64::new(-0.2, 0.6)],
        [Complex64::new(0.1, -0.5), Complex64::new(0.7, 0.1)],
        [Complex64::new(-0.8, 0.1), Complex64::new(0.05, 0.05)],
    ] {
        let check = bell_pullback_check(&hartogs, &e, &z, 40)?;
        println!(
            "lhs {:.12}, rhs {:.12}, |diff| {:.1e}",
            check.lhs,
            check.rhs,
            (check.lhs - check.rhs).norm()
        );
    }
    Ok(())
}
