//! Exact invariants of a few monomial polyhedra.

use bergman_lab::exact::format_rational;
use bergman_lab::lattice::{analyze_domain, is_gamma_invariant, IntegerMatrix};
use bergman_lab::ExponentVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domains: [(&str, Vec<Vec<i64>>); 4] = [
        ("hartogs", vec![vec![1, -1], vec![0, 1]]),
        ("generalized (2,1)", vec![vec![2, -1], vec![0, 1]]),
        ("example-3d", vec![vec![1, 0, 0], vec![-1, 1, 0], vec![1, -1, 1]]),
        ("bidisc", vec![vec![0, 1], vec![1, 0]]),
    ];
    for (name, rows) in domains {
        let analysis = analyze_domain(&IntegerMatrix::from_i64(&rows)?)?;
        println!("{name}: {}", analysis.summary());
        println!("  A = {:?}, det A = {}", analysis.a.to_i64_rows(), analysis.det_a());
        println!(
            "  weight exponent {}, log power {}",
            analysis.weight_exponent,
            format_rational(&analysis.log_weight_power())
        );
    }

    // Γ has order 2 on the generalized triangle; invariant monomials are z^{μA}.
    let generalized = analyze_domain(&IntegerMatrix::from_i64(&[vec![2, -1], vec![0, 1]])?)?;
    for beta in [[1, 1], [1, 2], [2, 1], [0, 2], [1, 3]] {
        let v = ExponentVector::from_integers(&beta);
        println!("z^{v} invariant: {}", is_gamma_invariant(&v, &generalized));
    }
    Ok(())
}
