//! Restricted-type ratios over dyadic families on the Hartogs triangle and
//! the polydisc inequalities for `α = (1,1,0)`.

use bergman_lab::estimator::{dyadic_family, polydisc_inequality_suite, restricted_ratio_suite, SuiteMode};
use bergman_lab::lattice::{analyze_domain, IntegerMatrix};
use bergman_lab::ExponentVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let samples: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40_000);
    let ks: Vec<u32> = (2..=10).collect();

    let hartogs = analyze_domain(&IntegerMatrix::from_i64(&[vec![1, -1], vec![0, 1]])?)?;
    let family = dyadic_family(&hartogs.weight_exponent, &ks);
    let report = restricted_ratio_suite(&hartogs, &family, samples, 7)?;
    print!("{}", report.to_csv().to_csv_string());

    let alpha = ExponentVector::from_integers(&[1, 1, 0]);
    let family = dyadic_family(&alpha, &ks);
    for mode in [SuiteMode::Endpoint, SuiteMode::Holder] {
        let report = polydisc_inequality_suite(&alpha, &family, mode, None, samples, 7)?;
        print!("{}", report.to_csv().to_csv_string());
    }
    let report = polydisc_inequality_suite(&alpha, &family, SuiteMode::Subcritical, Some(1.6), samples, 7)?;
    print!("{}", report.to_csv().to_csv_string());
    Ok(())
}
