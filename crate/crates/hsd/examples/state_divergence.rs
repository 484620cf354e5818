//! Hockey-stick divergence between two states under unrestricted
//! measurements.
//!
//! `E_gamma(rho || sigma)` is the largest advantage `Tr[M(rho - gamma
//! sigma)]` a binary test can achieve, minus the offset `(1 - gamma)_+`.
//! Without measurement restrictions it reduces to an eigendecomposition of
//! `rho - gamma sigma`, and at `gamma = 1` it is the trace distance.
//!
//! ```bash
//! cargo run --example state_divergence
//! ```

use hsd::divergence::{hs_measured, DivergenceQuery};
use hsd::hermlin::{ComplexMatrix, HermitianOperator};
use hsd::{DensityMatrix, MeasurementClass};
use num_complex::Complex64;

fn main() -> Result<(), hsd::Error> {
    // |+><+| versus the maximally mixed qubit.
    let plus = DensityMatrix::new(HermitianOperator::new(ComplexMatrix::from_fn(
        2,
        2,
        |_, _| Complex64::new(0.5, 0.0),
    ))?)?;
    let mixed = DensityMatrix::new(HermitianOperator::from_real_diag(&[0.5, 0.5]))?;

    for gamma in [0.5, 1.0, 1.5, 2.0] {
        let query = DivergenceQuery::new(plus.clone(), mixed.clone(), gamma, MeasurementClass::All)?;
        let result = hs_measured(&query)?;
        println!("E_{gamma}(|+><+| || I/2) = {:.6}  [{:?}]", result.value, result.method);

        // The optimal test is embedded in the result; replaying it against
        // the query reproduces the value.
        if let Some(replayed) = result.witness_value(&query)? {
            assert!((replayed - result.value).abs() < 1e-12);
        }
    }

    // At gamma = 1 the divergence is the trace distance: for these two
    // states the eigenvalues of the difference are +/- 1/2, so T = 1/2.
    let query = DivergenceQuery::new(plus, mixed, 1.0, MeasurementClass::All)?;
    let t = hs_measured(&query)?.value;
    println!("trace distance = {t:.6} (expected 0.5)");
    assert!((t - 0.5).abs() < 1e-12);
    Ok(())
}
