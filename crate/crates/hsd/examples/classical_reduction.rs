//! Commuting states reduce to the classical hockey-stick divergence.
//!
//! When rho and sigma are simultaneously diagonal, the optimal test is
//! diagonal too, and `E_gamma` equals the classical divergence of the two
//! eigenvalue distributions. This also exercises the reflection identity
//! `E_gamma(rho || sigma) = gamma E_{1/gamma}(sigma || rho)` used for
//! `gamma < 1`.
//!
//! ```bash
//! cargo run --example classical_reduction
//! ```

use hsd::divergence::{hs_classical, hs_measured, DivergenceQuery};
use hsd::hermlin::HermitianOperator;
use hsd::{DensityMatrix, MeasurementClass};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_distribution(rng: &mut StdRng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

fn main() -> Result<(), hsd::Error> {
    let mut rng = StdRng::seed_from_u64(7);
    let mut worst = 0.0f64;

    for trial in 0..20 {
        let n = 4;
        let p = random_distribution(&mut rng, n);
        let q = random_distribution(&mut rng, n);
        let rho = DensityMatrix::new(HermitianOperator::from_real_diag(&p))?;
        let sigma = DensityMatrix::new(HermitianOperator::from_real_diag(&q))?;

        for gamma in [0.5, 1.0, 2.0] {
            let classical = hs_classical(&p, &q, gamma)?;
            let quantum = hs_measured(&DivergenceQuery::new(
                rho.clone(),
                sigma.clone(),
                gamma,
                MeasurementClass::All,
            )?)?
            .value;
            worst = worst.max((classical - quantum).abs());
            if trial == 0 {
                println!("gamma = {gamma}: classical {classical:.10}, quantum {quantum:.10}");
            }
        }
    }
    println!("max |classical - quantum| over 20 random diagonal pairs: {worst:.2e}");
    assert!(worst < 1e-10, "diagonal pairs must match the classical formula");

    // The reflection identity, checked directly on one asymmetric pair.
    let p = vec![0.7, 0.2, 0.1];
    let q = vec![0.1, 0.3, 0.6];
    let gamma = 0.25;
    let left = hs_classical(&p, &q, gamma)?;
    let right = gamma * hs_classical(&q, &p, 1.0 / gamma)?;
    println!("reflection at gamma = {gamma}: {left:.10} = {gamma} * {:.10}", right / gamma);
    assert!((left - right).abs() < 1e-12);
    Ok(())
}
