//! Cross-validation of the Werner and isotropic closed forms against the
//! SDP on a parameter grid.
//!
//! Both families are invariant under a twirling channel, which collapses
//! the measured divergence to a two- or three-branch maximum. The solver
//! knows nothing about that symmetry, so agreement on a grid is a strong
//! end-to-end check of both sides.
//!
//! ```bash
//! cargo run --release --example closed_form_tables
//! ```

use hsd::divergence::{
    hs_measured, isotropic_measured_analytic, werner_measured_analytic, DivergenceQuery,
};
use hsd::qobjects::{isotropic_state, werner_state};
use hsd::{IsotropicParams, MeasurementClass, WernerParams};

const GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn main() -> Result<(), hsd::Error> {
    for gamma in [1.0, 1.5] {
        let mut worst = (0.0f64, 0.0, 0.0);
        for &p in &GRID {
            for &q in &GRID {
                let rho = werner_state(&WernerParams::new(q, 3)?);
                let sigma = werner_state(&WernerParams::new(p, 3)?);
                let query = DivergenceQuery::new(rho, sigma, gamma, MeasurementClass::Ppt)?;
                let sdp = hs_measured(&query)?.value;
                let analytic = werner_measured_analytic(p, q, 3, gamma)?;
                if (sdp - analytic).abs() > worst.0 {
                    worst = ((sdp - analytic).abs(), p, q);
                }
            }
        }
        println!(
            "werner d=3 gamma={gamma}: max |sdp - analytic| = {:.2e} at (p, q) = ({}, {})",
            worst.0, worst.1, worst.2
        );
        assert!(worst.0 < 1e-6);
    }

    for gamma in [1.0, 2.0] {
        let mut worst = 0.0f64;
        for &p in &GRID {
            for &q in &GRID {
                let rho = isotropic_state(&IsotropicParams::new(q, 2)?);
                let sigma = isotropic_state(&IsotropicParams::new(p, 2)?);
                let query = DivergenceQuery::new(rho, sigma, gamma, MeasurementClass::Ppt)?;
                let sdp = hs_measured(&query)?.value;
                let analytic = isotropic_measured_analytic(p, q, 2, gamma)?;
                worst = worst.max((sdp - analytic).abs());
            }
        }
        println!("isotropic d=2 gamma={gamma}: max |sdp - analytic| = {worst:.2e}");
        assert!(worst < 1e-6);
    }
    Ok(())
}
