//! Lower bounds from explicit local measurement families.
//!
//! `LO*` tests are built from local effects with one-way classical
//! post-processing; evaluating a finite family gives a certified lower
//! bound on every larger class. On Werner and isotropic extreme pairs the
//! simple diagonal family already meets the PPT value, showing those
//! closed forms are achieved without entangled measurements.
//!
//! ```bash
//! cargo run --release --example lo_star_bounds
//! ```

use hsd::divergence::{
    default_lo_star_family, hs_lower_bound_from_measurements, hs_measured, DivergenceQuery,
};
use hsd::qobjects::{isotropic_state, werner_state};
use hsd::{IsotropicParams, MeasurementClass, WernerParams};

fn main() -> Result<(), hsd::Error> {
    let d = 3;
    let rho = werner_state(&WernerParams::new(1.0, d)?);
    let sigma = werner_state(&WernerParams::new(0.0, d)?);
    let shape = rho.shape().expect("Werner states carry their cut");

    let family = default_lo_star_family(shape)?;
    println!("diagonal LO* family for {shape}: {} candidate effects", family.len());

    let query = DivergenceQuery::new(rho.clone(), sigma.clone(), 1.0, MeasurementClass::LoStarLower)?;
    let lower = hs_lower_bound_from_measurements(&query, &family)?;
    let ppt = hs_measured(&DivergenceQuery::new(rho, sigma, 1.0, MeasurementClass::Ppt)?)?;

    println!("werner d={d} extreme pair:  lo* >= {:.8}, ppt = {:.8}", lower.value, ppt.value);
    assert!(lower.value <= ppt.value + 1e-6, "lower bound must not exceed PPT");
    assert!((lower.value - ppt.value).abs() < 1e-6, "tight on the extreme pair");

    // Same story for the isotropic extreme pair at d = 2.
    let rho = isotropic_state(&IsotropicParams::new(1.0, 2)?);
    let sigma = isotropic_state(&IsotropicParams::new(0.0, 2)?);
    let shape = rho.shape().expect("isotropic states carry their cut");
    let query = DivergenceQuery::new(rho.clone(), sigma.clone(), 1.0, MeasurementClass::LoStarLower)?;
    let lower = hs_lower_bound_from_measurements(&query, &default_lo_star_family(shape)?)?;
    let ppt = hs_measured(&DivergenceQuery::new(rho, sigma, 1.0, MeasurementClass::Ppt)?)?;
    println!("isotropic d=2 extreme pair: lo* >= {:.8}, ppt = {:.8}", lower.value, ppt.value);
    assert!((lower.value - ppt.value).abs() < 1e-6);

    // The dispatcher wires the same family in behind MeasurementClass::LoStarLower.
    let rho = werner_state(&WernerParams::new(0.9, 2)?);
    let sigma = werner_state(&WernerParams::new(0.2, 2)?);
    let via_dispatch = hs_measured(&DivergenceQuery::new(
        rho,
        sigma,
        1.5,
        MeasurementClass::LoStarLower,
    )?)?;
    println!(
        "werner d=2 (q, p, gamma) = (0.9, 0.2, 1.5): lo* >= {:.8} [{:?}]",
        via_dispatch.value, via_dispatch.method
    );
    Ok(())
}
