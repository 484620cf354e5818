//! Auditing quantum local differential privacy.
//!
//! A mechanism is (epsilon, delta)-private against a measurement class
//! when `E_{e^epsilon}` between every ordered pair of mechanism outputs
//! stays below delta. The audit solves one divergence per ordered pair and
//! reports the worst one, together with the pair achieving it and the
//! contraction bound implied on classical post-processing.
//!
//! The cost is |S|^2 solves for a state set S: exhaustive auditing is
//! exponential in the number of qubits of the inputs.
//!
//! ```bash
//! cargo run --release --example privacy_audit
//! ```

use hsd::privacy::{audit_channels, audit_states, contraction_bound, werner_qldp_delta};
use hsd::qobjects::{depolarizing_choi, werner_state};
use hsd::{ChannelSet, ChoiOperator, MeasurementClass, StateSet, WernerParams};

fn main() -> Result<(), hsd::Error> {
    let d = 3;
    let mut grid = Vec::new();
    for k in 0..=4 {
        grid.push(werner_state(&WernerParams::new(k as f64 / 4.0, d)?));
    }
    let set = StateSet::new("werner-grid", grid)?;
    let mechanism = ChoiOperator::identity(d * d);

    // The identity mechanism adds no noise, so against unrestricted
    // measurements it is completely non-private (delta = 1)...
    let all = audit_states(&mechanism, &set, 0.0, MeasurementClass::All)?;
    println!(
        "all: achieved delta = {:.8} at pair {:?} (complete: {})",
        all.achieved_delta, all.witness_pair, all.complete
    );
    assert!((all.achieved_delta - 1.0).abs() < 1e-9);

    // ...but against PPT measurements the worst pair only reaches
    // 2/(d+1), which decays with the dimension.
    let ppt = audit_states(&mechanism, &set, 0.0, MeasurementClass::Ppt)?;
    println!(
        "ppt: achieved delta = {:.8} at pair {:?}, closed form {:.8}",
        ppt.achieved_delta,
        ppt.witness_pair,
        werner_qldp_delta(d)?
    );
    assert!((ppt.achieved_delta - werner_qldp_delta(d)?).abs() < 1e-6);

    // The achieved delta bounds how much any post-processed binary
    // decision can leak.
    println!(
        "contraction bound at (0, delta): {:.8}",
        contraction_bound(0.0, ppt.achieved_delta)?
    );

    // Raising epsilon only relaxes the test, so delta is non-increasing.
    let mut last = f64::INFINITY;
    for epsilon in [0.0, 0.25, 0.5, 1.0] {
        let report = audit_states(&mechanism, &set, epsilon, MeasurementClass::Ppt)?;
        println!("ppt, epsilon = {epsilon}: achieved delta = {:.8}", report.achieved_delta);
        // For this family the worst pair is gamma-independent, so the sweep
        // is flat up to solver noise.
        assert!(report.achieved_delta <= last + 1e-6);
        last = report.achieved_delta;
    }

    // Channel sets audit the worst input as well: each pair is a channel
    // divergence rather than a fixed-output one.
    let channels = ChannelSet::new(
        "depolarizing",
        vec![
            depolarizing_choi(0.0, 2)?,
            depolarizing_choi(0.5, 2)?,
            depolarizing_choi(1.0, 2)?,
        ],
    )?;
    let report = audit_channels(&channels, 0.0, MeasurementClass::All)?;
    println!(
        "channel set, all: achieved delta = {:.8} at pair {:?}",
        report.achieved_delta, report.witness_pair
    );
    assert!((report.achieved_delta - 0.75).abs() < 1e-6);
    Ok(())
}
