//! Quantum local differential privacy audits under restricted measurements.
//!
//! A mechanism `A` is `(epsilon, delta)`-QLDP with respect to a state set
//! `S` and a measurement class `M` when
//!
//! ```text
//! E_{e^eps}^M(A(rho) || A(sigma)) <= delta   for all rho, sigma in S.
//! ```
//!
//! Auditing computes the left-hand side for every ordered pair and reports
//! the maximum together with the pair achieving it; the channel variant
//! does the same with channel divergences over a set of channels (composed
//! with the supermechanism upstream by the caller). The divergence is
//! asymmetric for `gamma > 1`, hence ordered pairs.
//!
//! Cost grows as the square of the set size, with each entry an eigensolve
//! (class `all`) or an SDP solve (class `ppt`) in the full output
//! dimension — exponential in the number of qubits. Pairs are solved
//! concurrently; the max reduction is deterministic, breaking ties toward
//! the lexicographically smallest index pair.

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::chandiv::{channel_hs_all_with_tol, channel_hs_ppt_with_tol, ChannelPair};
use crate::divergence::{hs_measured_with_tol, DivergenceQuery, MeasurementClass};
use crate::qobjects::{apply_channel, ChoiOperator, DensityMatrix};
use crate::{sdp, Error, Result};

/// A privacy target: `epsilon >= 0` and `delta` in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        check_delta(delta)?;
        Ok(PrivacyParams { epsilon, delta })
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::param("epsilon", format!("{epsilon} is not a finite nonnegative value")));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !delta.is_finite() || !(0.0..=1.0).contains(&delta) {
        return Err(Error::param("delta", format!("{delta} outside [0, 1]")));
    }
    Ok(())
}

/// A labeled, nonempty collection of equal-dimension states sharing one
/// (possibly absent) bipartite factorization.
#[derive(Clone, Debug)]
pub struct StateSet {
    label: String,
    states: Vec<DensityMatrix>,
}

impl StateSet {
    pub fn new(label: impl Into<String>, states: Vec<DensityMatrix>) -> Result<Self> {
        let label = label.into();
        let first = states.first().ok_or_else(|| Error::param("states", "empty set".to_string()))?;
        for s in &states[1..] {
            if s.dim() != first.dim() {
                return Err(Error::dims(s.dim(), first.dim(), "state set members"));
            }
            if s.shape() != first.shape() {
                return Err(Error::param(
                    "states",
                    "set members must share one bipartite factorization".to_string(),
                ));
            }
        }
        Ok(StateSet { label, states })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false // nonempty by construction
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }
}

/// A labeled, nonempty collection of channels with uniform input and
/// output dimensions, given as Choi operators.
#[derive(Clone, Debug)]
pub struct ChannelSet {
    label: String,
    channels: Vec<ChoiOperator>,
}

impl ChannelSet {
    pub fn new(label: impl Into<String>, channels: Vec<ChoiOperator>) -> Result<Self> {
        let label = label.into();
        let first = channels
            .first()
            .ok_or_else(|| Error::param("channels", "empty set".to_string()))?;
        for c in &channels[1..] {
            if c.input_dim() != first.input_dim() {
                return Err(Error::dims(c.input_dim(), first.input_dim(), "channel set inputs"));
            }
            if c.output_dim() != first.output_dim() {
                return Err(Error::dims(c.output_dim(), first.output_dim(), "channel set outputs"));
            }
        }
        Ok(ChannelSet { label, channels })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn channels(&self) -> &[ChoiOperator] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // nonempty by construction
    }
}

#[derive(Serialize, Deserialize)]
struct StateSetJson {
    label: String,
    states: Vec<DensityMatrix>,
}

impl Serialize for StateSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StateSetJson {
            label: self.label.clone(),
            states: self.states.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = StateSetJson::deserialize(deserializer)?;
        StateSet::new(raw.label, raw.states).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct ChannelSetJson {
    label: String,
    channels: Vec<ChoiOperator>,
}

impl Serialize for ChannelSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ChannelSetJson {
            label: self.label.clone(),
            channels: self.channels.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ChannelSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = ChannelSetJson::deserialize(deserializer)?;
        ChannelSet::new(raw.label, raw.channels).map_err(serde::de::Error::custom)
    }
}

/// Outcome of an audit. `pairwise[i][j]` is the divergence of the
/// mechanism's outputs on the ordered member pair `(i, j)`, or `None` when
/// that solve failed; `achieved_delta` is the largest entry and
/// `witness_pair` the first pair attaining it in row-major order.
/// `contraction_bound` evaluates [`contraction_bound`] at
/// `(epsilon, achieved_delta)`: an upper bound on any gamma = 1 divergence
/// the audited mechanism can exhibit under the same class.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditReport {
    pub epsilon: f64,
    pub class: MeasurementClass,
    pub achieved_delta: f64,
    #[serde(rename = "witness")]
    pub witness_pair: (usize, usize),
    pub pairwise: Vec<Vec<Option<f64>>>,
    pub complete: bool,
    pub contraction_bound: f64,
    /// Normalized primal-dual gaps, index-aligned with `pairwise`; absent
    /// for closed-form entries. Not part of the JSON schema.
    #[serde(skip)]
    pub per_pair_gaps: Vec<Vec<Option<f64>>>,
}

impl AuditReport {
    /// Whether the audited mechanism meets `(epsilon, delta)`-QLDP, i.e.
    /// every pairwise divergence stayed at or below `delta`.
    pub fn passes(&self, delta: f64) -> bool {
        self.achieved_delta <= delta
    }
}

/// Trace-distance contraction coefficient of an `(epsilon, delta)`-QLDP
/// mechanism: `(e^eps - 1 + 2 delta) / (e^eps + 1)`.
pub fn contraction_bound(epsilon: f64, delta: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    check_delta(delta)?;
    let e = epsilon.exp();
    if e.is_infinite() {
        return Ok(1.0);
    }
    Ok((e - 1.0 + 2.0 * delta) / (e + 1.0))
}

/// The exact privacy level of the identity mechanism on the Werner family
/// at local dimension `d` under PPT measurements: `delta = 2/(d + 1)`,
/// independent of `epsilon`.
pub fn werner_qldp_delta(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::param("d", format!("{d} < 2")));
    }
    Ok(2.0 / (d as f64 + 1.0))
}

fn check_audit_class(class: MeasurementClass) -> Result<()> {
    if class == MeasurementClass::LoStarLower {
        return Err(Error::param(
            "measurement_class",
            "audits support all/ppt".to_string(),
        ));
    }
    Ok(())
}

/// All ordered index pairs of `0..n`, row-major.
fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
}

fn assemble_report(
    epsilon: f64,
    class: MeasurementClass,
    n: usize,
    pairs: &[(usize, usize)],
    solved: Vec<Result<(f64, Option<f64>)>>,
) -> Result<AuditReport> {
    let mut pairwise = vec![vec![None; n]; n];
    let mut gaps = vec![vec![None; n]; n];
    let mut complete = true;
    for (&(i, j), res) in pairs.iter().zip(solved) {
        match res {
            Ok((value, gap)) => {
                pairwise[i][j] = Some(value);
                gaps[i][j] = gap;
            }
            // A pair the solver could not certify leaves a hole; anything
            // else is a malformed audit and aborts.
            Err(Error::SolverFailure { .. }) => complete = false,
            Err(e) => return Err(e),
        }
    }

    let mut best: Option<(f64, (usize, usize))> = None;
    for (i, row) in pairwise.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            if let Some(v) = *entry {
                if best.map_or(true, |(bv, _)| v > bv) {
                    best = Some((v, (i, j)));
                }
            }
        }
    }
    let (achieved_delta, witness_pair) = match best {
        Some((v, pair)) => (v.max(0.0), pair),
        None => (0.0, (0, 0)),
    };
    let bound = contraction_bound(epsilon, achieved_delta.min(1.0))?;
    Ok(AuditReport {
        epsilon,
        class,
        achieved_delta,
        witness_pair,
        pairwise,
        complete,
        contraction_bound: bound,
        per_pair_gaps: gaps,
    })
}

/// Audits a mechanism over a state set: every ordered pair of outputs
/// `(A(rho_i), A(rho_j))` is compared at `gamma = e^epsilon` under the
/// given class. The mechanism is `(epsilon, delta)`-QLDP for the set iff
/// the reported `achieved_delta` is at most `delta`.
pub fn audit_states(
    mechanism: &ChoiOperator,
    set: &StateSet,
    epsilon: f64,
    class: MeasurementClass,
) -> Result<AuditReport> {
    audit_states_with_tol(mechanism, set, epsilon, class, sdp::DEFAULT_TOLERANCE)
}

pub fn audit_states_with_tol(
    mechanism: &ChoiOperator,
    set: &StateSet,
    epsilon: f64,
    class: MeasurementClass,
    tol: f64,
) -> Result<AuditReport> {
    check_epsilon(epsilon)?;
    check_audit_class(class)?;
    if mechanism.input_dim() != set.dim() {
        return Err(Error::dims(mechanism.input_dim(), set.dim(), "mechanism input"));
    }
    let outputs = set
        .states()
        .iter()
        .map(|s| apply_channel(mechanism, s))
        .collect::<Result<Vec<_>>>()?;
    if class == MeasurementClass::Ppt && outputs[0].shape().is_none() {
        return Err(Error::MissingShape {
            context: "PPT audit needs bipartite mechanism outputs",
        });
    }
    let gamma = epsilon.exp();
    let n = outputs.len();
    let pairs = ordered_pairs(n);
    let solved: Vec<Result<(f64, Option<f64>)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let query =
                DivergenceQuery::new(outputs[i].clone(), outputs[j].clone(), gamma, class)?;
            let res = hs_measured_with_tol(&query, tol)?;
            Ok((res.value, res.gap))
        })
        .collect();
    assemble_report(epsilon, class, n, &pairs, solved)
}

/// Audits a channel set: every ordered pair of member channels is compared
/// by channel divergence at `gamma = e^epsilon`. Supermechanisms are not
/// modeled — the caller composes them and submits the resulting Chois.
pub fn audit_channels(
    set: &ChannelSet,
    epsilon: f64,
    class: MeasurementClass,
) -> Result<AuditReport> {
    audit_channels_with_tol(set, epsilon, class, sdp::DEFAULT_TOLERANCE)
}

pub fn audit_channels_with_tol(
    set: &ChannelSet,
    epsilon: f64,
    class: MeasurementClass,
    tol: f64,
) -> Result<AuditReport> {
    check_epsilon(epsilon)?;
    check_audit_class(class)?;
    let gamma = epsilon.exp();
    if !gamma.is_finite() {
        return Err(Error::param("epsilon", format!("e^{epsilon} overflows")));
    }
    let n = set.len();
    let pairs = ordered_pairs(n);
    let solved: Vec<Result<(f64, Option<f64>)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let pair =
                ChannelPair::new(set.channels()[i].clone(), set.channels()[j].clone(), gamma)?;
            let res = match class {
                MeasurementClass::All => channel_hs_all_with_tol(&pair, tol)?,
                MeasurementClass::Ppt => channel_hs_ppt_with_tol(&pair, tol)?,
                MeasurementClass::LoStarLower => unreachable!("rejected above"),
            };
            Ok((res.value, res.gap))
        })
        .collect();
    assemble_report(epsilon, class, n, &pairs, solved)
}
