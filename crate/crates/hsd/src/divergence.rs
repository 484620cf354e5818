//! State-level hockey-stick divergences under measurement restrictions.
//!
//! The quantity computed throughout is
//!
//! ```text
//! E_gamma^M(rho || sigma) = sup_{M in class} Tr[M (rho - gamma sigma)] - (1 - gamma)_+
//! ```
//!
//! for a class of allowed POVM effects. Three computation paths exist:
//!
//! - **all effects** (`0 <= M <= I`): closed form through an eigensolve of
//!   `rho - gamma sigma`, no optimization;
//! - **PPT effects** (`M` and its partial transpose both between `0` and
//!   `I`): a semidefinite program solved to primal-dual optimality, with the
//!   dual certificate and gap reported;
//! - **explicit effect families** (local-diagonal defaults or caller
//!   supplied): a plain maximum over the family and its complements, giving
//!   a certified lower bound.
//!
//! `gamma` below `1` is handled once, at dispatch, through the reflection
//! identity `E_gamma(rho||sigma) = gamma * E_{1/gamma}(sigma||rho)`; the SDP
//! transcription itself is only ever run with `gamma >= 1`, where the
//! `(1-gamma)_+` offset vanishes.

use serde::{Deserialize, Serialize};

use crate::hermlin::{
    hermitian_eig, partial_transpose, BipartiteShape, ComplexMatrix, HermitianOperator, Subsystem,
};
use crate::qobjects::{DensityMatrix, MEASUREMENT_TOLERANCE};
use crate::sdp::{AffineExpr, SdpProblem, SuperopKind};
use crate::{sdp, Error, Result};

/// Eigenvalues above this threshold count toward the positive part; kept in
/// sync with the spectral cutoff used by `hermlin::positive_part`.
const POSITIVE_CUTOFF: f64 = 1e-12;

/// Restriction on the optimizing measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementClass {
    /// Every effect `0 <= M <= I`.
    All,
    /// Effects whose partial transpose is also between `0` and `I`.
    Ppt,
    /// Lower bound from an explicit local-diagonal effect family.
    LoStarLower,
}

impl std::fmt::Display for MeasurementClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MeasurementClass::All => "all",
            MeasurementClass::Ppt => "ppt",
            MeasurementClass::LoStarLower => "lo_star_lower",
        };
        f.write_str(s)
    }
}

/// How a reported value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    SdpPrimalDual,
    Analytic,
    LowerBound,
    CovarianceReduction,
}

/// A validated divergence instance: two states of equal dimension, a
/// nonnegative `gamma`, and the measurement class to optimize over.
#[derive(Clone, Debug)]
pub struct DivergenceQuery {
    rho: DensityMatrix,
    sigma: DensityMatrix,
    gamma: f64,
    class: MeasurementClass,
}

impl DivergenceQuery {
    pub fn new(
        rho: DensityMatrix,
        sigma: DensityMatrix,
        gamma: f64,
        class: MeasurementClass,
    ) -> Result<Self> {
        if rho.dim() != sigma.dim() {
            return Err(Error::dims(rho.dim(), sigma.dim(), "divergence query states"));
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::param("gamma", format!("{gamma} is not a finite nonnegative value")));
        }
        if matches!(class, MeasurementClass::Ppt | MeasurementClass::LoStarLower) {
            let (a, b) = (rho.shape(), sigma.shape());
            match (a, b) {
                (Some(sa), Some(sb)) if sa == sb => {}
                (None, _) | (_, None) => {
                    return Err(Error::MissingShape {
                        context: "partial-transpose measurement classes",
                    })
                }
                (Some(sa), Some(sb)) => {
                    return Err(Error::param(
                        "shape",
                        format!("states factor differently: {sa} vs {sb}"),
                    ))
                }
            }
        }
        Ok(DivergenceQuery {
            rho,
            sigma,
            gamma,
            class,
        })
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn sigma(&self) -> &DensityMatrix {
        &self.sigma
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn class(&self) -> MeasurementClass {
        self.class
    }

    /// The reflected instance `(sigma, rho, 1/gamma)` of the identity
    /// `E_gamma(rho||sigma) = gamma * E_{1/gamma}(sigma||rho)`.
    pub fn reflected(&self) -> Result<Self> {
        if self.gamma <= 0.0 {
            return Err(Error::param("gamma", "reflection needs gamma > 0".to_string()));
        }
        DivergenceQuery::new(
            self.sigma.clone(),
            self.rho.clone(),
            1.0 / self.gamma,
            self.class,
        )
    }

    /// `rho - gamma sigma`, the operator every path optimizes against.
    fn deviation(&self) -> HermitianOperator {
        self.rho.op() - &self.sigma.op().scale(self.gamma)
    }

    fn offset(&self) -> f64 {
        (1.0 - self.gamma).max(0.0)
    }
}

/// Outcome of a divergence computation. `witness`, when present, is an
/// effect in the queried class achieving the value; SDP-backed results also
/// carry the dual bound and the normalized primal-dual gap.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DivergenceResult {
    pub value: f64,
    pub dual_value: Option<f64>,
    pub gap: Option<f64>,
    pub method: Method,
    pub class: MeasurementClass,
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<HermitianOperator>,
}

impl DivergenceResult {
    /// Tr[M (rho - gamma sigma)] - (1-gamma)_+ at the stored witness;
    /// reproduces `value` for every path that returns one.
    pub fn witness_value(&self, query: &DivergenceQuery) -> Result<Option<f64>> {
        match &self.witness {
            Some(m) => {
                let t = m.hs_inner(&query.deviation())?;
                Ok(Some(t - query.offset()))
            }
            None => Ok(None),
        }
    }
}

/// Classical hockey-stick divergence of two probability vectors:
/// `sum_x max{0, P(x) - gamma Q(x)} - (1-gamma)_+`.
pub fn hs_classical(p: &[f64], q: &[f64], gamma: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::dims(p.len(), q.len(), "probability vectors"));
    }
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::param("gamma", format!("{gamma} is not a finite nonnegative value")));
    }
    for (name, v) in [("P", p), ("Q", q)] {
        if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::param(name, "entries must be finite and nonnegative".to_string()));
        }
        let total: f64 = v.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::param(name, format!("sums to {total}, expected 1")));
        }
    }
    let sum: f64 = p
        .iter()
        .zip(q)
        .map(|(pi, qi)| (pi - gamma * qi).max(0.0))
        .sum();
    Ok((sum - (1.0 - gamma).max(0.0)).max(0.0))
}

/// Unrestricted-measurement divergence, computed exactly from the spectrum
/// of `rho - gamma sigma`; the witness is the projector onto its positive
/// eigenspace.
pub fn hs_all(query: &DivergenceQuery) -> Result<DivergenceResult> {
    if query.class() != MeasurementClass::All {
        return Err(Error::param("measurement_class", format!("hs_all got {}", query.class())));
    }
    let delta = query.deviation();
    let (vals, vecs) = hermitian_eig(&delta);
    let positive: f64 = vals.iter().filter(|v| **v > POSITIVE_CUTOFF).sum();
    let n = delta.dim();
    let mut proj = ComplexMatrix::zeros(n, n);
    for (k, lam) in vals.iter().enumerate() {
        if *lam > POSITIVE_CUTOFF {
            for i in 0..n {
                for j in 0..n {
                    let add = vecs.get(i, k) * vecs.get(j, k).conj();
                    proj.set(i, j, proj.get(i, j) + add);
                }
            }
        }
    }
    let witness = HermitianOperator::new(proj)?.reshaped(query.rho().shape())?;
    Ok(DivergenceResult {
        value: (positive - query.offset()).max(0.0),
        dual_value: None,
        gap: None,
        method: Method::ClosedForm,
        class: MeasurementClass::All,
        gamma: query.gamma(),
        witness: Some(witness),
    })
}

/// The two-sided partial-transpose box on effects, as one SDP:
/// maximize `Tr[M delta]` over `0 <= M <= I`, `0 <= T_B(M) <= I`.
fn ppt_effect_problem(delta: &HermitianOperator, shape: BipartiteShape) -> Result<SdpProblem> {
    let n = shape.side();
    let mut b = SdpProblem::builder();
    let m = b.variable_shaped("M", shape);
    b.maximize_term(delta.clone(), m);
    b.constrain_psd(
        "I - M",
        AffineExpr::from_const(HermitianOperator::identity(n)).plus_var(m, -1.0),
    );
    b.constrain_psd(
        "T_B(M)",
        AffineExpr::zero(n).plus(m, 1.0, vec![SuperopKind::PartialTransposeB(shape)]),
    );
    b.constrain_psd(
        "I - T_B(M)",
        AffineExpr::from_const(HermitianOperator::identity(n)).plus(
            m,
            -1.0,
            vec![SuperopKind::PartialTransposeB(shape)],
        ),
    );
    b.build()
}

/// PPT-measured divergence at the default solver tolerance.
pub fn hs_ppt(query: &DivergenceQuery) -> Result<DivergenceResult> {
    hs_ppt_with_tol(query, sdp::DEFAULT_TOLERANCE)
}

/// PPT-measured divergence via the primal-dual SDP. Both certificates are
/// reported; the dual objective upper-bounds the primal by weak duality, so
/// `value <= dual_value + gap` scale. The returned witness is rounded to an
/// exactly feasible PPT effect (see [`round_ppt_witness`]).
pub fn hs_ppt_with_tol(query: &DivergenceQuery, tol: f64) -> Result<DivergenceResult> {
    if query.class() != MeasurementClass::Ppt {
        return Err(Error::param("measurement_class", format!("hs_ppt got {}", query.class())));
    }
    if query.gamma() == 0.0 {
        return Ok(trivial_gamma_zero(query));
    }
    if query.gamma() < 1.0 {
        let inner = hs_ppt_with_tol(&query.reflected()?, tol)?;
        return Ok(reflect_back(query, inner));
    }

    let shape = query.rho().shape().expect("validated at query construction");
    let problem = ppt_effect_problem(&query.deviation(), shape)?;
    let solution = problem.solve_relaxed(tol)?;
    let witness = match solution.primal_vars.values().next() {
        Some(m) => Some(round_ppt_witness(m.clone())?),
        None => None,
    };
    // K is the identity exactly on the two capped blocks, so the dual
    // objective collapses to the trace of their multipliers.
    Ok(DivergenceResult {
        value: solution.primal_value.max(0.0),
        dual_value: Some(solution.dual_value),
        gap: Some(solution.gap),
        method: Method::SdpPrimalDual,
        class: MeasurementClass::Ppt,
        gamma: query.gamma(),
        witness,
    })
}

/// Maps a numerically near-feasible effect to one strictly inside the PPT
/// box by mixing with `I/2`. Since the partial transpose fixes the
/// identity, one mixing weight repairs all four spectral bounds (of `M`
/// and `T_B(M)`) simultaneously; a spectral excess of `v` needs weight
/// `2v/(1+2v)`, taken with a safety margin. The objective shifts by at
/// most `theta * ||rho - gamma sigma||_1`, well under the solve tolerance
/// scale.
fn round_ppt_witness(m: HermitianOperator) -> Result<HermitianOperator> {
    let tb = partial_transpose(&m, Subsystem::B)?;
    let excess = [
        -m.min_eigenvalue(),
        m.max_eigenvalue() - 1.0,
        -tb.min_eigenvalue(),
        tb.max_eigenvalue() - 1.0,
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    if excess <= 0.0 {
        return Ok(m);
    }
    let theta = (2.1 * excess).min(1.0);
    let id = HermitianOperator::identity(m.dim()).reshaped(m.shape())?;
    Ok(&m.scale(1.0 - theta) + &id.scale(theta / 2.0))
}

/// `gamma = 0`: the divergence is `sup_M Tr[M rho] - 1`, which every class
/// containing the identity effect attains at exactly zero.
fn trivial_gamma_zero(query: &DivergenceQuery) -> DivergenceResult {
    let witness = HermitianOperator::identity(query.rho().dim())
        .reshaped(query.rho().shape())
        .expect("identity reshapes to the state shape");
    DivergenceResult {
        value: 0.0,
        dual_value: None,
        gap: None,
        method: Method::ClosedForm,
        class: query.class(),
        gamma: 0.0,
        witness: Some(witness),
    }
}

/// Maps a result for the reflected instance back to the original one:
/// values scale by `gamma`, the optimal effect complements.
fn reflect_back(query: &DivergenceQuery, inner: DivergenceResult) -> DivergenceResult {
    let gamma = query.gamma();
    let value = (gamma * inner.value).max(0.0);
    let dual_value = inner.dual_value.map(|d| gamma * d);
    let gap = dual_value.map(|d| sdp_gap(value, d)).or(inner.gap);
    let witness = inner.witness.map(|m| {
        let id = HermitianOperator::identity(m.dim());
        &id - &m
    });
    DivergenceResult {
        value,
        dual_value,
        gap,
        method: inner.method,
        class: query.class(),
        gamma,
        witness,
    }
}

fn sdp_gap(primal: f64, dual: f64) -> f64 {
    (primal - dual).abs() / (1.0 + primal.abs() + dual.abs())
}

/// Measured divergence under the queried class, dispatching on class and
/// `gamma`: `gamma = 0` is identically zero, `gamma` in `(0,1)` reroutes
/// through the reflection identity, and `gamma >= 1` goes to the closed
/// form, the SDP, or the default lower-bound family.
pub fn hs_measured(query: &DivergenceQuery) -> Result<DivergenceResult> {
    hs_measured_with_tol(query, sdp::DEFAULT_TOLERANCE)
}

pub fn hs_measured_with_tol(query: &DivergenceQuery, tol: f64) -> Result<DivergenceResult> {
    if query.gamma() == 0.0 {
        return Ok(trivial_gamma_zero(query));
    }
    if query.gamma() < 1.0 {
        let inner = hs_measured_with_tol(&query.reflected()?, tol)?;
        return Ok(reflect_back(query, inner));
    }
    match query.class() {
        MeasurementClass::All => hs_all(query),
        MeasurementClass::Ppt => hs_ppt_with_tol(query, tol),
        MeasurementClass::LoStarLower => {
            let shape = query.rho().shape().expect("validated at query construction");
            let family = default_lo_star_family(shape)?;
            hs_lower_bound_from_measurements(query, &family)
        }
    }
}

fn check_unit_interval(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() || !(0.0..=1.0).contains(&v) {
        return Err(Error::param(name, format!("{v} outside [0, 1]")));
    }
    Ok(())
}

fn check_gamma_at_least_one(gamma: f64) -> Result<()> {
    if !gamma.is_finite() || gamma < 1.0 {
        return Err(Error::param(
            "gamma",
            format!("{gamma} < 1; route through the reflection identity instead"),
        ));
    }
    Ok(())
}

/// Unrestricted divergence between Werner states `w^q` and `w^p` (any local
/// dimension): `max{0, q - gamma p, (1-q) - gamma(1-p)}`.
pub fn werner_hs_analytic(p: f64, q: f64, gamma: f64) -> Result<f64> {
    check_unit_interval("p", p)?;
    check_unit_interval("q", q)?;
    check_gamma_at_least_one(gamma)?;
    Ok(0f64
        .max(q - gamma * p)
        .max((1.0 - q) - gamma * (1.0 - p)))
}

/// Measured (PPT-attained) divergence between Werner states at local
/// dimension `d`: `max{0, 2(q - gamma p)/(d+1), 1 - gamma - 2(q - gamma p)/(d+1)}`.
pub fn werner_measured_analytic(p: f64, q: f64, d: usize, gamma: f64) -> Result<f64> {
    check_unit_interval("p", p)?;
    check_unit_interval("q", q)?;
    check_gamma_at_least_one(gamma)?;
    if d < 2 {
        return Err(Error::param("d", format!("{d} < 2")));
    }
    let t = 2.0 * (q - gamma * p) / (d as f64 + 1.0);
    Ok(0f64.max(t).max(1.0 - gamma - t))
}

/// Unrestricted divergence between isotropic states `z^q` and `z^p`; the
/// expression coincides with the Werner one because both families have the
/// same two-point spectrum structure.
pub fn isotropic_hs_analytic(p: f64, q: f64, gamma: f64) -> Result<f64> {
    check_unit_interval("p", p)?;
    check_unit_interval("q", q)?;
    check_gamma_at_least_one(gamma)?;
    Ok(0f64
        .max(q - gamma * p)
        .max((1.0 - q) - gamma * (1.0 - p)))
}

/// Measured divergence between isotropic states at local dimension `d`:
/// `max{0, q - gamma p + (1 - q - gamma(1-p))/(d+1), d/(d+1) * (1 - q - gamma(1-p))}`.
pub fn isotropic_measured_analytic(p: f64, q: f64, d: usize, gamma: f64) -> Result<f64> {
    check_unit_interval("p", p)?;
    check_unit_interval("q", q)?;
    check_gamma_at_least_one(gamma)?;
    if d < 2 {
        return Err(Error::param("d", format!("{d} < 2")));
    }
    let dd = d as f64;
    let a = q - gamma * p;
    let b = 1.0 - q - gamma * (1.0 - p);
    Ok(0f64.max(a + b / (dd + 1.0)).max(dd / (dd + 1.0) * b))
}

/// The default local-diagonal effect family: the zero effect, the
/// index-correlation projector `D = sum_i |ii><ii|`, its complement, and —
/// for local dimension at most 4 — every diagonal product effect
/// `diag(a) (x) diag(b)` with 0/1 vectors `a`, `b`.
pub fn default_lo_star_family(shape: BipartiteShape) -> Result<Vec<HermitianOperator>> {
    if shape.dim_a != shape.dim_b {
        return Err(Error::param(
            "shape",
            format!("diagonal family needs equal local dimensions, got {shape}"),
        ));
    }
    let d = shape.dim_a;
    let n = shape.side();
    let mut corr = vec![0.0; n];
    for i in 0..d {
        corr[i * d + i] = 1.0;
    }
    let shaped = |diag: &[f64]| -> Result<HermitianOperator> {
        HermitianOperator::from_real_diag(diag).reshaped(Some(shape))
    };
    let mut family = vec![
        HermitianOperator::zeros(n).reshaped(Some(shape))?,
        shaped(&corr)?,
        shaped(&corr.iter().map(|x| 1.0 - x).collect::<Vec<_>>())?,
    ];
    if d <= 4 {
        for a_mask in 1u32..(1 << d) {
            for b_mask in 1u32..(1 << d) {
                let mut diag = vec![0.0; n];
                for i in 0..d {
                    if a_mask >> i & 1 == 1 {
                        for j in 0..d {
                            if b_mask >> j & 1 == 1 {
                                diag[i * d + j] = 1.0;
                            }
                        }
                    }
                }
                family.push(shaped(&diag)?);
            }
        }
    }
    Ok(family)
}

/// Certified lower bound from an explicit effect family: the maximum of
/// `Tr[M (rho - gamma sigma)]` over the zero effect, the identity, every
/// supplied effect, and every complement, minus the `(1-gamma)_+` offset.
pub fn hs_lower_bound_from_measurements(
    query: &DivergenceQuery,
    measurements: &[HermitianOperator],
) -> Result<DivergenceResult> {
    let n = query.rho().dim();
    for (k, m) in measurements.iter().enumerate() {
        if m.dim() != n {
            return Err(Error::dims(m.dim(), n, "measurement operator"));
        }
        let (lo, hi) = (m.min_eigenvalue(), m.max_eigenvalue());
        if lo < -MEASUREMENT_TOLERANCE || hi > 1.0 + MEASUREMENT_TOLERANCE {
            return Err(Error::InvalidMeasurement {
                reason: format!("operator {k}: spectrum [{lo:.3e}, {hi:.3e}] outside [0, 1]"),
            });
        }
    }
    let delta = query.deviation();
    let total = delta.trace();

    // Candidates: 0 and I are always admissible, so the bound is never
    // negative regardless of gamma.
    let mut best = 0.0f64;
    let mut best_pick = Pick::Zero;
    let mut consider = |t: f64, pick: Pick| {
        if t > best {
            best = t;
            best_pick = pick;
        }
    };
    consider(total, Pick::Identity);
    for (k, m) in measurements.iter().enumerate() {
        let t = m.hs_inner(&delta)?;
        consider(t, Pick::Listed(k));
        consider(total - t, Pick::Complement(k));
    }

    let witness = match best_pick {
        Pick::Zero => HermitianOperator::zeros(n),
        Pick::Identity => HermitianOperator::identity(n),
        Pick::Listed(k) => measurements[k].clone(),
        Pick::Complement(k) => &HermitianOperator::identity(n) - &measurements[k],
    }
    .reshaped(query.rho().shape())?;

    Ok(DivergenceResult {
        value: (best - query.offset()).max(0.0),
        dual_value: None,
        gap: None,
        method: Method::LowerBound,
        class: query.class(),
        gamma: query.gamma(),
        witness: Some(witness),
    })
}

#[derive(Clone, Copy)]
enum Pick {
    Zero,
    Identity,
    Listed(usize),
    Complement(usize),
}
