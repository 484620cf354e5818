//! Channel-level hockey-stick divergences.
//!
//! For channels `P, Q : A -> B` the divergence optimizes over
//! reference-assisted inputs,
//!
//! ```text
//! E_gamma^M(P || Q) = sup_{rho_RA} E_gamma^M(P(rho_RA) || Q(rho_RA)),
//! ```
//!
//! with `R` isomorphic to `A` (pure inputs suffice, so a larger reference
//! adds nothing). The supremum folds into a single SDP over a Choi-like
//! variable `Omega` on `R (x) B` and a reference state `rho_R`:
//!
//! ```text
//! sup { Tr[Omega (C_P - gamma C_Q)] :
//!       Tr[rho_R] = 1, rho_R >= 0, 0 <= Omega <= rho_R (x) I_B
//!       (PPT adds 0 <= T_B(Omega) <= rho_R (x) I_B) }
//! ```
//!
//! where `C_P`, `C_Q` are the unnormalized Choi operators. For jointly
//! covariant pairs with an irreducible input representation the maximally
//! entangled input is optimal and the whole computation collapses to a
//! state divergence between the normalized Choi states; depolarizing pairs
//! additionally have closed forms in both classes.

use serde::{Deserialize, Serialize};

use crate::divergence::{hs_measured_with_tol, DivergenceQuery, DivergenceResult, MeasurementClass, Method};
use crate::hermlin::{
    hermitian_eig, partial_trace, positive_part, tensor, BipartiteShape, ComplexMatrix,
    HermitianOperator, Subsystem,
};
use crate::qobjects::ChoiOperator;
use crate::sdp::{normalized_gap, AffineExpr, SdpProblem, SuperopKind, VarId};
use crate::{sdp, Error, Result};

/// A validated channel divergence instance: two channels with matching
/// input and output dimensions and `gamma >= 1`.
#[derive(Clone, Debug)]
pub struct ChannelPair {
    p: ChoiOperator,
    q: ChoiOperator,
    gamma: f64,
}

impl ChannelPair {
    pub fn new(p: ChoiOperator, q: ChoiOperator, gamma: f64) -> Result<Self> {
        if p.input_dim() != q.input_dim() {
            return Err(Error::dims(p.input_dim(), q.input_dim(), "channel inputs"));
        }
        if p.output_dim() != q.output_dim() {
            return Err(Error::dims(p.output_dim(), q.output_dim(), "channel outputs"));
        }
        if !gamma.is_finite() || gamma < 1.0 {
            return Err(Error::param(
                "gamma",
                format!("{gamma} < 1; channel divergences are defined for gamma >= 1"),
            ));
        }
        Ok(ChannelPair { p, q, gamma })
    }

    pub fn p(&self) -> &ChoiOperator {
        &self.p
    }

    pub fn q(&self) -> &ChoiOperator {
        &self.q
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn input_dim(&self) -> usize {
        self.p.input_dim()
    }

    fn output_dim(&self) -> usize {
        self.p.output_dim()
    }

    /// `C_P - gamma C_Q` on `R (x) B`, carrying the (input, output) shape.
    fn deviation(&self) -> HermitianOperator {
        self.p.op() - &self.q.op().scale(self.gamma)
    }
}

/// Caller-supplied symmetry assertion. Joint covariance of a channel pair
/// under a group representation cannot be checked from the Chois alone, so
/// the shortcut of [`channel_hs_via_covariance`] trusts this declaration.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CovarianceDeclaration {
    pub covariant: bool,
    pub irreducible_input_rep: bool,
}

impl CovarianceDeclaration {
    pub fn new(covariant: bool, irreducible_input_rep: bool) -> Result<Self> {
        if irreducible_input_rep && !covariant {
            return Err(Error::param(
                "irreducible_input_rep",
                "an irreducible input representation presupposes covariance".to_string(),
            ));
        }
        Ok(CovarianceDeclaration {
            covariant,
            irreducible_input_rep,
        })
    }
}

fn channel_problem(pair: &ChannelPair, ppt: bool) -> Result<(SdpProblem, VarId)> {
    let shape = BipartiteShape::new(pair.input_dim(), pair.output_dim())?;
    let n = shape.side();
    let mut b = SdpProblem::builder();
    let omega = b.variable_shaped("Omega", shape);
    let rho = b.variable("rho_R", pair.input_dim());
    b.maximize_term(pair.deviation(), omega);
    b.constrain_psd(
        "rho x I - Omega",
        AffineExpr::zero(n)
            .plus(rho, 1.0, vec![SuperopKind::TensorIdentityRight(pair.output_dim())])
            .plus_var(omega, -1.0),
    );
    // Tr[rho_R] viewed as a partial trace of the (1, d_in)-shaped variable.
    let scalar = BipartiteShape::new(1, pair.input_dim())?;
    b.constrain_eq(
        "trace",
        AffineExpr::from_const(HermitianOperator::from_real_diag(&[-1.0]))
            .plus(rho, 1.0, vec![SuperopKind::PartialTraceB(scalar)]),
    );
    if ppt {
        b.constrain_psd(
            "T_B(Omega)",
            AffineExpr::zero(n).plus(omega, 1.0, vec![SuperopKind::PartialTransposeB(shape)]),
        );
        b.constrain_psd(
            "rho x I - T_B(Omega)",
            AffineExpr::zero(n)
                .plus(rho, 1.0, vec![SuperopKind::TensorIdentityRight(pair.output_dim())])
                .plus(omega, -1.0, vec![SuperopKind::PartialTransposeB(shape)]),
        );
    }
    Ok((b.build()?, rho))
}

/// `V f(diag) V'` from an eigendecomposition.
fn spectral_map(vals: &[f64], vecs: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let n = vals.len();
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| vecs.get(i, j) * f(vals[j]));
    &scaled * &vecs.dagger()
}

/// Nearest density matrix in spirit: clamp negative eigenvalues and
/// renormalize the trace. `None` when nothing positive remains.
fn clean_state(rho: &HermitianOperator) -> Option<HermitianOperator> {
    let (vals, vecs) = hermitian_eig(rho);
    let mass: f64 = vals.iter().map(|v| v.max(0.0)).sum();
    if mass <= 0.0 {
        return None;
    }
    HermitianOperator::new(spectral_map(&vals, &vecs, |v| v.max(0.0) / mass)).ok()
}

/// Inner value for a fixed reference state: with `B = rho (x) I`,
/// `f(rho) = sup { Tr[Omega D] : 0 <= Omega <= B }` is the sum of positive
/// eigenvalues of `B^(1/2) D B^(1/2)`.
fn reference_value_at(pair: &ChannelPair, rho: &HermitianOperator) -> Result<f64> {
    let (vals, vecs) = hermitian_eig(rho);
    let root = HermitianOperator::new(spectral_map(&vals, &vecs, |v| v.max(0.0).sqrt()))?;
    let w = tensor(&root, &HermitianOperator::identity(pair.output_dim()));
    let weighted = &(w.matrix() * pair.deviation().matrix()) * w.matrix();
    Ok(positive_part(&HermitianOperator::new(weighted)?).trace())
}

/// `f(rho)` together with its supergradient `G = Tr_B[Z*]`, where
/// `Z* = B^(-1/2) (B^(1/2) D B^(1/2))_+ B^(-1/2)` attains the dual form
/// `f(rho) = min { Tr[B Z] : Z >= D, Z >= 0 }`. Homogeneity gives
/// `Tr[rho G] = f(rho)` exactly, so `lambda_max(G) - f(rho)` bounds the
/// distance to the channel optimum from above.
fn reference_value_gradient(
    pair: &ChannelPair,
    rho: &HermitianOperator,
) -> Result<(f64, HermitianOperator)> {
    let shape = BipartiteShape::new(pair.input_dim(), pair.output_dim())?;
    let (vals, vecs) = hermitian_eig(rho);
    let root = HermitianOperator::new(spectral_map(&vals, &vecs, |v| v.max(0.0).sqrt()))?;
    let cut = 1e-14;
    let root_inv = HermitianOperator::new(spectral_map(&vals, &vecs, |v| {
        if v > cut {
            1.0 / v.sqrt()
        } else {
            0.0
        }
    }))?;
    let eye = HermitianOperator::identity(pair.output_dim());
    let w = tensor(&root, &eye);
    let winv = tensor(&root_inv, &eye);
    let weighted = HermitianOperator::new(&(w.matrix() * pair.deviation().matrix()) * w.matrix())?;
    let plus = positive_part(&weighted);
    let zstar = HermitianOperator::new(&(winv.matrix() * plus.matrix()) * winv.matrix())?
        .reshaped(Some(shape))?;
    Ok((plus.trace(), partial_trace(&zstar, Subsystem::B)?))
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
fn golden_max(mut lo: f64, mut hi: f64, rounds: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..rounds {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Exact re-optimization of the channel value starting from the solver's
/// reference state. Interior-point iterates on degenerate instances stall
/// with a first-order-accurate reference; `f` is concave in `rho` (it is a
/// minimum of linear functions), so ascent along the traceless part of its
/// supergradient with an exact line search recovers the remaining digits,
/// and the certificate `lambda_max(G) - f` says when to stop.
fn exact_reference_value(pair: &ChannelPair, rho: &HermitianOperator) -> Result<f64> {
    let mut state = match clean_state(rho) {
        Some(s) => s,
        None => return Ok(0.0),
    };
    let n = state.dim();
    let (mut value, mut grad) = reference_value_gradient(pair, &state)?;
    let mut best = value;
    for _ in 0..30 {
        let (gvals, _) = hermitian_eig(&grad);
        if gvals[0] - value <= 1e-10 * (1.0 + value.abs()) {
            break;
        }
        let centered = &grad - &HermitianOperator::identity(n).scale(grad.trace() / n as f64);
        let norm = centered.frobenius_norm();
        if norm < 1e-15 {
            break;
        }
        let direction = centered.scale(1.0 / norm);
        let (step, stepped) = golden_max(0.0, 0.6, 40, |t| {
            let candidate = &state + &direction.scale(t);
            clean_state(&candidate)
                .and_then(|s| reference_value_at(pair, &s).ok())
                .unwrap_or(f64::NEG_INFINITY)
        });
        if !(stepped > value + 1e-15) {
            break;
        }
        state = match clean_state(&(&state + &direction.scale(step))) {
            Some(s) => s,
            None => break,
        };
        let refreshed = reference_value_gradient(pair, &state)?;
        value = refreshed.0;
        grad = refreshed.1;
        best = best.max(value);
    }
    Ok(best)
}

fn solve_channel(
    pair: &ChannelPair,
    ppt: bool,
    tol: f64,
) -> Result<DivergenceResult> {
    let (problem, rho) = channel_problem(pair, ppt)?;
    let solution = problem.solve_relaxed(tol)?;
    let mut value = solution.primal_value.max(0.0);
    let mut gap = solution.gap;
    if !ppt {
        // Polish: re-optimize the unrestricted inner problem exactly at the
        // returned reference state. This is always a feasible primal value,
        // so taking the max keeps the (value, dual) bracket valid.
        value = value.max(exact_reference_value(pair, solution.variable(rho))?);
        gap = gap.min(normalized_gap(value, solution.dual_value));
    }
    Ok(DivergenceResult {
        value,
        dual_value: Some(solution.dual_value),
        gap: Some(gap),
        method: Method::SdpPrimalDual,
        class: if ppt {
            MeasurementClass::Ppt
        } else {
            MeasurementClass::All
        },
        gamma: pair.gamma(),
        witness: None,
    })
}

/// Channel divergence with unrestricted output measurements, as one SDP.
/// The reported dual value is the objective of the companion program
/// `inf{mu : C_P - gamma C_Q <= Z, Tr_B[Z] <= mu I, Z >= 0}`.
pub fn channel_hs_all(pair: &ChannelPair) -> Result<DivergenceResult> {
    channel_hs_all_with_tol(pair, sdp::DEFAULT_TOLERANCE)
}

pub fn channel_hs_all_with_tol(pair: &ChannelPair, tol: f64) -> Result<DivergenceResult> {
    solve_channel(pair, false, tol)
}

/// Channel divergence with PPT output measurements: the same program with
/// the partial transpose of `Omega` boxed by the same operator bounds.
pub fn channel_hs_ppt(pair: &ChannelPair) -> Result<DivergenceResult> {
    channel_hs_ppt_with_tol(pair, sdp::DEFAULT_TOLERANCE)
}

pub fn channel_hs_ppt_with_tol(pair: &ChannelPair, tol: f64) -> Result<DivergenceResult> {
    solve_channel(pair, true, tol)
}

fn check_depolarizing_params(q: f64, p: f64, d: usize, gamma: f64) -> Result<()> {
    for (name, v) in [("q", q), ("p", p)] {
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(Error::param(name, format!("{v} outside [0, 1]")));
        }
    }
    if d < 2 {
        return Err(Error::param("d", format!("{d} < 2")));
    }
    if !gamma.is_finite() || gamma < 1.0 {
        return Err(Error::param("gamma", format!("{gamma} < 1")));
    }
    Ok(())
}

/// Closed form for `E_gamma^all` between depolarizing channels with
/// full-depolarization weights `q` (first argument) and `p`:
/// `max{0, (1-q) - gamma(1-p) + (q - gamma p)/d^2, (q - gamma p)(1 - 1/d^2)}`.
pub fn depolarizing_channel_all_analytic(q: f64, p: f64, d: usize, gamma: f64) -> Result<f64> {
    check_depolarizing_params(q, p, d, gamma)?;
    let dd = (d * d) as f64;
    let a = q - gamma * p;
    Ok(0f64
        .max((1.0 - q) - gamma * (1.0 - p) + a / dd)
        .max(a - a / dd))
}

/// Closed form for `E_gamma^ppt` between depolarizing channels:
/// `max{0, 1 - q - gamma(1-p) + (q - gamma p)/d, (d-1)/d (q - gamma p)}`.
pub fn depolarizing_channel_ppt_analytic(q: f64, p: f64, d: usize, gamma: f64) -> Result<f64> {
    check_depolarizing_params(q, p, d, gamma)?;
    let dd = d as f64;
    let a = q - gamma * p;
    Ok(0f64
        .max(1.0 - q - gamma * (1.0 - p) + a / dd)
        .max((dd - 1.0) / dd * a))
}

/// Shortcut for jointly covariant pairs: with an irreducible input
/// representation the maximally entangled input is optimal, so the channel
/// divergence equals the state divergence between the normalized Choi
/// states. The declaration is the caller's assertion and is not verified;
/// the result's method field records that this reduction was used.
pub fn channel_hs_via_covariance(
    pair: &ChannelPair,
    decl: &CovarianceDeclaration,
    class: MeasurementClass,
) -> Result<DivergenceResult> {
    channel_hs_via_covariance_with_tol(pair, decl, class, sdp::DEFAULT_TOLERANCE)
}

pub fn channel_hs_via_covariance_with_tol(
    pair: &ChannelPair,
    decl: &CovarianceDeclaration,
    class: MeasurementClass,
    tol: f64,
) -> Result<DivergenceResult> {
    if !decl.irreducible_input_rep {
        return Err(Error::param(
            "irreducible_input_rep",
            "covariance reduction needs an irreducible input representation".to_string(),
        ));
    }
    if !matches!(class, MeasurementClass::All | MeasurementClass::Ppt) {
        return Err(Error::param(
            "measurement_class",
            format!("covariance reduction supports all/ppt, got {class}"),
        ));
    }
    let query = DivergenceQuery::new(
        pair.p.normalized_state(),
        pair.q.normalized_state(),
        pair.gamma(),
        class,
    )?;
    let mut result = hs_measured_with_tol(&query, tol)?;
    result.method = Method::CovarianceReduction;
    Ok(result)
}
