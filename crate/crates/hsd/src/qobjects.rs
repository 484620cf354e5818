//! Concrete states and channels: density matrices, Choi operators, the
//! Werner / isotropic families, depolarizing channels, and channel
//! application.
//!
//! Channels live exclusively in Choi form. For a channel N from A to B the
//! Choi operator is (id (x) N)|Gamma><Gamma| on R (x) B with R a copy of A;
//! it is PSD exactly when N is completely positive and has identity partial
//! trace over B exactly when N is trace preserving. Kraus presentations are
//! converted once at the boundary by [`ChoiOperator::from_kraus`].

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::hermlin::{
    self, max_entangled, partial_trace, partial_transpose, swap_operator, BipartiteShape,
    ComplexMatrix, HermitianOperator, OperatorJson, Subsystem,
};
use crate::{Error, Result};

/// PSD slack allowed when validating states and Choi operators.
pub const PSD_TOLERANCE: f64 = 1e-9;
/// Allowed deviation of a state's trace from one.
pub const TRACE_TOLERANCE: f64 = 1e-9;
/// Max-abs deviation allowed in the trace-preservation check Tr_B[Choi] = I.
pub const TP_TOLERANCE: f64 = 1e-8;
/// Operator-interval slack for measurement membership tests.
pub const MEASUREMENT_TOLERANCE: f64 = 1e-8;

/// Hermitian operator validated as a quantum state: PSD within
/// [`PSD_TOLERANCE`] and unit trace within [`TRACE_TOLERANCE`].
#[derive(Clone, PartialEq, Debug)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::with_tolerances(op, PSD_TOLERANCE, TRACE_TOLERANCE)
    }

    /// Validation with caller-chosen slack, for configs that loosen the
    /// defaults after lossy transport.
    pub fn with_tolerances(op: HermitianOperator, psd_tol: f64, trace_tol: f64) -> Result<Self> {
        let min_eig = op.min_eigenvalue();
        if min_eig < -psd_tol {
            return Err(Error::InvalidState {
                reason: format!("minimum eigenvalue {min_eig:.3e} below -{psd_tol:.1e}"),
            });
        }
        let trace = op.trace();
        if (trace - 1.0).abs() > trace_tol {
            return Err(Error::InvalidState {
                reason: format!("trace {trace} deviates from one by more than {trace_tol:.1e}"),
            });
        }
        Ok(DensityMatrix { op })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn shape(&self) -> Option<BipartiteShape> {
        self.op.shape()
    }

    /// Same state relabeled with (or stripped of) a tensor factorization.
    pub fn reshaped(&self, shape: Option<BipartiteShape>) -> Result<Self> {
        Ok(DensityMatrix {
            op: self.op.reshaped(shape)?,
        })
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix {
            op: HermitianOperator::identity(d).scale(1.0 / d as f64),
        }
    }

    /// Diagonal state from a probability vector.
    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        DensityMatrix::new(HermitianOperator::from_real_diag(p))
    }
}

/// Choi operator of a channel, on reference (x) output with the reference
/// a copy of the input system.
#[derive(Clone, PartialEq, Debug)]
pub struct ChoiOperator {
    op: HermitianOperator,
    input_dim: usize,
    output_dim: usize,
}

impl ChoiOperator {
    /// Validates complete positivity (PSD within [`PSD_TOLERANCE`]) and
    /// trace preservation (Tr_B[Choi] = I within [`TP_TOLERANCE`] max-abs).
    /// The operator must carry its (input, output) shape.
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let shape = op.shape().ok_or(Error::MissingShape {
            context: "Choi operator",
        })?;
        let min_eig = op.min_eigenvalue();
        if min_eig < -PSD_TOLERANCE {
            return Err(Error::InvalidChoi {
                reason: format!("not completely positive: minimum eigenvalue {min_eig:.3e}"),
            });
        }
        let reduced = partial_trace(&op, Subsystem::B)?;
        let residual = reduced.max_abs_diff(&HermitianOperator::identity(shape.dim_a));
        if residual > TP_TOLERANCE {
            return Err(Error::InvalidChoi {
                reason: format!("not trace preserving: |Tr_B[Choi] - I| = {residual:.3e}"),
            });
        }
        Ok(ChoiOperator {
            op,
            input_dim: shape.dim_a,
            output_dim: shape.dim_b,
        })
    }

    /// Choi operator assembled from Kraus operators (all `out x in`):
    /// sum_k (I (x) K_k) |Gamma><Gamma| (I (x) K_k)'.
    pub fn from_kraus(kraus: &[ComplexMatrix]) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidChoi {
            reason: "empty Kraus list".into(),
        })?;
        let (d_out, d_in) = (first.rows(), first.cols());
        let mut acc = ComplexMatrix::zeros(d_in * d_out, d_in * d_out);
        for k in kraus {
            if k.rows() != d_out || k.cols() != d_in {
                return Err(Error::InvalidChoi {
                    reason: "Kraus operators must share dimensions".into(),
                });
            }
            // (id (x) K)|Gamma> has components |i> (x) K|i>.
            for i in 0..d_in {
                for ip in 0..d_in {
                    for b in 0..d_out {
                        for bp in 0..d_out {
                            let v = acc.get(i * d_out + b, ip * d_out + bp)
                                + k.get(b, i) * k.get(bp, ip).conj();
                            acc.set(i * d_out + b, ip * d_out + bp, v);
                        }
                    }
                }
            }
        }
        let shape = BipartiteShape::new(d_in, d_out)?;
        ChoiOperator::new(HermitianOperator::with_shape(acc, shape)?)
    }

    /// Choi operator of the identity channel, |Gamma><Gamma|.
    pub fn identity(d: usize) -> Self {
        depolarizing_choi(0.0, d).expect("identity channel is a valid Choi operator")
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    /// The normalized Choi state Choi/d_in.
    pub fn normalized_state(&self) -> DensityMatrix {
        DensityMatrix::new(self.op.scale(1.0 / self.input_dim as f64))
            .expect("Choi/d is a valid state")
    }
}

/// Parameters of the Werner family on C^d (x) C^d.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WernerParams {
    pub p: f64,
    pub d: usize,
}

impl WernerParams {
    pub fn new(p: f64, d: usize) -> Result<Self> {
        validate_family_params(p, d)?;
        Ok(WernerParams { p, d })
    }
}

/// Parameters of the isotropic family on C^d (x) C^d.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropicParams {
    pub p: f64,
    pub d: usize,
}

impl IsotropicParams {
    pub fn new(p: f64, d: usize) -> Result<Self> {
        validate_family_params(p, d)?;
        Ok(IsotropicParams { p, d })
    }
}

fn validate_family_params(p: f64, d: usize) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("p", format!("{p} outside [0, 1]")));
    }
    if d < 2 {
        // d = 1 leaves the orthogonal mixture component undefined
        // (division by d - 1 and d^2 - 1).
        return Err(Error::param("d", format!("{d} < 2")));
    }
    Ok(())
}

/// Werner state p * Theta + (1-p) * Theta_perp with
/// Theta = (I+F)/(d(d+1)) and Theta_perp = (I-F)/(d(d-1)).
pub fn werner_state(params: &WernerParams) -> DensityMatrix {
    let (p, d) = (params.p, params.d);
    let f = swap_operator(d);
    let id = HermitianOperator::identity(d * d)
        .reshaped(Some(BipartiteShape { dim_a: d, dim_b: d }))
        .expect("d*d side");
    let df = d as f64;
    let theta = (&id + &f).scale(1.0 / (df * (df + 1.0)));
    let theta_perp = (&id - &f).scale(1.0 / (df * (df - 1.0)));
    let op = &theta.scale(p) + &theta_perp.scale(1.0 - p);
    DensityMatrix::new(op).expect("Werner mixture is a state")
}

/// Isotropic state p * Phi + (1-p) * (I - Phi)/(d^2 - 1).
pub fn isotropic_state(params: &IsotropicParams) -> DensityMatrix {
    let (p, d) = (params.p, params.d);
    let phi = max_entangled(d, true);
    let id = HermitianOperator::identity(d * d)
        .reshaped(Some(BipartiteShape { dim_a: d, dim_b: d }))
        .expect("d*d side");
    let perp = (&id - &phi).scale(1.0 / ((d * d - 1) as f64));
    let op = &phi.scale(p) + &perp.scale(1.0 - p);
    DensityMatrix::new(op).expect("isotropic mixture is a state")
}

/// Choi operator (1-p)|Gamma><Gamma| + (p/d) I of the depolarizing channel
/// that replaces its input with I/d with probability p.
pub fn depolarizing_choi(p: f64, d: usize) -> Result<ChoiOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param("p", format!("{p} outside [0, 1]")));
    }
    if d == 0 {
        return Err(Error::param("d", "dimension must be positive"));
    }
    let gamma = max_entangled(d, false);
    let id = HermitianOperator::identity(d * d)
        .reshaped(Some(BipartiteShape { dim_a: d, dim_b: d }))
        .expect("d*d side");
    let op = &gamma.scale(1.0 - p) + &id.scale(p / d as f64);
    ChoiOperator::new(op)
}

/// Channel action N(rho) = Tr_R[(rho^T (x) I_B) Choi].
pub fn apply_channel(choi: &ChoiOperator, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != choi.input_dim() {
        return Err(Error::dims(rho.dim(), choi.input_dim(), "channel input"));
    }
    let (d_in, d_out) = (choi.input_dim(), choi.output_dim());
    let out = ComplexMatrix::from_fn(d_out, d_out, |b, bp| {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..d_in {
            for ap in 0..d_in {
                acc += rho.op().entry(a, ap) * choi.op().entry(a * d_out + b, ap * d_out + bp);
            }
        }
        acc
    });
    // A square output of matching dimension keeps the input's declared
    // factorization; anything else leaves the output unshaped.
    let shape = if d_out == d_in { rho.shape() } else { None };
    let op = HermitianOperator::new(out)?.reshaped(shape)?;
    DensityMatrix::new(op)
}

/// Channel action on the A factor of a bipartite state: (id_R (x) N)(rho_RA).
/// The output carries shape (dim R, output dim).
pub fn apply_channel_to_bipartite(
    choi: &ChoiOperator,
    rho_ra: &DensityMatrix,
) -> Result<DensityMatrix> {
    let shape = rho_ra.shape().ok_or(Error::MissingShape {
        context: "bipartite channel input",
    })?;
    if shape.dim_b != choi.input_dim() {
        return Err(Error::dims(shape.dim_b, choi.input_dim(), "channel input"));
    }
    let (d_r, d_a, d_b) = (shape.dim_a, choi.input_dim(), choi.output_dim());
    let side = d_r * d_b;
    let out = ComplexMatrix::from_fn(side, side, |row, col| {
        let (r, b) = (row / d_b, row % d_b);
        let (rp, bp) = (col / d_b, col % d_b);
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..d_a {
            for ap in 0..d_a {
                acc += rho_ra.op().entry(r * d_a + a, rp * d_a + ap)
                    * choi.op().entry(a * d_b + b, ap * d_b + bp);
            }
        }
        acc
    });
    let op = HermitianOperator::with_shape(out, BipartiteShape::new(d_r, d_b)?)?;
    DensityMatrix::new(op)
}

/// Outcome of a PPT-measurement membership test.
#[derive(Clone, Debug)]
pub struct PptCheck {
    pub ok: bool,
    /// Human-readable descriptions of every violated bound.
    pub violations: Vec<String>,
}

/// Tests 0 <= M <= I and 0 <= T_B(M) <= I, each within
/// [`MEASUREMENT_TOLERANCE`], and reports which bounds fail.
pub fn is_ppt_measurement(m: &HermitianOperator) -> Result<PptCheck> {
    if m.shape().is_none() {
        return Err(Error::MissingShape {
            context: "PPT membership test",
        });
    }
    let tol = MEASUREMENT_TOLERANCE;
    let mut violations = Vec::new();
    let mut check = |label: &str, x: &HermitianOperator| {
        let (vals, _) = hermlin::hermitian_eig(x);
        let (max, min) = (vals[0], *vals.last().expect("nonempty"));
        if min < -tol {
            violations.push(format!("{label} has eigenvalue {min:.6e} < 0"));
        }
        if max > 1.0 + tol {
            violations.push(format!("{label} has eigenvalue {max:.6e} > 1"));
        }
    };
    check("M", m);
    check("T_B(M)", &partial_transpose(m, Subsystem::B)?);
    Ok(PptCheck {
        ok: violations.is_empty(),
        violations,
    })
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.op.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let op = HermitianOperator::deserialize(deserializer)?;
        DensityMatrix::new(op).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct ChoiJson {
    rows: usize,
    cols: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
    dim_in: usize,
    dim_out: usize,
}

impl Serialize for ChoiOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let base = OperatorJson::of_matrix(self.op.matrix(), None);
        ChoiJson {
            rows: base.rows,
            cols: base.cols,
            re: base.re,
            im: base.im,
            dim_in: self.input_dim,
            dim_out: self.output_dim,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ChoiOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = ChoiJson::deserialize(deserializer)?;
        let base = OperatorJson {
            rows: raw.rows,
            cols: raw.cols,
            re: raw.re,
            im: raw.im,
            dim_a: Some(raw.dim_in),
            dim_b: Some(raw.dim_out),
        };
        let (m, shape) = base.into_matrix().map_err(serde::de::Error::custom)?;
        let op = HermitianOperator::with_shape(m, shape.expect("shape fields set"))
            .map_err(serde::de::Error::custom)?;
        ChoiOperator::new(op).map_err(serde::de::Error::custom)
    }
}
