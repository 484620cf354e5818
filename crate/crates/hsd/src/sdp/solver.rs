//! Nesterov-Todd primal-dual interior-point solver on the real symmetric
//! embedding. See the parent module for the problem shape.
//!
//! Layout of the compiled problem:
//!
//! - each Hermitian variable is coordinatized over the orthonormal basis of
//!   `hermitian_basis`, giving one real degree of freedom per basis element;
//! - every PSD constraint (including the automatic `X >= 0` block per
//!   variable) becomes an embedded real block `S_j = K_j + sum_k y_k A_jk`
//!   with the `A_jk` stored as sparse triplets;
//! - equality constraints are projected onto the same basis of their side,
//!   giving dense rows `E y = f` without any embedding doubling.
//!
//! The iteration is a Mehrotra-flavored predictor-corrector on the pair
//!
//! ```text
//! max  b'y   s.t.  K_j + A_j(y) >= 0,  E y = f
//! min  sum_j <Z_j, K_j> - nu'f   s.t.
//!      b_k + sum_j <Z_j, A_jk> + (E'nu)_k = 0,  Z_j >= 0
//! ```
//!
//! with scaled complementarity `dZ + W^-1 dS W^-1 = sigma*mu*S^-1 - Z` and
//! the Schur system solved through one Cholesky factorization per iteration
//! (shared by the predictor and corrector passes). Iterates are re-projected
//! onto the embedded-Hermitian subalgebra every iteration so rounding cannot
//! drift them off it. Everything is deterministic: no randomization, fixed
//! orderings throughout.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use super::{
    apply_chain, hermitian_basis, normalized_gap, Relation, SdpProblem, SdpSolution, SdpStatus,
    MAX_ITERATIONS,
};
use crate::hermlin::{embed_matrix, extract_embedding, ComplexMatrix, HermitianOperator};

/// Fraction of the step to the cone boundary actually taken.
const STEP_SHRINK: f64 = 0.98;
/// Iterate magnitude (relative to the data scale) treated as divergence.
const DIVERGENCE_FACTOR: f64 = 1e10;
/// Steps below this for `STALL_LIMIT` consecutive iterations abort the solve.
const STALL_STEP: f64 = 1e-10;
const STALL_LIMIT: usize = 5;
/// The worst residual must shrink by at least this factor within
/// `STAGNATION_LIMIT` iterations or the solve is abandoned as stuck at the
/// instance's attainable precision.
const STAGNATION_FACTOR: f64 = 0.99;
const STAGNATION_LIMIT: usize = 15;

struct CoordAction {
    coord: usize,
    /// Embedded `A_{j,coord}` as (row, col, value) triplets.
    trips: Vec<(usize, usize, f64)>,
}

struct CompiledBlock {
    label: String,
    /// Complex side; the embedded block is twice that.
    cdim: usize,
    edim: usize,
    konst: DMatrix<f64>,
    konst_norm: f64,
    actions: Vec<CoordAction>,
}

struct CompiledEq {
    e: DMatrix<f64>,
    f: DVector<f64>,
    /// (constraint label, row offset, complex side) per equality constraint.
    spans: Vec<(String, usize, usize)>,
}

struct Compiled {
    m: usize,
    var_offset: Vec<usize>,
    var_cdim: Vec<usize>,
    b: DVector<f64>,
    blocks: Vec<CompiledBlock>,
    eq: CompiledEq,
}

/// Real part of Tr[a b]; exact for the Hermitian pairs used here.
fn re_tr(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (a.get(i, j) * b.get(j, i)).re;
        }
    }
    s
}

/// Tr[M A] for symmetric `m` and triplet-stored `A`.
fn tr_with(m: &DMatrix<f64>, trips: &[(usize, usize, f64)]) -> f64 {
    trips.iter().map(|&(r, c, a)| a * m[(c, r)]).sum()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Projects an embedded iterate back onto the image of Hermitian matrices.
fn resym(m: &DMatrix<f64>, cdim: usize) -> DMatrix<f64> {
    let x = extract_embedding(m, cdim);
    let h = (&x + &x.dagger()).scale(0.5);
    embed_matrix(&h)
}

fn triplets(m: &DMatrix<f64>) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let v = m[(r, c)];
            if v != 0.0 {
                out.push((r, c, v));
            }
        }
    }
    out
}

fn compile(problem: &SdpProblem) -> Compiled {
    let vars = problem.vars();
    let mut var_offset = Vec::with_capacity(vars.len());
    let mut var_cdim = Vec::with_capacity(vars.len());
    let mut m = 0usize;
    for v in vars {
        var_offset.push(m);
        var_cdim.push(v.dim);
        m += v.dim * v.dim;
    }

    let mut dims: BTreeSet<usize> = var_cdim.iter().copied().collect();
    for c in problem.constraints() {
        if c.rel == Relation::EqZero {
            dims.insert(c.expr.side());
        }
    }
    let bases: BTreeMap<usize, Vec<ComplexMatrix>> = dims
        .into_iter()
        .map(|n| (n, hermitian_basis(n)))
        .collect();
    let basis_for = |n: usize| -> &[ComplexMatrix] { &bases[&n] };

    let mut b = DVector::zeros(m);
    for (c, id) in problem.objective() {
        let vidx = problem.var_index(*id);
        let basis = basis_for(var_cdim[vidx]);
        for (k, g) in basis.iter().enumerate() {
            b[var_offset[vidx] + k] += re_tr(c.matrix(), g);
        }
    }

    // Complex-valued images of each coordinate under a constraint expression,
    // keyed by global coordinate. Shared by PSD blocks and equality rows.
    let images_of = |expr: &super::AffineExpr| -> Vec<(usize, ComplexMatrix)> {
        let mut acc: BTreeMap<usize, ComplexMatrix> = BTreeMap::new();
        for term in expr.terms() {
            let vidx = problem.var_index(term.var);
            let basis = basis_for(var_cdim[vidx]);
            for (k, g) in basis.iter().enumerate() {
                let img = apply_chain(&term.chain, g)
                    .expect("chain validated at build time")
                    .scale(term.coeff);
                if img.max_abs() == 0.0 {
                    continue;
                }
                let coord = var_offset[vidx] + k;
                match acc.remove(&coord) {
                    Some(prev) => {
                        acc.insert(coord, &prev + &img);
                    }
                    None => {
                        acc.insert(coord, img);
                    }
                }
            }
        }
        acc.into_iter().collect()
    };

    let mut blocks = Vec::new();
    for (vidx, v) in vars.iter().enumerate() {
        let n = v.dim;
        let basis = basis_for(n);
        let actions = basis
            .iter()
            .enumerate()
            .map(|(k, g)| CoordAction {
                coord: var_offset[vidx] + k,
                trips: triplets(&embed_matrix(g)),
            })
            .collect();
        blocks.push(CompiledBlock {
            label: format!("{} >= 0", v.label),
            cdim: n,
            edim: 2 * n,
            konst: DMatrix::zeros(2 * n, 2 * n),
            konst_norm: 0.0,
            actions,
        });
    }

    let mut eq_rows = 0usize;
    let mut eq_parts: Vec<(String, usize, Vec<(usize, ComplexMatrix)>, &super::AffineExpr)> =
        Vec::new();
    for c in problem.constraints() {
        match c.rel {
            Relation::PsdGeqZero => {
                let side = c.expr.side();
                let images = images_of(&c.expr);
                let konst = embed_matrix(c.expr.constant().matrix());
                let konst_norm = konst.norm();
                let actions = images
                    .into_iter()
                    .map(|(coord, img)| CoordAction {
                        coord,
                        trips: triplets(&embed_matrix(&img)),
                    })
                    .collect();
                blocks.push(CompiledBlock {
                    label: c.label.clone(),
                    cdim: side,
                    edim: 2 * side,
                    konst,
                    konst_norm,
                    actions,
                });
            }
            Relation::EqZero => {
                let side = c.expr.side();
                let images = images_of(&c.expr);
                eq_parts.push((c.label.clone(), eq_rows, images, &c.expr));
                eq_rows += side * side;
            }
        }
    }

    let mut e = DMatrix::zeros(eq_rows, m);
    let mut f = DVector::zeros(eq_rows);
    let mut spans = Vec::new();
    for (label, row0, images, expr) in eq_parts {
        let side = expr.side();
        let basis = basis_for(side);
        for (r, g) in basis.iter().enumerate() {
            f[row0 + r] = -re_tr(expr.constant().matrix(), g);
            for (coord, img) in &images {
                e[(row0 + r, *coord)] = re_tr(img, g);
            }
        }
        spans.push((label, row0, side));
    }

    Compiled {
        m,
        var_offset,
        var_cdim,
        b,
        blocks,
        eq: CompiledEq { e, f, spans },
    }
}

struct Scaling {
    winv: DMatrix<f64>,
    sinv: DMatrix<f64>,
}

struct SymF {
    u: DMatrix<f64>,
    lam: DVector<f64>,
}

fn sym_eigen(m: &DMatrix<f64>) -> SymF {
    let se = SymmetricEigen::new(m.clone());
    SymF {
        u: se.eigenvectors,
        lam: se.eigenvalues,
    }
}

fn spectral_fn(sf: &SymF, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = sf.lam.len();
    let mut scaled = sf.u.clone();
    for j in 0..n {
        let fj = f(sf.lam[j]);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    &scaled * sf.u.transpose()
}

/// Nesterov-Todd scaling from the current (S, Z); also exposes S^-1 for the
/// corrector target. Eigenvalues are floored at a tiny positive value; loss
/// of definiteness shows up as stalling and is handled by the outer loop.
fn nt_scaling(s: &DMatrix<f64>, z: &DMatrix<f64>) -> Scaling {
    let floor = f64::MIN_POSITIVE;
    let es = sym_eigen(s);
    let shalf = spectral_fn(&es, |l| l.max(floor).sqrt());
    let sinvhalf = spectral_fn(&es, |l| 1.0 / l.max(floor).sqrt());
    let sinv = &sinvhalf * &sinvhalf;
    let t = sym(&(&shalf * z * &shalf));
    let et = sym_eigen(&t);
    let thalf = spectral_fn(&et, |l| l.max(floor).sqrt());
    let winv = sym(&(&sinvhalf * thalf * &sinvhalf));
    Scaling { winv, sinv }
}

/// Largest alpha with `p + alpha*dp` still PSD; infinite when the direction
/// never leaves the cone, zero when `p` is numerically on the boundary.
fn max_step(p: &DMatrix<f64>, dp: &DMatrix<f64>) -> f64 {
    let ch = match Cholesky::new(p.clone()) {
        Some(ch) => ch,
        None => return 0.0,
    };
    let l = ch.l();
    let a = match l.solve_lower_triangular(dp) {
        Some(a) => a,
        None => return 0.0,
    };
    let g = match l.solve_lower_triangular(&a.transpose()) {
        Some(g) => g,
        None => return 0.0,
    };
    let lam_min = sym_eigen(&sym(&g)).lam.min();
    if lam_min >= -1e-13 {
        f64::INFINITY
    } else {
        -1.0 / lam_min
    }
}

fn cholesky_with_jitter(mut h: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let n = h.nrows();
    if let Some(ch) = Cholesky::new(h.clone()) {
        return Some(ch);
    }
    let scale = h.trace().abs() / n as f64 + 1.0;
    let mut jitter = 1e-12 * scale;
    for _ in 0..3 {
        for i in 0..n {
            h[(i, i)] += jitter;
        }
        if let Some(ch) = Cholesky::new(h.clone()) {
            return Some(ch);
        }
        jitter *= 100.0;
    }
    None
}

fn block_expr(blk: &CompiledBlock, y: &DVector<f64>) -> DMatrix<f64> {
    let mut m = blk.konst.clone();
    for act in &blk.actions {
        let yk = y[act.coord];
        if yk != 0.0 {
            for &(r, c, a) in &act.trips {
                m[(r, c)] += yk * a;
            }
        }
    }
    m
}

fn assemble_h(comp: &Compiled, scal: &[Scaling]) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(comp.m, comp.m);
    for (blk, sc) in comp.blocks.iter().zip(scal) {
        let w = &sc.winv;
        for (i, act_i) in blk.actions.iter().enumerate() {
            for act_l in &blk.actions[i..] {
                let mut v = 0.0;
                for &(p, q, a) in &act_i.trips {
                    for &(r, s, bb) in &act_l.trips {
                        v += a * bb * w[(q, r)] * w[(s, p)];
                    }
                }
                let (ci, cl) = (act_i.coord, act_l.coord);
                h[(ci, cl)] += v;
                if ci != cl {
                    h[(cl, ci)] += v;
                }
            }
        }
    }
    h
}

struct Direction {
    dy: DVector<f64>,
    dnu: DVector<f64>,
    ds: Vec<DMatrix<f64>>,
    dz: Vec<DMatrix<f64>>,
}

struct NewtonContext<'a> {
    comp: &'a Compiled,
    scal: &'a [Scaling],
    hch: Cholesky<f64, Dyn>,
    /// Cholesky of the equality Schur complement E H^-1 E', when p > 0.
    mch: Option<Cholesky<f64, Dyn>>,
    rp: &'a [DMatrix<f64>],
    rd: &'a DVector<f64>,
    re: &'a DVector<f64>,
}

impl NewtonContext<'_> {
    fn direction(&self, rc: &[DMatrix<f64>]) -> Option<Direction> {
        let comp = self.comp;
        // g_k = rd_k + sum_j <Rc_j + W^-1 Rp_j W^-1, A_jk>.
        let mut g = self.rd.clone();
        for ((blk, sc), (rcj, rpj)) in comp
            .blocks
            .iter()
            .zip(self.scal)
            .zip(rc.iter().zip(self.rp))
        {
            let q = rcj + sym(&(&sc.winv * rpj * &sc.winv));
            for act in &blk.actions {
                g[act.coord] += tr_with(&q, &act.trips);
            }
        }

        let p = comp.eq.f.len();
        let (dy, dnu) = if p == 0 {
            (self.hch.solve(&g), DVector::zeros(0))
        } else {
            let hg = self.hch.solve(&g);
            let rhs = self.re - &comp.eq.e * &hg;
            let dnu = self.mch.as_ref()?.solve(&rhs);
            let dy = self.hch.solve(&(&g + comp.eq.e.tr_mul(&dnu)));
            (dy, dnu)
        };

        let mut ds = Vec::with_capacity(comp.blocks.len());
        let mut dz = Vec::with_capacity(comp.blocks.len());
        for ((blk, sc), (rcj, rpj)) in comp
            .blocks
            .iter()
            .zip(self.scal)
            .zip(rc.iter().zip(self.rp))
        {
            let mut a_dy = DMatrix::zeros(blk.edim, blk.edim);
            for act in &blk.actions {
                let yk = dy[act.coord];
                if yk != 0.0 {
                    for &(r, c, a) in &act.trips {
                        a_dy[(r, c)] += yk * a;
                    }
                }
            }
            let dsj = &a_dy - rpj;
            let dzj = rcj - &sym(&(&sc.winv * &dsj * &sc.winv));
            ds.push(dsj);
            dz.push(dzj);
        }
        Some(Direction { dy, dnu, ds, dz })
    }
}

pub(super) fn solve(problem: &SdpProblem, tol: f64) -> SdpSolution {
    let comp = compile(problem);
    let nblocks = comp.blocks.len();
    let total_edim: f64 = comp.blocks.iter().map(|b| b.edim as f64).sum();
    let p = comp.eq.f.len();
    let b_norm = comp.b.norm();
    let f_norm = comp.eq.f.norm();
    let scale0 = 1.0
        + comp
            .blocks
            .iter()
            .map(|b| b.konst_norm)
            .fold(0.0, f64::max)
        + b_norm;

    let mut y = DVector::zeros(comp.m);
    let mut nu = DVector::zeros(p);
    let mut s: Vec<DMatrix<f64>> = comp
        .blocks
        .iter()
        .map(|blk| DMatrix::identity(blk.edim, blk.edim) * (1.0 + blk.konst_norm))
        .collect();
    let mut z: Vec<DMatrix<f64>> = comp
        .blocks
        .iter()
        .map(|blk| DMatrix::identity(blk.edim, blk.edim) * (1.0 + comp.b.amax()))
        .collect();

    let mut status = SdpStatus::NumericalLimit;
    let mut iterations = MAX_ITERATIONS;
    let mut stall = 0usize;
    let mut best = (f64::INFINITY, y.clone(), nu.clone(), z.clone());
    let mut anchor = f64::INFINITY;
    let mut stagnant = 0usize;

    for iter in 0..MAX_ITERATIONS {
        // Residuals at the current iterate.
        let rp: Vec<DMatrix<f64>> = comp
            .blocks
            .iter()
            .zip(&s)
            .map(|(blk, sj)| sj - block_expr(blk, &y))
            .collect();
        let re = &comp.eq.f - &comp.eq.e * &y;
        let mut rd = comp.b.clone();
        for (blk, zj) in comp.blocks.iter().zip(&z) {
            for act in &blk.actions {
                rd[act.coord] += tr_with(zj, &act.trips);
            }
        }
        if p > 0 {
            rd += comp.eq.e.tr_mul(&nu);
        }

        let primal = comp.b.dot(&y);
        let dual = comp
            .blocks
            .iter()
            .zip(&z)
            .map(|(blk, zj)| zj.dot(&blk.konst))
            .sum::<f64>()
            - nu.dot(&comp.eq.f);
        let gap = normalized_gap(primal, dual);
        let pinf = comp
            .blocks
            .iter()
            .zip(&rp)
            .map(|(blk, rpj)| rpj.norm() / (1.0 + blk.konst_norm))
            .fold(0.0, f64::max)
            .max(if p > 0 { re.norm() / (1.0 + f_norm) } else { 0.0 });
        let dinf = rd.norm() / (1.0 + b_norm);
        let mu = {
            let dot: f64 = s.iter().zip(&z).map(|(sj, zj)| sj.dot(zj)).sum();
            (dot / total_edim).max(f64::MIN_POSITIVE)
        };

        if !(pinf.is_finite() && dinf.is_finite() && gap.is_finite() && mu.is_finite()) {
            status = SdpStatus::NumericalLimit;
            iterations = iter;
            break;
        }
        if pinf <= tol && dinf <= tol && gap <= tol {
            status = SdpStatus::Optimal;
            iterations = iter;
            break;
        }
        let magnitude = y
            .amax()
            .max(z.iter().map(|zj| zj.amax()).fold(0.0, f64::max))
            .max(primal.abs())
            .max(dual.abs());
        if magnitude > DIVERGENCE_FACTOR * scale0 {
            // A bounded, strictly feasible pair keeps its central path inside
            // a data-scale ball; escaping it is taken as an infeasibility or
            // unboundedness certificate.
            status = SdpStatus::Infeasible;
            iterations = iter;
            break;
        }

        // Past the attainable precision of a (possibly degenerate) instance
        // the Newton systems turn ill-conditioned and can corrupt an almost
        // converged iterate. Remember the best iterate seen and give up once
        // the worst residual stops improving.
        let merit = pinf.max(dinf).max(gap);
        if merit < best.0 {
            best = (merit, y.clone(), nu.clone(), z.clone());
        }
        if merit <= STAGNATION_FACTOR * anchor {
            anchor = merit;
            stagnant = 0;
        } else {
            stagnant += 1;
            if stagnant >= STAGNATION_LIMIT {
                status = SdpStatus::NumericalLimit;
                iterations = iter;
                break;
            }
        }

        let scal: Vec<Scaling> = s.iter().zip(&z).map(|(sj, zj)| nt_scaling(sj, zj)).collect();
        let h = assemble_h(&comp, &scal);
        let hch = match cholesky_with_jitter(h) {
            Some(ch) => ch,
            None => {
                status = SdpStatus::NumericalLimit;
                iterations = iter;
                break;
            }
        };
        let mch = if p > 0 {
            let et = comp.eq.e.transpose();
            let hinv_et = hch.solve(&et);
            let schur = &comp.eq.e * &hinv_et;
            match cholesky_with_jitter(sym(&schur)) {
                Some(mch) => Some(mch),
                None => {
                    status = SdpStatus::NumericalLimit;
                    iterations = iter;
                    break;
                }
            }
        } else {
            None
        };
        let ctx = NewtonContext {
            comp: &comp,
            scal: &scal,
            hch,
            mch,
            rp: &rp,
            rd: &rd,
            re: &re,
        };

        // Predictor: pure Newton toward complementarity zero.
        let rc_aff: Vec<DMatrix<f64>> = z.iter().map(|zj| -zj).collect();
        let aff = match ctx.direction(&rc_aff) {
            Some(d) => d,
            None => {
                status = SdpStatus::NumericalLimit;
                iterations = iter;
                break;
            }
        };
        let ap_aff = s
            .iter()
            .zip(&aff.ds)
            .map(|(sj, dsj)| max_step(sj, dsj))
            .fold(f64::INFINITY, f64::min)
            .min(1.0);
        let ad_aff = z
            .iter()
            .zip(&aff.dz)
            .map(|(zj, dzj)| max_step(zj, dzj))
            .fold(f64::INFINITY, f64::min)
            .min(1.0);
        let mu_aff = {
            let dot: f64 = s
                .iter()
                .zip(&aff.ds)
                .zip(z.iter().zip(&aff.dz))
                .map(|((sj, dsj), (zj, dzj))| (sj + dsj * ap_aff).dot(&(zj + dzj * ad_aff)))
                .sum();
            (dot / total_edim).max(0.0)
        };
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        // Corrector: recentering pass reusing the factorization.
        let rc: Vec<DMatrix<f64>> = scal
            .iter()
            .zip(&z)
            .map(|(sc, zj)| &sc.sinv * (sigma * mu) - zj)
            .collect();
        let dir = match ctx.direction(&rc) {
            Some(d) => d,
            None => {
                status = SdpStatus::NumericalLimit;
                iterations = iter;
                break;
            }
        };
        let ap = s
            .iter()
            .zip(&dir.ds)
            .map(|(sj, dsj)| max_step(sj, dsj))
            .fold(f64::INFINITY, f64::min);
        let ad = z
            .iter()
            .zip(&dir.dz)
            .map(|(zj, dzj)| max_step(zj, dzj))
            .fold(f64::INFINITY, f64::min);
        let ap = (STEP_SHRINK * ap).min(1.0);
        let ad = (STEP_SHRINK * ad).min(1.0);

        y += &dir.dy * ap;
        if p > 0 {
            nu += &dir.dnu * ad;
        }
        for j in 0..nblocks {
            s[j] = resym(&(&s[j] + &dir.ds[j] * ap), comp.blocks[j].cdim);
            z[j] = resym(&(&z[j] + &dir.dz[j] * ad), comp.blocks[j].cdim);
        }

        if ap.max(ad) < STALL_STEP {
            stall += 1;
            if stall >= STALL_LIMIT {
                status = SdpStatus::NumericalLimit;
                iterations = iter + 1;
                break;
            }
        } else {
            stall = 0;
        }
    }

    if status == SdpStatus::NumericalLimit && best.0.is_finite() {
        let (_, by, bnu, bz) = best;
        return extract_solution(problem, &comp, &by, &bnu, &bz, status, iterations);
    }
    extract_solution(problem, &comp, &y, &nu, &z, status, iterations)
}

fn extract_solution(
    problem: &SdpProblem,
    comp: &Compiled,
    y: &DVector<f64>,
    nu: &DVector<f64>,
    z: &[DMatrix<f64>],
    status: SdpStatus,
    iterations: usize,
) -> SdpSolution {
    let primal = comp.b.dot(y);
    let dual = comp
        .blocks
        .iter()
        .zip(z)
        .map(|(blk, zj)| zj.dot(&blk.konst))
        .sum::<f64>()
        - nu.dot(&comp.eq.f);

    let mut primal_vars = BTreeMap::new();
    for (vidx, decl) in problem.vars().iter().enumerate() {
        let n = comp.var_cdim[vidx];
        let basis = hermitian_basis(n);
        let mut x = ComplexMatrix::zeros(n, n);
        for (k, g) in basis.iter().enumerate() {
            let yk = y[comp.var_offset[vidx] + k];
            if yk != 0.0 {
                x = &x + &g.scale(yk);
            }
        }
        let h = (&x + &x.dagger()).scale(0.5);
        let op = HermitianOperator::trusted(h, decl.shape);
        // VarId construction mirrors the builder's ordering.
        primal_vars.insert(problem.var_id_at(vidx), op);
    }

    let mut dual_vars = BTreeMap::new();
    for (blk, zj) in comp.blocks.iter().zip(z) {
        // The embedded multiplier is half the complex one.
        let raw = extract_embedding(zj, blk.cdim).scale(2.0);
        let h = (&raw + &raw.dagger()).scale(0.5);
        dual_vars.insert(blk.label.clone(), HermitianOperator::trusted(h, None));
    }
    for (label, row0, side) in &comp.eq.spans {
        let basis = hermitian_basis(*side);
        let mut x = ComplexMatrix::zeros(*side, *side);
        for (r, g) in basis.iter().enumerate() {
            let v = nu[row0 + r];
            if v != 0.0 {
                x = &x + &g.scale(v);
            }
        }
        let h = (&x + &x.dagger()).scale(0.5);
        dual_vars.insert(label.clone(), HermitianOperator::trusted(h, None));
    }

    SdpSolution {
        primal_value: primal,
        dual_value: dual,
        gap: normalized_gap(primal, dual),
        primal_vars,
        dual_vars,
        status,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{AffineExpr, SdpProblem, SdpStatus, SuperopKind};
    use super::*;
    use crate::hermlin::{hermitian_eig, BipartiteShape};
    use crate::qobjects::{werner_state, WernerParams};
    use num_complex::Complex64;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_hermitian(rng: &mut StdRng, n: usize) -> HermitianOperator {
        let raw = ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        HermitianOperator::new(&raw + &raw.dagger()).unwrap()
    }

    /// max Tr[C X] over 0 <= X <= I equals the sum of positive eigenvalues.
    fn box_program(c: &HermitianOperator) -> SdpProblem {
        let n = c.dim();
        let mut b = SdpProblem::builder();
        let x = b.variable("X", n);
        b.maximize_term(c.clone(), x);
        b.constrain_psd(
            "I - X",
            AffineExpr::from_const(HermitianOperator::identity(n)).plus_var(x, -1.0),
        );
        b.build().unwrap()
    }

    #[test]
    fn scalar_box_reaches_one() {
        let problem = box_program(&HermitianOperator::identity(1));
        let sol = problem.solve(1e-9).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.primal_value - 1.0).abs() < 1e-7);
        assert!((sol.dual_value - 1.0).abs() < 1e-7);
        assert!(sol.gap <= 1e-9);
        let x = sol.primal_vars.values().next().unwrap();
        assert!((x.entry(0, 0).re - 1.0).abs() < 1e-6);
        // Multiplier of the active box face carries the whole objective.
        let y_box = sol.dual_for("I - X").unwrap();
        assert!((y_box.entry(0, 0).re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn signed_diagonal_picks_positive_face() {
        let c = HermitianOperator::from_real_diag(&[1.0, -1.0]);
        let sol = box_program(&c).solve(1e-9).unwrap();
        assert!((sol.primal_value - 1.0).abs() < 1e-7);
        let x = sol.primal_vars.values().next().unwrap();
        assert!((x.entry(0, 0).re - 1.0).abs() < 1e-5);
        assert!(x.entry(1, 1).re.abs() < 1e-5);
        assert!(x.entry(0, 1).norm() < 1e-5);
    }

    #[test]
    fn box_value_matches_eigenvalue_oracle() {
        let mut rng = StdRng::seed_from_u64(2024);
        for n in [2usize, 2, 2, 3, 3] {
            let c = random_hermitian(&mut rng, n);
            let (vals, _) = hermitian_eig(&c);
            let oracle: f64 = vals.iter().filter(|v| **v > 0.0).sum();
            let sol = box_program(&c).solve(1e-9).unwrap();
            assert!(
                (sol.primal_value - oracle).abs() < 1e-8,
                "n={n}: {} vs oracle {oracle}",
                sol.primal_value
            );
            assert!(sol.dual_value >= sol.primal_value - 1e-8);
        }
    }

    #[test]
    fn box_value_dominates_feasible_grid() {
        // Brute-force feasible points of the 2x2 box as a lower bound.
        let mut rng = StdRng::seed_from_u64(7);
        let c = random_hermitian(&mut rng, 2);
        let sol = box_program(&c).solve(1e-9).unwrap();
        let mut best = f64::NEG_INFINITY;
        let steps = 9;
        for xi in 0..=steps {
            for yi in 0..=steps {
                for ri in -4i32..=4 {
                    for ii in -4i32..=4 {
                        let x00 = xi as f64 / steps as f64;
                        let x11 = yi as f64 / steps as f64;
                        let off = Complex64::new(ri as f64 * 0.1, ii as f64 * 0.1);
                        let mut m = ComplexMatrix::zeros(2, 2);
                        m.set(0, 0, Complex64::new(x00, 0.0));
                        m.set(1, 1, Complex64::new(x11, 0.0));
                        m.set(0, 1, off);
                        m.set(1, 0, off.conj());
                        let h = match HermitianOperator::new(m) {
                            Ok(h) => h,
                            Err(_) => continue,
                        };
                        let (vals, _) = hermitian_eig(&h);
                        if vals.iter().any(|v| *v < 0.0 || *v > 1.0) {
                            continue;
                        }
                        best = best.max(h.hs_inner(&c).unwrap());
                    }
                }
            }
        }
        assert!(sol.primal_value >= best - 1e-9);
    }

    #[test]
    fn trace_one_equality_reaches_lambda_max() {
        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..3 {
            let c = random_hermitian(&mut rng, 3);
            let (vals, _) = hermitian_eig(&c);
            let mut b = SdpProblem::builder();
            let x = b.variable("X", 3);
            b.maximize_term(c.clone(), x);
            b.constrain_eq(
                "trace",
                AffineExpr::from_const(HermitianOperator::from_real_diag(&[-1.0])).plus(
                    x,
                    1.0,
                    vec![SuperopKind::PartialTraceB(BipartiteShape { dim_a: 1, dim_b: 3 })],
                ),
            );
            let sol = b.build().unwrap().solve(1e-9).unwrap();
            assert!((sol.primal_value - vals[0]).abs() < 1e-7);
            // Multiplier convention: the dual objective is <Z,K> - nu*f, so
            // nu converges to -lambda_max here.
            let nu = sol.dual_for("trace").unwrap().entry(0, 0).re;
            assert!((nu + vals[0]).abs() < 1e-6);
            let x_opt = sol.primal_vars.values().next().unwrap();
            assert!((x_opt.trace() - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn repeated_solves_are_bit_identical() {
        let mut rng = StdRng::seed_from_u64(51);
        let c = random_hermitian(&mut rng, 3);
        let a = box_program(&c).solve(1e-8).unwrap();
        let b = box_program(&c).solve(1e-8).unwrap();
        assert_eq!(a.primal_value.to_bits(), b.primal_value.to_bits());
        assert_eq!(a.dual_value.to_bits(), b.dual_value.to_bits());
        assert_eq!(a.iterations, b.iterations);
        let xa = a.primal_vars.values().next().unwrap();
        let xb = b.primal_vars.values().next().unwrap();
        assert_eq!(xa.matrix().max_abs_diff(xb.matrix()), 0.0);
    }

    #[test]
    fn infeasible_band_is_flagged() {
        // x >= 2 and x <= 1 cannot hold together.
        let mut b = SdpProblem::builder();
        let x = b.variable("x", 1);
        b.maximize_term(HermitianOperator::identity(1), x);
        b.constrain_psd(
            "x - 2",
            AffineExpr::from_const(HermitianOperator::from_real_diag(&[-2.0])).plus_var(x, 1.0),
        );
        b.constrain_psd(
            "1 - x",
            AffineExpr::from_const(HermitianOperator::identity(1)).plus_var(x, -1.0),
        );
        let problem = b.build().unwrap();
        let sol = problem.solve_detailed(1e-8).unwrap();
        assert_ne!(sol.status, SdpStatus::Optimal);
        assert!(problem.solve(1e-8).is_err());
    }

    #[test]
    fn tolerance_outside_range_is_rejected() {
        let problem = box_program(&HermitianOperator::identity(1));
        assert!(problem.solve(2e-4).is_err());
        assert!(problem.solve(1e-11).is_err());
        assert!(problem.solve(1e-4).is_ok());
    }

    /// Optimizing Tr[M(rho - sigma)] over two-sided PPT effects separates the
    /// symmetric and antisymmetric Werner extremes at 2/3, strictly below the
    /// unrestricted value 1: the partial-transpose cap binds.
    #[test]
    fn werner_extremes_under_ppt_effects() {
        let shape = BipartiteShape { dim_a: 2, dim_b: 2 };
        let rho = werner_state(&WernerParams::new(1.0, 2).unwrap());
        let sigma = werner_state(&WernerParams::new(0.0, 2).unwrap());
        let c = rho.op() - sigma.op();

        let mut b = SdpProblem::builder();
        let m = b.variable_shaped("M", shape);
        b.maximize_term(c, m);
        b.constrain_psd(
            "I - M",
            AffineExpr::from_const(HermitianOperator::identity(4)).plus_var(m, -1.0),
        );
        b.constrain_psd(
            "T_B(M)",
            AffineExpr::zero(4).plus(m, 1.0, vec![SuperopKind::PartialTransposeB(shape)]),
        );
        b.constrain_psd(
            "I - T_B(M)",
            AffineExpr::from_const(HermitianOperator::identity(4)).plus(
                m,
                -1.0,
                vec![SuperopKind::PartialTransposeB(shape)],
            ),
        );
        let sol = b.build().unwrap().solve(1e-8).unwrap();
        assert!(
            (sol.primal_value - 2.0 / 3.0).abs() < 1e-6,
            "got {}",
            sol.primal_value
        );
        assert!(sol.gap <= 1e-8);

        // The reported effect is feasible: spectrum of both M and T_B(M)
        // inside [0, 1] up to tolerance.
        let m_opt = sol.variable(m);
        let (vals, _) = hermitian_eig(m_opt);
        assert!(vals.iter().all(|v| *v >= -1e-6 && *v <= 1.0 + 1e-6));
        let tb = crate::hermlin::partial_transpose(m_opt, crate::hermlin::Subsystem::B).unwrap();
        let (tvals, _) = hermitian_eig(&tb);
        assert!(tvals.iter().all(|v| *v >= -1e-6 && *v <= 1.0 + 1e-6));
    }

    #[test]
    fn identical_states_give_zero() {
        let rho = werner_state(&WernerParams::new(0.4, 2).unwrap());
        let c = rho.op() - rho.op();
        let mut b = SdpProblem::builder();
        let m = b.variable("M", 4);
        b.maximize_term(c, m);
        b.constrain_psd(
            "I - M",
            AffineExpr::from_const(HermitianOperator::identity(4)).plus_var(m, -1.0),
        );
        let sol = b.build().unwrap().solve(1e-8).unwrap();
        assert!(sol.primal_value.abs() < 1e-7);
    }
}
