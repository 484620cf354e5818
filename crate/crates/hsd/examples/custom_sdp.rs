//! Direct use of the SDP modeling layer.
//!
//! The divergence routines are built on a small builder for complex
//! Hermitian SDPs with superoperator-mapped terms (partial transpose,
//! partial trace, tensoring with identity). This example models two
//! programs by hand and reads back primal values, dual certificates and
//! multipliers.
//!
//! ```bash
//! cargo run --example custom_sdp
//! ```

use hsd::hermlin::{hermitian_eig, HermitianOperator};
use hsd::sdp::{AffineExpr, SdpProblem};

fn main() -> Result<(), hsd::Error> {
    // sup { Tr[M X] : 0 <= M <= I } equals the sum of the positive
    // eigenvalues of X.
    let x = HermitianOperator::from_real_diag(&[0.9, 0.4, -0.3, -1.2]);
    let expected: f64 = hermitian_eig(&x).0.iter().filter(|&&v| v > 0.0).sum();

    let mut b = SdpProblem::builder();
    let m = b.variable("M", 4);
    b.maximize_term(x.clone(), m);
    b.constrain_psd(
        "I - M",
        AffineExpr::from_const(HermitianOperator::identity(4)).plus_var(m, -1.0),
    );
    let problem = b.build()?;
    let solution = problem.solve(1e-8)?;

    println!("positive part program:");
    println!("  primal {:.10}, dual {:.10}", solution.primal_value, solution.dual_value);
    println!("  gap {:.2e} after {} iterations", solution.gap, solution.iterations);
    println!("  eigensolve says {expected:.10}");
    assert!((solution.primal_value - expected).abs() < 1e-7);

    // The multiplier of "I - M" is the dual certificate Y >= 0 with
    // Y >= X; at the optimum Tr[Y] equals the same value.
    let y = &solution.dual_vars["I - M"];
    println!("  Tr[Y] = {:.10} (complementary multiplier)", y.trace());
    assert!((y.trace() - expected).abs() < 1e-6);
    assert!(y.min_eigenvalue() > -1e-8);

    // A trace-normalized variable: the largest eigenvalue of X as
    // sup { Tr[rho X] : rho >= 0, Tr[rho] = 1 }.
    let mut b = SdpProblem::builder();
    let rho = b.variable("rho", 4);
    b.maximize_term(x.clone(), rho);
    b.constrain_eq(
        "trace",
        AffineExpr::from_const(HermitianOperator::from_real_diag(&[-1.0])).plus(
            rho,
            1.0,
            vec![hsd::sdp::SuperopKind::PartialTraceB(
                hsd::BipartiteShape { dim_a: 1, dim_b: 4 },
            )],
        ),
    );
    let solution = b.build()?.solve(1e-8)?;
    println!("largest eigenvalue program:");
    println!("  primal {:.10} (eigensolve {:.10})", solution.primal_value, x.max_eigenvalue());
    assert!((solution.primal_value - x.max_eigenvalue()).abs() < 1e-7);
    Ok(())
}
