//! Estimate the critical extremal constant for (n, alpha) = (1, 6) on a
//! product rule and place it inside the closed-form sandwich.
//!
//! Run with: cargo run --release -p rhls-core --example critical_constant

use rhls_core::constants::{
    conformal_lower_bound, conformal_upper_bound_gamma, conformal_upper_bound_quadrature,
    UpperBoundVariant,
};
use rhls_core::operator::{KernelMatrix, ProblemParams};
use rhls_core::quadrature::QuadratureRule;
use rhls_core::solver::{continuation_with_matrix, InitStrategy, SolverConfig};

fn main() -> rhls_core::Result<()> {
    let n = 1;
    let alpha = 6.0;
    let params = ProblemParams::new(n, alpha)?;
    let rule = QuadratureRule::product_hopf(13)?;
    println!(
        "n = {n}, alpha = {alpha}, p_alpha = {:.6}, rule = {} nodes",
        params.p_alpha(),
        rule.len()
    );

    let matrix = KernelMatrix::assemble(&rule, &params)?;
    let mut config = SolverConfig::defaults(&params);
    config.init = InitStrategy::random(42);

    let outcome = continuation_with_matrix(&matrix, &rule, &config)?;
    for report in &outcome.reports {
        println!(
            "p = {:.6}  N(p) = {:.9}  iterations = {:3}  residual = {:.2e}",
            report.p, report.n_est, report.iterations, report.el_residual
        );
    }

    let estimate = outcome.reports.last().unwrap().n_est;
    let lower = conformal_lower_bound(n, alpha)?;
    let upper = conformal_upper_bound_gamma(n, alpha, UpperBoundVariant::QuarterExponent)?;
    let upper_rule = conformal_upper_bound_quadrature(n, alpha, &rule)?;
    println!("critical estimate N  = {estimate:.9}");
    println!("closed-form sandwich [{lower:.9}, {upper:.9}]");
    println!(
        "upper bound on this rule: {upper_rule:.9} (quadrature error {:.1e})",
        (upper_rule - upper).abs()
    );
    Ok(())
}
