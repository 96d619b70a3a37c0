//! Acceptance suite: every release gate runs here, one test per gate, each
//! printing a single PASS/FAIL line (run with `--nocapture` to see them all).
//!
//! Sizes and tolerances are pinned in code; nothing is deferred to later
//! calibration. The whole suite stays within a desk-scale time budget.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use rhls_core::cayley::{
    self, chordal_gauge, conformal_factor, extremal_profile, from_sphere, jacobian,
    pullback_gauge, to_sphere, SpherePoint,
};
use rhls_core::constants::{
    conformal_lower_bound, conformal_upper_bound_quadrature, frank_lieb_constant,
    UpperBoundVariant,
};
use rhls_core::heisenberg::{ball_volume, GroupParams, HeisenbergPoint};
use rhls_core::operator::{KernelMatrix, ProblemParams};
use rhls_core::quadrature::QuadratureRule;
use rhls_core::solver::{
    alternating_minimize, constants_objective, continuation_with_matrix, default_ladder,
    InitStrategy, SolverConfig,
};
use rhls_core::verification::{
    gamma_formula_disambiguation, random_step_function, verify_conformal_correspondence,
    verify_reversed_hls_hn,
};

fn gate(name: &str, pass: bool, detail: String) {
    println!("{} {:<28} {}", if pass { "PASS" } else { "FAIL" }, name, detail);
    assert!(pass, "{name}: {detail}");
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> HeisenbergPoint {
    let z = (0..n)
        .map(|_| Complex64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
        .collect();
    HeisenbergPoint::new(z, rng.random_range(-scale * scale..scale * scale)).unwrap()
}

#[test]
fn a01_ball_volume() {
    let start = Instant::now();
    let exact = std::f64::consts::PI.powi(2) / 2.0;
    let gamma_path = ball_volume(&GroupParams::new(1).unwrap());
    let gamma_ok = (gamma_path - exact).abs() <= 1e-12;

    // 1e7-sample Monte Carlo volume of {|z|^4 + t^2 < 1} in [-1,1]^3
    let samples = 10_000_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut hits = 0u64;
    for _ in 0..samples {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        let t: f64 = rng.random_range(-1.0..1.0);
        let z2 = x * x + y * y;
        if z2 * z2 + t * t < 1.0 {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let mc = 8.0 * p;
    let se = 8.0 * (p * (1.0 - p) / samples as f64).sqrt();
    let mc_ok = (mc - exact).abs() <= 3.0 * se;
    let elapsed = start.elapsed().as_secs_f64();
    gate(
        "ball-volume",
        gamma_ok && mc_ok && elapsed < 10.0,
        format!(
            "gamma {gamma_path:.15} vs {exact:.15}; mc {mc:.6} +- {se:.6}; {elapsed:.2}s"
        ),
    );
}

#[test]
fn a02_cayley_identities() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst_round = 0.0f64;
    let mut worst_rel = 0.0f64;
    for _ in 0..10_000 {
        let u = random_point(&mut rng, 1, 2.5);
        let v = random_point(&mut rng, 1, 2.5);

        let back = from_sphere(&to_sphere(&u)).unwrap();
        let round = (back.z()[0] - u.z()[0]).norm().max((back.t() - u.t()).abs());
        worst_round = worst_round.max(round);

        let lhs = chordal_gauge(&to_sphere(&u), &to_sphere(&v));
        let d = pullback_gauge(&u, &v).unwrap();
        let rhs = 2.0 * d * d / (conformal_factor(&u) * conformal_factor(&v)).sqrt();
        worst_rel = worst_rel.max((lhs - rhs).abs() / rhs.max(1e-30));
    }
    let elapsed = start.elapsed().as_secs_f64();
    gate(
        "cayley-identities",
        worst_round < 1e-10 && worst_rel < 1e-10 && elapsed < 5.0,
        format!("roundtrip {worst_round:.2e}; distance-relation {worst_rel:.2e}; {elapsed:.2}s"),
    );
}

#[test]
fn a03_jacobian_change_of_variables() {
    // int_{H^1} J du = |S^3|, importance-sampled with a 3D Cauchy proposal
    let samples = 1_000_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let g: [f64; 3] =
            [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let chi: f64 = rng.sample(StandardNormal);
        let s = chi.abs().max(1e-12);
        let v = [g[0] / s, g[1] / s, g[2] / s];
        let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        let density = (1.0 + r2).powi(-2) / std::f64::consts::PI.powi(2);
        let u = HeisenbergPoint::new(vec![Complex64::new(v[0], v[1])], v[2]).unwrap();
        let w = jacobian(&u) / density;
        sum += w;
        sum_sq += w * w;
    }
    let mean = sum / samples as f64;
    let exact = 2.0 * std::f64::consts::PI.powi(2);
    let rel = (mean - exact).abs() / exact;
    let se = ((sum_sq / samples as f64 - mean * mean).max(0.0) / samples as f64).sqrt();
    gate(
        "jacobian-integral",
        rel < 0.01,
        format!("estimate {mean:.5} +- {se:.5} vs {exact:.5} (rel {rel:.2e})"),
    );
}

#[test]
fn a04_zonal_square_moment() {
    let exact = 3.0 * std::f64::consts::PI.powi(2);
    let rule = QuadratureRule::product_hopf(24).unwrap();
    let hopf = rule.zonal_integral(2.0).unwrap();
    let hopf_rel = (hopf - exact).abs() / exact;

    let mc_rule = QuadratureRule::monte_carlo(1, 1_000_000, 104).unwrap();
    let mc = mc_rule.zonal_integral(2.0).unwrap();
    let mc_rel = (mc - exact).abs() / exact;
    gate(
        "zonal-square-moment",
        hopf_rel < 1e-8 && mc_rel < 5e-3,
        format!("hopf rel {hopf_rel:.2e}; mc rel {mc_rel:.2e}"),
    );
}

#[test]
fn a05_classical_sharp_constant() {
    let d = frank_lieb_constant(1, 2.0).unwrap();
    gate(
        "classical-sharp-constant",
        (d - 4.0).abs() <= 1e-12,
        format!("D(1,2) = {d:.15}"),
    );
}

#[test]
fn a06_transport_identity() {
    // p_alpha transport of 1 equals 2^((2n+1)/p_alpha) H(u) pointwise
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let n = if rng.random_range(0usize..2) == 0 { 1 } else { 2 };
        let u = random_point(&mut rng, n, 2.0);
        let q = (2 * n + 2) as f64;
        let alpha = q + rng.random_range(0.5..6.0);
        let p_a = 2.0 * q / (q + alpha);
        let lhs = cayley::transport_value(|_| 1.0, p_a, &u).unwrap();
        let rhs = 2f64.powf((2.0 * n as f64 + 1.0) / p_a) * extremal_profile(&u, alpha).unwrap();
        worst = worst.max((lhs - rhs).abs() / rhs);
    }
    gate("transport-identity", worst < 1e-12, format!("worst rel {worst:.2e}"));
}

#[test]
fn a07_solver_contract() {
    let start = Instant::now();
    let rule = QuadratureRule::product_hopf(13).unwrap(); // 2197 nodes
    let params = ProblemParams::with_exponent(1, 6.0, 0.7).unwrap();
    let matrix = KernelMatrix::assemble(&rule, &params).unwrap();
    let spread = matrix.row_sum_spread(rule.weights());

    let mut config = SolverConfig::defaults(&params);
    config.tol_residual = 1e-8;
    config.init = InitStrategy::random(107);
    let random_run = alternating_minimize(&matrix, &rule, &params, &config, None).unwrap();
    let random_ok = random_run.report.converged
        && random_run.report.el_residual <= 1e-8
        && random_run.report.max_trace_increase <= 1e-12;

    config.init = InitStrategy::Constants;
    let constants_run = alternating_minimize(&matrix, &rule, &params, &config, None).unwrap();
    let constants_value = constants_objective(&matrix, &rule, 0.7);
    // stationarity to rule tolerance: the reached value stays within the
    // zonal spread of the constants value, and the iterate stays flat
    let constants_ok = (constants_run.report.n_est - constants_value).abs()
        <= spread * constants_value
        && constants_run.report.concentration_ratio - 1.0 <= 10.0 * spread;
    let elapsed = start.elapsed().as_secs_f64();
    gate(
        "solver-contract",
        random_ok && constants_ok && elapsed < 60.0,
        format!(
            "random: res {:.2e}, worst step +{:.1e}, iters {}; constants: |N - value| {:.2e}, conc {:.6}; spread {:.1e}; {elapsed:.2}s",
            random_run.report.el_residual,
            random_run.report.max_trace_increase,
            random_run.report.iterations,
            (constants_run.report.n_est - constants_value).abs(),
            constants_run.report.concentration_ratio,
            spread
        ),
    );
}

#[test]
fn a08_sandwich_reproduction() {
    let rule = QuadratureRule::product_hopf(13).unwrap();
    let mut lines = Vec::new();
    let mut ok = true;
    for alpha in [5.0, 6.0, 8.0] {
        let params = ProblemParams::new(1, alpha).unwrap();
        let matrix = KernelMatrix::assemble(&rule, &params).unwrap();
        let mut config = SolverConfig::defaults(&params);
        config.init = InitStrategy::random(108);
        config.tol_residual = 1e-8;
        let outcome = continuation_with_matrix(&matrix, &rule, &config).unwrap();
        let n_est = outcome.reports.last().unwrap().n_est;
        let lower = conformal_lower_bound(1, alpha).unwrap();
        let upper = conformal_upper_bound_quadrature(1, alpha, &rule).unwrap();
        // the sharp constant may sit exactly at the upper endpoint, so the
        // upper comparison carries the rule's own zonal tolerance
        let spread = matrix.row_sum_spread(rule.weights());
        let inside = outcome.completed
            && n_est >= lower
            && n_est <= upper * (1.0 + 2.0 * spread + 1e-9);
        ok &= inside;
        lines.push(format!(
            "alpha={alpha}: N={n_est:.9} in [{lower:.6}, {upper:.6}+{:.0e}] {}",
            2.0 * spread * upper,
            if inside { "yes" } else { "NO" }
        ));
        if alpha == 8.0 {
            let exact = 3.0 / (4.0 * std::f64::consts::PI.powi(2));
            let endpoint_ok = (upper - exact).abs() / exact <= 1e-8;
            ok &= endpoint_ok;
            lines.push(format!(
                "alpha=8 endpoint: {upper:.12} vs 3/(4 pi^2) = {exact:.12} {}",
                if endpoint_ok { "yes" } else { "NO" }
            ));
        }
    }
    gate("sandwich-reproduction", ok, lines.join(" | "));
}

#[test]
fn a09_continuation_trend() {
    let rule = QuadratureRule::product_hopf(13).unwrap();
    let params = ProblemParams::new(1, 6.0).unwrap();
    let matrix = KernelMatrix::assemble(&rule, &params).unwrap();
    let mut config = SolverConfig::defaults(&params);
    config.ladder = default_ladder(params.p_alpha(), 6);
    config.init = InitStrategy::random(109);
    config.tol_residual = 1e-9;
    let outcome = continuation_with_matrix(&matrix, &rule, &config).unwrap();
    let final_n = outcome.reports.last().unwrap().n_est;
    let gaps: Vec<f64> = outcome.reports[..outcome.reports.len() - 1]
        .iter()
        .map(|r| (r.n_est - final_n).abs())
        .collect();
    let monotone =
        outcome.completed && gaps.windows(2).all(|w| w[1] <= w[0] + 1e-10);
    gate(
        "continuation-trend",
        monotone,
        format!("gaps {:?}", gaps.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>()),
    );
}

#[test]
fn a10_hn_inequality_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let mut violations = 0usize;
    let mut min_margin = f64::MAX;
    for k in 0..50 {
        let f = random_step_function(&mut rng, 1, 3).unwrap();
        let g = random_step_function(&mut rng, 1, 3).unwrap();
        let record =
            verify_reversed_hls_hn(&f, &g, 2.0, 0.8, 0.8, 20_000, 1100 + k as u64).unwrap();
        if record.violated {
            violations += 1;
        }
        min_margin = min_margin.min(record.margin);
        assert!(record.lhs_se / record.lhs < 0.02);
    }
    gate(
        "hn-inequality-suite",
        violations == 0 && min_margin >= 1.0,
        format!("50 pairs, min margin {min_margin:.3}, violations {violations}"),
    );
}

#[test]
fn a11_gamma_disambiguation() {
    let rule = QuadratureRule::product_hopf(32).unwrap();
    let mut ok = true;
    let mut lines = Vec::new();
    let mut verdicts = Vec::new();
    for alpha in [5.0, 6.0, 8.0] {
        let v = gamma_formula_disambiguation(1, alpha, &rule).unwrap();
        let fine = v.matched == UpperBoundVariant::QuarterExponent
            && v.matched_rel_err < 1e-3
            && v.other_rel_err > 10.0 * v.matched_rel_err;
        ok &= fine;
        verdicts.push(v.matched);
        lines.push(format!(
            "alpha={alpha}: matched {:?} ({:.1e} vs other {:.1e})",
            v.matched, v.matched_rel_err, v.other_rel_err
        ));
    }
    let unanimous = verdicts.windows(2).all(|w| w[0] == w[1]);
    gate("gamma-disambiguation", ok && unanimous, lines.join(" | "));
}

#[test]
fn a12_conformal_correspondence() {
    let rule = QuadratureRule::product_hopf(12).unwrap();
    let params = ProblemParams::new(1, 6.0).unwrap();
    let matrix = KernelMatrix::assemble(&rule, &params).unwrap();
    let record = verify_conformal_correspondence(
        |_: &SpherePoint| 1.0,
        |_: &SpherePoint| 1.0,
        &matrix,
        &rule,
        1_000_000,
        112,
    )
    .unwrap();
    let ok = record.discrepancy_sigma < 3.0
        && record.control_plus_sigma > 10.0
        && record.control_minus_sigma > 10.0;
    gate(
        "conformal-correspondence",
        ok,
        format!(
            "sphere {:.4} vs hn {:.4} +- {:.4} ({:.2} sigma); controls +{:.0} / -{:.0} sigma",
            record.sphere_value,
            record.heisenberg_value,
            record.heisenberg_se,
            record.discrepancy_sigma,
            record.control_plus_sigma,
            record.control_minus_sigma
        ),
    );
}
