//! `rhls`: constants, extremal solves, continuation sweeps, and
//! verification suites for the reversed HLS problem on the CR sphere, with
//! reproducible JSON-lines output.

mod output;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use output::{Emitter, Format, RunManifest};
use rhls_core::constants::{
    self, conformal_exponent, conformal_lower_bound, conformal_upper_bound_gamma,
    conformal_upper_bound_quadrature, frank_lieb_constant, sphere_surface, UpperBoundVariant,
};
use rhls_core::heisenberg::{ball_volume, GroupParams};
use rhls_core::operator::{KernelMatrix, ProblemParams};
use rhls_core::quadrature::QuadratureRule;
use rhls_core::solver::{
    alternating_minimize, blowup_diagnostics, continuation_with_matrix, default_ladder,
    validate_ladder, InitStrategy, SolverConfig,
};

#[derive(Parser)]
#[command(name = "rhls", version, about = "Reversed HLS extremal problem on the CR sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form constants and bounds for one (n, alpha)
    Constants(ConstantsArgs),
    /// One alternating-minimization solve at a fixed exponent
    Solve(SolveArgs),
    /// Subcritical ladder up to the conformal exponent
    Continuation(ContinuationArgs),
    /// Randomized verification suites
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CommonOut {
    /// Output format
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write records to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RuleArgs {
    /// Quadrature rule family
    #[arg(long, value_enum, default_value = "hopf")]
    rule: RuleChoice,
    /// Product-rule resolution per coordinate (hopf)
    #[arg(long, default_value_t = 13)]
    res: usize,
    /// Node count (mc)
    #[arg(long, default_value_t = 4096)]
    nodes: usize,
    /// Seed for Monte Carlo rules and random initialization
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleChoice {
    Hopf,
    Mc,
}

impl RuleArgs {
    fn build(&self, n: usize) -> Result<QuadratureRule, rhls_core::Error> {
        match self.rule {
            RuleChoice::Hopf => {
                if n != 1 {
                    return Err(rhls_core::Error::InvalidArgument(
                        "the product rule is n=1 only; use --rule mc".into(),
                    ));
                }
                QuadratureRule::product_hopf(self.res)
            }
            RuleChoice::Mc => QuadratureRule::monte_carlo(n, self.nodes, self.seed),
        }
    }
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long)]
    alpha: f64,
    /// Optional subcritical exponent for the value-at-constants row
    #[arg(long)]
    p: Option<f64>,
    /// Product-rule resolution for the quadrature upper bound (n=1)
    #[arg(long, default_value_t = 24)]
    res: usize,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long)]
    alpha: f64,
    /// Quasi-norm exponent in (0, p_alpha]; defaults to p_alpha
    #[arg(long)]
    p: Option<f64>,
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1.0)]
    damping: f64,
    #[arg(long, value_enum, default_value = "constants")]
    init: InitChoice,
    /// Noise scale for random init
    #[arg(long, default_value_t = 0.3)]
    sigma: f64,
    /// Emit blow-up diagnostics when max f / min f exceeds this
    #[arg(long, default_value_t = 50.0)]
    concentration_threshold: f64,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitChoice {
    Constants,
    Random,
}

#[derive(Args)]
struct ContinuationArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long)]
    alpha: f64,
    /// Comma-separated ascending exponents ending at p_alpha
    #[arg(long)]
    ladder: Option<String>,
    /// Geometric ladder length when --ladder is not given
    #[arg(long, default_value_t = 6)]
    ladder_steps: usize,
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1.0)]
    damping: f64,
    #[arg(long, value_enum, default_value = "constants")]
    init: InitChoice,
    #[arg(long, default_value_t = 0.3)]
    sigma: f64,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Per-check sample count (suites scale it as needed)
    #[arg(long, default_value_t = 20000)]
    samples: usize,
    /// Step-function pairs in the hn suite
    #[arg(long, default_value_t = 50)]
    pairs: usize,
    #[command(flatten)]
    out: CommonOut,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Constants(args) => cmd_constants(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Continuation(args) => cmd_continuation(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_constants(args: ConstantsArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let group = GroupParams::new(args.n)?;
    let q = group.q() as f64;
    if (args.alpha - q).abs() < 1e-12 {
        return Err(format!("alpha must differ from Q = {q} (no regime applies)").into());
    }
    let mut emitter = Emitter::new(args.out.out.clone(), args.out.format)?;
    let manifest = RunManifest::new(
        "constants",
        None,
        json!({"n": args.n, "alpha": args.alpha, "p": args.p, "res": args.res}),
        None,
    );
    emitter.emit(&manifest)?;

    let mut row = |quantity: &str, value: Option<f64>, note: &str| {
        let rec = json!({
            "record": "constant",
            "quantity": quantity,
            "value": value,
            "note": if value.is_none() { "not applicable" } else { note },
        });
        emitter.emit(&rec)
    };

    let reversed = args.alpha > q;
    row("ball_volume", Some(ball_volume(&group)), "|B_1|")?;
    row("sphere_surface", Some(sphere_surface(args.n)), "|S^(2n+1)|")?;
    row("p_alpha", Some(conformal_exponent(group.q(), args.alpha)), "2Q/(Q+alpha)")?;
    row(
        "q_alpha",
        Some(2.0 * q / (q - args.alpha)),
        "2Q/(Q-alpha)",
    )?;
    row("lambda", Some(args.alpha - q), "alpha - Q")?;

    row(
        "conformal_lower_bound",
        conformal_lower_bound(args.n, args.alpha).ok(),
        "reversed regime lower bound",
    )?;
    row(
        "conformal_upper_bound_quarter",
        conformal_upper_bound_gamma(args.n, args.alpha, UpperBoundVariant::QuarterExponent).ok(),
        "Gamma^2((Q+alpha)/4) closed form",
    )?;
    row(
        "conformal_upper_bound_half",
        conformal_upper_bound_gamma(args.n, args.alpha, UpperBoundVariant::HalfExponent).ok(),
        "Gamma^2((Q+alpha)/2) closed form",
    )?;
    let quad = if reversed && args.n == 1 {
        let rule = QuadratureRule::product_hopf(args.res)?;
        conformal_upper_bound_quadrature(args.n, args.alpha, &rule).ok()
    } else {
        None
    };
    row("conformal_upper_bound_quadrature", quad, "value at constant densities")?;

    if reversed {
        let lambda = args.alpha - q;
        let p_sym = 2.0 * q / (2.0 * q + lambda);
        row(
            "general_lower_bound_symmetric",
            constants::general_lower_bound(group.q(), lambda, p_sym, p_sym).ok(),
            &format!("rough bound at p = t = {p_sym:.6}"),
        )?;
        if let Some(p) = args.p {
            let value = if args.n == 1 && p > 0.0 && p <= conformal_exponent(group.q(), args.alpha)
            {
                let rule = QuadratureRule::product_hopf(args.res)?;
                let zonal = rule.zonal_integral((args.alpha - q) / 2.0)?;
                Some(sphere_surface(args.n).powf(1.0 - 2.0 / p) * zonal)
            } else {
                None
            };
            row("subcritical_value_at_constants", value, &format!("|S|^(1-2/p) zonal at p = {p}"))?;
        }
    }
    row(
        "frank_lieb_constant",
        frank_lieb_constant(args.n, args.alpha).ok(),
        "classical regime sharp constant",
    )?;
    emitter.finish()?;
    Ok(ExitCode::SUCCESS)
}

fn build_solver_config(
    params: &ProblemParams,
    max_iter: usize,
    tol: f64,
    damping: f64,
    init: InitChoice,
    sigma: f64,
    seed: u64,
    ladder: Vec<f64>,
) -> SolverConfig {
    SolverConfig {
        max_iters: max_iter,
        tol_residual: tol,
        tol_objective: 1e-14,
        damping,
        init: match init {
            InitChoice::Constants => InitStrategy::Constants,
            InitChoice::Random => InitStrategy::Random { seed, sigma },
        },
        ladder: if ladder.is_empty() { default_ladder(params.p_alpha(), 6) } else { ladder },
    }
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let params = match args.p {
        Some(p) => ProblemParams::with_exponent(args.n, args.alpha, p)?,
        None => ProblemParams::new(args.n, args.alpha)?,
    };
    let rule = args.rule.build(args.n)?;
    let matrix = KernelMatrix::assemble(&rule, &params)?;
    let config = build_solver_config(
        &params,
        args.max_iter,
        args.tol,
        args.damping,
        args.init,
        args.sigma,
        args.rule.seed,
        Vec::new(),
    );

    let mut emitter = Emitter::new(args.out.out.clone(), args.out.format)?;
    let manifest = RunManifest::new(
        "solve",
        Some(args.rule.seed),
        json!({
            "n": args.n, "alpha": args.alpha, "p": params.p(),
            "max_iter": args.max_iter, "tol": args.tol, "damping": args.damping,
            "init": format!("{:?}", args.init),
        }),
        Some(rule.descriptor().clone()),
    );
    emitter.emit(&manifest)?;

    let outcome = alternating_minimize(&matrix, &rule, &params, &config, None)?;
    emitter.emit(&outcome.report)?;
    if outcome.report.concentration_ratio > args.concentration_threshold {
        let diag =
            blowup_diagnostics(&outcome.pair, &params, &rule, args.concentration_threshold)?;
        emitter.emit(&diag)?;
    }
    emitter.finish()?;
    Ok(if outcome.report.converged { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_continuation(args: ContinuationArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let params = ProblemParams::new(args.n, args.alpha)?;
    let ladder = match &args.ladder {
        Some(text) => {
            let parsed: Result<Vec<f64>, _> =
                text.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let ladder = parsed.map_err(|e| format!("bad ladder entry: {e}"))?;
            validate_ladder(&ladder, params.p_alpha())?;
            ladder
        }
        None => default_ladder(params.p_alpha(), args.ladder_steps),
    };
    let rule = args.rule.build(args.n)?;
    let matrix = KernelMatrix::assemble(&rule, &params)?;
    let config = build_solver_config(
        &params,
        args.max_iter,
        args.tol,
        args.damping,
        args.init,
        args.sigma,
        args.rule.seed,
        ladder.clone(),
    );

    let mut emitter = Emitter::new(args.out.out.clone(), args.out.format)?;
    let manifest = RunManifest::new(
        "continuation",
        Some(args.rule.seed),
        json!({
            "n": args.n, "alpha": args.alpha, "ladder": ladder,
            "max_iter": args.max_iter, "tol": args.tol, "damping": args.damping,
            "init": format!("{:?}", args.init),
        }),
        Some(rule.descriptor().clone()),
    );
    emitter.emit(&manifest)?;

    let outcome = continuation_with_matrix(&matrix, &rule, &config)?;
    for report in &outcome.reports {
        emitter.emit(report)?;
    }
    let last = outcome.reports.last().expect("ladder is nonempty");
    let lower = conformal_lower_bound(args.n, args.alpha)?;
    let upper = conformal_upper_bound_quadrature(args.n, args.alpha, &rule)
        .or_else(|_| {
            conformal_upper_bound_gamma(args.n, args.alpha, UpperBoundVariant::QuarterExponent)
        })?;
    let spread = matrix.row_sum_spread(rule.weights());
    let in_sandwich =
        last.n_est >= lower && last.n_est <= upper * (1.0 + 2.0 * spread + 1e-9);
    let summary = json!({
        "record": "summary",
        "critical_estimate": last.n_est,
        "p_alpha": params.p_alpha(),
        "lower_bound": lower,
        "upper_bound_quadrature": upper,
        "rule_zonal_spread": spread,
        "in_sandwich": in_sandwich,
        "completed": outcome.completed,
    });
    emitter.emit(&summary)?;
    emitter.finish()?;
    Ok(if outcome.completed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let known = ["all", "group-axioms", "cayley", "bounds", "hn", "correspondence", "gamma"];
    if !known.contains(&args.suite.as_str()) {
        return Err(format!("unknown suite '{}'; choose one of {known:?}", args.suite).into());
    }
    let mut emitter = Emitter::new(args.out.out.clone(), args.out.format)?;
    let manifest = RunManifest::new(
        "verify",
        Some(args.seed),
        json!({"suite": args.suite, "samples": args.samples, "pairs": args.pairs}),
        None,
    );
    emitter.emit(&manifest)?;

    let threads = output::thread_count();
    let mut checks = Vec::new();
    let want = |name: &str| args.suite == "all" || args.suite == name;
    if want("group-axioms") {
        checks.extend(suites::group_axioms(args.seed, args.samples));
    }
    if want("cayley") {
        checks.extend(suites::cayley_suite(args.seed, args.samples));
    }
    if want("bounds") {
        checks.extend(suites::bounds_suite(args.seed));
    }
    if want("hn") {
        checks.extend(suites::hn_suite(args.seed, args.samples, args.pairs, threads));
    }
    if want("correspondence") {
        checks.extend(suites::correspondence_suite(args.seed, args.samples.max(200_000)));
    }
    if want("gamma") {
        checks.extend(suites::gamma_suite(args.seed));
    }

    let mut violations = 0usize;
    for check in &checks {
        if !check.ok {
            violations += 1;
        }
        emitter.emit(check)?;
    }
    let summary = json!({
        "record": "summary",
        "suite": args.suite,
        "checks": checks.len(),
        "violations": violations,
    });
    emitter.emit(&summary)?;
    emitter.finish()?;
    Ok(if violations == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
