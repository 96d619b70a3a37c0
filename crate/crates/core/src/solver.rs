//! Alternating-minimization solver for the Euler-Lagrange system
//!
//! ```text
//! N f^(p-1) = A g,      N g^(p-1) = A f,      ||f||_p = ||g||_p = 1,
//! ```
//!
//! and the continuation ladder p -> p_alpha.
//!
//! With g fixed, the minimizer of I[f, g]/||f||_p over f >= 0 is
//! f proportional to (A g)^(1/(p-1)), the equality case of the reversed
//! Hoelder inequality, so each half-step is an exact partial minimization
//! and the objective trace is non-increasing when damping is 1. Geometric
//! damping f <- f_old^(1-th) f_new^th is available to settle oscillatory
//! regimes; it preserves positivity and the normalization structure.
//!
//! Near the critical exponent the linearized iteration carries a neutral
//! conformal mode, so cold starts at p_alpha can drift toward concentration
//! after reaching the plateau. The solver tracks the best-residual iterate
//! and reports it; the continuation avoids the issue entirely by
//! warm-starting each rung from the previous minimizer.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{DensityPair, KernelMatrix, ProblemParams};
use crate::quadrature::{QuadratureRule, SphericalFunction};
use crate::{accum::CompensatedSum, cayley, heisenberg::HeisenbergPoint};

/// Values below this are clamped before negative powers are taken.
pub const POSITIVITY_FLOOR: f64 = 1e-300;

/// Iterations without best-residual improvement before giving up.
const STALL_WINDOW: usize = 60;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InitStrategy {
    /// Constant densities (the conjectured extremal on the sphere).
    Constants,
    /// Constants times exp(sigma * standard normal) multiplicative noise.
    Random { seed: u64, sigma: f64 },
}

impl InitStrategy {
    pub fn random(seed: u64) -> Self {
        Self::Random { seed, sigma: 0.3 }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Self::Constants => None,
            Self::Random { seed, .. } => Some(*seed),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub tol_residual: f64,
    pub tol_objective: f64,
    pub damping: f64,
    pub init: InitStrategy,
    /// Ascending exponents ending at p_alpha, used by the continuation.
    pub ladder: Vec<f64>,
}

impl SolverConfig {
    pub fn defaults(params: &ProblemParams) -> Self {
        Self {
            max_iters: 2000,
            tol_residual: 1e-9,
            tol_objective: 1e-14,
            damping: 1.0,
            init: InitStrategy::Constants,
            ladder: default_ladder(params.p_alpha(), 6),
        }
    }

    fn validate(&self, params: &ProblemParams) -> Result<()> {
        if !(self.tol_residual > 0.0 && self.tol_objective > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be positive".into()));
        }
        validate_ladder(&self.ladder, params.p_alpha())
    }
}

/// Geometric ladder p_k = p_alpha (1 - 2^-k), k = 1..steps, closed by p_alpha.
pub fn default_ladder(p_alpha: f64, steps: usize) -> Vec<f64> {
    let mut ladder: Vec<f64> =
        (1..=steps).map(|k| p_alpha * (1.0 - 2f64.powi(-(k as i32)))).collect();
    ladder.push(p_alpha);
    ladder
}

pub fn validate_ladder(ladder: &[f64], p_alpha: f64) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::InvalidArgument("ladder must be nonempty".into()));
    }
    for w in ladder.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidArgument(format!(
                "ladder must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let last = *ladder.last().unwrap();
    if (last - p_alpha).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "ladder must end at p_alpha = {p_alpha}, got {last}"
        )));
    }
    if ladder[0] <= 0.0 {
        return Err(Error::InvalidArgument("ladder entries must be positive".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    pub n: usize,
    pub alpha: f64,
    pub p: f64,
    /// Estimate of the extremal constant at this exponent.
    pub n_est: f64,
    pub iterations: usize,
    pub el_residual: f64,
    pub concentration_ratio: f64,
    pub converged: bool,
    pub clamp_fired: bool,
    pub objective_trace: Vec<f64>,
    /// Largest single-step increase observed in the trace (0 for clean descent).
    pub max_trace_increase: f64,
    pub best_iteration: usize,
    pub damping: f64,
    pub seed: Option<u64>,
    pub rule_hash: String,
}

#[derive(Debug, Clone)]
pub struct SolverOutcome {
    pub report: SolverReport,
    pub pair: DensityPair,
}

/// Relative Euler-Lagrange residual of a pair at a candidate constant:
/// max over nodes and both equations of |N f^(p-1) - A g| / A g.
pub fn el_residual(
    pair: &DensityPair,
    n_est: f64,
    matrix: &KernelMatrix,
    rule: &QuadratureRule,
    p: f64,
) -> Result<f64> {
    if !(n_est > 0.0) {
        return Err(Error::InvalidArgument("residual requires a positive constant".into()));
    }
    pair.f.check_rule(rule)?;
    pair.g.check_rule(rule)?;
    let ag = matrix.apply(rule.weights(), pair.g.values());
    let af = matrix.apply(rule.weights(), pair.f.values());
    Ok(residual_from_parts(pair.f.values(), pair.g.values(), &ag, &af, n_est, p))
}

fn residual_from_parts(
    f: &[f64],
    g: &[f64],
    ag: &[f64],
    af: &[f64],
    n_est: f64,
    p: f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (fi, agi) in f.iter().zip(ag) {
        worst = worst.max((n_est * fi.powf(p - 1.0) - agi).abs() / agi);
    }
    for (gi, afi) in g.iter().zip(af) {
        worst = worst.max((n_est * gi.powf(p - 1.0) - afi).abs() / afi);
    }
    worst
}

fn weighted_inner(weights: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for ((w, x), y) in weights.iter().zip(a).zip(b) {
        acc.add(w * x * y);
    }
    acc.value()
}

struct HalfStep {
    clamped: bool,
}

/// Ceiling companion to the positivity floor: negative powers of the floor
/// must stay representable.
const MAGNITUDE_CEILING: f64 = 1e300;

/// In-place exact partial minimization with optional geometric damping:
/// target = (A other)^(1/(p-1)) normalized; iterate blended in log space.
/// Targets are clamped into [floor, ceiling] so a diverging iterate stays
/// finite and strictly positive; the clamp is reported.
fn half_step(
    values: &mut [f64],
    a_other: &[f64],
    weights: &[f64],
    p: f64,
    damping: f64,
) -> HalfStep {
    let exponent = 1.0 / (p - 1.0);
    let mut clamped = false;
    let mut clamp = |t: f64| -> f64 {
        if t < POSITIVITY_FLOOR {
            clamped = true;
            POSITIVITY_FLOOR
        } else if !(t <= MAGNITUDE_CEILING) {
            clamped = true;
            MAGNITUDE_CEILING
        } else {
            t
        }
    };
    let mut target: Vec<f64> = a_other
        .iter()
        .map(|v| {
            let base = clamp(*v);
            clamp(base.powf(exponent))
        })
        .collect();
    let norm = crate::operator::quasi_norm_positive(&target, weights, p);
    for t in target.iter_mut() {
        *t = clamp(*t / norm);
    }
    if damping >= 1.0 {
        values.copy_from_slice(&target);
    } else {
        for (v, t) in values.iter_mut().zip(&target) {
            *v = clamp(v.powf(1.0 - damping) * t.powf(damping));
        }
        let norm = crate::operator::quasi_norm_positive(values, weights, p);
        for v in values.iter_mut() {
            *v = clamp(*v / norm);
        }
    }
    HalfStep { clamped }
}

fn initial_pair(
    rule: &QuadratureRule,
    p: f64,
    init: &InitStrategy,
    warm: Option<&DensityPair>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if let Some(pair) = warm {
        pair.f.check_rule(rule)?;
        pair.g.check_rule(rule)?;
        let mut f = pair.f.values().to_vec();
        let mut g = pair.g.values().to_vec();
        let nf = crate::operator::quasi_norm_positive(&f, rule.weights(), p);
        let ng = crate::operator::quasi_norm_positive(&g, rule.weights(), p);
        for v in f.iter_mut() {
            *v /= nf;
        }
        for v in g.iter_mut() {
            *v /= ng;
        }
        return Ok((f, g));
    }
    let c = crate::constants::sphere_surface(rule.group_dim()).powf(-1.0 / p);
    match init {
        InitStrategy::Constants => Ok((vec![c; rule.len()], vec![c; rule.len()])),
        InitStrategy::Random { seed, sigma } => {
            use rand::{Rng, SeedableRng};
            use rand_distr::StandardNormal;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let mut draw = |_: usize| -> f64 {
                let z: f64 = rng.sample(StandardNormal);
                c * (sigma * z).exp()
            };
            let mut f: Vec<f64> = (0..rule.len()).map(&mut draw).collect();
            let mut g: Vec<f64> = (0..rule.len()).map(&mut draw).collect();
            let nf = crate::operator::quasi_norm_positive(&f, rule.weights(), p);
            let ng = crate::operator::quasi_norm_positive(&g, rule.weights(), p);
            for v in f.iter_mut() {
                *v /= nf;
            }
            for v in g.iter_mut() {
                *v /= ng;
            }
            Ok((f, g))
        }
    }
}

/// Runs the alternating minimization at `params.p()`. The kernel matrix only
/// depends on alpha, so one assembly serves every exponent. Non-convergence
/// is not an error: the report carries `converged = false` and the
/// best-residual iterate found.
pub fn alternating_minimize(
    matrix: &KernelMatrix,
    rule: &QuadratureRule,
    params: &ProblemParams,
    config: &SolverConfig,
    warm_start: Option<&DensityPair>,
) -> Result<SolverOutcome> {
    let params = *params;
    config.validate(&params)?;
    if params.alpha() != matrix.params().alpha() || params.n() != matrix.params().n() {
        return Err(Error::InvalidArgument(format!(
            "matrix was assembled at (n, alpha) = ({}, {}), requested ({}, {})",
            matrix.params().n(),
            matrix.params().alpha(),
            params.n(),
            params.alpha()
        )));
    }
    if matrix.rule_hash() != rule.hash() {
        return Err(Error::InvalidArgument("matrix was assembled on a different rule".into()));
    }
    let p = params.p();
    let weights = rule.weights();
    let n_nodes = rule.len();

    let (mut f, mut g) = initial_pair(rule, p, &config.init, warm_start)?;
    let mut ag = matrix.apply(weights, &g);
    let mut af = vec![0.0; n_nodes];

    let mut trace: Vec<f64> = Vec::new();
    let mut clamp_fired = false;
    let mut best_residual = f64::INFINITY;
    let mut best = (f.clone(), g.clone(), f64::NAN, 0usize);
    let mut iterations = 0;

    for it in 1..=config.max_iters {
        iterations = it;
        let step_f = half_step(&mut f, &ag, weights, p, config.damping);
        clamp_fired |= step_f.clamped;
        trace.push(weighted_inner(weights, &f, &ag));

        matrix.apply_into(weights, &f, &mut af);
        let step_g = half_step(&mut g, &af, weights, p, config.damping);
        clamp_fired |= step_g.clamped;
        let objective = weighted_inner(weights, &g, &af);
        trace.push(objective);

        matrix.apply_into(weights, &g, &mut ag);
        let n_est = weighted_inner(weights, &f, &ag);
        let residual = residual_from_parts(&f, &g, &ag, &af, n_est, p);

        if residual < best_residual {
            best_residual = residual;
            best = (f.clone(), g.clone(), n_est, it);
        }
        if residual <= config.tol_residual {
            break;
        }
        if it >= best.3 + STALL_WINDOW {
            break; // no progress on the residual for a full window
        }
        if trace.len() >= 4 {
            let len = trace.len();
            let recent = (trace[len - 3] - trace[len - 1]).abs();
            if recent <= config.tol_objective * trace[len - 1].abs().max(1.0)
                && best_residual <= config.tol_residual
            {
                break;
            }
        }
    }

    let (bf, bg, n_est, best_iteration) = best;
    let concentration_ratio = bf.iter().cloned().fold(f64::MIN, f64::max)
        / bf.iter().cloned().fold(f64::MAX, f64::min);
    let max_trace_increase = trace
        .windows(2)
        .map(|w| (w[1] - w[0]).max(0.0))
        .fold(0.0, f64::max);

    let pair = DensityPair::new(
        SphericalFunction::from_values(rule, bf)?,
        SphericalFunction::from_values(rule, bg)?,
    )?;
    let report = SolverReport {
        n: params.n(),
        alpha: params.alpha(),
        p,
        n_est,
        iterations,
        el_residual: best_residual,
        concentration_ratio,
        converged: best_residual <= config.tol_residual,
        clamp_fired,
        objective_trace: trace,
        max_trace_increase,
        best_iteration,
        damping: config.damping,
        seed: config.init.seed(),
        rule_hash: rule.hash(),
    };
    Ok(SolverOutcome { report, pair })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationOutcome {
    pub reports: Vec<SolverReport>,
    /// False when a rung failed to converge and the ladder stopped early.
    pub completed: bool,
    #[serde(skip)]
    pub final_pair: Option<DensityPair>,
}

/// Walks the subcritical ladder up to p_alpha, assembling the kernel once and
/// warm-starting every rung after the first from the previous minimizer. The
/// final report estimates the critical constant.
pub fn continuation_to_critical(
    params: &ProblemParams,
    rule: &QuadratureRule,
    config: &SolverConfig,
) -> Result<ContinuationOutcome> {
    config.validate(params)?;
    let matrix = KernelMatrix::assemble(rule, params)?;
    continuation_with_matrix(&matrix, rule, config)
}

/// Continuation over a caller-assembled matrix (the kernel does not depend
/// on p, so one assembly serves the whole ladder).
pub fn continuation_with_matrix(
    matrix: &KernelMatrix,
    rule: &QuadratureRule,
    config: &SolverConfig,
) -> Result<ContinuationOutcome> {
    let mut reports = Vec::with_capacity(config.ladder.len());
    let mut warm: Option<DensityPair> = None;
    for &p in &config.ladder {
        let step_params = matrix.params().at_exponent(p)?;
        let outcome = alternating_minimize(matrix, rule, &step_params, config, warm.as_ref())?;
        let converged = outcome.report.converged;
        reports.push(outcome.report);
        if !converged {
            return Ok(ContinuationOutcome { reports, completed: false, final_pair: Some(outcome.pair) });
        }
        warm = Some(outcome.pair);
    }
    Ok(ContinuationOutcome { reports, completed: true, final_pair: warm })
}

/// Concentration diagnostics of a solved pair, with the renormalized blow-up
/// profile when the pair is concentrated enough to warrant it.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupDiagnostics {
    pub concentration_ratio: f64,
    pub argmax_node: usize,
    pub profile: Option<RenormalizedProfile>,
}

/// Renormalized profile Phi sampled on a radial grid, with the fitted
/// two-sided envelope constants for Phi / (1 + |u|^(alpha - Q)).
#[derive(Debug, Clone, Serialize)]
pub struct RenormalizedProfile {
    pub lambda: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub envelope_lower: f64,
    pub envelope_upper: f64,
}

/// Computes diagnostics for `pair` solved at `params` on `rule`. A profile is
/// emitted when max f / min f exceeds `threshold`; the potential phi = f^(p-1)
/// is evaluated by nearest-node lookup after rotating the arg-max toward the
/// pole, and lambda follows the normalization lambda^(alpha/(q-2)) phi(N) = 1.
pub fn blowup_diagnostics(
    pair: &DensityPair,
    params: &ProblemParams,
    rule: &QuadratureRule,
    threshold: f64,
) -> Result<BlowupDiagnostics> {
    pair.f.check_rule(rule)?;
    let f = pair.f.values();
    let (argmax_node, fmax) = f
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    let fmin = f.iter().cloned().fold(f64::MAX, f64::min);
    let concentration_ratio = fmax / fmin;
    if concentration_ratio <= threshold {
        return Ok(BlowupDiagnostics { concentration_ratio, argmax_node, profile: None });
    }

    let p = params.p();
    let q_exp = params.p_conjugate();
    let alpha = params.alpha();
    // phi = f^(p-1), sampled nearest-node relative to the arg-max pole
    let phi_values: Vec<f64> = f.iter().map(|v| v.powf(p - 1.0)).collect();
    let pole = rule.sphere_point(argmax_node);
    let phi = |xi: &crate::cayley::SpherePoint| -> f64 {
        // chordal rotation: distance to the arg-max plays the role of the
        // distance to the north pole
        let target = crate::cayley::chordal_gauge(xi, &crate::cayley::SpherePoint::north_pole(rule.group_dim()));
        let mut best = (f64::MAX, 0usize);
        for i in 0..rule.len() {
            let d = (crate::cayley::chordal_gauge(&rule.sphere_point(i), &pole) - target).abs();
            if d < best.0 {
                best = (d, i);
            }
        }
        phi_values[best.1]
    };
    let phi_north = phi(&crate::cayley::SpherePoint::north_pole(rule.group_dim()));
    let lambda = cayley::blowup_scale(phi_north, alpha, q_exp)?;

    let decay = alpha - params.q() as f64;
    let mut radii = Vec::new();
    let mut values = Vec::new();
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for k in 0..=32 {
        let r = 10f64.powf(-1.5 + 3.0 * k as f64 / 32.0);
        let u = HeisenbergPoint::new(
            {
                let mut z = vec![num_complex::Complex64::new(0.0, 0.0); rule.group_dim()];
                z[0] = num_complex::Complex64::new(r, 0.0);
                z
            },
            0.0,
        )?;
        let v = cayley::renormalize_blowup(&phi, lambda, alpha, q_exp, &u)?;
        let envelope = v / (1.0 + r.powf(decay));
        lo = lo.min(envelope);
        hi = hi.max(envelope);
        radii.push(r);
        values.push(v);
    }
    Ok(BlowupDiagnostics {
        concentration_ratio,
        argmax_node,
        profile: Some(RenormalizedProfile {
            lambda,
            radii,
            values,
            envelope_lower: lo,
            envelope_upper: hi,
        }),
    })
}

/// Objective value of constant densities at exponent p on a rule:
/// |S|^(1 - 2/p) times the weighted mean of the discrete row sums.
pub fn constants_objective(matrix: &KernelMatrix, rule: &QuadratureRule, p: f64) -> f64 {
    let s = crate::constants::sphere_surface(rule.group_dim());
    let sums = matrix.row_sums(rule.weights());
    let mean = weighted_inner(rule.weights(), &sums, &vec![1.0; sums.len()]) / s;
    s.powf(1.0 - 2.0 / p) * mean
}

/// Normalized constant pair at exponent p.
pub fn constants_pair(rule: &QuadratureRule, p: f64) -> Result<DensityPair> {
    let c = crate::constants::sphere_surface(rule.group_dim()).powf(-1.0 / p);
    DensityPair::constant(rule, c)
}
