//! Verification suites behind `rhls verify`: randomized checks of the group
//! axioms, the Cayley identities, the bound sandwich, the H^n inequality,
//! the conformal correspondence, and the Gamma-variant adjudication.
//!
//! Each check becomes one JSON record carrying its seed and sample counts;
//! the process exits nonzero if any check fails.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use rhls_core::cayley::{
    self, chordal_gauge, conformal_factor, from_sphere, jacobian, pullback_gauge, to_sphere,
    SpherePoint,
};
use rhls_core::constants::{
    conformal_lower_bound, conformal_upper_bound_gamma, UpperBoundVariant,
};
use rhls_core::heisenberg::{ball_volume, GroupParams, HeisenbergPoint};
use rhls_core::operator::{KernelMatrix, ProblemParams};
use rhls_core::quadrature::QuadratureRule;
use rhls_core::verification::{
    gamma_formula_disambiguation, random_step_function, verify_conformal_correspondence,
    verify_reversed_hls_hn,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub record: &'static str,
    pub suite: String,
    pub name: String,
    pub ok: bool,
    pub detail: String,
    pub seed: u64,
    pub samples: usize,
}

impl CheckRecord {
    fn new(suite: &str, name: &str, ok: bool, detail: String, seed: u64, samples: usize) -> Self {
        Self { record: "check", suite: suite.into(), name: name.into(), ok, detail, seed, samples }
    }
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> HeisenbergPoint {
    let z = (0..n)
        .map(|_| Complex64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
        .collect();
    HeisenbergPoint::new(z, rng.random_range(-scale * scale..scale * scale)).unwrap()
}

pub fn group_axioms(seed: u64, samples: usize) -> Vec<CheckRecord> {
    let suite = "group-axioms";
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut worst_assoc = 0.0f64;
    let mut worst_inverse = 0.0f64;
    let mut worst_homog = 0.0f64;
    for _ in 0..samples {
        let u = random_point(&mut rng, 1, 2.0);
        let v = random_point(&mut rng, 1, 2.0);
        let w = random_point(&mut rng, 1, 2.0);
        let a = u.multiply(&v).unwrap().multiply(&w).unwrap();
        let b = u.multiply(&v.multiply(&w).unwrap()).unwrap();
        let scale = a.norm().max(1.0);
        worst_assoc = worst_assoc
            .max((a.z()[0] - b.z()[0]).norm() / scale)
            .max((a.t() - b.t()).abs() / (scale * scale).max(1.0));
        worst_inverse = worst_inverse.max(u.multiply(&u.inverse()).unwrap().norm());
        let lambda = 10f64.powf(rng.random_range(-3.0..3.0));
        let lhs = u.dilate(lambda).unwrap().norm();
        worst_homog = worst_homog.max((lhs - lambda * u.norm()).abs() / lhs.max(1e-300));
    }
    out.push(CheckRecord::new(
        suite,
        "associativity",
        worst_assoc < 1e-13,
        format!("worst residual {worst_assoc:.2e}"),
        seed,
        samples,
    ));
    out.push(CheckRecord::new(
        suite,
        "inverse",
        worst_inverse < 1e-14,
        format!("worst |u u^-1| = {worst_inverse:.2e}"),
        seed,
        samples,
    ));
    out.push(CheckRecord::new(
        suite,
        "norm-homogeneity",
        worst_homog < 1e-13,
        format!("worst rel {worst_homog:.2e}"),
        seed,
        samples,
    ));

    // subadditivity of the gauge: recorded bound gamma = 1 + 1e-12
    let mut worst_ratio = 0.0f64;
    for _ in 0..samples {
        let u = random_point(&mut rng, 1, 2.0);
        let v = random_point(&mut rng, 1, 2.0);
        worst_ratio =
            worst_ratio.max(u.multiply(&v).unwrap().norm() / (u.norm() + v.norm()));
    }
    out.push(CheckRecord::new(
        suite,
        "quasi-triangle",
        worst_ratio <= 1.0 + 1e-12,
        format!("max |uv|/(|u|+|v|) = {worst_ratio:.15}"),
        seed,
        samples,
    ));

    // ball volume closed form vs Monte Carlo, 3 standard errors
    let mc_samples = samples.max(100_000);
    let mut hits = 0u64;
    for _ in 0..mc_samples {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        let t: f64 = rng.random_range(-1.0..1.0);
        let z2 = x * x + y * y;
        if z2 * z2 + t * t < 1.0 {
            hits += 1;
        }
    }
    let p = hits as f64 / mc_samples as f64;
    let mc = 8.0 * p;
    let se = 8.0 * (p * (1.0 - p) / mc_samples as f64).sqrt();
    let exact = ball_volume(&GroupParams::new(1).unwrap());
    out.push(CheckRecord::new(
        suite,
        "ball-volume-mc",
        (mc - exact).abs() <= 3.0 * se,
        format!("mc {mc:.6} +- {se:.6} vs {exact:.6}"),
        seed,
        mc_samples,
    ));
    out
}

pub fn cayley_suite(seed: u64, samples: usize) -> Vec<CheckRecord> {
    let suite = "cayley";
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut worst_round = 0.0f64;
    let mut worst_rel = 0.0f64;
    let mut worst_transport = 0.0f64;
    for _ in 0..samples {
        let u = random_point(&mut rng, 1, 2.5);
        let v = random_point(&mut rng, 1, 2.5);
        let back = from_sphere(&to_sphere(&u)).unwrap();
        worst_round =
            worst_round.max((back.z()[0] - u.z()[0]).norm().max((back.t() - u.t()).abs()));
        let lhs = chordal_gauge(&to_sphere(&u), &to_sphere(&v));
        let d = pullback_gauge(&u, &v).unwrap();
        let rhs = 2.0 * d * d / (conformal_factor(&u) * conformal_factor(&v)).sqrt();
        worst_rel = worst_rel.max((lhs - rhs).abs() / rhs.max(1e-30));

        let alpha = 6.0;
        let p_a = 0.8;
        let lhs_t = cayley::transport_value(|_| 1.0, p_a, &u).unwrap();
        let rhs_t = 2f64.powf(3.0 / p_a) * cayley::extremal_profile(&u, alpha).unwrap();
        worst_transport = worst_transport.max((lhs_t - rhs_t).abs() / rhs_t);
    }
    out.push(CheckRecord::new(
        suite,
        "roundtrip",
        worst_round < 1e-10,
        format!("worst {worst_round:.2e}"),
        seed,
        samples,
    ));
    out.push(CheckRecord::new(
        suite,
        "distance-relation",
        worst_rel < 1e-10,
        format!("worst rel {worst_rel:.2e}"),
        seed,
        samples,
    ));
    out.push(CheckRecord::new(
        suite,
        "transport-profile",
        worst_transport < 1e-12,
        format!("worst rel {worst_transport:.2e}"),
        seed,
        samples,
    ));

    // change of variables: int J du = |S^3| by Cauchy-proposal importance
    // sampling, 3 sigma and 1%
    let is_samples = samples.max(200_000);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..is_samples {
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
    let mean = sum / is_samples as f64;
    let se = ((sum_sq / is_samples as f64 - mean * mean).max(0.0) / is_samples as f64).sqrt();
    let exact = 2.0 * std::f64::consts::PI.powi(2);
    out.push(CheckRecord::new(
        suite,
        "jacobian-integral",
        (mean - exact).abs() <= 3.0 * se && (mean - exact).abs() / exact < 0.01,
        format!("{mean:.5} +- {se:.5} vs {exact:.5}"),
        seed,
        is_samples,
    ));

    // L^p norm preservation of transport across exponents, two independent
    // quadratures: sphere-side product rule vs H^n-side importance sampling
    let rule = QuadratureRule::product_hopf(16).unwrap();
    let north = SpherePoint::north_pole(1);
    let smooth = |xi: &SpherePoint| 0.7 + 0.5 * (1.0 - chordal_gauge(xi, &north)).powi(2);
    for p in [0.5, 0.8, 1.0, 2.0] {
        let sphere_side = rule
            .integrate(|i, _| smooth(&rule.sphere_point(i)).powf(p))
            .unwrap()
            .powf(1.0 / p);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let hn_samples = samples.max(100_000);
        for _ in 0..hn_samples {
            // draw from J/|S| and weight back: int F^p du = E[|S| f(C(u))^p]
            let mut xi = [Complex64::new(0.0, 0.0); 2];
            let mut norm_sqr = 0.0;
            for c in xi.iter_mut() {
                *c = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                norm_sqr += c.norm_sqr();
            }
            let inv = norm_sqr.sqrt().recip();
            let point =
                SpherePoint::new(vec![xi[0] * inv, xi[1] * inv]).expect("normalized");
            let w = 2.0 * std::f64::consts::PI.powi(2) * smooth(&point).powf(p);
            sum += w;
            sum_sq += w * w;
        }
        let mean = sum / hn_samples as f64;
        let se =
            ((sum_sq / hn_samples as f64 - mean * mean).max(0.0) / hn_samples as f64).sqrt();
        let hn_side = mean.powf(1.0 / p);
        let hn_sigma = se / p * mean.powf(1.0 / p - 1.0);
        let ok = (hn_side - sphere_side).abs() <= 3.0 * hn_sigma.max(1e-12);
        out.push(CheckRecord::new(
            suite,
            &format!("norm-preservation-p{p}"),
            ok,
            format!("sphere {sphere_side:.6} vs hn {hn_side:.6} +- {hn_sigma:.6}"),
            seed,
            hn_samples,
        ));
    }
    out
}

pub fn bounds_suite(seed: u64) -> Vec<CheckRecord> {
    let suite = "bounds";
    let mut out = Vec::new();
    let rule = QuadratureRule::product_hopf(24).unwrap();
    for alpha in [4.5, 5.0, 6.0, 8.0, 10.0] {
        match rhls_core::constants::BoundsReport::from_rule(1, alpha, &rule) {
            Ok(report) => out.push(CheckRecord::new(
                suite,
                &format!("sandwich-n1-alpha{alpha}"),
                true,
                format!("[{:.6}, {:.6}]", report.lower, report.upper),
                seed,
                rule.len(),
            )),
            Err(e) => out.push(CheckRecord::new(
                suite,
                &format!("sandwich-n1-alpha{alpha}"),
                false,
                e.to_string(),
                seed,
                rule.len(),
            )),
        }
    }
    for alpha in [6.5, 7.0, 9.0] {
        let lower = conformal_lower_bound(2, alpha).unwrap();
        let upper =
            conformal_upper_bound_gamma(2, alpha, UpperBoundVariant::QuarterExponent).unwrap();
        out.push(CheckRecord::new(
            suite,
            &format!("sandwich-n2-alpha{alpha}"),
            lower > 0.0 && lower < upper,
            format!("[{lower:.6}, {upper:.6}]"),
            seed,
            0,
        ));
    }
    // the sphere lower bound is the H^n one times the conversion factor
    for (n, alpha) in [(1usize, 6.0), (2, 7.0)] {
        let q = (2 * n + 2) as f64;
        let p_a = 2.0 * q / (q + alpha);
        let b1 = ball_volume(&GroupParams::new(n).unwrap());
        let hn = (8.0 * b1).powf((q - alpha) / q) / (2.0 * p_a * p_a);
        let sphere = conformal_lower_bound(n, alpha).unwrap();
        let factor = 2f64.powf(cayley::functional_factor_exponent(n, alpha));
        let rel = (sphere - hn * factor).abs() / sphere;
        out.push(CheckRecord::new(
            suite,
            &format!("lower-bound-conversion-n{n}-alpha{alpha}"),
            rel < 1e-12,
            format!("sphere {sphere:.8} vs hn*2^e {:.8}", hn * factor),
            seed,
            0,
        ));
    }

    // empirical sphere inequality: random positive pairs never dip below the
    // closed-form lower bound
    let small_rule = QuadratureRule::product_hopf(8).unwrap();
    let params = ProblemParams::new(1, 6.0).unwrap();
    let matrix = KernelMatrix::assemble(&small_rule, &params).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_margin = f64::MAX;
    let mut violations = 0usize;
    let pairs = 25;
    for _ in 0..pairs {
        let f = rhls_core::quadrature::SphericalFunction::sample(&small_rule, |_| {
            rng.random_range(0.05..4.0)
        })
        .unwrap();
        let g = rhls_core::quadrature::SphericalFunction::sample(&small_rule, |_| {
            rng.random_range(0.05..4.0)
        })
        .unwrap();
        let pair = rhls_core::operator::DensityPair::new(f, g).unwrap();
        match rhls_core::verification::verify_sphere_inequality(&pair, &small_rule, &matrix) {
            Ok(r) => {
                min_margin = min_margin.min(r.margin);
                if r.violated {
                    violations += 1;
                }
            }
            Err(_) => violations += 1,
        }
    }
    out.push(CheckRecord::new(
        suite,
        "sphere-inequality-random-pairs",
        violations == 0 && min_margin >= 1.0,
        format!("{pairs} pairs, min margin {min_margin:.3}, violations {violations}"),
        seed,
        pairs,
    ));
    out
}

pub fn hn_suite(seed: u64, samples: usize, pairs: usize, threads: usize) -> Vec<CheckRecord> {
    let suite = "hn";
    let indices: Vec<usize> = (0..pairs).collect();
    let mut results: Vec<Option<CheckRecord>> = vec![None; pairs];
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results_mutex = std::sync::Mutex::new(&mut results);
    std::thread::scope(|scope| {
        for _ in 0..threads.max(1) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if k >= indices.len() {
                    break;
                }
                let instance_seed = seed.wrapping_add(k as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(instance_seed);
                let record = (|| {
                    let f = random_step_function(&mut rng, 1, 3)?;
                    let g = random_step_function(&mut rng, 1, 3)?;
                    verify_reversed_hls_hn(&f, &g, 2.0, 0.8, 0.8, samples, instance_seed)
                })();
                let check = match record {
                    Ok(r) => CheckRecord::new(
                        suite,
                        &format!("pair-{k}"),
                        !r.violated,
                        format!(
                            "lhs {:.4} +- {:.4}, rhs {:.4}, margin {:.3}",
                            r.lhs, r.lhs_se, r.rhs, r.margin
                        ),
                        instance_seed,
                        samples,
                    ),
                    Err(e) => CheckRecord::new(
                        suite,
                        &format!("pair-{k}"),
                        false,
                        format!("error: {e}"),
                        instance_seed,
                        samples,
                    ),
                };
                results_mutex.lock().unwrap()[k] = Some(check);
            });
        }
    });
    results.into_iter().map(|r| r.expect("all instances ran")).collect()
}

pub fn correspondence_suite(seed: u64, samples: usize) -> Vec<CheckRecord> {
    let suite = "correspondence";
    let mut out = Vec::new();
    let rule = QuadratureRule::product_hopf(12).unwrap();
    let params = ProblemParams::new(1, 6.0).unwrap();
    let matrix = KernelMatrix::assemble(&rule, &params).unwrap();

    let constants = verify_conformal_correspondence(
        |_: &SpherePoint| 1.0,
        |_: &SpherePoint| 1.0,
        &matrix,
        &rule,
        samples,
        seed,
    );
    match constants {
        Ok(r) => {
            out.push(CheckRecord::new(
                suite,
                "constants-agreement",
                r.discrepancy_sigma < 3.0,
                format!(
                    "sphere {:.4} vs hn {:.4} +- {:.4} ({:.2} sigma)",
                    r.sphere_value, r.heisenberg_value, r.heisenberg_se, r.discrepancy_sigma
                ),
                seed,
                samples,
            ));
            out.push(CheckRecord::new(
                suite,
                "exponent-sensitivity",
                r.control_plus_sigma > 10.0 && r.control_minus_sigma > 10.0,
                format!(
                    "+0.5 off by {:.0} sigma, -0.5 off by {:.0} sigma",
                    r.control_plus_sigma, r.control_minus_sigma
                ),
                seed,
                samples,
            ));
        }
        Err(e) => out.push(CheckRecord::new(suite, "constants-agreement", false, e.to_string(), seed, samples)),
    }

    let north = SpherePoint::north_pole(1);
    let bump = move |xi: &SpherePoint| 0.5 + (-2.0 * chordal_gauge(xi, &north)).exp();
    match verify_conformal_correspondence(bump, |_| 1.0, &matrix, &rule, samples, seed + 1) {
        Ok(r) => out.push(CheckRecord::new(
            suite,
            "zonal-bump-agreement",
            r.discrepancy_sigma < 3.0,
            format!("{:.2} sigma", r.discrepancy_sigma),
            seed + 1,
            samples,
        )),
        Err(e) => {
            out.push(CheckRecord::new(suite, "zonal-bump-agreement", false, e.to_string(), seed + 1, samples))
        }
    }
    out
}

pub fn gamma_suite(seed: u64) -> Vec<CheckRecord> {
    let suite = "gamma";
    let rule = QuadratureRule::product_hopf(32).unwrap();
    let mut out = Vec::new();
    let mut verdicts = Vec::new();
    for alpha in [5.0, 6.0, 8.0] {
        match gamma_formula_disambiguation(1, alpha, &rule) {
            Ok(v) => {
                verdicts.push(v.matched);
                out.push(CheckRecord::new(
                    suite,
                    &format!("verdict-alpha{alpha}"),
                    true,
                    format!(
                        "{:?} matches to {:.1e}, other off {:.1e}",
                        v.matched, v.matched_rel_err, v.other_rel_err
                    ),
                    seed,
                    rule.len(),
                ));
            }
            Err(e) => out.push(CheckRecord::new(
                suite,
                &format!("verdict-alpha{alpha}"),
                false,
                e.to_string(),
                seed,
                rule.len(),
            )),
        }
    }
    let unanimous = !verdicts.is_empty() && verdicts.windows(2).all(|w| w[0] == w[1]);
    out.push(CheckRecord::new(
        suite,
        "unanimous",
        unanimous,
        format!("{verdicts:?}"),
        seed,
        0,
    ));
    out
}

