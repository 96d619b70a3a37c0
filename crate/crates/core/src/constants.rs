//! Gamma evaluation and the closed-form constants and bounds of the extremal
//! problem.
//!
//! Conventions, with Q = 2n + 2 and the conformal exponent
//! p_a = 2Q/(Q + a):
//!
//! * `sphere_surface`: |S^(2n+1)| = 2 pi^(n+1) / n!
//! * `general_lower_bound`: lower bound for the rough reversed inequality on
//!   H^n with kernel |.|^lambda and exponents 1/p + 1/t - lambda/Q = 2.
//! * `conformal_lower_bound` / `conformal_upper_bound`: the two ends of the
//!   sandwich around the sharp sphere constant N_{Q,a} for a > Q.
//! * `frank_lieb_constant`: the sharp constant D_{n,a} of the classical
//!   regime 0 < a < Q, kept as a reference value.
//!
//! The upper bound is, by definition, the value of the functional at constant
//! densities, |S|^(1 - 2/p_a) * int |1 - xi.conj(eta)|^((a-Q)/2) d eta. Two
//! Gamma closed forms for that zonal integral circulate, differing in the
//! exponent argument: G^2((Q+a)/4) versus G^2((Q+a)/2). Quadrature singles
//! out the quarter form; both are exposed and `verification` adjudicates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

/// `2 * sqrt(e / pi)`
const TWO_SQRT_E_OVER_PI: f64 = 1.860_382_734_205_265_7;

/// Shift parameter of the Lanczos approximation below.
const GAMMA_R: f64 = 10.900511;

/// Lanczos partial-fraction coefficients (Pugh's thesis, 2004, p. 116).
static GAMMA_DK: &[f64] = &[
    2.485_740_891_387_535_5e-5,
    1.051_423_785_817_219_7,
    -3.456_870_972_220_162_5,
    4.512_277_094_668_948,
    -2.982_852_253_235_766_4,
    1.056_397_115_771_267,
    -1.954_287_731_916_458_7e-1,
    1.709_705_434_044_412e-2,
    -5.719_261_174_043_057e-4,
    4.633_994_733_599_057e-6,
    -2.719_949_084_886_077_2e-9,
];

/// Upper end of the supported Gamma domain; every constant in this crate
/// stays far below it.
pub const GAMMA_MAX_ARGUMENT: f64 = 60.0;

/// Gamma function on (0, 60], accurate to ~1e-13 relative.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    if x > GAMMA_MAX_ARGUMENT {
        return Err(Error::Domain(format!(
            "gamma argument {x} exceeds supported maximum {GAMMA_MAX_ARGUMENT}"
        )));
    }
    let s = GAMMA_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(GAMMA_DK[0], |s, (i, d)| s + d / (x + i as f64 - 1.0));
    Ok(s * TWO_SQRT_E_OVER_PI * ((x - 0.5 + GAMMA_R) / std::f64::consts::E).powf(x - 0.5))
}

/// Surface measure of S^(2n+1): 2 pi^(n+1) / n!.
pub fn sphere_surface(n: usize) -> f64 {
    let mut fact = 1.0;
    for k in 2..=n {
        fact *= k as f64;
    }
    2.0 * std::f64::consts::PI.powi(n as i32 + 1) / fact
}

/// Conformal exponent p_a = 2Q/(Q + a).
pub fn conformal_exponent(q: usize, alpha: f64) -> f64 {
    2.0 * q as f64 / (q as f64 + alpha)
}

fn check_supercritical(n: usize, alpha: f64) -> Result<f64> {
    let q = (2 * n + 2) as f64;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if !(alpha > q) {
        return Err(Error::Domain(format!("alpha must exceed Q = {q}, got {alpha}")));
    }
    Ok(q)
}

/// Lower bound for the constant in the rough reversed inequality on H^n:
///
/// ```text
/// (4|B_1|)^(-lambda/Q) / (2 p t) * ((lambda/Q) max(p/(1-p), t/(1-t)))^(-lambda/Q)
/// ```
///
/// valid under the exponent relation 1/p + 1/t - lambda/Q = 2 with
/// 0 < p, t < 1 and lambda > 0.
pub fn general_lower_bound(q: usize, lambda: f64, p: f64, t: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    if !(p > 0.0 && p < 1.0 && t > 0.0 && t < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "exponents must lie in (0,1), got p={p}, t={t}"
        )));
    }
    let qf = q as f64;
    let relation = 1.0 / p + 1.0 / t - lambda / qf;
    if (relation - 2.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "exponent relation 1/p + 1/t - lambda/Q = 2 violated by {:.3e}",
            relation - 2.0
        )));
    }
    if q < 4 || q % 2 != 0 {
        return Err(Error::InvalidArgument(format!("Q must be even and >= 4, got {q}")));
    }
    let n = (q - 2) / 2;
    let b1 = crate::heisenberg::ball_volume(&crate::heisenberg::GroupParams::new(n)?);
    let exponent = -lambda / qf;
    let max_term = (p / (1.0 - p)).max(t / (1.0 - t));
    Ok((4.0 * b1).powf(exponent) / (2.0 * p * t) * ((lambda / qf) * max_term).powf(exponent))
}

/// Lower end of the sandwich for the sharp sphere constant, a > Q:
/// (8|B_1|)^((Q-a)/Q) / (2^(1 + n(a-Q)/Q) p_a^2).
pub fn conformal_lower_bound(n: usize, alpha: f64) -> Result<f64> {
    let q = check_supercritical(n, alpha)?;
    let b1 = crate::heisenberg::ball_volume(&crate::heisenberg::GroupParams::new(n)?);
    let p_a = conformal_exponent(2 * n + 2, alpha);
    Ok((8.0 * b1).powf((q - alpha) / q)
        / (2f64.powf(1.0 + n as f64 * (alpha - q) / q) * p_a * p_a))
}

/// Which closed form (or quadrature) backs the upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UpperBoundVariant {
    /// Gamma form with G^2((Q + alpha)/4) in the denominator.
    QuarterExponent,
    /// Gamma form with G^2((Q + alpha)/2) in the denominator.
    HalfExponent,
    /// Direct quadrature of the zonal integral (the definition).
    Quadrature,
}

/// Closed-form candidates for the upper end of the sandwich:
/// (2 pi^(n+1)/n!)^((Q-a)/Q) * n! G(a/2) / G^2(arg), with arg = (Q+a)/4 or
/// (Q+a)/2 depending on the variant.
pub fn conformal_upper_bound_gamma(n: usize, alpha: f64, variant: UpperBoundVariant) -> Result<f64> {
    let q = check_supercritical(n, alpha)?;
    let arg = match variant {
        UpperBoundVariant::QuarterExponent => (q + alpha) / 4.0,
        UpperBoundVariant::HalfExponent => (q + alpha) / 2.0,
        UpperBoundVariant::Quadrature => {
            return Err(Error::InvalidArgument(
                "quadrature variant requires a rule; use conformal_upper_bound_quadrature".into(),
            ))
        }
    };
    let mut fact = 1.0;
    for k in 2..=n {
        fact *= k as f64;
    }
    let g = gamma(arg)?;
    Ok(sphere_surface(n).powf((q - alpha) / q) * fact * gamma(alpha / 2.0)? / (g * g))
}

/// Upper bound by definition: |S|^(1 - 2/p_a) * int |1 - xi.conj(eta)|^((a-Q)/2) d eta,
/// the zonal integral evaluated with the supplied rule.
pub fn conformal_upper_bound_quadrature(
    n: usize,
    alpha: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    let q = check_supercritical(n, alpha)?;
    if rule.group_dim() != n {
        return Err(Error::DimensionMismatch { left: rule.group_dim(), right: n });
    }
    let zonal = rule.zonal_integral((alpha - q) / 2.0)?;
    Ok(upper_bound_from_zonal(n, alpha, zonal))
}

/// Assembles |S|^(1 - 2/p_a) * zonal from a precomputed zonal integral.
pub fn upper_bound_from_zonal(n: usize, alpha: f64, zonal: f64) -> f64 {
    let p_a = conformal_exponent(2 * n + 2, alpha);
    sphere_surface(n).powf(1.0 - 2.0 / p_a) * zonal
}

/// Sharp constant D_{n,a} of the classical regime 0 < a < Q:
/// (pi^(n+1) / (2^(n-1) n!))^((Q-a)/Q) * n! G(a/2) / G^2((Q+a)/4).
pub fn frank_lieb_constant(n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let q = (2 * n + 2) as f64;
    if !(alpha > 0.0 && alpha < q) {
        return Err(Error::Domain(format!(
            "classical-regime constant requires 0 < alpha < Q = {q}, got {alpha}"
        )));
    }
    let mut fact = 1.0;
    for k in 2..=n {
        fact *= k as f64;
    }
    let pref = std::f64::consts::PI.powi(n as i32 + 1) / (2f64.powi(n as i32 - 1) * fact);
    let g = gamma((q + alpha) / 4.0)?;
    Ok(pref.powf((q - alpha) / q) * fact * gamma(alpha / 2.0)? / (g * g))
}

/// The exponent sandwich around the sharp constant for one (n, alpha).
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub n: usize,
    pub alpha: f64,
    pub lower: f64,
    pub upper: f64,
    pub upper_variant: UpperBoundVariant,
}

impl BoundsReport {
    /// Sandwich with the upper end from quadrature (the defining value).
    pub fn from_rule(n: usize, alpha: f64, rule: &QuadratureRule) -> Result<Self> {
        let lower = conformal_lower_bound(n, alpha)?;
        let upper = conformal_upper_bound_quadrature(n, alpha, rule)?;
        if !(lower > 0.0 && lower <= upper) {
            return Err(Error::Degenerate(format!(
                "bounds out of order: lower={lower}, upper={upper}"
            )));
        }
        Ok(Self { n, alpha, lower, upper, upper_variant: UpperBoundVariant::Quadrature })
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.lower && value <= self.upper
    }
}
