//! Cayley transform between H^n and the CR sphere S^(2n+1) minus the south
//! pole, with its Jacobian, the distance relation, L^p function transport,
//! the extremal profile, and the blow-up renormalization map.
//!
//! ```text
//! C(z, t)  = (2z / w, (1 - |z|^2 - it) / w),      w = 1 + |z|^2 + it
//! C^-1(xi) = (xi_1/(1+xi_{n+1}), ..., Im((1-xi_{n+1})/(1+xi_{n+1})))
//! J(z, t)  = 2^(2n+1) / h(z,t)^(n+1),             h(z,t) = (1+|z|^2)^2 + t^2
//! ```
//!
//! Pulling the chordal gauge back through C gives, for u = (z,t), v = (z',t'),
//!
//! ```text
//! |1 - xi . conj(eta)| = 2 |u v^{-1}|^2 h(u)^(-1/2) h(v)^(-1/2),
//! ```
//!
//! where the gauge distance on the right is the norm of u v^{-1} under the
//! group law used here (the t-twist lands on u v^{-1}, not u^{-1} v; the two
//! differ pointwise although either integrates identically).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::heisenberg::HeisenbergPoint;

/// Denominators within this distance of zero count as the south pole.
pub const SOUTH_POLE_EXCLUSION: f64 = 1e-12;

/// Cap radius around the south pole that sampling callers must avoid.
pub const SOUTH_POLE_CAP: f64 = 1e-6;

/// A point of the unit sphere in C^(n+1).
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    xi: Vec<Complex64>,
}

impl SpherePoint {
    /// Wraps coordinates that already lie on the unit sphere (within 1e-12).
    pub fn new(xi: Vec<Complex64>) -> Result<Self> {
        if xi.len() < 2 {
            return Err(Error::InvalidArgument(
                "sphere point needs at least two complex coordinates".into(),
            ));
        }
        let norm_sqr: f64 = xi.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sqr.sqrt() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "coordinates must be unit length, |xi| = {}",
                norm_sqr.sqrt()
            )));
        }
        Ok(Self { xi })
    }

    /// Normalizes arbitrary nonzero coordinates onto the sphere.
    pub fn from_unnormalized(xi: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = xi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Degenerate("cannot normalize zero or non-finite vector".into()));
        }
        Ok(Self { xi: xi.into_iter().map(|c| c / norm).collect() })
    }

    pub fn north_pole(n: usize) -> Self {
        let mut xi = vec![Complex64::new(0.0, 0.0); n + 1];
        xi[n] = Complex64::new(1.0, 0.0);
        Self { xi }
    }

    pub fn south_pole(n: usize) -> Self {
        let mut xi = vec![Complex64::new(0.0, 0.0); n + 1];
        xi[n] = Complex64::new(-1.0, 0.0);
        Self { xi }
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.xi
    }

    /// Group dimension n (the sphere lives in C^(n+1)).
    pub fn group_dim(&self) -> usize {
        self.xi.len() - 1
    }
}

/// Hermitian pairing xi . conj(eta).
pub fn hermitian_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, y) in a.iter().zip(b) {
        let p = x * y.conj();
        re += p.re;
        im += p.im;
    }
    Complex64::new(re, im)
}

/// Conformal factor h(u) = (1 + |z|^2)^2 + t^2.
pub fn conformal_factor(u: &HeisenbergPoint) -> f64 {
    let a = 1.0 + u.z_norm_sqr();
    a * a + u.t() * u.t()
}

/// Cayley transform C: H^n -> S^(2n+1) \ {south pole}.
pub fn to_sphere(u: &HeisenbergPoint) -> SpherePoint {
    let w = Complex64::new(1.0 + u.z_norm_sqr(), u.t());
    let mut xi: Vec<Complex64> = u.z().iter().map(|zj| 2.0 * zj / w).collect();
    xi.push((Complex64::new(1.0 - u.z_norm_sqr(), -u.t())) / w);
    SpherePoint { xi }
}

/// Inverse Cayley transform; fails within 1e-12 of the south pole.
pub fn from_sphere(xi: &SpherePoint) -> Result<HeisenbergPoint> {
    let n = xi.group_dim();
    let last = xi.xi[n];
    let denom = Complex64::new(1.0, 0.0) + last;
    if denom.norm() < SOUTH_POLE_EXCLUSION {
        return Err(Error::SouthPoleSingularity { denominator: denom.norm() });
    }
    let z: Vec<Complex64> = xi.xi[..n].iter().map(|c| c / denom).collect();
    let t = ((Complex64::new(1.0, 0.0) - last) / denom).im;
    HeisenbergPoint::new(z, t)
}

/// Jacobian of the Cayley transform, J(z,t) = 2^(2n+1) / h(z,t)^(n+1).
pub fn jacobian(u: &HeisenbergPoint) -> f64 {
    let n = u.dim() as i32;
    2f64.powi(2 * n + 1) / conformal_factor(u).powi(n + 1)
}

/// Chordal gauge |1 - xi . conj(eta)| on the sphere; values in [0, 2].
pub fn chordal_gauge(xi: &SpherePoint, eta: &SpherePoint) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    (one - hermitian_inner(&xi.xi, &eta.xi)).norm()
}

/// Gauge distance |u v^{-1}| entering the chordal pullback identity.
pub fn pullback_gauge(u: &HeisenbergPoint, v: &HeisenbergPoint) -> Result<f64> {
    Ok(u.multiply(&v.inverse())?.norm())
}

/// L^p transport of a sphere function: F(u) = J(u)^(1/p) f(C(u)), which
/// preserves the L^p (quasi-)norm between S^(2n+1) and H^n.
pub fn transport_value<F>(f: F, p: f64, u: &HeisenbergPoint) -> Result<f64>
where
    F: Fn(&SpherePoint) -> f64,
{
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("transport exponent must be > 0, got {p}")));
    }
    Ok(jacobian(u).powf(1.0 / p) * f(&to_sphere(u)))
}

/// Transport of a grid-sampled function, evaluated by nearest-node lookup.
/// Closed-form transport is preferred wherever exactness matters; this path
/// serves diagnostics over solver output.
pub fn transport_sampled_value(
    f: &crate::quadrature::SphericalFunction,
    rule: &crate::quadrature::QuadratureRule,
    p: f64,
    u: &HeisenbergPoint,
) -> Result<f64> {
    f.check_rule(rule)?;
    transport_value(|xi| f.values()[rule.nearest_node(xi)], p, u)
}

/// Extremal profile H(u) = h(u)^(-(Q + alpha)/4); H(0) = 1 and
/// H decays like |u|^(-(Q + alpha)).
pub fn extremal_profile(u: &HeisenbergPoint, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let q = (2 * u.dim() + 2) as f64;
    Ok(conformal_factor(u).powf(-(q + alpha) / 4.0))
}

/// Blow-up renormalization of a sphere function:
///
/// ```text
/// Phi(u) = lambda^(alpha/(q-2)) * ((1+|l z|^2)^2 + (l^2 t)^2)^(-(Q-alpha)/4)
///          * phi(C(d_lambda u))
/// ```
///
/// With lambda chosen by `blowup_scale` so that
/// lambda^(alpha/(q-2)) phi(north pole) = 1, the renormalized profile equals
/// 1 at the origin.
pub fn renormalize_blowup<F>(
    phi: F,
    lambda: f64,
    alpha: f64,
    q_exponent: f64,
    u: &HeisenbergPoint,
) -> Result<f64>
where
    F: Fn(&SpherePoint) -> f64,
{
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    if q_exponent == 2.0 {
        return Err(Error::InvalidArgument("renormalization undefined at q = 2".into()));
    }
    let homog_q = (2 * u.dim() + 2) as f64;
    let dilated = u.dilate(lambda)?;
    let h = conformal_factor(&dilated);
    Ok(lambda.powf(alpha / (q_exponent - 2.0))
        * h.powf(-(homog_q - alpha) / 4.0)
        * phi(&to_sphere(&dilated)))
}

/// The scale lambda solving lambda^(alpha/(q-2)) * phi_north = 1.
pub fn blowup_scale(phi_north: f64, alpha: f64, q_exponent: f64) -> Result<f64> {
    if !(phi_north > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "profile value at the pole must be positive, got {phi_north}"
        )));
    }
    if q_exponent == 2.0 {
        return Err(Error::InvalidArgument("renormalization undefined at q = 2".into()));
    }
    Ok(phi_north.powf(-(q_exponent - 2.0) / alpha))
}

/// Exponent e in the conversion I_sphere = 2^e I_heisenberg between the
/// sphere bilinear functional at (f, g) and the H^n functional at their
/// p_alpha transports: e = n (Q - alpha) / Q.
pub fn functional_factor_exponent(n: usize, alpha: f64) -> f64 {
    let q = (2 * n + 2) as f64;
    n as f64 * (q - alpha) / q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::GroupParams;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> HeisenbergPoint {
        let z = (0..n)
            .map(|_| Complex64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
            .collect();
        HeisenbergPoint::new(z, rng.random_range(-scale * scale..scale * scale)).unwrap()
    }

    #[test]
    fn origin_maps_to_north_pole() {
        let xi = to_sphere(&HeisenbergPoint::identity(2));
        assert_eq!(xi, SpherePoint::north_pole(2));
        let back = from_sphere(&SpherePoint::north_pole(2)).unwrap();
        assert_eq!(back, HeisenbergPoint::identity(2));
    }

    #[test]
    fn image_is_unit_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let u = random_point(&mut rng, 1, 3.0);
            let xi = to_sphere(&u);
            let norm: f64 = xi.coords().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_both_ways() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10_000 {
            let u = random_point(&mut rng, 2, 2.5);
            let v = from_sphere(&to_sphere(&u)).unwrap();
            for (a, b) in u.z().iter().zip(v.z()) {
                assert!((a - b).norm() < 1e-10);
            }
            assert!((u.t() - v.t()).abs() < 1e-10);
        }
    }

    #[test]
    fn roundtrip_from_sphere_side() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut kept = 0;
        while kept < 10_000 {
            let raw: Vec<Complex64> = (0..2)
                .map(|_| Complex64::new(rng.random(), rng.random()) * 2.0 - Complex64::new(1.0, 1.0))
                .collect();
            let Ok(xi) = SpherePoint::from_unnormalized(raw) else { continue };
            let south = SpherePoint::south_pole(1);
            let chordal_to_south: f64 = xi
                .coords()
                .iter()
                .zip(south.coords())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if chordal_to_south < SOUTH_POLE_CAP {
                continue;
            }
            kept += 1;
            let eta = to_sphere(&from_sphere(&xi).unwrap());
            let err: f64 = xi
                .coords()
                .iter()
                .zip(eta.coords())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-9, "roundtrip error {err}");
        }
    }

    #[test]
    fn south_pole_rejected() {
        assert!(matches!(
            from_sphere(&SpherePoint::south_pole(1)),
            Err(Error::SouthPoleSingularity { .. })
        ));
    }

    #[test]
    fn jacobian_values() {
        assert_eq!(jacobian(&HeisenbergPoint::identity(1)), 8.0);
        assert_eq!(jacobian(&HeisenbergPoint::identity(2)), 32.0);
        let u = HeisenbergPoint::new(vec![Complex64::new(1.0, 0.0)], 0.0).unwrap();
        // h = 4 at |z|=1, t=0 so J = 8/16
        assert_eq!(jacobian(&u), 0.5);
    }

    #[test]
    fn jacobian_decays_under_dilation() {
        let u = HeisenbergPoint::new(vec![Complex64::new(0.7, -0.2)], 0.4).unwrap();
        let mut prev = jacobian(&u);
        for &lambda in &[2.0, 4.0, 8.0, 64.0, 512.0] {
            let j = jacobian(&u.dilate(lambda).unwrap());
            assert!(j < prev);
            prev = j;
        }
        assert!(prev < 1e-10);
    }

    #[test]
    fn chordal_gauge_range_and_poles() {
        let n_pole = SpherePoint::north_pole(1);
        let s_pole = SpherePoint::south_pole(1);
        assert_eq!(chordal_gauge(&n_pole, &n_pole), 0.0);
        assert_eq!(chordal_gauge(&n_pole, &s_pole), 2.0);
    }

    #[test]
    fn distance_relation_identity() {
        // |1 - xi.conj(eta)| = 2 |u v^{-1}|^2 (h(u) h(v))^(-1/2)
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..10_000 {
            let u = random_point(&mut rng, 1, 2.0);
            let v = random_point(&mut rng, 1, 2.0);
            let lhs = chordal_gauge(&to_sphere(&u), &to_sphere(&v));
            let d = pullback_gauge(&u, &v).unwrap();
            let rhs = 2.0 * d * d / (conformal_factor(&u) * conformal_factor(&v)).sqrt();
            assert!(
                (lhs - rhs).abs() <= 1e-10 * rhs.max(1e-30),
                "lhs={lhs} rhs={rhs}"
            );
        }
    }

    #[test]
    fn transport_of_constant_matches_profile() {
        // p = p_alpha transport of 1 equals 2^((2n+1)/p_alpha) H(u) pointwise
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for n in [1usize, 2] {
            let alpha = (2 * n + 2) as f64 + 2.0;
            let q = (2 * n + 2) as f64;
            let p_a = 2.0 * q / (q + alpha);
            let scale = 2f64.powf((2.0 * n as f64 + 1.0) / p_a);
            for _ in 0..2_000 {
                let u = random_point(&mut rng, n, 2.0);
                let lhs = transport_value(|_| 1.0, p_a, &u).unwrap();
                let rhs = scale * extremal_profile(&u, alpha).unwrap();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn transport_at_p_one_is_jacobian() {
        let u = HeisenbergPoint::new(vec![Complex64::new(0.3, 0.1)], -0.8).unwrap();
        assert_relative_eq!(
            transport_value(|_| 1.0, 1.0, &u).unwrap(),
            jacobian(&u),
            max_relative = 1e-15
        );
    }

    #[test]
    fn profile_values() {
        let e = HeisenbergPoint::identity(1);
        assert_eq!(extremal_profile(&e, 2.0).unwrap(), 1.0);
        // n=1, alpha=2 at (0, 1): h = 2, exponent 3/2
        let u = HeisenbergPoint::new(vec![Complex64::new(0.0, 0.0)], 1.0).unwrap();
        assert_relative_eq!(
            extremal_profile(&u, 2.0).unwrap(),
            2f64.powf(-1.5),
            max_relative = 1e-15
        );
        assert!(extremal_profile(&e, 0.0).is_err());
    }

    #[test]
    fn profile_decay_rate() {
        // H(d_l u) * l^(Q+alpha) -> |u|^(-(Q+alpha)) as l -> inf
        let u = HeisenbergPoint::new(vec![Complex64::new(0.9, 0.3)], 0.7).unwrap();
        let alpha = 3.0;
        let q = 4.0;
        let lambda = 1e3;
        let lhs = extremal_profile(&u.dilate(lambda).unwrap(), alpha).unwrap()
            * lambda.powf(q + alpha);
        let rhs = u.norm().powf(-(q + alpha));
        assert_relative_eq!(lhs, rhs, max_relative = 1e-4);
    }

    #[test]
    fn renormalization_origin_normalization() {
        let phi = |xi: &SpherePoint| 0.25 + chordal_gauge(xi, &SpherePoint::north_pole(1));
        let alpha = 6.0;
        let q_exp = 0.7 / (0.7 - 1.0);
        let lambda = blowup_scale(phi(&SpherePoint::north_pole(1)), alpha, q_exp).unwrap();
        let origin = HeisenbergPoint::identity(1);
        let value = renormalize_blowup(phi, lambda, alpha, q_exp, &origin).unwrap();
        assert_abs_diff_eq!(value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn renormalization_at_unit_scale() {
        // lambda = 1, phi = 1: Phi(u) = h(u)^((alpha-Q)/4)
        let u = HeisenbergPoint::new(vec![Complex64::new(0.5, -1.0)], 0.3).unwrap();
        let alpha = 6.0;
        let v = renormalize_blowup(|_| 1.0, 1.0, alpha, -4.0, &u).unwrap();
        assert_relative_eq!(
            v,
            conformal_factor(&u).powf((alpha - 4.0) / 4.0),
            max_relative = 1e-14
        );
        assert!(renormalize_blowup(|_| 1.0, 1.0, alpha, 2.0, &u).is_err());
        assert!(renormalize_blowup(|_| 1.0, 0.0, alpha, -4.0, &u).is_err());
    }

    #[test]
    fn jacobian_integral_importance_sampled() {
        // int_{H^1} J du = |S^3| = 2 pi^2, via a 3D Cauchy proposal
        use rand_distr::StandardNormal;
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let samples = 400_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..samples {
            let g: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            let chi: f64 = rng.sample(StandardNormal);
            let s = chi.abs().max(1e-12);
            let v = [g[0] / s, g[1] / s, g[2] / s];
            let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            let density = (1.0 / (PI * PI)) * (1.0 + r2).powi(-2);
            let u = HeisenbergPoint::new(vec![Complex64::new(v[0], v[1])], v[2]).unwrap();
            let w = jacobian(&u) / density;
            sum += w;
            sum_sq += w * w;
        }
        let mean = sum / samples as f64;
        let var = (sum_sq / samples as f64 - mean * mean) / samples as f64;
        let se = var.sqrt();
        let exact = 2.0 * PI * PI;
        assert!(
            (mean - exact).abs() < 3.0 * se && se / exact < 0.01,
            "IS estimate {mean} +- {se} vs {exact}"
        );
    }

    #[test]
    fn transport_preserves_lp_norms() {
        // ||f||_p on the sphere equals ||F||_p on H^n: sphere side by the
        // product rule, H^n side by importance sampling from the Jacobian
        // density (int F^p du = E[ |S| f(C(u))^p ] under u ~ J/|S|).
        use crate::quadrature::QuadratureRule;
        let rule = QuadratureRule::product_hopf(16).unwrap();
        let north = SpherePoint::north_pole(1);
        // smooth and bounded below: a degree-2 polynomial in the zonal
        // variable, so the product rule integrates f^p spectrally well
        let f = |xi: &SpherePoint| {
            let w = hermitian_inner(xi.coords(), north.coords());
            0.7 + 0.3 * w.re + 0.2 * w.norm_sqr()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let surface = 2.0 * PI * PI;
        for p in [0.5, 0.8, 1.0, 2.0] {
            let sphere_side = rule
                .integrate(|i, _| f(&rule.sphere_point(i)).powf(p))
                .unwrap()
                .powf(1.0 / p);
            let samples = 60_000;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..samples {
                // uniform sphere point, i.e. u ~ J/|S| through the inverse map
                use rand_distr::StandardNormal;
                let raw: Vec<Complex64> = (0..2)
                    .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                    .collect();
                let xi = SpherePoint::from_unnormalized(raw).unwrap();
                let w = surface * f(&xi).powf(p);
                sum += w;
                sum_sq += w * w;
            }
            let mean = sum / samples as f64;
            let se = ((sum_sq / samples as f64 - mean * mean).max(0.0) / samples as f64).sqrt();
            let hn_side = mean.powf(1.0 / p);
            let hn_sigma = se / p * mean.powf(1.0 / p - 1.0);
            assert!(
                (hn_side - sphere_side).abs() <= 3.0 * hn_sigma,
                "p={p}: sphere {sphere_side} vs hn {hn_side} +- {hn_sigma}"
            );
        }
    }

    #[test]
    fn transport_of_grid_function_tracks_closed_form() {
        use crate::quadrature::{QuadratureRule, SphericalFunction};
        let rule = QuadratureRule::product_hopf(20).unwrap();
        let north = SpherePoint::north_pole(1);
        let f = |xi: &SpherePoint| 0.6 + 0.4 * (1.0 - chordal_gauge(xi, &north)).powi(2);
        let sampled = SphericalFunction::sample(&rule, f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..50 {
            let u = random_point(&mut rng, 1, 1.5);
            let exact = transport_value(f, 0.8, &u).unwrap();
            let grid = transport_sampled_value(&sampled, &rule, 0.8, &u).unwrap();
            // nearest-node lookup is piecewise constant; accuracy follows
            // the rule's mesh width
            assert!(
                (grid - exact).abs() <= 0.05 * exact,
                "grid {grid} vs exact {exact}"
            );
        }
    }

    #[test]
    fn functional_factor_matches_bound_relation() {
        // The sphere lower bound equals the H^n one divided by 2^(n(alpha-Q)/Q),
        // i.e. multiplied by 2^e with e the conversion exponent.
        for (n, alpha) in [(1usize, 6.0), (1, 8.0), (2, 7.0)] {
            let q = (2 * n + 2) as f64;
            let p_a = crate::constants::conformal_exponent(2 * n + 2, alpha);
            let b1 = crate::heisenberg::ball_volume(&GroupParams::new(n).unwrap());
            let hn_bound = (8.0 * b1).powf((q - alpha) / q) / (2.0 * p_a * p_a);
            let sphere_bound = crate::constants::conformal_lower_bound(n, alpha).unwrap();
            let e = functional_factor_exponent(n, alpha);
            assert_relative_eq!(sphere_bound, hn_bound * 2f64.powf(e), max_relative = 1e-13);
        }
    }
}
