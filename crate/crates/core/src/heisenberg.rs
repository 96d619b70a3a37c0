//! Heisenberg group H^n: group law, gauge norm, dilations, ball volume.
//!
//! Points are pairs (z, t) with z in C^n and t real, multiplied by
//!
//! ```text
//! (z, t)(z', t') = (z + z', t + t' + 2 Im(z . conj z'))
//! ```
//!
//! The gauge norm is |u| = (|z|^4 + t^2)^(1/4), homogeneous of degree 1 under
//! the parabolic dilations d_l(z, t) = (l z, l^2 t). Haar measure is Lebesgue
//! measure on C^n x R and scales as l^Q with Q = 2n + 2.

use num_complex::Complex64;
use serde::Serialize;

use crate::constants::gamma;
use crate::error::{Error, Result};

/// Group dimension bundle: n and the homogeneous dimension Q = 2n + 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroupParams {
    n: usize,
}

impl GroupParams {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("group dimension n must be >= 1".into()));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Homogeneous dimension Q = 2n + 2.
    pub fn q(&self) -> usize {
        2 * self.n + 2
    }
}

/// A point (z, t) of H^n.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergPoint {
    z: Vec<Complex64>,
    t: f64,
}

impl HeisenbergPoint {
    pub fn new(z: Vec<Complex64>, t: f64) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::InvalidArgument("z must have at least one entry".into()));
        }
        if let Some(i) = z.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite { context: "HeisenbergPoint z", index: i });
        }
        if !t.is_finite() {
            return Err(Error::NonFinite { context: "HeisenbergPoint t", index: 0 });
        }
        Ok(Self { z, t })
    }

    pub fn identity(n: usize) -> Self {
        Self { z: vec![Complex64::new(0.0, 0.0); n], t: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &[Complex64] {
        &self.z
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Group product uv.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        let z: Vec<Complex64> =
            self.z.iter().zip(&other.z).map(|(a, b)| a + b).collect();
        let twist: f64 = self
            .z
            .iter()
            .zip(&other.z)
            .map(|(a, b)| (a * b.conj()).im)
            .sum();
        Ok(Self { z, t: self.t + other.t + 2.0 * twist })
    }

    /// Group inverse u^{-1} = (-z, -t).
    pub fn inverse(&self) -> Self {
        Self { z: self.z.iter().map(|c| -c).collect(), t: -self.t }
    }

    /// Gauge norm |u| = (|z|^4 + t^2)^(1/4).
    pub fn norm(&self) -> f64 {
        let z2: f64 = self.z.iter().map(|c| c.norm_sqr()).sum();
        (z2 * z2 + self.t * self.t).sqrt().sqrt()
    }

    /// Left-invariant distance d(u, v) = |v^{-1} u|.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(other.inverse().multiply(self)?.norm())
    }

    /// Parabolic dilation d_l(u) = (l z, l^2 t), l > 0.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dilation factor must be positive, got {lambda}"
            )));
        }
        Ok(Self {
            z: self.z.iter().map(|c| c * lambda).collect(),
            t: self.t * lambda * lambda,
        })
    }

    /// |z|^2, the squared Euclidean norm of the horizontal part.
    pub fn z_norm_sqr(&self) -> f64 {
        self.z.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Volume of the unit gauge ball B(0, 1) in H^n,
/// |B_1| = 2 pi^((Q-2)/2) G(1/2) G((Q+2)/4) / ((Q-2) G((Q-2)/2) G((Q+4)/4)).
///
/// For Q = 4 this reduces to pi^2 / 2.
pub fn ball_volume(params: &GroupParams) -> f64 {
    let q = params.q() as f64;
    let num = 2.0 * std::f64::consts::PI.powf((q - 2.0) / 2.0)
        * gamma(0.5).expect("0.5 in gamma domain")
        * gamma((q + 2.0) / 4.0).expect("(Q+2)/4 in gamma domain");
    let den = (q - 2.0)
        * gamma((q - 2.0) / 2.0).expect("(Q-2)/2 in gamma domain")
        * gamma((q + 4.0) / 4.0).expect("(Q+4)/4 in gamma domain");
    num / den
}
