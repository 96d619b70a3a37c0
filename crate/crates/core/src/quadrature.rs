//! Quadrature on the CR sphere S^(2n+1): seeded Monte Carlo for every n and
//! a deterministic product rule in Hopf coordinates for n = 1.
//!
//! The product rule parametrizes S^3 as
//! xi = (cos(th) e^(i p1), sin(th) e^(i p2)) with volume element
//! cos(th) sin(th) dth dp1 dp2. Substituting s = sin^2(th) turns the polar
//! integral into int_0^1 f ds / 2, handled by Gauss-Legendre; the angles take
//! uniform periodic grids. Total weight is |S^3| = 2 pi^2.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::accum::CompensatedSum;
use crate::cayley::{SpherePoint, SOUTH_POLE_CAP};
use crate::constants::sphere_surface;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    MonteCarlo,
    ProductHopf,
}

/// Replayable description of a rule: everything needed to rebuild it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDescriptor {
    pub kind: RuleKind,
    pub group_dim: usize,
    pub node_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
}

/// Nodes on S^(2n+1) with positive weights summing to the surface measure.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    group_dim: usize,
    /// Flattened nodes, stride `group_dim + 1`.
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
    descriptor: RuleDescriptor,
}

impl QuadratureRule {
    /// i.i.d. uniform nodes (normalized Gaussian vectors in C^(n+1)) with
    /// equal weights |S^(2n+1)| / N. Nodes falling in the south-pole cap are
    /// redrawn so the rule stays usable for Cayley transport.
    pub fn monte_carlo(n: usize, node_count: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("group dimension n must be >= 1".into()));
        }
        if node_count < 2 {
            return Err(Error::InvalidArgument(format!(
                "Monte Carlo rule needs at least 2 nodes, got {node_count}"
            )));
        }
        let dim = n + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes = Vec::with_capacity(node_count * dim);
        let mut buf = vec![Complex64::new(0.0, 0.0); dim];
        let mut placed = 0;
        while placed < node_count {
            let mut norm_sqr = 0.0;
            for c in buf.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *c = Complex64::new(re, im);
                norm_sqr += c.norm_sqr();
            }
            if norm_sqr == 0.0 {
                continue;
            }
            let inv = norm_sqr.sqrt().recip();
            for c in buf.iter_mut() {
                *c *= inv;
            }
            // distance to the south pole (0, ..., -1)
            let mut dist_sqr = 0.0;
            for (k, c) in buf.iter().enumerate() {
                let target = if k == dim - 1 { Complex64::new(-1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                dist_sqr += (c - target).norm_sqr();
            }
            if dist_sqr.sqrt() < SOUTH_POLE_CAP {
                continue;
            }
            nodes.extend_from_slice(&buf);
            placed += 1;
        }
        let w = sphere_surface(n) / node_count as f64;
        Ok(Self {
            group_dim: n,
            nodes,
            weights: vec![w; node_count],
            descriptor: RuleDescriptor {
                kind: RuleKind::MonteCarlo,
                group_dim: n,
                node_count,
                seed: Some(seed),
                resolution: None,
            },
        })
    }

    /// Deterministic product rule on S^3 (n = 1 only): Gauss-Legendre in
    /// s = sin^2(th) crossed with uniform grids in both Hopf angles.
    /// `resolution` is the node count per coordinate, so the rule has
    /// resolution^3 nodes.
    pub fn product_hopf(resolution: usize) -> Result<Self> {
        if resolution < 4 {
            return Err(Error::InvalidArgument(format!(
                "product rule resolution must be >= 4, got {resolution}"
            )));
        }
        let (s_nodes, s_weights) = gauss_legendre_unit(resolution);
        let m = resolution;
        let two_pi = 2.0 * std::f64::consts::PI;
        let wphi = two_pi / m as f64;
        let angles: Vec<Complex64> = (0..m)
            .map(|k| {
                let a = two_pi * k as f64 / m as f64;
                Complex64::new(a.cos(), a.sin())
            })
            .collect();
        let node_count = resolution * m * m;
        let mut nodes = Vec::with_capacity(node_count * 2);
        let mut weights = Vec::with_capacity(node_count);
        for (s, ws) in s_nodes.iter().zip(&s_weights) {
            let sin_th = s.sqrt();
            let cos_th = (1.0 - s).sqrt();
            let w = 0.5 * ws * wphi * wphi;
            for e1 in &angles {
                for e2 in &angles {
                    nodes.push(cos_th * e1);
                    nodes.push(sin_th * e2);
                    weights.push(w);
                }
            }
        }
        Ok(Self {
            group_dim: 1,
            nodes,
            weights,
            descriptor: RuleDescriptor {
                kind: RuleKind::ProductHopf,
                group_dim: 1,
                node_count,
                seed: None,
                resolution: Some(resolution),
            },
        })
    }

    pub fn from_descriptor(d: &RuleDescriptor) -> Result<Self> {
        match d.kind {
            RuleKind::MonteCarlo => {
                let seed = d.seed.ok_or_else(|| {
                    Error::InvalidArgument("Monte Carlo descriptor missing seed".into())
                })?;
                Self::monte_carlo(d.group_dim, d.node_count, seed)
            }
            RuleKind::ProductHopf => {
                let res = d.resolution.ok_or_else(|| {
                    Error::InvalidArgument("product rule descriptor missing resolution".into())
                })?;
                Self::product_hopf(res)
            }
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn group_dim(&self) -> usize {
        self.group_dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node(&self, i: usize) -> &[Complex64] {
        let d = self.group_dim + 1;
        &self.nodes[i * d..(i + 1) * d]
    }

    pub fn sphere_point(&self, i: usize) -> SpherePoint {
        SpherePoint::from_unnormalized(self.node(i).to_vec()).expect("nodes are unit vectors")
    }

    pub fn descriptor(&self) -> &RuleDescriptor {
        &self.descriptor
    }

    /// FNV-1a fingerprint of the canonical descriptor JSON.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(&self.descriptor).expect("descriptor serializes");
        let mut h: u64 = 0xcbf29ce484222325;
        for b in json.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }

    /// Sum of w_i f(node_i) with compensated fixed-order accumulation.
    /// NaN from the integrand aborts with the offending node index.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(usize, &[Complex64]) -> f64,
    {
        let mut acc = CompensatedSum::new();
        for i in 0..self.len() {
            let v = f(i, self.node(i));
            if v.is_nan() {
                return Err(Error::NonFinite { context: "integrand", index: i });
            }
            acc.add(self.weights[i] * v);
        }
        Ok(acc.value())
    }

    /// Integral of a grid-sampled function.
    pub fn integrate_sampled(&self, f: &SphericalFunction) -> Result<f64> {
        f.check_rule(self)?;
        self.integrate(|i, _| f.values()[i])
    }

    /// Zonal integral int |1 - xi . conj(eta)|^s d eta, which is independent
    /// of the probe point; evaluated at the north pole.
    pub fn zonal_integral(&self, exponent: f64) -> Result<f64> {
        let d = self.group_dim;
        self.integrate(|_, node| {
            let one_minus = Complex64::new(1.0, 0.0) - node[d].conj();
            one_minus.norm_sqr().powf(exponent / 2.0)
        })
    }

    /// Index of the node closest (in chordal distance) to a sphere point.
    pub fn nearest_node(&self, xi: &SpherePoint) -> usize {
        let coords = xi.coords();
        let mut best = (f64::MAX, 0usize);
        for i in 0..self.len() {
            let d: f64 =
                self.node(i).iter().zip(coords).map(|(a, b)| (a - b).norm_sqr()).sum();
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }
}

/// Real samples aligned with a rule's nodes.
#[derive(Debug, Clone, Serialize)]
pub struct SphericalFunction {
    values: Vec<f64>,
    rule_hash: String,
}

impl SphericalFunction {
    pub fn sample<F>(rule: &QuadratureRule, mut f: F) -> Result<Self>
    where
        F: FnMut(&SpherePoint) -> f64,
    {
        let mut values = Vec::with_capacity(rule.len());
        for i in 0..rule.len() {
            let v = f(&rule.sphere_point(i));
            if !v.is_finite() {
                return Err(Error::NonFinite { context: "sampled function", index: i });
            }
            values.push(v);
        }
        Ok(Self { values, rule_hash: rule.hash() })
    }

    pub fn from_values(rule: &QuadratureRule, values: Vec<f64>) -> Result<Self> {
        if values.len() != rule.len() {
            return Err(Error::InvalidArgument(format!(
                "value count {} does not match rule size {}",
                values.len(),
                rule.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "function values", index: i });
        }
        Ok(Self { values, rule_hash: rule.hash() })
    }

    pub fn constant(rule: &QuadratureRule, c: f64) -> Self {
        Self { values: vec![c; rule.len()], rule_hash: rule.hash() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn rule_hash(&self) -> &str {
        &self.rule_hash
    }

    pub fn check_rule(&self, rule: &QuadratureRule) -> Result<()> {
        if self.rule_hash != rule.hash() {
            return Err(Error::InvalidArgument(
                "function was sampled on a different rule".into(),
            ));
        }
        if self.values.len() != rule.len() {
            return Err(Error::InvalidArgument("function length does not match rule".into()));
        }
        Ok(())
    }

    /// All values strictly positive (density requirement).
    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().all(|v| *v > 0.0)
    }
}

/// Gauss-Legendre nodes and weights on [0, 1], by Newton iteration on P_m.
fn gauss_legendre_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for k in 0..m {
        // Tricomi-style initial guess on [-1, 1]
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes[m - 1 - k] = 0.5 * (x + 1.0);
        weights[m - 1 - k] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=m {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
