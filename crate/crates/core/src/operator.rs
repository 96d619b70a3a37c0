//! The reversed kernel |1 - xi . conj(eta)|^((alpha - Q)/2), its dense
//! discrete operator, the bilinear functional, L^p quasi-norms for
//! 0 < p < 1, and the objective ratio.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::accum::CompensatedSum;
use crate::cayley::hermitian_inner;
use crate::error::{Error, Result};
use crate::quadrature::{QuadratureRule, SphericalFunction};

/// Default cap on dense kernel assembly (N^2 doubles).
pub const DEFAULT_NODE_CAP: usize = 8192;

/// Exponent bundle for the reversed problem at one (n, alpha, p).
///
/// Requires alpha > Q = 2n + 2, which places the conformal exponent
/// p_alpha = 2Q/(Q + alpha) in (0, 1) and its conjugate q_alpha = 2Q/(Q - alpha)
/// below zero. The active exponent p may sit anywhere in (0, p_alpha].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProblemParams {
    n: usize,
    alpha: f64,
    p: f64,
}

impl ProblemParams {
    /// Parameters at the conformal exponent p = p_alpha.
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        let q = (2 * n + 2) as f64;
        Self::with_exponent(n, alpha, 2.0 * q / (q + alpha))
    }

    /// Parameters at a chosen subcritical exponent p in (0, p_alpha].
    pub fn with_exponent(n: usize, alpha: f64, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        let q = (2 * n + 2) as f64;
        if !(alpha > q) {
            return Err(Error::Domain(format!(
                "reversed regime requires alpha > Q = {q}, got {alpha}"
            )));
        }
        let p_alpha = 2.0 * q / (q + alpha);
        if !(p > 0.0 && p <= p_alpha + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "exponent p must lie in (0, p_alpha = {p_alpha}], got {p}"
            )));
        }
        Ok(Self { n, alpha, p: p.min(p_alpha) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        2 * self.n + 2
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// lambda = alpha - Q > 0.
    pub fn lambda(&self) -> f64 {
        self.alpha - self.q() as f64
    }

    /// Conformal exponent p_alpha = 2Q/(Q + alpha), in (0, 1).
    pub fn p_alpha(&self) -> f64 {
        let q = self.q() as f64;
        2.0 * q / (q + self.alpha)
    }

    /// q_alpha = 2Q/(Q - alpha), negative.
    pub fn q_alpha(&self) -> f64 {
        let q = self.q() as f64;
        2.0 * q / (q - self.alpha)
    }

    /// Active exponent p.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Conjugate of the active exponent, q = p/(p - 1) < 0.
    pub fn p_conjugate(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// Kernel exponent (alpha - Q)/2 > 0.
    pub fn kernel_exponent(&self) -> f64 {
        (self.alpha - self.q() as f64) / 2.0
    }

    pub fn at_exponent(&self, p: f64) -> Result<Self> {
        Self::with_exponent(self.n, self.alpha, p)
    }
}

/// Kernel k(xi, eta) = |1 - xi . conj(eta)|^((alpha-Q)/2): continuous for
/// alpha > Q, bounded by 2^((alpha-Q)/2), zero on the diagonal.
pub fn kernel(xi: &[Complex64], eta: &[Complex64], params: &ProblemParams) -> f64 {
    let w = hermitian_inner(xi, eta);
    let diff_sqr = (Complex64::new(1.0, 0.0) - w).norm_sqr();
    diff_sqr.powf(params.kernel_exponent() / 2.0)
}

/// Dense symmetric kernel matrix over a rule's nodes (raw kernel values,
/// weights folded in on application).
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    size: usize,
    data: Vec<f64>,
    params: ProblemParams,
    rule_hash: String,
}

impl KernelMatrix {
    pub fn assemble(rule: &QuadratureRule, params: &ProblemParams) -> Result<Self> {
        Self::assemble_with_cap(rule, params, DEFAULT_NODE_CAP)
    }

    pub fn assemble_with_cap(
        rule: &QuadratureRule,
        params: &ProblemParams,
        cap: usize,
    ) -> Result<Self> {
        let n = rule.len();
        if n > cap {
            return Err(Error::TooLarge { nodes: n, cap });
        }
        if rule.group_dim() != params.n() {
            return Err(Error::DimensionMismatch { left: rule.group_dim(), right: params.n() });
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            let xi = rule.node(i);
            for j in (i + 1)..n {
                let k = kernel(xi, rule.node(j), params);
                data[i * n + j] = k;
                data[j * n + i] = k;
            }
        }
        Ok(Self { size: n, data, params: *params, rule_hash: rule.hash() })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn rule_hash(&self) -> &str {
        &self.rule_hash
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    /// (A g)_i = sum_j k(xi_i, xi_j) w_j g_j.
    pub fn apply_into(&self, weights: &[f64], g: &[f64], out: &mut [f64]) {
        debug_assert_eq!(weights.len(), self.size);
        debug_assert_eq!(g.len(), self.size);
        debug_assert_eq!(out.len(), self.size);
        let wg: Vec<f64> = weights.iter().zip(g).map(|(w, v)| w * v).collect();
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.size..(i + 1) * self.size];
            let mut acc = 0.0;
            for (k, x) in row.iter().zip(&wg) {
                acc += k * x;
            }
            *o = acc;
        }
    }

    pub fn apply(&self, weights: &[f64], g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size];
        self.apply_into(weights, g, &mut out);
        out
    }

    /// Discrete zonal row integrals sum_j w_j k(xi_i, xi_j).
    pub fn row_sums(&self, weights: &[f64]) -> Vec<f64> {
        self.apply(weights, &vec![1.0; self.size])
    }

    /// Largest relative spread of the row sums around their weighted mean;
    /// this is the rule's zonal-invariance tolerance for this kernel.
    pub fn row_sum_spread(&self, weights: &[f64]) -> f64 {
        let sums = self.row_sums(weights);
        let total_w: f64 = weights.iter().sum();
        let mean: f64 =
            sums.iter().zip(weights).map(|(s, w)| s * w).sum::<f64>() / total_w;
        sums.iter().map(|s| (s - mean).abs() / mean).fold(0.0, f64::max)
    }

    /// Writes a JSON header line followed by the row-major matrix as
    /// little-endian f64, for offline analysis.
    pub fn export<W: Write>(&self, mut writer: W) -> Result<()> {
        let header = serde_json::json!({
            "format": "kernel-matrix-v1",
            "size": self.size,
            "n": self.params.n(),
            "alpha": self.params.alpha(),
            "kernel_exponent": self.params.kernel_exponent(),
            "rule_hash": self.rule_hash,
        });
        writeln!(writer, "{header}")?;
        for v in &self.data {
            writer.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Nonnegative trial densities (f, g) on a rule, strictly positive nodewise.
#[derive(Debug, Clone, Serialize)]
pub struct DensityPair {
    pub f: SphericalFunction,
    pub g: SphericalFunction,
}

impl DensityPair {
    pub fn new(f: SphericalFunction, g: SphericalFunction) -> Result<Self> {
        if !f.is_strictly_positive() || !g.is_strictly_positive() {
            return Err(Error::InvalidArgument(
                "densities must be strictly positive at every node".into(),
            ));
        }
        Ok(Self { f, g })
    }

    pub fn constant(rule: &QuadratureRule, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidArgument("constant must be positive".into()));
        }
        Ok(Self {
            f: SphericalFunction::constant(rule, c),
            g: SphericalFunction::constant(rule, c),
        })
    }
}

/// Discrete L^p quasi-norm (sum_i w_i f_i^p)^(1/p) for p in (0, 1).
pub fn quasi_norm(f: &SphericalFunction, rule: &QuadratureRule, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("quasi-norm requires p in (0,1), got {p}")));
    }
    f.check_rule(rule)?;
    if f.values().iter().any(|v| *v < 0.0) {
        return Err(Error::InvalidArgument("quasi-norm requires nonnegative values".into()));
    }
    Ok(quasi_norm_positive(f.values(), rule.weights(), p))
}

/// Quasi-norm over raw slices; assumes nonnegative values and p in (0, 1).
pub(crate) fn quasi_norm_positive(values: &[f64], weights: &[f64], p: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for (v, w) in values.iter().zip(weights) {
        acc.add(w * v.powf(p));
    }
    acc.value().powf(1.0 / p)
}

/// I[f, g] = sum_i w_i f_i (A g)_i, the double quadrature of
/// f(xi) g(eta) k(xi, eta).
pub fn bilinear_form(
    matrix: &KernelMatrix,
    rule: &QuadratureRule,
    f: &SphericalFunction,
    g: &SphericalFunction,
) -> Result<f64> {
    f.check_rule(rule)?;
    g.check_rule(rule)?;
    if matrix.rule_hash() != rule.hash() {
        return Err(Error::InvalidArgument("matrix was assembled on a different rule".into()));
    }
    let ag = matrix.apply(rule.weights(), g.values());
    let mut acc = CompensatedSum::new();
    for ((w, fv), agv) in rule.weights().iter().zip(f.values()).zip(&ag) {
        acc.add(w * fv * agv);
    }
    Ok(acc.value())
}

/// Objective I[f, g] / (||f||_p ||g||_p); scale-invariant in each factor.
pub fn objective_ratio(
    pair: &DensityPair,
    rule: &QuadratureRule,
    matrix: &KernelMatrix,
) -> Result<f64> {
    let p = matrix.params().p();
    let nf = quasi_norm(&pair.f, rule, p)?;
    let ng = quasi_norm(&pair.g, rule, p)?;
    if !(nf > 0.0 && ng > 0.0) || !nf.is_finite() || !ng.is_finite() {
        return Err(Error::Degenerate(format!("quasi-norms degenerate: {nf}, {ng}")));
    }
    Ok(bilinear_form(matrix, rule, &pair.f, &pair.g)? / (nf * ng))
}
