//! Reversed Hardy-Littlewood-Sobolev extremal problem on the Heisenberg
//! group H^n and the CR sphere S^(2n+1).
//!
//! For alpha > Q = 2n + 2 the bilinear functional
//!
//! ```text
//! I[f, g] = iint f(xi) g(eta) |1 - xi . conj(eta)|^((alpha - Q)/2) dxi deta
//! ```
//!
//! is bounded below by N ||f||_p ||g||_p over nonnegative densities, with
//! quasi-norm exponents p in (0, 1). This crate computes the subcritical and
//! critical extremal constants by alternating minimization of the
//! Euler-Lagrange system
//!
//! ```text
//! N f^(p-1) = A g,   N g^(p-1) = A f,
//! ```
//!
//! where each half-step is the exact partial minimizer given by the equality
//! case of the reversed Hoelder inequality, and approaches the conformal
//! exponent p_alpha = 2Q/(Q + alpha) through a warm-started continuation
//! ladder. Around the solver sit the exact group arithmetic of H^n, the
//! Cayley transform with its Jacobian and distance identities, closed-form
//! constants and two-sided bounds, deterministic and Monte Carlo sphere
//! quadrature, and randomized verification of every identity at desk scale.
//!
//! Modules:
//!
//! * [`heisenberg`]: group law, gauge norm, dilations, ball volume.
//! * [`cayley`]: the transform, Jacobian, transport, renormalization.
//! * [`constants`]: Gamma evaluation, surface measures, sharp-constant bounds.
//! * [`quadrature`]: product-Hopf and Monte Carlo rules on S^(2n+1).
//! * [`operator`]: kernel matrices, quasi-norms, the objective ratio.
//! * [`solver`]: alternating minimization and the continuation ladder.
//! * [`verification`]: randomized inequality and identity suites.

pub mod accum;
pub mod cayley;
pub mod constants;
pub mod error;
pub mod heisenberg;
pub mod operator;
pub mod quadrature;
pub mod solver;
pub mod verification;

pub use cayley::SpherePoint;
pub use error::{Error, Result};
pub use heisenberg::{GroupParams, HeisenbergPoint};
pub use operator::{DensityPair, KernelMatrix, ProblemParams};
pub use quadrature::{QuadratureRule, SphericalFunction};
pub use solver::{SolverConfig, SolverReport};
