//! Constructions, closure analysis, and numerical verification for
//! S^1-equivariant minimal Legendrian surfaces in S^5, together with the
//! asymptotically conical special Lagrangian families built over their cones.
//!
//! The library is organized around the two-parameter family
//! u_{alpha,J}(s,t) = e^{As} z(t), where A = i diag(1, alpha, -1-alpha) and
//! z solves the C. Neumann system on S^5:
//!
//! - [`elliptic`]: Jacobi sn/cn/dn and Ke(k) (AGM), the closed-form backbone;
//! - [`neumann`]: equations of motion, adaptive integration with constraint
//!   re-projection, conserved quantities, constraint residuals;
//! - [`family`]: turning-value cubic, closed-form profile, phases, metric
//!   and Gauss curvature of u_{alpha,J};
//! - [`grid`]: sampled surface patches (rayon-parallel construction);
//! - [`periods`]: closure detection, explicit period lattices of the J = 0
//!   tori, embeddedness scans, and the monotone theta_2(T) search;
//! - [`verify`]: finite-difference audits (harmonic, Hopf, Legendrian,
//!   calibration) and the closed-form-vs-integrator cross-check;
//! - [`acfamily`]: the one-parameter asymptotically conical family over any
//!   special Legendrian link;
//! - [`export`]: OBJ / CSV / JSON output.

// Indexed loops across parallel component arrays are the local idiom.
#![allow(clippy::needless_range_loop)]

pub mod acfamily;
pub mod elliptic;
pub mod error;
pub mod export;
pub mod family;
pub mod geom;
pub mod grid;
pub mod neumann;
mod par;
pub mod periods;
pub mod quad;
pub mod rational;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use family::{ConeParameters, Immersion, J_MAX};
pub use grid::SurfaceGrid;
pub use neumann::{NeumannState, SymmetryAxis};
