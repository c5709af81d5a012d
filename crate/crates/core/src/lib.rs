//! Calculus of anisotropic N-functions and a constrained eigensolver for
//! the anisotropic Phi-Laplacian.
//!
//! The crate models 1-dimensional N-functions `B(t) = ∫ b` and
//! n-dimensional N-functions `Φ(ξ)` (separable sums, radial profiles,
//! linear composites, custom closures), provides their Young conjugates,
//! spherically increasing symmetrals and Sobolev conjugates, Luxemburg
//! norms on box grids, and solves
//!
//! ```text
//! inf { ∫ Φ(∇u) dx : u = 0 on ∂Ω, ∫ B(u) dx = r }
//! ```
//!
//! on rectangular Dirichlet grids, extracting the multiplier λ_r of the
//! associated Euler–Lagrange equation together with residual diagnostics.

pub mod config;
pub mod error;
pub mod grid;
pub mod numerics;
pub mod report;
pub mod sobolev;
pub mod solver;
pub mod spec;
pub mod verify;
pub mod young1d;
pub mod youngnd;

pub use error::{Error, Result};
pub use young1d::{Density1D, YoungFunction1D};
pub use youngnd::NFunction;
