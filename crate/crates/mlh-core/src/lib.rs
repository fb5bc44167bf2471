//! Heat flow in a line made of three materials.
//!
//! The medium is described by a piecewise-constant diffusivity `A(x)` and
//! density `rho(x)` taking one value on each of the regions `x <= 0`,
//! `0 < x <= a` and `x > a`. The temperature `u(t, x)` solves
//!
//! ```text
//! du/dt = (1 / 2 rho) d/dx ( rho A du/dx ),     u(0, x) = h(x),
//! ```
//!
//! and admits the probabilistic representation `u(t, x) = E[h(Y_t)]` where
//! `Y` is a diffusion with piecewise-constant volatility and local-time
//! drifts at the two interfaces 0 and `a`.
//!
//! The crate provides, side by side:
//!
//! * closed-form transition densities (skew Brownian motion, one-interface
//!   diffusions, and the two-interface diffusion under the matching
//!   condition `rho_2 sqrt(a_2) = rho_3 sqrt(a_3)`)  — [`kernels`];
//! * exact moments of the one-interface diffusions and the small-time
//!   expansion `u(t, x) = sum_k b_k(x) t^{k/2} + O(t^{(N+1)/2})` — [`expansion`];
//! * exact-in-law Monte Carlo path sampling — [`montecarlo`];
//! * an independent finite-volume solver used as a cross-validation
//!   oracle — [`pde`].
//!
//! All routes compute the same physical quantity, which is what the test
//! suite leans on: closed forms, expansions, sample statistics and the
//! finite-volume solution must agree within stated tolerances.

pub mod error;
pub mod expansion;
pub mod kernels;
pub mod medium;
pub mod montecarlo;
pub mod pde;
pub mod quad;
pub mod special;

pub use error::{Error, Result};
pub use expansion::{
    ExpansionBranch, ExpansionResult, Piece, PiecewiseInitialData, Polynomial,
};
pub use kernels::{KernelEval, KernelForm, SingleInterface};
pub use medium::{Layer, PhysicalMedium, Region, ScaleFunctions, SdeParams};
pub use montecarlo::{McSummary, PathSample, SamplerConfig, StepScheme};
pub use pde::{Field, Grid};
