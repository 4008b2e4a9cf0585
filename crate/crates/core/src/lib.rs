//! Numerical solver and verification suite for the planar
//! Schrödinger–Poisson equation with logarithmic kernel,
//!
//! ```text
//! -Δu + V(x) u + (γ/2π) (log|·| ∗ u²) u = b |u|^{p-2} u   in R²,  p > 4,
//! ```
//!
//! on a truncated square with zero extension. The crate evaluates the action
//! functional and its derivative, splits the kernel as
//! `log r = log(1+r) - log(1+1/r)`, projects rays onto the Nehari manifold
//! through the fibering map, and computes nonnegative ground-state
//! candidates by X-metric preconditioned descent with a Cerami-residual
//! stopping rule. Every evaluation path is paired with an independent
//! oracle (direct double sums, finite differences, closed forms) so the
//! algebraic structure of the functional is executable and testable.

pub mod error;
pub mod grid;
pub mod kernel;
pub mod par;
pub mod potential;
pub mod quad;
pub mod solver;
pub mod sum;

mod fft;
mod precond;

pub mod functional;

pub use error::{Error, Result};
pub use functional::{nehari_project, Diagnostics, FiberingCoefficients, Problem};
pub use grid::{
    dirichlet_energy, lp_norm, neg_laplacian, norms, quadrature_dot, star_weight, weighted_mass,
    GridSpec, NormReport, ScalarField,
};
pub use kernel::{
    bilinear, build_kernel_table, hls_chain_check, phi_u, phi_u_direct, v_energies, BilinearMode,
    ConvolutionPlan, HlsChain, KernelKind, KernelTable, VEnergies, TWO_PI,
};
pub use potential::{HypothesisReport, PotentialSpec, SublevelRow};
pub use solver::{
    ray_max_check, solve, symmetry_report, ExitStatus, GroundStateResult, InitSpec,
    IterationRecord, PositivityPolicy, RayMaxReport, SolverConfig,
};

/// Crate version, echoed into CLI outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
