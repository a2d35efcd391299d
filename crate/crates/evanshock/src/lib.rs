//! Spectral stability of viscous shock profiles of the isentropic p-system
//! (compressible Navier-Stokes in Lagrangian coordinates with gamma-law
//! pressure), rescaled so the shock is stationary with endstates
//! `0 < v_plus < v_minus = 1`.
//!
//! The toolbox has five layers:
//!
//! * [`model`] - shock parameterization (Rankine-Hugoniot coefficient, Mach
//!   number), the scalar profile ODE with dense monotone output, and decay
//!   validation against closed-form exponential bounds.
//! * [`bounds`] - closed-form small-amplitude stability conditions, the
//!   `g` energy-weight diagnostic, and the amplitude-independent
//!   high-frequency bound `(sqrt(gamma)+1/2)^2` that sizes search contours.
//! * [`evans`] - the linearized eigenvalue system as a first-order ODE,
//!   consistent-splitting eigendecomposition at the endstates, analytic
//!   (Kato projector) continuation of initialization data along contours,
//!   exponentially rescaled forward/adjoint shooting for the Evans function
//!   `D(lambda)`, and truncated-domain length estimation.
//! * [`winding`] - contour construction, adaptive evaluation of `D` along
//!   the contour, argument-principle winding counts, a real-axis scan, and
//!   the (gamma, Mach) sweep harness.
//! * [`evolution`] - nonlinear Crank-Nicolson time integration with a damped
//!   Newton inner solver and convergence-to-translate diagnostics.
//!
//! Each capability has a runnable demonstration under `examples/`:
//!
//! ```bash
//! cargo run --release --example profile_decay
//! cargo run --release --example stability_conditions
//! cargo run --release --example evans_point
//! cargo run --release --example kato_continuation
//! cargo run --release --example winding_semicircle
//! cargo run --release --example truncation_study
//! cargo run --release --example real_axis_scan
//! cargo run --release --example mach_sweep
//! cargo run --release --example perturbed_shock
//! ```
//!
//! The `evanshock` binary exposes the same pipelines as subcommands
//! (`profile`, `bounds`, `evans`, `winding`, `sweep`, `evolve`, `validate`).

pub mod artifact;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod evans;
pub mod evolution;
pub mod linalg3;
pub mod model;
pub mod ode;
pub mod svg;
pub mod winding;

pub use error::{Error, Result};
pub use model::{ShockParams, ShockProfile};
