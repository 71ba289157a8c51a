//! Slow interface motion for the viscous problem
//!
//! ```text
//! u_t = eps (a(x) u_x)_x - f(u)_x        on (-ell, ell)
//! u(-ell) = u_minus > u(ell) = u_plus
//! ```
//!
//! (and the reaction variant with `-g(u)` in place of `-f(u)_x`).
//!
//! The crate is organised bottom-up:
//!
//! * [`problem`]: grid, diffusion coefficient, flux catalog and the `b(x)` integral.
//! * [`steady`]: exact steady state and the matched one-parameter family `U(x; xi)`.
//! * [`spectral`]: linearisation about a family member, its symmetric form and eigenpairs.
//! * [`reduced`]: interface speed `theta(xi)`, decay rate and the reduced trajectory.
//! * [`pde`]: IMEX time stepping of the full problem and interface extraction.
//! * [`studies`]: parameter sweeps shared by the CLI and the acceptance tests.

pub mod error;
pub mod io;
pub mod numerics;
pub mod pde;
pub mod problem;
pub mod reduced;
pub mod spectral;
pub mod steady;
pub mod studies;

pub use error::{Error, Result};
pub use numerics::signed_log::SignedLog;
