//! Even and odd nonlinear coherent states.
//!
//! The states are eigenstates of `(a†)⁻¹ a f(N)⁻¹` for the nonlinear function
//! `f(n) = L_n^i(η²) / ((1 + n^r) L_n^j(η²))`. This crate builds their
//! normalized Fock amplitudes and evaluates photon statistics (g²(0),
//! Mandel Q), quadrature and amplitude-squared squeezing, and the Wigner
//! function. An independent brute-force Fock-space path in [`oracle`]
//! cross-checks every closed-form series.

pub mod cli_io;
pub mod error;
pub mod nlfunc;
pub mod observables;
#[doc(hidden)]
pub mod oracle;
pub mod specfun;
pub mod state;
pub mod wigner;

pub use error::{Error, Result};
pub use nlfunc::{eval_f, f_double_factorial, NonlinearFunction, NonlinearSpec, Parity};
pub use observables::{
    amp_squared_degrees, g2, mandel_q, moments, squeezing_degrees, stats, MomentSet, StatsReport,
};
pub use specfun::ExtReal;
pub use state::{build_state, photon_distribution, CoefficientTable, StateParams};
pub use wigner::{chi, wigner_grid, wigner_point, GridGeometry, PhasePoint, WignerGrid};

