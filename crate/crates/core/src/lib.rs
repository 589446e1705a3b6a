//! Simulation and analysis of a coherently driven spin ensemble with
//! squeezed collective decay.
//!
//! The model is
//! `d rho/dt = -i Omega [S_x, rho] + L rho L^dag - {L^dag L, rho} / 2`
//! with the single jump operator `L = sqrt(Gamma / 2J) (cos(theta) S_- + sin(theta) S_+)`.
//! At `theta = pi/4` the jump operator is proportional to `S_x`, which is then
//! a strong symmetry: every `S_x` eigenstate is stationary, the Liouvillian
//! gap closes for any `J`, and individual quantum trajectories freeze into a
//! single `S_x^2` eigenspace.

pub mod activity;
pub mod error;
pub mod freezing;
pub mod linalg;
pub mod liouvillian;
pub mod phase;
pub mod spin;
pub mod trajectory;

pub use error::{Error, Result};
pub use spin::{build_spin_operators, check_strong_symmetry, Model, ModelParams, SpinOperators};

pub use faer::c64;
