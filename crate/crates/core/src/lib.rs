//! Closed-form propagation of displaced Gaussian states of a damped, driven quantum
//! harmonic oscillator under a generic quadratic Markovian Liouvillian, with two
//! independent numerical oracles: first-moment ODE integration and a truncated
//! number-basis superoperator representation.

pub mod commands;
pub mod config;
pub mod driving;
pub mod error;
pub mod figures;
pub mod fock;
pub mod gaussian;
pub mod kernels;
pub mod model;
pub mod ode;
pub mod output;
pub mod propagator;
pub mod quadrature;
pub mod verify;

pub use config::RunConfig;
pub use driving::ForceModel;
pub use error::{Error, Result};
pub use gaussian::{GaussianState, SecondMoments};
pub use model::{ModelParams, Regime};
