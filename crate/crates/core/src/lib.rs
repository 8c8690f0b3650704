//! Numerical laboratory for twisted Monge-Ampère operators.
//!
//! The crate evaluates exact derivative tables of analytic test functions,
//! assembles the real and complex twisted operators together with the
//! partial Legendre transform and its Hessian `W`, checks the evolution and
//! sign identities satisfied by `W` along the parabolic flow, solves the
//! flows on grids, and measures oscillation decay on the solutions.
//!
//! Numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64` for everyday use.

pub mod error;
pub mod estimates;
pub mod evolution;
pub mod funclass;
pub mod jets;
pub mod legendre;
pub mod linalg;
pub mod scalar;
pub mod solver;
pub mod twisted;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use scalar::{Cx, Dual, Field, Scalar};

pub type Jet64 = jets::Jet<f64>;
pub type SpaceTimeJet64 = jets::SpaceTimeJet<f64>;
pub type WirtingerTable64 = jets::WirtingerTable<f64>;
