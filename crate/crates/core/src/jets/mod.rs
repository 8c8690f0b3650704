//! Exact derivative tables of analytic test functions.

mod expr;
mod jet;
mod layout;
mod spacetime;
mod wirtinger;

pub use expr::{AtomFn, Expr, ExpressionSpec, Flavor, JET_ORDER};
pub use jet::Jet;
pub use layout::Layout;
pub use spacetime::{evaluate_jet, SpaceTimeJet, TIME_JET_ORDER};
pub use wirtinger::{wirtinger_from_real, WirtingerTable};
