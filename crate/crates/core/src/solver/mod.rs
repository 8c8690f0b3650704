//! Finite-difference solvers for the parabolic and elliptic equations.
//!
//! Hessians use second-order centered differences. Boundaries are either a
//! frozen frame of width [`FRAME`] carrying exact data, or periodic with a
//! fixed quadratic base. Time stepping is explicit RK4 under the step limit
//! `dt ≤ 0.2 h² λ/Λ`, or a semi-implicit step with the linearization frozen
//! at the start of the step.

mod elliptic;
mod field;
mod grid;
mod io;
mod local;

pub use elliptic::{solve_elliptic, EllipticOptions, EllipticSolution};
pub use field::{
    hessian_block_bounds, monitor_class, step_parabolic, BoundaryPolicy, ClassSeries, FlowField, Scheme, SliceBounds,
    CFL_CONSTANT,
};
pub use grid::{Grid, FRAME, MAX_DIM};
pub use io::{read_binary, write_binary, write_csv, SnapshotFormat, SnapshotMeta};
pub use local::Hess;

/// `F` evaluated on a real Hessian, `None` outside the class.
pub fn operator_from_hessian(h: &Hess, k: usize, l: usize, flavor: crate::jets::Flavor) -> Option<f64> {
    local::local_value(h, k, l, flavor)
}
