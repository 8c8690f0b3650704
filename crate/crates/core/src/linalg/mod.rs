//! Small dense symmetric and Hermitian matrices, plus the band and sparse
//! solvers used by the grid code.

mod banded;
mod dense;
mod matrix;
mod sparse;

pub use banded::BandMatrix;
pub use dense::DMat;
pub use matrix::{det_lu, HermitianMatrix, PsdCertificate, SymmetricMatrix, DEFAULT_COND_GUARD};
pub use sparse::CsrMatrix;
