//! Small linear-algebra kernels used by the spectral solvers.

pub mod banded;
pub mod dense;
pub mod tridiag;
