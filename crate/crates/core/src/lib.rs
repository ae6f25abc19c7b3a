//! Numerical and symbolic checks for Calderón and Bergman projectors of
//! Dirac operators.

pub mod cli;
pub mod clifford;
pub mod conformal;
pub mod disc_oracle;
pub mod error;
pub mod index_sets;
pub mod linalg;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod suites;
pub mod symbols;

pub use error::{LabError, Result};
