//! Spectral Dirac calculus on conformally flat tori: curvature of
//! e^{2ω}·flat, the covariant operator L₁ by two assemblies, and the
//! order-one indicial solver.

pub mod geometry;
pub mod grid;
pub mod indicial;
pub mod operators;

pub use geometry::{curvature_conformally_flat, ConformalFactor, CurvatureData, Geometry, DEFAULT_ALIAS_BUDGET};
pub use grid::{Field, SpinorField, TorusGrid};
pub use indicial::{formal_p1, indicial_multipliers, p1_closed_form, p1_residue, tangential_dirac, Sign};
pub use operators::{
    assemble_l1, assemble_l1_ambient, assembled_dirac, compare_routes, conformal_dirac, conformal_weight,
    covariance_residual, dirac_flat, dirac_self_adjointness, spin_covariant_derivative, BoundaryClifford, L1Operator,
    Route,
};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::c;

/// Spinor with independent Gaussian-like coefficients on modes ‖k‖∞ ≤ band.
pub fn random_spinor(grid: &TorusGrid, rank: usize, band: usize, rng: &mut ChaCha8Rng) -> SpinorField {
    let mut s = SpinorField::zeros(grid, rank);
    let b = band as i64;
    for comp in s.comps.iter_mut() {
        for (idx, v) in comp.iter_mut().enumerate() {
            if grid.k(idx).iter().all(|k| k.abs() <= b) {
                *v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
    }
    s
}
