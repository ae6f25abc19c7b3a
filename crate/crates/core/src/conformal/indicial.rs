//! Order-one term of the formal solution to (D_g ± iλ)σ = 0 in the product
//! model g = (dx² + h₀)/x² with flat h₀.
//!
//! Writing σ = x^{n/2−λ}(ψ + x p₁ψ + …) and splitting into the ±i eigenspaces
//! Σ± of cl(ν), the x^k coefficient carries the multipliers
//! (k−λ±λ, λ−k±λ) on (Σ₊, Σ₋). At k = 1 the source term is D_{h₀}ψ, where
//! D_{h₀} = Σ γ_j ∂_j is the tangential part of the ambient Dirac operator.

use super::grid::{SpinorField, TorusGrid};
use super::operators::{dirac_flat, BoundaryClifford};
use crate::clifford::CliffordRep;
use crate::error::{LabError, Result};
use crate::linalg::{c, identity, CMatrix, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// (c₊, c₋) = (k − λ ± λ, λ − k ± λ).
pub fn indicial_multipliers(k: u32, lambda: f64, sign: Sign) -> (f64, f64) {
    let k = k as f64;
    let s = sign.value();
    (k - lambda + s * lambda, lambda - k + s * lambda)
}

fn projections(nu: &CMatrix) -> (CMatrix, CMatrix) {
    let id = identity(nu.nrows());
    let inu = nu * I;
    ((&id - &inu) * c(0.5, 0.0), (&id + &inu) * c(0.5, 0.0))
}

fn tangential(rep: &CliffordRep, grid: &TorusGrid, psi: &SpinorField) -> Result<BoundaryClifford> {
    if rep.dim != grid.n + 1 {
        return Err(LabError::DimensionMismatch { expected: grid.n + 1, got: rep.dim });
    }
    if psi.rank() != rep.rank {
        return Err(LabError::DimensionMismatch { expected: rep.rank, got: psi.rank() });
    }
    BoundaryClifford::tangential(rep)
}

/// p₁,λψ obtained by inverting the k = 1 indicial multipliers componentwise:
/// the Σ₊ part of ψ feeds the + series and the Σ₋ part the − series.
pub fn formal_p1(rep: &CliffordRep, grid: &TorusGrid, lambda: f64, psi: &SpinorField) -> Result<SpinorField> {
    let cl = tangential(rep, grid, psi)?;
    let (pp, pm) = projections(rep.cl_nu());
    let mut total = SpinorField::zeros(grid, cl.rank);
    for (sign, proj) in [(Sign::Plus, &pp), (Sign::Minus, &pm)] {
        // k = 0: the multiplier on the opposite eigenspace must not vanish
        let part = psi.apply(proj);
        let rhs = dirac_flat(grid, &cl, &part)?.scale(c(-1.0, 0.0));
        let (cp, cm) = indicial_multipliers(1, lambda, sign);
        for (coef, pr) in [(cp, &pp), (cm, &pm)] {
            if coef.abs() < 1e-12 {
                return Err(LabError::Pole(format!("order-one indicial multiplier vanishes at λ = {lambda}")));
            }
            total = total.add(&rhs.apply(pr).scale(c(0.0, -1.0 / coef)));
        }
    }
    Ok(total)
}

/// −cl(ν)D_{h₀}ψ/(2λ−1).
pub fn p1_closed_form(rep: &CliffordRep, grid: &TorusGrid, lambda: f64, psi: &SpinorField) -> Result<SpinorField> {
    let cl = tangential(rep, grid, psi)?;
    let denom = 2.0 * lambda - 1.0;
    if denom.abs() < 1e-12 {
        return Err(LabError::Pole("λ = 1/2".into()));
    }
    Ok(dirac_flat(grid, &cl, psi)?.apply(rep.cl_nu()).scale(c(-1.0 / denom, 0.0)))
}

/// Residue of λ ↦ p₁,λψ at λ = 1/2, read off from (2λ−1)p₁,λ at λ = 2.
pub fn p1_residue(rep: &CliffordRep, grid: &TorusGrid, psi: &SpinorField) -> Result<SpinorField> {
    Ok(formal_p1(rep, grid, 2.0, psi)?.scale(c(1.5, 0.0)))
}

/// D_{h₀}ψ = Σ γ_j ∂_jψ.
pub fn tangential_dirac(rep: &CliffordRep, grid: &TorusGrid, psi: &SpinorField) -> Result<SpinorField> {
    dirac_flat(grid, &tangential(rep, grid, psi)?, psi)
}
