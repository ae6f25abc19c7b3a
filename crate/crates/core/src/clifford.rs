//! Complex Clifford representations with the convention cl(v)² = −|v|².
//!
//! Generators are built by the Jordan–Wigner scheme from Pauli matrices, so
//! the rank is 2^⌊d/2⌋. The last generator plays the role of cl(ν), and the
//! first d−1 generators span the boundary directions.

use crate::error::{LabError, Result};
use crate::linalg::{c, identity, kron, op_norm, zeros, CMatrix, C64, I};

#[derive(Debug, Clone, PartialEq)]
pub struct CliffordRep {
    pub dim: usize,
    pub rank: usize,
    pub gens: Vec<CMatrix>,
}

/// Π± = ½(Id ∓ i·cl(ν)).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySplitting {
    pub nu: usize,
    pub proj_plus: CMatrix,
    pub proj_minus: CMatrix,
}

fn pauli(which: u8) -> CMatrix {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    match which {
        1 => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        2 => CMatrix::from_row_slice(2, 2, &[z, -I, I, z]),
        _ => CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    }
}

fn tensor(factors: &[CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(identity(1), |acc, f| kron(&acc, f))
}

impl CliffordRep {
    pub fn build(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(LabError::InvalidDimension("Clifford dimension must be at least 1".into()));
        }
        let m = d / 2;
        let rank = 1usize << m;
        let mut gens = Vec::with_capacity(d);
        for j in 0..d {
            let k = j / 2;
            let mut factors: Vec<CMatrix> = Vec::with_capacity(m.max(1));
            if k < m {
                for _ in 0..k {
                    factors.push(pauli(3));
                }
                factors.push(pauli(if j % 2 == 0 { 1 } else { 2 }));
                for _ in k + 1..m {
                    factors.push(identity(2));
                }
            } else {
                // odd d: the extra generator is σ3 ⊗ … ⊗ σ3
                for _ in 0..m {
                    factors.push(pauli(3));
                }
            }
            let herm = tensor(&factors);
            gens.push(herm * I);
        }
        Ok(CliffordRep { dim: d, rank, gens })
    }

    pub fn identity(&self) -> CMatrix {
        identity(self.rank)
    }

    /// cl(v) = Σ v_j γ_j.
    pub fn cl(&self, v: &[f64]) -> Result<CMatrix> {
        if v.len() != self.dim {
            return Err(LabError::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        let mut out = zeros(self.rank, self.rank);
        for (g, &x) in self.gens.iter().zip(v) {
            if x != 0.0 {
                out += g * c(x, 0.0);
            }
        }
        Ok(out)
    }

    pub fn nu_index(&self) -> usize {
        self.dim - 1
    }

    pub fn cl_nu(&self) -> &CMatrix {
        &self.gens[self.dim - 1]
    }

    pub fn splitting(&self) -> BoundarySplitting {
        let id = self.identity();
        let inu = self.cl_nu() * I;
        BoundarySplitting {
            nu: self.nu_index(),
            proj_plus: (&id - &inu) * c(0.5, 0.0),
            proj_minus: (&id + &inu) * c(0.5, 0.0),
        }
    }

    /// Intrinsic boundary Clifford action cl_M(v) = cl(ν)·cl(v), v tangent.
    pub fn boundary_clifford(&self, v: &[f64]) -> Result<CMatrix> {
        if v.len() + 1 != self.dim {
            return Err(LabError::DimensionMismatch { expected: self.dim - 1, got: v.len() });
        }
        let mut full = v.to_vec();
        full.push(0.0);
        Ok(self.cl_nu() * self.cl(&full)?)
    }

    /// The boundary generators cl(ν)γ_j for j < d.
    pub fn boundary_gens(&self) -> Vec<CMatrix> {
        self.gens[..self.dim - 1].iter().map(|g| self.cl_nu() * g).collect()
    }

    /// ω = i^⌊(d+1)/2⌋ γ₁⋯γ_d, normalized so that ω² = Id.
    pub fn volume_element(&self) -> CMatrix {
        volume_of(&self.gens, self.rank)
    }

    /// Volume element of the boundary algebra generated by cl(ν)γ_j.
    pub fn boundary_volume_element(&self) -> CMatrix {
        volume_of(&self.boundary_gens(), self.rank)
    }

    /// Sign ε with cl(ν) = ε·i·ω_M, if such a relation holds.
    ///
    /// It holds when the boundary dimension d−1 is even. For odd boundary
    /// dimension ω_M anticommutes with cl(ν) and swaps Σ₊ with Σ₋.
    pub fn normal_volume_sign(&self, tol: f64) -> Option<f64> {
        let w = self.boundary_volume_element() * I;
        for eps in [1.0, -1.0] {
            if op_norm(&(self.cl_nu() - &w * c(eps, 0.0))) <= tol {
                return Some(eps);
            }
        }
        None
    }

    /// Largest violation of γ_iγ_j + γ_jγ_i = −2δ_ij Id.
    pub fn relation_residual(&self) -> f64 {
        let id = self.identity();
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut ac = &self.gens[i] * &self.gens[j] + &self.gens[j] * &self.gens[i];
                if i == j {
                    ac += &id * c(2.0, 0.0);
                }
                worst = worst.max(op_norm(&ac));
            }
        }
        worst
    }
}

fn volume_of(gens: &[CMatrix], rank: usize) -> CMatrix {
    let d = gens.len();
    let prod = gens.iter().fold(identity(rank), |acc, g| acc * g);
    let phase = I.powu(d.div_ceil(2) as u32);
    prod * phase
}

/// Convenience wrapper used by the CLI and suites.
pub fn build_rep(d: usize) -> Result<CliffordRep> {
    CliffordRep::build(d)
}

pub fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

pub fn as_scalar(m: &CMatrix) -> Option<C64> {
    if m.nrows() == 1 && m.ncols() == 1 {
        Some(m[(0, 0)])
    } else {
        None
    }
}
