//! Dirac-type operators for the metric e^{2ω}·flat, acting in a constant
//! spinor frame through a list of boundary Clifford matrices c_j.

use super::geometry::Geometry;
use super::grid::{SpinorField, TorusGrid};
use crate::clifford::CliffordRep;
use crate::error::{LabError, Result};
use crate::linalg::{c, CMatrix, C64};

/// Clifford matrices c_1..c_n acting on boundary spinors. The ambient model
/// also carries cl(ν), with c_j = cl(ν)γ_j.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryClifford {
    pub n: usize,
    pub rank: usize,
    pub mats: Vec<CMatrix>,
    pub nu: Option<CMatrix>,
}

impl BoundaryClifford {
    /// Irreducible Cl(n) generators, rank 2^⌊n/2⌋.
    pub fn intrinsic(n: usize) -> Result<Self> {
        let rep = CliffordRep::build(n)?;
        Ok(BoundaryClifford { n, rank: rep.rank, mats: rep.gens, nu: None })
    }

    /// cl(ν)γ_j inside Cl(n+1), rank 2^⌊(n+1)/2⌋.
    pub fn ambient(n: usize) -> Result<Self> {
        Self::from_ambient_rep(&CliffordRep::build(n + 1)?)
    }

    pub fn from_ambient_rep(rep: &CliffordRep) -> Result<Self> {
        if rep.dim < 2 {
            return Err(LabError::InvalidDimension("ambient representation needs dimension ≥ 2".into()));
        }
        Ok(BoundaryClifford {
            n: rep.dim - 1,
            rank: rep.rank,
            mats: rep.boundary_gens(),
            nu: Some(rep.cl_nu().clone()),
        })
    }

    /// Tangential generators γ_1..γ_n of Cl(n+1) with cl(ν) attached: the
    /// tangential part of the ambient Dirac operator.
    pub fn tangential(rep: &CliffordRep) -> Result<Self> {
        if rep.dim < 2 {
            return Err(LabError::InvalidDimension("ambient representation needs dimension ≥ 2".into()));
        }
        Ok(BoundaryClifford {
            n: rep.dim - 1,
            rank: rep.rank,
            mats: rep.gens[..rep.dim - 1].to_vec(),
            nu: Some(rep.cl_nu().clone()),
        })
    }

    /// max_j ‖cl(ν)c_j + c_j cl(ν)‖ for the ambient model.
    pub fn nu_anticommutation(&self) -> Option<f64> {
        let nu = self.nu.as_ref()?;
        Some(self.mats.iter().map(|m| crate::linalg::max_abs(&(nu * m + m * nu))).fold(0.0, f64::max))
    }

    fn check(&self, grid: &TorusGrid, phi: &SpinorField) -> Result<()> {
        if self.n != grid.n {
            return Err(LabError::DimensionMismatch { expected: grid.n, got: self.n });
        }
        if phi.rank() != self.rank {
            return Err(LabError::DimensionMismatch { expected: self.rank, got: phi.rank() });
        }
        Ok(())
    }

    fn need_l1(&self) -> Result<()> {
        if self.n < 3 {
            return Err(LabError::InvalidDimension(format!("L1 needs n ≥ 3, got {}", self.n)));
        }
        Ok(())
    }
}

/// D = Σ c_j ∂_j as a Fourier multiplier.
pub fn dirac_flat(grid: &TorusGrid, cl: &BoundaryClifford, phi: &SpinorField) -> Result<SpinorField> {
    cl.check(grid, phi)?;
    let mut out = SpinorField::zeros(grid, cl.rank);
    for (j, m) in cl.mats.iter().enumerate() {
        out = out.add(&phi.deriv(grid, j).apply(m));
    }
    Ok(out)
}

fn scale_pointwise(grid: &TorusGrid, phi: &SpinorField, f: &[f64]) -> SpinorField {
    let vals = phi
        .to_padded(grid)
        .into_iter()
        .map(|comp| comp.iter().zip(f).map(|(v, w)| v * *w).collect())
        .collect();
    SpinorField::from_padded(grid, vals)
}

/// e^{sω}φ, skipped when ω vanishes identically.
pub fn conformal_weight(geo: &Geometry, s: f64, phi: &SpinorField) -> SpinorField {
    if geo.flat || s == 0.0 {
        return phi.clone();
    }
    scale_pointwise(&geo.grid, phi, &geo.exp(s))
}

/// D_ĥφ = e^{−(n+1)ω/2} D(e^{(n−1)ω/2} φ).
pub fn conformal_dirac(geo: &Geometry, cl: &BoundaryClifford, phi: &SpinorField) -> Result<SpinorField> {
    let n = geo.grid.n as f64;
    let inner = conformal_weight(geo, (n - 1.0) / 2.0, phi);
    let d = dirac_flat(&geo.grid, cl, &inner)?;
    Ok(conformal_weight(geo, -(n + 1.0) / 2.0, &d))
}

/// out_i += s·coeff·Σ_l m_il v_l pointwise, component-major.
fn accumulate(out: &mut [Vec<C64>], m: &CMatrix, v: &[Vec<C64>], coeff: &[f64], s: f64) {
    for (i, o) in out.iter_mut().enumerate() {
        for (l, vl) in v.iter().enumerate() {
            let a = m[(i, l)] * s;
            if a.norm() == 0.0 {
                continue;
            }
            for ((o, x), w) in o.iter_mut().zip(vl).zip(coeff) {
                *o += a * x * *w;
            }
        }
    }
}

/// ∇̂_jφ = e^{−ω}(∂_jφ + ½(Σ_a ω_a c_a c_j φ + ω_j φ)) in the frame e^{−ω}∂_j.
pub fn spin_covariant_derivative(
    geo: &Geometry,
    cl: &BoundaryClifford,
    phi: &SpinorField,
    j: usize,
) -> Result<SpinorField> {
    let grid = &geo.grid;
    cl.check(grid, phi)?;
    if j >= grid.n {
        return Err(LabError::InvalidParameter(format!("direction {j} out of range")));
    }
    let d = phi.deriv(grid, j);
    if geo.flat {
        return Ok(d);
    }
    let prods: Vec<CMatrix> = cl.mats.iter().map(|a| a * &cl.mats[j]).collect();
    let pp = phi.to_padded(grid);
    let mut out = d.to_padded(grid);
    for (a, m) in prods.iter().enumerate() {
        accumulate(&mut out, m, &pp, &geo.dw[a], 0.5);
    }
    let em = geo.exp(-1.0);
    for (o, p) in out.iter_mut().zip(&pp) {
        for (x, (o, p)) in o.iter_mut().zip(p).enumerate() {
            *o = (*o + p * (0.5 * geo.dw[j][x])) * em[x];
        }
    }
    Ok(SpinorField::from_padded(grid, out))
}

/// Σ_j c_j ∇̂_j φ; must agree with `conformal_dirac`.
pub fn assembled_dirac(geo: &Geometry, cl: &BoundaryClifford, phi: &SpinorField) -> Result<SpinorField> {
    let mut out = SpinorField::zeros(&geo.grid, cl.rank);
    for j in 0..geo.grid.n {
        out = out.add(&spin_covariant_derivative(geo, cl, phi, j)?.apply(&cl.mats[j]));
    }
    Ok(out)
}

/// Which assembly of L₁ to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// D³ − cl(d scal)/(2(n−1)) − 2 cl∘Ric∘∇/(n−2) + scal·D/((n−1)(n−2)).
    Intrinsic,
    /// D₀³ + 2cl(ν)(D₁D₀ + D₀D₁) − 4D₂ in the ambient representation.
    Ambient,
}

/// The third-order covariant operator L₁ of e^{2ω}·flat.
#[derive(Debug, Clone)]
pub struct L1Operator<'g> {
    pub geo: &'g Geometry,
    pub cl: BoundaryClifford,
    pub route: Route,
}

pub fn assemble_l1<'g>(geo: &'g Geometry, cl: &BoundaryClifford) -> Result<L1Operator<'g>> {
    cl.need_l1()?;
    if cl.n != geo.grid.n {
        return Err(LabError::DimensionMismatch { expected: geo.grid.n, got: cl.n });
    }
    Ok(L1Operator { geo, cl: cl.clone(), route: Route::Intrinsic })
}

pub fn assemble_l1_ambient<'g>(geo: &'g Geometry, rep: &CliffordRep) -> Result<L1Operator<'g>> {
    if rep.dim != geo.grid.n + 1 {
        return Err(LabError::DimensionMismatch { expected: geo.grid.n + 1, got: rep.dim });
    }
    let cl = BoundaryClifford::from_ambient_rep(rep)?;
    cl.need_l1()?;
    Ok(L1Operator { geo, cl, route: Route::Ambient })
}

impl L1Operator<'_> {
    pub fn apply(&self, phi: &SpinorField) -> Result<SpinorField> {
        match self.route {
            Route::Intrinsic => self.intrinsic(phi),
            Route::Ambient => self.ambient(phi),
        }
    }

    fn dhat(&self, phi: &SpinorField) -> Result<SpinorField> {
        conformal_dirac(self.geo, &self.cl, phi)
    }

    /// Σ_ab T_ab c_a ∇̂_b φ on the padded grid.
    fn tensor_term(&self, t: &[Vec<Vec<f64>>], phi: &SpinorField) -> Result<Vec<Vec<C64>>> {
        let grid = &self.geo.grid;
        let mut out = vec![vec![c(0.0, 0.0); grid.padded_len()]; self.cl.rank];
        for b in 0..grid.n {
            let g = spin_covariant_derivative(self.geo, &self.cl, phi, b)?.to_padded(grid);
            for (a, m) in self.cl.mats.iter().enumerate() {
                accumulate(&mut out, m, &g, &t[a][b], 1.0);
            }
        }
        Ok(out)
    }

    fn intrinsic(&self, phi: &SpinorField) -> Result<SpinorField> {
        let geo = self.geo;
        let grid = &geo.grid;
        let nf = grid.n as f64;
        let d1 = self.dhat(phi)?;
        let d3 = self.dhat(&self.dhat(&d1)?)?;
        if geo.flat {
            return Ok(d3);
        }
        let mut out = self.tensor_term(&geo.curvature.ric, phi)?;
        out.iter_mut().flatten().for_each(|v| *v *= -2.0 / (nf - 2.0));
        let pp = phi.to_padded(grid);
        let em = geo.exp(-1.0);
        for (a, m) in self.cl.mats.iter().enumerate() {
            let coeff: Vec<f64> = geo.dscal[a].iter().zip(em.iter()).map(|(d, e)| d * e).collect();
            accumulate(&mut out, m, &pp, &coeff, -1.0 / (2.0 * (nf - 1.0)));
        }
        let dp = d1.to_padded(grid);
        let s = 1.0 / ((nf - 1.0) * (nf - 2.0));
        for (o, d) in out.iter_mut().zip(&dp) {
            for ((o, d), sc) in o.iter_mut().zip(d).zip(&geo.curvature.scal) {
                *o += d * (sc * s);
            }
        }
        Ok(d3.add(&SpinorField::from_padded(grid, out)))
    }

    fn ambient(&self, phi: &SpinorField) -> Result<SpinorField> {
        let geo = self.geo;
        let grid = &geo.grid;
        let nf = grid.n as f64;
        let nu = self.cl.nu.as_ref().expect("ambient route carries cl(ν)");
        let d0 = self.dhat(phi)?;
        let d03 = self.dhat(&self.dhat(&d0)?)?;
        if geo.flat {
            return Ok(d03);
        }
        let f: Vec<f64> = geo.curvature.scal.iter().map(|s| -s / (4.0 * (nf - 1.0))).collect();
        let d1 = |psi: &SpinorField| scale_pointwise(grid, &psi.apply(nu), &f);
        let mixed = d1(&d0).add(&self.dhat(&d1(phi))?).apply(nu).scale(c(2.0, 0.0));
        let p = geo.curvature.schouten.as_ref().expect("n ≥ 3");
        let d2 = SpinorField::from_padded(grid, self.tensor_term(p, phi)?);
        Ok(d03.add(&mixed).sub(&d2.scale(c(2.0, 0.0))))
    }

    /// |⟨Lφ, ψ⟩ − ⟨φ, Lψ⟩| / (‖φ‖‖ψ‖) in the volume weight e^{nω}.
    pub fn self_adjointness_residual(&self, phi: &SpinorField, psi: &SpinorField) -> Result<f64> {
        let w = self.geo.exp(self.geo.grid.n as f64);
        weighted_symmetry(&self.geo.grid, &w, phi, psi, &self.apply(phi)?, &self.apply(psi)?)
    }
}

fn weighted_symmetry(
    grid: &TorusGrid,
    w: &[f64],
    phi: &SpinorField,
    psi: &SpinorField,
    lphi: &SpinorField,
    lpsi: &SpinorField,
) -> Result<f64> {
    let a = lphi.weighted_inner(grid, psi, w);
    let b = phi.weighted_inner(grid, lpsi, w);
    let np = phi.weighted_inner(grid, phi, w).re.sqrt();
    let ns = psi.weighted_inner(grid, psi, w).re.sqrt();
    Ok((a - b).norm() / (np * ns))
}

/// Self-adjointness of D_ĥ in the weight e^{nω}.
pub fn dirac_self_adjointness(
    geo: &Geometry,
    cl: &BoundaryClifford,
    phi: &SpinorField,
    psi: &SpinorField,
) -> Result<f64> {
    let w = geo.exp(geo.grid.n as f64);
    weighted_symmetry(&geo.grid, &w, phi, psi, &conformal_dirac(geo, cl, phi)?, &conformal_dirac(geo, cl, psi)?)
}

/// ‖L̂₁φ − e^{−(n+3)ω/2} D³(e^{(n−3)ω/2}φ)‖ / ‖L̂₁φ‖.
pub fn covariance_residual(geo: &Geometry, cl: &BoundaryClifford, phi: &SpinorField) -> Result<f64> {
    let grid = &geo.grid;
    let nf = grid.n as f64;
    let lhs = assemble_l1(geo, cl)?.apply(phi)?;
    let mut rhs = conformal_weight(geo, (nf - 3.0) / 2.0, phi);
    for _ in 0..3 {
        rhs = dirac_flat(grid, cl, &rhs)?;
    }
    let rhs = conformal_weight(geo, -(nf + 3.0) / 2.0, &rhs);
    let denom = lhs.norm(grid);
    if denom == 0.0 {
        return Ok(rhs.norm(grid));
    }
    Ok(lhs.sub(&rhs).norm(grid) / denom)
}

/// ‖L₁^{ambient}φ − L₁^{intrinsic}φ‖ / ‖φ‖, both in the ambient representation.
pub fn compare_routes(geo: &Geometry, rep: &CliffordRep, phi: &SpinorField) -> Result<f64> {
    let amb = assemble_l1_ambient(geo, rep)?;
    let cor = assemble_l1(geo, &amb.cl)?;
    let diff = amb.apply(phi)?.sub(&cor.apply(phi)?);
    Ok(diff.norm(&geo.grid) / phi.norm(&geo.grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::geometry::{ConformalFactor, DEFAULT_ALIAS_BUDGET};
    use crate::conformal::random_spinor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize, m: usize, omega: &ConformalFactor) -> (TorusGrid, Geometry) {
        let g = TorusGrid::new(n, m).unwrap();
        let geo = Geometry::new(&g, omega, DEFAULT_ALIAS_BUDGET).unwrap();
        (g, geo)
    }

    fn rel(a: &SpinorField, b: &SpinorField, g: &TorusGrid) -> f64 {
        a.sub(b).norm(g) / b.norm(g).max(1e-300)
    }

    #[test]
    fn flat_dirac_on_modes() {
        let g = TorusGrid::new(3, 8).unwrap();
        let cl = BoundaryClifford::intrinsic(3).unwrap();
        let v = [c(1.0, 0.0), c(0.5, -0.25)];
        let konst = SpinorField::constant(&g, &v);
        assert_eq!(dirac_flat(&g, &cl, &konst).unwrap().norm(&g), 0.0);
        let phi = SpinorField::mode(&g, &[1, 0, 0], &v).unwrap();
        let expect = phi.apply(&cl.mats[0]).scale(c(0.0, 1.0));
        assert!(rel(&dirac_flat(&g, &cl, &phi).unwrap(), &expect, &g) < 1e-15);
        let phi = SpinorField::mode(&g, &[2, -1, 3], &v).unwrap();
        let dd = dirac_flat(&g, &cl, &dirac_flat(&g, &cl, &phi).unwrap()).unwrap();
        assert!(rel(&dd, &phi.scale(c(14.0, 0.0)), &g) < 1e-14);
        assert!(dirac_flat(&g, &BoundaryClifford::intrinsic(2).unwrap(), &phi).is_err());
    }

    #[test]
    fn constant_factor_scales_dirac() {
        let cst = 0.3;
        let (g, geo) = setup(3, 8, &ConformalFactor::constant(3, cst));
        let cl = BoundaryClifford::intrinsic(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let phi = random_spinor(&g, cl.rank, 2, &mut rng);
        let lhs = conformal_dirac(&geo, &cl, &phi).unwrap();
        let rhs = dirac_flat(&g, &cl, &phi).unwrap().scale(c((-cst).exp(), 0.0));
        assert!(rel(&lhs, &rhs, &g) < 1e-13);
        let l = assemble_l1(&geo, &cl).unwrap().apply(&phi).unwrap();
        let mut d3 = phi.clone();
        for _ in 0..3 {
            d3 = dirac_flat(&g, &cl, &d3).unwrap();
        }
        assert!(rel(&l, &d3.scale(c((-3.0 * cst).exp(), 0.0)), &g) < 1e-12);
        assert!(covariance_residual(&geo, &cl, &phi).unwrap() < 1e-12);
    }

    #[test]
    fn covariant_derivative_flat_and_leibniz() {
        let omega = ConformalFactor::zero(3).with_cos(0.1, &[1, 0, 0]).with_sin(0.05, &[0, 1, 0]);
        let (g, geo) = setup(3, 16, &omega);
        let cl = BoundaryClifford::intrinsic(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let phi = random_spinor(&g, cl.rank, 1, &mut rng);

        let (_, flat) = setup(3, 16, &ConformalFactor::zero(3));
        assert_eq!(spin_covariant_derivative(&flat, &cl, &phi, 1).unwrap(), phi.deriv(&g, 1));

        // ∇̂_j(fφ) = e^{−ω}(∂_j f)φ + f∇̂_jφ for f = cos(x₃)
        let mut f = g.zeros();
        f[g.index_of(&[0, 0, 1]).unwrap()] = c(0.5, 0.0);
        f[g.index_of(&[0, 0, -1]).unwrap()] = c(0.5, 0.0);
        let fp: Vec<f64> = g.to_padded(&f).iter().map(|v| v.re).collect();
        let df: Vec<f64> = g.to_padded(&g.deriv(&f, 2)).iter().zip(&geo.w).map(|(v, w)| v.re * (-w).exp()).collect();
        let lhs = spin_covariant_derivative(&geo, &cl, &scale_pointwise(&g, &phi, &fp), 2).unwrap();
        let rhs = scale_pointwise(&g, &phi, &df)
            .add(&scale_pointwise(&g, &spin_covariant_derivative(&geo, &cl, &phi, 2).unwrap(), &fp));
        assert!(rel(&lhs, &rhs, &g) < 1e-8);
    }

    #[test]
    fn assembled_dirac_and_self_adjointness() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let omega = ConformalFactor::random(3, 2, 0.2, &mut rng);
        let (g, geo) = setup(3, 32, &omega);
        let cl = BoundaryClifford::intrinsic(3).unwrap();
        let phi = random_spinor(&g, cl.rank, 2, &mut rng);
        let psi = random_spinor(&g, cl.rank, 2, &mut rng);
        let a = assembled_dirac(&geo, &cl, &phi).unwrap();
        let d = conformal_dirac(&geo, &cl, &phi).unwrap();
        assert!(rel(&a, &d, &g) < 1e-8);
        assert!(dirac_self_adjointness(&geo, &cl, &phi, &psi).unwrap() < 1e-8);
    }

    #[test]
    fn l1_flat_is_dirac_cubed_and_rejects_low_dimension() {
        let (g, geo) = setup(3, 8, &ConformalFactor::zero(3));
        let cl = BoundaryClifford::intrinsic(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let phi = random_spinor(&g, cl.rank, 2, &mut rng);
        let mut d3 = phi.clone();
        for _ in 0..3 {
            d3 = dirac_flat(&g, &cl, &d3).unwrap();
        }
        assert_eq!(assemble_l1(&geo, &cl).unwrap().apply(&phi).unwrap(), d3);
        assert_eq!(covariance_residual(&geo, &cl, &phi).unwrap(), 0.0);
        let (_, geo2) = setup(2, 8, &ConformalFactor::zero(2));
        assert!(assemble_l1(&geo2, &BoundaryClifford::intrinsic(2).unwrap()).is_err());
    }

    #[test]
    fn opposite_curvature_sign_breaks_covariance() {
        let omega = ConformalFactor::zero(3).with_cos(0.1, &[1, 0, 0]).with_sin(0.05, &[0, 1, 0]);
        let (g, geo) = setup(3, 16, &omega);
        let cl = BoundaryClifford::intrinsic(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let phi = random_spinor(&g, cl.rank, 1, &mut rng);
        assert!(covariance_residual(&geo, &cl, &phi).unwrap() < 1e-9);
        assert!(covariance_residual(&geo.with_flipped_curvature(), &cl, &phi).unwrap() > 1e-3);
    }

    #[test]
    fn ambient_route_matches_intrinsic() {
        let omega = ConformalFactor::zero(3).with_cos(0.1, &[1, 0, 0]);
        let (g, geo) = setup(3, 16, &omega);
        let rep = CliffordRep::build(4).unwrap();
        let amb = BoundaryClifford::from_ambient_rep(&rep).unwrap();
        assert!(amb.nu_anticommutation().unwrap() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let phi = random_spinor(&g, amb.rank, 2, &mut rng);
        assert!(compare_routes(&geo, &rep, &phi).unwrap() < 1e-8);
        assert!(compare_routes(&geo, &CliffordRep::build(3).unwrap(), &phi).is_err());
    }
}
