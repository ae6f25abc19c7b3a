//! Unit-disc models: the scalar ∂̄ model and a rank-2 flat spin-Dirac model.
//!
//! Boundary data lives on the circle with measure dt and is stored as
//! Fourier coefficients on the band [−N, N]. Interior functions are
//! polynomials in z, z̄ with the Lebesgue area measure.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::linalg::SymmetricEigen;
use nalgebra::Cholesky;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clifford::CliffordRep;
use crate::error::{LabError, Result};
use crate::linalg::{c, identity, op_norm, rank, zeros, CMatrix, C64, I};
use crate::quadrature::gl_rule_on;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Model {
    Scalar,
    Spin,
}

impl Model {
    pub fn rank(self) -> usize {
        match self {
            Model::Scalar => 1,
            Model::Spin => 2,
        }
    }
}

/// Mode k, component j sits at (k + N)·rank + j.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSpinor {
    pub band: usize,
    pub rank: usize,
    pub coeffs: Vec<C64>,
}

impl FourierSpinor {
    pub fn zeros(band: usize, rank: usize) -> Self {
        FourierSpinor { band, rank, coeffs: vec![c(0.0, 0.0); (2 * band + 1) * rank] }
    }

    pub fn mode(band: usize, rank: usize, k: i64, comp: usize, value: C64) -> Result<Self> {
        let mut f = FourierSpinor::zeros(band, rank);
        let i = f.index(k, comp)?;
        f.coeffs[i] = value;
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn index(&self, k: i64, comp: usize) -> Result<usize> {
        spinor_index(self.band, self.rank, k, comp)
    }

    pub fn get(&self, k: i64, comp: usize) -> C64 {
        self.index(k, comp).map(|i| self.coeffs[i]).unwrap_or(c(0.0, 0.0))
    }

    /// ‖ψ‖² = 2π Σ|c_k|² with respect to dt.
    pub fn norm_sqr(&self) -> f64 {
        2.0 * PI * self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn as_vector(&self) -> nalgebra::DVector<C64> {
        nalgebra::DVector::from_vec(self.coeffs.clone())
    }
}

fn spinor_index(band: usize, rank: usize, k: i64, comp: usize) -> Result<usize> {
    if k.unsigned_abs() as usize > band || comp >= rank {
        return Err(LabError::InvalidParameter(format!("mode {k} / component {comp} outside band {band}")));
    }
    Ok((k + band as i64) as usize * rank + comp)
}

/// Polynomial Σ c_{ab} z^a z̄^b, optionally spinor valued.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscPoly {
    pub rank: usize,
    pub terms: BTreeMap<(u32, u32, usize), C64>,
}

impl DiscPoly {
    pub fn new(rank: usize) -> Self {
        DiscPoly { rank, terms: BTreeMap::new() }
    }

    pub fn monomial(a: u32, b: u32) -> Self {
        let mut p = DiscPoly::new(1);
        p.add_term(a, b, 0, c(1.0, 0.0));
        p
    }

    pub fn add_term(&mut self, a: u32, b: u32, comp: usize, v: C64) {
        let e = self.terms.entry((a, b, comp)).or_insert(c(0.0, 0.0));
        *e += v;
        if e.norm() == 0.0 {
            self.terms.remove(&(a, b, comp));
        }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.terms.values().all(|v| v.norm() <= tol)
    }

    pub fn eval(&self, z: C64) -> Vec<C64> {
        let mut out = vec![c(0.0, 0.0); self.rank];
        for (&(a, b, j), &v) in &self.terms {
            out[j] += v * z.powu(a) * z.conj().powu(b);
        }
        out
    }

    /// Area L² inner product ⟨self, other⟩ = ∫ self · conj(other) dA.
    pub fn inner(&self, other: &DiscPoly) -> C64 {
        let mut s = c(0.0, 0.0);
        for (&(a, b, j), &u) in &self.terms {
            for (&(cc, d, l), &v) in &other.terms {
                if j == l {
                    s += u * v.conj() * monomial_gram(a, b, cc, d);
                }
            }
        }
        s
    }

    /// Trace on the unit circle: z^a z̄^b ↦ e^{i(a−b)t}.
    pub fn trace(&self, band: usize) -> Result<FourierSpinor> {
        let mut f = FourierSpinor::zeros(band, self.rank);
        for (&(a, b, j), &v) in &self.terms {
            let i = f.index(a as i64 - b as i64, j)?;
            f.coeffs[i] += v;
        }
        Ok(f)
    }
}

/// ⟨z^a z̄^b, z^c z̄^d⟩ over the unit disc with area measure.
pub fn monomial_gram(a: u32, b: u32, c_: u32, d: u32) -> f64 {
    if a as i64 - b as i64 != c_ as i64 - d as i64 {
        0.0
    } else {
        2.0 * PI / f64::from(a + b + c_ + d + 2)
    }
}

/// Mode k ≥ 0 goes to z^k; negative modes are annihilated.
pub fn poisson_extend(psi: &FourierSpinor) -> Result<DiscPoly> {
    if psi.rank != 1 {
        return Err(LabError::DimensionMismatch { expected: 1, got: psi.rank });
    }
    let mut p = DiscPoly::new(1);
    for k in 0..=psi.band as i64 {
        let v = psi.get(k, 0);
        if v.norm() != 0.0 {
            p.add_term(k as u32, 0, 0, v);
        }
    }
    Ok(p)
}

/// Eigenvalue of K*K on e^{ikt}.
pub fn kstark_eigenvalue(k: i64) -> Rational64 {
    if k < 0 {
        Rational64::from_integer(0)
    } else {
        Rational64::new(1, 2 * (k + 1))
    }
}

/// ‖K e^{ikt}‖²/‖e^{ikt}‖² with the disc norm evaluated by Gauss–Legendre
/// in r and the trapezoid rule in θ.
pub fn kstark_eigenvalue_quadrature(k: i64, radial_nodes: usize) -> Result<f64> {
    let band = k.unsigned_abs() as usize;
    let psi = FourierSpinor::mode(band, 1, k, 0, c(1.0, 0.0))?;
    let p = poisson_extend(&psi)?;
    let angular = 2 * band + 4;
    let mut total = 0.0;
    for (r, w) in gl_rule_on(radial_nodes, 0.0, 1.0) {
        for j in 0..angular {
            let z = C64::from_polar(r, 2.0 * PI * j as f64 / angular as f64);
            let v: f64 = p.eval(z).iter().map(|x| x.norm_sqr()).sum();
            total += v * w * r * 2.0 * PI / angular as f64;
        }
    }
    Ok(total / (2.0 * PI))
}

fn check_interior(z: C64) -> Result<()> {
    if z.norm() < 1.0 {
        Ok(())
    } else {
        Err(LabError::NotInterior(z.norm()))
    }
}

pub fn kkstar_kernel(z: C64, w: C64, band: usize) -> Result<C64> {
    check_interior(z)?;
    check_interior(w)?;
    let u = z * w.conj();
    let mut term = c(1.0, 0.0);
    let mut s = c(0.0, 0.0);
    for _ in 0..=band {
        s += term;
        term *= u;
    }
    Ok(s / (2.0 * PI))
}

pub fn kkstar_closed(z: C64, w: C64) -> C64 {
    1.0 / ((1.0 - z * w.conj()) * (2.0 * PI))
}

/// |closed − series| ≤ r^{N+1}/(2π(1−r)), r = |z||w|.
pub fn kkstar_tail_bound(r: f64, band: usize) -> f64 {
    r.powi(band as i32 + 1) / (2.0 * PI * (1.0 - r))
}

pub fn bergman_kernel(z: C64, w: C64, band: usize) -> Result<C64> {
    check_interior(z)?;
    check_interior(w)?;
    let u = z * w.conj();
    let mut term = c(1.0, 0.0);
    let mut s = c(0.0, 0.0);
    for k in 0..=band {
        s += term * (k as f64 + 1.0);
        term *= u;
    }
    Ok(s / PI)
}

pub fn bergman_closed(z: C64, w: C64) -> C64 {
    let d = 1.0 - z * w.conj();
    1.0 / (d * d * PI)
}

/// Σ_{k>N} (k+1) r^k / π in closed form.
pub fn bergman_tail_bound(r: f64, band: usize) -> f64 {
    let n = band as f64;
    r.powi(band as i32 + 1) * ((n + 2.0) - (n + 1.0) * r) / (PI * (1.0 - r) * (1.0 - r))
}

/// A bound on the floating-point error of the truncated series plus the
/// closed-form evaluation, for terms computed by repeated multiplication.
pub fn series_rounding_bound(r: f64, band: usize, weighted: bool, closed_abs: f64) -> f64 {
    let eps = f64::EPSILON;
    let mut s = 0.0;
    let mut t = 1.0;
    for k in 0..=band {
        let w = if weighted { k as f64 + 1.0 } else { 1.0 };
        s += (3.0 * k as f64 + band as f64 + 2.0) * w * t;
        t *= r;
    }
    let scale = if weighted { 1.0 / PI } else { 1.0 / (2.0 * PI) };
    eps * (s * scale + 10.0 * closed_abs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelKind {
    KKStar,
    Bergman,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelSample {
    pub z: [f64; 2],
    pub w: [f64; 2],
    pub value: [f64; 2],
    pub closed: [f64; 2],
    pub abs_error: f64,
    pub tail_bound: f64,
    pub rounding_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelGrid {
    pub kind: KernelKind,
    pub band: usize,
    pub samples: Vec<KernelSample>,
}

/// Deterministic sample pairs with |z|, |w| ≤ rmax.
pub fn sample_pairs(count: usize, rmax: f64, seed: u64) -> Vec<(C64, C64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        let rad = rmax * rng.gen::<f64>().sqrt();
        let th = 2.0 * PI * rng.gen::<f64>();
        C64::from_polar(rad, th)
    };
    (0..count).map(|_| (draw(&mut rng), draw(&mut rng))).collect()
}

impl KernelGrid {
    pub fn evaluate(kind: KernelKind, pairs: &[(C64, C64)], band: usize) -> Result<Self> {
        let mut samples = Vec::with_capacity(pairs.len());
        for &(z, w) in pairs {
            let (value, closed) = match kind {
                KernelKind::KKStar => (kkstar_kernel(z, w, band)?, kkstar_closed(z, w)),
                KernelKind::Bergman => (bergman_kernel(z, w, band)?, bergman_closed(z, w)),
            };
            let r = z.norm() * w.norm();
            let (tail, round) = match kind {
                KernelKind::KKStar => (kkstar_tail_bound(r, band), series_rounding_bound(r, band, false, closed.norm())),
                KernelKind::Bergman => (bergman_tail_bound(r, band), series_rounding_bound(r, band, true, closed.norm())),
            };
            samples.push(KernelSample {
                z: [z.re, z.im],
                w: [w.re, w.im],
                value: [value.re, value.im],
                closed: [closed.re, closed.im],
                abs_error: (value - closed).norm(),
                tail_bound: tail,
                rounding_bound: round,
            });
        }
        Ok(KernelGrid { kind, band, samples })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("re_z,im_z,re_w,im_w,re_value,im_value,re_closed,im_closed,abs_error\n");
        for p in &self.samples {
            s.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.6e}\n",
                p.z[0], p.z[1], p.w[0], p.w[1], p.value[0], p.value[1], p.closed[0], p.closed[1], p.abs_error
            ));
        }
        s
    }
}

/// Harmonic element with boundary trace and interior L² norm².
#[derive(Debug, Clone)]
pub struct HarmonicElement {
    pub poly: DiscPoly,
    pub trace: FourierSpinor,
    pub interior_norm_sqr: f64,
}

#[derive(Debug, Clone)]
pub struct DiscHarmonicBasis {
    pub model: Model,
    pub band: usize,
    pub elements: Vec<HarmonicElement>,
}

/// The spin model uses the d = 2 representation with γ₁ ↔ ∂_x, γ₂ ↔ ∂_y.
pub fn spin_rep() -> CliffordRep {
    CliffordRep::build(2).expect("d = 2 is valid")
}

/// D = Σγ_j∂_j on polynomial spinors: D = (γ₁ + iγ₂)∂_z + (γ₁ − iγ₂)∂_z̄.
pub fn apply_flat_dirac(rep: &CliffordRep, p: &DiscPoly) -> DiscPoly {
    let a_z = &rep.gens[0] + &rep.gens[1] * I;
    let a_zb = &rep.gens[0] - &rep.gens[1] * I;
    let mut out = DiscPoly::new(rep.rank);
    for (&(a, b, j), &v) in &p.terms {
        for i in 0..rep.rank {
            if a > 0 {
                out.add_term(a - 1, b, i, a_z[(i, j)] * v * f64::from(a));
            }
            if b > 0 {
                out.add_term(a, b - 1, i, a_zb[(i, j)] * v * f64::from(b));
            }
        }
    }
    out
}

impl DiscHarmonicBasis {
    pub fn build(model: Model, band: usize) -> Result<Self> {
        let elements = match model {
            Model::Scalar => (0..=band as u32)
                .map(|k| {
                    let poly = DiscPoly::monomial(k, 0);
                    Ok(HarmonicElement {
                        trace: poly.trace(band)?,
                        interior_norm_sqr: poly.inner(&poly).re,
                        poly,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            Model::Spin => spin_kernel_basis(&spin_rep(), band)?,
        };
        Ok(DiscHarmonicBasis { model, band, elements })
    }

    /// Columns are the traces of the basis elements.
    pub fn trace_matrix(&self) -> CMatrix {
        let rows = (2 * self.band + 1) * self.model.rank();
        let mut t = zeros(rows, self.elements.len());
        for (j, e) in self.elements.iter().enumerate() {
            for (i, v) in e.trace.coeffs.iter().enumerate() {
                t[(i, j)] = *v;
            }
        }
        t
    }
}

/// Kernel of the flat Dirac operator on spinor polynomials of total degree
/// ≤ N, found degree by degree from the null space of the coefficient map.
fn spin_kernel_basis(rep: &CliffordRep, band: usize) -> Result<Vec<HarmonicElement>> {
    let r = rep.rank;
    let mut out = Vec::new();
    for s in 0..=band as u32 {
        // unknowns z^a z̄^{s−a} e_j, a = 0..s
        let unknowns: Vec<(u32, u32, usize)> = (0..=s).flat_map(|a| (0..r).map(move |j| (a, s - a, j))).collect();
        let nu = unknowns.len();
        let null: Vec<nalgebra::DVector<C64>> = if s == 0 {
            (0..nu).map(|i| nalgebra::DVector::from_fn(nu, |k, _| if k == i { c(1.0, 0.0) } else { c(0.0, 0.0) })).collect()
        } else {
            let rows_idx = |a: u32, j: usize| a as usize * r + j; // degree s−1 monomials z^a z̄^{s−1−a}
            let mut m = zeros(s as usize * r, nu);
            for (col, &(a, b, j)) in unknowns.iter().enumerate() {
                let mut p = DiscPoly::new(r);
                p.add_term(a, b, j, c(1.0, 0.0));
                let dp = apply_flat_dirac(rep, &p);
                for (&(a2, _b2, i), &v) in &dp.terms {
                    m[(rows_idx(a2, i), col)] += v;
                }
            }
            let h = m.adjoint() * &m;
            let eig = SymmetricEigen::new(h);
            let top = eig.eigenvalues.iter().fold(0.0f64, |x, &y| x.max(y.abs())).max(1.0);
            eig.eigenvalues
                .iter()
                .enumerate()
                .filter(|(_, &l)| l.abs() <= 1e-10 * top)
                .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
                .collect()
        };
        for v in null {
            let mut poly = DiscPoly::new(r);
            for (idx, &(a, b, j)) in unknowns.iter().enumerate() {
                if v[idx].norm() > 1e-13 {
                    poly.add_term(a, b, j, v[idx]);
                }
            }
            out.push(HarmonicElement {
                trace: poly.trace(band)?,
                interior_norm_sqr: poly.inner(&poly).re,
                poly,
            });
        }
    }
    Ok(out)
}

/// Orthogonal projector on FourierSpinor coefficients.
#[derive(Debug, Clone)]
pub struct Projector {
    pub model: Model,
    pub band: usize,
    pub rank: usize,
    pub matrix: CMatrix,
}

impl Projector {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Restriction to the sub-band [−m, m].
    pub fn compress(&self, m: usize) -> Result<CMatrix> {
        let e = embedding(m, self.band, self.rank)?;
        Ok(e.adjoint() * &self.matrix * e)
    }

    /// 2×2 (rank×rank) block acting on mode k.
    pub fn mode_block(&self, k: i64) -> Result<CMatrix> {
        let i0 = spinor_index(self.band, self.rank, k, 0)?;
        Ok(self.matrix.view((i0, i0), (self.rank, self.rank)).into_owned())
    }

    /// Rank of the block acting on component `comp` across all modes.
    pub fn component_rank(&self, comp: usize) -> usize {
        let idx: Vec<usize> = (0..2 * self.band + 1).map(|m| m * self.rank + comp).collect();
        let sub = CMatrix::from_fn(idx.len(), idx.len(), |i, j| self.matrix[(idx[i], idx[j])]);
        rank(&sub, 1e-8)
    }
}

/// Inclusion of band m into band N ≥ m.
pub fn embedding(m: usize, band: usize, rank: usize) -> Result<CMatrix> {
    if m > band {
        return Err(LabError::InvalidParameter(format!("band {m} exceeds {band}")));
    }
    let mut e = zeros((2 * band + 1) * rank, (2 * m + 1) * rank);
    let off = (band - m) * rank;
    for i in 0..(2 * m + 1) * rank {
        e[(i + off, i)] = c(1.0, 0.0);
    }
    Ok(e)
}

/// Calderón projector built from traces of harmonic elements: P = T G⁻¹ T†·2π
/// with G the boundary Gram matrix 2π T†T. The two factors of 2π cancel and
/// are left out, which keeps the scalar projector exactly 0/1.
pub fn calderon_bruteforce(model: Model, band: usize) -> Result<Projector> {
    if band < 1 {
        return Err(LabError::InvalidParameter("band must be at least 1".into()));
    }
    let basis = DiscHarmonicBasis::build(model, band)?;
    let t = basis.trace_matrix();
    let gram = t.adjoint() * &t;
    let chol = Cholesky::new(gram).ok_or_else(|| LabError::Singular("harmonic trace Gram matrix".into()))?;
    let matrix = &t * chol.solve(&t.adjoint());
    Ok(Projector { model, band, rank: model.rank(), matrix })
}

/// Diagonal APS indicator of k ≥ 0 on the scalar band.
pub fn aps_indicator(band: usize) -> CMatrix {
    let n = 2 * band + 1;
    CMatrix::from_fn(n, n, |i, j| if i == j && i >= band { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

/// Multiplication by Σ_j M_j e^{ijt} from band `bin` to band `bout`.
pub fn multiplication_matrix(parts: &[(i64, CMatrix)], rank: usize, bin: usize, bout: usize) -> CMatrix {
    let mut out = zeros((2 * bout + 1) * rank, (2 * bin + 1) * rank);
    for kin in -(bin as i64)..=bin as i64 {
        for (shift, m) in parts {
            let kout = kin + shift;
            if kout.unsigned_abs() as usize > bout {
                continue;
            }
            let io = (kout + bout as i64) as usize * rank;
            let ii = (kin + bin as i64) as usize * rank;
            for a in 0..rank {
                for b in 0..rank {
                    out[(io + a, ii + b)] += m[(a, b)];
                }
            }
        }
    }
    out
}

/// Fourier parts of cl(ν) for the inner normal ν = −(cos t, sin t); the
/// outer normal flips the sign.
pub fn normal_parts(rep: &CliffordRep, outer: bool) -> Vec<(i64, CMatrix)> {
    let s = if outer { 1.0 } else { -1.0 };
    let g1 = &rep.gens[0];
    let g2 = &rep.gens[1];
    // cos t = (e^{it}+e^{−it})/2, sin t = (e^{it}−e^{−it})/(2i)
    let plus = (g1 * c(0.5, 0.0) + g2 * c(0.0, -0.5)) * c(s, 0.0);
    let minus = (g1 * c(0.5, 0.0) + g2 * c(0.0, 0.5)) * c(s, 0.0);
    vec![(1, plus), (-1, minus)]
}

/// Fourier parts of cl(e_t) with e_t = (−sin t, cos t).
pub fn tangent_parts(rep: &CliffordRep) -> Vec<(i64, CMatrix)> {
    let g1 = &rep.gens[0];
    let g2 = &rep.gens[1];
    let plus = g1 * c(0.0, 0.5) + g2 * c(0.5, 0.0);
    let minus = g1 * c(0.0, -0.5) + g2 * c(0.5, 0.0);
    vec![(1, plus), (-1, minus)]
}

/// ‖−cl(ν) C cl(ν) − (Id − C)‖ tested on band N−1 so that both Clifford
/// multiplications stay inside the computed band.
pub fn lagrangian_check(proj: &Projector, rep: &CliffordRep) -> Result<f64> {
    if proj.rank != rep.rank || rep.dim != 2 {
        return Err(LabError::DimensionMismatch { expected: proj.rank, got: rep.rank });
    }
    lagrangian_residual(&proj.matrix, proj.band, rep)
}

pub fn lagrangian_residual(cmat: &CMatrix, band: usize, rep: &CliffordRep) -> Result<f64> {
    let r = rep.rank;
    if cmat.nrows() != (2 * band + 1) * r || band < 1 {
        return Err(LabError::DimensionMismatch { expected: (2 * band + 1) * r, got: cmat.nrows() });
    }
    let parts = normal_parts(rep, false);
    let m_in = multiplication_matrix(&parts, r, band - 1, band);
    let m_out = multiplication_matrix(&parts, r, band, band + 1);
    let lhs = -(m_out * cmat * m_in);
    let e_small = embedding(band - 1, band, r)?;
    let compressed = e_small.adjoint() * cmat * &e_small;
    let rhs_small = identity((2 * band - 1) * r) - compressed;
    let rhs = embedding(band - 1, band + 1, r)? * rhs_small;
    Ok(op_norm(&(lhs - rhs)))
}

#[derive(Debug, Clone, Serialize)]
pub struct SymbolLimit {
    pub kmax: i64,
    /// For each normal orientation (inner, outer): sup over k ∈ [k₀, kmax]
    /// of the k > 0 and k < 0 block errors.
    pub inner_errors: Vec<(i64, f64, f64)>,
    pub outer_errors: Vec<(i64, f64, f64)>,
    pub best_outer: bool,
    pub limit_plus: Vec<[f64; 2]>,
    pub limit_minus: Vec<[f64; 2]>,
    pub error_at_kmax: f64,
    /// Fitted exponent p in error ~ k^{−p}; infinite when the blocks are exact.
    pub rate: f64,
}

/// ½(Id + i·cl(ν)cl(ξ̂)) in the constant frame, ξ̂ = sign·dt.
pub fn symbol_target(rep: &CliffordRep, sign: f64, outer: bool) -> CMatrix {
    // both multipliers have t-independent product; evaluate at t = 0
    let nu0: CMatrix = normal_parts(rep, outer).iter().fold(zeros(rep.rank, rep.rank), |a, (_, m)| a + m);
    let et0: CMatrix = tangent_parts(rep).iter().fold(zeros(rep.rank, rep.rank), |a, (_, m)| a + m);
    (identity(rep.rank) + nu0 * et0 * I * c(sign, 0.0)) * c(0.5, 0.0)
}

pub fn calderon_symbol_limit(proj: &Projector, rep: &CliffordRep, kmax: i64) -> Result<SymbolLimit> {
    if proj.band < 8 || (kmax as usize) > proj.band || kmax < 8 {
        return Err(LabError::InvalidParameter(format!(
            "symbol limit needs band ≥ 8 and 8 ≤ kmax ≤ band (band {}, kmax {kmax})",
            proj.band
        )));
    }
    let mut inner_errors = Vec::new();
    let mut outer_errors = Vec::new();
    for k in 1..=kmax {
        let bp = proj.mode_block(k)?;
        let bm = proj.mode_block(-k)?;
        for (outer, store) in [(false, &mut inner_errors), (true, &mut outer_errors)] {
            let ep = op_norm(&(&bp - symbol_target(rep, 1.0, outer)));
            let em = op_norm(&(&bm - symbol_target(rep, -1.0, outer)));
            store.push((k, ep, em));
        }
    }
    let tail_err = |v: &Vec<(i64, f64, f64)>| v.last().map(|e| e.1.max(e.2)).unwrap_or(f64::INFINITY);
    let best_outer = tail_err(&outer_errors) <= tail_err(&inner_errors);
    let chosen = if best_outer { &outer_errors } else { &inner_errors };
    let error_at_kmax = tail_err(chosen);
    let rate = fit_rate(chosen);
    let flat = |m: CMatrix| m.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
    Ok(SymbolLimit {
        kmax,
        inner_errors,
        outer_errors,
        best_outer,
        limit_plus: flat(proj.mode_block(kmax)?),
        limit_minus: flat(proj.mode_block(-kmax)?),
        error_at_kmax,
        rate,
    })
}

/// Least-squares slope of −log e against log k over k ≥ 4.
fn fit_rate(errors: &[(i64, f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .filter(|e| e.0 >= 4)
        .map(|e| (e.0 as f64, e.1.max(e.2)))
        .collect();
    if pts.iter().all(|p| p.1 <= 1e-15) {
        return f64::INFINITY;
    }
    let usable: Vec<(f64, f64)> = pts.iter().filter(|p| p.1 > 1e-15).map(|p| (p.0.ln(), p.1.ln())).collect();
    let n = usable.len() as f64;
    if n < 2.0 {
        return f64::INFINITY;
    }
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    -sxy / sxx
}

/// Interior space spanned by z^a z̄^b, 0 ≤ a, b ≤ N (scalar model).
#[derive(Debug, Clone)]
pub struct InteriorSpace {
    pub band: usize,
    pub gram: CMatrix,
}

impl InteriorSpace {
    pub fn new(band: usize) -> Self {
        let n = band + 1;
        let gram = CMatrix::from_fn(n * n, n * n, |i, j| {
            let (a, b) = ((i / n) as u32, (i % n) as u32);
            let (cc, d) = ((j / n) as u32, (j % n) as u32);
            c(monomial_gram(cc, d, a, b), 0.0)
        });
        InteriorSpace { band, gram }
    }

    pub fn dim(&self) -> usize {
        (self.band + 1) * (self.band + 1)
    }

    pub fn index(&self, a: u32, b: u32) -> usize {
        a as usize * (self.band + 1) + b as usize
    }

    pub fn vector(&self, p: &DiscPoly) -> Result<nalgebra::DVector<C64>> {
        let mut v = nalgebra::DVector::from_element(self.dim(), c(0.0, 0.0));
        for (&(a, b, j), &x) in &p.terms {
            if j != 0 || a as usize > self.band || b as usize > self.band {
                return Err(LabError::InvalidParameter(format!("z^{a} z̄^{b} outside the interior space")));
            }
            v[self.index(a, b)] += x;
        }
        Ok(v)
    }

    pub fn poly(&self, v: &nalgebra::DVector<C64>) -> DiscPoly {
        let n = self.band + 1;
        let mut p = DiscPoly::new(1);
        for (i, &x) in v.iter().enumerate() {
            if x.norm() > 1e-14 {
                p.add_term((i / n) as u32, (i % n) as u32, 0, x);
            }
        }
        p
    }

    /// Poisson operator from boundary band N into the interior space.
    pub fn poisson_matrix(&self) -> CMatrix {
        let n = self.band;
        let mut k = zeros(self.dim(), 2 * n + 1);
        for m in 0..=n {
            k[(self.index(m as u32, 0), m + n)] = c(1.0, 0.0);
        }
        k
    }

    /// Adjoint K* = (2π)⁻¹ K†G for the boundary measure dt.
    pub fn poisson_adjoint(&self) -> CMatrix {
        self.poisson_matrix().adjoint() * &self.gram * c(1.0 / (2.0 * PI), 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct BergmanCheck {
    pub band: usize,
    pub space: InteriorSpace,
    pub p_direct: CMatrix,
    pub p_factored: CMatrix,
    pub kstark: CMatrix,
    pub kstark_inv: CMatrix,
    pub calderon: CMatrix,
    pub poisson: CMatrix,
}

impl BergmanCheck {
    pub fn agreement(&self) -> f64 {
        op_norm(&(&self.p_direct - &self.p_factored))
    }

    /// ‖P² − P‖ for both constructions.
    pub fn idempotency(&self) -> f64 {
        let a = op_norm(&(&self.p_direct * &self.p_direct - &self.p_direct));
        let b = op_norm(&(&self.p_factored * &self.p_factored - &self.p_factored));
        a.max(b)
    }

    /// Self-adjointness in the area inner product: ‖GP − (GP)†‖.
    pub fn hermiticity(&self) -> f64 {
        let g = &self.space.gram;
        [&self.p_direct, &self.p_factored]
            .iter()
            .map(|p| {
                let gp = g * *p;
                op_norm(&(&gp - gp.adjoint()))
            })
            .fold(0.0, f64::max)
    }

    /// ‖P K − K‖.
    pub fn reproduces_poisson(&self) -> f64 {
        op_norm(&(&self.p_factored * &self.poisson - &self.poisson))
    }

    /// ‖(K*K)⁻¹ K*K − C‖.
    pub fn inverse_identity(&self) -> f64 {
        op_norm(&(&self.kstark_inv * &self.kstark - &self.calderon))
    }

    pub fn apply(&self, p: &DiscPoly) -> Result<DiscPoly> {
        let v = self.space.vector(p)?;
        Ok(self.space.poly(&(&self.p_factored * v)))
    }
}

/// Bergman projector two ways: orthogonal projection onto holomorphic
/// monomials in the area Gram metric, and K(K*K)⁻¹K* with (K*K)⁻¹ = B·C,
/// B = A⁻¹, A = K*K + ¼(Id − C)(Id + k²)^{−½}(Id − C).
pub fn bergman_bruteforce(band: usize) -> Result<BergmanCheck> {
    if band < 1 {
        return Err(LabError::InvalidParameter("band must be at least 1".into()));
    }
    let space = InteriorSpace::new(band);
    let g = &space.gram;
    let mut t = zeros(space.dim(), band + 1);
    for k in 0..=band {
        t[(space.index(k as u32, 0), k)] = c(1.0, 0.0);
    }
    let tgt = t.adjoint() * g * &t;
    let inv = tgt.try_inverse().ok_or_else(|| LabError::Singular("holomorphic Gram block".into()))?;
    let p_direct = &t * inv * t.adjoint() * g;

    let k = space.poisson_matrix();
    let kadj = space.poisson_adjoint();
    let kstark = &kadj * &k;
    let calderon = aps_indicator(band);
    let nb = 2 * band + 1;
    let comp = identity(nb) - &calderon;
    let weight = CMatrix::from_fn(nb, nb, |i, j| {
        if i == j {
            let m = i as f64 - band as f64;
            c(1.0 / (1.0 + m * m).sqrt(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let a = &kstark + &comp * weight * &comp * c(0.25, 0.0);
    let b = a.try_inverse().ok_or_else(|| LabError::Singular("regularized K*K".into()))?;
    let kstark_inv = b * &calderon;
    let p_factored = &k * &kstark_inv * &kadj;
    Ok(BergmanCheck { band, space, p_direct, p_factored, kstark, kstark_inv, calderon, poisson: k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_residual, idempotency_residual};

    fn quad_inner(p: &DiscPoly, q: &DiscPoly) -> C64 {
        // Gauss–Legendre in r, trapezoid in θ
        let radial = gl_rule_on(40, 0.0, 1.0);
        let m = 64;
        let mut s = c(0.0, 0.0);
        for &(rr, w) in &radial {
            for j in 0..m {
                let th = 2.0 * PI * j as f64 / m as f64;
                let z = C64::from_polar(rr, th);
                let a = p.eval(z);
                let b = q.eval(z);
                let dot: C64 = a.iter().zip(&b).map(|(x, y)| x * y.conj()).sum();
                s += dot * (w * rr * 2.0 * PI / m as f64);
            }
        }
        s
    }

    #[test]
    fn gram_matches_quadrature() {
        for (a, b, cc, d) in [(0, 0, 0, 0), (2, 1, 1, 0), (3, 1, 2, 0), (1, 2, 0, 1), (2, 0, 0, 2)] {
            let want = quad_inner(&DiscPoly::monomial(a, b), &DiscPoly::monomial(cc, d));
            assert!((want.re - monomial_gram(a, b, cc, d)).abs() < 1e-12, "{a}{b}{cc}{d}");
            assert!(want.im.abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_examples() {
        let one = FourierSpinor::mode(4, 1, 0, 0, c(1.0, 0.0)).unwrap();
        assert_eq!(poisson_extend(&one).unwrap(), DiscPoly::monomial(0, 0));
        let two = FourierSpinor::mode(4, 1, 2, 0, c(1.0, 0.0)).unwrap();
        assert_eq!(poisson_extend(&two).unwrap(), DiscPoly::monomial(2, 0));
        let neg = FourierSpinor::mode(4, 1, -1, 0, c(1.0, 0.0)).unwrap();
        assert!(poisson_extend(&neg).unwrap().is_zero(0.0));
    }

    #[test]
    fn kstark_values() {
        assert_eq!(kstark_eigenvalue(0), Rational64::new(1, 2));
        assert_eq!(kstark_eigenvalue(3), Rational64::new(1, 8));
        assert_eq!(kstark_eigenvalue(-2), Rational64::from_integer(0));
        for k in [0u32, 3, 10] {
            let z = DiscPoly::monomial(k, 0);
            let ratio = quad_inner(&z, &z).re / (2.0 * PI);
            let want = *kstark_eigenvalue(k as i64).numer() as f64 / *kstark_eigenvalue(k as i64).denom() as f64;
            assert!((ratio - want).abs() < 1e-12);
        }
    }

    #[test]
    fn kstark_quadrature_spectrum() {
        for k in -3..=63 {
            let want = *kstark_eigenvalue(k).numer() as f64 / *kstark_eigenvalue(k).denom() as f64;
            let got = kstark_eigenvalue_quadrature(k, 80).unwrap();
            assert!((got - want).abs() <= 1e-12 * want.max(1e-300) || (want == 0.0 && got == 0.0), "k={k}");
        }
    }

    #[test]
    fn kernel_examples() {
        let z0 = c(0.0, 0.0);
        let w = c(0.3, -0.2);
        assert!((kkstar_kernel(z0, w, 10).unwrap() - 1.0 / (2.0 * PI)).norm() < 1e-16);
        assert!((bergman_kernel(z0, w, 10).unwrap() - 1.0 / PI).norm() < 1e-16);
        let h = c(0.5, 0.0);
        assert!((kkstar_kernel(h, h, 200).unwrap() - 1.0 / (2.0 * PI * 0.75)).norm() < 1e-15);
        assert!((bergman_kernel(h, h, 200).unwrap() - 1.0 / (PI * 0.5625)).norm() < 1e-14);
        let (a, b) = (c(0.9, 0.0), c(0.0, 0.9));
        for n in [5, 20, 80] {
            let e = (kkstar_kernel(a, b, n).unwrap() - kkstar_closed(a, b)).norm();
            assert!(e <= kkstar_tail_bound(0.81, n) * (1.0 + 1e-12) + 1e-15);
            let e = (bergman_kernel(a, b, n).unwrap() - bergman_closed(a, b)).norm();
            assert!(e <= bergman_tail_bound(0.81, n) * (1.0 + 1e-12) + 1e-14);
        }
        assert!(kkstar_kernel(c(1.0, 0.0), z0, 4).is_err());
    }

    #[test]
    fn bergman_reproduces_w_squared() {
        // ∫ B(z, w) q(w) dA(w) = q(z), q = w²
        let z = c(0.3, 0.4);
        let radial = gl_rule_on(60, 0.0, 1.0);
        let m = 128;
        let mut s = c(0.0, 0.0);
        for &(rr, wt) in &radial {
            for j in 0..m {
                let w = C64::from_polar(rr, 2.0 * PI * j as f64 / m as f64);
                s += bergman_closed(z, w) * w * w * (wt * rr * 2.0 * PI / m as f64);
            }
        }
        assert!((s - z * z).norm() < 1e-8);
    }

    #[test]
    fn csv_layout() {
        let g = KernelGrid::evaluate(KernelKind::KKStar, &sample_pairs(3, 0.9, 1), 20).unwrap();
        let csv = g.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().next().unwrap().split(',').count(), 9);
    }

    #[test]
    fn scalar_calderon_is_aps_indicator() {
        let p = calderon_bruteforce(Model::Scalar, 4).unwrap();
        assert_eq!(p.matrix, aps_indicator(4));
    }

    #[test]
    fn spin_basis_is_harmonic() {
        let rep = spin_rep();
        let b = DiscHarmonicBasis::build(Model::Spin, 6).unwrap();
        assert_eq!(b.elements.len(), 14);
        for e in &b.elements {
            assert!(apply_flat_dirac(&rep, &e.poly).is_zero(1e-12));
            assert!(e.interior_norm_sqr > 0.0);
        }
    }

    #[test]
    fn spin_calderon_properties() {
        let rep = spin_rep();
        let p = calderon_bruteforce(Model::Spin, 8).unwrap();
        assert!(idempotency_residual(&p.matrix) < 1e-12);
        assert!(hermiticity_residual(&p.matrix) < 1e-12);
        assert_eq!(p.component_rank(0), 9);
        assert_eq!(p.component_rank(1), 9);
        assert!(lagrangian_check(&p, &rep).unwrap() < 1e-12);
    }

    #[test]
    fn lagrangian_controls() {
        let rep = spin_rep();
        let n = 6;
        let dim = (2 * n + 1) * 2;
        let id = lagrangian_residual(&identity(dim), n, &rep).unwrap();
        let zero = lagrangian_residual(&zeros(dim, dim), n, &rep).unwrap();
        assert!((id - 1.0).abs() < 1e-12);
        assert!((zero - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symbol_limit_targets() {
        let rep = spin_rep();
        for outer in [false, true] {
            let tp = symbol_target(&rep, 1.0, outer);
            let tm = symbol_target(&rep, -1.0, outer);
            assert!(idempotency_residual(&tp) < 1e-15);
            assert!((crate::linalg::trace(&tp).re - 1.0).abs() < 1e-15);
            assert!(op_norm(&(&tp + &tm - identity(2))) < 1e-15);
        }
        let p = calderon_bruteforce(Model::Spin, 16).unwrap();
        let lim = calderon_symbol_limit(&p, &rep, 16).unwrap();
        assert!(lim.error_at_kmax < 1e-10);
        assert!(lim.rate >= 1.0);
        assert!(calderon_symbol_limit(&calderon_bruteforce(Model::Spin, 4).unwrap(), &rep, 4).is_err());
    }

    #[test]
    fn bergman_two_constructions() {
        let chk = bergman_bruteforce(6).unwrap();
        assert!(chk.agreement() < 1e-10);
        assert!(chk.idempotency() < 1e-10);
        assert!(chk.hermiticity() < 1e-10);
        assert!(chk.reproduces_poisson() < 1e-10);
        assert!(chk.inverse_identity() < 1e-10);
        let z3 = chk.apply(&DiscPoly::monomial(3, 0)).unwrap();
        assert!((z3.terms[&(3, 0, 0)] - 1.0).norm() < 1e-12 && z3.terms.len() == 1);
        assert!(chk.apply(&DiscPoly::monomial(0, 1)).unwrap().is_zero(1e-12));
        let q = DiscPoly::monomial(2, 1);
        let out = chk.apply(&q).unwrap();
        let z = DiscPoly::monomial(1, 0);
        let want = quad_inner(&q, &z) / quad_inner(&z, &z);
        assert!((out.terms[&(1, 0, 0)] - want).norm() < 1e-10);
        assert!((want.re - 2.0 / 3.0).abs() < 1e-10);
    }
}
