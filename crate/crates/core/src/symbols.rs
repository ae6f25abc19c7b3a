//! Homogeneous matrix symbols in (ξ, μ) ∈ ℝ × ℝⁿ and the operations on
//! principal symbols used for the Poisson operator, the scattering family
//! and the Calderón projector.
//!
//! Fourier transforms in ξ use F[f](x) = ∫ e^{−ixξ} f(ξ) dξ.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::clifford::CliffordRep;
use crate::error::{LabError, Result};
use crate::linalg::{c, identity, max_abs, zeros, CMatrix, C64, I};
use crate::quadrature::{adaptive, adaptive_half_line, adaptive_real_half_line, gl_rule_on};
use crate::special::{gamma_complex, gamma_real, is_gamma_pole};

pub type SymbolFn = Arc<dyn Fn(f64, &[f64]) -> CMatrix + Send + Sync>;

#[derive(Clone)]
pub struct HomSymbol {
    pub degree: f64,
    pub n: usize,
    pub size: usize,
    pub value: SymbolFn,
    /// ξ-Fourier transform as a function of (x, μ), when known.
    pub closed_form_ft: Option<SymbolFn>,
}

impl fmt::Debug for HomSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomSymbol")
            .field("degree", &self.degree)
            .field("n", &self.n)
            .field("size", &self.size)
            .field("closed_form_ft", &self.closed_form_ft.is_some())
            .finish()
    }
}

impl HomSymbol {
    pub fn eval(&self, xi: f64, mu: &[f64]) -> CMatrix {
        (self.value)(xi, mu)
    }

    /// Largest relative deviation from value(tξ, tμ) = t^s value(ξ, μ).
    pub fn homogeneity_residual(&self, samples: &[(f64, Vec<f64>, f64)]) -> f64 {
        samples
            .iter()
            .map(|(xi, mu, t)| {
                let base = self.eval(*xi, mu);
                let scaled_mu: Vec<f64> = mu.iter().map(|m| m * t).collect();
                let scaled = self.eval(xi * t, &scaled_mu);
                let want = &base * c(t.powf(self.degree), 0.0);
                max_abs(&(scaled - &want)) / max_abs(&want).max(1e-300)
            })
            .fold(0.0, f64::max)
    }
}

/// Terms of strictly decreasing degree sharing n and matrix size.
#[derive(Debug, Clone)]
pub struct ClassicalSymbol {
    pub terms: Vec<HomSymbol>,
}

impl ClassicalSymbol {
    pub fn new(terms: Vec<HomSymbol>) -> Result<Self> {
        for w in terms.windows(2) {
            if w[1].degree >= w[0].degree {
                return Err(LabError::InvalidParameter("degrees must strictly decrease".into()));
            }
            if w[1].n != w[0].n || w[1].size != w[0].size {
                return Err(LabError::DimensionMismatch { expected: w[0].size, got: w[1].size });
            }
        }
        Ok(ClassicalSymbol { terms })
    }

    pub fn principal(&self) -> Option<&HomSymbol> {
        self.terms.first()
    }

    pub fn eval(&self, xi: f64, mu: &[f64]) -> Option<CMatrix> {
        let mut it = self.terms.iter();
        let first = it.next()?.eval(xi, mu);
        Some(it.fold(first, |acc, t| acc + t.eval(xi, mu)))
    }
}

/// Coefficient in F(ρ^{−n−1+λ}) = c·R^{−λ} on ℝ^{n+1}.
pub fn gamma_ft_coeff(lambda: f64, n: usize) -> Result<f64> {
    if is_gamma_pole(lambda / 2.0, 1e-12) {
        return Err(LabError::Pole(format!("Γ(λ/2) at λ = {lambda}")));
    }
    let d = (n + 1) as f64;
    Ok((2.0 * PI).powf(d / 2.0) * 2f64.powf(lambda - d / 2.0) * gamma_real(lambda / 2.0) / gamma_real((d - lambda) / 2.0))
}

/// ∫₀^∞ r^a e^{−r²/2} dr by quadrature after r = u^{1/(a+1)}, which removes
/// the endpoint singularity.
pub fn gaussian_radial_moment(a: f64) -> Result<f64> {
    if a <= -1.0 {
        return Err(LabError::Divergent(format!("radial moment of order {a}")));
    }
    let p = 1.0 / (a + 1.0);
    let f = move |u: f64| p * (-0.5 * u.powf(2.0 * p)).exp();
    Ok(adaptive_real_half_line(&f, 0.0, 1e-13).0)
}

/// Numerical value of the coefficient from the Parseval identity against the
/// Gaussian e^{−|x|²/2}, whose transform is (2π)^{N/2} e^{−|ξ|²/2}:
/// c · I(N−1−λ) = (2π)^{N/2} · I(λ−1) with I the radial moments above.
pub fn gamma_ft_coeff_numeric(lambda: f64, n: usize) -> Result<f64> {
    let d = (n + 1) as f64;
    if !(0.0 < lambda && lambda < d) {
        return Err(LabError::InvalidParameter(format!("λ = {lambda} outside (0, {d})")));
    }
    let num = gaussian_radial_moment(lambda - 1.0)?;
    let den = gaussian_radial_moment(d - 1.0 - lambda)?;
    Ok((2.0 * PI).powf(d / 2.0) * num / den)
}

fn check_rep(rep: &CliffordRep, mu: &[f64]) -> Result<()> {
    if rep.dim != mu.len() + 1 {
        return Err(LabError::DimensionMismatch { expected: rep.dim - 1, got: mu.len() });
    }
    Ok(())
}

/// cl(μ) with μ along the first n generators.
pub fn cl_tangent(rep: &CliffordRep, mu: &[f64]) -> CMatrix {
    let mut out = zeros(rep.rank, rep.rank);
    for (g, &m) in rep.gens.iter().zip(mu) {
        out += g * c(m, 0.0);
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// σ_K(ξ, μ) = i(ξ² + |μ|²)⁻¹(ξ + cl(ν)cl(μ)).
pub fn principal_symbol_k(rep: &CliffordRep, xi: f64, mu: &[f64]) -> Result<CMatrix> {
    check_rep(rep, mu)?;
    let r2 = xi * xi + mu.iter().map(|m| m * m).sum::<f64>();
    if r2 == 0.0 {
        return Err(LabError::ZeroCovector);
    }
    let a = rep.cl_nu() * cl_tangent(rep, mu);
    Ok((rep.identity() * c(xi, 0.0) + a) * (I / r2))
}

/// σ_{K*}(ξ, μ) = −i(ξ² + |μ|²)⁻¹(ξ − cl(ν)cl(μ)).
pub fn principal_symbol_kstar(rep: &CliffordRep, xi: f64, mu: &[f64]) -> Result<CMatrix> {
    check_rep(rep, mu)?;
    let r2 = xi * xi + mu.iter().map(|m| m * m).sum::<f64>();
    if r2 == 0.0 {
        return Err(LabError::ZeroCovector);
    }
    let a = rep.cl_nu() * cl_tangent(rep, mu);
    Ok((rep.identity() * c(xi, 0.0) - a) * (-I / r2))
}

/// Symbol of K together with the closed-form transform
/// π e^{−|μ||x|}(sign x + i·cl(ν)cl(μ)/|μ|).
pub fn symbol_k(rep: &CliffordRep) -> HomSymbol {
    poisson_type_symbol(rep, false)
}

/// Symbol of K* with transform π e^{−|μ||x|}(−sign x + i·cl(ν)cl(μ)/|μ|).
pub fn symbol_kstar(rep: &CliffordRep) -> HomSymbol {
    poisson_type_symbol(rep, true)
}

fn poisson_type_symbol(rep: &CliffordRep, adjoint: bool) -> HomSymbol {
    let r1 = rep.clone();
    let r2 = rep.clone();
    let value: SymbolFn = if adjoint {
        Arc::new(move |xi, mu| principal_symbol_kstar(&r1, xi, mu).expect("valid symbol arguments"))
    } else {
        Arc::new(move |xi, mu| principal_symbol_k(&r1, xi, mu).expect("valid symbol arguments"))
    };
    let s = if adjoint { -1.0 } else { 1.0 };
    let ft: SymbolFn = Arc::new(move |x, mu| {
        let m = norm(mu);
        let a = r2.cl_nu() * cl_tangent(&r2, mu);
        let sgn = if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            0.0
        };
        (r2.identity() * c(s * sgn, 0.0) + a * (I / m)) * c(PI * (-m * x.abs()).exp(), 0.0)
    });
    HomSymbol { degree: -1.0, n: rep.dim - 1, size: rep.rank, value, closed_form_ft: Some(ft) }
}

/// Scalar |μ|/(ξ² + |μ|²) with transform π e^{−|μ||x|}.
pub fn scalar_test_symbol(n: usize) -> HomSymbol {
    HomSymbol {
        degree: -1.0,
        n,
        size: 1,
        value: Arc::new(|xi, mu| {
            let m = norm(mu);
            CMatrix::from_element(1, 1, c(m / (xi * xi + m * m), 0.0))
        }),
        closed_form_ft: Some(Arc::new(|x, mu| {
            let m = norm(mu);
            CMatrix::from_element(1, 1, c(PI * (-m * x.abs()).exp(), 0.0))
        })),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone)]
pub struct Composition {
    /// (2π)⁻² ∫₀^∞ σ̂_L(−x)σ̂_K(x) dx.
    pub value: CMatrix,
    /// Same integrand with the matrix factors in the opposite order.
    pub opposite_order: CMatrix,
    pub error_estimate: f64,
    pub method: Method,
}

/// Wynn's ε-algorithm on a sequence of partial sums.
fn wynn_epsilon(s: &[C64]) -> C64 {
    let n = s.len();
    if n < 3 {
        return *s.last().unwrap_or(&c(0.0, 0.0));
    }
    let mut prev = vec![c(0.0, 0.0); n + 1];
    let mut cur: Vec<C64> = s.to_vec();
    let mut best = s[n - 1];
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d.norm() < 1e-300 {
                return cur[i + 1];
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        prev = cur;
        cur = next;
        k += 1;
        if k % 2 == 0 {
            best = *cur.last().unwrap();
        }
    }
    best
}

/// ∫ e^{−ixξ} σ(ξ, μ) dξ from half-period panels and ε-acceleration.
pub fn fourier_numeric(sym: &HomSymbol, x: f64, mu: &[f64], tol: f64) -> CMatrix {
    let size = sym.size;
    let ax = x.abs();
    let sgn = if x < 0.0 { -1.0 } else { 1.0 };
    // F(x) = ∫₀^∞ e(ξ) cos(xξ) dξ − i sign(x) ∫₀^∞ o(ξ) sin(|x|ξ) dξ
    let integrand = |xi: f64| -> Vec<C64> {
        let p = sym.eval(xi, mu);
        let m = sym.eval(-xi, mu);
        let (cs, sn) = ((ax * xi).cos(), (ax * xi).sin());
        p.iter()
            .zip(m.iter())
            .map(|(a, b)| (a + b) * cs - (a - b) * I * (sgn * sn))
            .collect()
    };
    let half = PI / ax.max(1e-12);
    let panels = 32;
    let mut partial: Vec<Vec<C64>> = Vec::with_capacity(panels);
    let mut acc = vec![c(0.0, 0.0); size * size];
    for j in 0..panels {
        let q = adaptive(&integrand, j as f64 * half, (j + 1) as f64 * half, tol);
        for (a, v) in acc.iter_mut().zip(&q.value) {
            *a += v;
        }
        partial.push(acc.clone());
    }
    let mut out = zeros(size, size);
    for idx in 0..size * size {
        let seq: Vec<C64> = partial.iter().map(|p| p[idx]).collect();
        out[(idx % size, idx / size)] = wynn_epsilon(&seq);
    }
    out
}

/// Principal symbol of L∘K for L: interior → boundary and K: boundary →
/// interior, at boundary covector μ.
pub fn compose_lk(sigma_l: &HomSymbol, sigma_k: &HomSymbol, mu: &[f64], method: Method) -> Result<Composition> {
    for s in [sigma_l, sigma_k] {
        if s.degree > -1.0 {
            return Err(LabError::Divergent(format!("symbol degree {} above −1", s.degree)));
        }
        if s.n != mu.len() {
            return Err(LabError::DimensionMismatch { expected: s.n, got: mu.len() });
        }
    }
    if sigma_l.size != sigma_k.size {
        return Err(LabError::DimensionMismatch { expected: sigma_l.size, got: sigma_k.size });
    }
    if norm(mu) == 0.0 {
        return Err(LabError::ZeroCovector);
    }
    let size = sigma_k.size;
    let (fl, fk): (Box<dyn Fn(f64) -> CMatrix + '_>, Box<dyn Fn(f64) -> CMatrix + '_>) = match method {
        Method::ClosedForm => {
            let (Some(a), Some(b)) = (&sigma_l.closed_form_ft, &sigma_k.closed_form_ft) else {
                return Err(LabError::InvalidParameter("closed-form transform unavailable".into()));
            };
            (Box::new(move |x| a(x, mu)), Box::new(move |x| b(x, mu)))
        }
        Method::Quadrature => {
            let tol = 1e-11;
            (
                Box::new(move |x| fourier_numeric(sigma_l, x, mu, tol)),
                Box::new(move |x| fourier_numeric(sigma_k, x, mu, tol)),
            )
        }
    };
    let integrand = |x: f64| -> Vec<C64> {
        let l = fl(-x);
        let k = fk(x);
        let mut v: Vec<C64> = (&l * &k).iter().copied().collect();
        v.extend((&k * &l).iter().copied());
        v
    };
    let tol = match method {
        Method::ClosedForm => 1e-13,
        Method::Quadrature => 1e-9,
    };
    let q = adaptive_half_line(&integrand, 0.0, tol);
    let scale = 1.0 / (4.0 * PI * PI);
    let value = CMatrix::from_iterator(size, size, q.value[..size * size].iter().map(|z| z * scale));
    let opposite_order = CMatrix::from_iterator(size, size, q.value[size * size..].iter().map(|z| z * scale));
    Ok(Composition { value, opposite_order, error_estimate: q.error * scale, method })
}

/// ¼|μ|⁻¹(Id + i·cl(ν)cl(μ̂)).
pub fn composition_target(rep: &CliffordRep, mu: &[f64]) -> Result<CMatrix> {
    check_rep(rep, mu)?;
    let m = norm(mu);
    if m == 0.0 {
        return Err(LabError::ZeroCovector);
    }
    let a = rep.cl_nu() * cl_tangent(rep, mu) * (I / m);
    Ok((rep.identity() + a) * c(0.25 / m, 0.0))
}

/// C(λ) = 2^{−2λ} Γ(½ − λ)/Γ(½ + λ).
pub fn scattering_constant(lambda: C64) -> Result<C64> {
    if lambda.im == 0.0 && is_gamma_pole(0.5 - lambda.re, 1e-12) {
        return Err(LabError::Pole(format!("Γ(½ − λ) at λ = {}", lambda.re)));
    }
    let a = C64::new(0.5, 0.0) - lambda;
    let b = C64::new(0.5, 0.0) + lambda;
    let num = gamma_complex(a);
    let den = if b.im == 0.0 && is_gamma_pole(b.re, 1e-12) {
        return Ok(c(0.0, 0.0));
    } else {
        gamma_complex(b)
    };
    Ok((lambda * (-2.0 * std::f64::consts::LN_2)).exp() * num / den)
}

/// i·cl(ν)cl(ξ)|ξ|^{2λ−1}.
pub fn scattering_symbol_normalized(rep: &CliffordRep, lambda: C64, xi: &[f64]) -> Result<CMatrix> {
    check_rep(rep, xi)?;
    let r = norm(xi);
    if r == 0.0 {
        return Err(LabError::ZeroCovector);
    }
    let p = (lambda * 2.0 - 1.0) * r.ln();
    Ok(rep.cl_nu() * cl_tangent(rep, xi) * (I * p.exp()))
}

/// i·C(λ)·cl(ν)cl(ξ)|ξ|^{2λ−1}.
pub fn scattering_symbol(rep: &CliffordRep, lambda: C64, xi: &[f64]) -> Result<CMatrix> {
    let k = scattering_constant(lambda)?;
    Ok(scattering_symbol_normalized(rep, lambda, xi)? * k)
}

/// Symbol of L₀ = −cl(ν)·S̃(½).
pub fn l0_symbol(rep: &CliffordRep, xi: &[f64]) -> Result<CMatrix> {
    Ok(-(rep.cl_nu() * scattering_symbol_normalized(rep, c(0.5, 0.0), xi)?))
}

/// ½(Id + i·cl(ν)cl(ξ̂)).
pub fn calderon_symbol(rep: &CliffordRep, xi: &[f64]) -> Result<CMatrix> {
    check_rep(rep, xi)?;
    let r = norm(xi);
    if r == 0.0 {
        return Err(LabError::ZeroCovector);
    }
    let a = rep.cl_nu() * cl_tangent(rep, xi) * (I / r);
    Ok((rep.identity() + a) * c(0.5, 0.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct Moment {
    pub alpha: Vec<u32>,
    /// Largest entry modulus of the matrix-valued moment.
    pub magnitude: f64,
    pub value: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub j: u32,
    pub sphere_dim: usize,
    pub moments: Vec<Moment>,
    /// Difference between two quadrature orders.
    pub accuracy: f64,
}

impl MomentReport {
    pub fn log_free(&self, tol: f64) -> bool {
        self.moments.iter().all(|m| m.magnitude <= tol)
    }
}

fn multi_indices(dim: usize, total: u32) -> Vec<Vec<u32>> {
    if dim == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in multi_indices(dim - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Nodes and weights on S^{D−1} ⊂ ℝ^D in hyperspherical angles.
pub fn sphere_rule(dim: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
    if dim == 1 {
        return vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)];
    }
    let nphi = 2 * order;
    let mut pts: Vec<(Vec<f64>, f64)> = (0..nphi)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / nphi as f64;
            (vec![phi.cos(), phi.sin()], 2.0 * PI / nphi as f64)
        })
        .collect();
    let theta = gl_rule_on(order, 0.0, PI);
    // add polar angles one at a time: ω = (cos θ, sin θ · ω')
    for extra in 0..dim - 2 {
        let power = extra as i32 + 1;
        let mut next = Vec::with_capacity(pts.len() * theta.len());
        for &(t, w) in &theta {
            let (ct, st) = (t.cos(), t.sin());
            for (p, pw) in &pts {
                let mut q = Vec::with_capacity(p.len() + 1);
                q.push(ct);
                q.extend(p.iter().map(|x| x * st));
                next.push((q, pw * w * st.powi(power)));
            }
        }
        pts = next;
    }
    pts
}

/// ∫_{S^n} a(ω) ω^α dω for all |α| = j, with a of degree −(n+1)−j on ℝ^{1+n}.
pub fn log_free_moments(a: &HomSymbol, j: u32) -> Result<MomentReport> {
    let dim = a.n + 1;
    let want = -(dim as f64) - j as f64;
    if (a.degree - want).abs() > 1e-12 {
        return Err(LabError::InvalidParameter(format!(
            "degree {} does not match −{dim}−{j}",
            a.degree
        )));
    }
    let order = 16 + 2 * j as usize;
    let run = |order: usize| -> Vec<CMatrix> {
        let rule = sphere_rule(dim, order);
        let alphas = multi_indices(dim, j);
        alphas
            .iter()
            .map(|alpha| {
                let mut s = zeros(a.size, a.size);
                for (w, wt) in &rule {
                    let mono: f64 = w.iter().zip(alpha).map(|(x, &e)| x.powi(e as i32)).product();
                    s += a.eval(w[0], &w[1..]) * c(wt * mono, 0.0);
                }
                s
            })
            .collect()
    };
    let lo = run(order);
    let hi = run(order + 8);
    let accuracy = lo.iter().zip(&hi).map(|(x, y)| max_abs(&(x - y))).fold(0.0, f64::max);
    let moments = multi_indices(dim, j)
        .into_iter()
        .zip(hi)
        .map(|(alpha, m)| Moment {
            alpha,
            magnitude: max_abs(&m),
            value: m.iter().map(|z| [z.re, z.im]).collect(),
        })
        .collect();
    Ok(MomentReport { j, sphere_dim: dim - 1, moments, accuracy })
}

/// (ζ₀ + cl(ν)cl(ζ'))|ζ|^{−n−2}: leading interior term of the Poisson kernel
/// symbol, of degree −(n+1) on ℝ^{1+n}.
pub fn poisson_leading_term(rep: &CliffordRep) -> HomSymbol {
    let r = rep.clone();
    let n = rep.dim - 1;
    HomSymbol {
        degree: -(n as f64) - 1.0,
        n,
        size: rep.rank,
        value: Arc::new(move |xi, mu| {
            let rho = (xi * xi + mu.iter().map(|m| m * m).sum::<f64>()).sqrt();
            (r.identity() * c(xi, 0.0) + r.cl_nu() * cl_tangent(&r, mu)) * c(rho.powi(-(n as i32) - 2), 0.0)
        }),
        closed_form_ft: None,
    }
}

/// |ζ|^{−D}: restricts to 1 on the sphere.
pub fn radial_symbol(n: usize, size: usize) -> HomSymbol {
    let d = (n + 1) as f64;
    HomSymbol {
        degree: -d,
        n,
        size,
        value: Arc::new(move |xi, mu| {
            let rho = (xi * xi + mu.iter().map(|m| m * m).sum::<f64>()).sqrt();
            identity(size) * c(rho.powf(-d), 0.0)
        }),
        closed_form_ft: None,
    }
}
