//! Conformal factors ω on the torus and the curvature of e^{2ω}·flat.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::grid::{Field, TorusGrid};
use crate::error::{LabError, Result};
use crate::linalg::{c, C64};

/// Real trigonometric polynomial ω(x) = Σ ω̂_k e^{ik·x}.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalFactor {
    pub n: usize,
    pub coeffs: BTreeMap<Vec<i64>, C64>,
}

impl ConformalFactor {
    pub fn zero(n: usize) -> Self {
        ConformalFactor { n, coeffs: BTreeMap::new() }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        let mut f = Self::zero(n);
        f.coeffs.insert(vec![0; n], c(value, 0.0));
        f
    }

    fn add_coeff(&mut self, k: Vec<i64>, v: C64) {
        *self.coeffs.entry(k).or_insert(c(0.0, 0.0)) += v;
    }

    /// Adds a·cos(k·x).
    pub fn with_cos(mut self, a: f64, k: &[i64]) -> Self {
        let neg: Vec<i64> = k.iter().map(|x| -x).collect();
        if k.iter().all(|&x| x == 0) {
            self.add_coeff(k.to_vec(), c(a, 0.0));
        } else {
            self.add_coeff(k.to_vec(), c(a / 2.0, 0.0));
            self.add_coeff(neg, c(a / 2.0, 0.0));
        }
        self
    }

    /// Adds a·sin(k·x).
    pub fn with_sin(mut self, a: f64, k: &[i64]) -> Self {
        let neg: Vec<i64> = k.iter().map(|x| -x).collect();
        self.add_coeff(k.to_vec(), c(0.0, -a / 2.0));
        self.add_coeff(neg, c(0.0, a / 2.0));
        self
    }

    /// Random real polynomial with modes ‖k‖∞ ≤ band and Σ|ω̂_k| = amplitude,
    /// so that sup|ω| ≤ amplitude.
    pub fn random(n: usize, band: usize, amplitude: f64, rng: &mut ChaCha8Rng) -> Self {
        let b = band as i64;
        let mut f = Self::zero(n);
        let mut ks = vec![-b; n];
        loop {
            let neg: Vec<i64> = ks.iter().map(|x| -x).collect();
            if ks > neg {
                let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                f.coeffs.insert(ks.clone(), v);
                f.coeffs.insert(neg, v.conj());
            }
            let mut d = n;
            loop {
                if d == 0 {
                    let total: f64 = f.coeffs.values().map(|v| v.norm()).sum();
                    if total > 0.0 {
                        let s = amplitude / total;
                        f.coeffs.values_mut().for_each(|v| *v *= s);
                    }
                    return f;
                }
                d -= 1;
                if ks[d] < b {
                    ks[d] += 1;
                    break;
                }
                ks[d] = -b;
            }
        }
    }

    pub fn band(&self) -> usize {
        self.coeffs
            .iter()
            .filter(|(_, v)| v.norm() > 0.0)
            .flat_map(|(k, _)| k.iter().map(|x| x.unsigned_abs() as usize))
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|v| v.norm() == 0.0)
    }

    /// Largest deviation from Hermitian coefficient symmetry.
    pub fn reality_defect(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, v)| {
                let neg: Vec<i64> = k.iter().map(|x| -x).collect();
                let w = self.coeffs.get(&neg).copied().unwrap_or(c(0.0, 0.0));
                (v - w.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, v)| {
                let phase: f64 = k.iter().zip(x).map(|(a, b)| *a as f64 * b).sum();
                (v * C64::from_polar(1.0, phase)).re
            })
            .sum()
    }

    /// Spectral field on `grid`; requires band ≤ m/8.
    pub fn field(&self, grid: &TorusGrid) -> Result<Field> {
        if grid.n != self.n {
            return Err(LabError::DimensionMismatch { expected: grid.n, got: self.n });
        }
        if self.band() > grid.m / 8 {
            return Err(LabError::InvalidParameter(format!(
                "band {} exceeds m/8 = {}",
                self.band(),
                grid.m / 8
            )));
        }
        if self.reality_defect() > 1e-14 {
            return Err(LabError::InvalidParameter("conformal factor is not real".into()));
        }
        let mut f = grid.zeros();
        for (k, v) in &self.coeffs {
            let idx = grid.index_of(k).expect("band checked");
            f[idx] += *v;
        }
        Ok(f)
    }
}

/// Ricci, scalar and Schouten tensors of e^{2ω}·flat in the orthonormal frame
/// e^{−ω}∂_j, sampled on the padded grid.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub n: usize,
    pub ric: Vec<Vec<Vec<f64>>>,
    pub scal: Vec<f64>,
    pub schouten: Option<Vec<Vec<Vec<f64>>>>,
}

impl CurvatureData {
    pub fn max_abs(&self) -> f64 {
        let r = self.ric.iter().flatten().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
        self.scal.iter().fold(r, |a, b| a.max(b.abs()))
    }

    /// max |tr P − scal/(2(n−1))|.
    pub fn trace_residual(&self) -> Option<f64> {
        let p = self.schouten.as_ref()?;
        let n = self.n;
        let mut worst: f64 = 0.0;
        for (i, s) in self.scal.iter().enumerate() {
            let tr: f64 = (0..n).map(|a| p[a][a][i]).sum();
            worst = worst.max((tr - s / (2.0 * (n as f64 - 1.0))).abs());
        }
        Some(worst)
    }

    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for (x, y) in self.ric[a][b].iter().zip(&self.ric[b][a]) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
        worst
    }
}

/// ω and its derivatives on the padded grid, with the derived curvature.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub grid: TorusGrid,
    pub flat: bool,
    pub omega: Field,
    pub w: Vec<f64>,
    pub dw: Vec<Vec<f64>>,
    pub ddw: Vec<Vec<Vec<f64>>>,
    /// ∂_a Δω.
    pub dlap: Vec<Vec<f64>>,
    pub curvature: CurvatureData,
    /// ∂_a scal.
    pub dscal: Vec<Vec<f64>>,
    pub tail: f64,
    exp_cache: Vec<(f64, Vec<f64>)>,
}

pub const DEFAULT_ALIAS_BUDGET: f64 = 1e-10;

fn real_padded(grid: &TorusGrid, f: &Field) -> Vec<f64> {
    grid.to_padded(f).iter().map(|v| v.re).collect()
}

impl Geometry {
    pub fn new(grid: &TorusGrid, omega: &ConformalFactor, budget: f64) -> Result<Self> {
        let n = grid.n;
        let spec = omega.field(grid)?;
        let flat = omega.is_zero();
        let d1: Vec<Field> = (0..n).map(|a| grid.deriv(&spec, a)).collect();
        let d2: Vec<Vec<Field>> = d1.iter().map(|f| (0..n).map(|b| grid.deriv(f, b)).collect()).collect();
        let mut lap = grid.zeros();
        for (a, row) in d2.iter().enumerate() {
            for (l, v) in lap.iter_mut().zip(&row[a]) {
                *l += v;
            }
        }
        let w = real_padded(grid, &spec);
        let dw: Vec<Vec<f64>> = d1.iter().map(|f| real_padded(grid, f)).collect();
        let ddw: Vec<Vec<Vec<f64>>> = d2.iter().map(|r| r.iter().map(|f| real_padded(grid, f)).collect()).collect();
        let dlap: Vec<Vec<f64>> = (0..n).map(|a| real_padded(grid, &grid.deriv(&lap, a))).collect();

        let top = (n as f64 + 3.0) / 2.0;
        let tail = if flat {
            0.0
        } else {
            let lo = grid.tail_ratio(w.iter().map(|v| c((-top * v).exp(), 0.0)).collect());
            let hi = grid.tail_ratio(w.iter().map(|v| c((top * v).exp(), 0.0)).collect());
            lo.max(hi)
        };
        if tail > budget {
            return Err(LabError::Aliasing { tail, budget });
        }

        let len = w.len();
        let nf = n as f64;
        let mut ric = vec![vec![vec![0.0; len]; n]; n];
        let mut scal = vec![0.0; len];
        let mut dscal = vec![vec![0.0; len]; n];
        for i in 0..len {
            let e2 = (-2.0 * w[i]).exp();
            let lapv: f64 = (0..n).map(|a| ddw[a][a][i]).sum();
            let grad2: f64 = (0..n).map(|a| dw[a][i] * dw[a][i]).sum();
            for a in 0..n {
                for b in 0..n {
                    let mut v = -(nf - 2.0) * (ddw[a][b][i] - dw[a][i] * dw[b][i]);
                    if a == b {
                        v -= lapv + (nf - 2.0) * grad2;
                    }
                    ric[a][b][i] = e2 * v;
                }
            }
            scal[i] = e2 * (-2.0 * (nf - 1.0) * lapv - (nf - 1.0) * (nf - 2.0) * grad2);
            for a in 0..n {
                let dgrad2: f64 = (0..n).map(|b| 2.0 * dw[b][i] * ddw[a][b][i]).sum();
                dscal[a][i] = -2.0 * dw[a][i] * scal[i]
                    + e2 * (-2.0 * (nf - 1.0) * dlap[a][i] - (nf - 1.0) * (nf - 2.0) * dgrad2);
            }
        }
        let schouten = (n >= 3).then(|| {
            let mut p = ric.clone();
            for (a, row) in p.iter_mut().enumerate() {
                for (b, f) in row.iter_mut().enumerate() {
                    for (i, v) in f.iter_mut().enumerate() {
                        let mut x = *v;
                        if a == b {
                            x -= scal[i] / (2.0 * (nf - 1.0));
                        }
                        *v = x / (nf - 2.0);
                    }
                }
            }
            p
        });
        let exp_cache = [-1.0, (nf - 1.0) / 2.0, -(nf + 1.0) / 2.0, (nf - 3.0) / 2.0, -(nf + 3.0) / 2.0, nf]
            .into_iter()
            .map(|s| (s, w.iter().map(|v| (s * v).exp()).collect()))
            .collect();
        Ok(Geometry {
            grid: grid.clone(),
            flat,
            omega: spec,
            w,
            dw,
            ddw,
            dlap,
            curvature: CurvatureData { n, ric, scal, schouten },
            dscal,
            tail,
            exp_cache,
        })
    }

    /// e^{sω} on the padded grid.
    pub fn exp(&self, s: f64) -> std::borrow::Cow<'_, [f64]> {
        match self.exp_cache.iter().find(|(t, _)| *t == s) {
            Some((_, v)) => std::borrow::Cow::Borrowed(v),
            None => std::borrow::Cow::Owned(self.w.iter().map(|v| (s * v).exp()).collect()),
        }
    }

    /// Same geometry with Ric, scal, P and d scal negated: the opposite sign
    /// convention, kept to show that it breaks covariance.
    pub fn with_flipped_curvature(&self) -> Geometry {
        let mut g = self.clone();
        let neg = |v: &mut Vec<f64>| v.iter_mut().for_each(|x| *x = -*x);
        g.curvature.ric.iter_mut().flatten().for_each(neg);
        neg(&mut g.curvature.scal);
        if let Some(p) = g.curvature.schouten.as_mut() {
            p.iter_mut().flatten().for_each(neg);
        }
        g.dscal.iter_mut().for_each(neg);
        g
    }

    /// First variation of scal in the direction δω, on the padded grid.
    pub fn scal_variation(&self, delta: &ConformalFactor) -> Result<Vec<f64>> {
        let grid = &self.grid;
        let n = grid.n;
        let nf = n as f64;
        let spec = delta.field(grid)?;
        let d1: Vec<Field> = (0..n).map(|a| grid.deriv(&spec, a)).collect();
        let mut lap = grid.zeros();
        for (a, f) in d1.iter().enumerate() {
            for (l, v) in lap.iter_mut().zip(grid.deriv(f, a)) {
                *l += v;
            }
        }
        let dv = real_padded(grid, &spec);
        let dd: Vec<Vec<f64>> = d1.iter().map(|f| real_padded(grid, f)).collect();
        let dl = real_padded(grid, &lap);
        Ok((0..self.w.len())
            .map(|i| {
                let e2 = (-2.0 * self.w[i]).exp();
                let cross: f64 = (0..n).map(|a| self.dw[a][i] * dd[a][i]).sum();
                -2.0 * dv[i] * self.curvature.scal[i]
                    + e2 * (-2.0 * (nf - 1.0) * dl[i] - 2.0 * (nf - 1.0) * (nf - 2.0) * cross)
            })
            .collect())
    }
}

/// Curvature of e^{2ω}·flat on the padded grid of `grid`.
pub fn curvature_conformally_flat(omega: &ConformalFactor, grid: &TorusGrid) -> Result<CurvatureData> {
    Ok(Geometry::new(grid, omega, DEFAULT_ALIAS_BUDGET)?.curvature)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn random_factor_is_real_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = ConformalFactor::random(3, 2, 0.2, &mut rng);
        assert!(f.reality_defect() < 1e-15);
        assert_eq!(f.band(), 2);
        let total: f64 = f.coeffs.values().map(|v| v.norm()).sum();
        assert!((total - 0.2).abs() < 1e-14);
        assert!(f.eval(&[0.3, 1.0, 2.0]).abs() <= 0.2);
    }

    #[test]
    fn band_headroom_enforced() {
        let g = TorusGrid::new(3, 8).unwrap();
        let f = ConformalFactor::zero(3).with_cos(0.1, &[2, 0, 0]);
        assert!(f.field(&g).is_err());
    }

    #[test]
    fn flat_and_constant_factors_have_no_curvature() {
        let g = TorusGrid::new(3, 8).unwrap();
        for f in [ConformalFactor::zero(3), ConformalFactor::constant(3, 0.7)] {
            let k = curvature_conformally_flat(&f, &g).unwrap();
            assert!(k.max_abs() < 1e-14);
        }
    }

    #[test]
    fn trace_and_symmetry() {
        let g = TorusGrid::new(3, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = ConformalFactor::random(3, 2, 0.2, &mut rng);
        let k = curvature_conformally_flat(&f, &g).unwrap();
        assert!(k.trace_residual().unwrap() < 1e-10);
        assert!(k.symmetry_residual() < 1e-14);
        assert!(curvature_conformally_flat(&ConformalFactor::zero(2), &TorusGrid::new(2, 8).unwrap())
            .unwrap()
            .schouten
            .is_none());
    }

    #[test]
    fn scal_variation_matches_central_difference() {
        let g = TorusGrid::new(3, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let base = ConformalFactor::random(3, 2, 0.2, &mut rng);
        let dir = ConformalFactor::random(3, 1, 1.0, &mut rng);
        let geo = Geometry::new(&g, &base, 1e-6).unwrap();
        let var = geo.scal_variation(&dir).unwrap();
        let h = 1e-4;
        let shifted = |t: f64| {
            let mut f = base.clone();
            for (k, v) in &dir.coeffs {
                *f.coeffs.entry(k.clone()).or_insert(c(0.0, 0.0)) += v * t;
            }
            curvature_conformally_flat(&f, &g).unwrap().scal
        };
        let (p, m) = (shifted(h), shifted(-h));
        let scale = var.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let err = var
            .iter()
            .zip(p.iter().zip(&m))
            .map(|(v, (a, b))| (v - (a - b) / (2.0 * h)).abs())
            .fold(0.0, f64::max);
        assert!(err / scale < 1e-5, "{}", err / scale);
    }

    #[test]
    fn aliasing_budget_detected() {
        let g = TorusGrid::new(1, 8).unwrap();
        let f = ConformalFactor::zero(1).with_cos(1.5, &[1]);
        assert!(matches!(Geometry::new(&g, &f, 1e-10), Err(LabError::Aliasing { .. })));
    }
}
