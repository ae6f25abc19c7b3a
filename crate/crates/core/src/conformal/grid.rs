//! Periodic grids on the n-torus [0, 2π)ⁿ with FFT-based spectral calculus.
//!
//! Fields are stored as Fourier coefficients f̂_k with f(x) = Σ f̂_k e^{ik·x},
//! k ranging over (−m/2, m/2]ⁿ. Pointwise products are formed on a padded
//! grid of size 3m/2 per axis and truncated back.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{LabError, Result};
use crate::linalg::{c, CMatrix, C64};

pub type Field = Vec<C64>;

#[derive(Clone)]
pub struct TorusGrid {
    pub n: usize,
    pub m: usize,
    pub padded: usize,
    fwd_m: Arc<dyn Fft<f64>>,
    inv_m: Arc<dyn Fft<f64>>,
    fwd_p: Arc<dyn Fft<f64>>,
    inv_p: Arc<dyn Fft<f64>>,
    pad_map: Vec<usize>,
    wavenumbers: Vec<Vec<i64>>,
}

impl std::fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TorusGrid(n={}, m={}, padded={})", self.n, self.m, self.padded)
    }
}

/// Centered wavenumber of FFT index i on an s-point axis.
pub fn wavenumber(i: usize, s: usize) -> i64 {
    if i <= s / 2 {
        i as i64
    } else {
        i as i64 - s as i64
    }
}

fn fft_nd(data: &mut [C64], s: usize, n: usize, plan: &Arc<dyn Fft<f64>>) {
    let total = data.len();
    let mut line = vec![c(0.0, 0.0); s];
    let mut scratch = vec![c(0.0, 0.0); plan.get_inplace_scratch_len()];
    for axis in 0..n {
        let stride = s.pow((n - 1 - axis) as u32);
        if stride == 1 {
            plan.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = stride * s;
        for start in (0..total).step_by(block) {
            for off in 0..stride {
                let base = start + off;
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + j * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
    }
}

impl TorusGrid {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if !(1..=4).contains(&n) {
            return Err(LabError::InvalidDimension(format!("torus dimension {n} not in 1..=4")));
        }
        if m < 4 || !m.is_power_of_two() {
            return Err(LabError::InvalidParameter(format!("resolution {m} must be a power of two ≥ 4")));
        }
        let padded = 3 * m / 2;
        let mut planner = FftPlanner::new();
        let total = m.pow(n as u32);
        let mut pad_map = Vec::with_capacity(total);
        let mut wavenumbers = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rest = idx;
            let mut ks = vec![0i64; n];
            for d in (0..n).rev() {
                ks[d] = wavenumber(rest % m, m);
                rest /= m;
            }
            let mut p = 0usize;
            for &k in &ks {
                p = p * padded + k.rem_euclid(padded as i64) as usize;
            }
            pad_map.push(p);
            wavenumbers.push(ks);
        }
        Ok(TorusGrid {
            n,
            m,
            padded,
            fwd_m: planner.plan_fft_forward(m),
            inv_m: planner.plan_fft_inverse(m),
            fwd_p: planner.plan_fft_forward(padded),
            inv_p: planner.plan_fft_inverse(padded),
            pad_map,
            wavenumbers,
        })
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn padded_len(&self) -> usize {
        self.padded.pow(self.n as u32)
    }

    pub fn k(&self, idx: usize) -> &[i64] {
        &self.wavenumbers[idx]
    }

    pub fn zeros(&self) -> Field {
        vec![c(0.0, 0.0); self.len()]
    }

    /// Index of the coefficient with wavenumber `ks`, if representable.
    pub fn index_of(&self, ks: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for &k in ks {
            if k <= -(self.m as i64) / 2 || k > self.m as i64 / 2 {
                return None;
            }
            idx = idx * self.m + k.rem_euclid(self.m as i64) as usize;
        }
        Some(idx)
    }

    /// ∂_j as the multiplier i k_j; the Nyquist plane is sent to zero.
    pub fn deriv(&self, f: &Field, j: usize) -> Field {
        let half = self.m as i64 / 2;
        f.iter()
            .zip(&self.wavenumbers)
            .map(|(v, ks)| if ks[j] == half { c(0.0, 0.0) } else { v * c(0.0, ks[j] as f64) })
            .collect()
    }

    /// Values on the padded grid.
    pub fn to_padded(&self, f: &Field) -> Vec<C64> {
        let mut out = vec![c(0.0, 0.0); self.padded_len()];
        for (v, &p) in f.iter().zip(&self.pad_map) {
            out[p] = *v;
        }
        fft_nd(&mut out, self.padded, self.n, &self.inv_p);
        out
    }

    /// Full spectrum (all padded wavenumbers) of padded-grid values.
    pub fn padded_spectrum(&self, mut vals: Vec<C64>) -> Vec<C64> {
        fft_nd(&mut vals, self.padded, self.n, &self.fwd_p);
        let scale = 1.0 / self.padded_len() as f64;
        vals.iter_mut().for_each(|v| *v *= scale);
        vals
    }

    /// Projection of padded-grid values back onto the m-grid modes.
    pub fn from_padded(&self, vals: Vec<C64>) -> Field {
        let spec = self.padded_spectrum(vals);
        self.pad_map.iter().map(|&p| spec[p]).collect()
    }

    /// Values on the m-point grid (no padding).
    pub fn to_physical(&self, f: &Field) -> Vec<C64> {
        let mut out = f.clone();
        fft_nd(&mut out, self.m, self.n, &self.inv_m);
        out
    }

    pub fn from_physical(&self, mut vals: Vec<C64>) -> Field {
        fft_nd(&mut vals, self.m, self.n, &self.fwd_m);
        let scale = 1.0 / self.len() as f64;
        vals.iter_mut().for_each(|v| *v *= scale);
        vals
    }

    /// Grid coordinates of flat index `idx` on an s-point grid.
    pub fn point(&self, idx: usize, s: usize) -> Vec<f64> {
        let mut rest = idx;
        let mut x = vec![0.0; self.n];
        for d in (0..self.n).rev() {
            x[d] = 2.0 * PI * (rest % s) as f64 / s as f64;
            rest /= s;
        }
        x
    }

    /// Largest coefficient modulus outside the retained modes, relative to
    /// the largest retained one.
    pub fn tail_ratio(&self, vals: Vec<C64>) -> f64 {
        let spec = self.padded_spectrum(vals);
        let half = self.m as i64 / 2;
        let mut inside: f64 = 0.0;
        let mut outside: f64 = 0.0;
        for (idx, v) in spec.iter().enumerate() {
            let mut rest = idx;
            let mut out = false;
            for _ in 0..self.n {
                let k = wavenumber(rest % self.padded, self.padded);
                rest /= self.padded;
                if k <= -half || k > half {
                    out = true;
                }
            }
            if out {
                outside = outside.max(v.norm());
            } else {
                inside = inside.max(v.norm());
            }
        }
        outside / inside.max(1e-300)
    }

    /// Flat L² inner product ∫ f ḡ dx = (2π)ⁿ Σ f̂ conj(ĝ).
    pub fn inner(&self, f: &Field, g: &Field) -> C64 {
        let vol = (2.0 * PI).powi(self.n as i32);
        f.iter().zip(g).map(|(a, b)| a * b.conj()).sum::<C64>() * vol
    }

    /// ∫ f ḡ w dx for a weight given on the padded grid.
    pub fn weighted_inner(&self, f: &Field, g: &Field, w: &[f64]) -> C64 {
        let fp = self.to_padded(f);
        let gp = self.to_padded(g);
        let cell = (2.0 * PI / self.padded as f64).powi(self.n as i32);
        fp.iter().zip(&gp).zip(w).map(|((a, b), w)| a * b.conj() * *w).sum::<C64>() * cell
    }
}

/// Spinor-valued field: one spectral field per component.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub comps: Vec<Field>,
}

impl SpinorField {
    pub fn zeros(grid: &TorusGrid, rank: usize) -> Self {
        SpinorField { comps: vec![grid.zeros(); rank] }
    }

    pub fn rank(&self) -> usize {
        self.comps.len()
    }

    /// Constant spinor v.
    pub fn constant(grid: &TorusGrid, v: &[C64]) -> Self {
        let mut s = SpinorField::zeros(grid, v.len());
        for (f, x) in s.comps.iter_mut().zip(v) {
            f[0] = *x;
        }
        s
    }

    /// e^{ik·x} v.
    pub fn mode(grid: &TorusGrid, ks: &[i64], v: &[C64]) -> Result<Self> {
        let idx = grid
            .index_of(ks)
            .ok_or_else(|| LabError::InvalidParameter(format!("wavenumber {ks:?} not on the grid")))?;
        let mut s = SpinorField::zeros(grid, v.len());
        for (f, x) in s.comps.iter_mut().zip(v) {
            f[idx] = *x;
        }
        Ok(s)
    }

    pub fn apply(&self, mat: &CMatrix) -> SpinorField {
        let r = self.rank();
        let len = self.comps[0].len();
        let mut out = vec![vec![c(0.0, 0.0); len]; r];
        for i in 0..r {
            for j in 0..r {
                let a = mat[(i, j)];
                if a.norm() == 0.0 {
                    continue;
                }
                for (o, v) in out[i].iter_mut().zip(&self.comps[j]) {
                    *o += a * v;
                }
            }
        }
        SpinorField { comps: out }
    }

    pub fn scale(&self, a: C64) -> SpinorField {
        SpinorField { comps: self.comps.iter().map(|f| f.iter().map(|v| v * a).collect()).collect() }
    }

    pub fn add(&self, o: &SpinorField) -> SpinorField {
        SpinorField {
            comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect()).collect(),
        }
    }

    pub fn sub(&self, o: &SpinorField) -> SpinorField {
        self.add(&o.scale(c(-1.0, 0.0)))
    }

    pub fn deriv(&self, grid: &TorusGrid, j: usize) -> SpinorField {
        SpinorField { comps: self.comps.iter().map(|f| grid.deriv(f, j)).collect() }
    }

    pub fn norm(&self, grid: &TorusGrid) -> f64 {
        self.comps.iter().map(|f| grid.inner(f, f).re).sum::<f64>().sqrt()
    }

    pub fn inner(&self, grid: &TorusGrid, o: &SpinorField) -> C64 {
        self.comps.iter().zip(&o.comps).map(|(a, b)| grid.inner(a, b)).sum()
    }

    pub fn weighted_inner(&self, grid: &TorusGrid, o: &SpinorField, w: &[f64]) -> C64 {
        self.comps.iter().zip(&o.comps).map(|(a, b)| grid.weighted_inner(a, b, w)).sum()
    }

    pub fn to_padded(&self, grid: &TorusGrid) -> Vec<Vec<C64>> {
        self.comps.iter().map(|f| grid.to_padded(f)).collect()
    }

    pub fn from_padded(grid: &TorusGrid, vals: Vec<Vec<C64>>) -> SpinorField {
        SpinorField { comps: vals.into_iter().map(|v| grid.from_padded(v)).collect() }
    }
}
