//! Gauss–Legendre rules and a bisection-adaptive integrator for vector
//! valued integrands.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::linalg::C64;

const PANEL_ORDER: usize = 15;
const MAX_DEPTH: u32 = 40;

/// Nodes and weights on [−1, 1].
pub fn gl_rule(order: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(order.max(1)).unwrap());
    rule.as_node_weight_pairs().to_vec()
}

/// Nodes and weights mapped to [a, b].
pub fn gl_rule_on(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let h = 0.5 * (b - a);
    let m = 0.5 * (b + a);
    gl_rule(order).into_iter().map(|(x, w)| (m + h * x, h * w)).collect()
}

pub fn gl_integrate(order: usize, a: f64, b: f64, f: impl FnMut(f64) -> f64) -> f64 {
    GaussLegendre::new(NonZeroUsize::new(order.max(1)).unwrap()).integrate(a, b, f)
}

#[derive(Debug, Clone)]
pub struct Quad {
    pub value: Vec<C64>,
    pub error: f64,
    pub evaluations: usize,
}

struct Adaptive<'a> {
    f: &'a dyn Fn(f64) -> Vec<C64>,
    rule: Vec<(f64, f64)>,
    evals: usize,
}

impl Adaptive<'_> {
    fn panel(&mut self, a: f64, b: f64) -> Vec<C64> {
        let h = 0.5 * (b - a);
        let m = 0.5 * (b + a);
        let mut acc: Vec<C64> = Vec::new();
        for &(x, w) in &self.rule {
            let v = (self.f)(m + h * x);
            if acc.is_empty() {
                acc = vec![C64::new(0.0, 0.0); v.len()];
            }
            for (s, y) in acc.iter_mut().zip(&v) {
                *s += y * (w * h);
            }
        }
        self.evals += self.rule.len();
        acc
    }

    fn run(&mut self, a: f64, b: f64, whole: Vec<C64>, tol: f64, depth: u32) -> (Vec<C64>, f64) {
        let mid = 0.5 * (a + b);
        let left = self.panel(a, mid);
        let right = self.panel(mid, b);
        let halves: Vec<C64> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
        let err = halves
            .iter()
            .zip(&whole)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        if err <= tol || depth >= MAX_DEPTH {
            return (halves, err);
        }
        let (lv, le) = self.run(a, mid, left, 0.5 * tol, depth + 1);
        let (rv, re) = self.run(mid, b, right, 0.5 * tol, depth + 1);
        (lv.iter().zip(&rv).map(|(l, r)| l + r).collect(), le + re)
    }
}

/// ∫_a^b f with absolute tolerance `tol` on every component.
pub fn adaptive(f: &dyn Fn(f64) -> Vec<C64>, a: f64, b: f64, tol: f64) -> Quad {
    let mut st = Adaptive { f, rule: gl_rule(PANEL_ORDER), evals: 0 };
    let whole = st.panel(a, b);
    let (value, error) = st.run(a, b, whole, tol, 0);
    Quad { value, error, evaluations: st.evals }
}

/// ∫_a^∞ f through the substitution x = a + t/(1−t).
pub fn adaptive_half_line(f: &dyn Fn(f64) -> Vec<C64>, a: f64, tol: f64) -> Quad {
    let g = |t: f64| -> Vec<C64> {
        let s = 1.0 - t;
        let x = a + t / s;
        let jac = 1.0 / (s * s);
        let v = f(x);
        if !jac.is_finite() {
            return vec![C64::new(0.0, 0.0); v.len()];
        }
        v.into_iter().map(|y| y * jac).collect()
    };
    adaptive(&g, 0.0, 1.0, tol)
}

pub fn adaptive_real(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let g = |x: f64| vec![C64::new(f(x), 0.0)];
    let q = adaptive(&g, a, b, tol);
    (q.value[0].re, q.error)
}

pub fn adaptive_real_half_line(f: &dyn Fn(f64) -> f64, a: f64, tol: f64) -> (f64, f64) {
    let g = |x: f64| vec![C64::new(f(x), 0.0)];
    let q = adaptive_half_line(&g, a, tol);
    (q.value[0].re, q.error)
}
