//! Curvature of e^{2ω}δ from finite differences of the metric itself, used as
//! an oracle for the spectral curvature tables.

use calderon_lab::conformal::{curvature_conformally_flat, ConformalFactor, TorusGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-2;

/// Fourth-order central difference of `f` along axis `j`.
fn diff(f: &dyn Fn(&[f64]) -> f64, x: &[f64], j: usize) -> f64 {
    let at = |t: f64| {
        let mut y = x.to_vec();
        y[j] += t;
        f(&y)
    };
    (8.0 * (at(H) - at(-H)) - (at(2.0 * H) - at(-2.0 * H))) / (12.0 * H)
}

/// Christoffel symbols Γ^k_ij at x for a diagonal metric e^{2ω}δ, from
/// numerical derivatives of the metric components.
fn christoffel(omega: &ConformalFactor, x: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let n = omega.n;
    let g = |y: &[f64]| (2.0 * omega.eval(y)).exp();
    let ginv = 1.0 / g(x);
    let dg: Vec<f64> = (0..n).map(|j| diff(&g, x, j)).collect();
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut out = vec![vec![vec![0.0; n]; n]; n];
    for (k, gk) in out.iter_mut().enumerate() {
        for i in 0..n {
            for j in 0..n {
                // ½ g^{kk}(∂_i g_kj + ∂_j g_ki − ∂_k g_ij)
                gk[i][j] = 0.5 * ginv * (dg[i] * delta(k, j) + dg[j] * delta(k, i) - dg[k] * delta(i, j));
            }
        }
    }
    out
}

/// Coordinate Ricci tensor R_ij.
fn ricci(omega: &ConformalFactor, x: &[f64]) -> Vec<Vec<f64>> {
    let n = omega.n;
    let gam = christoffel(omega, x);
    let mut r = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                let gk = |y: &[f64]| christoffel(omega, y)[k][i][j];
                s += diff(&gk, x, k);
                let gj = |y: &[f64]| christoffel(omega, y)[k][i][k];
                s -= diff(&gj, x, j);
                for l in 0..n {
                    s += gam[k][k][l] * gam[l][i][j] - gam[k][j][l] * gam[l][i][k];
                }
            }
            r[i][j] = s;
        }
    }
    r
}

fn compare(omega: &ConformalFactor, m: usize, samples: usize, seed: u64) -> f64 {
    let n = omega.n;
    let grid = TorusGrid::new(n, m).unwrap();
    let curv = curvature_conformally_flat(omega, &grid).unwrap();
    let total = grid.padded_len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = curv.max_abs().max(1e-300);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let idx = rng.gen_range(0..total);
        let x = grid.point(idx, grid.padded);
        let conf = (-2.0 * omega.eval(&x)).exp();
        let r = ricci(omega, &x);
        let mut scal = 0.0;
        for a in 0..n {
            scal += conf * r[a][a];
            for b in 0..n {
                worst = worst.max((conf * r[a][b] - curv.ric[a][b][idx]).abs() / scale);
            }
        }
        worst = worst.max((scal - curv.scal[idx]).abs() / scale);
    }
    worst
}

#[test]
fn single_cosine_factor_on_t3() {
    let omega = ConformalFactor::zero(3).with_cos(0.1, &[1, 0, 0]);
    let err = compare(&omega, 32, 12, 1);
    assert!(err <= 1e-5, "relative curvature error {err:e}");
}

#[test]
fn random_factor_on_t3() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let omega = ConformalFactor::random(3, 2, 0.2, &mut rng);
    let err = compare(&omega, 32, 12, 2);
    assert!(err <= 1e-5, "relative curvature error {err:e}");
}

#[test]
fn mixed_factor_on_t4() {
    let omega = ConformalFactor::zero(4)
        .with_cos(0.08, &[1, 0, 1, 0])
        .with_sin(0.05, &[0, 1, 0, -1]);
    let err = compare(&omega, 16, 8, 3);
    assert!(err <= 1e-5, "relative curvature error {err:e}");
}

#[test]
fn oracle_vanishes_for_flat_metric() {
    let omega = ConformalFactor::zero(3);
    let r = ricci(&omega, &[0.4, 1.1, 2.0]);
    assert!(r.iter().flatten().all(|v| v.abs() < 1e-12));
}
