//! Gamma function on the complex plane. Real arguments go through statrs.

use std::f64::consts::PI;

use crate::linalg::C64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(z) via the Lanczos approximation with reflection for Re z < ½.
pub fn gamma_complex(z: C64) -> C64 {
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return C64::new(PI, 0.0) / (s * gamma_complex(C64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        x += p / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

pub fn gamma_real(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// True when x is a non-positive integer up to `tol`.
pub fn is_gamma_pole(x: f64, tol: f64) -> bool {
    x <= tol && (x - x.round()).abs() <= tol
}

/// |S^{d−1}| = 2π^{d/2}/Γ(d/2).
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_real(d as f64 / 2.0)
}
