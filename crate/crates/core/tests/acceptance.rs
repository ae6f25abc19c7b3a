//! Acceptance criteria, one test each. A lock serializes them so that the
//! wall-time limits are measured without interference.

use std::f64::consts::PI;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use calderon_lab::clifford::CliffordRep;
use calderon_lab::conformal::*;
use calderon_lab::disc_oracle::*;
use calderon_lab::index_sets::*;
use calderon_lab::linalg::{c, hermiticity_residual, idempotency_residual, max_abs, CMatrix, C64, I};
use calderon_lab::quadrature::gl_rule_on;
use calderon_lab::symbols::*;
use calderon_lab::LabError;
use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

static LOCK: Mutex<()> = Mutex::new(());

/// Runs `body`, prints one status line and fails on a false check or overtime.
fn criterion(id: u32, name: &str, limit: Duration, body: impl FnOnce() -> Result<String, String>) {
    let _guard = LOCK.lock().unwrap_or_else(|e| e.into_inner());
    let t = Instant::now();
    let outcome = body();
    let dt = t.elapsed();
    let verdict = match &outcome {
        Ok(_) if dt <= limit => "PASS",
        _ => "FAIL",
    };
    let detail = match &outcome {
        Ok(s) => s.clone(),
        Err(e) => e.clone(),
    };
    println!("criterion {id:>2} {verdict}: {name} [{dt:.2?} / limit {limit:?}] {detail}");
    assert!(outcome.is_ok(), "criterion {id} failed: {detail}");
    assert!(dt <= limit, "criterion {id} exceeded {limit:?}: took {dt:?}");
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

#[test]
fn c01_kstark_spectrum() {
    criterion(1, "K*K spectrum on the disc", Duration::from_secs(5), || {
        let radial = gl_rule_on(80, 0.0, 1.0);
        let mut worst: f64 = 0.0;
        for k in -64i64..=63 {
            // ‖z^k‖² over the disc divided by ‖e^{ikt}‖² = 2π
            let oracle = if k < 0 {
                0.0
            } else {
                radial.iter().map(|(r, w)| w * r.powi(2 * k as i32 + 1)).sum::<f64>() * 2.0 * PI / (2.0 * PI)
            };
            let exact = kstark_eigenvalue(k);
            let want = if k < 0 { Rational64::from_integer(0) } else { Rational64::new(1, 2 * (k + 1)) };
            check(exact == want, || format!("k={k}: {exact} != {want}"))?;
            let v = *exact.numer() as f64 / *exact.denom() as f64;
            let quad = kstark_eigenvalue_quadrature(k, 80).map_err(e)?;
            for got in [v, quad] {
                let err = if k < 0 { got.abs() } else { ((got - oracle) / oracle).abs() };
                worst = worst.max(err);
            }
        }
        check(worst <= 1e-10, || format!("max rel error {worst:e}"))?;
        Ok(format!("max rel error {worst:.2e}"))
    });
}

#[test]
fn c02_kernels() {
    criterion(2, "KK* and Bergman truncated kernels", Duration::from_secs(2), || {
        let pairs = sample_pairs(100, 0.9, 2024);
        let mut worst_ratio: f64 = 0.0;
        for &(z, w) in &pairs {
            check(z.norm() <= 0.9 && w.norm() <= 0.9, || "sample outside |z| ≤ 0.9".into())?;
            let u = C64::new(1.0, 0.0) - z * w.conj();
            let kk = 1.0 / (2.0 * PI * u);
            let bg = 1.0 / (PI * u * u);
            let r = z.norm() * w.norm();
            let a = (kkstar_kernel(z, w, 200).map_err(e)? - kk).norm();
            let b = (bergman_kernel(z, w, 200).map_err(e)? - bg).norm();
            let ba = kkstar_tail_bound(r, 200) + series_rounding_bound(r, 200, false, kk.norm());
            let bb = bergman_tail_bound(r, 200) + series_rounding_bound(r, 200, true, bg.norm());
            worst_ratio = worst_ratio.max(a / ba).max(b / bb);
        }
        check(worst_ratio <= 1.0, || format!("error/bound {worst_ratio}"))?;
        Ok(format!("max error/bound {worst_ratio:.3}"))
    });
}

#[test]
fn c03_bruteforce_calderon() {
    criterion(3, "brute-force Calderón projector", Duration::from_secs(10), || {
        let rep = spin_rep();
        let p = calderon_bruteforce(Model::Spin, 64).map_err(e)?;
        let idem = idempotency_residual(&p.matrix);
        let herm = hermiticity_residual(&p.matrix);
        let lag = lagrangian_check(&p, &rep).map_err(e)?;
        check(idem <= 1e-10 && herm <= 1e-10 && lag <= 1e-10, || format!("{idem:e} {herm:e} {lag:e}"))?;
        let s = calderon_bruteforce(Model::Scalar, 64).map_err(e)?;
        let band = 64i64;
        let mut aps = CMatrix::zeros(129, 129);
        for k in 0..=band {
            aps[((k + band) as usize, (k + band) as usize)] = c(1.0, 0.0);
        }
        check(s.matrix == aps, || "scalar projector differs from the APS indicator".into())?;
        Ok(format!("idempotency {idem:.1e}, hermiticity {herm:.1e}, lagrangian {lag:.1e}, scalar exact"))
    });
}

#[test]
fn c04_symbol_limit() {
    criterion(4, "Calderón symbol limit", Duration::from_secs(5), || {
        let rep = spin_rep();
        let p = calderon_bruteforce(Model::Spin, 64).map_err(e)?;
        let lim = calderon_symbol_limit(&p, &rep, 64).map_err(e)?;
        check(lim.error_at_kmax <= 1e-3, || format!("error at k=64: {:e}", lim.error_at_kmax))?;
        check(lim.rate >= 1.0, || format!("rate {}", lim.rate))?;
        // independent target: ½(Id + i cl(ν)cl(ξ̂)) with the t = 0 frame
        let g1 = &rep.gens[0];
        let g2 = &rep.gens[1];
        let nu = if lim.best_outer { g1.clone() } else { -g1.clone() };
        let et = g2.clone();
        for (k, sign) in [(64i64, 1.0), (-64, -1.0)] {
            let want = (CMatrix::identity(2, 2) + &nu * &et * I * c(sign, 0.0)) * c(0.5, 0.0);
            let got = p.mode_block(k).map_err(e)?;
            let err = max_abs(&(got - want));
            check(err <= 1e-3, || format!("block {k}: {err:e}"))?;
        }
        Ok(format!("error at k=64 {:.1e}, rate {}", lim.error_at_kmax, lim.rate))
    });
}

fn composition_oracle(rep: &CliffordRep, mu: &[f64]) -> CMatrix {
    let m = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut clmu = CMatrix::zeros(rep.rank, rep.rank);
    for (g, x) in rep.gens.iter().zip(mu) {
        clmu += g * c(x / m, 0.0);
    }
    (CMatrix::identity(rep.rank, rep.rank) + rep.gens[rep.dim - 1].clone() * clmu * I) * c(0.25 / m, 0.0)
}

#[test]
fn c05_symbol_composition() {
    criterion(5, "boundary composition of the Poisson symbol pair", Duration::from_secs(10), || {
        let (mut wc, mut wq): (f64, f64) = (0.0, 0.0);
        for n in 1..=3usize {
            let rep = CliffordRep::build(n + 1).map_err(e)?;
            for scale in [1.0, 2.0, 10.0] {
                let mu: Vec<f64> = (0..n).map(|i| scale * [0.6, 0.8, 0.0][i] / if n == 1 { 0.6 } else { 1.0 }).collect();
                let want = composition_oracle(&rep, &mu);
                let cf = compose_lk(&symbol_kstar(&rep), &symbol_k(&rep), &mu, Method::ClosedForm).map_err(e)?;
                let qd = compose_lk(&symbol_kstar(&rep), &symbol_k(&rep), &mu, Method::Quadrature).map_err(e)?;
                wc = wc.max(max_abs(&(&cf.value - &want)));
                wq = wq.max(max_abs(&(&qd.value - &want)));
            }
        }
        check(wc <= 1e-8 && wq <= 1e-5, || format!("closed {wc:e}, quadrature {wq:e}"))?;
        Ok(format!("closed form {wc:.1e}, quadrature {wq:.1e}"))
    });
}

#[test]
fn c06_gamma_coefficient() {
    criterion(6, "Γ-coefficient of the homogeneous Fourier transform", Duration::from_secs(30), || {
        let mut worst: f64 = 0.0;
        for n in [1usize, 2] {
            for lambda in [0.5, 1.0, 1.5] {
                let a = gamma_ft_coeff(lambda, n).map_err(e)?;
                let b = gamma_ft_coeff_numeric(lambda, n).map_err(e)?;
                worst = worst.max(((a - b) / b).abs());
            }
        }
        // reference values in two and three dimensions
        let known = [((1.0, 1usize), 2.0 * PI), ((1.5, 2), 4.0 * PI * (PI / 2.0).sqrt())];
        for ((l, n), v) in known {
            let a = gamma_ft_coeff(l, n).map_err(e)?;
            worst = worst.max(((a - v) / v).abs());
        }
        check(worst <= 1e-4, || format!("rel error {worst:e}"))?;
        Ok(format!("max rel error {worst:.1e}"))
    });
}

#[test]
fn c07_index_sets() {
    criterion(7, "index sets of the Bergman kernel", Duration::from_secs(1), || {
        let set = |s: &str| s.parse::<IndexSet>().map_err(e);
        let j_ff = set("-n/2 ∪ (n/2-1,1) ∪ (n/2+1,3)")?;
        let half = set("1/2")?;
        let kernel = set("-n-1 ∪ (-2,1) ∪ (0,3)")?;
        for n in 2..=10 {
            let ch = bergman_chain(n).map_err(e)?;
            check(ch.j_ff == j_ff, || format!("n={n}: J_ff = {}", ch.j_ff))?;
            check(ch.j_lb == half && ch.j_rb == half, || format!("n={n}: J_lb = {}, J_rb = {}", ch.j_lb, ch.j_rb))?;
            let shifted = halfdensity_shift(&ch.j_ff, Face::Ff, Direction::From);
            check(shifted == kernel, || format!("n={n}: shifted front face {shifted}"))?;
        }
        Ok(format!("J_ff = {j_ff}, J_lb = J_rb = {half}, kernel ff = {kernel}"))
    });
}

fn dirac_cubed(g: &TorusGrid, cl: &BoundaryClifford, phi: &SpinorField) -> SpinorField {
    let mut out = phi.clone();
    for _ in 0..3 {
        out = dirac_flat(g, cl, &out).unwrap();
    }
    out
}

#[test]
fn c08_conformal_covariance() {
    criterion(8, "conformal covariance of L1 on T^3", Duration::from_secs(60), || {
        let g = TorusGrid::new(3, 32).map_err(e)?;
        let cl = BoundaryClifford::intrinsic(3).map_err(e)?;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let omega = ConformalFactor::random(3, 2, 0.2, &mut rng);
        check(omega.band() == 2, || "band".into())?;
        let sup = (0..200).map(|i| omega.eval(&[0.1 * i as f64, 0.37 * i as f64, 0.73 * i as f64]).abs()).fold(0.0, f64::max);
        check(sup <= 0.2, || format!("sup |ω| = {sup}"))?;
        let geo = Geometry::new(&g, &omega, DEFAULT_ALIAS_BUDGET).map_err(e)?;
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let phi = random_spinor(&g, cl.rank, 2, &mut rng);
            worst = worst.max(covariance_residual(&geo, &cl, &phi).map_err(e)?);
        }
        check(worst <= 1e-6, || format!("covariance residual {worst:e}"))?;
        let flat = Geometry::new(&g, &ConformalFactor::zero(3), DEFAULT_ALIAS_BUDGET).map_err(e)?;
        let phi = random_spinor(&g, cl.rank, 2, &mut rng);
        let l = assemble_l1(&flat, &cl).map_err(e)?.apply(&phi).map_err(e)?;
        let d3 = dirac_cubed(&g, &cl, &phi);
        let flat_err = l.sub(&d3).norm(&g) / d3.norm(&g);
        check(flat_err <= 1e-12, || format!("ω = 0 residual {flat_err:e}"))?;
        Ok(format!("covariance {worst:.1e}, flat {flat_err:.1e}"))
    });
}

#[test]
fn c09_self_adjointness_and_routes() {
    criterion(9, "L1 self-adjointness and route agreement", Duration::from_secs(60), || {
        let g = TorusGrid::new(3, 32).map_err(e)?;
        let cl = BoundaryClifford::intrinsic(3).map_err(e)?;
        let amb = CliffordRep::build(4).map_err(e)?;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (mut sa, mut rt): (f64, f64) = (0.0, 0.0);
        for _ in 0..20 {
            let omega = ConformalFactor::random(3, 2, 0.2, &mut rng);
            let geo = Geometry::new(&g, &omega, DEFAULT_ALIAS_BUDGET).map_err(e)?;
            let phi = random_spinor(&g, cl.rank, 2, &mut rng);
            let psi = random_spinor(&g, cl.rank, 2, &mut rng);
            sa = sa.max(assemble_l1(&geo, &cl).map_err(e)?.self_adjointness_residual(&phi, &psi).map_err(e)?);
            let a = random_spinor(&g, amb.rank, 2, &mut rng);
            rt = rt.max(compare_routes(&geo, &amb, &a).map_err(e)?);
        }
        check(sa <= 1e-8 && rt <= 1e-8, || format!("self-adjointness {sa:e}, routes {rt:e}"))?;
        Ok(format!("self-adjointness {sa:.1e}, routes {rt:.1e}"))
    });
}

#[test]
fn c10_indicial_solver() {
    criterion(10, "indicial solver and the λ = 1/2 pole", Duration::from_secs(5), || {
        let g = TorusGrid::new(3, 8).map_err(e)?;
        let rep = CliffordRep::build(4).map_err(e)?;
        let nu = rep.gens[3].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let psi = random_spinor(&g, rep.rank, 2, &mut rng);
        // −cl(ν)Dψ with D = Σ γ_j ∂_j, built mode by mode
        let mut want = SpinorField::zeros(&g, rep.rank);
        for (comp_out, row) in want.comps.iter_mut().enumerate() {
            for (idx, slot) in row.iter_mut().enumerate() {
                let k = g.k(idx);
                if k.iter().any(|&x| x == 4) {
                    continue;
                }
                let mut sym = CMatrix::zeros(rep.rank, rep.rank);
                for (j, &kj) in k.iter().enumerate() {
                    sym += &rep.gens[j] * c(0.0, kj as f64);
                }
                let m = -(&nu * sym);
                *slot = (0..rep.rank).map(|l| m[(comp_out, l)] * psi.comps[l][idx]).sum();
            }
        }
        let mut worst: f64 = 0.0;
        for lambda in [0.1, 0.25, 2.0] {
            let p = formal_p1(&rep, &g, lambda, &psi).map_err(e)?;
            worst = worst.max(p.scale(c(2.0 * lambda - 1.0, 0.0)).sub(&want).norm(&g) / want.norm(&g));
        }
        check(worst <= 1e-10, || format!("residual {worst:e}"))?;
        let pole = matches!(formal_p1(&rep, &g, 0.5, &psi), Err(LabError::Pole(_)));
        check(pole, || "λ = 1/2 pole not detected".into())?;
        // S̃(½) = cl(ν)D and L₀ = D on a single mode, against the symbol calculus
        let k = [1i64, -2, 1];
        let v = [c(1.0, 0.0), c(0.0, 1.0), c(0.5, 0.0), c(0.0, -0.5)];
        let mode = SpinorField::mode(&g, &k, &v).map_err(e)?;
        let s_half = p1_residue(&rep, &g, &mode).map_err(e)?.scale(c(-2.0, 0.0));
        let xi: Vec<f64> = k.iter().map(|&x| x as f64).collect();
        let sym = scattering_symbol_normalized(&rep, c(0.5, 0.0), &xi).map_err(e)?;
        let l0 = l0_symbol(&rep, &xi).map_err(e)?;
        let idx = g.index_of(&k).unwrap();
        let l0_field = s_half.apply(&nu).scale(c(-1.0, 0.0));
        let mut sym_err: f64 = 0.0;
        for i in 0..rep.rank {
            let a: C64 = (0..rep.rank).map(|l| sym[(i, l)] * v[l]).sum();
            let b: C64 = (0..rep.rank).map(|l| l0[(i, l)] * v[l]).sum();
            sym_err = sym_err.max((s_half.comps[i][idx] - a).norm()).max((l0_field.comps[i][idx] - b).norm());
        }
        check(sym_err <= 1e-12, || format!("symbol mismatch {sym_err:e}"))?;
        Ok(format!("residual {worst:.1e}, pole detected, symbol match {sym_err:.1e}"))
    });
}
