use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{max_of, Config};
use crate::clifford::CliffordRep;
use crate::conformal::*;
use crate::error::{LabError, Result};
use crate::linalg::c;
use crate::report::{CaseRow, ErrorKind, SuiteReport};

const N: usize = 3;
const SPINORS: usize = 10;
const PAIRED_CASES: usize = 20;

fn dirac_cubed(grid: &TorusGrid, cl: &BoundaryClifford, phi: &SpinorField) -> Result<SpinorField> {
    let mut out = phi.clone();
    for _ in 0..3 {
        out = dirac_flat(grid, cl, &out)?;
    }
    Ok(out)
}

fn rel(a: &SpinorField, b: &SpinorField, g: &TorusGrid) -> f64 {
    a.sub(b).norm(g) / b.norm(g).max(f64::MIN_POSITIVE)
}

fn curvature_csv(geo: &Geometry) -> String {
    let g = &geo.grid;
    let n = g.n;
    let mut head = vec!["x1".to_string(), "x2".to_string(), "scal".to_string()];
    for a in 0..n {
        for b in 0..n {
            head.push(format!("ric_{}{}", a + 1, b + 1));
        }
    }
    let mut out = head.join(",") + "\n";
    // the plane x3 = … = 0 of the padded grid
    let stride = g.padded.pow(n as u32 - 2);
    for i in 0..g.padded * g.padded {
        let idx = i * stride;
        let x = g.point(idx, g.padded);
        let mut row = vec![format!("{:.12e}", x[0]), format!("{:.12e}", x[1]), format!("{:.12e}", geo.curvature.scal[idx])];
        for a in 0..n {
            for b in 0..n {
                row.push(format!("{:.12e}", geo.curvature.ric[a][b][idx]));
            }
        }
        out += &(row.join(",") + "\n");
    }
    out
}

pub fn run(cfg: &Config) -> Result<SuiteReport> {
    let mut s = cfg.suite("conformal");
    let m = cfg.grid;
    let grid = TorusGrid::new(N, m)?;
    let intr = BoundaryClifford::intrinsic(N)?;
    let amb_rep = CliffordRep::build(N + 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let omega = ConformalFactor::random(N, cfg.band, cfg.amplitude, &mut rng);
    let params = json!({"n": N, "m": m, "band": cfg.band, "amplitude": cfg.amplitude, "seed": cfg.seed});
    let geo = Geometry::new(&grid, &omega, DEFAULT_ALIAS_BUDGET);
    if let Ok(g) = &geo {
        cfg.write_csv("curvature.csv", &curvature_csv(g))?;
    }

    s.case("covariance_l1", || {
        let geo = geo.clone()?;
        let mut r = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
        let res: Vec<f64> = (0..SPINORS)
            .map(|_| covariance_residual(&geo, &intr, &random_spinor(&grid, intr.rank, 2, &mut r)))
            .collect::<Result<_>>()?;
        let worst = max_of(res.iter().copied());
        Ok(CaseRow::new("", worst, ErrorKind::Relative, 1e-6)
            .params(params.clone())
            .computed(json!({"residuals": res, "alias_tail": geo.tail}))
            .expected(json!(0.0))
            .rel(worst)
            .provenance("conformal covariance"))
    });

    s.case("flat_l1_is_dirac_cubed", || {
        let flat = Geometry::new(&grid, &ConformalFactor::zero(N), DEFAULT_ALIAS_BUDGET)?;
        let phi = random_spinor(&grid, intr.rank, 2, &mut ChaCha8Rng::seed_from_u64(cfg.seed));
        let e = rel(&assemble_l1(&flat, &intr)?.apply(&phi)?, &dirac_cubed(&grid, &intr, &phi)?, &grid);
        Ok(CaseRow::new("", e, ErrorKind::Relative, 1e-12).params(json!({"m": m})).rel(e).provenance("formula collapse"))
    });

    s.case("constant_factor_scaling", || {
        let cst = 0.3;
        let geo = Geometry::new(&grid, &ConformalFactor::constant(N, cst), DEFAULT_ALIAS_BUDGET)?;
        let phi = random_spinor(&grid, intr.rank, 2, &mut ChaCha8Rng::seed_from_u64(cfg.seed));
        let want = dirac_cubed(&grid, &intr, &phi)?.scale(c((-3.0 * cst).exp(), 0.0));
        let e = rel(&assemble_l1(&geo, &intr)?.apply(&phi)?, &want, &grid);
        Ok(CaseRow::new("", e, ErrorKind::Relative, 1e-12)
            .params(json!({"m": m, "omega": cst}))
            .rel(e)
            .expected(json!("exp(-3c) D^3"))
            .provenance("exponent arithmetic"))
    });

    s.case("self_adjointness_and_routes", || {
        let mut r = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xad7);
        let mut sa = Vec::new();
        let mut routes = Vec::new();
        for _ in 0..PAIRED_CASES {
            let om = ConformalFactor::random(N, cfg.band, cfg.amplitude, &mut r);
            let geo = Geometry::new(&grid, &om, DEFAULT_ALIAS_BUDGET)?;
            let phi = random_spinor(&grid, intr.rank, 2, &mut r);
            let psi = random_spinor(&grid, intr.rank, 2, &mut r);
            sa.push(assemble_l1(&geo, &intr)?.self_adjointness_residual(&phi, &psi)?);
            let a = random_spinor(&grid, amb_rep.rank, 2, &mut r);
            routes.push(compare_routes(&geo, &amb_rep, &a)?);
        }
        let worst = max_of(sa.iter().chain(&routes).copied());
        Ok(CaseRow::residual("", worst, 1e-8)
            .params(json!({"cases": PAIRED_CASES, "m": m, "band": cfg.band, "amplitude": cfg.amplitude}))
            .computed(json!({"self_adjointness": max_of(sa), "route_agreement": max_of(routes)}))
            .expected(json!(0.0))
            .provenance("self-adjointness and two assemblies"))
    });

    s.case("dirac_consistency", || {
        let geo = geo.clone()?;
        let mut r = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xd1);
        let phi = random_spinor(&grid, intr.rank, 2, &mut r);
        let psi = random_spinor(&grid, intr.rank, 2, &mut r);
        let assembled = rel(&assembled_dirac(&geo, &intr, &phi)?, &conformal_dirac(&geo, &intr, &phi)?, &grid);
        let sa = dirac_self_adjointness(&geo, &intr, &phi, &psi)?;
        let anti = BoundaryClifford::from_ambient_rep(&amb_rep)?.nu_anticommutation().unwrap_or(f64::NAN);
        Ok(CaseRow::residual("", assembled.max(sa).max(anti), 1e-8)
            .params(params.clone())
            .computed(json!({"assembled_vs_conjugated": assembled, "self_adjointness": sa, "nu_anticommutation": anti}))
            .provenance("internal consistency"))
    });

    s.case("curvature_identities", || {
        let geo = geo.clone()?;
        let k = &geo.curvature;
        let tr = k.trace_residual().unwrap_or(f64::NAN);
        let sym = k.symmetry_residual();
        Ok(CaseRow::residual("", tr.max(sym), 1e-10)
            .params(params.clone())
            .computed(json!({"trace_identity": tr, "ricci_symmetry": sym}))
            .provenance("curvature identities"))
    });

    s.case("scal_variation", || {
        let geo = geo.clone()?;
        let mut r = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9a);
        let dir = ConformalFactor::random(N, 1, 1.0, &mut r);
        let var = geo.scal_variation(&dir)?;
        let h = 1e-4;
        let shifted = |t: f64| -> Result<Vec<f64>> {
            let mut f = omega.clone();
            for (k, v) in &dir.coeffs {
                *f.coeffs.entry(k.clone()).or_insert(c(0.0, 0.0)) += v * t;
            }
            Ok(Geometry::new(&grid, &f, 1.0)?.curvature.scal)
        };
        let (p, q) = (shifted(h)?, shifted(-h)?);
        let scale = max_of(var.iter().map(|v| v.abs()));
        let err = max_of(var.iter().zip(p.iter().zip(&q)).map(|(v, (a, b))| (v - (a - b) / (2.0 * h)).abs()));
        Ok(CaseRow::new("", err / scale, ErrorKind::Relative, 1e-5)
            .params(json!({"h": h}))
            .rel(err / scale)
            .provenance("central difference"))
    });

    s.case("curvature_sign_convention", || {
        let geo = geo.clone()?;
        let phi = random_spinor(&grid, intr.rank, 2, &mut ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x51));
        let kept = covariance_residual(&geo, &intr, &phi)?;
        let flipped = covariance_residual(&geo.with_flipped_curvature(), &intr, &phi)?;
        // the opposite convention must visibly fail
        Ok(CaseRow::new("", 1e-3 / flipped, ErrorKind::InverseMargin, 1.0)
            .params(params.clone())
            .computed(json!({"convention_used": kept, "opposite_convention": flipped}))
            .expected(json!("opposite convention residual > 1e-3"))
            .provenance("empirical disambiguation"))
    });

    s.case("resolution_sweep", || {
        let om = ConformalFactor::zero(N).with_cos(0.1, &[1, 0, 0]).with_sin(0.05, &[0, 1, 1]);
        let mut res = Vec::new();
        for mm in [8usize, 16, 32] {
            let g = TorusGrid::new(N, mm)?;
            let geo = Geometry::new(&g, &om, 1e-2)?;
            let phi = random_spinor(&g, intr.rank, 1, &mut ChaCha8Rng::seed_from_u64(cfg.seed));
            res.push(covariance_residual(&geo, &intr, &phi)?);
        }
        let floor = 1e-10;
        let worst = max_of(res.windows(2).map(|w| if w[1] <= floor { 0.0 } else { w[1] / w[0] }));
        Ok(CaseRow::new("", worst, ErrorKind::Absolute, 0.1)
            .params(json!({"m": [8, 16, 32], "floor": floor}))
            .computed(json!({"residuals": res}))
            .expected(json!("each doubling gains a factor >= 10 until the floor"))
            .provenance("spectral convergence"))
    });

    let bgrid = TorusGrid::new(N, 8)?;
    let psi = random_spinor(&bgrid, amb_rep.rank, 2, &mut ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x1d));
    s.case("indicial_p1", || {
        let d = tangential_dirac(&amb_rep, &bgrid, &psi)?;
        let want = d.apply(amb_rep.cl_nu()).scale(c(-1.0, 0.0));
        let mut worst: f64 = 0.0;
        for lambda in [0.1, 0.25, 2.0] {
            let p = formal_p1(&amb_rep, &bgrid, lambda, &psi)?;
            worst = worst.max(rel(&p.scale(c(2.0 * lambda - 1.0, 0.0)), &want, &bgrid));
        }
        Ok(CaseRow::residual("", worst, 1e-10)
            .params(json!({"lambda": [0.1, 0.25, 2.0]}))
            .expected(json!("(2 lambda - 1) p1 = -cl(nu) D psi"))
            .provenance("indicial inversion"))
    });

    s.case("indicial_pole", || {
        let hit = matches!(formal_p1(&amb_rep, &bgrid, 0.5, &psi), Err(LabError::Pole(_)));
        Ok(CaseRow::exact("", hit).params(json!({"lambda": 0.5})).expected(json!("pole")).provenance("indicial inversion"))
    });

    s.case("indicial_residue", || {
        let res = p1_residue(&amb_rep, &bgrid, &psi)?;
        let d = tangential_dirac(&amb_rep, &bgrid, &psi)?;
        let s_half = res.scale(c(-2.0, 0.0));
        let e1 = rel(&s_half, &d.apply(amb_rep.cl_nu()), &bgrid);
        let e2 = rel(&s_half.apply(amb_rep.cl_nu()).scale(c(-1.0, 0.0)), &d, &bgrid);
        Ok(CaseRow::residual("", e1.max(e2), 1e-12)
            .computed(json!({"s_half_vs_nu_d": e1, "l0_vs_d": e2}))
            .expected(json!("S(1/2) = cl(nu) D and L0 = D"))
            .provenance("residue"))
    });
    Ok(s)
}
