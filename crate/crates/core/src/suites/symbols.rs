use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{max_of, Config};
use crate::clifford::CliffordRep;
use crate::error::Result;
use crate::linalg::{c, hermiticity_residual, idempotency_residual, max_abs, op_norm, I};
use crate::report::{CaseRow, ErrorKind, SuiteReport};
use crate::symbols::*;

fn direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / r).collect()
}

pub fn run(cfg: &Config) -> Result<SuiteReport> {
    let mut s = cfg.suite("symbols");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    for n in 1..=3usize {
        let rep = CliffordRep::build(n + 1)?;
        let dir = direction(&mut rng, n);
        for scale in [1.0, 2.0, 10.0] {
            let mu: Vec<f64> = dir.iter().map(|x| x * scale).collect();
            for (method, tol, tag) in [(Method::ClosedForm, 1e-8, "closed"), (Method::Quadrature, 1e-5, "quadrature")] {
                let id = format!("composition_{tag}_n{n}_mu{scale}");
                s.case(&id, || {
                    let out = compose_lk(&symbol_kstar(&rep), &symbol_k(&rep), &mu, method)?;
                    let want = composition_target(&rep, &mu)?;
                    let e = max_abs(&(&out.value - &want)).max(max_abs(&(&out.opposite_order - &want)));
                    Ok(CaseRow::residual("", e, tol)
                        .params(json!({"n": n, "mu": mu}))
                        .expected(json!("1/4 |mu|^-1 (Id + i cl(nu) cl(mu/|mu|))"))
                        .provenance("symbol composition"))
                });
            }
        }
    }

    for n in [1usize, 2] {
        for lambda in [0.5, 1.0, 1.5] {
            s.case(&format!("gamma_coefficient_n{n}_lambda{lambda}"), || {
                let want = gamma_ft_coeff(lambda, n)?;
                let got = gamma_ft_coeff_numeric(lambda, n)?;
                let rel = ((got - want) / want).abs();
                Ok(CaseRow::new("", rel, ErrorKind::Relative, 1e-4)
                    .params(json!({"n": n, "lambda": lambda}))
                    .computed(json!(want))
                    .expected(json!(got))
                    .rel(rel)
                    .abs((got - want).abs())
                    .provenance("Gaussian Parseval oracle"))
            });
        }
    }

    for n in 1..=3usize {
        let rep = CliffordRep::build(n + 1)?;
        let xi: Vec<f64> = direction(&mut rng, n).iter().map(|x| 1.7 * x).collect();
        s.case(&format!("scattering_half_n{n}"), || {
            let half = scattering_symbol_normalized(&rep, c(0.5, 0.0), &xi)?;
            let want = rep.cl_nu() * cl_tangent(&rep, &xi) * I;
            let l0 = l0_symbol(&rep, &xi)?;
            let e = max_abs(&(half - want)).max(max_abs(&(l0 - cl_tangent(&rep, &xi) * I)));
            Ok(CaseRow::residual("", e, 1e-13)
                .params(json!({"n": n, "xi": xi}))
                .expected(json!("S(1/2) = i cl(nu) cl(xi), L0 = i cl(xi)"))
                .provenance("symbol identity"))
        });
        s.case(&format!("scattering_unitarity_n{n}"), || {
            let mut worst: f64 = 0.0;
            for lam in [c(0.0, 0.3), c(0.0, 1.0), c(0.2, 0.0), c(0.35, 0.0)] {
                let a = scattering_symbol(&rep, lam, &xi)?;
                let b = scattering_symbol(&rep, -lam, &xi)?;
                worst = worst.max(op_norm(&(a * b - rep.identity())));
            }
            Ok(CaseRow::residual("", worst, 1e-12)
                .params(json!({"n": n}))
                .expected(json!("S(lambda) S(-lambda) = Id"))
                .provenance("functional equation"))
        });
        s.case(&format!("calderon_symbol_n{n}"), || {
            let p = calderon_symbol(&rep, &xi)?;
            let e = idempotency_residual(&p).max(hermiticity_residual(&p));
            let s0 = scattering_symbol(&rep, c(0.0, 0.0), &xi)?;
            let half = (rep.identity() + s0) * c(0.5, 0.0);
            let e = e.max(max_abs(&(half - &p)));
            Ok(CaseRow::residual("", e, 1e-13)
                .params(json!({"n": n}))
                .expected(json!("orthogonal projector equal to (Id + S(0))/2"))
                .provenance("symbol identity"))
        });
        s.case(&format!("log_free_moments_n{n}"), || {
            let m = log_free_moments(&poisson_leading_term(&rep), 0)?;
            let worst = max_of(m.moments.iter().map(|x| x.magnitude));
            Ok(CaseRow::residual("", worst, 1e-10)
                .params(json!({"n": n, "j": 0}))
                .computed(json!({"max_moment": worst, "quadrature_accuracy": m.accuracy}))
                .expected(json!(0.0))
                .provenance("parity"))
        });
    }
    Ok(s)
}
