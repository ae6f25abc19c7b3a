use serde_json::json;

use super::{max_of, Config};
use crate::disc_oracle::*;
use crate::error::Result;
use crate::linalg::{hermiticity_residual, idempotency_residual, max_abs};
use crate::report::{CaseRow, ErrorKind, SuiteReport};

const KERNEL_BAND: usize = 200;

pub fn run(cfg: &Config) -> Result<SuiteReport> {
    let mut s = cfg.suite("disc");
    let modes = cfg.modes as i64;

    s.case("kstark_spectrum", || {
        let mut worst: f64 = 0.0;
        let mut worst_k = 0;
        for k in -modes..modes {
            let exact = kstark_eigenvalue(k);
            let want = *exact.numer() as f64 / *exact.denom() as f64;
            let got = kstark_eigenvalue_quadrature(k, 2 * cfg.modes + 16)?;
            let e = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
            if e > worst {
                worst = e;
                worst_k = k;
            }
        }
        Ok(CaseRow::new("", worst, ErrorKind::Relative, 1e-10)
            .params(json!({"k_min": -modes, "k_max": modes - 1}))
            .computed(json!({"max_error": worst, "at_k": worst_k}))
            .expected(json!("1/(2(k+1)) for k >= 0, 0 for k < 0"))
            .rel(worst)
            .provenance("closed form vs quadrature"))
    });

    let pairs = sample_pairs(100, 0.9, cfg.seed);
    let mut grids = Vec::new();
    for (id, kind) in [("kernel_kkstar", KernelKind::KKStar), ("kernel_bergman", KernelKind::Bergman)] {
        let grid = KernelGrid::evaluate(kind, &pairs, KERNEL_BAND);
        if let Ok(g) = &grid {
            grids.push((id, g.to_csv()));
        }
        s.case(id, || {
            let g = grid?;
            let ratio = max_of(g.samples.iter().map(|p| p.abs_error / (p.tail_bound + p.rounding_bound)));
            let abs = max_of(g.samples.iter().map(|p| p.abs_error));
            Ok(CaseRow::new("", ratio, ErrorKind::BoundRatio, 1.0)
                .params(json!({"pairs": pairs.len(), "rmax": 0.9, "band": KERNEL_BAND}))
                .computed(json!({"max_abs_error": abs}))
                .expected(json!("closed-form kernel within the series tail bound"))
                .abs(abs)
                .provenance("closed form"))
        });
    }
    for (id, body) in grids {
        cfg.write_csv(&format!("{id}.csv"), &body)?;
    }

    s.case("calderon_scalar_aps", || {
        let p = calderon_bruteforce(Model::Scalar, cfg.modes)?;
        let e = max_abs(&(&p.matrix - aps_indicator(cfg.modes)));
        Ok(CaseRow::new("", e, ErrorKind::Exact, 0.0)
            .params(json!({"band": cfg.modes}))
            .computed(json!(e))
            .expected(json!("APS indicator of k >= 0"))
            .abs(e)
            .provenance("structural identity"))
    });

    let rep = spin_rep();
    let spin = calderon_bruteforce(Model::Spin, cfg.modes);
    s.case("calderon_spin_projector", || {
        let p = spin.clone()?;
        let idem = idempotency_residual(&p.matrix);
        let herm = hermiticity_residual(&p.matrix);
        let lag = lagrangian_check(&p, &rep)?;
        let worst = idem.max(herm).max(lag);
        Ok(CaseRow::residual("", worst, 1e-10)
            .params(json!({"band": cfg.modes}))
            .computed(json!({"idempotency": idem, "hermiticity": herm, "lagrangian": lag}))
            .expected(json!(0.0))
            .provenance("projector identities"))
    });

    s.case("calderon_symbol_limit", || {
        let p = spin.clone()?;
        let lim = calderon_symbol_limit(&p, &rep, modes)?;
        Ok(CaseRow::residual("", lim.error_at_kmax, 1e-3)
            .params(json!({"kmax": modes}))
            .computed(json!({"error_at_kmax": lim.error_at_kmax, "outer_normal": lim.best_outer}))
            .expected(json!("1/2 (Id + i cl(nu) cl(xi))"))
            .provenance("principal symbol"))
    });

    s.case("calderon_symbol_rate", || {
        let p = spin.clone()?;
        let lim = calderon_symbol_limit(&p, &rep, modes)?;
        let e = if lim.rate.is_infinite() { 0.0 } else { 1.0 / lim.rate };
        Ok(CaseRow::new("", e, ErrorKind::InverseMargin, 1.0)
            .params(json!({"kmax": modes}))
            .computed(json!({"rate": if lim.rate.is_finite() { json!(lim.rate) } else { json!("exact") }}))
            .expected(json!("rate >= 1"))
            .provenance("principal symbol"))
    });

    s.case("bergman_two_constructions", || {
        let chk = bergman_bruteforce(8)?;
        let parts = [
            ("agreement", chk.agreement()),
            ("idempotency", chk.idempotency()),
            ("hermiticity", chk.hermiticity()),
            ("reproduces_poisson", chk.reproduces_poisson()),
            ("inverse_identity", chk.inverse_identity()),
        ];
        let worst = max_of(parts.iter().map(|p| p.1));
        let computed: serde_json::Map<String, serde_json::Value> =
            parts.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        Ok(CaseRow::residual("", worst, 1e-10)
            .params(json!({"band": 8}))
            .computed(serde_json::Value::Object(computed))
            .expected(json!(0.0))
            .provenance("factorization identity"))
    });
    Ok(s)
}
