use cdgreen::export::write_csv;
use cdgreen::quadrature::{l1_norm, NormIntegrand, NormRequest, Region};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{Check, Reporter};
use crate::{Format, Options};

/// Absolute floor for the defect quadrature; the defect itself is tiny.
const ABS_TOL: f64 = 1e-12;

pub fn run(config: &RunConfig, opts: &Options, rep: &mut Reporter) -> Result<(), CliError> {
    let rc = config.residual.clone().ok_or_else(|| CliError::Config("residual: missing [residual] section".into()))?;
    if config.green.coefficients.field()?.as_constant().is_none() {
        return Err(CliError::Config("residual: the defect is defined for constant coefficients only".into()));
    }
    let green = config.green.build(config.green.epsilon)?;
    let mut rows = Vec::new();
    for &xi in &rc.xi {
        for &eta in &rc.eta {
            let r = green.frozen_residual((xi, eta))?;
            rows.push([xi, eta, r.value, r.scale]);
        }
    }

    match opts.format {
        Format::Csv => {
            rep.write("residual.csv", |w| write_csv(w, &["xi", "eta", "residual", "scale"], rows.iter()))?;
            rep.write_sidecar(
                "residual.csv",
                serde_json::json!({ "variant": config.green.variant.name(), "eps": config.green.epsilon, "singular": config.green.singular }),
            )?;
        }
        Format::Json => {
            let hash = rep.hash().to_string();
            rep.write_json("residual.json", &serde_json::json!({ "config_sha256": hash, "rows": rows }))?;
        }
    }

    let beyond: Vec<f64> = rows.iter().filter(|r| r[0] >= 1.0 / 3.0).map(|r| r[2].abs() / r[3].max(f64::MIN_POSITIVE)).collect();
    if !beyond.is_empty() {
        let worst = beyond.iter().cloned().fold(0.0, f64::max);
        rep.check(Check::at_most("max |defect|/scale for xi >= 1/3", worst, rc.zero_tol));
    }
    let band: Vec<&[f64; 4]> = rows.iter().filter(|r| r[0] > 1.0 / 6.0 && r[0] < 1.0 / 3.0).collect();
    if !band.is_empty() {
        rep.check(Check::holds("defect present inside the cut-off band", band.iter().any(|r| r[2] != 0.0)));
    }
    if let Some(max) = rc.max_l1 {
        let req = NormRequest::new(NormIntegrand::Residual, Region::UnitSquare)
            .with_tol(opts.tol())
            .with_abs_tol(ABS_TOL)
            .with_exec(opts.exec);
        let norm = l1_norm(&green, &req)?;
        rep.check(Check::at_most("L1 norm of the defect over the unit square", norm.value, max));
    }
    Ok(())
}
