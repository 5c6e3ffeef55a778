use cdgreen::export::{fmt_f64, write_csv_text};
use cdgreen::quadrature::{l1_norm, NormRequest, NormResult};
use serde::Serialize;

use super::{nonempty_eps, opt_cell, spread};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{Check, Reporter};
use crate::{Format, Options};

#[derive(Debug, Serialize)]
struct Row {
    epsilon: f64,
    rho: Option<f64>,
    result: NormResult,
}

pub fn run(config: &RunConfig, opts: &Options, rep: &mut Reporter) -> Result<(), CliError> {
    let nc = config.norms.as_ref().ok_or_else(|| CliError::Config("norms: missing [norms] section".into()))?;
    nonempty_eps(&nc.epsilons, "norms")?;
    let rhos: Vec<Option<f64>> = if nc.region.needs_rho() {
        if nc.rho.is_empty() {
            return Err(CliError::Usage("norms: ball regions need a nonempty rho list".into()));
        }
        nc.rho.iter().map(|&r| Some(r)).collect()
    } else {
        vec![None]
    };
    let center = (config.green.singular[0], config.green.singular[1]);
    let jobs: Vec<(f64, Option<f64>)> = nc.epsilons.iter().flat_map(|&e| rhos.iter().map(move |&r| (e, r))).collect();
    let rows = opts.exec.try_map(&jobs, |&(eps, rho)| -> Result<Row, CliError> {
        let green = config.green.build(eps)?;
        let req = NormRequest::new(nc.integrand, nc.region.region(center, rho)?).with_tol(opts.tol()).with_exec(opts.exec);
        Ok(Row { epsilon: eps, rho, result: l1_norm(&green, &req)? })
    })?;

    match opts.format {
        Format::Csv => {
            let text: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        fmt_f64(r.epsilon),
                        opt_cell(r.rho),
                        fmt_f64(r.result.value),
                        fmt_f64(r.result.abs_error_estimate),
                        r.result.cells_used.to_string(),
                    ]
                })
                .collect();
            rep.write("norms.csv", |w| write_csv_text(w, &["epsilon", "rho", "norm", "err_estimate", "cells"], &text))?;
            let extra = serde_json::json!({ "integrand": nc.integrand.name(), "region": nc.region, "variant": config.green.variant.name() });
            rep.write_sidecar("norms.csv", extra)?;
        }
        Format::Json => {
            let hash = rep.hash().to_string();
            rep.write_json("norms.json", &serde_json::json!({ "config_sha256": hash, "rows": rows }))?;
        }
    }

    let name = nc.integrand.name();
    if let Some(max) = nc.max_value {
        for r in &rows {
            let label = format!("{name} norm at eps={:e}{}", r.epsilon, r.rho.map(|v| format!(" rho={v:e}")).unwrap_or_default());
            rep.check(Check::at_most(label, r.result.value, max * (1.0 + opts.tol())));
        }
    }
    if let Some(max) = nc.max_variation {
        for rho in &rhos {
            let vals = rows.iter().filter(|r| r.rho == *rho).map(|r| r.result.value);
            rep.check(Check::at_most(format!("{name} variation across eps"), spread(vals), max));
        }
    }
    if let Some(max) = nc.rho_proportional {
        for &eps in &nc.epsilons {
            let vals = rows.iter().filter(|r| r.epsilon == eps).filter_map(|r| r.rho.map(|rho| r.result.value / rho));
            rep.check(Check::at_most(format!("{name} spread of norm/rho at eps={eps:e}"), spread(vals), max));
        }
    }
    Ok(())
}
