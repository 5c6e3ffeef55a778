use cdgreen::export::{fmt_f64, write_csv_text};
use cdgreen::quadrature::{l1_norm, scaling_study, NormRequest, ScalingFit, ScalingModel};
use serde::Serialize;

use super::{nonempty_eps, opt_cell};
use crate::config::{ModelConfig, RunConfig, ScalingConfig};
use crate::error::CliError;
use crate::report::{Check, Reporter};
use crate::svg;
use crate::{Format, Options};

#[derive(Debug, Serialize)]
struct Study<'a> {
    name: &'a str,
    integrand: &'static str,
    variant: &'static str,
    fit: ScalingFit,
}

fn model(m: ModelConfig) -> ScalingModel {
    match m {
        ModelConfig::Power => ScalingModel::Power,
        ModelConfig::LogEps => ScalingModel::LogEps,
        ModelConfig::LnRho => ScalingModel::LnRho { extra_log_eps: false },
        ModelConfig::LnRhoLogEps => ScalingModel::LnRho { extra_log_eps: true },
    }
}

/// Fitted curve at the sample abscissae.
fn predict(fit: &ScalingFit, eps: f64, rho: Option<f64>) -> f64 {
    let p = &fit.params;
    match fit.model {
        ScalingModel::Power => (p[0] + p[1] * eps.ln()).exp(),
        ScalingModel::LogEps => p[0] + p[1] * eps.ln().abs(),
        ScalingModel::LnRho { extra_log_eps } => {
            let extra = if extra_log_eps { eps.ln().abs() } else { 0.0 };
            p[0] * ((2.0 + eps / rho.unwrap_or(f64::NAN)).ln() + extra) / eps
        }
    }
}

fn study(config: &RunConfig, sc: &ScalingConfig, opts: &Options) -> Result<ScalingFit, CliError> {
    nonempty_eps(&sc.epsilons, &format!("scaling '{}'", sc.name))?;
    if sc.region.needs_rho() && sc.rho.is_empty() {
        return Err(CliError::Usage(format!("scaling '{}': ball regions need a nonempty rho list", sc.name)));
    }
    let mut points = Vec::new();
    for &eps in &sc.epsilons {
        if sc.rho.is_empty() {
            points.push((eps, None));
        }
        for &r in &sc.rho {
            points.push((eps, Some(if sc.rho_relative { r * eps } else { r })));
        }
    }
    let usage = |msg: String| CliError::Usage(format!("scaling '{}': {msg}", sc.name));
    if points.len() < 3 {
        return Err(usage(format!("needs at least 3 samples, got {}", points.len())));
    }
    if matches!(sc.model, ModelConfig::Power | ModelConfig::LogEps) {
        let hi = sc.epsilons.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = sc.epsilons.iter().cloned().fold(f64::INFINITY, f64::min);
        if hi / lo < 100.0 * (1.0 - 1e-12) {
            return Err(usage(format!("eps range [{lo:e}, {hi:e}] spans less than two decades")));
        }
    } else {
        let mut radii: Vec<f64> = points.iter().filter_map(|p| p.1).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        if radii.len() < 3 {
            return Err(usage("a rho law needs three distinct radii".into()));
        }
    }
    let greens = sc.epsilons.iter().map(|&e| config.green.build(e).map(|g| (e, g))).collect::<Result<Vec<_>, _>>()?;
    let regions = points
        .iter()
        .map(|&(_, rho)| sc.region.region((config.green.singular[0], config.green.singular[1]), rho))
        .collect::<Result<Vec<_>, _>>()?;
    let fit = scaling_study(&points, model(sc.model), opts.exec, |eps, rho| {
        let green = &greens.iter().find(|g| g.0 == eps).expect("green built for every eps").1;
        let k = points.iter().position(|p| *p == (eps, rho)).expect("point is listed");
        l1_norm(green, &NormRequest::new(sc.integrand, regions[k]).with_tol(opts.tol()).with_exec(opts.exec))
    })?;
    Ok(fit)
}

pub fn run(config: &RunConfig, opts: &Options, rep: &mut Reporter) -> Result<(), CliError> {
    if config.scaling.is_empty() {
        return Err(CliError::Config("scaling: no [[scaling]] studies configured".into()));
    }
    let mut studies = Vec::new();
    for sc in &config.scaling {
        let fit = study(config, sc, opts)?;
        if let Some(range) = sc.slope {
            rep.check(Check::within(format!("{}: fitted slope", sc.name), fit.slope, range));
        }
        if let Some(max) = sc.max_shape_spread {
            rep.check(Check::at_most(format!("{}: spread of norm over model shape", sc.name), fit.shape_spread, max));
        }
        if let Some(max) = sc.max_rel_residual {
            rep.check(Check::at_most(format!("{}: max relative fit residual", sc.name), fit.max_rel_residual, max));
        }
        if opts.svg {
            let by_rho = matches!(fit.model, ScalingModel::LnRho { .. });
            let x = |s: &cdgreen::quadrature::Sample| if by_rho { s.rho.unwrap_or(f64::NAN) } else { s.eps };
            let samples: Vec<(f64, f64)> = fit.samples.iter().map(|s| (x(s), s.value)).collect();
            let curve: Vec<(f64, f64)> = fit.samples.iter().map(|s| (x(s), predict(&fit, s.eps, s.rho))).collect();
            let title = format!("{} ({}, {} model)", sc.name, sc.integrand.name(), fit.model.name());
            let text = svg::line_chart(&title, if by_rho { "rho" } else { "eps" }, &samples, &curve);
            rep.write(&format!("scaling_{}.svg", sc.name), |w| std::io::Write::write_all(w, text.as_bytes()))?;
        }
        studies.push(Study { name: &sc.name, integrand: sc.integrand.name(), variant: config.green.variant.name(), fit });
    }

    let hash = rep.hash().to_string();
    rep.write_json(
        "scaling.json",
        &serde_json::json!({ "version": cdgreen::VERSION, "config_sha256": hash, "studies": studies }),
    )?;
    if opts.format == Format::Csv {
        let mut text = Vec::new();
        for s in &studies {
            for p in &s.fit.samples {
                text.push(vec![
                    s.name.to_string(),
                    s.integrand.to_string(),
                    fmt_f64(p.eps),
                    opt_cell(p.rho),
                    fmt_f64(p.value),
                    fmt_f64(p.err),
                    p.cells.to_string(),
                ]);
            }
        }
        let header = ["study", "integrand", "epsilon", "rho", "norm", "err_estimate", "cells"];
        rep.write("scaling.csv", |w| write_csv_text(w, &header, &text))?;
        rep.write_sidecar("scaling.csv", serde_json::json!({ "variant": config.green.variant.name() }))?;
    }
    Ok(())
}
