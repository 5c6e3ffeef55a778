use std::sync::Arc;

use cdgreen::export::fmt_f64;
use cdgreen::fdsolver::{
    apriori_check, assemble, compare_with_image, discrete_green, gamma_1d_check, piecewise_axis, representation_check,
    shishkin_axis, AprioriRow, BoundaryCondition, DivergenceData, LayerSide, Operator, TensorMesh,
};
use cdgreen::{CoefficientField, ImageGreen, ImageGreenSpec, Variant};
use serde::Serialize;

use super::{nonempty_eps, spread};
use crate::config::{DataConfig, FdConfig, MeshConfig, RunConfig};
use crate::error::CliError;
use crate::report::{Check, Reporter};
use crate::{Format, Options};

/// One measured quantity; the CSV shares the column names of the norm tables.
#[derive(Debug, Clone, Serialize)]
struct Row {
    check: String,
    bc: Option<BoundaryCondition>,
    epsilon: f64,
    rho: Option<f64>,
    norm: f64,
    err_estimate: Option<f64>,
    cells: usize,
    limit: Option<f64>,
    pass: Option<bool>,
    #[serde(skip)]
    n: usize,
    #[serde(skip)]
    gate: Option<Check>,
}

impl Row {
    fn new(check: &str, bc: Option<BoundaryCondition>, epsilon: f64, n: usize, norm: f64) -> Self {
        Row {
            check: check.into(),
            bc,
            epsilon,
            rho: None,
            norm,
            err_estimate: None,
            cells: n * n,
            limit: None,
            pass: None,
            n,
            gate: None,
        }
    }

    /// Attaches a check built by `make(label, value)`.
    fn gated(mut self, make: impl FnOnce(String, f64) -> Check) -> Self {
        let bc = self.bc.map(|b| format!(" {b:?}")).unwrap_or_default();
        let eps = if self.epsilon.is_nan() { String::new() } else { format!(" eps={:e}", self.epsilon) };
        let c = make(format!("{}{bc}{eps} n={}", self.check, self.n), self.norm);
        self.limit = c.max.or(c.min);
        self.pass = Some(c.pass);
        self.gate = Some(c);
        self
    }

    fn cells_text(&self) -> Vec<String> {
        let bc = match self.bc {
            Some(BoundaryCondition::Dirichlet) => "dirichlet",
            Some(BoundaryCondition::NeumannTopBottom) => "neumann_top_bottom",
            None => "",
        };
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        vec![
            self.check.clone(),
            bc.into(),
            if self.epsilon.is_nan() { String::new() } else { fmt_f64(self.epsilon) },
            opt(self.rho),
            fmt_f64(self.norm),
            opt(self.err_estimate),
            self.cells.to_string(),
            opt(self.limit),
            self.pass.map(|p| p.to_string()).unwrap_or_default(),
        ]
    }
}

pub fn mesh(kind: MeshConfig, n: usize, eps: f64, alpha: f64) -> Result<TensorMesh, CliError> {
    Ok(match kind {
        MeshConfig::Uniform => TensorMesh::uniform(n)?,
        MeshConfig::Shishkin => TensorMesh::shishkin(n, eps, alpha, LayerSide::Low)?,
        MeshConfig::ShishkinFront => {
            if n < 8 || n % 4 != 0 {
                return Err(CliError::Config(format!("fd: front mesh needs n >= 8 divisible by 4, got {n}")));
            }
            let w = (6.0 * eps.sqrt()).min(0.25);
            let y = piecewise_axis(&[0.0, 0.5 - w, 0.5 + w, 1.0], &[n / 4, n / 2, n / 4])?;
            let tau = (2.0 * eps / alpha * (n as f64).ln()).min(0.5);
            TensorMesh::from_knots(shishkin_axis(n, tau, LayerSide::Low)?, y)?
        }
    })
}

fn data(d: DataConfig, eps: f64) -> DivergenceData {
    match d {
        DataConfig::F1Linear => DivergenceData::f1_linear(),
        DataConfig::F2Sine => DivergenceData::f2_sine(),
        DataConfig::F2Front => DivergenceData::f2_front(eps.sqrt() / 4.0),
    }
}

fn data_name(d: DataConfig) -> &'static str {
    match d {
        DataConfig::F1Linear => "f1_linear",
        DataConfig::F2Sine => "f2_sine",
        DataConfig::F2Front => "f2_front",
    }
}

/// `|u_h|` normalised by the part of the bound the data drives.
fn normalised(d: DataConfig, r: &AprioriRow) -> f64 {
    match d {
        DataConfig::F1Linear => r.u_max / (1.0 + r.eps.ln().abs()),
        DataConfig::F2Sine | DataConfig::F2Front => r.u_max * r.eps.sqrt(),
    }
}

fn image_for(field: &CoefficientField, bc: BoundaryCondition, eps: f64, source: (f64, f64)) -> Result<ImageGreen, CliError> {
    let variant = match bc {
        BoundaryCondition::Dirichlet => Variant::BarSquare,
        BoundaryCondition::NeumannTopBottom => Variant::BarSquareNeumann,
    };
    Ok(ImageGreen::new(ImageGreenSpec { variant, field: field.clone(), eps }, source)?)
}

fn run_checks(fc: &FdConfig, field: &CoefficientField, opts: &Options, rows: &mut Vec<Row>) -> Result<(), CliError> {
    let alpha = field.alpha();
    let probe = (fc.probe[0], fc.probe[1]);
    let cases: Vec<(BoundaryCondition, f64)> = fc.bc.iter().flat_map(|&bc| fc.epsilons.iter().map(move |&e| (bc, e))).collect();

    if let Some(mc) = &fc.mass {
        let limit = (1.0 + mc.slack) / alpha;
        let out = opts.exec.try_map(&cases, |&(bc, eps)| -> Result<Vec<Row>, CliError> {
            let m = Arc::new(mesh(fc.mesh, fc.n, eps, alpha)?);
            let sys = assemble(field, eps, m.clone(), Operator::Adjoint, bc, cdgreen::Execution::Sequential)?;
            let g = discrete_green(&sys, m.nearest_interior(probe.0, probe.1))?;
            let mass = g.integral();
            Ok(vec![
                Row::new("green_mass", Some(bc), eps, fc.n, mass).gated(|l, v| Check::at_most(l, v, limit)),
                Row::new("green_min", Some(bc), eps, fc.n, g.min()).gated(|l, v| Check::at_least(l, v, 0.0)),
            ])
        })?;
        rows.extend(out.into_iter().flatten());
    }

    if let Some(rc) = &fc.representation {
        let out = opts.exec.try_map(&cases, |&(bc, eps)| -> Result<Row, CliError> {
            let m = Arc::new(mesh(fc.mesh, fc.n, eps, alpha)?);
            let f = |x: f64, y: f64| 1.0 + x * y + (3.0 * x).sin();
            let r = representation_check(field, eps, m, bc, probe, f, cdgreen::Execution::Sequential)?;
            Ok(Row::new("representation_rel_diff", Some(bc), eps, fc.n, r.rel_diff).gated(|l, v| Check::at_most(l, v, rc.tol)))
        })?;
        rows.extend(out);
    }

    if let Some(cc) = &fc.compare {
        for &(bc, eps) in &cases {
            let mut sizes = cc.coarser.clone();
            sizes.push(fc.n);
            let diffs = opts.exec.try_map(&sizes, |&n| -> Result<(f64, (f64, f64), (f64, f64)), CliError> {
                let m = Arc::new(mesh(fc.mesh, n, eps, alpha)?);
                let sys = assemble(field, eps, m.clone(), Operator::Adjoint, bc, cdgreen::Execution::Sequential)?;
                let src = m.nearest_interior(probe.0, probe.1);
                let g = discrete_green(&sys, src)?;
                let s = (m.x()[src.0], m.y()[src.1]);
                let c = compare_with_image(&g, src, &image_for(field, bc, eps, s)?)?;
                Ok((c.rel_l1, c.peak, s))
            })?;
            let (fine, peak, src) = *diffs.last().expect("at least the target mesh");
            rows.push(Row::new("image_rel_l1", Some(bc), eps, fc.n, fine).gated(|l, v| Check::at_most(l, v, cc.tol)));
            for (&n, d) in cc.coarser.iter().zip(&diffs) {
                rows.push(Row::new("image_rel_l1_coarse", Some(bc), eps, n, d.0).gated(|l, v| Check::at_least(l, v, fine)));
            }
            // peak sits at or just downstream of the source node
            let h = 4.0 / fc.n as f64;
            let ok = peak.0 >= src.0 && peak.0 - src.0 <= h && (peak.1 - src.1).abs() <= h;
            let row = Row::new("peak_downstream_of_source", Some(bc), eps, fc.n, peak.0 - src.0);
            rows.push(row.gated(|l, _| Check::holds(l, ok)));
        }
    }

    if let Some(ac) = &fc.apriori {
        let bc = fc.bc.first().copied().unwrap_or_default();
        for (d, gated) in ac.data.iter().map(|d| (*d, true)).chain(ac.informational.iter().map(|d| (*d, false))) {
            let mut vals = Vec::new();
            for &eps in &fc.epsilons {
                let out = apriori_check(field, &data(d, eps), &[eps], bc, |e| mesh(fc.mesh, fc.n, e, alpha).map_err(to_lib), opts.exec)?;
                let v = normalised(d, &out[0]);
                vals.push(v);
                rows.push(Row::new(&format!("apriori_{}_normalised", data_name(d)), Some(bc), eps, fc.n, v));
            }
            let ratio = spread(vals.iter().copied()) + 1.0;
            let row = Row::new(&format!("apriori_{}_max_over_min", data_name(d)), Some(bc), f64::NAN, fc.n, ratio);
            rows.push(if gated { row.gated(|l, v| Check::at_most(l, v, ac.max_spread)) } else { row });
        }
    }

    if let Some(gc) = &fc.gamma {
        let jobs: Vec<(f64, f64)> = gc.a.iter().flat_map(|&a| fc.epsilons.iter().map(move |&e| (a, e))).collect();
        let out = opts.exec.try_map(&jobs, |&(a, eps)| -> Result<Row, CliError> {
            let tv = gamma_1d_check(move |_| a, eps, gc.n, cdgreen::Execution::Sequential)?;
            let limit = 2.0 / a * (1.0 + gc.slack);
            let mut row = Row::new(&format!("gamma_total_variation_a={a}"), None, eps, gc.n, tv);
            row.cells = gc.n;
            Ok(row.gated(|l, v| Check::at_most(l, v, limit)))
        })?;
        rows.extend(out);
    }
    Ok(())
}

fn to_lib(e: CliError) -> cdgreen::Error {
    match e {
        CliError::Compute(e) => e,
        other => cdgreen::Error::Domain(other.to_string()),
    }
}

pub fn run(config: &RunConfig, opts: &Options, rep: &mut Reporter) -> Result<(), CliError> {
    let fc = config.fd.as_ref().ok_or_else(|| CliError::Config("fd: missing [fd] section".into()))?;
    nonempty_eps(&fc.epsilons, "fd")?;
    if fc.bc.is_empty() {
        return Err(CliError::Usage("fd: the boundary-condition list is empty".into()));
    }
    let field = config.green.coefficients.field()?;
    let mut rows = Vec::new();
    run_checks(fc, &field, opts, &mut rows)?;

    for r in &rows {
        if let Some(c) = &r.gate {
            rep.check(c.clone());
        }
    }
    match opts.format {
        Format::Csv => {
            let text: Vec<Vec<String>> = rows.iter().map(Row::cells_text).collect();
            let header = ["check", "bc", "epsilon", "rho", "norm", "err_estimate", "cells", "limit", "pass"];
            rep.write("fd.csv", |w| cdgreen::export::write_csv_text(w, &header, &text))?;
            rep.write_sidecar("fd.csv", serde_json::json!({ "coefficients": field.label(), "mesh": fc.mesh, "n": fc.n }))?;
        }
        Format::Json => {
            let hash = rep.hash().to_string();
            rep.write_json("fd.json", &serde_json::json!({ "config_sha256": hash, "rows": rows }))?;
        }
    }
    Ok(())
}
