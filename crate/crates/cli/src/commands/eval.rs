use cdgreen::export::{write_grid_csv, GridMetadata};
use cdgreen::image_green::{sample_grid, GridSpec};
use cdgreen::DerivKind;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{Check, Reporter};
use crate::svg;
use crate::{Format, Options};

pub fn run(config: &RunConfig, opts: &Options, rep: &mut Reporter) -> Result<(), CliError> {
    let ec = match &config.eval {
        Some(ec) => ec.clone(),
        None => RunConfig::fig1().eval.expect("fig1 has an eval section"),
    };
    if ec.nx == 0 || ec.ny == 0 {
        return Err(CliError::Usage("eval: grid needs at least one point per axis".into()));
    }
    let green = config.green.build(config.green.epsilon)?;
    let grid = GridSpec { nx: ec.nx, ny: ec.ny, xi: (ec.xi[0], ec.xi[1]), eta: (ec.eta[0], ec.eta[1]) };
    let samples = sample_grid(&green, &grid, ec.kind, opts.exec)?;
    let meta = GridMetadata::new(&green, &grid, ec.kind);

    match opts.format {
        Format::Csv => {
            rep.write("grid.csv", |w| write_grid_csv(w, &samples))?;
            rep.write_sidecar("grid.csv", serde_json::to_value(&meta).expect("metadata serializes"))?;
        }
        Format::Json => {
            let hash = rep.hash().to_string();
            rep.write_json("grid.json", &json!({ "metadata": meta, "config_sha256": hash, "samples": samples }))?;
        }
    }
    if opts.svg {
        let values: Vec<f64> = samples.iter().map(|s| s[2]).collect();
        let title = format!("{} {} eps={:e}", meta.variant, meta.kind, meta.eps);
        let text = svg::heatmap(&values, grid.nx, grid.ny, opts.scale, &title);
        rep.write("grid.svg", |w| std::io::Write::write_all(w, text.as_bytes()))?;
    }

    if ec.wake_check {
        let (x, y) = green.singular();
        let hx = if grid.nx > 1 { (grid.xi.1 - grid.xi.0) / (grid.nx - 1) as f64 } else { 0.0 };
        let hy = if grid.ny > 1 { (grid.eta.1 - grid.eta.0) / (grid.ny - 1) as f64 } else { 0.0 };
        let peak = samples.iter().max_by(|a, b| a[2].total_cmp(&b[2])).expect("grid is nonempty");
        let off = ((peak[0] - x).abs() / hx.max(f64::MIN_POSITIVE)).max((peak[1] - y).abs() / hy.max(f64::MIN_POSITIVE));
        rep.check(Check::at_most("peak distance from the source in grid cells", off, 1.0));
        let down = green.eval((x + 0.1, y), DerivKind::Value)?;
        let across = green.eval((x, y + 0.1), DerivKind::Value)?;
        rep.check(Check::at_least("value 0.1 downstream over value 0.1 across", down / across, 1.0));
    }
    if let Some(max) = ec.max_mass {
        // trapezoidal weights on the inclusive grid
        let w = |i: usize, n: usize, h: f64| if n > 1 && (i == 0 || i == n - 1) { 0.5 * h } else { h };
        let hx = (grid.xi.1 - grid.xi.0) / (grid.nx.max(2) - 1) as f64;
        let hy = (grid.eta.1 - grid.eta.0) / (grid.ny.max(2) - 1) as f64;
        let mass = cdgreen::par::compensated_sum(
            samples.iter().enumerate().map(|(k, s)| s[2].abs() * w(k % grid.nx, grid.nx, hx) * w(k / grid.nx, grid.ny, hy)),
        );
        rep.check(Check::at_most("grid sum of |value| times cell area", mass, max * (1.0 + opts.tol())));
    }
    Ok(())
}
