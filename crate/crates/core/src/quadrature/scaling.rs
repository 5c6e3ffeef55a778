//! Least-squares fits of norm sequences against the model shapes in `eps`
//! and `rho`.

use serde::{Deserialize, Serialize};

use super::NormResult;
use crate::error::{Error, Result};
use crate::par::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ScalingModel {
    /// `v = c eps^slope`, fitted in log-log coordinates.
    Power,
    /// `v = c0 + c1 |ln eps|`.
    LogEps,
    /// `v = c eps^-1 (ln(2 + eps/rho) [+ |ln eps|])`.
    LnRho { extra_log_eps: bool },
}

impl ScalingModel {
    pub fn name(&self) -> &'static str {
        match self {
            ScalingModel::Power => "power",
            ScalingModel::LogEps => "log_eps",
            ScalingModel::LnRho { extra_log_eps: false } => "ln_rho",
            ScalingModel::LnRho { extra_log_eps: true } => "ln_rho_log_eps",
        }
    }

    /// Reference shape the samples are normalised by when measuring spread.
    fn shape(&self, s: &Sample, slope: f64) -> f64 {
        match *self {
            ScalingModel::Power => s.eps.powf(slope),
            ScalingModel::LogEps => 1.0 + s.eps.ln().abs(),
            ScalingModel::LnRho { extra_log_eps } => {
                let rho = s.rho.unwrap_or(f64::NAN);
                let extra = if extra_log_eps { s.eps.ln().abs() } else { 0.0 };
                ((2.0 + s.eps / rho).ln() + extra) / s.eps
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub eps: f64,
    pub rho: Option<f64>,
    pub value: f64,
    pub err: f64,
    pub cells: usize,
}

impl Sample {
    pub fn from_result(eps: f64, rho: Option<f64>, r: &NormResult) -> Self {
        Sample { eps, rho, value: r.value, err: r.abs_error_estimate, cells: r.cells_used }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub model: ScalingModel,
    pub samples: Vec<Sample>,
    /// `[ln c, slope]`, `[c0, c1]` or `[c]` depending on the model.
    pub params: Vec<f64>,
    /// Exponent for the power model, `c1` for the log model, `c` otherwise.
    pub slope: f64,
    /// Largest `|v / fit - 1|` over the samples.
    pub max_rel_residual: f64,
    /// `max/min - 1` of the samples divided by the model shape.
    pub shape_spread: f64,
}

fn least_squares_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Fits `model` to the samples (sorted by `eps`, then `rho`).
pub fn fit(model: ScalingModel, mut samples: Vec<Sample>) -> Result<ScalingFit> {
    if samples.len() < 3 {
        return Err(Error::Domain(format!("a scaling fit needs at least 3 samples, got {}", samples.len())));
    }
    if let Some(s) = samples.iter().find(|s| !(s.value > 0.0 && s.value.is_finite() && s.eps > 0.0)) {
        return Err(Error::Domain(format!("sample {s:?} must have positive finite value and eps")));
    }
    samples.sort_by(|a, b| {
        a.eps.total_cmp(&b.eps).then(a.rho.unwrap_or(0.0).total_cmp(&b.rho.unwrap_or(0.0)))
    });

    let (params, predict): (Vec<f64>, Box<dyn Fn(&Sample) -> f64>) = match model {
        ScalingModel::Power => {
            let xs: Vec<f64> = samples.iter().map(|s| s.eps.ln()).collect();
            let ys: Vec<f64> = samples.iter().map(|s| s.value.ln()).collect();
            if xs.first() == xs.last() {
                return Err(Error::Domain("power fit needs distinct eps values".into()));
            }
            let (c, k) = least_squares_line(&xs, &ys);
            (vec![c, k], Box::new(move |s: &Sample| (c + k * s.eps.ln()).exp()))
        }
        ScalingModel::LogEps => {
            let xs: Vec<f64> = samples.iter().map(|s| s.eps.ln().abs()).collect();
            let ys: Vec<f64> = samples.iter().map(|s| s.value).collect();
            if xs.first() == xs.last() {
                return Err(Error::Domain("log fit needs distinct eps values".into()));
            }
            let (c0, c1) = least_squares_line(&xs, &ys);
            (vec![c0, c1], Box::new(move |s: &Sample| c0 + c1 * s.eps.ln().abs()))
        }
        ScalingModel::LnRho { .. } => {
            if samples.iter().any(|s| !s.rho.is_some_and(|r| r > 0.0)) {
                return Err(Error::Domain("ln-rho fit needs a positive rho on every sample".into()));
            }
            // relative least squares: minimise sum ((v - c s) / v)^2
            let (num, den) = samples.iter().fold((0.0, 0.0), |(n, d), s| {
                let w = model.shape(s, 0.0) / s.value;
                (n + w, d + w * w)
            });
            let c = num / den;
            (vec![c], Box::new(move |s: &Sample| c * model.shape(s, 0.0)))
        }
    };

    let max_rel_residual = samples.iter().map(|s| (s.value / predict(s) - 1.0).abs()).fold(0.0, f64::max);
    let slope = match model {
        ScalingModel::Power | ScalingModel::LogEps => params[1],
        ScalingModel::LnRho { .. } => params[0],
    };
    let normalised: Vec<f64> = samples.iter().map(|s| s.value / model.shape(s, slope)).collect();
    let hi = normalised.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = normalised.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ScalingFit { model, samples, params, slope, max_rel_residual, shape_spread: hi / lo - 1.0 })
}

/// Evaluates `norm(eps, rho)` at every point and fits `model`.
///
/// Sweeps over `eps` must span at least two decades; sweeps over `rho` at
/// fixed `eps` need three distinct radii.
pub fn scaling_study<F>(points: &[(f64, Option<f64>)], model: ScalingModel, exec: Execution, norm: F) -> Result<ScalingFit>
where
    F: Fn(f64, Option<f64>) -> Result<NormResult> + Sync + Send,
{
    if points.len() < 3 {
        return Err(Error::Domain("a scaling study needs at least 3 points".into()));
    }
    match model {
        ScalingModel::Power | ScalingModel::LogEps => {
            let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            if !(hi / lo >= 100.0 * (1.0 - 1e-12)) {
                return Err(Error::Domain(format!("eps range [{lo}, {hi}] spans less than two decades")));
            }
        }
        ScalingModel::LnRho { .. } => {
            let mut rhos: Vec<f64> = points.iter().filter_map(|p| p.1).collect();
            rhos.sort_by(f64::total_cmp);
            rhos.dedup();
            if rhos.len() < 3 {
                return Err(Error::Domain("a rho sweep needs three distinct radii".into()));
            }
        }
    }
    let results = exec.try_map(points, |&(eps, rho)| norm(eps, rho).map(|r| Sample::from_result(eps, rho, &r)))?;
    fit(model, results)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(eps: f64, rho: Option<f64>, value: f64) -> Sample {
        Sample { eps, rho, value, err: 0.0, cells: 0 }
    }

    #[test]
    fn recovers_exact_power() {
        let samples = [1e-2, 1e-3, 1e-4].map(|e: f64| s(e, None, 3.0 * e.powf(-0.5))).to_vec();
        let f = fit(ScalingModel::Power, samples).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!(f.max_rel_residual < 1e-12);
        assert!(f.shape_spread < 1e-12);
        assert!((f.params[0] - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn recovers_log_law() {
        let samples = [1e-1, 1e-3, 1e-2].map(|e: f64| s(e, None, 2.0 + 0.5 * e.ln().abs())).to_vec();
        let f = fit(ScalingModel::LogEps, samples).unwrap();
        assert!((f.params[0] - 2.0).abs() < 1e-12 && (f.slope - 0.5).abs() < 1e-12);
        // samples come back sorted
        assert!(f.samples.windows(2).all(|w| w[0].eps <= w[1].eps));
    }

    #[test]
    fn ln_rho_fit() {
        let eps = 0.01;
        let samples = [eps / 8.0, eps / 2.0, 2.0 * eps]
            .map(|r| s(eps, Some(r), 7.0 * (2.0 + eps / r).ln() / eps))
            .to_vec();
        let f = fit(ScalingModel::LnRho { extra_log_eps: false }, samples).unwrap();
        assert!((f.slope - 7.0).abs() < 1e-10);
        assert!(f.max_rel_residual < 1e-12);
    }

    #[test]
    fn rejects_short_or_narrow_inputs() {
        assert!(fit(ScalingModel::Power, vec![s(0.1, None, 1.0), s(0.01, None, 2.0)]).is_err());
        let narrow = [(0.1, None), (0.05, None), (0.02, None)];
        let r = scaling_study(&narrow, ScalingModel::Power, Execution::Sequential, |_, _| unreachable!());
        assert!(r.is_err());
        let no_rho = vec![s(0.1, None, 1.0), s(0.1, None, 2.0), s(0.1, None, 3.0)];
        assert!(fit(ScalingModel::LnRho { extra_log_eps: true }, no_rho).is_err());
    }
}
