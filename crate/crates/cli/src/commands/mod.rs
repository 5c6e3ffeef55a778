pub mod eval;
pub mod fd;
pub mod norms;
pub mod residual;
pub mod scaling;
pub mod selfcheck;

use crate::error::CliError;

pub(crate) fn nonempty_eps(list: &[f64], what: &str) -> Result<(), CliError> {
    if list.is_empty() {
        return Err(CliError::Usage(format!("{what}: the epsilon list is empty")));
    }
    if let Some(e) = list.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(CliError::Usage(format!("{what}: epsilon must be positive and finite, got {e}")));
    }
    Ok(())
}

/// `max / min - 1` of positive values.
pub(crate) fn spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values.into_iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    hi / lo - 1.0
}

pub(crate) fn opt_cell(v: Option<f64>) -> String {
    v.map(cdgreen::export::fmt_f64).unwrap_or_default()
}
