use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Which end of `[0, 1]` carries the exponential layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerSide {
    /// Outflow boundary of the primal problem, `x = 0`.
    #[default]
    Low,
    /// Outflow boundary of the adjoint problem, `xi = 1`.
    High,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshKind {
    Uniform,
    Shishkin { eps: f64, alpha: f64, tau_x: f64, tau_y: f64, side: LayerSide },
    Custom,
}

/// Tensor-product mesh of `[0,1]^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorMesh {
    x: Vec<f64>,
    y: Vec<f64>,
    kind: MeshKind,
}

fn check_knots(k: &[f64], axis: &str) -> Result<()> {
    if k.len() < 3 {
        return domain(format!("{axis}-axis needs at least 2 cells"));
    }
    if k[0] != 0.0 || *k.last().unwrap() != 1.0 {
        return domain(format!("{axis}-knots must start at 0 and end at 1"));
    }
    if let Some(w) = k.windows(2).find(|w| !(w[1] > w[0])) {
        return domain(format!("{axis}-knots not strictly increasing near {}", w[0]));
    }
    Ok(())
}

/// `n` equal cells on `[a, b]`, excluding the right end.
fn fill(out: &mut Vec<f64>, a: f64, b: f64, n: usize) {
    out.extend((0..n).map(|i| a + (b - a) * i as f64 / n as f64));
}

/// Knots of a piecewise-uniform axis with `counts[i]` cells on
/// `[breaks[i], breaks[i+1]]`.
pub fn piecewise_axis(breaks: &[f64], counts: &[usize]) -> Result<Vec<f64>> {
    if breaks.len() != counts.len() + 1 || counts.iter().any(|&c| c == 0) {
        return domain("piecewise axis needs one positive count per interval");
    }
    let mut k = Vec::with_capacity(counts.iter().sum::<usize>() + 1);
    for (w, &n) in breaks.windows(2).zip(counts) {
        fill(&mut k, w[0], w[1], n);
    }
    k.push(*breaks.last().unwrap());
    check_knots(&k, "piecewise")?;
    Ok(k)
}

pub fn uniform_axis(n: usize) -> Vec<f64> {
    let mut k = Vec::with_capacity(n + 1);
    fill(&mut k, 0.0, 1.0, n);
    k.push(1.0);
    k
}

/// Axis refined in `[0, tau]`, `[1 - tau, 1]` or both, with half the cells
/// in the fine part(s).
pub fn shishkin_axis(n: usize, tau: f64, side: LayerSide) -> Result<Vec<f64>> {
    match side {
        LayerSide::Low => piecewise_axis(&[0.0, tau, 1.0], &[n / 2, n - n / 2]),
        LayerSide::High => piecewise_axis(&[0.0, 1.0 - tau, 1.0], &[n - n / 2, n / 2]),
        LayerSide::Both => piecewise_axis(&[0.0, tau, 1.0 - tau, 1.0], &[n / 4, n - 2 * (n / 4), n / 4]),
    }
}

impl TensorMesh {
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return domain(format!("mesh needs at least 2 cells per axis, got {n}"));
        }
        Ok(TensorMesh { x: uniform_axis(n), y: uniform_axis(n), kind: MeshKind::Uniform })
    }

    /// Shishkin mesh with `n` cells per axis: exponential layer of width
    /// `min(1/2, 2 eps/alpha ln n)` in `x`, parabolic layers of width
    /// `min(1/4, 2 sqrt(eps) ln n)` at `y = 0` and `y = 1`.
    pub fn shishkin(n: usize, eps: f64, alpha: f64, side: LayerSide) -> Result<Self> {
        if n < 8 || n % 4 != 0 {
            return domain(format!("Shishkin mesh needs n >= 8 divisible by 4, got {n}"));
        }
        if !(eps > 0.0 && eps <= 1.0) || !(alpha > 0.0) {
            return domain(format!("Shishkin mesh needs eps in (0,1] and alpha > 0 (eps={eps}, alpha={alpha})"));
        }
        let ln_n = (n as f64).ln();
        let cap_x = if side == LayerSide::Both { 0.25 } else { 0.5 };
        let tau_x = (2.0 * eps / alpha * ln_n).min(cap_x);
        let tau_y = (2.0 * eps.sqrt() * ln_n).min(0.25);
        Ok(TensorMesh {
            x: shishkin_axis(n, tau_x, side)?,
            y: shishkin_axis(n, tau_y, LayerSide::Both)?,
            kind: MeshKind::Shishkin { eps, alpha, tau_x, tau_y, side },
        })
    }

    pub fn from_knots(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_knots(&x, "x")?;
        check_knots(&y, "y")?;
        Ok(TensorMesh { x, y, kind: MeshKind::Custom })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn kind(&self) -> &MeshKind {
        &self.kind
    }

    /// Number of cells along x and y.
    pub fn cells(&self) -> (usize, usize) {
        (self.x.len() - 1, self.y.len() - 1)
    }

    /// Index of the knot nearest to `t`.
    pub fn nearest(knots: &[f64], t: f64) -> usize {
        let i = knots.partition_point(|&k| k < t);
        if i == 0 {
            0
        } else if i == knots.len() || (t - knots[i - 1]) <= (knots[i] - t) {
            i - 1
        } else {
            i
        }
    }

    /// Nearest interior node to `(x, y)`.
    pub fn nearest_interior(&self, x: f64, y: f64) -> (usize, usize) {
        let (nx, ny) = self.cells();
        (
            Self::nearest(&self.x, x).clamp(1, nx - 1),
            Self::nearest(&self.y, y).clamp(1, ny - 1),
        )
    }
}

/// Width of the dual cell of knot `i` (half cells at the ends).
pub(crate) fn dual_width(k: &[f64], i: usize) -> f64 {
    let left = if i > 0 { k[i] - k[i - 1] } else { 0.0 };
    let right = if i + 1 < k.len() { k[i + 1] - k[i] } else { 0.0 };
    0.5 * (left + right)
}
