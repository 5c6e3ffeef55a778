use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::mesh::TensorMesh;
use super::system::{assemble, discrete_green, solve, BoundaryCondition, DiscreteField, LinearSystem, Operator};
use crate::coeff::CoefficientField;
use crate::error::{domain, Result};
use crate::image_green::ImageGreen;
use crate::par::{compensated_sum, Execution};
use crate::fundamental::DerivKind;

/// Outcome of comparing `u_h(probe)` with `sum G_h f |cell|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepresentationCheck {
    pub probe: (f64, f64),
    pub direct: f64,
    pub represented: f64,
    pub rel_diff: f64,
}

/// Solves the primal problem for `f` and compares its value at the node
/// nearest `probe` with the discrete representation formula.
pub fn representation_check(
    field: &CoefficientField,
    eps: f64,
    mesh: Arc<TensorMesh>,
    bc: BoundaryCondition,
    probe: (f64, f64),
    f: impl Fn(f64, f64) -> f64,
    exec: Execution,
) -> Result<RepresentationCheck> {
    let primal = assemble(field, eps, mesh.clone(), Operator::Primal, bc, exec)?;
    let adjoint = assemble(field, eps, mesh.clone(), Operator::Adjoint, bc, exec)?;
    let node = mesh.nearest_interior(probe.0, probe.1);
    let rhs = DiscreteField::from_fn(mesh.clone(), bc, f);
    let u = solve(&primal, &rhs)?;
    let g = discrete_green(&adjoint, node)?;
    let direct = u.node(node.0, node.1);
    let represented =
        compensated_sum(g.values().iter().zip(rhs.values()).zip(adjoint.areas()).map(|((g, f), a)| g * f * a));
    let rel_diff = (direct - represented).abs() / direct.abs().max(f64::MIN_POSITIVE);
    Ok(RepresentationCheck { probe: (mesh.x()[node.0], mesh.y()[node.1]), direct, represented, rel_diff })
}

/// `sum G_h |cell|` for the Green's function sourced at the node nearest `probe`.
pub fn green_mass(system: &LinearSystem, probe: (f64, f64)) -> Result<f64> {
    let g = discrete_green(system, system.mesh().nearest_interior(probe.0, probe.1))?;
    Ok(g.integral())
}

/// Right-hand side `f = d_x F1 + d_y F2` given through closures returning
/// `(F, dF)`.
#[derive(Clone)]
pub struct DivergenceData {
    pub label: String,
    pub f1: Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>,
    pub f2: Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>,
}

impl std::fmt::Debug for DivergenceData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DivergenceData").field("label", &self.label).finish()
    }
}

impl DivergenceData {
    pub fn zero() -> Self {
        DivergenceData {
            label: "zero".into(),
            f1: Arc::new(|_, _| (0.0, 0.0)),
            f2: Arc::new(|_, _| (0.0, 0.0)),
        }
    }

    /// `F1 = x`, `F2 = 0`.
    pub fn f1_linear() -> Self {
        DivergenceData { label: "F1=x".into(), f1: Arc::new(|x, _| (x, 1.0)), f2: Arc::new(|_, _| (0.0, 0.0)) }
    }

    /// `F1 = 0`, `F2 = sin(pi y)`.
    pub fn f2_sine() -> Self {
        use std::f64::consts::PI;
        DivergenceData {
            label: "F2=sin(pi y)".into(),
            f1: Arc::new(|_, _| (0.0, 0.0)),
            f2: Arc::new(|_, y| ((PI * y).sin(), PI * (PI * y).cos())),
        }
    }

    /// `F1 = 0`, `F2 = tanh((y - 1/2) / delta)`: a front of width `delta`.
    pub fn f2_front(delta: f64) -> Self {
        DivergenceData {
            label: format!("F2=tanh((y-1/2)/{delta:e})"),
            f1: Arc::new(|_, _| (0.0, 0.0)),
            f2: Arc::new(move |_, y| {
                let t = ((y - 0.5) / delta).tanh();
                (t, (1.0 - t * t) / delta)
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AprioriRow {
    pub eps: f64,
    pub cells: (usize, usize),
    pub u_max: f64,
    pub f1_max: f64,
    pub f2_max: f64,
    /// `(1 + |ln eps|) |F1| + eps^{-1/2} |F2|`.
    pub bound: f64,
    pub ratio: f64,
}

/// Solves `L u = d_x F1 + d_y F2` on `mesh_for(eps)` for each `eps` and
/// reports `|u|_inf` against the bound expression.
pub fn apriori_check(
    field: &CoefficientField,
    data: &DivergenceData,
    eps_list: &[f64],
    bc: BoundaryCondition,
    mesh_for: impl Fn(f64) -> Result<TensorMesh> + Sync + Send,
    exec: Execution,
) -> Result<Vec<AprioriRow>> {
    if eps_list.is_empty() {
        return domain("empty eps list");
    }
    let run = |&eps: &f64| -> Result<AprioriRow> {
        let mesh = Arc::new(mesh_for(eps)?);
        // inner assembly stays sequential; the sweep is the parallel level
        let sys = assemble(field, eps, mesh.clone(), Operator::Primal, bc, Execution::Sequential)?;
        let rhs = DiscreteField::from_fn(mesh.clone(), bc, |x, y| (data.f1)(x, y).1 + (data.f2)(x, y).1);
        let u = solve(&sys, &rhs)?;
        let mut f1_max = 0.0f64;
        let mut f2_max = 0.0f64;
        for &y in mesh.y() {
            for &x in mesh.x() {
                f1_max = f1_max.max((data.f1)(x, y).0.abs());
                f2_max = f2_max.max((data.f2)(x, y).0.abs());
            }
        }
        let bound = (1.0 + eps.ln().abs()) * f1_max + f2_max / eps.sqrt();
        let u_max = u.max_abs();
        let ratio = if bound > 0.0 { u_max / bound } else { 0.0 };
        Ok(AprioriRow { eps, cells: mesh.cells(), u_max, f1_max, f2_max, bound, ratio })
    };
    exec.try_map(eps_list, run)
}

/// Largest discrete total variation `sum |Gamma_{i+1} - Gamma_i|` over all
/// interior sources of the 1-D Green's function of `-eps d^2 + a d` with
/// homogeneous Dirichlet conditions on a uniform mesh of `n` cells.
pub fn gamma_1d_check(a: impl Fn(f64) -> f64 + Sync + Send, eps: f64, n: usize, exec: Execution) -> Result<f64> {
    if n < 2 || !(eps > 0.0) {
        return domain(format!("gamma_1d_check needs n >= 2 and eps > 0 (n={n}, eps={eps})"));
    }
    let h = 1.0 / n as f64;
    let m = n - 1;
    let av: Vec<f64> = (1..n).map(|i| a(i as f64 * h)).collect();
    if let Some(v) = av.iter().find(|v| !(**v > 0.0)) {
        return domain(format!("coefficient profile must be positive, found {v}"));
    }
    // tridiagonal rows: -d/h^2 (i-1), 2d/h^2 (i), -d/h^2 (i+1) plus a (G_i - G_{i-1})/h
    let d = eps / (h * h);
    let lower: Vec<f64> = av.iter().map(|a| -d - a / h).collect();
    let diag: Vec<f64> = av.iter().map(|a| 2.0 * d + a / h).collect();
    let upper = -d;
    let tv = exec.map_range(m, |s| {
        // Thomas algorithm; the matrix is a column-dominant M-matrix
        let mut c = vec![0.0; m];
        let mut g = vec![0.0; m];
        let mut denom = diag[0];
        c[0] = upper / denom;
        g[0] = if s == 0 { 1.0 / h / denom } else { 0.0 };
        for i in 1..m {
            denom = diag[i] - lower[i] * c[i - 1];
            c[i] = upper / denom;
            let rhs = if i == s { 1.0 / h } else { 0.0 };
            g[i] = (rhs - lower[i] * g[i - 1]) / denom;
        }
        for i in (0..m - 1).rev() {
            g[i] -= c[i] * g[i + 1];
        }
        let mut prev = 0.0;
        let mut total = 0.0;
        for &v in g.iter().chain(std::iter::once(&0.0)) {
            total += (v - prev).abs();
            prev = v;
        }
        total
    });
    Ok(tv.into_iter().fold(0.0, f64::max))
}

/// Relative L1 difference between two nodal fields, weighted by the dual
/// cells of `coarse`, with the fine field interpolated bilinearly.
pub fn relative_l1_difference(coarse: &DiscreteField, fine: &DiscreteField, skip: Option<(usize, usize)>) -> f64 {
    let (xs, ys) = (coarse.mesh().x().to_vec(), coarse.mesh().y().to_vec());
    let mut num = Vec::new();
    let mut den = Vec::new();
    let areas = coarse.areas();
    let l = super::system::Layout::new(coarse.mesh(), coarse.bc());
    for (k, (&c, a)) in coarse.values().iter().zip(&areas).enumerate() {
        let (i, j) = l.node(k);
        if Some((i, j)) == skip {
            continue;
        }
        let f = fine.interpolate(xs[i], ys[j]);
        num.push((c - f).abs() * a);
        den.push(f.abs() * a);
    }
    compensated_sum(num) / compensated_sum(den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageComparison {
    pub cells: (usize, usize),
    pub source: (f64, f64),
    pub rel_l1: f64,
    /// Largest nodal value of `G_h` and where it sits.
    pub peak: (f64, f64),
}

/// Relative nodal L1 difference between the discrete Green's function and
/// an image approximation with the same singular point, excluding the
/// source node.
pub fn compare_with_image(g_h: &DiscreteField, source: (usize, usize), image: &ImageGreen) -> Result<ImageComparison> {
    let (xs, ys) = (g_h.mesh().x(), g_h.mesh().y());
    let s = (xs[source.0], ys[source.1]);
    if (image.singular().0 - s.0).abs() > 1e-14 || (image.singular().1 - s.1).abs() > 1e-14 {
        return domain("image approximation and discrete Green's function have different sources");
    }
    let l = super::system::Layout::new(g_h.mesh(), g_h.bc());
    let areas = g_h.areas();
    let mut num = Vec::new();
    let mut den = Vec::new();
    for (k, (&g, a)) in g_h.values().iter().zip(&areas).enumerate() {
        let (i, j) = l.node(k);
        if (i, j) == source {
            continue;
        }
        let v = image.eval((xs[i], ys[j]), DerivKind::Value)?;
        num.push((g - v).abs() * a);
        den.push(v.abs() * a);
    }
    let (pi, pj) = g_h.argmax();
    Ok(ImageComparison {
        cells: g_h.mesh().cells(),
        source: s,
        rel_l1: compensated_sum(num) / compensated_sum(den),
        peak: (xs[pi], ys[pj]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_constant_coefficient_bound() {
        let tv = gamma_1d_check(|_| 1.0, 0.5, 64, Execution::Sequential).unwrap();
        assert!(tv > 0.0 && tv <= 2.0 * 1.0001, "{tv}");
        assert!(gamma_1d_check(|_| 0.0, 0.5, 64, Execution::Sequential).is_err());
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let field = CoefficientField::constant(1.0, 0.0).unwrap();
        let rows = apriori_check(
            &field,
            &DivergenceData::zero(),
            &[0.1],
            BoundaryCondition::Dirichlet,
            |_| TensorMesh::uniform(16),
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(rows[0].u_max, 0.0);
        assert_eq!(rows[0].ratio, 0.0);
    }
}
