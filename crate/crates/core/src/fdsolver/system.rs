use std::sync::{Arc, OnceLock};

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use serde::{Deserialize, Serialize};

use super::mesh::{dual_width, TensorMesh};
use crate::coeff::CoefficientField;
use crate::error::{domain, Error, Result};
use crate::par::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    #[default]
    Dirichlet,
    /// Dirichlet at `x = 0, 1`, homogeneous Neumann at `y = 0, 1`.
    NeumannTopBottom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    /// `-eps (u_xx + u_yy) - (a u)_x + b u`
    Primal,
    /// `-eps (v_xx + v_yy) + a v_x + b v`
    Adjoint,
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in rows {
            for (c, v) in r {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseMatrix { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut rows = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                rows[j].push((i, v));
            }
        }
        SparseMatrix::from_rows(rows)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            t.extend(self.row(i).map(|(j, v)| Triplet::new(i, j, v)));
        }
        SparseColMat::try_new_from_triplets(self.n, self.n, &t).map_err(|e| Error::Solver(format!("{e:?}")))
    }
}

/// Unknown layout on a tensor mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Layout {
    nx: usize,
    ny: usize,
    j_lo: usize,
    j_hi: usize,
}

impl Layout {
    pub fn new(mesh: &TensorMesh, bc: BoundaryCondition) -> Self {
        let (nx, ny) = mesh.cells();
        let (j_lo, j_hi) = match bc {
            BoundaryCondition::Dirichlet => (1, ny - 1),
            BoundaryCondition::NeumannTopBottom => (0, ny),
        };
        Layout { nx, ny, j_lo, j_hi }
    }

    pub fn len(&self) -> usize {
        (self.nx - 1) * (self.j_hi - self.j_lo + 1)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> Option<usize> {
        (i >= 1 && i < self.nx && j >= self.j_lo && j <= self.j_hi)
            .then(|| (j - self.j_lo) * (self.nx - 1) + (i - 1))
    }

    #[inline]
    pub fn node(&self, k: usize) -> (usize, usize) {
        (k % (self.nx - 1) + 1, k / (self.nx - 1) + self.j_lo)
    }
}

/// Nodal values on the unknowns of a mesh; zero on Dirichlet boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    mesh: Arc<TensorMesh>,
    bc: BoundaryCondition,
    values: Vec<f64>,
}

impl DiscreteField {
    pub fn from_fn(mesh: Arc<TensorMesh>, bc: BoundaryCondition, f: impl Fn(f64, f64) -> f64) -> Self {
        let l = Layout::new(&mesh, bc);
        let values = (0..l.len())
            .map(|k| {
                let (i, j) = l.node(k);
                f(mesh.x()[i], mesh.y()[j])
            })
            .collect();
        DiscreteField { mesh, bc, values }
    }

    pub fn from_values(mesh: Arc<TensorMesh>, bc: BoundaryCondition, values: Vec<f64>) -> Result<Self> {
        let n = Layout::new(&mesh, bc).len();
        if values.len() != n {
            return domain(format!("field has {} values, mesh has {n} unknowns", values.len()));
        }
        Ok(DiscreteField { mesh, bc, values })
    }

    pub fn zeros(mesh: Arc<TensorMesh>, bc: BoundaryCondition) -> Self {
        Self::from_fn(mesh, bc, |_, _| 0.0)
    }

    pub fn mesh(&self) -> &Arc<TensorMesh> {
        &self.mesh
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn layout(&self) -> Layout {
        Layout::new(&self.mesh, self.bc)
    }

    /// Value at mesh node `(i, j)`, zero on Dirichlet nodes.
    pub fn node(&self, i: usize, j: usize) -> f64 {
        self.layout().index(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Dual-cell areas of the unknowns.
    pub fn areas(&self) -> Vec<f64> {
        dual_areas(&self.mesh, self.bc)
    }

    /// `sum v_k |cell_k|`.
    pub fn integral(&self) -> f64 {
        crate::par::compensated_sum(self.values.iter().zip(self.areas()).map(|(v, a)| v * a))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Node holding the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let k = (0..self.values.len()).fold(0, |b, k| if self.values[k] > self.values[b] { k } else { b });
        self.layout().node(k)
    }

    /// Bilinear interpolant of the nodal values.
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        let (xs, ys) = (self.mesh.x(), self.mesh.y());
        let cell = |k: &[f64], t: f64| k.partition_point(|&v| v <= t).clamp(1, k.len() - 1) - 1;
        let (i, j) = (cell(xs, x), cell(ys, y));
        let s = ((x - xs[i]) / (xs[i + 1] - xs[i])).clamp(0.0, 1.0);
        let t = ((y - ys[j]) / (ys[j + 1] - ys[j])).clamp(0.0, 1.0);
        (1.0 - s) * (1.0 - t) * self.node(i, j)
            + s * (1.0 - t) * self.node(i + 1, j)
            + (1.0 - s) * t * self.node(i, j + 1)
            + s * t * self.node(i + 1, j + 1)
    }

    /// `(x, y, value)` for every mesh node, row-major in `y`.
    pub fn rows(&self) -> Vec<[f64; 3]> {
        let (xs, ys) = (self.mesh.x(), self.mesh.y());
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for (j, &y) in ys.iter().enumerate() {
            for (i, &x) in xs.iter().enumerate() {
                out.push([x, y, self.node(i, j)]);
            }
        }
        out
    }
}

pub(crate) fn dual_areas(mesh: &TensorMesh, bc: BoundaryCondition) -> Vec<f64> {
    let l = Layout::new(mesh, bc);
    (0..l.len())
        .map(|k| {
            let (i, j) = l.node(k);
            dual_width(mesh.x(), i) * dual_width(mesh.y(), j)
        })
        .collect()
}

/// Assembled, immutable linear system in integrated (dual-cell) form.
pub struct LinearSystem {
    operator: Operator,
    bc: BoundaryCondition,
    eps: f64,
    mesh: Arc<TensorMesh>,
    matrix: SparseMatrix,
    areas: Vec<f64>,
    lu: OnceLock<std::result::Result<Lu<usize, f64>, String>>,
}

impl std::fmt::Debug for LinearSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearSystem")
            .field("operator", &self.operator)
            .field("bc", &self.bc)
            .field("eps", &self.eps)
            .field("unknowns", &self.matrix.dim())
            .finish()
    }
}

/// Assembles the upwind finite-volume system on `mesh`.
///
/// The primal matrix `W` multiplies nodal values and yields dual-cell
/// integrals of the operator; the adjoint system is exactly `W^T`. `W` is
/// checked to be an M-matrix through its sign pattern and non-negative
/// column sums.
pub fn assemble(
    field: &CoefficientField,
    eps: f64,
    mesh: Arc<TensorMesh>,
    operator: Operator,
    bc: BoundaryCondition,
    exec: Execution,
) -> Result<LinearSystem> {
    if !(eps > 0.0 && eps <= 1.0) {
        return domain(format!("eps={eps} outside (0, 1]"));
    }
    let l = Layout::new(&mesh, bc);
    let (xs, ys) = (mesh.x(), mesh.y());
    let rows = exec.map_range(l.len(), |k| {
        let (i, j) = l.node(k);
        let (x, y) = (xs[i], ys[j]);
        let kx = dual_width(xs, i);
        let ky = dual_width(ys, j);
        let mut diag = 0.0;
        let mut row = Vec::with_capacity(5);
        let mut link = |ni: usize, nj: usize, c: f64, row: &mut Vec<(usize, f64)>| {
            diag += c;
            if let Some(m) = l.index(ni, nj) {
                row.push((m, -c));
            }
        };
        link(i - 1, j, eps * ky / (x - xs[i - 1]), &mut row);
        link(i + 1, j, eps * ky / (xs[i + 1] - x), &mut row);
        if j > 0 {
            link(i, j - 1, eps * kx / (y - ys[j - 1]), &mut row);
        }
        if j + 1 < ys.len() {
            link(i, j + 1, eps * kx / (ys[j + 1] - y), &mut row);
        }
        // -(a u)_x with the face flux taken from the upwind node i+1
        diag += field.a(x, y) * ky;
        if let Some(m) = l.index(i + 1, j) {
            let e = row.iter_mut().find(|e| e.0 == m).expect("east neighbour present");
            e.1 -= field.a(xs[i + 1], y) * ky;
        }
        diag += field.b(x, y) * kx * ky;
        row.push((k, diag));
        row.sort_by_key(|e| e.0);
        row
    });
    let w = SparseMatrix::from_rows(rows);
    check_m_matrix(&w)?;
    let matrix = match operator {
        Operator::Primal => w,
        Operator::Adjoint => w.transpose(),
    };
    Ok(LinearSystem {
        operator,
        bc,
        eps,
        areas: dual_areas(&mesh, bc),
        mesh,
        matrix,
        lu: OnceLock::new(),
    })
}

fn check_m_matrix(w: &SparseMatrix) -> Result<()> {
    let n = w.dim();
    let mut col_sum = vec![0.0; n];
    let mut col_scale = vec![0.0; n];
    for i in 0..n {
        let mut has_diag = false;
        for (j, v) in w.row(i) {
            col_sum[j] += v;
            col_scale[j] += v.abs();
            if i == j {
                has_diag = true;
                if !(v > 0.0) {
                    return Err(Error::MMatrix { row: i, detail: format!("diagonal {v} not positive") });
                }
            } else if !(v <= 0.0) {
                return Err(Error::MMatrix { row: i, detail: format!("off-diagonal ({i},{j}) = {v} positive") });
            }
        }
        if !has_diag {
            return Err(Error::MMatrix { row: i, detail: "missing diagonal".into() });
        }
    }
    for j in 0..n {
        if col_sum[j] < -1e-12 * col_scale[j] {
            return Err(Error::MMatrix {
                row: j,
                detail: format!("column sum {} negative (adjoint row not dominant)", col_sum[j]),
            });
        }
    }
    Ok(())
}

const RESIDUAL_TOL: f64 = 1e-10;

impl LinearSystem {
    pub fn operator(&self) -> Operator {
        self.operator
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn mesh(&self) -> &Arc<TensorMesh> {
        &self.mesh
    }

    /// The integrated-form matrix (primal `W` or adjoint `W^T`).
    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    fn lu(&self) -> Result<&Lu<usize, f64>> {
        let lu = self.lu.get_or_init(|| {
            let m = self.matrix.to_faer().map_err(|e| e.to_string())?;
            m.sp_lu().map_err(|e| format!("sparse LU failed: {e:?}"))
        });
        lu.as_ref().map_err(|e| Error::Solver(e.clone()))
    }

    /// Applies the operator in nodal form: `(W u)_k / |cell_k|`.
    pub fn apply(&self, u: &DiscreteField) -> Result<DiscreteField> {
        self.check_field(u)?;
        let wu = self.matrix.mul_vec(u.values());
        let v = wu.iter().zip(&self.areas).map(|(w, a)| w / a).collect();
        DiscreteField::from_values(self.mesh.clone(), self.bc, v)
    }

    fn check_field(&self, f: &DiscreteField) -> Result<()> {
        if f.bc != self.bc || f.mesh.as_ref() != self.mesh.as_ref() {
            return domain("field does not live on this system's mesh and boundary condition");
        }
        Ok(())
    }

    /// Solves `W u = rhs` for an integrated right-hand side.
    pub(crate) fn solve_integrated(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.matrix.dim();
        let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let lu = self.lu()?;
        let mut u = vec![0.0; n];
        let mut r = rhs.to_vec();
        let mut rel = f64::INFINITY;
        // one refinement sweep is enough for these M-matrices
        for _ in 0..3 {
            let b = Mat::<f64>::from_fn(n, 1, |i, _| r[i]);
            let du = lu.solve(&b);
            for (i, ui) in u.iter_mut().enumerate() {
                *ui += du[(i, 0)];
            }
            let wu = self.matrix.mul_vec(&u);
            r = rhs.iter().zip(&wu).map(|(b, w)| b - w).collect();
            rel = r.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale;
            if rel <= RESIDUAL_TOL {
                return Ok(u);
            }
        }
        Err(Error::Solver(format!("relative residual {rel:.3e} above {RESIDUAL_TOL:e}")))
    }
}

/// Solves `L u = f` (or `L* v = f`) for nodal data `f`.
pub fn solve(system: &LinearSystem, rhs: &DiscreteField) -> Result<DiscreteField> {
    system.check_field(rhs)?;
    let b: Vec<f64> = rhs.values().iter().zip(&system.areas).map(|(f, a)| f * a).collect();
    let u = system.solve_integrated(&b)?;
    DiscreteField::from_values(system.mesh.clone(), system.bc, u)
}

/// Discrete Green's function with singular point at mesh node `source`:
/// the adjoint solution for unit mass on the source's dual cell.
pub fn discrete_green(system: &LinearSystem, source: (usize, usize)) -> Result<DiscreteField> {
    if system.operator != Operator::Adjoint {
        return domain("discrete Green's function needs the adjoint system");
    }
    let l = Layout::new(&system.mesh, system.bc);
    let (nx, ny) = system.mesh.cells();
    let Some(k) = l.index(source.0, source.1).filter(|_| source.1 > 0 && source.1 < ny) else {
        return domain(format!("source node {source:?} is not interior to the {nx}x{ny} mesh"));
    };
    let mut b = vec![0.0; l.len()];
    b[k] = 1.0;
    let g = system.solve_integrated(&b)?;
    DiscreteField::from_values(system.mesh.clone(), system.bc, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system(n: usize, op: Operator, bc: BoundaryCondition, a: f64, b: f64) -> LinearSystem {
        let mesh = Arc::new(TensorMesh::uniform(n).unwrap());
        let field = CoefficientField::constant(a, b).unwrap();
        assemble(&field, 0.1, mesh, op, bc, Execution::Sequential).unwrap()
    }

    #[test]
    fn adjoint_annihilates_constants_away_from_dirichlet_rows() {
        let s = system(16, Operator::Adjoint, BoundaryCondition::Dirichlet, 1.3, 0.0);
        let one = DiscreteField::from_fn(s.mesh().clone(), s.bc(), |_, _| 1.0);
        let r = s.apply(&one).unwrap();
        for k in 0..r.values().len() {
            let (i, j) = Layout::new(s.mesh(), s.bc()).node(k);
            if i > 1 && i < 15 && j > 1 && j < 15 {
                assert!(r.values()[k].abs() < 1e-11, "{}", r.values()[k]);
            }
        }
        // Neumann: only the x-boundary rows feel the constant
        let s = system(16, Operator::Adjoint, BoundaryCondition::NeumannTopBottom, 1.0, 0.5);
        let one = DiscreteField::from_fn(s.mesh().clone(), s.bc(), |_, _| 1.0);
        let r = s.apply(&one).unwrap();
        for (k, v) in r.values().iter().enumerate() {
            let (i, _) = Layout::new(s.mesh(), s.bc()).node(k);
            if i > 1 && i < 15 {
                assert!((v - 0.5).abs() < 1e-11, "{v}");
            }
        }
    }

    #[test]
    fn adjoint_is_the_transpose() {
        let p = system(8, Operator::Primal, BoundaryCondition::Dirichlet, 1.0, 0.0);
        let a = system(8, Operator::Adjoint, BoundaryCondition::Dirichlet, 1.0, 0.0);
        assert_eq!(p.matrix().transpose(), *a.matrix());
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let s = system(8, Operator::Primal, BoundaryCondition::Dirichlet, 1.0, 0.0);
        let u = solve(&s, &DiscreteField::zeros(s.mesh().clone(), s.bc())).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn green_requires_adjoint_and_interior_source() {
        let p = system(8, Operator::Primal, BoundaryCondition::Dirichlet, 1.0, 0.0);
        assert!(discrete_green(&p, (4, 4)).is_err());
        let a = system(8, Operator::Adjoint, BoundaryCondition::NeumannTopBottom, 1.0, 0.0);
        assert!(discrete_green(&a, (4, 0)).is_err());
        assert!(discrete_green(&a, (0, 4)).is_err());
        let g = discrete_green(&a, (4, 4)).unwrap();
        assert!(g.min() >= 0.0);
    }

    #[test]
    fn interpolation_reproduces_bilinear_data() {
        let mesh = Arc::new(TensorMesh::from_knots(vec![0.0, 0.3, 0.7, 1.0], vec![0.0, 0.5, 1.0]).unwrap());
        let f = DiscreteField::from_fn(mesh, BoundaryCondition::NeumannTopBottom, |x, y| x * (1.0 - x) + y);
        let v = f.interpolate(0.5, 0.25);
        let exact = 0.5 * (0.21 + 0.21) + 0.25;
        assert!((v - exact).abs() < 1e-14, "{v}");
    }
}
