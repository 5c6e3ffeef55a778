//! Globally adaptive cubature on rectangles with the degree-7 Genz–Malik rule
//! and its embedded degree-5 companion.
//!
//! Each round evaluates all freshly created cells (in parallel when enabled),
//! then bisects the cells carrying the bulk of the error along the axis with
//! the largest fourth divided difference. Cell order is deterministic, so the
//! compensated totals are reproducible run to run.
//!
//! The embedded estimate can be fooled by features narrower than a cell, so
//! every cell is audited once against its own 2 x 2 subdivision and its error
//! raised to the disagreement found there.

use crate::error::{Error, Result};
use crate::par::{compensated_sum, Execution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    pub fn new(u: (f64, f64), v: (f64, f64)) -> Self {
        Rect { lo: [u.0, v.0], hi: [u.1, v.1] }
    }

    pub fn area(&self) -> f64 {
        (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1])
    }

    fn split(&self, axis: usize) -> (Rect, Rect) {
        let mid = 0.5 * (self.lo[axis] + self.hi[axis]);
        let mut a = *self;
        let mut b = *self;
        a.hi[axis] = mid;
        b.lo[axis] = mid;
        (a, b)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CubatureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_cells: usize,
    pub exec: Execution,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubatureOutput {
    pub value: f64,
    pub error: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    piece: usize,
    rect: Rect,
    value: f64,
    error: f64,
    axis: usize,
    audited: bool,
}

// Genz–Malik nodes and weights for two dimensions.
const L2: f64 = 0.358_568_582_800_318_1; // sqrt(9/70)
const L4: f64 = 0.948_683_298_050_513_8; // sqrt(9/10)
const L5: f64 = 0.688_247_201_611_685_3; // sqrt(9/19)
const W1: f64 = -3816.0 / 19683.0;
const W2: f64 = 980.0 / 6561.0;
const W3: f64 = 1020.0 / 19683.0;
const W4: f64 = 200.0 / 19683.0;
const W5: f64 = 6859.0 / 78732.0;
const E1: f64 = -971.0 / 729.0;
const E2: f64 = 245.0 / 486.0;
const E3: f64 = 65.0 / 1458.0;
const E4: f64 = 25.0 / 729.0;
const RATIO: f64 = (L2 * L2) / (L4 * L4);

fn rule<F>(piece: usize, rect: Rect, f: &F) -> Cell
where
    F: Fn(usize, f64, f64) -> f64,
{
    let c = [0.5 * (rect.lo[0] + rect.hi[0]), 0.5 * (rect.lo[1] + rect.hi[1])];
    let h = [0.5 * (rect.hi[0] - rect.lo[0]), 0.5 * (rect.hi[1] - rect.lo[1])];
    let at = |du: f64, dv: f64| f(piece, c[0] + du * h[0], c[1] + dv * h[1]);

    let f0 = at(0.0, 0.0);
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    let mut diff = [0.0; 2];
    for axis in 0..2 {
        let e = |l: f64| if axis == 0 { (l, 0.0) } else { (0.0, l) };
        let (a, b) = e(L2);
        let p2 = at(a, b) + at(-a, -b);
        let (a, b) = e(L4);
        let p3 = at(a, b) + at(-a, -b);
        s2 += p2;
        s3 += p3;
        diff[axis] = ((p2 - 2.0 * f0) - RATIO * (p3 - 2.0 * f0)).abs();
    }
    let s4 = at(L4, L4) + at(L4, -L4) + at(-L4, L4) + at(-L4, -L4);
    let s5 = at(L5, L5) + at(L5, -L5) + at(-L5, L5) + at(-L5, -L5);

    let vol = 4.0 * h[0] * h[1];
    let v7 = vol * (W1 * f0 + W2 * s2 + W3 * s3 + W4 * s4 + W5 * s5);
    let v5 = vol * (E1 * f0 + E2 * s2 + E3 * s3 + E4 * s4);

    // ties and near-ties go to the wider side
    let axis = if diff[0] > diff[1] * (1.0 + 1e-10) {
        0
    } else if diff[1] > diff[0] * (1.0 + 1e-10) {
        1
    } else if h[0] >= h[1] {
        0
    } else {
        1
    };
    let error = if v7.is_finite() && v5.is_finite() { (v7 - v5).abs() } else { f64::NAN };
    Cell { piece, rect, value: v7, error, axis, audited: false }
}

/// Integrates `f(piece, u, v)` over the union of `(piece, rect)` cells.
///
/// `f` must already include any Jacobian of the piece's coordinate map.
/// Refinement and audits alternate until every live cell has been audited and
/// the summed estimate meets the tolerance.
pub fn integrate<F>(initial: Vec<(usize, Rect)>, f: &F, opts: &CubatureOptions) -> Result<CubatureOutput>
where
    F: Fn(usize, f64, f64) -> f64 + Sync + Send,
{
    let mut state = State { cells: opts.exec.map(&initial, |&(piece, rect)| rule(piece, rect, f)), evaluated: initial.len() };
    loop {
        let (value, error) = state.refine(f, opts)?;
        if state.audit(f, opts) == 0 {
            return Ok(CubatureOutput { value, error, cells: state.evaluated });
        }
    }
}

struct State {
    cells: Vec<Cell>,
    evaluated: usize,
}

impl State {
    /// Refines until the summed estimate is below the target.
    fn refine<F>(&mut self, f: &F, opts: &CubatureOptions) -> Result<(f64, f64)>
    where
        F: Fn(usize, f64, f64) -> f64 + Sync + Send,
    {
        loop {
            if let Some(bad) = self.cells.iter().find(|c| !c.value.is_finite() || !c.error.is_finite()) {
                return Err(Error::Domain(format!(
                    "integrand is not finite on cell {:?} of piece {}",
                    bad.rect, bad.piece
                )));
            }
            let value = compensated_sum(self.cells.iter().map(|c| c.value));
            let error = compensated_sum(self.cells.iter().map(|c| c.error));
            let target = (opts.rel_tol * value.abs()).max(opts.abs_tol);
            if error <= target {
                return Ok((value, error));
            }
            if self.cells.len() >= opts.max_cells {
                return Err(Error::BudgetExceeded { cells: self.cells.len(), estimate: value, error });
            }

            let cells = std::mem::take(&mut self.cells);
            let mut order: Vec<usize> = (0..cells.len()).collect();
            order.sort_by(|&a, &b| cells[b].error.total_cmp(&cells[a].error).then(a.cmp(&b)));
            let need = error - 0.5 * target;
            let mut covered = 0.0;
            let mut chosen = vec![false; cells.len()];
            let room = (opts.max_cells - cells.len()).max(1);
            for (taken, &i) in order.iter().enumerate() {
                if covered >= need || taken >= room {
                    break;
                }
                chosen[i] = true;
                covered += cells[i].error;
            }

            let mut children = Vec::new();
            let mut kept = Vec::with_capacity(cells.len());
            for (i, c) in cells.into_iter().enumerate() {
                if chosen[i] {
                    let (a, b) = c.rect.split(c.axis);
                    children.push((c.piece, a));
                    children.push((c.piece, b));
                } else {
                    kept.push(c);
                }
            }
            self.evaluated += children.len();
            kept.extend(opts.exec.map(&children, |&(piece, rect)| rule(piece, rect, f)));
            self.cells = kept;
        }
    }

    /// Compares unaudited cells with their 2 x 2 subdivision and raises each
    /// error to at least the observed disagreement; returns how many cells
    /// were audited.
    fn audit<F>(&mut self, f: &F, opts: &CubatureOptions) -> usize
    where
        F: Fn(usize, f64, f64) -> f64 + Sync + Send,
    {
        let pending: Vec<usize> = (0..self.cells.len()).filter(|&i| !self.cells[i].audited).collect();
        let quads = opts.exec.map(&pending, |&i| {
            let c = self.cells[i];
            let (a, b) = c.rect.split(0);
            let (a0, a1) = a.split(1);
            let (b0, b1) = b.split(1);
            compensated_sum([a0, a1, b0, b1].map(|r| rule(c.piece, r, f).value))
        });
        self.evaluated += 4 * pending.len();
        for (&i, sum) in pending.iter().zip(quads) {
            let c = &mut self.cells[i];
            c.audited = true;
            c.error = c.error.max((sum - c.value).abs());
        }
        pending.len()
    }
}
