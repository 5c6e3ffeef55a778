//! L1 norms of image approximations and their derivatives.

mod cubature;
mod region;
mod scaling;

use serde::{Deserialize, Serialize};

pub use cubature::{CubatureOptions, CubatureOutput, Rect};
pub use region::{Bounds, Layout, Region};
pub use scaling::{fit, scaling_study, Sample, ScalingFit, ScalingModel};

use crate::error::{Error, Result};
use crate::fundamental::DerivKind;
use crate::image_green::{ImageGreen, Pair};
use crate::par::Execution;

/// Relative tolerance used when none is given.
pub const DEFAULT_REL_TOL: f64 = 1e-4;
/// Maximum number of live cells before giving up.
pub const DEFAULT_MAX_CELLS: usize = 1 << 22;

/// Quantity whose absolute value is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormIntegrand {
    Value,
    DXi,
    DEta,
    DX,
    DY,
    FullDEta,
    FullDY,
    D2XiXi,
    D2XiEta,
    D2EtaEta,
    /// `|G| + |G_xi| + |G_eta|`, the W^{1,1} density.
    W11,
    /// Frozen-operator defect of the approximation.
    Residual,
}

impl NormIntegrand {
    pub const ALL: [NormIntegrand; 12] = [
        NormIntegrand::Value,
        NormIntegrand::DXi,
        NormIntegrand::DEta,
        NormIntegrand::DX,
        NormIntegrand::DY,
        NormIntegrand::FullDEta,
        NormIntegrand::FullDY,
        NormIntegrand::D2XiXi,
        NormIntegrand::D2XiEta,
        NormIntegrand::D2EtaEta,
        NormIntegrand::W11,
        NormIntegrand::Residual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NormIntegrand::Value => "value",
            NormIntegrand::DXi => "d_xi",
            NormIntegrand::DEta => "d_eta",
            NormIntegrand::DX => "d_x",
            NormIntegrand::DY => "d_y",
            NormIntegrand::FullDEta => "full_d_eta",
            NormIntegrand::FullDY => "full_d_y",
            NormIntegrand::D2XiXi => "d2_xi_xi",
            NormIntegrand::D2XiEta => "d2_xi_eta",
            NormIntegrand::D2EtaEta => "d2_eta_eta",
            NormIntegrand::W11 => "w11",
            NormIntegrand::Residual => "residual",
        }
    }

    fn is_second_order(self) -> bool {
        matches!(self, NormIntegrand::D2XiXi | NormIntegrand::D2XiEta | NormIntegrand::D2EtaEta)
    }

    fn density(self, green: &ImageGreen, p: (f64, f64)) -> Result<f64> {
        let xi_eta = || green.jet_unchecked(p, Pair::XiEta).map(|j| j.jet);
        let v = match self {
            NormIntegrand::Value => xi_eta()?.val.abs(),
            NormIntegrand::DXi => xi_eta()?.du.abs(),
            NormIntegrand::DEta => xi_eta()?.dv.abs(),
            NormIntegrand::D2XiXi => xi_eta()?.duu.abs(),
            NormIntegrand::D2XiEta => xi_eta()?.duv.abs(),
            NormIntegrand::D2EtaEta => xi_eta()?.dvv.abs(),
            NormIntegrand::W11 => {
                let j = xi_eta()?;
                j.val.abs() + j.du.abs() + j.dv.abs()
            }
            NormIntegrand::DX => green.jet_unchecked(p, Pair::XY)?.jet.du.abs(),
            NormIntegrand::DY => green.jet_unchecked(p, Pair::XY)?.jet.dv.abs(),
            NormIntegrand::FullDEta => green.eval(p, DerivKind::FullDEta)?.abs(),
            NormIntegrand::FullDY => green.eval(p, DerivKind::FullDY)?.abs(),
            NormIntegrand::Residual => green.frozen_residual(p)?.value.abs(),
        };
        Ok(v)
    }
}

impl std::fmt::Display for NormIntegrand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for NormIntegrand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NormIntegrand::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown integrand '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRequest {
    pub integrand: NormIntegrand,
    pub region: Region,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_cells: usize,
    #[serde(default)]
    pub exec: Execution,
}

impl NormRequest {
    pub fn new(integrand: NormIntegrand, region: Region) -> Self {
        NormRequest {
            integrand,
            region,
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: 0.0,
            max_cells: DEFAULT_MAX_CELLS,
            exec: Execution::default(),
        }
    }

    pub fn with_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_max_cells(mut self, max_cells: usize) -> Self {
        self.max_cells = max_cells;
        self
    }

    fn options(&self) -> Result<CubatureOptions> {
        if !(self.rel_tol > 0.0 || self.abs_tol > 0.0) || self.rel_tol < 0.0 || self.abs_tol < 0.0 {
            return Err(Error::Domain(format!(
                "tolerances rel={} abs={} must be non-negative and not both zero",
                self.rel_tol, self.abs_tol
            )));
        }
        Ok(CubatureOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_cells: self.max_cells.max(1),
            exec: self.exec,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub cells_used: usize,
    pub integrand_id: String,
    pub region: Region,
}

/// Integrates `f(field_point)` over `region`, resolving the singular point
/// and layers described by `layout`.
pub fn integrate<F>(region: &Region, layout: &Layout, f: F, opts: &CubatureOptions) -> Result<CubatureOutput>
where
    F: Fn((f64, f64)) -> f64 + Sync + Send,
{
    let d = region::decompose(region, layout)?;
    let g = |piece: usize, u: f64, v: f64| match d.pieces[piece].map(u, v) {
        Some((p, jac)) => f(p) * jac,
        None => 0.0,
    };
    cubature::integrate(d.cells.clone(), &g, opts)
}

/// L1 norm of one derivative of an image approximation over `req.region`.
pub fn l1_norm(green: &ImageGreen, req: &NormRequest) -> Result<NormResult> {
    let opts = req.options()?;
    if req.integrand == NormIntegrand::Residual {
        // surface the coefficient restriction before any sampling
        green.frozen_residual(probe_point(&req.region, green.singular()))?;
    }
    let layout = Layout {
        singular: Some(green.singular()),
        eps: green.eps(),
        integrable_at_singular: !req.integrand.is_second_order(),
    };
    let integrand = req.integrand;
    let out = integrate(
        &req.region,
        &layout,
        |p| integrand.density(green, p).unwrap_or(f64::NAN),
        &opts,
    )?;
    Ok(NormResult {
        value: out.value,
        abs_error_estimate: out.error,
        cells_used: out.cells,
        integrand_id: format!("{}:{}", green.spec().variant.name(), integrand.name()),
        region: req.region,
    })
}

fn probe_point(region: &Region, avoid: (f64, f64)) -> (f64, f64) {
    let b = region.bounds();
    let p = (b.x0 + 0.37 * (b.x1 - b.x0), b.y0.max(0.0) + 0.41 * (b.y1.min(1.0) - b.y0.max(0.0)));
    if p == avoid {
        (p.0 + 1e-3, p.1)
    } else {
        p
    }
}
