//! Method-of-images approximations of the Green's function.
//!
//! Strip `(0,1) x R` versions reflect the source across `xi = 0` and
//! `xi = 1` (or the singular point across `x = 0, 1` for the tilde form);
//! square versions add one cut-off reflection across each of `eta = 0, 1`
//! (resp. `y = 0, 1`). Neumann variants flip the sign of the square images.
//!
//! Each image is `sign * cutoffs * e^w * g(d, y'; xi, eta'; q)` with the log
//! weight `w = q (d - x)/eps` (see [`Weights`](crate::fundamental::Weights)).
//! Derivatives are carried as second-order jets, so product rules through the
//! cut-offs are exact.

use serde::{Deserialize, Serialize};

use crate::coeff::CoefficientField;
use crate::error::{domain, Error, Result};
use crate::fundamental::{derivatives_at, ChainSlopes, DerivKind, HatCoords};
use crate::jet::Jet2;

/// Cut-off plateau functions: `omega0 = 1` on `t <= 2/3`, `0` on `t >= 5/6`,
/// `omega1(t) = omega0(1 - t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    Omega0,
    Omega1,
}

const BRIDGE_LO: f64 = 2.0 / 3.0;
const BRIDGE_HI: f64 = 5.0 / 6.0;

/// `(omega0, omega0', omega0'')` at `t`, quintic smoothstep bridge; plateaus
/// extend outside `[0, 1]`.
#[inline]
fn omega0(t: f64) -> (f64, f64, f64) {
    if t <= BRIDGE_LO {
        (1.0, 0.0, 0.0)
    } else if t >= BRIDGE_HI {
        (0.0, 0.0, 0.0)
    } else {
        let k = 1.0 / (BRIDGE_HI - BRIDGE_LO);
        let u = (t - BRIDGE_LO) * k;
        let s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
        let ds = 30.0 * u * u * (1.0 - u) * (1.0 - u);
        let dds = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
        (1.0 - s, -k * ds, -k * k * dds)
    }
}

#[inline]
fn cutoff_unchecked(kind: CutoffKind, t: f64) -> (f64, f64, f64) {
    match kind {
        CutoffKind::Omega0 => omega0(t),
        CutoffKind::Omega1 => {
            let (v, d, dd) = omega0(1.0 - t);
            (v, -d, dd)
        }
    }
}

/// Cut-off value (`deriv = 0`) or derivative (`1`, `2`) at `t` in `[0, 1]`.
pub fn cutoff(kind: CutoffKind, t: f64, deriv: u8) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return domain(format!("cut-off argument t={t} outside [0, 1]"));
    }
    let (v, d, dd) = cutoff_unchecked(kind, t);
    match deriv {
        0 => Ok(v),
        1 => Ok(d),
        2 => Ok(dd),
        _ => domain(format!("cut-off derivative order {deriv} not available")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    BarStrip,
    TildeStrip,
    BarSquare,
    TildeSquare,
    BarSquareNeumann,
    TildeSquareNeumann,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::BarStrip,
        Variant::TildeStrip,
        Variant::BarSquare,
        Variant::TildeSquare,
        Variant::BarSquareNeumann,
        Variant::TildeSquareNeumann,
    ];

    /// Bar variants freeze `q = a(x,y)/2`, tilde variants `q = a(xi,eta)/2`.
    pub fn is_bar(self) -> bool {
        matches!(self, Variant::BarStrip | Variant::BarSquare | Variant::BarSquareNeumann)
    }

    pub fn is_square(self) -> bool {
        !matches!(self, Variant::BarStrip | Variant::TildeStrip)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::BarStrip => "bar_strip",
            Variant::TildeStrip => "tilde_strip",
            Variant::BarSquare => "bar_square",
            Variant::TildeSquare => "tilde_square",
            Variant::BarSquareNeumann => "bar_square_neumann",
            Variant::TildeSquareNeumann => "tilde_square_neumann",
        }
    }

    pub fn q_rule(self) -> &'static str {
        if self.is_bar() {
            "q = a(x,y)/2"
        } else {
            "q = a(xi,eta)/2"
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown variant '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct ImageGreenSpec {
    pub variant: Variant,
    pub field: CoefficientField,
    pub eps: f64,
}

/// Pair of independent variables a jet is taken in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pair {
    XiEta,
    XiQ,
    XY,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Xi,
    Eta,
    X,
    Y,
}

/// `s * v + o`.
#[derive(Debug, Clone, Copy)]
struct Affine {
    s: f64,
    o: f64,
}

impl Affine {
    const ID: Affine = Affine { s: 1.0, o: 0.0 };
    const NEG: Affine = Affine { s: -1.0, o: 0.0 };
    const TWO_MINUS: Affine = Affine { s: -1.0, o: 2.0 };
    const TWO_PLUS: Affine = Affine { s: 1.0, o: 2.0 };

    #[inline]
    fn at(self, v: f64) -> f64 {
        self.s * v + self.o
    }

    /// `self.at(t) - other.at(z)`, grouped around 1 so that mirrored pairs
    /// produce offsets of exactly equal magnitude on the mirror line.
    #[inline]
    fn offset(self, t: f64, other: Affine, z: f64) -> f64 {
        let c = self.o - other.o;
        if c == 0.0 {
            self.s * t - other.s * z
        } else {
            let h = 0.5 * c;
            (h + self.s * t) + (h - other.s * z)
        }
    }
}

#[derive(Debug, Clone)]
struct Term {
    sign: f64,
    src_x: Affine,
    src_y: Affine,
    field_eta: Affine,
    cuts: Vec<(CutoffKind, Var)>,
}

fn strip_terms(bar: bool) -> Vec<Term> {
    let t = |sign, src_x, cut: Option<(CutoffKind, Var)>| Term {
        sign,
        src_x,
        src_y: Affine::ID,
        field_eta: Affine::ID,
        cuts: cut.into_iter().collect(),
    };
    if bar {
        let c = Some((CutoffKind::Omega1, Var::Xi));
        vec![
            t(1.0, Affine::ID, None),
            t(-1.0, Affine::NEG, None),
            t(-1.0, Affine::TWO_MINUS, c),
            t(1.0, Affine::TWO_PLUS, c),
        ]
    } else {
        let c = Some((CutoffKind::Omega0, Var::X));
        vec![
            t(1.0, Affine::ID, None),
            t(-1.0, Affine::TWO_MINUS, None),
            t(-1.0, Affine::NEG, c),
            t(1.0, Affine::TWO_PLUS, c),
        ]
    }
}

fn build_terms(variant: Variant) -> Vec<Term> {
    let strip = strip_terms(variant.is_bar());
    if !variant.is_square() {
        return strip;
    }
    let image_sign = match variant {
        Variant::BarSquareNeumann | Variant::TildeSquareNeumann => 1.0,
        _ => -1.0,
    };
    let mut out = strip.clone();
    for (map, kind) in [(Affine::NEG, CutoffKind::Omega0), (Affine::TWO_MINUS, CutoffKind::Omega1)] {
        for base in &strip {
            let mut t = base.clone();
            t.sign *= image_sign;
            if variant.is_bar() {
                t.field_eta = map;
                t.cuts.push((kind, Var::Eta));
            } else {
                t.src_y = map;
                t.cuts.push((kind, Var::Y));
            }
            out.push(t);
        }
    }
    out
}

/// Terms whose exponent falls below this contribute exactly zero in f64.
const NEGLIGIBLE_EXPONENT: f64 = -800.0;

/// Jet of an image sum together with a magnitude scale of its terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageJet {
    pub jet: Jet2,
    /// Sum over terms of `eps|d_uu| + eps|d_vv| + 2q|d_u|`.
    pub operator_scale: f64,
}

/// An image approximation bound to one singular point.
#[derive(Debug, Clone)]
pub struct ImageGreen {
    spec: ImageGreenSpec,
    x: f64,
    y: f64,
    terms: Vec<Term>,
    bar_q: f64,
}

impl ImageGreen {
    pub fn new(spec: ImageGreenSpec, singular: (f64, f64)) -> Result<Self> {
        let (x, y) = singular;
        if !(spec.eps > 0.0 && spec.eps <= 1.0) {
            return domain(format!("eps={} outside (0, 1]", spec.eps));
        }
        if !(0.0..=1.0).contains(&x) || !y.is_finite() {
            return domain(format!("singular point ({x}, {y}) outside the strip"));
        }
        if spec.variant.is_square() && !(0.0..=1.0).contains(&y) {
            return domain(format!("singular point ({x}, {y}) outside the unit square"));
        }
        let bar_q = 0.5 * spec.field.a(x, y);
        let terms = build_terms(spec.variant);
        Ok(Self { spec, x, y, terms, bar_q })
    }

    pub fn spec(&self) -> &ImageGreenSpec {
        &self.spec
    }

    pub fn singular(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    pub fn eps(&self) -> f64 {
        self.spec.eps
    }

    /// Frozen `q` used at field point `(xi, eta)`.
    #[inline]
    pub fn q_at(&self, xi: f64, eta: f64) -> f64 {
        if self.spec.variant.is_bar() {
            self.bar_q
        } else {
            0.5 * self.spec.field.a(xi, eta)
        }
    }

    fn check_field_point(&self, xi: f64, eta: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&xi) || !eta.is_finite() {
            return domain(format!("field point ({xi}, {eta}) outside the domain"));
        }
        if self.spec.variant.is_square() && !(0.0..=1.0).contains(&eta) {
            return domain(format!("field point ({xi}, {eta}) outside the unit square"));
        }
        Ok(())
    }

    /// Jet of the approximation at `(xi, eta)` in the chosen variable pair.
    pub fn jet(&self, point: (f64, f64), pair: Pair) -> Result<ImageJet> {
        self.check_field_point(point.0, point.1)?;
        self.jet_unchecked(point, pair)
    }

    pub(crate) fn jet_unchecked(&self, (xi, eta): (f64, f64), pair: Pair) -> Result<ImageJet> {
        let eps = self.spec.eps;
        let q = self.q_at(xi, eta);
        let mut acc = Jet2::ZERO;
        let mut scale = 0.0;

        for term in &self.terms {
            let mut cut_jet = Jet2::ONE;
            for &(kind, var) in &term.cuts {
                let arg = match var {
                    Var::Xi => xi,
                    Var::Eta => eta,
                    Var::X => self.x,
                    Var::Y => self.y,
                };
                let (v, d, dd) = cutoff_unchecked(kind, arg);
                let j = match (pair, var) {
                    (Pair::XiEta, Var::Xi) | (Pair::XiQ, Var::Xi) | (Pair::XY, Var::X) => {
                        Jet2::of_u(v, d, dd)
                    }
                    (Pair::XiEta, Var::Eta) | (Pair::XY, Var::Y) => Jet2::of_v(v, d, dd),
                    _ => Jet2::constant(v),
                };
                cut_jet = cut_jet * j;
            }
            if cut_jet.is_zero() {
                continue;
            }

            let d = term.src_x.at(self.x);
            let u = Affine::ID.offset(xi, term.src_x, self.x);
            let v = term.field_eta.offset(eta, term.src_y, self.y);
            let hat = HatCoords::new(u / eps, v / eps);
            // the weight e^{q(d-x)/eps} merges with e^{q(xi-d)/eps}; the
            // exponent is q (xi - x - r) / eps, without cancellation
            let w = xi - self.x;
            let r = u.hypot(v);
            let exponent = if w > 0.0 {
                q * ((w - u) * (w + u) - v * v) / (eps * (w + r))
            } else {
                q * (w - r) / eps
            };
            if exponent < NEGLIGIBLE_EXPONENT {
                continue;
            }
            if hat.r_hat == 0.0 {
                return Err(Error::SingularPoint { x: self.x, y: self.y });
            }
            let g = derivatives_at(q, eps, hat);
            let se = term.field_eta.s;
            let (sx, sy) = (term.src_x.s, term.src_y.s);
            let (g_jet, w_jet) = match pair {
                Pair::XiEta => (
                    Jet2 {
                        val: g.value,
                        du: g.d_xi,
                        dv: se * g.d_eta,
                        duu: g.d2_xi_xi,
                        duv: se * g.d2_xi_eta,
                        dvv: se * se * g.d2_eta_eta,
                    },
                    Jet2::ONE,
                ),
                Pair::XiQ => {
                    let lq = (d - self.x) / eps;
                    (
                        Jet2 {
                            val: g.value,
                            du: g.d_xi,
                            dv: g.d_q,
                            duu: g.d2_xi_xi,
                            duv: g.d2_xi_q,
                            dvv: f64::NAN,
                        },
                        Jet2::of_v(1.0, lq, lq * lq),
                    )
                }
                Pair::XY => {
                    let lx = q * (sx - 1.0) / eps;
                    (
                        Jet2 {
                            val: g.value,
                            du: -sx * g.d_xi,
                            dv: -sy * g.d_eta,
                            duu: sx * sx * g.d2_xi_xi,
                            duv: sx * sy * g.d2_xi_eta,
                            dvv: sy * sy * g.d2_eta_eta,
                        },
                        Jet2::of_u(1.0, lx, lx * lx),
                    )
                }
            };
            let e = exponent.exp();
            let term_jet = (g_jet * w_jet * cut_jet).scale(term.sign * e);
            acc += term_jet;
            scale += e
                * cut_jet.val.abs()
                * (eps * g.d2_xi_xi.abs() + eps * g.d2_eta_eta.abs() + 2.0 * q * g.d_xi.abs());
        }
        Ok(ImageJet { jet: acc, operator_scale: scale })
    }

    /// Value or derivative of the approximation at a field point.
    pub fn eval(&self, point: (f64, f64), kind: DerivKind) -> Result<f64> {
        self.check_field_point(point.0, point.1)?;
        let (xi, eta) = point;
        let chain = ChainSlopes {
            da_deta: self.spec.field.a_y(xi, eta),
            da_dy: self.spec.field.a_y(self.x, self.y),
        };
        let v = match kind {
            DerivKind::Value => self.jet_unchecked(point, Pair::XiEta)?.jet.val,
            DerivKind::DXi => self.jet_unchecked(point, Pair::XiEta)?.jet.du,
            DerivKind::DEta => self.jet_unchecked(point, Pair::XiEta)?.jet.dv,
            DerivKind::D2XiXi => self.jet_unchecked(point, Pair::XiEta)?.jet.duu,
            DerivKind::D2XiEta => self.jet_unchecked(point, Pair::XiEta)?.jet.duv,
            DerivKind::D2EtaEta => self.jet_unchecked(point, Pair::XiEta)?.jet.dvv,
            DerivKind::DQ => self.jet_unchecked(point, Pair::XiQ)?.jet.dv,
            DerivKind::D2XiQ => self.jet_unchecked(point, Pair::XiQ)?.jet.duv,
            DerivKind::DX => self.jet_unchecked(point, Pair::XY)?.jet.du,
            DerivKind::DY => self.jet_unchecked(point, Pair::XY)?.jet.dv,
            // q follows the field point for tilde variants and the singular
            // point for bar variants; the chain term applies only there
            DerivKind::FullDEta => {
                let d_eta = self.jet_unchecked(point, Pair::XiEta)?.jet.dv;
                if self.spec.variant.is_bar() || chain.da_deta == 0.0 {
                    d_eta
                } else {
                    d_eta + 0.5 * chain.da_deta * self.jet_unchecked(point, Pair::XiQ)?.jet.dv
                }
            }
            DerivKind::FullDY => {
                let d_y = self.jet_unchecked(point, Pair::XY)?.jet.dv;
                if !self.spec.variant.is_bar() || chain.da_dy == 0.0 {
                    d_y
                } else {
                    d_y + 0.5 * chain.da_dy * self.jet_unchecked(point, Pair::XiQ)?.jet.dv
                }
            }
        };
        Ok(v)
    }

    /// Frozen adjoint operator `-eps (d_xixi + d_etaeta) + a d_xi` applied to
    /// the approximation, i.e. its defect away from the source.
    pub fn frozen_residual(&self, point: (f64, f64)) -> Result<FrozenResidual> {
        let Some((a, b)) = self.spec.field.as_constant() else {
            return domain("frozen residual needs a constant coefficient field");
        };
        if b != 0.0 {
            return domain("frozen residual needs b = 0");
        }
        let ImageJet { jet, operator_scale } = self.jet(point, Pair::XiEta)?;
        let eps = self.spec.eps;
        Ok(FrozenResidual {
            value: -eps * (jet.duu + jet.dvv) + a * jet.du,
            scale: operator_scale,
        })
    }
}

/// Defect of an image approximation plus the magnitude of the terms that
/// cancel in it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrozenResidual {
    pub value: f64,
    pub scale: f64,
}

/// Free function form of [`ImageGreen::eval`].
pub fn eval_image(
    spec: &ImageGreenSpec,
    singular: (f64, f64),
    field_point: (f64, f64),
    kind: DerivKind,
) -> Result<f64> {
    ImageGreen::new(spec.clone(), singular)?.eval(field_point, kind)
}

pub fn frozen_residual(
    spec: &ImageGreenSpec,
    singular: (f64, f64),
    field_point: (f64, f64),
) -> Result<FrozenResidual> {
    ImageGreen::new(spec.clone(), singular)?.frozen_residual(field_point)
}

/// Rectangular sampling grid for field exports, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub xi: (f64, f64),
    pub eta: (f64, f64),
}

impl GridSpec {
    pub fn unit(n: usize) -> Self {
        Self { nx: n, ny: n, xi: (0.0, 1.0), eta: (0.0, 1.0) }
    }

    fn coord(n: usize, (lo, hi): (f64, f64), i: usize) -> f64 {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    }

    pub fn xi_at(&self, i: usize) -> f64 {
        Self::coord(self.nx, self.xi, i)
    }

    pub fn eta_at(&self, j: usize) -> f64 {
        Self::coord(self.ny, self.eta, j)
    }
}

/// Samples `(xi, eta, value)` row-major (eta outer, xi inner).
///
/// A sample that hits the singular point is an error; the caller chooses a
/// grid that avoids it.
pub fn sample_grid(
    green: &ImageGreen,
    grid: &GridSpec,
    kind: DerivKind,
    exec: crate::par::Execution,
) -> Result<Vec<[f64; 3]>> {
    if grid.nx == 0 || grid.ny == 0 {
        return domain("grid needs at least one point per axis");
    }
    let rows = exec.map_range(grid.ny, |j| {
        let eta = grid.eta_at(j);
        (0..grid.nx)
            .map(|i| {
                let xi = grid.xi_at(i);
                green.eval((xi, eta), kind).map(|v| [xi, eta, v])
            })
            .collect::<Result<Vec<_>>>()
    });
    let mut out = Vec::with_capacity(grid.nx * grid.ny);
    for row in rows {
        out.extend(row?);
    }
    Ok(out)
}
