//! Free-space fundamental solution of the frozen-coefficient adjoint operator
//!
//! ```text
//! -eps (g_xixi + g_etaeta) + 2q g_xi = delta(x - xi) delta(y - eta)
//!
//! g(x,y; xi,eta; q) = 1/(2 pi eps) exp(q xi^) K0(q r^)
//! xi^ = (xi - x)/eps,  eta^ = (eta - y)/eps,  r^ = sqrt(xi^2 + eta^2)
//! ```
//!
//! Every quantity is assembled in scaled-product form `exp(E) * S` with
//! `E = q (xi^ - r^) <= 0` and `S` built from `K_{0,1}(q r^) e^{q r^}`, so
//! nothing overflows however far upstream the field point lies.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::k0_k1_scaled_unchecked;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Slopes of the convection coefficient feeding the full derivatives
/// `D_eta = d_eta + a_eta/2 d_q` and `D_y = d_y + a_y/2 d_q`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainSlopes {
    pub da_deta: f64,
    pub da_dy: f64,
}

/// Singular point, frozen convection strength and perturbation parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrozenParams {
    pub x: f64,
    pub y: f64,
    pub q: f64,
    pub eps: f64,
    #[serde(default)]
    pub chain: ChainSlopes,
}

impl FrozenParams {
    pub fn new(x: f64, y: f64, q: f64, eps: f64) -> Result<Self> {
        if !(x.is_finite() && (-1.0..=3.0).contains(&x)) {
            return domain(format!("singular abscissa x={x} outside [-1, 3]"));
        }
        if !y.is_finite() {
            return domain(format!("singular ordinate y={y} is not finite"));
        }
        if !(q.is_finite() && q > 0.0) {
            return domain(format!("frozen convection q={q} must be positive"));
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return domain(format!("eps={eps} outside (0, 1]"));
        }
        Ok(Self { x, y, q, eps, chain: ChainSlopes::default() })
    }

    /// Validates `q >= alpha/2` for the coefficient lower bound `alpha`.
    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        if self.q < 0.5 * alpha {
            return domain(format!("q={} below alpha/2={}", self.q, 0.5 * alpha));
        }
        Ok(self)
    }

    pub fn with_chain(mut self, chain: ChainSlopes) -> Self {
        self.chain = chain;
        self
    }

    pub fn hat(&self, xi: f64, eta: f64) -> HatCoords {
        HatCoords::new((xi - self.x) / self.eps, (eta - self.y) / self.eps)
    }

    pub fn weights(&self) -> Weights {
        Weights::new(self.x, self.q, self.eps)
    }
}

/// Stretched coordinates around the singular point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatCoords {
    pub xi_hat: f64,
    pub eta_hat: f64,
    pub r_hat: f64,
}

impl HatCoords {
    pub fn new(xi_hat: f64, eta_hat: f64) -> Self {
        Self { xi_hat, eta_hat, r_hat: xi_hat.hypot(eta_hat) }
    }

    /// `xi^ - r^`, free of cancellation in the downstream wake.
    pub fn xi_minus_r(&self) -> f64 {
        if self.xi_hat > 0.0 {
            -self.eta_hat * self.eta_hat / (self.xi_hat + self.r_hat)
        } else {
            self.xi_hat - self.r_hat
        }
    }
}

/// Image weights, stored as natural logarithms.
///
/// `lambda = e^{2q(x-1)/eps}`, `lambda_pm = e^{2q(1 +- x)/eps}`,
/// `p = e^{-2qx/eps}`. They are only ever materialised inside products with
/// scaled Bessel values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub log_lambda: f64,
    pub log_lambda_plus: f64,
    pub log_lambda_minus: f64,
    pub log_p: f64,
}

impl Weights {
    pub fn new(x: f64, q: f64, eps: f64) -> Self {
        let k = 2.0 * q / eps;
        Self {
            log_lambda: k * (x - 1.0),
            log_lambda_plus: k * (1.0 + x),
            log_lambda_minus: k * (1.0 - x),
            log_p: -k * x,
        }
    }
}

/// Which derivative of `g` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivKind {
    Value,
    DXi,
    DEta,
    DQ,
    D2XiXi,
    D2XiEta,
    D2EtaEta,
    D2XiQ,
    DX,
    DY,
    FullDEta,
    FullDY,
}

impl DerivKind {
    pub const ALL: [DerivKind; 12] = [
        DerivKind::Value,
        DerivKind::DXi,
        DerivKind::DEta,
        DerivKind::DQ,
        DerivKind::D2XiXi,
        DerivKind::D2XiEta,
        DerivKind::D2EtaEta,
        DerivKind::D2XiQ,
        DerivKind::DX,
        DerivKind::DY,
        DerivKind::FullDEta,
        DerivKind::FullDY,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DerivKind::Value => "value",
            DerivKind::DXi => "d_xi",
            DerivKind::DEta => "d_eta",
            DerivKind::DQ => "d_q",
            DerivKind::D2XiXi => "d2_xi_xi",
            DerivKind::D2XiEta => "d2_xi_eta",
            DerivKind::D2EtaEta => "d2_eta_eta",
            DerivKind::D2XiQ => "d2_xi_q",
            DerivKind::DX => "d_x",
            DerivKind::DY => "d_y",
            DerivKind::FullDEta => "full_d_eta",
            DerivKind::FullDY => "full_d_y",
        }
    }
}

impl std::str::FromStr for DerivKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DerivKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown derivative kind '{s}'")))
    }
}

/// A number represented as `exp(exponent) * factor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub exponent: f64,
    pub factor: f64,
}

impl Scaled {
    pub fn value(self) -> f64 {
        if self.factor == 0.0 {
            0.0
        } else {
            self.exponent.exp() * self.factor
        }
    }
}

/// All derivatives of `g` at one field point, sharing the common factor
/// `exp(exponent)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledDerivs {
    pub exponent: f64,
    pub value: f64,
    pub d_xi: f64,
    pub d_eta: f64,
    pub d_q: f64,
    pub d2_xi_xi: f64,
    pub d2_xi_eta: f64,
    pub d2_eta_eta: f64,
    pub d2_xi_q: f64,
}

impl ScaledDerivs {
    /// Scaled factor of the requested kind; full derivatives use `chain`.
    pub fn factor(&self, kind: DerivKind, chain: ChainSlopes) -> f64 {
        match kind {
            DerivKind::Value => self.value,
            DerivKind::DXi => self.d_xi,
            DerivKind::DEta => self.d_eta,
            DerivKind::DQ => self.d_q,
            DerivKind::D2XiXi => self.d2_xi_xi,
            DerivKind::D2XiEta => self.d2_xi_eta,
            DerivKind::D2EtaEta => self.d2_eta_eta,
            DerivKind::D2XiQ => self.d2_xi_q,
            DerivKind::DX => -self.d_xi,
            DerivKind::DY => -self.d_eta,
            DerivKind::FullDEta => self.d_eta + 0.5 * chain.da_deta * self.d_q,
            DerivKind::FullDY => -self.d_eta + 0.5 * chain.da_dy * self.d_q,
        }
    }
}

/// Exponent `q (xi^ - r^)` of `g` at a field point; cheap, no Bessel call.
#[inline]
pub fn exponent_at(params: &FrozenParams, xi: f64, eta: f64) -> f64 {
    params.q * params.hat(xi, eta).xi_minus_r()
}

/// Value and every supported derivative of `g` in scaled form.
pub fn derivatives(params: &FrozenParams, xi: f64, eta: f64) -> Result<ScaledDerivs> {
    let h = params.hat(xi, eta);
    if h.r_hat == 0.0 {
        return Err(Error::SingularPoint { x: params.x, y: params.y });
    }
    Ok(derivatives_at(params.q, params.eps, h))
}

pub(crate) fn derivatives_at(q: f64, eps: f64, h: HatCoords) -> ScaledDerivs {
    let HatCoords { xi_hat: xs, eta_hat: es, r_hat: r } = h;
    let (k0, k1) = k0_k1_scaled_unchecked(q * r);
    let c1 = 1.0 / (TWO_PI * eps);
    let c2 = q / (TWO_PI * eps * eps);
    let c3 = q / (TWO_PI * eps * eps * eps);
    let cx = xs / r;
    let ce = es / r;

    let value = c1 * k0;
    let d_xi = c2 * (k0 - cx * k1);
    let d_eta = -c2 * ce * k1;
    let d_q = c1 * (xs * k0 - r * k1);
    let d2_xi_eta = c3 * (es / (r * r)) * (q * r * (cx * k0 - k1) + 2.0 * cx * k1);
    let d2_xi_q =
        c2 / r * (xs * r * (2.0 * k0 + k1 / (q * r)) - (xs * xs + r * r) * k1) + d_xi / q;
    let d2_eta_eta = c3 * (q * ce * ce * k0 + (es * es - xs * xs) / (r * r * r) * k1);
    // the adjoint equation away from the source
    let d2_xi_xi = -d2_eta_eta + 2.0 * q / eps * d_xi;

    ScaledDerivs {
        exponent: q * h.xi_minus_r(),
        value,
        d_xi,
        d_eta,
        d_q,
        d2_xi_xi,
        d2_xi_eta,
        d2_eta_eta,
        d2_xi_q,
    }
}

/// `g` or one of its derivatives at field point `(xi, eta)`.
pub fn eval_g(params: &FrozenParams, point: (f64, f64), kind: DerivKind) -> Result<f64> {
    eval_g_scaled(params, point, kind).map(Scaled::value)
}

pub fn eval_g_scaled(params: &FrozenParams, point: (f64, f64), kind: DerivKind) -> Result<Scaled> {
    let d = derivatives(params, point.0, point.1)?;
    Ok(Scaled { exponent: d.exponent, factor: d.factor(kind, params.chain) })
}

/// Second xi-derivative from the explicit closed form (not via the adjoint
/// equation). Kept as an independent route for cross-checks.
pub fn d2_xi_xi_closed_form(params: &FrozenParams, point: (f64, f64)) -> Result<f64> {
    let h = params.hat(point.0, point.1);
    if h.r_hat == 0.0 {
        return Err(Error::SingularPoint { x: params.x, y: params.y });
    }
    let (q, eps) = (params.q, params.eps);
    let HatCoords { xi_hat: xs, eta_hat: es, r_hat: r } = h;
    let (k0, k1) = k0_k1_scaled_unchecked(q * r);
    let c3 = q / (TWO_PI * eps * eps * eps);
    let f = c3
        * (q * (k0 + xs * xs / (r * r) * k0 - 2.0 * xs / r * k1)
            + (xs * xs - es * es) / (r * r * r) * k1);
    Ok(Scaled { exponent: q * h.xi_minus_r(), factor: f }.value())
}

/// Parameters of the three-dimensional fundamental solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params3 {
    pub source: [f64; 3],
    pub q: f64,
    pub eps: f64,
}

/// `g3 = 1/(4 pi eps) r^{-1} exp(q (xi_1 - x_1 - r)/eps)`.
pub fn eval_g3(params: &Params3, point: [f64; 3]) -> Result<f64> {
    let d = [
        point[0] - params.source[0],
        point[1] - params.source[1],
        point[2] - params.source[2],
    ];
    let transverse2 = d[1] * d[1] + d[2] * d[2];
    let r = (d[0] * d[0] + transverse2).sqrt();
    if r == 0.0 {
        return Err(Error::SingularPoint { x: params.source[0], y: params.source[1] });
    }
    if !(params.q > 0.0 && params.eps > 0.0 && params.eps <= 1.0) {
        return domain("g3 needs q > 0 and eps in (0, 1]");
    }
    let along_minus_r = if d[0] > 0.0 { -transverse2 / (d[0] + r) } else { d[0] - r };
    Ok((params.q * along_minus_r / params.eps).exp() / (4.0 * std::f64::consts::PI * params.eps * r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(q: f64, eps: f64) -> FrozenParams {
        FrozenParams::new(0.0, 0.0, q, eps).unwrap()
    }

    #[test]
    fn value_on_transverse_axis() {
        // K0(0.5) / (2 pi 0.1)
        let v = eval_g(&p(0.5, 0.1), (0.0, 0.1), DerivKind::Value).unwrap();
        let expected = 0.924_419_071_227_665_9 / (TWO_PI * 0.1);
        assert!((v / expected - 1.0).abs() < 1e-14, "{v} vs {expected}");
    }

    #[test]
    fn symmetric_in_eta() {
        let params = p(0.5, 0.1);
        for t in [0.01, 0.3, 2.0] {
            let a = eval_g(&params, (0.2, t), DerivKind::Value).unwrap();
            let b = eval_g(&params, (0.2, -t), DerivKind::Value).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn eta_derivative_vanishes_on_axis() {
        let v = eval_g(&p(0.5, 0.1), (0.3, 0.0), DerivKind::DEta).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn singular_point_is_reported() {
        let err = eval_g(&p(0.5, 0.1), (0.0, 0.0), DerivKind::Value).unwrap_err();
        assert!(matches!(err, Error::SingularPoint { .. }));
    }

    #[test]
    fn params_validation() {
        assert!(FrozenParams::new(0.5, 0.5, 0.0, 0.1).is_err());
        assert!(FrozenParams::new(0.5, 0.5, 0.5, 1.5).is_err());
        assert!(FrozenParams::new(3.5, 0.5, 0.5, 0.1).is_err());
        assert!(FrozenParams::new(0.5, 0.5, 0.4, 0.1).unwrap().with_alpha(1.0).is_err());
    }

    #[test]
    fn weights_examples() {
        assert_eq!(Weights::new(1.0, 0.7, 0.01).log_lambda, 0.0);
        assert_eq!(Weights::new(0.0, 0.7, 0.01).log_p, 0.0);
        assert!((Weights::new(0.5, 0.5, 0.1).log_lambda_minus - 5.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_second_derivative_matches_adjoint_route() {
        let params = p(0.8, 0.05);
        for &(xi, eta) in &[(0.03, 0.02), (-0.04, 0.01), (0.3, -0.05), (0.001, 0.2)] {
            let a = eval_g(&params, (xi, eta), DerivKind::D2XiXi).unwrap();
            let b = d2_xi_xi_closed_form(&params, (xi, eta)).unwrap();
            let scale = eval_g(&params, (xi, eta), DerivKind::D2EtaEta).unwrap().abs()
                + 2.0 * 0.8 / 0.05 * eval_g(&params, (xi, eta), DerivKind::DXi).unwrap().abs();
            assert!((a - b).abs() <= 1e-12 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn g3_examples() {
        let params = Params3 { source: [0.0; 3], q: 0.5, eps: 0.1 };
        let v = eval_g3(&params, [0.0, 0.1, 0.0]).unwrap();
        let expected = 1.0 / (4.0 * std::f64::consts::PI * 0.1) / 0.1 * (-0.5f64).exp();
        assert!((v / expected - 1.0).abs() < 1e-14);
        assert!((v - 4.8266).abs() < 1e-3);
        let on_axis = eval_g3(&params, [0.37, 0.0, 0.0]).unwrap();
        assert!((on_axis - 1.0 / (4.0 * std::f64::consts::PI * 0.1 * 0.37)).abs() < 1e-12);
        let a = eval_g3(&params, [0.1, 0.2, -0.05]).unwrap();
        let b = eval_g3(&params, [0.1, -0.05, 0.2]).unwrap();
        assert_eq!(a, b);
        assert!(eval_g3(&params, [0.0; 3]).is_err());
    }
}
