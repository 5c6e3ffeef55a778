//! Deterministic verification battery: special functions, derivative and
//! PDE consistency of `g`, boundary behaviour of the image sums, discrete
//! duality, the 1-D total-variation bound, and a small quadrature audit.
//!
//! All random samples come from a ChaCha stream seeded by the config, so two
//! runs with the same configuration write byte-identical reports.

use std::sync::Arc;

use cdgreen::fdsolver::{gamma_1d_check, representation_check, BoundaryCondition, LayerSide, TensorMesh};
use cdgreen::fundamental::{d2_xi_xi_closed_form, eval_g, FrozenParams};
use cdgreen::image_green::{cutoff, CutoffKind};
use cdgreen::quadrature::{l1_norm, NormIntegrand, NormRequest, Region};
use cdgreen::specfun::{bessel_k0, bessel_k0_scaled, bessel_k1, bessel_k1_scaled};
use cdgreen::{CoefficientField, DerivKind, ImageGreen, ImageGreenSpec, Preset, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{CheckGroup, RunConfig};
use crate::error::CliError;
use crate::report::{Check, Reporter};
use crate::Options;

const BESSEL_TABLE: &str = include_str!("../../../core/tests/data/bessel_k_reference.csv");
const SINGULAR: (f64, f64) = (0.4, 0.6);
const Q_EPS: [(f64, f64); 4] = [(0.5, 0.1), (0.5, 1e-3), (1.0, 0.1), (1.0, 1e-3)];

type Res<T> = Result<T, CliError>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn bessel(rep: &mut Reporter) -> Res<()> {
    let table: Vec<[f64; 3]> = BESSEL_TABLE
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|t| t.parse().expect("reference table parses")).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    let mut worst = 0.0f64;
    let mut worst_fd = 0.0f64;
    for &[s, k0, k1] in &table {
        worst = worst
            .max(rel(bessel_k0(s)?, k0))
            .max(rel(bessel_k1(s)?, k1))
            .max(rel(bessel_k0_scaled(s)?, k0 * s.exp()))
            .max(rel(bessel_k1_scaled(s)?, k1 * s.exp()));
        if k1 > 1e-250 {
            let h = 1e-5 * s.min(1.0);
            let d = (bessel_k0(s + h)? - bessel_k0(s - h)?) / (2.0 * h);
            worst_fd = worst_fd.max(rel(-d, k1));
        }
    }
    rep.check(Check::at_least("bessel reference entries", table.len() as f64, 200.0));
    rep.check(Check::at_most("bessel max relative error vs reference", worst, 1e-12));
    rep.check(Check::at_most("bessel K0' = -K1 finite-difference error", worst_fd, 1e-7));
    Ok(())
}

/// Field points at stretched distance `r^ in [0.1, 20]` around the source.
fn sample_points(rng: &mut ChaCha8Rng, eps: f64, n: usize) -> Vec<((f64, f64), f64)> {
    (0..n)
        .map(|_| {
            let r_hat = rng.gen_range(0.1f64.ln()..20f64.ln()).exp();
            let theta: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            ((SINGULAR.0 + eps * r_hat * theta.cos(), SINGULAR.1 + eps * r_hat * theta.sin()), r_hat)
        })
        .collect()
}

fn central(f: impl Fn(f64) -> Res<f64>, h: f64) -> Res<f64> {
    Ok((f(h)? - f(-h)?) / (2.0 * h))
}

fn derivatives(rep: &mut Reporter, rng: &mut ChaCha8Rng, points: usize) -> Res<()> {
    let mut worst = 0.0f64;
    for (q, eps) in Q_EPS {
        let p = FrozenParams::new(SINGULAR.0, SINGULAR.1, q, eps)?;
        for ((xi, eta), r_hat) in sample_points(rng, eps, points) {
            let at = |p: &FrozenParams, xi: f64, eta: f64, kind| eval_g(p, (xi, eta), kind).map_err(CliError::from);
            let h = 1e-4 * eps * r_hat.min(1.0).min(1.0 / q);
            let hq = 1e-4 * q * (1.0 / (1.0 + r_hat)).min(1.0);
            let with_q = |dq: f64| FrozenParams { q: q + dq, ..p };
            let with_xy = |dx: f64, dy: f64| FrozenParams { x: p.x + dx, y: p.y + dy, ..p };
            let checks = [
                (DerivKind::DXi, central(|d| at(&p, xi + d, eta, DerivKind::Value), h)?),
                (DerivKind::DEta, central(|d| at(&p, xi, eta + d, DerivKind::Value), h)?),
                (DerivKind::DQ, central(|d| at(&with_q(d), xi, eta, DerivKind::Value), hq)?),
                (DerivKind::D2XiXi, central(|d| at(&p, xi + d, eta, DerivKind::DXi), h)?),
                (DerivKind::D2XiEta, central(|d| at(&p, xi, eta + d, DerivKind::DXi), h)?),
                (DerivKind::D2EtaEta, central(|d| at(&p, xi, eta + d, DerivKind::DEta), h)?),
                (DerivKind::D2XiQ, central(|d| at(&with_q(d), xi, eta, DerivKind::DXi), hq)?),
                (DerivKind::DX, central(|d| at(&with_xy(d, 0.0), xi, eta, DerivKind::Value), h)?),
                (DerivKind::DY, central(|d| at(&with_xy(0.0, d), xi, eta, DerivKind::Value), h)?),
            ];
            let g = at(&p, xi, eta, DerivKind::Value)?.abs();
            for (kind, fd) in checks {
                let an = at(&p, xi, eta, kind)?;
                let order = if matches!(kind, DerivKind::D2XiXi | DerivKind::D2XiEta | DerivKind::D2EtaEta) { 2 } else { 1 };
                // floor against sign changes of the derivative
                let scale = g * ((q + 1.0 / r_hat) / eps).powi(order) * 1e-3;
                worst = worst.max((fd - an).abs() / an.abs().max(scale));
            }
        }
    }
    rep.check(Check::at_most("derivatives of g vs central differences", worst, 1e-5));
    Ok(())
}

fn frozen_pde(rep: &mut Reporter, rng: &mut ChaCha8Rng, points: usize) -> Res<()> {
    let mut worst = 0.0f64;
    for (q, eps) in Q_EPS {
        let p = FrozenParams::new(SINGULAR.0, SINGULAR.1, q, eps)?;
        for (pt, _) in sample_points(rng, eps, points) {
            let gxx = d2_xi_xi_closed_form(&p, pt)?;
            let gyy = eval_g(&p, pt, DerivKind::D2EtaEta)?;
            let gx = eval_g(&p, pt, DerivKind::DXi)?;
            let res = -eps * (gxx + gyy) + 2.0 * q * gx;
            let dominant = (eps * gxx).abs().max((eps * gyy).abs()).max((2.0 * q * gx).abs());
            worst = worst.max(res.abs() / dominant);
        }
    }
    rep.check(Check::at_most("frozen adjoint equation residual of g", worst, 1e-8));
    Ok(())
}

fn image(variant: Variant, field: &CoefficientField, eps: f64, singular: (f64, f64)) -> Res<ImageGreen> {
    Ok(ImageGreen::new(ImageGreenSpec { variant, field: field.clone(), eps }, singular)?)
}

fn free(q: f64, eps: f64, singular: (f64, f64), at: (f64, f64)) -> Res<f64> {
    Ok(eval_g(&FrozenParams::new(singular.0, singular.1, q, eps)?, at, DerivKind::Value)?.abs())
}

fn boundary(rep: &mut Reporter, rng: &mut ChaCha8Rng) -> Res<()> {
    let unit = CoefficientField::constant(1.0, 0.0)?;
    let mut worst_bar = 0.0f64;
    for eps in [0.1, 0.01, 1e-3] {
        for singular in [(0.3, 0.5), (0.8, 0.1), (0.05, 0.95), (1.0 / 3.0, 0.5)] {
            let g = image(Variant::BarSquare, &unit, eps, singular)?;
            for k in 0..=32 {
                let t = k as f64 / 32.0;
                for p in [(0.0, t), (1.0, t), (t, 0.0), (t, 1.0)] {
                    let v = g.eval(p, DerivKind::Value)?;
                    worst_bar = worst_bar.max(v.abs() / (free(0.5, eps, singular, p)? + f64::MIN_POSITIVE));
                }
            }
        }
    }
    rep.check(Check::at_most("bar square on the boundary, relative to g", worst_bar, 1e-14));

    let smooth = CoefficientField::from_preset(&Preset::Smooth { a0: 1.5, amp: 0.4, b0: 0.0 })?;
    let mut worst_tilde = 0.0f64;
    for eps in [0.1, 0.01] {
        for s in [0.0, 0.2, 0.5, 0.9, 1.0] {
            for singular in [(0.0, s), (1.0, s), (s, 0.0), (s, 1.0)] {
                let g = image(Variant::TildeSquare, &smooth, eps, singular)?;
                for fp in [(0.3, 0.4), (0.7, 0.2), (0.5, 0.9), (0.05, 0.5)] {
                    let v = g.eval(fp, DerivKind::Value)?;
                    let q = 0.5 * smooth.a(fp.0, fp.1);
                    worst_tilde = worst_tilde.max(v.abs() / (free(q, eps, singular, fp)? + f64::MIN_POSITIVE));
                }
            }
        }
    }
    rep.check(Check::at_most("tilde square for boundary singular points, relative to g", worst_tilde, 1e-14));

    let mut worst_neumann = 0.0f64;
    for eps in [0.2, 0.05] {
        for _ in 0..100 {
            let singular = (rng.gen_range(0.05..0.95), rng.gen_range(0.02..0.98));
            let p: (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            if (p.0 - singular.0).hypot(p.1 - singular.1) < 1e-3 {
                continue;
            }
            let dir = image(Variant::BarSquare, &unit, eps, singular)?.eval(p, DerivKind::Value)?;
            let neu = image(Variant::BarSquareNeumann, &unit, eps, singular)?.eval(p, DerivKind::Value)?;
            let strip = image(Variant::BarStrip, &unit, eps, singular)?;
            let w0 = cutoff(CutoffKind::Omega0, p.1, 0)?;
            let w1 = cutoff(CutoffKind::Omega1, p.1, 0)?;
            let refl = 2.0
                * (w0 * strip.eval((p.0, -p.1), DerivKind::Value)? + w1 * strip.eval((p.0, 2.0 - p.1), DerivKind::Value)?);
            let scale = free(0.5, eps, singular, p)? + dir.abs() + refl.abs();
            worst_neumann = worst_neumann.max((neu - dir - refl).abs() / scale);
        }
    }
    rep.check(Check::at_most("Neumann minus Dirichlet equals doubled reflections", worst_neumann, 1e-13));
    Ok(())
}

fn duality(rep: &mut Reporter, opts: &Options) -> Res<()> {
    let field = CoefficientField::from_preset(&Preset::Linear { a0: 1.0, ax: 0.5, ay: -0.2, b0: 0.3 })?;
    let mut worst = 0.0f64;
    for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::NeumannTopBottom] {
        for eps in [0.05, 1e-3] {
            let mesh = Arc::new(TensorMesh::shishkin(32, eps, field.alpha(), LayerSide::Low)?);
            let f = |x: f64, y: f64| 1.0 + x * y + (3.0 * x).sin();
            let r = representation_check(&field, eps, mesh, bc, (0.3, 0.6), f, opts.exec)?;
            worst = worst.max(r.rel_diff);
        }
    }
    rep.check(Check::at_most("discrete representation formula", worst, 1e-8));
    Ok(())
}

fn gamma(rep: &mut Reporter, opts: &Options) -> Res<()> {
    for a in [1.0, 2.0] {
        for eps in [0.5, 1e-3] {
            let tv = gamma_1d_check(move |_| a, eps, 2048, opts.exec)?;
            rep.check(Check::at_most(format!("1-D total variation a={a} eps={eps:e}"), tv, 2.2 / a));
        }
    }
    Ok(())
}

fn quadrature(rep: &mut Reporter, opts: &Options) -> Res<()> {
    let unit = CoefficientField::constant(1.0, 0.0)?;
    let tol = opts.tol();
    let mut masses = Vec::new();
    for eps in [0.1, 0.01] {
        let g = image(Variant::BarSquare, &unit, eps, (0.5, 0.5))?;
        let r = l1_norm(&g, &NormRequest::new(NormIntegrand::Value, Region::UnitSquare).with_tol(tol).with_exec(opts.exec))?;
        rep.check(Check::at_most(format!("L1 norm of bar square at eps={eps:e}"), r.value, 1.0 + tol));
        masses.push(r.value);
    }
    rep.check(Check::at_most("L1 norm variation between eps=0.1 and 0.01", super::spread(masses), 0.2));

    let g = image(Variant::BarSquare, &unit, 0.01, (0.5, 0.5))?;
    let norm = |region| -> Res<f64> {
        let req = NormRequest::new(NormIntegrand::W11, region).with_tol(1e-6).with_exec(opts.exec);
        Ok(l1_norm(&g, &req)?.value)
    };
    let whole = norm(Region::UnitSquare)?;
    let inside = norm(Region::BallIntersectSquare { center: (0.5, 0.5), radius: 0.02 })?;
    let outside = norm(Region::SquareMinusBall { center: (0.5, 0.5), radius: 0.02 })?;
    rep.check(Check::at_most("ball plus complement minus whole, relative", (inside + outside - whole).abs() / whole, 1e-5));
    Ok(())
}

pub fn run(config: &RunConfig, opts: &Options, rep: &mut Reporter) -> Result<(), CliError> {
    let sc = config.selfcheck.clone().unwrap_or_default();
    if sc.groups.is_empty() {
        return Err(CliError::Usage("selfcheck: the group list is empty".into()));
    }
    for group in CheckGroup::ALL.into_iter().filter(|g| sc.groups.contains(g)) {
        // independent stream per group so subsets reproduce the full run
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(group as u64);
        match group {
            CheckGroup::Bessel => bessel(rep)?,
            CheckGroup::Derivatives => derivatives(rep, &mut rng, sc.points)?,
            CheckGroup::FrozenPde => frozen_pde(rep, &mut rng, sc.points)?,
            CheckGroup::Boundary => boundary(rep, &mut rng)?,
            CheckGroup::Duality => duality(rep, opts)?,
            CheckGroup::Gamma => gamma(rep, opts)?,
            CheckGroup::Quadrature => quadrature(rep, opts)?,
        }
    }
    Ok(())
}
