use cdgreen::fundamental::{eval_g, DerivKind, FrozenParams};
use cdgreen::image_green::{cutoff, sample_grid, CutoffKind, GridSpec};
use cdgreen::{CoefficientField, Error, Execution, ImageGreen, ImageGreenSpec, Preset, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn constant_spec(variant: Variant, eps: f64, a: f64) -> ImageGreenSpec {
    ImageGreenSpec { variant, field: CoefficientField::constant(a, 0.0).unwrap(), eps }
}

fn green(variant: Variant, eps: f64, singular: (f64, f64)) -> ImageGreen {
    ImageGreen::new(constant_spec(variant, eps, 1.0), singular).unwrap()
}

/// Free-space value at the singular point, the natural size of every term.
fn free_scale(q: f64, eps: f64, singular: (f64, f64), at: (f64, f64)) -> f64 {
    let p = FrozenParams::new(singular.0, singular.1, q, eps).unwrap();
    eval_g(&p, at, DerivKind::Value).unwrap().abs()
}

fn edge_points(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for k in 0..=n {
        let t = k as f64 / n as f64;
        out.extend([(0.0, t), (1.0, t), (t, 0.0), (t, 1.0)]);
    }
    out
}

#[test]
fn bar_square_vanishes_on_the_boundary_of_the_square() {
    for eps in [0.1, 0.01, 1e-3] {
        for singular in [(0.3, 0.5), (0.8, 0.1), (0.05, 0.95), (0.5, 0.5)] {
            let g = green(Variant::BarSquare, eps, singular);
            for p in edge_points(64) {
                let v = g.eval(p, DerivKind::Value).unwrap();
                let scale = free_scale(0.5, eps, singular, p) + f64::MIN_POSITIVE;
                assert!(v.abs() <= 1e-14 * scale, "eps={eps} {singular:?} at {p:?}: {v:e} vs {scale:e}");
            }
        }
    }
}

#[test]
fn tilde_square_vanishes_for_boundary_singular_points() {
    let field = CoefficientField::from_preset(&Preset::Smooth { a0: 1.5, amp: 0.4, b0: 0.0 }).unwrap();
    for eps in [0.1, 0.01] {
        let spec = ImageGreenSpec { variant: Variant::TildeSquare, field: field.clone(), eps };
        for s in [0.0, 0.2, 0.5, 0.9, 1.0] {
            for singular in [(0.0, s), (1.0, s), (s, 0.0), (s, 1.0)] {
                let g = ImageGreen::new(spec.clone(), singular).unwrap();
                for field_point in [(0.3, 0.4), (0.7, 0.2), (0.5, 0.9), (0.05, 0.5)] {
                    let v = g.eval(field_point, DerivKind::Value).unwrap();
                    let q = 0.5 * field.a(field_point.0, field_point.1);
                    let scale = free_scale(q, eps, singular, field_point) + f64::MIN_POSITIVE;
                    assert!(v.abs() <= 1e-14 * scale, "{singular:?} {field_point:?}: {v:e}");
                }
            }
        }
    }
}

#[test]
fn neumann_variant_adds_doubled_reflections() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for eps in [0.2, 0.05] {
        for _ in 0..200 {
            let singular = (rng.gen_range(0.05..0.95), rng.gen_range(0.02..0.98));
            let p: (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            if (p.0 - singular.0).hypot(p.1 - singular.1) < 1e-3 {
                continue;
            }
            let (xi, eta) = p;

            let dir = green(Variant::BarSquare, eps, singular).eval(p, DerivKind::Value).unwrap();
            let neu = green(Variant::BarSquareNeumann, eps, singular).eval(p, DerivKind::Value).unwrap();
            let strip = green(Variant::BarStrip, eps, singular);
            let w0 = cutoff(CutoffKind::Omega0, eta, 0).unwrap();
            let w1 = cutoff(CutoffKind::Omega1, eta, 0).unwrap();
            let refl = 2.0
                * (w0 * strip.eval((xi, -eta), DerivKind::Value).unwrap()
                    + w1 * strip.eval((xi, 2.0 - eta), DerivKind::Value).unwrap());
            let scale = free_scale(0.5, eps, singular, p) + dir.abs() + refl.abs();
            assert!((neu - dir - refl).abs() <= 1e-13 * scale, "bar {singular:?} {p:?}");

            let dir = green(Variant::TildeSquare, eps, singular).eval(p, DerivKind::Value).unwrap();
            let neu = green(Variant::TildeSquareNeumann, eps, singular).eval(p, DerivKind::Value).unwrap();
            let (x, y) = singular;
            let w0 = cutoff(CutoffKind::Omega0, y, 0).unwrap();
            let w1 = cutoff(CutoffKind::Omega1, y, 0).unwrap();
            let refl = 2.0
                * (w0 * green(Variant::TildeStrip, eps, (x, -y)).eval(p, DerivKind::Value).unwrap()
                    + w1 * green(Variant::TildeStrip, eps, (x, 2.0 - y)).eval(p, DerivKind::Value).unwrap());
            let scale = free_scale(0.5, eps, singular, p) + dir.abs() + refl.abs();
            assert!((neu - dir - refl).abs() <= 1e-13 * scale, "tilde {singular:?} {p:?}");
        }
    }
}

/// Image sum written out with explicit weights `e^{q(d - x)/eps}` and plain
/// fundamental-solution evaluations; independent of the term tables.
fn direct_form(variant: Variant, eps: f64, a: f64, (x, y): (f64, f64), (xi, eta): (f64, f64)) -> f64 {
    let q = 0.5 * a;
    let g = |d: f64, ys: f64, e: f64| {
        let p = FrozenParams::new(d, ys, q, eps).unwrap();
        (q * (d - x) / eps).exp() * eval_g(&p, (xi, e), DerivKind::Value).unwrap()
    };
    let w = |kind, t| cutoff(kind, t, 0).unwrap();
    let strip = |ys: f64, e: f64| -> f64 {
        if variant.is_bar() {
            g(x, ys, e) - g(-x, ys, e) - w(CutoffKind::Omega1, xi) * (g(2.0 - x, ys, e) - g(2.0 + x, ys, e))
        } else {
            g(x, ys, e) - g(2.0 - x, ys, e) - w(CutoffKind::Omega0, x) * (g(-x, ys, e) - g(2.0 + x, ys, e))
        }
    };
    let base = strip(y, eta);
    if !variant.is_square() {
        return base;
    }
    let sign = if matches!(variant, Variant::BarSquareNeumann | Variant::TildeSquareNeumann) { 1.0 } else { -1.0 };
    if variant.is_bar() {
        base + sign * (w(CutoffKind::Omega0, eta) * strip(y, -eta) + w(CutoffKind::Omega1, eta) * strip(y, 2.0 - eta))
    } else {
        base + sign * (w(CutoffKind::Omega0, y) * strip(-y, eta) + w(CutoffKind::Omega1, y) * strip(2.0 - y, eta))
    }
}

#[test]
fn scaled_evaluation_matches_the_direct_image_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for variant in Variant::ALL {
        for (eps, a) in [(0.3, 1.0), (0.15, 2.0), (0.5, 0.5)] {
            for _ in 0..60 {
                let singular = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
                let p = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
                let g = ImageGreen::new(constant_spec(variant, eps, a), singular).unwrap();
                let ours = g.eval(p, DerivKind::Value).unwrap();
                let direct = direct_form(variant, eps, a, singular, p);
                let scale = free_scale(0.5 * a, eps, singular, p) + direct.abs();
                assert!(
                    (ours - direct).abs() <= 1e-11 * scale,
                    "{variant:?} eps={eps} {singular:?} {p:?}: {ours:e} vs {direct:e}"
                );
            }
        }
    }
}

fn central(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (f(h) - f(-h)) / (2.0 * h)
}

#[test]
fn derivatives_match_differences_for_every_variant() {
    let fields = [
        CoefficientField::constant(1.0, 0.0).unwrap(),
        CoefficientField::from_preset(&Preset::Linear { a0: 1.0, ax: 0.0, ay: 0.3, b0: 0.0 }).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let eps = 0.1;
    for variant in Variant::ALL {
        for field in &fields {
            let spec = ImageGreenSpec { variant, field: field.clone(), eps };
            let mut checked = 0;
            while checked < 40 {
                let singular: (f64, f64) = (rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9));
                let p = (rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
                if (p.0 - singular.0).hypot(p.1 - singular.1) < 0.5 * eps {
                    continue;
                }
                checked += 1;
                let h = 1e-5;
                let g = ImageGreen::new(spec.clone(), singular).unwrap();
                let at = |(xi, eta): (f64, f64), kind| g.eval((xi, eta), kind).unwrap();
                let moved = |s: (f64, f64), kind| ImageGreen::new(spec.clone(), s).unwrap().eval(p, kind).unwrap();
                let (xi, eta) = p;
                let (x, y) = singular;
                let tilde = !variant.is_bar();
                let d_eta_kind = if tilde { DerivKind::FullDEta } else { DerivKind::DEta };
                let d_y_kind = if tilde { DerivKind::DY } else { DerivKind::FullDY };
                let mut checks = vec![
                    (DerivKind::DXi, central(|d| at((xi + d, eta), DerivKind::Value), h)),
                    (d_eta_kind, central(|d| at((xi, eta + d), DerivKind::Value), h)),
                    (DerivKind::DX, central(|d| moved((x + d, y), DerivKind::Value), h)),
                    (d_y_kind, central(|d| moved((x, y + d), DerivKind::Value), h)),
                ];
                if field.as_constant().is_some() {
                    checks.extend([
                        (DerivKind::D2XiXi, central(|d| at((xi + d, eta), DerivKind::DXi), h)),
                        (DerivKind::D2XiEta, central(|d| at((xi, eta + d), DerivKind::DXi), h)),
                        (DerivKind::D2EtaEta, central(|d| at((xi, eta + d), DerivKind::DEta), h)),
                        (DerivKind::FullDEta, central(|d| at((xi, eta + d), DerivKind::Value), h)),
                        (DerivKind::FullDY, central(|d| moved((x, y + d), DerivKind::Value), h)),
                    ]);
                }
                let mag = at(p, DerivKind::Value).abs() + free_scale(0.5, eps, singular, p);
                for (kind, fd) in checks {
                    let an = at(p, kind);
                    let order = if matches!(kind, DerivKind::D2XiXi | DerivKind::D2XiEta | DerivKind::D2EtaEta) {
                        eps * eps
                    } else {
                        eps
                    };
                    let tol = 1e-5 * an.abs() + 1e-8 * mag / order;
                    assert!(
                        (an - fd).abs() <= tol,
                        "{variant:?} {} {singular:?} {p:?} {kind:?}: {an:e} vs {fd:e}",
                        field.label()
                    );
                }
            }
        }
    }
}

#[test]
fn q_derivatives_follow_the_convection() {
    let eps = 0.2;
    let q = 0.6;
    let hq = 1e-5;
    for variant in [Variant::BarStrip, Variant::TildeSquare, Variant::BarSquareNeumann] {
        let with = |dq: f64| ImageGreen::new(constant_spec(variant, eps, 2.0 * (q + dq)), (0.4, 0.45)).unwrap();
        for p in [(0.7, 0.5), (0.2, 0.3), (0.9, 0.8)] {
            let an = with(0.0).eval(p, DerivKind::DQ).unwrap();
            let fd = central(|d| with(d).eval(p, DerivKind::Value).unwrap(), hq);
            assert!((an - fd).abs() <= 1e-6 * an.abs().max(1e-3), "{variant:?} {p:?}: {an} vs {fd}");
            let an = with(0.0).eval(p, DerivKind::D2XiQ).unwrap();
            let fd = central(|d| with(d).eval(p, DerivKind::DXi).unwrap(), hq);
            assert!((an - fd).abs() <= 1e-6 * an.abs().max(1e-2), "{variant:?} {p:?}: {an} vs {fd}");
        }
    }
}

#[test]
fn square_matches_strip_away_from_horizontal_edges() {
    let eps = 1e-3;
    let singular = (0.3, 0.5);
    for (square, strip) in [(Variant::BarSquare, Variant::BarStrip), (Variant::TildeSquare, Variant::TildeStrip)] {
        let gs = green(square, eps, singular);
        let gt = green(strip, eps, singular);
        for xi in [0.31, 0.4, 0.6, 0.9, 0.99] {
            for eta in [0.45, 0.48, 0.5, 0.52, 0.55] {
                let a = gs.eval((xi, eta), DerivKind::Value).unwrap();
                let b = gt.eval((xi, eta), DerivKind::Value).unwrap();
                assert!((a - b).abs() <= 1e-6 * b.abs() + f64::MIN_POSITIVE, "{square:?} ({xi}, {eta})");
            }
        }
    }
}

#[test]
fn figure_one_field_has_a_downstream_wake() {
    let spec = constant_spec(Variant::BarSquare, 1e-3, 1.0);
    let g = ImageGreen::new(spec, (1.0 / 3.0, 0.5)).unwrap();
    let grid = GridSpec::unit(513);
    let par = sample_grid(&g, &grid, DerivKind::Value, Execution::Parallel).unwrap();
    let seq = sample_grid(&g, &grid, DerivKind::Value, Execution::Sequential).unwrap();
    assert_eq!(par.len(), 513 * 513);
    assert!(par.iter().zip(&seq).all(|(a, b)| a[2].to_bits() == b[2].to_bits()));

    let at = |i: usize, j: usize| par[j * 513 + i][2];
    let row = 256;
    // wake: slow decay downstream, exponential decay upstream
    let down = at(400, row);
    let up = at(120, row);
    assert!(down > 1.0 && up < 1e-30, "down={down:e} up={up:e}");
    // narrow in eta, of width ~ sqrt(eps (xi - x))
    assert!(at(400, row + 100) < 1e-6 * down && at(400, row + 20) > 1e-2 * down);
    // monotone decay along the centreline beyond the source
    let centre: Vec<f64> = (180..512).map(|i| at(i, row)).collect();
    assert!(centre.windows(2).all(|w| w[1] <= w[0]));
    assert!(par.iter().all(|s| s[2] >= -1e-12));
    let peak = par.iter().map(|s| s[2]).fold(0.0, f64::max);
    for k in 0..513 {
        for v in [at(0, k), at(512, k), at(k, 0), at(k, 512)] {
            assert!(v.abs() <= 1e-14 * peak);
        }
    }
}

fn defect_terms(eps: f64, q: f64, (x, y): (f64, f64), (xi, eta): (f64, f64)) -> (f64, f64) {
    let term = |d: f64| {
        let p = FrozenParams::new(d, y, q, eps).unwrap();
        let w = (q * (d - x) / eps).exp();
        (w * eval_g(&p, (xi, eta), DerivKind::Value).unwrap(), w * eval_g(&p, (xi, eta), DerivKind::DXi).unwrap())
    };
    let (m, dm) = term(2.0 - x);
    let (pl, dpl) = term(2.0 + x);
    (m - pl, dm - dpl)
}

#[test]
fn strip_defect_matches_its_closed_form() {
    let eps = 0.2;
    let q = 0.5;
    let singular = (0.5, 0.5);
    let g = green(Variant::BarStrip, eps, singular);
    let mut nonzero = 0;
    for k in 0..=40 {
        let xi = k as f64 / 40.0;
        for eta in [0.1, 0.45, 0.8, 1.4] {
            let res = g.frozen_residual((xi, eta)).unwrap();
            let (g2, dg2) = defect_terms(eps, q, singular, (xi, eta));
            let w1 = cutoff(CutoffKind::Omega1, xi, 1).unwrap();
            let w2 = cutoff(CutoffKind::Omega1, xi, 2).unwrap();
            let expected = 2.0 * eps * w1 * dg2 + (eps * w2 - 2.0 * q * w1) * g2;
            if xi >= 1.0 / 3.0 || xi <= 1.0 / 6.0 {
                assert_eq!(expected, 0.0);
                assert!(res.value.abs() <= 1e-7 * res.scale, "xi={xi} eta={eta}: {res:?}");
            } else {
                nonzero += 1;
                assert!(expected != 0.0);
                assert!((res.value - expected).abs() <= 1e-8 * res.scale, "xi={xi} eta={eta}: {res:?} vs {expected:e}");
            }
        }
    }
    assert!(nonzero > 0);
    let at_quarter = g.frozen_residual((0.25, 0.5)).unwrap();
    assert!(at_quarter.value.abs() > 1e-3 * at_quarter.scale);
}

#[test]
fn sampling_the_singular_point_is_an_error() {
    let singular = (0.25, 0.75);
    let g = green(Variant::BarSquare, 0.01, singular);
    let grid = GridSpec { nx: 1, ny: 1, xi: (singular.0, singular.0), eta: (singular.1, singular.1) };
    let err = sample_grid(&g, &grid, DerivKind::Value, Execution::Sequential).unwrap_err();
    assert!(matches!(err, Error::SingularPoint { .. }));
    assert!(matches!(g.eval((0.3, 1.2), DerivKind::Value), Err(Error::Domain(_))));
}
