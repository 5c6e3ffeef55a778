use cdgreen::fundamental::DerivKind;
use cdgreen::quadrature::{l1_norm, NormIntegrand, NormRequest, Region};
use cdgreen::{CoefficientField, Error, Execution, ImageGreen, ImageGreenSpec, Variant};

fn green(eps: f64, singular: (f64, f64)) -> ImageGreen {
    let spec = ImageGreenSpec { variant: Variant::BarSquare, field: CoefficientField::constant(1.0, 0.0).unwrap(), eps };
    ImageGreen::new(spec, singular).unwrap()
}

/// Tensor midpoint rule with `n x n` cells, summed row by row.
fn midpoint(g: &ImageGreen, kind: DerivKind, xi: (f64, f64), eta: (f64, f64), n: usize) -> f64 {
    let (hx, hy) = ((xi.1 - xi.0) / n as f64, (eta.1 - eta.0) / n as f64);
    let rows = Execution::Parallel.map_range(n, |j| {
        let e = eta.0 + (j as f64 + 0.5) * hy;
        cdgreen::par::compensated_sum((0..n).map(|i| g.eval((xi.0 + (i as f64 + 0.5) * hx, e), kind).unwrap().abs()))
    });
    cdgreen::par::compensated_sum(rows) * hx * hy
}

/// Richardson extrapolation of the midpoint rule at `n` and `2n`.
fn oracle(g: &ImageGreen, kind: DerivKind, xi: (f64, f64), eta: (f64, f64), n: usize) -> f64 {
    (4.0 * midpoint(g, kind, xi, eta, 2 * n) - midpoint(g, kind, xi, eta, n)) / 3.0
}

fn norm(g: &ImageGreen, integrand: NormIntegrand, region: Region, tol: f64) -> f64 {
    l1_norm(g, &NormRequest::new(integrand, region).with_tol(tol)).unwrap().value
}

#[test]
fn matches_a_brute_force_midpoint_oracle() {
    let g = green(0.1, (0.3, 0.5));
    let window = Region::StripWindow { xi: (0.6, 1.0), eta: (0.0, 1.0) };
    for (integrand, kind) in [(NormIntegrand::Value, DerivKind::Value), (NormIntegrand::DXi, DerivKind::DXi)] {
        let oracle = oracle(&g, kind, (0.6, 1.0), (0.0, 1.0), 256);
        let ours = norm(&g, integrand, window, 1e-6);
        assert!((ours - oracle).abs() <= 1e-4 * oracle, "{integrand}: {ours} vs {oracle}");
    }
    // the log singularity is integrable; midpoints never land on it
    let oracle = oracle(&g, DerivKind::Value, (0.0, 1.0), (0.0, 1.0), 256);
    let ours = norm(&g, NormIntegrand::Value, Region::UnitSquare, 1e-6);
    assert!((ours - oracle).abs() <= 1e-4 * oracle, "value: {ours} vs {oracle}");
}

#[test]
fn ball_and_complement_add_up() {
    for (eps, singular, rho) in [(0.1, (0.3, 0.5), 0.05), (0.01, (0.5, 0.5), 0.02), (0.01, (0.1, 0.2), 0.004)] {
        let g = green(eps, singular);
        let whole = norm(&g, NormIntegrand::W11, Region::UnitSquare, 1e-6);
        let inside = norm(&g, NormIntegrand::W11, Region::BallIntersectSquare { center: singular, radius: rho }, 1e-6);
        let outside = norm(&g, NormIntegrand::W11, Region::SquareMinusBall { center: singular, radius: rho }, 1e-6);
        assert!((inside + outside - whole).abs() <= 1e-5 * whole, "eps={eps}: {inside} + {outside} vs {whole}");
    }
}

#[test]
fn ball_norm_grows_with_the_radius() {
    let g = green(1e-2, (0.4, 0.5));
    let values: Vec<f64> = [1e-3, 3e-3, 1e-2, 3e-2, 0.1]
        .iter()
        .map(|&r| norm(&g, NormIntegrand::W11, Region::BallIntersectSquare { center: (0.4, 0.5), radius: r }, 1e-6))
        .collect();
    assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
}

#[test]
fn small_ball_at_a_regular_point_scales_with_area() {
    let g = green(0.05, (0.3, 0.5));
    let c = (0.6, 0.52);
    let v = g.eval(c, DerivKind::Value).unwrap().abs();
    for rho in [1e-3, 1e-4] {
        let n = norm(&g, NormIntegrand::Value, Region::BallIntersectSquare { center: c, radius: rho }, 1e-8);
        let expected = std::f64::consts::PI * rho * rho * v;
        assert!((n / expected - 1.0).abs() < 1e-3, "rho={rho}: {n} vs {expected}");
    }
}

#[test]
fn error_estimates_cover_the_tight_value() {
    for eps in [0.1, 1e-3] {
        let g = green(eps, (1.0 / 3.0, 0.5));
        for integrand in [NormIntegrand::Value, NormIntegrand::DXi, NormIntegrand::DEta] {
            let coarse = l1_norm(&g, &NormRequest::new(integrand, Region::UnitSquare).with_tol(1e-3)).unwrap();
            let fine = norm(&g, integrand, Region::UnitSquare, 1e-6);
            let gap = (coarse.value - fine).abs();
            assert!(gap <= coarse.abs_error_estimate, "eps={eps} {integrand}: gap {gap:e} vs {:e}", coarse.abs_error_estimate);
            assert!(coarse.abs_error_estimate <= 1e-3 * coarse.value * 1.0001);
        }
    }
}

#[test]
fn parallel_and_sequential_are_bitwise_equal() {
    let g = green(1e-3, (0.5, 0.5));
    let region = Region::SquareMinusBall { center: (0.5, 0.5), radius: 5e-4 };
    let req = NormRequest::new(NormIntegrand::D2EtaEta, region);
    let a = l1_norm(&g, &req.with_exec(Execution::Parallel)).unwrap();
    let b = l1_norm(&g, &req.with_exec(Execution::Sequential)).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.abs_error_estimate.to_bits(), b.abs_error_estimate.to_bits());
    assert_eq!(a.cells_used, b.cells_used);
}

#[test]
fn tiny_budgets_report_the_partial_estimate() {
    let g = green(1e-3, (0.5, 0.5));
    let req = NormRequest::new(NormIntegrand::DEta, Region::UnitSquare).with_tol(1e-9).with_max_cells(200);
    match l1_norm(&g, &req) {
        Err(Error::BudgetExceeded { cells, estimate, .. }) => {
            assert!(cells >= 200);
            assert!(estimate > 0.0);
        }
        other => panic!("expected a budget error, got {other:?}"),
    }
}
