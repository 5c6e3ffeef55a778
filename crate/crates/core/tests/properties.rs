use std::sync::Arc;

use cdgreen::fdsolver::{assemble, discrete_green, BoundaryCondition, LayerSide, Operator, TensorMesh};
use cdgreen::fundamental::{eval_g, DerivKind, FrozenParams};
use cdgreen::image_green::{cutoff, CutoffKind};
use cdgreen::specfun::{bessel_k0, bessel_k0_scaled, bessel_k1};
use cdgreen::{CoefficientField, Execution, ImageGreen, ImageGreenSpec, Variant};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bessel_ordering(s in 1e-6f64..600.0) {
        let (k0, k1) = (bessel_k0(s).unwrap(), bessel_k1(s).unwrap());
        prop_assert!(k0 > 0.0 && k1 > k0);
        prop_assert!(bessel_k0(s * 1.01).unwrap() < k0);
        let scaled = bessel_k0_scaled(s).unwrap();
        prop_assert!(((k0 * s.exp()) / scaled - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cutoffs_mirror_each_other(t in 0.0f64..=1.0) {
        let w0 = cutoff(CutoffKind::Omega0, t, 0).unwrap();
        prop_assert!((0.0..=1.0).contains(&w0));
        prop_assert_eq!(cutoff(CutoffKind::Omega1, 1.0 - t, 0).unwrap(), w0);
        prop_assert!(cutoff(CutoffKind::Omega0, t, 1).unwrap() <= 0.0);
    }

    #[test]
    fn fundamental_solution_is_positive_and_even_in_eta(
        x in 0.0f64..1.0, y in 0.0f64..1.0, dx in -0.5f64..0.5, dy in 1e-3f64..0.5,
        q in 0.25f64..2.0, eps in 1e-3f64..1.0,
    ) {
        let p = FrozenParams::new(x, y, q, eps).unwrap();
        let up = eval_g(&p, (x + dx, y + dy), DerivKind::Value).unwrap();
        let down = eval_g(&p, (x + dx, y - dy), DerivKind::Value).unwrap();
        // offsets y +- dy - y round differently
        prop_assert!(up >= 0.0);
        prop_assert!((up - down).abs() <= 1e-11 * up, "{} vs {}", up, down);
    }

    #[test]
    fn square_approximation_vanishes_on_every_edge(
        x in 0.01f64..0.99, y in 0.01f64..0.99, t in 0.0f64..=1.0, edge in 0usize..4, eps in 1e-3f64..0.5,
    ) {
        let spec = ImageGreenSpec { variant: Variant::BarSquare, field: CoefficientField::constant(1.0, 0.0).unwrap(), eps };
        let g = ImageGreen::new(spec, (x, y)).unwrap();
        let p = [(0.0, t), (1.0, t), (t, 0.0), (t, 1.0)][edge];
        let v = g.eval(p, DerivKind::Value).unwrap();
        let free = eval_g(&FrozenParams::new(x, y, 0.5, eps).unwrap(), p, DerivKind::Value).unwrap();
        prop_assert!(v.abs() <= 1e-14 * free + f64::MIN_POSITIVE, "{} vs {}", v, free);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn discrete_green_is_nonnegative(
        a in 0.5f64..3.0, b in 0.0f64..2.0, log_eps in -4.0f64..0.0, neumann in any::<bool>(),
        sx in 0.1f64..0.9, sy in 0.1f64..0.9,
    ) {
        let eps = 10f64.powf(log_eps);
        let bc = if neumann { BoundaryCondition::NeumannTopBottom } else { BoundaryCondition::Dirichlet };
        let field = CoefficientField::constant(a, b).unwrap();
        let mesh = Arc::new(TensorMesh::shishkin(24, eps, a, LayerSide::Low).unwrap());
        let sys = assemble(&field, eps, mesh.clone(), Operator::Adjoint, bc, Execution::Sequential).unwrap();
        let g = discrete_green(&sys, mesh.nearest_interior(sx, sy)).unwrap();
        prop_assert!(g.min() >= 0.0);
        prop_assert!(g.integral() <= 1.0 / a * (1.0 + 1e-9));
    }
}
