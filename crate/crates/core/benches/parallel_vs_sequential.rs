use std::hint::black_box;
use std::sync::Arc;

use cdgreen::fdsolver::{assemble, BoundaryCondition, LayerSide, Operator, TensorMesh};
use cdgreen::image_green::{sample_grid, GridSpec};
use cdgreen::quadrature::{l1_norm, NormIntegrand, NormRequest, Region};
use cdgreen::{CoefficientField, DerivKind, Execution, ImageGreen, ImageGreenSpec, Variant};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn green(eps: f64) -> ImageGreen {
    let spec = ImageGreenSpec { variant: Variant::BarSquare, field: CoefficientField::constant(1.0, 0.0).unwrap(), eps };
    ImageGreen::new(spec, (1.0 / 3.0, 0.5)).unwrap()
}

fn grid_sampling(c: &mut Criterion) {
    let g = green(1e-3);
    let grid = GridSpec::unit(129);
    let mut group = c.benchmark_group("sample_grid_129");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sample_grid(black_box(&g), &grid, DerivKind::Value, exec).unwrap())
        });
    }
    group.finish();
}

fn norms(c: &mut Criterion) {
    let g = green(1e-3);
    let mut group = c.benchmark_group("l1_norm_d_eta");
    group.sample_size(20);
    for (name, exec) in MODES {
        let req = NormRequest::new(NormIntegrand::DEta, Region::UnitSquare).with_exec(exec);
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| l1_norm(black_box(&g), &req).unwrap()));
    }
    group.finish();
}

fn assembly(c: &mut Criterion) {
    let field = CoefficientField::constant(1.0, 0.0).unwrap();
    let mesh = Arc::new(TensorMesh::shishkin(256, 1e-3, 1.0, LayerSide::Low).unwrap());
    let mut group = c.benchmark_group("assemble_256");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                assemble(&field, 1e-3, mesh.clone(), Operator::Adjoint, BoundaryCondition::Dirichlet, exec).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, grid_sampling, norms, assembly);
criterion_main!(benches);
