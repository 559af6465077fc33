use anisolve_core::{
    anisotropic_energy, apply_operator, capacity_compact, run_scheme, EpsilonSchedule, FluxField,
    Grid, GridFunction, LerayLionsField, MeasureData, MonotoneGraph, NodeSet, SolverOptions,
};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn graph_kernels(c: &mut Criterion) {
    let graphs = [
        ("identity", MonotoneGraph::identity()),
        ("power3", MonotoneGraph::power(3.0).unwrap()),
        ("indicator", MonotoneGraph::indicator(-1.0, 1.0).unwrap()),
    ];
    for (name, g) in &graphs {
        c.bench_function(&format!("yosida_{name}"), |b| {
            b.iter(|| {
                let mut acc = 0.0;
                for i in 0..256 {
                    let s = -5.0 + 10.0 * i as f64 / 255.0;
                    acc += g.yosida(black_box(0.01), black_box(s));
                }
                acc
            })
        });
        c.bench_function(&format!("moreau_{name}"), |b| {
            b.iter(|| g.moreau(black_box(0.1), black_box(2.5)))
        });
    }
}

fn operator_kernels(c: &mut Criterion) {
    let g = Grid::new(&[129, 129], &[1.0, 1.0], &[1.6, 2.0]).unwrap();
    let field = LerayLionsField::model(2);
    let u = GridFunction::from_fn(&g, |x| {
        (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).sin()
    });
    c.bench_function("apply_operator_129x129", |b| {
        b.iter(|| apply_operator(black_box(&g), black_box(&field), black_box(&u)))
    });
    c.bench_function("anisotropic_energy_129x129", |b| {
        b.iter(|| anisotropic_energy(black_box(&g), black_box(&u)))
    });
}

fn solver_and_capacity(c: &mut Criterion) {
    let mut group = c.benchmark_group("solves");
    group.sample_size(10);
    group.bench_function("scheme_obstacle_1d_129", |b| {
        let g = Grid::new(&[129], &[1.0], &[2.0]).unwrap();
        let field = LerayLionsField::model(1);
        let graph = MonotoneGraph::indicator(-1.0, 1.0).unwrap();
        let mu = MeasureData::new(&g, vec![10.0; 129], FluxField::zeros(&g), vec![]).unwrap();
        let schedule = EpsilonSchedule::new(1.0, 0.5, 26).unwrap();
        let opts = SolverOptions {
            tol_scheme: 1e-6,
            ..Default::default()
        };
        b.iter(|| run_scheme(&g, &field, &graph, &mu, &schedule, &opts).unwrap())
    });
    group.bench_function("capacity_midpoint_1d_129", |b| {
        let g = Grid::new(&[129], &[1.0], &[2.0]).unwrap();
        b.iter(|| capacity_compact(&g, &NodeSet::compact(vec![64])))
    });
    group.finish();
}

criterion_group!(
    benches,
    graph_kernels,
    operator_kernels,
    solver_and_capacity
);
criterion_main!(benches);
