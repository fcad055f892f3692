use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kreinspec::discrete_graph::{almost_mathieu_spectrum, z2_bloch_bands, FluxModel, MagneticGraph};
use kreinspec::dot_array::{array_spectrum, DotArrayModel};
use kreinspec::krein::{detect_eigenvalues, DetectOptions};
use kreinspec::linalg::hermitian_eigen;
use kreinspec::quantum_graph::{duality_spectrum_auto, finite_difference_oracle, secular_oracle, QuantumGraphModel};
use kreinspec::sturm_liouville::{dirichlet_spectrum, fundamental_system, Potential, SegmentQFunction};
use kreinspec::{BoundaryPair, CMatrix};
use num_complex::Complex64;

fn sturm_liouville(c: &mut Criterion) {
    let smooth = Potential::function(|x| 10.0 * (2.0 * PI * x).cos());
    let mut g = c.benchmark_group("sturm_liouville");
    g.bench_function("fundamental_system/smooth", |b| {
        b.iter(|| fundamental_system(&smooth, black_box(Complex64::new(30.0, 0.5))).unwrap())
    });
    g.bench_function("fundamental_system/constant", |b| {
        b.iter(|| fundamental_system(&Potential::zero(), black_box(Complex64::new(30.0, 0.5))).unwrap())
    });
    g.bench_function("dirichlet_spectrum/10", |b| b.iter(|| dirichlet_spectrum(&smooth, 10).unwrap()));
    g.finish();
}

fn krein(c: &mut Criterion) {
    let q = SegmentQFunction::new(Potential::zero()).unwrap();
    let neumann = BoundaryPair::from_operator(CMatrix::zeros(2, 2)).unwrap();
    c.bench_function("detect_eigenvalues/neumann_segment", |b| {
        b.iter(|| detect_eigenvalues(&q, &neumann, (-5.0, PI * PI - 1e-3), &DetectOptions::default()).unwrap())
    });
}

fn eigensolver(c: &mut Criterion) {
    let mut g = c.benchmark_group("hermitian_eigen");
    for n in [8usize, 32, 64] {
        let m = CMatrix::from_fn(n, n, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            Complex64::new((a + 1.0) / (b + 2.0), if i < j { 0.1 } else if i > j { -0.1 } else { 0.0 })
        });
        g.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| hermitian_eigen(m).unwrap()));
    }
    g.finish();
}

fn lattice(c: &mut Criterion) {
    let mut g = c.benchmark_group("lattice");
    g.sample_size(20);
    for (p, q) in [(1, 2), (1, 5), (3, 8)] {
        let fm = FluxModel::new(p, q, 1.0, 1.0).unwrap();
        g.bench_function(format!("z2_bloch_bands/{p}_{q}/64"), |b| b.iter(|| z2_bloch_bands(&fm, (64, 64)).unwrap()));
    }
    let fm = FluxModel::new(1, 3, 1.0, 1.0).unwrap();
    g.bench_function("almost_mathieu/2048", |b| b.iter(|| almost_mathieu_spectrum(&fm, 0.3, 2048).unwrap()));
    g.finish();
}

fn quantum_graph(c: &mut Criterion) {
    let window = (1e-6, PI * PI - 1e-3);
    let c6 = QuantumGraphModel::new(MagneticGraph::cycle(6, 0.4).unwrap(), Potential::zero(), 2.5).unwrap();
    let mut g = c.benchmark_group("quantum_graph");
    g.sample_size(10);
    g.bench_function("duality/C6", |b| b.iter(|| duality_spectrum_auto(&c6, window).unwrap()));
    g.bench_function("secular/C6/2000", |b| b.iter(|| secular_oracle(&c6, window, 2000).unwrap()));
    g.bench_function("fd/C6/h=1e-3", |b| b.iter(|| finite_difference_oracle(&c6, 1e-3, window).unwrap()));
    g.finish();
}

fn dot_array(c: &mut Criterion) {
    let model = DotArrayModel::new(0.3, 1.0, FluxModel::new(1, 2, 1.0, 1.0).unwrap()).unwrap();
    let q = model.q();
    let (lo, hi) = (q.gap(1).0 + 1e-6, q.gap(3).1 - 1e-6);
    let mut g = c.benchmark_group("dot_array");
    g.sample_size(20);
    g.bench_function("array_spectrum/3_gaps", |b| b.iter(|| array_spectrum(&model, (lo, hi)).unwrap()));
    g.finish();
}

criterion_group!(benches, sturm_liouville, krein, eigensolver, lattice, quantum_graph, dot_array);
criterion_main!(benches);
