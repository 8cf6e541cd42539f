use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use smoothfem_core::export::paper_report;
use smoothfem_core::{
    assign_dofs, build_vandermonde, dual_basis, enumerate_multiindices, realize_functionals,
    BernsteinBasis, ElementParams, Simplex,
};

fn lattice(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_multiindices");
    for (n, k) in [(2, 9), (3, 27), (4, 17)] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("n{n}_k{k}")),
            &(n, k),
            |b, &(n, k)| b.iter(|| enumerate_multiindices(black_box(n), black_box(k)).unwrap()),
        );
    }
    group.finish();
}

fn assignment(c: &mut Criterion) {
    let mut group = c.benchmark_group("assign_dofs");
    for (n, m, k1) in [(2, 2, 0), (3, 3, 2), (4, 2, 1)] {
        let p = ElementParams::new(n, m, k1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, &p| {
            b.iter(|| assign_dofs(black_box(p)).unwrap())
        });
    }
    group.finish();

    let table = assign_dofs(ElementParams::new(3, 3, 2).unwrap()).unwrap();
    c.bench_function("paper_report/(3,3,2)", |b| {
        b.iter(|| paper_report(black_box(&table)).unwrap())
    });
}

fn element(c: &mut Criterion) {
    let mut group = c.benchmark_group("element");
    group.sample_size(20);
    for (n, m) in [(2, 2), (3, 1)] {
        let p = ElementParams::new(n, m, 0).unwrap();
        let simplex = Simplex::unit(n);
        let table = assign_dofs(p).unwrap();
        let functionals = realize_functionals(&table, &simplex).unwrap();
        let basis = BernsteinBasis::new(n, p.k());
        group.bench_with_input(BenchmarkId::new("vandermonde", p), &p, |b, _| {
            b.iter(|| build_vandermonde(&basis, black_box(&functionals), &simplex).unwrap())
        });
        let v = build_vandermonde(&basis, &functionals, &simplex).unwrap();
        group.bench_with_input(BenchmarkId::new("dual_basis", p), &p, |b, _| {
            b.iter(|| dual_basis(black_box(&v)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, lattice, assignment, element);
criterion_main!(benches);
