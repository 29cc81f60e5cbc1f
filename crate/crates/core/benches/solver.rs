use std::hint::black_box;

use cods_core::solver::{brute_force_solve_with, BruteForceConfig};
use cods_core::space::{Dimension, MetaInfo};
use cods_core::{compile, solve, CompiledConstraintSet, DesignSpace, ElementRef, Execution, SymbolicConstraint};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

/// `n` dimensions of `m` elements with a deterministic mix of couplings and
/// preferences.
fn instance(n: usize, m: usize) -> (DesignSpace, CompiledConstraintSet) {
    let dims = (0..n).map(|i| Dimension::new(format!("d{i}"), (0..m).map(|j| format!("e{i}_{j}"))));
    let space = DesignSpace::new("bench", MetaInfo::default(), dims.collect()).unwrap();
    let cell = |k: usize| ElementRef::new(k % n, (k * 7 + 3) % m);
    let mut cs = Vec::new();
    for k in 0..n {
        cs.push(SymbolicConstraint::exclusive(cell(k), cell(k + 1)));
        cs.push(SymbolicConstraint::implies(vec![cell(2 * k)], vec![cell(2 * k + 3), cell(3 * k + 1)]));
        cs.push(SymbolicConstraint::prefer(vec![cell(5 * k + 2)], 1.0 + (k % 3) as f64));
        cs.push(SymbolicConstraint::avoid(vec![cell(4 * k + 1)], 1.0));
    }
    let set = compile(&space, &cs).unwrap();
    (space, set)
}

fn solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for (n, m) in [(5, 6), (6, 8)] {
        let (space, set) = instance(n, m);
        let label = format!("{n}x{m}");
        group.bench_with_input(BenchmarkId::new("branch_and_bound", &label), &(), |b, _| {
            b.iter(|| solve(black_box(&space), black_box(&set)).unwrap())
        });
        for (name, execution) in [("enumerate_sequential", Execution::Sequential), ("enumerate_parallel", Execution::Parallel)] {
            let config = BruteForceConfig {
                execution,
                ..BruteForceConfig::default()
            };
            group.bench_with_input(BenchmarkId::new(name, &label), &(), |b, _| {
                b.iter(|| brute_force_solve_with(black_box(&space), black_box(&set), config).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, solvers);
criterion_main!(benches);
