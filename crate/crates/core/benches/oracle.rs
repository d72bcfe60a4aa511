//! Sequential against parallel execution of the oracle and subspace scans.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use inertial_core::endokit::{Endo, EndoDraft, Entry};
use inertial_core::exactnum::rat;
use inertial_core::exec::Exec;
use inertial_core::groupkit::build::*;
use inertial_core::linmap::{growth_bound_check, max_inert_codim, ExactMatrix, Field};
use inertial_core::oracle::{fs_profile, inertness_profile};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn prufer_diagonal() -> Endo {
    let g = Arc::new(group(vec![prufer(3, fin(2)), cyclic(3, 1, omega())]));
    EndoDraft::new(g)
        .push(Entry::Div { block: 0, src: 0, dst: 0, value: rat(1, 1) })
        .push(Entry::Div { block: 0, src: 1, dst: 1, value: rat(2, 1) })
        .build()
        .unwrap()
}

fn oracle(c: &mut Criterion) {
    let phi = prufer_diagonal();
    let mut g = c.benchmark_group("inertness_profile");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| inertness_profile(black_box(&phi), &[2, 4, 6], 200, 0, false, exec).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("fs_profile");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| fs_profile(black_box(&phi), &[2, 4], 50, 0, exec).unwrap())
        });
    }
    g.finish();
}

fn subspaces(c: &mut Criterion) {
    let shift = ExactMatrix::shift(Field::Fp(prime(2)), 8);
    let mut g = c.benchmark_group("max_inert_codim_f2_8");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| max_inert_codim(black_box(&shift), 256, exec).unwrap())
        });
    }
    g.finish();

    let m = ExactMatrix::shift(Field::Q, 10);
    let mut g = c.benchmark_group("growth_bound_check_q_10");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| growth_bound_check(black_box(&m), 500, 0, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, oracle, subspaces);
criterion_main!(benches);
