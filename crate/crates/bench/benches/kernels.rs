use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sibuya_bench::{catalog, cmp_model, nbd_model};
use sibuya_core::bd::{simulate_ctmc, stationary_solve, SimConfig};
use sibuya_core::branching::{offspring_from_progeny, progeny_sign_diagnosis};
use sibuya_core::distributions::{pmf_table, recurrence_table};
use sibuya_core::gf::{pgf_coefficients, pgf_thin};
use sibuya_core::moments::{abs_moment_classify, default_ladder};
use sibuya_core::sampling::sample;
use sibuya_core::selfdecomp::residual_pgf;
use sibuya_core::{Family, Pgf};

fn tables(c: &mut Criterion) {
    let mut g = c.benchmark_group("pmf_table_200");
    for (name, spec) in catalog() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &spec, |b, s| b.iter(|| pmf_table(black_box(s), 200)));
    }
    g.finish();
    let spec = Family::ExtendedSibuya { b: 0.9, gamma: 0.6 }.into();
    c.bench_function("recurrence_table_1000", |b| b.iter(|| recurrence_table(black_box(&spec), 1000)));
    let thinned = pgf_thin(&Pgf::family(Family::Cmp2 { theta: 4.0 }.into()), 0.5).unwrap();
    c.bench_function("contour_coefficients_100", |b| b.iter(|| pgf_coefficients(black_box(&thinned), 100)));
}

fn birth_death(c: &mut Criterion) {
    let m = nbd_model();
    c.bench_function("stationary_solve_nbd_500", |b| b.iter(|| stationary_solve(black_box(&m), 500)));
    let m = cmp_model();
    c.bench_function("simulate_ctmc_cmp_1e4", |b| b.iter(|| simulate_ctmc(&m, &SimConfig::new(1e4, 1, 0))));
}

fn analysis(c: &mut Criterion) {
    let p = Pgf::family(Family::Sibuya { gamma: 0.6 }.into());
    c.bench_function("abs_moment_classify", |b| b.iter(|| abs_moment_classify(&p, black_box(0.3), &default_ladder())));
    let p = Pgf::family(Family::MittagLeffler { lambda: 1.0, gamma: 0.5 }.into());
    c.bench_function("residual_pgf_80", |b| b.iter(|| residual_pgf(&p, black_box(0.5), 80)));
    let q = Pgf::family(Family::ExtendedSibuya { b: 0.9, gamma: 0.6 }.into());
    c.bench_function("offspring_from_progeny_60", |b| b.iter(|| offspring_from_progeny(&q, 60)));
    c.bench_function("sign_diagnosis_100", |b| b.iter(|| progeny_sign_diagnosis(0.8, black_box(0.4), 100)));
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_1e5");
    g.sample_size(10);
    for (name, spec) in catalog() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &spec, |b, s| b.iter(|| sample(s, 100_000, 7)));
    }
    g.finish();
}

criterion_group!(benches, tables, birth_death, analysis, sampling);
criterion_main!(benches);
