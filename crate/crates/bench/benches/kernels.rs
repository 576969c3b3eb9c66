use criterion::{black_box, criterion_group, criterion_main, Criterion};
use dyadic_core::claims::{verify_claim, ClaimId};
use dyadic_core::examples::{e4_function, ExampleId, ExampleSpec, Params};
use dyadic_core::halfspace::{continuous_weak_norm_bounds, primitive_profile};
use dyadic_core::norms::{garo_dyadic, jnp_dyadic, op_norm};
use dyadic_core::profile::{build_profile, profile_sup};
use dyadic_core::random::{random_function, RandomModel};
use dyadic_core::{DyadicCube, DyadicMeasure, Field, Kind, LevelWindow, ProfileParams, ShiftedLatticeFamily};

fn profiles(c: &mut Criterion) {
    let leb = DyadicMeasure::lebesgue();
    let f1 = random_function(&RandomModel::new(1, 12).decay(0.5), 1, 0).unwrap();
    let f2 = random_function(&RandomModel::new(2, 5).decay(0.5), 1, 0).unwrap();
    let params = ProfileParams::new(0.5, 1.0, 2.0, Kind::Osc).unwrap();
    let field1 = Field::new(&f1, &leb).unwrap();
    c.bench_function("field 1-D depth 12", |b| b.iter(|| Field::new(black_box(&f1), &leb).unwrap()));
    c.bench_function("osc profile 1-D depth 12", |b| b.iter(|| build_profile(black_box(&field1), &params, &LevelWindow::full()).unwrap()));
    let prof = build_profile(&field1, &params, &LevelWindow::full()).unwrap();
    c.bench_function("profile sup 1-D depth 12", |b| b.iter(|| profile_sup(black_box(&prof), 2.0)));
    c.bench_function("op norm 2-D depth 5", |b| {
        b.iter(|| op_norm(black_box(&f2), &leb, 2.0, 1.0, 1.0, Kind::Mean, &LevelWindow::full()).unwrap())
    });
    c.bench_function("primitive profile depth 12", |b| b.iter(|| primitive_profile(black_box(&f1), 2.0).unwrap()));
}

fn tree_dps(c: &mut Criterion) {
    let f = random_function(&RandomModel::new(1, 10).decay(0.5).stop(0.1), 2, 0).unwrap();
    let q0 = DyadicCube::unit(1);
    c.bench_function("JN_p DP depth 10", |b| b.iter(|| jnp_dyadic(black_box(&f), &q0, 2.0).unwrap()));
    c.bench_function("Garsia-Rodemich DP depth 10", |b| b.iter(|| garo_dyadic(black_box(&f), &q0, 2.0).unwrap()));
    let spec = ExampleSpec::from_params(ExampleId::E4, &Params::new().with("n", 2).with("p", 2).with("K", 14)).unwrap();
    let e4 = e4_function(&spec).unwrap();
    c.bench_function("E4 osc norm K=14", |b| {
        b.iter(|| op_norm(black_box(&e4), &DyadicMeasure::lebesgue(), 2.0, 2.0, 2.0, Kind::Osc, &LevelWindow::full()).unwrap())
    });
}

fn halfspace(c: &mut Criterion) {
    let mut g = c.benchmark_group("halfspace");
    g.sample_size(10);
    let f = random_function(&RandomModel::new(1, 8).decay(0.5).nonnegative(true), 3, 0).unwrap();
    let fam = ShiftedLatticeFamily::new(1);
    g.bench_function("bracket 1-D depth 8", |b| {
        b.iter(|| continuous_weak_norm_bounds(black_box(&f), &DyadicMeasure::lebesgue(), 2.0, 1.0, Kind::Mean, &fam, &LevelWindow::full()).unwrap())
    });
    g.bench_function("claim 4", |b| b.iter(|| verify_claim(ClaimId::Claim4, &Params::new()).unwrap()));
    g.finish();
}

criterion_group!(benches, profiles, tree_dps, halfspace);
criterion_main!(benches);
