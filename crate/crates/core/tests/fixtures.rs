use dyadic_core::decomp::cz_stopping;
use dyadic_core::examples::{e0_function, e1_function, e4_function, make_example, ExampleId, ExampleSpec, Params};
use dyadic_core::function::{mean, oscillation};
use dyadic_core::halfspace::nu_gamma_box;
use dyadic_core::norms::{garo_dyadic, jnp_dyadic, lp_norm, op_norm, weak_lp_norm};
use dyadic_core::profile::{build_mean_profile, build_osc_profile, profile_sup};
use dyadic_core::{Ball, DyadicCube, DyadicMeasure, Field, Kind, LambdaProfile, LevelWindow, ShiftedLatticeFamily, StepFunction};

fn leb() -> DyadicMeasure {
    DyadicMeasure::lebesgue()
}

fn half(j: i64) -> DyadicCube {
    DyadicCube::std(-1, vec![j])
}

fn indicator_first_half() -> StepFunction {
    StepFunction::from_leaves(DyadicCube::unit(1), [(half(0), 1.0), (half(1), 0.0)]).unwrap()
}

#[test]
fn bisection() {
    assert_eq!(DyadicCube::unit(1).children(), vec![half(0), half(1)]);
    let q = DyadicCube::std(1, vec![0, 0]);
    assert!(q.children().iter().all(|c| c.side() == 1.0));
    assert_eq!(q.children().len(), 4);
}

#[test]
fn balls_near_a_standard_boundary_need_a_shifted_lattice() {
    let fam = ShiftedLatticeFamily::new(1);
    let (lat, q) = fam.cover_ball(&Ball::new(vec![0.15], 0.05).unwrap()).unwrap();
    assert!(q.volume() <= 0.25 * 4.0, "lattice {lat}, {q}");
    let (lat, q) = fam.cover_ball(&Ball::new(vec![0.5], 0.01).unwrap()).unwrap();
    assert_ne!(lat, 0);
    assert!(q.volume() < 0.2, "{q}");
}

#[test]
fn mean_and_oscillation_of_an_indicator() {
    let f = indicator_first_half();
    let q = DyadicCube::unit(1);
    assert_eq!(mean(&f, &q, &leb()).unwrap(), 0.5);
    assert_eq!(oscillation(&f, &q, &leb()).unwrap(), 0.5);
    let c = StepFunction::constant(q.clone(), 3.0).unwrap();
    assert_eq!(mean(&c, &half(1), &leb()).unwrap(), 3.0);
    assert_eq!(oscillation(&c, &half(1), &leb()).unwrap(), 0.0);
}

#[test]
fn constant_one_subcube_profile_approaches_two() {
    // Level r holds 2^r cubes of value 2^-r and weight 1, so on the band
    // [2^-r-1, 2^-r) the product λ W(λ) climbs to 2 - 2^-r.
    let f = StepFunction::constant(DyadicCube::unit(1), 1.0).unwrap();
    let prof = build_mean_profile(&f, &leb(), 1.0, 1.0, 1.0, &LevelWindow::within(DyadicCube::unit(1))).unwrap();
    let s = profile_sup(&prof, 1.0);
    assert!((s.value - 2.0).abs() < 1e-12, "{s:?}");
    assert!(s.asymptotic);
}

#[test]
fn step_profiles() {
    let one = LambdaProfile::new(vec![(2.0, 3.0)], vec![], LevelWindow::full());
    assert_eq!(profile_sup(&one, 1.0).value, 6.0);
    let two = LambdaProfile::new(vec![(1.0, 1.0), (2.0, 1.0)], vec![], LevelWindow::full());
    assert_eq!(profile_sup(&two, 1.0).value, 2.0);
    assert_eq!(profile_sup(&LambdaProfile::empty(), 2.0).value, 0.0);
}

#[test]
fn zero_function_has_empty_profile() {
    let prof = build_mean_profile(&StepFunction::zero(2), &leb(), 1.0, 1.0, 2.0, &LevelWindow::full()).unwrap();
    assert!(prof.is_empty());
    assert_eq!(profile_sup(&prof, 2.0).value, 0.0);
}

#[test]
fn staircase_weak_norm() {
    // μ(|f| >= 2^{k/p}) = 2^-k - 2^-m-1, so the weak norm^p is 1 - 2^-m-1.
    let (p, m) = (2.0f64, 5u32);
    let leaves: Vec<(DyadicCube, f64)> = (0..=m)
        .map(|k| (DyadicCube::std(-(k as i32) - 1, vec![1]), (f64::from(k) / p).exp2()))
        .chain([(DyadicCube::std(-(m as i32) - 1, vec![0]), 0.0)])
        .collect();
    let f = StepFunction::from_leaves(DyadicCube::unit(1), leaves).unwrap();
    let w = weak_lp_norm(&f, &leb(), p).unwrap().value.powf(p);
    assert!((w - (1.0 - (-(f64::from(m)) - 1.0).exp2())).abs() < 1e-14);
    let chi = StepFunction::constant(DyadicCube::unit(1), 1.0).unwrap();
    for p in [1.0, 2.0, 3.5] {
        assert_eq!(lp_norm(&chi, &leb(), p).unwrap().value, 1.0);
        assert_eq!(weak_lp_norm(&chi, &leb(), p).unwrap().value, 1.0);
    }
}

#[test]
fn indicator_of_a_half_line_has_no_dyadic_oscillation() {
    // Standard cubes up to level k are inside [0, 2^k) or disjoint from it,
    // so χ_{[0,∞)} restricted to those levels is χ_{[0,2^k)}.
    let k = 6;
    let f = StepFunction::constant(DyadicCube::std(k, vec![0]), 1.0).unwrap();
    let prof = build_osc_profile(&f, &leb(), 1.0, 1.0, 2.0, &LevelWindow::levels(i32::MIN, k).unwrap()).unwrap();
    assert_eq!(profile_sup(&prof, 2.0).value, 0.0);
}

#[test]
fn op_norm_is_homogeneous() {
    let f = indicator_first_half();
    let a = op_norm(&f, &leb(), 2.0, 0.5, 0.5, Kind::Mean, &LevelWindow::full()).unwrap().value;
    let b = op_norm(&f.scaled(-3.0), &leb(), 2.0, 0.5, 0.5, Kind::Mean, &LevelWindow::full()).unwrap().value;
    assert!((b - 3.0 * a).abs() < 1e-12 * b);
}

#[test]
fn garsia_rodemich_of_an_indicator() {
    let f = indicator_first_half();
    let q = DyadicCube::unit(1);
    assert_eq!(garo_dyadic(&f, &q, 2.0).unwrap().value, 0.5);
    let c = StepFunction::constant(q.clone(), 2.0).unwrap();
    assert_eq!(garo_dyadic(&c, &q, 2.0).unwrap().value, 0.0);
    assert_eq!(jnp_dyadic(&c, &q, 2.0).unwrap().value, 0.0);
}

#[test]
fn stopping_cubes_of_a_quarter_indicator() {
    // f_{Q0} = 1/4; |f - 1/4| has means 1/2 on [0,1/2) and 1/4 on [1/2,1).
    let f = StepFunction::from_leaves(
        DyadicCube::unit(1),
        [(DyadicCube::std(-2, vec![0]), 1.0), (DyadicCube::std(-2, vec![1]), 0.0), (half(1), 0.0)],
    )
    .unwrap();
    let c = cz_stopping(&f, &DyadicCube::unit(1), &leb(), 0.4).unwrap();
    assert_eq!(c.cubes(), &[half(0)]);
    let k = StepFunction::constant(DyadicCube::unit(1), 1.0).unwrap();
    assert!(cz_stopping(&k, &DyadicCube::unit(1), &leb(), 0.1).unwrap().is_empty());
}

#[test]
fn carleson_box_mass() {
    // |Q| ∫_ℓ^{2ℓ} t^{-1-γ} dt = |Q| ℓ^{-γ} (1 - 2^{-γ}) / γ, which scales by
    // 2^{n-γ} when the cube doubles.
    assert!((nu_gamma_box(&DyadicCube::unit(1), 1.0, &leb()).unwrap() - 0.5).abs() < 1e-15);
    let q = DyadicCube::std(-2, vec![1, 3]);
    let small = nu_gamma_box(&q, 0.5, &leb()).unwrap();
    let big = nu_gamma_box(&q.parent(), 0.5, &leb()).unwrap();
    assert!((big / small - 2f64.powf(1.5)).abs() < 1e-12);
}

#[test]
fn example_integrals() {
    let f = e1_function(3).unwrap();
    let want = 1.0 + 0.25 + 1.0 / 9.0;
    assert!((lp_norm(&f, &leb(), 1.0).unwrap().value - want).abs() < 1e-12);

    // n = 2, p = 2: Σ_{k=1}^{K} 2^{k(n/p - n)} = Σ 2^-k.
    for k in [3u32, 6] {
        let spec = ExampleSpec::from_params(ExampleId::E4, &Params::new().with("n", 2).with("p", 2).with("K", k)).unwrap();
        let f = e4_function(&spec).unwrap();
        let integral = Field::lebesgue(&f).total_integral();
        let want: f64 = (1..=k).map(|j| (-f64::from(j)).exp2()).sum();
        assert!((integral - want).abs() < 1e-14, "K={k}: {integral} vs {want}");
    }
}

#[test]
fn e0_indicator_diverges_at_gamma_zero() {
    let f = e0_function(1).unwrap();
    let prof = build_mean_profile(&f, &leb(), 0.0, 0.0, 1.0, &LevelWindow::full()).unwrap();
    assert!(prof.divergence.is_some());
    assert_eq!(profile_sup(&prof, 1.0).value, f64::INFINITY);
}

#[test]
fn e4_jn_is_a_single_cube() {
    let spec = ExampleSpec::from_params(ExampleId::E4, &Params::new().with("n", 2).with("p", 2).with("K", 6)).unwrap();
    let f = e4_function(&spec).unwrap();
    let q0 = DyadicCube::unit(2);
    let jn = jnp_dyadic(&f, &q0, 2.0).unwrap();
    let field = Field::lebesgue(&f);
    let best = (0..=6)
        .map(|k| DyadicCube::std(-k, vec![0, 0]))
        .map(|q| q.volume() * field.stats(&q).osc.powi(2))
        .fold(0.0, f64::max);
    assert!((jn.value.powi(2) - best).abs() < 1e-12 * best);
    assert_eq!(jn.witness.len(), 1);
}

#[test]
fn examples_regenerate_identically() {
    for id in [ExampleId::E0, ExampleId::E1, ExampleId::E2, ExampleId::E3, ExampleId::E4, ExampleId::E5] {
        let spec = ExampleSpec::default_for(id);
        assert_eq!(make_example(&spec).unwrap().leaves(), make_example(&spec).unwrap().leaves(), "{id}");
    }
}
