use dyadic_core::decomp::cz_stopping;
use dyadic_core::function::{mean, oscillation};
use dyadic_core::norms::{garo_dyadic, jnp_dyadic, lp_norm, op_norm, weak_lp_norm};
use dyadic_core::profile::{build_profile, profile_sup, TailFamily, TailKind};
use dyadic_core::random::{random_function, RandomModel};
use dyadic_core::{DyadicCube, DyadicMeasure, Field, Kind, LambdaProfile, LevelWindow, ProfileParams, StepFunction};
use proptest::prelude::*;

fn leb() -> DyadicMeasure {
    DyadicMeasure::lebesgue()
}

fn func(n: usize, depth: u32, seed: u64, index: u64) -> StepFunction {
    random_function(&RandomModel::new(n, depth).decay(0.5).stop(0.2), seed, index).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

fn cube(n: usize) -> impl Strategy<Value = DyadicCube> {
    (0..9u32, -4..4i32, prop::collection::vec(-40i64..40, n)).prop_map(move |(lat, level, idx)| DyadicCube::new(lat % 3u32.pow(n as u32), level, idx).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn same_lattice_cubes_are_disjoint_or_nested(a in cube(2), b in cube(2)) {
        if a.lattice == b.lattice {
            let overlap = a.overlap_volume(&b);
            prop_assert!(overlap == 0.0 || a.contains(&b) || b.contains(&a));
            prop_assert_eq!(a.disjoint_from(&b), overlap == 0.0);
        }
    }

    #[test]
    fn children_partition_their_parent(q in cube(2)) {
        let kids = q.children();
        prop_assert_eq!(kids.len(), 4);
        for c in &kids {
            prop_assert_eq!(&c.parent(), &q);
            prop_assert_eq!(c.level, q.level - 1);
        }
        prop_assert_eq!(kids.iter().map(DyadicCube::volume).sum::<f64>(), q.volume());
    }

    #[test]
    fn oscillation_ignores_constants_and_scales(seed in 0u64..1000, c in -5.0f64..5.0, s in -4.0f64..4.0) {
        let f = func(1, 6, seed, 0);
        let g = f.map(|x| s * x + c);
        for q in [DyadicCube::unit(1), DyadicCube::std(-2, vec![1]), DyadicCube::std(-4, vec![9])] {
            let (o, og) = (oscillation(&f, &q, &leb()).unwrap(), oscillation(&g, &q, &leb()).unwrap());
            prop_assert!(rel_close(og, s.abs() * o, 1e-12) || (og - s.abs() * o).abs() < 1e-13);
            let (m, mg) = (mean(&f, &q, &leb()).unwrap(), mean(&g, &q, &leb()).unwrap());
            prop_assert!((mg - (s * m + c)).abs() < 1e-12);
        }
    }

    #[test]
    fn integrals_are_additive(seed in 0u64..1000) {
        let f = func(2, 4, seed, 1);
        let field = Field::lebesgue(&f);
        for q in [DyadicCube::unit(2), DyadicCube::std(-1, vec![1, 0]), DyadicCube::std(-2, vec![2, 3])] {
            let whole = field.stats(&q);
            let parts: f64 = q.children().iter().map(|c| field.stats(c)).map(|s| s.mean * s.mass).sum();
            prop_assert!((whole.mean * whole.mass - parts).abs() < 1e-14);
        }
    }

    #[test]
    fn refining_leaves_changes_nothing(seed in 0u64..1000, p in 1.0f64..4.0) {
        let f = func(1, 5, seed, 2);
        let g = f.refine(-7, 1 << 12).unwrap();
        let a = op_norm(&f, &leb(), p, 0.5, 0.5, Kind::Osc, &LevelWindow::full()).unwrap().value;
        let b = op_norm(&g, &leb(), p, 0.5, 0.5, Kind::Osc, &LevelWindow::full()).unwrap().value;
        prop_assert!(rel_close(a, b, 1e-12), "{a} vs {b}");
    }

    #[test]
    fn op_norm_scales_exactly(seed in 0u64..1000, c in 0.1f64..10.0, p in 1.0f64..3.0, osc in any::<bool>()) {
        let kind = if osc { Kind::Osc } else { Kind::Mean };
        let f = func(1, 5, seed, 3);
        let a = op_norm(&f, &leb(), p, 0.5, 1.0, kind, &LevelWindow::full()).unwrap().value;
        let b = op_norm(&f.scaled(-c), &leb(), p, 0.5, 1.0, kind, &LevelWindow::full()).unwrap().value;
        prop_assert!(rel_close(b, c * a, 1e-12), "{b} vs {}", c * a);
    }

    #[test]
    fn oscillation_norm_ignores_constants(seed in 0u64..1000, c in -3.0f64..3.0) {
        let f = func(1, 5, seed, 4);
        // Shifting the stored values adds c on the root only, so compare
        // over subcubes of the root.
        let g = f.map(|x| x + c);
        let w = LevelWindow::within(DyadicCube::unit(1));
        let a = op_norm(&f, &leb(), 2.0, 0.5, 0.5, Kind::Osc, &w).unwrap().value;
        let b = op_norm(&g, &leb(), 2.0, 0.5, 0.5, Kind::Osc, &w).unwrap().value;
        prop_assert!(rel_close(a, b, 1e-12));
    }

    #[test]
    fn enlarging_the_window_never_decreases_the_sup(seed in 0u64..1000, a in -8..-2i32, b in 0..4i32, osc in any::<bool>()) {
        let kind = if osc { Kind::Osc } else { Kind::Mean };
        let f = func(1, 6, seed, 5);
        let params = ProfileParams::new(0.5, 1.0, 2.0, kind).unwrap();
        let field = Field::lebesgue(&f);
        let mut last = 0.0;
        for w in [LevelWindow::levels(a, b).unwrap(), LevelWindow::levels(a - 2, b + 2).unwrap(), LevelWindow::full()] {
            let s = profile_sup(&build_profile(&field, &params, &w).unwrap(), 2.0).value;
            prop_assert!(s >= last * (1.0 - 1e-12), "{s} < {last}");
            last = s;
        }
    }

    #[test]
    fn merged_profiles_dominate_their_parts(
        s1 in prop::collection::vec((0.01f64..10.0, 0.01f64..10.0), 0..8),
        s2 in prop::collection::vec((0.01f64..10.0, 0.01f64..10.0), 0..8),
        rho in 0.3f64..0.9,
        p in 1.0f64..3.0,
    ) {
        let t = TailFamily::simple(TailKind::Analytic, 1.0, rho, 1.0, 0.9 / rho.powf(p), None);
        let a = LambdaProfile::new(s1, vec![t], LevelWindow::full());
        let b = LambdaProfile::new(s2, vec![], LevelWindow::full());
        let m = profile_sup(&a.merge(&b), p).value;
        prop_assert!(m >= profile_sup(&a, p).value.max(profile_sup(&b, p).value) * (1.0 - 1e-12));
        // W is nonincreasing.
        let merged = a.merge(&b);
        let mut prev = f64::INFINITY;
        for k in 0..40 {
            let w = merged.w(20.0 * 0.8f64.powi(k));
            prop_assert!(w >= prev || prev == f64::INFINITY);
            prev = w;
        }
    }

    #[test]
    fn garo_is_below_jn_and_weak_below_strong(seed in 0u64..1000, p in 1.2f64..4.0) {
        let f = func(1, 6, seed, 6);
        let q0 = DyadicCube::unit(1);
        let jn = jnp_dyadic(&f, &q0, p).unwrap().value;
        let garo = garo_dyadic(&f, &q0, p).unwrap().value;
        prop_assert!(garo <= jn * (1.0 + 1e-12), "{garo} > {jn}");
        let weak = weak_lp_norm(&f, &leb(), p).unwrap().value;
        let strong = lp_norm(&f, &leb(), p).unwrap().value;
        prop_assert!(weak <= strong * (1.0 + 1e-12));
    }

    #[test]
    fn stopping_cubes_are_disjoint_and_maximal(seed in 0u64..1000, lam in 0.05f64..1.0) {
        let f = func(2, 4, seed, 7);
        let q0 = DyadicCube::unit(2);
        let field = Field::lebesgue(&f);
        let f0 = field.stats(&q0).mean;
        let dev = f.map(|x| (x - f0).abs());
        let c = cz_stopping(&f, &q0, &leb(), lam).unwrap();
        prop_assert!(c.is_disjoint());
        for q in c.cubes() {
            prop_assert!(mean(&dev, q, &leb()).unwrap() > lam);
            if q != &q0 {
                prop_assert!(mean(&dev, &q.parent(), &leb()).unwrap() <= lam);
            }
        }
    }

    #[test]
    fn random_functions_regenerate(seed in any::<u64>(), index in 0u64..100) {
        prop_assert_eq!(func(2, 3, seed, index).leaves(), func(2, 3, seed, index).leaves());
    }
}
