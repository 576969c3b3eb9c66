//! Acceptance run: one pass/fail line per criterion, nonzero exit on any
//! failure.

use dyadic_core::claims::{verify_claim, ClaimId, ClaimReport, Verdict};
use dyadic_core::examples::{e1_exact_series, e4_function, ExampleId, ExampleSpec, Params};
use dyadic_core::norms::{garo_dyadic, jnp_dyadic};
use dyadic_core::profile::{build_osc_profile, profile_sup, TailFamily, TailKind};
use dyadic_core::report;
use dyadic_core::{DyadicCube, DyadicMeasure, LambdaProfile, LevelWindow, StepFunction};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

type Outcome = (bool, String);

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

// ---------- 1: profile sup against a dense grid ----------

fn random_profile(rng: &mut ChaCha8Rng, p: f64) -> LambdaProfile {
    let steps: Vec<(f64, f64)> = (0..rng.gen_range(0..20)).map(|_| (10f64.powf(rng.gen_range(-3.0..2.0)), 10f64.powf(rng.gen_range(-3.0..2.0)))).collect();
    let tails = (0..rng.gen_range(0..4))
        .map(|_| {
            let a0 = 10f64.powf(rng.gen_range(-2.0..2.0));
            let rho_v = rng.gen_range(0.3..0.8);
            let w0 = 10f64.powf(rng.gen_range(-2.0..1.0));
            if rng.gen_bool(0.5) {
                // Infinite family with λ^p W(λ) → 0 as λ → 0.
                let balance: f64 = rng.gen_range(0.2..0.95);
                TailFamily::simple(TailKind::Analytic, a0, rho_v, w0, balance / rho_v.powf(p), None)
            } else {
                TailFamily::simple(TailKind::Analytic, a0, rho_v, w0, rng.gen_range(0.5..3.0), Some(rng.gen_range(1..60)))
            }
        })
        .collect();
    LambdaProfile::new(steps, tails, LevelWindow::full())
}

/// `max_i λ_i^p W(λ_i)` over `points` log-spaced λ in `[lo, hi]`, with `W`
/// summed term by term. Returns the max and the grid ratio.
fn grid_sup(prof: &LambdaProfile, p: f64, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    let mut terms: Vec<(f64, f64)> = prof.steps.clone();
    for t in &prof.tails {
        let mut r = 0u64;
        while t.terms.map_or(true, |m| r < m) && t.value(r) > lo {
            terms.push((t.value(r), t.weight(r)));
            r += 1;
        }
    }
    terms.sort_by(|a, b| b.0.total_cmp(&a.0));
    let ratio = (hi / lo).powf(1.0 / (points - 1) as f64);
    let (mut best, mut w, mut j) = (0.0f64, 0.0, 0);
    for i in (0..points).rev() {
        let lam = lo * ratio.powi(i as i32);
        while j < terms.len() && terms[j].0 > lam {
            w += terms[j].1;
            j += 1;
        }
        best = best.max(lam.powf(p) * w);
    }
    (best, ratio)
}

fn criterion_profiles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_gap = 0.0f64;
    let mut bad = Vec::new();
    for i in 0..200 {
        let p = [1.0, 1.5, 2.0, 3.0][i % 4];
        let prof = random_profile(&mut rng, p);
        let top = prof.steps.iter().map(|s| s.0).chain(prof.tails.iter().map(|t| t.a0)).fold(0.0, f64::max);
        let sup = profile_sup(&prof, p).value;
        if top == 0.0 {
            if sup != 0.0 {
                bad.push(format!("profile {i}: empty profile has sup {sup}"));
            }
            continue;
        }
        // Finite families may peak at their smallest value.
        let bottom = prof
            .steps
            .iter()
            .map(|s| s.0)
            .chain(prof.tails.iter().filter_map(|t| t.terms.map(|m| t.value(m - 1))))
            .fold(top * 1e-8, f64::min);
        let (grid, ratio) = grid_sup(&prof, p, bottom * 0.5, top * 1.01, 10_000);
        let ok = grid <= sup * (1.0 + 1e-12) && sup <= grid * ratio.powf(p) * (1.0 + 1e-12);
        worst_gap = worst_gap.max(sup / grid - 1.0);
        if !ok {
            bad.push(format!("profile {i}: sup {sup} vs grid {grid}"));
        }
    }
    // Closed-form tail sums against explicit 50-term sums.
    let mut worst_rel = 0.0f64;
    for _ in 0..200 {
        let rho_w = rng.gen_range(0.3..3.0);
        let mut t = TailFamily::simple(TailKind::Analytic, rng.gen_range(0.1..10.0), rng.gen_range(0.3..0.999), rng.gen_range(0.1..10.0), rho_w, Some(50));
        t.w1 = rng.gen_range(0.0..0.5) * t.w0;
        t.rho_w1 = rho_w * rng.gen_range(0.2..1.0);
        let direct: f64 = (0..50).map(|r| t.weight(r)).sum();
        let lam = t.value(rng.gen_range(0..50));
        let above: f64 = (0..50).filter(|&r| t.value(r) > lam).map(|r| t.weight(r)).sum();
        for (a, b) in [(t.total_weight(), direct), (t.weight_above(lam, true), above)] {
            worst_rel = worst_rel.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
        }
    }
    if worst_rel > 1e-12 {
        bad.push(format!("tail closed form off by {worst_rel:e}"));
    }
    (bad.is_empty(), format!("200 profiles, max sup/grid - 1 = {worst_gap:.2e}; tail sums max rel error {worst_rel:.1e}{}", failures(&bad)))
}

fn failures(bad: &[String]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!("; {} failures, first: {}", bad.len(), bad[0])
    }
}

// ---------- 2: tree DPs against exhaustive antichains ----------

#[derive(Clone)]
enum Shape {
    Leaf,
    Split(Vec<Shape>),
}

impl Shape {
    fn nodes(&self) -> usize {
        match self {
            Shape::Leaf => 1,
            Shape::Split(k) => 1 + k.iter().map(Shape::nodes).sum::<usize>(),
        }
    }
}

/// All full binary shapes with exactly `internal` split nodes.
fn binary_shapes(internal: usize) -> Vec<Shape> {
    if internal == 0 {
        return vec![Shape::Leaf];
    }
    let mut out = Vec::new();
    for left in 0..internal {
        for a in binary_shapes(left) {
            for b in binary_shapes(internal - 1 - left) {
                out.push(Shape::Split(vec![a.clone(), b]));
            }
        }
    }
    out
}

fn random_shape(rng: &mut ChaCha8Rng, n: usize, depth: u32, split: &[f64]) -> Shape {
    if depth == 0 || !rng.gen_bool(split[0]) {
        return Shape::Leaf;
    }
    Shape::Split((0..1 << n).map(|_| random_shape(rng, n, depth - 1, &split[1..])).collect())
}

/// Leaves of `shape` placed at `cube`, values from `value`.
fn place(shape: &Shape, cube: &DyadicCube, value: &mut impl FnMut() -> f64, out: &mut Vec<(DyadicCube, f64)>) {
    match shape {
        Shape::Leaf => out.push((cube.clone(), value())),
        Shape::Split(kids) => {
            for (s, c) in kids.iter().zip(cube.children()) {
                place(s, &c, value, out);
            }
        }
    }
}

/// `(Σ|Q|O^p, Σ|Q|O, Σ|Q|)` for every antichain of shape nodes under `cube`.
fn antichains(shape: &Shape, cube: &DyadicCube, leaves: &[(DyadicCube, f64)], p: f64) -> Vec<(f64, f64, f64)> {
    let vol = cube.volume();
    let inside: Vec<&(DyadicCube, f64)> = leaves.iter().filter(|(l, _)| cube.contains(l)).collect();
    let mean = inside.iter().map(|(l, v)| l.volume() * v).sum::<f64>() / vol;
    let osc = inside.iter().map(|(l, v)| l.volume() * (v - mean).abs()).sum::<f64>() / vol;
    let mut out = match shape {
        Shape::Leaf => vec![(0.0, 0.0, 0.0)],
        Shape::Split(kids) => {
            let mut acc = vec![(0.0, 0.0, 0.0)];
            for (s, c) in kids.iter().zip(cube.children()) {
                let sub = antichains(s, &c, leaves, p);
                acc = acc.iter().flat_map(|a| sub.iter().map(move |b| (a.0 + b.0, a.1 + b.1, a.2 + b.2))).collect();
            }
            acc
        }
    };
    out.push((vol * osc.powf(p), vol * osc, vol));
    out
}

fn compare_dps(shape: &Shape, n: usize, values: &mut impl FnMut() -> f64, p: f64) -> Result<(), String> {
    let root = DyadicCube::unit(n);
    let mut leaves = Vec::new();
    place(shape, &root, values, &mut leaves);
    let f = StepFunction::from_leaves(root.clone(), leaves.clone()).map_err(|e| e.to_string())?;
    let all = antichains(shape, &root, &leaves, p);
    let jn_oracle = all.iter().map(|a| a.0).fold(0.0, f64::max);
    let pp = p / (p - 1.0);
    let garo_oracle = all.iter().filter(|a| a.1 > 0.0).map(|a| a.1 / a.2.powf(1.0 / pp)).fold(0.0, f64::max);
    let jn = jnp_dyadic(&f, &root, p).map_err(|e| e.to_string())?.value.powf(p);
    let garo = garo_dyadic(&f, &root, p).map_err(|e| e.to_string())?.value;
    if !rel_close(jn, jn_oracle, 1e-12) || !rel_close(garo, garo_oracle, 1e-12) {
        return Err(format!("n={n} p={p} nodes={}: JN^p {jn} vs {jn_oracle}, GaRo {garo} vs {garo_oracle}", shape.nodes()));
    }
    Ok(())
}

fn criterion_dps() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut bad = Vec::new();
    let mut count = 0;
    for internal in 0..=7 {
        for shape in binary_shapes(internal) {
            for p in [1.5, 2.0, 3.0] {
                let mut v = || f64::from(rng.gen_range(-4i32..=4));
                if let Err(e) = compare_dps(&shape, 1, &mut v, p) {
                    bad.push(e);
                }
                count += 1;
            }
        }
    }
    let mut random = 0;
    for i in 0..100 {
        let shape = random_shape(&mut rng, 1, 3, &[1.0, 0.8, 0.6]);
        let mut r2 = ChaCha8Rng::seed_from_u64(i);
        let mut v = || r2.gen_range(-1.0..1.0);
        if let Err(e) = compare_dps(&shape, 1, &mut v, 2.0) {
            bad.push(e);
        }
        random += 1;
    }
    for i in 0..20 {
        let shape = random_shape(&mut rng, 2, 2, &[1.0, 0.7]);
        let mut r2 = ChaCha8Rng::seed_from_u64(1000 + i);
        let mut v = || r2.gen_range(-1.0..1.0);
        if let Err(e) = compare_dps(&shape, 2, &mut v, 1.5) {
            bad.push(e);
        }
        random += 1;
    }
    (bad.is_empty(), format!("{count} enumerated binary trees (<= 15 nodes) and {random} random trees{}", failures(&bad)))
}

// ---------- 3: E1 exact series ----------

fn criterion_e1() -> Outcome {
    let rows = e1_exact_series(4);
    let mut ok = rows.len() == 4;
    let mut shown = Vec::new();
    for row in &rows {
        let n = BigInt::from(row.n);
        let expect = BigRational::new(&n * &n * &n + 1, &n * &n);
        ok &= row.product == expect && row.all_exceed && row.at_least_n;
        shown.push(format!("n={}: {}", row.n, row.product));
    }
    (ok, format!("lambda_n * count = {}", shown.join(", ")))
}

// ---------- 4: E4 divergence and JN_p ----------

fn criterion_e4() -> Outcome {
    let leb = DyadicMeasure::lebesgue();
    let mut ok = true;
    let mut jn = Vec::new();
    let mut witness = 0;
    for k in [6u32, 10, 14] {
        let spec = ExampleSpec::from_params(ExampleId::E4, &Params::new().with("n", 2).with("p", 2).with("K", k)).expect("valid E4");
        let f = e4_function(&spec).expect("E4 builds");
        let prof = build_osc_profile(&f, &leb, 2.0, 2.0, 2.0, &LevelWindow::full()).expect("profile");
        match &prof.divergence {
            Some(d) => witness = d.cubes.len(),
            None => ok = false,
        }
        jn.push(jnp_dyadic(&f, &DyadicCube::unit(2), 2.0).expect("jn").value);
    }
    let spread = jn.iter().cloned().fold(0.0, f64::max) / jn.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    ok &= spread <= 0.05;
    (ok, format!("divergence witness at K = 6, 10, 14 ({witness} cubes); JN_2 = {jn:.6?}, spread {:.2}%", 100.0 * spread))
}

// ---------- 5-10: claim reports ----------

struct SuiteRun {
    reports: Vec<ClaimReport>,
    times: Vec<Duration>,
    text: String,
    total: Duration,
}

fn run_suite() -> SuiteRun {
    let start = Instant::now();
    let mut reports = Vec::new();
    let mut times = Vec::new();
    for id in ClaimId::all() {
        let t = Instant::now();
        reports.push(verify_claim(id, &Params::new()).unwrap_or_else(|e| panic!("claim {id}: {e}")));
        times.push(t.elapsed());
    }
    let text = reports.iter().map(|r| report::to_text(&report::claim_json(r))).collect();
    SuiteRun { reports, times, text, total: start.elapsed() }
}

fn report_of(run: &SuiteRun, id: ClaimId) -> (&ClaimReport, Duration) {
    let i = run.reports.iter().position(|r| r.claim == id).expect("claim ran");
    (&run.reports[i], run.times[i])
}

/// Verdict plus the failing checks or the checks matching `show`.
fn summarize(r: &ClaimReport, show: &[&str]) -> Outcome {
    let failing: Vec<String> = r.checks.iter().filter(|c| !c.holds()).map(|c| format!("FAILED {} ({} {} {})", c.name, c.lhs, c.rel.symbol(), c.rhs)).collect();
    let shown: Vec<String> = r
        .checks
        .iter()
        .filter(|c| show.iter().any(|s| c.name.contains(s)))
        .map(|c| format!("{} = {:.4}", c.name, c.lhs))
        .collect();
    let mut parts = vec![format!("{} {}", r.claim.name(), r.verdict().name())];
    parts.extend(failing);
    parts.extend(shown);
    (r.verdict() == Verdict::Consistent, parts.join("; "))
}

fn criterion_claim4(run: &SuiteRun) -> Outcome {
    let (r, t) = report_of(run, ClaimId::Claim4);
    let (ok, text) = summarize(r, &["max/min across M", "growth per doubling"]);
    (ok && t < Duration::from_secs(30), format!("{text}; {:.1} s", t.as_secs_f64()))
}

fn criterion_claim(run: &SuiteRun, id: ClaimId, show: &[&str]) -> Outcome {
    summarize(report_of(run, id).0, show)
}

fn criterion_sweeps(run: &SuiteRun) -> Outcome {
    let ids = [
        ClaimId::MeanEmbedding,
        ClaimId::OscillationEmbedding,
        ClaimId::ReverseMean,
        ClaimId::Poincare,
        ClaimId::SobolevHalfspace,
        ClaimId::Biparameter,
        ClaimId::Claim3,
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for id in ids {
        let r = report_of(run, id).0;
        let drift = r.checks.iter().filter(|c| c.name.contains("drift") || c.name.contains("growth")).map(|c| c.lhs).fold(0.0, f64::max);
        let (good, text) = summarize(r, &[]);
        ok &= good;
        if id == ClaimId::Claim3 {
            parts.push(format!("{text} (breakdown at gamma in (0,n] reproduced via E4/E5)"));
        } else {
            parts.push(format!("{text} (max drift {:.2}%)", 100.0 * drift));
        }
    }
    (ok, parts.join("; "))
}

fn criterion_determinism(first: &SuiteRun, second: &SuiteRun) -> Outcome {
    let same = first.text == second.text;
    let fast = first.total < Duration::from_secs(300);
    (same && fast, format!("{} bytes, identical = {same}; suite wall-clock {:.1} s", first.text.len(), first.total.as_secs_f64()))
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome, Duration)> = Vec::new();
    let mut timed = |i: usize, name: &'static str, limit: Option<u64>, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let (mut ok, mut text) = f();
        let el = t.elapsed();
        if let Some(s) = limit {
            if el > Duration::from_secs(s) {
                ok = false;
                text.push_str(&format!("; over the {s} s budget"));
            }
        }
        let line = (i, name, (ok, text), el);
        print_line(&line);
        results.push(line);
    };
    timed(1, "profile sup and tail sums vs oracles", Some(5), &criterion_profiles);
    timed(2, "JN_p and Garsia-Rodemich DPs vs exhaustive antichains", Some(10), &criterion_dps);
    timed(3, "E1 exact series", None, &criterion_e1);
    timed(4, "E4 divergence with bounded JN_p", None, &criterion_e4);

    // One thread so the two runs are comparable byte for byte.
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool");
    let first = pool.install(run_suite);
    let second = pool.install(run_suite);
    timed(5, "claim 4 trend", None, &|| criterion_claim4(&first));
    timed(6, "weak Sobolev-Poincare ratios", None, &|| criterion_claim(&first, ClaimId::WeakSobolevPoincare, &["max ratio", "growth"]));
    timed(7, "distribution bound with one constant", None, &|| criterion_claim(&first, ClaimId::ExponentialIntegrability, &["violating", "measured constant"]));
    timed(8, "embedding sweeps and the predicted breakdown", None, &|| criterion_sweeps(&first));
    timed(9, "half-space bracket", None, &|| criterion_claim(&first, ClaimId::HalfspaceBracket, &["slack", "indicator"]));
    timed(10, "single-thread determinism and runtime", None, &|| criterion_determinism(&first, &second));

    let failed = results.iter().filter(|r| !(r.2).0).count();
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn print_line((i, name, (ok, text), el): &(usize, &str, Outcome, Duration)) {
    println!("[{}] {i:>2} {name}: {text} ({:.2} s)", if *ok { "PASS" } else { "FAIL" }, el.as_secs_f64());
}
