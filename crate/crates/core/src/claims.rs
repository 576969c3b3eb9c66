//! Mechanical checks of the counterexample claims and randomized sweeps of
//! the embedding inequalities.
//!
//! Every check is a plain comparison `lhs rel rhs` recorded in a
//! [`ClaimReport`]; a report is consistent when it has at least one check and
//! all of them hold.

use crate::cube::DyadicCube;
use crate::decomp::{chain_oscillation_stats, distribution_check, local_op_norm};
use crate::error::{param, Error, Result};
use crate::examples::{
    e1_exact_series, e1_function, e2_function, e3_function, e3_graded, e4_function, e4_lambda, e5_function,
    e6_data_profile, e6_far_profile, e6_placement, e6_tilde_profiles, e6_weak, hurwitz_tail, tilde_bump,
    ExampleId, ExampleSpec, Params,
};
use crate::function::{DyadicMeasure, Field, StepFunction};
use crate::halfspace::{continuous_weak_norm_bounds, sobolev_side_check_1d};
use crate::norms::{
    biparam_profile, biparam_weak_norm, jnp_dyadic, jnp_global, lp_norm, op_norm, weak_lp_norm, BiparamParams,
};
use crate::profile::{
    build_mean_profile, disjoint_level_sup, profile_envelopes, profile_sup, Kind, LevelWindow,
};
use crate::random::{random_function, RandomModel};
use crate::cube::ShiftedLatticeFamily;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "==",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    /// NaN on either side fails.
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Rel::Lt => lhs < rhs,
            Rel::Le => lhs <= rhs,
            Rel::Eq => lhs == rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Gt => lhs > rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rel: Rel,
    pub rhs: f64,
}

impl Check {
    pub fn holds(&self) -> bool {
        self.rel.holds(self.lhs, self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub x_label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Inconsistent => "inconsistent",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClaimReport {
    pub claim: ClaimId,
    /// Effective parameters, defaults included.
    pub params: Params,
    pub series: Vec<Series>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl ClaimReport {
    fn new(claim: ClaimId, params: Params) -> ClaimReport {
        ClaimReport { claim, params, series: Vec::new(), checks: Vec::new(), notes: Vec::new() }
    }

    fn series(&mut self, name: &str, x_label: &str, x: Vec<f64>, y: Vec<f64>) {
        self.series.push(Series { name: name.into(), x_label: x_label.into(), x, y });
    }

    fn check(&mut self, name: impl Into<String>, lhs: f64, rel: Rel, rhs: f64) {
        self.checks.push(Check { name: name.into(), lhs, rel, rhs });
    }

    pub fn verdict(&self) -> Verdict {
        if !self.checks.is_empty() && self.checks.iter().all(Check::holds) {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClaimId {
    Claim1,
    Claim2,
    Claim3,
    Claim4,
    WeakSobolevPoincare,
    ExponentialIntegrability,
    MeanEmbedding,
    OscillationEmbedding,
    Poincare,
    SobolevHalfspace,
    Biparameter,
    ReverseMean,
    HalfspaceBracket,
}

impl ClaimId {
    pub const CLAIMS: [ClaimId; 4] = [ClaimId::Claim1, ClaimId::Claim2, ClaimId::Claim3, ClaimId::Claim4];
    pub const SUITE: [ClaimId; 9] = [
        ClaimId::WeakSobolevPoincare,
        ClaimId::ExponentialIntegrability,
        ClaimId::MeanEmbedding,
        ClaimId::OscillationEmbedding,
        ClaimId::Poincare,
        ClaimId::SobolevHalfspace,
        ClaimId::Biparameter,
        ClaimId::ReverseMean,
        ClaimId::HalfspaceBracket,
    ];

    pub fn all() -> Vec<ClaimId> {
        ClaimId::CLAIMS.iter().chain(ClaimId::SUITE.iter()).copied().collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            ClaimId::Claim1 => "1",
            ClaimId::Claim2 => "2",
            ClaimId::Claim3 => "3",
            ClaimId::Claim4 => "4",
            ClaimId::WeakSobolevPoincare => "weak-sobolev-poincare",
            ClaimId::ExponentialIntegrability => "exponential-integrability",
            ClaimId::MeanEmbedding => "mean-embedding",
            ClaimId::OscillationEmbedding => "oscillation-embedding",
            ClaimId::Poincare => "poincare",
            ClaimId::SobolevHalfspace => "sobolev-halfspace",
            ClaimId::Biparameter => "biparameter",
            ClaimId::ReverseMean => "reverse-mean",
            ClaimId::HalfspaceBracket => "halfspace-bracket",
        }
    }

    /// Accepted parameter keys.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            ClaimId::Claim1 => &["N", "K", "gamma", "alpha"],
            ClaimId::Claim2 => &["p", "gamma", "grade", "D", "k"],
            ClaimId::Claim3 => &["p", "n", "e4_K", "e5_K", "gamma"],
            ClaimId::Claim4 => &["p", "q", "gamma", "M", "depth", "sep", "place_M"],
            ClaimId::WeakSobolevPoincare => &["n", "p", "depth", "count", "decay", "stop", "seed"],
            ClaimId::ExponentialIntegrability => &["n", "depth", "count", "decay", "stop", "seed", "k_max"],
            ClaimId::MeanEmbedding | ClaimId::OscillationEmbedding => &["depth", "count", "decay", "stop", "seed"],
            ClaimId::Poincare | ClaimId::SobolevHalfspace => &["p", "depth", "count", "decay", "stop", "seed"],
            ClaimId::Biparameter => &["p", "gamma", "depth", "count", "decay", "stop", "seed"],
            ClaimId::ReverseMean => &["p", "depth", "count", "decay", "stop", "seed"],
            ClaimId::HalfspaceBracket => &["p", "gamma", "depth", "count", "decay", "stop", "seed", "doubling"],
        }
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClaimId {
    type Err = Error;
    fn from_str(s: &str) -> Result<ClaimId> {
        let t = s.trim().to_ascii_lowercase();
        let t = t.strip_prefix("claim").map(|r| r.trim_start_matches(['-', '_', ' '])).unwrap_or(&t);
        ClaimId::all().into_iter().find(|c| c.name() == t).ok_or_else(|| {
            let names: Vec<&str> = ClaimId::all().iter().map(|c| c.name()).collect();
            Error::Parameter(format!("unknown claim '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

fn known_keys(id: ClaimId, params: &Params) -> Result<()> {
    for (k, _) in params.iter() {
        if !id.keys().contains(&k.as_str()) {
            return param(format!("claim {id} does not take '{k}' (accepted: {})", id.keys().join(", ")));
        }
    }
    Ok(())
}

fn need(ok: bool, msg: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Range(msg.into()))
    }
}

/// `max/min - 1` of positive values; infinite when some value is not positive.
pub fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo > 0.0) {
        return f64::INFINITY;
    }
    hi / lo - 1.0
}

fn min_ratio(v: &[f64]) -> f64 {
    v.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min)
}

fn increments(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[1] - w[0]).collect()
}

fn fmax(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn fmin(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn xs<T: Copy + Into<f64>>(v: &[T]) -> Vec<f64> {
    v.iter().map(|&x| x.into()).collect()
}

/// `f(0..count)` in parallel, in index order.
fn sweep<T: Send>(count: u64, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..count).into_par_iter().map(f).collect()
}

fn spec(id: ExampleId, p: Params) -> Result<ExampleSpec> {
    ExampleSpec::from_params(id, &p)
}

/// Shared random-model parameters of the sweeps.
struct Sweep {
    model: RandomModel,
    count: u64,
    seed: u64,
}

fn sweep_params(
    params: &Params,
    eff: &mut Params,
    n: usize,
    depth: u32,
    count: u64,
    decay: f64,
    seed: u64,
) -> Result<Sweep> {
    let depth = params.u32_or("depth", depth)?;
    let count = params.u64_or("count", count)?;
    let decay = params.f64_or("decay", decay)?;
    let stop = params.f64_or("stop", 0.1)?;
    let seed = params.u64_or("seed", seed)?;
    need(depth >= 3 && depth as usize * n <= 20, format!("depth must lie in 3..={}", 20 / n))?;
    need((1..=100_000).contains(&count), "count must lie in 1..=100000")?;
    need(decay.is_finite() && decay >= 0.0, "decay must be finite and >= 0")?;
    need((0.0..0.5).contains(&stop), "stop must lie in [0, 0.5)")?;
    for (k, v) in [("depth", depth.to_string()), ("count", count.to_string()), ("decay", decay.to_string()), ("stop", stop.to_string()), ("seed", seed.to_string())] {
        eff.insert(k, v);
    }
    Ok(Sweep { model: RandomModel::new(n, depth).decay(decay).stop(stop), count, seed })
}

/// Runs one claim or suite item.
pub fn verify_claim(id: ClaimId, params: &Params) -> Result<ClaimReport> {
    known_keys(id, params)?;
    match id {
        ClaimId::Claim1 => claim1(params),
        ClaimId::Claim2 => claim2(params),
        ClaimId::Claim3 => claim3(params),
        ClaimId::Claim4 => claim4(params),
        ClaimId::WeakSobolevPoincare => weak_sobolev_poincare(params),
        ClaimId::ExponentialIntegrability => exponential_integrability(params),
        ClaimId::MeanEmbedding => mean_embedding(params),
        ClaimId::OscillationEmbedding => oscillation_embedding(params),
        ClaimId::Poincare => poincare(params, false),
        ClaimId::SobolevHalfspace => poincare(params, true),
        ClaimId::Biparameter => biparameter(params),
        ClaimId::ReverseMean => reverse_mean(params),
        ClaimId::HalfspaceBracket => halfspace_bracket(params),
    }
}

/// Runs `ids` in parallel with default parameters except `seed` (when
/// given, applied to the sweep items); results keep the order of `ids`.
pub fn run_claims(ids: &[ClaimId], seed: Option<u64>) -> Vec<(ClaimId, Result<ClaimReport>)> {
    ids.par_iter()
        .map(|&id| {
            let mut p = Params::new();
            if let (Some(s), true) = (seed, id.keys().contains(&"seed")) {
                p.insert("seed", s);
            }
            (id, verify_claim(id, &p))
        })
        .collect()
}

/// The nine sweep items with default parameters.
pub fn sweep_suite(seed: Option<u64>) -> Vec<(ClaimId, Result<ClaimReport>)> {
    run_claims(&ClaimId::SUITE, seed)
}

// ---------------------------------------------------------------------------
// Counterexample claims

fn claim1(params: &Params) -> Result<ClaimReport> {
    let big_n = params.u32_or("N", 4)?;
    let big_k = params.u32_or("K", 5)?;
    let gamma = params.f64_or("gamma", 0.5)?;
    let alpha = params.f64_or("alpha", 0.5)?;
    need((3..=6).contains(&big_n), "N must lie in 3..=6")?;
    need((4..=6).contains(&big_k), "K must lie in 4..=6")?;
    need(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)")?;
    need(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)")?;
    let eff = Params::new().with("N", big_n).with("K", big_k).with("gamma", gamma).with("alpha", alpha);
    let mut r = ClaimReport::new(ClaimId::Claim1, eff);
    let leb = DyadicMeasure::lebesgue();

    // E0: a single bump already has an infinite norm at gamma = 0.
    let f0 = crate::examples::e0_function(1)?;
    let p0 = build_mean_profile(&f0, &leb, 0.0, 0.0, 1.0, &LevelWindow::full())?;
    r.check("E0: norm at gamma = 0", profile_sup(&p0, 1.0).value, Rel::Eq, f64::INFINITY);
    r.check("E0: divergence witness found", f64::from(u8::from(p0.divergence.is_some())), Rel::Eq, 1.0);

    // E1: exact rows, then the full profile of the truncations.
    let rows = e1_exact_series(big_n);
    let exact_ok = rows.iter().all(|row| row.all_exceed && row.at_least_n);
    r.check("E1: exact rows have all means above lambda_n and lambda_n * count >= n", f64::from(u8::from(exact_ok)), Rel::Eq, 1.0);
    let f1 = e1_function(big_n)?;
    let p1 = build_mean_profile(&f1, &leb, 1.0, 1.0, 1.0, &LevelWindow::within(DyadicCube::unit(1)))?;
    let mut lam_w = Vec::new();
    for row in &rows {
        let lam = crate::exact::rational_to_f64(&row.lambda);
        let v = lam * p1.w(lam);
        lam_w.push(v);
        r.check(
            format!("E1 n={}: lambda_n W(lambda_n) >= exact count product", row.n),
            v,
            Rel::Ge,
            crate::exact::rational_to_f64(&row.product) * (1.0 - 1e-12),
        );
    }
    let ns: Vec<f64> = rows.iter().map(|row| f64::from(row.n)).collect();
    r.series("E1 exact lambda_n * count", "n", ns.clone(), rows.iter().map(|row| crate::exact::rational_to_f64(&row.product)).collect());
    r.series("E1 lambda_n W(lambda_n)", "n", ns, lam_w);
    let sups: Vec<f64> = (1..=big_n)
        .map(|m| -> Result<f64> {
            let f = e1_function(m)?;
            let p = build_mean_profile(&f, &leb, 1.0, 1.0, 1.0, &LevelWindow::within(DyadicCube::unit(1)))?;
            Ok(profile_sup(&p, 1.0).value)
        })
        .collect::<Result<_>>()?;
    r.check(format!("E1: sup over the truncation N={big_n} is at least N"), *sups.last().unwrap(), Rel::Ge, f64::from(big_n));
    r.check("E1: sup increases with N", min_ratio(&sups), Rel::Gt, 1.0);
    r.series("E1 sup lambda W(lambda)", "N", (1..=big_n).map(f64::from).collect(), sups);

    // E2: certified lower bound grows; the L1 norm stays below zeta(1+alpha).
    let ks: Vec<u32> = (2..=big_k).collect();
    let rows2: Vec<(f64, f64, f64)> = ks
        .par_iter()
        .map(|&k| -> Result<(f64, f64, f64)> {
            let s = spec(ExampleId::E2, Params::new().with("K", k).with("gamma", gamma).with("alpha", alpha))?;
            let (f, col) = e2_function(&s)?;
            let field = Field::lebesgue(&f);
            let eps = col.eps_products();
            let mut lam = f64::INFINITY;
            let mut w = 0.0;
            let mut lower: f64 = 0.0;
            for (layer, e) in col.layers.iter().zip(&eps) {
                for c in layer {
                    lam = lam.min(c.side().powf(gamma) * field.stats(c).mean);
                }
                w += e;
                lower = lower.max(lam * w);
            }
            let prof = build_mean_profile(&f, &leb, gamma, gamma, 1.0, &LevelWindow::full())?;
            Ok((lower, profile_sup(&prof, 1.0).value, lp_norm(&f, &leb, 1.0)?.value))
        })
        .collect::<Result<_>>()?;
    let lower: Vec<f64> = rows2.iter().map(|x| x.0).collect();
    let sup2: Vec<f64> = rows2.iter().map(|x| x.1).collect();
    let l1: Vec<f64> = rows2.iter().map(|x| x.2).collect();
    let kx = xs(&ks);
    r.check("E2: certified lower bound strictly increasing", min_ratio(&lower), Rel::Gt, 1.0);
    r.check("E2: computed sup >= certified lower bound", fmin(&sup2.iter().zip(&lower).map(|(s, l)| s / l).collect::<Vec<_>>()), Rel::Ge, 1.0 - 1e-12);
    let zeta = hurwitz_tail(1.0, 1.0 + alpha);
    r.check("E2: L1 norm stays below zeta(1 + alpha)", fmax(&l1), Rel::Le, zeta);
    let growth: Vec<f64> = lower.iter().zip(&ks).map(|(l, &k)| l / f64::from(k).powf(1.0 - alpha)).collect();
    r.check("E2: lower bound / K^(1-alpha) does not decay below half its first value", fmin(&growth), Rel::Ge, 0.5 * growth[0]);
    r.series("E2 certified lower bound", "K", kx.clone(), lower);
    r.series("E2 sup lambda W(lambda)", "K", kx.clone(), sup2);
    r.series("E2 L1 norm", "K", kx, l1);
    r.notes.push(format!("zeta(1 + alpha) = {zeta:.6}"));
    Ok(r)
}

fn claim2(params: &Params) -> Result<ClaimReport> {
    let p = params.f64_or("p", 2.0)?;
    let gamma = params.f64_or("gamma", 0.5)?;
    let grade = params.u32_or("grade", 4)?;
    let ds: Vec<u32> = params.list("D")?.unwrap_or_else(|| vec![32, 64, 128, 256]);
    let ks: Vec<u32> = params.list("k")?.unwrap_or_else(|| vec![6, 8, 10, 12]);
    need(p > 1.0 && p.is_finite(), "p must be finite and > 1")?;
    need(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)")?;
    need((1..=8).contains(&grade), "grade must lie in 1..=8")?;
    need(ds.len() >= 3 && ds.windows(2).all(|w| w[0] < w[1]) && ds.iter().all(|&d| (2..=400).contains(&d)), "D needs at least 3 increasing values in 2..=400")?;
    need(ks.len() >= 3 && ks.windows(2).all(|w| w[0] < w[1]) && ks.iter().all(|&k| (3..=14).contains(&k)), "k needs at least 3 increasing values in 3..=14")?;
    let list = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
    let eff = Params::new().with("p", p).with("gamma", gamma).with("grade", grade).with("D", list(&ds)).with("k", list(&ks));
    let mut r = ClaimReport::new(ClaimId::Claim2, eff);
    let leb = DyadicMeasure::lebesgue();
    let unit = DyadicCube::unit(1);

    // Graded Whitney construction: bounded norm, JN_p^p growing linearly.
    let rows: Vec<(f64, f64)> = ds
        .par_iter()
        .map(|&d| -> Result<(f64, f64)> {
            let f = e3_graded(p, d, grade)?;
            let b = op_norm(&f, &leb, p, gamma, gamma, Kind::Osc, &LevelWindow::full())?.value;
            Ok((b, jnp_dyadic(&f, &unit, p)?.value.powf(p)))
        })
        .collect::<Result<_>>()?;
    let b: Vec<f64> = rows.iter().map(|x| x.0).collect();
    let jn: Vec<f64> = rows.iter().map(|x| x.1).collect();
    let dx = xs(&ds);
    let slopes: Vec<f64> = jn.windows(2).zip(dx.windows(2)).map(|(j, d)| (j[1] - j[0]) / (d[1] - d[0])).collect();
    r.check("graded: norm spread across D", spread(&b), Rel::Le, 0.05);
    r.check("graded: JN_p^p strictly increasing", min_ratio(&jn), Rel::Gt, 1.0);
    r.check("graded: JN_p^p slope per level does not decay (min >= half of max)", fmin(&slopes), Rel::Ge, 0.5 * fmax(&slopes));
    r.series("graded norm", "D", dx.clone(), b);
    r.series("graded JN_p^p", "D", dx, jn);

    // Oscillating rearrangement: same distribution, growing norm.
    let rows: Vec<(f64, f64, f64, f64)> = ks
        .par_iter()
        .map(|&k| -> Result<(f64, f64, f64, f64)> {
            let f = e3_function(p, k + 4, Some(k))?;
            let g = e3_function(p, k + 4, None)?;
            let bf = op_norm(&f, &leb, p, gamma, gamma, Kind::Osc, &LevelWindow::full())?.value;
            let bg = op_norm(&g, &leb, p, gamma, gamma, Kind::Osc, &LevelWindow::full())?.value;
            Ok((bf.powf(p), bg.powf(p), weak_lp_norm(&f, &leb, p)?.value, weak_lp_norm(&g, &leb, p)?.value))
        })
        .collect::<Result<_>>()?;
    let bf: Vec<f64> = rows.iter().map(|x| x.0).collect();
    let bg: Vec<f64> = rows.iter().map(|x| x.1).collect();
    let weak_gap = rows.iter().map(|x| (x.2 - x.3).abs() / x.3).fold(0.0, f64::max);
    let log_n: Vec<f64> = ks.iter().map(|&k| (gamma - 1.0).abs() * f64::from(k - 2) * std::f64::consts::LN_2).collect();
    let slope: Vec<f64> = increments(&bf).iter().zip(increments(&log_n)).map(|(a, b)| a / b).collect();
    r.check("oscillating: weak-L^p norms equal to the plain function's", weak_gap, Rel::Le, 1e-12);
    r.check("oscillating: norm^p exceeds the plain function's", fmin(&bf.iter().zip(&bg).map(|(a, b)| a / b).collect::<Vec<_>>()), Rel::Gt, 1.0);
    r.check("oscillating: norm^p strictly increasing in k", min_ratio(&bf), Rel::Gt, 1.0);
    r.check("oscillating: slope of norm^p against log N_k does not decay (min >= half of first)", fmin(&slope), Rel::Ge, 0.5 * slope[0]);
    r.series("oscillating norm^p", "log N_k", log_n.clone(), bf);
    r.series("plain norm^p", "log N_k", log_n, bg);
    Ok(r)
}

fn claim3(params: &Params) -> Result<ClaimReport> {
    let p = params.f64_or("p", 2.0)?;
    let n = params.u32_or("n", 2)? as usize;
    let k4: Vec<u32> = params.list("e4_K")?.unwrap_or_else(|| vec![6, 10, 14]);
    let k5: Vec<u32> = params.list("e5_K")?.unwrap_or_else(|| vec![2, 3, 4, 5]);
    let gamma = params.f64_or("gamma", 0.5)?;
    need(p > 1.0 && p.is_finite(), "p must be finite and > 1")?;
    need((1..=2).contains(&n), "n must be 1 or 2")?;
    need(k4.len() >= 2 && k4.iter().all(|&k| (2..=14).contains(&k)), "e4_K needs at least 2 values in 2..=14")?;
    need(k5.len() >= 3 && k5.windows(2).all(|w| w[0] < w[1]) && k5.iter().all(|&k| (1..=5).contains(&k)), "e5_K needs at least 3 increasing values in 1..=5")?;
    need(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)")?;
    let list = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
    let eff = Params::new().with("p", p).with("n", n).with("e4_K", list(&k4)).with("e5_K", list(&k5)).with("gamma", gamma);
    let mut r = ClaimReport::new(ClaimId::Claim3, eff);
    let leb = DyadicMeasure::lebesgue();

    // E4 at gamma = n: infinite weak norm, JN_p settles.
    let lam = e4_lambda(n, p);
    let rows: Vec<(f64, f64, f64)> = k4
        .par_iter()
        .map(|&k| -> Result<(f64, f64, f64)> {
            let s = spec(ExampleId::E4, Params::new().with("n", n).with("p", p).with("K", k))?;
            let f = e4_function(&s)?;
            let b = op_norm(&f, &leb, p, n as f64, n as f64, Kind::Osc, &LevelWindow::full())?.value;
            let field = Field::lebesgue(&f);
            let minb = (1..k)
                .map(|j| {
                    let q = DyadicCube::std(-(j as i32), vec![0; n]);
                    q.side().powf(n as f64 / p) * field.stats(&q).osc
                })
                .fold(f64::INFINITY, f64::min);
            Ok((b, jnp_dyadic(&f, &DyadicCube::unit(n), p)?.value, minb))
        })
        .collect::<Result<_>>()?;
    let kx = xs(&k4);
    r.check("E4: weak norm at gamma = n is infinite for every K", fmin(&rows.iter().map(|x| x.0).collect::<Vec<_>>()), Rel::Eq, f64::INFINITY);
    let jn: Vec<f64> = rows.iter().map(|x| x.1).collect();
    r.check("E4: JN_p spread across K", spread(&jn), Rel::Le, 0.05);
    r.check("E4: every Q_k has normalized oscillation above lambda_{n,p}", fmin(&rows.iter().map(|x| x.2 / lam).collect::<Vec<_>>()), Rel::Gt, 1.0);
    r.series("E4 JN_p", "K", kx.clone(), jn);
    r.series("E4 min_k normalized oscillation of Q_k", "K", kx, rows.iter().map(|x| x.2).collect());
    r.notes.push(format!("lambda_(n,p) = {lam:.6}"));

    // E5: lambda^p W(lambda) grows, JN_p increments shrink.
    let rows: Vec<(f64, f64, f64)> = k5
        .par_iter()
        .map(|&k| -> Result<(f64, f64, f64)> {
            let s = spec(ExampleId::E5, Params::new().with("p", p).with("gamma", gamma).with("K", k))?;
            let (f, col) = e5_function(&s)?;
            let field = Field::lebesgue(&f);
            let prof = crate::profile::build_osc_profile(&f, &leb, gamma, gamma, p, &LevelWindow::full())?;
            let lam = col
                .layers
                .iter()
                .flatten()
                .map(|c| {
                    let q = c.parent();
                    q.side().powf(gamma / p) * field.stats(&q).osc
                })
                .fold(f64::INFINITY, f64::min);
            Ok((lam.powf(p) * prof.w_left(lam), profile_sup(&prof, p).value, jnp_global(&f, p)?.value))
        })
        .collect::<Result<_>>()?;
    let lw: Vec<f64> = rows.iter().map(|x| x.0).collect();
    let jn: Vec<f64> = rows.iter().map(|x| x.2).collect();
    let inc = increments(&jn);
    let kx = xs(&k5);
    r.check("E5: lambda*^p W(lambda*) strictly increasing", min_ratio(&lw), Rel::Gt, 1.0);
    r.check("E5: JN_p increments shrink", fmax(&increments(&inc)), Rel::Le, 0.0);
    r.check("E5: last relative JN_p increment", inc.last().unwrap() / jn[jn.len() - 2], Rel::Le, 0.05);
    r.series("E5 lambda*^p W(lambda*)", "K", kx.clone(), lw);
    r.series("E5 sup lambda^p W(lambda)", "K", kx.clone(), rows.iter().map(|x| x.1).collect());
    r.series("E5 JN_p", "K", kx, jn);
    Ok(r)
}

fn claim4(params: &Params) -> Result<ClaimReport> {
    let p = params.f64_or("p", 2.0)?;
    let q = params.f64_or("q", 2.0)?;
    let gamma = params.f64_or("gamma", 0.5)?;
    let ms: Vec<u32> = params.list("M")?.unwrap_or_else(|| vec![4, 8, 16]);
    let depth = params.u32_or("depth", 4)?;
    let sep = params.u32_or("sep", 8)?;
    let place_m = params.u32_or("place_M", 2)?;
    need(p > 1.0 && p.is_finite() && q > 1.0 && q.is_finite(), "p and q must be finite and > 1")?;
    need(gamma > 0.0 && gamma < p, "gamma must lie in (0, p)")?;
    need(ms.len() >= 2 && ms.windows(2).all(|w| w[0] < w[1]) && ms.iter().all(|&m| (2..=32).contains(&m)), "M needs at least 2 increasing values in 2..=32")?;
    need((2..=8).contains(&depth), "depth must lie in 2..=8")?;
    need((2..=16).contains(&sep), "sep must lie in 2..=16")?;
    need((1..=4).contains(&place_m), "place_M must lie in 1..=4")?;
    let list = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
    let eff = Params::new()
        .with("p", p)
        .with("q", q)
        .with("gamma", gamma)
        .with("M", list(&ms))
        .with("depth", depth)
        .with("sep", sep)
        .with("place_M", place_m);
    let mut r = ClaimReport::new(ClaimId::Claim4, eff);
    let base = |m: u32| Params::new().with("p", p).with("gamma", gamma).with("M", m).with("depth", depth);
    let rows: Vec<(f64, f64, f64, f64, f64)> = ms
        .par_iter()
        .map(|&m| -> Result<(f64, f64, f64, f64, f64)> {
            let s = spec(ExampleId::E6, base(m))?;
            let far = profile_sup(&e6_far_profile(&s)?, p).value.powf(1.0 / p);
            let data = profile_sup(&e6_data_profile(&s), p).value.powf(1.0 / p);
            let wk = e6_weak(&s, q);
            let tilde = e6_tilde_profiles(&s)?.iter().map(|(_, pr)| profile_sup(pr, p).value.powf(1.0 / p)).fold(0.0, f64::max);
            Ok((far, data, wk.weak_norm, wk.lower_bound_q, tilde))
        })
        .collect::<Result<_>>()?;
    let mx = xs(&ms);
    let col = |i: usize| -> Vec<f64> {
        rows.iter().map(|x| [x.0, x.1, x.2, x.3, x.4][i]).collect()
    };
    let (far, data, weak, lbq, tilde) = (col(0), col(1), col(2), col(3), col(4));
    let pp = p / (p - 1.0);
    let expo = (q - 1.0) * (pp - 1.0);
    let per_doubling: Vec<f64> =
        lbq.windows(2).zip(mx.windows(2)).map(|(l, m)| (l[1] / l[0]).powf(1.0 / (m[1] / m[0]).log2())).collect();
    let vs_power: Vec<f64> = lbq.windows(2).zip(mx.windows(2)).map(|(l, m)| (l[1] / l[0]) / (m[1] / m[0]).powf(expo)).collect();
    r.check("far-placed norm: max/min across M", fmax(&far) / fmin(&far), Rel::Le, 2.0);
    r.check("weak-L^q lower bound (q-th power): growth per doubling of M", fmin(&per_doubling), Rel::Ge, 1.5);
    r.check("weak-L^q lower bound growth relative to M^((q-1)(p'-1)): min", fmin(&vs_power), Rel::Ge, 0.5);
    r.check("weak-L^q lower bound growth relative to M^((q-1)(p'-1)): max", fmax(&vs_power), Rel::Le, 2.0);
    r.check("smoothed bumps: max over lattices, max/min across M", fmax(&tilde) / fmin(&tilde), Rel::Le, 2.0);
    let bumps: Vec<_> = (0..3).map(|l| tilde_bump(-l, 1.0, depth)).collect::<Result<_>>()?;
    let lip = bumps.iter().map(|b| b.lipschitz / b.lipschitz_bound).fold(0.0, f64::max);
    let err = bumps.iter().map(|b| b.sup_error).fold(0.0, f64::max);
    r.check("smoothed bumps: Lipschitz constant within the slope bound", lip, Rel::Le, 1.0 + 1e-12);
    let s = spec(ExampleId::E6, base(place_m).with("sep", sep))?;
    let placed = e6_placement(&s)?;
    let b_placed = op_norm(&placed.f, &DyadicMeasure::lebesgue(), p, gamma, gamma, Kind::Osc, &LevelWindow::full())?.value;
    let b_far = profile_sup(&e6_far_profile(&s)?, p).value.powf(1.0 / p);
    r.check(format!("placement at sep={sep}: relative gap to the far-placed norm (M={place_m})"), (b_placed - b_far).abs() / b_far, Rel::Le, 1e-9);
    r.series("far-placed norm", "M", mx.clone(), far);
    r.series("data norm A", "M", mx.clone(), data);
    r.series("weak-L^q quasinorm", "M", mx.clone(), weak);
    r.series("weak-L^q lower bound (q-th power)", "M", mx.clone(), lbq);
    r.series("M^((q-1)(p'-1))", "M", mx.clone(), mx.iter().map(|m| m.powf(expo)).collect());
    r.series("smoothed-bump norm, max over lattices", "M", mx, tilde);
    r.notes.push(format!("smoothed bump sup error at depth {depth}: {err:.3e}"));
    r.notes.push(format!("placement certified: {}", placed.certified));
    Ok(r)
}

// ---------------------------------------------------------------------------
// Randomized sweeps

fn window(depth: u32, m: Option<i32>) -> Result<LevelWindow> {
    match m {
        Some(m) => LevelWindow::levels(-(depth as i32) - m, m),
        None => Ok(LevelWindow::full()),
    }
}

const WINDOWS: [Option<i32>; 3] = [Some(8), Some(16), None];

fn window_x(m: Option<i32>) -> f64 {
    m.map_or(f64::INFINITY, f64::from)
}

fn weak_sobolev_poincare(params: &Params) -> Result<ClaimReport> {
    let n = params.u32_or("n", 2)? as usize;
    let p = params.f64_or("p", 1.5)?;
    need((2..=3).contains(&n), "n must be 2 or 3")?;
    need(p >= 1.0 && p < n as f64, format!("p must lie in [1, {n})"))?;
    let mut eff = Params::new().with("n", n).with("p", p);
    let sw = sweep_params(params, &mut eff, n, if n == 2 { 6 } else { 4 }, 200, 2.0, 1)?;
    let mut r = ClaimReport::new(ClaimId::WeakSobolevPoincare, eff);
    let q0 = DyadicCube::unit(n);
    let leb = DyadicMeasure::lebesgue();
    let pstar = n as f64 * p / (n as f64 - p);
    let ratio = |m: &RandomModel, seed: u64, i: u64| -> Result<f64> {
        let f = random_function(m, seed, i)?;
        let mean = Field::lebesgue(&f).stats(&q0).mean;
        let w = weak_lp_norm(&f.map(|v| v - mean), &leb, pstar)?.value;
        let o = local_op_norm(&f, &q0, p)?;
        Ok(if o > 0.0 { w / o } else { 0.0 })
    };
    let depth = sw.model.depth;
    let pilot_model = sw.model;
    let pilot = 2.0 * fmax(&sweep((sw.count / 4).max(20), |i| ratio(&pilot_model, sw.seed.wrapping_add(1_000_003), i))?);
    let mut maxima = Vec::new();
    let depths = [depth - 1, depth];
    for &d in &depths {
        let m = RandomModel { depth: d, ..sw.model };
        maxima.push(fmax(&sweep(sw.count, |i| ratio(&m, sw.seed, i))?));
    }
    r.check(format!("max ratio at depth {depth} within the pilot constant"), maxima[1], Rel::Le, pilot);
    r.check(format!("relative growth of the max ratio from depth {} to {depth}", depth - 1), maxima[1] / maxima[0] - 1.0, Rel::Lt, 0.10);
    r.series("max weak-L^{p*} / local norm", "depth", xs(&depths), maxima);
    r.notes.push(format!("p* = {pstar:.6}; pilot constant = 2 x max over an independent pilot sweep = {pilot:.6}"));
    Ok(r)
}

fn exponential_integrability(params: &Params) -> Result<ClaimReport> {
    let n = params.u32_or("n", 2)? as usize;
    let k_max = params.u32_or("k_max", 6)?;
    need((1..=3).contains(&n), "n must lie in 1..=3")?;
    need((1..=20).contains(&k_max), "k_max must lie in 1..=20")?;
    let mut eff = Params::new().with("n", n).with("k_max", k_max);
    let sw = sweep_params(params, &mut eff, n, if n == 1 { 10 } else { 6 }, 100, 1.0, 2)?;
    let mut r = ClaimReport::new(ClaimId::ExponentialIntegrability, eff);
    let q0 = DyadicCube::unit(n);
    let first = sweep(sw.count, |i| {
        let f = random_function(&sw.model, sw.seed, i)?;
        let c = distribution_check(&f, &q0, k_max, None)?;
        Ok((c.c_empirical, c.c_implied))
    })?;
    // The measured constants are infima, so take one just above the largest.
    let c = fmax(&first.iter().map(|x| x.0).collect::<Vec<_>>()) * (1.0 + 1e-9);
    let over = first.iter().filter(|x| x.0 > 0.0).map(|x| x.0 / x.1).fold(0.0, f64::max);
    let rows = sweep(sw.count, |i| {
        let f = random_function(&sw.model, sw.seed, i)?;
        distribution_check(&f, &q0, k_max, Some(c))
    })?;
    let fails = rows.iter().filter(|d| !d.holds()).count();
    r.check("single constant: functions violating some row", fails as f64, Rel::Eq, 0.0);
    r.check("measured constant / decomposition-implied constant, max over functions", over, Rel::Le, 1.0);
    let kk: Vec<f64> = (1..=k_max).map(f64::from).collect();
    let worst: Vec<f64> = (0..k_max as usize)
        .map(|j| rows.iter().map(|d| d.rows[j].1 / d.rows[j].2).fold(0.0, f64::max))
        .collect();
    r.series("max |{|f - f_Q0| >= C K^((n-1)/n)}| / 2^-K", "K", kk, worst);
    // Chain sums for p > n.
    let pc = n as f64 + 1.0;
    let chain = sweep((sw.count / 5).max(10), |i| {
        let f = random_function(&sw.model, sw.seed, i)?;
        chain_oscillation_stats(&f, &q0, pc)
    })?;
    r.check(format!("chain sums at p = {pc}: functions exceeding the geometric bound"), chain.iter().filter(|s| !s.holds).count() as f64, Rel::Eq, 0.0);
    r.notes.push(format!("C = {c:.6}; chain max ratio at p = {pc}: {:.6}", chain.iter().map(|s| s.max_ratio).fold(0.0, f64::max)));
    Ok(r)
}

fn mean_embedding(params: &Params) -> Result<ClaimReport> {
    let mut eff = Params::new();
    let sw = sweep_params(params, &mut eff, 1, 8, 50, 0.5, 3)?;
    let mut r = ClaimReport::new(ClaimId::MeanEmbedding, eff);
    let leb = DyadicMeasure::lebesgue();
    let depth = sw.model.depth;
    for (gamma, ahlfors) in [(-1.0, false), (2.0, true), (0.5, false)] {
        let mu = if ahlfors { leb.clone().with_ahlfors(1.0) } else { leb.clone() };
        let mut maxima = Vec::new();
        for m in WINDOWS {
            let w = window(depth, m)?;
            let v = sweep(sw.count, |i| {
                let f = random_function(&sw.model, sw.seed, i)?;
                Ok(op_norm(&f, &mu, 2.0, gamma, gamma, Kind::Mean, &w)?.value / lp_norm(&f, &mu, 2.0)?.value)
            })?;
            maxima.push(fmax(&v));
        }
        r.check(format!("gamma={gamma}: max ratio finite"), maxima[2], Rel::Lt, f64::INFINITY);
        r.check(format!("gamma={gamma}: relative drift of the max ratio across windows"), spread(&maxima), Rel::Lt, 0.10);
        r.series(&format!("gamma={gamma} max norm / L^2 norm"), "window margin", WINDOWS.iter().map(|&m| window_x(m)).collect(), maxima);
    }
    // gamma < 0: W(lambda) over any family against its best disjoint subfamily.
    let gamma = -1.0;
    let worst = sweep(10.min(sw.count), |i| {
        let f = random_function(&sw.model, sw.seed, i)?;
        let field = Field::lebesgue(&f);
        let mut cubes: Vec<(DyadicCube, f64, f64)> = field
            .nodes()
            .iter()
            .map(|nd| (nd.cube.clone(), nd.cube.side().powf(gamma / 2.0) * nd.mean.abs(), nd.cube.side().powf(-gamma) * nd.mass))
            .collect();
        let mut a = field.root().clone();
        for _ in 0..8 {
            a = a.parent();
            let s = field.stats(&a);
            cubes.push((a.clone(), a.side().powf(gamma / 2.0) * s.mean.abs(), a.side().powf(-gamma) * s.mass));
        }
        let mut worst: f64 = 0.0;
        for lam in cubes.iter().map(|c| c.1 * (1.0 - 1e-9)).filter(|&l| l > 0.0) {
            let w: f64 = cubes.iter().filter(|c| c.1 > lam).map(|c| c.2).sum();
            let (d, _) = disjoint_level_sup(&cubes, lam);
            worst = worst.max(w / d);
        }
        Ok(worst)
    })?;
    r.check("gamma=-1: W(lambda) / best disjoint subfamily weight, max", fmax(&worst), Rel::Le, 2.0 + 1e-12);
    Ok(r)
}

fn oscillation_embedding(params: &Params) -> Result<ClaimReport> {
    let mut eff = Params::new();
    let sw = sweep_params(params, &mut eff, 1, 8, 50, 0.5, 4)?;
    let mut r = ClaimReport::new(ClaimId::OscillationEmbedding, eff);
    let leb = DyadicMeasure::lebesgue();
    let depth = sw.model.depth;
    for gamma in [-1.0, 2.0] {
        let mut maxima = Vec::new();
        for m in WINDOWS {
            let w = window(depth, m)?;
            let v = sweep(sw.count, |i| {
                let f = random_function(&sw.model, sw.seed, i)?;
                Ok(op_norm(&f, &leb, 2.0, gamma, gamma, Kind::Osc, &w)?.value / jnp_global(&f, 2.0)?.value)
            })?;
            maxima.push(fmax(&v));
        }
        r.check(format!("gamma={gamma}: max ratio finite"), maxima[2], Rel::Lt, f64::INFINITY);
        r.check(format!("gamma={gamma}: relative drift of the max ratio across windows"), spread(&maxima), Rel::Lt, 0.10);
        r.series(&format!("gamma={gamma} max norm / JN_2"), "window margin", WINDOWS.iter().map(|&m| window_x(m)).collect(), maxima);
    }
    // Outside the range: gamma = n fails on E4, 0 < gamma < 1 fails on E5.
    let s = spec(ExampleId::E4, Params::new().with("n", 2).with("p", 2).with("K", 8))?;
    let f = e4_function(&s)?;
    let b = op_norm(&f, &leb, 2.0, 2.0, 2.0, Kind::Osc, &LevelWindow::full())?.value;
    r.check("gamma=n on E4: norm infinite while JN_2 is finite", if jnp_global(&f, 2.0)?.value.is_finite() { b } else { 0.0 }, Rel::Eq, f64::INFINITY);
    let ks = [2u32, 3, 4, 5];
    let ratios: Vec<f64> = ks
        .par_iter()
        .map(|&k| -> Result<f64> {
            let s = spec(ExampleId::E5, Params::new().with("K", k))?;
            let (f, _) = e5_function(&s)?;
            let prof = crate::profile::build_osc_profile(&f, &leb, 0.5, 0.5, 2.0, &LevelWindow::full())?;
            Ok(profile_sup(&prof, 2.0).value.sqrt() / jnp_global(&f, 2.0)?.value)
        })
        .collect::<Result<_>>()?;
    r.check("gamma=1/2 on E5: norm / JN_2 strictly increasing in K", min_ratio(&ratios), Rel::Gt, 1.0);
    r.series("E5 norm / JN_2 at gamma=1/2", "K", xs(&ks), ratios);
    Ok(r)
}

fn poincare(params: &Params, halfspace: bool) -> Result<ClaimReport> {
    let p = params.f64_or("p", 2.0)?;
    need(p >= 1.0 && p.is_finite(), "p must be finite and >= 1")?;
    let mut eff = Params::new().with("p", p);
    let sw = sweep_params(params, &mut eff, 1, 8, 100, 0.5, 6)?;
    let id = if halfspace { ClaimId::SobolevHalfspace } else { ClaimId::Poincare };
    let mut r = ClaimReport::new(id, eff);
    let depth = sw.model.depth;
    let depths = [depth - 2, depth - 1, depth];
    let mut maxima = Vec::new();
    for &d in &depths {
        let m = RandomModel { depth: d, ..sw.model };
        let v = sweep(sw.count, |i| {
            let s = sobolev_side_check_1d(&random_function(&m, sw.seed, i)?, p)?;
            Ok(if halfspace { s.halfspace_ratio } else { s.ratio })
        })?;
        maxima.push(fmax(&v));
    }
    let what = if halfspace { "sampled half-space norm" } else { "dyadic norm" };
    r.check(format!("max {what} / gradient norm finite"), maxima[2], Rel::Lt, f64::INFINITY);
    r.check(format!("relative drift of the max ratio over depths {}..={depth}", depth - 2), spread(&maxima), Rel::Lt, 0.10);
    r.series(&format!("max {what} / gradient norm"), "depth", xs(&depths), maxima);
    if !halfspace {
        // Refining the same ramp must not change anything.
        let g = StepFunction::constant(DyadicCube::unit(1), 1.0)?;
        let v: Vec<f64> = [0, -4, -8]
            .iter()
            .map(|&l| Ok(sobolev_side_check_1d(&g.refine(l, 1 << 12)?, p)?.ratio))
            .collect::<Result<_>>()?;
        r.check("ramp: ratio unchanged under refinement", spread(&v), Rel::Le, 1e-9);
    }
    Ok(r)
}

fn biparameter(params: &Params) -> Result<ClaimReport> {
    let p = params.f64_or("p", 2.0)?;
    let gamma = params.f64_or("gamma", 1.0)?;
    need(p > 1.0 && p.is_finite(), "p must be finite and > 1")?;
    need(gamma > 0.0 && gamma.is_finite(), "gamma must be finite and > 0")?;
    let mut eff = Params::new().with("p", p).with("gamma", gamma);
    let sw = sweep_params(params, &mut eff, 2, 3, 30, 0.5, 7)?;
    need(sw.model.depth <= 4, "depth must lie in 3..=4 for rectangle sweeps")?;
    let mut r = ClaimReport::new(ClaimId::Biparameter, eff);
    let leb = DyadicMeasure::lebesgue();
    let depth = sw.model.depth as i32;
    // Each margin adds one level of finer rectangles (the function is
    // refined to match) and one coarser level. Drift is judged over the last
    // two enlargements.
    let margins = [1, 2, 3, 4, 5];
    for (a, b) in [(1.0, 0.0), (1.5, -0.5)] {
        for (a2, b2) in [(0.0, 1.0), (0.5, 0.5)] {
            let bp = BiparamParams { n: 1, p, gamma, alpha: a, beta: b, alpha2: a2, beta2: b2 };
            let mut maxima = Vec::new();
            for m in margins {
                let w = LevelWindow::levels(-depth - m, m)?;
                let v = sweep(sw.count, |i| {
                    let f = random_function(&sw.model, sw.seed, i)?.refine(-depth - m, 1 << 20)?;
                    Ok(biparam_weak_norm(&f, &leb, &bp, &w)?.value / lp_norm(&f, &leb, p)?.value)
                })?;
                maxima.push(fmax(&v));
            }
            let inc = increments(&maxima);
            let contraction = inc.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else if w[1] > 0.0 { f64::INFINITY } else { 0.0 }).fold(0.0, f64::max);
            let tag = format!("(alpha,beta,alpha',beta')=({a},{b},{a2},{b2})");
            r.check(format!("{tag}: relative drift of the max ratio over margins 3..=5"), spread(&maxima[2..]), Rel::Lt, 0.10);
            r.check(format!("{tag}: max ratio nondecreasing in the margin"), fmin(&inc), Rel::Ge, 0.0);
            r.check(format!("{tag}: successive increments contract"), contraction, Rel::Le, 0.9);
            let last = *maxima.last().unwrap();
            let limit = if contraction < 1.0 { last + inc.last().unwrap() * contraction / (1.0 - contraction) } else { f64::INFINITY };
            r.notes.push(format!("{tag}: geometric extrapolation of the max ratio: {limit:.4}"));
            r.series(&format!("{tag} max norm / L^p norm"), "window margin", xs(&margins), maxima);
        }
    }
    // Squares only with the plain exponents reproduce the cube norm.
    let bp = BiparamParams { n: 1, p, gamma, alpha: 1.0, beta: 0.0, alpha2: 0.0, beta2: 1.0 };
    let w = LevelWindow::levels(-depth - 1, 1)?;
    let gap = sweep(sw.count.min(10), |i| {
        let f = random_function(&sw.model, sw.seed, i)?.refine(-depth - 1, 1 << 20)?;
        let sq = profile_sup(&biparam_profile(&f, &leb, &bp, &w, true)?, p).value.powf(1.0 / p);
        let cube = op_norm(&f, &leb, p, gamma, gamma, Kind::Mean, &w)?.value;
        Ok((sq - cube).abs() / cube)
    })?;
    r.check("squares only: relative gap to the cube norm on the same window", fmax(&gap), Rel::Le, 1e-9);
    Ok(r)
}

fn reverse_mean(params: &Params) -> Result<ClaimReport> {
    let p = params.f64_or("p", 2.0)?;
    need(p >= 1.0 && p.is_finite(), "p must be finite and >= 1")?;
    let mut eff = Params::new().with("p", p);
    let sw = sweep_params(params, &mut eff, 1, 8, 50, 0.5, 5)?;
    let mut r = ClaimReport::new(ClaimId::ReverseMean, eff);
    let leb = DyadicMeasure::lebesgue();
    let depth = sw.model.depth;
    let depths = [depth - 2, depth - 1, depth];
    for gamma in [0.5, 1.0, -1.0] {
        let mut maxima = Vec::new();
        for &d in &depths {
            let m = RandomModel { depth: d, ..sw.model };
            let v = sweep(sw.count, |i| {
                let f = random_function(&m, sw.seed, i)?;
                let prof = build_mean_profile(&f, &leb, gamma, gamma, p, &LevelWindow::full())?;
                let e = profile_envelopes(&prof, p);
                let env = if gamma > 0.0 { e.liminf0.lower } else { e.limsup_inf.upper };
                Ok(lp_norm(&f, &leb, p)?.value / env.powf(1.0 / p))
            })?;
            maxima.push(fmax(&v));
        }
        let which = if gamma > 0.0 { "liminf at 0" } else { "limsup at infinity" };
        r.check(format!("gamma={gamma}: max L^p / ({which} envelope)^(1/p) finite"), maxima[2], Rel::Lt, f64::INFINITY);
        r.check(format!("gamma={gamma}: relative drift over depths {}..={depth}", depth - 2), spread(&maxima), Rel::Lt, 0.10);
        r.series(&format!("gamma={gamma} max L^p / envelope^(1/p)"), "depth", xs(&depths), maxima);
    }
    Ok(r)
}

fn halfspace_bracket(params: &Params) -> Result<ClaimReport> {
    let p = params.f64_or("p", 2.0)?;
    let gamma = params.f64_or("gamma", 1.0)?;
    let doubling = params.f64_or("doubling", 2.0)?;
    need(p >= 1.0 && p.is_finite(), "p must be finite and >= 1")?;
    need(gamma.is_finite() && gamma != 0.0, "gamma must be finite and nonzero")?;
    need(doubling >= 1.0 && doubling.is_finite(), "doubling must be finite and >= 1")?;
    let mut eff = Params::new().with("p", p).with("gamma", gamma).with("doubling", doubling);
    let sw = sweep_params(params, &mut eff, 1, 8, 100, 0.5, 8)?;
    let mut r = ClaimReport::new(ClaimId::HalfspaceBracket, eff);
    let mu = DyadicMeasure::lebesgue().with_doubling(doubling);
    let fam = ShiftedLatticeFamily::new(1);
    let model = sw.model.nonnegative(true);
    let est = sweep(sw.count, |i| {
        let f = random_function(&model, sw.seed, i)?;
        continuous_weak_norm_bounds(&f, &mu, p, gamma, Kind::Mean, &fam, &LevelWindow::full())
    })?;
    let slack: Vec<f64> = est.iter().map(|e| e.slack).collect();
    r.check("max slack of the sampled norm against the lattice bracket", fmax(&slack), Rel::Le, 4.0);
    r.series("slack", "function index", (0..est.len()).map(|i| i as f64).collect(), slack);
    r.series("c_lower = estimate / standard-lattice norm", "function index", (0..est.len()).map(|i| i as f64).collect(), est.iter().map(|e| e.c_lower).collect());
    r.series("c_upper = max-lattice norm / estimate", "function index", (0..est.len()).map(|i| i as f64).collect(), est.iter().map(|e| e.c_upper).collect());
    // An indicator aligned with the standard lattice has no dyadic
    // oscillation, but balls straddling its edges do.
    let f = StepFunction::constant(DyadicCube::std(4, vec![0]), 1.0)?;
    let e = continuous_weak_norm_bounds(&f, &mu, p, gamma, Kind::Osc, &fam, &LevelWindow::levels(-60, 4)?)?;
    r.check("indicator of [0,16): standard-lattice oscillation norm", e.lower, Rel::Eq, 0.0);
    r.check("indicator of [0,16): sampled oscillation norm", e.sample_estimate, Rel::Gt, 0.0);
    r.check("indicator of [0,16): max-lattice oscillation norm covers the estimate", e.upper, Rel::Ge, e.sample_estimate);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ids() {
        assert_eq!("1".parse::<ClaimId>().unwrap(), ClaimId::Claim1);
        assert_eq!("claim-3".parse::<ClaimId>().unwrap(), ClaimId::Claim3);
        assert_eq!("Poincare".parse::<ClaimId>().unwrap(), ClaimId::Poincare);
        assert!("5".parse::<ClaimId>().is_err());
    }

    #[test]
    fn nan_fails_every_relation() {
        for rel in [Rel::Lt, Rel::Le, Rel::Eq, Rel::Ge, Rel::Gt] {
            assert!(!rel.holds(f64::NAN, 1.0));
        }
    }

    #[test]
    fn empty_report_is_inconsistent() {
        let r = ClaimReport::new(ClaimId::Claim1, Params::new());
        assert_eq!(r.verdict(), Verdict::Inconsistent);
    }

    #[test]
    fn refuses_unknown_keys_and_ranges() {
        let e = verify_claim(ClaimId::Claim4, &Params::new().with("bogus", 1)).unwrap_err();
        assert!(matches!(e, Error::Parameter(_)));
        let e = verify_claim(ClaimId::Claim4, &Params::new().with("gamma", 3)).unwrap_err();
        assert!(matches!(e, Error::Range(ref m) if m.contains("(0, p)")));
    }
}
