//! λ-profiles `W(λ) = Σ_{|a_Q| > λ} ℓ(Q)^{-γ2} μ(Q)` over a whole dyadic
//! lattice: explicitly enumerated cubes plus closed-form geometric tails.

use crate::cube::DyadicCube;
use crate::error::{param, Result};
use crate::exact::pow2;
use crate::function::{CubeStats, DyadicMeasure, Field, Placement, StepFunction};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Mean,
    Osc,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Mean => "mean",
            Kind::Osc => "osc",
        }
    }

    pub fn parse(s: &str) -> Result<Kind> {
        match s {
            "mean" => Ok(Kind::Mean),
            "osc" => Ok(Kind::Osc),
            _ => param(format!("unknown kind '{s}', expected mean or osc")),
        }
    }

    fn pick(self, s: &CubeStats) -> f64 {
        match self {
            Kind::Mean => s.mean.abs(),
            Kind::Osc => s.osc,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub p: f64,
    pub kind: Kind,
}

impl ProfileParams {
    pub fn new(gamma1: f64, gamma2: f64, p: f64, kind: Kind) -> Result<ProfileParams> {
        if !(p >= 1.0) || !p.is_finite() {
            return param(format!("p must be a finite number >= 1, got {p}"));
        }
        if !gamma1.is_finite() || !gamma2.is_finite() {
            return param("exponents must be finite");
        }
        Ok(ProfileParams { gamma1, gamma2, p, kind })
    }

    /// `ℓ^{γ1/p}` for a cube of the given level.
    pub fn value_scale(&self, level: i32) -> f64 {
        pow2f(level as f64 * self.gamma1 / self.p)
    }

    /// `ℓ^{-γ2}` for a cube of the given level.
    pub fn weight_scale(&self, level: i32) -> f64 {
        pow2f(-(level as f64) * self.gamma2)
    }
}

/// `2^x`, exact when `x` is an integer.
pub fn pow2f(x: f64) -> f64 {
    if x.fract() == 0.0 && x.abs() < 2000.0 {
        pow2(x as i32)
    } else {
        x.exp2()
    }
}

/// Levels explicitly enumerated, and an optional scope cube.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelWindow {
    pub k_min: i32,
    pub k_max: i32,
    /// Restrict to the dyadic subcubes of this cube (lattice of the profile).
    pub within: Option<DyadicCube>,
}

impl LevelWindow {
    pub fn full() -> LevelWindow {
        LevelWindow { k_min: i32::MIN, k_max: i32::MAX, within: None }
    }

    pub fn within(q0: DyadicCube) -> LevelWindow {
        LevelWindow { k_min: i32::MIN, k_max: i32::MAX, within: Some(q0) }
    }

    pub fn levels(k_min: i32, k_max: i32) -> Result<LevelWindow> {
        if k_min > k_max {
            return param(format!("window k_min {k_min} exceeds k_max {k_max}"));
        }
        Ok(LevelWindow { k_min, k_max, within: None })
    }

    pub fn with_scope(mut self, q0: Option<DyadicCube>) -> LevelWindow {
        self.within = q0;
        self
    }

    pub fn admits(&self, level: i32) -> bool {
        level >= self.k_min && level <= self.k_max
    }

    pub fn is_unbounded_below(&self) -> bool {
        self.k_min == i32::MIN
    }

    pub fn is_unbounded_above(&self) -> bool {
        self.k_max == i32::MAX
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailKind {
    /// Subcubes of a constant leaf (means only).
    BelowLeafMean,
    /// The ancestors of the tree root.
    AncestorChain,
    /// Shifted-lattice cubes straddling a leaf boundary, one parity class.
    Straddle,
    /// Shifted-lattice cubes inside a leaf below resolution.
    Interior,
    /// Self-similar continuation of a nested chain.
    ChainContinuation,
    /// Analytic family supplied by an example generator.
    Analytic,
}

impl TailKind {
    pub fn name(self) -> &'static str {
        match self {
            TailKind::BelowLeafMean => "below_leaf_mean",
            TailKind::AncestorChain => "ancestor_chain",
            TailKind::Straddle => "straddle",
            TailKind::Interior => "interior",
            TailKind::ChainContinuation => "chain_continuation",
            TailKind::Analytic => "analytic",
        }
    }
}

/// Terms `r = 0, 1, ...` with value `a0 ρ_v^r` and weight
/// `w0 ρ_w^r + w1 ρ_w1^r`; the second component is a correction that never
/// dominates (`ρ_w1 <= ρ_w`) and keeps every weight nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct TailFamily {
    pub kind: TailKind,
    pub a0: f64,
    pub rho_v: f64,
    pub w0: f64,
    pub rho_w: f64,
    pub w1: f64,
    pub rho_w1: f64,
    /// Number of terms; `None` for an infinite family.
    pub terms: Option<u64>,
    /// Cube of term 0 and the per-term move (`None` = parent, `Some(s)` =
    /// child number `s`, `Some(usize::MAX)` = two levels down via child 0).
    pub origin: Option<DyadicCube>,
    pub step: Option<usize>,
}

/// Σ_{r=0}^{m-1} ρ^r for real `m >= 0` (may be infinite).
fn geom(rho: f64, m: f64) -> f64 {
    if m <= 0.0 {
        return 0.0;
    }
    let l = rho.ln();
    if l == 0.0 {
        return m;
    }
    if m.is_infinite() {
        return if l < 0.0 { 1.0 / (1.0 - rho) } else { f64::INFINITY };
    }
    if (rho - 1.0).abs() > 0.01 && m < 1e9 {
        // No cancellation; exact for powers of two.
        return (rho.powf(m) - 1.0) / (rho - 1.0);
    }
    (m * l).exp_m1() / l.exp_m1()
}

/// Σ_{r=a}^{b-1} w ρ^r with `b` possibly infinite.
fn range_sum(w: f64, rho: f64, a: u64, b: Option<u64>) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    let m = match b {
        Some(b) if b <= a => return 0.0,
        Some(b) => (b - a) as f64,
        None => f64::INFINITY,
    };
    let g = geom(rho, m);
    if g.is_infinite() {
        return f64::INFINITY * w.signum();
    }
    w * powr(rho, a) * g
}

impl TailFamily {
    pub fn simple(kind: TailKind, a0: f64, rho_v: f64, w0: f64, rho_w: f64, terms: Option<u64>) -> TailFamily {
        TailFamily { kind, a0, rho_v, w0, rho_w, w1: 0.0, rho_w1: 1.0, terms, origin: None, step: None }
    }

    pub fn with_origin(mut self, origin: DyadicCube, step: Option<usize>) -> TailFamily {
        self.origin = Some(origin);
        self.step = step;
        self
    }

    pub fn value(&self, r: u64) -> f64 {
        self.a0 * powr(self.rho_v, r)
    }

    pub fn weight(&self, r: u64) -> f64 {
        self.w0 * powr(self.rho_w, r) + self.w1 * powr(self.rho_w1, r)
    }

    /// `ln weight(r)`, finite where `weight(r)` overflows.
    fn ln_weight(&self, r: u64) -> f64 {
        if self.w0 <= 0.0 {
            return self.weight(r).ln();
        }
        let lead = self.w0.ln() + r as f64 * self.rho_w.ln();
        if self.w1 == 0.0 {
            return lead;
        }
        lead + (self.w1 / self.w0 * powr(self.rho_w1 / self.rho_w, r)).ln_1p()
    }

    fn in_range(&self, r: u64) -> bool {
        self.terms.map_or(true, |t| r < t)
    }

    /// Closed-form Σ_{a <= r < b} weight(r).
    pub fn weight_range(&self, a: u64, b: Option<u64>) -> f64 {
        let b = match (b, self.terms) {
            (Some(x), Some(t)) => Some(x.min(t)),
            (Some(x), None) => Some(x),
            (None, t) => t,
        };
        range_sum(self.w0, self.rho_w, a, b) + range_sum(self.w1, self.rho_w1, a, b)
    }

    pub fn total_weight(&self) -> f64 {
        self.weight_range(0, None)
    }

    pub fn is_infinite(&self) -> bool {
        self.terms.is_none()
    }

    pub fn decaying(&self) -> bool {
        self.rho_v < 1.0
    }

    pub fn growing(&self) -> bool {
        self.rho_v > 1.0
    }

    /// `ρ_v^p ρ_w` of the dominant weight component.
    pub fn balance(&self, p: f64) -> f64 {
        (p * self.rho_v.ln() + self.rho_w.ln()).exp()
    }

    fn last_index(&self) -> Option<u64> {
        self.terms.map(|t| t.saturating_sub(1))
    }

    /// Largest and smallest values taken (infinite families report the
    /// finite end only).
    fn value_extremes(&self) -> (f64, f64) {
        match self.terms {
            Some(0) => (f64::NAN, f64::NAN),
            Some(t) => {
                let (a, b) = (self.value(0), self.value(t - 1));
                (a.max(b), a.min(b))
            }
            None => (self.a0, self.a0),
        }
    }

    /// Number of leading terms with value `>= v` (`strict`: `> v`), for a
    /// nonincreasing family.
    fn count_leading(&self, v: f64, strict: bool) -> u64 {
        let ok = |r: u64| {
            let x = self.value(r);
            if strict {
                x > v
            } else {
                x >= v
            }
        };
        if !ok(0) || self.terms == Some(0) {
            return 0;
        }
        if self.rho_v >= 1.0 {
            return self.terms.unwrap_or(u64::MAX);
        }
        let est = ((self.a0 / v).ln() / (1.0 / self.rho_v).ln()).floor();
        let mut r = if est.is_finite() && est > 0.0 { est.min(1e15) as u64 } else { 0 };
        if let Some(l) = self.last_index() {
            r = r.min(l);
        }
        while r > 0 && !ok(r) {
            r -= 1;
        }
        while self.in_range(r + 1) && ok(r + 1) {
            r += 1;
        }
        r + 1
    }

    /// First index with value `>= v` (`strict`: `> v`) for a growing family.
    fn first_reaching(&self, v: f64, strict: bool) -> Option<u64> {
        let ok = |r: u64| {
            let x = self.value(r);
            if strict {
                x > v
            } else {
                x >= v
            }
        };
        let est = ((v / self.a0).ln() / self.rho_v.ln()).ceil();
        let mut r = if est.is_finite() && est > 0.0 { est.min(1e15) as u64 } else { 0 };
        while r > 0 && ok(r - 1) {
            r -= 1;
        }
        while !ok(r) {
            r += 1;
        }
        self.in_range(r).then_some(r)
    }

    /// Σ weight over terms with value `>= v` (`strict`: `> v`).
    pub fn weight_above(&self, v: f64, strict: bool) -> f64 {
        if self.rho_v > 1.0 {
            match self.first_reaching(v, strict) {
                Some(r) => self.weight_range(r, None),
                None => 0.0,
            }
        } else {
            let c = self.count_leading(v, strict);
            if c == u64::MAX {
                return self.total_weight();
            }
            self.weight_range(0, Some(c))
        }
    }

    /// First few cubes of the family, for witnesses.
    pub fn witness_cubes(&self, k: usize) -> Vec<DyadicCube> {
        let mut out = Vec::new();
        let mut c = match &self.origin {
            Some(c) => c.clone(),
            None => return out,
        };
        for _ in 0..k {
            out.push(c.clone());
            c = match self.step {
                None => c.parent(),
                Some(usize::MAX) => c.children()[0].children()[0].clone(),
                Some(s) => c.children()[s].clone(),
            };
        }
        out
    }
}

fn powr(rho: f64, r: u64) -> f64 {
    if r <= i32::MAX as u64 {
        rho.powi(r as i32)
    } else {
        (r as f64 * rho.ln()).exp()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Divergence {
    pub reason: String,
    /// Every value of the witnessing family is at least this large.
    pub threshold: f64,
    pub cubes: Vec<DyadicCube>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaProfile {
    /// `(value, weight)` sorted by decreasing value, equal values merged.
    pub steps: Vec<(f64, f64)>,
    pub tails: Vec<TailFamily>,
    pub window: LevelWindow,
    /// False when the window or a continuation left part of the lattice
    /// unaccounted for.
    pub complete: bool,
    pub divergence: Option<Divergence>,
    pub notes: Vec<String>,
}

impl LambdaProfile {
    pub fn new(steps: Vec<(f64, f64)>, tails: Vec<TailFamily>, window: LevelWindow) -> LambdaProfile {
        let mut p = LambdaProfile { steps: merge_steps(steps), tails, window, complete: true, divergence: None, notes: Vec::new() };
        p.detect_divergence();
        p
    }

    pub fn empty() -> LambdaProfile {
        LambdaProfile::new(Vec::new(), Vec::new(), LevelWindow::full())
    }

    /// Infinite families with non-decaying values and non-summable weights.
    fn detect_divergence(&mut self) {
        if self.divergence.is_some() {
            return;
        }
        for t in &self.tails {
            if t.is_infinite() && t.a0 > 0.0 && t.w0 > 0.0 && t.rho_v >= 1.0 && t.rho_w >= 1.0 {
                self.divergence = Some(Divergence {
                    reason: format!(
                        "{} family: values do not decay (ratio {}) and weights do not decay (ratio {})",
                        t.kind.name(),
                        t.rho_v,
                        t.rho_w
                    ),
                    threshold: t.a0,
                    cubes: t.witness_cubes(6),
                });
                return;
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty() && self.tails.is_empty()
    }

    /// `W(λ)` (strict: values `> λ`).
    pub fn w(&self, lambda: f64) -> f64 {
        self.w_cmp(lambda, true)
    }

    /// `W(v⁻)`: total weight of values `>= v`.
    pub fn w_left(&self, v: f64) -> f64 {
        self.w_cmp(v, false)
    }

    fn w_cmp(&self, lambda: f64, strict: bool) -> f64 {
        let s: f64 = self.steps.iter().filter(|x| if strict { x.0 > lambda } else { x.0 >= lambda }).map(|x| x.1).sum();
        s + self.tails.iter().map(|t| t.weight_above(lambda, strict)).sum::<f64>()
    }

    /// Sum of two profiles over disjoint cube families.
    pub fn merge(&self, other: &LambdaProfile) -> LambdaProfile {
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().copied());
        let mut tails = self.tails.clone();
        tails.extend(other.tails.iter().cloned());
        let mut p = LambdaProfile::new(steps, tails, self.window.clone());
        p.complete = self.complete && other.complete;
        p.divergence = self.divergence.clone().or_else(|| other.divergence.clone()).or(p.divergence);
        p
    }

    /// Profile of `c·a`: values scale by `|c|`.
    pub fn scaled_values(&self, c: f64) -> LambdaProfile {
        let c = c.abs();
        let mut out = self.clone();
        for s in out.steps.iter_mut() {
            s.0 *= c;
        }
        for t in out.tails.iter_mut() {
            t.a0 *= c;
        }
        if let Some(d) = out.divergence.as_mut() {
            d.threshold *= c;
        }
        out.steps.retain(|s| s.0 > 0.0);
        out.tails.retain(|t| t.a0 > 0.0);
        out
    }

    /// Profile of `c` disjoint copies of the underlying family: weights
    /// scale by `c > 0`.
    pub fn scaled_weights(&self, c: f64) -> LambdaProfile {
        let mut out = self.clone();
        for s in out.steps.iter_mut() {
            s.1 *= c;
        }
        for t in out.tails.iter_mut() {
            t.w0 *= c;
            t.w1 *= c;
        }
        out
    }
}

fn merge_steps(mut steps: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    steps.retain(|s| s.0 > 0.0 && s.1 > 0.0);
    steps.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(steps.len());
    for (v, w) in steps {
        match out.last_mut() {
            Some(l) if l.0 == v => l.1 += w,
            _ => out.push((v, w)),
        }
    }
    out
}

/// Result of `profile_sup`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupResult {
    /// `sup_λ λ^p W(λ)`, possibly `+∞`.
    pub value: f64,
    /// Breakpoint whose left limit realizes the sup, when it is attained in
    /// the enumerated region.
    pub lambda: Option<f64>,
    /// True when the sup is a limit along λ→0 or λ→∞.
    pub asymptotic: bool,
    /// Absolute bound on the part of the sup not resolved numerically.
    pub error_bound: f64,
    /// Incommensurable critical periods: limit evaluated by summing sups.
    pub kronecker: bool,
    pub reason: Option<String>,
}

impl SupResult {
    fn infinite(reason: String) -> SupResult {
        SupResult { value: f64::INFINITY, lambda: None, asymptotic: true, error_bound: 0.0, kronecker: false, reason: Some(reason) }
    }
}

const REL_EPS: f64 = 1e-15;
const MAX_BREAKPOINTS: usize = 4_000_000;

/// Weight component of a tail, used for bounds and limits.
#[derive(Clone, Copy, Debug)]
struct Comp {
    a0: f64,
    rho_v: f64,
    w: f64,
    rho_w: f64,
}

impl Comp {
    fn g(&self, p: f64) -> f64 {
        (p * self.rho_v.ln() + self.rho_w.ln()).exp()
    }

    /// Sup of `λ^p W_comp(λ)` over `λ <= lo` for a decaying component.
    fn bound_below(&self, p: f64, lo: f64) -> f64 {
        if self.w <= 0.0 || lo <= 0.0 {
            return 0.0;
        }
        let l = (1.0 / self.rho_v).ln();
        let t = ((self.a0 / lo).ln() / l).max(0.0);
        let lam_p = |t: f64| self.a0.powf(p) * (-p * l * t).exp();
        if self.rho_w > 1.0 {
            self.w * self.rho_w * (self.a0.powf(p) * self.g(p).powf(t)) / (self.rho_w - 1.0)
        } else if self.rho_w == 1.0 {
            let tstar = (1.0 / (p * l) - 1.0).max(t);
            self.w * lam_p(tstar) * (tstar + 1.0)
        } else {
            self.w * lam_p(t) / (1.0 - self.rho_w)
        }
    }

    /// Sup of `λ^p W_comp(λ)` over `λ >= hi` for a growing component.
    fn bound_above(&self, p: f64, hi: f64) -> f64 {
        if self.w <= 0.0 {
            return 0.0;
        }
        let t = ((hi / self.a0).ln() / self.rho_v.ln()).max(0.0);
        self.w * self.a0.powf(p) * self.g(p).powf(t) / (1.0 - self.rho_w)
    }
}

fn components(t: &TailFamily) -> Vec<Comp> {
    let mut v = vec![Comp { a0: t.a0, rho_v: t.rho_v, w: t.w0, rho_w: t.rho_w }];
    if t.w1 != 0.0 {
        v.push(Comp { a0: t.a0, rho_v: t.rho_v, w: t.w1, rho_w: t.rho_w1 });
    }
    v
}

fn is_critical(g: f64) -> bool {
    (g.ln()).abs() < 1e-9
}

/// `(sup, inf)` over one period of the limiting periodic function of a set
/// of critical components (all decaying or all growing), or `None` when the
/// periods are incommensurable.
fn periodic_limit(comps: &[Comp], p: f64, decaying: bool) -> Option<(f64, f64)> {
    if comps.is_empty() {
        return Some((0.0, 0.0));
    }
    let r0 = comps[0].rho_v;
    if comps.iter().all(|c| ((c.rho_v - r0) / r0).abs() < 1e-14) {
        return Some(sawtooth_limit(comps, p, decaying));
    }
    periodic_limit_general(comps, p, decaying)
}

fn periodic_limit_general(comps: &[Comp], p: f64, decaying: bool) -> Option<(f64, f64)> {
    let logs: Vec<f64> = comps.iter().map(|c| c.rho_v.ln().abs()).collect();
    let base = logs[0];
    let mut denom = 1i64;
    let mut numers = Vec::new();
    for &l in &logs {
        let (a, b) = rational_ratio(l / base)?;
        numers.push((a, b));
        denom = lcm(denom, b);
    }
    // Every period is an integer multiple of base/denom; the common period
    // is the lcm of those integers.
    let mut per = 1i64;
    for &(a, b) in &numers {
        per = lcm(per, a * (denom / b));
    }
    let period = base * per as f64 / denom as f64;
    let reference = if decaying {
        comps.iter().map(|c| c.a0).fold(f64::INFINITY, f64::min)
    } else {
        comps.iter().map(|c| c.a0).fold(0.0, f64::max)
    };
    let lref = reference.ln();
    // Candidate breakpoints inside one period past the reference.
    let mut cands = Vec::new();
    for c in comps {
        let l = c.rho_v.ln().abs();
        let (mut r, dir) = if decaying {
            (((c.a0.ln() - lref) / l).floor().max(0.0) as u64, 1u64)
        } else {
            (((lref - c.a0.ln()) / l).ceil().max(0.0) as u64, 1u64)
        };
        loop {
            let b = c.a0 * powr(c.rho_v, r);
            let in_window = if decaying { b <= reference * (1.0 + 1e-12) } else { b >= reference * (1.0 - 1e-12) };
            if in_window {
                break;
            }
            r += dir;
        }
        loop {
            let b = c.a0 * powr(c.rho_v, r);
            let off = if decaying { lref - b.ln() } else { b.ln() - lref };
            if off >= period * (1.0 - 1e-12) {
                break;
            }
            cands.push(b);
            r += 1;
        }
    }
    let eval = |b: f64, strict: bool| -> f64 {
        comps
            .iter()
            .map(|c| {
                let t = TailFamily::simple(TailKind::Analytic, c.a0, c.rho_v, c.w, c.rho_w, None);
                if decaying {
                    let k = t.count_leading(b, strict) as f64;
                    c.w * (p * b.ln() + k * c.rho_w.ln()).exp() / (c.rho_w - 1.0)
                } else {
                    let r0 = t.first_reaching(b, strict).unwrap_or(0) as f64;
                    c.w * (p * b.ln() + r0 * c.rho_w.ln()).exp() / (1.0 - c.rho_w)
                }
            })
            .sum()
    };
    let sup = cands.iter().map(|&b| eval(b, false)).fold(0.0, f64::max);
    let inf = cands.iter().map(|&b| eval(b, true)).fold(f64::INFINITY, f64::min);
    Some((sup, inf))
}

/// Common-period case of `periodic_limit` in `O(T log T)`: with
/// `u_c(b) = frac((ln a0_c - ln b)/L)` each component contributes
/// `B_c e^{-pL u_c}`, so the sup sits at term values and the inf just past
/// them; both follow from prefix sums over components sorted by phase.
fn sawtooth_limit(comps: &[Comp], p: f64, decaying: bool) -> (f64, f64) {
    let l = comps[0].rho_v.ln().abs();
    let mut pts: Vec<(f64, f64)> = comps
        .iter()
        .map(|c| {
            let b = if decaying { c.w * c.rho_w / (c.rho_w - 1.0) } else { c.w / (1.0 - c.rho_w) };
            let x = c.a0.ln() / l;
            let mut phase = x - x.floor();
            if phase > 1.0 - 1e-9 {
                phase = 0.0;
            }
            // B_c a0^p e^{-pLφ_c}, taken through logs since a0^p may overflow.
            (phase, (b.max(0.0).ln() + p * (c.a0.ln() - l * phase)).exp())
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut clusters: Vec<(f64, f64)> = Vec::new();
    for (ph, w) in pts {
        match clusters.last_mut() {
            Some(c) if ph - c.0 < 1e-9 => c.1 += w,
            _ => clusters.push((ph, w)),
        }
    }
    let total: f64 = clusters.iter().map(|c| c.1).sum();
    let damp = (-p * l).exp();
    let (mut sup, mut inf) = (0.0f64, f64::INFINITY);
    let mut below = 0.0;
    for &(ph, w) in &clusters {
        // Value at b equal to the terms of this cluster, scaled by b^p.
        let scale = (p * l * ph).exp();
        let at = below * damp + (total - below);
        let strict = (below + w) * damp + (total - below - w);
        sup = sup.max(scale * at);
        inf = inf.min(scale * strict);
        below += w;
    }
    (sup, inf)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

/// `x ≈ a/b` with small integers.
fn rational_ratio(x: f64) -> Option<(i64, i64)> {
    for b in 1..=24i64 {
        let a = (x * b as f64).round();
        if a >= 1.0 && (x * b as f64 - a).abs() < 1e-9 * b as f64 {
            return Some((a as i64, b));
        }
    }
    None
}

/// Per-side limit data for critical components.
struct Limits {
    sup0: f64,
    inf0: f64,
    sup_inf: f64,
    kronecker: bool,
}

fn limits(crit_dec: &[Comp], crit_grow: &[Comp], p: f64) -> Limits {
    let mut kron = false;
    let mut side = |cs: &[Comp], dec: bool| -> (f64, f64) {
        match periodic_limit(cs, p, dec) {
            Some(x) => x,
            None => {
                kron = true;
                cs.iter()
                    .map(|c| periodic_limit(std::slice::from_ref(c), p, dec).expect("single component"))
                    .fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1))
            }
        }
    };
    let (sup0, inf0) = side(crit_dec, true);
    let (sup_inf, _) = side(crit_grow, false);
    Limits { sup0, inf0, sup_inf, kronecker: kron }
}

/// Classification of the infinite families of a profile.
struct Classes {
    crit_dec: Vec<Comp>,
    crit_grow: Vec<Comp>,
    /// Positive non-critical decaying / growing components.
    sub_dec: Vec<Comp>,
    sub_grow: Vec<Comp>,
    unbounded: Option<String>,
}

fn classify(prof: &LambdaProfile, p: f64) -> Classes {
    let mut c = Classes { crit_dec: vec![], crit_grow: vec![], sub_dec: vec![], sub_grow: vec![], unbounded: None };
    for t in prof.tails.iter().filter(|t| t.is_infinite() && t.a0 > 0.0) {
        for (i, comp) in components(t).into_iter().enumerate() {
            if comp.w <= 0.0 {
                continue;
            }
            let g = comp.g(p);
            if t.rho_v == 1.0 {
                // Constant values with summable weights behave like one step.
                continue;
            }
            if i == 0 && g > 1.0 && !is_critical(g) {
                c.unbounded.get_or_insert(format!(
                    "{} family with value ratio {} and weight ratio {} makes λ^p W(λ) unbounded as λ → {}",
                    t.kind.name(),
                    t.rho_v,
                    t.rho_w,
                    if t.decaying() { "0" } else { "∞" }
                ));
            }
            let crit = i == 0 && is_critical(g);
            match (t.decaying(), crit) {
                (true, true) => c.crit_dec.push(comp),
                (false, true) => c.crit_grow.push(comp),
                (true, false) => c.sub_dec.push(comp),
                (false, false) => c.sub_grow.push(comp),
            }
        }
    }
    c
}

/// Enumerated breakpoints in `[lo, hi]` as `(value, weight, ln weight)`,
/// plus the weight of all terms above `hi`.
fn enumerate(prof: &LambdaProfile, lo: f64, hi: f64, cap: usize) -> (Vec<(f64, f64, f64)>, f64, bool) {
    let mut pts: Vec<(f64, f64, f64)> = prof.steps.iter().filter(|s| s.0 >= lo && s.0 <= hi).map(|s| (s.0, s.1, s.1.ln())).collect();
    let mut above = prof.steps.iter().filter(|s| s.0 > hi).map(|s| s.1).sum::<f64>();
    let mut capped = false;
    for t in &prof.tails {
        if t.a0 <= 0.0 {
            continue;
        }
        if t.rho_v > 1.0 {
            let r0 = match t.first_reaching(lo, false) {
                Some(r) => r,
                None => continue,
            };
            let mut r = r0;
            while t.in_range(r) && t.value(r) <= hi {
                pts.push((t.value(r), t.weight(r), t.ln_weight(r)));
                r += 1;
                if pts.len() > cap {
                    capped = true;
                    break;
                }
            }
            if t.in_range(r) {
                above += t.weight_range(r, None);
            }
        } else if t.rho_v == 1.0 {
            if t.a0 > hi {
                above += t.total_weight();
            } else if t.a0 >= lo {
                pts.push((t.a0, t.total_weight(), t.total_weight().ln()));
            }
        } else {
            let mut r = if t.a0 > hi { t.count_leading(hi, true) } else { 0 };
            if r > 0 {
                above += t.weight_range(0, Some(r));
            }
            while t.in_range(r) && t.value(r) >= lo {
                pts.push((t.value(r), t.weight(r), t.ln_weight(r)));
                r += 1;
                if pts.len() > cap {
                    capped = true;
                    break;
                }
            }
        }
        if capped {
            break;
        }
    }
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    (pts, above, capped)
}

/// Max of `v^p W(v⁻)` over enumerated breakpoints.
fn scan(pts: &[(f64, f64, f64)], above: f64, p: f64) -> (f64, Option<f64>) {
    let mut acc = above;
    // `v^p W(v⁻)` carried by rescaling, used once `acc` or `v^p` leaves
    // the safe range (steep weight growth deep below the top value).
    let mut carried = 0.0;
    let mut prev: Option<f64> = None;
    let mut best = 0.0;
    let mut at = None;
    let mut i = 0;
    while i < pts.len() {
        let v = pts[i].0;
        let mut fresh = 0.0;
        while i < pts.len() && pts[i].0 == v {
            acc += pts[i].1;
            fresh += (p * v.ln() + pts[i].2).exp();
            i += 1;
        }
        let vp = v.powf(p);
        carried = match prev {
            Some(u) => carried * (v / u).powf(p),
            None => vp * above,
        } + fresh;
        prev = Some(v);
        let phi = if acc < 1e250 && vp > 1e-250 { vp * acc } else { carried };
        carried = phi;
        if phi > best {
            best = phi;
            at = Some(v);
        }
    }
    (best, at)
}

/// `sup_{λ>0} λ^p W(λ)`.
pub fn profile_sup(prof: &LambdaProfile, p: f64) -> SupResult {
    if let Some(d) = &prof.divergence {
        return SupResult::infinite(d.reason.clone());
    }
    let cls = classify(prof, p);
    if let Some(r) = cls.unbounded {
        return SupResult::infinite(r);
    }
    if prof.is_empty() {
        return SupResult { value: 0.0, lambda: None, asymptotic: false, error_bound: 0.0, kronecker: false, reason: None };
    }
    let lim = limits(&cls.crit_dec, &cls.crit_grow, p);
    let (mut top, mut bot) = (0.0f64, f64::INFINITY);
    for s in &prof.steps {
        top = top.max(s.0);
        bot = bot.min(s.0);
    }
    for t in prof.tails.iter().filter(|t| t.a0 > 0.0) {
        let (a, b) = t.value_extremes();
        if a.is_finite() {
            top = top.max(a);
            bot = bot.min(b);
        }
    }
    let has_dec = !cls.crit_dec.is_empty() || !cls.sub_dec.is_empty();
    let has_grow = !cls.crit_grow.is_empty() || !cls.sub_grow.is_empty();
    let min_rho_dec = cls.crit_dec.iter().chain(&cls.sub_dec).map(|c| c.rho_v).fold(1.0, f64::min);
    let max_rho_grow = cls.crit_grow.iter().chain(&cls.sub_grow).map(|c| c.rho_v).fold(1.0, f64::max);
    let mut lo = if has_dec { bot * min_rho_dec * min_rho_dec } else { bot };
    let mut hi = if has_grow { top * max_rho_grow * max_rho_grow } else { top };
    loop {
        let (pts, above, capped) = enumerate(prof, lo, hi, MAX_BREAKPOINTS);
        let (best, at) = scan(&pts, above, p);
        let fixed: f64 = prof.steps.iter().map(|s| s.1).sum::<f64>()
            + prof
                .tails
                .iter()
                .filter(|t| t.a0 > 0.0 && !(t.is_infinite() && t.decaying()))
                .map(|t| t.total_weight())
                .sum::<f64>();
        let b_low = if has_dec {
            lo.powf(p) * fixed
                + cls.sub_dec.iter().map(|c| c.bound_below(p, lo)).sum::<f64>()
        } else {
            0.0
        };
        let b_high = if has_grow { cls.sub_grow.iter().map(|c| c.bound_above(p, hi)).sum::<f64>() } else { 0.0 };
        let scale = best.max(lim.sup0).max(lim.sup_inf);
        let target = REL_EPS * scale;
        let done_low = b_low <= target;
        let done_high = b_high <= target;
        let step_low = min_rho_dec.powi(64).max(1e-30);
        let step_high = max_rho_grow.powi(64).min(1e30);
        // Stop before λ leaves the floating-point range; the bound is reported.
        let exhausted = (!done_low && lo * step_low < 1e-290) || (!done_high && hi * step_high > 1e290);
        if (done_low && done_high) || capped || exhausted || scale == 0.0 && b_low == 0.0 && b_high == 0.0 {
            let value = best.max(lim.sup0).max(lim.sup_inf);
            let lim_max = lim.sup0.max(lim.sup_inf);
            let asymptotic = lim_max > 0.0 && lim_max >= best;
            return SupResult {
                value,
                lambda: if asymptotic { None } else { at },
                asymptotic,
                error_bound: b_low.max(b_high),
                kronecker: lim.kronecker,
                reason: if capped {
                    Some("breakpoint budget exhausted; error bound reported".to_string())
                } else if exhausted {
                    Some("lambda range exhausted; error bound reported".to_string())
                } else {
                    None
                },
            };
        }
        if !done_low {
            lo *= step_low;
        }
        if !done_high {
            hi *= step_high;
        }
    }
}

/// Interval-valued envelope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Envelopes {
    /// `liminf_{λ→0⁺} λ^p W(λ)`.
    pub liminf0: Envelope,
    /// `limsup_{λ→∞} λ^p W(λ)`.
    pub limsup_inf: Envelope,
    pub truncated: bool,
}

/// Asymptotic envelopes of `λ^p W(λ)`.
pub fn profile_envelopes(prof: &LambdaProfile, p: f64) -> Envelopes {
    let sup = profile_sup(prof, p).value;
    let cls = classify(prof, p);
    let (mut l0, mut linf);
    if prof.divergence.is_some() {
        l0 = f64::INFINITY;
        linf = 0.0;
        // Growing divergent families are infinite at every λ.
        if prof.tails.iter().any(|t| t.is_infinite() && t.rho_v > 1.0 && t.rho_w >= 1.0 && t.w0 > 0.0) {
            linf = f64::INFINITY;
        }
    } else {
        let lim = limits(&cls.crit_dec, &cls.crit_grow, p);
        l0 = lim.inf0;
        linf = lim.sup_inf;
        if let Some(r) = &cls.unbounded {
            if r.ends_with('0') {
                l0 = f64::INFINITY;
            } else {
                linf = f64::INFINITY;
            }
        }
    }
    if prof.complete {
        Envelopes { liminf0: Envelope { lower: l0, upper: l0 }, limsup_inf: Envelope { lower: linf, upper: linf }, truncated: false }
    } else {
        Envelopes {
            liminf0: Envelope { lower: l0, upper: sup.max(l0) },
            limsup_inf: Envelope { lower: linf, upper: sup.max(linf) },
            truncated: true,
        }
    }
}

/// Row of the breakpoint table: `(λ, W(λ⁻), λ^p W(λ⁻), from a tail)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileRow {
    pub lambda: f64,
    pub w: f64,
    pub lambda_p_w: f64,
    pub tail: bool,
}

/// Breakpoints between `lo` and `hi` (default: the explicit range plus a
/// few tail periods), capped at `max_rows`.
pub fn profile_table(prof: &LambdaProfile, p: f64, periods: u32, max_rows: usize) -> Vec<ProfileRow> {
    if prof.divergence.is_some() || prof.is_empty() {
        return Vec::new();
    }
    let (mut top, mut bot) = (0.0f64, f64::INFINITY);
    for s in &prof.steps {
        top = top.max(s.0);
        bot = bot.min(s.0);
    }
    let mut rmin: f64 = 1.0;
    let mut rmax: f64 = 1.0;
    for t in prof.tails.iter().filter(|t| t.a0 > 0.0) {
        let (a, b) = t.value_extremes();
        if a.is_finite() {
            top = top.max(a);
            bot = bot.min(b);
        }
        if t.is_infinite() {
            rmin = rmin.min(t.rho_v);
            rmax = rmax.max(t.rho_v);
        }
    }
    let lo = bot * rmin.powi(periods as i32);
    let hi = top * rmax.powi(periods as i32);
    let (pts, above, _) = enumerate(prof, lo, hi, max_rows);
    let step_vals: std::collections::HashSet<u64> = prof.steps.iter().map(|s| s.0.to_bits()).collect();
    let mut rows = Vec::new();
    let mut acc = above;
    let mut i = 0;
    while i < pts.len() && rows.len() < max_rows {
        let v = pts[i].0;
        while i < pts.len() && pts[i].0 == v {
            acc += pts[i].1;
            i += 1;
        }
        rows.push(ProfileRow { lambda: v, w: acc, lambda_p_w: v.powf(p) * acc, tail: !step_vals.contains(&v.to_bits()) });
    }
    rows
}

/// Number of ancestor levels enumerated explicitly before switching to the
/// geometric asymptote: enough that relative corrections drop below 2^-60.
fn explicit_ancestor_levels(n: usize, base_volume: f64, mass: f64) -> u32 {
    let ratio = (mass / base_volume).max(1.0);
    ((60.0 + ratio.log2().ceil()) / n as f64).ceil() as u32 + 2
}

/// Builder for the profile of a field over one lattice.
struct Builder<'a> {
    params: &'a ProfileParams,
    window: &'a LevelWindow,
    steps: Vec<(f64, f64)>,
    tails: Vec<TailFamily>,
    complete: bool,
    notes: Vec<String>,
}

impl<'a> Builder<'a> {
    fn push(&mut self, level: i32, s: &CubeStats) {
        let x = self.params.kind.pick(s);
        if x == 0.0 || s.mass <= 0.0 {
            return;
        }
        if !self.window.admits(level) {
            self.complete = false;
            return;
        }
        self.steps.push((self.params.value_scale(level) * x, self.params.weight_scale(level) * s.mass));
    }

    /// Infinite geometric family, truncated to the window when needed.
    fn push_tail(&mut self, mut t: TailFamily, first_level: i32, level_step: i32) {
        if t.a0 == 0.0 || (t.w0 == 0.0 && t.w1 == 0.0) {
            return;
        }
        // Terms r sit at level first_level + r * level_step.
        let allowed: Option<u64> = if level_step < 0 {
            if self.window.is_unbounded_below() {
                None
            } else if first_level < self.window.k_min {
                Some(0)
            } else {
                Some(((first_level - self.window.k_min) / (-level_step)) as u64 + 1)
            }
        } else if self.window.is_unbounded_above() {
            None
        } else if first_level > self.window.k_max {
            Some(0)
        } else {
            Some(((self.window.k_max - first_level) / level_step) as u64 + 1)
        };
        t.terms = match (t.terms, allowed) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        if allowed.is_some() {
            self.complete = false;
        }
        if t.terms != Some(0) {
            self.tails.push(t);
        }
    }

    fn finish(self) -> LambdaProfile {
        let mut p = LambdaProfile::new(self.steps, self.tails, self.window.clone());
        p.complete = self.complete;
        p.notes = self.notes;
        p
    }
}

/// Ancestors of `base` (any lattice cube containing the field root): the
/// first levels explicitly, then the geometric asymptote.
fn ancestor_chain(b: &mut Builder, field: &Field, base: &DyadicCube, top: Option<i32>) {
    let n = field.dim();
    let root = &field.node(0);
    let k_exp = explicit_ancestor_levels(n, root.cube.volume(), root.mass.max(root.abs_integral));
    let mut a = base.clone();
    for _ in 0..k_exp {
        a = a.parent();
        if top.map_or(false, |t| a.level > t) {
            return;
        }
        let s = field.ancestor_stats(&a);
        b.push(a.level, &s);
    }
    if top.is_some() {
        // Finite scope: keep enumerating explicitly.
        while top.map_or(false, |t| a.level < t) {
            a = a.parent();
            let s = field.ancestor_stats(&a);
            b.push(a.level, &s);
        }
        return;
    }
    let a_next = a.parent();
    let s = field.ancestor_stats(&a_next);
    let x = b.params.kind.pick(&s);
    if x == 0.0 {
        return;
    }
    let pr = b.params;
    let a0 = pr.value_scale(a_next.level) * x;
    let w0 = pr.weight_scale(a_next.level) * s.mass;
    let rho_v = pow2f(pr.gamma1 / pr.p - n as f64);
    let rho_w = pow2f(n as f64 - pr.gamma2);
    let t = TailFamily::simple(TailKind::AncestorChain, a0, rho_v, w0, rho_w, None).with_origin(a_next.clone(), None);
    b.push_tail(t, a_next.level, 1);
}

/// Profile of the mean or oscillation sequence of `field` over the
/// standard lattice.
pub fn build_profile(field: &Field, params: &ProfileParams, window: &LevelWindow) -> Result<LambdaProfile> {
    if let Some(q0) = &window.within {
        if q0.lattice != 0 || q0.dim() != field.dim() {
            return param("scope cube must be a standard-lattice cube of the function's dimension");
        }
    }
    let mut b = Builder { params, window, steps: Vec::new(), tails: Vec::new(), complete: true, notes: Vec::new() };
    let n = field.dim() as f64;
    // Starting node and whether ancestors are in scope.
    let (start, ancestors_top): (Option<usize>, Option<Option<i32>>) = match &window.within {
        None => (Some(0), Some(None)),
        Some(q0) => match field.locate(q0) {
            Placement::Node(i) => (Some(i), None),
            Placement::Above => (Some(0), Some(Some(q0.level))),
            Placement::InsideLeaf(i) => {
                below_leaf(&mut b, field, i, Some(q0), n);
                return Ok(b.finish());
            }
            Placement::Disjoint => return Ok(b.finish()),
        },
    };
    if let Some(s) = start {
        let mut stack = vec![s];
        while let Some(i) = stack.pop() {
            let nd = field.node(i);
            b.push(nd.cube.level, &CubeStats { mass: nd.mass, mean: nd.mean, osc: nd.osc });
            if nd.is_leaf() {
                below_leaf(&mut b, field, i, None, n);
            } else {
                stack.extend(field.children(i));
            }
        }
    }
    if let Some(top) = ancestors_top {
        let root = field.root().clone();
        ancestor_chain(&mut b, field, &root, top);
    }
    if params.kind == Kind::Osc {
        if let Some(c) = field.continuation() {
            let inside = window.within.as_ref().map_or(true, |q0| q0.contains(&c.start));
            if inside {
                let lev = c.start.level;
                let a0 = params.value_scale(lev) * c.osc_start;
                let w0 = params.weight_scale(lev) * c.start.volume();
                let rho_v = pow2f(-params.gamma1 / params.p) * c.osc_growth;
                let rho_w = pow2f(params.gamma2 - n);
                let t = TailFamily::simple(TailKind::ChainContinuation, a0, rho_v, w0, rho_w, None)
                    .with_origin(c.start.clone(), Some(c.slot));
                b.push_tail(t, lev, -1);
                b.complete = false;
                b.notes.push("chain continuation: cubes above the continuation start use the truncated tree".into());
            }
        }
    }
    Ok(b.finish())
}

/// Mean-kind family of the strict subcubes of leaf `i` (or of `q` inside it,
/// including `q` itself).
fn below_leaf(b: &mut Builder, field: &Field, i: usize, q: Option<&DyadicCube>, n: f64) {
    if b.params.kind != Kind::Mean {
        return;
    }
    let nd = field.node(i);
    if nd.value == 0.0 || nd.density == 0.0 {
        return;
    }
    let pr = b.params;
    let (top, first) = match q {
        Some(q) => (q.clone(), q.level),
        None => (nd.cube.children()[0].clone(), nd.cube.level - 1),
    };
    // Level `first` holds one cube (scoped) or the 2^n children.
    let count_at_first = if q.is_some() { 1.0 } else { pow2f(n) };
    let a0 = nd.value.abs() * pr.value_scale(first);
    let w0 = count_at_first * nd.density * pow2f(first as f64 * (n - pr.gamma2));
    let rho_v = pow2f(-pr.gamma1 / pr.p);
    let rho_w = pow2f(pr.gamma2);
    let t = TailFamily::simple(TailKind::BelowLeafMean, a0, rho_v, w0, rho_w, None).with_origin(top, Some(0));
    b.push_tail(t, first, -1);
}

pub fn build_mean_profile(
    f: &StepFunction,
    mu: &DyadicMeasure,
    gamma1: f64,
    gamma2: f64,
    p: f64,
    window: &LevelWindow,
) -> Result<LambdaProfile> {
    let params = ProfileParams::new(gamma1, gamma2, p, Kind::Mean)?;
    build_profile(&Field::new(f, mu)?, &params, window)
}

pub fn build_osc_profile(
    f: &StepFunction,
    mu: &DyadicMeasure,
    gamma1: f64,
    gamma2: f64,
    p: f64,
    window: &LevelWindow,
) -> Result<LambdaProfile> {
    let params = ProfileParams::new(gamma1, gamma2, p, Kind::Osc)?;
    build_profile(&Field::new(f, mu)?, &params, window)
}

/// Profile over a shifted lattice `t`: cubes meeting the root at levels at
/// or above the finest leaf level are enumerated with exact overlaps; in one
/// dimension the finer cubes are summed in closed form, in higher
/// dimensions they are cut off and the profile is marked incomplete.
pub fn build_lattice_profile(field: &Field, lattice: u32, params: &ProfileParams, window: &LevelWindow) -> Result<LambdaProfile> {
    if lattice == 0 {
        return build_profile(field, params, window);
    }
    if window.within.is_some() {
        return param("scoped profiles are only available on the standard lattice");
    }
    let n = field.dim();
    let root = field.root().clone();
    let leaves = field.leaf_indices();
    let m = leaves.iter().map(|&i| field.node(i).cube.level).min().unwrap_or(root.level);
    // Smallest lattice cube containing the root.
    let lo_corner: Vec<f64> = (0..n).map(|i| root.bounds_f64(i).0).collect();
    let mut level = root.level;
    let container = loop {
        let c = DyadicCube::containing_point(lattice, level, &lo_corner)?;
        if c.contains_cube_any(&root) {
            break c;
        }
        level += 1;
    };
    let mut b = Builder { params, window, steps: Vec::new(), tails: Vec::new(), complete: true, notes: Vec::new() };
    let mut stack = vec![container.clone()];
    while let Some(q) = stack.pop() {
        let s = field.stats_any(&q);
        b.push(q.level, &s);
        if q.level > m {
            for c in q.children() {
                if c.overlap_volume(&root) > 0.0 {
                    stack.push(c);
                }
            }
        }
    }
    ancestor_chain(&mut b, field, &container, None);
    if n == 1 {
        below_resolution_1d(&mut b, field, lattice, m, &leaves);
    } else {
        b.complete = false;
        b.notes.push(format!("cubes of lattice {lattice} below level {m} are not enumerated"));
    }
    Ok(b.finish())
}

/// Closed-form families for one-dimensional shifted cubes below level `m`.
fn below_resolution_1d(b: &mut Builder, field: &Field, lattice: u32, m: i32, leaves: &[usize]) {
    let pr = *b.params;
    let mut cells: Vec<(f64, f64, f64, f64, i32)> = leaves
        .iter()
        .map(|&i| {
            let nd = field.node(i);
            let (lo, hi) = nd.cube.bounds_f64(0);
            (lo, hi, nd.value, nd.density, nd.cube.level)
        })
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Interior cubes of each leaf: 2^{k-j} - 1 cubes at level j < m.
    if pr.kind == Kind::Mean {
        for &(_, _, c, d, k) in &cells {
            if c == 0.0 || d == 0.0 {
                continue;
            }
            let j0 = m - 1;
            let a0 = c.abs() * pr.value_scale(j0);
            let w0 = d * pow2(k) * pow2f(-(j0 as f64) * pr.gamma2);
            let w1 = -d * pow2f(j0 as f64 * (1.0 - pr.gamma2));
            let mut t = TailFamily::simple(TailKind::Interior, a0, pow2f(-pr.gamma1 / pr.p), w0, pow2f(pr.gamma2), None);
            t.w1 = w1;
            t.rho_w1 = pow2f(pr.gamma2 - 1.0);
            b.push_tail(t, j0, -1);
        }
    }
    // Boundary points with the values on either side (outside: 0, density 1).
    let mut bounds: BTreeMap<u64, (f64, (f64, f64), (f64, f64))> = BTreeMap::new();
    let key = |x: f64| (x + 0.0).to_bits() ^ (1u64 << 63);
    let first = cells[0];
    bounds.insert(key(first.0), (first.0, (0.0, 1.0), (first.2, first.3)));
    for w in cells.windows(2) {
        bounds.insert(key(w[0].1), (w[0].1, (w[0].2, w[0].3), (w[1].2, w[1].3)));
    }
    let last = cells[cells.len() - 1];
    bounds.insert(key(last.1), (last.1, (last.2, last.3), (0.0, 1.0)));
    for (_, (x, (cl, dl), (cr, dr))) in bounds {
        for parity in 0..2 {
            let j = m - 1 - parity;
            let cube = match DyadicCube::containing_point(lattice, j, &[x]) {
                Ok(c) => c,
                Err(_) => continue,
            };
            let (lo, _) = cube.bounds_f64(0);
            let side = pow2(j);
            let theta = (x - lo) / side;
            let (ml, mr) = (side * theta * dl, side * (1.0 - theta) * dr);
            let mass = ml + mr;
            if mass <= 0.0 {
                continue;
            }
            let stat = match pr.kind {
                Kind::Mean => ((ml * cl + mr * cr) / mass).abs(),
                Kind::Osc => 2.0 * ml * mr * (cl - cr).abs() / (mass * mass),
            };
            if stat == 0.0 {
                continue;
            }
            let a0 = pr.value_scale(j) * stat;
            let w0 = pr.weight_scale(j) * mass;
            let t = TailFamily::simple(
                TailKind::Straddle,
                a0,
                pow2f(-2.0 * pr.gamma1 / pr.p),
                w0,
                pow2f(2.0 * (pr.gamma2 - 1.0)),
                None,
            )
            .with_origin(cube, Some(usize::MAX));
            b.push_tail(t, j, -2);
        }
    }
}

/// Largest total weight of an antichain among the enumerated cubes whose
/// values exceed `lambda`: `best(Q) = max(own, Σ best(children))` over the
/// containment forest.
pub fn disjoint_level_sup(cubes: &[(DyadicCube, f64, f64)], lambda: f64) -> (f64, Vec<DyadicCube>) {
    let mut order: Vec<usize> = (0..cubes.len()).collect();
    // Larger cubes first so parents precede children.
    order.sort_by(|&a, &b| DyadicCube::witness_order(&cubes[a].0, &cubes[b].0));
    let pos: std::collections::HashMap<&DyadicCube, usize> = cubes.iter().enumerate().map(|(i, c)| (&c.0, i)).collect();
    let top = cubes.iter().map(|c| c.0.level).max().unwrap_or(0);
    let mut parent = vec![usize::MAX; cubes.len()];
    for (i, c) in cubes.iter().enumerate() {
        let mut a = c.0.clone();
        while a.level < top {
            a = a.parent();
            if let Some(&j) = pos.get(&a) {
                parent[i] = j;
                break;
            }
        }
    }
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); cubes.len()];
    for &i in &order {
        if parent[i] != usize::MAX {
            kids[parent[i]].push(i);
        }
    }
    let mut best = vec![0.0; cubes.len()];
    let mut take = vec![false; cubes.len()];
    for &i in order.iter().rev() {
        let own = if cubes[i].1 > lambda { cubes[i].2 } else { 0.0 };
        let sub: f64 = kids[i].iter().map(|&k| best[k]).sum();
        if own > 0.0 && own >= sub {
            best[i] = own;
            take[i] = true;
        } else {
            best[i] = sub;
        }
    }
    let mut total = 0.0;
    let mut wit = Vec::new();
    let mut stack: Vec<usize> = order.iter().copied().filter(|&i| parent[i] == usize::MAX).collect();
    for &r in &stack {
        total += best[r];
    }
    while let Some(i) = stack.pop() {
        if take[i] {
            wit.push(cubes[i].0.clone());
        } else {
            stack.extend(kids[i].iter().copied());
        }
    }
    wit.sort_by(DyadicCube::witness_order);
    (total, wit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn common_period_limit_matches_general() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &(decaying, p) in &[(true, 1.0), (true, 2.0), (false, 1.5)] {
            for _ in 0..20 {
                let rho_v: f64 = if decaying { 0.5f64.powf(0.7) } else { 2f64.powf(0.7) };
                let rho_w = rho_v.powf(-p);
                let comps: Vec<Comp> = (0..6)
                    .map(|_| Comp {
                        a0: 2f64.powf(rng.gen_range(-6.0..6.0)) * if rng.gen_bool(0.3) { 1.0 } else { rho_v },
                        rho_v,
                        w: rng.gen_range(0.0..3.0),
                        rho_w,
                    })
                    .collect();
                let (s1, i1) = sawtooth_limit(&comps, p, decaying);
                let (s2, i2) = periodic_limit_general(&comps, p, decaying).unwrap();
                assert!((s1 - s2).abs() <= 1e-9 * s2, "{s1} {s2}");
                assert!((i1 - i2).abs() <= 1e-9 * i2, "{i1} {i2}");
            }
        }
    }

    fn c1(level: i32, j: i64) -> DyadicCube {
        DyadicCube::std(level, vec![j])
    }

    #[test]
    fn single_step() {
        let p = LambdaProfile::new(vec![(2.0, 3.0)], vec![], LevelWindow::full());
        let s = profile_sup(&p, 1.0);
        assert_eq!(s.value, 6.0);
        assert_eq!(s.lambda, Some(2.0));
    }

    #[test]
    fn two_steps() {
        let p = LambdaProfile::new(vec![(1.0, 1.0), (2.0, 1.0)], vec![], LevelWindow::full());
        assert_eq!(profile_sup(&p, 1.0).value, 2.0);
    }

    #[test]
    fn empty_profile_is_zero() {
        let f = StepFunction::zero(1);
        let p = build_mean_profile(&f, &DyadicMeasure::lebesgue(), 1.0, 1.0, 1.0, &LevelWindow::full()).unwrap();
        assert!(p.is_empty());
        assert_eq!(profile_sup(&p, 1.0).value, 0.0);
    }

    #[test]
    fn constant_one_subcube_profile() {
        let f = StepFunction::constant(c1(0, 0), 1.0).unwrap();
        let w = LevelWindow::within(c1(0, 0));
        let p = build_mean_profile(&f, &DyadicMeasure::lebesgue(), 1.0, 1.0, 1.0, &w).unwrap();
        // W(λ) on the band [2^{-r-1}, 2^{-r}) is 2^{r+1} - 1.
        for r in 0..20 {
            let lam = pow2(-r - 1) * 1.5;
            assert_eq!(p.w(lam), pow2(r + 1) - 1.0);
        }
        let s = profile_sup(&p, 1.0);
        assert!((s.value - 2.0).abs() < 1e-14, "{s:?}");
        assert!(s.asymptotic);
        let e = profile_envelopes(&p, 1.0);
        assert!((e.liminf0.lower - 1.0).abs() < 1e-14);
        assert_eq!(e.limsup_inf.lower, 0.0);
    }

    #[test]
    fn tail_closed_form_matches_sum() {
        let t = TailFamily::simple(TailKind::Analytic, 3.0, 0.7, 0.25, 1.3, None);
        let direct: f64 = (0..50).map(|r| t.weight(r)).sum();
        let closed = t.weight_range(0, Some(50));
        assert!(((direct - closed) / direct).abs() < 1e-12);
    }

    #[test]
    fn constant_full_lattice_diverges() {
        let f = StepFunction::constant(c1(0, 0), 1.0).unwrap();
        let p = build_mean_profile(&f, &DyadicMeasure::lebesgue(), 1.0, 1.0, 1.0, &LevelWindow::full()).unwrap();
        assert!(p.divergence.is_some());
        assert_eq!(profile_sup(&p, 1.0).value, f64::INFINITY);
    }

    #[test]
    fn antichain_dp_on_chain() {
        let cubes = vec![(c1(0, 0), 5.0, 1.0), (c1(-1, 0), 5.0, 3.0), (c1(-2, 0), 5.0, 2.0)];
        let (v, w) = disjoint_level_sup(&cubes, 1.0);
        assert_eq!(v, 3.0);
        assert_eq!(w, vec![c1(-1, 0)]);
    }
}
