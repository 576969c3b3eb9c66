//! Generators for the counterexample families E0–E6, plus the analytic
//! companions used when a family is too large to build explicitly.

use crate::cube::DyadicCube;
use crate::error::{param, Error, Result};
use crate::exact::pow2;
use crate::function::{ChainContinuation, Field, StepFunction};
use crate::profile::{build_lattice_profile, build_profile, Kind, LambdaProfile, LevelWindow, ProfileParams};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

/// Flat `key=value` parameters shared by the generators, the claim runners
/// and the CLI.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Params(BTreeMap<String, String>);

impl Params {
    pub fn new() -> Params {
        Params::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Params {
        self.insert(key, value);
        self
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(|s| s.as_str())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &String)> {
        self.0.iter()
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s.trim().parse::<T>().map(Some).map_err(|_| Error::Parameter(format!("cannot parse {key}={s}"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.parse::<f64>(key)?.unwrap_or(default))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.parse::<f64>(key)
    }

    pub fn u32_or(&self, key: &str, default: u32) -> Result<u32> {
        Ok(self.parse::<u32>(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.parse::<u64>(key)?.unwrap_or(default))
    }

    pub fn opt_u64(&self, key: &str) -> Result<Option<u64>> {
        self.parse::<u64>(key)
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("1") | Some("true") | Some("yes") => Ok(true),
            Some("0") | Some("false") | Some("no") => Ok(false),
            Some(s) => param(format!("cannot parse {key}={s} as a boolean")),
        }
    }

    /// Comma- or space-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|x| !x.is_empty())
                .map(|x| x.parse::<T>().map_err(|_| Error::Parameter(format!("cannot parse {key}={s}"))))
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExampleId {
    E0,
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
}

impl ExampleId {
    pub const ALL: [ExampleId; 7] =
        [ExampleId::E0, ExampleId::E1, ExampleId::E2, ExampleId::E3, ExampleId::E4, ExampleId::E5, ExampleId::E6];

    pub fn name(self) -> &'static str {
        match self {
            ExampleId::E0 => "E0",
            ExampleId::E1 => "E1",
            ExampleId::E2 => "E2",
            ExampleId::E3 => "E3",
            ExampleId::E4 => "E4",
            ExampleId::E5 => "E5",
            ExampleId::E6 => "E6",
        }
    }

    /// Parameter key of the truncation parameter.
    pub fn truncation_key(self) -> &'static str {
        match self {
            ExampleId::E0 => "N",
            ExampleId::E1 => "N",
            ExampleId::E2 | ExampleId::E4 | ExampleId::E5 => "K",
            ExampleId::E3 => "D",
            ExampleId::E6 => "M",
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExampleId {
    type Err = Error;
    fn from_str(s: &str) -> Result<ExampleId> {
        ExampleId::ALL
            .iter()
            .copied()
            .find(|e| e.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parameter(format!("unknown example '{s}' (expected E0..E6)")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExampleSpec {
    pub id: ExampleId,
    /// Dimension.
    pub n: usize,
    pub p: f64,
    pub gamma: f64,
    /// Slowly decaying variant exponent (E2 coefficients, E4/E5 variants).
    pub alpha: Option<f64>,
    /// N for E1, K for E2/E4/E5, depth D for E3, M for E6.
    pub truncation: u32,
    /// Depth sequence for E2/E5; empty selects the default rule.
    pub nk: Vec<u32>,
    /// E3: oscillating variant with sign changes every `2^-k`.
    pub osc_k: Option<u32>,
    /// E3: `[2^-j-1, 2^-j)` split into `2^grade` cells instead of a uniform
    /// grid, so `D` can reach a few hundred.
    pub grade: Option<u32>,
    /// E6: ancestor degree (or dilation exponent) that must stay disjoint.
    pub separation: u32,
    /// E6: Lipschitz bumps instead of indicators.
    pub tilde: bool,
    /// E6 bumps: cells per interval are `2^depth`.
    pub depth: u32,
    /// Shuffled selection (E2/E5) or slot order (E6).
    pub seed: Option<u64>,
}

/// Caps keeping explicit constructions at desk scale.
pub const EXAMPLE_CUBE_BUDGET: u64 = 1 << 20;
pub const E6_PLACEMENT_BUDGET: u64 = 1 << 14;

impl ExampleSpec {
    pub fn default_for(id: ExampleId) -> ExampleSpec {
        let base = ExampleSpec {
            id,
            n: 1,
            p: 1.0,
            gamma: 0.0,
            alpha: None,
            truncation: 1,
            nk: Vec::new(),
            osc_k: None,
            grade: None,
            separation: 8,
            tilde: false,
            depth: 4,
            seed: None,
        };
        match id {
            ExampleId::E0 => base,
            ExampleId::E1 => ExampleSpec { gamma: 1.0, truncation: 3, ..base },
            ExampleId::E2 => ExampleSpec { gamma: 0.5, alpha: Some(0.5), truncation: 4, ..base },
            ExampleId::E3 => ExampleSpec { p: 2.0, gamma: 0.5, truncation: 10, ..base },
            ExampleId::E4 => ExampleSpec { n: 2, p: 2.0, gamma: 2.0, truncation: 8, ..base },
            ExampleId::E5 => ExampleSpec { p: 2.0, gamma: 0.5, truncation: 4, ..base },
            ExampleId::E6 => ExampleSpec { p: 2.0, gamma: 0.5, truncation: 4, ..base },
        }
    }

    /// Defaults overridden by `params` (keys `n p gamma alpha nk k sep
    /// tilde depth seed` and the truncation key of the family).
    pub fn from_params(id: ExampleId, params: &Params) -> Result<ExampleSpec> {
        let mut s = ExampleSpec::default_for(id);
        s.n = params.u32_or("n", s.n as u32)? as usize;
        if id == ExampleId::E4 && !params.contains("gamma") {
            s.gamma = s.n as f64;
        }
        s.p = params.f64_or("p", s.p)?;
        s.gamma = params.f64_or("gamma", s.gamma)?;
        if let Some(a) = params.opt_f64("alpha")? {
            s.alpha = Some(a);
        }
        let key = id.truncation_key();
        s.truncation = params.u32_or(key, params.u32_or("truncation", s.truncation)?)?;
        if let Some(v) = params.list::<u32>("nk")? {
            s.nk = v;
        }
        if let Some(k) = params.parse::<u32>("k")? {
            s.osc_k = Some(k);
        }
        if let Some(g) = params.parse::<u32>("grade")? {
            s.grade = Some(g);
        }
        s.separation = params.u32_or("sep", s.separation)?;
        s.tilde = params.bool_or("tilde", s.tilde)?;
        s.depth = params.u32_or("depth", s.depth)?;
        s.seed = params.opt_u64("seed")?;
        s.validate()?;
        Ok(s)
    }

    /// Echo of these settings as parameters.
    pub fn to_params(&self) -> Params {
        let mut p = Params::new()
            .with("example", self.id)
            .with("n", self.n)
            .with("p", self.p)
            .with("gamma", self.gamma)
            .with(self.id.truncation_key(), self.truncation);
        if let Some(a) = self.alpha {
            p.insert("alpha", a);
        }
        if !self.nk.is_empty() {
            p.insert("nk", self.nk.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
        }
        if let Some(k) = self.osc_k {
            p.insert("k", k);
        }
        if let Some(g) = self.grade {
            p.insert("grade", g);
        }
        if self.id == ExampleId::E6 {
            p.insert("sep", self.separation);
            p.insert("tilde", self.tilde);
            p.insert("depth", self.depth);
        }
        if let Some(s) = self.seed {
            p.insert("seed", s);
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let one_d = || if self.n == 1 { Ok(()) } else { param(format!("{} is one-dimensional (n=1)", self.id)) };
        if self.n == 0 || self.n > 3 {
            return param("dimension must be 1, 2 or 3");
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return param("alpha must lie in (0,1)");
            }
        }
        match self.id {
            ExampleId::E0 => Ok(()),
            ExampleId::E1 => {
                one_d()?;
                if self.p != 1.0 || self.gamma != 1.0 {
                    return param("E1 is defined for p = gamma = 1");
                }
                if !(1..=10).contains(&self.truncation) {
                    return param("E1 truncation N must lie in 1..=10");
                }
                Ok(())
            }
            ExampleId::E2 => {
                one_d()?;
                if self.p != 1.0 {
                    return param("E2 is defined for p = 1");
                }
                if !(self.gamma > 0.0 && self.gamma < 1.0) {
                    return param("E2 needs gamma in (0,1)");
                }
                if self.alpha.is_none() {
                    return param("E2 needs alpha in (0,1)");
                }
                if self.truncation == 0 {
                    return param("E2 truncation K must be at least 1");
                }
                let nk = self.depths()?;
                budget_check(&e2_numbers(self.gamma, &nk).0)
            }
            ExampleId::E3 => {
                one_d()?;
                if !(self.p > 1.0) {
                    return param("E3 needs p > 1");
                }
                if self.gamma == 1.0 {
                    return param("E3 needs gamma != 1");
                }
                match self.grade {
                    None if !(1..=20).contains(&self.truncation) => {
                        return param("E3 depth D must lie in 1..=20 (1..=400 with grade)");
                    }
                    Some(g) if !(1..=400).contains(&self.truncation) || g > 8 || self.osc_k.is_some() => {
                        return param("graded E3 needs D in 1..=400, grade <= 8 and no oscillating variant");
                    }
                    _ => {}
                }
                if let Some(k) = self.osc_k {
                    if self.gamma == 0.0 {
                        return param("the oscillating E3 variant needs gamma != 0");
                    }
                    if k <= 2 || k > self.truncation {
                        return param("the oscillating E3 variant needs 2 < k <= D");
                    }
                }
                Ok(())
            }
            ExampleId::E4 => {
                if !(self.p > 1.0) {
                    return param("E4 needs p > 1");
                }
                if self.gamma != self.n as f64 {
                    return param("E4 is defined for gamma = n");
                }
                if !(1..=40).contains(&self.truncation) {
                    return param("E4 truncation K must lie in 1..=40");
                }
                Ok(())
            }
            ExampleId::E5 => {
                if !(self.p > 1.0) {
                    return param("E5 needs p > 1");
                }
                if !(self.gamma > 0.0 && self.gamma < self.n as f64) {
                    return param("E5 needs 0 < gamma < n");
                }
                if self.truncation == 0 {
                    return param("E5 truncation K must be at least 1");
                }
                let nk = self.depths()?;
                budget_check(&e5_numbers(self.n, self.gamma, &nk).0)
            }
            ExampleId::E6 => {
                one_d()?;
                if !(self.p > 1.0) {
                    return param("E6 needs p > 1");
                }
                if !(self.gamma > 0.0) {
                    return param("E6 needs gamma > 0");
                }
                if !(1..=64).contains(&self.truncation) {
                    return param("E6 truncation M must lie in 1..=64");
                }
                if self.separation == 0 || self.separation > 24 {
                    return param("E6 separation must lie in 1..=24");
                }
                if self.depth < 2 || self.depth > 12 {
                    return param("E6 bump depth must lie in 2..=12");
                }
                let deepest = e6_layers(self.p, self.gamma, self.truncation).iter().map(|l| l.level).min().unwrap_or(0);
                if deepest < -900 {
                    return param("E6 interval lengths underflow at this M");
                }
                Ok(())
            }
        }
    }

    /// The depth sequence `n_1..n_K` (given or by the default rule).
    pub fn depths(&self) -> Result<Vec<u32>> {
        let k = self.truncation as usize;
        let nk = if self.nk.is_empty() {
            match self.id {
                ExampleId::E2 => default_e2_depths(self.gamma, k),
                ExampleId::E5 => default_e5_depths(self.n, self.gamma, k)?,
                _ => return param("depth sequences only apply to E2 and E5"),
            }
        } else {
            if self.nk.len() < k {
                return param(format!("nk lists {} depths but K = {k}", self.nk.len()));
            }
            self.nk[..k].to_vec()
        };
        if nk.iter().any(|&d| d == 0 || d > 40) {
            return param("depths n_k must lie in 1..=40");
        }
        let total: u32 = nk.iter().sum();
        if total > 900 {
            return param("total depth too large");
        }
        match self.id {
            ExampleId::E2 => {
                for (i, &d) in nk.iter().enumerate() {
                    let k = (i + 1) as f64;
                    if (d as f64) * (1.0 - self.gamma) < k - 1e-12 {
                        return param(format!("E2 needs 2^(n_k(1-gamma)) >= 2^k; fails at k={}", i + 1));
                    }
                }
            }
            ExampleId::E5 => {
                let n = self.n as f64;
                if !((nk[0] as f64) > n / self.gamma) {
                    return param("E5 needs n_1 > n/gamma");
                }
                for w in nk.windows(2) {
                    if w[1] <= w[0] {
                        return param("E5 needs an increasing depth sequence");
                    }
                }
                let (q, eps) = e5_numbers(self.n, self.gamma, &nk);
                for (i, (&qk, &e)) in q.iter().zip(&eps).enumerate() {
                    if e > pow2(-(i as i32 + 1)) {
                        return param(format!("E5 needs eps_k <= 2^-k; fails at k={}", i + 1));
                    }
                    let parents = (nk[i] as u64 - 1) * self.n as u64;
                    if parents < 63 && qk > (1u64 << parents) {
                        return param(format!("E5 needs q_k distinct parents at relative depth n_k-1; fails at k={}", i + 1));
                    }
                }
            }
            _ => {}
        }
        Ok(nk)
    }
}

fn budget_check(q: &[u64]) -> Result<()> {
    let mut total: u64 = 1;
    for &x in q {
        total = total.saturating_mul(x);
        if total > EXAMPLE_CUBE_BUDGET {
            return Err(Error::Budget(format!("the deepest collection would hold more than {EXAMPLE_CUBE_BUDGET} cubes")));
        }
    }
    Ok(())
}

/// `⌊2^x⌋` and the relative defect `{2^x}/2^x`.
fn floor_pow2(x: f64) -> (u64, f64) {
    let r = x.round();
    let v = if (x - r).abs() < 1e-12 { pow2(r as i32) } else { x.exp2() };
    let q = v.floor();
    (q as u64, (v - q) / v)
}

/// `q_k = ⌊2^{n_k(1-γ)}⌋` and `ε_k`.
pub fn e2_numbers(gamma: f64, nk: &[u32]) -> (Vec<u64>, Vec<f64>) {
    nk.iter().map(|&d| floor_pow2(d as f64 * (1.0 - gamma))).unzip()
}

/// `q_k = ⌊2^{n_k(n-γ)}⌋` and `ε_k`.
pub fn e5_numbers(n: usize, gamma: f64, nk: &[u32]) -> (Vec<u64>, Vec<f64>) {
    nk.iter().map(|&d| floor_pow2(d as f64 * (n as f64 - gamma))).unzip()
}

/// Smallest depths with `n_k (1-γ) >= k`.
pub fn default_e2_depths(gamma: f64, k: usize) -> Vec<u32> {
    (1..=k).map(|i| ((i as f64) / (1.0 - gamma) - 1e-12).ceil().max(1.0) as u32).collect()
}

/// Greedy increasing depths with `n_1 > n/γ`, `ε_k <= 2^-k` and room for
/// `q_k` distinct parents.
pub fn default_e5_depths(n: usize, gamma: f64, k: usize) -> Result<Vec<u32>> {
    let mut out: Vec<u32> = Vec::new();
    let mut d = ((n as f64 / gamma).floor() as u32) + 1;
    while out.len() < k {
        let i = out.len();
        let (q, e) = floor_pow2(d as f64 * (n as f64 - gamma));
        let parents = (d as u64 - 1) * n as u64;
        let room = parents >= 63 || q <= (1u64 << parents);
        if e <= pow2(-(i as i32 + 1)) && room && q >= 1 {
            out.push(d);
        }
        d += 1;
        if d > 40 {
            return param("no admissible E5 depth sequence below 40");
        }
    }
    Ok(out)
}

/// Nested collections `C_1 ⊃ C_2 ⊃ ...` of the E2/E5 constructions.
#[derive(Clone, Debug, PartialEq)]
pub struct NestedCollections {
    pub nk: Vec<u32>,
    pub q: Vec<u64>,
    pub eps: Vec<f64>,
    /// Partial sums `n_1 + ... + n_k`.
    pub s: Vec<u32>,
    pub layers: Vec<Vec<DyadicCube>>,
}

impl NestedCollections {
    /// `(1-ε_1)···(1-ε_k)` for each k.
    pub fn eps_products(&self) -> Vec<f64> {
        let mut acc = 1.0;
        self.eps.iter().map(|e| {
            acc *= 1.0 - e;
            acc
        })
        .collect()
    }
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// `count` distinct offsets in `0..range`: the first ones, or a seeded sample.
fn choose(range: u64, count: u64, rng: Option<&mut ChaCha8Rng>) -> Vec<u64> {
    match rng {
        None => (0..count).collect(),
        Some(r) => {
            let mut v: Vec<u64> = if range <= usize::MAX as u64 {
                sample(r, range as usize, count as usize).into_iter().map(|x| x as u64).collect()
            } else {
                unreachable!("ranges are bounded by the depth limits")
            };
            v.sort_unstable();
            v
        }
    }
}

/// Digits of `r` in base `2^d` across `n` coordinates, most significant first.
fn decode(mut r: u64, d: u32, n: usize) -> Vec<i64> {
    let mut out = vec![0i64; n];
    let base = 1u64 << d;
    for i in (0..n).rev() {
        out[i] = (r % base) as i64;
        r /= base;
    }
    out
}

pub fn e2_collections(spec: &ExampleSpec) -> Result<NestedCollections> {
    let nk = spec.depths()?;
    let (q, eps) = e2_numbers(spec.gamma, &nk);
    nested(&nk, q, eps, 1, false, spec.seed)
}

pub fn e5_collections(spec: &ExampleSpec) -> Result<NestedCollections> {
    let nk = spec.depths()?;
    let (q, eps) = e5_numbers(spec.n, spec.gamma, &nk);
    nested(&nk, q, eps, spec.n, true, spec.seed)
}

/// Without `via_parent`, `q_k` subcubes at relative depth `n_k`; with it,
/// `q_k` distinct parents at relative depth `n_k - 1` and child 0 of each.
fn nested(nk: &[u32], q: Vec<u64>, eps: Vec<f64>, n: usize, via_parent: bool, seed: Option<u64>) -> Result<NestedCollections> {
    budget_check(&q)?;
    let mut rng = seed.map(|s| rng_for(s, 0xC011));
    let mut layers: Vec<Vec<DyadicCube>> = Vec::new();
    let mut s = Vec::new();
    let mut prev = vec![DyadicCube::unit(n)];
    let mut acc = 0;
    for (k, &d) in nk.iter().enumerate() {
        acc += d;
        s.push(acc);
        let rel = if via_parent { d - 1 } else { d };
        let range_bits = rel as u64 * n as u64;
        if range_bits >= 48 && rng.is_some() {
            return param("seeded selection needs fewer than 2^48 candidates per cube");
        }
        let range = if range_bits >= 63 { u64::MAX } else { 1u64 << range_bits };
        if q[k] > range {
            return param(format!("cannot pick {} cubes among {range} at k={}", q[k], k + 1));
        }
        let mut next = Vec::with_capacity(prev.len() * q[k] as usize);
        for parent in &prev {
            for r in choose(range, q[k], rng.as_mut()) {
                let digits = decode(r, rel, n);
                let level = parent.level - rel as i32;
                let index: Vec<i64> = parent.index.iter().zip(&digits).map(|(&j, &x)| (j << rel) + x).collect();
                let c = DyadicCube::std(level, index);
                next.push(if via_parent { c.children()[0].clone() } else { c });
            }
        }
        layers.push(next.clone());
        prev = next;
    }
    Ok(NestedCollections { nk: nk.to_vec(), q, eps, s, layers })
}

/// Step function `Σ_k v_k Σ_{Q ∈ layer_k} χ_Q` for nested layers.
fn layered_function(root: &DyadicCube, layers: &[(Vec<DyadicCube>, f64)]) -> Result<StepFunction> {
    let mut add: HashMap<DyadicCube, f64> = HashMap::new();
    let mut split: HashSet<DyadicCube> = HashSet::new();
    for (cubes, v) in layers {
        for c in cubes {
            *add.entry(c.clone()).or_insert(0.0) += v;
            let mut a = c.clone();
            while a.level < root.level {
                a = a.parent();
                if !split.insert(a.clone()) {
                    break;
                }
            }
        }
    }
    let mut leaves = Vec::new();
    let mut stack = vec![(root.clone(), 0.0f64)];
    while let Some((c, mut acc)) = stack.pop() {
        if let Some(v) = add.get(&c) {
            acc += v;
        }
        if split.contains(&c) {
            for ch in c.children().into_iter().rev() {
                stack.push((ch, acc));
            }
        } else if acc != 0.0 {
            leaves.push((c, acc));
        }
    }
    StepFunction::from_leaves(root.clone(), leaves)
}

/// E0: the indicator of `[0,1)^n`.
pub fn e0_function(n: usize) -> Result<StepFunction> {
    StepFunction::constant(DyadicCube::unit(n), 1.0)
}

/// Value of the E1 truncation on `[2^{-i-1}, 2^{-i})`: `Σ_{j³ <= i} 2^{j³}/j²`.
fn e1_value(i: u32, big_n: u32) -> f64 {
    (1..=big_n).filter(|&j| j * j * j <= i).map(|j| pow2((j * j * j) as i32) / f64::from(j * j)).sum()
}

/// E1 at truncation N: `Σ_{j<=N} 2^{j³}/j² χ_{[0,2^{-j³})}` as a left spine.
pub fn e1_function(big_n: u32) -> Result<StepFunction> {
    let depth = big_n * big_n * big_n;
    let mut leaves: Vec<(DyadicCube, f64)> = (0..depth)
        .filter_map(|i| {
            let v = e1_value(i, big_n);
            (v != 0.0).then(|| (DyadicCube::std(-(i as i32) - 1, vec![1]), v))
        })
        .collect();
    let total: f64 = (1..=big_n).map(|j| pow2((j * j * j) as i32) / f64::from(j * j)).sum();
    leaves.push((DyadicCube::std(-(depth as i32), vec![0]), total));
    StepFunction::from_leaves(DyadicCube::unit(1), leaves)
}

/// One row of the exact E1 series at `λ_n = 1/n²`.
#[derive(Clone, Debug, PartialEq)]
pub struct E1Row {
    pub n: u32,
    /// Intervals of `D([0,1))` containing `[0, 2^{-n³})`.
    pub count: u64,
    pub lambda: BigRational,
    /// Smallest exact mean-value `a(f)_I` over those intervals.
    pub min_a: BigRational,
    /// `λ_n · count`.
    pub product: BigRational,
    pub all_exceed: bool,
    pub at_least_n: bool,
}

fn big_pow2(e: i64) -> BigRational {
    let one = BigInt::one();
    if e >= 0 {
        BigRational::from_integer(one << (e as usize))
    } else {
        BigRational::new(one.clone(), one << ((-e) as usize))
    }
}

/// Exact `a(f_N)_{[0,2^{-i})} = ∫_0^{2^{-i}} f_N` from the defining sum.
pub fn e1_exact_mean(i: u32, big_n: u32) -> BigRational {
    let mut s = BigRational::zero();
    for j in 1..=big_n {
        let c = i64::from(j * j * j);
        let jj = BigRational::from_integer(BigInt::from(j * j));
        let term = if c <= i64::from(i) { big_pow2(c - i64::from(i)) } else { BigRational::one() };
        s += term / jj;
    }
    s
}

/// Exact series `λ_n · #{I ⊇ [0,2^{-n³})}` for `n = 1..=N`.
pub fn e1_exact_series(big_n: u32) -> Vec<E1Row> {
    (1..=big_n)
        .map(|n| {
            let top = n * n * n;
            let lambda = BigRational::new(BigInt::one(), BigInt::from(n * n));
            let min_a = (0..=top).map(|i| e1_exact_mean(i, big_n)).min().expect("nonempty");
            let count = u64::from(top) + 1;
            let product = &lambda * BigRational::from_integer(BigInt::from(count));
            let all_exceed = min_a > lambda;
            let at_least_n = product >= BigRational::from_integer(BigInt::from(n));
            E1Row { n, count, lambda, min_a, product, all_exceed, at_least_n }
        })
        .collect()
}

/// E2: `Σ_k 2^{γ S_k}/k^{1+α} Σ_{I ∈ C_k} χ_I`.
pub fn e2_function(spec: &ExampleSpec) -> Result<(StepFunction, NestedCollections)> {
    let col = e2_collections(spec)?;
    let alpha = spec.alpha.unwrap_or(0.5);
    let layers: Vec<(Vec<DyadicCube>, f64)> = col
        .layers
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let k = (i + 1) as f64;
            (l.clone(), (spec.gamma * col.s[i] as f64).exp2() / k.powf(1.0 + alpha))
        })
        .collect();
    Ok((layered_function(&DyadicCube::unit(1), &layers)?, col))
}

/// E2 threshold `λ_k = ½ ∏_{l>=1}(1-2^{-l}) Σ_{i>=1} (k+i)^{-1-α}`.
pub fn e2_lambda(k: u32, alpha: f64) -> f64 {
    let mut prod = 1.0;
    for l in 1..64 {
        prod *= 1.0 - pow2(-l);
    }
    0.5 * prod * hurwitz_tail(f64::from(k) + 1.0, 1.0 + alpha)
}

/// `Σ_{i>=0} (a+i)^{-s}` for `s > 1` by direct summation plus an
/// Euler–Maclaurin remainder.
pub fn hurwitz_tail(a: f64, s: f64) -> f64 {
    let m = 2000.0;
    let mut sum = 0.0;
    let mut i = 0.0;
    while i < m {
        sum += (a + i).powf(-s);
        i += 1.0;
    }
    let x = a + m;
    sum + x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s) + s / 12.0 * x.powf(-s - 1.0)
}

/// E3: cell averages of `x^{-1/p} χ_[0,1)` at depth D, optionally with sign
/// `(-1)^m` on `[m 2^{-k}, (m+1) 2^{-k})`.
pub fn e3_function(p: f64, depth: u32, osc_k: Option<u32>) -> Result<StepFunction> {
    let pp = p / (p - 1.0);
    StepFunction::from_levels(DyadicCube::unit(1), depth, |c| {
        let (a, b) = c.bounds_f64(0);
        let avg = pp * (b.powf(1.0 / pp) - a.powf(1.0 / pp)) / (b - a);
        match osc_k {
            Some(k) => {
                let m = (a * pow2(k as i32)).floor() as i64;
                if m % 2 == 0 {
                    avg
                } else {
                    -avg
                }
            }
            None => avg,
        }
    })
}

fn e3_cell(pp: f64, c: &DyadicCube) -> (DyadicCube, f64) {
    let (a, b) = c.bounds_f64(0);
    (c.clone(), pp * (b.powf(1.0 / pp) - a.powf(1.0 / pp)) / (b - a))
}

/// `x^{-1/p}` on `[0,1)` with exact cell averages on `2^grade` cells per
/// interval `[2^{-j-1}, 2^{-j})`, `j < depth`, and one cell on `[0, 2^{-depth})`.
pub fn e3_graded(p: f64, depth: u32, grade: u32) -> Result<StepFunction> {
    let pp = p / (p - 1.0);
    let base = 1i64 << grade;
    let mut leaves = Vec::with_capacity(depth as usize * base as usize + 1);
    for j in 0..depth as i32 {
        for m in 0..base {
            leaves.push(e3_cell(pp, &DyadicCube::std(-j - 1 - grade as i32, vec![base + m])));
        }
    }
    leaves.push(e3_cell(pp, &DyadicCube::std(-(depth as i32), vec![0])));
    StepFunction::from_leaves(DyadicCube::unit(1), leaves)
}

/// E4 coefficient `c_k = k^{-α/p} 2^{kn/p}` (α = 0 for the plain family).
pub fn e4_coefficient(k: u32, n: usize, p: f64, alpha: Option<f64>) -> f64 {
    let base = (f64::from(k) * n as f64 / p).exp2();
    match alpha {
        Some(a) => base * f64::from(k).powf(-a / p),
        None => base,
    }
}

/// Oscillation over `[0,1)^n` of the untruncated plain E4 function.
pub fn e4_osc_unit(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let shell = 1.0 - pow2(-(n as i32));
    let mut mean = 0.0;
    let mut j = 1u32;
    loop {
        let t = (f64::from(j) * (nf / p - nf)).exp2();
        mean += t;
        if t < 1e-300 || j > 4000 {
            break;
        }
        j += 1;
    }
    let mut osc = 0.0;
    let mut v = 0.0;
    for k in 0..4000u32 {
        if k > 0 {
            v += e4_coefficient(k, n, p, None);
        }
        let mass = (-(f64::from(k) * nf)).exp2() * shell;
        let term = mass * (v - mean).abs();
        osc += term;
        if k > 8 && term < 1e-20 * osc {
            break;
        }
    }
    osc
}

/// `λ_{n,p} = (1-2^{-n}) 2^{-n} (2^{n/p} - 1) / 2`.
pub fn e4_lambda(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    (1.0 - (-nf).exp2()) * (-nf).exp2() * ((nf / p).exp2() - 1.0) / 2.0
}

/// E4 truncated after K terms; the plain family continues below `Q_K`
/// as a self-similar chain.
pub fn e4_function(spec: &ExampleSpec) -> Result<StepFunction> {
    let n = spec.n;
    let k_max = spec.truncation;
    let q = |k: u32| DyadicCube::std(-(k as i32), vec![0; n]);
    let mut leaves = Vec::new();
    let mut partial = 0.0;
    for k in 0..k_max {
        if k > 0 {
            partial += e4_coefficient(k, n, spec.p, spec.alpha);
        }
        let qk = q(k);
        let next = q(k + 1);
        if partial != 0.0 {
            for c in qk.children() {
                if c != next {
                    leaves.push((c, partial));
                }
            }
        }
    }
    partial += e4_coefficient(k_max, n, spec.p, spec.alpha);
    leaves.push((q(k_max), partial));
    let f = StepFunction::from_leaves(DyadicCube::unit(n), leaves)?;
    if spec.alpha.is_some() {
        return Ok(f);
    }
    let growth = (n as f64 / spec.p).exp2();
    let osc_start = (f64::from(k_max) * n as f64 / spec.p).exp2() * e4_osc_unit(n, spec.p);
    f.with_continuation(ChainContinuation { start: q(k_max), slot: 0, osc_start, osc_growth: growth })
}

/// E5: `Σ_k 2^{S_k γ/p} Σ_{Q ∈ C_k} χ_Q` (times `k^{-α/p}` for the variant).
pub fn e5_function(spec: &ExampleSpec) -> Result<(StepFunction, NestedCollections)> {
    let col = e5_collections(spec)?;
    let layers: Vec<(Vec<DyadicCube>, f64)> = col
        .layers
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let mut v = (col.s[i] as f64 * spec.gamma / spec.p).exp2();
            if let Some(a) = spec.alpha {
                v *= ((i + 1) as f64).powf(-a / spec.p);
            }
            (l.clone(), v)
        })
        .collect();
    Ok((layered_function(&DyadicCube::unit(spec.n), &layers)?, col))
}

/// One family of E6 intervals: `count` intervals at `level` carrying `value`.
#[derive(Clone, Debug, PartialEq)]
pub struct E6Layer {
    pub k: u32,
    pub count: f64,
    pub level: i32,
    pub value: f64,
}

impl E6Layer {
    pub fn length(&self) -> f64 {
        pow2(self.level)
    }
}

/// `N_k = ⌈2^{kp'/γ} k^{-p'}⌉`, `ℓ_k = 2^{-⌊kp'/γ⌋}`, `a = k^{p'-1}`.
pub fn e6_layers(p: f64, gamma: f64, m: u32) -> Vec<E6Layer> {
    let pp = p / (p - 1.0);
    (1..=m)
        .map(|k| {
            let kf = f64::from(k);
            let x = kf * pp / gamma;
            let xr = x.round();
            let fl = if (x - xr).abs() < 1e-9 { xr } else { x.floor() };
            let count = (x - pp * kf.log2()).exp2();
            let count = if (count - count.round()).abs() < 1e-9 * count.max(1.0) { count.round() } else { count.ceil() };
            E6Layer { k, count, level: -(fl as i32), value: kf.powf(pp - 1.0) }
        })
        .collect()
}

fn osc_params(spec: &ExampleSpec) -> Result<ProfileParams> {
    ProfileParams::new(spec.gamma, spec.gamma, spec.p, Kind::Osc)
}

/// Oscillation profile of `f_M` with intervals infinitely far apart: the
/// merge over k of `N_k` copies of the single-interval profile.
pub fn e6_far_profile(spec: &ExampleSpec) -> Result<LambdaProfile> {
    let params = osc_params(spec)?;
    let mut out = LambdaProfile::empty();
    for l in e6_layers(spec.p, spec.gamma, spec.truncation) {
        let f = StepFunction::constant(DyadicCube::std(l.level, vec![0]), l.value)?;
        let prof = build_profile(&Field::lebesgue(&f), &params, &LevelWindow::full())?;
        out = out.merge(&prof.scaled_weights(l.count));
    }
    Ok(out)
}

/// Profile of the data sequence `a_I ℓ(I)^{γ/p}` with weights `ℓ(I)^{1-γ}`.
pub fn e6_data_profile(spec: &ExampleSpec) -> LambdaProfile {
    let steps = e6_layers(spec.p, spec.gamma, spec.truncation)
        .iter()
        .map(|l| (l.value * l.length().powf(spec.gamma / spec.p), l.count * l.length().powf(1.0 - spec.gamma)))
        .collect();
    LambdaProfile::new(steps, Vec::new(), LevelWindow::full())
}

/// Exact weak-L^q norm of `f_M` and the lower bound
/// `m^{(p'-1)q} Σ_{m<k<=M} N_k ℓ_k` on its q-th power, `m = ⌊M/2⌋`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct E6Weak {
    pub weak_norm: f64,
    pub lower_bound_q: f64,
    pub m: u32,
}

pub fn e6_weak(spec: &ExampleSpec, q: f64) -> E6Weak {
    let layers = e6_layers(spec.p, spec.gamma, spec.truncation);
    let pp = spec.p / (spec.p - 1.0);
    let mut best: f64 = 0.0;
    for (i, l) in layers.iter().enumerate() {
        let mass: f64 = layers[i..].iter().map(|x| x.count * x.length()).sum();
        best = best.max(l.value * mass.powf(1.0 / q));
    }
    let m = spec.truncation / 2;
    let mass: f64 = layers.iter().filter(|l| l.k > m).map(|l| l.count * l.length()).sum();
    let lower = f64::from(m).powf((pp - 1.0) * q) * mass;
    E6Weak { weak_norm: best, lower_bound_q: lower, m }
}

/// Unit trapezoid on `I = [s, s+ℓ)`: 1 on the middle half, slope `2/ℓ`,
/// support `(s - ℓ/4, s + 5ℓ/4)`. Argument in units of ℓ from `s`.
pub fn trapezoid(u: f64) -> f64 {
    let d = if u < 0.25 {
        0.25 - u
    } else if u > 0.75 {
        u - 0.75
    } else {
        0.0
    };
    (1.0 - 2.0 * d).max(0.0)
}

/// Step approximation of a Lipschitz bump with the tracked error.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpApprox {
    pub f: StepFunction,
    /// `sup |approx - bump|`.
    pub sup_error: f64,
    /// Largest jump between adjacent cells divided by the cell size.
    pub lipschitz: f64,
    /// `2 ℓ^{-1} (1 + 2^{-depth})` times the amplitude.
    pub lipschitz_bound: f64,
}

/// Amplitude `a` bump on `I = [ℓ, 2ℓ)` with `ℓ = 2^level`, approximated by
/// cell averages on cells of length `ℓ 2^{-depth}` (`depth >= 2` keeps the
/// kinks on cell boundaries, so the averages are midpoint values).
pub fn tilde_bump(level: i32, a: f64, depth: u32) -> Result<BumpApprox> {
    if depth < 2 {
        return param("bump approximation depth must be at least 2");
    }
    let l = pow2(level);
    let h = pow2(-(depth as i32));
    let root = DyadicCube::std(level + 2, vec![0]);
    let mut sup_error: f64 = 0.0;
    let f = StepFunction::from_levels(root, depth + 2, |c| {
        let (x0, x1) = c.bounds_f64(0);
        let (u0, u1) = (x0 / l - 1.0, x1 / l - 1.0);
        let v = a * trapezoid(0.5 * (u0 + u1));
        sup_error = sup_error.max((v - a * trapezoid(u0)).abs()).max((v - a * trapezoid(u1)).abs());
        v
    })?;
    let leaves = f.leaves();
    let mut lip: f64 = 0.0;
    for w in leaves.windows(2) {
        lip = lip.max((w[1].1 - w[0].1).abs() / (h * l));
    }
    Ok(BumpApprox { f, sup_error, lipschitz: lip, lipschitz_bound: 2.0 * a.abs() / l * (1.0 + h) })
}

/// Per-lattice oscillation profiles of `f̃_M` with far-apart bumps.
pub fn e6_tilde_profiles(spec: &ExampleSpec) -> Result<Vec<(u32, LambdaProfile)>> {
    let params = osc_params(spec)?;
    let layers = e6_layers(spec.p, spec.gamma, spec.truncation);
    let mut bumps = Vec::new();
    for l in &layers {
        bumps.push((tilde_bump(l.level, l.value, spec.depth)?, l.count));
    }
    let mut out = Vec::new();
    for t in 0..crate::cube::lattice_count(1) {
        let mut prof = LambdaProfile::empty();
        for (b, count) in &bumps {
            let field = Field::lebesgue(&b.f);
            let single = build_lattice_profile(&field, t, &params, &LevelWindow::full())?;
            prof = prof.merge(&single.scaled_weights(*count));
        }
        out.push((t, prof));
    }
    Ok(out)
}

/// Explicit E6 placement with a separation certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct E6Placement {
    pub f: StepFunction,
    /// The intervals `I`, one per bump.
    pub intervals: Vec<DyadicCube>,
    pub slot_level: i32,
    pub certified: bool,
}

/// Places every interval at the middle of its own slot; slots of level
/// `max_k level_k + sep` (or `+ ⌈sep log2 5⌉ + 1` for bumps) keep the
/// `sep`-th ancestors (or the `5^sep` dilates) pairwise disjoint.
pub fn e6_placement(spec: &ExampleSpec) -> Result<E6Placement> {
    let layers = e6_layers(spec.p, spec.gamma, spec.truncation);
    let total: f64 = layers.iter().map(|l| l.count).sum();
    if total > E6_PLACEMENT_BUDGET as f64 {
        return Err(Error::Placement(format!(
            "{total} intervals at M = {} exceed the explicit placement budget {E6_PLACEMENT_BUDGET}",
            spec.truncation
        )));
    }
    let total = total as u64;
    let top = layers.iter().map(|l| l.level).max().unwrap_or(0);
    let bottom = layers.iter().map(|l| l.level).min().unwrap_or(0);
    let sep = spec.separation as i32;
    let extra = if spec.tilde { ((f64::from(spec.separation) * 5f64.log2()).ceil() as i32) + 1 } else { sep };
    let slot_level = top + extra;
    let slot_bits = 64 - (total.max(1) - 1).leading_zeros() as i32;
    let root_level = slot_level + slot_bits;
    if root_level - bottom + spec.depth as i32 > 120 {
        return Err(Error::Placement(format!("separation {} needs a tree deeper than 120 levels", spec.separation)));
    }
    let mut owners: Vec<usize> = Vec::new();
    for (i, l) in layers.iter().enumerate() {
        owners.extend(std::iter::repeat(i).take(l.count as usize));
    }
    if let Some(s) = spec.seed {
        owners.shuffle(&mut rng_for(s, 0xE6));
    }
    let root = DyadicCube::std(root_level, vec![0]);
    let mut leaves = Vec::new();
    let mut intervals = Vec::new();
    for (slot, &li) in owners.iter().enumerate() {
        let l = &layers[li];
        let shift = slot_level - l.level;
        let idx = ((slot as i64) << shift) + (1i64 << (shift - 1));
        let cube = DyadicCube::std(l.level, vec![idx]);
        if spec.tilde {
            let d = spec.depth;
            let len = pow2(l.level);
            let cells = 1i64 << d;
            let first = idx * cells - cells / 4;
            for c in 0..(cells + cells / 2) {
                let j = first + c;
                let cell = DyadicCube::std(l.level - d as i32, vec![j]);
                let (x0, x1) = cell.bounds_f64(0);
                let start = idx as f64 * len;
                let v = l.value * trapezoid((0.5 * (x0 + x1) - start) / len);
                if v != 0.0 {
                    leaves.push((cell, v));
                }
            }
        } else {
            leaves.push((cube.clone(), l.value));
        }
        intervals.push(cube);
    }
    let f = StepFunction::from_leaves(root, leaves)?;
    let certified = certify(&intervals, slot_level, spec.separation, spec.tilde);
    if !certified {
        return Err(Error::Placement("separation certificate failed".into()));
    }
    Ok(E6Placement { f, intervals, slot_level, certified })
}

/// Each interval's `sep`-th ancestor (or `5^sep` dilate) lies inside its own
/// slot, and the slots are distinct.
fn certify(intervals: &[DyadicCube], slot_level: i32, sep: u32, tilde: bool) -> bool {
    let mut slots = HashSet::new();
    for c in intervals {
        let slot = c.ancestor_at(slot_level);
        if !slots.insert(slot.clone()) {
            return false;
        }
        if tilde {
            // Half-length units of the interval: center 2j+1, radius 5^sep.
            let shift = (slot_level - c.level + 1) as u32;
            if shift >= 120 {
                return false;
            }
            let center = 2 * i128::from(c.index[0]) + 1;
            let radius = 5i128.pow(sep);
            let lo = i128::from(slot.index[0]) << shift;
            let hi = (i128::from(slot.index[0]) + 1) << shift;
            if center - radius < lo || center + radius > hi {
                return false;
            }
        } else if c.level + sep as i32 > slot_level || c.ancestor(sep).ancestor_at(slot_level) != slot {
            return false;
        }
    }
    true
}

/// Builds the step function of a spec. E6 is placed explicitly and fails
/// with a placement error beyond desk scale.
pub fn make_example(spec: &ExampleSpec) -> Result<StepFunction> {
    spec.validate()?;
    match spec.id {
        ExampleId::E0 => e0_function(spec.n),
        ExampleId::E1 => e1_function(spec.truncation),
        ExampleId::E2 => Ok(e2_function(spec)?.0),
        ExampleId::E3 => match spec.grade {
            Some(g) => e3_graded(spec.p, spec.truncation, g),
            None => e3_function(spec.p, spec.truncation, spec.osc_k),
        },
        ExampleId::E4 => e4_function(spec),
        ExampleId::E5 => Ok(e5_function(spec)?.0),
        ExampleId::E6 => Ok(e6_placement(spec)?.f),
    }
}

/// The norm each family is built to probe: `(kind, γ1, γ2, p)`.
pub fn natural_norm(spec: &ExampleSpec) -> (Kind, f64, f64, f64) {
    match spec.id {
        ExampleId::E0 | ExampleId::E1 | ExampleId::E2 => (Kind::Mean, spec.gamma, spec.gamma, spec.p),
        _ => (Kind::Osc, spec.gamma, spec.gamma, spec.p),
    }
}

/// Level window matching the family (`D([0,1))` for E1).
pub fn natural_window(spec: &ExampleSpec) -> LevelWindow {
    match spec.id {
        ExampleId::E1 => LevelWindow::within(DyadicCube::unit(1)),
        _ => LevelWindow::full(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::profile_sup;

    fn spec(id: ExampleId, kv: &[(&str, &str)]) -> ExampleSpec {
        let mut p = Params::new();
        for (k, v) in kv {
            p.insert(k, v);
        }
        ExampleSpec::from_params(id, &p).unwrap()
    }

    #[test]
    fn e1_is_a_sparse_spine() {
        let f = e1_function(3).unwrap();
        assert!(f.node_count() <= 4 * 27 + 4);
        let total: f64 = f.leaves().iter().map(|(c, v)| c.volume() * v).sum();
        let want = 1.0 + 0.25 + 1.0 / 9.0;
        assert!((total - want).abs() < 1e-12 * want);
    }

    #[test]
    fn e1_exact_rows() {
        for r in e1_exact_series(4) {
            assert!(r.all_exceed && r.at_least_n, "n = {}", r.n);
            let want = BigRational::new(BigInt::from(r.n * r.n * r.n + 1), BigInt::from(r.n * r.n));
            assert_eq!(r.product, want);
        }
    }

    #[test]
    fn e2_counting_identities() {
        let s = spec(ExampleId::E2, &[("K", "4")]);
        let col = e2_collections(&s).unwrap();
        let mut count = 1;
        for (k, layer) in col.layers.iter().enumerate() {
            count *= col.q[k];
            assert_eq!(layer.len() as u64, count);
            assert!(layer.iter().all(|c| c.level == -(col.s[k] as i32)));
            assert!(col.eps[k] <= pow2(-(k as i32 + 1)));
        }
    }

    #[test]
    fn e5_default_depths_and_parents() {
        let s = spec(ExampleId::E5, &[("K", "4")]);
        let col = e5_collections(&s).unwrap();
        assert_eq!(col.nk, vec![3, 4, 5, 6]);
        for layer in &col.layers {
            let parents: HashSet<DyadicCube> = layer.iter().map(|c| c.parent()).collect();
            assert_eq!(parents.len(), layer.len());
        }
    }

    #[test]
    fn e4_integral_and_divergence() {
        for n in [1usize, 2] {
            let s = spec(ExampleId::E4, &[("K", "6"), ("p", "2"), ("n", &n.to_string())]);
            let f = e4_function(&s).unwrap();
            let total: f64 = f.leaves().iter().map(|(c, v)| c.volume() * v).sum();
            let nf = n as f64;
            let want: f64 = (1..=6).map(|k| (k as f64 * (nf / 2.0 - nf)).exp2()).sum();
            assert!((total - want).abs() < 1e-12);
            let g = nf;
            let prof = crate::profile::build_osc_profile(&f, &crate::function::DyadicMeasure::lebesgue(), g, g, 2.0, &LevelWindow::full()).unwrap();
            assert!(prof.divergence.is_some());
        }
    }

    #[test]
    fn graded_e3_has_exact_integral() {
        let f = e3_graded(2.0, 40, 3).unwrap();
        let total: f64 = f.leaves().iter().map(|(c, v)| c.volume() * v).sum();
        assert!((total - 2.0).abs() < 1e-12);
        assert_eq!(f.leaf_count(), 40 * 8 + 1);
    }

    #[test]
    fn e0_diverges() {
        let f = e0_function(1).unwrap();
        let prof = crate::profile::build_mean_profile(&f, &crate::function::DyadicMeasure::lebesgue(), 0.0, 0.0, 1.0, &LevelWindow::full()).unwrap();
        assert!(prof.divergence.is_some());
        assert!(profile_sup(&prof, 1.0).value.is_infinite());
    }

    #[test]
    fn e6_layers_match_definition() {
        let l = e6_layers(2.0, 0.5, 3);
        assert_eq!(l[0].count, 16.0);
        assert_eq!(l[1].count, 64.0);
        assert_eq!(l[2].count, (4096.0f64 / 9.0).ceil());
        assert_eq!(l[2].level, -12);
        assert_eq!(l[2].value, 3.0);
    }

    #[test]
    fn e6_placement_certified_and_budgeted() {
        let s = spec(ExampleId::E6, &[("M", "2"), ("sep", "4")]);
        let pl = e6_placement(&s).unwrap();
        assert!(pl.certified);
        assert_eq!(pl.intervals.len(), 80);
        let big = spec(ExampleId::E6, &[("M", "5")]);
        assert!(matches!(e6_placement(&big), Err(Error::Placement(_))));
    }

    #[test]
    fn tilde_bump_properties() {
        let b = tilde_bump(-3, 1.0, 4).unwrap();
        assert!(b.lipschitz <= b.lipschitz_bound);
        assert!(b.sup_error <= pow2(-4) + 1e-15);
        // Value 1 on the middle half of I = [1/8, 2/8).
        assert_eq!(b.f.value_at(&[0.125 + 0.5 * 0.125]), 1.0);
    }

    #[test]
    fn specs_regenerate_identically() {
        for id in [ExampleId::E2, ExampleId::E5] {
            let s = ExampleSpec { seed: Some(7), ..ExampleSpec::default_for(id) };
            assert_eq!(make_example(&s).unwrap(), make_example(&s).unwrap());
        }
    }
}
