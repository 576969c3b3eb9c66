//! Strong and weak norms of step functions.

use crate::cube::{CubeCollection, DyadicCube};
use crate::error::{param, Error, Result};
use crate::exact::pow2;
use crate::function::{DyadicMeasure, Field, StepFunction};
use crate::profile::{build_profile, pow2f, profile_sup, Kind, LambdaProfile, LevelWindow, ProfileParams};
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    Truncated,
    Quadrature,
}

impl Exactness {
    pub fn name(self) -> &'static str {
        match self {
            Exactness::Exact => "exact",
            Exactness::Truncated => "truncated",
            Exactness::Quadrature => "quadrature",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormResult {
    pub norm: String,
    /// Possibly `+∞`.
    pub value: f64,
    pub exactness: Exactness,
    /// Optimal collection, or the cubes of a divergence witness.
    pub witness: Vec<DyadicCube>,
    /// λ at which a weak-type sup is realized.
    pub lambda: Option<f64>,
    pub error_bound: f64,
    pub notes: Vec<String>,
}

impl NormResult {
    fn new(norm: &str, value: f64) -> NormResult {
        NormResult {
            norm: norm.to_string(),
            value,
            exactness: Exactness::Exact,
            witness: Vec::new(),
            lambda: None,
            error_bound: 0.0,
            notes: Vec::new(),
        }
    }
}

fn check_p(p: f64, strict: bool) -> Result<()> {
    if !p.is_finite() || p < 1.0 || (strict && p <= 1.0) {
        let need = if strict { "p > 1" } else { "p >= 1" };
        return param(format!("{need} required, got p = {p}"));
    }
    Ok(())
}

/// `(|value|, mass)` pairs of the distribution of `f` under `mu`.
fn distribution(f: &StepFunction, mu: &DyadicMeasure) -> Result<Vec<(f64, f64)>> {
    let field = Field::new(f, mu)?;
    let mut d: Vec<(f64, f64)> = field.root_distribution().iter().map(|&(v, m)| (v.abs(), m)).filter(|x| x.0 > 0.0 && x.1 > 0.0).collect();
    d.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(d)
}

pub fn lp_norm(f: &StepFunction, mu: &DyadicMeasure, p: f64) -> Result<NormResult> {
    check_p(p, false)?;
    let s: f64 = distribution(f, mu)?.iter().map(|&(v, m)| v.powf(p) * m).sum();
    Ok(NormResult::new("lp", s.powf(1.0 / p)))
}

/// `max_v v μ(|f| >= v)^{1/p}` over the values of `|f|`.
pub fn weak_lp_norm(f: &StepFunction, mu: &DyadicMeasure, p: f64) -> Result<NormResult> {
    check_p(p, false)?;
    let d = distribution(f, mu)?;
    let mut acc = 0.0;
    let mut best = 0.0;
    let mut at = None;
    let mut i = 0;
    while i < d.len() {
        let v = d[i].0;
        while i < d.len() && d[i].0 == v {
            acc += d[i].1;
            i += 1;
        }
        let x = v * acc.powf(1.0 / p);
        if x > best {
            best = x;
            at = Some(v);
        }
    }
    let mut r = NormResult::new("weak_lp", best);
    r.lambda = at;
    Ok(r)
}

/// `(sup_λ λ^p Σ_{ℓ^{γ1/p}|x_Q| > λ} ℓ^{-γ2} μ(Q))^{1/p}` with `x_Q` the mean
/// or the oscillation of `f` on `Q`.
pub fn op_norm(
    f: &StepFunction,
    mu: &DyadicMeasure,
    p: f64,
    gamma1: f64,
    gamma2: f64,
    kind: Kind,
    window: &LevelWindow,
) -> Result<NormResult> {
    let params = ProfileParams::new(gamma1, gamma2, p, kind)?;
    let prof = build_profile(&Field::new(f, mu)?, &params, window)?;
    Ok(profile_norm(&prof, p, &format!("op_{}", kind.name())))
}

/// `profile_sup^{1/p}` packaged as a norm result.
pub fn profile_norm(prof: &LambdaProfile, p: f64, name: &str) -> NormResult {
    let s = profile_sup(prof, p);
    let mut r = NormResult::new(name, s.value.powf(1.0 / p));
    r.lambda = s.lambda;
    r.error_bound = if s.value > 0.0 && s.value.is_finite() {
        // Bound on the p-th root from the bound on the p-th power.
        (s.value + s.error_bound).powf(1.0 / p) - r.value
    } else {
        0.0
    };
    if let Some(d) = &prof.divergence {
        r.witness = d.cubes.clone();
        r.notes.push(d.reason.clone());
        r.lambda = Some(d.threshold);
    } else if let Some(reason) = s.reason {
        r.notes.push(reason);
    }
    if !prof.complete {
        // A witness already proves the value infinite; truncation elsewhere
        // cannot change it.
        if prof.divergence.is_none() {
            r.exactness = Exactness::Truncated;
        }
        r.notes.extend(prof.notes.iter().cloned());
    }
    r
}

/// Lebesgue field of `f` restricted to `q0`, rooted at `q0`.
fn local_field(f: &StepFunction, q0: &DyadicCube) -> Result<Field> {
    if q0.lattice != 0 || q0.dim() != f.dim() {
        return param("the reference cube must be a standard-lattice cube of the function's dimension");
    }
    Ok(Field::lebesgue(&f.restrict(q0)?))
}

/// Exact dyadic JN_p over antichains of subcubes of `q0`:
/// `(sup_P Σ |Q| O(f,Q)^p)^{1/p}`.
pub fn jnp_dyadic(f: &StepFunction, q0: &DyadicCube, p: f64) -> Result<NormResult> {
    check_p(p, true)?;
    let field = local_field(f, q0)?;
    let (best, wit) = jn_dp(&field, p);
    let mut r = NormResult::new("jnp_dyadic", best.powf(1.0 / p));
    r.witness = wit;
    Ok(r)
}

fn jn_dp(field: &Field, p: f64) -> (f64, Vec<DyadicCube>) {
    let nodes = field.nodes();
    let mut best = vec![0.0; nodes.len()];
    let mut own = vec![false; nodes.len()];
    // Children are stored after their parents.
    for i in (0..nodes.len()).rev() {
        let nd = &nodes[i];
        let mine = nd.cube.volume() * nd.osc.powf(p);
        let sub: f64 = field.children(i).map(|c| best[c]).sum();
        if mine > 0.0 && mine >= sub {
            best[i] = mine;
            own[i] = true;
        } else {
            best[i] = sub;
        }
    }
    let mut wit = Vec::new();
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        if own[i] {
            wit.push(nodes[i].cube.clone());
        } else if best[i] > 0.0 {
            stack.extend(field.children(i));
        }
    }
    wit.sort_by(DyadicCube::witness_order);
    (best[0], wit)
}

/// JN_p over antichains of all standard-lattice cubes: the local value on
/// the tree root combined with single ancestors of the root.
pub fn jnp_global(f: &StepFunction, p: f64) -> Result<NormResult> {
    check_p(p, true)?;
    let field = Field::lebesgue(f);
    let (local, wit) = jn_dp(&field, p);
    let mut best = local;
    let mut bw = wit;
    let mut a = field.root().clone();
    let mut prev = f64::INFINITY;
    for _ in 0..4096 {
        a = a.parent();
        let s = field.ancestor_stats(&a);
        let v = a.volume() * s.osc.powf(p);
        if v > best {
            best = v;
            bw = vec![a.clone()];
        }
        // |A| O(A)^p decays like |A|^{1-p} once A dwarfs the root.
        if v < prev && v < 1e-17 * best.max(f64::MIN_POSITIVE) {
            break;
        }
        prev = v;
    }
    let mut r = NormResult::new("jnp_global", best.powf(1.0 / p));
    r.witness = bw;
    Ok(r)
}

/// Default cap on the number of area units in the Garsia–Rodemich table.
pub const GARO_AREA_BUDGET: usize = 1 << 16;

/// Exact dyadic Garsia–Rodemich quantity over subcubes of `q0`:
/// `sup_P Σ|Q|O(f,Q) / (Σ|Q|)^{1/p'}`.
pub fn garo_dyadic(f: &StepFunction, q0: &DyadicCube, p: f64) -> Result<NormResult> {
    garo_dyadic_budget(f, q0, p, GARO_AREA_BUDGET)
}

pub fn garo_dyadic_budget(f: &StepFunction, q0: &DyadicCube, p: f64, budget: usize) -> Result<NormResult> {
    check_p(p, true)?;
    let field = local_field(f, q0)?;
    let n = field.dim();
    let finest = field.nodes().iter().map(|x| x.cube.level).min().unwrap_or(q0.level);
    let depth = (q0.level - finest) as u32;
    let units = 1u128 << (depth as u128 * n as u128).min(100);
    if units > budget as u128 {
        return Err(Error::Resolution(format!(
            "area table needs 2^{} units (budget {budget}); coarsen the function to depth {} or below",
            depth as usize * n,
            ((budget as f64).log2() / n as f64).floor()
        )));
    }
    let units = units as usize;
    let unit = q0.volume() / units as f64;
    let area = |i: usize| 1usize << ((field.node(i).cube.level - finest) as usize * n);
    let tables = garo_tables(&field, area);
    let root = &tables[0];
    let pp = p / (p - 1.0);
    let mut best = 0.0;
    let mut best_a = 0;
    for (a, &v) in root.iter().enumerate().skip(1) {
        if v > 0.0 {
            let x = v / ((a as f64) * unit).powf(1.0 / pp);
            if x > best {
                best = x;
                best_a = a;
            }
        }
    }
    let mut r = NormResult::new("garo_dyadic", best);
    if best_a > 0 {
        let mut wit = Vec::new();
        garo_witness(&field, &tables, &area, 0, best_a, &mut wit);
        wit.sort_by(DyadicCube::witness_order);
        r.witness = wit;
    }
    Ok(r)
}

const NEG: f64 = f64::NEG_INFINITY;

/// Max-plus merge of two area tables.
fn merge_tables(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![NEG; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == NEG {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y == NEG {
                continue;
            }
            let s = x + y;
            if s > out[i + j] {
                out[i + j] = s;
            }
        }
    }
    out
}

/// Per node: best `Σ|Q|O(f,Q)` over antichains in the subtree with total
/// area exactly `a` units (`-∞` when impossible).
fn garo_tables(field: &Field, area: impl Fn(usize) -> usize) -> Vec<Vec<f64>> {
    let nodes = field.nodes();
    let mut tables: Vec<Vec<f64>> = vec![Vec::new(); nodes.len()];
    for i in (0..nodes.len()).rev() {
        let mut t = vec![0.0];
        for c in field.children(i) {
            t = merge_tables(&t, &tables[c]);
        }
        let a = area(i);
        if t.len() < a + 1 {
            t.resize(a + 1, NEG);
        }
        let own = nodes[i].cube.volume() * nodes[i].osc;
        if own > 0.0 && own >= t[a] {
            t[a] = own;
        }
        // Trim trailing impossibles.
        while t.len() > 1 && *t.last().expect("nonempty") == NEG {
            t.pop();
        }
        tables[i] = t;
    }
    tables
}

fn garo_witness(field: &Field, tables: &[Vec<f64>], area: &impl Fn(usize) -> usize, i: usize, a: usize, out: &mut Vec<DyadicCube>) {
    if a == 0 {
        return;
    }
    let nd = field.node(i);
    let own = nd.cube.volume() * nd.osc;
    if a == area(i) && own > 0.0 && own == tables[i][a] {
        // Ties prefer the larger cube, matching the table construction.
        let kids: Vec<usize> = field.children(i).collect();
        let mut t = vec![0.0];
        for &c in &kids {
            t = merge_tables(&t, &tables[c]);
        }
        if t.get(a).map_or(true, |&x| own >= x) {
            out.push(nd.cube.clone());
            return;
        }
    }
    let kids: Vec<usize> = field.children(i).collect();
    // Prefix merges, then backtrack the split from the last child.
    let mut prefix = vec![vec![0.0]];
    for &c in &kids {
        let next = merge_tables(prefix.last().expect("nonempty"), &tables[c]);
        prefix.push(next);
    }
    let mut rem = a;
    for (k, &c) in kids.iter().enumerate().rev() {
        let want = prefix[k + 1][rem];
        let prev = &prefix[k];
        let tc = &tables[c];
        let mut found = None;
        for x in 0..tc.len().min(rem + 1) {
            if tc[x] == NEG || rem - x >= prev.len() || prev[rem - x] == NEG {
                continue;
            }
            if tc[x] + prev[rem - x] == want {
                found = Some(x);
                break;
            }
        }
        let x = found.expect("split exists");
        garo_witness(field, tables, area, c, x, out);
        rem -= x;
    }
}

/// Bi-parameter parameters: `a_R = ℓ_{α,β}(R)^{γ/p} ⨍_R f` and weights
/// `ℓ_{α',β'}(R)^{-γ} μ(R)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiparamParams {
    pub n: usize,
    pub p: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha2: f64,
    pub beta2: f64,
}

impl BiparamParams {
    pub fn validate(&self, dim: usize) -> Result<()> {
        check_p(self.p, true)?;
        if self.n == 0 || self.n >= dim {
            return param(format!("split {} must lie strictly between 0 and {dim}", self.n));
        }
        if !(self.gamma > 0.0) {
            return param("gamma must be positive");
        }
        if (self.alpha + self.beta - 1.0).abs() > 1e-12 || self.beta > 0.0 {
            return param(format!("need alpha + beta = 1 and beta <= 0, got ({}, {})", self.alpha, self.beta));
        }
        if (self.alpha2 + self.beta2 - 1.0).abs() > 1e-12 || !(0.0..1.0).contains(&self.alpha2) {
            return param(format!("need alpha' + beta' = 1 and 0 <= alpha' < 1, got ({}, {})", self.alpha2, self.beta2));
        }
        Ok(())
    }
}

/// `ℓ_min^a ℓ_max^b` from the two level exponents.
pub fn mean_sidelength_levels(k1: i32, k2: i32, a: f64, b: f64) -> f64 {
    let (lo, hi) = (k1.min(k2) as f64, k1.max(k2) as f64);
    pow2f(a * lo + b * hi)
}

/// Dense grid of `f` (and of the measure) at the finest leaf level inside
/// the root.
struct Grid {
    dim: usize,
    level: i32,
    origin: Vec<i64>,
    side: usize,
    /// Integral of f and μ-mass per cell.
    fint: Vec<f64>,
    mass: Vec<f64>,
}

const GRID_BUDGET: usize = 1 << 22;

impl Grid {
    fn new(f: &StepFunction, mu: &DyadicMeasure, level: Option<i32>) -> Result<Grid> {
        let field = Field::new(f, mu)?;
        let root = field.root().clone();
        let level = level.unwrap_or_else(|| field.nodes().iter().map(|x| x.cube.level).min().unwrap_or(root.level));
        let depth = (root.level - level) as usize;
        let dim = root.dim();
        let side = 1usize << depth;
        if depth * dim > 22 || side.pow(dim as u32) > GRID_BUDGET {
            return Err(Error::Budget(format!("dense grid of 2^{} cells exceeds the budget", depth * dim)));
        }
        let cells = side.pow(dim as u32);
        let mut fint = vec![0.0; cells];
        let mut mass = vec![0.0; cells];
        let origin: Vec<i64> = root.index.iter().map(|&j| j << depth).collect();
        for i in field.leaf_indices() {
            let nd = field.node(i);
            let k = (nd.cube.level - level).max(0) as usize;
            let span = 1usize << k;
            let base: Vec<usize> = (0..dim).map(|d| ((nd.cube.index[d] << k) - origin[d]) as usize).collect();
            let cell_mass = nd.density * pow2(level * dim as i32);
            let count = span.pow(dim as u32);
            for t in 0..count {
                let mut idx = 0usize;
                let mut r = t;
                for d in 0..dim {
                    let off = r % span;
                    r /= span;
                    idx = idx * side + base[d] + off;
                }
                mass[idx] = cell_mass;
                fint[idx] = cell_mass * nd.value;
            }
        }
        Ok(Grid { dim, level, origin, side, fint, mass })
    }

    /// Summed-area tables of the integral and mass, `(side+1)^dim` entries.
    fn prefix(&self) -> (Vec<f64>, Vec<f64>) {
        let s1 = self.side + 1;
        let total = s1.pow(self.dim as u32);
        let mut pf = vec![0.0; total];
        let mut pm = vec![0.0; total];
        for c in 0..self.fint.len() {
            let mut idx = 0usize;
            let mut r = c;
            let mut coords = vec![0usize; self.dim];
            for d in (0..self.dim).rev() {
                coords[d] = r % self.side;
                r /= self.side;
            }
            for &x in &coords {
                idx = idx * s1 + x + 1;
            }
            pf[idx] = self.fint[c];
            pm[idx] = self.mass[c];
        }
        for d in 0..self.dim {
            let stride = s1.pow((self.dim - 1 - d) as u32);
            for idx in 0..total {
                if (idx / stride) % s1 != 0 {
                    pf[idx] += pf[idx - stride];
                    pm[idx] += pm[idx - stride];
                }
            }
        }
        (pf, pm)
    }
}

/// Sum over a box `[lo, hi)` of cell coordinates via inclusion–exclusion.
fn box_sum(pre: &[f64], s1: usize, lo: &[usize], hi: &[usize]) -> f64 {
    let dim = lo.len();
    let mut total = 0.0;
    for mask in 0..(1usize << dim) {
        let mut idx = 0usize;
        let mut sign = 1.0;
        for d in 0..dim {
            let x = if mask >> d & 1 == 1 {
                sign = -sign;
                lo[d]
            } else {
                hi[d]
            };
            idx = idx * s1 + x;
        }
        total += sign * pre[idx];
    }
    total
}

/// Profile over dyadic rectangles `Q1 × Q2` with both levels in the window;
/// `squares_only` keeps `ℓ1 = ℓ2`.
pub fn biparam_profile(
    f: &StepFunction,
    mu: &DyadicMeasure,
    bp: &BiparamParams,
    window: &LevelWindow,
    squares_only: bool,
) -> Result<LambdaProfile> {
    let dim = f.dim();
    bp.validate(dim)?;
    if window.is_unbounded_below() || window.is_unbounded_above() {
        return param("rectangle profiles need a bounded level window");
    }
    let grid = Grid::new(f, mu, None)?;
    let (pf, pm) = grid.prefix();
    let s1 = grid.side + 1;
    let root_level = grid.level + (grid.side.trailing_zeros() as i32);
    let mut steps = Vec::new();
    let mut complete = true;
    let n = bp.n;
    // Per factor, the cell-coordinate ranges of the cubes meeting the root.
    let ranges = |k: i32, dims: std::ops::Range<usize>| -> Vec<(Vec<usize>, Vec<usize>, f64)> {
        let mut out = vec![(Vec::new(), Vec::new(), 1.0)];
        for _ in dims {
            let mut next = Vec::new();
            let span: Vec<(usize, usize, f64)> = if k <= root_level && k >= grid.level {
                let w = 1usize << (k - grid.level);
                (0..grid.side / w).map(|j| (j * w, (j + 1) * w, 1.0)).collect()
            } else if k > root_level {
                // One cube containing the root; its volume exceeds the root's.
                vec![(0, grid.side, pow2(k - root_level))]
            } else {
                Vec::new()
            };
            for (lo, hi, vol) in &out {
                for &(a, b, v) in &span {
                    let mut l = lo.clone();
                    let mut h = hi.clone();
                    l.push(a);
                    h.push(b);
                    next.push((l, h, vol * v));
                }
            }
            out = next;
        }
        out
    };
    let _ = &grid.origin;
    for k1 in window.k_min..=window.k_max {
        for k2 in window.k_min..=window.k_max {
            if squares_only && k1 != k2 {
                continue;
            }
            if k1 < grid.level || k2 < grid.level {
                // Below grid resolution: rectangles inside a cell.
                complete = false;
                continue;
            }
            let a_scale = mean_sidelength_levels(k1, k2, bp.alpha, bp.beta).powf(bp.gamma / bp.p);
            let w_scale = mean_sidelength_levels(k1, k2, bp.alpha2, bp.beta2).powf(-bp.gamma);
            let r1 = ranges(k1, 0..n);
            let r2 = ranges(k2, n..dim);
            for (l1, h1, v1) in &r1 {
                for (l2, h2, v2) in &r2 {
                    let lo: Vec<usize> = l1.iter().chain(l2.iter()).copied().collect();
                    let hi: Vec<usize> = h1.iter().chain(h2.iter()).copied().collect();
                    let fi = box_sum(&pf, s1, &lo, &hi);
                    let inner = box_sum(&pm, s1, &lo, &hi);
                    // Outside the root the measure is Lebesgue and f vanishes.
                    let inner_vol: f64 = (0..dim).map(|d| (hi[d] - lo[d]) as f64).product::<f64>() * pow2(grid.level * dim as i32);
                    let total_vol = inner_vol * v1 * v2;
                    let m = inner + (total_vol - inner_vol);
                    if m <= 0.0 || fi == 0.0 {
                        continue;
                    }
                    steps.push((a_scale * (fi / m).abs(), w_scale * m));
                }
            }
        }
    }
    let mut prof = LambdaProfile::new(steps, Vec::new(), window.clone());
    prof.complete = complete;
    if !complete {
        prof.notes.push("rectangles below the grid resolution are not enumerated".into());
    }
    Ok(prof)
}

pub fn biparam_weak_norm(
    f: &StepFunction,
    mu: &DyadicMeasure,
    bp: &BiparamParams,
    window: &LevelWindow,
) -> Result<NormResult> {
    let prof = biparam_profile(f, mu, bp, window, false)?;
    let mut r = profile_norm(&prof, bp.p, "biparam_weak");
    r.exactness = Exactness::Truncated;
    r.notes.push(format!("rectangle levels restricted to [{}, {}]", window.k_min, window.k_max));
    Ok(r)
}

/// `(lhs, rhs, lhs / rhs)` for `lhs = ‖Σ_Q ℓ(Q)^{-γ/q} χ_Q‖_{L^q(μ)}` and
/// `rhs = (Σ ℓ(Q)^{-γ} μ(Q))^{1/q}`, computed exactly over the cells of the
/// containment forest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

pub fn gfunction_check(c: &CubeCollection, gamma: f64, q: f64, mu: &DyadicMeasure) -> Result<GCheck> {
    if gamma == 0.0 || !gamma.is_finite() {
        return param("gamma must be nonzero");
    }
    if !(q > 1.0) || !q.is_finite() {
        return param("q must lie in (1, ∞)");
    }
    if c.is_empty() {
        return Ok(GCheck { lhs: 0.0, rhs: 0.0, ratio: 0.0 });
    }
    let cubes = c.cubes();
    if cubes.iter().any(|x| x.lattice != cubes[0].lattice) {
        return param("cube collection must lie in one lattice");
    }
    let mass_of = measure_fn(mu, cubes[0].dim())?;
    let mu_q: Vec<f64> = cubes.iter().map(|x| mass_of(x)).collect();
    let pos: HashMap<&DyadicCube, usize> = cubes.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let top = cubes.iter().map(|x| x.level).max().expect("nonempty");
    let mut parent = vec![usize::MAX; cubes.len()];
    for (i, x) in cubes.iter().enumerate() {
        let mut a = x.clone();
        while a.level < top {
            a = a.parent();
            if let Some(&j) = pos.get(&a) {
                parent[i] = j;
                break;
            }
        }
    }
    // g on Q minus its forest children = Σ over forest ancestors incl. Q.
    let mut order: Vec<usize> = (0..cubes.len()).collect();
    order.sort_by(|&a, &b| DyadicCube::witness_order(&cubes[a], &cubes[b]));
    let mut gval = vec![0.0; cubes.len()];
    let mut child_mass = vec![0.0; cubes.len()];
    for &i in &order {
        let own = pow2f(-(cubes[i].level as f64) * gamma / q);
        gval[i] = own + if parent[i] == usize::MAX { 0.0 } else { gval[parent[i]] };
        if parent[i] != usize::MAX {
            child_mass[parent[i]] += mu_q[i];
        }
    }
    let mut lhs_q = 0.0;
    let mut rhs_q = 0.0;
    for i in 0..cubes.len() {
        let cell = (mu_q[i] - child_mass[i]).max(0.0);
        lhs_q += gval[i].powf(q) * cell;
        rhs_q += pow2f(-(cubes[i].level as f64) * gamma) * mu_q[i];
    }
    let lhs = lhs_q.powf(1.0 / q);
    let rhs = rhs_q.powf(1.0 / q);
    Ok(GCheck { lhs, rhs, ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 } })
}

fn measure_fn(mu: &DyadicMeasure, n: usize) -> Result<impl Fn(&DyadicCube) -> f64> {
    let field = match mu.density() {
        Some(d) => {
            if d.dim() != n {
                return param("measure dimension mismatch");
            }
            Some(Field::new(&d.map(|_| 1.0), mu)?)
        }
        None => None,
    };
    Ok(move |q: &DyadicCube| match &field {
        Some(fl) => fl.stats_any(q).mass,
        None => q.volume(),
    })
}

/// Bi-parameter variant over rectangles `(Q1, Q2)` (Lebesgue):
/// `lhs = ‖Σ_R ℓ_{δ,ε}(R)^{-γ/q} χ_R‖_{L^q}`, `rhs = (Σ ℓ_{δ',ε'}(R)^{-γ}|R|)^{1/q}`.
pub fn gfunction_check_rect(
    rects: &[(DyadicCube, DyadicCube)],
    gamma: f64,
    q: f64,
    delta: f64,
    eps: f64,
    delta2: f64,
    eps2: f64,
) -> Result<GCheck> {
    if !(gamma > 0.0) || !(q > 1.0) {
        return param("need gamma > 0 and q > 1");
    }
    if (delta + eps - 1.0).abs() > 1e-12 || !(eps > 0.0) {
        return param("need delta + eps = 1 and eps > 0");
    }
    if (delta2 + eps2 - 1.0).abs() > 1e-12 || delta2 < 0.0 || !(eps2 > 0.0 && eps2 < eps) {
        return param("need delta' + eps' = 1, delta' >= 0 and 0 < eps' < eps");
    }
    if rects.is_empty() {
        return Ok(GCheck { lhs: 0.0, rhs: 0.0, ratio: 0.0 });
    }
    // Common grid: finest level per factor over the bounding box.
    let n1 = rects[0].0.dim();
    let n2 = rects[0].1.dim();
    let f1 = rects.iter().map(|r| r.0.level).min().expect("nonempty");
    let f2 = rects.iter().map(|r| r.1.level).min().expect("nonempty");
    let mut cells: HashMap<(Vec<i64>, Vec<i64>), f64> = HashMap::new();
    let mut rhs_q = 0.0;
    for (a, b) in rects {
        if a.lattice != 0 || b.lattice != 0 {
            return param("rectangles must be built from standard-lattice cubes");
        }
        let w = mean_sidelength_levels(a.level, b.level, delta, eps).powf(-gamma / q);
        rhs_q += mean_sidelength_levels(a.level, b.level, delta2, eps2).powf(-gamma) * a.volume() * b.volume();
        let s1 = 1i64 << (a.level - f1);
        let s2 = 1i64 << (b.level - f2);
        let c1 = (s1 as u64).pow(n1 as u32);
        let c2 = (s2 as u64).pow(n2 as u32);
        if c1.saturating_mul(c2) > GRID_BUDGET as u64 {
            return Err(Error::Budget("rectangle grid exceeds the budget".into()));
        }
        for t1 in 0..c1 {
            let i1: Vec<i64> = (0..n1).map(|d| a.index[d] * s1 + ((t1 / (s1 as u64).pow(d as u32)) % s1 as u64) as i64).collect();
            for t2 in 0..c2 {
                let i2: Vec<i64> = (0..n2).map(|d| b.index[d] * s2 + ((t2 / (s2 as u64).pow(d as u32)) % s2 as u64) as i64).collect();
                *cells.entry((i1.clone(), i2)).or_insert(0.0) += w;
            }
        }
    }
    let cell_vol = pow2(f1 * n1 as i32) * pow2(f2 * n2 as i32);
    let mut vals: Vec<f64> = cells.values().copied().collect();
    vals.sort_by(f64::total_cmp);
    let lhs_q: f64 = vals.iter().map(|g| g.powf(q) * cell_vol).sum();
    let lhs = lhs_q.powf(1.0 / q);
    let rhs = rhs_q.powf(1.0 / q);
    Ok(GCheck { lhs, rhs, ratio: lhs / rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c1(level: i32, j: i64) -> DyadicCube {
        DyadicCube::std(level, vec![j])
    }

    #[test]
    fn indicator_norms() {
        let f = StepFunction::constant(c1(0, 0), 1.0).unwrap();
        for p in [1.0, 1.5, 3.0] {
            assert_eq!(lp_norm(&f, &DyadicMeasure::lebesgue(), p).unwrap().value, 1.0);
            assert_eq!(weak_lp_norm(&f, &DyadicMeasure::lebesgue(), p).unwrap().value, 1.0);
        }
    }

    #[test]
    fn staircase_weak_norm() {
        let p = 2.0;
        let m = 6;
        let leaves = (0..=m).map(|k| (c1(-k - 1, 1), pow2f(k as f64 / p)));
        let f = StepFunction::from_leaves(c1(0, 0), leaves).unwrap();
        let w = weak_lp_norm(&f, &DyadicMeasure::lebesgue(), p).unwrap().value;
        assert!((w.powf(p) - (1.0 - pow2(-m - 1))).abs() < 1e-14);
    }

    #[test]
    fn garo_half_indicator() {
        let f = StepFunction::from_leaves(c1(0, 0), [(c1(-1, 0), 1.0)]).unwrap();
        let r = garo_dyadic(&f, &c1(0, 0), 2.0).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15);
        assert_eq!(r.witness, vec![c1(0, 0)]);
    }

    #[test]
    fn jn_constant_is_zero() {
        let f = StepFunction::constant(c1(0, 0), 3.0).unwrap();
        assert_eq!(jnp_dyadic(&f, &c1(0, 0), 2.0).unwrap().value, 0.0);
        assert!(jnp_dyadic(&f, &c1(0, 0), 1.0).is_err());
    }

    #[test]
    fn singleton_gfunction_is_equality() {
        let c = CubeCollection::new([c1(-2, 1)]).unwrap();
        let g = gfunction_check(&c, 0.7, 2.5, &DyadicMeasure::lebesgue()).unwrap();
        assert!((g.ratio - 1.0).abs() < 1e-14);
    }
}
