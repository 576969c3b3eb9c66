//! Adaptive dyadic step functions, step-density measures, and the
//! aggregated tree used to answer mean / oscillation queries.

use crate::cube::{unit_ball_volume, Ball, DyadicCube};
use crate::error::{param, Error, Result};
use crate::exact::pow2;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq)]
struct FNode {
    cube: DyadicCube,
    /// Index of the first of `2^n` contiguous children, 0 for a leaf.
    first_child: usize,
    value: f64,
}

/// Self-similar continuation of a nested chain below `start`: the cubes
/// `start ⊃ child ⊃ ...` (always descending into child number `slot`)
/// have oscillation `osc_start * osc_growth^r` at depth `r`, and every other
/// cube below `start` sees a constant.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainContinuation {
    pub start: DyadicCube,
    pub slot: usize,
    pub osc_start: f64,
    pub osc_growth: f64,
}

/// Piecewise-constant function on an adaptive `2^n`-ary tree rooted at a
/// standard-lattice cube; zero outside the root.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    n: usize,
    nodes: Vec<FNode>,
    continuation: Option<ChainContinuation>,
}

impl StepFunction {
    fn check_root(root: &DyadicCube) -> Result<()> {
        if root.lattice != 0 {
            return param("step-function roots must lie in the standard lattice");
        }
        Ok(())
    }

    pub fn constant(root: DyadicCube, value: f64) -> Result<StepFunction> {
        Self::check_root(&root)?;
        if !value.is_finite() {
            return param("leaf values must be finite");
        }
        let n = root.dim();
        Ok(StepFunction { n, nodes: vec![FNode { cube: root, first_child: 0, value }], continuation: None })
    }

    /// The zero function on `[0,1)^n`.
    pub fn zero(n: usize) -> StepFunction {
        StepFunction::constant(DyadicCube::unit(n), 0.0).expect("unit cube")
    }

    /// Top-down construction: `decide(cube)` returns `Some(value)` for a leaf
    /// or `None` to split.
    pub fn build(root: DyadicCube, mut decide: impl FnMut(&DyadicCube) -> Option<f64>) -> Result<StepFunction> {
        Self::check_root(&root)?;
        let n = root.dim();
        let mut sf = StepFunction { n, nodes: vec![FNode { cube: root, first_child: 0, value: 0.0 }], continuation: None };
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let cube = sf.nodes[i].cube.clone();
            match decide(&cube) {
                Some(v) => {
                    if !v.is_finite() {
                        return param("leaf values must be finite");
                    }
                    sf.nodes[i].value = v;
                }
                None => {
                    let first = sf.nodes.len();
                    sf.nodes[i].first_child = first;
                    for c in cube.children() {
                        sf.nodes.push(FNode { cube: c, first_child: 0, value: 0.0 });
                    }
                    stack.extend((first..first + (1 << n)).rev());
                }
            }
        }
        Ok(sf)
    }

    /// Uniform tree of the given depth below `root`.
    pub fn from_levels(root: DyadicCube, depth: u32, mut value: impl FnMut(&DyadicCube) -> f64) -> Result<StepFunction> {
        let bottom = root.level - depth as i32;
        StepFunction::build(root, |c| if c.level <= bottom { Some(value(c)) } else { None })
    }

    /// Sparse construction from disjoint leaf cubes inside `root`; uncovered
    /// parts of `root` take the value 0.
    pub fn from_leaves(root: DyadicCube, leaves: impl IntoIterator<Item = (DyadicCube, f64)>) -> Result<StepFunction> {
        let mut sf = StepFunction::constant(root, 0.0)?;
        let mut assigned = vec![false];
        for (cube, value) in leaves {
            if !value.is_finite() {
                return param("leaf values must be finite");
            }
            if cube.lattice != 0 || cube.dim() != sf.n || !sf.root().contains(&cube) {
                return param(format!("leaf {cube} is not a standard-lattice subcube of the root"));
            }
            let mut i = 0;
            while sf.nodes[i].cube != cube {
                if assigned[i] {
                    return param(format!("leaf {cube} overlaps an earlier leaf"));
                }
                if sf.nodes[i].first_child == 0 {
                    let first = sf.nodes.len();
                    let v = sf.nodes[i].value;
                    sf.nodes[i].first_child = first;
                    for c in sf.nodes[i].cube.children() {
                        sf.nodes.push(FNode { cube: c, first_child: 0, value: v });
                        assigned.push(false);
                    }
                }
                let slot = sf.nodes[i].cube.child_slot_towards(&cube);
                i = sf.nodes[i].first_child + slot;
            }
            if assigned[i] || sf.nodes[i].first_child != 0 {
                return param(format!("leaf {cube} overlaps an earlier leaf"));
            }
            sf.nodes[i].value = value;
            assigned[i] = true;
        }
        Ok(sf)
    }

    pub fn with_continuation(mut self, c: ChainContinuation) -> Result<StepFunction> {
        match self.locate_leaf_of(&c.start) {
            Some(_) => {
                self.continuation = Some(c);
                Ok(self)
            }
            None => param("continuation must start at a leaf of the tree"),
        }
    }

    pub fn continuation(&self) -> Option<&ChainContinuation> {
        self.continuation.as_ref()
    }

    fn locate_leaf_of(&self, q: &DyadicCube) -> Option<usize> {
        if !self.root().contains(q) {
            return None;
        }
        let mut i = 0;
        while self.nodes[i].cube != *q {
            if self.nodes[i].first_child == 0 {
                return None;
            }
            i = self.nodes[i].first_child + self.nodes[i].cube.child_slot_towards(q);
        }
        (self.nodes[i].first_child == 0).then_some(i)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> &DyadicCube {
        &self.nodes[0].cube
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|x| x.first_child == 0).count()
    }

    /// Leaves in depth-first order.
    pub fn leaves(&self) -> Vec<(DyadicCube, f64)> {
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let nd = &self.nodes[i];
            if nd.first_child == 0 {
                out.push((nd.cube.clone(), nd.value));
            } else {
                stack.extend((nd.first_child..nd.first_child + (1 << self.n)).rev());
            }
        }
        out
    }

    pub fn min_leaf_level(&self) -> i32 {
        self.nodes.iter().filter(|x| x.first_child == 0).map(|x| x.cube.level).min().unwrap_or(self.root().level)
    }

    pub fn is_zero(&self) -> bool {
        self.nodes.iter().all(|x| x.first_child != 0 || x.value == 0.0)
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        if !self.root().contains_point(x) {
            return 0.0;
        }
        let mut i = 0;
        while self.nodes[i].first_child != 0 {
            i = self.nodes[i].first_child + point_slot(&self.nodes[i].cube, x);
        }
        self.nodes[i].value
    }

    /// Same tree with every leaf value mapped.
    pub fn map(&self, mut g: impl FnMut(f64) -> f64) -> StepFunction {
        let mut out = self.clone();
        for nd in out.nodes.iter_mut().filter(|x| x.first_child == 0) {
            nd.value = g(nd.value);
        }
        out.continuation = None;
        out
    }

    pub fn scaled(&self, c: f64) -> StepFunction {
        let mut out = self.map(|v| c * v);
        if let Some(k) = &self.continuation {
            out.continuation = Some(ChainContinuation { osc_start: k.osc_start * c.abs(), ..k.clone() });
        }
        out
    }

    /// Split every leaf above `to_level` down to `to_level`.
    pub fn refine(&self, to_level: i32, node_budget: usize) -> Result<StepFunction> {
        let mut predicted = self.nodes.len() as f64;
        for nd in self.nodes.iter().filter(|x| x.first_child == 0) {
            let d = nd.cube.level - to_level;
            if d > 0 {
                let b = pow2(self.n as i32);
                predicted += (b.powi(d + 1) - b) / (b - 1.0);
            }
        }
        if predicted > node_budget as f64 {
            return Err(Error::Budget(format!("refining to level {to_level} needs about {predicted:.0} nodes, budget {node_budget}")));
        }
        let root = self.root().clone();
        let mut out = StepFunction::build(root, |c| {
            let i = self.find(c);
            let nd = &self.nodes[i];
            // Split where the tree splits and down to the target level.
            if (nd.cube == *c && nd.first_child != 0) || c.level > to_level {
                None
            } else {
                Some(nd.value)
            }
        })?;
        out.continuation = self.continuation.clone();
        Ok(out)
    }

    /// Deepest node containing `c` (`c` must lie inside the root).
    fn find(&self, c: &DyadicCube) -> usize {
        let mut i = 0;
        while self.nodes[i].cube != *c && self.nodes[i].first_child != 0 {
            i = self.nodes[i].first_child + self.nodes[i].cube.child_slot_towards(c);
        }
        i
    }

    /// The function restricted to `q0` (a standard-lattice cube), as a step
    /// function rooted at `q0`.
    pub fn restrict(&self, q0: &DyadicCube) -> Result<StepFunction> {
        StepFunction::check_root(q0)?;
        let root = self.root().clone();
        StepFunction::build(q0.clone(), |c| {
            if root.contains(c) {
                let i = self.find(c);
                let nd = &self.nodes[i];
                if nd.first_child == 0 {
                    Some(nd.value)
                } else {
                    None
                }
            } else if c.contains(&root) {
                None
            } else {
                Some(0.0)
            }
        })
    }
}

/// Child slot of a standard-lattice cube containing the point `x`.
fn point_slot(q: &DyadicCube, x: &[f64]) -> usize {
    let half = pow2(q.level - 1);
    (0..q.dim()).fold(0usize, |acc, i| {
        let mid = (q.index[i] as f64) * q.side() + half;
        (acc << 1) | usize::from(x[i] >= mid)
    })
}

/// Radon measure given by a nonnegative step density on a tree, Lebesgue
/// outside the density's root (or Lebesgue everywhere).
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicMeasure {
    density: Option<StepFunction>,
    pub ahlfors_d: Option<f64>,
    pub doubling: Option<f64>,
}

impl DyadicMeasure {
    pub fn lebesgue() -> DyadicMeasure {
        DyadicMeasure { density: None, ahlfors_d: None, doubling: None }
    }

    pub fn from_density(density: StepFunction) -> Result<DyadicMeasure> {
        if density.leaves().iter().any(|(_, d)| *d < 0.0) {
            return param("measure densities must be nonnegative");
        }
        Ok(DyadicMeasure { density: Some(density), ahlfors_d: None, doubling: None })
    }

    pub fn with_ahlfors(mut self, d: f64) -> DyadicMeasure {
        self.ahlfors_d = Some(d);
        self
    }

    pub fn with_doubling(mut self, c: f64) -> DyadicMeasure {
        self.doubling = Some(c);
        self
    }

    pub fn is_lebesgue(&self) -> bool {
        self.density.is_none()
    }

    /// Lebesgue measure is doubling; other measures need the explicit flag.
    pub fn is_doubling(&self) -> bool {
        self.density.is_none() || self.doubling.is_some()
    }

    pub fn density(&self) -> Option<&StepFunction> {
        self.density.as_ref()
    }
}

/// Aggregates for one node of the common refinement of `f` and `mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldNode {
    pub cube: DyadicCube,
    pub first_child: usize,
    pub mass: f64,
    pub integral: f64,
    pub abs_integral: f64,
    pub mean: f64,
    pub osc: f64,
    /// Leaf value and density (meaningful on leaves).
    pub value: f64,
    pub density: f64,
}

impl FieldNode {
    pub fn is_leaf(&self) -> bool {
        self.first_child == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubeStats {
    pub mass: f64,
    pub mean: f64,
    pub osc: f64,
}

/// Where a standard-lattice cube sits relative to the field tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    Node(usize),
    InsideLeaf(usize),
    Above,
    Disjoint,
}

/// Common refinement of a step function and a measure with per-node mass,
/// integral, mean and oscillation.
#[derive(Clone, Debug)]
pub struct Field {
    n: usize,
    nodes: Vec<FieldNode>,
    /// Sorted `(value, mass)` distribution of the root.
    root_dist: Vec<(f64, f64)>,
    continuation: Option<ChainContinuation>,
}

#[derive(Clone, Copy)]
enum Loc {
    Node(usize),
    Above,
    Const(f64),
}

fn loc_const(sf: &StepFunction, l: Loc) -> Option<f64> {
    match l {
        Loc::Const(v) => Some(v),
        Loc::Node(i) if sf.nodes[i].first_child == 0 => Some(sf.nodes[i].value),
        _ => None,
    }
}

fn loc_child(sf: &StepFunction, l: Loc, child: &DyadicCube, slot: usize) -> Loc {
    match l {
        Loc::Const(v) => Loc::Const(v),
        Loc::Node(i) => {
            let nd = &sf.nodes[i];
            if nd.first_child == 0 {
                Loc::Const(nd.value)
            } else {
                Loc::Node(nd.first_child + slot)
            }
        }
        Loc::Above => {
            if *child == *sf.root() {
                Loc::Node(0)
            } else if child.contains(sf.root()) {
                Loc::Above
            } else {
                Loc::Const(0.0)
            }
        }
    }
}

fn initial_loc(sf: &StepFunction, r: &DyadicCube) -> Loc {
    if sf.root() == r {
        Loc::Node(0)
    } else {
        Loc::Above
    }
}

/// Smallest standard-lattice cube containing both cubes.
pub fn common_ancestor(a: &DyadicCube, b: &DyadicCube) -> DyadicCube {
    let mut x = a.ancestor_at(a.level.max(b.level));
    let mut y = b.ancestor_at(a.level.max(b.level));
    while x != y {
        x = x.parent();
        y = y.parent();
    }
    x
}

/// Sort by value and merge equal values.
fn normalize_dist(mut d: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    d.retain(|&(_, w)| w > 0.0);
    d.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(d.len());
    for (v, w) in d {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => out.push((v, w)),
        }
    }
    out
}

/// Mean and oscillation of a value distribution of total mass `mass`
/// whose integral is `integral`.
fn dist_stats(dist: &[(f64, f64)], mass: f64, integral: f64) -> CubeStats {
    if mass <= 0.0 {
        return CubeStats { mass: 0.0, mean: 0.0, osc: 0.0 };
    }
    let distinct = dist.iter().filter(|x| x.1 > 0.0).count();
    if distinct <= 1 {
        let v = dist.iter().find(|x| x.1 > 0.0).map_or(0.0, |x| x.0);
        return CubeStats { mass, mean: v, osc: 0.0 };
    }
    let mean = integral / mass;
    let dev: f64 = dist.iter().map(|&(v, w)| w * (v - mean).abs()).sum();
    CubeStats { mass, mean, osc: dev / mass }
}

fn stats_from_pairs(pairs: Vec<(f64, f64)>) -> CubeStats {
    let d = normalize_dist(pairs);
    let mass: f64 = d.iter().map(|x| x.1).sum();
    let integral: f64 = d.iter().map(|x| x.0 * x.1).sum();
    dist_stats(&d, mass, integral)
}

impl Field {
    pub fn new(f: &StepFunction, mu: &DyadicMeasure) -> Result<Field> {
        let n = f.dim();
        let root = match &mu.density {
            None => f.root().clone(),
            Some(d) => {
                if d.dim() != n {
                    return param("measure and function dimensions differ");
                }
                common_ancestor(f.root(), d.root())
            }
        };
        let unit = StepFunction::constant(root.clone(), 1.0)?;
        let dens = mu.density.as_ref().unwrap_or(&unit);
        let mut field = Field { n, nodes: Vec::new(), root_dist: Vec::new(), continuation: f.continuation.clone() };
        field.nodes.push(FieldNode::placeholder(root.clone()));
        let fl = initial_loc(f, &root);
        let ml = initial_loc(dens, &root);
        let dist = field.fill(0, f, dens, fl, ml);
        field.root_dist = dist;
        Ok(field)
    }

    /// Lebesgue-measure field of `f`.
    pub fn lebesgue(f: &StepFunction) -> Field {
        Field::new(f, &DyadicMeasure::lebesgue()).expect("lebesgue field")
    }

    fn fill(&mut self, idx: usize, f: &StepFunction, dens: &StepFunction, fl: Loc, ml: Loc) -> Vec<(f64, f64)> {
        let cube = self.nodes[idx].cube.clone();
        if let (Some(v), Some(d)) = (loc_const(f, fl), loc_const(dens, ml)) {
            let mass = d * cube.volume();
            let nd = &mut self.nodes[idx];
            nd.mass = mass;
            nd.integral = v * mass;
            nd.abs_integral = v.abs() * mass;
            nd.mean = if mass > 0.0 { v } else { 0.0 };
            nd.osc = 0.0;
            nd.value = v;
            nd.density = d;
            return if mass > 0.0 { vec![(v, mass)] } else { Vec::new() };
        }
        let kids = cube.children();
        let first = self.nodes.len();
        self.nodes[idx].first_child = first;
        for c in &kids {
            self.nodes.push(FieldNode::placeholder(c.clone()));
        }
        let mut dist = Vec::new();
        let (mut mass, mut integral, mut abs_integral) = (0.0, 0.0, 0.0);
        for (slot, c) in kids.iter().enumerate() {
            let d = self.fill(first + slot, f, dens, loc_child(f, fl, c, slot), loc_child(dens, ml, c, slot));
            let ch = &self.nodes[first + slot];
            mass += ch.mass;
            integral += ch.integral;
            abs_integral += ch.abs_integral;
            dist.extend(d);
        }
        let dist = normalize_dist(dist);
        let s = dist_stats(&dist, mass, integral);
        let nd = &mut self.nodes[idx];
        nd.mass = mass;
        nd.integral = integral;
        nd.abs_integral = abs_integral;
        nd.mean = s.mean;
        nd.osc = s.osc;
        dist
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> &DyadicCube {
        &self.nodes[0].cube
    }

    pub fn nodes(&self) -> &[FieldNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &FieldNode {
        &self.nodes[i]
    }

    pub fn children(&self, i: usize) -> std::ops::Range<usize> {
        let fc = self.nodes[i].first_child;
        if fc == 0 {
            0..0
        } else {
            fc..fc + (1 << self.n)
        }
    }

    pub fn continuation(&self) -> Option<&ChainContinuation> {
        self.continuation.as_ref()
    }

    /// Sorted `(value, mass)` distribution on the root.
    pub fn root_distribution(&self) -> &[(f64, f64)] {
        &self.root_dist
    }

    pub fn leaf_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if self.nodes[i].is_leaf() {
                out.push(i);
            } else {
                stack.extend(self.children(i).rev());
            }
        }
        out
    }

    pub fn total_integral(&self) -> f64 {
        self.nodes[0].integral
    }

    pub fn locate(&self, q: &DyadicCube) -> Placement {
        debug_assert_eq!(q.lattice, 0);
        let r = self.root();
        if q.level > r.level {
            return if q.contains(r) { Placement::Above } else { Placement::Disjoint };
        }
        if !r.contains(q) {
            return Placement::Disjoint;
        }
        let mut i = 0;
        loop {
            let nd = &self.nodes[i];
            if nd.cube == *q {
                return Placement::Node(i);
            }
            if nd.is_leaf() {
                return Placement::InsideLeaf(i);
            }
            i = nd.first_child + nd.cube.child_slot_towards(q);
        }
    }

    /// Mass, mean and oscillation of an ancestor `q` of the root.
    pub fn ancestor_stats(&self, q: &DyadicCube) -> CubeStats {
        let r = &self.nodes[0];
        let outside = q.volume() - r.cube.volume();
        let mass = r.mass + outside;
        if mass <= 0.0 {
            return CubeStats { mass: 0.0, mean: 0.0, osc: 0.0 };
        }
        let mean = r.integral / mass;
        if r.integral == 0.0 && self.root_dist.iter().all(|x| x.0 == 0.0) {
            return CubeStats { mass, mean: 0.0, osc: 0.0 };
        }
        let dev: f64 = self.root_dist.iter().map(|&(v, w)| w * (v - mean).abs()).sum::<f64>() + outside * mean.abs();
        CubeStats { mass, mean, osc: dev / mass }
    }

    /// Statistics of any cube (any lattice) under the measure.
    pub fn stats(&self, q: &DyadicCube) -> CubeStats {
        if q.lattice != 0 {
            return self.stats_any(q);
        }
        match self.locate(q) {
            Placement::Node(i) => {
                let nd = &self.nodes[i];
                CubeStats { mass: nd.mass, mean: nd.mean, osc: nd.osc }
            }
            Placement::InsideLeaf(i) => {
                let nd = &self.nodes[i];
                let mass = nd.density * q.volume();
                CubeStats { mass, mean: if mass > 0.0 { nd.value } else { 0.0 }, osc: 0.0 }
            }
            Placement::Above => self.ancestor_stats(q),
            Placement::Disjoint => CubeStats { mass: q.volume(), mean: 0.0, osc: 0.0 },
        }
    }

    /// Exact-overlap statistics for a cube of any lattice.
    pub fn stats_any(&self, q: &DyadicCube) -> CubeStats {
        let mut pairs = Vec::new();
        let inside = self.collect_overlap(q, &mut pairs);
        let outside = q.volume() - inside;
        if outside > 0.0 {
            pairs.push((0.0, outside));
        }
        stats_from_pairs(pairs)
    }

    /// Push `(value, mass)` for every leaf overlapping `q`; returns the
    /// Lebesgue volume of `q ∩ root`.
    fn collect_overlap(&self, q: &DyadicCube, pairs: &mut Vec<(f64, f64)>) -> f64 {
        let root_overlap = q.overlap_volume(self.root());
        if root_overlap == 0.0 {
            return 0.0;
        }
        let mut stack = vec![(0usize, root_overlap)];
        while let Some((i, ov)) = stack.pop() {
            let nd = &self.nodes[i];
            if nd.is_leaf() {
                pairs.push((nd.value, nd.density * ov));
                continue;
            }
            for c in self.children(i) {
                let o = q.overlap_volume(&self.nodes[c].cube);
                if o > 0.0 {
                    stack.push((c, o));
                }
            }
        }
        root_overlap
    }

    /// Value and density at a point.
    pub fn value_density_at(&self, x: &[f64]) -> (f64, f64) {
        if !self.root().contains_point(x) {
            return (0.0, 1.0);
        }
        let mut i = 0;
        while !self.nodes[i].is_leaf() {
            i = self.nodes[i].first_child + point_slot(&self.nodes[i].cube, x);
        }
        (self.nodes[i].value, self.nodes[i].density)
    }

    /// Mean and oscillation over a ball: exact interval overlap in 1-D,
    /// midpoint quadrature with step halving otherwise.
    pub fn ball_stats(&self, b: &Ball, tol: f64, max_samples: usize) -> Result<BallStats> {
        if b.dim() != self.n {
            return param("ball dimension does not match the function");
        }
        if self.n == 1 {
            return Ok(self.interval_stats(b.center[0] - b.radius, b.center[0] + b.radius));
        }
        let mut m = 8usize;
        let mut prev: Option<CubeStats> = None;
        loop {
            if m.checked_pow(self.n as u32).map_or(true, |s| s > max_samples) {
                return Err(Error::Accuracy(format!(
                    "ball quadrature did not reach tolerance {tol:e} within {max_samples} samples"
                )));
            }
            let cur = self.ball_quadrature(b, m);
            if let Some(p) = prev {
                let err = (cur.mean - p.mean).abs().max((cur.osc - p.osc).abs());
                if err <= tol {
                    return Ok(BallStats { mass: cur.mass, mean: cur.mean, osc: cur.osc, error_bound: err, exact: false });
                }
            }
            prev = Some(cur);
            m *= 2;
        }
    }

    fn ball_quadrature(&self, b: &Ball, m: usize) -> CubeStats {
        let n = self.n;
        let h = 2.0 * b.radius / m as f64;
        let cell = h.powi(n as i32);
        let r2 = b.radius * b.radius;
        let mut pairs = Vec::new();
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        loop {
            let mut d2 = 0.0;
            for i in 0..n {
                let off = -b.radius + (idx[i] as f64 + 0.5) * h;
                x[i] = b.center[i] + off;
                d2 += off * off;
            }
            if d2 < r2 {
                let (v, d) = self.value_density_at(&x);
                pairs.push((v, d * cell));
            }
            let mut i = 0;
            while i < n {
                idx[i] += 1;
                if idx[i] < m {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        stats_from_pairs(pairs)
    }

    /// Exact statistics over the 1-D interval `[a, b)`.
    pub fn interval_stats(&self, a: f64, b: f64) -> BallStats {
        let mut pairs = Vec::new();
        let (r0, r1) = self.root().bounds_f64(0);
        let inside = (b.min(r1) - a.max(r0)).max(0.0);
        if inside > 0.0 {
            let mut stack = vec![0usize];
            while let Some(i) = stack.pop() {
                let nd = &self.nodes[i];
                let (lo, hi) = nd.cube.bounds_f64(0);
                let ov = b.min(hi) - a.max(lo);
                if ov <= 0.0 {
                    continue;
                }
                if nd.is_leaf() {
                    pairs.push((nd.value, nd.density * ov));
                } else {
                    stack.extend(self.children(i));
                }
            }
        }
        let outside = (b - a) - inside;
        if outside > 0.0 {
            pairs.push((0.0, outside));
        }
        let s = stats_from_pairs(pairs);
        BallStats { mass: s.mass, mean: s.mean, osc: s.osc, error_bound: 0.0, exact: true }
    }
}

impl FieldNode {
    fn placeholder(cube: DyadicCube) -> FieldNode {
        FieldNode { cube, first_child: 0, mass: 0.0, integral: 0.0, abs_integral: 0.0, mean: 0.0, osc: 0.0, value: 0.0, density: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallStats {
    pub mass: f64,
    pub mean: f64,
    pub osc: f64,
    pub error_bound: f64,
    pub exact: bool,
}

/// `f_Q` under `mu` (0 when `mu(Q) = 0`).
pub fn mean(f: &StepFunction, q: &DyadicCube, mu: &DyadicMeasure) -> Result<f64> {
    Ok(Field::new(f, mu)?.stats(q).mean)
}

/// `O(f, Q)` under `mu` (0 when `mu(Q) = 0`).
pub fn oscillation(f: &StepFunction, q: &DyadicCube, mu: &DyadicMeasure) -> Result<f64> {
    Ok(Field::new(f, mu)?.stats(q).osc)
}

pub fn ball_mean(f: &StepFunction, b: &Ball, mu: &DyadicMeasure, tol: f64) -> Result<BallStats> {
    Field::new(f, mu)?.ball_stats(b, tol, 1 << 24)
}

pub fn ball_oscillation(f: &StepFunction, b: &Ball, mu: &DyadicMeasure, tol: f64) -> Result<BallStats> {
    ball_mean(f, b, mu, tol)
}

/// Volume of a Euclidean ball.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    unit_ball_volume(n) * r.powi(n as i32)
}

/// Continuous piecewise-linear `F = anchor + ∫ g` on the line, constant
/// outside the support of the derivative `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear1D {
    derivative: StepFunction,
    anchor: f64,
    /// Knots `x_0 < x_1 < ...` with `F(x_i)`.
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear1D {
    pub fn new(derivative: StepFunction, anchor: f64) -> Result<PiecewiseLinear1D> {
        if derivative.dim() != 1 {
            return param("piecewise-linear functions are one-dimensional");
        }
        let mut leaves = derivative.leaves();
        leaves.sort_by(|a, b| a.0.bounds_f64(0).0.total_cmp(&b.0.bounds_f64(0).0));
        let mut knots = Vec::with_capacity(leaves.len() + 1);
        let mut y = anchor;
        knots.push((leaves[0].0.bounds_f64(0).0, y));
        for (c, s) in &leaves {
            let (lo, hi) = c.bounds_f64(0);
            y += s * (hi - lo);
            knots.push((hi, y));
        }
        Ok(PiecewiseLinear1D { derivative, anchor, knots })
    }

    pub fn derivative(&self) -> &StepFunction {
        &self.derivative
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let k = &self.knots;
        if x <= k[0].0 {
            return k[0].1;
        }
        if x >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let i = k.partition_point(|p| p.0 <= x) - 1;
        let (x0, y0) = k[i];
        let (x1, y1) = k[i + 1];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Linear pieces `(length, F(start), F(end))` covering `[a, b)`.
    fn pieces(&self, a: f64, b: f64) -> Vec<(f64, f64, f64)> {
        let mut cuts = vec![a];
        cuts.extend(self.knots.iter().map(|k| k.0).filter(|&x| x > a && x < b));
        cuts.push(b);
        cuts.windows(2).map(|w| (w[1] - w[0], self.value_at(w[0]), self.value_at(w[1]))).collect()
    }

    /// Exact Lebesgue mean and oscillation over `[a, b)`.
    pub fn interval_stats(&self, a: f64, b: f64) -> CubeStats {
        let ps = self.pieces(a, b);
        let len = b - a;
        let mean = ps.iter().map(|&(l, y0, y1)| 0.5 * (y0 + y1) * l).sum::<f64>() / len;
        let mut dev = 0.0;
        for &(l, y0, y1) in &ps {
            let (u0, u1) = (y0 - mean, y1 - mean);
            dev += if u0 * u1 >= 0.0 {
                0.5 * (u0 + u1).abs() * l
            } else {
                l * (u0 * u0 + u1 * u1) / (2.0 * (u0.abs() + u1.abs()))
            };
        }
        let osc = if ps.iter().all(|p| p.1 == ps[0].1 && p.2 == ps[0].1) { 0.0 } else { dev / len };
        CubeStats { mass: len, mean, osc }
    }

    pub fn cube_stats(&self, q: &DyadicCube) -> CubeStats {
        let (a, b) = q.bounds_f64(0);
        self.interval_stats(a, b)
    }
}

/// Render a step function in the line-oriented text format.
pub fn write_function(f: &StepFunction, measure: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# dyadic step function");
    let _ = writeln!(s, "dim {}", f.dim());
    let _ = writeln!(s, "root {}", f.root());
    let _ = writeln!(s, "measure {measure}");
    for (c, v) in f.leaves() {
        if v != 0.0 {
            let _ = writeln!(s, "{c} {v:?}");
        }
    }
    s
}

/// Parse a leaf value: a decimal float or an exact fraction `p/q`.
fn parse_value(t: &str) -> Result<f64> {
    let bad = || Error::Parse(format!("bad value '{t}'"));
    if let Some((a, b)) = t.split_once('/') {
        let a: i128 = a.trim().parse().map_err(|_| bad())?;
        let b: i128 = b.trim().parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        let r = num_rational::Ratio::new(num_bigint::BigInt::from(a), num_bigint::BigInt::from(b));
        return num_traits::ToPrimitive::to_f64(&r).ok_or_else(bad);
    }
    let v: f64 = t.parse().map_err(|_| bad())?;
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(v)
}

/// Parsed function file: the function and its `measure` header value.
#[derive(Clone, Debug)]
pub struct FunctionFile {
    pub function: StepFunction,
    pub measure: String,
}

pub fn read_function(text: &str) -> Result<FunctionFile> {
    let mut dim: Option<usize> = None;
    let mut root: Option<DyadicCube> = None;
    let mut measure = "lebesgue".to_string();
    let mut leaves = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match head {
            "dim" => dim = Some(rest.parse().map_err(|_| Error::Parse(format!("line {}: bad dim", lineno + 1)))?),
            "root" => root = Some(rest.parse()?),
            "measure" => measure = rest.to_string(),
            _ => {
                let cube: DyadicCube = head.parse()?;
                leaves.push((cube, parse_value(rest)?));
            }
        }
    }
    let n = dim.or(root.as_ref().map(|r| r.dim())).unwrap_or(1);
    let root = match root {
        Some(r) => r,
        None if leaves.is_empty() => DyadicCube::unit(n),
        None => return Err(Error::Parse("missing root line".into())),
    };
    if root.dim() != n {
        return Err(Error::Parse("root dimension disagrees with dim line".into()));
    }
    Ok(FunctionFile { function: StepFunction::from_leaves(root, leaves)?, measure })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c1(level: i32, j: i64) -> DyadicCube {
        DyadicCube::std(level, vec![j])
    }

    fn half_indicator() -> StepFunction {
        StepFunction::from_leaves(c1(0, 0), vec![(c1(-1, 0), 1.0)]).unwrap()
    }

    #[test]
    fn constant_mean_and_oscillation() {
        let f = StepFunction::constant(c1(0, 0), 3.5).unwrap();
        let fld = Field::lebesgue(&f);
        for q in [c1(0, 0), c1(-3, 5), c1(2, 0)] {
            let s = fld.stats(&q);
            if q.level <= 0 {
                assert_eq!(s.mean, 3.5);
                assert_eq!(s.osc, 0.0);
            } else {
                // Ancestors also see the zero extension outside the root.
                assert_eq!(s.mean, 3.5 / 4.0);
            }
        }
    }

    #[test]
    fn half_indicator_values() {
        let fld = Field::lebesgue(&half_indicator());
        let s = fld.stats(&c1(0, 0));
        assert_eq!(s.mean, 0.5);
        assert_eq!(s.osc, 0.5);
        assert_eq!(fld.stats(&c1(-1, 1)).mean, 0.0);
    }

    #[test]
    fn ancestor_includes_outside_zeros() {
        let fld = Field::lebesgue(&StepFunction::constant(c1(0, 0), 1.0).unwrap());
        let s = fld.stats(&c1(1, 0));
        assert_eq!(s.mean, 0.5);
        assert_eq!(s.osc, 0.5);
    }

    #[test]
    fn zero_mass_convention() {
        let dens = StepFunction::constant(c1(0, 0), 0.0).unwrap();
        let mu = DyadicMeasure::from_density(dens).unwrap();
        let fld = Field::new(&half_indicator(), &mu).unwrap();
        let s = fld.stats(&c1(-1, 0));
        assert_eq!((s.mass, s.mean, s.osc), (0.0, 0.0, 0.0));
    }

    #[test]
    fn interval_ball_over_jump() {
        // f = 1 on [0, 2), 0 elsewhere; B = (-1, 1).
        let f = StepFunction::constant(c1(1, 0), 1.0).unwrap();
        let fld = Field::lebesgue(&f);
        let s = fld.ball_stats(&Ball::new(vec![0.0], 1.0).unwrap(), 0.0, 0).unwrap();
        assert!(s.exact);
        assert_eq!(s.mean, 0.5);
        assert_eq!(s.osc, 0.5);
    }

    #[test]
    fn refine_is_idempotent_and_preserves_values() {
        let f = half_indicator();
        let g = f.refine(-3, 1000).unwrap();
        assert_eq!(g.node_count(), 1 + 2 + 4 + 8);
        assert_eq!(g.refine(-3, 1000).unwrap(), g);
        let (a, b) = (Field::lebesgue(&f), Field::lebesgue(&g));
        for q in [c1(0, 0), c1(-1, 0), c1(-2, 1), c1(3, 0)] {
            assert_eq!(a.stats(&q), b.stats(&q));
        }
        assert!(matches!(f.refine(-30, 1000), Err(Error::Budget(_))));
    }

    #[test]
    fn overlapping_leaves_rejected() {
        let r = StepFunction::from_leaves(c1(0, 0), vec![(c1(-1, 0), 1.0), (c1(-2, 0), 2.0)]);
        assert!(r.is_err());
    }

    #[test]
    fn file_round_trip() {
        let f = StepFunction::from_leaves(c1(0, 0), vec![(c1(-1, 0), 0.1), (c1(-2, 3), -1.0 / 3.0)]).unwrap();
        let text = write_function(&f, "lebesgue");
        let g = read_function(&text).unwrap().function;
        assert_eq!(f.leaves(), g.leaves());
        let e = read_function("").unwrap().function;
        assert!(e.is_zero());
        let h = read_function("root L0:k0:(0)\nL0:k-1:(1) 3/4\n").unwrap().function;
        assert_eq!(h.value_at(&[0.75]), 0.75);
    }

    #[test]
    fn ramp_interval_stats() {
        let g = StepFunction::constant(c1(0, 0), 1.0).unwrap();
        let ramp = PiecewiseLinear1D::new(g, 0.0).unwrap();
        let s = ramp.interval_stats(0.0, 1.0);
        assert!((s.mean - 0.5).abs() < 1e-15);
        assert!((s.osc - 0.25).abs() < 1e-15);
        let t = ramp.interval_stats(1.0, 2.0);
        assert_eq!(t.osc, 0.0);
        assert_eq!(t.mean, 1.0);
    }

    #[test]
    fn shifted_cube_overlap_stats() {
        // Lattice 1, level 0, index 0 covers [1/3, 4/3).
        let f = StepFunction::constant(c1(0, 0), 1.0).unwrap();
        let fld = Field::lebesgue(&f);
        let q = DyadicCube::new(1, 0, vec![0]).unwrap();
        let s = fld.stats(&q);
        assert!((s.mean - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.osc - 4.0 / 9.0).abs() < 1e-15);
    }
}
