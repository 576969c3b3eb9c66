//! Dyadic cubes on the standard lattice and its third-shifted companions,
//! dyadic rectangles, Euclidean balls, and combinatorics on cube collections.
//!
//! A cube is `(lattice, level k, index j)` with side `2^k`. Lattice `t` is
//! read as base-3 digits, one per coordinate, mapped to a shift sign
//! `sigma in {0, +1, -1}`; coordinate `i` of the cube spans
//! `[2^k (j_i + (-1)^k sigma_i / 3), 2^k (j_i + 1 + (-1)^k sigma_i / 3))`.

use crate::error::{param, Error, Result};
use crate::exact::{pow2, Dy};
use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

/// Largest admissible index magnitude.
pub const INDEX_BOUND: i64 = 1 << 62;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    pub lattice: u32,
    pub level: i32,
    pub index: Vec<i64>,
}

fn parity_sign(level: i32) -> i64 {
    if level.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Shift signs of lattice `t` in dimension `n`.
pub fn lattice_sigmas(lattice: u32, n: usize) -> Vec<i64> {
    let mut t = lattice;
    (0..n)
        .map(|_| {
            let d = t % 3;
            t /= 3;
            match d {
                0 => 0,
                1 => 1,
                _ => -1,
            }
        })
        .collect()
}

pub fn lattice_count(n: usize) -> u32 {
    3u32.pow(n as u32)
}

impl DyadicCube {
    pub fn new(lattice: u32, level: i32, index: Vec<i64>) -> Result<DyadicCube> {
        if index.is_empty() {
            return param("cube dimension must be at least 1");
        }
        if lattice >= lattice_count(index.len()) {
            return param(format!("lattice {lattice} out of range for dimension {}", index.len()));
        }
        if let Some(j) = index.iter().find(|j| j.abs() >= INDEX_BOUND) {
            return Err(Error::Range(format!("index {j} exceeds 62-bit bound")));
        }
        Ok(DyadicCube { lattice, level, index })
    }

    /// Standard-lattice cube, panicking on out-of-range input (internal use).
    pub fn std(level: i32, index: Vec<i64>) -> DyadicCube {
        DyadicCube::new(0, level, index).expect("valid cube")
    }

    /// The unit cube `[0,1)^n`.
    pub fn unit(n: usize) -> DyadicCube {
        DyadicCube::std(0, vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn sigmas(&self) -> Vec<i64> {
        lattice_sigmas(self.lattice, self.dim())
    }

    pub fn side(&self) -> f64 {
        pow2(self.level)
    }

    pub fn volume(&self) -> f64 {
        pow2(self.level * self.dim() as i32)
    }

    fn checked(lattice: u32, level: i32, index: Vec<i64>) -> Result<DyadicCube> {
        if let Some(j) = index.iter().find(|j| j.abs() >= INDEX_BOUND) {
            return Err(Error::Range(format!("index {j} exceeds 62-bit bound")));
        }
        Ok(DyadicCube { lattice, level, index })
    }

    pub fn parent(&self) -> DyadicCube {
        let eps = parity_sign(self.level);
        let index = self
            .index
            .iter()
            .zip(self.sigmas())
            .map(|(&j, s)| (j + eps * s).div_euclid(2))
            .collect();
        DyadicCube { lattice: self.lattice, level: self.level + 1, index }
    }

    /// Index of the first child along each coordinate.
    fn first_child_index(&self) -> Vec<i64> {
        let eps = parity_sign(self.level - 1);
        self.index.iter().zip(self.sigmas()).map(|(&j, s)| 2 * j - eps * s).collect()
    }

    /// The `2^n` children in lexicographic index order.
    pub fn children(&self) -> Vec<DyadicCube> {
        let n = self.dim();
        let base = self.first_child_index();
        (0..1usize << n)
            .map(|c| {
                let index = (0..n).map(|i| base[i] + ((c >> (n - 1 - i)) & 1) as i64).collect();
                DyadicCube { lattice: self.lattice, level: self.level - 1, index }
            })
            .collect()
    }

    /// Child number (as in `children`) of this cube's child that contains `d`.
    /// `d` must be a strict descendant.
    pub fn child_slot_towards(&self, d: &DyadicCube) -> usize {
        let a = d.ancestor((self.level - 1 - d.level) as u32);
        let base = self.first_child_index();
        let n = self.dim();
        (0..n).fold(0usize, |acc, i| (acc << 1) | (a.index[i] - base[i]) as usize)
    }

    pub fn ancestor(&self, k: u32) -> DyadicCube {
        if self.lattice == 0 {
            let index = self.index.iter().map(|&j| if k >= 63 { if j < 0 { -1 } else { 0 } } else { j >> k }).collect();
            return DyadicCube { lattice: 0, level: self.level + k as i32, index };
        }
        let mut c = self.clone();
        for _ in 0..k {
            c = c.parent();
        }
        c
    }

    /// Ancestor at absolute level `level` (which must be at least `self.level`).
    pub fn ancestor_at(&self, level: i32) -> DyadicCube {
        assert!(level >= self.level);
        self.ancestor((level - self.level) as u32)
    }

    /// Same-lattice containment.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        self.lattice == other.lattice
            && self.dim() == other.dim()
            && other.level <= self.level
            && other.ancestor((self.level - other.level) as u32) == *self
    }

    pub fn strictly_contains(&self, other: &DyadicCube) -> bool {
        other.level < self.level && self.contains(other)
    }

    /// Exact endpoints along coordinate `i`, multiplied by 3.
    pub fn bounds3(&self, i: usize) -> (Dy, Dy) {
        let eps = parity_sign(self.level);
        let s = self.sigmas()[i];
        let lo = Dy::new(3 * self.index[i] as i128 + (eps * s) as i128, self.level);
        let hi = Dy::new(3 * (self.index[i] + 1) as i128 + (eps * s) as i128, self.level);
        (lo, hi)
    }

    /// Approximate endpoints along coordinate `i`.
    pub fn bounds_f64(&self, i: usize) -> (f64, f64) {
        let eps = parity_sign(self.level) as f64;
        let s = self.sigmas()[i] as f64;
        let side = self.side();
        let lo = (self.index[i] as f64 + eps * s / 3.0) * side;
        (lo, lo + side)
    }

    pub fn center(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                let (lo, hi) = self.bounds_f64(i);
                0.5 * (lo + hi)
            })
            .collect()
    }

    /// Exact volume of the intersection with another cube (any lattices).
    pub fn overlap_volume(&self, other: &DyadicCube) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        if self.lattice == other.lattice {
            if self.contains(other) {
                return other.volume();
            }
            if other.contains(self) {
                return self.volume();
            }
            return 0.0;
        }
        let mut prod = Dy::new(1, 0);
        for i in 0..self.dim() {
            let (a0, a1) = self.bounds3(i);
            let (b0, b1) = other.bounds3(i);
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            let len = hi.sub(&lo);
            if len.m <= num_bigint::BigInt::from(0) {
                return 0.0;
            }
            prod = prod.mul(&len);
        }
        prod.to_f64() / 3f64.powi(self.dim() as i32)
    }

    /// Exact check that two cubes (any lattices) have disjoint interiors.
    pub fn disjoint_from(&self, other: &DyadicCube) -> bool {
        self.overlap_volume(other) == 0.0
    }

    /// Exact containment of a cube of another lattice.
    pub fn contains_cube_any(&self, other: &DyadicCube) -> bool {
        (0..self.dim()).all(|i| {
            let (a0, a1) = self.bounds3(i);
            let (b0, b1) = other.bounds3(i);
            a0.cmp_value(&b0) != Ordering::Greater && b1.cmp_value(&a1) != Ordering::Greater
        })
    }

    /// Exact containment of the point `x`.
    pub fn contains_point(&self, x: &[f64]) -> bool {
        (0..self.dim()).all(|i| {
            let (lo, hi) = self.bounds3(i);
            let x3 = Dy::from_f64(x[i]).scale_int(3);
            lo.cmp_value(&x3) != Ordering::Greater && x3.cmp_value(&hi) == Ordering::Less
        })
    }

    /// The cube of a given lattice and level containing the point `x`.
    pub fn containing_point(lattice: u32, level: i32, x: &[f64]) -> Result<DyadicCube> {
        let n = x.len();
        let sig = lattice_sigmas(lattice, n);
        let eps = parity_sign(level) as f64;
        let side = pow2(level);
        let mut index = Vec::with_capacity(n);
        for i in 0..n {
            let guess = (x[i] / side - eps * sig[i] as f64 / 3.0).floor();
            if !guess.is_finite() || guess.abs() >= INDEX_BOUND as f64 {
                return Err(Error::Range(format!("point {} at level {level} overflows index", x[i])));
            }
            index.push(guess as i64);
        }
        let mut c = DyadicCube::checked(lattice, level, index)?;
        // Repair floating rounding with exact comparisons.
        for i in 0..n {
            let x3 = Dy::from_f64(x[i]).scale_int(3);
            for _ in 0..4 {
                let (lo, hi) = c.bounds3(i);
                if x3.cmp_value(&lo) == Ordering::Less {
                    c.index[i] -= 1;
                } else if x3.cmp_value(&hi) != Ordering::Less {
                    c.index[i] += 1;
                } else {
                    break;
                }
            }
        }
        debug_assert!(c.contains_point(x));
        Ok(c)
    }

    /// Ordering used for reproducible witnesses: larger cubes first, then
    /// lexicographic index.
    pub fn witness_order(a: &DyadicCube, b: &DyadicCube) -> Ordering {
        b.level.cmp(&a.level).then_with(|| a.lattice.cmp(&b.lattice)).then_with(|| a.index.cmp(&b.index))
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}:k{}:(", self.lattice, self.level)?;
        for (i, j) in self.index.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for DyadicCube {
    type Err = Error;

    fn from_str(s: &str) -> Result<DyadicCube> {
        let bad = || Error::Parse(format!("malformed cube '{s}', expected L<lattice>:k<level>:(j1,...,jn)"));
        let s = s.trim();
        let rest = s.strip_prefix('L').ok_or_else(bad)?;
        let (lat, rest) = rest.split_once(':').ok_or_else(bad)?;
        let rest = rest.strip_prefix('k').ok_or_else(bad)?;
        let (lev, rest) = rest.split_once(':').ok_or_else(bad)?;
        let inner = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let lattice: u32 = lat.parse().map_err(|_| bad())?;
        let level: i32 = lev.parse().map_err(|_| bad())?;
        let mut index = Vec::new();
        for part in inner.split(',') {
            let j: i128 = part.trim().parse().map_err(|_| bad())?;
            if j.abs() >= INDEX_BOUND as i128 {
                return Err(Error::Range(format!("index {j} exceeds 62-bit bound")));
            }
            index.push(j as i64);
        }
        DyadicCube::new(lattice, level, index)
    }
}

/// Euclidean ball with open interior.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Volume of the unit ball in dimension `n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    // omega_n = pi^{n/2} / Gamma(n/2 + 1), via the two-step recursion.
    let mut v = [1.0f64, 2.0];
    let mut out = if n == 0 { 1.0 } else { 2.0 };
    for k in 2..=n {
        let next = 2.0 * std::f64::consts::PI / k as f64 * v[(k - 2) % 2];
        v[k % 2] = next;
        out = next;
    }
    out
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Ball> {
        if !(radius > 0.0) || !radius.is_finite() {
            return param(format!("ball radius must be positive and finite, got {radius}"));
        }
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return param("ball center must be a finite vector");
        }
        Ok(Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim()) * self.radius.powi(self.dim() as i32)
    }

    /// Exact test `B subset Q` (the ball is open, the cube half-open).
    pub fn inside(&self, q: &DyadicCube) -> bool {
        let r = Dy::from_f64(self.radius);
        (0..self.dim()).all(|i| {
            let c = Dy::from_f64(self.center[i]);
            let lo3 = c.sub(&r).scale_int(3);
            let hi3 = c.add(&r).scale_int(3);
            let (a, b) = q.bounds3(i);
            a.cmp_value(&lo3) != Ordering::Greater && hi3.cmp_value(&b) != Ordering::Greater
        })
    }
}

/// The `3^n` shifted lattices together with their covering constant.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedLatticeFamily {
    pub n: usize,
    /// Admissibility constant: a cover `Q` must satisfy `|Q| <= C |B|`.
    pub constant: f64,
}

impl ShiftedLatticeFamily {
    pub fn new(n: usize) -> ShiftedLatticeFamily {
        ShiftedLatticeFamily { n, constant: 12f64.powi(n as i32) / unit_ball_volume(n) }
    }

    pub fn size(&self) -> u32 {
        lattice_count(self.n)
    }

    pub fn lattices(&self) -> std::ops::Range<u32> {
        0..self.size()
    }

    /// Smallest lattice id admitting a cover, then its smallest admissible level.
    pub fn cover_ball(&self, b: &Ball) -> Result<(u32, DyadicCube)> {
        if b.dim() != self.n {
            return param("ball dimension does not match the lattice family");
        }
        let bound = self.constant * b.volume();
        let k0 = (2.0 * b.radius).log2().ceil() as i32 - 1;
        for t in self.lattices() {
            let mut k = k0;
            while pow2(k * self.n as i32) <= bound {
                let q = DyadicCube::containing_point(t, k, &b.center)?;
                if b.inside(&q) {
                    return Ok((t, q));
                }
                k += 1;
            }
        }
        Err(Error::Internal(format!("no admissible cover found for ball {:?}", b)))
    }
}

/// Product of two dyadic cubes (in R^n and R^m).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRectangle {
    pub first: DyadicCube,
    pub second: DyadicCube,
}

impl DyadicRectangle {
    pub fn new(first: DyadicCube, second: DyadicCube) -> DyadicRectangle {
        DyadicRectangle { first, second }
    }

    pub fn l1(&self) -> f64 {
        self.first.side()
    }

    pub fn l2(&self) -> f64 {
        self.second.side()
    }

    pub fn l_min(&self) -> f64 {
        self.l1().min(self.l2())
    }

    pub fn l_max(&self) -> f64 {
        self.l1().max(self.l2())
    }

    pub fn volume(&self) -> f64 {
        self.first.volume() * self.second.volume()
    }

    /// `l_min^alpha * l_max^beta` with `alpha + beta = 1`.
    pub fn mean_sidelength(&self, alpha: f64, beta: f64) -> Result<f64> {
        check_affine(alpha, beta)?;
        Ok(self.l_min().powf(alpha) * self.l_max().powf(beta))
    }

    pub fn contains(&self, other: &DyadicRectangle) -> bool {
        self.first.contains(&other.first) && self.second.contains(&other.second)
    }
}

pub(crate) fn check_affine(alpha: f64, beta: f64) -> Result<()> {
    if !((alpha + beta) - 1.0).abs().le(&1e-12) {
        return param(format!("exponents must satisfy alpha + beta = 1, got {alpha} + {beta}"));
    }
    Ok(())
}

/// Finite set of cubes from one lattice with a cached disjointness flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeCollection {
    cubes: Vec<DyadicCube>,
    is_disjoint: bool,
}

impl CubeCollection {
    pub fn new(cubes: impl IntoIterator<Item = DyadicCube>) -> Result<CubeCollection> {
        let set: BTreeSet<DyadicCube> = cubes.into_iter().collect();
        let cubes: Vec<DyadicCube> = set.into_iter().collect();
        if let Some(first) = cubes.first() {
            if cubes.iter().any(|c| c.lattice != first.lattice || c.dim() != first.dim()) {
                return param("a cube collection must come from a single lattice and dimension");
            }
        }
        let is_disjoint = nested_depths(&cubes).values().all(|&d| d == 0);
        Ok(CubeCollection { cubes, is_disjoint })
    }

    pub fn empty() -> CubeCollection {
        CubeCollection { cubes: Vec::new(), is_disjoint: true }
    }

    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn is_disjoint(&self) -> bool {
        self.is_disjoint
    }

    pub fn contains(&self, q: &DyadicCube) -> bool {
        self.cubes.binary_search(q).is_ok()
    }

    /// Cubes not contained in any larger member.
    pub fn maximal(&self) -> CubeCollection {
        let depths = nested_depths(&self.cubes);
        let cubes = self.cubes.iter().filter(|c| depths[*c] == 0).cloned().collect();
        CubeCollection { cubes, is_disjoint: true }
    }

    /// Cubes containing no smaller member.
    pub fn minimal(&self) -> CubeCollection {
        let top = match self.cubes.iter().map(|c| c.level).max() {
            Some(t) => t,
            None => return CubeCollection::empty(),
        };
        let mut has_desc: HashSet<DyadicCube> = HashSet::new();
        let members: HashSet<&DyadicCube> = self.cubes.iter().collect();
        for c in &self.cubes {
            let mut a = c.clone();
            while a.level < top {
                a = a.parent();
                if members.contains(&a) && !has_desc.insert(a.clone()) {
                    break;
                }
            }
        }
        let cubes = self.cubes.iter().filter(|c| !has_desc.contains(*c)).cloned().collect();
        CubeCollection { cubes, is_disjoint: true }
    }

    /// Generations: the k-th holds the cubes with exactly k-1 strict
    /// ancestors in the collection, which is the maximal layer of what
    /// remains after removing earlier generations.
    pub fn generation_partition(&self) -> Vec<CubeCollection> {
        let depths = nested_depths(&self.cubes);
        let g = depths.values().copied().max().map_or(0, |d| d + 1);
        let mut out = vec![Vec::new(); g];
        for c in &self.cubes {
            out[depths[c]].push(c.clone());
        }
        out.into_iter().map(|cubes| CubeCollection { cubes, is_disjoint: true }).collect()
    }

    /// Lebesgue measure of the union.
    pub fn union_volume(&self) -> f64 {
        self.maximal().cubes.iter().map(|c| c.volume()).sum()
    }
}

/// Number of strict ancestors of each cube inside the set.
fn nested_depths(cubes: &[DyadicCube]) -> HashMap<DyadicCube, usize> {
    let members: HashSet<&DyadicCube> = cubes.iter().collect();
    let top = cubes.iter().map(|c| c.level).max().unwrap_or(0);
    cubes
        .iter()
        .map(|c| {
            let mut a = c.clone();
            let mut d = 0;
            while a.level < top {
                a = a.parent();
                if members.contains(&a) {
                    d += 1;
                }
            }
            (c.clone(), d)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c1(level: i32, j: i64) -> DyadicCube {
        DyadicCube::std(level, vec![j])
    }

    #[test]
    fn unit_interval_children() {
        let kids = c1(0, 0).children();
        assert_eq!(kids, vec![c1(-1, 0), c1(-1, 1)]);
        assert_eq!(kids[1].bounds_f64(0), (0.5, 1.0));
    }

    #[test]
    fn square_children_have_unit_side() {
        let q = DyadicCube::std(1, vec![0, 0]);
        let kids = q.children();
        assert_eq!(kids.len(), 4);
        for k in &kids {
            assert_eq!(k.side(), 1.0);
            assert_eq!(k.parent(), q);
        }
        let total: f64 = kids.iter().map(|k| k.volume()).sum();
        assert_eq!(total, q.volume());
    }

    #[test]
    fn ancestor_examples() {
        let q = c1(-2, 3); // [3/4, 1)
        assert_eq!(q.ancestor(0), q);
        let a = q.ancestor(2);
        assert_eq!(a, c1(0, 0));
        assert!(a.contains(&q));
        assert_eq!(q.ancestor(1).ancestor(1), q.ancestor(2));
    }

    #[test]
    fn shifted_children_partition_parent() {
        for t in 0..9 {
            let q = DyadicCube::new(t, 3, vec![-2, 5]).unwrap();
            let kids = q.children();
            let vol: f64 = kids.iter().map(|k| q.overlap_volume(k)).sum();
            assert_eq!(vol, q.volume());
            for k in &kids {
                assert_eq!(k.parent(), q);
                assert!(q.contains_cube_any(k));
            }
        }
    }

    #[test]
    fn text_form_round_trips() {
        let q = DyadicCube::new(4, -7, vec![3, -12]).unwrap();
        let s = q.to_string();
        assert_eq!(s, "L4:k-7:(3,-12)");
        assert_eq!(s.parse::<DyadicCube>().unwrap(), q);
        assert!("L0:k1:(1,".parse::<DyadicCube>().is_err());
        assert!(matches!("L0:k0:(4611686018427387904)".parse::<DyadicCube>(), Err(Error::Range(_))));
    }

    #[test]
    fn index_range_is_enforced() {
        assert!(matches!(DyadicCube::new(0, 0, vec![INDEX_BOUND]), Err(Error::Range(_))));
    }

    #[test]
    fn ball_inside_standard_interval() {
        let fam = ShiftedLatticeFamily::new(1);
        let b = Ball::new(vec![0.15], 0.05).unwrap();
        let (t, q) = fam.cover_ball(&b).unwrap();
        assert_eq!(t, 0);
        assert!(b.inside(&q));
        assert_eq!(q, c1(-2, 0));
    }

    #[test]
    fn ball_straddling_half_needs_shift() {
        let fam = ShiftedLatticeFamily::new(1);
        let b = Ball::new(vec![0.5], 0.01).unwrap();
        // Exhaustive: no standard interval of admissible size contains it.
        let bound = fam.constant * b.volume();
        let mut k = -8;
        while pow2(k) <= bound {
            let q = DyadicCube::containing_point(0, k, &b.center).unwrap();
            assert!(!b.inside(&q));
            k += 1;
        }
        let (t, q) = fam.cover_ball(&b).unwrap();
        assert_ne!(t, 0);
        assert!(b.inside(&q));
        assert!(q.volume() <= bound);
    }

    #[test]
    fn mean_sidelength_cases() {
        let r = DyadicRectangle::new(DyadicCube::std(0, vec![0]), DyadicCube::std(2, vec![0]));
        assert_eq!(r.mean_sidelength(0.5, 0.5).unwrap(), 2.0);
        let sq = DyadicRectangle::new(DyadicCube::std(3, vec![0]), DyadicCube::std(3, vec![1]));
        assert_eq!(sq.mean_sidelength(2.0, -1.0).unwrap(), 8.0);
        assert!(matches!(r.mean_sidelength(0.5, 0.6), Err(Error::Parameter(_))));
    }

    #[test]
    fn chain_collection() {
        let c = CubeCollection::new(vec![c1(0, 0), c1(-1, 0), c1(-2, 0)]).unwrap();
        assert!(!c.is_disjoint());
        assert_eq!(c.maximal().cubes(), &[c1(0, 0)]);
        assert_eq!(c.minimal().cubes(), &[c1(-2, 0)]);
        let g = c.generation_partition();
        assert_eq!(g.len(), 3);
        assert!(g.iter().all(|p| p.len() == 1));
    }

    #[test]
    fn disjoint_collection_is_fixed_point() {
        let c = CubeCollection::new(vec![c1(-1, 0), c1(-2, 2), c1(-3, 7)]).unwrap();
        assert!(c.is_disjoint());
        assert_eq!(c.maximal(), c);
        assert_eq!(c.minimal(), c);
        assert_eq!(c.generation_partition().len(), 1);
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }
}
