//! Stopping-time selections, contracting decompositions and oscillation
//! sums along nested chains.

use crate::cube::{CubeCollection, DyadicCube};
use crate::error::{param, Error, Result};
use crate::exact::Dy;
use crate::function::{DyadicMeasure, Field, Placement, StepFunction};
use crate::profile::{build_osc_profile, profile_sup, LevelWindow};
use num_bigint::BigInt;
use std::cmp::Ordering;

/// Field of `f` restricted to `q0` and the node index of `q0`.
fn local(f: &StepFunction, q0: &DyadicCube, mu: &DyadicMeasure) -> Result<(Field, usize)> {
    if q0.lattice != 0 || q0.dim() != f.dim() {
        return param("the reference cube must be a standard-lattice cube of the function's dimension");
    }
    let field = Field::new(&f.restrict(q0)?, mu)?;
    match field.locate(q0) {
        Placement::Node(i) => Ok((field, i)),
        _ => Err(Error::Internal(format!("{q0} is not a node of its own refinement"))),
    }
}

/// Fills `dev[j] = ∫_{Q_j} |f - c| dμ` for the subtree of `i`.
fn deviation(field: &Field, i: usize, c: f64, dev: &mut [f64]) -> f64 {
    let nd = field.node(i);
    let v = if nd.is_leaf() {
        (nd.value - c).abs() * nd.mass
    } else {
        field.children(i).map(|j| deviation(field, j, c, dev)).sum()
    };
    dev[i] = v;
    v
}

/// Maximal nodes strictly below `i` (or `i` itself when `include_self`)
/// with `dev / mass > thr`.
fn select(field: &Field, i: usize, dev: &[f64], thr: f64, include_self: bool) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack: Vec<usize> = if include_self { vec![i] } else { field.children(i).rev().collect() };
    while let Some(j) = stack.pop() {
        let nd = field.node(j);
        if nd.mass > 0.0 && dev[j] > thr * nd.mass {
            out.push(j);
        } else if !nd.is_leaf() {
            stack.extend(field.children(j).rev());
        }
    }
    out
}

/// Maximal dyadic subcubes of `q0` (including `q0`) on which the mean of
/// `|f - f_{q0}|` exceeds `lambda`.
pub fn cz_stopping(f: &StepFunction, q0: &DyadicCube, mu: &DyadicMeasure, lambda: f64) -> Result<CubeCollection> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return param("lambda must be positive");
    }
    let (field, i0) = local(f, q0, mu)?;
    let mut dev = vec![0.0; field.nodes().len()];
    deviation(&field, i0, field.node(i0).mean, &mut dev);
    let sel = select(&field, i0, &dev, lambda, true);
    CubeCollection::new(sel.into_iter().map(|j| field.node(j).cube.clone()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenCube {
    pub cube: DyadicCube,
    /// Mean oscillation `O(f, Q)` under the measure.
    pub osc: f64,
    pub mass: f64,
    /// Index of the containing cube in the previous generation.
    pub parent: Option<usize>,
}

/// Generations `P_0 = {Q0}, P_1, ...` with `|∪P_k| <= 2^{-k}|Q0|` and
/// `|f - f_{Q0}| <= C Σ_k Σ_{Q∈P_k} O(f,Q) χ_Q` on every leaf cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractingDecomposition {
    pub root: DyadicCube,
    pub root_mean: f64,
    pub generations: Vec<Vec<GenCube>>,
    /// Measured domination constant `C`.
    pub domination_constant: f64,
    /// Selection factor `T` actually used (`2^{n+2}` unless escalated).
    pub threshold_factor: f64,
    /// `μ(∪P_k) / μ(Q0)` per generation.
    pub union_fraction: Vec<f64>,
}

impl ContractingDecomposition {
    pub fn collections(&self) -> Vec<CubeCollection> {
        self.generations
            .iter()
            .map(|g| CubeCollection::new(g.iter().map(|c| c.cube.clone())).expect("one lattice"))
            .collect()
    }

    /// Text dump: one line per `(k, cube)` and a summary block.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (k, g) in self.generations.iter().enumerate() {
            for c in g {
                s.push_str(&format!("{k} {} {:.17e}\n", c.cube, c.osc));
            }
        }
        s.push_str(&format!("# generations {}\n", self.generations.len()));
        s.push_str(&format!("# threshold_factor {:.17e}\n", self.threshold_factor));
        s.push_str(&format!("# domination_constant {:.17e}\n", self.domination_constant));
        for (k, u) in self.union_fraction.iter().enumerate() {
            s.push_str(&format!("# union_fraction {k} {:.17e} <= 2^-{k}\n", u));
        }
        s
    }
}

const MAX_ESCALATIONS: u32 = 16;

pub fn lerner_decomposition(f: &StepFunction, q0: &DyadicCube, mu: &DyadicMeasure) -> Result<ContractingDecomposition> {
    let (field, i0) = local(f, q0, mu)?;
    let n = q0.dim() as i32;
    let mut factor = f64::from(1u32 << (n + 2) as u32);
    for _ in 0..MAX_ESCALATIONS {
        if let Some(d) = try_lerner(&field, i0, mu.is_lebesgue(), factor)? {
            return Ok(d);
        }
        factor *= 2.0;
    }
    Err(Error::Internal(format!("measure decay still fails with selection factor {factor}")))
}

/// `None` when some generation violates the decay bound.
fn try_lerner(field: &Field, i0: usize, lebesgue: bool, factor: f64) -> Result<Option<ContractingDecomposition>> {
    let root = field.node(i0);
    let q0 = root.cube.clone();
    let f0 = root.mean;
    let mut dev = vec![0.0; field.nodes().len()];
    let mut gens: Vec<Vec<(usize, Option<usize>)>> = Vec::new();
    if root.osc > 0.0 && root.mass > 0.0 {
        gens.push(vec![(i0, None)]);
    }
    while let Some(last) = gens.last() {
        let mut next = Vec::new();
        for (pi, &(q, _)) in last.iter().enumerate() {
            let nd = field.node(q);
            if nd.osc <= 0.0 {
                continue;
            }
            deviation(field, q, nd.mean, &mut dev);
            for j in select(field, q, &dev, factor * nd.osc, false) {
                next.push((j, Some(pi)));
            }
        }
        if next.is_empty() {
            break;
        }
        gens.push(next);
    }
    // Decay, tested exactly for Lebesgue measure.
    let mut fractions = Vec::with_capacity(gens.len());
    for (k, g) in gens.iter().enumerate() {
        let mass: f64 = g.iter().map(|&(j, _)| field.node(j).mass).sum();
        fractions.push(mass / root.mass);
        let ok = if lebesgue {
            let n = q0.dim() as i32;
            let mut total = Dy::zero();
            for &(j, _) in g {
                total = total.add(&Dy::new(BigInt::from(1), field.node(j).cube.level * n));
            }
            let bound = Dy::new(BigInt::from(1), q0.level * n - k as i32);
            total.cmp_value(&bound) != Ordering::Greater
        } else {
            mass <= root.mass * crate::exact::pow2(-(k as i32)) * (1.0 + 1e-12)
        };
        if !ok {
            return Ok(None);
        }
    }
    // Contraction.
    for k in 1..gens.len() {
        for &(j, p) in &gens[k] {
            let pc = &field.node(gens[k - 1][p.expect("parent")].0).cube;
            if !pc.strictly_contains(&field.node(j).cube) {
                return Err(Error::Internal(format!("{} escapes its parent {pc}", field.node(j).cube)));
            }
        }
    }
    // Pointwise domination on leaf cells.
    let mut weight = vec![0.0; field.nodes().len()];
    for g in &gens {
        for &(j, _) in g {
            weight[j] += field.node(j).osc;
        }
    }
    let mut c: f64 = 0.0;
    let mut stack = vec![(i0, 0.0)];
    let mut worst = Vec::new();
    while let Some((i, acc)) = stack.pop() {
        let nd = field.node(i);
        let s = acc + weight[i];
        if nd.is_leaf() {
            if nd.mass <= 0.0 {
                continue;
            }
            let d = (nd.value - f0).abs();
            if d > 0.0 {
                if s <= 0.0 {
                    return Err(Error::Internal(format!("cell {} has |f - f_Q0| = {d} but no covering cube", nd.cube)));
                }
                c = c.max(d / s);
                worst.push((d, s));
            }
        } else {
            stack.extend(field.children(i).map(|j| (j, s)));
        }
    }
    if worst.iter().any(|&(d, s)| d > c * s * (1.0 + 1e-12)) {
        return Err(Error::Internal("pointwise domination check failed".into()));
    }
    let generations = gens
        .iter()
        .map(|g| {
            g.iter()
                .map(|&(j, p)| {
                    let nd = field.node(j);
                    GenCube { cube: nd.cube.clone(), osc: nd.osc, mass: nd.mass, parent: p }
                })
                .collect()
        })
        .collect();
    Ok(Some(ContractingDecomposition {
        root: q0,
        root_mean: f0,
        generations,
        domination_constant: c,
        threshold_factor: factor,
        union_fraction: fractions,
    }))
}

/// `‖f‖` with `γ1 = 0`, `γ2 = p` over the dyadic subcubes of `q0`.
pub fn local_op_norm(f: &StepFunction, q0: &DyadicCube, p: f64) -> Result<f64> {
    let prof = build_osc_profile(f, &DyadicMeasure::lebesgue(), 0.0, p, p, &LevelWindow::within(q0.clone()))?;
    Ok(profile_sup(&prof, p).value.powf(1.0 / p))
}

/// Worst case of `Σ_{k<=K} O(f,Q_k)` over `K` distinct cubes when at most
/// `2^{ln}` cubes have oscillation above `2^{-l}` and none above 1:
/// `Σ_{l>=1} 2^{1-l} min(2^{ln}, K)`.
pub fn chain_count_bound(k: u64, n: usize) -> f64 {
    let mut total = 0.0;
    let mut l = 1u32;
    loop {
        let cap = (n as u32).checked_mul(l).filter(|&e| e < 63).map(|e| 1u64 << e);
        match cap {
            Some(c) if c <= k => {
                total += c as f64 * crate::exact::pow2(1 - l as i32);
                l += 1;
            }
            _ => break,
        }
    }
    // Remaining levels each contribute K 2^{1-l}; their sum is K 2^{2-l}.
    total + k as f64 * crate::exact::pow2(2 - l as i32)
}

/// `sup_{K <= k_max} chain_count_bound(K+1) / K^{(n-1)/n}`.
pub fn chain_constant(n: usize, k_max: u64) -> f64 {
    let e = (n as f64 - 1.0) / n as f64;
    (1..=k_max.max(1)).map(|k| chain_count_bound(k + 1, n) / (k as f64).powf(e)).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeafChain {
    pub leaf: DyadicCube,
    pub mass: f64,
    /// `|f - f_{Q0}|` on the leaf, normalized.
    pub deviation: f64,
    /// Normalized `O(f, Q_k)` for `Q0 = Q_0 ⊃ Q_1 ⊃ ... ⊃ leaf`.
    pub osc: Vec<f64>,
}

impl LeafChain {
    pub fn sum(&self) -> f64 {
        self.osc.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainStats {
    pub n: usize,
    pub p: f64,
    /// Norm used for normalization.
    pub norm: f64,
    pub leaves: Vec<LeafChain>,
    /// `(λ, Σ_{O(f,Q)>λ} ℓ(Q)^{-p}|Q|, λ^{-p})` at `λ = 2^{-l}`.
    pub count_profile: Vec<(f64, f64, f64)>,
    /// Bound checked: the count bound per `K` for `p = n`, the geometric
    /// series for `p > n`, nothing otherwise.
    pub bound: Option<f64>,
    /// `max_K (partial sum)/K^{(n-1)/n}` for `p = n`; `max sum / bound` for `p > n`.
    pub max_ratio: f64,
    pub holds: bool,
}

pub fn chain_oscillation_stats(f: &StepFunction, q0: &DyadicCube, p: f64) -> Result<ChainStats> {
    if !(p >= 1.0) || !p.is_finite() {
        return param("p must be finite and >= 1");
    }
    let norm = local_op_norm(f, q0, p)?;
    if !norm.is_finite() {
        return param("the local norm is infinite");
    }
    let (field, i0) = local(f, q0, &DyadicMeasure::lebesgue())?;
    let n = q0.dim();
    let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
    let f0 = field.node(i0).mean;
    let mut leaves = Vec::new();
    let mut stack = vec![(i0, Vec::<f64>::new())];
    while let Some((i, mut chain)) = stack.pop() {
        let nd = field.node(i);
        chain.push(nd.osc * scale);
        if nd.is_leaf() {
            leaves.push(LeafChain { leaf: nd.cube.clone(), mass: nd.mass, deviation: (nd.value - f0).abs() * scale, osc: chain });
        } else {
            for j in field.children(i).rev() {
                stack.push((j, chain.clone()));
            }
        }
    }
    let depth = leaves.iter().map(|l| l.osc.len()).max().unwrap_or(0);
    let mut count_profile = Vec::new();
    for l in 0..=depth.max(1) as i32 {
        let lam = crate::exact::pow2(-l);
        let w: f64 = field
            .nodes()
            .iter()
            .filter(|nd| q0.contains(&nd.cube) && nd.osc * scale > lam)
            .map(|nd| nd.cube.side().powf(-p) * nd.cube.volume())
            .sum();
        count_profile.push((lam, w, lam.powf(-p)));
    }
    let nf = n as f64;
    let tol = 1.0 + 1e-9;
    let (bound, max_ratio, holds) = if (p - nf).abs() < 1e-12 {
        let e = (nf - 1.0) / nf;
        let mut ratio: f64 = 0.0;
        let mut ok = true;
        for lc in &leaves {
            let mut s = 0.0;
            for (k, o) in lc.osc.iter().enumerate() {
                s += o;
                let kk = (k + 1) as u64;
                ratio = ratio.max(s / (kk as f64).powf(e));
                ok &= s <= chain_count_bound(kk, n) * tol;
            }
        }
        (Some(chain_constant(n, depth as u64)), ratio, ok)
    } else if p > nf {
        let r = 1.0 - nf / p;
        let b = q0.side().powf(r) / (1.0 - 2f64.powf(-r));
        let worst = leaves.iter().map(|l| l.sum()).fold(0.0, f64::max);
        (Some(b), worst / b, worst <= b * tol)
    } else {
        let worst = leaves.iter().map(|l| l.sum()).fold(0.0, f64::max);
        (None, worst, true)
    };
    Ok(ChainStats { n, p, norm, leaves, count_profile, bound, max_ratio, holds })
}

/// Distribution check of `|f - f_{Q0}|` after normalizing `‖f‖ = 1` with
/// `p = n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionCheck {
    pub norm: f64,
    /// Lerner domination constant.
    pub c_lerner: f64,
    /// `sup_K chain_count_bound(K+1)/K^{(n-1)/n}`.
    pub c_chain: f64,
    /// Constant implied by the decomposition, `c_lerner · c_chain`.
    pub c_implied: f64,
    /// Infimum of the constants that satisfy every row; every larger
    /// constant satisfies them (the rows use `>=`).
    pub c_empirical: f64,
    /// `(K, |{|f - f_Q0| >= C K^{(n-1)/n}}|, 2^{-K})` for the constant passed in.
    pub rows: Vec<(u32, f64, f64)>,
}

impl DistributionCheck {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|&(_, m, b)| m <= b)
    }
}

/// Normalized deviations and masses of leaf cells, descending.
fn normalized_deviations(f: &StepFunction, q0: &DyadicCube, norm: f64) -> Result<Vec<(f64, f64)>> {
    let (field, i0) = local(f, q0, &DyadicMeasure::lebesgue())?;
    let f0 = field.node(i0).mean;
    let mut out: Vec<(f64, f64)> = field
        .leaf_indices()
        .into_iter()
        .map(|j| field.node(j))
        .filter(|nd| q0.contains(&nd.cube) && nd.mass > 0.0)
        .map(|nd| ((nd.value - f0).abs() / norm, nd.mass / q0.volume()))
        .collect();
    out.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(out)
}

/// Runs the check for `K = 1..=k_max`; `c` defaults to the implied constant.
pub fn distribution_check(f: &StepFunction, q0: &DyadicCube, k_max: u32, c: Option<f64>) -> Result<DistributionCheck> {
    let n = q0.dim();
    let norm = local_op_norm(f, q0, n as f64)?;
    if !norm.is_finite() {
        return param("the local norm is infinite");
    }
    let dec = lerner_decomposition(f, q0, &DyadicMeasure::lebesgue())?;
    let c_chain = chain_constant(n, u64::from(k_max));
    let c_implied = dec.domination_constant * c_chain * (1.0 + 1e-9);
    let mut check = DistributionCheck { norm, c_lerner: dec.domination_constant, c_chain, c_implied, c_empirical: 0.0, rows: Vec::new() };
    if norm == 0.0 {
        check.rows = (1..=k_max).map(|k| (k, 0.0, crate::exact::pow2(-(k as i32)))).collect();
        return Ok(check);
    }
    let devs = normalized_deviations(f, q0, norm)?;
    let e = (n as f64 - 1.0) / n as f64;
    let c = c.unwrap_or(c_implied);
    for k in 1..=k_max {
        let scale = f64::from(k).powf(e);
        let allowed = crate::exact::pow2(-(k as i32));
        let thr = c * scale;
        let m: f64 = devs.iter().take_while(|x| x.0 >= thr).map(|x| x.1).sum();
        check.rows.push((k, m, allowed));
        let mut acc = 0.0;
        for &(d, w) in &devs {
            acc += w;
            if acc > allowed {
                check.c_empirical = check.c_empirical.max(d / scale);
                break;
            }
        }
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c1(level: i32, j: i64) -> DyadicCube {
        DyadicCube::std(level, vec![j])
    }

    #[test]
    fn stopping_quarter_indicator() {
        let f = StepFunction::from_leaves(c1(0, 0), [(c1(-2, 0), 1.0)]).unwrap();
        let s = cz_stopping(&f, &c1(0, 0), &DyadicMeasure::lebesgue(), 0.4).unwrap();
        assert_eq!(s.cubes(), &[c1(-1, 0)]);
    }

    #[test]
    fn constant_has_empty_decomposition() {
        let f = StepFunction::constant(c1(0, 0), 2.5).unwrap();
        let d = lerner_decomposition(&f, &c1(0, 0), &DyadicMeasure::lebesgue()).unwrap();
        assert!(d.generations.is_empty());
        assert_eq!(d.domination_constant, 0.0);
        assert!(cz_stopping(&f, &c1(0, 0), &DyadicMeasure::lebesgue(), 0.1).unwrap().is_empty());
    }

    #[test]
    fn count_bound_small_values() {
        // n = 1: K=1 gives 2; K=2 gives 2 + 2.
        assert_eq!(chain_count_bound(1, 1), 2.0);
        assert_eq!(chain_count_bound(2, 1), 4.0);
        // n = 2, K = 4: l=1 term 4, tail 4 * 2^{0} = 4.
        assert_eq!(chain_count_bound(4, 2), 8.0);
    }

    #[test]
    fn staircase_decomposition_verifies() {
        let leaves = (0..5).map(|k| (c1(-k - 1, 1), k as f64));
        let f = StepFunction::from_leaves(c1(0, 0), leaves).unwrap();
        let d = lerner_decomposition(&f, &c1(0, 0), &DyadicMeasure::lebesgue()).unwrap();
        for (k, u) in d.union_fraction.iter().enumerate() {
            assert!(*u <= crate::exact::pow2(-(k as i32)));
        }
        assert!(d.domination_constant > 0.0 && d.domination_constant.is_finite());
    }
}
