//! Weak norms in the upper half-space and their dyadic brackets.

use crate::cube::{Ball, DyadicCube, ShiftedLatticeFamily};
use crate::error::{param, Error, Result};
use crate::exact::pow2;
use crate::function::{DyadicMeasure, Field, PiecewiseLinear1D, StepFunction};
use crate::norms::{lp_norm, profile_norm, Exactness};
use crate::profile::{build_lattice_profile, profile_sup, Kind, LambdaProfile, LevelWindow, ProfileParams, TailFamily, TailKind};

/// `∫_{t0}^{t1} t^{-1-γ} dt`.
pub fn nu_gamma_slab(t0: f64, t1: f64, gamma: f64) -> f64 {
    (t0.powf(-gamma) - t1.powf(-gamma)) / gamma
}

/// `ν_γ(Q × (ℓ, 2ℓ]) = μ(Q) (ℓ^{-γ} - (2ℓ)^{-γ}) / γ`.
pub fn nu_gamma_box(q: &DyadicCube, gamma: f64, mu: &DyadicMeasure) -> Result<f64> {
    if gamma == 0.0 || !gamma.is_finite() {
        return param("gamma must be finite and nonzero");
    }
    let mass = match mu.density() {
        None => q.volume(),
        Some(d) => Field::new(&d.map(|_| 1.0), mu)?.stats_any(q).mass,
    };
    let l = q.side();
    Ok(mass * l.powf(-gamma) * (1.0 - 2f64.powf(-gamma)) / gamma)
}

/// Sampling of the strip: one `x` per cube center at level `k` (after
/// `refine` halvings) and `t_samples · 2^refine` heights in `(ℓ, 2ℓ]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleOptions {
    pub t_samples: usize,
    pub refine: u32,
    /// Box levels sampled; `None` picks a default around the function.
    pub levels: Option<(i32, i32)>,
    /// Levels added below the finest leaf and above the root by default.
    pub margin: i32,
    pub keep_samples: bool,
    pub max_samples: usize,
    pub quadrature_tol: f64,
}

impl Default for SampleOptions {
    fn default() -> SampleOptions {
        SampleOptions {
            t_samples: 4,
            refine: 0,
            levels: None,
            margin: 6,
            keep_samples: false,
            max_samples: 1 << 22,
            quadrature_tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HalfspaceEstimate {
    /// Standard-lattice norm.
    pub lower: f64,
    /// Max over the lattice family.
    pub upper: f64,
    pub per_lattice: Vec<f64>,
    pub sample_estimate: f64,
    /// `max(lower/est, est/upper, 1)`.
    pub slack: f64,
    /// Empirical bracketing constants `est/lower` and `upper/est`.
    pub c_lower: f64,
    pub c_upper: f64,
    pub dyadic_complete: bool,
    pub exactness: Exactness,
    pub levels: (i32, i32),
    pub sample_count: usize,
    /// `(x, t, a(x,t))` when requested.
    pub samples: Vec<(Vec<f64>, f64, f64)>,
    pub notes: Vec<String>,
}

fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        if b == 0.0 {
            1.0
        } else {
            0.0
        }
    } else if b == 0.0 {
        f64::INFINITY
    } else {
        a / b
    }
}

/// Bracket `‖t^{γ/p} S(f, B(x,t))‖_{L^{p,∞}(ν_γ)}` between dyadic norms,
/// with `S` the ball mean or the ball oscillation.
pub fn continuous_weak_norm_bounds(
    f: &StepFunction,
    mu: &DyadicMeasure,
    p: f64,
    gamma: f64,
    kind: Kind,
    fam: &ShiftedLatticeFamily,
    window: &LevelWindow,
) -> Result<HalfspaceEstimate> {
    continuous_weak_norm_bounds_with(f, mu, p, gamma, kind, fam, window, &SampleOptions::default())
}

#[allow(clippy::too_many_arguments)]
pub fn continuous_weak_norm_bounds_with(
    f: &StepFunction,
    mu: &DyadicMeasure,
    p: f64,
    gamma: f64,
    kind: Kind,
    fam: &ShiftedLatticeFamily,
    window: &LevelWindow,
    opts: &SampleOptions,
) -> Result<HalfspaceEstimate> {
    if !mu.is_doubling() {
        return Err(Error::Refused(
            "ball and cube averages are comparable only for doubling measures; mark the measure as doubling".into(),
        ));
    }
    if gamma == 0.0 {
        return param("gamma must be nonzero");
    }
    let params = ProfileParams::new(gamma, gamma, p, kind)?;
    let field = Field::new(f, mu)?;
    let mut notes = Vec::new();
    let mut per_lattice = Vec::new();
    let mut complete = true;
    for t in fam.lattices() {
        let prof = build_lattice_profile(&field, t, &params, window)?;
        complete &= prof.complete;
        per_lattice.push(profile_norm(&prof, p, "lattice").value);
    }
    let lower = per_lattice[0];
    let upper = per_lattice.iter().copied().fold(0.0, f64::max);
    if kind == Kind::Mean && f.leaves().iter().any(|x| x.1 < 0.0) {
        notes.push("mean comparison is stated for nonnegative functions".into());
    }
    let n = f.dim();
    let levels = opts.levels.unwrap_or_else(|| {
        // The sampled heights follow the dyadic window where it is bounded.
        let lo = (f.min_leaf_level() - opts.margin).max(window.k_min);
        let hi = (f.root().level + opts.margin).min(window.k_max);
        (lo.min(hi), hi)
    });
    let exact = n == 1;
    let scale_exp = gamma / p;
    let mut value = |x: &[f64], t: f64| -> Result<f64> {
        let s = if exact {
            field.interval_stats(x[0] - t, x[0] + t)
        } else {
            field.ball_stats(&Ball::new(x.to_vec(), t)?, opts.quadrature_tol, 1 << 16)?
        };
        let stat = match kind {
            Kind::Mean => s.mean.abs(),
            Kind::Osc => s.osc,
        };
        Ok(t.powf(scale_exp) * stat)
    };
    let mass_of = |q: &DyadicCube| field.stats(q).mass;
    let (prof, count, samples) = sample_strip(f.root(), levels, gamma, opts, mass_of, &mut value)?;
    let est = profile_sup(&prof, p).value.powf(1.0 / p);
    let slack = ratio(lower, est).max(ratio(est, upper)).max(1.0);
    if !complete {
        notes.push("dyadic profiles truncated".into());
    }
    Ok(HalfspaceEstimate {
        lower,
        upper,
        per_lattice,
        sample_estimate: est,
        slack,
        c_lower: ratio(est, lower),
        c_upper: ratio(upper, est),
        dyadic_complete: complete,
        exactness: if exact { Exactness::Truncated } else { Exactness::Quadrature },
        levels,
        sample_count: count,
        samples,
        notes,
    })
}

type Sample = (Vec<f64>, f64, f64);

/// Samples the boxes over standard cubes of levels in `levels` that lie
/// within `2^{k+1}` of `support`, returning the `(value, ν-weight)` profile.
fn sample_strip(
    support: &DyadicCube,
    levels: (i32, i32),
    gamma: f64,
    opts: &SampleOptions,
    mass_of: impl Fn(&DyadicCube) -> f64,
    value: &mut impl FnMut(&[f64], f64) -> Result<f64>,
) -> Result<(LambdaProfile, usize, Vec<Sample>)> {
    let n = support.dim();
    let (k_lo, k_hi) = levels;
    if k_lo > k_hi {
        return param("empty sampling window");
    }
    let sub = 1i64 << opts.refine;
    let nt = opts.t_samples.max(1) * sub as usize;
    let bounds: Vec<(f64, f64)> = (0..n).map(|d| support.bounds_f64(d)).collect();
    let mut steps = Vec::new();
    let mut kept = Vec::new();
    let mut count = 0usize;
    for k in k_lo..=k_hi {
        let side = pow2(k);
        let pad = 2.0 * side;
        let ranges: Vec<(i64, i64)> = bounds
            .iter()
            .map(|&(lo, hi)| (((lo - pad) / side).floor() as i64, ((hi + pad) / side).ceil() as i64))
            .collect();
        let per_level: usize = ranges.iter().map(|r| (r.1 - r.0) as usize * sub as usize).product::<usize>() * nt;
        count += per_level;
        if count > opts.max_samples {
            return Err(Error::Budget(format!("half-space sampling needs more than {} samples", opts.max_samples)));
        }
        let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        loop {
            let q = DyadicCube::std(k, idx.clone());
            let m = mass_of(&q) / (sub.pow(n as u32)) as f64;
            // Sub-cells of q.
            let cells = sub.pow(n as u32);
            for c in 0..cells {
                let mut x = Vec::with_capacity(n);
                let mut r = c;
                for d in 0..n {
                    let off = r % sub;
                    r /= sub;
                    x.push((idx[d] as f64 + (off as f64 + 0.5) / sub as f64) * side);
                }
                for j in 0..nt {
                    let t0 = side * (1.0 + j as f64 / nt as f64);
                    let t1 = side * (1.0 + (j + 1) as f64 / nt as f64);
                    let t = 0.5 * (t0 + t1);
                    let a = value(&x, t)?;
                    let w = m * nu_gamma_slab(t0, t1, gamma);
                    if a > 0.0 && w > 0.0 {
                        steps.push((a, w));
                    }
                    if opts.keep_samples {
                        kept.push((x.clone(), t, a));
                    }
                }
            }
            let mut d = 0;
            while d < n {
                idx[d] += 1;
                if idx[d] < ranges[d].1 {
                    break;
                }
                idx[d] = ranges[d].0;
                d += 1;
            }
            if d == n {
                break;
            }
        }
    }
    let window = LevelWindow::levels(k_lo, k_hi)?;
    Ok((LambdaProfile::new(steps, Vec::new(), window), count, kept))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SobolevReport {
    pub p: f64,
    pub gradient_lp: f64,
    /// `‖F‖` with `γ1 = 0, γ2 = p` over all dyadic intervals.
    pub dyadic_norm: f64,
    /// Sampled `‖O(F, B(x,t))‖_{L^{p,∞}(ν_p)}`.
    pub halfspace_estimate: f64,
    /// `dyadic_norm / gradient_lp`.
    pub ratio: f64,
    pub halfspace_ratio: f64,
}

/// Levels above the root of the derivative enumerated explicitly.
const ANCESTOR_LEVELS: i32 = 64;

/// Exact dyadic profile of the primitive `F = ∫ g`.
pub fn primitive_profile(g: &StepFunction, p: f64) -> Result<LambdaProfile> {
    if g.dim() != 1 {
        return param("primitives are one-dimensional");
    }
    let big_f = PiecewiseLinear1D::new(g.clone(), 0.0)?;
    let field = Field::lebesgue(g);
    let weight = |q: &DyadicCube| q.side().powf(-p) * q.volume();
    let mut steps = Vec::new();
    let mut tails = Vec::new();
    for nd in field.nodes() {
        let o = big_f.cube_stats(&nd.cube).osc;
        if o > 0.0 {
            steps.push((o, weight(&nd.cube)));
        }
        if nd.is_leaf() && nd.value != 0.0 {
            // Below a leaf F is linear: O = |g| ℓ / 4, 2^r intervals at depth r.
            let l = pow2(nd.cube.level - 1);
            let t = TailFamily::simple(TailKind::Analytic, nd.value.abs() * l / 4.0, 0.5, 2.0 * l.powf(1.0 - p), 2f64.powf(p), None)
                .with_origin(nd.cube.clone(), Some(0));
            tails.push(t);
        }
    }
    let mut a = g.root().clone();
    for _ in 0..ANCESTOR_LEVELS {
        a = a.parent();
        let o = big_f.cube_stats(&a).osc;
        if o > 0.0 {
            steps.push((o, weight(&a)));
        }
    }
    let mut prof = LambdaProfile::new(steps, tails, LevelWindow::full());
    prof.notes.push(format!("ancestors beyond {ANCESTOR_LEVELS} levels above the support are omitted"));
    Ok(prof)
}

pub fn sobolev_side_check_1d(g: &StepFunction, p: f64) -> Result<SobolevReport> {
    if !(p > 1.0) || !p.is_finite() {
        return param("need 1 < p < ∞");
    }
    let gradient_lp = lp_norm(g, &DyadicMeasure::lebesgue(), p)?.value;
    if g.is_zero() {
        return Ok(SobolevReport { p, gradient_lp, dyadic_norm: 0.0, halfspace_estimate: 0.0, ratio: 0.0, halfspace_ratio: 0.0 });
    }
    let prof = primitive_profile(g, p)?;
    let dyadic_norm = profile_sup(&prof, p).value.powf(1.0 / p);
    let big_f = PiecewiseLinear1D::new(g.clone(), 0.0)?;
    let opts = SampleOptions::default();
    let levels = (g.min_leaf_level() - opts.margin, g.root().level + opts.margin);
    let mut value = |x: &[f64], t: f64| -> Result<f64> { Ok(big_f.interval_stats(x[0] - t, x[0] + t).osc) };
    let (hp, _, _) = sample_strip(g.root(), levels, p, &opts, |q| q.volume(), &mut value)?;
    let halfspace_estimate = profile_sup(&hp, p).value.powf(1.0 / p);
    Ok(SobolevReport {
        p,
        gradient_lp,
        dyadic_norm,
        halfspace_estimate,
        ratio: ratio(dyadic_norm, gradient_lp),
        halfspace_ratio: ratio(halfspace_estimate, gradient_lp),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_box_measure() {
        let q = DyadicCube::std(0, vec![0]);
        assert_eq!(nu_gamma_box(&q, 1.0, &DyadicMeasure::lebesgue()).unwrap(), 0.5);
        let q2 = q.parent();
        let r = nu_gamma_box(&q2, 1.0, &DyadicMeasure::lebesgue()).unwrap() / 0.5;
        assert!((r - 2f64.powf(1.0 - 1.0)).abs() < 1e-15);
        assert!(nu_gamma_box(&q, 0.0, &DyadicMeasure::lebesgue()).is_err());
    }

    #[test]
    fn box_measure_matches_quadrature() {
        let q = DyadicCube::std(-3, vec![5]);
        let gamma = 0.7;
        let exact = nu_gamma_box(&q, gamma, &DyadicMeasure::lebesgue()).unwrap();
        let (a, b) = (q.side(), 2.0 * q.side());
        let m = 200_000;
        let h = (b - a) / m as f64;
        let quad: f64 = (0..m).map(|i| (a + (i as f64 + 0.5) * h).powf(-1.0 - gamma) * h).sum::<f64>() * q.volume();
        assert!((quad - exact).abs() / exact < 1e-9);
    }

    #[test]
    fn zero_function_brackets() {
        let f = StepFunction::zero(1);
        let fam = ShiftedLatticeFamily::new(1);
        let est = continuous_weak_norm_bounds(&f, &DyadicMeasure::lebesgue(), 2.0, 1.0, Kind::Mean, &fam, &LevelWindow::full()).unwrap();
        assert_eq!((est.lower, est.upper, est.sample_estimate, est.slack), (0.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn refuses_without_doubling() {
        let d = StepFunction::constant(DyadicCube::std(0, vec![0]), 2.0).unwrap();
        let mu = DyadicMeasure::from_density(d).unwrap();
        let f = StepFunction::constant(DyadicCube::std(0, vec![0]), 1.0).unwrap();
        let fam = ShiftedLatticeFamily::new(1);
        let r = continuous_weak_norm_bounds(&f, &mu, 2.0, 1.0, Kind::Mean, &fam, &LevelWindow::full());
        assert!(matches!(r, Err(Error::Refused(_))));
    }
}
