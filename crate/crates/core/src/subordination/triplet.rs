//! The characteristic triplet `(β, Γ, μ)` of `X = L(Θ)`:
//!
//! * `β = a_0 b + ∫ E χ(L(θ)) F(dθ)`,
//! * `Γ = a_0 Q`,
//! * `μ(A) = Σ_j a_{0,j} ν_j(η_j^{-1} A) + ∫ P(L(θ) ∈ A) F(dθ)`.
//!
//! Inner expectations are Gaussian-analytic where the law of `L(θ)` is a
//! one-dimensional Gaussian (or for half-spaces without base jumps),
//! otherwise Monte Carlo with antithetic Gaussian draws on a common
//! seed-derived stream, conditioned on the largest Gaussian direction so the
//! integrand stays continuous in `θ`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::f64::consts::{PI, SQRT_2};

use super::SubordinatedProcessSpec;
use crate::base::{truncate_in_place, BaseProcessSpec};
use crate::error::{invalid, Error, Result};
use crate::mc::SeedSchedule;
use crate::quadrature::{integrate, IntegrandBounds, TailBound};
use crate::space::{dot, CovOperator, TruncatedVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes per panel; the gap is measured against half as many.
    pub order: usize,
    /// Antithetic pairs per node for Monte Carlo inner expectations.
    pub inner_pairs: usize,
    /// Bound on the mass discarded by cutting the θ-range.
    pub truncation_tolerance: f64,
    /// Largest accepted refinement gap.
    pub refinement_tolerance: f64,
    pub seed: u64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            order: 16,
            inner_pairs: 4096,
            truncation_tolerance: 1e-8,
            refinement_tolerance: 1e-6,
            seed: 0,
        }
    }
}

impl QuadratureConfig {
    fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(invalid("order", "at least two nodes per panel are required"));
        }
        if self.inner_pairs == 0 {
            return Err(invalid("inner_pairs", "must be positive"));
        }
        if !(self.truncation_tolerance > 0.0 && self.refinement_tolerance > 0.0) {
            return Err(invalid("tolerance", "tolerances must be > 0"));
        }
        Ok(())
    }
}

/// Sets bounded away from the origin on which `μ` is evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum TestSet {
    /// `{x : |x| > radius}`.
    BallComplement { radius: f64 },
    /// `{x : ⟨normal|x⟩ > offset}` with `offset > 0`.
    HalfSpace { normal: TruncatedVector, offset: f64 },
}

impl TestSet {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            TestSet::BallComplement { radius } => dot(x, x) > radius * radius,
            TestSet::HalfSpace { normal, offset } => dot(normal.as_slice(), x) > *offset,
        }
    }

    /// Distance of the set from the origin.
    fn distance(&self) -> f64 {
        match self {
            TestSet::BallComplement { radius } => *radius,
            TestSet::HalfSpace { normal, offset } => offset / normal.norm(),
        }
    }

    fn validate(&self, spec: &SubordinatedProcessSpec) -> Result<()> {
        match self {
            TestSet::BallComplement { radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(invalid("radius", "must be > 0"));
                }
            }
            TestSet::HalfSpace { normal, offset } => {
                spec.layout().ensure_same(normal.layout())?;
                if normal.is_zero() || !(*offset > 0.0) {
                    return Err(invalid("half-space", "needs a nonzero normal and offset > 0"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JumpMass {
    pub value: f64,
    /// Refinement gap of the θ-quadrature.
    pub gap: f64,
    /// Monte Carlo standard error bound of the inner probabilities.
    pub standard_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LargeJumpMean {
    pub value: TruncatedVector,
    pub gap: f64,
    pub standard_error: f64,
}

#[derive(Clone, Debug)]
pub struct SubordinatedTriplet {
    pub beta: TruncatedVector,
    pub gamma: CovOperator,
    /// Refinement gap of the β quadrature.
    pub beta_gap: f64,
    /// Monte Carlo standard error bound of β (0 when inner expectations are
    /// analytic).
    pub beta_standard_error: f64,
    spec: SubordinatedProcessSpec,
    config: QuadratureConfig,
}

fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Inner expectations over the law of `L(θ)`.
struct Inner<'a> {
    base: &'a BaseProcessSpec,
    /// `Some((b, q))` when `L(θ) ~ N(θb, θq)` on a one-dimensional space.
    scalar_gaussian: Option<(f64, f64)>,
    pairs: usize,
    schedule: SeedSchedule,
}

impl<'a> Inner<'a> {
    fn new(base: &'a BaseProcessSpec, config: &QuadratureConfig, label: &str) -> Self {
        let scalar_gaussian = (base.layout().total_dim() == 1 && base.jumps()[0].is_none())
            .then(|| (base.drift().as_slice()[0], base.cov().trace()));
        Self {
            base,
            scalar_gaussian,
            pairs: config.inner_pairs,
            schedule: SeedSchedule::new(config.seed).derive(label),
        }
    }

    /// Monte Carlo average of `f(L(θ))` over antithetic pairs. When `L(θ)`
    /// has a Gaussian part, each draw is a line `a + g·v` with `g ~ N(0, 1)`
    /// integrated analytically by `f(a, Some(v), ·)`, which keeps the
    /// average continuous in `θ`; otherwise `f(x, None, ·)` sees the point.
    ///
    /// `out` holds the averages followed by their standard errors (over
    /// antithetic pair means).
    fn monte_carlo(&self, theta: &[f64], out: &mut [f64], f: impl Fn(&[f64], Option<&[f64]>, &mut [f64])) {
        let n = self.base.layout().total_dim();
        let dim = out.len() / 2;
        let mut rng = self.schedule.stream(0);
        let (mut p, mut m, mut v) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut sum = vec![0.0; dim];
        let mut sum_sq = vec![0.0; dim];
        let (mut fp, mut fm) = (vec![0.0; dim], vec![0.0; dim]);
        let pivot = self.base.gaussian_pivot(theta);
        for _ in 0..self.pairs {
            match pivot {
                Some(pivot) => self
                    .base
                    .sample_line_antithetic(&mut rng, theta, pivot, &mut p, &mut m, &mut v),
                None => self.base.sample_at_antithetic(&mut rng, theta, &mut p, &mut m),
            }
            let line = pivot.map(|_| v.as_slice());
            f(&p, line, &mut fp);
            f(&m, line, &mut fm);
            for k in 0..dim {
                let pair = 0.5 * (fp[k] + fm[k]);
                sum[k] += pair;
                sum_sq[k] += pair * pair;
            }
        }
        let pairs = self.pairs as f64;
        let (values, errors) = out.split_at_mut(dim);
        for k in 0..dim {
            let mean = sum[k] / pairs;
            values[k] = mean;
            errors[k] = if self.pairs > 1 {
                ((sum_sq[k] - pairs * mean * mean).max(0.0) / (pairs * (pairs - 1.0))).sqrt()
            } else {
                0.0
            };
        }
    }

    /// `E χ(L(θ))`, followed by the standard errors.
    fn chi_mean(&self, theta: &[f64], out: &mut [f64]) {
        if let Some((b, q)) = self.scalar_gaussian {
            out[1] = 0.0;
            let (m, s) = (theta[0] * b, (theta[0] * q).sqrt());
            out[0] = if s == 0.0 {
                if m.abs() <= 1.0 {
                    m
                } else {
                    0.0
                }
            } else {
                let (a1, a2) = ((-1.0 - m) / s, (1.0 - m) / s);
                m * (normal_sf(a1) - normal_sf(a2)) + s * (normal_pdf(a1) - normal_pdf(a2))
            };
            return;
        }
        self.monte_carlo(theta, out, line_chi);
    }

    /// `E L(θ) 1{|L(θ)| > 1}`, followed by the standard errors.
    fn large_mean(&self, theta: &[f64], out: &mut [f64]) {
        if self.scalar_gaussian.is_some() {
            self.chi_mean(theta, out);
            let m = self.base.mean_at_one().as_slice()[0] * theta[0];
            out[0] = m - out[0];
            return;
        }
        self.monte_carlo(theta, out, |a, v, o| {
            line_chi(a, v, o);
            o.iter_mut().zip(a).for_each(|(o, a)| *o = a - *o);
        });
    }

    /// `P(L(θ) ∈ A)` and its standard error.
    fn probability(&self, theta: &[f64], set: &TestSet) -> (f64, f64) {
        let gaussian = self.base.jumps().iter().all(|j| j.is_none());
        match set {
            TestSet::BallComplement { radius } if self.scalar_gaussian.is_some() => {
                let (b, q) = self.scalar_gaussian.unwrap();
                let (m, s) = (theta[0] * b, (theta[0] * q).sqrt());
                if s == 0.0 {
                    return (if m.abs() > *radius { 1.0 } else { 0.0 }, 0.0);
                }
                (normal_sf((radius - m) / s) + normal_sf((radius + m) / s), 0.0)
            }
            TestSet::HalfSpace { normal, offset } if gaussian => {
                let mut m = 0.0;
                let mut v = 0.0;
                for (j, &t) in theta.iter().enumerate() {
                    let w = normal.component(j);
                    m += t * dot(w, self.base.drift().component(j));
                    v += t * self.base.cov().component_quadratic(j, w);
                }
                if v == 0.0 {
                    return (if m > *offset { 1.0 } else { 0.0 }, 0.0);
                }
                (normal_sf((offset - m) / v.sqrt()), 0.0)
            }
            _ => {
                let mut p = [0.0; 2];
                self.monte_carlo(theta, &mut p, |a, v, o| o[0] = line_probability(set, a, v));
                (p[0], p[1])
            }
        }
    }
}

/// `{g : |a + g v| ≤ radius}` as an interval (possibly empty or unbounded).
fn ball_interval(a: &[f64], v: &[f64], radius: f64) -> Option<(f64, f64)> {
    let vv = dot(v, v);
    let av = dot(a, v);
    let c = dot(a, a) - radius * radius;
    if vv == 0.0 {
        return (c <= 0.0).then_some((f64::NEG_INFINITY, f64::INFINITY));
    }
    let disc = av * av - vv * c;
    if disc <= 0.0 {
        return None;
    }
    let root = disc.sqrt();
    // Cancellation-free pair of roots.
    let q = -(av + av.signum() * root);
    let (r1, r2) = if q == 0.0 {
        (-root / vv, root / vv)
    } else {
        (q / vv, c / q)
    };
    Some((r1.min(r2), r1.max(r2)))
}

fn sf(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        1.0
    } else if x == f64::INFINITY {
        0.0
    } else {
        normal_sf(x)
    }
}

fn pdf(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        normal_pdf(x)
    }
}

/// `E χ(a + g v)` (or `χ(a)` without a line).
fn line_chi(a: &[f64], v: Option<&[f64]>, o: &mut [f64]) {
    let Some(v) = v else {
        o.copy_from_slice(a);
        truncate_in_place(o);
        return;
    };
    match ball_interval(a, v, 1.0) {
        None => o.iter_mut().for_each(|x| *x = 0.0),
        Some((lo, hi)) => {
            let mass = sf(lo) - sf(hi);
            let shift = pdf(lo) - pdf(hi);
            for ((o, a), v) in o.iter_mut().zip(a).zip(v) {
                *o = a * mass + v * shift;
            }
        }
    }
}

/// `P(a + g v ∈ A)` (or `1{a ∈ A}` without a line).
fn line_probability(set: &TestSet, a: &[f64], v: Option<&[f64]>) -> f64 {
    let Some(v) = v else {
        return if set.contains(a) { 1.0 } else { 0.0 };
    };
    match set {
        TestSet::BallComplement { radius } => match ball_interval(a, v, *radius) {
            None => 1.0,
            Some((lo, hi)) => 1.0 - (sf(lo) - sf(hi)),
        },
        TestSet::HalfSpace { normal, offset } => {
            let s = dot(normal.as_slice(), v);
            let c = offset - dot(normal.as_slice(), a);
            if s == 0.0 {
                if c < 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                sf(c / s.abs())
            }
        }
    }
}

/// Quadrature of an inner expectation writing `dim` values followed by their
/// Monte Carlo standard errors.
struct Estimate {
    value: Vec<f64>,
    gap: f64,
    standard_error: f64,
}

fn integrate_inner<G>(
    measure: &crate::subordinator::LevyMeasure,
    bounds: IntegrandBounds,
    config: &QuadratureConfig,
    dim: usize,
    g: G,
) -> Result<Estimate>
where
    G: Fn(&[f64], &mut [f64]) + Sync + Send,
{
    let integral = integrate(measure, bounds, config.order, config.truncation_tolerance, 2 * dim, g)?;
    let gap = integral.component_gaps[..dim].iter().fold(0.0, |a: f64, b| a.max(*b));
    // Σ w_i·se_i bounds the standard error under any correlation between
    // nodes (they share one stream).
    let standard_error = integral.value[dim..].iter().fold(0.0, |a: f64, b| a.max(*b));
    check_gap(gap, standard_error, config)?;
    Ok(Estimate {
        value: integral.value[..dim].to_vec(),
        gap,
        standard_error,
    })
}

impl SubordinatedTriplet {
    pub(super) fn compute(spec: &SubordinatedProcessSpec, config: &QuadratureConfig) -> Result<Self> {
        config.validate()?;
        let sub = spec.subordinator();
        let base = spec.base();
        let a0 = sub.drift();
        let gamma = base.cov().scale_by_multiindex(a0)?;
        let mut beta = base.drift().scale_by_multiindex(a0)?;
        let measure = sub.levy_measure();
        let mut beta_gap = 0.0;
        let mut beta_standard_error = 0.0;
        if !measure.is_zero() {
            let inner = Inner::new(base, config, "triplet/beta");
            let bounds = IntegrandBounds {
                near_zero: base.growth_bound().c_chi,
                tail: TailBound::Bounded(1.0),
            };
            let n = spec.layout().total_dim();
            let integral = integrate_inner(&measure, bounds, config, n, |t, o| inner.chi_mean(t, o))?;
            beta_gap = integral.gap;
            beta_standard_error = integral.standard_error;
            beta.as_mut_slice()
                .iter_mut()
                .zip(&integral.value)
                .for_each(|(b, x)| *b += x);
        }
        Ok(Self {
            beta,
            gamma,
            beta_gap,
            beta_standard_error,
            spec: spec.clone(),
            config: config.clone(),
        })
    }

    pub fn spec(&self) -> &SubordinatedProcessSpec {
        &self.spec
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.config
    }

    fn second_moment_constant(&self) -> f64 {
        let base = self.spec.base();
        let m = base.mean_at_one().norm();
        let v: f64 = (0..base.layout().components())
            .map(|j| base.component_variance_trace(j))
            .sum();
        v + m * m
    }

    /// `μ(A)`.
    pub fn mu(&self, set: &TestSet) -> Result<JumpMass> {
        set.validate(&self.spec)?;
        let sub = self.spec.subordinator();
        let base = self.spec.base();
        let layout = self.spec.layout();
        let mut drift_part = 0.0;
        for (j, jump) in base.jumps().iter().enumerate() {
            if let Some(jump) = jump {
                let a = sub.drift()[j];
                if a > 0.0 {
                    let mut x = vec![0.0; layout.total_dim()];
                    let range = layout.range(j);
                    drift_part += a * jump.mass_where(|p| {
                        x.iter_mut().for_each(|v| *v = 0.0);
                        x[range.clone()].copy_from_slice(p);
                        set.contains(&x)
                    });
                }
            }
        }
        let measure = sub.levy_measure();
        if measure.is_zero() {
            return Ok(JumpMass {
                value: drift_part,
                gap: 0.0,
                standard_error: 0.0,
            });
        }
        let r = set.distance();
        let inner = Inner::new(base, &self.config, "triplet/mu");
        let bounds = IntegrandBounds {
            near_zero: self.second_moment_constant() / (r * r),
            tail: TailBound::Bounded(1.0),
        };
        let integral = integrate_inner(&measure, bounds, &self.config, 1, |t, o| {
            (o[0], o[1]) = inner.probability(t, set);
        })?;
        Ok(JumpMass {
            value: drift_part + integral.value[0],
            gap: integral.gap,
            standard_error: integral.standard_error,
        })
    }

    /// `∫_{|x|>1} x μ(dx)`. Together with `β` this gives `E X(1)`.
    pub fn large_jump_mean(&self) -> Result<LargeJumpMean> {
        let sub = self.spec.subordinator();
        let base = self.spec.base();
        let mut out = TruncatedVector::zeros(self.spec.layout());
        for (j, jump) in base.jumps().iter().enumerate() {
            if let Some(jump) = jump {
                let a = sub.drift()[j];
                for (o, x) in out.component_mut(j).iter_mut().zip(jump.large_mean()) {
                    *o += a * x;
                }
            }
        }
        let measure = sub.levy_measure();
        if measure.is_zero() {
            return Ok(LargeJumpMean {
                value: out,
                gap: 0.0,
                standard_error: 0.0,
            });
        }
        let g = base.growth_bound();
        let inner = Inner::new(base, &self.config, "triplet/large");
        let bounds = IntegrandBounds {
            near_zero: self.second_moment_constant(),
            tail: TailBound::Linear(g.c1 + g.c2),
        };
        let n = self.spec.layout().total_dim();
        let integral =
            integrate_inner(&measure, bounds, &self.config, n, |t, o| inner.large_mean(t, o)).map_err(|e| match e {
                Error::Unsupported(_) => Error::NotIntegrable {
                    component: 0,
                    case: "∫_{|x|>1} |x| μ(dx) = ∞".into(),
                },
                other => other,
            })?;
        out.as_mut_slice()
            .iter_mut()
            .zip(&integral.value)
            .for_each(|(o, x)| *o += x);
        Ok(LargeJumpMean {
            value: out,
            gap: integral.gap,
            standard_error: integral.standard_error,
        })
    }
}

/// The refinement gap must stay below the tolerance plus the Monte Carlo
/// noise floor: per-draw kinks in `θ` average out only at the `1/√N` rate,
/// so a gap below the noise is not a quadrature failure.
fn check_gap(gap: f64, noise: f64, config: &QuadratureConfig) -> Result<()> {
    if gap > config.refinement_tolerance + noise {
        return Err(Error::Quadrature {
            gap,
            tolerance: config.refinement_tolerance,
        });
    }
    Ok(())
}
