//! Base Lévy processes `L = (L_1, …, L_d)` on the component spaces: Brownian
//! part with drift plus an optional compound-Poisson jump part per component.
//!
//! `b` is the drift of the triplet with truncation `χ(x) = x·1{|x| ≤ 1}`, so
//! `L_j(θ) = θ(b_j - λ_j E χ(J_j)) + √θ Q_j^{1/2} Z + Σ_{k ≤ N(λ_j θ)} J_{j,k}`.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::sampling;
use crate::space::{dot, CovOperator, CovarianceOperator, RankOneTensor, SpaceLayout, TruncatedVector};
use crate::subordinator::pick;

/// Compound-Poisson jumps on one component space, with finitely many jump
/// sizes. All jump moments are exact.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteJumps {
    rate: f64,
    weights: Vec<f64>,
    points: Vec<Vec<f64>>,
}

impl DiscreteJumps {
    pub fn new(rate: f64, weights: Vec<f64>, points: Vec<Vec<f64>>) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(invalid("rate", "jump rate must be > 0"));
        }
        if weights.is_empty() || weights.len() != points.len() {
            return Err(invalid("jumps", "one weight per jump point is required"));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(invalid("weights", "weights must be > 0"));
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(invalid("weights", "weights must sum to 1"));
        }
        let n = points[0].len();
        if points.iter().any(|p| p.len() != n || p.iter().any(|x| !x.is_finite())) {
            return Err(invalid("points", "jump points must share the component dimension"));
        }
        Ok(Self { rate, weights, points })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    fn norm(p: &[f64]) -> f64 {
        dot(p, p).sqrt()
    }

    fn weighted<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.rate
            * self
                .weights
                .iter()
                .zip(&self.points)
                .map(|(w, p)| w * f(p))
                .sum::<f64>()
    }

    /// `∫ (e^{i⟨u|x⟩} - 1 - i⟨u|χ(x)⟩) ν(dx)`.
    pub fn exponent(&self, u: &[f64]) -> Complex64 {
        let i = Complex64::i();
        self.rate
            * self
                .weights
                .iter()
                .zip(&self.points)
                .map(|(w, p)| {
                    let ux = dot(u, p);
                    let small = if Self::norm(p) <= 1.0 { ux } else { 0.0 };
                    w * ((i * ux).exp() - 1.0 - i * small)
                })
                .sum::<Complex64>()
    }

    /// `∫ χ(x) ν(dx)`.
    pub fn small_mean(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|k| self.weighted(|p| if Self::norm(p) <= 1.0 { p[k] } else { 0.0 }))
            .collect()
    }

    /// `∫_{|x|>1} x ν(dx)`.
    pub fn large_mean(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|k| self.weighted(|p| if Self::norm(p) > 1.0 { p[k] } else { 0.0 }))
            .collect()
    }

    /// `∫_{|x|>1} |x| ν(dx)`.
    pub fn large_abs_moment(&self) -> f64 {
        self.weighted(|p| {
            let r = Self::norm(p);
            if r > 1.0 {
                r
            } else {
                0.0
            }
        })
    }

    /// `∫_{|x|≤1} |x|² ν(dx)`.
    pub fn small_second_moment(&self) -> f64 {
        self.weighted(|p| {
            let r2 = dot(p, p);
            if r2 <= 1.0 {
                r2
            } else {
                0.0
            }
        })
    }

    /// `∫ |x|² ν(dx)`.
    pub fn second_moment(&self) -> f64 {
        self.weighted(|p| dot(p, p))
    }

    /// `ν({x : pred(x)})`.
    pub fn mass_where(&self, mut pred: impl FnMut(&[f64]) -> bool) -> f64 {
        let hit: f64 = self
            .weights
            .iter()
            .zip(&self.points)
            .filter_map(|(w, p)| pred(p).then_some(*w))
            .sum();
        self.rate * hit
    }

    /// Symmetric under `x ↦ -x`.
    pub fn is_symmetric(&self) -> bool {
        self.points.iter().zip(&self.weights).all(|(p, w)| {
            self.points
                .iter()
                .zip(&self.weights)
                .any(|(q, v)| (v - w).abs() <= 1e-12 && p.iter().zip(q).all(|(a, b)| a == &-b))
        })
    }

    /// Adds the sum of the jumps over a time span `theta` to `out`.
    fn add_jumps<R: Rng + ?Sized>(&self, rng: &mut R, theta: f64, out: &mut [f64]) {
        let n = sampling::poisson(rng, self.rate * theta);
        for _ in 0..n {
            let k = pick(rng, &self.weights);
            for (o, x) in out.iter_mut().zip(&self.points[k]) {
                *o += x;
            }
        }
    }
}

/// Constants of the linear growth bounds for `f(θ) = E|L(θ)|`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct GrowthBoundConstants {
    /// `E|L(θ)| ≤ |θ| c1 + |θ|^{1/2} c2`.
    pub c1: f64,
    pub c2: f64,
    /// For mean-zero bases: `E|L(θ)| ≤ |θ|^{1/2} c`.
    pub martingale: Option<f64>,
    /// `|E χ(L(θ))| ≤ |θ| c_chi`.
    pub c_chi: f64,
}

/// Specification of the independent base processes `L_1, …, L_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseProcessSpec {
    layout: SpaceLayout,
    drift: TruncatedVector,
    cov: CovOperator,
    jumps: Vec<Option<DiscreteJumps>>,
    /// Per component, `b_j - λ_j E χ(J_j)`: the drift actually added to paths.
    path_drift: TruncatedVector,
}

impl BaseProcessSpec {
    pub fn new(drift: TruncatedVector, cov: CovOperator, jumps: Vec<Option<DiscreteJumps>>) -> Result<Self> {
        let layout = drift.layout().clone();
        layout.ensure_same(cov.layout())?;
        if jumps.len() != layout.components() {
            return Err(invalid("jumps", "one entry per component is required"));
        }
        for (j, jump) in jumps.iter().enumerate() {
            if let Some(jump) = jump {
                if jump.dim() != layout.dim(j) {
                    return Err(Error::LayoutMismatch {
                        expected: vec![layout.dim(j)],
                        found: vec![jump.dim()],
                    });
                }
            }
        }
        let mut path_drift = drift.clone();
        for (j, jump) in jumps.iter().enumerate() {
            if let Some(jump) = jump {
                for (o, m) in path_drift.component_mut(j).iter_mut().zip(jump.small_mean()) {
                    *o -= m;
                }
            }
        }
        Ok(Self {
            layout,
            drift,
            cov,
            jumps,
            path_drift,
        })
    }

    /// Brownian motion with drift `b` and covariance `Q`.
    pub fn gaussian(drift: TruncatedVector, cov: CovOperator) -> Result<Self> {
        let d = drift.layout().components();
        Self::new(drift, cov, vec![None; d])
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn drift(&self) -> &TruncatedVector {
        &self.drift
    }

    pub fn cov(&self) -> &CovOperator {
        &self.cov
    }

    pub fn jumps(&self) -> &[Option<DiscreteJumps>] {
        &self.jumps
    }

    /// `(φ_1(u_1), …, φ_d(u_d))`.
    pub fn levy_exponents(&self, u: &TruncatedVector) -> Result<Vec<Complex64>> {
        self.layout.ensure_same(u.layout())?;
        Ok((0..self.layout.components())
            .map(|j| self.component_exponent(j, u.component(j)))
            .collect())
    }

    /// `φ(u) = Σ_j φ_j(u_j)`, the exponent of `L(1, …, 1)`.
    pub fn levy_exponent(&self, u: &TruncatedVector) -> Result<Complex64> {
        Ok(self.levy_exponents(u)?.into_iter().sum())
    }

    pub fn component_exponent(&self, j: usize, uj: &[f64]) -> Complex64 {
        let mut phi = Complex64::new(
            -0.5 * self.cov.component_quadratic(j, uj),
            dot(uj, self.drift.component(j)),
        );
        if let Some(jump) = &self.jumps[j] {
            phi += jump.exponent(uj);
        }
        phi
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.layout.components() {
            return Err(invalid(
                "theta",
                format!("expected {} entries", self.layout.components()),
            ));
        }
        if theta.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
            return Err(Error::Domain("L(θ) needs θ componentwise >= 0".into()));
        }
        Ok(())
    }

    /// Exact draw of `L(θ)` written into `out` (flat coefficients).
    pub fn sample_at_into<R: Rng + ?Sized>(&self, rng: &mut R, theta: &[f64], out: &mut [f64]) {
        let mut z = Vec::new();
        for (j, &t) in theta.iter().enumerate() {
            let range = self.layout.range(j);
            let block = &mut out[range.clone()];
            for (o, b) in block.iter_mut().zip(self.path_drift.component(j)) {
                *o = t * b;
            }
            if t == 0.0 {
                continue;
            }
            if !self.cov.is_component_zero(j) {
                z.clear();
                z.extend((0..range.len()).map(|_| sampling::standard_normal(rng)));
                self.cov.add_sqrt_applied(j, &z, t.sqrt(), block);
            }
            if let Some(jump) = &self.jumps[j] {
                jump.add_jumps(rng, t, block);
            }
        }
    }

    pub fn sample_at<R: Rng + ?Sized>(&self, rng: &mut R, theta: &[f64]) -> Result<TruncatedVector> {
        self.check_theta(theta)?;
        let mut out = vec![0.0; self.layout.total_dim()];
        self.sample_at_into(rng, theta, &mut out);
        TruncatedVector::from_flat(&self.layout, out)
    }

    /// Antithetic pair: same jumps, Gaussian parts `±√θ Q^{1/2} Z`.
    pub fn sample_at_antithetic<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        theta: &[f64],
        plus: &mut [f64],
        minus: &mut [f64],
    ) {
        let mut z = Vec::new();
        for (j, &t) in theta.iter().enumerate() {
            let range = self.layout.range(j);
            let (p, m) = (&mut plus[range.clone()], &mut minus[range.clone()]);
            for ((a, c), b) in p.iter_mut().zip(m.iter_mut()).zip(self.path_drift.component(j)) {
                *a = t * b;
                *c = t * b;
            }
            if t == 0.0 {
                continue;
            }
            if let Some(jump) = &self.jumps[j] {
                jump.add_jumps(rng, t, p);
                m.copy_from_slice(p);
            }
            if !self.cov.is_component_zero(j) {
                z.clear();
                z.extend((0..range.len()).map(|_| sampling::standard_normal(rng)));
                self.cov.add_sqrt_applied(j, &z, t.sqrt(), p);
                self.cov.add_sqrt_applied(j, &z, -t.sqrt(), m);
            }
        }
    }

    /// Largest Gaussian direction of `L(θ)`: the `(component, eigen-index)`
    /// maximizing `θ_j λ_{j,k}`, or `None` if `L(θ)` has no Gaussian part.
    pub(crate) fn gaussian_pivot(&self, theta: &[f64]) -> Option<(usize, usize)> {
        let mut best = None;
        let mut top = 0.0;
        for (j, &t) in theta.iter().enumerate() {
            for (k, &l) in self.cov.eigenvalues(j).iter().enumerate() {
                if t * l > top {
                    top = t * l;
                    best = Some((j, k));
                }
            }
        }
        best
    }

    /// Antithetic pair of `L(θ)` with the Gaussian coordinate `pivot` left
    /// out: `L(θ) = plus + g·line` (resp. `minus + g·line`) with
    /// `g ~ N(0, 1)` independent of the draw.
    pub(crate) fn sample_line_antithetic<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        theta: &[f64],
        pivot: (usize, usize),
        plus: &mut [f64],
        minus: &mut [f64],
        line: &mut [f64],
    ) {
        let mut z = Vec::new();
        for (j, &t) in theta.iter().enumerate() {
            let range = self.layout.range(j);
            let (p, m) = (&mut plus[range.clone()], &mut minus[range.clone()]);
            for ((a, c), b) in p.iter_mut().zip(m.iter_mut()).zip(self.path_drift.component(j)) {
                *a = t * b;
                *c = t * b;
            }
            let l = &mut line[range.clone()];
            l.iter_mut().for_each(|x| *x = 0.0);
            if t == 0.0 {
                continue;
            }
            if let Some(jump) = &self.jumps[j] {
                jump.add_jumps(rng, t, p);
                m.copy_from_slice(p);
            }
            if !self.cov.is_component_zero(j) {
                z.clear();
                z.extend((0..range.len()).map(|_| sampling::standard_normal(rng)));
                if pivot.0 == j {
                    let mut e = vec![0.0; range.len()];
                    e[pivot.1] = 1.0;
                    self.cov.add_sqrt_applied(j, &e, t.sqrt(), l);
                    z[pivot.1] = 0.0;
                }
                self.cov.add_sqrt_applied(j, &z, t.sqrt(), p);
                self.cov.add_sqrt_applied(j, &z, -t.sqrt(), m);
            }
        }
    }

    /// `E L(1, …, 1) = b + ∫_{|x|>1} x ν(dx)`.
    pub fn mean_at_one(&self) -> TruncatedVector {
        let mut m = self.drift.clone();
        for (j, jump) in self.jumps.iter().enumerate() {
            if let Some(jump) = jump {
                for (o, x) in m.component_mut(j).iter_mut().zip(jump.large_mean()) {
                    *o += x;
                }
            }
        }
        m
    }

    /// `Cov L(1, …, 1) = Q + ∫ x⊗x ν(dx)`, as `Q` plus rank-one terms.
    pub fn cov_at_one(&self) -> Result<CovarianceOperator> {
        let mut out = CovarianceOperator::from_spectral(self.cov.clone());
        for (j, jump) in self.jumps.iter().enumerate() {
            if let Some(jump) = jump {
                for (w, p) in jump.weights.iter().zip(&jump.points) {
                    let mut x = TruncatedVector::zeros(&self.layout);
                    x.component_mut(j).copy_from_slice(p);
                    out.push(jump.rate * w, RankOneTensor::new(x.clone(), x)?)?;
                }
            }
        }
        Ok(out)
    }

    /// `E|L_j(1) - E L_j(1)|² = tr Q_j + ∫|x|² ν_j(dx)`.
    pub fn component_variance_trace(&self, j: usize) -> f64 {
        self.cov.component_trace(j) + self.jumps[j].as_ref().map_or(0.0, |x| x.second_moment())
    }

    /// `L_j = 0` almost surely.
    pub fn is_component_trivial(&self, j: usize) -> bool {
        self.drift.component(j).iter().all(|&x| x == 0.0) && self.cov.is_component_zero(j) && self.jumps[j].is_none()
    }

    pub fn is_component_mean_zero(&self, j: usize) -> bool {
        self.mean_at_one().component(j).iter().all(|&x| x == 0.0)
    }

    pub fn is_component_gaussian(&self, j: usize) -> bool {
        self.jumps[j].is_none()
    }

    pub fn is_mean_zero(&self) -> bool {
        self.mean_at_one().is_zero()
    }

    /// Law of `L(θ)` symmetric: zero drift and symmetric jumps.
    pub fn is_symmetric(&self) -> bool {
        self.drift.is_zero() && self.jumps.iter().flatten().all(|j| j.is_symmetric())
    }

    pub fn growth_bound(&self) -> GrowthBoundConstants {
        let jumps = self.jumps.iter().flatten();
        let large: f64 = jumps.clone().map(|j| j.large_abs_moment()).sum();
        let small: f64 = jumps.clone().map(|j| j.small_second_moment()).sum();
        let full: f64 = jumps.map(|j| j.second_moment()).sum();
        let trace = self.cov.trace();
        let m = self.mean_at_one().norm();
        let v = trace + full;
        GrowthBoundConstants {
            c1: self.drift.norm() + large,
            c2: (trace + small).sqrt(),
            martingale: self.is_mean_zero().then(|| v.sqrt()),
            c_chi: (m + m * m + v).max(1.0),
        }
    }
}

/// `χ(x) = x·1{|x| ≤ 1}` applied in place.
pub fn truncate_in_place(x: &mut [f64]) {
    if dot(x, x) > 1.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{MeanAccumulator, SeedSchedule};

    fn gaussian_n2() -> BaseProcessSpec {
        let l = SpaceLayout::single(2).unwrap();
        BaseProcessSpec::gaussian(TruncatedVector::zeros(&l), CovOperator::identity(&l)).unwrap()
    }

    #[test]
    fn exponent_examples() {
        let spec = gaussian_n2();
        let l = spec.layout().clone();
        assert_eq!(
            spec.levy_exponent(&TruncatedVector::zeros(&l)).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        let e1 = TruncatedVector::basis(&l, 0, 0);
        assert_eq!(spec.levy_exponent(&e1).unwrap(), Complex64::new(-0.5, 0.0));

        let drift = BaseProcessSpec::gaussian(e1.clone(), CovOperator::zero(&l)).unwrap();
        assert_eq!(drift.levy_exponent(&e1).unwrap(), Complex64::new(0.0, 1.0));
    }

    #[test]
    fn layout_mismatch_is_reported() {
        let spec = gaussian_n2();
        let other = TruncatedVector::zeros(&SpaceLayout::single(3).unwrap());
        assert!(matches!(spec.levy_exponent(&other), Err(Error::LayoutMismatch { .. })));
    }

    #[test]
    fn theta_zero_gives_zero() {
        let l = SpaceLayout::new(vec![2, 1]).unwrap();
        let spec = BaseProcessSpec::new(
            TruncatedVector::from_components(vec![vec![1.0, 2.0], vec![3.0]]).unwrap(),
            CovOperator::identity(&l),
            vec![None, Some(DiscreteJumps::new(2.0, vec![1.0], vec![vec![0.5]]).unwrap())],
        )
        .unwrap();
        let mut rng = SeedSchedule::new(1).stream(0);
        assert!(spec.sample_at(&mut rng, &[0.0, 0.0]).unwrap().is_zero());
        assert!(matches!(spec.sample_at(&mut rng, &[-1.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn compensated_jumps_match_mean_formula() {
        // Small jumps 0.5 at rate 2: path drift b - 1, mean b.
        let l = SpaceLayout::single(1).unwrap();
        let spec = BaseProcessSpec::new(
            TruncatedVector::from_flat(&l, vec![0.3]).unwrap(),
            CovOperator::zero(&l),
            vec![Some(
                DiscreteJumps::new(2.0, vec![0.5, 0.5], vec![vec![0.5], vec![3.0]]).unwrap(),
            )],
        )
        .unwrap();
        // b + λ·E[J 1{|J|>1}] = 0.3 + 2·0.5·3
        assert!((spec.mean_at_one().as_slice()[0] - 3.3).abs() < 1e-15);
        let mut rng = SeedSchedule::new(9).stream(0);
        let mut acc = MeanAccumulator::default();
        for _ in 0..100_000 {
            acc.push(spec.sample_at(&mut rng, &[1.0]).unwrap().as_slice()[0]);
        }
        assert!((acc.mean() - 3.3).abs() < 4.0 * acc.standard_error());
        // Var = λ E J² = 2·(0.125 + 4.5)
        let var = spec.cov_at_one().unwrap().to_dense()[0];
        assert!((var - 9.25).abs() < 1e-12);
        assert!((acc.variance() - var).abs() < 0.05 * var);
    }

    #[test]
    fn gaussian_second_moment_is_theta_trace() {
        let spec = gaussian_n2();
        let mut rng = SeedSchedule::new(2).stream(0);
        let mut acc = MeanAccumulator::default();
        for _ in 0..100_000 {
            acc.push(spec.sample_at(&mut rng, &[1.5]).unwrap().norm_sqr());
        }
        assert!((acc.mean() - 3.0).abs() < 4.0 * acc.standard_error());
    }

    #[test]
    fn growth_constants_examples() {
        let l = SpaceLayout::single(1).unwrap();
        let b = TruncatedVector::from_flat(&l, vec![-2.0]).unwrap();
        let drift = BaseProcessSpec::gaussian(b, CovOperator::zero(&l))
            .unwrap()
            .growth_bound();
        assert_eq!((drift.c1, drift.c2), (2.0, 0.0));

        let g = BaseProcessSpec::gaussian(TruncatedVector::zeros(&l), CovOperator::identity(&l))
            .unwrap()
            .growth_bound();
        assert_eq!((g.c1, g.c2, g.martingale), (0.0, 1.0, Some(1.0)));

        // Uncompensated unit jumps: triplet drift b = λ·1.
        let cp = BaseProcessSpec::new(
            TruncatedVector::from_flat(&l, vec![1.0]).unwrap(),
            CovOperator::zero(&l),
            vec![Some(DiscreteJumps::new(1.0, vec![1.0], vec![vec![1.0]]).unwrap())],
        )
        .unwrap();
        let k = cp.growth_bound();
        assert_eq!((k.c1, k.c2), (1.0, 1.0));
        assert!(cp.path_drift.is_zero());
    }

    #[test]
    fn antithetic_pair_has_mirrored_gaussian_part() {
        let spec = gaussian_n2();
        let mut rng = SeedSchedule::new(4).stream(0);
        let (mut p, mut m) = (vec![0.0; 2], vec![0.0; 2]);
        spec.sample_at_antithetic(&mut rng, &[2.0], &mut p, &mut m);
        assert_eq!(p[0], -m[0]);
        assert_eq!(p[1], -m[1]);
    }

    #[test]
    fn jump_symmetry_detection() {
        let sym = DiscreteJumps::new(1.0, vec![0.5, 0.5], vec![vec![1.0], vec![-1.0]]).unwrap();
        let asym = DiscreteJumps::new(1.0, vec![0.5, 0.5], vec![vec![1.0], vec![-2.0]]).unwrap();
        assert!(sym.is_symmetric());
        assert!(!asym.is_symmetric());
    }
}
