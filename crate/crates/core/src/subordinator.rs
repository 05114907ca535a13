//! d-variate subordinators: Laplace exponents, Lévy measures, exact
//! increment samplers and moments.

use num_complex::Complex64;
use rand::Rng;
use statrs::function::gamma::gamma as gamma_fn;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::sampling;

/// One-dimensional jump laws from which every supported subordinator is
/// assembled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UnivariateSubordinator {
    /// Lévy density `s / sqrt(2π θ³) · exp(-c²θ/2)`, Laplace exponent
    /// `s (c - sqrt(c² - 2v))`. `c = 0` is the degenerate case and is routed
    /// to the 1/2-stable law with the same exponent.
    InverseGaussian { s: f64, c: f64 },
    /// One-sided stable, `alpha ∈ (0,1)`, Laplace exponent `-scale·(-v)^alpha`.
    Stable { alpha: f64, scale: f64 },
    /// Gamma process with unit rate, Lévy density `shape·θ⁻¹·e^{-θ}`.
    Gamma { shape: f64 },
}

impl UnivariateSubordinator {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::InverseGaussian { s, c } => {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(invalid("s", "inverse Gaussian s must be > 0"));
                }
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(invalid("c", "inverse Gaussian c must be >= 0"));
                }
            }
            Self::Stable { alpha, scale } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(invalid("alpha", "one-sided stable index must lie in (0,1)"));
                }
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(invalid("scale", "stable scale must be > 0"));
                }
            }
            Self::Gamma { shape } => {
                if !(shape > 0.0 && shape.is_finite()) {
                    return Err(invalid("shape", "gamma shape must be > 0"));
                }
            }
        }
        Ok(())
    }

    /// The law actually simulated: degenerate inverse Gaussian becomes
    /// 1/2-stable, `s(0 - sqrt(-2v)) = -s·sqrt(2)·(-v)^{1/2}`.
    pub fn canonical(&self) -> Self {
        match *self {
            Self::InverseGaussian { s, c: 0.0 } => Self::Stable {
                alpha: 0.5,
                scale: s * std::f64::consts::SQRT_2,
            },
            other => other,
        }
    }

    /// `ψ(v)` for `Re v <= 0`.
    pub fn laplace_exponent(&self, v: Complex64) -> Complex64 {
        match *self {
            Self::InverseGaussian { s, c } => s * (c - (Complex64::from(c * c) - 2.0 * v).sqrt()),
            Self::Stable { alpha, scale } => {
                if v == Complex64::new(0.0, 0.0) {
                    Complex64::new(0.0, 0.0)
                } else {
                    -scale * (alpha * (-v).ln()).exp()
                }
            }
            Self::Gamma { shape } => -shape * (1.0 - v).ln(),
        }
    }

    /// Lévy density at `theta > 0`.
    pub fn levy_density(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::InverseGaussian { s, c } => s / (2.0 * PI * theta.powi(3)).sqrt() * (-0.5 * c * c * theta).exp(),
            Self::Stable { alpha, scale } => scale * alpha / gamma_fn(1.0 - alpha) * theta.powf(-1.0 - alpha),
            Self::Gamma { shape } => shape * (-theta).exp() / theta,
        }
    }

    /// Upper bound on the tail mass `F((r, ∞))`.
    pub fn tail_mass_bound(&self, r: f64) -> f64 {
        match *self {
            Self::InverseGaussian { s, c } => {
                let k = s / (2.0 * PI).sqrt();
                let no_damping = 2.0 * k / r.sqrt();
                if c == 0.0 {
                    no_damping
                } else {
                    let damped = k * r.powf(-1.5) * 2.0 / (c * c) * (-0.5 * c * c * r).exp();
                    no_damping.min(damped)
                }
            }
            Self::Stable { alpha, scale } => scale * r.powf(-alpha) / gamma_fn(1.0 - alpha),
            Self::Gamma { shape } => shape * (-r).exp() / r,
        }
    }

    /// Upper bound on `∫_0^{r} θ F(dθ)`.
    pub fn first_moment_below_bound(&self, r: f64) -> f64 {
        match *self {
            Self::InverseGaussian { s, .. } => 2.0 * s / (2.0 * PI).sqrt() * r.sqrt(),
            Self::Stable { alpha, scale } => {
                scale * alpha / gamma_fn(1.0 - alpha) * r.powf(1.0 - alpha) / (1.0 - alpha)
            }
            Self::Gamma { shape } => shape * r,
        }
    }

    /// Upper bound on `∫_r^∞ θ F(dθ)`; infinite when `Θ` has no mean.
    pub fn first_moment_above_bound(&self, r: f64) -> f64 {
        match *self {
            Self::InverseGaussian { s, c } if c > 0.0 => {
                s / (2.0 * PI).sqrt() * r.powf(-0.5) * 2.0 / (c * c) * (-0.5 * c * c * r).exp()
            }
            Self::Gamma { shape } => shape * (-r).exp(),
            _ => f64::INFINITY,
        }
    }

    /// Draw of the increment over a time step `dt`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, dt: f64) -> f64 {
        match self.canonical() {
            Self::InverseGaussian { s, c } => {
                let sd = s * dt;
                sampling::inverse_gaussian(rng, sd / c, sd * sd)
            }
            Self::Stable { alpha, scale } => (scale * dt).powf(1.0 / alpha) * sampling::positive_stable(rng, alpha),
            Self::Gamma { shape } => sampling::gamma(rng, shape * dt),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::InverseGaussian { s, c } if c > 0.0 => s / c,
            Self::Gamma { shape } => shape,
            _ => f64::INFINITY,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::InverseGaussian { s, c } if c > 0.0 => s / c.powi(3),
            Self::Gamma { shape } => shape,
            _ => f64::INFINITY,
        }
    }

    /// Supremum of the powers `p` with `E Θ(1)^p < ∞`.
    pub fn tail_power(&self) -> f64 {
        match self.canonical() {
            Self::Stable { alpha, .. } => alpha,
            _ => f64::INFINITY,
        }
    }
}

/// Jump distribution of a compound-Poisson subordinator, on `ℝ₊^d`.
#[derive(Clone, Debug, PartialEq)]
pub enum JumpLaw {
    /// Finitely many jump sizes with probabilities `weights`.
    Atoms { weights: Vec<f64>, points: Vec<Vec<f64>> },
    /// `J = E·direction` with `E` exponential of the given mean.
    Exponential { direction: Vec<f64>, mean: f64 },
}

impl JumpLaw {
    fn validate(&self, d: usize) -> Result<()> {
        match self {
            JumpLaw::Atoms { weights, points } => {
                if weights.is_empty() || weights.len() != points.len() {
                    return Err(invalid("atoms", "one weight per jump point is required"));
                }
                if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
                    return Err(invalid("weights", "weights must be > 0"));
                }
                if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(invalid("weights", "weights must sum to 1"));
                }
                for p in points {
                    check_nonneg_direction(p, d, "points")?;
                }
            }
            JumpLaw::Exponential { direction, mean } => {
                check_nonneg_direction(direction, d, "direction")?;
                if !(*mean > 0.0 && mean.is_finite()) {
                    return Err(invalid("mean", "exponential jump mean must be > 0"));
                }
            }
        }
        Ok(())
    }

    fn laplace(&self, s: &[Complex64]) -> Complex64 {
        match self {
            JumpLaw::Atoms { weights, points } => weights
                .iter()
                .zip(points)
                .map(|(w, p)| w * complex_dot(s, p).exp())
                .sum(),
            JumpLaw::Exponential { direction, mean } => 1.0 / (1.0 - mean * complex_dot(s, direction)),
        }
    }

    fn mean(&self, d: usize) -> Vec<f64> {
        match self {
            JumpLaw::Atoms { weights, points } => (0..d)
                .map(|j| weights.iter().zip(points).map(|(w, p)| w * p[j]).sum())
                .collect(),
            JumpLaw::Exponential { direction, mean } => direction.iter().map(|x| mean * x).collect(),
        }
    }

    fn second_moment(&self, i: usize, j: usize) -> f64 {
        match self {
            JumpLaw::Atoms { weights, points } => weights.iter().zip(points).map(|(w, p)| w * p[i] * p[j]).sum(),
            JumpLaw::Exponential { direction, mean } => 2.0 * mean * mean * direction[i] * direction[j],
        }
    }

    fn touches(&self, j: usize) -> bool {
        match self {
            JumpLaw::Atoms { points, .. } => points.iter().any(|p| p[j] != 0.0),
            JumpLaw::Exponential { direction, .. } => direction[j] != 0.0,
        }
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, count: u64, out: &mut [f64]) {
        if count == 0 {
            return;
        }
        match self {
            JumpLaw::Atoms { weights, points } => {
                for _ in 0..count {
                    let k = pick(rng, weights);
                    for (o, x) in out.iter_mut().zip(&points[k]) {
                        *o += x;
                    }
                }
            }
            JumpLaw::Exponential { direction, mean } => {
                let total = mean * sampling::gamma(rng, count as f64);
                for (o, x) in out.iter_mut().zip(direction) {
                    *o += total * x;
                }
            }
        }
    }
}

pub(crate) fn pick<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    weights.len() - 1
}

fn check_nonneg_direction(p: &[f64], d: usize, name: &'static str) -> Result<()> {
    if p.len() != d {
        return Err(invalid(name, format!("expected {d} entries, found {}", p.len())));
    }
    if p.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(invalid(name, "subordinator jumps live in the nonnegative orthant"));
    }
    if p.iter().all(|&x| x == 0.0) {
        return Err(invalid(name, "zero jump vectors are not allowed"));
    }
    Ok(())
}

fn complex_dot(s: &[Complex64], x: &[f64]) -> Complex64 {
    s.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Jump part of a d-variate subordinator.
#[derive(Clone, Debug, PartialEq)]
pub enum SubordinatorJumps {
    None,
    /// Independent univariate jump parts per component.
    Independent(Vec<Option<UnivariateSubordinator>>),
    CompoundPoisson {
        rate: f64,
        law: JumpLaw,
    },
    /// `Θ_j = loading_j · Z + (independent part)_j` with a shared factor `Z`.
    CommonFactor {
        loadings: Vec<f64>,
        factor: UnivariateSubordinator,
        idiosyncratic: Vec<Option<UnivariateSubordinator>>,
    },
}

/// Density of a Lévy measure along one supporting ray `{r·direction : r > 0}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RayDensity {
    Family(UnivariateSubordinator),
    Exponential { rate: f64, mean: f64 },
}

impl RayDensity {
    pub fn density(&self, r: f64) -> f64 {
        match *self {
            RayDensity::Family(f) => f.levy_density(r),
            RayDensity::Exponential { rate, mean } => {
                if r <= 0.0 {
                    0.0
                } else {
                    rate / mean * (-r / mean).exp()
                }
            }
        }
    }

    pub fn tail_mass_bound(&self, r: f64) -> f64 {
        match *self {
            RayDensity::Family(f) => f.tail_mass_bound(r),
            RayDensity::Exponential { rate, mean } => rate * (-r / mean).exp(),
        }
    }

    pub fn first_moment_below_bound(&self, r: f64) -> f64 {
        match *self {
            RayDensity::Family(f) => f.first_moment_below_bound(r),
            RayDensity::Exponential { rate, mean } => rate / mean * r * r / 2.0,
        }
    }

    pub fn first_moment_above_bound(&self, r: f64) -> f64 {
        match *self {
            RayDensity::Family(f) => f.first_moment_above_bound(r),
            RayDensity::Exponential { rate, mean } => rate * (r + mean) * (-r / mean).exp(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevyRay {
    pub direction: Vec<f64>,
    pub density: RayDensity,
}

/// The Lévy measure `F`, as a sum of densities along rays plus point masses.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LevyMeasure {
    pub rays: Vec<LevyRay>,
    pub atoms: Vec<(f64, Vec<f64>)>,
}

impl LevyMeasure {
    pub fn is_zero(&self) -> bool {
        self.rays.is_empty() && self.atoms.is_empty()
    }
}

/// Moments of `Θ(1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubordinatorMoments {
    /// `E Θ_j(1)`, `+∞` when infinite.
    pub mean: Vec<f64>,
    /// `Cov(Θ(1))`; an entry is `+∞` where it is undefined.
    pub covariance: Vec<Vec<f64>>,
    /// Per component, the supremum of powers `p` with `E Θ_j(1)^p < ∞`.
    pub tail_power: Vec<f64>,
    pub sqrt_moment_finite: bool,
}

impl SubordinatorMoments {
    pub fn moment_finite(&self, j: usize, p: f64) -> bool {
        p == 0.0 || p < self.tail_power[j]
    }

    pub fn mean_finite(&self, j: usize) -> bool {
        self.moment_finite(j, 1.0)
    }

    pub fn variance_finite(&self, j: usize) -> bool {
        self.moment_finite(j, 2.0)
    }

    /// Whether `E|Θ(1)|^{1/alpha} < ∞`.
    pub fn one_over_alpha_moment_finite(&self, alpha: f64) -> bool {
        (0..self.tail_power.len()).all(|j| self.moment_finite(j, 1.0 / alpha))
    }

    /// The covariance matrix when every entry is defined.
    pub fn covariance_matrix(&self) -> Option<&Vec<Vec<f64>>> {
        self.covariance
            .iter()
            .all(|row| row.iter().all(|x| x.is_finite()))
            .then_some(&self.covariance)
    }
}

/// `Θ` with drift `a_0 ∈ ℝ₊^d` and jump part.
#[derive(Clone, Debug, PartialEq)]
pub struct SubordinatorSpec {
    drift: Vec<f64>,
    jumps: SubordinatorJumps,
}

impl SubordinatorSpec {
    pub fn new(drift: Vec<f64>, jumps: SubordinatorJumps) -> Result<Self> {
        let d = drift.len();
        if d == 0 {
            return Err(invalid("drift", "at least one component is required"));
        }
        if drift.iter().any(|&a| !(a >= 0.0 && a.is_finite())) {
            return Err(invalid("drift", "subordinator drift must be componentwise >= 0"));
        }
        match &jumps {
            SubordinatorJumps::None => {}
            SubordinatorJumps::Independent(parts) => {
                if parts.len() != d {
                    return Err(invalid("jumps", "one entry per component is required"));
                }
                for p in parts.iter().flatten() {
                    p.validate()?;
                }
            }
            SubordinatorJumps::CompoundPoisson { rate, law } => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    return Err(invalid("rate", "compound Poisson rate must be > 0"));
                }
                law.validate(d)?;
            }
            SubordinatorJumps::CommonFactor {
                loadings,
                factor,
                idiosyncratic,
            } => {
                check_nonneg_direction(loadings, d, "loadings")?;
                factor.validate()?;
                if idiosyncratic.len() != d {
                    return Err(invalid("idiosyncratic", "one entry per component is required"));
                }
                for p in idiosyncratic.iter().flatten() {
                    p.validate()?;
                }
            }
        }
        Ok(Self { drift, jumps })
    }

    pub fn pure_drift(drift: Vec<f64>) -> Result<Self> {
        Self::new(drift, SubordinatorJumps::None)
    }

    /// `Θ = 0`.
    pub fn trivial(d: usize) -> Result<Self> {
        Self::new(vec![0.0; d], SubordinatorJumps::None)
    }

    /// A univariate subordinator with no drift.
    pub fn univariate(law: UnivariateSubordinator) -> Result<Self> {
        Self::new(vec![0.0], SubordinatorJumps::Independent(vec![Some(law)]))
    }

    pub fn components(&self) -> usize {
        self.drift.len()
    }

    pub fn drift(&self) -> &[f64] {
        &self.drift
    }

    pub fn jumps(&self) -> &SubordinatorJumps {
        &self.jumps
    }

    /// `ψ(s) = a_0 s + ∫(e^{⟨s,θ⟩} - 1) F(dθ)` on `(ℝ_- + iℝ)^d`.
    pub fn laplace_exponent(&self, s: &[Complex64]) -> Result<Complex64> {
        if s.len() != self.components() {
            return Err(invalid("s", format!("expected {} entries", self.components())));
        }
        if let Some(bad) = s.iter().find(|z| z.re > 0.0) {
            return Err(Error::Domain(format!(
                "Laplace exponent needs Re(s_j) <= 0, found {bad}"
            )));
        }
        let mut value = complex_dot(s, &self.drift);
        match &self.jumps {
            SubordinatorJumps::None => {}
            SubordinatorJumps::Independent(parts) => {
                for (p, &sj) in parts.iter().zip(s) {
                    if let Some(p) = p {
                        value += p.laplace_exponent(sj);
                    }
                }
            }
            SubordinatorJumps::CompoundPoisson { rate, law } => {
                value += rate * (law.laplace(s) - 1.0);
            }
            SubordinatorJumps::CommonFactor {
                loadings,
                factor,
                idiosyncratic,
            } => {
                value += factor.laplace_exponent(complex_dot(s, loadings));
                for (p, &sj) in idiosyncratic.iter().zip(s) {
                    if let Some(p) = p {
                        value += p.laplace_exponent(sj);
                    }
                }
            }
        }
        Ok(value)
    }

    /// `F` as rays and atoms.
    pub fn levy_measure(&self) -> LevyMeasure {
        let d = self.components();
        let axis = |j: usize| {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            e
        };
        let mut m = LevyMeasure::default();
        let push_parts = |m: &mut LevyMeasure, parts: &[Option<UnivariateSubordinator>]| {
            for (j, p) in parts.iter().enumerate() {
                if let Some(p) = p {
                    m.rays.push(LevyRay {
                        direction: axis(j),
                        density: RayDensity::Family(p.canonical()),
                    });
                }
            }
        };
        match &self.jumps {
            SubordinatorJumps::None => {}
            SubordinatorJumps::Independent(parts) => push_parts(&mut m, parts),
            SubordinatorJumps::CompoundPoisson { rate, law } => match law {
                JumpLaw::Atoms { weights, points } => {
                    m.atoms = weights.iter().zip(points).map(|(w, p)| (rate * w, p.clone())).collect();
                }
                JumpLaw::Exponential { direction, mean } => m.rays.push(LevyRay {
                    direction: direction.clone(),
                    density: RayDensity::Exponential {
                        rate: *rate,
                        mean: *mean,
                    },
                }),
            },
            SubordinatorJumps::CommonFactor {
                loadings,
                factor,
                idiosyncratic,
            } => {
                m.rays.push(LevyRay {
                    direction: loadings.clone(),
                    density: RayDensity::Family(factor.canonical()),
                });
                push_parts(&mut m, idiosyncratic);
            }
        }
        m
    }

    /// Density of `F` at `theta` along the ray that carries it, in the ray
    /// parameter `r` (`theta = r·direction`). For `d = 1` this is the
    /// ordinary Lebesgue density.
    pub fn levy_density(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.components() {
            return Err(invalid("theta", format!("expected {} entries", self.components())));
        }
        if theta.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Domain("theta must lie in the nonnegative orthant".into()));
        }
        let measure = self.levy_measure();
        if !measure.atoms.is_empty() {
            return Err(Error::Unsupported(
                "compound Poisson with atomic jumps has no Lévy density".into(),
            ));
        }
        let norm = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Support("theta = 0 carries no Lévy density".into()));
        }
        let mut total = 0.0;
        let mut on_support = false;
        for ray in &measure.rays {
            let dd: f64 = ray.direction.iter().map(|x| x * x).sum();
            let r = theta.iter().zip(&ray.direction).map(|(a, b)| a * b).sum::<f64>() / dd;
            let resid: f64 = theta
                .iter()
                .zip(&ray.direction)
                .map(|(a, b)| (a - r * b).powi(2))
                .sum::<f64>()
                .sqrt();
            if r > 0.0 && resid <= 1e-12 * norm {
                on_support = true;
                total += ray.density.density(r);
            }
        }
        if !on_support {
            return Err(Error::Support(format!("{theta:?} lies on no supporting ray of F")));
        }
        Ok(total)
    }

    /// Exact draw of `Θ(t + dt) - Θ(t)` into `out`.
    pub fn sample_increment_into<R: Rng + ?Sized>(&self, rng: &mut R, dt: f64, out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(&self.drift) {
            *o = a * dt;
        }
        match &self.jumps {
            SubordinatorJumps::None => {}
            SubordinatorJumps::Independent(parts) => {
                for (o, p) in out.iter_mut().zip(parts) {
                    if let Some(p) = p {
                        *o += p.sample(rng, dt);
                    }
                }
            }
            SubordinatorJumps::CompoundPoisson { rate, law } => {
                let n = sampling::poisson(rng, rate * dt);
                law.sample_into(rng, n, out);
            }
            SubordinatorJumps::CommonFactor {
                loadings,
                factor,
                idiosyncratic,
            } => {
                let z = factor.sample(rng, dt);
                for ((o, b), p) in out.iter_mut().zip(loadings).zip(idiosyncratic) {
                    *o += b * z;
                    if let Some(p) = p {
                        *o += p.sample(rng, dt);
                    }
                }
            }
        }
    }

    pub fn sample_increment<R: Rng + ?Sized>(&self, rng: &mut R, dt: f64) -> Result<Vec<f64>> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", "time step must be > 0"));
        }
        let mut out = vec![0.0; self.components()];
        self.sample_increment_into(rng, dt, &mut out);
        Ok(out)
    }

    /// Whether `Θ_j = 0` almost surely.
    pub fn is_component_trivial(&self, j: usize) -> bool {
        if self.drift[j] != 0.0 {
            return false;
        }
        match &self.jumps {
            SubordinatorJumps::None => true,
            SubordinatorJumps::Independent(parts) => parts[j].is_none(),
            SubordinatorJumps::CompoundPoisson { law, .. } => !law.touches(j),
            SubordinatorJumps::CommonFactor {
                loadings,
                idiosyncratic,
                ..
            } => loadings[j] == 0.0 && idiosyncratic[j].is_none(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        (0..self.components()).all(|j| self.is_component_trivial(j))
    }

    pub fn moments(&self) -> SubordinatorMoments {
        let d = self.components();
        let mut mean = self.drift.clone();
        let mut cov = vec![vec![0.0; d]; d];
        let mut tail_power = vec![f64::INFINITY; d];
        let add_independent = |mean: &mut Vec<f64>,
                               cov: &mut Vec<Vec<f64>>,
                               tail: &mut Vec<f64>,
                               parts: &[Option<UnivariateSubordinator>]| {
            for (j, p) in parts.iter().enumerate() {
                if let Some(p) = p {
                    mean[j] += p.mean();
                    cov[j][j] += p.variance();
                    tail[j] = tail[j].min(p.tail_power());
                }
            }
        };
        match &self.jumps {
            SubordinatorJumps::None => {}
            SubordinatorJumps::Independent(parts) => add_independent(&mut mean, &mut cov, &mut tail_power, parts),
            SubordinatorJumps::CompoundPoisson { rate, law } => {
                for (m, x) in mean.iter_mut().zip(law.mean(d)) {
                    *m += rate * x;
                }
                for (i, row) in cov.iter_mut().enumerate() {
                    for (j, c) in row.iter_mut().enumerate() {
                        *c += rate * law.second_moment(i, j);
                    }
                }
            }
            SubordinatorJumps::CommonFactor {
                loadings,
                factor,
                idiosyncratic,
            } => {
                let (fm, fv, ft) = (factor.mean(), factor.variance(), factor.tail_power());
                for (i, row) in cov.iter_mut().enumerate() {
                    if loadings[i] != 0.0 {
                        mean[i] += scaled_or_zero(loadings[i], fm);
                        tail_power[i] = tail_power[i].min(ft);
                    }
                    for (j, c) in row.iter_mut().enumerate() {
                        *c += scaled_or_zero(loadings[i] * loadings[j], fv);
                    }
                }
                add_independent(&mut mean, &mut cov, &mut tail_power, idiosyncratic);
            }
        }
        // Entries involving a component without second moment are undefined.
        for i in 0..d {
            for j in 0..d {
                if tail_power[i] <= 2.0 || tail_power[j] <= 2.0 {
                    cov[i][j] = f64::INFINITY;
                }
            }
        }
        SubordinatorMoments {
            sqrt_moment_finite: tail_power.iter().all(|&p| 0.5 < p),
            mean,
            covariance: cov,
            tail_power,
        }
    }
}

fn scaled_or_zero(factor: f64, value: f64) -> f64 {
    if factor == 0.0 {
        0.0
    } else {
        factor * value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::SeedSchedule;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Independent oracle: `∫_0^∞ g(θ) dθ` by the trapezoid rule after
    /// `θ = e^x`.
    fn log_trapezoid(g: impl Fn(f64) -> f64) -> f64 {
        let (lo, hi, n) = (-60.0f64, 6.0f64, 200_000);
        let h = (hi - lo) / n as f64;
        (0..=n)
            .map(|k| {
                let x = lo + k as f64 * h;
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                w * g(x.exp()) * x.exp()
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn laplace_exponent_vanishes_at_zero_for_every_family() {
        let specs = [
            SubordinatorSpec::univariate(UnivariateSubordinator::InverseGaussian { s: 1.0, c: 1.0 }),
            SubordinatorSpec::univariate(UnivariateSubordinator::Stable { alpha: 0.5, scale: 1.0 }),
            SubordinatorSpec::univariate(UnivariateSubordinator::Gamma { shape: 2.0 }),
            SubordinatorSpec::new(
                vec![0.5],
                SubordinatorJumps::CompoundPoisson {
                    rate: 2.0,
                    law: JumpLaw::Atoms {
                        weights: vec![1.0],
                        points: vec![vec![1.0]],
                    },
                },
            ),
        ];
        for spec in specs {
            assert_eq!(spec.unwrap().laplace_exponent(&[c(0.0)]).unwrap(), c(0.0));
        }
    }

    #[test]
    fn inverse_gaussian_exponent_matches_closed_form_and_quadrature() {
        let law = UnivariateSubordinator::InverseGaussian { s: 1.0, c: 1.0 };
        let psi = law.laplace_exponent(c(-1.0));
        assert!((psi.re - (1.0 - 3f64.sqrt())).abs() < 1e-15);
        assert!((psi.re - (-0.7320508)).abs() < 1e-7);
        let oracle = log_trapezoid(|t| ((-t).exp() - 1.0) * law.levy_density(t));
        assert!((psi.re - oracle).abs() < 1e-7, "{} vs {oracle}", psi.re);
    }

    #[test]
    fn gamma_exponent_matches_closed_form_and_quadrature() {
        let law = UnivariateSubordinator::Gamma { shape: 2.0 };
        let psi = law.laplace_exponent(c(-1.0));
        assert!((psi.re + 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!((psi.re - (-1.3862944)).abs() < 1e-7);
        let oracle = log_trapezoid(|t| ((-t).exp() - 1.0) * law.levy_density(t));
        assert!((psi.re - oracle).abs() < 1e-7);
    }

    #[test]
    fn stable_exponent_matches_quadrature() {
        let law = UnivariateSubordinator::Stable { alpha: 0.5, scale: 1.0 };
        assert!((law.laplace_exponent(c(-4.0)).re + 2.0).abs() < 1e-14);
        // The integrand tends to -density beyond the grid; add that tail
        // mass exactly.
        let oracle =
            log_trapezoid(|t| ((-4.0 * t).exp() - 1.0) * law.levy_density(t)) - law.tail_mass_bound(6f64.exp());
        assert!((oracle + 2.0).abs() < 1e-6, "{oracle}");
    }

    #[test]
    fn degenerate_inverse_gaussian_is_half_stable() {
        let law = UnivariateSubordinator::InverseGaussian { s: 1.5, c: 0.0 };
        let v = Complex64::new(-0.7, 2.3);
        let direct = law.laplace_exponent(v);
        let routed = law.canonical().laplace_exponent(v);
        assert!((direct - routed).norm() < 1e-14);
        assert!((law.levy_density(2.0) - law.canonical().levy_density(2.0)).abs() < 1e-15);
    }

    #[test]
    fn levy_density_examples() {
        let ig = SubordinatorSpec::univariate(UnivariateSubordinator::InverseGaussian { s: 1.0, c: 0.0 }).unwrap();
        assert!((ig.levy_density(&[1.0]).unwrap() - 0.3989423).abs() < 1e-7);
        let g = SubordinatorSpec::univariate(UnivariateSubordinator::Gamma { shape: 3.0 }).unwrap();
        assert!((g.levy_density(&[1.0]).unwrap() - 1.1036383).abs() < 1e-7);
        assert!(g.levy_density(&[200.0]).unwrap() < 1e-80);
        assert!(matches!(g.levy_density(&[0.0]), Err(Error::Support(_))));
        assert!(matches!(g.levy_density(&[-1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn levy_density_off_support_is_an_error() {
        let spec = SubordinatorSpec::new(
            vec![0.0, 0.0],
            SubordinatorJumps::Independent(vec![
                Some(UnivariateSubordinator::Gamma { shape: 1.0 }),
                Some(UnivariateSubordinator::Gamma { shape: 2.0 }),
            ]),
        )
        .unwrap();
        assert!((spec.levy_density(&[0.0, 1.0]).unwrap() - 2.0 * (-1f64).exp()).abs() < 1e-15);
        assert!(matches!(spec.levy_density(&[1.0, 1.0]), Err(Error::Support(_))));
    }

    #[test]
    fn domain_error_for_positive_real_part() {
        let spec = SubordinatorSpec::univariate(UnivariateSubordinator::Gamma { shape: 1.0 }).unwrap();
        assert!(matches!(spec.laplace_exponent(&[c(0.1)]), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(SubordinatorSpec::pure_drift(vec![-1.0]).is_err());
        assert!(SubordinatorSpec::univariate(UnivariateSubordinator::Stable { alpha: 1.0, scale: 1.0 }).is_err());
        assert!(SubordinatorSpec::new(
            vec![0.0],
            SubordinatorJumps::CompoundPoisson {
                rate: 1.0,
                law: JumpLaw::Atoms {
                    weights: vec![1.0],
                    points: vec![vec![-1.0]]
                }
            }
        )
        .is_err());
    }

    #[test]
    fn pure_drift_increment_is_deterministic() {
        let spec = SubordinatorSpec::pure_drift(vec![1.0]).unwrap();
        let mut rng = SeedSchedule::new(0).stream(0);
        assert_eq!(spec.sample_increment(&mut rng, 2.0).unwrap(), vec![2.0]);
    }

    #[test]
    fn moments_examples() {
        let ig = SubordinatorSpec::univariate(UnivariateSubordinator::InverseGaussian { s: 1.0, c: 1.0 })
            .unwrap()
            .moments();
        assert_eq!(ig.mean, vec![1.0]);
        assert_eq!(ig.covariance, vec![vec![1.0]]);
        assert!(ig.sqrt_moment_finite);

        let st = SubordinatorSpec::univariate(UnivariateSubordinator::Stable { alpha: 0.5, scale: 1.0 })
            .unwrap()
            .moments();
        assert_eq!(st.mean, vec![f64::INFINITY]);
        assert!(!st.sqrt_moment_finite);
        assert!(st.covariance_matrix().is_none());

        let st75 = SubordinatorSpec::univariate(UnivariateSubordinator::Stable {
            alpha: 0.75,
            scale: 1.0,
        })
        .unwrap()
        .moments();
        assert!(st75.sqrt_moment_finite);
        // E Θ^{1/α} with α = 1.5 needs p = 2/3 < 0.75.
        assert!(st75.one_over_alpha_moment_finite(1.5));
        assert!(!st75.one_over_alpha_moment_finite(1.2));

        let drift = SubordinatorSpec::pure_drift(vec![3.0]).unwrap().moments();
        assert_eq!(drift.mean, vec![3.0]);
        assert_eq!(drift.covariance, vec![vec![0.0]]);
    }

    #[test]
    fn moments_match_finite_differences_of_exponent() {
        let law = UnivariateSubordinator::InverseGaussian { s: 1.0, c: 1.0 };
        let h = 1e-4;
        let f = |v: f64| law.laplace_exponent(c(v)).re;
        // One-sided differences: the exponent is only defined for v <= 0.
        let d1 = (-3.0 * f(0.0) + 4.0 * f(-h) - f(-2.0 * h)) / (-2.0 * h);
        let d2 = (f(0.0) - 2.0 * f(-h) + f(-2.0 * h)) / (h * h);
        assert!((d1 - 1.0).abs() < 1e-6, "{d1}");
        assert!((d2 - 1.0).abs() < 1e-3, "{d2}");
    }

    #[test]
    fn common_factor_moments() {
        let spec = SubordinatorSpec::new(
            vec![0.1, 0.0],
            SubordinatorJumps::CommonFactor {
                loadings: vec![1.0, 2.0],
                factor: UnivariateSubordinator::Gamma { shape: 2.0 },
                idiosyncratic: vec![None, Some(UnivariateSubordinator::InverseGaussian { s: 1.0, c: 2.0 })],
            },
        )
        .unwrap();
        let m = spec.moments();
        assert!((m.mean[0] - 2.1).abs() < 1e-15);
        assert!((m.mean[1] - 4.5).abs() < 1e-15);
        assert_eq!(m.covariance[0][1], 4.0);
        assert!((m.covariance[1][1] - (8.0 + 0.125)).abs() < 1e-15);
    }

    #[test]
    fn real_exponent_is_nonpositive_and_dominates_real_part() {
        let spec = SubordinatorSpec::new(
            vec![0.2, 0.3],
            SubordinatorJumps::CommonFactor {
                loadings: vec![1.0, 0.5],
                factor: UnivariateSubordinator::InverseGaussian { s: 1.0, c: 1.0 },
                idiosyncratic: vec![Some(UnivariateSubordinator::Stable { alpha: 0.3, scale: 0.7 }), None],
            },
        )
        .unwrap();
        for &(a, b, x, y) in &[(-0.5, 1.0, -2.0, -3.0), (0.0, 2.0, -1.0, 0.5), (-3.0, 0.0, 0.0, -7.0)] {
            let s = [Complex64::new(a, b), Complex64::new(x, y)];
            let re = spec.laplace_exponent(&s).unwrap().re;
            let at_re = spec.laplace_exponent(&[c(a), c(x)]).unwrap();
            assert!(at_re.im.abs() < 1e-15 && at_re.re <= 0.0);
            assert!(re <= at_re.re + 1e-12);
        }
    }
}
