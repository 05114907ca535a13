//! Subordinated processes `X(t) = L(Θ(t))`: exponent, exact sampling,
//! moments, characteristic triplet and integrability classification.

mod classify;
mod triplet;

pub use classify::{stable_base_integrable, ComponentClass, IntegrabilityCase, IntegrabilityReport};
pub use triplet::{JumpMass, LargeJumpMean, QuadratureConfig, SubordinatedTriplet, TestSet};

use num_complex::Complex64;
use rand::Rng;

use crate::base::BaseProcessSpec;
use crate::error::{invalid, Error, Result};
use crate::space::{CovarianceOperator, RankOneTensor, SpaceLayout, TruncatedVector};
use crate::subordinator::SubordinatorSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct SubordinatedProcessSpec {
    base: BaseProcessSpec,
    subordinator: SubordinatorSpec,
}

impl SubordinatedProcessSpec {
    pub fn new(base: BaseProcessSpec, subordinator: SubordinatorSpec) -> Result<Self> {
        let d = base.layout().components();
        if subordinator.components() != d {
            return Err(invalid(
                "subordinator",
                format!("base has {d} components, subordinator {}", subordinator.components()),
            ));
        }
        Ok(Self { base, subordinator })
    }

    pub fn base(&self) -> &BaseProcessSpec {
        &self.base
    }

    pub fn subordinator(&self) -> &SubordinatorSpec {
        &self.subordinator
    }

    pub fn layout(&self) -> &SpaceLayout {
        self.base.layout()
    }

    /// `ρ(u) = ψ(φ_1(u_1), …, φ_d(u_d))`.
    pub fn exponent(&self, u: &TruncatedVector) -> Result<Complex64> {
        let phi = self.base.levy_exponents(u)?;
        if let Some(bad) = phi.iter().find(|z| z.re > 0.0) {
            return Err(Error::Internal(format!("base exponent with positive real part {bad}")));
        }
        self.subordinator.laplace_exponent(&phi)
    }

    /// `E exp(i⟨u|X(t)⟩) = exp(t ρ(u))`.
    pub fn characteristic_function(&self, u: &TruncatedVector, t: f64) -> Result<Complex64> {
        Ok((t * self.exponent(u)?).exp())
    }

    /// Draw of `X(t)` into `out`; `theta` is scratch of length `d`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, t: f64, theta: &mut [f64], out: &mut [f64]) {
        self.subordinator.sample_increment_into(rng, t, theta);
        self.base.sample_at_into(rng, theta, out);
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, t: f64) -> Result<TruncatedVector> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("t", "time must be > 0"));
        }
        let mut theta = vec![0.0; self.subordinator.components()];
        let mut out = vec![0.0; self.layout().total_dim()];
        self.sample_into(rng, t, &mut theta, &mut out);
        TruncatedVector::from_flat(self.layout(), out)
    }

    /// `X` at the grid times, built from independent increments. A grid
    /// point at `0` yields the zero vector.
    pub fn simulate_path<R: Rng + ?Sized>(&self, rng: &mut R, grid: &[f64]) -> Result<Vec<TruncatedVector>> {
        if grid.is_empty() {
            return Err(invalid("grid", "time grid is empty"));
        }
        if grid[0] < 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|t| !t.is_finite()) {
            return Err(invalid("grid", "time grid must be nonnegative and strictly increasing"));
        }
        let n = self.layout().total_dim();
        let mut theta = vec![0.0; self.subordinator.components()];
        let mut inc = vec![0.0; n];
        let mut current = vec![0.0; n];
        let mut last = 0.0;
        let mut out = Vec::with_capacity(grid.len());
        for &t in grid {
            if t > last {
                self.sample_into(rng, t - last, &mut theta, &mut inc);
                current.iter_mut().zip(&inc).for_each(|(c, x)| *c += x);
            }
            last = t;
            out.push(TruncatedVector::from_flat(self.layout(), current.clone())?);
        }
        Ok(out)
    }

    pub fn classify(&self) -> IntegrabilityReport {
        classify::classify(self)
    }

    /// `E X(1)`: componentwise `E Θ_j(1) · E L_j(1)`.
    pub fn mean(&self) -> Result<TruncatedVector> {
        let report = self.classify();
        let theta = self.subordinator.moments();
        let m = self.base.mean_at_one();
        let mut out = TruncatedVector::zeros(self.layout());
        for c in &report.components {
            if !c.integrable {
                return Err(Error::NotIntegrable {
                    component: c.component,
                    case: c.case.label().to_string(),
                });
            }
            if c.mean_zero {
                continue;
            }
            let e = theta.mean[c.component];
            for (o, x) in out.component_mut(c.component).iter_mut().zip(m.component(c.component)) {
                *o = e * x;
            }
        }
        Ok(out)
    }

    /// `Cov X(1) = E Θ(1) Cov L(1) + Σ_{i,j} Cov(Θ(1))_{ij} E L_i(1) ⊗ E L_j(1)`.
    pub fn covariance(&self) -> Result<CovarianceOperator> {
        let report = self.classify();
        if let Some(c) = report.components.iter().find(|c| !c.square_integrable) {
            return Err(Error::NotSquareIntegrable {
                component: c.component,
                case: c.case.label().to_string(),
            });
        }
        let d = self.layout().components();
        let moments = self.subordinator.moments();
        let active: Vec<bool> = (0..d)
            .map(|j| !self.subordinator.is_component_trivial(j) && !self.base.is_component_trivial(j))
            .collect();
        let scale: Vec<f64> = (0..d).map(|j| if active[j] { moments.mean[j] } else { 0.0 }).collect();
        let mut out = CovarianceOperator::from_spectral(self.base.cov().scale_by_multiindex(&scale)?);
        for (j, jump) in self.base.jumps().iter().enumerate() {
            if let (Some(jump), true) = (jump, active[j]) {
                for (w, p) in jump.weights().iter().zip(jump.points()) {
                    let mut x = TruncatedVector::zeros(self.layout());
                    x.component_mut(j).copy_from_slice(p);
                    out.push(scale[j] * jump.rate() * w, RankOneTensor::new(x.clone(), x)?)?;
                }
            }
        }
        let m = self.base.mean_at_one();
        let embedded: Vec<Option<TruncatedVector>> = (0..d)
            .map(|j| {
                let mj = m.component(j);
                (active[j] && mj.iter().any(|&x| x != 0.0)).then(|| {
                    let mut x = TruncatedVector::zeros(self.layout());
                    x.component_mut(j).copy_from_slice(mj);
                    x
                })
            })
            .collect();
        for i in 0..d {
            for j in 0..d {
                if let (Some(mi), Some(mj)) = (&embedded[i], &embedded[j]) {
                    let c = moments.covariance[i][j];
                    if c != 0.0 {
                        out.push(c, RankOneTensor::new(mi.clone(), mj.clone())?)?;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn triplet(&self, config: &QuadratureConfig) -> Result<SubordinatedTriplet> {
        SubordinatedTriplet::compute(self, config)
    }
}
