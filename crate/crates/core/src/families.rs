//! Named families: HNIG (normal inverse Gaussian), symmetric strictly
//! α-stable and HVG (variance Gamma) subordinated Brownian motions, with
//! their closed-form exponents, plus finite-dimensional projections.
//!
//! Each family uses one subordinator for the whole space; for layouts with
//! several components this is a common factor with unit loadings.

use num_complex::Complex64;
use rand::Rng;

use crate::base::{BaseProcessSpec, DiscreteJumps};
use crate::error::{invalid, Result};
use crate::space::{dot, CovOperator, SpaceLayout, TruncatedVector};
use crate::subordination::SubordinatedProcessSpec;
use crate::subordinator::{SubordinatorJumps, SubordinatorSpec, UnivariateSubordinator};

#[derive(Clone, Debug, PartialEq)]
pub struct HnigParams {
    pub s: f64,
    pub c: f64,
    pub b: TruncatedVector,
    pub q: CovOperator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StableParams {
    pub alpha: f64,
    pub q: CovOperator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HvgParams {
    pub a: f64,
    pub b: TruncatedVector,
    pub q: CovOperator,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Hnig(HnigParams),
    Stable(StableParams),
    Hvg(HvgParams),
}

/// Subordinator `law` shared by all components of `layout`.
fn shared(layout: &SpaceLayout, law: Option<UnivariateSubordinator>) -> Result<SubordinatorSpec> {
    let d = layout.components();
    match law {
        None => SubordinatorSpec::trivial(d),
        Some(law) if d == 1 => SubordinatorSpec::univariate(law),
        Some(law) => SubordinatorSpec::new(
            vec![0.0; d],
            SubordinatorJumps::CommonFactor {
                loadings: vec![1.0; d],
                factor: law,
                idiosyncratic: vec![None; d],
            },
        ),
    }
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Hnig(p) if p.c == 0.0 => "hnig-degenerate",
            Family::Hnig(_) => "hnig",
            Family::Stable(_) => "stable",
            Family::Hvg(_) => "hvg",
        }
    }

    pub fn layout(&self) -> &SpaceLayout {
        match self {
            Family::Hnig(p) => p.q.layout(),
            Family::Stable(p) => p.q.layout(),
            Family::Hvg(p) => p.q.layout(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Family::Hnig(p) => {
                if !(p.s >= 0.0 && p.s.is_finite() && p.c >= 0.0 && p.c.is_finite()) {
                    return Err(invalid("s, c", "HNIG parameters must be >= 0"));
                }
                p.b.layout().ensure_same(p.q.layout())
            }
            Family::Stable(p) => {
                if !(p.alpha > 0.0 && p.alpha <= 2.0) {
                    return Err(invalid("alpha", "stable index must lie in (0, 2]"));
                }
                if p.q.trace() == 0.0 {
                    return Err(invalid("q", "stable family needs Q != 0"));
                }
                Ok(())
            }
            Family::Hvg(p) => {
                if !(p.a >= 0.0 && p.a.is_finite()) {
                    return Err(invalid("a", "HVG parameter must be >= 0"));
                }
                p.b.layout().ensure_same(p.q.layout())
            }
        }
    }

    /// The subordinated process realising the family.
    pub fn spec(&self) -> Result<SubordinatedProcessSpec> {
        self.validate()?;
        let layout = self.layout().clone();
        let d = layout.components();
        match self {
            Family::Hnig(p) => {
                let base = BaseProcessSpec::gaussian(p.b.clone(), p.q.clone())?;
                let law = (p.s > 0.0).then_some(UnivariateSubordinator::InverseGaussian { s: p.s, c: p.c });
                SubordinatedProcessSpec::new(base, shared(&layout, law)?)
            }
            Family::Stable(p) => {
                let base = BaseProcessSpec::gaussian(
                    TruncatedVector::zeros(&layout),
                    p.q.scale_by_multiindex(&vec![2.0; d])?,
                )?;
                let sub = if p.alpha == 2.0 {
                    SubordinatorSpec::pure_drift(vec![1.0; d])?
                } else {
                    shared(
                        &layout,
                        Some(UnivariateSubordinator::Stable {
                            alpha: p.alpha / 2.0,
                            scale: 1.0,
                        }),
                    )?
                };
                SubordinatedProcessSpec::new(base, sub)
            }
            Family::Hvg(p) => {
                let base = BaseProcessSpec::gaussian(p.b.clone(), p.q.clone())?;
                let law = (p.a > 0.0).then_some(UnivariateSubordinator::Gamma { shape: p.a });
                SubordinatedProcessSpec::new(base, shared(&layout, law)?)
            }
        }
    }

    /// Closed-form exponent, evaluated without the composition path.
    pub fn exponent(&self, u: &TruncatedVector) -> Result<Complex64> {
        self.layout().ensure_same(u.layout())?;
        Ok(match self {
            Family::Hnig(p) => {
                let z = Complex64::new(p.c * p.c + p.q.quadratic(u)?, -2.0 * u.inner(&p.b)?);
                p.s * (p.c - z.sqrt())
            }
            Family::Stable(p) => Complex64::from(-p.q.quadratic(u)?.powf(p.alpha / 2.0)),
            Family::Hvg(p) => {
                let z = Complex64::new(1.0 + 0.5 * p.q.quadratic(u)?, -u.inner(&p.b)?);
                -p.a * z.ln()
            }
        })
    }
}

/// `T X` for a linear map `T : H → ℝ^n` given by its rows `t_1, …, t_n`.
///
/// Component `j` of the result lives in its own copy of `ℝ^n` and carries
/// `T_j L_j`; the projected process is the sum of those copies, so that
/// `E exp(i⟨z|T X(t)⟩) = exp(t ρ(T* z))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedProcess {
    spec: SubordinatedProcessSpec,
    n: usize,
}

impl ProjectedProcess {
    pub fn new(spec: &SubordinatedProcessSpec, rows: &[TruncatedVector]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(invalid("rows", "at least one functional is required"));
        }
        for r in rows {
            spec.layout().ensure_same(r.layout())?;
        }
        let d = spec.layout().components();
        let layout = SpaceLayout::new(vec![n; d])?;
        let base = spec.base();
        let proj = |j: usize, x: &[f64]| -> Vec<f64> { rows.iter().map(|r| dot(r.component(j), x)).collect() };
        let mut drift = Vec::with_capacity(d * n);
        let mut covs = Vec::with_capacity(d);
        let mut jumps = Vec::with_capacity(d);
        for j in 0..d {
            let mut b = proj(j, base.drift().component(j));
            let q: Vec<Vec<f64>> = rows
                .iter()
                .map(|rk| {
                    rows.iter()
                        .map(|rl| base.cov().component_bilinear(j, rk.component(j), rl.component(j)))
                        .collect()
                })
                .collect();
            covs.push(q);
            let jump = match &base.jumps()[j] {
                None => None,
                Some(jump) => {
                    // The truncation moves with the map: b' = Tb + ∫(χ(Tx) − Tχ(x)) ν(dx).
                    let points: Vec<Vec<f64>> = jump.points().iter().map(|p| proj(j, p)).collect();
                    for ((w, p), tp) in jump.weights().iter().zip(jump.points()).zip(&points) {
                        let small_before = dot(p, p) <= 1.0;
                        let small_after = dot(tp, tp) <= 1.0;
                        let coeff = jump.rate() * w * (small_after as u8 as f64 - small_before as u8 as f64);
                        b.iter_mut().zip(tp).for_each(|(o, x)| *o += coeff * x);
                    }
                    Some(DiscreteJumps::new(jump.rate(), jump.weights().to_vec(), points)?)
                }
            };
            jumps.push(jump);
            drift.extend(b);
        }
        let base = BaseProcessSpec::new(
            TruncatedVector::from_flat(&layout, drift)?,
            CovOperator::from_symmetric(&layout, covs)?,
            jumps,
        )?;
        Ok(Self {
            spec: SubordinatedProcessSpec::new(base, spec.subordinator().clone())?,
            n,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The block-wise subordinated process on `(ℝ^n)^d`.
    pub fn spec(&self) -> &SubordinatedProcessSpec {
        &self.spec
    }

    /// Exponent at `z ∈ ℝ^n`.
    pub fn exponent(&self, z: &[f64]) -> Result<Complex64> {
        if z.len() != self.n {
            return Err(invalid("z", format!("expected {} entries", self.n)));
        }
        let d = self.spec.layout().components();
        let u = TruncatedVector::from_components(vec![z.to_vec(); d])?;
        self.spec.exponent(&u)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, t: f64) -> Result<Vec<f64>> {
        let x = self.spec.sample(rng, t)?;
        let mut out = vec![0.0; self.n];
        for block in x.components() {
            out.iter_mut().zip(block).for_each(|(o, v)| *o += v);
        }
        Ok(out)
    }
}
