//! Integration of vector-valued functions against a subordinator Lévy
//! measure `F`.
//!
//! Each ray `{r·direction}` is integrated in `x = ln r` with composite
//! Gauss–Legendre panels of unit width, which places nodes geometrically
//! dense near the origin where the densities blow up. The range
//! `[r_lo, r_hi]` is cut where rigorous bounds on the discarded mass fall
//! below the truncation tolerance; the refinement gap is the difference
//! between the `order` and `order/2` rules.

use gauss_quad::GaussLegendre;
use std::num::NonZeroUsize;

use crate::error::{Error, Result};
use crate::mc::{map_ordered, CompensatedSum};
use crate::subordinator::{LevyMeasure, RayDensity};

/// Bounds on the integrand `g`, used to place the cut-offs.
#[derive(Clone, Copy, Debug)]
pub(crate) struct IntegrandBounds {
    /// `|g(θ)| ≤ near_zero·|θ|` for `|θ| ≤ 1`.
    pub near_zero: f64,
    pub tail: TailBound,
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum TailBound {
    /// `|g| ≤ B` everywhere.
    Bounded(f64),
    /// `|g(θ)| ≤ K·|θ|` for `|θ| ≥ 1`.
    Linear(f64),
}

#[derive(Clone, Debug)]
pub(crate) struct Integral {
    pub value: Vec<f64>,
    /// Componentwise differences between the fine and coarse rules.
    pub component_gaps: Vec<f64>,
}

impl Integral {
    #[cfg(test)]
    fn gap(&self) -> f64 {
        self.component_gaps.iter().copied().fold(0.0, f64::max)
    }
}

const PANEL_WIDTH: f64 = 1.0;
const SEARCH_LIMIT: usize = 2000;

fn cut_below(density: &RayDensity, scale: f64, budget: f64) -> Result<f64> {
    let mut r = 1.0f64;
    for _ in 0..SEARCH_LIMIT {
        if scale * density.first_moment_below_bound(r) <= budget {
            return Ok(r);
        }
        r /= std::f64::consts::E;
    }
    Err(Error::Internal("no lower cut-off found for the θ-integral".into()))
}

fn cut_above(density: &RayDensity, norm: f64, tail: TailBound, budget: f64) -> Result<f64> {
    let mut r = 1.0f64;
    for _ in 0..SEARCH_LIMIT {
        let bound = match tail {
            TailBound::Bounded(b) => b * density.tail_mass_bound(r),
            TailBound::Linear(k) => k * norm * density.first_moment_above_bound(r),
        };
        if bound.is_nan() || bound == f64::INFINITY {
            if let TailBound::Linear(_) = tail {
                return Err(Error::Unsupported(
                    "integrand grows linearly but F has no first moment at infinity".into(),
                ));
            }
        }
        if bound <= budget {
            return Ok(r);
        }
        r *= std::f64::consts::E;
        if !r.is_finite() {
            break;
        }
    }
    Err(Error::Internal("no upper cut-off found for the θ-integral".into()))
}

/// Nodes `(θ, weight)` for one ray, for rule orders `fine` and `fine/2`.
fn ray_nodes(direction: &[f64], density: &RayDensity, lo: f64, hi: f64, order: usize) -> Vec<(Vec<f64>, f64)> {
    let (a, b) = (lo.ln(), hi.ln());
    let panels = ((b - a) / PANEL_WIDTH).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let rule = GaussLegendre::new(NonZeroUsize::new(order).expect("order >= 1"));
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for &(t, w) in rule.as_node_weight_pairs() {
            let x = mid + 0.5 * h * t;
            let r = x.exp();
            let weight = 0.5 * h * w * density.density(r) * r;
            out.push((direction.iter().map(|d| r * d).collect(), weight));
        }
    }
    out
}

/// `∫ g(θ) F(dθ)` with a refinement gap, `g` writing `dim` values.
pub(crate) fn integrate<G>(
    measure: &LevyMeasure,
    bounds: IntegrandBounds,
    order: usize,
    tolerance: f64,
    dim: usize,
    g: G,
) -> Result<Integral>
where
    G: Fn(&[f64], &mut [f64]) + Sync + Send,
{
    let pieces = (measure.rays.len() * 2).max(1) as f64;
    let budget = tolerance / pieces;
    let mut fine_nodes = Vec::new();
    let mut coarse_nodes = Vec::new();
    for ray in &measure.rays {
        let norm = ray.direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        let lo = cut_below(&ray.density, bounds.near_zero * norm, budget)?;
        let hi = cut_above(&ray.density, norm, bounds.tail, budget)?.max(lo * std::f64::consts::E);
        fine_nodes.extend(ray_nodes(&ray.direction, &ray.density, lo, hi, order));
        coarse_nodes.extend(ray_nodes(&ray.direction, &ray.density, lo, hi, (order / 2).max(1)));
    }
    let sum = |nodes: &[(Vec<f64>, f64)]| {
        let parts = map_ordered(nodes, |(theta, w)| {
            let mut v = vec![0.0; dim];
            if *w != 0.0 {
                g(theta, &mut v);
            }
            v.iter_mut().for_each(|x| *x *= w);
            v
        });
        let mut acc = vec![CompensatedSum::new(); dim];
        for part in parts {
            for (a, x) in acc.iter_mut().zip(part) {
                a.add(x);
            }
        }
        acc
    };
    let mut fine = sum(&fine_nodes);
    let mut coarse = sum(&coarse_nodes);
    let mut v = vec![0.0; dim];
    for (mass, theta) in &measure.atoms {
        g(theta, &mut v);
        for k in 0..dim {
            fine[k].add(mass * v[k]);
            coarse[k].add(mass * v[k]);
        }
    }
    let value: Vec<f64> = fine.iter().map(|s| s.value()).collect();
    let component_gaps: Vec<f64> = value.iter().zip(&coarse).map(|(f, c)| (f - c.value()).abs()).collect();
    Ok(Integral { value, component_gaps })
}
