//! Browser bindings: exponent curves, projection histograms and sample
//! paths for the three closed-form families on ℝ².
//!
//! Everything here is ordinary Rust; the same methods run natively in tests.

use sublevy::mc::SeedSchedule;
use sublevy::verify::sample_matrix;
use sublevy::{
    CovOperator, Family, HnigParams, HvgParams, SpaceLayout, StableParams, SubordinatedProcessSpec, TruncatedVector,
};
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct Demo {
    family: Family,
    spec: SubordinatedProcessSpec,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn direction(angle: f64) -> [f64; 2] {
    [angle.cos(), angle.sin()]
}

#[wasm_bindgen]
impl Demo {
    /// `family` is `hnig` (p1 = s, p2 = c), `stable` (p1 = α) or `hvg`
    /// (p1 = a); `b` and the diagonal of `Q` are given coordinate-wise.
    #[wasm_bindgen(constructor)]
    pub fn new(family: &str, p1: f64, p2: f64, b1: f64, b2: f64, q1: f64, q2: f64) -> Result<Demo, String> {
        let layout = SpaceLayout::single(2).map_err(err)?;
        let q = CovOperator::diagonal(&layout, vec![vec![q1, q2]]).map_err(err)?;
        let b = TruncatedVector::from_flat(&layout, vec![b1, b2]).map_err(err)?;
        let family = match family {
            "hnig" => Family::Hnig(HnigParams { s: p1, c: p2, b, q }),
            "stable" => Family::Stable(StableParams { alpha: p1, q }),
            "hvg" => Family::Hvg(HvgParams { a: p1, b, q }),
            other => return Err(format!("unknown family `{other}`")),
        };
        let spec = family.spec().map_err(err)?;
        Ok(Demo { family, spec })
    }

    /// `[r, Re ρ, Im ρ]` triples for `u = r·(cos a, sin a)`, `r ∈ [0, r_max]`.
    pub fn exponent_curve(&self, angle: f64, r_max: f64, points: usize) -> Result<Vec<f64>, String> {
        if points < 2 || !(r_max > 0.0) {
            return Err("need at least two points and r_max > 0".into());
        }
        let v = direction(angle);
        let layout = self.spec.layout();
        let mut out = Vec::with_capacity(3 * points);
        for i in 0..points {
            let r = r_max * i as f64 / (points - 1) as f64;
            let u = TruncatedVector::from_flat(layout, vec![r * v[0], r * v[1]]).map_err(err)?;
            let rho = self.spec.exponent(&u).map_err(err)?;
            out.extend([r, rho.re, rho.im]);
        }
        Ok(out)
    }

    /// Closed-form exponent at the same probe, for comparison with the curve.
    pub fn closed_form(&self, u1: f64, u2: f64) -> Result<Vec<f64>, String> {
        let u = TruncatedVector::from_flat(self.spec.layout(), vec![u1, u2]).map_err(err)?;
        let rho = self.family.exponent(&u).map_err(err)?;
        Ok(vec![rho.re, rho.im])
    }

    /// Histogram of `⟨v|X(t)⟩` as `[lo, hi, count_0, …]`, range set by the
    /// 0.5% and 99.5% sample quantiles so heavy tails do not flatten it.
    pub fn projection_histogram(
        &self,
        angle: f64,
        t: f64,
        samples: usize,
        bins: usize,
        seed: u64,
    ) -> Result<Vec<f64>, String> {
        if samples == 0 || bins == 0 || !(t > 0.0) {
            return Err("samples, bins and t must be positive".into());
        }
        let v = direction(angle);
        let x = sample_matrix(&self.spec, t, samples, &SeedSchedule::new(seed).derive("histogram"));
        let mut proj: Vec<f64> = x.chunks(2).map(|p| v[0] * p[0] + v[1] * p[1]).collect();
        proj.sort_by(f64::total_cmp);
        let q = |p: f64| proj[((samples - 1) as f64 * p).round() as usize];
        let (lo, mut hi) = (q(0.005), q(0.995));
        if hi <= lo {
            hi = lo + 1.0;
        }
        let mut out = vec![0.0; bins + 2];
        out[0] = lo;
        out[1] = hi;
        let w = (hi - lo) / bins as f64;
        for p in proj.into_iter().filter(|p| (lo..=hi).contains(p)) {
            let k = (((p - lo) / w) as usize).min(bins - 1);
            out[k + 2] += 1.0;
        }
        Ok(out)
    }

    /// One path on `steps` equal steps up to `t_max`: `[t, x1, x2]` triples.
    pub fn sample_path(&self, t_max: f64, steps: usize, seed: u64) -> Result<Vec<f64>, String> {
        if steps == 0 || !(t_max > 0.0) {
            return Err("steps and t_max must be positive".into());
        }
        let grid: Vec<f64> = (0..=steps).map(|i| t_max * i as f64 / steps as f64).collect();
        let mut rng = SeedSchedule::new(seed).derive("path").stream(0);
        let path = self.spec.simulate_path(&mut rng, &grid).map_err(err)?;
        Ok(grid
            .iter()
            .zip(&path)
            .flat_map(|(t, x)| [*t, x.as_slice()[0], x.as_slice()[1]])
            .collect())
    }

    pub fn classification(&self) -> String {
        self.spec.classify().summary()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_matches_closed_form() {
        let d = Demo::new("hnig", 1.0, 1.0, 0.5, 0.0, 1.0, 0.5).unwrap();
        let c = d.exponent_curve(0.3, 3.0, 7).unwrap();
        assert_eq!(c.len(), 21);
        assert_eq!(&c[..3], &[0.0, 0.0, 0.0]);
        let v = direction(0.3);
        let want = d.closed_form(3.0 * v[0], 3.0 * v[1]).unwrap();
        assert!((c[19] - want[0]).abs() < 1e-12 && (c[20] - want[1]).abs() < 1e-12);
    }

    #[test]
    fn histogram_counts_and_determinism() {
        let d = Demo::new("hvg", 2.0, 0.0, 0.3, -0.2, 1.0, 0.5).unwrap();
        let h = d.projection_histogram(0.0, 1.0, 10_000, 40, 9).unwrap();
        assert_eq!(h.len(), 42);
        assert!(h[0] < h[1]);
        let total: f64 = h[2..].iter().sum();
        assert!((9_800.0..=10_000.0).contains(&total), "{total}");
        assert_eq!(h, d.projection_histogram(0.0, 1.0, 10_000, 40, 9).unwrap());
    }

    #[test]
    fn path_starts_at_origin() {
        let d = Demo::new("stable", 1.5, 0.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let p = d.sample_path(2.0, 100, 1).unwrap();
        assert_eq!(p.len(), 303);
        assert_eq!(&p[..3], &[0.0, 0.0, 0.0]);
        assert_eq!(p[300], 2.0);
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(Demo::new("gauss", 1.0, 1.0, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(Demo::new("stable", 3.0, 0.0, 0.0, 0.0, 1.0, 1.0).is_err());
        let d = Demo::new("hnig", 1.0, 0.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(d.exponent_curve(0.0, 1.0, 1).is_err());
        assert_eq!(d.classification(), "not integrable");
    }
}
