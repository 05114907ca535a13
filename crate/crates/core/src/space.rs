//! Truncated Hilbert spaces `H = H_1 ⊕ … ⊕ H_d`.
//!
//! Every component `H_j` is truncated to its first `n_j` coordinates in a
//! fixed orthonormal basis. Vectors are stored as one flat coefficient array,
//! components laid out consecutively.

use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Component count and truncation dimensions of `H`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SpaceLayout {
    dims: Arc<[usize]>,
    offsets: Arc<[usize]>,
}

impl SpaceLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(invalid("dims", "at least one component is required"));
        }
        if dims.contains(&0) {
            return Err(invalid("dims", "every truncation dimension must be >= 1"));
        }
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &n in &dims {
            acc += n;
            offsets.push(acc);
        }
        Ok(Self {
            dims: dims.into(),
            offsets: offsets.into(),
        })
    }

    /// A single component of dimension `n`.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    /// Number of components `d`.
    pub fn components(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, j: usize) -> usize {
        self.dims[j]
    }

    pub fn total_dim(&self) -> usize {
        self.offsets[self.dims.len()]
    }

    /// Flat index range of component `j`.
    pub fn range(&self, j: usize) -> Range<usize> {
        self.offsets[j]..self.offsets[j + 1]
    }

    /// Component and coefficient index of a flat index.
    pub fn locate(&self, flat: usize) -> (usize, usize) {
        let j = self.offsets.partition_point(|&o| o <= flat) - 1;
        (j, flat - self.offsets[j])
    }

    pub(crate) fn ensure_same(&self, other: &SpaceLayout) -> Result<()> {
        if self.dims == other.dims {
            Ok(())
        } else {
            Err(Error::LayoutMismatch {
                expected: self.dims.to_vec(),
                found: other.dims.to_vec(),
            })
        }
    }
}

impl TryFrom<Vec<usize>> for SpaceLayout {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<SpaceLayout> for Vec<usize> {
    fn from(layout: SpaceLayout) -> Self {
        layout.dims.to_vec()
    }
}

/// An element of the truncated space.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedVector {
    layout: SpaceLayout,
    coeffs: Vec<f64>,
}

impl TruncatedVector {
    pub fn zeros(layout: &SpaceLayout) -> Self {
        Self {
            layout: layout.clone(),
            coeffs: vec![0.0; layout.total_dim()],
        }
    }

    pub fn from_flat(layout: &SpaceLayout, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != layout.total_dim() {
            return Err(invalid(
                "coeffs",
                format!("expected {} coefficients, found {}", layout.total_dim(), coeffs.len()),
            ));
        }
        Ok(Self {
            layout: layout.clone(),
            coeffs,
        })
    }

    /// Builds a vector from per-component coefficient arrays; the layout is
    /// taken from their lengths.
    pub fn from_components(components: Vec<Vec<f64>>) -> Result<Self> {
        let layout = SpaceLayout::new(components.iter().map(Vec::len).collect())?;
        Ok(Self {
            layout,
            coeffs: components.into_iter().flatten().collect(),
        })
    }

    /// The basis vector `e_k` of component `j`.
    pub fn basis(layout: &SpaceLayout, j: usize, k: usize) -> Self {
        let mut v = Self::zeros(layout);
        v.coeffs[layout.range(j).start + k] = 1.0;
        v
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn component(&self, j: usize) -> &[f64] {
        &self.coeffs[self.layout.range(j)]
    }

    pub fn component_mut(&mut self, j: usize) -> &mut [f64] {
        let r = self.layout.range(j);
        &mut self.coeffs[r]
    }

    pub fn components(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.layout.components()).map(move |j| self.component(j))
    }

    /// `⟨u|v⟩ = Σ_j ⟨u_j|v_j⟩_j`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.layout.ensure_same(&other.layout)?;
        Ok(dot(&self.coeffs, &other.coeffs))
    }

    pub fn norm_sqr(&self) -> f64 {
        dot(&self.coeffs, &self.coeffs)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn component_norm(&self, j: usize) -> f64 {
        let c = self.component(j);
        dot(c, c).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&x| x == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|x| factor * x).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.layout.ensure_same(&other.layout)?;
        Ok(Self {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    /// `au = (a_1 u_1, …, a_d u_d)`.
    pub fn scale_by_multiindex(&self, a: &[f64]) -> Result<Self> {
        check_multiindex(&self.layout, a)?;
        let mut out = self.clone();
        for (j, &aj) in a.iter().enumerate() {
            out.component_mut(j).iter_mut().for_each(|x| *x *= aj);
        }
        Ok(out)
    }
}

fn check_multiindex(layout: &SpaceLayout, a: &[f64]) -> Result<()> {
    if a.len() != layout.components() {
        return Err(invalid(
            "multiindex",
            format!("expected {} entries, found {}", layout.components(), a.len()),
        ));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(invalid("multiindex", "entries must be finite"));
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Spectral data of one component: eigenvalues and, when the operator is not
/// diagonal in the working basis, the orthonormal eigenvectors.
#[derive(Clone, Debug, PartialEq)]
struct SpectralBlock {
    eigenvalues: Vec<f64>,
    /// Row `k` (length `n`) is the eigenvector for `eigenvalues[k]`.
    eigenvectors: Option<Vec<f64>>,
}

impl SpectralBlock {
    fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn coordinate(&self, k: usize, u: &[f64]) -> f64 {
        match &self.eigenvectors {
            None => u[k],
            Some(v) => {
                let n = self.dim();
                dot(&v[k * n..(k + 1) * n], u)
            }
        }
    }

    fn axpy_eigenvector(&self, k: usize, factor: f64, out: &mut [f64]) {
        match &self.eigenvectors {
            None => out[k] += factor,
            Some(v) => {
                let n = self.dim();
                for (o, e) in out.iter_mut().zip(&v[k * n..(k + 1) * n]) {
                    *o += factor * e;
                }
            }
        }
    }

    fn quadratic(&self, u: &[f64]) -> f64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != 0.0)
            .map(|(k, &l)| {
                let c = self.coordinate(k, u);
                l * c * c
            })
            .sum()
    }
}

/// A positive semi-definite trace-class operator `Q = Q_1 × … × Q_d`, held in
/// spectral form.
#[derive(Clone, Debug, PartialEq)]
pub struct CovOperator {
    layout: SpaceLayout,
    blocks: Vec<SpectralBlock>,
}

impl CovOperator {
    /// Operator diagonal in the working basis with the given eigenvalues.
    pub fn diagonal(layout: &SpaceLayout, eigenvalues: Vec<Vec<f64>>) -> Result<Self> {
        if eigenvalues.len() != layout.components() {
            return Err(invalid("eigenvalues", "one array per component is required"));
        }
        let mut blocks = Vec::with_capacity(eigenvalues.len());
        for (j, ev) in eigenvalues.into_iter().enumerate() {
            if ev.len() != layout.dim(j) {
                return Err(invalid(
                    "eigenvalues",
                    format!("component {j}: expected {} values, found {}", layout.dim(j), ev.len()),
                ));
            }
            if ev.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
                return Err(invalid("eigenvalues", "eigenvalues must be finite and >= 0"));
            }
            blocks.push(SpectralBlock {
                eigenvalues: ev,
                eigenvectors: None,
            });
        }
        Ok(Self {
            layout: layout.clone(),
            blocks,
        })
    }

    /// Diagonal operator whose layout is taken from the eigenvalue arrays.
    pub fn from_eigenvalues(eigenvalues: Vec<Vec<f64>>) -> Result<Self> {
        let layout = SpaceLayout::new(eigenvalues.iter().map(Vec::len).collect())?;
        Self::diagonal(&layout, eigenvalues)
    }

    /// Accepts one symmetric PSD matrix (row-major, `n_j × n_j`) per component
    /// and diagonalises it once.
    pub fn from_symmetric(layout: &SpaceLayout, matrices: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if matrices.len() != layout.components() {
            return Err(invalid("matrices", "one matrix per component is required"));
        }
        let mut blocks = Vec::with_capacity(matrices.len());
        for (j, rows) in matrices.into_iter().enumerate() {
            let n = layout.dim(j);
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(invalid("matrices", format!("component {j}: expected a {n}x{n} matrix")));
            }
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            blocks.push(spectral_block_from_dense(n, &flat, "matrices")?);
        }
        Ok(Self {
            layout: layout.clone(),
            blocks,
        })
    }

    pub fn identity(layout: &SpaceLayout) -> Self {
        Self::scalar(layout, 1.0)
    }

    pub fn zero(layout: &SpaceLayout) -> Self {
        Self::scalar(layout, 0.0)
    }

    fn scalar(layout: &SpaceLayout, value: f64) -> Self {
        Self {
            layout: layout.clone(),
            blocks: layout
                .dims()
                .iter()
                .map(|&n| SpectralBlock {
                    eigenvalues: vec![value; n],
                    eigenvectors: None,
                })
                .collect(),
        }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn eigenvalues(&self, j: usize) -> &[f64] {
        &self.blocks[j].eigenvalues
    }

    /// True when the operator is diagonal in the working basis.
    pub fn is_diagonal(&self) -> bool {
        self.blocks.iter().all(|b| b.eigenvectors.is_none())
    }

    pub fn apply(&self, u: &TruncatedVector) -> Result<TruncatedVector> {
        self.layout.ensure_same(u.layout())?;
        let mut out = TruncatedVector::zeros(&self.layout);
        for (j, block) in self.blocks.iter().enumerate() {
            let uj = u.component(j);
            let oj = out.component_mut(j);
            for (k, &l) in block.eigenvalues.iter().enumerate() {
                if l != 0.0 {
                    block.axpy_eigenvector(k, l * block.coordinate(k, uj), oj);
                }
            }
        }
        Ok(out)
    }

    /// `⟨Qu|u⟩`.
    pub fn quadratic(&self, u: &TruncatedVector) -> Result<f64> {
        self.layout.ensure_same(u.layout())?;
        Ok((0..self.blocks.len())
            .map(|j| self.component_quadratic(j, u.component(j)))
            .sum())
    }

    /// `⟨Q_j u_j|u_j⟩_j`.
    pub fn component_quadratic(&self, j: usize, uj: &[f64]) -> f64 {
        self.blocks[j].quadratic(uj)
    }

    pub fn trace(&self) -> f64 {
        (0..self.blocks.len()).map(|j| self.component_trace(j)).sum()
    }

    /// `⟨Q_j x|y⟩_j`.
    pub fn component_bilinear(&self, j: usize, x: &[f64], y: &[f64]) -> f64 {
        let block = &self.blocks[j];
        block
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != 0.0)
            .map(|(k, &l)| l * block.coordinate(k, x) * block.coordinate(k, y))
            .sum()
    }

    pub fn component_trace(&self, j: usize) -> f64 {
        self.blocks[j].eigenvalues.iter().sum()
    }

    pub fn is_component_zero(&self, j: usize) -> bool {
        self.blocks[j].eigenvalues.iter().all(|&l| l == 0.0)
    }

    /// `aQ = a_1 Q_1 × … × a_d Q_d`.
    pub fn scale_by_multiindex(&self, a: &[f64]) -> Result<Self> {
        check_multiindex(&self.layout, a)?;
        if a.iter().any(|&x| x < 0.0) {
            return Err(invalid("multiindex", "scaling a covariance requires entries >= 0"));
        }
        let mut out = self.clone();
        for (block, &aj) in out.blocks.iter_mut().zip(a) {
            block.eigenvalues.iter_mut().for_each(|l| *l *= aj);
        }
        Ok(out)
    }

    /// Adds `factor · Q_j^{1/2} z` to `out`, with `z` a vector of `n_j` draws.
    pub(crate) fn add_sqrt_applied(&self, j: usize, z: &[f64], factor: f64, out: &mut [f64]) {
        let block = &self.blocks[j];
        for (k, (&l, &zk)) in block.eigenvalues.iter().zip(z).enumerate() {
            if l != 0.0 {
                block.axpy_eigenvector(k, factor * l.sqrt() * zk, out);
            }
        }
    }

    /// Dense row-major matrix of the whole operator (`N × N`, `N` the total
    /// dimension).
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.layout.total_dim();
        let mut m = vec![0.0; n * n];
        for j in 0..self.layout.components() {
            let r = self.layout.range(j);
            for col in r.clone() {
                let e = TruncatedVector::basis(&self.layout, j, col - r.start);
                let qe = self.apply(&e).expect("same layout");
                for row in r.clone() {
                    m[row * n + col] = qe.as_slice()[row];
                }
            }
        }
        m
    }
}

fn spectral_block_from_dense(n: usize, flat: &[f64], name: &'static str) -> Result<SpectralBlock> {
    let scale = flat.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if flat.iter().any(|x| !x.is_finite()) {
        return Err(invalid(name, "entries must be finite"));
    }
    for r in 0..n {
        for c in 0..r {
            if (flat[r * n + c] - flat[c * n + r]).abs() > 1e-12 * scale.max(1.0) {
                return Err(invalid(name, "matrix is not symmetric"));
            }
        }
    }
    let mut eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, flat));
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE) * n as f64;
    for l in eig.eigenvalues.iter_mut() {
        if *l < -tol {
            return Err(invalid(name, "matrix is not positive semi-definite"));
        }
        if *l < 0.0 {
            *l = 0.0;
        }
    }
    let mut vectors = Vec::with_capacity(n * n);
    for k in 0..n {
        vectors.extend(eig.eigenvectors.column(k).iter().copied());
    }
    Ok(SpectralBlock {
        eigenvalues: eig.eigenvalues.iter().copied().collect(),
        eigenvectors: Some(vectors),
    })
}

/// `x ⊗ y : z ↦ ⟨x|z⟩ y`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneTensor {
    pub x: TruncatedVector,
    pub y: TruncatedVector,
}

impl RankOneTensor {
    pub fn new(x: TruncatedVector, y: TruncatedVector) -> Result<Self> {
        x.layout().ensure_same(y.layout())?;
        Ok(Self { x, y })
    }

    pub fn apply(&self, z: &TruncatedVector) -> Result<TruncatedVector> {
        Ok(self.y.scaled(self.x.inner(z)?))
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let x = self.x.as_slice();
        let y = self.y.as_slice();
        let n = x.len();
        let mut m = vec![0.0; n * n];
        // (x ⊗ y) e_c = x_c y, so entry (r, c) is y_r x_c.
        for r in 0..n {
            for c in 0..n {
                m[r * n + c] = y[r] * x[c];
            }
        }
        m
    }
}

/// A covariance operator written as a spectral part plus a weighted sum of
/// rank-one tensors. Covariances of subordinated processes take this form.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceOperator {
    pub spectral: CovOperator,
    pub rank_one: Vec<(f64, RankOneTensor)>,
}

impl CovarianceOperator {
    pub fn from_spectral(spectral: CovOperator) -> Self {
        Self {
            spectral,
            rank_one: Vec::new(),
        }
    }

    pub fn layout(&self) -> &SpaceLayout {
        self.spectral.layout()
    }

    pub fn push(&mut self, weight: f64, term: RankOneTensor) -> Result<()> {
        self.layout().ensure_same(term.x.layout())?;
        if weight != 0.0 {
            self.rank_one.push((weight, term));
        }
        Ok(())
    }

    pub fn apply(&self, z: &TruncatedVector) -> Result<TruncatedVector> {
        let mut out = self.spectral.apply(z)?;
        for (w, t) in &self.rank_one {
            out = out.add(&t.apply(z)?.scaled(*w))?;
        }
        Ok(out)
    }

    pub fn quadratic(&self, z: &TruncatedVector) -> Result<f64> {
        self.apply(z)?.inner(z)
    }

    pub fn trace(&self) -> f64 {
        self.spectral.trace()
            + self
                .rank_one
                .iter()
                .map(|(w, t)| w * dot(t.x.as_slice(), t.y.as_slice()))
                .sum::<f64>()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut m = self.spectral.to_dense();
        for (w, t) in &self.rank_one {
            for (a, b) in m.iter_mut().zip(t.to_dense()) {
                *a += w * b;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(dims: &[usize]) -> SpaceLayout {
        SpaceLayout::new(dims.to_vec()).unwrap()
    }

    #[test]
    fn layout_rejects_empty_and_zero_dims() {
        assert!(SpaceLayout::new(vec![]).is_err());
        assert!(SpaceLayout::new(vec![2, 0]).is_err());
        let l = layout(&[2, 1, 3]);
        assert_eq!(l.total_dim(), 6);
        assert_eq!(l.range(2), 3..6);
        assert_eq!(l.locate(3), (2, 0));
        assert_eq!(l.locate(1), (0, 1));
    }

    #[test]
    fn inner_examples() {
        let l = layout(&[2, 1]);
        let zero = TruncatedVector::zeros(&l);
        assert_eq!(zero.inner(&zero).unwrap(), 0.0);
        let e1 = TruncatedVector::basis(&l, 0, 0);
        assert_eq!(e1.inner(&e1).unwrap(), 1.0);
        let u = TruncatedVector::from_components(vec![vec![1.0, 2.0], vec![3.0]]).unwrap();
        let v = TruncatedVector::from_components(vec![vec![1.0, 0.0], vec![2.0]]).unwrap();
        assert_eq!(u.inner(&v).unwrap(), 7.0);
    }

    #[test]
    fn inner_rejects_layout_mismatch() {
        let u = TruncatedVector::zeros(&layout(&[2]));
        let v = TruncatedVector::zeros(&layout(&[1, 1]));
        assert!(matches!(u.inner(&v), Err(Error::LayoutMismatch { .. })));
    }

    #[test]
    fn apply_cov_examples() {
        let l = layout(&[2]);
        let u = TruncatedVector::from_flat(&l, vec![1.0, 1.0]).unwrap();
        assert_eq!(CovOperator::identity(&l).apply(&u).unwrap(), u);
        let q = CovOperator::diagonal(&l, vec![vec![2.0, 3.0]]).unwrap();
        assert_eq!(q.apply(&u).unwrap().as_slice(), &[2.0, 3.0]);
        assert!(CovOperator::zero(&l).apply(&u).unwrap().is_zero());
    }

    #[test]
    fn scale_by_multiindex_examples() {
        let u = TruncatedVector::from_components(vec![vec![1.0], vec![5.0]]).unwrap();
        assert_eq!(u.scale_by_multiindex(&[1.0, 1.0]).unwrap(), u);
        assert!(u.scale_by_multiindex(&[0.0, 0.0]).unwrap().is_zero());
        assert_eq!(u.scale_by_multiindex(&[2.0, 0.0]).unwrap().as_slice(), &[2.0, 0.0]);
        assert!(u.scale_by_multiindex(&[1.0]).is_err());
        let q = CovOperator::from_eigenvalues(vec![vec![1.0], vec![2.0]]).unwrap();
        assert!(q.scale_by_multiindex(&[-1.0, 1.0]).is_err());
        let aq = q.scale_by_multiindex(&[3.0, 0.5]).unwrap();
        assert_eq!(aq.eigenvalues(0), &[3.0]);
        assert_eq!(aq.eigenvalues(1), &[1.0]);
    }

    #[test]
    fn negative_eigenvalues_rejected() {
        assert!(CovOperator::from_eigenvalues(vec![vec![1.0, -0.1]]).is_err());
        let l = layout(&[2]);
        let m = vec![vec![vec![1.0, 2.0], vec![2.0, 1.0]]];
        assert!(CovOperator::from_symmetric(&l, m).is_err());
        let asym = vec![vec![vec![1.0, 0.2], vec![0.0, 1.0]]];
        assert!(CovOperator::from_symmetric(&l, asym).is_err());
    }

    #[test]
    fn symmetric_matrix_is_diagonalised_faithfully() {
        let l = layout(&[2, 1]);
        let q = CovOperator::from_symmetric(&l, vec![vec![vec![2.0, 0.5], vec![0.5, 1.0]], vec![vec![0.3]]]).unwrap();
        let dense = q.to_dense();
        let expected = [2.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.3];
        for (a, b) in dense.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{dense:?}");
        }
        assert!((q.trace() - 3.3).abs() < 1e-12);
    }

    #[test]
    fn rank_one_tensor_applies_as_defined() {
        let x = TruncatedVector::from_components(vec![vec![1.0, 2.0]]).unwrap();
        let y = TruncatedVector::from_components(vec![vec![0.0, 3.0]]).unwrap();
        let z = TruncatedVector::from_components(vec![vec![1.0, 1.0]]).unwrap();
        let t = RankOneTensor::new(x, y).unwrap();
        assert_eq!(t.apply(&z).unwrap().as_slice(), &[0.0, 9.0]);
        assert_eq!(t.to_dense(), vec![0.0, 0.0, 3.0, 6.0]);
    }
}
