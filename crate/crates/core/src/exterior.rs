//! Pointwise multilinear algebra: sorted multi-indices, permutation signs,
//! antisymmetric tensors, wedge products and the metric-weighted Hodge dual.
//!
//! Coordinate labels are plain `usize`: `0` is `u`, `1` is `r` and `2 + k` is
//! the angle `θ_{k+1}`.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const U: usize = 0;
pub const R: usize = 1;

/// Label of the `k`-th angle, zero based.
pub const fn angle(k: usize) -> usize {
    2 + k
}

pub fn is_angular(label: usize) -> bool {
    label >= 2
}

/// Human-readable label: `u`, `r`, `th1`, `th2`, ...
pub fn label_name(label: usize) -> String {
    match label {
        U => "u".to_string(),
        R => "r".to_string(),
        k => format!("th{}", k - 1),
    }
}

pub fn parse_label(name: &str, dim: usize) -> Option<usize> {
    let label = match name {
        "u" => U,
        "r" => R,
        _ => {
            let digits = name
                .strip_prefix("theta")
                .or_else(|| name.strip_prefix("th"))?;
            let k: usize = digits.parse().ok()?;
            if k == 0 {
                return None;
            }
            k + 1
        }
    };
    (label < dim).then_some(label)
}

/// Sign of the permutation that sorts `seq`; zero if any label repeats.
pub fn perm_sign(seq: &[usize]) -> i8 {
    let mut inversions = 0usize;
    for i in 0..seq.len() {
        for j in (i + 1)..seq.len() {
            match seq[i].cmp(&seq[j]) {
                std::cmp::Ordering::Equal => return 0,
                std::cmp::Ordering::Greater => inversions += 1,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Levi-Civita symbol with `ε_{u r θ₁ … θ_{D−2}} = +1`.
pub fn levi_civita(dim: usize, indices: &[usize]) -> Result<i8> {
    if indices.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: indices.len(),
        });
    }
    if indices.iter().any(|&l| l >= dim) {
        return Err(Error::InvalidIndex {
            indices: indices.to_vec(),
            dim,
            reason: "label out of range",
        });
    }
    Ok(perm_sign(indices))
}

/// Strictly increasing tuple of coordinate labels.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(indices: Vec<usize>, dim: usize) -> Result<Self> {
        if indices.iter().any(|&l| l >= dim) {
            return Err(Error::InvalidIndex {
                indices,
                dim,
                reason: "label out of range",
            });
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidIndex {
                indices,
                dim,
                reason: "labels must be strictly increasing",
            });
        }
        Ok(MultiIndex(indices))
    }

    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    /// Sorts `indices`, returning the permutation sign, or `None` on a repeat.
    pub fn sorted(indices: &[usize]) -> Option<(i8, MultiIndex)> {
        let sign = perm_sign(indices);
        if sign == 0 {
            return None;
        }
        let mut v = indices.to_vec();
        v.sort_unstable();
        Some((sign, MultiIndex(v)))
    }

    pub(crate) fn from_sorted_unchecked(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        MultiIndex(v)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, label: usize) -> bool {
        self.0.binary_search(&label).is_ok()
    }

    pub fn is_angular(&self) -> bool {
        self.0.iter().all(|&l| is_angular(l))
    }

    /// Number of angular labels.
    pub fn angular_count(&self) -> usize {
        self.0.iter().filter(|&&l| is_angular(l)).count()
    }

    pub fn angular_labels(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied().filter(|&l| is_angular(l))
    }

    /// `label ∧ self`: the sign of moving `label` into sorted position.
    pub fn insert(&self, label: usize) -> Option<(i8, MultiIndex)> {
        match self.0.binary_search(&label) {
            Ok(_) => None,
            Err(pos) => {
                let mut v = self.0.clone();
                v.insert(pos, label);
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                Some((sign, MultiIndex(v)))
            }
        }
    }

    pub fn without_position(&self, pos: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v.remove(pos);
        MultiIndex(v)
    }

    /// Sorted complement inside `0..dim`.
    pub fn complement(&self, dim: usize) -> MultiIndex {
        MultiIndex((0..dim).filter(|l| !self.contains(*l)).collect())
    }

    /// Concatenation `self ++ other`, sorted, with the sign of the sort.
    pub fn concat(&self, other: &MultiIndex) -> Option<(i8, MultiIndex)> {
        let joined: Vec<usize> = self.0.iter().chain(other.0.iter()).copied().collect();
        MultiIndex::sorted(&joined)
    }

    /// All sorted `k`-subsets of `labels`.
    pub fn combinations(labels: &[usize], k: usize) -> Vec<MultiIndex> {
        labels
            .iter()
            .copied()
            .combinations(k)
            .map(MultiIndex)
            .collect()
    }

    /// All sorted `k`-subsets of `0..dim`.
    pub fn all(dim: usize, k: usize) -> Vec<MultiIndex> {
        let labels: Vec<usize> = (0..dim).collect();
        Self::combinations(&labels, k)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.0.iter().map(|&l| label_name(l)).collect();
        write!(f, "[{}]", names.join(","))
    }
}

/// Totally antisymmetric tensor at a point, stored on sorted keys only.
#[derive(Clone, Debug, PartialEq)]
pub struct AltTensor {
    dim: usize,
    degree: usize,
    entries: BTreeMap<MultiIndex, Complex64>,
}

impl AltTensor {
    pub fn zero(dim: usize, degree: usize) -> Self {
        AltTensor {
            dim,
            degree,
            entries: BTreeMap::new(),
        }
    }

    pub fn scalar(dim: usize, value: Complex64) -> Self {
        let mut t = Self::zero(dim, 0);
        t.set(&[], value).expect("empty index is valid");
        t
    }

    /// Basis covector `d x^label`.
    pub fn basis(dim: usize, label: usize) -> Result<Self> {
        let mut t = Self::zero(dim, 1);
        t.set(&[label], Complex64::new(1.0, 0.0))?;
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.entries.iter()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Sets the component for an arbitrary (possibly unsorted) index tuple.
    pub fn set(&mut self, indices: &[usize], value: Complex64) -> Result<()> {
        if indices.len() != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                actual: indices.len(),
            });
        }
        if indices.iter().any(|&l| l >= self.dim) {
            return Err(Error::InvalidIndex {
                indices: indices.to_vec(),
                dim: self.dim,
                reason: "label out of range",
            });
        }
        let (sign, key) = MultiIndex::sorted(indices).ok_or_else(|| Error::InvalidIndex {
            indices: indices.to_vec(),
            dim: self.dim,
            reason: "repeated label in antisymmetric slot",
        })?;
        let v = value * f64::from(sign);
        if v == Complex64::new(0.0, 0.0) {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, v);
        }
        Ok(())
    }

    /// Component for any index tuple, resolved through the permutation sign.
    pub fn get(&self, indices: &[usize]) -> Complex64 {
        if indices.len() != self.degree {
            return Complex64::new(0.0, 0.0);
        }
        match MultiIndex::sorted(indices) {
            None => Complex64::new(0.0, 0.0),
            Some((sign, key)) => self
                .entries
                .get(&key)
                .map_or(Complex64::new(0.0, 0.0), |v| v * f64::from(sign)),
        }
    }

    pub fn add(&self, other: &AltTensor) -> Result<AltTensor> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (k, v) in &other.entries {
            let e = out.entries.entry(k.clone()).or_default();
            *e += v;
        }
        out.entries.retain(|_, v| v.norm() != 0.0);
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> AltTensor {
        let mut out = self.clone();
        for v in out.entries.values_mut() {
            *v *= c;
        }
        out.entries.retain(|_, v| v.norm() != 0.0);
        out
    }

    pub fn sub(&self, other: &AltTensor) -> Result<AltTensor> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn check_same(&self, other: &AltTensor) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                actual: other.degree,
            });
        }
        Ok(())
    }
}

/// Graded-antisymmetric product. Degrees summing above `dim` give the zero tensor.
pub fn wedge(a: &AltTensor, b: &AltTensor) -> Result<AltTensor> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            actual: b.dim,
        });
    }
    let mut out = AltTensor::zero(a.dim, a.degree + b.degree);
    if a.degree + b.degree > a.dim {
        return Ok(out);
    }
    for (ka, va) in &a.entries {
        for (kb, vb) in &b.entries {
            if let Some((sign, key)) = ka.concat(kb) {
                *out.entries.entry(key).or_default() += va * vb * f64::from(sign);
            }
        }
    }
    out.entries.retain(|_, v| v.norm() != 0.0);
    Ok(out)
}

/// Metric at a single point, with inverse and determinant data.
#[derive(Clone, Debug)]
pub struct PointMetric {
    dim: usize,
    lower: DMatrix<f64>,
    upper: DMatrix<f64>,
    sqrt_abs_det: f64,
    det_sign: i8,
}

impl PointMetric {
    pub fn from_lower(lower: DMatrix<f64>) -> Result<Self> {
        let dim = lower.nrows();
        if lower.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: lower.ncols(),
            });
        }
        let det = lower.determinant();
        let upper = lower
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Consistency("degenerate metric".into()))?;
        Ok(PointMetric {
            dim,
            lower,
            upper,
            sqrt_abs_det: det.abs().sqrt(),
            det_sign: if det < 0.0 { -1 } else { 1 },
        })
    }

    /// Builds from known lower and upper forms, skipping the numeric inverse.
    pub fn from_parts(lower: DMatrix<f64>, upper: DMatrix<f64>, sqrt_abs_det: f64, det_sign: i8) -> Self {
        PointMetric {
            dim: lower.nrows(),
            lower,
            upper,
            sqrt_abs_det,
            det_sign,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DMatrix<f64> {
        &self.upper
    }

    pub fn sqrt_abs_det(&self) -> f64 {
        self.sqrt_abs_det
    }

    pub fn det_sign(&self) -> i8 {
        self.det_sign
    }

    /// Raises every slot of `w` with `g^{μν}`. Each sorted component of the
    /// result is a sum of minors of the inverse metric.
    pub fn raise(&self, w: &AltTensor) -> AltTensor {
        let k = w.degree;
        let mut out = AltTensor::zero(self.dim, k);
        for upper_key in MultiIndex::all(self.dim, k) {
            let mut acc = Complex64::new(0.0, 0.0);
            for (lower_key, v) in &w.entries {
                let minor = DMatrix::from_fn(k, k, |i, j| {
                    self.upper[(upper_key.0[i], lower_key.0[j])]
                });
                let m = if k == 0 { 1.0 } else { minor.determinant() };
                if m != 0.0 {
                    acc += v * m;
                }
            }
            if acc.norm() != 0.0 {
                out.entries.insert(upper_key, acc);
            }
        }
        out
    }
}

/// `(⋆w)_{ν₁…ν_{D−k}} = (1/k!) √|g| w^{μ₁…μ_k} ε_{μ₁…μ_k ν₁…ν_{D−k}}`.
pub fn hodge_point(w: &AltTensor, g: &PointMetric) -> Result<AltTensor> {
    if w.dim != g.dim {
        return Err(Error::DimensionMismatch {
            expected: g.dim,
            actual: w.dim,
        });
    }
    let raised = g.raise(w);
    let mut out = AltTensor::zero(w.dim, w.dim - w.degree);
    for (mu, v) in &raised.entries {
        let nu = mu.complement(w.dim);
        let (sign, _) = mu.concat(&nu).expect("complement is disjoint");
        *out.entries.entry(nu).or_default() += v * g.sqrt_abs_det * f64::from(sign);
    }
    out.entries.retain(|_, v| v.norm() != 0.0);
    Ok(out)
}
