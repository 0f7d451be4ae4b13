//! Differential forms whose components are polyhomogeneous series.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::AngularFunction;
use crate::error::{Error, Result};
use crate::exterior::{is_angular, perm_sign, AltTensor, MultiIndex, R, U};
use crate::geometry::BondiChart;
use crate::halfint::HalfInt;
use crate::series::{CoefficientFunction, PolyhomSeries};

#[derive(Clone, Debug)]
pub struct FormField {
    chart: BondiChart,
    degree: usize,
    components: BTreeMap<MultiIndex, PolyhomSeries>,
}

impl PartialEq for FormField {
    fn eq(&self, other: &Self) -> bool {
        self.chart.dim() == other.chart.dim()
            && self.degree == other.degree
            && self.components == other.components
    }
}

impl FormField {
    pub fn zero(chart: &BondiChart, degree: usize) -> Result<Self> {
        if degree > chart.dim() {
            return Err(Error::DegreeMismatch {
                expected: chart.dim(),
                actual: degree,
            });
        }
        Ok(Self::zero_unchecked(chart, degree))
    }

    fn zero_unchecked(chart: &BondiChart, degree: usize) -> Self {
        FormField {
            chart: chart.clone(),
            degree,
            components: BTreeMap::new(),
        }
    }

    /// A 0-form.
    pub fn scalar(chart: &BondiChart, phi: PolyhomSeries) -> Self {
        let mut f = Self::zero_unchecked(chart, 0);
        f.add_sorted(MultiIndex::empty(), &phi);
        f
    }

    pub fn chart(&self) -> &BondiChart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn n_angles(&self) -> usize {
        self.chart.n_angles()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (&MultiIndex, &PolyhomSeries)> {
        self.components.iter()
    }

    pub fn component(&self, index: &MultiIndex) -> Option<&PolyhomSeries> {
        self.components.get(index)
    }

    /// Component for an arbitrary label order, with the permutation sign.
    pub fn get(&self, indices: &[usize]) -> PolyhomSeries {
        let zero = PolyhomSeries::zero(self.n_angles());
        match MultiIndex::sorted(indices) {
            Some((sign, key)) => self
                .components
                .get(&key)
                .map_or(zero, |s| s.scale_real(f64::from(sign))),
            None => zero,
        }
    }

    /// Sets the component at an arbitrary label order (antisymmetry applied).
    pub fn set(&mut self, indices: &[usize], value: PolyhomSeries) -> Result<()> {
        self.check_indices(indices)?;
        let (sign, key) = MultiIndex::sorted(indices).ok_or_else(|| Error::InvalidIndex {
            indices: indices.to_vec(),
            dim: self.dim(),
            reason: "repeated label",
        })?;
        self.components.remove(&key);
        self.add_sorted(key, &value.scale_real(f64::from(sign)));
        Ok(())
    }

    fn check_indices(&self, indices: &[usize]) -> Result<()> {
        if indices.len() != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                actual: indices.len(),
            });
        }
        if indices.iter().any(|&l| l >= self.dim()) {
            return Err(Error::InvalidIndex {
                indices: indices.to_vec(),
                dim: self.dim(),
                reason: "label out of range",
            });
        }
        Ok(())
    }

    pub(crate) fn add_sorted(&mut self, key: MultiIndex, value: &PolyhomSeries) {
        if value.is_zero() {
            return;
        }
        let sum = match self.components.get(&key) {
            Some(old) => old.add(value),
            None => value.clone(),
        };
        if sum.is_zero() {
            self.components.remove(&key);
        } else {
            self.components.insert(key, sum);
        }
    }

    fn check_same_shape(&self, other: &FormField) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
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

    pub fn add(&self, other: &FormField) -> Result<FormField> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (k, s) in &other.components {
            out.add_sorted(k.clone(), s);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &FormField) -> Result<FormField> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> FormField {
        self.map(|s| s.scale(c))
    }

    pub fn scale_real(&self, c: f64) -> FormField {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Applies `op` to every component series.
    pub fn map(&self, op: impl Fn(&PolyhomSeries) -> PolyhomSeries) -> FormField {
        let mut out = Self::zero_unchecked(&self.chart, self.degree);
        for (k, s) in &self.components {
            out.add_sorted(k.clone(), &op(s));
        }
        out
    }

    pub fn truncate(&self, l2: i32) -> FormField {
        self.map(|s| s.truncate(l2))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.components.values().map(|s| s.max_abs_coeff()).fold(0.0, f64::max)
    }

    /// Series-level comparison: every coefficient of the difference is below `tol`.
    pub fn approx_eq(&self, other: &FormField, tol: f64) -> bool {
        self.sub(other).is_ok_and(|d| d.max_abs_coeff() <= tol)
    }

    /// Smallest stored `l` (doubled) of every component.
    pub fn leading_orders(&self) -> BTreeMap<MultiIndex, i32> {
        self.components
            .iter()
            .filter_map(|(k, s)| s.min_l2().map(|l| (k.clone(), l)))
            .collect()
    }

    /// Pointwise values at `(u, r, angles)`.
    pub fn eval(&self, u: f64, r: f64, angles: &[f64]) -> AltTensor {
        let mut t = AltTensor::zero(self.dim(), self.degree);
        for (k, s) in &self.components {
            t.set(k.as_slice(), s.eval(u, r, angles)).expect("stored keys are valid");
        }
        t
    }

    pub fn exterior_derivative(&self) -> FormField {
        let mut out = Self::zero_unchecked(&self.chart, self.degree + 1);
        if self.degree >= self.dim() {
            return out;
        }
        for (k, s) in &self.components {
            for label in 0..self.dim() {
                if let Some((sign, key)) = k.insert(label) {
                    let ds = partial(s, label);
                    out.add_sorted(key, &ds.scale_real(f64::from(sign)));
                }
            }
        }
        out
    }

    /// Contravariant components `F^M` on sorted keys.
    pub fn raise_indices(&self) -> FormField {
        let mut out = Self::zero_unchecked(&self.chart, self.degree);
        for (lower, s) in &self.components {
            let angular: Vec<usize> = lower.angular_labels().collect();
            let mut ang_factor = AngularFunction::one(self.n_angles());
            for &a in &angular {
                ang_factor = ang_factor.mul(&self.chart.sphere().gamma_inv[a - 2]);
            }
            let base = s.mul_angular(&ang_factor).shift_r(-2 * angular.len() as i32);
            let lower_ur: Vec<usize> = lower.as_slice().iter().copied().filter(|&l| !is_angular(l)).collect();
            for upper_ur in ur_subsets(lower_ur.len()) {
                let factor = ur_minor(&upper_ur, &lower_ur);
                if factor == 0.0 {
                    continue;
                }
                let mut labels = upper_ur.clone();
                labels.extend(&angular);
                let key = MultiIndex::from_sorted_unchecked(labels);
                out.add_sorted(key, &base.scale_real(factor));
            }
        }
        out
    }

    /// `(⋆F)_ν = √|g| Σ_M F^M ε_{M ν}` over sorted `M`.
    pub fn hodge_star(&self) -> FormField {
        let d = self.dim();
        let raised = self.raise_indices();
        let sqrt_g = &self.chart.sphere().sqrt_gamma;
        let mut out = Self::zero_unchecked(&self.chart, d - self.degree);
        for (m, s) in &raised.components {
            let nu = m.complement(d);
            let joined: Vec<usize> = m.as_slice().iter().chain(nu.as_slice()).copied().collect();
            let sign = f64::from(perm_sign(&joined));
            let value = s.mul_angular(sqrt_g).shift_r(self.n_angles() as i32).scale_real(sign);
            out.add_sorted(nu, &value);
        }
        out
    }

    /// `⋆⋆ = hodge_sign · id` on this degree.
    pub fn hodge_sign(&self) -> i32 {
        let k = self.degree;
        let d = self.dim();
        let s = i32::from(self.chart.det_sign());
        if (k * (d - k)).is_multiple_of(2) {
            s
        } else {
            -s
        }
    }

    pub fn wedge(&self, other: &FormField) -> Result<FormField> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        let degree = self.degree + other.degree;
        if degree > self.dim() {
            return Ok(Self::zero_unchecked(&self.chart, degree));
        }
        let mut out = Self::zero_unchecked(&self.chart, degree);
        for (a, sa) in &self.components {
            for (b, sb) in &other.components {
                if let Some((sign, key)) = a.concat(b) {
                    out.add_sorted(key, &sa.mul(sb)?.scale_real(f64::from(sign)));
                }
            }
        }
        Ok(out)
    }

    /// `B + dε`.
    pub fn gauge_transform(&self, epsilon: &FormField) -> Result<FormField> {
        if epsilon.degree + 1 != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree.saturating_sub(1),
                actual: epsilon.degree,
            });
        }
        self.add(&epsilon.exterior_derivative())
    }
}

/// Partial derivative of a component along a coordinate label.
pub fn partial(s: &PolyhomSeries, label: usize) -> PolyhomSeries {
    match label {
        U => s.d_u(),
        R => s.d_r(),
        l => s.d_angle(l - 2),
    }
}

/// Sorted subsets of `{u, r}` with `k` elements.
fn ur_subsets(k: usize) -> Vec<Vec<usize>> {
    match k {
        0 => vec![vec![]],
        1 => vec![vec![U], vec![R]],
        _ => vec![vec![U, R]],
    }
}

/// Minor of the inverse `(u, r)` block with rows `upper` and columns `lower`.
fn ur_minor(upper: &[usize], lower: &[usize]) -> f64 {
    let ginv = |a: usize, b: usize| match (a, b) {
        (U, U) => 0.0,
        (R, R) => 1.0,
        _ => -1.0,
    };
    match (upper, lower) {
        ([], []) => 1.0,
        ([a], [b]) => ginv(*a, *b),
        ([_, _], [_, _]) => ginv(U, U) * ginv(R, R) - ginv(U, R) * ginv(R, U),
        _ => 0.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FalloffFamily {
    Radiation,
    Coulomb,
}

impl FalloffFamily {
    /// Doubled leading `l` of a component with `s` angular indices.
    pub fn component_l2(self, dim: usize, p: usize, s: usize) -> i32 {
        let (d, p, s) = (dim as i32, p as i32, s as i32);
        match self {
            FalloffFamily::Radiation => d - 2 - 2 * s,
            FalloffFamily::Coulomb => 2 * (d - p - 2 - s),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FalloffFamily::Radiation => "radiation",
            FalloffFamily::Coulomb => "coulomb",
        }
    }
}

impl fmt::Display for FalloffFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FalloffFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "radiation" => Ok(FalloffFamily::Radiation),
            "coulomb" => Ok(FalloffFamily::Coulomb),
            other => Err(Error::Config(format!("unknown fall-off family `{other}`"))),
        }
    }
}

/// Leading exponent of every component of a `p`-form under a boundary condition.
#[derive(Clone, Debug, PartialEq)]
pub struct FalloffTemplate {
    pub dim: usize,
    pub p: usize,
    pub family: FalloffFamily,
    pub with_log: bool,
    entries: BTreeMap<MultiIndex, i32>,
}

pub fn check_form_degree(dim: usize, p: usize) -> Result<()> {
    if dim < 3 {
        return Err(Error::InvalidDimension(dim));
    }
    if p < 1 || p + 2 > dim {
        return Err(Error::InvalidFormDegree { p, dim, max: dim - 2 });
    }
    Ok(())
}

pub fn falloff_template(dim: usize, p: usize, family: FalloffFamily, with_log: bool) -> Result<FalloffTemplate> {
    check_form_degree(dim, p)?;
    let entries = MultiIndex::all(dim, p)
        .into_iter()
        .map(|idx| {
            let l2 = family.component_l2(dim, p, idx.angular_count());
            (idx, l2)
        })
        .collect();
    Ok(FalloffTemplate {
        dim,
        p,
        family,
        with_log,
        entries,
    })
}

impl FalloffTemplate {
    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, HalfInt)> {
        self.entries.iter().map(|(k, l2)| (k, HalfInt::from_twice(*l2)))
    }

    /// Required leading `l` (doubled) of a component.
    pub fn l2(&self, index: &MultiIndex) -> Option<i32> {
        self.entries.get(index).copied()
    }

    /// Builds a field at the template exponents. `coeff(index, m)` supplies
    /// the coefficient of `r^{−l} (ln r)^m`; `m = 1` is queried only with logs on.
    pub fn populate(
        &self,
        chart: &BondiChart,
        mut coeff: impl FnMut(&MultiIndex, u8) -> Option<CoefficientFunction>,
    ) -> Result<FormField> {
        if chart.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: chart.dim(),
            });
        }
        let mut f = FormField::zero(chart, self.p)?;
        let logs: &[u8] = if self.with_log { &[0, 1] } else { &[0] };
        for (idx, &l2) in &self.entries {
            for &m in logs {
                if let Some(c) = coeff(idx, m) {
                    f.add_sorted(idx.clone(), &PolyhomSeries::term(l2, m, c));
                }
            }
        }
        Ok(f)
    }

    pub fn check(&self, field: &FormField) -> Result<FalloffReport> {
        check_falloff(field, self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FalloffEntry {
    pub index: MultiIndex,
    pub required: HalfInt,
    pub worst: HalfInt,
    pub passed: bool,
}

/// Outcome of a fall-off check; `entries` lists every stored component.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FalloffReport {
    pub entries: Vec<FalloffEntry>,
    pub passed: bool,
}

impl FalloffReport {
    pub fn failures(&self) -> impl Iterator<Item = &FalloffEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }
}

pub fn check_falloff(field: &FormField, template: &FalloffTemplate) -> Result<FalloffReport> {
    if field.dim() != template.dim {
        return Err(Error::DimensionMismatch {
            expected: template.dim,
            actual: field.dim(),
        });
    }
    if field.degree() != template.p {
        return Err(Error::DegreeMismatch {
            expected: template.p,
            actual: field.degree(),
        });
    }
    let mut report = FalloffReport {
        entries: Vec::new(),
        passed: true,
    };
    for (idx, l2) in field.leading_orders() {
        let required = template.l2(&idx).expect("template covers every p-index");
        let passed = l2 >= required;
        report.passed &= passed;
        report.entries.push(FalloffEntry {
            index: idx,
            required: HalfInt::from_twice(required),
            worst: HalfInt::from_twice(l2),
            passed,
        });
    }
    Ok(report)
}
