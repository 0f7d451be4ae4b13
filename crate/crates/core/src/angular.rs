//! Trigonometric monomial algebra on the celestial sphere `S^{D−2}`.
//!
//! An [`AngularFunction`] is a finite sum of monomials
//! `c · ∏ᵢ sin^{aᵢ}θᵢ cos^{bᵢ}θᵢ` with integer exponents. The canonical form
//! keeps every non-negative cosine exponent in `{0, 1}` by rewriting
//! `cos² = 1 − sin²`, which makes the representation of trig polynomials
//! unique and lets identities such as `d∘d = 0` come out as empty term maps.
//!
//! The last angle is azimuthal (`[0, 2π)`); all others are polar (`[0, π]`).
//! The sphere integral includes the round-sphere density
//! `√γ = ∏_k sin^{D−2−k}θ_k` unless asked not to.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;

/// Per-angle `(sin exponent, cos exponent)`.
pub type Exps = Vec<(i32, i32)>;

/// Relative size below which a sum of two terms is treated as exact cancellation.
pub(crate) const CANCEL_EPS: f64 = 64.0 * f64::EPSILON;

/// Adds `c` into `map[key]`, dropping the entry when the sum is zero up to
/// rounding of its operands.
pub(crate) fn accumulate<K: Ord>(map: &mut BTreeMap<K, Complex64>, key: K, c: Complex64) {
    if c.norm() == 0.0 {
        return;
    }
    match map.entry(key) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let old = *e.get();
            let sum = old + c;
            if sum.norm() <= CANCEL_EPS * old.norm().max(c.norm()) {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrigMonomial {
    pub coeff: Complex64,
    pub exps: Exps,
}

impl TrigMonomial {
    pub fn eval(&self, angles: &[f64]) -> Complex64 {
        self.coeff * monomial_value(&self.exps, angles)
    }
}

fn monomial_value(exps: &[(i32, i32)], angles: &[f64]) -> f64 {
    exps.iter()
        .zip(angles)
        .map(|(&(a, b), &t)| {
            let s = if a == 0 { 1.0 } else { t.sin().powi(a) };
            let c = if b == 0 { 1.0 } else { t.cos().powi(b) };
            s * c
        })
        .product()
}

#[derive(Clone, PartialEq)]
pub struct AngularFunction {
    n_angles: usize,
    terms: BTreeMap<Exps, Complex64>,
}

impl fmt::Debug for AngularFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for AngularFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exps, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (k, &(a, b)) in exps.iter().enumerate() {
                if a != 0 {
                    write!(f, "·sin^{a}(θ{})", k + 1)?;
                }
                if b != 0 {
                    write!(f, "·cos^{b}(θ{})", k + 1)?;
                }
            }
        }
        Ok(())
    }
}

impl AngularFunction {
    pub fn zero(n_angles: usize) -> Self {
        AngularFunction {
            n_angles,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_angles: usize, c: Complex64) -> Self {
        Self::monomial(n_angles, c, vec![(0, 0); n_angles])
    }

    pub fn one(n_angles: usize) -> Self {
        Self::constant(n_angles, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(n_angles: usize, coeff: Complex64, exps: Exps) -> Self {
        assert_eq!(exps.len(), n_angles, "exponent table length must equal angle count");
        let mut f = Self::zero(n_angles);
        f.push(exps, coeff);
        f
    }

    /// `sin^a θ_k · cos^b θ_k` (angle `k` zero based).
    pub fn trig(n_angles: usize, k: usize, sin_exp: i32, cos_exp: i32) -> Self {
        let mut exps = vec![(0, 0); n_angles];
        exps[k] = (sin_exp, cos_exp);
        Self::monomial(n_angles, Complex64::new(1.0, 0.0), exps)
    }

    pub fn from_monomials(n_angles: usize, monomials: impl IntoIterator<Item = TrigMonomial>) -> Self {
        let mut f = Self::zero(n_angles);
        for m in monomials {
            assert_eq!(m.exps.len(), n_angles);
            f.push(m.exps, m.coeff);
        }
        f
    }

    pub fn n_angles(&self) -> usize {
        self.n_angles
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = TrigMonomial> + '_ {
        self.terms.iter().map(|(e, c)| TrigMonomial {
            coeff: *c,
            exps: e.clone(),
        })
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Inserts one monomial, reducing non-negative cosine powers to `{0, 1}`.
    fn push(&mut self, exps: Exps, c: Complex64) {
        if c.norm() == 0.0 {
            return;
        }
        let mut stack = vec![(exps, c)];
        while let Some((e, c)) = stack.pop() {
            match e.iter().position(|&(_, b)| b >= 2) {
                None => accumulate(&mut self.terms, e, c),
                Some(k) => {
                    let (a, b) = e[k];
                    let mut lo = e.clone();
                    lo[k] = (a, b - 2);
                    let mut hi = e;
                    hi[k] = (a + 2, b - 2);
                    stack.push((lo, c));
                    stack.push((hi, -c));
                }
            }
        }
    }

    fn check_same(&self, other: &AngularFunction) {
        assert_eq!(
            self.n_angles, other.n_angles,
            "angular functions on spheres of different dimension"
        );
    }

    pub fn add(&self, other: &AngularFunction) -> AngularFunction {
        self.check_same(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            accumulate(&mut out.terms, e.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &AngularFunction) -> AngularFunction {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> AngularFunction {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> AngularFunction {
        if c.norm() == 0.0 {
            return Self::zero(self.n_angles);
        }
        AngularFunction {
            n_angles: self.n_angles,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> AngularFunction {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn mul(&self, other: &AngularFunction) -> AngularFunction {
        self.check_same(other);
        let mut out = Self::zero(self.n_angles);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exps = ea
                    .iter()
                    .zip(eb)
                    .map(|(&(a1, b1), &(a2, b2))| (a1 + a2, b1 + b2))
                    .collect();
                out.push(e, ca * cb);
            }
        }
        out
    }

    /// Reciprocal of a single monomial; `None` for sums.
    pub fn inverse_monomial(&self) -> Option<AngularFunction> {
        if self.terms.len() != 1 {
            return None;
        }
        let (e, c) = self.terms.iter().next()?;
        let inv: Exps = e.iter().map(|&(a, b)| (-a, -b)).collect();
        Some(Self::monomial(self.n_angles, c.inv(), inv))
    }

    /// `∂/∂θ_k` via `d(sin^a cos^b) = a sin^{a−1}cos^{b+1} − b sin^{a+1}cos^{b−1}`.
    pub fn derivative(&self, k: usize) -> AngularFunction {
        assert!(k < self.n_angles, "angle index {k} out of range");
        let mut out = Self::zero(self.n_angles);
        for (e, c) in &self.terms {
            let (a, b) = e[k];
            if a != 0 {
                let mut e1 = e.clone();
                e1[k] = (a - 1, b + 1);
                out.push(e1, c * f64::from(a));
            }
            if b != 0 {
                let mut e2 = e.clone();
                e2[k] = (a + 1, b - 1);
                out.push(e2, c * f64::from(-b));
            }
        }
        out
    }

    pub fn eval(&self, angles: &[f64]) -> Complex64 {
        assert_eq!(angles.len(), self.n_angles);
        self.terms
            .iter()
            .map(|(e, c)| c * monomial_value(e, angles))
            .sum()
    }

    /// True when `self − other` has no coefficient above `tol`.
    pub fn approx_eq(&self, other: &AngularFunction, tol: f64) -> bool {
        self.sub(other).max_abs_coeff() <= tol
    }

    /// `∮ f √γ dΩ` (or the bare coordinate integral when `include_sqrt_gamma`
    /// is false).
    pub fn integrate_sphere(&self, quad: &Quadrature, include_sqrt_gamma: bool) -> Result<Complex64> {
        Ok(self.integrate_sphere_with_scale(quad, include_sqrt_gamma)?.0)
    }

    /// Sphere integral plus an upper bound on `∮|f|`, used to tell genuine
    /// zeros from quadrature round-off.
    pub fn integrate_sphere_with_scale(
        &self,
        quad: &Quadrature,
        include_sqrt_gamma: bool,
    ) -> Result<(Complex64, f64)> {
        let n = self.n_angles;
        let mut cache = OneDimCache::new(quad);
        let mut total = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (e, c) in &self.terms {
            let mut value = 1.0;
            let mut bound = 1.0;
            for (k, &(a, b)) in e.iter().enumerate() {
                let azimuthal = k + 1 == n;
                let weight = if include_sqrt_gamma && !azimuthal {
                    (n - 1 - k) as i32
                } else {
                    0
                };
                let a_eff = a + weight;
                if a_eff < 0 || b < 0 {
                    return Err(Error::NonIntegrable {
                        angle: k,
                        sin_exp: a_eff,
                        cos_exp: b,
                    });
                }
                value *= cache.get(azimuthal, a_eff, b);
                bound *= cache.get(azimuthal, a_eff, 0).max(cache.get(azimuthal, 0, 0));
            }
            total += c * value;
            scale += c.norm() * bound;
        }
        Ok((total, scale))
    }

    /// Coordinate integral over the angles in `spanned` (zero based) with the
    /// remaining angles held at the values in `fixed`.
    pub fn integrate_block(
        &self,
        quad: &Quadrature,
        spanned: &[usize],
        fixed: &[(usize, f64)],
    ) -> Result<(Complex64, f64)> {
        let n = self.n_angles;
        let mut cache = OneDimCache::new(quad);
        let mut total = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (e, c) in &self.terms {
            let mut value = 1.0;
            let mut bound = 1.0;
            for &(k, t) in fixed {
                let (a, b) = e[k];
                let v = t.sin().powi(a) * t.cos().powi(b);
                value *= v;
                bound *= v.abs();
            }
            for &k in spanned {
                let (a, b) = e[k];
                if a < 0 || b < 0 {
                    return Err(Error::NonIntegrable {
                        angle: k,
                        sin_exp: a,
                        cos_exp: b,
                    });
                }
                let azimuthal = k + 1 == n;
                value *= cache.get(azimuthal, a, b);
                bound *= cache.get(azimuthal, 0, 0);
            }
            total += c * value;
            scale += c.norm() * bound;
        }
        Ok((total, scale))
    }
}

struct OneDimCache<'a> {
    quad: &'a Quadrature,
    values: std::collections::HashMap<(bool, i32, i32), f64>,
}

impl<'a> OneDimCache<'a> {
    fn new(quad: &'a Quadrature) -> Self {
        OneDimCache {
            quad,
            values: Default::default(),
        }
    }

    fn get(&mut self, azimuthal: bool, a: i32, b: i32) -> f64 {
        let quad = self.quad;
        *self.values.entry((azimuthal, a, b)).or_insert_with(|| {
            if azimuthal {
                quad.azimuthal(a, b)
            } else {
                quad.polar(a, b)
            }
        })
    }
}

/// Diagonal round metric of `S^{D−2}` in hyperspherical angles.
#[derive(Clone, Debug)]
pub struct SphereMetric {
    /// `γ_{kk} = ∏_{m<k} sin²θ_m`
    pub gamma: Vec<AngularFunction>,
    /// `γ^{kk} = 1/γ_{kk}`
    pub gamma_inv: Vec<AngularFunction>,
    /// `√γ = ∏_k sin^{D−2−k}θ_k`
    pub sqrt_gamma: AngularFunction,
}

pub fn sphere_metric(dim: usize) -> Result<SphereMetric> {
    if dim < 3 {
        return Err(Error::InvalidDimension(dim));
    }
    let n = dim - 2;
    let mut gamma = Vec::with_capacity(n);
    let mut gamma_inv = Vec::with_capacity(n);
    for k in 0..n {
        let exps: Exps = (0..n).map(|m| if m < k { (2, 0) } else { (0, 0) }).collect();
        let inv: Exps = exps.iter().map(|&(a, b)| (-a, -b)).collect();
        gamma.push(AngularFunction::monomial(n, Complex64::new(1.0, 0.0), exps));
        gamma_inv.push(AngularFunction::monomial(n, Complex64::new(1.0, 0.0), inv));
    }
    let sqrt_exps: Exps = (0..n).map(|k| ((n - 1 - k) as i32, 0)).collect();
    let sqrt_gamma = AngularFunction::monomial(n, Complex64::new(1.0, 0.0), sqrt_exps);
    Ok(SphereMetric {
        gamma,
        gamma_inv,
        sqrt_gamma,
    })
}
