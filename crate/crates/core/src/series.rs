//! Polyhomogeneous series `Σ c_{l,m}(u, angles) · r^{−l} · (ln r)^m` with
//! `l ∈ ½ℤ` (stored doubled) and `m ∈ {0, 1}`.
//!
//! A series is an exact finite sum. An optional truncation order records that
//! terms with larger `l` were discarded; operations propagate the tightest
//! order that is still valid for their result.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::angular::AngularFunction;
use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::quadrature::Quadrature;

/// `Σ_k u^k · f_k(angles)`.
#[derive(Clone, PartialEq)]
pub struct CoefficientFunction {
    n_angles: usize,
    terms: BTreeMap<u32, AngularFunction>,
}

impl fmt::Debug for CoefficientFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, a)| format!("u^{k}·[{a}]"))
            .collect();
        write!(f, "{}", if parts.is_empty() { "0".into() } else { parts.join(" + ") })
    }
}

impl CoefficientFunction {
    pub fn zero(n_angles: usize) -> Self {
        CoefficientFunction {
            n_angles,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_angular(f: AngularFunction) -> Self {
        Self::u_power(0, f)
    }

    /// `u^k · f`.
    pub fn u_power(k: u32, f: AngularFunction) -> Self {
        let mut out = Self::zero(f.n_angles());
        if !f.is_zero() {
            out.terms.insert(k, f);
        }
        out
    }

    pub fn from_terms(n_angles: usize, terms: impl IntoIterator<Item = (u32, AngularFunction)>) -> Self {
        let mut out = Self::zero(n_angles);
        for (k, f) in terms {
            out.add_term(k, &f);
        }
        out
    }

    pub fn n_angles(&self) -> usize {
        self.n_angles
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &AngularFunction)> {
        self.terms.iter().map(|(k, f)| (*k, f))
    }

    pub fn max_u_power(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|f| f.max_abs_coeff()).fold(0.0, f64::max)
    }

    fn add_term(&mut self, k: u32, f: &AngularFunction) {
        if f.is_zero() {
            return;
        }
        let sum = match self.terms.get(&k) {
            Some(old) => old.add(f),
            None => f.clone(),
        };
        if sum.is_zero() {
            self.terms.remove(&k);
        } else {
            self.terms.insert(k, sum);
        }
    }

    pub fn add(&self, other: &CoefficientFunction) -> CoefficientFunction {
        let mut out = self.clone();
        for (k, f) in &other.terms {
            out.add_term(*k, f);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> CoefficientFunction {
        self.map(|f| f.scale(c))
    }

    pub fn mul_angular(&self, g: &AngularFunction) -> CoefficientFunction {
        self.map(|f| f.mul(g))
    }

    fn map(&self, op: impl Fn(&AngularFunction) -> AngularFunction) -> CoefficientFunction {
        let mut out = Self::zero(self.n_angles);
        for (k, f) in &self.terms {
            out.add_term(*k, &op(f));
        }
        out
    }

    pub fn mul(&self, other: &CoefficientFunction) -> CoefficientFunction {
        let mut out = Self::zero(self.n_angles);
        for (ka, fa) in &self.terms {
            for (kb, fb) in &other.terms {
                out.add_term(ka + kb, &fa.mul(fb));
            }
        }
        out
    }

    pub fn d_u(&self) -> CoefficientFunction {
        let mut out = Self::zero(self.n_angles);
        for (k, f) in &self.terms {
            if *k > 0 {
                out.add_term(k - 1, &f.scale_real(f64::from(*k)));
            }
        }
        out
    }

    pub fn d_angle(&self, angle: usize) -> CoefficientFunction {
        self.map(|f| f.derivative(angle))
    }

    /// Collapses the `u` dependence at a fixed retarded time.
    pub fn at_u(&self, u: f64) -> AngularFunction {
        let mut out = AngularFunction::zero(self.n_angles);
        for (k, f) in &self.terms {
            out = out.add(&f.scale_real(u.powi(*k as i32)));
        }
        out
    }

    pub fn eval(&self, u: f64, angles: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(k, f)| f.eval(angles) * u.powi(*k as i32))
            .sum()
    }
}

/// Key of a series term: doubled `l` and log power `m`.
pub type Order = (i32, u8);

#[derive(Clone, PartialEq)]
pub struct PolyhomSeries {
    n_angles: usize,
    terms: BTreeMap<Order, CoefficientFunction>,
    truncation: Option<i32>,
}

impl fmt::Debug for PolyhomSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for ((l2, m), c) in &self.terms {
            write!(f, "[r^-({}){}: {:?}] ", HalfInt::from_twice(*l2), if *m == 1 { " ln r" } else { "" }, c)?;
        }
        if let Some(t) = self.truncation {
            write!(f, "+ O(r^-{})", HalfInt::from_twice(t))?;
        }
        Ok(())
    }
}

impl PolyhomSeries {
    pub fn zero(n_angles: usize) -> Self {
        PolyhomSeries {
            n_angles,
            terms: BTreeMap::new(),
            truncation: None,
        }
    }

    /// `c · r^{−l} (ln r)^m` with `l = l2 / 2`.
    pub fn term(l2: i32, log_power: u8, coeff: CoefficientFunction) -> Self {
        assert!(log_power <= 1, "log power must be 0 or 1");
        let mut out = Self::zero(coeff.n_angles());
        out.add_term((l2, log_power), &coeff);
        out
    }

    pub fn angular_term(l2: i32, log_power: u8, f: AngularFunction) -> Self {
        Self::term(l2, log_power, CoefficientFunction::from_angular(f))
    }

    pub fn constant(n_angles: usize, c: Complex64) -> Self {
        Self::angular_term(0, 0, AngularFunction::constant(n_angles, c))
    }

    /// Multiplicative identity.
    pub fn one(n_angles: usize) -> Self {
        Self::constant(n_angles, Complex64::new(1.0, 0.0))
    }

    pub fn n_angles(&self) -> usize {
        self.n_angles
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn truncation(&self) -> Option<HalfInt> {
        self.truncation.map(HalfInt::from_twice)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Order, &CoefficientFunction)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn coefficient(&self, l2: i32, log_power: u8) -> Option<&CoefficientFunction> {
        self.terms.get(&(l2, log_power))
    }

    /// Smallest stored `l` (the dominant power at large `r`).
    pub fn min_l2(&self) -> Option<i32> {
        self.terms.keys().next().map(|(l2, _)| *l2)
    }

    /// Dominant term key: smallest `l`, then the log partner if present.
    pub fn leading_order(&self) -> Option<Order> {
        let l2 = self.min_l2()?;
        if self.terms.contains_key(&(l2, 1)) {
            Some((l2, 1))
        } else {
            Some((l2, 0))
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.max_abs_coeff()).fold(0.0, f64::max)
    }

    fn add_term(&mut self, key: Order, c: &CoefficientFunction) {
        if c.is_zero() {
            return;
        }
        if let Some(t) = self.truncation {
            if key.0 > t {
                return;
            }
        }
        let sum = match self.terms.get(&key) {
            Some(old) => old.add(c),
            None => c.clone(),
        };
        if sum.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, sum);
        }
    }

    fn with_truncation(mut self, t: Option<i32>) -> Self {
        self.truncation = t;
        if let Some(t) = t {
            self.terms.retain(|(l2, _), _| *l2 <= t);
        }
        self
    }

    /// Drops every term with `l > l2 / 2` and records the truncation.
    pub fn truncate(&self, l2: i32) -> PolyhomSeries {
        let t = self.truncation.map_or(l2, |old| old.min(l2));
        self.clone().with_truncation(Some(t))
    }

    pub fn add(&self, other: &PolyhomSeries) -> PolyhomSeries {
        assert_eq!(self.n_angles, other.n_angles);
        let mut out = self.clone();
        out.truncation = min_opt(self.truncation, other.truncation);
        out = out.clone().with_truncation(out.truncation);
        for (k, c) in &other.terms {
            out.add_term(*k, c);
        }
        out
    }

    pub fn sub(&self, other: &PolyhomSeries) -> PolyhomSeries {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PolyhomSeries {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> PolyhomSeries {
        self.map_coeffs(|f| f.scale(c))
    }

    pub fn scale_real(&self, c: f64) -> PolyhomSeries {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn mul_angular(&self, g: &AngularFunction) -> PolyhomSeries {
        self.map_coeffs(|f| f.mul_angular(g))
    }

    fn map_coeffs(&self, op: impl Fn(&CoefficientFunction) -> CoefficientFunction) -> PolyhomSeries {
        let mut out = Self::zero(self.n_angles).with_truncation(self.truncation);
        for (k, c) in &self.terms {
            out.add_term(*k, &op(c));
        }
        out
    }

    /// Multiplication by `r^k`.
    pub fn shift_r(&self, k: i32) -> PolyhomSeries {
        let mut out = Self::zero(self.n_angles).with_truncation(self.truncation.map(|t| t - 2 * k));
        for ((l2, m), c) in &self.terms {
            out.add_term((l2 - 2 * k, *m), c);
        }
        out
    }

    /// Series product; fails if a `(ln r)²` term would appear.
    pub fn mul(&self, other: &PolyhomSeries) -> Result<PolyhomSeries> {
        assert_eq!(self.n_angles, other.n_angles);
        let trunc = match (self.truncation, other.truncation) {
            (None, None) => None,
            (a, b) => {
                let from_a = a.zip(other.min_l2()).map(|(t, l)| t + l);
                let from_b = b.zip(self.min_l2()).map(|(t, l)| t + l);
                min_opt(from_a, from_b).or(a.or(b))
            }
        };
        let mut out = Self::zero(self.n_angles).with_truncation(trunc);
        for ((la, ma), ca) in &self.terms {
            for ((lb, mb), cb) in &other.terms {
                let m = ma + mb;
                if m > 1 {
                    return Err(Error::LogOverflow);
                }
                out.add_term((la + lb, m), &ca.mul(cb));
            }
        }
        Ok(out)
    }

    /// `∂_r(r^{−l} ln^m r) = −l r^{−l−1} ln^m r + m r^{−l−1} ln^{m−1} r`.
    pub fn d_r(&self) -> PolyhomSeries {
        let mut out = Self::zero(self.n_angles).with_truncation(self.truncation.map(|t| t + 2));
        for ((l2, m), c) in &self.terms {
            let new_l2 = l2 + 2;
            if *l2 != 0 {
                out.add_term((new_l2, *m), &c.scale(Complex64::new(-f64::from(*l2) / 2.0, 0.0)));
            }
            if *m == 1 {
                out.add_term((new_l2, 0), c);
            }
        }
        out
    }

    pub fn d_u(&self) -> PolyhomSeries {
        self.map_coeffs(|c| c.d_u())
    }

    pub fn d_angle(&self, angle: usize) -> PolyhomSeries {
        self.map_coeffs(|c| c.d_angle(angle))
    }

    pub fn eval(&self, u: f64, r: f64, angles: &[f64]) -> Complex64 {
        let ln = r.ln();
        self.terms
            .iter()
            .map(|((l2, m), c)| {
                let radial = r.powf(-f64::from(*l2) / 2.0) * if *m == 1 { ln } else { 1.0 };
                c.eval(u, angles) * radial
            })
            .sum()
    }

    /// Sums the whole series at numeric `(u, r)`, leaving an angular function.
    pub fn at_point(&self, u: f64, r: f64) -> AngularFunction {
        let ln = r.ln();
        let mut out = AngularFunction::zero(self.n_angles);
        for ((l2, m), c) in &self.terms {
            let radial = r.powf(-f64::from(*l2) / 2.0) * if *m == 1 { ln } else { 1.0 };
            out = out.add(&c.at_u(u).scale_real(radial));
        }
        out
    }

    /// Integrates every coefficient over the sphere at fixed `u`.
    pub fn integrate_sphere(&self, u: f64, quad: &Quadrature, include_sqrt_gamma: bool) -> Result<RadialSeries> {
        let mut out = RadialSeries::default();
        for (k, c) in &self.terms {
            let (v, s) = c.at_u(u).integrate_sphere_with_scale(quad, include_sqrt_gamma)?;
            out.insert(*k, v, s);
        }
        Ok(out)
    }

    /// Coordinate integral of every coefficient over a block of angles.
    pub fn integrate_block(
        &self,
        u: f64,
        quad: &Quadrature,
        spanned: &[usize],
        fixed: &[(usize, f64)],
    ) -> Result<RadialSeries> {
        let mut out = RadialSeries::default();
        for (k, c) in &self.terms {
            let (v, s) = c.at_u(u).integrate_block(quad, spanned, fixed)?;
            out.insert(*k, v, s);
        }
        Ok(out)
    }

    /// The `u^0` part of the coefficient at `(l2, m)` as a function of angles,
    /// zero when the term is missing.
    pub fn angular_coefficient(&self, l2: i32, log_power: u8, u: f64) -> AngularFunction {
        self.terms
            .get(&(l2, log_power))
            .map_or_else(|| AngularFunction::zero(self.n_angles), |c| c.at_u(u))
    }
}

fn min_opt(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Relative threshold under which an integrated coefficient counts as zero.
pub const NUMERIC_ZERO: f64 = 1e-12;

/// Purely radial series `Σ v_{l,m} r^{−l} (ln r)^m` left after sphere
/// integration, with a magnitude bound per term.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RadialSeries {
    terms: BTreeMap<Order, (Complex64, f64)>,
}

/// Dominant term of a [`RadialSeries`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Leading {
    pub order: HalfInt,
    pub value: Complex64,
    pub log_value: Complex64,
}

impl RadialSeries {
    fn insert(&mut self, key: Order, v: Complex64, scale: f64) {
        let e = self.terms.entry(key).or_insert((Complex64::new(0.0, 0.0), 0.0));
        e.0 += v;
        e.1 += scale;
    }

    pub fn get(&self, l2: i32, log_power: u8) -> Complex64 {
        self.terms
            .get(&(l2, log_power))
            .filter(|(v, s)| !is_negligible(*v, *s))
            .map_or(Complex64::new(0.0, 0.0), |(v, _)| *v)
    }

    pub fn raw_terms(&self) -> impl Iterator<Item = (Order, Complex64)> + '_ {
        self.terms.iter().map(|(k, (v, _))| (*k, *v))
    }

    /// Significant terms, dropping quadrature round-off.
    pub fn significant(&self) -> impl Iterator<Item = (Order, Complex64)> + '_ {
        self.terms
            .iter()
            .filter(|(_, (v, s))| !is_negligible(*v, *s))
            .map(|(k, (v, _))| (*k, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.significant().next().is_none()
    }

    pub fn leading(&self) -> Option<Leading> {
        let ((l2, _), _) = self.significant().next()?;
        Some(Leading {
            order: HalfInt::from_twice(l2),
            value: self.get(l2, 0),
            log_value: self.get(l2, 1),
        })
    }

    /// `self + w · other`.
    pub fn add_scaled(&self, other: &RadialSeries, w: f64) -> RadialSeries {
        let mut out = self.clone();
        for (k, (v, s)) in &other.terms {
            out.insert(*k, v * w, s * w.abs());
        }
        out
    }

    pub fn sub(&self, other: &RadialSeries) -> RadialSeries {
        let mut out = self.clone();
        for (k, (v, s)) in &other.terms {
            out.insert(*k, -v, *s);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|(v, _)| v.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, r: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|((l2, m), (v, _))| v * r.powf(-f64::from(*l2) / 2.0) * if *m == 1 { r.ln() } else { 1.0 })
            .sum()
    }
}

fn is_negligible(v: Complex64, scale: f64) -> bool {
    v.norm() <= NUMERIC_ZERO * scale
}
