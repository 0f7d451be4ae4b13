//! Asymptotic electric-like, magnetic-like and electromagnetic-like charges.
//!
//! Normalization: `flux` is the sphere integral of the sorted-index
//! contraction `Σ_I ε_I H^{urI} r^{D−2}`. The electric `value` is the Noether
//! charge `Λ_p (p−1)! · flux = −2 · flux`, the factorial coming from the
//! ordered index sum. The magnetic value is the plain flux of `ε̃ ∧ H`. With
//! these choices the duality relations hold between electric fluxes and
//! magnetic values without factorial corrections.

use std::fmt;

use log::warn;
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::angular::AngularFunction;
use crate::error::{Error, Result};
use crate::exterior::{angle, levi_civita, perm_sign, MultiIndex, R, U};
use crate::forms::{check_falloff, check_form_degree, falloff_template, FalloffFamily, FormField};
use crate::halfint::HalfInt;
use crate::quadrature::Quadrature;
use crate::series::{CoefficientFunction, PolyhomSeries, RadialSeries};

/// `Λ_p = −2(p+1)p/(p+1)! = −2/(p−1)!`.
pub fn lambda_p(p: usize) -> Result<Rational64> {
    if p < 1 {
        return Err(Error::InvalidFormDegree { p, dim: 0, max: 0 });
    }
    let fact: i64 = (1..p as i64).product();
    Ok(Rational64::new(-2, fact))
}

/// `Λ_p (p−1)!`, the factor turning a sorted-index flux into the charge.
const SORTED_NORMALIZATION: f64 = -2.0;

fn rational_to_f64(q: Rational64) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Dual form degree `q = D − p − 2`.
pub fn dual_degree(p: usize, dim: usize) -> Result<usize> {
    check_form_degree(dim, p)?;
    Ok(dim - p - 2)
}

/// Leading order `X` of the gauge parameter expansion.
pub fn leading_gauge_order(p: usize, dim: usize, family: FalloffFamily) -> HalfInt {
    if 2 * p + 2 > dim {
        warn!("p = {p} exceeds ⌊(D−2)/2⌋ for D = {dim}; the dual description has lower degree");
    }
    let twice = dim as i32 - 2 * p as i32 - 2;
    match family {
        FalloffFamily::Radiation => HalfInt::from_twice(twice),
        FalloffFamily::Coulomb => HalfInt::from_int(twice),
    }
}

/// Radial power (as `r^{−l}`) at which the electric integrand is expected to sit.
pub fn nominal_charge_exponent(p: usize, dim: usize, family: FalloffFamily) -> HalfInt {
    match family {
        FalloffFamily::Radiation => HalfInt::ZERO,
        FalloffFamily::Coulomb => HalfInt::from_int(dim as i32 - 2 * p as i32 - 2),
    }
}

#[derive(Clone, Debug)]
pub struct ChargeSettings {
    pub quad: Quadrature,
    /// Whether sphere integrals carry the `√γ` measure.
    pub include_sqrt_gamma: bool,
    /// Retarded time of the cut.
    pub u: f64,
}

impl Default for ChargeSettings {
    fn default() -> Self {
        ChargeSettings {
            quad: Quadrature::default(),
            include_sqrt_gamma: true,
            u: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChargeKind {
    Electric,
    Magnetic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChargeValue {
    /// Coefficient of the leading power of `r`.
    pub value: Complex64,
    /// Sorted-index flux before the Noether normalization (equal to `value`
    /// for magnetic charges).
    pub flux: Complex64,
    /// The integrand behaves as `r^{−leading}`; zero means finite.
    pub leading: HalfInt,
    pub has_log_leading: bool,
    /// Coefficient of `r^{−leading} ln r`.
    pub log_value: Complex64,
    pub p: usize,
    pub dim: usize,
    pub kind: ChargeKind,
    /// Full radial content of the integrated integrand.
    pub radial: RadialSeries,
}

impl ChargeValue {
    fn from_radial(radial: RadialSeries, normalization: f64, nominal: HalfInt, p: usize, dim: usize, kind: ChargeKind) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let (leading, value, log_value) = match radial.leading() {
            Some(l) => (l.order, l.value, l.log_value),
            None => (nominal, zero, zero),
        };
        ChargeValue {
            value,
            flux: value / normalization,
            leading,
            has_log_leading: log_value != zero,
            log_value,
            p,
            dim,
            kind,
            radial,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value == Complex64::new(0.0, 0.0) && !self.has_log_leading
    }
}

/// Classification by the leading radial behaviour.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChargeClass {
    WellDefined,
    PowerLawDivergent(HalfInt),
    PowerLawVanishing(HalfInt),
    /// Leading `ln r` at order `r⁰`.
    LogDivergent,
    /// The integrand vanishes identically.
    Zero,
}

impl fmt::Display for ChargeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChargeClass::WellDefined => write!(f, "WellDefined"),
            ChargeClass::PowerLawDivergent(d) => write!(f, "Divergent({d})"),
            ChargeClass::PowerLawVanishing(d) => write!(f, "Vanishing({d})"),
            ChargeClass::LogDivergent => write!(f, "LogDivergent"),
            ChargeClass::Zero => write!(f, "Zero"),
        }
    }
}

fn class_from_exponent(e: HalfInt) -> ChargeClass {
    match e.signum() {
        1 => ChargeClass::PowerLawVanishing(e),
        -1 => ChargeClass::PowerLawDivergent(e.abs()),
        _ => ChargeClass::WellDefined,
    }
}

/// Well defined only if the charge is finite, non-zero, and the dual side
/// shares its radial behaviour; otherwise the offending side's degree.
pub fn classify_charge(cv: &ChargeValue, dual_exponent: HalfInt) -> ChargeClass {
    if cv.is_zero() {
        return ChargeClass::Zero;
    }
    if cv.has_log_leading && cv.leading == HalfInt::ZERO {
        return ChargeClass::LogDivergent;
    }
    if cv.leading != HalfInt::ZERO {
        return class_from_exponent(cv.leading);
    }
    class_from_exponent(dual_exponent)
}

fn check_parameter_degree(b_degree: usize, epsilon: &FormField) -> Result<()> {
    if epsilon.degree() + 1 != b_degree {
        return Err(Error::DegreeMismatch {
            expected: b_degree - 1,
            actual: epsilon.degree(),
        });
    }
    Ok(())
}

/// Contravariant Noether two-form `k^{μν} = Λ_p ε_{μ₃…} H^{μν μ₃…}` on sorted keys.
pub fn noether_two_form(b: &FormField, epsilon: &FormField) -> Result<FormField> {
    check_parameter_degree(b.degree(), epsilon)?;
    noether_from_strength(&b.exterior_derivative(), epsilon)
}

fn noether_from_strength(h: &FormField, epsilon: &FormField) -> Result<FormField> {
    let p = h.degree() - 1;
    let lambda = rational_to_f64(lambda_p(p)?) * factorial(p - 1);
    let raised = h.raise_indices();
    let mut out = FormField::zero(h.chart(), 2)?;
    for (k, hk) in raised.components() {
        for (i, ei) in epsilon.components() {
            if !i.as_slice().iter().all(|l| k.contains(*l)) {
                continue;
            }
            let m: Vec<usize> = k.as_slice().iter().copied().filter(|l| !i.contains(*l)).collect();
            let joined: Vec<usize> = m.iter().chain(i.as_slice()).copied().collect();
            let sign = f64::from(perm_sign(&joined));
            let term = ei.mul(hk)?.scale_real(lambda * sign);
            out.add_sorted(MultiIndex::from_sorted_unchecked(m), &term);
        }
    }
    Ok(out)
}

/// `k^{ur} r^{D−2}`: the electric integrand before the sphere integral.
pub fn electric_density(b: &FormField, epsilon: &FormField) -> Result<PolyhomSeries> {
    check_parameter_degree(b.degree(), epsilon)?;
    electric_density_from_strength(&b.exterior_derivative(), epsilon)
}

pub fn electric_density_from_strength(h: &FormField, epsilon: &FormField) -> Result<PolyhomSeries> {
    check_parameter_degree(h.degree() - 1, epsilon)?;
    let k = noether_from_strength(h, epsilon)?;
    Ok(k.get(&[U, R]).shift_r(h.dim() as i32 - 2))
}

/// The same integrand assembled from the closed-form coefficient rule
/// `H_{ruJ} = ∂_r B_{uJ} − ∂_u B_{rJ} − Σ_k (−1)^{k+1} ∂_{j_k} B_{urJ∖j_k}`,
/// with `∂_r (b r^{−l} + b̄ r^{−l} ln r) = (−l b + b̄) r^{−l−1} − l b̄ r^{−l−1} ln r`.
pub fn electric_density_closed_form(b: &FormField, epsilon: &FormField) -> Result<PolyhomSeries> {
    check_parameter_degree(b.degree(), epsilon)?;
    let dim = b.dim();
    let p = b.degree();
    let n = b.n_angles();
    let sphere = b.chart().sphere();
    let mut total = PolyhomSeries::zero(n);
    for (j, eps_j) in epsilon.components() {
        if !j.is_angular() {
            continue;
        }
        let mut uj = vec![U];
        uj.extend(j.as_slice());
        let mut rj = vec![R];
        rj.extend(j.as_slice());
        let mut h_ruj = radial_derivative_by_coefficients(&b.get(&uj)).sub(&b.get(&rj).d_u());
        for (pos, &jk) in j.as_slice().iter().enumerate() {
            let mut rest = vec![U, R];
            rest.extend(j.as_slice().iter().enumerate().filter(|(q, _)| *q != pos).map(|(_, l)| *l));
            let sign = if pos % 2 == 0 { -1.0 } else { 1.0 };
            h_ruj = h_ruj.add(&b.get(&rest).d_angle(jk - 2).scale_real(sign));
        }
        let mut gamma_inv = AngularFunction::one(n);
        for l in j.as_slice() {
            gamma_inv = gamma_inv.mul(&sphere.gamma_inv[l - 2]);
        }
        let term = eps_j.mul(&h_ruj)?.mul_angular(&gamma_inv);
        total = total.add(&term.shift_r(dim as i32 - 2 * p as i32));
    }
    Ok(total.scale_real(SORTED_NORMALIZATION))
}

fn radial_derivative_by_coefficients(s: &PolyhomSeries) -> PolyhomSeries {
    let mut out = PolyhomSeries::zero(s.n_angles());
    for ((l2, m), c) in s.terms() {
        let l = f64::from(l2) / 2.0;
        let shifted = l2 + 2;
        out = out.add(&PolyhomSeries::term(shifted, m, c.scale(Complex64::new(-l, 0.0))));
        if m == 1 {
            out = out.add(&PolyhomSeries::term(shifted, 0, c.clone()));
        }
    }
    out
}

/// Checks that every component of `ε` starts at `r^{−X}` or later and is
/// `u`-independent at that order.
pub fn check_gauge_parameter(epsilon: &FormField, x: HalfInt) -> Result<()> {
    for (idx, s) in epsilon.components() {
        let Some(l2) = s.min_l2() else { continue };
        if l2 < x.twice() {
            return Err(Error::GaugeParameter(format!(
                "component {idx} starts at r^-({}) before the leading order {x}",
                HalfInt::from_twice(l2)
            )));
        }
        for m in [0, 1] {
            if let Some(c) = s.coefficient(x.twice(), m) {
                if c.max_u_power().unwrap_or(0) > 0 {
                    return Err(Error::GaugeParameter(format!(
                        "component {idx} depends on u at the leading order {x}"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Electric-like charge of `B` with gauge parameter `ε` under a fall-off family.
pub fn electric_charge(
    b: &FormField,
    epsilon: &FormField,
    family: FalloffFamily,
    settings: &ChargeSettings,
) -> Result<ChargeValue> {
    let p = b.degree();
    let dim = b.dim();
    check_form_degree(dim, p)?;
    check_parameter_degree(p, epsilon)?;
    let template = falloff_template(dim, p, family, true)?;
    let report = check_falloff(b, &template)?;
    if !report.passed {
        return Err(Error::Falloff(report));
    }
    check_gauge_parameter(epsilon, leading_gauge_order(p, dim, family))?;
    let density = electric_density(b, epsilon)?;
    let radial = density.integrate_sphere(settings.u, &settings.quad, settings.include_sqrt_gamma)?;
    Ok(ChargeValue::from_radial(
        radial,
        SORTED_NORMALIZATION,
        nominal_charge_exponent(p, dim, family),
        p,
        dim,
        ChargeKind::Electric,
    ))
}

/// Electric-like charge computed from a field strength directly, without
/// template or gauge-order checks.
pub fn electric_charge_from_strength(h: &FormField, epsilon: &FormField, settings: &ChargeSettings) -> Result<ChargeValue> {
    let p = h.degree().checked_sub(1).ok_or(Error::DegreeMismatch {
        expected: 2,
        actual: h.degree(),
    })?;
    check_form_degree(h.dim(), p)?;
    let density = electric_density_from_strength(h, epsilon)?;
    let radial = density.integrate_sphere(settings.u, &settings.quad, settings.include_sqrt_gamma)?;
    Ok(ChargeValue::from_radial(
        radial,
        SORTED_NORMALIZATION,
        HalfInt::ZERO,
        p,
        h.dim(),
        ChargeKind::Electric,
    ))
}

/// `Σ ε^{IJ} ε̃_I H_J`, the magnetic integrand with the `1/√γ` of the
/// Levi-Civita tensor already cancelled against the sphere measure.
pub fn magnetic_density(h: &FormField, epsilon_dual: &FormField) -> Result<PolyhomSeries> {
    let dim = h.dim();
    let n = h.n_angles();
    if h.degree() + epsilon_dual.degree() != n {
        return Err(Error::DegreeMismatch {
            expected: n - h.degree().min(n),
            actual: epsilon_dual.degree(),
        });
    }
    let mut total = PolyhomSeries::zero(n);
    for (i, ei) in epsilon_dual.components() {
        if !i.is_angular() {
            continue;
        }
        for (j, hj) in h.components() {
            if !j.is_angular() {
                continue;
            }
            let joined: Vec<usize> = i.as_slice().iter().chain(j.as_slice()).copied().collect();
            let angles: Vec<usize> = joined.iter().map(|l| l - 2).collect();
            let sign = levi_civita(n, &angles)?;
            if sign == 0 {
                continue;
            }
            total = total.add(&ei.mul(hj)?.scale_real(f64::from(sign)));
        }
    }
    debug_assert_eq!(dim, n + 2);
    Ok(total)
}

/// Magnetic-like charge `∮ ε̃ ∧ H` of a field strength `H = dB`.
pub fn magnetic_charge(h: &FormField, epsilon_dual: &FormField, settings: &ChargeSettings) -> Result<ChargeValue> {
    let p = h.degree().checked_sub(1).ok_or(Error::DegreeMismatch {
        expected: 2,
        actual: h.degree(),
    })?;
    let density = magnetic_density(h, epsilon_dual)?;
    let inv = h
        .chart()
        .sphere()
        .sqrt_gamma
        .inverse_monomial()
        .expect("√γ is a monomial");
    let radial = density
        .mul_angular(&inv)
        .integrate_sphere(settings.u, &settings.quad, settings.include_sqrt_gamma)?;
    Ok(ChargeValue::from_radial(radial, 1.0, HalfInt::ZERO, p, h.dim(), ChargeKind::Magnetic))
}

/// `𝒬 = Q^{(e)} + i Q̃^{(m)}`, built from the electric flux and the magnetic value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmCharge {
    pub electric: Complex64,
    pub magnetic: Complex64,
}

impl EmCharge {
    pub fn new(electric: &ChargeValue, magnetic: &ChargeValue) -> Self {
        EmCharge {
            electric: electric.flux,
            magnetic: magnetic.value,
        }
    }

    pub fn as_complex(&self) -> Complex64 {
        self.electric + Complex64::i() * self.magnetic
    }

    pub fn as_vector(&self) -> Vector2<Complex64> {
        Vector2::new(self.electric, self.magnetic)
    }

    /// The `ℝ²` view, available when both parts are real.
    pub fn as_real_pair(&self, tol: f64) -> Option<[f64; 2]> {
        (self.electric.im.abs() <= tol && self.magnetic.im.abs() <= tol).then_some([self.electric.re, self.magnetic.re])
    }
}

/// `(−1)^{(p+1)(q+1)} s`.
pub fn duality_sign(p: usize, q: usize, s: i32) -> i32 {
    if ((p + 1) * (q + 1)).is_multiple_of(2) {
        s
    } else {
        -s
    }
}

/// `A = [[0, 1], [(−1)^{(p+1)(q+1)} s, 0]]`.
pub fn moebius_matrix(p: usize, q: usize, s: i32) -> Matrix2<i32> {
    Matrix2::new(0, 1, duality_sign(p, q, s), 0)
}

pub fn moebius_inverse(a: &Matrix2<i32>) -> Matrix2<i32> {
    // det A = −c with c = ±1, so A⁻¹ = c·A
    let c = a[(1, 0)];
    a * c
}

pub fn moebius_apply(a: &Matrix2<i32>, v: &Vector2<Complex64>) -> Vector2<Complex64> {
    a.map(|x| Complex64::new(f64::from(x), 0.0)) * v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoebiusKind {
    /// Reflection about the first-quadrant bisector.
    Reflection,
    /// Rotation by ±π/2.
    Rotation,
}

impl fmt::Display for MoebiusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoebiusKind::Reflection => "reflection",
            MoebiusKind::Rotation => "rotation",
        })
    }
}

pub fn moebius_kind(p: usize, q: usize, s: i32) -> MoebiusKind {
    if duality_sign(p, q, s) == 1 {
        MoebiusKind::Reflection
    } else {
        MoebiusKind::Rotation
    }
}

/// Ratio of the two electric-like charges of a dual pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaReport {
    /// `Q_q / Q_p` of the Noether-normalized values.
    pub eta: Complex64,
    /// The same ratio of the raw sorted-index fluxes, i.e. with `Λ_p` and
    /// `Λ_q` divided out.
    pub eta_flux: Complex64,
}

pub fn eta_extract(qp: &ChargeValue, qq: &ChargeValue) -> Result<EtaReport> {
    if qp.value.norm() == 0.0 || qp.flux.norm() == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(EtaReport {
        eta: qq.value / qp.value,
        eta_flux: qq.flux / qp.flux,
    })
}

/// A point of the Riemann sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extended {
    Finite(Complex64),
    Infinity,
}

pub fn reciprocal_map(q: Extended) -> Extended {
    match q {
        Extended::Infinity => Extended::Finite(Complex64::new(0.0, 0.0)),
        Extended::Finite(z) if z == Complex64::new(0.0, 0.0) => Extended::Infinity,
        Extended::Finite(z) => Extended::Finite(z.inv()),
    }
}

/// The `q = D − p − 2` configuration `(B̃, ε̃)` whose electric charge density
/// matches the `r⁰` density of `(B, ε)` on the sphere.
///
/// `ε̃` lives on the first `q − 1` angles at order `X_q` and `B̃` has a single
/// `B̃_{rK}` component linear in `u`, so that `H̃_{ruK} = −∂_u B̃_{rK}` carries
/// the matched density. The returned pair satisfies the radiation template.
pub fn matched_dual_configuration(
    b: &FormField,
    epsilon: &FormField,
    settings: &ChargeSettings,
) -> Result<(FormField, FormField)> {
    let dim = b.dim() as i32;
    let p = b.degree();
    let q = dual_degree(p, b.dim())?;
    if q < 1 {
        return Err(Error::InvalidFormDegree {
            p: q,
            dim: b.dim(),
            max: b.dim() - 2,
        });
    }
    let n = b.n_angles();
    let density = electric_density(b, epsilon)?;
    let rho = density.angular_coefficient(0, 0, settings.u);
    let sphere = b.chart().sphere();
    let k_labels: Vec<usize> = (0..q - 1).map(angle).collect();
    let mut eps_coeff = AngularFunction::one(n);
    for l in &k_labels {
        eps_coeff = eps_coeff.mul(&sphere.gamma[l - 2]);
    }
    let x_q = leading_gauge_order(q, b.dim(), FalloffFamily::Radiation);
    let mut eps_dual = FormField::zero(b.chart(), q - 1)?;
    eps_dual.set(&k_labels, PolyhomSeries::angular_term(x_q.twice(), 0, eps_coeff))?;

    // k̃^{ur} r^{D−2} = −2 ε̃_K γ^{KK} H̃_{ruK} r^{D−2q} = 2 f when B̃_{rK} = u f r^{−(D−2q+2)/2}
    let f = rho.scale_real(-1.0 / SORTED_NORMALIZATION);
    let mut rk = vec![R];
    rk.extend(&k_labels);
    let coeff = CoefficientFunction::u_power(1, f);
    let mut b_dual = FormField::zero(b.chart(), q)?;
    b_dual.set(&rk, PolyhomSeries::term(dim - 2 * q as i32 + 2, 0, coeff))?;
    Ok((b_dual, eps_dual))
}
