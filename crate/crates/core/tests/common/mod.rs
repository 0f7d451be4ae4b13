#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;

use pform_core::angular::AngularFunction;
use pform_core::exterior::{angle, MultiIndex, R, U};
use pform_core::forms::{FalloffFamily, FormField};
use pform_core::geometry::BondiChart;
use pform_core::sample;
use pform_core::series::{CoefficientFunction, PolyhomSeries};

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Product of `sin θ_k` over every polar angle.
pub fn polar_weight(n: usize) -> AngularFunction {
    (0..n.saturating_sub(1)).fold(AngularFunction::one(n), |acc, k| acc.mul(&AngularFunction::trig(n, k, 1, 0)))
}

/// Random form whose components vanish at the poles, so `d` of it has no
/// boundary contribution on the sphere.
pub fn regular_form<G: Rng>(rng: &mut G, chart: &BondiChart, degree: usize) -> FormField {
    let w = polar_weight(chart.n_angles());
    sample::random_form(rng, chart, degree).map(|s| s.mul_angular(&w))
}

/// Coulomb configuration at `(D, p)` with a logarithmic partner:
/// `B_{uI} = 2 r^{−l} + r^{−l} ln r`, `B_{rI} = −u r^{−l−1} ln r`, `ε_I = γ_II r^{−X}`.
pub fn log_seed_config(dim: usize, p: usize) -> (FormField, FormField) {
    let chart = BondiChart::new(dim).unwrap();
    let n = chart.n_angles();
    let labels: Vec<usize> = (0..p - 1).map(angle).collect();
    let (_, eps) = sample::template_config(dim, p, FalloffFamily::Coulomb, 1.0).unwrap();
    let l2 = FalloffFamily::Coulomb.component_l2(dim, p, p - 1);
    let one = AngularFunction::one(n);
    let mut u_idx = vec![U];
    u_idx.extend(&labels);
    let mut r_idx = vec![R];
    r_idx.extend(&labels);
    let mut b = FormField::zero(&chart, p).unwrap();
    let bu = PolyhomSeries::angular_term(l2, 0, one.scale_real(2.0)).add(&PolyhomSeries::angular_term(l2, 1, one.clone()));
    b.set(&u_idx, bu).unwrap();
    let br = PolyhomSeries::term(l2 + 2, 1, CoefficientFunction::u_power(1, one.scale_real(-1.0)));
    b.set(&r_idx, br).unwrap();
    (b, eps)
}

pub fn index(labels: &[usize], dim: usize) -> MultiIndex {
    MultiIndex::new(labels.to_vec(), dim).unwrap()
}

/// `f` with every `ln r` term dropped.
pub fn log_free(f: &FormField) -> FormField {
    f.map(|s| {
        s.terms()
            .filter(|((_, m), _)| *m == 0)
            .fold(PolyhomSeries::zero(s.n_angles()), |acc, ((l2, _), c)| acc.add(&PolyhomSeries::term(l2, 0, c.clone())))
    })
}
