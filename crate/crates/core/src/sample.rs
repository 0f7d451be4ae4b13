//! Seeded random fields and ready-made configurations for tests and the
//! `verify` command.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::angular::{AngularFunction, Exps, TrigMonomial};
use crate::error::Result;
use crate::exterior::{angle, MultiIndex, R, U};
use crate::forms::{falloff_template, FalloffFamily, FormField};
use crate::charges::leading_gauge_order;
use crate::geometry::BondiChart;
use crate::series::{CoefficientFunction, PolyhomSeries};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn coeff<R: Rng>(rng: &mut R) -> Complex64 {
    // dyadic values keep products exact in floating point
    let k: i32 = rng.gen_range(-8..=8);
    Complex64::new(f64::from(if k == 0 { 1 } else { k }) / 4.0, 0.0)
}

/// Random trigonometric polynomial with non-negative exponents up to `max_exp`.
pub fn random_angular<R: Rng>(rng: &mut R, n_angles: usize, n_terms: usize, max_exp: i32) -> AngularFunction {
    let monomials = (0..n_terms).map(|_| {
        let exps: Exps = (0..n_angles)
            .map(|_| (rng.gen_range(0..=max_exp), rng.gen_range(0..=max_exp)))
            .collect();
        TrigMonomial {
            coeff: coeff(rng),
            exps,
        }
    });
    AngularFunction::from_monomials(n_angles, monomials.collect::<Vec<_>>())
}

/// Random `Σ_k u^k f_k` with `k ≤ max_u`.
pub fn random_coefficient<R: Rng>(rng: &mut R, n_angles: usize, max_u: u32) -> CoefficientFunction {
    let mut terms = Vec::new();
    for k in 0..=max_u {
        if rng.gen_bool(0.7) {
            terms.push((k, random_angular(rng, n_angles, 2, 2)));
        }
    }
    if terms.is_empty() {
        CoefficientFunction::u_power(0, random_angular(rng, n_angles, 1, 2))
    } else {
        CoefficientFunction::from_terms(n_angles, terms)
    }
}

/// Random series with a few terms, `l` between `l2_min/2` and `l2_min/2 + 2`.
pub fn random_series<R: Rng>(rng: &mut R, n_angles: usize, l2_min: i32, with_log: bool) -> PolyhomSeries {
    let mut s = PolyhomSeries::zero(n_angles);
    let n_terms = rng.gen_range(1..=3);
    for _ in 0..n_terms {
        let l2 = l2_min + rng.gen_range(0..=4);
        let m = u8::from(with_log && rng.gen_bool(0.3));
        s = s.add(&PolyhomSeries::term(l2, m, random_coefficient(rng, n_angles, 1)));
    }
    s
}

/// Random `k`-form with a random subset of components populated.
pub fn random_form<R: Rng>(rng: &mut R, chart: &BondiChart, degree: usize) -> FormField {
    let mut f = FormField::zero(chart, degree).expect("degree within range");
    let all = MultiIndex::all(chart.dim(), degree);
    let n_angles = chart.n_angles();
    let fill = (3.0 / all.len().max(1) as f64).clamp(0.3, 1.0);
    for idx in all {
        if rng.gen_bool(fill) {
            let l2 = rng.gen_range(-2..=4);
            let with_log = rng.gen_bool(0.3);
            f.set(idx.as_slice(), random_series(rng, n_angles, l2, with_log))
                .expect("valid index");
        }
    }
    f
}

/// `∏_{l ∈ I} γ_{ll}` over the angular labels of `I`.
pub fn gamma_product(chart: &BondiChart, labels: &[usize]) -> AngularFunction {
    labels
        .iter()
        .filter(|&&l| l >= 2)
        .fold(AngularFunction::one(chart.n_angles()), |acc, l| acc.mul(&chart.sphere().gamma[l - 2]))
}

/// Random field at the fall-off template together with a gauge parameter
/// whose leading order sits at `X`.
///
/// Components `B_{rJ}` (radial but not retarded-time index) start one order
/// below the template, as the charge formula presupposes; gauge parameter
/// components carry `γ_II` so every charge integrand is regular at the poles.
/// A constant `B_{uI}` paired with `ε_I ∝ γ_II` on the first angles keeps the
/// electric charge generically non-zero.
pub fn random_charged_pair<R: Rng>(
    rng: &mut R,
    chart: &BondiChart,
    p: usize,
    family: FalloffFamily,
) -> Result<(FormField, FormField)> {
    let template = falloff_template(chart.dim(), p, family, false)?;
    let n = chart.n_angles();
    let mut b = FormField::zero(chart, p)?;
    for (idx, l) in template.entries() {
        let shift = if idx.contains(R) && !idx.contains(U) { 2 } else { 0 };
        let mut s = PolyhomSeries::zero(n);
        if rng.gen_bool(0.6) {
            s = s.add(&PolyhomSeries::term(l.twice() + shift, 0, random_coefficient(rng, n, 1)));
        }
        if rng.gen_bool(0.3) {
            s = s.add(&PolyhomSeries::term(l.twice() + shift + 2, 0, random_coefficient(rng, n, 1)));
        }
        b.set(idx.as_slice(), s)?;
    }
    let x = leading_gauge_order(p, chart.dim(), family);
    let mut eps = FormField::zero(chart, p - 1)?;
    for idx in MultiIndex::combinations(&(2..chart.dim()).collect::<Vec<_>>(), p - 1) {
        if !rng.gen_bool(0.7) {
            continue;
        }
        let g = gamma_product(chart, idx.as_slice());
        let lead = PolyhomSeries::angular_term(x.twice(), 0, random_angular(rng, n, 2, 2).mul(&g));
        let sub = PolyhomSeries::term(x.twice() + 1, 0, random_coefficient(rng, n, 1).mul_angular(&g));
        eps.set(idx.as_slice(), lead.add(&sub))?;
    }
    let (b0, e0) = template_config(chart.dim(), p, family, 1.0 + f64::from(rng.gen_range(0..4)) / 4.0)?;
    Ok((b.add(&b0)?, eps.add(&e0)?))
}

/// `D = 4`, `p = 1` radiation example: `B_u = c/r`, `ε = 1`.
pub fn worked_example(c: f64) -> Result<(FormField, FormField)> {
    let chart = BondiChart::new(4)?;
    let mut b = FormField::zero(&chart, 1)?;
    b.set(&[U], PolyhomSeries::angular_term(2, 0, AngularFunction::constant(2, Complex64::new(c, 0.0))))?;
    let eps = FormField::scalar(&chart, PolyhomSeries::one(2));
    Ok((b, eps))
}

/// Simplest charged configuration at the template of `(D, p, family)`:
/// `ε_I = γ_II r^{−X}` on the first `p − 1` angles and a single `B_{uI}`
/// (or `B_{rI}` linear in `u` when `B_{uI}` would sit at `r⁰` and drop out of `dB`).
pub fn template_config(dim: usize, p: usize, family: FalloffFamily, c: f64) -> Result<(FormField, FormField)> {
    let chart = BondiChart::new(dim)?;
    let template = falloff_template(dim, p, family, false)?;
    let n = chart.n_angles();
    let labels: Vec<usize> = (0..p - 1).map(angle).collect();
    let g = gamma_product(&chart, &labels);
    let x = leading_gauge_order(p, dim, family);
    let mut eps = FormField::zero(&chart, p - 1)?;
    eps.set(&labels, PolyhomSeries::angular_term(x.twice(), 0, g))?;

    let mut u_idx = vec![U];
    u_idx.extend(&labels);
    let l2 = template.l2(&MultiIndex::new(u_idx.clone(), dim)?).expect("template entry");
    let constant = AngularFunction::constant(n, Complex64::new(c, 0.0));
    let mut b = FormField::zero(&chart, p)?;
    if l2 != 0 {
        b.set(&u_idx, PolyhomSeries::angular_term(l2, 0, constant))?;
    } else {
        let mut r_idx = vec![R];
        r_idx.extend(&labels);
        let coeff = CoefficientFunction::u_power(1, constant);
        b.set(&r_idx, PolyhomSeries::term(l2 + 2, 0, coeff))?;
    }
    Ok((b, eps))
}
