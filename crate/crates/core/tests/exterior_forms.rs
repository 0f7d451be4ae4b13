mod common;

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;

use pform_core::exterior::{levi_civita, perm_sign, AltTensor, MultiIndex, R, U};
use pform_core::forms::{check_falloff, falloff_template, FalloffFamily, FormField};
use pform_core::geometry::BondiChart;
use pform_core::sample;

fn bondi_lower(dim: usize, r: f64, angles: &[f64]) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(dim, dim);
    g[(0, 0)] = -1.0;
    g[(0, 1)] = -1.0;
    g[(1, 0)] = -1.0;
    let mut w = r * r;
    for (k, a) in angles.iter().enumerate() {
        g[(k + 2, k + 2)] = w;
        w *= a.sin().powi(2);
    }
    g
}

/// Every ordered tuple of `k` distinct labels below `dim`.
fn tuples(dim: usize, k: usize) -> Vec<Vec<usize>> {
    (0..dim).permutations(k).collect()
}

/// `(⋆w)_ν = (1/k!) √|g| g^{μ₁α₁}⋯g^{μ_kα_k} w_{α} ε_{μν}` summed over all tuples.
fn brute_hodge(w: &AltTensor, g: &DMatrix<f64>) -> AltTensor {
    let dim = g.nrows();
    let k = w.degree();
    let ginv = g.clone().try_inverse().unwrap();
    let sqrt_g = g.determinant().abs().sqrt();
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    let mut out = AltTensor::zero(dim, dim - k);
    for nu in MultiIndex::all(dim, dim - k) {
        let mut acc = Complex64::new(0.0, 0.0);
        for mu in tuples(dim, k) {
            let full: Vec<usize> = mu.iter().chain(nu.as_slice()).copied().collect();
            let eps = levi_civita(dim, &full).unwrap();
            if eps == 0 {
                continue;
            }
            let mut raised = Complex64::new(0.0, 0.0);
            for alpha in tuples(dim, k) {
                let metric: f64 = mu.iter().zip(&alpha).map(|(&m, &a)| ginv[(m, a)]).product();
                if metric != 0.0 {
                    raised += w.get(&alpha) * metric;
                }
            }
            acc += raised * f64::from(eps);
        }
        let v = acc * sqrt_g / fact;
        if v.norm() > 0.0 {
            out.set(nu.as_slice(), v).unwrap();
        }
    }
    out
}

#[test]
fn star_of_du_dr_in_four_dimensions() {
    let chart = BondiChart::new(4).unwrap();
    let mut f = FormField::zero(&chart, 2).unwrap();
    f.set(&[U, R], pform_core::series::PolyhomSeries::one(2)).unwrap();
    let star = f.hodge_star();
    let angles = [0.7, 1.9];
    let r = 2.5;
    let oracle = brute_hodge(&f.eval(0.3, r, &angles), &bondi_lower(4, r, &angles));
    let got = star.eval(0.3, r, &angles);
    assert!(got.sub(&oracle).unwrap().max_abs() < 1e-12);
    // ⋆(du∧dr) = −r² sin θ dθ∧dφ
    let expected = -r * r * angles[0].sin();
    assert!((got.get(&[2, 3]).re - expected).abs() < 1e-12);
}

#[test]
fn series_hodge_matches_pointwise_brute_force() {
    let mut rng = sample::rng(5);
    for dim in 3..=5 {
        let chart = BondiChart::new(dim).unwrap();
        let angles: Vec<f64> = (0..dim - 2).map(|k| 0.4 + 0.5 * k as f64).collect();
        let g = bondi_lower(dim, 1.7, &angles);
        for k in 0..=dim {
            for _ in 0..4 {
                let f = sample::random_form(&mut rng, &chart, k);
                let oracle = brute_hodge(&f.eval(-0.6, 1.7, &angles), &g);
                let got = f.hodge_star().eval(-0.6, 1.7, &angles);
                let scale = oracle.max_abs().max(1.0);
                assert!(got.sub(&oracle).unwrap().max_abs() < 1e-10 * scale, "D = {dim}, k = {k}");
            }
        }
    }
}

#[test]
fn exterior_derivative_matches_finite_differences() {
    let mut rng = sample::rng(9);
    let h = 1e-5;
    for dim in 3..=6 {
        let chart = BondiChart::new(dim).unwrap();
        let x0: Vec<f64> = [0.2, 2.3].into_iter().chain((0..dim - 2).map(|k| 0.5 + 0.3 * k as f64)).collect();
        let eval_at = |f: &FormField, x: &[f64]| f.eval(x[0], x[1], &x[2..]);
        for k in 0..dim {
            let b = sample::random_form(&mut rng, &chart, k);
            let db = eval_at(&b.exterior_derivative(), &x0);
            for idx in MultiIndex::all(dim, k + 1) {
                let mut fd = Complex64::new(0.0, 0.0);
                for (pos, &label) in idx.as_slice().iter().enumerate() {
                    let rest = idx.without_position(pos);
                    let (mut xp, mut xm) = (x0.clone(), x0.clone());
                    xp[label] += h;
                    xm[label] -= h;
                    let deriv = (eval_at(&b, &xp).get(rest.as_slice()) - eval_at(&b, &xm).get(rest.as_slice())) / (2.0 * h);
                    fd += deriv * f64::from(perm_sign(&[&[label], rest.as_slice()].concat()));
                }
                let got = db.get(idx.as_slice());
                assert!((got - fd).norm() < 1e-5 * (1.0 + fd.norm()), "D = {dim}, {idx:?}: {got} vs {fd}");
            }
        }
    }
}

#[test]
fn field_strength_is_gauge_invariant() {
    let mut rng = sample::rng(13);
    for dim in 4..=7 {
        let chart = BondiChart::new(dim).unwrap();
        for p in 1..dim - 1 {
            let b = sample::random_form(&mut rng, &chart, p);
            let eps = sample::random_form(&mut rng, &chart, p - 1);
            let moved = b.gauge_transform(&eps).unwrap();
            assert!(moved.exterior_derivative().sub(&b.exterior_derivative()).unwrap().is_zero());
        }
    }
}

#[test]
fn wedge_is_graded_commutative_and_leibniz() {
    let mut rng = sample::rng(17);
    let chart = BondiChart::new(5).unwrap();
    for (a, b) in [(0, 2), (1, 1), (1, 2), (2, 3)] {
        let x = common::log_free(&sample::random_form(&mut rng, &chart, a));
        let y = common::log_free(&sample::random_form(&mut rng, &chart, b));
        let xy = x.wedge(&y).unwrap();
        let yx = y.wedge(&x).unwrap().scale_real(if (a * b) % 2 == 0 { 1.0 } else { -1.0 });
        assert!(xy.approx_eq(&yx, 1e-12));
        let lhs = xy.exterior_derivative();
        let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = x
            .exterior_derivative()
            .wedge(&y)
            .unwrap()
            .add(&x.wedge(&y.exterior_derivative()).unwrap().scale_real(sign))
            .unwrap();
        assert!(lhs.approx_eq(&rhs, 1e-10), "degrees ({a}, {b})");
    }
}

#[test]
fn radiation_field_fails_coulomb_template_in_six_dimensions() {
    let (b, _) = sample::template_config(6, 1, FalloffFamily::Radiation, 1.0).unwrap();
    let rad = falloff_template(6, 1, FalloffFamily::Radiation, false).unwrap();
    let cou = falloff_template(6, 1, FalloffFamily::Coulomb, false).unwrap();
    assert!(check_falloff(&b, &rad).unwrap().passed);
    let report = check_falloff(&b, &cou).unwrap();
    assert!(!report.passed);
    let failing: Vec<_> = report.failures().map(|e| e.index.clone()).collect();
    assert_eq!(failing, vec![common::index(&[U], 6)]);
}

#[test]
fn falloff_rejects_wrong_degree() {
    let chart = BondiChart::new(5).unwrap();
    let f = FormField::zero(&chart, 2).unwrap();
    let template = falloff_template(5, 1, FalloffFamily::Radiation, false).unwrap();
    assert!(check_falloff(&f, &template).is_err());
}
