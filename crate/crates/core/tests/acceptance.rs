//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::time::{Duration, Instant};

use nalgebra::Matrix2;
use num_complex::Complex64;

use pform_core::charges::{
    classify_charge, duality_sign, electric_charge, electric_charge_from_strength, eta_extract, leading_gauge_order,
    magnetic_charge, matched_dual_configuration, moebius_kind, moebius_matrix, nominal_charge_exponent, ChargeClass,
    ChargeSettings, MoebiusKind,
};
use pform_core::exterior::angle;
use pform_core::forms::{partial, FalloffFamily, FormField};
use pform_core::geometry::BondiChart;
use pform_core::halfint::HalfInt;
use pform_core::higher::{bracket, conservation_defect, hf_charge, smeared_charge, Cycle};
use pform_core::quadrature::Quadrature;
use pform_core::sample;
use pform_core::series::PolyhomSeries;
use pform_core::angular::AngularFunction;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn grid() -> Vec<(usize, usize)> {
    (4..=8).flat_map(|d| (1..=(d - 2) / 2).map(move |p| (d, p))).collect()
}

fn settings() -> ChargeSettings {
    ChargeSettings {
        quad: Quadrature::with_order(64),
        ..ChargeSettings::default()
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed(limit: Duration, start: Instant) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("runtime {t:?} exceeds {limit:?}"))?;
    Ok(t)
}

fn exterior_soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = sample::rng(11);
    let mut count = 0usize;
    let mut worst_hodge = 0.0f64;
    for dim in 3..=7 {
        let chart = BondiChart::new(dim).map_err(|e| e.to_string())?;
        for k in 0..=dim {
            for _ in 0..100 {
                let f = sample::random_form(&mut rng, &chart, k);
                let dd = f.exterior_derivative().exterior_derivative();
                ensure(dd.is_zero(), || format!("d∘d ≠ 0 for D = {dim}, k = {k}: {}", dd.max_abs_coeff()))?;
                let sign = f64::from(f.hodge_sign());
                let expected = -((-1.0f64).powi((k * (dim - k)) as i32));
                ensure(sign == expected, || format!("⋆⋆ sign {sign} for D = {dim}, k = {k}"))?;
                let diff = f.hodge_star().hodge_star().sub(&f.scale_real(sign)).map_err(|e| e.to_string())?;
                let rel = diff.max_abs_coeff() / f.max_abs_coeff().max(1.0);
                worst_hodge = worst_hodge.max(rel);
                ensure(rel <= 1e-12, || format!("⋆⋆ residual {rel:e} for D = {dim}, k = {k}"))?;
                count += 1;
            }
        }
    }
    let t = timed(Duration::from_secs(30), start)?;
    Ok(format!("{count} forms, d∘d exactly zero, worst ⋆⋆ residual {worst_hodge:e}, {t:.2?}"))
}

fn gauge_order_table() -> Outcome {
    for dim in 4..=8usize {
        for p in 1..=(dim - 2) / 2 {
            let twice = dim as i32 - 2 * p as i32 - 2;
            let rad = leading_gauge_order(p, dim, FalloffFamily::Radiation);
            let cou = leading_gauge_order(p, dim, FalloffFamily::Coulomb);
            ensure(rad == HalfInt::from_twice(twice), || format!("radiation X at D = {dim}, p = {p}: {rad}"))?;
            ensure(cou == HalfInt::from_int(twice), || format!("Coulomb X at D = {dim}, p = {p}: {cou}"))?;
        }
        let d = dim as i32;
        let anchors = [
            (1, FalloffFamily::Radiation, HalfInt::from_twice(d - 4)),
            (2, FalloffFamily::Radiation, HalfInt::from_twice(d - 6)),
            (1, FalloffFamily::Coulomb, HalfInt::from_int(d - 4)),
            (2, FalloffFamily::Coulomb, HalfInt::from_int(d - 6)),
        ];
        for (p, family, x) in anchors {
            let got = leading_gauge_order(p, dim, family);
            ensure(got == x, || format!("anchor f({p}, {dim}) {family}: {got} ≠ {x}"))?;
        }
    }
    Ok(format!("{} grid points and anchors exact", grid().len()))
}

fn radiation_well_defined() -> Outcome {
    let s = settings();
    let mut rng = sample::rng(23);
    let mut checked = 0;
    for (dim, p) in grid() {
        let chart = BondiChart::new(dim).map_err(|e| e.to_string())?;
        let q = dim - p - 2;
        let dual = nominal_charge_exponent(q, dim, FalloffFamily::Radiation);
        let mut configs = vec![sample::template_config(dim, p, FalloffFamily::Radiation, 1.0).map_err(|e| e.to_string())?];
        for _ in 0..5 {
            configs.push(
                sample::random_charged_pair(&mut rng, &chart, p, FalloffFamily::Radiation).map_err(|e| e.to_string())?,
            );
        }
        for (b, eps) in configs {
            let cv = electric_charge(&b, &eps, FalloffFamily::Radiation, &s).map_err(|e| e.to_string())?;
            ensure(cv.leading == HalfInt::ZERO, || format!("D = {dim}, p = {p}: leading exponent {}", cv.leading))?;
            let class = classify_charge(&cv, dual);
            ensure(class == ChargeClass::WellDefined, || format!("D = {dim}, p = {p}: class {class}"))?;
            checked += 1;
        }
    }
    let c = 1.75;
    let (b, eps) = sample::worked_example(c).map_err(|e| e.to_string())?;
    let cv = electric_charge(&b, &eps, FalloffFamily::Radiation, &s).map_err(|e| e.to_string())?;
    let expected = 8.0 * std::f64::consts::PI * c;
    let rel = (cv.value - Complex64::new(expected, 0.0)).norm() / expected;
    ensure(rel < 1e-10, || format!("worked example {} vs 8πc = {expected}", cv.value))?;
    Ok(format!("{checked} configurations WellDefined; worked example relative error {rel:e}"))
}

fn coulomb_classification() -> Outcome {
    let s = settings();
    let mut worst_log = 0.0f64;
    for dim in 4..=8usize {
        for p in 1..=dim - 3 {
            let q = dim - p - 2;
            let (b, eps) = sample::template_config(dim, p, FalloffFamily::Coulomb, 1.0).map_err(|e| e.to_string())?;
            let cv = electric_charge(&b, &eps, FalloffFamily::Coulomb, &s).map_err(|e| e.to_string())?;
            let e = dim as i32 - 2 * p as i32 - 2;
            ensure(cv.leading == HalfInt::from_int(e), || format!("D = {dim}, p = {p}: exponent {}", cv.leading))?;
            let class = classify_charge(&cv, nominal_charge_exponent(q, dim, FalloffFamily::Coulomb));
            let expected = match e.signum() {
                1 => ChargeClass::PowerLawVanishing(HalfInt::from_int(e)),
                -1 => ChargeClass::PowerLawDivergent(HalfInt::from_int(-e)),
                _ => ChargeClass::WellDefined,
            };
            ensure(class == expected, || format!("D = {dim}, p = {p}: {class} ≠ {expected}"))?;
        }
        for p in 1..=(dim - 2) / 2 {
            let (b, eps) = common::log_seed_config(dim, p);
            let cv = electric_charge(&b, &eps, FalloffFamily::Coulomb, &s).map_err(|e| e.to_string())?;
            let crit = dim - 2 * p - 2;
            if crit == 0 {
                let log_max = cv
                    .radial
                    .raw_terms()
                    .filter(|((_, m), _)| *m > 0)
                    .map(|(_, v)| v.norm())
                    .fold(0.0, f64::max);
                worst_log = worst_log.max(log_max);
                ensure(log_max < 1e-12, || format!("D = {dim}, p = {p}: log coefficient {log_max:e}"))?;
            } else {
                // value ∝ −2l + 1 and log ∝ −(D − 2p − 2) with l = D − 2p − 1
                let expected = crit as f64 / (2.0 * (crit as f64 + 1.0) - 1.0);
                let ratio = cv.log_value / cv.value;
                ensure((ratio - expected).norm() < 1e-12, || {
                    format!("D = {dim}, p = {p}: log/value {ratio} ≠ {expected}")
                })?;
            }
        }
    }
    Ok(format!("exponents exact; critical-dimension log coefficient ≤ {worst_log:e}"))
}

fn duality_relations() -> Outcome {
    let start = Instant::now();
    let s = settings();
    let mut rng = sample::rng(37);
    let (mut worst_direct, mut worst_mirror, mut worst_eta) = (0.0f64, 0.0f64, 0.0f64);
    let (mut samples, mut nontrivial_mirror) = (0usize, 0usize);
    for (dim, p) in grid() {
        let chart = BondiChart::new(dim).map_err(|e| e.to_string())?;
        let q = dim - p - 2;
        let c = f64::from(duality_sign(p, q, i32::from(chart.det_sign())));
        for _ in 0..5 {
            let (b, eps) =
                sample::random_charged_pair(&mut rng, &chart, p, FalloffFamily::Radiation).map_err(|e| e.to_string())?;
            let (_, eps_dual) =
                sample::random_charged_pair(&mut rng, &chart, q, FalloffFamily::Radiation).map_err(|e| e.to_string())?;
            let h = b.exterior_derivative();
            let star = h.hodge_star();

            let qe = electric_charge(&b, &eps, FalloffFamily::Radiation, &s).map_err(|e| e.to_string())?;
            let qm = magnetic_charge(&star, &eps, &s).map_err(|e| e.to_string())?;
            let direct = (qe.flux - qm.value).norm();
            worst_direct = worst_direct.max(direct);
            ensure(direct < 1e-8, || format!("D = {dim}, p = {p}: {} vs {}", qe.flux, qm.value))?;

            let qe_q = electric_charge_from_strength(&star, &eps_dual, &s).map_err(|e| e.to_string())?;
            let qm_p = magnetic_charge(&h, &eps_dual, &s).map_err(|e| e.to_string())?;
            let mirror = (qe_q.flux - qm_p.value * c).norm();
            worst_mirror = worst_mirror.max(mirror);
            samples += 1;
            nontrivial_mirror += usize::from(qm_p.value.norm() > 1e-9);
            ensure(mirror < 1e-8, || format!("D = {dim}, p = {p}: {} vs {}", qe_q.flux, qm_p.value * c))?;

            let (bt, et) = matched_dual_configuration(&b, &eps, &s).map_err(|e| e.to_string())?;
            let qq = electric_charge(&bt, &et, FalloffFamily::Radiation, &s).map_err(|e| e.to_string())?;
            let eta = eta_extract(&qe, &qq).map_err(|e| e.to_string())?;
            let err = (eta.eta - 1.0).norm();
            worst_eta = worst_eta.max(err);
            ensure(err < 1e-8, || format!("D = {dim}, p = {p}: η = {}", eta.eta))?;
        }
    }
    ensure(2 * nontrivial_mirror >= samples, || {
        format!("mirrored relation non-trivial on only {nontrivial_mirror} of {samples} samples")
    })?;
    let t = timed(Duration::from_secs(300), start)?;
    Ok(format!(
        "{samples} pairs ({nontrivial_mirror} with non-zero mirrored side), residuals ≤ {worst_direct:e} / {worst_mirror:e}, |η − 1| ≤ {worst_eta:e}, {t:.2?}"
    ))
}

fn moebius_structure() -> Outcome {
    for (dim, p) in grid() {
        let q = dim - p - 2;
        let s = i32::from(BondiChart::new(dim).map_err(|e| e.to_string())?.det_sign());
        let a = moebius_matrix(p, q, s);
        let c = duality_sign(p, q, s);
        ensure(a * a == Matrix2::identity() * c, || format!("A² ≠ cI at D = {dim}, p = {p}"))?;
        let kind = moebius_kind(p, q, s);
        let expected = if c == 1 { MoebiusKind::Reflection } else { MoebiusKind::Rotation };
        ensure(kind == expected, || format!("D = {dim}, p = {p}: {kind}"))?;
    }
    ensure(moebius_kind(1, 1, -1) == MoebiusKind::Rotation, || "D = 4, p = 1 is not a rotation".into())?;
    ensure(moebius_kind(2, 2, -1) == MoebiusKind::Reflection, || "D = 6, p = 2 is not a reflection".into())?;
    Ok("A² = cI on the grid; D = 4 rotation, D = 6 p = 2 reflection".into())
}

fn higher_form_sector() -> Outcome {
    let quad = Quadrature::with_order(64);
    let mut rng = sample::rng(41);
    let configs: Vec<(usize, usize)> = grid().into_iter().cycle().take(20).collect();
    let (mut worst, mut moving) = (0.0f64, 0usize);
    for &(dim, p) in &configs {
        let chart = BondiChart::new(dim).map_err(|e| e.to_string())?;
        let q = dim - p - 2;
        let eps = common::log_free(&sample::random_form(&mut rng, &chart, p - 1));
        let j = common::regular_form(&mut rng, &chart, q).exterior_derivative();
        let rep = conservation_defect(&eps, &j, -0.5, 1.5, &quad).map_err(|e| e.to_string())?;
        let rel = rep.defect / rep.delta_q.max_abs().max(1.0);
        worst = worst.max(rel);
        moving += usize::from(rep.delta_q.max_abs() > 1e-6);
        ensure(rel < 1e-8, || format!("Stokes residual {rel:e} at D = {dim}, p = {p}"))?;

        let eps_dual = sample::random_form(&mut rng, &chart, q - 1);
        let br = bracket(&eps, &eps_dual, &quad, 0.0).map_err(|e| e.to_string())?;
        ensure(br.variation_terms == 0 && br.value == Complex64::new(0.0, 0.0), || {
            format!("bracket {} with {} terms", br.value, br.variation_terms)
        })?;
    }
    ensure(moving >= 10, || format!("only {moving} configurations have a non-trivial ΔQ"))?;

    for dim in 4..=8 {
        let chart = BondiChart::new(dim).map_err(|e| e.to_string())?;
        let j = common::regular_form(&mut rng, &chart, dim - 3).exterior_derivative();
        let one = FormField::scalar(&chart, PolyhomSeries::one(chart.n_angles()));
        let sm = smeared_charge(&one, &j, 0.25, &quad).map_err(|e| e.to_string())?;
        let full = hf_charge(&j, &Cycle::full_sphere(dim, 0.25).map_err(|e| e.to_string())?, &quad)
            .map_err(|e| e.to_string())?;
        ensure(sm.radial == full.radial, || format!("D = {dim}: smeared {} vs hf {}", sm.value, full.value))?;
    }

    let errors = bump_errors(&quad)?;
    ensure(errors.windows(2).all(|w| w[1] < w[0]), || format!("bump errors not decreasing: {errors:?}"))?;
    Ok(format!(
        "Stokes ≤ {worst:e} on {} configurations, bracket ≡ 0, smeared = hf, bump errors {errors:?}",
        configs.len()
    ))
}

/// `|∫ ε_n ∧ j − ∫_Σ j|` for bumps `ε_n ∝ sin^{2n} θ₁ dθ₁` of unit mass and
/// `j = (1 + cos² θ₁) sin θ₂ dθ₂∧dθ₃` in `D = 5`, `Σ` at `θ₁ = π/2`.
fn bump_errors(quad: &Quadrature) -> Result<Vec<f64>, String> {
    let chart = BondiChart::new(5).map_err(|e| e.to_string())?;
    let n = chart.n_angles();
    let g = AngularFunction::one(n)
        .add(&AngularFunction::trig(n, 0, 0, 2))
        .mul(&AngularFunction::trig(n, 1, 1, 0));
    let mut j = FormField::zero(&chart, 2).map_err(|e| e.to_string())?;
    j.set(&[angle(1), angle(2)], PolyhomSeries::angular_term(0, 0, g)).map_err(|e| e.to_string())?;
    let cycle = Cycle::new(5, vec![angle(1), angle(2)], vec![(angle(0), std::f64::consts::FRAC_PI_2)], 0.0)
        .map_err(|e| e.to_string())?;
    let target = hf_charge(&j, &cycle, quad).map_err(|e| e.to_string())?.value;
    let mut errors = Vec::new();
    for half in [1i32, 2, 4] {
        let mass = std::f64::consts::PI * (1..=half).map(|k| (2 * k - 1) as f64 / (2 * k) as f64).product::<f64>();
        let mut eps = FormField::zero(&chart, 1).map_err(|e| e.to_string())?;
        let bump = AngularFunction::trig(n, 0, 2 * half, 0).scale_real(1.0 / mass);
        eps.set(&[angle(0)], PolyhomSeries::angular_term(0, 0, bump)).map_err(|e| e.to_string())?;
        let sm = smeared_charge(&eps, &j, 0.0, quad).map_err(|e| e.to_string())?;
        errors.push((sm.value - target).norm());
    }
    Ok(errors)
}

fn geometry() -> Outcome {
    let mut compared = 0;
    for dim in 3..=8 {
        let chart = BondiChart::new(dim).map_err(|e| e.to_string())?;
        let n = chart.n_angles();
        let g = |a: usize, b: usize| chart.metric_lower(a, b).to_series();
        let ginv = |a: usize, b: usize| chart.metric_upper(a, b).to_series();
        for a in 0..dim {
            for b in 0..dim {
                for c in b..dim {
                    let mut oracle = PolyhomSeries::zero(n);
                    for d in 0..dim {
                        let inner = partial(&g(d, c), b).add(&partial(&g(d, b), c)).sub(&partial(&g(b, c), d));
                        let term = ginv(a, d).mul(&inner).map_err(|e| e.to_string())?;
                        oracle = oracle.add(&term.scale_real(0.5));
                    }
                    let got = chart.christoffel(a, b, c).to_series();
                    ensure(got.sub(&oracle).is_zero(), || format!("Γ^{a}_{{{b}{c}}} differs in D = {dim}"))?;
                    compared += 1;
                }
            }
        }
    }
    for dim in 4..=7 {
        let chart = BondiChart::new(dim).map_err(|e| e.to_string())?;
        let n = chart.n_angles();
        let phi = PolyhomSeries::angular_term(2 * (dim as i32 - 3), 0, AngularFunction::one(n));
        let boxed = chart.box_scalar(&phi);
        ensure(boxed.is_zero(), || format!("□r^(−(D−3)) ≠ 0 in D = {dim}"))?;
    }
    Ok(format!("{compared} Christoffel symbols exact; □r^(3−D) ≡ 0 for D = 4..7"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("sweep{k}.csv"));
        let args = ["pform", "--seed", "7", "sweep", "--family", "both", "--out", path.to_str().unwrap()];
        let code = pform_core::cli::run(args);
        ensure(code == 0, || format!("sweep exited with {code}"))?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(!outputs[0].is_empty(), || "empty sweep output".into())?;
    ensure(outputs[0] == outputs[1], || "sweep outputs differ".into())?;
    Ok(format!("two runs byte-identical ({} bytes)", outputs[0].len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("exterior-calculus soundness", exterior_soundness),
        ("gauge-order table", gauge_order_table),
        ("radiation charges well defined", radiation_well_defined),
        ("Coulomb classification", coulomb_classification),
        ("duality relations", duality_relations),
        ("Möbius structure", moebius_structure),
        ("higher-form sector", higher_form_sector),
        ("geometry", geometry),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
