//! Command-line front end: field-configuration ingestion, charge reports,
//! grid sweeps and the invariant-checking `verify` suite.
//!
//! Exit codes: 0 success, 1 a check failed, 2 invalid input. Errors are
//! written to stderr as JSON objects.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use rand::Rng;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::angular::{AngularFunction, TrigMonomial};
use crate::charges::{
    classify_charge, dual_degree, duality_sign, electric_charge, electric_charge_from_strength, eta_extract,
    leading_gauge_order, magnetic_charge, matched_dual_configuration, moebius_kind, moebius_matrix,
    nominal_charge_exponent, ChargeSettings, ChargeValue, EmCharge,
};
use crate::error::{Error, Result};
use crate::exterior::{label_name, parse_label, MultiIndex};
use crate::forms::{FalloffFamily, FalloffReport, FormField};
use crate::geometry::BondiChart;
use crate::higher::{bracket, conservation_defect_truncated};
use crate::quadrature::Quadrature;
use crate::sample;
use crate::series::{CoefficientFunction, PolyhomSeries};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

// ---------------------------------------------------------------------------
// Configuration documents

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FieldConfig {
    pub schema_version: u32,
    #[serde(rename = "D")]
    pub dim: usize,
    pub p: usize,
    pub family: FalloffFamily,
    #[serde(default)]
    pub with_log: bool,
    pub components: Vec<ComponentConfig>,
    pub gauge_parameter: Vec<ComponentConfig>,
    #[serde(default)]
    pub dual_gauge_parameter: Option<Vec<ComponentConfig>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ComponentConfig {
    pub indices: Vec<String>,
    pub terms: Vec<TermConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TermConfig {
    pub l_times2: i32,
    #[serde(default)]
    pub m: u8,
    pub u_poly: Vec<UPolyConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct UPolyConfig {
    pub u_power: u32,
    pub monomials: Vec<MonomialConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialConfig {
    pub coeff: [f64; 2],
    pub exps: Vec<[i32; 2]>,
}

/// The fields described by a configuration document.
#[derive(Clone, Debug)]
pub struct Problem {
    pub chart: BondiChart,
    pub p: usize,
    pub q: usize,
    pub family: FalloffFamily,
    pub b: FormField,
    pub epsilon: FormField,
    pub epsilon_dual: Option<FormField>,
}

impl FieldConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: FieldConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid configuration: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schemaVersion {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn build(&self) -> Result<Problem> {
        let chart = BondiChart::new(self.dim)?;
        let q = dual_degree(self.p, self.dim)?;
        let b = build_form(&chart, self.p, &self.components, "components")?;
        let epsilon = build_form(&chart, self.p - 1, &self.gauge_parameter, "gaugeParameter")?;
        let epsilon_dual = match &self.dual_gauge_parameter {
            Some(c) if q >= 1 => Some(build_form(&chart, q - 1, c, "dualGaugeParameter")?),
            Some(_) => return Err(Error::Config("dualGaugeParameter given but q = 0".into())),
            None => None,
        };
        Ok(Problem {
            chart,
            p: self.p,
            q,
            family: self.family,
            b,
            epsilon,
            epsilon_dual,
        })
    }
}

fn build_form(chart: &BondiChart, degree: usize, comps: &[ComponentConfig], field: &str) -> Result<FormField> {
    let n = chart.n_angles();
    let mut form = FormField::zero(chart, degree)?;
    for (ci, comp) in comps.iter().enumerate() {
        let name = format!("{field}[{ci}] {:?}", comp.indices);
        let labels = comp
            .indices
            .iter()
            .map(|s| parse_label(s, chart.dim()).ok_or_else(|| Error::Config(format!("{name}: unknown label `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        if labels.len() != degree {
            return Err(Error::Config(format!(
                "{name}: expected {degree} indices, got {}",
                labels.len()
            )));
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("{name}: indices must be distinct and sorted as u, r, th1, th2, …")));
        }
        let mut series = PolyhomSeries::zero(n);
        for (ti, term) in comp.terms.iter().enumerate() {
            if term.m > 1 {
                return Err(Error::Config(format!("{name}: term {ti} has log power {} > 1", term.m)));
            }
            let mut coeff = CoefficientFunction::zero(n);
            for up in &term.u_poly {
                let mut f = AngularFunction::zero(n);
                for mono in &up.monomials {
                    if mono.exps.len() != n {
                        return Err(Error::Config(format!(
                            "{name}: term {ti} has {} exponent pairs, D − 2 = {n} required",
                            mono.exps.len()
                        )));
                    }
                    let exps = mono.exps.iter().map(|e| (e[0], e[1])).collect();
                    f = f.add(&AngularFunction::from_monomials(
                        n,
                        [TrigMonomial {
                            coeff: Complex64::new(mono.coeff[0], mono.coeff[1]),
                            exps,
                        }],
                    ));
                }
                coeff = coeff.add(&CoefficientFunction::u_power(up.u_power, f));
            }
            series = series.add(&PolyhomSeries::term(term.l_times2, term.m, coeff));
        }
        let previous = form.get(&labels);
        form.set(&labels, previous.add(&series))?;
    }
    Ok(form)
}

// ---------------------------------------------------------------------------
// JSON helpers

/// Float with 17 significant digits, `null` when not finite.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let x = if x == 0.0 { 0.0 } else { x };
    serde_json::from_str(&format!("{x:.16e}")).unwrap_or(Value::Null)
}

pub fn cnum(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

fn charge_json(cv: &ChargeValue) -> Value {
    json!({
        "value": cnum(cv.value),
        "flux": cnum(cv.flux),
        "leadingExponent": cv.leading.to_string(),
        "leadingExponentTimes2": cv.leading.twice(),
        "hasLogLeading": cv.has_log_leading,
        "logValue": cnum(cv.log_value),
        "p": cv.p,
        "D": cv.dim,
    })
}

fn falloff_json(report: &FalloffReport) -> Value {
    let comps: Vec<Value> = report
        .entries
        .iter()
        .map(|e| {
            let names: Vec<String> = e.index.as_slice().iter().map(|&l| label_name(l)).collect();
            json!({
                "indices": names,
                "requiredLTimes2": e.required.twice(),
                "foundLTimes2": e.worst.twice(),
                "passed": e.passed,
            })
        })
        .collect();
    json!({ "passed": report.passed, "components": comps })
}

fn error_json(err: &Error) -> Value {
    let kind = match err {
        Error::Config(_) | Error::Json(_) => "config",
        Error::Io(_) => "io",
        Error::Falloff(_) => "falloff",
        Error::InvalidIndex { .. } => "index",
        Error::InvalidDimension(_) | Error::InvalidFormDegree { .. } => "dimension",
        Error::GaugeParameter(_) => "gaugeParameter",
        _ => "computation",
    };
    let mut obj = Map::new();
    obj.insert("error".into(), json!(kind));
    obj.insert("message".into(), json!(err.to_string()));
    if let Error::Falloff(report) = err {
        obj.insert("falloff".into(), falloff_json(report));
    }
    Value::Object(obj)
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Falloff(_) | Error::NotClosed(_) | Error::Consistency(_) => 1,
        _ => 2,
    }
}

// ---------------------------------------------------------------------------
// Command line

#[derive(Debug, Parser)]
#[command(name = "pform", version, about = "Asymptotic charges of p-form gauge fields on Bondi charts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Gauss–Legendre order of the polar quadrature [default: $PFORM_QUAD_ORDER or 64].
    #[arg(long, global = true)]
    pub quadrature_order: Option<usize>,

    /// Absolute tolerance of the verify checks.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tolerance: f64,

    /// Whether sphere integrals carry the √γ measure.
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set)]
    pub include_sqrt_gamma: bool,

    /// Seed of the randomized parts of `verify`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Append wall-clock timing to reports (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the charges of a field configuration.
    Charge {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate gauge orders and charge classes over a grid of (D, p).
    Sweep {
        #[arg(long, default_value_t = 4)]
        d_min: usize,
        #[arg(long, default_value_t = 8)]
        d_max: usize,
        #[arg(long, value_enum, default_value_t = SweepFamily::Both)]
        family: SweepFamily,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite on a configuration.
    Verify {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Flip the sign of the double-Hodge identity (fault injection).
        #[arg(long)]
        break_hodge_sign: bool,
        /// Truncate the current at r^{-L/2} on the cylinder side of the Stokes check.
        #[arg(long, allow_hyphen_values = true)]
        stokes_truncate: Option<i32>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepFamily {
    Radiation,
    Coulomb,
    Both,
}

impl Cli {
    fn settings(&self) -> ChargeSettings {
        let quad = match self.quadrature_order {
            Some(n) if n > 0 => Quadrature::with_order(n),
            _ => Quadrature::from_env(),
        };
        ChargeSettings {
            quad,
            include_sqrt_gamma: self.include_sqrt_gamma,
            u: 0.0,
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = json!({ "error": "usage", "message": e.to_string() });
            eprintln!("{err}");
            return 2;
        }
    };
    let started = Instant::now();
    let result = match &cli.command {
        Command::Charge { config, out } => cmd_charge(&cli, config).map(|r| (r, out.clone(), 0)),
        Command::Sweep {
            d_min,
            d_max,
            family,
            out,
        } => cmd_sweep(&cli, *d_min, *d_max, *family).map(|csv| (Value::String(csv), out.clone(), 0)),
        Command::Verify {
            config,
            out,
            break_hodge_sign,
            stokes_truncate,
        } => cmd_verify(&cli, config, *break_hodge_sign, *stokes_truncate).map(|(r, ok)| (r, out.clone(), if ok { 0 } else { 1 })),
    };
    match result {
        Ok((mut doc, out, code)) => {
            let text = match &mut doc {
                Value::String(s) => std::mem::take(s),
                Value::Object(obj) => {
                    if cli.timing {
                        obj.insert("timing".into(), json!({ "seconds": num(started.elapsed().as_secs_f64()) }));
                    }
                    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
                    s.push('\n');
                    s
                }
                _ => unreachable!("reports are objects or CSV text"),
            };
            if let Err(e) = emit(&text, out.as_deref()) {
                eprintln!("{}", error_json(&e));
                return 2;
            }
            code
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn inputs_json(cfg: &FieldConfig, problem: &Problem, cli: &Cli, settings: &ChargeSettings) -> Value {
    json!({
        "schemaVersion": cfg.schema_version,
        "D": cfg.dim,
        "p": cfg.p,
        "q": problem.q,
        "family": cfg.family.name(),
        "withLog": cfg.with_log,
        "components": problem.b.len(),
        "gaugeParameterComponents": problem.epsilon.len(),
        "dualGaugeParameter": problem.epsilon_dual.is_some(),
        "quadratureOrder": settings.quad.polar_order(),
        "includeSqrtGamma": settings.include_sqrt_gamma,
        "tolerance": num(cli.tolerance),
        "seed": cli.seed,
    })
}

fn dual_exponent(problem: &Problem) -> crate::halfint::HalfInt {
    nominal_charge_exponent(problem.q, problem.chart.dim(), problem.family)
}

fn moebius_json(problem: &Problem) -> Value {
    let s = i32::from(problem.chart.det_sign());
    let a = moebius_matrix(problem.p, problem.q, s);
    let square = a * a;
    let c = duality_sign(problem.p, problem.q, s);
    json!({
        "matrix": [[a[(0, 0)], a[(0, 1)]], [a[(1, 0)], a[(1, 1)]]],
        "sign": c,
        "kind": moebius_kind(problem.p, problem.q, s).to_string(),
        "squareIsSignTimesIdentity": square == nalgebra::Matrix2::identity() * c,
    })
}

fn cmd_charge(cli: &Cli, path: &Path) -> Result<Value> {
    let cfg = FieldConfig::from_path(path)?;
    let problem = cfg.build()?;
    let settings = cli.settings();
    let electric = electric_charge(&problem.b, &problem.epsilon, problem.family, &settings)?;
    let class = classify_charge(&electric, dual_exponent(&problem));
    let h = problem.b.exterior_derivative();
    let magnetic = match &problem.epsilon_dual {
        Some(et) => Some(magnetic_charge(&h, et, &settings)?),
        None => None,
    };
    let em = magnetic.as_ref().map(|m| {
        let em = EmCharge::new(&electric, m);
        json!({
            "complex": cnum(em.as_complex()),
            "vector": [cnum(em.electric), cnum(em.magnetic)],
        })
    });
    let eta = if problem.q >= 1 && electric.leading.twice() == 0 && electric.value.norm() > 0.0 {
        let (bt, et) = matched_dual_configuration(&problem.b, &problem.epsilon, &settings)?;
        let qq = electric_charge(&bt, &et, FalloffFamily::Radiation, &settings)?;
        let report = eta_extract(&electric, &qq)?;
        json!({ "eta": cnum(report.eta), "etaFlux": cnum(report.eta_flux) })
    } else {
        Value::Null
    };
    let star_h = h.hodge_star();
    let dual_magnetic = magnetic_charge(&star_h, &problem.epsilon, &settings)?;
    let duality = json!({
        "electricFlux": cnum(electric.flux),
        "dualMagnetic": cnum(dual_magnetic.value),
        "residual": num((electric.flux - dual_magnetic.value).norm()),
    });
    Ok(json!({
        "toolVersion": TOOL_VERSION,
        "inputs": inputs_json(&cfg, &problem, cli, &settings),
        "charges": {
            "electric": charge_json(&electric),
            "magnetic": magnetic.as_ref().map(charge_json),
            "em": em,
            "class": class.to_string(),
            "eta": eta,
        },
        "checks": {
            "duality": duality,
            "moebius": moebius_json(&problem),
            "stokesDefect": Value::Null,
            "bracket": Value::Null,
        },
    }))
}

// ---------------------------------------------------------------------------
// Sweep

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub dim: usize,
    pub p: usize,
    pub q: usize,
    pub x_rad: String,
    pub x_cou: String,
    pub class_rad: String,
    pub class_cou_p: String,
    pub class_cou_q: String,
    pub moebius: String,
}

fn template_class(dim: usize, p: usize, family: FalloffFamily, dual_p: usize, settings: &ChargeSettings) -> Result<String> {
    let (b, eps) = sample::template_config(dim, p, family, 1.0)?;
    let cv = electric_charge(&b, &eps, family, settings)?;
    Ok(classify_charge(&cv, nominal_charge_exponent(dual_p, dim, family)).to_string())
}

pub fn sweep_rows(d_min: usize, d_max: usize, family: SweepFamily, settings: &ChargeSettings) -> Result<Vec<SweepRow>> {
    if d_min < 3 || d_min > d_max {
        return Err(Error::Config(format!("invalid dimension range {d_min}..={d_max}")));
    }
    let grid: Vec<(usize, usize)> = (d_min..=d_max)
        .flat_map(|d| (1..=(d - 2) / 2).map(move |p| (d, p)))
        .collect();
    let radiation = family != SweepFamily::Coulomb;
    let coulomb = family != SweepFamily::Radiation;
    grid.par_iter()
        .map(|&(d, p)| {
            let q = d - p - 2;
            let s = i32::from(BondiChart::new(d)?.det_sign());
            let blank = String::new;
            Ok(SweepRow {
                dim: d,
                p,
                q,
                x_rad: leading_gauge_order(p, d, FalloffFamily::Radiation).to_string(),
                x_cou: leading_gauge_order(p, d, FalloffFamily::Coulomb).to_string(),
                class_rad: if radiation { template_class(d, p, FalloffFamily::Radiation, q, settings)? } else { blank() },
                class_cou_p: if coulomb { template_class(d, p, FalloffFamily::Coulomb, q, settings)? } else { blank() },
                class_cou_q: if coulomb { template_class(d, q, FalloffFamily::Coulomb, p, settings)? } else { blank() },
                moebius: moebius_kind(p, q, s).to_string(),
            })
        })
        .collect()
}

fn cmd_sweep(cli: &Cli, d_min: usize, d_max: usize, family: SweepFamily) -> Result<String> {
    let rows = sweep_rows(d_min, d_max, family, &cli.settings())?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["D", "p", "q", "X_rad", "X_cou", "class_rad", "class_cou_p", "class_cou_q", "moebiusCase"])?;
    for r in rows {
        w.write_record([
            r.dim.to_string(),
            r.p.to_string(),
            r.q.to_string(),
            r.x_rad,
            r.x_cou,
            r.class_rad,
            r.class_cou_p,
            r.class_cou_q,
            r.moebius,
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

// ---------------------------------------------------------------------------
// Verify

struct Check {
    name: &'static str,
    residual: Option<f64>,
    passed: bool,
    detail: Value,
}

impl Check {
    fn measured(name: &'static str, residual: f64, tol: f64) -> Self {
        Check {
            name,
            residual: Some(residual),
            passed: residual <= tol,
            detail: Value::Null,
        }
    }

    fn skipped(name: &'static str, why: &str) -> Self {
        Check {
            name,
            residual: None,
            passed: true,
            detail: json!({ "skipped": why }),
        }
    }

    fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "residual": self.residual.map_or(Value::Null, num),
            "passed": self.passed,
            "detail": self.detail,
        })
    }
}

/// Regular random `q`-form whose components carry `sin θ_k` for every polar
/// angle, so that `d` of it integrates without boundary terms on the sphere.
/// Every component is populated so the Stokes check cannot pass vacuously.
fn regular_dual_potential(chart: &BondiChart, degree: usize, seed: u64) -> Result<FormField> {
    let mut rng = sample::rng(seed);
    let n = chart.n_angles();
    let mut weight = AngularFunction::one(n);
    for k in 0..n - 1 {
        weight = weight.mul(&AngularFunction::trig(n, k, 1, 0));
    }
    let mut f = FormField::zero(chart, degree)?;
    for idx in MultiIndex::all(chart.dim(), degree) {
        let l2 = rng.gen_range(-2..=2);
        f.set(idx.as_slice(), sample::random_series(&mut rng, n, l2, false).mul_angular(&weight))?;
    }
    Ok(f)
}

fn cmd_verify(cli: &Cli, path: &Path, break_hodge: bool, stokes_truncate: Option<i32>) -> Result<(Value, bool)> {
    let cfg = FieldConfig::from_path(path)?;
    let problem = cfg.build()?;
    let settings = cli.settings();
    let tol = cli.tolerance;
    let chart = &problem.chart;
    let (p, q) = (problem.p, problem.q);
    let s = i32::from(chart.det_sign());
    let mut checks = Vec::new();

    let h = problem.b.exterior_derivative();
    let mut rng = sample::rng(cli.seed);
    let mut d2 = h.exterior_derivative().max_abs_coeff();
    for k in 0..chart.dim() {
        let f = sample::random_form(&mut rng, chart, k);
        d2 = d2.max(f.exterior_derivative().exterior_derivative().max_abs_coeff());
    }
    checks.push(Check::measured("dSquared", d2, tol));

    let star_h = h.hodge_star();
    let sign = f64::from(h.hodge_sign()) * if break_hodge { -1.0 } else { 1.0 };
    let hh = star_h.hodge_star().sub(&h.scale_real(sign))?.max_abs_coeff();
    let hh_scale = h.max_abs_coeff().max(1.0);
    checks.push(Check::measured("hodgeSquared", hh / hh_scale, tol).with_detail(json!({ "sign": sign })));

    let electric = electric_charge(&problem.b, &problem.epsilon, problem.family, &settings)?;
    let dual_mag = magnetic_charge(&star_h, &problem.epsilon, &settings)?;
    checks.push(
        Check::measured("dualityElectricMagnetic", (electric.flux - dual_mag.value).norm(), tol)
            .with_detail(json!({ "electricFlux": cnum(electric.flux), "magnetic": cnum(dual_mag.value) })),
    );

    let c = f64::from(duality_sign(p, q, s));
    let eps_dual = match &problem.epsilon_dual {
        Some(e) => e.clone(),
        None => {
            let (_, e) = sample::random_charged_pair(&mut rng, chart, q, FalloffFamily::Radiation)?;
            e
        }
    };
    let qe_q = electric_charge_from_strength(&star_h, &eps_dual, &settings)?;
    let qm_p = magnetic_charge(&h, &eps_dual, &settings)?;
    checks.push(
        Check::measured("dualityMirrored", (qe_q.flux - qm_p.value * c).norm(), tol)
            .with_detail(json!({ "electricFlux": cnum(qe_q.flux), "signedMagnetic": cnum(qm_p.value * c) })),
    );

    if electric.leading.twice() == 0 && electric.value.norm() > 0.0 && q >= 1 {
        let (bt, et) = matched_dual_configuration(&problem.b, &problem.epsilon, &settings)?;
        let qq = electric_charge(&bt, &et, FalloffFamily::Radiation, &settings)?;
        let eta = eta_extract(&electric, &qq)?;
        checks.push(
            Check::measured("eta", (eta.eta - 1.0).norm(), tol)
                .with_detail(json!({ "eta": cnum(eta.eta), "etaFlux": cnum(eta.eta_flux) })),
        );
    } else {
        checks.push(Check::skipped("eta", "electric charge is not finite and non-zero"));
    }

    let j = regular_dual_potential(chart, q, cli.seed.wrapping_add(1))?.exterior_derivative();
    let stokes = conservation_defect_truncated(&problem.epsilon, &j, -0.5, 1.5, &settings.quad, stokes_truncate)?;
    let stokes_scale = stokes.delta_q.max_abs().max(1.0);
    checks.push(
        Check::measured("stokes", stokes.defect / stokes_scale, tol)
            .with_detail(json!({ "deltaQ": num(stokes.delta_q.max_abs()), "truncation": stokes_truncate })),
    );

    let br = bracket(&problem.epsilon, &eps_dual, &settings.quad, 0.0)?;
    checks.push(
        Check::measured("bracket", br.value.norm(), 0.0).with_detail(json!({ "variationTerms": br.variation_terms })),
    );

    let a = moebius_matrix(p, q, s);
    let square_ok = a * a == nalgebra::Matrix2::identity() * duality_sign(p, q, s);
    checks.push(Check::measured("moebiusSquare", if square_ok { 0.0 } else { 1.0 }, 0.0));

    let all_passed = checks.iter().all(|c| c.passed);
    let report = json!({
        "toolVersion": TOOL_VERSION,
        "inputs": inputs_json(&cfg, &problem, cli, &settings),
        "charges": {
            "electric": charge_json(&electric),
            "class": classify_charge(&electric, dual_exponent(&problem)).to_string(),
        },
        "checks": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
        "passed": all_passed,
    });
    Ok((report, all_passed))
}
