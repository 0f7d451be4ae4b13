//! Higher-form-symmetry charges on coordinate-aligned cycles of the
//! celestial sphere, smeared charges, and their Stokes bookkeeping.

use num_complex::Complex64;

use crate::charges::{electric_charge_from_strength, ChargeSettings};
use crate::error::{Error, Result};
use crate::exterior::{angle, is_angular, MultiIndex, U};
use crate::forms::FormField;
use crate::halfint::HalfInt;
use crate::quadrature::Quadrature;
use crate::series::{PolyhomSeries, RadialSeries};

/// A coordinate block `{θ_k : k spanned}` at fixed values of the other angles
/// and fixed retarded time.
#[derive(Clone, Debug, PartialEq)]
pub struct Cycle {
    spanned: Vec<usize>,
    fixed: Vec<(usize, f64)>,
    u: f64,
}

impl Cycle {
    /// `spanned` and the labels of `fixed` are coordinate labels (`angle(k)`)
    /// and must partition the `D − 2` angles.
    pub fn new(dim: usize, spanned: Vec<usize>, fixed: Vec<(usize, f64)>, u: f64) -> Result<Self> {
        let n = dim.checked_sub(2).ok_or(Error::InvalidDimension(dim))?;
        let mut seen = vec![false; n];
        for &l in spanned.iter().chain(fixed.iter().map(|(l, _)| l)) {
            if !is_angular(l) || l >= dim {
                return Err(Error::InvalidCycle(format!("label {l} is not an angle of D = {dim}")));
            }
            if std::mem::replace(&mut seen[l - 2], true) {
                return Err(Error::InvalidCycle(format!("label {l} appears twice")));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidCycle("spanned and fixed angles must cover the sphere".into()));
        }
        if spanned.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidCycle("spanned angles must be increasing".into()));
        }
        for &(l, v) in &fixed {
            let azimuthal = l - 2 + 1 == n;
            let ok = if azimuthal {
                (0.0..2.0 * std::f64::consts::PI).contains(&v)
            } else {
                v > 0.0 && v < std::f64::consts::PI
            };
            if !ok {
                return Err(Error::InvalidCycle(format!("fixed value {v} out of range for label {l}")));
            }
        }
        Ok(Cycle { spanned, fixed, u })
    }

    /// The whole celestial sphere at retarded time `u`.
    pub fn full_sphere(dim: usize, u: f64) -> Result<Self> {
        Self::new(dim, (0..dim - 2).map(angle).collect(), Vec::new(), u)
    }

    pub fn dimension(&self) -> usize {
        self.spanned.len()
    }

    pub fn spanned(&self) -> &[usize] {
        &self.spanned
    }

    pub fn fixed(&self) -> &[(usize, f64)] {
        &self.fixed
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn at_u(&self, u: f64) -> Cycle {
        Cycle { u, ..self.clone() }
    }

    fn integrate(&self, s: &PolyhomSeries, quad: &Quadrature) -> Result<RadialSeries> {
        let spanned: Vec<usize> = self.spanned.iter().map(|l| l - 2).collect();
        let fixed: Vec<(usize, f64)> = self.fixed.iter().map(|(l, v)| (l - 2, *v)).collect();
        s.integrate_block(self.u, quad, &spanned, &fixed)
    }
}

/// Leading large-`r` coefficient of an integral together with its full radial content.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleIntegral {
    pub value: Complex64,
    /// Behaviour `r^{−leading}` of the integral.
    pub leading: HalfInt,
    pub radial: RadialSeries,
}

impl CycleIntegral {
    fn from_radial(radial: RadialSeries) -> Self {
        let (value, leading) = radial
            .leading()
            .map_or((Complex64::new(0.0, 0.0), HalfInt::ZERO), |l| (l.value, l.order));
        CycleIntegral { value, leading, radial }
    }
}

/// `∫_Σ j`: pull back onto the coordinate block and integrate with the
/// coordinate measure.
pub fn hf_charge(j: &FormField, cycle: &Cycle, quad: &Quadrature) -> Result<CycleIntegral> {
    if j.degree() != cycle.dimension() {
        return Err(Error::DegreeMismatch {
            expected: cycle.dimension(),
            actual: j.degree(),
        });
    }
    let key = MultiIndex::new(cycle.spanned.clone(), j.dim())?;
    let radial = match j.component(&key) {
        Some(s) => cycle.integrate(s, quad)?,
        None => RadialSeries::default(),
    };
    Ok(CycleIntegral::from_radial(radial))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmearedCharge {
    pub value: Complex64,
    pub leading: HalfInt,
    pub u: f64,
    pub parameter_degree: usize,
    pub radial: RadialSeries,
}

fn top_angular_component(w: &FormField) -> PolyhomSeries {
    let labels: Vec<usize> = (0..w.n_angles()).map(angle).collect();
    w.get(&labels)
}

/// `∫_{S^{D−2}_u} ε ∧ j`.
pub fn smeared_charge(epsilon: &FormField, j: &FormField, u: f64, quad: &Quadrature) -> Result<SmearedCharge> {
    let n = j.n_angles();
    if epsilon.degree() + j.degree() != n {
        return Err(Error::DegreeMismatch {
            expected: n.saturating_sub(j.degree()),
            actual: epsilon.degree(),
        });
    }
    let top = top_angular_component(&epsilon.wedge(j)?);
    let cycle = Cycle::full_sphere(j.dim(), u)?;
    let CycleIntegral { value, leading, radial } = CycleIntegral::from_radial(cycle.integrate(&top, quad)?);
    Ok(SmearedCharge {
        value,
        leading,
        u,
        parameter_degree: epsilon.degree(),
        radial,
    })
}

/// Smeared charge of `j = ⋆dB` against `ε` and its ratio to the electric
/// charge of the same pair.
#[derive(Clone, Debug, PartialEq)]
pub struct SmearedVsElectric {
    pub smeared: Complex64,
    pub electric: Complex64,
    pub ratio: Option<Complex64>,
}

pub fn smeared_vs_electric(b: &FormField, epsilon: &FormField, settings: &ChargeSettings) -> Result<SmearedVsElectric> {
    let h = b.exterior_derivative();
    let j = h.hodge_star();
    let smeared = smeared_charge(epsilon, &j, settings.u, &settings.quad)?.value;
    let electric = electric_charge_from_strength(&h, epsilon, settings)?.value;
    let ratio = (electric.norm() > 0.0).then(|| smeared / electric);
    Ok(SmearedVsElectric {
        smeared,
        electric,
        ratio,
    })
}

/// Trapezoidal `∫ du` of the smeared charge over `u_grid`, keeping the full
/// radial content.
pub fn integrated_current(epsilon: &FormField, j: &FormField, u_grid: &[f64], quad: &Quadrature) -> Result<CycleIntegral> {
    if u_grid.len() < 2 {
        return Err(Error::EmptyGrid);
    }
    let samples = u_grid
        .iter()
        .map(|&u| smeared_charge(epsilon, j, u, quad).map(|s| s.radial))
        .collect::<Result<Vec<_>>>()?;
    let mut total = RadialSeries::default();
    for (w, pair) in u_grid.windows(2).zip(samples.windows(2)) {
        let h = 0.5 * (w[1] - w[0]);
        total = total.add_scaled(&pair[0], h).add_scaled(&pair[1], h);
    }
    Ok(CycleIntegral::from_radial(total))
}

/// Both sides of `Q(u₂) − Q(u₁) = ∫_{[u₁,u₂]×S} dε ∧ j`.
#[derive(Clone, Debug, PartialEq)]
pub struct StokesReport {
    pub delta_q: RadialSeries,
    pub cylinder: RadialSeries,
    /// Largest coefficient of the difference.
    pub defect: f64,
}

/// Largest coefficient of `dj`; zero for closed currents.
pub fn closure_residual(j: &FormField) -> f64 {
    j.exterior_derivative().max_abs_coeff()
}

pub fn conservation_defect(
    epsilon: &FormField,
    j: &FormField,
    u1: f64,
    u2: f64,
    quad: &Quadrature,
) -> Result<StokesReport> {
    conservation_defect_truncated(epsilon, j, u1, u2, quad, None)
}

/// As [`conservation_defect`], with the cylinder side computed from `j`
/// truncated at `r^{−l2/2}` when `truncate` is given.
pub fn conservation_defect_truncated(
    epsilon: &FormField,
    j: &FormField,
    u1: f64,
    u2: f64,
    quad: &Quadrature,
    truncate: Option<i32>,
) -> Result<StokesReport> {
    let residual = closure_residual(j);
    if residual > 0.0 {
        return Err(Error::NotClosed(residual));
    }
    let q1 = smeared_charge(epsilon, j, u1, quad)?.radial;
    let q2 = smeared_charge(epsilon, j, u2, quad)?.radial;
    let delta_q = q2.sub(&q1);

    let j_cyl = match truncate {
        Some(l2) => j.truncate(l2),
        None => j.clone(),
    };
    let flux = epsilon.exterior_derivative().wedge(&j_cyl)?;
    let mut labels = vec![U];
    labels.extend((0..j.n_angles()).map(angle));
    let density = flux.get(&labels);
    let sphere = Cycle::full_sphere(j.dim(), u1)?;
    let mut cylinder = RadialSeries::default();
    for (u, w) in quad.interval(u1, u2) {
        cylinder = cylinder.add_scaled(&sphere.at_u(u).integrate(&density, quad)?, w);
    }
    let defect = delta_q.sub(&cylinder).max_abs();
    Ok(StokesReport {
        delta_q,
        cylinder,
        defect,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BracketReport {
    pub value: Complex64,
    /// Number of stored components of `δ_ε j`.
    pub variation_terms: usize,
}

/// `{Q[ε], Q[ε̃]} = δ_ε Q[ε̃]` with `δ_ε B = dε`, so `δ_ε j = ⋆d(dε)`.
pub fn bracket(epsilon: &FormField, epsilon_dual: &FormField, quad: &Quadrature, u: f64) -> Result<BracketReport> {
    let delta_h = epsilon.exterior_derivative().exterior_derivative();
    let delta_j = delta_h.hodge_star();
    if !delta_j.is_zero() {
        return Err(Error::Consistency(format!(
            "δj has {} non-zero components",
            delta_j.len()
        )));
    }
    let value = if epsilon_dual.degree() + delta_j.degree() == delta_j.n_angles() {
        smeared_charge(epsilon_dual, &delta_j, u, quad)?.value
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok(BracketReport {
        value,
        variation_terms: delta_j.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairStatus {
    /// The two spanned sets together cover every angle.
    Dual,
    NonDual,
    /// Both integrals vanish.
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoincareReport {
    /// `∫_{Σ^{p+1}} H`.
    pub h_integral: Complex64,
    /// `∫_{Σ^{q+1}} ⋆H`.
    pub dual_integral: Complex64,
    pub ratio: Option<Complex64>,
    pub status: PairStatus,
}

pub fn poincare_pair_check(b: &FormField, cycle_p: &Cycle, cycle_q: &Cycle, quad: &Quadrature) -> Result<PoincareReport> {
    let h = b.exterior_derivative();
    let star = h.hodge_star();
    let h_integral = hf_charge(&h, cycle_p, quad)?.value;
    let dual_integral = hf_charge(&star, cycle_q, quad)?.value;
    let covers = (0..b.n_angles())
        .map(angle)
        .all(|l| cycle_p.spanned.contains(&l) || cycle_q.spanned.contains(&l));
    let zero = Complex64::new(0.0, 0.0);
    let (status, ratio) = if h_integral == zero && dual_integral == zero {
        (PairStatus::Indeterminate, None)
    } else {
        let ratio = (h_integral != zero).then(|| dual_integral / h_integral);
        (if covers { PairStatus::Dual } else { PairStatus::NonDual }, ratio)
    };
    Ok(PoincareReport {
        h_integral,
        dual_integral,
        ratio,
        status,
    })
}
