//! Retarded Bondi chart `ds² = −du² − 2 du dr + r² γ_ij dθⁱ dθʲ`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::angular::{sphere_metric, AngularFunction, SphereMetric};
use crate::error::{Error, Result};
use crate::exterior::{is_angular, PointMetric, R, U};
use crate::series::PolyhomSeries;

/// `c(angles) · r^k`, the shape of every metric entry and Christoffel symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialEntry {
    pub r_power: i32,
    pub angular: AngularFunction,
}

impl RadialEntry {
    fn new(r_power: i32, angular: AngularFunction) -> Self {
        RadialEntry { r_power, angular }
    }

    pub fn is_zero(&self) -> bool {
        self.angular.is_zero()
    }

    pub fn eval(&self, r: f64, angles: &[f64]) -> Complex64 {
        self.angular.eval(angles) * r.powi(self.r_power)
    }

    /// Lifts the entry to a series (no `u` dependence).
    pub fn to_series(&self) -> PolyhomSeries {
        PolyhomSeries::angular_term(-2 * self.r_power, 0, self.angular.clone())
    }
}

#[derive(Clone, Debug)]
pub struct BondiChart {
    dim: usize,
    sphere: SphereMetric,
}

impl BondiChart {
    pub fn new(dim: usize) -> Result<Self> {
        Ok(BondiChart {
            dim,
            sphere: sphere_metric(dim)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_angles(&self) -> usize {
        self.dim - 2
    }

    pub fn sphere(&self) -> &SphereMetric {
        &self.sphere
    }

    /// Sign of the metric determinant.
    pub fn det_sign(&self) -> i8 {
        -1
    }

    fn constant(&self, c: f64) -> AngularFunction {
        AngularFunction::constant(self.n_angles(), Complex64::new(c, 0.0))
    }

    fn zero_entry(&self) -> RadialEntry {
        RadialEntry::new(0, AngularFunction::zero(self.n_angles()))
    }

    pub fn metric_lower(&self, a: usize, b: usize) -> RadialEntry {
        match (a, b) {
            (U, U) | (U, R) | (R, U) => RadialEntry::new(0, self.constant(-1.0)),
            (i, j) if i == j && is_angular(i) => RadialEntry::new(2, self.sphere.gamma[i - 2].clone()),
            _ => self.zero_entry(),
        }
    }

    pub fn metric_upper(&self, a: usize, b: usize) -> RadialEntry {
        match (a, b) {
            (U, R) | (R, U) => RadialEntry::new(0, self.constant(-1.0)),
            (R, R) => RadialEntry::new(0, self.constant(1.0)),
            (i, j) if i == j && is_angular(i) => RadialEntry::new(-2, self.sphere.gamma_inv[i - 2].clone()),
            _ => self.zero_entry(),
        }
    }

    /// `√|g| = r^{D−2} √γ`.
    pub fn sqrt_abs_det(&self) -> RadialEntry {
        RadialEntry::new(self.n_angles() as i32, self.sphere.sqrt_gamma.clone())
    }

    pub fn metric_at(&self, r: f64, angles: &[f64]) -> Result<PointMetric> {
        if r <= 0.0 || r.is_nan() {
            return Err(Error::NonPositiveRadius(r));
        }
        if angles.len() != self.n_angles() {
            return Err(Error::DimensionMismatch {
                expected: self.n_angles(),
                actual: angles.len(),
            });
        }
        let d = self.dim;
        let lower = DMatrix::from_fn(d, d, |a, b| self.metric_lower(a, b).eval(r, angles).re);
        let upper = DMatrix::from_fn(d, d, |a, b| self.metric_upper(a, b).eval(r, angles).re);
        let sqrt = self.sqrt_abs_det().eval(r, angles).re.abs();
        Ok(PointMetric::from_parts(lower, upper, sqrt, self.det_sign()))
    }

    /// `Γ^upper_{l1 l2}` in closed form.
    pub fn christoffel(&self, upper: usize, l1: usize, l2: usize) -> RadialEntry {
        let n = self.n_angles();
        assert!(upper < self.dim && l1 < self.dim && l2 < self.dim, "label out of range");
        if is_angular(upper) {
            if (l1 == R && l2 == upper) || (l2 == R && l1 == upper) {
                return RadialEntry::new(-1, self.constant(1.0));
            }
            if is_angular(l1) && is_angular(l2) {
                return RadialEntry::new(0, self.sphere_christoffel(upper - 2, l1 - 2, l2 - 2));
            }
            return self.zero_entry();
        }
        if is_angular(l1) && l1 == l2 {
            let g = self.sphere.gamma[l1 - 2].clone();
            return match upper {
                U => RadialEntry::new(1, g),
                _ => RadialEntry::new(1, g.neg()),
            };
        }
        RadialEntry::new(0, AngularFunction::zero(n))
    }

    /// Christoffel symbol of the round sphere (0-based angle indices).
    fn sphere_christoffel(&self, k: usize, i: usize, j: usize) -> AngularFunction {
        let g = &self.sphere.gamma;
        let gij = |a: usize, b: usize| if a == b { g[a].clone() } else { AngularFunction::zero(g.len()) };
        let sum = gij(i, j)
            .derivative(k)
            .neg()
            .add(&gij(k, i).derivative(j))
            .add(&gij(j, k).derivative(i));
        sum.mul(&self.sphere.gamma_inv[k]).scale_real(0.5)
    }

    /// Laplacian on the unit sphere, `(1/√γ) ∂_i(√γ γ^{ii} ∂_i f)`.
    pub fn sphere_laplacian(&self, phi: &PolyhomSeries) -> PolyhomSeries {
        let sg = &self.sphere.sqrt_gamma;
        let inv_sg = sg.inverse_monomial().expect("√γ is a monomial");
        let mut out = PolyhomSeries::zero(self.n_angles());
        for k in 0..self.n_angles() {
            let flux = phi.d_angle(k).mul_angular(&sg.mul(&self.sphere.gamma_inv[k]));
            out = out.add(&flux.d_angle(k).mul_angular(&inv_sg));
        }
        out
    }

    /// Scalar d'Alembertian `(1/√|g|) ∂_μ(√|g| g^{μν} ∂_ν φ)`.
    pub fn box_scalar(&self, phi: &PolyhomSeries) -> PolyhomSeries {
        let n = self.n_angles() as f64;
        let dr = phi.d_r();
        let du = phi.d_u();
        // radial flux g^{rν}∂_ν φ = ∂_r φ − ∂_u φ
        let radial = dr.sub(&du);
        let radial_part = radial.d_r().add(&radial.shift_r(-1).scale_real(n));
        let u_part = dr.d_u().neg();
        let angular = self.sphere_laplacian(phi).shift_r(-2);
        radial_part.add(&u_part).add(&angular)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::angle;

    #[test]
    fn volume_factor_example() {
        let chart = BondiChart::new(4).unwrap();
        let g = chart.metric_at(2.0, &[std::f64::consts::FRAC_PI_2, 0.3]).unwrap();
        assert!((g.sqrt_abs_det() - 4.0).abs() < 1e-14);
        assert_eq!(g.det_sign(), -1);
    }

    #[test]
    fn rejects_non_positive_radius() {
        let chart = BondiChart::new(4).unwrap();
        assert!(matches!(chart.metric_at(0.0, &[0.1, 0.2]), Err(Error::NonPositiveRadius(_))));
        assert!(chart.metric_at(-1.0, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn radial_christoffels() {
        let chart = BondiChart::new(4).unwrap();
        let g = chart.christoffel(angle(0), R, angle(0));
        assert_eq!(g.r_power, -1);
        assert!((g.eval(2.0, &[0.4, 0.1]).re - 0.5).abs() < 1e-15);
        let g = chart.christoffel(U, angle(0), angle(0));
        assert!((g.eval(3.0, &[0.4, 0.1]).re - 3.0).abs() < 1e-15);
        let g = chart.christoffel(R, angle(1), angle(1));
        let th: f64 = 0.4;
        assert!((g.eval(3.0, &[th, 0.1]).re + 3.0 * th.sin().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn two_sphere_christoffel() {
        let chart = BondiChart::new(4).unwrap();
        let g = chart.christoffel(angle(0), angle(1), angle(1));
        let th: f64 = 0.9;
        assert!((g.eval(1.0, &[th, 0.0]).re + th.sin() * th.cos()).abs() < 1e-14);
        let g = chart.christoffel(angle(1), angle(0), angle(1));
        assert!((g.eval(1.0, &[th, 0.0]).re - th.cos() / th.sin()).abs() < 1e-14);
    }

    #[test]
    fn static_harmonic_is_annihilated() {
        for d in 4..=7 {
            let chart = BondiChart::new(d).unwrap();
            let n = d - 2;
            let phi = PolyhomSeries::angular_term(2 * (d as i32 - 3), 0, AngularFunction::one(n));
            assert!(chart.box_scalar(&phi).is_zero(), "D={d}");
        }
    }
}
