//! Closed-form free and Volkov propagators.
//!
//! Every value is split into the coefficient of `delta(lambda^2)` and the
//! regular part. The cone term is carried symbolically and is only non-zero
//! for lightlike points. The free real part uses the cone coefficient
//! `1/2pi` while the characteristic-representation solutions use `1/pi`;
//! both conventions are kept as they are and never converted into each other.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    classify_default, to_lightcone, IntervalClassification, PhysicalConstants, Region,
    SpacetimePoint, CONE_REL_TOL,
};
use crate::potentials::{average_over, phase_from_averages, PotentialSpec};
use crate::special_functions::{bessel_i0, bessel_j0, bessel_k1, bessel_y1, j1_ratio_unchecked};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorValue {
    /// Coefficient of `delta(lambda^2)`; zero off the cone.
    pub delta_coeff: Complex64,
    /// Regular part at the point.
    pub smooth: Complex64,
    pub region: IntervalClassification,
    /// Mass parameter actually used, bare or field-dressed.
    pub effective_k0: f64,
    /// Plane-wave phase already folded into `delta_coeff` and `smooth`; one
    /// for free propagators.
    pub phase: Complex64,
}

impl PropagatorValue {
    fn free(region: IntervalClassification, k0: f64) -> Self {
        Self {
            delta_coeff: ZERO,
            smooth: ZERO,
            region,
            effective_k0: k0,
            phase: ONE,
        }
    }

    fn scaled(mut self, factor: Complex64) -> Self {
        if factor != ONE {
            self.delta_coeff *= factor;
            self.smooth *= factor;
        }
        self
    }
}

/// Two-point propagator in a plane wave. `shape` holds
/// `phase * DeltaC(x' - x'', k0_eff)`; the physical value is
/// `normalization * shape`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwingerValue {
    pub shape: PropagatorValue,
    pub normalization: f64,
    pub phase: Complex64,
}

impl SchwingerValue {
    pub fn smooth(&self) -> Complex64 {
        self.shape.smooth * self.normalization
    }

    pub fn delta_coeff(&self) -> Complex64 {
        self.shape.delta_coeff * self.normalization
    }
}

/// Overall constant in front of the two-point propagator.
pub const SCHWINGER_NORMALIZATION: f64 = -1.0 / (4.0 * PI * PI);

fn check_mass(function: &'static str, k0: f64) -> Result<()> {
    if k0.is_finite() && k0 >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(function, format!("need finite k0 >= 0, got {k0}")))
    }
}

/// `-k0 J1(k0 lambda) / lambda`, continuous through `lambda = 0`.
fn interior_kernel(k0: f64, lambda: f64) -> f64 {
    -k0 * k0 * j1_ratio_unchecked(k0 * lambda)
}

/// Real part of the free causal propagator: cone term `1/2pi` and
/// `-(k0/2pi) J1(k0 lambda)/lambda` inside the cone.
pub fn delta_s_free(cls: &IntervalClassification, k0: f64) -> PropagatorValue {
    let mut v = PropagatorValue::free(*cls, k0);
    match cls.region {
        Region::Timelike => {
            let lambda = cls.lambda_sq.sqrt();
            v.smooth = Complex64::new(interior_kernel(k0, lambda) / TAU, 0.0);
        }
        Region::Lightlike => {
            v.delta_coeff = Complex64::new(1.0 / TAU, 0.0);
            v.smooth = Complex64::new(interior_kernel(k0, 0.0) / TAU, 0.0);
        }
        Region::Spacelike => {}
    }
    v
}

/// Imaginary part of the free causal propagator:
/// `(k0/4pi) N1(k0 lambda)/lambda` inside, `(k0/2pi^2) K1(k0 lt)/lt` outside.
pub fn delta_1_free(cls: &IntervalClassification, k0: f64) -> Result<PropagatorValue> {
    check_mass("delta_1_free", k0)?;
    let mut v = PropagatorValue::free(*cls, k0);
    let smooth = match cls.region {
        Region::Lightlike => return Err(Error::ConeSingularity { what: "delta_1_free" }),
        Region::Timelike => {
            let lambda = cls.lambda_sq.sqrt();
            if k0 == 0.0 {
                -1.0 / (2.0 * PI * PI * cls.lambda_sq)
            } else {
                k0 / (4.0 * PI) * bessel_y1(k0 * lambda) / lambda
            }
        }
        Region::Spacelike => {
            let lt = (-cls.lambda_sq).sqrt();
            if k0 == 0.0 {
                1.0 / (2.0 * PI * PI * lt * lt)
            } else {
                k0 / (2.0 * PI * PI) * bessel_k1(k0 * lt) / lt
            }
        }
    };
    v.smooth = Complex64::new(smooth, 0.0);
    Ok(v)
}

/// `(DeltaS + i Delta1) / 2`.
pub fn delta_c_free(cls: &IntervalClassification, k0: f64) -> Result<PropagatorValue> {
    let s = delta_s_free(cls, k0);
    let one = delta_1_free(cls, k0)?;
    let i = Complex64::new(0.0, 1.0);
    Ok(PropagatorValue {
        delta_coeff: 0.5 * s.delta_coeff,
        smooth: 0.5 * (s.smooth + i * one.smooth),
        ..s
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannValue {
    pub value: f64,
    /// Set when `xi eta a^2 < 0` and the solution is the growing `I0` branch.
    pub growing: bool,
}

/// `J0(sqrt(xi eta a^2))`, continued to `I0(sqrt(-xi eta a^2))` for a
/// negative argument.
pub fn riemann_function(xi: f64, eta: f64, a_sq: f64) -> RiemannValue {
    let s = xi * eta * a_sq;
    if s >= 0.0 {
        RiemannValue {
            value: bessel_j0(s.sqrt()),
            growing: false,
        }
    } else {
        RiemannValue {
            value: bessel_i0((-s).sqrt()),
            growing: true,
        }
    }
}

/// Fundamental solution in the 2-D timelike representation with
/// `tau^2 = c^2 t^2 - z^2`: cone term `1/pi`, interior
/// `-(k0/2pi) J1(k0 lambda)/lambda`, nothing outside.
pub fn psi_plus(tau: f64, x_perp: f64, k0: f64) -> Result<PropagatorValue> {
    if !(tau.is_finite() && tau >= 0.0 && x_perp.is_finite() && x_perp >= 0.0) {
        return Err(Error::domain(
            "psi_plus",
            format!("need tau >= 0 and x_perp >= 0, got tau={tau}, x_perp={x_perp}"),
        ));
    }
    check_mass("psi_plus", k0)?;
    let lambda_sq = (tau - x_perp) * (tau + x_perp);
    let scale = tau.max(x_perp);
    let cls = IntervalClassification::from_squares(lambda_sq, tau * tau, CONE_REL_TOL * scale * scale);
    let mut v = PropagatorValue::free(cls, k0);
    match cls.region {
        Region::Timelike => {
            v.smooth = Complex64::new(interior_kernel(k0, lambda_sq.sqrt()) / TAU, 0.0);
        }
        Region::Lightlike => {
            v.delta_coeff = Complex64::new(1.0 / PI, 0.0);
            v.smooth = Complex64::new(interior_kernel(k0, 0.0) / TAU, 0.0);
        }
        Region::Spacelike => {}
    }
    Ok(v)
}

/// [`psi_plus`] at a spacetime point with `tau^2 = c^2 t^2 - z^2`. Points
/// with `tau^2 < 0` lie outside both cones and get a zero value.
pub fn psi_plus_at(p: &SpacetimePoint, k0: f64, k: &PhysicalConstants) -> Result<PropagatorValue> {
    let ct = k.c * p.t;
    let tau_sq = (ct - p.z) * (ct + p.z);
    let x_perp = p.x_perp();
    if tau_sq >= 0.0 {
        psi_plus(tau_sq.sqrt(), x_perp, k0)
    } else {
        check_mass("psi_plus", k0)?;
        let lambda_sq = tau_sq - x_perp * x_perp;
        Ok(PropagatorValue::free(
            IntervalClassification::from_squares(lambda_sq, tau_sq, 0.0),
            k0,
        ))
    }
}

/// Fundamental solution in the 2-D spacelike representation,
/// `(k0/2pi) K1(k0 lt)/lt > 0`.
pub fn psi_minus(lam_tilde: f64, k0: f64) -> Result<PropagatorValue> {
    if !(lam_tilde.is_finite() && lam_tilde > 0.0) {
        return Err(Error::domain("psi_minus", format!("need lam_tilde > 0, got {lam_tilde}")));
    }
    check_mass("psi_minus", k0)?;
    let lambda_sq = -lam_tilde * lam_tilde;
    let cls = IntervalClassification::from_squares(lambda_sq, lambda_sq, 0.0);
    let smooth = if k0 == 0.0 {
        1.0 / (TAU * lam_tilde * lam_tilde)
    } else {
        k0 / TAU * bessel_k1(k0 * lam_tilde) / lam_tilde
    };
    let mut v = PropagatorValue::free(cls, k0);
    v.smooth = Complex64::new(smooth, 0.0);
    Ok(v)
}

/// Volkov fundamental solution at `p` with source at the origin. The mass is
/// dressed by the field average over `[0, xi]` and the value carries the
/// transverse phase.
pub fn volkov_psi(p: &SpacetimePoint, spec: &PotentialSpec, k: &PhysicalConstants) -> Result<PropagatorValue> {
    if !p.is_finite() {
        return Err(Error::domain("volkov_psi", "non-finite point"));
    }
    k.validate()?;
    let (xi, _) = to_lightcone(p, k);
    let avg = average_over(spec, 0.0, xi, k)?;
    let phase = if k.coupling() == 0.0 || matches!(spec, PotentialSpec::Zero) {
        ONE
    } else {
        phase_from_averages(&avg, p, &SpacetimePoint::ORIGIN, k.coupling())
    };
    let mut v = psi_plus_at(p, avg.k0_eff, k)?.scaled(phase);
    v.phase = phase;
    Ok(v)
}

/// Two-point propagator between `p_in` and `p_out` in a plane wave: the free
/// causal function at the interval with the mass dressed over
/// `[xi_in, xi_out]`, times the transverse phase.
pub fn schwinger_propagator(
    p_out: &SpacetimePoint,
    p_in: &SpacetimePoint,
    spec: &PotentialSpec,
    k: &PhysicalConstants,
) -> Result<SchwingerValue> {
    if !(p_out.is_finite() && p_in.is_finite()) {
        return Err(Error::domain("schwinger_propagator", "non-finite point"));
    }
    k.validate()?;
    let (xi_out, _) = to_lightcone(p_out, k);
    let (xi_in, _) = to_lightcone(p_in, k);
    let avg = average_over(spec, xi_in, xi_out, k)?;
    let phase = if k.coupling() == 0.0 || matches!(spec, PotentialSpec::Zero) {
        ONE
    } else {
        phase_from_averages(&avg, p_out, p_in, k.coupling())
    };
    let cls = classify_default(&p_out.minus(p_in), k);
    let mut shape = delta_c_free(&cls, avg.k0_eff)?.scaled(phase);
    shape.phase = phase;
    Ok(SchwingerValue {
        shape,
        normalization: SCHWINGER_NORMALIZATION,
        phase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::classify;
    use crate::quadrature::{psi_minus_numeric, psi_plus_numeric};
    use proptest::prelude::*;

    fn timelike(lambda: f64) -> IntervalClassification {
        IntervalClassification::from_squares(lambda * lambda, lambda * lambda, 1e-12)
    }

    fn spacelike(lt: f64) -> IntervalClassification {
        IntervalClassification::from_squares(-lt * lt, 0.0, 1e-12)
    }

    /// `J1(x) = (1/pi) int_0^pi cos(theta - x sin theta)`, periodic trapezoid.
    fn j1_oracle(x: f64) -> f64 {
        let n = 400;
        let h = PI / n as f64;
        let mut s = 0.5 * ((0.0f64).cos() + (PI).cos());
        for i in 1..n {
            let th = i as f64 * h;
            s += (th - x * th.sin()).cos();
        }
        s * h / PI
    }

    /// `K1(x) = int_0^inf exp(-x cosh t) cosh t dt`.
    fn k1_oracle(x: f64) -> f64 {
        let h = 1e-3;
        let mut s = 0.5 * (-x).exp();
        let mut t: f64 = h;
        loop {
            let term = (-x * t.cosh()).exp() * t.cosh();
            s += term;
            if term < 1e-30 {
                break;
            }
            t += h;
        }
        s * h
    }

    #[test]
    fn delta_s_examples() {
        let v = delta_s_free(&spacelike(1.0), 1.0);
        assert_eq!(v.smooth, ZERO);
        assert_eq!(v.delta_coeff, ZERO);
        let v = delta_s_free(&timelike(1.0), 1.0);
        assert!((v.smooth.re + j1_oracle(1.0) / TAU).abs() < 1e-13);
        for cls in [timelike(2.0), spacelike(2.0)] {
            assert_eq!(delta_s_free(&cls, 0.0).smooth.re, 0.0);
        }
        let cone = IntervalClassification::from_squares(0.0, 1.0, 1e-12);
        let v = delta_s_free(&cone, 0.0);
        assert_eq!(v.delta_coeff.re, 1.0 / TAU);
        assert_eq!(v.smooth.re, 0.0);
    }

    #[test]
    fn delta_s_interior_limit_is_continuous() {
        let k0 = 1.7;
        let limit = -k0 * k0 / (4.0 * PI);
        let cone = IntervalClassification::from_squares(0.0, 1.0, 1e-12);
        assert!((delta_s_free(&cone, k0).smooth.re - limit).abs() < 1e-15);
        for lambda in [1e-3, 1e-5, 1e-8] {
            let v = delta_s_free(&timelike(lambda), k0).smooth.re;
            assert!((v - limit).abs() < k0.powi(4) * lambda * lambda / 50.0 + 1e-15);
        }
    }

    #[test]
    fn delta_1_examples() {
        let v = delta_1_free(&spacelike(1.0), 1.0).unwrap();
        assert!((v.smooth.re - k1_oracle(1.0) / (2.0 * PI * PI)).abs() < 1e-10);
        let lt = 0.7;
        let massless = delta_1_free(&spacelike(lt), 0.0).unwrap().smooth.re;
        assert_eq!(massless, 1.0 / (2.0 * PI * PI * lt * lt));
        let tiny = delta_1_free(&spacelike(lt), 1e-7).unwrap().smooth.re;
        assert!((tiny - massless).abs() < 1e-8 * massless);
        let tiny_in = delta_1_free(&timelike(lt), 1e-7).unwrap().smooth.re;
        let massless_in = delta_1_free(&timelike(lt), 0.0).unwrap().smooth.re;
        assert!((tiny_in - massless_in).abs() < 1e-8 * massless_in.abs());
        let cone = IntervalClassification::from_squares(0.0, 1.0, 1e-12);
        assert!(matches!(delta_1_free(&cone, 1.0), Err(Error::ConeSingularity { .. })));
    }

    #[test]
    fn delta_c_examples() {
        let v = delta_c_free(&spacelike(1.3), 0.8).unwrap();
        assert_eq!(v.smooth.re, 0.0);
        assert!(v.smooth.im > 0.0);
        let v = delta_c_free(&timelike(1.3), 0.8).unwrap();
        assert_eq!(v.smooth.re, 0.5 * delta_s_free(&timelike(1.3), 0.8).smooth.re);
        let lt = 2.0;
        let v = delta_c_free(&spacelike(lt), 0.0).unwrap();
        assert!((v.smooth - Complex64::new(0.0, 1.0 / (4.0 * PI * PI * lt * lt))).norm() < 1e-17);
    }

    #[test]
    fn riemann_examples() {
        assert_eq!(riemann_function(0.0, 3.0, 2.0).value, 1.0);
        assert_eq!(riemann_function(3.0, 0.0, 2.0).value, 1.0);
        assert_eq!(riemann_function(3.0, 5.0, 0.0).value, 1.0);
        let g = riemann_function(1.0, -2.0, 1.5);
        assert!(g.growing && g.value > 1.0);
        assert!(!riemann_function(1.0, 2.0, 1.5).growing);
    }

    #[test]
    fn riemann_satisfies_telegraph_equation() {
        let a_sq = 1.3;
        let h = 1e-3;
        let r = |x: f64, y: f64| riemann_function(x, y, a_sq).value;
        for i in 0..20 {
            let xi = 0.2 + 0.17 * i as f64;
            let eta = 0.5 + 0.11 * i as f64;
            let cross = (r(xi + h, eta + h) - r(xi + h, eta - h) - r(xi - h, eta + h) + r(xi - h, eta - h))
                / (4.0 * h * h);
            assert!((4.0 * cross + a_sq * r(xi, eta)).abs() < 1e-6, "({xi}, {eta})");
        }
    }

    #[test]
    fn psi_plus_examples() {
        let out = psi_plus(0.5, 1.0, 1.0).unwrap();
        assert_eq!((out.smooth, out.delta_coeff), (ZERO, ZERO));
        let massless = psi_plus(2.0, 1.0, 0.0).unwrap();
        assert_eq!(massless.smooth.re, 0.0);
        let cone = psi_plus(1.0, 1.0, 0.0).unwrap();
        assert_eq!(cone.region.region, Region::Lightlike);
        assert_eq!(cone.delta_coeff.re, 1.0 / PI);
        assert!(psi_plus(-1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn psi_plus_matches_hankel_quadrature() {
        let closed = psi_plus(2.0, 1.0, 1.0).unwrap().smooth.re;
        let numeric = psi_plus_numeric(2.0, 1.0, 1.0, 1e-8).unwrap();
        assert!((numeric.re() - closed).abs() < 1e-6 * closed.abs(), "{} vs {closed}", numeric.re());
    }

    #[test]
    fn psi_minus_examples() {
        let v = psi_minus(1.0, 1.0).unwrap();
        assert!((v.smooth.re - k1_oracle(1.0) / TAU).abs() < 1e-10);
        let lt = 1.7;
        let limit = 1.0 / (TAU * lt * lt);
        assert_eq!(psi_minus(lt, 0.0).unwrap().smooth.re, limit);
        assert!((psi_minus(lt, 1e-6).unwrap().smooth.re - limit).abs() < 1e-4 * limit);
        assert!(psi_minus(0.0, 1.0).is_err());
        let numeric = psi_minus_numeric(1.0, 0.6, 1.0, 1e-9).unwrap();
        assert!((numeric.re() - v.smooth.re).abs() < 1e-6 * v.smooth.re);
    }

    #[test]
    fn volkov_zero_potential_is_free() {
        let k = PhysicalConstants::natural(1.0, 1.3);
        for i in 0..40 {
            let p = SpacetimePoint::new(0.3 + 0.1 * i as f64, 0.2, -0.1 * i as f64 / 10.0, 0.05 * i as f64);
            let v = volkov_psi(&p, &PotentialSpec::Zero, &k).unwrap();
            let tau = ((k.c * p.t - p.z) * (k.c * p.t + p.z)).sqrt();
            let free = psi_plus(tau, p.x_perp(), k.k0).unwrap();
            assert_eq!(v, free);
            assert_eq!(v.phase, ONE);
        }
    }

    #[test]
    fn volkov_uncharged_is_free() {
        let k = PhysicalConstants::natural(0.0, 0.9);
        let spec = PotentialSpec::LinearPolarized {
            a: 2.0,
            kappa: 1.0,
            phase: 0.3,
        };
        let p = SpacetimePoint::new(3.0, 0.4, 0.5, 1.0);
        let v = volkov_psi(&p, &spec, &k).unwrap();
        let free = volkov_psi(&p, &PotentialSpec::Zero, &k).unwrap();
        assert_eq!(v, free);
    }

    #[test]
    fn volkov_circular_full_period_uses_boosted_mass() {
        let (a, kappa) = (0.8, 1.0);
        let k = PhysicalConstants::natural(0.9, 1.1);
        let spec = PotentialSpec::CircularPolarized { a, kappa, phase: 0.0 };
        // xi = t - z = 2 pi / kappa
        let p = SpacetimePoint::new(TAU + 0.5, 0.3, 0.4, 0.5);
        let v = volkov_psi(&p, &spec, &k).unwrap();
        let boosted = k.k0 * (1.0 + (k.e * a / k.k0).powi(2)).sqrt();
        assert!((v.effective_k0 - boosted).abs() < 1e-10 * boosted);
        let tau = ((p.t - p.z) * (p.t + p.z)).sqrt();
        let free = psi_plus(tau, p.x_perp(), boosted).unwrap().smooth.re;
        assert!((v.smooth / v.phase - free).norm() < 1e-10 * free.abs());
        assert!((v.phase.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn schwinger_free_reductions() {
        let k = PhysicalConstants::natural(0.0, 1.0);
        let spec = PotentialSpec::CircularPolarized {
            a: 1.0,
            kappa: 1.0,
            phase: 0.0,
        };
        let p_out = SpacetimePoint::new(0.5, 1.5, 0.2, 0.3);
        let s = schwinger_propagator(&p_out, &SpacetimePoint::ORIGIN, &spec, &k).unwrap();
        assert_eq!(s.phase, ONE);
        assert_eq!(s.smooth().re, 0.0);
        let cls = classify(&p_out, &k, 0.0);
        let free = delta_c_free(&cls, 1.0).unwrap();
        assert_eq!(s.smooth(), free.smooth * SCHWINGER_NORMALIZATION);
        let cone = SpacetimePoint::new(1.0, 0.6, 0.0, 0.8);
        assert!(schwinger_propagator(&cone, &SpacetimePoint::ORIGIN, &spec, &k).is_err());
    }

    fn arb_point() -> impl Strategy<Value = SpacetimePoint> {
        (0.0f64..5.0, -3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0)
            .prop_map(|(t, x1, x2, z)| SpacetimePoint::new(t, x1, x2, z))
    }

    proptest! {
        #[test]
        fn delta_s_vanishes_outside_and_delta_1_positive(lt in 0.01f64..20.0, k0 in 0.0f64..10.0) {
            prop_assert_eq!(delta_s_free(&spacelike(lt), k0).smooth, ZERO);
            prop_assert!(delta_1_free(&spacelike(lt), k0).unwrap().smooth.re > 0.0);
        }

        #[test]
        fn psi_minus_is_positive(lt in 0.01f64..20.0, k0 in 0.0f64..20.0) {
            prop_assert!(psi_minus(lt, k0).unwrap().smooth.re > 0.0);
        }

        #[test]
        fn schwinger_phase_has_unit_modulus(p in arb_point(), q in arb_point(), a in 0.0f64..2.0) {
            let k = PhysicalConstants::natural(1.0, 1.0);
            let spec = PotentialSpec::LinearPolarized { a, kappa: 1.3, phase: 0.1 };
            if let Ok(s) = schwinger_propagator(&p, &q, &spec, &k) {
                prop_assert!((s.phase.norm() - 1.0).abs() < 1e-14);
            }
        }

        #[test]
        fn volkov_modulus_is_rotation_invariant(p in arb_point(), angle in 0.0f64..TAU) {
            let k = PhysicalConstants::natural(0.7, 1.0);
            let spec = PotentialSpec::CircularPolarized { a: 1.2, kappa: 0.9, phase: 0.0 };
            let (s, c) = angle.sin_cos();
            let q = SpacetimePoint::new(p.t, c * p.x1 - s * p.x2, s * p.x1 + c * p.x2, p.z);
            let a = volkov_psi(&p, &spec, &k).unwrap();
            let b = volkov_psi(&q, &spec, &k).unwrap();
            if a.region.region == b.region.region {
                prop_assert!((a.smooth.norm() - b.smooth.norm()).abs() <= 1e-12 * (1.0 + a.smooth.norm()));
            }
        }
    }
}
