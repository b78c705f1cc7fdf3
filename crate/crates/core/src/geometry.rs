//! Minkowski intervals, light-cone coordinates and region tagging.

use serde::{Deserialize, Serialize};

/// Unit system and physical parameters. `k0` is the inverse Compton length
/// `mu c / hbar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub c: f64,
    pub hbar: f64,
    /// Charge; zero is the free limit.
    pub e: f64,
    pub k0: f64,
}

impl PhysicalConstants {
    /// `c = hbar = 1`.
    pub fn natural(e: f64, k0: f64) -> Self {
        Self {
            c: 1.0,
            hbar: 1.0,
            e,
            k0,
        }
    }

    /// Coupling `e / (hbar c)` that multiplies the potential everywhere.
    pub fn coupling(&self) -> f64 {
        self.e / (self.hbar * self.c)
    }

    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.c.is_finite()
            && self.c > 0.0
            && self.hbar.is_finite()
            && self.hbar > 0.0
            && self.e.is_finite()
            && self.k0.is_finite()
            && self.k0 >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::InvalidArgument(format!(
                "physical constants out of range: {self:?}"
            )))
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::natural(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub z: f64,
}

impl SpacetimePoint {
    pub const ORIGIN: SpacetimePoint = SpacetimePoint {
        t: 0.0,
        x1: 0.0,
        x2: 0.0,
        z: 0.0,
    };

    pub fn new(t: f64, x1: f64, x2: f64, z: f64) -> Self {
        Self { t, x1, x2, z }
    }

    pub fn x_perp(&self) -> f64 {
        self.x1.hypot(self.x2)
    }

    /// Component-wise difference `self - other`.
    pub fn minus(&self, other: &SpacetimePoint) -> SpacetimePoint {
        SpacetimePoint {
            t: self.t - other.t,
            x1: self.x1 - other.x1,
            x2: self.x2 - other.x2,
            z: self.z - other.z,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x1.is_finite() && self.x2.is_finite() && self.z.is_finite()
    }
}

/// Light-cone coordinates `(xi, eta) = (ct - z, ct + z)`.
pub fn to_lightcone(p: &SpacetimePoint, k: &PhysicalConstants) -> (f64, f64) {
    let ct = k.c * p.t;
    (ct - p.z, ct + p.z)
}

/// Inverse of [`to_lightcone`]: returns `(t, z)`.
pub fn from_lightcone(xi: f64, eta: f64, k: &PhysicalConstants) -> (f64, f64) {
    (0.5 * (xi + eta) / k.c, 0.5 * (eta - xi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Timelike,
    Spacelike,
    Lightlike,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Timelike => "timelike",
            Region::Spacelike => "spacelike",
            Region::Lightlike => "lightlike",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalClassification {
    /// `c^2 t^2 - r^2`.
    pub lambda_sq: f64,
    /// `c^2 t^2 - z^2`.
    pub tau_sq: f64,
    pub region: Region,
}

impl IntervalClassification {
    /// Tags an interval given its squared 4-interval.
    pub fn from_squares(lambda_sq: f64, tau_sq: f64, tol_cone: f64) -> Self {
        let region = if lambda_sq > tol_cone {
            Region::Timelike
        } else if lambda_sq < -tol_cone {
            Region::Spacelike
        } else {
            Region::Lightlike
        };
        Self {
            lambda_sq,
            tau_sq,
            region,
        }
    }

    /// `sqrt(lambda_sq)`, only for timelike intervals.
    pub fn lambda(&self) -> Option<f64> {
        (self.region == Region::Timelike).then(|| self.lambda_sq.sqrt())
    }

    /// `sqrt(-lambda_sq)`, only for spacelike intervals.
    pub fn lambda_tilde(&self) -> Option<f64> {
        (self.region == Region::Spacelike).then(|| (-self.lambda_sq).sqrt())
    }
}

/// Relative width of the cone band used by [`default_tol_cone`].
pub const CONE_REL_TOL: f64 = 1e-9;

/// `1e-9 * max(|ct|, r)^2`.
pub fn default_tol_cone(p: &SpacetimePoint, k: &PhysicalConstants) -> f64 {
    let ct = (k.c * p.t).abs();
    let r = p.x_perp().hypot(p.z);
    let scale = ct.max(r);
    CONE_REL_TOL * scale * scale
}

pub fn classify(p: &SpacetimePoint, k: &PhysicalConstants, tol_cone: f64) -> IntervalClassification {
    let ct = k.c * p.t;
    let ct2 = ct * ct;
    let tau_sq = ct2 - p.z * p.z;
    let lambda_sq = ct2 - p.x1 * p.x1 - p.x2 * p.x2 - p.z * p.z;
    IntervalClassification::from_squares(lambda_sq, tau_sq, tol_cone.max(0.0))
}

/// [`classify`] with the default cone tolerance.
pub fn classify_default(p: &SpacetimePoint, k: &PhysicalConstants) -> IntervalClassification {
    classify(p, k, default_tol_cone(p, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lightcone_examples() {
        let k = PhysicalConstants::natural(0.0, 1.0);
        assert_eq!(to_lightcone(&SpacetimePoint::new(1.0, 0.0, 0.0, 0.0), &k), (1.0, 1.0));
        assert_eq!(to_lightcone(&SpacetimePoint::new(0.0, 0.0, 0.0, 1.0), &k), (-1.0, 1.0));
    }

    #[test]
    fn classify_examples() {
        let k = PhysicalConstants::natural(0.0, 1.0);
        let c = classify(&SpacetimePoint::new(1.0, 0.0, 0.0, 0.0), &k, 1e-9);
        assert_eq!((c.lambda_sq, c.region), (1.0, Region::Timelike));
        assert_eq!(c.lambda(), Some(1.0));
        assert_eq!(c.lambda_tilde(), None);

        let c = classify(&SpacetimePoint::new(0.0, 1.0, 0.0, 0.0), &k, 1e-9);
        assert_eq!((c.lambda_sq, c.region), (-1.0, Region::Spacelike));
        assert_eq!(c.lambda_tilde(), Some(1.0));

        for tol in [0.0, 1e-12, 1.0] {
            let c = classify(&SpacetimePoint::new(1.0, 0.0, 0.0, 1.0), &k, tol);
            assert_eq!(c.region, Region::Lightlike);
        }
    }

    #[test]
    fn explicit_units_carry_c() {
        let k = PhysicalConstants {
            c: 3.0,
            hbar: 2.0,
            e: 1.0,
            k0: 1.0,
        };
        let p = SpacetimePoint::new(1.0, 0.0, 0.0, 3.0);
        assert_eq!(to_lightcone(&p, &k), (0.0, 6.0));
        assert_eq!(classify_default(&p, &k).region, Region::Lightlike);
    }

    proptest! {
        #[test]
        fn xi_eta_product_is_two_interval(t in -50.0f64..50.0, z in -50.0f64..50.0, c in 0.5f64..3.0) {
            let k = PhysicalConstants { c, hbar: 1.0, e: 0.0, k0: 1.0 };
            let p = SpacetimePoint::new(t, 0.0, 0.0, z);
            let (xi, eta) = to_lightcone(&p, &k);
            let tau_sq = c * c * t * t - z * z;
            let scale = (c * t).powi(2) + z * z;
            prop_assert!((xi * eta - tau_sq).abs() <= 4.0 * f64::EPSILON * scale);
        }

        #[test]
        fn lightcone_round_trip(t in -50.0f64..50.0, z in -50.0f64..50.0, c in 0.5f64..3.0) {
            let k = PhysicalConstants { c, hbar: 1.0, e: 0.0, k0: 1.0 };
            let (xi, eta) = to_lightcone(&SpacetimePoint::new(t, 0.0, 0.0, z), &k);
            let (t2, z2) = from_lightcone(xi, eta, &k);
            let scale = t.abs().max(z.abs()).max(1.0);
            prop_assert!((t2 - t).abs() <= 8.0 * f64::EPSILON * scale * c.max(1.0 / c));
            prop_assert!((z2 - z).abs() <= 8.0 * f64::EPSILON * scale * c.max(1.0));
        }

        #[test]
        fn classification_depends_on_x_perp_only(
            t in -10.0f64..10.0, x1 in -10.0f64..10.0, x2 in -10.0f64..10.0,
            z in -10.0f64..10.0, angle in 0.0f64..std::f64::consts::TAU,
        ) {
            let k = PhysicalConstants::natural(0.0, 1.0);
            let (s, c) = angle.sin_cos();
            let p = SpacetimePoint::new(t, x1, x2, z);
            let q = SpacetimePoint::new(t, c * x1 - s * x2, s * x1 + c * x2, z);
            let a = classify(&p, &k, 1e-9);
            let b = classify(&q, &k, 1e-9);
            let scale = t * t + x1 * x1 + x2 * x2 + z * z;
            prop_assert!((a.lambda_sq - b.lambda_sq).abs() <= 8.0 * f64::EPSILON * scale);
            prop_assert_eq!(a.tau_sq, b.tau_sq);
        }
    }
}
