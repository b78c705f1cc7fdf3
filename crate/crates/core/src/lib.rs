//! Fundamental solutions of the Klein-Fock-Gordon equation, free and in a
//! plane-wave (Volkov) potential, evaluated in the characteristic (Goursat)
//! representation.
//!
//! Every closed form here has an independent numerical counterpart in
//! [`quadrature`] or [`goursat`], so the library can check itself.

pub mod error;
pub mod geometry;
pub mod goursat;
pub mod potentials;
pub mod propagators;
pub mod quadrature;
pub mod special_functions;

pub use error::{Error, Result};
pub use geometry::{IntervalClassification, PhysicalConstants, Region, SpacetimePoint};


pub use potentials::{FieldAverages, PotentialSpec, TabulatedPotential};
pub use goursat::{ConvergenceRow, GoursatGrid};
pub use propagators::{PropagatorValue, RiemannValue, SchwingerValue};
pub use quadrature::QuadratureResult;
pub use special_functions::CylinderKind;
