//! JSON run configuration. Every field has a default, so an empty document
//! `{}` is a valid configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use volkov_core::potentials::TabulatedPotential;
use volkov_core::{PhysicalConstants, PotentialSpec, SpacetimePoint};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub units: Units,
    pub e: f64,
    pub k0: f64,
    pub potential: PotentialConfig,
    /// Propagator tabulated by `eval-free`.
    pub propagator: FreeKind,
    /// One-point Volkov solution or two-point propagator for `eval-volkov`.
    pub mode: VolkovMode,
    /// Source point of the two-point mode.
    pub source: SpacetimePoint,
    pub grid: GridConfig,
    pub goursat: GoursatConfig,
    pub verify: VerifyConfig,
    pub format: OutputFormat,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            units: Units::Natural,
            e: 0.0,
            k0: 1.0,
            potential: PotentialConfig::default(),
            propagator: FreeKind::DeltaS,
            mode: VolkovMode::OnePoint,
            source: SpacetimePoint::ORIGIN,
            grid: GridConfig::default(),
            goursat: GoursatConfig::default(),
            verify: VerifyConfig::default(),
            format: OutputFormat::Csv,
            seed: 20_240_601,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "lowercase")]
pub enum Units {
    Natural,
    Explicit { c: f64, hbar: f64 },
}

/// A potential given inline or as a path to a `xi,A1[,A2]` CSV table,
/// resolved relative to the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialConfig {
    Inline(PotentialSpec),
    Table { table: PathBuf },
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig::Inline(PotentialSpec::Zero)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeKind {
    DeltaS,
    #[serde(rename = "delta_1")]
    Delta1,
    DeltaC,
    PsiPlus,
    PsiMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolkovMode {
    OnePoint,
    TwoPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// `n` evenly spaced samples from `lo` to `hi`; `n = 1` gives `lo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn point(value: f64) -> Self {
        Self { lo: value, hi: value, n: 1 }
    }

    pub fn samples(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| if i + 1 == self.n { self.hi } else { self.lo + i as f64 * step })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub t: Axis,
    pub z: Axis,
    pub x_perp: Axis,
    /// Direction of the transverse displacement in the `(x1, x2)` plane.
    pub azimuth: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            t: Axis { lo: 1.0, hi: 3.0, n: 11 },
            z: Axis::point(0.0),
            x_perp: Axis::point(0.5),
            azimuth: 0.0,
        }
    }
}

impl GridConfig {
    /// Points in `t`-major, then `z`, then `x_perp` order.
    pub fn points(&self) -> Vec<SpacetimePoint> {
        let (s, c) = self.azimuth.sin_cos();
        let xs = self.x_perp.samples();
        let zs = self.z.samples();
        let mut out = Vec::with_capacity(self.t.n * self.z.n * self.x_perp.n);
        for t in self.t.samples() {
            for &z in &zs {
                for &x in &xs {
                    out.push(SpacetimePoint::new(t, x * c, x * s, z));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GoursatConfig {
    pub xi_max: f64,
    pub eta_max: f64,
    /// Cells per direction of the exported grid.
    pub n: usize,
    /// Cells per direction of the coarsest grid in the convergence study.
    pub coarsest: usize,
    pub levels: u32,
    pub k1: f64,
    pub k2: f64,
}

impl Default for GoursatConfig {
    fn default() -> Self {
        Self {
            xi_max: 2.0,
            eta_max: 2.0,
            n: 64,
            coarsest: 32,
            levels: 4,
            k1: 0.0,
            k2: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Suite groups to run; empty runs all.
    pub suites: Vec<String>,
    /// Replaces every required tolerance when set.
    pub required_tol: Option<f64>,
}

impl RunConfig {
    /// Reads a configuration file; relative table paths are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let PotentialConfig::Table { table } = &mut cfg.potential {
            if table.is_relative() {
                if let Some(dir) = path.parent() {
                    *table = dir.join(&*table);
                }
            }
        }
        Ok(cfg)
    }

    pub fn constants(&self) -> Result<PhysicalConstants, CliError> {
        let (c, hbar) = match self.units {
            Units::Natural => (1.0, 1.0),
            Units::Explicit { c, hbar } => (c, hbar),
        };
        let k = PhysicalConstants { c, hbar, e: self.e, k0: self.k0 };
        k.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(k)
    }

    pub fn potential(&self) -> Result<PotentialSpec, CliError> {
        let spec = match &self.potential {
            PotentialConfig::Inline(spec) => spec.clone(),
            PotentialConfig::Table { table } => PotentialSpec::Tabulated(
                TabulatedPotential::from_csv_path(table).map_err(|e| CliError::Config(e.to_string()))?,
            ),
        };
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }

    /// Checks everything that does not need a potential table.
    pub fn validate(&self) -> Result<(), CliError> {
        self.constants()?;
        for (name, axis) in [("t", self.grid.t), ("z", self.grid.z), ("x_perp", self.grid.x_perp)] {
            if axis.n == 0 || !axis.lo.is_finite() || !axis.hi.is_finite() {
                return Err(CliError::Config(format!("grid axis {name} needs n >= 1 and finite ends")));
            }
        }
        if self.grid.x_perp.lo < 0.0 || self.grid.x_perp.hi < 0.0 {
            return Err(CliError::Config("x_perp must be non-negative".into()));
        }
        if !self.grid.azimuth.is_finite() || !self.source.is_finite() {
            return Err(CliError::Config("azimuth and source must be finite".into()));
        }
        let g = &self.goursat;
        if g.n < 2 || g.coarsest < 2 || !(g.xi_max > 0.0 && g.eta_max > 0.0) || g.levels > 8 {
            return Err(CliError::Config(
                "goursat needs n, coarsest >= 2, positive extents and at most 8 levels".into(),
            ));
        }
        if !(g.k1.is_finite() && g.k2.is_finite()) {
            return Err(CliError::Config("goursat momenta must be finite".into()));
        }
        if let Some(tol) = self.verify.required_tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Config(format!("required_tol must be positive, got {tol}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn inline_potential_and_units_parse() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"units": {"system": "explicit", "c": 2.0, "hbar": 0.5},
                "potential": {"family": "circular_polarized", "a": 1.0, "kappa": 2.0}}"#,
        )
        .unwrap();
        assert_eq!(cfg.constants().unwrap().c, 2.0);
        assert_eq!(
            cfg.potential().unwrap(),
            PotentialSpec::CircularPolarized { a: 1.0, kappa: 2.0, phase: 0.0 }
        );
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"k_zero": 1.0}"#).is_err());
    }

    #[test]
    fn axis_samples_hit_both_ends() {
        let s = Axis { lo: 0.1, hi: 0.7, n: 4 }.samples();
        assert_eq!(s.len(), 4);
        assert_eq!((s[0], s[3]), (0.1, 0.7));
        assert_eq!(Axis::point(3.0).samples(), vec![3.0]);
    }

    #[test]
    fn bad_values_are_config_errors() {
        let mut cfg = RunConfig::default();
        cfg.grid.t.n = 0;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let mut cfg = RunConfig::default();
        cfg.k0 = -1.0;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let cfg = RunConfig {
            potential: PotentialConfig::Table { table: "/nonexistent/table.csv".into() },
            ..RunConfig::default()
        };
        assert!(matches!(cfg.potential(), Err(CliError::Config(_))));
    }
}
