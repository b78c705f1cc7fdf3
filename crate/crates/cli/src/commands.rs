//! Grid evaluation for `eval-free`, `eval-volkov` and `goursat`. Every
//! command renders into a byte buffer; rows come out in grid order no matter
//! how the evaluation was scheduled.

use rayon::prelude::*;
use serde::Serialize;
use volkov_core::geometry::{classify_default, to_lightcone};
use volkov_core::goursat::{convergence_study, solve_goursat, ConvergenceRow};
use volkov_core::potentials::{big_k_squared, f_accumulate};
use volkov_core::propagators::{
    delta_1_free, delta_c_free, delta_s_free, psi_minus, psi_plus_at, riemann_function,
    schwinger_propagator, volkov_psi,
};
use volkov_core::{Error, PropagatorValue, Region, SpacetimePoint};

use crate::config::{FreeKind, OutputFormat, RunConfig, VolkovMode};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeRow {
    pub t: f64,
    pub z: f64,
    pub x_perp: f64,
    pub region: Region,
    pub lambda_sq: f64,
    pub delta_re: f64,
    pub delta_im: f64,
    pub smooth_re: f64,
    pub smooth_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolkovRow {
    pub t: f64,
    pub z: f64,
    pub x_perp: f64,
    pub region: Region,
    pub lambda_sq: f64,
    pub delta_re: f64,
    pub delta_im: f64,
    pub smooth_re: f64,
    pub smooth_im: f64,
    pub xi: f64,
    pub k0_eff: f64,
    pub phase_re: f64,
    pub phase_im: f64,
    /// Constant multiplying `delta` and `smooth` in the two-point mode; one
    /// otherwise.
    pub normalization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoursatRow {
    pub xi: f64,
    pub eta: f64,
    pub phi: f64,
    pub analytic: f64,
    pub error: f64,
}

/// Rendered `goursat` output.
#[derive(Debug, Clone, PartialEq)]
pub struct GoursatOutput {
    pub grid: Vec<u8>,
    pub convergence: Vec<u8>,
    pub unstable: bool,
}

fn free_row(p: &SpacetimePoint, v: &PropagatorValue) -> FreeRow {
    FreeRow {
        t: p.t,
        z: p.z,
        x_perp: p.x_perp(),
        region: v.region.region,
        lambda_sq: v.region.lambda_sq,
        delta_re: v.delta_coeff.re,
        delta_im: v.delta_coeff.im,
        smooth_re: v.smooth.re,
        smooth_im: v.smooth.im,
    }
}

pub fn eval_free_rows(cfg: &RunConfig) -> Result<Vec<FreeRow>, CliError> {
    cfg.validate()?;
    let k = cfg.constants()?;
    let kind = cfg.propagator;
    let rows: Result<Vec<FreeRow>, Error> = cfg
        .grid
        .points()
        .par_iter()
        .map(|p| {
            let v = match kind {
                FreeKind::DeltaS => delta_s_free(&classify_default(p, &k), k.k0),
                FreeKind::Delta1 => delta_1_free(&classify_default(p, &k), k.k0)?,
                FreeKind::DeltaC => delta_c_free(&classify_default(p, &k), k.k0)?,
                FreeKind::PsiPlus => psi_plus_at(p, k.k0, &k)?,
                FreeKind::PsiMinus => {
                    let cls = classify_default(p, &k);
                    let lt = cls.lambda_tilde().ok_or_else(|| Error::Domain {
                        function: "psi_minus",
                        detail: format!("point {p:?} is not spacelike"),
                    })?;
                    let mut v = psi_minus(lt, k.k0)?;
                    v.region = cls;
                    v
                }
            };
            Ok(free_row(p, &v))
        })
        .collect();
    Ok(rows?)
}

pub fn eval_volkov_rows(cfg: &RunConfig) -> Result<Vec<VolkovRow>, CliError> {
    cfg.validate()?;
    let k = cfg.constants()?;
    let spec = cfg.potential()?;
    let source = cfg.source;
    let mode = cfg.mode;
    let rows: Result<Vec<VolkovRow>, Error> = cfg
        .grid
        .points()
        .par_iter()
        .map(|p| {
            let (v, normalization) = match mode {
                VolkovMode::OnePoint => (volkov_psi(p, &spec, &k)?, 1.0),
                VolkovMode::TwoPoint => {
                    let s = schwinger_propagator(p, &source, &spec, &k)?;
                    (s.shape, s.normalization)
                }
            };
            let base = free_row(p, &v);
            Ok(VolkovRow {
                t: base.t,
                z: base.z,
                x_perp: base.x_perp,
                region: base.region,
                lambda_sq: base.lambda_sq,
                delta_re: base.delta_re,
                delta_im: base.delta_im,
                smooth_re: base.smooth_re,
                smooth_im: base.smooth_im,
                xi: to_lightcone(p, &k).0,
                k0_eff: v.effective_k0,
                phase_re: v.phase.re,
                phase_im: v.phase.im,
                normalization,
            })
        })
        .collect();
    Ok(rows?)
}

/// Serializes rows as CSV (header, LF endings, shortest round-trip floats)
/// or as a JSON array.
pub fn render<T: Serialize>(rows: &[T], format: OutputFormat) -> Result<Vec<u8>, CliError> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            for row in rows {
                w.serialize(row)?;
            }
            w.into_inner().map_err(|e| CliError::Output(e.to_string()))
        }
        OutputFormat::Json => {
            let mut out = serde_json::to_vec_pretty(rows)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

pub fn eval_free(cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    render(&eval_free_rows(cfg)?, cfg.format)
}

pub fn eval_volkov(cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    render(&eval_volkov_rows(cfg)?, cfg.format)
}

pub fn goursat(cfg: &RunConfig) -> Result<GoursatOutput, CliError> {
    cfg.validate()?;
    let k = cfg.constants()?;
    let spec = cfg.potential()?;
    let g = cfg.goursat;
    let ksq = |xi: f64| big_k_squared(&spec, g.k1, g.k2, xi, &k);
    let grid = solve_goursat(ksq, g.xi_max, g.eta_max, g.n, g.n)?;
    let f: Vec<f64> = (0..=g.n)
        .map(|i| f_accumulate(&spec, g.k1, g.k2, grid.xi(i), &k))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::with_capacity((g.n + 1) * (g.n + 1));
    for (i, &fi) in f.iter().enumerate() {
        for j in 0..=g.n {
            let phi = grid.value(i, j);
            let analytic = riemann_function(1.0, grid.eta(j), fi).value;
            rows.push(GoursatRow {
                xi: grid.xi(i),
                eta: grid.eta(j),
                phi,
                analytic,
                error: (phi - analytic).abs(),
            });
        }
    }
    let study: Vec<ConvergenceRow> = convergence_study(ksq, g.xi_max, g.eta_max, g.coarsest, g.levels)?;
    let unstable = grid.unstable || study.iter().any(|r| r.unstable);
    Ok(GoursatOutput {
        grid: render(&rows, cfg.format)?,
        convergence: render(&study, cfg.format)?,
        unstable,
    })
}
