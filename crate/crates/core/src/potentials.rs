//! Plane-wave potentials `A(xi) = (A1(xi), A2(xi), 0, 0)` and the interval
//! averages that turn the interacting problem into a free one with a
//! dressed mass.
//!
//! Squares of the potential are Euclidean transverse squares,
//! `A^2 = A1^2 + A2^2 >= 0`, so the interval variance is non-negative and
//! the effective mass never drops below `k0`.

use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{to_lightcone, PhysicalConstants, SpacetimePoint};
use crate::quadrature::{adaptive, AdaptiveOptions};

/// Default relative tolerance of the averaging quadratures.
pub const DEFAULT_AVERAGE_TOL: f64 = 1e-10;

/// Intervals shorter than this (relative to the coordinate scale) are
/// averaged pointwise.
const DEGENERATE_GAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialSpec {
    Zero,
    Constant {
        a1: f64,
        a2: f64,
    },
    /// `(a cos(kappa xi + phase), 0)`.
    LinearPolarized {
        a: f64,
        kappa: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `(a cos(kappa xi + phase), a sin(kappa xi + phase))`.
    CircularPolarized {
        a: f64,
        kappa: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `(a exp(-xi^2 / 2 width^2) cos(kappa xi), 0)`.
    PulseEnvelope {
        a: f64,
        kappa: f64,
        width: f64,
    },
    Tabulated(TabulatedPotential),
}

impl PotentialSpec {
    /// `(A1, A2)` at `xi`.
    pub fn eval(&self, xi: f64) -> (f64, f64) {
        match *self {
            PotentialSpec::Zero => (0.0, 0.0),
            PotentialSpec::Constant { a1, a2 } => (a1, a2),
            PotentialSpec::LinearPolarized { a, kappa, phase } => (a * (kappa * xi + phase).cos(), 0.0),
            PotentialSpec::CircularPolarized { a, kappa, phase } => {
                let (s, c) = (kappa * xi + phase).sin_cos();
                (a * c, a * s)
            }
            PotentialSpec::PulseEnvelope { a, kappa, width } => {
                let envelope = (-0.5 * (xi / width).powi(2)).exp();
                (a * envelope * (kappa * xi).cos(), 0.0)
            }
            PotentialSpec::Tabulated(ref table) => table.eval(xi),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            PotentialSpec::Zero => true,
            PotentialSpec::Constant { a1, a2 } => a1.is_finite() && a2.is_finite(),
            PotentialSpec::LinearPolarized { a, kappa, phase }
            | PotentialSpec::CircularPolarized { a, kappa, phase } => {
                a.is_finite() && kappa.is_finite() && phase.is_finite()
            }
            PotentialSpec::PulseEnvelope { a, kappa, width } => {
                a.is_finite() && kappa.is_finite() && width.is_finite() && width > 0.0
            }
            PotentialSpec::Tabulated(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bad potential parameters: {self:?}")))
        }
    }

    /// `(int A1, int A2, int (A1^2 + A2^2))` over `[lo, hi]`, `lo <= hi`.
    fn integrals(&self, lo: f64, hi: f64, rel_tol: f64) -> Result<(f64, f64, f64)> {
        let len = hi - lo;
        match *self {
            PotentialSpec::Zero => Ok((0.0, 0.0, 0.0)),
            PotentialSpec::Constant { a1, a2 } => Ok((a1 * len, a2 * len, (a1 * a1 + a2 * a2) * len)),
            PotentialSpec::LinearPolarized { a, kappa, phase } => {
                if kappa == 0.0 {
                    let a1 = a * phase.cos();
                    return Ok((a1 * len, 0.0, a1 * a1 * len));
                }
                let (p, q) = (kappa * lo + phase, kappa * hi + phase);
                let int_a1 = a / kappa * sin_difference(q, p);
                let int_sq = 0.5 * a * a * len + a * a / (4.0 * kappa) * sin_difference(2.0 * q, 2.0 * p);
                Ok((int_a1, 0.0, int_sq))
            }
            PotentialSpec::CircularPolarized { a, kappa, phase } => {
                if kappa == 0.0 {
                    let (s, c) = phase.sin_cos();
                    return Ok((a * c * len, a * s * len, a * a * len));
                }
                let (p, q) = (kappa * lo + phase, kappa * hi + phase);
                let int_a1 = a / kappa * sin_difference(q, p);
                let int_a2 = -a / kappa * cos_difference(q, p);
                Ok((int_a1, int_a2, a * a * len))
            }
            PotentialSpec::PulseEnvelope { .. } => {
                self.integrate_numerically(lo, hi, &[], rel_tol)
            }
            PotentialSpec::Tabulated(ref table) => {
                let (first, last) = (table.xi[0], table.xi[table.xi.len() - 1]);
                let (a, b) = (lo.max(first), hi.min(last));
                if a >= b {
                    return Ok((0.0, 0.0, 0.0));
                }
                let knots: Vec<f64> = table.xi.iter().copied().filter(|&x| x > a && x < b).collect();
                self.integrate_numerically(a, b, &knots, rel_tol)
            }
        }
    }

    fn integrate_numerically(
        &self,
        lo: f64,
        hi: f64,
        breaks: &[f64],
        rel_tol: f64,
    ) -> Result<(f64, f64, f64)> {
        let opts = AdaptiveOptions {
            abs_tol: 1e-300,
            rel_tol,
            max_subdivisions: 4000,
        };
        let mut edges = Vec::with_capacity(breaks.len() + 2);
        edges.push(lo);
        edges.extend_from_slice(breaks);
        edges.push(hi);
        let mut totals = [0.0; 3];
        let mut errors = [0.0; 3];
        let mut converged = true;
        for w in edges.windows(2) {
            for (slot, component) in [0usize, 1, 2].into_iter().enumerate() {
                let f = |x: f64| {
                    let (a1, a2) = self.eval(x);
                    match component {
                        0 => a1,
                        1 => a2,
                        _ => a1 * a1 + a2 * a2,
                    }
                };
                let (v, e, _, ok) = adaptive(f, w[0], w[1], &opts);
                totals[slot] += v;
                errors[slot] += e;
                converged &= ok;
            }
        }
        if !converged {
            let achieved = (0..3)
                .map(|i| errors[i] / totals[i].abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            // components that are identically zero report a huge relative error
            if errors.iter().any(|&e| e > 1e-14 * (hi - lo)) {
                return Err(Error::Quadrature {
                    achieved,
                    requested: rel_tol,
                });
            }
        }
        Ok((totals[0], totals[1], totals[2]))
    }
}

/// `sin q - sin p` without cancellation for nearby arguments.
fn sin_difference(q: f64, p: f64) -> f64 {
    2.0 * (0.5 * (q + p)).cos() * (0.5 * (q - p)).sin()
}

/// `cos q - cos p` without cancellation for nearby arguments.
fn cos_difference(q: f64, p: f64) -> f64 {
    -2.0 * (0.5 * (q + p)).sin() * (0.5 * (q - p)).sin()
}

// ---------------------------------------------------------------------------
// Tabulated potentials

/// Potential sampled on a strictly increasing grid, interpolated by natural
/// cubic splines and extended by zero outside the samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 3]>", into = "Vec<[f64; 3]>")]
pub struct TabulatedPotential {
    xi: Vec<f64>,
    a1: CubicSpline,
    a2: CubicSpline,
}

impl TabulatedPotential {
    pub fn new(samples: &[(f64, f64, f64)]) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::TooFewSamples(samples.len()));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::UnorderedSamples(i + 1));
            }
        }
        if samples.iter().any(|s| !(s.0.is_finite() && s.1.is_finite() && s.2.is_finite())) {
            return Err(Error::InvalidArgument("non-finite sample in potential table".into()));
        }
        let xi: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let a1: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let a2: Vec<f64> = samples.iter().map(|s| s.2).collect();
        Ok(Self {
            a1: CubicSpline::natural(&xi, &a1),
            a2: CubicSpline::natural(&xi, &a2),
            xi,
        })
    }

    /// Reads `xi, A1[, A2]` rows after a header line.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut samples = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Table(e.to_string()))?;
            if record.len() != 2 && record.len() != 3 {
                return Err(Error::Table(format!(
                    "row {}: expected 2 or 3 columns, found {}",
                    line + 2,
                    record.len()
                )));
            }
            let parse = |i: usize| -> Result<f64> {
                record[i]
                    .parse::<f64>()
                    .map_err(|e| Error::Table(format!("row {}: {e}", line + 2)))
            };
            let a2 = if record.len() == 3 { parse(2)? } else { 0.0 };
            samples.push((parse(0)?, parse(1)?, a2));
        }
        Self::new(&samples)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file)
    }

    pub fn samples(&self) -> Vec<(f64, f64, f64)> {
        (0..self.xi.len())
            .map(|i| (self.xi[i], self.a1.y[i], self.a2.y[i]))
            .collect()
    }

    pub fn eval(&self, xi: f64) -> (f64, f64) {
        let (first, last) = (self.xi[0], self.xi[self.xi.len() - 1]);
        if !(xi >= first && xi <= last) {
            return (0.0, 0.0);
        }
        let seg = self.xi.partition_point(|&x| x <= xi).clamp(1, self.xi.len() - 1) - 1;
        (self.a1.eval(&self.xi, seg, xi), self.a2.eval(&self.xi, seg, xi))
    }
}

impl TryFrom<Vec<[f64; 3]>> for TabulatedPotential {
    type Error = Error;
    fn try_from(rows: Vec<[f64; 3]>) -> Result<Self> {
        let samples: Vec<_> = rows.iter().map(|r| (r[0], r[1], r[2])).collect();
        Self::new(&samples)
    }
}

impl From<TabulatedPotential> for Vec<[f64; 3]> {
    fn from(t: TabulatedPotential) -> Self {
        t.samples().into_iter().map(|(x, a, b)| [x, a, b]).collect()
    }
}

/// Values and second derivatives at the knots.
#[derive(Debug, Clone, PartialEq)]
struct CubicSpline {
    y: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    fn natural(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let mut second = vec![0.0; n];
        // Thomas algorithm for the interior second derivatives
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            diag[i] = 2.0 * (h0 + h1);
            rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        for i in 2..n - 1 {
            let h = x[i] - x[i - 1];
            let w = h / diag[i - 1];
            diag[i] -= w * h;
            rhs[i] -= w * rhs[i - 1];
        }
        for i in (1..n - 1).rev() {
            let h1 = x[i + 1] - x[i];
            second[i] = (rhs[i] - h1 * second[i + 1]) / diag[i];
        }
        Self {
            y: y.to_vec(),
            second,
        }
    }

    fn eval(&self, x: &[f64], seg: usize, at: f64) -> f64 {
        let h = x[seg + 1] - x[seg];
        let a = (x[seg + 1] - at) / h;
        let b = (at - x[seg]) / h;
        a * self.y[seg]
            + b * self.y[seg + 1]
            + ((a * a * a - a) * self.second[seg] + (b * b * b - b) * self.second[seg + 1]) * h * h / 6.0
    }
}

// ---------------------------------------------------------------------------
// Averages and derived quantities

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldAverages {
    pub xi_lo: f64,
    pub xi_hi: f64,
    pub mean_a1: f64,
    pub mean_a2: f64,
    pub mean_asq: f64,
    /// `mean_asq - mean_a1^2 - mean_a2^2`.
    pub variance: f64,
    pub k0_eff: f64,
}

pub fn eval_potential(spec: &PotentialSpec, xi: f64) -> Result<(f64, f64)> {
    if !xi.is_finite() {
        return Err(Error::domain("eval_potential", format!("non-finite xi {xi}")));
    }
    Ok(spec.eval(xi))
}

/// `k0 sqrt(1 + (e / hbar c k0)^2 variance)`, written so that `k0 = 0`
/// works; negative variances from quadrature noise are treated as zero.
pub fn effective_mass(k0: f64, coupling: f64, variance: f64) -> f64 {
    if coupling == 0.0 || variance <= 0.0 {
        return k0;
    }
    let shift = coupling * coupling * variance;
    if k0 > 0.0 {
        k0 * (1.0 + shift / (k0 * k0)).sqrt()
    } else {
        shift.sqrt()
    }
}

pub fn average_over(
    spec: &PotentialSpec,
    xi_lo: f64,
    xi_hi: f64,
    k: &PhysicalConstants,
) -> Result<FieldAverages> {
    average_over_with(spec, xi_lo, xi_hi, k, DEFAULT_AVERAGE_TOL)
}

pub fn average_over_with(
    spec: &PotentialSpec,
    xi_lo: f64,
    xi_hi: f64,
    k: &PhysicalConstants,
    rel_tol: f64,
) -> Result<FieldAverages> {
    if !(xi_lo.is_finite() && xi_hi.is_finite()) {
        return Err(Error::domain("average_over", "non-finite interval"));
    }
    let (lo, hi) = if xi_lo <= xi_hi { (xi_lo, xi_hi) } else { (xi_hi, xi_lo) };
    let scale = lo.abs().max(hi.abs()).max(1.0);
    let (mean_a1, mean_a2, mean_asq, variance) = if hi - lo < DEGENERATE_GAP * scale {
        let (a1, a2) = spec.eval(0.5 * (lo + hi));
        (a1, a2, a1 * a1 + a2 * a2, 0.0)
    } else {
        let len = hi - lo;
        let (i1, i2, isq) = spec.integrals(lo, hi, rel_tol)?;
        let (m1, m2, msq) = (i1 / len, i2 / len, isq / len);
        let variance = match spec {
            PotentialSpec::Zero | PotentialSpec::Constant { .. } => 0.0,
            _ => msq - m1 * m1 - m2 * m2,
        };
        (m1, m2, msq, variance)
    };
    Ok(FieldAverages {
        xi_lo: lo,
        xi_hi: hi,
        mean_a1,
        mean_a2,
        mean_asq,
        variance,
        k0_eff: effective_mass(k.k0, k.coupling(), variance),
    })
}

/// `K^2(xi) = k^2 + k0^2 + 2 g (A . k) + g^2 A^2` with `g = e / hbar c`.
pub fn big_k_squared(spec: &PotentialSpec, k1: f64, k2: f64, xi: f64, k: &PhysicalConstants) -> f64 {
    let g = k.coupling();
    let (a1, a2) = spec.eval(xi);
    k1 * k1 + k2 * k2 + k.k0 * k.k0 + 2.0 * g * (a1 * k1 + a2 * k2) + g * g * (a1 * a1 + a2 * a2)
}

/// `f(xi) = int_0^xi K^2`.
pub fn f_accumulate(spec: &PotentialSpec, k1: f64, k2: f64, xi: f64, k: &PhysicalConstants) -> Result<f64> {
    if !(xi.is_finite() && k1.is_finite() && k2.is_finite()) {
        return Err(Error::domain("f_accumulate", "non-finite input"));
    }
    if xi == 0.0 {
        return Ok(0.0);
    }
    let g = k.coupling();
    let (lo, hi, sign) = if xi > 0.0 { (0.0, xi, 1.0) } else { (xi, 0.0, -1.0) };
    let (i1, i2, isq) = spec.integrals(lo, hi, DEFAULT_AVERAGE_TOL)?;
    let free = (k1 * k1 + k2 * k2 + k.k0 * k.k0) * (hi - lo);
    Ok(sign * (free + 2.0 * g * (k1 * i1 + k2 * i2) + g * g * isq))
}

/// Accumulated transverse phase `exp(-i g [(x1' - x1'') <A1> + (x2' - x2'') <A2>])`,
/// averages taken over `[xi'', xi']`.
pub fn phase_factor(
    spec: &PotentialSpec,
    p_out: &SpacetimePoint,
    p_in: &SpacetimePoint,
    k: &PhysicalConstants,
) -> Result<Complex64> {
    let g = k.coupling();
    if g == 0.0 || matches!(spec, PotentialSpec::Zero) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let (xi_out, _) = to_lightcone(p_out, k);
    let (xi_in, _) = to_lightcone(p_in, k);
    let avg = average_over(spec, xi_in, xi_out, k)?;
    Ok(phase_from_averages(&avg, p_out, p_in, g))
}

pub(crate) fn phase_from_averages(
    avg: &FieldAverages,
    p_out: &SpacetimePoint,
    p_in: &SpacetimePoint,
    coupling: f64,
) -> Complex64 {
    let arg = -coupling * ((p_out.x1 - p_in.x1) * avg.mean_a1 + (p_out.x2 - p_in.x2) * avg.mean_a2);
    let (s, c) = arg.sin_cos();
    Complex64::new(c, s)
}
