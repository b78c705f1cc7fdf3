//! Verification suites. Each suite checks a closed form against an
//! independent numerical oracle and reports the worst error it saw next to
//! the tolerance it needs.
//!
//! Criteria that are not error bounds are expressed as one anyway: a
//! convergence ratio near 4 reports `|ratio - 4|` against `0.5`, a bitwise
//! comparison reports the number of mismatches against `0`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use volkov_core::goursat::{convergence_study, riemann_residual};
use volkov_core::potentials::{average_over, big_k_squared, f_accumulate, TabulatedPotential};
use volkov_core::propagators::{
    delta_1_free, delta_s_free, psi_minus, psi_plus, psi_plus_at, volkov_psi,
};
use volkov_core::quadrature::{
    macdonald_closed_form, macdonald_superposition, proper_time_numeric, psi_minus_numeric,
    psi_plus_numeric, sonin_closed_form, sonin_numeric,
};
use volkov_core::special_functions::order_raise_residual;
use volkov_core::{IntervalClassification, PhysicalConstants, PotentialSpec, SpacetimePoint};

use crate::config::VerifyConfig;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub name: String,
    /// What the suite checks.
    pub paper_ref: String,
    pub required_tol: f64,
    pub achieved: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub version: String,
    pub seed: u64,
    pub suites: Vec<SuiteEntry>,
    pub all_pass: bool,
}

/// A check before the pass decision is made.
struct Check {
    name: &'static str,
    what: &'static str,
    required: f64,
    achieved: f64,
    note: Option<String>,
}

impl Check {
    fn new(name: &'static str, what: &'static str, required: f64, achieved: f64) -> Self {
        Self {
            name,
            what,
            required,
            achieved,
            note: None,
        }
    }

    fn note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }
}

type Group = fn(u64) -> Result<Vec<Check>, volkov_core::Error>;

/// Suite groups in report order. `--suite <name>` selects one group.
const GROUPS: &[(&str, Group)] = &[
    ("sonin", sonin),
    ("psi_plus", psi_plus_suite),
    ("psi_minus", psi_minus_suite),
    ("macdonald", macdonald),
    ("order_raise", order_raise),
    ("riemann", riemann),
    ("goursat", goursat_suite),
    ("effective_mass", effective_mass),
    ("free_reduction", free_reduction),
    ("proper_time", proper_time),
];

pub fn group_names() -> Vec<&'static str> {
    GROUPS.iter().map(|g| g.0).collect()
}

/// Runs the selected groups; the report does not depend on scheduling.
pub fn run(cfg: &VerifyConfig, seed: u64) -> Result<VerifyReport, CliError> {
    for wanted in &cfg.suites {
        if !GROUPS.iter().any(|g| g.0 == wanted) {
            return Err(CliError::Config(format!(
                "unknown suite {wanted:?}; available: {}",
                group_names().join(", ")
            )));
        }
    }
    let selected: Vec<(usize, &(&str, Group))> = GROUPS
        .iter()
        .enumerate()
        .filter(|(_, g)| cfg.suites.is_empty() || cfg.suites.iter().any(|s| s == g.0))
        .collect();
    let results: Vec<Vec<Check>> = selected
        .par_iter()
        .map(|(i, (_, group))| group(seed.wrapping_add(*i as u64)))
        .collect::<Result<_, _>>()?;
    let suites: Vec<SuiteEntry> = results
        .into_iter()
        .flatten()
        .map(|c| {
            let required = cfg.required_tol.unwrap_or(c.required);
            SuiteEntry {
                name: c.name.to_string(),
                paper_ref: c.what.to_string(),
                required_tol: required,
                achieved: c.achieved,
                pass: c.achieved.is_finite() && c.achieved <= required,
                note: c.note,
            }
        })
        .collect();
    let all_pass = suites.iter().all(|s| s.pass);
    Ok(VerifyReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        suites,
        all_pass,
    })
}

/// Fixed-width table for humans.
pub fn format_table(report: &VerifyReport) -> String {
    let mut out = format!("{:<30} {:>12} {:>12}  result\n", "suite", "required", "achieved");
    for s in &report.suites {
        out.push_str(&format!(
            "{:<30} {:>12.3e} {:>12.3e}  {}\n",
            s.name,
            s.required_tol,
            s.achieved,
            if s.pass { "PASS" } else { "FAIL" }
        ));
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// ---------------------------------------------------------------------------

/// `(tau, x_perp, k0, m, n)`; the two kernel frequencies differ by at least
/// a factor 1.6 so the averaging converges quickly.
const SONIN_INSIDE: [(f64, f64, f64, u32, u32); 10] = [
    (2.0, 1.0, 1.0, 1, 0),
    (3.0, 1.0, 1.0, 1, 0),
    (2.5, 1.0, 0.5, 1, 0),
    (4.0, 2.0, 2.0, 1, 0),
    (2.2, 0.5, 1.0, 1, 0),
    (2.0, 1.0, 1.0, 2, 0),
    (3.0, 1.5, 0.7, 2, 1),
    (2.0, 0.8, 1.2, 2, 1),
    (5.0, 2.0, 0.3, 3, 1),
    (3.0, 1.0, 2.0, 3, 0),
];

const SONIN_OUTSIDE: [(f64, f64, f64, u32, u32); 5] = [
    (0.5, 1.0, 1.0, 1, 0),
    (0.3, 1.0, 2.0, 1, 0),
    (1.0, 2.0, 1.0, 2, 0),
    (1.2, 2.0, 0.5, 2, 1),
    (0.6, 1.5, 1.0, 1, 0),
];

fn sonin(_seed: u64) -> Result<Vec<Check>, volkov_core::Error> {
    let mut inside = 0.0f64;
    for &(tau, x, k0, m, n) in &SONIN_INSIDE {
        let exact = sonin_closed_form(tau, x, k0, m, n)?;
        let numeric = sonin_numeric(tau, x, k0, m, n, 1e-11)?;
        inside = inside.max(rel(numeric.re(), exact));
    }
    let mut outside = 0.0f64;
    for &(tau, x, k0, m, n) in &SONIN_OUTSIDE {
        let numeric = sonin_numeric(tau, x, k0, m, n, 1e-11)?;
        outside = outside.max(numeric.re().abs() / (1.0f64).max(1.0 / tau));
    }
    Ok(vec![
        Check::new("sonin.inside", "Sonin discontinuous integral, tau > x_perp", 1e-6, inside),
        Check::new("sonin.outside", "Sonin discontinuous integral, tau < x_perp", 1e-6, outside),
    ])
}

/// `(tau, x_perp, k0)` strictly inside the 2-D cone, away from zeros of `J1`.
const PSI_PLUS_POINTS: [(f64, f64, f64); 10] = [
    (2.0, 1.0, 1.0),
    (3.0, 1.0, 1.0),
    (2.5, 1.0, 0.5),
    (4.0, 2.0, 0.8),
    (2.2, 0.5, 1.0),
    (1.5, 0.6, 2.0),
    (5.0, 2.5, 0.4),
    (3.0, 1.5, 1.2),
    (2.0, 0.4, 0.3),
    (1.2, 0.5, 1.5),
];

fn psi_plus_suite(_seed: u64) -> Result<Vec<Check>, volkov_core::Error> {
    let mut worst = 0.0f64;
    for &(tau, x, k0) in &PSI_PLUS_POINTS {
        let closed = psi_plus(tau, x, k0)?.smooth.re;
        let numeric = psi_plus_numeric(tau, x, k0, 1e-8)?;
        worst = worst.max(rel(numeric.re(), closed));
    }
    Ok(vec![Check::new(
        "psi_plus.closed_form",
        "timelike 2-D solution: Hankel integral vs closed form",
        1e-5,
        worst,
    )])
}

/// `(lam_tilde, x_perp, k0)` with `x_perp <= lam_tilde`.
const PSI_MINUS_POINTS: [(f64, f64, f64); 10] = [
    (1.0, 0.6, 1.0),
    (1.0, 1.0, 1.0),
    (1.5, 0.8, 1.3),
    (2.0, 0.5, 0.5),
    (0.7, 0.3, 2.0),
    (3.0, 2.0, 0.2),
    (1.2, 0.9, 4.0),
    (2.5, 2.5, 0.8),
    (0.5, 0.4, 3.0),
    (1.0, 0.7, 20.0),
];

fn psi_minus_suite(_seed: u64) -> Result<Vec<Check>, volkov_core::Error> {
    let mut worst = 0.0f64;
    for &(lt, x, k0) in &PSI_MINUS_POINTS {
        let closed = psi_minus(lt, k0)?.smooth.re;
        let numeric = psi_minus_numeric(lt, x, k0, 1e-10)?;
        worst = worst.max(rel(numeric.re(), closed));
    }
    let mut massless = 0.0f64;
    for &(lt, x) in &[(1.0, 0.6), (2.0, 1.0), (0.8, 0.8)] {
        let limit = 1.0 / (TAU * lt * lt);
        let numeric = psi_minus_numeric(lt, x, 1e-6, 1e-10)?;
        massless = massless.max(rel(numeric.re(), limit));
    }
    Ok(vec![
        Check::new(
            "psi_minus.closed_form",
            "spacelike 2-D solution: MacDonald integral vs closed form",
            1e-6,
            worst,
        ),
        Check::new(
            "psi_minus.massless",
            "spacelike 2-D solution: massless limit 1/(2 pi lt^2)",
            1e-4,
            massless,
        ),
    ])
}

fn macdonald(_seed: u64) -> Result<Vec<Check>, volkov_core::Error> {
    let points = [
        (1.0, 1.0),
        (0.5, 1.0),
        (2.0, 0.5),
        (1.0, 0.1),
        (0.3, 3.0),
        (3.0, 2.0),
        (1.5, 0.0),
        (0.8, 5.0),
        (4.0, 0.25),
        (0.2, 0.7),
    ];
    let mut worst = 0.0f64;
    for &(x, k0) in &points {
        let numeric = macdonald_superposition(x, k0, 1e-12)?;
        worst = worst.max(rel(numeric.re(), macdonald_closed_form(x, k0)));
    }
    Ok(vec![Check::new(
        "macdonald.superposition",
        "superposition of MacDonald functions",
        1e-8,
        worst,
    )
    .note("matches k0 K1(k0 x)/x; the stated form carries an extra 1/(2 pi)".into())])
}

fn order_raise(seed: u64) -> Result<Vec<Check>, volkov_core::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-4;
    let (mut worst, mut at_h, mut at_half) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let tau = rng.random_range(0.5..5.0);
        let s = rng.random_range(0.2..2.0);
        let r = order_raise_residual(tau, s, h)?;
        worst = worst.max(r);
        at_h = at_h.max(r);
        at_half = at_half.max(order_raise_residual(tau, s, 0.5 * h)?);
    }
    let ratio = at_h / at_half;
    Ok(vec![
        Check::new("order_raise.residual", "order-raising identity, h = 1e-4", 1e-6, worst),
        Check::new(
            "order_raise.ratio",
            "order-raising identity, residual ratio under halving h",
            0.5,
            (ratio - 4.0).abs(),
        )
        .note(format!("max-norm ratio {ratio:.4}")),
    ])
}

/// Constant, linearly and circularly polarized coefficients.
fn ksq_families() -> Vec<(&'static str, PotentialSpec, PhysicalConstants, f64, f64)> {
    let k = PhysicalConstants::natural(0.8, 1.0);
    vec![
        ("constant", PotentialSpec::Constant { a1: 0.6, a2: -0.4 }, k, 0.3, -0.2),
        (
            "linear",
            PotentialSpec::LinearPolarized {
                a: 1.1,
                kappa: 1.7,
                phase: 0.3,
            },
            k,
            0.3,
            -0.2,
        ),
        (
            "circular",
            PotentialSpec::CircularPolarized {
                a: 0.9,
                kappa: 2.1,
                phase: 0.0,
            },
            k,
            0.3,
            -0.2,
        ),
    ]
}

fn riemann(seed: u64) -> Result<Vec<Check>, volkov_core::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let (mut coarse, mut fine) = (0.0f64, 0.0f64);
    for (label, spec, k, k1, k2) in ksq_families() {
        let ksq = |x: f64| big_k_squared(&spec, k1, k2, x, &k);
        let f = |x: f64| f_accumulate(&spec, k1, k2, x, &k).unwrap_or(f64::NAN);
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let xi = rng.random_range(0.2..3.0);
            let eta = rng.random_range(0.2..3.0);
            worst = worst.max(riemann_residual(ksq, f, xi, eta, 1e-3));
            coarse = coarse.max(riemann_residual(ksq, f, xi, eta, 2e-2));
            fine = fine.max(riemann_residual(ksq, f, xi, eta, 1e-2));
        }
        let name = match label {
            "constant" => "riemann.constant",
            "linear" => "riemann.linear",
            _ => "riemann.circular",
        };
        checks.push(Check::new(name, "Riemann function property of the telegraph operator", 1e-5, worst));
    }
    let ratio = coarse / fine;
    checks.push(
        Check::new(
            "riemann.ratio",
            "Riemann function property, residual ratio under halving h",
            0.5,
            (ratio - 4.0).abs(),
        )
        .note(format!("max-norm ratio {ratio:.4}")),
    );
    Ok(checks)
}

fn goursat_suite(_seed: u64) -> Result<Vec<Check>, volkov_core::Error> {
    let (xi_max, eta_max, coarsest, levels) = (2.0, 2.0, 32, 4);
    let mut checks = Vec::new();
    for (label, spec, k, k1, k2) in ksq_families() {
        let ksq = |x: f64| big_k_squared(&spec, k1, k2, x, &k);
        let rows = convergence_study(ksq, xi_max, eta_max, coarsest, levels)?;
        let orders: Vec<f64> = rows.iter().filter_map(|r| r.order).collect();
        let deviation = if orders.len() == levels as usize {
            orders.iter().map(|p| (p - 2.0).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        let name = match label {
            "constant" => "goursat.constant",
            "linear" => "goursat.linear",
            _ => "goursat.circular",
        };
        let listed: Vec<String> = orders.iter().map(|p| format!("{p:.3}")).collect();
        checks.push(
            Check::new(name, "characteristic-grid solver, empirical order minus 2", 0.2, deviation)
                .note(format!("orders {}", listed.join(", "))),
        );
    }
    let rows = convergence_study(|_| 0.0, xi_max, eta_max, coarsest, levels)?;
    let exact = rows.iter().map(|r| r.max_error).fold(0.0, f64::max);
    checks.push(Check::new(
        "goursat.zero",
        "characteristic-grid solver, K^2 = 0 reproduced exactly",
        0.0,
        exact,
    ));
    Ok(checks)
}

fn random_spec(rng: &mut ChaCha8Rng) -> PotentialSpec {
    match rng.random_range(0..6) {
        0 => PotentialSpec::Zero,
        1 => PotentialSpec::Constant {
            a1: rng.random_range(-3.0..3.0),
            a2: rng.random_range(-3.0..3.0),
        },
        2 => PotentialSpec::LinearPolarized {
            a: rng.random_range(0.0..3.0),
            kappa: rng.random_range(0.0..5.0),
            phase: rng.random_range(-PI..PI),
        },
        3 => PotentialSpec::CircularPolarized {
            a: rng.random_range(0.0..3.0),
            kappa: rng.random_range(0.0..5.0),
            phase: rng.random_range(-PI..PI),
        },
        4 => PotentialSpec::PulseEnvelope {
            a: rng.random_range(0.0..3.0),
            kappa: rng.random_range(0.0..5.0),
            width: rng.random_range(0.3..3.0),
        },
        _ => {
            let n = rng.random_range(4..40);
            let mut x = rng.random_range(-10.0..0.0);
            let samples: Vec<_> = (0..n)
                .map(|_| {
                    x += rng.random_range(0.05..1.0);
                    (x, rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
                })
                .collect();
            PotentialSpec::Tabulated(TabulatedPotential::new(&samples).expect("increasing samples"))
        }
    }
}

fn effective_mass(seed: u64) -> Result<Vec<Check>, volkov_core::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = PhysicalConstants::natural(1.0, 1.0);
    let mut min_variance = 0.0f64;
    let mut uncharged = 0.0f64;
    for _ in 0..1000 {
        let spec = random_spec(&mut rng);
        let lo = rng.random_range(-10.0..10.0);
        let len = rng.random_range(1e-6..20.0);
        let avg = average_over(&spec, lo, lo + len, &k)?;
        min_variance = min_variance.min(avg.variance);
        let k0 = rng.random_range(0.0..5.0);
        let bare = average_over(&spec, lo, lo + len, &PhysicalConstants::natural(0.0, k0))?;
        uncharged = uncharged.max((bare.k0_eff - k0).abs());
    }
    let mut circular = 0.0f64;
    for &(a, kappa, e, k0, c, hbar) in &[
        (0.9, 1.7, 0.6, 1.1, 1.5, 0.8),
        (2.0, 0.5, 1.0, 1.0, 1.0, 1.0),
        (0.1, 3.0, 2.0, 0.3, 2.0, 1.5),
    ] {
        let k = PhysicalConstants { c, hbar, e, k0 };
        let spec = PotentialSpec::CircularPolarized { a, kappa, phase: 0.4 };
        let avg = average_over(&spec, 1.0, 1.0 + TAU / kappa, &k)?;
        let expected = k0 * (1.0 + (e * a / (hbar * c * k0)).powi(2)).sqrt();
        circular = circular.max(rel(avg.k0_eff, expected));
    }
    Ok(vec![
        Check::new(
            "effective_mass.variance",
            "field variance over an interval is non-negative",
            1e-10,
            0.0 - min_variance,
        ),
        Check::new(
            "effective_mass.circular",
            "dressed mass for a full period of circular polarization",
            1e-10,
            circular,
        ),
        Check::new("effective_mass.uncharged", "zero charge keeps the bare mass", 0.0, uncharged),
    ])
}

fn free_reduction(seed: u64) -> Result<Vec<Check>, volkov_core::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = PhysicalConstants::natural(rng.random_range(0.1..2.0), 1.3);
    let mut mismatches = 0usize;
    let mut phase_off = 0usize;
    for i in 0..10 {
        for j in 0..10 {
            for l in 0..10 {
                let t = 0.25 + 0.4 * i as f64;
                let z = -2.0 + 0.45 * j as f64;
                let x_perp = 0.3 * l as f64;
                let angle = rng.random_range(0.0..TAU);
                let p = SpacetimePoint::new(t, x_perp * angle.cos(), x_perp * angle.sin(), z);
                let v = volkov_psi(&p, &PotentialSpec::Zero, &k)?;
                let free = psi_plus_at(&p, k.k0, &k)?;
                let same = v.smooth.re.to_bits() == free.smooth.re.to_bits()
                    && v.smooth.im.to_bits() == free.smooth.im.to_bits()
                    && v.delta_coeff.re.to_bits() == free.delta_coeff.re.to_bits()
                    && v.delta_coeff.im.to_bits() == free.delta_coeff.im.to_bits()
                    && v.region == free.region;
                mismatches += usize::from(!same);
                phase_off += usize::from(v.phase != Complex64::new(1.0, 0.0));
                // the 2-D closed form evaluated directly, not through the point helper
                let tau_sq = (t - z) * (t + z);
                if tau_sq >= 0.0 {
                    let direct = psi_plus(tau_sq.sqrt(), p.x_perp(), k.k0)?;
                    mismatches += usize::from(direct.smooth.re.to_bits() != v.smooth.re.to_bits());
                }
            }
        }
    }
    Ok(vec![
        Check::new(
            "free_reduction.bitwise",
            "Volkov solution with zero potential equals the free solution",
            0.0,
            mismatches as f64,
        ),
        Check::new("free_reduction.phase", "zero potential has unit phase", 0.0, phase_off as f64),
    ])
}

/// Regular parts of the free real and imaginary parts without their
/// prefactors: `-k0 J1(k0 l)/l` and `k0 N1(k0 l)/l` inside,
/// `(2/pi) k0 K1(k0 lt)/lt` outside.
fn proper_time_structures(k0: f64, lambda_sq: f64) -> Result<Complex64, volkov_core::Error> {
    let cls = IntervalClassification::from_squares(lambda_sq, lambda_sq, 0.0);
    let s = TAU * delta_s_free(&cls, k0).smooth.re;
    let d = 4.0 * PI * delta_1_free(&cls, k0)?.smooth.re;
    Ok(Complex64::new(s, d))
}

fn proper_time(_seed: u64) -> Result<Vec<Check>, volkov_core::Error> {
    // dressed mass from a full period of a circularly polarized wave
    let k = PhysicalConstants::natural(0.7, 1.0);
    let spec = PotentialSpec::CircularPolarized {
        a: 0.8,
        kappa: 1.0,
        phase: 0.0,
    };
    let k0_eff = average_over(&spec, 0.0, TAU, &k)?.k0_eff;
    let (eps, tol) = (0.01, 1e-6);
    let reference = 1.0;
    let i_ref = proper_time_numeric(k0_eff, reference, eps, tol)?.value;
    let constant = i_ref / proper_time_structures(k0_eff, reference)?;
    let points = [0.5, 2.0, 3.0, 4.5, -0.5, -1.0, -2.0, -3.0];
    let values: Vec<(f64, Complex64)> = points
        .par_iter()
        .map(|&l2| Ok((l2, proper_time_numeric(k0_eff, l2, eps, tol)?.value)))
        .collect::<Result<_, volkov_core::Error>>()?;
    let mut worst = 0.0f64;
    for (l2, value) in values {
        let predicted = constant * proper_time_structures(k0_eff, l2)?;
        worst = worst.max((value - predicted).norm() / value.norm());
    }
    // ratio of the constants multiplying the imaginary and the real part
    // when the free functions are taken with their own prefactors
    let ref_cls = IntervalClassification::from_squares(reference, reference, 0.0);
    let out_cls = IntervalClassification::from_squares(-1.0, -1.0, 0.0);
    let real_weight = i_ref.re / delta_s_free(&ref_cls, k0_eff).smooth.re;
    let imag_weight = proper_time_numeric(k0_eff, -1.0, eps, tol)?.value.im / delta_1_free(&out_cls, k0_eff)?.smooth.re;
    let im_ratio = imag_weight / real_weight;
    Ok(vec![Check::new(
        "proper_time.structures",
        "regularized proper-time integral vs free real/imaginary structures",
        1e-3,
        worst,
    )
    .note(format!(
        "constant {:.6}{:+.6}i (pi/2 = {:.6}); with the literal prefactors the imaginary part needs weight {:.4} relative to the real part",
        constant.re,
        constant.im,
        PI / 2.0,
        im_ratio
    ))])
}
