//! Numerical oracles.
//!
//! * [`integrate_adaptive`]: globally adaptive Gauss-Kronrod (7/15).
//! * [`integrate_bessel_tail`]: semi-infinite oscillatory integrals, summed
//!   between consecutive kernel zeros and accelerated by iterated averaging
//!   of the partial sums.
//! * Closed-form checks built on the two: the Sonin discontinuous integral,
//!   the Hankel-type integrals for the characteristic-representation
//!   propagators, the MacDonald superposition and the regularized proper-time
//!   integral.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special_functions::{
    bessel_j0, bessel_jn, bessel_jn_zero, bessel_k0, bessel_k1,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Set when the result is usable but the caller should be wary of it.
    pub warning: Option<&'static str>,
}

impl QuadratureResult {
    /// Real part of the value; most oracles are real-valued.
    pub fn re(&self) -> f64 {
        self.value.re
    }

    fn real(value: f64, abs_error_estimate: f64, evaluations: usize, converged: bool) -> Self {
        Self {
            value: Complex64::new(value, 0.0),
            abs_error_estimate,
            evaluations,
            converged,
            warning: None,
        }
    }
}

/// Values that can be integrated: `f64` and `Complex64`.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(self) -> f64;
    fn to_complex(self) -> Complex64;
}

impl QuadValue for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl QuadValue for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

// ---------------------------------------------------------------------------
// Gauss-Kronrod 7/15

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One GK15 panel: `(kronrod, |kronrod - gauss|)`.
fn gk15<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * WGK[i];
        if i % 2 == 1 {
            gauss = gauss + pair * WG[i / 2];
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    (kronrod, (kronrod - gauss).magnitude())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl AdaptiveOptions {
    pub fn absolute(tol: f64) -> Self {
        Self {
            abs_tol: tol,
            rel_tol: 0.0,
            ..Self::default()
        }
    }

    pub fn relative(tol: f64) -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: tol,
            ..Self::default()
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value)
    }
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Raw adaptive driver, generic over real and complex integrands.
/// Returns `(value, error_estimate, evaluations, converged)`.
pub fn adaptive<T: QuadValue>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    opts: &AdaptiveOptions,
) -> (T, f64, usize, bool) {
    if a == b {
        return (T::default(), 0.0, 0, true);
    }
    if a > b {
        let (v, e, n, ok) = adaptive(f, b, a, opts);
        return (v * -1.0, e, n, ok);
    }
    let (v0, e0) = gk15(&f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value: v0,
        error: e0,
    });
    let mut total = v0;
    let mut total_err = e0;
    let mut splits = 0;
    while total_err > opts.target(total.magnitude()) {
        if splits >= opts.max_subdivisions {
            return (total, total_err, evaluations, false);
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval can no longer be split in floating point
            heap.push(worst);
            return (total, total_err, evaluations, false);
        }
        let (vl, el) = gk15(&f, worst.a, mid);
        let (vr, er) = gk15(&f, mid, worst.b);
        evaluations += 30;
        splits += 1;
        total = total - worst.value + vl + vr;
        total_err += el + er - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: vl,
            error: el,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: vr,
            error: er,
        });
        // refresh the running sums from time to time to shed accumulated rounding
        if splits % 64 == 0 {
            total = heap.iter().fold(T::default(), |acc, s| acc + s.value);
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let total = heap.iter().fold(T::default(), |acc, s| acc + s.value);
    let total_err: f64 = heap.iter().map(|s| s.error).sum();
    let converged = total_err <= opts.target(total.magnitude());
    (total, total_err, evaluations, converged)
}

/// Adaptive quadrature of a real integrand to absolute tolerance `tol`.
pub fn integrate_adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> QuadratureResult {
    integrate_adaptive_with(f, a, b, &AdaptiveOptions::absolute(tol))
}

pub fn integrate_adaptive_with<T: QuadValue>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    opts: &AdaptiveOptions,
) -> QuadratureResult {
    let (v, e, n, ok) = adaptive(f, a, b, opts);
    QuadratureResult {
        value: v.to_complex(),
        abs_error_estimate: e,
        evaluations: n,
        converged: ok,
        warning: None,
    }
}

/// Complex-valued counterpart of [`integrate_adaptive`].
pub fn integrate_adaptive_complex(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
) -> QuadratureResult {
    integrate_adaptive_with(f, a, b, &AdaptiveOptions::absolute(tol))
}

// ---------------------------------------------------------------------------
// Oscillatory tails

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailOptions {
    /// Target for the change of the accelerated estimate.
    pub tol: f64,
    /// Give up after this many zero intervals.
    pub max_intervals: usize,
    /// Never stop before this many intervals.
    pub min_intervals: usize,
    /// Relative accuracy of the integral over each zero interval.
    pub inner_rel_tol: f64,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_intervals: 200,
            min_intervals: 8,
            inner_rel_tol: 1e-14,
        }
    }
}

impl TailOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Partial sums and their accelerated counterparts, index-aligned.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TailTrace {
    pub partial_sums: Vec<f64>,
    pub accelerated: Vec<f64>,
}

/// Repeated pairwise averaging of the whole sequence, down to one value.
pub fn iterated_average(seq: &[f64]) -> f64 {
    let mut work = seq.to_vec();
    while work.len() > 1 {
        for i in 0..work.len() - 1 {
            work[i] = 0.5 * (work[i] + work[i + 1]);
        }
        work.pop();
    }
    work.first().copied().unwrap_or(0.0)
}

/// `int_a^inf f`, integrating between consecutive `kernel_zeros` and
/// accelerating the partial sums by iterated averaging.
pub fn integrate_bessel_tail(
    f: impl Fn(f64) -> f64,
    a: f64,
    kernel_zeros: impl IntoIterator<Item = f64>,
    opts: &TailOptions,
) -> QuadratureResult {
    integrate_bessel_tail_traced(f, a, kernel_zeros, opts).0
}

/// [`integrate_bessel_tail`] that also returns the raw and accelerated
/// sequences.
pub fn integrate_bessel_tail_traced(
    f: impl Fn(f64) -> f64,
    a: f64,
    kernel_zeros: impl IntoIterator<Item = f64>,
    opts: &TailOptions,
) -> (QuadratureResult, TailTrace) {
    let inner = AdaptiveOptions {
        abs_tol: opts.tol * 1e-3,
        rel_tol: opts.inner_rel_tol,
        max_subdivisions: 200,
    };
    let mut trace = TailTrace::default();
    let mut left = a;
    let mut sum = 0.0;
    let mut evaluations = 0;
    let mut inner_ok = true;
    let mut error = f64::INFINITY;
    let mut quiet_steps = 0;
    for zero in kernel_zeros.into_iter().filter(|&z| z > a) {
        if zero <= left {
            continue;
        }
        let (piece, _, n, ok) = adaptive(&f, left, zero, &inner);
        evaluations += n;
        inner_ok &= ok;
        sum += piece;
        left = zero;
        trace.partial_sums.push(sum);
        let estimate = iterated_average(&trace.partial_sums);
        if let Some(&prev) = trace.accelerated.last() {
            let step: f64 = estimate - prev;
            error = step.abs();
            if error <= opts.tol {
                quiet_steps += 1;
            } else {
                quiet_steps = 0;
            }
        }
        trace.accelerated.push(estimate);
        let n_intervals = trace.partial_sums.len();
        if n_intervals >= opts.min_intervals && quiet_steps >= 3 {
            break;
        }
        if n_intervals >= opts.max_intervals {
            break;
        }
    }
    let value = trace.accelerated.last().copied().unwrap_or(0.0);
    let converged = inner_ok && error <= opts.tol && quiet_steps >= 1;
    (QuadratureResult::real(value, error, evaluations, converged), trace)
}

/// Ascending positive zeros of `J_n`, lazily.
pub fn bessel_zeros(n: u32) -> impl Iterator<Item = f64> {
    (1u32..).map(move |s| bessel_jn_zero(n, s))
}

// ---------------------------------------------------------------------------
// Sonin discontinuous integral

/// Right-hand side of the Sonin discontinuous integral,
/// `theta(tau - x) x^n / tau^m (lambda/k0)^(m-n-1) J_(m-n-1)(k0 lambda)`,
/// with `lambda = sqrt(tau^2 - x^2)`. For `m = n + 1` the `k0` factor drops
/// out; otherwise `k0 = 0` uses the small-argument limit of `J`.
pub fn sonin_closed_form(tau: f64, x_perp: f64, k0: f64, m: u32, n: u32) -> Result<f64> {
    check_sonin_args(tau, x_perp, k0, m, n)?;
    if tau <= x_perp {
        return Ok(0.0);
    }
    let lambda = (tau * tau - x_perp * x_perp).sqrt();
    let nu = m - n - 1;
    let prefactor = x_perp.powi(n as i32) / tau.powi(m as i32);
    let bessel_part = if nu == 0 {
        bessel_j0(k0 * lambda)
    } else if k0 == 0.0 {
        // (lambda/k0)^nu J_nu(k0 lambda) -> (lambda^2/2)^nu / nu!
        let mut v = 1.0;
        for j in 1..=nu {
            v *= 0.5 * lambda * lambda / f64::from(j);
        }
        v
    } else {
        (lambda / k0).powi(nu as i32) * bessel_jn(nu, k0 * lambda)
    };
    Ok(prefactor * bessel_part)
}

fn check_sonin_args(tau: f64, x_perp: f64, k0: f64, m: u32, n: u32) -> Result<()> {
    if m <= n {
        return Err(Error::domain("sonin", format!("need m > n, got m={m}, n={n}")));
    }
    let finite = tau.is_finite() && x_perp.is_finite() && k0.is_finite();
    if !finite || tau <= 0.0 || x_perp <= 0.0 || k0 < 0.0 {
        return Err(Error::domain(
            "sonin",
            format!("need tau > 0, x_perp > 0, k0 >= 0; got tau={tau}, x_perp={x_perp}, k0={k0}"),
        ));
    }
    Ok(())
}

/// Numerical Sonin integral
/// `int_0^inf k^(n+1) J_m(tau sqrt(k^2+k0^2)) / (k^2+k0^2)^(m/2) J_n(k x) dk`.
///
/// The break points are the zeros of whichever kernel oscillates faster, so
/// both beat frequencies of the product advance by `pi (1 +- r)` per interval.
pub fn sonin_numeric(
    tau: f64,
    x_perp: f64,
    k0: f64,
    m: u32,
    n: u32,
    tol: f64,
) -> Result<QuadratureResult> {
    check_sonin_args(tau, x_perp, k0, m, n)?;
    let integrand = move |k: f64| {
        let s2 = k * k + k0 * k0;
        let s = s2.sqrt();
        let radial = if m == 0 { 1.0 } else { s.powi(m as i32) };
        k.powi(n as i32 + 1) * bessel_jn(m, tau * s) / radial * bessel_jn(n, k * x_perp)
    };
    let opts = TailOptions {
        tol,
        ..TailOptions::default()
    };
    let result = if tau >= x_perp {
        let k0_tau = k0 * tau;
        let zeros = bessel_zeros(m)
            .filter(move |&j| j > k0_tau)
            .map(move |j| ((j / tau).powi(2) - k0 * k0).sqrt());
        integrate_bessel_tail(integrand, 0.0, zeros, &opts)
    } else {
        let zeros = bessel_zeros(n).map(move |j| j / x_perp);
        integrate_bessel_tail(integrand, 0.0, zeros, &opts)
    };
    Ok(result)
}

// ---------------------------------------------------------------------------
// Characteristic-representation propagators

/// Relative central-difference step for the order-raising route.
pub const PSI_PLUS_FD_REL_STEP: f64 = 1e-4;

/// Smooth part of the fundamental solution in the timelike 2-D region,
/// obtained the long way round: the m = 1 Sonin integral is evaluated
/// numerically and `(1/tau) d/dtau [tau * ...] / (2 pi)` is applied by
/// central differences.
pub fn psi_plus_numeric(tau: f64, x_perp: f64, k0: f64, tol: f64) -> Result<QuadratureResult> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::domain("psi_plus_numeric", format!("need tau > 0, got {tau}")));
    }
    if tau == x_perp {
        return Err(Error::ConeSingularity {
            what: "psi_plus_numeric",
        });
    }
    let h = PSI_PLUS_FD_REL_STEP * tau;
    // The difference quotient amplifies quadrature noise by ~tau/h.
    let inner_tol = (tol * h / tau * 0.1).max(1e-15);
    let lo = sonin_numeric(tau - h, x_perp, k0, 1, 0, inner_tol)?;
    let hi = sonin_numeric(tau + h, x_perp, k0, 1, 0, inner_tol)?;
    let derivative = ((tau + h) * hi.re() - (tau - h) * lo.re()) / (2.0 * h);
    let value = derivative / (TAU * tau);
    let noise = (hi.abs_error_estimate + lo.abs_error_estimate) * (tau + h) / (2.0 * h) / (TAU * tau);
    let mut result = QuadratureResult::real(
        value,
        noise,
        lo.evaluations + hi.evaluations,
        lo.converged && hi.converged,
    );
    if (tau - x_perp).abs() < 10.0 * h {
        result.warning = Some("evaluation point within ten difference steps of the cone");
    }
    Ok(result)
}

/// `int_(k0)^inf J0(sqrt(rho^2 (k^2 - k0^2))) K0(k x) k dk / (2 pi)`, with
/// `rho = sqrt(lam_tilde^2 - x_perp^2)` the 2-D interval, after `u^2 = k^2 - k0^2`.
pub fn psi_minus_numeric(lam_tilde: f64, x_perp: f64, k0: f64, tol: f64) -> Result<QuadratureResult> {
    let finite = lam_tilde.is_finite() && x_perp.is_finite() && k0.is_finite();
    if !finite || lam_tilde <= 0.0 || x_perp <= 0.0 || x_perp > lam_tilde || k0 < 0.0 {
        return Err(Error::domain(
            "psi_minus_numeric",
            format!(
                "need 0 < x_perp <= lam_tilde and k0 >= 0; got lam_tilde={lam_tilde}, x_perp={x_perp}, k0={k0}"
            ),
        ));
    }
    let rho = ((lam_tilde - x_perp) * (lam_tilde + x_perp)).sqrt();
    let integrand = move |u: f64| {
        let k = (u * u + k0 * k0).sqrt();
        bessel_j0(rho * u) * bessel_k0(k * x_perp) * u
    };
    // Past u_max the MacDonald factor is down by exp(-50) relative to its start.
    let reach = 50.0 / x_perp + k0;
    let u_max = (reach * reach - k0 * k0).sqrt();
    let panel = if rho > 0.0 { (PI / rho).min(u_max) } else { u_max };
    let opts = AdaptiveOptions {
        abs_tol: 0.0,
        rel_tol: tol * 0.1,
        max_subdivisions: 200,
    };
    let mut total = 0.0;
    let mut err = 0.0;
    let mut evals = 0;
    let mut ok = true;
    let mut left = 0.0;
    while left < u_max {
        let right = (left + panel).min(u_max);
        let (v, e, n, c) = adaptive(integrand, left, right, &opts);
        total += v;
        err += e;
        evals += n;
        ok &= c;
        left = right;
    }
    let value = total / TAU;
    let err = err / TAU;
    let converged = ok || err <= tol * value.abs();
    Ok(QuadratureResult::real(value, err, evals, converged))
}

/// `k0 K1(k0 x) / x`, the antiderivative route for the MacDonald
/// superposition; `1/x^2` at `k0 = 0`.
pub fn macdonald_closed_form(x_perp: f64, k0: f64) -> f64 {
    if k0 == 0.0 {
        1.0 / (x_perp * x_perp)
    } else {
        k0 * bessel_k1(k0 * x_perp) / x_perp
    }
}

/// `int_(k0)^inf K0(k x) k dk`.
pub fn macdonald_superposition(x_perp: f64, k0: f64, tol: f64) -> Result<QuadratureResult> {
    if !(x_perp > 0.0 && x_perp.is_finite() && k0 >= 0.0 && k0.is_finite()) {
        return Err(Error::domain(
            "macdonald_superposition",
            format!("need x_perp > 0, k0 >= 0; got x_perp={x_perp}, k0={k0}"),
        ));
    }
    let upper = k0 + 50.0 / x_perp;
    let opts = AdaptiveOptions {
        abs_tol: 0.0,
        rel_tol: tol,
        max_subdivisions: 500,
    };
    Ok(integrate_adaptive_with(
        move |k: f64| if k == 0.0 { 0.0 } else { bessel_k0(k * x_perp) * k },
        k0,
        upper,
        &opts,
    ))
}

// ---------------------------------------------------------------------------
// Proper-time integral

/// Decreasing regulator sequence used by [`proper_time_numeric`].
pub const PROPER_TIME_LEVELS: usize = 5;

/// `int_0^inf exp(-i m^2/(4 alpha) - i sigma alpha) d alpha` with both
/// exponents given a Feynman damping of relative size `epsilon`:
/// `m^2 -> m^2 (1 - i eps)`, `sigma -> sigma - i eps |sigma|`.
pub fn proper_time_regularized(mass: f64, sigma: f64, epsilon: f64) -> Complex64 {
    let a = 0.25 * mass * mass;
    let abs_sigma = sigma.abs();
    let mass_phase = Complex64::new(-epsilon * a, -a); // -i a (1 - i eps)
    let sigma_phase = Complex64::new(-epsilon * abs_sigma, -sigma); // -i (sigma - i eps |sigma|)

    if a == 0.0 {
        // int_0^inf exp(sigma_phase alpha) d alpha
        return -1.0 / sigma_phase;
    }
    let split = (a / abs_sigma).sqrt();

    // alpha in [0, split], as u = 1/alpha in [1/split, inf): panels of one mass period
    let mut small = Complex64::new(0.0, 0.0);
    {
        let g = |u: f64| (mass_phase * u + sigma_phase / u).exp() / (u * u);
        let width = TAU / a;
        let u_end = 1.0 / split + 40.0 / (epsilon * a);
        let mut u = 1.0 / split;
        while u < u_end {
            let (v, _) = gk15(&g, u, u + width);
            small += v;
            u += width;
        }
    }

    // alpha in [split, inf): panels of one interval period
    let mut large = Complex64::new(0.0, 0.0);
    {
        let g = |alpha: f64| (mass_phase / alpha + sigma_phase * alpha).exp();
        let width = TAU / abs_sigma;
        let alpha_end = split + 40.0 / (epsilon * abs_sigma);
        let mut alpha = split;
        while alpha < alpha_end {
            let (v, _) = gk15(&g, alpha, alpha + width);
            large += v;
            alpha += width;
        }
    }
    small + large
}

/// Proper-time integral at regulator `epsilon`, `epsilon/2`, ... extrapolated
/// to zero regulator (Neville on a polynomial in `epsilon`).
///
/// `lambda_sq` is the signed interval `c^2 t^2 - r^2`; the integral's
/// interval parameter is `sigma = lambda_sq`.
pub fn proper_time_numeric(
    k0_eff: f64,
    lambda_sq: f64,
    epsilon: f64,
    tol: f64,
) -> Result<QuadratureResult> {
    if !(epsilon > 0.0 && epsilon <= 0.1) {
        return Err(Error::domain(
            "proper_time_numeric",
            format!("epsilon must lie in (0, 0.1], got {epsilon}"),
        ));
    }
    if lambda_sq == 0.0 || !lambda_sq.is_finite() || !(k0_eff >= 0.0 && k0_eff.is_finite()) {
        return Err(Error::domain(
            "proper_time_numeric",
            format!("need lambda_sq != 0 and k0_eff >= 0; got {lambda_sq}, {k0_eff}"),
        ));
    }
    let eps: Vec<f64> = (0..PROPER_TIME_LEVELS)
        .map(|j| epsilon / f64::from(1u32 << j))
        .collect();
    let values: Vec<Complex64> = eps
        .iter()
        .map(|&e| proper_time_regularized(k0_eff, lambda_sq, e))
        .collect();

    // Neville tableau at epsilon = 0; keep the diagonal to judge contraction.
    let mut table = values.clone();
    let mut diagonal = vec![table[0]];
    for level in 1..eps.len() {
        for i in (level..eps.len()).rev() {
            let (ei, ej) = (eps[i], eps[i - level]);
            table[i] = (table[i] * ej - table[i - 1] * ei) / (ej - ei);
        }
        diagonal.push(table[level]);
    }
    let n = diagonal.len();
    let last_step = (diagonal[n - 1] - diagonal[n - 2]).norm();
    let prev_step = (diagonal[n - 2] - diagonal[n - 3]).norm();
    let contracting = last_step <= prev_step;
    let value = diagonal[n - 1];
    let converged = contracting && last_step <= tol * value.norm().max(f64::MIN_POSITIVE);
    Ok(QuadratureResult {
        value,
        abs_error_estimate: last_step,
        evaluations: PROPER_TIME_LEVELS,
        converged,
        warning: (!contracting).then_some("regulator extrapolation is not contracting"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_functions::{bessel_j1, bessel_y1};

    #[test]
    fn polynomial_and_trig_anchors() {
        let r = integrate_adaptive(|x| x, 0.0, 1.0, 1e-14);
        assert!(r.converged);
        assert!((r.re() - 0.5).abs() < 1e-15);
        let r = integrate_adaptive(f64::sin, 0.0, PI, 1e-13);
        assert!((r.re() - 2.0).abs() < 1e-13);
        // Kronrod node set is exact to degree 22
        let r = integrate_adaptive(|x| x.powi(22), 0.0, 1.0, 1e-14);
        assert!((r.re() - 1.0 / 23.0).abs() < 1e-15);
    }

    #[test]
    fn reversed_and_empty_ranges() {
        let r = integrate_adaptive(|x| x * x, 1.0, 0.0, 1e-14);
        assert!((r.re() + 1.0 / 3.0).abs() < 1e-15);
        let r = integrate_adaptive(|x| x, 2.0, 2.0, 1e-14);
        assert_eq!(r.re(), 0.0);
        assert!(r.converged);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = AdaptiveOptions {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            max_subdivisions: 3,
        };
        let r = integrate_adaptive_with(|x: f64| (1.0 / x).sin(), 1e-4, 1.0, &opts);
        assert!(!r.converged);
        assert!(r.abs_error_estimate > 1e-15);
    }

    #[test]
    fn complex_integrand() {
        let r = integrate_adaptive_complex(|x| Complex64::new(0.0, x).exp(), 0.0, PI, 1e-13);
        // int_0^pi e^{ix} dx = 2i
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn weber_integrals() {
        for order in [0u32, 1] {
            let r = integrate_bessel_tail(
                move |k| bessel_jn(order, k),
                0.0,
                bessel_zeros(order),
                &TailOptions::with_tol(1e-12),
            );
            assert!(r.converged, "order {order}: {r:?}");
            assert!((r.re() - 1.0).abs() < 1e-11, "order {order}: {}", r.re());
        }
    }

    #[test]
    fn acceleration_beats_raw_partial_sums() {
        let (_, trace) = integrate_bessel_tail_traced(
            bessel_j0,
            0.0,
            bessel_zeros(0),
            &TailOptions {
                tol: 0.0,
                max_intervals: 60,
                min_intervals: 60,
                inner_rel_tol: 1e-15,
            },
        );
        assert_eq!(trace.partial_sums.len(), 60);
        for (depth, (raw, acc)) in trace
            .partial_sums
            .iter()
            .zip(&trace.accelerated)
            .enumerate()
        {
            let raw_err = (raw - 1.0).abs();
            let acc_err = (acc - 1.0).abs();
            assert!(acc_err <= raw_err, "depth {depth}: {acc_err} > {raw_err}");
        }
    }

    #[test]
    fn bessel_tail_budget_exhaustion() {
        let r = integrate_bessel_tail(
            bessel_j0,
            0.0,
            bessel_zeros(0),
            &TailOptions {
                tol: 1e-30,
                max_intervals: 10,
                min_intervals: 2,
                inner_rel_tol: 1e-14,
            },
        );
        assert!(!r.converged);
    }

    #[test]
    fn sonin_m1_n0_reference_point() {
        let r = sonin_numeric(2.0, 1.0, 1.0, 1, 0, 1e-12).unwrap();
        let expected = bessel_j0(3f64.sqrt()) / 2.0;
        assert!(r.converged);
        assert!(((r.re() - expected) / expected).abs() < 1e-6, "{} vs {expected}", r.re());
        assert_eq!(sonin_closed_form(2.0, 1.0, 1.0, 1, 0).unwrap(), expected);
    }

    #[test]
    fn sonin_vanishes_outside() {
        let r = sonin_numeric(0.5, 1.0, 1.0, 1, 0, 1e-10).unwrap();
        assert!(r.re().abs() < 1e-6, "{}", r.re());
    }

    #[test]
    fn sonin_massless_limit() {
        let r = sonin_numeric(2.0, 1.0, 0.0, 1, 0, 1e-12).unwrap();
        assert!((r.re() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn sonin_higher_order_uses_k0_prefactor() {
        // (m, n) = (2, 0): prefactor (lambda / k0), not (lambda / x_perp)
        let (tau, x, k0) = (2.0, 1.0, 0.7);
        let numeric = sonin_numeric(tau, x, k0, 2, 0, 1e-12).unwrap().re();
        let closed = sonin_closed_form(tau, x, k0, 2, 0).unwrap();
        assert!(((numeric - closed) / closed).abs() < 1e-7, "{numeric} vs {closed}");
    }

    #[test]
    fn sonin_argument_checks() {
        assert!(sonin_numeric(2.0, 1.0, 1.0, 0, 0, 1e-8).is_err());
        assert!(sonin_numeric(-2.0, 1.0, 1.0, 1, 0, 1e-8).is_err());
        assert!(sonin_closed_form(2.0, 0.0, 1.0, 1, 0).is_err());
    }

    #[test]
    fn psi_plus_numeric_reference_point() {
        let r = psi_plus_numeric(2.0, 1.0, 1.0, 1e-7).unwrap();
        let lambda = 3f64.sqrt();
        let expected = -(1.0 / TAU) * bessel_j1(lambda) / lambda;
        assert!(((r.re() - expected) / expected).abs() < 1e-5, "{} vs {expected}", r.re());
        assert!(r.warning.is_none());
    }

    #[test]
    fn psi_plus_numeric_outside_and_massless() {
        let r = psi_plus_numeric(0.5, 1.0, 1.0, 1e-7).unwrap();
        assert!(r.re().abs() < 1e-5);
        let r = psi_plus_numeric(2.0, 1.0, 1e-6, 1e-7).unwrap();
        assert!(r.re().abs() < 1e-5);
        let r = psi_plus_numeric(1.0 + 1e-4, 1.0, 1.0, 1e-7).unwrap();
        assert!(r.warning.is_some());
        assert!(psi_plus_numeric(1.0, 1.0, 1.0, 1e-7).is_err());
    }

    #[test]
    fn psi_minus_numeric_on_two_d_cone() {
        // x_perp = lam_tilde: the J0 factor is identically one
        let r = psi_minus_numeric(1.0, 1.0, 1.0, 1e-10).unwrap();
        let expected = bessel_k1(1.0) / TAU;
        assert!(((r.re() - expected) / expected).abs() < 1e-8);
    }

    #[test]
    fn psi_minus_numeric_off_cone_is_positive() {
        let r = psi_minus_numeric(1.5, 0.8, 1.3, 1e-10).unwrap();
        let expected = 1.3 * bessel_k1(1.3 * 1.5) / (TAU * 1.5);
        assert!(r.re() > 0.0);
        assert!(((r.re() - expected) / expected).abs() < 1e-6, "{} vs {expected}", r.re());
    }

    #[test]
    fn macdonald_examples() {
        let r = macdonald_superposition(1.0, 1.0, 1e-12).unwrap();
        assert!((r.re() - bessel_k1(1.0)).abs() < 1e-10);
        let r = macdonald_superposition(1.5, 0.0, 1e-12).unwrap();
        assert!((r.re() - 1.0 / 2.25).abs() < 1e-9);
        // result(c k0, x/c) = c^2 result(k0, x)
        let base = macdonald_superposition(1.2, 0.8, 1e-12).unwrap().re();
        let scaled = macdonald_superposition(0.6, 1.6, 1e-12).unwrap().re();
        assert!((scaled / 4.0 - base).abs() < 1e-10 * base);
    }

    #[test]
    fn proper_time_timelike_hankel_structure() {
        let (m, lambda_sq) = (1.3f64, 2.0f64);
        let lambda = lambda_sq.sqrt();
        let r = proper_time_numeric(m, lambda_sq, 0.01, 1e-6).unwrap();
        let x = m * lambda;
        let expected = Complex64::new(-bessel_j1(x), bessel_y1(x)) * (PI * m / (2.0 * lambda));
        assert!((r.value - expected).norm() < 1e-5 * expected.norm(), "{} vs {expected}", r.value);
    }

    #[test]
    fn proper_time_spacelike_macdonald_structure() {
        let (m, lambda_sq) = (1.3f64, -1.5f64);
        let lt = (-lambda_sq).sqrt();
        let r = proper_time_numeric(m, lambda_sq, 0.01, 1e-6).unwrap();
        let expected = Complex64::new(0.0, m * bessel_k1(m * lt) / lt);
        assert!((r.value - expected).norm() < 1e-5 * expected.norm(), "{} vs {expected}", r.value);
    }

    #[test]
    fn proper_time_scaling_covariance() {
        let c = 2.0;
        let base = proper_time_regularized(0.9, 1.7, 0.01);
        let scaled = proper_time_regularized(c * 0.9, 1.7 / (c * c), 0.01);
        assert!((scaled - base * (c * c)).norm() < 1e-8 * scaled.norm());
    }

    #[test]
    fn proper_time_argument_checks() {
        assert!(proper_time_numeric(1.0, 1.0, 0.0, 1e-6).is_err());
        assert!(proper_time_numeric(1.0, 1.0, 0.2, 1e-6).is_err());
        assert!(proper_time_numeric(1.0, 0.0, 0.01, 1e-6).is_err());
    }
}
