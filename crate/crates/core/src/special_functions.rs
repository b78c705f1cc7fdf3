//! Integer-order cylinder functions of real argument.
//!
//! Evaluation strategy by argument range:
//!
//! | kind        | small `x`          | middle                          | large `x`            |
//! |-------------|--------------------|---------------------------------|----------------------|
//! | `J0`, `J1`  | power series (≤ 4) | Miller backward recurrence (≤ 25) | Hankel asymptotics |
//! | `N1`        | power series (≤ 4) | Neumann series on the Miller sequence (≤ 25) | Hankel asymptotics |
//! | `K0`, `K1`  | power series (≤ 2) | Steed continued fraction        | same                 |
//!
//! The cutoffs are where the cheaper method's truncation/cancellation error
//! drops under a few ulps. Everything is pure and reentrant.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_CUTOFF_J: f64 = 4.0;
const ASYMPTOTIC_CUTOFF_J: f64 = 25.0;
const SERIES_CUTOFF_K: f64 = 2.0;
const J1_RATIO_CUTOFF: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CylinderKind {
    J0,
    J1,
    /// Bessel function of the second kind, order one (`Y1`).
    N1,
    /// MacDonald function, order zero.
    K0,
    /// MacDonald function, order one.
    K1,
}

impl CylinderKind {
    pub const ALL: [CylinderKind; 5] = [
        CylinderKind::J0,
        CylinderKind::J1,
        CylinderKind::N1,
        CylinderKind::K0,
        CylinderKind::K1,
    ];

    /// Whether the function is only defined for `x > 0`.
    pub fn needs_positive_argument(self) -> bool {
        matches!(self, CylinderKind::N1 | CylinderKind::K0 | CylinderKind::K1)
    }
}

/// Checked evaluation of a cylinder function.
pub fn cyl(kind: CylinderKind, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("cyl", format!("non-finite argument {x}")));
    }
    if kind.needs_positive_argument() {
        if x <= 0.0 {
            return Err(Error::domain(
                "cyl",
                format!("{kind:?} requires x > 0, got {x}"),
            ));
        }
    } else if x < 0.0 {
        return Err(Error::domain(
            "cyl",
            format!("{kind:?} requires x >= 0, got {x}"),
        ));
    }
    Ok(match kind {
        CylinderKind::J0 => bessel_j0(x),
        CylinderKind::J1 => bessel_j1(x),
        CylinderKind::N1 => bessel_y1(x),
        CylinderKind::K0 => bessel_k0(x),
        CylinderKind::K1 => bessel_k1(x),
    })
}

/// `J1(x)/x`, with the removable singularity at the origin filled by the
/// even series `1/2 - x^2/16`.
pub fn j1_ratio(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain("j1_ratio", format!("need finite x >= 0, got {x}")));
    }
    Ok(j1_ratio_unchecked(x))
}

pub(crate) fn j1_ratio_unchecked(x: f64) -> f64 {
    if x <= J1_RATIO_CUTOFF {
        0.5 - x * x / 16.0
    } else {
        bessel_j1(x) / x
    }
}

/// Residual of the order-raising identity `J0(ts) = (1/t) d/dt [t J1(ts)/s]`
/// with the derivative replaced by a central difference of step `h`.
/// Vanishes like `h^2`.
pub fn order_raise_residual(tau: f64, s: f64, h: f64) -> Result<f64> {
    if !(tau.is_finite() && s.is_finite() && h.is_finite()) || !(tau > h && h > 0.0 && s > 0.0) {
        return Err(Error::domain(
            "order_raise_residual",
            format!("need tau > h > 0 and s > 0, got tau={tau}, s={s}, h={h}"),
        ));
    }
    let g = |t: f64| t * bessel_j1(t * s) / s;
    let derivative = (g(tau + h) - g(tau - h)) / (2.0 * h);
    Ok((derivative / tau - bessel_j0(tau * s)).abs())
}

// ---------------------------------------------------------------------------
// J0, J1, Y1

pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_CUTOFF_J {
        j_series(0, x)
    } else if x <= ASYMPTOTIC_CUTOFF_J {
        miller_j01_y1(x).0
    } else {
        hankel_asymptotic(0, x).0
    }
}

pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_CUTOFF_J {
        j_series(1, ax)
    } else if ax <= ASYMPTOTIC_CUTOFF_J {
        miller_j01_y1(ax).1
    } else {
        hankel_asymptotic(1, ax).0
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Bessel function of the second kind of order one, `x > 0`.
pub fn bessel_y1(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NAN;
    }
    if x <= SERIES_CUTOFF_J {
        y1_series(x)
    } else if x <= ASYMPTOTIC_CUTOFF_J {
        miller_j01_y1(x).2
    } else {
        hankel_asymptotic(1, x).1
    }
}

/// `J_n(x)` for integer order `n >= 0` and `x >= 0`.
pub fn bessel_jn(n: u32, x: f64) -> f64 {
    match n {
        0 => return bessel_j0(x),
        1 => return bessel_j1(x),
        _ => {}
    }
    if x == 0.0 {
        return 0.0;
    }
    let x = x.abs();
    if x > ASYMPTOTIC_CUTOFF_J && x > f64::from(n) {
        // Forward recurrence is stable while the order stays below x.
        let mut jm = bessel_j0(x);
        let mut j = bessel_j1(x);
        for k in 1..n {
            let jp = 2.0 * f64::from(k) / x * j - jm;
            jm = j;
            j = jp;
        }
        return j;
    }
    miller_jn(n, x)
}

/// Power series for `J0` or `J1`.
fn j_series(order: u32, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let (mut term, shift) = if order == 0 { (1.0, 0.0) } else { (0.5 * x, 1.0) };
    let mut sum = term;
    for k in 1..60 {
        let kf = f64::from(k);
        term *= q / (kf * (kf + shift));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn y1_series(x: f64) -> f64 {
    // Y1 = -2/(pi x) + (2/pi) ln(x/2) J1 - (x / 2 pi) sum_k [psi(k+1)+psi(k+2)] (-x^2/4)^k / (k!(k+1)!)
    let q = -0.25 * x * x;
    let mut psi_k1 = -EULER_GAMMA; // psi(k+1)
    let mut psi_k2 = 1.0 - EULER_GAMMA; // psi(k+2)
    let mut weight = 1.0; // q^k / (k! (k+1)!)
    let mut sum = (psi_k1 + psi_k2) * weight;
    for k in 1..60 {
        let kf = f64::from(k);
        weight *= q / (kf * (kf + 1.0));
        psi_k1 += 1.0 / kf;
        psi_k2 += 1.0 / (kf + 1.0);
        let term = (psi_k1 + psi_k2) * weight;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    -2.0 / (PI * x) + 2.0 / PI * (0.5 * x).ln() * j_series(1, x) - x / (2.0 * PI) * sum
}

fn miller_start(order: f64, x: f64) -> usize {
    let top = order.max(x);
    let n = (top + 30.0 + (40.0 * top).sqrt()) as usize;
    n + (n & 1)
}

/// Miller backward recurrence normalised by `1 = J0 + 2 sum J_2k`, returning
/// `(J0, J1, Y1)`. `Y1` comes from the term-wise derivative of the Neumann
/// series of `Y0`, accumulated on the same sweep.
fn miller_j01_y1(x: f64) -> (f64, f64, f64) {
    const RESCALE: f64 = 1e250;
    let start = miller_start(1.0, x);
    let two_over_x = 2.0 / x;

    let mut j_next = 0.0; // J_{k+1}
    let mut j_cur = 1e-300; // J_k, k = start
    let mut norm = 0.0;
    let mut neumann = 0.0; // sum over odd j >= 3 of (-1)^k (1/k + 1/(k-1)) J_{2k-1}
    let mut j1 = 0.0;

    let mut k = start;
    loop {
        if k.is_multiple_of(2) {
            if k > 0 {
                norm += 2.0 * j_cur;
            } else {
                norm += j_cur;
            }
        } else if k >= 3 {
            let kk = k.div_ceil(2);
            let kf = kk as f64;
            let sign = if kk.is_multiple_of(2) { 1.0 } else { -1.0 };
            neumann += sign * (1.0 / kf + 1.0 / (kf - 1.0)) * j_cur;
        } else {
            j1 = j_cur;
        }
        if k == 0 {
            break;
        }
        let j_prev = (k as f64) * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        k -= 1;
        if j_cur.abs() > RESCALE {
            j_cur /= RESCALE;
            j_next /= RESCALE;
            norm /= RESCALE;
            neumann /= RESCALE;
            j1 /= RESCALE;
        }
    }
    let j0 = j_cur / norm;
    let j1 = j1 / norm;
    let neumann = (neumann - j1 * norm) / norm; // the J1 coefficient is -1
    let y1 = 2.0 / PI * (((0.5 * x).ln() + EULER_GAMMA) * j1 - j0 / x + neumann);
    (j0, j1, y1)
}

fn miller_jn(n: u32, x: f64) -> f64 {
    const RESCALE: f64 = 1e250;
    let start = miller_start(f64::from(n), x).max(n as usize + 2);
    let start = start + (start & 1);
    let two_over_x = 2.0 / x;
    let mut j_next = 0.0;
    let mut j_cur = 1e-300;
    let mut norm = 0.0;
    let mut wanted = 0.0;
    let mut k = start;
    loop {
        if k == n as usize {
            wanted = j_cur;
        }
        if k.is_multiple_of(2) {
            norm += if k > 0 { 2.0 * j_cur } else { j_cur };
        }
        if k == 0 {
            break;
        }
        let j_prev = (k as f64) * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        k -= 1;
        if j_cur.abs() > RESCALE {
            j_cur /= RESCALE;
            j_next /= RESCALE;
            norm /= RESCALE;
            wanted /= RESCALE;
        }
    }
    wanted / norm
}

/// Hankel's asymptotic expansion; returns `(J_order(x), Y_order(x))` for
/// order 0 or 1.
fn hankel_asymptotic(order: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * f64::from(order * order);
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200u32 {
        let odd = f64::from(2 * k - 1);
        term *= (mu - odd * odd) / (f64::from(k) * eight_x);
        let mag = term.abs();
        if mag > last {
            break;
        }
        last = mag;
        // Signs alternate in pairs: Q gets +,-,+,... on odd k; P gets -,+,... on even k.
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if mag < 1e-17 {
            break;
        }
    }
    let (s, c) = x.sin_cos();
    let (cos_chi, sin_chi) = if order == 0 {
        ((c + s) * FRAC_1_SQRT_2, (s - c) * FRAC_1_SQRT_2)
    } else {
        ((s - c) * FRAC_1_SQRT_2, -(s + c) * FRAC_1_SQRT_2)
    };
    let amp = (2.0 / (PI * x)).sqrt();
    (
        amp * (p * cos_chi - q * sin_chi),
        amp * (p * sin_chi + q * cos_chi),
    )
}

// ---------------------------------------------------------------------------
// I0, K0, K1

/// Modified Bessel function `I0`, used for the growing branch of the
/// Riemann function.
pub fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
        if k > 2000.0 {
            break;
        }
    }
    sum
}

fn i1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    for k in 1..60 {
        let kf = f64::from(k);
        term *= q / (kf * (kf + 1.0));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

pub fn bessel_k0(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NAN;
    }
    if x <= SERIES_CUTOFF_K {
        // K0 = -(ln(x/2) + gamma) I0 + sum_{k>=1} H_k (x^2/4)^k / (k!)^2
        let q = 0.25 * x * x;
        let mut weight = 1.0;
        let mut harmonic = 0.0;
        let mut sum = 0.0;
        for k in 1..40 {
            let kf = f64::from(k);
            weight *= q / (kf * kf);
            harmonic += 1.0 / kf;
            let term = harmonic * weight;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        -((0.5 * x).ln() + EULER_GAMMA) * bessel_i0(x) + sum
    } else {
        steed_k01(x).0
    }
}

pub fn bessel_k1(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NAN;
    }
    if x <= SERIES_CUTOFF_K {
        // K1 = 1/x + ln(x/2) I1 - (x/4) sum_k [psi(k+1)+psi(k+2)] (x^2/4)^k / (k!(k+1)!)
        let q = 0.25 * x * x;
        let mut psi_k1 = -EULER_GAMMA;
        let mut psi_k2 = 1.0 - EULER_GAMMA;
        let mut weight = 1.0;
        let mut sum = psi_k1 + psi_k2;
        for k in 1..40 {
            let kf = f64::from(k);
            weight *= q / (kf * (kf + 1.0));
            psi_k1 += 1.0 / kf;
            psi_k2 += 1.0 / (kf + 1.0);
            let term = (psi_k1 + psi_k2) * weight;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        1.0 / x + (0.5 * x).ln() * i1_series(x) - 0.25 * x * sum
    } else {
        steed_k01(x).1
    }
}

/// Steed's continued-fraction evaluation of `(K0(x), K1(x))` for `x > 2`.
fn steed_k01(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

// ---------------------------------------------------------------------------
// Zeros

/// Derivative of `J_n`.
pub fn bessel_jn_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        -bessel_j1(x)
    } else {
        bessel_jn(n - 1, x) - f64::from(n) / x * bessel_jn(n, x)
    }
}

/// The `s`-th positive zero of `J_n` (`s >= 1`): McMahon's expansion
/// refined by Newton steps.
pub fn bessel_jn_zero(n: u32, s: u32) -> f64 {
    assert!(s >= 1, "zeros are counted from 1");
    let mu = 4.0 * f64::from(n * n);
    let beta = (f64::from(s) + 0.5 * f64::from(n) - 0.25) * PI;
    let eb = 8.0 * beta;
    let mut x = beta - (mu - 1.0) / eb - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * eb.powi(3));
    for _ in 0..50 {
        let step = bessel_jn(n, x) / bessel_jn_prime(n, x);
        x -= step;
        if step.abs() < 1e-15 * x {
            break;
        }
    }
    x
}
