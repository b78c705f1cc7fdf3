//! Characteristic-grid solver for `4 Phi_{xi eta} + K^2(xi) Phi = 0` with
//! `Phi = 1` on both characteristics `xi = 0` and `eta = 0`.
//!
//! The analytic solution is `J0(sqrt(eta f(xi)))` with `f' = K^2`, `f(0) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagators::riemann_function;
use crate::quadrature::{adaptive, AdaptiveOptions};

/// `|Phi|` above this marks the growing regime.
pub const INSTABILITY_THRESHOLD: f64 = 1e6;

/// Node values on a uniform `(n_xi + 1) x (n_eta + 1)` grid; `n_xi` and
/// `n_eta` count cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoursatGrid {
    pub xi_max: f64,
    pub eta_max: f64,
    pub n_xi: usize,
    pub n_eta: usize,
    /// Row-major in `xi`: node `(i, j)` sits at index `i * (n_eta + 1) + j`.
    pub values: Vec<f64>,
    /// Largest deviation from the reference passed to [`GoursatGrid::compare`].
    pub max_abs_error: Option<f64>,
    /// Set when some `|Phi|` exceeded [`INSTABILITY_THRESHOLD`].
    pub unstable: bool,
}

impl GoursatGrid {
    pub fn h_xi(&self) -> f64 {
        self.xi_max / self.n_xi as f64
    }

    pub fn h_eta(&self) -> f64 {
        self.eta_max / self.n_eta as f64
    }

    pub fn xi(&self, i: usize) -> f64 {
        i as f64 * self.h_xi()
    }

    pub fn eta(&self, j: usize) -> f64 {
        j as f64 * self.h_eta()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.n_eta + 1) + j]
    }

    /// Stores and returns the largest nodal deviation from `reference`.
    pub fn compare(&mut self, reference: impl Fn(f64, f64) -> f64) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..=self.n_xi {
            for j in 0..=self.n_eta {
                let e = (self.value(i, j) - reference(self.xi(i), self.eta(j))).abs();
                worst = worst.max(e);
            }
        }
        self.max_abs_error = Some(worst);
        worst
    }
}

fn check_box(xi_max: f64, eta_max: f64, n_xi: usize, n_eta: usize) -> Result<()> {
    if !(xi_max.is_finite() && xi_max > 0.0 && eta_max.is_finite() && eta_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "grid extents must be positive, got xi_max={xi_max}, eta_max={eta_max}"
        )));
    }
    if n_xi < 2 || n_eta < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least 2 cells per direction, got {n_xi} x {n_eta}"
        )));
    }
    Ok(())
}

/// Marches the integral form of the equation over each cell with the
/// four-corner trapezoidal rule. The unknown corner enters linearly, so each
/// cell is solved in closed form.
pub fn solve_goursat(
    ksq: impl Fn(f64) -> f64,
    xi_max: f64,
    eta_max: f64,
    n_xi: usize,
    n_eta: usize,
) -> Result<GoursatGrid> {
    check_box(xi_max, eta_max, n_xi, n_eta)?;
    let h_xi = xi_max / n_xi as f64;
    let h_eta = eta_max / n_eta as f64;
    let c = h_xi * h_eta / 16.0;
    let k: Vec<f64> = (0..=n_xi).map(|i| ksq(i as f64 * h_xi)).collect();
    if k.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("K^2 is not finite on the grid".into()));
    }
    let stride = n_eta + 1;
    let mut values = vec![1.0; (n_xi + 1) * stride];
    let mut unstable = false;
    for i in 1..=n_xi {
        let (k_p, k_w) = (k[i], k[i - 1]);
        for j in 1..=n_eta {
            let phi_w = values[(i - 1) * stride + j];
            let phi_s = values[i * stride + j - 1];
            let phi_sw = values[(i - 1) * stride + j - 1];
            let rhs = (phi_w + phi_s) - phi_sw - c * ((k_w * phi_w + k_p * phi_s) + k_w * phi_sw);
            let phi = rhs / (1.0 + c * k_p);
            unstable |= !(phi.abs() <= INSTABILITY_THRESHOLD);
            values[i * stride + j] = phi;
        }
    }
    Ok(GoursatGrid {
        xi_max,
        eta_max,
        n_xi,
        n_eta,
        values,
        max_abs_error: None,
        unstable,
    })
}

/// `|4 D_{xi eta} R + K^2(xi) R|` for `R = J0(sqrt(eta f(xi)))`, with the
/// four-point cross difference of step `h`. Vanishes like `h^2`.
pub fn riemann_residual(
    ksq: impl Fn(f64) -> f64,
    f: impl Fn(f64) -> f64,
    xi: f64,
    eta: f64,
    h: f64,
) -> f64 {
    let r = |x: f64, y: f64| riemann_function(1.0, y, f(x)).value;
    let cross = (r(xi + h, eta + h) - r(xi + h, eta - h) - r(xi - h, eta + h) + r(xi - h, eta - h))
        / (4.0 * h * h);
    (4.0 * cross + ksq(xi) * r(xi, eta)).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub max_error: f64,
    /// `log2(e(2h) / e(h))`; absent on the coarsest grid or when both errors vanish.
    pub order: Option<f64>,
    pub unstable: bool,
}

/// Solves on square-celled grids with `coarsest * 2^l` cells per direction,
/// `l = 0..=levels`, and measures the nodal error against
/// `J0(sqrt(eta f(xi)))` with `f` integrated from `ksq` to near machine
/// precision.
pub fn convergence_study(
    ksq: impl Fn(f64) -> f64,
    xi_max: f64,
    eta_max: f64,
    coarsest: usize,
    levels: u32,
) -> Result<Vec<ConvergenceRow>> {
    check_box(xi_max, eta_max, coarsest, coarsest)?;
    let finest = coarsest << levels;
    let f = cumulative_integral(&ksq, xi_max, finest)?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels as usize + 1);
    for l in 0..=levels {
        let n = coarsest << l;
        let mut grid = solve_goursat(&ksq, xi_max, eta_max, n, n)?;
        let err = grid.compare(|x, y| {
            let i = (x / xi_max * finest as f64).round() as usize;
            riemann_function(1.0, y, f[i.min(finest)]).value
        });
        let order = rows.last().and_then(|prev| {
            (prev.max_error > 0.0 && err > 0.0).then(|| (prev.max_error / err).log2())
        });
        rows.push(ConvergenceRow {
            n,
            h: xi_max / n as f64,
            max_error: err,
            order,
            unstable: grid.unstable,
        });
    }
    Ok(rows)
}

/// `int_0^{x_i} ksq` at the `n + 1` nodes of `[0, x_max]`.
fn cumulative_integral(ksq: &impl Fn(f64) -> f64, x_max: f64, n: usize) -> Result<Vec<f64>> {
    let opts = AdaptiveOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-14,
        max_subdivisions: 200,
    };
    let h = x_max / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for i in 0..n {
        let (v, e, _, _) = adaptive(ksq, i as f64 * h, (i + 1) as f64 * h, &opts);
        if !(e <= 1e-12 * h * (1.0 + v.abs() / h)) {
            return Err(Error::Quadrature {
                achieved: e,
                requested: 1e-12,
            });
        }
        acc += v;
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PhysicalConstants;
    use crate::potentials::{big_k_squared, f_accumulate, PotentialSpec};
    use crate::special_functions::bessel_jn_zero;

    #[test]
    fn zero_coefficient_is_exact() {
        let g = solve_goursat(|_| 0.0, 2.0, 3.0, 17, 23).unwrap();
        assert!(g.values.iter().all(|&v| v == 1.0));
        let rows = convergence_study(|_| 0.0, 2.0, 2.0, 8, 3).unwrap();
        assert!(rows.iter().all(|r| r.max_error == 0.0 && r.order.is_none()));
    }

    #[test]
    fn characteristics_hold_unit_data() {
        let g = solve_goursat(|x| 1.0 + x, 2.0, 2.0, 16, 16).unwrap();
        for k in 0..=16 {
            assert_eq!(g.value(0, k), 1.0);
            assert_eq!(g.value(k, 0), 1.0);
        }
    }

    #[test]
    fn constant_coefficient_matches_riemann_function() {
        let a_sq = 1.0;
        for n in [32, 64] {
            let mut g = solve_goursat(|_| a_sq, 2.0, 2.0, n, n).unwrap();
            let err = g.compare(|x, y| riemann_function(x, y, a_sq).value);
            let h = 2.0 / n as f64;
            assert!(err < 0.05 * h * h, "n={n}: {err}");
        }
    }

    #[test]
    fn constant_coefficient_is_transpose_symmetric() {
        let g = solve_goursat(|_| 2.3, 1.5, 1.5, 40, 40).unwrap();
        for i in 0..=40 {
            for j in 0..=40 {
                assert_eq!(g.value(i, j), g.value(j, i));
            }
        }
    }

    #[test]
    fn unit_coefficient_converges_at_second_order() {
        let rows = convergence_study(|_| 1.0, 2.0, 2.0, 32, 4).unwrap();
        assert_eq!(rows.len(), 5);
        for r in &rows[1..] {
            let p = r.order.unwrap();
            assert!((1.8..=2.2).contains(&p), "order {p} at n={}", r.n);
        }
    }

    #[test]
    fn volkov_coefficient_matches_analytic_solution() {
        let k = PhysicalConstants::natural(0.8, 1.0);
        let spec = PotentialSpec::CircularPolarized {
            a: 1.2,
            kappa: 2.0,
            phase: 0.0,
        };
        let (k1, k2) = (0.4, -0.3);
        let ksq = |x: f64| big_k_squared(&spec, k1, k2, x, &k);
        let mut g = solve_goursat(ksq, 2.0, 2.0, 128, 128).unwrap();
        let err = g.compare(|x, y| riemann_function(1.0, y, f_accumulate(&spec, k1, k2, x, &k).unwrap()).value);
        let h = 2.0 / 128.0;
        assert!(err < h * h, "{err}");
    }

    #[test]
    fn discrete_maximum_in_first_lobe() {
        let a_sq = 1.7;
        let n = 64;
        let g = solve_goursat(|_| a_sq, 2.0, 2.0, n, n).unwrap();
        let j01 = bessel_jn_zero(0, 1);
        let h = 2.0 / n as f64;
        for i in 0..=n {
            for j in 0..=n {
                if (g.xi(i) * g.eta(j) * a_sq).sqrt() < j01 {
                    assert!(g.value(i, j).abs() <= 1.0 + h);
                }
            }
        }
    }

    #[test]
    fn negative_coefficient_grows_and_flags() {
        let g = solve_goursat(|_| -400.0, 2.0, 2.0, 64, 64).unwrap();
        assert!(g.unstable);
        let g = solve_goursat(|_| -1.0, 1.0, 1.0, 16, 16).unwrap();
        assert!(!g.unstable && g.value(16, 16) > 1.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(solve_goursat(|_| 1.0, 0.0, 1.0, 4, 4).is_err());
        assert!(solve_goursat(|_| 1.0, 1.0, 1.0, 1, 4).is_err());
    }

    #[test]
    fn residual_examples() {
        let r = riemann_residual(|_| 1.0, |x| x, 1.0, 1.0, 1e-3);
        assert!(r < 1e-5, "{r}");
        let coarse = riemann_residual(|_| 1.0, |x| x, 1.0, 1.0, 2e-2);
        let fine = riemann_residual(|_| 1.0, |x| x, 1.0, 1.0, 1e-2);
        assert!((coarse / fine - 4.0).abs() < 0.5, "{}", coarse / fine);
        let near_axis = riemann_residual(|_| 1.0, |x| x, 1.0, 2e-3, 1e-3);
        assert!(near_axis < 1e-5);
    }
}
