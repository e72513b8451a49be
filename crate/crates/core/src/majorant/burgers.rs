use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::FlowSolution;

/// Radius `b / (1 + 2 a tau + 2 sqrt(a tau (1 + a tau)))` of the disk where
/// the Burgers solution is analytic.
pub fn burgers_analyticity_radius(a: f64, b: f64, tau: f64) -> f64 {
    let x = a * tau;
    b / (1.0 + 2.0 * x + 2.0 * (x * (1.0 + x)).sqrt())
}

/// Branch of `G = a (zeta + tau G)^2 / (b - zeta - tau G)` with `G(0) = 0`:
///
/// `G = 2 a zeta^2 / (D + sqrt(D^2 - 4 a tau zeta^2 (1 + a tau)))`,
/// `D = b - zeta - 2 a tau zeta`.
///
/// The discriminant factors as `b^2 (1 - zeta/r1)(1 - zeta/r2)` with
/// `r1 <= r2` its roots on the positive axis, and the root is taken factor
/// by factor, which is continuous on the analyticity disk.
pub fn burgers_solve(a: f64, b: f64, tau: f64, zeta: Complex64) -> Result<Complex64> {
    if !(a > 0.0) || !(b > 0.0) || !(tau >= 0.0) {
        return Err(Error::Domain {
            op: "burgers_solve",
            detail: format!("need a > 0, b > 0, tau >= 0; got a={a}, b={b}, tau={tau}"),
        });
    }
    let r1 = burgers_analyticity_radius(a, b, tau);
    if !(zeta.norm() < r1) {
        return Err(Error::Domain {
            op: "burgers_solve",
            detail: format!(
                "|zeta| = {} is outside the analyticity disk of radius {r1}",
                zeta.norm()
            ),
        });
    }
    let x = a * tau;
    let r2 = b / (1.0 + 2.0 * x - 2.0 * (x * (1.0 + x)).sqrt());
    let one = Complex64::new(1.0, 0.0);
    let root = (one - zeta / r1).sqrt() * (one - zeta / r2).sqrt() * b;
    let d = b - zeta * (1.0 + 2.0 * x);
    Ok(zeta * zeta * (2.0 * a) / (d + root))
}

/// Constants of the analyticity estimate for `||H||_rho = h rho^3` under
/// the flow: `a = 2 h rho`, `b = rho / 2`, `tau = 8 n delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalyticityBounds {
    pub a: f64,
    pub b: f64,
    pub tau: f64,
    /// `rho / (4 (1 + 32 n h rho delta))`.
    pub radius: f64,
    /// `h rho^3 / (4 (1 + 32 n h rho delta)^3)`.
    pub bound: f64,
    /// `A` in `radius = A / (1 + B delta)`.
    pub big_a: f64,
    /// `B` in `radius = A / (1 + B delta)`.
    pub big_b: f64,
}

pub fn analyticity_bounds(h: f64, rho: f64, n: usize, delta: f64) -> Result<AnalyticityBounds> {
    if !(h > 0.0) || !(rho > 0.0) || n == 0 || !(delta >= 0.0) {
        return Err(Error::Domain {
            op: "analyticity_bounds",
            detail: format!("need h > 0, rho > 0, n >= 1, delta >= 0; got h={h}, rho={rho}, n={n}, delta={delta}"),
        });
    }
    let nf = n as f64;
    let q = 1.0 + 32.0 * nf * h * rho * delta;
    let radius = rho / (4.0 * q);
    let bound = h * rho.powi(3) / (4.0 * q.powi(3));
    let (a, b, tau) = (2.0 * h * rho, rho / 2.0, 8.0 * nf * delta);
    let p = 1.0 + 2.0 * a * tau;
    let radius2 = b / (2.0 * p);
    let bound2 = a * b * b / (2.0 * p.powi(3));
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-13 * x.abs().max(y.abs());
    if !close(radius, radius2) || !close(bound, bound2) {
        return Err(Error::Invariant {
            op: "analyticity_bounds",
            detail: format!("closed forms disagree: {radius} vs {radius2}, {bound} vs {bound2}"),
        });
    }
    Ok(AnalyticityBounds {
        a,
        b,
        tau,
        radius,
        bound,
        big_a: rho / 4.0,
        big_b: 32.0 * nf * h * rho,
    })
}

/// Deterministic points with `sum_j |z_j| + |zbar_j| = r` in `C^{2n}`.
/// Magnitudes and phases follow Kronecker sequences, so runs are
/// reproducible without a random generator.
pub fn sample_l1_sphere(n: usize, r: f64, count: usize) -> Vec<Vec<Complex64>> {
    const PRIMES: [f64; 16] = [
        2., 3., 5., 7., 11., 13., 17., 19., 23., 29., 31., 37., 41., 43., 47., 53.,
    ];
    let dim = 2 * n;
    (0..count)
        .map(|i| {
            let t = (i + 1) as f64;
            let mags: Vec<f64> = (0..dim).map(|j| (t * PRIMES[j % 16].sqrt()).fract() + 0.05).collect();
            let total: f64 = mags.iter().sum();
            (0..dim)
                .map(|j| {
                    let phase = (t * PRIMES[(j + dim) % 16].sqrt()).fract() * std::f64::consts::TAU;
                    Complex64::from_polar(r * mags[j] / total, phase)
                })
                .collect()
        })
        .collect()
}

/// Outcome of sampling the flow against the analyticity estimate.
#[derive(Clone, Debug, Serialize)]
pub struct AnalyticityCheck {
    pub h: f64,
    pub rho: f64,
    /// Largest `|calH(z, delta)| / (bound + tail)` over all samples.
    pub max_ratio: f64,
    /// `(delta, |calH|, bound + tail)` for every sample above the bound.
    pub violations: Vec<(f64, f64, f64)>,
    pub samples: usize,
}

/// Samples the truncated `calH(., delta)` on l1-spheres of radius
/// `{0.5, 0.9, 0.99, 1} x radius(delta)` and compares with the bound plus a
/// geometric tail allowance `h rho^3 q^{K+1} / (1 - q)`, `q = radius / rho`.
/// `h` is taken from the coefficient estimate `sum |H_k| rho^|k| = h rho^3`.
pub fn analyticity_sample_check(
    sol: &FlowSolution,
    rho: f64,
    deltas: &[f64],
    points_per_radius: usize,
) -> Result<AnalyticityCheck> {
    let n = sol.n();
    let h = sol.initial().norm_upper_estimate(rho) / rho.powi(3);
    let mut out = AnalyticityCheck {
        h,
        rho,
        max_ratio: 0.0,
        violations: Vec::new(),
        samples: 0,
    };
    if !(h > 0.0) {
        return Ok(out);
    }
    for &delta in deltas {
        let tb = analyticity_bounds(h, rho, n, delta)?;
        let series = sol.cal_series_at(delta);
        let q = tb.radius / rho;
        let tail = h * rho.powi(3) * q.powi(sol.max_degree() as i32 + 1) / (1.0 - q);
        let limit = tb.bound + tail;
        for frac in [0.5, 0.9, 0.99, 1.0] {
            for z in sample_l1_sphere(n, frac * tb.radius, points_per_radius) {
                let v = series.eval(&z).norm();
                out.samples += 1;
                out.max_ratio = out.max_ratio.max(v / limit);
                if v > limit {
                    out.violations.push((delta, v, limit));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_flow_case() {
        let z = Complex64::new(0.2, 0.1);
        let g = burgers_solve(1.5, 1.0, 0.0, z).unwrap();
        let want = z * z * 1.5 / (1.0 - z);
        assert!((g - want).norm() < 1e-15);
    }

    #[test]
    fn residual_example() {
        let (a, b, tau) = (1.0, 1.0, 0.3);
        let z = Complex64::new(0.1, 0.0);
        let g = burgers_solve(a, b, tau, z).unwrap();
        let w = z + g * tau;
        let res = (g - w * w * a / (b - w)).norm();
        assert!(res < 1e-10);
    }

    #[test]
    fn outside_disk_rejected() {
        let r = burgers_analyticity_radius(1.0, 1.0, 0.3);
        assert!(burgers_solve(1.0, 1.0, 0.3, Complex64::new(r * 1.01, 0.0)).is_err());
    }

    #[test]
    fn analyticity_at_zero_delta() {
        let t = analyticity_bounds(0.7, 0.5, 2, 0.0).unwrap();
        assert!((t.radius - 0.5 / 4.0).abs() < 1e-16);
        assert!((t.bound - 0.7 * 0.125 / 4.0).abs() < 1e-16);
        assert!((t.big_a - 0.125).abs() < 1e-16);
    }

    #[test]
    fn sphere_points_have_requested_norm() {
        for p in sample_l1_sphere(3, 0.25, 10) {
            let s: f64 = p.iter().map(|z| z.norm()).sum();
            assert!((s - 0.25).abs() < 1e-14);
        }
    }
}
