use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

const RADII: [f64; 4] = [0.5, 0.9, 0.99, 1.0];
const POINTS: usize = 64;

fn circle(r: f64) -> impl Iterator<Item = Complex64> {
    (0..POINTS).map(move |i| Complex64::from_polar(r, std::f64::consts::TAU * i as f64 / POINTS as f64))
}

/// Inverse of `y -> x = y + phi(y)` near the identity, `y = x + psi(x)`.
pub struct NearIdentityInverse<F> {
    phi: F,
    rho: f64,
    sup_phi: f64,
}

/// Checks `|phi| <= rho/2` on `|y| <= 6 rho` by sampling circles and
/// returns the inverse on `|x| <= rho`.
pub fn invert_near_identity<F>(phi: F, rho: f64) -> Result<NearIdentityInverse<F>>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(rho > 0.0) {
        return Err(Error::Domain {
            op: "invert_near_identity",
            detail: format!("rho must be positive, got {rho}"),
        });
    }
    let mut sup = phi(Complex64::new(0.0, 0.0)).norm();
    for f in RADII {
        for y in circle(6.0 * rho * f) {
            sup = sup.max(phi(y).norm());
        }
    }
    if !(sup <= rho / 2.0) {
        return Err(Error::Precondition {
            op: "invert_near_identity",
            detail: format!("sampled sup |phi| = {sup} exceeds rho/2 = {}", rho / 2.0),
        });
    }
    Ok(NearIdentityInverse { phi, rho, sup_phi: sup })
}

impl<F: Fn(Complex64) -> Complex64> NearIdentityInverse<F> {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Sampled `sup |phi|` on the big disk; also a bound for `|psi|`.
    pub fn sup_phi(&self) -> f64 {
        self.sup_phi
    }

    /// `psi(x)` by the iteration `psi <- -phi(x + psi)`.
    pub fn psi(&self, x: Complex64) -> Result<Complex64> {
        if x.norm() > self.rho * (1.0 + 1e-12) {
            return Err(Error::Domain {
                op: "NearIdentityInverse::psi",
                detail: format!("|x| = {} exceeds rho = {}", x.norm(), self.rho),
            });
        }
        let mut psi = Complex64::new(0.0, 0.0);
        let mut last_step = f64::INFINITY;
        for _ in 0..500 {
            let next = -(self.phi)(x + psi);
            let step = (next - psi).norm();
            psi = next;
            if step <= 1e-16 * (1.0 + psi.norm()) {
                return Ok(psi);
            }
            if step > last_step && step > 1e-13 {
                return Err(Error::Invariant {
                    op: "NearIdentityInverse::psi",
                    detail: format!("iteration is not contracting at x = {x}"),
                });
            }
            last_step = step;
        }
        if last_step <= 1e-14 * (1.0 + psi.norm()) {
            return Ok(psi);
        }
        Err(Error::Invariant {
            op: "NearIdentityInverse::psi",
            detail: format!("no convergence at x = {x}"),
        })
    }

    /// `y = x + psi(x)`.
    pub fn y(&self, x: Complex64) -> Result<Complex64> {
        Ok(x + self.psi(x)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DegenerateBranch {
    /// `rho = b / 12`.
    Linear,
    /// `rho = (b / (24 a tau))^{1/(r-2)} / 6`.
    Power,
}

/// Radius and bound when the normal form starts at degree `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DegenerateBounds {
    pub rho: f64,
    pub g_bound: f64,
    pub branch: DegenerateBranch,
    /// `a tau (6 rho)^{r-1} / (b - 6 rho)`, `2 a tau (6 rho)^{r-1} / b`, `rho / 2`.
    pub chain: [f64; 3],
}

/// `rho = min{b/12, (b/(24 a tau))^{1/(r-2)}/6}`, `|G| <= rho / (2 tau)`.
pub fn degenerate_bounds(a: f64, b: f64, r: u32, tau: f64) -> Result<DegenerateBounds> {
    if r < 3 || !(a > 0.0) || !(b > 0.0) || !(tau > 0.0) {
        return Err(Error::Domain {
            op: "degenerate_bounds",
            detail: format!("need r >= 3, a, b, tau > 0; got r={r}, a={a}, b={b}, tau={tau}"),
        });
    }
    let lin = b / 12.0;
    let pow = (b / (24.0 * a * tau)).powf(1.0 / (r - 2) as f64) / 6.0;
    let (rho, branch) = if lin <= pow {
        (lin, DegenerateBranch::Linear)
    } else {
        (pow, DegenerateBranch::Power)
    };
    let t = (6.0 * rho).powi(r as i32 - 1);
    let chain = [a * tau * t / (b - 6.0 * rho), 2.0 * a * tau * t / b, rho / 2.0];
    let slack = 1e-12 * chain[2];
    if !(chain[0] <= chain[1] + slack && chain[1] <= chain[2] + slack) {
        return Err(Error::Invariant {
            op: "degenerate_bounds",
            detail: format!("precondition chain fails: {chain:?}"),
        });
    }
    Ok(DegenerateBounds {
        rho,
        g_bound: rho / (2.0 * tau),
        branch,
        chain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_map() {
        let inv = invert_near_identity(|_| Complex64::new(0.0, 0.0), 1.0).unwrap();
        assert_eq!(inv.psi(Complex64::new(0.3, 0.2)).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn quadratic_map_residual() {
        let eps = 0.01;
        let phi = move |y: Complex64| y * y * eps;
        let inv = invert_near_identity(phi, 1.0).unwrap();
        for x in circle(0.8) {
            let y = inv.y(x).unwrap();
            assert!((x - (y + phi(y))).norm() < 1e-12);
        }
    }

    #[test]
    fn large_map_rejected() {
        assert!(invert_near_identity(|y: Complex64| y * y, 1.0).is_err());
    }

    #[test]
    fn branches() {
        let small = degenerate_bounds(1.0, 1.0, 4, 1e-3).unwrap();
        assert_eq!(small.branch, DegenerateBranch::Linear);
        assert!((small.rho - 1.0 / 12.0).abs() < 1e-16);
        let big = degenerate_bounds(1.0, 1.0, 4, 100.0).unwrap();
        assert_eq!(big.branch, DegenerateBranch::Power);
        assert!(degenerate_bounds(1.0, 1.0, 2, 1.0).is_err());
    }
}
