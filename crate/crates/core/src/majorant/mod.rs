//! Majorant calculus in the single variable `zeta = sum_j (z_j + zbar_j)`.
//!
//! A one-variable series `M(zeta) = sum M_j zeta^j` with `M_j >= 0` majorizes
//! a `2n`-variable series `F` when `|F_k| <= M_{|k|} * multinomial(k)`, since
//! `zeta^j` expands to `sum_{|k|=j} multinomial(k) z^k`.

mod burgers;
mod inverse;
mod system;

pub use burgers::{
    analyticity_bounds, analyticity_sample_check, burgers_analyticity_radius, burgers_solve, sample_l1_sphere,
    AnalyticityBounds, AnalyticityCheck,
};
pub use inverse::{degenerate_bounds, invert_near_identity, DegenerateBounds, DegenerateBranch, NearIdentityInverse};
pub use system::{
    initial_majorant_data, sublinear_constant, verify_domination, DominationReport, DominationRow, MajorantSolution,
};

use serde::{Deserialize, Serialize};

use crate::algebra::{FormalSeries, MultiIndex};
use crate::error::{Error, Result};

/// One-variable majorant with nonnegative coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MajorantFn {
    /// `a zeta^s / (b - zeta)`; radius `b`.
    RationalForm { a: f64, b: f64, s: u32 },
    /// Explicit coefficients `M_0, M_1, ...`.
    Series { coeffs: Vec<f64> },
}

impl MajorantFn {
    pub fn rational(a: f64, b: f64, s: u32) -> Result<Self> {
        if !(a >= 0.0) || !(b > 0.0) {
            return Err(Error::Domain {
                op: "MajorantFn::rational",
                detail: format!("need a >= 0 and b > 0, got a={a}, b={b}"),
            });
        }
        Ok(MajorantFn::RationalForm { a, b, s })
    }

    pub fn series(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::Domain {
                op: "MajorantFn::series",
                detail: "majorant coefficients must be nonnegative".into(),
            });
        }
        Ok(MajorantFn::Series { coeffs })
    }

    /// Coefficient of `zeta^j`.
    pub fn coeff(&self, j: usize) -> f64 {
        match self {
            MajorantFn::RationalForm { a, b, s } => {
                let s = *s as usize;
                if j < s {
                    0.0
                } else {
                    a * b.powi(s as i32 - 1 - j as i32)
                }
            }
            MajorantFn::Series { coeffs } => coeffs.get(j).copied().unwrap_or(0.0),
        }
    }

    /// Coefficients of degrees `0..=k`.
    pub fn expand(&self, k: usize) -> Vec<f64> {
        (0..=k).map(|j| self.coeff(j)).collect()
    }

    pub fn radius(&self) -> f64 {
        match self {
            MajorantFn::RationalForm { b, .. } => *b,
            MajorantFn::Series { .. } => f64::INFINITY,
        }
    }

    /// Coefficient assigned to the `2n`-variable index `k`.
    pub fn coeff_for(&self, k: &MultiIndex) -> f64 {
        self.coeff(k.degree()) * k.multinomial()
    }
}

/// First index with `|F_k| > M_{|k|} multinomial(k)`, if any.
pub fn domination_witness(f: &FormalSeries, m: &MajorantFn) -> Option<MultiIndex> {
    f.iter()
        .find(|(k, c)| c.norm() > m.coeff_for(k))
        .map(|(k, _)| k.clone())
}

/// `F << M`.
pub fn dominates(f: &FormalSeries, m: &MajorantFn) -> bool {
    domination_witness(f, m).is_none()
}

/// Coefficientwise `A << B` for one-variable coefficient lists.
pub fn series_dominated(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .enumerate()
        .all(|(j, x)| x.abs() <= b.get(j).copied().unwrap_or(0.0))
}

/// `a rho zeta^s / (rho - zeta)` for `F` with `|F_k| <= a rho^{s-|k|}`.
pub fn geometric_majorant(f: &FormalSeries, a: f64, rho: f64, s: u32) -> Result<MajorantFn> {
    if !(rho > 0.0) {
        return Err(Error::Domain {
            op: "geometric_majorant",
            detail: format!("rho must be positive, got {rho}"),
        });
    }
    for (k, c) in f.iter() {
        let bound = a * rho.powi(s as i32 - k.degree() as i32);
        if c.norm() > bound {
            return Err(Error::Precondition {
                op: "geometric_majorant",
                detail: format!("|F_{k:?}| = {} exceeds a rho^(s-|k|) = {bound}", c.norm()),
            });
        }
    }
    MajorantFn::rational(a * rho, rho, s)
}

/// The right-hand side `2 rho zeta^2 / (rho/2 - zeta)` dominating
/// `d/dzeta (rho zeta^3 / (rho - zeta))`.
pub fn derivative_majorant(rho: f64) -> Result<MajorantFn> {
    MajorantFn::rational(2.0 * rho, rho / 2.0, 2)
}

/// Coefficients of `d/dzeta (rho zeta^3/(rho - zeta))` through degree `k`.
pub fn derivative_of_cubic_majorant(rho: f64, k: usize) -> Vec<f64> {
    (0..=k)
        .map(|i| {
            if i < 2 {
                0.0
            } else {
                (i + 1) as f64 * rho.powi(2 - i as i32)
            }
        })
        .collect()
}

/// Expands both sides through degree `k` and checks the domination.
pub fn verify_derivative_majorant(rho: f64, k: usize) -> Result<bool> {
    let rhs = derivative_majorant(rho)?.expand(k);
    let lhs = derivative_of_cubic_majorant(rho, k);
    Ok(series_dominated(&lhs, &rhs))
}

/// Cauchy product of coefficient lists truncated at degree `k`.
pub fn series_mul(a: &[f64], b: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k + 1];
    for (i, x) in a.iter().enumerate().take(k + 1) {
        for (j, y) in b.iter().enumerate().take(k + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Derivative of a coefficient list.
pub fn series_derivative(a: &[f64]) -> Vec<f64> {
    a.iter().enumerate().skip(1).map(|(j, x)| j as f64 * x).collect()
}
