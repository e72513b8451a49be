//! Sparse truncated power series in the complex Birkhoff coordinates
//! `(z, zbar)`, with the Poisson bracket, the split into sign classes
//! relative to a frequency vector, and coefficient and norm bounds.

mod bracket;
mod multi_index;
mod series;

pub use bracket::{bracket_weight, monomial_bracket, poisson_bracket};
pub use multi_index::MultiIndex;
pub use series::{FormalSeries, SeriesTerm};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::resonance::{Frequency, Sign};

/// Sign class of a monomial relative to `omega`: the sign of `<omega, k'>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignClass {
    Plus,
    Minus,
    Zero,
}

impl From<Sign> for SignClass {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Positive => SignClass::Plus,
            Sign::Negative => SignClass::Minus,
            Sign::Zero => SignClass::Zero,
        }
    }
}

/// The part of `h` whose monomials fall in `class`. The three classes
/// partition the stored monomials, so their sum reproduces `h` exactly.
pub fn project_sign_class(h: &FormalSeries, omega: &Frequency, class: SignClass) -> Result<FormalSeries> {
    if omega.n() != h.n() {
        return Err(Error::DimensionMismatch {
            expected: h.n(),
            found: omega.n(),
        });
    }
    let mut out = FormalSeries::new(h.n(), h.max_degree());
    if h.truncation_touched() {
        out.mark_truncated();
    }
    for (k, c) in h.iter() {
        let d = omega.sigma_omega(&k.prime())?;
        if SignClass::from(d.sign) == class {
            out.set(k.clone(), *c);
        }
    }
    Ok(out)
}

/// Quadratic part `H2 = sum_j omega_j z_j zbar_j` as a series, using the
/// floating values of `omega`.
pub fn quadratic_part(omega: &Frequency, max_degree: usize) -> FormalSeries {
    let n = omega.n();
    let values = omega.float_values();
    FormalSeries::from_terms(
        n,
        max_degree,
        (0..n).map(|j| (MultiIndex::diagonal_unit(n, j), Complex64::new(values[j], 0.0))),
    )
}

/// Coefficient bound `c rho^{-|k|}` for a function with sup-norm at most `c`
/// on the polydisk of radius `rho`.
pub fn cauchy_coeff_bound(c: f64, rho: f64, k: &MultiIndex) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain {
            op: "cauchy_coeff_bound",
            detail: format!("rho must be positive, got {rho}"),
        });
    }
    if !(c >= 0.0) {
        return Err(Error::Domain {
            op: "cauchy_coeff_bound",
            detail: format!("c must be nonnegative, got {c}"),
        });
    }
    Ok(c * rho.powi(-(k.degree() as i32)))
}

/// Checks `|H_k| <= c rho^{-|k|}` on every stored coefficient and returns the
/// first offending index.
pub fn check_cauchy_bound(h: &FormalSeries, c: f64, rho: f64) -> Result<Option<MultiIndex>> {
    for (k, v) in h.iter() {
        let bound = cauchy_coeff_bound(c, rho, k)?;
        if v.norm() > bound * (1.0 + 1e-12) {
            return Ok(Some(k.clone()));
        }
    }
    Ok(None)
}
