use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::sequences::SequencePair;
use crate::algebra::{monomial_bracket, FormalSeries, MultiIndex};
use crate::error::{Error, Result};
use crate::exppoly::{check_cap, push_product, ExpPoly, Rate, Term, DEFAULT_TERM_CAP};
use crate::flow::divisor_rate;
use crate::resonance::{Frequency, Sign};

/// Relative slack for the coefficient bound comparisons.
pub const BOUND_RTOL: f64 = 1e-12;

/// A coefficient exceeding `c exp(b_|k| + alpha |k|)`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundWitness {
    pub k: MultiIndex,
    pub value: f64,
    pub bound: f64,
}

/// Result of one band-averaging step.
#[derive(Clone, Debug, Serialize)]
pub struct StepOutput {
    pub s: usize,
    /// Resonant part of the band `s <= |k| <= 2s - 3`.
    pub g0: FormalSeries,
    /// Limit of the coefficients of degree `>= 2s - 2`.
    pub g: FormalSeries,
    pub eps: f64,
    pub lambda: f64,
    /// `Omega_{2s-2}`.
    pub omega_cap: f64,
    pub alpha: f64,
    pub c: f64,
    pub n: usize,
    /// Output coefficients above `c exp(b_|k| + (alpha + eps)|k|)`.
    pub violations: Vec<BoundWitness>,
    /// Largest ratio of an output coefficient to its bound.
    pub max_ratio: f64,
    /// Brackets produced degrees above the truncation.
    pub truncated: bool,
}

impl StepOutput {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    /// Largest admissible `rho' = rho - eps/(n s e^alpha) (rho e^alpha)^{s-1}`
    /// for `0 < rho <= e^{-alpha}`.
    pub fn rho_prime(&self, rho: f64) -> Result<f64> {
        let top = (-self.alpha).exp();
        if !(rho > 0.0) || rho > top * (1.0 + 1e-15) {
            return Err(Error::Domain {
                op: "StepOutput::rho_prime",
                detail: format!("need 0 < rho <= e^-alpha = {top}, got {rho}"),
            });
        }
        let ea = self.alpha.exp();
        Ok(rho - self.eps / (self.n as f64 * self.s as f64 * ea) * (rho * ea).powi(self.s as i32 - 1))
    }

    /// `rho'` at the largest admissible `rho = e^{-alpha}`.
    pub fn rho_prime_factor(&self) -> f64 {
        self.rho_prime((-self.alpha).exp()).unwrap_or(f64::NAN)
    }
}

/// `Lambda = n e^{2 alpha} (2s)^{2n+1} e^{2 b_s - b_{2s-2}} / 2`.
pub fn lambda_constant(n: usize, s: usize, alpha: f64, b: &SequencePair) -> f64 {
    0.5 * n as f64
        * (2.0 * alpha).exp()
        * ((2 * s) as f64).powi(2 * n as i32 + 1)
        * (2.0 * b.b(s) - b.b(2 * s - 2)).exp()
}

/// `c exp(b_|k| + alpha |k|)`.
pub fn coefficient_bound(c: f64, alpha: f64, b: &SequencePair, k: &MultiIndex) -> f64 {
    c * (b.b(k.degree()) + alpha * k.degree() as f64).exp()
}

fn first_excess(h: &FormalSeries, c: f64, alpha: f64, b: &SequencePair) -> Option<BoundWitness> {
    h.iter().find_map(|(k, v)| {
        let bound = coefficient_bound(c, alpha, b, k);
        (v.norm() > bound * (1.0 + BOUND_RTOL)).then(|| BoundWitness {
            k: k.clone(),
            value: v.norm(),
            bound,
        })
    })
}

/// Averages the band `s <= |k| <= 2s - 3` of `h` away with the operator
/// `xi_s` and returns the `delta -> infinity` limit.
///
/// Band coefficients evolve as `H_k = Hhat_k e^{-omega_k delta}`. Higher
/// coefficients obey `dH_k = -i {H^- - H^+, H}_k`, whose right-hand side only
/// involves lower degrees, so they are exp-polynomials solved degree by
/// degree through `max_degree`.
pub fn averaging_step(
    h: &FormalSeries,
    omega: &Frequency,
    s: usize,
    c: f64,
    alpha: f64,
    b: &SequencePair,
    max_degree: usize,
) -> Result<StepOutput> {
    averaging_step_with_cap(h, omega, s, c, alpha, b, max_degree, DEFAULT_TERM_CAP)
}

#[allow(clippy::too_many_arguments)]
pub fn averaging_step_with_cap(
    h: &FormalSeries,
    omega: &Frequency,
    s: usize,
    c: f64,
    alpha: f64,
    b: &SequencePair,
    max_degree: usize,
    cap: usize,
) -> Result<StepOutput> {
    let n = h.n();
    if omega.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: omega.n(),
        });
    }
    if s < 3 {
        return Err(Error::InvalidInput(format!("band start must be at least 3, got {s}")));
    }
    if !(alpha >= 0.0) || !(c > 0.0) {
        return Err(Error::Domain {
            op: "averaging_step",
            detail: format!("need alpha >= 0 and c > 0, got alpha={alpha}, c={c}"),
        });
    }
    if let Some(d) = h.min_degree() {
        if d < s {
            return Err(Error::Precondition {
                op: "averaging_step",
                detail: format!("input has a term of degree {d} below the band start {s}"),
            });
        }
    }
    let top = 2 * s.min(max_degree) + 2;
    for w in b.b_values().windows(2).take(top) {
        if w[1] > w[0] + BOUND_RTOL * w[0].abs().max(1.0) {
            return Err(Error::Precondition {
                op: "averaging_step",
                detail: "b must be nonincreasing".into(),
            });
        }
    }
    if let Some(w) = first_excess(h, c, alpha, b) {
        return Err(Error::Precondition {
            op: "averaging_step",
            detail: format!("|H_{:?}| = {} exceeds c e^(b+alpha|k|) = {}", w.k, w.value, w.bound),
        });
    }

    let band_hi = 2 * s - 3;
    let mut g0 = FormalSeries::new(n, max_degree);
    // nonresonant band terms with their sign, the generator of the step
    let mut movers: Vec<(MultiIndex, i64)> = Vec::new();
    let mut current: BTreeMap<MultiIndex, ExpPoly> = BTreeMap::new();
    for (k, v) in h.iter().filter(|(k, _)| k.degree() <= band_hi.min(max_degree)) {
        let d = omega.sigma_omega(&k.prime())?;
        match d.sign {
            Sign::Zero => {
                g0.set(k.clone(), *v);
                current.insert(k.clone(), ExpPoly::constant(*v));
            }
            sign => {
                movers.push((k.clone(), sign.as_i64()));
                current.insert(k.clone(), ExpPoly::term(0, divisor_rate(&d), *v));
            }
        }
    }

    let mut truncated = h.truncation_touched();
    let mut g = FormalSeries::new(n, max_degree);
    let lowest_mover = movers.iter().map(|(l, _)| l.degree()).min();
    for d in band_hi + 1..=max_degree {
        // contributions to degree d: l mover, m in support, |l| + |m| = d + 2
        let mut raw: BTreeMap<MultiIndex, Vec<Term>> = BTreeMap::new();
        if lowest_mover.is_some() {
            for (l, sign) in &movers {
                let want = d + 2 - l.degree();
                if want < s || want >= d {
                    continue;
                }
                let hl = &current[l];
                for (m, hm) in current.iter().filter(|(m, _)| m.degree() == want) {
                    for (k, w) in monomial_bracket(l, m) {
                        let coef = Complex64::new((-sign * w) as f64, 0.0);
                        push_product(raw.entry(k).or_default(), hl, hm, coef, Rate::ZERO);
                    }
                }
            }
        }
        let mut layer: Vec<MultiIndex> = raw.keys().cloned().collect();
        for k in h.indices().filter(|k| k.degree() == d) {
            if !raw.contains_key(k) {
                layer.push(k.clone());
            }
        }
        let solved: Vec<Result<(MultiIndex, ExpPoly, Complex64)>> = layer
            .into_par_iter()
            .map(|k| {
                let integrand = match raw.get(&k) {
                    Some(terms) => check_cap(ExpPoly::from_terms(terms.clone()), cap)?,
                    None => ExpPoly::zero(),
                };
                let value = check_cap(ExpPoly::constant(h.get(&k)).add(&integrand.integrate()), cap)?;
                let limit = value.limit_infinity().map_err(|e| Error::Invariant {
                    op: "averaging_step",
                    detail: format!("coefficient {k:?} has no limit: {e}"),
                })?;
                Ok((k, value, limit))
            })
            .collect();
        for item in solved {
            let (k, value, limit) = item?;
            if !value.is_zero() {
                current.insert(k.clone(), value);
            }
            if limit != Complex64::new(0.0, 0.0) {
                g.set(k, limit);
            }
        }
    }
    if let Some(low) = lowest_mover {
        let max_m = current.keys().map(MultiIndex::degree).max().unwrap_or(0);
        truncated |= low + max_m > max_degree + 2;
    }

    let omega_cap = omega.omega_capital(2 * s - 2)?;
    let lambda = lambda_constant(n, s, alpha, b);
    let eps = c * lambda * omega_cap;
    let mut violations = Vec::new();
    let mut max_ratio = 0.0f64;
    for (k, v) in g.iter() {
        let bound = coefficient_bound(c, alpha + eps, b, k);
        let ratio = v.norm() / bound;
        max_ratio = max_ratio.max(ratio);
        if ratio > 1.0 + BOUND_RTOL {
            violations.push(BoundWitness {
                k: k.clone(),
                value: v.norm(),
                bound,
            });
        }
    }
    Ok(StepOutput {
        s,
        g0,
        g,
        eps,
        lambda,
        omega_cap,
        alpha,
        c,
        n,
        violations,
        max_ratio,
        truncated,
    })
}
