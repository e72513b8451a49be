//! The continuous-averaging flow `dH/d delta = -{xi* H, H2 + H}`.
//!
//! In the gauge `H_k = calH_k exp(-omega_k delta)` every `calH_k` is an
//! exp-polynomial, and the right-hand side of a degree-`d` coefficient only
//! involves coefficients of degree `< d`. [`flow_exact`] integrates the system
//! layer by layer in closed form. [`flow_numeric`] is an independent RK4
//! integration of the same system and [`birkhoff_oracle`] computes the
//! classical Lie-series normal form for comparison.

mod birkhoff;
mod numeric;

pub use birkhoff::{birkhoff_oracle, homological_generator, lie_transform};
pub use numeric::{flow_numeric, NumericSample};

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{bracket_weight, FormalSeries, MultiIndex};
use crate::error::{Error, Result};
use crate::exppoly::{check_cap, push_product, ExpPoly, Rate, DEFAULT_TERM_CAP};
use crate::fit::{fit_decay, linspace, DecayFit};
use crate::resonance::{Divisor, Frequency, Sign};

/// Default threshold for deciding that a limit coefficient is nonzero.
pub const R_THRESHOLD: f64 = 1e-10;

/// Decay rate of the gauge factor, `|<omega, k'>|`.
pub fn divisor_rate(d: &Divisor) -> Rate {
    match d.exact {
        Some(r) => Rate::exact(r),
        None => Rate::float(d.value),
    }
}

/// One contribution `factor * calH_l * calH_m * exp(-nu delta)` to
/// `d calH_k / d delta`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairTerm {
    pub l: MultiIndex,
    pub m: MultiIndex,
    pub j: usize,
    pub factor: f64,
    pub nu: Rate,
}

/// Right-hand side of the coefficient equation for one index, split into
/// the part without exponential factor and the decaying part.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RhsTerms {
    pub v1: Vec<PairTerm>,
    pub v2bar: Vec<PairTerm>,
}

fn divisor_of(cache: &BTreeMap<MultiIndex, Divisor>, omega: &Frequency, k: &MultiIndex) -> Result<Divisor> {
    match cache.get(k) {
        Some(d) => Ok(*d),
        None => omega.sigma_omega(&k.prime()),
    }
}

/// Enumerates the pairs `(l, m)` with `l + m = k + e_j`, both in the support
/// of `coeffs`, that feed `d calH_k / d delta`.
///
/// `v1`: `m` resonant, factor `-sigma_l w_j(l, m)`, no exponential.
/// `v2bar`: `sigma_l < 0 < sigma_m`, factor `2 w_j(l, m)`, rate
/// `omega_l + omega_m - omega_k = 2 min(omega_l, omega_m)`.
pub fn rhs_terms<V>(k: &MultiIndex, coeffs: &BTreeMap<MultiIndex, V>, omega: &Frequency) -> Result<RhsTerms> {
    rhs_terms_cached(k, coeffs, omega, &BTreeMap::new())
}

fn rhs_terms_cached<V>(
    k: &MultiIndex,
    coeffs: &BTreeMap<MultiIndex, V>,
    omega: &Frequency,
    cache: &BTreeMap<MultiIndex, Divisor>,
) -> Result<RhsTerms> {
    let n = k.n();
    if omega.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: omega.n(),
        });
    }
    let mut out = RhsTerms::default();
    let top = k.degree() + 2;
    if top < 6 {
        return Ok(out);
    }
    for j in 0..n {
        let t = k.raise_diagonal(j);
        for l in coeffs.keys() {
            let dl = l.degree();
            if dl < 3 {
                continue;
            }
            if dl + 3 > top {
                break;
            }
            let Some(m) = t.checked_sub(l) else { continue };
            if !coeffs.contains_key(&m) {
                continue;
            }
            if dl >= k.degree() || m.degree() >= k.degree() {
                return Err(Error::Invariant {
                    op: "rhs_terms",
                    detail: format!("pair {l:?} {m:?} is not of lower degree than {k:?}"),
                });
            }
            let w = bracket_weight(l, &m, j);
            if w == 0 {
                continue;
            }
            let sl = divisor_of(cache, omega, l)?;
            let sm = divisor_of(cache, omega, &m)?;
            match (sl.sign, sm.sign) {
                (Sign::Zero, _) => {}
                (s, Sign::Zero) => out.v1.push(PairTerm {
                    l: l.clone(),
                    m,
                    j,
                    factor: -(s.as_i64() * w) as f64,
                    nu: Rate::ZERO,
                }),
                (Sign::Negative, Sign::Positive) => {
                    let small = if sl.value <= sm.value { sl } else { sm };
                    out.v2bar.push(PairTerm {
                        l: l.clone(),
                        m,
                        j,
                        factor: (2 * w) as f64,
                        nu: divisor_rate(&small).scale(2),
                    })
                }
                // equal signs cancel against the swapped pair; the swapped
                // orientation of a mixed pair is folded into the factor 2
                _ => {}
            }
        }
    }
    Ok(out)
}

/// Closed-form solution of the flow up to degree `K`.
#[derive(Clone, Debug)]
pub struct FlowSolution {
    omega: Frequency,
    initial: FormalSeries,
    max_degree: usize,
    cal_h: BTreeMap<MultiIndex, ExpPoly>,
    divisors: BTreeMap<MultiIndex, Divisor>,
}

impl FlowSolution {
    pub fn omega(&self) -> &Frequency {
        &self.omega
    }

    pub fn initial(&self) -> &FormalSeries {
        &self.initial
    }

    pub fn n(&self) -> usize {
        self.initial.n()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// The exp-polynomials `calH_k`, keyed by index.
    pub fn coefficients(&self) -> &BTreeMap<MultiIndex, ExpPoly> {
        &self.cal_h
    }

    pub fn cal_h(&self, k: &MultiIndex) -> Option<&ExpPoly> {
        self.cal_h.get(k)
    }

    pub fn divisor(&self, k: &MultiIndex) -> Result<Divisor> {
        divisor_of(&self.divisors, &self.omega, k)
    }

    /// Gauge factor rate `omega_k`.
    pub fn gauge_rate(&self, k: &MultiIndex) -> Result<Rate> {
        Ok(divisor_rate(&self.divisor(k)?))
    }

    /// `calH(delta)` as a series.
    pub fn cal_series_at(&self, delta: f64) -> FormalSeries {
        FormalSeries::from_terms(
            self.n(),
            self.max_degree,
            self.cal_h.iter().map(|(k, p)| (k.clone(), p.eval(delta))),
        )
    }

    /// `H_k(delta) = calH_k(delta) exp(-omega_k delta)`.
    pub fn h_coeff_at(&self, k: &MultiIndex, delta: f64) -> Complex64 {
        match self.cal_h.get(k) {
            None => Complex64::new(0.0, 0.0),
            Some(p) => {
                let w = self.divisors.get(k).map_or(0.0, |d| d.value);
                p.eval(delta) * (-w * delta).exp()
            }
        }
    }

    /// `H(delta)` in the original gauge.
    pub fn h_at(&self, delta: f64) -> FormalSeries {
        FormalSeries::from_terms(
            self.n(),
            self.max_degree,
            self.cal_h.keys().map(|k| (k.clone(), self.h_coeff_at(k, delta))),
        )
    }

    /// `H_k` in the original gauge as an exp-polynomial.
    pub fn h_exppoly(&self, k: &MultiIndex) -> Result<ExpPoly> {
        match self.cal_h.get(k) {
            None => Ok(ExpPoly::zero()),
            Some(p) => Ok(p.shift_rate(self.gauge_rate(k)?)),
        }
    }
}

/// Solves the flow exactly through degree `max_degree`. Float frequencies
/// are audited for undeclared resonances with `|q| <= 2 max_degree + 2` first.
pub fn flow_exact(h: &FormalSeries, omega: &Frequency, max_degree: usize) -> Result<FlowSolution> {
    flow_exact_with_cap(h, omega, max_degree, DEFAULT_TERM_CAP)
}

pub fn flow_exact_with_cap(h: &FormalSeries, omega: &Frequency, max_degree: usize, cap: usize) -> Result<FlowSolution> {
    let n = h.n();
    if omega.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: omega.n(),
        });
    }
    if max_degree < 3 {
        return Err(Error::InvalidInput(format!(
            "truncation degree must be at least 3, got {max_degree}"
        )));
    }
    omega.audit(2 * max_degree + 2)?;
    if !h.is_diamond() {
        return Err(Error::Precondition {
            op: "flow_exact",
            detail: "initial perturbation must start at degree 3".into(),
        });
    }
    let initial = h.with_max_degree(max_degree);
    let mut divisors = BTreeMap::new();
    for k in initial.indices() {
        divisors.insert(k.clone(), omega.sigma_omega(&k.prime())?);
    }
    let mut cal_h: BTreeMap<MultiIndex, ExpPoly> = initial
        .iter()
        .filter(|(k, _)| k.degree() == 3)
        .map(|(k, c)| (k.clone(), ExpPoly::constant(*c)))
        .collect();

    for d in 4..=max_degree {
        let layer: Vec<MultiIndex> = MultiIndex::all_of_degree(n, d);
        let mut layer_div = BTreeMap::new();
        for k in &layer {
            layer_div.insert(k.clone(), omega.sigma_omega(&k.prime())?);
        }
        divisors.extend(layer_div);
        let solved: Vec<Result<Option<(MultiIndex, ExpPoly)>>> = layer
            .par_iter()
            .map(|k| {
                let rhs = rhs_terms_cached(k, &cal_h, omega, &divisors)?;
                let mut raw = Vec::new();
                for t in rhs.v1.iter().chain(&rhs.v2bar) {
                    push_product(
                        &mut raw,
                        &cal_h[&t.l],
                        &cal_h[&t.m],
                        Complex64::new(t.factor, 0.0),
                        t.nu,
                    );
                }
                let integrand = check_cap(ExpPoly::from_terms(raw), cap)?;
                let value = ExpPoly::constant(initial.get(k)).add(&integrand.integrate());
                let value = check_cap(value, cap)?;
                Ok((!value.is_zero()).then(|| (k.clone(), value)))
            })
            .collect();
        for item in solved {
            if let Some((k, v)) = item? {
                cal_h.insert(k, v);
            }
        }
    }
    divisors.retain(|k, _| cal_h.contains_key(k));
    Ok(FlowSolution {
        omega: omega.clone(),
        initial,
        max_degree,
        cal_h,
        divisors,
    })
}

/// One row of the per-index flow report.
#[derive(Clone, Debug, Serialize)]
pub struct FlowRow {
    pub k: MultiIndex,
    pub degree: usize,
    pub resonant: bool,
    pub divisor: f64,
    pub limit: Complex64,
    pub fitted_decay: Option<f64>,
    pub fitted_power: Option<f64>,
    pub log_linear_decay: Option<f64>,
}

/// The `delta -> infinity` limit of the flow.
#[derive(Clone, Debug)]
pub struct NormalFormResult {
    /// Resonant limit coefficients, degrees 3 through K.
    pub n_diamond: FormalSeries,
    /// Smallest degree with a limit coefficient above threshold; `None` when
    /// the limit vanishes through degree K.
    pub r: Option<usize>,
    pub threshold: f64,
    pub rows: Vec<FlowRow>,
}

/// Decay window used for the fitted rates in the report.
pub const DECAY_WINDOW: (f64, f64) = (2.0, 6.0);

/// Fits the exponential rate of `|H_k(delta)|` on `window`.
pub fn fitted_decay(sol: &FlowSolution, k: &MultiIndex, window: (f64, f64)) -> Option<DecayFit> {
    let grid = linspace(window.0, window.1, 41);
    let ys: Vec<f64> = grid.iter().map(|d| sol.h_coeff_at(k, *d).norm()).collect();
    fit_decay(&grid, &ys)
}

pub fn normal_form_limit(sol: &FlowSolution) -> Result<NormalFormResult> {
    normal_form_limit_with(sol, R_THRESHOLD)
}

pub fn normal_form_limit_with(sol: &FlowSolution, threshold: f64) -> Result<NormalFormResult> {
    let mut n_diamond = FormalSeries::new(sol.n(), sol.max_degree());
    let mut rows = Vec::with_capacity(sol.cal_h.len());
    let mut r: Option<usize> = None;
    for (k, p) in &sol.cal_h {
        let d = sol.divisor(k)?;
        let resonant = d.is_resonant();
        let limit = if resonant {
            p.limit_infinity().map_err(|e| Error::Invariant {
                op: "normal_form_limit",
                detail: format!("resonant coefficient {k:?} has no limit: {e}"),
            })?
        } else {
            Complex64::new(0.0, 0.0)
        };
        if resonant {
            n_diamond.set(k.clone(), limit);
            if limit.norm() > threshold {
                r = Some(r.map_or(k.degree(), |x: usize| x.min(k.degree())));
            }
        }
        let fit = if resonant {
            None
        } else {
            fitted_decay(sol, k, DECAY_WINDOW)
        };
        rows.push(FlowRow {
            k: k.clone(),
            degree: k.degree(),
            resonant,
            divisor: d.value,
            limit,
            fitted_decay: fit.map(|f| f.rate),
            fitted_power: fit.map(|f| f.power),
            log_linear_decay: fit.map(|f| f.log_linear_rate),
        });
    }
    Ok(NormalFormResult {
        n_diamond,
        r,
        threshold,
        rows,
    })
}

/// Largest `|conj(H_k(delta)) - H_{k*}(delta)|` over the samples.
pub fn reality_defect(sol: &FlowSolution, deltas: &[f64]) -> f64 {
    deltas.iter().map(|d| sol.h_at(*d).reality_defect()).fold(0.0, f64::max)
}

/// True iff the flow stays in the real subspace to `1e-10` at every sample.
pub fn check_reality(sol: &FlowSolution, deltas: &[f64]) -> bool {
    reality_defect(sol, deltas) < 1e-10
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn degree_three_has_no_pairs() {
        let omega = Frequency::rational_from_ints(&[1, 1]);
        let mut h = FormalSeries::new(2, 6);
        for k in MultiIndex::all_of_degree(2, 3) {
            h.add_term(k, c(1.0, 0.0));
        }
        for k in MultiIndex::all_of_degree(2, 3) {
            let r = rhs_terms(&k, h.as_map(), &omega).unwrap();
            assert!(r.v1.is_empty() && r.v2bar.is_empty());
        }
    }

    #[test]
    fn resonant_index_has_no_v1() {
        let omega = Frequency::rational_from_ints(&[1, 1]);
        let mut h = FormalSeries::new(2, 6);
        for d in 3..=4 {
            for k in MultiIndex::all_of_degree(2, d) {
                h.add_term(k, c(1.0, 0.5));
            }
        }
        for k in MultiIndex::all_of_degree(2, 4) {
            let r = rhs_terms(&k, h.as_map(), &omega).unwrap();
            if omega.is_resonant(&k.prime()).unwrap() {
                assert!(r.v1.is_empty(), "{k:?}");
            }
            for t in &r.v2bar {
                assert!(!t.nu.is_zero());
            }
        }
    }

    #[test]
    fn resonant_data_is_fixed() {
        let omega = Frequency::rational_from_ints(&[1, 1]);
        let mut h = FormalSeries::new(2, 8);
        h.add_term(MultiIndex::new(&[2, 0], &[0, 2]), c(0.5, 0.25));
        h.add_term(MultiIndex::new(&[0, 2], &[2, 0]), c(0.5, -0.25));
        h.add_term(MultiIndex::new(&[1, 1], &[1, 1]), c(-1.0, 0.0));
        let sol = flow_exact(&h, &omega, 8).unwrap();
        assert_eq!(sol.coefficients().len(), 3);
        assert!(sol.coefficients().values().all(ExpPoly::is_constant));
        assert_eq!(sol.h_at(3.0), h);
    }

    #[test]
    fn one_dof_normal_form_is_already_normal() {
        let omega = Frequency::rational_from_ints(&[1]);
        let k = MultiIndex::new(&[2], &[2]);
        let h = FormalSeries::monomial(1, 6, k.clone(), c(1.0, 0.0));
        let nf = normal_form_limit(&flow_exact(&h, &omega, 6).unwrap()).unwrap();
        assert_eq!(nf.r, Some(4));
        assert_eq!(nf.n_diamond.get(&k), c(1.0, 0.0));
        let empty = FormalSeries::new(1, 6);
        let nf = normal_form_limit(&flow_exact(&empty, &omega, 6).unwrap()).unwrap();
        assert_eq!(nf.r, None);
        assert!(nf.n_diamond.is_empty());
    }

    #[test]
    fn rejects_low_degree_input() {
        let omega = Frequency::rational_from_ints(&[1]);
        let h = FormalSeries::monomial(1, 6, MultiIndex::new(&[1], &[1]), c(1.0, 0.0));
        assert!(flow_exact(&h, &omega, 6).is_err());
    }
}
