//! Finite sums `sum c delta^s exp(-nu delta)` with `s >= 0`, `nu >= 0`.
//!
//! Every coefficient of the continuous-averaging flow in the calligraphic
//! gauge lives in this algebra, so the flow can be solved exactly degree by
//! degree: products, antiderivatives and limits at infinity are closed form.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on the number of terms of one coefficient.
pub const DEFAULT_TERM_CAP: usize = 10_000;

/// Float-mode tolerance below which two rates are the same rate.
pub const RATE_TOL: f64 = 1e-12;

/// Decay rate `nu >= 0`, with an exact value when it comes from a rational
/// frequency vector.
#[derive(Clone, Copy, Debug)]
pub struct Rate {
    pub value: f64,
    pub exact: Option<Rational64>,
}

impl Rate {
    pub const ZERO: Rate = Rate {
        value: 0.0,
        exact: None,
    };

    pub fn float(value: f64) -> Self {
        Self { value, exact: None }
    }

    pub fn exact(r: Rational64) -> Self {
        Self {
            value: r.to_f64().unwrap_or(f64::NAN),
            exact: Some(r),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self.exact {
            Some(r) => r.is_zero(),
            None => self.value == 0.0,
        }
    }

    pub fn add(&self, other: &Rate) -> Rate {
        match (self.exact, other.exact) {
            (Some(a), Some(b)) => Rate::exact(a + b),
            (Some(a), None) if a.is_zero() => *other,
            (None, Some(b)) if b.is_zero() => *self,
            _ => Rate::float(self.value + other.value),
        }
    }

    pub fn scale(&self, k: i64) -> Rate {
        match self.exact {
            Some(r) => Rate::exact(r * Rational64::from_integer(k)),
            None => Rate::float(self.value * k as f64),
        }
    }

    /// Exact comparison when both are tagged, tolerance otherwise.
    pub fn same(&self, other: &Rate) -> bool {
        match (self.exact, other.exact) {
            (Some(a), Some(b)) => a == b,
            _ => {
                if self.is_zero() || other.is_zero() {
                    return self.is_zero() && other.is_zero();
                }
                (self.value - other.value).abs() <= RATE_TOL * self.value.abs().max(1.0)
            }
        }
    }

    fn order(&self, other: &Rate) -> Ordering {
        match (self.exact, other.exact) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => self.value.total_cmp(&other.value),
        }
    }
}

impl PartialEq for Rate {
    fn eq(&self, other: &Self) -> bool {
        self.same(other)
    }
}

/// One term `c delta^s exp(-nu delta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub s: u32,
    pub nu: Rate,
    pub c: Complex64,
}

/// Canonical exp-polynomial: terms sorted by `(nu, s)`, unique, nonzero.
#[derive(Clone, Default, PartialEq)]
pub struct ExpPoly {
    terms: Vec<Term>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_terms(vec![Term {
            s: 0,
            nu: Rate::ZERO,
            c,
        }])
    }

    pub fn term(s: u32, nu: Rate, c: Complex64) -> Self {
        Self::from_terms(vec![Term { s, nu, c }])
    }

    /// Canonicalizes an arbitrary term list.
    pub fn from_terms(mut raw: Vec<Term>) -> Self {
        raw.retain(|t| t.c != Complex64::zero());
        raw.sort_by(|a, b| a.nu.order(&b.nu).then(a.s.cmp(&b.s)));
        // group rates that compare equal, then merge equal powers inside a group
        let mut out: Vec<Term> = Vec::with_capacity(raw.len());
        let mut i = 0;
        while i < raw.len() {
            let head = raw[i].nu;
            let mut j = i + 1;
            while j < raw.len() && raw[j].nu.same(&head) {
                j += 1;
            }
            let group = &mut raw[i..j];
            group.sort_by_key(|t| t.s);
            let start = out.len();
            for t in group.iter() {
                match out[start..].last_mut() {
                    Some(last) if last.s == t.s => last.c += t.c,
                    _ => out.push(Term { nu: head, ..*t }),
                }
            }
            i = j;
        }
        out.retain(|t| t.c != Complex64::zero());
        Self { terms: out }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the only terms are constants.
    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.s == 0 && t.nu.is_zero())
    }

    pub fn max_power(&self) -> u32 {
        self.terms.iter().map(|t| t.s).max().unwrap_or(0)
    }

    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        let mut raw = self.terms.clone();
        raw.extend_from_slice(&other.terms);
        Self::from_terms(raw)
    }

    pub fn sub(&self, other: &ExpPoly) -> ExpPoly {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, k: Complex64) -> ExpPoly {
        Self::from_terms(self.terms.iter().map(|t| Term { c: t.c * k, ..*t }).collect())
    }

    /// Multiplies by `exp(-nu delta)`.
    pub fn shift_rate(&self, nu: Rate) -> ExpPoly {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| Term {
                    nu: t.nu.add(&nu),
                    ..*t
                })
                .collect(),
        )
    }

    pub fn mul(&self, other: &ExpPoly) -> Result<ExpPoly> {
        self.mul_capped(other, DEFAULT_TERM_CAP)
    }

    pub fn mul_capped(&self, other: &ExpPoly, cap: usize) -> Result<ExpPoly> {
        let mut raw = Vec::with_capacity(self.len() * other.len());
        push_product(&mut raw, self, other, Complex64::new(1.0, 0.0), Rate::ZERO);
        let out = Self::from_terms(raw);
        check_cap(out, cap)
    }

    /// `int_0^delta A(lambda) d lambda`.
    pub fn integrate(&self) -> ExpPoly {
        let mut raw = Vec::new();
        for t in &self.terms {
            integrate_term(t, &mut raw);
        }
        Self::from_terms(raw)
    }

    /// `int_0^delta A(lambda) exp(-w lambda) d lambda`.
    pub fn integrate_weighted(&self, w: Rate) -> ExpPoly {
        self.shift_rate(w).integrate()
    }

    pub fn derivative(&self) -> ExpPoly {
        let mut raw = Vec::with_capacity(2 * self.len());
        for t in &self.terms {
            if t.s > 0 {
                raw.push(Term {
                    s: t.s - 1,
                    nu: t.nu,
                    c: t.c * t.s as f64,
                });
            }
            if !t.nu.is_zero() {
                raw.push(Term {
                    s: t.s,
                    nu: t.nu,
                    c: -t.c * t.nu.value,
                });
            }
        }
        Self::from_terms(raw)
    }

    /// Value at `delta >= 0`; one exponential per distinct rate.
    pub fn eval(&self, delta: f64) -> Complex64 {
        let mut sum = Complex64::zero();
        let mut i = 0;
        while i < self.terms.len() {
            let nu = self.terms[i].nu;
            let mut poly = Complex64::zero();
            while i < self.terms.len() && self.terms[i].nu.same(&nu) {
                let t = &self.terms[i];
                poly += t.c * delta.powi(t.s as i32);
                i += 1;
            }
            let e = if nu.is_zero() { 1.0 } else { (-nu.value * delta).exp() };
            sum += poly * e;
        }
        sum
    }

    /// Limit as `delta -> +infinity`. Fails when a `delta^s` term with
    /// `s > 0` carries no decay.
    pub fn limit_infinity(&self) -> Result<Complex64> {
        let mut out = Complex64::zero();
        for t in &self.terms {
            if t.nu.is_zero() {
                if t.s > 0 {
                    return Err(Error::NoLimit {
                        s: t.s,
                        coeff: format!("{}", t.c),
                    });
                }
                out += t.c;
            }
        }
        Ok(out)
    }

    /// Smallest nonzero rate present, if any.
    pub fn min_positive_rate(&self) -> Option<Rate> {
        self.terms.iter().map(|t| t.nu).find(|r| !r.is_zero())
    }

    /// `sum |c| delta^s e^{-nu delta}`, the scale of rounding in [`Self::eval`].
    pub fn eval_abs(&self, delta: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.c.norm() * delta.powi(t.s as i32) * (-t.nu.value * delta).exp())
            .sum()
    }

    /// Sum of `|c|` over all terms.
    pub fn l1(&self) -> f64 {
        self.terms.iter().map(|t| t.c.norm()).sum()
    }

    /// Largest `|c|` difference after aligning the two term lists.
    pub fn max_abs_diff(&self, other: &ExpPoly) -> f64 {
        self.sub(other).terms.iter().map(|t| t.c.norm()).fold(0.0, f64::max)
    }

    /// `[s, nu, re, im]` quadruples.
    pub fn to_quads(&self) -> Vec<(u32, f64, f64, f64)> {
        self.terms.iter().map(|t| (t.s, t.nu.value, t.c.re, t.c.im)).collect()
    }
}

/// Appends the terms of `k * a * b * exp(-nu delta)` to `raw` without
/// canonicalizing.
pub fn push_product(raw: &mut Vec<Term>, a: &ExpPoly, b: &ExpPoly, k: Complex64, nu: Rate) {
    for x in &a.terms {
        let xr = x.nu.add(&nu);
        let xc = x.c * k;
        for y in &b.terms {
            raw.push(Term {
                s: x.s + y.s,
                nu: xr.add(&y.nu),
                c: xc * y.c,
            });
        }
    }
}

pub(crate) fn check_cap(p: ExpPoly, cap: usize) -> Result<ExpPoly> {
    if p.len() > cap {
        return Err(Error::TermCapExceeded { len: p.len(), cap });
    }
    Ok(p)
}

fn integrate_term(t: &Term, raw: &mut Vec<Term>) {
    if t.nu.is_zero() {
        raw.push(Term {
            s: t.s + 1,
            nu: Rate::ZERO,
            c: t.c / (t.s + 1) as f64,
        });
        return;
    }
    // int_0^d l^s e^{-nu l} = s!/nu^{s+1} - sum_t s!/t! nu^{-(s+1-t)} d^t e^{-nu d}
    let nu = t.nu.value;
    let s = t.s;
    let mut coef = t.c / nu; // s!/s! nu^{-1}
    for p in (0..=s).rev() {
        raw.push(Term {
            s: p,
            nu: t.nu,
            c: -coef,
        });
        if p > 0 {
            coef = coef * p as f64 / nu;
        }
    }
    raw.push(Term {
        s: 0,
        nu: Rate::ZERO,
        c: coef,
    });
}

impl fmt::Debug for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_quads()).finish()
    }
}

impl Serialize for ExpPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_quads().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExpPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let quads: Vec<(u32, f64, f64, f64)> = Vec::deserialize(d)?;
        if quads.iter().any(|q| !(q.1 >= 0.0)) {
            return Err(serde::de::Error::custom("negative rate"));
        }
        Ok(Self::from_terms(
            quads
                .into_iter()
                .map(|(s, nu, re, im)| Term {
                    s,
                    nu: Rate::float(nu),
                    c: Complex64::new(re, im),
                })
                .collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn r(n: i64) -> Rate {
        Rate::exact(Rational64::from_integer(n))
    }

    #[test]
    fn products() {
        let a = ExpPoly::term(1, r(1), c(1.0));
        let b = ExpPoly::term(1, r(2), c(1.0));
        assert_eq!(a.mul(&b).unwrap(), ExpPoly::term(2, r(3), c(1.0)));
        let one_plus = ExpPoly::constant(c(1.0)).add(&ExpPoly::term(1, Rate::ZERO, c(1.0)));
        let e = ExpPoly::term(0, r(1), c(1.0));
        let want = ExpPoly::term(0, r(1), c(1.0)).add(&ExpPoly::term(1, r(1), c(1.0)));
        assert_eq!(one_plus.mul(&e).unwrap(), want);
        assert_eq!(a.mul(&ExpPoly::constant(c(1.0))).unwrap(), a);
    }

    #[test]
    fn integrals() {
        let nu = 0.7;
        let i = ExpPoly::term(0, Rate::float(nu), c(1.0)).integrate();
        for d in [0.0, 0.3, 2.0] {
            assert!((i.eval(d) - c((1.0 - (-nu * d).exp()) / nu)).norm() < 1e-15);
        }
        let i = ExpPoly::term(1, r(1), c(1.0)).integrate();
        let want = ExpPoly::constant(c(1.0))
            .sub(&ExpPoly::term(0, r(1), c(1.0)))
            .sub(&ExpPoly::term(1, r(1), c(1.0)));
        assert!(i.max_abs_diff(&want) < 1e-15);
        assert_eq!(i.limit_infinity().unwrap(), c(1.0));
        let i = ExpPoly::term(2, Rate::ZERO, c(1.0)).integrate();
        assert_eq!(i, ExpPoly::term(3, Rate::ZERO, c(1.0 / 3.0)));
    }

    #[test]
    fn evaluation_and_limits() {
        assert_eq!(ExpPoly::constant(c(1.0)).eval(17.0), c(1.0));
        let x = ExpPoly::term(1, r(1), c(1.0)).eval(1.0);
        assert!((x.re - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(ExpPoly::term(0, r(1), c(1.0)).limit_infinity().unwrap(), c(0.0));
        let p = ExpPoly::constant(c(3.0)).add(&ExpPoly::term(2, r(1), c(1.0)));
        assert_eq!(p.limit_infinity().unwrap(), c(3.0));
        assert!(matches!(
            ExpPoly::term(1, Rate::ZERO, c(1.0)).limit_infinity(),
            Err(Error::NoLimit { .. })
        ));
    }

    #[test]
    fn float_rates_merge_only_when_equal() {
        let a = ExpPoly::term(0, Rate::float(0.1 + 0.2), c(1.0));
        let b = ExpPoly::term(0, Rate::float(0.3), c(1.0));
        assert_eq!(a.add(&b).len(), 1);
        let d = ExpPoly::term(0, Rate::float(0.3 + 1e-9), c(1.0));
        assert_eq!(a.add(&d).len(), 2);
    }

    #[test]
    fn cap_enforced() {
        let mut raw = Vec::new();
        for k in 0..20 {
            raw.push(Term {
                s: 0,
                nu: r(k),
                c: c(1.0),
            });
        }
        let p = ExpPoly::from_terms(raw);
        assert!(matches!(p.mul_capped(&p, 30), Err(Error::TermCapExceeded { .. })));
        assert!(p.mul_capped(&p, 100).is_ok());
    }

    #[test]
    fn quads_round_trip() {
        let p = ExpPoly::term(2, Rate::float(1.5), Complex64::new(0.5, -0.25)).add(&ExpPoly::constant(c(2.0)));
        let js = serde_json::to_string(&p).unwrap();
        assert_eq!(js, "[[0,0.0,2.0,0.0],[2,1.5,0.5,-0.25]]");
        let back: ExpPoly = serde_json::from_str(&js).unwrap();
        assert_eq!(back, p);
    }
}
