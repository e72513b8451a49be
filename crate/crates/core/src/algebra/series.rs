use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::MultiIndex;
use crate::error::{Error, Result};

/// Sparse truncated power series in `z_1..z_n, zbar_1..zbar_n`.
///
/// Invariants: every stored index has degree `<= max_degree`, every stored
/// coefficient is nonzero (exact zeros are removed, nothing else is pruned
/// inside arithmetic). `truncated` records whether some operation producing
/// this value dropped terms above `max_degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalSeries {
    n: usize,
    max_degree: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
    truncated: bool,
}

impl Serialize for FormalSeries {
    /// Serializes as the term literal.
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_literal().serialize(ser)
    }
}

/// One entry of the JSON series literal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesTerm {
    pub k: Vec<u16>,
    pub kbar: Vec<u16>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl FormalSeries {
    pub fn new(n: usize, max_degree: usize) -> Self {
        Self {
            n,
            max_degree,
            coeffs: BTreeMap::new(),
            truncated: false,
        }
    }

    pub fn monomial(n: usize, max_degree: usize, k: MultiIndex, c: Complex64) -> Self {
        let mut s = Self::new(n, max_degree);
        s.add_term(k, c);
        s
    }

    /// The constant series `c`.
    pub fn constant(n: usize, max_degree: usize, c: Complex64) -> Self {
        Self::monomial(n, max_degree, MultiIndex::zero(n), c)
    }

    pub fn from_terms<I>(n: usize, max_degree: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut s = Self::new(n, max_degree);
        for (k, c) in terms {
            s.add_term(k, c);
        }
        s
    }

    /// Parses the JSON literal format. An empty literal needs `n` explicitly.
    pub fn from_literal(n: Option<usize>, max_degree: usize, terms: &[SeriesTerm]) -> Result<Self> {
        let n = match (n, terms.first()) {
            (Some(n), _) => n,
            (None, Some(t)) => t.k.len(),
            (None, None) => {
                return Err(Error::InvalidInput(
                    "cannot infer the number of degrees of freedom from an empty series".into(),
                ))
            }
        };
        let mut s = Self::new(n, max_degree);
        for t in terms {
            if t.k.len() != n || t.kbar.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: t.k.len().max(t.kbar.len()),
                });
            }
            if !t.re.is_finite() || !t.im.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite coefficient at k={:?} kbar={:?}",
                    t.k, t.kbar
                )));
            }
            s.add_term(MultiIndex::new(&t.k, &t.kbar), Complex64::new(t.re, t.im));
        }
        Ok(s)
    }

    pub fn from_json(n: Option<usize>, max_degree: usize, json: &str) -> Result<Self> {
        let terms: Vec<SeriesTerm> = serde_json::from_str(json)?;
        Self::from_literal(n, max_degree, &terms)
    }

    pub fn to_literal(&self) -> Vec<SeriesTerm> {
        self.coeffs
            .iter()
            .map(|(k, c)| SeriesTerm {
                k: k.k().to_vec(),
                kbar: k.kbar().to_vec(),
                re: c.re,
                im: c.im,
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_literal()).expect("series literal serializes")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Whether any operation leading to this value dropped terms above the cap.
    pub fn truncation_touched(&self) -> bool {
        self.truncated
    }

    pub(crate) fn mark_truncated(&mut self) {
        self.truncated = true;
    }

    pub fn get(&self, k: &MultiIndex) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn contains(&self, k: &MultiIndex) -> bool {
        self.coeffs.contains_key(k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> + '_ {
        self.coeffs.iter()
    }

    pub fn indices(&self) -> impl Iterator<Item = &MultiIndex> + '_ {
        self.coeffs.keys()
    }

    pub fn as_map(&self) -> &BTreeMap<MultiIndex, Complex64> {
        &self.coeffs
    }

    /// Adds `c` to the coefficient of `k`. Degrees above the cap are dropped
    /// and flagged; exact cancellations are removed.
    pub fn add_term(&mut self, k: MultiIndex, c: Complex64) {
        debug_assert_eq!(k.n(), self.n);
        if k.degree() > self.max_degree {
            if c != Complex64::default() {
                self.truncated = true;
            }
            return;
        }
        if c == Complex64::default() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(k) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = *o.get() + c;
                if sum == Complex64::default() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    /// Overwrites the coefficient of `k`.
    pub fn set(&mut self, k: MultiIndex, c: Complex64) {
        if k.degree() > self.max_degree {
            if c != Complex64::default() {
                self.truncated = true;
            }
            return;
        }
        if c == Complex64::default() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, c);
        }
    }

    /// Smallest degree carrying a nonzero coefficient.
    pub fn min_degree(&self) -> Option<usize> {
        self.coeffs.keys().next().map(MultiIndex::degree)
    }

    pub fn max_stored_degree(&self) -> Option<usize> {
        self.coeffs.keys().next_back().map(MultiIndex::degree)
    }

    /// Membership in the subspace of series starting at degree three.
    pub fn is_diamond(&self) -> bool {
        self.min_degree().is_none_or(|d| d >= 3)
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let mut out = Self::new(self.n, self.max_degree.min(other.max_degree));
        out.truncated = self.truncated || other.truncated;
        for (k, c) in self.coeffs.iter().chain(other.coeffs.iter()) {
            out.add_term(k.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::new(self.n, self.max_degree);
        out.truncated = self.truncated;
        for (k, c) in &self.coeffs {
            out.add_term(k.clone(), c * s);
        }
        out
    }

    /// Truncated Cauchy product. Contributions to each output coefficient are
    /// summed in lexicographic order of the `(a, b)` index pair.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let cap = self.max_degree.min(other.max_degree);
        let mut out = Self::new(self.n, cap);
        out.truncated = self.truncated || other.truncated;
        for (ka, ca) in &self.coeffs {
            for (kb, cb) in &other.coeffs {
                if ka.degree() + kb.degree() > cap {
                    out.truncated = true;
                    break;
                }
                out.add_term(ka.add(kb), ca * cb);
            }
        }
        Ok(out)
    }

    /// Partial derivative in `z_j` (`conj = false`) or `zbar_j` (`conj = true`).
    pub fn derivative(&self, j: usize, conj: bool) -> Self {
        let pos = if conj { self.n + j } else { j };
        let mut out = Self::new(self.n, self.max_degree);
        out.truncated = self.truncated;
        for (k, c) in &self.coeffs {
            let e = k.exponents()[pos];
            if e == 0 {
                continue;
            }
            let mut kk = k.exponents().to_vec();
            kk[pos] -= 1;
            let idx = MultiIndex::new(&kk[..self.n], &kk[self.n..]);
            out.add_term(idx, c * e as f64);
        }
        out
    }

    /// Terms of degree exactly `d`.
    pub fn homogeneous(&self, d: usize) -> Self {
        self.filter(|k, _| k.degree() == d)
    }

    /// Terms with `lo <= degree <= hi`.
    pub fn degree_band(&self, lo: usize, hi: usize) -> Self {
        self.filter(|k, _| (lo..=hi).contains(&k.degree()))
    }

    pub fn filter<F: Fn(&MultiIndex, &Complex64) -> bool>(&self, keep: F) -> Self {
        let mut out = Self::new(self.n, self.max_degree);
        out.truncated = self.truncated;
        for (k, c) in &self.coeffs {
            if keep(k, c) {
                out.coeffs.insert(k.clone(), *c);
            }
        }
        out
    }

    /// Same coefficients under a new cap; terms above it are dropped and flagged.
    pub fn with_max_degree(&self, max_degree: usize) -> Self {
        let mut out = Self::new(self.n, max_degree);
        out.truncated = self.truncated;
        for (k, c) in &self.coeffs {
            out.add_term(k.clone(), *c);
        }
        out
    }

    /// Copy with coefficients of modulus `<= eps` removed. For reports only.
    pub fn pruned(&self, eps: f64) -> Self {
        self.filter(|_, c| c.norm() > eps)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max_k |A_k - B_k|` over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, c) in &self.coeffs {
            worst = worst.max((c - other.get(k)).norm());
        }
        for (k, c) in &other.coeffs {
            if !self.coeffs.contains_key(k) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    /// Largest `|conj(H_k) - H_{k*}|`; zero exactly for members of the real subspace.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, c) in &self.coeffs {
            worst = worst.max((c.conj() - self.get(&k.star())).norm());
        }
        worst
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.reality_defect() <= tol
    }

    /// `sum_k |H_k| rho^{|k|}`. This is an upper estimate of the sup-norm on
    /// the polydisk of radius `rho`, not the sup itself.
    pub fn norm_upper_estimate(&self, rho: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, c)| c.norm() * rho.powi(k.degree() as i32))
            .sum()
    }

    /// Evaluates the truncated series at `(z, zbar)`; `point` holds the `2n`
    /// values in that order.
    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        assert_eq!(point.len(), 2 * self.n);
        let mut acc = Complex64::default();
        for (k, c) in &self.coeffs {
            let mut term = *c;
            for (e, z) in k.exponents().iter().zip(point) {
                if *e > 0 {
                    term *= z.powu(*e as u32);
                }
            }
            acc += term;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn mono(k: &[u16], kbar: &[u16], v: f64) -> FormalSeries {
        FormalSeries::monomial(k.len(), 8, MultiIndex::new(k, kbar), c(v))
    }

    #[test]
    fn add_identity_and_cancellation() {
        let a = mono(&[3], &[0], 1.0);
        let zero = FormalSeries::new(1, 8);
        assert_eq!(a.add(&zero).unwrap(), a);
        let sum = a.add(&mono(&[3], &[0], -1.0)).unwrap();
        assert!(sum.is_empty());
    }

    #[test]
    fn add_coefficients() {
        let s = mono(&[2], &[1], 2.0).add(&mono(&[2], &[1], 3.0)).unwrap();
        assert_eq!(s.get(&MultiIndex::new(&[2], &[1])), c(5.0));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn add_takes_min_cap() {
        let a = FormalSeries::monomial(1, 4, MultiIndex::new(&[4], &[0]), c(1.0));
        let b = FormalSeries::monomial(1, 3, MultiIndex::new(&[3], &[0]), c(1.0));
        let s = a.add(&b).unwrap();
        assert_eq!(s.max_degree(), 3);
        assert_eq!(s.len(), 1);
        assert!(s.truncation_touched());
    }

    #[test]
    fn dimension_mismatch() {
        let a = mono(&[3], &[0], 1.0);
        let b = mono(&[3, 0], &[0, 0], 1.0);
        assert!(matches!(a.add(&b), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn mul_unit_and_monomials() {
        let one = FormalSeries::constant(2, 8, c(1.0));
        let a = mono(&[1, 2], &[0, 1], 3.0);
        assert_eq!(a.mul(&one).unwrap(), a);
        let z1 = mono(&[1, 0], &[0, 0], 1.0);
        let zb1 = mono(&[0, 0], &[1, 0], 1.0);
        assert_eq!(z1.mul(&zb1).unwrap(), mono(&[1, 0], &[1, 0], 1.0));
    }

    #[test]
    fn mul_binomial() {
        let s = mono(&[1, 0], &[0, 0], 1.0).add(&mono(&[0, 0], &[0, 1], 1.0)).unwrap();
        let sq = s.mul(&s).unwrap();
        assert_eq!(sq.len(), 3);
        assert_eq!(sq.get(&MultiIndex::new(&[2, 0], &[0, 0])), c(1.0));
        assert_eq!(sq.get(&MultiIndex::new(&[1, 0], &[0, 1])), c(2.0));
        assert_eq!(sq.get(&MultiIndex::new(&[0, 0], &[0, 2])), c(1.0));
    }

    #[test]
    fn mul_truncates_and_flags() {
        let s = FormalSeries::monomial(1, 4, MultiIndex::new(&[3], &[0]), c(1.0));
        let p = s.mul(&s).unwrap();
        assert!(p.is_empty());
        assert!(p.truncation_touched());
    }

    #[test]
    fn norm_estimates() {
        assert_eq!(FormalSeries::new(1, 5).norm_upper_estimate(0.3), 0.0);
        let z3 = mono(&[3], &[0], 1.0);
        assert!((z3.norm_upper_estimate(0.5) - 0.125).abs() < 1e-15);
        let s = mono(&[1], &[0], 1.0).add(&mono(&[0], &[1], 1.0)).unwrap();
        assert_eq!(s.norm_upper_estimate(1.0), 2.0);
        // z + zbar attains 2 at z = zbar = 1 on the closed unit polydisk.
        let v = s.eval(&[c(1.0), c(1.0)]);
        assert_eq!(v, c(2.0));
    }

    #[test]
    fn literal_roundtrip() {
        let json = r#"[{"k":[1,0],"kbar":[0,2],"re":0.5,"im":-1.0},{"k":[3,0],"kbar":[0,0],"re":2.0,"im":0.0}]"#;
        let s = FormalSeries::from_json(None, 6, json).unwrap();
        assert_eq!(s.n(), 2);
        assert_eq!(s.len(), 2);
        let back = FormalSeries::from_json(Some(2), 6, &s.to_json()).unwrap();
        assert_eq!(back, s);
        assert!(FormalSeries::from_json(None, 6, "[]").is_err());
        assert!(FormalSeries::from_json(Some(2), 6, "[]").unwrap().is_empty());
    }

    #[test]
    fn reality() {
        let mut s = FormalSeries::new(1, 5);
        s.add_term(MultiIndex::new(&[3], &[0]), Complex64::new(1.0, 2.0));
        s.add_term(MultiIndex::new(&[0], &[3]), Complex64::new(1.0, -2.0));
        assert!(s.is_real(0.0));
        s.add_term(MultiIndex::new(&[2], &[1]), Complex64::new(0.0, 1.0));
        assert!(!s.is_real(1e-12));
    }
}
