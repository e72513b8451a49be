use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// Exponent vector `(k, kbar)` of the monomial `z^k zbar^kbar` in `2n` variables.
///
/// Ordering is graded: first by total degree, then lexicographically on
/// `(k, kbar)`. Sorted containers therefore iterate degree by degree.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    deg: u32,
    exps: SmallVec<[u16; 8]>,
}

impl MultiIndex {
    pub fn new(k: &[u16], kbar: &[u16]) -> Self {
        assert_eq!(k.len(), kbar.len(), "k and kbar must have equal length");
        let mut exps: SmallVec<[u16; 8]> = SmallVec::with_capacity(2 * k.len());
        exps.extend_from_slice(k);
        exps.extend_from_slice(kbar);
        Self::from_exponents(exps)
    }

    fn from_exponents(exps: SmallVec<[u16; 8]>) -> Self {
        let deg = exps.iter().map(|&e| e as u32).sum();
        Self { deg, exps }
    }

    /// The index of the constant monomial.
    pub fn zero(n: usize) -> Self {
        Self {
            deg: 0,
            exps: SmallVec::from_elem(0, 2 * n),
        }
    }

    /// `e_j = (e_j, e_j)`, the exponent of `z_j zbar_j`.
    pub fn diagonal_unit(n: usize, j: usize) -> Self {
        let mut m = Self::zero(n);
        m.exps[j] = 1;
        m.exps[n + j] = 1;
        m.deg = 2;
        m
    }

    /// Degrees of freedom.
    pub fn n(&self) -> usize {
        self.exps.len() / 2
    }

    /// Total degree `|k| + |kbar|`.
    pub fn degree(&self) -> usize {
        self.deg as usize
    }

    pub fn k(&self) -> &[u16] {
        &self.exps[..self.n()]
    }

    pub fn kbar(&self) -> &[u16] {
        &self.exps[self.n()..]
    }

    pub fn exponents(&self) -> &[u16] {
        &self.exps
    }

    /// `k' = kbar - k`, the integer vector whose pairing with the frequency
    /// decides the monomial's resonance class.
    pub fn prime(&self) -> Vec<i64> {
        let n = self.n();
        (0..n).map(|j| self.exps[n + j] as i64 - self.exps[j] as i64).collect()
    }

    /// `k* = (kbar, k)`.
    pub fn star(&self) -> Self {
        let n = self.n();
        let mut exps: SmallVec<[u16; 8]> = SmallVec::with_capacity(2 * n);
        exps.extend_from_slice(&self.exps[n..]);
        exps.extend_from_slice(&self.exps[..n]);
        Self { deg: self.deg, exps }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        let exps = self.exps.iter().zip(other.exps.iter()).map(|(a, b)| a + b).collect();
        Self {
            deg: self.deg + other.deg,
            exps,
        }
    }

    /// `self - other`, or `None` if some exponent would go negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        let mut exps: SmallVec<[u16; 8]> = SmallVec::with_capacity(self.exps.len());
        for (a, b) in self.exps.iter().zip(other.exps.iter()) {
            exps.push(a.checked_sub(*b)?);
        }
        Some(Self {
            deg: self.deg - other.deg,
            exps,
        })
    }

    /// Removes one `z_j` and one `zbar_j`.
    pub fn lower_diagonal(&self, j: usize) -> Option<Self> {
        let n = self.n();
        if self.exps[j] == 0 || self.exps[n + j] == 0 {
            return None;
        }
        let mut out = self.clone();
        out.exps[j] -= 1;
        out.exps[n + j] -= 1;
        out.deg -= 2;
        Some(out)
    }

    /// Adds one `z_j` and one `zbar_j`.
    pub fn raise_diagonal(&self, j: usize) -> Self {
        let n = self.n();
        let mut out = self.clone();
        out.exps[j] += 1;
        out.exps[n + j] += 1;
        out.deg += 2;
        out
    }

    /// Multinomial coefficient `|k|! / (prod k_i! prod kbar_i!)`: the
    /// coefficient of this monomial in `(z_1 + ... + zbar_n)^{|k|}`.
    pub fn multinomial(&self) -> f64 {
        let mut out = 1.0;
        let mut running = 0u32;
        for &e in self.exps.iter() {
            for i in 1..=e as u32 {
                running += 1;
                out *= running as f64 / i as f64;
            }
        }
        out
    }

    /// All indices in `2n` variables with total degree `deg`, in ascending order.
    pub fn all_of_degree(n: usize, deg: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur: SmallVec<[u16; 8]> = SmallVec::from_elem(0, 2 * n);
        fn rec(pos: usize, left: usize, cur: &mut SmallVec<[u16; 8]>, out: &mut Vec<MultiIndex>) {
            let len = cur.len();
            if pos == len - 1 {
                cur[pos] = left as u16;
                out.push(MultiIndex::from_exponents(cur.clone()));
                return;
            }
            for e in 0..=left {
                cur[pos] = e as u16;
                rec(pos + 1, left - e, cur, out);
            }
            cur[pos] = 0;
        }
        if n == 0 {
            return out;
        }
        rec(0, deg, &mut cur, &mut out);
        out.sort();
        out
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?};{:?})", self.k(), self.kbar())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Serialized form `{"k": [...], "kbar": [...]}`.
#[derive(Serialize, Deserialize)]
struct MultiIndexRepr {
    k: Vec<u16>,
    kbar: Vec<u16>,
}

impl Serialize for MultiIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MultiIndexRepr {
            k: self.k().to_vec(),
            kbar: self.kbar().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MultiIndexRepr::deserialize(d)?;
        if r.k.len() != r.kbar.len() {
            return Err(serde::de::Error::custom("k and kbar differ in length"));
        }
        Ok(MultiIndex::new(&r.k, &r.kbar))
    }
}
