//! Frequency vectors and everything derived from the pairing `<omega, q>`:
//! resonance detection, small divisors, the maxima `Omega_s` over l1-balls,
//! and the corank-one decomposition `omega = lambda q / p`.
//!
//! Two representations are supported. In rational mode resonance is decided
//! exactly. In float mode the caller declares generators of the resonance
//! lattice together with a tolerance; a pairing below tolerance for a vector
//! outside the declared lattice is reported as ambiguous instead of being
//! silently classified.

use num_integer::Integer;
use num_rational::{Ratio, Rational64};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

/// `(sigma_q, omega_q) = (sign <omega,q>, |<omega,q>|)`. `exact` carries the
/// divisor as a rational in rational mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Divisor {
    pub sign: Sign,
    pub value: f64,
    pub exact: Option<Rational64>,
}

impl Divisor {
    pub fn is_resonant(&self) -> bool {
        self.sign == Sign::Zero
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Rational(Vec<Rational64>),
    Float {
        values: Vec<f64>,
        lattice: Vec<Vec<i64>>,
        tol: f64,
    },
}

/// Frequency vector `omega` of the quadratic part `sum omega_j z_j zbar_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frequency {
    repr: Repr,
    floats: Vec<f64>,
}

/// `omega = lambda q / p` with `q` primitive, `p > 0`, `lambda > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorankOneData {
    pub q: Vec<i64>,
    pub p: u64,
    pub lambda: f64,
}

impl CorankOneData {
    /// Lower bound `lambda / p` for every nonresonant divisor.
    pub fn min_divisor(&self) -> f64 {
        self.lambda / self.p as f64
    }
}

impl Frequency {
    pub fn rational(values: Vec<Rational64>) -> Self {
        let floats = values.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect();
        Self {
            repr: Repr::Rational(values),
            floats,
        }
    }

    pub fn rational_from_ints(values: &[i64]) -> Self {
        Self::rational(values.iter().map(|&v| Rational64::from_integer(v)).collect())
    }

    /// Float mode. Every declared generator must pair to within `tol` of zero.
    pub fn float(values: Vec<f64>, lattice: Vec<Vec<i64>>, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("frequency values must be finite".into()));
        }
        for g in &lattice {
            if g.len() != values.len() {
                return Err(Error::DimensionMismatch {
                    expected: values.len(),
                    found: g.len(),
                });
            }
            let p: f64 = g.iter().zip(&values).map(|(a, b)| *a as f64 * b).sum();
            if p.abs() > tol {
                return Err(Error::InvalidInput(format!(
                    "declared lattice generator {g:?} pairs to {p:e}, above tolerance {tol:e}"
                )));
            }
        }
        Ok(Self {
            floats: values.clone(),
            repr: Repr::Float { values, lattice, tol },
        })
    }

    pub fn n(&self) -> usize {
        self.floats.len()
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.repr, Repr::Rational(_))
    }

    pub fn float_values(&self) -> &[f64] {
        &self.floats
    }

    pub fn rational_values(&self) -> Option<&[Rational64]> {
        match &self.repr {
            Repr::Rational(v) => Some(v),
            Repr::Float { .. } => None,
        }
    }

    /// Declared generators (float mode); empty in rational mode.
    pub fn declared_lattice(&self) -> &[Vec<i64>] {
        match &self.repr {
            Repr::Rational(_) => &[],
            Repr::Float { lattice, .. } => lattice,
        }
    }

    /// Common denominator of the rational values.
    pub fn denominator(&self) -> Option<i64> {
        self.rational_values()
            .map(|v| v.iter().fold(1i64, |acc, r| acc.lcm(r.denom())))
    }

    fn check_len(&self, q: &[i64]) -> Result<()> {
        if q.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: q.len(),
            });
        }
        Ok(())
    }

    /// `(sign <omega,q>, |<omega,q>|)`.
    pub fn sigma_omega(&self, q: &[i64]) -> Result<Divisor> {
        self.check_len(q)?;
        match &self.repr {
            Repr::Rational(values) => {
                let p: Rational64 = values
                    .iter()
                    .zip(q)
                    .map(|(w, &qi)| w * Rational64::from_integer(qi))
                    .fold(Rational64::zero(), |a, b| a + b);
                let sign = if p.is_zero() {
                    Sign::Zero
                } else if p.is_positive() {
                    Sign::Positive
                } else {
                    Sign::Negative
                };
                let abs = p.abs();
                Ok(Divisor {
                    sign,
                    value: abs.to_f64().unwrap_or(f64::NAN),
                    exact: Some(abs),
                })
            }
            Repr::Float { values, lattice, tol } => {
                if in_rational_span(lattice, q) {
                    return Ok(Divisor {
                        sign: Sign::Zero,
                        value: 0.0,
                        exact: None,
                    });
                }
                let p: f64 = values.iter().zip(q).map(|(w, &qi)| w * qi as f64).sum();
                if p.abs() <= *tol {
                    return Err(Error::AmbiguousResonance {
                        q: q.to_vec(),
                        value: p,
                    });
                }
                Ok(Divisor {
                    sign: if p > 0.0 { Sign::Positive } else { Sign::Negative },
                    value: p.abs(),
                    exact: None,
                })
            }
        }
    }

    pub fn is_resonant(&self, q: &[i64]) -> Result<bool> {
        Ok(self.sigma_omega(q)?.is_resonant())
    }

    /// `Omega_s = max { 1/|<omega,q>| : q nonresonant, |q|_1 <= s }`, by brute
    /// force over the l1-ball. The ball has `O((2s)^n / n!)` points, fine for
    /// `n <= 4`, `s <= 40`.
    pub fn omega_capital(&self, s: usize) -> Result<f64> {
        if s == 0 {
            return Err(Error::DegenerateLattice { bound: 0 });
        }
        let mut best: Option<f64> = None;
        let mut err: Option<Error> = None;
        for_each_in_half_ball(self.n(), s, &mut |q| {
            if err.is_some() {
                return;
            }
            match self.sigma_omega(q) {
                Ok(d) if !d.is_resonant() => {
                    let inv = 1.0 / d.value;
                    best = Some(best.map_or(inv, |b: f64| b.max(inv)));
                }
                Ok(_) => {}
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        best.ok_or(Error::DegenerateLattice { bound: s })
    }

    /// Rank of the resonance lattice. Rational mode: exact, `n - 1` for a
    /// nonzero vector. Float mode: rank of the declared generators (declared,
    /// not discovered).
    pub fn lattice_rank(&self, _search_bound: usize) -> usize {
        match &self.repr {
            Repr::Rational(values) => {
                if values.iter().all(|v| v.is_zero()) {
                    self.n()
                } else {
                    self.n() - 1
                }
            }
            Repr::Float { lattice, .. } => integer_rank(lattice),
        }
    }

    /// Float-mode consistency audit: every `q` with `|q|_1 <= q_max` outside
    /// the declared lattice must pair above tolerance. Rational mode always passes.
    pub fn audit(&self, q_max: usize) -> Result<()> {
        if self.is_rational() {
            return Ok(());
        }
        let mut err = None;
        for_each_in_half_ball(self.n(), q_max, &mut |q| {
            if err.is_none() {
                if let Err(e) = self.sigma_omega(q) {
                    err = Some(e);
                }
            }
        });
        err.map_or(Ok(()), Err)
    }

    /// `omega = lambda q / p` with `GCD(|q_1|..|q_n|, p) = 1`.
    pub fn corank1_decompose(&self) -> Result<CorankOneData> {
        let n = self.n();
        let rank = self.lattice_rank(0);
        if n == 0 || rank != n - 1 {
            return Err(Error::NotCorankOne {
                rank,
                required: n.saturating_sub(1),
            });
        }
        match &self.repr {
            Repr::Rational(values) => {
                let l = self.denominator().unwrap_or(1);
                let v: Vec<i64> = values
                    .iter()
                    .map(|r| (r * Rational64::from_integer(l)).to_integer())
                    .collect();
                let g = v.iter().fold(0i64, |acc, x| acc.gcd(x));
                let q: Vec<i64> = v.iter().map(|x| x / g).collect();
                let scale = Rational64::new(g, l);
                Ok(CorankOneData {
                    q,
                    p: *scale.denom() as u64,
                    lambda: *scale.numer() as f64,
                })
            }
            Repr::Float { values, lattice, tol } => {
                let mut q = integer_kernel_vector(lattice, n).ok_or(Error::NotCorankOne { rank, required: n - 1 })?;
                let pairing: f64 = q.iter().zip(values).map(|(a, b)| *a as f64 * b).sum();
                if pairing < 0.0 {
                    q.iter_mut().for_each(|x| *x = -*x);
                }
                let qq: f64 = q.iter().map(|x| (*x * *x) as f64).sum();
                let lambda = pairing.abs() / qq;
                let misfit = q
                    .iter()
                    .zip(values)
                    .map(|(a, b)| (lambda * *a as f64 - b).abs())
                    .fold(0.0, f64::max);
                if misfit > *tol * (1.0 + values.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
                    return Err(Error::NotCorankOne { rank, required: n - 1 });
                }
                Ok(CorankOneData { q, p: 1, lambda })
            }
        }
    }
}

/// Calls `f` on one representative of each `{q, -q}` pair with
/// `0 < |q|_1 <= s`: those whose first nonzero entry is positive.
fn for_each_in_half_ball(n: usize, s: usize, f: &mut dyn FnMut(&[i64])) {
    fn rec(pos: usize, left: i64, leading: bool, q: &mut Vec<i64>, f: &mut dyn FnMut(&[i64])) {
        if pos == q.len() {
            if !leading {
                f(q);
            }
            return;
        }
        let lo = if leading { 0 } else { -left };
        for v in lo..=left {
            q[pos] = v;
            rec(pos + 1, left - v.abs(), leading && v == 0, q, f);
        }
        q[pos] = 0;
    }
    let mut q = vec![0i64; n];
    rec(0, s as i64, true, &mut q, f);
}

type Q128 = Ratio<i128>;

fn row_echelon(rows: &[Vec<i64>]) -> Vec<Vec<Q128>> {
    let mut m: Vec<Vec<Q128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| Q128::from_integer(x as i128)).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, piv);
        let pv = m[rank][c];
        for x in m[rank].iter_mut() {
            *x /= pv;
        }
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let factor = m[r][c];
                for cc in 0..cols {
                    let sub = factor * m[rank][cc];
                    m[r][cc] -= sub;
                }
            }
        }
        rank += 1;
    }
    m.truncate(rank);
    m
}

fn integer_rank(rows: &[Vec<i64>]) -> usize {
    row_echelon(rows).len()
}

fn in_rational_span(generators: &[Vec<i64>], q: &[i64]) -> bool {
    if q.iter().all(|&x| x == 0) {
        return true;
    }
    if generators.is_empty() {
        return false;
    }
    let base = integer_rank(generators);
    let mut rows = generators.to_vec();
    rows.push(q.to_vec());
    integer_rank(&rows) == base
}

/// Primitive integer generator of the kernel of a rank `n-1` integer matrix.
fn integer_kernel_vector(rows: &[Vec<i64>], n: usize) -> Option<Vec<i64>> {
    let ech = row_echelon(rows);
    if ech.len() + 1 != n {
        return None;
    }
    // reduced row echelon: find the free column
    let pivots: Vec<usize> = ech
        .iter()
        .map(|r| r.iter().position(|x| !x.is_zero()).expect("nonzero row"))
        .collect();
    let free = (0..n).find(|c| !pivots.contains(c))?;
    let mut v = vec![Q128::zero(); n];
    v[free] = Q128::from_integer(1);
    for (r, &pc) in ech.iter().zip(&pivots) {
        v[pc] = -r[free];
    }
    let l = v.iter().fold(1i128, |acc, x| acc.lcm(x.denom()));
    let ints: Vec<i128> = v.iter().map(|x| (x * Q128::from_integer(l)).to_integer()).collect();
    let g = ints.iter().fold(0i128, |acc, x| acc.gcd(x));
    Some(ints.iter().map(|x| (x / g) as i64).collect())
}

/// JSON form of a frequency vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum FrequencySpec {
    Rational {
        values: Vec<String>,
    },
    Float {
        values: Vec<f64>,
        #[serde(default)]
        lattice: Vec<Vec<i64>>,
        #[serde(default = "default_tol")]
        tol: f64,
    },
}

fn default_tol() -> f64 {
    1e-9
}

impl FrequencySpec {
    pub fn build(&self) -> Result<Frequency> {
        match self {
            FrequencySpec::Rational { values } => {
                let parsed: std::result::Result<Vec<Rational64>, _> =
                    values.iter().map(|s| s.trim().parse::<Rational64>()).collect();
                parsed
                    .map(Frequency::rational)
                    .map_err(|e| Error::InvalidInput(format!("bad rational frequency: {e}")))
            }
            FrequencySpec::Float { values, lattice, tol } => Frequency::float(values.clone(), lattice.clone(), *tol),
        }
    }
}

impl From<&Frequency> for FrequencySpec {
    fn from(f: &Frequency) -> Self {
        match &f.repr {
            Repr::Rational(v) => FrequencySpec::Rational {
                values: v.iter().map(|r| r.to_string()).collect(),
            },
            Repr::Float { values, lattice, tol } => FrequencySpec::Float {
                values: values.clone(),
                lattice: lattice.clone(),
                tol: *tol,
            },
        }
    }
}

impl Serialize for Frequency {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FrequencySpec::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Frequency {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        FrequencySpec::deserialize(d)?.build().map_err(serde::de::Error::custom)
    }
}
