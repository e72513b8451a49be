use serde::Serialize;

use crate::error::{Error, Result};
use crate::resonance::Frequency;

/// Small-divisor sequence `a_j` and the convex sequence `b_s` built from it.
#[derive(Clone, Debug, Serialize)]
pub struct SequencePair {
    /// `a_0 ..= a_J`.
    pub a: Vec<f64>,
    /// `b_s` for `s = 3 ..= s_max`, stored from index 0.
    b: Vec<f64>,
    pub j_max: usize,
    /// How `a_j` is continued past `J`.
    pub tail_model: String,
}

/// First index of stored `b`.
pub const B_START: usize = 3;

/// Anchor `s = 2^j + 2`.
pub fn anchor(j: usize) -> usize {
    (1usize << j) + 2
}

impl SequencePair {
    /// Builds a pair from explicit `b_s` values, `s = 3, 4, ...`. Used for
    /// user-supplied sequences that do not come from [`b_from_a`].
    pub fn from_b(b: Vec<f64>) -> Self {
        Self {
            a: Vec::new(),
            b,
            j_max: 0,
            tail_model: "none".into(),
        }
    }

    pub fn s_max(&self) -> usize {
        B_START + self.b.len() - 1
    }

    /// `b_s`. Indices below 3 read `b_3`; indices past the stored range read
    /// the last value (the frozen tail makes `b` constant there).
    pub fn b(&self, s: usize) -> f64 {
        if self.b.is_empty() {
            return 0.0;
        }
        let i = s.saturating_sub(B_START).min(self.b.len() - 1);
        self.b[i]
    }

    pub fn b_values(&self) -> &[f64] {
        &self.b
    }

    /// `|exp(b_{2^{j+1}+2} - 2 b_{2^j+2}) - a_j| / a_j` for `j` with both
    /// anchors stored.
    pub fn identity_defects(&self) -> Vec<(usize, f64)> {
        (0..self.a.len())
            .filter(|j| anchor(j + 1) <= self.s_max())
            .map(|j| {
                let v = (self.b(anchor(j + 1)) - 2.0 * self.b(anchor(j))).exp();
                (j, (v - self.a[j]).abs() / self.a[j])
            })
            .collect()
    }
}

/// `a_j = n 2^{2n+j} (2^j+2)^{2n+1} Omega_{2^j+2}`, `j = 0..=J`.
pub fn make_a_sequence(omega: &Frequency, n: usize, j_max: usize) -> Result<Vec<f64>> {
    (0..=j_max)
        .map(|j| {
            let s = anchor(j);
            let big = omega.omega_capital(s)?;
            Ok(n as f64 * 2f64.powi((2 * n + j) as i32) * (s as f64).powi(2 * n as i32 + 1) * big)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BrunoVerdict {
    EvidenceYes,
    EvidenceNo,
}

/// Partial sum `sum_{j<=J} 2^{-j} ln a_j` and a verdict from the trend of
/// the last terms. Finitely many terms cannot prove the condition; the
/// verdict is evidence only: yes when the last terms are zero or shrink at
/// least geometrically with ratio 3/4.
pub fn bruno_check(a: &[f64], j_max: usize) -> Result<(f64, BrunoVerdict)> {
    if a.len() <= j_max {
        return Err(Error::InvalidInput(format!(
            "need a_0..a_{j_max}, got {} terms",
            a.len()
        )));
    }
    if let Some(j) = a.iter().position(|x| !(*x >= 1.0)) {
        return Err(Error::InvalidInput(format!("a_{j} = {} is below 1", a[j])));
    }
    let terms: Vec<f64> = (0..=j_max).map(|j| a[j].ln() / 2f64.powi(j as i32)).collect();
    let sum = terms.iter().sum();
    let verdict = if j_max == 0 {
        BrunoVerdict::EvidenceYes
    } else {
        let last = terms[j_max];
        let prev = terms[j_max - 1];
        if last == 0.0 || last <= 0.75 * prev {
            BrunoVerdict::EvidenceYes
        } else {
            BrunoVerdict::EvidenceNo
        }
    };
    Ok((sum, verdict))
}

/// Anchors `b_{2^i+2} = -1/2 sum_{j>=0} 2^{-j} ln a_{i+j}` with `a_j = a_J`
/// for `j > J`, and linear interpolation between anchors. Stored through
/// `s = 2^{J+1} + 2`.
pub fn b_from_a(a: &[f64], j_max: usize) -> Result<SequencePair> {
    let (_, verdict) = bruno_check(a, j_max)?;
    if verdict == BrunoVerdict::EvidenceNo {
        return Err(Error::Precondition {
            op: "b_from_a",
            detail: "partial sums give no evidence of the Bruno condition".into(),
        });
    }
    if a.windows(2).take(j_max).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("a_j must be nondecreasing".into()));
    }
    let ln_a = |j: usize| a[j.min(j_max)].ln();
    let anchor_value = |i: usize| -> f64 {
        if i >= j_max {
            return -ln_a(j_max);
        }
        let head: f64 = (0..j_max - i).map(|j| ln_a(i + j) / 2f64.powi(j as i32)).sum();
        let tail = ln_a(j_max) * 2f64.powi(1 - (j_max - i) as i32);
        -0.5 * (head + tail)
    };
    let s_max = anchor(j_max + 1);
    let mut b = Vec::with_capacity(s_max - B_START + 1);
    for i in 0..=j_max {
        let (lo, hi) = (anchor(i), anchor(i + 1));
        let (bl, bh) = (anchor_value(i), anchor_value(i + 1));
        for s in lo..hi {
            let t = (s - lo) as f64 / (hi - lo) as f64;
            b.push((1.0 - t) * bl + t * bh);
        }
    }
    b.push(anchor_value(j_max + 1));
    Ok(SequencePair {
        a: a[..=j_max].to_vec(),
        b,
        j_max,
        tail_model: format!("a_j frozen at a_{j_max} for j > {j_max}"),
    })
}

/// Worst values of the two convexity inequalities over all index triples in
/// the stored range. Both are nonnegative for a convex sequence.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvexityReport {
    /// `min (l-k) b_m + (m-l) b_k + (k-m) b_l` over `m < k < l`.
    pub three_point_min: f64,
    /// `min b_{k-m} + b_{l+m} - b_k - b_l` over `m >= 1`, `k - m`, `k <= l`.
    pub spread_min: f64,
    pub triples: usize,
    pub holds: bool,
}

pub fn convexity_inequalities(seq: &SequencePair, tol: f64) -> Result<ConvexityReport> {
    let lo = B_START;
    let hi = seq.s_max();
    if hi < lo + 2 {
        return Err(Error::InvalidInput("sequence too short for convexity checks".into()));
    }
    let b = |s: usize| seq.b(s);
    let mut three = f64::INFINITY;
    let mut spread = f64::INFINITY;
    let mut triples = 0;
    for m in lo..=hi {
        for k in m + 1..=hi {
            for l in k + 1..=hi {
                let v = (l - k) as f64 * b(m) + (m as f64 - l as f64) * b(k) + (k - m) as f64 * b(l);
                three = three.min(v);
                triples += 1;
            }
        }
    }
    for k in lo..=hi {
        for l in k..=hi {
            for m in 1..k {
                if k - m < lo || l + m > hi {
                    continue;
                }
                spread = spread.min(b(k - m) + b(l + m) - b(k) - b(l));
                triples += 1;
            }
        }
    }
    Ok(ConvexityReport {
        three_point_min: three,
        spread_min: spread,
        triples,
        holds: three >= -tol && spread >= -tol,
    })
}

/// `2^J b_{2^{J-1}+2} - (2^J + 2^{J-1}) b_{2^J+2} + 2^{J-1} b_{2^{J+1}+2}`.
pub fn anchor_convexity(seq: &SequencePair, j: usize) -> f64 {
    assert!(j >= 1);
    let p = 2f64.powi(j as i32);
    let h = p / 2.0;
    p * seq.b(anchor(j - 1)) - (p + h) * seq.b(anchor(j)) + h * seq.b(anchor(j + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_sequence_example() {
        let omega = Frequency::rational_from_ints(&[2, -1]);
        let a = make_a_sequence(&omega, 2, 3).unwrap();
        assert_eq!(a[0], 7776.0);
        for j in 0..3 {
            let ratio = 2.0 * ((anchor(j + 1) as f64) / anchor(j) as f64).powi(5);
            assert!((a[j + 1] / a[j] - ratio).abs() < 1e-9 * ratio);
        }
    }

    #[test]
    fn bruno_examples() {
        assert_eq!(bruno_check(&[1.0; 6], 5).unwrap(), (0.0, BrunoVerdict::EvidenceYes));
        let (s, v) = bruno_check(&[std::f64::consts::E; 11], 10).unwrap();
        assert!((s - (2.0 - 2f64.powi(-10))).abs() < 1e-12);
        assert_eq!(v, BrunoVerdict::EvidenceYes);
        let a: Vec<f64> = (0..8).map(|j| (2f64.powi(j)).exp()).collect();
        let (s, v) = bruno_check(&a, 7).unwrap();
        assert!((s - 8.0).abs() < 1e-12);
        assert_eq!(v, BrunoVerdict::EvidenceNo);
        assert!(bruno_check(&[0.5, 1.0], 1).is_err());
    }

    #[test]
    fn constant_sequences() {
        let seq = b_from_a(&[std::f64::consts::E; 6], 5).unwrap();
        assert!(seq.b_values().iter().all(|v| (v + 1.0).abs() < 1e-12));
        let seq = b_from_a(&[1.0; 4], 3).unwrap();
        assert!(seq.b_values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn affine_sequence_is_tight() {
        let seq = SequencePair::from_b((3..30).map(|s| -0.1 * s as f64).collect());
        let r = convexity_inequalities(&seq, 1e-12).unwrap();
        assert!(r.holds);
        assert!(r.three_point_min.abs() < 1e-12);
    }
}
