use serde::Serialize;

use crate::algebra::{FormalSeries, MultiIndex};
use crate::error::{Error, Result};
use crate::flow::FlowSolution;

/// `f_j = scale * max_{|k| = j} |H_k| / multinomial(k)`, the tightest
/// one-variable initial data dominating `h`.
pub fn initial_majorant_data(h: &FormalSeries, scale: f64) -> Vec<f64> {
    let mut f = vec![0.0f64; h.max_degree() + 1];
    for (k, c) in h.iter() {
        let v = scale * c.norm() / k.multinomial();
        let slot = &mut f[k.degree()];
        *slot = (*slot).max(v);
    }
    f
}

/// Solution of `dF/d delta = 4 n (F')^2`, the one-variable reduction of
/// `dH/d delta = 4 sum_j dH/dz_j dH/dzbar_j`. Each coefficient `F_j` is a
/// polynomial in `delta`, stored by ascending powers.
#[derive(Clone, Debug)]
pub struct MajorantSolution {
    n: usize,
    polys: Vec<Vec<f64>>,
}

fn poly_mul_acc(acc: &mut Vec<f64>, a: &[f64], b: &[f64], k: f64) {
    if a.is_empty() || b.is_empty() {
        return;
    }
    if acc.len() < a.len() + b.len() - 1 {
        acc.resize(a.len() + b.len() - 1, 0.0);
    }
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            acc[i + j] += k * x * y;
        }
    }
}

fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl MajorantSolution {
    /// Coefficient form `dF_j = 4 n sum_{a+b=j+2} a b F_a F_b`, integrated
    /// degree by degree. Initial data must vanish below degree 3.
    pub fn solve(n: usize, initial: &[f64]) -> Result<Self> {
        if initial.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Domain {
                op: "MajorantSolution::solve",
                detail: "initial majorant data must be nonnegative".into(),
            });
        }
        if initial.iter().take(3).any(|v| *v != 0.0) {
            return Err(Error::Precondition {
                op: "MajorantSolution::solve",
                detail: "initial majorant data must start at degree 3".into(),
            });
        }
        let k = initial.len().saturating_sub(1);
        let mut polys: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
        let nf = 4.0 * n as f64;
        for j in 0..=k {
            let mut rhs = Vec::new();
            for a in 3..j {
                let b = j + 2 - a;
                if b < 3 || b >= j {
                    continue;
                }
                poly_mul_acc(&mut rhs, &polys[a], &polys[b], nf * (a * b) as f64);
            }
            let mut p = vec![initial[j]];
            p.extend(rhs.iter().enumerate().map(|(i, c)| c / (i + 1) as f64));
            polys.push(p);
        }
        Ok(Self { n, polys })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.polys.len().saturating_sub(1)
    }

    /// `F_j` as polynomial coefficients in `delta`.
    pub fn poly(&self, j: usize) -> &[f64] {
        self.polys.get(j).map_or(&[], Vec::as_slice)
    }

    /// `F_j(delta)`.
    pub fn eval(&self, j: usize, delta: f64) -> f64 {
        poly_eval(self.poly(j), delta)
    }

    /// Majorant coefficient for the `2n`-variable index `k`.
    pub fn coeff_for(&self, k: &MultiIndex, delta: f64) -> f64 {
        self.eval(k.degree(), delta) * k.multinomial()
    }

    /// `F(., delta)` as a coefficient list in `zeta`.
    pub fn zeta_series(&self, delta: f64) -> Vec<f64> {
        (0..self.polys.len()).map(|j| self.eval(j, delta)).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DominationRow {
    pub k: MultiIndex,
    pub delta: f64,
    pub exact: f64,
    pub majorant: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DominationReport {
    pub rows: Vec<DominationRow>,
    pub violations: Vec<DominationRow>,
}

impl DominationReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Relative slack in the comparison `|calH_k| <= H_k`.
pub const DOMINATION_RTOL: f64 = 1e-9;

/// Multiple of machine epsilon times `sum |terms|` allowed for rounding in
/// the evaluation of `calH_k`.
pub const ROUNDING_ULPS: f64 = 64.0;

/// Compares `|calH_k(delta)|` with the majorant at every stored index and
/// grid point. A row is a violation when the exact value exceeds the
/// majorant by more than `DOMINATION_RTOL` relative slack plus the
/// rounding scale of its own evaluation.
pub fn verify_domination(exact: &FlowSolution, maj: &MajorantSolution, grid: &[f64]) -> Result<DominationReport> {
    if maj.n() != exact.n() {
        return Err(Error::DimensionMismatch {
            expected: exact.n(),
            found: maj.n(),
        });
    }
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for &delta in grid {
        for (k, p) in exact.coefficients() {
            let e = p.eval(delta).norm();
            let rounding = ROUNDING_ULPS * f64::EPSILON * p.eval_abs(delta);
            let m = if k.degree() <= maj.max_degree() {
                maj.coeff_for(k, delta)
            } else {
                0.0
            };
            let row = DominationRow {
                k: k.clone(),
                delta,
                exact: e,
                majorant: m,
                margin: m - e,
            };
            if e > m + DOMINATION_RTOL * m + rounding {
                violations.push(row.clone());
            }
            rows.push(row);
        }
    }
    Ok(DominationReport { rows, violations })
}

/// `c = max_{q <= q_max} c_F exp(-b_q - (alpha + ln rho) q)`, the constant
/// with `|F_k| <= c exp(b_|k| + alpha |k|)` for `|F_k| <= c_F rho^{-|k|}`.
pub fn sublinear_constant(c_f: f64, rho: f64, alpha: f64, b: impl Fn(usize) -> f64, q_max: usize) -> f64 {
    (0..=q_max)
        .map(|q| c_f * (-b(q) - (alpha + rho.ln()) * q as f64).exp())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_in_low_degree() {
        let mut f = vec![0.0; 7];
        f[3] = 1.0;
        let s = MajorantSolution::solve(1, &f).unwrap();
        assert_eq!(s.poly(3), &[1.0]);
        // dF_4 = 4 * 3*3 F_3^2 ... a+b = 6 needs a = b = 3 and j = 4
        assert_eq!(s.poly(4), &[0.0, 36.0]);
        assert_eq!(s.eval(4, 0.5), 18.0);
    }

    #[test]
    fn rejects_low_degree_data() {
        assert!(MajorantSolution::solve(1, &[0.0, 0.0, 1.0, 1.0]).is_err());
        assert!(MajorantSolution::solve(1, &[0.0, 0.0, 0.0, -1.0]).is_err());
    }
}
