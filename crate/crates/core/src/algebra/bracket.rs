use num_complex::Complex64;

use super::{FormalSeries, MultiIndex};
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Integer structure constant of the bracket of two monomials along the
/// `j`-th pair: `kbar_l[j] * k_m[j] - k_l[j] * kbar_m[j]`.
#[inline]
pub fn bracket_weight(l: &MultiIndex, m: &MultiIndex, j: usize) -> i64 {
    let n = l.n();
    let le = l.exponents();
    let me = m.exponents();
    le[n + j] as i64 * me[j] as i64 - le[j] as i64 * me[n + j] as i64
}

/// Bracket of two monomials: `{z^l, z^m} = i sum_j w_j(l, m) z^{l+m-e_j}`.
/// Returns the `(index, integer weight)` pairs with nonzero weight.
pub fn monomial_bracket(l: &MultiIndex, m: &MultiIndex) -> Vec<(MultiIndex, i64)> {
    let sum = l.add(m);
    (0..l.n())
        .filter_map(|j| {
            let w = bracket_weight(l, m, j);
            if w == 0 {
                None
            } else {
                Some((
                    sum.lower_diagonal(j).expect("nonzero weight implies a diagonal pair"),
                    w,
                ))
            }
        })
        .collect()
}

/// `{F, G} = i sum_j (d_{zbar_j} F d_{z_j} G - d_{z_j} F d_{zbar_j} G)`.
///
/// The result is capped at `min(K_F, K_G)`; each product term of degrees
/// `p` and `q` lands in degree `p + q - 2`.
pub fn poisson_bracket(f: &FormalSeries, g: &FormalSeries) -> Result<FormalSeries> {
    if f.n() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            found: g.n(),
        });
    }
    let cap = f.max_degree().min(g.max_degree());
    let mut out = FormalSeries::new(f.n(), cap);
    if f.truncation_touched() || g.truncation_touched() {
        out.mark_truncated();
    }
    for (l, fl) in f.iter() {
        for (m, gm) in g.iter() {
            if l.degree() + m.degree() > cap + 2 {
                out.mark_truncated();
                break;
            }
            let prod = fl * gm * I;
            for (k, w) in monomial_bracket(l, m) {
                out.add_term(k, prod * w as f64);
            }
        }
    }
    Ok(out)
}
