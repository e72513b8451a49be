//! Inputs shared by the kernel benchmarks.

use normflow_core::{ExpPoly, FormalSeries, MultiIndex, Rate};
use num_complex::Complex64;

/// Every real monomial of degrees `3..=top` in `n` variables, with
/// deterministic coefficients of modulus below one.
pub fn dense_real(n: usize, top: usize, max_degree: usize) -> FormalSeries {
    let mut s = FormalSeries::new(n, max_degree);
    let mut t = 0.0f64;
    for d in 3..=top {
        for k in MultiIndex::all_of_degree(n, d) {
            if s.contains(&k) {
                continue;
            }
            t += 1.0;
            let c = Complex64::from_polar(1.0 / (1.0 + 0.1 * t), 0.7 * t);
            let star = k.star();
            if star == k {
                s.set(k, Complex64::new(c.re, 0.0));
            } else {
                s.set(star, c.conj());
                s.set(k, c);
            }
        }
    }
    s
}

/// Sum of `len` terms with small polynomial degrees and half-integer rates.
pub fn exppoly(len: usize, seed: u32) -> ExpPoly {
    (0..len as u32).fold(ExpPoly::zero(), |acc, i| {
        let j = i + seed;
        let rate = Rate::exact(num_rational::Rational64::new((j % 7) as i64, 2));
        acc.add(&ExpPoly::term(j % 3, rate, Complex64::new(1.0 / (1.0 + j as f64), 0.5)))
    })
}
