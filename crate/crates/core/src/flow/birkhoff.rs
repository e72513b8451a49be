use num_complex::Complex64;

use crate::algebra::{poisson_bracket, quadratic_part, FormalSeries};
use crate::error::{Error, Result};
use crate::resonance::Frequency;

/// Generator `chi` with `{H2, chi} = -F^nonres`:
/// `chi_k = -i F_k / <omega, k'>` on nonresonant monomials.
pub fn homological_generator(f: &FormalSeries, omega: &Frequency) -> Result<FormalSeries> {
    let mut chi = FormalSeries::new(f.n(), f.max_degree());
    for (k, c) in f.iter() {
        let d = omega.sigma_omega(&k.prime())?;
        if d.is_resonant() {
            continue;
        }
        if d.value == 0.0 {
            return Err(Error::Invariant {
                op: "homological_generator",
                detail: format!("zero divisor at nonresonant {k:?}"),
            });
        }
        let pairing = d.sign.as_i64() as f64 * d.value;
        chi.set(k.clone(), Complex64::new(0.0, -1.0) * c / pairing);
    }
    Ok(chi)
}

/// `exp(ad_chi) F = F + {F, chi} + {{F, chi}, chi}/2 + ...`, truncated at
/// the degree cap of `f`. Terminates because `chi` starts at degree 3.
pub fn lie_transform(f: &FormalSeries, chi: &FormalSeries) -> Result<FormalSeries> {
    if chi.min_degree().is_some_and(|d| d < 3) {
        return Err(Error::Precondition {
            op: "lie_transform",
            detail: "generator must start at degree 3".into(),
        });
    }
    let mut out = f.clone();
    let mut term = f.clone();
    let mut i = 1.0;
    loop {
        term = poisson_bracket(&term, chi)?.scale(Complex64::new(1.0 / i, 0.0));
        if term.is_empty() {
            break;
        }
        out = out.add(&term)?;
        i += 1.0;
    }
    Ok(out)
}

/// Classical Birkhoff normalization through `up_to_degree`: at each degree
/// the nonresonant part is removed by one Lie transform. Returns the
/// resonant part of degrees `3..=up_to_degree`.
pub fn birkhoff_oracle(h: &FormalSeries, omega: &Frequency, up_to_degree: usize) -> Result<FormalSeries> {
    if omega.n() != h.n() {
        return Err(Error::DimensionMismatch {
            expected: h.n(),
            found: omega.n(),
        });
    }
    let h2 = quadratic_part(omega, up_to_degree);
    let mut f = h2.add(&h.with_max_degree(up_to_degree))?;
    for d in 3..=up_to_degree {
        let chi = homological_generator(&f.homogeneous(d), omega)?;
        if chi.is_empty() {
            continue;
        }
        f = lie_transform(&f, &chi)?;
    }
    Ok(f.degree_band(3, up_to_degree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MultiIndex;

    #[test]
    fn resonant_input_unchanged() {
        let omega = Frequency::rational_from_ints(&[1, 1]);
        let mut h = FormalSeries::new(2, 6);
        h.add_term(MultiIndex::new(&[2, 0], &[0, 2]), Complex64::new(1.0, 0.0));
        h.add_term(MultiIndex::new(&[0, 2], &[2, 0]), Complex64::new(1.0, 0.0));
        assert_eq!(birkhoff_oracle(&h, &omega, 6).unwrap(), h);
    }

    #[test]
    fn one_step_kills_cubic() {
        let omega = Frequency::rational_from_ints(&[1]);
        let h = FormalSeries::monomial(1, 3, MultiIndex::new(&[3], &[0]), Complex64::new(1.0, 0.0));
        assert!(birkhoff_oracle(&h, &omega, 3).unwrap().is_empty());
    }

    #[test]
    fn generator_solves_homological_equation() {
        let omega = Frequency::rational_from_ints(&[2, -1]);
        let mut f = FormalSeries::new(2, 5);
        f.add_term(MultiIndex::new(&[1, 0], &[0, 2]), Complex64::new(0.3, 0.1));
        f.add_term(MultiIndex::new(&[1, 2], &[0, 0]), Complex64::new(-1.0, 0.0));
        f.add_term(MultiIndex::new(&[0, 1], &[1, 1]), Complex64::new(0.5, 0.5));
        let chi = homological_generator(&f, &omega).unwrap();
        let h2 = quadratic_part(&omega, 5);
        let lhs = poisson_bracket(&h2, &chi).unwrap().add(&f).unwrap().pruned(1e-14);
        // only the resonant monomial (1,2;0,0) survives: <(2,-1),(-1,-2)> = 0
        assert_eq!(lhs.len(), 1);
        assert!(lhs.contains(&MultiIndex::new(&[1, 2], &[0, 0])));
    }
}
