use num_complex::Complex64;
use proptest::prelude::*;

use normflow_core::algebra::{poisson_bracket, project_sign_class, quadratic_part, SignClass};
use normflow_core::flow::homological_generator;
use normflow_core::{FormalSeries, Frequency, MultiIndex};

const K: usize = 8;

fn series(n: usize, max_deg: usize) -> impl Strategy<Value = FormalSeries> {
    let term = (
        prop::collection::vec(0u16..=max_deg as u16, 2 * n),
        -1.0f64..1.0,
        -1.0f64..1.0,
    );
    prop::collection::vec(term, 0..6).prop_map(move |terms| {
        let mut s = FormalSeries::new(n, K);
        for (mut e, re, im) in terms {
            // shrink exponents until the degree fits
            while e.iter().map(|x| *x as usize).sum::<usize>() > max_deg {
                let i = e.iter().position(|x| *x > 0).unwrap();
                e[i] -= 1;
            }
            s.add_term(MultiIndex::new(&e[..n], &e[n..]), Complex64::new(re, im));
        }
        s
    })
}

fn triple() -> impl Strategy<Value = (FormalSeries, FormalSeries, FormalSeries)> {
    (1usize..=3).prop_flat_map(|n| (series(n, 4), series(n, 4), series(n, 4)))
}

fn br(a: &FormalSeries, b: &FormalSeries) -> FormalSeries {
    poisson_bracket(a, b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn antisymmetry((f, g, _h) in triple()) {
        prop_assert!(br(&f, &g).add(&br(&g, &f)).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn jacobi((f, g, h) in triple()) {
        let j = br(&f, &br(&g, &h)).add(&br(&g, &br(&h, &f))).unwrap().add(&br(&h, &br(&f, &g))).unwrap();
        prop_assert!(j.max_abs() < 1e-10);
    }

    #[test]
    fn leibniz((f, g, h) in triple()) {
        let lhs = br(&f, &g.mul(&h).unwrap());
        let rhs = br(&f, &g).mul(&h).unwrap().add(&g.mul(&br(&f, &h)).unwrap()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
    }

    #[test]
    fn bracket_of_real_series_is_real((f, g, _h) in triple()) {
        let real = |s: &FormalSeries| {
            let mut out = s.clone();
            for (k, c) in s.iter() {
                out.add_term(k.star(), c.conj());
            }
            out
        };
        let (f, g) = (real(&f), real(&g));
        prop_assert!(f.is_real(1e-14));
        prop_assert!(br(&f, &g).reality_defect() < 1e-12);
    }

    #[test]
    fn sign_classes_partition((f, _g, _h) in triple()) {
        let n = f.n();
        let omega = Frequency::rational_from_ints(&vec![1; n]);
        let mut sum = FormalSeries::new(n, K);
        for class in [SignClass::Plus, SignClass::Minus, SignClass::Zero] {
            sum = sum.add(&project_sign_class(&f, &omega, class).unwrap()).unwrap();
        }
        prop_assert_eq!(sum.max_abs_diff(&f), 0.0);
    }

    #[test]
    fn sigma_is_odd(q in prop::collection::vec(-6i64..=6, 3), w in prop::collection::vec(-5i64..=5, 3)) {
        let omega = Frequency::rational_from_ints(&w);
        let neg: Vec<i64> = q.iter().map(|x| -x).collect();
        let a = omega.sigma_omega(&q).unwrap();
        let b = omega.sigma_omega(&neg).unwrap();
        prop_assert_eq!(-a.sign, b.sign);
        prop_assert_eq!(a.exact, b.exact);
    }

    #[test]
    fn homological_equation((f, _g, _h) in triple()) {
        let n = f.n();
        let omega = Frequency::float((1..=n).map(|j| (j as f64).sqrt() + 0.1 * j as f64).collect(), vec![], 1e-9).unwrap();
        let f = f.degree_band(3, 4);
        let chi = homological_generator(&f, &omega).unwrap();
        // {H2, chi} removes the nonresonant part of f
        let h2 = quadratic_part(&omega, K);
        let rem = f.add(&br(&h2, &chi)).unwrap();
        let nonres = project_sign_class(&rem, &omega, SignClass::Plus).unwrap()
            .add(&project_sign_class(&rem, &omega, SignClass::Minus).unwrap()).unwrap();
        prop_assert!(nonres.pruned(1e-12).is_empty());
    }
}

#[test]
fn bracket_of_conjugate_pair() {
    // {z, zbar} = i
    let z = FormalSeries::monomial(1, 4, MultiIndex::new(&[1], &[0]), Complex64::new(1.0, 0.0));
    let zb = FormalSeries::monomial(1, 4, MultiIndex::new(&[0], &[1]), Complex64::new(1.0, 0.0));
    let b = br(&z, &zb);
    assert_eq!(b.get(&MultiIndex::zero(1)).norm(), 1.0);
    assert_eq!(b.len(), 1);
}
