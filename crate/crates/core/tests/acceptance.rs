//! Acceptance criteria. Each test writes one PASS/FAIL line to stderr
//! (uncaptured) and then asserts.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use normflow_core::algebra::poisson_bracket;
use normflow_core::fit::{linspace, logspace, power_law_exponent};
use normflow_core::flow::{
    birkhoff_oracle, fitted_decay, flow_exact, flow_numeric, normal_form_limit, reality_defect, DECAY_WINDOW,
};
use normflow_core::majorant::{
    analyticity_bounds, analyticity_sample_check, burgers_analyticity_radius, burgers_solve, degenerate_bounds,
    initial_majorant_data, verify_domination, MajorantSolution,
};
use normflow_core::presets::{preset, PRESET_NAMES};
use normflow_core::scheduler::{
    anchor, anchor_convexity, b_from_a, calibrate_alpha0, convexity_inequalities, corank1_profile, make_a_sequence,
    normalize_low_orders,
};
use normflow_core::{FormalSeries, MultiIndex};

fn report(n: u32, name: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "acceptance {n:>2} {verdict} {name}: {detail}");
}

fn random_series(rng: &mut ChaCha8Rng, n: usize, k: usize) -> FormalSeries {
    let mut s = FormalSeries::new(n, k);
    for _ in 0..6 {
        let deg = rng.gen_range(0..=4usize);
        let mut e = vec![0u16; 2 * n];
        for _ in 0..deg {
            e[rng.gen_range(0..2 * n)] += 1;
        }
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        s.add_term(MultiIndex::new(&e[..n], &e[n..]), c);
    }
    s
}

#[test]
fn c01_bracket_algebra() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(1..=3);
        let f = random_series(&mut rng, n, 8);
        let g = random_series(&mut rng, n, 8);
        let h = random_series(&mut rng, n, 8);
        let br = |a: &FormalSeries, b: &FormalSeries| poisson_bracket(a, b).unwrap();
        let anti = br(&f, &g).add(&br(&g, &f)).unwrap();
        let jac = br(&f, &br(&g, &h))
            .add(&br(&g, &br(&h, &f)))
            .unwrap()
            .add(&br(&h, &br(&f, &g)))
            .unwrap();
        let lhs = br(&f, &g.mul(&h).unwrap());
        let rhs = br(&f, &g).mul(&h).unwrap().add(&g.mul(&br(&f, &h)).unwrap()).unwrap();
        worst = worst.max(anti.max_abs()).max(jac.max_abs()).max(lhs.max_abs_diff(&rhs));
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst < 1e-10 && secs < 30.0;
    report(
        1,
        "bracket algebra",
        pass,
        format!("max error {worst:.3e}, {secs:.2} s"),
    );
    assert!(pass);
}

#[test]
fn c02_flow_vs_rk4() {
    let grid = [0.5, 1.0, 2.0, 5.0];
    let mut worst = 0.0f64;
    let mut constant_cubic = true;
    for name in PRESET_NAMES {
        let p = preset(name).unwrap();
        let k = 8;
        let h = p.series(k).unwrap();
        let sol = flow_exact(&h, &p.frequency, k).unwrap();
        for (idx, poly) in sol.coefficients().iter().filter(|(i, _)| i.degree() == 3) {
            constant_cubic &= poly.is_constant() && poly.eval(7.0) == h.get(idx);
        }
        let samples = flow_numeric(&h, &p.frequency, k, &grid, 5e-4).unwrap();
        for s in &samples {
            worst = worst.max(s.cal_h.max_abs_diff(&sol.cal_series_at(s.delta)));
            worst = worst.max(s.h.max_abs_diff(&sol.h_at(s.delta)));
        }
    }
    let pass = worst < 1e-7 && constant_cubic;
    report(
        2,
        "flow vs RK4",
        pass,
        format!("max deviation {worst:.3e}, cubic coefficients constant: {constant_cubic}"),
    );
    assert!(pass);
}

#[test]
fn c03_normal_form_vs_birkhoff() {
    let mut worst = 0.0f64;
    for name in ["golden-mean", "one-one-resonance"] {
        let p = preset(name).unwrap();
        let h = p.series(6).unwrap();
        let nf = normal_form_limit(&flow_exact(&h, &p.frequency, 6).unwrap()).unwrap();
        let oracle = birkhoff_oracle(&h, &p.frequency, 6).unwrap();
        worst = worst.max(nf.n_diamond.degree_band(3, 6).max_abs_diff(&oracle));
    }
    let pass = worst < 1e-8;
    report(
        3,
        "normal form vs Birkhoff",
        pass,
        format!("max difference {worst:.3e}"),
    );
    assert!(pass);
}

#[test]
fn c04_nonresonant_decay() {
    let mut total = 0;
    let mut failures = Vec::new();
    let mut structural = true;
    for name in PRESET_NAMES {
        let p = preset(name).unwrap();
        let sol = flow_exact(&p.series(8).unwrap(), &p.frequency, 8).unwrap();
        for k in sol.coefficients().keys() {
            let d = sol.divisor(k).unwrap();
            if d.is_resonant() {
                continue;
            }
            total += 1;
            // slowest exponential in H_k is exactly omega_k
            let slowest = sol.h_exppoly(k).unwrap().min_positive_rate().map(|r| r.value);
            structural &= slowest.is_some_and(|r| (r - d.value).abs() < 1e-12);
            let rate = fitted_decay(&sol, k, DECAY_WINDOW).map(|f| f.rate);
            if !rate.is_some_and(|r| r >= d.value - 0.05) {
                failures.push((name, k.clone(), rate, d.value));
            }
        }
    }
    let pass = failures.is_empty();
    let worst = failures
        .iter()
        .map(|f| f.2.unwrap_or(f64::NEG_INFINITY) - f.3)
        .fold(f64::INFINITY, f64::min);
    report(
        4,
        "nonresonant decay on [2,6]",
        pass,
        format!(
            "{} of {total} below omega_k - 0.05 (worst shortfall {worst:.3}); slowest exact rate equals omega_k: {structural}",
            failures.len()
        ),
    );
    assert!(structural);
    assert!(pass, "first failures: {:?}", &failures[..failures.len().min(3)]);
}

#[test]
fn c05_majorant_domination() {
    let grid = [0.0, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0];
    let mut checked = 0;
    let mut violations = 0;
    let mut control = 0;
    for name in PRESET_NAMES {
        let p = preset(name).unwrap();
        let h = p.series(8).unwrap();
        let sol = flow_exact(&h, &p.frequency, 8).unwrap();
        let maj = MajorantSolution::solve(p.n, &initial_majorant_data(&h, 1.0)).unwrap();
        let rep = verify_domination(&sol, &maj, &grid).unwrap();
        checked += rep.rows.len();
        violations += rep.violations.len();
        let half = MajorantSolution::solve(p.n, &initial_majorant_data(&h, 0.5)).unwrap();
        control += verify_domination(&sol, &half, &grid).unwrap().violations.len();
    }
    let pass = violations == 0 && control > 0;
    report(
        5,
        "majorant domination",
        pass,
        format!("{violations} violations in {checked} comparisons; halved data gives {control}"),
    );
    assert!(pass);
}

#[test]
fn c06_analyticity_numbers() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let h: f64 = rng.gen_range(0.01..10.0);
        let rho: f64 = rng.gen_range(0.01..2.0);
        let n = rng.gen_range(1..=4usize);
        let delta: f64 = rng.gen_range(0.0..10.0);
        let t = analyticity_bounds(h, rho, n, delta).unwrap();
        let (a, b, tau) = (2.0 * h * rho, rho / 2.0, 8.0 * n as f64 * delta);
        let want = a * b * b / (2.0 * (1.0 + 2.0 * a * tau).powi(3));
        let direct = h * rho.powi(3) / (4.0 * (1.0 + 32.0 * n as f64 * h * rho * delta).powi(3));
        worst = worst
            .max((t.bound - want).abs() / want)
            .max((direct - want).abs() / want);
    }
    let mut samples = 0;
    let mut violations = 0;
    let mut max_ratio = 0.0f64;
    for name in PRESET_NAMES {
        let p = preset(name).unwrap();
        let sol = flow_exact(&p.series(8).unwrap(), &p.frequency, 8).unwrap();
        for rho in [0.25, 0.5] {
            let c = analyticity_sample_check(&sol, rho, &[0.0, 0.5, 1.0, 2.0, 5.0], 200).unwrap();
            samples += c.samples;
            violations += c.violations.len();
            max_ratio = max_ratio.max(c.max_ratio);
        }
    }
    let pass = worst < 1e-14 && violations == 0;
    report(
        6,
        "analyticity estimate",
        pass,
        format!(
            "identity error {worst:.3e}; {violations} of {samples} samples above bound (max ratio {max_ratio:.3e})"
        ),
    );
    assert!(pass);
}

#[test]
fn c07_burgers_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_res = 0.0f64;
    for _ in 0..100 {
        let a: f64 = rng.gen_range(0.1..3.0);
        let b: f64 = rng.gen_range(0.1..3.0);
        let tau: f64 = rng.gen_range(0.0..5.0);
        let r = burgers_analyticity_radius(a, b, tau) * rng.gen_range(0.0..0.99);
        let z = Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU));
        let g = burgers_solve(a, b, tau, z).unwrap();
        let w = z + g * tau;
        worst_res = worst_res.max((g - w * w * a / (b - w)).norm());
    }
    let mut violations = 0;
    let mut points = 0;
    for &(a, b) in &[(0.5, 1.0), (1.0, 1.0), (2.0, 0.5), (1.0, 3.0)] {
        for tau in [0.0, 0.1, 1.0, 10.0] {
            let p = 1.0 + 2.0 * a * tau;
            let radius = b / (2.0 * p);
            let bound = a * b / (p * p);
            for i in 1..=20 {
                for j in 0..64 {
                    let z = Complex64::from_polar(radius * i as f64 / 20.0, std::f64::consts::TAU * j as f64 / 64.0);
                    points += 1;
                    if burgers_solve(a, b, tau, z).unwrap().norm() > bound {
                        violations += 1;
                    }
                }
            }
        }
    }
    let pass = worst_res < 1e-10 && violations == 0;
    report(
        7,
        "Burgers fixed point",
        pass,
        format!("max residual {worst_res:.3e}; {violations} of {points} grid points above ab/(1+2a tau)^2"),
    );
    assert!(pass);
}

#[test]
fn c08_degenerate_scaling() {
    let taus = logspace(10.0, 1e4, 31);
    let mut lines = Vec::new();
    let mut pass = true;
    for r in [3u32, 4, 5] {
        let bounds: Vec<_> = taus
            .iter()
            .map(|t| degenerate_bounds(1.0, 1.0, r, *t).unwrap())
            .collect();
        let rho: Vec<f64> = bounds.iter().map(|b| b.rho).collect();
        let g: Vec<f64> = bounds.iter().map(|b| b.g_bound).collect();
        let er = power_law_exponent(&taus, &rho).unwrap();
        let eg = power_law_exponent(&taus, &g).unwrap();
        let want = 1.0 / (r - 2) as f64;
        pass &= (er + want).abs() <= 0.05 && (eg + 1.0 + want).abs() <= 0.05;
        lines.push(format!("r={r}: {er:.4}/{eg:.4}"));
    }
    report(
        8,
        "degenerate scaling",
        pass,
        format!("radius/bound exponents {}", lines.join(", ")),
    );
    assert!(pass);
}

#[test]
fn c09_sequences() {
    let e = std::f64::consts::E;
    let flat = b_from_a(&[e; 5], 4).unwrap();
    let anchors_err = (0..=5).map(|j| (flat.b(anchor(j)) + 1.0).abs()).fold(0.0, f64::max);
    let mut identity_err = 0.0f64;
    let mut convex = true;
    let mut anchor_err = 0.0f64;
    let omega = normflow_core::Frequency::rational_from_ints(&[1, 1]);
    let sources = [
        (0..=4).map(|j| (j as f64).exp()).collect::<Vec<_>>(),
        vec![e; 5],
        make_a_sequence(&omega, 2, 4).unwrap(),
    ];
    for a in &sources {
        let seq = b_from_a(a, 4).unwrap();
        assert_eq!(seq.s_max(), 34);
        identity_err = identity_err.max(seq.identity_defects().iter().map(|d| d.1).fold(0.0, f64::max));
        convex &= convexity_inequalities(&seq, 1e-12).unwrap().holds;
        for j in 1..=4 {
            let got = anchor_convexity(&seq, j);
            let want = 2f64.powi(j as i32 - 1) * (a[j].ln() - a[j - 1].ln());
            anchor_err = anchor_err.max((got - want).abs() / want.abs().max(1.0));
        }
    }
    let pass = anchors_err < 1e-12 && identity_err < 1e-12 && convex && anchor_err < 1e-12;
    report(
        9,
        "sequence machinery",
        pass,
        format!(
            "anchor error {anchors_err:.1e}, identity error {identity_err:.1e}, convex {convex}, anchor convexity error {anchor_err:.1e}"
        ),
    );
    assert!(pass);
}

#[test]
fn c10_low_order_pipeline() {
    let k = 8;
    let mut lines = Vec::new();
    let mut pass = true;
    for name in PRESET_NAMES {
        let p = preset(name).unwrap();
        let h = p.series(k).unwrap();
        let sol = flow_exact(&h, &p.frequency, k).unwrap();
        let nf = normal_form_limit(&sol).unwrap();
        if nf.r != Some(4) {
            continue;
        }
        let a = make_a_sequence(&p.frequency, p.n, 5).unwrap();
        let b = b_from_a(&a, 5).unwrap();
        let (alpha0, c0) = calibrate_alpha0(&h, &b).unwrap();
        let calib = c0 * (2.0 * alpha0).exp();
        let res = normalize_low_orders(&h, &p.frequency, 4, c0, alpha0, &b, k).unwrap();
        let eps_ok = res.certificates.iter().all(|c| c.eps_m <= 2f64.powi(-(c.m as i32) - 2));
        let rho_ok = res.rho_star >= res.rho0 * (-0.5f64).exp();
        let residual = res.certificates.iter().map(|c| c.band_residual).fold(0.0, f64::max);
        let below_r = res.g.degree_band(0, 3).max_abs();
        let g4 = res
            .g
            .homogeneous(4)
            .filter(|kk, _| p.frequency.is_resonant(&kk.prime()).unwrap());
        let diff = g4.max_abs_diff(&nf.n_diamond.homogeneous(4));
        let ok = (calib - 1.0 / 16.0).abs() < 1e-15
            && eps_ok
            && res.eps_sum <= 0.5
            && rho_ok
            && res.holds()
            && residual < 1e-10
            && below_r < 1e-10
            && diff < 1e-8;
        pass &= ok;
        lines.push(format!(
            "{name}: steps {}, eps_sum {:.4}, rho*/rho0 {:.4}, eps0 {:.4} (squared reading {:.2e}), deg-4 diff {diff:.1e}",
            res.certificates.len(),
            res.eps_sum,
            res.rho_star / res.rho0,
            res.eps0,
            res.eps0_squared
        ));
    }
    pass &= !lines.is_empty();
    report(10, "low-order pipeline", pass, lines.join("; "));
    assert!(pass);
}

#[test]
fn c11_corank1_split() {
    let p = preset("one-one-resonance").unwrap();
    let sol = flow_exact(&p.series(8).unwrap(), &p.frequency, 8).unwrap();
    let data = p.frequency.corank1_decompose().unwrap();
    let grid = linspace(0.0, 6.0, 61);
    let prof = corank1_profile(&sol, &data, &grid, 1.0, (1.0, 6.0)).unwrap();
    let rate = prof.fit.map(|f| f.rate).unwrap_or(f64::NAN);
    let divisors_ok = prof.rows.iter().all(|r| r.divisors_ok());
    let decay_ok = rate >= data.min_divisor() - 0.05;
    let constant_ok = prof.g0_variation < 1e-12;
    let pass = decay_ok && constant_ok && divisors_ok;
    report(
        11,
        "corank-1 splitting",
        pass,
        format!(
            "lambda/p {:.3}, fitted rate {rate:.4} (log-linear {:.4}), resonant variation {:.3e}, divisors >= lambda/p: {divisors_ok}",
            data.min_divisor(),
            prof.fit.map(|f| f.log_linear_rate).unwrap_or(f64::NAN),
            prof.g0_variation
        ),
    );
    assert!(decay_ok && divisors_ok);
    assert!(constant_ok, "resonant part varies by {}", prof.g0_variation);
}

#[test]
fn c12_reality() {
    let deltas = [0.0, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0];
    let mut worst = 0.0f64;
    for name in PRESET_NAMES {
        let p = preset(name).unwrap();
        let h = p.series(8).unwrap();
        assert!(h.is_real(1e-15));
        let sol = flow_exact(&h, &p.frequency, 8).unwrap();
        worst = worst.max(reality_defect(&sol, &deltas));
    }
    let pass = worst < 1e-10;
    report(
        12,
        "reality preservation",
        pass,
        format!("max symmetry error {worst:.3e}"),
    );
    assert!(pass);
}
