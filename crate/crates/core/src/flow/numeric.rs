use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::algebra::{poisson_bracket, FormalSeries, MultiIndex};
use crate::error::{Error, Result};
use crate::resonance::Frequency;

/// Numeric state at one grid point.
#[derive(Clone, Debug)]
pub struct NumericSample {
    pub delta: f64,
    /// Calligraphic gauge `calH(delta)`.
    pub cal_h: FormalSeries,
    /// Original gauge `H(delta)`.
    pub h: FormalSeries,
}

/// `d calH_t += coeff * calH_a * calH_b * exp(rate * delta)`, `rate <= 0`.
struct PlanEntry {
    t: usize,
    a: usize,
    b: usize,
    coeff: Complex64,
    rate: usize,
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Classic RK4 integration of the coefficient ODEs in the calligraphic
/// gauge. The structure constants come from brackets of monomials, so this
/// path shares no pair enumeration with [`super::flow_exact`].
///
/// The state covers every index of degree `3..=K`. `grid` must be
/// nonnegative and ascending; `step` is the largest step used.
pub fn flow_numeric(
    h: &FormalSeries,
    omega: &Frequency,
    max_degree: usize,
    grid: &[f64],
    step: f64,
) -> Result<Vec<NumericSample>> {
    let n = h.n();
    if omega.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: omega.n(),
        });
    }
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!("step must be positive, got {step}")));
    }
    if grid.iter().any(|d| !(*d >= 0.0)) || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput(
            "delta grid must be nonnegative and ascending".into(),
        ));
    }
    if !h.is_diamond() {
        return Err(Error::Precondition {
            op: "flow_numeric",
            detail: "initial perturbation must start at degree 3".into(),
        });
    }

    let indices: Vec<MultiIndex> = (3..=max_degree).flat_map(|d| MultiIndex::all_of_degree(n, d)).collect();
    let pos: BTreeMap<&MultiIndex, usize> = indices.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut signs = Vec::with_capacity(indices.len());
    let mut rates = Vec::with_capacity(indices.len());
    for k in &indices {
        let d = omega.sigma_omega(&k.prime())?;
        signs.push(d.sign.as_i64() as f64);
        rates.push(d.value);
    }

    // -{xi H, H} = sum_{a,b} i sigma_a H_a H_b {z^a, z^b}
    let one = Complex64::new(1.0, 0.0);
    let mut plan = Vec::new();
    let mut rate_table: Vec<f64> = Vec::new();
    for (ia, a) in indices.iter().enumerate() {
        if signs[ia] == 0.0 {
            continue;
        }
        let fa = FormalSeries::monomial(n, max_degree, a.clone(), one);
        for (ib, b) in indices.iter().enumerate() {
            if a.degree() + b.degree() > max_degree + 2 {
                break;
            }
            let fb = FormalSeries::monomial(n, max_degree, b.clone(), one);
            let br = poisson_bracket(&fa, &fb)?;
            for (t, v) in br.iter() {
                let it = pos[t];
                let r = rates[it] - rates[ia] - rates[ib];
                let rate = match rate_table
                    .iter()
                    .position(|x| (x - r).abs() <= 1e-12 * r.abs().max(1.0))
                {
                    Some(p) => p,
                    None => {
                        rate_table.push(r);
                        rate_table.len() - 1
                    }
                };
                plan.push(PlanEntry {
                    t: it,
                    a: ia,
                    b: ib,
                    coeff: I * signs[ia] * v,
                    rate,
                });
            }
        }
    }

    let mut exps = vec![0.0; rate_table.len()];
    let mut rhs = |delta: f64, y: &[Complex64], out: &mut [Complex64]| {
        for (e, r) in exps.iter_mut().zip(&rate_table) {
            *e = (r * delta).exp();
        }
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for e in &plan {
            let p = y[e.a] * y[e.b];
            if p != Complex64::new(0.0, 0.0) {
                out[e.t] += e.coeff * p * exps[e.rate];
            }
        }
    };

    let dim = indices.len();
    let mut y: Vec<Complex64> = indices.iter().map(|k| h.get(k)).collect();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![Complex64::new(0.0, 0.0); dim],
        vec![Complex64::new(0.0, 0.0); dim],
        vec![Complex64::new(0.0, 0.0); dim],
        vec![Complex64::new(0.0, 0.0); dim],
        vec![Complex64::new(0.0, 0.0); dim],
    );
    let mut t = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for &target in grid {
        let span = target - t;
        let steps = (span / step).ceil() as usize;
        if steps > 0 {
            let dt = span / steps as f64;
            for _ in 0..steps {
                rhs(t, &y, &mut k1);
                for i in 0..dim {
                    tmp[i] = y[i] + k1[i] * (dt / 2.0);
                }
                rhs(t + dt / 2.0, &tmp, &mut k2);
                for i in 0..dim {
                    tmp[i] = y[i] + k2[i] * (dt / 2.0);
                }
                rhs(t + dt / 2.0, &tmp, &mut k3);
                for i in 0..dim {
                    tmp[i] = y[i] + k3[i] * dt;
                }
                rhs(t + dt, &tmp, &mut k4);
                for i in 0..dim {
                    y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
                }
                t += dt;
            }
        }
        t = target;
        let cal_h = FormalSeries::from_terms(n, max_degree, indices.iter().cloned().zip(y.iter().copied()));
        let hh = FormalSeries::from_terms(
            n,
            max_degree,
            indices
                .iter()
                .enumerate()
                .map(|(i, k)| (k.clone(), y[i] * (-rates[i] * target).exp())),
        );
        out.push(NumericSample {
            delta: target,
            cal_h,
            h: hh,
        });
    }
    Ok(out)
}
