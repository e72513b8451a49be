use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::FormalSeries;
use crate::error::{Error, Result};
use crate::fit::{fit_decay, DecayFit};
use crate::flow::FlowSolution;
use crate::resonance::CorankOneData;

/// Resonant and nonresonant parts of the flow at one `delta`.
#[derive(Clone, Debug, Serialize)]
pub struct SplitResult {
    pub delta: f64,
    /// Resonant coefficients `calH_k(delta)`.
    pub g0: FormalSeries,
    /// Nonresonant coefficients `calH_k(delta) e^{-omega_k delta}`.
    pub gstar: FormalSeries,
    pub lambda_over_p: f64,
    /// Smallest nonresonant divisor in the support.
    pub min_divisor: Option<f64>,
    /// `e^{-lambda delta / p}`.
    pub decay_bound: f64,
    pub g0_norm: f64,
    pub gstar_norm: f64,
    /// `||G*|| / ||G0 + G*||` with the coefficient norm estimate at `rho`.
    pub ratio: f64,
}

impl SplitResult {
    /// Every nonresonant coefficient decays at least like `e^{-lambda delta/p}`.
    pub fn divisors_ok(&self) -> bool {
        self.min_divisor.is_none_or(|d| d >= self.lambda_over_p * (1.0 - 1e-12))
    }
}

/// Splits `H(., delta)` by the resonance lattice. `rho` sets the weights
/// `rho^|k|` of the norm estimate.
pub fn corank1_split(sol: &FlowSolution, data: &CorankOneData, delta: f64, rho: f64) -> Result<SplitResult> {
    if !(delta >= 0.0) || !(rho > 0.0) {
        return Err(Error::Domain {
            op: "corank1_split",
            detail: format!("need delta >= 0 and rho > 0, got delta={delta}, rho={rho}"),
        });
    }
    let data_check = sol.omega().corank1_decompose()?;
    if data_check.q != data.q {
        return Err(Error::InvalidInput(
            "corank-one data does not belong to this frequency".into(),
        ));
    }
    let n = sol.n();
    let k_max = sol.max_degree();
    let mut g0 = FormalSeries::new(n, k_max);
    let mut gstar = FormalSeries::new(n, k_max);
    let mut min_divisor: Option<f64> = None;
    for (k, p) in sol.coefficients() {
        let d = sol.divisor(k)?;
        let v: Complex64 = p.eval(delta);
        if d.is_resonant() {
            g0.set(k.clone(), v);
        } else {
            min_divisor = Some(min_divisor.map_or(d.value, |m| m.min(d.value)));
            gstar.set(k.clone(), v * (-d.value * delta).exp());
        }
    }
    let lambda_over_p = data.min_divisor();
    let g0_norm = g0.norm_upper_estimate(rho);
    let gstar_norm = gstar.norm_upper_estimate(rho);
    let total = g0.add(&gstar)?.norm_upper_estimate(rho);
    Ok(SplitResult {
        delta,
        g0,
        gstar,
        lambda_over_p,
        min_divisor,
        decay_bound: (-lambda_over_p * delta).exp(),
        g0_norm,
        gstar_norm,
        ratio: if total > 0.0 { gstar_norm / total } else { 0.0 },
    })
}

/// Splits at every grid point and fits the decay of `||G*||`.
#[derive(Clone, Debug, Serialize)]
pub struct SplitProfile {
    pub rows: Vec<SplitResult>,
    pub fit: Option<DecayFit>,
    /// Largest `|G0_k(delta) - G0_k(delta_0)|` over the grid.
    pub g0_variation: f64,
}

pub fn corank1_profile(
    sol: &FlowSolution,
    data: &CorankOneData,
    deltas: &[f64],
    rho: f64,
    fit_window: (f64, f64),
) -> Result<SplitProfile> {
    let rows = deltas
        .iter()
        .map(|d| corank1_split(sol, data, *d, rho))
        .collect::<Result<Vec<_>>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.delta >= fit_window.0 && r.delta <= fit_window.1)
        .map(|r| (r.delta, r.gstar_norm))
        .unzip();
    let fit = fit_decay(&xs, &ys);
    let g0_variation = rows
        .first()
        .map(|first| rows.iter().map(|r| r.g0.max_abs_diff(&first.g0)).fold(0.0, f64::max))
        .unwrap_or(0.0);
    Ok(SplitProfile {
        rows,
        fit,
        g0_variation,
    })
}
