use serde::Serialize;

use super::sequences::SequencePair;
use super::step::{averaging_step, coefficient_bound, BoundWitness, BOUND_RTOL};
use crate::algebra::FormalSeries;
use crate::error::{Error, Result};
use crate::resonance::Frequency;

/// Band residual counted as zero, relative to the largest input coefficient.
pub const BAND_RESIDUAL_TOL: f64 = 1e-10;

/// `s_m = 2^{m-1} + 2`.
pub fn step_start(m: usize) -> usize {
    (1usize << (m - 1)) + 2
}

/// `N = max{m : s_m < r}`, zero when no step is needed.
pub fn step_count(r: usize) -> usize {
    let mut m = 0;
    while step_start(m + 1) < r {
        m += 1;
    }
    m
}

#[derive(Clone, Debug, Serialize)]
pub struct StepCertificate {
    pub m: usize,
    pub s_m: usize,
    pub alpha_m: f64,
    pub eps_m: f64,
    pub lambda_m: f64,
    pub rho_m: f64,
    pub band_residual: f64,
    /// `c0 e^{2 alpha_{m-1}} / 2^{m-1}`, the value of `eps_m` when the
    /// sequence `b` normalizes the step constants to one.
    pub eps_normalized: f64,
    /// `2^{-m-2}`.
    pub eps_cap: f64,
    /// Right-hand side of the radius recursion for `rho_m` from `rho_{m-1}`.
    pub rho_allowed: f64,
    pub bound_max_ratio: f64,
    pub truncated: bool,
}

impl StepCertificate {
    pub fn eps_ok(&self) -> bool {
        self.eps_m <= self.eps_cap * (1.0 + BOUND_RTOL)
    }

    pub fn rho_ok(&self) -> bool {
        self.rho_m <= self.rho_allowed * (1.0 + BOUND_RTOL)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineResult {
    pub r: usize,
    pub c0: f64,
    pub alpha0: f64,
    pub rho0: f64,
    /// `2 c0 e^{2 alpha0}`.
    pub eps0: f64,
    /// `2 c0^2 e^{2 alpha0}`, the alternative reading.
    pub eps0_squared: f64,
    pub certificates: Vec<StepCertificate>,
    pub g: FormalSeries,
    pub eps_sum: f64,
    pub rho_star: f64,
    /// Bound check `|G_k| <= c0 e^{b_|k| + alpha_N |k|}` on the output.
    pub violations: Vec<BoundWitness>,
}

impl PipelineResult {
    /// Every certified inequality holds.
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
            && self.certificates.iter().all(|c| c.eps_ok() && c.rho_ok())
            && self.eps_sum <= 0.5
            && self.rho_star >= self.rho0 * (-0.5f64).exp() * (1.0 - BOUND_RTOL)
    }
}

/// Smallest `alpha0 >= max(0, ln(2/n)/2)` with
/// `|Hhat_k| <= c0 e^{b_|k| + alpha0 |k|}` for `c0 = e^{-2 alpha0}/16`, so
/// that `c0 e^{2 alpha0} = 1/16` and `n e^{2 alpha0} >= 2`.
pub fn calibrate_alpha0(h: &FormalSeries, b: &SequencePair) -> Result<(f64, f64)> {
    if h.min_degree().is_some_and(|d| d < 3) {
        return Err(Error::Precondition {
            op: "calibrate_alpha0",
            detail: "input must start at degree 3".into(),
        });
    }
    let floor = (2.0 / h.n() as f64).ln().max(0.0) / 2.0;
    // alpha0 >= (ln(16 |H_k|) - b_|k|) / (|k| - 2) for each k
    let need = h
        .iter()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(k, v)| ((16.0 * v.norm()).ln() - b.b(k.degree())) / (k.degree() - 2) as f64)
        .fold(floor, f64::max);
    let alpha0 = need * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE;
    Ok((alpha0, (-2.0 * alpha0).exp() / 16.0))
}

/// Runs the band steps `s_m = 2^{m-1} + 2`, `m = 1..=N`, that bring `Hhat`
/// to a remainder of order `r` when its normal form starts at degree `r`.
pub fn normalize_low_orders(
    h: &FormalSeries,
    omega: &Frequency,
    r: usize,
    c0: f64,
    alpha0: f64,
    b: &SequencePair,
    max_degree: usize,
) -> Result<PipelineResult> {
    let n = h.n();
    if r < 3 {
        return Err(Error::InvalidInput(format!(
            "normal form order must be at least 3, got {r}"
        )));
    }
    let scale = c0 * (2.0 * alpha0).exp();
    if !(scale <= 1.0 / 16.0 * (1.0 + BOUND_RTOL)) || !(n as f64 * (2.0 * alpha0).exp() >= 2.0 * (1.0 - BOUND_RTOL)) {
        return Err(Error::Precondition {
            op: "normalize_low_orders",
            detail: format!("need c0 e^(2 alpha0) <= 1/16 and n e^(2 alpha0) >= 2; got {scale} and alpha0 = {alpha0}"),
        });
    }
    let input_scale = h.max_abs();
    let mut current = h.with_max_degree(max_degree);
    let mut alpha = alpha0;
    let mut rho_prev = (-alpha0).exp();
    let mut certificates = Vec::new();
    for m in 1..=step_count(r) {
        let s = step_start(m);
        let out = averaging_step(&current, omega, s, c0, alpha, b, max_degree)?;
        let band_residual = out.g0.max_abs();
        if band_residual > BAND_RESIDUAL_TOL * input_scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Precondition {
                op: "normalize_low_orders",
                detail: format!(
                    "resonant band residual {band_residual} at s = {s}; the normal form does not start at r = {r}"
                ),
            });
        }
        if let Some(w) = out.violations.first() {
            return Err(Error::Invariant {
                op: "averaging_step",
                detail: format!("|G_{:?}| = {} exceeds {}", w.k, w.value, w.bound),
            });
        }
        let eps_normalized = c0 * (2.0 * alpha).exp() / 2f64.powi(m as i32 - 1);
        let ea = alpha.exp();
        let rho_allowed = rho_prev - out.eps / (n as f64 * s as f64 * ea) * (rho_prev * ea).powi(s as i32 - 1);
        alpha += out.eps;
        let rho = (-alpha).exp();
        certificates.push(StepCertificate {
            m,
            s_m: s,
            alpha_m: alpha,
            eps_m: out.eps,
            lambda_m: out.lambda,
            rho_m: rho,
            band_residual,
            eps_normalized,
            eps_cap: 2f64.powi(-(m as i32) - 2),
            rho_allowed,
            bound_max_ratio: out.max_ratio,
            truncated: out.truncated,
        });
        rho_prev = rho;
        current = out.g;
    }
    let violations = current
        .iter()
        .filter_map(|(k, v)| {
            let bound = coefficient_bound(c0, alpha, b, k);
            (v.norm() > bound * (1.0 + BOUND_RTOL)).then(|| BoundWitness {
                k: k.clone(),
                value: v.norm(),
                bound,
            })
        })
        .collect();
    Ok(PipelineResult {
        r,
        c0,
        alpha0,
        rho0: (-alpha0).exp(),
        eps0: 2.0 * scale,
        eps0_squared: 2.0 * c0 * scale,
        eps_sum: alpha - alpha0,
        rho_star: (-alpha).exp(),
        certificates,
        g: current,
        violations,
    })
}
