//! One function per mode. Each returns the JSON report, the CSV tables and
//! any failed assertions.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use normflow_core::flow::{normal_form_limit_with, FlowRow};
use normflow_core::majorant::{initial_majorant_data, verify_domination};
use normflow_core::resonance::FrequencySpec;
use normflow_core::scheduler::{
    b_from_a, bruno_check, calibrate_alpha0, corank1_profile, make_a_sequence, normalize_low_orders,
};
use normflow_core::{flow_exact, Error, FlowSolution, MajorantSolution, MultiIndex};

use crate::config::{Experiment, Mode};
use crate::report::{float, index, opt_float, Table};
use crate::CliError;

/// A failed bound or invariant check.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub module: &'static str,
    pub op: String,
    pub indices: Value,
    pub detail: String,
}

pub struct Outcome {
    pub report: Value,
    pub tables: Vec<Table>,
    pub witnesses: Vec<Witness>,
}

/// Assertion failures inside the library become witnesses; anything else
/// is an input problem.
fn lift(module: &'static str) -> impl Fn(Error) -> CliError {
    move |e| match e {
        Error::Invariant { op, detail } | Error::Precondition { op, detail } => CliError::Violation(vec![Witness {
            module,
            op: op.to_string(),
            indices: Value::Null,
            detail,
        }]),
        other => CliError::from(other),
    }
}

fn index_json(k: &MultiIndex) -> Value {
    json!({ "k": k.k(), "kbar": k.kbar() })
}

fn header(exp: &Experiment, mode: Mode) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("mode".into(), json!(mode.name()));
    m.insert("n".into(), json!(exp.frequency.n()));
    m.insert("truncation".into(), json!(exp.h.max_degree()));
    m.insert("frequency".into(), json!(FrequencySpec::from(&exp.frequency)));
    m.insert("delta_grid".into(), json!(exp.grid));
    m
}

pub fn run(exp: &Experiment, mode: Mode) -> Result<Outcome, CliError> {
    let sol = flow_exact(&exp.h, &exp.frequency, exp.h.max_degree()).map_err(lift("flow"))?;
    let mut out = match mode {
        Mode::Flow => flow(exp, &sol),
        Mode::MajorantCert => majorant(exp, &sol),
        Mode::LowOrderPipeline => pipeline(exp, &sol),
        Mode::Corank1Split => split(exp, &sol),
    }?;
    let mut h = header(exp, mode);
    h.insert(
        "status".into(),
        json!(if out.witnesses.is_empty() { "ok" } else { "violation" }),
    );
    h.insert("violations".into(), json!(out.witnesses.len()));
    h.insert(mode.name().into(), out.report.take());
    out.report = Value::Object(h);
    Ok(out)
}

fn flow(exp: &Experiment, sol: &FlowSolution) -> Result<Outcome, CliError> {
    let th = &exp.config.thresholds;
    let nf = normal_form_limit_with(sol, th.r_detect).map_err(lift("flow"))?;
    let samples: Vec<_> = exp.grid.iter().map(|d| sol.h_at(*d)).collect();

    let mut table = Table::new(
        "flow",
        &["k", "kbar", "deg", "divisor", "limit_re", "limit_im", "fitted_decay"],
    );
    let mut rows = Vec::with_capacity(nf.rows.len());
    for r in &nf.rows {
        table.push(vec![
            index(r.k.k()),
            index(r.k.kbar()),
            r.degree.to_string(),
            float(r.divisor),
            float(r.limit.re),
            float(r.limit.im),
            opt_float(r.fitted_decay),
        ]);
        rows.push(flow_row_json(r, samples.iter().map(|s| s.get(&r.k).norm()).collect()));
    }

    let mut witnesses = Vec::new();
    let mut worst: Option<(f64, f64, MultiIndex)> = None;
    for (d, s) in exp.grid.iter().zip(&samples) {
        for (k, c) in s.iter() {
            let gap = (c.conj() - s.get(&k.star())).norm();
            if worst.as_ref().is_none_or(|w| gap > w.0) {
                worst = Some((gap, *d, k.clone()));
            }
        }
    }
    let defect = worst.as_ref().map_or(0.0, |w| w.0);
    if let Some((gap, delta, k)) = worst.filter(|w| w.0 > th.reality) {
        witnesses.push(Witness {
            module: "flow",
            op: "check_reality".into(),
            indices: json!({ "k": k.k(), "kbar": k.kbar(), "delta": delta }),
            detail: format!("|conj(H_k) - H_k*| = {gap:e} exceeds {:e}", th.reality),
        });
    }

    let report = json!({
        "r": nf.r,
        "r_threshold": nf.threshold,
        "reality_defect": defect,
        "decay_window": normflow_core::flow::DECAY_WINDOW,
        "normal_form": nf.n_diamond,
        "rows": rows,
    });
    Ok(Outcome {
        report,
        tables: vec![table],
        witnesses,
    })
}

fn flow_row_json(r: &FlowRow, abs_on_grid: Vec<f64>) -> Value {
    let Complex64 { re, im } = r.limit;
    json!({
        "k": r.k.k(),
        "kbar": r.k.kbar(),
        "deg": r.degree,
        "resonant": r.resonant,
        "divisor": r.divisor,
        "limit_re": re,
        "limit_im": im,
        "fitted_decay": r.fitted_decay,
        "fitted_power": r.fitted_power,
        "log_linear_decay": r.log_linear_decay,
        "abs_on_grid": abs_on_grid,
    })
}

fn majorant(exp: &Experiment, sol: &FlowSolution) -> Result<Outcome, CliError> {
    let scale = exp.config.thresholds.majorant_scale;
    if !(scale >= 0.0) || !scale.is_finite() {
        return Err(CliError::Input(format!(
            "majorant_scale must be a nonnegative number, got {scale}"
        )));
    }
    let initial = initial_majorant_data(&exp.h, scale);
    let maj = MajorantSolution::solve(exp.frequency.n(), &initial).map_err(lift("majorant"))?;
    let rep = verify_domination(sol, &maj, &exp.grid).map_err(lift("majorant"))?;

    let mut table = Table::new("domination", &["k", "kbar", "delta", "exact", "majorant", "margin"]);
    for r in &rep.rows {
        table.push(vec![
            index(r.k.k()),
            index(r.k.kbar()),
            float(r.delta),
            float(r.exact),
            float(r.majorant),
            float(r.margin),
        ]);
    }
    let witnesses = rep
        .violations
        .iter()
        .map(|r| Witness {
            module: "majorant",
            op: "verify_domination".into(),
            indices: json!({ "k": r.k.k(), "kbar": r.k.kbar(), "delta": r.delta }),
            detail: format!("|calH_k| = {:e} exceeds majorant {:e}", r.exact, r.majorant),
        })
        .collect();
    let max_ratio = rep
        .rows
        .iter()
        .filter(|r| r.majorant > 0.0)
        .map(|r| r.exact / r.majorant)
        .fold(0.0, f64::max);
    let polys: Vec<&[f64]> = (0..=maj.max_degree()).map(|j| maj.poly(j)).collect();
    let report = json!({
        "scale": scale,
        "initial_data": initial,
        "majorant_polynomials": polys,
        "rows": rep.rows.len(),
        "max_ratio": max_ratio,
        "violations": rep.violations,
    });
    Ok(Outcome {
        report,
        tables: vec![table],
        witnesses,
    })
}

const CERT_HEADER: &[&str] = &[
    "m",
    "s_m",
    "alpha_m",
    "eps_m",
    "lambda_m",
    "rho_m",
    "band_residual",
    "eps_normalized",
    "eps_cap",
    "rho_allowed",
    "bound_max_ratio",
    "truncated",
];

fn pipeline(exp: &Experiment, sol: &FlowSolution) -> Result<Outcome, CliError> {
    let th = &exp.config.thresholds;
    let nf = normal_form_limit_with(sol, th.r_detect).map_err(lift("flow"))?;
    let mut certs = Table::new("certificates", CERT_HEADER);
    let mut seq_a = Table::new("sequence_a", &["j", "a"]);
    let mut seq_b = Table::new("sequence_b", &["s", "b"]);

    let r = th.r.or(nf.r);
    let Some(r) = r else {
        let report = json!({ "r": null, "detected_r": nf.r, "result": null });
        return Ok(Outcome {
            report,
            tables: vec![certs, seq_a, seq_b],
            witnesses: Vec::new(),
        });
    };
    let n = exp.frequency.n();
    let a = make_a_sequence(&exp.frequency, n, th.j_max).map_err(lift("scheduler"))?;
    let (bruno_sum, verdict) = bruno_check(&a, th.j_max).map_err(lift("scheduler"))?;
    let b = b_from_a(&a, th.j_max).map_err(lift("scheduler"))?;
    let (alpha0, c0) = calibrate_alpha0(&exp.h, &b).map_err(lift("scheduler"))?;
    let res = normalize_low_orders(&exp.h, &exp.frequency, r, c0, alpha0, &b, exp.h.max_degree())
        .map_err(lift("scheduler"))?;

    for (j, v) in a.iter().enumerate() {
        seq_a.push(vec![j.to_string(), float(*v)]);
    }
    for (i, v) in b.b_values().iter().enumerate() {
        seq_b.push(vec![(i + normflow_core::scheduler::B_START).to_string(), float(*v)]);
    }
    let mut witnesses = Vec::new();
    for c in &res.certificates {
        certs.push(vec![
            c.m.to_string(),
            c.s_m.to_string(),
            float(c.alpha_m),
            float(c.eps_m),
            float(c.lambda_m),
            float(c.rho_m),
            float(c.band_residual),
            float(c.eps_normalized),
            float(c.eps_cap),
            float(c.rho_allowed),
            float(c.bound_max_ratio),
            c.truncated.to_string(),
        ]);
        if !c.eps_ok() {
            witnesses.push(step_witness(
                "eps_cap",
                c.m,
                format!("eps_m = {:e} > {:e}", c.eps_m, c.eps_cap),
            ));
        }
        if !c.rho_ok() {
            witnesses.push(step_witness(
                "radius_recursion",
                c.m,
                format!("rho_m = {:e} > {:e}", c.rho_m, c.rho_allowed),
            ));
        }
    }
    for w in &res.violations {
        witnesses.push(Witness {
            module: "scheduler",
            op: "normalize_low_orders".into(),
            indices: index_json(&w.k),
            detail: format!("|G_k| = {:e} exceeds {:e}", w.value, w.bound),
        });
    }
    if res.eps_sum > 0.5 {
        witnesses.push(Witness {
            module: "scheduler",
            op: "eps_sum".into(),
            indices: Value::Null,
            detail: format!("sum of eps_m = {:e} exceeds 1/2", res.eps_sum),
        });
    }
    let rho_floor = res.rho0 * (-0.5f64).exp();
    if res.rho_star < rho_floor * (1.0 - normflow_core::scheduler::BOUND_RTOL) {
        witnesses.push(Witness {
            module: "scheduler",
            op: "final_radius".into(),
            indices: Value::Null,
            detail: format!("rho* = {:e} below rho0 e^(-1/2) = {:e}", res.rho_star, rho_floor),
        });
    }
    let report = json!({
        "r": r,
        "detected_r": nf.r,
        "bruno_partial_sum": bruno_sum,
        "bruno_verdict": verdict,
        "sequences": b,
        "result": res,
    });
    Ok(Outcome {
        report,
        tables: vec![certs, seq_a, seq_b],
        witnesses,
    })
}

fn step_witness(op: &str, m: usize, detail: String) -> Witness {
    Witness {
        module: "scheduler",
        op: op.into(),
        indices: json!({ "m": m }),
        detail,
    }
}

fn split(exp: &Experiment, sol: &FlowSolution) -> Result<Outcome, CliError> {
    let th = &exp.config.thresholds;
    if !(th.rho > 0.0) {
        return Err(CliError::Input(format!("rho must be positive, got {}", th.rho)));
    }
    let data = exp.frequency.corank1_decompose()?;
    let prof = corank1_profile(sol, &data, &exp.grid, th.rho, th.split_fit_window).map_err(lift("scheduler"))?;

    let mut table = Table::new(
        "split",
        &["delta", "g0_norm", "gstar_norm", "ratio", "decay_bound", "min_divisor"],
    );
    let mut rows = Vec::with_capacity(prof.rows.len());
    let mut witnesses = Vec::new();
    for r in &prof.rows {
        table.push(vec![
            float(r.delta),
            float(r.g0_norm),
            float(r.gstar_norm),
            float(r.ratio),
            float(r.decay_bound),
            opt_float(r.min_divisor),
        ]);
        rows.push(json!({
            "delta": r.delta,
            "g0_norm": r.g0_norm,
            "gstar_norm": r.gstar_norm,
            "ratio": r.ratio,
            "decay_bound": r.decay_bound,
            "min_divisor": r.min_divisor,
        }));
        if !r.divisors_ok() {
            witnesses.push(Witness {
                module: "scheduler",
                op: "corank1_split".into(),
                indices: json!({ "delta": r.delta }),
                detail: format!(
                    "nonresonant divisor {:?} below lambda/p = {:e}",
                    r.min_divisor, r.lambda_over_p
                ),
            });
        }
    }
    let report = json!({
        "q": data.q,
        "p": data.p,
        "lambda": data.lambda,
        "lambda_over_p": data.min_divisor(),
        "rho": th.rho,
        "fit_window": th.split_fit_window,
        "fit": prof.fit,
        "fitted_decay": prof.fit.map(|f| f.rate),
        "g0_variation": prof.g0_variation,
        "rows": rows,
    });
    Ok(Outcome {
        report,
        tables: vec![table],
        witnesses,
    })
}
