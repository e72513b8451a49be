use std::path::{Path, PathBuf};

use clap::ValueEnum;
use normflow_core::resonance::FrequencySpec;
use normflow_core::{preset, FormalSeries, Frequency, SeriesTerm};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Flow,
    MajorantCert,
    LowOrderPipeline,
    Corank1Split,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Flow => "flow",
            Mode::MajorantCert => "majorant-cert",
            Mode::LowOrderPipeline => "low-order-pipeline",
            Mode::Corank1Split => "corank1-split",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetRef {
    pub preset: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineSeries {
    pub terms: Vec<SeriesTerm>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianSpec {
    Preset(PresetRef),
    Inline(InlineSeries),
}

/// Either an explicit list or `count` evenly spaced points on `[start, stop]`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Points(Vec<f64>),
    Range(GridRange),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self {
            GridSpec::Points(p) => p.clone(),
            GridSpec::Range(r) => normflow_core::fit::linspace(r.start, r.stop, r.count),
        }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Range(GridRange {
            start: 0.0,
            stop: 6.0,
            count: 61,
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub dir: Option<PathBuf>,
    pub csv: bool,
    pub json: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            dir: None,
            csv: true,
            json: true,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Limit coefficients above this count toward the normal-form order `r`.
    pub r_detect: f64,
    /// Scale applied to the initial majorant data.
    pub majorant_scale: f64,
    /// Window of the decay fit of `||G*||` in corank1-split mode.
    pub split_fit_window: (f64, f64),
    /// Polydisk radius of the norm estimate in the split report.
    pub rho: f64,
    /// Length of the small-divisor sequence.
    pub j_max: usize,
    /// Overrides the detected normal-form order in the pipeline.
    pub r: Option<usize>,
    pub reality: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            r_detect: normflow_core::flow::R_THRESHOLD,
            majorant_scale: 1.0,
            split_fit_window: (1.0, 6.0),
            rho: 1.0,
            j_max: 5,
            r: None,
            reality: 1e-10,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub frequency: Option<FrequencySpec>,
    pub hamiltonian: HamiltonianSpec,
    pub truncation: usize,
    #[serde(default)]
    pub delta_grid: GridSpec,
    pub mode: Mode,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub thresholds: Thresholds,
}

/// A validated experiment.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub frequency: Frequency,
    pub h: FormalSeries,
    pub grid: Vec<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn resolve(self) -> Result<Experiment, CliError> {
        let k = self.truncation;
        if k < 3 {
            return Err(CliError::Input(format!("truncation must be at least 3, got {k}")));
        }
        let grid = self.delta_grid.points();
        if grid.is_empty() || grid.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(CliError::Input(
                "delta grid must be nonempty, finite and nonnegative".into(),
            ));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Input("delta grid must be strictly ascending".into()));
        }
        let (w0, w1) = self.thresholds.split_fit_window;
        if !(w0 < w1) {
            return Err(CliError::Input("split_fit_window must satisfy start < stop".into()));
        }
        let explicit = self.frequency.as_ref().map(FrequencySpec::build).transpose()?;
        let (frequency, h) = match &self.hamiltonian {
            HamiltonianSpec::Preset(PresetRef { preset: name }) => {
                let p = preset(name)?;
                let frequency = explicit.unwrap_or_else(|| p.frequency.clone());
                if frequency.n() != p.n {
                    return Err(CliError::Input(format!(
                        "preset {name} has n = {} but the frequency has {} entries",
                        p.n,
                        frequency.n()
                    )));
                }
                (frequency, p.series(k)?)
            }
            HamiltonianSpec::Inline(InlineSeries { terms }) => {
                let frequency =
                    explicit.ok_or_else(|| CliError::Input("an inline hamiltonian needs a frequency".into()))?;
                let h = FormalSeries::from_literal(Some(frequency.n()), k, terms)?;
                (frequency, h)
            }
        };
        if h.min_degree().is_some_and(|d| d < 3) {
            return Err(CliError::Input("the perturbation must start at degree 3".into()));
        }
        Ok(Experiment {
            config: self,
            frequency,
            h,
            grid,
        })
    }
}
