//! Continuous averaging normalization for Hamiltonians near an elliptic
//! equilibrium.

pub mod algebra;
pub mod error;
pub mod exppoly;
pub mod fit;
pub mod flow;
pub mod majorant;
pub mod presets;
pub mod resonance;
pub mod scheduler;

pub use algebra::{FormalSeries, MultiIndex, SeriesTerm};
pub use error::{Error, Result};
pub use exppoly::{ExpPoly, Rate};
pub use flow::{flow_exact, normal_form_limit, FlowSolution, NormalFormResult};
pub use majorant::{MajorantFn, MajorantSolution};
pub use presets::{preset, Preset};
pub use resonance::{CorankOneData, Divisor, Frequency};
pub use scheduler::{SequencePair, SplitResult, StepCertificate};
