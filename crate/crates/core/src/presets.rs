//! Named test Hamiltonians with pinned coefficient lists (see `presets/`).

use serde::Deserialize;

use crate::algebra::{FormalSeries, SeriesTerm};
use crate::error::{Error, Result};
use crate::resonance::Frequency;

pub const PRESET_NAMES: [&str; 3] = ["one-one-resonance", "golden-mean", "henon-heiles-like"];

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub n: usize,
    pub frequency: Frequency,
    pub terms: Vec<SeriesTerm>,
}

impl Preset {
    /// The perturbation as a series truncated at `max_degree`.
    pub fn series(&self, max_degree: usize) -> Result<FormalSeries> {
        FormalSeries::from_literal(Some(self.n), max_degree, &self.terms)
    }
}

fn source(name: &str) -> Option<&'static str> {
    match name {
        "one-one-resonance" => Some(include_str!("../../../presets/one-one-resonance.json")),
        "golden-mean" => Some(include_str!("../../../presets/golden-mean.json")),
        "henon-heiles-like" => Some(include_str!("../../../presets/henon-heiles-like.json")),
        _ => None,
    }
}

pub fn preset(name: &str) -> Result<Preset> {
    let text = source(name).ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_load_and_are_real() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            let h = p.series(8).unwrap();
            assert_eq!(h.min_degree(), Some(3), "{name}");
            assert!(h.is_real(1e-15), "{name}");
            assert_eq!(p.frequency.n(), p.n);
        }
        assert_eq!(preset("one-one-resonance").unwrap().terms.len(), 20);
        assert!(matches!(preset("nope"), Err(Error::UnknownPreset(_))));
    }
}
