//! Embedded reference values for the `table1` regression command.

use melan::{BridgeParams, LcMode, LoadProfile};
use serde::{Deserialize, Serialize};

const DATA: &str = include_str!("../data/table1_reference.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefValue {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    pub cell: String,
}

impl RefValue {
    pub fn tolerance(&self) -> f64 {
        match (self.rel_tol, self.abs_tol) {
            (Some(r), _) => r * self.value.abs(),
            (None, Some(a)) => a,
            (None, None) => 0.0,
        }
    }

    pub fn accepts(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.tolerance()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefCase {
    pub label: String,
    pub load: LoadProfile,
    pub gamma_fix: RefValue,
    pub max_displacement: RefValue,
    pub gap: RefValue,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub version: u32,
    pub lc_mode: LcMode,
    pub n_intervals: usize,
    pub bridge: BridgeParams,
    pub case: Vec<RefCase>,
}

impl Reference {
    pub fn embedded() -> Self {
        toml::from_str(DATA).expect("embedded reference data parses")
    }

    /// Reference values only apply to the parameters they were computed for.
    pub fn applies_to(&self, params: &BridgeParams) -> bool {
        let p = params;
        let r = &self.bridge;
        (p.length, p.flexural_rigidity, p.cable_stiffness, p.dead_load, p.tension)
            == (r.length, r.flexural_rigidity, r.cable_stiffness, r.dead_load, r.tension)
    }
}
