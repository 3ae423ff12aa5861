use std::collections::BTreeMap;
use std::time::Instant;

use amc_core::semantics::Model;
use serde::Serialize;

#[derive(Debug, Default, Serialize)]
pub struct Sizes {
    pub states: usize,
    pub transitions: usize,
    pub eps_loops: usize,
}

impl Sizes {
    pub fn of(model: &Model) -> Self {
        Self {
            states: model.state_count(),
            transitions: model.transition_count(),
            eps_loops: model.eps_loop_count(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerdictEntry {
    pub formula: String,
    pub strategy: String,
    pub semantics: String,
    pub verdict: String,
    pub strategies_checked: u128,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct AmpleEntry {
    pub state: String,
    pub decision: String,
}

#[derive(Debug, Serialize)]
pub struct OracleEntry {
    pub name: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Machine-readable record of one invocation. Timings are only present
/// when requested, so reports of identical runs compare byte for byte.
#[derive(Debug, Default, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Sizes>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced: Option<Sizes>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expanded: Option<Sizes>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduction_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub verdicts: Vec<VerdictEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ample: Vec<AmpleEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub oracles: Vec<OracleEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

impl RunReport {
    pub fn new(command: Vec<String>, timings: bool) -> Self {
        Self {
            command,
            timings_ms: timings.then(BTreeMap::new),
            ..Self::default()
        }
    }

    /// Runs `f`, recording its wall time under `phase` when timings are on.
    pub fn phase<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if let Some(t) = &mut self.timings_ms {
            *t.entry(phase.to_string()).or_default() += start.elapsed().as_secs_f64() * 1e3;
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}
