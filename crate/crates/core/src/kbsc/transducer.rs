use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::model::{AgentId, Amas, LocalId};

use super::expansion::AgentExpansion;
use super::KbscError;

/// A finite-memory strategy for one agent: memory states are the agent's
/// knowledge states, inputs are its observed local states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transducer {
    pub agent: AgentId,
    pub locs: Vec<LocalId>,
    /// Partial update function; undefined pairs are off-strategy.
    pub delta: BTreeMap<(usize, LocalId), usize>,
    /// Choice index into the repertoire at `locs[q]`.
    pub output: Vec<u32>,
}

impl Transducer {
    pub fn initial(&self) -> usize {
        0
    }

    pub fn step(&self, q: usize, observation: LocalId) -> Result<usize, KbscError> {
        self.delta
            .get(&(q, observation))
            .copied()
            .ok_or(KbscError::OffStrategy {
                agent: self.agent,
                memory: q,
                observation,
            })
    }

    /// Table rows `(memory, observation) -> (next memory, output choice)`.
    pub fn to_table(&self, amas: &Amas, names: &[String]) -> String {
        let module = amas.agent(self.agent);
        let mut out = String::new();
        let _ = writeln!(out, "# transducer for {}", module.name);
        for (&(q, l), &next) in &self.delta {
            let choice = &module.choices(self.locs[next])[self.output[next] as usize];
            let events: Vec<&str> = choice.events().iter().map(|&e| amas.event_name(e)).collect();
            let _ = writeln!(
                out,
                "{} {} -> {} {{{}}}",
                names[q],
                module.local_name(l),
                names[next],
                events.join(",")
            );
        }
        out
    }
}

/// The transducer whose output is `strategy[q]` and whose update follows
/// the expansion under that choice. Stuttering observations keep the memory.
pub fn extract_transducer(exp: &AgentExpansion, strategy: &[u32]) -> Result<Transducer, KbscError> {
    let mut delta = BTreeMap::new();
    for q in 0..exp.len() {
        delta.insert((q, exp.locs[q]), q);
        let reached = exp
            .successors
            .get(&(q, strategy[q]))
            .map(Vec::as_slice)
            .unwrap_or(&[]);
        for &next in reached {
            if delta.insert((q, exp.locs[next]), next).is_some() {
                return Err(KbscError::AmbiguousObservation {
                    agent: exp.agent,
                    memory: q,
                    observation: exp.locs[next],
                });
            }
        }
    }
    Ok(Transducer {
        agent: exp.agent,
        locs: exp.locs.clone(),
        delta,
        output: strategy.to_vec(),
    })
}
