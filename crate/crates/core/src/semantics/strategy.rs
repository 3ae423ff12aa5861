use std::collections::{BTreeSet, HashMap};

use crate::model::{AgentId, Amas, LocalId};

use super::{GlobalState, Model, SemanticsError};

/// A uniform memoryless strategy for a coalition: one choice index per local
/// state of each member.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StrategyIr {
    coalition: BTreeSet<AgentId>,
    /// Indexed by agent; `None` for agents outside the coalition.
    choices: Vec<Option<Vec<u32>>>,
}

impl StrategyIr {
    /// Builds a strategy from explicit per-local choices, checking that
    /// every choice lies in the repertoire.
    pub fn new(
        amas: &Amas,
        choices: impl IntoIterator<Item = (AgentId, Vec<u32>)>,
    ) -> Result<Self, SemanticsError> {
        let mut table = vec![None; amas.agents.len()];
        let mut coalition = BTreeSet::new();
        for (agent, per_local) in choices {
            let module = amas
                .agents
                .get(agent.index())
                .ok_or(SemanticsError::UnknownAgent(agent))?;
            if per_local.len() != module.locals.len() {
                return Err(SemanticsError::InvalidStrategy(format!(
                    "agent {} needs {} entries, got {}",
                    module.name,
                    module.locals.len(),
                    per_local.len()
                )));
            }
            for (l, &c) in per_local.iter().enumerate() {
                if c as usize >= module.repertoire[l].len() {
                    return Err(SemanticsError::ChoiceNotInRepertoire {
                        agent,
                        choice: c as usize,
                    });
                }
            }
            coalition.insert(agent);
            table[agent.index()] = Some(per_local);
        }
        Ok(Self {
            coalition,
            choices: table,
        })
    }

    /// The empty coalition's (unique) strategy.
    pub fn empty(amas: &Amas) -> Self {
        Self {
            coalition: BTreeSet::new(),
            choices: vec![None; amas.agents.len()],
        }
    }

    pub fn coalition(&self) -> &BTreeSet<AgentId> {
        &self.coalition
    }

    pub fn choice(&self, agent: AgentId, local: LocalId) -> Option<u32> {
        self.choices[agent.index()]
            .as_ref()
            .map(|c| c[local.index()])
    }

    pub fn agent_choices(&self, agent: AgentId) -> Option<&[u32]> {
        self.choices[agent.index()].as_deref()
    }

    /// `σ_A(g)` as a partial choice vector.
    pub fn partial(&self, g: &GlobalState) -> Vec<Option<u32>> {
        self.choices
            .iter()
            .enumerate()
            .map(|(i, c)| c.as_ref().map(|c| c[g.0[i].index()]))
            .collect()
    }

    /// Human-readable `Agent.local -> {events}` lines.
    pub fn describe(&self, amas: &Amas) -> Vec<String> {
        let mut out = Vec::new();
        for &agent in &self.coalition {
            let module = amas.agent(agent);
            for (l, &c) in self.choices[agent.index()].as_ref().unwrap().iter().enumerate() {
                let choice = &module.repertoire[l][c as usize];
                let events: Vec<&str> = choice.events().iter().map(|&e| amas.event_name(e)).collect();
                out.push(format!(
                    "{}.{} -> {{{}}}",
                    module.name,
                    module.locals[l],
                    events.join(",")
                ));
            }
        }
        out
    }
}

/// The finite space of ir strategies of a coalition, enumerated in
/// lexicographic order over (agent, local state, choice index).
///
/// Only local states occurring in the model are varied; the others are
/// pinned to choice 0, since they can never influence an outcome.
pub struct StrategySpace {
    amas_agents: usize,
    /// `(agent, local, repertoire size)` per varied digit.
    digits: Vec<(AgentId, LocalId, u32)>,
    digit_index: HashMap<(AgentId, LocalId), usize>,
    base: Vec<Option<Vec<u32>>>,
    coalition: BTreeSet<AgentId>,
    count: Option<u128>,
}

impl StrategySpace {
    pub fn new(model: &Model, coalition: &BTreeSet<AgentId>) -> Result<Self, SemanticsError> {
        let amas = model.amas();
        let mut occurring: Vec<BTreeSet<LocalId>> = vec![BTreeSet::new(); amas.agents.len()];
        for g in model.states() {
            for (i, &l) in g.0.iter().enumerate() {
                occurring[i].insert(l);
            }
        }
        let mut digits = Vec::new();
        let mut base = vec![None; amas.agents.len()];
        let mut count: Option<u128> = Some(1);
        for &agent in coalition {
            let module = amas
                .agents
                .get(agent.index())
                .ok_or(SemanticsError::UnknownAgent(agent))?;
            base[agent.index()] = Some(vec![0; module.locals.len()]);
            for &l in &occurring[agent.index()] {
                let size = module.repertoire[l.index()].len() as u32;
                count = count.and_then(|c| c.checked_mul(size as u128));
                if size > 1 {
                    digits.push((agent, l, size));
                }
            }
        }
        let digit_index = digits
            .iter()
            .enumerate()
            .map(|(d, &(a, l, _))| ((a, l), d))
            .collect();
        Ok(Self {
            amas_agents: amas.agents.len(),
            digits,
            digit_index,
            base,
            coalition: coalition.clone(),
            count,
        })
    }

    /// Number of strategies; `None` on overflow.
    pub fn count(&self) -> Option<u128> {
        self.count
    }

    pub fn iter(&self) -> impl Iterator<Item = StrategyIr> + '_ {
        let mut odometer = Some(vec![0u32; self.digits.len()]);
        std::iter::from_fn(move || {
            let current = odometer.take()?;
            let strategy = self.strategy_at(&current);
            let mut next = current;
            if self.advance(&mut next, self.digits.len()) {
                odometer = Some(next);
            }
            Some(strategy)
        })
    }

    /// Number of varied digits (local states with more than one choice).
    pub(crate) fn digit_count(&self) -> usize {
        self.digits.len()
    }

    /// Position of the digit for `(agent, local)`, if it is varied.
    pub(crate) fn digit_of(&self, agent: AgentId, local: LocalId) -> Option<usize> {
        self.digit_index.get(&(agent, local)).copied()
    }

    pub(crate) fn strategy_at(&self, odometer: &[u32]) -> StrategyIr {
        let mut choices = self.base.clone();
        for (&(agent, local, _), &c) in self.digits.iter().zip(odometer) {
            choices[agent.index()].as_mut().unwrap()[local.index()] = c;
        }
        debug_assert_eq!(choices.len(), self.amas_agents);
        StrategyIr {
            coalition: self.coalition.clone(),
            choices,
        }
    }

    /// Increments the odometer at digit `end - 1`, resetting all less
    /// significant digits. Skips every strategy that differs from the
    /// current one only at positions `>= end`. Returns false when exhausted.
    pub(crate) fn advance(&self, odometer: &mut [u32], end: usize) -> bool {
        for pos in end..odometer.len() {
            odometer[pos] = 0;
        }
        for pos in (0..end).rev() {
            odometer[pos] += 1;
            if odometer[pos] < self.digits[pos].2 {
                return true;
            }
            odometer[pos] = 0;
        }
        false
    }
}
