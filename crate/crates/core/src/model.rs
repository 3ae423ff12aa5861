//! Agents, events, choices and AMAS instances.
//!
//! Everything here is plain data: identifiers are dense integers assigned in
//! order of first declaration, so two AMAS built from the same source compare
//! equal field by field.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }

            pub fn from_index(index: usize) -> Self {
                Self(index as u32)
            }
        }
    };
}

dense_id!(
    /// Position of an agent in [`Amas::agents`].
    AgentId
);
dense_id!(
    /// Global event identifier; `0` is the silent event.
    EventId
);
dense_id!(
    /// Index into an agent's local state list.
    LocalId
);
dense_id!(
    /// Global proposition identifier.
    PropId
);
dense_id!(
    /// Index of a global state within one model.
    StateId
);

/// The silent event. It belongs to no agent.
pub const EPSILON: EventId = EventId(0);
pub const EPSILON_NAME: &str = "epsilon";

#[derive(Clone, Debug, Default)]
struct Interner {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Interner {
    fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }
}

impl PartialEq for Interner {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
    }
}

impl Eq for Interner {}

/// Global event interner. Slot 0 is always the silent event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventTable(Interner);

impl Default for EventTable {
    fn default() -> Self {
        let mut inner = Interner::default();
        inner.intern(EPSILON_NAME);
        Self(inner)
    }
}

impl EventTable {
    pub fn intern(&mut self, name: &str) -> EventId {
        EventId(self.0.intern(name))
    }

    pub fn lookup(&self, name: &str) -> Option<EventId> {
        self.0.get(name).map(EventId)
    }

    pub fn name(&self, id: EventId) -> &str {
        &self.0.names[id.index()]
    }

    pub fn len(&self) -> usize {
        self.0.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.names.is_empty()
    }

    pub fn contains(&self, id: EventId) -> bool {
        id.index() < self.len()
    }

    /// All events except the silent one, in id order.
    pub fn proper(&self) -> impl Iterator<Item = EventId> + '_ {
        (1..self.len()).map(EventId::from_index)
    }
}

/// Global proposition interner.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropTable(Interner);

impl PropTable {
    pub fn intern(&mut self, name: &str) -> PropId {
        PropId(self.0.intern(name))
    }

    pub fn lookup(&self, name: &str) -> Option<PropId> {
        self.0.get(name).map(PropId)
    }

    pub fn name(&self, id: PropId) -> &str {
        &self.0.names[id.index()]
    }

    pub fn len(&self) -> usize {
        self.0.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = PropId> {
        (0..self.len()).map(PropId::from_index)
    }
}

/// A set of events an agent may commit to. Kept sorted and deduplicated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Choice {
    events: Vec<EventId>,
}

impl Choice {
    pub fn new(events: impl IntoIterator<Item = EventId>) -> Self {
        let mut events: Vec<EventId> = events.into_iter().collect();
        events.sort_unstable();
        events.dedup();
        Self { events }
    }

    pub fn events(&self) -> &[EventId] {
        &self.events
    }

    pub fn contains(&self, event: EventId) -> bool {
        self.events.binary_search(&event).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// One agent's local automaton together with its repertoire and labelling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentModule {
    pub name: String,
    pub index: AgentId,
    pub locals: Vec<String>,
    pub initial: LocalId,
    pub events: BTreeSet<EventId>,
    /// Indexed by local state.
    pub repertoire: Vec<Vec<Choice>>,
    pub transitions: BTreeSet<(LocalId, EventId, LocalId)>,
    pub props: BTreeSet<PropId>,
    /// Indexed by local state.
    pub valuation: Vec<BTreeSet<PropId>>,
}

impl AgentModule {
    pub fn local_name(&self, local: LocalId) -> &str {
        &self.locals[local.index()]
    }

    pub fn local_by_name(&self, name: &str) -> Option<LocalId> {
        self.locals
            .iter()
            .position(|l| l == name)
            .map(LocalId::from_index)
    }

    pub fn choices(&self, local: LocalId) -> &[Choice] {
        &self.repertoire[local.index()]
    }

    /// Successors of `local` under `event`; more than one only for expansions.
    pub fn successors(&self, local: LocalId, event: EventId) -> impl Iterator<Item = LocalId> + '_ {
        self.transitions
            .range((local, event, LocalId(0))..=(local, event, LocalId(u32::MAX)))
            .map(|&(_, _, to)| to)
    }

    pub fn is_deterministic(&self) -> bool {
        self.transitions
            .iter()
            .zip(self.transitions.iter().skip(1))
            .all(|(a, b)| (a.0, a.1) != (b.0, b.1))
    }
}

/// An asynchronous multi-agent system.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Amas {
    pub agents: Vec<AgentModule>,
    pub events: EventTable,
    pub props: PropTable,
    /// Local transition relations may map `(l, event)` to several states.
    /// Only knowledge-state expansions set this.
    pub nondeterministic: bool,
}

impl Amas {
    pub fn agent(&self, id: AgentId) -> &AgentModule {
        &self.agents[id.index()]
    }

    pub fn agent_by_name(&self, name: &str) -> Option<AgentId> {
        self.agents
            .iter()
            .position(|a| a.name == name)
            .map(AgentId::from_index)
    }

    pub fn agent_ids(&self) -> impl Iterator<Item = AgentId> {
        (0..self.agents.len()).map(AgentId::from_index)
    }

    pub fn event_name(&self, id: EventId) -> &str {
        self.events.name(id)
    }

    pub fn prop_name(&self, id: PropId) -> &str {
        self.props.name(id)
    }

    /// `Agent(α)` for every event, indexed by event id.
    pub fn agents_by_event(&self) -> Vec<Vec<AgentId>> {
        let mut table = vec![Vec::new(); self.events.len()];
        for agent in &self.agents {
            for &event in &agent.events {
                if let Some(slot) = table.get_mut(event.index()) {
                    slot.push(agent.index);
                }
            }
        }
        table
    }

    /// Owner of each proposition (the first declaring agent).
    pub fn prop_owner(&self, prop: PropId) -> Option<AgentId> {
        self.agents
            .iter()
            .find(|a| a.props.contains(&prop))
            .map(|a| a.index)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("undeclared event (id {0})")]
    UndeclaredEvent(u32),
}

/// `Agent(α)`: the agents whose event set contains `event`. Empty for ε.
pub fn agents_of(amas: &Amas, event: EventId) -> Result<BTreeSet<AgentId>, ModelError> {
    if !amas.events.contains(event) {
        return Err(ModelError::UndeclaredEvent(event.0));
    }
    Ok(amas
        .agents
        .iter()
        .filter(|a| a.events.contains(&event))
        .map(|a| a.index)
        .collect())
}

/// A violated well-formedness rule.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    NoAgents,
    AgentIndex,
    DuplicateAgentName,
    NoLocalStates,
    DuplicateLocalName,
    InitialUndeclared,
    RepertoireMissing,
    EmptyRepertoire,
    EmptyChoice,
    ChoiceEventNotOwned,
    ReservedEvent,
    UndeclaredEvent,
    TransitionUnknownLocal,
    TransitionEventNotOwned,
    TransitionNotInRepertoire,
    Nondeterministic,
    ValuationMissing,
    ValuationNotOwned,
    PropositionNotDisjoint,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            Rule::NoAgents => "no agents",
            Rule::AgentIndex => "agent index inconsistent with position",
            Rule::DuplicateAgentName => "duplicate agent name",
            Rule::NoLocalStates => "no local states",
            Rule::DuplicateLocalName => "duplicate local state",
            Rule::InitialUndeclared => "initial state is not a local state",
            Rule::RepertoireMissing => "repertoire undefined",
            Rule::EmptyRepertoire => "empty repertoire",
            Rule::EmptyChoice => "empty choice",
            Rule::ChoiceEventNotOwned => "choice event not in the agent's events",
            Rule::ReservedEvent => "reserved event name",
            Rule::UndeclaredEvent => "undeclared event",
            Rule::TransitionUnknownLocal => "transition on undeclared local state",
            Rule::TransitionEventNotOwned => "transition event not in the agent's events",
            Rule::TransitionNotInRepertoire => "transition event not offered by the repertoire",
            Rule::Nondeterministic => "nondeterministic local transition",
            Rule::ValuationMissing => "valuation undefined",
            Rule::ValuationNotOwned => "valuation uses an undeclared proposition",
            Rule::PropositionNotDisjoint => "proposition not disjoint",
        };
        f.write_str(text)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub agent: Option<AgentId>,
    pub location: String,
    pub rule: Rule,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.agent {
            Some(agent) => write!(f, "agent {}", agent.0 + 1)?,
            None => f.write_str("system")?,
        }
        if !self.location.is_empty() {
            write!(f, " at {}", self.location)?;
        }
        write!(f, ": {}", self.rule)
    }
}

/// Checks every AMAS invariant; an empty result means the system is valid.
pub fn validate(amas: &Amas) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if amas.agents.is_empty() {
        out.push(Diagnostic {
            agent: None,
            location: String::new(),
            rule: Rule::NoAgents,
        });
    }
    let mut seen_names = BTreeSet::new();
    for (pos, agent) in amas.agents.iter().enumerate() {
        let mut diag = |location: String, rule: Rule| {
            out.push(Diagnostic {
                agent: Some(AgentId::from_index(pos)),
                location,
                rule,
            })
        };
        if agent.index.index() != pos {
            diag(agent.name.clone(), Rule::AgentIndex);
        }
        if !seen_names.insert(agent.name.as_str()) {
            diag(agent.name.clone(), Rule::DuplicateAgentName);
        }
        validate_agent(amas, agent, &mut diag);
    }

    for (i, a) in amas.agents.iter().enumerate() {
        for b in &amas.agents[i + 1..] {
            for prop in a.props.intersection(&b.props) {
                out.push(Diagnostic {
                    agent: Some(b.index),
                    location: amas.props.name(*prop).to_string(),
                    rule: Rule::PropositionNotDisjoint,
                });
            }
        }
    }
    out
}

fn validate_agent(amas: &Amas, agent: &AgentModule, diag: &mut impl FnMut(String, Rule)) {
    let n_locals = agent.locals.len();
    if n_locals == 0 {
        diag(String::new(), Rule::NoLocalStates);
    }
    let mut names = BTreeSet::new();
    for name in &agent.locals {
        if !names.insert(name) {
            diag(name.clone(), Rule::DuplicateLocalName);
        }
    }
    if agent.initial.index() >= n_locals {
        diag("init".into(), Rule::InitialUndeclared);
    }
    for &event in &agent.events {
        if event == EPSILON {
            diag(EPSILON_NAME.into(), Rule::ReservedEvent);
        } else if !amas.events.contains(event) {
            diag(format!("event {}", event.0), Rule::UndeclaredEvent);
        }
    }

    let local_label = |l: usize| {
        agent
            .locals
            .get(l)
            .cloned()
            .unwrap_or_else(|| format!("#{l}"))
    };

    if agent.repertoire.len() < n_locals {
        for l in agent.repertoire.len()..n_locals {
            diag(local_label(l), Rule::RepertoireMissing);
        }
    }
    for (l, choices) in agent.repertoire.iter().enumerate() {
        if choices.is_empty() {
            diag(local_label(l), Rule::EmptyRepertoire);
        }
        for choice in choices {
            if choice.is_empty() {
                diag(local_label(l), Rule::EmptyChoice);
            }
            for event in choice.events() {
                if !agent.events.contains(event) {
                    diag(local_label(l), Rule::ChoiceEventNotOwned);
                }
            }
        }
    }

    let mut last: Option<(LocalId, EventId)> = None;
    for &(from, event, to) in &agent.transitions {
        let location = format!(
            "{} -{}-> {}",
            local_label(from.index()),
            if amas.events.contains(event) {
                amas.events.name(event).to_string()
            } else {
                format!("#{}", event.0)
            },
            local_label(to.index())
        );
        if from.index() >= n_locals || to.index() >= n_locals {
            diag(location, Rule::TransitionUnknownLocal);
            continue;
        }
        if !agent.events.contains(&event) {
            diag(location.clone(), Rule::TransitionEventNotOwned);
        } else if !agent.repertoire[from.index()]
            .iter()
            .any(|c| c.contains(event))
        {
            diag(location.clone(), Rule::TransitionNotInRepertoire);
        }
        if !amas.nondeterministic && last == Some((from, event)) {
            diag(location, Rule::Nondeterministic);
        }
        last = Some((from, event));
    }

    if agent.valuation.len() < n_locals {
        for l in agent.valuation.len()..n_locals {
            diag(local_label(l), Rule::ValuationMissing);
        }
    }
    for (l, props) in agent.valuation.iter().enumerate() {
        if !props.is_subset(&agent.props) {
            diag(local_label(l), Rule::ValuationNotOwned);
        }
    }
}
