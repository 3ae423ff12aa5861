use crate::model::{AgentId, Amas, EventId, LocalId};

use super::{ChoiceTuple, GlobalState};

/// Successor generator shared by full exploration and the reducer.
pub struct Explorer<'a> {
    amas: &'a Amas,
    agents_of: Vec<Vec<AgentId>>,
    /// `[agent][local]` → sorted `(event, target)` pairs.
    local_moves: Vec<Vec<Vec<(EventId, LocalId)>>>,
}

impl<'a> Explorer<'a> {
    pub fn new(amas: &'a Amas) -> Self {
        let local_moves = amas
            .agents
            .iter()
            .map(|agent| {
                let mut per_local = vec![Vec::new(); agent.locals.len()];
                for &(from, event, to) in &agent.transitions {
                    per_local[from.index()].push((event, to));
                }
                per_local
            })
            .collect();
        Self {
            amas,
            agents_of: amas.agents_by_event(),
            local_moves,
        }
    }

    pub fn amas(&self) -> &'a Amas {
        self.amas
    }

    pub fn agents_of(&self, event: EventId) -> &[AgentId] {
        &self.agents_of[event.index()]
    }

    pub fn initial(&self) -> GlobalState {
        GlobalState(self.amas.agents.iter().map(|a| a.initial).collect())
    }

    /// Events with a local transition for agent `agent` at its component of `g`.
    pub fn local_events(&self, g: &GlobalState, agent: AgentId) -> impl Iterator<Item = EventId> + '_ {
        let moves = &self.local_moves[agent.index()][g.local(agent).index()];
        let mut last = None;
        moves.iter().filter_map(move |&(e, _)| {
            if last == Some(e) {
                None
            } else {
                last = Some(e);
                Some(e)
            }
        })
    }

    fn local_targets(&self, agent: AgentId, local: LocalId, event: EventId) -> Vec<LocalId> {
        self.local_moves[agent.index()][local.index()]
            .iter()
            .filter(|(e, _)| *e == event)
            .map(|&(_, t)| t)
            .collect()
    }

    /// Proper events executable at `g` (ignoring choices), with their targets,
    /// sorted by event and then target.
    pub fn moves(&self, g: &GlobalState) -> Vec<(EventId, GlobalState)> {
        let mut candidates: Vec<EventId> = self
            .amas
            .agent_ids()
            .flat_map(|i| self.local_events(g, i))
            .collect();
        candidates.sort_unstable();
        candidates.dedup();

        let mut out = Vec::new();
        'event: for event in candidates {
            let owners = self.agents_of(event);
            let mut options = Vec::with_capacity(owners.len());
            for &j in owners {
                let targets = self.local_targets(j, g.local(j), event);
                if targets.is_empty() {
                    continue 'event;
                }
                options.push(targets);
            }
            let mut targets = vec![g.clone()];
            for (&j, opts) in owners.iter().zip(&options) {
                targets = targets
                    .into_iter()
                    .flat_map(|t| {
                        opts.iter().map(move |&l| {
                            let mut next = t.clone();
                            next.0[j.index()] = l;
                            next
                        })
                    })
                    .collect();
            }
            targets.sort();
            targets.dedup();
            out.extend(targets.into_iter().map(|t| (event, t)));
        }
        out
    }

    /// Whether every owner of `event` has some choice containing it at `g`.
    pub fn chooseable(&self, g: &GlobalState, event: EventId) -> bool {
        self.agents_of(event).iter().all(|&j| {
            self.amas
                .agent(j)
                .choices(g.local(j))
                .iter()
                .any(|c| c.contains(event))
        })
    }

    /// [`Explorer::moves`] restricted to events some choice tuple enables.
    pub fn enabled_moves(&self, g: &GlobalState) -> Vec<(EventId, GlobalState)> {
        let mut out = self.moves(g);
        out.retain(|(e, _)| self.chooseable(g, *e));
        out
    }

    /// Repertoire sizes at `g`, one per agent.
    pub fn repertoire_sizes(&self, g: &GlobalState) -> Vec<usize> {
        self.amas
            .agents
            .iter()
            .map(|a| a.choices(g.local(a.index)).len())
            .collect()
    }

    /// Whether the tuple lets `event` fire: every owner's choice contains it.
    pub fn tuple_enables(&self, g: &GlobalState, tuple: &ChoiceTuple, event: EventId) -> bool {
        self.agents_of(event).iter().all(|&j| {
            let agent = self.amas.agent(j);
            agent.choices(g.local(j))[tuple.choice(j)].contains(event)
        })
    }

    /// Full choice tuples at `g` under which none of `move_events` can fire.
    /// These are exactly the tuples that produce an ε-loop.
    pub fn deadlock_tuples(&self, g: &GlobalState, move_events: &[EventId]) -> Vec<ChoiceTuple> {
        let sizes = self.repertoire_sizes(g);
        let mut out = Vec::new();
        for tuple in TupleIter::new(sizes) {
            if !move_events.iter().any(|&e| self.tuple_enables(g, &tuple, e)) {
                out.push(tuple);
            }
        }
        out
    }
}

/// Odometer over all choice tuples; the last agent varies fastest.
pub(crate) struct TupleIter {
    sizes: Vec<usize>,
    next: Option<Vec<u32>>,
}

impl TupleIter {
    pub fn new(sizes: Vec<usize>) -> Self {
        let next = if sizes.iter().all(|&s| s > 0) {
            Some(vec![0; sizes.len()])
        } else {
            None
        };
        Self { sizes, next }
    }
}

impl Iterator for TupleIter {
    type Item = ChoiceTuple;

    fn next(&mut self) -> Option<ChoiceTuple> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if (succ[pos] as usize) < self.sizes[pos] {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(ChoiceTuple(current))
    }
}
