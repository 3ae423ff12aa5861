use std::collections::{BTreeSet, HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::model::{PropId, StateId};
use crate::semantics::Model;

use super::ReductionContext;

type Letter = Vec<PropId>;

/// A destuttered ultimately periodic word `stem · cycle^ω`, in its unique
/// form: shortest stem, primitive cycle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StutterWord {
    pub stem: Vec<Letter>,
    pub cycle: Vec<Letter>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StutterVerdict {
    /// Every lasso of the full model is matched, and none was cut off.
    Holds { lassos: usize },
    /// A lasso of the full model whose destuttered word the reduced model
    /// cannot produce.
    Refuted { stem: Vec<StateId>, cycle: Vec<StateId> },
    /// All enumerated lassos matched, but longer ones exist.
    Inconclusive { lassos: usize },
}

fn destutter(letters: impl IntoIterator<Item = Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if out.last() != Some(&l) {
            out.push(l);
        }
    }
    out
}

fn canonical_word(stem: &[Letter], cycle: &[Letter]) -> StutterWord {
    let mut c = destutter(cycle.iter().cloned());
    while c.len() > 1 && c.first() == c.last() {
        c.pop();
    }
    let period = (1..=c.len())
        .find(|&p| c.len() % p == 0 && (0..c.len()).all(|i| c[i] == c[(i + p) % c.len()]))
        .unwrap_or(1);
    let unrolled = stem
        .iter()
        .cloned()
        .chain((0..4).flat_map(|_| cycle.iter().cloned()));
    let d = destutter(unrolled);
    let mut i = d.len() - period;
    while i > 0 && d[i - 1] == d[i - 1 + period] {
        i -= 1;
    }
    StutterWord {
        stem: d[..i].to_vec(),
        cycle: d[i..i + period].to_vec(),
    }
}

fn letter(model: &Model, s: StateId, props: &BTreeSet<PropId>) -> Letter {
    model.valuation(s).intersection(props).copied().collect()
}

/// Whether some infinite path of `model` has destuttered word `word`.
fn produces(model: &Model, word: &StutterWord, props: &BTreeSet<PropId>) -> bool {
    let letters: Vec<&Letter> = word.stem.iter().chain(&word.cycle).collect();
    let loop_start = word.stem.len();
    let next = |pos: usize| if pos + 1 < letters.len() { pos + 1 } else { loop_start };

    let start = (model.initial(), 0usize);
    if &letter(model, start.0, props) != letters[0] {
        return false;
    }
    let mut graph: DiGraph<(StateId, usize), bool> = DiGraph::new();
    let mut index: HashMap<(StateId, usize), NodeIndex> = HashMap::new();
    index.insert(start, graph.add_node(start));
    let mut queue = VecDeque::from([start]);
    while let Some((s, pos)) = queue.pop_front() {
        let from = index[&(s, pos)];
        for t in model.successors(s) {
            let l = letter(model, t, props);
            let (to, advancing) = if &l == letters[pos] {
                ((t, pos), false)
            } else if &l == letters[next(pos)] {
                ((t, next(pos)), true)
            } else {
                continue;
            };
            let target = *index.entry(to).or_insert_with(|| {
                queue.push_back(to);
                graph.add_node(to)
            });
            graph.add_edge(from, target, advancing);
        }
    }

    let constant_tail = word.cycle.len() == 1;
    for scc in tarjan_scc(&graph) {
        let members: BTreeSet<NodeIndex> = scc.iter().copied().collect();
        if graph[scc[0]].1 < loop_start {
            continue;
        }
        let mut internal = graph
            .edge_indices()
            .filter(|&e| {
                let (a, b) = graph.edge_endpoints(e).unwrap();
                members.contains(&a) && members.contains(&b)
            })
            .peekable();
        let accepting = if constant_tail {
            internal.peek().is_some()
        } else {
            internal.any(|e| graph[e])
        };
        if accepting {
            return true;
        }
    }
    false
}

/// Bounded check that every path of `full` has a stutter-equivalent path in
/// `reduced` over the context's propositions.
///
/// Simple lassos of `full` with at most `bound` transitions are enumerated;
/// each destuttered word is then searched for exactly in `reduced`.
pub fn stutter_equiv_bounded(full: &Model, reduced: &Model, ctx: &ReductionContext, bound: usize) -> StutterVerdict {
    let props = &ctx.props;
    let mut verdicts: HashMap<StutterWord, bool> = HashMap::new();
    let mut lassos = 0usize;
    let mut truncated = false;

    let mut path = vec![full.initial()];
    let mut on_path: HashMap<StateId, usize> = HashMap::from([(full.initial(), 0)]);
    let mut iters = vec![full.successors(full.initial()).into_iter()];
    while let Some(it) = iters.last_mut() {
        match it.next() {
            Some(t) => {
                if let Some(&i) = on_path.get(&t) {
                    lassos += 1;
                    let stem: Vec<Letter> = path[..i].iter().map(|&s| letter(full, s, props)).collect();
                    let cycle: Vec<Letter> = path[i..].iter().map(|&s| letter(full, s, props)).collect();
                    let word = canonical_word(&stem, &cycle);
                    let ok = *verdicts
                        .entry(word)
                        .or_insert_with_key(|w| produces(reduced, w, props));
                    if !ok {
                        return StutterVerdict::Refuted {
                            stem: path[..i].to_vec(),
                            cycle: path[i..].to_vec(),
                        };
                    }
                } else if path.len() < bound {
                    on_path.insert(t, path.len());
                    path.push(t);
                    iters.push(full.successors(t).into_iter());
                } else {
                    truncated = true;
                }
            }
            None => {
                iters.pop();
                if let Some(s) = path.pop() {
                    on_path.remove(&s);
                }
            }
        }
    }
    if truncated {
        StutterVerdict::Inconclusive { lassos }
    } else {
        StutterVerdict::Holds { lassos }
    }
}
