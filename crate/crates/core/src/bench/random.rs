use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsl::{Formula, Goal, PropFormula};
use crate::model::{AgentId, PropId};

/// Shape bounds for random AMAS generation.
#[derive(Clone, Copy, Debug)]
pub struct RandomParams {
    pub max_agents: usize,
    pub max_locals: usize,
    /// Cap on the product of local-state counts (bounds the global model).
    pub max_product: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        Self {
            max_agents: 4,
            max_locals: 8,
            max_product: 256,
        }
    }
}

/// A seeded random AMAS source. Local transitions are deterministic and
/// never self-loops; every outgoing event of a local state appears in one of
/// its 1–2 choices, and a choice may also carry an event that cannot fire
/// there.
pub fn random_amas(seed: u64, params: &RandomParams) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=params.max_agents.max(1));
    let mut sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=params.max_locals.max(2))).collect();
    while sizes.iter().product::<usize>() > params.max_product {
        let (i, _) = sizes.iter().enumerate().max_by_key(|(_, &s)| s).unwrap();
        if sizes[i] <= 2 {
            break;
        }
        sizes[i] -= 1;
    }

    let mut events: Vec<Vec<String>> = (0..n)
        .map(|i| {
            let count = rng.gen_range(1..=3);
            (0..count).map(|k| format!("e{}_{}", i + 1, k)).collect()
        })
        .collect();
    if n >= 2 {
        let shared = rng.gen_range(0..=n);
        for k in 0..shared {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            let name = format!("s{k}");
            events[a].push(name.clone());
            events[b].push(name);
        }
    }

    let mut out = String::new();
    for i in 0..n {
        let locals: Vec<String> = (0..sizes[i]).map(|l| format!("l{l}")).collect();
        let evs = &events[i];
        let _ = writeln!(out, "agent Ag{} {{", i + 1);
        let _ = writeln!(out, "  states {}", locals.join(", "));
        out.push_str("  init l0\n");
        let _ = writeln!(out, "  events {}", evs.join(", "));
        let props: Vec<String> = (0..rng.gen_range(1..=2)).map(|k| format!("p{}_{}", i + 1, k)).collect();
        let _ = writeln!(out, "  props {}", props.join(", "));

        let mut transitions = Vec::new();
        let mut repertoire = Vec::new();
        for l in 0..sizes[i] {
            let outgoing = if rng.gen_bool(0.15) {
                0
            } else {
                rng.gen_range(1..=evs.len().min(3))
            };
            let mut chosen: Vec<&String> = evs.choose_multiple(&mut rng, outgoing).collect();
            chosen.sort();
            for e in &chosen {
                let mut target = rng.gen_range(0..sizes[i] - 1);
                if target >= l {
                    target += 1;
                }
                transitions.push(format!("l{l} -{e}-> l{target}"));
            }
            let mut choices: Vec<Vec<String>> = if chosen.is_empty() {
                vec![vec![evs.choose(&mut rng).unwrap().clone()]]
            } else if chosen.len() >= 2 && rng.gen_bool(0.6) {
                let mut shuffled: Vec<String> = chosen.iter().map(|e| (*e).clone()).collect();
                shuffled.shuffle(&mut rng);
                let cut = rng.gen_range(1..shuffled.len());
                let rest = shuffled.split_off(cut);
                vec![shuffled, rest]
            } else {
                vec![chosen.iter().map(|e| (*e).clone()).collect()]
            };
            if rng.gen_bool(0.15) {
                let extra = evs.choose(&mut rng).unwrap().clone();
                let at = rng.gen_range(0..choices.len());
                if !choices[at].contains(&extra) {
                    choices[at].push(extra);
                }
            }
            if choices.len() == 1 && !chosen.is_empty() && rng.gen_bool(0.2) {
                choices.push(vec![evs.choose(&mut rng).unwrap().clone()]);
            }
            let rendered: Vec<String> = choices.iter().map(|c| format!("{{{}}}", c.join(", "))).collect();
            repertoire.push(format!("l{l}: [{}]", rendered.join(", ")));
        }
        if !transitions.is_empty() {
            out.push_str("  transitions\n");
            for t in transitions {
                let _ = writeln!(out, "    {t}");
            }
        }
        out.push_str("  repertoire\n");
        for r in repertoire {
            let _ = writeln!(out, "    {r}");
        }
        let mut labels = Vec::new();
        for l in 0..sizes[i] {
            let here: Vec<&str> = props
                .iter()
                .filter(|_| rng.gen_bool(0.4))
                .map(String::as_str)
                .collect();
            if !here.is_empty() {
                labels.push(format!("l{l}: {}", here.join(", ")));
            }
        }
        if !labels.is_empty() {
            out.push_str("  labels\n");
            for l in labels {
                let _ = writeln!(out, "    {l}");
            }
        }
        out.push_str("}\n\n");
    }
    out
}

/// `count` instances with seeds `base, base+1, ...`.
pub fn random_corpus(base: u64, count: usize, params: &RandomParams) -> Vec<(u64, String)> {
    (0..count as u64)
        .map(|k| {
            let seed = base.wrapping_add(k);
            (seed, random_amas(seed, params))
        })
        .collect()
}

fn random_prop(rng: &mut ChaCha8Rng, props: &[PropId], depth: u32) -> PropFormula {
    if props.is_empty() {
        return if rng.gen_bool(0.5) { PropFormula::True } else { PropFormula::False };
    }
    let atom = PropFormula::Atom(*props.choose(rng).unwrap());
    if depth == 0 {
        return atom;
    }
    match rng.gen_range(0..6) {
        0 => PropFormula::Not(Box::new(random_prop(rng, props, depth - 1))),
        1 => PropFormula::And(
            Box::new(random_prop(rng, props, depth - 1)),
            Box::new(random_prop(rng, props, depth - 1)),
        ),
        2 => PropFormula::Or(
            Box::new(random_prop(rng, props, depth - 1)),
            Box::new(random_prop(rng, props, depth - 1)),
        ),
        3 => PropFormula::Not(Box::new(atom)),
        _ => atom,
    }
}

fn random_modality(rng: &mut ChaCha8Rng, coalition: &[AgentId], props: &[PropId]) -> Formula {
    let mut members: Vec<AgentId> = coalition.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    if members.is_empty() {
        members.push(*coalition.choose(rng).unwrap());
    }
    let goal = match rng.gen_range(0..4) {
        0 => Goal::Eventually(random_prop(rng, props, 1)),
        1 => Goal::Always(random_prop(rng, props, 1)),
        2 => Goal::Until(random_prop(rng, props, 1), random_prop(rng, props, 1)),
        _ => Goal::Release(random_prop(rng, props, 1), random_prop(rng, props, 1)),
    };
    Formula::strategic(members, goal)
}

/// `count` seeded sATL formulas whose coalitions are nonempty subsets of
/// `coalition` and whose atoms come from `props`. About a quarter are
/// boolean combinations of two modalities.
pub fn formula_suite(seed: u64, coalition: &[AgentId], props: &[PropId], count: usize) -> Vec<Formula> {
    assert!(!coalition.is_empty(), "formula suite needs a nonempty coalition");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| match rng.gen_range(0..8) {
            0 => Formula::Not(Box::new(random_modality(&mut rng, coalition, props))),
            1 => Formula::And(
                Box::new(random_modality(&mut rng, coalition, props)),
                Box::new(random_modality(&mut rng, coalition, props)),
            ),
            2 => Formula::Or(
                Box::new(random_modality(&mut rng, coalition, props)),
                Box::new(random_modality(&mut rng, coalition, props)),
            ),
            _ => random_modality(&mut rng, coalition, props),
        })
        .collect()
}
