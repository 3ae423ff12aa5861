//! Benchmark and test-corpus generators.

mod asvr;
mod random;

pub use asvr::gen_asvr;
pub use random::{formula_suite, random_amas, random_corpus, RandomParams};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchError {
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
}

/// Two agents, each with one private event leading to an absorbing state.
/// With `visible` set, each absorbing state carries a proposition
/// (`done1`, `done2`).
pub fn diamond(visible: bool) -> String {
    let mut out = String::new();
    for i in 1..=2 {
        out.push_str(&format!(
            "agent D{i} {{\n  states s0, s1\n  init s0\n  events a{i}\n  props done{i}\n  transitions\n    s0 -a{i}-> s1\n  repertoire\n    s0: [{{a{i}}}]\n    s1: [{{a{i}}}]\n"
        ));
        if visible {
            out.push_str(&format!("  labels\n    s1: done{i}\n"));
        }
        out.push_str("}\n\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_amas, render};
    use crate::model::validate;

    #[test]
    fn asvr_shapes_match_the_figure() {
        let amas = parse_amas(&gen_asvr(2, 2).unwrap()).unwrap();
        assert_eq!(amas.agents.len(), 3);
        assert_eq!(amas.agents[0].locals.len(), 11);
        assert_eq!(amas.agents[2].locals.len(), 7);
        assert!(validate(&amas).is_empty());
        let amas = parse_amas(&gen_asvr(1, 1).unwrap()).unwrap();
        assert_eq!(amas.agents[0].locals.len(), 6);
        assert_eq!(amas.agents[1].locals.len(), 3);
        assert!(gen_asvr(0, 2).is_err());
    }

    #[test]
    fn random_sources_validate_and_round_trip() {
        for (_, src) in random_corpus(7, 40, &RandomParams::default()) {
            let amas = parse_amas(&src).unwrap_or_else(|e| panic!("{}\n{src}", e.message()));
            assert!(amas.agents.len() <= 4);
            assert!(amas.agents.iter().all(|a| a.locals.len() <= 8));
            assert!(amas
                .agents
                .iter()
                .all(|a| a.transitions.iter().all(|(f, _, t)| f != t)));
            assert_eq!(parse_amas(&render(&amas)).unwrap(), amas);
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let p = RandomParams::default();
        assert_eq!(random_amas(11, &p), random_amas(11, &p));
        assert_ne!(random_amas(11, &p), random_amas(12, &p));
    }
}
