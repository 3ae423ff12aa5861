use std::collections::BTreeSet;
use std::sync::Arc;

use amc_core::bench::{random_amas, RandomParams};
use amc_core::dsl::parse_amas;
use amc_core::model::AgentId;
use amc_core::por::{check_c2, check_c3, check_submodel, reduce, ReductionContext};
use amc_core::semantics::{
    build_model, outcome_subgraph, parse_model_file, serialize_model, Limits, Model, ModelKind, OutcomeMode,
    StrategyIr,
};
use proptest::prelude::*;

fn model_for(seed: u64) -> Model {
    let amas = Arc::new(parse_amas(&random_amas(seed, &RandomParams::default())).unwrap());
    build_model(amas, &Limits::default()).unwrap()
}

fn strategy_for(model: &Model, agent: AgentId, picks: &[u32]) -> StrategyIr {
    let amas = model.amas();
    let choices: Vec<u32> = amas
        .agent(agent)
        .repertoire
        .iter()
        .enumerate()
        .map(|(i, r)| picks.get(i).copied().unwrap_or(0) % r.len() as u32)
        .collect();
    StrategyIr::new(amas, [(agent, choices)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_state_has_a_successor(seed in any::<u64>()) {
        let model = model_for(seed);
        for s in model.state_ids() {
            prop_assert!(!model.successors(s).is_empty());
        }
    }

    #[test]
    fn reactive_outcome_is_contained_in_standard(seed in any::<u64>(), picks in prop::collection::vec(any::<u32>(), 8)) {
        let model = model_for(seed);
        let sigma = strategy_for(&model, AgentId::from_index(0), &picks);
        let edges = |mode| -> BTreeSet<_> {
            let g = outcome_subgraph(&model, &sigma, mode);
            g.edges.iter().map(|&(u, e, v)| (g.nodes[u], e, g.nodes[v])).collect()
        };
        prop_assert!(edges(OutcomeMode::React).is_subset(&edges(OutcomeMode::Std)));
    }

    #[test]
    fn model_files_round_trip(seed in any::<u64>()) {
        let model = model_for(seed);
        let text = serialize_model(&model, ModelKind::Full, None);
        let parsed = parse_model_file(&text).unwrap();
        prop_assert_eq!(parsed.model.state_count(), model.state_count());
        prop_assert_eq!(serialize_model(&parsed.model, ModelKind::Full, None), text);
    }

    #[test]
    fn reductions_are_valid_submodels(seed in any::<u64>()) {
        let model = model_for(seed);
        let amas = model.amas_arc().clone();
        let first = AgentId::from_index(0);
        let ctx = ReductionContext::new([first], amas.agent(first).props.iter().copied());
        let reduced = reduce(amas, &ctx, &Limits::default()).unwrap();
        prop_assert!(reduced.model.state_count() <= model.state_count());
        prop_assert_eq!(check_submodel(&model, &reduced.model), Ok(()));
        prop_assert_eq!(check_c2(&model, &reduced, &ctx), Ok(()));
        prop_assert_eq!(check_c3(&reduced), Ok(()));
    }
}
