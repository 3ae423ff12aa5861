mod support;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use amc_core::bench::{diamond, formula_suite, gen_asvr, random_corpus, RandomParams};
use amc_core::dsl::{parse_amas, render, Formula};
use amc_core::kbsc::{
    assemble_expanded, check_iR_sound, check_intersection, replay_transducers, simulate_bounded, KbscError, SoundVerdict,
};
use amc_core::model::{AgentId, Amas, PropId};
use amc_core::por::{
    check_c2, check_c3, check_submodel, compare_verdicts, reduce, stutter_equiv_bounded, validate_c1, AmpleDecision,
    ReducedModel, ReductionContext, StutterVerdict,
};
use amc_core::semantics::{
    build_model, check_ir, export_dot, outcome_subgraph, serialize_model, DotOptions, Limits, Model, ModelKind, Move,
    OutcomeMode, SemanticsError, StrategyIr,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use support::{ample_conditions, kept_pairs, naive_check, naive_replay, well_formedness, NaiveModel, NaiveStrategy};

const RANDOM_INSTANCES: usize = 100;
const FORMULAS_PER_INSTANCE: usize = 20;
const STRATEGIES_PER_INSTANCE: usize = 10;
const DEFAULT_SEED: u64 = 20_240_917;
const MODES: [OutcomeMode; 2] = [OutcomeMode::Std, OutcomeMode::React];

struct Instance {
    name: String,
    source: String,
    amas: Arc<Amas>,
    model: Model,
    ctx: ReductionContext,
    formulas: Vec<Formula>,
    reduced: ReducedModel,
}

impl Instance {
    fn new(name: String, source: String, coalition: &[&str], extra_props: &[&str], seed: u64) -> Self {
        let amas = Arc::new(parse_amas(&source).unwrap_or_else(|e| panic!("{name}: {e}")));
        let model = build_model(amas.clone(), &Limits::default()).unwrap();
        let coalition: Vec<AgentId> = coalition.iter().map(|n| amas.agent_by_name(n).unwrap()).collect();
        let mut props: BTreeSet<PropId> = BTreeSet::new();
        for a in &coalition {
            props.extend(amas.agent(*a).props.iter().copied());
        }
        props.extend(extra_props.iter().map(|p| amas.props.lookup(p).unwrap()));
        let ctx = ReductionContext::new(coalition.iter().copied(), props.iter().copied());
        let prop_list: Vec<PropId> = props.into_iter().collect();
        let formulas = formula_suite(seed, &coalition, &prop_list, FORMULAS_PER_INSTANCE);
        let reduced = reduce(amas.clone(), &ctx, &Limits::default()).unwrap();
        Self {
            name,
            source,
            amas,
            model,
            ctx,
            formulas,
            reduced,
        }
    }
}

fn corpus_seed() -> u64 {
    std::env::var("AMC_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

fn build_corpus(seed: u64) -> Vec<Instance> {
    let mut out = Vec::new();
    for (s, src) in random_corpus(seed, RANDOM_INSTANCES, &RandomParams::default()) {
        let amas = parse_amas(&src).unwrap();
        // Observe the first agent's propositions and one of the last
        // agent's, leaving the agents in between invisible.
        let last = amas.agents.last().unwrap();
        let extra: Vec<String> = if amas.agents.len() >= 3 {
            last.props.iter().take(1).map(|&p| amas.prop_name(p).to_string()).collect()
        } else {
            Vec::new()
        };
        let extra: Vec<&str> = extra.iter().map(String::as_str).collect();
        let first = amas.agents[0].name.clone();
        out.push(Instance::new(format!("random#{s}"), src, &[first.as_str()], &extra, s));
    }
    for (n, k) in [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2)] {
        out.push(Instance::new(
            format!("asvr{n}{k}"),
            gen_asvr(n, k).unwrap(),
            &["Voter1"],
            &[],
            seed ^ (n * 10 + k) as u64,
        ));
    }
    for visible in [false, true] {
        out.push(Instance::new(
            format!("diamond{}", if visible { "-visible" } else { "" }),
            diamond(visible),
            &["D1"],
            &[],
            seed ^ 77,
        ));
    }
    out
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        passed: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        passed: false,
        detail: detail.into(),
    }
}

fn random_strategy(rng: &mut ChaCha8Rng, amas: &Amas, coalition: &BTreeSet<AgentId>) -> StrategyIr {
    let choices = coalition.iter().map(|&a| {
        let module = amas.agent(a);
        let per_local = module
            .repertoire
            .iter()
            .map(|r| rng.gen_range(0..r.len() as u32))
            .collect();
        (a, per_local)
    });
    StrategyIr::new(amas, choices).unwrap()
}

fn naive_strategy(s: &StrategyIr) -> NaiveStrategy {
    let mut out = NaiveStrategy::new();
    for &a in s.coalition() {
        for (l, &c) in s.agent_choices(a).unwrap().iter().enumerate() {
            out.insert((a.index(), amc_core::model::LocalId::from_index(l)), c);
        }
    }
    out
}

fn well_formed(corpus: &[Instance]) -> Outcome {
    for inst in corpus {
        let naive = NaiveModel::build(&inst.amas);
        if let Err(e) = well_formedness(&inst.model, &naive) {
            return fail(format!("{}: {e}", inst.name));
        }
    }
    pass(format!("{} models match the brute-force construction", corpus.len()))
}

fn outcome_laws(corpus: &[Instance], seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = 0;
    let mut states_checked = 0;
    for inst in corpus {
        let reduced = &inst.reduced.model;
        for _ in 0..STRATEGIES_PER_INSTANCE {
            let sigma = random_strategy(&mut rng, &inst.amas, &inst.ctx.coalition);
            let std = outcome_subgraph(&inst.model, &sigma, OutcomeMode::Std);
            let react = outcome_subgraph(&inst.model, &sigma, OutcomeMode::React);
            let edges = |g: &amc_core::semantics::OutcomeGraph| -> BTreeSet<_> {
                g.edges.iter().map(|&(u, e, v)| (g.nodes[u], e, g.nodes[v])).collect()
            };
            if !edges(&react).is_subset(&edges(&std)) {
                return fail(format!("{}: reactive outcome escapes the standard one", inst.name));
            }
            pairs += 1;

            let naive = naive_strategy(&sigma);
            for s in reduced.state_ids() {
                let f = inst.model.lookup(reduced.state(s)).unwrap();
                let present: BTreeSet<_> = reduced
                    .transitions(s)
                    .into_iter()
                    .map(|t| (t.event, reduced.state(t.target).0.clone()))
                    .collect();
                for mode in MODES {
                    let sub = kept_pairs(reduced, s, &naive, mode);
                    let full: BTreeSet<_> = kept_pairs(&inst.model, f, &naive, mode)
                        .intersection(&present)
                        .cloned()
                        .collect();
                    if sub != full {
                        return fail(format!(
                            "{}: submodel outcome differs at {:?} ({mode})",
                            inst.name,
                            reduced.state(s)
                        ));
                    }
                }
                states_checked += 1;
            }
        }
    }
    if pairs < 1000 {
        return fail(format!("only {pairs} (model, strategy) pairs"));
    }
    pass(format!(
        "{pairs} (model, strategy) pairs; submodel outcome equation on {states_checked} reduced states"
    ))
}

fn kbsc_intersection(corpus: &[Instance]) -> Outcome {
    let mut states = 0;
    for inst in corpus {
        let expanded = assemble_expanded(&inst.model).unwrap();
        let mk = build_model(expanded.amas.clone(), &Limits::default()).unwrap();
        if let Err(ce) = check_intersection(&inst.model, &expanded, &mk) {
            return fail(format!("{}: {}", inst.name, ce.message));
        }
        states += mk.state_count();
    }
    pass(format!("{} expanded models, {states} expanded states, no counterexample", corpus.len()))
}

fn kbsc_simulation(corpus: &[Instance]) -> Outcome {
    let mut pairs = 0;
    for inst in corpus {
        let depth = if inst.name == "asvr22" {
            6
        } else if inst.name.starts_with("random") {
            5
        } else {
            continue;
        };
        let expanded = assemble_expanded(&inst.model).unwrap();
        let mk = build_model(expanded.amas.clone(), &Limits::default()).unwrap();
        match simulate_bounded(&inst.model, &expanded, &mk, depth) {
            Ok(n) => pairs += n,
            Err(ce) => return fail(format!("{}: {}", inst.name, ce.message)),
        }
    }
    pass(format!("all traces to depth 6 (asvr22) / 5 (random); {pairs} simulation pairs"))
}

const SOUNDNESS_MAX_STRATEGIES: u128 = 20_000;
const SOUNDNESS_MAX_MODEL_STATES: usize = 10_000;

fn soundness(corpus: &[Instance]) -> Outcome {
    let limits = Limits {
        max_strategies: SOUNDNESS_MAX_STRATEGIES,
        ..Limits::default()
    };
    let (mut satisfied, mut unknown, mut too_large, mut skipped) = (0, 0, 0, 0);
    for inst in corpus {
        // Guard against corpora (other seeds) with very large expansions.
        if inst.model.state_count() > SOUNDNESS_MAX_MODEL_STATES {
            skipped += 1;
            continue;
        }
        let naive = (inst.model.state_count() <= 5_000).then(|| NaiveModel::build(&inst.amas));
        for f in &inst.formulas {
            let Formula::Strategic(m) = f else { continue };
            match check_iR_sound(&inst.model, f, OutcomeMode::Std, &limits) {
                Ok(report) => match report.verdict {
                    SoundVerdict::SatisfiedSound { transducers } => {
                        satisfied += 1;
                        let replay = replay_transducers(&inst.model, &transducers, &m.goal);
                        if !matches!(replay, Ok(true)) {
                            return fail(format!("{}: {} fails on replay: {replay:?}", inst.name, f.to_text(&inst.amas)));
                        }
                        if let Some(naive) = &naive {
                            let independent = naive_replay(naive, &transducers, &m.goal);
                            if independent != Ok(true) {
                                return fail(format!(
                                    "{}: {} fails on independent replay: {independent:?}",
                                    inst.name,
                                    f.to_text(&inst.amas)
                                ));
                            }
                        }
                    }
                    SoundVerdict::Unknown => unknown += 1,
                },
                Err(KbscError::Semantics(SemanticsError::EnumerationTooLarge { .. })) => too_large += 1,
                Err(e) => return fail(format!("{}: {e}", inst.name)),
            }
        }
    }
    if satisfied == 0 {
        return fail("no satisfied formula to replay");
    }
    pass(format!(
        "{satisfied} satisfied formulas replayed without violation ({unknown} unknown, {too_large} over the strategy limit, {skipped} instances above {SOUNDNESS_MAX_MODEL_STATES} states skipped)"
    ))
}

fn por_structure(corpus: &[Instance]) -> Outcome {
    let mut ample_sets = 0;
    for inst in corpus {
        let r = &inst.reduced;
        for s in r.model.state_ids() {
            if let AmpleDecision::Ample { events } = &r.decisions[s.index()] {
                let g = inst.model.lookup(r.model.state(s)).unwrap();
                if let Err(ce) = validate_c1(&inst.model, &inst.ctx, g, events) {
                    return fail(format!("{}: C1 fails at {:?}: {:?}", inst.name, r.model.state(s), ce.path));
                }
                ample_sets += 1;
            }
        }
        let checks = [
            check_submodel(&inst.model, &r.model),
            check_c2(&inst.model, r, &inst.ctx),
            check_c3(r),
            ample_conditions(&inst.model, &r.model, &inst.ctx.coalition, &inst.ctx.props).map(|_| ()),
        ];
        for c in checks {
            if let Err(e) = c {
                return fail(format!("{}: {e}", inst.name));
            }
        }
    }
    pass(format!("{ample_sets} ample sets pass C1; C2, C3 and submodel checks pass on {} reductions", corpus.len()))
}

fn por_preservation(corpus: &[Instance]) -> Outcome {
    let mut compared = 0;
    for inst in corpus {
        for mode in MODES {
            match compare_verdicts(&inst.model, &inst.reduced.model, &inst.ctx, &inst.formulas, mode, &Limits::default()) {
                Ok(d) if d.is_empty() => compared += inst.formulas.len(),
                Ok(d) => return fail(format!("{}: {} disagreements, first {:?}", inst.name, d.len(), d[0])),
                Err(e) => return fail(format!("{}: {e}", inst.name)),
            }
        }
    }
    pass(format!("{compared} formula/mode pairs agree on full and reduced models"))
}

fn por_effectiveness() -> Outcome {
    let amas = Arc::new(parse_amas(&diamond(false)).unwrap());
    let full = build_model(amas.clone(), &Limits::default()).unwrap();
    let r = reduce(amas, &ReductionContext::new([], []), &Limits::default()).unwrap();
    if (full.state_count(), r.model.state_count()) != (4, 3) {
        return fail(format!("diamond: {} -> {}", full.state_count(), r.model.state_count()));
    }
    let amas = Arc::new(parse_amas(&gen_asvr(2, 2).unwrap()).unwrap());
    let full = build_model(amas.clone(), &Limits::default()).unwrap();
    let voter = amas.agent_by_name("Voter1").unwrap();
    let ctx = ReductionContext::new([voter], amas.agent(voter).props.iter().copied());
    let r = reduce(amas, &ctx, &Limits::default()).unwrap();
    let valid = check_c2(&full, &r, &ctx).and(check_c3(&r)).and(check_submodel(&full, &r.model));
    let c1 = r.model.state_ids().all(|s| match &r.decisions[s.index()] {
        AmpleDecision::Ample { events } => {
            validate_c1(&full, &ctx, full.lookup(r.model.state(s)).unwrap(), events).is_ok()
        }
        _ => true,
    });
    let (s, s2) = (full.state_count(), r.model.state_count());
    if s2 > s || valid.is_err() || !c1 {
        return fail(format!("asvr22: {s} -> {s2}, conditions {valid:?}, C1 {c1}"));
    }
    pass(format!(
        "diamond 4 -> 3; asvr22 with coalition {{Voter1}}: {s} -> {s2} states (ratio {:.3})",
        s2 as f64 / s as f64
    ))
}

fn stuttering(corpus: &[Instance]) -> Outcome {
    let (mut holds, mut inconclusive) = (0, 0);
    for inst in corpus {
        match stutter_equiv_bounded(&inst.model, &inst.reduced.model, &inst.ctx, 8) {
            StutterVerdict::Holds { .. } => holds += 1,
            StutterVerdict::Inconclusive { .. } => inconclusive += 1,
            StutterVerdict::Refuted { stem, cycle } => {
                return fail(format!("{}: refuted by stem {stem:?} cycle {cycle:?}", inst.name));
            }
        }
    }
    // Planted: the visible diamond with one interleaving removed.
    let amas = Arc::new(parse_amas(&diamond(true)).unwrap());
    let full = build_model(amas.clone(), &Limits::default()).unwrap();
    let a2 = amas.events.lookup("a2").unwrap();
    let moves: Vec<Vec<Move>> = full
        .state_ids()
        .map(|s| {
            let mut list = full.moves(s).to_vec();
            if s == full.initial() {
                list.retain(|m| m.event != a2);
            }
            list
        })
        .collect();
    let deadlocks = full.state_ids().map(|s| full.deadlocks(s).to_vec()).collect();
    let planted = Model::from_parts(amas.clone(), full.states().to_vec(), full.initial(), moves, deadlocks);
    let ctx = ReductionContext::new([], (0..amas.props.len()).map(PropId::from_index));
    if !matches!(stutter_equiv_bounded(&full, &planted, &ctx, 8), StutterVerdict::Refuted { .. }) {
        return fail("planted counterexample not refuted");
    }
    pass(format!(
        "{holds} equivalent, {inconclusive} inconclusive at bound 8, none refuted; planted counterexample refuted"
    ))
}

fn cross_validation(corpus: &[Instance]) -> Outcome {
    let (mut models, mut checks) = (0, 0);
    for inst in corpus.iter().filter(|i| i.model.state_count() <= 200) {
        let naive = NaiveModel::build(&inst.amas);
        for f in &inst.formulas {
            for mode in MODES {
                let ours = check_ir(&inst.model, f, mode, &Limits::default()).unwrap().holds;
                let theirs = naive_check(&inst.amas, &naive, f, mode);
                if ours != theirs {
                    return fail(format!("{}: {} ({mode}): checker {ours}, oracle {theirs}", inst.name, f.to_text(&inst.amas)));
                }
                checks += 1;
            }
        }
        models += 1;
    }
    pass(format!("{checks} verdicts agree with the enumeration oracle on {models} models"))
}

fn artifacts(inst: &Instance) -> Vec<String> {
    let amas = Arc::new(parse_amas(&inst.source).unwrap());
    let model = build_model(amas.clone(), &Limits::default()).unwrap();
    let r = reduce(amas.clone(), &inst.ctx, &Limits::default()).unwrap();
    let mut out = vec![
        render(&amas),
        serialize_model(&model, ModelKind::Full, None),
        serialize_model(&r.model, ModelKind::Reduced, Some("ctx")),
        export_dot(&model, &DotOptions::default()),
    ];
    for f in &inst.formulas {
        let v = check_ir(&model, f, OutcomeMode::Std, &Limits::default()).unwrap();
        out.push(format!("{v:?}"));
    }
    out
}

fn cli_run(dir: &Path, seed: u64) -> Vec<Vec<u8>> {
    let amc = env!("CARGO_BIN_EXE_amc");
    let run = |args: &[&str]| {
        let status = Command::new(amc)
            .current_dir(dir)
            .args(args)
            .env("AMC_SEED", seed.to_string())
            .output()
            .unwrap();
        status.stdout
    };
    let mut out = vec![run(&["gen", "random", "--count", "3", "--out-dir", "corpus"])];
    out.push(run(&["gen", "asvr", "--voters", "2", "--candidates", "2", "--out", "asvr22.amas"]));
    out.push(run(&["build", "asvr22.amas", "--out", "full.model", "--report", "build.json"]));
    out.push(run(&[
        "reduce", "asvr22.amas", "--coalition", "Voter1", "--props", "voted_1_a,voted_1_b", "--validate-c1", "--out",
        "red.model", "--report", "reduce.json", "--dot", "red.dot",
    ]));
    out.push(run(&[
        "check", "asvr22.amas", "--formula", "<<Voter1>> G !voted_1_b", "--witness", "w.txt", "--report", "check.json",
    ]));
    out.push(run(&["export-dot", "full.model", "--out", "full.dot"]));
    for f in [
        format!("corpus/random_{seed}.amas"),
        "full.model".into(),
        "build.json".into(),
        "red.model".into(),
        "reduce.json".into(),
        "red.dot".into(),
        "w.txt".into(),
        "check.json".into(),
        "full.dot".into(),
    ] {
        out.push(std::fs::read(dir.join(&f)).unwrap_or_else(|e| panic!("{f}: {e}")));
    }
    out
}

fn determinism(corpus: &[Instance], seed: u64) -> Outcome {
    for inst in corpus.iter().filter(|i| i.model.state_count() <= 1000) {
        if artifacts(inst) != artifacts(inst) {
            return fail(format!("{}: artifacts differ between runs", inst.name));
        }
    }
    let again = random_corpus(seed, RANDOM_INSTANCES, &RandomParams::default());
    if again.iter().zip(corpus).any(|((_, src), inst)| *src != inst.source) {
        return fail("random corpus differs between generations");
    }
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    if cli_run(a.path(), seed) != cli_run(b.path(), seed) {
        return fail("CLI outputs differ between runs");
    }
    pass("model files, reports, witnesses and DOT exports are byte-identical across runs")
}

fn main() -> ExitCode {
    let seed = corpus_seed();
    let start = Instant::now();
    let corpus = build_corpus(seed);
    println!(
        "corpus: {} instances (seed {seed}), built in {:.1}s",
        corpus.len(),
        start.elapsed().as_secs_f64()
    );

    type Check<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Check> = vec![
        ("model well-formedness", Box::new(|| well_formed(&corpus))),
        ("outcome laws", Box::new(|| outcome_laws(&corpus, seed))),
        ("expansion intersection", Box::new(|| kbsc_intersection(&corpus))),
        ("expansion simulation", Box::new(|| kbsc_simulation(&corpus))),
        ("perfect-recall soundness", Box::new(|| soundness(&corpus))),
        ("reduction conditions", Box::new(|| por_structure(&corpus))),
        ("reduction preserves verdicts", Box::new(|| por_preservation(&corpus))),
        ("reduction effectiveness", Box::new(por_effectiveness)),
        ("stuttering oracle", Box::new(|| stuttering(&corpus))),
        ("checker cross-validation", Box::new(|| cross_validation(&corpus))),
        ("determinism", Box::new(|| determinism(&corpus, seed))),
    ];

    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        failures += usize::from(!outcome.passed);
        println!(
            "{:>2}. {status} {name} ({:.1}s): {}",
            i + 1,
            t.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failures,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
