use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use amc_core::bench::{gen_asvr, random_corpus, RandomParams};
use amc_core::dsl::{parse_amas, parse_formula, parse_spec_file, render, Formula};
use amc_core::kbsc::{assemble_expanded, check_iR_sound, check_intersection, simulate_bounded, KbscError, SoundVerdict};
use amc_core::model::{Amas, StateId};
use amc_core::por::{
    check_c2, check_c3, check_submodel, compare_verdicts, reduce, stutter_equiv_bounded, validate_c1, AmpleDecision,
    FullReason, PorError, ReductionContext, StutterVerdict,
};
use amc_core::semantics::{
    build_model, check_ir, digest, export_dot, parse_model_file, serialize_model, DotOptions, Limits, Model,
    ModelKind, OutcomeMode, SemanticsError,
};
use anyhow::{Context, Result};
use thiserror::Error;

use crate::report::{AmpleEntry, OracleEntry, RunReport, Sizes, VerdictEntry};
use crate::{CheckArgs, Cli, Command, FormulaArgs, GenCommand, OracleCommand, ReduceArgs, Semantics, StrategyKind};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
}

pub enum Outcome {
    Success,
    /// A verdict, oracle or validation came out negative.
    Negative,
}

fn is_limit(e: &SemanticsError) -> bool {
    matches!(
        e,
        SemanticsError::ModelTooLarge { .. } | SemanticsError::EnumerationTooLarge { .. }
    )
}

/// 3 for exhausted resource limits, 2 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        let limit = if let Some(e) = cause.downcast_ref::<SemanticsError>() {
            is_limit(e)
        } else if let Some(KbscError::Semantics(e)) = cause.downcast_ref::<KbscError>() {
            is_limit(e)
        } else if let Some(PorError::Semantics(e)) = cause.downcast_ref::<PorError>() {
            is_limit(e)
        } else {
            false
        };
        if limit {
            return 3;
        }
    }
    2
}

fn usage(message: impl Into<String>) -> anyhow::Error {
    CliError::Usage(message.into()).into()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// An input file: either AMAS source or a serialized model.
struct Input {
    amas: Arc<Amas>,
    model: Option<Model>,
    context: Option<String>,
}

impl Input {
    fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        if text.starts_with("amc-model") {
            let file = parse_model_file(&text).with_context(|| format!("in {}", path.display()))?;
            Ok(Self {
                amas: file.model.amas_arc().clone(),
                model: Some(file.model),
                context: file.context,
            })
        } else {
            let amas = parse_amas(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            Ok(Self {
                amas: Arc::new(amas),
                model: None,
                context: None,
            })
        }
    }

    fn model(self, limits: &Limits, report: &mut RunReport) -> Result<Model> {
        match self.model {
            Some(m) => Ok(m),
            None => Ok(report.phase("build", || build_model(self.amas, limits))?),
        }
    }
}

fn formulas(args: &FormulaArgs, amas: &Amas) -> Result<Vec<Formula>> {
    let mut out = Vec::new();
    for text in &args.formula {
        out.push(parse_formula(text, amas).map_err(|e| usage(format!("formula {text:?}: {e}")))?);
    }
    if let Some(path) = &args.spec {
        let parsed = parse_spec_file(&read(path)?, amas).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        out.extend(parsed.into_iter().map(|(_, f)| f));
    }
    if out.is_empty() {
        return Err(usage("no formula given (use --formula or --spec)"));
    }
    Ok(out)
}

fn names(list: &str) -> impl Iterator<Item = &str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn context(amas: &Amas, coalition: &str, props: &str) -> Result<ReductionContext> {
    let agents = names(coalition)
        .map(|n| amas.agent_by_name(n).ok_or_else(|| usage(format!("unknown agent {n}"))))
        .collect::<Result<Vec<_>>>()?;
    let props = names(props)
        .map(|p| amas.props.lookup(p).ok_or_else(|| usage(format!("unknown proposition {p}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReductionContext::new(agents, props))
}

fn context_line(amas: &Amas, ctx: &ReductionContext) -> String {
    let agents: Vec<&str> = ctx.coalition.iter().map(|&a| amas.agent(a).name.as_str()).collect();
    let props: Vec<&str> = ctx.props.iter().map(|&p| amas.prop_name(p)).collect();
    format!("coalition={} props={}", agents.join(","), props.join(","))
}

fn state_text(model: &Model, s: StateId) -> String {
    let amas = model.amas();
    let locals: Vec<&str> = model
        .state(s)
        .0
        .iter()
        .enumerate()
        .map(|(i, &l)| amas.agents[i].local_name(l))
        .collect();
    format!("({})", locals.join(","))
}

fn mode_of(s: Semantics) -> OutcomeMode {
    match s {
        Semantics::Std => OutcomeMode::Std,
        Semantics::React => OutcomeMode::React,
    }
}

pub fn run(cli: &Cli, echo: Vec<String>) -> Result<Outcome> {
    let limits = Limits {
        max_states: cli.max_states,
        max_strategies: cli.max_strategies,
    };
    let mut report = RunReport::new(echo, cli.timings);
    let outcome = match &cli.command {
        Command::Build { file, out } => {
            let model = Input::load(file)?.model(&limits, &mut report)?;
            let text = report.phase("serialize", || serialize_model(&model, ModelKind::Full, None));
            report.model = Some(Sizes::of(&model));
            report.digest = Some(digest(&text));
            write_out(out.as_ref(), &text)?;
            eprintln!(
                "states {} transitions {} eps-loops {}",
                model.state_count(),
                model.transition_count(),
                model.eps_loop_count()
            );
            Outcome::Success
        }
        Command::Check(args) => check(args, &limits, &mut report)?,
        Command::Expand { file, out } => {
            let model = Input::load(file)?.model(&limits, &mut report)?;
            let expanded = report.phase("expand", || assemble_expanded(&model))?;
            let mk = report.phase("build-expanded", || build_model(expanded.amas.clone(), &limits))?;
            for (exp, agent) in expanded.expansions.iter().zip(&model.amas().agents) {
                eprintln!("{}: {} knowledge states", agent.name, exp.len());
            }
            eprintln!("expanded model: {} states", mk.state_count());
            report.model = Some(Sizes::of(&model));
            report.expanded = Some(Sizes::of(&mk));
            write_out(out.as_ref(), &render(&expanded.amas))?;
            Outcome::Success
        }
        Command::Reduce(args) => reduce_cmd(args, &limits, &mut report)?,
        Command::Gen(GenCommand::Asvr { voters, candidates, out }) => {
            let src = gen_asvr(*voters, *candidates).map_err(|e| usage(e.to_string()))?;
            write_out(out.as_ref(), &src)?;
            Outcome::Success
        }
        Command::Gen(GenCommand::Random { seed, count, out_dir }) => {
            report.seed = Some(*seed);
            let corpus = random_corpus(*seed, *count, &RandomParams::default());
            match out_dir {
                Some(dir) => {
                    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
                    for (s, src) in &corpus {
                        let path = dir.join(format!("random_{s}.amas"));
                        write_out(Some(&path), src)?;
                    }
                }
                None if *count == 1 => write_out(None, &corpus[0].1)?,
                None => return Err(usage("--out-dir is required with --count > 1")),
            }
            Outcome::Success
        }
        Command::ExportDot { file, out } => {
            let model = Input::load(file)?.model(&limits, &mut report)?;
            report.model = Some(Sizes::of(&model));
            write_out(out.as_ref(), &export_dot(&model, &DotOptions::default()))?;
            Outcome::Success
        }
        Command::Oracle(cmd) => oracle(cmd, &limits, &mut report)?,
    };
    if let Some(path) = &cli.report {
        write_out(Some(path), &report.to_json())?;
    }
    Ok(outcome)
}

fn check(args: &CheckArgs, limits: &Limits, report: &mut RunReport) -> Result<Outcome> {
    let mode = mode_of(args.semantics);
    if args.strategy == StrategyKind::IrSound && mode == OutcomeMode::React {
        return Err(usage(KbscError::ReactUnsupported.to_string()));
    }
    let input = Input::load(&args.file)?;
    let formulas = formulas(&args.formulas, &input.amas)?;
    let model = input.model(limits, report)?;
    report.model = Some(Sizes::of(&model));
    let amas = model.amas();
    let mut witness_text = String::new();
    let mut negative = false;
    for f in &formulas {
        let text = f.to_text(amas);
        let (verdict, holds, checked, witness) = match args.strategy {
            StrategyKind::Ir => {
                let v = report.phase("check", || check_ir(&model, f, mode, limits))?;
                let witness: Vec<String> = v
                    .modalities
                    .iter()
                    .filter_map(|m| m.witness.as_ref())
                    .flat_map(|w| w.describe(amas))
                    .collect();
                let checked = v.modalities.iter().map(|m| m.strategies_checked).sum();
                let verdict = if v.holds { "True" } else { "False" };
                (verdict, v.holds, checked, witness)
            }
            StrategyKind::IrSound => {
                let r = report.phase("check", || check_iR_sound(&model, f, mode, limits))?;
                match &r.verdict {
                    SoundVerdict::SatisfiedSound { transducers } => {
                        let witness = transducers
                            .iter()
                            .flat_map(|t| {
                                let table = t.to_table(amas, &r.expanded.names[t.agent.index()]);
                                table.lines().map(str::to_string).collect::<Vec<_>>()
                            })
                            .collect();
                        ("SatisfiedSound", true, r.strategies_checked, witness)
                    }
                    SoundVerdict::Unknown => ("Unknown", false, r.strategies_checked, Vec::new()),
                }
            }
        };
        println!("{verdict}\t{text}");
        if let Some(expect) = args.expect {
            negative |= holds != expect;
        }
        if !witness.is_empty() {
            let _ = writeln!(witness_text, "# {text}");
            for line in &witness {
                let _ = writeln!(witness_text, "{line}");
            }
        }
        report.verdicts.push(VerdictEntry {
            formula: text,
            strategy: match args.strategy {
                StrategyKind::Ir => "ir".into(),
                StrategyKind::IrSound => "iR-sound".into(),
            },
            semantics: mode.to_string(),
            verdict: verdict.into(),
            strategies_checked: checked,
            witness,
        });
    }
    if let Some(path) = &args.witness {
        write_out(Some(path), &witness_text)?;
    }
    Ok(if negative { Outcome::Negative } else { Outcome::Success })
}

fn reduce_cmd(args: &ReduceArgs, limits: &Limits, report: &mut RunReport) -> Result<Outcome> {
    let input = Input::load(&args.file)?;
    let ctx = context(&input.amas, &args.coalition, &args.props)?;
    let amas = input.amas.clone();
    let full = input.model(limits, report)?;
    let reduced = report.phase("reduce", || reduce(amas.clone(), &ctx, limits))?;
    let m = &reduced.model;

    let ratio = m.state_count() as f64 / full.state_count() as f64;
    report.model = Some(Sizes::of(&full));
    report.reduced = Some(Sizes::of(m));
    report.reduction_ratio = Some(ratio);
    let mut ample_states = BTreeSet::new();
    for s in m.state_ids() {
        let decision = match &reduced.decisions[s.index()] {
            AmpleDecision::Ample { events } => {
                ample_states.insert(s);
                let names: Vec<&str> = events.iter().map(|&e| amas.event_name(e)).collect();
                format!("ample {{{}}}", names.join(","))
            }
            AmpleDecision::Full { reason: FullReason::NoCandidate } => "full (no candidate)".into(),
            AmpleDecision::Full { reason: FullReason::Cycle } => "full (cycle)".into(),
        };
        report.ample.push(AmpleEntry {
            state: state_text(m, s),
            decision,
        });
    }
    eprintln!(
        "|S| = {}, |S'| = {}, |T| = {}, |T'| = {}, ratio {:.3}, ample states {}",
        full.state_count(),
        m.state_count(),
        full.transition_count(),
        m.transition_count(),
        ratio,
        ample_states.len()
    );

    let mut negative = false;
    if args.validate_c1 {
        let c1 = report.phase("validate", || {
            for &s in &ample_states {
                let AmpleDecision::Ample { events } = &reduced.decisions[s.index()] else {
                    continue;
                };
                let g = full.lookup(m.state(s)).expect("reduced states occur in the full model");
                if let Err(ce) = validate_c1(&full, &ctx, g, events) {
                    let path: Vec<&str> = ce.path.iter().map(|&e| amas.event_name(e)).collect();
                    return Err(format!("at {}: {}", state_text(m, s), path.join(" ")));
                }
            }
            Ok(())
        });
        let results = [
            ("c1", c1),
            ("c2", check_c2(&full, &reduced, &ctx)),
            ("c3", check_c3(&reduced)),
            ("submodel", check_submodel(&full, m)),
        ];
        for (name, result) in results {
            let (verdict, detail) = match result {
                Ok(()) => ("True", None),
                Err(e) => ("False", Some(e)),
            };
            eprintln!("{name}: {verdict}{}", detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default());
            negative |= verdict == "False";
            report.oracles.push(OracleEntry {
                name: name.into(),
                verdict: verdict.into(),
                detail,
            });
        }
    }

    let text = serialize_model(m, ModelKind::Reduced, Some(&context_line(&amas, &ctx)));
    report.digest = Some(digest(&text));
    write_out(args.out.as_ref(), &text)?;
    if let Some(path) = &args.dot {
        let options = DotOptions {
            name: Some("reduced".into()),
            highlight: ample_states,
        };
        write_out(Some(path), &export_dot(m, &options))?;
    }
    Ok(if negative { Outcome::Negative } else { Outcome::Success })
}

fn oracle(cmd: &OracleCommand, limits: &Limits, report: &mut RunReport) -> Result<Outcome> {
    let (name, verdict, detail) = match cmd {
        OracleCommand::StutterEquiv { full, reduced, bound, props } => {
            let full = Input::load(full)?.model(limits, report)?;
            let reduced = Input::load(reduced)?;
            let props = match props {
                Some(p) => p.clone(),
                None => reduced
                    .context
                    .as_deref()
                    .and_then(|c| c.split_whitespace().find_map(|w| w.strip_prefix("props=")))
                    .unwrap_or("")
                    .to_string(),
            };
            let ctx = context(&full.amas_arc().clone(), "", &props)?;
            let reduced = reduced.model(limits, report)?;
            report.model = Some(Sizes::of(&full));
            report.reduced = Some(Sizes::of(&reduced));
            match report.phase("stutter", || stutter_equiv_bounded(&full, &reduced, &ctx, *bound)) {
                StutterVerdict::Holds { lassos } => ("stutter-equiv", "True", Some(format!("{lassos} lassos"))),
                StutterVerdict::Inconclusive { lassos } => (
                    "stutter-equiv",
                    "Inconclusive",
                    Some(format!("{lassos} lassos; longer lassos exist")),
                ),
                StutterVerdict::Refuted { stem, cycle } => {
                    let show = |v: &[StateId]| v.iter().map(|&s| state_text(&full, s)).collect::<Vec<_>>().join(" ");
                    ("stutter-equiv", "False", Some(format!("stem {} cycle {}", show(&stem), show(&cycle))))
                }
            }
        }
        OracleCommand::Simulate { file, depth } => {
            let model = Input::load(file)?.model(limits, report)?;
            let expanded = report.phase("expand", || assemble_expanded(&model))?;
            let mk = build_model(expanded.amas.clone(), limits)?;
            report.model = Some(Sizes::of(&model));
            match report.phase("simulate", || simulate_bounded(&model, &expanded, &mk, *depth)) {
                Ok(pairs) => ("simulate", "True", Some(format!("{pairs} simulation pairs"))),
                Err(ce) => ("simulate", "False", Some(format!("at {}: {}", state_text(&model, ce.state), ce.message))),
            }
        }
        OracleCommand::Intersection { file } => {
            let model = Input::load(file)?.model(limits, report)?;
            let expanded = report.phase("expand", || assemble_expanded(&model))?;
            let mk = build_model(expanded.amas.clone(), limits)?;
            report.model = Some(Sizes::of(&model));
            match check_intersection(&model, &expanded, &mk) {
                Ok(()) => ("intersection", "True", Some(format!("{} expanded states", mk.state_count()))),
                Err(ce) => ("intersection", "False", Some(ce.message)),
            }
        }
        OracleCommand::CompareVerdicts {
            file,
            coalition,
            props,
            formulas: fargs,
            semantics,
        } => {
            let input = Input::load(file)?;
            let ctx = context(&input.amas, coalition, props)?;
            let fs = formulas(fargs, &input.amas)?;
            let amas = input.amas.clone();
            let full = input.model(limits, report)?;
            let reduced = report.phase("reduce", || reduce(amas, &ctx, limits))?;
            report.model = Some(Sizes::of(&full));
            report.reduced = Some(Sizes::of(&reduced.model));
            let modes = match semantics {
                Some(s) => vec![mode_of(*s)],
                None => vec![OutcomeMode::Std, OutcomeMode::React],
            };
            let mut lines = Vec::new();
            for mode in modes {
                let found = report.phase("compare", || {
                    compare_verdicts(&full, &reduced.model, &ctx, &fs, mode, limits)
                })?;
                lines.extend(
                    found
                        .into_iter()
                        .map(|d| format!("{mode}: {} full={} reduced={}", d.formula, d.full, d.reduced)),
                );
            }
            if lines.is_empty() {
                ("compare-verdicts", "True", Some(format!("{} formulas agree", fs.len())))
            } else {
                ("compare-verdicts", "False", Some(lines.join("; ")))
            }
        }
    };
    match &detail {
        Some(d) => println!("{verdict}\t{d}"),
        None => println!("{verdict}"),
    }
    report.oracles.push(OracleEntry {
        name: name.into(),
        verdict: verdict.into(),
        detail,
    });
    Ok(if verdict == "False" { Outcome::Negative } else { Outcome::Success })
}
