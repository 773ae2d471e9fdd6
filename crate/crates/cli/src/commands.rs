use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use gemlogic::abduction::{
    abduce_with, filter_hypotheses_with, AbducibleKind, Case, FbaCheck, Hypothesis, ObservationSet, Stage2Status,
};
use gemlogic::ids::{GeneId, SpeciesId};
use gemlogic::ledger::{changelog, Reason, RecordMeta};
use gemlogic::logic::theory_stats;
use gemlogic::reasoner::{compare_to_observations, essentiality_screen_with, predict_growth, Evidence, GeneStatus};
use gemlogic::{
    compile, diff, enumerate_abducibles, fba, logic_constrained_fba, render_native, validate, AbductionPolicy,
    Execution, Ledger, MetabolicModel, RevisionRecord, Severity,
};
use serde::Serialize;

use crate::args::{
    AbduceArgs, CompileArgs, DiffArgs, EssentialityArgs, ExperimentArgs, FbaArgs, MetaArgs, ModelArgs, RecordArgs,
    ReviseCommand, SelectArgs,
};
use crate::failure::{ExitCode, Failure, Outcome};
use crate::io::{id_set, json_lines, json_pretty, load_medium, load_model, parse_model, read_text, Sink};

pub fn compile_cmd(args: &CompileArgs) -> Outcome<()> {
    let model = load_model(&args.model)?;
    let theory = compile(&model)?;
    let sink = Sink::new(args.out.out.as_deref())?;
    sink.primary("theory.txt", theory.dump().as_bytes())?;
    let stats = theory_stats(&theory);
    sink.extra("stats.json", &json_pretty(&stats))?;
    eprintln!("{stats}");
    Ok(())
}

pub fn validate_cmd(args: &ModelArgs) -> Outcome<()> {
    let model = parse_model(&args.model, args.format, args.goal.as_deref())?;
    let diagnostics = validate(&model);
    for d in &diagnostics {
        println!("{d}");
    }
    let count = |s| diagnostics.iter().filter(|d| d.severity == s).count();
    let errors = count(Severity::Error);
    eprintln!(
        "{}: {} reactions, {} species, {} genes; {errors} errors, {} warnings",
        model.model_id,
        model.reactions.len(),
        model.species.len(),
        model.genes.len(),
        count(Severity::Warning)
    );
    if errors > 0 {
        return Err(Failure::new(
            ExitCode::Validation,
            anyhow::anyhow!("{} is not a valid model", args.model.display()),
        ));
    }
    Ok(())
}

struct Experiment {
    model: MetabolicModel,
    medium: BTreeSet<SpeciesId>,
    knockouts: BTreeSet<GeneId>,
}

fn load_experiment(args: &ExperimentArgs) -> Outcome<Experiment> {
    let model = load_model(&args.model)?;
    let medium = load_medium(args.medium.as_deref(), &model)?;
    Ok(Experiment { medium, knockouts: id_set(&args.ko), model })
}

#[derive(Serialize)]
struct GrowthReport<'a> {
    model_id: &'a str,
    medium: &'a BTreeSet<SpeciesId>,
    knockouts: &'a BTreeSet<GeneId>,
    #[serde(flatten)]
    verdict: gemlogic::reasoner::GrowthVerdict,
}

pub fn growth_cmd(args: &ExperimentArgs) -> Outcome<()> {
    let x = load_experiment(args)?;
    let theory = compile(&x.model)?;
    let verdict = predict_growth(&theory, &x.model, &x.medium, &x.knockouts)?;
    let summary = match &verdict.evidence {
        Evidence::Derivation(d) => format!("{} ({} derivation steps)", verdict.verdict, d.steps.len()),
        Evidence::Missing(m) => {
            let missing: Vec<String> = m.iter().map(ToString::to_string).collect();
            format!("{} (missing {})", verdict.verdict, missing.join(", "))
        }
    };
    let report = GrowthReport { model_id: &x.model.model_id, medium: &x.medium, knockouts: &x.knockouts, verdict };
    Sink::new(args.out.out.as_deref())?.primary("growth.json", &json_pretty(&report))?;
    eprintln!("{summary}");
    Ok(())
}

fn parse_observed_essentiality(text: &str) -> Outcome<BTreeMap<GeneId, GeneStatus>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let parsed = match fields.as_slice() {
            [gene, status] => status.parse::<GeneStatus>().map(|s| (GeneId::from(gene.to_string()), s)),
            _ => Err(format!("expected 2 tab-separated fields, found {}", fields.len())),
        };
        let (gene, status) = parsed
            .map_err(|m| Failure::new(ExitCode::Parse, anyhow::anyhow!("observed essentiality line {}: {m}", i + 1)))?;
        if out.insert(gene.clone(), status).is_some_and(|prev| prev != status) {
            return Err(Failure::new(ExitCode::Parse, anyhow::anyhow!("conflicting observations for gene `{gene}`")));
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct ConfusionReport {
    #[serde(flatten)]
    counts: gemlogic::reasoner::ConfusionMatrix,
    compared: usize,
    accuracy: Option<f64>,
    sensitivity: Option<f64>,
    specificity: Option<f64>,
}

pub fn essentiality_cmd(args: &EssentialityArgs, exec: Execution) -> Outcome<()> {
    let model = load_model(&args.model)?;
    let medium = load_medium(args.medium.as_deref(), &model)?;
    let theory = compile(&model)?;
    let genes: Option<Vec<GeneId>> = args.genes.as_ref().map(|g| id_set::<GeneId>(g).into_iter().collect());
    let report = essentiality_screen_with(&theory, &model, &medium, genes.as_deref(), exec)?;
    let mut tsv = Vec::new();
    report.write_tsv(&mut tsv, args.timings)?;
    let sink = Sink::new(args.out.out.as_deref())?;
    sink.primary("essentiality.tsv", &tsv)?;
    let mut summary = format!(
        "genes={} essential={} non_essential={}",
        report.entries.len(),
        report.count(GeneStatus::Essential),
        report.count(GeneStatus::NonEssential)
    );
    if let Some(path) = &args.observed {
        let observed = parse_observed_essentiality(&read_text(path)?)?;
        let m = compare_to_observations(&report, &observed);
        let confusion = ConfusionReport {
            counts: m,
            compared: m.compared(),
            accuracy: m.accuracy(),
            sensitivity: m.sensitivity(),
            specificity: m.specificity(),
        };
        sink.extra("confusion.json", &json_pretty(&confusion))?;
        let _ = write!(
            summary,
            " TP={} TN={} FP={} FN={} uncompared={}",
            m.true_positive, m.true_negative, m.false_positive, m.false_negative, m.uncompared
        );
        if let Some(a) = m.accuracy() {
            let _ = write!(summary, " accuracy={a:.4}");
        }
    }
    eprintln!("{summary}");
    Ok(())
}

fn policy(args: &AbduceArgs) -> Outcome<AbductionPolicy> {
    let kinds: BTreeSet<AbducibleKind> = match &args.kinds {
        None => AbducibleKind::ALL.into_iter().collect(),
        Some(list) => list.iter().map(|k| k.parse()).collect::<Result<_, String>>().map_err(Failure::usage)?,
    };
    let mut policy = AbductionPolicy::with_kinds(kinds);
    policy.compartments = args.compartments.as_ref().map(|c| id_set(c));
    policy.genes = args.genes.as_ref().map(|g| id_set(g));
    if let Some(path) = &args.candidates {
        let reference = parse_model(path, args.candidates_format, None)?;
        policy.candidate_reactions = reference.reactions.into_values().collect();
    }
    Ok(policy)
}

pub fn abduce_cmd(args: &AbduceArgs, exec: Execution) -> Outcome<()> {
    let x = load_experiment(&args.experiment)?;
    let model = &x.model;
    let theory = compile(model)?;
    let pool = enumerate_abducibles(model, &policy(args)?)?;
    for (r, why) in &pool.skipped {
        log::info!("candidate reaction {r} skipped: {why}");
    }
    let observations = match &args.observations {
        Some(path) => ObservationSet::parse(&read_text(path)?)?,
        None => ObservationSet::default(),
    };

    // Experiments observed to grow but predicted not to.
    let requested: Vec<Case> = if args.observations.is_some() {
        observations.iter().filter(|o| o.observed.grows()).map(|o| o.case()).collect()
    } else {
        vec![Case { medium: x.medium.clone(), knockouts: x.knockouts.clone() }]
    };
    let mut cases = Vec::new();
    for case in requested {
        if !predict_growth(&theory, model, &case.medium, &case.knockouts)?.verdict.grows() {
            cases.push(case);
        }
    }

    let mut hypotheses: Vec<Hypothesis> = Vec::new();
    for case in &cases {
        hypotheses.extend(abduce_with(&theory, model, case, &pool, args.max_card, exec)?);
    }
    let fba_check = args.fba.then(FbaCheck::default);
    let hypotheses = filter_hypotheses_with(hypotheses, &theory, model, &pool, &observations, fba_check, exec)?;
    let accepted: Vec<&Hypothesis> = hypotheses.iter().filter(|h| h.stage2 == Some(Stage2Status::Accepted)).collect();

    let mut recorded = Vec::new();
    if args.record {
        let mut ledger = open_ledger(&args.meta)?;
        let base = ledger_base(&mut ledger, model, &args.meta)?;
        for h in &accepted {
            let changes = h.to_changeset(model, &pool)?;
            let meta = RecordMeta {
                reason: Reason::AbductionAccepted,
                description: format!("hypothesis {h} restores growth for {}", describe_case(&h.case)),
                author: args.meta.author.clone(),
                timestamp: args.meta.timestamp.clone(),
            };
            recorded.push(ledger.record(&base, changes, meta)?);
        }
    }

    let sink = Sink::new(args.experiment.out.out.as_deref())?;
    sink.primary("hypotheses.jsonl", &json_lines(&hypotheses))?;
    if args.record {
        sink.extra("recorded.jsonl", &json_lines(&recorded))?;
    }
    eprintln!(
        "cases={} pool={} hypotheses={} accepted={} recorded={}",
        cases.len(),
        pool.len(),
        hypotheses.len(),
        accepted.len(),
        recorded.len()
    );
    Ok(())
}

fn describe_case(case: &Case) -> String {
    let list = |v: Vec<&str>| if v.is_empty() { "-".to_string() } else { v.join(",") };
    format!(
        "medium {} knockouts {}",
        list(case.medium.iter().map(|s| s.as_str()).collect()),
        list(case.knockouts.iter().map(|g| g.as_str()).collect())
    )
}

fn open_ledger(meta: &MetaArgs) -> Outcome<Ledger> {
    let dir = meta.ledger.as_ref().ok_or_else(|| Failure::usage("--ledger is required"))?;
    Ok(Ledger::open(dir)?)
}

/// Revision the abduced changes apply to: the model's latest revision, which
/// must hold exactly `model`. A model the ledger has never seen is recorded
/// as a new root first.
fn ledger_base(ledger: &mut Ledger, model: &MetabolicModel, meta: &MetaArgs) -> Outcome<String> {
    match ledger.head(&model.model_id).map(str::to_string) {
        Some(head) => {
            if &ledger.model_at(&head)? != model {
                return Err(Failure::new(
                    ExitCode::Ledger,
                    anyhow::anyhow!(
                        "model `{}` differs from its latest revision {}; record it with `revise record` first",
                        model.model_id,
                        short(&head)
                    ),
                ));
            }
            Ok(head)
        }
        None => {
            let rec = ledger.record_model(
                None,
                model,
                RecordMeta {
                    reason: Reason::ExternalUpdate,
                    description: "imported before recording abduced repairs".into(),
                    author: meta.author.clone(),
                    timestamp: meta.timestamp.clone(),
                },
            )?;
            Ok(rec.id)
        }
    }
}

#[derive(Serialize)]
struct FbaSummary<'a> {
    model_id: &'a str,
    status: gemlogic::LpStatus,
    objective: f64,
    objective_reaction: &'a str,
    residual: f64,
    bound_violation: f64,
    logic_constrained: bool,
    pinned: Vec<&'a str>,
}

/// Flux values with `-0` written as `0`.
fn flux_text(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        v.to_string()
    }
}

pub fn fba_cmd(args: &FbaArgs) -> Outcome<()> {
    let x = load_experiment(&args.experiment)?;
    let result = if args.logic {
        let theory = compile(&x.model)?;
        logic_constrained_fba(&x.model, &theory, &x.medium, &x.knockouts, None)?
    } else {
        fba(&x.model, &x.medium, &x.knockouts)?
    };
    let mut table = String::from("column\tflux\n");
    for (name, v) in result.flux_table() {
        let _ = writeln!(table, "{name}\t{}", flux_text(v));
    }
    let summary = FbaSummary {
        model_id: &x.model.model_id,
        status: result.solution.status,
        objective: if result.solution.objective == 0.0 { 0.0 } else { result.solution.objective },
        objective_reaction: &result.problem.lp.variables[result.problem.objective].name,
        residual: result.solution.residual,
        bound_violation: result.solution.bound_violation,
        logic_constrained: args.logic,
        pinned: result.pinned.iter().map(|r| r.as_str()).collect(),
    };
    let sink = Sink::new(args.experiment.out.out.as_deref())?;
    sink.primary("fluxes.tsv", table.as_bytes())?;
    sink.extra("fba.json", &json_pretty(&summary))?;
    sink.extra("problem.lp", result.problem.lp.to_lp_string().as_bytes())?;
    eprintln!(
        "status={} objective={} pinned={}",
        serde_json::to_value(result.solution.status).expect("status serializes").as_str().unwrap_or_default(),
        flux_text(summary.objective),
        summary.pinned.len()
    );
    if !result.solution.is_optimal() {
        return Err(Failure::new(ExitCode::Fba, anyhow::anyhow!("no optimal flux distribution")));
    }
    Ok(())
}

fn short(id: &str) -> &str {
    &id[..id.len().min(12)]
}

fn selected(ledger: &Ledger, args: &SelectArgs) -> Outcome<String> {
    resolve_revision(ledger, args.revision.as_deref(), args.model_id.as_deref())
}

/// A revision by id prefix, or the latest revision of a model.
fn resolve_revision(ledger: &Ledger, revision: Option<&str>, model_id: Option<&str>) -> Outcome<String> {
    if let Some(model_id) = model_id {
        return ledger.head(model_id).map(str::to_string).ok_or_else(|| {
            Failure::new(ExitCode::Ledger, anyhow::anyhow!("no revisions recorded for model `{model_id}`"))
        });
    }
    let prefix = revision.unwrap_or_default();
    let matches: Vec<&RevisionRecord> = ledger.records().iter().filter(|r| r.id.starts_with(prefix)).collect();
    match matches.as_slice() {
        [one] => Ok(one.id.clone()),
        [] => Err(Failure::new(ExitCode::Ledger, anyhow::anyhow!("unknown revision `{prefix}`"))),
        _ => Err(Failure::usage(format!("revision prefix `{prefix}` is ambiguous"))),
    }
}

pub fn revise_cmd(cmd: &ReviseCommand) -> Outcome<()> {
    match cmd {
        ReviseCommand::Record(args) => record_cmd(args),
        ReviseCommand::Replay(args) => {
            let ledger = Ledger::open(&args.ledger)?;
            let id = selected(&ledger, args)?;
            let model = ledger.model_at(&id)?;
            Sink::new(args.out.out.as_deref())?.primary("model.json", render_native(&model).as_bytes())?;
            eprintln!("{} at {}: {} reactions", model.model_id, short(&id), model.reactions.len());
            Ok(())
        }
        ReviseCommand::History(args) => {
            let ledger = Ledger::open(&args.ledger)?;
            let chain = ledger.lineage(&selected(&ledger, args)?)?;
            let mut text = String::from("revision\tparent\tversion\treason\tchanges\ttimestamp\n");
            for r in &chain {
                let _ = writeln!(
                    text,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    r.id,
                    r.parent.as_deref().unwrap_or("-"),
                    r.version,
                    r.reason,
                    r.changeset.len(),
                    r.timestamp
                );
            }
            Sink::new(args.out.out.as_deref())?.primary("history.tsv", text.as_bytes())?;
            eprintln!("{} revisions", chain.len());
            Ok(())
        }
        ReviseCommand::Changelog(args) => {
            let ledger = Ledger::open(&args.ledger)?;
            let chain = ledger.lineage(&selected(&ledger, args)?)?;
            Sink::new(args.out.out.as_deref())?.primary("CHANGELOG.txt", changelog(&chain).as_bytes())?;
            Ok(())
        }
        ReviseCommand::Diff(args) => diff_cmd(args),
    }
}

fn record_cmd(args: &RecordArgs) -> Outcome<()> {
    let model = load_model(&args.model)?;
    let reason: Reason = args.reason.parse().map_err(Failure::usage)?;
    let mut ledger = open_ledger(&args.meta)?;
    let parent = match &args.parent {
        Some(p) => Some(resolve_revision(&ledger, Some(p), None)?),
        None => ledger.head(&model.model_id).map(str::to_string),
    };
    if let Some(p) = &parent {
        if ledger.model_at(p)? == model {
            eprintln!("model `{}` is unchanged since {}; nothing recorded", model.model_id, short(p));
            println!("{p}");
            return Ok(());
        }
    }
    let meta = RecordMeta {
        reason,
        description: args.description.clone(),
        author: args.meta.author.clone(),
        timestamp: args.meta.timestamp.clone(),
    };
    let rec = ledger.record_model(parent.as_deref(), &model, meta)?;
    println!("{}", rec.id);
    eprintln!("recorded {} ({} changes, {} revisions in ledger)", short(&rec.id), rec.changeset.len(), ledger.len());
    Ok(())
}

fn diff_cmd(args: &DiffArgs) -> Outcome<()> {
    let a = load_model(&args.model)?;
    let target = ModelArgs { model: args.target.clone(), format: args.target_format, goal: None };
    let b = load_model(&target)?;
    let changes = diff(&a, &b);
    Sink::new(args.out.out.as_deref())?.primary("changeset.jsonl", &json_lines(&changes))?;
    eprintln!("{} changes", changes.len());
    Ok(())
}
