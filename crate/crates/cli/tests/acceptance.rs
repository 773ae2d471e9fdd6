//! Acceptance suite: one PASS/FAIL line per criterion. Run with
//! `cargo test -p gemlogic-cli --test acceptance -- --nocapture` to see the
//! report.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use gemlogic::abduction::{filter_hypotheses, AbduciblePool, Case, ObservationSet, Stage2Status};
use gemlogic::fba::FEASIBILITY_TOLERANCE;
use gemlogic::ids::{GeneId, SpeciesId};
use gemlogic::ledger::{replay, Reason, RecordMeta};
use gemlogic::logic::facts_for_query;
use gemlogic::reasoner::{essentiality_screen_with, GeneStatus};
use gemlogic::{
    abduce, apply_changeset, compile, diff, fba, fixtures, logic_constrained_fba, predict_growth, saturate, solve_lp,
    Abducible, Atom, Execution, HornClause, Ledger, LpStatus, MetabolicModel, Provenance, Verdict,
};
use gemlogic_testkit::{
    brute_force_abduction, mutate_model, naive_fixpoint, oracle_grows_with, random_experiment, random_lp, random_model,
    random_repair_scenario, rng, vertex_enumeration_optimum, ModelShape,
};

type Check = Result<String, String>;

/// Name, check and time limit of one criterion.
type Criterion = (&'static str, fn() -> Check, Option<Duration>);

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn set<T: From<String> + Ord>(items: &[&str]) -> BTreeSet<T> {
    items.iter().map(|s| T::from(s.to_string())).collect()
}

fn r0889_fidelity() -> Check {
    let theory = compile(&fixtures::r0889()).map_err(|e| e.to_string())?;
    ensure(theory.len() == 9, || format!("{} clauses, expected 9", theory.len()))?;
    let activation: Vec<HornClause> = theory.clauses().filter(|c| c.provenance == Provenance::Activation).collect();
    ensure(activation.len() == 1, || format!("{} ACTIVATION clauses", activation.len()))?;
    let body: BTreeSet<Atom> = activation[0].body.iter().cloned().collect();
    let expected = BTreeSet::from([Atom::met("s0340", "c"), Atom::met("s1207", "c"), Atom::enz("r0889")]);
    ensure(body == expected, || format!("ACTIVATION body {body:?}"))?;
    Ok("9 clauses, ACTIVATION body {met(s0340,c), met(s1207,c), enz(r0889)}".into())
}

fn reasoner_oracle() -> Check {
    for seed in 0..200u64 {
        let mut r = rng(seed);
        let model = random_model(&mut r, ModelShape::default());
        let theory = compile(&model).map_err(|e| e.to_string())?;
        let (medium, knockouts) = random_experiment(&mut r, &model);
        let facts = facts_for_query(&model, &medium, &knockouts).map_err(|e| e.to_string())?;
        let derived = saturate(&theory, &facts).map_err(|e| e.to_string())?.to_set();
        let clauses: Vec<HornClause> = theory.clauses().collect();
        let heads: Vec<Atom> = facts.iter().map(|f| f.head.clone()).collect();
        ensure(derived == naive_fixpoint(&clauses, &heads), || format!("seed {seed}: fixpoints differ"))?;
    }
    Ok("200/200 models agree".into())
}

fn toy5_truth_table() -> Check {
    let model = fixtures::toy5();
    let theory = compile(&model).map_err(|e| e.to_string())?;
    let medium: BTreeSet<SpeciesId> = set(&["A_e"]);
    let cases: [(&str, BTreeSet<SpeciesId>, &[&str], Verdict); 5] = [
        ("wild type", medium.clone(), &[], Verdict::Growth),
        ("KO g1", medium.clone(), &["g1"], Verdict::Growth),
        ("KO g1,g2", medium.clone(), &["g1", "g2"], Verdict::NoGrowth),
        ("KO g3", medium.clone(), &["g3"], Verdict::NoGrowth),
        ("empty medium", BTreeSet::new(), &[], Verdict::NoGrowth),
    ];
    for (name, m, ko, expected) in cases {
        let ko: BTreeSet<GeneId> = set(ko);
        let v = predict_growth(&theory, &model, &m, &ko).map_err(|e| e.to_string())?.verdict;
        ensure(v == expected, || format!("{name}: {v:?}, expected {expected:?}"))?;
    }
    for exec in [Execution::Sequential, Execution::Parallel] {
        let report = essentiality_screen_with(&theory, &model, &medium, None, exec).map_err(|e| e.to_string())?;
        let essential: BTreeSet<String> = report.essential().map(|g| g.to_string()).collect();
        let expected: BTreeSet<String> = set(&["g3", "g4", "gT"]);
        ensure(essential == expected, || format!("{exec:?}: essential {essential:?}"))?;
        ensure(report.count(GeneStatus::NonEssential) == 2, || "expected 2 non-essential genes".into())?;
    }
    Ok("5/5 verdicts, essential = {gT, g3, g4}".into())
}

fn abduction_oracle() -> Check {
    for seed in 0..50u64 {
        let s = random_repair_scenario(&mut rng(seed), 12);
        let theory = compile(&s.model).map_err(|e| e.to_string())?;
        let case = Case { medium: s.medium.clone(), knockouts: s.knockouts.clone() };
        let found: Vec<Vec<Abducible>> = abduce(&theory, &s.model, &case, &s.pool, 3)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|h| {
                let mut a = h.abducibles;
                a.sort();
                a
            })
            .collect();
        let expected = brute_force_abduction(&s.model, &s.pool, &s.medium, &s.knockouts, 3);
        ensure(found == expected, || format!("seed {seed}: {found:?} vs {expected:?}"))?;
    }
    Ok("50/50 scenarios equal exhaustive minimal sets".into())
}

fn stage2_filtering() -> Check {
    let mut model = fixtures::toy5();
    let r2 = model.reactions.remove("r2").expect("fixture has r2");
    let theory = compile(&model).map_err(|e| e.to_string())?;
    let pool = AbduciblePool {
        candidates: vec![
            Abducible::MetaboliteSource { species: "C_c".into() },
            Abducible::ReactionExists { reaction: "r2".into() },
        ],
        reactions: [(r2.id.clone(), r2)].into_iter().collect(),
        ..AbduciblePool::default()
    };
    let case = Case { medium: set(&["A_e"]), knockouts: BTreeSet::new() };
    let observations = ObservationSet::parse("A_e\t-\tGROWTH\nA_e\tg3,g4\tNO_GROWTH\n").map_err(|e| e.to_string())?;
    let hypotheses = abduce(&theory, &model, &case, &pool, 1).map_err(|e| e.to_string())?;
    let filtered =
        filter_hypotheses(hypotheses, &theory, &model, &pool, &observations, None).map_err(|e| e.to_string())?;
    let mut statuses = Vec::new();
    for h in &filtered {
        // Re-derive the status from the reachability oracle, one observation
        // at a time.
        let breaks = observations.iter().any(|o| {
            let before = oracle_grows_with(&model, &pool, &[], &o.medium, &o.knockouts);
            let after = oracle_grows_with(&model, &pool, &h.abducibles, &o.medium, &o.knockouts);
            Verdict::from_bool(before) == o.observed && Verdict::from_bool(after) != o.observed
        });
        let oracle = if breaks { Stage2Status::Inconsistent } else { Stage2Status::Accepted };
        ensure(h.stage2 == Some(oracle), || format!("{h}: {:?} vs oracle {oracle:?}", h.stage2))?;
        statuses.push((h.to_string(), oracle));
    }
    let expected = vec![
        ("{METABOLITE_SOURCE(C_c)}".to_string(), Stage2Status::Inconsistent),
        ("{REACTION_EXISTS(r2)}".to_string(), Stage2Status::Accepted),
    ];
    ensure(statuses == expected, || format!("{statuses:?}"))?;
    Ok("{met(C,c)} INCONSISTENT, {REACTION_EXISTS r2} ACCEPTED".into())
}

fn fba_checks() -> Check {
    let chain = fixtures::chain3();
    let r = fba(&chain, &set(&["A"]), &BTreeSet::new()).map_err(|e| e.to_string())?;
    ensure(r.solution.status == LpStatus::Optimal && (r.objective() - 10.0).abs() <= 1e-6, || {
        format!("CHAIN-3 {:?} {}", r.solution.status, r.objective())
    })?;
    let toy = fixtures::toy5_with_bounds();
    let theory = compile(&toy).map_err(|e| e.to_string())?;
    let ko = logic_constrained_fba(&toy, &theory, &set(&["A_e"]), &set(&["g3"]), None).map_err(|e| e.to_string())?;
    ensure(ko.objective() <= 1e-6, || format!("KO g3 objective {}", ko.objective()))?;
    let mut compared = 0;
    for seed in 0..100u64 {
        let lp = random_lp(&mut rng(seed), 6, 6);
        let solution = solve_lp(&lp);
        match vertex_enumeration_optimum(&lp) {
            Some(best) => {
                ensure(solution.status == LpStatus::Optimal, || format!("seed {seed}: {:?}", solution.status))?;
                ensure((solution.objective - best).abs() <= 1e-6, || {
                    format!("seed {seed}: {} vs {best}", solution.objective)
                })?;
                ensure(
                    solution.residual <= FEASIBILITY_TOLERANCE && solution.bound_violation <= FEASIBILITY_TOLERANCE,
                    || format!("seed {seed}: infeasible point"),
                )?;
                compared += 1;
            }
            None => ensure(solution.status == LpStatus::Infeasible, || format!("seed {seed}: expected infeasible"))?,
        }
    }
    Ok(format!(
        "CHAIN-3 = {:.6}, KO g3 = {:.1e}, 100/100 LPs ({compared} feasible) within 1e-6",
        r.objective(),
        ko.objective()
    ))
}

fn meta(i: usize) -> RecordMeta {
    RecordMeta {
        reason: Reason::Simulated,
        description: format!("step {i}"),
        author: "acceptance".into(),
        timestamp: "1970-01-01T00:00:00Z".into(),
    }
}

fn ledger_checks() -> Check {
    // An independently constructed chain of 1,001 distinct states.
    let mut r = rng(1000);
    let mut states = vec![random_model(&mut r, ModelShape::default())];
    while states.len() <= 1000 {
        let next = mutate_model(&mut r, states.last().unwrap());
        if &next != states.last().unwrap() {
            states.push(next);
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (written, head) = {
        let mut ledger = Ledger::open(dir.path()).map_err(|e| e.to_string())?;
        let mut head = ledger.record_model(None, &states[0], meta(0)).map_err(|e| e.to_string())?.id;
        for (i, s) in states.iter().enumerate().skip(1) {
            head = ledger.record_model(Some(&head), s, meta(i)).map_err(|e| e.to_string())?.id;
        }
        (ledger.export_jsonl(), head)
    };
    let records = std::fs::read(dir.path().join("records.jsonl")).map_err(|e| e.to_string())?;
    let index = std::fs::read(dir.path().join("index.json")).map_err(|e| e.to_string())?;
    let reopened = Ledger::open(dir.path()).map_err(|e| e.to_string())?;
    ensure(reopened.len() == 1001, || format!("{} revisions after reload", reopened.len()))?;
    ensure(reopened.export_jsonl().as_bytes() == written.as_bytes() && records == written.as_bytes(), || {
        "records differ after reload".into()
    })?;
    ensure(std::fs::read(dir.path().join("index.json")).map_err(|e| e.to_string())? == index, || {
        "index rewritten differently".into()
    })?;
    let chain = reopened.lineage(&head).map_err(|e| e.to_string())?;
    let replayed = replay(&MetabolicModel::empty(&states[0].model_id), &chain).map_err(|e| e.to_string())?;
    ensure(&replayed == states.last().unwrap(), || "replay differs from the target".into())?;

    for seed in 0..100u64 {
        let mut r = rng(seed);
        let a = random_model(&mut r, ModelShape::default());
        let other = random_model(&mut r, ModelShape::default());
        let b = mutate_model(&mut r, &other);
        let b = MetabolicModel { model_id: a.model_id.clone(), ..b };
        let back = apply_changeset(&a, &diff(&a, &b)).map_err(|e| e.to_string())?;
        ensure(back == b, || format!("seed {seed}: diff/apply round trip differs"))?;
    }
    Ok("1,000-revision replay equal, 100/100 diff/apply, reload byte-identical".into())
}

fn determinism() -> Check {
    let first = common::run_script(&[])?;
    let second = common::run_script(&[])?;
    let sequential = common::run_script(&["--workers", "1"])?;
    let parallel = common::run_script(&["--workers", "8"])?;
    for (name, other) in [("rerun", &second), ("--workers 1", &sequential), ("--workers 8", &parallel)] {
        let diffs = common::differences(&first, other);
        ensure(diffs.is_empty(), || format!("{name}: {diffs:?}"))?;
    }
    Ok(format!("{} commands, {} outputs identical across 4 runs", common::script().len(), first.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("1 r0889 encoding fidelity", r0889_fidelity, Some(Duration::from_secs(1))),
        ("2 reasoner oracle equivalence", reasoner_oracle, Some(Duration::from_secs(10))),
        ("3 TOY-5 truth table", toy5_truth_table, Some(Duration::from_secs(1))),
        ("4 abduction completeness/minimality", abduction_oracle, Some(Duration::from_secs(60))),
        ("5 stage-2 filtering", stage2_filtering, None),
        ("6 FBA", fba_checks, None),
        ("7 ledger", ledger_checks, Some(Duration::from_secs(30))),
        ("8 determinism", determinism, None),
    ];
    let mut failed = Vec::new();
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match (result, limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("PASS {name}: {detail} ({elapsed:.2?})"),
            Err(why) => {
                println!("FAIL {name}: {why} ({elapsed:.2?})");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
