//! Abductive model repair.
//!
//! Stage 1 ([`abduce`]) searches, by iterative deepening on cardinality, for
//! every subset-minimal set of abducibles whose clauses make a wrongly
//! predicted no-growth experiment derive all biomass goals. Stage 2
//! ([`filter_hypotheses`]) re-runs every observation with each hypothesis
//! installed, rejects those that break a previously correct prediction, and
//! optionally rejects those that cannot carry biomass flux under
//! logic-constrained FBA.
//!
//! Abducibles and the clauses they add:
//!
//! ```text
//! GENE_FUNCTION(g, r)    iso(r,k) <- gn(g);  enz(r) <- iso(r,k)   (k = next free isoenzyme index)
//! METABOLITE_SOURCE(s)   met(s,c) <-
//! REACTION_EXISTS(r)     the full clause block of r
//! ```
//!
//! All added clauses carry the HYPOTHESIS provenance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{map_ordered, Execution};
use crate::fba::{logic_constrained_fba, FbaError, HypothesisPatch, GROWTH_THRESHOLD};
use crate::gpr::{gpr_to_dnf, GprExpr, DEFAULT_DNF_CAP};
use crate::ids::{CompartmentId, GeneId, ReactionId, SpeciesId};
use crate::ledger::ChangeItem;
use crate::logic::{
    check_query, reaction_clauses, Atom, CompileError, HornClause, LogicTheory, Provenance, QueryError,
};
use crate::model::{MetabolicModel, Reaction, DEFAULT_FLUX_BOUND};
use crate::reasoner::{grows, GrowthError, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AbducibleKind {
    GeneFunction,
    MetaboliteSource,
    ReactionExists,
}

impl AbducibleKind {
    pub const ALL: [AbducibleKind; 3] =
        [AbducibleKind::GeneFunction, AbducibleKind::MetaboliteSource, AbducibleKind::ReactionExists];

    pub fn name(self) -> &'static str {
        match self {
            AbducibleKind::GeneFunction => "GENE_FUNCTION",
            AbducibleKind::MetaboliteSource => "METABOLITE_SOURCE",
            AbducibleKind::ReactionExists => "REACTION_EXISTS",
        }
    }
}

impl fmt::Display for AbducibleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AbducibleKind {
    type Err = String;

    /// Case-insensitive; `-` and `_` are interchangeable.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| format!("unknown abducible kind `{s}` (GENE_FUNCTION, METABOLITE_SOURCE, REACTION_EXISTS)"))
    }
}

/// One candidate addition to the model. The derived order (kind, then ids)
/// is the lexicographic order used for results.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Abducible {
    GeneFunction { gene: GeneId, reaction: ReactionId },
    MetaboliteSource { species: SpeciesId },
    ReactionExists { reaction: ReactionId },
}

impl Abducible {
    pub fn kind(&self) -> AbducibleKind {
        match self {
            Abducible::GeneFunction { .. } => AbducibleKind::GeneFunction,
            Abducible::MetaboliteSource { .. } => AbducibleKind::MetaboliteSource,
            Abducible::ReactionExists { .. } => AbducibleKind::ReactionExists,
        }
    }
}

impl fmt::Display for Abducible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Abducible::GeneFunction { gene, reaction } => write!(f, "GENE_FUNCTION({gene},{reaction})"),
            Abducible::MetaboliteSource { species } => write!(f, "METABOLITE_SOURCE({species})"),
            Abducible::ReactionExists { reaction } => write!(f, "REACTION_EXISTS({reaction})"),
        }
    }
}

/// Which abducibles to generate. Unset pools default to everything eligible.
#[derive(Clone, Debug, Default)]
pub struct AbductionPolicy {
    pub kinds: BTreeSet<AbducibleKind>,
    /// GENE_FUNCTION genes (default: all model genes).
    pub genes: Option<BTreeSet<GeneId>>,
    /// GENE_FUNCTION target reactions (default: every enzymatic reaction).
    pub target_reactions: Option<BTreeSet<ReactionId>>,
    /// METABOLITE_SOURCE species (default: every non-exchange species).
    pub species: Option<BTreeSet<SpeciesId>>,
    /// Restricts METABOLITE_SOURCE species to these compartments.
    pub compartments: Option<BTreeSet<CompartmentId>>,
    /// REACTION_EXISTS candidates, typically from a reference model.
    pub candidate_reactions: Vec<Reaction>,
}

impl AbductionPolicy {
    pub fn with_kinds(kinds: impl IntoIterator<Item = AbducibleKind>) -> Self {
        Self { kinds: kinds.into_iter().collect(), ..Self::default() }
    }
}

/// Deduplicated, sorted candidates plus the reactions REACTION_EXISTS refers to.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AbduciblePool {
    pub candidates: Vec<Abducible>,
    pub reactions: BTreeMap<ReactionId, Reaction>,
    /// Candidate reactions that could not be offered, with the reason.
    pub skipped: Vec<(ReactionId, String)>,
}

impl AbduciblePool {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn count(&self, kind: AbducibleKind) -> usize {
        self.candidates.iter().filter(|a| a.kind() == kind).count()
    }
}

/// An experiment: a medium and a set of knocked-out genes.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Case {
    pub medium: BTreeSet<SpeciesId>,
    pub knockouts: BTreeSet<GeneId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Observation {
    pub medium: BTreeSet<SpeciesId>,
    pub knockouts: BTreeSet<GeneId>,
    pub observed: Verdict,
}

impl Observation {
    pub fn case(&self) -> Case {
        Case { medium: self.medium.clone(), knockouts: self.knockouts.clone() }
    }
}

/// Observations with no two conflicting labels for the same experiment.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ObservationSet {
    observations: Vec<Observation>,
}

impl ObservationSet {
    /// Drops exact duplicates; conflicting labels are an error.
    pub fn new(observations: Vec<Observation>) -> Result<Self, AbductionError> {
        let mut seen: BTreeMap<Case, (usize, Verdict)> = BTreeMap::new();
        let mut kept = Vec::new();
        for (i, o) in observations.into_iter().enumerate() {
            match seen.get(&o.case()) {
                Some(&(first, v)) if v != o.observed => {
                    return Err(AbductionError::ConflictingObservations { first, second: i })
                }
                Some(_) => {}
                None => {
                    seen.insert(o.case(), (i, o.observed));
                    kept.push(o);
                }
            }
        }
        Ok(Self { observations: kept })
    }

    /// Parses tab-separated lines `medium<TAB>knockouts<TAB>GROWTH|NO_GROWTH`.
    /// Lists are comma-separated, `-` stands for an empty list, and blank
    /// lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, AbductionError> {
        let mut out = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: String| AbductionError::ObservationSyntax { line: i + 1, message };
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(syntax(format!("expected 3 tab-separated fields, found {}", fields.len())));
            }
            let observed = fields[2].parse::<Verdict>().map_err(syntax)?;
            out.push(Observation { medium: parse_list(fields[0]), knockouts: parse_list(fields[1]), observed });
        }
        Self::new(out)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Observation> + '_ {
        self.observations.iter()
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn as_slice(&self) -> &[Observation] {
        &self.observations
    }
}

/// Comma-separated ids; `-` or an empty string is the empty list.
pub fn parse_list<T: From<String> + Ord>(field: &str) -> BTreeSet<T> {
    let field = field.trim();
    if field.is_empty() || field == "-" {
        return BTreeSet::new();
    }
    field.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| T::from(s.to_string())).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stage2Status {
    /// Breaks no correct prediction; FBA not (yet) consulted.
    Consistent,
    /// Flips a previously correct prediction.
    Inconsistent,
    /// Consistent, but logic-constrained FBA finds no biomass flux.
    FbaRejected,
    Accepted,
}

/// How one observation's prediction changes when the hypothesis is installed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObservationDelta {
    pub observation: usize,
    pub observed: Verdict,
    pub before: Verdict,
    pub after: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hypothesis {
    /// Sorted, non-empty.
    pub abducibles: Vec<Abducible>,
    pub cardinality: usize,
    /// The experiment this hypothesis repairs.
    pub case: Case,
    /// All goal atoms derivable with the hypothesis installed.
    pub stage1: bool,
    pub stage2: Option<Stage2Status>,
    pub deltas: Vec<ObservationDelta>,
    /// Lowest logic-constrained biomass flux over the checked growth cases.
    pub fba_objective: Option<f64>,
}

impl Hypothesis {
    pub fn new(abducibles: Vec<Abducible>, case: Case) -> Self {
        let mut abducibles = abducibles;
        abducibles.sort();
        abducibles.dedup();
        Self {
            cardinality: abducibles.len(),
            abducibles,
            case,
            stage1: false,
            stage2: None,
            deltas: Vec::new(),
            fba_objective: None,
        }
    }

    /// Clauses that install this hypothesis over the model's theory.
    pub fn clauses(&self, model: &MetabolicModel, pool: &AbduciblePool) -> Result<Vec<HornClause>, AbductionError> {
        hypothesis_clauses(model, pool, &self.abducibles.iter().collect::<Vec<_>>())
    }

    /// Model edits equivalent to the hypothesis: `ADD GPR` for a gene
    /// function, a spontaneous source reaction `SRC_<species>` (`-> species`,
    /// bounds `[0, 1000]`) for a metabolite source, `ADD REACTION` for a
    /// reaction.
    pub fn to_changeset(
        &self,
        model: &MetabolicModel,
        pool: &AbduciblePool,
    ) -> Result<Vec<ChangeItem>, AbductionError> {
        let mut used: BTreeSet<ReactionId> = BTreeSet::new();
        let mut out = Vec::new();
        for a in &self.abducibles {
            match a {
                Abducible::GeneFunction { gene, reaction } => {
                    out.push(ChangeItem::add_gpr(reaction, &GprExpr::Gene(gene.clone())));
                }
                Abducible::MetaboliteSource { species } => {
                    let mut id = format!("SRC_{species}");
                    while model.reactions.contains_key(id.as_str()) || used.contains(id.as_str()) {
                        id.push('_');
                    }
                    used.insert(id.as_str().into());
                    let r = Reaction::new(id.as_str(), &[], &[species.as_str()], false, None)
                        .with_bounds(0.0, DEFAULT_FLUX_BOUND);
                    out.push(ChangeItem::add_reaction(&r));
                }
                Abducible::ReactionExists { reaction } => {
                    let r =
                        pool.reactions.get(reaction).ok_or_else(|| AbductionError::UnknownAbducible(a.to_string()))?;
                    out.push(ChangeItem::add_reaction(r));
                }
            }
        }
        Ok(out)
    }

    pub fn patch(&self, model: &MetabolicModel, pool: &AbduciblePool) -> Result<HypothesisPatch, AbductionError> {
        Ok(HypothesisPatch { clauses: self.clauses(model, pool)?, changes: self.to_changeset(model, pool)? })
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.abducibles.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbductionError {
    #[error("abduction policy enables no abducible kind")]
    EmptyPolicy,
    #[error("policy refers to unknown gene `{0}`")]
    UnknownGene(GeneId),
    #[error("policy refers to unknown reaction `{0}`")]
    UnknownReaction(ReactionId),
    #[error("policy refers to unknown species `{0}`")]
    UnknownSpecies(SpeciesId),
    #[error("abducible {0} is not in the candidate pool")]
    UnknownAbducible(String),
    #[error("the case is already predicted to grow; nothing to repair")]
    NotFalseNoGrowth,
    #[error("hypothesis {0} has not passed stage 1")]
    NotStageOne(String),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Rules(#[from] CompileError),
    #[error("observation {index}: {source}")]
    Observation { index: usize, source: QueryError },
    #[error("observations {first} and {second} give conflicting labels for the same experiment")]
    ConflictingObservations { first: usize, second: usize },
    #[error("observation line {line}: {message}")]
    ObservationSyntax { line: usize, message: String },
    #[error(transparent)]
    Fba(#[from] FbaError),
}

impl From<GrowthError> for AbductionError {
    fn from(e: GrowthError) -> Self {
        match e {
            GrowthError::Query(q) => AbductionError::Query(q),
            GrowthError::Rules(r) => AbductionError::Rules(r),
        }
    }
}

/// Candidate abducibles allowed by `policy`, deduplicated and sorted.
///
/// GENE_FUNCTION pairs every pool gene with every enzymatic target reaction
/// whose rule does not already mention the gene. REACTION_EXISTS offers every
/// candidate reaction absent from the model whose species and genes the model
/// declares and that is not an exchange reaction; others are listed in
/// `skipped`.
pub fn enumerate_abducibles(model: &MetabolicModel, policy: &AbductionPolicy) -> Result<AbduciblePool, AbductionError> {
    if policy.kinds.is_empty() {
        return Err(AbductionError::EmptyPolicy);
    }
    let mut pool = AbduciblePool::default();

    if policy.kinds.contains(&AbducibleKind::GeneFunction) {
        let genes: Vec<&GeneId> = match &policy.genes {
            Some(gs) => {
                if let Some(g) = gs.iter().find(|g| !model.genes.contains(*g)) {
                    return Err(AbductionError::UnknownGene(g.clone()));
                }
                gs.iter().collect()
            }
            None => model.genes.iter().collect(),
        };
        if let Some(ids) = &policy.target_reactions {
            if let Some(r) = ids.iter().find(|r| !model.reactions.contains_key(*r)) {
                return Err(AbductionError::UnknownReaction(r.clone()));
            }
        }
        let targets = model.reactions.values().filter(|r| {
            r.gpr.is_some()
                && !model.is_exchange_reaction(r)
                && policy.target_reactions.as_ref().is_none_or(|ids| ids.contains(&r.id))
        });
        for r in targets {
            let existing = r.gpr.as_ref().map(GprExpr::genes).unwrap_or_default();
            for g in genes.iter().filter(|g| !existing.contains(**g)) {
                pool.candidates.push(Abducible::GeneFunction { gene: (*g).clone(), reaction: r.id.clone() });
            }
        }
    }

    if policy.kinds.contains(&AbducibleKind::MetaboliteSource) {
        let species: Vec<&SpeciesId> = match &policy.species {
            Some(ss) => {
                if let Some(s) = ss.iter().find(|s| !model.species.contains_key(*s)) {
                    return Err(AbductionError::UnknownSpecies(s.clone()));
                }
                ss.iter().collect()
            }
            None => model.species.keys().filter(|s| !model.exchange_species.contains(*s)).collect(),
        };
        for s in species {
            let compartment = &model.species[s].compartment;
            if policy.compartments.as_ref().is_none_or(|cs| cs.contains(compartment)) {
                pool.candidates.push(Abducible::MetaboliteSource { species: s.clone() });
            }
        }
    }

    if policy.kinds.contains(&AbducibleKind::ReactionExists) {
        for r in &policy.candidate_reactions {
            let reason = if model.reactions.contains_key(&r.id) {
                Some("already in the model".to_string())
            } else if let Some(s) = r.participants().find(|s| !model.species.contains_key(*s)) {
                Some(format!("unknown species `{s}`"))
            } else if let Some(g) =
                r.gpr.as_ref().and_then(|e| e.genes().into_iter().find(|g| !model.genes.contains(g)))
            {
                Some(format!("unknown gene `{g}`"))
            } else if model.is_exchange_reaction(r) {
                Some("exchange reaction".to_string())
            } else if pool.reactions.contains_key(&r.id) {
                Some("duplicate candidate".to_string())
            } else {
                None
            };
            match reason {
                Some(why) => pool.skipped.push((r.id.clone(), why)),
                None => {
                    pool.reactions.insert(r.id.clone(), r.clone());
                    pool.candidates.push(Abducible::ReactionExists { reaction: r.id.clone() });
                }
            }
        }
    }

    pool.candidates.sort();
    pool.candidates.dedup();
    Ok(pool)
}

fn hypothesis_clauses(
    model: &MetabolicModel,
    pool: &AbduciblePool,
    abducibles: &[&Abducible],
) -> Result<Vec<HornClause>, AbductionError> {
    let mut out = Vec::new();
    let mut next_iso: BTreeMap<&ReactionId, u32> = BTreeMap::new();
    for a in abducibles {
        match a {
            Abducible::GeneFunction { gene, reaction } => {
                let r =
                    model.reactions.get(reaction).ok_or_else(|| AbductionError::UnknownReaction(reaction.clone()))?;
                let k = match next_iso.get(reaction) {
                    Some(&k) => k,
                    None => gpr_to_dnf(r.gpr.as_ref(), DEFAULT_DNF_CAP)
                        .map_err(|e| CompileError::DnfCap { reaction: reaction.clone(), cap: e.cap })?
                        .disjuncts()
                        .len() as u32,
                };
                next_iso.insert(reaction, k + 1);
                let iso = Atom::iso(reaction.clone(), k);
                out.push(HornClause::new(Provenance::Hypothesis, iso.clone(), [Atom::gn(gene.clone())]));
                out.push(HornClause::new(Provenance::Hypothesis, Atom::enz(reaction.clone()), [iso]));
            }
            Abducible::MetaboliteSource { species } => {
                let c = model.compartment_of(species).ok_or_else(|| AbductionError::UnknownSpecies(species.clone()))?;
                out.push(HornClause::fact(Provenance::Hypothesis, Atom::met(species.clone(), c.clone())));
            }
            Abducible::ReactionExists { reaction } => {
                let r = pool.reactions.get(reaction).ok_or_else(|| AbductionError::UnknownAbducible(a.to_string()))?;
                out.extend(reaction_clauses(
                    r,
                    |s| model.compartment_of(s).cloned(),
                    DEFAULT_DNF_CAP,
                    Some(Provenance::Hypothesis),
                )?);
            }
        }
    }
    Ok(out)
}

/// Abducibles that abduction may use for `model`: METABOLITE_SOURCE
/// candidates that would assert a biomass goal directly are left out, since
/// they explain nothing.
pub fn usable_candidates<'p>(model: &MetabolicModel, pool: &'p AbduciblePool) -> Vec<&'p Abducible> {
    let goals: BTreeSet<&SpeciesId> = model.biomass_goal.iter().collect();
    pool.candidates
        .iter()
        .filter(|a| !matches!(a, Abducible::MetaboliteSource { species } if goals.contains(species)))
        .collect()
}

/// Stage 1: every subset-minimal hypothesis of at most `max_cardinality`
/// abducibles that makes `case` grow, ordered by cardinality and then
/// lexicographically.
pub fn abduce(
    theory: &LogicTheory,
    model: &MetabolicModel,
    case: &Case,
    pool: &AbduciblePool,
    max_cardinality: usize,
) -> Result<Vec<Hypothesis>, AbductionError> {
    abduce_with(theory, model, case, pool, max_cardinality, Execution::default())
}

/// Subsets evaluated per parallel batch.
const BATCH: usize = 4096;

pub fn abduce_with(
    theory: &LogicTheory,
    model: &MetabolicModel,
    case: &Case,
    pool: &AbduciblePool,
    max_cardinality: usize,
    exec: Execution,
) -> Result<Vec<Hypothesis>, AbductionError> {
    if grows(theory, model, &[], &[], &case.medium, &case.knockouts)? {
        return Err(AbductionError::NotFalseNoGrowth);
    }
    let candidates = usable_candidates(model, pool);
    let n = candidates.len();
    let mut found: Vec<Vec<usize>> = Vec::new();
    for k in 1..=max_cardinality.min(n) {
        let mut combo: Vec<usize> = (0..k).collect();
        let mut done = false;
        while !done {
            let mut batch = Vec::with_capacity(BATCH);
            while batch.len() < BATCH && !done {
                if !found.iter().any(|f| is_subset(f, &combo)) {
                    batch.push(combo.clone());
                }
                done = !next_combination(&mut combo, n);
            }
            let verdicts = map_ordered(&batch, exec, |subset| -> Result<bool, AbductionError> {
                let chosen: Vec<&Abducible> = subset.iter().map(|&i| candidates[i]).collect();
                let rules = hypothesis_clauses(model, pool, &chosen)?;
                Ok(grows(theory, model, &rules, &[], &case.medium, &case.knockouts)?)
            });
            for (subset, ok) in batch.into_iter().zip(verdicts) {
                if ok? {
                    found.push(subset);
                }
            }
        }
    }
    Ok(found
        .into_iter()
        .map(|subset| {
            let mut h = Hypothesis::new(subset.iter().map(|&i| candidates[i].clone()).collect(), case.clone());
            h.stage1 = true;
            h
        })
        .collect())
}

/// Both sorted.
fn is_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

/// Advances to the next k-combination of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// FBA settings for stage 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FbaCheck {
    /// Biomass flux at or below this rejects the hypothesis.
    pub threshold: f64,
}

impl Default for FbaCheck {
    fn default() -> Self {
        Self { threshold: GROWTH_THRESHOLD }
    }
}

/// Stage 2. Every hypothesis is checked against every observation; one that
/// flips a correct prediction is INCONSISTENT. With `fba`, the remaining ones
/// must carry biomass flux above the threshold under logic-constrained FBA in
/// the repaired case and in every observed-growth experiment they newly
/// explain, or they are FBA_REJECTED. All others are ACCEPTED. Order and
/// contents are preserved; only the statuses, deltas and FBA objective change.
pub fn filter_hypotheses(
    hypotheses: Vec<Hypothesis>,
    theory: &LogicTheory,
    model: &MetabolicModel,
    pool: &AbduciblePool,
    observations: &ObservationSet,
    fba: Option<FbaCheck>,
) -> Result<Vec<Hypothesis>, AbductionError> {
    filter_hypotheses_with(hypotheses, theory, model, pool, observations, fba, Execution::default())
}

pub fn filter_hypotheses_with(
    hypotheses: Vec<Hypothesis>,
    theory: &LogicTheory,
    model: &MetabolicModel,
    pool: &AbduciblePool,
    observations: &ObservationSet,
    fba: Option<FbaCheck>,
    exec: Execution,
) -> Result<Vec<Hypothesis>, AbductionError> {
    for (index, o) in observations.iter().enumerate() {
        check_query(model, &o.medium, &o.knockouts).map_err(|source| AbductionError::Observation { index, source })?;
    }
    if let Some(h) = hypotheses.iter().find(|h| !h.stage1) {
        return Err(AbductionError::NotStageOne(h.to_string()));
    }
    let before: Vec<Verdict> = observations
        .iter()
        .map(|o| grows(theory, model, &[], &[], &o.medium, &o.knockouts).map(Verdict::from_bool))
        .collect::<Result<_, _>>()?;

    let results = map_ordered(&hypotheses, exec, |h| -> Result<Hypothesis, AbductionError> {
        let mut h = h.clone();
        let rules = h.clauses(model, pool)?;
        h.deltas = observations
            .iter()
            .zip(&before)
            .enumerate()
            .map(|(i, (o, &b))| {
                let after = Verdict::from_bool(grows(theory, model, &rules, &[], &o.medium, &o.knockouts)?);
                Ok(ObservationDelta { observation: i, observed: o.observed, before: b, after })
            })
            .collect::<Result<_, AbductionError>>()?;
        let breaks = h.deltas.iter().any(|d| d.before == d.observed && d.after != d.observed);
        h.stage2 = Some(if breaks { Stage2Status::Inconsistent } else { Stage2Status::Consistent });
        if let (Some(check), false) = (fba, breaks) {
            let patch = HypothesisPatch { clauses: rules, changes: h.to_changeset(model, pool)? };
            let mut cases = vec![h.case.clone()];
            for d in &h.deltas {
                let o = &observations.as_slice()[d.observation];
                if d.observed == Verdict::Growth && d.before == Verdict::NoGrowth && d.after == Verdict::Growth {
                    cases.push(o.case());
                }
            }
            cases.sort();
            cases.dedup();
            let mut lowest = f64::INFINITY;
            for c in &cases {
                let r = logic_constrained_fba(model, theory, &c.medium, &c.knockouts, Some(&patch))?;
                let value = if r.solution.is_optimal() { r.objective() } else { 0.0 };
                lowest = lowest.min(value);
            }
            h.fba_objective = Some(lowest);
            h.stage2 = Some(if lowest > check.threshold { Stage2Status::Accepted } else { Stage2Status::FbaRejected });
        } else if !breaks {
            h.stage2 = Some(Stage2Status::Accepted);
        }
        Ok(h)
    });
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::logic::compile;

    fn toy5_without_r2() -> MetabolicModel {
        let mut m = fixtures::toy5();
        m.reactions.remove("r2");
        m
    }

    fn wild_case() -> Case {
        Case { medium: BTreeSet::from(["A_e".into()]), knockouts: BTreeSet::new() }
    }

    fn r2_pool(m: &MetabolicModel) -> AbduciblePool {
        let policy = AbductionPolicy {
            candidate_reactions: vec![fixtures::toy5().reactions["r2"].clone()],
            ..AbductionPolicy::with_kinds([AbducibleKind::ReactionExists])
        };
        enumerate_abducibles(m, &policy).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        let m = fixtures::toy5();
        let cyto = AbductionPolicy {
            compartments: Some(BTreeSet::from(["c".into()])),
            ..AbductionPolicy::with_kinds([AbducibleKind::MetaboliteSource])
        };
        assert_eq!(enumerate_abducibles(&m, &cyto).unwrap().len(), 4);
        let gf = enumerate_abducibles(&m, &AbductionPolicy::with_kinds([AbducibleKind::GeneFunction])).unwrap();
        assert_eq!(gf.len(), 10);
        assert!(!gf.candidates.contains(&Abducible::GeneFunction { gene: "g1".into(), reaction: "r1".into() }));
        assert_eq!(enumerate_abducibles(&m, &AbductionPolicy::default()), Err(AbductionError::EmptyPolicy));
    }

    #[test]
    fn metabolite_source_repairs_missing_r2() {
        let m = toy5_without_r2();
        let t = compile(&m).unwrap();
        let pool = enumerate_abducibles(&m, &AbductionPolicy::with_kinds([AbducibleKind::MetaboliteSource])).unwrap();
        let hs = abduce(&t, &m, &wild_case(), &pool, 2).unwrap();
        let got: Vec<String> = hs.iter().map(|h| h.to_string()).collect();
        assert_eq!(got, ["{METABOLITE_SOURCE(C_c)}"]);
        assert!(abduce(&t, &m, &wild_case(), &pool, 0).unwrap().is_empty());
    }

    #[test]
    fn reaction_exists_repairs_missing_r2() {
        let m = toy5_without_r2();
        let t = compile(&m).unwrap();
        let hs = abduce(&t, &m, &wild_case(), &r2_pool(&m), 2).unwrap();
        assert_eq!(hs.len(), 1);
        assert_eq!(hs[0].abducibles, vec![Abducible::ReactionExists { reaction: "r2".into() }]);
    }

    #[test]
    fn growing_case_is_rejected() {
        let m = fixtures::toy5();
        let t = compile(&m).unwrap();
        let pool = enumerate_abducibles(&m, &AbductionPolicy::with_kinds([AbducibleKind::MetaboliteSource])).unwrap();
        assert_eq!(abduce(&t, &m, &wild_case(), &pool, 1), Err(AbductionError::NotFalseNoGrowth));
    }

    #[test]
    fn stage_two() {
        let m = toy5_without_r2();
        let t = compile(&m).unwrap();
        let mut pool = r2_pool(&m);
        pool.candidates.push(Abducible::MetaboliteSource { species: "C_c".into() });
        pool.candidates.sort();
        let hs = abduce(&t, &m, &wild_case(), &pool, 1).unwrap();
        assert_eq!(hs.len(), 2);
        let obs = ObservationSet::parse("A_e\t-\tGROWTH\nA_e\tg3,g4\tNO_GROWTH\n").unwrap();
        let out = filter_hypotheses(hs.clone(), &t, &m, &pool, &obs, None).unwrap();
        assert_eq!(out[0].stage2, Some(Stage2Status::Inconsistent));
        assert_eq!(out[0].abducibles, vec![Abducible::MetaboliteSource { species: "C_c".into() }]);
        assert_eq!(out[1].stage2, Some(Stage2Status::Accepted));
        assert_eq!(
            out[1].deltas[0],
            ObservationDelta {
                observation: 0,
                observed: Verdict::Growth,
                before: Verdict::NoGrowth,
                after: Verdict::Growth
            }
        );

        let none = filter_hypotheses(hs, &t, &m, &pool, &ObservationSet::default(), None).unwrap();
        assert!(none.iter().all(|h| h.stage2 == Some(Stage2Status::Accepted)));
    }

    #[test]
    fn fba_stage() {
        let mut m = fixtures::toy5_with_bounds();
        m.reactions.remove("r2");
        let t = compile(&m).unwrap();
        let mut pool = r2_pool(&m);
        pool.candidates.push(Abducible::MetaboliteSource { species: "C_c".into() });
        pool.candidates.sort();
        let hs = abduce(&t, &m, &wild_case(), &pool, 1).unwrap();
        let out = filter_hypotheses(hs, &t, &m, &pool, &ObservationSet::default(), Some(FbaCheck::default())).unwrap();
        for h in &out {
            assert_eq!(h.stage2, Some(Stage2Status::Accepted), "{h}");
            assert!(h.fba_objective.unwrap() > 1.0);
        }
    }

    #[test]
    fn changeset_of_gene_function() {
        let mut m = fixtures::toy5();
        m.genes.insert("g5".into());
        let h =
            Hypothesis::new(vec![Abducible::GeneFunction { gene: "g5".into(), reaction: "r2".into() }], wild_case());
        let cs = h.to_changeset(&m, &AbduciblePool::default()).unwrap();
        assert_eq!(cs, vec![ChangeItem::add_gpr(&"r2".into(), &GprExpr::gene("g5"))]);
        let clauses = h.clauses(&m, &AbduciblePool::default()).unwrap();
        assert_eq!(clauses[0].to_string(), "iso(r2,1) <- gn(g5)");
    }

    #[test]
    fn observation_parsing() {
        assert!(matches!(
            ObservationSet::parse("A_e\t-\tGROWTH\nA_e\t-\tNO_GROWTH\n"),
            Err(AbductionError::ConflictingObservations { first: 0, second: 1 })
        ));
        assert!(matches!(
            ObservationSet::parse("# c\n\nA_e\tGROWTH\n"),
            Err(AbductionError::ObservationSyntax { line: 3, .. })
        ));
        assert_eq!(ObservationSet::parse("A_e\t-\tGROWTH\nA_e\t-\tGROWTH\n").unwrap().len(), 1);
    }

    #[test]
    fn combinations_in_order() {
        let mut c = vec![0, 1];
        let mut all = vec![c.clone()];
        while next_combination(&mut c, 4) {
            all.push(c.clone());
        }
        assert_eq!(all, [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]);
        assert!(is_subset(&[1, 3], &[0, 1, 2, 3]));
        assert!(!is_subset(&[1, 4], &[0, 1, 2, 3]));
    }
}
