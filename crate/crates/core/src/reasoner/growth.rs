use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::saturate::{Derivation, DerivedSet, Program};
use crate::ids::{GeneId, SpeciesId};
use crate::logic::{facts_for_query, goal_atoms, Atom, CompileError, HornClause, LogicTheory, QueryError};
use crate::model::MetabolicModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Growth,
    NoGrowth,
}

impl Verdict {
    pub fn from_bool(grows: bool) -> Self {
        if grows {
            Verdict::Growth
        } else {
            Verdict::NoGrowth
        }
    }

    pub fn grows(self) -> bool {
        self == Verdict::Growth
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Growth => "GROWTH",
            Verdict::NoGrowth => "NO_GROWTH",
        })
    }
}

impl std::str::FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "GROWTH" => Ok(Verdict::Growth),
            "NO_GROWTH" => Ok(Verdict::NoGrowth),
            other => Err(format!("expected GROWTH or NO_GROWTH, got `{other}`")),
        }
    }
}

/// What supports a verdict: a proof of every goal atom, or the goal atoms that
/// could not be derived.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    Derivation(Derivation),
    Missing(Vec<Atom>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthVerdict {
    pub verdict: Verdict,
    pub evidence: Evidence,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Rules(#[from] CompileError),
}

/// Growth on `medium` with `knockouts` removed: every biomass-goal atom must be
/// derivable.
pub fn predict_growth(
    theory: &LogicTheory,
    model: &MetabolicModel,
    medium: &BTreeSet<SpeciesId>,
    knockouts: &BTreeSet<GeneId>,
) -> Result<GrowthVerdict, GrowthError> {
    predict_growth_with(theory, model, &[], medium, knockouts)
}

/// Like [`predict_growth`], with extra rules (e.g. hypothesis clauses) layered
/// over the theory.
pub fn predict_growth_with(
    theory: &LogicTheory,
    model: &MetabolicModel,
    rules: &[HornClause],
    medium: &BTreeSet<SpeciesId>,
    knockouts: &BTreeSet<GeneId>,
) -> Result<GrowthVerdict, GrowthError> {
    let facts = facts_for_query(model, medium, knockouts)?;
    let derived = super::saturate_with(theory, rules, &facts)?;
    Ok(verdict_from(&derived, &goal_atoms(model)))
}

pub(crate) fn verdict_from(derived: &DerivedSet<'_>, goals: &[Atom]) -> GrowthVerdict {
    let missing: Vec<Atom> = goals.iter().filter(|g| !derived.contains(g)).cloned().collect();
    if missing.is_empty() {
        GrowthVerdict { verdict: Verdict::Growth, evidence: Evidence::Derivation(derived.derivation(goals)) }
    } else {
        GrowthVerdict { verdict: Verdict::NoGrowth, evidence: Evidence::Missing(missing) }
    }
}

/// Verdict only, without building evidence. `extra_facts` are added to the
/// experiment facts.
pub(crate) fn grows(
    theory: &LogicTheory,
    model: &MetabolicModel,
    rules: &[HornClause],
    extra_facts: &[HornClause],
    medium: &BTreeSet<SpeciesId>,
    knockouts: &BTreeSet<GeneId>,
) -> Result<bool, GrowthError> {
    let mut facts = facts_for_query(model, medium, knockouts)?;
    facts.extend_from_slice(extra_facts);
    let mut program = Program::with_rules(theory, rules)?;
    let ids = program.load_facts(&facts)?;
    let fix = program.fixpoint(&ids);
    Ok(goal_atoms(model).iter().all(|g| program.lookup(g).is_some_and(|id| fix.contains(id))))
}
