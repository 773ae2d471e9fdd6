//! Flux balance analysis and its integration with the logic model.
//!
//! The LP has one flux variable per reaction (reversible reactions get a
//! negative lower bound) plus an implicit exchange variable `EX_<species>`
//! (`-> species`, bounds `[-1000, 1000]` on the medium and `[-1000, 0]` off it)
//! for every exchange species without an explicit exchange reaction. Rows are
//! the steady-state balances `S·v = 0` of every species that takes part in at
//! least one reaction. Explicit exchange reactions of species outside the
//! medium lose their uptake direction, and reactions whose gene rule is false
//! under the knockouts are closed.
//!
//! [`logic_constrained_fba`] additionally closes every encoded reaction with no
//! derived `act` atom in either direction.

mod lp;
mod solve;

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use lp::{LinearProgram, LpRow, LpVariable};
pub use solve::{solve_lp, FluxSolution, LpStatus, FEASIBILITY_TOLERANCE};

use crate::ids::{GeneId, ReactionId, SpeciesId};
use crate::ledger::{apply_changeset, ChangeError, ChangeItem};
use crate::logic::{check_query, facts_for_query, CompileError, HornClause, LogicTheory, QueryError};
use crate::model::{MetabolicModel, DEFAULT_FLUX_BOUND};
use crate::reasoner::saturate_with;

/// Objective values at or below this count as no growth.
pub const GROWTH_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FbaError {
    #[error("model has no objective reaction")]
    NoObjective,
    #[error("objective reaction `{0}` does not exist")]
    UnknownObjective(ReactionId),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Rules(#[from] CompileError),
    #[error("hypothesis does not apply: {0}")]
    Patch(#[from] ChangeError),
}

/// What an LP column stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Column {
    Reaction(ReactionId),
    /// Implicit exchange of a species with no explicit exchange reaction.
    Exchange(SpeciesId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FbaProblem {
    pub lp: LinearProgram,
    /// Parallel to `lp.variables`.
    pub columns: Vec<Column>,
    pub objective: usize,
}

impl FbaProblem {
    pub fn column_of(&self, reaction: &ReactionId) -> Option<usize> {
        self.columns.iter().position(|c| matches!(c, Column::Reaction(r) if r == reaction))
    }

    /// Closes a column: bounds become `[0, 0]`.
    pub fn close(&mut self, column: usize) {
        let v = &mut self.lp.variables[column];
        v.lower = 0.0;
        v.upper = 0.0;
    }
}

/// Builds the FBA linear program for one experiment.
pub fn build_lp(
    model: &MetabolicModel,
    medium: &BTreeSet<SpeciesId>,
    knockouts: &BTreeSet<GeneId>,
) -> Result<FbaProblem, FbaError> {
    let objective_id = model.objective.as_ref().ok_or(FbaError::NoObjective)?;
    if !model.reactions.contains_key(objective_id) {
        return Err(FbaError::UnknownObjective(objective_id.clone()));
    }
    check_query(model, medium, knockouts)?;

    let mut lp = LinearProgram::new(format!("{} {}", model.model_id, model.version).trim().to_string());
    let mut columns = Vec::new();
    let mut balance: BTreeMap<&SpeciesId, Vec<(usize, f64)>> = BTreeMap::new();
    let mut explicit_exchange: BTreeSet<&SpeciesId> = BTreeSet::new();

    for r in model.reactions.values() {
        let (mut lower, mut upper) = (r.lower_bound, r.upper_bound);
        if !r.enabled_without(knockouts) {
            (lower, upper) = (0.0, 0.0);
        }
        if model.is_exchange_reaction(r) {
            let s = r.participants().next().expect("exchange reactions have one participant");
            explicit_exchange.insert(s);
            if !medium.contains(s) {
                // Uptake is the direction that produces the species.
                let produces = r.products.iter().map(|e| e.coefficient).sum::<f64>()
                    > r.substrates.iter().map(|e| e.coefficient).sum::<f64>();
                if produces {
                    upper = upper.min(0.0);
                } else {
                    lower = lower.max(0.0);
                }
            }
        }
        let objective = if &r.id == objective_id { 1.0 } else { 0.0 };
        let j = lp.add_variable(r.id.as_str(), lower, upper, objective);
        columns.push(Column::Reaction(r.id.clone()));
        let mut net: BTreeMap<&SpeciesId, f64> = BTreeMap::new();
        for e in &r.substrates {
            *net.entry(&e.species).or_default() -= e.coefficient;
        }
        for e in &r.products {
            *net.entry(&e.species).or_default() += e.coefficient;
        }
        for (s, a) in net {
            if a != 0.0 {
                balance.entry(s).or_default().push((j, a));
            }
        }
    }

    let taken: BTreeSet<String> = lp.variables.iter().map(|v| v.name.clone()).collect();
    for s in model.exchange_species.iter().filter(|s| !explicit_exchange.contains(s)) {
        let mut name = format!("EX_{s}");
        while taken.contains(&name) {
            name.push('_');
        }
        let upper = if medium.contains(s) { DEFAULT_FLUX_BOUND } else { 0.0 };
        let j = lp.add_variable(name, -DEFAULT_FLUX_BOUND, upper, 0.0);
        columns.push(Column::Exchange(s.clone()));
        balance.entry(s).or_default().push((j, 1.0));
    }

    for (s, coefficients) in balance {
        lp.add_row(s.as_str(), coefficients, 0.0);
    }
    let objective =
        columns.iter().position(|c| matches!(c, Column::Reaction(r) if r == objective_id)).expect("objective column");
    Ok(FbaProblem { lp, columns, objective })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FbaResult {
    pub problem: FbaProblem,
    pub solution: FluxSolution,
    /// Reactions closed because the logic model cannot activate them.
    pub pinned: Vec<ReactionId>,
}

impl FbaResult {
    pub fn objective(&self) -> f64 {
        self.solution.objective
    }

    /// Optimal and above [`GROWTH_THRESHOLD`].
    pub fn grows(&self) -> bool {
        self.solution.is_optimal() && self.solution.objective > GROWTH_THRESHOLD
    }

    pub fn flux(&self, reaction: &ReactionId) -> Option<f64> {
        self.problem.column_of(reaction).and_then(|j| self.solution.fluxes.get(j).copied())
    }

    /// `(column name, flux)` for every column, in column order.
    pub fn flux_table(&self) -> Vec<(&str, f64)> {
        self.problem.lp.variables.iter().map(|v| v.name.as_str()).zip(self.solution.fluxes.iter().copied()).collect()
    }
}

/// Plain FBA.
pub fn fba(
    model: &MetabolicModel,
    medium: &BTreeSet<SpeciesId>,
    knockouts: &BTreeSet<GeneId>,
) -> Result<FbaResult, FbaError> {
    let problem = build_lp(model, medium, knockouts)?;
    let solution = solve_lp(&problem.lp);
    Ok(FbaResult { problem, solution, pinned: Vec::new() })
}

/// Model edits and matching logic clauses of a candidate repair.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HypothesisPatch {
    pub clauses: Vec<HornClause>,
    pub changes: Vec<ChangeItem>,
}

/// FBA with every logically inactive reaction closed. With a patch, its
/// changes are applied to the model and its clauses layered over the theory.
pub fn logic_constrained_fba(
    model: &MetabolicModel,
    theory: &LogicTheory,
    medium: &BTreeSet<SpeciesId>,
    knockouts: &BTreeSet<GeneId>,
    patch: Option<&HypothesisPatch>,
) -> Result<FbaResult, FbaError> {
    let model: Cow<'_, MetabolicModel> = match patch {
        Some(p) if !p.changes.is_empty() => Cow::Owned(apply_changeset(model, &p.changes)?),
        _ => Cow::Borrowed(model),
    };
    let facts = facts_for_query(&model, medium, knockouts)?;
    let rules = patch.map(|p| p.clauses.as_slice()).unwrap_or(&[]);
    let derived = saturate_with(theory, rules, &facts)?;
    let active = derived.active_reactions();
    let pinned: Vec<ReactionId> = derived
        .encoded_reactions()
        .into_iter()
        .filter(|r| !active.contains(r) && model.reactions.contains_key(r))
        .collect();

    let mut problem = build_lp(&model, medium, knockouts)?;
    for r in &pinned {
        if let Some(j) = problem.column_of(r) {
            problem.close(j);
        }
    }
    let solution = solve_lp(&problem.lp);
    Ok(FbaResult { problem, solution, pinned })
}
