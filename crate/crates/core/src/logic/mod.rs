//! Compilation of a metabolic model into a ground Horn theory.
//!
//! For every non-exchange reaction `r` with minimal DNF disjuncts `D0..Dk-1`
//! and every direction `d` it can run in (both when reversible, inputs and
//! outputs swapped for `rev`):
//!
//! ```text
//! act(r,d) <- met(s,c) for each input s, enz(r)     ACTIVATION (enz omitted if spontaneous)
//! met(p,c) <- act(r,d) for each output p            PRODUCT
//! enz(r)   <- iso(r,i) for each disjunct i          ENZYME
//! iso(r,i) <- gn(g) for each g in Di                ISOENZYME
//! ```
//!
//! ENZYME and ISOENZYME clauses do not depend on direction and appear once.
//! Exchange reactions (a single exchange species as the only participant) are
//! not encoded; the medium supplies those species as facts instead.
//! Stoichiometric coefficients play no part in the encoding.

mod atom;
pub(crate) mod theory;

use std::collections::BTreeSet;

use thiserror::Error;

pub use atom::{Atom, Direction, HornClause, Provenance};
pub use theory::{theory_stats, AtomId, LogicTheory, TheoryStats};

use crate::gpr::{gpr_to_dnf, Dnf, DEFAULT_DNF_CAP};
use crate::ids::{CompartmentId, GeneId, ReactionId, SpeciesId};
use crate::model::{has_errors, validate, Diagnostic, MetabolicModel, Reaction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("model has validation errors:\n{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error("reaction `{reaction}`: gene rule expands to more than {cap} disjuncts")]
    DnfCap { reaction: ReactionId, cap: usize },
    #[error("species `{0}` has no compartment")]
    UnknownSpecies(SpeciesId),
    #[error("clause has its head in its body: {0}")]
    HeadInBody(String),
}

#[derive(Clone, Debug)]
pub struct CompileOptions {
    pub dnf_cap: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self { dnf_cap: DEFAULT_DNF_CAP }
    }
}

pub fn compile(model: &MetabolicModel) -> Result<LogicTheory, CompileError> {
    compile_with(model, &CompileOptions::default())
}

pub fn compile_with(model: &MetabolicModel, options: &CompileOptions) -> Result<LogicTheory, CompileError> {
    let diags = validate(model);
    if has_errors(&diags) {
        return Err(CompileError::Invalid(
            diags.into_iter().filter(|d| d.severity == crate::model::Severity::Error).collect(),
        ));
    }
    let mut items = Vec::new();
    for r in model.reactions.values() {
        if model.is_exchange_reaction(r) {
            continue;
        }
        let clauses = reaction_clauses(r, |s| model.compartment_of(s).cloned(), options.dnf_cap, None)?;
        items.extend(clauses.into_iter().map(|c| (c, Some(r.id.clone()))));
    }
    LogicTheory::build(items)
}

/// The clause block of one reaction. With `tag` set, every clause carries that
/// provenance instead of its structural one.
pub(crate) fn reaction_clauses(
    r: &Reaction,
    compartment_of: impl Fn(&SpeciesId) -> Option<CompartmentId>,
    dnf_cap: usize,
    tag: Option<Provenance>,
) -> Result<Vec<HornClause>, CompileError> {
    let dnf =
        gpr_to_dnf(r.gpr.as_ref(), dnf_cap).map_err(|e| CompileError::DnfCap { reaction: r.id.clone(), cap: e.cap })?;
    let met = |s: &SpeciesId| -> Result<Atom, CompileError> {
        let c = compartment_of(s).ok_or_else(|| CompileError::UnknownSpecies(s.clone()))?;
        Ok(Atom::Met { species: s.clone(), compartment: c })
    };
    let tagged = |p: Provenance| tag.unwrap_or(p);
    let enzymatic = matches!(dnf, Dnf::Disjuncts(_));

    let mut out = Vec::new();
    let mut directions = vec![(Direction::Fwd, &r.substrates, &r.products)];
    if r.reversible {
        directions.push((Direction::Rev, &r.products, &r.substrates));
    }
    for (d, inputs, outputs) in directions {
        let act = Atom::act(r.id.clone(), d);
        let mut body = inputs.iter().map(|e| met(&e.species)).collect::<Result<Vec<_>, _>>()?;
        if enzymatic {
            body.push(Atom::enz(r.id.clone()));
        }
        out.push(HornClause::new(tagged(Provenance::Activation), act.clone(), body));
        for p in outputs {
            out.push(HornClause::new(tagged(Provenance::Product), met(&p.species)?, [act.clone()]));
        }
    }
    for (i, genes) in dnf.disjuncts().iter().enumerate() {
        let iso = Atom::iso(r.id.clone(), i as u32);
        out.push(HornClause::new(tagged(Provenance::Enzyme), Atom::enz(r.id.clone()), [iso.clone()]));
        out.push(HornClause::new(tagged(Provenance::Isoenzyme), iso, genes.iter().map(|g| Atom::gn(g.clone()))));
    }
    Ok(out)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("unknown species `{0}`")]
    UnknownSpecies(SpeciesId),
    #[error("medium species `{0}` is not an exchange species")]
    NotExchange(SpeciesId),
    #[error("unknown gene `{0}`")]
    UnknownGene(GeneId),
}

/// Ground facts for one experiment: `met(s,e)` for each medium species and
/// `gn(g)` for every gene that is not knocked out.
pub fn facts_for_query(
    model: &MetabolicModel,
    medium: &BTreeSet<SpeciesId>,
    knockouts: &BTreeSet<GeneId>,
) -> Result<Vec<HornClause>, QueryError> {
    check_query(model, medium, knockouts)?;
    let mut facts = medium_facts(model, medium);
    facts.extend(
        model
            .genes
            .iter()
            .filter(|g| !knockouts.contains(*g))
            .map(|g| HornClause::fact(Provenance::Genotype, Atom::gn(g.clone()))),
    );
    Ok(facts)
}

pub(crate) fn check_query(
    model: &MetabolicModel,
    medium: &BTreeSet<SpeciesId>,
    knockouts: &BTreeSet<GeneId>,
) -> Result<(), QueryError> {
    for s in medium {
        if !model.species.contains_key(s) {
            return Err(QueryError::UnknownSpecies(s.clone()));
        }
        if !model.exchange_species.contains(s) {
            return Err(QueryError::NotExchange(s.clone()));
        }
    }
    if let Some(g) = knockouts.iter().find(|g| !model.genes.contains(*g)) {
        return Err(QueryError::UnknownGene(g.clone()));
    }
    Ok(())
}

pub(crate) fn medium_facts(model: &MetabolicModel, medium: &BTreeSet<SpeciesId>) -> Vec<HornClause> {
    medium
        .iter()
        .map(|s| HornClause::fact(Provenance::Medium, Atom::met(s.clone(), model.species[s].compartment.clone())))
        .collect()
}

/// Atoms whose joint derivation means growth.
pub fn goal_atoms(model: &MetabolicModel) -> Vec<Atom> {
    model.biomass_goal.iter().filter_map(|s| model.compartment_of(s).map(|c| Atom::met(s.clone(), c.clone()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::gpr::GprExpr;

    #[test]
    fn r0889_has_nine_clauses() {
        let t = compile(&fixtures::r0889()).unwrap();
        assert_eq!(t.len(), 9);
        let stats = t.stats();
        assert_eq!((stats.activation, stats.enzyme, stats.isoenzyme, stats.product), (1, 2, 2, 4));
        let act = t.clauses().find(|c| c.provenance == Provenance::Activation).unwrap();
        assert_eq!(act.head, Atom::act("r0889", Direction::Fwd));
        assert_eq!(act.body, vec![Atom::met("s0340", "c"), Atom::met("s1207", "c"), Atom::enz("r0889")]);
    }

    #[test]
    fn spontaneous_reaction_has_no_enzyme_atoms() {
        let mut m = MetabolicModel::empty("sp");
        m.add_compartment("c", None);
        m.add_species("A", "c");
        m.add_species("B", "c");
        m.add_reaction(Reaction::new("s", &["A"], &["B"], false, None));
        m.biomass_goal.insert("B".into());
        let t = compile(&m).unwrap();
        let clauses: Vec<_> = t.clauses().map(|c| c.to_string()).collect();
        assert_eq!(clauses, ["act(s,fwd) <- met(A,c)", "met(B,c) <- act(s,fwd)"]);
    }

    #[test]
    fn reversible_single_gene_reaction() {
        let mut m = MetabolicModel::empty("rev");
        m.add_compartment("c", None);
        m.add_species("A", "c");
        m.add_species("B", "c");
        m.genes.insert("g".into());
        m.add_reaction(Reaction::new("r", &["A"], &["B"], true, Some(GprExpr::gene("g"))));
        m.biomass_goal.insert("B".into());
        let s = compile(&m).unwrap().stats();
        assert_eq!((s.activation, s.enzyme, s.isoenzyme, s.product), (2, 1, 1, 2));
    }

    #[test]
    fn toy5_stats() {
        let s = compile(&fixtures::toy5()).unwrap().stats();
        assert_eq!((s.activation, s.enzyme, s.isoenzyme, s.product), (4, 4, 4, 4));
        assert_eq!(s.atoms, 21);
        assert_eq!(s.to_string(), "ACT=4 ENZ=4 ISO=4 PROD=4");
    }

    #[test]
    fn empty_model_stats() {
        let mut m = fixtures::toy5();
        m.reactions.clear();
        assert_eq!(compile(&m).unwrap().stats(), TheoryStats::default());
    }

    #[test]
    fn exchange_reactions_are_not_encoded() {
        let t = compile(&fixtures::chain3()).unwrap();
        assert!(t.clauses().all(|c| c.head.reaction().map(|r| r.as_str()) != Some("ex_A")));
    }

    #[test]
    fn invalid_model_is_rejected() {
        let mut m = fixtures::toy5();
        m.reactions.get_mut(&ReactionId::from("r1")).unwrap().lower_bound = -1.0;
        assert!(matches!(compile(&m), Err(CompileError::Invalid(d)) if d.len() == 1));
    }

    #[test]
    fn dnf_cap_propagates() {
        let mut m = fixtures::toy5();
        let e = GprExpr::And(vec![
            GprExpr::Or(vec![GprExpr::gene("g1"), GprExpr::gene("g2")]),
            GprExpr::Or(vec![GprExpr::gene("g3"), GprExpr::gene("g4")]),
        ]);
        m.reactions.get_mut(&ReactionId::from("r1")).unwrap().gpr = Some(e);
        let err = compile_with(&m, &CompileOptions { dnf_cap: 3 }).unwrap_err();
        assert_eq!(err, CompileError::DnfCap { reaction: "r1".into(), cap: 3 });
    }

    #[test]
    fn facts_for_toy5() {
        let m = fixtures::toy5();
        let medium = BTreeSet::from(["A_e".into()]);
        let facts = facts_for_query(&m, &medium, &BTreeSet::new()).unwrap();
        assert_eq!(facts.iter().filter(|f| f.provenance == Provenance::Medium).count(), 1);
        assert_eq!(facts.iter().filter(|f| f.provenance == Provenance::Genotype).count(), 5);

        let all = m.genes.clone();
        assert!(facts_for_query(&m, &medium, &all).unwrap().iter().all(|f| f.provenance == Provenance::Medium));
        assert!(facts_for_query(&m, &BTreeSet::new(), &BTreeSet::new())
            .unwrap()
            .iter()
            .all(|f| f.provenance == Provenance::Genotype));
    }

    #[test]
    fn facts_reject_bad_ids() {
        let m = fixtures::toy5();
        let none = BTreeSet::new();
        assert_eq!(
            facts_for_query(&m, &BTreeSet::from(["A_c".into()]), &none),
            Err(QueryError::NotExchange("A_c".into()))
        );
        assert_eq!(
            facts_for_query(&m, &BTreeSet::new(), &BTreeSet::from(["g9".into()])),
            Err(QueryError::UnknownGene("g9".into()))
        );
    }

    #[test]
    fn dump_lines() {
        let t = compile(&fixtures::r0889()).unwrap();
        let dump = t.dump();
        assert!(dump.starts_with("% ACTIVATION\nact(r0889,fwd) <- met(s0340,c), met(s1207,c), enz(r0889)\n"));
        assert_eq!(dump.lines().filter(|l| !l.starts_with('%')).count(), 9);
    }
}
