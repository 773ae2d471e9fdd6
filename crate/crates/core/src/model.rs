//! Metabolic model domain types and structural validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::gpr::{self, GprExpr};
use crate::ids::{CompartmentId, GeneId, ReactionId, SpeciesId};

/// Flux magnitude used when a bound is not given explicitly.
pub const DEFAULT_FLUX_BOUND: f64 = 1000.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Compartment {
    pub id: CompartmentId,
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub id: SpeciesId,
    pub compartment: CompartmentId,
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoichEntry {
    pub species: SpeciesId,
    pub coefficient: f64,
}

impl StoichEntry {
    pub fn new(species: impl Into<SpeciesId>, coefficient: f64) -> Self {
        Self { species: species.into(), coefficient }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reaction {
    pub id: ReactionId,
    pub substrates: Vec<StoichEntry>,
    pub products: Vec<StoichEntry>,
    pub reversible: bool,
    /// `None` marks a spontaneous reaction.
    #[serde(with = "gpr::optional_rule", default)]
    pub gpr: Option<GprExpr>,
    #[serde(with = "bound")]
    pub lower_bound: f64,
    #[serde(with = "bound")]
    pub upper_bound: f64,
}

impl Reaction {
    /// Builds a reaction with unit coefficients and default bounds.
    pub fn new(
        id: impl Into<ReactionId>,
        substrates: &[&str],
        products: &[&str],
        reversible: bool,
        gpr: Option<GprExpr>,
    ) -> Self {
        let lower = if reversible { -DEFAULT_FLUX_BOUND } else { 0.0 };
        Self {
            id: id.into(),
            substrates: substrates.iter().map(|s| StoichEntry::new(*s, 1.0)).collect(),
            products: products.iter().map(|s| StoichEntry::new(*s, 1.0)).collect(),
            reversible,
            gpr,
            lower_bound: lower,
            upper_bound: DEFAULT_FLUX_BOUND,
        }
    }

    pub fn with_bounds(mut self, lower: f64, upper: f64) -> Self {
        self.lower_bound = lower;
        self.upper_bound = upper;
        self
    }

    pub fn substrate_ids(&self) -> impl Iterator<Item = &SpeciesId> {
        self.substrates.iter().map(|e| &e.species)
    }

    pub fn product_ids(&self) -> impl Iterator<Item = &SpeciesId> {
        self.products.iter().map(|e| &e.species)
    }

    pub fn participants(&self) -> impl Iterator<Item = &SpeciesId> {
        self.substrate_ids().chain(self.product_ids())
    }

    /// True when the reaction can carry flux with the given genes knocked out.
    pub fn enabled_without(&self, knockouts: &BTreeSet<GeneId>) -> bool {
        self.gpr.as_ref().is_none_or(|e| e.eval(&|g| !knockouts.contains(g)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetabolicModel {
    pub model_id: String,
    pub version: String,
    pub compartments: BTreeMap<CompartmentId, Compartment>,
    pub species: BTreeMap<SpeciesId, Species>,
    pub reactions: BTreeMap<ReactionId, Reaction>,
    pub genes: BTreeSet<GeneId>,
    pub biomass_goal: BTreeSet<SpeciesId>,
    pub exchange_species: BTreeSet<SpeciesId>,
    /// Reaction whose flux FBA maximizes.
    pub objective: Option<ReactionId>,
}

impl MetabolicModel {
    /// A model with nothing in it; the base state for ledger replay.
    pub fn empty(model_id: impl Into<String>) -> Self {
        Self {
            model_id: model_id.into(),
            version: String::new(),
            compartments: BTreeMap::new(),
            species: BTreeMap::new(),
            reactions: BTreeMap::new(),
            genes: BTreeSet::new(),
            biomass_goal: BTreeSet::new(),
            exchange_species: BTreeSet::new(),
            objective: None,
        }
    }

    pub fn add_compartment(&mut self, id: &str, name: Option<&str>) {
        self.compartments.insert(id.into(), Compartment { id: id.into(), name: name.map(str::to_owned) });
    }

    pub fn add_species(&mut self, id: &str, compartment: &str) {
        self.species.insert(id.into(), Species { id: id.into(), compartment: compartment.into(), name: None });
    }

    pub fn add_reaction(&mut self, r: Reaction) {
        self.reactions.insert(r.id.clone(), r);
    }

    pub fn compartment_of(&self, s: &SpeciesId) -> Option<&CompartmentId> {
        self.species.get(s).map(|sp| &sp.compartment)
    }

    /// A reaction whose only participant is a single exchange species. Such
    /// reactions model medium uptake/secretion: FBA bounds them by the medium
    /// and the logic encoding replaces them by medium facts.
    pub fn is_exchange_reaction(&self, r: &Reaction) -> bool {
        let mut it = r.participants();
        match (it.next(), it.next()) {
            (Some(s), None) => self.exchange_species.contains(s),
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub entity: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(entity: impl Into<String>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, entity: entity.into(), message: message.into() }
    }

    pub fn warning(entity: impl Into<String>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, entity: entity.into(), message: message.into() }
    }

    pub fn info(entity: impl Into<String>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Info, entity: entity.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Info => "INFO",
            Severity::Warning => "WARNING",
            Severity::Error => "ERROR",
        };
        write!(f, "{sev} [{}] {}", self.entity, self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

/// First unresolved cross-reference, as `(location, message)`. Parsers reject
/// these outright; the remaining invariants are left to [`validate`].
pub(crate) fn check_references(model: &MetabolicModel) -> Result<(), (String, String)> {
    for s in model.species.values() {
        if !model.compartments.contains_key(&s.compartment) {
            return Err((format!("species {}", s.id), format!("unknown compartment `{}`", s.compartment)));
        }
    }
    for r in model.reactions.values() {
        for s in r.participants() {
            if !model.species.contains_key(s) {
                return Err((format!("reaction {}", r.id), format!("undeclared species `{s}`")));
            }
        }
        if let Some(rule) = &r.gpr {
            if let Some(g) = rule.genes().into_iter().find(|g| !model.genes.contains(g)) {
                return Err((format!("reaction {}", r.id), format!("undeclared gene `{g}`")));
            }
        }
    }
    for (what, set) in [("biomass_goal", &model.biomass_goal), ("exchange_species", &model.exchange_species)] {
        if let Some(s) = set.iter().find(|s| !model.species.contains_key(*s)) {
            return Err((what.to_owned(), format!("undeclared species `{s}`")));
        }
    }
    if let Some(obj) = &model.objective {
        if !model.reactions.contains_key(obj) {
            return Err(("objective".to_owned(), format!("undeclared reaction `{obj}`")));
        }
    }
    Ok(())
}

/// Checks every structural invariant. The result is empty iff the model is valid.
pub fn validate(model: &MetabolicModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let m = &model.model_id;

    if model.model_id.is_empty() {
        out.push(Diagnostic::error("model", "model id is empty"));
    }
    if model.compartments.is_empty() {
        out.push(Diagnostic::error(m, "model declares no compartments"));
    }
    for (id, c) in &model.compartments {
        if id.as_str().is_empty() {
            out.push(Diagnostic::error(m, "empty compartment id"));
        }
        if &c.id != id {
            out.push(Diagnostic::error(id.as_str(), format!("compartment keyed as `{id}` carries id `{}`", c.id)));
        }
    }
    for (id, s) in &model.species {
        if id.as_str().is_empty() {
            out.push(Diagnostic::error(m, "empty species id"));
        }
        if &s.id != id {
            out.push(Diagnostic::error(id.as_str(), format!("species keyed as `{id}` carries id `{}`", s.id)));
        }
        if !model.compartments.contains_key(&s.compartment) {
            out.push(Diagnostic::error(id.as_str(), format!("unknown compartment `{}`", s.compartment)));
        }
    }
    for g in &model.genes {
        if g.as_str().is_empty() {
            out.push(Diagnostic::error(m, "empty gene id"));
        }
    }
    for (id, r) in &model.reactions {
        validate_reaction(model, id, r, &mut out);
    }

    if model.biomass_goal.is_empty() {
        out.push(Diagnostic::error(m, "biomass goal required"));
    }
    for s in &model.biomass_goal {
        if !model.species.contains_key(s) {
            out.push(Diagnostic::error(s.as_str(), "biomass goal species is not declared"));
        }
    }
    let mut exchange_compartments = BTreeSet::new();
    for s in &model.exchange_species {
        match model.species.get(s) {
            None => out.push(Diagnostic::error(s.as_str(), "exchange species is not declared")),
            Some(sp) => {
                exchange_compartments.insert(&sp.compartment);
            }
        }
    }
    if exchange_compartments.len() > 1 {
        let list: Vec<_> = exchange_compartments.iter().map(|c| c.as_str()).collect();
        out.push(Diagnostic::error(m, format!("exchange species span several compartments: {}", list.join(", "))));
    }
    if let Some(obj) = &model.objective {
        if !model.reactions.contains_key(obj) {
            out.push(Diagnostic::error(obj.as_str(), "objective reaction is not declared"));
        }
    }
    out
}

fn validate_reaction(model: &MetabolicModel, id: &ReactionId, r: &Reaction, out: &mut Vec<Diagnostic>) {
    let e = id.as_str();
    if e.is_empty() {
        out.push(Diagnostic::error(&model.model_id, "empty reaction id"));
    }
    if &r.id != id {
        out.push(Diagnostic::error(e, format!("reaction keyed as `{id}` carries id `{}`", r.id)));
    }
    let mut seen = BTreeSet::new();
    for entry in r.substrates.iter().chain(&r.products) {
        if !model.species.contains_key(&entry.species) {
            out.push(Diagnostic::error(e, format!("undeclared species `{}`", entry.species)));
        }
        if !(entry.coefficient > 0.0 && entry.coefficient.is_finite()) {
            out.push(Diagnostic::error(
                e,
                format!("coefficient of `{}` must be finite and positive, got {}", entry.species, entry.coefficient),
            ));
        }
        if !seen.insert(&entry.species) {
            out.push(Diagnostic::error(e, format!("species `{}` listed more than once", entry.species)));
        }
    }
    if r.lower_bound.is_nan() || r.upper_bound.is_nan() {
        out.push(Diagnostic::error(e, "flux bound is NaN"));
    } else if r.lower_bound > r.upper_bound {
        out.push(Diagnostic::error(e, format!("lower bound {} exceeds upper bound {}", r.lower_bound, r.upper_bound)));
    }
    if !r.reversible && r.lower_bound < 0.0 {
        out.push(Diagnostic::error(e, format!("irreversible reaction has negative lower bound {}", r.lower_bound)));
    }
    if let Some(rule) = &r.gpr {
        for g in rule.genes() {
            if !model.genes.contains(&g) {
                out.push(Diagnostic::error(e, format!("gene rule cites undeclared gene `{g}`")));
            }
        }
        let mut arities = Vec::new();
        rule.operator_arities(&mut arities);
        if arities.iter().any(|&n| n < 2) {
            out.push(Diagnostic::error(e, "gene rule operator with fewer than two operands"));
        }
    }
}

/// Serde adapter for flux bounds; infinities are written as the strings
/// `"inf"` and `"-inf"` since JSON has no representation for them.
pub mod bound {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else if *v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Text(t) => match t.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(de::Error::custom(format!("invalid flux bound `{other}`"))),
            },
        }
    }
}
