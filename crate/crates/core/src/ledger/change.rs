use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::gpr::GprExpr;
use crate::ids::{GeneId, ReactionId, SpeciesId};
use crate::model::{bound, has_errors, validate, Compartment, Diagnostic, MetabolicModel, Reaction, Severity, Species};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verb {
    Add,
    Remove,
    Modify,
}

/// What a change item touches. The declaration order is the canonical order
/// of items produced by [`diff`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntityKind {
    ModelId,
    Version,
    Compartment,
    Species,
    Gene,
    Reaction,
    Gpr,
    Bounds,
    BiomassGoal,
    ExchangeSpecies,
    Objective,
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verb::Add => "ADD",
            Verb::Remove => "REMOVE",
            Verb::Modify => "MODIFY",
        })
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant serializes");
        f.write_str(s.as_str().expect("unit variant is a string"))
    }
}

/// One edit to a model.
///
/// Payloads are JSON values in the native model format: a full record for
/// compartments, species and reactions; a gene id for genes; a rule string
/// (`""` for none) for GPRs; `{"lower": .., "upper": ..}` for bounds; an id
/// array for the goal and exchange sets; an id or `null` for the objective; a
/// string for the version and model id.
///
/// `ADD GPR` ORs the payload into the reaction's rule as a new alternative and
/// `REMOVE GPR` takes out one such alternative; `MODIFY GPR` replaces the rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChangeItem {
    pub verb: Verb,
    pub kind: EntityKind,
    pub entity: String,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "present")]
    pub before: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "present")]
    pub after: Option<Value>,
}

/// A payload that is present, even as `null`, is `Some`; only an absent field
/// is `None`. Keeps `MODIFY OBJECTIVE` to "no objective" stable across a JSON
/// round trip.
fn present<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<Value>, D::Error> {
    Value::deserialize(d).map(Some)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    #[serde(with = "bound")]
    pub lower: f64,
    #[serde(with = "bound")]
    pub upper: f64,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("model types serialize to JSON")
}

fn rule_string(rule: Option<&GprExpr>) -> String {
    rule.map(|r| r.to_string()).unwrap_or_default()
}

impl ChangeItem {
    fn new(
        verb: Verb,
        kind: EntityKind,
        entity: impl Into<String>,
        before: Option<Value>,
        after: Option<Value>,
    ) -> Self {
        Self { verb, kind, entity: entity.into(), before, after }
    }

    pub fn add_reaction(r: &Reaction) -> Self {
        Self::new(Verb::Add, EntityKind::Reaction, r.id.as_str(), None, Some(to_value(r)))
    }

    pub fn remove_reaction(r: &Reaction) -> Self {
        Self::new(Verb::Remove, EntityKind::Reaction, r.id.as_str(), Some(to_value(r)), None)
    }

    pub fn modify_reaction(before: &Reaction, after: &Reaction) -> Self {
        Self::new(Verb::Modify, EntityKind::Reaction, before.id.as_str(), Some(to_value(before)), Some(to_value(after)))
    }

    pub fn add_species(s: &Species) -> Self {
        Self::new(Verb::Add, EntityKind::Species, s.id.as_str(), None, Some(to_value(s)))
    }

    pub fn add_gene(g: &GeneId) -> Self {
        Self::new(Verb::Add, EntityKind::Gene, g.as_str(), None, Some(to_value(g)))
    }

    /// Adds `alternative` as a new OR branch of the reaction's rule.
    pub fn add_gpr(reaction: &ReactionId, alternative: &GprExpr) -> Self {
        Self::new(Verb::Add, EntityKind::Gpr, reaction.as_str(), None, Some(Value::String(alternative.to_string())))
    }

    pub fn modify_gpr(reaction: &ReactionId, before: Option<&GprExpr>, after: Option<&GprExpr>) -> Self {
        Self::new(
            Verb::Modify,
            EntityKind::Gpr,
            reaction.as_str(),
            Some(Value::String(rule_string(before))),
            Some(Value::String(rule_string(after))),
        )
    }

    pub fn modify_bounds(reaction: &ReactionId, before: Bounds, after: Bounds) -> Self {
        Self::new(Verb::Modify, EntityKind::Bounds, reaction.as_str(), Some(to_value(&before)), Some(to_value(&after)))
    }

    pub fn modify_version(before: &str, after: &str) -> Self {
        Self::new(Verb::Modify, EntityKind::Version, "version", Some(before.into()), Some(after.into()))
    }

    fn check_shape(&self) -> Result<(), String> {
        let (needs_before, needs_after) = match self.verb {
            Verb::Add => (false, true),
            Verb::Remove => (true, false),
            Verb::Modify => (true, true),
        };
        if self.before.is_some() != needs_before || self.after.is_some() != needs_after {
            return Err(format!(
                "{} item must {}have a before payload and {}have an after payload",
                self.verb,
                if needs_before { "" } else { "not " },
                if needs_after { "" } else { "not " }
            ));
        }
        if self.verb == Verb::Modify && self.before == self.after {
            return Err("MODIFY item has identical before and after payloads".into());
        }
        let set_valued = matches!(
            self.kind,
            EntityKind::Bounds
                | EntityKind::BiomassGoal
                | EntityKind::ExchangeSpecies
                | EntityKind::Objective
                | EntityKind::Version
                | EntityKind::ModelId
        );
        if set_valued && self.verb != Verb::Modify {
            return Err(format!("{} only supports MODIFY", self.kind));
        }
        Ok(())
    }
}

impl fmt::Display for ChangeItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.verb, self.kind, self.entity)?;
        if let Some(b) = &self.before {
            write!(f, " before={b}")?;
        }
        if let Some(a) = &self.after {
            write!(f, " after={a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChangeError {
    #[error("change item {index} ({item}): {message}")]
    Item { index: usize, item: String, message: String },
    #[error("changeset leaves the model invalid:\n{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
}

fn decode<T: DeserializeOwned>(v: &Value, what: &str) -> Result<T, String> {
    serde_json::from_value(v.clone()).map_err(|e| format!("malformed {what} payload: {e}"))
}

fn expect_current<T: PartialEq + fmt::Debug>(current: &T, before: &T) -> Result<(), String> {
    if current == before {
        Ok(())
    } else {
        Err(format!("before payload does not match the current state {current:?}"))
    }
}

/// Applies `changeset` in order to a copy of `model`. Fails on the first item
/// that does not apply cleanly, or when the result does not validate.
pub fn apply_changeset(model: &MetabolicModel, changeset: &[ChangeItem]) -> Result<MetabolicModel, ChangeError> {
    let mut m = model.clone();
    for (index, item) in changeset.iter().enumerate() {
        apply_item(&mut m, item).map_err(|message| ChangeError::Item {
            index,
            item: format!("{} {} {}", item.verb, item.kind, item.entity),
            message,
        })?;
    }
    let diags = validate(&m);
    if has_errors(&diags) {
        return Err(ChangeError::Invalid(diags.into_iter().filter(|d| d.severity == Severity::Error).collect()));
    }
    Ok(m)
}

/// Inserts, removes or replaces an entry of an id-keyed map.
fn apply_keyed<K, T>(
    map: &mut BTreeMap<K, T>,
    key: K,
    item: &ChangeItem,
    what: &str,
    id_of: impl Fn(&T) -> &str,
) -> Result<(), String>
where
    K: Ord + fmt::Display,
    T: DeserializeOwned + PartialEq + fmt::Debug,
{
    let check_id = |t: &T| {
        if id_of(t) == item.entity {
            Ok(())
        } else {
            Err(format!("payload id `{}` differs from entity id", id_of(t)))
        }
    };
    match item.verb {
        Verb::Add => {
            let after: T = decode(item.after.as_ref().unwrap(), what)?;
            check_id(&after)?;
            if map.contains_key(&key) {
                return Err(format!("{what} `{key}` already exists"));
            }
            map.insert(key, after);
        }
        Verb::Remove | Verb::Modify => {
            let before: T = decode(item.before.as_ref().unwrap(), what)?;
            let current = map.get(&key).ok_or_else(|| format!("{what} `{key}` does not exist"))?;
            expect_current(current, &before)?;
            if item.verb == Verb::Remove {
                map.remove(&key);
            } else {
                let after: T = decode(item.after.as_ref().unwrap(), what)?;
                check_id(&after)?;
                map.insert(key, after);
            }
        }
    }
    Ok(())
}

fn parse_rule(v: &Value) -> Result<Option<GprExpr>, String> {
    let s: String = decode(v, "GPR")?;
    if s.trim().is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|e| format!("invalid gene rule `{s}`: {e}"))
}

fn apply_item(m: &mut MetabolicModel, item: &ChangeItem) -> Result<(), String> {
    item.check_shape()?;
    let before = item.before.as_ref();
    let after = item.after.as_ref();
    match item.kind {
        EntityKind::Compartment => {
            apply_keyed(&mut m.compartments, item.entity.as_str().into(), item, "compartment", |c: &Compartment| {
                c.id.as_str()
            })
        }
        EntityKind::Species => {
            apply_keyed(&mut m.species, item.entity.as_str().into(), item, "species", |s: &Species| s.id.as_str())
        }
        EntityKind::Reaction => {
            apply_keyed(&mut m.reactions, item.entity.as_str().into(), item, "reaction", |r: &Reaction| r.id.as_str())
        }
        EntityKind::Gene => {
            let gene = GeneId::from(item.entity.as_str());
            let payload: GeneId = decode(before.or(after).unwrap(), "gene")?;
            if payload != gene {
                return Err(format!("payload id `{payload}` differs from entity id"));
            }
            match item.verb {
                Verb::Add if !m.genes.insert(gene.clone()) => Err(format!("gene `{gene}` already exists")),
                Verb::Remove if !m.genes.remove(&gene) => Err(format!("gene `{gene}` does not exist")),
                Verb::Modify => Err("GENE does not support MODIFY".into()),
                _ => Ok(()),
            }
        }
        EntityKind::Gpr => {
            let r = m
                .reactions
                .get_mut(item.entity.as_str())
                .ok_or_else(|| format!("reaction `{}` does not exist", item.entity))?;
            match item.verb {
                Verb::Add => {
                    let alt = parse_rule(after.unwrap())?.ok_or("ADD GPR needs a non-empty rule")?;
                    r.gpr = Some(match r.gpr.take() {
                        None => alt,
                        Some(GprExpr::Or(mut alts)) => {
                            alts.push(alt);
                            GprExpr::Or(alts)
                        }
                        Some(e) => GprExpr::Or(vec![e, alt]),
                    });
                    Ok(())
                }
                Verb::Remove => {
                    let alt = parse_rule(before.unwrap())?.ok_or("REMOVE GPR needs a non-empty rule")?;
                    r.gpr = match r.gpr.take() {
                        Some(e) if e == alt => None,
                        Some(GprExpr::Or(mut alts)) => match alts.iter().position(|a| *a == alt) {
                            Some(i) => {
                                alts.remove(i);
                                Some(if alts.len() == 1 { alts.pop().unwrap() } else { GprExpr::Or(alts) })
                            }
                            None => {
                                r.gpr = Some(GprExpr::Or(alts));
                                return Err(format!("rule has no alternative `{alt}`"));
                            }
                        },
                        other => {
                            r.gpr = other;
                            return Err(format!("rule has no alternative `{alt}`"));
                        }
                    };
                    Ok(())
                }
                Verb::Modify => {
                    expect_current(&r.gpr, &parse_rule(before.unwrap())?)?;
                    r.gpr = parse_rule(after.unwrap())?;
                    Ok(())
                }
            }
        }
        EntityKind::Bounds => {
            let r = m
                .reactions
                .get_mut(item.entity.as_str())
                .ok_or_else(|| format!("reaction `{}` does not exist", item.entity))?;
            let b: Bounds = decode(before.unwrap(), "bounds")?;
            expect_current(&Bounds { lower: r.lower_bound, upper: r.upper_bound }, &b)?;
            let a: Bounds = decode(after.unwrap(), "bounds")?;
            r.lower_bound = a.lower;
            r.upper_bound = a.upper;
            Ok(())
        }
        EntityKind::BiomassGoal | EntityKind::ExchangeSpecies => {
            let set = if item.kind == EntityKind::BiomassGoal { &mut m.biomass_goal } else { &mut m.exchange_species };
            expect_current(set, &decode::<BTreeSet<SpeciesId>>(before.unwrap(), "species set")?)?;
            *set = decode(after.unwrap(), "species set")?;
            Ok(())
        }
        EntityKind::Objective => {
            expect_current(&m.objective, &decode::<Option<ReactionId>>(before.unwrap(), "objective")?)?;
            m.objective = decode(after.unwrap(), "objective")?;
            Ok(())
        }
        EntityKind::Version | EntityKind::ModelId => {
            let field = if item.kind == EntityKind::Version { &mut m.version } else { &mut m.model_id };
            expect_current(field, &decode::<String>(before.unwrap(), "string")?)?;
            *field = decode(after.unwrap(), "string")?;
            Ok(())
        }
    }
}

/// The canonical changeset turning `a` into `b`, ordered by entity kind and
/// then id. A reaction that differs only in its rule or only in its bounds
/// gets a `GPR` or `BOUNDS` item; any other difference replaces the reaction.
pub fn diff(a: &MetabolicModel, b: &MetabolicModel) -> Vec<ChangeItem> {
    let mut out = Vec::new();
    if a.model_id != b.model_id {
        out.push(ChangeItem::new(
            Verb::Modify,
            EntityKind::ModelId,
            "model_id",
            Some(to_value(&a.model_id)),
            Some(to_value(&b.model_id)),
        ));
    }
    if a.version != b.version {
        out.push(ChangeItem::modify_version(&a.version, &b.version));
    }
    diff_keyed(&a.compartments, &b.compartments, EntityKind::Compartment, &mut out);
    diff_keyed(&a.species, &b.species, EntityKind::Species, &mut out);
    for g in a.genes.difference(&b.genes) {
        out.push(ChangeItem::new(Verb::Remove, EntityKind::Gene, g.as_str(), Some(to_value(g)), None));
    }
    for g in b.genes.difference(&a.genes) {
        out.push(ChangeItem::add_gene(g));
    }
    let mut gpr = Vec::new();
    let mut bounds = Vec::new();
    let mut reactions = Vec::new();
    for (id, ra) in &a.reactions {
        match b.reactions.get(id) {
            None => reactions.push(ChangeItem::remove_reaction(ra)),
            Some(rb) if ra == rb => {}
            Some(rb) => {
                let mut same_but_rule = rb.clone();
                same_but_rule.gpr = ra.gpr.clone();
                let mut same_but_bounds = rb.clone();
                same_but_bounds.lower_bound = ra.lower_bound;
                same_but_bounds.upper_bound = ra.upper_bound;
                if same_but_rule == *ra {
                    gpr.push(ChangeItem::modify_gpr(id, ra.gpr.as_ref(), rb.gpr.as_ref()));
                } else if same_but_bounds == *ra {
                    bounds.push(ChangeItem::modify_bounds(
                        id,
                        Bounds { lower: ra.lower_bound, upper: ra.upper_bound },
                        Bounds { lower: rb.lower_bound, upper: rb.upper_bound },
                    ));
                } else {
                    reactions.push(ChangeItem::modify_reaction(ra, rb));
                }
            }
        }
    }
    reactions.extend(b.reactions.values().filter(|r| !a.reactions.contains_key(&r.id)).map(ChangeItem::add_reaction));
    reactions.sort_by(|x, y| x.entity.cmp(&y.entity));
    out.extend(reactions);
    out.extend(gpr);
    out.extend(bounds);
    for (kind, sa, sb) in [
        (EntityKind::BiomassGoal, &a.biomass_goal, &b.biomass_goal),
        (EntityKind::ExchangeSpecies, &a.exchange_species, &b.exchange_species),
    ] {
        if sa != sb {
            let entity = if kind == EntityKind::BiomassGoal { "biomass_goal" } else { "exchange_species" };
            out.push(ChangeItem::new(Verb::Modify, kind, entity, Some(to_value(sa)), Some(to_value(sb))));
        }
    }
    if a.objective != b.objective {
        out.push(ChangeItem::new(
            Verb::Modify,
            EntityKind::Objective,
            "objective",
            Some(to_value(&a.objective)),
            Some(to_value(&b.objective)),
        ));
    }
    out
}

fn diff_keyed<K: Ord + fmt::Display, T: PartialEq + Serialize>(
    a: &BTreeMap<K, T>,
    b: &BTreeMap<K, T>,
    kind: EntityKind,
    out: &mut Vec<ChangeItem>,
) {
    let mut items = Vec::new();
    for (k, va) in a {
        match b.get(k) {
            None => items.push(ChangeItem::new(Verb::Remove, kind, k.to_string(), Some(to_value(va)), None)),
            Some(vb) if va != vb => {
                items.push(ChangeItem::new(Verb::Modify, kind, k.to_string(), Some(to_value(va)), Some(to_value(vb))))
            }
            Some(_) => {}
        }
    }
    for (k, vb) in b {
        if !a.contains_key(k) {
            items.push(ChangeItem::new(Verb::Add, kind, k.to_string(), None, Some(to_value(vb))));
        }
    }
    items.sort_by(|x, y| x.entity.cmp(&y.entity));
    out.extend(items);
}
