//! Native model format: one JSON document with the keys `model_id`, `version`,
//! `compartments`, `species`, `reactions`, `genes`, `biomass_goal`,
//! `exchange_species` and an optional `objective`.
//!
//! ```json
//! {
//!   "model_id": "toy5",
//!   "version": "1",
//!   "compartments": [{ "id": "c", "name": "cytoplasm" }],
//!   "species": [{ "id": "A_c", "compartment": "c", "name": null }],
//!   "reactions": [{
//!     "id": "r1",
//!     "substrates": [{ "species": "A_c", "coefficient": 1.0 }],
//!     "products": [{ "species": "B_c", "coefficient": 1.0 }],
//!     "reversible": false,
//!     "gpr": "g1 or g2",
//!     "lower_bound": 0.0,
//!     "upper_bound": 1000.0
//!   }],
//!   "genes": ["g1", "g2"],
//!   "biomass_goal": ["B_c"],
//!   "exchange_species": []
//! }
//! ```
//!
//! `gpr` is the empty string for spontaneous reactions. Infinite bounds are the
//! strings `"inf"` / `"-inf"`. Unknown keys are rejected.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::ids::{GeneId, ReactionId, SpeciesId};
use crate::model::{check_references, Compartment, MetabolicModel, Reaction, Species};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NativeDoc {
    model_id: String,
    #[serde(default)]
    version: String,
    compartments: Vec<Compartment>,
    species: Vec<Species>,
    reactions: Vec<Reaction>,
    genes: Vec<GeneId>,
    biomass_goal: Option<Vec<SpeciesId>>,
    #[serde(default)]
    exchange_species: Vec<SpeciesId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    objective: Option<ReactionId>,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> ParseError {
    ParseError::Native { path: path.into(), message: message.into() }
}

pub fn parse_native(document: &[u8]) -> Result<MetabolicModel, ParseError> {
    let de = &mut serde_json::Deserializer::from_slice(document);
    let doc: NativeDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })?;

    let biomass_goal = doc.biomass_goal.ok_or_else(|| schema("biomass_goal", "biomass goal required"))?;

    let mut model = MetabolicModel::empty(doc.model_id);
    model.version = doc.version;
    for (i, c) in doc.compartments.into_iter().enumerate() {
        if model.compartments.contains_key(&c.id) {
            return Err(schema(format!("compartments[{i}].id"), format!("duplicate compartment `{}`", c.id)));
        }
        model.compartments.insert(c.id.clone(), c);
    }
    for (i, s) in doc.species.into_iter().enumerate() {
        if model.species.contains_key(&s.id) {
            return Err(schema(format!("species[{i}].id"), format!("duplicate species `{}`", s.id)));
        }
        model.species.insert(s.id.clone(), s);
    }
    let mut reactions = BTreeMap::new();
    for (i, r) in doc.reactions.into_iter().enumerate() {
        if reactions.contains_key(&r.id) {
            return Err(schema(format!("reactions[{i}].id"), format!("duplicate reaction `{}`", r.id)));
        }
        reactions.insert(r.id.clone(), r);
    }
    model.reactions = reactions;
    for (i, g) in doc.genes.into_iter().enumerate() {
        if !model.genes.insert(g.clone()) {
            return Err(schema(format!("genes[{i}]"), format!("duplicate gene `{g}`")));
        }
    }
    model.biomass_goal = biomass_goal.into_iter().collect();
    model.exchange_species = doc.exchange_species.into_iter().collect();
    model.objective = doc.objective;

    check_references(&model).map_err(|(path, msg)| schema(path, msg))?;
    Ok(model)
}

/// Renders a model in the native format; entities appear in id order.
pub fn render_native(model: &MetabolicModel) -> String {
    let doc = NativeDoc {
        model_id: model.model_id.clone(),
        version: model.version.clone(),
        compartments: model.compartments.values().cloned().collect(),
        species: model.species.values().cloned().collect(),
        reactions: model.reactions.values().cloned().collect(),
        genes: model.genes.iter().cloned().collect(),
        biomass_goal: Some(model.biomass_goal.iter().cloned().collect()),
        exchange_species: model.exchange_species.iter().cloned().collect(),
        objective: model.objective.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("native document serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn round_trip_toy5() {
        let m = fixtures::toy5_with_bounds();
        let text = render_native(&m);
        assert_eq!(parse_native(text.as_bytes()).unwrap(), m);
    }

    #[test]
    fn infinite_bounds_survive() {
        let mut m = fixtures::chain3();
        let r = m.reactions.get_mut(&ReactionId::from("r1")).unwrap();
        r.reversible = true;
        r.lower_bound = f64::NEG_INFINITY;
        r.upper_bound = f64::INFINITY;
        let text = render_native(&m);
        assert!(text.contains("\"-inf\""));
        assert_eq!(parse_native(text.as_bytes()).unwrap(), m);
    }

    #[test]
    fn missing_goal_is_rejected() {
        let text = render_native(&fixtures::toy5());
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v.as_object_mut().unwrap().remove("biomass_goal");
        let err = parse_native(v.to_string().as_bytes()).unwrap_err();
        assert!(err.to_string().contains("biomass goal required"), "{err}");
    }

    #[test]
    fn schema_errors_carry_a_path() {
        let text = render_native(&fixtures::toy5());
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["reactions"][1]["reversible"] = serde_json::json!("yes");
        let err = parse_native(v.to_string().as_bytes()).unwrap_err();
        assert!(err.to_string().starts_with("reactions[1].reversible"), "{err}");
    }

    #[test]
    fn dangling_gene_is_a_parse_error() {
        let text = render_native(&fixtures::toy5());
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["reactions"][0]["gpr"] = serde_json::json!("g1 or g9");
        let err = parse_native(v.to_string().as_bytes()).unwrap_err();
        assert!(err.to_string().contains("g9"), "{err}");
    }
}
