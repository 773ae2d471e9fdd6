//! Reader for the SBML Level 3 core + FBC subset needed for structure, gene
//! rules, flux bounds and a single objective.
//!
//! Read: `listOfCompartments`, `listOfSpecies` (`id`, `compartment`, `name`),
//! `listOfParameters` (targets of `fbc:lowerFluxBound` / `fbc:upperFluxBound`),
//! `listOfReactions` with `listOfReactants` / `listOfProducts`
//! (`speciesReference`, `stoichiometry` defaulting to 1),
//! `fbc:geneProductAssociation` (nested `fbc:and`, `fbc:or`,
//! `fbc:geneProductRef`), `fbc:listOfGeneProducts`, and the active
//! `fbc:objective`.
//!
//! Kinetic laws, annotations, notes, units and other model-level lists are
//! skipped and reported as INFO diagnostics. Packages declared with
//! `required="true"` other than FBC are rejected.

use std::collections::{BTreeMap, HashMap};

use roxmltree::{Document, Node};

use crate::error::ParseError;
use crate::gpr::GprExpr;
use crate::ids::{GeneId, ReactionId, SpeciesId};
use crate::model::{check_references, Diagnostic, MetabolicModel, Reaction, StoichEntry, DEFAULT_FLUX_BOUND};

const FBC_NS_PREFIX: &str = "http://www.sbml.org/sbml/level3/version1/fbc";

#[derive(Clone, Debug)]
pub struct SbmlOptions {
    /// Biomass goal to use instead of the objective reaction's substrates.
    pub goal: Option<Vec<SpeciesId>>,
    /// Version string recorded on the model (SBML has no slot for it).
    pub version: Option<String>,
    /// Species in this compartment become the model's exchange species.
    pub extracellular: String,
}

impl Default for SbmlOptions {
    fn default() -> Self {
        Self { goal: None, version: None, extracellular: "e".into() }
    }
}

#[derive(Clone, Debug)]
pub struct SbmlImport {
    pub model: MetabolicModel,
    /// INFO diagnostics for constructs that were read but ignored.
    pub diagnostics: Vec<Diagnostic>,
}

pub fn parse_sbml(document: &[u8], options: &SbmlOptions) -> Result<SbmlImport, ParseError> {
    let text = std::str::from_utf8(document).map_err(|e| ParseError::Sbml {
        line: 0,
        element: "document".into(),
        message: format!("not UTF-8: {e}"),
    })?;
    let doc = Document::parse(text).map_err(|e| ParseError::Sbml {
        line: e.pos().row,
        element: "document".into(),
        message: format!("malformed XML: {e}"),
    })?;
    Reader { doc: &doc, ignored: BTreeMap::new() }.read(options)
}

struct Reader<'a, 'input> {
    doc: &'a Document<'input>,
    ignored: BTreeMap<String, usize>,
}

fn is_fbc(node: &Node<'_, '_>) -> bool {
    node.tag_name().namespace().is_some_and(|ns| ns.starts_with(FBC_NS_PREFIX))
}

fn fbc_attr<'a>(node: &Node<'a, '_>, name: &str) -> Option<&'a str> {
    node.attributes()
        .find(|a| a.name() == name && a.namespace().is_some_and(|ns| ns.starts_with(FBC_NS_PREFIX)))
        .map(|a| a.value())
}

fn elements<'a, 'input>(node: Node<'a, 'input>) -> impl Iterator<Item = Node<'a, 'input>> {
    node.children().filter(|n| n.is_element())
}

impl<'a, 'input> Reader<'a, 'input> {
    fn err(&self, node: &Node<'_, '_>, message: impl Into<String>) -> ParseError {
        ParseError::Sbml {
            line: self.doc.text_pos_at(node.range().start).row,
            element: node.tag_name().name().to_owned(),
            message: message.into(),
        }
    }

    fn req<'n>(&self, node: &Node<'n, '_>, attr: &str) -> Result<&'n str, ParseError> {
        node.attribute(attr).ok_or_else(|| self.err(node, format!("missing attribute `{attr}`")))
    }

    fn ignore(&mut self, node: &Node<'_, '_>) {
        *self.ignored.entry(node.tag_name().name().to_owned()).or_default() += 1;
    }

    fn read(mut self, options: &SbmlOptions) -> Result<SbmlImport, ParseError> {
        let root = self.doc.root_element();
        if root.tag_name().name() != "sbml" {
            return Err(self.err(&root, "root element is not <sbml>"));
        }
        if root.attribute("level") != Some("3") {
            return Err(self.err(&root, "only SBML Level 3 is supported"));
        }
        for a in root.attributes() {
            if a.name() == "required" && a.value() == "true" {
                let ns = a.namespace().unwrap_or_default();
                if !ns.starts_with(FBC_NS_PREFIX) {
                    return Err(self.err(&root, format!("required package `{ns}` is not supported")));
                }
            }
        }
        let model_node = elements(root)
            .find(|n| n.tag_name().name() == "model")
            .ok_or_else(|| self.err(&root, "no <model> element"))?;

        let model_id = model_node.attribute("id").unwrap_or_default().to_owned();
        let mut model = MetabolicModel::empty(model_id);
        model.version = options.version.clone().unwrap_or_default();

        // Gene products and parameters are referenced from reactions but may be
        // listed after them.
        let mut gene_products: HashMap<String, GeneId> = HashMap::new();
        let mut parameters: HashMap<String, f64> = HashMap::new();
        for list in elements(model_node) {
            match (list.tag_name().name(), is_fbc(&list)) {
                ("listOfGeneProducts", true) => {
                    for gp in elements(list) {
                        if gp.tag_name().name() != "geneProduct" {
                            self.ignore(&gp);
                            continue;
                        }
                        let id = fbc_attr(&gp, "id").ok_or_else(|| self.err(&gp, "missing attribute `fbc:id`"))?;
                        let gene = GeneId::from(id);
                        if !model.genes.insert(gene.clone()) {
                            return Err(self.err(&gp, format!("duplicate gene product `{id}`")));
                        }
                        gene_products.insert(id.to_owned(), gene);
                    }
                }
                ("listOfParameters", false) => {
                    for p in elements(list) {
                        if p.tag_name().name() != "parameter" {
                            self.ignore(&p);
                            continue;
                        }
                        let id = self.req(&p, "id")?;
                        let value = self.req(&p, "value")?;
                        let value =
                            parse_double(value).ok_or_else(|| self.err(&p, format!("invalid value `{value}`")))?;
                        parameters.insert(id.to_owned(), value);
                    }
                }
                _ => {}
            }
        }

        let mut objective_node = None;
        for list in elements(model_node) {
            match (list.tag_name().name(), is_fbc(&list)) {
                ("listOfCompartments", false) => {
                    for c in elements(list) {
                        if c.tag_name().name() != "compartment" {
                            self.ignore(&c);
                            continue;
                        }
                        let id = self.req(&c, "id")?;
                        if model.compartments.contains_key(id) {
                            return Err(self.err(&c, format!("duplicate compartment `{id}`")));
                        }
                        model.add_compartment(id, c.attribute("name"));
                    }
                }
                ("listOfSpecies", false) => {
                    for s in elements(list) {
                        if s.tag_name().name() != "species" {
                            self.ignore(&s);
                            continue;
                        }
                        let id = self.req(&s, "id")?;
                        let compartment = self.req(&s, "compartment")?;
                        if model.species.contains_key(id) {
                            return Err(self.err(&s, format!("duplicate species `{id}`")));
                        }
                        model.add_species(id, compartment);
                        if let Some(name) = s.attribute("name") {
                            model.species.get_mut(id).unwrap().name = Some(name.to_owned());
                        }
                    }
                }
                ("listOfReactions", false) => {
                    for r in elements(list) {
                        if r.tag_name().name() != "reaction" {
                            self.ignore(&r);
                            continue;
                        }
                        let reaction = self.reaction(r, &gene_products, &parameters)?;
                        if model.reactions.contains_key(&reaction.id) {
                            return Err(self.err(&r, format!("duplicate reaction `{}`", reaction.id)));
                        }
                        model.add_reaction(reaction);
                    }
                }
                ("listOfObjectives", true) => objective_node = Some(list),
                ("listOfGeneProducts", true) | ("listOfParameters", false) => {}
                _ => self.ignore(&list),
            }
        }

        if let Some(list) = objective_node {
            model.objective = self.objective(list)?;
        }

        for s in model.species.values() {
            if s.compartment.as_str() == options.extracellular {
                model.exchange_species.insert(s.id.clone());
            }
        }

        model.biomass_goal = match (&options.goal, &model.objective) {
            (Some(goal), _) => goal.iter().cloned().collect(),
            (None, Some(obj)) => match model.reactions.get(obj) {
                Some(r) => r.substrate_ids().cloned().collect(),
                None => Default::default(),
            },
            (None, None) => Default::default(),
        };

        check_references(&model).map_err(|(path, msg)| ParseError::Sbml { line: 0, element: path, message: msg })?;

        let diagnostics = self
            .ignored
            .iter()
            .map(|(name, n)| Diagnostic::info(&model.model_id, format!("ignored {n} <{name}> element(s)")))
            .collect();
        Ok(SbmlImport { model, diagnostics })
    }

    fn reaction(
        &mut self,
        node: Node<'a, 'input>,
        gene_products: &HashMap<String, GeneId>,
        parameters: &HashMap<String, f64>,
    ) -> Result<Reaction, ParseError> {
        let id = self.req(&node, "id")?;
        let reversible = match node.attribute("reversible") {
            None | Some("false") | Some("0") => false,
            Some("true") | Some("1") => true,
            Some(other) => return Err(self.err(&node, format!("invalid reversible flag `{other}`"))),
        };
        let bound = |attr: &str, default: f64| -> Result<f64, ParseError> {
            match fbc_attr(&node, attr) {
                None => Ok(default),
                Some(p) => parameters
                    .get(p)
                    .copied()
                    .ok_or_else(|| self.err(&node, format!("`fbc:{attr}` cites undeclared parameter `{p}`"))),
            }
        };
        let lower = bound("lowerFluxBound", if reversible { -DEFAULT_FLUX_BOUND } else { 0.0 })?;
        let upper = bound("upperFluxBound", DEFAULT_FLUX_BOUND)?;

        let mut substrates = Vec::new();
        let mut products = Vec::new();
        let mut gpr = None;
        for child in elements(node) {
            match (child.tag_name().name(), is_fbc(&child)) {
                ("listOfReactants", false) => substrates = self.species_refs(child)?,
                ("listOfProducts", false) => products = self.species_refs(child)?,
                ("geneProductAssociation", true) => {
                    let mut inner = elements(child);
                    let (Some(first), None) = (inner.next(), inner.next()) else {
                        return Err(self.err(&child, "expected exactly one association element"));
                    };
                    gpr = Some(self.association(first, gene_products)?);
                }
                _ => self.ignore(&child),
            }
        }
        Ok(Reaction {
            id: ReactionId::from(id),
            substrates,
            products,
            reversible,
            gpr,
            lower_bound: lower,
            upper_bound: upper,
        })
    }

    fn species_refs(&mut self, list: Node<'_, '_>) -> Result<Vec<StoichEntry>, ParseError> {
        let mut out = Vec::new();
        for sr in elements(list) {
            if sr.tag_name().name() != "speciesReference" {
                self.ignore(&sr);
                continue;
            }
            let species = self.req(&sr, "species")?;
            let coefficient = match sr.attribute("stoichiometry") {
                None => 1.0,
                Some(v) => parse_double(v).ok_or_else(|| self.err(&sr, format!("invalid stoichiometry `{v}`")))?,
            };
            out.push(StoichEntry::new(species, coefficient));
        }
        Ok(out)
    }

    fn association(&self, node: Node<'_, '_>, gene_products: &HashMap<String, GeneId>) -> Result<GprExpr, ParseError> {
        if !is_fbc(&node) {
            return Err(self.err(&node, "unsupported element in gene association"));
        }
        match node.tag_name().name() {
            "geneProductRef" => {
                let gp = fbc_attr(&node, "geneProduct")
                    .ok_or_else(|| self.err(&node, "missing attribute `fbc:geneProduct`"))?;
                gene_products
                    .get(gp)
                    .cloned()
                    .map(GprExpr::Gene)
                    .ok_or_else(|| self.err(&node, format!("undeclared gene product `{gp}`")))
            }
            op @ ("and" | "or") => {
                let mut operands =
                    elements(node).map(|c| self.association(c, gene_products)).collect::<Result<Vec<_>, _>>()?;
                match operands.len() {
                    0 => Err(self.err(&node, format!("empty <fbc:{op}>"))),
                    1 => Ok(operands.pop().unwrap()),
                    _ if op == "and" => Ok(GprExpr::And(operands)),
                    _ => Ok(GprExpr::Or(operands)),
                }
            }
            other => Err(self.err(&node, format!("unsupported gene association element <{other}>"))),
        }
    }

    fn objective(&self, list: Node<'_, '_>) -> Result<Option<ReactionId>, ParseError> {
        let objectives: Vec<_> = elements(list).filter(|n| n.tag_name().name() == "objective").collect();
        let active = fbc_attr(&list, "activeObjective");
        let chosen = match active {
            Some(a) => objectives.iter().find(|o| fbc_attr(o, "id") == Some(a)),
            None if objectives.len() == 1 => objectives.first(),
            None if objectives.is_empty() => return Ok(None),
            None => return Err(self.err(&list, "several objectives and no `fbc:activeObjective`")),
        };
        let Some(obj) = chosen else {
            return Err(self.err(&list, format!("active objective `{}` not found", active.unwrap_or_default())));
        };
        if fbc_attr(obj, "type").is_some_and(|t| t != "maximize") {
            return Err(self.err(obj, "only maximization objectives are supported"));
        }
        let fluxes: Vec<_> =
            obj.descendants().filter(|n| n.is_element() && n.tag_name().name() == "fluxObjective").collect();
        match fluxes.as_slice() {
            [] => Ok(None),
            [single] => {
                let r =
                    fbc_attr(single, "reaction").ok_or_else(|| self.err(single, "missing attribute `fbc:reaction`"))?;
                Ok(Some(ReactionId::from(r)))
            }
            _ => Err(self.err(obj, "objectives over several reactions are not supported")),
        }
    }
}

/// Parses an XML Schema double, including `INF` / `-INF`.
fn parse_double(s: &str) -> Option<f64> {
    match s.trim() {
        "INF" | "+INF" => Some(f64::INFINITY),
        "-INF" => Some(f64::NEG_INFINITY),
        "NaN" => None,
        t => t.parse().ok(),
    }
}
