//! Small hand-built networks used throughout the tests, benches and docs.
//!
//! TOY-5 has five species, five genes and four reactions:
//!
//! ```text
//! tA : A_e -> A_c               gT
//! r1 : A_c -> B_c               g1 or g2
//! r2 : B_c -> C_c               g3 and g4
//! rB : B_c + C_c -> BIOMASS_c   (spontaneous)
//! ```
//!
//! with `A_e` the only exchange species and `BIOMASS_c` the growth goal.
//! CHAIN-3 is `ex_A: -> A` (uptake ≤ 10), `r1: A -> B` (gene `gR1`) and
//! `biomass: B ->` (objective), every other bound 100.

use crate::gpr::GprExpr;
use crate::model::{MetabolicModel, Reaction};

pub fn toy5() -> MetabolicModel {
    let mut m = MetabolicModel::empty("toy5");
    m.version = "1".into();
    m.add_compartment("c", Some("cytoplasm"));
    m.add_compartment("e", Some("extracellular"));
    for (s, c) in [("A_e", "e"), ("A_c", "c"), ("B_c", "c"), ("C_c", "c"), ("BIOMASS_c", "c")] {
        m.add_species(s, c);
    }
    for g in ["gT", "g1", "g2", "g3", "g4"] {
        m.genes.insert(g.into());
    }
    m.add_reaction(Reaction::new("tA", &["A_e"], &["A_c"], false, Some(GprExpr::gene("gT"))));
    m.add_reaction(Reaction::new(
        "r1",
        &["A_c"],
        &["B_c"],
        false,
        Some(GprExpr::Or(vec![GprExpr::gene("g1"), GprExpr::gene("g2")])),
    ));
    m.add_reaction(Reaction::new(
        "r2",
        &["B_c"],
        &["C_c"],
        false,
        Some(GprExpr::And(vec![GprExpr::gene("g3"), GprExpr::gene("g4")])),
    ));
    m.add_reaction(Reaction::new("rB", &["B_c", "C_c"], &["BIOMASS_c"], false, None));
    m.biomass_goal.insert("BIOMASS_c".into());
    m.exchange_species.insert("A_e".into());
    m
}

/// TOY-5 plus a spontaneous `bm_sink: BIOMASS_c ->` objective and an uptake
/// capacity of 10 on `tA`, so that FBA has a steady state to optimize.
pub fn toy5_with_bounds() -> MetabolicModel {
    let mut m = toy5();
    m.reactions.get_mut("tA").unwrap().upper_bound = 10.0;
    m.add_reaction(Reaction::new("bm_sink", &["BIOMASS_c"], &[], false, None));
    m.objective = Some("bm_sink".into());
    m
}

pub fn chain3() -> MetabolicModel {
    let mut m = MetabolicModel::empty("chain3");
    m.add_compartment("e", None);
    m.add_compartment("c", None);
    m.add_species("A", "e");
    m.add_species("B", "c");
    m.genes.insert("gR1".into());
    m.add_reaction(Reaction::new("ex_A", &[], &["A"], false, None).with_bounds(0.0, 10.0));
    m.add_reaction(Reaction::new("r1", &["A"], &["B"], false, Some(GprExpr::gene("gR1"))).with_bounds(0.0, 100.0));
    m.add_reaction(Reaction::new("biomass", &["B"], &[], false, None).with_bounds(0.0, 100.0));
    m.objective = Some("biomass".into());
    m.biomass_goal.insert("B".into());
    m.exchange_species.insert("A".into());
    m
}

/// A single irreversible reaction with two substrates, two isoenzymes (one of
/// them a two-gene complex) and four products.
pub fn r0889() -> MetabolicModel {
    let mut m = MetabolicModel::empty("r0889");
    m.add_compartment("c", Some("cytoplasm"));
    for s in ["s0340", "s1207", "s0394", "s0423", "s0456", "s1322"] {
        m.add_species(s, "c");
    }
    for g in ["YKL060C", "YDR050C", "YGR192C"] {
        m.genes.insert(g.into());
    }
    m.add_reaction(Reaction::new(
        "r0889",
        &["s0340", "s1207"],
        &["s0394", "s0423", "s0456", "s1322"],
        false,
        Some(GprExpr::Or(vec![
            GprExpr::gene("YKL060C"),
            GprExpr::And(vec![GprExpr::gene("YDR050C"), GprExpr::gene("YGR192C")]),
        ])),
    ));
    m.biomass_goal.insert("s0394".into());
    m
}

/// TOY-5 in SBML (no objective, so the goal must be supplied).
pub const TOY5_SBML: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<sbml xmlns="http://www.sbml.org/sbml/level3/version1/core" xmlns:fbc="http://www.sbml.org/sbml/level3/version1/fbc/version2" level="3" version="1" fbc:required="false">
  <model id="toy5" fbc:strict="true">
    <listOfCompartments>
      <compartment id="c" name="cytoplasm" constant="true"/>
      <compartment id="e" name="extracellular" constant="true"/>
    </listOfCompartments>
    <listOfSpecies>
      <species id="A_e" compartment="e" hasOnlySubstanceUnits="false" boundaryCondition="false" constant="false"/>
      <species id="A_c" compartment="c" hasOnlySubstanceUnits="false" boundaryCondition="false" constant="false"/>
      <species id="B_c" compartment="c" hasOnlySubstanceUnits="false" boundaryCondition="false" constant="false"/>
      <species id="C_c" compartment="c" hasOnlySubstanceUnits="false" boundaryCondition="false" constant="false"/>
      <species id="BIOMASS_c" compartment="c" hasOnlySubstanceUnits="false" boundaryCondition="false" constant="false"/>
    </listOfSpecies>
    <listOfParameters>
      <parameter id="zero" value="0" constant="true"/>
      <parameter id="default_ub" value="1000" constant="true"/>
    </listOfParameters>
    <listOfReactions>
      <reaction id="tA" reversible="false" fast="false" fbc:lowerFluxBound="zero" fbc:upperFluxBound="default_ub">
        <listOfReactants><speciesReference species="A_e" stoichiometry="1" constant="true"/></listOfReactants>
        <listOfProducts><speciesReference species="A_c" stoichiometry="1" constant="true"/></listOfProducts>
        <fbc:geneProductAssociation><fbc:geneProductRef fbc:geneProduct="gT"/></fbc:geneProductAssociation>
      </reaction>
      <reaction id="r1" reversible="false" fast="false" fbc:lowerFluxBound="zero" fbc:upperFluxBound="default_ub">
        <listOfReactants><speciesReference species="A_c" stoichiometry="1" constant="true"/></listOfReactants>
        <listOfProducts><speciesReference species="B_c" stoichiometry="1" constant="true"/></listOfProducts>
        <fbc:geneProductAssociation>
          <fbc:or>
            <fbc:geneProductRef fbc:geneProduct="g1"/>
            <fbc:geneProductRef fbc:geneProduct="g2"/>
          </fbc:or>
        </fbc:geneProductAssociation>
      </reaction>
      <reaction id="r2" reversible="false" fast="false" fbc:lowerFluxBound="zero" fbc:upperFluxBound="default_ub">
        <listOfReactants><speciesReference species="B_c" stoichiometry="1" constant="true"/></listOfReactants>
        <listOfProducts><speciesReference species="C_c" stoichiometry="1" constant="true"/></listOfProducts>
        <fbc:geneProductAssociation>
          <fbc:and>
            <fbc:geneProductRef fbc:geneProduct="g3"/>
            <fbc:geneProductRef fbc:geneProduct="g4"/>
          </fbc:and>
        </fbc:geneProductAssociation>
      </reaction>
      <reaction id="rB" reversible="false" fast="false">
        <listOfReactants>
          <speciesReference species="B_c" stoichiometry="1" constant="true"/>
          <speciesReference species="C_c" constant="true"/>
        </listOfReactants>
        <listOfProducts><speciesReference species="BIOMASS_c" stoichiometry="1" constant="true"/></listOfProducts>
      </reaction>
    </listOfReactions>
    <fbc:listOfGeneProducts>
      <fbc:geneProduct fbc:id="gT" fbc:label="gT"/>
      <fbc:geneProduct fbc:id="g1" fbc:label="g1"/>
      <fbc:geneProduct fbc:id="g2" fbc:label="g2"/>
      <fbc:geneProduct fbc:id="g3" fbc:label="g3"/>
      <fbc:geneProduct fbc:id="g4" fbc:label="g4"/>
    </fbc:listOfGeneProducts>
  </model>
</sbml>
"#;

/// CHAIN-3 in SBML; the goal comes from the objective reaction's substrates.
pub const CHAIN3_SBML: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<sbml xmlns="http://www.sbml.org/sbml/level3/version1/core" xmlns:fbc="http://www.sbml.org/sbml/level3/version1/fbc/version2" level="3" version="1" fbc:required="false">
  <model id="chain3">
    <listOfCompartments>
      <compartment id="e" constant="true"/>
      <compartment id="c" constant="true"/>
    </listOfCompartments>
    <listOfSpecies>
      <species id="A" compartment="e" constant="false"/>
      <species id="B" compartment="c" constant="false"/>
    </listOfSpecies>
    <listOfParameters>
      <parameter id="zero" value="0" constant="true"/>
      <parameter id="ten" value="10" constant="true"/>
      <parameter id="hundred" value="100" constant="true"/>
    </listOfParameters>
    <listOfReactions>
      <reaction id="ex_A" reversible="false" fbc:lowerFluxBound="zero" fbc:upperFluxBound="ten">
        <listOfProducts><speciesReference species="A" stoichiometry="1" constant="true"/></listOfProducts>
      </reaction>
      <reaction id="r1" reversible="false" fbc:lowerFluxBound="zero" fbc:upperFluxBound="hundred">
        <listOfReactants><speciesReference species="A" stoichiometry="1" constant="true"/></listOfReactants>
        <listOfProducts><speciesReference species="B" stoichiometry="1" constant="true"/></listOfProducts>
        <fbc:geneProductAssociation><fbc:geneProductRef fbc:geneProduct="gR1"/></fbc:geneProductAssociation>
      </reaction>
      <reaction id="biomass" reversible="false" fbc:lowerFluxBound="zero" fbc:upperFluxBound="hundred">
        <listOfReactants><speciesReference species="B" stoichiometry="1" constant="true"/></listOfReactants>
      </reaction>
    </listOfReactions>
    <fbc:listOfObjectives fbc:activeObjective="obj">
      <fbc:objective fbc:id="obj" fbc:type="maximize">
        <fbc:listOfFluxObjectives>
          <fbc:fluxObjective fbc:reaction="biomass" fbc:coefficient="1"/>
        </fbc:listOfFluxObjectives>
      </fbc:objective>
    </fbc:listOfObjectives>
    <fbc:listOfGeneProducts>
      <fbc:geneProduct fbc:id="gR1"/>
    </fbc:listOfGeneProducts>
  </model>
</sbml>
"#;

pub const R0889_SBML: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<sbml xmlns="http://www.sbml.org/sbml/level3/version1/core" xmlns:fbc="http://www.sbml.org/sbml/level3/version1/fbc/version2" level="3" version="1" fbc:required="false">
  <model id="r0889">
    <listOfCompartments><compartment id="c" name="cytoplasm" constant="true"/></listOfCompartments>
    <listOfSpecies>
      <species id="s0340" compartment="c" constant="false"/>
      <species id="s1207" compartment="c" constant="false"/>
      <species id="s0394" compartment="c" constant="false"/>
      <species id="s0423" compartment="c" constant="false"/>
      <species id="s0456" compartment="c" constant="false"/>
      <species id="s1322" compartment="c" constant="false"/>
    </listOfSpecies>
    <listOfReactions>
      <reaction id="r0889" reversible="false">
        <listOfReactants>
          <speciesReference species="s0340" stoichiometry="1" constant="true"/>
          <speciesReference species="s1207" stoichiometry="1" constant="true"/>
        </listOfReactants>
        <listOfProducts>
          <speciesReference species="s0394" stoichiometry="1" constant="true"/>
          <speciesReference species="s0423" stoichiometry="1" constant="true"/>
          <speciesReference species="s0456" stoichiometry="1" constant="true"/>
          <speciesReference species="s1322" stoichiometry="1" constant="true"/>
        </listOfProducts>
        <fbc:geneProductAssociation>
          <fbc:or>
            <fbc:geneProductRef fbc:geneProduct="YKL060C"/>
            <fbc:and>
              <fbc:geneProductRef fbc:geneProduct="YDR050C"/>
              <fbc:geneProductRef fbc:geneProduct="YGR192C"/>
            </fbc:and>
          </fbc:or>
        </fbc:geneProductAssociation>
      </reaction>
    </listOfReactions>
    <fbc:listOfGeneProducts>
      <fbc:geneProduct fbc:id="YKL060C"/>
      <fbc:geneProduct fbc:id="YDR050C"/>
      <fbc:geneProduct fbc:id="YGR192C"/>
    </fbc:listOfGeneProducts>
  </model>
</sbml>
"#;
