//! Compilation laws and model round trips on random models.

use std::collections::BTreeSet;

use gemlogic::gpr::DEFAULT_DNF_CAP;
use gemlogic::logic::{facts_for_query, Provenance};
use gemlogic::{compile, gpr_to_dnf, parse_native, render_native, saturate, validate, HornClause};
use gemlogic_testkit::{random_experiment, random_model, rng, ModelShape};
use proptest::prelude::*;

fn expected_clauses(model: &gemlogic::MetabolicModel) -> usize {
    model
        .reactions
        .values()
        .filter(|r| !model.is_exchange_reaction(r))
        .map(|r| {
            let k = gpr_to_dnf(r.gpr.as_ref(), DEFAULT_DNF_CAP).unwrap().disjuncts().len();
            let forward = 1 + r.products.len();
            let backward = if r.reversible { 1 + r.substrates.len() } else { 0 };
            forward + backward + 2 * k
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn clause_count_law(seed in any::<u64>()) {
        let model = random_model(&mut rng(seed), ModelShape::default());
        let theory = compile(&model).unwrap();
        prop_assert_eq!(theory.len(), expected_clauses(&model));
        prop_assert_eq!(theory.stats().count(Provenance::Isoenzyme), theory.stats().count(Provenance::Enzyme));
    }

    #[test]
    fn native_round_trip(seed in any::<u64>()) {
        let model = random_model(&mut rng(seed), ModelShape::default());
        let text = render_native(&model);
        let back = parse_native(text.as_bytes()).unwrap();
        prop_assert_eq!(&back, &model);
        prop_assert_eq!(render_native(&back), text);
        prop_assert!(validate(&back).is_empty());
    }

    #[test]
    fn saturation_is_monotone_and_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = random_model(&mut r, ModelShape::default());
        let theory = compile(&model).unwrap();
        let (medium, knockouts) = random_experiment(&mut r, &model);
        let facts = facts_for_query(&model, &medium, &knockouts).unwrap();
        let small = saturate(&theory, &facts).unwrap().to_set();

        let all_genes = facts_for_query(&model, &model.exchange_species, &BTreeSet::new()).unwrap();
        let large = saturate(&theory, &all_genes).unwrap().to_set();
        prop_assert!(small.is_subset(&large));

        let again: Vec<HornClause> =
            small.iter().map(|a| HornClause::fact(Provenance::Medium, a.clone())).collect();
        prop_assert_eq!(saturate(&theory, &again).unwrap().to_set(), small);
    }
}

#[test]
fn compiling_is_deterministic() {
    let model = random_model(&mut rng(11), ModelShape::default());
    assert_eq!(compile(&model).unwrap().dump(), compile(&model).unwrap().dump());
}
