//! LP solving against vertex enumeration, and FBA invariants on random models.

use std::collections::BTreeMap;

use gemlogic::fba::{build_lp, FEASIBILITY_TOLERANCE};
use gemlogic::ids::SpeciesId;
use gemlogic::{compile, fba, logic_constrained_fba, solve_lp, LpStatus};
use gemlogic_testkit::{random_experiment, random_lp, random_model, rng, vertex_enumeration_optimum, ModelShape};
use proptest::prelude::*;

const TOLERANCE: f64 = 1e-6;

fn small_shape() -> ModelShape {
    ModelShape { max_reactions: 7, internal_species: 5, exchange_species: 2, genes: 4 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_lps_match_vertex_enumeration(seed in any::<u64>()) {
        let lp = random_lp(&mut rng(seed), 6, 6);
        let solution = solve_lp(&lp);
        match vertex_enumeration_optimum(&lp) {
            Some(best) => {
                prop_assert_eq!(solution.status, LpStatus::Optimal);
                prop_assert!((solution.objective - best).abs() <= TOLERANCE, "{} vs {}", solution.objective, best);
                prop_assert!(solution.residual <= FEASIBILITY_TOLERANCE);
                prop_assert!(solution.bound_violation <= FEASIBILITY_TOLERANCE);
            }
            None => prop_assert_eq!(solution.status, LpStatus::Infeasible),
        }
    }

    #[test]
    fn small_fba_matches_vertex_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = random_model(&mut r, small_shape());
        let (medium, knockouts) = random_experiment(&mut r, &model);
        let problem = build_lp(&model, &medium, &knockouts).unwrap();
        let result = fba(&model, &medium, &knockouts).unwrap();
        let best = vertex_enumeration_optimum(&problem.lp).expect("zero flux is always feasible");
        prop_assert_eq!(result.solution.status, LpStatus::Optimal);
        prop_assert!((result.objective() - best).abs() <= TOLERANCE);
    }

    #[test]
    fn fluxes_balance_every_species(seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = random_model(&mut r, ModelShape::default());
        let (medium, knockouts) = random_experiment(&mut r, &model);
        let result = fba(&model, &medium, &knockouts).unwrap();
        prop_assert_eq!(result.solution.status, LpStatus::Optimal);
        let mut net: BTreeMap<SpeciesId, f64> = BTreeMap::new();
        for rx in model.reactions.values() {
            let v = result.flux(&rx.id).unwrap();
            prop_assert!(v >= rx.lower_bound - FEASIBILITY_TOLERANCE && v <= rx.upper_bound + FEASIBILITY_TOLERANCE);
            if !rx.enabled_without(&knockouts) {
                prop_assert_eq!(v, 0.0);
            }
            for e in &rx.substrates {
                *net.entry(e.species.clone()).or_default() -= e.coefficient * v;
            }
            for e in &rx.products {
                *net.entry(e.species.clone()).or_default() += e.coefficient * v;
            }
        }
        // Implicit exchange columns absorb any imbalance of exchange species.
        for (name, v) in result.flux_table() {
            if let Some(s) = name.strip_prefix("EX_") {
                if !model.reactions.contains_key(name) {
                    *net.entry(SpeciesId::from(s.trim_end_matches('_').to_string())).or_default() += v;
                }
            }
        }
        for (s, total) in net {
            prop_assert!(total.abs() <= 1e-6, "species {} unbalanced by {}", s, total);
        }
    }

    #[test]
    fn logic_constraints_only_tighten(seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = random_model(&mut r, ModelShape::default());
        let theory = compile(&model).unwrap();
        let (medium, knockouts) = random_experiment(&mut r, &model);
        let plain = fba(&model, &medium, &knockouts).unwrap();
        let constrained = logic_constrained_fba(&model, &theory, &medium, &knockouts, None).unwrap();
        prop_assert_eq!(constrained.solution.status, LpStatus::Optimal);
        prop_assert!(constrained.objective() <= plain.objective() + TOLERANCE);
        for id in &constrained.pinned {
            prop_assert_eq!(constrained.flux(id), Some(0.0));
        }
    }
}
