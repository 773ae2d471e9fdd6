//! Gene-rule normalisation against a truth-table oracle.

use std::collections::BTreeSet;

use gemlogic::gpr::DEFAULT_DNF_CAP;
use gemlogic::ids::GeneId;
use gemlogic::{gpr_to_dnf, Dnf, GprExpr};
use proptest::prelude::*;

const GENES: usize = 8;

fn gene(i: usize) -> GeneId {
    GeneId::from(format!("g{i}"))
}

fn rule() -> impl Strategy<Value = GprExpr> {
    let leaf = (0..GENES).prop_map(|i| GprExpr::Gene(gene(i)));
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(GprExpr::And),
            prop::collection::vec(inner, 2..=3).prop_map(GprExpr::Or),
        ]
    })
}

fn dnf_holds(dnf: &Dnf, present: &BTreeSet<GeneId>) -> bool {
    dnf.disjuncts().iter().any(|d| d.is_subset(present))
}

proptest! {
    #[test]
    fn dnf_preserves_truth_table(expr in rule()) {
        let dnf = gpr_to_dnf(Some(&expr), DEFAULT_DNF_CAP).unwrap();
        for mask in 0u32..(1 << GENES) {
            let present: BTreeSet<GeneId> = (0..GENES).filter(|i| mask & (1 << i) != 0).map(gene).collect();
            prop_assert_eq!(expr.eval(&|g| present.contains(g)), dnf_holds(&dnf, &present), "mask {:b}", mask);
        }
    }

    #[test]
    fn dnf_is_minimal_and_canonical(expr in rule()) {
        let d = gpr_to_dnf(Some(&expr), DEFAULT_DNF_CAP).unwrap();
        let sets = d.disjuncts();
        for (i, a) in sets.iter().enumerate() {
            for (j, b) in sets.iter().enumerate() {
                prop_assert!(i == j || !a.is_subset(b), "{:?} absorbs {:?}", a, b);
            }
        }
        let mut sorted = sets.to_vec();
        sorted.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        prop_assert_eq!(sorted.as_slice(), sets);
    }

    #[test]
    fn display_parse_round_trip(expr in rule()) {
        let text = expr.to_string();
        let back: GprExpr = text.parse().unwrap();
        prop_assert_eq!(back, expr);
    }
}

#[test]
fn absorption_example() {
    let e: GprExpr = "(g1 or g2) and (g1 or g3)".parse().unwrap();
    let d = gpr_to_dnf(Some(&e), DEFAULT_DNF_CAP).unwrap();
    let expected: Vec<BTreeSet<GeneId>> = vec![BTreeSet::from([gene(1)]), BTreeSet::from([gene(2), gene(3)])];
    assert_eq!(d.disjuncts(), expected.as_slice());
}

#[test]
fn no_rule_is_spontaneous() {
    assert_eq!(gpr_to_dnf(None, DEFAULT_DNF_CAP).unwrap(), Dnf::Spontaneous);
}
