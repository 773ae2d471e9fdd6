//! Reference oracles and seeded random instances for testing `gemlogic`.
//!
//! The oracles deliberately avoid the code paths they check: growth is
//! decided by species reachability on the model with gene rules evaluated as
//! Boolean formulas (no clauses, no DNF), fixpoints by naive rescanning of all
//! clauses, abduction by exhaustive subset enumeration with hypotheses
//! installed as model edits, and LP optima by enumerating basic solutions.

use std::collections::{BTreeMap, BTreeSet};

use gemlogic::abduction::{AbduciblePool, Hypothesis};
use gemlogic::fba::LinearProgram;
use gemlogic::gpr::GprExpr;
use gemlogic::ids::{GeneId, ReactionId, SpeciesId};
use gemlogic::logic::{Atom, HornClause};
use gemlogic::model::{MetabolicModel, Reaction, StoichEntry, DEFAULT_FLUX_BOUND};
use gemlogic::{apply_changeset, validate, Abducible};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Fixpoint and growth oracles

/// Least model of `clauses ∪ facts` by rescanning every clause until nothing
/// changes.
pub fn naive_fixpoint(clauses: &[HornClause], facts: &[Atom]) -> BTreeSet<Atom> {
    let mut derived: BTreeSet<Atom> = facts.iter().cloned().collect();
    loop {
        let mut changed = false;
        for c in clauses {
            if !derived.contains(&c.head) && c.body.iter().all(|b| derived.contains(b)) {
                derived.insert(c.head.clone());
                changed = true;
            }
        }
        if !changed {
            return derived;
        }
    }
}

/// Species reachable from the medium: a reaction fires in a direction when
/// its gene rule holds without the knockouts and all inputs are reachable.
/// Exchange reactions are ignored; the medium stands in for them.
pub fn reachable_species(
    model: &MetabolicModel,
    medium: &BTreeSet<SpeciesId>,
    knockouts: &BTreeSet<GeneId>,
) -> BTreeSet<SpeciesId> {
    let mut have: BTreeSet<SpeciesId> = medium.clone();
    let enabled: Vec<&Reaction> = model
        .reactions
        .values()
        .filter(|r| !model.is_exchange_reaction(r))
        .filter(|r| {
            r.gpr.as_ref().is_none_or(|g| g.eval(&|gene| model.genes.contains(gene) && !knockouts.contains(gene)))
        })
        .collect();
    loop {
        let mut changed = false;
        for r in &enabled {
            let mut sides = vec![(&r.substrates, &r.products)];
            if r.reversible {
                sides.push((&r.products, &r.substrates));
            }
            for (inputs, outputs) in sides {
                if inputs.iter().all(|e| have.contains(&e.species)) {
                    for e in outputs {
                        changed |= have.insert(e.species.clone());
                    }
                }
            }
        }
        if !changed {
            return have;
        }
    }
}

pub fn oracle_grows(model: &MetabolicModel, medium: &BTreeSet<SpeciesId>, knockouts: &BTreeSet<GeneId>) -> bool {
    let have = reachable_species(model, medium, knockouts);
    model.biomass_goal.iter().all(|g| have.contains(g))
}

/// Genes whose single knockout stops growth.
pub fn oracle_essential(model: &MetabolicModel, medium: &BTreeSet<SpeciesId>) -> BTreeSet<GeneId> {
    model.genes.iter().filter(|g| !oracle_grows(model, medium, &BTreeSet::from([(*g).clone()]))).cloned().collect()
}

// ---------------------------------------------------------------------------
// Abduction oracle

/// Growth with a hypothesis installed by editing the model.
pub fn oracle_grows_with(
    model: &MetabolicModel,
    pool: &AbduciblePool,
    abducibles: &[Abducible],
    medium: &BTreeSet<SpeciesId>,
    knockouts: &BTreeSet<GeneId>,
) -> bool {
    let h = Hypothesis::new(abducibles.to_vec(), Default::default());
    let changes = h.to_changeset(model, pool).expect("hypothesis changeset");
    let patched = apply_changeset(model, &changes).expect("hypothesis applies");
    oracle_grows(&patched, medium, knockouts)
}

/// Every subset-minimal growth-restoring subset of at most `max_card`
/// abducibles, by exhaustive enumeration, ordered by size and then
/// lexicographically. Metabolite sources that assert a biomass goal are not
/// considered.
pub fn brute_force_abduction(
    model: &MetabolicModel,
    pool: &AbduciblePool,
    medium: &BTreeSet<SpeciesId>,
    knockouts: &BTreeSet<GeneId>,
    max_card: usize,
) -> Vec<Vec<Abducible>> {
    let usable: Vec<Abducible> = pool
        .candidates
        .iter()
        .filter(|a| !matches!(a, Abducible::MetaboliteSource { species } if model.biomass_goal.contains(species)))
        .cloned()
        .collect();
    let n = usable.len();
    assert!(n <= 20, "pool too large for exhaustive enumeration");
    let mut growing: Vec<u32> = Vec::new();
    for mask in 1u32..(1 << n) {
        if mask.count_ones() as usize > max_card {
            continue;
        }
        let subset: Vec<Abducible> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| usable[i].clone()).collect();
        if oracle_grows_with(model, pool, &subset, medium, knockouts) {
            growing.push(mask);
        }
    }
    let mut minimal: Vec<Vec<Abducible>> = growing
        .iter()
        .filter(|&&m| !growing.iter().any(|&o| o != m && o & m == o))
        .map(|&m| {
            let mut s: Vec<Abducible> = (0..n).filter(|i| m & (1 << i) != 0).map(|i| usable[i].clone()).collect();
            s.sort();
            s
        })
        .collect();
    minimal.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    minimal
}

// ---------------------------------------------------------------------------
// LP oracle

/// Optimum of `lp` by enumerating basic solutions: every choice of basic
/// columns with full column rank, every non-basic column at one of its
/// bounds. Returns `None` when no basic solution is feasible. All bounds must
/// be finite.
pub fn vertex_enumeration_optimum(lp: &LinearProgram) -> Option<f64> {
    let n = lp.variables.len();
    let m = lp.rows.len();
    assert!(n <= 12, "too many variables to enumerate");
    assert!(lp.variables.iter().all(|v| v.lower.is_finite() && v.upper.is_finite()));
    let mut a = vec![vec![0.0; n]; m];
    for (i, row) in lp.rows.iter().enumerate() {
        for &(j, c) in &row.coefficients {
            a[i][j] += c;
        }
    }
    let b: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
    let mut best: Option<f64> = None;
    for basis in 0u32..(1 << n) {
        let basic: Vec<usize> = (0..n).filter(|j| basis & (1 << j) != 0).collect();
        if basic.len() > m {
            continue;
        }
        let nonbasic: Vec<usize> = (0..n).filter(|j| basis & (1 << j) == 0).collect();
        for choice in 0u32..(1 << nonbasic.len()) {
            let mut x = vec![0.0; n];
            for (k, &j) in nonbasic.iter().enumerate() {
                let v = &lp.variables[j];
                x[j] = if choice & (1 << k) != 0 { v.upper } else { v.lower };
            }
            let rhs: Vec<f64> = (0..m).map(|i| b[i] - nonbasic.iter().map(|&j| a[i][j] * x[j]).sum::<f64>()).collect();
            let cols: Vec<Vec<f64>> = (0..m).map(|i| basic.iter().map(|&j| a[i][j]).collect()).collect();
            let Some(xb) = solve_full_rank(cols, rhs) else { continue };
            for (k, &j) in basic.iter().enumerate() {
                x[j] = xb[k];
            }
            let feasible = lp.variables.iter().zip(&x).all(|(v, &xi)| xi >= v.lower - 1e-9 && xi <= v.upper + 1e-9)
                && lp.row_residual(&x) <= 1e-7;
            if feasible {
                let obj = lp.objective_value(&x);
                best = Some(best.map_or(obj, |o: f64| o.max(obj)));
            }
        }
    }
    best
}

/// Solves an `m × k` system (`k ≤ m`) with full column rank and consistent
/// right-hand side; `None` otherwise. Gaussian elimination with partial
/// pivoting.
fn solve_full_rank(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let m = a.len();
    let k = if m == 0 { 0 } else { a[0].len() };
    if k == 0 {
        return b.iter().all(|v| v.abs() <= 1e-9).then(Vec::new);
    }
    // Full column rank means every column pivots, so row `col` holds pivot `col`.
    for col in 0..k {
        let pivot = (col..m).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[pivot][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (pivot_row, pivot_b) = (a[col].clone(), b[col]);
        for r in (0..m).filter(|&r| r != col) {
            let f = a[r][col] / pivot_row[col];
            if f != 0.0 {
                for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
                b[r] -= f * pivot_b;
            }
        }
    }
    if b[k..].iter().any(|v| v.abs() > 1e-7) {
        return None;
    }
    Some((0..k).map(|i| b[i] / a[i][i]).collect())
}

// ---------------------------------------------------------------------------
// Random instances

/// Size limits for [`random_model`].
#[derive(Clone, Copy, Debug)]
pub struct ModelShape {
    pub max_reactions: usize,
    pub internal_species: usize,
    pub exchange_species: usize,
    pub genes: usize,
}

impl Default for ModelShape {
    fn default() -> Self {
        Self { max_reactions: 30, internal_species: 12, exchange_species: 3, genes: 10 }
    }
}

fn random_rule(rng: &mut ChaCha8Rng, genes: &[GeneId], depth: u32) -> GprExpr {
    if depth == 0 || rng.random_bool(0.5) {
        return GprExpr::Gene(genes.choose(rng).unwrap().clone());
    }
    let arity = rng.random_range(2..=3);
    let children = (0..arity).map(|_| random_rule(rng, genes, depth - 1)).collect();
    if rng.random_bool(0.5) {
        GprExpr::And(children)
    } else {
        GprExpr::Or(children)
    }
}

/// A valid random model: internal species `S*` in `c`, exchange species `X*`
/// in `e`, genes `G*`, up to `max_reactions` reactions `R*` with random
/// participants, rules, reversibility and bounds, one or two goal species and
/// a random objective. Exchange species occasionally get an explicit
/// exchange reaction `EX_*`.
pub fn random_model(rng: &mut ChaCha8Rng, shape: ModelShape) -> MetabolicModel {
    let mut m = MetabolicModel::empty("random");
    m.version = format!("{}", rng.random_range(1..100));
    m.add_compartment("c", Some("cytoplasm"));
    m.add_compartment("e", None);
    let internal: Vec<String> = (0..shape.internal_species).map(|i| format!("S{i}")).collect();
    let external: Vec<String> = (0..shape.exchange_species).map(|i| format!("X{i}")).collect();
    for s in &internal {
        m.add_species(s, "c");
    }
    for s in &external {
        m.add_species(s, "e");
        m.exchange_species.insert(s.as_str().into());
    }
    let genes: Vec<GeneId> = (0..shape.genes).map(|i| GeneId::from(format!("G{i}"))).collect();
    m.genes.extend(genes.iter().cloned());
    let all: Vec<&str> = internal.iter().chain(&external).map(String::as_str).collect();

    let n = rng.random_range(1..=shape.max_reactions);
    for i in 0..n {
        let mut pick: Vec<&str> = all.clone();
        pick.shuffle(rng);
        let ns = rng.random_range(0..=2usize);
        let np = rng.random_range(1..=2usize);
        let substrates = &pick[..ns];
        let products = &pick[ns..ns + np];
        let reversible = rng.random_bool(0.2);
        let gpr = if rng.random_bool(0.25) { None } else { Some(random_rule(rng, &genes, 2)) };
        let mut r = Reaction::new(format!("R{i:02}"), substrates, products, reversible, gpr);
        for e in r.substrates.iter_mut().chain(r.products.iter_mut()) {
            e.coefficient = *[1.0, 1.0, 2.0, 0.5].choose(rng).unwrap();
        }
        let ub = *[10.0, 100.0, DEFAULT_FLUX_BOUND].choose(rng).unwrap();
        r = r.with_bounds(if reversible { -ub } else { 0.0 }, ub);
        m.add_reaction(r);
    }
    for s in &external {
        if rng.random_bool(0.3) {
            let r = Reaction::new(format!("EX_{s}"), &[], &[s.as_str()], false, None).with_bounds(-1000.0, 10.0);
            m.add_reaction(Reaction { reversible: true, ..r });
        }
    }
    let goals = rng.random_range(1..=2);
    for s in internal.choose_multiple(rng, goals) {
        m.biomass_goal.insert(s.as_str().into());
    }
    let ids: Vec<ReactionId> = m.reactions.keys().cloned().collect();
    m.objective = ids.choose(rng).cloned();
    debug_assert!(validate(&m).is_empty(), "{:?}", validate(&m));
    m
}

/// A random medium (subset of the exchange species) and knockout set.
pub fn random_experiment(rng: &mut ChaCha8Rng, model: &MetabolicModel) -> (BTreeSet<SpeciesId>, BTreeSet<GeneId>) {
    let medium = model.exchange_species.iter().filter(|_| rng.random_bool(0.7)).cloned().collect();
    let knockouts = model.genes.iter().filter(|_| rng.random_bool(0.15)).cloned().collect();
    (medium, knockouts)
}

/// A valid model derived from `model` by a handful of random edits to every
/// kind of entity.
pub fn mutate_model(rng: &mut ChaCha8Rng, model: &MetabolicModel) -> MetabolicModel {
    let mut m = model.clone();
    let genes: Vec<GeneId> = m.genes.iter().cloned().collect();
    let species: Vec<SpeciesId> =
        m.species.keys().filter(|s| m.species[*s].compartment.as_str() == "c").cloned().collect();
    let ids: Vec<ReactionId> = m.reactions.keys().cloned().collect();
    for id in &ids {
        match rng.random_range(0..10) {
            0 => {
                m.reactions.remove(id);
            }
            1 => {
                let r = m.reactions.get_mut(id).unwrap();
                r.upper_bound = rng.random_range(1..50) as f64;
            }
            2 => {
                let r = m.reactions.get_mut(id).unwrap();
                r.gpr = if r.gpr.is_some() && rng.random_bool(0.3) { None } else { Some(random_rule(rng, &genes, 2)) };
            }
            3 => {
                let r = m.reactions.get_mut(id).unwrap();
                r.products.push(StoichEntry::new(format!("N{}", rng.random_range(0..3)), 1.0));
            }
            _ => {}
        }
    }
    // New species referenced above must exist.
    for i in 0..3 {
        let s = format!("N{i}");
        let used = m.reactions.values().any(|r| r.participants().any(|p| p.as_str() == s));
        if used || rng.random_bool(0.2) {
            m.add_species(&s, "c");
        }
    }
    for r in m.reactions.values_mut() {
        let mut seen = BTreeSet::new();
        r.products.retain(|e| seen.insert(e.species.clone()));
        r.substrates.retain(|e| !seen.contains(&e.species));
    }
    if rng.random_bool(0.5) {
        let s = species.choose(rng).unwrap();
        let r = Reaction::new(format!("NEW{}", rng.random_range(0..100)), &[s.as_str()], &["S0"], false, None);
        if r.substrates[0].species.as_str() != "S0" {
            m.add_reaction(r);
        }
    }
    if rng.random_bool(0.3) {
        m.genes.insert(format!("G{}", 100 + rng.random_range(0..5)).into());
    }
    if rng.random_bool(0.3) {
        m.version = format!("{}.{}", m.version, rng.random_range(0..10));
    }
    if rng.random_bool(0.3) {
        m.biomass_goal = BTreeSet::from([species.choose(rng).unwrap().clone()]);
    }
    if rng.random_bool(0.2) {
        if let Some(s) = m.exchange_species.iter().next().cloned() {
            m.exchange_species.remove(&s);
        }
    }
    if rng.random_bool(0.2) {
        m.add_compartment("p", Some("periplasm"));
    }
    if rng.random_bool(0.3) {
        if let Some(c) = m.compartments.get_mut("c") {
            c.name = Some(format!("cyto{}", rng.random_range(0..3)));
        }
    }
    m.objective = m.reactions.keys().collect::<Vec<_>>().choose(rng).map(|r| (*r).clone());
    assert!(validate(&m).iter().all(|d| d.severity != gemlogic::Severity::Error), "{:?}", validate(&m));
    m
}

/// A repair problem: a model that does not grow in `case` but can be
/// repaired from `pool` (at most `max_pool` candidates of every kind).
#[derive(Clone, Debug)]
pub struct RepairScenario {
    pub model: MetabolicModel,
    pub medium: BTreeSet<SpeciesId>,
    pub knockouts: BTreeSet<GeneId>,
    pub pool: AbduciblePool,
}

pub fn random_repair_scenario(rng: &mut ChaCha8Rng, max_pool: usize) -> RepairScenario {
    let shape = ModelShape { max_reactions: 14, internal_species: 8, exchange_species: 2, genes: 6 };
    loop {
        let full = random_model(rng, shape);
        let medium: BTreeSet<SpeciesId> = full.exchange_species.clone();
        if !oracle_grows(&full, &medium, &BTreeSet::new()) {
            continue;
        }
        let mut broken = full.clone();
        let ids: Vec<ReactionId> = broken.reactions.keys().cloned().collect();
        let removed: Vec<ReactionId> = ids.iter().filter(|_| rng.random_bool(0.3)).cloned().collect();
        for r in &removed {
            broken.reactions.remove(r);
        }
        if broken.objective.as_ref().is_some_and(|o| !broken.reactions.contains_key(o)) {
            broken.objective = None;
        }
        let knockouts: BTreeSet<GeneId> = broken.genes.iter().filter(|_| rng.random_bool(0.1)).cloned().collect();
        if oracle_grows(&broken, &medium, &knockouts) {
            continue;
        }

        let mut candidates: Vec<Abducible> = Vec::new();
        let mut reactions = BTreeMap::new();
        for r in &removed {
            let rx = full.reactions[r].clone();
            if !broken.is_exchange_reaction(&rx) {
                reactions.insert(r.clone(), rx);
                candidates.push(Abducible::ReactionExists { reaction: r.clone() });
            }
        }
        for s in broken.species.keys().filter(|s| !broken.exchange_species.contains(*s)) {
            candidates.push(Abducible::MetaboliteSource { species: s.clone() });
        }
        for r in broken.reactions.values().filter(|r| r.gpr.is_some() && !broken.is_exchange_reaction(r)) {
            let existing = r.gpr.as_ref().unwrap().genes();
            for g in broken.genes.iter().filter(|g| !existing.contains(*g)) {
                candidates.push(Abducible::GeneFunction { gene: g.clone(), reaction: r.id.clone() });
            }
        }
        candidates.shuffle(rng);
        candidates.truncate(max_pool);
        candidates.sort();
        reactions.retain(|id, _| candidates.contains(&Abducible::ReactionExists { reaction: id.clone() }));
        let pool = AbduciblePool { candidates, reactions, skipped: Vec::new() };
        return RepairScenario { model: broken, medium, knockouts, pool };
    }
}

/// A large model that grows on its full medium: `layers` layers of `width`
/// species, each species made from two species of the previous layer by a
/// reaction under a random rule, with the whole last layer as the goal.
/// Meant for benchmarks; essential genes are those no alternative covers.
pub fn layered_model(seed: u64, layers: usize, width: usize, genes: usize) -> MetabolicModel {
    let mut rng = rng(seed);
    let mut m = MetabolicModel::empty("layered");
    m.add_compartment("c", None);
    m.add_compartment("e", None);
    let gene_ids: Vec<GeneId> = (0..genes).map(|i| GeneId::from(format!("G{i:04}"))).collect();
    m.genes.extend(gene_ids.iter().cloned());
    let name = |l: usize, w: usize| format!("L{l:03}_{w:03}");
    for w in 0..width {
        let x = format!("X{w:03}");
        m.add_species(&x, "e");
        m.exchange_species.insert(x.as_str().into());
        m.add_species(&name(0, w), "c");
        m.add_reaction(Reaction::new(format!("T{w:03}"), &[x.as_str()], &[name(0, w).as_str()], false, None));
    }
    for l in 1..layers {
        for w in 0..width {
            let s = name(l, w);
            m.add_species(&s, "c");
            for alt in 0..2 {
                let a = name(l - 1, rng.random_range(0..width));
                let b = name(l - 1, rng.random_range(0..width));
                let inputs: Vec<&str> = if a == b { vec![a.as_str()] } else { vec![a.as_str(), b.as_str()] };
                let gpr = random_rule(&mut rng, &gene_ids, 1);
                m.add_reaction(Reaction::new(
                    format!("R{l:03}_{w:03}_{alt}"),
                    &inputs,
                    &[s.as_str()],
                    false,
                    Some(gpr),
                ));
            }
        }
    }
    for w in 0..width {
        m.biomass_goal.insert(name(layers - 1, w).as_str().into());
    }
    m.objective = m.reactions.keys().next().cloned();
    m
}

/// A random LP with at most `max_vars` variables and `max_rows` equality rows,
/// finite bounds and small integer data. About one in five has a right-hand
/// side drawn independently (often infeasible); the rest are feasible by
/// construction.
pub fn random_lp(rng: &mut ChaCha8Rng, max_vars: usize, max_rows: usize) -> LinearProgram {
    let n = rng.random_range(1..=max_vars);
    let m = rng.random_range(0..=max_rows);
    let mut lp = LinearProgram::new("random");
    let mut point = Vec::new();
    for j in 0..n {
        let lower = rng.random_range(-5..=0) as f64;
        let upper = lower + rng.random_range(0..=10) as f64;
        let objective = rng.random_range(-3..=3) as f64;
        lp.add_variable(format!("x{j}"), lower, upper, objective);
        point.push(rng.random_range(lower..=upper));
    }
    let independent_rhs = rng.random_bool(0.2);
    for i in 0..m {
        let mut coefficients: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.6) {
                coefficients.push((j, rng.random_range(-3..=3) as f64));
            }
        }
        let rhs = if independent_rhs {
            rng.random_range(-5..=5) as f64
        } else {
            coefficients.iter().map(|&(j, a)| a * point[j]).sum()
        };
        lp.add_row(format!("r{i}"), coefficients, rhs);
    }
    lp
}

#[cfg(test)]
mod tests {
    use super::*;
    use gemlogic::fixtures;

    #[test]
    fn oracle_matches_toy5_table() {
        let m = fixtures::toy5();
        let medium = BTreeSet::from(["A_e".into()]);
        assert!(oracle_grows(&m, &medium, &BTreeSet::new()));
        assert!(!oracle_grows(&m, &medium, &BTreeSet::from(["g3".into()])));
        let essential: Vec<String> = oracle_essential(&m, &medium).into_iter().map(|g| g.to_string()).collect();
        assert_eq!(essential, ["g3", "g4", "gT"]);
    }

    #[test]
    fn vertex_oracle_on_chain() {
        let mut lp = LinearProgram::new("chain");
        let ex = lp.add_variable("ex", 0.0, 10.0, 0.0);
        let r1 = lp.add_variable("r1", 0.0, 100.0, 0.0);
        let bm = lp.add_variable("bm", 0.0, 100.0, 1.0);
        lp.add_row("A", vec![(ex, 1.0), (r1, -1.0)], 0.0);
        lp.add_row("B", vec![(r1, 1.0), (bm, -1.0)], 0.0);
        assert_eq!(vertex_enumeration_optimum(&lp), Some(10.0));
        lp.rows[0].rhs = 200.0;
        assert_eq!(vertex_enumeration_optimum(&lp), None);
    }

    #[test]
    fn generators_produce_valid_models() {
        let mut r = rng(7);
        for _ in 0..50 {
            let m = random_model(&mut r, ModelShape::default());
            assert!(validate(&m).is_empty());
            let _ = mutate_model(&mut r, &m);
        }
    }
}
