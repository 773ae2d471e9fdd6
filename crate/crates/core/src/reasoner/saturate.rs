use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::ids::ReactionId;
use crate::logic::CompileError;
use crate::logic::{Atom, AtomId, HornClause, LogicTheory, Provenance};

use crate::logic::theory::Clause;

const UNDERIVED: u32 = u32::MAX;
const FACT: u32 = u32::MAX - 1;

/// A compiled theory plus clauses and atoms layered on top of it without
/// copying the base. Clause ids below `base.len()` are base clauses.
#[derive(Clone, Debug)]
pub(crate) struct Program<'t> {
    base: &'t LogicTheory,
    extra_atoms: Vec<Atom>,
    extra_lookup: HashMap<Atom, AtomId>,
    extra_clauses: Vec<Clause>,
    extra_watchers: HashMap<AtomId, Vec<u32>>,
}

impl<'t> Program<'t> {
    pub fn new(base: &'t LogicTheory) -> Self {
        Self {
            base,
            extra_atoms: Vec::new(),
            extra_lookup: HashMap::new(),
            extra_clauses: Vec::new(),
            extra_watchers: HashMap::new(),
        }
    }

    pub fn with_rules(base: &'t LogicTheory, rules: &[HornClause]) -> Result<Self, CompileError> {
        let mut p = Self::new(base);
        for r in rules {
            p.add_clause(r)?;
        }
        Ok(p)
    }

    pub fn lookup(&self, atom: &Atom) -> Option<AtomId> {
        self.base.atom_id(atom).or_else(|| self.extra_lookup.get(atom).copied())
    }

    pub fn intern(&mut self, atom: &Atom) -> AtomId {
        if let Some(id) = self.lookup(atom) {
            return id;
        }
        let id = (self.base.atom_count() + self.extra_atoms.len()) as AtomId;
        self.extra_atoms.push(atom.clone());
        self.extra_lookup.insert(atom.clone(), id);
        id
    }

    pub fn add_clause(&mut self, c: &HornClause) -> Result<(), CompileError> {
        if c.body.contains(&c.head) {
            return Err(CompileError::HeadInBody(c.to_string()));
        }
        let head = self.intern(&c.head);
        let mut body: Vec<AtomId> = c.body.iter().map(|a| self.intern(a)).collect();
        body.sort_unstable();
        body.dedup();
        let id = (self.base.len() + self.extra_clauses.len()) as u32;
        for &b in &body {
            self.extra_watchers.entry(b).or_default().push(id);
        }
        self.extra_clauses.push(Clause { head, body: body.into_boxed_slice(), provenance: c.provenance });
        Ok(())
    }

    pub fn atom_count(&self) -> usize {
        self.base.atom_count() + self.extra_atoms.len()
    }

    pub fn clause_count(&self) -> usize {
        self.base.len() + self.extra_clauses.len()
    }

    pub fn atom(&self, id: AtomId) -> &Atom {
        let n = self.base.atom_count();
        if (id as usize) < n {
            self.base.atom(id)
        } else {
            &self.extra_atoms[id as usize - n]
        }
    }

    fn clause(&self, id: u32) -> &Clause {
        let n = self.base.len();
        if (id as usize) < n {
            &self.base.raw_clauses()[id as usize]
        } else {
            &self.extra_clauses[id as usize - n]
        }
    }

    fn watchers(&self, atom: AtomId) -> impl Iterator<Item = u32> + '_ {
        let base: &[u32] = if (atom as usize) < self.base.atom_count() { self.base.watchers(atom) } else { &[] };
        base.iter().copied().chain(self.extra_watchers.get(&atom).into_iter().flatten().copied())
    }

    /// Interns the heads of `facts`. Facts with a body are added as rules.
    pub fn load_facts(&mut self, facts: &[HornClause]) -> Result<Vec<AtomId>, CompileError> {
        let mut ids = Vec::with_capacity(facts.len());
        for f in facts {
            if f.is_fact() {
                ids.push(self.intern(&f.head));
            } else {
                self.add_clause(f)?;
            }
        }
        Ok(ids)
    }

    /// Least fixpoint by round-based semi-naive evaluation: a clause is only
    /// revisited when one of its body atoms was derived in the previous round,
    /// tracked by a per-clause count of underived body atoms. When several
    /// clauses complete in the same round, the lowest clause id justifies the
    /// head.
    pub fn fixpoint(&self, facts: &[AtomId]) -> Fixpoint {
        let n_atoms = self.atom_count();
        let n_clauses = self.clause_count();
        let mut remaining: Vec<u32> = Vec::with_capacity(n_clauses);
        let mut ready: Vec<u32> = Vec::new();
        for id in 0..n_clauses as u32 {
            let len = self.clause(id).body.len() as u32;
            if len == 0 {
                ready.push(id);
            }
            remaining.push(len);
        }
        let mut justification = vec![UNDERIVED; n_atoms];
        let mut delta = Vec::new();
        for &f in facts {
            if justification[f as usize] == UNDERIVED {
                justification[f as usize] = FACT;
                delta.push(f);
            }
        }
        let mut count = delta.len();
        loop {
            ready.sort_unstable();
            for c in ready.drain(..) {
                let head = self.clause(c).head;
                if justification[head as usize] == UNDERIVED {
                    justification[head as usize] = c;
                    delta.push(head);
                    count += 1;
                }
            }
            if delta.is_empty() {
                break;
            }
            for a in delta.drain(..) {
                for c in self.watchers(a) {
                    let r = &mut remaining[c as usize];
                    *r -= 1;
                    if *r == 0 {
                        ready.push(c);
                    }
                }
            }
        }
        Fixpoint { justification, count }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Fixpoint {
    justification: Vec<u32>,
    count: usize,
}

impl Fixpoint {
    pub fn contains(&self, id: AtomId) -> bool {
        self.justification.get(id as usize).is_some_and(|&j| j != UNDERIVED)
    }
}

/// Why an atom holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Justification {
    Fact,
    Clause(HornClause),
}

/// Every atom derivable from a theory and a set of facts, each with the clause
/// that first derived it.
#[derive(Clone, Debug)]
pub struct DerivedSet<'t> {
    program: Program<'t>,
    fixpoint: Fixpoint,
}

impl<'t> DerivedSet<'t> {
    pub(crate) fn new(program: Program<'t>, fixpoint: Fixpoint) -> Self {
        Self { program, fixpoint }
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.program.lookup(atom).is_some_and(|id| self.fixpoint.contains(id))
    }

    pub fn len(&self) -> usize {
        self.fixpoint.count
    }

    pub fn is_empty(&self) -> bool {
        self.fixpoint.count == 0
    }

    /// Derived atoms in interning order.
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> + '_ {
        (0..self.program.atom_count() as AtomId)
            .filter(|&id| self.fixpoint.contains(id))
            .map(|id| self.program.atom(id))
    }

    pub fn to_set(&self) -> BTreeSet<Atom> {
        self.atoms().cloned().collect()
    }

    pub fn justification(&self, atom: &Atom) -> Option<Justification> {
        let id = self.program.lookup(atom)?;
        match self.fixpoint.justification[id as usize] {
            UNDERIVED => None,
            FACT => Some(Justification::Fact),
            c => Some(Justification::Clause(self.horn(c))),
        }
    }

    fn horn(&self, c: u32) -> HornClause {
        let clause = self.program.clause(c);
        HornClause::new(
            clause.provenance,
            self.program.atom(clause.head).clone(),
            clause.body.iter().map(|&b| self.program.atom(b).clone()),
        )
    }

    /// Reactions with at least one derived `act` atom.
    pub fn active_reactions(&self) -> BTreeSet<ReactionId> {
        self.atoms()
            .filter_map(|a| match a {
                Atom::Act { reaction, .. } => Some(reaction.clone()),
                _ => None,
            })
            .collect()
    }

    /// Reactions that have an `act` atom anywhere in the theory or overlay,
    /// derived or not.
    pub fn encoded_reactions(&self) -> BTreeSet<ReactionId> {
        (0..self.program.atom_count() as AtomId)
            .filter_map(|id| match self.program.atom(id) {
                Atom::Act { reaction, .. } => Some(reaction.clone()),
                _ => None,
            })
            .collect()
    }

    /// Proof DAG for the given atoms; underived atoms are skipped.
    pub fn derivation(&self, goals: &[Atom]) -> Derivation {
        let mut memo: HashMap<AtomId, usize> = HashMap::new();
        let mut steps = Vec::new();
        let mut roots = Vec::new();
        for g in goals {
            let Some(root) = self.program.lookup(g).filter(|&id| self.fixpoint.contains(id)) else {
                continue;
            };
            let mut stack = vec![(root, false)];
            while let Some((a, expanded)) = stack.pop() {
                if memo.contains_key(&a) {
                    continue;
                }
                let j = self.fixpoint.justification[a as usize];
                let body: &[AtomId] = if j == FACT { &[] } else { &self.program.clause(j).body };
                if expanded {
                    let premises = body.iter().map(|b| memo[b]).collect();
                    let rule = (j != FACT).then(|| self.program.clause(j).provenance);
                    memo.insert(a, steps.len());
                    steps.push(DerivationStep { atom: self.program.atom(a).clone(), rule, premises });
                } else {
                    stack.push((a, true));
                    stack.extend(body.iter().filter(|b| !memo.contains_key(b)).map(|&b| (b, false)));
                }
            }
            roots.push(memo[&root]);
        }
        Derivation { steps, roots }
    }
}

/// A proof DAG. Premises always precede the step that uses them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub steps: Vec<DerivationStep>,
    /// Step index of each requested atom, in request order.
    pub roots: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivationStep {
    pub atom: Atom,
    /// Provenance of the justifying clause; `None` for an input fact.
    pub rule: Option<Provenance>,
    pub premises: Vec<usize>,
}

/// Least fixpoint of the theory together with `facts`.
pub fn saturate<'t>(theory: &'t LogicTheory, facts: &[HornClause]) -> Result<DerivedSet<'t>, CompileError> {
    saturate_with(theory, &[], facts)
}

/// Like [`saturate`], with extra rules layered over the theory.
pub fn saturate_with<'t>(
    theory: &'t LogicTheory,
    rules: &[HornClause],
    facts: &[HornClause],
) -> Result<DerivedSet<'t>, CompileError> {
    let mut program = Program::with_rules(theory, rules)?;
    let ids = program.load_facts(facts)?;
    let fixpoint = program.fixpoint(&ids);
    Ok(DerivedSet::new(program, fixpoint))
}
