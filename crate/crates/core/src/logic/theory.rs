use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};

use serde::Serialize;

use super::atom::{Atom, HornClause, Provenance};
use super::CompileError;
use crate::ids::ReactionId;

/// Dense index of an interned atom.
pub type AtomId = u32;

#[derive(Clone, Debug)]
pub(crate) struct Clause {
    pub head: AtomId,
    /// Sorted, distinct.
    pub body: Box<[AtomId]>,
    pub provenance: Provenance,
}

/// A canonical, duplicate-free set of ground Horn clauses with interned atoms.
///
/// Clauses are ordered by provenance, then head, then body. Each clause keeps a
/// back-reference to the reaction it was compiled from.
#[derive(Clone, Debug)]
pub struct LogicTheory {
    atoms: Vec<Atom>,
    lookup: HashMap<Atom, AtomId>,
    clauses: Vec<Clause>,
    sources: Vec<Option<ReactionId>>,
    /// For every atom, the clauses whose body mentions it.
    watchers: Vec<Vec<u32>>,
}

impl LogicTheory {
    /// Builds a theory from clauses without source reactions.
    pub fn from_clauses(clauses: impl IntoIterator<Item = HornClause>) -> Result<Self, CompileError> {
        Self::build(clauses.into_iter().map(|c| (c, None)).collect())
    }

    pub(crate) fn build(mut items: Vec<(HornClause, Option<ReactionId>)>) -> Result<Self, CompileError> {
        for (c, _) in &mut items {
            c.body.sort();
            c.body.dedup();
            if c.body.binary_search(&c.head).is_ok() {
                return Err(CompileError::HeadInBody(c.to_string()));
            }
        }
        items.sort_by(|a, b| a.0.cmp(&b.0));
        items.dedup_by(|b, a| a.0 == b.0);

        let mut theory = LogicTheory {
            atoms: Vec::new(),
            lookup: HashMap::new(),
            clauses: Vec::with_capacity(items.len()),
            sources: Vec::with_capacity(items.len()),
            watchers: Vec::new(),
        };
        for (c, source) in items {
            let head = theory.intern(c.head);
            let mut body: Vec<AtomId> = c.body.into_iter().map(|a| theory.intern(a)).collect();
            body.sort_unstable();
            let idx = theory.clauses.len() as u32;
            for &b in &body {
                theory.watchers[b as usize].push(idx);
            }
            theory.clauses.push(Clause { head, body: body.into_boxed_slice(), provenance: c.provenance });
            theory.sources.push(source);
        }
        Ok(theory)
    }

    fn intern(&mut self, atom: Atom) -> AtomId {
        if let Some(&id) = self.lookup.get(&atom) {
            return id;
        }
        let id = self.atoms.len() as AtomId;
        self.atoms.push(atom.clone());
        self.lookup.insert(atom, id);
        self.watchers.push(Vec::new());
        id
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom(&self, id: AtomId) -> &Atom {
        &self.atoms[id as usize]
    }

    pub fn atom_id(&self, atom: &Atom) -> Option<AtomId> {
        self.lookup.get(atom).copied()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn clause(&self, index: usize) -> HornClause {
        self.horn(&self.clauses[index])
    }

    pub(crate) fn horn(&self, c: &Clause) -> HornClause {
        HornClause {
            provenance: c.provenance,
            head: self.atom(c.head).clone(),
            body: {
                let mut b: Vec<Atom> = c.body.iter().map(|&a| self.atom(a).clone()).collect();
                b.sort();
                b
            },
        }
    }

    /// All clauses in canonical order.
    pub fn clauses(&self) -> impl Iterator<Item = HornClause> + '_ {
        self.clauses.iter().map(|c| self.horn(c))
    }

    pub fn source(&self, index: usize) -> Option<&ReactionId> {
        self.sources[index].as_ref()
    }

    pub(crate) fn raw_clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub(crate) fn watchers(&self, atom: AtomId) -> &[u32] {
        &self.watchers[atom as usize]
    }

    pub fn stats(&self) -> TheoryStats {
        theory_stats(self)
    }

    /// Writes the clause dump: one clause per line as `head <- a1, a2, ...`,
    /// facts as `head <-`, each provenance group preceded by a `% NAME` line.
    pub fn write_dump(&self, mut w: impl Write) -> io::Result<()> {
        let mut current = None;
        for c in &self.clauses {
            if current != Some(c.provenance) {
                writeln!(w, "% {}", c.provenance)?;
                current = Some(c.provenance);
            }
            writeln!(w, "{}", self.horn(c))?;
        }
        Ok(())
    }

    pub fn dump(&self) -> String {
        let mut buf = Vec::new();
        self.write_dump(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dump is UTF-8")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TheoryStats {
    pub activation: usize,
    pub enzyme: usize,
    pub isoenzyme: usize,
    pub product: usize,
    pub medium: usize,
    pub genotype: usize,
    pub hypothesis: usize,
    pub atoms: usize,
}

impl TheoryStats {
    pub fn count(&self, p: Provenance) -> usize {
        match p {
            Provenance::Activation => self.activation,
            Provenance::Enzyme => self.enzyme,
            Provenance::Isoenzyme => self.isoenzyme,
            Provenance::Product => self.product,
            Provenance::Medium => self.medium,
            Provenance::Genotype => self.genotype,
            Provenance::Hypothesis => self.hypothesis,
        }
    }
}

impl fmt::Display for TheoryStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ACT={} ENZ={} ISO={} PROD={}", self.activation, self.enzyme, self.isoenzyme, self.product)
    }
}

pub fn theory_stats(theory: &LogicTheory) -> TheoryStats {
    let mut s = TheoryStats { atoms: theory.atom_count(), ..Default::default() };
    for c in &theory.clauses {
        let slot = match c.provenance {
            Provenance::Activation => &mut s.activation,
            Provenance::Enzyme => &mut s.enzyme,
            Provenance::Isoenzyme => &mut s.isoenzyme,
            Provenance::Product => &mut s.product,
            Provenance::Medium => &mut s.medium,
            Provenance::Genotype => &mut s.genotype,
            Provenance::Hypothesis => &mut s.hypothesis,
        };
        *slot += 1;
    }
    s
}
