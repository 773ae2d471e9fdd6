use std::fmt;

use serde::{Serialize, Serializer};

use crate::ids::{CompartmentId, GeneId, ReactionId, SpeciesId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Fwd,
    Rev,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Fwd => "fwd",
            Direction::Rev => "rev",
        })
    }
}

/// A ground atom of the presence/activation vocabulary.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// Metabolite present in its compartment.
    Met { species: SpeciesId, compartment: CompartmentId },
    /// Some enzyme for the reaction is present.
    Enz { reaction: ReactionId },
    /// The `index`-th isoenzyme (DNF disjunct) of the reaction is formed.
    Iso { reaction: ReactionId, index: u32 },
    /// Gene product present.
    Gn { gene: GeneId },
    /// Reaction active in a direction.
    Act { reaction: ReactionId, direction: Direction },
}

impl Atom {
    pub fn met(species: impl Into<SpeciesId>, compartment: impl Into<CompartmentId>) -> Self {
        Atom::Met { species: species.into(), compartment: compartment.into() }
    }

    pub fn enz(reaction: impl Into<ReactionId>) -> Self {
        Atom::Enz { reaction: reaction.into() }
    }

    pub fn iso(reaction: impl Into<ReactionId>, index: u32) -> Self {
        Atom::Iso { reaction: reaction.into(), index }
    }

    pub fn gn(gene: impl Into<GeneId>) -> Self {
        Atom::Gn { gene: gene.into() }
    }

    pub fn act(reaction: impl Into<ReactionId>, direction: Direction) -> Self {
        Atom::Act { reaction: reaction.into(), direction }
    }

    /// The reaction this atom talks about, if any.
    pub fn reaction(&self) -> Option<&ReactionId> {
        match self {
            Atom::Enz { reaction } | Atom::Iso { reaction, .. } | Atom::Act { reaction, .. } => Some(reaction),
            Atom::Met { .. } | Atom::Gn { .. } => None,
        }
    }
}

/// Writes an identifier, single-quoting it when it contains characters outside
/// `[A-Za-z0-9_.:-]`.
fn write_ident(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    let plain = !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b':' | b'-'));
    if plain {
        return f.write_str(s);
    }
    f.write_str("'")?;
    for c in s.chars() {
        if c == '\'' || c == '\\' {
            f.write_str("\\")?;
        }
        write!(f, "{c}")?;
    }
    f.write_str("'")
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Met { species, compartment } => {
                f.write_str("met(")?;
                write_ident(f, species.as_str())?;
                f.write_str(",")?;
                write_ident(f, compartment.as_str())?;
                f.write_str(")")
            }
            Atom::Enz { reaction } => {
                f.write_str("enz(")?;
                write_ident(f, reaction.as_str())?;
                f.write_str(")")
            }
            Atom::Iso { reaction, index } => {
                f.write_str("iso(")?;
                write_ident(f, reaction.as_str())?;
                write!(f, ",{index})")
            }
            Atom::Gn { gene } => {
                f.write_str("gn(")?;
                write_ident(f, gene.as_str())?;
                f.write_str(")")
            }
            Atom::Act { reaction, direction } => {
                f.write_str("act(")?;
                write_ident(f, reaction.as_str())?;
                write!(f, ",{direction})")
            }
        }
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Where a clause came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    Activation,
    Enzyme,
    Isoenzyme,
    Product,
    Medium,
    Genotype,
    Hypothesis,
}

impl Provenance {
    pub const ALL: [Provenance; 7] = [
        Provenance::Activation,
        Provenance::Enzyme,
        Provenance::Isoenzyme,
        Provenance::Product,
        Provenance::Medium,
        Provenance::Genotype,
        Provenance::Hypothesis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Provenance::Activation => "ACTIVATION",
            Provenance::Enzyme => "ENZYME",
            Provenance::Isoenzyme => "ISOENZYME",
            Provenance::Product => "PRODUCT",
            Provenance::Medium => "MEDIUM",
            Provenance::Genotype => "GENOTYPE",
            Provenance::Hypothesis => "HYPOTHESIS",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A ground definite clause `head <- body`. An empty body makes it a fact.
///
/// Field order gives the canonical ordering: provenance, then head, then body.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HornClause {
    pub provenance: Provenance,
    pub head: Atom,
    /// Sorted and free of duplicates.
    pub body: Vec<Atom>,
}

impl HornClause {
    pub fn new(provenance: Provenance, head: Atom, body: impl IntoIterator<Item = Atom>) -> Self {
        let mut body: Vec<Atom> = body.into_iter().collect();
        body.sort();
        body.dedup();
        Self { provenance, head, body }
    }

    pub fn fact(provenance: Provenance, head: Atom) -> Self {
        Self { provenance, head, body: Vec::new() }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }
}

impl fmt::Display for HornClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <-", self.head)?;
        for (i, a) in self.body.iter().enumerate() {
            f.write_str(if i == 0 { " " } else { ", " })?;
            write!(f, "{a}")?;
        }
        Ok(())
    }
}
