use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, Write};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::saturate::Program;
use crate::exec::{map_ordered, Execution};
use crate::ids::{GeneId, SpeciesId};
use crate::logic::{facts_for_query, goal_atoms, Atom, AtomId, CompileError, LogicTheory, QueryError};
use crate::model::MetabolicModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GeneStatus {
    Essential,
    NonEssential,
}

impl fmt::Display for GeneStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneStatus::Essential => "ESSENTIAL",
            GeneStatus::NonEssential => "NON_ESSENTIAL",
        })
    }
}

impl std::str::FromStr for GeneStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ESSENTIAL" => Ok(GeneStatus::Essential),
            "NON_ESSENTIAL" => Ok(GeneStatus::NonEssential),
            other => Err(format!("expected ESSENTIAL or NON_ESSENTIAL, got `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EssentialityEntry {
    pub gene: GeneId,
    pub status: GeneStatus,
    /// Goal atoms that the wild type derives but the knockout does not.
    pub missing_goals: Vec<Atom>,
    pub runtime: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EssentialityReport {
    pub medium: BTreeSet<SpeciesId>,
    /// Sorted by gene id.
    pub entries: Vec<EssentialityEntry>,
}

impl EssentialityReport {
    pub fn status(&self, gene: &GeneId) -> Option<GeneStatus> {
        self.entries.binary_search_by(|e| e.gene.cmp(gene)).ok().map(|i| self.entries[i].status)
    }

    pub fn essential(&self) -> impl Iterator<Item = &GeneId> + '_ {
        self.entries.iter().filter(|e| e.status == GeneStatus::Essential).map(|e| &e.gene)
    }

    pub fn count(&self, status: GeneStatus) -> usize {
        self.entries.iter().filter(|e| e.status == status).count()
    }

    /// Tab-separated table with a header row. Runtimes are written only when
    /// `timings` is set (`NA` otherwise) so that the output is reproducible.
    pub fn write_tsv(&self, mut w: impl Write, timings: bool) -> io::Result<()> {
        writeln!(w, "gene_id\tverdict\twildtype_goal_atoms_missing\truntime_ms")?;
        for e in &self.entries {
            let missing: Vec<String> = e.missing_goals.iter().map(|a| a.to_string()).collect();
            let missing = if missing.is_empty() { "-".to_string() } else { missing.join(";") };
            let runtime = if timings { format!("{:.3}", e.runtime.as_secs_f64() * 1e3) } else { "NA".to_string() };
            writeln!(w, "{}\t{}\t{}\t{}", e.gene, e.status, missing, runtime)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScreenError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Rules(#[from] CompileError),
    #[error("wild type does not grow on this medium (missing {}); essentiality is undefined",
        .missing.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", "))]
    WildTypeNoGrowth { missing: Vec<Atom> },
}

/// Single-gene knockout screen over `genes` (all model genes when `None`).
pub fn essentiality_screen(
    theory: &LogicTheory,
    model: &MetabolicModel,
    medium: &BTreeSet<SpeciesId>,
    genes: Option<&[GeneId]>,
) -> Result<EssentialityReport, ScreenError> {
    essentiality_screen_with(theory, model, medium, genes, Execution::default())
}

/// Like [`essentiality_screen`] with an explicit execution mode. The report is
/// identical for every mode.
pub fn essentiality_screen_with(
    theory: &LogicTheory,
    model: &MetabolicModel,
    medium: &BTreeSet<SpeciesId>,
    genes: Option<&[GeneId]>,
    exec: Execution,
) -> Result<EssentialityReport, ScreenError> {
    let genes: Vec<GeneId> = match genes {
        Some(g) => {
            let set: BTreeSet<GeneId> = g.iter().cloned().collect();
            // Reuse the query check for unknown genes.
            facts_for_query(model, medium, &set)?;
            set.into_iter().collect()
        }
        None => model.genes.iter().cloned().collect(),
    };

    let facts = facts_for_query(model, medium, &BTreeSet::new())?;
    let mut program = Program::new(theory);
    let wild_type: Vec<AtomId> = program.load_facts(&facts)?;
    let goals = goal_atoms(model);
    let goal_ids: Vec<Option<AtomId>> = goals.iter().map(|g| program.lookup(g)).collect();
    let missing_in = |fix: &super::saturate::Fixpoint| -> Vec<Atom> {
        goals
            .iter()
            .zip(&goal_ids)
            .filter(|(_, id)| !id.is_some_and(|id| fix.contains(id)))
            .map(|(g, _)| g.clone())
            .collect()
    };

    let wt = program.fixpoint(&wild_type);
    let missing = missing_in(&wt);
    if !missing.is_empty() {
        return Err(ScreenError::WildTypeNoGrowth { missing });
    }

    let program = &program;
    let entries = map_ordered(&genes, exec, |gene| {
        let start = Instant::now();
        let removed = program.lookup(&Atom::gn(gene.clone()));
        let facts: Vec<AtomId> = wild_type.iter().copied().filter(|&f| Some(f) != removed).collect();
        let fix = program.fixpoint(&facts);
        let missing_goals = missing_in(&fix);
        let status = if missing_goals.is_empty() { GeneStatus::NonEssential } else { GeneStatus::Essential };
        EssentialityEntry { gene: gene.clone(), status, missing_goals, runtime: start.elapsed() }
    });
    Ok(EssentialityReport { medium: medium.clone(), entries })
}

/// Agreement between predicted and observed essentiality, with ESSENTIAL as
/// the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub true_positive: usize,
    pub true_negative: usize,
    pub false_positive: usize,
    pub false_negative: usize,
    /// Genes present on only one side.
    pub uncompared: usize,
}

impl ConfusionMatrix {
    pub fn compared(&self) -> usize {
        self.true_positive + self.true_negative + self.false_positive + self.false_negative
    }

    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.true_positive + self.true_negative, self.compared())
    }

    pub fn sensitivity(&self) -> Option<f64> {
        ratio(self.true_positive, self.true_positive + self.false_negative)
    }

    pub fn specificity(&self) -> Option<f64> {
        ratio(self.true_negative, self.true_negative + self.false_positive)
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn compare_to_observations(
    report: &EssentialityReport,
    observed: &BTreeMap<GeneId, GeneStatus>,
) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::default();
    for e in &report.entries {
        match (e.status, observed.get(&e.gene)) {
            (GeneStatus::Essential, Some(GeneStatus::Essential)) => m.true_positive += 1,
            (GeneStatus::NonEssential, Some(GeneStatus::NonEssential)) => m.true_negative += 1,
            (GeneStatus::Essential, Some(GeneStatus::NonEssential)) => m.false_positive += 1,
            (GeneStatus::NonEssential, Some(GeneStatus::Essential)) => m.false_negative += 1,
            (_, None) => m.uncompared += 1,
        }
    }
    m.uncompared += observed.keys().filter(|g| report.status(g).is_none()).count();
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::logic::compile;

    fn screen(exec: Execution) -> EssentialityReport {
        let m = fixtures::toy5();
        let t = compile(&m).unwrap();
        essentiality_screen_with(&t, &m, &BTreeSet::from(["A_e".into()]), None, exec).unwrap()
    }

    #[test]
    fn toy5_screen() {
        let r = screen(Execution::Sequential);
        let essential: Vec<&str> = r.essential().map(|g| g.as_str()).collect();
        assert_eq!(essential, ["g3", "g4", "gT"]);
        assert_eq!(r.status(&"g1".into()), Some(GeneStatus::NonEssential));
        assert_eq!(r.entries.len(), 5);
        assert_eq!(r, screen(Execution::Parallel).with_zero_runtimes_of(&r));
    }

    impl EssentialityReport {
        fn with_zero_runtimes_of(mut self, other: &Self) -> Self {
            for (a, b) in self.entries.iter_mut().zip(&other.entries) {
                a.runtime = b.runtime;
            }
            self
        }
    }

    #[test]
    fn wild_type_must_grow() {
        let m = fixtures::toy5();
        let t = compile(&m).unwrap();
        let err = essentiality_screen(&t, &m, &BTreeSet::new(), None).unwrap_err();
        assert!(matches!(err, ScreenError::WildTypeNoGrowth { .. }));
    }

    #[test]
    fn tsv_output() {
        let r = screen(Execution::Sequential);
        let mut buf = Vec::new();
        r.write_tsv(&mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "gene_id\tverdict\twildtype_goal_atoms_missing\truntime_ms");
        assert_eq!(lines[1], "g1\tNON_ESSENTIAL\t-\tNA");
        assert_eq!(lines[3], "g3\tESSENTIAL\tmet(BIOMASS_c,c)\tNA");
    }

    #[test]
    fn confusion() {
        let r = screen(Execution::Sequential);
        let observed = BTreeMap::from([
            ("g1".into(), GeneStatus::NonEssential),
            ("g3".into(), GeneStatus::NonEssential),
            ("gT".into(), GeneStatus::Essential),
            ("other".into(), GeneStatus::Essential),
        ]);
        let c = compare_to_observations(&r, &observed);
        assert_eq!(
            c,
            ConfusionMatrix { true_positive: 1, true_negative: 1, false_positive: 1, false_negative: 0, uncompared: 3 }
        );
        assert_eq!(c.accuracy(), Some(2.0 / 3.0));
        assert_eq!(ConfusionMatrix::default().accuracy(), None);
    }
}
