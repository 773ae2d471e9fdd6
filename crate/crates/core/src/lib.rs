//! Horn-logic reasoning over genome-scale metabolic models.
//!
//! A [`MetabolicModel`] (read from SBML with the `fbc` package or from the
//! native JSON format) is compiled into a ground Horn theory over presence and
//! activation atoms. Forward chaining answers growth queries with derivations
//! and runs knockout screens; abduction searches for minimal model repairs that
//! explain contradicting observations; flux balance analysis checks candidate
//! repairs quantitatively; and a content-addressed ledger records every model
//! revision.

pub mod abduction;
pub mod error;
pub mod exec;
pub mod fba;
pub mod fixtures;
pub mod gpr;
pub mod ids;
pub mod ledger;
pub mod logic;
pub mod model;
pub mod native;
pub mod reasoner;
pub mod sbml;

pub use abduction::{abduce, enumerate_abducibles, filter_hypotheses, Abducible, AbductionPolicy, Hypothesis};
pub use error::ParseError;
pub use exec::Execution;
pub use fba::{build_lp, fba, logic_constrained_fba, solve_lp, FluxSolution, LinearProgram, LpStatus};
pub use gpr::{gpr_to_dnf, Dnf, GprExpr};
pub use ids::{CompartmentId, GeneId, ReactionId, SpeciesId};
pub use ledger::{apply_changeset, diff, ChangeItem, Ledger, RevisionRecord};
pub use logic::{compile, Atom, HornClause, LogicTheory, Provenance};
pub use model::{validate, Diagnostic, MetabolicModel, Reaction, Severity};
pub use native::{parse_native, render_native};
pub use reasoner::{essentiality_screen, predict_growth, saturate, Verdict};
pub use sbml::{parse_sbml, SbmlOptions};
