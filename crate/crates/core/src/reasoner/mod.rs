//! Forward-chaining evaluation of a compiled theory: least fixpoints, growth
//! verdicts with derivations, and single-gene knockout screens.

mod essentiality;
mod growth;
mod saturate;

pub use essentiality::{
    compare_to_observations, essentiality_screen, essentiality_screen_with, ConfusionMatrix, EssentialityEntry,
    EssentialityReport, GeneStatus, ScreenError,
};
pub use growth::{predict_growth, predict_growth_with, Evidence, GrowthError, GrowthVerdict, Verdict};
pub use saturate::{saturate, saturate_with, Derivation, DerivationStep, DerivedSet, Justification};

pub(crate) use growth::grows;
