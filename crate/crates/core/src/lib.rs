//! Ordinal multi-criteria / multi-expert aggregation.
//!
//! Experts grade alternatives on a linguistic scale. Each expert's grades are
//! fused into a unit score with importance-weighted min/max, and the unit
//! scores of all experts are fused into an overall grade with a
//! quantifier-guided ordered weighted aggregation. No step uses numbers other
//! than positions on the scale.

pub mod owa;
pub mod quantifier;
pub mod report;
pub mod scale;
pub mod session;
pub mod unit;
pub mod whatif;

pub use owa::{
    aggregate, order_scores, owa, owa_explained, Aggregate, OrderedScores, OwaError, Witness,
};
pub use quantifier::{Quantifier, QuantifierError, QuantifierKind, QuantifierSpec};
pub use report::{evaluate, EvalError, EvaluationReport, ProposalResult, RankGroup};
pub use scale::{gmax, gmin, neg, Grade, OrdinalScale, ScaleError, ScaleLabel, ScaleMismatch};
pub use session::{
    Cell, Criterion, Expert, ImportanceMode, Importances, ParseError, Proposal, Session,
    SessionError, ValidationError, Violation,
};
pub use unit::{validate_importances, CriterionVector, Finding, MissingPolicy, UnitError};
pub use whatif::{what_if, ImportanceEdit, Patch, PatchError, RankDelta, ScoreEdit, WhatIf};

/// The seven point scale None, Very Low, Low, Medium, High, Very High,
/// Perfect.
pub fn default_scale7() -> OrdinalScale {
    OrdinalScale::seven_point()
}

/// The tutorial session shipped with the crate.
pub const TUTORIAL_SESSION: &str = include_str!("../fixtures/tutorial.json");
