//! One expert's unit score for one alternative.
//!
//! Each criterion contributes `Neg(importance) ∨ score` and the unit score is
//! the minimum of those terms. An important criterion has a low negated
//! importance, so a poor score on it drags the result down; an unimportant
//! criterion is capped from below by its high negation and barely matters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scale::{gmax, gmin, neg, Grade, OrdinalScale, ScaleMismatch};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnitError {
    #[error("no score for criterion {0:?}")]
    MissingScore(String),
    #[error("no importance for criterion {0:?}")]
    MissingImportance(String),
    #[error("criterion {0:?}: grades belong to different scales")]
    ScaleMismatch(String),
}

/// What to do when an expert left a criterion unscored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingPolicy {
    /// Every criterion must be scored.
    #[default]
    Strict,
    /// Unscored criteria are left out of that expert's minimum.
    Lenient,
}

/// Importances and scores of one expert on one alternative, keyed by
/// criterion id.
#[derive(Debug, Clone)]
pub struct CriterionVector {
    top: Grade,
    criteria: Vec<String>,
    importances: BTreeMap<String, Grade>,
    scores: BTreeMap<String, Grade>,
}

impl CriterionVector {
    pub fn new(scale: &OrdinalScale) -> Self {
        Self {
            top: scale.top(),
            criteria: Vec::new(),
            importances: BTreeMap::new(),
            scores: BTreeMap::new(),
        }
    }

    /// Adds a fully specified criterion.
    pub fn criterion(mut self, id: impl Into<String>, importance: Grade, score: Grade) -> Self {
        let id = id.into();
        self.importances.insert(id.clone(), importance);
        self.scores.insert(id.clone(), score);
        self.criteria.push(id);
        self
    }

    /// Builds a vector from parallel importance/score slices, naming the
    /// criteria `q1`, `q2`, ….
    pub fn from_pairs(scale: &OrdinalScale, importances: &[Grade], scores: &[Grade]) -> Self {
        importances
            .iter()
            .zip(scores)
            .enumerate()
            .fold(Self::new(scale), |v, (j, (&imp, &score))| {
                v.criterion(format!("q{}", j + 1), imp, score)
            })
    }

    pub fn with_parts(
        scale: &OrdinalScale,
        criteria: Vec<String>,
        importances: BTreeMap<String, Grade>,
        scores: BTreeMap<String, Grade>,
    ) -> Self {
        Self {
            top: scale.top(),
            criteria,
            importances,
            scores,
        }
    }

    pub fn criteria(&self) -> &[String] {
        &self.criteria
    }

    /// Unit score under the strict missing-data policy.
    pub fn unit_score(&self) -> Result<Grade, UnitError> {
        self.unit_score_with(MissingPolicy::Strict)
    }

    pub fn unit_score_with(&self, policy: MissingPolicy) -> Result<Grade, UnitError> {
        let mut terms = Vec::with_capacity(self.criteria.len());
        for id in &self.criteria {
            let importance = *self
                .importances
                .get(id)
                .ok_or_else(|| UnitError::MissingImportance(id.clone()))?;
            let score = match (self.scores.get(id), policy) {
                (Some(&score), _) => score,
                (None, MissingPolicy::Lenient) => continue,
                (None, MissingPolicy::Strict) => return Err(UnitError::MissingScore(id.clone())),
            };
            if !importance.same_scale(self.top) || !score.same_scale(self.top) {
                return Err(UnitError::ScaleMismatch(id.clone()));
            }
            terms.push((importance, score));
        }
        fuse(self.top, terms).map_err(|_| UnitError::ScaleMismatch(String::new()))
    }
}

/// `Min_j [Neg(importance_j) ∨ score_j]`, with the top grade for an empty
/// criterion set.
pub fn fuse<I>(top: Grade, terms: I) -> Result<Grade, ScaleMismatch>
where
    I: IntoIterator<Item = (Grade, Grade)>,
{
    terms.into_iter().try_fold(top, |acc, (importance, score)| {
        gmin(acc, gmax(neg(importance), score)?)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
}

/// Non-blocking remark attached to a report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub path: String,
    pub message: String,
}

pub const NO_TOP_IMPORTANCE: &str = "no criterion has top importance";

/// Warns when no criterion carries the top importance. The most important
/// criterion is expected to be rated at the top of the scale, but the unit
/// score is defined either way.
pub fn validate_importances<'a, I>(scale: &OrdinalScale, importances: I) -> Vec<Finding>
where
    I: IntoIterator<Item = &'a Grade>,
{
    let top = scale.top();
    if importances.into_iter().any(|g| *g == top) {
        Vec::new()
    } else {
        vec![Finding {
            severity: Severity::Warning,
            path: "importances".to_string(),
            message: NO_TOP_IMPORTANCE.to_string(),
        }]
    }
}
