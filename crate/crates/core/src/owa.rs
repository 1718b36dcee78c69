//! Ordered weighted aggregation of expert unit scores.
//!
//! The unit scores are sorted best first into `B_1 ≥ … ≥ B_r` and fused as
//! `Max_j [Q(j) ∧ B_j]`. `B_j` is the worst of the `j` best scores, and
//! `Q(j)` caps how much the support of `j` experts is worth.

use std::cmp::Ordering;

use thiserror::Error;

use crate::quantifier::Quantifier;
use crate::scale::{gmin, Grade};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OwaError {
    #[error("no unit scores to aggregate")]
    EmptyInput,
    #[error("unit scores belong to different scales")]
    ScaleMismatch,
    #[error("quantifier expects {expected} experts, got {actual} scores")]
    LengthMismatch { expected: usize, actual: usize },
}

/// Unit scores in descending order with the expert behind each position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedScores {
    entries: Vec<(String, Grade)>,
}

impl OrderedScores {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `B_1, B_2, …`.
    pub fn grades(&self) -> impl Iterator<Item = Grade> + '_ {
        self.entries.iter().map(|(_, g)| *g)
    }

    /// Expert ids in the same order as [`Self::grades`].
    pub fn provenance(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(id, _)| id.as_str())
    }

    /// `B_j`, 1-based.
    pub fn nth(&self, j: usize) -> Grade {
        self.entries[j - 1].1
    }
}

/// Sorts unit scores best first. Equal grades keep ascending expert-id order.
pub fn order_scores<'a, I>(unit_scores: I) -> Result<OrderedScores, OwaError>
where
    I: IntoIterator<Item = (&'a str, Grade)>,
{
    let mut entries: Vec<(String, Grade)> = unit_scores
        .into_iter()
        .map(|(id, g)| (id.to_string(), g))
        .collect();
    let first = entries.first().ok_or(OwaError::EmptyInput)?.1;
    if entries.iter().any(|(_, g)| !g.same_scale(first)) {
        return Err(OwaError::ScaleMismatch);
    }
    entries.sort_by(|a, b| match b.1.index().cmp(&a.1.index()) {
        Ordering::Equal => a.0.cmp(&b.0),
        other => other,
    });
    Ok(OrderedScores { entries })
}

/// The position that attains the maximum, smallest `j` on ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Witness {
    pub j: usize,
    pub quantifier: Grade,
    pub score: Grade,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Aggregate {
    pub grade: Grade,
    pub witness: Witness,
}

/// `Max_{j=1..r} [Q(j) ∧ B_j]` together with the witnessing `j`.
pub fn owa_explained(ordered: &OrderedScores, q: &Quantifier) -> Result<Aggregate, OwaError> {
    if ordered.len() != q.experts() {
        return Err(OwaError::LengthMismatch {
            expected: q.experts(),
            actual: ordered.len(),
        });
    }
    let mut best: Option<Aggregate> = None;
    for (pos, b) in ordered.grades().enumerate() {
        let j = pos + 1;
        let qj = q.at(j);
        let term = gmin(qj, b).map_err(|_| OwaError::ScaleMismatch)?;
        let improves = match best {
            None => true,
            Some(cur) => term.index() > cur.grade.index(),
        };
        if improves {
            best = Some(Aggregate {
                grade: term,
                witness: Witness {
                    j,
                    quantifier: qj,
                    score: b,
                },
            });
        }
    }
    best.ok_or(OwaError::EmptyInput)
}

pub fn owa(ordered: &OrderedScores, q: &Quantifier) -> Result<Grade, OwaError> {
    owa_explained(ordered, q).map(|a| a.grade)
}

/// Orders the scores and fuses them.
pub fn aggregate<'a, I>(unit_scores: I, q: &Quantifier) -> Result<Aggregate, OwaError>
where
    I: IntoIterator<Item = (&'a str, Grade)>,
{
    owa_explained(&order_scores(unit_scores)?, q)
}
