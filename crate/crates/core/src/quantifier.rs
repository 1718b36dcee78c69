//! The decision maker's aggregation function `Q`.
//!
//! `Q(i)` says how satisfied the decision maker is with an alternative that
//! `i` of the `r` experts are satisfied with. A quantifier is a table
//! `Q(0), …, Q(r)` that never decreases and ends at the top grade.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scale::{Grade, OrdinalScale, ScaleError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantifierError {
    #[error("expert count must be at least 1, got {0}")]
    BadExpertCount(usize),
    #[error("threshold m = {m} must lie in 1..={r}")]
    BadThreshold { m: usize, r: usize },
    #[error("quantifier decreases between Q({}) and Q({})", .0 - 1, .0)]
    NotMonotone(usize),
    #[error("Q(r) must be the top grade")]
    TopNotPerfect,
    #[error("quantifier values belong to different scales")]
    ScaleMismatch,
    #[error("quantifier is built for {expected} experts, got {actual}")]
    ExpertCountMismatch { expected: usize, actual: usize },
    #[error("custom value {index}: {source}")]
    Label { index: usize, source: ScaleError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantifierKind {
    All,
    Any,
    AtLeast(usize),
    Average,
    Custom,
}

impl fmt::Display for QuantifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantifierKind::All => f.write_str("all"),
            QuantifierKind::Any => f.write_str("any"),
            QuantifierKind::AtLeast(m) => write!(f, "at-least-{m}"),
            QuantifierKind::Average => f.write_str("average"),
            QuantifierKind::Custom => f.write_str("custom"),
        }
    }
}

/// A validated quantifier table bound to an expert count and a scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quantifier {
    kind: QuantifierKind,
    values: Vec<Grade>,
}

fn check_r(r: usize) -> Result<(), QuantifierError> {
    if r < 1 {
        return Err(QuantifierError::BadExpertCount(r));
    }
    Ok(())
}

fn step(m: usize, r: usize, scale: &OrdinalScale, kind: QuantifierKind) -> Quantifier {
    let values = (0..=r)
        .map(|i| if i < m { scale.bottom() } else { scale.top() })
        .collect();
    Quantifier { kind, values }
}

/// `Int[1 + k(n-1)/r]` with halves rounded up, in exact integer arithmetic:
/// `floor((3r + 2k(n-1)) / 2r)`.
pub fn average_index(k: usize, n: usize, r: usize) -> usize {
    (3 * r + 2 * k * (n - 1)) / (2 * r)
}

impl Quantifier {
    /// Every expert must be satisfied: `Q(i)` is the bottom grade below `r`.
    pub fn all(r: usize, scale: &OrdinalScale) -> Result<Self, QuantifierError> {
        check_r(r)?;
        Ok(step(r, r, scale, QuantifierKind::All))
    }

    /// One satisfied expert is enough.
    pub fn any(r: usize, scale: &OrdinalScale) -> Result<Self, QuantifierError> {
        check_r(r)?;
        Ok(step(1, r, scale, QuantifierKind::Any))
    }

    /// At least `m` of `r` experts must be satisfied.
    pub fn at_least(m: usize, r: usize, scale: &OrdinalScale) -> Result<Self, QuantifierError> {
        check_r(r)?;
        if m < 1 || m > r {
            return Err(QuantifierError::BadThreshold { m, r });
        }
        Ok(step(m, r, scale, QuantifierKind::AtLeast(m)))
    }

    /// The average-like quantifier `Q_A(k) = S_b(k)`.
    pub fn average(r: usize, scale: &OrdinalScale) -> Result<Self, QuantifierError> {
        check_r(r)?;
        let n = scale.len();
        let values = (0..=r)
            .map(|k| {
                scale
                    .grade(average_index(k, n, r))
                    .expect("b(k) stays within 1..=n")
            })
            .collect();
        Ok(Self {
            kind: QuantifierKind::Average,
            values,
        })
    }

    /// A table given explicitly as `Q(0), …, Q(r)`.
    pub fn custom(values: Vec<Grade>) -> Result<Self, QuantifierError> {
        if values.len() < 2 {
            return Err(QuantifierError::BadExpertCount(
                values.len().saturating_sub(1),
            ));
        }
        for (i, pair) in values.windows(2).enumerate() {
            let ord = pair[0]
                .try_cmp(pair[1])
                .map_err(|_| QuantifierError::ScaleMismatch)?;
            if ord.is_gt() {
                return Err(QuantifierError::NotMonotone(i + 1));
            }
        }
        if !values.last().expect("len >= 2").is_top() {
            return Err(QuantifierError::TopNotPerfect);
        }
        Ok(Self {
            kind: QuantifierKind::Custom,
            values,
        })
    }

    pub fn kind(&self) -> QuantifierKind {
        self.kind
    }

    /// Number of experts `r`.
    pub fn experts(&self) -> usize {
        self.values.len() - 1
    }

    /// `Q(i)` for `i` in `0..=r`.
    pub fn at(&self, i: usize) -> Grade {
        self.values[i]
    }

    pub fn values(&self) -> &[Grade] {
        &self.values
    }

    pub fn ensure_experts(&self, r: usize) -> Result<(), QuantifierError> {
        if self.experts() != r {
            return Err(QuantifierError::ExpertCountMismatch {
                expected: self.experts(),
                actual: r,
            });
        }
        Ok(())
    }

    /// True when `self(i) ≤ other(i)` for every `i`.
    pub fn pointwise_le(&self, other: &Quantifier) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.partial_cmp(b).is_some_and(|o| o.is_le()))
    }
}

/// Serialized quantifier choice, resolved against a session's expert count
/// and scale at evaluation time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", try_from = "RawSpec")]
pub enum QuantifierSpec {
    All,
    Any,
    Average,
    AtLeast { m: usize },
    Custom { values: Vec<String> },
}

// Internally tagged enums ignore stray fields on unit variants, so the wire
// form is checked by hand.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: String,
    m: Option<usize>,
    values: Option<Vec<String>>,
}

impl TryFrom<RawSpec> for QuantifierSpec {
    type Error = String;

    fn try_from(raw: RawSpec) -> Result<Self, Self::Error> {
        if raw.m.is_some() && raw.kind != "at-least" {
            return Err(format!("field `m` is not allowed for kind {:?}", raw.kind));
        }
        if raw.values.is_some() && raw.kind != "custom" {
            return Err(format!(
                "field `values` is not allowed for kind {:?}",
                raw.kind
            ));
        }
        Ok(match raw.kind.as_str() {
            "all" => QuantifierSpec::All,
            "any" => QuantifierSpec::Any,
            "average" => QuantifierSpec::Average,
            "at-least" => QuantifierSpec::AtLeast {
                m: raw.m.ok_or("kind \"at-least\" requires field `m`")?,
            },
            "custom" => QuantifierSpec::Custom {
                values: raw
                    .values
                    .ok_or("kind \"custom\" requires field `values`")?,
            },
            other => {
                return Err(format!(
                    "unknown quantifier kind {other:?}, expected one of all, any, average, at-least, custom"
                ))
            }
        })
    }
}

impl QuantifierSpec {
    pub fn build(&self, r: usize, scale: &OrdinalScale) -> Result<Quantifier, QuantifierError> {
        match self {
            QuantifierSpec::All => Quantifier::all(r, scale),
            QuantifierSpec::Any => Quantifier::any(r, scale),
            QuantifierSpec::Average => Quantifier::average(r, scale),
            QuantifierSpec::AtLeast { m } => Quantifier::at_least(*m, r, scale),
            QuantifierSpec::Custom { values } => {
                let grades = values
                    .iter()
                    .enumerate()
                    .map(|(index, text)| {
                        scale
                            .parse(text)
                            .map_err(|source| QuantifierError::Label { index, source })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let q = Quantifier::custom(grades)?;
                q.ensure_experts(r)?;
                Ok(q)
            }
        }
    }
}
