//! Linguistic scales and the grade algebra over them.
//!
//! A scale is a finite, totally ordered list of labels. Index 1 is the worst
//! grade and index `n` the best. Every grade remembers which scale it came
//! from, so mixing grades of two different scales is an error rather than a
//! silent comparison of bare integers.
//!
//! The algebra is the one a chain lattice provides: [`gmax`] (join, `∨`),
//! [`gmin`] (meet, `∧`) and the order-reversing involution [`neg`], which maps
//! `S_i` to `S_{n-i+1}`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building a scale or resolving text against one.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScaleError {
    #[error("a scale needs at least 2 labels, got {0}")]
    TooFewLabels(usize),
    #[error("duplicate label or alias {0:?}")]
    DuplicateLabel(String),
    #[error("empty label at position {0}")]
    EmptyLabel(usize),
    #[error("scale has {0} labels, more than the supported maximum")]
    TooManyLabels(usize),
    #[error("unknown grade {text:?}; expected one of: {}", .labels.join(", "))]
    UnknownLabel { text: String, labels: Vec<String> },
    #[error("grade index {index} is outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
}

/// Two grades from different scales were combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("grades belong to different scales")]
pub struct ScaleMismatch;

/// Identity of a scale, derived from its normalized labels.
///
/// Two scales with the same labels in the same order are the same scale, so a
/// session that is saved and loaded again yields grades that still compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScaleId(u64);

/// One label of a scale together with its accepted short forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleLabel {
    pub label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
}

impl ScaleLabel {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            aliases: Vec::new(),
        }
    }

    pub fn with_aliases<I, S>(label: impl Into<String>, aliases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            label: label.into(),
            aliases: aliases.into_iter().map(Into::into).collect(),
        }
    }
}

/// A totally ordered linguistic scale `S_1 < S_2 < … < S_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinalScale {
    id: ScaleId,
    labels: Vec<ScaleLabel>,
}

const MAX_LABELS: usize = u16::MAX as usize;

fn normalize(text: &str) -> String {
    text.trim().to_lowercase()
}

// FNV-1a; stable across builds and platforms.
fn fingerprint<'a>(labels: impl Iterator<Item = &'a str>) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for label in labels {
        for byte in normalize(label).bytes().chain(std::iter::once(0xff)) {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x0100_0000_01b3);
        }
    }
    hash
}

impl OrdinalScale {
    /// Builds a scale from labels listed worst first.
    pub fn new<I, S>(labels: I) -> Result<Self, ScaleError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::with_aliases(labels.into_iter().map(ScaleLabel::new))
    }

    /// Builds a scale from label records listed worst first. Labels and
    /// aliases must all be distinct after trimming and case folding.
    pub fn with_aliases<I>(labels: I) -> Result<Self, ScaleError>
    where
        I: IntoIterator<Item = ScaleLabel>,
    {
        let labels: Vec<ScaleLabel> = labels.into_iter().collect();
        if labels.len() < 2 {
            return Err(ScaleError::TooFewLabels(labels.len()));
        }
        if labels.len() > MAX_LABELS {
            return Err(ScaleError::TooManyLabels(labels.len()));
        }
        let mut seen = std::collections::HashSet::new();
        for (pos, entry) in labels.iter().enumerate() {
            if entry.label.trim().is_empty() {
                return Err(ScaleError::EmptyLabel(pos + 1));
            }
            for text in std::iter::once(&entry.label).chain(&entry.aliases) {
                let key = normalize(text);
                if key.is_empty() {
                    return Err(ScaleError::EmptyLabel(pos + 1));
                }
                if !seen.insert(key) {
                    return Err(ScaleError::DuplicateLabel(text.clone()));
                }
            }
        }
        let id = ScaleId(fingerprint(labels.iter().map(|l| l.label.as_str())));
        Ok(Self { id, labels })
    }

    /// The seven point scale None … Perfect with the short forms
    /// N, VL, L, M, H, VH, P.
    pub fn seven_point() -> Self {
        Self::with_aliases([
            ScaleLabel::with_aliases("None", ["N"]),
            ScaleLabel::with_aliases("Very Low", ["VL"]),
            ScaleLabel::with_aliases("Low", ["L"]),
            ScaleLabel::with_aliases("Medium", ["M"]),
            ScaleLabel::with_aliases("High", ["H"]),
            ScaleLabel::with_aliases("Very High", ["VH"]),
            ScaleLabel::with_aliases("Perfect", ["P"]),
        ])
        .expect("built-in scale is well formed")
    }

    pub fn id(&self) -> ScaleId {
        self.id
    }

    /// Cardinality `n`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false: a scale has at least two grades.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[ScaleLabel] {
        &self.labels
    }

    /// `S_index`, 1-based.
    pub fn grade(&self, index: usize) -> Result<Grade, ScaleError> {
        if index == 0 || index > self.len() {
            return Err(ScaleError::IndexOutOfRange {
                index,
                n: self.len(),
            });
        }
        Ok(Grade {
            scale: self.id,
            index: index as u16,
            n: self.len() as u16,
        })
    }

    pub fn bottom(&self) -> Grade {
        self.grade(1).expect("index 1 is always on the scale")
    }

    pub fn top(&self) -> Grade {
        self.grade(self.len())
            .expect("index n is always on the scale")
    }

    /// All grades, worst first.
    pub fn grades(&self) -> impl DoubleEndedIterator<Item = Grade> + '_ {
        (1..=self.len()).map(move |i| self.grade(i).expect("in range"))
    }

    /// Resolves a label or alias, ignoring case and surrounding whitespace.
    pub fn parse(&self, text: &str) -> Result<Grade, ScaleError> {
        let key = normalize(text);
        self.labels
            .iter()
            .position(|entry| {
                normalize(&entry.label) == key || entry.aliases.iter().any(|a| normalize(a) == key)
            })
            .map(|pos| self.grade(pos + 1).expect("position is in range"))
            .ok_or_else(|| ScaleError::UnknownLabel {
                text: text.to_string(),
                labels: self.labels.iter().map(|l| l.label.clone()).collect(),
            })
    }

    /// Canonical label of a grade of this scale.
    pub fn label(&self, grade: Grade) -> Result<&str, ScaleMismatch> {
        if !self.contains(grade) {
            return Err(ScaleMismatch);
        }
        Ok(&self.labels[grade.index() - 1].label)
    }

    pub fn contains(&self, grade: Grade) -> bool {
        grade.scale == self.id && usize::from(grade.n) == self.len()
    }
}

/// A position `S_i` on a particular scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grade {
    scale: ScaleId,
    index: u16,
    n: u16,
}

impl Grade {
    /// 1-based position on the scale.
    pub fn index(self) -> usize {
        usize::from(self.index)
    }

    /// Cardinality of the owning scale.
    pub fn scale_len(self) -> usize {
        usize::from(self.n)
    }

    pub fn scale_id(self) -> ScaleId {
        self.scale
    }

    pub fn is_top(self) -> bool {
        self.index == self.n
    }

    pub fn is_bottom(self) -> bool {
        self.index == 1
    }

    pub fn same_scale(self, other: Grade) -> bool {
        self.scale == other.scale && self.n == other.n
    }

    pub fn try_cmp(self, other: Grade) -> Result<Ordering, ScaleMismatch> {
        if !self.same_scale(other) {
            return Err(ScaleMismatch);
        }
        Ok(self.index.cmp(&other.index))
    }

    pub fn join(self, other: Grade) -> Result<Grade, ScaleMismatch> {
        gmax(self, other)
    }

    pub fn meet(self, other: Grade) -> Result<Grade, ScaleMismatch> {
        gmin(self, other)
    }

    /// Top grade of the owning scale.
    pub fn top_of_scale(self) -> Grade {
        Grade {
            index: self.n,
            ..self
        }
    }

    /// Bottom grade of the owning scale.
    pub fn bottom_of_scale(self) -> Grade {
        Grade { index: 1, ..self }
    }
}

impl PartialOrd for Grade {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.try_cmp(*other).ok()
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S_{}", self.index)
    }
}

/// `a ∨ b`: the more desirable of two grades.
pub fn gmax(a: Grade, b: Grade) -> Result<Grade, ScaleMismatch> {
    Ok(match a.try_cmp(b)? {
        Ordering::Less => b,
        _ => a,
    })
}

/// `a ∧ b`: the less desirable of two grades.
pub fn gmin(a: Grade, b: Grade) -> Result<Grade, ScaleMismatch> {
    Ok(match a.try_cmp(b)? {
        Ordering::Greater => b,
        _ => a,
    })
}

/// `Neg(S_i) = S_{n-i+1}`.
pub fn neg(g: Grade) -> Grade {
    Grade {
        index: g.n - g.index + 1,
        ..g
    }
}

impl std::ops::Neg for Grade {
    type Output = Grade;

    fn neg(self) -> Grade {
        neg(self)
    }
}
