//! Hypothetical edits and what they would change.

use serde::ser::{Serialize, Serializer};
use serde::{Deserialize, Serialize as DeriveSerialize};
use thiserror::Error;

use crate::quantifier::QuantifierSpec;
use crate::report::{evaluate, EvalError, EvaluationReport};
use crate::scale::Grade;
use crate::session::{Cell, Importances, Session, ValidationError, Violation};

/// New importance for one criterion. `expert` is required in per-expert
/// importance mode and must be absent in global mode.
#[derive(Debug, Clone, PartialEq, Eq, DeriveSerialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImportanceEdit {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expert: Option<String>,
    pub criterion: String,
    pub grade: String,
}

#[derive(Debug, Clone, PartialEq, Eq, DeriveSerialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreEdit {
    pub proposal: String,
    pub expert: String,
    pub criterion: String,
    pub grade: String,
}

/// A set of edits to importances, scores and the quantifier choice.
#[derive(Debug, Clone, Default, PartialEq, Eq, DeriveSerialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Patch {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub importances: Vec<ImportanceEdit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scores: Vec<ScoreEdit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantifier: Option<QuantifierSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatchError {
    #[error("invalid patch: {0}")]
    Invalid(ValidationError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl Patch {
    pub fn is_empty(&self) -> bool {
        self.importances.is_empty() && self.scores.is_empty() && self.quantifier.is_none()
    }

    /// Returns a patched copy of `session`; the original is untouched.
    pub fn apply(&self, session: &Session) -> Result<Session, ValidationError> {
        let mut next = session.clone();
        let mut out = Vec::new();
        let has_criterion = |id: &str| session.criteria.iter().any(|c| c.id == id);
        let has_expert = |id: &str| session.experts.iter().any(|e| e.id == id);
        let has_proposal = |id: &str| session.proposals.iter().any(|p| p.id == id);

        for (i, edit) in self.importances.iter().enumerate() {
            let path = format!("importances[{i}]");
            let mut ok = true;
            if !has_criterion(&edit.criterion) {
                out.push(Violation::new(
                    format!("{path}.criterion"),
                    format!("unknown criterion {:?}", edit.criterion),
                ));
                ok = false;
            }
            let grade = match session.scale.parse(&edit.grade) {
                Ok(g) => Some(g),
                Err(err) => {
                    out.push(Violation::new(format!("{path}.grade"), err.to_string()));
                    None
                }
            };
            match (&mut next.importances, &edit.expert) {
                (Importances::Global(map), None) => {
                    if let (true, Some(g)) = (ok, grade) {
                        map.insert(edit.criterion.clone(), g);
                    }
                }
                (Importances::Global(_), Some(_)) => out.push(Violation::new(
                    format!("{path}.expert"),
                    "session uses global importances; omit expert",
                )),
                (Importances::PerExpert(by_expert), Some(expert)) => {
                    if !has_expert(expert) {
                        out.push(Violation::new(
                            format!("{path}.expert"),
                            format!("unknown expert {expert:?}"),
                        ));
                    } else if let (true, Some(g)) = (ok, grade) {
                        by_expert
                            .entry(expert.clone())
                            .or_default()
                            .insert(edit.criterion.clone(), g);
                    }
                }
                (Importances::PerExpert(_), None) => out.push(Violation::new(
                    format!("{path}.expert"),
                    "session uses per-expert importances; expert is required",
                )),
            }
        }

        for (i, edit) in self.scores.iter().enumerate() {
            let path = format!("scores[{i}]");
            let before = out.len();
            if !has_proposal(&edit.proposal) {
                out.push(Violation::new(
                    format!("{path}.proposal"),
                    format!("unknown proposal {:?}", edit.proposal),
                ));
            }
            if !has_expert(&edit.expert) {
                out.push(Violation::new(
                    format!("{path}.expert"),
                    format!("unknown expert {:?}", edit.expert),
                ));
            }
            if !has_criterion(&edit.criterion) {
                out.push(Violation::new(
                    format!("{path}.criterion"),
                    format!("unknown criterion {:?}", edit.criterion),
                ));
            }
            match session.scale.parse(&edit.grade) {
                Ok(g) if out.len() == before => {
                    next.scores
                        .insert(Cell::new(&edit.proposal, &edit.expert, &edit.criterion), g);
                }
                Ok(_) => {}
                Err(err) => out.push(Violation::new(format!("{path}.grade"), err.to_string())),
            }
        }

        if let Some(spec) = &self.quantifier {
            next.quantifier = spec.clone();
            if !session.experts.is_empty() {
                if let Err(err) = spec.build(session.experts.len(), &session.scale) {
                    out.push(Violation::new("quantifier", err.to_string()));
                }
            }
        }

        if !out.is_empty() {
            return Err(ValidationError { violations: out });
        }
        next.validate()?;
        Ok(next)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GradeChange {
    pub old: Grade,
    pub new: Grade,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitChange {
    pub proposal: String,
    pub expert: String,
    pub change: GradeChange,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProposalChange {
    pub proposal: String,
    pub overall: GradeChange,
    pub old_rank: usize,
    pub new_rank: usize,
}

/// Differences between two reports over the same proposals and experts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RankDelta {
    pub unit_scores: Vec<UnitChange>,
    pub proposals: Vec<ProposalChange>,
}

impl RankDelta {
    pub fn between(old: &EvaluationReport, new: &EvaluationReport) -> Self {
        let mut delta = RankDelta::default();
        for before in &old.proposals {
            let Some(after) = new.proposal(&before.id) else {
                continue;
            };
            for (expert, old_grade) in &before.unit_scores {
                if let Some(new_grade) = new.unit_score(&before.id, expert) {
                    if new_grade != *old_grade {
                        delta.unit_scores.push(UnitChange {
                            proposal: before.id.clone(),
                            expert: expert.clone(),
                            change: GradeChange {
                                old: *old_grade,
                                new: new_grade,
                            },
                        });
                    }
                }
            }
            if before.overall != after.overall || before.rank != after.rank {
                delta.proposals.push(ProposalChange {
                    proposal: before.id.clone(),
                    overall: GradeChange {
                        old: before.overall,
                        new: after.overall,
                    },
                    old_rank: before.rank,
                    new_rank: after.rank,
                });
            }
        }
        delta
    }

    pub fn is_empty(&self) -> bool {
        self.unit_scores.is_empty() && self.proposals.is_empty()
    }
}

/// The report a patch would produce and how it differs from the current one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhatIf {
    pub report: EvaluationReport,
    pub delta: RankDelta,
}

impl WhatIf {
    /// Human-readable summary of the delta.
    pub fn describe(&self) -> String {
        if self.delta.is_empty() {
            return "no changes\n".to_string();
        }
        let label = |g: Grade| self.report.scale().label(g).unwrap_or("<off-scale>");
        let mut out = String::new();
        for u in &self.delta.unit_scores {
            out.push_str(&format!(
                "unit score: {} → {} (proposal {}, expert {})\n",
                label(u.change.old),
                label(u.change.new),
                u.proposal,
                u.expert
            ));
        }
        for p in &self.delta.proposals {
            out.push_str(&format!(
                "overall: {} → {} (proposal {}), rank group {} → {}\n",
                label(p.overall.old),
                label(p.overall.new),
                p.proposal,
                p.old_rank,
                p.new_rank
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("what-if serializes");
        out.push('\n');
        out
    }
}

#[derive(DeriveSerialize)]
struct ChangeDoc<'a> {
    old: &'a str,
    new: &'a str,
}

#[derive(DeriveSerialize)]
struct UnitChangeDoc<'a> {
    proposal: &'a str,
    expert: &'a str,
    old: &'a str,
    new: &'a str,
}

#[derive(DeriveSerialize)]
struct ProposalChangeDoc<'a> {
    proposal: &'a str,
    overall: ChangeDoc<'a>,
    old_rank: usize,
    new_rank: usize,
}

#[derive(DeriveSerialize)]
struct DeltaDoc<'a> {
    unit_scores: Vec<UnitChangeDoc<'a>>,
    proposals: Vec<ProposalChangeDoc<'a>>,
}

#[derive(DeriveSerialize)]
struct WhatIfDoc<'a> {
    report: &'a EvaluationReport,
    delta: DeltaDoc<'a>,
}

impl Serialize for WhatIf {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let scale = self.report.scale();
        let label = |g: Grade| scale.label(g).unwrap_or("<off-scale>");
        WhatIfDoc {
            report: &self.report,
            delta: DeltaDoc {
                unit_scores: self
                    .delta
                    .unit_scores
                    .iter()
                    .map(|u| UnitChangeDoc {
                        proposal: &u.proposal,
                        expert: &u.expert,
                        old: label(u.change.old),
                        new: label(u.change.new),
                    })
                    .collect(),
                proposals: self
                    .delta
                    .proposals
                    .iter()
                    .map(|p| ProposalChangeDoc {
                        proposal: &p.proposal,
                        overall: ChangeDoc {
                            old: label(p.overall.old),
                            new: label(p.overall.new),
                        },
                        old_rank: p.old_rank,
                        new_rank: p.new_rank,
                    })
                    .collect(),
            },
        }
        .serialize(serializer)
    }
}

/// Evaluates `session` with `patch` applied, without modifying `session`.
pub fn what_if(session: &Session, patch: &Patch) -> Result<WhatIf, PatchError> {
    let before = evaluate(session)?;
    let patched = patch.apply(session).map_err(PatchError::Invalid)?;
    let report = evaluate(&patched)?;
    let delta = RankDelta::between(&before, &report);
    Ok(WhatIf { report, delta })
}
