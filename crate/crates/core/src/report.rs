//! Two-stage evaluation of a session and the resulting report.
//!
//! Stage one computes every expert's unit score for every proposal; stage two
//! fuses each proposal's unit scores with the session quantifier. Proposals
//! with the same overall grade share a rank group.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::ser::{Serialize, Serializer};
use serde::Serialize as DeriveSerialize;
use thiserror::Error;

use crate::owa::{self, OwaError, Witness};
use crate::quantifier::{Quantifier, QuantifierKind};
use crate::scale::{Grade, OrdinalScale};
use crate::session::{Cell, Session, ValidationError};
use crate::unit::{self, CriterionVector, Finding, UnitError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("proposal {proposal}, expert {expert}: {source}")]
    Unit {
        proposal: String,
        expert: String,
        source: UnitError,
    },
    #[error("proposal {proposal}: {source}")]
    Aggregate { proposal: String, source: OwaError },
}

/// Result for one proposal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProposalResult {
    pub id: String,
    /// Unit score per expert, in the session's expert order.
    pub unit_scores: Vec<(String, Grade)>,
    pub overall: Grade,
    pub witness: Witness,
    /// The experts behind `B_1 … B_j*`.
    pub supporters: Vec<String>,
    /// 1-based rank group.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankGroup {
    pub rank: usize,
    pub grade: Grade,
    /// Ascending id order.
    pub proposals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationReport {
    scale: OrdinalScale,
    quantifier: Option<Quantifier>,
    pub proposals: Vec<ProposalResult>,
    pub ranking: Vec<RankGroup>,
    pub findings: Vec<Finding>,
}

impl EvaluationReport {
    pub fn scale(&self) -> &OrdinalScale {
        &self.scale
    }

    pub fn quantifier(&self) -> Option<&Quantifier> {
        self.quantifier.as_ref()
    }

    pub fn proposal(&self, id: &str) -> Option<&ProposalResult> {
        self.proposals.iter().find(|p| p.id == id)
    }

    pub fn overall(&self, id: &str) -> Option<Grade> {
        self.proposal(id).map(|p| p.overall)
    }

    pub fn unit_score(&self, proposal: &str, expert: &str) -> Option<Grade> {
        self.proposal(proposal)?
            .unit_scores
            .iter()
            .find(|(e, _)| e == expert)
            .map(|(_, g)| *g)
    }

    fn label(&self, g: Grade) -> &str {
        self.scale.label(g).unwrap_or("<off-scale>")
    }

    /// Canonical pretty JSON, newline terminated.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    /// Plain-text ranking table.
    pub fn to_table(&self) -> String {
        let mut rows = vec![[
            "rank".to_string(),
            "proposal".to_string(),
            "overall".to_string(),
            "witness".to_string(),
        ]];
        for group in &self.ranking {
            for id in &group.proposals {
                let p = self.proposal(id).expect("ranked proposals exist");
                rows.push([
                    group.rank.to_string(),
                    id.clone(),
                    self.label(p.overall).to_string(),
                    format!(
                        "top {} at Q({})={} with B_{}={}",
                        p.witness.j,
                        p.witness.j,
                        self.label(p.witness.quantifier),
                        p.witness.j,
                        self.label(p.witness.score)
                    ),
                ]);
            }
        }
        let widths: Vec<usize> = (0..4)
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            let line = row
                .iter()
                .zip(&widths)
                .map(|(cell, w)| format!("{cell:<w$}"))
                .collect::<Vec<_>>()
                .join("  ");
            let _ = writeln!(out, "{}", line.trim_end());
        }
        for f in &self.findings {
            let _ = writeln!(out, "warning: {}: {}", f.path, f.message);
        }
        out
    }
}

#[derive(DeriveSerialize)]
struct WitnessDoc<'a> {
    j: usize,
    quantifier: &'a str,
    score: &'a str,
    experts: &'a [String],
}

#[derive(DeriveSerialize)]
struct ProposalDoc<'a> {
    id: &'a str,
    overall: &'a str,
    rank: usize,
    witness: WitnessDoc<'a>,
    unit_scores: BTreeMap<&'a str, &'a str>,
}

#[derive(DeriveSerialize)]
struct GroupDoc<'a> {
    rank: usize,
    grade: &'a str,
    proposals: &'a [String],
}

#[derive(DeriveSerialize)]
struct QuantifierDoc<'a> {
    kind: String,
    values: Vec<&'a str>,
}

#[derive(DeriveSerialize)]
struct ReportDoc<'a> {
    quantifier: Option<QuantifierDoc<'a>>,
    proposals: Vec<ProposalDoc<'a>>,
    ranking: Vec<GroupDoc<'a>>,
    findings: &'a [Finding],
}

impl Serialize for EvaluationReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let doc = ReportDoc {
            quantifier: self.quantifier.as_ref().map(|q| QuantifierDoc {
                kind: match q.kind() {
                    QuantifierKind::AtLeast(_) => "at-least".to_string(),
                    other => other.to_string(),
                },
                values: q.values().iter().map(|&g| self.label(g)).collect(),
            }),
            proposals: self
                .proposals
                .iter()
                .map(|p| ProposalDoc {
                    id: &p.id,
                    overall: self.label(p.overall),
                    rank: p.rank,
                    witness: WitnessDoc {
                        j: p.witness.j,
                        quantifier: self.label(p.witness.quantifier),
                        score: self.label(p.witness.score),
                        experts: &p.supporters,
                    },
                    unit_scores: p
                        .unit_scores
                        .iter()
                        .map(|(e, g)| (e.as_str(), self.label(*g)))
                        .collect(),
                })
                .collect(),
            ranking: self
                .ranking
                .iter()
                .map(|g| GroupDoc {
                    rank: g.rank,
                    grade: self.label(g.grade),
                    proposals: &g.proposals,
                })
                .collect(),
            findings: &self.findings,
        };
        doc.serialize(serializer)
    }
}

/// Groups proposals by overall grade, best first.
pub fn rank_groups<'a, I>(overall: I) -> Vec<RankGroup>
where
    I: IntoIterator<Item = (&'a str, Grade)>,
{
    let mut by_index: BTreeMap<usize, (Grade, Vec<String>)> = BTreeMap::new();
    for (id, g) in overall {
        by_index
            .entry(g.index())
            .or_insert_with(|| (g, Vec::new()))
            .1
            .push(id.to_string());
    }
    by_index
        .into_values()
        .rev()
        .enumerate()
        .map(|(i, (grade, mut proposals))| {
            proposals.sort();
            RankGroup {
                rank: i + 1,
                grade,
                proposals,
            }
        })
        .collect()
}

fn importance_findings(session: &Session) -> Vec<Finding> {
    match &session.importances {
        crate::session::Importances::Global(map) => {
            unit::validate_importances(&session.scale, map.values())
        }
        crate::session::Importances::PerExpert(by_expert) => session
            .experts
            .iter()
            .flat_map(|e| {
                let findings = by_expert
                    .get(&e.id)
                    .map(|map| unit::validate_importances(&session.scale, map.values()))
                    .unwrap_or_default();
                findings.into_iter().map(move |mut f| {
                    f.path = format!("importances.{}", e.id);
                    f
                })
            })
            .collect(),
    }
}

/// Evaluates every proposal of a session.
pub fn evaluate(session: &Session) -> Result<EvaluationReport, EvalError> {
    session.validate()?;
    let quantifier = if session.experts.is_empty() {
        None
    } else {
        Some(
            session
                .quantifier
                .build(session.experts.len(), &session.scale)
                .expect("validated session builds its quantifier"),
        )
    };
    let criteria: Vec<String> = session.criteria.iter().map(|c| c.id.clone()).collect();

    let mut proposals = Vec::with_capacity(session.proposals.len());
    for p in &session.proposals {
        let mut unit_scores = Vec::with_capacity(session.experts.len());
        for e in &session.experts {
            let importances = session
                .importances
                .for_expert(&e.id)
                .cloned()
                .unwrap_or_default();
            let scores = session
                .criteria
                .iter()
                .filter_map(|c| {
                    session
                        .scores
                        .get(&Cell::new(&p.id, &e.id, &c.id))
                        .map(|&g| (c.id.clone(), g))
                })
                .collect();
            let vector =
                CriterionVector::with_parts(&session.scale, criteria.clone(), importances, scores);
            let grade = vector
                .unit_score_with(session.missing_scores)
                .map_err(|source| EvalError::Unit {
                    proposal: p.id.clone(),
                    expert: e.id.clone(),
                    source,
                })?;
            unit_scores.push((e.id.clone(), grade));
        }

        let q = quantifier.as_ref().expect("proposals imply experts");
        let wrap = |source| EvalError::Aggregate {
            proposal: p.id.clone(),
            source,
        };
        let ordered =
            owa::order_scores(unit_scores.iter().map(|(e, g)| (e.as_str(), *g))).map_err(wrap)?;
        let agg = owa::owa_explained(&ordered, q).map_err(wrap)?;
        let supporters = ordered
            .provenance()
            .take(agg.witness.j)
            .map(str::to_string)
            .collect();
        proposals.push(ProposalResult {
            id: p.id.clone(),
            unit_scores,
            overall: agg.grade,
            witness: agg.witness,
            supporters,
            rank: 0,
        });
    }

    let ranking = rank_groups(proposals.iter().map(|p| (p.id.as_str(), p.overall)));
    for p in &mut proposals {
        p.rank = ranking
            .iter()
            .find(|g| g.grade == p.overall)
            .map(|g| g.rank)
            .expect("every overall grade has a group");
    }

    Ok(EvaluationReport {
        scale: session.scale.clone(),
        quantifier,
        proposals,
        ranking,
        findings: importance_findings(session),
    })
}
