//! The evaluation workspace and its JSON file format.
//!
//! A session holds proposals, criteria and experts, the grade every expert
//! gave every proposal on every criterion, the criterion importances, free
//! text notes, and the quantifier the decision maker chose. Importances are
//! either one global vector set by the decision maker or one vector per
//! expert.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::quantifier::QuantifierSpec;
use crate::scale::{Grade, OrdinalScale, ScaleLabel};
use crate::unit::MissingPolicy;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Criterion {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expert {
    pub id: String,
    #[serde(default)]
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Proposal {
    pub id: String,
    #[serde(default)]
    pub title: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImportanceMode {
    Global,
    PerExpert,
}

/// Criterion importances, assigned either by the decision maker or by each
/// expert for themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Importances {
    Global(BTreeMap<String, Grade>),
    PerExpert(BTreeMap<String, BTreeMap<String, Grade>>),
}

impl Importances {
    pub fn mode(&self) -> ImportanceMode {
        match self {
            Importances::Global(_) => ImportanceMode::Global,
            Importances::PerExpert(_) => ImportanceMode::PerExpert,
        }
    }

    /// The importance vector that applies to `expert`.
    pub fn for_expert(&self, expert: &str) -> Option<&BTreeMap<String, Grade>> {
        match self {
            Importances::Global(map) => Some(map),
            Importances::PerExpert(by_expert) => by_expert.get(expert),
        }
    }
}

/// One cell of the proposal × expert × criterion grid.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub proposal: String,
    pub expert: String,
    pub criterion: String,
}

impl Cell {
    pub fn new(
        proposal: impl Into<String>,
        expert: impl Into<String>,
        criterion: impl Into<String>,
    ) -> Self {
        Self {
            proposal: proposal.into(),
            expert: expert.into(),
            criterion: criterion.into(),
        }
    }

    /// Path naming this cell in diagnostics.
    pub fn path(&self) -> String {
        format!(
            "scores[proposal={},expert={},criterion={}]",
            self.proposal, self.expert, self.criterion
        )
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(proposal {}, expert {}, criterion {})",
            self.proposal, self.expert, self.criterion
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub scale: OrdinalScale,
    pub criteria: Vec<Criterion>,
    pub experts: Vec<Expert>,
    pub proposals: Vec<Proposal>,
    pub importances: Importances,
    pub quantifier: QuantifierSpec,
    pub scores: BTreeMap<Cell, Grade>,
    /// Free text attached to grid cells; stored verbatim and never read by
    /// any computation.
    pub notes: BTreeMap<Cell, String>,
    pub missing_scores: MissingPolicy,
}

/// A single problem found while checking a session or a patch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub problem: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, problem: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            problem: problem.into(),
        }
    }
}

/// Every violation found, not only the first.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} validation problem(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  {}: {}", v.path, v.problem)?;
        }
        Ok(())
    }
}

/// The document was not well-formed JSON or did not fit the schema.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message} (line {line}, column {column})")]
pub struct ParseError {
    pub path: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// Deserializes JSON with path and position context on failure.
pub fn parse_json<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, ParseError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        ParseError {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    de.end().map_err(|inner| ParseError {
        path: ".".to_string(),
        line: inner.line(),
        column: inner.column(),
        message: inner.to_string(),
    })?;
    Ok(value)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoreRecord {
    proposal: String,
    expert: String,
    criterion: String,
    grade: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoteRecord {
    proposal: String,
    expert: String,
    criterion: String,
    text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionDoc {
    format: u32,
    scale: Vec<ScaleLabel>,
    criteria: Vec<Criterion>,
    experts: Vec<Expert>,
    proposals: Vec<Proposal>,
    importance_mode: ImportanceMode,
    importances: BTreeMap<String, Value>,
    quantifier: QuantifierSpec,
    scores: Vec<ScoreRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    notes: Vec<NoteRecord>,
    #[serde(default, skip_serializing_if = "is_strict")]
    missing_scores: MissingPolicy,
}

fn is_strict(policy: &MissingPolicy) -> bool {
    *policy == MissingPolicy::Strict
}

fn resolve(
    scale: &OrdinalScale,
    text: &str,
    path: String,
    violations: &mut Vec<Violation>,
) -> Option<Grade> {
    match scale.parse(text) {
        Ok(g) => Some(g),
        Err(err) => {
            violations.push(Violation::new(path, err.to_string()));
            None
        }
    }
}

impl Session {
    pub fn importance_mode(&self) -> ImportanceMode {
        self.importances.mode()
    }

    pub fn label(&self, grade: Grade) -> &str {
        self.scale.label(grade).unwrap_or("<off-scale>")
    }

    /// Reads a session file.
    pub fn load(bytes: &[u8]) -> Result<Self, SessionError> {
        let doc: SessionDoc = parse_json(bytes)?;
        Ok(Self::from_doc(doc)?)
    }

    pub fn load_str(text: &str) -> Result<Self, SessionError> {
        Self::load(text.as_bytes())
    }

    /// Writes the session file. Grades are written as their canonical labels.
    pub fn save(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(&self.to_doc()).expect("document serializes");
        out.push(b'\n');
        out
    }

    fn to_doc(&self) -> SessionDoc {
        let label = |g: Grade| Value::String(self.label(g).to_string());
        let importances = match &self.importances {
            Importances::Global(map) => map.iter().map(|(c, &g)| (c.clone(), label(g))).collect(),
            Importances::PerExpert(by_expert) => by_expert
                .iter()
                .map(|(e, map)| {
                    let inner = map
                        .iter()
                        .map(|(c, &g)| (c.clone(), label(g)))
                        .collect::<serde_json::Map<_, _>>();
                    (e.clone(), Value::Object(inner))
                })
                .collect(),
        };
        SessionDoc {
            format: FORMAT_VERSION,
            scale: self.scale.labels().to_vec(),
            criteria: self.criteria.clone(),
            experts: self.experts.clone(),
            proposals: self.proposals.clone(),
            importance_mode: self.importance_mode(),
            importances,
            quantifier: self.quantifier.clone(),
            scores: self
                .scores
                .iter()
                .map(|(cell, &g)| ScoreRecord {
                    proposal: cell.proposal.clone(),
                    expert: cell.expert.clone(),
                    criterion: cell.criterion.clone(),
                    grade: self.label(g).to_string(),
                })
                .collect(),
            notes: self
                .notes
                .iter()
                .map(|(cell, text)| NoteRecord {
                    proposal: cell.proposal.clone(),
                    expert: cell.expert.clone(),
                    criterion: cell.criterion.clone(),
                    text: text.clone(),
                })
                .collect(),
            missing_scores: self.missing_scores,
        }
    }

    fn from_doc(doc: SessionDoc) -> Result<Self, ValidationError> {
        let mut violations = Vec::new();
        if doc.format != FORMAT_VERSION {
            violations.push(Violation::new(
                "format",
                format!(
                    "unsupported format {}, expected {FORMAT_VERSION}",
                    doc.format
                ),
            ));
        }
        let scale = match OrdinalScale::with_aliases(doc.scale) {
            Ok(scale) => scale,
            Err(err) => {
                violations.push(Violation::new("scale", err.to_string()));
                return Err(ValidationError { violations });
            }
        };

        let importances = match doc.importance_mode {
            ImportanceMode::Global => {
                let mut map = BTreeMap::new();
                for (criterion, value) in &doc.importances {
                    let path = format!("importances.{criterion}");
                    match value {
                        Value::String(text) => {
                            if let Some(g) = resolve(&scale, text, path, &mut violations) {
                                map.insert(criterion.clone(), g);
                            }
                        }
                        _ => violations.push(Violation::new(
                            path,
                            "expected a grade label in global importance mode",
                        )),
                    }
                }
                Importances::Global(map)
            }
            ImportanceMode::PerExpert => {
                let mut by_expert = BTreeMap::new();
                for (expert, value) in &doc.importances {
                    let Value::Object(inner) = value else {
                        violations.push(Violation::new(
                            format!("importances.{expert}"),
                            "expected an object of criterion grades in per-expert importance mode",
                        ));
                        continue;
                    };
                    let mut map = BTreeMap::new();
                    for (criterion, value) in inner {
                        let path = format!("importances.{expert}.{criterion}");
                        match value.as_str() {
                            Some(text) => {
                                if let Some(g) = resolve(&scale, text, path, &mut violations) {
                                    map.insert(criterion.clone(), g);
                                }
                            }
                            None => violations.push(Violation::new(path, "expected a grade label")),
                        }
                    }
                    by_expert.insert(expert.clone(), map);
                }
                Importances::PerExpert(by_expert)
            }
        };

        // Cells whose record was present but unusable; not reported again as
        // missing.
        let mut damaged = BTreeSet::new();
        let mut scores = BTreeMap::new();
        for (i, rec) in doc.scores.into_iter().enumerate() {
            let cell = Cell::new(rec.proposal, rec.expert, rec.criterion);
            let path = format!("scores[{i}].grade");
            match scale.parse(&rec.grade) {
                Ok(g) => {
                    if scores.insert(cell.clone(), g).is_some() {
                        violations.push(Violation::new(
                            format!("scores[{i}]"),
                            format!("duplicate score for cell {cell}"),
                        ));
                    }
                }
                Err(err) => {
                    violations.push(Violation::new(path, format!("cell {cell}: {err}")));
                    damaged.insert(cell);
                }
            }
        }
        let mut notes = BTreeMap::new();
        for (i, rec) in doc.notes.into_iter().enumerate() {
            let cell = Cell::new(rec.proposal, rec.expert, rec.criterion);
            if notes.insert(cell.clone(), rec.text).is_some() {
                violations.push(Violation::new(
                    format!("notes[{i}]"),
                    format!("duplicate note for cell {cell}"),
                ));
            }
        }

        let session = Session {
            scale,
            criteria: doc.criteria,
            experts: doc.experts,
            proposals: doc.proposals,
            importances,
            quantifier: doc.quantifier,
            scores,
            notes,
            missing_scores: doc.missing_scores,
        };
        let reported: BTreeSet<String> = violations.iter().map(|v| v.path.clone()).collect();
        let mut structural = Vec::new();
        session.check(&damaged, &mut structural);
        violations.extend(
            structural
                .into_iter()
                .filter(|v| !reported.contains(&v.path)),
        );
        if violations.is_empty() {
            Ok(session)
        } else {
            Err(ValidationError { violations })
        }
    }

    /// Checks every session invariant and reports all violations.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut violations = Vec::new();
        self.check(&BTreeSet::new(), &mut violations);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { violations })
        }
    }

    fn check(&self, damaged: &BTreeSet<Cell>, out: &mut Vec<Violation>) {
        let criteria = unique_ids("criteria", self.criteria.iter().map(|c| c.id.as_str()), out);
        let experts = unique_ids("experts", self.experts.iter().map(|e| e.id.as_str()), out);
        let proposals = unique_ids(
            "proposals",
            self.proposals.iter().map(|p| p.id.as_str()),
            out,
        );

        let check_vector = |path: &str, map: &BTreeMap<String, Grade>, out: &mut Vec<Violation>| {
            for (criterion, &g) in map {
                if !criteria.contains(criterion.as_str()) {
                    out.push(Violation::new(
                        format!("{path}.{criterion}"),
                        "unknown criterion",
                    ));
                }
                if !self.scale.contains(g) {
                    out.push(Violation::new(
                        format!("{path}.{criterion}"),
                        "grade is not on the session scale",
                    ));
                }
            }
            for c in &self.criteria {
                if !map.contains_key(&c.id) {
                    out.push(Violation::new(
                        format!("{path}.{}", c.id),
                        "missing importance",
                    ));
                }
            }
        };
        match &self.importances {
            Importances::Global(map) => check_vector("importances", map, out),
            Importances::PerExpert(by_expert) => {
                for (expert, map) in by_expert {
                    if !experts.contains(expert.as_str()) {
                        out.push(Violation::new(
                            format!("importances.{expert}"),
                            "unknown expert",
                        ));
                    }
                    check_vector(&format!("importances.{expert}"), map, out);
                }
                for e in &self.experts {
                    if !by_expert.contains_key(&e.id) {
                        out.push(Violation::new(
                            format!("importances.{}", e.id),
                            "missing importance vector for expert",
                        ));
                    }
                }
            }
        }

        if self.experts.is_empty() {
            if !self.proposals.is_empty() {
                out.push(Violation::new(
                    "experts",
                    "at least one expert is needed to evaluate proposals",
                ));
            }
        } else if let Err(err) = self.quantifier.build(self.experts.len(), &self.scale) {
            out.push(Violation::new("quantifier", err.to_string()));
        }

        let cell_ids = |cell: &Cell, what: &str, out: &mut Vec<Violation>| {
            let path = match what {
                "note" => format!(
                    "notes[proposal={},expert={},criterion={}]",
                    cell.proposal, cell.expert, cell.criterion
                ),
                _ => cell.path(),
            };
            let mut ok = true;
            if !proposals.contains(cell.proposal.as_str()) {
                out.push(Violation::new(
                    format!("{path}.proposal"),
                    format!("unknown proposal {:?}", cell.proposal),
                ));
                ok = false;
            }
            if !experts.contains(cell.expert.as_str()) {
                out.push(Violation::new(
                    format!("{path}.expert"),
                    format!("unknown expert {:?}", cell.expert),
                ));
                ok = false;
            }
            if !criteria.contains(cell.criterion.as_str()) {
                out.push(Violation::new(
                    format!("{path}.criterion"),
                    format!("unknown criterion {:?}", cell.criterion),
                ));
                ok = false;
            }
            ok
        };
        for (cell, &g) in &self.scores {
            if cell_ids(cell, "score", out) && !self.scale.contains(g) {
                out.push(Violation::new(
                    cell.path(),
                    "grade is not on the session scale",
                ));
            }
        }
        for cell in self.notes.keys() {
            cell_ids(cell, "note", out);
        }

        for p in &self.proposals {
            for e in &self.experts {
                let mut scored = 0;
                for c in &self.criteria {
                    let cell = Cell::new(&p.id, &e.id, &c.id);
                    if self.scores.contains_key(&cell) || damaged.contains(&cell) {
                        scored += 1;
                    } else if self.missing_scores == MissingPolicy::Strict {
                        out.push(Violation::new(
                            cell.path(),
                            format!("missing score for cell {cell}"),
                        ));
                    }
                }
                if self.missing_scores == MissingPolicy::Lenient
                    && scored == 0
                    && !self.criteria.is_empty()
                {
                    out.push(Violation::new(
                        format!("scores[proposal={},expert={}]", p.id, e.id),
                        "expert scored no criterion of this proposal",
                    ));
                }
            }
        }
    }
}

fn unique_ids<'a>(
    list: &str,
    ids: impl Iterator<Item = &'a str>,
    out: &mut Vec<Violation>,
) -> HashSet<&'a str> {
    let mut seen = HashSet::new();
    for (i, id) in ids.enumerate() {
        if id.trim().is_empty() {
            out.push(Violation::new(format!("{list}[{i}].id"), "empty id"));
        } else if !seen.insert(id) {
            out.push(Violation::new(
                format!("{list}[{i}].id"),
                format!("duplicate id {id:?}"),
            ));
        }
    }
    seen
}
