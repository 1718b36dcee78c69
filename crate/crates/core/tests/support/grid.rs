//! Builds sessions from bare index grids.

#![allow(dead_code)]

use std::collections::BTreeMap;

use ordagg_core::{
    Cell, Criterion, Expert, Importances, MissingPolicy, OrdinalScale, Proposal, QuantifierSpec,
    Session,
};

pub fn scale(n: usize) -> OrdinalScale {
    if n == 7 {
        return OrdinalScale::seven_point();
    }
    OrdinalScale::new((1..=n).map(|i| format!("g{i}"))).unwrap()
}

pub fn criterion_id(c: usize) -> String {
    format!("c{}", c + 1)
}

pub fn expert_id(e: usize) -> String {
    format!("e{}", e + 1)
}

pub fn proposal_id(p: usize) -> String {
    format!("p{}", p + 1)
}

/// `importances[expert][criterion]`, `scores[proposal][expert][criterion]`.
/// With `per_expert == false` the first expert's vector becomes the global
/// one.
pub fn session(
    n: usize,
    quantifier: QuantifierSpec,
    per_expert: bool,
    importances: &[Vec<usize>],
    scores: &[Vec<Vec<usize>>],
) -> Session {
    let scale = scale(n);
    let experts = importances.len();
    let criteria = importances.first().map_or(0, Vec::len);
    let vector = |v: &Vec<usize>| -> BTreeMap<String, _> {
        v.iter()
            .enumerate()
            .map(|(c, &i)| (criterion_id(c), scale.grade(i).unwrap()))
            .collect()
    };
    let importances = if per_expert {
        Importances::PerExpert(
            importances
                .iter()
                .enumerate()
                .map(|(e, v)| (expert_id(e), vector(v)))
                .collect(),
        )
    } else {
        Importances::Global(importances.first().map(vector).unwrap_or_default())
    };
    let mut cells = BTreeMap::new();
    for (p, by_expert) in scores.iter().enumerate() {
        for (e, row) in by_expert.iter().enumerate() {
            for (c, &g) in row.iter().enumerate() {
                cells.insert(
                    Cell::new(proposal_id(p), expert_id(e), criterion_id(c)),
                    scale.grade(g).unwrap(),
                );
            }
        }
    }
    Session {
        criteria: (0..criteria)
            .map(|c| Criterion {
                id: criterion_id(c),
                title: format!("criterion {}", c + 1),
                description: String::new(),
            })
            .collect(),
        experts: (0..experts)
            .map(|e| Expert {
                id: expert_id(e),
                name: format!("expert {}", e + 1),
            })
            .collect(),
        proposals: (0..scores.len())
            .map(|p| Proposal {
                id: proposal_id(p),
                title: format!("proposal {}", p + 1),
            })
            .collect(),
        importances,
        quantifier,
        scores: cells,
        notes: BTreeMap::new(),
        missing_scores: MissingPolicy::Strict,
        scale,
    }
}
