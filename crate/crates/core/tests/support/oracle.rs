//! Brute-force re-evaluation of both aggregation stages on bare grade
//! indices. Nothing here calls into the library under test.

#![allow(dead_code)]

/// Quantifier shapes the oracle knows how to tabulate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleQ {
    All,
    Any,
    AtLeast(usize),
    Average,
    Custom(Vec<usize>),
}

/// `min_j max(n + 1 - importance_j, score_j)`, starting from `n`.
pub fn unit(n: usize, importances: &[usize], scores: &[usize]) -> usize {
    assert_eq!(importances.len(), scores.len());
    let mut result = n;
    for (&imp, &score) in importances.iter().zip(scores) {
        let negated = n + 1 - imp;
        let term = if negated > score { negated } else { score };
        if term < result {
            result = term;
        }
    }
    result
}

/// `Q(0..=r)` as indices. The average form rounds `1 + k(n-1)/r` with
/// `f64::round`, which sends halves away from zero.
pub fn q_table(q: &OracleQ, n: usize, r: usize) -> Vec<usize> {
    match q {
        OracleQ::All => (0..=r).map(|i| if i == r { n } else { 1 }).collect(),
        OracleQ::Any => (0..=r).map(|i| if i >= 1 { n } else { 1 }).collect(),
        OracleQ::AtLeast(m) => (0..=r).map(|i| if i >= *m { n } else { 1 }).collect(),
        OracleQ::Average => (0..=r)
            .map(|k| (1.0 + (k as f64) * ((n - 1) as f64) / (r as f64)).round() as usize)
            .collect(),
        OracleQ::Custom(values) => values.clone(),
    }
}

/// `max_j min(Q(j), B_j)` with `B` the scores sorted descending.
pub fn owa(q: &[usize], scores: &[usize]) -> usize {
    let mut b = scores.to_vec();
    b.sort_unstable_by(|x, y| y.cmp(x));
    let mut best = 0;
    for j in 1..=b.len() {
        let term = if q[j] < b[j - 1] { q[j] } else { b[j - 1] };
        if term > best {
            best = term;
        }
    }
    best
}

/// Full two-stage evaluation of a grid `scores[proposal][expert][criterion]`
/// with importances `importances[expert][criterion]`.
pub fn evaluate_grid(
    n: usize,
    q: &OracleQ,
    importances: &[Vec<usize>],
    scores: &[Vec<Vec<usize>>],
) -> (Vec<Vec<usize>>, Vec<usize>) {
    let r = importances.len();
    let table = q_table(q, n, r);
    let units: Vec<Vec<usize>> = scores
        .iter()
        .map(|by_expert| {
            by_expert
                .iter()
                .zip(importances)
                .map(|(s, imp)| unit(n, imp, s))
                .collect()
        })
        .collect();
    let overall = units.iter().map(|u| owa(&table, u)).collect();
    (units, overall)
}
