//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

#[path = "../../core/tests/support/grid.rs"]
mod grid;
#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use oracle::OracleQ;
use ordagg_core::{
    aggregate, evaluate, gmax, gmin, neg, CriterionVector, Grade, OrdinalScale, Quantifier,
    QuantifierSpec, Session, TUTORIAL_SESSION,
};
use ordagg_service::{router, AppState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tower::ServiceExt;

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn s7() -> OrdinalScale {
    OrdinalScale::seven_point()
}

fn parse_all(s: &OrdinalScale, text: &str) -> Vec<Grade> {
    text.split(',').map(|t| s.parse(t).unwrap()).collect()
}

fn labels(s: &OrdinalScale, grades: &[Grade]) -> Vec<String> {
    grades
        .iter()
        .map(|&g| s.label(g).unwrap().to_string())
        .collect()
}

fn negation_table() -> Result<String, String> {
    let started = Instant::now();
    let s = s7();
    let input = parse_all(&s, "P,VH,H,M,L,VL,N");
    let expected = parse_all(&s, "N,VL,L,M,H,VH,P");
    let got: Vec<Grade> = input.iter().map(|&g| neg(g)).collect();
    ensure!(got == expected, "got {:?}", labels(&s, &got));
    // the table above lists every grade of the scale
    ensure!(input.len() == s.len(), "table is not exhaustive");
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("7/7 grades, {elapsed:?}"))
}

fn worked_unit_example() -> Result<String, String> {
    let s = s7();
    let scores = parse_all(&s, "H,M,L,P,VH,P");
    let base = CriterionVector::from_pairs(&s, &parse_all(&s, "P,VH,VH,M,L,L"), &scores)
        .unit_score()
        .map_err(|e| e.to_string())?;
    ensure!(
        base == s.parse("L").unwrap(),
        "base example gave {}",
        s.label(base).unwrap()
    );
    let variant = CriterionVector::from_pairs(&s, &parse_all(&s, "P,VH,L,M,L,L"), &scores)
        .unit_score()
        .map_err(|e| e.to_string())?;
    ensure!(
        variant == s.parse("M").unwrap(),
        "variant gave {}",
        s.label(variant).unwrap()
    );
    Ok("Low, then Medium with criterion 3 at Low".into())
}

fn average_tables() -> Result<String, String> {
    let s = s7();
    for (r, expected) in [
        (3, vec![1, 3, 5, 7]),
        (4, vec![1, 3, 4, 6, 7]),
        (10, vec![1, 2, 2, 3, 3, 4, 5, 5, 6, 6, 7]),
    ] {
        let q = Quantifier::average(r, &s).map_err(|e| e.to_string())?;
        let got: Vec<usize> = q.values().iter().map(|g| g.index()).collect();
        ensure!(got == expected, "r={r}: got {got:?}, want {expected:?}");
    }
    Ok("r = 3, 4, 10 at n = 7".into())
}

fn owa_example() -> Result<String, String> {
    let s = s7();
    let q = Quantifier::average(4, &s).map_err(|e| e.to_string())?;
    let scores = parse_all(&s, "M,H,L,VH");
    let ids = ["A1", "A2", "A3", "A4"];
    let agg = aggregate(ids.into_iter().zip(scores), &q).map_err(|e| e.to_string())?;
    ensure!(
        agg.grade == s.parse("M").unwrap(),
        "got {}",
        s.label(agg.grade).unwrap()
    );
    Ok(format!("Medium, witness j = {}", agg.witness.j))
}

fn random_quantifier(rng: &mut impl Rng, n: usize, r: usize) -> OracleQ {
    match rng.random_range(0..5) {
        0 => OracleQ::All,
        1 => OracleQ::Any,
        2 => OracleQ::Average,
        3 => OracleQ::AtLeast(rng.random_range(1..=r)),
        _ => {
            let mut v: Vec<usize> = (0..r).map(|_| rng.random_range(1..=n)).collect();
            v.push(n);
            v.sort_unstable();
            OracleQ::Custom(v)
        }
    }
}

fn spec_for(q: &OracleQ, s: &OrdinalScale) -> QuantifierSpec {
    match q {
        OracleQ::All => QuantifierSpec::All,
        OracleQ::Any => QuantifierSpec::Any,
        OracleQ::Average => QuantifierSpec::Average,
        OracleQ::AtLeast(m) => QuantifierSpec::AtLeast { m: *m },
        OracleQ::Custom(v) => QuantifierSpec::Custom {
            values: v
                .iter()
                .map(|&i| s.label(s.grade(i).unwrap()).unwrap().to_string())
                .collect(),
        },
    }
}

/// Compares `evaluate` with the oracle on one grid; returns false on mismatch.
fn agrees(
    n: usize,
    q: &OracleQ,
    per_expert: bool,
    importances: &[Vec<usize>],
    scores: &[Vec<Vec<usize>>],
) -> Result<bool, String> {
    let spec = spec_for(q, &grid::scale(n));
    let session = grid::session(n, spec, per_expert, importances, scores);
    let report = evaluate(&session).map_err(|e| e.to_string())?;
    // in global mode every expert uses the first vector
    let effective: Vec<Vec<usize>> = if per_expert {
        importances.to_vec()
    } else {
        vec![importances[0].clone(); importances.len()]
    };
    let (units, overall) = oracle::evaluate_grid(n, q, &effective, scores);
    for (p, row) in units.iter().enumerate() {
        let pid = grid::proposal_id(p);
        for (e, &u) in row.iter().enumerate() {
            if report
                .unit_score(&pid, &grid::expert_id(e))
                .map(|g| g.index())
                != Some(u)
            {
                return Ok(false);
            }
        }
        if report.overall(&pid).map(|g| g.index()) != Some(overall[p]) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn decode(mut code: usize, len: usize, n: usize) -> Vec<usize> {
    (0..len)
        .map(|_| {
            let v = code % n + 1;
            code /= n;
            v
        })
        .collect()
}

fn oracle_equivalence() -> Result<String, String> {
    let started = Instant::now();
    let n: usize = 3;
    let mut checked = 0usize;
    let mut mismatches = 0usize;

    // Exhaustive over every grid with at most 8 free grades (global mode).
    for r in 1..=3 {
        for criteria in 1..=3 {
            for proposals in 1..=2 {
                let free = criteria + proposals * r * criteria;
                if free > 8 {
                    continue;
                }
                let mut forms = vec![OracleQ::All, OracleQ::Any, OracleQ::Average];
                forms.extend((1..=r).map(OracleQ::AtLeast));
                for code in 0..n.pow(free as u32) {
                    let flat = decode(code, free, n);
                    let (imp, rest) = flat.split_at(criteria);
                    let importances = vec![imp.to_vec(); r];
                    let scores: Vec<Vec<Vec<usize>>> = rest
                        .chunks(r * criteria)
                        .map(|p| p.chunks(criteria).map(<[usize]>::to_vec).collect())
                        .collect();
                    for q in &forms {
                        checked += 1;
                        if !agrees(n, q, false, &importances, &scores)? {
                            mismatches += 1;
                        }
                    }
                }
            }
        }
    }
    let exhaustive = checked;

    // Sampled over the full box, both importance modes, all quantifier forms.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..20_000 {
        let r = rng.random_range(1..=3);
        let criteria = rng.random_range(0..=3);
        let proposals = rng.random_range(1..=2);
        let per_expert = rng.random_bool(0.5);
        let importances: Vec<Vec<usize>> = (0..r)
            .map(|_| (0..criteria).map(|_| rng.random_range(1..=n)).collect())
            .collect();
        let scores: Vec<Vec<Vec<usize>>> = (0..proposals)
            .map(|_| {
                (0..r)
                    .map(|_| (0..criteria).map(|_| rng.random_range(1..=n)).collect())
                    .collect()
            })
            .collect();
        let q = random_quantifier(&mut rng, n, r);
        checked += 1;
        if !agrees(n, &q, per_expert, &importances, &scores)? {
            mismatches += 1;
        }
    }
    let elapsed = started.elapsed();
    ensure!(mismatches == 0, "{mismatches} mismatches out of {checked}");
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "{checked} grids ({exhaustive} exhaustive, {} sampled), 0 mismatches, {elapsed:?}",
        checked - exhaustive
    ))
}

fn owa_index(n: usize, scores: &[usize], q: &Quantifier) -> usize {
    let s = grid::scale(n);
    let ids: Vec<String> = (0..scores.len()).map(|e| format!("e{e}")).collect();
    let grades = scores.iter().map(|&i| s.grade(i).unwrap());
    aggregate(ids.iter().map(String::as_str).zip(grades), q)
        .unwrap()
        .grade
        .index()
}

fn unit_index(n: usize, imp: &[usize], sc: &[usize]) -> usize {
    let s = grid::scale(n);
    let g = |v: &[usize]| v.iter().map(|&i| s.grade(i).unwrap()).collect::<Vec<_>>();
    CriterionVector::from_pairs(&s, &g(imp), &g(sc))
        .unit_score()
        .unwrap()
        .index()
}

fn property_suites() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut cases = 0usize;
    for n in 2..=9 {
        let s = grid::scale(n);
        for a in s.grades() {
            ensure!(neg(neg(a)) == a, "involution fails at n={n}");
            for b in s.grades() {
                if a > b {
                    ensure!(
                        neg(a).try_cmp(neg(b)) == Ok(std::cmp::Ordering::Less),
                        "order reversal fails at n={n}"
                    );
                }
                ensure!(
                    neg(gmax(a, b).unwrap()) == gmin(neg(a), neg(b)).unwrap(),
                    "De Morgan fails at n={n}"
                );
                cases += 1;
            }
        }

        for _ in 0..300 {
            let len = rng.random_range(1..=5);
            let imp: Vec<usize> = (0..len).map(|_| rng.random_range(1..=n)).collect();
            let sc: Vec<usize> = (0..len).map(|_| rng.random_range(1..=n)).collect();
            let j = rng.random_range(0..len);
            let base = unit_index(n, &imp, &sc);
            if sc[j] < n {
                let mut up = sc.clone();
                up[j] += 1;
                ensure!(
                    unit_index(n, &imp, &up) >= base,
                    "unit not monotone: {imp:?} {sc:?}"
                );
            }
            if imp[j] < n {
                let mut up = imp.clone();
                up[j] += 1;
                ensure!(
                    unit_index(n, &up, &sc) <= base,
                    "unit not antitone: {imp:?} {sc:?}"
                );
            }
            cases += 1;
        }

        for r in 1..=6 {
            let mut forms = vec![
                Quantifier::all(r, &s).unwrap(),
                Quantifier::any(r, &s).unwrap(),
                Quantifier::average(r, &s).unwrap(),
            ];
            forms.extend((1..=r).map(|m| Quantifier::at_least(m, r, &s).unwrap()));
            for _ in 0..60 {
                let scores: Vec<usize> = (0..r).map(|_| rng.random_range(1..=n)).collect();
                let mut sorted = scores.clone();
                sorted.sort_unstable_by(|a, b| b.cmp(a));
                let mut shuffled = scores.clone();
                shuffled.rotate_left(rng.random_range(0..r));
                shuffled.swap(0, rng.random_range(0..r));
                let j = rng.random_range(0..r);
                let g = rng.random_range(1..=n);
                for q in &forms {
                    let v = owa_index(n, &scores, q);
                    ensure!(
                        sorted[r - 1] <= v && v <= sorted[0],
                        "OWA unbounded: {scores:?}"
                    );
                    ensure!(
                        owa_index(n, &shuffled, q) == v,
                        "OWA not symmetric: {scores:?}"
                    );
                    ensure!(owa_index(n, &vec![g; r], q) == g, "OWA not idempotent");
                    if scores[j] < n {
                        let mut up = scores.clone();
                        up[j] += 1;
                        ensure!(owa_index(n, &up, q) >= v, "OWA not monotone: {scores:?}");
                    }
                    for q2 in &forms {
                        if q.pointwise_le(q2) {
                            ensure!(
                                owa_index(n, &scores, q2) >= v,
                                "quantifier order not lifted"
                            );
                        }
                    }
                    cases += 1;
                }
                for m in 1..=r {
                    let q = Quantifier::at_least(m, r, &s).unwrap();
                    ensure!(
                        owa_index(n, &scores, &q) == sorted[m - 1],
                        "at-least {m} misses B_m"
                    );
                }
            }
        }
    }
    Ok(format!("{cases} cases over n in 2..=9, r in 1..=6"))
}

async fn service_report(session: Session) -> Result<String, String> {
    let app = router(Arc::new(AppState::with_session(session, None)), None);
    let resp = app
        .oneshot(
            Request::get("/api/report")
                .body(Body::empty())
                .map_err(|e| e.to_string())?,
        )
        .await
        .map_err(|e| e.to_string())?;
    ensure!(resp.status() == StatusCode::OK, "status {}", resp.status());
    let bytes = resp
        .into_body()
        .collect()
        .await
        .map_err(|e| e.to_string())?
        .to_bytes();
    String::from_utf8(bytes.to_vec()).map_err(|e| e.to_string())
}

fn round_trip_and_determinism() -> Result<String, String> {
    let session = Session::load_str(TUTORIAL_SESSION).map_err(|e| e.to_string())?;
    let reloaded = Session::load(&session.save()).map_err(|e| e.to_string())?;
    ensure!(reloaded == session, "save then load changed the session");

    let first = evaluate(&session).map_err(|e| e.to_string())?.to_json();
    for _ in 0..10 {
        let again = evaluate(&session).map_err(|e| e.to_string())?.to_json();
        ensure!(again == first, "evaluate output differs between runs");
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("tutorial.json");
    std::fs::write(&path, TUTORIAL_SESSION).map_err(|e| e.to_string())?;
    let out = Command::new(env!("CARGO_BIN_EXE_ordagg"))
        .args([
            "evaluate",
            "--session",
            path.to_str().unwrap(),
            "--output",
            "json",
        ])
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "CLI exited with {}", out.status);
    let cli = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;

    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let api = runtime.block_on(service_report(session))?;
    let cli_json: serde_json::Value = serde_json::from_str(&cli).map_err(|e| e.to_string())?;
    let api_json: serde_json::Value = serde_json::from_str(&api).map_err(|e| e.to_string())?;
    ensure!(cli_json == api_json, "CLI and service reports differ");
    ensure!(cli == api, "CLI and service reports differ in bytes");
    Ok("round trip exact, 10 runs identical, CLI == GET /api/report".into())
}

fn nothing_excluded() -> Result<String, String> {
    Ok("every reported result is a finite table or single example, covered above".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, Check); 8] = [
        ("AC1", "negation table", negation_table),
        (
            "AC2",
            "unit-score worked example and variant",
            worked_unit_example,
        ),
        ("AC3", "average quantifier tables", average_tables),
        ("AC4", "OWA four-expert example", owa_example),
        ("AC5", "oracle equivalence on n=3 grids", oracle_equivalence),
        ("AC6", "property suites", property_suites),
        (
            "AC7",
            "round trip and determinism",
            round_trip_and_determinism,
        ),
        ("AC8", "no desk-scale exclusions", nothing_excluded),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS  {id}  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {id}  {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
