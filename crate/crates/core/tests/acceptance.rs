//! Acceptance run: one pass/fail line per criterion.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use octahedron::cli;
use octahedron::surface::generic_data;
use octahedron::tsystem::{laurent_violations, solve, Method, Point};
use octahedron::verify::{
    check_equivalence, check_identities, check_periodicity, check_positivity, run_suite, DataMode, EquivalencePlan,
    Report, SuiteParams, POSITIVITY_RESTRICTED,
};
use octahedron::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn failures(rep: &Report) -> String {
    let firsts: Vec<&str> = rep.cases.iter().filter(|c| !c.pass).take(3).map(|c| c.description.as_str()).collect();
    if firsts.is_empty() {
        String::new()
    } else {
        format!(", first failures: {}", firsts.join("; "))
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    if took > limit {
        out.pass = false;
        out.detail = format!("{} (took {took:?}, limit {limit:?})", out.detail);
    } else {
        out.detail = format!("{} in {:.2?}", out.detail, took);
    }
    out
}

/// Symbolic solutions collected for the positivity criterion.
#[derive(Default)]
struct Collected {
    sets: Vec<(Vec<(String, LaurentPoly)>, VarTable)>,
}

/// The worked example at `(3,0,3)`: the eight-term minor times `d i / b`,
/// with the letters naming sites of the flat surface.
fn worked_example(table: &mut VarTable) -> LaurentPoly {
    let sites: HashMap<char, (i64, i64)> = [
        ('a', (1, 0)),
        ('b', (2, -1)),
        ('c', (2, 0)),
        ('d', (2, 1)),
        ('e', (3, -2)),
        ('f', (3, -1)),
        ('g', (3, 0)),
        ('h', (3, 1)),
        ('i', (3, 2)),
        ('k', (4, -1)),
        ('l', (4, 0)),
        ('m', (4, 1)),
        ('n', (5, 0)),
    ]
    .into_iter()
    .collect();
    let mut word = |w: &str| -> LaurentPoly {
        w.chars().fold(LaurentPoly::one(), |acc, ch| {
            let (i, j) = sites[&ch];
            &acc * &table.var_named(&format!("t[{i},{j}]"))
        })
    };
    let terms = [
        ("beg", "dfh"),
        ("bem", "fhi"),
        ("bbk", "dfh"),
        ("bbmk", "fghi"),
        ("bbn", "cil"),
        ("abgn", "cdil"),
        ("abmk", "cdil"),
        ("bbmk", "cgil"),
    ];
    let mut minor = LaurentPoly::zero();
    for (num, den) in terms {
        minor = &minor + &(&word(num) * &word(den).inverse().unwrap());
    }
    &minor * &(&word("di") * &word("b").inverse().unwrap())
}

fn criterion_worked_example(collected: &mut Collected) -> Outcome {
    let w = Window::new(-4, 10, -8, 8);
    let mut table = VarTable::new();
    let data = generic_data(w, &mut table);
    let surface = SteppedSurface::flat(SurfaceKind::Ainf, w, 0).unwrap();
    let p = Point::new(3, 0, 3);
    let (minor, oracle) = match (solve(Method::FlatMinor, &surface, &data, p), solve(Method::Oracle, &surface, &data, p)) {
        (Ok(a), Ok(b)) => (a.value, b.value),
        (Err(e), _) | (_, Err(e)) => return outcome(false, format!("solve failed: {e}")),
    };
    let want = worked_example(&mut table);
    let same_text = minor.canonical_text(&table) == oracle.canonical_text(&table);
    collected.sets.push((vec![("worked example T(3,0,3)".into(), oracle.clone())], table));
    outcome(
        same_text && minor == want && minor.len() == 8,
        format!("flat-minor {} terms, oracle text identical: {same_text}, matches the worked example: {}", minor.len(), minor == want),
    )
}

fn criterion_identities() -> Outcome {
    match check_identities(1, 5, 4) {
        Ok(rep) => outcome(rep.passed(), format!("{} identities hold, {} fail{}", rep.summary.passed, rep.summary.failed, failures(&rep))),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn criterion_agreement(collected: &mut Collected) -> Outcome {
    let plan = EquivalencePlan::default();
    match check_equivalence(2024, plan) {
        Ok((rep, values, table)) => {
            let queries = rep.cases.iter().filter(|c| c.description.contains(": oracle")).count();
            let truncated = rep
                .cases
                .iter()
                .filter(|c| c.description.contains("truncated shadow: oracle"))
                .count();
            collected.sets.push((values, table));
            outcome(
                rep.passed() && queries >= 50 && truncated >= 5,
                format!(
                    "{queries} queries, {truncated} truncated shadows, {} failed cases{}",
                    rep.summary.failed,
                    failures(&rep)
                ),
            )
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn criterion_periodicity(collected: &mut Collected) -> Outcome {
    let mut total = Report::new("periodicity");
    let mut periods = Vec::new();
    let symbolic = [(1, 1), (1, 2), (1, 3), (2, 2)];
    let rational = [(2, 3), (3, 3)];
    let cases = symbolic
        .iter()
        .map(|&p| (p, DataMode::Symbolic))
        .chain(rational.iter().map(|&p| (p, DataMode::Rational { seed: 17 })));
    for ((r, l), mode) in cases {
        match check_periodicity(r, l, mode, 1_000_000) {
            Ok((rep, orbit, table)) => {
                for c in &rep.cases {
                    if let Some(pos) = c.description.find("minimal period ") {
                        let rest = &c.description[pos + 15..];
                        periods.push(format!("({r},{l}):{}", rest.split_whitespace().next().unwrap_or("?")));
                    }
                }
                total.merge(rep);
                if !orbit.is_empty() {
                    collected.sets.push((orbit, table));
                }
            }
            Err(e) => return outcome(false, format!("({r},{l}) error: {e}")),
        }
    }
    outcome(
        total.passed(),
        format!("{} checks, minimal periods {}{}", total.summary.passed + total.summary.failed, periods.join(" "), failures(&total)),
    )
}

fn criterion_positivity(collected: &Collected) -> Outcome {
    let mut total = Report::new("positivity");
    for (values, table) in &collected.sets {
        total.merge(check_positivity(values, table));
    }
    for (r, l) in POSITIVITY_RESTRICTED {
        match check_periodicity(r, l, DataMode::Symbolic, 1_000_000) {
            Ok((_, orbit, table)) => total.merge(check_positivity(&orbit, &table)),
            Err(e) => return outcome(false, format!("({r},{l}) error: {e}")),
        }
    }
    outcome(
        total.passed() && total.summary.passed > 0,
        format!("{} solutions, {} with a negative coefficient{}", total.summary.passed + total.summary.failed, total.summary.failed, failures(&total)),
    )
}

fn criterion_boundary() -> Outcome {
    match run_suite("boundary", &SuiteParams::default()) {
        Ok(rep) => outcome(
            rep.passed(),
            format!(
                "{} checks pass, {} fail, {} points where the recursion meets a zero (reported as findings){}",
                rep.summary.passed,
                rep.summary.failed,
                rep.summary.findings,
                failures(&rep)
            ),
        ),
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn criterion_laurent_sentinel() -> Outcome {
    let n = laurent_violations();
    outcome(n == 0, format!("{n} non-Laurent quotients across the run"))
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("octahedron").chain(args.iter().copied()), &mut out, &mut err);
    (code, out)
}

fn criterion_determinism() -> Outcome {
    let runs: [&[&str]; 5] = [
        &["solve", "--query", "3,0,3"],
        &["solve", "--r", "3", "--query", "2,0,4", "--mutation", "1,1,forward", "--format", "structured"],
        &["verify", "equivalence", "--seed", "9", "--format", "structured"],
        &["verify", "periodicity", "--seed", "4"],
        &["oracle", "--r", "2", "--data", "rational", "--seed", "6", "--query", "1,0,5"],
    ];
    for args in runs {
        let first = run_cli(args);
        let second = run_cli(args);
        if first != second {
            return outcome(false, format!("output differs for {}", args.join(" ")));
        }
        if first.0 != 0 {
            return outcome(false, format!("exit {} for {}", first.0, args.join(" ")));
        }
    }
    outcome(true, format!("{} commands byte-identical on repeat", runs.len()))
}

fn main() {
    let mut collected = Collected::default();
    let secs = Duration::from_secs;
    let results = vec![
        ("1 worked example", timed(secs(1), || criterion_worked_example(&mut collected))),
        ("2 identity battery", timed(secs(30), criterion_identities)),
        ("3 method agreement", timed(secs(120), || criterion_agreement(&mut collected))),
        ("4 periodicity", timed(secs(120), || criterion_periodicity(&mut collected))),
        ("5 positivity", criterion_positivity(&collected)),
        ("6 boundary emergence", criterion_boundary()),
        ("8 determinism", criterion_determinism()),
        ("7 Laurent sentinel", criterion_laurent_sentinel()),
    ];
    let mut failed = 0;
    let mut lines: Vec<(String, Outcome)> = results.into_iter().map(|(n, o)| (n.to_string(), o)).collect();
    lines.sort_by(|a, b| a.0.cmp(&b.0));
    for (name, o) in &lines {
        if !o.pass {
            failed += 1;
        }
        println!("criterion {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
