//! One line per acceptance criterion. The full certification is run through
//! the binary twice; the remaining bounds are run against the library.

use std::process::Command;
use std::time::{Duration, Instant};

use treeseg::certify::{self, CertReport};
use treeseg::tau;
use treeseg::CheckReport;

const FUNCTOR_LIMIT: Duration = Duration::from_secs(60);
const CERTIFY_LIMIT: Duration = Duration::from_secs(600);
const CERTIFY_SIZE: usize = 5;

struct Criterion {
    number: usize,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn summarize(reports: &[&CheckReport]) -> (bool, String) {
    let passed = !reports.is_empty() && reports.iter().all(|r| r.passed() && r.instances > 0);
    let detail = reports
        .iter()
        .map(|r| {
            let bound: Vec<String> = r.bound.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let mut s = format!("{} [{}] {} instances, {} failures", r.suite, bound.join(" "), r.instances, r.failure_count);
            if let Some(f) = r.failures.first() {
                s.push_str(&format!(", first: {f}"));
            }
            s
        })
        .collect::<Vec<_>>()
        .join("; ");
    (passed, detail)
}

fn from_cert<'a>(cert: &'a CertReport, names: &[&str]) -> Vec<&'a CheckReport> {
    cert.reports.iter().filter(|r| names.contains(&r.suite.as_str())).collect()
}

fn certify_run() -> (Vec<u8>, Duration, Option<i32>) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_treeseg"))
        .args(["certify", "--suite", "all", "--max-size", &CERTIFY_SIZE.to_string(), "--json"])
        .output()
        .expect("run treeseg");
    (out.stdout, start.elapsed(), out.status.code())
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("pool")
        .install(f)
}

#[test]
fn acceptance() {
    let mut lines = Vec::new();

    let (first, t1, code1) = certify_run();
    let (second, t2, code2) = certify_run();
    let cert: CertReport = serde_json::from_slice(&first).expect("certify emits a CertReport");

    let start = Instant::now();
    let functor = single_threaded(|| tau::check_tau_functor(CERTIFY_SIZE));
    let elapsed = start.elapsed();
    let (ok, detail) = summarize(&[&functor]);
    let (ok_cli, detail_cli) = summarize(&from_cert(&cert, &["functor"]));
    lines.push(Criterion {
        number: 1,
        name: "functoriality of tau",
        passed: ok && ok_cli && elapsed < FUNCTOR_LIMIT,
        detail: format!("{detail}; {:.1} s single-threaded (limit {} s); cli: {detail_cli}", elapsed.as_secs_f64(), FUNCTOR_LIMIT.as_secs()),
    });

    let (passed, detail) = summarize(&from_cert(&cert, &["determination"]));
    lines.push(Criterion { number: 2, name: "edge maps determine tree maps", passed, detail });

    let deltaf6 = certify::check_deltaf_factorization(6);
    let tau6 = tau::check_tau_factorization(6);
    let mut reports = from_cert(&cert, &["factorization_omega"]);
    reports.push(&deltaf6);
    reports.push(&tau6);
    let (passed, detail) = summarize(&reports);
    lines.push(Criterion { number: 3, name: "factorization systems", passed, detail });

    let elementary6 = tau::check_elementary_equivalence_all(6);
    let unit6 = tau::check_unit_all(5, 6);
    let (passed, detail) = summarize(&[&elementary6, &unit6]);
    lines.push(Criterion { number: 4, name: "elementary slices and units", passed, detail });

    let (v, a) = certify::tree_bounds(CERTIFY_SIZE);
    let counting = certify::check_counting(v, a, 5);
    let (passed, detail) = summarize(&[&counting]);
    lines.push(Criterion { number: 5, name: "counting oracles", passed, detail });

    let (passed, detail) = summarize(&from_cert(&cert, &["segal", "roundtrip"]));
    lines.push(Criterion { number: 6, name: "nerves, Segal condition and round trip", passed, detail });

    let (passed, detail) = summarize(&from_cert(&cert, &["locality"]));
    lines.push(Criterion { number: 7, name: "locality", passed, detail });

    let (passed, detail) = summarize(&from_cert(&cert, &["admissible_faces", "admissible_extension"]));
    lines.push(Criterion { number: 8, name: "admissible maps", passed, detail });

    let (passed, detail) = summarize(&from_cert(&cert, &["completeness"]));
    lines.push(Criterion { number: 9, name: "completeness", passed, detail });

    let identical = first == second && !first.is_empty();
    let every_suite = certify::SUITES.iter().all(|s| {
        let names: Vec<&str> = match *s {
            "factorization" => vec!["factorization_omega", "factorization_deltaf", "factorization_tau"],
            "admissibility" => vec!["admissible_faces", "admissible_extension"],
            other => vec![other],
        };
        let rs = from_cert(&cert, &names);
        rs.len() == names.len() && rs.iter().all(|r| r.instances > 0)
    });
    lines.push(Criterion {
        number: 10,
        name: "deterministic certification",
        passed: identical && cert.passed && every_suite && code1 == Some(0) && code2 == Some(0) && t1 < CERTIFY_LIMIT && t2 < CERTIFY_LIMIT,
        detail: format!(
            "byte-identical = {identical}, exit codes {code1:?} {code2:?}, {} instances, {} failures, every suite nonempty = {every_suite}, {:.1} s and {:.1} s (limit {} s)",
            cert.instances,
            cert.failure_count,
            t1.as_secs_f64(),
            t2.as_secs_f64(),
            CERTIFY_LIMIT.as_secs()
        ),
    });

    for c in &lines {
        println!(
            "criterion {:>2} {}: {} ({})",
            c.number,
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.detail
        );
    }
    let failed: Vec<usize> = lines.iter().filter(|c| !c.passed).map(|c| c.number).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
