//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so every line is printed on each run;
//! the process exits nonzero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use aqsheaf::exec::with_workers;
use aqsheaf::suites::{run_suite, suite_names, CaseReport, SuiteReport};
use aqsheaf::Ctx;
use serde_json::Value;

const MIN_LEMMA_SERIES: usize = 20;
const MIN_CENTRAL_INSTANCES: usize = 10;
const COMPLEX_SITES: [&str; 3] = ["/cycle3", "/simplex3", "/rp2"];
const EXTENDED_INSTANCES: [&str; 2] = ["green-p2-q4-n1/simplex3", "green-p2-q4-n1/simplex4"];
const INTEGRATION_INSTANCE: &str = "green-p5-q3-n2/cycle3";
const INTEGRATION_BUDGET: u64 = 10_000_000;
const GREEN_GRID: (usize, usize) = (4, 2);
const WORKER_COUNTS: [usize; 3] = [1, 2, 8];

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

struct Verdict {
    passed: bool,
    detail: String,
}

type Check = fn(&Ctx) -> Verdict;

fn timed(ctx: &Ctx, suite: &str) -> (SuiteReport, Duration) {
    let t = Instant::now();
    let r = run_suite(ctx, suite).unwrap_or_else(|e| panic!("suite {suite}: {e}"));
    (r, t.elapsed())
}

fn covered(c: &CaseReport) -> bool {
    c.detail.get("covered").and_then(Value::as_bool).unwrap_or(true)
}

fn within(limit: Duration, took: Duration) -> (bool, String) {
    (took < limit, format!("{:.2}s of {}s", took.as_secs_f64(), limit.as_secs()))
}

fn summary(r: &SuiteReport) -> String {
    let mut s = format!("{}/{} cases pass", r.cases.iter().filter(|c| c.passed).count(), r.cases.len());
    for f in r.failures.iter().take(4) {
        s += &format!("; {} [{}]: {}", f.case, f.anchor, f.reason);
    }
    if r.failures.len() > 4 {
        s += &format!("; {} more", r.failures.len() - 4);
    }
    s
}

fn lemma(ctx: &Ctx) -> Verdict {
    let (r, took) = timed(ctx, "lemma-2-3");
    let (fast, t) = within(secs(10), took);
    let groups = ["Z/8 ", "S3 ", "Q8 ", "Heis(3) "];
    let named = groups.iter().all(|g| r.cases.iter().any(|c| c.id.starts_with(g) && c.passed));
    let ok = r.passed && r.cases.len() >= MIN_LEMMA_SERIES && named && fast;
    Verdict { passed: ok, detail: format!("{}, {t}", summary(&r)) }
}

fn primary(ctx: &Ctx) -> Verdict {
    let (r, took) = timed(ctx, "primary-complex");
    let (fast, t) = within(secs(60), took);
    let central = r
        .cases
        .iter()
        .filter(|c| c.passed && c.detail["central"] == true && COMPLEX_SITES.iter().any(|s| c.id.ends_with(s)))
        .count();
    let ok = r.passed && central >= MIN_CENTRAL_INSTANCES && fast;
    Verdict { passed: ok, detail: format!("{central} central instances on the three sites, {}, {t}", summary(&r)) }
}

fn linearity(ctx: &Ctx) -> Verdict {
    let (r, took) = timed(ctx, "linearity");
    let (fast, t) = within(secs(60), took);
    let n = r.cases.iter().filter(|c| covered(c)).count();
    Verdict { passed: r.passed && n > 0 && fast, detail: format!("{n} degree-2 instances, {}, {t}", summary(&r)) }
}

fn extended(ctx: &Ctx) -> Verdict {
    let (r, took) = timed(ctx, "extended-complex");
    let (fast, t) = within(secs(300), took);
    let mut squares = 0;
    let mut ok = r.passed && fast;
    for id in EXTENDED_INSTANCES {
        match r.cases.iter().find(|c| c.id == id) {
            Some(c) if c.passed && covered(c) => squares += c.detail["squares"].as_array().map_or(0, Vec::len),
            _ => ok = false,
        }
    }
    ok &= squares > 0;
    Verdict { passed: ok, detail: format!("{squares} squares on the rank-4 F_2 instances, {}, {t}", summary(&r)) }
}

fn integration(_: &Ctx) -> Verdict {
    let ctx = Ctx::with_budget(INTEGRATION_BUDGET);
    let (r, took) = timed(&ctx, "integration");
    let (fast, t) = within(secs(300), took);
    let Some(c) = r.cases.iter().find(|c| c.id == INTEGRATION_INSTANCE) else {
        return Verdict { passed: false, detail: format!("{INTEGRATION_INSTANCE} missing") };
    };
    let d = &c.detail;
    let violations: u64 = d["grades"].as_array().map_or(u64::MAX, |g| g.iter().map(|x| x["violations"].as_u64().unwrap_or(u64::MAX)).sum());
    let exact = d["exact_on_kernel"] == true;
    let h1_zero = d["h1_partial_vanishes"] == true;
    let ok = c.passed && r.passed && !r.resource_exhausted && violations == 0 && (exact || !h1_zero) && fast;
    Verdict {
        passed: ok,
        detail: format!(
            "{INTEGRATION_INSTANCE}: {violations} violations, integrable = ker d2: {exact}, H1 of the complex vanishes: {h1_zero}; {}, {t}",
            summary(&r)
        ),
    }
}

fn green(ctx: &Ctx) -> Verdict {
    let (r, took) = timed(ctx, "green-structure");
    let (fast, t) = within(secs(120), took);
    let expected = 3 * GREEN_GRID.0 * GREEN_GRID.1;
    Verdict { passed: r.passed && r.cases.len() == expected && fast, detail: format!("{}, {t}", summary(&r)) }
}

fn vanishing(ctx: &Ctx) -> Verdict {
    let (r, took) = timed(ctx, "vanish-lift-vanish");
    let (fast, t) = within(secs(300), took);
    let f5: Vec<_> = r.cases.iter().filter(|c| c.id.starts_with("green-p5")).collect();
    let all_covered = f5.iter().all(|c| c.passed && covered(c) && c.detail["holds"] == true);
    let ok = r.passed && !f5.is_empty() && all_covered && fast;
    Verdict { passed: ok, detail: format!("{} F_5 instances, all covered and holding: {all_covered}; {}, {t}", f5.len(), summary(&r)) }
}

fn berezin(ctx: &Ctx) -> Verdict {
    let (r, took) = timed(ctx, "berezin");
    let (fast, t) = within(secs(300), took);
    Verdict { passed: r.passed && !r.cases.is_empty() && fast, detail: format!("{}, {t}", summary(&r)) }
}

fn verdicts(ctx: &Ctx) -> Verdict {
    let (r, took) = timed(ctx, "verdicts");
    let (fast, t) = within(secs(600), took);
    Verdict { passed: r.passed && !r.resource_exhausted && fast, detail: format!("{}, {t}", summary(&r)) }
}

fn determinism(ctx: &Ctx) -> Verdict {
    let mut differing = Vec::new();
    for suite in suite_names() {
        let runs: Vec<String> = WORKER_COUNTS
            .iter()
            .map(|&w| with_workers(w, || run_suite(ctx, suite).map(|r| r.to_json())).expect("pool starts").expect("suite runs"))
            .collect();
        let again = run_suite(ctx, suite).expect("suite runs").to_json();
        if runs.iter().any(|r| *r != again) {
            differing.push(suite);
        }
    }
    let detail = if differing.is_empty() {
        format!("{} suites byte-identical on {WORKER_COUNTS:?} workers", suite_names().count())
    } else {
        format!("reports differ for {differing:?}")
    };
    Verdict { passed: differing.is_empty(), detail }
}

fn main() -> ExitCode {
    let ctx = Ctx::default();
    let criteria: [(&str, Check); 10] = [
        ("kernel isomorphism", lemma),
        ("primary complex", primary),
        ("linearity", linearity),
        ("extended complex", extended),
        ("integration", integration),
        ("Green structure", green),
        ("vanish-lift-vanish", vanishing),
        ("Berezin lifts", berezin),
        ("verdict consistency", verdicts),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check(&ctx);
        failed += usize::from(!v.passed);
        println!("criterion {:>2} {name}: {} ({})", i + 1, if v.passed { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
