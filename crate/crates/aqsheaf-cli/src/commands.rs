//! Command implementations. Each returns a report and a few summary lines.

use aqsheaf::aq::{build_primary, linearise, primary_cohomology, Source};
use aqsheaf::integrate::{classify, classify_all, integrate, linearisation_map, mod_aut_classification, Analysis, Category};
use aqsheaf::suites::{run_suite, Failure, SuiteReport, REPORT_SCHEMA};
use aqsheaf::superalgebra::{green_structure, ExteriorAlgebra};
use aqsheaf::{Ctx, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::scenario::{GreenDef, NerveDef, Scenario, ScenarioFile, SeriesDef, Task, TransitionDef, SCENARIO_SCHEMA};

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub scenario: String,
    pub budget: u64,
    pub passed: bool,
    pub failures: Vec<Failure>,
    pub results: Value,
}

impl Report {
    fn new(command: &str, scenario: &str, ctx: &Ctx) -> Self {
        Report {
            schema: REPORT_SCHEMA,
            command: command.to_string(),
            scenario: scenario.to_string(),
            budget: ctx.budget,
            passed: true,
            failures: Vec::new(),
            results: Value::Null,
        }
    }

    fn fail(&mut self, case: &str, anchor: &str, reason: String) {
        self.passed = false;
        self.failures.push(Failure { case: case.to_string(), anchor: anchor.to_string(), reason });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }
}

pub struct Outcome {
    pub report: Report,
    pub lines: Vec<String>,
}

fn val<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serialisable")
}

fn selected<'a>(sc: &'a Scenario, only: Option<&str>) -> Result<Vec<&'a (String, Source)>> {
    let out: Vec<_> = sc.series.iter().filter(|(id, _)| only.is_none_or(|o| o == id)).collect();
    match (only, out.is_empty()) {
        (Some(o), true) => Err(Error::Input(format!("unresolved series reference {o:?}"))),
        _ => Ok(out),
    }
}

pub fn validate(ctx: &Ctx, sc: &Scenario) -> Result<Outcome> {
    let mut report = Report::new("validate", &sc.name, ctx);
    let mut lines = Vec::new();
    let mut sheaves = Vec::new();
    for (id, v) in &sc.sheaf_violations {
        if !v.is_empty() {
            report.fail(id, "sheaf-functoriality", format!("{} violation(s)", v.len()));
        }
        lines.push(format!("sheaf {id}: {} violation(s)", v.len()));
        sheaves.push(json!({ "id": id, "violations": v }));
    }
    let mut series = Vec::new();
    for (id, src) in &sc.series {
        let lin = linearise(ctx, src)?;
        let m = lin.meta();
        lines.push(format!(
            "series {id}: {} on {}, length {}, AQ degree {}, {}",
            m.name,
            m.nerve,
            m.length,
            m.aq_degree,
            if m.central { "central" } else { "not central" }
        ));
        series.push(json!({ "id": id, "meta": val(m) }));
    }
    let extensions: Vec<Value> = sc
        .extensions
        .iter()
        .map(|(id, v)| {
            lines.push(format!("extension {id}: kernel isomorphism verified"));
            json!({ "id": id, "kernel_iso": v })
        })
        .collect();
    let automorphisms: Vec<Value> =
        sc.automorphisms.iter().map(|(id, a)| json!({ "series": id, "count": a.len() })).collect();
    report.results = json!({ "sheaves": sheaves, "series": series, "extensions": extensions, "automorphisms": automorphisms });
    Ok(Outcome { report, lines })
}

pub fn cohomology(ctx: &Ctx, sc: &Scenario, only: Option<&str>) -> Result<Outcome> {
    let mut report = Report::new("cohomology", &sc.name, ctx);
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    for (id, src) in selected(sc, only)? {
        let lin = linearise(ctx, src)?;
        let t = lin.torsors(ctx)?;
        lines.push(format!("series {id}: |Ȟ¹(H_j)| = {:?}", t.h1));
        for c in &lin.components {
            lines.push(format!(
                "  A_{} (grade {}): |H⁰| = {}, |H¹| = {}, |H²| = {}",
                c.index, c.grade, c.h0.order, c.h1.order, c.h2.order
            ));
        }
        rows.push(json!({
            "id": id,
            "name": lin.meta().name,
            "components": val(&lin.components),
            "torsor_classes": val(&t.h1),
            "im_h0_p": val(&t.im_h0_p),
        }));
    }
    report.results = json!({ "series": rows });
    Ok(Outcome { report, lines })
}

pub fn primary(ctx: &Ctx, sc: &Scenario, only: Option<&str>) -> Result<Outcome> {
    let mut report = Report::new("primary", &sc.name, ctx);
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    for (id, src) in selected(sc, only)? {
        let lin = linearise(ctx, src)?;
        let pc = build_primary(ctx, &lin)?;
        let h = primary_cohomology(&lin, &pc);
        if !pc.complex_holds {
            report.fail(id, "primary-complex", "d2 after d1 leaves the base point".into());
        }
        for r in pc.routes.iter().filter(|r| !r.agree) {
            report.fail(id, "witness-independence", format!("boundary {} from index {} depends on the witness", r.map, r.source_index));
        }
        lines.push(format!(
            "series {id}: complex {}, H¹ orders {:?}",
            if pc.complex_holds { "holds" } else { "FAILS" },
            h.grades.iter().map(|g| g.h1).collect::<Vec<_>>()
        ));
        rows.push(json!({
            "id": id,
            "d1": pc.d1.iter().map(|m| val(&m.summary())).collect::<Vec<_>>(),
            "d2": pc.d2.iter().map(|m| val(&m.summary())).collect::<Vec<_>>(),
            "witness_routes": val(&pc.routes),
            "complex_holds": pc.complex_holds,
            "cohomology": val(&h),
        }));
    }
    report.results = json!({ "series": rows });
    Ok(Outcome { report, lines })
}

fn one_series<'a>(sc: &'a Scenario, only: Option<&str>) -> Result<&'a (String, Source)> {
    let all = selected(sc, only)?;
    match all.as_slice() {
        [one] => Ok(one),
        _ => Err(Error::Input(format!("scenario has {} series; pick one with --series", all.len()))),
    }
}

pub fn integrate_class(ctx: &Ctx, sc: &Scenario, only: Option<&str>, index: usize, theta: u128) -> Result<Outcome> {
    let mut report = Report::new("integrate", &sc.name, ctx);
    let (id, src) = one_series(sc, only)?;
    let an = Analysis::new(ctx, src)?;
    let atlas = integrate(ctx, &an, index, theta)?;
    if let Some(a) = &atlas {
        linearisation_map(&an, a)?;
    }
    let v = classify(ctx, &an, index, theta)?;
    let lines = vec![match &atlas {
        Some(a) => format!("series {id}: class {theta} at index {index} integrates to torsor class {}", a.class),
        None if v.d2_theta != 0 => format!("series {id}: class {theta} at index {index} is obstructed (d2 = {})", v.d2_theta),
        None => format!("series {id}: class {theta} at index {index} has no atlas"),
    }];
    report.results = json!({ "series": id, "verdict": val(&v), "atlas": val(&atlas) });
    Ok(Outcome { report, lines })
}

pub fn classify_classes(ctx: &Ctx, sc: &Scenario, only: Option<&str>, single: Option<(usize, u128)>) -> Result<Outcome> {
    let mut report = Report::new("classify", &sc.name, ctx);
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    for (id, src) in selected(sc, only)? {
        let an = Analysis::new(ctx, src)?;
        let verdicts = match single {
            Some((j, theta)) => vec![classify(ctx, &an, j, theta)?],
            None => classify_all(ctx, &an)?,
        };
        let count = |c: Category| verdicts.iter().filter(|v| v.category == c).count();
        let (sm, pseudo, obs) =
            (count(Category::Supermanifold), count(Category::PseudoSupermanifold), count(Category::ObstructedThickening));
        let h1_vanishes = an.cohomology.h1_vanishes();
        if h1_vanishes && pseudo > 0 {
            report.fail(id, "integration", format!("{pseudo} unintegrable class(es) in ker d2 although H¹ of the complex vanishes"));
        }
        lines.push(format!("series {id}: {sm} supermanifold, {pseudo} pseudo-supermanifold, {obs} obstructed"));
        let orbits = match sc.automorphisms.get(id) {
            Some(auts) => {
                let o = mod_aut_classification(ctx, &an, auts)?;
                lines.push(format!("  {} torsor class(es) in {} orbit(s)", o.classes, o.orbits.len()));
                val(&o)
            }
            None => Value::Null,
        };
        rows.push(json!({
            "id": id,
            "h1_vanishes": h1_vanishes,
            "counts": { "supermanifold": sm, "pseudo_supermanifold": pseudo, "obstructed": obs },
            "rows": val(&verdicts),
            "orbits": orbits,
        }));
    }
    report.results = json!({ "series": rows });
    Ok(Outcome { report, lines })
}

/// Runs the scenario's task list in order.
pub fn run_tasks(ctx: &Ctx, sc: &Scenario) -> Result<Outcome> {
    if sc.tasks.is_empty() {
        return Err(Error::Input(format!("scenario {:?} lists no tasks", sc.name)));
    }
    let mut report = Report::new("run", &sc.name, ctx);
    let mut lines = Vec::new();
    let mut parts = Vec::new();
    for task in &sc.tasks {
        let o = match task {
            Task::Validate => validate(ctx, sc)?,
            Task::Cohomology => cohomology(ctx, sc, None)?,
            Task::Primary => primary(ctx, sc, None)?,
            Task::Classify => classify_classes(ctx, sc, None, None)?,
        };
        report.passed &= o.report.passed;
        report.failures.extend(o.report.failures);
        lines.extend(o.lines);
        parts.push(json!({ "task": o.report.command, "results": o.report.results }));
    }
    report.results = Value::Array(parts);
    Ok(Outcome { report, lines })
}

pub struct GreenArgs {
    pub p: u64,
    pub q: usize,
    pub n: usize,
    pub nerve: String,
    pub table: bool,
    pub seed: Option<u64>,
}

/// `L·U` with `L` unit lower triangular and `U` upper triangular with nonzero diagonal.
fn random_invertible(rng: &mut ChaCha8Rng, p: u64, q: usize) -> Vec<Vec<u64>> {
    let l: Vec<Vec<u64>> = (0..q)
        .map(|i| (0..q).map(|j| if i == j { 1 } else if j < i { rng.random_range(0..p) } else { 0 }).collect())
        .collect();
    let u: Vec<Vec<u64>> = (0..q)
        .map(|i| (0..q).map(|j| if i == j { rng.random_range(1..p) } else if j > i { rng.random_range(0..p) } else { 0 }).collect())
        .collect();
    (0..q).map(|i| (0..q).map(|j| (0..q).map(|k| l[i][k] * u[k][j]).sum::<u64>() % p).collect()).collect()
}

/// Random transitions on the edges that lie in no triangle, where the cocycle condition is empty.
fn random_transitions(args: &GreenArgs, seed: u64) -> Result<Vec<TransitionDef>> {
    let nerve = aqsheaf::instances::nerve(&args.nerve)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let in_triangle = |e: usize| (0..nerve.count(2)).any(|t| nerve.facets(2, t).contains(&e));
    let mut out = Vec::new();
    for e in (0..nerve.count(1)).filter(|&e| !in_triangle(e)) {
        let f = nerve.face(1, e);
        let constant = random_invertible(&mut rng, args.p, args.q);
        let x_part = if args.n > 1 {
            (0..args.q).map(|_| (0..args.q).map(|_| rng.random_range(0..args.p)).collect()).collect()
        } else {
            Vec::new()
        };
        out.push(TransitionDef { edges: vec![[f[0], f[1]]], constant, x_part });
    }
    Ok(out)
}

pub fn green(ctx: &Ctx, args: &GreenArgs) -> Result<(Outcome, ScenarioFile)> {
    let name = format!("green-p{}-q{}-n{}", args.p, args.q, args.n);
    let transitions = match args.seed {
        Some(s) => random_transitions(args, s)?,
        None => Vec::new(),
    };
    let mut file = ScenarioFile {
        schema: SCENARIO_SCHEMA.to_string(),
        name: name.clone(),
        groups: Default::default(),
        nerves: Default::default(),
        homs: Default::default(),
        sheaves: Default::default(),
        series: Default::default(),
        extensions: Default::default(),
        automorphisms: Default::default(),
        tasks: vec![Task::Validate, Task::Primary],
    };
    file.nerves.insert("site".into(), NerveDef::Named(args.nerve.clone()));
    file.series.insert(
        name.clone(),
        SeriesDef::Green(GreenDef { p: args.p, q: args.q, n: args.n, nerve: "site".into(), table: args.table, transitions }),
    );
    let sc = crate::scenario::resolve(&file)?;
    let mut report = Report::new("green", &name, ctx);
    let structure = green_structure(&ExteriorAlgebra::new(args.p, args.q, args.n)?)?;
    if !structure.holds() {
        let failed: Vec<&str> = [
            ("top level", structure.top_trivial),
            ("normal in next", structure.normal_in_next),
            ("normal in G^(2)", structure.normal_in_first),
            ("abelian quotients", structure.abelian_quotients),
            ("AQ degree 4", structure.degree_four),
        ]
        .iter()
        .filter(|c| !c.1)
        .map(|c| c.0)
        .collect();
        report.fail(&name, "green-structure", format!("fails at a point: {}", failed.join(", ")));
    }
    let lin = linearise(ctx, &sc.series[0].1)?;
    let m = lin.meta();
    let lines = vec![
        format!("{name} on {}: length {}, AQ degree {}, {}", m.nerve, m.length, m.aq_degree, if m.central { "central" } else { "not central" }),
        format!("structure at a point: {}", if structure.holds() { "holds" } else { "FAILS" }),
    ];
    report.results = json!({ "meta": val(m), "structure": val(&structure), "scenario": val(&file) });
    Ok((Outcome { report, lines }, file))
}

pub fn verify(ctx: &Ctx, suite: &str) -> Result<Vec<SuiteReport>> {
    if suite == "all" {
        aqsheaf::suites::suite_names().map(|s| run_suite(ctx, s)).collect()
    } else {
        Ok(vec![run_suite(ctx, suite)?])
    }
}
