//! Parallel against sequential enumeration on the heavier bundled instances.

use std::hint::black_box;

use aqsheaf::aq::linearise;
use aqsheaf::instances::build;
use aqsheaf::integrate::{classify_all, Analysis};
use aqsheaf::Ctx;
use criterion::{criterion_group, criterion_main, Criterion};

fn modes() -> [(&'static str, Ctx); 2] {
    [("parallel", Ctx::default()), ("sequential", Ctx::sequential())]
}

fn torsor_classes(c: &mut Criterion) {
    let mut g = c.benchmark_group("torsor-classes");
    g.sample_size(10);
    for id in ["q8/rp2", "heis3/simplex3"] {
        let src = build(id).unwrap();
        for (mode, ctx) in modes() {
            let lin = linearise(&ctx, &src).unwrap();
            g.bench_function(format!("{id}/{mode}"), |b| b.iter(|| black_box(lin.torsors(&ctx).unwrap().h1)));
        }
    }
    g.finish();
}

fn classify_scan(c: &mut Criterion) {
    let mut g = c.benchmark_group("classify-all");
    g.sample_size(10);
    let src = build("green-p5-q3-n2-mixed/cycle3").unwrap();
    for (mode, ctx) in modes() {
        let an = Analysis::new(&ctx, &src).unwrap();
        g.bench_function(mode, |b| b.iter(|| black_box(classify_all(&ctx, &an).unwrap().len())));
    }
    g.finish();
}

criterion_group!(benches, torsor_classes, classify_scan);
criterion_main!(benches);
