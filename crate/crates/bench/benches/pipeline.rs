use criterion::{black_box, criterion_group, criterion_main, Criterion};
use tosyn_bench::{dbm_workload, robot_query, robot_system};
use tosyn_core::bench_models::{example_valuation, robots, robots_prompt, workers};
use tosyn_core::efsmt::Order;
use tosyn_core::oracle::{verify_augmented, ExploreOptions};
use tosyn_core::pipeline::{synthesize, SynthesisConfig};
use tosyn_core::{assemble, build_monitor, ltl_to_buchi, parse_ltl, solve, EncodeOptions, Ltl, SolveConfig};

fn monitor(c: &mut Criterion) {
    let phi = parse_ltl(&robots_prompt(3)).unwrap();
    c.bench_function("ltl_to_buchi/robots3", |b| b.iter(|| ltl_to_buchi(&Ltl::not(phi.clone()))));
    let buchi = ltl_to_buchi(&Ltl::not(phi));
    for k in [1, 3] {
        c.bench_function(&format!("build_monitor/robots3/k{k}"), |b| b.iter(|| build_monitor(&buchi, black_box(k))));
    }
}

fn constraints(c: &mut Criterion) {
    for n in [2, 3] {
        let aug = robot_system(n, 1);
        c.bench_function(&format!("assemble/robots{n}"), |b| {
            b.iter(|| assemble(&aug, &EncodeOptions::default()).unwrap())
        });
    }
}

fn efsmt(c: &mut Criterion) {
    let mut g = c.benchmark_group("efsmt");
    g.sample_size(10);
    let (_, q) = robot_query(2);
    g.bench_function("solve/robots2", |b| b.iter(|| solve(&q, &SolveConfig::default())));
    g.bench_function("synthesize/robots2", |b| {
        b.iter(|| synthesize(&robots(2), Some(&robots_prompt(2)), &SynthesisConfig::default()).unwrap())
    });
    let mut cfg = SynthesisConfig::default();
    cfg.solve.order = Order::Desc;
    g.bench_function("synthesize/workers10", |b| b.iter(|| synthesize(&workers(10), None, &cfg).unwrap()));
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let aug = robot_system(2, 1);
    let v = example_valuation();
    c.bench_function("verify/robots2", |b| {
        b.iter(|| verify_augmented(&aug, &v, &ExploreOptions::default()).unwrap())
    });
    c.bench_function("dbm/4clocks/200rounds", |b| {
        b.iter(|| dbm_workload(black_box(4), 200))
    });
}

criterion_group!(benches, monitor, constraints, efsmt, oracle);
criterion_main!(benches);
