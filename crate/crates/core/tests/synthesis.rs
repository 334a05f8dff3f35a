use tosyn_core::bench_models::{robots, robots_prompt, workers};
use tosyn_core::efsmt::Order;
use tosyn_core::pipeline::{synthesize, SynthesisConfig};
use tosyn_core::verify_witness;

fn run(n: usize) {
    let sys = robots(n);
    let s = synthesize(&sys, Some(&robots_prompt(n)), &SynthesisConfig::default()).unwrap();
    assert!(s.verified(), "{:?} / {:?}", s.outcome, s.verdict);
    let v = s.outcome.witness().unwrap();
    for (name, r) in &sys.parameters {
        let x = v.get(name).unwrap();
        assert!(r.lo <= x && x <= r.hi, "{name} = {x}");
    }
    let phi = tosyn_core::parse_ltl(&robots_prompt(n)).unwrap();
    assert!(verify_witness(&sys, Some(&phi), 1, v).unwrap().is_ok());
}

#[test]
fn two_robots() {
    run(2);
}

#[test]
fn three_robots() {
    run(3);
}

#[test]
fn workers_chain() {
    let mut cfg = SynthesisConfig::default();
    cfg.solve.order = Order::Desc;
    let s = synthesize(&workers(10), None, &cfg).unwrap();
    assert!(s.verified(), "{:?} / {:?}", s.outcome, s.verdict);
    assert!(s.outcome.iterations() <= 10);
}
