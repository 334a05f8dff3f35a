//! Fixtures shared by the criterion benches.

use tosyn_core::bench_models::{robots, robots_prompt};
use tosyn_core::oracle::dbm::{le, lt, Dbm};
use tosyn_core::pipeline::monitored;
use tosyn_core::{assemble, AugmentedSystem, EfQuery, EncodeOptions};

/// The `n`-robot model with its prompt property monitored at depth `k`.
pub fn robot_system(n: usize, k: u32) -> AugmentedSystem {
    monitored(&robots(n), Some(&robots_prompt(n)), k).expect("robot models are well formed")
}

pub fn robot_query(n: usize) -> (AugmentedSystem, EfQuery) {
    let aug = robot_system(n, 1);
    let q = assemble(&aug, &EncodeOptions::default()).expect("robot queries assemble");
    (aug, q)
}

/// A fixed sequence of delay, guard and reset steps over `clocks` clocks.
/// Returns whether the final zone is non-empty.
pub fn dbm_workload(clocks: usize, rounds: usize) -> bool {
    let mut z = Dbm::zero(clocks);
    for r in 0..rounds {
        z.up();
        let x = 1 + r % clocks;
        let y = 1 + (r + 1) % clocks;
        if !z.constrain(x, 0, le(10 + r as i64 % 7)) || !z.constrain(0, y, lt(-(r as i64 % 3))) {
            z = Dbm::zero(clocks);
            continue;
        }
        z.reset(x);
        z.extrapolate(&vec![20; clocks + 1]);
    }
    !z.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        let (aug, q) = robot_query(2);
        assert_eq!(aug.base.parameters.len(), 8);
        assert!(q.section("component-invariants").is_some());
        dbm_workload(4, 50);
    }
}
