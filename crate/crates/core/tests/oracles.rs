//! Generated terms checked against brute-force oracles.

mod common;

use chorc::hypergraph::happens_before;
use chorc::language;
use chorc::semantics::sem;
use chorc::verify::random_choreography;

use common::*;

#[test]
fn language_matches_filtered_event_sequences() {
    let mut compared = 0;
    for seed in 1..=80u64 {
        let g = random_choreography(seed, 1 + (seed as usize % 4)).unwrap();
        if !sem(&g).is_defined() {
            continue;
        }
        let Some(oracle) = psi_language(&g, 8) else {
            continue;
        };
        assert_eq!(language::words(&g, None).unwrap(), oracle, "seed {seed}");
        compared += 1;
    }
    assert!(compared >= 40, "only {compared} terms compared");
}

#[test]
fn happens_before_is_reachability() {
    for seed in 1..=120u64 {
        let g = random_choreography(seed, 1 + (seed as usize % 6)).unwrap();
        if let Some(r) = sem(&g).graph() {
            assert_eq!(happens_before(r), warshall(r), "seed {seed}");
        }
    }
}
