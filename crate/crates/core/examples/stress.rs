//! Large randomized cross-check of the two validity backends; not part of
//! the test suite, kept for development.
#[path = "../tests/random_circuits/mod.rs"]
mod random_circuits;
use rand::SeedableRng;
use uvleak_core::logic::{check_validity, Backend, Outcome};
use uvleak_core::sim::Sim;

fn main() {
    let n: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(2000);
    let seed: u64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7777);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (mut valid, mut cex) = (0u64, 0u64);
    for case in 0..n {
        let (c, f, b) = random_circuits::generate(&mut rng);
        let ex = check_validity(&c, &f, Backend::Exhaustive, &b).unwrap();
        let sy = check_validity(&c, &f, Backend::Symbolic, &b).unwrap();
        assert_eq!(
            matches!(ex, Outcome::Valid),
            matches!(sy, Outcome::Valid),
            "case {case}:\n{}",
            uvleak_core::textio::print_circuit(&c)
        );
        match &sy {
            Outcome::Valid => valid += 1,
            Outcome::Counterexample(t) => {
                cex += 1;
                let sim = Sim::new(&c);
                assert_eq!(
                    sim.states(&t.init, t.states.len() as u64),
                    t.states,
                    "case {case} drift"
                );
            }
        }
    }
    println!("{n} cases: {valid} valid, {cex} refuted, all agreeing");
}
