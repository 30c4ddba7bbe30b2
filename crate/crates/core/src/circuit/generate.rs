use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Circuit, Gate, GateKind};

/// Random layered Clifford circuit. Each layer consumes every qubit at most once with
/// operators drawn uniformly from the eleven unitary kinds; afterwards each qubit is
/// measured independently with probability `measure_prob`.
pub fn generate_random(n: usize, depth: usize, seed: u64, measure_prob: f64) -> Circuit {
    assert!(n >= 1 && depth >= 1, "need at least one qubit and one layer");
    assert!((0.0..=1.0).contains(&measure_prob), "measure_prob must lie in [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n);
    c.num_clbits = n;
    c.gates.reserve(depth * n * 3 / 4);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..depth {
        order.shuffle(&mut rng);
        let mut i = 0;
        while i < n {
            let mut kind = GateKind::UNITARY[rng.random_range(0..GateKind::UNITARY.len())];
            if kind.arity() == 2 && i + 1 == n {
                kind = GateKind::SINGLE[rng.random_range(0..GateKind::SINGLE.len())];
            }
            c.gates.push(Gate::new(kind, &order[i..i + kind.arity()]));
            i += kind.arity();
        }
    }
    for q in 0..n {
        if rng.random_bool(measure_prob) {
            c.push_measure(q, q);
        }
    }
    c
}
