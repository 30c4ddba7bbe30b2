//! Workloads shared by the criterion benches.

use quasar_core::{generate_random, Circuit};

/// Random circuit with measurements on roughly `measure_prob` of the qubits.
pub fn workload(n: usize, depth: usize, measure_prob: f64) -> Circuit {
    generate_random(n, depth, 0x5eed ^ n as u64, measure_prob)
}

/// Same circuit with its measurements removed.
pub fn unitary_part(c: &Circuit) -> Circuit {
    let mut out = Circuit::new(c.num_qubits);
    for g in c.gates.iter().filter(|g| !g.kind.is_measure()) {
        out.push(*g);
    }
    out
}
