//! Partition a circuit into windows of qubit-disjoint gates. Measurements never share a
//! window with unitaries.

use std::fmt;

use crate::circuit::{Circuit, Gate};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// One measurement per measurement window.
    SingleShot,
    /// All frontier measurements of a round share one window.
    Sampling,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub gates: Vec<Gate>,
    pub is_measurement: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub windows: Vec<Window>,
    pub mode: Mode,
}

impl Schedule {
    pub fn num_gates(&self) -> usize {
        self.windows.iter().map(|w| w.gates.len()).sum()
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.windows.iter().enumerate() {
            write!(f, "W{i} {}:", if w.is_measurement { "M" } else { "U" })?;
            for (j, g) in w.gates.iter().enumerate() {
                write!(f, "{}{g}", if j == 0 { " " } else { "; " })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Greedy front advancement. Each round emits the unitary gates at the frontier as one
/// window, then the measurements at the frontier.
pub fn schedule_windows(circuit: &Circuit, mode: Mode) -> Schedule {
    let n = circuit.num_qubits;
    let gates = &circuit.gates;
    // Per-qubit gate lists, stored flat.
    let mut start = vec![0usize; n + 1];
    for g in gates {
        for &q in g.qubits() {
            start[q as usize + 1] += 1;
        }
    }
    for q in 0..n {
        start[q + 1] += start[q];
    }
    let mut fill = start.clone();
    let mut lists = vec![0u32; start[n]];
    for (i, g) in gates.iter().enumerate() {
        for &q in g.qubits() {
            lists[fill[q as usize]] = i as u32;
            fill[q as usize] += 1;
        }
    }
    let mut head = start[..n].to_vec();
    let head_of = |head: &[usize], q: usize| -> Option<usize> {
        (head[q] < start[q + 1]).then(|| lists[head[q]] as usize)
    };

    let mut windows = Vec::new();
    let mut remaining = gates.len();
    let mut active: Vec<usize> = (0..n).filter(|&q| start[q] < start[q + 1]).collect();
    let mut picked = Vec::new();
    while remaining > 0 {
        picked.clear();
        for &q in &active {
            let Some(g) = head_of(&head, q) else { continue };
            let gate = &gates[g];
            if gate.kind.is_measure() {
                continue;
            }
            // Pick a gate once, from its first operand, when every operand has it at the head.
            if gate.q0() == q && gate.qubits().iter().all(|&o| head_of(&head, o as usize) == Some(g)) {
                picked.push(g);
            }
        }
        let progressed_u = !picked.is_empty();
        if progressed_u {
            picked.sort_unstable();
            for &g in &picked {
                for &q in gates[g].qubits() {
                    head[q as usize] += 1;
                }
            }
            remaining -= picked.len();
            windows.push(Window { gates: picked.iter().map(|&g| gates[g]).collect(), is_measurement: false });
        }

        picked.clear();
        for &q in &active {
            if let Some(g) = head_of(&head, q) {
                if gates[g].kind.is_measure() {
                    picked.push(g);
                }
            }
        }
        if !picked.is_empty() {
            picked.sort_unstable();
            for &g in &picked {
                head[gates[g].q0()] += 1;
            }
            remaining -= picked.len();
            match mode {
                Mode::SingleShot => {
                    for &g in &picked {
                        windows.push(Window { gates: vec![gates[g]], is_measurement: true });
                    }
                }
                Mode::Sampling => {
                    windows.push(Window { gates: picked.iter().map(|&g| gates[g]).collect(), is_measurement: true });
                }
            }
        } else {
            assert!(progressed_u, "scheduler made no progress");
        }
        active.retain(|&q| head[q] < start[q + 1]);
    }
    Schedule { windows, mode }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Two gates of window `window` share qubit `qubit`.
    Overlap { window: usize, qubit: usize },
    /// A measurement window holds a unitary, or a unitary window a measurement.
    MixedWindow { window: usize },
    /// The gate sequence on `qubit` differs from the circuit at position `position`.
    Order { qubit: usize, position: usize },
    /// The schedule has a different number of gates than the circuit.
    GateCount { circuit: usize, schedule: usize },
    /// The unitary gate at (`window`, `index`) fits into the earlier unitary window `earlier`.
    NotMaximal { window: usize, index: usize, earlier: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Check disjointness, per-qubit order, gate conservation and maximality. Returns the first
/// violation found.
pub fn validate_schedule(circuit: &Circuit, schedule: &Schedule) -> Result<(), Violation> {
    let n = circuit.num_qubits;
    let total = schedule.num_gates();
    if total != circuit.gates.len() {
        return Err(Violation::GateCount { circuit: circuit.gates.len(), schedule: total });
    }
    let mut seen = vec![usize::MAX; n];
    for (wi, w) in schedule.windows.iter().enumerate() {
        for g in &w.gates {
            if g.kind.is_measure() != w.is_measurement {
                return Err(Violation::MixedWindow { window: wi });
            }
            for &q in g.qubits() {
                let q = q as usize;
                if seen[q] == wi {
                    return Err(Violation::Overlap { window: wi, qubit: q });
                }
                seen[q] = wi;
            }
        }
    }

    // Per-qubit sequences must match the circuit exactly; together with the count check
    // this also establishes multiset equality.
    let mut per_qubit: Vec<Vec<&Gate>> = vec![Vec::new(); n];
    for g in &circuit.gates {
        for &q in g.qubits() {
            per_qubit[q as usize].push(g);
        }
    }
    let mut pos = vec![0usize; n];
    for w in &schedule.windows {
        for g in &w.gates {
            for &q in g.qubits() {
                let q = q as usize;
                if per_qubit[q].get(pos[q]) != Some(&g) {
                    return Err(Violation::Order { qubit: q, position: pos[q] });
                }
                pos[q] += 1;
            }
        }
    }

    // Maximality: a unitary gate must sit in the first unitary window after the window of
    // its latest predecessor.
    let mut last = vec![None::<usize>; n];
    let mut unitary_windows = Vec::new();
    for (wi, w) in schedule.windows.iter().enumerate() {
        if !w.is_measurement {
            for (gi, g) in w.gates.iter().enumerate() {
                let pred = g.qubits().iter().filter_map(|&q| last[q as usize]).max();
                let first_legal = match pred {
                    Some(p) => unitary_windows.iter().copied().find(|&u| u > p),
                    None => unitary_windows.first().copied(),
                };
                if let Some(e) = first_legal {
                    if e < wi {
                        return Err(Violation::NotMaximal { window: wi, index: gi, earlier: e });
                    }
                }
            }
            unitary_windows.push(wi);
        }
        for g in &w.gates {
            for &q in g.qubits() {
                last[q as usize] = Some(wi);
            }
        }
    }
    Ok(())
}
