//! Circuits over the Clifford alphabet plus Z-basis measurement.

mod generate;
mod qasm;

pub use generate::generate_random;
pub use qasm::{emit_qasm, parse_qasm, QasmError};

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    Cx,
    Cy,
    Cz,
    Swap,
    Iswap,
    Measure,
}

impl GateKind {
    /// The eleven unitary kinds, in a fixed order (used by the generator).
    pub const UNITARY: [GateKind; 11] = [
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::Cx,
        GateKind::Cy,
        GateKind::Cz,
        GateKind::Swap,
        GateKind::Iswap,
    ];

    pub const SINGLE: [GateKind; 6] =
        [GateKind::X, GateKind::Y, GateKind::Z, GateKind::H, GateKind::S, GateKind::Sdg];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cy | GateKind::Cz | GateKind::Swap | GateKind::Iswap => 2,
            _ => 1,
        }
    }

    pub fn is_measure(self) -> bool {
        self == GateKind::Measure
    }

    pub fn qasm_name(self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::Cx => "cx",
            GateKind::Cy => "cy",
            GateKind::Cz => "cz",
            GateKind::Swap => "swap",
            GateKind::Iswap => "iswap",
            GateKind::Measure => "measure",
        }
    }

    pub fn from_qasm_name(name: &str) -> Option<GateKind> {
        Some(match name {
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "h" => GateKind::H,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "cx" | "CX" => GateKind::Cx,
            "cy" => GateKind::Cy,
            "cz" => GateKind::Cz,
            "swap" => GateKind::Swap,
            "iswap" => GateKind::Iswap,
            "measure" => GateKind::Measure,
            _ => return None,
        })
    }
}

/// A gate and its operands. Unused operand slots are zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    qubits: [u32; 2],
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize]) -> Gate {
        assert_eq!(qubits.len(), kind.arity(), "{kind:?} takes {} operands", kind.arity());
        let mut q = [0u32; 2];
        for (d, &s) in q.iter_mut().zip(qubits) {
            *d = s as u32;
        }
        Gate { kind, qubits: q }
    }

    pub fn one(kind: GateKind, q: usize) -> Gate {
        Gate::new(kind, &[q])
    }

    pub fn two(kind: GateKind, c: usize, t: usize) -> Gate {
        Gate::new(kind, &[c, t])
    }

    pub fn measure(q: usize) -> Gate {
        Gate::new(GateKind::Measure, &[q])
    }

    pub fn qubits(&self) -> &[u32] {
        &self.qubits[..self.kind.arity()]
    }

    #[inline]
    pub fn q0(&self) -> usize {
        self.qubits[0] as usize
    }

    #[inline]
    pub fn q1(&self) -> usize {
        self.qubits[1] as usize
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.qasm_name())?;
        for (i, q) in self.qubits().iter().enumerate() {
            write!(f, "{}{}", if i == 0 { " " } else { "," }, q)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub gates: Vec<Gate>,
    /// Classical target of each measurement, in program order.
    pub clbits: Vec<u32>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Circuit {
        Circuit { num_qubits, num_clbits: 0, gates: Vec::new(), clbits: Vec::new() }
    }

    /// Append a gate. Measurements write to the classical bit with the qubit's index.
    pub fn push(&mut self, gate: Gate) {
        if gate.kind.is_measure() {
            self.push_measure(gate.q0(), gate.q0());
        } else {
            self.check(&gate);
            self.gates.push(gate);
        }
    }

    pub fn push_measure(&mut self, q: usize, clbit: usize) {
        let g = Gate::measure(q);
        self.check(&g);
        self.gates.push(g);
        self.clbits.push(clbit as u32);
        self.num_clbits = self.num_clbits.max(clbit + 1);
    }

    fn check(&self, gate: &Gate) {
        for &q in gate.qubits() {
            assert!((q as usize) < self.num_qubits, "qubit {q} out of range for {} qubits", self.num_qubits);
        }
        if gate.kind.arity() == 2 {
            assert_ne!(gate.q0(), gate.q1(), "two-qubit gate with repeated operand");
        }
    }

    pub fn num_measurements(&self) -> usize {
        self.clbits.len()
    }

    /// Qubits measured, in program order.
    pub fn measured_qubits(&self) -> Vec<usize> {
        self.gates.iter().filter(|g| g.kind.is_measure()).map(|g| g.q0()).collect()
    }

    /// Length of the longest per-qubit dependency chain.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.num_qubits];
        let mut depth = 0;
        for g in &self.gates {
            let l = g.qubits().iter().map(|&q| level[q as usize]).max().unwrap_or(0) + 1;
            for &q in g.qubits() {
                level[q as usize] = l;
            }
            depth = depth.max(l);
        }
        depth
    }
}

impl std::str::FromStr for Circuit {
    type Err = QasmError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_qasm(s)
    }
}
