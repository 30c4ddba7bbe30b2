//! Brute-force references: a dense state vector for small registers and an unpacked CHP
//! tableau that performs measurement elimination one target at a time.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::measure::Outcome;
use crate::rng::BitStream;
use crate::scheduler::{schedule_windows, Mode};
use crate::tableau::{Layout, Tableau};
use crate::word::Word;

pub const SV_MAX_QUBITS: usize = 14;
pub const DIST_MAX_QUBITS: usize = 12;
pub const DIST_MAX_MEASUREMENTS: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{0} qubits exceeds the state-vector limit")]
    TooManyQubits(usize),
    #[error("{0} measurements exceeds the enumeration limit")]
    TooManyMeasurements(usize),
    #[error("qubit {0} out of range")]
    OutOfRange(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub n: usize,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Result<Self, OracleError> {
        if n > SV_MAX_QUBITS {
            return Err(OracleError::TooManyQubits(n));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability that qubit `q` reads 1.
    pub fn prob_one(&self, q: usize) -> f64 {
        self.amps.iter().enumerate().filter(|(i, _)| i >> q & 1 == 1).map(|(_, a)| a.norm_sqr()).sum()
    }

    fn project(&mut self, q: usize, bit: bool, p: f64) {
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i >> q & 1 == 1) == bit {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
    }

    fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// Controlled single-qubit unitary.
    fn apply_c1q(&mut self, c: usize, t: usize, m: [[Complex64; 2]; 2]) {
        let (cb, tb) = (1 << c, 1 << t);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | tb]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | tb] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn matrix(kind: GateKind) -> [[Complex64; 2]; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match kind {
        GateKind::X | GateKind::Cx => [[o, l], [l, o]],
        GateKind::Y | GateKind::Cy => [[o, -i], [i, o]],
        GateKind::Z | GateKind::Cz => [[l, o], [o, -l]],
        GateKind::H => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        GateKind::S => [[l, o], [o, i]],
        GateKind::Sdg => [[l, o], [o, -i]],
        _ => unreachable!("no single-qubit matrix for {kind:?}"),
    }
}

/// Dense 2x2 or 4x4 unitary of a gate; for two-qubit gates the operand order is
/// `(q0, q1)` with `q0` as the low bit of the index.
pub fn unitary(kind: GateKind) -> Vec<Vec<Complex64>> {
    let mut sv = StateVector::zero(kind.arity()).expect("small");
    let dim = 1 << kind.arity();
    let mut cols = Vec::with_capacity(dim);
    for b in 0..dim {
        sv.amps.iter_mut().for_each(|a| *a = c(0.0, 0.0));
        sv.amps[b] = c(1.0, 0.0);
        let g = if kind.arity() == 1 { Gate::one(kind, 0) } else { Gate::two(kind, 0, 1) };
        sv_apply(&mut sv, &g).expect("in range");
        cols.push(sv.amps.clone());
    }
    (0..dim).map(|r| (0..dim).map(|col| cols[col][r]).collect()).collect()
}

pub fn sv_apply(state: &mut StateVector, gate: &Gate) -> Result<(), OracleError> {
    for &q in gate.qubits() {
        if q as usize >= state.n {
            return Err(OracleError::OutOfRange(q as usize));
        }
    }
    let q0 = gate.q0();
    match gate.kind {
        GateKind::X | GateKind::Y | GateKind::Z | GateKind::H | GateKind::S | GateKind::Sdg => {
            state.apply_1q(q0, matrix(gate.kind))
        }
        GateKind::Cx | GateKind::Cy | GateKind::Cz => state.apply_c1q(q0, gate.q1(), matrix(gate.kind)),
        GateKind::Swap | GateKind::Iswap => {
            let (a, b) = (1 << q0, 1 << gate.q1());
            let phase = if gate.kind == GateKind::Iswap { c(0.0, 1.0) } else { c(1.0, 0.0) };
            for i in 0..state.amps.len() {
                if i & a != 0 && i & b == 0 {
                    let j = i ^ a ^ b;
                    let (u, v) = (state.amps[i], state.amps[j]);
                    state.amps[i] = phase * v;
                    state.amps[j] = phase * u;
                }
            }
        }
        GateKind::Measure => unreachable!("measurement is not a unitary"),
    }
    Ok(())
}

/// Born-rule measurement of qubit `q`, consuming one uniform draw.
pub fn sv_measure(state: &mut StateVector, q: usize, rng: &mut BitStream) -> Result<bool, OracleError> {
    if q >= state.n {
        return Err(OracleError::OutOfRange(q));
    }
    let p1 = state.prob_one(q);
    let bit = rng.next_f64() < p1;
    state.project(q, bit, if bit { p1 } else { 1.0 - p1 });
    Ok(bit)
}

/// Exact joint distribution of the measurement record. Key bit `m` is the outcome of the
/// `m`-th measurement in program order.
pub fn sv_distribution(circuit: &Circuit) -> Result<BTreeMap<u64, f64>, OracleError> {
    if circuit.num_qubits > DIST_MAX_QUBITS {
        return Err(OracleError::TooManyQubits(circuit.num_qubits));
    }
    if circuit.num_measurements() > DIST_MAX_MEASUREMENTS {
        return Err(OracleError::TooManyMeasurements(circuit.num_measurements()));
    }
    let mut out = BTreeMap::new();
    let sv = StateVector::zero(circuit.num_qubits)?;
    branch(&circuit.gates, sv, 0, 0, 1.0, &mut out)?;
    Ok(out)
}

const EPS: f64 = 1e-12;

fn branch(
    gates: &[Gate],
    mut sv: StateVector,
    ordinal: usize,
    key: u64,
    p: f64,
    out: &mut BTreeMap<u64, f64>,
) -> Result<(), OracleError> {
    for (i, g) in gates.iter().enumerate() {
        if g.kind.is_measure() {
            let q = g.q0();
            let p1 = sv.prob_one(q);
            if p1 > EPS {
                let mut s1 = sv.clone();
                s1.project(q, true, p1);
                branch(&gates[i + 1..], s1, ordinal + 1, key | 1 << ordinal, p * p1, out)?;
            }
            if 1.0 - p1 > EPS {
                sv.project(q, false, 1.0 - p1);
                return branch(&gates[i + 1..], sv, ordinal + 1, key, p * (1.0 - p1), out);
            }
            return Ok(());
        }
        sv_apply(&mut sv, g)?;
    }
    *out.entry(key).or_insert(0.0) += p;
    Ok(())
}

/// Replay a recorded run on the state vector, forcing the recorded outcomes. Fails if an
/// outcome flagged deterministic is not certain, if a certain outcome is flagged random or
/// differs, or if a random outcome does not have probability 1/2.
pub fn sv_replay(circuit: &Circuit, outcomes: &[Outcome]) -> Result<(), String> {
    let mut sv = StateVector::zero(circuit.num_qubits).map_err(|e| e.to_string())?;
    let mut m = 0;
    for g in &circuit.gates {
        if !g.kind.is_measure() {
            sv_apply(&mut sv, g).map_err(|e| e.to_string())?;
            continue;
        }
        let o = outcomes.get(m).ok_or("record shorter than circuit")?;
        let p1 = sv.prob_one(g.q0());
        let certain = p1 < 1e-9 || p1 > 1.0 - 1e-9;
        if certain != o.deterministic {
            return Err(format!("measurement {m}: deterministic={} but p1={p1}", o.deterministic));
        }
        if certain && (p1 > 0.5) != o.bit {
            return Err(format!("measurement {m}: deterministic outcome {} but p1={p1}", o.bit as u8));
        }
        if !certain && (p1 - 0.5).abs() > 1e-9 {
            return Err(format!("measurement {m}: random outcome with p1={p1}"));
        }
        sv.project(g.q0(), o.bit, if o.bit { p1 } else { 1.0 - p1 });
        m += 1;
    }
    Ok(())
}

/// One bit per cell. Rows `0..n` are destabilizers, `n..2n` stabilizers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalarTableau {
    pub n: usize,
    pub x: Vec<Vec<bool>>,
    pub z: Vec<Vec<bool>>,
    pub r: Vec<bool>,
}

/// Exponent of i picked up by multiplying single-qubit Paulis (x1,z1)(x2,z2).
fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 as i32 - x2 as i32,
        (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
        (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
    }
}

impl ScalarTableau {
    pub fn zero_state(n: usize) -> Self {
        let mut t = ScalarTableau { n, x: vec![vec![false; n]; 2 * n], z: vec![vec![false; n]; 2 * n], r: vec![false; 2 * n] };
        for i in 0..n {
            t.x[i][i] = true;
            t.z[n + i][i] = true;
        }
        t
    }

    pub fn from_packed<W: Word>(t: &Tableau<W>) -> Self {
        let n = t.num_qubits();
        let mut s = ScalarTableau { n, x: vec![vec![false; n]; 2 * n], z: vec![vec![false; n]; 2 * n], r: vec![false; 2 * n] };
        for row in 0..2 * n {
            for q in 0..n {
                s.x[row][q] = t.x_bit(row, q);
                s.z[row][q] = t.z_bit(row, q);
            }
            s.r[row] = t.sign(row);
        }
        s
    }

    pub fn to_packed<W: Word>(&self, layout: Layout) -> Tableau<W> {
        let mut t = Tableau::<W>::zeroed(self.n);
        t.to_layout(layout);
        for row in 0..2 * self.n {
            for q in 0..self.n {
                t.set_x_bit(row, q, self.x[row][q]);
                t.set_z_bit(row, q, self.z[row][q]);
            }
            t.set_sign(row, self.r[row]);
        }
        t
    }

    /// Phase exponent (mod 4) of row `a` times row `b` as Hermitian Paulis.
    fn phase(&self, a: usize, b: usize) -> i32 {
        let mut e = 0;
        for q in 0..self.n {
            e += g(self.x[a][q], self.z[a][q], self.x[b][q], self.z[b][q]);
        }
        e.rem_euclid(4)
    }

    /// Row `h` becomes row `h` times row `i`. Rows must commute.
    pub fn rowsum(&mut self, h: usize, i: usize) {
        let e = (2 * self.r[h] as i32 + 2 * self.r[i] as i32 + self.phase(h, i)).rem_euclid(4);
        assert!(e % 2 == 0, "rowsum of anticommuting rows");
        self.r[h] = e == 2;
        for q in 0..self.n {
            self.x[h][q] ^= self.x[i][q];
            self.z[h][q] ^= self.z[i][q];
        }
    }

    fn h(&mut self, q: usize) {
        for row in 0..2 * self.n {
            self.r[row] ^= self.x[row][q] & self.z[row][q];
            std::mem::swap(&mut self.x[row][q], &mut self.z[row][q]);
        }
    }

    fn s(&mut self, q: usize) {
        for row in 0..2 * self.n {
            self.r[row] ^= self.x[row][q] & self.z[row][q];
            self.z[row][q] ^= self.x[row][q];
        }
    }

    fn cx(&mut self, a: usize, b: usize) {
        for row in 0..2 * self.n {
            let (xa, za, xb, zb) = (self.x[row][a], self.z[row][a], self.x[row][b], self.z[row][b]);
            self.r[row] ^= xa & zb & !(xb ^ za);
            self.x[row][b] ^= xa;
            self.z[row][a] ^= zb;
        }
    }

    /// Apply a unitary through its H/S/CX decomposition.
    pub fn apply(&mut self, gate: &Gate) {
        let (a, b) = (gate.q0(), if gate.kind.arity() == 2 { gate.q1() } else { 0 });
        match gate.kind {
            GateKind::H => self.h(a),
            GateKind::S => self.s(a),
            GateKind::Sdg => (0..3).for_each(|_| self.s(a)),
            GateKind::Z => (0..2).for_each(|_| self.s(a)),
            GateKind::X => {
                self.h(a);
                self.s(a);
                self.s(a);
                self.h(a);
            }
            GateKind::Y => {
                self.apply(&Gate::one(GateKind::X, a));
                self.apply(&Gate::one(GateKind::Z, a));
            }
            GateKind::Cx => self.cx(a, b),
            GateKind::Cz => {
                self.h(b);
                self.cx(a, b);
                self.h(b);
            }
            GateKind::Cy => {
                self.apply(&Gate::one(GateKind::Sdg, b));
                self.cx(a, b);
                self.s(b);
            }
            GateKind::Swap => {
                self.cx(a, b);
                self.cx(b, a);
                self.cx(a, b);
            }
            GateKind::Iswap => {
                self.s(a);
                self.s(b);
                self.h(a);
                self.cx(a, b);
                self.cx(b, a);
                self.h(b);
            }
            GateKind::Measure => unreachable!("use measure"),
        }
    }

    /// Smallest stabilizer index with an X or Y on `q`.
    pub fn pivot(&self, q: usize) -> Option<usize> {
        (0..self.n).find(|&p| self.x[self.n + p][q])
    }

    /// Elimination against pivot `p`, one target at a time in ascending order.
    pub fn eliminate(&mut self, q: usize, p: usize) {
        let n = self.n;
        for t in p + 1..n {
            if self.x[n + t][q] {
                self.rowsum(p, t);
                self.rowsum(n + t, n + p);
            }
        }
    }

    pub fn swap(&mut self, q: usize, p: usize) {
        let n = self.n;
        if self.x[p][q] {
            let mut e = 0;
            for k in 0..n {
                e += g(self.x[n + p][k], self.z[n + p][k], self.x[p][k], self.z[p][k]);
            }
            let e = e.rem_euclid(4);
            assert!(e % 2 == 1);
            self.r[n + p] = self.r[n + p] ^ self.r[p] ^ ((e + 1) % 4 == 2);
            for k in 0..n {
                self.x[n + p][k] ^= self.x[p][k];
                self.z[n + p][k] ^= self.z[p][k];
            }
        } else {
            self.x.swap(p, n + p);
            self.z.swap(p, n + p);
            self.r.swap(p, n + p);
        }
    }

    /// Z eigenvalue on `q` when no stabilizer anticommutes with it.
    pub fn z_value(&self, q: usize) -> bool {
        let n = self.n;
        let mut scratch = self.clone();
        scratch.x.push(vec![false; n]);
        scratch.z.push(vec![false; n]);
        scratch.r.push(false);
        for i in 0..n {
            if self.x[i][q] {
                scratch.rowsum(2 * n, n + i);
            }
        }
        scratch.r[2 * n]
    }

    pub fn measure(&mut self, q: usize, rng: &mut BitStream) -> Outcome {
        match self.pivot(q) {
            Some(p) => {
                self.eliminate(q, p);
                self.swap(q, p);
                let v = self.z_value(q);
                let m = rng.next_bit();
                if m != v {
                    self.r[self.n + p] ^= true;
                }
                Outcome { qubit: q, bit: m, deterministic: false }
            }
            None => Outcome { qubit: q, bit: self.z_value(q), deterministic: true },
        }
    }

    /// One gate or measurement.
    pub fn chp_step(&mut self, gate: &Gate, rng: &mut BitStream) -> Option<Outcome> {
        if gate.kind.is_measure() {
            Some(self.measure(gate.q0(), rng))
        } else {
            self.apply(gate);
            None
        }
    }

    pub fn commutes(&self, a: usize, b: usize) -> bool {
        let mut acc = false;
        for q in 0..self.n {
            acc ^= (self.x[a][q] & self.z[b][q]) ^ (self.z[a][q] & self.x[b][q]);
        }
        !acc
    }

    /// Stabilizers commute pairwise, destabilizers commute pairwise, and destabilizer `i`
    /// anticommutes exactly with stabilizer `i`.
    pub fn is_valid(&self) -> bool {
        let n = self.n;
        for a in 0..2 * n {
            for b in a + 1..2 * n {
                let anti = !self.commutes(a, b);
                if anti != (b == a + n) {
                    return false;
                }
            }
        }
        true
    }
}

/// Run the circuit in single-shot schedule order. Outcomes are returned in program order.
pub fn chp_run(circuit: &Circuit, seed: u64) -> (ScalarTableau, Vec<Outcome>) {
    let schedule = schedule_windows(circuit, Mode::SingleShot);
    let mut t = ScalarTableau::zero_state(circuit.num_qubits);
    let mut rng = BitStream::new(seed);
    let mut map = crate::simulator::MeasureMap::new(circuit);
    let mut outcomes = vec![None; circuit.num_measurements()];
    for w in &schedule.windows {
        for g in &w.gates {
            if let Some(o) = t.chp_step(g, &mut rng) {
                outcomes[map.next(o.qubit)] = Some(o);
            }
        }
    }
    (t, outcomes.into_iter().map(|o| o.expect("scheduled")).collect())
}
