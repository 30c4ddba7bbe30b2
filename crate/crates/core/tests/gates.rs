use num_complex::Complex64;
use quasar_core::gates::{apply_gate, apply_window};
use quasar_core::oracle::{sv_apply, unitary, StateVector};
use quasar_core::scheduler::{schedule_windows, Mode};
use quasar_core::{generate_random, Gate, GateKind, Pauli, PauliString, Tableau};

type Matrix = Vec<Vec<Complex64>>;

fn zero(d: usize) -> Matrix {
    vec![vec![Complex64::new(0.0, 0.0); d]; d]
}

fn mul(a: &Matrix, b: &Matrix) -> Matrix {
    let d = a.len();
    let mut out = zero(d);
    for i in 0..d {
        for j in 0..d {
            out[i][j] = (0..d).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn dagger(a: &Matrix) -> Matrix {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| a[j][i].conj()).collect()).collect()
}

/// Dense matrix of a signed Pauli string; qubit 0 is the low index bit.
fn pauli_matrix(p: &PauliString) -> Matrix {
    let n = p.paulis.len();
    let d = 1 << n;
    let mut out = zero(d);
    for col in 0..d {
        let mut row = col;
        let mut amp = Complex64::new(if p.negative { -1.0 } else { 1.0 }, 0.0);
        for (q, &pq) in p.paulis.iter().enumerate() {
            let b = col >> q & 1;
            match pq {
                Pauli::I => {}
                Pauli::X => row ^= 1 << q,
                Pauli::Z => {
                    if b == 1 {
                        amp = -amp;
                    }
                }
                Pauli::Y => {
                    row ^= 1 << q;
                    amp *= if b == 0 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, -1.0) };
                }
            }
        }
        out[row][col] = amp;
    }
    out
}

fn close(a: &Matrix, b: &Matrix) -> bool {
    a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| (x - y).norm() < 1e-9)
}

fn all_paulis(n: usize) -> Vec<PauliString> {
    let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    (1..4usize.pow(n as u32))
        .flat_map(|code| {
            let paulis: Vec<Pauli> = (0..n).map(|q| letters[code >> (2 * q) & 3]).collect();
            [false, true].map(|negative| PauliString { negative, paulis: paulis.clone() })
        })
        .collect()
}

#[test]
fn every_rule_matches_conjugation_by_the_unitary() {
    for kind in GateKind::UNITARY {
        let n = kind.arity();
        let u = unitary(kind);
        let gate = if n == 1 { Gate::one(kind, 0) } else { Gate::two(kind, 0, 1) };
        for p in all_paulis(n) {
            let mut t = Tableau::<u8>::zeroed(n);
            t.set_generator(n, &p).unwrap();
            apply_gate(&mut t, gate).unwrap();
            let got = t.get_generator(n).unwrap();
            let want = mul(&mul(&u, &pauli_matrix(&p)), &dagger(&u));
            assert!(close(&pauli_matrix(&got), &want), "{kind:?}: {p} -> {got}");
        }
    }
}

#[test]
fn reversed_operands() {
    for kind in GateKind::UNITARY.into_iter().filter(|k| k.arity() == 2) {
        let u = unitary(kind);
        let swap = unitary(GateKind::Swap);
        let reversed = mul(&mul(&swap, &u), &swap);
        for p in all_paulis(2) {
            let mut t = Tableau::<u64>::zeroed(2);
            t.set_generator(2, &p).unwrap();
            apply_gate(&mut t, Gate::two(kind, 1, 0)).unwrap();
            let got = t.get_generator(2).unwrap();
            let want = mul(&mul(&reversed, &pauli_matrix(&p)), &dagger(&reversed));
            assert!(close(&pauli_matrix(&got), &want), "{kind:?}(1,0): {p} -> {got}");
        }
    }
}

fn apply_pauli(sv: &StateVector, p: &PauliString) -> Vec<Complex64> {
    let m = pauli_matrix(p);
    (0..sv.amps.len()).map(|i| (0..sv.amps.len()).map(|j| m[i][j] * sv.amps[j]).sum()).collect()
}

#[test]
fn stabilizers_fix_the_state_vector() {
    for seed in 0..60 {
        let n = 1 + (seed as usize % 6);
        let c = generate_random(n, 20, seed, 0.0);
        let mut sv = StateVector::zero(n).unwrap();
        for g in &c.gates {
            sv_apply(&mut sv, g).unwrap();
        }
        let mut t = Tableau::<u16>::zero_state(n);
        for w in schedule_windows(&c, Mode::SingleShot).windows {
            apply_window(&mut t, &w).unwrap();
        }
        t.check_group_validity().unwrap();
        for g in n..2 * n {
            let s = t.get_generator(g).unwrap();
            let v = apply_pauli(&sv, &s);
            for (a, b) in v.iter().zip(&sv.amps) {
                assert!((a - b).norm() < 1e-9, "seed {seed}: {s} does not stabilize");
            }
        }
    }
}

#[test]
fn window_equals_gate_by_gate_for_every_width() {
    fn run<W: quasar_core::Word>(seed: u64) -> Vec<PauliString> {
        let c = generate_random(70, 30, seed, 0.0);
        let mut t = Tableau::<W>::zero_state(70);
        for w in schedule_windows(&c, Mode::SingleShot).windows {
            apply_window(&mut t, &w).unwrap();
        }
        let mut u = Tableau::<W>::zero_state(70);
        for g in &c.gates {
            apply_gate(&mut u, *g).unwrap();
        }
        assert_eq!(t, u);
        (0..140).map(|g| t.get_generator(g).unwrap()).collect()
    }
    for seed in 0..5 {
        let a = run::<u8>(seed);
        assert_eq!(a, run::<u16>(seed));
        assert_eq!(a, run::<u32>(seed));
        assert_eq!(a, run::<u64>(seed));
    }
}

#[test]
fn window_rejects_shared_qubits() {
    let mut t = Tableau::<u64>::zero_state(3);
    let w = quasar_core::Window {
        gates: vec![Gate::one(GateKind::H, 0), Gate::two(GateKind::Cx, 1, 0)],
        is_measurement: false,
    };
    assert!(apply_window(&mut t, &w).is_err());
}
