use num_complex::Complex64;
use quasar_core::oracle::{chp_run, sv_apply, sv_distribution, sv_measure, ScalarTableau, StateVector};
use quasar_core::verify::{check_single_shot, chi_square, random_tableau, Fault};
use quasar_core::{generate_random, BitStream, Circuit, Gate, GateKind, Layout, Tableau};

fn close(a: Complex64, re: f64, im: f64) -> bool {
    (a - Complex64::new(re, im)).norm() < 1e-12
}

#[test]
fn hadamard_and_cx_amplitudes() {
    let mut sv = StateVector::zero(1).unwrap();
    sv_apply(&mut sv, &Gate::one(GateKind::H, 0)).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!(close(sv.amps[0], h, 0.0) && close(sv.amps[1], h, 0.0));

    let mut sv = StateVector::zero(2).unwrap();
    sv_apply(&mut sv, &Gate::one(GateKind::X, 0)).unwrap();
    sv_apply(&mut sv, &Gate::two(GateKind::Cx, 0, 1)).unwrap();
    assert!(close(sv.amps[3], 1.0, 0.0));
    assert!(sv_apply(&mut sv, &Gate::one(GateKind::H, 2)).is_err());
}

#[test]
fn gates_preserve_norm() {
    let c = generate_random(6, 60, 1, 0.0);
    let mut sv = StateVector::zero(6).unwrap();
    for g in &c.gates {
        sv_apply(&mut sv, g).unwrap();
        assert!((sv.norm_sqr() - 1.0).abs() < 1e-10);
    }
    assert!(StateVector::zero(15).is_err());
}

#[test]
fn born_rule_measurements() {
    let mut rng = BitStream::new(3);
    let mut sv = StateVector::zero(1).unwrap();
    assert!(!sv_measure(&mut sv, 0, &mut rng).unwrap());

    let mut ones = 0;
    for _ in 0..2000 {
        let mut sv = StateVector::zero(2).unwrap();
        sv_apply(&mut sv, &Gate::one(GateKind::H, 0)).unwrap();
        sv_apply(&mut sv, &Gate::two(GateKind::Cx, 0, 1)).unwrap();
        let a = sv_measure(&mut sv, 0, &mut rng).unwrap();
        assert_eq!(sv.prob_one(1), if a { 1.0 } else { 0.0 });
        ones += a as usize;
    }
    assert!((900..1100).contains(&ones));
}

#[test]
fn enumerated_distributions() {
    let mut c = Circuit::new(1);
    c.push(Gate::one(GateKind::H, 0));
    c.push(Gate::measure(0));
    let d = sv_distribution(&c).unwrap();
    assert_eq!(d.len(), 2);
    assert!((d[&0] - 0.5).abs() < 1e-12 && (d[&1] - 0.5).abs() < 1e-12);

    let mut ghz = Circuit::new(3);
    ghz.push(Gate::one(GateKind::H, 0));
    ghz.push(Gate::two(GateKind::Cx, 0, 1));
    ghz.push(Gate::two(GateKind::Cx, 1, 2));
    (0..3).for_each(|q| ghz.push(Gate::measure(q)));
    let d = sv_distribution(&ghz).unwrap();
    assert_eq!(d.keys().copied().collect::<Vec<_>>(), [0b000, 0b111]);

    for seed in 0..30 {
        let c = generate_random(8, 30, seed, 0.7);
        let total: f64 = sv_distribution(&c).unwrap().values().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
    assert!(sv_distribution(&Circuit::new(13)).is_err());
}

#[test]
fn pack_unpack_round_trip() {
    for n in [1, 7, 64, 65] {
        let t = random_tableau::<u32>(n, 8, n as u64);
        let s = ScalarTableau::from_packed(&t);
        assert!(s.is_valid());
        assert_eq!(s.to_packed::<u32>(Layout::ColumnMajor), t);
        let mut r = t.clone();
        r.to_layout(Layout::RowMajor);
        assert_eq!(ScalarTableau::from_packed(&r), s);
        assert_eq!(s.to_packed::<u32>(Layout::RowMajor), r);
    }
}

#[test]
fn single_pivot_elimination_is_a_no_op() {
    let mut t = ScalarTableau::zero_state(3);
    t.apply(&Gate::one(GateKind::H, 2));
    let before = t.clone();
    assert_eq!(t.pivot(2), Some(2));
    t.eliminate(2, 2);
    assert_eq!(t, before);
}

#[test]
fn scalar_runs_stay_valid_and_agree_with_packed_zero_state() {
    assert_eq!(ScalarTableau::zero_state(9), ScalarTableau::from_packed(&Tableau::<u8>::zero_state(9)));
    for seed in 0..20 {
        let c = generate_random(12, 20, seed, 0.6);
        let (t, rec) = chp_run(&c, seed);
        assert!(t.is_valid());
        assert_eq!(rec.len(), c.num_measurements());
    }
}

#[test]
fn scalar_decompositions_match_state_vector() {
    for seed in 0..30 {
        let c = generate_random(4, 15, seed, 0.0);
        let mut sv = StateVector::zero(4).unwrap();
        let mut t = ScalarTableau::zero_state(4);
        for g in &c.gates {
            sv_apply(&mut sv, g).unwrap();
            t.apply(g);
        }
        let packed: Tableau<u64> = t.to_packed(Layout::ColumnMajor);
        for q in 0..4 {
            // Z_q expectation is +-1 exactly when the tableau says deterministic.
            let p1 = sv.prob_one(q);
            let det = (4..8).all(|g| !packed.x_bit(g, q));
            assert_eq!(det, p1 < 1e-9 || p1 > 1.0 - 1e-9, "seed {seed} qubit {q}");
        }
    }
}

#[test]
fn chi_square_basics() {
    let d = std::collections::BTreeMap::from([(0u64, 0.5), (1, 0.5)]);
    let even = std::collections::HashMap::from([(0u64, 500usize), (1, 500)]);
    assert!(chi_square(&even, &d).p_value > 0.99);
    let skewed = std::collections::HashMap::from([(0u64, 600usize), (1, 400)]);
    assert!(chi_square(&skewed, &d).p_value < 1e-6);
    let outside = std::collections::HashMap::from([(2u64, 1usize)]);
    assert_eq!(chi_square(&outside, &d).p_value, 0.0);
}

#[test]
fn single_shot_matches_born_distribution() {
    let mut passed = 0;
    for seed in 0..10u64 {
        let c = generate_random(2 + seed as usize % 5, 20, 500 + seed, 0.8);
        let check = check_single_shot::<u64>(&c, 4000, seed * 100_000, Fault::None);
        assert!(check.classification_ok, "{:?}", check.first_error);
        passed += (check.chi.p_value > 0.001) as usize;
    }
    assert!(passed >= 9, "{passed}/10");
}

#[test]
fn faulty_runs_fail_classification() {
    let mut c = Circuit::new(1);
    c.push(Gate::measure(0));
    let check = check_single_shot::<u64>(&c, 10, 0, Fault::BitFlip);
    assert!(!check.classification_ok);
    assert_eq!(check.chi.p_value, 0.0);
}
