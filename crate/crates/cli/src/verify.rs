use std::process::ExitCode;

use quasar_core::oracle::{DIST_MAX_MEASUREMENTS, DIST_MAX_QUBITS};
use quasar_core::verify::{
    check_full_run, check_ge, check_sampler, check_schedule, check_single_shot, circuit_specs, random_tableau, Fault,
};

use crate::{Outcome, VerifyArgs};

const P_MIN: f64 = 0.001;
const SINGLE_SHOT_MAX_QUBITS: usize = 6;
const SINGLE_SHOT_REPS: usize = 2000;
const SAMPLER_SHOTS: usize = 20_000;

struct Row {
    name: &'static str,
    passed: usize,
    total: usize,
    /// Fraction of trials that must pass.
    required: f64,
    note: Option<String>,
}

impl Row {
    fn ok(&self) -> bool {
        self.total == 0 || self.passed as f64 >= self.required * self.total as f64
    }
}

pub(crate) fn cmd_verify(a: VerifyArgs) -> Outcome<ExitCode> {
    if a.trials == 0 {
        eprintln!("warning: --trials 0, nothing was checked");
        println!("no trials: pass");
        return Ok(ExitCode::SUCCESS);
    }
    let fault = if a.inject_fault { Fault::BitFlip } else { Fault::None };
    let specs = circuit_specs(a.trials, a.qubits, a.depth, a.seed);
    let mut rows = Vec::new();

    let mut row = Row { name: "schedule", passed: 0, total: 0, required: 1.0, note: None };
    for s in &specs {
        row.total += 1;
        match check_schedule(&s.build(0.5)) {
            Ok(()) => row.passed += 1,
            Err(e) => row.note = row.note.take().or(Some(format!("{s:?}: {e}"))),
        }
    }
    rows.push(row);

    let mut row = Row { name: "full-run", passed: 0, total: 0, required: 1.0, note: None };
    for s in &specs {
        let c = s.build(0.5);
        row.total += 1;
        let r = check_full_run::<u64>(&c, s.seed, fault).and_then(|_| check_full_run::<u8>(&c, s.seed, fault));
        match r {
            Ok(_) => row.passed += 1,
            Err(e) => row.note = row.note.take().or(Some(format!("{s:?}: {e}"))),
        }
    }
    rows.push(row);

    let mut row = Row { name: "elimination", passed: 0, total: 0, required: 1.0, note: None };
    for s in &specs {
        let t = random_tableau::<u64>(s.n, s.depth, s.seed);
        let q = (s.seed % s.n as u64) as usize;
        for block in [2, 256] {
            row.total += 1;
            match check_ge(&t, q, block, fault) {
                Ok(_) => row.passed += 1,
                Err(e) => row.note = row.note.take().or(Some(format!("{s:?} block {block}: {e}"))),
            }
        }
    }
    rows.push(row);

    let mut single = Row { name: "single-shot", passed: 0, total: 0, required: 0.95, note: None };
    let mut classify = Row { name: "classification", passed: 0, total: 0, required: 1.0, note: None };
    let mut sampler = Row { name: "sampler", passed: 0, total: 0, required: 0.95, note: None };
    for s in &specs {
        let c = s.build(0.5);
        if c.num_qubits > DIST_MAX_QUBITS || c.num_measurements() > DIST_MAX_MEASUREMENTS {
            continue;
        }
        if c.num_qubits <= SINGLE_SHOT_MAX_QUBITS {
            let d = check_single_shot::<u64>(&c, SINGLE_SHOT_REPS, s.seed, fault);
            single.total += 1;
            classify.total += 1;
            single.passed += (d.chi.p_value > P_MIN) as usize;
            classify.passed += d.classification_ok as usize;
            if let Some(e) = d.first_error {
                classify.note = classify.note.take().or(Some(format!("{s:?}: {e}")));
            }
        }
        let d = check_sampler::<u64>(&c, SAMPLER_SHOTS, s.seed, fault);
        sampler.total += 1;
        sampler.passed += (d.chi.p_value > P_MIN) as usize;
    }
    rows.extend([single, classify, sampler]);

    let mut all = true;
    println!("{:<16}{:>10}  status", "suite", "passed");
    for r in &rows {
        all &= r.ok();
        println!("{:<16}{:>10}  {}", r.name, format!("{}/{}", r.passed, r.total), if r.ok() { "pass" } else { "FAIL" });
        if let (false, Some(n)) = (r.ok(), &r.note) {
            println!("    {n}");
        }
    }
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
