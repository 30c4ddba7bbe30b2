//! Window-by-window driver: unitary windows run column-major, measurement windows run
//! row-major, and the tableau is transposed only when the layout has to change.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::circuit::Circuit;
use crate::gates::{apply_window, GateError};
use crate::measure::{measure_window_rows, MeasureError, Outcome};
use crate::rng::BitStream;
use crate::scheduler::{schedule_windows, Mode, Schedule};
use crate::tableau::{Layout, Tableau};
use crate::word::Word;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Wall time per phase: tableau evolution (unitary windows), transposes, nondeterminism
/// scans plus pivot compaction, elimination plus collapse.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimes {
    pub to: Duration,
    pub t: Duration,
    pub cmp: Duration,
    pub ge: Duration,
}

impl PhaseTimes {
    pub fn total(&self) -> Duration {
        self.to + self.t + self.cmp + self.ge
    }
}

impl std::ops::AddAssign for PhaseTimes {
    fn add_assign(&mut self, o: Self) {
        self.to += o.to;
        self.t += o.t;
        self.cmp += o.cmp;
        self.ge += o.ge;
    }
}

#[derive(Clone, Debug)]
pub struct RunResult<W: Word> {
    pub tableau: Tableau<W>,
    /// Outcomes in program order of the measurement gates.
    pub outcomes: Vec<Outcome>,
    /// Final classical register.
    pub clbits: Vec<bool>,
    pub times: PhaseTimes,
    pub windows: usize,
    pub measurement_windows: usize,
    pub transposes: usize,
    pub random_bits: u64,
}

impl<W: Word> RunResult<W> {
    pub fn outcome_bits(&self) -> Vec<bool> {
        self.outcomes.iter().map(|o| o.bit).collect()
    }
}

/// Per-qubit queues mapping the k-th measurement of a qubit to its program ordinal.
pub(crate) struct MeasureMap {
    queues: Vec<VecDeque<usize>>,
}

impl MeasureMap {
    pub(crate) fn new(circuit: &Circuit) -> Self {
        let mut queues = vec![VecDeque::new(); circuit.num_qubits];
        for (ordinal, q) in circuit.measured_qubits().into_iter().enumerate() {
            queues[q].push_back(ordinal);
        }
        MeasureMap { queues }
    }

    pub(crate) fn next(&mut self, q: usize) -> usize {
        self.queues[q].pop_front().expect("measurement not in circuit")
    }
}

pub fn simulate<W: Word>(circuit: &Circuit, seed: u64) -> Result<RunResult<W>, SimError> {
    let schedule = schedule_windows(circuit, Mode::SingleShot);
    simulate_schedule(circuit, &schedule, Tableau::zero_state(circuit.num_qubits), BitStream::new(seed))
}

/// Run a precomputed schedule from an arbitrary initial tableau.
pub fn simulate_schedule<W: Word>(
    circuit: &Circuit,
    schedule: &Schedule,
    mut tableau: Tableau<W>,
    mut rng: BitStream,
) -> Result<RunResult<W>, SimError> {
    let mut times = PhaseTimes::default();
    let mut transposes = 0;
    let mut map = MeasureMap::new(circuit);
    let mut outcomes: Vec<Option<Outcome>> = vec![None; circuit.num_measurements()];
    let mut measurement_windows = 0;
    for window in &schedule.windows {
        let want = if window.is_measurement { Layout::RowMajor } else { Layout::ColumnMajor };
        if tableau.layout() != want {
            let t0 = Instant::now();
            tableau.transpose_in_place();
            times.t += t0.elapsed();
            transposes += 1;
        }
        if window.is_measurement {
            measurement_windows += 1;
            let rec = measure_window_rows(&mut tableau, window, &mut rng, &mut times)?;
            for o in rec.outcomes {
                outcomes[map.next(o.qubit)] = Some(o);
            }
        } else {
            let t0 = Instant::now();
            apply_window(&mut tableau, window)?;
            times.to += t0.elapsed();
        }
    }
    if tableau.layout() != Layout::ColumnMajor {
        let t0 = Instant::now();
        tableau.transpose_in_place();
        times.t += t0.elapsed();
        transposes += 1;
    }
    let outcomes: Vec<Outcome> = outcomes.into_iter().map(|o| o.expect("every measurement scheduled")).collect();
    let mut clbits = vec![false; circuit.num_clbits];
    for (o, &c) in outcomes.iter().zip(&circuit.clbits) {
        clbits[c as usize] = o.bit;
    }
    Ok(RunResult {
        tableau,
        outcomes,
        clbits,
        times,
        windows: schedule.windows.len(),
        measurement_windows,
        transposes,
        random_bits: rng.draws(),
    })
}
