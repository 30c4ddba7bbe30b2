//! Differential and statistical checks against the oracles. Shared by the test suites and
//! the `verify` command.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::circuit::{generate_random, Circuit, Gate, GateKind};
use crate::gates::apply_window;
use crate::measure::{find_and_compact_pivots, parallel_ge_with_block, swap_anti_commuting};
use crate::oracle::{chp_run, sv_distribution, sv_replay, ScalarTableau};
use crate::sampler::sample;
use crate::scheduler::{schedule_windows, Mode};
use crate::simulator::{simulate, RunResult};
use crate::tableau::{Layout, Tableau};
use crate::word::Word;

/// Deliberate corruption for checking that the suites can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fault {
    #[default]
    None,
    /// Flip every measurement outcome of the engine, or one sign bit of its tableau.
    BitFlip,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Pearson chi-square of observed counts against exact probabilities. Observations outside
/// the support give p = 0.
pub fn chi_square(observed: &HashMap<u64, usize>, expected: &BTreeMap<u64, f64>) -> ChiSquare {
    let total: usize = observed.values().sum();
    let support: Vec<(u64, f64)> = expected.iter().filter(|(_, &p)| p > 1e-12).map(|(&k, &p)| (k, p)).collect();
    if observed.keys().any(|k| !support.iter().any(|(s, _)| s == k)) {
        return ChiSquare { statistic: f64::INFINITY, df: support.len().saturating_sub(1), p_value: 0.0 };
    }
    let df = support.len().saturating_sub(1);
    if df == 0 {
        return ChiSquare { statistic: 0.0, df, p_value: 1.0 };
    }
    let statistic = support
        .iter()
        .map(|&(k, p)| {
            let e = p * total as f64;
            let o = *observed.get(&k).unwrap_or(&0) as f64;
            (o - e) * (o - e) / e
        })
        .sum::<f64>();
    let p_value = ChiSquared::new(df as f64).expect("df > 0").sf(statistic);
    ChiSquare { statistic, df, p_value }
}

fn key(bits: impl IntoIterator<Item = bool>) -> u64 {
    bits.into_iter().enumerate().fold(0, |k, (i, b)| k | (b as u64) << i)
}

#[derive(Clone, Debug)]
pub struct DistributionCheck {
    pub chi: ChiSquare,
    /// Every run's deterministic flags and deterministic values agree with the oracle.
    pub classification_ok: bool,
    pub first_error: Option<String>,
}

/// `reps` independent single-shot runs with seeds `seed..seed + reps`.
pub fn check_single_shot<W: Word>(circuit: &Circuit, reps: usize, seed: u64, fault: Fault) -> DistributionCheck {
    let expected = sv_distribution(circuit).expect("circuit within oracle limits");
    let mut counts = HashMap::new();
    let mut first_error = None;
    for r in 0..reps as u64 {
        let mut run = simulate::<W>(circuit, seed.wrapping_add(r)).expect("simulation");
        if fault == Fault::BitFlip {
            run.outcomes.iter_mut().for_each(|o| o.bit ^= true);
        }
        if first_error.is_none() {
            if let Err(e) = sv_replay(circuit, &run.outcomes) {
                first_error = Some(e);
            }
        }
        *counts.entry(key(run.outcomes.iter().map(|o| o.bit))).or_insert(0) += 1;
    }
    DistributionCheck { chi: chi_square(&counts, &expected), classification_ok: first_error.is_none(), first_error }
}

/// One sampler call with `shots` shots.
pub fn check_sampler<W: Word>(circuit: &Circuit, shots: usize, seed: u64, fault: Fault) -> DistributionCheck {
    let expected = sv_distribution(circuit).expect("circuit within oracle limits");
    let rec = sample::<W>(circuit, shots, seed).expect("sampling");
    let mut counts = HashMap::new();
    for s in 0..shots {
        let mut bits = rec.shot(s);
        if fault == Fault::BitFlip {
            bits.iter_mut().for_each(|b| *b ^= true);
        }
        *counts.entry(key(bits)).or_insert(0) += 1;
    }
    DistributionCheck { chi: chi_square(&counts, &expected), classification_ok: true, first_error: None }
}

/// Packed engine against the scalar tableau with the same seed: final tableaus and
/// records must be bit-identical. Returns the engine's run.
pub fn check_full_run<W: Word>(circuit: &Circuit, seed: u64, fault: Fault) -> Result<RunResult<W>, String> {
    let mut run = simulate::<W>(circuit, seed).map_err(|e| e.to_string())?;
    if fault == Fault::BitFlip {
        run.tableau.flip_sign(0);
    }
    let (reference, outcomes) = chp_run(circuit, seed);
    if run.outcomes != outcomes {
        let m = run.outcomes.iter().zip(&outcomes).position(|(a, b)| a != b).unwrap_or(0);
        return Err(format!("record differs at measurement {m}"));
    }
    let got = ScalarTableau::from_packed(&run.tableau);
    if got != reference {
        return Err(first_difference(&got, &reference));
    }
    if !run.tableau.padding_is_zero() {
        return Err("padding bits set".into());
    }
    Ok(run)
}

fn first_difference(a: &ScalarTableau, b: &ScalarTableau) -> String {
    for row in 0..2 * a.n {
        if a.r[row] != b.r[row] {
            return format!("sign of generator {row} differs");
        }
        if a.x[row] != b.x[row] || a.z[row] != b.z[row] {
            return format!("generator {row} differs");
        }
    }
    "tableaus differ".into()
}

/// The zero-state tableau scrambled by `layers` random layers of H, S, X and CX.
pub fn random_tableau<W: Word>(n: usize, layers: usize, seed: u64) -> Tableau<W> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tableau::<W>::zero_state(n);
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..layers {
        rand::seq::SliceRandom::shuffle(&mut perm[..], &mut rng);
        let mut gates = Vec::new();
        let mut i = 0;
        while i < n {
            let r = rng.random_range(0..4);
            if r == 3 && i + 1 < n {
                gates.push(Gate::two(GateKind::Cx, perm[i], perm[i + 1]));
                i += 2;
            } else {
                let kind = [GateKind::H, GateKind::S, GateKind::X, GateKind::H][r];
                gates.push(Gate::one(kind, perm[i]));
                i += 1;
            }
        }
        apply_window(&mut t, &crate::scheduler::Window { gates, is_measurement: false }).expect("window");
    }
    t
}

/// Elimination for observable `Z_q`: the packed three-pass elimination with block size
/// `block`, then the swap, must equal the scalar strictly ordered elimination and swap.
/// Returns the packed result, or `None` when `Z_q` has no pivot.
pub fn check_ge<W: Word>(t: &Tableau<W>, q: usize, block: usize, fault: Fault) -> Result<Option<Tableau<W>>, String> {
    let mut scalar = ScalarTableau::from_packed(t);
    let mut packed = t.clone();
    packed.to_layout(Layout::RowMajor);
    let pivots = find_and_compact_pivots(&packed, q).map_err(|e| e.to_string())?;
    let Some(p) = scalar.pivot(q) else {
        return if pivots.count == 0 { Ok(None) } else { Err("pivot lists disagree".into()) };
    };
    if pivots.count == 0 || pivots.entries[0] as usize != p {
        return Err("pivot lists disagree".into());
    }
    parallel_ge_with_block(&mut packed, &pivots, block).map_err(|e| e.to_string())?;
    scalar.eliminate(q, p);
    if fault == Fault::BitFlip {
        packed.flip_sign(p);
    }
    let after_ge = ScalarTableau::from_packed(&packed);
    if after_ge != scalar {
        return Err(format!("after elimination: {}", first_difference(&after_ge, &scalar)));
    }
    swap_anti_commuting(&mut packed, p, q).map_err(|e| e.to_string())?;
    scalar.swap(q, p);
    let after_swap = ScalarTableau::from_packed(&packed);
    if after_swap != scalar {
        return Err(format!("after swap: {}", first_difference(&after_swap, &scalar)));
    }
    Ok(Some(packed))
}

/// Parameters of one random circuit in a sweep.
#[derive(Clone, Copy, Debug)]
pub struct CircuitSpec {
    pub n: usize,
    pub depth: usize,
    pub seed: u64,
}

/// Deterministic sweep of circuit parameters.
pub fn circuit_specs(count: usize, n: (usize, usize), depth: (usize, usize), seed: u64) -> Vec<CircuitSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| CircuitSpec {
            n: rng.random_range(n.0..=n.1),
            depth: rng.random_range(depth.0..=depth.1),
            seed: rng.random(),
        })
        .collect()
}

impl CircuitSpec {
    pub fn build(&self, measure_prob: f64) -> Circuit {
        generate_random(self.n, self.depth, self.seed, measure_prob)
    }
}

/// Scheduler sweep: every schedule of every circuit validates, in both modes.
pub fn check_schedule(circuit: &Circuit) -> Result<(), String> {
    for mode in [Mode::SingleShot, Mode::Sampling] {
        let s = schedule_windows(circuit, mode);
        crate::scheduler::validate_schedule(circuit, &s).map_err(|v| format!("{mode:?}: {v}"))?;
    }
    Ok(())
}
