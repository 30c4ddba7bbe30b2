//! One line per acceptance criterion. Run with `cargo test -p quasar-cli --test acceptance`;
//! extra arguments that parse as numbers select criteria.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::process::Command;
use std::time::{Duration, Instant};

use quasar_core::bitplane::{compact_select, compact_select_blocked, exclusive_scan_xor, exclusive_scan_xor_blocked, reduce_xor};
use quasar_core::gates::{apply_gate, apply_window};
use quasar_core::oracle::sv_replay;
use quasar_core::rng::philox4x32;
use quasar_core::sampler::sample;
use quasar_core::verify::{
    check_full_run, check_ge, check_sampler, check_schedule, check_single_shot, circuit_specs, random_tableau, Fault,
};
use quasar_core::{generate_random, simulate, Gate, GateKind, Layout, PauliString, Tableau, Window, Word};

// Pinned parameters.
const SEED: u64 = 20_251_016;
const P_MIN: f64 = 0.001;
const PASS_FRACTION: f64 = 0.95;
const C1_CIRCUITS: usize = 200;
const C1_SINGLE_SHOT_MAX_N: usize = 6;
const C1_REPS: usize = 20_000;
const C1_SHOTS: usize = 20_000;
const C1_REPLAYS: usize = 200;
const C1_BUDGET: Duration = Duration::from_secs(600);
const C2_TABLEAUS: usize = 1000;
const C2_SIZES: [usize; 4] = [64, 128, 512, 1024];
const C2_BLOCKS: [usize; 4] = [2, 32, 256, 1024];
const C3_CIRCUITS: usize = 300;
const C4_SIZES: [usize; 6] = [1, 63, 64, 65, 1000, 4096];
const C5_LEN: usize = 100_000;
const C5_BLOCKS: [usize; 7] = [1, 2, 3, 32, 256, 1024, 65_536];
const C7_CIRCUITS: usize = 1000;
const C8_QUBITS: usize = 16_384;
const C8_BUDGET_S: f64 = 300.0;
const C9_QUBITS: usize = 4096;
const C9_RATIO: f64 = 4.0;
const C10_THREADS: [usize; 3] = [1, 4, 8];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn hash_words<W: Word>(h: &mut DefaultHasher, t: &Tableau<W>) {
    for w in t.x_words().iter().chain(t.z_words()).chain(t.sign_words()) {
        w.to_u64().hash(h);
    }
}

/// Criterion 1. Returns the verdict and a digest of every statistic.
fn oracle_distributions() -> (Verdict, u64) {
    let start = Instant::now();
    let mut h = DefaultHasher::new();
    let specs = circuit_specs(C1_CIRCUITS, (2, 10), (5, 50), SEED);
    let (mut single_pass, mut single_total, mut sampler_pass, mut classified, mut informative) = (0, 0, 0, 0, 0);
    let mut first_error = None;
    for s in &specs {
        let c = s.build(0.5);
        let sampled = check_sampler::<u64>(&c, C1_SHOTS, s.seed, Fault::None);
        sampled.chi.statistic.to_bits().hash(&mut h);
        sampler_pass += (sampled.chi.p_value > P_MIN) as usize;
        informative += (sampled.chi.df > 0) as usize;
        let mut ok = true;
        if c.num_qubits <= C1_SINGLE_SHOT_MAX_N {
            let d = check_single_shot::<u64>(&c, C1_REPS, s.seed, Fault::None);
            d.chi.statistic.to_bits().hash(&mut h);
            single_total += 1;
            single_pass += (d.chi.p_value > P_MIN) as usize;
            if let Some(e) = d.first_error {
                ok = false;
                first_error.get_or_insert(format!("{s:?}: {e}"));
            }
        } else {
            for r in 0..C1_REPLAYS as u64 {
                let run = simulate::<u64>(&c, s.seed.wrapping_add(r)).expect("simulation");
                run.outcome_bits().hash(&mut h);
                if let Err(e) = sv_replay(&c, &run.outcomes) {
                    ok = false;
                    first_error.get_or_insert(format!("{s:?}: {e}"));
                    break;
                }
            }
        }
        classified += ok as usize;
    }
    let elapsed = start.elapsed();
    let pass = single_pass as f64 >= PASS_FRACTION * single_total as f64
        && sampler_pass as f64 >= PASS_FRACTION * C1_CIRCUITS as f64
        && classified == C1_CIRCUITS
        && elapsed < C1_BUDGET;
    let mut detail = format!(
        "single-shot {single_pass}/{single_total}, sampler {sampler_pass}/{C1_CIRCUITS} at p > {P_MIN} \
         ({informative} with >1 outcome), classification {classified}/{C1_CIRCUITS}, {:.0} s",
        elapsed.as_secs_f64()
    );
    if let Some(e) = first_error {
        detail.push_str(&format!("; {e}"));
    }
    (verdict(pass, detail), h.finish())
}

/// Criterion 2.
fn elimination_equivalence() -> (Verdict, u64) {
    let mut h = DefaultHasher::new();
    let (mut checks, mut with_pivots, mut failures) = (0, 0, Vec::new());
    for i in 0..C2_TABLEAUS {
        let n = C2_SIZES[i % C2_SIZES.len()];
        let seed = SEED ^ (i as u64) << 20;
        let layers = 2 * n.ilog2() as usize + 4;
        let t = random_tableau::<u64>(n, layers, seed);
        let q = (philox4x32([i as u32, 0, 0, 2], [SEED as u32, 0])[0] as usize) % n;
        for block in C2_BLOCKS {
            checks += 1;
            match check_ge(&t, q, block, Fault::None) {
                Ok(Some(out)) => {
                    with_pivots += 1;
                    hash_words(&mut h, &out);
                }
                Ok(None) => {}
                Err(e) => failures.push(format!("tableau {i} n={n} q={q} block {block}: {e}")),
            }
        }
    }
    let detail = format!(
        "{} of {checks} eliminations bit-identical ({with_pivots} with pivots){}",
        checks - failures.len(),
        failures.first().map(|f| format!("; {f}")).unwrap_or_default()
    );
    (verdict(failures.is_empty() && with_pivots > 0, detail), h.finish())
}

/// Criterion 3.
fn full_run_equality() -> (Verdict, u64) {
    let mut h = DefaultHasher::new();
    let specs = circuit_specs(C3_CIRCUITS, (16, 256), (1, 200), SEED + 3);
    let (mut ok, mut measured, mut failures) = (0, 0, Vec::new());
    for s in &specs {
        let c = s.build(0.5);
        match check_full_run::<u64>(&c, s.seed, Fault::None) {
            Ok(run) => {
                ok += 1;
                measured += run.outcomes.len();
                run.outcome_bits().hash(&mut h);
                hash_words(&mut h, &run.tableau);
            }
            Err(e) => failures.push(format!("{s:?}: {e}")),
        }
    }
    let detail = format!(
        "{ok}/{C3_CIRCUITS} circuits bit-identical, {measured} outcomes compared{}",
        failures.first().map(|f| format!("; {f}")).unwrap_or_default()
    );
    (verdict(failures.is_empty(), detail), h.finish())
}

fn transpose_case<W: Word>(n: usize) -> Result<(), String> {
    let mut t = Tableau::<W>::zeroed(n);
    for g in 0..2 * n {
        for q in 0..n {
            let r = philox4x32([g as u32, q as u32, 0, 3], [n as u32, W::BITS]);
            t.set_x_bit(g, q, r[0] & 1 == 1);
            t.set_z_bit(g, q, r[1] & 1 == 1);
        }
        t.set_sign(g, g % 3 == 0);
    }
    let mut u = t.clone();
    u.transpose_in_place();
    let w = W::BITS as usize;
    let nq = t.padded();
    let bit = |v: &[W], i: usize| v[i / w].bit(i % w);
    for (cm, rm) in [(t.x_words(), u.x_words()), (t.z_words(), u.z_words())] {
        for half in 0..2 {
            for r in 0..nq {
                for q in 0..nq {
                    if bit(cm, q * 2 * nq + half * nq + r) != bit(rm, r * 2 * nq + half * nq + q) {
                        return Err(format!("n={n} w={w}: bit ({r},{q}) differs"));
                    }
                }
            }
        }
    }
    if u.layout() != Layout::RowMajor || u.sign_words() != t.sign_words() {
        return Err(format!("n={n} w={w}: layout or signs changed"));
    }
    u.transpose_in_place();
    if u != t {
        return Err(format!("n={n} w={w}: not an involution"));
    }
    Ok(())
}

/// Criterion 4.
fn transpose_correctness() -> Verdict {
    let mut failures = Vec::new();
    for n in C4_SIZES {
        for r in [transpose_case::<u8>(n), transpose_case::<u32>(n), transpose_case::<u64>(n)] {
            if let Err(e) = r {
                failures.push(e);
            }
        }
    }
    let total = C4_SIZES.len() * 3;
    verdict(
        failures.is_empty(),
        format!("{}/{total} (n, w) cases equal the naive transpose and invert{}", total - failures.len(),
            failures.first().map(|f| format!("; {f}")).unwrap_or_default()),
    )
}

/// Criterion 5.
fn primitive_correctness() -> Verdict {
    let words: Vec<u64> = (0..C5_LEN as u32)
        .map(|i| {
            let r = philox4x32([i, 0, 0, 5], [SEED as u32, 1]);
            (r[1] as u64) << 32 | r[0] as u64
        })
        .collect();
    let mut acc = 0;
    let scan_want: Vec<u64> = words
        .iter()
        .map(|&x| {
            let p = acc;
            acc ^= x;
            p
        })
        .collect();
    let scan_want = (scan_want, acc);
    let mut failures = Vec::new();
    if exclusive_scan_xor(&words) != scan_want {
        failures.push("scan".to_string());
    }
    if reduce_xor(&words) != acc {
        failures.push("reduce".to_string());
    }
    for len in [0usize, 1, 2, 63, 64, 65, 4097] {
        if reduce_xor(&words[..len]) != words[..len].iter().fold(0, |a, &b| a ^ b) {
            failures.push(format!("reduce len {len}"));
        }
    }
    let flags: Vec<i32> = words.iter().enumerate().map(|(i, w)| if w & 7 == 0 { i as i32 } else { -1 }).collect();
    let kept: Vec<i32> = flags.iter().copied().filter(|&v| v != -1).collect();
    let mut compact_want = kept.clone();
    compact_want.resize(C5_LEN, -1);
    let mut got = flags.clone();
    if compact_select(&mut got, -1) != kept.len() || got != compact_want {
        failures.push("compact".to_string());
    }
    for b in C5_BLOCKS {
        if exclusive_scan_xor_blocked(&words, b) != scan_want {
            failures.push(format!("scan block {b}"));
        }
        let mut got = flags.clone();
        if compact_select_blocked(&mut got, -1, b) != kept.len() || got != compact_want {
            failures.push(format!("compact block {b}"));
        }
    }
    let mut example = vec![-1, 1, -1, 3, 4, -1];
    compact_select(&mut example, -1);
    if example != [1, 3, 4, -1, -1, -1] {
        failures.push("worked example".to_string());
    }
    verdict(
        failures.is_empty(),
        format!(
            "scan, reduce and compact on {C5_LEN} inputs, blocks {C5_BLOCKS:?}, worked example{}",
            failures.first().map(|f| format!("; failed: {f}")).unwrap_or_default()
        ),
    )
}

fn gens(t: &Tableau<u64>, r: std::ops::Range<usize>) -> Vec<String> {
    r.map(|g| t.get_generator(g).unwrap().to_string()).collect()
}

/// Criterion 6.
fn worked_fixtures() -> Verdict {
    let mut failures = Vec::new();
    // Three-generator decode.
    let x: Vec<PauliString> = ["+XII", "+IXI", "+IIX"].iter().map(|s| s.parse().unwrap()).collect();
    let mut t = Tableau::<u64>::from_generators(&x, &x).unwrap();
    for (i, (xs, zs, s)) in [("000", "100", false), ("100", "110", true), ("011", "001", true)].iter().enumerate() {
        for q in 0..3 {
            t.set_x_bit(3 + i, q, xs.as_bytes()[q] == b'1');
            t.set_z_bit(3 + i, q, zs.as_bytes()[q] == b'1');
        }
        t.set_sign(3 + i, *s);
    }
    if gens(&t, 3..6) != ["+ZII", "-YZI", "-IXY"] {
        failures.push(format!("decode gave {:?}", gens(&t, 3..6)));
    }
    // |+01> from the basis state and H.
    let mut t = Tableau::<u64>::new_basis_state(&[false, false, true]).unwrap();
    apply_gate(&mut t, Gate::one(GateKind::H, 0)).unwrap();
    if gens(&t, 0..3) != ["+ZII", "+IXI", "-IIX"] || gens(&t, 3..6) != ["+XII", "+IZI", "-IIZ"] {
        failures.push(format!("init gave {:?} {:?}", gens(&t, 0..3), gens(&t, 3..6)));
    }
    // H on qubit 1 and P on qubit 3 applied to |000>, one window.
    let mut t = Tableau::<u64>::zero_state(3);
    let w = Window { gates: vec![Gate::one(GateKind::H, 0), Gate::one(GateKind::S, 2)], is_measurement: false };
    apply_window(&mut t, &w).unwrap();
    let bits: Vec<String> = (3..6)
        .map(|g| {
            let x: String = (0..3).map(|q| if t.x_bit(g, q) { '1' } else { '0' }).collect();
            let z: String = (0..3).map(|q| if t.z_bit(g, q) { '1' } else { '0' }).collect();
            format!("{x}|{z}|{}", t.sign(g) as u8)
        })
        .collect();
    if bits != ["100|000|0", "000|010|0", "000|001|0"] {
        failures.push(format!("window gave {bits:?}"));
    }
    verdict(failures.is_empty(), failures.first().cloned().unwrap_or_else(|| "decode, init and window tableaus exact".into()))
}

/// Criterion 7.
fn scheduler_properties() -> Verdict {
    let specs = circuit_specs(C7_CIRCUITS, (1, 64), (1, 80), SEED + 7);
    let failures: Vec<String> =
        specs.iter().filter_map(|s| check_schedule(&s.build(0.3)).err().map(|e| format!("{s:?}: {e}"))).collect();
    verdict(
        failures.is_empty(),
        format!("{}/{C7_CIRCUITS} circuits valid in both modes{}", C7_CIRCUITS - failures.len(),
            failures.first().map(|f| format!("; {f}")).unwrap_or_default()),
    )
}

/// Criterion 8: the bench command at desk scale.
fn desk_scale() -> Verdict {
    let out = Command::new(env!("CARGO_BIN_EXE_quasar"))
        .args(["bench", "--qubits", &C8_QUBITS.to_string(), "--depth", "100", "--measure-prob", "0.1"])
        .args(["--repetitions", "1", "--seed", "1"])
        .output()
        .expect("spawn quasar");
    let text = String::from_utf8_lossy(&out.stdout);
    let field = |k: &str| -> Option<f64> {
        text.lines().find_map(|l| l.strip_prefix(k).and_then(|v| v.strip_prefix('='))).and_then(|v| v.parse().ok())
    };
    let phases = ["median_to_s", "median_t_s", "median_cmp_s", "median_ge_s"].map(field);
    let (Some(total), Some(rss)) = (field("median_total_s"), field("peak_rss_bytes")) else {
        return verdict(false, format!("bench output incomplete (status {}): {}", out.status, String::from_utf8_lossy(&out.stderr)));
    };
    let n = C8_QUBITS as f64;
    let payload = 2.0 * n * (2.0 * n + 1.0) / 8.0;
    let pass = out.status.success() && phases.iter().all(Option::is_some) && total < C8_BUDGET_S && rss > 0.0 && rss <= 2.0 * payload;
    let p = phases.map(|v| v.unwrap_or(f64::NAN));
    verdict(
        pass,
        format!(
            "n={C8_QUBITS}: {total:.1} s (TO {:.1}, T {:.1}, CMP {:.1}, GE {:.1}) on {} thread(s), \
             peak RSS {:.0} MB vs {:.0} MB limit",
            p[0], p[1], p[2], p[3], rayon::current_num_threads(), rss / 1e6, 2.0 * payload / 1e6
        ),
    )
}

fn median_time(mut f: impl FnMut()) -> f64 {
    let mut v: Vec<f64> = (0..3)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .collect();
    v.sort_by(f64::total_cmp);
    v[1]
}

/// Criterion 9.
fn sampler_scaling() -> Verdict {
    let c = generate_random(C9_QUBITS, 100, SEED + 9, 0.1);
    let t64 = median_time(|| drop(sample::<u64>(&c, 64, 1).unwrap()));
    let t1024 = median_time(|| drop(sample::<u64>(&c, 1024, 1).unwrap()));
    let f64_ = median_time(|| drop(quasar_core::sampler::sample_flips::<u64>(&c, 64, 1).unwrap()));
    let f1024 = median_time(|| drop(quasar_core::sampler::sample_flips::<u64>(&c, 1024, 1).unwrap()));
    let ratio = t1024 / t64;
    verdict(
        ratio <= C9_RATIO,
        format!(
            "n={C9_QUBITS} depth 100: f=1024 {t1024:.3} s vs f=64 {t64:.3} s, ratio {ratio:.2} (limit {C9_RATIO}); \
             frame propagation alone {f1024:.3} s vs {f64_:.3} s, ratio {:.2}",
            f1024 / f64_
        ),
    )
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool")
}

/// Criterion 10, given the single-thread digests of criteria 1 to 3.
fn parallel_determinism(base: [u64; 3]) -> Verdict {
    let mut mismatches = Vec::new();
    for &threads in &C10_THREADS[1..] {
        let digests = pool(threads).install(|| {
            [oracle_distributions().1, elimination_equivalence().1, full_run_equality().1]
        });
        for (i, (a, b)) in base.iter().zip(&digests).enumerate() {
            if a != b {
                mismatches.push(format!("criterion {} differs at {threads} threads", i + 1));
            }
        }
    }
    // Criteria 1 to 3 stay below the sequential cutoffs; also compare a run that splits work.
    let big = generate_random(2048, 8, SEED + 10, 0.3);
    let digest = |threads: usize| {
        pool(threads).install(|| {
            let r = simulate::<u64>(&big, 5).unwrap();
            let mut h = DefaultHasher::new();
            r.outcome_bits().hash(&mut h);
            hash_words(&mut h, &r.tableau);
            let s = sample::<u64>(&big, 256, 5).unwrap();
            s.words.hash(&mut h);
            h.finish()
        })
    };
    let d1 = digest(1);
    for &threads in &C10_THREADS[1..] {
        if digest(threads) != d1 {
            mismatches.push(format!("n=2048 run differs at {threads} threads"));
        }
    }
    verdict(
        mismatches.is_empty(),
        format!(
            "criteria 1-3 and an n=2048 run identical for threads {C10_THREADS:?}{}",
            mismatches.first().map(|m| format!("; {m}")).unwrap_or_default()
        ),
    )
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |i: u32| selected.is_empty() || selected.contains(&i);
    let mut failed = 0;
    let mut report = |i: u32, name: &str, v: Verdict| {
        println!("[{}] criterion {i:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += !v.pass as usize;
    };
    let single = pool(C10_THREADS[0]);
    let mut digests = [0u64; 3];
    if want(1) || want(10) {
        let (v, d) = single.install(oracle_distributions);
        digests[0] = d;
        if want(1) {
            report(1, "oracle distributions", v);
        }
    }
    if want(2) || want(10) {
        let (v, d) = single.install(elimination_equivalence);
        digests[1] = d;
        if want(2) {
            report(2, "parallel elimination", v);
        }
    }
    if want(3) || want(10) {
        let (v, d) = single.install(full_run_equality);
        digests[2] = d;
        if want(3) {
            report(3, "full-run differential", v);
        }
    }
    if want(4) {
        report(4, "transpose", transpose_correctness());
    }
    if want(5) {
        report(5, "primitives", primitive_correctness());
    }
    if want(6) {
        report(6, "worked fixtures", worked_fixtures());
    }
    if want(7) {
        report(7, "scheduler", scheduler_properties());
    }
    if want(8) {
        report(8, "desk-scale smoke", desk_scale());
    }
    if want(9) {
        report(9, "sampler scaling", sampler_scaling());
    }
    if want(10) {
        report(10, "parallel determinism", parallel_determinism(digests));
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
