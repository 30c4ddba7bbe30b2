mod report;
mod verify;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use quasar_core::{emit_qasm, generate_random, parse_qasm, sample, simulate, Circuit, Format, PhaseTimes, Word};

use report::{peak_rss_bytes, RunReport};

#[derive(Parser)]
#[command(name = "quasar", version, about = "Bit-packed stabilizer circuit simulator")]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "QUASAR_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one shot and write the measurement record.
    Run(RunArgs),
    /// Draw many shots with Pauli frames.
    Sample(SampleArgs),
    /// Generate a random circuit.
    Gen(GenArgs),
    /// Differential and statistical checks against the reference simulators.
    Verify(VerifyArgs),
    /// Time the phases of single-shot runs.
    Bench(BenchArgs),
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Word size in bits: 8, 16, 32 or 64.
    #[arg(long, default_value_t = 64, value_parser = parse_word_size)]
    word_size: u32,
}

#[derive(Args)]
struct RunArgs {
    circuit: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
    /// Outcome file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Binary,
}

#[derive(Args)]
struct SampleArgs {
    circuit: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    qubits: usize,
    #[arg(long)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    measure_prob: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Qubit range, e.g. 2..8 (inclusive).
    #[arg(long, default_value = "2..8", value_parser = parse_range)]
    qubits: (usize, usize),
    #[arg(long, default_value = "5..30", value_parser = parse_range)]
    depth: (usize, usize),
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// QASM file; when omitted a random circuit is generated.
    circuit: Option<PathBuf>,
    #[arg(long, default_value_t = 1024)]
    qubits: usize,
    #[arg(long, default_value_t = 100)]
    depth: usize,
    #[arg(long, default_value_t = 0.1)]
    measure_prob: f64,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn parse_word_size(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(w @ (8 | 16 | 32 | 64)) => Ok(w),
        _ => Err(format!("word size must be 8, 16, 32 or 64, got {s}")),
    }
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v}: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => (parse(s)?, parse(s)?),
    };
    if lo > hi {
        return Err(format!("empty range {s}"));
    }
    Ok((lo, hi))
}

/// Error tagged with its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 2, error: e.into() }
}

fn resource(e: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 3, error: e.into() }
}

type Outcome<T = ()> = Result<T, Failure>;

macro_rules! with_word {
    ($bits:expr, $W:ident => $body:expr) => {
        match $bits {
            8 => {
                type $W = u8;
                $body
            }
            16 => {
                type $W = u16;
                $body
            }
            32 => {
                type $W = u32;
                $body
            }
            _ => {
                type $W = u64;
                $body
            }
        }
    };
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(3);
    }
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Verify(a) => verify::cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn read_circuit(path: &Path) -> Outcome<Circuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(input)?;
    parse_qasm(&text).with_context(|| path.display().to_string()).map_err(input)
}

/// Refuse sizes whose tableau would not fit in memory.
fn check_memory(n: usize, extra: usize) -> Outcome {
    let words = n.div_ceil(64);
    let need = 2 * (words * 64) * (2 * words) * 8 + extra;
    let limit = report::memory_limit();
    if need > limit {
        return Err(resource(anyhow!("{n} qubits need about {need} bytes, limit is {limit}")));
    }
    Ok(())
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Outcome {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())).map_err(resource),
        None => io::stdout().write_all(bytes).context("writing stdout").map_err(resource),
    }
}

fn finish_report(report: &RunReport, json: Option<&Path>) -> Outcome {
    eprint!("{}", report.key_values());
    if let Some(p) = json {
        let text = serde_json::to_string_pretty(&report.to_json()).expect("json");
        fs::write(p, text).with_context(|| format!("writing {}", p.display())).map_err(resource)?;
    }
    Ok(())
}

fn cmd_run(a: RunArgs) -> Outcome<ExitCode> {
    let circuit = read_circuit(&a.circuit)?;
    check_memory(circuit.num_qubits, 0)?;
    let start = Instant::now();
    let (bits, mut report) = with_word!(a.engine.word_size, W => run_once::<W>(&circuit, a.engine.seed)?);
    report.wall = start.elapsed();
    let mut text: Vec<u8> = bits.iter().map(|&b| if b { b'1' } else { b'0' }).collect();
    if !text.is_empty() {
        text.push(b'\n');
    }
    write_output(a.out.as_deref(), &text)?;
    report.word_size = a.engine.word_size;
    report.seed = a.engine.seed;
    finish_report(&report, a.json.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn run_once<W: Word>(circuit: &Circuit, seed: u64) -> Outcome<(Vec<bool>, RunReport)> {
    let r = simulate::<W>(circuit, seed).map_err(|e| Failure { code: 1, error: e.into() })?;
    let mut report = RunReport::for_circuit(circuit);
    report.times = r.times;
    report.windows = r.windows;
    report.measurement_windows = r.measurement_windows;
    report.transposes = r.transposes;
    report.random_bits = r.random_bits;
    report.payload_bytes = r.tableau.payload_bytes();
    report.ones = r.outcomes.iter().filter(|o| o.bit).count();
    report.deterministic = r.outcomes.iter().filter(|o| o.deterministic).count();
    Ok((r.outcome_bits(), report))
}

fn cmd_sample(a: SampleArgs) -> Outcome<ExitCode> {
    let circuit = read_circuit(&a.circuit)?;
    let shots = a.shots as usize;
    check_memory(circuit.num_qubits, circuit.num_qubits * shots.div_ceil(8) * 2)?;
    let format = match a.format {
        FormatArg::Text => Format::Text,
        FormatArg::Binary => Format::Binary,
    };
    let start = Instant::now();
    let mut bytes = Vec::new();
    let ones = with_word!(a.engine.word_size, W => {
        let rec = sample::<W>(&circuit, shots, a.engine.seed).map_err(|e| Failure { code: 1, error: e.into() })?;
        rec.write_to(&mut bytes, format).map_err(resource)?;
        (0..rec.num_measurements()).map(|m| rec.count_ones(m)).sum::<usize>()
    });
    let mut report = RunReport::for_circuit(&circuit);
    report.wall = start.elapsed();
    report.shots = shots;
    report.ones = ones;
    report.word_size = a.engine.word_size;
    report.seed = a.engine.seed;
    write_output(a.out.as_deref(), &bytes)?;
    finish_report(&report, a.json.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(a: GenArgs) -> Outcome<ExitCode> {
    if a.qubits == 0 || a.depth == 0 {
        return Err(input(anyhow!("--qubits and --depth must be at least 1")));
    }
    if !(0.0..=1.0).contains(&a.measure_prob) {
        return Err(input(anyhow!("--measure-prob must be in [0, 1]")));
    }
    let c = generate_random(a.qubits, a.depth, a.seed, a.measure_prob);
    write_output(a.out.as_deref(), emit_qasm(&c).as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn cmd_bench(a: BenchArgs) -> Outcome<ExitCode> {
    if a.repetitions == 0 {
        return Err(input(anyhow!("--repetitions must be at least 1")));
    }
    let circuit = match &a.circuit {
        Some(p) => read_circuit(p)?,
        None => {
            if a.qubits == 0 || a.depth == 0 {
                return Err(input(anyhow!("--qubits and --depth must be at least 1")));
            }
            generate_random(a.qubits, a.depth, a.engine.seed, a.measure_prob)
        }
    };
    check_memory(circuit.num_qubits, 0)?;
    let mut out = String::new();
    out.push_str(&format!(
        "qubits={} gates={} measurements={} word_size={} threads={}\n",
        circuit.num_qubits,
        circuit.gates.len() - circuit.num_measurements(),
        circuit.num_measurements(),
        a.engine.word_size,
        rayon::current_num_threads()
    ));
    out.push_str(&format!("{:<8}{:>12}{:>12}{:>12}{:>12}{:>12}\n", "rep", "TO", "T", "CMP", "GE", "total"));
    let mut rows: Vec<PhaseTimes> = Vec::new();
    let mut walls = Vec::new();
    let mut reports = Vec::new();
    let mut first_bits: Option<Vec<bool>> = None;
    for rep in 0..a.repetitions {
        let start = Instant::now();
        let (bits, mut report) = with_word!(a.engine.word_size, W => run_once::<W>(&circuit, a.engine.seed)?);
        report.wall = start.elapsed();
        match &first_bits {
            None => first_bits = Some(bits),
            Some(b) if *b != bits => return Err(Failure { code: 1, error: anyhow!("repetition {rep} diverged") }),
            _ => {}
        }
        let t = report.times;
        out.push_str(&format!(
            "{:<8}{:>12.4}{:>12.4}{:>12.4}{:>12.4}{:>12.4}\n",
            rep + 1,
            t.to.as_secs_f64(),
            t.t.as_secs_f64(),
            t.cmp.as_secs_f64(),
            t.ge.as_secs_f64(),
            report.wall.as_secs_f64()
        ));
        rows.push(t);
        walls.push(report.wall.as_secs_f64());
        reports.push(report);
    }
    let col = |f: fn(&PhaseTimes) -> f64| median(rows.iter().map(f).collect());
    let (to, t, cmp, ge) = (
        col(|p| p.to.as_secs_f64()),
        col(|p| p.t.as_secs_f64()),
        col(|p| p.cmp.as_secs_f64()),
        col(|p| p.ge.as_secs_f64()),
    );
    let wall = median(walls);
    out.push_str(&format!("{:<8}{to:>12.4}{t:>12.4}{cmp:>12.4}{ge:>12.4}{wall:>12.4}\n", "median"));
    let last = reports.last().expect("at least one repetition");
    out.push_str(&format!(
        "median_to_s={to:.6}\nmedian_t_s={t:.6}\nmedian_cmp_s={cmp:.6}\nmedian_ge_s={ge:.6}\nmedian_total_s={wall:.6}\n\
         payload_bytes={}\npeak_rss_bytes={}\n",
        last.payload_bytes,
        peak_rss_bytes().unwrap_or(0)
    ));
    write_output(None, out.as_bytes())?;
    if let Some(p) = &a.json {
        let runs: Vec<_> = reports.iter().map(RunReport::to_json).collect();
        let doc = serde_json::json!({ "runs": runs, "median": { "to": to, "t": t, "cmp": cmp, "ge": ge, "total": wall } });
        fs::write(p, serde_json::to_string_pretty(&doc).expect("json")).map_err(resource)?;
    }
    Ok(ExitCode::SUCCESS)
}
