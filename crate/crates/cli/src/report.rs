use std::fmt::Write;
use std::time::Duration;

use quasar_core::{Circuit, PhaseTimes};
use serde_json::{json, Value};

#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub qubits: usize,
    pub gates: usize,
    pub measurements: usize,
    pub windows: usize,
    pub measurement_windows: usize,
    pub transposes: usize,
    pub random_bits: u64,
    pub ones: usize,
    pub deterministic: usize,
    pub shots: usize,
    pub word_size: u32,
    pub seed: u64,
    pub payload_bytes: usize,
    pub times: PhaseTimes,
    pub wall: Duration,
}

impl RunReport {
    pub fn for_circuit(c: &Circuit) -> Self {
        RunReport {
            qubits: c.num_qubits,
            gates: c.gates.len() - c.num_measurements(),
            measurements: c.num_measurements(),
            ..Default::default()
        }
    }

    fn fields(&self) -> Vec<(&'static str, Value)> {
        let t = &self.times;
        vec![
            ("qubits", json!(self.qubits)),
            ("gates", json!(self.gates)),
            ("measurements", json!(self.measurements)),
            ("windows", json!(self.windows)),
            ("measurement_windows", json!(self.measurement_windows)),
            ("transposes", json!(self.transposes)),
            ("random_bits", json!(self.random_bits)),
            ("ones", json!(self.ones)),
            ("deterministic", json!(self.deterministic)),
            ("shots", json!(self.shots)),
            ("word_size", json!(self.word_size)),
            ("seed", json!(self.seed)),
            ("threads", json!(rayon::current_num_threads())),
            ("payload_bytes", json!(self.payload_bytes)),
            ("to_s", json!(t.to.as_secs_f64())),
            ("t_s", json!(t.t.as_secs_f64())),
            ("cmp_s", json!(t.cmp.as_secs_f64())),
            ("ge_s", json!(t.ge.as_secs_f64())),
            ("total_s", json!(self.wall.as_secs_f64())),
            ("peak_rss_bytes", json!(peak_rss_bytes().unwrap_or(0))),
        ]
    }

    pub fn key_values(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.fields() {
            writeln!(s, "{k}={v}").unwrap();
        }
        s
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.fields().into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

fn proc_kib(file: &str, key: &str) -> Option<usize> {
    let text = std::fs::read_to_string(file).ok()?;
    let line = text.lines().find(|l| l.starts_with(key))?;
    line[key.len()..].trim().trim_end_matches("kB").trim().parse::<usize>().ok().map(|k| k * 1024)
}

/// High-water resident set size of this process.
pub fn peak_rss_bytes() -> Option<usize> {
    proc_kib("/proc/self/status", "VmHWM:")
}

/// `QUASAR_MEMORY_LIMIT` in bytes, else available memory, else unlimited.
pub fn memory_limit() -> usize {
    if let Some(v) = std::env::var("QUASAR_MEMORY_LIMIT").ok().and_then(|v| v.parse().ok()) {
        return v;
    }
    proc_kib("/proc/meminfo", "MemAvailable:").unwrap_or(usize::MAX)
}
