//! Bit-packed stabilizer simulation with data-parallel gate windows, measurements and
//! Pauli-frame sampling.

pub mod bitplane;
pub mod circuit;
pub mod gates;
pub mod measure;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod scheduler;
pub mod simulator;
pub mod tableau;
pub mod verify;
pub mod word;

pub use circuit::{emit_qasm, generate_random, parse_qasm, Circuit, Gate, GateKind, QasmError};
pub use measure::{MeasureError, MeasurementRecord, Outcome};
pub use rng::BitStream;
pub use sampler::{sample, Format, ShotRecord};
pub use scheduler::{schedule_windows, Mode, Schedule, Window};
pub use simulator::{simulate, PhaseTimes, RunResult, SimError};
pub use tableau::{Layout, Pauli, PauliString, Tableau};
pub use word::Word;
