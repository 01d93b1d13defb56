//! The classical-machine side: a deterministic TM/LBA interpreter, the
//! constant-space transducer simulating a summarization system and its DFA,
//! the space meter for appending systems, and the LBA → lag compiler.

pub mod builtin;
mod dfa;
mod lba_lag;
mod run;
mod space;
mod spec;
mod transducer;

pub use lba_lag::{lba_to_lag, CellSymbol, LbaLag};
pub use run::{machine_run, Caps, MachineRun, Verdict};
pub use dfa::{configuration_bound, transducer_to_dfa, DfaLabel, ExtractedDfa, DEFAULT_DFA_BOUND};
pub use space::{appending_space_meter, meter_run, Rational, SpaceFit, SpaceSample};
pub use spec::{parse_machine, write_machine, MachineSpec, Move, Transition};
pub use transducer::{Fault, TransducerRun, TransducerSim};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error("invalid machine: {0}")]
    Invalid(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("`{0}` is not an input symbol")]
    Input(String),
    #[error("machine is not linear bounded")]
    NotLba,
    #[error("next-token source failed: {0}")]
    Source(String),
    #[error("more than {0} configurations")]
    Bound(usize),
}
