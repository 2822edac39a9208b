//! Synchronous Boolean networks over {COPY, AND2, OR2}.

mod analysis;
mod attractor;
mod export;
mod network;
mod sim;
mod state;
mod table;

pub use analysis::{
    monotonicity_check_net, monotonicity_check_table, random_monotonicity_violations,
    structure_report, StructureReport,
};
pub use attractor::{
    coalescence_time, find_attractor, find_attractor_with, frozen_fraction, AttractorReport,
    CycleMethod, DEFAULT_MAX_STEPS, HASH_MAX_VARS,
};
pub use export::{to_dot, TraceGroup, TraceWriter};
pub use network::{Gate, GateRepr, Network, NetworkFile, Op};
pub use sim::{run, step, Lanes};
pub use state::{bits_to_hex, hex_to_bits, State};
pub use table::{bits_of, out_mask, word_of, TruthTable, TABLE_MAX_ARITY};
