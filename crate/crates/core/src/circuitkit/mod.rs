//! Layered cooperative circuits: builders, composition, synthesis from
//! truth tables, and embedding into networks.

mod builder;
mod circuit;
mod embed;
mod library;
mod synth;

pub use builder::{Builder, Sig};
pub use circuit::{Circuit, CircuitFile, CircuitKind};
pub use embed::{embed, NetBuilder, Placement, Wire, WiringPlan};
pub use library::{
    concat, delay_line, fanout_tree, identity, parallel, reduce_tree, sorting_network,
    sorting_depth_bound, batcher_layers,
};
pub use synth::{dnf_bounds, dnf_synthesize, monotone_extension, DnfReport, PartialTable, DNF_MAX_ARITY};
