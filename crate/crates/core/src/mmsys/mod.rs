//! The full tape system: a ring of coded slots, each counting modulo its
//! own modulus, driven by the increment, normalizer and counter gadgets.

mod arith;
mod assemble;
mod experiments;
mod params;

pub use arith::{lcm_bounds, lcm_range, period_floor, predicted_period, ArithmeticModel};
pub use assemble::{assemble, crude_block, Layout, MMSystem, SystemSummary};
pub use experiments::{
    random_init, run_experiments, verify_congruence_window, ExperimentOptions, ExperimentReport,
    MMTrial, WindowReport,
};
pub use params::{
    component_targets, logest, pick_deltas, plan, Check, MMParams, PlanRequest, Profile,
};
