//! The three tape gadgets as circuits, with reference oracles: the
//! modular increment, the self-initializing counter, and the normalizer.

mod bundle;
mod chunks;
mod codes;
mod counter;
mod increment;
mod normalize;
mod pulse;
mod schedule;

pub use chunks::ChunkKit;
pub use codes::{
    entry_bits, oracle_increment, oracle_normalize, r_crude, r_width, x_star, ScheduleEntry,
};
pub use increment::{build_increment, build_increment_with};
pub use normalize::build_normalizer;
pub use pulse::{
    buffered_sorter, place_pulse, pulse_generator, pulse_generator_k, pulse_monte_carlo,
    pulse_event_prob, pulse_size, pulse_success_prob, Polarity, PulseGenerator, PulseLayout, PulseTally,
    PULSE_MAX_K, PULSE_MIN_K,
};
pub use schedule::{counter_schedule, CounterSchedule};
pub use counter::{
    build_counter, build_counter_with, counter_plan, counter_monte_carlo, CounterMode, CounterReport,
    CounterOptions, CounterSystem, TrialRecord,
};
pub use bundle::{build_tape_gadgets, GadgetBundle, GadgetSummary};
