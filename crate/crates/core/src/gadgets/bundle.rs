use serde::Serialize;

use super::chunks::ChunkKit;
use super::codes::{r_crude, r_width, x_star};
use super::counter::{build_counter_with, CounterMode, CounterOptions, CounterSystem};
use super::increment::build_increment_with;
use super::normalize::build_normalizer;
use super::schedule::CounterSchedule;
use crate::circuitkit::{delay_line, Circuit};
use crate::coding::{CodeBook, CodeBookFile};
use crate::error::Result;

/// The gadgets of one tape, all on the same codebook.
#[derive(Clone, Debug)]
pub struct GadgetBundle {
    pub codebook: CodeBook,
    /// Data chunks of a counter word.
    pub m: usize,
    pub f1: Circuit,
    pub f3: Circuit,
    /// Carries the counter word from the normalizer to the increment.
    pub delay: Circuit,
    pub counter: CounterSystem,
    pub x_star: Vec<bool>,
    pub r_crude: Vec<bool>,
}

/// The combinational gadgets; they do not depend on the schedule.
pub fn build_tape_gadgets(cb: &CodeBook, m: usize) -> Result<(Circuit, Circuit, Circuit)> {
    let kit = ChunkKit::new(cb)?;
    let f1 = build_increment_with(cb, m, &kit)?;
    let f3 = build_normalizer(cb, m)?;
    let delay = delay_line(r_width(cb, m), f3.depth())?;
    Ok((f1, f3, delay))
}

impl GadgetBundle {
    pub fn new(
        cb: &CodeBook,
        m: usize,
        tape: (Circuit, Circuit, Circuit),
        schedule: &CounterSchedule,
        mode: CounterMode,
        q_target: f64,
        opts: CounterOptions,
    ) -> Result<GadgetBundle> {
        let (f1, f3, delay) = tape;
        let counter = build_counter_with(schedule, mode, q_target, opts)?;
        Ok(GadgetBundle {
            codebook: cb.clone(),
            m,
            f1,
            f3,
            delay,
            counter,
            x_star: x_star(cb),
            r_crude: r_crude(cb, m),
        })
    }

    pub fn taus(&self) -> (usize, usize, usize) {
        (self.f1.depth(), self.counter.depth, self.f3.depth())
    }

    pub fn summary(&self) -> GadgetSummary {
        let (tau1, tau2, tau3) = self.taus();
        GadgetSummary {
            codebook: self.codebook.to_file(),
            m: self.m,
            tau1,
            tau2,
            tau3,
            f1_size: self.f1.size(),
            f3_size: self.f3.size(),
            delay_size: self.delay.size(),
            counter_size: self.counter.n_vars(),
            counter_mode: self.counter.mode,
            counter_period: self.counter.ring.len(),
            ones_generator_k: self.counter.ones_gen.as_ref().map(|g| g.k),
            zeros_generator_k: self.counter.zeros_gen.as_ref().map(|g| g.k),
            predicted_counter_success: self.counter.predicted_success,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GadgetSummary {
    pub codebook: CodeBookFile,
    pub m: usize,
    pub tau1: usize,
    pub tau2: usize,
    pub tau3: usize,
    pub f1_size: usize,
    pub f3_size: usize,
    pub delay_size: usize,
    pub counter_size: usize,
    pub counter_mode: CounterMode,
    pub counter_period: usize,
    pub ones_generator_k: Option<usize>,
    pub zeros_generator_k: Option<usize>,
    pub predicted_counter_success: f64,
}
