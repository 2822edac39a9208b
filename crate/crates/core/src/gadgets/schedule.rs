use serde::{Deserialize, Serialize};

use super::codes::{entry_bits, ScheduleEntry};
use crate::coding::CodeBook;
use crate::error::{Error, Result};
use crate::netcore::bits_to_hex;

/// A periodic sequence of counter words `g(0..T)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterSchedule {
    /// Symbolic entries, when the words came from a codebook.
    pub entries: Vec<Option<ScheduleEntry>>,
    pub patterns: Vec<Vec<bool>>,
}

impl CounterSchedule {
    pub fn from_patterns(patterns: Vec<Vec<bool>>) -> Result<CounterSchedule> {
        let w = patterns.first().map(Vec::len).unwrap_or(0);
        if w == 0 || patterns.iter().any(|p| p.len() != w) {
            return Err(Error::Invalid("schedule needs equal, nonempty words".into()));
        }
        Ok(CounterSchedule {
            entries: vec![None; patterns.len()],
            patterns,
        })
    }

    pub fn from_entries(cb: &CodeBook, m: usize, entries: &[ScheduleEntry]) -> Result<CounterSchedule> {
        if entries.is_empty() {
            return Err(Error::Invalid("empty schedule".into()));
        }
        let patterns = entries
            .iter()
            .map(|e| entry_bits(cb, m, e))
            .collect::<Result<Vec<_>>>()?;
        Ok(CounterSchedule {
            entries: entries.iter().copied().map(Some).collect(),
            patterns,
        })
    }

    pub fn period(&self) -> usize {
        self.patterns.len()
    }

    pub fn width(&self) -> usize {
        self.patterns[0].len()
    }

    /// `g(t mod T)`.
    pub fn at(&self, t: u64) -> &[bool] {
        &self.patterns[(t % self.patterns.len() as u64) as usize]
    }

    pub fn hex(&self) -> Vec<String> {
        self.patterns.iter().map(|p| bits_to_hex(p)).collect()
    }
}

/// Counter words for a tape of `tape_len` slots whose first `engaged`
/// slots count. Slot `s` meets the normalizer at phase `s + tau2`; it gets
/// modulus `n - s` there (plain `mod n` for slot 0), every other slot a
/// crude marker.
pub fn counter_schedule(
    cb: &CodeBook,
    m: usize,
    tape_len: usize,
    tau2: usize,
    engaged: usize,
) -> Result<CounterSchedule> {
    if engaged == 0 || engaged > tape_len {
        return Err(Error::Infeasible(format!(
            "{engaged} engaged slots on a tape of {tape_len}: corrupted slots must leave room"
        )));
    }
    let span = cb.radix.checked_pow(m as u32).unwrap_or(u64::MAX);
    if engaged as u64 - 1 > span {
        return Err(Error::Infeasible(format!(
            "{engaged} engaged slots need K^m >= {}, have {span}",
            engaged - 1
        )));
    }
    let entries: Vec<ScheduleEntry> = (0..tape_len)
        .map(|phase| {
            let s = (phase + tape_len - tau2 % tape_len) % tape_len;
            if s < engaged {
                ScheduleEntry::Code {
                    i: s as u64,
                    enable: s != 0,
                }
            } else {
                ScheduleEntry::CrudeMarker
            }
        })
        .collect();
    CounterSchedule::from_entries(cb, m, &entries)
}
