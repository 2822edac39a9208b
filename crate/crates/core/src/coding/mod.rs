//! Balanced-vector codes for integers, crude-vector detection and the
//! search for code parameters.

mod codebook;
mod crude;
mod friendly;

pub use codebook::{balanced_vectors, make_codebook, suitable_n, CodeBook, CodeBookFile};
pub use crude::{crude_block_prob, crude_stats, is_crude, CrudeStats};
pub use friendly::{eps_ladder, find_friendly_pair, FriendlyPair};
