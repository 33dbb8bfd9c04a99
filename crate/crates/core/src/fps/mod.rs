//! Fixed-phase-shifter designs: `F_RF = S·C` with a binary switch matrix `S`
//! and the block-diagonal phase bank matrix `C`.

mod altmin;
mod rows;

pub use altmin::{fps_altmin, fps_altmin_raw, fps_bank_default, fps_saturation_sweep, FpsProblem};
pub use rows::{exhaustive_row, greedy_row, relaxed_start, RowProblem, EXHAUSTIVE_MAX_WIDTH};
