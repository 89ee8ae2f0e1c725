//! Explicit supersolutions for `-a(x)(-Δ)^s u = -1`: the decay barrier `V`,
//! the exit-time solution of a ball, the glued global barrier `h`, and its
//! unit shift `V₀ = h + 1`.

mod decay;
mod exit_time;
mod global;
mod report;

pub use decay::{log_spaced, select_v_params, verify_v_supersolution, DecayBarrierV};
pub use exit_time::{getoor, ExitTimeSolution};
pub use global::{
    assemble_global_barrier, build_v0, find_crossing, verify_h_supersolution, BarrierSlacks, GlobalBarrierH,
    InteriorProfile, ScaledDecay, ShiftedBarrier, H_MARGIN_THRESHOLD,
};
pub use report::{MarginReport, MarginSample};

/// Multiplier applied to minimal admissible constants so that certificates
/// are strict but not vacuous.
pub const TIGHT_FACTOR: f64 = 1.0 + 1e-9;
