//! Monte Carlo orchestration.

pub mod rng;
mod stats;
mod sweep;

pub use stats::{wilson_interval, wilson_interval_effective, FrameTally};
pub use sweep::{
    analytic_sweep, eva_max_delay, run_sweep, AnalyticCurve, BerCurve, BerPoint, ChannelModel,
    Mode, Progress, RunOptions, SweepConfig, Waveform, CONFIDENCE, DEFAULT_MAX_FRAMES,
    DEFAULT_TARGET_BIT_ERRORS, INITIAL_BATCH, MAX_BATCH,
};
