//! Trial engine for reaching experiments: conditions, the tick loop,
//! scripted subjects, schedules, logs and the Fitts-law analysis.

pub mod agents;
pub mod analysis;
pub mod condition;
pub mod log;
pub mod schedule;
pub mod trial;

pub use agents::{RecordedInput, SpeedAgent, ZoneCenterAgent};
pub use analysis::{baseline, estimate_internal_delay, fit_fitts, fit_line, summarize, ConditionSummary, FittsFit};
pub use condition::{Condition, ControlMode, EngineConfig, QuantizerScale, SpeedMap, SpeedSet, Variant};
pub use log::{completed_trials, encode_record, encode_summary, parse_log, replay, LogEntry, LoggedTrial};
pub use schedule::{condition_schedule, expand_trials, Family, ScheduleSettings, TrialPlan};
pub use trial::{
    run_trial, Clock, DisplayFrame, InputSource, RealtimeClock, TickSample, TrialLoop, TrialOutcome, TrialRecord,
    TrialSummary, VirtualClock,
};
