//! Multi-time correlations: ordering analysis, snapshot-based estimation, enumeration tallies.

mod estimate;
mod planner;
mod spec;
mod tally;

pub use estimate::{estimate, estimate_delays, g2_delay, special_correlators, DelayCurve, SnapshotStore, SpecialCorrelators, TimeMap};
pub use planner::{plan, Category, Infeasibility, Phase, Plan, PlanTerm, PlannedFactor, Schedule, MAX_REWRITE_FACTORS};
pub use spec::{CorrelationSpec, Ladder, OperatorFactor};
pub use tally::{tally, Tally};
