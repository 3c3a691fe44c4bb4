//! Minimum-energy speed assignment for task graphs with a fixed processor
//! allocation and a deadline.
//!
//! A processor running at speed `s` for `d` time units consumes `s³·d`
//! energy. Four speed models are supported:
//!
//! * continuous: any speed up to `s_max` ([`continuous`]),
//! * discrete: one of a fixed set of modes per task ([`discrete`]),
//! * VDD-hopping: modes may be switched mid-task ([`vdd`]),
//! * incremental: modes on an arithmetic grid ([`discrete`]).

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuous;
pub mod discrete;
pub mod error;
pub mod generate;
pub mod graph;
pub mod instance;
pub mod schedule;
pub mod vdd;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use instance::{parse_schedule, schedule_entries, Instance, ParsedSchedule, ScheduleEntry};
pub use graph::{build_execution_graph, Allocation, ExecutionGraph, Task};
pub use schedule::{evaluate_schedule, evaluate_speeds, Diagnostics, Segment, SolveReport, SpeedProfile, TaskRun};
