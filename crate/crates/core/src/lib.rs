//! Discrete-event simulation of a single server polling several queues with
//! setup times, together with online policies, offline benchmarks and
//! worst-case instance families.

pub mod acceptance;
pub mod adversary;
pub mod benchmarks;
pub mod engine;
pub mod error;
pub mod generate;
pub mod instance;
pub mod policies;
pub mod srpt;
pub mod time;
pub mod trace;

pub use adversary::{AdversarialFamily, RoutingClass};
pub use benchmarks::{
    brute_force_optimal, claimed_bound, competitive_ratio, exhaustive_optimal, srpt_reduced, BenchmarkKind,
    BenchmarkResult, RatioReport,
};
pub use engine::{simulate, DecisionContext, Policy, PolicyAction, Simulation};
pub use error::{Error, Result};
pub use generate::{random_instance, RandomSpec};
pub use instance::{Bound, InstanceParams, Job, JobId, JobInstance, QueueId};
pub use policies::{catalog, PolicySpec, QueueOrder, Transform};
pub use time::{Rational, Time};
pub use trace::{ScheduleTrace, TraceEvent};
