use thiserror::Error;

use crate::instance::{JobId, QueueId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("negative value {0} where a non-negative time is required")]
    NegativeValue(String),

    #[error("queue count k must be at least 1")]
    NoQueues,

    #[error("job {job} targets queue {queue}, but queues are numbered 1..={k}")]
    InvalidQueue { job: JobId, queue: QueueId, k: usize },

    #[error("duplicate job id {0}")]
    DuplicateJob(JobId),

    #[error("illegal action at t={time}: {action} ({reason})")]
    IllegalAction {
        time: String,
        action: String,
        reason: String,
    },

    #[error("simulation stalled at t={time} with {unserved} unserved job(s)")]
    Stalled { time: String, unserved: usize },

    #[error("job {0} has no completion in the trace")]
    UnservedJob(JobId),

    #[error("instance has {n} jobs; brute force is limited to {max}")]
    TooLarge { n: usize, max: usize },

    #[error("parameters outside the construction's regime: {0}")]
    ParamsViolateRegime(String),

    #[error("workload-augmented transform needs a bounded workload variation")]
    UnboundedTransform,

    #[error("invalid policy specification: {0}")]
    InvalidPolicy(String),

    #[error("{0}")]
    Unsupported(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
