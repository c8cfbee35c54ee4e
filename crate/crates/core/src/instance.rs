//! Jobs, instances and the structural parameters derived from them.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::{format_rational, int, Rational, Time};

/// Job identity: the job's ordinal in the input.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JobId(pub usize);

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// 1-based queue index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QueueId(pub usize);

impl QueueId {
    pub fn index(self) -> usize {
        self.0 - 1
    }

    /// Next queue in cyclic order 1, 2, ..., k, 1, ...
    pub fn next(self, k: usize) -> QueueId {
        QueueId(self.0 % k + 1)
    }
}

impl fmt::Display for QueueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Job {
    pub id: JobId,
    pub release: Time,
    pub work: Time,
    pub queue: QueueId,
}

/// A finite job set plus the system parameters `k` (queue count) and `tau`
/// (setup time, identical for every queue).
///
/// Construct through [`JobInstance::new`] or [`validate`]; both leave jobs
/// sorted by `(release, id)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct JobInstance {
    pub k: usize,
    pub tau: Time,
    pub jobs: Vec<Job>,
}

impl JobInstance {
    /// Builds and validates an instance from `(release, work, queue)`
    /// triples, numbering jobs by position.
    pub fn new(k: usize, tau: Time, jobs: impl IntoIterator<Item = (Time, Time, usize)>) -> Result<Self> {
        let jobs = jobs
            .into_iter()
            .enumerate()
            .map(|(i, (release, work, q))| Job {
                id: JobId(i),
                release,
                work,
                queue: QueueId(q),
            })
            .collect();
        validate(JobInstance { k, tau, jobs })
    }

    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn job(&self, id: JobId) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id == id)
    }

    /// True when every job is released at time zero.
    pub fn is_clearing(&self) -> bool {
        self.jobs.iter().all(|j| j.release.is_zero())
    }

    pub fn params(&self) -> InstanceParams {
        derive_params(self)
    }

    /// Same arrivals with a different setup time.
    pub fn with_tau(&self, tau: Time) -> JobInstance {
        JobInstance {
            tau,
            ..self.clone()
        }
    }

    /// Same arrivals with every workload rewritten by `f`.
    pub fn map_work(&self, f: impl Fn(&Job) -> Time) -> JobInstance {
        JobInstance {
            jobs: self.jobs.iter().map(|j| Job { work: f(j), ..*j }).collect(),
            ..self.clone()
        }
    }

    /// Subset of jobs (ids preserved).
    pub fn filter(&self, keep: impl Fn(&Job) -> bool) -> JobInstance {
        JobInstance {
            jobs: self.jobs.iter().filter(|j| keep(j)).copied().collect(),
            ..self.clone()
        }
    }

    pub fn total_work(&self) -> Time {
        self.jobs.iter().map(|j| j.work).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from(self)).expect("instance serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(s)?;
        file.try_into()
    }
}

/// Checks every instance invariant and sorts jobs by `(release, id)`.
pub fn validate(mut instance: JobInstance) -> Result<JobInstance> {
    if instance.k == 0 {
        return Err(Error::NoQueues);
    }
    let mut seen = HashSet::new();
    for job in &instance.jobs {
        if !seen.insert(job.id) {
            return Err(Error::DuplicateJob(job.id));
        }
        if job.queue.0 == 0 || job.queue.0 > instance.k {
            return Err(Error::InvalidQueue {
                job: job.id,
                queue: job.queue,
                k: instance.k,
            });
        }
    }
    instance.jobs.sort_by_key(|j| (j.release, j.id));
    Ok(instance)
}

/// A ratio that may be unbounded (division by a zero minimum workload).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Bound {
    Finite(Rational),
    Unbounded,
}

impl Bound {
    pub fn finite(self) -> Option<Rational> {
        match self {
            Bound::Finite(r) => Some(r),
            Bound::Unbounded => None,
        }
    }

    /// Whether this bound is at most `limit`.
    pub fn at_most(self, limit: Rational) -> bool {
        matches!(self, Bound::Finite(r) if r <= limit)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(r) => write!(f, "{}", format_rational(r)),
            Bound::Unbounded => write!(f, "unbounded"),
        }
    }
}

/// Workload extremes and the two variation constants: `gamma` bounds
/// `p_max / p_min` and `theta` bounds `tau / p_min` (zero whenever `tau` is).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct InstanceParams {
    pub p_min: Time,
    pub p_max: Time,
    pub gamma: Bound,
    pub theta: Bound,
}

pub fn derive_params(instance: &JobInstance) -> InstanceParams {
    let p_min = instance.jobs.iter().map(|j| j.work).min().unwrap_or(Time::ZERO);
    let p_max = instance.jobs.iter().map(|j| j.work).max().unwrap_or(Time::ZERO);
    let tau = instance.tau;
    let gamma = if p_min.is_zero() {
        if p_max.is_zero() {
            Bound::Finite(int(1))
        } else {
            Bound::Unbounded
        }
    } else {
        Bound::Finite(p_max.value() / p_min.value())
    };
    let theta = if tau.is_zero() {
        Bound::Finite(int(0))
    } else if p_min.is_zero() {
        Bound::Unbounded
    } else {
        Bound::Finite(tau.value() / p_min.value())
    };
    InstanceParams {
        p_min,
        p_max,
        gamma,
        theta,
    }
}

/// Total completion time of `n` unit jobs served back to back from time
/// zero without setups: `n(n+1)/2`.
pub fn pure_completion(n: usize) -> Time {
    let n = n as u64;
    Time::from_int(n * (n + 1) / 2)
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    k: usize,
    tau: Time,
    jobs: Vec<JobRecord>,
}

#[derive(Serialize, Deserialize)]
struct JobRecord {
    r: Time,
    p: Time,
    q: usize,
}

impl From<&JobInstance> for InstanceFile {
    fn from(instance: &JobInstance) -> Self {
        // Written in id order so that re-reading reproduces the same ids.
        let mut jobs: Vec<&Job> = instance.jobs.iter().collect();
        jobs.sort_by_key(|j| j.id);
        InstanceFile {
            k: instance.k,
            tau: instance.tau,
            jobs: jobs
                .into_iter()
                .map(|j| JobRecord {
                    r: j.release,
                    p: j.work,
                    q: j.queue.0,
                })
                .collect(),
        }
    }
}

impl TryFrom<InstanceFile> for JobInstance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        JobInstance::new(file.k, file.tau, file.jobs.into_iter().map(|j| (j.r, j.p, j.q)))
    }
}
