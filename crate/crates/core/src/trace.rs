//! Schedule traces: the timeline one simulation produces.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{JobId, JobInstance, QueueId};
use crate::time::Time;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    SetupStart { queue: QueueId, t: Time },
    SetupEnd { queue: QueueId, t: Time },
    SetupAbort { queue: QueueId, t: Time },
    ServeStart { job: JobId, queue: QueueId, t: Time },
    ServeEnd { job: JobId, queue: QueueId, t: Time },
    WaitStart { queue: QueueId, t: Time },
    WaitEnd { queue: QueueId, t: Time },
    IdleStart { t: Time },
    IdleEnd { t: Time },
}

impl TraceEvent {
    pub fn time(&self) -> Time {
        match *self {
            TraceEvent::SetupStart { t, .. }
            | TraceEvent::SetupEnd { t, .. }
            | TraceEvent::SetupAbort { t, .. }
            | TraceEvent::ServeStart { t, .. }
            | TraceEvent::ServeEnd { t, .. }
            | TraceEvent::WaitStart { t, .. }
            | TraceEvent::WaitEnd { t, .. }
            | TraceEvent::IdleStart { t }
            | TraceEvent::IdleEnd { t } => t,
        }
    }

    /// One timeline line, e.g. `t=5/2 SERVE_END job=3 q=2`.
    pub fn timeline_line(&self) -> String {
        match *self {
            TraceEvent::SetupStart { queue, t } => format!("t={t} SETUP_START q={queue}"),
            TraceEvent::SetupEnd { queue, t } => format!("t={t} SETUP_END q={queue}"),
            TraceEvent::SetupAbort { queue, t } => format!("t={t} SETUP_ABORT q={queue}"),
            TraceEvent::ServeStart { job, queue, t } => format!("t={t} SERVE_START job={job} q={queue}"),
            TraceEvent::ServeEnd { job, queue, t } => format!("t={t} SERVE_END job={job} q={queue}"),
            TraceEvent::WaitStart { queue, t } => format!("t={t} WAIT_START q={queue}"),
            TraceEvent::WaitEnd { queue, t } => format!("t={t} WAIT_END q={queue}"),
            TraceEvent::IdleStart { t } => format!("t={t} IDLE_START"),
            TraceEvent::IdleEnd { t } => format!("t={t} IDLE_END"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct ScheduleTrace {
    pub events: Vec<TraceEvent>,
    /// Completion time per served job.
    pub completions: BTreeMap<JobId, Time>,
}

impl ScheduleTrace {
    /// Sum of recorded completion times.
    pub fn total(&self) -> Time {
        self.completions.values().sum()
    }

    /// Ids in the order their service started.
    pub fn service_order(&self) -> Vec<JobId> {
        self.events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::ServeStart { job, .. } => Some(*job),
                _ => None,
            })
            .collect()
    }

    pub fn setup_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, TraceEvent::SetupEnd { .. }))
            .count()
    }

    /// Queues in the order their setups completed.
    pub fn established_sequence(&self) -> Vec<QueueId> {
        self.events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::SetupEnd { queue, .. } => Some(*queue),
                _ => None,
            })
            .collect()
    }

    pub fn timeline(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let _ = writeln!(out, "{}", e.timeline_line());
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.events).expect("trace serializes")
    }
}

/// `sum_i C_i` over every job of `instance`, failing if any job was never
/// served.
pub fn total_completion(trace: &ScheduleTrace, instance: &JobInstance) -> Result<Time> {
    let mut total = Time::ZERO;
    for job in &instance.jobs {
        total += *trace.completions.get(&job.id).ok_or(Error::UnservedJob(job.id))?;
    }
    Ok(total)
}

/// Replays `trace` against `instance` and reports the first violated
/// invariant: time order, non-overlapping service, service only at an
/// established queue, exact setup and service durations, release
/// respected, and every job served exactly once.
pub fn check_trace(trace: &ScheduleTrace, instance: &JobInstance) -> std::result::Result<(), String> {
    let jobs: HashMap<JobId, _> = instance.jobs.iter().map(|j| (j.id, j)).collect();
    let mut clock = Time::ZERO;
    let mut established: Option<QueueId> = None;
    let mut before_setup: Option<QueueId> = None;
    let mut setting: Option<(QueueId, Time)> = None;
    let mut serving: Option<(JobId, Time)> = None;
    let mut waiting = false;
    let mut idle = false;
    let mut ends: BTreeMap<JobId, Time> = BTreeMap::new();
    let mut started: BTreeMap<JobId, Time> = BTreeMap::new();

    for (i, e) in trace.events.iter().enumerate() {
        let t = e.time();
        if t < clock {
            return Err(format!("event {i} at {t} precedes {clock}"));
        }
        clock = t;
        let busy = setting.is_some() || serving.is_some();
        match *e {
            TraceEvent::SetupStart { queue, .. } => {
                if busy || waiting || idle {
                    return Err(format!("event {i}: setup of {queue} while server occupied"));
                }
                before_setup = established.take();
                setting = Some((queue, t));
            }
            TraceEvent::SetupEnd { queue, .. } => match setting.take() {
                Some((q, s)) if q == queue && t.checked_sub(s) == Some(instance.tau) => {
                    established = Some(queue);
                }
                _ => return Err(format!("event {i}: setup end of {queue} does not close a {} setup", instance.tau)),
            },
            TraceEvent::SetupAbort { queue, .. } => match setting.take() {
                Some((q, _)) if q == queue => established = before_setup,
                _ => return Err(format!("event {i}: abort of {queue} with no such setup")),
            },
            TraceEvent::ServeStart { job, queue, .. } => {
                let Some(j) = jobs.get(&job) else {
                    return Err(format!("event {i}: unknown job {job}"));
                };
                if busy || waiting || idle {
                    return Err(format!("event {i}: job {job} started while server occupied"));
                }
                if j.queue != queue || established != Some(queue) {
                    return Err(format!("event {i}: job {job} served without an established setup of its queue"));
                }
                if t < j.release {
                    return Err(format!("event {i}: job {job} started before its release"));
                }
                if started.insert(job, t).is_some() {
                    return Err(format!("event {i}: job {job} started twice"));
                }
                serving = Some((job, t));
            }
            TraceEvent::ServeEnd { job, .. } => match serving.take() {
                Some((s_job, s)) if s_job == job && t.checked_sub(s) == Some(jobs[&job].work) => {
                    ends.insert(job, t);
                }
                _ => return Err(format!("event {i}: end of job {job} does not match a full service")),
            },
            TraceEvent::WaitStart { queue, .. } => {
                if busy || waiting || idle || established != Some(queue) {
                    return Err(format!("event {i}: wait at {queue} not allowed here"));
                }
                waiting = true;
            }
            TraceEvent::WaitEnd { .. } => {
                if !std::mem::take(&mut waiting) {
                    return Err(format!("event {i}: wait end without wait"));
                }
            }
            TraceEvent::IdleStart { .. } => {
                if busy || waiting || idle {
                    return Err(format!("event {i}: idle while occupied"));
                }
                idle = true;
            }
            TraceEvent::IdleEnd { .. } => {
                if !std::mem::take(&mut idle) {
                    return Err(format!("event {i}: idle end without idle"));
                }
            }
        }
    }
    if serving.is_some() {
        return Err("trace ends mid-service".into());
    }
    for job in &instance.jobs {
        match ends.get(&job.id) {
            None => return Err(format!("job {} never served", job.id)),
            Some(c) if trace.completions.get(&job.id) != Some(c) => {
                return Err(format!("job {} completion mismatch", job.id))
            }
            _ => {}
        }
    }
    if ends.len() != instance.n() || trace.completions.len() != instance.n() {
        return Err("trace serves jobs outside the instance".into());
    }
    Ok(())
}
