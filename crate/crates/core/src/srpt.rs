//! Preemptive shortest-remaining-processing-time on one machine with no
//! setups. Used both as a lower-bound benchmark and as the virtual system
//! that drives eligibility in the simulation-based policies.

use crate::instance::{Job, JobId, JobInstance};
use crate::time::Time;

#[derive(Clone, Copy, Debug)]
struct Active {
    remaining: Time,
    release: Time,
    id: JobId,
}

impl Active {
    fn key(&self) -> (Time, Time, JobId) {
        (self.remaining, self.release, self.id)
    }
}

/// Incremental SRPT machine. Jobs are added at the current clock; ties on
/// remaining work go to the earlier release, then the lower id.
#[derive(Clone, Debug, Default)]
pub struct SrptMachine {
    clock: Time,
    active: Vec<Active>,
}

impl SrptMachine {
    pub fn new() -> Self {
        Self::default()
    }

    /// A machine started at `clock` with no history.
    pub fn starting_at(clock: Time) -> Self {
        SrptMachine {
            clock,
            active: Vec::new(),
        }
    }

    pub fn clock(&self) -> Time {
        self.clock
    }

    pub fn is_idle(&self) -> bool {
        self.active.is_empty()
    }

    /// Adds `job` with its full work at the current clock.
    pub fn add(&mut self, job: &Job) {
        self.active.push(Active {
            remaining: job.work,
            release: job.release,
            id: job.id,
        });
    }

    fn current(&self) -> Option<usize> {
        (0..self.active.len()).min_by_key(|&i| self.active[i].key())
    }

    /// Instant at which the job currently in service would finish.
    pub fn next_completion(&self) -> Option<Time> {
        self.current().map(|i| self.clock + self.active[i].remaining)
    }

    /// Runs the machine up to `t`, returning completions in order.
    pub fn advance_to(&mut self, t: Time) -> Vec<(JobId, Time)> {
        let mut done = Vec::new();
        while let Some(i) = self.current() {
            let finish = self.clock + self.active[i].remaining;
            if finish <= t {
                self.clock = finish;
                done.push((self.active.swap_remove(i).id, finish));
            } else {
                self.active[i].remaining = finish - t;
                break;
            }
        }
        self.clock = self.clock.max(t);
        done
    }
}

/// Completion times of preemptive SRPT on the instance with setups removed,
/// in completion order.
pub fn srpt_completions(instance: &JobInstance) -> Vec<(JobId, Time)> {
    let mut machine = SrptMachine::new();
    let mut done = Vec::with_capacity(instance.n());
    for job in &instance.jobs {
        done.extend(machine.advance_to(job.release));
        machine.add(job);
    }
    while let Some(t) = machine.next_completion() {
        done.extend(machine.advance_to(t));
    }
    done
}
