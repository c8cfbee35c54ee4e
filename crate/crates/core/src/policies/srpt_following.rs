//! Policies driven by a virtual SRPT run of the setup-free instance: a job
//! becomes eligible when the virtual machine completes it.

use std::collections::HashSet;

use crate::engine::{Cause, DecisionContext, Policy, PolicyAction};
use crate::instance::{Job, JobId, QueueId};
use crate::srpt::SrptMachine;
use crate::time::{Rational, Time};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Selection {
    /// Serve eligible jobs in the order they became eligible.
    EligibilityOrder,
    /// Serve the eligible job with the largest Gittins index.
    GittinsIndex,
}

/// `1/p` for a job at the server's queue, `1/(p + tau)` elsewhere; a zero
/// denominator gives [`GittinsIndex::Infinite`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum GittinsIndex {
    Finite(Rational),
    Infinite,
}

pub fn gittins_index(job: &Job, established: Option<QueueId>, tau: Time) -> GittinsIndex {
    let cost = if established == Some(job.queue) { job.work } else { job.work + tau };
    if cost.is_zero() {
        GittinsIndex::Infinite
    } else {
        GittinsIndex::Finite(cost.value().recip())
    }
}

/// Largest index first; ties to smaller work, lower queue, lower id.
pub fn best_by_index<'a>(jobs: impl Iterator<Item = &'a Job>, established: Option<QueueId>, tau: Time) -> Option<&'a Job> {
    use std::cmp::Reverse;
    jobs.max_by_key(|j| (gittins_index(j, established, tau), Reverse(j.work), Reverse(j.queue), Reverse(j.id)))
}

/// One-machine (eligibility order) and Gittins-index polling.
///
/// With `clearing` set, every job is eligible as soon as it arrives and the
/// virtual run is skipped; the one-machine rule then serves the shortest
/// job first.
///
/// Choices are made only once every job arriving at the current instant has
/// been seen.
#[derive(Clone, Debug)]
pub struct SrptFollowing {
    selection: Selection,
    clearing: bool,
    machine: SrptMachine,
    seen: HashSet<JobId>,
    eligible: Vec<Job>,
    alarm: Option<Time>,
}

impl SrptFollowing {
    pub fn new(selection: Selection, clearing: bool) -> Self {
        SrptFollowing {
            selection,
            clearing,
            machine: SrptMachine::new(),
            seen: HashSet::new(),
            eligible: Vec::new(),
            alarm: None,
        }
    }

    pub fn one_machine() -> Self {
        Self::new(Selection::EligibilityOrder, false)
    }

    pub fn gipp() -> Self {
        Self::new(Selection::GittinsIndex, false)
    }

    /// Starts the virtual run at `now` with `backlog` already present.
    pub fn with_backlog(selection: Selection, now: Time, backlog: impl IntoIterator<Item = Job>) -> Self {
        let mut policy = Self::new(selection, false);
        policy.machine = SrptMachine::starting_at(now);
        for job in backlog {
            policy.seen.insert(job.id);
            policy.machine.add(&job);
        }
        policy
    }

    fn observe(&mut self, ctx: &DecisionContext<'_>) {
        let arrived = match ctx.cause {
            Cause::Arrival(id) if self.seen.insert(id) => ctx.job(id).copied(),
            _ => None,
        };
        if self.clearing {
            self.eligible.extend(arrived);
            return;
        }
        let mut done = self.machine.advance_to(ctx.clock);
        if let Some(job) = arrived {
            self.machine.add(&job);
            done.extend(self.machine.advance_to(ctx.clock));
        }
        for (id, _) in done {
            if let Some(job) = ctx.job(id) {
                self.eligible.push(*job);
            }
        }
    }

    fn choose(&self, ctx: &DecisionContext<'_>) -> Option<usize> {
        let position = |job: &Job| self.eligible.iter().position(|j| j.id == job.id);
        match (self.selection, self.clearing) {
            (Selection::EligibilityOrder, false) => (!self.eligible.is_empty()).then_some(0),
            (Selection::EligibilityOrder, true) => self
                .eligible
                .iter()
                .min_by_key(|j| (j.work, j.release, j.id))
                .and_then(position),
            (Selection::GittinsIndex, _) => {
                best_by_index(self.eligible.iter(), ctx.established(), ctx.tau).and_then(position)
            }
        }
    }
}

impl Policy for SrptFollowing {
    fn decide(&mut self, ctx: &DecisionContext<'_>) -> PolicyAction {
        self.observe(ctx);
        if !ctx.is_free() || ctx.arrivals_due_now {
            return PolicyAction::IdleUntilNextEvent;
        }
        if let Some(i) = self.choose(ctx) {
            let job = self.eligible[i];
            if ctx.established() == Some(job.queue) {
                self.eligible.remove(i);
                return PolicyAction::Serve(job.id);
            }
            return PolicyAction::SwitchTo(job.queue);
        }
        match self.machine.next_completion() {
            Some(t) if !self.clearing && self.alarm != Some(t) => {
                self.alarm = Some(t);
                PolicyAction::SetAlarm(t, 0)
            }
            _ => PolicyAction::IdleUntilNextEvent,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{check_online_causality, simulate};
    use crate::instance::JobInstance;
    use crate::time::int;
    use crate::trace::check_trace;

    fn t(n: u64) -> Time {
        Time::from_int(n)
    }

    #[test]
    fn single_job_costs_two_plus_theta() {
        for theta in [0u64, 1, 2, 5] {
            let inst = JobInstance::new(2, t(theta), [(t(0), t(1), 1)]).unwrap();
            for policy in [SrptFollowing::one_machine(), SrptFollowing::gipp()] {
                let trace = simulate(policy, &inst).unwrap();
                assert_eq!(trace.total(), t(2 + theta));
            }
        }
    }

    #[test]
    fn no_service_before_virtual_completion() {
        // Virtual SRPT: short job done at 2, long job at 4.
        let inst = JobInstance::new(2, t(0), [(t(0), t(3), 1), (t(1), t(1), 2)]).unwrap();
        let trace = simulate(SrptFollowing::one_machine(), &inst).unwrap();
        check_trace(&trace, &inst).unwrap();
        assert_eq!(trace.completions[&JobId(1)], t(3));
        assert_eq!(trace.completions[&JobId(0)], t(7));
        assert_eq!(trace.total(), t(10));
    }

    #[test]
    fn index_prefers_current_queue() {
        let tau = t(2);
        let here = Job { id: JobId(0), release: t(0), work: t(2), queue: QueueId(1) };
        let there = Job { id: JobId(1), release: t(0), work: t(1), queue: QueueId(2) };
        assert_eq!(gittins_index(&here, Some(QueueId(1)), tau), GittinsIndex::Finite(crate::time::rational(1, 2)));
        assert_eq!(gittins_index(&there, Some(QueueId(1)), tau), GittinsIndex::Finite(crate::time::rational(1, 3)));
        let jobs = [there, here];
        assert_eq!(best_by_index(jobs.iter(), Some(QueueId(1)), tau).unwrap().id, JobId(0));
    }

    #[test]
    fn zero_cost_index_is_infinite() {
        let job = Job { id: JobId(0), release: t(0), work: t(0), queue: QueueId(1) };
        assert_eq!(gittins_index(&job, Some(QueueId(1)), t(3)), GittinsIndex::Infinite);
        assert!(GittinsIndex::Infinite > GittinsIndex::Finite(int(1_000_000)));
    }

    #[test]
    fn clearing_one_machine_is_spt() {
        let inst = JobInstance::new(2, t(1), [(t(0), t(3), 1), (t(0), t(1), 2), (t(0), t(2), 1)]).unwrap();
        let trace = simulate(SrptFollowing::new(Selection::EligibilityOrder, true), &inst).unwrap();
        assert_eq!(trace.service_order(), vec![JobId(1), JobId(2), JobId(0)]);
    }

    #[test]
    fn policies_are_causal() {
        let inst = JobInstance::new(
            3,
            t(1),
            [(t(0), t(4), 1), (t(1), t(1), 2), (t(2), t(2), 3), (t(2), t(0), 1), (t(7), t(1), 2)],
        )
        .unwrap();
        check_online_causality(SrptFollowing::one_machine, &inst).unwrap();
        check_online_causality(SrptFollowing::gipp, &inst).unwrap();
    }
}
