//! Cyclic polling: exhaustive, gated and l-limited service, with or without
//! skipping empty queues.

use serde::{Deserialize, Serialize};

use crate::engine::{Cause, DecisionContext, Policy, PolicyAction};
use crate::instance::{Job, JobId, QueueId};

/// Service order among the jobs waiting at one queue.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueueOrder {
    #[default]
    Fcfs,
    Spt,
}

impl QueueOrder {
    pub fn pick<'a>(self, jobs: impl Iterator<Item = &'a Job>) -> Option<&'a Job> {
        match self {
            QueueOrder::Fcfs => jobs.min_by_key(|j| (j.release, j.id)),
            QueueOrder::Spt => jobs.min_by_key(|j| (j.work, j.release, j.id)),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Discipline {
    /// Serve until the queue is empty.
    Exhaustive,
    /// Serve only the jobs present when the setup completed.
    Gated,
    /// Serve at most this many jobs per visit.
    Limited(usize),
}

/// A cyclic polling policy over a fixed visit table (by default
/// `1, 2, ..., k`).
///
/// Without skipping, the server walks the table one entry per setup, also
/// setting up empty queues, and keeps cycling while the system is empty.
/// With skipping, it moves to the next table entry that has waiting jobs
/// and rests at its current queue when the system is empty.
///
/// When a gated or limited visit ends while jobs are still waiting at the
/// current queue and nowhere else, a skipping server sets the same queue
/// up again, which starts a new visit.
#[derive(Clone, Debug)]
pub struct Cyclic {
    discipline: Discipline,
    skip_empty: bool,
    order: QueueOrder,
    route: Vec<QueueId>,
    pos: Option<usize>,
    gate: Vec<JobId>,
    served_in_visit: usize,
    resting: bool,
}

impl Cyclic {
    pub fn new(discipline: Discipline, skip_empty: bool, order: QueueOrder, k: usize) -> Self {
        Self::with_route(discipline, skip_empty, order, (1..=k).map(QueueId).collect())
    }

    /// Uses `route` as the visit table instead of `1..=k`. The table must
    /// be non-empty.
    pub fn with_route(discipline: Discipline, skip_empty: bool, order: QueueOrder, route: Vec<QueueId>) -> Self {
        assert!(!route.is_empty(), "visit table must not be empty");
        Cyclic {
            discipline,
            skip_empty,
            order,
            route,
            pos: None,
            gate: Vec::new(),
            served_in_visit: 0,
            resting: false,
        }
    }

    pub fn exhaustive(skip_empty: bool, order: QueueOrder, k: usize) -> Self {
        Self::new(Discipline::Exhaustive, skip_empty, order, k)
    }

    /// The static visit table this policy cycles through.
    pub fn visit_table(&self) -> &[QueueId] {
        &self.route
    }

    fn candidate<'a>(&self, ctx: &DecisionContext<'a>, q: QueueId) -> Option<&'a Job> {
        let waiting = ctx.waiting(q).iter();
        match self.discipline {
            Discipline::Exhaustive => self.order.pick(waiting),
            Discipline::Gated => self.order.pick(waiting.filter(|j| self.gate.contains(&j.id))),
            Discipline::Limited(l) if self.served_in_visit < l => self.order.pick(waiting),
            Discipline::Limited(_) => None,
        }
    }

    /// Table positions to try after the current one, ending with the
    /// current position itself.
    fn positions_after(&self) -> impl Iterator<Item = usize> + '_ {
        let len = self.route.len();
        let start = self.pos.map_or(0, |p| p + 1);
        (0..len).map(move |i| (start + i) % len)
    }

    /// Keeps the table position consistent with where the server actually
    /// is (it can differ after another policy drove the server).
    fn sync_position(&mut self, at: Option<QueueId>) {
        if let Some(q) = at {
            if self.pos.map(|p| self.route[p]) != Some(q) {
                self.pos = self.route.iter().position(|&r| r == q);
            }
        }
    }
}

impl Policy for Cyclic {
    fn decide(&mut self, ctx: &DecisionContext<'_>) -> PolicyAction {
        if !ctx.is_free() {
            return PolicyAction::IdleUntilNextEvent;
        }
        let established = ctx.established();
        self.sync_position(established);
        if let Cause::SetupDone(q) = ctx.cause {
            self.gate = ctx.waiting(q).iter().map(|j| j.id).collect();
            self.served_in_visit = 0;
            self.resting = false;
        }
        if self.resting && ctx.total_waiting() > 0 {
            self.resting = false;
            self.served_in_visit = 0;
        }

        if let Some(q) = established {
            if let Some(job) = self.candidate(ctx, q) {
                self.served_in_visit += 1;
                return PolicyAction::Serve(job.id);
            }
        }

        let next = if self.skip_empty {
            self.positions_after().find(|&p| ctx.waiting_count(self.route[p]) > 0)
        } else if ctx.total_waiting() == 0 && ctx.tau.is_zero() {
            // Cycling through zero-length setups would never advance time.
            None
        } else {
            self.positions_after().next()
        };
        match next {
            Some(p) => {
                self.pos = Some(p);
                PolicyAction::SwitchTo(self.route[p])
            }
            None => {
                self.resting = established.is_some();
                PolicyAction::IdleUntilNextEvent
            }
        }
    }

    fn budgeted(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::simulate;
    use crate::instance::JobInstance;
    use crate::time::Time;
    use crate::trace::check_trace;

    fn t(n: u64) -> Time {
        Time::from_int(n)
    }

    fn half(n: u64) -> Time {
        Time::from_ratio(n, 2)
    }

    #[test]
    fn single_job_exhaustive() {
        let inst = JobInstance::new(2, t(2), [(t(0), t(1), 1)]).unwrap();
        let trace = simulate(Cyclic::exhaustive(true, QueueOrder::Fcfs, 2), &inst).unwrap();
        assert_eq!(trace.total(), t(3));
    }

    #[test]
    fn two_queues_one_job_each() {
        let inst = JobInstance::new(2, t(1), [(t(0), t(1), 1), (t(0), t(1), 2)]).unwrap();
        let trace = simulate(Cyclic::exhaustive(true, QueueOrder::Fcfs, 2), &inst).unwrap();
        assert_eq!(trace.completions.values().copied().collect::<Vec<_>>(), vec![t(2), t(4)]);
        assert_eq!(trace.total(), t(6));
    }

    #[test]
    fn gated_defers_arrivals_to_next_cycle() {
        // A at queue 1 served [1, 2]; B arrives at 3/2 during A's service.
        let inst = JobInstance::new(2, t(1), [(t(0), t(1), 1), (half(3), t(1), 1)]).unwrap();
        let gated = simulate(Cyclic::new(Discipline::Gated, false, QueueOrder::Fcfs, 2), &inst).unwrap();
        check_trace(&gated, &inst).unwrap();
        assert_eq!(gated.completions[&JobId(1)], t(5));
        let exhaustive = simulate(Cyclic::exhaustive(false, QueueOrder::Fcfs, 2), &inst).unwrap();
        assert_eq!(exhaustive.completions[&JobId(1)], t(3));
    }

    #[test]
    fn gated_equals_exhaustive_when_all_present() {
        let inst = JobInstance::new(1, t(1), [(t(0), t(2), 1), (t(0), t(1), 1), (t(0), t(3), 1)]).unwrap();
        for order in [QueueOrder::Fcfs, QueueOrder::Spt] {
            let a = simulate(Cyclic::new(Discipline::Gated, true, order, 1), &inst).unwrap();
            let b = simulate(Cyclic::exhaustive(true, order, 1), &inst).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn gated_skip_resets_up_same_queue() {
        let inst = JobInstance::new(2, t(1), [(t(0), t(1), 1), (half(3), t(1), 1)]).unwrap();
        let trace = simulate(Cyclic::new(Discipline::Gated, true, QueueOrder::Fcfs, 2), &inst).unwrap();
        check_trace(&trace, &inst).unwrap();
        // After A at 2, only queue 1 has work: fresh setup [2, 3], B at 4.
        assert_eq!(trace.completions[&JobId(1)], t(4));
        assert_eq!(trace.setup_count(), 2);
    }

    #[test]
    fn limited_serves_at_most_l_per_visit() {
        let jobs = [(t(0), t(1), 1), (t(0), t(1), 1), (t(0), t(1), 2), (t(0), t(1), 2)];
        let inst = JobInstance::new(2, t(1), jobs).unwrap();
        let trace = simulate(Cyclic::new(Discipline::Limited(1), true, QueueOrder::Fcfs, 2), &inst).unwrap();
        assert_eq!(trace.total(), t(20));
        let exhaustive = simulate(Cyclic::exhaustive(true, QueueOrder::Fcfs, 2), &inst).unwrap();
        assert_eq!(exhaustive.total(), t(16));
    }

    #[test]
    fn limited_not_binding_matches_exhaustive() {
        let inst = JobInstance::new(2, t(1), [(t(0), t(1), 1), (t(0), t(2), 1), (t(0), t(1), 2)]).unwrap();
        let a = simulate(Cyclic::new(Discipline::Limited(5), true, QueueOrder::Fcfs, 2), &inst).unwrap();
        let b = simulate(Cyclic::exhaustive(true, QueueOrder::Fcfs, 2), &inst).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn no_skip_sets_up_empty_queues() {
        let inst = JobInstance::new(3, t(1), [(t(0), t(1), 3)]).unwrap();
        let trace = simulate(Cyclic::exhaustive(false, QueueOrder::Fcfs, 3), &inst).unwrap();
        assert_eq!(trace.established_sequence(), vec![QueueId(1), QueueId(2), QueueId(3)]);
        assert_eq!(trace.total(), t(4));
        let skip = simulate(Cyclic::exhaustive(true, QueueOrder::Fcfs, 3), &inst).unwrap();
        assert_eq!(skip.total(), t(2));
    }

    #[test]
    fn spt_order_within_queue() {
        let inst = JobInstance::new(1, t(1), [(t(0), t(3), 1), (t(0), t(1), 1)]).unwrap();
        let trace = simulate(Cyclic::exhaustive(true, QueueOrder::Spt, 1), &inst).unwrap();
        assert_eq!(trace.service_order(), vec![JobId(1), JobId(0)]);
    }

    #[test]
    fn no_skip_with_zero_setup_terminates() {
        let inst = JobInstance::new(3, t(0), [(t(0), t(1), 2), (t(5), t(1), 1)]).unwrap();
        let trace = simulate(Cyclic::exhaustive(false, QueueOrder::Fcfs, 3), &inst).unwrap();
        check_trace(&trace, &inst).unwrap();
        assert_eq!(trace.total(), t(1 + 6));
    }

    #[test]
    fn custom_route_is_followed() {
        let route = vec![QueueId(1), QueueId(2), QueueId(1), QueueId(3)];
        let inst = JobInstance::new(3, t(1), [(t(0), t(1), 3)]).unwrap();
        let policy = Cyclic::with_route(Discipline::Exhaustive, false, QueueOrder::Fcfs, route.clone());
        assert_eq!(policy.visit_table(), &route[..]);
        let trace = simulate(policy, &inst).unwrap();
        assert_eq!(trace.established_sequence(), route);
    }
}
