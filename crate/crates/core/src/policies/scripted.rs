//! Replays a fixed offline service order.

use crate::engine::{DecisionContext, Policy, PolicyAction};
use crate::instance::{Job, JobId, JobInstance};

/// Serves jobs in a given order as early as possible: the setup for the
/// next job starts as soon as the previous one finishes (or at time zero),
/// and service starts once the setup is done and the job has arrived.
///
/// This policy knows the whole instance in advance; it realizes offline
/// schedules and is not an online policy.
#[derive(Clone, Debug)]
pub struct ScriptedOrder {
    jobs: Vec<Job>,
    next: usize,
}

impl ScriptedOrder {
    /// Fails with the first id that is not in the instance.
    pub fn new(instance: &JobInstance, order: &[JobId]) -> Result<Self, JobId> {
        let jobs = order
            .iter()
            .map(|&id| instance.job(id).copied().ok_or(id))
            .collect::<Result<_, _>>()?;
        Ok(ScriptedOrder { jobs, next: 0 })
    }
}

impl Policy for ScriptedOrder {
    fn decide(&mut self, ctx: &DecisionContext<'_>) -> PolicyAction {
        if !ctx.is_free() {
            return PolicyAction::IdleUntilNextEvent;
        }
        let Some(job) = self.jobs.get(self.next) else {
            return PolicyAction::IdleUntilNextEvent;
        };
        if ctx.established() != Some(job.queue) {
            return PolicyAction::SwitchTo(job.queue);
        }
        if ctx.waiting(job.queue).iter().any(|j| j.id == job.id) {
            self.next += 1;
            PolicyAction::Serve(job.id)
        } else {
            PolicyAction::IdleUntilNextEvent
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::simulate;
    use crate::time::Time;

    fn t(n: u64) -> Time {
        Time::from_int(n)
    }

    #[test]
    fn setup_runs_ahead_of_release() {
        // Queue 2 set up during [0, 1]; jobs released at 1 finish at 1.
        let inst = JobInstance::new(2, t(1), [(t(0), t(3), 1), (t(1), t(0), 2), (t(1), t(0), 2)]).unwrap();
        let order = [JobId(1), JobId(2), JobId(0)];
        let trace = simulate(ScriptedOrder::new(&inst, &order).unwrap(), &inst).unwrap();
        assert_eq!(trace.total(), t(7));
    }

    #[test]
    fn unknown_job_rejected() {
        let inst = JobInstance::new(1, t(1), [(t(0), t(1), 1)]).unwrap();
        assert_eq!(ScriptedOrder::new(&inst, &[JobId(4)]).unwrap_err(), JobId(4));
    }
}
