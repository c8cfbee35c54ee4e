//! Policies that run another policy on a transformed copy of the arriving
//! jobs and copy its decisions onto the real system.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::engine::{Cause, DecisionContext, Policy, PolicyAction, Simulation};
use crate::instance::{Job, JobId};
use crate::srpt::SrptMachine;
use crate::time::Time;
use crate::trace::TraceEvent;

/// How the virtual copy of each job is derived.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// Every workload becomes `p_min`.
    WorkloadReduced,
    /// Every workload becomes `p_max`.
    WorkloadAugmented,
    /// Setup time becomes zero.
    SetupReduced,
    /// Setup time becomes zero and each workload grows by `tau`.
    SetupAugmented,
}

impl Transform {
    pub fn virtual_tau(self, tau: Time) -> Time {
        match self {
            Transform::WorkloadReduced | Transform::WorkloadAugmented => tau,
            Transform::SetupReduced | Transform::SetupAugmented => Time::ZERO,
        }
    }

    pub fn virtual_work(self, work: Time, tau: Time, p_min: Time, p_max: Time) -> Time {
        match self {
            Transform::WorkloadReduced => p_min,
            Transform::WorkloadAugmented => p_max,
            Transform::SetupReduced => work,
            Transform::SetupAugmented => work + tau,
        }
    }
}

enum Shadow {
    /// A full engine run of a non-preemptive base policy.
    Engine { sim: Simulation<Box<dyn Policy>>, cursor: usize },
    /// Preemptive SRPT; jobs are committed in completion order.
    Srpt { machine: SrptMachine, done: Vec<JobId>, cursor: usize },
}

/// Mirrors a base policy running on the transformed instance.
///
/// For an engine-simulated base, every setup start and service start of
/// the virtual run is replayed on the real server in the same order, each
/// as soon as the real server is free and the virtual run has taken that
/// step. For the SRPT base, real jobs are served in virtual completion
/// order, each once it has completed virtually.
pub struct Follower {
    transform: Transform,
    tau: Time,
    p_min: Time,
    p_max: Time,
    shadow: Shadow,
    seen: HashSet<JobId>,
    alarm: Option<Time>,
}

impl Follower {
    pub fn engine(transform: Transform, base: Box<dyn Policy>, k: usize, tau: Time, p_min: Time, p_max: Time) -> Self {
        Follower {
            transform,
            tau,
            p_min,
            p_max,
            shadow: Shadow::Engine {
                sim: Simulation::open(base, k, transform.virtual_tau(tau)),
                cursor: 0,
            },
            seen: HashSet::new(),
            alarm: None,
        }
    }

    pub fn srpt(transform: Transform, tau: Time, p_min: Time, p_max: Time) -> Self {
        Follower {
            transform,
            tau,
            p_min,
            p_max,
            shadow: Shadow::Srpt {
                machine: SrptMachine::new(),
                done: Vec::new(),
                cursor: 0,
            },
            seen: HashSet::new(),
            alarm: None,
        }
    }

    fn observe(&mut self, ctx: &DecisionContext<'_>) {
        let arrived = match ctx.cause {
            Cause::Arrival(id) if self.seen.insert(id) => ctx.job(id).copied(),
            _ => None,
        };
        let shadow_job = arrived.map(|j| Job {
            work: self.transform.virtual_work(j.work, self.tau, self.p_min, self.p_max),
            ..j
        });
        match &mut self.shadow {
            Shadow::Engine { sim, .. } => {
                if let Some(job) = shadow_job {
                    // Arrivals reach the shadow at their release, never behind it.
                    let _ = sim.inject(job);
                }
                let _ = sim.advance_through(ctx.clock);
            }
            Shadow::Srpt { machine, done, .. } => {
                done.extend(machine.advance_to(ctx.clock).into_iter().map(|(id, _)| id));
                if let Some(job) = shadow_job {
                    machine.add(&job);
                    done.extend(machine.advance_to(ctx.clock).into_iter().map(|(id, _)| id));
                }
            }
        }
    }

    fn next_shadow_event(&mut self) -> Option<Time> {
        match &mut self.shadow {
            Shadow::Engine { sim, .. } => sim.next_event_time(),
            Shadow::Srpt { machine, .. } => machine.next_completion(),
        }
    }
}

impl Policy for Follower {
    fn decide(&mut self, ctx: &DecisionContext<'_>) -> PolicyAction {
        self.observe(ctx);
        if !ctx.is_free() {
            return PolicyAction::IdleUntilNextEvent;
        }
        let serve_or_switch = |id: JobId| -> Option<PolicyAction> {
            let job = ctx.job(id)?;
            Some(if ctx.established() == Some(job.queue) {
                PolicyAction::Serve(id)
            } else {
                PolicyAction::SwitchTo(job.queue)
            })
        };
        match &mut self.shadow {
            Shadow::Engine { sim, cursor } => {
                let events = &sim.trace().events;
                while let Some(event) = events.get(*cursor) {
                    match *event {
                        TraceEvent::SetupStart { queue, .. } => {
                            *cursor += 1;
                            return PolicyAction::SwitchTo(queue);
                        }
                        TraceEvent::ServeStart { job, .. } => {
                            let action = serve_or_switch(job);
                            if let Some(PolicyAction::Serve(_)) = action {
                                *cursor += 1;
                            }
                            if let Some(action) = action {
                                return action;
                            }
                            break;
                        }
                        _ => *cursor += 1,
                    }
                }
            }
            Shadow::Srpt { done, cursor, .. } => {
                if let Some(&id) = done.get(*cursor) {
                    if let Some(action) = serve_or_switch(id) {
                        if let PolicyAction::Serve(_) = action {
                            *cursor += 1;
                        }
                        return action;
                    }
                }
            }
        }
        match self.next_shadow_event() {
            Some(t) if t > ctx.clock && self.alarm != Some(t) => {
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
    use crate::engine::simulate;
    use crate::instance::JobInstance;
    use crate::policies::cyclic::{Cyclic, QueueOrder};
    use crate::policies::srpt_following::SrptFollowing;
    use crate::trace::check_trace;

    fn t(n: u64) -> Time {
        Time::from_int(n)
    }

    fn cyclic_base(k: usize) -> Box<dyn Policy> {
        Box::new(Cyclic::exhaustive(true, QueueOrder::Fcfs, k))
    }

    #[test]
    fn identity_transform_reproduces_base() {
        // All workloads equal: reducing them changes nothing.
        let inst = JobInstance::new(2, t(1), [(t(0), t(2), 1), (t(1), t(2), 2), (t(3), t(2), 1)]).unwrap();
        let p = inst.params();
        let follower = Follower::engine(Transform::WorkloadReduced, cyclic_base(2), 2, t(1), p.p_min, p.p_max);
        let mirrored = simulate(follower, &inst).unwrap();
        let base = simulate(Cyclic::exhaustive(true, QueueOrder::Fcfs, 2), &inst).unwrap();
        assert_eq!(mirrored.service_order(), base.service_order());
        assert_eq!(mirrored.completions, base.completions);
    }

    #[test]
    fn setup_reduced_srpt_equals_one_machine() {
        let inst = JobInstance::new(
            3,
            t(2),
            [(t(0), t(4), 1), (t(1), t(1), 2), (t(2), t(2), 3), (t(2), t(0), 1), (t(9), t(1), 2)],
        )
        .unwrap();
        let p = inst.params();
        let follower = Follower::srpt(Transform::SetupReduced, inst.tau, p.p_min, p.p_max);
        let a = simulate(follower, &inst).unwrap();
        let b = simulate(SrptFollowing::one_machine(), &inst).unwrap();
        assert_eq!(a.completions, b.completions);
    }

    #[test]
    fn single_job_setup_reduced() {
        let inst = JobInstance::new(2, t(3), [(t(0), t(1), 1)]).unwrap();
        let follower = Follower::srpt(Transform::SetupReduced, inst.tau, t(1), t(1));
        assert_eq!(simulate(follower, &inst).unwrap().total(), t(5));
    }

    #[test]
    fn augmented_follower_is_legal() {
        let inst = JobInstance::new(
            2,
            t(1),
            [(t(0), t(1), 1), (t(0), t(3), 2), (t(2), t(2), 1), (t(5), t(1), 2)],
        )
        .unwrap();
        let p = inst.params();
        for transform in [Transform::WorkloadReduced, Transform::WorkloadAugmented] {
            let follower = Follower::engine(transform, cyclic_base(2), 2, inst.tau, p.p_min, p.p_max);
            let trace = simulate(follower, &inst).unwrap();
            check_trace(&trace, &inst).unwrap();
        }
        let no_skip: Box<dyn Policy> = Box::new(Cyclic::exhaustive(false, QueueOrder::Fcfs, 2));
        let follower = Follower::engine(Transform::WorkloadAugmented, no_skip, 2, inst.tau, p.p_min, p.p_max);
        check_trace(&simulate(follower, &inst).unwrap(), &inst).unwrap();
    }
}
