//! Event-driven simulation of one server attending `k` queues.
//!
//! The engine owns the physics: non-preemptive service, setups of length
//! `tau` that are lost when aborted, and the online information model.
//! Policies only see a [`DecisionContext`] built from what has been
//! revealed so far, and answer with a [`PolicyAction`].
//!
//! Decision epochs are job arrivals, service and setup completions, wait
//! timer expiry and policy alarms, plus a single start epoch at time zero.
//! Events at equal times are handled in this order: start, completions,
//! arrivals (by queue, then job id), wait timers, alarms (by creation).

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::instance::{Job, JobId, JobInstance, QueueId};
use crate::time::Time;
use crate::trace::{ScheduleTrace, TraceEvent};

/// Where the server is established.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Location {
    /// Neutral start position; the first setup of any queue costs `tau`.
    Dock,
    At(QueueId),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Activity {
    Idle,
    Setting { queue: QueueId, started_at: Time },
    Serving { job: JobId, started_at: Time },
    Waiting { queue: QueueId, until: Time },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ServerState {
    /// During a setup this is still the pre-setup location; an aborted
    /// setup leaves it unchanged.
    pub location: Location,
    pub activity: Activity,
    pub clock: Time,
}

impl ServerState {
    /// Queue at which the server can serve right now, if any.
    pub fn established(&self) -> Option<QueueId> {
        match (self.location, self.activity) {
            (_, Activity::Setting { .. }) => None,
            (Location::At(q), _) => Some(q),
            (Location::Dock, _) => None,
        }
    }

    /// Free to start a new activity (idle or waiting).
    pub fn is_free(&self) -> bool {
        matches!(self.activity, Activity::Idle | Activity::Waiting { .. })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Cause {
    Start,
    Arrival(JobId),
    ServeDone(JobId),
    SetupDone(QueueId),
    WaitTimerFired,
    AlarmFired(u64),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PolicyAction {
    Serve(JobId),
    /// Begin a fresh setup of the queue (legal for an empty queue and for
    /// the queue the server is already at).
    SwitchTo(QueueId),
    WaitUntil(Time),
    /// Register a wake-up; the policy is consulted again immediately.
    SetAlarm(Time, u64),
    /// Abandon the setup in progress and stay where the server was; the
    /// policy is consulted again immediately.
    AbortSetupAndStay,
    /// Make no new commitment: keep the current activity, or idle if free.
    IdleUntilNextEvent,
}

impl fmt::Display for PolicyAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyAction::Serve(j) => write!(f, "Serve({j})"),
            PolicyAction::SwitchTo(q) => write!(f, "SwitchTo({q})"),
            PolicyAction::WaitUntil(t) => write!(f, "WaitUntil({t})"),
            PolicyAction::SetAlarm(t, tag) => write!(f, "SetAlarm({t}, {tag})"),
            PolicyAction::AbortSetupAndStay => write!(f, "AbortSetupAndStay"),
            PolicyAction::IdleUntilNextEvent => write!(f, "IdleUntilNextEvent"),
        }
    }
}

/// Bookkeeping for the server's current stay at a queue.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct VisitInfo {
    pub queue: QueueId,
    /// 1-based count of completed setups of this queue so far.
    pub number: u32,
    pub started_at: Time,
    pub served: usize,
}

/// Everything a policy may look at when deciding.
pub struct DecisionContext<'a> {
    pub clock: Time,
    pub server: ServerState,
    pub cause: Cause,
    pub k: usize,
    pub tau: Time,
    pub visit: Option<VisitInfo>,
    /// Remaining per-visit stay allowance; only set for budgeted policies.
    pub stay_budget: Option<Time>,
    /// More jobs arrive at this same instant and have not been seen yet.
    pub arrivals_due_now: bool,
    queues: &'a [Vec<Job>],
    revealed: &'a HashMap<JobId, Job>,
    visit_counts: &'a [u32],
}

impl<'a> DecisionContext<'a> {
    /// Jobs waiting at `q` in arrival order.
    pub fn waiting(&self, q: QueueId) -> &'a [Job] {
        &self.queues[q.index()]
    }

    pub fn waiting_count(&self, q: QueueId) -> usize {
        self.queues[q.index()].len()
    }

    pub fn total_waiting(&self) -> usize {
        self.queues.iter().map(Vec::len).sum()
    }

    pub fn all_waiting(&self) -> impl Iterator<Item = &'a Job> {
        self.queues.iter().flatten()
    }

    /// No waiting jobs and no job in service.
    pub fn system_empty(&self) -> bool {
        self.total_waiting() == 0 && !matches!(self.server.activity, Activity::Serving { .. })
    }

    pub fn established(&self) -> Option<QueueId> {
        self.server.established()
    }

    pub fn is_free(&self) -> bool {
        self.server.is_free()
    }

    /// A job that has already been released; `None` for unknown or future
    /// jobs.
    pub fn job(&self, id: JobId) -> Option<&'a Job> {
        self.revealed.get(&id)
    }

    pub fn visit_count(&self, q: QueueId) -> u32 {
        self.visit_counts[q.index()]
    }

    pub fn queues(&self) -> impl Iterator<Item = QueueId> {
        (1..=self.k).map(QueueId)
    }
}

/// An online scheduling policy.
pub trait Policy: Send {
    fn decide(&mut self, ctx: &DecisionContext<'_>) -> PolicyAction;

    /// Whether the engine should enforce the per-visit stay budget
    /// (jobs processed in the visit times `p_max`) on waits.
    fn budgeted(&self) -> bool {
        false
    }
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn decide(&mut self, ctx: &DecisionContext<'_>) -> PolicyAction {
        (**self).decide(ctx)
    }

    fn budgeted(&self) -> bool {
        (**self).budgeted()
    }
}

const MAX_RECONSULTS: usize = 32;
const DEFAULT_MAX_EPOCHS: u64 = 20_000_000;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum PendingKind {
    Start,
    ServeDone(usize),
    SetupDone(QueueId),
    Arrival(usize),
    WaitTimer,
    Alarm(u64),
}

#[derive(Clone, Copy, Debug)]
struct Pending {
    time: Time,
    class: u8,
    queue: usize,
    ordinal: usize,
    seq: u64,
    generation: u64,
    kind: PendingKind,
}

impl Pending {
    fn key(&self) -> (Time, u8, usize, usize, u64) {
        (self.time, self.class, self.queue, self.ordinal, self.seq)
    }
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// A simulation that can run to completion over a known instance
/// ([`simulate`]) or be fed arrivals incrementally (open mode, used by
/// policies that shadow a virtual system).
pub struct Simulation<P: Policy> {
    policy: P,
    k: usize,
    tau: Time,
    jobs: Vec<Job>,
    index: HashMap<JobId, usize>,
    revealed: HashMap<JobId, Job>,
    queues: Vec<Vec<Job>>,
    state: ServerState,
    events: BinaryHeap<Reverse<Pending>>,
    seq: u64,
    generation: u64,
    trace: ScheduleTrace,
    unserved: usize,
    pending_arrivals: usize,
    arrivals_at: BTreeMap<Time, usize>,
    visit_counts: Vec<u32>,
    visit: Option<VisitInfo>,
    p_max: Time,
    idle_since: Option<Time>,
    epochs: u64,
    max_epochs: u64,
    open: bool,
}

impl<P: Policy> Simulation<P> {
    fn empty(policy: P, k: usize, tau: Time, open: bool) -> Self {
        let mut sim = Simulation {
            policy,
            k,
            tau,
            jobs: Vec::new(),
            index: HashMap::new(),
            revealed: HashMap::new(),
            queues: vec![Vec::new(); k],
            state: ServerState {
                location: Location::Dock,
                activity: Activity::Idle,
                clock: Time::ZERO,
            },
            events: BinaryHeap::new(),
            seq: 0,
            generation: 0,
            trace: ScheduleTrace::default(),
            unserved: 0,
            pending_arrivals: 0,
            arrivals_at: BTreeMap::new(),
            visit_counts: vec![0; k],
            visit: None,
            p_max: Time::ZERO,
            idle_since: None,
            epochs: 0,
            max_epochs: DEFAULT_MAX_EPOCHS,
            open,
        };
        if open {
            sim.push(Time::ZERO, 0, 0, 0, PendingKind::Start);
        }
        sim
    }

    /// Closed-mode simulation over a validated instance.
    pub fn new(policy: P, instance: &JobInstance) -> Self {
        let mut sim = Self::empty(policy, instance.k, instance.tau, false);
        if !instance.is_empty() {
            sim.push(Time::ZERO, 0, 0, 0, PendingKind::Start);
        }
        for job in &instance.jobs {
            sim.add_job(*job);
        }
        sim
    }

    /// Open-mode simulation: arrivals are supplied through [`Self::inject`]
    /// and the run never finalizes on its own.
    pub fn open(policy: P, k: usize, tau: Time) -> Self {
        Self::empty(policy, k, tau, true)
    }

    pub fn with_max_epochs(mut self, max_epochs: u64) -> Self {
        self.max_epochs = max_epochs;
        self
    }

    fn add_job(&mut self, job: Job) {
        let idx = self.jobs.len();
        self.index.insert(job.id, idx);
        self.jobs.push(job);
        self.unserved += 1;
        self.pending_arrivals += 1;
        *self.arrivals_at.entry(job.release).or_default() += 1;
        self.p_max = self.p_max.max(job.work);
        self.push(job.release, 2, job.queue.0, job.id.0, PendingKind::Arrival(idx));
    }

    /// Adds a job whose arrival is at or after the current clock.
    pub fn inject(&mut self, job: Job) -> Result<()> {
        if job.queue.0 == 0 || job.queue.0 > self.k {
            return Err(Error::InvalidQueue {
                job: job.id,
                queue: job.queue,
                k: self.k,
            });
        }
        if job.release < self.state.clock || self.index.contains_key(&job.id) {
            return Err(Error::Unsupported(format!(
                "job {} injected at {} behind clock {}",
                job.id, job.release, self.state.clock
            )));
        }
        self.add_job(job);
        Ok(())
    }

    pub fn clock(&self) -> Time {
        self.state.clock
    }

    pub fn state(&self) -> ServerState {
        self.state
    }

    pub fn trace(&self) -> &ScheduleTrace {
        &self.trace
    }

    pub fn policy(&self) -> &P {
        &self.policy
    }

    /// Time of the earliest live pending event.
    pub fn next_event_time(&mut self) -> Option<Time> {
        self.drop_stale();
        self.events.peek().map(|Reverse(p)| p.time)
    }

    /// Processes every event at or before `t`.
    pub fn advance_through(&mut self, t: Time) -> Result<()> {
        loop {
            self.drop_stale();
            match self.events.peek() {
                Some(Reverse(p)) if p.time <= t => {
                    let Reverse(p) = self.events.pop().expect("peeked");
                    self.step(p)?;
                }
                _ => return Ok(()),
            }
        }
    }

    /// Runs a closed simulation to completion.
    pub fn run(mut self) -> Result<ScheduleTrace> {
        while self.unserved > 0 {
            self.drop_stale();
            let Some(Reverse(p)) = self.events.pop() else {
                return Err(Error::Stalled {
                    time: self.state.clock.to_string(),
                    unserved: self.unserved,
                });
            };
            self.step(p)?;
        }
        Ok(self.trace)
    }

    fn push(&mut self, time: Time, class: u8, queue: usize, ordinal: usize, kind: PendingKind) {
        self.seq += 1;
        self.events.push(Reverse(Pending {
            time,
            class,
            queue,
            ordinal,
            seq: self.seq,
            generation: self.generation,
            kind,
        }));
    }

    fn is_stale(&self, p: &Pending) -> bool {
        matches!(p.kind, PendingKind::SetupDone(_) | PendingKind::WaitTimer | PendingKind::ServeDone(_))
            && p.generation != self.generation
    }

    fn drop_stale(&mut self) {
        while let Some(Reverse(p)) = self.events.peek() {
            if self.is_stale(p) {
                self.events.pop();
            } else {
                break;
            }
        }
    }

    fn step(&mut self, p: Pending) -> Result<()> {
        if self.is_stale(&p) {
            return Ok(());
        }
        self.epochs += 1;
        if self.epochs > self.max_epochs {
            return Err(Error::Stalled {
                time: self.state.clock.to_string(),
                unserved: self.unserved,
            });
        }
        self.state.clock = p.time;
        let now = p.time;
        let cause = match p.kind {
            PendingKind::Start => Cause::Start,
            PendingKind::Arrival(idx) => {
                let job = self.jobs[idx];
                self.pending_arrivals -= 1;
                if let Some(left) = self.arrivals_at.get_mut(&now) {
                    *left -= 1;
                    if *left == 0 {
                        self.arrivals_at.remove(&now);
                    }
                }
                self.revealed.insert(job.id, job);
                self.queues[job.queue.index()].push(job);
                Cause::Arrival(job.id)
            }
            PendingKind::ServeDone(idx) => {
                let job = self.jobs[idx];
                self.trace.events.push(TraceEvent::ServeEnd {
                    job: job.id,
                    queue: job.queue,
                    t: now,
                });
                self.trace.completions.insert(job.id, now);
                self.unserved -= 1;
                self.state.activity = Activity::Idle;
                Cause::ServeDone(job.id)
            }
            PendingKind::SetupDone(q) => {
                self.trace.events.push(TraceEvent::SetupEnd { queue: q, t: now });
                self.state.location = Location::At(q);
                self.state.activity = Activity::Idle;
                self.visit_counts[q.index()] += 1;
                self.visit = Some(VisitInfo {
                    queue: q,
                    number: self.visit_counts[q.index()],
                    started_at: now,
                    served: 0,
                });
                Cause::SetupDone(q)
            }
            PendingKind::WaitTimer => {
                if let Activity::Waiting { queue, .. } = self.state.activity {
                    self.trace.events.push(TraceEvent::WaitEnd { queue, t: now });
                }
                self.state.activity = Activity::Idle;
                Cause::WaitTimerFired
            }
            PendingKind::Alarm(tag) => Cause::AlarmFired(tag),
        };
        if !self.open && self.unserved == 0 && self.pending_arrivals == 0 {
            return Ok(());
        }
        self.consult(cause)
    }

    fn illegal(&self, action: PolicyAction, reason: impl Into<String>) -> Error {
        Error::IllegalAction {
            time: self.state.clock.to_string(),
            action: action.to_string(),
            reason: reason.into(),
        }
    }

    fn stay_budget(&self) -> Option<Time> {
        if !self.policy.budgeted() {
            return None;
        }
        let visit = self.visit?;
        if self.state.location != Location::At(visit.queue) {
            return None;
        }
        let jobs = (visit.served + self.queues[visit.queue.index()].len()) as u64;
        let limit = visit.started_at + self.p_max * jobs;
        Some(limit.saturating_sub(self.state.clock))
    }

    /// Leaves an idle or waiting state before starting something new.
    fn leave_free_state(&mut self) {
        let now = self.state.clock;
        if let Activity::Waiting { queue, .. } = self.state.activity {
            self.trace.events.push(TraceEvent::WaitEnd { queue, t: now });
            self.generation += 1;
        }
        if let Some(since) = self.idle_since.take() {
            if since < now {
                self.trace.events.push(TraceEvent::IdleStart { t: since });
                self.trace.events.push(TraceEvent::IdleEnd { t: now });
            }
        }
    }

    fn consult(&mut self, cause: Cause) -> Result<()> {
        for _ in 0..MAX_RECONSULTS {
            let stay_budget = self.stay_budget();
            let ctx = DecisionContext {
                clock: self.state.clock,
                server: self.state,
                cause,
                k: self.k,
                tau: self.tau,
                visit: self.visit,
                stay_budget,
                arrivals_due_now: self.arrivals_at.contains_key(&self.state.clock),
                queues: &self.queues,
                revealed: &self.revealed,
                visit_counts: &self.visit_counts,
            };
            let action = self.policy.decide(&ctx);
            let now = self.state.clock;
            match action {
                PolicyAction::SetAlarm(t, tag) => {
                    if t < now {
                        return Err(self.illegal(action, "alarm in the past"));
                    }
                    self.push(t, 4, 0, 0, PendingKind::Alarm(tag));
                }
                PolicyAction::AbortSetupAndStay => {
                    let Activity::Setting { queue, .. } = self.state.activity else {
                        return Err(self.illegal(action, "no setup in progress"));
                    };
                    self.trace.events.push(TraceEvent::SetupAbort { queue, t: now });
                    self.generation += 1;
                    self.state.activity = Activity::Idle;
                }
                PolicyAction::Serve(id) => {
                    if !self.state.is_free() {
                        return Err(self.illegal(action, "server busy"));
                    }
                    let Some(&idx) = self.index.get(&id) else {
                        return Err(self.illegal(action, "unknown job"));
                    };
                    let job = self.jobs[idx];
                    if self.state.location != Location::At(job.queue) {
                        return Err(self.illegal(action, "server not established at the job's queue"));
                    }
                    let waiting = &mut self.queues[job.queue.index()];
                    let Some(pos) = waiting.iter().position(|j| j.id == id) else {
                        return Err(self.illegal(action, "job not waiting"));
                    };
                    waiting.remove(pos);
                    self.leave_free_state();
                    self.trace.events.push(TraceEvent::ServeStart {
                        job: id,
                        queue: job.queue,
                        t: now,
                    });
                    self.state.activity = Activity::Serving { job: id, started_at: now };
                    if let Some(v) = self.visit.as_mut().filter(|v| v.queue == job.queue) {
                        v.served += 1;
                    }
                    self.push(now + job.work, 1, 0, 0, PendingKind::ServeDone(idx));
                    return Ok(());
                }
                PolicyAction::SwitchTo(q) => {
                    if !self.state.is_free() {
                        return Err(self.illegal(action, "server busy"));
                    }
                    if q.0 == 0 || q.0 > self.k {
                        return Err(self.illegal(action, "no such queue"));
                    }
                    self.leave_free_state();
                    self.trace.events.push(TraceEvent::SetupStart { queue: q, t: now });
                    self.state.activity = Activity::Setting { queue: q, started_at: now };
                    self.visit = None;
                    self.push(now + self.tau, 1, 0, 0, PendingKind::SetupDone(q));
                    return Ok(());
                }
                PolicyAction::WaitUntil(until) => {
                    if !self.state.is_free() {
                        return Err(self.illegal(action, "server busy"));
                    }
                    let Location::At(q) = self.state.location else {
                        return Err(self.illegal(action, "cannot wait at the dock"));
                    };
                    if until <= now {
                        return Err(self.illegal(action, "wait must end in the future"));
                    }
                    if let Some(budget) = stay_budget {
                        if until - now > budget {
                            return Err(self.illegal(action, "wait exceeds the visit's stay budget"));
                        }
                    }
                    match self.state.activity {
                        Activity::Waiting { .. } => self.generation += 1,
                        _ => {
                            self.leave_free_state();
                            self.trace.events.push(TraceEvent::WaitStart { queue: q, t: now });
                        }
                    }
                    self.state.activity = Activity::Waiting { queue: q, until };
                    self.push(until, 3, 0, 0, PendingKind::WaitTimer);
                    return Ok(());
                }
                PolicyAction::IdleUntilNextEvent => {
                    if self.state.activity == Activity::Idle && self.idle_since.is_none() {
                        self.idle_since = Some(now);
                    }
                    if !self.open && self.state.activity == Activity::Idle {
                        self.drop_stale();
                        if self.events.is_empty() && self.unserved > 0 {
                            return Err(Error::Stalled {
                                time: now.to_string(),
                                unserved: self.unserved,
                            });
                        }
                    }
                    return Ok(());
                }
            }
        }
        Err(self.illegal(PolicyAction::IdleUntilNextEvent, "policy did not commit to an action"))
    }
}

/// Runs `policy` over `instance` to completion.
pub fn simulate<P: Policy>(policy: P, instance: &JobInstance) -> Result<ScheduleTrace> {
    Simulation::new(policy, instance).run()
}

/// Checks that a policy's behavior never depends on jobs released later:
/// for every release time `c`, rerunning on the jobs released by `c` must
/// reproduce the full run's events strictly before the next release time.
pub fn check_online_causality<P: Policy>(
    make_policy: impl Fn() -> P,
    instance: &JobInstance,
) -> std::result::Result<(), String> {
    let full = simulate(make_policy(), instance).map_err(|e| e.to_string())?;
    let mut releases: Vec<Time> = instance.jobs.iter().map(|j| j.release).collect();
    releases.dedup();
    for w in releases.windows(2) {
        let (cut, next) = (w[0], w[1]);
        let partial = instance.filter(|j| j.release <= cut);
        let trace = simulate(make_policy(), &partial).map_err(|e| e.to_string())?;
        let full_prefix: Vec<_> = full.events.iter().filter(|e| e.time() < next).collect();
        let part_prefix: Vec<_> = trace.events.iter().filter(|e| e.time() < next).collect();
        if part_prefix.len() > full_prefix.len() || full_prefix[..part_prefix.len()] != part_prefix[..] {
            return Err(format!("behavior before t={next} depends on jobs released at or after it"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::check_trace;

    fn t(n: u64) -> Time {
        Time::from_int(n)
    }

    /// Serves the first waiting job anywhere, switching when needed.
    struct Greedy;

    impl Policy for Greedy {
        fn decide(&mut self, ctx: &DecisionContext<'_>) -> PolicyAction {
            if !ctx.is_free() {
                return PolicyAction::IdleUntilNextEvent;
            }
            if let Some(q) = ctx.established() {
                if let Some(j) = ctx.waiting(q).first() {
                    return PolicyAction::Serve(j.id);
                }
            }
            match ctx.all_waiting().next() {
                Some(j) => PolicyAction::SwitchTo(j.queue),
                None => PolicyAction::IdleUntilNextEvent,
            }
        }
    }

    #[test]
    fn empty_instance_gives_empty_trace() {
        let inst = JobInstance::new(2, t(1), []).unwrap();
        let trace = simulate(Greedy, &inst).unwrap();
        assert!(trace.events.is_empty());
        assert_eq!(trace.total(), Time::ZERO);
    }

    #[test]
    fn single_job_setup_then_serve() {
        let inst = JobInstance::new(2, t(2), [(t(0), t(1), 1)]).unwrap();
        let trace = simulate(Greedy, &inst).unwrap();
        assert_eq!(trace.total(), t(3));
        check_trace(&trace, &inst).unwrap();
        assert_eq!(
            trace.timeline(),
            "t=0/1 SETUP_START q=1\nt=2/1 SETUP_END q=1\nt=2/1 SERVE_START job=0 q=1\nt=3/1 SERVE_END job=0 q=1\n"
        );
    }

    #[test]
    fn idle_gap_is_recorded() {
        let inst = JobInstance::new(1, t(1), [(t(0), t(1), 1), (t(5), t(1), 1)]).unwrap();
        let trace = simulate(Greedy, &inst).unwrap();
        assert_eq!(trace.total(), t(2 + 6));
        assert!(trace.events.contains(&TraceEvent::IdleStart { t: t(2) }));
        assert!(trace.events.contains(&TraceEvent::IdleEnd { t: t(5) }));
        check_trace(&trace, &inst).unwrap();
    }

    struct Lazy;

    impl Policy for Lazy {
        fn decide(&mut self, _: &DecisionContext<'_>) -> PolicyAction {
            PolicyAction::IdleUntilNextEvent
        }
    }

    #[test]
    fn idling_forever_stalls() {
        let inst = JobInstance::new(1, t(1), [(t(0), t(1), 1)]).unwrap();
        assert!(matches!(simulate(Lazy, &inst), Err(Error::Stalled { .. })));
    }

    struct ServeUnarrived;

    impl Policy for ServeUnarrived {
        fn decide(&mut self, _: &DecisionContext<'_>) -> PolicyAction {
            PolicyAction::Serve(JobId(0))
        }
    }

    #[test]
    fn serving_without_setup_is_illegal() {
        let inst = JobInstance::new(1, t(1), [(t(0), t(1), 1)]).unwrap();
        assert!(matches!(simulate(ServeUnarrived, &inst), Err(Error::IllegalAction { .. })));
    }

    struct AbortFirst {
        aborted: bool,
    }

    impl Policy for AbortFirst {
        fn decide(&mut self, ctx: &DecisionContext<'_>) -> PolicyAction {
            if let (Cause::Arrival(_), Activity::Setting { .. }) = (ctx.cause, ctx.server.activity) {
                if !self.aborted {
                    self.aborted = true;
                    return PolicyAction::AbortSetupAndStay;
                }
            }
            Greedy.decide(ctx)
        }
    }

    #[test]
    fn aborted_setup_is_not_resumable() {
        // Setup of queue 1 starts at 0, aborted at the arrival at 1, then
        // restarted from scratch: service at [2, 3] ... [1 + 2, 1 + 2 + 1].
        let inst = JobInstance::new(2, t(2), [(t(0), t(1), 1), (t(1), t(1), 1)]).unwrap();
        let trace = simulate(AbortFirst { aborted: false }, &inst).unwrap();
        check_trace(&trace, &inst).unwrap();
        assert!(trace.events.contains(&TraceEvent::SetupAbort { queue: QueueId(1), t: t(1) }));
        assert_eq!(trace.completions[&JobId(0)], t(4));
        assert_eq!(trace.completions[&JobId(1)], t(5));
    }

    /// Waits `extra` after each service before serving the next job.
    struct Waiter {
        extra: Time,
        budgeted: bool,
    }

    impl Policy for Waiter {
        fn decide(&mut self, ctx: &DecisionContext<'_>) -> PolicyAction {
            match ctx.cause {
                Cause::ServeDone(_) if ctx.is_free() => PolicyAction::WaitUntil(ctx.clock + self.extra),
                _ => Greedy.decide(ctx),
            }
        }

        fn budgeted(&self) -> bool {
            self.budgeted
        }
    }

    #[test]
    fn waiting_within_budget() {
        let inst = JobInstance::new(1, t(1), [(t(0), t(2), 1), (t(0), t(2), 1)]).unwrap();
        let trace = simulate(Waiter { extra: t(1), budgeted: true }, &inst).unwrap();
        check_trace(&trace, &inst).unwrap();
        // 3, then wait [3, 4], serve [4, 6].
        assert_eq!(trace.total(), t(9));
        assert!(trace.events.contains(&TraceEvent::WaitStart { queue: QueueId(1), t: t(3) }));
    }

    #[test]
    fn budget_is_enforced_for_budgeted_policies() {
        // Visit starts at 1, two jobs of p_max = 2: the stay may last 4.
        // After the first service (t=3), waiting until 9 overruns it.
        let inst = JobInstance::new(1, t(1), [(t(0), t(2), 1), (t(0), t(2), 1)]).unwrap();
        let over = simulate(Waiter { extra: t(6), budgeted: true }, &inst);
        assert!(matches!(over, Err(Error::IllegalAction { .. })));
        let unchecked = simulate(Waiter { extra: t(6), budgeted: false }, &inst).unwrap();
        assert_eq!(unchecked.total(), t(3 + 11));
    }

    #[test]
    fn simultaneous_arrivals_ordered_by_queue_then_id() {
        struct Recorder(Vec<JobId>);
        impl Policy for Recorder {
            fn decide(&mut self, ctx: &DecisionContext<'_>) -> PolicyAction {
                if let Cause::Arrival(j) = ctx.cause {
                    self.0.push(j);
                }
                Greedy.decide(ctx)
            }
        }
        let inst = JobInstance::new(3, t(1), [(t(0), t(1), 3), (t(0), t(1), 1), (t(0), t(1), 2), (t(0), t(1), 1)]).unwrap();
        let mut sim = Simulation::new(Recorder(Vec::new()), &inst);
        sim.advance_through(Time::ZERO).unwrap();
        assert_eq!(sim.policy().0, vec![JobId(1), JobId(3), JobId(2), JobId(0)]);
    }

    #[test]
    fn flags_arrivals_still_due() {
        struct Recorder(Vec<bool>);
        impl Policy for Recorder {
            fn decide(&mut self, ctx: &DecisionContext<'_>) -> PolicyAction {
                if let Cause::Arrival(_) = ctx.cause {
                    self.0.push(ctx.arrivals_due_now);
                }
                Greedy.decide(ctx)
            }
        }
        let inst = JobInstance::new(2, t(1), [(t(0), t(1), 1), (t(0), t(1), 2), (t(5), t(1), 1)]).unwrap();
        let mut sim = Simulation::new(Recorder(Vec::new()), &inst);
        sim.advance_through(t(9)).unwrap();
        assert_eq!(sim.policy().0, vec![true, false, false]);
    }

    #[test]
    fn greedy_is_causal() {
        let inst = JobInstance::new(2, t(1), [(t(0), t(3), 1), (t(1), t(1), 2), (t(4), t(1), 1)]).unwrap();
        check_online_causality(|| Greedy, &inst).unwrap();
    }

    #[test]
    fn open_mode_accepts_injections() {
        let mut sim = Simulation::open(Greedy, 2, t(1));
        sim.inject(Job { id: JobId(7), release: t(2), work: t(1), queue: QueueId(2) }).unwrap();
        sim.advance_through(t(3)).unwrap();
        assert_eq!(sim.next_event_time(), Some(t(4)));
        sim.advance_through(t(4)).unwrap();
        assert_eq!(sim.trace().completions[&JobId(7)], t(4));
        assert!(sim.inject(Job { id: JobId(8), release: t(1), work: t(1), queue: QueueId(1) }).is_err());
    }
}
