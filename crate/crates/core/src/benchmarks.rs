//! Offline benchmarks and competitive-ratio reports.
//!
//! For a fixed service order the best schedule is the greedy one: each
//! setup starts when the previous service ends and each service starts as
//! soon as its setup is done and the job has arrived. Moving any start
//! later can only push completions later, so minimizing over orders with
//! greedy timing covers every non-preemptive schedule.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::simulate;
use crate::error::{Error, Result};
use crate::instance::{JobId, JobInstance};
use crate::policies::{PolicySpec, ScriptedOrder, Transform};
use crate::srpt::srpt_completions;
use crate::time::{int, rational, Rational, Time};
use crate::trace::{total_completion, ScheduleTrace};

pub const DEFAULT_MAX_N: usize = 10;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkKind {
    /// Preemptive SRPT with setups removed; a lower bound on the optimum.
    SrptReduced,
    /// Exact offline optimum by search over service orders.
    BruteForceOptimal,
    /// A feasible offline schedule supplied with an adversarial instance;
    /// an upper bound on the optimum.
    ConstructedOffline,
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchmarkKind::SrptReduced => "srpt_reduced",
            BenchmarkKind::BruteForceOptimal => "brute_force_optimal",
            BenchmarkKind::ConstructedOffline => "constructed_offline",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchmarkResult {
    pub kind: BenchmarkKind,
    pub total: Time,
    pub order: Option<Vec<JobId>>,
    pub schedule: Option<ScheduleTrace>,
    pub exact: bool,
}

/// Total completion time of preemptive SRPT on the setup-free instance.
pub fn srpt_reduced(instance: &JobInstance) -> BenchmarkResult {
    let done = srpt_completions(instance);
    BenchmarkResult {
        kind: BenchmarkKind::SrptReduced,
        total: done.iter().map(|&(_, c)| c).sum(),
        order: Some(done.iter().map(|&(id, _)| id).collect()),
        schedule: None,
        exact: false,
    }
}

/// Runs the greedy schedule for `order` through the engine.
pub fn schedule_order(instance: &JobInstance, order: &[JobId]) -> Result<ScheduleTrace> {
    let policy = ScriptedOrder::new(instance, order)
        .map_err(|id| Error::Unsupported(format!("order names job {id}, which is not in the instance")))?;
    let trace = simulate(policy, instance)?;
    total_completion(&trace, instance)?;
    Ok(trace)
}

/// Greedy total for `order` computed directly (no engine).
pub fn greedy_total(instance: &JobInstance, order: &[JobId]) -> Option<Time> {
    let mut now = Time::ZERO;
    let mut at = None;
    let mut total = Time::ZERO;
    for &id in order {
        let job = instance.job(id)?;
        let ready = if at == Some(job.queue) { now } else { now + instance.tau };
        now = ready.max(job.release) + job.work;
        at = Some(job.queue);
        total += now;
    }
    Some(total)
}

/// Exact offline optimum over all service orders.
pub fn brute_force_optimal(instance: &JobInstance, max_n: usize) -> Result<BenchmarkResult> {
    search(instance, max_n, false)
}

/// Best schedule among orders that never leave a queue while a job already
/// released there is still unserved.
pub fn exhaustive_optimal(instance: &JobInstance, max_n: usize) -> Result<BenchmarkResult> {
    search(instance, max_n, true)
}

fn search(instance: &JobInstance, max_n: usize, exhaustive_only: bool) -> Result<BenchmarkResult> {
    let n = instance.n();
    if n > max_n || n > 31 {
        return Err(Error::TooLarge { n, max: max_n.min(31) });
    }
    let mut s = Search {
        instance,
        exhaustive_only,
        best: None,
        best_order: Vec::new(),
        path: Vec::with_capacity(n),
        frontier: HashMap::new(),
    };
    s.dfs(0, 0, Time::ZERO, Time::ZERO);
    let order: Vec<JobId> = s.best_order.iter().map(|&i| instance.jobs[i].id).collect();
    let total = s.best.unwrap_or(Time::ZERO);
    let schedule = schedule_order(instance, &order)?;
    debug_assert_eq!(schedule.total(), total);
    Ok(BenchmarkResult {
        kind: BenchmarkKind::BruteForceOptimal,
        total,
        order: Some(order),
        schedule: Some(schedule),
        exact: true,
    })
}

/// Depth-first search over orders with two exact prunings: a lower bound on
/// the remaining completions, and dominance between partial schedules that
/// served the same set and ended at the same queue.
struct Search<'a> {
    instance: &'a JobInstance,
    exhaustive_only: bool,
    best: Option<Time>,
    best_order: Vec<usize>,
    path: Vec<usize>,
    /// (served set, last queue) -> non-dominated (finish time, cost) pairs.
    frontier: HashMap<(u32, usize), Vec<(Time, Time)>>,
}

impl Search<'_> {
    fn remaining_lower_bound(&self, mask: u32, now: Time) -> Time {
        let jobs = &self.instance.jobs;
        let mut works = Vec::new();
        let mut own = Time::ZERO;
        for (i, job) in jobs.iter().enumerate() {
            if mask & (1 << i) == 0 {
                works.push(job.work);
                own += now.max(job.release) + job.work;
            }
        }
        works.sort();
        let mut packed = Time::ZERO;
        let mut prefix = now;
        for w in works {
            prefix += w;
            packed += prefix;
        }
        own.max(packed)
    }

    fn dfs(&mut self, mask: u32, last: usize, now: Time, cost: Time) {
        let jobs = &self.instance.jobs;
        let n = jobs.len();
        if mask.count_ones() as usize == n {
            if self.best.is_none_or(|b| cost < b) {
                self.best = Some(cost);
                self.best_order = self.path.clone();
            }
            return;
        }
        if let Some(b) = self.best {
            if cost + self.remaining_lower_bound(mask, now) >= b {
                return;
            }
        }
        let entry = self.frontier.entry((mask, last)).or_default();
        if entry.iter().any(|&(t, c)| t <= now && c <= cost) {
            return;
        }
        entry.retain(|&(t, c)| !(now <= t && cost <= c));
        entry.push((now, cost));

        for i in 0..n {
            if mask & (1 << i) != 0 {
                continue;
            }
            let job = jobs[i];
            let q = job.queue.0;
            if self.exhaustive_only && last != 0 && q != last {
                let leaves_work = jobs
                    .iter()
                    .enumerate()
                    .any(|(j, other)| mask & (1 << j) == 0 && other.queue.0 == last && other.release <= now);
                if leaves_work {
                    continue;
                }
            }
            let ready = if q == last { now } else { now + self.instance.tau };
            let end = ready.max(job.release) + job.work;
            self.path.push(i);
            self.dfs(mask | (1 << i), q, end, cost + end);
            self.path.pop();
        }
    }
}

/// Policy cost against one benchmark, with the applicable proven bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioReport {
    pub policy: PolicySpec,
    pub policy_total: Time,
    pub benchmark_kind: BenchmarkKind,
    pub benchmark_total: Time,
    /// `None` when the benchmark total is zero.
    pub ratio: Option<Rational>,
    pub claimed_bound: Option<Rational>,
    pub bound_ok: Option<bool>,
}

impl RatioReport {
    pub fn zero_benchmark(&self) -> bool {
        self.ratio.is_none()
    }
}

/// Simulates `policy` on `instance` and compares with `benchmark`.
pub fn competitive_ratio(policy: &PolicySpec, instance: &JobInstance, benchmark: &BenchmarkResult) -> Result<RatioReport> {
    let trace = simulate(policy.instantiate(instance)?, instance)?;
    let policy_total = total_completion(&trace, instance)?;
    Ok(ratio_report(policy, instance, policy_total, benchmark))
}

pub fn ratio_report(policy: &PolicySpec, instance: &JobInstance, policy_total: Time, benchmark: &BenchmarkResult) -> RatioReport {
    let ratio = (!benchmark.total.is_zero()).then(|| policy_total.value() / benchmark.total.value());
    let claimed_bound = claimed_bound(policy, instance, benchmark.kind);
    let bound_ok = match (ratio, claimed_bound) {
        (Some(r), Some(b)) => Some(r <= b),
        _ => None,
    };
    RatioReport {
        policy: policy.clone(),
        policy_total,
        benchmark_kind: benchmark.kind,
        benchmark_total: benchmark.total,
        ratio,
        claimed_bound,
        bound_ok,
    }
}

/// `max(3/2 gamma, k + 1)`.
pub fn round_robin_ratio(gamma: Rational, k: usize) -> Rational {
    (rational(3, 2) * gamma).max(int(k as i128 + 1))
}

/// The smallest proven upper bound on `policy`'s ratio against `kind` for
/// this instance's parameters, if any applies.
///
/// Bounds proven against the offline optimum also hold against a
/// constructed offline schedule (which costs at least the optimum), but not
/// against the SRPT lower bound. Bounds proven against the SRPT lower bound
/// hold against every benchmark.
pub fn claimed_bound(policy: &PolicySpec, instance: &JobInstance, kind: BenchmarkKind) -> Option<Rational> {
    let params = instance.params();
    let k = instance.k;
    let versus_optimum = kind != BenchmarkKind::SrptReduced;
    let gamma = params.gamma.finite();
    let theta = params.theta.finite();
    let mut bounds: Vec<Rational> = Vec::new();

    if versus_optimum && k >= 2 && policy.is_round_robin() {
        bounds.extend(gamma.map(|g| round_robin_ratio(g, k)));
    }
    if versus_optimum && policy.work_conserving() {
        if let (Some(g), Some(t)) = (gamma, theta) {
            bounds.push(g + t);
        }
    }
    match policy {
        PolicySpec::OneMachine { clearing: false } | PolicySpec::Gipp { clearing: false } | PolicySpec::SrptOrder => {
            bounds.extend(theta.map(|t| t + int(2)));
        }
        PolicySpec::OneMachine { clearing: true } | PolicySpec::Gipp { clearing: true } if instance.is_clearing() => {
            bounds.extend(theta.map(|t| t + int(1)));
        }
        PolicySpec::Follower {
            transform,
            base,
            p_min: None,
            p_max: None,
        } => match (transform, &**base) {
            (Transform::WorkloadReduced | Transform::WorkloadAugmented, b) if b.is_round_robin() && k >= 2 => {
                if versus_optimum {
                    bounds.extend(gamma.map(|g| g * int(k as i128 + 1)));
                }
            }
            (Transform::SetupReduced, PolicySpec::SrptOrder) => bounds.extend(theta.map(|t| t + int(2))),
            (Transform::SetupAugmented, PolicySpec::SrptOrder) => {
                bounds.extend(theta.map(|t| (t + int(1)) * int(2)));
            }
            _ => {}
        },
        _ => {}
    }
    bounds.into_iter().min()
}
