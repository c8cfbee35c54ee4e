//! Worst-case instance families with closed-form costs for both the online
//! policy they target and an explicit offline schedule.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::benchmarks::{schedule_order, BenchmarkKind, BenchmarkResult};
use crate::error::{Error, Result};
use crate::instance::{JobId, JobInstance};
use crate::policies::{PolicySpec, QueueOrder};
use crate::time::{format_rational, int, rational, Rational, Time};
use crate::trace::ScheduleTrace;

/// One generated instance with its bound pair.
///
/// `online_bound` is a lower bound on the cost of `target` (its exact cost
/// when `online_exact` is set). `offline_bound` is an upper bound on the
/// optimum, met or beaten by serving `offline_order` greedily.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversarialFamily {
    pub name: &'static str,
    pub params: BTreeMap<&'static str, String>,
    pub instance: JobInstance,
    pub target: PolicySpec,
    pub online_bound: Time,
    pub online_exact: bool,
    pub offline_bound: Time,
    pub offline_order: Vec<JobId>,
    pub limit_behavior: &'static str,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    family: &'a str,
    params: &'a BTreeMap<&'static str, String>,
    target: &'a PolicySpec,
    online_bound: Time,
    online_exact: bool,
    offline_bound: Time,
    offline_total: Time,
    offline_schedule: &'a [JobId],
    limit_behavior: &'a str,
}

impl AdversarialFamily {
    pub fn offline_schedule(&self) -> Result<ScheduleTrace> {
        schedule_order(&self.instance, &self.offline_order)
    }

    /// The embedded offline schedule as a benchmark.
    pub fn constructed(&self) -> Result<BenchmarkResult> {
        let schedule = self.offline_schedule()?;
        Ok(BenchmarkResult {
            kind: BenchmarkKind::ConstructedOffline,
            total: schedule.total(),
            order: Some(self.offline_order.clone()),
            schedule: Some(schedule),
            exact: false,
        })
    }

    pub fn bound_ratio(&self) -> Option<Rational> {
        (!self.offline_bound.is_zero()).then(|| self.online_bound.value() / self.offline_bound.value())
    }

    /// JSON with the bound pair and the offline service order.
    pub fn sidecar_json(&self) -> Result<String> {
        let offline_total = self.offline_schedule()?.total();
        let sidecar = Sidecar {
            family: self.name,
            params: &self.params,
            target: &self.target,
            online_bound: self.online_bound,
            online_exact: self.online_exact,
            offline_bound: self.offline_bound,
            offline_total,
            offline_schedule: &self.offline_order,
            limit_behavior: self.limit_behavior,
        };
        Ok(serde_json::to_string_pretty(&sidecar)?)
    }
}

fn time(r: Rational) -> Time {
    Time::new(r).expect("closed forms are non-negative")
}

fn g(n: usize) -> Rational {
    let n = n as i128;
    int(n * (n + 1) / 2)
}

fn params<const N: usize>(entries: [(&'static str, Rational); N]) -> BTreeMap<&'static str, String> {
    entries.into_iter().map(|(k, v)| (k, format_rational(&v))).collect()
}

fn ids(range: std::ops::Range<usize>) -> impl Iterator<Item = JobId> {
    range.map(JobId)
}

/// Tightness family for cyclic exhaustive service.
///
/// One job of work `gamma` at queue 1 and a unit job at every other queue,
/// all at time 0; `n` unit jobs reach queue 1 at `gamma + tau + eps` with
/// `tau = n^2`, just after the server has left it.
pub fn cyclic_tightness(k: usize, gamma: Rational, n: usize, eps: Rational) -> Result<AdversarialFamily> {
    if k < 2 || n == 0 {
        return Err(Error::Unsupported("need k >= 2 and n >= 1".into()));
    }
    if gamma <= int(0) || eps <= int(0) {
        return Err(Error::Unsupported("gamma and eps must be positive".into()));
    }
    let kk = k as i128;
    if gamma * rational(3, 2) > int(kk + 1) {
        return Err(Error::ParamsViolateRegime(format!(
            "3/2 * gamma = {} exceeds k + 1 = {}",
            format_rational(&(gamma * rational(3, 2))),
            kk + 1
        )));
    }
    let nn = n as i128;
    let tau = int(nn * nn);
    let mut jobs = vec![(Time::ZERO, time(gamma), 1)];
    jobs.extend((2..=k).map(|q| (Time::ZERO, Time::from_int(1), q)));
    let batch_at = time(gamma + tau + eps);
    jobs.extend((0..n).map(|_| (batch_at, Time::from_int(1), 1)));
    let instance = JobInstance::new(k, time(tau), jobs)?;

    let gi = g(n + k);
    let setups = int(kk * (kk + 1) / 2) * tau;
    let online = gi + int(nn * (kk + 1)) * tau + setups;
    let offline = gamma * gi + int(nn) * (tau + eps) + setups + int(kk - 1) * eps;
    let mut order = vec![JobId(0)];
    order.extend(ids(k..k + n));
    order.extend(ids(1..k));
    Ok(AdversarialFamily {
        name: "cyclic_tightness",
        params: params([("k", int(kk)), ("gamma", gamma), ("n", int(nn)), ("eps", eps), ("tau", tau)]),
        instance,
        target: PolicySpec::exhaustive(true, QueueOrder::Fcfs),
        online_bound: time(online),
        online_exact: gamma == int(1),
        offline_bound: time(offline),
        offline_order: order,
        limit_behavior: "ratio tends to k + 1 as n grows (gamma = 1)",
    })
}

/// Unbounded-ratio family for cyclic exhaustive service without a workload
/// bound: one job of work `n^2` at each of queues 2..k at time 0 and `n`
/// zero-work jobs at queue 1 at `tau + eps`.
pub fn unbounded_workload(k: usize, n: usize, eps: Rational, tau: Rational) -> Result<AdversarialFamily> {
    if k < 2 {
        return Err(Error::Unsupported("need k >= 2".into()));
    }
    if eps <= int(0) || tau < int(0) {
        return Err(Error::Unsupported("eps must be positive and tau non-negative".into()));
    }
    let kk = k as i128;
    let nn = n as i128;
    let p = int(nn * nn);
    let mut jobs: Vec<_> = (2..=k).map(|q| (Time::ZERO, time(p), q)).collect();
    jobs.extend((0..n).map(|_| (time(tau + eps), Time::ZERO, 1)));
    let instance = JobInstance::new(k, time(tau), jobs)?;

    let pairs = int(kk * (kk - 1) / 2);
    let online = pairs * p + int(nn * (kk - 1)) * p + tau * (int(nn * kk) + pairs);
    let offline = pairs * p + tau * (int(nn + kk - 1) + pairs) + eps * int(nn + kk - 1);
    let mut order: Vec<_> = ids(k - 1..k - 1 + n).collect();
    order.extend(ids(0..k - 1));
    Ok(AdversarialFamily {
        name: "unbounded_workload",
        params: params([("k", int(kk)), ("n", int(nn)), ("eps", eps), ("tau", tau), ("p", p)]),
        instance,
        target: PolicySpec::exhaustive(true, QueueOrder::Fcfs),
        online_bound: time(online),
        online_exact: true,
        offline_bound: time(offline),
        offline_order: order,
        limit_behavior: "ratio grows without bound in n",
    })
}

/// `l * n` unit jobs at every queue at time 0: l-limited service pays `n`
/// setups per queue where exhaustive service pays one.
pub fn limited_setups(k: usize, n: usize, l: usize, tau: Rational) -> Result<AdversarialFamily> {
    if k < 2 || n == 0 || l == 0 {
        return Err(Error::Unsupported("need k >= 2 and n, l >= 1".into()));
    }
    if tau < int(0) {
        return Err(Error::NegativeValue(format_rational(&tau)));
    }
    let per_queue = l * n;
    let jobs = (1..=k).flat_map(|q| (0..per_queue).map(move |_| (Time::ZERO, Time::from_int(1), q)));
    let instance = JobInstance::new(k, time(tau), jobs)?;

    let (kk, nn, ll) = (k as i128, n as i128, l as i128);
    let online = g(k * n * l) + tau * int(ll) * g(k * n);
    let offline = g(k * n * l) + tau * int(nn * ll) * g(k);
    Ok(AdversarialFamily {
        name: "limited_setups",
        params: params([("k", int(kk)), ("n", int(nn)), ("l", int(ll)), ("tau", tau)]),
        instance,
        target: PolicySpec::limited(l, true),
        online_bound: time(online),
        online_exact: true,
        offline_bound: time(offline),
        offline_order: ids(0..k * per_queue).collect(),
        limit_behavior: "ratio grows without bound as n and tau grow",
    })
}

/// One job of work `p` at queue 1 at time 0 and `n` zero-work jobs at
/// queue 2 at `tau`, while the longest-queue server is still busy.
pub fn longest_queue_trap(n: usize, p: Rational, tau: Rational) -> Result<AdversarialFamily> {
    if n == 0 {
        return Err(Error::Unsupported("need n >= 1".into()));
    }
    if p < int(0) || tau < int(0) {
        return Err(Error::NegativeValue("p and tau must be non-negative".into()));
    }
    let mut jobs = vec![(Time::ZERO, time(p), 1)];
    jobs.extend((0..n).map(|_| (time(tau), Time::ZERO, 2)));
    let instance = JobInstance::new(2, time(tau), jobs)?;

    let nn = int(n as i128);
    let online = tau + int(2) * nn * tau + p + nn * p;
    let offline = nn * tau + int(2) * tau + p;
    let mut order: Vec<_> = ids(1..n + 1).collect();
    order.push(JobId(0));
    Ok(AdversarialFamily {
        name: "longest_queue_trap",
        params: params([("n", nn), ("p", p), ("tau", tau)]),
        instance,
        target: PolicySpec::Slq,
        online_bound: time(online),
        online_exact: true,
        offline_bound: time(offline),
        offline_order: order,
        limit_behavior: "ratio grows without bound along n = p",
    })
}

/// Family against a static visit table.
///
/// `route` lists the queues visited up to and including the first visit to
/// the final queue. A unit job is released at the queue of visit `m` at
/// `m * (tau + 1)`, exactly when a no-skip server following the table sets
/// that queue up, and `n_k` unit jobs wait at the final queue from time 0.
/// `tau = n_k^2`.
pub fn static_route(route: &[usize], n_k: usize) -> Result<AdversarialFamily> {
    if route.len() < 2 || n_k == 0 {
        return Err(Error::Unsupported("need a route of length >= 2 and n_k >= 1".into()));
    }
    let last = *route.last().unwrap();
    if route[..route.len() - 1].contains(&last) {
        return Err(Error::Unsupported("the final queue may appear only at the end of the route".into()));
    }
    if route.contains(&0) {
        return Err(Error::Unsupported("queues are numbered from 1".into()));
    }
    if route.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Unsupported("consecutive visits to one queue".into()));
    }
    let k = *route.iter().max().unwrap();
    let visits = route.len() - 1;
    let nk = n_k as i128;
    let tau = int(nk * nk);
    let step = tau + int(1);
    let mut jobs: Vec<_> = route[..visits]
        .iter()
        .enumerate()
        .map(|(m, &q)| (time(step * int(m as i128)), Time::from_int(1), q))
        .collect();
    jobs.extend((0..n_k).map(|_| (Time::ZERO, Time::from_int(1), last)));
    let instance = JobInstance::new(k, time(tau), jobs)?;

    let mm = visits as i128;
    let visit_cost = step * g(visits);
    let online = visit_cost + int(nk) * tau * int(mm + 1) + g(n_k);
    let offline = visit_cost + int(nk) * tau + g(n_k) + int(mm) * (int(nk) + tau);
    let mut order: Vec<_> = ids(visits..visits + n_k).collect();
    order.extend(ids(0..visits));
    Ok(AdversarialFamily {
        name: "static_route",
        params: params([("k", int(k as i128)), ("n_k", int(nk)), ("visits", int(mm)), ("tau", tau)]),
        instance,
        target: PolicySpec::CyclicExhaustive {
            skip_empty: false,
            order: QueueOrder::Fcfs,
            route: Some(route.to_vec()),
            wait_rule: Default::default(),
        },
        online_bound: time(online),
        online_exact: false,
        offline_bound: time(offline),
        offline_order: order,
        limit_behavior: "ratio tends to the number of route entries as n_k grows",
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoutingClass {
    QueueLength,
    JobPriority,
}

/// Families against routing that looks only at queue lengths or only at
/// job attributes.
///
/// `QueueLength`: one job per queue at time 0, work `size` at queue 1 and
/// zero elsewhere. `JobPriority`: `size` zero-work jobs at queue `k` and one
/// at each other queue, all at time 0; arrivals at one instant are seen in
/// queue order, so a job-priority server reaches the batch last.
pub fn routing_class(kind: RoutingClass, k: usize, size: Rational, tau: Rational) -> Result<AdversarialFamily> {
    if k < 2 {
        return Err(Error::Unsupported("need k >= 2".into()));
    }
    if size < int(0) || tau < int(0) {
        return Err(Error::NegativeValue("size and tau must be non-negative".into()));
    }
    let kk = k as i128;
    let setups = tau * g(k);
    match kind {
        RoutingClass::QueueLength => {
            let mut jobs = vec![(Time::ZERO, time(size), 1)];
            jobs.extend((2..=k).map(|q| (Time::ZERO, Time::ZERO, q)));
            let instance = JobInstance::new(k, time(tau), jobs)?;
            let mut order: Vec<_> = ids(1..k).collect();
            order.push(JobId(0));
            Ok(AdversarialFamily {
                name: "queue_length",
                params: params([("k", int(kk)), ("p", size), ("tau", tau)]),
                instance,
                target: PolicySpec::Slq,
                online_bound: time(int(kk) * size + setups),
                online_exact: true,
                offline_bound: time(size + setups),
                offline_order: order,
                limit_behavior: "ratio tends to k as p grows",
            })
        }
        RoutingClass::JobPriority => {
            if size.denom() != &1 {
                return Err(Error::Unsupported("batch size must be an integer".into()));
            }
            let n = size.to_integer() as usize;
            let mut jobs: Vec<_> = (1..k).map(|q| (Time::ZERO, Time::ZERO, q)).collect();
            jobs.extend((0..n).map(|_| (Time::ZERO, Time::ZERO, k)));
            let instance = JobInstance::new(k, time(tau), jobs)?;
            let nn = int(n as i128);
            let pairs = int(kk * (kk - 1) / 2);
            let mut order: Vec<_> = ids(k - 1..k - 1 + n).collect();
            order.extend(ids(0..k - 1));
            Ok(AdversarialFamily {
                name: "job_priority",
                params: params([("k", int(kk)), ("n", nn), ("tau", tau)]),
                instance,
                target: PolicySpec::one_machine(),
                online_bound: time(tau * (nn * int(kk) + pairs)),
                online_exact: true,
                offline_bound: time(tau * (nn + int(kk - 1) + pairs)),
                offline_order: order,
                limit_behavior: "ratio tends to k as n grows",
            })
        }
    }
}

/// A single unit job at queue 1 with setup time `theta`.
pub fn single_job(theta: Rational) -> Result<AdversarialFamily> {
    if theta < int(0) {
        return Err(Error::NegativeValue(format_rational(&theta)));
    }
    let instance = JobInstance::new(2, time(theta), [(Time::ZERO, Time::from_int(1), 1)])?;
    Ok(AdversarialFamily {
        name: "single_job",
        params: params([("theta", theta)]),
        instance,
        target: PolicySpec::one_machine(),
        online_bound: time(int(2) + theta),
        online_exact: true,
        offline_bound: time(int(1) + theta),
        offline_order: vec![JobId(0)],
        limit_behavior: "ratio against the setup-free SRPT cost is 2 + theta",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::brute_force_optimal;
    use crate::engine::simulate;

    fn realize(family: &AdversarialFamily) -> Time {
        let online = simulate(family.target.instantiate(&family.instance).unwrap(), &family.instance)
            .unwrap()
            .total();
        if family.online_exact {
            assert_eq!(online, family.online_bound, "{}", family.name);
        } else {
            assert!(online >= family.online_bound, "{}", family.name);
        }
        let offline = family.constructed().unwrap().total;
        assert!(offline <= family.offline_bound, "{}", family.name);
        online
    }

    fn r(n: i128) -> Rational {
        int(n)
    }

    #[test]
    fn cyclic_tightness_values() {
        let f = cyclic_tightness(3, r(1), 200, rational(1, 2)).unwrap();
        assert_eq!(f.online_bound, Time::from_int(32_260_706));
        assert_eq!(f.offline_bound, Time::from_int(8_260_807));
        assert!(f.bound_ratio().unwrap() > rational(39, 10));
        realize(&f);
        assert_eq!(f.constructed().unwrap().total, f.offline_bound);
    }

    #[test]
    fn cyclic_tightness_regime_guard() {
        assert!(matches!(cyclic_tightness(2, r(3), 5, rational(1, 2)), Err(Error::ParamsViolateRegime(_))));
        let f = cyclic_tightness(3, rational(5, 2), 4, rational(1, 2)).unwrap();
        realize(&f);
    }

    #[test]
    fn cyclic_tightness_small_against_brute_force() {
        let f = cyclic_tightness(2, r(1), 1, rational(1, 2)).unwrap();
        let online = realize(&f);
        let opt = brute_force_optimal(&f.instance, 10).unwrap().total;
        assert!(opt <= f.offline_bound);
        assert!(online >= opt && online.value() <= opt.value() * r(3));
    }

    #[test]
    fn cyclic_tightness_offline_decreases_with_eps() {
        let a = cyclic_tightness(3, r(1), 10, rational(1, 2)).unwrap().offline_bound;
        let b = cyclic_tightness(3, r(1), 10, rational(1, 4)).unwrap().offline_bound;
        assert!(b < a);
    }

    #[test]
    fn unbounded_workload_values() {
        let f = unbounded_workload(2, 10, rational(1, 2), r(1)).unwrap();
        assert_eq!(f.online_bound, Time::from_int(1121));
        assert_eq!(f.offline_bound, Time::from_ratio(235, 2));
        realize(&f);
        let mut last = f.bound_ratio().unwrap();
        for n in [20, 100] {
            let next = unbounded_workload(2, n, rational(1, 2), r(1)).unwrap().bound_ratio().unwrap();
            assert!(next > last);
            last = next;
        }
        realize(&unbounded_workload(4, 3, rational(1, 3), r(2)).unwrap());
        let empty = unbounded_workload(3, 0, rational(1, 2), r(1)).unwrap();
        assert_eq!(empty.instance.n(), 2);
        realize(&empty);
    }

    #[test]
    fn limited_setups_values() {
        let f = limited_setups(2, 2, 1, r(1)).unwrap();
        assert_eq!((f.online_bound, f.offline_bound), (Time::from_int(20), Time::from_int(16)));
        realize(&f);
        for (k, n, l, tau) in [(3, 2, 1, 2), (2, 3, 2, 1), (4, 1, 3, 3)] {
            realize(&limited_setups(k, n, l, r(tau)).unwrap());
        }
        let flat = limited_setups(3, 2, 2, r(0)).unwrap();
        assert_eq!(flat.online_bound, flat.offline_bound);
    }

    #[test]
    fn longest_queue_trap_values() {
        let f = longest_queue_trap(2, r(3), r(1)).unwrap();
        assert_eq!((f.online_bound, f.offline_bound), (Time::from_int(14), Time::from_int(7)));
        realize(&f);
        let f = longest_queue_trap(10, r(10), r(1)).unwrap();
        assert_eq!((f.online_bound, f.offline_bound), (Time::from_int(131), Time::from_int(22)));
        realize(&f);
        let d = longest_queue_trap(1, r(0), r(4)).unwrap();
        assert_eq!(d.bound_ratio(), Some(r(1)));
        realize(&d);
    }

    #[test]
    fn static_route_values() {
        let cyclic = static_route(&[1, 2, 3], 50).unwrap();
        realize(&cyclic);
        assert_eq!(cyclic.constructed().unwrap().total, cyclic.offline_bound);
        assert!(cyclic.bound_ratio().unwrap() > rational(27, 10));
        let doubled = static_route(&[1, 2, 1, 3], 50).unwrap();
        realize(&doubled);
        assert!(doubled.bound_ratio() > cyclic.bound_ratio());
        let two = static_route(&[1, 2], 200).unwrap();
        realize(&two);
        assert!(two.bound_ratio().unwrap() > rational(19, 10));
        assert!(static_route(&[1, 2, 1], 5).is_err());
    }

    #[test]
    fn routing_class_values() {
        let f = routing_class(RoutingClass::QueueLength, 2, r(10), r(1)).unwrap();
        assert_eq!((f.online_bound, f.offline_bound), (Time::from_int(23), Time::from_int(13)));
        realize(&f);
        let f = routing_class(RoutingClass::JobPriority, 2, r(10), r(1)).unwrap();
        assert_eq!((f.online_bound, f.offline_bound), (Time::from_int(21), Time::from_int(12)));
        realize(&f);
        let f = routing_class(RoutingClass::JobPriority, 4, r(5), r(2)).unwrap();
        realize(&f);
        let gipp = simulate(PolicySpec::gipp().instantiate(&f.instance).unwrap(), &f.instance).unwrap();
        assert_eq!(gipp.total(), f.online_bound);
        let big = routing_class(RoutingClass::QueueLength, 3, r(10_000), r(1)).unwrap();
        assert!(big.bound_ratio().unwrap() > rational(29, 10));
    }

    #[test]
    fn single_job_values() {
        for theta in [r(0), r(2), rational(7, 2)] {
            let f = single_job(theta).unwrap();
            realize(&f);
            assert_eq!(crate::benchmarks::srpt_reduced(&f.instance).total, Time::from_int(1));
        }
    }

    #[test]
    fn sidecar_has_bounds() {
        let f = longest_queue_trap(2, r(3), r(1)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&f.sidecar_json().unwrap()).unwrap();
        assert_eq!(v["online_bound"], "14/1");
        assert_eq!(v["offline_total"], "7/1");
    }
}
