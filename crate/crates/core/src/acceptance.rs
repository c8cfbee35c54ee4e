//! The acceptance checks, runnable from tests and from the command line.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::adversary::{cyclic_tightness, limited_setups, longest_queue_trap, single_job};
use crate::benchmarks::{brute_force_optimal, exhaustive_optimal, round_robin_ratio, srpt_reduced};
use crate::engine::simulate;
use crate::error::{Error, Result};
use crate::generate::{random_instance, RandomSpec};
use crate::instance::JobInstance;
use crate::policies::mixed::expected_ratio_bound;
use crate::policies::{catalog, PolicySpec, QueueOrder};
use crate::time::{format_rational, int, rational, to_f64, Rational, Time};
use crate::trace::check_trace;

pub const SUITE_SIZE: usize = 500;
pub const UNIT_SUITE_SIZE: usize = 240;
pub const CLEARING_SUITE_SIZE: usize = 200;
pub const MIXED_TRIALS: usize = 500;

#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2} {verdict} {}: {}", self.id, self.title, self.detail)
    }
}

fn outcome(id: u8, title: &'static str, failures: &[String], detail: String) -> CriterionOutcome {
    let mut detail = detail;
    if let Some(first) = failures.first() {
        detail = format!("{detail}; {} failure(s), first: {first}", failures.len());
    }
    CriterionOutcome { id, title, passed: failures.is_empty(), detail }
}

/// One random instance with its optimum, SRPT bound and every policy total.
#[derive(Clone, Debug)]
pub struct SuiteCase {
    pub seed: u64,
    pub instance: JobInstance,
    pub optimal: Time,
    pub srpt: Time,
    pub totals: Vec<(PolicySpec, Time)>,
    pub errors: Vec<String>,
}

/// Parameters of suite member `seed`: sizes 1..=8, two or three queues,
/// setup 0..=2 and works 0..=4, cycling so every combination appears.
pub fn suite_spec(seed: u64) -> RandomSpec {
    let n = 1 + (seed % 8) as usize;
    RandomSpec {
        seed,
        n,
        k: 2 + ((seed / 8) % 2) as usize,
        tau: (seed / 16) % 3,
        release_max: 2 * n as u64,
        work_min: 0,
        work_max: 4,
    }
}

fn run_case(seed: u64, instance: JobInstance) -> Result<SuiteCase> {
    let optimal = brute_force_optimal(&instance, 8)?.total;
    let srpt = srpt_reduced(&instance).total;
    let mut totals = Vec::new();
    let mut errors = Vec::new();
    for spec in catalog() {
        let policy = match spec.instantiate(&instance) {
            Ok(p) => p,
            Err(Error::UnboundedTransform) => continue,
            Err(e) => return Err(e),
        };
        match simulate(policy, &instance) {
            Ok(trace) => match check_trace(&trace, &instance) {
                Ok(()) => totals.push((spec, trace.total())),
                Err(e) => errors.push(format!("seed {seed} {}: illegal trace: {e}", spec.label())),
            },
            Err(e) => errors.push(format!("seed {seed} {}: {e}", spec.label())),
        }
    }
    Ok(SuiteCase { seed, instance, optimal, srpt, totals, errors })
}

pub fn random_suite(count: usize) -> Result<Vec<SuiteCase>> {
    (0..count as u64)
        .into_par_iter()
        .map(|seed| run_case(seed, random_instance(&suite_spec(seed))?))
        .collect()
}

/// Clearing instances (every release at zero) for the SRPT comparison.
pub fn clearing_suite(count: usize) -> Result<Vec<SuiteCase>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let seed = 1_000_000 + i;
            let spec = RandomSpec { release_max: 0, ..suite_spec(i) };
            run_case(seed, random_instance(&RandomSpec { seed, ..spec })?)
        })
        .collect()
}

pub fn oracle_dominance(suite: &[SuiteCase]) -> CriterionOutcome {
    let mut failures = Vec::new();
    let mut runs = 0;
    for case in suite {
        failures.extend(case.errors.iter().cloned());
        if case.srpt > case.optimal {
            failures.push(format!("seed {}: srpt {} above optimum {}", case.seed, case.srpt, case.optimal));
        }
        for (spec, total) in &case.totals {
            runs += 1;
            if *total < case.optimal {
                failures.push(format!("seed {} {}: {} below optimum {}", case.seed, spec.label(), total, case.optimal));
            }
        }
    }
    outcome(
        1,
        "oracle dominance",
        &failures,
        format!("{} instances, {runs} policy runs", suite.len()),
    )
}

pub fn limited_exactness() -> CriterionOutcome {
    let mut failures = Vec::new();
    let mut checked = Vec::new();
    for (k, n, l, tau) in [(2, 2, 1, 1), (3, 2, 1, 2), (2, 3, 2, 1), (4, 1, 3, 3)] {
        let family = match limited_setups(k, n, l, int(tau)) {
            Ok(f) => f,
            Err(e) => {
                failures.push(e.to_string());
                continue;
            }
        };
        let limited = simulate_spec(&family.target, &family.instance);
        let exhaustive = simulate_spec(&PolicySpec::exhaustive(true, QueueOrder::Fcfs), &family.instance);
        match (limited, exhaustive) {
            (Ok(a), Ok(b)) => {
                if a != family.online_bound || b != family.offline_bound {
                    failures.push(format!(
                        "(k={k},n={n},l={l},tau={tau}): got {a} / {b}, closed forms {} / {}",
                        family.online_bound, family.offline_bound
                    ));
                }
                checked.push(format!("{a} vs {b}"));
            }
            (Err(e), _) | (_, Err(e)) => failures.push(e.to_string()),
        }
    }
    outcome(2, "limited service closed forms", &failures, checked.join(", "))
}

fn simulate_spec(spec: &PolicySpec, instance: &JobInstance) -> Result<Time> {
    Ok(simulate(spec.instantiate(instance)?, instance)?.total())
}

pub fn longest_queue_divergence() -> CriterionOutcome {
    let mut failures = Vec::new();
    let mut detail = String::new();
    let check = |n: usize, p: i128, failures: &mut Vec<String>| -> Option<Rational> {
        let family = longest_queue_trap(n, int(p), int(1)).map_err(|e| failures.push(e.to_string())).ok()?;
        let online = simulate_spec(&family.target, &family.instance).map_err(|e| failures.push(e.to_string())).ok()?;
        let offline = family.constructed().map_err(|e| failures.push(e.to_string())).ok()?.total;
        if online != family.online_bound || offline != family.offline_bound {
            failures.push(format!(
                "n={n}, p={p}: got {online} vs {offline}, closed forms {} vs {}",
                family.online_bound, family.offline_bound
            ));
        }
        Some(online.value() / offline.value())
    };
    if let Some(r) = check(2, 3, &mut failures) {
        if r != int(2) {
            failures.push(format!("small case ratio {} instead of 2", format_rational(&r)));
        }
        detail.push_str("14 vs 7");
    }
    let ratios: Vec<_> = [10, 100, 1000].iter().filter_map(|&n| check(n, n as i128, &mut failures)).collect();
    if ratios.len() == 3 && !ratios.windows(2).all(|w| w[0] < w[1]) {
        failures.push("ratio not increasing along n = p".into());
    }
    let shown: Vec<_> = ratios.iter().map(|r| format!("{:.3}", to_f64(r))).collect();
    outcome(
        3,
        "longest-queue divergence",
        &failures,
        format!("{detail}; ratios along n = p: {}", shown.join(" < ")),
    )
}

pub fn single_job_tightness() -> CriterionOutcome {
    let mut failures = Vec::new();
    let thetas = [int(0), int(1), int(2), rational(7, 2)];
    for theta in thetas {
        let family = match single_job(theta) {
            Ok(f) => f,
            Err(e) => {
                failures.push(e.to_string());
                continue;
            }
        };
        let benchmark = srpt_reduced(&family.instance).total;
        for spec in [PolicySpec::one_machine(), PolicySpec::gipp()] {
            match simulate_spec(&spec, &family.instance) {
                Ok(total) => {
                    let ratio = total.value() / benchmark.value();
                    if ratio != theta + int(2) {
                        failures.push(format!("{} at theta {}: ratio {}", spec.label(), format_rational(&theta), format_rational(&ratio)));
                    }
                }
                Err(e) => failures.push(e.to_string()),
            }
        }
    }
    outcome(4, "single-job tightness", &failures, "ratio 2 + theta for theta in {0, 1, 2, 7/2}".into())
}

pub fn round_robin_bound(suite: &[SuiteCase]) -> CriterionOutcome {
    let mut failures = Vec::new();
    let mut checked = [0usize; 2];
    for (slot, gamma) in [int(1), int(2)].into_iter().enumerate() {
        for case in suite {
            if !case.instance.params().gamma.at_most(gamma) {
                continue;
            }
            checked[slot] += 1;
            let kappa = round_robin_ratio(gamma, case.instance.k);
            for (spec, total) in case.totals.iter().filter(|(s, _)| s.is_round_robin()) {
                if total.value() > kappa * case.optimal.value() {
                    failures.push(format!(
                        "seed {} {}: {} above {} x {}",
                        case.seed,
                        spec.label(),
                        total,
                        format_rational(&kappa),
                        case.optimal
                    ));
                }
            }
        }
    }
    outcome(
        5,
        "cyclic service bound",
        &failures,
        format!("{} instances with gamma <= 1, {} with gamma <= 2", checked[0], checked[1]),
    )
}

pub fn cyclic_tightness_at_scale() -> CriterionOutcome {
    let start = Instant::now();
    let result = (|| -> Result<Rational> {
        let family = cyclic_tightness(3, int(1), 200, rational(1, 2))?;
        let online = simulate_spec(&family.target, &family.instance)?;
        let offline = family.constructed()?.total;
        Ok(online.value() / offline.value())
    })();
    let elapsed = start.elapsed();
    let mut failures = Vec::new();
    let detail = match result {
        Ok(r) => {
            if r <= rational(39, 10) {
                failures.push(format!("ratio {:.4} not above 3.9", to_f64(&r)));
            }
            format!("ratio {:.4} in {:.2?}", to_f64(&r), elapsed)
        }
        Err(e) => {
            failures.push(e.to_string());
            String::new()
        }
    };
    if elapsed.as_secs_f64() >= 10.0 {
        failures.push(format!("took {elapsed:.2?}"));
    }
    outcome(6, "cyclic tightness at scale", &failures, detail)
}

/// Unit-work instances for the exhaustive-order comparison.
pub fn unit_spec(seed: u64) -> RandomSpec {
    let n = 1 + (seed % 8) as usize;
    RandomSpec {
        seed: 2_000_000 + seed,
        n,
        k: 2 + ((seed / 8) % 2) as usize,
        tau: (seed / 16) % 4,
        release_max: 2 * n as u64,
        work_min: 1,
        work_max: 1,
    }
}

pub fn exhaustive_suffices(count: usize) -> CriterionOutcome {
    let failures: Vec<String> = (0..count as u64)
        .into_par_iter()
        .filter_map(|seed| {
            let check = || -> Result<Option<String>> {
                let instance = random_instance(&unit_spec(seed))?;
                let all = brute_force_optimal(&instance, 8)?.total;
                let exhaustive = exhaustive_optimal(&instance, 8)?.total;
                Ok((all != exhaustive).then(|| format!("seed {seed}: optimum {all}, exhaustive orders {exhaustive}")))
            };
            check().unwrap_or_else(|e| Some(e.to_string()))
        })
        .collect();
    outcome(7, "exhaustive orders suffice for unit work", &failures, format!("{count} instances"))
}

pub fn work_conserving_bounds(suite: &[SuiteCase], clearing: &[SuiteCase]) -> CriterionOutcome {
    let mut failures = Vec::new();
    let mut bounded = 0;
    for case in suite {
        let params = case.instance.params();
        let (Some(gamma), Some(theta)) = (params.gamma.finite(), params.theta.finite()) else {
            continue;
        };
        bounded += 1;
        for (spec, total) in case.totals.iter().filter(|(s, _)| s.work_conserving()) {
            if total.value() > (gamma + theta) * case.optimal.value() {
                failures.push(format!("seed {} {}: {} above (gamma + theta) x {}", case.seed, spec.label(), total, case.optimal));
            }
        }
    }
    let mut cleared = 0;
    for case in suite.iter().chain(clearing).filter(|c| c.instance.is_clearing()) {
        let Some(theta) = case.instance.params().theta.finite() else {
            continue;
        };
        cleared += 1;
        let clearing_variant = |s: &PolicySpec| {
            matches!(s, PolicySpec::OneMachine { clearing: true } | PolicySpec::Gipp { clearing: true })
        };
        for (spec, total) in case.totals.iter().filter(|(s, _)| clearing_variant(s)) {
            if total.value() > (theta + int(1)) * case.srpt.value() {
                failures.push(format!("seed {} {}: {} above (1 + theta) x srpt {}", case.seed, spec.label(), total, case.srpt));
            }
        }
    }
    outcome(
        8,
        "work-conserving and clearing bounds",
        &failures,
        format!("{bounded} bounded instances, {cleared} clearing instances"),
    )
}

/// Trial instance for the mixed-policy experiment: ten jobs over two
/// queues, setup 2, releases in 0..=10, work 1 or 2 with probability 0.9
/// and 3..=6 otherwise.
pub fn mixed_trial(seed: u64) -> Result<JobInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(3_000_000 + seed);
    let jobs: Vec<_> = (0..10)
        .map(|_| {
            let release = rng.random_range(0..=10u64);
            let work = if rng.random_bool(0.9) { rng.random_range(1..=2u64) } else { rng.random_range(3..=6u64) };
            let queue = rng.random_range(1..=2usize);
            (Time::from_int(release), Time::from_int(work), queue)
        })
        .collect();
    JobInstance::new(2, Time::from_int(2), jobs)
}

pub fn mixed_expected_ratio(trials: usize) -> CriterionOutcome {
    let start = Instant::now();
    let spec = PolicySpec::Mixed { eta: int(2), p_min: Some(Time::from_int(1)) };
    let ratios: Result<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|seed| {
            let instance = mixed_trial(seed)?;
            let optimal = brute_force_optimal(&instance, 10)?.total;
            let total = simulate_spec(&spec, &instance)?;
            Ok(to_f64(&(total.value() / optimal.value())))
        })
        .collect();
    let nu = expected_ratio_bound(2.0, 2, 2.0, 0.9, 10);
    let mut failures = Vec::new();
    let detail = match ratios {
        Ok(r) => {
            let mean = r.iter().sum::<f64>() / r.len().max(1) as f64;
            if mean > nu + 0.05 {
                failures.push(format!("mean {mean:.4} above {nu:.4} + 0.05"));
            }
            format!("mean ratio {mean:.4} vs bound {nu:.4} over {trials} trials in {:.2?}", start.elapsed())
        }
        Err(e) => {
            failures.push(e.to_string());
            String::new()
        }
    };
    outcome(9, "mixed policy expected ratio", &failures, detail)
}

/// Criteria 1 to 9. Determinism of the command-line outputs is checked by
/// the command-line crate.
pub fn run_all() -> Result<Vec<CriterionOutcome>> {
    let suite = random_suite(SUITE_SIZE)?;
    let clearing = clearing_suite(CLEARING_SUITE_SIZE)?;
    Ok(vec![
        oracle_dominance(&suite),
        limited_exactness(),
        longest_queue_divergence(),
        single_job_tightness(),
        round_robin_bound(&suite),
        cyclic_tightness_at_scale(),
        exhaustive_suffices(UNIT_SUITE_SIZE),
        work_conserving_bounds(&suite, &clearing),
        mixed_expected_ratio(MIXED_TRIALS),
    ])
}
