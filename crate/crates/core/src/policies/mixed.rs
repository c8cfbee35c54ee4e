//! Cyclic service for small jobs, switching to Gittins-index service once a
//! large job shows up.

use crate::engine::{Activity, Cause, DecisionContext, Policy, PolicyAction};
use crate::policies::cyclic::{Cyclic, QueueOrder};
use crate::policies::srpt_following::{Selection, SrptFollowing};
use crate::time::{Rational, Time};

/// Runs exhaustive skip-empty cyclic service (shortest job first within a
/// queue) until a job with work above `eta * p_min` arrives. At that point
/// a job in service is finished, a setup in progress is abandoned, and
/// Gittins-index service takes over, with its virtual SRPT run starting at
/// the trigger instant and holding every waiting job. Once the system is
/// empty again, cyclic service resumes.
#[derive(Clone, Debug)]
pub struct Mixed {
    threshold: Rational,
    base: Cyclic,
    large_phase: Option<SrptFollowing>,
}

impl Mixed {
    pub fn new(eta: Rational, p_min: Time, k: usize) -> Self {
        Mixed {
            threshold: eta * p_min.value(),
            base: Cyclic::exhaustive(true, QueueOrder::Spt, k),
            large_phase: None,
        }
    }

    pub fn in_large_phase(&self) -> bool {
        self.large_phase.is_some()
    }
}

impl Policy for Mixed {
    fn decide(&mut self, ctx: &DecisionContext<'_>) -> PolicyAction {
        if let Some(phase) = self.large_phase.as_mut() {
            if !ctx.system_empty() {
                return phase.decide(ctx);
            }
            self.large_phase = None;
        }
        if let Cause::Arrival(id) = ctx.cause {
            let large = ctx.job(id).is_some_and(|j| j.work.value() > self.threshold);
            if large {
                let backlog = ctx.all_waiting().copied();
                let mut phase = SrptFollowing::with_backlog(Selection::GittinsIndex, ctx.clock, backlog);
                if let Activity::Setting { .. } = ctx.server.activity {
                    self.large_phase = Some(phase);
                    return PolicyAction::AbortSetupAndStay;
                }
                let action = phase.decide(ctx);
                self.large_phase = Some(phase);
                return action;
            }
        }
        self.base.decide(ctx)
    }
}

/// Expected ratio bound `kappa(eta) mu^n + (theta + 2)(1 - mu^n)` for a
/// threshold `eta`, where `mu` is the probability that a job's work is at
/// most `eta * p_min` and `kappa(eta) = max(3/2 eta, k + 1)`.
pub fn expected_ratio_bound(eta: f64, k: usize, theta: f64, mu: f64, n: usize) -> f64 {
    let kappa = (1.5 * eta).max(k as f64 + 1.0);
    let all_small = mu.powi(n as i32);
    kappa * all_small + (theta + 2.0) * (1.0 - all_small)
}

/// Grid search for the threshold minimizing [`expected_ratio_bound`] over
/// `[2/3 (k+1), min(2/3 (theta+2), theta)]`; the lowest minimizer wins.
/// Falls back to `2/3 (k+1)` when that interval is empty.
pub fn optimal_eta(k: usize, theta: Rational, n: usize, mu: impl Fn(Rational) -> f64, steps: u32) -> Rational {
    let lo = Rational::new(2 * (k as i128 + 1), 3);
    let hi = std::cmp::min(Rational::new(2, 3) * (theta + 2), theta);
    if hi <= lo || steps == 0 {
        return lo;
    }
    let theta_f = crate::time::to_f64(&theta);
    let score = |eta: Rational| expected_ratio_bound(crate::time::to_f64(&eta), k, theta_f, mu(eta), n);
    let mut best = (lo, score(lo));
    for i in 1..=steps {
        let eta = lo + (hi - lo) * Rational::new(i as i128, steps as i128);
        let value = score(eta);
        if value < best.1 {
            best = (eta, value);
        }
    }
    best.0
}
