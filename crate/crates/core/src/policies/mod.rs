//! Online polling policies and their serializable specifications.

pub mod cyclic;
pub mod follower;
pub mod mixed;
pub mod scripted;
pub mod slq;
pub mod srpt_following;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub use cyclic::{Cyclic, Discipline, QueueOrder};
pub use follower::{Follower, Transform};
pub use mixed::Mixed;
pub use scripted::ScriptedOrder;
pub use slq::LongestQueue;
pub use srpt_following::{gittins_index, GittinsIndex, Selection, SrptFollowing};

use crate::engine::Policy;
use crate::error::{Error, Result};
use crate::instance::{Bound, InstanceParams, JobInstance, QueueId};
use crate::time::{serde_rational, Rational, Time};

/// What a cyclic server does while staying at a queue with nothing to
/// serve. Only the no-wait rule is implemented.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaitRule {
    #[default]
    NoWait,
}

fn yes() -> bool {
    true
}

/// Serializable policy selection, e.g. `{"family":"gipp"}` or
/// `{"family":"l_limited","l":3,"skip_empty":true}`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PolicySpec {
    CyclicExhaustive {
        #[serde(default = "yes")]
        skip_empty: bool,
        #[serde(default)]
        order: QueueOrder,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        route: Option<Vec<usize>>,
        #[serde(default)]
        wait_rule: WaitRule,
    },
    CyclicGated {
        #[serde(default = "yes")]
        skip_empty: bool,
        #[serde(default)]
        order: QueueOrder,
        #[serde(default)]
        wait_rule: WaitRule,
    },
    LLimited {
        l: usize,
        #[serde(default = "yes")]
        skip_empty: bool,
        #[serde(default)]
        order: QueueOrder,
    },
    Slq,
    OneMachine {
        #[serde(default)]
        clearing: bool,
    },
    Gipp {
        #[serde(default)]
        clearing: bool,
    },
    /// Virtual preemptive SRPT with jobs committed at virtual completion;
    /// the natural base for setup-transform followers.
    SrptOrder,
    Mixed {
        #[serde(with = "serde_rational")]
        eta: Rational,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p_min: Option<Time>,
    },
    Follower {
        transform: Transform,
        base: Box<PolicySpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p_min: Option<Time>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p_max: Option<Time>,
    },
}

impl PolicySpec {
    pub fn exhaustive(skip_empty: bool, order: QueueOrder) -> Self {
        PolicySpec::CyclicExhaustive {
            skip_empty,
            order,
            route: None,
            wait_rule: WaitRule::NoWait,
        }
    }

    pub fn gated(skip_empty: bool, order: QueueOrder) -> Self {
        PolicySpec::CyclicGated {
            skip_empty,
            order,
            wait_rule: WaitRule::NoWait,
        }
    }

    pub fn limited(l: usize, skip_empty: bool) -> Self {
        PolicySpec::LLimited {
            l,
            skip_empty,
            order: QueueOrder::Fcfs,
        }
    }

    pub fn one_machine() -> Self {
        PolicySpec::OneMachine { clearing: false }
    }

    pub fn gipp() -> Self {
        PolicySpec::Gipp { clearing: false }
    }

    pub fn mixed(eta: Rational) -> Self {
        PolicySpec::Mixed { eta, p_min: None }
    }

    pub fn follower(transform: Transform, base: PolicySpec) -> Self {
        PolicySpec::Follower {
            transform,
            base: Box::new(base),
            p_min: None,
            p_max: None,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: PolicySpec = serde_json::from_str(s)?;
        spec.check()?;
        Ok(spec)
    }

    /// Compact canonical JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("policy spec serializes")
    }

    /// Parameter checks that do not depend on an instance.
    pub fn check(&self) -> Result<()> {
        match self {
            PolicySpec::LLimited { l: 0, .. } => Err(Error::InvalidPolicy("l must be at least 1".into())),
            PolicySpec::CyclicExhaustive { route: Some(r), .. } if r.is_empty() => {
                Err(Error::InvalidPolicy("visit table must not be empty".into()))
            }
            PolicySpec::Mixed { eta, .. } if *eta <= Rational::zero() => {
                Err(Error::InvalidPolicy("eta must be positive".into()))
            }
            PolicySpec::Follower { base, .. } => match **base {
                PolicySpec::Mixed { .. } | PolicySpec::Follower { .. } => Err(Error::InvalidPolicy(
                    "follower base must be a cyclic, limited, longest-queue or SRPT-driven policy".into(),
                )),
                _ => base.check(),
            },
            _ => Ok(()),
        }
    }

    /// Short human-readable name.
    pub fn label(&self) -> String {
        let order = |o: &QueueOrder| match o {
            QueueOrder::Fcfs => "fcfs",
            QueueOrder::Spt => "spt",
        };
        match self {
            PolicySpec::CyclicExhaustive { skip_empty, order: o, route, .. } => {
                let name = if *skip_empty { "exhaustive" } else { "exhaustive-noskip" };
                match route {
                    Some(r) => format!("{name}-{}-route{r:?}", order(o)),
                    None => format!("{name}-{}", order(o)),
                }
            }
            PolicySpec::CyclicGated { skip_empty, order: o, .. } => {
                format!("{}-{}", if *skip_empty { "gated" } else { "gated-noskip" }, order(o))
            }
            PolicySpec::LLimited { l, skip_empty, order: o } => {
                format!("limited{l}-{}-{}", if *skip_empty { "skip" } else { "noskip" }, order(o))
            }
            PolicySpec::Slq => "slq".into(),
            PolicySpec::OneMachine { clearing } => if *clearing { "one-machine-clearing" } else { "one-machine" }.into(),
            PolicySpec::Gipp { clearing } => if *clearing { "gipp-clearing" } else { "gipp" }.into(),
            PolicySpec::SrptOrder => "srpt-order".into(),
            PolicySpec::Mixed { eta, .. } => format!("mixed-eta{}/{}", eta.numer(), eta.denom()),
            PolicySpec::Follower { transform, base, .. } => {
                let t = serde_json::to_value(transform).expect("transform serializes");
                format!("follow-{}-{}", t.as_str().unwrap_or("?"), base.label())
            }
        }
    }

    /// Never idles while jobs are waiting, and every setup it starts is
    /// followed by a service at that queue.
    pub fn work_conserving(&self) -> bool {
        match self {
            PolicySpec::CyclicExhaustive { skip_empty, route, .. } => *skip_empty && route.is_none(),
            PolicySpec::CyclicGated { skip_empty, .. } | PolicySpec::LLimited { skip_empty, .. } => *skip_empty,
            PolicySpec::Slq => true,
            PolicySpec::OneMachine { clearing } | PolicySpec::Gipp { clearing } => *clearing,
            _ => false,
        }
    }

    /// Cyclic exhaustive or gated service over `1..=k`, with or without
    /// skipping.
    pub fn is_round_robin(&self) -> bool {
        matches!(
            self,
            PolicySpec::CyclicExhaustive { route: None, .. } | PolicySpec::CyclicGated { .. }
        )
    }

    /// Builds the policy for `instance`, taking `p_min`/`p_max` from the
    /// instance where the policy leaves them open.
    pub fn instantiate(&self, instance: &JobInstance) -> Result<Box<dyn Policy>> {
        self.build(instance.k, instance.tau, &instance.params())
    }

    pub fn build(&self, k: usize, tau: Time, params: &InstanceParams) -> Result<Box<dyn Policy>> {
        self.check()?;
        Ok(match self {
            PolicySpec::CyclicExhaustive { skip_empty, order, route, .. } => match route {
                None => Box::new(Cyclic::exhaustive(*skip_empty, *order, k)),
                Some(r) => {
                    if let Some(&bad) = r.iter().find(|&&q| q == 0 || q > k) {
                        return Err(Error::InvalidPolicy(format!("visit table names queue {bad}, but k = {k}")));
                    }
                    let route = r.iter().map(|&q| QueueId(q)).collect();
                    Box::new(Cyclic::with_route(Discipline::Exhaustive, *skip_empty, *order, route))
                }
            },
            PolicySpec::CyclicGated { skip_empty, order, .. } => {
                Box::new(Cyclic::new(Discipline::Gated, *skip_empty, *order, k))
            }
            PolicySpec::LLimited { l, skip_empty, order } => {
                Box::new(Cyclic::new(Discipline::Limited(*l), *skip_empty, *order, k))
            }
            PolicySpec::Slq => Box::new(LongestQueue),
            PolicySpec::OneMachine { clearing } => Box::new(SrptFollowing::new(Selection::EligibilityOrder, *clearing)),
            PolicySpec::Gipp { clearing } => Box::new(SrptFollowing::new(Selection::GittinsIndex, *clearing)),
            PolicySpec::SrptOrder => Box::new(SrptFollowing::one_machine()),
            PolicySpec::Mixed { eta, p_min } => Box::new(Mixed::new(*eta, p_min.unwrap_or(params.p_min), k)),
            PolicySpec::Follower {
                transform,
                base,
                p_min,
                p_max,
            } => {
                if *transform == Transform::WorkloadAugmented && p_max.is_none() && params.gamma == Bound::Unbounded {
                    return Err(Error::UnboundedTransform);
                }
                let p_min = p_min.unwrap_or(params.p_min);
                let p_max = p_max.unwrap_or(params.p_max);
                match **base {
                    PolicySpec::SrptOrder => Box::new(Follower::srpt(*transform, tau, p_min, p_max)),
                    _ => {
                        let vtau = transform.virtual_tau(tau);
                        let base = base.build(k, vtau, params)?;
                        Box::new(Follower::engine(*transform, base, k, tau, p_min, p_max))
                    }
                }
            }
        })
    }
}

/// The default set of policies exercised by `run` and the property suites.
pub fn catalog() -> Vec<PolicySpec> {
    let mut specs = Vec::new();
    for skip in [true, false] {
        for order in [QueueOrder::Fcfs, QueueOrder::Spt] {
            specs.push(PolicySpec::exhaustive(skip, order));
            specs.push(PolicySpec::gated(skip, order));
        }
    }
    for l in [1, 2] {
        for skip in [true, false] {
            specs.push(PolicySpec::limited(l, skip));
        }
    }
    specs.push(PolicySpec::Slq);
    specs.push(PolicySpec::one_machine());
    specs.push(PolicySpec::gipp());
    specs.push(PolicySpec::OneMachine { clearing: true });
    specs.push(PolicySpec::Gipp { clearing: true });
    specs.push(PolicySpec::mixed(crate::time::int(2)));
    for transform in [Transform::WorkloadReduced, Transform::WorkloadAugmented] {
        specs.push(PolicySpec::follower(transform, PolicySpec::exhaustive(true, QueueOrder::Fcfs)));
    }
    for transform in [Transform::SetupReduced, Transform::SetupAugmented] {
        specs.push(PolicySpec::follower(transform, PolicySpec::SrptOrder));
    }
    specs
}
