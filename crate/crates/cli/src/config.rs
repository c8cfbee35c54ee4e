use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use pollbench_core::adversary::{
    cyclic_tightness, limited_setups, longest_queue_trap, routing_class, single_job, static_route, unbounded_workload,
    AdversarialFamily, RoutingClass,
};
use pollbench_core::time::{int, parse_rational, rational, Rational};
use pollbench_core::{random_instance, JobInstance, PolicySpec, RandomSpec};
use serde::{Deserialize, Serialize};

pub const FAMILIES: &[&str] = &[
    "cyclic-tightness",
    "unbounded-workload",
    "limited-setups",
    "longest-queue",
    "static-route",
    "queue-length",
    "job-priority",
    "single-job",
    "random",
];

/// Where the instance of an experiment comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSource {
    File {
        path: PathBuf,
    },
    /// A named generator; parameter values are strings such as `"3"`,
    /// `"1/2"` or `"1,2,3"`.
    Family {
        family: String,
        #[serde(default)]
        params: BTreeMap<String, String>,
    },
    Random(RandomSpec),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkChoice {
    Srpt,
    #[default]
    Brute,
    Constructed,
}

/// Parameters that take each value of the sweep together.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub parameters: Vec<String>,
    pub values: Vec<String>,
}

fn default_max_n() -> usize {
    pollbench_core::benchmarks::DEFAULT_MAX_N
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub source: InstanceSource,
    /// Empty means the full policy catalog.
    #[serde(default)]
    pub policies: Vec<PolicySpec>,
    #[serde(default)]
    pub benchmark: BenchmarkChoice,
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxis>,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(s).context("invalid experiment config")?;
        for spec in &config.policies {
            spec.check()?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn policy_list(&self) -> Vec<PolicySpec> {
        if self.policies.is_empty() {
            pollbench_core::catalog()
        } else {
            self.policies.clone()
        }
    }
}

/// A resolved instance, with its family when it came from a generator.
pub struct Loaded {
    pub id: String,
    pub instance: JobInstance,
    pub family: Option<AdversarialFamily>,
}

/// Path of the bounds file that accompanies an instance file.
pub fn bounds_path(instance_path: &Path) -> PathBuf {
    instance_path.with_extension("bounds.json")
}

impl InstanceSource {
    pub fn load(&self) -> Result<Loaded> {
        match self {
            InstanceSource::File { path } => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let instance = JobInstance::from_json(&text)?;
                let id = path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned());
                Ok(Loaded { id, instance, family: None })
            }
            InstanceSource::Family { family, params } => generate(family, params),
            InstanceSource::Random(spec) => Ok(Loaded {
                id: format!("random-seed{}", spec.seed),
                instance: random_instance(spec)?,
                family: None,
            }),
        }
    }

    /// Copy of the source with `name` set to `value`.
    pub fn with_param(&self, name: &str, value: &str) -> Result<InstanceSource> {
        match self {
            InstanceSource::File { .. } => bail!("a file source has no parameters to sweep"),
            InstanceSource::Family { family, params } => {
                let mut params = params.clone();
                params.insert(name.to_string(), value.to_string());
                Ok(InstanceSource::Family { family: family.clone(), params })
            }
            InstanceSource::Random(spec) => {
                let mut spec = spec.clone();
                let v: u64 = value.parse().with_context(|| format!("{name} must be an integer"))?;
                match name {
                    "seed" => spec.seed = v,
                    "n" => spec.n = v as usize,
                    "k" => spec.k = v as usize,
                    "tau" => spec.tau = v,
                    "release_max" => spec.release_max = v,
                    "work_min" => spec.work_min = v,
                    "work_max" => spec.work_max = v,
                    _ => bail!("random instances have no parameter {name}"),
                }
                Ok(InstanceSource::Random(spec))
            }
        }
    }
}

struct Params<'a>(&'a BTreeMap<String, String>);

impl Params<'_> {
    fn rational(&self, name: &str, default: Rational) -> Result<Rational> {
        match self.0.get(name) {
            Some(v) => Ok(parse_rational(v).with_context(|| format!("parameter {name}"))?),
            None => Ok(default),
        }
    }

    fn count(&self, name: &str, default: usize) -> Result<usize> {
        match self.0.get(name) {
            Some(v) => v.trim().parse().with_context(|| format!("parameter {name} must be a non-negative integer")),
            None => Ok(default),
        }
    }

    fn list(&self, name: &str) -> Result<Option<Vec<usize>>> {
        self.0
            .get(name)
            .map(|v| {
                v.split(',')
                    .map(|x| x.trim().parse().with_context(|| format!("parameter {name} must list integers")))
                    .collect()
            })
            .transpose()
    }

    fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        match self.0.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => bail!("unknown parameter {k}; expected one of {}", known.join(", ")),
            None => Ok(()),
        }
    }
}

fn family_id(name: &str, params: &BTreeMap<String, String>) -> String {
    let mut id = name.to_string();
    for (k, v) in params {
        id.push_str(&format!("-{k}{}", v.replace('/', "_").replace(',', ".")));
    }
    id
}

/// Runs the generator `name` with string parameters.
pub fn generate(name: &str, raw: &BTreeMap<String, String>) -> Result<Loaded> {
    let p = Params(raw);
    let family = match name {
        "cyclic-tightness" => {
            p.reject_unknown(&["k", "gamma", "n", "eps"])?;
            cyclic_tightness(p.count("k", 3)?, p.rational("gamma", int(1))?, p.count("n", 10)?, p.rational("eps", rational(1, 2))?)?
        }
        "unbounded-workload" => {
            p.reject_unknown(&["k", "n", "eps", "tau"])?;
            unbounded_workload(p.count("k", 2)?, p.count("n", 10)?, p.rational("eps", rational(1, 2))?, p.rational("tau", int(1))?)?
        }
        "limited-setups" => {
            p.reject_unknown(&["k", "n", "l", "tau"])?;
            limited_setups(p.count("k", 2)?, p.count("n", 2)?, p.count("l", 1)?, p.rational("tau", int(1))?)?
        }
        "longest-queue" => {
            p.reject_unknown(&["n", "p", "tau"])?;
            longest_queue_trap(p.count("n", 2)?, p.rational("p", int(3))?, p.rational("tau", int(1))?)?
        }
        "static-route" => {
            p.reject_unknown(&["route", "k", "n_k"])?;
            let route = match p.list("route")? {
                Some(route) => route,
                None => (1..=p.count("k", 3)?).collect(),
            };
            static_route(&route, p.count("n_k", 10)?)?
        }
        "queue-length" => {
            p.reject_unknown(&["k", "p", "tau"])?;
            routing_class(RoutingClass::QueueLength, p.count("k", 2)?, p.rational("p", int(10))?, p.rational("tau", int(1))?)?
        }
        "job-priority" => {
            p.reject_unknown(&["k", "n", "tau"])?;
            let n = p.count("n", 10)?;
            routing_class(RoutingClass::JobPriority, p.count("k", 2)?, int(n as i128), p.rational("tau", int(1))?)?
        }
        "single-job" => {
            p.reject_unknown(&["theta"])?;
            single_job(p.rational("theta", int(2))?)?
        }
        "random" => {
            p.reject_unknown(&["seed", "n", "k", "tau", "release_max", "work_min", "work_max"])?;
            let n = p.count("n", 6)?;
            let spec = RandomSpec {
                seed: p.count("seed", 0)? as u64,
                n,
                k: p.count("k", 2)?,
                tau: p.count("tau", 1)? as u64,
                release_max: p.count("release_max", 2 * n)? as u64,
                work_min: p.count("work_min", 0)? as u64,
                work_max: p.count("work_max", 4)? as u64,
            };
            return Ok(Loaded {
                id: family_id(name, raw),
                instance: random_instance(&spec)?,
                family: None,
            });
        }
        other => return Err(anyhow!("unknown family {other:?}; expected one of {}", FAMILIES.join(", "))),
    };
    Ok(Loaded {
        id: family_id(name, raw),
        instance: family.instance.clone(),
        family: Some(family),
    })
}
