use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pollbench_cli::commands::{gen_output, run_csv, sweep_csv};
use pollbench_cli::config::{bounds_path, BenchmarkChoice, ExperimentConfig, InstanceSource, SweepAxis};
use pollbench_core::acceptance;
use pollbench_core::PolicySpec;

/// Polling-system simulator: generate instances, run policies against
/// offline benchmarks, sweep parameters and run the acceptance suite.
#[derive(Parser, Debug)]
#[command(name = "pollbench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated instance (plus a bounds file for adversarial families)
    Gen {
        /// One of the generator families, e.g. longest-queue or random
        family: String,
        #[command(flatten)]
        params: FamilyParams,
        /// Instance JSON path; the bounds go next to it as <stem>.bounds.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate policies on one instance and write a ratio CSV
    Run {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Bounds file with the constructed offline schedule
        #[arg(long)]
        bounds: Option<PathBuf>,
    },
    /// Repeat a run over values of one or more generator parameters
    Sweep {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Parameters set to each sweep value, e.g. n,p
        #[arg(long, value_delimiter = ',')]
        axis: Vec<String>,
        /// Sweep values in output order
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
    },
    /// Run the acceptance suite and print one line per criterion
    Verify,
}

#[derive(Args, Debug, Default)]
struct FamilyParams {
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    l: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    /// Visit table for static-route, e.g. 1,2,1,3
    #[arg(long)]
    route: Option<String>,
    #[arg(long)]
    n_k: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    release_max: Option<String>,
    #[arg(long)]
    work_min: Option<String>,
    #[arg(long)]
    work_max: Option<String>,
}

impl FamilyParams {
    fn map(&self) -> BTreeMap<String, String> {
        let entries = [
            ("k", &self.k),
            ("n", &self.n),
            ("l", &self.l),
            ("p", &self.p),
            ("tau", &self.tau),
            ("gamma", &self.gamma),
            ("eps", &self.eps),
            ("theta", &self.theta),
            ("route", &self.route),
            ("n_k", &self.n_k),
            ("seed", &self.seed),
            ("release_max", &self.release_max),
            ("work_min", &self.work_min),
            ("work_max", &self.work_max),
        ];
        entries
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v)))
            .collect()
    }
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Experiment config JSON; flags given alongside override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Instance JSON file
    #[arg(long, conflicts_with = "family")]
    instance: Option<PathBuf>,
    /// Generator family
    #[arg(long)]
    family: Option<String>,
    #[command(flatten)]
    params: FamilyParams,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Policy as JSON, e.g. '{"family":"gipp"}'; repeatable. Default: the full catalog
    #[arg(long = "policy")]
    policies: Vec<String>,
    #[arg(long, value_enum)]
    benchmark: Option<BenchmarkChoice>,
    /// Largest instance the brute-force benchmark accepts
    #[arg(long)]
    max_n: Option<usize>,
    /// CSV path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(source: &SourceArgs, common: &CommonArgs) -> Result<ExperimentConfig> {
    let params = source.params.map();
    let mut config = match &source.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let src = match (&source.instance, &source.family) {
                (Some(path), _) => InstanceSource::File { path: path.clone() },
                (None, Some(family)) => InstanceSource::Family { family: family.clone(), params: BTreeMap::new() },
                (None, None) => bail!("give --config, --instance or --family"),
            };
            ExperimentConfig {
                source: src,
                policies: Vec::new(),
                benchmark: BenchmarkChoice::default(),
                max_n: pollbench_core::benchmarks::DEFAULT_MAX_N,
                output: None,
                sweep: None,
            }
        }
    };
    for (name, value) in &params {
        config.source = config.source.with_param(name, value)?;
    }
    if !common.policies.is_empty() {
        config.policies = common
            .policies
            .iter()
            .map(|p| PolicySpec::from_json(p).with_context(|| format!("policy {p}")))
            .collect::<Result<_>>()?;
    }
    if let Some(b) = common.benchmark {
        config.benchmark = b;
    }
    if let Some(m) = common.max_n {
        config.max_n = m;
    }
    if common.out.is_some() {
        config.output = common.out.clone();
    }
    Ok(config)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn configure_workers() -> Result<()> {
    if let Ok(value) = std::env::var("POLLBENCH_WORKERS") {
        let n: usize = value.parse().context("POLLBENCH_WORKERS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

/// Outputs of a few representative commands, produced twice and compared.
fn determinism_check() -> acceptance::CriterionOutcome {
    let check = || -> Result<Vec<String>> {
        let family = |name: &str, params: &[(&str, &str)]| InstanceSource::Family {
            family: name.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        };
        let mut outputs = Vec::new();
        for source in [family("random", &[("seed", "7"), ("n", "6"), ("k", "3")]), family("longest-queue", &[])] {
            let (instance, sidecar) = gen_output(&source)?;
            outputs.push(instance);
            outputs.extend(sidecar);
            let config = ExperimentConfig {
                source,
                policies: Vec::new(),
                benchmark: BenchmarkChoice::Brute,
                max_n: 10,
                output: None,
                sweep: Some(SweepAxis { parameters: vec!["tau".into()], values: vec!["0".into(), "1".into(), "2".into()] }),
            };
            outputs.push(run_csv(&config, None)?.0);
            outputs.push(sweep_csv(&config)?.0);
        }
        Ok(outputs)
    };
    let (passed, detail) = match (check(), check()) {
        (Ok(a), Ok(b)) if a == b => (true, format!("{} outputs byte-identical across runs", a.len())),
        (Ok(_), Ok(_)) => (false, "outputs differ between runs".into()),
        (Err(e), _) | (_, Err(e)) => (false, format!("{e:#}")),
    };
    acceptance::CriterionOutcome { id: 10, title: "deterministic outputs", passed, detail }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    configure_workers()?;
    let violated = match cli.command {
        Command::Gen { family, params, out } => {
            let source = InstanceSource::Family { family, params: params.map() };
            let (instance, sidecar) = gen_output(&source)?;
            emit(&instance, out.as_deref())?;
            if let (Some(out), Some(sidecar)) = (&out, sidecar) {
                emit(&sidecar, Some(&bounds_path(out)))?;
            }
            false
        }
        Command::Run { source, common, bounds } => {
            let config = build_config(&source, &common)?;
            let bounds = bounds.or_else(|| match &config.source {
                InstanceSource::File { path } => Some(bounds_path(path)).filter(|p| p.exists()),
                _ => None,
            });
            let (csv, violated) = run_csv(&config, bounds.as_deref())?;
            emit(&csv, config.output.as_deref())?;
            violated
        }
        Command::Sweep { source, common, axis, values } => {
            let mut config = build_config(&source, &common)?;
            if !axis.is_empty() || !values.is_empty() {
                config.sweep = Some(SweepAxis { parameters: axis, values });
            }
            let (csv, violated) = sweep_csv(&config)?;
            emit(&csv, config.output.as_deref())?;
            violated
        }
        Command::Verify => {
            let mut outcomes = acceptance::run_all()?;
            outcomes.push(determinism_check());
            for o in &outcomes {
                println!("{o}");
            }
            if outcomes.iter().any(|o| !o.passed) {
                return Ok(ExitCode::from(1));
            }
            false
        }
    };
    if violated {
        eprintln!("a registered competitive-ratio bound was violated");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}
