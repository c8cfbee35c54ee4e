use std::path::Path;

use anyhow::{bail, Context, Result};
use pollbench_core::benchmarks::ratio_report;
use pollbench_core::engine::simulate;
use pollbench_core::time::{format_rational, to_f64};
use pollbench_core::trace::total_completion;
use pollbench_core::{
    brute_force_optimal, srpt_reduced, BenchmarkKind, BenchmarkResult, JobId, JobInstance, PolicySpec, RatioReport,
};
use rayon::prelude::*;
use serde::Deserialize;

use crate::config::{BenchmarkChoice, ExperimentConfig, InstanceSource, Loaded};

pub const HEADER: [&str; 11] = [
    "instance_id",
    "policy_json",
    "policy_total",
    "benchmark_kind",
    "benchmark_total",
    "ratio_num",
    "ratio_den",
    "ratio_decimal",
    "claimed_bound",
    "bound_ok",
    "error",
];

/// One CSV row: a report, or the error that prevented it.
#[derive(Clone, Debug)]
pub struct Row {
    pub instance_id: String,
    pub policy: PolicySpec,
    pub outcome: std::result::Result<RatioReport, String>,
}

impl Row {
    pub fn violates_bound(&self) -> bool {
        matches!(&self.outcome, Ok(r) if r.bound_ok == Some(false))
    }

    fn record(&self) -> Vec<String> {
        let mut out = vec![self.instance_id.clone(), self.policy.to_json()];
        match &self.outcome {
            Ok(r) => {
                let (num, den, dec) = match &r.ratio {
                    Some(q) => (q.numer().to_string(), q.denom().to_string(), format!("{:.6}", to_f64(q))),
                    None => Default::default(),
                };
                out.extend([
                    r.policy_total.to_string(),
                    r.benchmark_kind.to_string(),
                    r.benchmark_total.to_string(),
                    num,
                    den,
                    dec,
                    r.claimed_bound.as_ref().map(format_rational).unwrap_or_default(),
                    r.bound_ok.map(|b| b.to_string()).unwrap_or_default(),
                    if r.zero_benchmark() { "zero_benchmark".into() } else { String::new() },
                ]);
            }
            Err(e) => {
                out.extend(std::iter::repeat_n(String::new(), 8));
                out.push(e.clone());
            }
        }
        out
    }
}

/// Renders rows as CSV; `axis` adds leading axis name and value columns.
pub fn to_csv(rows: &[(Option<(String, String)>, Row)], with_axis: bool) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header: Vec<&str> = Vec::new();
    if with_axis {
        header.extend(["axis", "axis_value"]);
    }
    header.extend(HEADER);
    w.write_record(&header)?;
    for (axis, row) in rows {
        let mut record = Vec::new();
        if with_axis {
            let (name, value) = axis.clone().unwrap_or_default();
            record.extend([name, value]);
        }
        record.extend(row.record());
        w.write_record(&record)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Deserialize)]
struct BoundsFile {
    offline_schedule: Vec<JobId>,
}

fn constructed(loaded: &Loaded, bounds: Option<&Path>) -> Result<BenchmarkResult> {
    if let Some(family) = &loaded.family {
        return Ok(family.constructed()?);
    }
    let Some(path) = bounds else {
        bail!("the constructed benchmark needs a generated family or its bounds file");
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: BoundsFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let schedule = pollbench_core::benchmarks::schedule_order(&loaded.instance, &file.offline_schedule)?;
    Ok(BenchmarkResult {
        kind: BenchmarkKind::ConstructedOffline,
        total: schedule.total(),
        order: Some(file.offline_schedule),
        schedule: Some(schedule),
        exact: false,
    })
}

pub fn benchmark(loaded: &Loaded, choice: BenchmarkChoice, max_n: usize, bounds: Option<&Path>) -> Result<BenchmarkResult> {
    Ok(match choice {
        BenchmarkChoice::Srpt => srpt_reduced(&loaded.instance),
        BenchmarkChoice::Brute => brute_force_optimal(&loaded.instance, max_n)?,
        BenchmarkChoice::Constructed => constructed(loaded, bounds)?,
    })
}

fn evaluate(policy: &PolicySpec, instance: &JobInstance, bench: &BenchmarkResult) -> std::result::Result<RatioReport, String> {
    let run = || -> pollbench_core::Result<RatioReport> {
        let trace = simulate(policy.instantiate(instance)?, instance)?;
        let total = total_completion(&trace, instance)?;
        Ok(ratio_report(policy, instance, total, bench))
    };
    run().map_err(|e| e.to_string())
}

/// Rows for every policy on one loaded instance.
pub fn run_rows(loaded: &Loaded, policies: &[PolicySpec], bench: &BenchmarkResult) -> Vec<Row> {
    policies
        .par_iter()
        .map(|policy| Row {
            instance_id: loaded.id.clone(),
            policy: policy.clone(),
            outcome: evaluate(policy, &loaded.instance, bench),
        })
        .collect()
}

/// CSV of a single run and whether any registered bound was violated.
pub fn run_csv(config: &ExperimentConfig, bounds: Option<&Path>) -> Result<(String, bool)> {
    let loaded = config.source.load()?;
    let bench = benchmark(&loaded, config.benchmark, config.max_n, bounds)?;
    let rows = run_rows(&loaded, &config.policy_list(), &bench);
    let violated = rows.iter().any(Row::violates_bound);
    let rows: Vec<_> = rows.into_iter().map(|r| (None, r)).collect();
    Ok((to_csv(&rows, false)?, violated))
}

/// CSV over the sweep axis, ordered by axis value as given. A point that
/// cannot be generated or benchmarked yields one error row per policy.
pub fn sweep_csv(config: &ExperimentConfig) -> Result<(String, bool)> {
    let Some(axis) = &config.sweep else {
        bail!("the config has no sweep axis");
    };
    if axis.parameters.is_empty() || axis.values.is_empty() {
        bail!("a sweep needs at least one parameter and one value");
    }
    let policies = config.policy_list();
    let label = axis.parameters.join(",");
    let points: Vec<Vec<Row>> = axis
        .values
        .par_iter()
        .map(|value| {
            let point = || -> Result<(Loaded, BenchmarkResult)> {
                let mut source: InstanceSource = config.source.clone();
                for name in &axis.parameters {
                    source = source.with_param(name, value)?;
                }
                let loaded = source.load()?;
                let bench = benchmark(&loaded, config.benchmark, config.max_n, None)?;
                Ok((loaded, bench))
            };
            match point() {
                Ok((loaded, bench)) => run_rows(&loaded, &policies, &bench),
                Err(e) => policies
                    .iter()
                    .map(|p| Row {
                        instance_id: format!("{label}={value}"),
                        policy: p.clone(),
                        outcome: Err(format!("{e:#}")),
                    })
                    .collect(),
            }
        })
        .collect();
    let mut violated = false;
    let mut rows = Vec::new();
    for (value, point) in axis.values.iter().zip(points) {
        for row in point {
            violated |= row.violates_bound();
            rows.push((Some((label.clone(), value.clone())), row));
        }
    }
    Ok((to_csv(&rows, true)?, violated))
}

/// Instance JSON and, for adversarial families, the bounds JSON.
pub fn gen_output(source: &InstanceSource) -> Result<(String, Option<String>)> {
    let loaded = source.load()?;
    let sidecar = loaded.family.as_ref().map(|f| f.sidecar_json()).transpose()?;
    Ok((loaded.instance.to_json() + "\n", sidecar.map(|s| s + "\n")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SweepAxis;
    use std::collections::BTreeMap;

    fn family(name: &str, params: &[(&str, &str)]) -> InstanceSource {
        InstanceSource::Family {
            family: name.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect::<BTreeMap<_, _>>(),
        }
    }

    fn config(source: InstanceSource, policies: Vec<PolicySpec>, benchmark: BenchmarkChoice) -> ExperimentConfig {
        ExperimentConfig { source, policies, benchmark, max_n: 10, output: None, sweep: None }
    }

    #[test]
    fn violation_is_detected() {
        let report = RatioReport {
            policy: PolicySpec::Slq,
            policy_total: pollbench_core::Time::from_int(5),
            benchmark_kind: BenchmarkKind::BruteForceOptimal,
            benchmark_total: pollbench_core::Time::from_int(1),
            ratio: Some(pollbench_core::time::int(5)),
            claimed_bound: Some(pollbench_core::time::int(3)),
            bound_ok: Some(false),
        };
        let row = Row { instance_id: "x".into(), policy: PolicySpec::Slq, outcome: Ok(report) };
        assert!(row.violates_bound());
        let csv = to_csv(&[(None, row)], false).unwrap();
        assert!(csv.lines().nth(1).unwrap().ends_with(",3/1,false,"));
    }

    #[test]
    fn limited_rows() {
        let c = config(
            family("limited-setups", &[("k", "2"), ("n", "2"), ("l", "1"), ("tau", "1")]),
            vec![PolicySpec::limited(1, true), PolicySpec::exhaustive(true, Default::default())],
            BenchmarkChoice::Brute,
        );
        let (csv, violated) = run_csv(&c, None).unwrap();
        assert!(!violated);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], HEADER.join(","));
        assert!(lines[1].contains(",20/1,brute_force_optimal,16/1,5,4,1.250000,"), "{}", lines[1]);
        assert!(lines[2].contains(",16/1,brute_force_optimal,16/1,1,1,1.000000,"), "{}", lines[2]);
    }

    #[test]
    fn single_job_rows() {
        let c = config(
            family("single-job", &[("theta", "2")]),
            vec![PolicySpec::one_machine(), PolicySpec::gipp()],
            BenchmarkChoice::Srpt,
        );
        let (csv, violated) = run_csv(&c, None).unwrap();
        assert!(!violated);
        for line in csv.lines().skip(1) {
            assert!(line.contains(",4/1,srpt_reduced,1/1,4,1,4.000000,4/1,true,"), "{line}");
        }
    }

    #[test]
    fn empty_instance_reports_zero_benchmark() {
        let c = config(
            InstanceSource::Random(pollbench_core::RandomSpec::new(3, 0, 2)),
            vec![PolicySpec::Slq],
            BenchmarkChoice::Brute,
        );
        let (csv, _) = run_csv(&c, None).unwrap();
        assert!(csv.lines().nth(1).unwrap().ends_with(",zero_benchmark"));
    }

    #[test]
    fn sweep_is_ordered_and_increasing() {
        let mut c = config(family("longest-queue", &[("tau", "1")]), vec![PolicySpec::Slq], BenchmarkChoice::Constructed);
        c.sweep = Some(SweepAxis {
            parameters: vec!["n".into(), "p".into()],
            values: vec!["10".into(), "100".into(), "1000".into()],
        });
        let (csv, _) = sweep_csv(&c).unwrap();
        let mut reader = csv::Reader::from_reader(csv.as_bytes());
        let ratios: Vec<f64> = reader.records().map(|r| r.unwrap()[9].parse().unwrap()).collect();
        assert_eq!(ratios.len(), 3);
        assert!(ratios[0] < ratios[1] && ratios[1] < ratios[2]);
        assert!(csv.lines().nth(1).unwrap().starts_with("\"n,p\",10,"));
    }

    #[test]
    fn sweep_point_errors_become_rows() {
        let mut c = config(family("cyclic-tightness", &[("k", "2")]), vec![PolicySpec::Slq], BenchmarkChoice::Constructed);
        c.sweep = Some(SweepAxis { parameters: vec!["gamma".into()], values: vec!["1".into(), "3".into()] });
        let (csv, _) = sweep_csv(&c).unwrap();
        let last = csv.lines().last().unwrap();
        assert!(last.contains("regime"), "{last}");
    }
}
