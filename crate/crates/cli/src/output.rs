//! Result files: `runs.csv`, `summary.json` and the optional gzipped trace.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use cbwlc::benchmark::{Benchmarks, MetricsReport};
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::experiment::ResultsBundle;

pub const RUNS_FILE: &str = "runs.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TRACE_FILE: &str = "trace.csv.gz";

/// `printf("%.12g")`.
pub fn format_g12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // The exponent after rounding to 12 significant digits.
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (DIGITS - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Column names of `runs.csv` for `d` resources.
pub fn runs_header(num_resources: usize) -> Vec<String> {
    let mut h: Vec<String> = ["replication", "seed", "total_reward", "opt", "opt_pac", "regret"]
        .map(String::from)
        .to_vec();
    h.extend((1..=num_resources).map(|i| format!("v_{i}")));
    h.extend(
        [
            "reg_out",
            "reg_pace",
            "primal_reg",
            "dual_reg",
            "nu_measured",
            "stop_round",
        ]
        .map(String::from),
    );
    h
}

/// Numeric metric columns in header order, with their values.
pub fn metric_columns(m: &MetricsReport) -> Vec<(String, f64)> {
    let mut cols = vec![
        ("total_reward".to_string(), m.total_reward),
        ("opt".into(), m.opt),
        ("opt_pac".into(), m.opt_pac),
        ("regret".into(), m.regret),
    ];
    cols.extend(
        m.violations
            .iter()
            .enumerate()
            .map(|(i, v)| (format!("v_{}", i + 1), *v)),
    );
    cols.extend([
        ("reg_out".into(), m.reg_out),
        ("reg_pace".into(), m.reg_pace),
        ("primal_reg".into(), m.primal_reg),
        ("dual_reg".into(), m.dual_reg),
        ("nu_measured".into(), m.nu_measured),
    ]);
    cols
}

pub fn write_runs<W: Write>(bundle: &ResultsBundle, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(runs_header(bundle.num_resources))?;
    for rep in &bundle.replications {
        let Ok(o) = &rep.outcome else { continue };
        let mut row = vec![rep.replication.to_string(), rep.seed.to_string()];
        row.extend(metric_columns(&o.metrics).into_iter().map(|(_, v)| format_g12(v)));
        row.push(o.metrics.stop_round.map_or(String::new(), |s| s.to_string()));
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn runs_csv_string(bundle: &ResultsBundle) -> String {
    let mut buf = Vec::new();
    write_runs(bundle, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

/// Type-7 sample quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub replication: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationSummary {
    pub checked: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub benchmarks: Benchmarks,
    pub completed: usize,
    pub metrics: Vec<MetricSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_aggregation: Option<AggregationSummary>,
    pub failures: Vec<Failure>,
}

pub fn summarize(bundle: &ResultsBundle) -> Summary {
    let done: Vec<_> = bundle
        .replications
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .collect();
    let mut metrics = Vec::new();
    if let Some(first) = done.first() {
        for (j, (name, _)) in metric_columns(&first.metrics).into_iter().enumerate() {
            let mut values: Vec<f64> = done.iter().map(|o| metric_columns(&o.metrics)[j].1).collect();
            values.sort_by(f64::total_cmp);
            metrics.push(MetricSummary {
                metric: name,
                median: quantile(&values, 0.5),
                q1: quantile(&values, 0.25),
                q3: quantile(&values, 0.75),
                mean: values.iter().sum::<f64>() / values.len() as f64,
            });
        }
    }
    let checks: Vec<_> = done.iter().filter_map(|o| o.aggregation.as_ref()).collect();
    Summary {
        config: bundle.config.clone(),
        benchmarks: bundle.benchmarks.clone(),
        completed: done.len(),
        metrics,
        error_aggregation: (!checks.is_empty()).then(|| AggregationSummary {
            checked: checks.len(),
            failures: checks.iter().filter(|c| !c.holds).count(),
        }),
        failures: bundle
            .replications
            .iter()
            .filter_map(|r| {
                r.outcome.as_ref().err().map(|e| Failure {
                    replication: r.replication,
                    seed: r.seed,
                    error: e.clone(),
                })
            })
            .collect(),
    }
}

/// Trace lines of every replication that kept one, in replication order.
pub fn write_trace<W: Write>(bundle: &ResultsBundle, w: W) -> csv::Result<()> {
    let d = bundle.num_resources;
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec![
        "replication".to_string(),
        "round".into(),
        "context".into(),
        "arm".into(),
        "reward".into(),
    ];
    header.extend((1..=d).map(|i| format!("c_{i}")));
    header.extend((1..=d).map(|i| format!("lambda_{i}")));
    header.push("payoff".into());
    out.write_record(&header)?;
    for rep in &bundle.replications {
        let Some(trace) = rep.outcome.as_ref().ok().and_then(|o| o.trace.as_ref()) else {
            continue;
        };
        for t in trace {
            let mut row = vec![
                rep.replication.to_string(),
                t.round.to_string(),
                t.context.to_string(),
                t.arm.to_string(),
            ];
            row.extend(t.outcome.iter().chain(&t.lambda).map(|v| format_g12(*v)));
            row.push(format_g12(t.payoff));
            out.write_record(&row)?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>, OutputError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| OutputError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Write `runs.csv`, `summary.json` and, if traced, `trace.csv.gz` into `dir`.
pub fn emit_results(bundle: &ResultsBundle, dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    std::fs::create_dir_all(dir).map_err(|source| OutputError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();

    let path = dir.join(RUNS_FILE);
    write_runs(bundle, create(&path)?).map_err(|source| OutputError::Csv {
        path: path.clone(),
        source,
    })?;
    written.push(path);

    let path = dir.join(SUMMARY_FILE);
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &summarize(bundle))
        .map_err(io::Error::from)
        .and_then(|_| w.write_all(b"\n"))
        .and_then(|_| w.flush())
        .map_err(|source| OutputError::Io {
            path: path.clone(),
            source,
        })?;
    written.push(path);

    let traced = bundle
        .replications
        .iter()
        .any(|r| r.outcome.as_ref().is_ok_and(|o| o.trace.is_some()));
    if traced {
        let path = dir.join(TRACE_FILE);
        let mut gz = GzEncoder::new(create(&path)?, Compression::default());
        write_trace(bundle, &mut gz).map_err(|source| OutputError::Csv {
            path: path.clone(),
            source,
        })?;
        gz.finish()
            .and_then(|mut w| w.flush())
            .map_err(|source| OutputError::Io {
                path: path.clone(),
                source,
            })?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_matches_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (0.1 + 0.2, "0.3"),
            (1.0 / 3.0, "0.333333333333"),
            (123456.789, "123456.789"),
            (1e-5, "1e-05"),
            (0.0001234, "0.0001234"),
            (1e12, "1e+12"),
            (999999999999.5, "1e+12"),
            (123456789012.0, "123456789012"),
            (f64::NAN, "nan"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g12(x), want, "{x}");
        }
    }

    #[test]
    fn g12_round_trips_to_twelve_digits() {
        for x in [std::f64::consts::PI * 1e3, -7.123456789e-3, 5.5e20] {
            let back: f64 = format_g12(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-11);
        }
    }

    #[test]
    fn type7_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&v, 0.75), 3.25);
        assert_eq!(quantile(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn header_has_one_column_per_resource() {
        let h = runs_header(3);
        assert_eq!(h.len(), 6 + 3 + 6);
        assert_eq!(&h[6..9], ["v_1", "v_2", "v_3"]);
        assert_eq!(h.last().unwrap(), "stop_round");
    }
}
