//! Run reports and their CSV form.
//!
//! A report directory holds:
//!
//! | file             | columns                                                      |
//! |------------------|--------------------------------------------------------------|
//! | `manifest.csv`   | `key,value` (kind, config_hash, seed, runs)                  |
//! | `config.toml`    | canonical config echo; its SHA-256 is the config hash        |
//! | `runs.csv`       | `run,method,metric,value`                                    |
//! | `aggregate.csv`  | `method,metric,runs,mean,std_err,ci95_low,ci95_high`         |
//! | `weights.csv`    | `run,method,iteration,w0,…,w{m-1}`                            |
//! | `bottleneck.csv` | `run,method,iteration,bottleneck`                            |
//! | `checks.csv`     | `run,check,passed,lhs,rhs` (passed means `lhs <= rhs`)       |
//!
//! Rows keep the order in which they were produced and floats are written in
//! shortest round-trip form, so equal reports give byte-equal files. The
//! aggregate groups `runs.csv` by `(method, metric)` in order of first
//! appearance and reports `mean ± 1.96·SE` with the sample standard deviation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use robustopt_core::stats::{mean_ci95, MeanCi};

use crate::config::hash_text;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub run: usize,
    pub method: String,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightRow {
    pub run: usize,
    pub method: String,
    pub iteration: usize,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub run: usize,
    pub method: String,
    pub iteration: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub run: usize,
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.lhs <= self.rhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub method: String,
    pub metric: String,
    pub ci: MeanCi,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunReport {
    pub kind: String,
    pub seed: u64,
    pub runs: usize,
    pub config_echo: String,
    pub config_hash: String,
    /// Width of the weight table.
    pub objectives: usize,
    pub metrics: Vec<Metric>,
    pub weights: Vec<WeightRow>,
    pub bottleneck: Vec<CurveRow>,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn metric(&mut self, run: usize, method: &str, metric: &str, value: f64) {
        self.metrics.push(Metric {
            run,
            method: method.to_string(),
            metric: metric.to_string(),
            value,
        });
    }

    pub fn weight_history(&mut self, run: usize, method: &str, history: impl IntoIterator<Item = Vec<f64>>) {
        for (iteration, weights) in history.into_iter().enumerate() {
            self.weights.push(WeightRow {
                run,
                method: method.to_string(),
                iteration,
                weights,
            });
        }
    }

    pub fn curve(&mut self, run: usize, method: &str, values: impl IntoIterator<Item = f64>) {
        for (iteration, value) in values.into_iter().enumerate() {
            self.bottleneck.push(CurveRow {
                run,
                method: method.to_string(),
                iteration,
                value,
            });
        }
    }

    pub fn check(&mut self, run: usize, name: &str, lhs: f64, rhs: f64) {
        self.checks.push(Check {
            run,
            name: name.to_string(),
            lhs,
            rhs,
        });
    }

    pub fn aggregate(&self) -> Vec<AggregateRow> {
        aggregate(&self.metrics)
    }

    /// Values of one `(method, metric)` pair in run order.
    pub fn values(&self, method: &str, metric: &str) -> Vec<f64> {
        self.metrics
            .iter()
            .filter(|m| m.method == method && m.metric == metric)
            .map(|m| m.value)
            .collect()
    }

    pub fn mean(&self, method: &str, metric: &str) -> Option<f64> {
        mean_ci95(&self.values(method, metric)).map(|c| c.mean)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }
}

pub fn aggregate(metrics: &[Metric]) -> Vec<AggregateRow> {
    let mut keys: Vec<(&str, &str)> = Vec::new();
    for m in metrics {
        let key = (m.method.as_str(), m.metric.as_str());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(method, metric)| {
            let values: Vec<f64> = metrics
                .iter()
                .filter(|m| m.method == method && m.metric == metric)
                .map(|m| m.value)
                .collect();
            AggregateRow {
                method: method.to_string(),
                metric: metric.to_string(),
                ci: mean_ci95(&values).expect("every key has a value"),
            }
        })
        .collect()
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

struct Csv {
    path: PathBuf,
    w: csv::Writer<std::fs::File>,
}

impl Csv {
    fn create(dir: &Path, name: &str, header: &[String]) -> CliResult<Self> {
        let path = dir.join(name);
        let w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .map_err(|source| CliError::Csv {
                path: path.clone(),
                source,
            })?;
        let mut csv = Self { path, w };
        csv.row(header)?;
        Ok(csv)
    }

    fn row<S: AsRef<[u8]>>(&mut self, fields: &[S]) -> CliResult<()> {
        self.w.write_record(fields).map_err(|source| CliError::Csv {
            path: self.path.clone(),
            source,
        })
    }

    fn finish(mut self) -> CliResult<PathBuf> {
        self.w.flush().map_err(|source| CliError::Io {
            path: self.path.clone(),
            source,
        })?;
        Ok(self.path)
    }
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Writes every report file into `dir`, creating it if needed.
pub fn emit_csv(report: &RunReport, dir: &Path) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();

    let mut f = Csv::create(dir, "manifest.csv", &header(&["key", "value"]))?;
    f.row(&["kind", report.kind.as_str()])?;
    f.row(&["config_hash", report.config_hash.as_str()])?;
    f.row(&["seed".to_string(), report.seed.to_string()])?;
    f.row(&["runs".to_string(), report.runs.to_string()])?;
    written.push(f.finish()?);

    let config = dir.join("config.toml");
    std::fs::write(&config, &report.config_echo).map_err(|source| CliError::Io {
        path: config.clone(),
        source,
    })?;
    written.push(config);

    let mut f = Csv::create(dir, "runs.csv", &header(&["run", "method", "metric", "value"]))?;
    for m in &report.metrics {
        f.row(&[m.run.to_string(), m.method.clone(), m.metric.clone(), fmt(m.value)])?;
    }
    written.push(f.finish()?);

    let mut f = Csv::create(
        dir,
        "aggregate.csv",
        &header(&["method", "metric", "runs", "mean", "std_err", "ci95_low", "ci95_high"]),
    )?;
    for a in report.aggregate() {
        f.row(&[
            a.method,
            a.metric,
            a.ci.n.to_string(),
            fmt(a.ci.mean),
            fmt(a.ci.std_err),
            fmt(a.ci.lo),
            fmt(a.ci.hi),
        ])?;
    }
    written.push(f.finish()?);

    let mut cols = header(&["run", "method", "iteration"]);
    cols.extend((0..report.objectives).map(|i| format!("w{i}")));
    let mut f = Csv::create(dir, "weights.csv", &cols)?;
    for r in &report.weights {
        let mut row = vec![r.run.to_string(), r.method.clone(), r.iteration.to_string()];
        row.extend(r.weights.iter().map(|&w| fmt(w)));
        f.row(&row)?;
    }
    written.push(f.finish()?);

    let mut f = Csv::create(dir, "bottleneck.csv", &header(&["run", "method", "iteration", "bottleneck"]))?;
    for r in &report.bottleneck {
        f.row(&[r.run.to_string(), r.method.clone(), r.iteration.to_string(), fmt(r.value)])?;
    }
    written.push(f.finish()?);

    let mut f = Csv::create(dir, "checks.csv", &header(&["run", "check", "passed", "lhs", "rhs"]))?;
    for c in &report.checks {
        f.row(&[
            c.run.to_string(),
            c.name.clone(),
            c.passed().to_string(),
            fmt(c.lhs),
            fmt(c.rhs),
        ])?;
    }
    written.push(f.finish()?);
    Ok(written)
}

fn read_rows(path: &Path) -> CliResult<Vec<csv::StringRecord>> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.records().collect::<Result<_, _>>().map_err(csv_err)
}

fn number(path: &Path, field: &str) -> CliResult<f64> {
    field
        .parse()
        .map_err(|_| CliError::Report(format!("{}: bad number {field:?}", path.display())))
}

/// A report directory read back from disk.
#[derive(Debug, Clone)]
pub struct LoadedReport {
    pub dir: PathBuf,
    pub kind: String,
    pub config_hash: String,
    pub aggregate: Vec<AggregateRow>,
    pub failed_checks: usize,
}

/// Reads a report directory, checking the config hash against the echo and
/// the aggregate against the per-run rows.
pub fn load_report(dir: &Path) -> CliResult<LoadedReport> {
    let fail = |msg: String| CliError::Report(format!("{}: {msg}", dir.display()));
    let manifest = read_rows(&dir.join("manifest.csv"))?;
    let lookup = |key: &str| {
        manifest
            .iter()
            .find(|r| r.get(0) == Some(key))
            .and_then(|r| r.get(1))
            .map(str::to_string)
            .ok_or_else(|| fail(format!("manifest lacks {key}")))
    };
    let kind = lookup("kind")?;
    let config_hash = lookup("config_hash")?;
    let echo_path = dir.join("config.toml");
    let echo = std::fs::read_to_string(&echo_path).map_err(|source| CliError::Io { path: echo_path, source })?;
    if hash_text(&echo) != config_hash {
        return Err(fail("config.toml does not match the recorded hash".into()));
    }

    let runs_path = dir.join("runs.csv");
    let mut metrics = Vec::new();
    for r in read_rows(&runs_path)? {
        if r.len() != 4 {
            return Err(fail(format!("runs.csv row has {} fields", r.len())));
        }
        metrics.push(Metric {
            run: number(&runs_path, &r[0])? as usize,
            method: r[1].to_string(),
            metric: r[2].to_string(),
            value: number(&runs_path, &r[3])?,
        });
    }
    let recomputed = aggregate(&metrics);

    let agg_path = dir.join("aggregate.csv");
    let stored = read_rows(&agg_path)?;
    if stored.len() != recomputed.len() {
        return Err(fail("aggregate.csv and runs.csv disagree on the method/metric set".into()));
    }
    for (s, a) in stored.iter().zip(&recomputed) {
        let same = s.len() == 7
            && s[0] == a.method
            && s[1] == a.metric
            && number(&agg_path, &s[3])? == a.ci.mean
            && number(&agg_path, &s[5])? == a.ci.lo
            && number(&agg_path, &s[6])? == a.ci.hi;
        if !same {
            return Err(fail(format!("aggregate row for {}/{} is not reproducible from runs.csv", a.method, a.metric)));
        }
    }

    let checks = read_rows(&dir.join("checks.csv"))?;
    let failed_checks = checks.iter().filter(|r| r.get(2) != Some("true")).count();
    Ok(LoadedReport {
        dir: dir.to_path_buf(),
        kind,
        config_hash,
        aggregate: recomputed,
        failed_checks,
    })
}

/// Report directories under `dir`: `dir` itself if it holds a manifest,
/// otherwise its immediate subdirectories that do, sorted by name.
pub fn find_reports(dir: &Path) -> CliResult<Vec<PathBuf>> {
    if dir.join("manifest.csv").is_file() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let entries = std::fs::read_dir(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut found: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("manifest.csv").is_file())
        .collect();
    found.sort();
    if found.is_empty() {
        return Err(CliError::Report(format!("{}: no report directories", dir.display())));
    }
    Ok(found)
}

/// Human-readable summary of every report under `dir`. Reports are listed
/// one by one and grouped by config hash; distinct hashes are never merged.
pub fn summarize(dir: &Path) -> CliResult<String> {
    let mut reports: Vec<LoadedReport> = find_reports(dir)?
        .iter()
        .map(|d| load_report(d))
        .collect::<CliResult<_>>()?;
    reports.sort_by(|a, b| a.config_hash.cmp(&b.config_hash).then(a.dir.cmp(&b.dir)));
    let mut out = String::new();
    for r in &reports {
        let _ = writeln!(
            out,
            "{} [{}] config {} ({} failed checks)",
            r.dir.display(),
            r.kind,
            &r.config_hash[..12.min(r.config_hash.len())],
            r.failed_checks
        );
        let _ = writeln!(out, "  {:<22} {:<22} {:>4} {:>12} {:>25}", "method", "metric", "runs", "mean", "95% CI");
        for a in &r.aggregate {
            let _ = writeln!(
                out,
                "  {:<22} {:<22} {:>4} {:>12.6} [{:>11.6}, {:>11.6}]",
                a.method, a.metric, a.ci.n, a.ci.mean, a.ci.lo, a.ci.hi
            );
        }
    }
    Ok(out)
}
