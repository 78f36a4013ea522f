//! Campaign reports: CSV with `#` metadata and summary lines, or JSON.
//!
//! CSV layout:
//!
//! ```text
//! # trussopt <version>
//! # problem=10bar
//! # ...
//! seed,evals,best_weight,best_penalized,feasible,v1,...,vm
//! 0,2000,5490.738,5490.738,true,33.5,...
//! # summary,mean,5506.2
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Campaign, CampaignStats};
use crate::error::{Error, Result};
use crate::optimizer::RunRecord;

const FIXED_COLUMNS: [&str; 5] = ["seed", "evals", "best_weight", "best_penalized", "feasible"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::Usage(format!("unknown format `{s}` (expected csv or json)"))),
        }
    }
}

/// Report content read back from disk. CSV rows carry no histories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedReport {
    pub version: String,
    pub metadata: BTreeMap<String, String>,
    pub stats: CampaignStats,
    pub runs: Vec<RunRecord>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn metadata(c: &Campaign) -> Vec<(&'static str, String)> {
    vec![
        ("problem", c.config.problem.clone()),
        ("algorithm", c.config.algorithm.to_string()),
        ("mode", c.config.mode.to_string()),
        ("runs", c.config.runs.to_string()),
        ("base_seed", c.config.base_seed.to_string()),
        ("budget", c.budget.to_string()),
    ]
}

fn summary(s: &CampaignStats) -> Vec<(&'static str, String)> {
    vec![
        ("runs", s.runs.to_string()),
        ("feasible_runs", s.feasible_runs.to_string()),
        ("infeasible_runs", s.infeasible_runs.to_string()),
        ("best", opt(s.best)),
        ("mean", opt(s.mean)),
        ("std", opt(s.std)),
        ("evaluations_per_run", s.evaluations_per_run.to_string()),
        ("wall_time_secs", s.wall_time_secs.to_string()),
    ]
}

pub fn write_csv<W: Write>(campaign: &Campaign, mut out: W) -> Result<()> {
    let werr = |e: std::io::Error| Error::Report(e.to_string());
    writeln!(out, "# trussopt {}", crate::version()).map_err(werr)?;
    for (k, v) in metadata(campaign) {
        writeln!(out, "# {k}={v}").map_err(werr)?;
    }
    let m = campaign.runs.first().map_or(0, |r| r.best_design.len());
    let mut w = csv::Writer::from_writer(&mut out);
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((1..=m).map(|j| format!("v{j}")));
    let cerr = |e: csv::Error| Error::Report(e.to_string());
    w.write_record(&header).map_err(cerr)?;
    for r in &campaign.runs {
        let mut row = vec![
            r.seed.to_string(),
            r.evaluations.to_string(),
            r.best_weight.to_string(),
            r.best_penalized.to_string(),
            r.feasible.to_string(),
        ];
        row.extend(r.best_design.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(cerr)?;
    }
    w.flush().map_err(werr)?;
    drop(w);
    for (k, v) in summary(&campaign.stats) {
        writeln!(out, "# summary,{k},{v}").map_err(werr)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonReport<'a> {
    version: String,
    config: &'a super::ExperimentConfig,
    budget: usize,
    stats: &'a CampaignStats,
    runs: Vec<RunRecord>,
}

pub fn write_json<W: Write>(campaign: &Campaign, out: W, histories: bool) -> Result<()> {
    let runs = campaign
        .runs
        .iter()
        .map(|r| RunRecord {
            history: if histories { r.history.clone() } else { Vec::new() },
            ..r.clone()
        })
        .collect();
    let report = JsonReport {
        version: crate::version(),
        config: &campaign.config,
        budget: campaign.budget,
        stats: &campaign.stats,
        runs,
    };
    serde_json::to_writer_pretty(out, &report).map_err(|e| Error::Report(e.to_string()))
}

/// Sidecar path for CSV convergence histories: `out.csv` becomes `out.history.csv`.
pub fn history_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.history.csv"))
}

/// Writes the report and returns every file written.
pub fn emit_report(
    campaign: &Campaign,
    path: &Path,
    format: ReportFormat,
    histories: bool,
) -> Result<Vec<PathBuf>> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    let mut written = vec![path.to_path_buf()];
    match format {
        ReportFormat::Csv => {
            write_csv(campaign, &mut out)?;
            if histories {
                let hp = history_path(path);
                let mut h = BufWriter::new(File::create(&hp).map_err(io_err(&hp))?);
                let res: std::io::Result<()> = (|| {
                    writeln!(h, "seed,iteration,best_penalized")?;
                    for r in &campaign.runs {
                        for (k, v) in r.history.iter().enumerate() {
                            writeln!(h, "{},{k},{v}", r.seed)?;
                        }
                    }
                    h.flush()
                })();
                res.map_err(io_err(&hp))?;
                written.push(hp);
            }
        }
        ReportFormat::Json => write_json(campaign, &mut out, histories)?,
    }
    out.flush().map_err(io_err(path))?;
    Ok(written)
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Report(msg.into())
}

fn num<T: FromStr>(field: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| bad(format!("field `{field}`: cannot parse `{s}`")))
}

fn opt_num(field: &str, s: &str) -> Result<Option<f64>> {
    if s.trim().is_empty() {
        Ok(None)
    } else {
        num(field, s).map(Some)
    }
}

pub fn parse_csv_report(text: &str) -> Result<ParsedReport> {
    let mut version = String::new();
    let mut meta = BTreeMap::new();
    let mut sums = BTreeMap::new();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix('#') else { continue };
        let rest = rest.trim();
        if let Some(s) = rest.strip_prefix("summary,") {
            let (k, v) = s.split_once(',').ok_or_else(|| bad(format!("summary line `{line}`")))?;
            sums.insert(k.to_string(), v.to_string());
        } else if let Some(v) = rest.strip_prefix("trussopt ") {
            version = v.to_string();
        } else if let Some((k, v)) = rest.split_once('=') {
            meta.insert(k.to_string(), v.to_string());
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.len() < FIXED_COLUMNS.len() || header.iter().take(5).ne(FIXED_COLUMNS) {
        return Err(bad(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut runs = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        runs.push(RunRecord {
            seed: num("seed", &rec[0])?,
            evaluations: num("evals", &rec[1])?,
            best_weight: num("best_weight", &rec[2])?,
            best_penalized: num("best_penalized", &rec[3])?,
            feasible: num("feasible", &rec[4])?,
            best_design: rec
                .iter()
                .skip(5)
                .map(|v| num("design", v))
                .collect::<Result<_>>()?,
            history: Vec::new(),
        });
    }

    let get = |k: &str| sums.get(k).map(String::as_str).ok_or_else(|| bad(format!("missing summary `{k}`")));
    let stats = CampaignStats {
        runs: num("runs", get("runs")?)?,
        feasible_runs: num("feasible_runs", get("feasible_runs")?)?,
        infeasible_runs: num("infeasible_runs", get("infeasible_runs")?)?,
        best: opt_num("best", get("best")?)?,
        mean: opt_num("mean", get("mean")?)?,
        std: opt_num("std", get("std")?)?,
        evaluations_per_run: num("evaluations_per_run", get("evaluations_per_run")?)?,
        wall_time_secs: num("wall_time_secs", get("wall_time_secs")?)?,
    };
    Ok(ParsedReport {
        version,
        metadata: meta,
        stats,
        runs,
    })
}

/// Reads a CSV or JSON report written by [`emit_report`].
pub fn read_report(path: &Path) -> Result<ParsedReport> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    if text.trim_start().starts_with('{') {
        #[derive(Deserialize)]
        struct Raw {
            version: String,
            config: super::ExperimentConfig,
            budget: usize,
            stats: CampaignStats,
            runs: Vec<RunRecord>,
        }
        let raw: Raw = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        let mut metadata = BTreeMap::new();
        metadata.insert("problem".into(), raw.config.problem.clone());
        metadata.insert("algorithm".into(), raw.config.algorithm.to_string());
        metadata.insert("mode".into(), raw.config.mode.to_string());
        metadata.insert("runs".into(), raw.config.runs.to_string());
        metadata.insert("base_seed".into(), raw.config.base_seed.to_string());
        metadata.insert("budget".into(), raw.budget.to_string());
        Ok(ParsedReport {
            version: raw.version,
            metadata,
            stats: raw.stats,
            runs: raw.runs,
        })
    } else {
        parse_csv_report(&text)
    }
}
