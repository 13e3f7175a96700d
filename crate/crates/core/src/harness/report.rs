//! The stable report schema and its JSON, CSV and plot-data renderings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::analyze::AnalysisReport;
use super::simulate::{CoverageReport, PivotUniformity, SigmaMean, SizeCoverage, CLASSICAL_KNOWN_SIGMA, CLASSICAL_T};
use crate::error::{Error, Result};

/// Shortest round-trip decimal, in exponent form when very small or large.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// An extended real. Infinities are written as the strings `"inf"` and
/// `"-inf"`, since JSON has no literal for them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            v if v == f64::INFINITY => s.serialize_str("inf"),
            v if v == f64::NEG_INFINITY => s.serialize_str("-inf"),
            v => s.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(ExtReal(v)),
            Raw::Text(t) => match t.as_str() {
                "inf" => Ok(ExtReal(f64::INFINITY)),
                "-inf" => Ok(ExtReal(f64::NEG_INFINITY)),
                other => Err(serde::de::Error::custom(format!("expected a number, got '{other}'"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub model: Vec<String>,
    pub size: usize,
    pub score: f64,
    pub rss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEntry {
    pub name: String,
    pub method: String,
    pub lower: ExtReal,
    pub upper: ExtReal,
    pub point: f64,
    pub pivot: Option<f64>,
    pub sigma_used: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub target: String,
    pub strategy: String,
    pub coverage: f64,
    pub stderr: f64,
    pub relative_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub size: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionEntry {
    pub target: String,
    pub intervals: Vec<[ExtReal; 2]>,
}

/// Simulation extras beyond the common schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationDetails {
    pub methods: Vec<String>,
    pub sigma_contribution: Option<f64>,
    pub size_coverage: Vec<SizeCoverage>,
    pub pivot_ks: Vec<PivotUniformity>,
    pub sigma_means: Vec<SigmaMean>,
    pub successful_reps: usize,
    pub failed_reps: usize,
    pub failure_messages: Vec<String>,
    pub unbounded_intervals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: serde_json::Value,
    pub selected_model: Vec<String>,
    pub scores: Vec<ScoreEntry>,
    pub targets: Vec<TargetEntry>,
    pub coverage: Vec<CoverageRow>,
    pub histogram: Vec<HistogramRow>,
    pub excluded_regions: Vec<RegionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationDetails>,
}

fn region_entry(target: &str, intervals: &[(f64, f64)]) -> RegionEntry {
    RegionEntry {
        target: target.to_string(),
        intervals: intervals.iter().map(|&(lo, hi)| [ExtReal(lo), ExtReal(hi)]).collect(),
    }
}

impl Report {
    pub fn empty(config: serde_json::Value) -> Self {
        Report {
            config,
            selected_model: Vec::new(),
            scores: Vec::new(),
            targets: Vec::new(),
            coverage: Vec::new(),
            histogram: Vec::new(),
            excluded_regions: Vec::new(),
            simulation: None,
        }
    }

    pub fn from_analysis(a: &AnalysisReport) -> Self {
        let mut r = Report::empty(serde_json::to_value(&a.options).expect("options serialize"));
        r.selected_model = a.selected_model.clone();
        r.scores = a
            .scores
            .iter()
            .map(|s| ScoreEntry {
                model: s.model.clone(),
                size: s.size,
                score: s.score,
                rss: s.rss,
            })
            .collect();
        r.targets = a
            .intervals
            .iter()
            .map(|t| TargetEntry {
                name: t.target.clone(),
                method: t.method.clone(),
                lower: ExtReal(t.ci.lower),
                upper: ExtReal(t.ci.upper),
                point: t.ci.point_estimate,
                pivot: t.ci.pivot,
                sigma_used: t.ci.sigma_used,
            })
            .collect();
        r.excluded_regions = a
            .excluded_regions
            .iter()
            .map(|e| region_entry(&e.target, e.intervals.intervals()))
            .collect();
        r
    }

    pub fn from_coverage(c: &CoverageReport) -> Self {
        let mut r = Report::empty(serde_json::to_value(&c.config).expect("config serializes"));
        r.coverage = c
            .coverage
            .iter()
            .map(|e| CoverageRow {
                target: e.target.clone(),
                strategy: e.strategy.clone(),
                coverage: e.coverage,
                stderr: e.stderr,
                relative_loss: e.relative_loss,
            })
            .collect();
        r.histogram = c
            .histogram
            .iter()
            .map(|h| HistogramRow {
                size: h.size,
                count: h.count,
            })
            .collect();
        r.simulation = Some(SimulationDetails {
            methods: c.methods.clone(),
            sigma_contribution: c.sigma_contribution,
            size_coverage: c.size_coverage.clone(),
            pivot_ks: c.pivot_ks.clone(),
            sigma_means: c.sigma_means.clone(),
            successful_reps: c.successful_reps,
            failed_reps: c.failures.len(),
            failure_messages: c.failures.iter().map(|f| format!("rep {}: {}", f.rep, f.message)).collect(),
            unbounded_intervals: c.unbounded_intervals,
        });
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("report: {e}")))
    }

    /// One row per target interval, or per coverage entry for simulations.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        if !self.coverage.is_empty() {
            w.write_record(["target", "strategy", "coverage", "stderr", "relative_loss"]).unwrap();
            for c in &self.coverage {
                w.write_record([
                    c.target.clone(),
                    c.strategy.clone(),
                    format_number(c.coverage),
                    format_number(c.stderr),
                    format_number(c.relative_loss),
                ])
                .unwrap();
            }
        } else {
            w.write_record(["name", "method", "lower", "upper", "point", "pivot", "sigma_used"]).unwrap();
            for t in &self.targets {
                w.write_record([
                    t.name.clone(),
                    t.method.clone(),
                    format_number(t.lower.0),
                    format_number(t.upper.0),
                    format_number(t.point),
                    t.pivot.map(format_number).unwrap_or_default(),
                    format_number(t.sigma_used),
                ])
                .unwrap();
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
    }

    /// Tab-separated tables keyed by file name.
    ///
    /// `coverage_by_point.tsv` has one row per evaluation point with columns
    /// `point`, `classical_t`, and one per corrected strategy;
    /// `classical_by_point.tsv` compares the two classical intervals;
    /// `size_histogram.tsv` and `coverage_by_size.tsv` break results down by
    /// selected model size; `intervals.tsv` lists target intervals.
    pub fn plot_tables(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let corrected: Vec<&str> = self
            .simulation
            .as_ref()
            .map(|s| s.methods.iter().filter(|m| m.starts_with("corrected:")).map(String::as_str).collect())
            .unwrap_or_default();
        let points: Vec<&str> = {
            let mut seen: Vec<&str> = Vec::new();
            for c in &self.coverage {
                if c.target.starts_with("point") && !seen.contains(&c.target.as_str()) {
                    seen.push(&c.target);
                }
            }
            seen
        };
        let value = |target: &str, strategy: &str| {
            self.coverage
                .iter()
                .find(|c| c.target == target && c.strategy == strategy)
                .map_or(f64::NAN, |c| c.coverage)
        };
        if let Some(sim) = &self.simulation {
            let mut t = String::from("point\tclassical_t");
            for m in &corrected {
                write!(t, "\t{m}").unwrap();
            }
            t.push('\n');
            let mut classical = format!("point\t{CLASSICAL_T}\t{CLASSICAL_KNOWN_SIGMA}\n");
            for (k, p) in points.iter().enumerate() {
                write!(t, "{}\t{}", k + 1, value(p, CLASSICAL_T)).unwrap();
                for m in &corrected {
                    write!(t, "\t{}", value(p, m)).unwrap();
                }
                t.push('\n');
                writeln!(classical, "{}\t{}\t{}", k + 1, value(p, CLASSICAL_T), value(p, CLASSICAL_KNOWN_SIGMA)).unwrap();
            }
            out.push(("coverage_by_point.tsv".to_string(), t));
            out.push(("classical_by_point.tsv".to_string(), classical));

            let mut h = String::from("size\tcount\n");
            for row in &self.histogram {
                writeln!(h, "{}\t{}", row.size, row.count).unwrap();
            }
            out.push(("size_histogram.tsv".to_string(), h));

            let mut s = String::from("size\tstrategy\tcoverage\ttrials\n");
            for row in &sim.size_coverage {
                writeln!(s, "{}\t{}\t{}\t{}", row.size, row.strategy, row.coverage, row.trials).unwrap();
            }
            out.push(("coverage_by_size.tsv".to_string(), s));
        }
        if !self.targets.is_empty() {
            let mut t = String::from("target\tmethod\tlower\tupper\tpoint\n");
            for row in &self.targets {
                writeln!(t, "{}\t{}\t{}\t{}\t{}", row.name, row.method, row.lower.0, row.upper.0, row.point).unwrap();
            }
            out.push(("intervals.tsv".to_string(), t));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    PlotData,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "plotdata" => Ok(ReportFormat::PlotData),
            other => Err(Error::InvalidInput(format!("unknown format '{other}' (json, csv or plotdata)"))),
        }
    }
}

/// Writes the report into `dir` and returns the files created.
pub fn emit_report(report: &Report, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let files: Vec<(String, String)> = match format {
        ReportFormat::Json => vec![("report.json".into(), report.to_json())],
        ReportFormat::Csv => vec![("report.csv".into(), report.to_csv())],
        ReportFormat::PlotData => report.plot_tables(),
    };
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}
