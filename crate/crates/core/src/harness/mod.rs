//! Data ingestion, simulation studies, real-data analysis and reporting.

pub mod analyze;
pub mod config;
pub mod data;
pub mod report;
pub mod simulate;

pub use analyze::{analyze, analyze_csv, AnalysisOptions, AnalysisReport};
pub use config::SimulationConfig;
pub use report::{emit_report, Report, ReportFormat};
pub use simulate::{generate_design, simulate_coverage, CoverageReport};
