//! Analysis pipeline: ingest exported sessions, exclude invalid ones,
//! average trust per group, fit OLS and ARIMAX models, cross-validate
//! between groups and render tables and figure data.
//!
//! ```text
//! export (NDJSON) -> ingest -> exclude -> build_series -> run_analysis -> render_tables
//! ```

pub mod analysis;
pub mod error;
pub mod exclude;
pub mod ingest;
pub mod render;
pub mod series;
pub mod simulate;

pub use analysis::{
    run_analysis, AnalysisConfig, AnalysisReport, GroupAnalysis, ResidualDiagnostics, RmseMatrix,
};
pub use error::PipelineError;
pub use exclude::{exclude, verdict, ExclusionReason, ExclusionReport, ExclusionThresholds};
pub use ingest::{ingest, ingest_str, SessionData};
pub use render::{render_tables, write_atomic};
pub use series::build_series;
pub use simulate::{export_text, simulate_cohort, BotSession, CohortConfig};
