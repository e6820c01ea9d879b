//! Command-line front end for the insider no-arbitrage engine: model files,
//! full analyses, bundled examples and seeded fuzzing, rendered as text
//! tables or JSON.

pub mod analysis;
pub mod error;
pub mod examples;
pub mod model;
pub mod report;

pub use analysis::{run_analyze, AnalyzeOptions, FuzzRequest, MeasureKind};
pub use error::CliError;
pub use examples::{run_examples, ExampleParams};
pub use model::{parse_model, parse_model_str, ModelError, ParsedModel};
pub use report::{render, render_report, AnalysisReport, Format};
