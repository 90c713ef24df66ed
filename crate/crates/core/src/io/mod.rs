//! Problem files, field dumps and report writers.

pub mod binary;
pub mod expr;
pub mod output;
pub mod problem;

pub use binary::{read_field, write_field, FieldDump};
pub use expr::Expr;
pub use output::{solution_csv, sweep_summary_csv, write_json};
pub use problem::{FieldSource, ProblemFile};
