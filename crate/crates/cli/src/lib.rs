//! JSON operator documents in, JSON or CSV reports out.

pub mod csv_out;
pub mod document;
pub mod error;
pub mod format;
pub mod report;
pub mod run;

pub use csv_out::to_csv;
pub use document::{parse_document, Document};
pub use error::{CliError, CliResult};
pub use format::{to_json, Real};
pub use report::{Command, Params, Report, Results};
pub use run::run;
