//! Command-line front end: the `.ck` document format, subcommands and
//! report rendering.

pub mod commands;
pub mod document;
pub mod report;

pub use commands::{CommandError, IndexOptions, Outcome};
pub use document::{parse_document, CkDocument, DocumentError, EndoBlock, Position};
pub use report::{parse_kv, KvError, Report, Status};
