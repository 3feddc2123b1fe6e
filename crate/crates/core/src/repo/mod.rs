//! Repository-level analysis: a virtual file system over repository
//! snapshots, import extraction and resolution, and the directed import
//! dependency graph.

pub mod graph;
pub mod imports;
pub mod vfs;

pub use graph::{build_graph, ImportGraph};
pub use imports::{extract_imports, resolve_import, ExtractionBackend, ImportRef, SpecifierKind};
pub use vfs::{RepoSnapshot, Vfs};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("invalid repo path {path:?}: {reason}")]
    InvalidPath { path: String, reason: &'static str },
    #[error("duplicate normalized path {0:?} in snapshot")]
    DuplicatePath(String),
    #[error("malformed graph: {0}")]
    MalformedGraph(String),
}
