//! The directed import dependency graph.
//!
//! Nodes are repository files; a resolved import (importer A, target B)
//! becomes the edge `(B, A)` — dependency first, dependent second — so a
//! topological order that puts `u` before `v` for every edge `(u, v)` puts
//! dependencies before the files that import them. Node ids are the rank
//! of each path in lexicographic order, so identical snapshots always get
//! identical ids.

use std::collections::BTreeSet;

use crate::lang::LanguageRegistry;

use super::imports::{extract_imports, resolve_import, ExtractionBackend};
use super::vfs::RepoSnapshot;
use super::RepoError;

/// Dense node id; the rank of the node's path in lexicographic order.
pub type NodeId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportGraph {
    /// Sorted paths; index is the node id.
    nodes: Vec<String>,
    /// Directed edges `(u, v)`: `u` is imported by `v`.
    edges: BTreeSet<(NodeId, NodeId)>,
}

impl ImportGraph {
    /// Build from parts, validating endpoints and rejecting self-loops.
    pub fn new(
        mut nodes: Vec<String>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, RepoError> {
        nodes.sort();
        for pair in nodes.windows(2) {
            if pair[0] == pair[1] {
                return Err(RepoError::MalformedGraph(format!(
                    "duplicate node {:?}",
                    pair[0]
                )));
            }
        }
        let n = nodes.len() as u32;
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(RepoError::MalformedGraph(format!(
                    "edge ({u},{v}) references a missing node"
                )));
            }
            if u == v {
                return Err(RepoError::MalformedGraph(format!(
                    "self-loop on node {u} ({})",
                    nodes[u as usize]
                )));
            }
            set.insert((u, v));
        }
        Ok(ImportGraph { nodes, edges: set })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn paths(&self) -> &[String] {
        &self.nodes
    }

    pub fn path(&self, id: NodeId) -> &str {
        &self.nodes[id as usize]
    }

    pub fn node_id(&self, path: &str) -> Option<NodeId> {
        self.nodes
            .binary_search_by(|p| p.as_str().cmp(path))
            .ok()
            .map(|i| i as NodeId)
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.edges.contains(&(u, v))
    }

    /// Serialize as tab-separated lines: `u<TAB>v` per edge over node
    /// paths, plus one bare line per node with no incident edges.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let mut touched = vec![false; self.nodes.len()];
        for (u, v) in &self.edges {
            touched[*u as usize] = true;
            touched[*v as usize] = true;
            out.push_str(self.path(*u));
            out.push('\t');
            out.push_str(self.path(*v));
            out.push('\n');
        }
        for (i, path) in self.nodes.iter().enumerate() {
            if !touched[i] {
                out.push_str(path);
                out.push('\n');
            }
        }
        out
    }

    /// Parse the `to_tsv` format. Nodes come from edge endpoints and bare
    /// lines; self-loops and lines with more than one tab are malformed.
    pub fn from_tsv(text: &str) -> Result<Self, RepoError> {
        let mut names: BTreeSet<String> = BTreeSet::new();
        let mut edge_names: Vec<(String, String)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let first = parts.next().unwrap_or_default().to_string();
            match (parts.next(), parts.next()) {
                (None, _) => {
                    names.insert(first);
                }
                (Some(second), None) => {
                    if first == second {
                        return Err(RepoError::MalformedGraph(format!(
                            "self-loop at line {}",
                            lineno + 1
                        )));
                    }
                    names.insert(first.clone());
                    names.insert(second.to_string());
                    edge_names.push((first, second.to_string()));
                }
                (Some(_), Some(_)) => {
                    return Err(RepoError::MalformedGraph(format!(
                        "too many fields at line {}",
                        lineno + 1
                    )));
                }
            }
        }
        let nodes: Vec<String> = names.into_iter().collect();
        let id = |name: &str| -> NodeId {
            nodes.binary_search_by(|p| p.as_str().cmp(name)).unwrap() as NodeId
        };
        let edges: Vec<(NodeId, NodeId)> = edge_names.iter().map(|(u, v)| (id(u), id(v))).collect();
        ImportGraph::new(nodes, edges)
    }
}

/// Construct the import graph of a snapshot over the supported languages.
///
/// Nodes are the snapshot's files whose language is registered with an
/// import style; every resolved import adds a dependency→dependent edge.
/// Self-imports are dropped and parallel edges collapse.
pub fn build_graph(
    snapshot: &RepoSnapshot,
    langs: &LanguageRegistry,
    backend: ExtractionBackend,
) -> ImportGraph {
    let vfs = snapshot.vfs();
    let nodes: Vec<String> = snapshot
        .files()
        .keys()
        .filter(|p| {
            langs
                .of_path(p)
                .map(|s| s.import_style != crate::lang::ImportStyle::None)
                .unwrap_or(false)
        })
        .cloned()
        .collect();
    let graph_nodes = nodes.clone();
    let mut edges: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let id_of = |path: &str| -> Option<NodeId> {
        graph_nodes
            .binary_search_by(|p| p.as_str().cmp(path))
            .ok()
            .map(|i| i as NodeId)
    };
    for path in &nodes {
        let importer_id = id_of(path).expect("node exists");
        let spec = langs.of_path(path).expect("language known");
        let content = vfs.read(path).expect("file exists");
        for r in extract_imports(path, content, spec, backend) {
            if let Some(target) = resolve_import(&r, &vfs, langs) {
                if target == *path {
                    continue;
                }
                if let Some(target_id) = id_of(&target) {
                    edges.insert((target_id, importer_id));
                }
            }
        }
    }
    ImportGraph {
        nodes: graph_nodes,
        edges,
    }
}
