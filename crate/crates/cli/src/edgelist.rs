//! Whitespace-separated `src dst` edge lists with `#` comment lines.

use std::path::Path;

use robustopt_core::influence::DirectedGraph;

use crate::error::EdgeListError;

#[derive(Debug, Clone)]
pub struct EdgeList {
    pub graph: DirectedGraph,
    /// Original id of each dense node index, ascending.
    pub ids: Vec<u64>,
}

/// Parses edge-list text. Node ids are remapped to `0..n` in ascending order
/// of the original ids, and repeated edges collapse to one.
pub fn parse_edge_list(path: &Path, text: &str) -> Result<EdgeList, EdgeListError> {
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let malformed = || EdgeListError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            content: line.to_string(),
        };
        let mut fields = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(malformed());
        };
        let src: u64 = a.parse().map_err(|_| malformed())?;
        let dst: u64 = b.parse().map_err(|_| malformed())?;
        raw.push((src, dst));
    }
    if raw.is_empty() {
        return Err(EdgeListError::Empty { path: path.to_path_buf() });
    }

    let mut ids: Vec<u64> = raw.iter().flat_map(|&(s, d)| [s, d]).collect();
    ids.sort_unstable();
    ids.dedup();
    let dense = |id: u64| ids.binary_search(&id).expect("id collected above") as u32;
    let edges = raw.iter().map(|&(s, d)| (dense(s), dense(d))).collect();
    let graph = DirectedGraph::new(ids.len(), edges).map_err(|source| EdgeListError::Graph {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(EdgeList { graph, ids })
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<EdgeList, EdgeListError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| EdgeListError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_edge_list(path, &text)
}
