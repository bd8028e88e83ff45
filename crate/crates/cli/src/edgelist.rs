//! File IO for the whitespace edge-list format (`i j [w]` lines, optional
//! `# n=<int>` header). Parsing itself lives in the core crate; this module
//! adds path context.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use graphdeconv_core::graphs::{parse_edge_list, Graph};

#[derive(Debug, thiserror::Error)]
pub enum EdgeListError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: graphdeconv_core::Error,
    },
}

pub fn load_graph(path: &Path) -> Result<Graph, EdgeListError> {
    let text = fs::read_to_string(path).map_err(|source| EdgeListError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_edge_list(&text).map_err(|source| EdgeListError::Parse {
        path: path.display().to_string(),
        source,
    })
}

/// Serializes a graph with an explicit node-count header, so isolated nodes
/// survive a round trip.
pub fn to_edge_list(graph: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# n={}", graph.n());
    for e in graph.edges() {
        if e.weight == 1.0 {
            let _ = writeln!(out, "{} {}", e.u, e.v);
        } else {
            let _ = writeln!(out, "{} {} {}", e.u, e.v, e.weight);
        }
    }
    out
}

pub fn save_graph(path: &Path, graph: &Graph) -> Result<(), EdgeListError> {
    fs::write(path, to_edge_list(graph)).map_err(|source| EdgeListError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_graph() {
        let g = Graph::new(6, [(0, 1, 1.0), (2, 3, 2.5)]).unwrap();
        let text = to_edge_list(&g);
        let back = parse_edge_list(&text).unwrap();
        assert_eq!(g, back);
    }
}
