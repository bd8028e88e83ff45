//! Undirected weighted graphs and graph-shift operators.
//!
//! Node indices are 0-based everywhere. Edges are stored with `u < v`, sorted,
//! at most once per unordered pair, with strictly positive finite weights and
//! no self-loops. Both `Graph` and `ShiftOperator` are immutable after
//! construction and safe to share across threads.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::ToString;
use alloc::{vec, vec::Vec};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::mat::Mat;
use crate::Result;

/// Undirected weighted edge, normalized so that `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Undirected weighted graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    weighted: bool,
}

impl Graph {
    /// Validates and normalizes an edge list into a `Graph`.
    ///
    /// Rejects self-loops, out-of-range indices, non-positive or non-finite
    /// weights, and repeated unordered pairs.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Graph> {
        if n == 0 {
            return Err(Error::InvalidParameter("graph needs at least one node".into()));
        }
        let mut norm: Vec<Edge> = Vec::new();
        for (i, j, w) in edges {
            if i == j {
                return Err(Error::InvalidParameter(format!("self-loop at node {i}")));
            }
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i},{j}) out of range for n={n}"
                )));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i},{j}) has non-positive or non-finite weight {w}"
                )));
            }
            let (u, v) = if i < j { (i, j) } else { (j, i) };
            norm.push(Edge { u, v, weight: w });
        }
        norm.sort_by_key(|e| (e.u, e.v));
        for pair in norm.windows(2) {
            if pair[0].u == pair[1].u && pair[0].v == pair[1].v {
                return Err(Error::InvalidParameter(format!(
                    "duplicate edge ({},{})",
                    pair[0].u, pair[0].v
                )));
            }
        }
        let weighted = norm.iter().any(|e| e.weight != 1.0);
        Ok(Graph {
            n,
            edges: norm,
            weighted,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            d[e.u] += e.weight;
            d[e.v] += e.weight;
        }
        d
    }

    pub fn adjacency_matrix(&self) -> Mat {
        let mut a = Mat::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.u, e.v)] = e.weight;
            a[(e.v, e.u)] = e.weight;
        }
        a
    }

    /// True iff the graph has a single connected component (BFS).
    /// A single node with no edges counts as connected.
    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(0);
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }
}

/// Erdos-Renyi random graph: each unordered pair becomes a unit-weight edge
/// independently with probability `p`. Bit-identical output per seed.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "erdos_renyi needs n >= 2, got {n}"
        )));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "erdos_renyi needs 0 < p <= 1, got {p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    Graph::new(n, edges)
}

/// Parses the whitespace-separated edge-list text format: one `i j [w]` edge
/// per line (weight defaults to 1.0), `#`-prefixed comment lines, and an
/// optional `# n=<int>` header fixing the node count. Without a header,
/// `n = 1 + max index`. Duplicate edges with equal weight are deduplicated;
/// conflicting duplicates and self-loops are errors naming the line.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut n_override: Option<usize> = None;
    let mut raw: Vec<(usize, usize, f64, usize)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("n=") {
                let n: usize = v.trim().parse().map_err(|_| Error::EdgeList {
                    line: lineno,
                    msg: format!("bad node-count header {rest:?}"),
                })?;
                n_override = Some(n);
            }
            continue;
        }
        let mut it = line.split_whitespace();
        let i: usize = it
            .next()
            .unwrap()
            .parse()
            .map_err(|_| Error::EdgeList {
                line: lineno,
                msg: "bad source index".to_string(),
            })?;
        let j: usize = it
            .next()
            .ok_or(Error::EdgeList {
                line: lineno,
                msg: "missing target index".to_string(),
            })?
            .parse()
            .map_err(|_| Error::EdgeList {
                line: lineno,
                msg: "bad target index".to_string(),
            })?;
        let w: f64 = match it.next() {
            Some(tok) => tok.parse().map_err(|_| Error::EdgeList {
                line: lineno,
                msg: "bad weight".to_string(),
            })?,
            None => 1.0,
        };
        if it.next().is_some() {
            return Err(Error::EdgeList {
                line: lineno,
                msg: "trailing tokens after weight".to_string(),
            });
        }
        if i == j {
            return Err(Error::EdgeList {
                line: lineno,
                msg: format!("self-loop at node {i}"),
            });
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::EdgeList {
                line: lineno,
                msg: format!("non-positive or non-finite weight {w}"),
            });
        }
        let (u, v) = if i < j { (i, j) } else { (j, i) };
        raw.push((u, v, w, lineno));
    }

    // Dedup: equal weights collapse, conflicting weights are an error.
    raw.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.3.cmp(&b.3)));
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for &(u, v, w, lineno) in &raw {
        if let Some(&(pu, pv, pw)) = edges.last() {
            if pu == u && pv == v {
                if pw != w {
                    return Err(Error::EdgeList {
                        line: lineno,
                        msg: format!("duplicate edge ({u},{v}) with conflicting weight {w} (was {pw})"),
                    });
                }
                continue;
            }
        }
        edges.push((u, v, w));
    }

    let max_idx = edges.iter().map(|e| e.1).max();
    let n = match (n_override, max_idx) {
        (Some(n), Some(mx)) => {
            if mx >= n {
                return Err(Error::InvalidParameter(format!(
                    "header n={n} but edge references node {mx}"
                )));
            }
            n
        }
        (Some(n), None) => n,
        (None, Some(mx)) => mx + 1,
        (None, None) => {
            return Err(Error::InvalidParameter(
                "empty edge list with no node-count header".into(),
            ))
        }
    };
    Graph::new(n, edges)
}

/// Which matrix backs a shift operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftKind {
    Adjacency,
    NormalizedAdjacency,
    Custom,
}

/// Symmetric graph-shift operator: any symmetric matrix sharing the graph's
/// sparsity pattern. One application diffuses a signal one hop.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftOperator {
    matrix: Mat,
    kind: ShiftKind,
}

impl ShiftOperator {
    /// Plain adjacency shift `S = A`.
    pub fn adjacency(g: &Graph) -> ShiftOperator {
        ShiftOperator {
            matrix: g.adjacency_matrix(),
            kind: ShiftKind::Adjacency,
        }
    }

    /// Normalized adjacency `S = D^{-1/2} A D^{-1/2}`; eigenvalues lie in
    /// `[-1, 1]`. Errors if any node is isolated (zero degree): silently
    /// dropping nodes would desynchronize signal indices.
    pub fn normalized_adjacency(g: &Graph) -> Result<ShiftOperator> {
        let d = g.degrees();
        if let Some(node) = d.iter().position(|&di| di <= 0.0) {
            return Err(Error::IsolatedNode(node));
        }
        let inv_sqrt: Vec<f64> = d.iter().map(|&di| 1.0 / libm::sqrt(di)).collect();
        let mut m = Mat::zeros(g.n(), g.n());
        for e in g.edges() {
            let s = e.weight * inv_sqrt[e.u] * inv_sqrt[e.v];
            m[(e.u, e.v)] = s;
            m[(e.v, e.u)] = s;
        }
        Ok(ShiftOperator {
            matrix: m,
            kind: ShiftKind::NormalizedAdjacency,
        })
    }

    /// Wraps a caller-supplied symmetric matrix (checked to 1e-12 relative).
    pub fn custom(matrix: Mat) -> Result<ShiftOperator> {
        if matrix.nrows() != matrix.ncols() || !matrix.is_symmetric(1e-12) {
            return Err(Error::NotSymmetric);
        }
        Ok(ShiftOperator {
            matrix,
            kind: ShiftKind::Custom,
        })
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn kind(&self) -> ShiftKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}
