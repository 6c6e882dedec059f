//! Undirected, positive-weight graphs with dense zero-based vertex ids.
//!
//! Graphs are immutable once built. Besides [`Graph::from_edges`] there are two
//! synthetic families (lattices and random connected graphs) and readers for
//! the DIMACS `.gr` format and a plain edge list.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Edge weights and distances.
pub type Weight = f64;

/// Dense zero-based vertex index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for VertexId {
    fn from(i: usize) -> Self {
        VertexId(i as u32)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge ({u}, {v}) has an endpoint outside 0..{n}")]
    EndpointOutOfRange { u: usize, v: usize, n: usize },
    #[error("edge ({u}, {v}) has nonpositive weight {w}")]
    NonPositiveWeight { u: usize, v: usize, w: Weight },
    #[error("duplicate edge between {u} and {v}")]
    DuplicateEdge { u: usize, v: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("grid dimensions must be positive, got {rows}x{cols}")]
    ZeroDimension { rows: usize, cols: usize },
    #[error("graph needs at least one vertex")]
    Empty,
    #[error("{requested} extra edges requested but only {capacity} non-tree pairs exist")]
    ExtraEdgeCapacity { requested: usize, capacity: usize },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("header declares {declared} {what} but body has {found}")]
    CountMismatch {
        what: &'static str,
        declared: usize,
        found: usize,
    },
    #[error("graph is disconnected: vertex {0} is unreachable from vertex 0")]
    Disconnected(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GraphError {
    fn malformed(line: usize, msg: impl Into<String>) -> Self {
        GraphError::Malformed {
            line,
            msg: msg.into(),
        }
    }
}

/// Undirected graph stored as a compressed adjacency array.
///
/// Every edge `{u, v}` appears twice, once in each endpoint's neighbor list,
/// with the same weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    weights: Vec<Weight>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from undirected edges `(u, v, w)`.
    ///
    /// Neighbor lists are ordered by neighbor id so iteration order does not
    /// depend on input order.
    pub fn from_edges(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (usize, usize, Weight)>,
    ) -> Result<Graph, GraphError> {
        let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
        let mut half: Vec<(usize, usize, Weight)> = Vec::new();
        for (u, v, w) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(GraphError::EndpointOutOfRange {
                    u,
                    v,
                    n: vertex_count,
                });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if w <= 0.0 || !w.is_finite() {
                return Err(GraphError::NonPositiveWeight { u, v, w });
            }
            let key = (u.min(v), u.max(v));
            if seen.insert(key, ()).is_some() {
                return Err(GraphError::DuplicateEdge { u: key.0, v: key.1 });
            }
            half.push((u, v, w));
            half.push((v, u, w));
        }
        let edge_count = half.len() / 2;
        half.sort_by_key(|e| (e.0, e.1));

        let mut offsets = vec![0usize; vertex_count + 1];
        for &(u, _, _) in &half {
            offsets[u + 1] += 1;
        }
        for i in 0..vertex_count {
            offsets[i + 1] += offsets[i];
        }
        let targets = half.iter().map(|&(_, v, _)| VertexId::from(v)).collect();
        let weights = half.iter().map(|&(_, _, w)| w).collect();
        Ok(Graph {
            offsets,
            targets,
            weights,
            edge_count,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = VertexId> {
        (0..self.vertex_count()).map(VertexId::from)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.index() < self.vertex_count()
    }

    /// Neighbors of `v` with edge weights, ordered by neighbor id.
    #[inline]
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, Weight)> + '_ {
        let range = self.offsets[v.index()]..self.offsets[v.index() + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v.index() + 1] - self.offsets[v.index()]
    }

    /// Weight of edge `{u, v}`, if present.
    pub fn edge_weight(&self, u: VertexId, v: VertexId) -> Option<Weight> {
        let range = self.offsets[u.index()]..self.offsets[u.index() + 1];
        let slice = &self.targets[range.clone()];
        slice
            .binary_search(&v)
            .ok()
            .map(|i| self.weights[range.start + i])
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, Weight)> + '_ {
        self.vertices().flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| u < v)
                .map(move |(v, w)| (u, v, w))
        })
    }

    /// Whether every vertex is reachable from vertex 0.
    pub fn is_connected(&self) -> bool {
        self.first_unreachable().is_none()
    }

    fn first_unreachable(&self) -> Option<usize> {
        let n = self.vertex_count();
        if n == 0 {
            return None;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![VertexId(0)];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for (v, _) in self.neighbors(u) {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().position(|&s| !s)
    }

    fn require_connected(self) -> Result<Graph, GraphError> {
        match self.first_unreachable() {
            Some(v) => Err(GraphError::Disconnected(v)),
            None => Ok(self),
        }
    }

    /// Writes the graph in DIMACS `.gr` layout, both arc directions per edge.
    pub fn write_dimacs<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "p sp {} {}", self.vertex_count(), 2 * self.edge_count)?;
        for (u, v, w) in self.edges() {
            writeln!(out, "a {} {} {}", u.0 + 1, v.0 + 1, w)?;
            writeln!(out, "a {} {} {}", v.0 + 1, u.0 + 1, w)?;
        }
        Ok(())
    }
}

/// `rows x cols` 4-neighbor lattice with unit weights; vertex `r * cols + c`.
pub fn grid(rows: usize, cols: usize) -> Result<Graph, GraphError> {
    if rows == 0 || cols == 0 {
        return Err(GraphError::ZeroDimension { rows, cols });
    }
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1, 1.0));
            }
            if r + 1 < rows {
                edges.push((v, v + cols, 1.0));
            }
        }
    }
    Graph::from_edges(rows * cols, edges)
}

/// Random connected unit-weight graph: a uniform-attachment spanning tree
/// plus `extra_edges` distinct non-tree edges. Bit-deterministic per seed.
pub fn random_connected(n: usize, extra_edges: usize, seed: u64) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let capacity = n * (n - 1) / 2 - (n - 1);
    if extra_edges > capacity {
        return Err(GraphError::ExtraEdgeCapacity {
            requested: extra_edges,
            capacity,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut present = std::collections::HashSet::with_capacity(n + extra_edges);
    let mut edges = Vec::with_capacity(n - 1 + extra_edges);
    for v in 1..n {
        let u = rng.gen_range(0..v);
        present.insert((u, v));
        edges.push((u, v, 1.0));
    }

    // Rejection sampling is fine while the graph stays sparse; near capacity
    // enumerate the complement instead.
    if extra_edges * 2 <= capacity {
        while edges.len() < n - 1 + extra_edges {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a == b {
                continue;
            }
            let key = (a.min(b), a.max(b));
            if present.insert(key) {
                edges.push((key.0, key.1, 1.0));
            }
        }
    } else {
        let mut free: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|k| !present.contains(k))
            .collect();
        free.shuffle(&mut rng);
        edges.extend(free.into_iter().take(extra_edges).map(|(a, b)| (a, b, 1.0)));
    }
    Graph::from_edges(n, edges)
}

/// Parses a DIMACS shortest-path `.gr` stream.
///
/// Ids are shifted to zero-based. Arcs are symmetrized: reciprocal arcs merge
/// into one undirected edge and a lone arc is read as undirected. When the two
/// directions disagree the smaller weight is kept. Self-loop arcs are dropped.
pub fn load_dimacs<R: BufRead>(reader: R) -> Result<Graph, GraphError> {
    let mut header: Option<(usize, usize)> = None;
    let mut arcs = 0usize;
    let mut merged: HashMap<(usize, usize), Weight> = HashMap::new();

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let mut tok = line.split_ascii_whitespace();
        match tok.next() {
            None | Some("c") => continue,
            Some("p") => {
                if header.is_some() {
                    return Err(GraphError::malformed(lineno, "second problem line"));
                }
                if tok.next() != Some("sp") {
                    return Err(GraphError::malformed(lineno, "expected `p sp <n> <m>`"));
                }
                let n = parse_field::<usize>(tok.next(), lineno, "vertex count")?;
                let m = parse_field::<usize>(tok.next(), lineno, "arc count")?;
                header = Some((n, m));
            }
            Some("a") => {
                let (n, _) = header
                    .ok_or_else(|| GraphError::malformed(lineno, "arc before problem line"))?;
                let u = parse_field::<usize>(tok.next(), lineno, "tail")?;
                let v = parse_field::<usize>(tok.next(), lineno, "head")?;
                let w = parse_field::<Weight>(tok.next(), lineno, "weight")?;
                if tok.next().is_some() {
                    return Err(GraphError::malformed(lineno, "trailing tokens"));
                }
                if u == 0 || v == 0 || u > n || v > n {
                    return Err(GraphError::EndpointOutOfRange {
                        u: u.wrapping_sub(1),
                        v: v.wrapping_sub(1),
                        n,
                    });
                }
                if w <= 0.0 || !w.is_finite() {
                    return Err(GraphError::NonPositiveWeight {
                        u: u - 1,
                        v: v - 1,
                        w,
                    });
                }
                arcs += 1;
                if u == v {
                    continue;
                }
                let key = ((u - 1).min(v - 1), (u - 1).max(v - 1));
                merged
                    .entry(key)
                    .and_modify(|old| *old = old.min(w))
                    .or_insert(w);
            }
            Some(other) => {
                return Err(GraphError::malformed(
                    lineno,
                    format!("unknown line type `{other}`"),
                ))
            }
        }
    }

    let (n, m) = header.ok_or_else(|| GraphError::malformed(0, "missing problem line"))?;
    if arcs != m {
        return Err(GraphError::CountMismatch {
            what: "arcs",
            declared: m,
            found: arcs,
        });
    }
    let mut edges: Vec<_> = merged.into_iter().map(|((u, v), w)| (u, v, w)).collect();
    edges.sort_by_key(|e| (e.0, e.1));
    Graph::from_edges(n, edges)?.require_connected()
}

/// Parses a plain edge list: a `<n>` header line, then `u v [w]` per line
/// with zero-based ids. Missing weights default to 1. Lines starting with `#`
/// are ignored.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Graph, GraphError> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tok = trimmed.split_ascii_whitespace();
        match n {
            None => {
                n = Some(parse_field(tok.next(), lineno, "vertex count")?);
                if tok.next().is_some() {
                    return Err(GraphError::malformed(
                        lineno,
                        "header must be a single `<n>`",
                    ));
                }
            }
            Some(_) => {
                let u = parse_field::<usize>(tok.next(), lineno, "u")?;
                let v = parse_field::<usize>(tok.next(), lineno, "v")?;
                let w = match tok.next() {
                    Some(s) => parse_field::<Weight>(Some(s), lineno, "weight")?,
                    None => 1.0,
                };
                if tok.next().is_some() {
                    return Err(GraphError::malformed(lineno, "trailing tokens"));
                }
                edges.push((u, v, w));
            }
        }
    }
    let n = n.ok_or_else(|| GraphError::malformed(0, "missing vertex count header"))?;
    Graph::from_edges(n, edges)?.require_connected()
}

/// Reads either format, sniffing for a DIMACS `p` line among the leading
/// non-comment lines.
pub fn load_graph<R: BufRead>(mut reader: R) -> Result<Graph, GraphError> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let is_dimacs = text
        .lines()
        .map(str::trim_start)
        .find(|l| !l.is_empty() && !l.starts_with('c') && !l.starts_with('#'))
        .is_some_and(|l| l.starts_with("p ") || l.starts_with("a "));
    if is_dimacs {
        load_dimacs(text.as_bytes())
    } else {
        load_edge_list(text.as_bytes())
    }
}

fn parse_field<T: std::str::FromStr>(
    tok: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T, GraphError> {
    let tok = tok.ok_or_else(|| GraphError::malformed(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| GraphError::malformed(line, format!("bad {what} `{tok}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (0..n - 1).map(|i| (i, i + 1, 1.0))).unwrap()
    }

    fn adj(g: &Graph, v: usize) -> Vec<(u32, Weight)> {
        g.neighbors(VertexId::from(v))
            .map(|(u, w)| (u.0, w))
            .collect()
    }

    #[test]
    fn single_edge_is_symmetric() {
        let g = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(adj(&g, 0), vec![(1, 1.0)]);
        assert_eq!(adj(&g, 1), vec![(0, 1.0)]);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn path_fixture() {
        let g = path(6);
        assert_eq!(g.vertex_count(), 6);
        assert_eq!(g.edge_count(), 5);
        assert_eq!(adj(&g, 3), vec![(2, 1.0), (4, 1.0)]);
        assert!(g.is_connected());
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(
            Graph::from_edges(3, [(0, 1, 1.0), (0, 1, 2.0)]),
            Err(GraphError::DuplicateEdge { u: 0, v: 1 })
        ));
        assert!(matches!(
            Graph::from_edges(3, [(0, 1, 1.0), (1, 0, 1.0)]),
            Err(GraphError::DuplicateEdge { u: 0, v: 1 })
        ));
        assert!(matches!(
            Graph::from_edges(2, [(0, 2, 1.0)]),
            Err(GraphError::EndpointOutOfRange { .. })
        ));
        assert!(matches!(
            Graph::from_edges(2, [(0, 1, 0.0)]),
            Err(GraphError::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            Graph::from_edges(2, [(0, 1, -3.0)]),
            Err(GraphError::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            Graph::from_edges(2, [(1, 1, 1.0)]),
            Err(GraphError::SelfLoop(1))
        ));
    }

    #[test]
    fn dimacs_reciprocal_merge() {
        let g = load_dimacs("p sp 2 2\na 1 2 3\na 2 1 3".as_bytes()).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edge_weight(VertexId(0), VertexId(1)), Some(3.0));
    }

    #[test]
    fn dimacs_lone_arc_is_undirected() {
        let g = load_dimacs("c hi\np sp 2 1\na 2 1 4\n".as_bytes()).unwrap();
        assert_eq!(g.edge_weight(VertexId(0), VertexId(1)), Some(4.0));
        assert_eq!(g.edge_weight(VertexId(1), VertexId(0)), Some(4.0));
    }

    #[test]
    fn dimacs_errors() {
        assert!(matches!(
            load_dimacs("p sp 2 1\na 1 2 0".as_bytes()),
            Err(GraphError::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            load_dimacs("p sp 2 3\na 1 2 1".as_bytes()),
            Err(GraphError::CountMismatch { .. })
        ));
        assert!(matches!(
            load_dimacs("p sp 2 1\na 1 3 1".as_bytes()),
            Err(GraphError::EndpointOutOfRange { .. })
        ));
        assert!(matches!(
            load_dimacs("p sp 2 1\na 1 x 1".as_bytes()),
            Err(GraphError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            load_dimacs("p sp 3 1\na 1 2 1".as_bytes()),
            Err(GraphError::Disconnected(2))
        ));
        assert!(matches!(
            load_dimacs("a 1 2 1".as_bytes()),
            Err(GraphError::Malformed { .. })
        ));
    }

    #[test]
    fn dimacs_path_round_trips() {
        let p6 = path(6);
        let mut buf = Vec::new();
        p6.write_dimacs(&mut buf).unwrap();
        assert_eq!(load_dimacs(buf.as_slice()).unwrap(), p6);
        assert_eq!(load_graph(buf.as_slice()).unwrap(), p6);
    }

    #[test]
    fn edge_list_reader() {
        let g = load_graph("# p6\n6\n0 1\n1 2\n2 3 1\n3 4\n4 5 1.0\n".as_bytes()).unwrap();
        assert_eq!(g, path(6));
        assert!(matches!(
            load_edge_list("3\n0 1\n".as_bytes()),
            Err(GraphError::Disconnected(2))
        ));
    }

    #[test]
    fn grid_shapes() {
        assert_eq!(grid(1, 6).unwrap(), path(6));
        let square = grid(2, 2).unwrap();
        assert_eq!(square.edge_count(), 4);
        assert!(square.vertices().all(|v| square.degree(v) == 2));
        let g = grid(3, 3).unwrap();
        assert_eq!(g.vertex_count(), 9);
        // 3 rows x 2 horizontal + 2 x 3 vertical
        assert_eq!(g.edge_count(), 3 * 2 + 2 * 3);
        assert!(matches!(
            grid(0, 3),
            Err(GraphError::ZeroDimension { rows: 0, cols: 3 })
        ));
    }

    #[test]
    fn random_connected_cases() {
        let g = random_connected(1, 0, 5).unwrap();
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 0);

        let tree = random_connected(50, 0, 7).unwrap();
        assert_eq!(tree.edge_count(), 49);
        assert!(tree.is_connected());

        assert!(matches!(
            random_connected(10, 50, 3),
            Err(GraphError::ExtraEdgeCapacity {
                requested: 50,
                capacity: 36
            })
        ));
        let full = random_connected(10, 36, 3).unwrap();
        assert_eq!(full.edge_count(), 45);
    }

    #[test]
    fn random_connected_is_deterministic() {
        let a = random_connected(120, 80, 11).unwrap();
        let b = random_connected(120, 80, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_connected(120, 80, 12).unwrap());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn random_graphs_are_connected_and_symmetric(n in 1usize..80, extra in 0usize..60, seed: u64) {
                let cap = n * (n - 1) / 2 - (n - 1);
                let g = random_connected(n, extra.min(cap), seed).unwrap();
                prop_assert!(g.is_connected());
                prop_assert_eq!(g.edge_count(), n - 1 + extra.min(cap));
                for u in g.vertices() {
                    for (v, w) in g.neighbors(u) {
                        prop_assert_ne!(u, v);
                        prop_assert_eq!(g.edge_weight(v, u), Some(w));
                    }
                }
            }
        }
    }
}
