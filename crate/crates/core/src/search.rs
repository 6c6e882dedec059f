//! Point-to-point queries: A* with reopening, and plain Dijkstra.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::graph::{Graph, VertexId, Weight};
use crate::heuristics::{Heuristic, OpCounters};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("query endpoint {0} is out of range")]
pub struct SearchError(pub VertexId);

#[derive(Clone, Debug, Default, PartialEq)]
pub struct QueryResult {
    /// `None` when the target is unreachable.
    pub distance: Option<Weight>,
    /// Source to target inclusive; empty when unreachable.
    pub path: Vec<VertexId>,
    /// Distinct vertices expanded at least once.
    pub settled: u64,
    /// Total expansions, counting re-expansions.
    pub expanded: u64,
    /// Expansions of a vertex that had already been expanded.
    pub reopened: u64,
    pub heuristic_evals: u64,
    pub op_totals: OpCounters,
}

impl QueryResult {
    /// Checks that the path walks graph edges from `source` to `target` and
    /// that its weight equals the reported distance.
    pub fn validate_path(&self, g: &Graph, source: VertexId, target: VertexId) -> bool {
        let Some(distance) = self.distance else {
            return self.path.is_empty();
        };
        if self.path.first() != Some(&source) || self.path.last() != Some(&target) {
            return false;
        }
        let mut total = 0.0;
        for pair in self.path.windows(2) {
            match g.edge_weight(pair[0], pair[1]) {
                Some(w) => total += w,
                None => return false,
            }
        }
        total == distance
    }
}

/// Min-heap entry on `(f, -g, vertex)`: lowest estimate first, then the
/// deeper entry, then the smaller id.
#[derive(Clone, Copy, Debug)]
struct Frontier {
    f: Weight,
    g: Weight,
    vertex: VertexId,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Frontier {}
impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

fn check(g: &Graph, v: VertexId) -> Result<(), SearchError> {
    if g.contains(v) {
        Ok(())
    } else {
        Err(SearchError(v))
    }
}

fn unwind(parent: &[Option<VertexId>], target: VertexId) -> Vec<VertexId> {
    let mut path = vec![target];
    let mut cur = target;
    while let Some(p) = parent[cur.index()] {
        path.push(p);
        cur = p;
    }
    path.reverse();
    path
}

/// A* from `source` to `target`.
///
/// The heuristic only has to be admissible. A vertex that was already expanded
/// is pushed again whenever a strictly shorter path to it turns up, so results
/// stay exact under inconsistent heuristics. The heuristic is evaluated each
/// time a vertex is (re)inserted into the frontier; nothing is cached.
pub fn astar<H: Heuristic>(
    g: &Graph,
    source: VertexId,
    target: VertexId,
    h: &H,
) -> Result<QueryResult, SearchError> {
    check(g, source)?;
    check(g, target)?;
    let n = g.vertex_count();
    let mut best = vec![Weight::INFINITY; n];
    let mut parent: Vec<Option<VertexId>> = vec![None; n];
    let mut expanded_once = vec![false; n];
    let mut result = QueryResult::default();
    let mut heap = BinaryHeap::new();

    let estimate = |v: VertexId, result: &mut QueryResult| {
        let e = h.evaluate(v, target);
        result.heuristic_evals += 1;
        result.op_totals += e.counters;
        e.value
    };

    best[source.index()] = 0.0;
    let f = estimate(source, &mut result);
    heap.push(Frontier {
        f,
        g: 0.0,
        vertex: source,
    });

    while let Some(Frontier {
        g: gu, vertex: u, ..
    }) = heap.pop()
    {
        if gu > best[u.index()] {
            continue;
        }
        result.expanded += 1;
        if std::mem::replace(&mut expanded_once[u.index()], true) {
            result.reopened += 1;
        } else {
            result.settled += 1;
        }
        if u == target {
            result.distance = Some(gu);
            result.path = unwind(&parent, target);
            return Ok(result);
        }
        for (v, w) in g.neighbors(u) {
            let gv = gu + w;
            if gv < best[v.index()] {
                best[v.index()] = gv;
                parent[v.index()] = Some(u);
                let hv = estimate(v, &mut result);
                heap.push(Frontier {
                    f: gv + hv,
                    g: gv,
                    vertex: v,
                });
            }
        }
    }
    Ok(result)
}

/// Dijkstra from `source`, stopping once `target` is settled. Ties go to the
/// smaller vertex id, matching [`astar`] with a zero heuristic.
pub fn dijkstra_query(
    g: &Graph,
    source: VertexId,
    target: VertexId,
) -> Result<QueryResult, SearchError> {
    check(g, source)?;
    check(g, target)?;
    let n = g.vertex_count();
    let mut best = vec![Weight::INFINITY; n];
    let mut parent: Vec<Option<VertexId>> = vec![None; n];
    let mut done = vec![false; n];
    let mut result = QueryResult::default();
    let mut heap = BinaryHeap::new();
    best[source.index()] = 0.0;
    heap.push(Frontier {
        f: 0.0,
        g: 0.0,
        vertex: source,
    });
    while let Some(Frontier {
        g: du, vertex: u, ..
    }) = heap.pop()
    {
        if done[u.index()] || du > best[u.index()] {
            continue;
        }
        done[u.index()] = true;
        result.settled += 1;
        result.expanded += 1;
        if u == target {
            result.distance = Some(du);
            result.path = unwind(&parent, target);
            return Ok(result);
        }
        for (v, w) in g.neighbors(u) {
            let dv = du + w;
            if !done[v.index()] && dv < best[v.index()] {
                best[v.index()] = dv;
                parent[v.index()] = Some(u);
                heap.push(Frontier {
                    f: dv,
                    g: dv,
                    vertex: v,
                });
            }
        }
    }
    Ok(result)
}
