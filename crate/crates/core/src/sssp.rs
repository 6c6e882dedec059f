//! Dijkstra kernels: single-source, multi-source (nearest-source regions),
//! landmark-to-landmark distances, and an all-pairs oracle for tests.
//!
//! All kernels use a binary heap with lazy deletion. Ties between equal
//! tentative distances are broken by smaller vertex id so that runs are
//! reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{Graph, VertexId, Weight};

/// Default cap on vertex count for [`all_pairs_oracle`].
pub const ORACLE_CAP: usize = 5000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SsspError {
    #[error("vertex {0} is out of range")]
    OutOfRange(VertexId),
    #[error("source set is empty")]
    NoSources,
    #[error("vertex {0} appears more than once in the source set")]
    DuplicateSource(VertexId),
    #[error("all-pairs oracle limited to {cap} vertices, graph has {n}")]
    OracleCap { n: usize, cap: usize },
}

/// Kernel invocation counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KernelStats {
    /// Full-graph runs, single- or multi-source.
    pub full_runs: usize,
    /// Runs that stop once a fixed target set is settled.
    pub truncated_runs: usize,
    /// Vertices settled across all runs.
    pub settled: usize,
}

impl std::ops::AddAssign for KernelStats {
    fn add_assign(&mut self, o: Self) {
        self.full_runs += o.full_runs;
        self.truncated_runs += o.truncated_runs;
        self.settled += o.settled;
    }
}

/// Result of a (multi-)source shortest path tree computation.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMap {
    pub sources: Vec<VertexId>,
    /// `INFINITY` marks unreached vertices.
    pub dist: Vec<Weight>,
    /// The source whose region contains each vertex.
    pub owner: Vec<Option<VertexId>>,
    /// Predecessor on the shortest path tree; `None` at sources.
    pub parent: Vec<Option<VertexId>>,
}

impl DistanceMap {
    pub fn distance(&self, v: VertexId) -> Option<Weight> {
        let d = self.dist[v.index()];
        d.is_finite().then_some(d)
    }

    pub fn all_reached(&self) -> bool {
        self.dist.iter().all(|d| d.is_finite())
    }
}

/// Square row-major table of distances.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    data: Vec<Weight>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: Vec<Vec<Weight>>) -> DistanceMatrix {
        let size = rows.len();
        assert!(
            rows.iter().all(|r| r.len() == size),
            "matrix must be square"
        );
        DistanceMatrix {
            size,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub(crate) fn from_flat(size: usize, data: Vec<Weight>) -> DistanceMatrix {
        assert_eq!(data.len(), size * size);
        DistanceMatrix { size, data }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Weight {
        self.data[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[Weight] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    pub fn as_slice(&self) -> &[Weight] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Weight>> {
        (0..self.size).map(|i| self.row(i).to_vec()).collect()
    }
}

/// Heap entry ordered as a min-heap on `(dist, rank, vertex)`.
#[derive(Clone, Copy, Debug)]
struct Entry {
    dist: Weight,
    rank: u32,
    vertex: VertexId,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.rank.cmp(&self.rank))
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

fn check_vertex(g: &Graph, v: VertexId) -> Result<(), SsspError> {
    if g.contains(v) {
        Ok(())
    } else {
        Err(SsspError::OutOfRange(v))
    }
}

fn check_distinct(g: &Graph, set: &[VertexId]) -> Result<(), SsspError> {
    let mut seen = vec![false; g.vertex_count()];
    for &s in set {
        check_vertex(g, s)?;
        if std::mem::replace(&mut seen[s.index()], true) {
            return Err(SsspError::DuplicateSource(s));
        }
    }
    Ok(())
}

/// Exact distances from `source` to every vertex.
pub fn shortest_path_tree(g: &Graph, source: VertexId) -> Result<DistanceMap, SsspError> {
    check_vertex(g, source)?;
    let mut stats = KernelStats::default();
    let map = ranked_regions(g, &[source], &mut stats);
    Ok(map)
}

/// Nearest-source distances and regions. Ties between sources at equal
/// distance go to the smallest source id.
pub fn multi_source_spt(g: &Graph, sources: &[VertexId]) -> Result<DistanceMap, SsspError> {
    if sources.is_empty() {
        return Err(SsspError::NoSources);
    }
    check_distinct(g, sources)?;
    let mut by_id = sources.to_vec();
    by_id.sort();
    let mut stats = KernelStats::default();
    let mut map = ranked_regions(g, &by_id, &mut stats);
    map.sources = sources.to_vec();
    Ok(map)
}

/// Multi-source Dijkstra where ties between sources go to the one listed
/// first. Caller validates `sources`.
pub(crate) fn ranked_regions(
    g: &Graph,
    sources: &[VertexId],
    stats: &mut KernelStats,
) -> DistanceMap {
    let n = g.vertex_count();
    let mut dist = vec![Weight::INFINITY; n];
    let mut rank = vec![u32::MAX; n];
    let mut parent = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::with_capacity(sources.len());
    for (r, &s) in sources.iter().enumerate() {
        dist[s.index()] = 0.0;
        rank[s.index()] = r as u32;
        heap.push(Entry {
            dist: 0.0,
            rank: r as u32,
            vertex: s,
        });
    }
    while let Some(Entry {
        dist: d,
        rank: r,
        vertex: u,
    }) = heap.pop()
    {
        if done[u.index()] || d > dist[u.index()] || r != rank[u.index()] {
            continue;
        }
        done[u.index()] = true;
        stats.settled += 1;
        for (v, w) in g.neighbors(u) {
            let nd = d + w;
            let vi = v.index();
            if done[vi] {
                continue;
            }
            if nd < dist[vi] || (nd == dist[vi] && r < rank[vi]) {
                dist[vi] = nd;
                rank[vi] = r;
                parent[vi] = Some(u);
                heap.push(Entry {
                    dist: nd,
                    rank: r,
                    vertex: v,
                });
            }
        }
    }
    stats.full_runs += 1;
    let owner = rank
        .iter()
        .map(|&r| (r != u32::MAX).then(|| sources[r as usize]))
        .collect();
    DistanceMap {
        sources: sources.to_vec(),
        dist,
        owner,
        parent,
    }
}

/// Dijkstra from `source` that stops as soon as every vertex in `targets` is
/// settled. Returns the distance to each target, in order.
pub(crate) fn truncated_distances(
    g: &Graph,
    source: VertexId,
    targets: &[VertexId],
    stats: &mut KernelStats,
) -> Vec<Weight> {
    let n = g.vertex_count();
    let mut want = vec![false; n];
    let mut remaining = 0usize;
    for &t in targets {
        if !std::mem::replace(&mut want[t.index()], true) {
            remaining += 1;
        }
    }
    let mut dist = vec![Weight::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source.index()] = 0.0;
    heap.push(Entry {
        dist: 0.0,
        rank: 0,
        vertex: source,
    });
    while let Some(Entry {
        dist: d, vertex: u, ..
    }) = heap.pop()
    {
        if done[u.index()] || d > dist[u.index()] {
            continue;
        }
        done[u.index()] = true;
        stats.settled += 1;
        if want[u.index()] {
            remaining -= 1;
            if remaining == 0 {
                break;
            }
        }
        for (v, w) in g.neighbors(u) {
            let nd = d + w;
            if !done[v.index()] && nd < dist[v.index()] {
                dist[v.index()] = nd;
                heap.push(Entry {
                    dist: nd,
                    rank: 0,
                    vertex: v,
                });
            }
        }
    }
    stats.truncated_runs += 1;
    targets.iter().map(|t| dist[t.index()]).collect()
}

/// Pairwise landmark distances: one truncated run per landmark, keeping only
/// landmark-to-landmark entries.
pub fn landmark_matrix(g: &Graph, landmarks: &[VertexId]) -> Result<DistanceMatrix, SsspError> {
    check_distinct(g, landmarks)?;
    let mut stats = KernelStats::default();
    Ok(landmark_matrix_counted(g, landmarks, &mut stats))
}

pub(crate) fn landmark_matrix_counted(
    g: &Graph,
    landmarks: &[VertexId],
    stats: &mut KernelStats,
) -> DistanceMatrix {
    let runs: Vec<(Vec<Weight>, KernelStats)> = landmarks
        .par_iter()
        .map(|&l| {
            let mut local = KernelStats::default();
            let row = truncated_distances(g, l, landmarks, &mut local);
            (row, local)
        })
        .collect();
    let k = landmarks.len();
    let mut data = Vec::with_capacity(k * k);
    for (row, local) in runs {
        data.extend(row);
        *stats += local;
    }
    DistanceMatrix::from_flat(k, data)
}

/// Exact distances between all pairs via one tree per vertex. Limited to
/// [`ORACLE_CAP`] vertices.
pub fn all_pairs_oracle(g: &Graph) -> Result<DistanceMatrix, SsspError> {
    all_pairs_oracle_capped(g, ORACLE_CAP)
}

pub fn all_pairs_oracle_capped(g: &Graph, cap: usize) -> Result<DistanceMatrix, SsspError> {
    let n = g.vertex_count();
    if n > cap {
        return Err(SsspError::OracleCap { n, cap });
    }
    let rows: Vec<Vec<Weight>> = g
        .vertices()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&s| {
            let mut stats = KernelStats::default();
            ranked_regions(g, &[s], &mut stats).dist
        })
        .collect();
    Ok(DistanceMatrix::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{grid, random_connected};

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (0..n - 1).map(|i| (i, i + 1, 1.0))).unwrap()
    }

    fn ids(v: &[u32]) -> Vec<VertexId> {
        v.iter().map(|&i| VertexId(i)).collect()
    }

    #[test]
    fn spt_on_fixtures() {
        let p6 = path(6);
        let m = shortest_path_tree(&p6, VertexId(0)).unwrap();
        assert_eq!(m.dist, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(m.all_reached());
        assert_eq!(m.parent[3], Some(VertexId(2)));

        let sq = grid(2, 2).unwrap();
        assert_eq!(
            shortest_path_tree(&sq, VertexId(0)).unwrap().dist,
            vec![0.0, 1.0, 1.0, 2.0]
        );

        let single = Graph::from_edges(1, []).unwrap();
        assert_eq!(
            shortest_path_tree(&single, VertexId(0)).unwrap().dist,
            vec![0.0]
        );
        assert_eq!(
            shortest_path_tree(&single, VertexId(1)),
            Err(SsspError::OutOfRange(VertexId(1)))
        );
    }

    #[test]
    fn unreached_vertices_stay_infinite() {
        let g = Graph::from_edges(3, [(0, 1, 2.0)]).unwrap();
        let m = shortest_path_tree(&g, VertexId(0)).unwrap();
        assert_eq!(m.distance(VertexId(2)), None);
        assert_eq!(m.owner[2], None);
        assert!(!m.all_reached());
    }

    #[test]
    fn multi_source_regions() {
        let p6 = path(6);
        let m = multi_source_spt(&p6, &ids(&[0, 5])).unwrap();
        assert_eq!(m.dist, vec![0.0, 1.0, 2.0, 2.0, 1.0, 0.0]);
        let owners: Vec<u32> = m.owner.iter().map(|o| o.unwrap().0).collect();
        assert_eq!(owners, vec![0, 0, 0, 5, 5, 5]);

        let all: Vec<VertexId> = p6.vertices().collect();
        let m = multi_source_spt(&p6, &all).unwrap();
        assert!(m.dist.iter().all(|&d| d == 0.0));
        assert!(m
            .owner
            .iter()
            .enumerate()
            .all(|(i, o)| o.unwrap().index() == i));

        let single = multi_source_spt(&p6, &ids(&[0])).unwrap();
        assert_eq!(single, shortest_path_tree(&p6, VertexId(0)).unwrap());
    }

    #[test]
    fn multi_source_tie_goes_to_smaller_id() {
        // Vertex 2 is at distance 2 from both 0 and 4.
        let p5 = path(5);
        let m = multi_source_spt(&p5, &ids(&[4, 0])).unwrap();
        assert_eq!(m.owner[2], Some(VertexId(0)));
        assert_eq!(m.sources, ids(&[4, 0]));
        // Rank order instead of id order flips the tie.
        let mut stats = KernelStats::default();
        let ranked = ranked_regions(&p5, &ids(&[4, 0]), &mut stats);
        assert_eq!(ranked.owner[2], Some(VertexId(4)));
        assert_eq!(stats.full_runs, 1);
    }

    #[test]
    fn multi_source_errors() {
        let p6 = path(6);
        assert_eq!(multi_source_spt(&p6, &[]), Err(SsspError::NoSources));
        assert_eq!(
            multi_source_spt(&p6, &ids(&[1, 1])),
            Err(SsspError::DuplicateSource(VertexId(1)))
        );
        assert_eq!(
            multi_source_spt(&p6, &ids(&[1, 9])),
            Err(SsspError::OutOfRange(VertexId(9)))
        );
    }

    #[test]
    fn landmark_matrix_examples() {
        let p6 = path(6);
        let m = landmark_matrix(&p6, &ids(&[0, 5])).unwrap();
        assert_eq!(m.to_rows(), vec![vec![0.0, 5.0], vec![5.0, 0.0]]);
        assert_eq!(
            landmark_matrix(&p6, &ids(&[3])).unwrap().to_rows(),
            vec![vec![0.0]]
        );

        let g3 = grid(3, 3).unwrap();
        assert_eq!(
            landmark_matrix(&g3, &ids(&[0, 8])).unwrap().to_rows(),
            vec![vec![0.0, 4.0], vec![4.0, 0.0]]
        );
        assert_eq!(
            landmark_matrix(&p6, &ids(&[2, 2])),
            Err(SsspError::DuplicateSource(VertexId(2)))
        );
    }

    #[test]
    fn truncated_runs_stop_early() {
        let p = path(100);
        let mut stats = KernelStats::default();
        let d = truncated_distances(&p, VertexId(0), &ids(&[0, 3]), &mut stats);
        assert_eq!(d, vec![0.0, 3.0]);
        assert_eq!(stats.settled, 4);
        assert_eq!(stats.truncated_runs, 1);
    }

    #[test]
    fn oracle_examples() {
        let p6 = path(6);
        let all = all_pairs_oracle(&p6).unwrap();
        assert_eq!(all.get(1, 4), 3.0);
        assert!((0..6).all(|i| all.get(i, i) == 0.0));
        assert_eq!(
            all_pairs_oracle_capped(&p6, 5),
            Err(SsspError::OracleCap { n: 6, cap: 5 })
        );
    }

    #[test]
    fn oracle_is_a_metric_on_random_graph() {
        let g = random_connected(50, 0, 7).unwrap();
        let d = all_pairs_oracle(&g).unwrap();
        let n = g.vertex_count();
        for a in 0..n {
            for b in 0..n {
                assert_eq!(d.get(a, b), d.get(b, a));
                for c in 0..n {
                    assert!(d.get(a, c) <= d.get(a, b) + d.get(b, c));
                }
            }
        }
    }

    #[test]
    fn grid_manhattan_oracle() {
        let (rows, cols) = (4, 5);
        let g = grid(rows, cols).unwrap();
        let d = all_pairs_oracle(&g).unwrap();
        for a in 0..rows * cols {
            for b in 0..rows * cols {
                let manhattan = (a / cols).abs_diff(b / cols) + (a % cols).abs_diff(b % cols);
                assert_eq!(d.get(a, b), manhattan as f64);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use proptest::sample::subsequence;

        fn weighted_graph() -> impl Strategy<Value = Graph> {
            (2usize..40, any::<u64>(), 0usize..40).prop_flat_map(|(n, seed, extra)| {
                let cap = n * (n - 1) / 2 - (n - 1);
                let base = random_connected(n, extra.min(cap), seed).unwrap();
                let m = base.edge_count();
                proptest::collection::vec(1u32..20, m).prop_map(move |ws| {
                    let edges = base
                        .edges()
                        .zip(ws)
                        .map(|((u, v, _), w)| (u.index(), v.index(), w as f64));
                    Graph::from_edges(n, edges).unwrap()
                })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn spt_rows_match_oracle(g in weighted_graph()) {
                let all = all_pairs_oracle(&g).unwrap();
                for s in g.vertices() {
                    let m = shortest_path_tree(&g, s).unwrap();
                    prop_assert_eq!(m.dist.as_slice(), all.row(s.index()));
                    for (u, v, w) in g.edges() {
                        prop_assert!(m.dist[v.index()] <= m.dist[u.index()] + w);
                        prop_assert!(m.dist[u.index()] <= m.dist[v.index()] + w);
                    }
                }
            }

            #[test]
            fn multi_source_is_min_over_sources(
                (g, picks) in weighted_graph().prop_flat_map(|g| {
                    let n = g.vertex_count();
                    (Just(g), subsequence((0..n as u32).collect::<Vec<_>>(), 1..=n.min(6)))
                })
            ) {
                let sources = ids(&picks);
                let all = all_pairs_oracle(&g).unwrap();
                let m = multi_source_spt(&g, &sources).unwrap();
                for v in g.vertices() {
                    let best = sources.iter().map(|s| all.get(s.index(), v.index())).fold(f64::INFINITY, f64::min);
                    prop_assert_eq!(m.dist[v.index()], best);
                    let owner = m.owner[v.index()].unwrap();
                    prop_assert_eq!(all.get(owner.index(), v.index()), best);
                    let smallest = sources.iter().filter(|s| all.get(s.index(), v.index()) == best).min().unwrap();
                    prop_assert_eq!(owner, *smallest);
                }
                for &s in &sources {
                    prop_assert_eq!(m.dist[s.index()], 0.0);
                    prop_assert_eq!(m.owner[s.index()], Some(s));
                }

                let lm = landmark_matrix(&g, &sources).unwrap();
                let k = sources.len();
                for i in 0..k {
                    prop_assert_eq!(lm.get(i, i), 0.0);
                    for j in 0..k {
                        prop_assert_eq!(lm.get(i, j), all.get(sources[i].index(), sources[j].index()));
                        prop_assert_eq!(lm.get(i, j), lm.get(j, i));
                        for h in 0..k {
                            prop_assert!(lm.get(i, h) <= lm.get(i, j) + lm.get(j, h));
                        }
                    }
                }
            }
        }
    }
}
