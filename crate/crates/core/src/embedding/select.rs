//! Landmark selection: random, farthest, and avoid.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EmbeddingError, LandmarkSet};
use crate::graph::{Graph, VertexId, Weight};
use crate::sssp::{self, KernelStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LandmarkStrategy {
    Random,
    Farthest,
    Avoid,
}

impl LandmarkStrategy {
    pub const ALL: [LandmarkStrategy; 3] = [Self::Random, Self::Farthest, Self::Avoid];

    pub fn select(self, g: &Graph, k: usize, seed: u64) -> Result<LandmarkSet, EmbeddingError> {
        match self {
            Self::Random => select_random(g, k, seed),
            Self::Farthest => select_farthest(g, k, seed),
            Self::Avoid => select_avoid(g, k, seed),
        }
    }
}

impl fmt::Display for LandmarkStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Random => "random",
            Self::Farthest => "farthest",
            Self::Avoid => "avoid",
        })
    }
}

impl FromStr for LandmarkStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Self::Random),
            "farthest" => Ok(Self::Farthest),
            "avoid" => Ok(Self::Avoid),
            other => Err(format!("unknown landmark strategy `{other}`")),
        }
    }
}

fn check_k(g: &Graph, k: usize) -> Result<(), EmbeddingError> {
    let n = g.vertex_count();
    if k == 0 || k > n {
        Err(EmbeddingError::CountOutOfRange { k, n })
    } else {
        Ok(())
    }
}

fn full_tree(g: &Graph, root: VertexId) -> sssp::DistanceMap {
    sssp::ranked_regions(g, &[root], &mut KernelStats::default())
}

/// Index of the largest value among `candidates`, smallest id on ties.
fn argmax(values: &[Weight], candidates: impl Iterator<Item = usize>) -> Option<usize> {
    let mut best: Option<usize> = None;
    for v in candidates {
        match best {
            Some(b) if values[v] <= values[b] => {}
            _ => best = Some(v),
        }
    }
    best
}

/// `k` distinct vertices sampled uniformly without replacement.
pub fn select_random(g: &Graph, k: usize, seed: u64) -> Result<LandmarkSet, EmbeddingError> {
    check_k(g, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids = rand::seq::index::sample(&mut rng, g.vertex_count(), k)
        .into_iter()
        .map(VertexId::from)
        .collect();
    LandmarkSet::new(g, ids)
}

/// Greedy farthest-point traversal from a start vertex drawn from `seed`.
pub fn select_farthest(g: &Graph, k: usize, seed: u64) -> Result<LandmarkSet, EmbeddingError> {
    check_k(g, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = VertexId::from(rng.gen_range(0..g.vertex_count()));
    select_farthest_from(g, k, start)
}

/// The first landmark is the vertex farthest from `start`; each later one
/// maximizes its minimum distance to the landmarks chosen so far.
pub fn select_farthest_from(
    g: &Graph,
    k: usize,
    start: VertexId,
) -> Result<LandmarkSet, EmbeddingError> {
    check_k(g, k)?;
    if !g.contains(start) {
        return Err(EmbeddingError::OutOfRange(start));
    }
    let n = g.vertex_count();
    let from_start = full_tree(g, start).dist;
    let first = argmax(&from_start, 0..n).expect("nonempty graph");

    let mut chosen = vec![false; n];
    let mut ids = Vec::with_capacity(k);
    let mut min_dist = vec![Weight::INFINITY; n];
    let mut next = first;
    loop {
        chosen[next] = true;
        ids.push(VertexId::from(next));
        if ids.len() == k {
            break;
        }
        for (m, d) in min_dist
            .iter_mut()
            .zip(full_tree(g, VertexId::from(next)).dist)
        {
            *m = m.min(d);
        }
        next = argmax(&min_dist, (0..n).filter(|&v| !chosen[v])).expect("k <= n");
    }
    LandmarkSet::new(g, ids)
}

/// Avoid selection with per-iteration roots drawn from `seed`.
pub fn select_avoid(g: &Graph, k: usize, seed: u64) -> Result<LandmarkSet, EmbeddingError> {
    check_k(g, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.vertex_count();
    select_avoid_with_roots(g, k, || VertexId::from(rng.gen_range(0..n)))
}

/// Avoid selection with caller-supplied roots, one per landmark.
///
/// Each round grows a shortest path tree from the next root and weights every
/// vertex by how poorly the current landmarks bound its distance from the
/// root: `max(0, d(r, v) - max_l |d(l, r) - d(l, v)|)`. Subtree weights are
/// summed, and any subtree that already holds a landmark weighs zero. From
/// the heaviest vertex the walk follows the heaviest child down to a leaf,
/// which becomes the next landmark. If every subtree weighs zero the round
/// falls back to the unchosen vertex farthest from all landmarks.
pub fn select_avoid_with_roots(
    g: &Graph,
    k: usize,
    mut next_root: impl FnMut() -> VertexId,
) -> Result<LandmarkSet, EmbeddingError> {
    check_k(g, k)?;
    let n = g.vertex_count();
    let mut ids: Vec<VertexId> = Vec::with_capacity(k);
    let mut is_landmark = vec![false; n];
    let mut rows: Vec<Vec<Weight>> = Vec::with_capacity(k);

    while ids.len() < k {
        let root = next_root();
        if !g.contains(root) {
            return Err(EmbeddingError::OutOfRange(root));
        }
        let tree = full_tree(g, root);
        let r = root.index();

        let weight: Vec<Weight> = (0..n)
            .map(|v| {
                let bound = rows
                    .iter()
                    .map(|row| (row[r] - row[v]).abs())
                    .fold(0.0, Weight::max);
                (tree.dist[v] - bound).max(0.0)
            })
            .collect();

        // Children lists and a leaves-first order (decreasing distance).
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in 0..n {
            if let Some(p) = tree.parent[v] {
                children[p.index()].push(v);
            }
        }
        let mut order: Vec<usize> = (0..n).filter(|&v| tree.dist[v].is_finite()).collect();
        order.sort_by(|&a, &b| tree.dist[b].total_cmp(&tree.dist[a]).then(b.cmp(&a)));

        let mut size = weight.clone();
        let mut holds_landmark = is_landmark.clone();
        for &v in &order {
            if let Some(p) = tree.parent[v] {
                let p = p.index();
                size[p] += size[v];
                holds_landmark[p] |= holds_landmark[v];
            }
        }
        for v in 0..n {
            if holds_landmark[v] || !tree.dist[v].is_finite() {
                size[v] = 0.0;
            }
        }

        let top = argmax(&size, 0..n).expect("nonempty graph");
        let pick = if size[top] > 0.0 {
            let mut v = top;
            while let Some(c) = argmax(&size, children[v].iter().copied()) {
                v = c;
            }
            v
        } else {
            let mut min_dist = vec![Weight::INFINITY; n];
            for row in &rows {
                for (m, &d) in min_dist.iter_mut().zip(row) {
                    *m = m.min(d);
                }
            }
            argmax(&min_dist, (0..n).filter(|&v| !is_landmark[v])).expect("k <= n")
        };

        debug_assert!(!is_landmark[pick]);
        is_landmark[pick] = true;
        ids.push(VertexId::from(pick));
        if ids.len() < k {
            rows.push(full_tree(g, VertexId::from(pick)).dist);
        }
    }
    LandmarkSet::new(g, ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{grid, random_connected};
    use crate::sssp::all_pairs_oracle;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (0..n - 1).map(|i| (i, i + 1, 1.0))).unwrap()
    }

    fn star(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (0, i, 1.0))).unwrap()
    }

    fn raw(l: &LandmarkSet) -> Vec<u32> {
        l.ids().iter().map(|v| v.0).collect()
    }

    #[test]
    fn k_bounds() {
        let g = path(6);
        for s in LandmarkStrategy::ALL {
            assert_eq!(
                s.select(&g, 0, 1),
                Err(EmbeddingError::CountOutOfRange { k: 0, n: 6 })
            );
            assert_eq!(
                s.select(&g, 7, 1),
                Err(EmbeddingError::CountOutOfRange { k: 7, n: 6 })
            );
            assert_eq!(s.select(&g, 1, 1).unwrap().len(), 1);
            let mut all = raw(&s.select(&g, 6, 3).unwrap());
            all.sort();
            assert_eq!(all, vec![0, 1, 2, 3, 4, 5], "{s}");
        }
    }

    #[test]
    fn random_is_replayable() {
        let g = random_connected(50, 20, 2).unwrap();
        let a = select_random(&g, 4, 9).unwrap();
        assert_eq!(a, select_random(&g, 4, 9).unwrap());
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn farthest_examples() {
        let p6 = path(6);
        assert_eq!(
            raw(&select_farthest_from(&p6, 2, VertexId(0)).unwrap()),
            vec![5, 0]
        );
        assert_eq!(
            raw(&select_farthest_from(&p6, 1, VertexId(2)).unwrap()),
            vec![5]
        );
        let sq = grid(2, 2).unwrap();
        assert_eq!(
            raw(&select_farthest_from(&sq, 2, VertexId(0)).unwrap()),
            vec![3, 0]
        );
    }

    #[test]
    fn farthest_min_spread_shrinks_with_k() {
        let g = random_connected(120, 60, 5).unwrap();
        let d = all_pairs_oracle(&g).unwrap();
        let mut last = f64::INFINITY;
        for k in 2..=20 {
            let l = select_farthest(&g, k, 3).unwrap();
            let ids = l.ids();
            let mut spread = f64::INFINITY;
            for (i, a) in ids.iter().enumerate() {
                for b in &ids[i + 1..] {
                    assert_ne!(a, b);
                    spread = spread.min(d.get(a.index(), b.index()));
                }
            }
            assert!(spread <= last, "k={k}: {spread} > {last}");
            last = spread;
        }
    }

    #[test]
    fn avoid_first_pick_is_heaviest_leaf() {
        // Root 2 on P6: distances [2,1,0,1,2,3]; the branch through 3 weighs
        // 6 against 3 for the branch through 1, so the walk ends at 5.
        let p6 = path(6);
        let l = select_avoid_with_roots(&p6, 1, || VertexId(2)).unwrap();
        assert_eq!(raw(&l), vec![5]);
    }

    #[test]
    fn avoid_second_pick_covers_other_side() {
        // With 5 chosen, every vertex on P6 is bounded exactly from root 2,
        // so the round falls back to the vertex farthest from landmark 5.
        let p6 = path(6);
        let l = select_avoid_with_roots(&p6, 2, || VertexId(2)).unwrap();
        assert_eq!(raw(&l), vec![5, 0]);
    }

    #[test]
    fn avoid_on_star_picks_distinct_leaves() {
        let g = star(5);
        for seed in 0..32 {
            let l = select_avoid(&g, 2, seed).unwrap();
            let ids = raw(&l);
            assert_eq!(ids.len(), 2);
            assert_ne!(ids[0], ids[1]);
            assert!(ids.iter().all(|&v| v != 0), "seed {seed}: {ids:?}");
        }
    }

    #[test]
    fn avoid_skips_subtrees_holding_landmarks() {
        // Root 1 on a star: the first pick is leaf 2 (heaviest, smallest id).
        // The second round cannot descend into the branch holding 2.
        let g = star(5);
        let mut roots = [VertexId(1), VertexId(3)].into_iter();
        let l = select_avoid_with_roots(&g, 2, || roots.next().unwrap()).unwrap();
        assert_eq!(raw(&l), vec![2, 1]);
    }

    #[test]
    fn strategies_are_deterministic() {
        let g = random_connected(90, 40, 8).unwrap();
        for s in LandmarkStrategy::ALL {
            assert_eq!(s.select(&g, 8, 4).unwrap(), s.select(&g, 8, 4).unwrap());
        }
        assert_eq!(
            "avoid".parse::<LandmarkStrategy>(),
            Ok(LandmarkStrategy::Avoid)
        );
        assert!("planar".parse::<LandmarkStrategy>().is_err());
    }
}
