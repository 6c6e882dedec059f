//! Landmark lower bounds for A*, with per-call arithmetic counters.
//!
//! The full-table bound takes the largest reverse triangle inequality over all
//! landmarks. The dual-landmark bound works from a distributed embedding: with
//! `a = d(v, l1)`, `m = d(l1, l2)` and `b = d(l2, t)`, where `l1` owns `v` and
//! `l2` owns `t`, it takes the largest of
//!
//! ```text
//! pi1 = |a - m| - b
//! pi2 = |a - b| - m
//! pi3 = |m - b| - a
//! pi4 = |d(v, l1) - d(l1, t)|        (only when l1 = l2)
//! pi5 = |d(v, l2) - d(l2, t)|        (only when l1 = l2)
//! pi6 = (|a - m| * |m - b| - a * b) / m   (only when l1 != l2)
//! ```
//!
//! clamped at zero. Counting rules: absolute value is free; every binary minus
//! is one subtraction; `max_arity` is the number of candidates entering the
//! final max.

use std::cell::Cell;
use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{AltEmbedding, DistributedEmbedding};
use crate::graph::{VertexId, Weight};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpCounters {
    pub subtractions: u64,
    pub multiplications: u64,
    pub divisions: u64,
    /// Per evaluation: candidates fed to the final max. Summed in aggregates.
    pub max_arity: u64,
}

impl OpCounters {
    pub const fn new(
        subtractions: u64,
        multiplications: u64,
        divisions: u64,
        max_arity: u64,
    ) -> Self {
        OpCounters {
            subtractions,
            multiplications,
            divisions,
            max_arity,
        }
    }

    /// Subtractions, multiplications and divisions together.
    pub fn arithmetic(&self) -> u64 {
        self.subtractions + self.multiplications + self.divisions
    }
}

impl AddAssign for OpCounters {
    fn add_assign(&mut self, o: Self) {
        self.subtractions += o.subtractions;
        self.multiplications += o.multiplications;
        self.divisions += o.divisions;
        self.max_arity += o.max_arity;
    }
}

/// Values of the six dual-landmark candidates; `None` where a candidate
/// cannot be formed.
pub type Components = [Option<Weight>; 6];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeuristicEval {
    pub value: Weight,
    pub components: Components,
    pub counters: OpCounters,
}

impl HeuristicEval {
    pub const ZERO: HeuristicEval = HeuristicEval {
        value: 0.0,
        components: [None; 6],
        counters: OpCounters::new(0, 0, 0, 0),
    };

    fn from_components(components: Components, counters: OpCounters) -> HeuristicEval {
        let value = components
            .iter()
            .flatten()
            .fold(0.0, |acc: Weight, &c| acc.max(c));
        HeuristicEval {
            value,
            components,
            counters,
        }
    }
}

/// A lower bound on `d(v, target)`.
pub trait Heuristic {
    fn evaluate(&self, v: VertexId, target: VertexId) -> HeuristicEval;
}

impl<H: Heuristic + ?Sized> Heuristic for &H {
    fn evaluate(&self, v: VertexId, target: VertexId) -> HeuristicEval {
        (**self).evaluate(v, target)
    }
}

/// `h = 0`; turns A* into Dijkstra.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroHeuristic;

impl Heuristic for ZeroHeuristic {
    fn evaluate(&self, _v: VertexId, _target: VertexId) -> HeuristicEval {
        HeuristicEval::ZERO
    }
}

/// How the dual-landmark bound counts its arithmetic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum CountingMode {
    /// Every candidate evaluated as written, no shared subexpressions.
    #[default]
    Literal,
    /// Shared subexpressions computed once. Same values, fewer operations.
    Optimized,
}

impl fmt::Display for CountingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountingMode::Literal => "literal",
            CountingMode::Optimized => "optimized",
        })
    }
}

impl FromStr for CountingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(CountingMode::Literal),
            "optimized" => Ok(CountingMode::Optimized),
            other => Err(format!("unknown heuristic mode `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AlpConfig {
    pub mode: CountingMode,
    /// Include the Ptolemy candidate `pi6`.
    pub ptolemy: bool,
}

impl Default for AlpConfig {
    fn default() -> Self {
        AlpConfig {
            mode: CountingMode::Literal,
            ptolemy: true,
        }
    }
}

/// Largest reverse triangle bound over every landmark.
pub fn alt_h(e: &AltEmbedding, v: VertexId, t: VertexId) -> HeuristicEval {
    let k = e.landmarks().len();
    let value = (0..k)
        .map(|i| (e.dist(i, v) - e.dist(i, t)).abs())
        .fold(0.0, Weight::max);
    HeuristicEval {
        value,
        components: [None; 6],
        counters: OpCounters::new(k as u64, 0, 0, k as u64),
    }
}

/// Landmark index attaining [`alt_h`], smallest index on ties.
pub fn alt_argmax(e: &AltEmbedding, v: VertexId, t: VertexId) -> usize {
    let mut best = 0;
    let mut best_value = Weight::NEG_INFINITY;
    for i in 0..e.landmarks().len() {
        let d = (e.dist(i, v) - e.dist(i, t)).abs();
        if d > best_value {
            best = i;
            best_value = d;
        }
    }
    best
}

/// The six dual-landmark candidates, evaluated as written.
pub fn alp_components(e: &DistributedEmbedding, v: VertexId, t: VertexId) -> Components {
    literal(e, v, t, true).0
}

/// Dual-landmark bound with the default configuration.
pub fn alp_dual_h(e: &DistributedEmbedding, v: VertexId, t: VertexId) -> HeuristicEval {
    alp_dual_h_with(e, v, t, AlpConfig::default())
}

pub fn alp_dual_h_with(
    e: &DistributedEmbedding,
    v: VertexId,
    t: VertexId,
    config: AlpConfig,
) -> HeuristicEval {
    let (components, counters) = match config.mode {
        CountingMode::Literal => literal(e, v, t, config.ptolemy),
        CountingMode::Optimized => optimized(e, v, t, config.ptolemy),
    };
    HeuristicEval::from_components(components, counters)
}

fn literal(
    e: &DistributedEmbedding,
    v: VertexId,
    t: VertexId,
    ptolemy: bool,
) -> (Components, OpCounters) {
    let (l1, l2) = (e.owner(v), e.owner(t));
    let v_l1 = e.dist_to_owner(v);
    let l2_t = e.dist_to_owner(t);
    let l1_l2 = e.lmatrix().get(l1, l2);
    let mut ops = OpCounters::default();
    let mut c: Components = [None; 6];

    c[0] = Some((v_l1 - l1_l2).abs() - l2_t);
    c[1] = Some((v_l1 - l2_t).abs() - l1_l2);
    c[2] = Some((l1_l2 - l2_t).abs() - v_l1);
    ops.subtractions += 6;
    ops.max_arity += 3;

    if l1 == l2 {
        // t is in v's region, so d(l1, t) = d(l2, t) and d(v, l2) = d(v, l1).
        c[3] = Some((v_l1 - l2_t).abs());
        c[4] = Some((v_l1 - l2_t).abs());
        ops.subtractions += 2;
        ops.max_arity += 2;
    } else if ptolemy {
        let numerator = (v_l1 - l1_l2).abs() * (l1_l2 - l2_t).abs() - v_l1 * l2_t;
        c[5] = Some(numerator / l1_l2);
        ops.subtractions += 3;
        ops.multiplications += 2;
        ops.divisions += 1;
        ops.max_arity += 1;
    }
    (c, ops)
}

fn optimized(
    e: &DistributedEmbedding,
    v: VertexId,
    t: VertexId,
    ptolemy: bool,
) -> (Components, OpCounters) {
    let (l1, l2) = (e.owner(v), e.owner(t));
    let a = e.dist_to_owner(v);
    let b = e.dist_to_owner(t);
    let mut c: Components = [None; 6];
    if l1 == l2 {
        let diff = (a - b).abs();
        // pi1 and pi3 are the two signed halves of |a - b|
        c[0] = Some(a - b);
        c[1] = Some(diff);
        c[2] = Some(-(a - b));
        c[3] = Some(diff);
        c[4] = Some(diff);
        return (c, OpCounters::new(1, 0, 0, 1));
    }
    let m = e.lmatrix().get(l1, l2);
    let am = (a - m).abs();
    let mb = (m - b).abs();
    c[0] = Some(am - b);
    c[1] = Some((a - b).abs() - m);
    c[2] = Some(mb - a);
    let mut ops = OpCounters::new(6, 0, 0, 3);
    if ptolemy {
        c[5] = Some((am * mb - a * b) / m);
        ops += OpCounters::new(1, 2, 1, 1);
    }
    (c, ops)
}

/// Full-table bound as a [`Heuristic`].
#[derive(Clone, Copy, Debug)]
pub struct AltHeuristic<'a>(pub &'a AltEmbedding);

impl Heuristic for AltHeuristic<'_> {
    fn evaluate(&self, v: VertexId, target: VertexId) -> HeuristicEval {
        alt_h(self.0, v, target)
    }
}

/// Dual-landmark bound as a [`Heuristic`].
#[derive(Clone, Copy, Debug)]
pub struct AlpHeuristic<'a> {
    pub embedding: &'a DistributedEmbedding,
    pub config: AlpConfig,
}

impl<'a> AlpHeuristic<'a> {
    pub fn new(embedding: &'a DistributedEmbedding) -> Self {
        AlpHeuristic {
            embedding,
            config: AlpConfig::default(),
        }
    }
}

impl Heuristic for AlpHeuristic<'_> {
    fn evaluate(&self, v: VertexId, target: VertexId) -> HeuristicEval {
        alp_dual_h_with(self.embedding, v, target, self.config)
    }
}

/// How the owners of `v` and `t` relate to the landmark that maximizes the
/// full-table bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    /// `l1 = l_alpha != l2`
    S1,
    /// `l1 != l_alpha = l2`
    S2,
    /// `l1 = l_alpha = l2`
    S3,
    /// `l1 = l2 != l_alpha`
    S4,
    /// `l1`, `l2` and `l_alpha` all distinct
    S5,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [Self::S1, Self::S2, Self::S3, Self::S4, Self::S5];

    pub fn from_landmarks(l1: usize, l2: usize, l_alpha: usize) -> Scenario {
        match (l1 == l2, l1 == l_alpha, l2 == l_alpha) {
            (true, true, _) => Scenario::S3,
            (true, false, _) => Scenario::S4,
            (false, true, _) => Scenario::S1,
            (false, false, true) => Scenario::S2,
            (false, false, false) => Scenario::S5,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("embeddings were built over different landmark sets")]
pub struct LandmarkMismatch;

pub fn classify_scenario(
    alt: &AltEmbedding,
    alp: &DistributedEmbedding,
    v: VertexId,
    t: VertexId,
) -> Result<Scenario, LandmarkMismatch> {
    if alt.landmarks() != alp.landmarks() {
        return Err(LandmarkMismatch);
    }
    Ok(Scenario::from_landmarks(
        alp.owner(v),
        alp.owner(t),
        alt_argmax(alt, v, t),
    ))
}

/// Dual-landmark heuristic that tallies the scenario of every evaluation.
pub struct ClassifyingAlp<'a> {
    inner: AlpHeuristic<'a>,
    alt: &'a AltEmbedding,
    histogram: Cell<[u64; 5]>,
}

impl<'a> ClassifyingAlp<'a> {
    pub fn new(inner: AlpHeuristic<'a>, alt: &'a AltEmbedding) -> Result<Self, LandmarkMismatch> {
        if alt.landmarks() != inner.embedding.landmarks() {
            return Err(LandmarkMismatch);
        }
        Ok(ClassifyingAlp {
            inner,
            alt,
            histogram: Cell::new([0; 5]),
        })
    }

    pub fn histogram(&self) -> [u64; 5] {
        self.histogram.get()
    }
}

impl Heuristic for ClassifyingAlp<'_> {
    fn evaluate(&self, v: VertexId, target: VertexId) -> HeuristicEval {
        let e = self.inner.embedding;
        let s =
            Scenario::from_landmarks(e.owner(v), e.owner(target), alt_argmax(self.alt, v, target));
        let mut h = self.histogram.get();
        h[s.index()] += 1;
        self.histogram.set(h);
        self.inner.evaluate(v, target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{build_alt_embedding, build_distributed_embedding, LandmarkSet};
    use crate::graph::Graph;

    fn p6() -> Graph {
        Graph::from_edges(6, (0..5).map(|i| (i, i + 1, 1.0))).unwrap()
    }

    fn embeddings(g: &Graph, ids: &[u32]) -> (AltEmbedding, DistributedEmbedding) {
        let l = LandmarkSet::new(g, ids.iter().map(|&i| VertexId(i)).collect()).unwrap();
        (
            build_alt_embedding(g, &l).unwrap(),
            build_distributed_embedding(g, &l).unwrap(),
        )
    }

    const V: fn(u32) -> VertexId = VertexId;

    #[test]
    fn alt_examples() {
        let g = p6();
        let (alt, _) = embeddings(&g, &[0, 5]);
        let h = alt_h(&alt, V(1), V(4));
        assert_eq!(h.value, 3.0);
        assert_eq!(h.counters, OpCounters::new(2, 0, 0, 2));
        assert_eq!(alt_h(&alt, V(3), V(3)).value, 0.0);

        let (single, _) = embeddings(&g, &[0]);
        let h = alt_h(&single, V(2), V(3));
        assert_eq!(h.value, 1.0);
        assert_eq!(h.counters, OpCounters::new(1, 0, 0, 1));
    }

    #[test]
    fn cross_partition_components() {
        let g = p6();
        let (_, alp) = embeddings(&g, &[0, 5]);
        let c = alp_components(&alp, V(1), V(4));
        assert_eq!(c, [Some(3.0), Some(-5.0), Some(3.0), None, None, Some(3.0)]);
        let h = alp_dual_h(&alp, V(1), V(4));
        assert_eq!(h.value, 3.0);
        assert_eq!(h.counters, OpCounters::new(9, 2, 1, 4));
    }

    #[test]
    fn shared_partition_components() {
        let g = p6();
        let (_, alp) = embeddings(&g, &[0, 5]);
        // a = 1, b = 2, l = 0
        let c = alp_components(&alp, V(1), V(2));
        assert_eq!(
            c,
            [Some(-1.0), Some(1.0), Some(1.0), Some(1.0), Some(1.0), None]
        );
        let h = alp_dual_h(&alp, V(1), V(2));
        assert_eq!(h.value, 1.0);
        assert_eq!(h.counters, OpCounters::new(8, 0, 0, 5));

        let same = alp_components(&alp, V(2), V(2));
        assert_eq!(same[3], Some(0.0));
        assert_eq!(alp_dual_h(&alp, V(2), V(2)).value, 0.0);
    }

    #[test]
    fn negative_components_clamp_to_zero() {
        // 0 -1- 1 -1- 2 -1- 3 with landmarks {1, 2}; v = 0, t = 3:
        // a = 1, m = 1, b = 1 -> pi1 = -1, pi2 = -1, pi3 = -1, pi6 = -1.
        let g = Graph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let (_, alp) = embeddings(&g, &[1, 2]);
        let h = alp_dual_h(&alp, V(0), V(3));
        assert!(
            h.components.iter().flatten().all(|&c| c < 0.0),
            "{:?}",
            h.components
        );
        assert_eq!(h.value, 0.0);
    }

    #[test]
    fn optimized_mode_matches_values() {
        let g = crate::graph::random_connected(80, 60, 3).unwrap();
        let l = crate::embedding::select_random(&g, 6, 2).unwrap();
        let alp = build_distributed_embedding(&g, &l).unwrap();
        for ptolemy in [true, false] {
            for v in g.vertices() {
                for t in g.vertices().step_by(7) {
                    let faithful = alp_dual_h_with(
                        &alp,
                        v,
                        t,
                        AlpConfig {
                            mode: CountingMode::Literal,
                            ptolemy,
                        },
                    );
                    let fast = alp_dual_h_with(
                        &alp,
                        v,
                        t,
                        AlpConfig {
                            mode: CountingMode::Optimized,
                            ptolemy,
                        },
                    );
                    assert_eq!(faithful.value, fast.value);
                    assert_eq!(faithful.components, fast.components);
                    assert!(fast.counters.arithmetic() <= faithful.counters.arithmetic());
                }
            }
        }
    }

    #[test]
    fn ptolemy_toggle() {
        let g = p6();
        let (_, alp) = embeddings(&g, &[0, 5]);
        let config = AlpConfig {
            ptolemy: false,
            ..AlpConfig::default()
        };
        let h = alp_dual_h_with(&alp, V(1), V(4), config);
        assert_eq!(h.components[5], None);
        assert_eq!(h.counters, OpCounters::new(6, 0, 0, 3));
        // shared-partition evaluations never use pi6
        assert_eq!(
            alp_dual_h_with(&alp, V(1), V(2), config).counters,
            OpCounters::new(8, 0, 0, 5)
        );
    }

    #[test]
    fn scenario_examples() {
        let g = p6();
        let (alt, alp) = embeddings(&g, &[0, 5]);
        // |1-2| = 1 for both landmarks, tie goes to index 0 = owner of both
        assert_eq!(alt_argmax(&alt, V(1), V(2)), 0);
        assert_eq!(classify_scenario(&alt, &alp, V(1), V(2)), Ok(Scenario::S3));
        // both landmarks give 3; l_alpha = 0 = owner(1) != owner(4)
        assert_eq!(classify_scenario(&alt, &alp, V(1), V(4)), Ok(Scenario::S1));
        // from 4 towards 1: owner(4) = 1, owner(1) = 0 = l_alpha
        assert_eq!(classify_scenario(&alt, &alp, V(4), V(1)), Ok(Scenario::S2));

        let (alt1, alp1) = embeddings(&g, &[2]);
        for v in g.vertices() {
            for t in g.vertices() {
                assert_eq!(classify_scenario(&alt1, &alp1, v, t), Ok(Scenario::S3));
            }
        }
        let (other, _) = embeddings(&g, &[1, 5]);
        assert_eq!(
            classify_scenario(&other, &alp, V(0), V(1)),
            Err(LandmarkMismatch)
        );
    }

    #[test]
    fn scenario_table() {
        assert_eq!(Scenario::from_landmarks(0, 1, 0), Scenario::S1);
        assert_eq!(Scenario::from_landmarks(0, 1, 1), Scenario::S2);
        assert_eq!(Scenario::from_landmarks(2, 2, 2), Scenario::S3);
        assert_eq!(Scenario::from_landmarks(2, 2, 0), Scenario::S4);
        assert_eq!(Scenario::from_landmarks(0, 1, 2), Scenario::S5);
    }

    #[test]
    fn classifying_wrapper_counts_each_evaluation() {
        let g = p6();
        let (alt, alp) = embeddings(&g, &[0, 5]);
        let h = ClassifyingAlp::new(AlpHeuristic::new(&alp), &alt).unwrap();
        assert_eq!(h.evaluate(V(1), V(2)).value, 1.0);
        assert_eq!(h.evaluate(V(1), V(4)).value, 3.0);
        assert_eq!(h.evaluate(V(4), V(1)).value, 3.0);
        assert_eq!(h.histogram(), [1, 1, 1, 0, 0]);
    }
}
