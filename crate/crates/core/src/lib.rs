//! A* shortest paths with landmark heuristics.
//!
//! Two preprocessing schemes are provided over the same landmark sets:
//!
//! * a full embedding, storing every landmark-to-vertex distance and driving
//!   the classic reverse-triangle bound, and
//! * a distributed embedding, where each vertex keeps only the distance to the
//!   landmark of its region, and a dual-landmark bound built from
//!   quadrilateral inequalities over the pair of owning landmarks.
//!
//! [`search`] runs the queries, [`heuristics`] counts the arithmetic each bound
//! performs, and [`bench`] compares methods against an exact oracle.

pub mod bench;
pub mod embedding;
pub mod graph;
pub mod heuristics;
pub mod search;
pub mod sssp;

pub use embedding::{
    build_alt_embedding, build_distributed_embedding, AltEmbedding, DistributedEmbedding,
    LandmarkSet, LandmarkStrategy,
};
pub use graph::{Graph, GraphError, VertexId, Weight};
pub use heuristics::{
    alp_dual_h, alt_h, AlpConfig, AlpHeuristic, AltHeuristic, CountingMode, Heuristic,
    HeuristicEval, OpCounters, Scenario,
};
pub use search::{astar, dijkstra_query, QueryResult};

/// Derives an independent stream seed from a top-level seed and a fixed
/// per-purpose tag (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Tags for [`derive_seed`].
pub mod seeds {
    pub const GRAPH: u64 = 1;
    pub const LANDMARKS: u64 = 2;
    pub const WORKLOAD: u64 = 3;
}
