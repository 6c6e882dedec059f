//! Workloads, method comparison, oracle verification, and reports.
//!
//! Report columns, in order:
//!
//! ```text
//! method,source,target,distance,settled,expanded,reopened,heuristic_evals,
//! subs,muls,divs,s1,s2,s3,s4,s5,wall_time_ns
//! ```
//!
//! `s1`..`s5` hold the scenario histogram of an ALP row and are zero for other
//! methods. `wall_time_ns` is zero unless timing was requested, which keeps
//! reports byte-identical across runs.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{
    build_alt_embedding, build_distributed_embedding, AltEmbedding, DistributedEmbedding,
    EmbeddingError, LandmarkSet, LandmarkStrategy,
};
use crate::graph::{Graph, VertexId, Weight};
use crate::heuristics::{AlpConfig, AlpHeuristic, AltHeuristic, ClassifyingAlp};
use crate::search::{astar, dijkstra_query, QueryResult, SearchError};
use crate::sssp;

pub const CSV_HEADER: &str = "method,source,target,distance,settled,expanded,reopened,heuristic_evals,subs,muls,divs,s1,s2,s3,s4,s5,wall_time_ns";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(
        "distance mismatch on ({from}, {to}): {method} found {found:?}, {reference_method} found {expected:?}"
    )]
    DistanceMismatch {
        method: Method,
        reference_method: Method,
        from: u32,
        to: u32,
        found: Option<Weight>,
        expected: Option<Weight>,
    },
    #[error("no methods requested")]
    NoMethods,
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dijkstra,
    Alt,
    Alp,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Dijkstra, Method::Alt, Method::Alp];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Dijkstra => "dijkstra",
            Method::Alt => "alt",
            Method::Alp => "alp",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dijkstra" => Ok(Method::Dijkstra),
            "alt" => Ok(Method::Alt),
            "alp" => Ok(Method::Alp),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stratification {
    /// Uniform random pairs.
    None,
    /// Pairs spread evenly over distance deciles, measured by pilot runs.
    ByDistanceDecile,
    /// Grid-only: sources near one corner, targets near the opposite corner.
    Corners { rows: usize, cols: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorkloadSpec {
    pub query_count: usize,
    pub seed: u64,
    pub stratification: Stratification,
}

pub type Query = (VertexId, VertexId);

const PILOT_SOURCES: usize = 16;

pub fn generate_queries(g: &Graph, spec: &WorkloadSpec) -> Vec<Query> {
    let n = g.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let uniform = |rng: &mut ChaCha8Rng| VertexId::from(rng.gen_range(0..n));
    match spec.stratification {
        Stratification::None => (0..spec.query_count)
            .map(|_| (uniform(&mut rng), uniform(&mut rng)))
            .collect(),
        Stratification::ByDistanceDecile => {
            let buckets = decile_buckets(g, &mut rng);
            let nonempty: Vec<&Vec<Query>> = buckets.iter().filter(|b| !b.is_empty()).collect();
            if nonempty.is_empty() {
                return (0..spec.query_count)
                    .map(|_| (uniform(&mut rng), uniform(&mut rng)))
                    .collect();
            }
            (0..spec.query_count)
                .map(|i| {
                    let bucket = nonempty[i % nonempty.len()];
                    bucket[rng.gen_range(0..bucket.len())]
                })
                .collect()
        }
        Stratification::Corners { rows, cols } => {
            assert_eq!(rows * cols, n, "corner workload needs the grid's shape");
            let rr = (rows / 10).max(1);
            let cr = (cols / 10).max(1);
            let cell = |rng: &mut ChaCha8Rng, bottom: bool, right: bool| {
                let r = rng.gen_range(0..rr);
                let c = rng.gen_range(0..cr);
                let r = if bottom { rows - 1 - r } else { r };
                let c = if right { cols - 1 - c } else { c };
                VertexId::from(r * cols + c)
            };
            (0..spec.query_count)
                .map(|_| {
                    let corner = rng.gen_range(0..4);
                    let (bottom, right) = (corner & 1 == 1, corner & 2 == 2);
                    let s = cell(&mut rng, bottom, right);
                    let t = cell(&mut rng, !bottom, !right);
                    (s, t)
                })
                .collect()
        }
    }
}

/// Candidate pairs from pilot trees, bucketed by `floor(10 d / d_max)`.
/// Pairs at distance zero are left out.
fn decile_buckets(g: &Graph, rng: &mut ChaCha8Rng) -> [Vec<Query>; 10] {
    let n = g.vertex_count();
    let pilots: Vec<VertexId> = rand::seq::index::sample(rng, n, PILOT_SOURCES.min(n))
        .into_iter()
        .map(VertexId::from)
        .collect();
    let trees: Vec<_> = pilots
        .iter()
        .map(|&s| sssp::shortest_path_tree(g, s).expect("pilot in range"))
        .collect();
    let d_max = trees
        .iter()
        .flat_map(|t| t.dist.iter().copied().filter(|d| d.is_finite()))
        .fold(0.0, Weight::max);
    let mut buckets: [Vec<Query>; 10] = Default::default();
    if d_max == 0.0 {
        return buckets;
    }
    for (s, tree) in pilots.iter().zip(&trees) {
        for (t, &d) in tree.dist.iter().enumerate() {
            if d > 0.0 && d.is_finite() {
                let b = ((10.0 * d / d_max) as usize).min(9);
                buckets[b].push((*s, VertexId::from(t)));
            }
        }
    }
    buckets
}

/// Decile of each query's distance, as used by the stratified workload.
pub fn decile_census(g: &Graph, queries: &[Query]) -> BTreeMap<usize, usize> {
    let oracle = sssp::all_pairs_oracle(g).expect("census needs the oracle");
    let d_max = oracle.as_slice().iter().copied().fold(0.0, Weight::max);
    let mut census = BTreeMap::new();
    for &(s, t) in queries {
        let d = oracle.get(s.index(), t.index());
        let b = if d_max == 0.0 {
            0
        } else {
            ((10.0 * d / d_max) as usize).min(9)
        };
        *census.entry(b).or_insert(0) += 1;
    }
    census
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: Method,
    pub source: u32,
    pub target: u32,
    pub distance: Weight,
    pub settled: u64,
    pub expanded: u64,
    pub reopened: u64,
    pub heuristic_evals: u64,
    pub subs: u64,
    pub muls: u64,
    pub divs: u64,
    pub s1: u64,
    pub s2: u64,
    pub s3: u64,
    pub s4: u64,
    pub s5: u64,
    pub wall_time_ns: u64,
}

impl BenchRow {
    fn from_result(
        method: Method,
        (s, t): Query,
        r: &QueryResult,
        hist: [u64; 5],
        nanos: u64,
    ) -> Self {
        BenchRow {
            method,
            source: s.0,
            target: t.0,
            distance: r.distance.unwrap_or(Weight::INFINITY),
            settled: r.settled,
            expanded: r.expanded,
            reopened: r.reopened,
            heuristic_evals: r.heuristic_evals,
            subs: r.op_totals.subtractions,
            muls: r.op_totals.multiplications,
            divs: r.op_totals.divisions,
            s1: hist[0],
            s2: hist[1],
            s3: hist[2],
            s4: hist[3],
            s5: hist[4],
            wall_time_ns: nanos,
        }
    }

    pub fn scenario_histogram(&self) -> [u64; 5] {
        [self.s1, self.s2, self.s3, self.s4, self.s5]
    }

    pub fn arithmetic(&self) -> u64 {
        self.subs + self.muls + self.divs
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BenchOptions {
    pub alp: AlpConfig,
    /// Record wall-clock time per query. Off keeps reports deterministic.
    pub timing: bool,
}

/// Embeddings shared by every query of a workload.
pub struct Prepared {
    pub alt: Option<AltEmbedding>,
    pub alp: Option<DistributedEmbedding>,
}

impl Prepared {
    pub fn build(
        g: &Graph,
        landmarks: &LandmarkSet,
        methods: &[Method],
    ) -> Result<Prepared, BenchError> {
        let wants_alp = methods.contains(&Method::Alp);
        // ALP rows classify scenarios, which needs the full table too.
        let wants_alt = wants_alp || methods.contains(&Method::Alt);
        Ok(Prepared {
            alt: wants_alt
                .then(|| build_alt_embedding(g, landmarks))
                .transpose()?,
            alp: wants_alp
                .then(|| build_distributed_embedding(g, landmarks))
                .transpose()?,
        })
    }
}

fn run_query(
    g: &Graph,
    prepared: &Prepared,
    method: Method,
    q: Query,
    options: &BenchOptions,
) -> Result<BenchRow, BenchError> {
    let clock = options.timing.then(Instant::now);
    let (result, hist) = match method {
        Method::Dijkstra => (dijkstra_query(g, q.0, q.1)?, [0; 5]),
        Method::Alt => {
            let alt = prepared.alt.as_ref().expect("prepared for alt");
            (astar(g, q.0, q.1, &AltHeuristic(alt))?, [0; 5])
        }
        Method::Alp => {
            let alt = prepared.alt.as_ref().expect("prepared for alp");
            let alp = prepared.alp.as_ref().expect("prepared for alp");
            let h = ClassifyingAlp::new(
                AlpHeuristic {
                    embedding: alp,
                    config: options.alp,
                },
                alt,
            )
            .expect("same landmark set");
            let r = astar(g, q.0, q.1, &h)?;
            (r, h.histogram())
        }
    };
    let nanos = clock.map_or(0, |c| c.elapsed().as_nanos() as u64);
    Ok(BenchRow::from_result(method, q, &result, hist, nanos))
}

/// Runs every query with every method. Rows come out grouped by query, in
/// query order, with methods in the order given. Any disagreement between
/// methods aborts the run.
pub fn run_workload(
    g: &Graph,
    landmarks: &LandmarkSet,
    queries: &[Query],
    methods: &[Method],
    options: &BenchOptions,
) -> Result<Vec<BenchRow>, BenchError> {
    if methods.is_empty() {
        return Err(BenchError::NoMethods);
    }
    let prepared = Prepared::build(g, landmarks, methods)?;
    run_prepared(g, &prepared, queries, methods, options)
}

pub fn run_prepared(
    g: &Graph,
    prepared: &Prepared,
    queries: &[Query],
    methods: &[Method],
    options: &BenchOptions,
) -> Result<Vec<BenchRow>, BenchError> {
    let per_query: Vec<Vec<BenchRow>> = queries
        .par_iter()
        .map(|&q| {
            let rows = methods
                .iter()
                .map(|&m| run_query(g, prepared, m, q, options))
                .collect::<Result<Vec<_>, _>>()?;
            let first = &rows[0];
            for r in &rows[1..] {
                if r.distance != first.distance {
                    return Err(BenchError::DistanceMismatch {
                        method: r.method,
                        reference_method: first.method,
                        from: q.0 .0,
                        to: q.1 .0,
                        found: finite(r.distance),
                        expected: finite(first.distance),
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_, _>>()?;
    Ok(per_query.into_iter().flatten().collect())
}

fn finite(d: Weight) -> Option<Weight> {
    d.is_finite().then_some(d)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub row: usize,
    pub method: Method,
    pub source: u32,
    pub target: u32,
    pub reported: Weight,
    /// `None` when an endpoint is not a vertex of the graph.
    pub expected: Option<Weight>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every row's distance against exact shortest path trees, one per
/// distinct source.
pub fn verify_workload(g: &Graph, rows: &[BenchRow]) -> VerificationReport {
    let n = g.vertex_count();
    let mut sources: Vec<u32> = rows
        .iter()
        .map(|r| r.source)
        .filter(|&s| (s as usize) < n)
        .collect();
    sources.sort_unstable();
    sources.dedup();
    let trees: BTreeMap<u32, Vec<Weight>> = sources
        .par_iter()
        .map(|&s| {
            (
                s,
                sssp::shortest_path_tree(g, VertexId(s))
                    .expect("in range")
                    .dist,
            )
        })
        .collect();

    let mut report = VerificationReport {
        checked: rows.len(),
        violations: Vec::new(),
    };
    for (i, r) in rows.iter().enumerate() {
        let expected = trees
            .get(&r.source)
            .filter(|_| (r.target as usize) < n)
            .map(|dist| dist[r.target as usize]);
        if expected != Some(r.distance) {
            report.violations.push(Violation {
                row: i,
                method: r.method,
                source: r.source,
                target: r.target,
                reported: r.distance,
                expected,
            });
        }
    }
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

pub fn emit_report<W: Write>(
    rows: &[BenchRow],
    format: ReportFormat,
    mut sink: W,
) -> Result<(), BenchError> {
    match format {
        ReportFormat::Csv => {
            // The csv crate skips the header for an empty row set.
            if rows.is_empty() {
                writeln!(sink, "{CSV_HEADER}")?;
            } else {
                let mut w = csv::Writer::from_writer(&mut sink);
                for r in rows {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut sink, rows)?;
            writeln!(sink)?;
        }
    }
    sink.flush()?;
    Ok(())
}

pub fn parse_report<R: Read>(format: ReportFormat, input: R) -> Result<Vec<BenchRow>, BenchError> {
    match format {
        ReportFormat::Csv => {
            let mut r = csv::Reader::from_reader(input);
            let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
            if header.join(",") != CSV_HEADER {
                return Err(BenchError::Io(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("unexpected report header `{}`", header.join(",")),
                )));
            }
            Ok(r.deserialize().collect::<Result<_, _>>()?)
        }
        ReportFormat::Json => Ok(serde_json::from_reader(input)?),
    }
}

/// Per-method means over a workload.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub queries: usize,
    pub mean_settled: f64,
    pub mean_expanded: f64,
    pub mean_reopened: f64,
    pub mean_heuristic_evals: f64,
    pub mean_arithmetic: f64,
    pub mean_subs: f64,
    pub mean_muls: f64,
    pub mean_divs: f64,
}

pub fn summarize(rows: &[BenchRow]) -> Vec<MethodSummary> {
    let mut by_method: BTreeMap<Method, Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        by_method.entry(r.method).or_default().push(r);
    }
    by_method
        .into_iter()
        .map(|(method, rs)| {
            let k = rs.len() as f64;
            let mean = |f: fn(&BenchRow) -> u64| rs.iter().map(|r| f(r) as f64).sum::<f64>() / k;
            MethodSummary {
                method,
                queries: rs.len(),
                mean_settled: mean(|r| r.settled),
                mean_expanded: mean(|r| r.expanded),
                mean_reopened: mean(|r| r.reopened),
                mean_heuristic_evals: mean(|r| r.heuristic_evals),
                mean_arithmetic: mean(|r| r.arithmetic()),
                mean_subs: mean(|r| r.subs),
                mean_muls: mean(|r| r.muls),
                mean_divs: mean(|r| r.divs),
            }
        })
        .collect()
}

/// Plain-text table of [`summarize`] output, with the ALT/ALP comparison
/// spelled out when both are present.
pub fn write_summary<W: Write>(summaries: &[MethodSummary], mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<9} {:>8} {:>14} {:>14} {:>14} {:>16}",
        "method", "queries", "mean_settled", "mean_reopened", "mean_evals", "mean_arithmetic"
    )?;
    for s in summaries {
        writeln!(
            out,
            "{:<9} {:>8} {:>14.2} {:>14.2} {:>14.2} {:>16.2}",
            s.method.to_string(),
            s.queries,
            s.mean_settled,
            s.mean_reopened,
            s.mean_heuristic_evals,
            s.mean_arithmetic
        )?;
    }
    let find = |m| summaries.iter().find(|s| s.method == m);
    if let (Some(alt), Some(alp)) = (find(Method::Alt), find(Method::Alp)) {
        let cmp = |a: f64, b: f64| {
            if a > b {
                "larger"
            } else if a < b {
                "smaller"
            } else {
                "equal"
            }
        };
        writeln!(
            out,
            "alp vs alt: search space {} ({:.2} vs {:.2} settled), arithmetic {} ({:.2} vs {:.2} ops)",
            cmp(alp.mean_settled, alt.mean_settled),
            alp.mean_settled,
            alt.mean_settled,
            cmp(alp.mean_arithmetic, alt.mean_arithmetic),
            alp.mean_arithmetic,
            alt.mean_arithmetic
        )?;
    }
    Ok(())
}

/// One graph of the seeded validation corpus: a random connected unit-weight
/// graph with `n` in `10..=200`, eight landmarks, and a landmark strategy
/// rotating with the seed.
#[derive(Clone, Debug)]
pub struct CorpusCase {
    pub seed: u64,
    pub graph: Graph,
    pub extra_edges: usize,
    pub strategy: LandmarkStrategy,
    pub landmarks: LandmarkSet,
}

pub const CORPUS_SEEDS: std::ops::Range<u64> = 0..100;
pub const CORPUS_LANDMARKS: usize = 8;
/// Graphs above this size are checked on sampled pairs instead of all pairs.
pub const CORPUS_ALL_PAIRS_MAX_N: usize = 60;
pub const CORPUS_SAMPLED_PAIRS: usize = 2000;

const CORPUS_TAG_SHAPE: u64 = 0xC0;
const CORPUS_TAG_PAIRS: u64 = 0xC1;

impl CorpusCase {
    pub fn new(seed: u64) -> CorpusCase {
        let shape = crate::derive_seed(seed, CORPUS_TAG_SHAPE);
        let n = 10 + (shape % 191) as usize;
        // Between a tree and roughly average degree four.
        let extra_edges = ((shape >> 32) % (n as u64 + 1)) as usize;
        let graph = crate::graph::random_connected(
            n,
            extra_edges,
            crate::derive_seed(seed, crate::seeds::GRAPH),
        )
        .expect("corpus parameters stay within capacity");
        let strategy = LandmarkStrategy::ALL[(seed % 3) as usize];
        let landmarks = strategy
            .select(
                &graph,
                CORPUS_LANDMARKS.min(n),
                crate::derive_seed(seed, crate::seeds::LANDMARKS),
            )
            .expect("corpus landmark count is valid");
        CorpusCase {
            seed,
            graph,
            extra_edges,
            strategy,
            landmarks,
        }
    }

    /// Every ordered pair for small graphs, otherwise a fixed seeded sample.
    pub fn query_pairs(&self) -> Vec<Query> {
        let g = &self.graph;
        let n = g.vertex_count();
        if n <= CORPUS_ALL_PAIRS_MAX_N {
            g.vertices()
                .flat_map(|s| g.vertices().map(move |t| (s, t)))
                .collect()
        } else {
            let mut rng =
                ChaCha8Rng::seed_from_u64(crate::derive_seed(self.seed, CORPUS_TAG_PAIRS));
            (0..CORPUS_SAMPLED_PAIRS)
                .map(|_| {
                    (
                        VertexId::from(rng.gen_range(0..n)),
                        VertexId::from(rng.gen_range(0..n)),
                    )
                })
                .collect()
        }
    }
}
