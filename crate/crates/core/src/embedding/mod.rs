//! Landmark embeddings.
//!
//! [`AltEmbedding`] keeps the full landmark-to-vertex distance table.
//! [`DistributedEmbedding`] keeps one `(owner landmark, distance)` label per
//! vertex, where each vertex belongs to the region of its nearest landmark,
//! plus the pairwise landmark matrix. Both store true graph distances.

mod codec;
mod select;

pub use codec::{CodecError, Embedding, EmbeddingKind};
pub use select::{
    select_avoid, select_avoid_with_roots, select_farthest, select_farthest_from, select_random,
    LandmarkStrategy,
};

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{Graph, VertexId, Weight};
use crate::sssp::{self, DistanceMatrix, KernelStats, SsspError};

#[derive(Debug, Error, PartialEq)]
pub enum EmbeddingError {
    #[error("landmark set is empty")]
    NoLandmarks,
    #[error("landmark {0} is listed twice")]
    DuplicateLandmark(VertexId),
    #[error("landmark {0} is out of range")]
    OutOfRange(VertexId),
    #[error("landmark count {k} must lie in 1..={n}")]
    CountOutOfRange { k: usize, n: usize },
    #[error("vertex {0} is unreachable from every landmark")]
    Unreachable(VertexId),
    #[error(transparent)]
    Sssp(#[from] SsspError),
}

/// Ordered, nonempty set of distinct landmark vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LandmarkSet(Vec<VertexId>);

impl LandmarkSet {
    pub fn new(g: &Graph, ids: Vec<VertexId>) -> Result<LandmarkSet, EmbeddingError> {
        if ids.is_empty() {
            return Err(EmbeddingError::NoLandmarks);
        }
        let mut seen = vec![false; g.vertex_count()];
        for &l in &ids {
            if !g.contains(l) {
                return Err(EmbeddingError::OutOfRange(l));
            }
            if std::mem::replace(&mut seen[l.index()], true) {
                return Err(EmbeddingError::DuplicateLandmark(l));
            }
        }
        Ok(LandmarkSet(ids))
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> VertexId {
        self.0[i]
    }

    /// Index of `v` in the set, if it is a landmark.
    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.0.iter().position(|&l| l == v)
    }
}

/// Stored distance entries versus the closed-form prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpaceAccount {
    pub entries: usize,
    pub formula_entries: usize,
}

pub trait SpaceAccounting {
    /// Distance values actually held in memory.
    fn stored_entries(&self) -> usize;
    /// `|L|·|V| + |L|²` for full tables, `|V| + |L|²` for distributed ones.
    fn formula_entries(&self) -> usize;
}

pub fn space_accounting<E: SpaceAccounting + ?Sized>(e: &E) -> SpaceAccount {
    SpaceAccount {
        entries: e.stored_entries(),
        formula_entries: e.formula_entries(),
    }
}

/// Full landmark table: `d(l, v)` for every landmark and vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct AltEmbedding {
    landmarks: LandmarkSet,
    vertex_count: usize,
    /// Row-major `|L| x |V|`.
    table: Vec<Weight>,
    lmatrix: DistanceMatrix,
}

impl AltEmbedding {
    pub fn landmarks(&self) -> &LandmarkSet {
        &self.landmarks
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    #[inline]
    pub fn dist(&self, landmark: usize, v: VertexId) -> Weight {
        self.table[landmark * self.vertex_count + v.index()]
    }

    pub fn row(&self, landmark: usize) -> &[Weight] {
        &self.table[landmark * self.vertex_count..(landmark + 1) * self.vertex_count]
    }

    pub fn lmatrix(&self) -> &DistanceMatrix {
        &self.lmatrix
    }

    pub(crate) fn from_parts(
        landmarks: LandmarkSet,
        vertex_count: usize,
        table: Vec<Weight>,
        lmatrix: DistanceMatrix,
    ) -> AltEmbedding {
        AltEmbedding {
            landmarks,
            vertex_count,
            table,
            lmatrix,
        }
    }

    pub(crate) fn table(&self) -> &[Weight] {
        &self.table
    }
}

impl SpaceAccounting for AltEmbedding {
    fn stored_entries(&self) -> usize {
        self.table.len() + self.lmatrix.as_slice().len()
    }

    fn formula_entries(&self) -> usize {
        let l = self.landmarks.len();
        l * self.vertex_count + l * l
    }
}

/// Per-vertex owner label plus the landmark matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributedEmbedding {
    landmarks: LandmarkSet,
    owner: Vec<u32>,
    dist_to_owner: Vec<Weight>,
    lmatrix: DistanceMatrix,
}

impl DistributedEmbedding {
    pub fn landmarks(&self) -> &LandmarkSet {
        &self.landmarks
    }

    pub fn vertex_count(&self) -> usize {
        self.owner.len()
    }

    /// Index (into the landmark set) of the landmark owning `v`.
    #[inline]
    pub fn owner(&self, v: VertexId) -> usize {
        self.owner[v.index()] as usize
    }

    #[inline]
    pub fn dist_to_owner(&self, v: VertexId) -> Weight {
        self.dist_to_owner[v.index()]
    }

    pub fn lmatrix(&self) -> &DistanceMatrix {
        &self.lmatrix
    }

    pub fn owners(&self) -> &[u32] {
        &self.owner
    }

    pub fn distances(&self) -> &[Weight] {
        &self.dist_to_owner
    }

    /// Vertices whose owner is landmark `i`.
    pub fn partition(&self, i: usize) -> impl Iterator<Item = VertexId> + '_ {
        self.owner
            .iter()
            .enumerate()
            .filter(move |&(_, &o)| o as usize == i)
            .map(|(v, _)| VertexId::from(v))
    }

    pub(crate) fn from_parts(
        landmarks: LandmarkSet,
        owner: Vec<u32>,
        dist_to_owner: Vec<Weight>,
        lmatrix: DistanceMatrix,
    ) -> DistributedEmbedding {
        DistributedEmbedding {
            landmarks,
            owner,
            dist_to_owner,
            lmatrix,
        }
    }
}

impl SpaceAccounting for DistributedEmbedding {
    fn stored_entries(&self) -> usize {
        self.dist_to_owner.len() + self.lmatrix.as_slice().len()
    }

    fn formula_entries(&self) -> usize {
        let l = self.landmarks.len();
        self.owner.len() + l * l
    }
}

pub fn build_alt_embedding(
    g: &Graph,
    landmarks: &LandmarkSet,
) -> Result<AltEmbedding, EmbeddingError> {
    build_alt_embedding_with_stats(g, landmarks).map(|(e, _)| e)
}

/// One full tree per landmark; the landmark matrix is read off those rows.
pub fn build_alt_embedding_with_stats(
    g: &Graph,
    landmarks: &LandmarkSet,
) -> Result<(AltEmbedding, KernelStats), EmbeddingError> {
    let n = g.vertex_count();
    let runs: Vec<(Vec<Weight>, KernelStats)> = landmarks
        .ids()
        .par_iter()
        .map(|&l| {
            let mut stats = KernelStats::default();
            let map = sssp::ranked_regions(g, &[l], &mut stats);
            (map.dist, stats)
        })
        .collect();

    let k = landmarks.len();
    let mut stats = KernelStats::default();
    let mut table = Vec::with_capacity(k * n);
    for (row, s) in runs {
        if let Some(v) = row.iter().position(|d| !d.is_finite()) {
            return Err(EmbeddingError::Unreachable(VertexId::from(v)));
        }
        table.extend(row);
        stats += s;
    }
    let lmatrix = DistanceMatrix::from_flat(
        k,
        (0..k)
            .flat_map(|i| {
                let row = &table[i * n..(i + 1) * n];
                landmarks.ids().iter().map(move |l| row[l.index()])
            })
            .collect(),
    );
    Ok((
        AltEmbedding {
            landmarks: landmarks.clone(),
            vertex_count: n,
            table,
            lmatrix,
        },
        stats,
    ))
}

pub fn build_distributed_embedding(
    g: &Graph,
    landmarks: &LandmarkSet,
) -> Result<DistributedEmbedding, EmbeddingError> {
    build_distributed_embedding_with_stats(g, landmarks).map(|(e, _)| e)
}

/// One multi-source pass assigns each vertex to its nearest landmark (ties to
/// the smaller landmark index) and records the true distance to it; one
/// truncated run per landmark fills the landmark matrix.
pub fn build_distributed_embedding_with_stats(
    g: &Graph,
    landmarks: &LandmarkSet,
) -> Result<(DistributedEmbedding, KernelStats), EmbeddingError> {
    let mut stats = KernelStats::default();
    let regions = sssp::ranked_regions(g, landmarks.ids(), &mut stats);

    let mut index_of = vec![u32::MAX; g.vertex_count()];
    for (i, l) in landmarks.ids().iter().enumerate() {
        index_of[l.index()] = i as u32;
    }
    let mut owner = Vec::with_capacity(g.vertex_count());
    for (v, o) in regions.owner.iter().enumerate() {
        match o {
            Some(l) => owner.push(index_of[l.index()]),
            None => return Err(EmbeddingError::Unreachable(VertexId::from(v))),
        }
    }
    let lmatrix = sssp::landmark_matrix_counted(g, landmarks.ids(), &mut stats);
    Ok((
        DistributedEmbedding {
            landmarks: landmarks.clone(),
            owner,
            dist_to_owner: regions.dist,
            lmatrix,
        },
        stats,
    ))
}
