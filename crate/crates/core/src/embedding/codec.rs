//! Versioned binary encoding for embeddings.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! offset  size        field
//! 0       8           magic  b"LMKEMBED"
//! 8       4   u32     format version (1)
//! 12      4   u32     kind: 1 = full table, 2 = distributed
//! 16      8   u64     |V|
//! 24      8   u64     |L|
//! 32      4·|L| u32   landmark vertex ids, in landmark-index order
//! then, kind 1:
//!         8·|L|·|V| f64   table, row-major by landmark
//!         8·|L|²    f64   landmark matrix, row-major
//! or kind 2:
//!         4·|V|     u32   owner landmark index per vertex
//!         8·|V|     f64   distance to owner per vertex
//!         8·|L|²    f64   landmark matrix, row-major
//! ```

use std::io::{Read, Write};

use thiserror::Error;

use super::{AltEmbedding, DistributedEmbedding, LandmarkSet};
use crate::graph::{VertexId, Weight};
use crate::sssp::DistanceMatrix;

pub const MAGIC: &[u8; 8] = b"LMKEMBED";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingKind {
    Full = 1,
    Distributed = 2,
}

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("not an embedding file (bad magic)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("unknown embedding kind {0}")]
    Kind(u32),
    #[error("corrupt embedding: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Either embedding, as read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub enum Embedding {
    Full(AltEmbedding),
    Distributed(DistributedEmbedding),
}

impl Embedding {
    pub fn kind(&self) -> EmbeddingKind {
        match self {
            Embedding::Full(_) => EmbeddingKind::Full,
            Embedding::Distributed(_) => EmbeddingKind::Distributed,
        }
    }

    pub fn landmarks(&self) -> &LandmarkSet {
        match self {
            Embedding::Full(e) => e.landmarks(),
            Embedding::Distributed(e) => e.landmarks(),
        }
    }

    pub fn write_to<W: Write>(&self, out: W) -> std::io::Result<()> {
        match self {
            Embedding::Full(e) => e.write_to(out),
            Embedding::Distributed(e) => e.write_to(out),
        }
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Embedding, CodecError> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(CodecError::BadMagic);
        }
        let version = read_u32(&mut input)?;
        if version != VERSION {
            return Err(CodecError::Version(version));
        }
        let kind = read_u32(&mut input)?;
        let n = read_len(&mut input)?;
        let k = read_len(&mut input)?;
        if k == 0 || k > n {
            return Err(CodecError::Corrupt(format!(
                "{k} landmarks over {n} vertices"
            )));
        }
        let mut ids = Vec::with_capacity(k);
        let mut seen = std::collections::HashSet::with_capacity(k);
        for _ in 0..k {
            let id = read_u32(&mut input)?;
            if id as usize >= n || !seen.insert(id) {
                return Err(CodecError::Corrupt(format!("bad landmark id {id}")));
            }
            ids.push(VertexId(id));
        }
        let landmarks = LandmarkSet(ids);
        let embedding = match kind {
            1 => {
                let table = read_f64s(&mut input, k * n)?;
                let lmatrix = DistanceMatrix::from_flat(k, read_f64s(&mut input, k * k)?);
                Embedding::Full(AltEmbedding::from_parts(landmarks, n, table, lmatrix))
            }
            2 => {
                let mut owner = Vec::with_capacity(n);
                for _ in 0..n {
                    let o = read_u32(&mut input)?;
                    if o as usize >= k {
                        return Err(CodecError::Corrupt(format!("owner index {o} >= {k}")));
                    }
                    owner.push(o);
                }
                let dist = read_f64s(&mut input, n)?;
                let lmatrix = DistanceMatrix::from_flat(k, read_f64s(&mut input, k * k)?);
                Embedding::Distributed(DistributedEmbedding::from_parts(
                    landmarks, owner, dist, lmatrix,
                ))
            }
            other => return Err(CodecError::Kind(other)),
        };
        let mut rest = [0u8; 1];
        if input.read(&mut rest)? != 0 {
            return Err(CodecError::Corrupt("trailing bytes".into()));
        }
        Ok(embedding)
    }
}

fn write_header<W: Write>(
    out: &mut W,
    kind: EmbeddingKind,
    n: usize,
    landmarks: &LandmarkSet,
) -> std::io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(kind as u32).to_le_bytes())?;
    out.write_all(&(n as u64).to_le_bytes())?;
    out.write_all(&(landmarks.len() as u64).to_le_bytes())?;
    for l in landmarks.ids() {
        out.write_all(&l.0.to_le_bytes())?;
    }
    Ok(())
}

fn write_f64s<W: Write>(out: &mut W, values: &[Weight]) -> std::io::Result<()> {
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(input: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_len<R: Read>(input: &mut R) -> Result<usize, CodecError> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    usize::try_from(u64::from_le_bytes(b))
        .map_err(|_| CodecError::Corrupt("length overflow".into()))
}

fn read_f64s<R: Read>(input: &mut R, count: usize) -> Result<Vec<Weight>, CodecError> {
    let mut bytes = vec![
        0u8;
        count
            .checked_mul(8)
            .ok_or_else(|| CodecError::Corrupt("size overflow".into()))?
    ];
    input.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

impl AltEmbedding {
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write_header(
            &mut out,
            EmbeddingKind::Full,
            self.vertex_count(),
            self.landmarks(),
        )?;
        write_f64s(&mut out, self.table())?;
        write_f64s(&mut out, self.lmatrix().as_slice())?;
        out.flush()
    }
}

impl DistributedEmbedding {
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write_header(
            &mut out,
            EmbeddingKind::Distributed,
            self.vertex_count(),
            self.landmarks(),
        )?;
        for o in self.owners() {
            out.write_all(&o.to_le_bytes())?;
        }
        write_f64s(&mut out, self.distances())?;
        write_f64s(&mut out, self.lmatrix().as_slice())?;
        out.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{build_alt_embedding, build_distributed_embedding, select_random};
    use crate::graph::{random_connected, Graph};
    use proptest::prelude::*;

    fn p6_embeddings() -> (AltEmbedding, DistributedEmbedding) {
        let g = Graph::from_edges(6, (0..5).map(|i| (i, i + 1, 1.0))).unwrap();
        let l = LandmarkSet::new(&g, vec![VertexId(0), VertexId(5)]).unwrap();
        (
            build_alt_embedding(&g, &l).unwrap(),
            build_distributed_embedding(&g, &l).unwrap(),
        )
    }

    #[test]
    fn distributed_layout_is_exact() {
        let (_, alp) = p6_embeddings();
        let mut buf = Vec::new();
        alp.write_to(&mut buf).unwrap();
        // header 32 + ids 8 + owners 24 + dists 48 + matrix 32
        assert_eq!(buf.len(), 32 + 8 + 24 + 48 + 32);
        assert_eq!(&buf[..8], b"LMKEMBED");
        assert_eq!(&buf[8..12], &1u32.to_le_bytes());
        assert_eq!(&buf[12..16], &2u32.to_le_bytes());
        assert_eq!(&buf[16..24], &6u64.to_le_bytes());
        assert_eq!(&buf[24..32], &2u64.to_le_bytes());
        assert_eq!(&buf[32..36], &0u32.to_le_bytes());
        assert_eq!(&buf[36..40], &5u32.to_le_bytes());
        assert_eq!(&buf[40 + 12..40 + 16], &1u32.to_le_bytes());
        assert_eq!(&buf[64 + 8 * 3..64 + 8 * 4], &2.0f64.to_le_bytes());
    }

    #[test]
    fn full_layout_size() {
        let (alt, _) = p6_embeddings();
        let mut buf = Vec::new();
        alt.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 40 + 8 * 12 + 8 * 4);
        assert_eq!(&buf[12..16], &1u32.to_le_bytes());
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(
            Embedding::read_from(&b"NOTMAGIC........"[..]),
            Err(CodecError::BadMagic)
        ));
        let (alt, _) = p6_embeddings();
        let mut buf = Vec::new();
        alt.write_to(&mut buf).unwrap();
        let mut wrong_version = buf.clone();
        wrong_version[8] = 9;
        assert!(matches!(
            Embedding::read_from(wrong_version.as_slice()),
            Err(CodecError::Version(9))
        ));
        let mut truncated = buf.clone();
        truncated.pop();
        assert!(matches!(
            Embedding::read_from(truncated.as_slice()),
            Err(CodecError::Io(_))
        ));
        buf.push(0);
        assert!(matches!(
            Embedding::read_from(buf.as_slice()),
            Err(CodecError::Corrupt(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn round_trip(n in 2usize..60, k in 1usize..6, seed: u64) {
            let g = random_connected(n, (n - 1) / 2, seed).unwrap();
            let l = select_random(&g, k.min(n), seed).unwrap();
            for e in [
                Embedding::Full(build_alt_embedding(&g, &l).unwrap()),
                Embedding::Distributed(build_distributed_embedding(&g, &l).unwrap()),
            ] {
                let mut buf = Vec::new();
                e.write_to(&mut buf).unwrap();
                prop_assert_eq!(Embedding::read_from(buf.as_slice()).unwrap(), e);
            }
        }
    }
}
