//! FNCEMB1 embedding tables.
//!
//! Layout (little-endian): `"FNCEMB1\0"`, `u32 N`, `u32 D`, then `N` records
//! of `u64 id` followed by `D` f32 values.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::FeatureVector;

pub const MAGIC: &[u8; 8] = b"FNCEMB1\0";
const HEADER: usize = 16;

/// Embeddings keyed by trajectory id, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    rows: Vec<FeatureVector>,
    index: HashMap<u64, usize>,
}

impl EmbeddingTable {
    pub fn new(dim: usize, rows: Vec<FeatureVector>) -> Result<Self> {
        let mut index = HashMap::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            if r.data.len() != dim {
                return Err(Error::Shape(format!("row {} has dim {}, table dim {dim}", r.source_id, r.data.len())));
            }
            if index.insert(r.source_id, i).is_some() {
                return Err(Error::Format {
                    offset: (HEADER + i * (8 + 4 * dim)) as u64,
                    msg: format!("duplicate id {}", r.source_id),
                });
            }
        }
        Ok(Self { dim, rows, index })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[FeatureVector] {
        &self.rows
    }

    pub fn get(&self, id: u64) -> Result<&FeatureVector> {
        self.index.get(&id).map(|&i| &self.rows[i]).ok_or(Error::MissingEmbedding(id))
    }

    /// Values are stored as f32.
    pub fn encode(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(HEADER + self.rows.len() * (8 + 4 * self.dim));
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(self.rows.len() as u32).to_le_bytes());
        buf.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for r in &self.rows {
            buf.extend_from_slice(&r.source_id.to_le_bytes());
            for v in &r.data {
                buf.extend_from_slice(&(*v as f32).to_le_bytes());
            }
        }
        buf
    }

    pub fn decode(buf: &[u8]) -> Result<Self> {
        if buf.len() < HEADER {
            return Err(Error::Format { offset: buf.len() as u64, msg: "truncated header".into() });
        }
        if &buf[..8] != MAGIC {
            return Err(Error::Format { offset: 0, msg: "bad magic, not an FNCEMB1 file".into() });
        }
        let n = u32::from_le_bytes(buf[8..12].try_into().unwrap()) as usize;
        let dim = u32::from_le_bytes(buf[12..16].try_into().unwrap()) as usize;
        let record = 8 + 4 * dim;
        let expected = HEADER + n * record;
        if buf.len() != expected {
            let offset = if buf.len() < expected {
                HEADER + (buf.len() - HEADER) / record * record
            } else {
                expected
            };
            return Err(Error::Format {
                offset: offset as u64,
                msg: format!("payload length {} does not match header (expected {expected})", buf.len()),
            });
        }
        let rows = buf[HEADER..]
            .chunks_exact(record)
            .map(|rec| {
                let id = u64::from_le_bytes(rec[..8].try_into().unwrap());
                let data = rec[8..]
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                    .collect();
                FeatureVector { dim, data, source_id: id }
            })
            .collect();
        Self::new(dim, rows)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::decode(&fs::read(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.encode())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EmbeddingTable {
        EmbeddingTable::new(
            3,
            vec![
                FeatureVector::new(vec![0.5, -1.25, 3.0], 7),
                FeatureVector::new(vec![1e-3_f32 as f64, 0.0, -2.0], 2),
            ],
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let t = sample();
        let bytes = t.encode();
        let back = EmbeddingTable::decode(&bytes).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.encode(), bytes);
        assert_eq!(back.get(2).unwrap().data[2], -2.0);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let bytes = sample().encode();
        match EmbeddingTable::decode(&bytes[..bytes.len() - 2]) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, (HEADER + 20) as u64),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn empty_table_is_valid() {
        let t = EmbeddingTable::new(5, vec![]).unwrap();
        let back = EmbeddingTable::decode(&t.encode()).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.dim(), 5);
    }

    #[test]
    fn duplicates_and_missing_ids() {
        let mut bytes = sample().encode();
        // Overwrite the second id with the first.
        let second = HEADER + 8 + 12;
        bytes[second..second + 8].copy_from_slice(&7u64.to_le_bytes());
        match EmbeddingTable::decode(&bytes) {
            Err(Error::Format { offset, msg }) => {
                assert_eq!(offset, second as u64);
                assert!(msg.contains("duplicate"));
            }
            other => panic!("expected duplicate error, got {other:?}"),
        }
        assert!(matches!(sample().get(99), Err(Error::MissingEmbedding(99))));
    }
}
