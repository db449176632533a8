//! Exact linear scan over stored codes.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::Serialize;

use crate::codec::{CodecConfig, EncodedVector, QuerySketch};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoredHit {
    pub id: u64,
    pub score: f64,
}

/// Descending score, then ascending id.
pub fn hit_order(a: &ScoredHit, b: &ScoredHit) -> Ordering {
    b.score.total_cmp(&a.score).then(a.id.cmp(&b.id))
}

/// Append-only collection of `(id, code)` pairs under one config.
///
/// Only codes are kept; original vectors are never stored.
#[derive(Debug, Clone)]
pub struct FlatIndex {
    config: CodecConfig,
    ids: Vec<u64>,
    codes: Vec<EncodedVector>,
    seen: HashSet<u64>,
}

impl FlatIndex {
    pub fn new(config: CodecConfig) -> Self {
        Self { config, ids: Vec::new(), codes: Vec::new(), seen: HashSet::new() }
    }

    pub fn config(&self) -> &CodecConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: u64) -> bool {
        self.seen.contains(&id)
    }

    /// Encodes `x` and appends it. Fails without modifying the index on a
    /// duplicate id or an unencodable vector.
    pub fn add<T: Copy + Into<f64>>(&mut self, id: u64, x: &[T]) -> Result<()> {
        if self.contains(id) {
            return Err(Error::DuplicateId(id));
        }
        let encoded = self.config.encode(x)?;
        self.push(id, encoded);
        Ok(())
    }

    /// Appends an already-encoded vector after checking it against the
    /// index config.
    pub fn add_encoded(&mut self, id: u64, encoded: EncodedVector) -> Result<()> {
        if self.contains(id) {
            return Err(Error::DuplicateId(id));
        }
        let encoded = EncodedVector::from_parts(&self.config, encoded.packed().to_vec(), encoded.norm_code())?;
        self.push(id, encoded);
        Ok(())
    }

    fn push(&mut self, id: u64, encoded: EncodedVector) {
        self.seen.insert(id);
        self.ids.push(id);
        self.codes.push(encoded);
    }

    /// Entries in insertion order.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = (u64, &EncodedVector)> + '_ {
        self.ids.iter().copied().zip(self.codes.iter())
    }

    pub fn get(&self, id: u64) -> Option<&EncodedVector> {
        self.ids.iter().position(|&i| i == id).map(|p| &self.codes[p])
    }

    pub fn topk<T: Copy + Into<f64>>(&self, query: &[T], k: usize) -> Result<Vec<ScoredHit>> {
        let q = self.config.encode_query(query)?;
        self.topk_sketch(&q, k)
    }

    pub fn topk_sketch(&self, query: &QuerySketch, k: usize) -> Result<Vec<ScoredHit>> {
        let config = self.config;
        self.topk_with(query, k, |q, e| config.score(q, e))
    }

    /// Top-k with a caller-supplied scorer, called exactly once per entry.
    pub fn topk_with<F>(&self, query: &QuerySketch, k: usize, mut scorer: F) -> Result<Vec<ScoredHit>>
    where
        F: FnMut(&QuerySketch, &EncodedVector) -> f64,
    {
        if k == 0 {
            return Err(Error::ZeroK);
        }
        let mut hits: Vec<ScoredHit> = self
            .iter()
            .map(|(id, e)| ScoredHit { id, score: scorer(query, e) })
            .collect();
        if k < hits.len() {
            hits.select_nth_unstable_by(k - 1, hit_order);
            hits.truncate(k);
        }
        hits.sort_unstable_by(hit_order);
        Ok(hits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::SplitMix64;

    fn vector(g: &mut SplitMix64, d: usize) -> Vec<f32> {
        (0..d).map(|_| g.next_gaussian() as f32).collect()
    }

    #[test]
    fn add_matches_standalone_encode() {
        let config = CodecConfig::default_profile();
        let mut index = FlatIndex::new(config);
        let mut g = SplitMix64::new(1);
        let xs: Vec<Vec<f32>> = (0..3).map(|_| vector(&mut g, 384)).collect();
        for (id, x) in xs.iter().enumerate() {
            index.add(id as u64, x).unwrap();
        }
        assert_eq!(index.len(), 3);
        for ((_, e), x) in index.iter().zip(&xs) {
            assert_eq!(e, &config.encode(x).unwrap());
        }
    }

    #[test]
    fn duplicate_id_leaves_index_unchanged() {
        let mut index = FlatIndex::new(CodecConfig::default_profile());
        let mut g = SplitMix64::new(2);
        index.add(5, &vector(&mut g, 384)).unwrap();
        let before: Vec<_> = index.iter().map(|(i, e)| (i, e.clone())).collect();
        assert_eq!(index.add(5, &vector(&mut g, 384)), Err(Error::DuplicateId(5)));
        assert!(index.add(6, &[0.0f32; 384]).is_err());
        let after: Vec<_> = index.iter().map(|(i, e)| (i, e.clone())).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn single_entry_topk() {
        let mut index = FlatIndex::new(CodecConfig::default_profile());
        let mut g = SplitMix64::new(3);
        let x = vector(&mut g, 384);
        index.add(42, &x).unwrap();
        let hits = index.topk(&x, 1).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].id, 42);
        assert!(index.topk(&x, 0).is_err());
    }

    #[test]
    fn k_larger_than_index() {
        let mut index = FlatIndex::new(CodecConfig::default_profile());
        let mut g = SplitMix64::new(4);
        for id in 0..7 {
            index.add(id, &vector(&mut g, 384)).unwrap();
        }
        let hits = index.topk(&vector(&mut g, 384), 100).unwrap();
        assert_eq!(hits.len(), 7);
        assert!(hits.windows(2).all(|w| hit_order(&w[0], &w[1]) == Ordering::Less));
    }

    #[test]
    fn ties_break_by_ascending_id() {
        let config = CodecConfig::default_profile();
        let mut index = FlatIndex::new(config);
        let mut g = SplitMix64::new(9);
        let x = vector(&mut g, 384);
        for id in [30u64, 10, 20] {
            index.add(id, &x).unwrap();
        }
        let hits = index.topk(&x, 2).unwrap();
        assert_eq!(hits.iter().map(|h| h.id).collect::<Vec<_>>(), vec![10, 20]);
    }

    #[test]
    fn scan_scores_each_entry_once() {
        let config = CodecConfig::default_profile();
        let mut index = FlatIndex::new(config);
        let mut g = SplitMix64::new(6);
        for id in 0..37 {
            index.add(id, &vector(&mut g, 384)).unwrap();
        }
        let q = config.encode_query(&vector(&mut g, 384)).unwrap();
        let mut calls = 0;
        index
            .topk_with(&q, 5, |q, e| {
                calls += 1;
                config.score(q, e)
            })
            .unwrap();
        assert_eq!(calls, 37);
    }
}
