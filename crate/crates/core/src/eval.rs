//! Offline correlation harness for labeled similarity pairs.
//!
//! For every pair the left vector is the float query and the right vector is
//! the encoded database side. Per subset we report Spearman correlation of
//! dense cosine and of sketch scores with the labels, their difference, and
//! the Pearson correlation between sketch and dense scores. Macro values are
//! unweighted means over subsets.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::codec::{CodecConfig, EncodedVector, QuerySketch};
use crate::error::Error as CodecError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("correlation needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("undefined correlation: zero variance")]
    ZeroVariance,
    #[error("pair {pair} references missing embedding id {id}")]
    MissingId { pair: usize, id: u64 },
    #[error("embedding {id}: {source}")]
    Codec { id: u64, source: CodecError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPair {
    pub subset: String,
    pub left_id: u64,
    pub right_id: u64,
    pub label: f64,
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(EvalError::TooFewSamples(n));
    }
    let mean_x = x.iter().sum::<f64>() / n as f64;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based fractional ranks; tied values share the mean of their positions.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            out[i] = rank;
        }
        start = end;
    }
    out
}

/// Spearman correlation: Pearson of fractional ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch(x.len(), y.len()));
    }
    pearson(&ranks(x), &ranks(y))
}

pub fn cosine<T: Copy + Into<f64>>(a: &[T], b: &[T]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y): (f64, f64) = (x.into(), y.into());
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    dot / (na.sqrt() * nb.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetReport {
    pub subset: String,
    pub pairs: usize,
    pub dense_spearman: f64,
    pub sketch_spearman: f64,
    pub spearman_loss: f64,
    pub sketch_dense_pearson: f64,
}

/// A subset left out of the macro average.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcludedSubset {
    pub subset: String,
    pub pairs: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroReport {
    pub subsets: usize,
    pub pairs: usize,
    pub dense_spearman: f64,
    pub sketch_spearman: f64,
    pub spearman_loss: f64,
    pub sketch_dense_pearson: f64,
}

/// Wall-clock seconds per stage on this machine.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StageTiming {
    pub quantize_seconds: f64,
    pub score_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_subset: Vec<SubsetReport>,
    pub excluded: Vec<ExcludedSubset>,
    #[serde(rename = "macro")]
    pub macro_avg: Option<MacroReport>,
    pub timing: StageTiming,
}

impl EvalReport {
    /// Number of subsets left out of the macro average.
    pub fn warning_count(&self) -> usize {
        self.excluded.len()
    }
}

fn subset_stats(
    subset: &str,
    labels: &[f64],
    dense: &[f64],
    sketch: &[f64],
) -> Result<SubsetReport, EvalError> {
    let dense_spearman = spearman(dense, labels)?;
    let sketch_spearman = spearman(sketch, labels)?;
    let sketch_dense_pearson = pearson(sketch, dense)?;
    Ok(SubsetReport {
        subset: subset.to_string(),
        pairs: labels.len(),
        dense_spearman,
        sketch_spearman,
        spearman_loss: sketch_spearman - dense_spearman,
        sketch_dense_pearson,
    })
}

/// Builds a report from per-pair dense and sketch scores aligned with
/// `pairs`. Subsets appear in lexicographic order.
pub fn report_from_scores(pairs: &[LabeledPair], dense: &[f64], sketch: &[f64]) -> EvalReport {
    assert_eq!(pairs.len(), dense.len());
    assert_eq!(pairs.len(), sketch.len());
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, p) in pairs.iter().enumerate() {
        groups.entry(p.subset.as_str()).or_default().push(i);
    }
    let mut per_subset = Vec::new();
    let mut excluded = Vec::new();
    for (name, idx) in groups {
        let labels: Vec<f64> = idx.iter().map(|&i| pairs[i].label).collect();
        let d: Vec<f64> = idx.iter().map(|&i| dense[i]).collect();
        let s: Vec<f64> = idx.iter().map(|&i| sketch[i]).collect();
        match subset_stats(name, &labels, &d, &s) {
            Ok(r) => per_subset.push(r),
            Err(e) => excluded.push(ExcludedSubset {
                subset: name.to_string(),
                pairs: idx.len(),
                reason: e.to_string(),
            }),
        }
    }
    let macro_avg = macro_average(&per_subset);
    EvalReport { per_subset, excluded, macro_avg, timing: StageTiming::default() }
}

fn macro_average(subsets: &[SubsetReport]) -> Option<MacroReport> {
    if subsets.is_empty() {
        return None;
    }
    let n = subsets.len() as f64;
    let mean = |f: fn(&SubsetReport) -> f64| subsets.iter().map(f).sum::<f64>() / n;
    Some(MacroReport {
        subsets: subsets.len(),
        pairs: subsets.iter().map(|s| s.pairs).sum(),
        dense_spearman: mean(|s| s.dense_spearman),
        sketch_spearman: mean(|s| s.sketch_spearman),
        spearman_loss: mean(|s| s.spearman_loss),
        sketch_dense_pearson: mean(|s| s.sketch_dense_pearson),
    })
}

/// Per-pair dense and sketch scores plus stage timings.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScores {
    pub dense: Vec<f64>,
    pub sketch: Vec<f64>,
    pub timing: StageTiming,
}

/// Scores every pair: dense cosine, and the codec score of
/// `encode_query(left)` against `encode(right)`. Each distinct id is encoded
/// once per side.
pub fn score_pairs<V: AsRef<[f32]>>(
    config: &CodecConfig,
    embeddings: &HashMap<u64, V>,
    pairs: &[LabeledPair],
) -> Result<PairScores, EvalError> {
    let lookup = |pair: usize, id: u64| {
        embeddings.get(&id).map(|v| v.as_ref()).ok_or(EvalError::MissingId { pair, id })
    };
    for (i, p) in pairs.iter().enumerate() {
        lookup(i, p.left_id)?;
        lookup(i, p.right_id)?;
    }

    let start = Instant::now();
    let mut queries: HashMap<u64, QuerySketch> = HashMap::new();
    let mut database: HashMap<u64, EncodedVector> = HashMap::new();
    for (i, p) in pairs.iter().enumerate() {
        if let Entry::Vacant(slot) = queries.entry(p.left_id) {
            let q = config
                .encode_query(lookup(i, p.left_id)?)
                .map_err(|source| EvalError::Codec { id: p.left_id, source })?;
            slot.insert(q);
        }
        if let Entry::Vacant(slot) = database.entry(p.right_id) {
            let e = config
                .encode(lookup(i, p.right_id)?)
                .map_err(|source| EvalError::Codec { id: p.right_id, source })?;
            slot.insert(e);
        }
    }
    let quantize_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let sketch: Vec<f64> = pairs
        .iter()
        .map(|p| config.score(&queries[&p.left_id], &database[&p.right_id]))
        .collect();
    let score_seconds = start.elapsed().as_secs_f64();

    let mut dense = Vec::with_capacity(pairs.len());
    for (i, p) in pairs.iter().enumerate() {
        dense.push(cosine(lookup(i, p.left_id)?, lookup(i, p.right_id)?));
    }
    Ok(PairScores { dense, sketch, timing: StageTiming { quantize_seconds, score_seconds } })
}

/// Full evaluation: score every pair, then aggregate per subset and macro.
pub fn evaluate<V: AsRef<[f32]>>(
    config: &CodecConfig,
    embeddings: &HashMap<u64, V>,
    pairs: &[LabeledPair],
) -> Result<EvalReport, EvalError> {
    let scores = score_pairs(config, embeddings, pairs)?;
    let mut report = report_from_scores(pairs, &scores.dense, &scores.sketch);
    report.timing = scores.timing;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!(close(pearson(&x, &y).unwrap(), 1.0));
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!(close(pearson(&x, &neg).unwrap(), -1.0));
        // means 2, 2; sxy = (-1)(-1) + 0 + (1)(0) = 1; sxx = syy = 2
        assert!(close(pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap(), 0.5));
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(pearson(&[1.0], &[2.0]), Err(EvalError::TooFewSamples(1)));
        assert_eq!(pearson(&[1.0, 1.0], &[2.0, 3.0]), Err(EvalError::ZeroVariance));
        assert_eq!(pearson(&[1.0, 2.0], &[2.0]), Err(EvalError::LengthMismatch(2, 1)));
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(ranks(&[1.0, 1.0, 2.0]), vec![1.5, 1.5, 3.0]);
        assert_eq!(ranks(&[3.0, 1.0, 2.0, 1.0]), vec![4.0, 1.5, 3.0, 1.5]);
    }

    #[test]
    fn spearman_examples() {
        let x = [0.1, 0.5, 0.7, 2.0, 9.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| v.exp()).collect();
        assert!(close(spearman(&x, &y).unwrap(), 1.0));
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        assert!(close(spearman(&x, &rev).unwrap(), -1.0));
        // ranks [1.5, 1.5, 3] vs [1, 2, 3]: sxy = 1.5, sxx = 1.5, syy = 2
        let want = 1.5 / (1.5f64.sqrt() * 2f64.sqrt());
        assert!(close(spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap(), want));
    }

    #[test]
    fn degenerate_subset_is_excluded() {
        let pairs = vec![
            LabeledPair { subset: "a".into(), left_id: 0, right_id: 1, label: 1.0 },
            LabeledPair { subset: "a".into(), left_id: 0, right_id: 2, label: 2.0 },
            LabeledPair { subset: "a".into(), left_id: 0, right_id: 3, label: 3.0 },
            LabeledPair { subset: "b".into(), left_id: 0, right_id: 1, label: 1.0 },
        ];
        let dense = [0.1, 0.2, 0.4, 0.3];
        let sketch = [0.2, 0.1, 0.5, 0.3];
        let r = report_from_scores(&pairs, &dense, &sketch);
        assert_eq!(r.per_subset.len(), 1);
        assert_eq!(r.excluded.len(), 1);
        assert_eq!(r.excluded[0].subset, "b");
        assert_eq!(r.warning_count(), 1);
        let m = r.macro_avg.unwrap();
        assert_eq!(m.subsets, 1);
        assert_eq!(m.dense_spearman, r.per_subset[0].dense_spearman);
    }

    #[test]
    fn missing_id_is_reported() {
        let mut emb: HashMap<u64, Vec<f32>> = HashMap::new();
        emb.insert(0, vec![1.0; 384]);
        let pairs = vec![LabeledPair { subset: "x".into(), left_id: 0, right_id: 9, label: 0.0 }];
        let err = evaluate(&CodecConfig::default_profile(), &emb, &pairs).unwrap_err();
        assert_eq!(err, EvalError::MissingId { pair: 0, id: 9 });
    }
}
