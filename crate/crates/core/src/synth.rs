//! Synthetic vectors and labeled pairs with planted cosines, for demos and
//! tests that have no real embedding model at hand.

use crate::eval::LabeledPair;
use crate::formats::EmbeddingRecord;
use crate::hash::SplitMix64;

/// Uniformly random direction in `d` dimensions.
pub fn unit_vector(g: &mut SplitMix64, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| g.next_gaussian()).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Two unit vectors whose inner product is `cos` (up to rounding).
/// Requires `d >= 2` and `cos` in `[-1, 1]`.
pub fn planted_pair(g: &mut SplitMix64, d: usize, cos: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(d >= 2, "planted pairs need d >= 2");
    let x = unit_vector(g, d);
    let w = loop {
        let mut w: Vec<f64> = (0..d).map(|_| g.next_gaussian()).collect();
        let proj: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
        for (wi, xi) in w.iter_mut().zip(&x) {
            *wi -= proj * xi;
        }
        let n = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-9 {
            break w.into_iter().map(|v| v / n).collect::<Vec<_>>();
        }
    };
    let cos = cos.clamp(-1.0, 1.0);
    let sin = (1.0 - cos * cos).sqrt();
    let y = x.iter().zip(&w).map(|(a, b)| cos * a + sin * b).collect();
    (x, y)
}

#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub d: usize,
    pub pairs_per_subset: usize,
    pub subsets: Vec<String>,
    /// Standard deviation of Gaussian noise added to the planted cosine to
    /// form the label.
    pub label_noise: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub records: Vec<EmbeddingRecord>,
    pub pairs: Vec<LabeledPair>,
    /// Planted cosine of each pair, aligned with `pairs`.
    pub planted: Vec<f64>,
}

/// Builds a corpus: each pair gets a fresh planted cosine drawn uniformly
/// from `[-1, 1]`, vectors get random norms in `[0.5, 2)`, and labels are
/// the planted cosine plus noise.
pub fn planted_corpus(spec: &CorpusSpec) -> Corpus {
    let mut g = SplitMix64::new(spec.seed);
    let mut records = Vec::new();
    let mut pairs = Vec::new();
    let mut planted = Vec::new();
    let mut next_id = 0u64;
    for subset in &spec.subsets {
        for _ in 0..spec.pairs_per_subset {
            let cos = 2.0 * g.next_f64() - 1.0;
            let (x, y) = planted_pair(&mut g, spec.d, cos);
            let mut ids = [0u64; 2];
            for (slot, v) in ids.iter_mut().zip([x, y]) {
                let scale = 0.5 + 1.5 * g.next_f64();
                records.push(EmbeddingRecord { id: next_id, values: v.iter().map(|a| (a * scale) as f32).collect() });
                *slot = next_id;
                next_id += 1;
            }
            let label = cos + spec.label_noise * g.next_gaussian();
            pairs.push(LabeledPair { subset: subset.clone(), left_id: ids[0], right_id: ids[1], label });
            planted.push(cos);
        }
    }
    Corpus { records, pairs, planted }
}
