//! Browser bindings for the sketch codec demo page.
//!
//! Each exported function takes plain numbers and returns a JSON string the
//! page plots. The work is done by the `demo_*` functions, which are ordinary
//! Rust and tested natively.

use embsketch::eval::pearson;
use embsketch::hash::SplitMix64;
use embsketch::{synth, CodecConfig, ConfigParams, Metric};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct Profile {
    pub d: usize,
    pub m: usize,
    pub b: u8,
    pub metric: Metric,
    pub bytes_per_vector: usize,
    pub dense_bytes: usize,
    pub ratio: f64,
    pub levels: u32,
    pub step: f64,
}

#[derive(Debug, Serialize)]
pub struct QuantizerCurve {
    pub z: Vec<f64>,
    pub zhat: Vec<f64>,
    pub step: f64,
    pub max_error: f64,
}

#[derive(Debug, Serialize)]
pub struct Scatter {
    pub cosine: Vec<f64>,
    pub sketch: Vec<f64>,
    pub float_sketch: Vec<f64>,
    pub pearson_sketch: f64,
    pub pearson_float: f64,
    pub mean_self_score: f64,
    pub bytes_per_vector: usize,
}

fn params(d: u32, m: u32, b: u32, s: u32, clip: f64, dot: bool, seed: u64) -> ConfigParams {
    ConfigParams {
        d: u64::from(d),
        m: u64::from(m),
        b: u64::from(b),
        s: u64::from(s),
        c: clip,
        metric: if dot { Metric::Dot } else { Metric::Cosine },
        seed,
        ..Default::default()
    }
}

fn config(p: ConfigParams) -> Result<CodecConfig, String> {
    p.validate().map_err(|e| e.to_string())
}

pub fn demo_profile(d: u32, m: u32, b: u32, dot: bool) -> Result<Profile, String> {
    let c = config(params(d, m, b, 4, 3.0, dot, 12345))?;
    Ok(Profile {
        d: c.dim(),
        m: c.sketch_dim(),
        b: c.bits(),
        metric: c.metric(),
        bytes_per_vector: c.code_size_bytes(),
        dense_bytes: c.dense_bytes(),
        ratio: c.compression_ratio(),
        levels: c.levels(),
        step: c.step(),
    })
}

/// Quantize-dequantize transfer curve over `[-1.5c, 1.5c]`.
pub fn demo_quantizer(b: u32, clip: f64, samples: u32) -> Result<QuantizerCurve, String> {
    let c = config(params(1, 1, b, 1, clip, false, 0))?;
    let n = samples.clamp(2, 20_000);
    let lo = -1.5 * clip;
    let span = 3.0 * clip;
    let mut z = Vec::with_capacity(n as usize);
    let mut zhat = Vec::with_capacity(n as usize);
    let mut max_error = 0.0f64;
    for t in 0..n {
        let v = lo + span * f64::from(t) / f64::from(n - 1);
        let back = c.dequantize(c.quantize(v).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        if v.abs() <= clip {
            max_error = max_error.max((back - v).abs());
        }
        z.push(v);
        zhat.push(back);
    }
    Ok(QuantizerCurve { z, zhat, step: c.step(), max_error })
}

/// Planted-cosine pairs scored three ways: exact, quantized sketch, and the
/// unquantized float sketch.
#[allow(clippy::too_many_arguments)]
pub fn demo_scatter(d: u32, m: u32, b: u32, s: u32, clip: f64, seed: u64, pairs: u32, data_seed: u64) -> Result<Scatter, String> {
    if d < 2 {
        return Err("d must be at least 2".into());
    }
    let c = config(params(d, m, b, s, clip, false, seed))?;
    let mut g = SplitMix64::new(data_seed);
    let n = pairs.clamp(3, 5000) as usize;
    let mut out = Scatter {
        cosine: Vec::with_capacity(n),
        sketch: Vec::with_capacity(n),
        float_sketch: Vec::with_capacity(n),
        pearson_sketch: 0.0,
        pearson_float: 0.0,
        mean_self_score: 0.0,
        bytes_per_vector: c.code_size_bytes(),
    };
    let mut self_total = 0.0;
    for _ in 0..n {
        let cos = 2.0 * g.next_f64() - 1.0;
        let (x, y) = synth::planted_pair(&mut g, c.dim(), cos);
        let q = c.encode_query(&x).map_err(|e| e.to_string())?;
        let t = c.encode_traced(&y).map_err(|e| e.to_string())?;
        let float: f64 = q.sketch().iter().zip(&t.z).map(|(a, z)| a * z).sum::<f64>() / c.sketch_dim() as f64;
        out.cosine.push(cos);
        out.sketch.push(c.score(&q, &t.encoded));
        out.float_sketch.push(float);
        self_total += c.score(&q, &c.encode(&x).map_err(|e| e.to_string())?);
    }
    out.pearson_sketch = pearson(&out.sketch, &out.cosine).map_err(|e| e.to_string())?;
    out.pearson_float = pearson(&out.float_sketch, &out.cosine).map_err(|e| e.to_string())?;
    out.mean_self_score = self_total / n as f64;
    Ok(out)
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string())).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn storage_profile(d: u32, m: u32, bits: u32, dot: bool) -> Result<String, JsValue> {
    to_js(demo_profile(d, m, bits, dot))
}

#[wasm_bindgen]
pub fn quantizer_curve(bits: u32, clip: f64, samples: u32) -> Result<String, JsValue> {
    to_js(demo_quantizer(bits, clip, samples))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn planted_scatter(d: u32, m: u32, bits: u32, sparsity: u32, clip: f64, seed: u32, pairs: u32, data_seed: u32) -> Result<String, JsValue> {
    to_js(demo_scatter(d, m, bits, sparsity, clip, u64::from(seed), pairs, u64::from(data_seed)))
}
