//! Two-head text layout model: a small ReLU perceptron predicting per-line
//! widths (head 1) and the typesetting form (head 2).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::typeset::{TypesettingForm, FORM_COUNT};
use crate::geometry::Rect;
use crate::template::{Template, TemplateLibrary, TextRole, MAX_TEXT_LINES};
use crate::MODEL_FORMAT;

pub const PER_LINE_FEATURES: usize = 10;
pub const INPUT_DIM: usize = PER_LINE_FEATURES * MAX_TEXT_LINES + 1;
pub const OUTPUT_DIM: usize = MAX_TEXT_LINES + FORM_COUNT;
pub const WIDTH_NORMALIZER: f64 = 1000.0;
pub const WIDTH_CLAMP: (f64, f64) = (0.2, 1.0);

/// Per line: chars/20, class fractions (upper, lower, digit, CJK, punct),
/// role one-hot, presence; then canvas width / 1000.
pub fn text_features(texts: &[String], canvas_w: f64) -> Vec<f64> {
    let mut f = vec![0.0; INPUT_DIM];
    for (i, text) in texts.iter().take(MAX_TEXT_LINES).enumerate() {
        let base = i * PER_LINE_FEATURES;
        let chars: Vec<char> = text.chars().collect();
        let n = chars.len() as f64;
        f[base] = n / 20.0;
        if n > 0.0 {
            for &c in &chars {
                let class = if crate::request::is_cjk(c) {
                    Some(4)
                } else if c.is_uppercase() {
                    Some(1)
                } else if c.is_lowercase() {
                    Some(2)
                } else if c.is_numeric() {
                    Some(3)
                } else if c.is_ascii_punctuation() || (!c.is_whitespace() && !c.is_alphanumeric()) {
                    Some(5)
                } else {
                    None
                };
                if let Some(k) = class {
                    f[base + k] += 1.0 / n;
                }
            }
        }
        f[base + 6 + i] = 1.0;
        f[base + 9] = 1.0;
    }
    f[INPUT_DIM - 1] = canvas_w / WIDTH_NORMALIZER;
    f
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn new(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Dense {
        let normal = Normal::new(0.0, (2.0 / cols as f64).sqrt()).expect("valid std");
        Dense { rows, cols, weights: (0..rows * cols).map(|_| normal.sample(rng)).collect(), bias: vec![0.0; rows] }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                let row = &self.weights[r * self.cols..(r + 1) * self.cols];
                self.bias[r] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }

    fn zeros_like(&self) -> Dense {
        Dense {
            rows: self.rows,
            cols: self.cols,
            weights: vec![0.0; self.weights.len()],
            bias: vec![0.0; self.bias.len()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextLayoutNet {
    pub format: String,
    pub kind: String,
    pub version: u32,
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub layers: Vec<Dense>,
}

pub const TEXTNET_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct TextSample {
    pub features: Vec<f64>,
    /// Normalized widths per line; absent lines are masked out.
    pub widths: Vec<f64>,
    pub mask: Vec<f64>,
    pub form: TypesettingForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextNetConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
}

impl Default for TextNetConfig {
    fn default() -> Self {
        TextNetConfig { hidden: 64, epochs: 300, batch_size: 16, learning_rate: 0.01, momentum: 0.9 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TextNetError {
    #[error("no text layout samples")]
    EmptyDataset,
    #[error("model file {path}: {message}")]
    ModelFile { path: String, message: String },
}

/// Activations kept for back-propagation.
struct Trace {
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    out: Vec<f64>,
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub widths: Vec<f64>,
    pub form_probs: Vec<f64>,
}

impl TextLayoutNet {
    pub fn new(input_dim: usize, hidden: usize, seed: u64) -> TextLayoutNet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = [input_dim, hidden, hidden, OUTPUT_DIM];
        TextLayoutNet {
            format: MODEL_FORMAT.into(),
            kind: "textnet".into(),
            version: TEXTNET_VERSION,
            input_dim,
            hidden: vec![hidden, hidden],
            layers: dims.windows(2).map(|w| Dense::new(w[1], w[0], &mut rng)).collect(),
        }
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut a = x.to_vec();
        for (k, layer) in self.layers.iter().enumerate() {
            let z = layer.forward(&a);
            inputs.push(std::mem::take(&mut a));
            a = if k + 1 < self.layers.len() { z.iter().map(|v| v.max(0.0)).collect() } else { z.clone() };
            pre.push(z);
        }
        Trace { inputs, pre, out: a }
    }

    /// Raw output: 3 width values then 7 form logits.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.trace(x).out
    }

    pub fn predict(&self, x: &[f64]) -> Prediction {
        let out = self.forward(x);
        Prediction { widths: out[..MAX_TEXT_LINES].to_vec(), form_probs: softmax(&out[MAX_TEXT_LINES..]) }
    }

    /// Masked mean squared width error plus form cross-entropy.
    pub fn loss(&self, s: &TextSample) -> f64 {
        sample_loss(&self.forward(&s.features), s)
    }

    pub fn mean_loss(&self, samples: &[TextSample]) -> f64 {
        samples.iter().map(|s| self.loss(s)).sum::<f64>() / samples.len().max(1) as f64
    }

    /// Analytic gradient of `loss(s)`, same shapes as the layers.
    pub fn gradient(&self, s: &TextSample) -> Vec<Dense> {
        let tr = self.trace(&s.features);
        let mut delta = output_delta(&tr.out, s);
        let mut grads: Vec<Dense> = self.layers.iter().map(Dense::zeros_like).collect();
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let input = &tr.inputs[k];
            let g = &mut grads[k];
            for r in 0..layer.rows {
                g.bias[r] = delta[r];
                for c in 0..layer.cols {
                    g.weights[r * layer.cols + c] = delta[r] * input[c];
                }
            }
            if k > 0 {
                let mut prev = vec![0.0; layer.cols];
                for r in 0..layer.rows {
                    for c in 0..layer.cols {
                        prev[c] += layer.weights[r * layer.cols + c] * delta[r];
                    }
                }
                let z = &tr.pre[k - 1];
                for (p, zv) in prev.iter_mut().zip(z) {
                    if *zv <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
        grads
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Mutable view of the i-th parameter in (layer, weights-then-bias) order.
    pub fn parameter_mut(&mut self, mut i: usize) -> &mut f64 {
        for l in &mut self.layers {
            if i < l.weights.len() {
                return &mut l.weights[i];
            }
            i -= l.weights.len();
            if i < l.bias.len() {
                return &mut l.bias[i];
            }
            i -= l.bias.len();
        }
        panic!("parameter index out of range")
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string(self).expect("net serializes") + "\n"
    }

    pub fn from_text(text: &str) -> Result<TextLayoutNet, String> {
        let n: TextLayoutNet = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if n.format != MODEL_FORMAT || n.kind != "textnet" {
            return Err(format!("not a text layout model (format {:?}, kind {:?})", n.format, n.kind));
        }
        if n.version != TEXTNET_VERSION {
            return Err(format!("unsupported text layout model version {}", n.version));
        }
        let mut cols = n.input_dim;
        for l in &n.layers {
            if l.cols != cols || l.weights.len() != l.rows * l.cols || l.bias.len() != l.rows {
                return Err("inconsistent layer shapes".into());
            }
            if l.weights.iter().chain(&l.bias).any(|v| !v.is_finite()) {
                return Err("non-finite weight".into());
            }
            cols = l.rows;
        }
        if cols != OUTPUT_DIM {
            return Err(format!("output dimension {cols}, expected {OUTPUT_DIM}"));
        }
        Ok(n)
    }

    pub fn load(path: &std::path::Path) -> Result<TextLayoutNet, TextNetError> {
        let err = |message: String| TextNetError::ModelFile { path: path.display().to_string(), message };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        TextLayoutNet::from_text(&text).map_err(err)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), TextNetError> {
        std::fs::write(path, self.to_text())
            .map_err(|e| TextNetError::ModelFile { path: path.display().to_string(), message: e.to_string() })
    }
}

fn sample_loss(out: &[f64], s: &TextSample) -> f64 {
    let mask_sum: f64 = s.mask.iter().sum::<f64>().max(1.0);
    let mse: f64 = (0..MAX_TEXT_LINES).map(|i| s.mask[i] * (out[i] - s.widths[i]).powi(2)).sum::<f64>() / mask_sum;
    let logits = &out[MAX_TEXT_LINES..];
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    mse + (log_sum - logits[s.form.index()])
}

fn output_delta(out: &[f64], s: &TextSample) -> Vec<f64> {
    let mask_sum: f64 = s.mask.iter().sum::<f64>().max(1.0);
    let mut d = vec![0.0; OUTPUT_DIM];
    for i in 0..MAX_TEXT_LINES {
        d[i] = 2.0 * s.mask[i] * (out[i] - s.widths[i]) / mask_sum;
    }
    let p = softmax(&out[MAX_TEXT_LINES..]);
    for k in 0..FORM_COUNT {
        d[MAX_TEXT_LINES + k] = p[k] - if k == s.form.index() { 1.0 } else { 0.0 };
    }
    d
}

/// Mini-batch SGD with momentum; returns the net and the mean training
/// loss after each epoch. Deterministic for a fixed seed.
pub fn train_text_net(
    samples: &[TextSample],
    cfg: &TextNetConfig,
    seed: u64,
) -> Result<(TextLayoutNet, Vec<f64>), TextNetError> {
    if samples.is_empty() {
        return Err(TextNetError::EmptyDataset);
    }
    let mut net = TextLayoutNet::new(samples[0].features.len(), cfg.hidden, seed);
    let mut velocity: Vec<Dense> = net.layers.iter().map(Dense::zeros_like).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let batch = cfg.batch_size.max(1);
    let mut history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let mut acc: Vec<Dense> = net.layers.iter().map(Dense::zeros_like).collect();
            for &i in chunk {
                for (a, g) in acc.iter_mut().zip(net.gradient(&samples[i])) {
                    for (x, y) in a.weights.iter_mut().zip(&g.weights) {
                        *x += y;
                    }
                    for (x, y) in a.bias.iter_mut().zip(&g.bias) {
                        *x += y;
                    }
                }
            }
            let scale = cfg.learning_rate / chunk.len() as f64;
            for ((layer, v), g) in net.layers.iter_mut().zip(&mut velocity).zip(&acc) {
                for ((w, vw), gw) in layer.weights.iter_mut().zip(&mut v.weights).zip(&g.weights) {
                    *vw = cfg.momentum * *vw - scale * gw;
                    *w += *vw;
                }
                for ((b, vb), gb) in layer.bias.iter_mut().zip(&mut v.bias).zip(&g.bias) {
                    *vb = cfg.momentum * *vb - scale * gb;
                    *b += *vb;
                }
            }
        }
        history.push(net.mean_loss(samples));
    }
    Ok((net, history))
}

/// One sample per template with a text area and placeholder copy on every
/// text layer.
pub fn samples_from_library(library: &TemplateLibrary) -> Vec<TextSample> {
    library.iter().filter_map(sample_from_template).collect()
}

pub fn sample_from_template(t: &Template) -> Option<TextSample> {
    let area = t.text_area()?;
    let form = TypesettingForm::infer(t)?;
    let layers: Vec<_> = TextRole::ALL.iter().filter_map(|r| t.text_layer(*r)).collect();
    let texts: Vec<String> = layers.iter().map(|l| l.text.clone()).collect::<Option<_>>()?;
    let mut widths = vec![0.0; MAX_TEXT_LINES];
    let mut mask = vec![0.0; MAX_TEXT_LINES];
    for (i, l) in layers.iter().enumerate() {
        widths[i] = l.bbox.w / area.w;
        mask[i] = 1.0;
    }
    Some(TextSample { features: text_features(&texts, t.width as f64), widths, mask, form })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextLayout {
    pub form: TypesettingForm,
    pub lines: Vec<Rect>,
}

/// Reconstructs the text area: predicted widths (clamped to [0.2, 1] of the
/// area) and the most probable form that supports the line count.
pub fn layout_text(net: &TextLayoutNet, texts: &[String], area: &Rect, canvas_w: f64) -> TextLayout {
    let n = texts.len().clamp(1, MAX_TEXT_LINES);
    let pred = net.predict(&text_features(texts, canvas_w));
    let form = TypesettingForm::ALL
        .iter()
        .copied()
        .filter(|f| f.supports(n))
        .max_by(|a, b| {
            pred.form_probs[a.index()].total_cmp(&pred.form_probs[b.index()]).then(b.index().cmp(&a.index()))
        })
        .expect("every line count has a form");
    let widths: Vec<f64> = pred.widths[..n]
        .iter()
        .map(|w| {
            let w = if w.is_finite() { *w } else { WIDTH_CLAMP.1 };
            w.clamp(WIDTH_CLAMP.0, WIDTH_CLAMP.1) * area.w
        })
        .collect();
    TextLayout { form, lines: form.place(area, &widths) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn sale50_histogram() {
        let f = text_features(&["SALE50".to_string()], 800.0);
        assert!(close(&f[..6], &[6.0 / 20.0, 4.0 / 6.0, 0.0, 2.0 / 6.0, 0.0, 0.0], 1e-15));
        assert_eq!(&f[6..10], &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(f[INPUT_DIM - 1], 0.8);
    }

    #[test]
    fn absent_lines_are_zero() {
        let f = text_features(&["a".to_string(), "b".to_string()], 500.0);
        assert!(f[20..30].iter().all(|&v| v == 0.0));
        assert_eq!(f[19], 1.0);
    }

    #[test]
    fn softmax_sums_to_one() {
        let net = TextLayoutNet::new(INPUT_DIM, 16, 1);
        let p = net.predict(&text_features(&["x".into()], 900.0));
        assert!((p.form_probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let big = softmax(&[1e300, -1e300, 0.0]);
        assert!((big.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_dataset() {
        assert_eq!(train_text_net(&[], &TextNetConfig::default(), 0).unwrap_err(), TextNetError::EmptyDataset);
    }

    #[test]
    fn model_text_round_trip() {
        let net = TextLayoutNet::new(INPUT_DIM, 8, 5);
        let text = net.to_text();
        let back = TextLayoutNet::from_text(&text).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn clamped_widths_stay_in_the_area() {
        let mut net = TextLayoutNet::new(INPUT_DIM, 8, 2);
        // push head-1 far outside the clamp range
        let last = net.layers.len() - 1;
        net.layers[last].bias[0] = 50.0;
        net.layers[last].bias[1] = -50.0;
        let area = Rect::new(10.0, 10.0, 300.0, 120.0);
        let out = layout_text(&net, &["a b".into(), "c d".into()], &area, 800.0);
        assert_eq!(out.lines[0].w, 300.0);
        assert_eq!(out.lines[1].w, 60.0);
        for r in &out.lines {
            assert!(area.contains_rect(r, 1e-9));
        }
    }
}
