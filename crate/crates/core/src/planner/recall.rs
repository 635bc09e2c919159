//! Rule-based template recall: feature screening plus text and goods losses.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actuator::aspect_gate;
use crate::request::BannerRequest;
use crate::template::{Template, TemplateLibrary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecallConfig {
    pub wordnummin: u32,
    pub wordnummax: u32,
    /// Penalty slope when the template holds more words than the request.
    pub alpha2_pos: f64,
    /// Penalty slope when the template holds fewer words (negative).
    pub alpha2_neg: f64,
    pub text_weights: f64,
    pub goods_weights: f64,
    pub max_lines: u32,
    pub top_k: usize,
}

impl Default for RecallConfig {
    fn default() -> Self {
        RecallConfig {
            wordnummin: 4,
            wordnummax: 20,
            alpha2_pos: 2.0,
            alpha2_neg: -2.2,
            text_weights: 0.6,
            goods_weights: 0.4,
            max_lines: 3,
            top_k: 8,
        }
    }
}

impl RecallConfig {
    /// Line-difference weight; large enough that one line of mismatch
    /// outweighs any word-count mismatch.
    pub fn alpha1(&self) -> f64 {
        -self.alpha2_neg * (self.wordnummax - self.wordnummin) as f64 + 1.0
    }

    /// Normalizer: the worst-case penalty over the allowed line and word ranges.
    pub fn alpha3(&self) -> f64 {
        let span = (self.wordnummax - self.wordnummin) as f64;
        self.alpha1() * (self.max_lines as f64 - 1.0) + -self.alpha2_neg * span
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.wordnummin == 0 || self.wordnummin >= self.wordnummax {
            return Err("recall: need 0 < wordnummin < wordnummax".into());
        }
        if !(self.alpha2_pos > 0.0 && self.alpha2_neg < 0.0) {
            return Err("recall: alpha2_pos must be > 0 and alpha2_neg < 0".into());
        }
        if self.alpha2_pos > -self.alpha2_neg {
            return Err("recall: alpha2_pos must not exceed |alpha2_neg|".into());
        }
        if !(self.text_weights >= 0.0 && self.goods_weights >= 0.0)
            || ((self.text_weights + self.goods_weights) - 1.0).abs() > 1e-9
        {
            return Err("recall: text_weights + goods_weights must equal 1".into());
        }
        if self.max_lines == 0 || self.top_k == 0 {
            return Err("recall: max_lines and top_k must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecallResult {
    pub template_id: String,
    pub text_score: f64,
    pub goods_score: f64,
    pub total_score: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum RecallError {
    #[error("no compatible template")]
    EmptyRecall,
    #[error("template {0} has no product slot")]
    ZeroSlots(String),
}

/// Text score from the two losses: line-count difference and the signed
/// gap between template capacity and requested words.
pub fn text_score_from_losses(loss1: f64, loss2: f64, cfg: &RecallConfig) -> f64 {
    let alpha2 = match loss2.partial_cmp(&0.0) {
        Some(Ordering::Greater) => cfg.alpha2_pos,
        Some(Ordering::Less) => cfg.alpha2_neg,
        _ => 0.0,
    };
    let penalty = cfg.alpha1() * loss1 + alpha2 * loss2;
    (1.0 - penalty / cfg.alpha3()).clamp(0.0, 1.0)
}

/// Scores how well a template's text slots fit the request lines.
pub fn text_score_for(line_count: usize, avg_words: f64, t: &Template, cfg: &RecallConfig) -> f64 {
    let loss1 = (line_count as f64 - t.text_line_count() as f64).abs();
    let loss2 = t.avg_word_capacity() - avg_words;
    text_score_from_losses(loss1, loss2, cfg)
}

pub fn text_score(req_texts: &[String], t: &Template, cfg: &RecallConfig) -> f64 {
    let words: usize = req_texts.iter().map(|s| crate::request::word_count(s)).sum();
    let avg = words as f64 / req_texts.len().max(1) as f64;
    text_score_for(req_texts.len(), avg, t, cfg)
}

/// Product-count agreement times greedy aspect-ratio agreement.
pub fn goods_score_for(product_aspects: &[f64], t: &Template) -> Result<f64, RecallError> {
    let mut slots: Vec<f64> = t.product_layers().map(|l| l.aspect()).collect();
    if slots.is_empty() {
        return Err(RecallError::ZeroSlots(t.id.clone()));
    }
    if product_aspects.is_empty() {
        return Ok(0.0);
    }
    let mut products = product_aspects.to_vec();
    products.sort_by(|a, b| b.total_cmp(a));
    slots.sort_by(|a, b| b.total_cmp(a));
    let pairs = products.len().min(slots.len());
    let fit: f64 = products.iter().zip(&slots).map(|(p, s)| p.min(*s) / p.max(*s)).sum::<f64>() / pairs as f64;
    let count_factor = 1.0 / (1.0 + (products.len() as f64 - slots.len() as f64).abs());
    Ok(count_factor * fit)
}

pub fn goods_score(req: &BannerRequest, t: &Template) -> Result<f64, RecallError> {
    let aspects: Vec<f64> = req.products.iter().map(|p| p.aspect()).collect();
    goods_score_for(&aspects, t)
}

/// Feature-dimension screening: department, category, style, slot presence
/// and the aspect gate against the target size.
pub fn screen<'a>(library: &'a TemplateLibrary, req: &BannerRequest) -> Result<Vec<&'a Template>, RecallError> {
    let categories: Vec<&str> = req.product_categories().collect();
    let kept: Vec<&Template> = library
        .iter()
        .filter(|t| t.department_ids.is_empty() || t.department_ids.contains(&req.department_id))
        .filter(|t| categories.is_empty() || t.category_tags.iter().any(|c| categories.contains(&c.as_str())))
        .filter(|t| req.style_hint.as_ref().is_none_or(|s| t.style_tags.contains(s)))
        .filter(|t| req.products.is_empty() || t.product_slot_count() > 0)
        .filter(|t| aspect_gate(t.size(), req.target_size()))
        .collect();
    if kept.is_empty() {
        Err(RecallError::EmptyRecall)
    } else {
        Ok(kept)
    }
}

/// Screens, scores and returns the best `cfg.top_k` templates, best first,
/// ties broken by ascending id.
pub fn recall_topk(
    library: &TemplateLibrary,
    req: &BannerRequest,
    cfg: &RecallConfig,
) -> Result<Vec<RecallResult>, RecallError> {
    let mut all = score_all(&screen(library, req)?, req, cfg)?;
    all.truncate(cfg.top_k);
    Ok(all)
}

/// Scores every template and sorts them by the recall order.
pub fn score_all(
    templates: &[&Template],
    req: &BannerRequest,
    cfg: &RecallConfig,
) -> Result<Vec<RecallResult>, RecallError> {
    let mut out = Vec::with_capacity(templates.len());
    for t in templates {
        let text = text_score(&req.texts, t, cfg);
        let goods = goods_score(req, t)?;
        out.push(RecallResult {
            template_id: t.id.clone(),
            text_score: text,
            goods_score: goods,
            total_score: cfg.text_weights * text + cfg.goods_weights * goods,
        });
    }
    sort_results(&mut out);
    Ok(out)
}

pub fn sort_results(v: &mut [RecallResult]) {
    v.sort_by(|a, b| b.total_score.total_cmp(&a.total_score).then_with(|| a.template_id.cmp(&b.template_id)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::template::test_support::sample_template;
    use crate::template::{Layer, LayerKind};

    fn cfg() -> RecallConfig {
        RecallConfig::default()
    }

    #[test]
    fn normalization_constants() {
        assert!((cfg().alpha1() - 36.2).abs() < 1e-12);
        assert!((cfg().alpha3() - 107.6).abs() < 1e-12);
    }

    #[test]
    fn worked_examples() {
        let c = cfg();
        assert!((text_score_from_losses(0.0, 3.0, &c) - (1.0 - 6.0 / 107.6)).abs() < 1e-12);
        assert_eq!(text_score_from_losses(0.0, 0.0, &c), 1.0);
        let s = text_score_from_losses(2.0, -5.0, &c);
        assert!((s - (1.0 - 83.4 / 107.6)).abs() < 1e-12);
        assert!((s - 0.224907).abs() < 1e-6);
        assert!(text_score_from_losses(2.0, -16.0, &c).abs() < 1e-12);
    }

    #[test]
    fn goods_examples() {
        let mut t = sample_template();
        // sample slot is 300x400; make it square
        t.layers[1].bbox = Rect::new(100.0, 100.0, 400.0, 400.0);
        assert!((goods_score_for(&[0.5], &t).unwrap() - 0.5).abs() < 1e-12);
        assert!((goods_score_for(&[1.0], &t).unwrap() - 1.0).abs() < 1e-12);
        // 3 products against one slot: best-aspect pair 0.8 fit
        let s = goods_score_for(&[1.25, 0.3, 0.2], &t).unwrap();
        assert!((s - 0.8 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_slot_template_is_an_error() {
        let mut t = sample_template();
        t.layers.retain(|l| !l.kind.is_product());
        t.refresh_derived();
        assert_eq!(goods_score_for(&[1.0], &t), Err(RecallError::ZeroSlots("sample".into())));
    }

    #[test]
    fn greedy_matching_pairs_by_descending_aspect() {
        let mut t = sample_template();
        t.layers[1].bbox = Rect::new(0.0, 0.0, 200.0, 100.0);
        t.layers.push(Layer::new("product-2", LayerKind::Product(2), Rect::new(0.0, 0.0, 100.0, 200.0), 8));
        t.refresh_derived();
        // products 2.0 and 0.5 meet slots 2.0 and 0.5 exactly
        assert!((goods_score_for(&[0.5, 2.0], &t).unwrap() - 1.0).abs() < 1e-12);
    }
}
