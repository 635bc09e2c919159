//! Creative ranking: click-derived labels, feature embedding and a boosted
//! tree ensemble scoring each candidate's click probability.

pub mod features;
pub mod gbdt;
pub mod labels;

pub use features::{featurize, fit_layout, FeatureLayout, FeatureVector, RankContext, Vocabulary};
pub use gbdt::{BoostParams, Ensemble, TrainError};
pub use labels::{bucket_labels, read_click_log, write_click_log, ClickLogError, ClickRecord, LabeledRecord};

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::prerank::PrerankResult;
use crate::template::TemplateLibrary;
use crate::MODEL_FORMAT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankConfig {
    pub params: BoostParams,
    pub vocabulary_size: usize,
    pub promo_keywords: Vec<String>,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            params: BoostParams::default(),
            vocabulary_size: 512,
            promo_keywords: features::DEFAULT_PROMO_KEYWORDS.map(String::from).to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub periods: Option<(u32, u32)>,
    pub samples: usize,
    pub positives: usize,
    pub loss_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankModel {
    pub format: String,
    pub kind: String,
    pub version: u32,
    pub params: BoostParams,
    pub layout: FeatureLayout,
    pub ensemble: Ensemble,
    pub meta: TrainingMeta,
}

pub const RANK_MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RankError {
    #[error("feature vector layout does not match the model")]
    LayoutMismatch,
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Labels(#[from] ClickLogError),
    #[error("model file {path}: {message}")]
    ModelFile { path: String, message: String },
    #[error("click log names unknown template {0}")]
    UnknownTemplate(String),
    #[error("no labeled samples in the requested periods")]
    NoSamples,
}

/// A labeled, featurized sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: FeatureVector,
    pub label: u8,
    pub template_id: String,
    pub period_id: u32,
}

/// Trains an ensemble on featurized samples.
pub fn train(samples: &[Sample], layout: FeatureLayout, params: &BoostParams) -> Result<RankModel, RankError> {
    let fp = layout.fingerprint();
    if samples.iter().any(|s| s.features.fingerprint != fp) {
        return Err(RankError::LayoutMismatch);
    }
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| s.features.values.clone()).collect();
    let labels: Vec<u8> = samples.iter().map(|s| s.label).collect();
    let out = gbdt::train(&rows, &labels, params)?;
    let periods = samples
        .iter()
        .map(|s| s.period_id)
        .fold(None, |acc: Option<(u32, u32)>, p| Some(acc.map_or((p, p), |(lo, hi)| (lo.min(p), hi.max(p)))));
    Ok(RankModel {
        format: MODEL_FORMAT.into(),
        kind: "rank".into(),
        version: RANK_MODEL_VERSION,
        params: *params,
        layout,
        ensemble: out.ensemble,
        meta: TrainingMeta {
            periods,
            samples: samples.len(),
            positives: labels.iter().filter(|&&y| y == 1).count(),
            loss_history: out.loss_history,
        },
    })
}

impl RankModel {
    pub fn margin(&self, fv: &FeatureVector) -> Result<f64, RankError> {
        if fv.fingerprint != self.layout.fingerprint() || fv.values.len() != self.layout.len() {
            return Err(RankError::LayoutMismatch);
        }
        Ok(self.ensemble.margin(&fv.values))
    }

    /// Click probability in (0, 1).
    pub fn score(&self, fv: &FeatureVector) -> Result<f64, RankError> {
        self.margin(fv).map(gbdt::sigmoid)
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes") + "\n"
    }

    pub fn from_text(text: &str) -> Result<RankModel, String> {
        let m: RankModel = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if m.format != MODEL_FORMAT || m.kind != "rank" {
            return Err(format!("not a rank model (format {:?}, kind {:?})", m.format, m.kind));
        }
        if m.version != RANK_MODEL_VERSION {
            return Err(format!("unsupported rank model version {}", m.version));
        }
        let len = m.layout.len();
        for t in &m.ensemble.trees {
            if t.max_feature().is_some_and(|f| f >= len) {
                return Err("tree split feature out of range".into());
            }
            if t.depth() > m.params.max_depth {
                return Err("tree deeper than the declared max depth".into());
            }
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<RankModel, RankError> {
        let err = |message: String| RankError::ModelFile { path: path.display().to_string(), message };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        RankModel::from_text(&text).map_err(err)
    }

    pub fn save(&self, path: &Path) -> Result<(), RankError> {
        std::fs::write(path, self.to_text())
            .map_err(|e| RankError::ModelFile { path: path.display().to_string(), message: e.to_string() })
    }
}

/// Builds training samples from bucketed click labels. Click logs carry no
/// request, so each template is featurized against its own placeholder copy
/// with self-match recall and pre-rank scores of 1.
pub fn build_samples(
    library: &TemplateLibrary,
    labeled: &[LabeledRecord],
    layout: &FeatureLayout,
) -> Result<Vec<Sample>, RankError> {
    labeled
        .iter()
        .map(|r| {
            let t = library.get(&r.template_id).ok_or_else(|| RankError::UnknownTemplate(r.template_id.clone()))?;
            let texts = features::placeholder_texts(t);
            let department_id = t.department_ids.first().copied().unwrap_or(0);
            let ctx = RankContext { texts: &texts, department_id, recall_score: 1.0, prerank_score: 1.0 };
            Ok(Sample {
                features: featurize(t, &ctx, layout, &library.palette),
                label: r.label,
                template_id: r.template_id.clone(),
                period_id: r.period_id,
            })
        })
        .collect()
}

/// Labels a click log, keeps the periods accepted by `keep_period`, fits the
/// feature layout over the templates involved and trains a model.
pub fn train_from_log(
    library: &TemplateLibrary,
    log: &[ClickRecord],
    cfg: &RankConfig,
    keep_period: impl Fn(u32) -> bool,
) -> Result<RankModel, RankError> {
    let bucketed = bucket_labels(log)?;
    let labeled: Vec<LabeledRecord> = bucketed.labels.into_iter().filter(|r| keep_period(r.period_id)).collect();
    if labeled.is_empty() {
        return Err(RankError::NoSamples);
    }
    let mut ids: Vec<&str> = labeled.iter().map(|r| r.template_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    let templates = ids
        .iter()
        .map(|id| library.get(id).ok_or_else(|| RankError::UnknownTemplate(id.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let layout = fit_layout(templates, &library.palette, cfg.vocabulary_size, &cfg.promo_keywords);
    let samples = build_samples(library, &labeled, &layout)?;
    train(&samples, layout, &cfg.params)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedCandidate {
    pub template_id: String,
    pub rank_score: Option<f64>,
    pub color_score: f64,
    pub recall_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedList {
    pub candidates: Vec<RankedCandidate>,
    /// False on cold start: the list is the pre-rank order unchanged.
    pub ranked: bool,
}

/// Orders candidates by model score, ties by color score, recall total, id.
/// Without a model the pre-rank order passes through unranked.
pub fn rank_candidates(
    model: Option<&RankModel>,
    candidates: &[PrerankResult],
    features: impl Fn(&PrerankResult) -> FeatureVector,
) -> Result<RankedList, RankError> {
    let Some(model) = model else {
        return Ok(RankedList {
            candidates: candidates
                .iter()
                .map(|c| RankedCandidate {
                    template_id: c.template_id.clone(),
                    rank_score: None,
                    color_score: c.color_score,
                    recall_total: c.recall_total,
                })
                .collect(),
            ranked: false,
        });
    };
    let mut out = candidates
        .iter()
        .map(|c| {
            Ok(RankedCandidate {
                template_id: c.template_id.clone(),
                rank_score: Some(model.score(&features(c))?),
                color_score: c.color_score,
                recall_total: c.recall_total,
            })
        })
        .collect::<Result<Vec<_>, RankError>>()?;
    sort_ranked(&mut out);
    Ok(RankedList { candidates: out, ranked: true })
}

pub(crate) fn sort_ranked(v: &mut [RankedCandidate]) {
    v.sort_by(|a, b| {
        let sa = a.rank_score.unwrap_or(0.0);
        let sb = b.rank_score.unwrap_or(0.0);
        sb.total_cmp(&sa)
            .then(b.color_score.total_cmp(&a.color_score))
            .then(b.recall_total.total_cmp(&a.recall_total))
            .then_with(|| a.template_id.cmp(&b.template_id))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::Palette;
    use crate::template::test_support::sample_template;

    fn empty_model() -> RankModel {
        let t = sample_template();
        let layout = fit_layout([&t], &Palette::default(), 8, &[]);
        RankModel {
            format: MODEL_FORMAT.into(),
            kind: "rank".into(),
            version: RANK_MODEL_VERSION,
            params: BoostParams::default(),
            layout,
            ensemble: Ensemble { base_score: 0.0, learning_rate: 0.1, trees: vec![] },
            meta: TrainingMeta { periods: None, samples: 0, positives: 0, loss_history: vec![] },
        }
    }

    fn fv_for(m: &RankModel) -> FeatureVector {
        let t = sample_template();
        let texts = vec!["hello".to_string()];
        featurize(
            &t,
            &RankContext { texts: &texts, department_id: 0, recall_score: 0.5, prerank_score: 0.5 },
            &m.layout,
            &Palette::default(),
        )
    }

    #[test]
    fn empty_ensemble_scores_one_half() {
        let m = empty_model();
        assert_eq!(m.score(&fv_for(&m)).unwrap(), 0.5);
    }

    #[test]
    fn margin_ln3_gives_three_quarters() {
        let mut m = empty_model();
        m.ensemble.base_score = 3f64.ln();
        assert!((m.score(&fv_for(&m)).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn layout_mismatch_is_an_error() {
        let m = empty_model();
        let mut fv = fv_for(&m);
        fv.values.pop();
        assert!(matches!(m.score(&fv), Err(RankError::LayoutMismatch)));
        let mut fv = fv_for(&m);
        fv.fingerprint ^= 1;
        assert!(matches!(m.score(&fv), Err(RankError::LayoutMismatch)));
    }

    #[test]
    fn model_text_round_trips_byte_exactly() {
        let mut m = empty_model();
        m.ensemble.base_score = -0.123456789012345;
        m.ensemble.trees.push(gbdt::Tree {
            nodes: vec![
                gbdt::Node::Split { feature: 2, threshold: 0.1 + 0.2, left: 1, right: 2 },
                gbdt::Node::Leaf { value: 1.0 / 3.0 },
                gbdt::Node::Leaf { value: -2e-17 },
            ],
        });
        let text = m.to_text();
        let back = RankModel::from_text(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn corrupt_split_index_is_rejected() {
        let mut m = empty_model();
        m.ensemble.trees.push(gbdt::Tree {
            nodes: vec![
                gbdt::Node::Split { feature: 10_000, threshold: 0.0, left: 1, right: 2 },
                gbdt::Node::Leaf { value: 0.0 },
                gbdt::Node::Leaf { value: 0.0 },
            ],
        });
        assert!(RankModel::from_text(&m.to_text()).is_err());
    }

    fn cand(id: &str, color: f64, recall: f64) -> PrerankResult {
        PrerankResult { template_id: id.into(), color_score: color, clash: false, recall_total: recall }
    }

    #[test]
    fn cold_start_passes_prerank_order_through() {
        let c = vec![cand("b", 0.2, 0.1), cand("a", 0.9, 0.9)];
        let out = rank_candidates(None, &c, |_| unreachable!()).unwrap();
        assert!(!out.ranked);
        let ids: Vec<_> = out.candidates.iter().map(|c| c.template_id.as_str()).collect();
        assert_eq!(ids, vec!["b", "a"]);
    }

    #[test]
    fn tie_chain() {
        let mut v = vec![
            RankedCandidate { template_id: "c".into(), rank_score: Some(0.5), color_score: 0.5, recall_total: 0.5 },
            RankedCandidate { template_id: "b".into(), rank_score: Some(0.5), color_score: 0.5, recall_total: 0.5 },
            RankedCandidate { template_id: "a".into(), rank_score: Some(0.5), color_score: 0.4, recall_total: 0.9 },
            RankedCandidate { template_id: "d".into(), rank_score: Some(0.5), color_score: 0.5, recall_total: 0.6 },
            RankedCandidate { template_id: "e".into(), rank_score: Some(0.8), color_score: 0.0, recall_total: 0.0 },
        ];
        sort_ranked(&mut v);
        let ids: Vec<_> = v.iter().map(|c| c.template_id.as_str()).collect();
        assert_eq!(ids, vec!["e", "d", "b", "c", "a"]);
    }
}
