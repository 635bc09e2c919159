//! Offline ranking metrics and synthetic training data.

pub mod metrics;
pub mod simulate;
pub mod synthetic;

pub use metrics::{auc, auc_brute_force, MetricError, MetricReport};
pub use simulate::{boosted_ids, simulate_log, PlantedSignal, SimulateError};
pub use synthetic::{build_template, synthetic_library, Recipe};

use thiserror::Error;

use crate::planner::rank::{bucket_labels, build_samples, ClickRecord, LabeledRecord, RankError, RankModel};
use crate::template::TemplateLibrary;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Labels the log, keeps the accepted periods, and scores them with `model`.
pub fn evaluate_rank(
    model: &RankModel,
    library: &TemplateLibrary,
    log: &[ClickRecord],
    keep_period: impl Fn(u32) -> bool,
) -> Result<MetricReport, EvalError> {
    let bucketed = bucket_labels(log).map_err(RankError::from)?;
    let labeled: Vec<LabeledRecord> = bucketed.labels.into_iter().filter(|r| keep_period(r.period_id)).collect();
    if labeled.is_empty() {
        return Err(RankError::NoSamples.into());
    }
    let samples = build_samples(library, &labeled, &model.layout)?;
    let probs = samples.iter().map(|s| model.score(&s.features)).collect::<Result<Vec<f64>, _>>()?;
    let labels: Vec<u8> = samples.iter().map(|s| s.label).collect();
    Ok(MetricReport::compute(&probs, &labels)?)
}
