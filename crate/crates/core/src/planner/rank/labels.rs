//! Click-log aggregates and bucketing into binary labels.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickRecord {
    pub template_id: String,
    pub period_id: u32,
    pub exposures: u64,
    pub clicks: u64,
}

impl ClickRecord {
    pub fn ctr(&self) -> f64 {
        if self.exposures == 0 {
            0.0
        } else {
            self.clicks as f64 / self.exposures as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledRecord {
    pub template_id: String,
    pub period_id: u32,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Bucketed {
    pub labels: Vec<LabeledRecord>,
    /// Periods that kept no record after the exposure filter.
    pub empty_periods: Vec<u32>,
}

#[derive(Debug, Error)]
pub enum ClickLogError {
    #[error("click log is empty")]
    Empty,
    #[error("click log {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("click log row {row}: clicks {clicks} exceed exposures {exposures}")]
    ClicksExceedExposures { row: usize, clicks: u64, exposures: u64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Labels each period's records against the period means: records with
/// below-average exposure are dropped, survivors are positive when their
/// CTR is strictly above the survivors' mean CTR.
pub fn bucket_labels(records: &[ClickRecord]) -> Result<Bucketed, ClickLogError> {
    if records.is_empty() {
        return Err(ClickLogError::Empty);
    }
    let mut periods: BTreeMap<u32, Vec<&ClickRecord>> = BTreeMap::new();
    for r in records {
        periods.entry(r.period_id).or_default().push(r);
    }
    let mut out = Bucketed::default();
    for (period, recs) in periods {
        let mean_exposure = recs.iter().map(|r| r.exposures as f64).sum::<f64>() / recs.len() as f64;
        let survivors: Vec<&ClickRecord> = recs.into_iter().filter(|r| r.exposures as f64 >= mean_exposure).collect();
        if survivors.is_empty() {
            out.empty_periods.push(period);
            continue;
        }
        let mean_ctr = survivors.iter().map(|r| r.ctr()).sum::<f64>() / survivors.len() as f64;
        for r in survivors {
            out.labels.push(LabeledRecord {
                template_id: r.template_id.clone(),
                period_id: period,
                label: u8::from(r.ctr() > mean_ctr),
            });
        }
    }
    Ok(out)
}

pub fn read_click_log(path: &Path) -> Result<Vec<ClickRecord>, ClickLogError> {
    let wrap = |source| ClickLogError::Csv { path: path.display().to_string(), source };
    let mut reader = csv::Reader::from_path(path).map_err(wrap)?;
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<ClickRecord>().enumerate() {
        let r = row.map_err(wrap)?;
        if r.clicks > r.exposures {
            return Err(ClickLogError::ClicksExceedExposures { row: i + 1, clicks: r.clicks, exposures: r.exposures });
        }
        out.push(r);
    }
    Ok(out)
}

pub fn write_click_log<W: io::Write>(w: W, records: &[ClickRecord]) -> Result<(), ClickLogError> {
    let mut writer = csv::Writer::from_writer(w);
    for r in records {
        writer.serialize(r).map_err(|source| ClickLogError::Csv { path: "<output>".into(), source })?;
    }
    writer.flush()?;
    Ok(())
}
