//! Seeded click logs with a planted color preference.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::planner::rank::ClickRecord;
use crate::template::{Template, TemplateLibrary};

pub const EXPOSURE_RANGE: (u64, u64) = (50, 5000);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantedSignal {
    pub base_ctr: f64,
    pub boosted_ctr: f64,
    /// Palette names; a template is boosted when its primary color
    /// classifies into this set.
    pub boosted_colors: Vec<String>,
}

impl Default for PlantedSignal {
    fn default() -> Self {
        PlantedSignal {
            base_ctr: 0.02,
            boosted_ctr: 0.08,
            boosted_colors: vec!["red".into(), "orange".into(), "yellow".into(), "magenta".into()],
        }
    }
}

impl PlantedSignal {
    pub fn is_boosted(&self, t: &Template, library: &TemplateLibrary) -> bool {
        t.primary_color().is_some_and(|c| self.boosted_colors.iter().any(|b| b == library.palette.classify(c)))
    }

    pub fn ctr(&self, t: &Template, library: &TemplateLibrary) -> f64 {
        if self.is_boosted(t, library) {
            self.boosted_ctr
        } else {
            self.base_ctr
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SimulateError {
    #[error("asked for {requested} templates but the library holds {available}")]
    TooManyTemplates { requested: usize, available: usize },
    #[error("click-through rate {0} outside [0, 1]")]
    BadRate(f64),
}

/// One record per template and period (1..=n_periods) over the first
/// `n_templates` templates by id. Records are ordered by period, then id.
pub fn simulate_log(
    library: &TemplateLibrary,
    n_templates: usize,
    n_periods: u32,
    planted: &PlantedSignal,
    seed: u64,
) -> Result<Vec<ClickRecord>, SimulateError> {
    if n_templates > library.len() {
        return Err(SimulateError::TooManyTemplates { requested: n_templates, available: library.len() });
    }
    for r in [planted.base_ctr, planted.boosted_ctr] {
        if !(0.0..=1.0).contains(&r) {
            return Err(SimulateError::BadRate(r));
        }
    }
    let templates: Vec<(&Template, f64)> =
        library.iter().take(n_templates).map(|t| (t, planted.ctr(t, library))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(templates.len() * n_periods as usize);
    for period in 1..=n_periods {
        for &(t, ctr) in &templates {
            let exposures = rng.random_range(EXPOSURE_RANGE.0..=EXPOSURE_RANGE.1);
            let clicks = Binomial::new(exposures, ctr).expect("rate checked").sample(&mut rng);
            out.push(ClickRecord { template_id: t.id.clone(), period_id: period, exposures, clicks });
        }
    }
    Ok(out)
}

/// Ids of boosted templates among the records.
pub fn boosted_ids(records: &[ClickRecord], library: &TemplateLibrary, planted: &PlantedSignal) -> BTreeSet<String> {
    records
        .iter()
        .filter_map(|r| library.get(&r.template_id))
        .filter(|t| planted.is_boosted(t, library))
        .map(|t| t.id.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::Palette;
    use crate::evaluator::synthetic::synthetic_library;

    #[test]
    fn reproducible_and_empty_without_periods() {
        let lib = synthetic_library(30, 1, &Palette::default());
        let p = PlantedSignal::default();
        assert_eq!(simulate_log(&lib, 30, 3, &p, 5).unwrap(), simulate_log(&lib, 30, 3, &p, 5).unwrap());
        assert!(simulate_log(&lib, 30, 0, &p, 5).unwrap().is_empty());
        assert!(simulate_log(&lib, 31, 1, &p, 5).is_err());
    }

    #[test]
    fn exposures_in_range() {
        let lib = synthetic_library(20, 2, &Palette::default());
        for r in simulate_log(&lib, 20, 4, &PlantedSignal::default(), 0).unwrap() {
            assert!((50..=5000).contains(&r.exposures));
            assert!(r.clicks <= r.exposures);
        }
    }
}
