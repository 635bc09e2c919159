//! Seeded first-improvement hill climbing over a bounded action set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::evaluate::{Evaluator, SAFETY_INSET};
use crate::banner::CandidateBanner;
use crate::geometry::Rect;
use crate::template::LayerKind;

pub const MAX_MOVE_PX: i32 = 24;
pub const SCALE_RANGE: (f64, f64) = (0.8, 1.25);
pub const MAX_OPACITY_STEP: f64 = 0.2;
pub const DEFAULT_BUDGET: usize = 200;
pub const DEFAULT_PATIENCE: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Move { layer: String, dx: f64, dy: f64 },
    Reorder { layer: String, z: usize },
    Recolor { layer: String, color: String },
    Scale { layer: String, factor: f64 },
    Opacity { layer: String, delta: f64 },
}

impl Action {
    pub fn layer(&self) -> &str {
        match self {
            Action::Move { layer, .. }
            | Action::Reorder { layer, .. }
            | Action::Recolor { layer, .. }
            | Action::Scale { layer, .. }
            | Action::Opacity { layer, .. } => layer,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub budget: usize,
    pub patience: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { budget: DEFAULT_BUDGET, patience: DEFAULT_PATIENCE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub iteration: usize,
    pub action: Action,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    Patience,
}

#[derive(Debug, Clone)]
pub struct FinetuneOutcome {
    pub banner: CandidateBanner,
    pub initial_score: f64,
    pub final_score: f64,
    pub trace: Vec<TraceStep>,
    pub iterations: usize,
    pub stop: StopReason,
}

/// Re-fits a bound layer after its anchor moved from `from` to `to`.
fn follow(bound: &Rect, from: &Rect, to: &Rect) -> Rect {
    Rect::remap(bound, from, to)
}

/// Applies `action`, keeping every touched box inside the canvas and
/// carrying masks and free ornaments bound to a moved layer along.
pub fn apply_action(b: &mut CandidateBanner, action: &Action, palette: &crate::color::Palette) {
    let canvas = b.canvas();
    let Some(i) = b.layer_index(action.layer()) else {
        return;
    };
    let reshape = |b: &mut CandidateBanner, i: usize, new: Rect| {
        let old = b.layers[i].bbox;
        let new = new.clamp_into(&canvas);
        b.layers[i].bbox = new;
        let name = b.layers[i].name.clone();
        for l in b.layers.iter_mut().filter(|l| l.bound_to.as_deref() == Some(name.as_str())) {
            l.bbox = follow(&l.bbox, &old, &new).clamp_into(&canvas);
        }
        new
    };
    match action {
        Action::Move { dx, dy, .. } => {
            let r = b.layers[i].bbox.translate(*dx, *dy);
            reshape(b, i, r);
        }
        Action::Scale { factor, .. } => {
            let old = b.layers[i].bbox;
            let new = reshape(b, i, old.scale_about_center(*factor));
            let applied = (new.w / old.w).min(new.h / old.h);
            if let Some(fs) = b.layers[i].font_size.as_mut() {
                *fs *= applied;
            }
        }
        Action::Reorder { z, .. } => b.reorder(i, *z),
        Action::Recolor { color, .. } => b.layers[i].color = palette.anchor_by_name(color).ok(),
        Action::Opacity { delta, .. } => {
            let o = &mut b.layers[i].opacity;
            *o = (*o + delta).clamp(0.0, 1.0);
        }
    }
}

/// Layers currently hurting occlusion or the safety margin.
fn troubled(b: &CandidateBanner) -> Vec<usize> {
    let canvas = b.canvas();
    let safe = Rect::new(
        canvas.w * SAFETY_INSET,
        canvas.h * SAFETY_INSET,
        canvas.w * (1.0 - 2.0 * SAFETY_INSET),
        canvas.h * (1.0 - 2.0 * SAFETY_INSET),
    );
    let mut out = Vec::new();
    for (i, l) in b.layers.iter().enumerate() {
        if l.is_pinned() || !(l.kind.is_text() || l.kind.is_product()) {
            continue;
        }
        let overlaps = b
            .layers
            .iter()
            .filter(|o| (o.kind.is_text() && l.kind.is_product()) || (o.kind.is_product() && l.kind.is_text()))
            .any(|o| o.bbox.intersection_area(&l.bbox) > 0.0);
        let outside = !safe.contains_rect(&l.bbox, 1e-9);
        if overlaps || outside {
            out.push(i);
        }
    }
    out
}

/// Draws one legal action. Move and scale proposals favour layers involved
/// in an overlap or margin breach half of the time.
pub fn propose(b: &CandidateBanner, rng: &mut ChaCha8Rng, palette: &crate::color::Palette) -> Option<Action> {
    let movable: Vec<usize> = (0..b.layers.len()).filter(|&i| !b.layers[i].is_pinned()).collect();
    let stackable: Vec<usize> = (0..b.layers.len()).filter(|&i| b.layers[i].kind != LayerKind::Background).collect();
    let recolorable: Vec<usize> = (0..b.layers.len()).filter(|&i| b.layers[i].kind.is_element()).collect();
    if stackable.is_empty() {
        return None;
    }
    let focus = troubled(b);
    for _ in 0..16 {
        let roll: f64 = rng.random();
        let pick = |rng: &mut ChaCha8Rng, from: &[usize]| from[rng.random_range(0..from.len())];
        let geometric = |rng: &mut ChaCha8Rng| {
            if !focus.is_empty() && rng.random_bool(0.5) {
                Some(pick(rng, &focus))
            } else if movable.is_empty() {
                None
            } else {
                Some(pick(rng, &movable))
            }
        };
        let action = if roll < 0.4 {
            let Some(i) = geometric(rng) else { continue };
            let dx = rng.random_range(-MAX_MOVE_PX..=MAX_MOVE_PX) as f64;
            let dy = rng.random_range(-MAX_MOVE_PX..=MAX_MOVE_PX) as f64;
            if dx == 0.0 && dy == 0.0 {
                continue;
            }
            Action::Move { layer: b.layers[i].name.clone(), dx, dy }
        } else if roll < 0.6 {
            let Some(i) = geometric(rng) else { continue };
            Action::Scale { layer: b.layers[i].name.clone(), factor: rng.random_range(SCALE_RANGE.0..=SCALE_RANGE.1) }
        } else if roll < 0.75 {
            if b.layers.len() < 3 {
                continue;
            }
            let i = pick(rng, &stackable);
            // position 0 stays with the background
            let z = rng.random_range(1..b.layers.len());
            if z == b.layers[i].z {
                continue;
            }
            Action::Reorder { layer: b.layers[i].name.clone(), z }
        } else if roll < 0.9 {
            if recolorable.is_empty() {
                continue;
            }
            let i = pick(rng, &recolorable);
            let color = palette.name(rng.random_range(0..palette.len())).to_string();
            if b.layers[i].color == palette.anchor_by_name(&color).ok() {
                continue;
            }
            Action::Recolor { layer: b.layers[i].name.clone(), color }
        } else {
            let i = pick(rng, &stackable);
            let delta = rng.random_range(-MAX_OPACITY_STEP..=MAX_OPACITY_STEP);
            Action::Opacity { layer: b.layers[i].name.clone(), delta }
        };
        return Some(action);
    }
    None
}

/// First-improvement hill climbing: an action is kept only when it strictly
/// raises the evaluation. Stops at the budget or after `patience`
/// consecutive rejections.
pub fn finetune(banner: &CandidateBanner, eval: &Evaluator<'_>, cfg: &SearchConfig, seed: u64) -> FinetuneOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = banner.clone();
    let initial = eval.score(&current);
    let mut score = initial;
    let mut trace = Vec::new();
    let mut rejections = 0;
    let mut iterations = 0;
    let mut stop = StopReason::Budget;
    while iterations < cfg.budget {
        if rejections >= cfg.patience {
            stop = StopReason::Patience;
            break;
        }
        iterations += 1;
        let Some(action) = propose(&current, &mut rng, eval.palette) else {
            rejections += 1;
            continue;
        };
        let mut next = current.clone();
        apply_action(&mut next, &action, eval.palette);
        let s = eval.score(&next);
        if s > score {
            current = next;
            score = s;
            rejections = 0;
            trace.push(TraceStep { iteration: iterations, action, score: s });
        } else {
            rejections += 1;
        }
    }
    FinetuneOutcome { banner: current, initial_score: initial, final_score: score, trace, iterations, stop }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjuster::EvalWeights;
    use crate::banner::PlacedLayer;
    use crate::color::{Palette, Rgb};

    pub(crate) fn overlapping_banner() -> CandidateBanner {
        let mut b = CandidateBanner::new("t", 800, 800);
        b.primary_color = Some(Rgb(255, 0, 0));
        let mut bg = PlacedLayer::new("background", LayerKind::Background, Rect::new(0.0, 0.0, 800.0, 800.0), 0);
        bg.color = Some(Rgb(255, 0, 0));
        b.layers.push(bg);
        b.layers.push(PlacedLayer::new("product-1", LayerKind::Product(1), Rect::new(380.0, 200.0, 320.0, 420.0), 1));
        let mut text = PlacedLayer::new("text-main", LayerKind::TextMain, Rect::new(200.0, 300.0, 300.0, 90.0), 2);
        text.font_size = Some(48.0);
        b.layers.push(text);
        b.layers.push(PlacedLayer::new("logo", LayerKind::Logo, Rect::new(680.0, 20.0, 100.0, 40.0), 3));
        b
    }

    #[test]
    fn trace_is_strictly_increasing_and_deterministic() {
        let p = Palette::default();
        let eval = Evaluator::new(EvalWeights::default(), &p);
        let b = overlapping_banner();
        let a = finetune(&b, &eval, &SearchConfig::default(), 7);
        let c = finetune(&b, &eval, &SearchConfig::default(), 7);
        assert_eq!(a.trace, c.trace);
        let mut prev = a.initial_score;
        for s in &a.trace {
            assert!(s.score > prev);
            prev = s.score;
        }
        assert_eq!(prev, a.final_score);
    }

    #[test]
    fn pinned_layers_never_move() {
        let p = Palette::default();
        let eval = Evaluator::new(EvalWeights::default(), &p);
        let b = overlapping_banner();
        for seed in 0..20 {
            let out = finetune(&b, &eval, &SearchConfig::default(), seed);
            assert_eq!(out.banner.layer("background").unwrap().bbox, b.layer("background").unwrap().bbox);
            assert_eq!(out.banner.layer("logo").unwrap().bbox, b.layer("logo").unwrap().bbox);
            for s in &out.trace {
                if let Action::Move { layer, .. } | Action::Scale { layer, .. } = &s.action {
                    assert!(layer != "background" && layer != "logo");
                }
            }
        }
    }

    #[test]
    fn overlap_gets_resolved() {
        let p = Palette::default();
        let eval = Evaluator::new(EvalWeights::default(), &p);
        let b = overlapping_banner();
        let out = finetune(&b, &eval, &SearchConfig::default(), 3);
        let iou = out.banner.layer("text-main").unwrap().bbox.iou(&out.banner.layer("product-1").unwrap().bbox);
        assert!(iou <= 0.05, "iou {iou}");
    }

    #[test]
    fn local_maximum_accepts_nothing() {
        let p = Palette::default();
        let eval = Evaluator::new(EvalWeights::from_array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]), &p);
        let mut b = overlapping_banner();
        b.layers[2].bbox = Rect::new(40.0, 40.0, 200.0, 60.0);
        let out = finetune(&b, &eval, &SearchConfig::default(), 11);
        assert!(out.trace.is_empty());
        assert_eq!(out.stop, StopReason::Patience);
    }

    #[test]
    fn bound_mask_follows_its_text() {
        let p = Palette::default();
        let mut b = overlapping_banner();
        let mut mask = PlacedLayer::new("mc-c", LayerKind::MaskMain, Rect::new(190.0, 290.0, 320.0, 110.0), 4);
        mask.bound_to = Some("text-main".into());
        b.layers.push(mask);
        apply_action(&mut b, &Action::Move { layer: "text-main".into(), dx: -20.0, dy: 10.0 }, &p);
        assert_eq!(b.layer("mc-c").unwrap().bbox, Rect::new(170.0, 300.0, 320.0, 110.0));
    }
}
