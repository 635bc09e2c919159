//! Aesthetic evaluation: six bounded terms combined by configurable weights.

use serde::{Deserialize, Serialize};

use crate::banner::CandidateBanner;
use crate::color::Palette;
use crate::generator::Canvas;
use crate::geometry::Rect;

pub const ALIGN_TOLERANCE_PX: f64 = 4.0;
pub const SAFETY_INSET: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalWeights {
    pub occlusion: f64,
    pub containment: f64,
    pub margin: f64,
    pub alignment: f64,
    pub harmony: f64,
    pub simplicity: f64,
}

impl Default for EvalWeights {
    fn default() -> Self {
        EvalWeights {
            occlusion: 0.30,
            containment: 0.20,
            margin: 0.15,
            alignment: 0.15,
            harmony: 0.10,
            simplicity: 0.10,
        }
    }
}

impl EvalWeights {
    pub fn as_array(&self) -> [f64; 6] {
        [self.occlusion, self.containment, self.margin, self.alignment, self.harmony, self.simplicity]
    }

    pub fn from_array(w: [f64; 6]) -> EvalWeights {
        EvalWeights {
            occlusion: w[0],
            containment: w[1],
            margin: w[2],
            alignment: w[3],
            harmony: w[4],
            simplicity: w[5],
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let w = self.as_array();
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err("evaluation weights must be finite and non-negative".into());
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(format!("evaluation weights must sum to 1, got {sum}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Terms {
    pub occlusion: f64,
    pub containment: f64,
    pub margin: f64,
    pub alignment: f64,
    pub harmony: f64,
    pub simplicity: f64,
}

impl Terms {
    pub fn as_array(&self) -> [f64; 6] {
        [self.occlusion, self.containment, self.margin, self.alignment, self.harmony, self.simplicity]
    }
}

/// Summed-area tables of the backdrop's channels and their squares.
#[derive(Debug, Clone)]
pub struct Backdrop {
    width: usize,
    height: usize,
    sum: Vec<[f64; 3]>,
    sq: Vec<[f64; 3]>,
}

impl Backdrop {
    pub fn from_canvas(c: &Canvas) -> Backdrop {
        let (w, h) = (c.width as usize, c.height as usize);
        let stride = w + 1;
        let mut sum = vec![[0.0; 3]; stride * (h + 1)];
        let mut sq = vec![[0.0; 3]; stride * (h + 1)];
        for y in 0..h {
            let mut row = [0.0; 3];
            let mut row_sq = [0.0; 3];
            for x in 0..w {
                let p = c.data[y * w + x];
                for k in 0..3 {
                    row[k] += p[k];
                    row_sq[k] += p[k] * p[k];
                    sum[(y + 1) * stride + x + 1][k] = sum[y * stride + x + 1][k] + row[k];
                    sq[(y + 1) * stride + x + 1][k] = sq[y * stride + x + 1][k] + row_sq[k];
                }
            }
        }
        Backdrop { width: w, height: h, sum, sq }
    }

    /// Mean per-channel variance under `r`, divided by the largest possible
    /// variance of a [0, 1] channel (1/4). `None` for an empty region.
    pub fn normalized_variance(&self, r: &Rect) -> Option<f64> {
        let x0 = (r.x.round().max(0.0) as usize).min(self.width);
        let y0 = (r.y.round().max(0.0) as usize).min(self.height);
        let x1 = (r.right().round().max(0.0) as usize).min(self.width);
        let y1 = (r.bottom().round().max(0.0) as usize).min(self.height);
        if x1 <= x0 || y1 <= y0 {
            return None;
        }
        let n = ((x1 - x0) * (y1 - y0)) as f64;
        let stride = self.width + 1;
        let area = |t: &Vec<[f64; 3]>, k: usize| {
            t[y1 * stride + x1][k] - t[y0 * stride + x1][k] - t[y1 * stride + x0][k] + t[y0 * stride + x0][k]
        };
        let mut total = 0.0;
        for k in 0..3 {
            let mean = area(&self.sum, k) / n;
            let var = (area(&self.sq, k) / n - mean * mean).max(0.0);
            total += var;
        }
        Some((total / 3.0 / 0.25).clamp(0.0, 1.0))
    }
}

#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    pub weights: EvalWeights,
    pub palette: &'a Palette,
    pub backdrop: Option<Backdrop>,
}

fn mean_or_one(v: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        1.0
    } else {
        sum / n as f64
    }
}

/// Pairs sharing a left, center or right edge (or top, middle, bottom)
/// within the tolerance.
fn aligned(a: &Rect, b: &Rect) -> bool {
    let near = |p: f64, q: f64| (p - q).abs() <= ALIGN_TOLERANCE_PX;
    near(a.x, b.x)
        || near(a.center().0, b.center().0)
        || near(a.right(), b.right())
        || near(a.y, b.y)
        || near(a.center().1, b.center().1)
        || near(a.bottom(), b.bottom())
}

impl<'a> Evaluator<'a> {
    pub fn new(weights: EvalWeights, palette: &'a Palette) -> Evaluator<'a> {
        Evaluator { weights, palette, backdrop: None }
    }

    pub fn with_backdrop(mut self, backdrop: Backdrop) -> Self {
        self.backdrop = Some(backdrop);
        self
    }

    pub fn terms(&self, b: &CandidateBanner) -> Terms {
        let canvas = b.canvas();
        let texts: Vec<&Rect> = b.layers.iter().filter(|l| l.kind.is_text()).map(|l| &l.bbox).collect();
        let products: Vec<&Rect> = b.layers.iter().filter(|l| l.kind.is_product()).map(|l| &l.bbox).collect();

        let max_iou = texts.iter().flat_map(|t| products.iter().map(move |p| t.iou(p))).fold(0.0, f64::max);
        let occlusion = 1.0 - max_iou;

        let (inside, total) = b
            .layers
            .iter()
            .filter(|l| l.kind != crate::template::LayerKind::Background)
            .fold((0.0, 0.0), |(i, t), l| (i + l.bbox.intersection_area(&canvas), t + l.bbox.area()));
        let containment = if total > 0.0 { inside / total } else { 1.0 };

        let safe = Rect::new(
            canvas.w * SAFETY_INSET,
            canvas.h * SAFETY_INSET,
            canvas.w * (1.0 - 2.0 * SAFETY_INSET),
            canvas.h * (1.0 - 2.0 * SAFETY_INSET),
        );
        let margin = mean_or_one(texts.iter().chain(&products).map(|r| {
            if r.area() > 0.0 {
                r.intersection_area(&safe) / r.area()
            } else {
                1.0
            }
        }));

        let focus: Vec<&Rect> = texts.iter().chain(&products).copied().collect();
        let mut pairs = 0usize;
        let mut hits = 0usize;
        for i in 0..focus.len() {
            for j in i + 1..focus.len() {
                pairs += 1;
                hits += aligned(focus[i], focus[j]) as usize;
            }
        }
        let alignment = if pairs == 0 { 1.0 } else { hits as f64 / pairs as f64 };

        let d_max = self.palette.max_distance();
        let harmony = match b.primary_color {
            None => 1.0,
            Some(p) => {
                let p = p.to_lab();
                mean_or_one(
                    b.layers
                        .iter()
                        .filter(|l| l.kind.is_element())
                        .filter_map(|l| l.color)
                        .map(|c| 1.0 - c.to_lab().distance(&p) / d_max),
                )
            }
        };

        let simplicity = match &self.backdrop {
            None => 1.0,
            Some(bd) => 1.0 - mean_or_one(texts.iter().filter_map(|r| bd.normalized_variance(r))),
        };

        let c = |v: f64| v.clamp(0.0, 1.0);
        Terms {
            occlusion: c(occlusion),
            containment: c(containment),
            margin: c(margin),
            alignment: c(alignment),
            harmony: c(harmony),
            simplicity: c(simplicity),
        }
    }

    pub fn score(&self, b: &CandidateBanner) -> f64 {
        let t = self.terms(b).as_array();
        let w = self.weights.as_array();
        t.iter().zip(w).map(|(t, w)| t * w).sum::<f64>().clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banner::PlacedLayer;
    use crate::color::Rgb;
    use crate::template::LayerKind;

    fn only(i: usize) -> EvalWeights {
        let mut w = [0.0; 6];
        w[i] = 1.0;
        EvalWeights::from_array(w)
    }

    fn two_box(text: Rect, product: Rect) -> CandidateBanner {
        let mut b = CandidateBanner::new("t", 400, 400);
        b.layers.push(PlacedLayer::new("product-1", LayerKind::Product(1), product, 0));
        b.layers.push(PlacedLayer::new("text-main", LayerKind::TextMain, text, 1));
        b
    }

    #[test]
    fn defaults_sum_to_one() {
        EvalWeights::default().validate().unwrap();
        assert!(EvalWeights::from_array([0.5, 0.5, 0.1, 0.0, 0.0, 0.0]).validate().is_err());
    }

    #[test]
    fn full_overlap_scores_zero_on_occlusion() {
        let p = Palette::default();
        let r = Rect::new(100.0, 100.0, 100.0, 100.0);
        assert_eq!(Evaluator::new(only(0), &p).score(&two_box(r, r)), 0.0);
    }

    #[test]
    fn quarter_iou() {
        let p = Palette::default();
        let text = Rect::new(0.0, 0.0, 100.0, 100.0);
        let product = Rect::new(60.0, 0.0, 100.0, 100.0);
        // intersection 40x100 = 4000, union 16000
        assert!((text.iou(&product) - 0.25).abs() < 1e-15);
        let s = Evaluator::new(only(0), &p).score(&two_box(text, product));
        assert!((s - 0.75).abs() < 1e-12);
    }

    #[test]
    fn well_placed_banner_maxes_the_boundary_terms() {
        let p = Palette::default();
        let mut b = two_box(Rect::new(40.0, 40.0, 200.0, 60.0), Rect::new(40.0, 150.0, 200.0, 200.0));
        b.primary_color = Some(Rgb(255, 0, 0));
        let mut mask = PlacedLayer::new("mc-c", LayerKind::MaskMain, Rect::new(30.0, 30.0, 220.0, 80.0), 2);
        mask.color = Some(Rgb(255, 0, 0));
        b.layers.push(mask);
        let t = Evaluator::new(EvalWeights::default(), &p).terms(&b);
        assert_eq!((t.occlusion, t.containment, t.margin, t.harmony), (1.0, 1.0, 1.0, 1.0));
        assert_eq!(t.alignment, 1.0);
    }

    #[test]
    fn margin_scales_with_the_inset_overlap() {
        let p = Palette::default();
        // 400 px canvas: safe band starts at 8 px; a 100 px box starting at 0 has 8% outside horizontally
        let b = two_box(Rect::new(0.0, 100.0, 100.0, 100.0), Rect::new(200.0, 200.0, 100.0, 100.0));
        let t = Evaluator::new(only(2), &p).terms(&b);
        assert!((t.margin - (0.92 + 1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn flat_backdrop_is_simple_and_checkerboard_is_not() {
        let p = Palette::default();
        let mut flat = Canvas::new(20, 20);
        flat.fill_rect(&Rect::new(0.0, 0.0, 20.0, 20.0), Rgb(10, 200, 30), 1.0);
        let b = two_box(Rect::new(0.0, 0.0, 10.0, 10.0), Rect::new(10.0, 10.0, 10.0, 10.0));
        let e = Evaluator::new(only(5), &p).with_backdrop(Backdrop::from_canvas(&flat));
        assert!((e.score(&b) - 1.0).abs() < 1e-9);
        let mut checker = Canvas::new(20, 20);
        for y in 0..20 {
            for x in 0..20 {
                if (x + y) % 2 == 0 {
                    checker.fill_rect(&Rect::new(x as f64, y as f64, 1.0, 1.0), Rgb(255, 255, 255), 1.0);
                } else {
                    checker.fill_rect(&Rect::new(x as f64, y as f64, 1.0, 1.0), Rgb(0, 0, 0), 1.0);
                }
            }
        }
        let e = Evaluator::new(only(5), &p).with_backdrop(Backdrop::from_canvas(&checker));
        assert!(e.score(&b).abs() < 1e-9);
    }
}
