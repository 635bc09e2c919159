//! Multi-product arrangement by aspect-ratio decision tables.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::Rect;
use crate::request::ProductInput;

pub const INCLINE_DEGREES: f64 = 8.0;
pub const FAN_STEP_DEGREES: f64 = 30.0;
/// Largest allowed intersection between two slots, as a fraction of the
/// smaller slot.
pub const MAX_SLOT_OVERLAP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProductLayout {
    Single,
    Diagonal,
    Inclined,
    SideBySide,
    ThreeWidth,
    OneHeightTwoWidth,
    ThreeSlender,
    ThreeHeight,
    Triangular,
    NearVisionRotation,
    TwoLayerTriangle,
    FanRotation,
    OneLayerTriangle,
}

impl fmt::Display for ProductLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Decision table over product aspect ratios (w/h).
pub fn choose_layout(aspects: &[f64]) -> ProductLayout {
    use ProductLayout::*;
    let n = aspects.len();
    let mean = aspects.iter().sum::<f64>() / n.max(1) as f64;
    match n {
        0 | 1 => Single,
        2 => {
            if mean <= 0.75 {
                SideBySide
            } else if mean <= 1.33 {
                Diagonal
            } else {
                Inclined
            }
        }
        3 => {
            let count = |p: &dyn Fn(f64) -> bool| aspects.iter().filter(|&&a| p(a)).count();
            if count(&|a| a <= 0.6) == 3 {
                ThreeSlender
            } else if count(&|a| a > 0.6 && a <= 0.9) == 3 {
                ThreeHeight
            } else if count(&|a| a > 1.3) == 3 {
                ThreeWidth
            } else if count(&|a| a <= 0.9) == 1 && count(&|a| a > 1.3) == 2 {
                OneHeightTwoWidth
            } else {
                Triangular
            }
        }
        4 => {
            if mean > 1.0 {
                OneLayerTriangle
            } else {
                FanRotation
            }
        }
        5 => TwoLayerTriangle,
        _ => NearVisionRotation,
    }
}

/// Slot fractions `[x, y, w, h]` of the product area and rotation in degrees.
fn slots(layout: ProductLayout, n: usize) -> Vec<([f64; 4], f64)> {
    use ProductLayout::*;
    let third = 1.0 / 3.0;
    match layout {
        Single => vec![([0.0, 0.0, 1.0, 1.0], 0.0)],
        SideBySide => vec![([0.0, 0.0, 0.5, 1.0], 0.0), ([0.5, 0.0, 0.5, 1.0], 0.0)],
        Diagonal => vec![([0.0, 0.0, 0.52, 0.6], 0.0), ([0.48, 0.4, 0.52, 0.6], 0.0)],
        Inclined => vec![([0.0, 0.0, 1.0, 0.5], -INCLINE_DEGREES), ([0.0, 0.5, 1.0, 0.5], INCLINE_DEGREES)],
        ThreeWidth => (0..3).map(|i| ([0.0, i as f64 * third, 1.0, third], 0.0)).collect(),
        ThreeSlender => (0..3).map(|i| ([i as f64 * third, 0.0, third, 1.0], 0.0)).collect(),
        ThreeHeight => vec![
            ([third, 0.0, third, 1.0], 0.0),
            ([0.0, 0.15, third, 0.85], 0.0),
            ([2.0 * third, 0.15, third, 0.85], 0.0),
        ],
        OneHeightTwoWidth => {
            vec![([0.0, 0.0, 0.4, 1.0], 0.0), ([0.4, 0.0, 0.6, 0.5], 0.0), ([0.4, 0.5, 0.6, 0.5], 0.0)]
        }
        Triangular => vec![([0.25, 0.0, 0.5, 0.5], 0.0), ([0.0, 0.5, 0.5, 0.5], 0.0), ([0.5, 0.5, 0.5, 0.5], 0.0)],
        OneLayerTriangle => {
            let mut v = vec![([0.2, 0.0, 0.6, 0.55], 0.0)];
            v.extend((0..3).map(|i| ([i as f64 * third, 0.55, third, 0.45], 0.0)));
            v
        }
        FanRotation => {
            let step = 1.0 / n as f64;
            let mid = (n as f64 - 1.0) / 2.0;
            (0..n)
                .map(|i| {
                    let lift = if (i as f64 - mid).abs() < 1.0 { 0.0 } else { 0.15 };
                    ([i as f64 * step, lift, step, 1.0 - lift], (i as f64 - mid) * FAN_STEP_DEGREES)
                })
                .collect()
        }
        TwoLayerTriangle => {
            let mut v: Vec<_> = (0..2).map(|i| ([1.0 / 6.0 + i as f64 * third, 0.0, third, 0.45], 0.0)).collect();
            v.extend((0..3).map(|i| ([i as f64 * third, 0.45, third, 0.55], 0.0)));
            v
        }
        NearVisionRotation => {
            // back row smaller, front row larger; alternate a slight tilt
            let back = n / 2;
            let front = n - back;
            let row = |count: usize, y: f64, h: f64, offset: usize| {
                let w = 1.0 / count as f64;
                (0..count).map(move |i| {
                    let tilt = if (i + offset) % 2 == 0 { -INCLINE_DEGREES } else { INCLINE_DEGREES };
                    ([i as f64 * w, y, w, h], tilt)
                })
            };
            let mut v: Vec<_> = row(front, 0.4, 0.6, 0).collect();
            v.extend(row(back, 0.0, 0.4, 1));
            v
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotPlacement {
    pub slot: Rect,
    pub rotation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPlan {
    pub layout: ProductLayout,
    /// One entry per product, in input order.
    pub placements: Vec<SlotPlacement>,
}

/// Arranges products given their aspects and pixel areas. Larger products
/// get larger slots; equal areas keep input order.
pub fn layout_slots(aspects: &[f64], areas: &[f64], area: &Rect) -> ProductPlan {
    let n = aspects.len();
    let layout = choose_layout(aspects);
    let mut slot_list: Vec<(Rect, f64)> =
        slots(layout, n).into_iter().map(|([x, y, w, h], rot)| (area.sub_rect(x, y, w, h), rot)).collect();
    slot_list.sort_by(|a, b| b.0.area().total_cmp(&a.0.area()));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| areas[b].total_cmp(&areas[a]).then(a.cmp(&b)));
    let mut placements = vec![SlotPlacement { slot: *area, rotation: 0.0 }; n];
    for (rank, &product) in order.iter().enumerate() {
        let (slot, rotation) = slot_list[rank];
        placements[product] = SlotPlacement { slot, rotation };
    }
    ProductPlan { layout, placements }
}

pub fn layout_products(products: &[ProductInput], area: &Rect) -> ProductPlan {
    let aspects: Vec<f64> = products.iter().map(ProductInput::aspect).collect();
    let areas: Vec<f64> = products.iter().map(|p| p.area() as f64).collect();
    layout_slots(&aspects, &areas, area)
}

/// Largest rectangle with aspect `aspect` that, rotated by `degrees`,
/// fits inside `slot`; centered on the slot. Returns the unrotated size.
pub fn fit_rotated(slot: &Rect, aspect: f64, degrees: f64) -> Rect {
    let t = degrees.to_radians();
    let (c, s) = (t.cos().abs(), t.sin().abs());
    // rotated bbox of (a*h, h) is (a*h*c + h*s, a*h*s + h*c)
    let h_by_w = slot.w / (aspect * c + s);
    let h_by_h = slot.h / (aspect * s + c);
    let h = h_by_w.min(h_by_h);
    let (cx, cy) = slot.center();
    Rect::from_center(cx, cy, aspect * h, h)
}

/// Intersection over the smaller area.
pub fn slot_overlap(a: &Rect, b: &Rect) -> f64 {
    let small = a.area().min(b.area());
    if small <= 0.0 {
        0.0
    } else {
        a.intersection_area(b) / small
    }
}
