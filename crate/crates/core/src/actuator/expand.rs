//! Size expansion by per-kind topological rules.

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::Rect;
use crate::template::{LayerKind, Template};

pub const ASPECT_GATE_DEGREES: f64 = 30.0;

/// True when the diagonal angles of the two sizes differ by at most 30°.
pub fn aspect_gate(template_size: (u32, u32), target_size: (u32, u32)) -> bool {
    aspect_angle_difference(template_size, target_size) <= ASPECT_GATE_DEGREES
}

/// |atan(h_t / w_t) − atan(h_0 / w_0)| in degrees.
pub fn aspect_angle_difference(template_size: (u32, u32), target_size: (u32, u32)) -> f64 {
    let angle = |(w, h): (u32, u32)| (h as f64).atan2(w as f64).to_degrees();
    (angle(target_size) - angle(template_size)).abs()
}

#[derive(Debug, Error, PartialEq)]
pub enum ExpandError {
    #[error("aspect gate failed: {from:?} -> {to:?} differs by {degrees:.3} degrees")]
    GateFailed { from: (u32, u32), to: (u32, u32), degrees: f64 },
}

/// How one layer moved: a uniform scale about its center plus the center's
/// new position. Bound layers reuse their target's transform.
#[derive(Debug, Clone, Copy)]
struct Placement {
    old_center: (f64, f64),
    new_center: (f64, f64),
    scale: f64,
}

impl Placement {
    fn apply(&self, r: &Rect) -> Rect {
        let (ox, oy) = self.old_center;
        let (nx, ny) = self.new_center;
        Rect::new(nx + (r.x - ox) * self.scale, ny + (r.y - oy) * self.scale, r.w * self.scale, r.h * self.scale)
    }
}

fn centered(r: &Rect, sx: f64, sy: f64, s: f64) -> Placement {
    let (cx, cy) = r.center();
    Placement { old_center: (cx, cy), new_center: (cx * sx, cy * sy), scale: s }
}

/// Re-anchors a trim ornament to its nearest horizontal and vertical canvas
/// edges, keeping the scaled edge distance.
fn trim(r: &Rect, from: (f64, f64), to: (f64, f64), sx: f64, sy: f64, s: f64) -> Rect {
    let w = r.w * s;
    let h = r.h * s;
    let (left, right) = (r.x, from.0 - r.right());
    let (top, bottom) = (r.y, from.1 - r.bottom());
    let x = if left <= right { left * sx } else { to.0 - right * sx - w };
    let y = if top <= bottom { top * sy } else { to.1 - bottom * sy - h };
    Rect::new(x, y, w, h)
}

/// Re-targets a template to `target` (width, height). Background stretches
/// to fill; products, logo and text scale uniformly by min(sx, sy) about
/// centers kept at the same fractional position; trim ornaments stick to
/// their nearest edges; masks and bound ornaments follow their layer.
pub fn expand_size(t: &Template, target: (u32, u32)) -> Result<Template, ExpandError> {
    let from = t.size();
    if target == from {
        return Ok(t.clone());
    }
    if !aspect_gate(from, target) {
        return Err(ExpandError::GateFailed { from, to: target, degrees: aspect_angle_difference(from, target) });
    }
    let (w0, h0) = (from.0 as f64, from.1 as f64);
    let (wt, ht) = (target.0 as f64, target.1 as f64);
    let (sx, sy) = (wt / w0, ht / h0);
    let s = sx.min(sy);
    let canvas = Rect::canvas(target.0, target.1);

    let mut placements: HashMap<&str, Placement> = HashMap::new();
    for l in &t.layers {
        if l.kind.is_product() || l.kind.is_text() || l.kind == LayerKind::Logo {
            placements.insert(&l.name, centered(&l.bbox, sx, sy, s));
        }
    }

    let mut out = t.clone();
    out.width = target.0;
    out.height = target.1;
    for (layer, orig) in out.layers.iter_mut().zip(&t.layers) {
        let r = &orig.bbox;
        let moved = match orig.kind {
            LayerKind::Background => Rect::new(r.x * sx, r.y * sy, r.w * sx, r.h * sy),
            LayerKind::OrnamentTrim => trim(r, (w0, h0), (wt, ht), sx, sy, s),
            LayerKind::OrnamentFree | LayerKind::MaskMain | LayerKind::MaskSub | LayerKind::MaskAction => {
                let p = orig
                    .bound_to
                    .as_deref()
                    .and_then(|b| placements.get(b))
                    .copied()
                    .unwrap_or_else(|| centered(r, sx, sy, s));
                p.apply(r)
            }
            _ => placements[orig.name.as_str()].apply(r),
        };
        layer.bbox = moved.rounded().clamp_into(&canvas);
        if let Some(fs) = orig.font_size {
            layer.font_size = Some(fs * s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::test_support::sample_template;

    #[test]
    fn gate_examples() {
        let d = aspect_angle_difference((800, 800), (800, 400));
        assert!((d - 18.434948822922).abs() < 1e-9);
        assert!(aspect_gate((800, 800), (800, 400)));
        let d = aspect_angle_difference((800, 800), (1200, 200));
        assert!((d - 35.537677791974).abs() < 1e-9);
        assert!(!aspect_gate((800, 800), (1200, 200)));
        assert!(aspect_gate((640, 480), (640, 480)));
    }

    #[test]
    fn identity_at_equal_size() {
        let t = sample_template();
        assert_eq!(expand_size(&t, (800, 800)).unwrap(), t);
    }

    #[test]
    fn uniform_halving() {
        let t = sample_template();
        let e = expand_size(&t, (400, 400)).unwrap();
        for (a, b) in t.layers.iter().zip(&e.layers) {
            assert_eq!(b.bbox.w, (a.bbox.w / 2.0).round().max(1.0), "{}", a.name);
            assert_eq!(b.bbox.h, (a.bbox.h / 2.0).round().max(1.0), "{}", a.name);
            assert_eq!(b.bbox.x, (a.bbox.x / 2.0).round(), "{}", a.name);
            assert_eq!(b.bbox.y, (a.bbox.y / 2.0).round(), "{}", a.name);
        }
    }

    #[test]
    fn product_center_follows_fractional_position() {
        let mut t = sample_template();
        t.layers[1].bbox = Rect::new(300.0, 300.0, 200.0, 200.0); // centered at (400, 400)
        let e = expand_size(&t, (800, 400)).unwrap();
        let p = e.layer("product-1").unwrap().bbox;
        assert_eq!(p, Rect::new(350.0, 150.0, 100.0, 100.0));
        assert_eq!(p.center(), (400.0, 200.0));
    }

    #[test]
    fn gate_failure_is_reported() {
        let t = sample_template();
        assert!(matches!(expand_size(&t, (1200, 200)), Err(ExpandError::GateFailed { .. })));
    }

    #[test]
    fn trim_ornament_sticks_to_its_corner() {
        let mut t = sample_template();
        // top-right corner, 10 px from both edges
        t.layers[5].bbox = Rect::new(690.0, 10.0, 100.0, 100.0);
        let e = expand_size(&t, (1000, 800)).unwrap();
        let r = e.layer("ornament-a-1").unwrap().bbox;
        assert_eq!(r.y, 10.0);
        assert!((1000.0 - r.right() - 12.5).abs() <= 0.5);
        assert_eq!(r.w, 100.0);
    }

    #[test]
    fn mask_follows_its_text() {
        let t = sample_template();
        let e = expand_size(&t, (600, 600)).unwrap();
        let text = e.layer("text-main").unwrap().bbox;
        let mask = e.layer("mc-c").unwrap().bbox;
        assert!(mask.contains_rect(&text, 1.0));
    }

    #[test]
    fn everything_stays_inside_and_z_is_kept() {
        let t = sample_template();
        for target in [(1000, 700), (700, 1000), (500, 400), (800, 500)] {
            let e = expand_size(&t, target).unwrap();
            let canvas = e.canvas();
            for (a, b) in t.layers.iter().zip(&e.layers) {
                assert!(canvas.contains_rect(&b.bbox, 1e-9), "{} {:?}", b.name, target);
                assert_eq!(a.z, b.z);
            }
        }
    }
}
