//! Axis-aligned rectangles in canvas pixel coordinates (origin top-left).

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Rect::new(cx - w / 2.0, cy - h / 2.0, w, h)
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn area(&self) -> f64 {
        self.w.max(0.0) * self.h.max(0.0)
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if x1 > x0 && y1 > y0 {
            Some(Rect::new(x0, y0, x1 - x0, y1 - y0))
        } else {
            None
        }
    }

    pub fn intersection_area(&self, other: &Rect) -> f64 {
        self.intersection(other).map_or(0.0, |r| r.area())
    }

    /// Intersection over union; 0 for disjoint or degenerate boxes.
    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }

    pub fn union(&self, other: &Rect) -> Rect {
        let x0 = self.x.min(other.x);
        let y0 = self.y.min(other.y);
        let x1 = self.right().max(other.right());
        let y1 = self.bottom().max(other.bottom());
        Rect::new(x0, y0, x1 - x0, y1 - y0)
    }

    /// True when `inner` lies within `self`, allowing `eps` of slack on every side.
    pub fn contains_rect(&self, inner: &Rect, eps: f64) -> bool {
        inner.x >= self.x - eps
            && inner.y >= self.y - eps
            && inner.right() <= self.right() + eps
            && inner.bottom() <= self.bottom() + eps
    }

    pub fn canvas(width: u32, height: u32) -> Rect {
        Rect::new(0.0, 0.0, width as f64, height as f64)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Rect {
        Rect::new(self.x + dx, self.y + dy, self.w, self.h)
    }

    pub fn scale_about_center(&self, factor: f64) -> Rect {
        let (cx, cy) = self.center();
        Rect::from_center(cx, cy, self.w * factor, self.h * factor)
    }

    /// Shrinks to fit and shifts so the rectangle lies inside `bounds`.
    pub fn clamp_into(&self, bounds: &Rect) -> Rect {
        let w = self.w.min(bounds.w);
        let h = self.h.min(bounds.h);
        let x = self.x.clamp(bounds.x, bounds.right() - w);
        let y = self.y.clamp(bounds.y, bounds.bottom() - h);
        Rect::new(x, y, w, h)
    }

    /// Rounds every coordinate to whole pixels, keeping width and height ≥ 1.
    pub fn rounded(&self) -> Rect {
        Rect::new(self.x.round(), self.y.round(), self.w.round().max(1.0), self.h.round().max(1.0))
    }

    /// Maps a rectangle expressed in fractions of `self` to absolute coordinates.
    pub fn sub_rect(&self, fx: f64, fy: f64, fw: f64, fh: f64) -> Rect {
        Rect::new(self.x + fx * self.w, self.y + fy * self.h, fw * self.w, fh * self.h)
    }

    /// Affine map of `r` from the frame `from` onto the frame `to`.
    pub fn remap(r: &Rect, from: &Rect, to: &Rect) -> Rect {
        let sx = if from.w > 0.0 { to.w / from.w } else { 1.0 };
        let sy = if from.h > 0.0 { to.h / from.h } else { 1.0 };
        Rect::new(to.x + (r.x - from.x) * sx, to.y + (r.y - from.y) * sy, r.w * sx, r.h * sy)
    }
}

impl Serialize for Rect {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y, self.w, self.h].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rect {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y, w, h] = <[f64; 4]>::deserialize(d)?;
        Ok(Rect { x, y, w, h })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iou_quarter_overlap() {
        let a = Rect::new(0.0, 0.0, 10.0, 10.0);
        let b = Rect::new(5.0, 0.0, 10.0, 10.0);
        // inter 50, union 150
        assert!((a.iou(&b) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(a.iou(&Rect::new(20.0, 20.0, 1.0, 1.0)), 0.0);
    }

    #[test]
    fn clamp_into_shifts_then_shrinks() {
        let bounds = Rect::canvas(100, 100);
        let r = Rect::new(90.0, -5.0, 20.0, 20.0).clamp_into(&bounds);
        assert_eq!(r, Rect::new(80.0, 0.0, 20.0, 20.0));
        let big = Rect::new(-10.0, -10.0, 300.0, 50.0).clamp_into(&bounds);
        assert_eq!(big, Rect::new(0.0, 0.0, 100.0, 50.0));
    }

    #[test]
    fn remap_identity_frame() {
        let f = Rect::new(10.0, 10.0, 50.0, 20.0);
        let r = Rect::new(12.0, 11.0, 5.0, 5.0);
        assert_eq!(Rect::remap(&r, &f, &f), r);
    }
}
