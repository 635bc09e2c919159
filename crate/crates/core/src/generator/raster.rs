//! Premultiplied f64 canvas with source-over compositing.

use image::{Rgba, RgbaImage};

use crate::color::Rgb;
use crate::geometry::Rect;

/// Premultiplied RGBA, channels in [0, 1].
pub type Premul = [f64; 4];

pub fn premultiply(px: [u8; 4]) -> Premul {
    let a = px[3] as f64 / 255.0;
    [px[0] as f64 / 255.0 * a, px[1] as f64 / 255.0 * a, px[2] as f64 / 255.0 * a, a]
}

pub fn unpremultiply(p: Premul) -> [u8; 4] {
    let q = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    if p[3] <= 0.0 {
        return [0, 0, 0, 0];
    }
    [q(p[0] / p[3]), q(p[1] / p[3]), q(p[2] / p[3]), q(p[3])]
}

/// `src` over `dst`.
#[inline]
pub fn over(src: Premul, dst: Premul) -> Premul {
    let k = 1.0 - src[3];
    [src[0] + dst[0] * k, src[1] + dst[1] * k, src[2] + dst[2] * k, src[3] + dst[3] * k]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Canvas {
    pub width: u32,
    pub height: u32,
    pub data: Vec<Premul>,
}

/// Pixel index range whose centers fall inside `[lo, hi)`, clipped to `0..n`.
fn span(lo: f64, hi: f64, n: u32) -> std::ops::Range<u32> {
    let a = (lo - 0.5).ceil().max(0.0);
    let b = (hi - 0.5).ceil().min(n as f64);
    if b <= a {
        0..0
    } else {
        a as u32..b as u32
    }
}

impl Canvas {
    pub fn new(width: u32, height: u32) -> Canvas {
        Canvas { width, height, data: vec![[0.0; 4]; width as usize * height as usize] }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Premul {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn blend(&mut self, x: u32, y: u32, src: Premul) {
        let i = y as usize * self.width as usize + x as usize;
        self.data[i] = over(src, self.data[i]);
    }

    /// Draws a flat color over every pixel whose center lies in `rect`.
    pub fn fill_rect(&mut self, rect: &Rect, color: Rgb, opacity: f64) {
        let a = opacity.clamp(0.0, 1.0);
        let src = [color.0 as f64 / 255.0 * a, color.1 as f64 / 255.0 * a, color.2 as f64 / 255.0 * a, a];
        for y in span(rect.y, rect.bottom(), self.height) {
            for x in span(rect.x, rect.right(), self.width) {
                self.blend(x, y, src);
            }
        }
    }

    /// Resamples `img` bilinearly into `dest`, rotated clockwise by
    /// `rotation` degrees about the rect center. With `tint`, the raster acts
    /// as a coverage mask for that color.
    pub fn draw_image(&mut self, img: &RgbaImage, dest: &Rect, rotation: f64, opacity: f64, tint: Option<Rgb>) {
        if img.width() == 0 || img.height() == 0 || dest.w <= 0.0 || dest.h <= 0.0 {
            return;
        }
        let opacity = opacity.clamp(0.0, 1.0);
        let (cx, cy) = dest.center();
        let t = rotation.to_radians();
        let (sin, cos) = t.sin_cos();
        // axis-aligned bounds of the rotated rect
        let hw = (dest.w * cos.abs() + dest.h * sin.abs()) / 2.0;
        let hh = (dest.w * sin.abs() + dest.h * cos.abs()) / 2.0;
        let (sw, sh) = (img.width() as f64, img.height() as f64);
        let tint = tint.map(|c| [c.0 as f64 / 255.0, c.1 as f64 / 255.0, c.2 as f64 / 255.0]);
        for y in span(cy - hh, cy + hh, self.height) {
            for x in span(cx - hw, cx + hw, self.width) {
                let (px, py) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                // inverse rotation back into the unrotated rect
                let qx = cx + px * cos + py * sin;
                let qy = cy - px * sin + py * cos;
                if qx < dest.x || qx >= dest.right() || qy < dest.y || qy >= dest.bottom() {
                    continue;
                }
                let u = (qx - dest.x) / dest.w * sw - 0.5;
                let v = (qy - dest.y) / dest.h * sh - 0.5;
                let mut s = sample_bilinear(img, u, v);
                if let Some(c) = tint {
                    s = [c[0] * s[3], c[1] * s[3], c[2] * s[3], s[3]];
                }
                if s[3] <= 0.0 {
                    continue;
                }
                self.blend(x, y, s.map(|c| c * opacity));
            }
        }
    }

    pub fn to_image(&self) -> RgbaImage {
        let mut img = RgbaImage::new(self.width, self.height);
        for (i, px) in img.pixels_mut().enumerate() {
            *px = Rgba(unpremultiply(self.data[i]));
        }
        img
    }
}

/// Premultiplied bilinear sample at continuous source coordinates (pixel
/// centers at integers), clamped to the edge.
pub fn sample_bilinear(img: &RgbaImage, u: f64, v: f64) -> Premul {
    let max_x = img.width() as f64 - 1.0;
    let max_y = img.height() as f64 - 1.0;
    let u = u.clamp(0.0, max_x);
    let v = v.clamp(0.0, max_y);
    let (x0, y0) = (u.floor(), v.floor());
    let (fx, fy) = (u - x0, v - y0);
    let (x0, y0) = (x0 as u32, y0 as u32);
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let p = |x, y| premultiply(img.get_pixel(x, y).0);
    if fx == 0.0 && fy == 0.0 {
        return p(x0, y0);
    }
    let (a, b, c, d) = (p(x0, y0), p(x1, y0), p(x0, y1), p(x1, y1));
    let mut out = [0.0; 4];
    for k in 0..4 {
        let top = a[k] + (b[k] - a[k]) * fx;
        let bottom = c[k] + (d[k] - c[k]) * fx;
        out[k] = top + (bottom - top) * fy;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_source_over() {
        let mut c = Canvas::new(1, 1);
        c.fill_rect(&Rect::new(0.0, 0.0, 1.0, 1.0), Rgb(255, 0, 0), 1.0);
        let src = premultiply([0, 0, 255, 128]);
        c.blend(0, 0, src);
        assert_eq!(c.to_image().get_pixel(0, 0).0, [127, 0, 128, 255]);
    }

    #[test]
    fn empty_canvas_is_transparent() {
        let c = Canvas::new(3, 2);
        assert!(c.to_image().pixels().all(|p| p.0 == [0, 0, 0, 0]));
    }

    #[test]
    fn pixel_aligned_copy_is_exact() {
        let mut img = RgbaImage::new(4, 3);
        for (x, y, p) in img.enumerate_pixels_mut() {
            *p = Rgba([(x * 60) as u8, (y * 80) as u8, 7, 255]);
        }
        let mut c = Canvas::new(10, 10);
        c.draw_image(&img, &Rect::new(2.0, 5.0, 4.0, 3.0), 0.0, 1.0, None);
        let out = c.to_image();
        for (x, y, p) in img.enumerate_pixels() {
            assert_eq!(out.get_pixel(x + 2, y + 5), p);
        }
        assert_eq!(out.get_pixel(1, 5).0, [0, 0, 0, 0]);
    }

    #[test]
    fn quarter_turn_swaps_axes() {
        let mut img = RgbaImage::from_pixel(4, 2, Rgba([0, 0, 0, 255]));
        img.put_pixel(0, 0, Rgba([255, 0, 0, 255]));
        let mut c = Canvas::new(4, 4);
        // 4x2 rect centered at (2, 2), rotated 90° clockwise covers x 1..3, y 0..4
        c.draw_image(&img, &Rect::new(0.0, 1.0, 4.0, 2.0), 90.0, 1.0, None);
        let out = c.to_image();
        assert_eq!(out.get_pixel(0, 0).0[3], 0);
        assert_eq!(out.get_pixel(2, 0).0, [255, 0, 0, 255]);
        assert_eq!(out.get_pixel(1, 3).0[3], 255);
    }
}
