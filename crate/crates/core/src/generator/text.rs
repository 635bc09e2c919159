//! Single-line text placement and glyph rasterization.

use std::path::Path;

use ab_glyph::{point, Font, FontArc, GlyphId, PxScale, ScaleFont};

use super::raster::Canvas;
use crate::banner::TextAlign;
use crate::color::Rgb;
use crate::geometry::Rect;

static EMBEDDED_FONT: &[u8] = include_bytes!("../../assets/fonts/DejaVuSans.ttf");

const REPLACEMENT: char = '\u{FFFD}';

#[derive(Debug, Clone, PartialEq)]
pub struct GlyphPlacement {
    pub ch: char,
    pub glyph: u16,
    /// Pen position of the glyph origin.
    pub x: f64,
    pub baseline: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextRun {
    pub font_size: f64,
    pub width: f64,
    pub glyphs: Vec<GlyphPlacement>,
    /// Characters the font has no glyph for; drawn as the replacement glyph.
    pub missing: usize,
}

#[derive(Clone)]
pub struct TextRenderer {
    font: FontArc,
}

impl std::fmt::Debug for TextRenderer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TextRenderer").finish_non_exhaustive()
    }
}

impl Default for TextRenderer {
    fn default() -> Self {
        TextRenderer::embedded()
    }
}

impl TextRenderer {
    pub fn embedded() -> TextRenderer {
        TextRenderer { font: FontArc::try_from_slice(EMBEDDED_FONT).expect("embedded font parses") }
    }

    pub fn from_file(path: &Path) -> Result<TextRenderer, String> {
        let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let font = FontArc::try_from_vec(bytes).map_err(|e| format!("{}: {e}", path.display()))?;
        Ok(TextRenderer { font })
    }

    fn resolve(&self, c: char) -> (GlyphId, bool) {
        let id = self.font.glyph_id(c);
        if id.0 != 0 || c.is_control() {
            return (id, false);
        }
        let fallback = self.font.glyph_id(REPLACEMENT);
        let fallback = if fallback.0 == 0 { self.font.glyph_id('?') } else { fallback };
        (fallback, true)
    }

    /// Unscaled advance width of `text` at `font_size`.
    pub fn measure(&self, text: &str, font_size: f64) -> f64 {
        let scaled = self.font.as_scaled(PxScale::from(font_size as f32));
        let mut width = 0.0f64;
        let mut prev: Option<GlyphId> = None;
        for c in text.chars().filter(|c| !c.is_control()) {
            let (id, _) = self.resolve(c);
            if let Some(p) = prev {
                width += scaled.kern(p, id) as f64;
            }
            width += scaled.h_advance(id) as f64;
            prev = Some(id);
        }
        width
    }

    /// Lays `text` out left to right in `bbox`. A line wider than the box is
    /// shrunk once by the exact width ratio; the ascent/descent band is
    /// centered vertically.
    pub fn render_text_line(&self, text: &str, bbox: &Rect, font_size: f64, align: TextAlign) -> TextRun {
        let natural = self.measure(text, font_size);
        let size = if natural > bbox.w && natural > 0.0 { font_size * bbox.w / natural } else { font_size };
        let scaled = self.font.as_scaled(PxScale::from(size as f32));
        let (ascent, descent) = (scaled.ascent() as f64, scaled.descent() as f64);
        let baseline = bbox.y + bbox.h / 2.0 + (ascent + descent) / 2.0;
        let width = self.measure(text, size);
        let mut x = match align {
            TextAlign::Left => bbox.x,
            TextAlign::Center => bbox.x + ((bbox.w - width) / 2.0).max(0.0),
        };
        let mut glyphs = Vec::new();
        let mut missing = 0;
        let mut prev: Option<GlyphId> = None;
        for c in text.chars().filter(|c| !c.is_control()) {
            let (id, was_missing) = self.resolve(c);
            missing += was_missing as usize;
            if let Some(p) = prev {
                x += scaled.kern(p, id) as f64;
            }
            glyphs.push(GlyphPlacement { ch: c, glyph: id.0, x, baseline });
            x += scaled.h_advance(id) as f64;
            prev = Some(id);
        }
        TextRun { font_size: size, width, glyphs, missing }
    }

    /// Rasterizes a run in `color`, clipped to `clip`.
    pub fn draw(&self, canvas: &mut Canvas, run: &TextRun, color: Rgb, opacity: f64, clip: &Rect) {
        let scale = PxScale::from(run.font_size as f32);
        let c = [color.0 as f64 / 255.0, color.1 as f64 / 255.0, color.2 as f64 / 255.0];
        let opacity = opacity.clamp(0.0, 1.0);
        let x_range = clip.x.max(0.0)..clip.right().min(canvas.width as f64);
        let y_range = clip.y.max(0.0)..clip.bottom().min(canvas.height as f64);
        for g in &run.glyphs {
            let glyph = GlyphId(g.glyph).with_scale_and_position(scale, point(g.x as f32, g.baseline as f32));
            let Some(outlined) = self.font.outline_glyph(glyph) else {
                continue;
            };
            let bounds = outlined.px_bounds();
            outlined.draw(|gx, gy, coverage| {
                let px = bounds.min.x as f64 + gx as f64;
                let py = bounds.min.y as f64 + gy as f64;
                let (cx, cy) = (px + 0.5, py + 0.5);
                if !x_range.contains(&cx) || !y_range.contains(&cy) {
                    return;
                }
                let a = coverage.clamp(0.0, 1.0) as f64 * opacity;
                if a > 0.0 {
                    canvas.blend(px as u32, py as u32, [c[0] * a, c[1] * a, c[2] * a, a]);
                }
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_string_has_no_glyphs() {
        let r = TextRenderer::embedded().render_text_line("", &Rect::new(0.0, 0.0, 100.0, 40.0), 20.0, TextAlign::Left);
        assert!(r.glyphs.is_empty());
        assert_eq!(r.font_size, 20.0);
    }

    #[test]
    fn overwide_line_shrinks_by_the_ratio() {
        let tr = TextRenderer::embedded();
        let natural = tr.measure("Weekend offer", 40.0);
        let bbox = Rect::new(0.0, 0.0, natural / 2.0, 60.0);
        let r = tr.render_text_line("Weekend offer", &bbox, 40.0, TextAlign::Left);
        assert!((r.font_size - 20.0).abs() < 1e-9);
        assert!(r.width <= bbox.w * (1.0 + 1e-5));
    }

    #[test]
    fn ample_box_keeps_size_and_centers_the_band() {
        let tr = TextRenderer::embedded();
        let bbox = Rect::new(10.0, 100.0, 500.0, 60.0);
        let r = tr.render_text_line("Sale", &bbox, 24.0, TextAlign::Left);
        assert_eq!(r.font_size, 24.0);
        assert_eq!(r.glyphs[0].x, 10.0);
        let scaled = tr.font.as_scaled(PxScale::from(24.0f32));
        let top = r.glyphs[0].baseline - scaled.ascent() as f64;
        let bottom = r.glyphs[0].baseline - scaled.descent() as f64;
        assert!(((top + bottom) / 2.0 - bbox.center().1).abs() < 1e-6);
        assert!(r.glyphs.windows(2).all(|w| w[1].x > w[0].x));
    }

    #[test]
    fn cjk_is_counted_missing() {
        let r =
            TextRenderer::embedded().render_text_line("大促", &Rect::new(0.0, 0.0, 200.0, 40.0), 20.0, TextAlign::Left);
        assert_eq!(r.glyphs.len(), 2);
        assert_eq!(r.missing, 2);
    }

    #[test]
    fn drawing_stays_inside_the_clip() {
        let tr = TextRenderer::embedded();
        let mut canvas = Canvas::new(120, 60);
        let bbox = Rect::new(10.0, 10.0, 60.0, 30.0);
        let run = tr.render_text_line("HELLO WORLD", &bbox, 40.0, TextAlign::Left);
        tr.draw(&mut canvas, &run, Rgb(0, 0, 0), 1.0, &bbox);
        let img = canvas.to_image();
        let mut inked = 0;
        for (x, y, p) in img.enumerate_pixels() {
            if p.0[3] > 0 {
                inked += 1;
                assert!(bbox.contains_rect(&Rect::new(x as f64, y as f64, 1.0, 1.0), 1e-9));
            }
        }
        assert!(inked > 0);
    }
}
