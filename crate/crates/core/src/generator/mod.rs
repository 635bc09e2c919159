//! Rasterizes a placed banner: z-ordered source-over compositing of every
//! layer, text included.

mod raster;
mod text;

use std::collections::HashMap;
use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use image::{ImageFormat, Rgba, RgbaImage};
use thiserror::Error;

pub use raster::{over, premultiply, sample_bilinear, unpremultiply, Canvas, Premul};
pub use text::{GlyphPlacement, TextRenderer, TextRun};

use crate::actuator::fit_rotated;
use crate::banner::{CandidateBanner, PlacedLayer};
use crate::color::Rgb;
use crate::template::LayerKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("missing asset {0}")]
    MissingAsset(String),
    #[error("cannot decode asset {path}: {message}")]
    BadAsset { path: String, message: String },
    #[error("layer {layer} references product {index}, but only {count} were supplied")]
    MissingProduct { layer: String, index: usize, count: usize },
}

/// Decoded rasters keyed by path and hue shift; shared across renders.
#[derive(Debug, Default)]
pub struct AssetCache {
    images: Mutex<HashMap<(PathBuf, u64), Arc<RgbaImage>>>,
}

impl AssetCache {
    pub fn new() -> AssetCache {
        AssetCache::default()
    }

    pub fn get(&self, path: &Path, hue_shift: f64) -> Result<Arc<RgbaImage>, GenerateError> {
        let key = (path.to_path_buf(), hue_shift.to_bits());
        if let Some(img) = self.images.lock().expect("cache lock").get(&key) {
            return Ok(img.clone());
        }
        if !path.is_file() {
            return Err(GenerateError::MissingAsset(path.display().to_string()));
        }
        let mut img = image::open(path)
            .map_err(|e| GenerateError::BadAsset { path: path.display().to_string(), message: e.to_string() })?
            .into_rgba8();
        if hue_shift.rem_euclid(360.0) != 0.0 {
            for px in img.pixels_mut() {
                let c = Rgb(px[0], px[1], px[2]).hue_rotate(hue_shift);
                *px = Rgba([c.0, c.1, c.2, px[3]]);
            }
        }
        let img = Arc::new(img);
        self.images.lock().expect("cache lock").insert(key, img.clone());
        Ok(img)
    }
}

#[derive(Debug, Clone)]
pub struct Rendered {
    pub image: RgbaImage,
    pub missing_glyphs: usize,
}

pub const DEFAULT_TEXT_COLOR: Rgb = Rgb(0, 0, 0);

fn draw_layer(
    canvas: &mut Canvas,
    layer: &PlacedLayer,
    banner: &CandidateBanner,
    assets: &AssetCache,
    text: &TextRenderer,
) -> Result<usize, GenerateError> {
    let r = &layer.bbox;
    match layer.kind {
        LayerKind::Product(_) => {
            if let Some(i) = layer.product {
                let img = banner.products.get(i).ok_or_else(|| GenerateError::MissingProduct {
                    layer: layer.name.clone(),
                    index: i,
                    count: banner.products.len(),
                })?;
                let aspect = img.width() as f64 / img.height() as f64;
                let fitted = fit_rotated(r, aspect, layer.rotation);
                canvas.draw_image(img, &fitted, layer.rotation, layer.opacity, None);
            }
        }
        k if k.is_text() => {
            if let Some(s) = &layer.text {
                let size = layer.font_size.unwrap_or(r.h * 0.7);
                let run = text.render_text_line(s, r, size, layer.align);
                text.draw(canvas, &run, layer.color.unwrap_or(DEFAULT_TEXT_COLOR), layer.opacity, r);
                return Ok(run.missing);
            }
        }
        k => {
            if let Some(path) = &layer.asset {
                let img = assets.get(path, layer.asset_hue_shift)?;
                let tint = if k.is_element() { layer.color } else { None };
                canvas.draw_image(&img, r, 0.0, layer.opacity, tint);
            } else if let Some(c) = layer.color {
                canvas.fill_rect(r, c, layer.opacity);
            }
        }
    }
    Ok(0)
}

/// Draws the layers of `banner` bottom to top.
pub fn composite(
    banner: &CandidateBanner,
    assets: &AssetCache,
    text: &TextRenderer,
) -> Result<Rendered, GenerateError> {
    let mut canvas = Canvas::new(banner.width, banner.height);
    let mut missing = 0;
    for i in banner.z_order() {
        missing += draw_layer(&mut canvas, &banner.layers[i], banner, assets, text)?;
    }
    Ok(Rendered { image: canvas.to_image(), missing_glyphs: missing })
}

/// The background layer alone, as seen behind text.
pub fn render_backdrop(banner: &CandidateBanner, assets: &AssetCache) -> Result<Canvas, GenerateError> {
    let mut canvas = Canvas::new(banner.width, banner.height);
    let text = TextRenderer::embedded();
    for i in banner.z_order() {
        let l = &banner.layers[i];
        if l.kind == LayerKind::Background {
            draw_layer(&mut canvas, l, banner, assets, &text)?;
        }
    }
    Ok(canvas)
}

pub fn encode_png(img: &RgbaImage) -> Vec<u8> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png).expect("in-memory png encode");
    out.into_inner()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banner::PlacedLayer;
    use crate::geometry::Rect;

    fn banner(layers: Vec<PlacedLayer>) -> CandidateBanner {
        let mut b = CandidateBanner::new("t", 8, 6);
        b.layers = layers;
        b
    }

    fn fill(name: &str, rect: Rect, z: usize, color: Rgb, opacity: f64) -> PlacedLayer {
        let mut l = PlacedLayer::new(name, LayerKind::from_name(name).unwrap(), rect, z);
        l.color = Some(color);
        l.opacity = opacity;
        l
    }

    #[test]
    fn opaque_red_background() {
        let b = banner(vec![fill("background", Rect::new(0.0, 0.0, 8.0, 6.0), 0, Rgb(255, 0, 0), 1.0)]);
        let out = composite(&b, &AssetCache::new(), &TextRenderer::embedded()).unwrap();
        assert_eq!((out.image.width(), out.image.height()), (8, 6));
        assert!(out.image.pixels().all(|p| p.0 == [255, 0, 0, 255]));
    }

    #[test]
    fn zero_layers_is_transparent() {
        let out = composite(&banner(vec![]), &AssetCache::new(), &TextRenderer::embedded()).unwrap();
        assert!(out.image.pixels().all(|p| p.0 == [0, 0, 0, 0]));
    }

    #[test]
    fn translucent_mask_over_red() {
        let b = banner(vec![
            fill("background", Rect::new(0.0, 0.0, 8.0, 6.0), 0, Rgb(255, 0, 0), 1.0),
            fill("mc-c", Rect::new(0.0, 0.0, 8.0, 6.0), 1, Rgb(0, 0, 255), 128.0 / 255.0),
        ]);
        let out = composite(&b, &AssetCache::new(), &TextRenderer::embedded()).unwrap();
        assert!(out.image.pixels().all(|p| p.0 == [127, 0, 128, 255]));
    }

    #[test]
    fn z_order_not_vector_order() {
        let b = banner(vec![
            fill("mc-c", Rect::new(0.0, 0.0, 8.0, 6.0), 1, Rgb(0, 0, 255), 1.0),
            fill("background", Rect::new(0.0, 0.0, 8.0, 6.0), 0, Rgb(255, 0, 0), 1.0),
        ]);
        let out = composite(&b, &AssetCache::new(), &TextRenderer::embedded()).unwrap();
        assert_eq!(out.image.get_pixel(0, 0).0, [0, 0, 255, 255]);
    }

    #[test]
    fn missing_asset_is_reported() {
        let mut l = PlacedLayer::new("logo", LayerKind::Logo, Rect::new(0.0, 0.0, 2.0, 2.0), 0);
        l.asset = Some(PathBuf::from("/nonexistent/logo.png"));
        let err = composite(&banner(vec![l]), &AssetCache::new(), &TextRenderer::embedded()).unwrap_err();
        assert!(matches!(err, GenerateError::MissingAsset(_)));
    }

    #[test]
    fn png_is_deterministic() {
        let b = banner(vec![fill("background", Rect::new(0.0, 0.0, 8.0, 6.0), 0, Rgb(1, 2, 3), 1.0)]);
        let a = composite(&b, &AssetCache::new(), &TextRenderer::embedded()).unwrap();
        let c = composite(&b, &AssetCache::new(), &TextRenderer::embedded()).unwrap();
        assert_eq!(encode_png(&a.image), encode_png(&c.image));
    }
}
