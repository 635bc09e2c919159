//! A template instantiated against a request: concrete placements plus the
//! scores that selected it.

use std::path::PathBuf;
use std::sync::Arc;

use image::RgbaImage;
use serde::Serialize;

use crate::actuator::{ProductLayout, TypesettingForm};
use crate::color::Rgb;
use crate::geometry::Rect;
use crate::template::LayerKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TextAlign {
    #[default]
    Left,
    Center,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedLayer {
    pub name: String,
    pub kind: LayerKind,
    pub bbox: Rect,
    pub z: usize,
    pub color: Option<Rgb>,
    pub opacity: f64,
    pub font_size: Option<f64>,
    /// Resolved raster path.
    pub asset: Option<PathBuf>,
    pub asset_hue_shift: f64,
    /// Degrees, clockwise; products only.
    pub rotation: f64,
    pub bound_to: Option<String>,
    pub text: Option<String>,
    pub align: TextAlign,
    /// Index into the banner's product rasters.
    pub product: Option<usize>,
}

impl PlacedLayer {
    pub fn new(name: impl Into<String>, kind: LayerKind, bbox: Rect, z: usize) -> PlacedLayer {
        PlacedLayer {
            name: name.into(),
            kind,
            bbox,
            z,
            color: None,
            opacity: 1.0,
            font_size: None,
            asset: None,
            asset_hue_shift: 0.0,
            rotation: 0.0,
            bound_to: None,
            text: None,
            align: TextAlign::Left,
            product: None,
        }
    }

    /// Background and logo never move or scale.
    pub fn is_pinned(&self) -> bool {
        matches!(self.kind, LayerKind::Background | LayerKind::Logo)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScoreBreakdown {
    pub recall: f64,
    pub text: f64,
    pub goods: f64,
    pub color: f64,
    pub rank: Option<f64>,
    pub adjuster_initial: Option<f64>,
    pub adjuster_final: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CandidateBanner {
    pub template_id: String,
    pub width: u32,
    pub height: u32,
    pub style_tags: Vec<String>,
    pub primary_color: Option<Rgb>,
    pub layers: Vec<PlacedLayer>,
    pub form: Option<TypesettingForm>,
    pub product_layout: Option<ProductLayout>,
    pub scores: ScoreBreakdown,
    pub products: Vec<Arc<RgbaImage>>,
}

impl CandidateBanner {
    pub fn new(template_id: impl Into<String>, width: u32, height: u32) -> CandidateBanner {
        CandidateBanner {
            template_id: template_id.into(),
            width,
            height,
            style_tags: Vec::new(),
            primary_color: None,
            layers: Vec::new(),
            form: None,
            product_layout: None,
            scores: ScoreBreakdown::default(),
            products: Vec::new(),
        }
    }

    pub fn canvas(&self) -> Rect {
        Rect::canvas(self.width, self.height)
    }

    pub fn layer(&self, name: &str) -> Option<&PlacedLayer> {
        self.layers.iter().find(|l| l.name == name)
    }

    pub fn layer_index(&self, name: &str) -> Option<usize> {
        self.layers.iter().position(|l| l.name == name)
    }

    /// Layer indices bottom to top.
    pub fn z_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.layers.len()).collect();
        order.sort_by_key(|&i| (self.layers[i].z, i));
        order
    }

    /// Reassigns z to 0..n following the current stacking order.
    pub fn normalize_z(&mut self) {
        for (z, i) in self.z_order().into_iter().enumerate() {
            self.layers[i].z = z;
        }
    }

    /// Moves layer `index` to stack position `new_z`, shifting the others.
    pub fn reorder(&mut self, index: usize, new_z: usize) {
        let mut order = self.z_order();
        let pos = order.iter().position(|&i| i == index).expect("layer in stack");
        order.remove(pos);
        order.insert(new_z.min(order.len()), index);
        for (z, i) in order.into_iter().enumerate() {
            self.layers[i].z = z;
        }
    }

    pub fn equal_placements(&self, other: &CandidateBanner) -> bool {
        self.layers == other.layers
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reorder_keeps_a_permutation() {
        let mut b = CandidateBanner::new("t", 100, 100);
        for (i, name) in ["background", "product-1", "text-main", "logo"].iter().enumerate() {
            let kind = LayerKind::from_name(name).unwrap();
            b.layers.push(PlacedLayer::new(*name, kind, Rect::new(0.0, 0.0, 10.0, 10.0), i));
        }
        b.reorder(1, 3);
        let z: Vec<usize> = b.layers.iter().map(|l| l.z).collect();
        assert_eq!(z, vec![0, 3, 1, 2]);
        b.reorder(3, 0);
        let mut sorted: Vec<usize> = b.layers.iter().map(|l| l.z).collect();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
        assert_eq!(b.layers[3].z, 0);
    }
}
