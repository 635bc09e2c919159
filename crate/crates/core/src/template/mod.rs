//! Template and layer data model.
//!
//! A template is a sized canvas with an ordered stack of typed layers. Layer
//! kinds are not declared explicitly: they follow from the layer name through
//! a fixed naming taxonomy, which keeps designer files and the engine in sync.

pub(crate) mod library;
mod lint;

pub use library::{load_library, LibraryError, LibraryManifest, TemplateLibrary, SCHEMA_VERSION};
pub use lint::{lint_template, Violation};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::{Palette, Rgb};
use crate::geometry::Rect;

pub const WORD_CAPACITY_MIN: u32 = 4;
pub const WORD_CAPACITY_MAX: u32 = 20;
pub const MAX_TEXT_LINES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TextRole {
    Main,
    Sub,
    Action,
}

impl TextRole {
    pub const ALL: [TextRole; 3] = [TextRole::Main, TextRole::Sub, TextRole::Action];

    /// Role of the `i`-th request line.
    pub fn from_line_index(i: usize) -> Option<TextRole> {
        Self::ALL.get(i).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn layer_name(self) -> &'static str {
        match self {
            TextRole::Main => "text-main",
            TextRole::Sub => "text-sub",
            TextRole::Action => "text-action",
        }
    }

    pub fn mask_name(self) -> &'static str {
        match self {
            TextRole::Main => "mc-c",
            TextRole::Sub => "mc-d",
            TextRole::Action => "mc-e",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKind {
    Background,
    /// 1-based product slot index.
    Product(u32),
    TextMain,
    TextSub,
    TextAction,
    OrnamentTrim,
    OrnamentFree,
    MaskMain,
    MaskSub,
    MaskAction,
    Logo,
}

impl LayerKind {
    /// Maps a layer name onto its kind; `None` for names outside the taxonomy.
    pub fn from_name(name: &str) -> Option<LayerKind> {
        fn positive_index(s: &str) -> Option<u32> {
            if s.is_empty() || s.starts_with('0') || !s.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            s.parse().ok()
        }
        Some(match name {
            "background" => LayerKind::Background,
            "text-main" => LayerKind::TextMain,
            "text-sub" => LayerKind::TextSub,
            "text-action" => LayerKind::TextAction,
            "mc-c" => LayerKind::MaskMain,
            "mc-d" => LayerKind::MaskSub,
            "mc-e" => LayerKind::MaskAction,
            "logo" => LayerKind::Logo,
            _ => {
                if let Some(n) = name.strip_prefix("product-") {
                    LayerKind::Product(positive_index(n)?)
                } else if let Some(n) = name.strip_prefix("ornament-a-") {
                    positive_index(n)?;
                    LayerKind::OrnamentTrim
                } else if let Some(n) = name.strip_prefix("ornament-b-") {
                    positive_index(n)?;
                    LayerKind::OrnamentFree
                } else {
                    return None;
                }
            }
        })
    }

    pub fn text_role(self) -> Option<TextRole> {
        match self {
            LayerKind::TextMain => Some(TextRole::Main),
            LayerKind::TextSub => Some(TextRole::Sub),
            LayerKind::TextAction => Some(TextRole::Action),
            _ => None,
        }
    }

    /// Text role a mask backs.
    pub fn mask_role(self) -> Option<TextRole> {
        match self {
            LayerKind::MaskMain => Some(TextRole::Main),
            LayerKind::MaskSub => Some(TextRole::Sub),
            LayerKind::MaskAction => Some(TextRole::Action),
            _ => None,
        }
    }

    pub fn is_text(self) -> bool {
        self.text_role().is_some()
    }

    pub fn is_mask(self) -> bool {
        self.mask_role().is_some()
    }

    pub fn is_product(self) -> bool {
        matches!(self, LayerKind::Product(_))
    }

    pub fn is_ornament(self) -> bool {
        matches!(self, LayerKind::OrnamentTrim | LayerKind::OrnamentFree)
    }

    /// Kinds that can be swapped for a retrieved element asset.
    pub fn is_element(self) -> bool {
        self.is_ornament() || self.is_mask()
    }

    /// Short family label used by element manifests.
    pub fn element_family(self) -> Option<&'static str> {
        Some(match self {
            LayerKind::OrnamentTrim => "ornament-a",
            LayerKind::OrnamentFree => "ornament-b",
            LayerKind::MaskMain => "mc-c",
            LayerKind::MaskSub => "mc-d",
            LayerKind::MaskAction => "mc-e",
            _ => return None,
        })
    }

    pub fn from_element_family(s: &str) -> Option<LayerKind> {
        Some(match s {
            "ornament-a" => LayerKind::OrnamentTrim,
            "ornament-b" => LayerKind::OrnamentFree,
            "mc-c" => LayerKind::MaskMain,
            "mc-d" => LayerKind::MaskSub,
            "mc-e" => LayerKind::MaskAction,
            _ => return None,
        })
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerKind::Product(i) => write!(f, "product-{i}"),
            LayerKind::Background => f.write_str("background"),
            LayerKind::TextMain => f.write_str("text-main"),
            LayerKind::TextSub => f.write_str("text-sub"),
            LayerKind::TextAction => f.write_str("text-action"),
            LayerKind::OrnamentTrim => f.write_str("ornament-a"),
            LayerKind::OrnamentFree => f.write_str("ornament-b"),
            LayerKind::MaskMain => f.write_str("mc-c"),
            LayerKind::MaskSub => f.write_str("mc-d"),
            LayerKind::MaskAction => f.write_str("mc-e"),
            LayerKind::Logo => f.write_str("logo"),
        }
    }
}

/// On-disk layer record. Kinds are inferred from `name`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerDescriptor {
    pub name: String,
    pub bbox: Rect,
    pub z: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<String>,
    #[serde(default = "one")]
    pub opacity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub font_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asset: Option<String>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub asset_hue_shift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_to: Option<String>,
    /// Designer placeholder copy for text layers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

fn one() -> f64 {
    1.0
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivedFields {
    pub text_line_count: usize,
    pub avg_word_capacity: f64,
    pub product_slot_count: usize,
}

/// On-disk template record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateDescriptor {
    pub schema_version: u32,
    pub id: String,
    pub series_id: String,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub style_tags: Vec<String>,
    #[serde(default)]
    pub category_tags: Vec<String>,
    #[serde(default)]
    pub department_ids: Vec<i64>,
    pub layers: Vec<LayerDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived: Option<DerivedFields>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub name: String,
    pub kind: LayerKind,
    pub bbox: Rect,
    pub z: usize,
    pub color: Option<Rgb>,
    pub opacity: f64,
    pub font_size: Option<f64>,
    pub capacity: Option<u32>,
    pub asset_ref: Option<String>,
    /// Hue rotation (degrees) applied to the referenced raster when drawn.
    pub asset_hue_shift: f64,
    pub bound_to: Option<String>,
    pub text: Option<String>,
}

impl Layer {
    pub fn new(name: impl Into<String>, kind: LayerKind, bbox: Rect, z: usize) -> Layer {
        Layer {
            name: name.into(),
            kind,
            bbox,
            z,
            color: None,
            opacity: 1.0,
            font_size: None,
            capacity: None,
            asset_ref: None,
            asset_hue_shift: 0.0,
            bound_to: None,
            text: None,
        }
    }

    /// Width over height of the layer box.
    pub fn aspect(&self) -> f64 {
        self.bbox.w / self.bbox.h
    }

    pub fn to_descriptor(&self) -> LayerDescriptor {
        LayerDescriptor {
            name: self.name.clone(),
            bbox: self.bbox,
            z: self.z as i64,
            color: self.color.map(|c| c.to_hex()),
            opacity: self.opacity,
            font_size: self.font_size,
            capacity: self.capacity,
            asset: self.asset_ref.clone(),
            asset_hue_shift: self.asset_hue_shift,
            bound_to: self.bound_to.clone(),
            text: self.text.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub id: String,
    pub series_id: String,
    pub width: u32,
    pub height: u32,
    pub style_tags: Vec<String>,
    pub category_tags: Vec<String>,
    pub department_ids: Vec<i64>,
    pub layers: Vec<Layer>,
    derived: DerivedFields,
}

#[derive(Debug, Error, PartialEq)]
pub enum TemplateError {
    #[error("hue shift must lie strictly between 0 and 360 degrees, got {0}")]
    HueShiftOutOfRange(f64),
    #[error("template {id} is invalid: {violations:?}")]
    Invalid { id: String, violations: Vec<Violation> },
}

impl Template {
    /// Builds a template from a descriptor, running the full lint.
    pub fn from_descriptor(d: &TemplateDescriptor, palette: &Palette) -> Result<Template, TemplateError> {
        let violations = lint_template(d, palette);
        if !violations.is_empty() {
            return Err(TemplateError::Invalid { id: d.id.clone(), violations });
        }
        let layers = d
            .layers
            .iter()
            .map(|l| Layer {
                name: l.name.clone(),
                kind: LayerKind::from_name(&l.name).expect("lint checked layer names"),
                bbox: l.bbox,
                z: l.z as usize,
                color: l.color.as_deref().map(|c| palette.resolve(c).expect("lint checked colors")),
                opacity: l.opacity,
                font_size: l.font_size,
                capacity: l.capacity,
                asset_ref: l.asset.clone(),
                asset_hue_shift: l.asset_hue_shift,
                bound_to: l.bound_to.clone(),
                text: l.text.clone(),
            })
            .collect();
        Ok(Template::from_parts(
            d.id.clone(),
            d.series_id.clone(),
            d.width,
            d.height,
            d.style_tags.clone(),
            d.category_tags.clone(),
            d.department_ids.clone(),
            layers,
        ))
    }

    /// Assembles a template and computes its derived fields. No validation.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        id: String,
        series_id: String,
        width: u32,
        height: u32,
        style_tags: Vec<String>,
        category_tags: Vec<String>,
        department_ids: Vec<i64>,
        layers: Vec<Layer>,
    ) -> Template {
        let derived = derive_fields(layers.iter().map(|l| (l.kind, l.capacity)));
        Template { id, series_id, width, height, style_tags, category_tags, department_ids, layers, derived }
    }

    pub fn to_descriptor(&self) -> TemplateDescriptor {
        TemplateDescriptor {
            schema_version: SCHEMA_VERSION,
            id: self.id.clone(),
            series_id: self.series_id.clone(),
            width: self.width,
            height: self.height,
            style_tags: self.style_tags.clone(),
            category_tags: self.category_tags.clone(),
            department_ids: self.department_ids.clone(),
            layers: self.layers.iter().map(Layer::to_descriptor).collect(),
            derived: Some(self.derived),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_descriptor()).expect("template serializes")
    }

    pub fn text_line_count(&self) -> usize {
        self.derived.text_line_count
    }

    pub fn avg_word_capacity(&self) -> f64 {
        self.derived.avg_word_capacity
    }

    pub fn product_slot_count(&self) -> usize {
        self.derived.product_slot_count
    }

    pub fn derived(&self) -> DerivedFields {
        self.derived
    }

    /// Recomputes derived fields after the layer list has been edited.
    pub fn refresh_derived(&mut self) {
        self.derived = derive_fields(self.layers.iter().map(|l| (l.kind, l.capacity)));
    }

    pub fn size(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn canvas(&self) -> Rect {
        Rect::canvas(self.width, self.height)
    }

    pub fn layer(&self, name: &str) -> Option<&Layer> {
        self.layers.iter().find(|l| l.name == name)
    }

    pub fn layer_mut(&mut self, name: &str) -> Option<&mut Layer> {
        self.layers.iter_mut().find(|l| l.name == name)
    }

    pub fn text_layers(&self) -> impl Iterator<Item = &Layer> {
        self.layers.iter().filter(|l| l.kind.is_text())
    }

    pub fn product_layers(&self) -> impl Iterator<Item = &Layer> {
        self.layers.iter().filter(|l| l.kind.is_product())
    }

    pub fn text_layer(&self, role: TextRole) -> Option<&Layer> {
        self.layers.iter().find(|l| l.kind.text_role() == Some(role))
    }

    pub fn background(&self) -> Option<&Layer> {
        self.layers.iter().find(|l| l.kind == LayerKind::Background)
    }

    /// Background color, else the declared color of the lowest colored layer.
    pub fn primary_color(&self) -> Option<Rgb> {
        if let Some(c) = self.background().and_then(|b| b.color) {
            return Some(c);
        }
        self.layers_by_z().into_iter().find_map(|l| l.color)
    }

    /// Colors that stand for the template's "product color": product slot
    /// colors when declared, else the background color.
    pub fn product_colors(&self) -> Vec<Rgb> {
        let slots: Vec<Rgb> = self.product_layers().filter_map(|l| l.color).collect();
        if !slots.is_empty() {
            return slots;
        }
        self.background().and_then(|b| b.color).into_iter().collect()
    }

    pub fn layers_by_z(&self) -> Vec<&Layer> {
        let mut v: Vec<&Layer> = self.layers.iter().collect();
        v.sort_by_key(|l| l.z);
        v
    }

    /// Union of all text-layer boxes.
    pub fn text_area(&self) -> Option<Rect> {
        self.text_layers().map(|l| l.bbox).reduce(|a, b| a.union(&b))
    }

    /// Union of all product-slot boxes.
    pub fn product_area(&self) -> Option<Rect> {
        self.product_layers().map(|l| l.bbox).reduce(|a, b| a.union(&b))
    }

    /// Reassigns z to 0..n following the current stacking order.
    pub fn normalize_z(&mut self) {
        let mut order: Vec<usize> = (0..self.layers.len()).collect();
        order.sort_by_key(|&i| (self.layers[i].z, i));
        for (z, i) in order.into_iter().enumerate() {
            self.layers[i].z = z;
        }
    }

    /// Color migration: a new template whose layer colors and referenced
    /// assets are hue-rotated. Geometry is untouched.
    pub fn expand_by_color(&self, hue_shift: f64) -> Result<Template, TemplateError> {
        if !(hue_shift > 0.0 && hue_shift < 360.0) {
            return Err(TemplateError::HueShiftOutOfRange(hue_shift));
        }
        let mut out = self.clone();
        out.id = format!("{}-h{}", self.id, hue_shift);
        for layer in &mut out.layers {
            layer.color = layer.color.map(|c| c.hue_rotate(hue_shift));
            if layer.asset_ref.is_some() {
                layer.asset_hue_shift = (layer.asset_hue_shift + hue_shift).rem_euclid(360.0);
            }
        }
        Ok(out)
    }
}

pub(crate) fn derive_fields(layers: impl Iterator<Item = (LayerKind, Option<u32>)>) -> DerivedFields {
    let mut lines = 0usize;
    let mut capacity_sum = 0.0;
    let mut slots = 0usize;
    for (kind, capacity) in layers {
        if kind.is_text() {
            lines += 1;
            capacity_sum += capacity.unwrap_or(0) as f64;
        } else if kind.is_product() {
            slots += 1;
        }
    }
    DerivedFields {
        text_line_count: lines,
        avg_word_capacity: if lines == 0 { 0.0 } else { capacity_sum / lines as f64 },
        product_slot_count: slots,
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    pub fn layer(name: &str, bbox: [f64; 4], z: i64) -> LayerDescriptor {
        LayerDescriptor {
            name: name.to_string(),
            bbox: Rect::new(bbox[0], bbox[1], bbox[2], bbox[3]),
            z,
            color: None,
            opacity: 1.0,
            font_size: None,
            capacity: None,
            asset: None,
            asset_hue_shift: 0.0,
            bound_to: None,
            text: None,
        }
    }

    /// An 800×800 template touching every layer kind.
    pub fn sample_descriptor() -> TemplateDescriptor {
        let mut bg = layer("background", [0.0, 0.0, 800.0, 800.0], 0);
        bg.color = Some("#ff0000".into());
        let mut product = layer("product-1", [400.0, 200.0, 300.0, 400.0], 1);
        product.color = Some("red".into());
        let mut main = layer("text-main", [60.0, 120.0, 300.0, 80.0], 2);
        main.font_size = Some(48.0);
        main.capacity = Some(8);
        main.color = Some("white".into());
        main.text = Some("Summer sale".into());
        let mut sub = layer("text-sub", [60.0, 220.0, 300.0, 50.0], 3);
        sub.font_size = Some(28.0);
        sub.capacity = Some(12);
        sub.color = Some("white".into());
        let mut mask = layer("mc-c", [50.0, 110.0, 320.0, 100.0], 4);
        mask.bound_to = Some("text-main".into());
        mask.color = Some("wine".into());
        mask.opacity = 0.8;
        let trim = layer("ornament-a-1", [0.0, 0.0, 120.0, 120.0], 5);
        let mut free = layer("ornament-b-1", [360.0, 100.0, 40.0, 40.0], 6);
        free.bound_to = Some("text-main".into());
        let logo = layer("logo", [680.0, 20.0, 100.0, 40.0], 7);
        TemplateDescriptor {
            schema_version: SCHEMA_VERSION,
            id: "sample".into(),
            series_id: "S1".into(),
            width: 800,
            height: 800,
            style_tags: vec!["festive".into()],
            category_tags: vec!["apparel".into()],
            department_ids: vec![1],
            layers: vec![bg, product, main, sub, mask, trim, free, logo],
            derived: None,
        }
    }

    pub fn sample_template() -> Template {
        Template::from_descriptor(&sample_descriptor(), &Palette::default()).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    #[test]
    fn kinds_follow_the_naming_taxonomy() {
        assert_eq!(LayerKind::from_name("product-3"), Some(LayerKind::Product(3)));
        assert_eq!(LayerKind::from_name("ornament-a-1"), Some(LayerKind::OrnamentTrim));
        assert_eq!(LayerKind::from_name("ornament-b-12"), Some(LayerKind::OrnamentFree));
        assert_eq!(LayerKind::from_name("mc-d"), Some(LayerKind::MaskSub));
        assert_eq!(LayerKind::from_name("product-0"), None);
        assert_eq!(LayerKind::from_name("product-01"), None);
        assert_eq!(LayerKind::from_name("ornament-c-1"), None);
        assert_eq!(LayerKind::from_name("sticker-1"), None);
    }

    #[test]
    fn derived_fields_match_layers() {
        let t = sample_template();
        assert_eq!(t.text_line_count(), 2);
        assert_eq!(t.avg_word_capacity(), 10.0);
        assert_eq!(t.product_slot_count(), 1);
    }

    #[test]
    fn descriptor_round_trip_keeps_template() {
        let t = sample_template();
        let back = Template::from_descriptor(&t.to_descriptor(), &Palette::default()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn zero_hue_shift_is_rejected() {
        let t = sample_template();
        assert_eq!(t.expand_by_color(0.0), Err(TemplateError::HueShiftOutOfRange(0.0)));
        assert!(t.expand_by_color(360.0).is_err());
        assert!(t.expand_by_color(359.999).is_ok());
    }

    #[test]
    fn red_background_shifted_120_becomes_green() {
        let t = sample_template().expand_by_color(120.0).unwrap();
        assert_eq!(t.background().unwrap().color, Some(Rgb(0, 255, 0)));
        assert_eq!(t.id, "sample-h120");
        assert_eq!(t.series_id, "S1");
    }

    #[test]
    fn three_thirds_of_a_turn_round_trip_within_one() {
        let t = sample_template();
        let back = t
            .expand_by_color(120.0)
            .and_then(|x| x.expand_by_color(120.0))
            .and_then(|x| x.expand_by_color(120.0))
            .unwrap();
        for (a, b) in t.layers.iter().zip(&back.layers) {
            if let (Some(x), Some(y)) = (a.color, b.color) {
                for (p, q) in [(x.0, y.0), (x.1, y.1), (x.2, y.2)] {
                    assert!((p as i32 - q as i32).abs() <= 1, "{x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn color_expansion_keeps_geometry() {
        let t = sample_template();
        let e = t.expand_by_color(77.5).unwrap();
        for (a, b) in t.layers.iter().zip(&e.layers) {
            assert_eq!((a.bbox, a.z, a.kind, a.capacity), (b.bbox, b.z, b.kind, b.capacity));
        }
    }

    #[test]
    fn primary_color_prefers_background() {
        let t = sample_template();
        assert_eq!(t.primary_color(), Some(Rgb(255, 0, 0)));
        assert_eq!(t.product_colors(), vec![Rgb(255, 0, 0)]);
    }
}
