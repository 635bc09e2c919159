use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::{derive_fields, LayerKind, TemplateDescriptor, MAX_TEXT_LINES, WORD_CAPACITY_MAX, WORD_CAPACITY_MIN};
use crate::color::Palette;
use crate::geometry::Rect;

/// One broken design constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    UnsupportedSchemaVersion(u32),
    EmptyCanvas,
    UnknownLayerKind(String),
    DuplicateLayerName(String),
    DuplicateTextRole(String),
    BboxOutsideCanvas(String),
    NonPositiveSize(String),
    OpacityOutOfRange { layer: String, opacity: f64 },
    TextLineCount(usize),
    MissingCapacity(String),
    CapacityOutOfRange(u32),
    MissingFontSize(String),
    MaskWithoutBinding(String),
    DanglingBoundTo { layer: String, target: String },
    MaskBindingMismatch { layer: String, target: String },
    BadColor { layer: String, value: String },
    ZNotPermutation,
    MissingStyleTags,
    MissingCategoryTags,
    StaleDerived,
    DuplicateId(String),
    MissingAsset { layer: String, path: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            UnsupportedSchemaVersion(v) => write!(f, "unsupported schema version {v}"),
            EmptyCanvas => f.write_str("canvas width and height must be positive"),
            UnknownLayerKind(n) => write!(f, "layer {n:?}: name outside the layer taxonomy"),
            DuplicateLayerName(n) => write!(f, "layer {n:?}: duplicate layer name"),
            DuplicateTextRole(n) => write!(f, "layer {n:?}: text role already taken"),
            BboxOutsideCanvas(n) => write!(f, "layer {n:?}: bbox outside the canvas"),
            NonPositiveSize(n) => write!(f, "layer {n:?}: width and height must be positive"),
            OpacityOutOfRange { layer, opacity } => {
                write!(f, "layer {layer:?}: opacity {opacity} outside [0, 1]")
            }
            TextLineCount(n) => write!(f, "text line count {n} outside [1, 3]"),
            MissingCapacity(n) => write!(f, "layer {n:?}: text layer without capacity"),
            CapacityOutOfRange(c) => write!(f, "word capacity {c} outside [{WORD_CAPACITY_MIN}, {WORD_CAPACITY_MAX}]"),
            MissingFontSize(n) => write!(f, "layer {n:?}: text layer without a positive font size"),
            MaskWithoutBinding(n) => write!(f, "layer {n:?}: mask has no bound_to"),
            DanglingBoundTo { layer, target } => {
                write!(f, "layer {layer:?}: bound_to {target:?} names no eligible layer")
            }
            MaskBindingMismatch { layer, target } => {
                write!(f, "layer {layer:?}: mask bound to {target:?} of the wrong text role")
            }
            BadColor { layer, value } => write!(f, "layer {layer:?}: bad color {value:?}"),
            ZNotPermutation => f.write_str("z indices are not a permutation of 0..n"),
            MissingStyleTags => f.write_str("missing style tags"),
            MissingCategoryTags => f.write_str("missing category tags"),
            StaleDerived => f.write_str("stored derived fields disagree with the layers"),
            DuplicateId(id) => write!(f, "duplicate id {id:?}"),
            MissingAsset { layer, path } => write!(f, "layer {layer:?}: asset {path:?} not found"),
        }
    }
}

/// Checks a parsed descriptor against the design constraints and returns
/// every violation found. An empty list means the template is valid.
pub fn lint_template(t: &TemplateDescriptor, palette: &Palette) -> Vec<Violation> {
    let mut out = Vec::new();
    if t.schema_version != super::SCHEMA_VERSION {
        out.push(Violation::UnsupportedSchemaVersion(t.schema_version));
    }
    if t.width == 0 || t.height == 0 {
        out.push(Violation::EmptyCanvas);
    }
    if t.style_tags.iter().all(|s| s.trim().is_empty()) {
        out.push(Violation::MissingStyleTags);
    }
    if t.category_tags.iter().all(|s| s.trim().is_empty()) {
        out.push(Violation::MissingCategoryTags);
    }

    let canvas = Rect::canvas(t.width, t.height);
    let mut names = HashSet::new();
    let mut roles = HashSet::new();
    for l in &t.layers {
        if !names.insert(l.name.as_str()) {
            out.push(Violation::DuplicateLayerName(l.name.clone()));
        }
        let Some(kind) = LayerKind::from_name(&l.name) else {
            out.push(Violation::UnknownLayerKind(l.name.clone()));
            continue;
        };
        if !(l.bbox.w > 0.0 && l.bbox.h > 0.0) {
            out.push(Violation::NonPositiveSize(l.name.clone()));
        } else if !canvas.contains_rect(&l.bbox, 0.0) {
            out.push(Violation::BboxOutsideCanvas(l.name.clone()));
        }
        if !(0.0..=1.0).contains(&l.opacity) {
            out.push(Violation::OpacityOutOfRange { layer: l.name.clone(), opacity: l.opacity });
        }
        if let Some(c) = &l.color {
            if palette.resolve(c).is_err() {
                out.push(Violation::BadColor { layer: l.name.clone(), value: c.clone() });
            }
        }
        if let Some(role) = kind.text_role() {
            if !roles.insert(role) {
                out.push(Violation::DuplicateTextRole(l.name.clone()));
            }
            match l.capacity {
                None => out.push(Violation::MissingCapacity(l.name.clone())),
                Some(c) if !(WORD_CAPACITY_MIN..=WORD_CAPACITY_MAX).contains(&c) => {
                    out.push(Violation::CapacityOutOfRange(c))
                }
                Some(_) => {}
            }
            if !l.font_size.is_some_and(|s| s > 0.0) {
                out.push(Violation::MissingFontSize(l.name.clone()));
            }
        }
        check_binding(t, &l.name, kind, l.bound_to.as_deref(), &mut out);
    }

    let derived = derive_fields(t.layers.iter().filter_map(|l| LayerKind::from_name(&l.name).map(|k| (k, l.capacity))));
    if !(1..=MAX_TEXT_LINES).contains(&derived.text_line_count) {
        out.push(Violation::TextLineCount(derived.text_line_count));
    }
    if let Some(stored) = t.derived {
        if stored != derived {
            out.push(Violation::StaleDerived);
        }
    }

    let mut zs: Vec<i64> = t.layers.iter().map(|l| l.z).collect();
    zs.sort_unstable();
    if zs.iter().enumerate().any(|(i, &z)| z != i as i64) {
        out.push(Violation::ZNotPermutation);
    }
    out
}

fn check_binding(
    t: &TemplateDescriptor,
    name: &str,
    kind: LayerKind,
    bound_to: Option<&str>,
    out: &mut Vec<Violation>,
) {
    let target_kind = |target: &str| {
        t.layers.iter().find(|o| o.name == target && o.name != name).and_then(|o| LayerKind::from_name(&o.name))
    };
    if let Some(role) = kind.mask_role() {
        let Some(target) = bound_to.filter(|s| !s.is_empty()) else {
            out.push(Violation::MaskWithoutBinding(name.to_string()));
            return;
        };
        match target_kind(target) {
            Some(k) if k.text_role() == Some(role) => {}
            Some(k) if k.is_text() => {
                out.push(Violation::MaskBindingMismatch { layer: name.to_string(), target: target.to_string() })
            }
            _ => out.push(Violation::DanglingBoundTo { layer: name.to_string(), target: target.to_string() }),
        }
    } else if let Some(target) = bound_to {
        let ok = kind == LayerKind::OrnamentFree && target_kind(target).is_some_and(|k| k.is_text() || k.is_product());
        if !ok {
            out.push(Violation::DanglingBoundTo { layer: name.to_string(), target: target.to_string() });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;

    fn lint(d: &TemplateDescriptor) -> Vec<Violation> {
        lint_template(d, &Palette::default())
    }

    #[test]
    fn valid_template_has_no_violations() {
        assert_eq!(lint(&sample_descriptor()), vec![]);
    }

    #[test]
    fn unknown_layer_name_is_reported_alone() {
        let mut d = sample_descriptor();
        d.layers[5].name = "sticker-1".into();
        assert_eq!(lint(&d), vec![Violation::UnknownLayerKind("sticker-1".into())]);
    }

    #[test]
    fn capacity_above_twenty_is_out_of_range() {
        let mut d = sample_descriptor();
        d.layers[2].capacity = Some(25);
        assert_eq!(lint(&d), vec![Violation::CapacityOutOfRange(25)]);
        d.layers[2].capacity = Some(3);
        assert_eq!(lint(&d), vec![Violation::CapacityOutOfRange(3)]);
    }

    #[test]
    fn mask_without_binding() {
        let mut d = sample_descriptor();
        d.layers[4].bound_to = None;
        assert_eq!(lint(&d), vec![Violation::MaskWithoutBinding("mc-c".into())]);
    }

    #[test]
    fn mask_bound_to_the_wrong_role() {
        let mut d = sample_descriptor();
        d.layers[4].bound_to = Some("text-sub".into());
        assert_eq!(lint(&d), vec![Violation::MaskBindingMismatch { layer: "mc-c".into(), target: "text-sub".into() }]);
        d.layers[4].bound_to = Some("ghost".into());
        assert!(matches!(lint(&d)[0], Violation::DanglingBoundTo { .. }));
    }

    #[test]
    fn every_violation_is_listed() {
        let mut d = sample_descriptor();
        d.style_tags.clear();
        d.category_tags.clear();
        d.layers[1].bbox = Rect::new(700.0, 700.0, 200.0, 200.0);
        d.layers[3].opacity = 1.5;
        d.layers[7].z = 9;
        let v = lint(&d);
        assert!(v.contains(&Violation::MissingStyleTags));
        assert!(v.contains(&Violation::MissingCategoryTags));
        assert!(v.contains(&Violation::BboxOutsideCanvas("product-1".into())));
        assert!(v.contains(&Violation::ZNotPermutation));
        assert!(v.iter().any(|x| matches!(x, Violation::OpacityOutOfRange { .. })));
        assert_eq!(v.len(), 5);
    }

    #[test]
    fn text_line_count_bounds() {
        let mut d = sample_descriptor();
        d.layers.retain(|l| !l.name.starts_with("text-") && l.name != "mc-c" && l.name != "ornament-b-1");
        for (z, l) in d.layers.iter_mut().enumerate() {
            l.z = z as i64;
        }
        assert_eq!(lint(&d), vec![Violation::TextLineCount(0)]);
    }

    #[test]
    fn stale_derived_fields_are_flagged() {
        let mut d = sample_descriptor();
        d.derived =
            Some(super::super::DerivedFields { text_line_count: 3, avg_word_capacity: 10.0, product_slot_count: 1 });
        assert_eq!(lint(&d), vec![Violation::StaleDerived]);
    }

    #[test]
    fn duplicate_text_roles() {
        let mut d = sample_descriptor();
        d.layers[3].name = "text-main".into();
        let v = lint(&d);
        assert!(v.contains(&Violation::DuplicateLayerName("text-main".into())));
        assert!(v.contains(&Violation::DuplicateTextRole("text-main".into())));
    }
}
