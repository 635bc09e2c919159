//! Decoration and mask assets, and their retrieval for a placed banner.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::banner::CandidateBanner;
use crate::color::{Palette, Rgb};
use crate::template::library::read_json;
use crate::template::{LayerKind, LibraryError};

pub const ELEMENT_MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementRecord {
    pub id: String,
    /// Layer family: ornament-a, ornament-b, mc-c, mc-d or mc-e.
    pub family: String,
    #[serde(default)]
    pub style_tags: Vec<String>,
    /// Palette color name.
    pub color: String,
    pub path: String,
    pub size: [u32; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementManifest {
    pub schema_version: u32,
    pub assets: Vec<ElementRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementAsset {
    pub id: String,
    pub kind: LayerKind,
    pub style_tags: Vec<String>,
    pub palette_color: String,
    pub path: PathBuf,
    pub size: (u32, u32),
}

#[derive(Debug, Clone, Default)]
pub struct ElementLibrary {
    pub root: PathBuf,
    /// Sorted by id.
    pub assets: Vec<ElementAsset>,
}

impl ElementLibrary {
    pub fn load(root: impl AsRef<Path>, palette: &Palette) -> Result<ElementLibrary, LibraryError> {
        let root = root.as_ref().to_path_buf();
        let manifest: ElementManifest = read_json(&root.join(ELEMENT_MANIFEST))?;
        if manifest.schema_version != 1 {
            return Err(LibraryError::SchemaVersion(manifest.schema_version));
        }
        let mut problems = Vec::new();
        let mut seen = BTreeSet::new();
        let mut assets = Vec::new();
        for r in manifest.assets {
            let kind = LayerKind::from_element_family(&r.family);
            if kind.is_none() {
                problems.push(format!("{}: unknown family {:?}", r.id, r.family));
            }
            if palette.index_of(&r.color).is_none() {
                problems.push(format!("{}: unknown palette color {:?}", r.id, r.color));
            }
            if !seen.insert(r.id.clone()) {
                problems.push(format!("{}: duplicate id", r.id));
            }
            let path = root.join(&r.path);
            if !path.is_file() {
                problems.push(format!("{}: missing raster {}", r.id, r.path));
            }
            if let Some(kind) = kind {
                assets.push(ElementAsset {
                    id: r.id,
                    kind,
                    style_tags: r.style_tags,
                    palette_color: r.color,
                    path,
                    size: (r.size[0], r.size[1]),
                });
            }
        }
        if !problems.is_empty() {
            return Err(LibraryError::Elements(problems));
        }
        assets.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(ElementLibrary { root, assets })
    }

    pub fn get(&self, id: &str) -> Option<&ElementAsset> {
        self.assets.iter().find(|a| a.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Substitution {
    pub layer: String,
    /// `None` when no asset of the layer's kind exists.
    pub asset_id: Option<String>,
    pub score: f64,
}

/// |A ∩ B| / |A ∪ B|; two empty sets count as identical.
pub fn jaccard(a: &[String], b: &[String]) -> f64 {
    let a: BTreeSet<&str> = a.iter().map(String::as_str).collect();
    let b: BTreeSet<&str> = b.iter().map(String::as_str).collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// Tag overlap times color closeness to the banner's primary color.
pub fn element_score(asset: &ElementAsset, style_tags: &[String], primary: Option<Rgb>, palette: &Palette) -> f64 {
    let color = match (primary, palette.index_of(&asset.palette_color)) {
        (Some(p), Some(i)) => {
            let d = palette.anchor_lab(i).distance(&p.to_lab());
            (1.0 - d / palette.max_distance()).clamp(0.0, 1.0)
        }
        _ => 1.0,
    };
    jaccard(&asset.style_tags, style_tags) * color
}

/// Best asset per ornament or mask layer, ties by ascending id.
pub fn retrieve_elements(banner: &CandidateBanner, library: &ElementLibrary, palette: &Palette) -> Vec<Substitution> {
    let mut order = banner.z_order();
    order.retain(|&i| banner.layers[i].kind.is_element());
    order
        .into_iter()
        .map(|i| {
            let layer = &banner.layers[i];
            let best = library
                .assets
                .iter()
                .filter(|a| a.kind == layer.kind)
                .map(|a| (a, element_score(a, &banner.style_tags, banner.primary_color, palette)))
                .fold(None::<(&ElementAsset, f64)>, |best, (a, s)| match best {
                    Some((_, bs)) if bs >= s => best,
                    _ => Some((a, s)),
                });
            Substitution {
                layer: layer.name.clone(),
                asset_id: best.map(|(a, _)| a.id.clone()),
                score: best.map_or(0.0, |(_, s)| s),
            }
        })
        .collect()
}

/// Swaps in the chosen rasters and their palette colors; geometry is kept.
pub fn apply_substitutions(
    banner: &mut CandidateBanner,
    subs: &[Substitution],
    library: &ElementLibrary,
    palette: &Palette,
) {
    for s in subs {
        let Some(asset) = s.asset_id.as_deref().and_then(|id| library.get(id)) else {
            continue;
        };
        if let Some(layer) = banner.layers.iter_mut().find(|l| l.name == s.layer) {
            layer.asset = Some(asset.path.clone());
            layer.asset_hue_shift = 0.0;
            layer.color = palette.anchor_by_name(&asset.palette_color).ok();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banner::PlacedLayer;
    use crate::geometry::Rect;

    fn asset(id: &str, kind: LayerKind, color: &str, tags: &[&str]) -> ElementAsset {
        ElementAsset {
            id: id.into(),
            kind,
            style_tags: tags.iter().map(|s| s.to_string()).collect(),
            palette_color: color.into(),
            path: PathBuf::from(format!("{id}.png")),
            size: (32, 32),
        }
    }

    fn banner() -> CandidateBanner {
        let mut b = CandidateBanner::new("t", 100, 100);
        b.style_tags = vec!["festive".into()];
        b.primary_color = Some(Rgb(255, 0, 0));
        b.layers.push(PlacedLayer::new("mc-c", LayerKind::MaskMain, Rect::new(0.0, 0.0, 10.0, 10.0), 0));
        b.layers.push(PlacedLayer::new("ornament-a-1", LayerKind::OrnamentTrim, Rect::new(0.0, 0.0, 5.0, 5.0), 1));
        b
    }

    #[test]
    fn single_candidate_is_chosen() {
        let lib =
            ElementLibrary { root: PathBuf::new(), assets: vec![asset("m1", LayerKind::MaskMain, "blue", &["plain"])] };
        let subs = retrieve_elements(&banner(), &lib, &Palette::default());
        assert_eq!(subs[0].asset_id.as_deref(), Some("m1"));
        assert_eq!(subs[1].asset_id, None);
    }

    #[test]
    fn red_beats_wine_on_a_red_banner() {
        let lib = ElementLibrary {
            root: PathBuf::new(),
            assets: vec![
                asset("a-wine", LayerKind::MaskMain, "wine", &["festive"]),
                asset("b-red", LayerKind::MaskMain, "red", &["festive"]),
            ],
        };
        let subs = retrieve_elements(&banner(), &lib, &Palette::default());
        assert_eq!(subs[0].asset_id.as_deref(), Some("b-red"));
        assert!((subs[0].score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_the_smaller_id() {
        let lib = ElementLibrary {
            root: PathBuf::new(),
            assets: vec![
                asset("a", LayerKind::MaskMain, "red", &["festive"]),
                asset("b", LayerKind::MaskMain, "red", &["festive"]),
            ],
        };
        assert_eq!(retrieve_elements(&banner(), &lib, &Palette::default())[0].asset_id.as_deref(), Some("a"));
    }

    #[test]
    fn substitution_keeps_geometry() {
        let lib = ElementLibrary { root: PathBuf::new(), assets: vec![asset("m1", LayerKind::MaskMain, "blue", &[])] };
        let mut b = banner();
        let before: Vec<Rect> = b.layers.iter().map(|l| l.bbox).collect();
        let subs = retrieve_elements(&b, &lib, &Palette::default());
        apply_substitutions(&mut b, &subs, &lib, &Palette::default());
        assert_eq!(b.layers.iter().map(|l| l.bbox).collect::<Vec<_>>(), before);
        assert_eq!(b.layers[0].color, Some(Rgb(0, 0, 255)));
        assert_eq!(b.layers[0].asset, Some(PathBuf::from("m1.png")));
    }

    #[test]
    fn jaccard_basics() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(jaccard(&s(&["a", "b"]), &s(&["b", "c"])), 1.0 / 3.0);
        assert_eq!(jaccard(&[], &[]), 1.0);
        assert_eq!(jaccard(&s(&["a"]), &[]), 0.0);
    }
}
