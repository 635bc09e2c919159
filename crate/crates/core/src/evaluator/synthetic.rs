//! Procedural templates: valid designs assembled from a handful of knobs,
//! for fixtures and for large synthetic libraries.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::actuator::{layout_slots, TypesettingForm};
use crate::color::{Palette, Rgb};
use crate::geometry::Rect;
use crate::template::{Layer, LayerKind, Template, TemplateLibrary, TextRole};

#[derive(Debug, Clone, PartialEq)]
pub struct Recipe {
    pub id: String,
    pub series_id: String,
    pub size: (u32, u32),
    pub form: TypesettingForm,
    /// Placeholder copy, one entry per line (1 to 3).
    pub texts: Vec<String>,
    pub capacities: Vec<u32>,
    pub slots: usize,
    pub slot_aspect: f64,
    pub background: String,
    pub accent: String,
    pub style_tags: Vec<String>,
    pub category_tags: Vec<String>,
    pub department_ids: Vec<i64>,
    pub masks: bool,
    pub trim_ornament: bool,
    pub free_ornament: bool,
    pub logo: bool,
    pub background_asset: Option<String>,
    pub ornament_asset: Option<String>,
    pub logo_asset: Option<String>,
}

impl Recipe {
    pub fn new(id: &str, size: (u32, u32), form: TypesettingForm, texts: &[&str], slots: usize) -> Recipe {
        let n = texts.len();
        Recipe {
            id: id.to_string(),
            series_id: "S0".into(),
            size,
            form,
            texts: texts.iter().map(|s| s.to_string()).collect(),
            capacities: [8, 12, 4][..n].to_vec(),
            slots,
            slot_aspect: 1.0,
            background: "white".into(),
            accent: "red".into(),
            style_tags: vec!["minimal".into()],
            category_tags: vec!["apparel".into()],
            department_ids: vec![1],
            masks: false,
            trim_ornament: false,
            free_ornament: false,
            logo: false,
            background_asset: None,
            ornament_asset: None,
            logo_asset: None,
        }
    }
}

fn line_widths(form: TypesettingForm, n: usize) -> Vec<f64> {
    use TypesettingForm::*;
    let table: &[f64] = match form {
        CenteredSingle => &[0.9],
        LeftStackedTwo | LeftStackedThree => &[1.0, 0.8, 0.6],
        CenteredStackedTwo | CenteredStackedThree => &[1.0, 0.7, 0.5],
        MainWithActionTag => &[1.0, 0.8, 0.4],
        Staggered => &[0.6, 0.6, 0.6],
    };
    let mut w = table[..n].to_vec();
    if form == MainWithActionTag {
        w[n - 1] = 0.4;
    }
    w
}

/// The tag form always puts its last line in the action role.
fn role_for(form: TypesettingForm, i: usize, n: usize) -> TextRole {
    if form == TypesettingForm::MainWithActionTag && i + 1 == n {
        TextRole::Action
    } else {
        TextRole::from_line_index(i).expect("at most three lines")
    }
}

/// Text and product regions for a canvas: side by side on wide or square
/// canvases, stacked on tall ones.
pub fn regions(w: f64, h: f64) -> (Rect, Rect) {
    if w >= h {
        (Rect::new(0.06 * w, 0.2 * h, 0.38 * w, 0.5 * h), Rect::new(0.5 * w, 0.1 * h, 0.44 * w, 0.8 * h))
    } else {
        (Rect::new(0.1 * w, 0.08 * h, 0.8 * w, 0.28 * h), Rect::new(0.1 * w, 0.42 * h, 0.8 * w, 0.5 * h))
    }
}

fn text_color(bg: Rgb) -> Rgb {
    let luma = 0.299 * bg.0 as f64 + 0.587 * bg.1 as f64 + 0.114 * bg.2 as f64;
    if luma > 140.0 {
        Rgb(0, 0, 0)
    } else {
        Rgb(255, 255, 255)
    }
}

/// Builds a template that passes lint and whose text layers read back as
/// `recipe.form`.
pub fn build_template(recipe: &Recipe, palette: &Palette) -> Template {
    let (w, h) = (recipe.size.0 as f64, recipe.size.1 as f64);
    let canvas = Rect::canvas(recipe.size.0, recipe.size.1);
    let (text_area, product_area) = regions(w, h);
    let bg = palette.resolve(&recipe.background).expect("recipe background color");
    let accent = palette.resolve(&recipe.accent).expect("recipe accent color");
    let n = recipe.texts.len().clamp(1, 3);
    let form = if recipe.form.supports(n) { recipe.form } else { TypesettingForm::CenteredSingle };

    let mut layers = Vec::new();
    let mut push = |mut l: Layer| {
        l.z = layers.len();
        layers.push(l);
    };

    let mut background = Layer::new("background", LayerKind::Background, canvas, 0);
    background.color = Some(bg);
    background.asset_ref = recipe.background_asset.clone();
    push(background);

    if recipe.trim_ornament {
        let s = (0.12 * w.min(h)).round();
        let mut l = Layer::new("ornament-a-1", LayerKind::OrnamentTrim, Rect::new(0.0, h - s, s, s), 0);
        l.color = Some(accent);
        l.asset_ref = recipe.ornament_asset.clone();
        push(l);
    }

    let slots = layout_slots(&vec![recipe.slot_aspect; recipe.slots], &vec![1.0; recipe.slots], &product_area);
    for (i, p) in slots.placements.iter().enumerate() {
        let r = p.slot.sub_rect(0.04, 0.04, 0.92, 0.92).rounded().clamp_into(&canvas);
        let mut l = Layer::new(format!("product-{}", i + 1), LayerKind::Product(i as u32 + 1), r, 0);
        l.color = Some(accent);
        push(l);
    }

    let widths: Vec<f64> = line_widths(form, n).iter().map(|f| f * text_area.w).collect();
    let lines: Vec<Rect> = form.place(&text_area, &widths).into_iter().map(|r| r.rounded()).collect();
    for (i, r) in lines.iter().enumerate() {
        let role = role_for(form, i, n);
        let want_mask = (recipe.masks && role != TextRole::Action)
            || (role == TextRole::Action && form == TypesettingForm::MainWithActionTag);
        if want_mask {
            let kind = match role {
                TextRole::Main => LayerKind::MaskMain,
                TextRole::Sub => LayerKind::MaskSub,
                TextRole::Action => LayerKind::MaskAction,
            };
            let m = Rect::new(r.x - 6.0, r.y - 4.0, r.w + 12.0, r.h + 8.0).clamp_into(&canvas);
            let mut l = Layer::new(role.mask_name(), kind, m, 0);
            l.color = Some(accent);
            l.opacity = 0.85;
            l.bound_to = Some(role.layer_name().to_string());
            push(l);
        }
    }
    for (i, r) in lines.iter().enumerate() {
        let role = role_for(form, i, n);
        let kind = match role {
            TextRole::Main => LayerKind::TextMain,
            TextRole::Sub => LayerKind::TextSub,
            TextRole::Action => LayerKind::TextAction,
        };
        let mut l = Layer::new(role.layer_name(), kind, *r, 0);
        l.font_size = Some((r.h * 0.75).round().max(8.0));
        l.capacity = Some(recipe.capacities.get(i).copied().unwrap_or(8));
        l.color = Some(if recipe.masks || role == TextRole::Action && form == TypesettingForm::MainWithActionTag {
            text_color(accent)
        } else {
            text_color(bg)
        });
        l.text = Some(recipe.texts[i].clone());
        push(l);
    }

    if recipe.free_ornament {
        let main = lines[0];
        let s = (main.h * 0.5).round().max(4.0);
        let r = Rect::new(main.right() - s / 2.0, main.y - s / 2.0, s, s).rounded().clamp_into(&canvas);
        let mut l = Layer::new("ornament-b-1", LayerKind::OrnamentFree, r, 0);
        l.color = Some(accent);
        l.asset_ref = recipe.ornament_asset.clone();
        l.bound_to = Some("text-main".into());
        push(l);
    }

    if recipe.logo {
        let r = Rect::new(w * 0.81, h * 0.02, w * 0.16, h * 0.06).rounded().clamp_into(&canvas);
        let mut l = Layer::new("logo", LayerKind::Logo, r, 0);
        l.color = Some(text_color(bg));
        l.asset_ref = recipe.logo_asset.clone();
        push(l);
    }

    Template::from_parts(
        recipe.id.clone(),
        recipe.series_id.clone(),
        recipe.size.0,
        recipe.size.1,
        recipe.style_tags.clone(),
        recipe.category_tags.clone(),
        recipe.department_ids.clone(),
        layers,
    )
}

pub const SYNTHETIC_SIZES: [(u32, u32); 5] = [(800, 800), (800, 400), (1200, 600), (600, 800), (750, 1000)];
pub const STYLES: [&str; 4] = ["festive", "minimal", "luxury", "sport"];
pub const CATEGORIES: [&str; 4] = ["apparel", "electronics", "food", "beauty"];
const WORDS: [&str; 16] = [
    "summer", "sale", "new", "arrivals", "discount", "full", "season", "deal", "fresh", "style", "limited", "offer",
    "today", "only", "best", "price",
];

/// Random recipe drawn from `rng`.
pub fn random_recipe(id: String, rng: &mut ChaCha8Rng, palette: &Palette) -> Recipe {
    let n = rng.random_range(1..=3usize);
    let forms: Vec<TypesettingForm> = TypesettingForm::ALL.iter().copied().filter(|f| f.supports(n)).collect();
    let form = *forms.choose(rng).expect("forms for every line count");
    let texts: Vec<String> = (0..n)
        .map(|_| {
            let k = rng.random_range(1..=3usize);
            (0..k).map(|_| *WORDS.choose(rng).expect("words")).collect::<Vec<_>>().join(" ")
        })
        .collect();
    let names: Vec<&str> = palette.entries().iter().map(|e| e.name.as_str()).collect();
    let background = names[rng.random_range(0..names.len())].to_string();
    let accent = names[rng.random_range(0..names.len())].to_string();
    let mut r = Recipe::new(&id, *SYNTHETIC_SIZES.choose(rng).expect("sizes"), form, &[], 0);
    r.texts = texts;
    r.capacities = (0..n).map(|_| rng.random_range(4..=20)).collect();
    r.series_id = format!("S{}", rng.random_range(0..12));
    r.slots = rng.random_range(1..=6);
    r.slot_aspect = rng.random_range(0.4..2.0);
    r.background = background;
    r.accent = accent;
    r.style_tags = vec![STYLES.choose(rng).expect("styles").to_string()];
    r.category_tags = vec![CATEGORIES.choose(rng).expect("categories").to_string()];
    r.department_ids = vec![rng.random_range(1..=4)];
    r.masks = rng.random_bool(0.5);
    r.trim_ornament = rng.random_bool(0.5);
    r.free_ornament = rng.random_bool(0.5);
    r.logo = rng.random_bool(0.5);
    r
}

/// An in-memory library of `n` random templates with ids `syn-0000`...
pub fn synthetic_library(n: usize, seed: u64, palette: &Palette) -> TemplateLibrary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let templates =
        (0..n).map(|i| build_template(&random_recipe(format!("syn-{i:04}"), &mut rng, palette), palette)).collect();
    TemplateLibrary::from_templates("synthetic", palette.clone(), templates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::lint_template;

    #[test]
    fn every_form_reads_back() {
        let p = Palette::default();
        for form in TypesettingForm::ALL {
            let n = (1..=3).find(|&n| form.supports(n)).unwrap();
            let texts = ["Big summer sale", "New arrivals", "Shop now"];
            for size in SYNTHETIC_SIZES {
                let mut r = Recipe::new("t", size, form, &texts[..n], 2);
                r.masks = true;
                let t = build_template(&r, &p);
                assert!(lint_template(&t.to_descriptor(), &p).is_empty(), "{form} {size:?}");
                assert_eq!(TypesettingForm::infer(&t), Some(form), "{size:?}");
            }
        }
    }

    #[test]
    fn synthetic_library_lints_clean() {
        let p = Palette::default();
        let lib = synthetic_library(60, 9, &p);
        assert_eq!(lib.len(), 60);
        for t in lib.iter() {
            let v = lint_template(&t.to_descriptor(), &p);
            assert!(v.is_empty(), "{}: {v:?}", t.id);
        }
    }
}
