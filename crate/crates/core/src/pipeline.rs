//! End-to-end synthesis: planner, actuator, adjuster and generator in order.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use image::RgbaImage;
use serde::Serialize;
use thiserror::Error;

use crate::actuator::{
    expand_size, layout_products, layout_text, ExpandError, ProductLayout, TextLayoutNet, TypesettingForm,
};
use crate::adjuster::{
    apply_substitutions, finetune, retrieve_elements, Backdrop, ElementLibrary, Evaluator, StopReason, Substitution,
    TraceStep,
};
use crate::banner::{CandidateBanner, PlacedLayer, ScoreBreakdown, TextAlign};
use crate::config::EngineConfig;
use crate::generator::{composite, encode_png, render_backdrop, AssetCache, GenerateError, TextRenderer};
use crate::geometry::Rect;
use crate::planner::prerank::{color_profile, merge_profiles, prerank, PrerankError};
use crate::planner::rank::{featurize, rank_candidates, RankContext, RankError, RankModel};
use crate::planner::recall::{score_all, screen, RecallError};
use crate::request::BannerRequest;
use crate::template::{load_library, LayerKind, LibraryError, Template, TemplateLibrary, TextRole, MAX_TEXT_LINES};

pub const PROVENANCE_FORMAT: &str = "bannerforge-provenance";

/// Pipeline stage names, as reported in errors and timings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Load,
    Request,
    Screen,
    Recall,
    Prerank,
    Rank,
    Actuate,
    Adjust,
    Render,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("stage serializes");
        f.write_str(s.as_str().unwrap_or("unknown"))
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Recall(#[from] RecallError),
    #[error(transparent)]
    Prerank(#[from] PrerankError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Expand(#[from] ExpandError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("template {0} has no text area")]
    NoTextArea(String),
    #[error("template {0} has no product area")]
    NoProductArea(String),
}

impl PipelineError {
    /// True when no template survives selection.
    pub fn is_empty_candidate_set(&self) -> bool {
        matches!(
            self,
            PipelineError::Recall(RecallError::EmptyRecall)
                | PipelineError::Prerank(PrerankError::ClashExhausted | PrerankError::NoCandidates)
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, PipelineError::Generate(GenerateError::MissingAsset(_) | GenerateError::BadAsset { .. }))
    }
}

#[derive(Debug, Error)]
#[error("{stage}: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: PipelineError,
}

fn at<T, E: Into<PipelineError>>(stage: Stage, r: Result<T, E>) -> Result<T, StageError> {
    r.map_err(|e| StageError { stage, source: e.into() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TextLine {
    pub role: TextRole,
    pub text: String,
    pub bbox: Rect,
    pub font_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductSlot {
    pub index: usize,
    pub bbox: Rect,
    pub rotation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RequestSummary {
    pub texts: Vec<String>,
    pub width: u32,
    pub height: u32,
    pub department_id: i64,
    pub products: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjusterSummary {
    pub initial_score: f64,
    pub final_score: f64,
    pub iterations: usize,
    pub stop: StopReason,
}

/// Machine-readable account of one synthesized banner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub format: String,
    pub version: u32,
    pub template_id: String,
    pub variant: usize,
    pub seed: u64,
    pub request: RequestSummary,
    pub scores: ScoreBreakdown,
    pub ranked: bool,
    pub form: TypesettingForm,
    pub form_source: String,
    pub product_layout: ProductLayout,
    pub text_lines: Vec<TextLine>,
    pub product_slots: Vec<ProductSlot>,
    pub substitutions: Vec<Substitution>,
    pub trace: Vec<TraceStep>,
    pub adjuster: AdjusterSummary,
    pub missing_glyphs: usize,
    pub warnings: Vec<String>,
    pub timings_ms: BTreeMap<Stage, f64>,
}

impl Provenance {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("provenance serializes") + "\n"
    }
}

#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub image: RgbaImage,
    pub provenance: Provenance,
}

impl RenderOutput {
    pub fn png(&self) -> Vec<u8> {
        encode_png(&self.image)
    }

    /// Writes `<stem>.png` and `<stem>.provenance.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.png")), self.png())?;
        std::fs::write(dir.join(format!("{stem}.provenance.json")), self.provenance.to_json())
    }
}

/// A selected template with the scores that picked it.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub template_id: String,
    pub scores: ScoreBreakdown,
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub selections: Vec<Selection>,
    pub ranked: bool,
    pub timings_ms: BTreeMap<Stage, f64>,
}

/// Geometry and choices made while fitting a template to a request.
#[derive(Debug, Clone)]
pub struct Instantiated {
    pub banner: CandidateBanner,
    pub form_source: String,
    pub warnings: Vec<String>,
}

/// Everything needed to synthesize banners; shared read-only across threads.
pub struct Engine {
    pub config: EngineConfig,
    pub library: TemplateLibrary,
    pub elements: ElementLibrary,
    pub rank_model: Option<RankModel>,
    pub text_model: Option<TextLayoutNet>,
    pub text: TextRenderer,
    pub assets: AssetCache,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Library(#[from] LibraryError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    TextNet(#[from] crate::actuator::TextNetError),
    #[error("font: {0}")]
    Font(String),
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

impl Engine {
    /// Loads the libraries and models named by `config`.
    pub fn load(config: EngineConfig) -> Result<Engine, LoadError> {
        let library = load_library(&config.paths.library)?;
        let elements = match &config.paths.elements {
            Some(p) => ElementLibrary::load(p, &library.palette)?,
            None => ElementLibrary::default(),
        };
        let rank_model = config.paths.rank_model.as_deref().map(RankModel::load).transpose()?;
        let text_model = config.paths.text_model.as_deref().map(TextLayoutNet::load).transpose()?;
        let text = match &config.paths.font {
            Some(p) => TextRenderer::from_file(p).map_err(LoadError::Font)?,
            None => TextRenderer::embedded(),
        };
        Ok(Engine { config, library, elements, rank_model, text_model, text, assets: AssetCache::new() })
    }

    pub fn from_parts(config: EngineConfig, library: TemplateLibrary) -> Engine {
        Engine {
            config,
            library,
            elements: ElementLibrary::default(),
            rank_model: None,
            text_model: None,
            text: TextRenderer::embedded(),
            assets: AssetCache::new(),
        }
    }

    /// Planner stages: screen, recall, pre-rank and rank. Returns the
    /// ordered candidate list.
    pub fn plan(&self, req: &BannerRequest) -> Result<Plan, StageError> {
        let cfg = &self.config;
        let lib = &self.library;
        let mut timings = BTreeMap::new();

        let t = Instant::now();
        let screened = at(Stage::Screen, screen(lib, req))?;
        timings.insert(Stage::Screen, ms(t));

        let t = Instant::now();
        let mut recalled = at(Stage::Recall, score_all(&screened, req, &cfg.recall))?;
        recalled.truncate(cfg.recall.top_k);
        timings.insert(Stage::Recall, ms(t));

        let t = Instant::now();
        let profiles =
            req.products.iter().map(|p| color_profile(&p.image, &lib.palette)).collect::<Result<Vec<_>, _>>();
        let profile = merge_profiles(&at(Stage::Prerank, profiles)?);
        let pre = at(Stage::Prerank, prerank(&recalled, &profile, lib, &cfg.prerank, cfg.recall.top_k))?;
        timings.insert(Stage::Prerank, ms(t));

        let t = Instant::now();
        let ranked = at(
            Stage::Rank,
            rank_candidates(self.rank_model.as_ref(), &pre, |c| {
                let model = self.rank_model.as_ref().expect("features only requested with a model");
                let ctx = RankContext {
                    texts: &req.texts,
                    department_id: req.department_id,
                    recall_score: c.recall_total,
                    prerank_score: c.color_score,
                };
                featurize(&lib.templates[&c.template_id], &ctx, &model.layout, &lib.palette)
            }),
        )?;
        timings.insert(Stage::Rank, ms(t));

        let selections = ranked
            .candidates
            .iter()
            .map(|c| {
                let r = recalled.iter().find(|r| r.template_id == c.template_id).expect("ranked ids come from recall");
                Selection {
                    template_id: c.template_id.clone(),
                    scores: ScoreBreakdown {
                        recall: r.total_score,
                        text: r.text_score,
                        goods: r.goods_score,
                        color: c.color_score,
                        rank: c.rank_score,
                        adjuster_initial: None,
                        adjuster_final: None,
                    },
                }
            })
            .collect();
        Ok(Plan { selections, ranked: ranked.ranked, timings_ms: timings })
    }

    /// Actuator: resizes the template, re-lays the text and the products,
    /// and carries masks and bound ornaments along.
    pub fn instantiate(&self, t: &Template, req: &BannerRequest) -> Result<Instantiated, PipelineError> {
        instantiate(t, req, &self.library, self.text_model.as_ref(), &self.text)
    }

    /// Runs the whole pipeline and renders up to `variants` banners from
    /// distinct templates, best candidate first.
    pub fn synthesize(&self, req: &BannerRequest, variants: usize) -> Result<Vec<RenderOutput>, StageError> {
        let plan = self.plan(req)?;
        let mut out = Vec::new();
        for (v, sel) in plan.selections.iter().take(variants.max(1)).enumerate() {
            out.push(self.render_selection(req, &plan, sel, v)?);
        }
        Ok(out)
    }

    fn render_selection(
        &self,
        req: &BannerRequest,
        plan: &Plan,
        sel: &Selection,
        variant: usize,
    ) -> Result<RenderOutput, StageError> {
        let palette = &self.library.palette;
        let mut timings = plan.timings_ms.clone();
        let template = &self.library.templates[&sel.template_id];

        let t = Instant::now();
        let inst = at(Stage::Actuate, self.instantiate(template, req))?;
        timings.insert(Stage::Actuate, ms(t));
        let mut warnings = inst.warnings;
        let mut banner = inst.banner;
        banner.scores = sel.scores.clone();

        let t = Instant::now();
        let substitutions = retrieve_elements(&banner, &self.elements, palette);
        for s in &substitutions {
            if s.asset_id.is_none() {
                warnings.push(format!("no element asset for layer {}; template styling kept", s.layer));
            }
        }
        apply_substitutions(&mut banner, &substitutions, &self.elements, palette);
        let backdrop = at(Stage::Adjust, render_backdrop(&banner, &self.assets))?;
        let evaluator = Evaluator::new(self.config.weights, palette).with_backdrop(Backdrop::from_canvas(&backdrop));
        let seed = req.seed.wrapping_add(variant as u64);
        let tuned = finetune(&banner, &evaluator, &self.config.search, seed);
        timings.insert(Stage::Adjust, ms(t));
        let mut banner = tuned.banner;
        banner.scores.adjuster_initial = Some(tuned.initial_score);
        banner.scores.adjuster_final = Some(tuned.final_score);

        let t = Instant::now();
        let rendered = at(Stage::Render, composite(&banner, &self.assets, &self.text))?;
        timings.insert(Stage::Render, ms(t));
        if rendered.missing_glyphs > 0 {
            warnings
                .push(format!("{} glyph(s) missing from the font; replacement glyph drawn", rendered.missing_glyphs));
        }
        let mut text_lines = banner
            .z_order()
            .into_iter()
            .map(|i| &banner.layers[i])
            .filter_map(|l| {
                Some(TextLine {
                    role: l.kind.text_role()?,
                    text: l.text.clone().unwrap_or_default(),
                    bbox: l.bbox,
                    font_size: l.font_size.unwrap_or(0.0),
                })
            })
            .collect::<Vec<_>>();
        text_lines.sort_by_key(|l| l.role.index());
        let mut product_slots: Vec<ProductSlot> = banner
            .layers
            .iter()
            .filter_map(|l| Some(ProductSlot { index: l.product?, bbox: l.bbox, rotation: l.rotation }))
            .collect();
        product_slots.sort_by_key(|p| p.index);

        let provenance = Provenance {
            format: PROVENANCE_FORMAT.into(),
            version: 1,
            template_id: sel.template_id.clone(),
            variant,
            seed,
            request: RequestSummary {
                texts: req.texts.clone(),
                width: req.target_width,
                height: req.target_height,
                department_id: req.department_id,
                products: req
                    .products
                    .iter()
                    .map(|p| p.source.as_ref().map_or_else(|| "<memory>".into(), |s| s.display().to_string()))
                    .collect(),
            },
            scores: banner.scores.clone(),
            ranked: plan.ranked,
            form: banner.form.expect("instantiate sets the form"),
            form_source: inst.form_source,
            product_layout: banner.product_layout.expect("instantiate sets the layout"),
            text_lines,
            product_slots,
            substitutions,
            trace: tuned.trace,
            adjuster: AdjusterSummary {
                initial_score: tuned.initial_score,
                final_score: tuned.final_score,
                iterations: tuned.iterations,
                stop: tuned.stop,
            },
            missing_glyphs: rendered.missing_glyphs,
            warnings,
            timings_ms: timings,
        };
        Ok(RenderOutput { image: rendered.image, provenance })
    }
}

/// Role of request line `i` of `n` under `form`.
pub fn line_role(form: TypesettingForm, i: usize, n: usize) -> TextRole {
    if form == TypesettingForm::MainWithActionTag && n >= 2 && i + 1 == n {
        TextRole::Action
    } else {
        TextRole::from_line_index(i).expect("at most three lines")
    }
}

fn fallback_form(t: &Template, n: usize) -> TypesettingForm {
    match TypesettingForm::infer(t) {
        Some(f) if f.supports(n) => f,
        _ => match n {
            1 => TypesettingForm::CenteredSingle,
            2 => TypesettingForm::LeftStackedTwo,
            _ => TypesettingForm::LeftStackedThree,
        },
    }
}

fn is_centered(form: TypesettingForm) -> bool {
    matches!(
        form,
        TypesettingForm::CenteredSingle | TypesettingForm::CenteredStackedTwo | TypesettingForm::CenteredStackedThree
    )
}

fn to_placed(l: &crate::template::Layer, library: &TemplateLibrary) -> PlacedLayer {
    let mut p = PlacedLayer::new(l.name.clone(), l.kind, l.bbox, l.z);
    p.color = l.color;
    p.opacity = l.opacity;
    p.font_size = l.font_size;
    p.asset = l.asset_ref.as_deref().map(|a| library.asset_path(a));
    p.asset_hue_shift = l.asset_hue_shift;
    p.bound_to = l.bound_to.clone();
    p.text = l.text.clone();
    p
}

/// Keeps the size of `r` and moves it with the center of its anchor.
fn follow_center(r: &Rect, from: &Rect, to: &Rect) -> Rect {
    let (fx, fy) = from.center();
    let (tx, ty) = to.center();
    r.translate(tx - fx, ty - fy)
}

pub fn instantiate(
    template: &Template,
    req: &BannerRequest,
    library: &TemplateLibrary,
    text_model: Option<&TextLayoutNet>,
    text: &TextRenderer,
) -> Result<Instantiated, PipelineError> {
    let mut warnings = Vec::new();
    let t = expand_size(template, req.target_size())?;
    let canvas = t.canvas();
    let text_area = t.text_area().ok_or_else(|| PipelineError::NoTextArea(t.id.clone()))?;
    let product_area = t.product_area().ok_or_else(|| PipelineError::NoProductArea(t.id.clone()))?;
    let n = req.texts.len().clamp(1, MAX_TEXT_LINES);
    let texts = &req.texts[..n];

    // text lines
    let (form, boxes, form_source) = match text_model {
        Some(net) => {
            let l = layout_text(net, texts, &text_area, t.width as f64);
            (l.form, l.lines, "model".to_string())
        }
        None => {
            let form = fallback_form(&t, n);
            let base = t.text_layer(TextRole::Main).and_then(|l| l.font_size).unwrap_or(text_area.h / n as f64 * 0.6);
            let widths: Vec<f64> =
                texts.iter().map(|s| text.measure(s, base).clamp(0.2 * text_area.w, text_area.w)).collect();
            (form, form.place(&text_area, &widths), "template".to_string())
        }
    };
    if text_model.is_none() {
        warnings.push("no text-layout model loaded; form taken from the template".into());
    }

    let mut old_anchor: BTreeMap<String, Rect> = BTreeMap::new();
    let mut new_anchor: BTreeMap<String, Rect> = BTreeMap::new();
    let main_style = t.text_layer(TextRole::Main);
    let max_text_z = t.text_layers().map(|l| l.z).max().unwrap_or(0);
    let mut layers: Vec<PlacedLayer> = Vec::new();
    for (i, (s, r)) in texts.iter().zip(&boxes).enumerate() {
        let role = line_role(form, i, n);
        let kind = match role {
            TextRole::Main => LayerKind::TextMain,
            TextRole::Sub => LayerKind::TextSub,
            TextRole::Action => LayerKind::TextAction,
        };
        let style = t.text_layer(role).or(main_style);
        let bbox = r.rounded().clamp_into(&canvas);
        let mut p = PlacedLayer::new(role.layer_name(), kind, bbox, style.map_or(max_text_z + 1, |l| l.z));
        p.color = style.and_then(|l| l.color);
        p.opacity = style.map_or(1.0, |l| l.opacity);
        let fs = style.and_then(|l| l.font_size).unwrap_or(bbox.h * 0.75);
        p.font_size = Some(fs.min(0.8 * bbox.h));
        p.text = Some(s.clone());
        p.align = if is_centered(form) { TextAlign::Center } else { TextAlign::Left };
        if let Some(old) = t.text_layer(role) {
            old_anchor.insert(role.layer_name().to_string(), old.bbox);
        }
        new_anchor.insert(role.layer_name().to_string(), bbox);
        layers.push(p);
    }

    // products
    let plan = layout_products(&req.products, &product_area);
    let product_z = t.product_layers().map(|l| l.z).min().unwrap_or(1);
    for (i, slot) in plan.placements.iter().enumerate() {
        let name = format!("product-{}", i + 1);
        let bbox = slot.slot.rounded().clamp_into(&canvas);
        let mut p = PlacedLayer::new(name.clone(), LayerKind::Product(i as u32 + 1), bbox, product_z);
        p.rotation = slot.rotation;
        p.product = Some(i);
        if let Some(old) = t.layer(&name) {
            old_anchor.insert(name.clone(), old.bbox);
        }
        new_anchor.insert(name, bbox);
        layers.push(p);
    }

    // everything else
    for l in &t.layers {
        if l.kind.is_text() || l.kind.is_product() {
            continue;
        }
        let mut p = to_placed(l, library);
        if let Some(anchor) = l.bound_to.as_deref() {
            match (old_anchor.get(anchor), new_anchor.get(anchor)) {
                (Some(from), Some(to)) => {
                    let moved = if l.kind.is_mask() {
                        Rect::remap(&l.bbox, from, to)
                    } else {
                        follow_center(&l.bbox, from, to)
                    };
                    p.bbox = moved.rounded().clamp_into(&canvas);
                }
                _ => continue, // anchor dropped
            }
        }
        layers.push(p);
    }

    let mut banner = CandidateBanner::new(t.id.clone(), t.width, t.height);
    banner.style_tags = t.style_tags.clone();
    banner.primary_color = t.primary_color();
    banner.layers = layers;
    banner.normalize_z();
    banner.form = Some(form);
    banner.product_layout = Some(plan.layout);
    banner.products = req.products.iter().map(|p| Arc::clone(&p.image)).collect();
    Ok(Instantiated { banner, form_source, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::Palette;
    use crate::evaluator::synthetic::{build_template, Recipe};
    use crate::request::test_request;

    fn engine(templates: Vec<Template>) -> Engine {
        let lib = TemplateLibrary::from_templates("t", Palette::default(), templates);
        Engine::from_parts(EngineConfig::with_library("."), lib)
    }

    fn recipe(id: &str, form: TypesettingForm, lines: usize) -> Template {
        let texts = ["Summer sale now", "All items half price", "Shop now"];
        let mut r = Recipe::new(id, (800, 800), form, &texts[..lines], 2);
        r.masks = true;
        r.free_ornament = true;
        r.department_ids = vec![];
        build_template(&r, &Palette::default())
    }

    #[test]
    fn synthesizes_the_requested_size() {
        let e = engine(vec![recipe("a", TypesettingForm::LeftStackedTwo, 2)]);
        let req = test_request(&["Big sale", "Everything must go"], &[1.0, 0.5], (800, 400));
        let out = e.synthesize(&req, 1).unwrap();
        assert_eq!(out[0].image.dimensions(), (800, 400));
        assert_eq!(out[0].provenance.template_id, "a");
        assert_eq!(out[0].provenance.product_slots.len(), 2);
    }

    #[test]
    fn masks_follow_their_lines() {
        let e = engine(vec![recipe("a", TypesettingForm::CenteredStackedTwo, 2)]);
        let req = test_request(&["Big sale", "Everything must go"], &[1.0], (800, 800));
        let inst = e.instantiate(&e.library.templates["a"], &req).unwrap();
        let b = inst.banner;
        for (mask, text) in [("mc-c", "text-main"), ("mc-d", "text-sub")] {
            let m = b.layer(mask).unwrap().bbox;
            let t = b.layer(text).unwrap().bbox;
            assert!(m.contains_rect(&t, 1.0), "{mask} {m:?} vs {t:?}");
        }
        assert_eq!(b.layers.iter().filter(|l| l.kind.is_product()).count(), 1);
    }

    #[test]
    fn extra_template_lines_are_dropped_with_their_masks() {
        let e = engine(vec![recipe("a", TypesettingForm::LeftStackedThree, 3)]);
        let req = test_request(&["Big sale"], &[1.0], (800, 800));
        let b = e.instantiate(&e.library.templates["a"], &req).unwrap().banner;
        assert!(b.layer("text-sub").is_none());
        assert!(b.layer("mc-d").is_none());
        assert!(b.layer("mc-c").is_some());
    }

    #[test]
    fn empty_recall_is_reported() {
        let e = engine(vec![recipe("a", TypesettingForm::CenteredSingle, 1)]);
        let req = test_request(&["Big sale"], &[1.0], (1200, 200));
        let err = e.synthesize(&req, 1).unwrap_err();
        assert_eq!(err.stage, Stage::Screen);
        assert!(err.source.is_empty_candidate_set());
    }

    #[test]
    fn deterministic_apart_from_timings() {
        let e =
            engine(vec![recipe("a", TypesettingForm::Staggered, 2), recipe("b", TypesettingForm::LeftStackedTwo, 2)]);
        let req = test_request(&["Big sale", "Everything must go"], &[1.0, 2.0], (800, 800));
        let a = e.synthesize(&req, 2).unwrap();
        let b = e.synthesize(&req, 2).unwrap();
        assert_eq!(a.len(), 2);
        assert_ne!(a[0].provenance.template_id, a[1].provenance.template_id);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.png(), y.png());
            let (mut px, mut py) = (x.provenance.clone(), y.provenance.clone());
            px.timings_ms.clear();
            py.timings_ms.clear();
            assert_eq!(px, py);
        }
    }
}
