//! Color-based pre-ranking: dominant colors, color distance, clash analysis
//! and diversity over the returned head of the list.

use std::collections::HashMap;

use image::RgbaImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::recall::RecallResult;
use crate::color::{Lab, Palette, Rgb};
use crate::template::{Template, TemplateLibrary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrerankConfig {
    /// Both colors must exceed this HSV saturation to clash.
    pub clash_saturation: f64,
    /// Hue difference band (degrees) treated as near-complementary.
    pub clash_hue_min: f64,
    pub clash_hue_max: f64,
    /// Enforce the series / color-family quotas over the top-k.
    pub diversity: bool,
}

impl Default for PrerankConfig {
    fn default() -> Self {
        PrerankConfig { clash_saturation: 0.6, clash_hue_min: 150.0, clash_hue_max: 210.0, diversity: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColorShare {
    pub name: String,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColorProfile {
    /// Up to three palette colors, largest share first.
    pub dominant: Vec<ColorShare>,
    pub mean_lab: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrerankResult {
    pub template_id: String,
    pub color_score: f64,
    pub clash: bool,
    pub recall_total: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum PrerankError {
    #[error("product image has no opaque pixel")]
    AllTransparent,
    #[error("template {0} declares no color")]
    NoDeclaredColor(String),
    #[error("every candidate clashes with the product colors")]
    ClashExhausted,
    #[error("no recall candidates to pre-rank")]
    NoCandidates,
    #[error("unknown template {0}")]
    UnknownTemplate(String),
}

/// Dominant palette colors of the opaque pixels of a cutout.
pub fn color_profile(img: &RgbaImage, palette: &Palette) -> Result<ColorProfile, PrerankError> {
    let mut counts = vec![0u64; palette.len()];
    let mut cache: HashMap<[u8; 3], usize> = HashMap::new();
    let mut total = 0u64;
    let (mut sl, mut sa, mut sb) = (0.0, 0.0, 0.0);
    for p in img.pixels() {
        if p[3] == 0 {
            continue;
        }
        let key = [p[0], p[1], p[2]];
        let idx = *cache.entry(key).or_insert_with(|| palette.classify_index(Rgb(key[0], key[1], key[2])));
        counts[idx] += 1;
        total += 1;
        let lab = Lab::from_rgb(Rgb(key[0], key[1], key[2]));
        sl += lab.l;
        sa += lab.a;
        sb += lab.b;
    }
    if total == 0 {
        return Err(PrerankError::AllTransparent);
    }
    let mut ranked: Vec<(usize, u64)> = counts.into_iter().enumerate().filter(|&(_, c)| c > 0).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let n = total as f64;
    Ok(ColorProfile {
        dominant: ranked
            .into_iter()
            .take(3)
            .map(|(i, c)| ColorShare { name: palette.name(i).to_string(), share: c as f64 / n })
            .collect(),
        mean_lab: [sl / n, sa / n, sb / n],
    })
}

/// Merges several product profiles into one, weighting each product equally.
pub fn merge_profiles(profiles: &[ColorProfile]) -> ColorProfile {
    let mut shares: Vec<(String, f64)> = Vec::new();
    let n = profiles.len().max(1) as f64;
    let mut mean = [0.0; 3];
    for p in profiles {
        for d in &p.dominant {
            match shares.iter_mut().find(|(name, _)| *name == d.name) {
                Some((_, s)) => *s += d.share / n,
                None => shares.push((d.name.clone(), d.share / n)),
            }
        }
        for k in 0..3 {
            mean[k] += p.mean_lab[k] / n;
        }
    }
    shares.sort_by(|a, b| b.1.total_cmp(&a.1));
    shares.truncate(3);
    ColorProfile {
        dominant: shares.into_iter().map(|(name, share)| ColorShare { name, share }).collect(),
        mean_lab: mean,
    }
}

/// 1 − (share-weighted mean anchor distance) / (largest anchor distance).
pub fn color_score(profile: &ColorProfile, t: &Template, palette: &Palette) -> Result<f64, PrerankError> {
    let template_colors: Vec<usize> = t.product_colors().into_iter().map(|c| palette.classify_index(c)).collect();
    if template_colors.is_empty() {
        return Err(PrerankError::NoDeclaredColor(t.id.clone()));
    }
    let mut weighted = 0.0;
    let mut weight = 0.0;
    for d in &profile.dominant {
        let Some(pi) = palette.index_of(&d.name) else { continue };
        let mean_d: f64 = template_colors.iter().map(|&ti| palette.anchor_distance(pi, ti)).sum::<f64>()
            / template_colors.len() as f64;
        weighted += d.share * mean_d;
        weight += d.share;
    }
    if weight == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 - (weighted / weight) / palette.max_distance()).clamp(0.0, 1.0))
}

/// Near-complementary, highly saturated pair between the product's dominant
/// colors and any declared template color.
pub fn clash(profile: &ColorProfile, t: &Template, palette: &Palette, cfg: &PrerankConfig) -> bool {
    let product: Vec<_> = profile
        .dominant
        .iter()
        .filter_map(|d| palette.anchor_by_name(&d.name).ok())
        .map(Rgb::to_hsv)
        .filter(|h| h.s > cfg.clash_saturation)
        .collect();
    if product.is_empty() {
        return false;
    }
    t.layers.iter().filter_map(|l| l.color).map(Rgb::to_hsv).filter(|h| h.s > cfg.clash_saturation).any(|th| {
        product.iter().any(|ph| {
            let diff = (ph.h - th.h).abs();
            diff >= cfg.clash_hue_min && diff <= cfg.clash_hue_max
        })
    })
}

/// Drops clashing candidates, orders by color score and enforces the
/// diversity quotas over the first `top_k` positions.
pub fn prerank(
    recall: &[RecallResult],
    profile: &ColorProfile,
    library: &TemplateLibrary,
    cfg: &PrerankConfig,
    top_k: usize,
) -> Result<Vec<PrerankResult>, PrerankError> {
    if recall.is_empty() {
        return Err(PrerankError::NoCandidates);
    }
    let mut kept = Vec::new();
    for r in recall {
        let t = library.get(&r.template_id).ok_or_else(|| PrerankError::UnknownTemplate(r.template_id.clone()))?;
        if clash(profile, t, &library.palette, cfg) {
            continue;
        }
        let color_score = match color_score(profile, t, &library.palette) {
            Ok(s) => s,
            Err(PrerankError::NoDeclaredColor(_)) => 0.0,
            Err(e) => return Err(e),
        };
        kept.push(PrerankResult {
            template_id: r.template_id.clone(),
            color_score,
            clash: false,
            recall_total: r.total_score,
        });
    }
    if kept.is_empty() {
        return Err(PrerankError::ClashExhausted);
    }
    kept.sort_by(|a, b| {
        b.color_score
            .total_cmp(&a.color_score)
            .then(b.recall_total.total_cmp(&a.recall_total))
            .then_with(|| a.template_id.cmp(&b.template_id))
    });
    if !cfg.diversity {
        return Ok(kept);
    }
    let groups: Vec<(String, usize)> = kept
        .iter()
        .map(|r| {
            let t = &library.templates[&r.template_id];
            let family = t.background().and_then(|b| b.color).map_or(usize::MAX, |c| library.palette.classify_index(c));
            (t.series_id.clone(), family)
        })
        .collect();
    Ok(diversify(kept, &groups, top_k))
}

/// Greedy quota fill: each of the first `k` positions takes the best
/// remaining candidate whose series and color family are still under
/// ceil(k/2); when no candidate qualifies the best remaining one is taken.
pub(crate) fn diversify<T>(items: Vec<T>, groups: &[(String, usize)], k: usize) -> Vec<T> {
    let quota = k.div_ceil(2);
    let mut remaining: Vec<usize> = (0..items.len()).collect();
    let mut order = Vec::with_capacity(items.len());
    let mut series: HashMap<&str, usize> = HashMap::new();
    let mut family: HashMap<usize, usize> = HashMap::new();
    while !remaining.is_empty() && order.len() < k {
        let pick = remaining
            .iter()
            .position(|&i| {
                let (s, f) = &groups[i];
                series.get(s.as_str()).copied().unwrap_or(0) < quota
                    && (*f == usize::MAX || family.get(f).copied().unwrap_or(0) < quota)
            })
            .unwrap_or(0);
        let i = remaining.remove(pick);
        *series.entry(groups[i].0.as_str()).or_default() += 1;
        *family.entry(groups[i].1).or_default() += 1;
        order.push(i);
    }
    order.extend(remaining);
    let mut slots: Vec<Option<T>> = items.into_iter().map(Some).collect();
    order.into_iter().map(|i| slots[i].take().expect("each index once")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::test_support::sample_template;
    use image::Rgba;

    fn palette() -> Palette {
        Palette::default()
    }

    fn profile_of(names: &[(&str, f64)]) -> ColorProfile {
        ColorProfile {
            dominant: names.iter().map(|(n, s)| ColorShare { name: n.to_string(), share: *s }).collect(),
            mean_lab: [0.0; 3],
        }
    }

    #[test]
    fn uniform_red_profile() {
        let img = RgbaImage::from_pixel(4, 4, Rgba([255, 0, 0, 255]));
        let p = color_profile(&img, &palette()).unwrap();
        assert_eq!(p.dominant, vec![ColorShare { name: "red".into(), share: 1.0 }]);
    }

    #[test]
    fn seventy_thirty_split() {
        let mut img = RgbaImage::from_pixel(10, 10, Rgba([255, 0, 0, 255]));
        for (i, px) in img.pixels_mut().enumerate() {
            if i >= 70 {
                *px = Rgba([0, 0, 0, 255]);
            }
        }
        let p = color_profile(&img, &palette()).unwrap();
        assert_eq!(p.dominant.len(), 2);
        assert_eq!((p.dominant[0].name.as_str(), p.dominant[0].share), ("red", 0.7));
        assert_eq!((p.dominant[1].name.as_str(), p.dominant[1].share), ("black", 0.3));
    }

    #[test]
    fn transparent_pixels_are_ignored() {
        let img = RgbaImage::from_pixel(3, 3, Rgba([255, 0, 0, 0]));
        assert_eq!(color_profile(&img, &palette()), Err(PrerankError::AllTransparent));
    }

    #[test]
    fn same_color_scores_one() {
        let t = sample_template(); // red background and red product slot
        let s = color_score(&profile_of(&[("red", 1.0)]), &t, &palette()).unwrap();
        assert_eq!(s, 1.0);
    }

    #[test]
    fn weighted_two_color_score() {
        let p = palette();
        let t = sample_template();
        let s = color_score(&profile_of(&[("red", 0.5), ("blue", 0.5)]), &t, &p).unwrap();
        let (r, b) = (p.index_of("red").unwrap(), p.index_of("blue").unwrap());
        let expected = 1.0 - 0.5 * p.anchor_distance(b, r) / p.max_distance();
        assert!((s - expected).abs() < 1e-12);
    }

    #[test]
    fn clash_needs_saturation_and_opposed_hues() {
        let p = palette();
        let cfg = PrerankConfig::default();
        let mut t = sample_template();
        for l in &mut t.layers {
            l.color = None;
        }
        t.layers[0].color = Some(p.anchor_by_name("turquoise").unwrap());
        assert!(clash(&profile_of(&[("red", 1.0)]), &t, &p, &cfg));
        t.layers[0].color = Some(p.anchor_by_name("orange").unwrap());
        assert!(!clash(&profile_of(&[("red", 1.0)]), &t, &p, &cfg));
        for gray in ["white", "black"] {
            t.layers[0].color = Some(p.anchor_by_name(gray).unwrap());
            assert!(!clash(&profile_of(&[("red", 1.0)]), &t, &p, &cfg));
        }
    }

    #[test]
    fn diversity_caps_a_series() {
        let items = vec!["a", "b", "c", "d"];
        let groups = vec![("S1".to_string(), 0), ("S1".to_string(), 1), ("S1".to_string(), 2), ("S2".to_string(), 3)];
        assert_eq!(diversify(items, &groups, 4), vec!["a", "b", "d", "c"]);
    }

    #[test]
    fn diversity_caps_a_color_family() {
        let items = vec![1, 2, 3, 4, 5];
        let groups: Vec<(String, usize)> = (0..5).map(|i| (format!("s{i}"), if i < 3 { 7 } else { i })).collect();
        // k=3: quota 2 per family, so the third red-family entry yields to item 4
        assert_eq!(diversify(items, &groups, 3), vec![1, 2, 4, 3, 5]);
    }
}
