//! Regenerates the checked-in fixture set.
//!
//! cargo run --release -p bannerforge --example gen_fixtures [-- <dir>]

use std::fs;
use std::path::{Path, PathBuf};

use image::{Rgba, RgbaImage};

use bannerforge::actuator::{samples_from_library, train_text_net, TextNetConfig, TypesettingForm};
use bannerforge::adjuster::{ElementManifest, ElementRecord, ELEMENT_MANIFEST};
use bannerforge::color::{Palette, Rgb};
use bannerforge::evaluator::synthetic::{build_template, synthetic_library, Recipe};
use bannerforge::evaluator::{simulate_log, PlantedSignal};
use bannerforge::fixtures::{default_fixture_root, write_manifest, FIXTURE_MANIFEST};
use bannerforge::generator::encode_png;
use bannerforge::planner::rank::{train_from_log, RankConfig};
use bannerforge::template::{load_library, Template, TemplateLibrary};

const SEED: u64 = 20240601;

fn save(img: &RgbaImage, path: &Path) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, encode_png(img)).unwrap();
}

fn rgba(c: Rgb, a: u8) -> Rgba<u8> {
    Rgba([c.0, c.1, c.2, a])
}

fn shade(c: Rgb, f: f64) -> Rgb {
    let s = |v: u8| (v as f64 * f).round().clamp(0.0, 255.0) as u8;
    Rgb(s(c.0), s(c.1), s(c.2))
}

/// Product cutout: a rounded body with a darker base on a transparent field.
fn product(w: u32, h: u32, color: Rgb) -> RgbaImage {
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let (rx, ry) = (w as f64 * 0.46, h as f64 * 0.46);
    RgbaImage::from_fn(w, h, |x, y| {
        let dx = (x as f64 + 0.5 - cx) / rx;
        let dy = (y as f64 + 0.5 - cy) / ry;
        // superellipse, exponent 4
        if dx.powi(4) + dy.powi(4) > 1.0 {
            return Rgba([0, 0, 0, 0]);
        }
        let c = if dy > 0.55 {
            shade(color, 0.7)
        } else if dy < -0.6 && dx.abs() < 0.3 {
            shade(color, 1.2)
        } else {
            color
        };
        rgba(c, 255)
    })
}

fn gradient(w: u32, h: u32, top: Rgb, bottom: Rgb) -> RgbaImage {
    RgbaImage::from_fn(w, h, |_, y| {
        let t = y as f64 / (h - 1) as f64;
        let m = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
        Rgba([m(top.0, bottom.0), m(top.1, bottom.1), m(top.2, bottom.2), 255])
    })
}

/// White coverage shapes; the renderer tints them with the layer color.
fn star(size: u32) -> RgbaImage {
    let c = size as f64 / 2.0;
    RgbaImage::from_fn(size, size, |x, y| {
        let (dx, dy) = (x as f64 + 0.5 - c, y as f64 + 0.5 - c);
        let r = (dx * dx + dy * dy).sqrt() / c;
        let a = dy.atan2(dx);
        let edge = 0.55 + 0.4 * (5.0 * a).cos().abs();
        if r <= edge {
            Rgba([255, 255, 255, 255])
        } else {
            Rgba([0, 0, 0, 0])
        }
    })
}

fn ring(size: u32) -> RgbaImage {
    let c = size as f64 / 2.0;
    RgbaImage::from_fn(size, size, |x, y| {
        let r = ((x as f64 + 0.5 - c).powi(2) + (y as f64 + 0.5 - c).powi(2)).sqrt() / c;
        if (0.6..=0.95).contains(&r) {
            Rgba([255, 255, 255, 255])
        } else {
            Rgba([0, 0, 0, 0])
        }
    })
}

fn corner(size: u32) -> RgbaImage {
    RgbaImage::from_fn(size, size, |x, y| if x + y < size { Rgba([255, 255, 255, 255]) } else { Rgba([0, 0, 0, 0]) })
}

fn pill(w: u32, h: u32) -> RgbaImage {
    let r = h as f64 / 2.0;
    RgbaImage::from_fn(w, h, |x, y| {
        let px = (x as f64 + 0.5).clamp(r, w as f64 - r);
        let d = ((x as f64 + 0.5 - px).powi(2) + (y as f64 + 0.5 - r).powi(2)).sqrt();
        if d <= r {
            Rgba([255, 255, 255, 230])
        } else {
            Rgba([0, 0, 0, 0])
        }
    })
}

fn logo() -> RgbaImage {
    RgbaImage::from_fn(128, 48, |x, y| {
        let on = (x / 16 + y / 16) % 2 == 0 && (4..124).contains(&x) && (4..44).contains(&y);
        if on {
            Rgba([30, 30, 30, 255])
        } else {
            Rgba([0, 0, 0, 0])
        }
    })
}

struct Entry {
    id: &'static str,
    series: &'static str,
    size: (u32, u32),
    form: TypesettingForm,
    texts: &'static [&'static str],
    slots: usize,
    aspect: f64,
    bg: &'static str,
    accent: &'static str,
    style: &'static str,
    category: &'static str,
    masks: bool,
    trim: bool,
    free: bool,
    logo: bool,
    bg_asset: bool,
}

#[rustfmt::skip]
const TEMPLATES: &[Entry] = {
    use TypesettingForm::*;
    &[
        Entry { id: "t01", series: "S1", size: (800, 800), form: CenteredSingle, texts: &["Summer mega sale"], slots: 1, aspect: 1.0, bg: "red", accent: "yellow", style: "festive", category: "apparel", masks: true, trim: true, free: false, logo: true, bg_asset: false },
        Entry { id: "t02", series: "S1", size: (800, 800), form: LeftStackedTwo, texts: &["New season arrivals", "Fresh styles for every day"], slots: 2, aspect: 0.8, bg: "white", accent: "red", style: "minimal", category: "apparel", masks: false, trim: false, free: true, logo: true, bg_asset: false },
        Entry { id: "t03", series: "S2", size: (800, 400), form: CenteredStackedTwo, texts: &["Gear up", "Top picks for the season"], slots: 3, aspect: 1.0, bg: "blue", accent: "white", style: "sport", category: "electronics", masks: true, trim: false, free: false, logo: false, bg_asset: false },
        Entry { id: "t04", series: "S2", size: (1200, 600), form: LeftStackedThree, texts: &["Luxury week", "Exclusive collection", "Shop now"], slots: 4, aspect: 1.2, bg: "black", accent: "yellow", style: "luxury", category: "beauty", masks: false, trim: true, free: true, logo: true, bg_asset: false },
        Entry { id: "t05", series: "S3", size: (600, 800), form: CenteredStackedThree, texts: &["Fresh market", "Farm to table every morning", "Order today"], slots: 5, aspect: 0.9, bg: "olivine", accent: "green", style: "minimal", category: "food", masks: true, trim: false, free: false, logo: false, bg_asset: true },
        Entry { id: "t06", series: "S3", size: (750, 1000), form: MainWithActionTag, texts: &["Holiday gifts", "Wrapped and ready to send", "Buy now"], slots: 6, aspect: 0.7, bg: "wine", accent: "orange", style: "festive", category: "beauty", masks: true, trim: true, free: true, logo: true, bg_asset: false },
        Entry { id: "t07", series: "S4", size: (800, 800), form: Staggered, texts: &["Weekend flash deal", "Up to half off"], slots: 1, aspect: 0.6, bg: "turquoise", accent: "white", style: "sport", category: "electronics", masks: false, trim: true, free: false, logo: false, bg_asset: false },
        Entry { id: "t08", series: "S4", size: (800, 400), form: MainWithActionTag, texts: &["Limited offer today", "Get it"], slots: 2, aspect: 1.5, bg: "indigo", accent: "magenta", style: "festive", category: "apparel", masks: false, trim: false, free: true, logo: true, bg_asset: false },
        Entry { id: "t09", series: "S5", size: (1200, 600), form: CenteredSingle, texts: &["Best prices of the year"], slots: 3, aspect: 1.4, bg: "white", accent: "blue", style: "minimal", category: "electronics", masks: false, trim: false, free: false, logo: true, bg_asset: true },
        Entry { id: "t10", series: "S5", size: (600, 800), form: LeftStackedTwo, texts: &["Glow up", "Skincare essentials in one kit"], slots: 1, aspect: 0.5, bg: "magenta", accent: "white", style: "luxury", category: "beauty", masks: true, trim: false, free: true, logo: false, bg_asset: false },
        Entry { id: "t11", series: "S6", size: (800, 800), form: Staggered, texts: &["Back to school", "Everything for class", "Save more"], slots: 4, aspect: 1.0, bg: "orange", accent: "purple", style: "festive", category: "apparel", masks: false, trim: true, free: false, logo: true, bg_asset: false },
        Entry { id: "t12", series: "S6", size: (750, 1000), form: CenteredStackedTwo, texts: &["Taste of autumn", "Seasonal flavors delivered"], slots: 2, aspect: 0.8, bg: "grass", accent: "yellow", style: "minimal", category: "food", masks: true, trim: true, free: true, logo: false, bg_asset: false },
        Entry { id: "t13", series: "S7", size: (800, 800), form: LeftStackedThree, texts: &["Tech days", "Smart devices smart prices", "Learn more"], slots: 2, aspect: 1.3, bg: "purple", accent: "turquoise", style: "sport", category: "electronics", masks: true, trim: false, free: false, logo: true, bg_asset: false },
        Entry { id: "t14", series: "S7", size: (800, 400), form: CenteredSingle, texts: &["Free shipping all week"], slots: 1, aspect: 2.0, bg: "yellow", accent: "black", style: "minimal", category: "food", masks: false, trim: true, free: false, logo: false, bg_asset: false },
        Entry { id: "t15", series: "S8", size: (1200, 600), form: MainWithActionTag, texts: &["Grand opening celebration", "Join us"], slots: 1, aspect: 1.0, bg: "green", accent: "white", style: "festive", category: "food", masks: true, trim: false, free: true, logo: true, bg_asset: false },
        Entry { id: "t16", series: "S8", size: (600, 800), form: CenteredSingle, texts: &["Classic never fades"], slots: 6, aspect: 0.6, bg: "black", accent: "red", style: "luxury", category: "apparel", masks: true, trim: true, free: false, logo: false, bg_asset: false },
    ]
};

fn fixture_templates(palette: &Palette) -> Vec<Template> {
    TEMPLATES
        .iter()
        .map(|s| {
            let mut r = Recipe::new(s.id, s.size, s.form, s.texts, s.slots);
            r.series_id = s.series.into();
            r.slot_aspect = s.aspect;
            r.background = s.bg.into();
            r.accent = s.accent.into();
            r.style_tags = vec![s.style.into()];
            r.category_tags = vec![s.category.into(), "general".into()];
            r.department_ids = vec![1, 2, 3];
            r.capacities = s.texts.iter().map(|t| (t.split_whitespace().count() as u32 * 2).clamp(4, 20)).collect();
            r.masks = s.masks;
            r.trim_ornament = s.trim;
            r.free_ornament = s.free;
            r.logo = s.logo;
            r.background_asset = s.bg_asset.then(|| "assets/bg-gradient.png".to_string());
            r.ornament_asset = Some("assets/ornament-star.png".into());
            r.logo_asset = s.logo.then(|| "assets/logo.png".to_string());
            build_template(&r, palette)
        })
        .collect()
}

fn write_library(root: &Path, palette: &Palette) -> TemplateLibrary {
    let dir = root.join("library");
    let lib = TemplateLibrary::from_templates("fixture-library", palette.clone(), fixture_templates(palette));
    lib.write_descriptors(&dir).unwrap();
    save(&gradient(256, 256, Rgb(250, 250, 240), Rgb(200, 220, 180)), &dir.join("assets/bg-gradient.png"));
    save(&star(64), &dir.join("assets/ornament-star.png"));
    save(&logo(), &dir.join("assets/logo.png"));
    load_library(&dir).expect("fixture library lints clean")
}

/// Three templates, each with deliberate violations.
fn write_broken(root: &Path, lib: &TemplateLibrary) {
    let dir = root.join("broken-library");
    lib.write_descriptors(&dir).unwrap();
    fs::create_dir_all(dir.join("assets")).unwrap();
    for a in ["bg-gradient.png", "ornament-star.png", "logo.png"] {
        fs::copy(root.join("library/assets").join(a), dir.join("assets").join(a)).unwrap();
    }
    let edit = |id: &str, f: &dyn Fn(&mut serde_json::Value)| {
        let p = dir.join(format!("templates/{id}.json"));
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        f(&mut v);
        fs::write(&p, serde_json::to_string_pretty(&v).unwrap() + "\n").unwrap();
    };
    let layer = |v: &mut serde_json::Value, name: &str| -> usize {
        v["layers"].as_array().unwrap().iter().position(|l| l["name"] == name).unwrap()
    };
    // bbox past the canvas edge, capacity above the bound
    edit("t01", &|v| {
        let i = layer(v, "product-1");
        v["layers"][i]["bbox"][0] = serde_json::json!(700.0);
        let t = layer(v, "text-main");
        v["layers"][t]["capacity"] = serde_json::json!(40);
    });
    // mask with no binding, unknown layer name
    edit("t03", &|v| {
        let i = layer(v, "mc-c");
        v["layers"][i].as_object_mut().unwrap().remove("bound_to");
        let o = layer(v, "text-sub");
        let mut extra = v["layers"][o].clone();
        extra["name"] = serde_json::json!("sparkle-1");
        let n = v["layers"].as_array().unwrap().len();
        extra["z"] = serde_json::json!(n);
        extra.as_object_mut().unwrap().remove("capacity");
        v["layers"].as_array_mut().unwrap().push(extra);
    });
    // ornament bound to a missing layer, duplicate z
    edit("t02", &|v| {
        let i = layer(v, "ornament-b-1");
        v["layers"][i]["bound_to"] = serde_json::json!("text-action");
        v["layers"][0]["z"] = serde_json::json!(1);
    });
    // keep only the broken three plus one clean template
    let keep = ["t01", "t02", "t03", "t04"];
    let manifest_path = dir.join("manifest.json");
    let mut m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest_path).unwrap()).unwrap();
    m["name"] = serde_json::json!("broken-fixture-library");
    m["templates"] = serde_json::json!(keep.iter().map(|k| format!("templates/{k}.json")).collect::<Vec<_>>());
    fs::write(&manifest_path, serde_json::to_string_pretty(&m).unwrap() + "\n").unwrap();
    for t in lib.iter() {
        if !keep.contains(&t.id.as_str()) {
            fs::remove_file(dir.join(format!("templates/{}.json", t.id))).unwrap();
        }
    }
}

fn write_elements(root: &Path) -> usize {
    let dir = root.join("elements");
    let mut assets = Vec::new();
    let mut add = |id: &str, family: &str, style: &[&str], color: &str, img: RgbaImage| {
        let path = format!("{id}.png");
        save(&img, &dir.join(&path));
        assets.push(ElementRecord {
            id: id.into(),
            family: family.into(),
            style_tags: style.iter().map(|s| s.to_string()).collect(),
            color: color.into(),
            path,
            size: [img.width(), img.height()],
        });
    };
    add("corner-gold", "ornament-a", &["luxury", "festive"], "yellow", corner(64));
    add("corner-red", "ornament-a", &["festive"], "red", corner(64));
    add("corner-white", "ornament-a", &["minimal", "sport"], "white", corner(48));
    add("star-gold", "ornament-b", &["festive", "luxury"], "yellow", star(64));
    add("ring-blue", "ornament-b", &["sport"], "blue", ring(64));
    add("ring-black", "ornament-b", &["minimal"], "black", ring(48));
    add("pill-red", "mc-c", &["festive"], "red", pill(160, 48));
    add("pill-white", "mc-c", &["minimal", "sport"], "white", pill(160, 48));
    add("pill-black", "mc-c", &["luxury"], "black", pill(160, 48));
    add("band-orange", "mc-d", &["festive", "sport"], "orange", pill(200, 40));
    add("band-white", "mc-d", &["minimal", "luxury"], "white", pill(200, 40));
    add("tag-magenta", "mc-e", &["festive"], "magenta", pill(96, 40));
    add("tag-black", "mc-e", &["minimal", "luxury", "sport"], "black", pill(96, 40));
    assets.sort_by(|a, b| a.id.cmp(&b.id));
    let n = assets.len();
    let m = ElementManifest { schema_version: 1, assets };
    fs::write(dir.join(ELEMENT_MANIFEST), serde_json::to_string_pretty(&m).unwrap() + "\n").unwrap();
    n
}

/// Name, size and body color of each product cutout.
const PRODUCTS: &[(&str, u32, u32, Rgb)] = &[
    ("square-red", 160, 160, Rgb(220, 40, 40)),
    ("square-blue", 160, 160, Rgb(40, 70, 200)),
    ("tall-green", 100, 200, Rgb(40, 150, 60)),
    ("tall-white", 100, 200, Rgb(235, 235, 235)),
    ("slender-black", 80, 200, Rgb(30, 30, 30)),
    ("wide-orange", 240, 120, Rgb(240, 140, 20)),
    ("wide-gray", 240, 120, Rgb(128, 128, 128)),
    ("landscape-purple", 224, 160, Rgb(120, 40, 140)),
    ("portrait-yellow", 150, 200, Rgb(240, 220, 40)),
    ("bottle-teal", 160, 200, Rgb(40, 160, 150)),
];

fn write_products(root: &Path) {
    for &(name, w, h, c) in PRODUCTS {
        save(&product(w, h, c), &root.join(format!("products/{name}.png")));
    }
}

fn write_requests(root: &Path) -> usize {
    // product groups chosen so every arrangement branch is exercised
    let groups: &[&[&str]] = &[
        &["square-red"],
        &["tall-green", "tall-white"],
        &["square-blue", "square-red"],
        &["wide-orange", "wide-gray"],
        &["slender-black", "slender-black", "slender-black"],
        &["portrait-yellow", "bottle-teal", "portrait-yellow"],
        &["wide-orange", "wide-gray", "landscape-purple"],
        &["portrait-yellow", "wide-orange", "wide-gray"],
        &["square-red", "square-blue", "square-red"],
        &["wide-orange", "wide-gray", "landscape-purple", "wide-gray"],
        &["tall-green", "tall-white", "tall-green", "slender-black"],
        &["square-red", "tall-green", "wide-gray", "square-blue", "bottle-teal"],
        &["square-red", "square-blue", "tall-white", "wide-orange", "portrait-yellow", "bottle-teal"],
    ];
    let texts: &[&[&str]] = &[
        &["Summer sale"],
        &["New arrivals", "Fresh picks for you"],
        &["Big savings", "Everything must go", "Shop now"],
        &["Flash deal today only"],
        &["Weekend special", "Two for one"],
        &["Limited edition", "Only a few left", "Order now"],
        &["Best price guaranteed", "Compare and save"],
        &["Holiday collection"],
        &["Back in stock", "Your favorites returned", "Get yours"],
        &["Deal of the day", "Half price on selected items"],
    ];
    let sizes = ["800x800", "800x400", "1200x600", "600x800", "750x1000", "640x640", "900x600", "1000x500", "720x960"];
    let mut lines = vec!["# one request per line; product paths are relative to this file".to_string()];
    for i in 0..50 {
        let g = groups[i % groups.len()];
        let t = texts[(i * 7 + 3) % texts.len()];
        let size = sizes[(i * 5 + 1) % sizes.len()];
        let mut words = Vec::new();
        for p in g {
            words.push("--product".to_string());
            words.push(format!("products/{p}.png"));
        }
        for line in t {
            words.push("--text".into());
            words.push(line.to_string());
        }
        words.push("--size".into());
        words.push(size.into());
        words.push("--department".into());
        words.push(((i % 3) + 1).to_string());
        words.push("--name".into());
        words.push(format!("req-{:02}", i + 1));
        lines.push(shlex::try_join(words.iter().map(String::as_str)).unwrap());
    }
    fs::write(root.join("requests.txt"), lines.join("\n") + "\n").unwrap();
    50
}

fn write_models(root: &Path, lib: &TemplateLibrary) {
    let dir = root.join("models");
    fs::create_dir_all(&dir).unwrap();
    let planted = PlantedSignal::default();
    let log = simulate_log(lib, lib.len(), 10, &planted, SEED).unwrap();
    let mut cfg = RankConfig::default();
    cfg.params.min_leaf = 4;
    let model = train_from_log(lib, &log, &cfg, |p| p <= 8).unwrap();
    model.save(&dir.join("rank.json")).unwrap();
    let mut f = fs::File::create(dir.join("clicks.csv")).unwrap();
    bannerforge::planner::rank::write_click_log(&mut f, &log).unwrap();

    let mut samples = samples_from_library(lib);
    samples.extend(samples_from_library(&synthetic_library(300, SEED, &lib.palette)));
    let (net, history) = train_text_net(&samples, &TextNetConfig::default(), SEED).unwrap();
    eprintln!("textnet: {} samples, final loss {:.5}", samples.len(), history.last().unwrap());
    net.save(&dir.join("textnet.json")).unwrap();
}

const ENGINE_TOML: &str = r#"# Engine config for the fixture set. Paths are relative to this file.
seed = 7

[paths]
library = "library"
elements = "elements"
rank_model = "models/rank.json"
text_model = "models/textnet.json"

[recall]
top_k = 8

[search]
budget = 200
patience = 30
"#;

fn main() {
    let root: PathBuf = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(default_fixture_root);
    if root.exists() {
        assert!(root.join(FIXTURE_MANIFEST).exists(), "{} exists but is not a fixture dir", root.display());
        fs::remove_dir_all(&root).unwrap();
    }
    fs::create_dir_all(&root).unwrap();
    let palette = Palette::default();
    let lib = write_library(&root, &palette);
    write_broken(&root, &lib);
    let elements = write_elements(&root);
    write_products(&root);
    let requests = write_requests(&root);
    write_models(&root, &lib);
    fs::write(root.join("engine.toml"), ENGINE_TOML).unwrap();
    let m = write_manifest(&root).unwrap();
    eprintln!(
        "fixtures: {} templates, {} elements, {} products, {} requests, {} files",
        lib.len(),
        elements,
        PRODUCTS.len(),
        requests,
        m.files.len()
    );
}
