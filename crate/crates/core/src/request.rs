//! User input: product cutouts, text lines, target size.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser};
use image::RgbaImage;
use thiserror::Error;

use crate::template::{MAX_TEXT_LINES, WORD_CAPACITY_MAX};

#[derive(Debug, Clone)]
pub struct ProductInput {
    pub source: Option<PathBuf>,
    pub image: Arc<RgbaImage>,
    pub category: Option<String>,
}

impl ProductInput {
    pub fn new(image: RgbaImage, category: Option<&str>) -> ProductInput {
        ProductInput { source: None, image: Arc::new(image), category: category.map(str::to_string) }
    }

    /// Width over height of the cutout raster.
    pub fn aspect(&self) -> f64 {
        self.image.width() as f64 / self.image.height() as f64
    }

    /// Pixel area of the raster, used to order products for slot assignment.
    pub fn area(&self) -> u64 {
        self.image.width() as u64 * self.image.height() as u64
    }
}

#[derive(Debug, Clone)]
pub struct BannerRequest {
    pub products: Vec<ProductInput>,
    /// Text lines in role order: main, sub, action.
    pub texts: Vec<String>,
    pub target_width: u32,
    pub target_height: u32,
    pub department_id: i64,
    pub style_hint: Option<String>,
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum RequestError {
    #[error("expected 1 to {MAX_TEXT_LINES} text lines, got {0}")]
    TextLineCount(usize),
    #[error("text line {line} has {count} words; allowed 1 to {WORD_CAPACITY_MAX}")]
    WordCount { line: usize, count: usize },
    #[error("at least one product is required")]
    NoProducts,
    #[error("target size must be positive, got {0}x{1}")]
    ZeroSize(u32, u32),
    #[error("invalid size {0:?} (expected WxH)")]
    BadSize(String),
    #[error("cannot read product image {path}: {message}")]
    ProductImage { path: String, message: String },
    #[error("bad request line: {0}")]
    Syntax(String),
}

pub(crate) fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF      // kana
        | 0x3400..=0x4DBF    // CJK ext A
        | 0x4E00..=0x9FFF    // CJK unified
        | 0xAC00..=0xD7AF    // hangul
        | 0xF900..=0xFAFF
        | 0x20000..=0x2FA1F)
}

/// Whitespace-delimited words for Latin script; every CJK codepoint counts
/// as one word on its own.
pub fn word_count(text: &str) -> usize {
    let mut count = 0;
    for token in text.split_whitespace() {
        let mut in_word = false;
        for c in token.chars() {
            if is_cjk(c) {
                count += 1;
                in_word = false;
            } else if !in_word {
                count += 1;
                in_word = true;
            }
        }
    }
    count
}

impl BannerRequest {
    pub fn validate(&self) -> Result<(), RequestError> {
        if self.texts.is_empty() || self.texts.len() > MAX_TEXT_LINES {
            return Err(RequestError::TextLineCount(self.texts.len()));
        }
        for (i, t) in self.texts.iter().enumerate() {
            let count = word_count(t);
            if count == 0 || count > WORD_CAPACITY_MAX as usize {
                return Err(RequestError::WordCount { line: i + 1, count });
            }
        }
        if self.products.is_empty() {
            return Err(RequestError::NoProducts);
        }
        if self.target_width == 0 || self.target_height == 0 {
            return Err(RequestError::ZeroSize(self.target_width, self.target_height));
        }
        Ok(())
    }

    pub fn line_count(&self) -> usize {
        self.texts.len()
    }

    pub fn avg_word_count(&self) -> f64 {
        let total: usize = self.texts.iter().map(|t| word_count(t)).sum();
        total as f64 / self.texts.len().max(1) as f64
    }

    pub fn target_size(&self) -> (u32, u32) {
        (self.target_width, self.target_height)
    }

    pub fn product_categories(&self) -> impl Iterator<Item = &str> {
        self.products.iter().filter_map(|p| p.category.as_deref())
    }
}

pub fn parse_size(s: &str) -> Result<(u32, u32), RequestError> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| RequestError::BadSize(s.to_string()))?;
    let w: u32 = w.trim().parse().map_err(|_| RequestError::BadSize(s.to_string()))?;
    let h: u32 = h.trim().parse().map_err(|_| RequestError::BadSize(s.to_string()))?;
    if w == 0 || h == 0 {
        return Err(RequestError::ZeroSize(w, h));
    }
    Ok((w, h))
}

/// Request flags shared by `synth` and by each line of a batch file.
#[derive(Debug, Clone, Args, PartialEq)]
pub struct RequestArgs {
    /// Product cutout PNG, optionally suffixed with `:category` (repeatable)
    #[arg(long = "product", value_name = "PATH[:CATEGORY]", required = true)]
    pub products: Vec<String>,
    /// Text line in role order main, sub, action (1 to 3 times)
    #[arg(long = "text", value_name = "TEXT", required = true)]
    pub texts: Vec<String>,
    /// Target banner size
    #[arg(long, value_name = "WxH")]
    pub size: String,
    /// Department id used for template screening
    #[arg(long)]
    pub department: i64,
    /// Style tag the template must carry
    #[arg(long)]
    pub style: Option<String>,
    /// Output file stem
    #[arg(long)]
    pub name: Option<String>,
    /// Per-request seed; overrides the global seed
    #[arg(long = "request-seed")]
    pub request_seed: Option<u64>,
}

#[derive(Debug, Parser)]
#[command(name = "request", no_binary_name = true, disable_help_flag = true)]
struct RequestLine {
    #[command(flatten)]
    args: RequestArgs,
}

/// Parses one line of a batch file (shell-quoted request flags).
pub fn parse_request_line(line: &str) -> Result<RequestArgs, RequestError> {
    let words = shlex::split(line).ok_or_else(|| RequestError::Syntax("unbalanced quotes".into()))?;
    RequestLine::try_parse_from(words)
        .map(|r| r.args)
        .map_err(|e| RequestError::Syntax(e.to_string().lines().next().unwrap_or_default().to_string()))
}

impl RequestArgs {
    /// Loads product images (paths relative to `base`) and builds a request.
    pub fn to_request(&self, base: &Path, default_seed: u64) -> Result<BannerRequest, RequestError> {
        let (target_width, target_height) = parse_size(&self.size)?;
        let mut products = Vec::with_capacity(self.products.len());
        for spec in &self.products {
            let (path, category) = match spec.rsplit_once(':') {
                Some((p, c)) if !c.contains('/') && !c.contains('\\') && !p.is_empty() => (p, Some(c.to_string())),
                _ => (spec.as_str(), None),
            };
            let full = base.join(path);
            let image = image::open(&full)
                .map_err(|e| RequestError::ProductImage { path: full.display().to_string(), message: e.to_string() })?
                .to_rgba8();
            products.push(ProductInput { source: Some(full), image: Arc::new(image), category });
        }
        let req = BannerRequest {
            products,
            texts: self.texts.clone(),
            target_width,
            target_height,
            department_id: self.department,
            style_hint: self.style.clone(),
            seed: self.request_seed.unwrap_or(default_seed),
        };
        req.validate()?;
        Ok(req)
    }
}

#[cfg(test)]
pub(crate) fn test_request(texts: &[&str], aspects: &[f64], size: (u32, u32)) -> BannerRequest {
    let products = aspects
        .iter()
        .map(|&a| {
            let h = 100u32;
            let w = ((a * h as f64).round() as u32).max(1);
            ProductInput::new(RgbaImage::from_pixel(w, h, image::Rgba([255, 0, 0, 255])), None)
        })
        .collect();
    BannerRequest {
        products,
        texts: texts.iter().map(|s| s.to_string()).collect(),
        target_width: size.0,
        target_height: size.1,
        department_id: 0,
        style_hint: None,
        seed: 7,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latin_words_split_on_whitespace() {
        assert_eq!(word_count("Summer  sale, up to 50%"), 5);
        assert_eq!(word_count("   "), 0);
    }

    #[test]
    fn cjk_counts_per_character() {
        assert_eq!(word_count("夏季大促"), 4);
        assert_eq!(word_count("全场5折 sale"), 5);
    }

    #[test]
    fn validation_bounds() {
        let r = test_request(&["a b c"], &[1.0], (800, 400));
        assert!(r.validate().is_ok());
        let r = test_request(&["a", "b", "c", "d"], &[1.0], (800, 400));
        assert_eq!(r.validate(), Err(RequestError::TextLineCount(4)));
        let long = vec!["w"; 21].join(" ");
        let r = test_request(&[&long], &[1.0], (800, 400));
        assert_eq!(r.validate(), Err(RequestError::WordCount { line: 1, count: 21 }));
        let r = test_request(&["ok"], &[], (800, 400));
        assert_eq!(r.validate(), Err(RequestError::NoProducts));
    }

    #[test]
    fn request_line_parses_quoted_flags() {
        let a = parse_request_line(
            r#"--product p/a.png:shoes --text "Big sale" --text 'Up to 50% off' --size 800x400 --department 3 --name r1"#,
        )
        .unwrap();
        assert_eq!(a.products, vec!["p/a.png:shoes"]);
        assert_eq!(a.texts, vec!["Big sale", "Up to 50% off"]);
        assert_eq!(a.department, 3);
        assert_eq!(parse_size(&a.size).unwrap(), (800, 400));
        assert!(parse_request_line("--product a.png --text x --size 1x1 --bogus").is_err());
    }

    #[test]
    fn bad_sizes() {
        assert!(parse_size("800").is_err());
        assert_eq!(parse_size("0x5"), Err(RequestError::ZeroSize(0, 5)));
    }
}
