//! Color spaces and the named palette.
//!
//! Colors travel through the engine as 8-bit sRGB. Perceptual comparisons use
//! CIELAB under a D65 white point; hue arithmetic uses HSV.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Rgb(pub u8, pub u8, pub u8);

#[derive(Debug, Error, PartialEq)]
pub enum ColorError {
    #[error("invalid color literal {0:?} (expected #rrggbb)")]
    BadLiteral(String),
    #[error("unknown palette color {0:?}")]
    UnknownName(String),
    #[error("palette must declare 14 colors, found {0}")]
    PaletteSize(usize),
    #[error("duplicate palette color {0:?}")]
    DuplicateName(String),
}

impl Rgb {
    pub fn to_hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }

    pub fn to_lab(self) -> Lab {
        Lab::from_rgb(self)
    }

    pub fn to_hsv(self) -> Hsv {
        Hsv::from_rgb(self)
    }

    /// Rotates the hue by `degrees` in HSV space, keeping saturation and value.
    pub fn hue_rotate(self, degrees: f64) -> Rgb {
        let mut hsv = self.to_hsv();
        hsv.h = (hsv.h + degrees).rem_euclid(360.0);
        hsv.to_rgb()
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for Rgb {
    type Err = ColorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hex = s
            .strip_prefix('#')
            .filter(|h| h.len() == 6 && h.is_ascii())
            .ok_or_else(|| ColorError::BadLiteral(s.to_string()))?;
        let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|_| ColorError::BadLiteral(s.to_string()));
        Ok(Rgb(byte(0)?, byte(2)?, byte(4)?))
    }
}

impl Serialize for Rgb {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl Lab {
    pub fn from_rgb(c: Rgb) -> Lab {
        fn linear(v: u8) -> f64 {
            let v = v as f64 / 255.0;
            if v <= 0.04045 {
                v / 12.92
            } else {
                ((v + 0.055) / 1.055).powf(2.4)
            }
        }
        let (r, g, b) = (linear(c.0), linear(c.1), linear(c.2));
        let x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
        let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
        let z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
        // D65 reference white
        let (xn, yn, zn) = (0.95047, 1.0, 1.08883);
        fn f(t: f64) -> f64 {
            const D: f64 = 6.0 / 29.0;
            if t > D * D * D {
                t.cbrt()
            } else {
                t / (3.0 * D * D) + 4.0 / 29.0
            }
        }
        let (fx, fy, fz) = (f(x / xn), f(y / yn), f(z / zn));
        Lab { l: 116.0 * fy - 16.0, a: 500.0 * (fx - fy), b: 200.0 * (fy - fz) }
    }

    pub fn distance(&self, other: &Lab) -> f64 {
        let dl = self.l - other.l;
        let da = self.a - other.a;
        let db = self.b - other.b;
        (dl * dl + da * da + db * db).sqrt()
    }
}

/// Hue in degrees [0, 360), saturation and value in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

impl Hsv {
    pub fn from_rgb(c: Rgb) -> Hsv {
        let r = c.0 as f64 / 255.0;
        let g = c.1 as f64 / 255.0;
        let b = c.2 as f64 / 255.0;
        let max = r.max(g).max(b);
        let min = r.min(g).min(b);
        let delta = max - min;
        let h = if delta == 0.0 {
            0.0
        } else if max == r {
            60.0 * ((g - b) / delta).rem_euclid(6.0)
        } else if max == g {
            60.0 * ((b - r) / delta + 2.0)
        } else {
            60.0 * ((r - g) / delta + 4.0)
        };
        let s = if max == 0.0 { 0.0 } else { delta / max };
        Hsv { h, s, v: max }
    }

    pub fn to_rgb(self) -> Rgb {
        let c = self.v * self.s;
        let hp = self.h.rem_euclid(360.0) / 60.0;
        let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
        let (r, g, b) = match hp as u32 {
            0 => (c, x, 0.0),
            1 => (x, c, 0.0),
            2 => (0.0, c, x),
            3 => (0.0, x, c),
            4 => (x, 0.0, c),
            _ => (c, 0.0, x),
        };
        let m = self.v - c;
        let q = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
        Rgb(q(r), q(g), q(b))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaletteEntry {
    pub name: String,
    pub rgb: [u8; 3],
}

/// The 14 named main colors with fixed anchors, in declaration order.
#[derive(Debug, Clone)]
pub struct Palette {
    entries: Vec<PaletteEntry>,
    labs: Vec<Lab>,
    max_distance: f64,
}

pub const PALETTE_SIZE: usize = 14;

const DEFAULT_PALETTE_JSON: &str = include_str!("../assets/palette.json");

impl Palette {
    pub fn new(entries: Vec<PaletteEntry>) -> Result<Palette, ColorError> {
        if entries.len() != PALETTE_SIZE {
            return Err(ColorError::PaletteSize(entries.len()));
        }
        for (i, e) in entries.iter().enumerate() {
            if entries[..i].iter().any(|p| p.name == e.name) {
                return Err(ColorError::DuplicateName(e.name.clone()));
            }
        }
        let labs: Vec<Lab> = entries.iter().map(|e| Rgb(e.rgb[0], e.rgb[1], e.rgb[2]).to_lab()).collect();
        let mut max_distance = 0.0f64;
        for i in 0..labs.len() {
            for j in i + 1..labs.len() {
                max_distance = max_distance.max(labs[i].distance(&labs[j]));
            }
        }
        Ok(Palette { entries, labs, max_distance })
    }

    pub fn from_json(text: &str) -> Result<Palette, PaletteLoadError> {
        let entries: Vec<PaletteEntry> = serde_json::from_str(text)?;
        Ok(Palette::new(entries)?)
    }

    pub fn entries(&self) -> &[PaletteEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.entries[index].name
    }

    pub fn anchor(&self, index: usize) -> Rgb {
        let [r, g, b] = self.entries[index].rgb;
        Rgb(r, g, b)
    }

    pub fn anchor_lab(&self, index: usize) -> Lab {
        self.labs[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn anchor_by_name(&self, name: &str) -> Result<Rgb, ColorError> {
        self.index_of(name).map(|i| self.anchor(i)).ok_or_else(|| ColorError::UnknownName(name.to_string()))
    }

    /// Largest CIELAB distance between any two anchors.
    pub fn max_distance(&self) -> f64 {
        self.max_distance
    }

    /// Index of the nearest anchor in CIELAB; ties go to the earlier declaration.
    pub fn classify_index(&self, c: Rgb) -> usize {
        let lab = c.to_lab();
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, anchor) in self.labs.iter().enumerate() {
            let d = lab.distance(anchor);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    pub fn classify(&self, c: Rgb) -> &str {
        self.name(self.classify_index(c))
    }

    /// Distance between two anchors, by index.
    pub fn anchor_distance(&self, a: usize, b: usize) -> f64 {
        self.labs[a].distance(&self.labs[b])
    }

    /// Accepts either a palette name or a `#rrggbb` literal.
    pub fn resolve(&self, spec: &str) -> Result<Rgb, ColorError> {
        if spec.starts_with('#') {
            spec.parse()
        } else {
            self.anchor_by_name(spec)
        }
    }
}

impl Default for Palette {
    fn default() -> Self {
        Palette::from_json(DEFAULT_PALETTE_JSON).expect("embedded palette is valid")
    }
}

#[derive(Debug, Error)]
pub enum PaletteLoadError {
    #[error("palette json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Color(#[from] ColorError),
}

/// Nearest palette name for a color, using the default palette.
pub fn classify_color(c: Rgb) -> String {
    Palette::default().classify(c).to_string()
}
