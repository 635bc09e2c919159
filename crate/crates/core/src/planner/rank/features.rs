//! Feature embedding for creative ranking.
//!
//! Dense layout, in order: series ordinal, template-id ordinal, department,
//! tf-idf over the vocabulary, promo keyword flags, one-hot primary color,
//! width, height, aspect, recall score, pre-rank score, then a reserved
//! extension segment (zero-length by default) for image features.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::color::Palette;
use crate::request::is_cjk;
use crate::template::{Template, TextRole};

/// Lowercased alphanumeric tokens; CJK codepoints are tokens on their own.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if is_cjk(c) {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            out.push(c.to_string());
        } else if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub terms: Vec<String>,
    pub idf: Vec<f64>,
    pub documents: usize,
}

impl Vocabulary {
    /// Keeps the `max_terms` most frequent terms by document frequency (ties
    /// by term); idf = ln((1 + N) / (1 + df)) + 1.
    pub fn fit(docs: &[Vec<String>], max_terms: usize) -> Vocabulary {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for d in docs {
            let mut seen: Vec<&str> = d.iter().map(String::as_str).collect();
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *df.entry(t).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = df.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        ranked.truncate(max_terms);
        let n = docs.len() as f64;
        Vocabulary {
            terms: ranked.iter().map(|(t, _)| t.to_string()).collect(),
            idf: ranked.iter().map(|&(_, d)| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0).collect(),
            documents: docs.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Raw term counts times idf, in vocabulary order; unknown terms dropped.
    pub fn weights(&self, tokens: &[String]) -> Vec<f64> {
        let index: HashMap<&str, usize> = self.terms.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
        let mut w = vec![0.0; self.terms.len()];
        for t in tokens {
            if let Some(&i) = index.get(t.as_str()) {
                w[i] += 1.0;
            }
        }
        for (x, idf) in w.iter_mut().zip(&self.idf) {
            *x *= idf;
        }
        w
    }
}

pub const DEFAULT_PROMO_KEYWORDS: [&str; 2] = ["discount", "full discount"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub series: Vec<String>,
    pub template_ids: Vec<String>,
    pub vocabulary: Vocabulary,
    pub promo_keywords: Vec<String>,
    pub colors: Vec<String>,
    /// Reserved trailing slots for optional image features.
    pub extension: usize,
}

impl FeatureLayout {
    pub fn len(&self) -> usize {
        3 + self.vocabulary.len() + self.promo_keywords.len() + self.colors.len() + 5 + self.extension
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn names(&self) -> Vec<String> {
        let mut n = vec!["series_id_ord".to_string(), "id_ord".into(), "department_ord".into()];
        n.extend(self.vocabulary.terms.iter().map(|t| format!("tfidf:{t}")));
        n.extend(self.promo_keywords.iter().map(|k| format!("promo:{k}")));
        n.extend(self.colors.iter().map(|c| format!("color:{c}")));
        n.extend(["width", "height", "aspect", "recall_score", "prerank_score"].map(String::from));
        n.extend((0..self.extension).map(|i| format!("ext:{i}")));
        n
    }

    /// Order-sensitive FNV-1a hash of the feature names.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for name in self.names() {
            for b in name.bytes().chain(std::iter::once(0xff)) {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub fingerprint: u64,
}

/// Request-side context a feature vector depends on.
#[derive(Debug, Clone, Copy)]
pub struct RankContext<'a> {
    pub texts: &'a [String],
    pub department_id: i64,
    pub recall_score: f64,
    pub prerank_score: f64,
}

fn ordinal(list: &[String], key: &str) -> f64 {
    list.iter().position(|s| s == key).map_or(-1.0, |i| i as f64)
}

fn contains_phrase(tokens: &[String], phrase: &[String]) -> bool {
    !phrase.is_empty() && tokens.windows(phrase.len()).any(|w| w == phrase)
}

pub fn featurize(t: &Template, ctx: &RankContext<'_>, layout: &FeatureLayout, palette: &Palette) -> FeatureVector {
    let mut v = Vec::with_capacity(layout.len());
    v.push(ordinal(&layout.series, &t.series_id));
    v.push(ordinal(&layout.template_ids, &t.id));
    v.push(ctx.department_id as f64);
    let tokens: Vec<String> = ctx.texts.iter().flat_map(|s| tokenize(s)).collect();
    v.extend(layout.vocabulary.weights(&tokens));
    for k in &layout.promo_keywords {
        v.push(if contains_phrase(&tokens, &tokenize(k)) { 1.0 } else { 0.0 });
    }
    let primary = t.primary_color().map(|c| palette.classify(c).to_string());
    for c in &layout.colors {
        v.push(if primary.as_deref() == Some(c.as_str()) { 1.0 } else { 0.0 });
    }
    v.push(t.width as f64);
    v.push(t.height as f64);
    v.push(t.width as f64 / t.height as f64);
    v.push(ctx.recall_score);
    v.push(ctx.prerank_score);
    v.extend(std::iter::repeat_n(0.0, layout.extension));
    FeatureVector { values: v, fingerprint: layout.fingerprint() }
}

/// Designer placeholder copy of a template, in role order.
pub fn placeholder_texts(t: &Template) -> Vec<String> {
    TextRole::ALL.iter().filter_map(|r| t.text_layer(*r).and_then(|l| l.text.clone())).collect()
}

/// Builds the layout from the templates seen in training.
pub fn fit_layout<'a>(
    templates: impl IntoIterator<Item = &'a Template>,
    palette: &Palette,
    max_terms: usize,
    promo_keywords: &[String],
) -> FeatureLayout {
    let templates: Vec<&Template> = templates.into_iter().collect();
    let mut series: Vec<String> = templates.iter().map(|t| t.series_id.clone()).collect();
    series.sort();
    series.dedup();
    let mut ids: Vec<String> = templates.iter().map(|t| t.id.clone()).collect();
    ids.sort();
    ids.dedup();
    let docs: Vec<Vec<String>> =
        templates.iter().map(|t| placeholder_texts(t).iter().flat_map(|s| tokenize(s)).collect()).collect();
    FeatureLayout {
        series,
        template_ids: ids,
        vocabulary: Vocabulary::fit(&docs, max_terms),
        promo_keywords: promo_keywords.to_vec(),
        colors: palette.entries().iter().map(|e| e.name.clone()).collect(),
        extension: 0,
    }
}
