//! The checked-in fixture set and its integrity manifest (`fixtures.json`).
//!
//! Layout under the fixture root:
//!
//! ```text
//! library/          valid template library (manifest.json, palette.json, templates/, assets/)
//! broken-library/   library with deliberate lint violations
//! elements/         element assets (manifest.json + PNGs)
//! products/         product cutouts (PNG, at most 256 px a side)
//! models/           rank.json and textnet.json trained on the fixtures
//! requests.txt      one request per line, paths relative to the fixture root
//! engine.toml       engine config pointing at the above
//! fixtures.json     expected counts and SHA-256 of every other file
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adjuster::{ElementLibrary, ELEMENT_MANIFEST};
use crate::template::library::read_json;
use crate::template::{load_library, LibraryError, LibraryManifest};

pub const FIXTURE_MANIFEST: &str = "fixtures.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureCounts {
    pub templates: usize,
    pub broken_templates: usize,
    pub elements: usize,
    pub products: usize,
    pub requests: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureManifest {
    pub schema_version: u32,
    pub counts: FixtureCounts,
    /// Relative path (forward slashes) to lowercase hex SHA-256.
    pub files: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixtureReport {
    pub files_checked: usize,
    pub mismatches: Vec<String>,
}

impl FixtureReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

impl fmt::Display for FixtureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "files checked: {}", self.files_checked)?;
        for m in &self.mismatches {
            writeln!(f, "mismatch: {m}")?;
        }
        write!(f, "{}", if self.ok() { "fixtures ok" } else { "fixtures FAILED" })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn walk(dir: &Path, root: &Path, out: &mut Vec<String>) -> std::io::Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let p = e.path();
        if p.is_dir() {
            walk(&p, root, out)?;
        } else {
            let rel = p.strip_prefix(root).expect("under root");
            let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            if rel != FIXTURE_MANIFEST {
                out.push(rel);
            }
        }
    }
    Ok(())
}

/// Every file under `root` except the manifest, sorted.
pub fn list_files(root: &Path) -> std::io::Result<Vec<String>> {
    let mut out = Vec::new();
    walk(root, root, &mut out)?;
    out.sort();
    Ok(out)
}

fn count_pngs(dir: &Path) -> usize {
    fs::read_dir(dir)
        .map(|rd| rd.filter_map(Result::ok).filter(|e| e.path().extension().is_some_and(|x| x == "png")).count())
        .unwrap_or(0)
}

/// Request lines: non-blank lines that are not `#` comments.
pub fn request_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

/// Counts what is actually on disk.
pub fn observed_counts(root: &Path) -> FixtureCounts {
    let templates = |dir: &str| {
        read_json::<LibraryManifest>(&root.join(dir).join("manifest.json")).map_or(0, |m| m.templates.len())
    };
    let elements = read_json::<crate::adjuster::ElementManifest>(&root.join("elements").join(ELEMENT_MANIFEST))
        .map_or(0, |m| m.assets.len());
    let requests = fs::read_to_string(root.join("requests.txt")).map_or(0, |t| request_lines(&t).len());
    FixtureCounts {
        templates: templates("library"),
        broken_templates: templates("broken-library"),
        elements,
        products: count_pngs(&root.join("products")),
        requests,
    }
}

/// Hashes every file and records the observed counts.
pub fn build_manifest(root: &Path) -> std::io::Result<FixtureManifest> {
    let mut files = BTreeMap::new();
    for rel in list_files(root)? {
        files.insert(rel.clone(), sha256_hex(&fs::read(root.join(&rel))?));
    }
    Ok(FixtureManifest { schema_version: 1, counts: observed_counts(root), files })
}

pub fn write_manifest(root: &Path) -> std::io::Result<FixtureManifest> {
    let m = build_manifest(root)?;
    fs::write(root.join(FIXTURE_MANIFEST), serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(m)
}

/// Checks checksums, file and item counts, that the valid libraries load
/// cleanly and that the broken library is rejected.
pub fn verify_fixtures(root: &Path) -> FixtureReport {
    let mut report = FixtureReport::default();
    let manifest: FixtureManifest = match read_json(&root.join(FIXTURE_MANIFEST)) {
        Ok(m) => m,
        Err(e) => {
            report.mismatches.push(format!("cannot read {FIXTURE_MANIFEST}: {e}"));
            return report;
        }
    };
    let on_disk = list_files(root).unwrap_or_default();
    for (rel, want) in &manifest.files {
        match fs::read(root.join(rel)) {
            Ok(bytes) => {
                report.files_checked += 1;
                let got = sha256_hex(&bytes);
                if &got != want {
                    report.mismatches.push(format!("{rel}: checksum {got} != expected {want}"));
                }
            }
            Err(_) => report.mismatches.push(format!("{rel}: missing")),
        }
    }
    for rel in &on_disk {
        if !manifest.files.contains_key(rel) {
            report.mismatches.push(format!("{rel}: not listed in {FIXTURE_MANIFEST}"));
        }
    }
    if on_disk.len() != manifest.files.len() {
        report.mismatches.push(format!("file count {} != expected {}", on_disk.len(), manifest.files.len()));
    }
    let got = observed_counts(root);
    let want = manifest.counts;
    for (name, g, w) in [
        ("templates", got.templates, want.templates),
        ("broken templates", got.broken_templates, want.broken_templates),
        ("elements", got.elements, want.elements),
        ("products", got.products, want.products),
        ("requests", got.requests, want.requests),
    ] {
        if g != w {
            report.mismatches.push(format!("{name} count {g} != expected {w}"));
        }
    }
    match load_library(root.join("library")) {
        Ok(lib) => {
            if let Err(e) = ElementLibrary::load(root.join("elements"), &lib.palette) {
                report.mismatches.push(format!("elements: {e}"));
            }
        }
        Err(e) => report.mismatches.push(format!("library: {e}")),
    }
    match load_library(root.join("broken-library")) {
        Err(LibraryError::Validation(_)) => {}
        Err(e) => report.mismatches.push(format!("broken-library: unexpected error {e}")),
        Ok(_) => report.mismatches.push("broken-library: loaded without violations".into()),
    }
    report
}

/// `fixtures/` at the workspace root, as seen from this crate.
pub fn default_fixture_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_lines_skip_comments_and_blanks() {
        let t = "# header\n\n--text a\n  \n--text b\n";
        assert_eq!(request_lines(t), vec![(3, "--text a"), (5, "--text b")]);
    }

    #[test]
    fn sha_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
