use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

use super::{lint_template, Template, TemplateDescriptor, Violation};
use crate::color::{Palette, PaletteLoadError};

pub const SCHEMA_VERSION: u32 = 1;

/// `manifest.json` at the library root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LibraryManifest {
    pub schema_version: u32,
    pub name: String,
    /// Palette file, relative to the library root.
    pub palette: String,
    /// Template descriptor files, relative to the library root.
    pub templates: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct TemplateLibrary {
    pub root: PathBuf,
    pub name: String,
    pub palette: Palette,
    pub templates: BTreeMap<String, Template>,
}

#[derive(Debug)]
pub struct TemplateViolations {
    pub file: String,
    pub template_id: String,
    pub violations: Vec<Violation>,
}

impl fmt::Display for TemplateViolations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{} [{}]: {}", self.template_id, self.file, v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: at {field} (line {line}, column {column}): {message}")]
    Parse { file: PathBuf, field: String, line: usize, column: usize, message: String },
    #[error("{file}: {source}")]
    Palette {
        file: PathBuf,
        #[source]
        source: PaletteLoadError,
    },
    #[error("unsupported manifest schema version {0}")]
    SchemaVersion(u32),
    #[error("template library failed validation:\n{}", format_all(.0))]
    Validation(Vec<TemplateViolations>),
    #[error("element library failed validation:\n{}", .0.join("\n"))]
    Elements(Vec<String>),
}

fn format_all(v: &[TemplateViolations]) -> String {
    v.iter().map(|t| t.to_string()).collect()
}

impl LibraryError {
    /// Total number of individual violations, for validation failures.
    pub fn violation_count(&self) -> usize {
        match self {
            LibraryError::Validation(v) => v.iter().map(|t| t.violations.len()).sum(),
            LibraryError::Elements(v) => v.len(),
            _ => 0,
        }
    }
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, LibraryError> {
    let text = fs::read_to_string(path).map_err(|source| LibraryError::Io { path: path.to_path_buf(), source })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        LibraryError::Parse {
            file: path.to_path_buf(),
            field,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })
}

/// Loads and validates a template library directory.
///
/// Every template is linted and every asset reference is checked on disk;
/// a failure reports all violations across the library, not just the first.
pub fn load_library(root: impl AsRef<Path>) -> Result<TemplateLibrary, LibraryError> {
    let root = root.as_ref();
    let manifest: LibraryManifest = read_json(&root.join("manifest.json"))?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(LibraryError::SchemaVersion(manifest.schema_version));
    }
    let palette_path = root.join(&manifest.palette);
    let palette_text =
        fs::read_to_string(&palette_path).map_err(|source| LibraryError::Io { path: palette_path.clone(), source })?;
    let palette = Palette::from_json(&palette_text)
        .map_err(|source| LibraryError::Palette { file: palette_path.clone(), source })?;

    let mut descriptors = Vec::with_capacity(manifest.templates.len());
    for file in &manifest.templates {
        let d: TemplateDescriptor = read_json(&root.join(file))?;
        descriptors.push((file.clone(), d));
    }

    let mut failures = Vec::new();
    let mut templates = BTreeMap::new();
    for (file, d) in &descriptors {
        let mut violations = lint_template(d, &palette);
        if templates.contains_key(&d.id) || failures.iter().any(|f: &TemplateViolations| f.template_id == d.id) {
            violations.push(Violation::DuplicateId(d.id.clone()));
        }
        for l in &d.layers {
            if let Some(asset) = &l.asset {
                if !root.join(asset).is_file() {
                    violations.push(Violation::MissingAsset { layer: l.name.clone(), path: asset.clone() });
                }
            }
        }
        if violations.is_empty() {
            let t = Template::from_descriptor(d, &palette).expect("lint passed");
            templates.insert(t.id.clone(), t);
        } else {
            failures.push(TemplateViolations { file: file.clone(), template_id: d.id.clone(), violations });
        }
    }
    if !failures.is_empty() {
        return Err(LibraryError::Validation(failures));
    }
    Ok(TemplateLibrary { root: root.to_path_buf(), name: manifest.name, palette, templates })
}

impl TemplateLibrary {
    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Template> {
        self.templates.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Template> {
        self.templates.values()
    }

    pub fn asset_path(&self, asset: &str) -> PathBuf {
        self.root.join(asset)
    }

    /// In-memory library (no files); used by synthetic data generation.
    pub fn from_templates(name: &str, palette: Palette, templates: Vec<Template>) -> TemplateLibrary {
        TemplateLibrary {
            root: PathBuf::new(),
            name: name.to_string(),
            palette,
            templates: templates.into_iter().map(|t| (t.id.clone(), t)).collect(),
        }
    }

    /// Canonical serialization of the whole library (manifest order = id order).
    pub fn to_canonical_json(&self) -> String {
        let docs: Vec<TemplateDescriptor> = self.iter().map(Template::to_descriptor).collect();
        let value = serde_json::json!({
            "name": self.name,
            "palette": self.palette.entries(),
            "templates": docs,
        });
        serde_json::to_string_pretty(&value).expect("library serializes")
    }

    /// Writes the library (manifest, palette, descriptors) under `dir`.
    /// Asset files are not copied.
    pub fn write_descriptors(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir.join("templates"))?;
        let files: Vec<String> = self.iter().map(|t| format!("templates/{}.json", t.id)).collect();
        for (t, f) in self.iter().zip(&files) {
            fs::write(dir.join(f), t.to_json() + "\n")?;
        }
        fs::write(dir.join("palette.json"), serde_json::to_string_pretty(self.palette.entries())? + "\n")?;
        let manifest = LibraryManifest {
            schema_version: SCHEMA_VERSION,
            name: self.name.clone(),
            palette: "palette.json".into(),
            templates: files,
        };
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;

    fn write_library(dir: &Path, docs: &[TemplateDescriptor]) {
        fs::create_dir_all(dir.join("templates")).unwrap();
        let mut files = Vec::new();
        for (i, d) in docs.iter().enumerate() {
            let f = format!("templates/{i}.json");
            fs::write(dir.join(&f), serde_json::to_string_pretty(d).unwrap()).unwrap();
            files.push(f);
        }
        fs::write(dir.join("palette.json"), serde_json::to_string(Palette::default().entries()).unwrap()).unwrap();
        let m = LibraryManifest {
            schema_version: SCHEMA_VERSION,
            name: "t".into(),
            palette: "palette.json".into(),
            templates: files,
        };
        fs::write(dir.join("manifest.json"), serde_json::to_string(&m).unwrap()).unwrap();
    }

    #[test]
    fn loads_valid_library() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = sample_descriptor();
        b.id = "other".into();
        write_library(dir.path(), &[sample_descriptor(), b]);
        let lib = load_library(dir.path()).unwrap();
        assert_eq!(lib.len(), 2);
        assert_eq!(lib.get("sample").unwrap().text_line_count(), 2);
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_library(dir.path(), &[sample_descriptor(), sample_descriptor()]);
        let err = load_library(dir.path()).unwrap_err();
        assert!(err.to_string().contains("duplicate id"), "{err}");
    }

    #[test]
    fn validation_error_names_template_and_layer() {
        let dir = tempfile::tempdir().unwrap();
        let mut d = sample_descriptor();
        d.layers[4].bound_to = None;
        let mut e = sample_descriptor();
        e.id = "second".into();
        e.layers[2].capacity = Some(30);
        write_library(dir.path(), &[d, e]);
        let err = load_library(dir.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sample") && msg.contains("mc-c"), "{msg}");
        assert!(msg.contains("second") && msg.contains("30"), "{msg}");
        assert_eq!(err.violation_count(), 2);
    }

    #[test]
    fn parse_errors_carry_file_and_field() {
        let dir = tempfile::tempdir().unwrap();
        write_library(dir.path(), &[sample_descriptor()]);
        let bad = r#"{"schema_version":1,"id":"x","series_id":"s","width":10,"height":10,
            "layers":[{"name":"background","bbox":[0,0,10],"z":0}]}"#;
        fs::write(dir.path().join("templates/0.json"), bad).unwrap();
        match load_library(dir.path()).unwrap_err() {
            LibraryError::Parse { file, field, .. } => {
                assert!(file.ends_with("templates/0.json"));
                assert!(field.contains("layers[0].bbox"), "{field}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_asset_is_a_violation() {
        let dir = tempfile::tempdir().unwrap();
        let mut d = sample_descriptor();
        d.layers[5].asset = Some("assets/nope.png".into());
        write_library(dir.path(), &[d]);
        let err = load_library(dir.path()).unwrap_err();
        assert!(err.to_string().contains("assets/nope.png"));
    }
}
