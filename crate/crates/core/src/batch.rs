//! Batch synthesis: one request per line, parallel across requests.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::fixtures::request_lines;
use crate::pipeline::Engine;
use crate::request::parse_request_line;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchFailure {
    pub line: usize,
    pub stage: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct BatchSummary {
    pub ok: usize,
    pub failed: usize,
    /// Output stems written, in input order.
    pub outputs: Vec<String>,
    pub failures: Vec<BatchFailure>,
}

impl BatchSummary {
    pub fn total(&self) -> usize {
        self.ok + self.failed
    }
}

enum LineResult {
    Ok(Vec<String>),
    Failed(BatchFailure),
}

fn run_line(
    engine: &Engine,
    line: usize,
    text: &str,
    base: &Path,
    default_seed: u64,
    out: &Path,
    variants: usize,
) -> LineResult {
    let fail =
        |stage: &str, reason: String| LineResult::Failed(BatchFailure { line, stage: stage.to_string(), reason });
    let args = match parse_request_line(text) {
        Ok(a) => a,
        Err(e) => return fail("request", e.to_string()),
    };
    let req = match args.to_request(base, default_seed) {
        Ok(r) => r,
        Err(e) => return fail("request", e.to_string()),
    };
    let outputs = match engine.synthesize(&req, variants) {
        Ok(o) => o,
        Err(e) => return fail(&e.stage.to_string(), e.source.to_string()),
    };
    let stem = args.name.clone().unwrap_or_else(|| format!("line-{line:04}"));
    let mut written = Vec::new();
    for (i, o) in outputs.iter().enumerate() {
        let s = if variants > 1 { format!("{stem}-v{}", i + 1) } else { stem.clone() };
        if let Err(e) = o.write(out, &s) {
            return fail("write", e.to_string());
        }
        written.push(s);
    }
    LineResult::Ok(written)
}

/// Synthesizes every request in `requests` (product paths relative to
/// `base`), writing into `out`. Failures are recorded and skipped.
pub fn run_batch(
    engine: &Engine,
    requests: &str,
    base: &Path,
    default_seed: u64,
    out: &Path,
    variants: usize,
) -> BatchSummary {
    let lines = request_lines(requests);
    let results: Vec<LineResult> =
        lines.par_iter().map(|&(n, text)| run_line(engine, n, text, base, default_seed, out, variants)).collect();
    let mut summary = BatchSummary::default();
    for r in results {
        match r {
            LineResult::Ok(stems) => {
                summary.ok += 1;
                summary.outputs.extend(stems);
            }
            LineResult::Failed(f) => {
                summary.failed += 1;
                summary.failures.push(f);
            }
        }
    }
    summary
}
