use std::path::PathBuf;
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").canonicalize().unwrap()
}

fn bf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bannerforge"))
        .args(args)
        .env_remove("BANNERFORGE_CONFIG")
        .current_dir(fixtures())
        .output()
        .unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn help_lists_every_subcommand_and_global_flag() {
    let out = bf(&["--help"]);
    assert!(out.status.success());
    let s = text(&out.stdout);
    for w in [
        "synth",
        "batch",
        "lint",
        "expand",
        "train-rank",
        "train-textnet",
        "eval-rank",
        "simulate-log",
        "--config",
        "--seed",
        "--out",
        "--workers",
        "--variants",
    ] {
        assert!(s.contains(w), "--help lacks {w}");
    }
    let out = bf(&["synth", "--help"]);
    assert!(out.status.success());
    for w in ["--product", "--text", "--size", "--department", "--style", "--name", "--request-seed"] {
        assert!(text(&out.stdout).contains(w), "synth --help lacks {w}");
    }
}

#[test]
fn unknown_flags_are_errors() {
    let out = bf(&["lint", "library", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("--frobnicate"));
}

#[test]
fn lint_exit_codes() {
    let ok = bf(&["lint", "library"]);
    assert_eq!(ok.status.code(), Some(0), "{}", text(&ok.stderr));
    assert!(text(&ok.stdout).contains("0 violations"));
    let bad = bf(&["lint", "broken-library"]);
    assert_eq!(bad.status.code(), Some(1));
    let all = text(&bad.stdout) + &text(&bad.stderr);
    assert!(all.contains("bbox outside the canvas"), "{all}");
}

#[test]
fn synth_writes_png_and_provenance() {
    let out = tempfile::tempdir().unwrap();
    let o = bf(&[
        "--config",
        "engine.toml",
        "--out",
        out.path().to_str().unwrap(),
        "--variants",
        "2",
        "synth",
        "--product",
        "products/square-red.png",
        "--text",
        "Summer sale",
        "--text",
        "Fresh picks for you",
        "--size",
        "640x640",
        "--department",
        "2",
        "--name",
        "demo",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let mut ids = Vec::new();
    for v in ["demo-v1", "demo-v2"] {
        let img = image::open(out.path().join(format!("{v}.png"))).unwrap();
        assert_eq!((img.width(), img.height()), (640, 640));
        let p: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.path().join(format!("{v}.provenance.json"))).unwrap())
                .unwrap();
        ids.push(p["template_id"].as_str().unwrap().to_string());
    }
    assert_ne!(ids[0], ids[1], "variants should come from distinct templates");
}

#[test]
fn out_of_gate_request_exits_2() {
    let out = tempfile::tempdir().unwrap();
    let o = bf(&[
        "--config",
        "engine.toml",
        "--out",
        out.path().to_str().unwrap(),
        "synth",
        "--product",
        "products/square-red.png",
        "--text",
        "Summer sale",
        "--size",
        "100x1000",
        "--department",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = text(&o.stderr);
    assert!(err.contains("no compatible template") && err.contains("screen"), "{err}");
}

#[test]
fn missing_product_exits_3_and_missing_config_exits_4() {
    let o = bf(&[
        "--config",
        "engine.toml",
        "synth",
        "--product",
        "products/nope.png",
        "--text",
        "Sale",
        "--size",
        "800x800",
        "--department",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", text(&o.stderr));
    let o = bf(&[
        "synth",
        "--product",
        "products/square-red.png",
        "--text",
        "Sale",
        "--size",
        "800x800",
        "--department",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", text(&o.stderr));
    let o = bf(&["--config", "/nonexistent.toml", "lint"]);
    assert_eq!(o.status.code(), Some(4), "{}", text(&o.stderr));
}

#[test]
fn config_comes_from_the_environment() {
    let out = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bannerforge"))
        .args(["--out", out.path().to_str().unwrap(), "synth", "--product", "products/wide-gray.png"])
        .args(["--text", "Deal", "--size", "800x400", "--department", "3"])
        .env("BANNERFORGE_CONFIG", fixtures().join("engine.toml"))
        .current_dir(fixtures())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(out.path().join("banner.png").is_file());
}

#[test]
fn batch_counts_failures_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let reqs = dir.path().join("reqs.txt");
    let f = fixtures();
    std::fs::write(
        &reqs,
        format!(
            "# two good, one bad\n--product {p} --text Sale --size 800x800 --department 1\n\n\
             --product {p} --text 'too many' --text b --text c --text d --size 800x800 --department 1\n\
             --product {p} --text Deal --size 1200x600 --department 2 --name named\n",
            p = f.join("products/square-red.png").display()
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = bf(&["--config", "engine.toml", "--out", out.to_str().unwrap(), "batch", reqs.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("ok=2 failed=1"));
    assert!(out.join("line-0002.png").is_file() && out.join("named.png").is_file());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("batch-summary.json")).unwrap()).unwrap();
    assert_eq!(summary["failures"][0]["line"], 4);
    assert_eq!(summary["failures"][0]["stage"], "request");

    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "").unwrap();
    let o = bf(&["--config", "engine.toml", "--out", out.to_str().unwrap(), "batch", empty.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert!(text(&o.stdout).contains("ok=0"));
}

#[test]
fn simulate_train_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.csv");
    let model = dir.path().join("rank.json");
    let lib = fixtures().join("library");
    let lib = lib.to_str().unwrap();
    let o = bf(&[
        "--seed",
        "3",
        "simulate-log",
        "--library",
        lib,
        "--templates",
        "16",
        "--periods",
        "10",
        "--output",
        log.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let o = bf(&[
        "train-rank",
        "--library",
        lib,
        "--log",
        log.to_str().unwrap(),
        "--periods",
        "1-8",
        "--model-out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let o = bf(&[
        "eval-rank",
        "--library",
        lib,
        "--log",
        log.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--periods",
        "9-10",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("auc"), "{}", text(&o.stdout));
}
