use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bannerforge::actuator::{expand_size, samples_from_library, train_text_net};
use bannerforge::adjuster::ElementLibrary;
use bannerforge::batch::run_batch;
use bannerforge::config::{EngineConfig, CONFIG_ENV};
use bannerforge::error::{Error, EXIT_FAILURE};
use bannerforge::evaluator::{evaluate_rank, simulate_log, PlantedSignal};
use bannerforge::pipeline::Engine;
use bannerforge::planner::rank::{read_click_log, train_from_log, write_click_log, RankModel};
use bannerforge::request::{parse_size, RequestArgs};
use bannerforge::template::{load_library, LibraryError, TemplateLibrary};

#[derive(Debug, Parser)]
#[command(name = "bannerforge", version, about = "Template-driven banner synthesis")]
struct Cli {
    /// Engine config (TOML)
    #[arg(long, global = true, env = CONFIG_ENV, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed; overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    out: PathBuf,
    /// Worker threads for batch work (default: logical CPU count)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Render this many banners from distinct top candidates
    #[arg(long, global = true, default_value_t = 1)]
    variants: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize one banner
    Synth(SynthArgs),
    /// Synthesize every request in a file, one request per line
    Batch(BatchArgs),
    /// Validate a template library (and optionally an element library)
    Lint(LintArgs),
    /// Expand a library by color migration and size variants
    Expand(ExpandArgs),
    /// Train the creative ranker from a click log
    TrainRank(TrainRankArgs),
    /// Train the text-layout network on the template library
    TrainTextnet(TrainTextnetArgs),
    /// Report accuracy and AUC of a rank model on held-out periods
    EvalRank(EvalRankArgs),
    /// Write a synthetic click log with a planted color preference
    SimulateLog(SimulateArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    request: RequestArgs,
}

#[derive(Debug, Args)]
struct BatchArgs {
    /// Request file; product paths resolve against its directory
    requests: PathBuf,
}

#[derive(Debug, Args)]
struct LintArgs {
    /// Library directory (default: the config's library)
    library: Option<PathBuf>,
    /// Element library directory to validate as well
    #[arg(long)]
    elements: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExpandArgs {
    /// Library directory (default: the config's library)
    library: Option<PathBuf>,
    /// Hue rotation in degrees, exclusive of 0 and 360 (repeatable)
    #[arg(long = "hue", value_name = "DEGREES")]
    hues: Vec<f64>,
    /// Target size WxH (repeatable)
    #[arg(long = "size", value_name = "WxH")]
    sizes: Vec<String>,
}

#[derive(Debug, Args)]
struct LibraryArg {
    /// Template library directory (default: the config's library)
    #[arg(long)]
    library: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainRankArgs {
    #[command(flatten)]
    library: LibraryArg,
    /// Click log CSV (template_id,period_id,exposures,clicks)
    #[arg(long)]
    log: PathBuf,
    /// Training periods, `A-B` or `A`
    #[arg(long, default_value = "1-8")]
    periods: String,
    /// Model output path (default: <out>/rank.json)
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainTextnetArgs {
    #[command(flatten)]
    library: LibraryArg,
    /// Model output path (default: <out>/textnet.json)
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Override the configured epoch count
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Debug, Args)]
struct EvalRankArgs {
    #[command(flatten)]
    library: LibraryArg,
    /// Click log CSV
    #[arg(long)]
    log: PathBuf,
    /// Rank model (default: the config's rank model)
    #[arg(long)]
    model: Option<PathBuf>,
    /// Evaluation periods, `A-B` or `A`
    #[arg(long, default_value = "9-10")]
    periods: String,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    library: LibraryArg,
    /// Number of templates (first by id); default all
    #[arg(long)]
    templates: Option<usize>,
    /// Number of periods
    #[arg(long, default_value_t = 10)]
    periods: u32,
    /// Click-through rate of templates without a boosted color
    #[arg(long, default_value_t = 0.02)]
    base_ctr: f64,
    /// Click-through rate of templates whose primary color is boosted
    #[arg(long, default_value_t = 0.08)]
    boosted_ctr: f64,
    /// Boosted palette colors, comma separated
    #[arg(long, value_delimiter = ',', default_value = "red,orange,yellow,magenta")]
    boosted_colors: Vec<String>,
    /// Output CSV (default: <out>/clicks.csv)
    #[arg(long)]
    output: Option<PathBuf>,
}

struct Ctx {
    config: Option<PathBuf>,
    seed: Option<u64>,
    out: PathBuf,
    variants: usize,
}

impl Ctx {
    fn config(&self) -> Result<EngineConfig, Error> {
        let path = self.config.as_ref().ok_or(bannerforge::config::ConfigError::Missing)?;
        Ok(EngineConfig::load(path)?)
    }

    fn optional_config(&self) -> Result<Option<EngineConfig>, Error> {
        self.config.as_ref().map(|_| self.config()).transpose()
    }

    fn seed(&self, cfg: Option<&EngineConfig>) -> u64 {
        self.seed.or(cfg.map(|c| c.seed)).unwrap_or(7)
    }

    fn library_path(&self, explicit: Option<&Path>) -> Result<PathBuf, Error> {
        match explicit {
            Some(p) => Ok(p.to_path_buf()),
            None => Ok(self.config()?.paths.library),
        }
    }

    fn out_file(&self, explicit: Option<&PathBuf>, default: &str) -> Result<PathBuf, Error> {
        let p = explicit.cloned().unwrap_or_else(|| self.out.join(default));
        if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        Ok(p)
    }
}

fn load_lib(path: &Path) -> Result<TemplateLibrary, Error> {
    load_library(path).map_err(|e| Error::Load(e.into()))
}

fn parse_periods(s: &str) -> Result<(u32, u32), Error> {
    let bad = || Error::failed("args", format!("bad period range {s:?} (expected A-B or A)"));
    let (a, b) = match s.split_once('-') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let a = s.trim().parse().map_err(|_| bad())?;
            (a, a)
        }
    };
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn engine(ctx: &Ctx) -> Result<Engine, Error> {
    let mut cfg = ctx.config()?;
    cfg.seed = ctx.seed(Some(&cfg));
    Ok(Engine::load(cfg)?)
}

fn cmd_synth(ctx: &Ctx, a: &SynthArgs) -> Result<i32, Error> {
    let engine = engine(ctx)?;
    let req = a.request.to_request(Path::new("."), engine.config.seed)?;
    let outputs = engine.synthesize(&req, ctx.variants)?;
    let stem = a.request.name.clone().unwrap_or_else(|| "banner".into());
    for (i, o) in outputs.iter().enumerate() {
        let s = if ctx.variants > 1 { format!("{stem}-v{}", i + 1) } else { stem.clone() };
        o.write(&ctx.out, &s).map_err(|e| Error::io(&ctx.out, e))?;
        for w in &o.provenance.warnings {
            eprintln!("warning: {w}");
        }
        println!("{}\t{}", ctx.out.join(format!("{s}.png")).display(), o.provenance.template_id);
    }
    Ok(0)
}

fn cmd_batch(ctx: &Ctx, a: &BatchArgs) -> Result<i32, Error> {
    let engine = engine(ctx)?;
    let text = fs::read_to_string(&a.requests).map_err(|e| Error::io(&a.requests, e))?;
    let base = a.requests.parent().unwrap_or(Path::new("."));
    let summary = run_batch(&engine, &text, base, engine.config.seed, &ctx.out, ctx.variants);
    fs::create_dir_all(&ctx.out).map_err(|e| Error::io(&ctx.out, e))?;
    let path = ctx.out.join("batch-summary.json");
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    for f in &summary.failures {
        eprintln!("line {}: {}: {}", f.line, f.stage, f.reason);
    }
    println!("ok={} failed={}", summary.ok, summary.failed);
    Ok(if summary.ok == 0 { EXIT_FAILURE } else { 0 })
}

fn cmd_lint(ctx: &Ctx, a: &LintArgs) -> Result<i32, Error> {
    let path = ctx.library_path(a.library.as_deref())?;
    let mut violations = 0;
    let lib = match load_library(&path) {
        Ok(lib) => Some(lib),
        Err(e @ (LibraryError::Validation(_) | LibraryError::Parse { .. } | LibraryError::SchemaVersion(_))) => {
            eprint!("{e}");
            if !e.to_string().ends_with('\n') {
                eprintln!();
            }
            violations += e.violation_count().max(1);
            None
        }
        Err(e) => return Err(Error::Load(e.into())),
    };
    if let Some(dir) = &a.elements {
        let palette = lib.as_ref().map(|l| l.palette.clone()).unwrap_or_default();
        if let Err(e) = ElementLibrary::load(dir, &palette) {
            eprintln!("{e}");
            violations += e.violation_count().max(1);
        }
    }
    match &lib {
        Some(l) if violations == 0 => println!("{}: {} templates, 0 violations", path.display(), l.len()),
        _ => println!("{violations} violation(s)"),
    }
    Ok(if violations == 0 { 0 } else { EXIT_FAILURE })
}

fn cmd_expand(ctx: &Ctx, a: &ExpandArgs) -> Result<i32, Error> {
    let path = ctx.library_path(a.library.as_deref())?;
    let lib = load_lib(&path)?;
    let sizes = a.sizes.iter().map(|s| parse_size(s)).collect::<Result<Vec<_>, _>>()?;
    let mut templates: Vec<_> = lib.iter().cloned().collect();
    let mut skipped = 0;
    for t in lib.iter() {
        for &h in &a.hues {
            templates.push(t.expand_by_color(h).map_err(|e| Error::failed("expand", e))?);
        }
        for &(w, hgt) in &sizes {
            match expand_size(t, (w, hgt)) {
                Ok(mut x) => {
                    x.id = format!("{}-{w}x{hgt}", t.id);
                    x.refresh_derived();
                    templates.push(x);
                }
                Err(e) => {
                    eprintln!("skip {}: {e}", t.id);
                    skipped += 1;
                }
            }
        }
    }
    let count = templates.len();
    let out = TemplateLibrary::from_templates(&format!("{}-expanded", lib.name), lib.palette.clone(), templates);
    out.write_descriptors(&ctx.out).map_err(|e| Error::io(&ctx.out, e))?;
    // carry referenced rasters along so the expanded library loads on its own
    for t in out.iter() {
        for l in &t.layers {
            if let Some(asset) = &l.asset_ref {
                let dst = ctx.out.join(asset);
                if let Some(d) = dst.parent() {
                    fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
                }
                fs::copy(lib.asset_path(asset), &dst).map_err(|e| Error::io(&dst, e))?;
            }
        }
    }
    println!("{count} templates written to {} ({skipped} size variants skipped by the aspect gate)", ctx.out.display());
    Ok(0)
}

fn cmd_train_rank(ctx: &Ctx, a: &TrainRankArgs) -> Result<i32, Error> {
    let cfg = ctx.optional_config()?;
    let lib = load_lib(&ctx.library_path(a.library.library.as_deref())?)?;
    let log = read_click_log(&a.log).map_err(|e| Error::failed("train-rank", e))?;
    let (lo, hi) = parse_periods(&a.periods)?;
    let rank_cfg = cfg.map(|c| c.rank).unwrap_or_default();
    let model = train_from_log(&lib, &log, &rank_cfg, |p| (lo..=hi).contains(&p))
        .map_err(|e| Error::failed("train-rank", e))?;
    let path = ctx.out_file(a.model_out.as_ref(), "rank.json")?;
    model.save(&path).map_err(|e| Error::failed("train-rank", e))?;
    println!(
        "samples\t{}\npositives\t{}\ntrees\t{}\nfinal_log_loss\t{:.6}\nmodel\t{}",
        model.meta.samples,
        model.meta.positives,
        model.ensemble.trees.len(),
        model.meta.loss_history.last().copied().unwrap_or(f64::NAN),
        path.display()
    );
    Ok(0)
}

fn cmd_train_textnet(ctx: &Ctx, a: &TrainTextnetArgs) -> Result<i32, Error> {
    let cfg = ctx.optional_config()?;
    let seed = ctx.seed(cfg.as_ref());
    let lib = load_lib(&ctx.library_path(a.library.library.as_deref())?)?;
    let mut net_cfg = cfg.map(|c| c.textnet).unwrap_or_default();
    if let Some(e) = a.epochs {
        net_cfg.epochs = e;
    }
    let samples = samples_from_library(&lib);
    let (net, history) = train_text_net(&samples, &net_cfg, seed).map_err(|e| Error::failed("train-textnet", e))?;
    let path = ctx.out_file(a.model_out.as_ref(), "textnet.json")?;
    net.save(&path).map_err(|e| Error::failed("train-textnet", e))?;
    println!(
        "samples\t{}\nepochs\t{}\nfinal_loss\t{:.6}\nmodel\t{}",
        samples.len(),
        history.len(),
        history.last().copied().unwrap_or(f64::NAN),
        path.display()
    );
    Ok(0)
}

fn cmd_eval_rank(ctx: &Ctx, a: &EvalRankArgs) -> Result<i32, Error> {
    let lib = load_lib(&ctx.library_path(a.library.library.as_deref())?)?;
    let model_path = match &a.model {
        Some(p) => p.clone(),
        None => ctx
            .config()?
            .paths
            .rank_model
            .ok_or_else(|| Error::failed("eval-rank", "no --model and no paths.rank_model in the config"))?,
    };
    let model = RankModel::load(&model_path).map_err(|e| Error::failed("eval-rank", e))?;
    let log = read_click_log(&a.log).map_err(|e| Error::failed("eval-rank", e))?;
    let (lo, hi) = parse_periods(&a.periods)?;
    let report =
        evaluate_rank(&model, &lib, &log, |p| (lo..=hi).contains(&p)).map_err(|e| Error::failed("eval-rank", e))?;
    println!("{report}");
    Ok(0)
}

fn cmd_simulate(ctx: &Ctx, a: &SimulateArgs) -> Result<i32, Error> {
    let cfg = ctx.optional_config()?;
    let seed = ctx.seed(cfg.as_ref());
    let lib = load_lib(&ctx.library_path(a.library.library.as_deref())?)?;
    let planted =
        PlantedSignal { base_ctr: a.base_ctr, boosted_ctr: a.boosted_ctr, boosted_colors: a.boosted_colors.clone() };
    for c in &planted.boosted_colors {
        if lib.palette.index_of(c).is_none() {
            return Err(Error::failed("simulate-log", format!("unknown palette color {c:?}")));
        }
    }
    let n = a.templates.unwrap_or(lib.len());
    let log = simulate_log(&lib, n, a.periods, &planted, seed).map_err(|e| Error::failed("simulate-log", e))?;
    let path = ctx.out_file(a.output.as_ref(), "clicks.csv")?;
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    write_click_log(file, &log).map_err(|e| Error::failed("simulate-log", e))?;
    println!("{} records written to {}", log.len(), path.display());
    Ok(0)
}

fn run(cli: Cli) -> Result<i32, Error> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().map_err(|e| Error::failed("args", e))?;
    }
    let ctx = Ctx { config: cli.config, seed: cli.seed, out: cli.out, variants: cli.variants.max(1) };
    match &cli.command {
        Command::Synth(a) => cmd_synth(&ctx, a),
        Command::Batch(a) => cmd_batch(&ctx, a),
        Command::Lint(a) => cmd_lint(&ctx, a),
        Command::Expand(a) => cmd_expand(&ctx, a),
        Command::TrainRank(a) => cmd_train_rank(&ctx, a),
        Command::TrainTextnet(a) => cmd_train_textnet(&ctx, a),
        Command::EvalRank(a) => cmd_eval_rank(&ctx, a),
        Command::SimulateLog(a) => cmd_simulate(&ctx, a),
    }
}

fn main() -> ExitCode {
    // clap's own usage-error code (2) would collide with "no candidate"
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_FAILURE as u8) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
