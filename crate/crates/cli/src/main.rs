use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use forge_core::config::ForgeConfig;
use forge_core::eval::{compute_coherence, run_eval, CoherenceReport, EvalReport};
use forge_core::oracle::Synonyms;
use forge_core::pipeline::{check_record, generate_dataset, parse_qa_jsonl, NoiseMode, QaRecord, RunOptions, SceneIndex};
use forge_core::question::TaskType;
use forge_core::scene::{parse_scene, AgentSituation, Scene};
use forge_core::spatial::{partition_cardinal, CardinalPolicy};
use forge_core::synth::{synth_dataset, synth_scenes, SynthOptions, SYNTH_TASKS};
use forge_core::trace::TraceRecord;

#[derive(Parser)]
#[command(name = "forge", version, about = "Grounded reasoning-trace generation and oracle evaluation")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate reasoning traces from scenes and QA records.
    Generate(GenerateArgs),
    /// Answer QA records with the rule oracle, one JSON line per record.
    Answer(AnswerArgs),
    /// Score the oracle per task under a noise mode.
    Eval(EvalArgs),
    /// Check trace records against the grammar and their metadata.
    Validate(ValidateArgs),
    /// Split a scene's objects into front/back/left/right for one situation.
    Partition(PartitionArgs),
    /// Coherence partition and ratios from per-object results.
    Coherence(CoherenceArgs),
    /// Write a synthetic scene collection and QA file.
    Synth(SynthArgs),
}

#[derive(Args)]
struct Common {
    /// Scene JSON file, JSONL file, or directory of scene files.
    #[arg(long)]
    scenes: PathBuf,
    /// QA records, one JSON object per line.
    #[arg(long)]
    qa: PathBuf,
    /// TOML configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    max_objects: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long, default_value_t = 0.0)]
    se_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    ge_rate: f64,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    noise_rates: NoiseArgs,
    #[arg(long)]
    out: PathBuf,
    /// none, se, ge or se+ge.
    #[arg(long, default_value = "none")]
    noise: NoiseMode,
}

#[derive(Args)]
struct AnswerArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    noise_rates: NoiseArgs,
    #[arg(long, default_value = "oracle")]
    mode: NoiseMode,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    noise_rates: NoiseArgs,
    #[arg(long, default_value = "oracle")]
    mode: NoiseMode,
    /// JSON report path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    traces: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    max_objects: Option<usize>,
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    scene: PathBuf,
    /// "px,py,pz;fx,fy"
    #[arg(long, allow_hyphen_values = true)]
    situation: AgentSituation,
    #[arg(long, default_value = "centroid")]
    policy: CardinalPolicy,
}

#[derive(Args)]
struct CoherenceArgs {
    /// JSONL of {"grounding_correct": bool, "qa_correct": bool} or [bool, bool].
    #[arg(long)]
    results: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    scenes_out: PathBuf,
    #[arg(long)]
    qa_out: PathBuf,
    #[arg(long, default_value_t = 50)]
    scene_count: usize,
    #[arg(long, default_value_t = 100)]
    per_task: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Answer(a) => answer(a),
        Command::Eval(a) => eval(a),
        Command::Validate(a) => validate(a),
        Command::Partition(a) => partition(a),
        Command::Coherence(a) => coherence(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: Option<&Path>, max_objects: Option<usize>) -> Result<(ForgeConfig, Synonyms)> {
    let mut cfg = match path {
        Some(p) => ForgeConfig::load(p)?,
        None => ForgeConfig::default(),
    };
    if let Some(k) = max_objects {
        cfg.max_objects = k;
    }
    cfg.check()?;
    let synonyms = cfg.load_synonyms()?;
    Ok((cfg, synonyms))
}

/// Scenes from a single JSON document, a JSONL file, or a directory of `.json` files.
fn load_scenes(path: &Path) -> Result<SceneIndex> {
    let mut scenes = Vec::new();
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        files.retain(|p| p.extension().is_some_and(|e| e == "json"));
        files.sort();
        for f in files {
            let text = fs::read_to_string(&f)?;
            scenes.push(parse_scene(&text).with_context(|| f.display().to_string())?);
        }
    } else {
        let text = fs::read_to_string(path).with_context(|| path.display().to_string())?;
        match parse_scene(&text) {
            Ok(scene) => scenes.push(scene),
            Err(whole) => {
                let lines: Vec<(usize, &str)> =
                    text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).collect();
                if lines.len() < 2 {
                    return Err(whole).with_context(|| path.display().to_string());
                }
                for (i, line) in lines {
                    scenes.push(parse_scene(line).with_context(|| format!("{}:{}", path.display(), i + 1))?);
                }
            }
        }
    }
    Ok(SceneIndex::new(scenes))
}

fn load_qa(path: &Path) -> Result<Vec<QaRecord>> {
    let text = fs::read_to_string(path).with_context(|| path.display().to_string())?;
    parse_qa_jsonl(&text).map_err(|(line, e)| anyhow::anyhow!("{}:{line}: {e}", path.display()))
}

fn run_options(seed: u64, mode: NoiseMode, rates: &NoiseArgs) -> Result<RunOptions> {
    for (name, r) in [("se-rate", rates.se_rate), ("ge-rate", rates.ge_rate)] {
        if !(0.0..=1.0).contains(&r) {
            bail!("--{name} must lie in [0, 1], got {r}");
        }
    }
    Ok(RunOptions {
        seed,
        mode,
        se_rate: rates.se_rate,
        ge_rate: rates.ge_rate,
    })
}

fn writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).with_context(|| p.display().to_string())?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn generate(a: GenerateArgs) -> Result<bool> {
    let (cfg, synonyms) = load_config(a.common.config.as_deref(), a.common.max_objects)?;
    let scenes = load_scenes(&a.common.scenes)?;
    let qa = load_qa(&a.common.qa)?;
    let opts = run_options(a.common.seed, a.noise, &a.noise_rates)?;
    let data = generate_dataset(&scenes, &qa, &cfg, &synonyms, &opts);
    fs::write(&a.out, data.to_jsonl()).with_context(|| a.out.display().to_string())?;
    for f in &data.failures {
        eprintln!("record {}: {}", f.index + 1, f.error);
    }
    let s = &data.stats;
    eprintln!("input {}  generated {}  failed {}  violations {}", s.input, s.generated, s.failed, s.violations);
    for (task, n) in &s.per_task {
        eprintln!("  {task:<22}{n:>8}");
    }
    Ok(data.ok())
}

fn answer(a: AnswerArgs) -> Result<bool> {
    let (cfg, synonyms) = load_config(a.common.config.as_deref(), a.common.max_objects)?;
    let scenes = load_scenes(&a.common.scenes)?;
    let qa = load_qa(&a.common.qa)?;
    let opts = run_options(a.common.seed, a.mode, &a.noise_rates)?;
    let report = run_eval(&scenes, &qa, &cfg, &synonyms, &opts);
    let mut out = writer(a.out.as_deref())?;
    for (o, q) in report.outcomes.iter().zip(&qa) {
        let line = serde_json::json!({
            "index": o.index,
            "task_type": o.task,
            "predicted": o.predicted,
            "gold": q.gold_answer,
            "correct": o.qa_correct,
            "unsupported": o.unsupported,
            "error": o.error,
        });
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(report.overall.failed == 0)
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.1}"))
}

fn print_eval(report: &EvalReport) {
    println!("mode: {}", report.mode);
    println!("{:<22}{:>8}{:>8}{:>12}{:>8}{:>10}", "task", "total", "correct", "unsupported", "failed", "accuracy");
    let rows = TaskType::ALL
        .iter()
        .filter_map(|t| report.per_task.get(t).map(|s| (t.as_str(), s)))
        .chain([("overall", &report.overall)]);
    for (name, s) in rows {
        println!(
            "{name:<22}{:>8}{:>8}{:>12}{:>8}{:>10}",
            s.total,
            s.correct,
            s.unsupported,
            s.failed,
            pct(s.accuracy())
        );
    }
    if let Some(c) = &report.coherence {
        print_coherence(c);
    }
}

fn print_coherence(c: &CoherenceReport) {
    println!(
        "GC {:.1}  Type1 {:.1}  Type2 {:.1}  DF {:.1}  R1 {}  R2 {}  (n = {})",
        c.gc,
        c.type1,
        c.type2,
        c.df,
        pct(c.r1),
        pct(c.r2),
        c.n_objects
    );
}

fn eval(a: EvalArgs) -> Result<bool> {
    let (cfg, synonyms) = load_config(a.common.config.as_deref(), a.common.max_objects)?;
    let scenes = load_scenes(&a.common.scenes)?;
    let qa = load_qa(&a.common.qa)?;
    let opts = run_options(a.common.seed, a.mode, &a.noise_rates)?;
    let report = run_eval(&scenes, &qa, &cfg, &synonyms, &opts);
    for o in report.outcomes.iter().filter(|o| o.error.is_some()) {
        eprintln!("record {}: {}", o.index + 1, o.error.as_deref().unwrap_or_default());
    }
    print_eval(&report);
    if let Some(path) = &a.report {
        fs::write(path, serde_json::to_string_pretty(&report)?).with_context(|| path.display().to_string())?;
    }
    Ok(report.overall.failed == 0)
}

fn validate(a: ValidateArgs) -> Result<bool> {
    let (cfg, _) = load_config(a.config.as_deref(), a.max_objects)?;
    let text = fs::read_to_string(&a.traces).with_context(|| a.traces.display().to_string())?;
    let (mut records, mut bad) = (0usize, 0usize);
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        records += 1;
        let problems: Vec<String> = match serde_json::from_str::<TraceRecord>(line) {
            Err(e) => vec![format!("record: {e}")],
            Ok(record) => match check_record(&record, cfg.max_objects) {
                Err(e) => vec![format!("grammar: {e}")],
                Ok(v) => v.iter().map(ToString::to_string).collect(),
            },
        };
        if !problems.is_empty() {
            bad += 1;
            for p in problems {
                println!("line {}: {p}", i + 1);
            }
        }
    }
    println!("{records} records, {bad} with violations");
    Ok(bad == 0)
}

fn partition(a: PartitionArgs) -> Result<bool> {
    let text = fs::read_to_string(&a.scene).with_context(|| a.scene.display().to_string())?;
    let scene: Scene = parse_scene(&text)?;
    let part = partition_cardinal(&scene, &a.situation, a.policy);
    let label = |id: &u32| scene.object(*id).map_or("?", |o| o.label.as_str()).to_string();
    for (name, ids) in [
        ("front", &part.front),
        ("back", &part.back),
        ("left", &part.left),
        ("right", &part.right),
        ("degenerate", &part.degenerate),
    ] {
        let items: Vec<String> = ids.iter().map(|id| format!("{id}:{}", label(id))).collect();
        println!("{name:<11}{:>4}  {}", ids.len(), items.join(" "));
    }
    Ok(true)
}

fn coherence(a: CoherenceArgs) -> Result<bool> {
    let text = fs::read_to_string(&a.results).with_context(|| a.results.display().to_string())?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let v: serde_json::Value = serde_json::from_str(line).with_context(|| format!("line {}", i + 1))?;
        let pair = match &v {
            serde_json::Value::Array(a) if a.len() == 2 => (a[0].as_bool(), a[1].as_bool()),
            serde_json::Value::Object(o) => (
                o.get("grounding_correct").and_then(|b| b.as_bool()),
                o.get("qa_correct").and_then(|b| b.as_bool()),
            ),
            _ => (None, None),
        };
        match pair {
            (Some(g), Some(q)) => pairs.push((g, q)),
            _ => bail!("line {}: expected a (grounding_correct, qa_correct) pair", i + 1),
        }
    }
    let report = compute_coherence(&pairs)?;
    print_coherence(&report);
    Ok(true)
}

fn synth(a: SynthArgs) -> Result<bool> {
    let opts = SynthOptions {
        seed: a.seed,
        ..SynthOptions::default()
    };
    let scenes = synth_scenes(a.scene_count.max(1), &opts);
    let qa = synth_dataset(&scenes, &SYNTH_TASKS, a.per_task, a.seed, &ForgeConfig::default());
    let mut out = writer(Some(&a.scenes_out))?;
    for s in &scenes {
        writeln!(out, "{}", serde_json::to_string(s)?)?;
    }
    out.flush()?;
    let mut out = writer(Some(&a.qa_out))?;
    for q in &qa {
        writeln!(out, "{}", serde_json::to_string(q)?)?;
    }
    out.flush()?;
    eprintln!("{} scenes, {} records", scenes.len(), qa.len());
    Ok(true)
}
