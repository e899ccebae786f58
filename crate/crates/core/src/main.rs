use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mcs::batch::{collect_images, image_id, run_detect, RESULT_SUFFIX};
use mcs::config::{load_config, resolve_config_path, to_toml, ConfigOverrides};
use mcs::eval::{average_annotator_metrics, evaluate_annotator, evaluate_corpus, Annotations, DEFAULT_MATCH_IOU};
use mcs::overlay::draw_result;
use mcs::{ResultDoc, ScoringConfig};

/// Main-character detection from pose keypoints.
#[derive(Parser)]
#[command(name = "mcs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score images and write one result JSON per image.
    Detect(DetectArgs),
    /// Draw facial rectangles of a result onto its image.
    Overlay(OverlayArgs),
    /// Evaluate result files against annotations.
    Eval(EvalArgs),
    /// Print the effective scoring config as TOML.
    PrintConfig(ConfigArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat TOML config file (defaults to $MCS_CONFIG).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    w_area: Option<f64>,
    #[arg(long)]
    w_sharp: Option<f64>,
    #[arg(long)]
    w_pos: Option<f64>,
    /// Threshold for images with more than two detected people.
    #[arg(long)]
    threshold_many: Option<f64>,
    /// Threshold for images with two detected people.
    #[arg(long)]
    threshold_two: Option<f64>,
    #[arg(long)]
    min_head_conf: Option<f64>,
    #[arg(long)]
    canny_low: Option<f64>,
    #[arg(long)]
    canny_high: Option<f64>,
    #[arg(long)]
    ear_eye_ratio: Option<f64>,
    #[arg(long)]
    canny_sigma: Option<f64>,
    #[arg(long)]
    count_gated_as_detected: Option<bool>,
}

impl ConfigArgs {
    fn load(&self) -> Result<(ScoringConfig, Option<PathBuf>)> {
        let path = resolve_config_path(self.config.clone());
        let overrides = ConfigOverrides {
            w_area: self.w_area,
            w_sharp: self.w_sharp,
            w_pos: self.w_pos,
            threshold_many: self.threshold_many,
            threshold_two: self.threshold_two,
            min_head_conf: self.min_head_conf,
            canny_low: self.canny_low,
            canny_high: self.canny_high,
            ear_eye_ratio: self.ear_eye_ratio,
            canny_sigma: self.canny_sigma,
            count_gated_as_detected: self.count_gated_as_detected,
        };
        let (cfg, _warnings) = load_config(path.as_deref(), &overrides)?;
        Ok((cfg, path))
    }
}

#[derive(Args)]
struct DetectArgs {
    /// Image files or directories of images.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Directory holding <stem>.keypoints.json files (default: next to each image).
    #[arg(long)]
    pose_dir: Option<PathBuf>,
    /// Output directory for result files and the manifest.
    #[arg(long, short)]
    out: PathBuf,
    /// Worker threads (0 = one per logical CPU).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct OverlayArgs {
    image: PathBuf,
    result: PathBuf,
    /// Output PNG (default: <stem>.overlay.png next to the image).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Annotation corpus JSON.
    #[arg(long)]
    annotations: PathBuf,
    /// Directory of *.result.json files.
    #[arg(long)]
    results: Option<PathBuf>,
    /// Directory for report.json and report.txt.
    #[arg(long, short)]
    out: PathBuf,
    /// Minimum IoU for matching predictions to annotated faces.
    #[arg(long, default_value_t = DEFAULT_MATCH_IOU)]
    iou: f64,
    /// Score this annotator column against the expert instead of results.
    #[arg(long)]
    annotator: Option<usize>,
    /// Add a row with the mean scores of the non-expert annotators.
    #[arg(long)]
    with_annotators: bool,
}

fn detect(args: &DetectArgs) -> Result<ExitCode> {
    let (cfg, config_path) = args.config.load()?;
    let images = collect_images(&args.inputs).context("listing inputs")?;
    if images.is_empty() {
        bail!("no PNG or JPEG images found in the inputs");
    }
    let manifest = run_detect(&images, args.pose_dir.as_deref(), &args.out, &cfg, config_path.as_deref(), args.jobs)
        .with_context(|| format!("writing to {}", args.out.display()))?;
    let ok = manifest.entries.iter().filter(|e| e.status == mcs::batch::ImageStatus::Ok).count();
    eprintln!("{ok}/{} images processed", manifest.entries.len());
    Ok(if manifest.all_ok() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn overlay(args: &OverlayArgs) -> Result<ExitCode> {
    let bytes = std::fs::read(&args.result).with_context(|| format!("reading {}", args.result.display()))?;
    let doc = ResultDoc::from_json(&bytes).with_context(|| format!("parsing {}", args.result.display()))?;
    let id = image_id(&args.image);
    if doc.image_id != id {
        bail!("result is for image `{}`, not `{id}`", doc.image_id);
    }
    let mut img = image::open(&args.image).with_context(|| format!("decoding {}", args.image.display()))?.to_rgb8();
    draw_result(&mut img, &doc);
    let out = args.out.clone().unwrap_or_else(|| args.image.with_file_name(format!("{id}.overlay.png")));
    img.save_with_format(&out, image::ImageFormat::Png).with_context(|| format!("writing {}", out.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn load_results(dir: &Path) -> Result<HashMap<String, ResultDoc>> {
    let mut results = HashMap::new();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(RESULT_SUFFIX))
        .collect();
    paths.sort();
    for path in paths {
        let bytes = std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        let doc = ResultDoc::from_json(&bytes).with_context(|| format!("{}: invalid result file", path.display()))?;
        results.insert(doc.image_id.clone(), doc);
    }
    Ok(results)
}

fn eval(args: &EvalArgs) -> Result<ExitCode> {
    let bytes = std::fs::read(&args.annotations).with_context(|| format!("reading {}", args.annotations.display()))?;
    let annotations =
        Annotations::parse(&bytes).with_context(|| format!("{}: invalid annotations", args.annotations.display()))?;
    let report = match (args.annotator, &args.results) {
        (Some(column), _) => evaluate_annotator(&annotations, column)?,
        (None, Some(dir)) => evaluate_corpus(&annotations, &load_results(dir)?, args.iou)?,
        (None, None) => bail!("either --results or --annotator is required"),
    };
    let mut extra = Vec::new();
    if args.with_annotators {
        let (all, clear) = average_annotator_metrics(&annotations)?;
        extra.push(("Annotators".to_string(), all, clear));
    }
    let text = report.render(&extra);
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    std::fs::write(args.out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(ExitCode::SUCCESS)
}

fn print_config(args: &ConfigArgs) -> Result<ExitCode> {
    let (cfg, _) = args.load()?;
    print!("{}", to_toml(&cfg));
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Detect(a) => detect(a),
        Command::Overlay(a) => overlay(a),
        Command::Eval(a) => eval(a),
        Command::PrintConfig(a) => print_config(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            // bad configuration is a usage error
            if e.downcast_ref::<mcs::ConfigError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
