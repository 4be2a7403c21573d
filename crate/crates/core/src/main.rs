use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use xai_align::config::{Canvas, ExperimentConfig};
use xai_align::io::{self, HeatmapFormat};
use xai_align::pipeline::{self, ReportParts};
use xai_align::render::render_overlay;
use xai_align::Error;

#[derive(Parser)]
#[command(name = "xai-align", version, about = "Compare explanation heatmaps with human annotations and votes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    /// Canvas size, e.g. 224x224
    #[arg(long)]
    canvas: Option<Canvas>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Directory of `<image_id>/<method>.{csv,pgm}` heatmaps
    #[arg(long)]
    heatmaps: Option<PathBuf>,
    #[arg(long)]
    votes: Option<PathBuf>,
    /// Ground-truth boxes CSV
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Comma-separated method registry
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Comma-separated metric acronyms
    #[arg(long, value_delimiter = ',')]
    metrics: Option<Vec<String>>,
    /// Reserved; the pipeline is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Pgm,
}

#[derive(Subcommand)]
enum Command {
    /// Build annotation heatmaps from bounding boxes
    Aggregate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Distance tables of every method against the annotation heatmap
    Score {
        #[command(flatten)]
        common: Common,
    },
    /// Human and metric rankings
    Rank {
        #[command(flatten)]
        common: Common,
    },
    /// RBO distances of metric rankings to the human ranking
    Rbo {
        #[command(flatten)]
        common: Common,
        /// Persistence value; repeatable
        #[arg(long = "p")]
        p: Vec<f64>,
    },
    /// Threshold/IoU baseline
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated thresholds
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
    },
    /// All tables plus a Markdown summary
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long = "p")]
        p: Vec<f64>,
    },
    /// Render a heatmap as a PPM overlay
    Render {
        /// Heatmap file (.csv or .pgm)
        #[arg(long)]
        heatmap: PathBuf,
        /// Optional grayscale base image (.csv or .pgm)
        #[arg(long)]
        base: Option<PathBuf>,
        /// Output .ppm path
        #[arg(long)]
        out: PathBuf,
    },
}

fn build_config(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(c) = common.canvas {
        config.canvas = c;
    }
    macro_rules! override_path {
        ($($field:ident),*) => {$(
            if let Some(p) = &common.$field {
                config.$field = Some(p.clone());
            }
        )*};
    }
    override_path!(annotations, heatmaps, votes, truth);
    if let Some(out) = &common.out {
        config.out_dir = Some(out.clone());
    }
    if let Some(m) = &common.methods {
        config.methods = m.clone();
    }
    if let Some(m) = &common.metrics {
        config.metrics = m.clone();
    }
    config.validate()?;
    Ok(config)
}

fn out_dir(config: &ExperimentConfig) -> PathBuf {
    config.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn evaluate_and_emit(config: ExperimentConfig, parts: ReportParts) -> Result<(), Error> {
    let state = pipeline::ingest(&config)?;
    let outputs = pipeline::run_evaluation(&state);
    let started = Instant::now();
    let written = pipeline::emit_report(&outputs, &out_dir(&config), parts)?;
    for path in &written {
        println!("{}", path.display());
    }
    for (stage, t) in outputs.manifest.timings.iter() {
        eprintln!("{stage}: {:.3}s", t.as_secs_f64());
    }
    eprintln!("emit: {:.3}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn read_any(path: &Path) -> Result<xai_align::Heatmap, Error> {
    io::read_heatmap(path)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Aggregate { common, format } => {
            let config = build_config(&common)?;
            let dir = out_dir(&config);
            std::fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
            let format = match format {
                Format::Csv => HeatmapFormat::Csv,
                Format::Pgm => HeatmapFormat::Pgm,
            };
            for (image_id, h) in pipeline::aggregate_all(&config)? {
                let path = dir.join(format!("{image_id}.{}", format.extension()));
                match format {
                    HeatmapFormat::Csv => io::write_heatmap_csv(&h, &path)?,
                    HeatmapFormat::Pgm => io::write_pgm(&h, &path)?,
                }
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Score { common } => evaluate_and_emit(
            build_config(&common)?,
            ReportParts { scores: true, ..ReportParts::NONE },
        ),
        Command::Rank { common } => evaluate_and_emit(
            build_config(&common)?,
            ReportParts { rankings: true, ..ReportParts::NONE },
        ),
        Command::Rbo { common, p } => {
            let mut config = build_config(&common)?;
            if !p.is_empty() {
                config.p_values = p;
                config.validate()?;
            }
            evaluate_and_emit(config, ReportParts { rbo: true, ..ReportParts::NONE })
        }
        Command::Sweep { common, thresholds } => {
            let mut config = build_config(&common)?;
            if config.truth.is_none() {
                return Err(Error::InvalidConfig("sweep needs --truth".into()));
            }
            if let Some(t) = thresholds {
                config.thresholds = t;
                config.validate()?;
            }
            evaluate_and_emit(config, ReportParts { sweeps: true, ..ReportParts::NONE })
        }
        Command::Report { common, p } => {
            let mut config = build_config(&common)?;
            if !p.is_empty() {
                config.p_values = p;
                config.validate()?;
            }
            evaluate_and_emit(config, ReportParts::ALL)
        }
        Command::Render { heatmap, base, out } => {
            let h = read_any(&heatmap)?;
            let base = base.as_deref().map(read_any).transpose()?;
            render_overlay(base.as_ref(), &h, &out)?;
            println!("{}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
