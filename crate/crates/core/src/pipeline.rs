//! End-to-end evaluation: ingest experiment files, score every image, build
//! rankings and RBO reports, and write the report directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::bbox::sweep_thresholds;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::heatmap::{aggregate_annotations, unit_normalize, AnnotationSet, BoundingBox, Heatmap};
use crate::io::{self, HeatmapFormat, SweepRecord};
use crate::metrics::MetricId;
use crate::ranking::{human_ranking, metric_ranking, Ranking, RankingSource, VoteTally};
use crate::rbo::{best_metric_report, position_weight, rbo_distance, RboReport, RboRow};
use crate::score::{compute_score_table, CellError, ScoreTable};

pub const SCORES_FILE: &str = "scores.csv";
pub const RANKINGS_FILE: &str = "rankings.csv";
pub const RBO_FILE: &str = "rbo.csv";
pub const BEST_FILE: &str = "best_metrics.csv";
pub const SWEEPS_FILE: &str = "sweeps.csv";
pub const SUMMARY_FILE: &str = "summary.md";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything known about one image after ingest.
#[derive(Debug, Clone)]
pub struct ImageInputs {
    pub image_id: String,
    pub annotations: AnnotationSet,
    /// Unit-normalized explanation heatmaps in registry order.
    pub explanations: Vec<(String, Heatmap)>,
    pub votes: Option<VoteTally>,
    pub truth: Option<BoundingBox>,
}

#[derive(Debug, Clone)]
pub struct ExperimentState {
    pub config: ExperimentConfig,
    pub metrics: Vec<MetricId>,
    pub images: Vec<ImageInputs>,
    /// Images seen in some input but lacking a required one.
    pub skipped: BTreeMap<String, String>,
    pub ingest_time: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum ImageStatus {
    Processed,
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub image_id: String,
    #[serde(flatten)]
    pub status: ImageStatus,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cell_errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub images: Vec<ManifestEntry>,
    /// Wall-clock time per stage. Left out of the written manifest so
    /// reports stay byte-identical across runs.
    #[serde(skip)]
    pub timings: Vec<(String, Duration)>,
}

impl RunManifest {
    pub fn entry(&self, image_id: &str) -> Option<&ManifestEntry> {
        self.images.iter().find(|e| e.image_id == image_id)
    }
}

#[derive(Debug, Clone)]
pub struct EvaluationOutputs {
    pub score_tables: Vec<ScoreTable>,
    pub rankings: Vec<(String, Ranking)>,
    pub rbo: RboReport,
    pub sweeps: Vec<SweepRecord>,
    pub manifest: RunManifest,
}

fn required<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::InvalidConfig(format!("missing {what} path")))
}

/// Heatmap files found under `<dir>/<image_id>/`, keyed by method.
fn scan_heatmaps(dir: &Path, registry: &[String]) -> Result<BTreeMap<String, BTreeMap<String, Vec<PathBuf>>>> {
    let mut out: BTreeMap<String, BTreeMap<String, Vec<PathBuf>>> = BTreeMap::new();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut image_dirs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if entry.path().is_dir() {
            image_dirs.push(entry.path());
        }
    }
    image_dirs.sort();
    for image_dir in image_dirs {
        let image_id = image_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let files = out.entry(image_id).or_default();
        let mut paths = Vec::new();
        for entry in fs::read_dir(&image_dir).map_err(|e| Error::io(&image_dir, e))? {
            paths.push(entry.map_err(|e| Error::io(&image_dir, e))?.path());
        }
        paths.sort();
        for path in paths {
            if HeatmapFormat::from_path(&path).is_none() || !path.is_file() {
                continue;
            }
            let method = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            if !registry.contains(&method) {
                return Err(Error::UnknownMethod {
                    method: format!("{method} ({})", path.display()),
                    line: None,
                });
            }
            files.entry(method).or_default().push(path);
        }
    }
    Ok(out)
}

fn load_explanation(path: &Path, canvas: (u32, u32)) -> Result<Heatmap> {
    let h = io::read_heatmap(path)?;
    if h.dimensions() != canvas {
        return Err(Error::DimensionMismatch {
            context: Some(path.display().to_string()),
            expected_width: canvas.0,
            expected_height: canvas.1,
            width: h.width(),
            height: h.height(),
        });
    }
    unit_normalize(&h)
}

/// Reads all configured inputs. Images missing annotations or with
/// unreadable heatmaps are skipped (or fail the run in strict mode).
pub fn ingest(config: &ExperimentConfig) -> Result<ExperimentState> {
    let started = Instant::now();
    config.validate()?;
    let metrics = config.metric_ids()?;
    let canvas = (config.canvas.width, config.canvas.height);
    let registry = &config.methods;

    let annotations = io::read_annotations(required(&config.annotations, "annotations")?, canvas.0, canvas.1)?;
    let heatmap_files = scan_heatmaps(required(&config.heatmaps, "heatmaps")?, registry)?;
    let votes = match &config.votes {
        Some(p) => io::read_votes(p, registry)?,
        None => BTreeMap::new(),
    };
    let truth = match &config.truth {
        Some(p) => io::read_truth(p, canvas.0, canvas.1)?,
        None => BTreeMap::new(),
    };

    let all_ids: BTreeSet<&String> = annotations
        .keys()
        .chain(heatmap_files.keys())
        .chain(votes.keys())
        .chain(truth.keys())
        .collect();

    let mut images = Vec::new();
    let mut skipped = BTreeMap::new();
    for id in all_ids {
        let Some(set) = annotations.get(id) else {
            skipped.insert(id.clone(), "no annotations".to_string());
            continue;
        };
        let files = heatmap_files.get(id);
        let mut explanations = Vec::new();
        let mut problem = None;
        for method in registry {
            let Some(paths) = files.and_then(|f| f.get(method)) else {
                continue;
            };
            if paths.len() > 1 {
                problem = Some(format!("method {method} has both csv and pgm heatmaps"));
                break;
            }
            match load_explanation(&paths[0], canvas) {
                Ok(h) => explanations.push((method.clone(), h)),
                Err(e) if config.strict => return Err(e),
                Err(e) => {
                    problem = Some(e.to_string());
                    break;
                }
            }
        }
        if problem.is_none() && explanations.len() < 2 {
            problem = Some(format!("{} explanation heatmaps, need at least 2", explanations.len()));
        }
        if let Some(reason) = problem {
            skipped.insert(id.clone(), reason);
            continue;
        }
        images.push(ImageInputs {
            image_id: id.clone(),
            annotations: set.clone(),
            explanations,
            votes: votes.get(id).cloned(),
            truth: truth.get(id).copied(),
        });
    }
    Ok(ExperimentState {
        config: config.clone(),
        metrics,
        images,
        skipped,
        ingest_time: started.elapsed(),
    })
}

struct ImageResult {
    entry: ManifestEntry,
    table: Option<ScoreTable>,
    rankings: Vec<Ranking>,
    rbo_rows: Vec<RboRow>,
    sweeps: Vec<SweepRecord>,
}

fn evaluate_image(image: &ImageInputs, state: &ExperimentState) -> ImageResult {
    let config = &state.config;
    let mut result = ImageResult {
        entry: ManifestEntry {
            image_id: image.image_id.clone(),
            status: ImageStatus::Processed,
            notes: Vec::new(),
            cell_errors: Vec::new(),
        },
        table: None,
        rankings: Vec::new(),
        rbo_rows: Vec::new(),
        sweeps: Vec::new(),
    };
    let skip = |mut r: ImageResult, e: Error| {
        r.entry.status = ImageStatus::Skipped(e.to_string());
        r
    };

    let annotation = match aggregate_annotations(&image.annotations) {
        Ok(h) => h,
        Err(e) => return skip(result, e),
    };
    let (table, cell_errors) =
        match compute_score_table(&image.image_id, &annotation, &image.explanations, &state.metrics) {
            Ok(t) => t,
            Err(e) => return skip(result, e),
        };
    result.entry.cell_errors = cell_errors
        .iter()
        .map(|CellError { metric, method, message }| format!("{metric}/{method}: {message}"))
        .collect();

    let human = match &image.votes {
        None => {
            result.entry.notes.push("no votes".into());
            None
        }
        Some(tally) => match human_ranking(tally, &config.methods) {
            Ok(r) => Some(r),
            Err(e) => {
                result.entry.notes.push(e.to_string());
                None
            }
        },
    };
    if let Some(h) = &human {
        if h.has_ties() {
            result.entry.notes.push("human ranking has ties".into());
        }
        result.rankings.push(h.clone());
    }

    for &metric in &state.metrics {
        let ranking = match metric_ranking(&table, metric) {
            Ok(r) => r,
            Err(e) => {
                result.entry.notes.push(e.to_string());
                continue;
            }
        };
        if let Some(h) = &human {
            for &p in &config.p_values {
                // both rankings are non-empty and p was validated
                if let Ok(distance) = rbo_distance(h, &ranking, p) {
                    result.rbo_rows.push(RboRow {
                        image_id: image.image_id.clone(),
                        metric,
                        p,
                        distance,
                    });
                }
            }
        }
        result.rankings.push(ranking);
    }

    match &image.truth {
        None => result.entry.notes.push("no ground-truth box".into()),
        Some(truth) => {
            for (method, h) in &image.explanations {
                match sweep_thresholds(h, truth, &config.thresholds) {
                    Ok(sweep) => result.sweeps.push(SweepRecord {
                        image_id: image.image_id.clone(),
                        method: method.clone(),
                        sweep,
                    }),
                    Err(e) => result.entry.notes.push(format!("sweep {method}: {e}")),
                }
            }
        }
    }

    result.table = Some(table);
    result
}

/// Runs every stage on the ingested images. Per-image failures are recorded
/// in the manifest and never abort the run.
pub fn run_evaluation(state: &ExperimentState) -> EvaluationOutputs {
    let started = Instant::now();
    let results: Vec<ImageResult> = state
        .images
        .par_iter()
        .map(|image| evaluate_image(image, state))
        .collect();

    let mut entries: Vec<ManifestEntry> = state
        .skipped
        .iter()
        .map(|(id, reason)| ManifestEntry {
            image_id: id.clone(),
            status: ImageStatus::Skipped(reason.clone()),
            notes: Vec::new(),
            cell_errors: Vec::new(),
        })
        .collect();
    let mut score_tables = Vec::new();
    let mut rankings = Vec::new();
    let mut rbo_rows = Vec::new();
    let mut sweeps = Vec::new();
    for r in results {
        let id = r.entry.image_id.clone();
        entries.push(r.entry);
        score_tables.extend(r.table);
        rankings.extend(r.rankings.into_iter().map(|rk| (id.clone(), rk)));
        rbo_rows.extend(r.rbo_rows);
        sweeps.extend(r.sweeps);
    }
    entries.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    let rbo = best_metric_report(&rbo_rows, &state.config.p_values);

    EvaluationOutputs {
        score_tables,
        rankings,
        rbo,
        sweeps,
        manifest: RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: state.config.hash(),
            images: entries,
            timings: vec![
                ("ingest".into(), state.ingest_time),
                ("evaluate".into(), started.elapsed()),
            ],
        },
    }
}

/// Which report files to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportParts {
    pub scores: bool,
    pub rankings: bool,
    pub rbo: bool,
    pub sweeps: bool,
    pub summary: bool,
}

impl ReportParts {
    pub const ALL: ReportParts = ReportParts {
        scores: true,
        rankings: true,
        rbo: true,
        sweeps: true,
        summary: true,
    };
    pub const NONE: ReportParts = ReportParts {
        scores: false,
        rankings: false,
        rbo: false,
        sweeps: false,
        summary: false,
    };
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes the selected report files plus the manifest; returns their paths.
pub fn emit_report(outputs: &EvaluationOutputs, out_dir: &Path, parts: ReportParts) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let mut path = |name: &str| {
        let p = out_dir.join(name);
        written.push(p.clone());
        p
    };
    if parts.scores {
        io::write_score_tables(&outputs.score_tables, &path(SCORES_FILE))?;
    }
    if parts.rankings {
        io::write_rankings(&outputs.rankings, &path(RANKINGS_FILE))?;
    }
    if parts.rbo {
        io::write_rbo_rows(&outputs.rbo.rows, &path(RBO_FILE))?;
        io::write_best_counts(&outputs.rbo.counts, &path(BEST_FILE))?;
    }
    if parts.sweeps {
        io::write_sweeps(&outputs.sweeps, &path(SWEEPS_FILE))?;
    }
    if parts.summary {
        write_file(&path(SUMMARY_FILE), render_summary(outputs).as_bytes())?;
    }
    let mut manifest = serde_json::to_string_pretty(&outputs.manifest)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    manifest.push('\n');
    write_file(&path(MANIFEST_FILE), manifest.as_bytes())?;
    Ok(written)
}

fn fmt4(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

/// Human-readable Markdown summary with values rounded to 4 decimals.
pub fn render_summary(outputs: &EvaluationOutputs) -> String {
    let mut s = String::new();
    let p_values = &outputs.rbo.p_values;
    let _ = writeln!(s, "# Evaluation summary\n");
    let processed = outputs
        .manifest
        .images
        .iter()
        .filter(|e| e.status == ImageStatus::Processed)
        .count();
    let _ = writeln!(
        s,
        "{processed} of {} images processed. Lower scores are better; the best method per metric is in bold.\n",
        outputs.manifest.images.len()
    );

    let rank_p = p_values
        .iter()
        .copied()
        .find(|&p| p == 1.0)
        .or_else(|| p_values.last().copied());

    for table in &outputs.score_tables {
        let _ = writeln!(s, "## Image {}\n", table.image_id);
        let _ = writeln!(s, "### Normalized scores\n");
        let _ = writeln!(s, "| Metric | {} |", table.methods.join(" | "));
        let _ = writeln!(s, "|---|{}", "---|".repeat(table.methods.len()));
        for (r, metric) in table.metrics.iter().enumerate() {
            let best = table.best_methods(*metric);
            let cells: Vec<String> = table.normalized[r]
                .iter()
                .enumerate()
                .map(|(c, v)| {
                    if best.contains(&c) {
                        format!("**{}**", fmt4(*v))
                    } else {
                        fmt4(*v)
                    }
                })
                .collect();
            let _ = writeln!(s, "| {} | {} |", metric, cells.join(" | "));
        }
        let _ = writeln!(s);

        let image_rankings: Vec<&Ranking> = outputs
            .rankings
            .iter()
            .filter(|(id, _)| *id == table.image_id)
            .map(|(_, r)| r)
            .collect();
        if image_rankings.is_empty() {
            continue;
        }
        let depth = image_rankings.iter().map(|r| r.len()).max().unwrap_or(0);
        let rbo_header = rank_p.map(|p| format!(" RBO (p={p}) |")).unwrap_or_default();
        let _ = writeln!(s, "### Rankings\n");
        let positions: Vec<String> = (1..=depth).map(|d| d.to_string()).collect();
        let _ = writeln!(s, "| Ranking | {} |{rbo_header}", positions.join(" | "));
        let _ = writeln!(s, "|---|{}{}", "---|".repeat(depth), if rank_p.is_some() { "---|" } else { "" });
        for r in image_rankings {
            let mut cells: Vec<String> = r
                .items
                .iter()
                .enumerate()
                .map(|(i, m)| if r.tie_group(i).is_some() { format!("{m}=") } else { m.clone() })
                .collect();
            cells.resize(depth, "-".into());
            let rbo_cell = match (r.source, rank_p) {
                (_, None) => String::new(),
                (RankingSource::Human, Some(_)) => format!(" {} |", fmt4(Some(0.0))),
                (RankingSource::Metric(m), Some(p)) => {
                    let d = outputs
                        .rbo
                        .rows
                        .iter()
                        .find(|row| row.image_id == table.image_id && row.metric == m && row.p == p)
                        .map(|row| row.distance);
                    format!(" {} |", fmt4(d))
                }
            };
            let _ = writeln!(s, "| {} | {} |{rbo_cell}", r.source, cells.join(" | "));
        }
        let _ = writeln!(s);
    }

    if !outputs.rbo.counts.is_empty() {
        let _ = writeln!(s, "## Images where each metric had the best RBO\n");
        let header: Vec<String> = p_values.iter().map(|p| format!("p={p}")).collect();
        let _ = writeln!(s, "| Metric | {} |", header.join(" | "));
        let _ = writeln!(s, "|---|{}", "---|".repeat(p_values.len()));
        let metrics: BTreeSet<MetricId> = outputs.rbo.counts.iter().map(|c| c.metric).collect();
        for m in metrics {
            let cells: Vec<String> = p_values
                .iter()
                .map(|&p| outputs.rbo.count(m, p).unwrap_or(0).to_string())
                .collect();
            let _ = writeln!(s, "| {} | {} |", m, cells.join(" | "));
        }
        let _ = writeln!(s);
    }

    let _ = writeln!(s, "## RBO weights of the first three positions\n");
    let _ = writeln!(s, "| p | 1st | 2nd | 3rd |\n|---|---|---|---|");
    for &p in p_values {
        let cells: Vec<String> = (1..=3)
            .map(|d| format!("{:.1}%", position_weight(p, d).unwrap_or(0.0) * 100.0))
            .collect();
        let _ = writeln!(s, "| {p} | {} |", cells.join(" | "));
    }
    let _ = writeln!(s);

    let skipped: Vec<&ManifestEntry> = outputs
        .manifest
        .images
        .iter()
        .filter(|e| e.status != ImageStatus::Processed)
        .collect();
    if !skipped.is_empty() {
        let _ = writeln!(s, "## Skipped images\n");
        for e in skipped {
            if let ImageStatus::Skipped(reason) = &e.status {
                let _ = writeln!(s, "- {}: {reason}", e.image_id);
            }
        }
        let _ = writeln!(s);
    }
    s
}

/// Annotation heatmaps for every image in the annotation CSV.
pub fn aggregate_all(config: &ExperimentConfig) -> Result<Vec<(String, Heatmap)>> {
    let path = required(&config.annotations, "annotations")?;
    let sets = io::read_annotations(path, config.canvas.width, config.canvas.height)?;
    sets.values()
        .map(|set| Ok((set.image_id.clone(), aggregate_annotations(set)?)))
        .collect()
}
