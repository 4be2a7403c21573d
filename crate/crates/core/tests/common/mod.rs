//! Synthetic experiment directories for integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use xai_align::config::{Canvas, ExperimentConfig};
use xai_align::heatmap::{AnnotationSet, BoundingBox, Heatmap};
use xai_align::io::{self, VoteRecord};

pub struct FixtureSpec {
    pub images: usize,
    pub methods: usize,
    pub annotators: usize,
    pub voters: usize,
    pub canvas: (u32, u32),
    pub seed: u64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            images: 3,
            methods: 4,
            annotators: 5,
            voters: 10,
            canvas: (24, 20),
            seed: 7,
        }
    }
}

pub const METHODS: [&str; 4] = ["CAM", "ScCAM", "GCAM++", "LCAM"];

pub struct Fixture {
    pub root: PathBuf,
    pub config: ExperimentConfig,
}

impl Fixture {
    pub fn image_ids(&self) -> Vec<String> {
        let sets = io::read_annotations(self.config.annotations.as_ref().unwrap(), self.config.canvas.width, self.config.canvas.height).unwrap();
        sets.keys().cloned().collect()
    }

    pub fn heatmap_path(&self, image: &str, method: &str) -> PathBuf {
        let dir = self.config.heatmaps.as_ref().unwrap().join(image);
        let csv = dir.join(format!("{method}.csv"));
        if csv.exists() {
            csv
        } else {
            dir.join(format!("{method}.pgm"))
        }
    }
}

fn blob(w: u32, h: u32, cx: f64, cy: f64, sigma: f64, noise: &mut ChaCha8Rng) -> Heatmap {
    let mut values = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
            let v = (-d2 / (2.0 * sigma * sigma)).exp() + noise.gen_range(0.0..0.05);
            values.push(v);
        }
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    Heatmap::new(w, h, values.into_iter().map(|v| v / max).collect()).unwrap()
}

/// Writes annotations, heatmaps, votes, truth and a config file under `root`.
pub fn write_fixture(root: &Path, spec: &FixtureSpec) -> Fixture {
    let (w, h) = spec.canvas;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let methods: Vec<String> = METHODS.iter().take(spec.methods).map(|s| s.to_string()).collect();
    let heatmap_dir = root.join("heatmaps");
    let mut sets = BTreeMap::new();
    let mut truth = BTreeMap::new();
    let mut votes = Vec::new();

    for i in 0..spec.images {
        let image_id = format!("n02085620_{:04}", 1000 + i * 37);
        let cx = rng.gen_range(6..w - 6);
        let cy = rng.gen_range(5..h - 5);
        let gt = BoundingBox::new(cx - 4, cy - 3, cx + 4, cy + 3).unwrap();
        truth.insert(image_id.clone(), gt);

        let mut set = AnnotationSet::new(&image_id, w, h);
        for a in 0..spec.annotators {
            let x0 = (gt.x_min as i64 + rng.gen_range(-2..=1)).clamp(0, w as i64 - 2) as u32;
            let y0 = (gt.y_min as i64 + rng.gen_range(-2..=1)).clamp(0, h as i64 - 2) as u32;
            let x1 = (gt.x_max as i64 + rng.gen_range(-1..=2)).clamp(x0 as i64 + 1, w as i64) as u32;
            let y1 = (gt.y_max as i64 + rng.gen_range(-1..=2)).clamp(y0 as i64 + 1, h as i64) as u32;
            set.push(format!("annotator{a}"), BoundingBox::new(x0, y0, x1, y1).unwrap()).unwrap();
        }
        sets.insert(image_id.clone(), set);

        let dir = heatmap_dir.join(&image_id);
        fs::create_dir_all(&dir).unwrap();
        for (m, method) in methods.iter().enumerate() {
            let offset = m as f64 * 1.5;
            let hm = blob(w, h, cx as f64 + offset, cy as f64 - offset / 2.0, 2.0 + m as f64, &mut rng);
            if m % 2 == 0 {
                io::write_heatmap_csv(&hm, &dir.join(format!("{method}.csv"))).unwrap();
            } else {
                io::write_pgm(&hm, &dir.join(format!("{method}.pgm"))).unwrap();
            }
        }

        for v in 0..spec.voters {
            // skewed towards the first methods
            let pick = (rng.gen_range(0.0f64..1.0).powi(2) * methods.len() as f64) as usize;
            votes.push(VoteRecord {
                image_id: image_id.clone(),
                participant_id: format!("participant{v}"),
                method: methods[pick.min(methods.len() - 1)].clone(),
            });
        }
    }

    let annotations = root.join("annotations.csv");
    let votes_path = root.join("votes.csv");
    let truth_path = root.join("truth.csv");
    io::write_annotations(&sets, &annotations).unwrap();
    io::write_votes(&votes, &votes_path).unwrap();
    io::write_truth(&truth, &truth_path).unwrap();

    let config = ExperimentConfig {
        canvas: Canvas { width: w, height: h },
        annotations: Some(annotations),
        heatmaps: Some(heatmap_dir),
        votes: Some(votes_path),
        truth: Some(truth_path),
        methods,
        ..ExperimentConfig::default()
    };
    let toml = format!(
        "canvas = \"{w}x{h}\"\nannotations = \"annotations.csv\"\nheatmaps = \"heatmaps\"\nvotes = \"votes.csv\"\ntruth = \"truth.csv\"\nmethods = [{}]\n",
        config.methods.iter().map(|m| format!("\"{m}\"")).collect::<Vec<_>>().join(", ")
    );
    fs::write(root.join("experiment.toml"), toml).unwrap();
    Fixture {
        root: root.to_path_buf(),
        config,
    }
}

/// All regular files in `dir`, by name.
pub fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}
