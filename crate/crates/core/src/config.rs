//! Experiment configuration, loadable from a TOML file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bbox::{check_thresholds, default_thresholds};
use crate::error::{Error, Result};
use crate::metrics::MetricId;
use crate::ranking::default_methods;
use crate::rbo::DEFAULT_P_VALUES;

/// Canvas size in pixels, written `WxH`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Canvas {
    pub width: u32,
    pub height: u32,
}

impl Default for Canvas {
    fn default() -> Self {
        Canvas {
            width: 224,
            height: 224,
        }
    }
}

impl FromStr for Canvas {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("canvas must look like 224x224, got {s:?}"));
        let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let width: u32 = w.trim().parse().map_err(|_| bad())?;
        let height: u32 = h.trim().parse().map_err(|_| bad())?;
        if width == 0 || height == 0 {
            return Err(bad());
        }
        Ok(Canvas { width, height })
    }
}

impl TryFrom<String> for Canvas {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Canvas> for String {
    fn from(c: Canvas) -> String {
        c.to_string()
    }
}

impl fmt::Display for Canvas {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub canvas: Canvas,
    /// Annotation CSV (`image_id,annotator_id,x_min,y_min,x_max,y_max`).
    pub annotations: Option<PathBuf>,
    /// Directory laid out as `<image_id>/<method>.{csv,pgm}`.
    pub heatmaps: Option<PathBuf>,
    pub votes: Option<PathBuf>,
    /// Ground-truth CSV (`image_id,x_min,y_min,x_max,y_max`).
    pub truth: Option<PathBuf>,
    pub methods: Vec<String>,
    pub metrics: Vec<String>,
    pub p_values: Vec<f64>,
    pub thresholds: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Fail instead of skipping an image when one of its heatmaps is unreadable.
    pub strict: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            canvas: Canvas::default(),
            annotations: None,
            heatmaps: None,
            votes: None,
            truth: None,
            methods: default_methods(),
            metrics: MetricId::ALL.iter().map(|m| m.acronym().to_string()).collect(),
            p_values: DEFAULT_P_VALUES.to_vec(),
            thresholds: default_thresholds(),
            out_dir: None,
            strict: false,
        }
    }
}

impl ExperimentConfig {
    /// Parses a TOML config. Relative paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut config.annotations,
            &mut config.heatmaps,
            &mut config.votes,
            &mut config.truth,
            &mut config.out_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn metric_ids(&self) -> Result<Vec<MetricId>> {
        self.metrics.iter().map(|m| m.parse()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("method registry is empty".into()));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::InvalidConfig(format!("method {m:?} listed twice")));
            }
        }
        let metrics = self.metric_ids()?;
        if metrics.is_empty() {
            return Err(Error::InvalidConfig("metric set is empty".into()));
        }
        for (i, m) in metrics.iter().enumerate() {
            if metrics[..i].contains(m) {
                return Err(Error::InvalidConfig(format!("metric {m} listed twice")));
            }
        }
        if let Some(p) = self.p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::PersistenceOutOfRange(*p));
        }
        check_thresholds(&self.thresholds)
    }

    /// SHA-256 of the configuration, excluding the output directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = None;
        let text = toml::to_string(&canonical).unwrap_or_default();
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
