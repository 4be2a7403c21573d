//! Measure how closely explanation heatmaps follow human perception.
//!
//! Crowdsourced bounding boxes are aggregated into an annotation heatmap
//! ([`heatmap`]), each explainability method's heatmap is scored against it
//! with twelve distance metrics ([`metrics`], [`score`]), the resulting
//! per-metric rankings are compared to a human vote ranking with rank-biased
//! overlap ([`ranking`], [`rbo`]), and a threshold/IoU baseline is available
//! in [`bbox`]. [`pipeline`] ties it together over a directory of inputs.
//!
//! ```
//! use xai_align::ranking::{Ranking, RankingSource};
//! use xai_align::rbo::rbo_distance;
//!
//! let human = Ranking::from_items(RankingSource::Human, &["LCAM", "CAM", "XGCAM"]).unwrap();
//! let metric = Ranking::from_items(RankingSource::Human, &["CAM", "LCAM", "GCAM"]).unwrap();
//! // A_1 = 0, A_2 = 1, A_3 = 2/3
//! let d = rbo_distance(&human, &metric, 1.0).unwrap();
//! assert!((d - (1.0 - 5.0 / 9.0)).abs() < 1e-12);
//! ```

pub mod bbox;
pub mod config;
pub mod error;
pub mod heatmap;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod ranking;
pub mod rbo;
pub mod render;
pub mod score;

pub use error::{Error, Result};
pub use heatmap::{AnnotationSet, BoundingBox, Heatmap};
pub use metrics::MetricId;
pub use ranking::{Ranking, RankingSource, VoteTally};
pub use score::ScoreTable;
