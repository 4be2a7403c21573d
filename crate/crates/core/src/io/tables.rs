//! Report tables: scores, rankings, RBO distances, best-metric counts and
//! threshold sweeps.

use std::collections::BTreeMap;
use std::path::Path;

use super::{create_writer, csv_error, finish, fmt_opt, CsvRows};
use crate::bbox::{SweepPoint, ThresholdSweep};
use crate::error::Result;
use crate::heatmap::BoundingBox;
use crate::metrics::MetricId;
use crate::ranking::{Ranking, RankingSource};
use crate::rbo::{BestCount, RboRow};
use crate::score::ScoreTable;

const SCORE_HEADER: [&str; 5] = ["image_id", "metric", "method", "raw", "normalized"];
const RANKING_HEADER: [&str; 5] = ["image_id", "source", "position", "method", "tied"];
const RBO_HEADER: [&str; 4] = ["image_id", "metric", "p", "rbo_distance"];
const BEST_HEADER: [&str; 3] = ["metric", "p", "best_count"];
const SWEEP_HEADER: [&str; 8] = ["image_id", "method", "threshold", "x_min", "y_min", "x_max", "y_max", "iou"];

/// Groups consecutive-or-not rows by key, keeping first-appearance order.
fn group_ordered<K: PartialEq, V>(items: impl IntoIterator<Item = (K, V)>) -> Vec<(K, Vec<V>)> {
    let mut out: Vec<(K, Vec<V>)> = Vec::new();
    for (k, v) in items {
        match out.iter_mut().find(|(key, _)| *key == k) {
            Some((_, vs)) => vs.push(v),
            None => out.push((k, vec![v])),
        }
    }
    out
}

fn push_unique<T: PartialEq>(v: &mut Vec<T>, x: T) -> usize {
    match v.iter().position(|y| *y == x) {
        Some(i) => i,
        None => {
            v.push(x);
            v.len() - 1
        }
    }
}

pub fn write_score_tables(tables: &[ScoreTable], path: &Path) -> Result<()> {
    let mut w = create_writer(path)?;
    w.write_record(SCORE_HEADER).map_err(|e| csv_error(path, e))?;
    for t in tables {
        for (r, metric) in t.metrics.iter().enumerate() {
            for (c, method) in t.methods.iter().enumerate() {
                w.write_record([
                    t.image_id.as_str(),
                    metric.acronym(),
                    method,
                    &fmt_opt(t.raw[r][c]),
                    &fmt_opt(t.normalized[r][c]),
                ])
                .map_err(|e| csv_error(path, e))?;
            }
        }
    }
    finish(path, w)
}

pub fn read_score_tables(path: &Path) -> Result<Vec<ScoreTable>> {
    let rows = CsvRows::read(path, &SCORE_HEADER)?;
    let mut parsed = Vec::with_capacity(rows.rows.len());
    for (line, rec) in &rows.rows {
        let metric: MetricId = rec[1].parse().map_err(|e: crate::Error| rows.error(*line, e.to_string()))?;
        let raw = rows.parse_opt::<f64>(*line, rec, 3, "raw")?;
        let norm = rows.parse_opt::<f64>(*line, rec, 4, "normalized")?;
        parsed.push((rec[0].to_string(), (*line, metric, rec[2].to_string(), raw, norm)));
    }
    group_ordered(parsed)
        .into_iter()
        .map(|(image_id, cells)| {
            let mut metrics = Vec::new();
            let mut methods = Vec::new();
            for (_, m, method, _, _) in &cells {
                push_unique(&mut metrics, *m);
                push_unique(&mut methods, method.clone());
            }
            let mut raw = vec![vec![None; methods.len()]; metrics.len()];
            let mut normalized = raw.clone();
            let mut filled = vec![vec![false; methods.len()]; metrics.len()];
            for (line, m, method, r, n) in cells {
                let ri = push_unique(&mut metrics, m);
                let ci = push_unique(&mut methods, method);
                if std::mem::replace(&mut filled[ri][ci], true) {
                    return Err(rows.error(line, "duplicate score cell"));
                }
                raw[ri][ci] = r;
                normalized[ri][ci] = n;
            }
            if filled.iter().flatten().any(|f| !f) {
                return Err(rows.error(0, format!("score table for {image_id:?} is incomplete")));
            }
            Ok(ScoreTable {
                image_id,
                metrics,
                methods,
                raw,
                normalized,
            })
        })
        .collect()
}

/// Writes rankings. The `tied` column holds the 1-based position where the
/// item's tie group starts, or is empty for untied items.
pub fn write_rankings(rankings: &[(String, Ranking)], path: &Path) -> Result<()> {
    let mut w = create_writer(path)?;
    w.write_record(RANKING_HEADER).map_err(|e| csv_error(path, e))?;
    for (image_id, ranking) in rankings {
        let source = ranking.source.to_string();
        for (i, method) in ranking.items.iter().enumerate() {
            let tied = ranking
                .tie_group(i)
                .map(|g| (g.start + 1).to_string())
                .unwrap_or_default();
            w.write_record([image_id.as_str(), &source, &(i + 1).to_string(), method, &tied])
                .map_err(|e| csv_error(path, e))?;
        }
    }
    finish(path, w)
}

pub fn read_rankings(path: &Path) -> Result<Vec<(String, Ranking)>> {
    let rows = CsvRows::read(path, &RANKING_HEADER)?;
    let mut parsed = Vec::with_capacity(rows.rows.len());
    for (line, rec) in &rows.rows {
        let source: RankingSource = rec[1].parse().map_err(|e: crate::Error| rows.error(*line, e.to_string()))?;
        let position: usize = rows.parse(*line, rec, 2, "position")?;
        let tied: Option<usize> = rows.parse_opt(*line, rec, 4, "tied")?;
        parsed.push(((rec[0].to_string(), source), (*line, position, rec[3].to_string(), tied)));
    }
    group_ordered(parsed)
        .into_iter()
        .map(|((image_id, source), entries)| {
            let mut items = Vec::with_capacity(entries.len());
            let mut groups: BTreeMap<usize, std::ops::Range<usize>> = BTreeMap::new();
            for (i, (line, position, method, tied)) in entries.into_iter().enumerate() {
                if position != i + 1 {
                    return Err(rows.error(line, format!("expected position {}, found {position}", i + 1)));
                }
                if let Some(start) = tied {
                    let g = groups.entry(start).or_insert(i..i);
                    if g.end != i || start == 0 || start - 1 != g.start {
                        return Err(rows.error(line, "tie group is not contiguous"));
                    }
                    g.end = i + 1;
                }
                items.push(method);
            }
            let ranking = Ranking::new(source, items, groups.into_values().collect())?;
            Ok((image_id, ranking))
        })
        .collect()
}

pub fn write_rbo_rows(rows: &[RboRow], path: &Path) -> Result<()> {
    let mut w = create_writer(path)?;
    w.write_record(RBO_HEADER).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.write_record([
            r.image_id.as_str(),
            r.metric.acronym(),
            &r.p.to_string(),
            &r.distance.to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    finish(path, w)
}

pub fn read_rbo_rows(path: &Path) -> Result<Vec<RboRow>> {
    let rows = CsvRows::read(path, &RBO_HEADER)?;
    rows.rows
        .iter()
        .map(|(line, rec)| {
            Ok(RboRow {
                image_id: rec[0].to_string(),
                metric: rec[1].parse().map_err(|e: crate::Error| rows.error(*line, e.to_string()))?,
                p: rows.parse(*line, rec, 2, "p")?,
                distance: rows.parse(*line, rec, 3, "rbo_distance")?,
            })
        })
        .collect()
}

pub fn write_best_counts(counts: &[BestCount], path: &Path) -> Result<()> {
    let mut w = create_writer(path)?;
    w.write_record(BEST_HEADER).map_err(|e| csv_error(path, e))?;
    for c in counts {
        w.write_record([c.metric.acronym(), &c.p.to_string(), &c.count.to_string()])
            .map_err(|e| csv_error(path, e))?;
    }
    finish(path, w)
}

pub fn read_best_counts(path: &Path) -> Result<Vec<BestCount>> {
    let rows = CsvRows::read(path, &BEST_HEADER)?;
    rows.rows
        .iter()
        .map(|(line, rec)| {
            Ok(BestCount {
                metric: rec[0].parse().map_err(|e: crate::Error| rows.error(*line, e.to_string()))?,
                p: rows.parse(*line, rec, 1, "p")?,
                count: rows.parse(*line, rec, 2, "best_count")?,
            })
        })
        .collect()
}

/// Threshold sweep of one method's heatmap for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub image_id: String,
    pub method: String,
    pub sweep: ThresholdSweep,
}

pub fn write_sweeps(records: &[SweepRecord], path: &Path) -> Result<()> {
    let mut w = create_writer(path)?;
    w.write_record(SWEEP_HEADER).map_err(|e| csv_error(path, e))?;
    for r in records {
        for p in &r.sweep.points {
            let coords = match p.bbox {
                Some(b) => [b.x_min, b.y_min, b.x_max, b.y_max].map(|v| v.to_string()),
                None => Default::default(),
            };
            let [x0, y0, x1, y1] = &coords;
            w.write_record([
                r.image_id.as_str(),
                &r.method,
                &p.threshold.to_string(),
                x0,
                y0,
                x1,
                y1,
                &fmt_opt(p.iou),
            ])
            .map_err(|e| csv_error(path, e))?;
        }
    }
    finish(path, w)
}

pub fn read_sweeps(path: &Path) -> Result<Vec<SweepRecord>> {
    let rows = CsvRows::read(path, &SWEEP_HEADER)?;
    let mut parsed = Vec::with_capacity(rows.rows.len());
    for (line, rec) in &rows.rows {
        let threshold: f64 = rows.parse(*line, rec, 2, "threshold")?;
        let coords = (3..7)
            .map(|c| rows.parse_opt::<u32>(*line, rec, c, SWEEP_HEADER[c]))
            .collect::<Result<Vec<_>>>()?;
        let bbox = match coords.as_slice() {
            [Some(x0), Some(y0), Some(x1), Some(y1)] => Some(
                BoundingBox::new(*x0, *y0, *x1, *y1).map_err(|e| rows.error(*line, e.to_string()))?,
            ),
            [None, None, None, None] => None,
            _ => return Err(rows.error(*line, "partially specified box")),
        };
        let iou = rows.parse_opt::<f64>(*line, rec, 7, "iou")?;
        if iou.is_some() != bbox.is_some() {
            return Err(rows.error(*line, "iou must be present exactly when a box is"));
        }
        parsed.push((
            (rec[0].to_string(), rec[1].to_string()),
            SweepPoint { threshold, bbox, iou },
        ));
    }
    Ok(group_ordered(parsed)
        .into_iter()
        .map(|((image_id, method), points)| SweepRecord {
            image_id,
            method,
            sweep: ThresholdSweep { points },
        })
        .collect())
}
