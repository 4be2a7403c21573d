//! Rank-biased overlap between two finite rankings, truncated at the depth of
//! the shorter list, and the per-`p` "best metric" tally across images.
//!
//! For `0 < p < 1` the similarity is `(1 - p) Σ_{d=1..D} p^(d-1) A_d`, where
//! `A_d` is the overlap of the two depth-`d` prefixes divided by `d`. The two
//! endpoints use limit conventions: `p = 0` gives `A_1`, and `p = 1` gives the
//! plain mean of `A_1..A_D`. Truncation means identical lists of length `D`
//! score `1 - p^D` rather than 1 for `0 < p < 1`.

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::metrics::MetricId;
use crate::ranking::Ranking;

/// Two RBO distances closer than this are treated as a tie for "best metric".
pub const TIE_EPSILON: f64 = 1e-12;

/// Persistence values reported by default.
pub const DEFAULT_P_VALUES: [f64; 5] = [0.0, 0.5, 0.8, 0.9, 1.0];

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::PersistenceOutOfRange(p))
    }
}

/// Weight `(1 - p) p^(d-1)` given to depth `d` (1-based).
pub fn position_weight(p: f64, depth: usize) -> Result<f64> {
    check_p(p)?;
    if depth == 0 {
        return Err(Error::DepthOutOfRange { depth, max: usize::MAX });
    }
    Ok((1.0 - p) * p.powi(depth as i32 - 1))
}

/// `A_1..=A_D` for `D = min(|s|, |t|)`.
pub fn agreements(s: &Ranking, t: &Ranking) -> Vec<f64> {
    let depth = s.len().min(t.len());
    let mut seen_s = HashSet::with_capacity(depth);
    let mut seen_t = HashSet::with_capacity(depth);
    let mut overlap = 0usize;
    let mut out = Vec::with_capacity(depth);
    for d in 0..depth {
        let (a, b) = (s.items[d].as_str(), t.items[d].as_str());
        if a == b {
            overlap += 1;
        } else {
            overlap += seen_t.contains(a) as usize + seen_s.contains(b) as usize;
        }
        seen_s.insert(a);
        seen_t.insert(b);
        out.push(overlap as f64 / (d + 1) as f64);
    }
    out
}

/// `|prefix_d(s) ∩ prefix_d(t)| / d`.
pub fn agreement_at_depth(s: &Ranking, t: &Ranking, depth: usize) -> Result<f64> {
    let max = s.len().min(t.len());
    if depth == 0 || depth > max {
        return Err(Error::DepthOutOfRange { depth, max });
    }
    let prefix: HashSet<&str> = s.items[..depth].iter().map(String::as_str).collect();
    let shared = t.items[..depth]
        .iter()
        .filter(|m| prefix.contains(m.as_str()))
        .count();
    Ok(shared as f64 / depth as f64)
}

pub fn rbo_similarity(s: &Ranking, t: &Ranking, p: f64) -> Result<f64> {
    if s.is_empty() || t.is_empty() {
        return Err(Error::EmptyRanking);
    }
    check_p(p)?;
    let agreement = agreements(s, t);
    let sim = if p == 0.0 {
        agreement[0]
    } else if p == 1.0 {
        agreement.iter().sum::<f64>() / agreement.len() as f64
    } else {
        let mut weight = 1.0 - p;
        let mut sum = 0.0;
        for a in &agreement {
            sum += weight * a;
            weight *= p;
        }
        sum
    };
    Ok(sim.clamp(0.0, 1.0))
}

/// `1 - rbo_similarity`.
pub fn rbo_distance(s: &Ranking, t: &Ranking, p: f64) -> Result<f64> {
    Ok(1.0 - rbo_similarity(s, t, p)?)
}

/// RBO distance of one metric ranking to the human ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct RboRow {
    pub image_id: String,
    pub metric: MetricId,
    pub p: f64,
    pub distance: f64,
}

/// Metrics sharing the smallest distance for one image at one `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct BestSet {
    pub image_id: String,
    pub p: f64,
    pub metrics: Vec<MetricId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestCount {
    pub metric: MetricId,
    pub p: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RboReport {
    pub p_values: Vec<f64>,
    pub rows: Vec<RboRow>,
    pub best: Vec<BestSet>,
    pub counts: Vec<BestCount>,
}

impl RboReport {
    pub fn count(&self, metric: MetricId, p: f64) -> Option<usize> {
        self.counts
            .iter()
            .find(|c| c.metric == metric && c.p == p)
            .map(|c| c.count)
    }
}

/// For each `p` and image, the metrics with the smallest distance (ties all
/// count), and per metric the number of images where it was among them.
pub fn best_metric_report(rows: &[RboRow], p_values: &[f64]) -> RboReport {
    let metrics: Vec<MetricId> = {
        let mut m: Vec<_> = rows.iter().map(|r| r.metric).collect();
        m.sort();
        m.dedup();
        m
    };
    let mut by_image: BTreeMap<&str, Vec<&RboRow>> = BTreeMap::new();
    for row in rows {
        by_image.entry(row.image_id.as_str()).or_default().push(row);
    }

    let mut best = Vec::new();
    let mut tally: BTreeMap<(MetricId, usize), usize> = BTreeMap::new();
    for (pi, &p) in p_values.iter().enumerate() {
        for (image_id, image_rows) in &by_image {
            let at_p: Vec<&&RboRow> = image_rows.iter().filter(|r| r.p == p).collect();
            let Some(min) = at_p.iter().map(|r| r.distance).reduce(f64::min) else {
                continue;
            };
            let mut winners: Vec<MetricId> = at_p
                .iter()
                .filter(|r| r.distance - min <= TIE_EPSILON)
                .map(|r| r.metric)
                .collect();
            winners.sort();
            winners.dedup();
            for &m in &winners {
                *tally.entry((m, pi)).or_default() += 1;
            }
            best.push(BestSet {
                image_id: image_id.to_string(),
                p,
                metrics: winners,
            });
        }
    }

    let counts = metrics
        .iter()
        .flat_map(|&metric| {
            let tally = &tally;
            p_values.iter().enumerate().map(move |(pi, &p)| BestCount {
                metric,
                p,
                count: tally.get(&(metric, pi)).copied().unwrap_or(0),
            })
        })
        .collect();

    RboReport {
        p_values: p_values.to_vec(),
        rows: rows.to_vec(),
        best,
        counts,
    }
}
