//! Human and metric rankings of explainability methods.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::MetricId;
use crate::score::ScoreTable;

/// The nine CAM-family methods, in registry order.
pub const DEFAULT_METHODS: [&str; 9] = [
    "CAM", "SSCAM", "ISCAM", "ScCAM", "GCAM", "GCAM++", "SGCAM++", "XGCAM", "LCAM",
];

pub fn default_methods() -> Vec<String> {
    DEFAULT_METHODS.iter().map(|s| s.to_string()).collect()
}

/// Votes for one image: each participant picks exactly one method.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VoteTally {
    pub image_id: String,
    pub votes: BTreeMap<String, u64>,
}

impl VoteTally {
    pub fn new(image_id: impl Into<String>) -> Self {
        VoteTally {
            image_id: image_id.into(),
            votes: BTreeMap::new(),
        }
    }

    pub fn add_vote(&mut self, method: impl Into<String>) {
        *self.votes.entry(method.into()).or_default() += 1;
    }

    pub fn total(&self) -> u64 {
        self.votes.values().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RankingSource {
    Human,
    Metric(MetricId),
}

impl fmt::Display for RankingSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankingSource::Human => f.write_str("H"),
            RankingSource::Metric(m) => write!(f, "{m}"),
        }
    }
}

impl FromStr for RankingSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "H" || s.eq_ignore_ascii_case("human") {
            Ok(RankingSource::Human)
        } else {
            s.parse().map(RankingSource::Metric)
        }
    }
}

/// Ordered method list, best first. `ties` holds contiguous position ranges
/// (length >= 2) whose underlying scores were equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    pub source: RankingSource,
    pub items: Vec<String>,
    pub ties: Vec<Range<usize>>,
}

impl Ranking {
    pub fn new(source: RankingSource, items: Vec<String>, ties: Vec<Range<usize>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for item in &items {
            if !seen.insert(item.as_str()) {
                return Err(Error::DuplicateItem(item.clone()));
            }
        }
        Ok(Ranking {
            source,
            items,
            ties,
        })
    }

    /// Ranking without ties, mostly for fixtures.
    pub fn from_items<S: AsRef<str>>(source: RankingSource, items: &[S]) -> Result<Self> {
        Ranking::new(
            source,
            items.iter().map(|s| s.as_ref().to_string()).collect(),
            Vec::new(),
        )
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Tie group containing `position`, if any.
    pub fn tie_group(&self, position: usize) -> Option<&Range<usize>> {
        self.ties.iter().find(|r| r.contains(&position))
    }

    pub fn has_ties(&self) -> bool {
        !self.ties.is_empty()
    }
}

/// Sorts `(key, registry_index, name)` entries and records runs of equal keys.
fn build_ranking<K: PartialOrd + Copy>(
    source: RankingSource,
    mut entries: Vec<(K, usize, String)>,
) -> Result<Ranking> {
    entries.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    let mut ties = Vec::new();
    let mut start = 0;
    for i in 1..=entries.len() {
        if i == entries.len() || entries[i].0 != entries[start].0 {
            if i - start >= 2 {
                ties.push(start..i);
            }
            start = i;
        }
    }
    Ranking::new(source, entries.into_iter().map(|e| e.2).collect(), ties)
}

fn registry_index(registry: &[String], method: &str) -> Result<usize> {
    registry
        .iter()
        .position(|m| m == method)
        .ok_or_else(|| Error::UnknownMethod {
            method: method.to_string(),
            line: None,
        })
}

/// Methods by vote count, most voted first. Zero-vote methods are left out;
/// equal counts keep registry order and are flagged as ties.
pub fn human_ranking(tally: &VoteTally, registry: &[String]) -> Result<Ranking> {
    if tally.total() == 0 {
        return Err(Error::NoVotes(tally.image_id.clone()));
    }
    let entries = tally
        .votes
        .iter()
        .filter(|(_, &n)| n > 0)
        .map(|(m, &n)| Ok((std::cmp::Reverse(n), registry_index(registry, m)?, m.clone())))
        .collect::<Result<Vec<_>>>()?;
    build_ranking(RankingSource::Human, entries)
}

/// Methods by raw distance for `metric`, lowest first. Methods whose cell is
/// missing are left out; equal scores keep table order and are flagged.
pub fn metric_ranking(table: &ScoreTable, metric: MetricId) -> Result<Ranking> {
    let row = table
        .raw_row(metric)
        .ok_or(Error::MissingMetricRow(metric.acronym()))?;
    let entries: Vec<_> = row
        .iter()
        .enumerate()
        .filter_map(|(i, cell)| cell.map(|d| (d, i, table.methods[i].clone())))
        .collect();
    if entries.is_empty() {
        return Err(Error::MissingMetricRow(metric.acronym()));
    }
    build_ranking(RankingSource::Metric(metric), entries)
}
