//! Per-image score tables: every metric applied to the annotation heatmap
//! and each method's explanation heatmap, plus per-metric min-max scaling.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heatmap::{flatten, Heatmap};
use crate::metrics::MetricId;

/// One cell that could not be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct CellError {
    pub metric: MetricId,
    pub method: String,
    pub message: String,
}

/// Raw and normalized distances, indexed `[metric][method]`.
///
/// A `None` cell means the metric was undefined for that pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub image_id: String,
    pub metrics: Vec<MetricId>,
    pub methods: Vec<String>,
    pub raw: Vec<Vec<Option<f64>>>,
    pub normalized: Vec<Vec<Option<f64>>>,
}

impl ScoreTable {
    /// Builds a table from raw scores, deriving the normalized matrix.
    pub fn from_raw(
        image_id: impl Into<String>,
        metrics: Vec<MetricId>,
        methods: Vec<String>,
        raw: Vec<Vec<Option<f64>>>,
    ) -> Self {
        let normalized = raw.iter().map(|row| min_max_normalize(row)).collect();
        ScoreTable {
            image_id: image_id.into(),
            metrics,
            methods,
            raw,
            normalized,
        }
    }

    pub fn metric_row(&self, metric: MetricId) -> Option<usize> {
        self.metrics.iter().position(|&m| m == metric)
    }

    pub fn raw_row(&self, metric: MetricId) -> Option<&[Option<f64>]> {
        self.metric_row(metric).map(|r| self.raw[r].as_slice())
    }

    pub fn normalized_row(&self, metric: MetricId) -> Option<&[Option<f64>]> {
        self.metric_row(metric).map(|r| self.normalized[r].as_slice())
    }

    /// Indices of the methods with the lowest raw score for `metric`.
    pub fn best_methods(&self, metric: MetricId) -> Vec<usize> {
        let Some(row) = self.raw_row(metric) else {
            return Vec::new();
        };
        let Some(min) = row.iter().flatten().copied().reduce(f64::min) else {
            return Vec::new();
        };
        (0..row.len()).filter(|&i| row[i] == Some(min)).collect()
    }
}

/// `(x - min) / (max - min)` over the present cells; all zero when the row is
/// constant.
pub fn min_max_normalize(row: &[Option<f64>]) -> Vec<Option<f64>> {
    let present = row.iter().flatten().copied();
    let (min, max) = present.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    });
    row.iter()
        .map(|cell| {
            cell.map(|x| {
                if max > min {
                    (x - min) / (max - min)
                } else {
                    0.0
                }
            })
        })
        .collect()
}

/// Scores every method's heatmap against the annotation heatmap.
///
/// Metric failures on individual cells are returned alongside the table and
/// leave the cell empty.
pub fn compute_score_table(
    image_id: &str,
    annotation: &Heatmap,
    explanations: &[(String, Heatmap)],
    metrics: &[MetricId],
) -> Result<(ScoreTable, Vec<CellError>)> {
    if explanations.len() < 2 {
        return Err(Error::TooFewMethods(explanations.len()));
    }
    let (w, h) = annotation.dimensions();
    for (method, heatmap) in explanations {
        if heatmap.dimensions() != (w, h) {
            return Err(Error::DimensionMismatch {
                context: Some(format!("heatmap {image_id}/{method}")),
                expected_width: w,
                expected_height: h,
                width: heatmap.width(),
                height: heatmap.height(),
            });
        }
    }
    let reference = flatten(annotation);
    let flats: Vec<Vec<f64>> = explanations.iter().map(|(_, h)| flatten(h)).collect();

    let cells: Vec<Vec<Result<f64>>> = metrics
        .par_iter()
        .map(|metric| {
            flats
                .iter()
                .map(|v| metric.distance(&reference, v))
                .collect()
        })
        .collect();

    let mut errors = Vec::new();
    let raw = cells
        .into_iter()
        .zip(metrics)
        .map(|(row, &metric)| {
            row.into_iter()
                .zip(explanations)
                .map(|(cell, (method, _))| match cell {
                    Ok(d) => Some(d),
                    Err(e) => {
                        errors.push(CellError {
                            metric,
                            method: method.clone(),
                            message: e.to_string(),
                        });
                        None
                    }
                })
                .collect()
        })
        .collect();
    let methods = explanations.iter().map(|(m, _)| m.clone()).collect();
    Ok((
        ScoreTable::from_raw(image_id, metrics.to_vec(), methods, raw),
        errors,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hm(values: &[f64]) -> Heatmap {
        Heatmap::new(values.len() as u32, 1, values.to_vec()).unwrap()
    }

    #[test]
    fn identical_method_normalizes_to_zero() {
        let annotation = hm(&[0.0, 0.5, 1.0, 0.25]);
        let explanations = vec![
            ("same".to_string(), annotation.clone()),
            ("other".to_string(), hm(&[1.0, 0.2, 0.0, 0.6])),
        ];
        let (table, errors) =
            compute_score_table("img", &annotation, &explanations, &MetricId::ALL).unwrap();
        assert!(errors.is_empty());
        assert_eq!(table.raw.len(), 12);
        for row in &table.normalized {
            assert_eq!(row[0], Some(0.0));
            assert_eq!(row[1], Some(1.0));
        }
        assert_eq!(table.best_methods(MetricId::Manhattan), vec![0]);
    }

    #[test]
    fn constant_row_normalizes_to_zero() {
        assert_eq!(
            min_max_normalize(&[Some(0.3), Some(0.3), None]),
            vec![Some(0.0), Some(0.0), None]
        );
    }

    #[test]
    fn degenerate_cells_are_recorded() {
        let annotation = hm(&[0.0, 1.0, 0.5]);
        let explanations = vec![
            ("flat".to_string(), hm(&[0.4, 0.4, 0.4])),
            ("zero".to_string(), hm(&[0.0, 0.0, 0.0])),
            ("ok".to_string(), hm(&[0.1, 0.9, 0.2])),
        ];
        let (table, errors) =
            compute_score_table("img", &annotation, &explanations, &MetricId::ALL).unwrap();
        let cr = table.raw_row(MetricId::Correlation).unwrap();
        assert_eq!(cr[0], None);
        assert_eq!(cr[1], None);
        assert!(cr[2].is_some());
        assert!(table.raw_row(MetricId::Cosine).unwrap()[1].is_none());
        assert!(table.raw_row(MetricId::JensenShannon).unwrap()[1].is_none());
        assert!(errors.iter().any(|e| e.metric == MetricId::Correlation && e.method == "flat"));
        // WJ is still defined: the annotation has mass
        assert!(table.raw_row(MetricId::WeightedJaccard).unwrap()[1].is_some());
    }

    #[test]
    fn table_preconditions() {
        let a = hm(&[1.0, 0.0]);
        assert!(matches!(
            compute_score_table("img", &a, &[("x".into(), a.clone())], &MetricId::ALL),
            Err(Error::TooFewMethods(1))
        ));
        let explanations = vec![("x".to_string(), a.clone()), ("y".to_string(), hm(&[1.0, 0.0, 0.0]))];
        assert!(matches!(
            compute_score_table("img", &a, &explanations, &MetricId::ALL),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn normalization_preserves_order(row in prop::collection::vec(prop::option::weighted(0.9, 0.0f64..10.0), 2..12)) {
            let norm = min_max_normalize(&row);
            let present: Vec<(f64, f64)> = row.iter().zip(&norm).filter_map(|(r, n)| Some(((*r)?, (*n)?))).collect();
            for &(ra, na) in &present {
                prop_assert!((0.0..=1.0).contains(&na));
                for &(rb, nb) in &present {
                    prop_assert_eq!(ra.partial_cmp(&rb), na.partial_cmp(&nb));
                }
            }
            if let Some(min) = present.iter().map(|p| p.1).reduce(f64::min) {
                prop_assert_eq!(min, 0.0);
            }
        }
    }
}
