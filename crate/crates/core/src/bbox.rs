//! Threshold-and-box baseline: cut a heatmap at a value threshold, take the
//! tightest box around what survives and score it with IoU.

use crate::error::{Error, Result};
use crate::heatmap::{BoundingBox, Heatmap};

/// Thresholds 0.1, 0.2, ..., 0.9.
pub fn default_thresholds() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

/// Tightest box around every pixel with value `>= t`, or `None` when no pixel
/// survives.
pub fn threshold_to_bbox(h: &Heatmap, t: f64) -> Result<Option<BoundingBox>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::ThresholdOutOfRange(t));
    }
    let mut bounds: Option<(u32, u32, u32, u32)> = None;
    for (y, row) in h.rows().enumerate() {
        let y = y as u32;
        let Some(first) = row.iter().position(|&v| v >= t) else {
            continue;
        };
        let last = row.iter().rposition(|&v| v >= t).unwrap_or(first);
        let (first, last) = (first as u32, last as u32);
        bounds = Some(match bounds {
            None => (first, y, last, y),
            Some((x0, y0, x1, _)) => (x0.min(first), y0, x1.max(last), y),
        });
    }
    bounds
        .map(|(x0, y0, x1, y1)| BoundingBox::new(x0, y0, x1 + 1, y1 + 1))
        .transpose()
}

/// Intersection over union of two boxes, in `[0, 1]`.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let ix = a.x_max.min(b.x_max).saturating_sub(a.x_min.max(b.x_min)) as u64;
    let iy = a.y_max.min(b.y_max).saturating_sub(a.y_min.max(b.y_min)) as u64;
    let inter = ix * iy;
    let union = a.area() + b.area() - inter;
    inter as f64 / union as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub threshold: f64,
    pub bbox: Option<BoundingBox>,
    pub iou: Option<f64>,
}

/// IoU of the derived box against ground truth at each threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSweep {
    pub points: Vec<SweepPoint>,
}

impl ThresholdSweep {
    pub fn thresholds(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.threshold)
    }

    /// Point with the highest IoU; ties keep the smallest threshold.
    pub fn best(&self) -> Option<&SweepPoint> {
        self.points
            .iter()
            .filter(|p| p.iou.is_some())
            .fold(None, |best: Option<&SweepPoint>, p| match best {
                Some(b) if b.iou >= p.iou => Some(b),
                _ => Some(p),
            })
    }
}

pub fn check_thresholds(thresholds: &[f64]) -> Result<()> {
    if let Some(&t) = thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::ThresholdOutOfRange(t));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::ThresholdsNotIncreasing);
    }
    Ok(())
}

pub fn sweep_thresholds(
    h: &Heatmap,
    truth: &BoundingBox,
    thresholds: &[f64],
) -> Result<ThresholdSweep> {
    check_thresholds(thresholds)?;
    let points = thresholds
        .iter()
        .map(|&threshold| {
            let bbox = threshold_to_bbox(h, threshold)?;
            Ok(SweepPoint {
                threshold,
                iou: bbox.as_ref().map(|b| iou(b, truth)),
                bbox,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ThresholdSweep { points })
}
