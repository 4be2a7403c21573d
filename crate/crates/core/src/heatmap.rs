//! Heatmaps, pixel boxes and crowd annotation aggregation.
//!
//! A [`Heatmap`] is a dense row-major grid of non-negative importance values.
//! Boxes use half-open pixel intervals: pixel `(x, y)` is inside iff
//! `x_min <= x < x_max` and `y_min <= y < y_max`.

use crate::error::{Error, Result};

/// Dense row-major grid of finite, non-negative values.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    width: u32,
    height: u32,
    values: Vec<f64>,
}

impl Heatmap {
    pub fn new(width: u32, height: u32, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyCanvas { width, height });
        }
        let expected = width as usize * height as usize;
        if values.len() != expected {
            return Err(Error::ValueCount {
                width,
                height,
                expected,
                actual: values.len(),
            });
        }
        check_non_negative(&values)?;
        Ok(Heatmap {
            width,
            height,
            values,
        })
    }

    /// All-zero heatmap.
    pub fn zeros(width: u32, height: u32) -> Result<Self> {
        Heatmap::new(width, height, vec![0.0; width as usize * height as usize])
    }

    /// Builds a heatmap from rows of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let height = rows.len() as u32;
        let width = rows.first().map_or(0, |r| r.len()) as u32;
        if let Some(bad) = rows.iter().find(|r| r.len() as u32 != width) {
            return Err(Error::ValueCount {
                width,
                height,
                expected: width as usize * height as usize,
                actual: rows.iter().map(Vec::len).sum::<usize>().max(bad.len()),
            });
        }
        Heatmap::new(width, height, rows.concat())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_all_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Max value is exactly 1, or the map is all zero.
    pub fn is_unit_normalized(&self) -> bool {
        let max = self.max();
        max == 1.0 || max == 0.0
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.width as usize)
    }
}

fn check_non_negative(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteValue { index });
        }
        if value < 0.0 {
            return Err(Error::NegativeValue { index, value });
        }
    }
    Ok(())
}

/// Axis-aligned box over half-open pixel intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundingBox {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

impl BoundingBox {
    /// Rejects empty boxes.
    pub fn new(x_min: u32, y_min: u32, x_max: u32, y_max: u32) -> Result<Self> {
        if x_min >= x_max || y_min >= y_max {
            return Err(Error::EmptyBox {
                x_min,
                y_min,
                x_max,
                y_max,
            });
        }
        Ok(BoundingBox {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn width(&self) -> u32 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> u32 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn contains_pixel(&self, x: u32, y: u32) -> bool {
        (self.x_min..self.x_max).contains(&x) && (self.y_min..self.y_max).contains(&y)
    }

    /// True when `other` lies entirely inside `self`.
    pub fn contains_box(&self, other: &BoundingBox) -> bool {
        self.x_min <= other.x_min
            && self.y_min <= other.y_min
            && other.x_max <= self.x_max
            && other.y_max <= self.y_max
    }

    pub fn fits(&self, width: u32, height: u32) -> bool {
        self.x_max <= width && self.y_max <= height
    }

    pub fn check_fits(&self, width: u32, height: u32) -> Result<()> {
        if self.fits(width, height) {
            Ok(())
        } else {
            Err(Error::BoxOutOfCanvas {
                x_min: self.x_min,
                y_min: self.y_min,
                x_max: self.x_max,
                y_max: self.y_max,
                width,
                height,
            })
        }
    }
}

/// One annotator's box.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedBox {
    pub annotator_id: String,
    pub bbox: BoundingBox,
}

/// All boxes drawn for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub boxes: Vec<AnnotatedBox>,
}

impl AnnotationSet {
    pub fn new(image_id: impl Into<String>, width: u32, height: u32) -> Self {
        AnnotationSet {
            image_id: image_id.into(),
            width,
            height,
            boxes: Vec::new(),
        }
    }

    pub fn push(&mut self, annotator_id: impl Into<String>, bbox: BoundingBox) -> Result<()> {
        bbox.check_fits(self.width, self.height)?;
        self.boxes.push(AnnotatedBox {
            annotator_id: annotator_id.into(),
            bbox,
        });
        Ok(())
    }
}

/// Frequency heatmap of the annotation boxes, scaled so the most covered
/// pixel is 1.
pub fn aggregate_annotations(set: &AnnotationSet) -> Result<Heatmap> {
    let (width, height) = (set.width, set.height);
    if width == 0 || height == 0 {
        return Err(Error::EmptyCanvas { width, height });
    }
    if set.boxes.is_empty() {
        return Err(Error::EmptyAnnotationSet(set.image_id.clone()));
    }
    let w = width as usize;
    let h = height as usize;
    // 2-D difference array with one padding row/column.
    let stride = w + 1;
    let mut diff = vec![0i64; stride * (h + 1)];
    for annotated in &set.boxes {
        let b = annotated.bbox;
        b.check_fits(width, height)?;
        let (x0, y0, x1, y1) = (
            b.x_min as usize,
            b.y_min as usize,
            b.x_max as usize,
            b.y_max as usize,
        );
        diff[y0 * stride + x0] += 1;
        diff[y0 * stride + x1] -= 1;
        diff[y1 * stride + x0] -= 1;
        diff[y1 * stride + x1] += 1;
    }
    let mut counts = vec![0i64; w * h];
    for y in 0..h {
        let mut row_acc = 0i64;
        for x in 0..w {
            row_acc += diff[y * stride + x];
            let above = if y > 0 { counts[(y - 1) * w + x] } else { 0 };
            counts[y * w + x] = above + row_acc;
        }
    }
    let max = counts.iter().copied().max().unwrap_or(0);
    debug_assert!(max > 0);
    let values = counts
        .into_iter()
        .map(|c| c as f64 / max as f64)
        .collect();
    Heatmap::new(width, height, values)
}

/// Divides by the maximum value. All-zero maps are returned unchanged.
pub fn unit_normalize(h: &Heatmap) -> Result<Heatmap> {
    check_non_negative(&h.values)?;
    let max = h.max();
    if max == 0.0 {
        return Ok(h.clone());
    }
    let values = h.values.iter().map(|v| v / max).collect();
    Heatmap::new(h.width, h.height, values)
}

/// Row-major copy of the heatmap values.
pub fn flatten(h: &Heatmap) -> Vec<f64> {
    h.values.clone()
}

/// Scales a non-negative vector to sum 1.
pub fn mass_normalize(v: &[f64]) -> Result<Vec<f64>> {
    check_non_negative(v)?;
    let total: f64 = v.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroMass);
    }
    Ok(v.iter().map(|x| x / total).collect())
}
