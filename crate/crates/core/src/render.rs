//! Heatmap overlays as binary PPM (P6) images.
//!
//! Importance maps linearly from light yellow (0) to dark red (1). When a
//! grayscale base image is given, the color is blended half-and-half with it.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::heatmap::Heatmap;

pub const LOW_COLOR: [u8; 3] = [255, 255, 178];
pub const HIGH_COLOR: [u8; 3] = [189, 0, 38];

const BASE_WEIGHT: f64 = 0.5;

/// Colormap value for `v` in `[0, 1]` (clamped).
pub fn colormap(v: f64) -> [u8; 3] {
    let v = v.clamp(0.0, 1.0);
    std::array::from_fn(|c| {
        let (lo, hi) = (LOW_COLOR[c] as f64, HIGH_COLOR[c] as f64);
        (lo + (hi - lo) * v).round() as u8
    })
}

pub fn encode_overlay(base: Option<&Heatmap>, h: &Heatmap) -> Result<Vec<u8>> {
    if let Some(base) = base {
        if base.dimensions() != h.dimensions() {
            return Err(Error::DimensionMismatch {
                context: Some("overlay base image".into()),
                expected_width: h.width(),
                expected_height: h.height(),
                width: base.width(),
                height: base.height(),
            });
        }
    }
    let mut out = format!("P6\n{} {}\n255\n", h.width(), h.height()).into_bytes();
    out.reserve(h.values().len() * 3);
    for (i, &v) in h.values().iter().enumerate() {
        let color = colormap(v);
        match base {
            None => out.extend_from_slice(&color),
            Some(base) => {
                let gray = base.values()[i].clamp(0.0, 1.0) * 255.0;
                for c in color {
                    let mixed = BASE_WEIGHT * gray + (1.0 - BASE_WEIGHT) * c as f64;
                    out.push(mixed.round() as u8);
                }
            }
        }
    }
    Ok(out)
}

pub fn render_overlay(base: Option<&Heatmap>, h: &Heatmap, out: &Path) -> Result<()> {
    let bytes = encode_overlay(base, h)?;
    fs::write(out, bytes).map_err(|e| Error::io(out, e))
}
