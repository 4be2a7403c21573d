use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::heatmap::Heatmap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapFormat {
    /// Comma-separated grid, one line per image row.
    Csv,
    /// Binary 16-bit PGM (P5, maxval 65535).
    Pgm,
}

impl HeatmapFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(HeatmapFormat::Csv),
            "pgm" => Some(HeatmapFormat::Pgm),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            HeatmapFormat::Csv => "csv",
            HeatmapFormat::Pgm => "pgm",
        }
    }
}

/// Reads a heatmap, picking the format from the file extension.
pub fn read_heatmap(path: &Path) -> Result<Heatmap> {
    match HeatmapFormat::from_path(path) {
        Some(HeatmapFormat::Csv) => read_heatmap_csv(path),
        Some(HeatmapFormat::Pgm) => read_pgm(path),
        None => Err(Error::MalformedFile {
            path: path.to_path_buf(),
            message: "expected a .csv or .pgm heatmap".into(),
        }),
    }
}

pub fn read_heatmap_csv(path: &Path) -> Result<Heatmap> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let malformed = |line: usize, message: String| Error::MalformedCsv {
        path: path.to_path_buf(),
        line: line as u64,
        message,
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|e| malformed(i + 1, format!("{e} ({cell:?})")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(malformed(
                    i + 1,
                    format!("expected {} columns, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::MalformedFile {
            path: path.to_path_buf(),
            message: "empty heatmap grid".into(),
        });
    }
    Heatmap::from_rows(&rows).map_err(|e| Error::MalformedFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_heatmap_csv(h: &Heatmap, path: &Path) -> Result<()> {
    let mut out = String::new();
    for row in h.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Encodes as P5 with maxval 65535, each sample `round(65535 * v)` big-endian.
pub fn encode_pgm(h: &Heatmap) -> Result<Vec<u8>> {
    let mut out = format!("P5\n{} {}\n65535\n", h.width(), h.height()).into_bytes();
    out.reserve(h.values().len() * 2);
    for (index, &value) in h.values().iter().enumerate() {
        if value > 1.0 {
            return Err(Error::UnrepresentableValue { index, value });
        }
        let sample = (value * 65535.0).round() as u16;
        out.extend_from_slice(&sample.to_be_bytes());
    }
    Ok(out)
}

pub fn write_pgm(h: &Heatmap, path: &Path) -> Result<()> {
    let bytes = encode_pgm(h)?;
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))
}

/// Decodes binary PGM (P5). Samples are scaled by `1 / maxval`; maxval below
/// 256 uses one byte per sample, otherwise two big-endian bytes.
pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<Heatmap, String> {
    let mut pos = 0;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        tokens.push(std::str::from_utf8(&bytes[start..pos]).map_err(|e| e.to_string())?);
    }
    if tokens[0] != "P5" {
        return Err(format!("unsupported magic {:?}, expected P5", tokens[0]));
    }
    let number = |s: &str, what: &str| s.parse::<u32>().map_err(|e| format!("bad {what} {s:?}: {e}"));
    let width = number(tokens[1], "width")?;
    let height = number(tokens[2], "height")?;
    let maxval = number(tokens[3], "maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} outside 1..=65535"));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("missing raster".into());
    }
    pos += 1;
    let count = width as usize * height as usize;
    let sample_bytes = if maxval < 256 { 1 } else { 2 };
    let raster = &bytes[pos..];
    if raster.len() < count * sample_bytes {
        return Err(format!(
            "raster has {} bytes, expected {}",
            raster.len(),
            count * sample_bytes
        ));
    }
    let scale = maxval as f64;
    let values = (0..count)
        .map(|i| {
            let sample = if sample_bytes == 1 {
                raster[i] as u32
            } else {
                u16::from_be_bytes([raster[2 * i], raster[2 * i + 1]]) as u32
            };
            (sample.min(maxval)) as f64 / scale
        })
        .collect();
    Heatmap::new(width, height, values).map_err(|e| e.to_string())
}

pub fn read_pgm(path: &Path) -> Result<Heatmap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes).map_err(|message| Error::MalformedFile {
        path: path.to_path_buf(),
        message,
    })
}
