//! Image-style features: series drawn as binary line plots, then pooled.
//!
//! Feature vectors computed elsewhere (for instance by a convolutional
//! network) can be loaded from CSV and clustered the same way.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::clustering::{kmeans, KMeansConfig, KMeansFit};
use crate::data::{minmax_scale, TimeSeries};
use crate::error::FeatureError;

pub const DEFAULT_WIDTH: usize = 64;
pub const DEFAULT_HEIGHT: usize = 64;
pub const DEFAULT_BLOCK: usize = 4;

/// Bounds every series is rescaled into before drawing.
const PLOT_LO: f64 = 0.1;
const PLOT_HI: f64 = 1.0;

/// Row-major binary image; row 0 is the top.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageGrid {
    pub id: String,
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl ImageGrid {
    pub fn blank(id: impl Into<String>, width: usize, height: usize) -> Self {
        Self {
            id: id.into(),
            width,
            height,
            pixels: vec![0; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize) {
        self.pixels[y * self.width + x] = 1;
    }

    pub fn lit(&self) -> usize {
        self.pixels.iter().filter(|&&p| p != 0).count()
    }

    pub fn mean_intensity(&self) -> f64 {
        self.pixels.iter().map(|&p| f64::from(p)).sum::<f64>() / self.pixels.len() as f64
    }

    /// Plain (P2) PGM with maxval 1.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n1\n", self.width, self.height);
        for row in self.pixels.chunks(self.width) {
            let line: Vec<&str> = row.iter().map(|&p| if p != 0 { "1" } else { "0" }).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

fn draw_line(grid: &mut ImageGrid, (x0, y0): (i64, i64), (x1, y1): (i64, i64)) {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    loop {
        grid.set(x as usize, y as usize);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Draws the series as a 1-pixel polyline.
///
/// The series is first min-max rescaled into `[0.1, 1]`, so any affine
/// rescaling of it yields the same grid. Time spans the full width; value 0
/// would sit on the bottom row and 1 sits on the top row.
pub fn rasterize(series: &TimeSeries, width: usize, height: usize) -> Result<ImageGrid, FeatureError> {
    if width < 2 || height < 2 {
        return Err(FeatureError::GridTooSmall { width, height });
    }
    if series.is_empty() {
        return Err(FeatureError::BadSeries(series.id.clone()));
    }
    let scaled = minmax_scale(series, PLOT_LO, PLOT_HI).map_err(|_| FeatureError::BadSeries(series.id.clone()))?;
    let n = scaled.len();
    let (w1, h1) = ((width - 1) as i64, (height - 1) as i64);
    let point = |t: usize, v: f64| {
        // integer rounding of t * (w - 1) / (n - 1)
        let x = if n == 1 {
            0
        } else {
            let den = (n - 1) as i64;
            (2 * t as i64 * w1 + den) / (2 * den)
        };
        let y = h1 - (v * h1 as f64).round() as i64;
        (x, y)
    };
    let mut grid = ImageGrid::blank(series.id.clone(), width, height);
    let mut prev = point(0, scaled.values[0]);
    grid.set(prev.0 as usize, prev.1 as usize);
    for (t, &v) in scaled.values.iter().enumerate().skip(1) {
        let next = point(t, v);
        draw_line(&mut grid, prev, next);
        prev = next;
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub series_id: String,
    pub features: Vec<f64>,
    pub extractor: String,
}

/// Extractor tag for pooled rasters, e.g. `raster64x64-pool4`.
pub fn raster_extractor(width: usize, height: usize, block: usize) -> String {
    format!("raster{width}x{height}-pool{block}")
}

/// Mean intensity of each `block`×`block` tile, tiles in row-major order.
pub fn pool_features(image: &ImageGrid, block: usize) -> Result<FeatureVector, FeatureError> {
    let (w, h) = (image.width, image.height);
    if block == 0 || w % block != 0 || h % block != 0 {
        return Err(FeatureError::BlockSize {
            block,
            width: w,
            height: h,
        });
    }
    let (tw, th) = (w / block, h / block);
    let area = (block * block) as f64;
    let mut features = Vec::with_capacity(tw * th);
    for ty in 0..th {
        for tx in 0..tw {
            let mut sum = 0u32;
            for y in ty * block..(ty + 1) * block {
                for x in tx * block..(tx + 1) * block {
                    sum += u32::from(image.get(x, y));
                }
            }
            features.push(f64::from(sum) / area);
        }
    }
    Ok(FeatureVector {
        series_id: image.id.clone(),
        features,
        extractor: raster_extractor(w, h, block),
    })
}

/// Rasterizes and pools every series, in parallel, preserving order.
pub fn extract_features(
    series: &[TimeSeries],
    width: usize,
    height: usize,
    block: usize,
) -> Result<Vec<FeatureVector>, FeatureError> {
    series
        .par_iter()
        .map(|s| rasterize(s, width, height).and_then(|g| pool_features(&g, block)))
        .collect()
}

/// Reads `series_id,f1,...,fm` rows. When `known_ids` is given every row id
/// must be one of them.
pub fn load_external_features(path: &Path, known_ids: Option<&[String]>) -> Result<Vec<FeatureVector>, FeatureError> {
    let csv_err = |source| FeatureError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::open(path).map_err(|source| FeatureError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.is_empty() || header.get(0).map(str::trim) == Some("") {
        return Err(FeatureError::NoHeader(path.to_path_buf()));
    }
    let expected = header.len() - 1;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() - 1 != expected {
            return Err(FeatureError::Ragged {
                line,
                expected,
                found: record.len().saturating_sub(1),
            });
        }
        let features = record
            .iter()
            .skip(1)
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| FeatureError::NonNumeric {
                        line,
                        cell: cell.to_string(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(FeatureVector {
            series_id: record[0].trim().to_string(),
            features,
            extractor: "external".into(),
        });
    }
    if let Some(known) = known_ids {
        let known: BTreeSet<&str> = known.iter().map(String::as_str).collect();
        let unknown: Vec<String> = out
            .iter()
            .filter(|v| !known.contains(v.series_id.as_str()))
            .map(|v| v.series_id.clone())
            .collect();
        if !unknown.is_empty() {
            return Err(FeatureError::UnknownIds(unknown));
        }
    }
    Ok(out)
}

/// k-means on feature vectors. The assignment's algorithm names the extractor.
pub fn cluster_features(vectors: &[FeatureVector], k: usize, seed: u64) -> Result<KMeansFit, FeatureError> {
    let Some(first) = vectors.first() else {
        return Err(FeatureError::Inconsistent("no feature vectors".into()));
    };
    let mut seen = BTreeSet::new();
    for v in vectors {
        if v.features.len() != first.features.len() || v.extractor != first.extractor {
            return Err(FeatureError::Inconsistent(format!(
                "`{}` has {} features from `{}`, expected {} from `{}`",
                v.series_id,
                v.features.len(),
                v.extractor,
                first.features.len(),
                first.extractor
            )));
        }
        if !seen.insert(v.series_id.as_str()) {
            return Err(FeatureError::Inconsistent(format!(
                "duplicate series id `{}`",
                v.series_id
            )));
        }
    }
    let ids: Vec<String> = vectors.iter().map(|v| v.series_id.clone()).collect();
    let data: Vec<Vec<f64>> = vectors.iter().map(|v| v.features.clone()).collect();
    let mut fit = kmeans(&ids, &data, &KMeansConfig::new(k, seed))?;
    fit.assignment.algorithm = format!("kmeans-features:{}", first.extractor);
    Ok(fit)
}

/// Renders grids as a single text block, for golden comparisons and debugging.
pub fn describe(grid: &ImageGrid) -> String {
    let mut out = String::new();
    for row in grid.pixels.chunks(grid.width) {
        for &p in row {
            out.push(if p != 0 { '#' } else { '.' });
        }
        let _ = writeln!(out);
    }
    out
}
