//! Label maps, color overlays and per-phase intensity histograms.

use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, RgbImage};

use crate::error::{Result, SegError};
use crate::grid::ScalarField;
use crate::labels::{PhaseLabeling, NUM_PHASES};
use crate::pipeline::io::{read_bytes, write_atomic};
use crate::pipeline::pgm::{decode_pgm, encode_pgm8};

/// Gray level written for each label in the raw label map.
pub const LABEL_GRAY: [u8; NUM_PHASES] = [0, 85, 170, 255];

/// Overlay colors: blue, green, yellow, maroon.
pub const LABEL_COLORS: [[u8; 3]; NUM_PHASES] =
    [[0, 0, 255], [0, 128, 0], [255, 255, 0], [128, 0, 0]];

pub const HISTOGRAM_BINS: usize = 256;

pub fn label_map_bytes(labels: &PhaseLabeling) -> Vec<u8> {
    let gray: Vec<u8> = labels
        .labels()
        .iter()
        .map(|&l| LABEL_GRAY[l as usize])
        .collect();
    encode_pgm8(labels.shape(), &gray)
}

pub fn overlay_png_bytes(labels: &PhaseLabeling) -> Result<Vec<u8>> {
    let shape = labels.shape();
    let raw: Vec<u8> = labels
        .labels()
        .iter()
        .flat_map(|&l| LABEL_COLORS[l as usize])
        .collect();
    let img = RgbImage::from_raw(shape.width() as u32, shape.height() as u32, raw)
        .expect("buffer sized from shape");
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| SegError::InvalidInput(format!("PNG encoding failed: {e}")))?;
    Ok(out.into_inner())
}

/// Writes the gray-coded label map to `label_map` and the color overlay PNG
/// to `overlay`.
pub fn emit_labeling(labels: &PhaseLabeling, label_map: &Path, overlay: &Path) -> Result<()> {
    write_atomic(label_map, &label_map_bytes(labels))?;
    write_atomic(overlay, &overlay_png_bytes(labels)?)
}

/// Reads a label map written by [`emit_labeling`].
pub fn read_label_map(path: &Path) -> Result<PhaseLabeling> {
    let g = decode_pgm(&read_bytes(path)?, path)?;
    let labels = g
        .samples
        .iter()
        .map(|&s| match s {
            0 => Ok(0),
            85 => Ok(1),
            170 => Ok(2),
            255 => Ok(3),
            other => Err(SegError::InvalidInput(format!(
                "{}: gray level {other} is not a label code",
                path.display()
            ))),
        })
        .collect::<Result<Vec<u8>>>()?;
    PhaseLabeling::new(g.shape, labels)
}

/// Intensity histograms of each phase over 256 equal bins on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseHistograms {
    pub counts: [[u64; HISTOGRAM_BINS]; NUM_PHASES],
}

impl PhaseHistograms {
    pub fn bin_of(value: f64) -> usize {
        ((value.clamp(0.0, 1.0) * HISTOGRAM_BINS as f64).floor() as usize).min(HISTOGRAM_BINS - 1)
    }

    pub fn bin_center(bin: usize) -> f64 {
        (bin as f64 + 0.5) / HISTOGRAM_BINS as f64
    }

    pub fn total(&self, phase: usize) -> u64 {
        self.counts[phase].iter().sum()
    }

    /// Cumulative distribution of one phase; all zeros for an empty phase.
    pub fn cdf(&self, phase: usize) -> Vec<f64> {
        let total = self.total(phase);
        let mut acc = 0;
        self.counts[phase]
            .iter()
            .map(|&n| {
                acc += n;
                if total == 0 {
                    0.0
                } else {
                    acc as f64 / total as f64
                }
            })
            .collect()
    }
}

pub fn phase_histograms(image: &ScalarField, labels: &PhaseLabeling) -> Result<PhaseHistograms> {
    image.shape().ensure_same(&labels.shape())?;
    let mut counts = [[0u64; HISTOGRAM_BINS]; NUM_PHASES];
    for (&v, &l) in image.values().iter().zip(labels.labels()) {
        counts[l as usize][PhaseHistograms::bin_of(v)] += 1;
    }
    Ok(PhaseHistograms { counts })
}

pub fn histogram_csv_bytes(hist: &PhaseHistograms) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["bin_center".to_string()];
    for k in 0..NUM_PHASES {
        header.push(format!("count_{k}"));
        header.push(format!("cdf_{k}"));
    }
    let csv_err = |e: csv::Error| SegError::InvalidInput(format!("CSV encoding failed: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    let cdfs: Vec<Vec<f64>> = (0..NUM_PHASES).map(|k| hist.cdf(k)).collect();
    for bin in 0..HISTOGRAM_BINS {
        let mut row = vec![PhaseHistograms::bin_center(bin).to_string()];
        for (counts, cdf) in hist.counts.iter().zip(&cdfs) {
            row.push(counts[bin].to_string());
            row.push(cdf[bin].to_string());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| SegError::InvalidInput(format!("CSV encoding failed: {e}")))
}

pub fn emit_phase_histograms(image: &ScalarField, labels: &PhaseLabeling, path: &Path) -> Result<()> {
    let hist = phase_histograms(image, labels)?;
    write_atomic(path, &histogram_csv_bytes(&hist)?)
}
