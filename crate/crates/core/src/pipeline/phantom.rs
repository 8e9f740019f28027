//! Synthetic four-phase test images with exact ground truth.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, SegError};
use crate::grid::{GridShape, ScalarField};
use crate::labels::PhaseLabeling;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomLayout {
    /// Label 0 top-left, 1 top-right, 2 bottom-left, 3 bottom-right.
    Quadrants,
    /// Concentric disks of equal area, label 0 innermost, label 3 outside.
    NestedDisks,
    /// Four equal vertical stripes, labels 0..3 from the left.
    Stripes,
}

impl PhantomLayout {
    pub fn name(self) -> &'static str {
        match self {
            PhantomLayout::Quadrants => "quadrants",
            PhantomLayout::NestedDisks => "nested-disks",
            PhantomLayout::Stripes => "stripes",
        }
    }

    fn label_at(self, shape: GridShape, x: usize, y: usize) -> u8 {
        let (w, h) = (shape.width(), shape.height());
        match self {
            PhantomLayout::Quadrants => PhaseLabeling::encode(y < h / 2, x < w / 2),
            PhantomLayout::Stripes => (4 * x / w).min(3) as u8,
            PhantomLayout::NestedDisks => {
                let dx = x as f64 + 0.5 - w as f64 / 2.0;
                let dy = y as f64 + 0.5 - h as f64 / 2.0;
                // disk areas of 1/4, 1/2 and 3/4 of the grid
                let r2 = (dx * dx + dy * dy) * PI / (w * h) as f64;
                if r2 < 0.25 {
                    0
                } else if r2 < 0.5 {
                    1
                } else if r2 < 0.75 {
                    2
                } else {
                    3
                }
            }
        }
    }
}

impl fmt::Display for PhantomLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PhantomLayout {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "quadrants" => Ok(PhantomLayout::Quadrants),
            "nested-disks" => Ok(PhantomLayout::NestedDisks),
            "stripes" => Ok(PhantomLayout::Stripes),
            other => Err(format!(
                "unknown layout '{other}' (expected quadrants, nested-disks or stripes)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub shape: GridShape,
    /// Intensity of each label, `phase_values[k]` for label `k`.
    pub phase_values: [f64; 4],
    pub layout: PhantomLayout,
    /// Standard deviation of additive Gaussian noise on the `[0, 1]` scale.
    pub noise_sigma: f64,
    /// Peak deviation of the multiplicative bias field from 1.
    pub inhomogeneity_amplitude: f64,
    pub seed: u64,
}

impl PhantomSpec {
    pub fn quadrants(size: usize) -> Result<Self> {
        Ok(PhantomSpec {
            shape: GridShape::new(size, size)?,
            phase_values: [0.8, 0.6, 0.4, 0.2],
            layout: PhantomLayout::Quadrants,
            noise_sigma: 0.0,
            inhomogeneity_amplitude: 0.0,
            seed: 0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let pv = self.phase_values;
        if pv.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(SegError::InvalidConfig(
                "phase values must lie in [0, 1]".into(),
            ));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(SegError::InvalidConfig("noise sigma must be >= 0".into()));
        }
        if !(self.inhomogeneity_amplitude >= 0.0 && self.inhomogeneity_amplitude.is_finite()) {
            return Err(SegError::InvalidConfig(
                "inhomogeneity amplitude must be >= 0".into(),
            ));
        }
        if self.noise_sigma == 0.0 {
            for i in 0..4 {
                for j in i + 1..4 {
                    if pv[i] == pv[j] {
                        return Err(SegError::InvalidConfig(
                            "noise-free phantoms need pairwise distinct phase values".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub image: ScalarField,
    pub truth: PhaseLabeling,
    /// `bias * phase_value` before noise and clamping.
    pub clean: ScalarField,
}

/// Half-period cosine bump in each axis, normalized to a peak of 1.
pub fn bias_bump(shape: GridShape) -> ScalarField {
    let (w, h) = (shape.width() as f64, shape.height() as f64);
    let raw = ScalarField::from_fn(shape, |x, y| {
        let bx = (PI * ((x as f64 + 0.5) / w - 0.5)).cos();
        let by = (PI * ((y as f64 + 0.5) / h - 0.5)).cos();
        bx * by
    });
    let peak = raw.max();
    raw.map(|v| v / peak)
}

pub fn generate_phantom(spec: &PhantomSpec) -> Result<Phantom> {
    spec.validate()?;
    let shape = spec.shape;
    let labels: Vec<u8> = (0..shape.height())
        .flat_map(|y| (0..shape.width()).map(move |x| (x, y)))
        .map(|(x, y)| spec.layout.label_at(shape, x, y))
        .collect();
    let truth = PhaseLabeling::new(shape, labels)?;

    let bump = bias_bump(shape);
    let amp = spec.inhomogeneity_amplitude;
    let clean_values: Vec<f64> = truth
        .labels()
        .iter()
        .zip(bump.values())
        .map(|(&l, &b)| (1.0 + amp * b) * spec.phase_values[l as usize])
        .collect();
    let clean = ScalarField::new(shape, clean_values)?;

    let image = if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| SegError::InvalidConfig(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let noisy = clean
            .values()
            .iter()
            .map(|&v| (v + normal.sample(&mut rng)).clamp(0.0, 1.0))
            .collect();
        ScalarField::new(shape, noisy)?
    } else {
        clean.map(|v| v.clamp(0.0, 1.0))
    };
    Ok(Phantom {
        image,
        truth,
        clean,
    })
}
