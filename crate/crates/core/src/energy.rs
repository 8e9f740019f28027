//! The relaxed four-phase energy, its region fitting terms and the
//! closed-form region-mean update.
//!
//! Phases are indexed by the pair `(u1, u2)`: `11`, `10`, `01`, `00`. With
//! relaxed indicators in `[0, 1]` the phase weights are the products
//! `u1*u2`, `u1*(1-u2)`, `(1-u1)*u2` and `(1-u1)*(1-u2)`.

use crate::error::{Result, SegError};
use crate::grid::{total_variation, ScalarField};

/// Guard below which a phase mass counts as empty.
pub const DEFAULT_MEAN_EPS: f64 = 1e-8;

/// Region constants `(c11, c10, c01, c00)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMeans {
    pub c11: f64,
    pub c10: f64,
    pub c01: f64,
    pub c00: f64,
}

impl PhaseMeans {
    pub fn new(c11: f64, c10: f64, c01: f64, c00: f64) -> Self {
        PhaseMeans { c11, c10, c01, c00 }
    }

    pub fn uniform(c: f64) -> Self {
        Self::new(c, c, c, c)
    }

    /// Means in label order (label 0 = phase 11, ..., label 3 = phase 00).
    pub fn to_array(self) -> [f64; 4] {
        [self.c11, self.c10, self.c01, self.c00]
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Fidelity weights `lambda_*` and TV weights `mu1`, `mu2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittingWeights {
    pub lambda11: f64,
    pub lambda10: f64,
    pub lambda01: f64,
    pub lambda00: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl Default for FittingWeights {
    fn default() -> Self {
        FittingWeights {
            lambda11: 1.0,
            lambda10: 1.0,
            lambda01: 1.0,
            lambda00: 1.0,
            mu1: 0.1,
            mu2: 0.1,
        }
    }
}

impl FittingWeights {
    /// Equal fidelity weight `lambda` on all four regions and one TV weight `mu`.
    pub fn equal(lambda: f64, mu: f64) -> Self {
        FittingWeights {
            lambda11: lambda,
            lambda10: lambda,
            lambda01: lambda,
            lambda00: lambda,
            mu1: mu,
            mu2: mu,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lambdas = [self.lambda11, self.lambda10, self.lambda01, self.lambda00];
        if lambdas.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(SegError::InvalidConfig(
                "fidelity weights must be finite and nonnegative".into(),
            ));
        }
        if lambdas.iter().all(|&l| l == 0.0) {
            return Err(SegError::InvalidConfig(
                "at least one fidelity weight must be positive".into(),
            ));
        }
        if !(self.mu1 > 0.0 && self.mu2 > 0.0 && self.mu1.is_finite() && self.mu2.is_finite()) {
            return Err(SegError::InvalidConfig(
                "TV weights mu1, mu2 must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn ensure_shapes(fields: &[&ScalarField]) -> Result<()> {
    let first = fields[0].shape();
    fields[1..]
        .iter()
        .try_for_each(|f| first.ensure_same(&f.shape()))
}

/// Weighted region averages of `image`. A phase whose mass falls below `eps`
/// keeps its value from `previous`.
pub fn update_means(
    image: &ScalarField,
    u1: &ScalarField,
    u2: &ScalarField,
    previous: PhaseMeans,
    eps: f64,
) -> Result<PhaseMeans> {
    ensure_shapes(&[image, u1, u2])?;
    let mut num = [0.0f64; 4];
    let mut den = [0.0f64; 4];
    for ((&i, &a), &b) in image.values().iter().zip(u1.values()).zip(u2.values()) {
        let w = [a * b, a * (1.0 - b), (1.0 - a) * b, (1.0 - a) * (1.0 - b)];
        for k in 0..4 {
            num[k] += i * w[k];
            den[k] += w[k];
        }
    }
    let prev = previous.to_array();
    let mut c = [0.0; 4];
    for k in 0..4 {
        c[k] = if den[k] < eps { prev[k] } else { num[k] / den[k] };
    }
    Ok(PhaseMeans::from_array(c))
}

#[inline]
fn sq(x: f64) -> f64 {
    x * x
}

/// Fitting term driving `u1`, given the current `u2`:
/// `(l11 (I-c11)^2 - l01 (I-c01)^2) u2 + (l10 (I-c10)^2 - l00 (I-c00)^2) (1-u2)`.
pub fn fitting_r1(
    image: &ScalarField,
    c: PhaseMeans,
    u2: &ScalarField,
    w: &FittingWeights,
) -> Result<ScalarField> {
    ensure_shapes(&[image, u2])?;
    let values = image
        .values()
        .iter()
        .zip(u2.values())
        .map(|(&i, &b)| {
            let on = w.lambda11 * sq(i - c.c11) - w.lambda01 * sq(i - c.c01);
            let off = w.lambda10 * sq(i - c.c10) - w.lambda00 * sq(i - c.c00);
            on * b + off * (1.0 - b)
        })
        .collect();
    ScalarField::new(image.shape(), values)
}

/// Fitting term driving `u2`, given the current `u1`:
/// `(l11 (I-c11)^2 - l10 (I-c10)^2) u1 + (l01 (I-c01)^2 - l00 (I-c00)^2) (1-u1)`.
pub fn fitting_r2(
    image: &ScalarField,
    c: PhaseMeans,
    u1: &ScalarField,
    w: &FittingWeights,
) -> Result<ScalarField> {
    ensure_shapes(&[image, u1])?;
    let values = image
        .values()
        .iter()
        .zip(u1.values())
        .map(|(&i, &a)| {
            let on = w.lambda11 * sq(i - c.c11) - w.lambda10 * sq(i - c.c10);
            let off = w.lambda01 * sq(i - c.c01) - w.lambda00 * sq(i - c.c00);
            on * a + off * (1.0 - a)
        })
        .collect();
    ScalarField::new(image.shape(), values)
}

/// Sum of the four weighted region fidelity terms (no TV).
pub fn fidelity(
    image: &ScalarField,
    c: PhaseMeans,
    u1: &ScalarField,
    u2: &ScalarField,
    w: &FittingWeights,
) -> Result<f64> {
    ensure_shapes(&[image, u1, u2])?;
    let mut sum = 0.0;
    for ((&i, &a), &b) in image.values().iter().zip(u1.values()).zip(u2.values()) {
        sum += w.lambda11 * sq(i - c.c11) * a * b
            + w.lambda01 * sq(i - c.c01) * (1.0 - a) * b
            + w.lambda10 * sq(i - c.c10) * a * (1.0 - b)
            + w.lambda00 * sq(i - c.c00) * (1.0 - a) * (1.0 - b);
    }
    Ok(sum)
}

/// The relaxed energy `mu1 TV(u1) + mu2 TV(u2) + fidelity`.
pub fn energy_g(
    image: &ScalarField,
    c: PhaseMeans,
    u1: &ScalarField,
    u2: &ScalarField,
    w: &FittingWeights,
) -> Result<f64> {
    let fit = fidelity(image, c, u1, u2, w)?;
    Ok(w.mu1 * total_variation(u1) + w.mu2 * total_variation(u2) + fit)
}

/// Exact penalty `max(0, 2|xi - 1/2| - 1)`; zero exactly on `[0, 1]`.
pub fn exact_penalty_nu(xi: f64) -> f64 {
    (2.0 * (xi - 0.5).abs() - 1.0).max(0.0)
}

/// A penalty weight `margin * max|r| / 2`, which exceeds the exactness bound
/// `||r||_inf / 2` whenever `margin > 1` and `r` is nonzero.
pub fn alpha_bound(r: &ScalarField, margin: f64) -> f64 {
    margin * 0.5 * r.max_abs()
}
