//! Dense 2-D fields and the discrete differential operators used by the solver.
//!
//! Fields are stored row-major with unit grid spacing. The gradient uses
//! forward differences with a zero (Neumann) boundary in the last column/row;
//! the divergence is built as its exact negative adjoint, so that
//! `<grad f, p> = -<f, div p>` holds in the plain Euclidean inner product.

use crate::error::{Result, SegError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridShape {
    width: usize,
    height: usize,
}

impl GridShape {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(SegError::InvalidInput(format!(
                "grid shape {width}x{height} has a zero dimension"
            )));
        }
        Ok(GridShape { width, height })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub(crate) fn ensure_same(&self, other: &GridShape) -> Result<()> {
        if self != other {
            return Err(SegError::Dimension {
                expected: self.to_string(),
                found: other.to_string(),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for GridShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// A real value per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    shape: GridShape,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(SegError::Dimension {
                expected: format!("{} values for {shape}", shape.len()),
                found: format!("{} values", values.len()),
            });
        }
        Ok(ScalarField { shape, values })
    }

    pub fn filled(shape: GridShape, value: f64) -> Self {
        ScalarField {
            shape,
            values: vec![value; shape.len()],
        }
    }

    pub fn zeros(shape: GridShape) -> Self {
        Self::filled(shape, 0.0)
    }

    /// Builds a field from `f(x, y)` evaluated in row-major order.
    pub fn from_fn(shape: GridShape, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(shape.len());
        for y in 0..shape.height {
            for x in 0..shape.width {
                values.push(f(x, y));
            }
        }
        ScalarField { shape, values }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[self.shape.index(x, y)]
    }

    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        let i = self.shape.index(x, y);
        self.values[i] = value;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            shape: self.shape,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest cellwise absolute difference.
    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        debug_assert_eq!(self.shape, other.shape);
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn dot(&self, other: &ScalarField) -> f64 {
        debug_assert_eq!(self.shape, other.shape);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scaled(&self, alpha: f64) -> ScalarField {
        self.map(|v| alpha * v)
    }
}

/// A 2-vector per grid cell, stored as separate x and y component planes.
#[derive(Debug, Clone, PartialEq)]
pub struct DualField {
    shape: GridShape,
    px: Vec<f64>,
    py: Vec<f64>,
}

impl DualField {
    pub fn zeros(shape: GridShape) -> Self {
        DualField {
            shape,
            px: vec![0.0; shape.len()],
            py: vec![0.0; shape.len()],
        }
    }

    pub fn new(shape: GridShape, px: Vec<f64>, py: Vec<f64>) -> Result<Self> {
        if px.len() != shape.len() || py.len() != shape.len() {
            return Err(SegError::Dimension {
                expected: format!("{} vectors for {shape}", shape.len()),
                found: format!("{}/{} components", px.len(), py.len()),
            });
        }
        Ok(DualField { shape, px, py })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn x(&self) -> &[f64] {
        &self.px
    }

    pub fn y(&self) -> &[f64] {
        &self.py
    }

    pub(crate) fn components_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.px, &mut self.py)
    }

    pub fn norm_at(&self, i: usize) -> f64 {
        self.px[i].hypot(self.py[i])
    }

    /// Largest pointwise Euclidean norm.
    pub fn max_norm(&self) -> f64 {
        (0..self.shape.len()).fold(0.0, |m, i| m.max(self.norm_at(i)))
    }

    pub fn dot(&self, other: &DualField) -> f64 {
        debug_assert_eq!(self.shape, other.shape);
        let xs: f64 = self.px.iter().zip(&other.px).map(|(a, b)| a * b).sum();
        let ys: f64 = self.py.iter().zip(&other.py).map(|(a, b)| a * b).sum();
        xs + ys
    }

    pub fn is_finite(&self) -> bool {
        self.px.iter().chain(&self.py).all(|v| v.is_finite())
    }
}

/// Forward-difference gradient; the last column (x) and last row (y) are zero.
pub fn gradient(f: &ScalarField) -> DualField {
    let shape = f.shape;
    let mut out = DualField::zeros(shape);
    gradient_into(f.values(), shape, &mut out.px, &mut out.py);
    out
}

pub(crate) fn gradient_into(f: &[f64], shape: GridShape, gx: &mut [f64], gy: &mut [f64]) {
    let (w, h) = (shape.width, shape.height);
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let i = row + x;
            gx[i] = if x + 1 < w { f[i + 1] - f[i] } else { 0.0 };
            gy[i] = if y + 1 < h { f[i + w] - f[i] } else { 0.0 };
        }
    }
}

/// Backward-difference divergence, the negative adjoint of [`gradient`].
pub fn divergence(p: &DualField) -> ScalarField {
    let mut out = ScalarField::zeros(p.shape);
    divergence_into(&p.px, &p.py, p.shape, &mut out.values);
    out
}

pub(crate) fn divergence_into(px: &[f64], py: &[f64], shape: GridShape, out: &mut [f64]) {
    let (w, h) = (shape.width, shape.height);
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let i = row + x;
            let mut d = 0.0;
            if x + 1 < w {
                d += px[i];
            }
            if x > 0 {
                d -= px[i - 1];
            }
            if y + 1 < h {
                d += py[i];
            }
            if y > 0 {
                d -= py[i - w];
            }
            out[i] = d;
        }
    }
}

/// Isotropic discrete total variation: sum of pointwise gradient norms.
pub fn total_variation(f: &ScalarField) -> f64 {
    let (w, h) = (f.shape.width, f.shape.height);
    let v = &f.values;
    let mut sum = 0.0;
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let gx = if x + 1 < w { v[i + 1] - v[i] } else { 0.0 };
            let gy = if y + 1 < h { v[i + w] - v[i] } else { 0.0 };
            sum += gx.hypot(gy);
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(w: usize, h: usize) -> GridShape {
        GridShape::new(w, h).unwrap()
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(GridShape::new(0, 3).is_err());
        assert!(GridShape::new(3, 0).is_err());
    }

    #[test]
    fn value_count_checked() {
        assert!(matches!(
            ScalarField::new(shape(2, 2), vec![0.0; 3]),
            Err(SegError::Dimension { .. })
        ));
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = gradient(&ScalarField::filled(shape(5, 4), 3.0));
        assert!(g.x().iter().chain(g.y()).all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_two_cells() {
        let f = ScalarField::new(shape(2, 1), vec![0.0, 1.0]).unwrap();
        let g = gradient(&f);
        assert_eq!(g.x(), &[1.0, 0.0]);
        assert_eq!(g.y(), &[0.0, 0.0]);
    }

    #[test]
    fn gradient_of_column_ramp() {
        let f = ScalarField::from_fn(shape(3, 3), |x, _| x as f64);
        let g = gradient(&f);
        for y in 0..3 {
            for x in 0..3 {
                let i = y * 3 + x;
                let expected = if x < 2 { 1.0 } else { 0.0 };
                assert_eq!(g.x()[i], expected, "cell ({x},{y})");
                assert_eq!(g.y()[i], 0.0);
            }
        }
    }

    #[test]
    fn divergence_of_zero_is_zero() {
        let d = divergence(&DualField::zeros(shape(4, 3)));
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn divergence_two_cells() {
        let p = DualField::new(shape(2, 1), vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(divergence(&p).values(), &[1.0, -1.0]);
    }

    #[test]
    fn total_variation_examples() {
        assert_eq!(total_variation(&ScalarField::filled(shape(4, 4), 0.7)), 0.0);
        let step = ScalarField::new(shape(2, 1), vec![0.0, 1.0]).unwrap();
        assert_eq!(total_variation(&step), 1.0);
        // one unit jump per row on a 4-row grid
        let halves = ScalarField::from_fn(shape(4, 4), |x, _| if x >= 2 { 1.0 } else { 0.0 });
        assert_eq!(total_variation(&halves), 4.0);
    }

    #[test]
    fn single_cell_grid_is_flat() {
        let f = ScalarField::filled(shape(1, 1), 2.0);
        assert_eq!(total_variation(&f), 0.0);
        let p = DualField::new(shape(1, 1), vec![0.3], vec![-0.4]).unwrap();
        assert_eq!(divergence(&p).values(), &[0.0]);
    }
}
