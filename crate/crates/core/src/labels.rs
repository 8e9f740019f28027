//! Four-phase label maps and binary masks.

use crate::error::{Result, SegError};
use crate::grid::{GridShape, ScalarField};

pub const NUM_PHASES: usize = 4;

/// Integer labels in `{0, 1, 2, 3}` encoding `(u1 > tau, u2 > tau)` as
/// `(1,1) -> 0`, `(1,0) -> 1`, `(0,1) -> 2`, `(0,0) -> 3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseLabeling {
    shape: GridShape,
    labels: Vec<u8>,
}

impl PhaseLabeling {
    pub fn new(shape: GridShape, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != shape.len() {
            return Err(SegError::Dimension {
                expected: format!("{} labels for {shape}", shape.len()),
                found: format!("{} labels", labels.len()),
            });
        }
        if let Some(bad) = labels.iter().find(|&&l| l as usize >= NUM_PHASES) {
            return Err(SegError::InvalidInput(format!("label {bad} outside 0..=3")));
        }
        Ok(PhaseLabeling { shape, labels })
    }

    pub fn constant(shape: GridShape, label: u8) -> Result<Self> {
        Self::new(shape, vec![label; shape.len()])
    }

    /// Label for a pair of indicator decisions.
    #[inline]
    pub fn encode(in1: bool, in2: bool) -> u8 {
        match (in1, in2) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        }
    }

    /// Inverse of [`PhaseLabeling::encode`].
    #[inline]
    pub fn decode(label: u8) -> (bool, bool) {
        (label <= 1, label.is_multiple_of(2))
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.labels[self.shape.index(x, y)]
    }

    pub fn mask(&self, label: u8) -> BinaryMask {
        BinaryMask {
            shape: self.shape,
            member: self.labels.iter().map(|&l| l == label).collect(),
        }
    }

    pub fn counts(&self) -> [usize; NUM_PHASES] {
        let mut counts = [0; NUM_PHASES];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// Binary indicators `(u1, u2)` reproducing this labeling.
    pub fn indicators(&self) -> (ScalarField, ScalarField) {
        let (a, b): (Vec<f64>, Vec<f64>) = self
            .labels
            .iter()
            .map(|&l| {
                let (i1, i2) = Self::decode(l);
                (i1 as u8 as f64, i2 as u8 as f64)
            })
            .unzip();
        (
            ScalarField::new(self.shape, a).expect("shape preserved"),
            ScalarField::new(self.shape, b).expect("shape preserved"),
        )
    }

    /// Fraction of cells on which two labelings disagree.
    pub fn disagreement(&self, other: &PhaseLabeling) -> Result<f64> {
        self.shape.ensure_same(&other.shape)?;
        let diff = self
            .labels
            .iter()
            .zip(&other.labels)
            .filter(|(a, b)| a != b)
            .count();
        Ok(diff as f64 / self.labels.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    shape: GridShape,
    member: Vec<bool>,
}

impl BinaryMask {
    pub fn new(shape: GridShape, member: Vec<bool>) -> Result<Self> {
        if member.len() != shape.len() {
            return Err(SegError::Dimension {
                expected: format!("{} cells for {shape}", shape.len()),
                found: format!("{} cells", member.len()),
            });
        }
        Ok(BinaryMask { shape, member })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn members(&self) -> &[bool] {
        &self.member
    }

    pub fn count(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_round_trips() {
        for l in 0..4u8 {
            let (a, b) = PhaseLabeling::decode(l);
            assert_eq!(PhaseLabeling::encode(a, b), l);
        }
    }

    #[test]
    fn masks_partition_grid() {
        let s = GridShape::new(5, 3).unwrap();
        let labels: Vec<u8> = (0..15).map(|i| (i * 7 % 4) as u8).collect();
        let l = PhaseLabeling::new(s, labels).unwrap();
        let masks: Vec<_> = (0..4).map(|k| l.mask(k)).collect();
        for i in 0..s.len() {
            assert_eq!(masks.iter().filter(|m| m.members()[i]).count(), 1);
        }
        assert_eq!(l.counts().iter().sum::<usize>(), 15);
    }

    #[test]
    fn out_of_range_label_rejected() {
        let s = GridShape::new(2, 1).unwrap();
        assert!(PhaseLabeling::new(s, vec![0, 4]).is_err());
        assert!(PhaseLabeling::new(s, vec![0]).is_err());
    }
}
