//! Agreement metrics between a segmentation and a reference labeling.
//!
//! Rand index, global consistency error and variation of information are all
//! computed from the joint label contingency table. Floating-point terms are
//! summed in ascending order so the results are exactly symmetric in their
//! arguments and exactly invariant under relabeling.

use crate::error::Result;
use crate::labels::{BinaryMask, PhaseLabeling, NUM_PHASES};

/// `2 |A ∩ B| / (|A| + |B|)`; two empty masks score 1.
pub fn dice(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    a.shape().ensure_same(&b.shape())?;
    let (mut inter, mut na, mut nb) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.members().iter().zip(b.members()) {
        na += x as usize;
        nb += y as usize;
        inter += (x && y) as usize;
    }
    if na + nb == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / (na + nb) as f64)
}

/// Joint label counts; `counts[k][l]` cells carry label `k` in the first
/// labeling and `l` in the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: [[u64; NUM_PHASES]; NUM_PHASES],
    pub total: u64,
}

impl ContingencyTable {
    pub fn row_sums(&self) -> [u64; NUM_PHASES] {
        self.counts.map(|row| row.iter().sum())
    }

    pub fn col_sums(&self) -> [u64; NUM_PHASES] {
        let mut out = [0; NUM_PHASES];
        for row in &self.counts {
            for (o, &n) in out.iter_mut().zip(row) {
                *o += n;
            }
        }
        out
    }

    pub fn transposed(&self) -> ContingencyTable {
        let mut counts = [[0; NUM_PHASES]; NUM_PHASES];
        for (k, row) in self.counts.iter().enumerate() {
            for (l, &n) in row.iter().enumerate() {
                counts[l][k] = n;
            }
        }
        ContingencyTable {
            counts,
            total: self.total,
        }
    }
}

pub fn contingency(l1: &PhaseLabeling, l2: &PhaseLabeling) -> Result<ContingencyTable> {
    l1.shape().ensure_same(&l2.shape())?;
    let mut counts = [[0u64; NUM_PHASES]; NUM_PHASES];
    for (&a, &b) in l1.labels().iter().zip(l2.labels()) {
        counts[a as usize][b as usize] += 1;
    }
    Ok(ContingencyTable {
        counts,
        total: l1.labels().len() as u64,
    })
}

fn pairs(n: u64) -> u128 {
    let n = n as u128;
    n * n.saturating_sub(1) / 2
}

fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Fraction of unordered cell pairs on which the two labelings agree about
/// "same region" versus "different region". A single-cell grid scores 1.
pub fn rand_index(l1: &PhaseLabeling, l2: &PhaseLabeling) -> Result<f64> {
    let t = contingency(l1, l2)?;
    Ok(rand_index_from_table(&t))
}

fn rand_index_from_table(t: &ContingencyTable) -> f64 {
    let total = pairs(t.total);
    if total == 0 {
        return 1.0;
    }
    let joint: u128 = t.counts.iter().flatten().map(|&n| pairs(n)).sum();
    let rows: u128 = t.row_sums().iter().map(|&n| pairs(n)).sum();
    let cols: u128 = t.col_sums().iter().map(|&n| pairs(n)).sum();
    // same-same pairs plus different-different pairs
    let agree = total + 2 * joint - rows - cols;
    agree as f64 / total as f64
}

/// Sum over cells of the local refinement error `|R1(x) \ R2(x)| / |R1(x)|`,
/// where regions are the label classes.
fn refinement_error(t: &ContingencyTable) -> f64 {
    let rows = t.row_sums();
    let terms = t
        .counts
        .iter()
        .zip(rows)
        .filter(|(_, a)| *a > 0)
        .map(|(row, a)| {
            let num: u128 = row
                .iter()
                .map(|&n| n as u128 * (a - n) as u128)
                .sum();
            num as f64 / a as f64
        })
        .collect();
    sorted_sum(terms)
}

/// Global consistency error, taking the smaller of the two refinement
/// directions. Zero when one labeling refines the other.
pub fn gce(l1: &PhaseLabeling, l2: &PhaseLabeling) -> Result<f64> {
    let t = contingency(l1, l2)?;
    Ok(gce_from_table(&t))
}

fn gce_from_table(t: &ContingencyTable) -> f64 {
    let e12 = refinement_error(t);
    let e21 = refinement_error(&t.transposed());
    e12.min(e21) / t.total as f64
}

/// `H(S1 | S2) + H(S2 | S1)` in nats.
pub fn variation_of_information(l1: &PhaseLabeling, l2: &PhaseLabeling) -> Result<f64> {
    let t = contingency(l1, l2)?;
    Ok(vi_from_table(&t))
}

fn vi_from_table(t: &ContingencyTable) -> f64 {
    let rows = t.row_sums();
    let cols = t.col_sums();
    let mut terms = Vec::with_capacity(NUM_PHASES * NUM_PHASES);
    for (k, row) in t.counts.iter().enumerate() {
        for (l, &n) in row.iter().enumerate() {
            if n == 0 {
                continue;
            }
            // n ln(a b / n^2) with the integer products formed exactly
            let ratio = (rows[k] as u128 * cols[l] as u128) as f64 / (n as u128 * n as u128) as f64;
            terms.push(n as f64 * ratio.ln());
        }
    }
    (sorted_sum(terms) / t.total as f64).max(0.0)
}

/// Per-phase Dice (`dice[k]` compares label `k` in both maps) plus RI, GCE, VI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRecord {
    pub dice: [f64; NUM_PHASES],
    pub rand_index: f64,
    pub gce: f64,
    pub vi: f64,
}

pub fn full_report(seg: &PhaseLabeling, truth: &PhaseLabeling) -> Result<MetricRecord> {
    let t = contingency(seg, truth)?;
    let mut dice_scores = [0.0; NUM_PHASES];
    for (k, d) in dice_scores.iter_mut().enumerate() {
        *d = dice(&seg.mask(k as u8), &truth.mask(k as u8))?;
    }
    Ok(MetricRecord {
        dice: dice_scores,
        rand_index: rand_index_from_table(&t),
        gce: gce_from_table(&t),
        vi: vi_from_table(&t),
    })
}
