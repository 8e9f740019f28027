//! Independent reference computations used by the integration tests.

#![allow(dead_code)]

use quadphase::{GridShape, PhaseLabeling};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_labeling(rng: &mut impl Rng, w: usize, h: usize, k: u8) -> PhaseLabeling {
    let labels = (0..w * h).map(|_| rng.random_range(0..k)).collect();
    PhaseLabeling::new(GridShape::new(w, h).unwrap(), labels).unwrap()
}

/// Rand index by enumerating every unordered cell pair.
pub fn brute_rand_index(a: &[u8], b: &[u8]) -> f64 {
    let n = a.len();
    let (mut agree, mut total) = (0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            total += 1;
            if (a[i] == a[j]) == (b[i] == b[j]) {
                agree += 1;
            }
        }
    }
    agree as f64 / total as f64
}

/// Global consistency error from explicit per-cell region sets.
pub fn brute_gce(a: &[u8], b: &[u8]) -> f64 {
    let n = a.len();
    let region = |s: &[u8], x: usize| -> Vec<usize> { (0..n).filter(|&y| s[y] == s[x]).collect() };
    let local = |s1: &[u8], s2: &[u8], x: usize| -> f64 {
        let r1 = region(s1, x);
        let r2 = region(s2, x);
        let outside = r1.iter().filter(|y| !r2.contains(y)).count();
        outside as f64 / r1.len() as f64
    };
    let e12: f64 = (0..n).map(|x| local(a, b, x)).sum();
    let e21: f64 = (0..n).map(|x| local(b, a, x)).sum();
    e12.min(e21) / n as f64
}

/// Variation of information from joint and marginal label frequencies.
pub fn brute_vi(a: &[u8], b: &[u8]) -> f64 {
    let n = a.len() as f64;
    let mut joint = std::collections::BTreeMap::<(u8, u8), f64>::new();
    let mut pa = std::collections::BTreeMap::<u8, f64>::new();
    let mut pb = std::collections::BTreeMap::<u8, f64>::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1.0 / n;
        *pa.entry(x).or_default() += 1.0 / n;
        *pb.entry(y).or_default() += 1.0 / n;
    }
    // H(A|B) + H(B|A)
    let mut h_a_given_b = 0.0;
    let mut h_b_given_a = 0.0;
    for (&(x, y), &p) in &joint {
        h_a_given_b -= p * (p / pb[&y]).ln();
        h_b_given_a -= p * (p / pa[&x]).ln();
    }
    h_a_given_b + h_b_given_a
}

fn prox_energy(u: &[f64], v: &[f64], theta: f64) -> f64 {
    let tv: f64 = u.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let fid: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    tv + fid / (2.0 * theta)
}

/// Exact 1-D TV proximal map `argmin_u sum|u[i+1]-u[i]| + |u - v|^2 / (2 theta)`
/// by exhaustive search over piecewise-constant candidates.
///
/// For a fixed set of breakpoints and jump signs, the optimality conditions
/// give each run the value `mean(v) + theta * (s_right - s_left) / len`
/// where `s` are the signs of the jumps bounding it. The minimizer is one of
/// these candidates, so the lowest true energy among them is the optimum.
pub fn exact_tv_prox_1d(v: &[f64], theta: f64) -> Vec<f64> {
    let n = v.len();
    let gaps = n - 1;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for cut_mask in 0u32..(1 << gaps) {
        let cuts: Vec<usize> = (0..gaps).filter(|g| cut_mask >> g & 1 == 1).collect();
        let k = cuts.len();
        for sign_mask in 0u32..(1 << k) {
            let signs: Vec<f64> = (0..k)
                .map(|j| if sign_mask >> j & 1 == 1 { 1.0 } else { -1.0 })
                .collect();
            let mut u = vec![0.0; n];
            let mut start = 0;
            for run in 0..=k {
                let end = if run < k { cuts[run] + 1 } else { n };
                let len = (end - start) as f64;
                let mean: f64 = v[start..end].iter().sum::<f64>() / len;
                let left = if run > 0 { signs[run - 1] } else { 0.0 };
                let right = if run < k { signs[run] } else { 0.0 };
                let value = mean + theta * (right - left) / len;
                u[start..end].iter_mut().for_each(|x| *x = value);
                start = end;
            }
            let e = prox_energy(&u, v, theta);
            if best.as_ref().is_none_or(|(be, _)| e < *be) {
                best = Some((e, u));
            }
        }
    }
    best.unwrap().1
}
