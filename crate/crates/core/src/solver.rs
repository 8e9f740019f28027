//! Alternating minimization of the relaxed four-phase energy.
//!
//! Each outer iteration refreshes the region means, then updates `u1` with
//! `u2` fixed and `u2` with the new `u1` fixed. A phase update is a clamped
//! fidelity step `v = clamp(u - theta * r / mu, 0, 1)` followed by the TV
//! proximal map `u = v - theta * div p`, where `p` is obtained from a
//! warm-started dual fixed-point iteration.

use crate::energy::{
    energy_g, fitting_r1, fitting_r2, update_means, FittingWeights, PhaseMeans,
    DEFAULT_MEAN_EPS,
};
use crate::error::{Result, SegError};
use crate::grid::{divergence, divergence_into, gradient_into, DualField, ScalarField};
use crate::labels::PhaseLabeling;

/// Halvings tried by the descent safeguard before a proposal is rejected.
const MAX_BACKTRACKS: u32 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub theta1: f64,
    pub theta2: f64,
    /// Dual fixed-point step.
    pub dt: f64,
    pub inner_dual_iters: usize,
    pub outer_iters: usize,
    /// Refresh the means every this many outer iterations.
    pub mean_update_period: usize,
    /// Stop once the largest cellwise change of `u1` and `u2` drops below this.
    pub tol: f64,
    pub threshold_tau: f64,
    pub weights: FittingWeights,
    /// Phase mass below which a mean keeps its previous value.
    pub mean_eps: f64,
    /// Backtrack each phase update along the segment from the old iterate so
    /// that the energy never increases.
    pub monotone: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            theta1: 0.001,
            theta2: 0.001,
            dt: 0.125,
            inner_dual_iters: 5,
            outer_iters: 100,
            mean_update_period: 1,
            tol: 1e-4,
            threshold_tau: 0.5,
            weights: FittingWeights::default(),
            mean_eps: DEFAULT_MEAN_EPS,
            monotone: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(SegError::InvalidConfig(msg.to_string()));
        if !(self.theta1 > 0.0 && self.theta2 > 0.0 && self.theta1.is_finite() && self.theta2.is_finite()) {
            return bad("theta must be positive and finite");
        }
        if !(self.dt > 0.0 && self.dt <= 0.25) {
            return bad("dt must lie in (0, 0.25]");
        }
        if self.inner_dual_iters == 0 || self.outer_iters == 0 || self.mean_update_period == 0 {
            return bad("iteration counts and mean update period must be positive");
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return bad("tol must be nonnegative");
        }
        if self.mean_eps.is_nan() || self.mean_eps <= 0.0 {
            return bad("mean_eps must be positive");
        }
        if !(self.threshold_tau > 0.0 && self.threshold_tau < 1.0) {
            return Err(SegError::InvalidThreshold(self.threshold_tau));
        }
        self.weights.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub u1: ScalarField,
    pub u2: ScalarField,
    pub v1: ScalarField,
    pub v2: ScalarField,
    pub p1: DualField,
    pub p2: DualField,
    pub c: PhaseMeans,
    /// Completed outer iterations.
    pub iteration: usize,
    /// Energy at initialization followed by one entry per outer iteration.
    pub energy_trace: Vec<f64>,
    pub converged: bool,
}

impl SolverState {
    pub fn labeling(&self, tau: f64) -> Result<PhaseLabeling> {
        threshold_labeling(&self.u1, &self.u2, tau)
    }

    pub fn final_energy(&self) -> f64 {
        *self.energy_trace.last().expect("trace holds the initial energy")
    }
}

/// Dual fixed point `p <- (p + dt g) / (1 + dt |g|)` with
/// `g = grad(div p - v / theta)`, run `iters` times from `p`.
pub fn chambolle_fixed_point(
    p: &DualField,
    v: &ScalarField,
    theta: f64,
    dt: f64,
    iters: usize,
) -> Result<DualField> {
    let shape = v.shape();
    shape.ensure_same(&p.shape())?;
    let n = shape.len();
    let mut out = p.clone();
    let mut work = vec![0.0; n];
    let mut gx = vec![0.0; n];
    let mut gy = vec![0.0; n];
    let inv_theta = 1.0 / theta;
    for _ in 0..iters {
        {
            let (px, py) = out.components_mut();
            divergence_into(px, py, shape, &mut work);
        }
        for (w, &vi) in work.iter_mut().zip(v.values()) {
            *w -= vi * inv_theta;
        }
        gradient_into(&work, shape, &mut gx, &mut gy);
        let (px, py) = out.components_mut();
        for i in 0..n {
            let denom = 1.0 + dt * gx[i].hypot(gy[i]);
            px[i] = (px[i] + dt * gx[i]) / denom;
            py[i] = (py[i] + dt * gy[i]) / denom;
        }
    }
    Ok(out)
}

/// Approximate TV proximal map of `v` with weight `theta`, warm-started from
/// `p_warm`. Returns `(v - theta * div p, p)`.
pub fn tv_prox_step(
    v: &ScalarField,
    p_warm: &DualField,
    theta: f64,
    cfg: &SolverConfig,
) -> Result<(ScalarField, DualField)> {
    let p = chambolle_fixed_point(p_warm, v, theta, cfg.dt, cfg.inner_dual_iters)?;
    let div = divergence(&p);
    let values = v
        .values()
        .iter()
        .zip(div.values())
        .map(|(&vi, &d)| vi - theta * d)
        .collect();
    Ok((ScalarField::new(v.shape(), values)?, p))
}

/// `clamp(u - theta * r, 0, 1)` cellwise.
pub fn v_update(u: &ScalarField, r: &ScalarField, theta: f64) -> Result<ScalarField> {
    u.shape().ensure_same(&r.shape())?;
    let values = u
        .values()
        .iter()
        .zip(r.values())
        .map(|(&ui, &ri)| (ui - theta * ri).clamp(0.0, 1.0))
        .collect();
    ScalarField::new(u.shape(), values)
}

/// Cuts both relaxed indicators at `tau`; a value equal to `tau` counts as below.
pub fn threshold_labeling(u1: &ScalarField, u2: &ScalarField, tau: f64) -> Result<PhaseLabeling> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(SegError::InvalidThreshold(tau));
    }
    u1.shape().ensure_same(&u2.shape())?;
    let labels = u1
        .values()
        .iter()
        .zip(u2.values())
        .map(|(&a, &b)| PhaseLabeling::encode(a > tau, b > tau))
        .collect();
    PhaseLabeling::new(u1.shape(), labels)
}

/// Empirical quantile (lower nearest rank) of the field values.
pub fn quantile(field: &ScalarField, q: f64) -> f64 {
    let mut sorted = field.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, q)
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q.clamp(0.0, 1.0)).floor() as usize;
    sorted[idx]
}

/// Quartile-based binary start: the brightest quarter of the intensities goes
/// to phase 11, then 10, 01 and 00. `u1` marks the upper half and `u2` the
/// second and fourth quarters.
pub fn quartile_initialization(image: &ScalarField) -> (ScalarField, ScalarField) {
    let mut sorted = image.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q2 = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let u1 = image.map(|i| if i > q2 { 1.0 } else { 0.0 });
    let u2 = image.map(|i| if (i > q1 && i <= q2) || i > q3 { 1.0 } else { 0.0 });
    (u1, u2)
}

/// Fallback means for phases that are empty at the start: octile midpoints
/// of each intensity quarter, brightest first.
fn seed_means(image: &ScalarField) -> PhaseMeans {
    let mut sorted = image.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    PhaseMeans::new(
        quantile_sorted(&sorted, 0.875),
        quantile_sorted(&sorted, 0.625),
        quantile_sorted(&sorted, 0.375),
        quantile_sorted(&sorted, 0.125),
    )
}

fn check_unit_range(field: &ScalarField, name: &str) -> Result<()> {
    if field.values().iter().all(|v| (0.0..=1.0).contains(v)) {
        Ok(())
    } else {
        Err(SegError::InvalidInput(format!(
            "initial {name} has values outside [0, 1]"
        )))
    }
}

pub fn solve_four_phase(
    image: &ScalarField,
    init: Option<(ScalarField, ScalarField)>,
    cfg: &SolverConfig,
) -> Result<SolverState> {
    solve_four_phase_observed(image, init, cfg, |_| {})
}

/// Like [`solve_four_phase`], calling `observer` after every outer iteration.
pub fn solve_four_phase_observed(
    image: &ScalarField,
    init: Option<(ScalarField, ScalarField)>,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&SolverState),
) -> Result<SolverState> {
    cfg.validate()?;
    if !image.is_finite() {
        return Err(SegError::InvalidInput(
            "image contains non-finite values".into(),
        ));
    }
    let shape = image.shape();
    let (u1, u2) = match init {
        Some((u1, u2)) => {
            shape.ensure_same(&u1.shape())?;
            shape.ensure_same(&u2.shape())?;
            check_unit_range(&u1, "u1")?;
            check_unit_range(&u2, "u2")?;
            (u1, u2)
        }
        None => quartile_initialization(image),
    };
    let w = cfg.weights;
    let c = update_means(image, &u1, &u2, seed_means(image), cfg.mean_eps)?;
    let e0 = energy_g(image, c, &u1, &u2, &w)?;
    let mut state = SolverState {
        v1: u1.clone(),
        v2: u2.clone(),
        u1,
        u2,
        p1: DualField::zeros(shape),
        p2: DualField::zeros(shape),
        c,
        iteration: 0,
        energy_trace: vec![e0],
        converged: false,
    };

    for k in 0..cfg.outer_iters {
        if k % cfg.mean_update_period == 0 {
            state.c = update_means(image, &state.u1, &state.u2, state.c, cfg.mean_eps)?;
        }

        let r1 = fitting_r1(image, state.c, &state.u2, &w)?.scaled(1.0 / w.mu1);
        let v1 = v_update(&state.u1, &r1, cfg.theta1)?;
        let (proposal, p1) = tv_prox_step(&v1, &state.p1, cfg.theta1, cfg)?;
        let u1 = if cfg.monotone {
            let u2 = &state.u2;
            safeguard(&state.u1, clamp_unit(proposal), |u| {
                energy_g(image, state.c, u, u2, &w)
            })?
        } else {
            clamp_unit(proposal)
        };
        let delta1 = u1.max_abs_diff(&state.u1);
        state.u1 = u1;
        state.v1 = v1;
        state.p1 = p1;

        let r2 = fitting_r2(image, state.c, &state.u1, &w)?.scaled(1.0 / w.mu2);
        let v2 = v_update(&state.u2, &r2, cfg.theta2)?;
        let (proposal, p2) = tv_prox_step(&v2, &state.p2, cfg.theta2, cfg)?;
        let u2 = if cfg.monotone {
            let u1 = &state.u1;
            safeguard(&state.u2, clamp_unit(proposal), |u| {
                energy_g(image, state.c, u1, u, &w)
            })?
        } else {
            clamp_unit(proposal)
        };
        let delta2 = u2.max_abs_diff(&state.u2);
        state.u2 = u2;
        state.v2 = v2;
        state.p2 = p2;

        state
            .energy_trace
            .push(energy_g(image, state.c, &state.u1, &state.u2, &w)?);
        state.iteration = k + 1;
        state.converged = delta1.max(delta2) < cfg.tol;
        observer(&state);
        if state.converged {
            break;
        }
    }
    Ok(state)
}

// The exact prox of a [0, 1] field stays in [0, 1]; a truncated dual loop can
// overshoot slightly.
fn clamp_unit(mut f: ScalarField) -> ScalarField {
    for v in f.values_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    f
}

/// Largest step `s` in `{1, 1/2, ...}` along `old -> proposal` whose energy
/// does not exceed that of `old`; falls back to `old`.
fn safeguard(
    old: &ScalarField,
    proposal: ScalarField,
    energy: impl Fn(&ScalarField) -> Result<f64>,
) -> Result<ScalarField> {
    let e0 = energy(old)?;
    if energy(&proposal)? <= e0 {
        return Ok(proposal);
    }
    let mut s = 0.5;
    for _ in 0..MAX_BACKTRACKS {
        let values = old
            .values()
            .iter()
            .zip(proposal.values())
            .map(|(&a, &b)| a + s * (b - a))
            .collect();
        let candidate = ScalarField::new(old.shape(), values)?;
        if energy(&candidate)? <= e0 {
            return Ok(candidate);
        }
        s *= 0.5;
    }
    Ok(old.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{total_variation, GridShape};

    fn shape(w: usize, h: usize) -> GridShape {
        GridShape::new(w, h).unwrap()
    }

    #[test]
    fn default_config_is_valid() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn config_bounds() {
        let base = SolverConfig::default;
        assert!(SolverConfig { dt: 0.3, ..base() }.validate().is_err());
        let c = SolverConfig { threshold_tau: 1.0, ..base() };
        assert!(matches!(c.validate(), Err(SegError::InvalidThreshold(_))));
        assert!(SolverConfig { theta2: 0.0, ..base() }.validate().is_err());
        assert!(SolverConfig { tol: f64::NAN, ..base() }.validate().is_err());
    }

    #[test]
    fn zero_dual_is_fixed_for_constant_v() {
        let s = shape(6, 5);
        let v = ScalarField::filled(s, 0.37);
        let p = chambolle_fixed_point(&DualField::zeros(s), &v, 0.01, 0.125, 50).unwrap();
        assert!(p.x().iter().chain(p.y()).all(|&c| c == 0.0));
    }

    #[test]
    fn dual_stays_in_unit_ball() {
        let s = shape(9, 7);
        let v = ScalarField::from_fn(s, |x, y| ((x * 31 + y * 17) % 11) as f64 / 10.0);
        let warm = DualField::new(
            s,
            (0..s.len()).map(|i| ((i % 5) as f64 - 2.0) * 0.3).collect(),
            (0..s.len()).map(|i| ((i % 3) as f64 - 1.0) * 0.6).collect(),
        )
        .unwrap();
        assert!(warm.max_norm() <= 1.0);
        for iters in [1, 3, 40] {
            let p = chambolle_fixed_point(&warm, &v, 0.05, 0.125, iters).unwrap();
            assert!(p.max_norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn prox_of_constant_is_identity() {
        let s = shape(4, 4);
        let v = ScalarField::filled(s, 0.8);
        let (u, _) = tv_prox_step(&v, &DualField::zeros(s), 0.001, &SolverConfig::default())
            .unwrap();
        assert_eq!(u, v);
    }

    #[test]
    fn prox_with_vanishing_theta() {
        let s = shape(8, 8);
        let v = ScalarField::from_fn(s, |x, y| ((x + y) % 2) as f64);
        let (u, _) = tv_prox_step(&v, &DualField::zeros(s), 1e-12, &SolverConfig::default())
            .unwrap();
        assert!(u.max_abs_diff(&v) <= 1e-9);
    }

    #[test]
    fn prox_does_not_increase_tv_on_checkerboard() {
        let s = shape(8, 8);
        let v = ScalarField::from_fn(s, |x, y| ((x + y) % 2) as f64);
        let (u, _) = tv_prox_step(&v, &DualField::zeros(s), 0.001, &SolverConfig::default())
            .unwrap();
        assert!(total_variation(&u) <= total_variation(&v));
    }

    #[test]
    fn v_update_cases() {
        let s = shape(1, 1);
        let f = |v: f64| ScalarField::filled(s, v);
        assert_eq!(v_update(&f(0.42), &f(0.0), 0.001).unwrap().values()[0], 0.42);
        assert_eq!(v_update(&f(0.5), &f(1000.0), 0.001).unwrap().values()[0], 0.0);
        assert_eq!(v_update(&f(0.5), &f(-1000.0), 0.001).unwrap().values()[0], 1.0);
        let v = v_update(&f(0.3), &f(-0.09), 0.001).unwrap().values()[0];
        assert!((v - 0.30009).abs() < 1e-15);
    }

    #[test]
    fn threshold_encoding() {
        let s = shape(2, 1);
        let ones = ScalarField::filled(s, 1.0);
        let l = threshold_labeling(&ones, &ones, 0.5).unwrap();
        assert_eq!(l.labels(), &[0, 0]);

        let u1 = ScalarField::new(s, vec![0.9, 0.1]).unwrap();
        let u2 = ScalarField::new(s, vec![0.2, 0.8]).unwrap();
        assert_eq!(threshold_labeling(&u1, &u2, 0.5).unwrap().labels(), &[1, 2]);

        // ties fall below
        let half = ScalarField::filled(s, 0.5);
        assert_eq!(threshold_labeling(&half, &half, 0.5).unwrap().labels(), &[3, 3]);
    }

    #[test]
    fn threshold_out_of_range() {
        let s = shape(1, 1);
        let f = ScalarField::zeros(s);
        for tau in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(matches!(
                threshold_labeling(&f, &f, tau),
                Err(SegError::InvalidThreshold(_))
            ));
        }
    }

    #[test]
    fn quartile_init_splits_four_levels() {
        let s = shape(4, 4);
        let image = ScalarField::from_fn(s, |x, _| [0.2, 0.4, 0.6, 0.8][x]);
        let (u1, u2) = quartile_initialization(&image);
        let l = threshold_labeling(&u1, &u2, 0.5).unwrap();
        for y in 0..4 {
            assert_eq!(
                [l.get(0, y), l.get(1, y), l.get(2, y), l.get(3, y)],
                [3, 2, 1, 0]
            );
        }
    }

    #[test]
    fn rejects_non_finite_image() {
        let s = shape(3, 3);
        let mut image = ScalarField::filled(s, 0.5);
        image.set(1, 1, f64::NAN);
        assert!(matches!(
            solve_four_phase(&image, None, &SolverConfig::default()),
            Err(SegError::InvalidInput(_))
        ));
    }

    #[test]
    fn rejects_out_of_range_init() {
        let s = shape(3, 3);
        let image = ScalarField::filled(s, 0.5);
        let bad = ScalarField::filled(s, 1.2);
        let ok = ScalarField::filled(s, 0.5);
        assert!(matches!(
            solve_four_phase(&image, Some((bad, ok)), &SolverConfig::default()),
            Err(SegError::InvalidInput(_))
        ));
    }

    #[test]
    fn constant_image_collapses_to_one_phase() {
        let s = shape(16, 16);
        let image = ScalarField::filled(s, 0.5);
        let state = solve_four_phase(&image, None, &SolverConfig::default()).unwrap();
        assert_eq!(state.c.to_array(), [0.5; 4]);
        let counts = state.labeling(0.5).unwrap().counts();
        assert_eq!(counts.iter().filter(|&&n| n > 0).count(), 1);
        assert!(state.converged);
    }
}
