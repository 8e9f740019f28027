//! Four-phase piecewise-constant segmentation of grayscale images.
//!
//! Two relaxed indicator functions `u1, u2 ∈ [0, 1]` encode four regions.
//! Their energy (total variation plus region fidelity) is convex in each
//! indicator for fixed region means, and is minimized by alternating a
//! clamped fidelity step with a dual total-variation proximal step.
//! Thresholding the result at any level in `(0, 1)` gives the labeling.
//!
//! ```no_run
//! use quadphase::pipeline::{generate_phantom, PhantomSpec};
//! use quadphase::{metrics, solve_four_phase, SolverConfig};
//!
//! let mut spec = PhantomSpec::quadrants(128).unwrap();
//! spec.noise_sigma = 0.05;
//! let phantom = generate_phantom(&spec).unwrap();
//! let cfg = SolverConfig::default();
//! let state = solve_four_phase(&phantom.image, None, &cfg).unwrap();
//! let labels = state.labeling(cfg.threshold_tau).unwrap();
//! let report = metrics::full_report(&labels, &phantom.truth).unwrap();
//! println!("{:?}", report.dice);
//! ```

pub mod energy;
pub mod error;
pub mod grid;
pub mod labels;
pub mod metrics;
pub mod pipeline;
pub mod solver;

pub use energy::{FittingWeights, PhaseMeans};
pub use error::{Result, SegError};
pub use grid::{DualField, GridShape, ScalarField};
pub use labels::{BinaryMask, PhaseLabeling};
pub use solver::{solve_four_phase, SolverConfig, SolverState};
