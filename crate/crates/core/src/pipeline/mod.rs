//! Batch front-end: ingestion, phantoms, outputs and the CLI.

pub mod cli;
pub mod io;
pub mod output;
pub mod pgm;
pub mod phantom;
pub mod report;

pub use cli::{run_segment, Args};
pub use io::load_image;
pub use output::{emit_labeling, emit_phase_histograms, phase_histograms, read_label_map};
pub use phantom::{generate_phantom, Phantom, PhantomLayout, PhantomSpec};
pub use report::RunReport;
