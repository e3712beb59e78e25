//! Expander families, ball-counting obstructions and experiment runs.

pub mod config;
mod graphs;
mod measures;
mod moduli;
pub mod pipeline;
mod spaces;

pub use config::ExperimentConfig;
pub use graphs::{girth, random_regular_graph, REGULAR_RETRIES};
pub use measures::{AtomRecord, MeasureFile, MeasureKind};
pub use moduli::{
    check_uniform_moduli, obstruction_check, Bound, ModuliViolation, ObstructionRecord, PiecewiseLinear, RadiusRule,
    UniformEmbeddingModuli, Verdict, MODULI_TOL,
};
pub use pipeline::{run_config, run_experiment, RunReport};
pub use spaces::{load_complex, Target};
