//! Image I/O, synthetic data, corruption, metrics and the experiment driver.

pub mod experiment;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod synthetic;

pub use experiment::{run, ExperimentConfig, RunOutcome, Task};
