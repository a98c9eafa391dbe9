//! Primal-dual solvers: the single-domain baseline, the accelerated local
//! saddle-point solver, and the outer domain-decomposition loop.

mod dd;
mod ergodic;
mod full;
mod local;
mod params;

pub use dd::{dd_solve, dd_solve_observed, DdOptions, DdSolution, OuterState};
pub use ergodic::{ergodic_averages, ErgodicAverager};
pub use full::{solve_full_primal_dual, FullSolution, PrimalDualParams};
pub use local::{blended_dual_prox, solve_local_saddle, LocalSolution};
pub use params::{InnerParams, OuterParams};

use serde::Serialize;

/// One row of an energy trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: f64,
    /// `(J − J_ref) / |J_ref|` when a reference energy is known.
    pub rel_gap: Option<f64>,
    pub psnr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub outer_iters: usize,
    pub max_inner_iters: usize,
    pub trace: Vec<TraceRow>,
    /// `max |B p̃^{(n)}|` after each outer iteration (empty for the baseline).
    pub jump_trace: Vec<f64>,
    pub wall_time_sec: f64,
    pub psnr: Option<f64>,
    pub converged: bool,
    /// Local solves that hit `max_inner` before reaching `inner_tol`.
    pub nonconverged_local_solves: usize,
}

impl SolveReport {
    pub fn final_energy(&self) -> f64 {
        self.trace.last().map(|r| r.energy).unwrap_or(f64::NAN)
    }

    /// Smallest energy seen along the trace.
    pub fn min_energy(&self) -> f64 {
        self.trace.iter().map(|r| r.energy).fold(f64::INFINITY, f64::min)
    }
}

/// `(J − J_ref) / |J_ref|`, or the absolute difference when `J_ref = 0`.
pub fn relative_gap(energy: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        energy - reference
    } else {
        (energy - reference) / reference.abs()
    }
}

/// Relative change `‖new − old‖ / ‖new‖`, falling back to the absolute
/// change when `new` is zero.
pub(crate) fn relative_change(diff_norm: f64, new_norm: f64) -> f64 {
    if new_norm > 0.0 {
        diff_norm / new_norm
    } else {
        diff_norm
    }
}
