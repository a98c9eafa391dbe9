//! Parallel domain decomposition for total-variation-regularized imaging.
//!
//! The dual problem is discretized with lowest-order Raviart–Thomas elements
//! on the pixel grid ([`grid`]). The image is split into rectangular
//! subdomains whose dual spaces are torn along the interfaces
//! ([`decomposition`]); continuity is restored by Lagrange multipliers and
//! the resulting saddle-point problem is solved by an outer primal-dual loop
//! with accelerated local solvers running in parallel ([`solvers`]).
//!
//! Five separable fidelity terms are supported ([`fidelity`]): ROF, TV-L1,
//! their inpainting variants, and convex Chan–Vese segmentation.
//!
//! ```
//! use tvdd::prelude::*;
//!
//! let shape = GridShape::new(16, 16).unwrap();
//! let f = ImageField::from_fn(shape, |i, j| if i < 8 && j < 8 { 1.0 } else { 0.0 });
//! let model = FidelityModel::rof(10.0, f).unwrap();
//! let partition = Partition::uniform(shape, 2, 2).unwrap();
//! let outer = OuterParams::denoising().with_max_outer(50);
//! let inner = InnerParams::for_outer(&outer);
//! let sol = dd_solve(&model, &partition, &outer, &inner, &DdOptions::default()).unwrap();
//! assert!(sol.report.final_energy() <= sol.report.trace[0].energy);
//! ```

pub mod decomposition;
pub mod error;
pub mod fidelity;
pub mod grid;
pub mod harness;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod solvers;

pub use error::{Result, TvError};

pub mod prelude {
    pub use crate::decomposition::{
        local_divergence, local_divergence_adjoint, InterfaceMultiplier, LocalDual, Partition,
        PartitionSpec, TornDualField,
    };
    pub use crate::error::{Result, TvError};
    pub use crate::fidelity::{threshold, FidelityKind, FidelityModel, Mask};
    pub use crate::grid::{
        divergence, divergence_adjoint, project_unit_ball, total_variation, DualField, GridShape,
        ImageField,
    };
    pub use crate::solvers::{
        dd_solve, solve_full_primal_dual, DdOptions, InnerParams, OuterParams, PrimalDualParams,
        SolveReport,
    };
}
