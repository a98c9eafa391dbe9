use serde::Serialize;

use crate::error::{Result, TvError};

/// Outer-loop parameters: `τσ = 1/L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OuterParams {
    pub l: f64,
    pub tau: f64,
    pub sigma: f64,
    pub max_outer: usize,
    pub outer_tol: f64,
    /// `J(u*)`; when present the loop stops on the relative energy gap.
    pub reference_energy: Option<f64>,
}

impl OuterParams {
    /// Convergence theory needs `L > 2`. `L = 2` is accepted with a warning
    /// because it is the customary default; anything smaller is rejected.
    pub fn new(tau: f64, l: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(TvError::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        if !(l >= 2.0 && l.is_finite()) {
            return Err(TvError::InvalidParameter(format!(
                "L must satisfy L > 2 (L = 2 tolerated), got {l}"
            )));
        }
        if l == 2.0 {
            log::warn!("L = 2 sits on the boundary of the convergence condition L > 2");
        }
        Ok(OuterParams {
            l,
            tau,
            sigma: 1.0 / (l * tau),
            max_outer: 1000,
            outer_tol: 1e-5,
            reference_energy: None,
        })
    }

    /// `τ = 50`, `στ = 1/2`: denoising and inpainting defaults.
    pub fn denoising() -> Self {
        Self::new(50.0, 2.0).expect("valid defaults")
    }

    /// `τ = 1`, `στ = 1/2`: segmentation defaults.
    pub fn segmentation() -> Self {
        Self::new(1.0, 2.0).expect("valid defaults")
    }

    pub fn with_max_outer(mut self, max_outer: usize) -> Self {
        self.max_outer = max_outer;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.outer_tol = tol;
        self
    }

    pub fn with_reference(mut self, energy: Option<f64>) -> Self {
        self.reference_energy = energy;
        self
    }
}

/// Parameters of the accelerated local solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InnerParams {
    pub gamma: f64,
    /// Initial step on the dual (strongly convex) block.
    pub tau0: f64,
    /// Initial step on the primal block.
    pub sigma0: f64,
    pub inner_tol: f64,
    pub max_inner: usize,
}

impl InnerParams {
    /// `γ = 1/(8τ)`, `τ₀ = 10`, `σ₀τ₀ = 1/8`.
    pub fn for_outer_tau(tau: f64) -> Self {
        InnerParams {
            gamma: 1.0 / (8.0 * tau),
            tau0: 10.0,
            sigma0: 1.0 / 80.0,
            inner_tol: 1e-6,
            max_inner: 1000,
        }
    }

    pub fn for_outer(outer: &OuterParams) -> Self {
        Self::for_outer_tau(outer.tau)
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.inner_tol = tol;
        self
    }

    pub fn with_max_inner(mut self, max_inner: usize) -> Self {
        self.max_inner = max_inner;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let ok = self.gamma >= 0.0 && self.tau0 > 0.0 && self.sigma0 > 0.0 && self.max_inner > 0;
        if !ok {
            return Err(TvError::InvalidParameter(format!("invalid inner parameters {self:?}")));
        }
        Ok(())
    }
}
