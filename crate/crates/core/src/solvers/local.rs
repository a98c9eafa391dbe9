use crate::decomposition::{local_divergence, local_divergence_adjoint_into, LocalDual};
use crate::error::{Result, TvError};
use crate::fidelity::FidelityModel;
use crate::grid::{clamp_unit, ImageField};

use super::{relative_change, InnerParams};

#[derive(Clone, Debug)]
pub struct LocalSolution {
    pub u: ImageField,
    pub p: LocalDual,
    pub iters: usize,
    pub converged: bool,
}

/// `prox_{τ₀ G*}(p̄) = proj((τ p̄ + τ₀ p̂) / (τ + τ₀))` for one dof, where
/// `G*(p) = χ_C(p) + ‖p − p̂‖² / (2τ)` and `τ` is the outer step.
#[inline]
pub fn blended_dual_prox(p_bar: f64, p_hat: f64, outer_tau: f64, tau0: f64) -> f64 {
    clamp_unit((outer_tau * p_bar + tau0 * p_hat) / (outer_tau + tau0))
}

/// Solves the local saddle-point problem
///
/// ```text
/// min_u max_p  −<u, div p> + αF_s(u) − χ_C(p) − ‖p − p̂‖² / (2τ)
/// ```
///
/// with the accelerated primal-dual scheme. The dual block is uniformly
/// convex with modulus `1/τ`, so it carries the decreasing step and the
/// extrapolation. `model` must already be restricted to the subdomain.
///
/// Stops when `‖p^{k+1} − p^k‖ / ‖p^{k+1}‖ < inner_tol` or after `max_inner`
/// iterations; in the latter case the last iterate is returned with
/// `converged = false`.
pub fn solve_local_saddle(
    model: &FidelityModel,
    p_hat: &LocalDual,
    warm_u: ImageField,
    warm_p: LocalDual,
    outer_tau: f64,
    inner: &InnerParams,
) -> Result<LocalSolution> {
    inner.validate()?;
    let layout = p_hat.layout();
    warm_u.ensure_shape(model.shape())?;
    if layout.shape != model.shape() || warm_p.layout() != layout {
        return Err(TvError::ShapeMismatch {
            expected: model.shape(),
            found: layout.shape,
        });
    }
    if !(outer_tau > 0.0) {
        return Err(TvError::InvalidParameter(format!("outer tau must be positive, got {outer_tau}")));
    }

    let alpha = model.alpha();
    let mut tau = inner.tau0;
    let mut sigma = inner.sigma0;

    let mut u = warm_u;
    let mut p = warm_p;
    let mut p_bar = p.clone();
    let mut q = LocalDual::zeros(layout);
    let mut iters = 0;
    let mut converged = false;

    while iters < inner.max_inner {
        iters += 1;

        // u ← prox_{σαF}(u + σ div p̄)
        let div = local_divergence(&p_bar);
        for (x, d) in u.values_mut().iter_mut().zip(div.values()) {
            *x += sigma * d;
        }
        model.prox_in_place(u.values_mut(), sigma * alpha);

        // p ← prox_{τG*}(p − τ div* u)
        local_divergence_adjoint_into(&u, &mut q);
        let theta = 1.0 / (1.0 + 2.0 * inner.gamma * tau).sqrt();
        let mut diff2 = 0.0;
        let mut norm2 = 0.0;
        for (((x, bar), g), hat) in p
            .slots_mut()
            .zip(p_bar.slots_mut())
            .zip(q.slots())
            .zip(p_hat.slots())
        {
            let new = blended_dual_prox(*x - tau * g, hat, outer_tau, tau);
            let delta = new - *x;
            diff2 += delta * delta;
            norm2 += new * new;
            *bar = new + theta * delta;
            *x = new;
        }
        tau *= theta;
        sigma /= theta;

        if relative_change(diff2.sqrt(), norm2.sqrt()) < inner.inner_tol {
            converged = true;
            break;
        }
    }

    Ok(LocalSolution {
        u,
        p,
        iters,
        converged,
    })
}
