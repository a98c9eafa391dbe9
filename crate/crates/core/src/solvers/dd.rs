use std::time::Instant;

use rayon::prelude::*;

use crate::decomposition::{InterfaceMultiplier, LocalDual, Partition, TornDualField};
use crate::error::{Result, TvError};
use crate::fidelity::FidelityModel;
use crate::grid::ImageField;
use crate::harness::metrics::psnr;

use super::local::solve_local_saddle;
use super::{relative_change, relative_gap, InnerParams, OuterParams, SolveReport, TraceRow};

/// Window used by the reference-free stopping rule.
const ENERGY_WINDOW: usize = 5;

#[derive(Clone, Copy, Debug, Default)]
pub struct DdOptions<'a> {
    /// Size of the worker pool for the local solves; `None` uses all cores.
    pub threads: Option<usize>,
    /// Clean image for PSNR reporting.
    pub ground_truth: Option<&'a ImageField>,
}

#[derive(Clone, Debug)]
pub struct DdSolution {
    pub u: ImageField,
    pub p: TornDualField,
    pub lambda: InterfaceMultiplier,
    pub report: SolveReport,
}

/// Iterates handed to the observer after each outer iteration.
pub struct OuterState<'a> {
    pub iter: usize,
    pub u: &'a ImageField,
    pub p: &'a TornDualField,
    pub lambda: &'a InterfaceMultiplier,
    pub energy: f64,
}

struct LocalTask {
    model: FidelityModel,
    u: ImageField,
    p: LocalDual,
}

/// Primal-dual domain decomposition with interface Lagrange multipliers.
///
/// Each outer iteration performs
///
/// ```text
/// λ ← λ + σ B(2p̃ⁿ − p̃ⁿ⁻¹)
/// p̂ ← p̃ⁿ − τ B*λ
/// (u_s, p̃_s) ← local saddle point with prox centre p̂_s, for all s in parallel
/// ```
///
/// and assembles `u = ⊕ u_s`. Local solves are warm-started from the previous
/// outer iteration. The loop stops on the relative gap to
/// `outer.reference_energy` when given, otherwise on the relative energy
/// change over a 5-iteration window.
pub fn dd_solve(
    model: &FidelityModel,
    partition: &Partition,
    outer: &OuterParams,
    inner: &InnerParams,
    opts: &DdOptions<'_>,
) -> Result<DdSolution> {
    dd_solve_observed(model, partition, outer, inner, opts, |_| {})
}

pub fn dd_solve_observed(
    model: &FidelityModel,
    partition: &Partition,
    outer: &OuterParams,
    inner: &InnerParams,
    opts: &DdOptions<'_>,
    mut observer: impl FnMut(&OuterState<'_>),
) -> Result<DdSolution> {
    inner.validate()?;
    model.initial_guess().ensure_shape(partition.shape())?;
    if let Some(gt) = opts.ground_truth {
        gt.ensure_shape(partition.shape())?;
    }
    if !(outer.tau > 0.0 && outer.sigma > 0.0) {
        return Err(TvError::InvalidParameter(format!(
            "outer steps must be positive: tau = {}, sigma = {}",
            outer.tau, outer.sigma
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
        .map_err(|e| TvError::Config(format!("cannot build thread pool: {e}")))?;

    let start = Instant::now();
    let u0 = model.initial_guess();
    let mut tasks: Vec<LocalTask> = partition
        .subdomains()
        .iter()
        .map(|sub| LocalTask {
            model: model.restrict(sub),
            u: partition.restrict_image(&u0, sub.id).expect("shape checked"),
            p: LocalDual::zeros(sub.layout),
        })
        .collect();

    let mut p_prev = partition.zero_torn();
    let mut p = partition.zero_torn();
    let mut lambda = partition.zero_multiplier();
    let mut u = u0;

    let row = |iter: usize, u: &ImageField, energy: f64| TraceRow {
        iter,
        energy,
        rel_gap: outer.reference_energy.map(|r| relative_gap(energy, r)),
        psnr: opts.ground_truth.map(|gt| psnr(u, gt)),
    };
    let mut trace = vec![row(0, &u, model.energy_total(&u)?)];
    let mut jump_trace = Vec::new();
    let mut max_inner_iters = 0;
    let mut nonconverged = 0;
    let mut converged = false;
    let mut iters = 0;

    for n in 1..=outer.max_outer {
        iters = n;

        // λ ← λ + σ B(2p̃ⁿ − p̃ⁿ⁻¹)
        let extrapolated = p.lincomb(2.0, &p_prev, -1.0);
        let jump = partition.jump(&extrapolated)?;
        for (l, b) in lambda.values_mut().iter_mut().zip(jump.values()) {
            *l += outer.sigma * b;
        }
        if let Some(k) = lambda.values().iter().position(|x| !x.is_finite()) {
            return Err(TvError::Diverged {
                iter: n,
                detail: format!("multiplier entry {k} is not finite"),
            });
        }

        // p̂ ← p̃ⁿ − τ B*λ
        let p_hat = p.lincomb(1.0, &partition.jump_adjoint(&lambda)?, -outer.tau);

        let results: Vec<Result<(ImageField, LocalDual, usize, bool)>> = pool.install(|| {
            tasks
                .par_iter()
                .zip(p_hat.blocks().par_iter())
                .map(|(task, hat)| {
                    let sol = solve_local_saddle(
                        &task.model,
                        hat,
                        task.u.clone(),
                        task.p.clone(),
                        outer.tau,
                        inner,
                    )?;
                    Ok((sol.u, sol.p, sol.iters, sol.converged))
                })
                .collect()
        });

        let mut new_blocks = Vec::with_capacity(tasks.len());
        for (task, res) in tasks.iter_mut().zip(results) {
            let (u_s, p_s, it, ok) = res?;
            max_inner_iters = max_inner_iters.max(it);
            if !ok {
                nonconverged += 1;
            }
            task.u = u_s;
            task.p = p_s.clone();
            new_blocks.push(p_s);
        }
        p_prev = std::mem::replace(&mut p, TornDualField::from_blocks(new_blocks));
        let locals: Vec<ImageField> = tasks.iter().map(|t| t.u.clone()).collect();
        u = partition.assemble_image(&locals)?;

        let energy = model.energy_total(&u)?;
        if !energy.is_finite() {
            return Err(TvError::Diverged {
                iter: n,
                detail: format!("energy became {energy}"),
            });
        }
        let r = row(n, &u, energy);
        trace.push(r);
        jump_trace.push(partition.jump(&p)?.max_abs());

        observer(&OuterState {
            iter: n,
            u: &u,
            p: &p,
            lambda: &lambda,
            energy,
        });

        let done = match r.rel_gap {
            Some(gap) => gap < outer.outer_tol,
            None => {
                n >= ENERGY_WINDOW && {
                    let old = trace[n - ENERGY_WINDOW].energy;
                    relative_change((energy - old).abs(), energy.abs()) < outer.outer_tol
                }
            }
        };
        if done {
            converged = true;
            break;
        }
    }

    let report = SolveReport {
        outer_iters: iters,
        max_inner_iters,
        psnr: opts.ground_truth.map(|gt| psnr(&u, gt)),
        trace,
        jump_trace,
        wall_time_sec: start.elapsed().as_secs_f64(),
        converged,
        nonconverged_local_solves: nonconverged,
    };
    Ok(DdSolution {
        u,
        p,
        lambda,
        report,
    })
}
