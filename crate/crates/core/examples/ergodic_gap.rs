//! Tracks `n [L(p_n, lambda*) - L(p*, lambda_n)]` along the ergodic averages
//! of a ROF run, against a long-run saddle point.

use tvdd::harness::noise::add_gaussian;
use tvdd::harness::synthetic::phantom;
use tvdd::oracle::rof_dd_lagrangian;
use tvdd::prelude::*;
use tvdd::solvers::{dd_solve_observed, ErgodicAverager};

fn main() -> tvdd::Result<()> {
    let shape = GridShape::new(32, 32)?;
    let model = FidelityModel::rof(10.0, add_gaussian(&phantom(shape), 0.0, 0.05, 3)?)?;
    let partition = Partition::uniform(shape, 2, 2)?;

    let long = OuterParams::denoising().with_tol(0.0).with_max_outer(2000);
    let best = dd_solve(&model, &partition, &long, &InnerParams::for_outer(&long).with_tol(1e-10), &DdOptions::default())?;

    let outer = OuterParams::denoising().with_tol(0.0).with_max_outer(500);
    let mut avg = ErgodicAverager::new();
    let mut failure = None;
    dd_solve_observed(&model, &partition, &outer, &InnerParams::for_outer(&outer), &DdOptions::default(), |s| {
        avg.push(s.p, s.lambda);
        if s.iter % 50 != 0 && s.iter != 10 {
            return;
        }
        let gap = avg.averages().and_then(|(p, l)| {
            Ok(rof_dd_lagrangian(&model, &partition, &p, &best.lambda)?
                - rof_dd_lagrangian(&model, &partition, &best.p, &l)?)
        });
        match gap {
            Ok(g) => println!("n = {:>3}: n * gap = {:.4}", s.iter, s.iter as f64 * g),
            Err(e) => failure = Some(e),
        }
    })?;
    failure.map_or(Ok(()), Err)
}
