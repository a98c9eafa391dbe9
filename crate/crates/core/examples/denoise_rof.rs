//! ROF denoising of the bundled sample with the domain-decomposition solver,
//! compared with the single-domain baseline.
//!
//! ```text
//! cargo run --release --example denoise_rof [-- NX NY]
//! ```

use tvdd::harness::experiment::{bundled_reference, prepare, ExperimentConfig, Task};
use tvdd::harness::metrics::{format_psnr, psnr};
use tvdd::prelude::*;

fn main() -> tvdd::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (nx, ny) = match args[..] {
        [nx, ny] => (nx, ny),
        _ => (2, 2),
    };

    let config = ExperimentConfig::new(Task::DenoiseL2);
    let problem = prepare(&config)?;
    let reference = bundled_reference(&config.reference_key().expect("protocol instance"))?;
    println!("noisy PSNR {} dB", format_psnr(psnr(&problem.observed, &problem.clean)));

    let partition = Partition::uniform(problem.model.shape(), nx, ny)?;
    let outer = OuterParams::denoising().with_reference(reference);
    let inner = InnerParams::for_outer(&outer);
    let opts = DdOptions {
        threads: None,
        ground_truth: Some(&problem.clean),
    };
    let dd = dd_solve(&problem.model, &partition, &outer, &inner, &opts)?;
    let r = &dd.report;
    println!(
        "{nx}x{ny}: {} outer iterations, energy {:.8}, PSNR {} dB, {:.3}s",
        r.outer_iters,
        r.final_energy(),
        format_psnr(r.psnr.unwrap_or(f64::NAN)),
        r.wall_time_sec
    );

    let params = PrimalDualParams {
        reference_energy: reference,
        tol: 1e-5,
        ..PrimalDualParams::default()
    };
    let full = solve_full_primal_dual(&problem.model, &params, Some(&problem.clean))?;
    println!(
        "baseline: {} iterations, energy {:.8}, PSNR {} dB",
        full.report.outer_iters,
        full.report.final_energy(),
        format_psnr(full.report.psnr.unwrap_or(f64::NAN))
    );
    Ok(())
}
