//! TV-L1 removal of 20% salt-and-pepper noise, writing the noisy input and
//! the restoration as PGM files into a scratch directory.

use tvdd::harness::experiment::{prepare, ExperimentConfig, Task};
use tvdd::harness::io::save_image;
use tvdd::harness::metrics::{format_psnr, psnr};
use tvdd::prelude::*;

fn main() -> tvdd::Result<()> {
    let config = ExperimentConfig::new(Task::DenoiseL1);
    let problem = prepare(&config)?;
    let partition = Partition::uniform(problem.model.shape(), 4, 4)?;
    let outer = OuterParams::denoising().with_tol(1e-6);
    let inner = InnerParams::for_outer(&outer);
    let sol = dd_solve(&problem.model, &partition, &outer, &inner, &DdOptions::default())?;

    println!(
        "PSNR {} dB -> {} dB after {} outer iterations",
        format_psnr(psnr(&problem.observed, &problem.clean)),
        format_psnr(psnr(&sol.u, &problem.clean)),
        sol.report.outer_iters
    );

    let dir = std::env::temp_dir().join("tvdd-denoise-tvl1");
    std::fs::create_dir_all(&dir)?;
    save_image(&problem.observed, dir.join("noisy.pgm"))?;
    save_image(&sol.u, dir.join("restored.pgm"))?;
    println!("images written to {}", dir.display());
    Ok(())
}
