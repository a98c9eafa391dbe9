//! Inpainting under a synthetic text mask with both fidelity variants.

use tvdd::harness::experiment::{prepare, ExperimentConfig, Task};
use tvdd::harness::io::{save_image, save_mask};
use tvdd::harness::metrics::{format_psnr, psnr};
use tvdd::prelude::*;

fn main() -> tvdd::Result<()> {
    let dir = std::env::temp_dir().join("tvdd-inpaint");
    std::fs::create_dir_all(&dir)?;

    for task in [Task::InpaintL2, Task::InpaintL1] {
        let config = ExperimentConfig::new(task);
        let problem = prepare(&config)?;
        let mask = problem.mask.as_ref().expect("inpainting problems carry a mask");
        let partition = Partition::uniform(problem.model.shape(), 2, 2)?;
        let outer = OuterParams::denoising();
        let sol = dd_solve(
            &problem.model,
            &partition,
            &outer,
            &InnerParams::for_outer(&outer),
            &DdOptions::default(),
        )?;
        println!(
            "{task}: {} of {} pixels missing, PSNR {} dB -> {} dB in {} outer iterations",
            mask.count_missing(),
            mask.missing().len(),
            format_psnr(psnr(problem.model.data(), &problem.clean)),
            format_psnr(psnr(&sol.u, &problem.clean)),
            sol.report.outer_iters
        );
        save_mask(mask, dir.join("mask.pgm"))?;
        save_image(&sol.u, dir.join(format!("{task}.pgm")))?;
    }
    println!("images written to {}", dir.display());
    Ok(())
}
