//! Outer iterations, inner iterations and wall time as the number of
//! subdomains and worker threads grows, on the TV-L1 protocol instance.

use tvdd::harness::experiment::{bundled_reference, prepare, ExperimentConfig, Task};
use tvdd::prelude::*;

fn main() -> tvdd::Result<()> {
    let config = ExperimentConfig::new(Task::DenoiseL1);
    let problem = prepare(&config)?;
    let reference = bundled_reference(&config.reference_key().expect("protocol instance"))?;
    let outer = OuterParams::denoising().with_reference(reference).with_tol(1e-4);
    let inner = InnerParams::for_outer(&outer);

    println!("partition threads outer inner  time");
    for (nx, ny) in [(1, 1), (2, 2), (4, 4), (8, 8)] {
        let partition = Partition::uniform(problem.model.shape(), nx, ny)?;
        for threads in [1, 4] {
            let opts = DdOptions {
                threads: Some(threads),
                ground_truth: None,
            };
            let r = dd_solve(&problem.model, &partition, &outer, &inner, &opts)?.report;
            println!(
                "{:>9} {threads:>7} {:>5} {:>5} {:>5.2}s",
                format!("{nx}x{ny}"),
                r.outer_iters,
                r.max_inner_iters,
                r.wall_time_sec
            );
        }
    }
    Ok(())
}
