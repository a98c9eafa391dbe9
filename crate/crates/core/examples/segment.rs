//! Convex two-phase segmentation of a noisy two-disk image.

use tvdd::harness::metrics::mismatch_fraction;
use tvdd::harness::noise::add_gaussian;
use tvdd::harness::synthetic::two_disks;
use tvdd::prelude::*;

fn main() -> tvdd::Result<()> {
    let shape = GridShape::new(96, 96)?;
    let (clean, truth) = two_disks(shape, 0.6, 0.1);
    let noisy = add_gaussian(&clean, 0.0, 0.01, 42)?;
    let model = FidelityModel::segmentation(10.0, noisy, 0.6, 0.1)?;

    let partition = Partition::uniform(shape, 3, 3)?;
    let outer = OuterParams::segmentation();
    let sol = dd_solve(&model, &partition, &outer, &InnerParams::for_outer(&outer), &DdOptions::default())?;
    let labels = threshold(&sol.u, 0.5);

    println!(
        "{} outer iterations, {:.3}% of pixels mislabeled",
        sol.report.outer_iters,
        100.0 * mismatch_fraction(&labels, &truth)
    );
    for i in (0..shape.rows).step_by(6) {
        let line: String = (0..shape.cols)
            .step_by(3)
            .map(|j| if labels.get(i, j) > 0.5 { '#' } else { '.' })
            .collect();
        println!("{line}");
    }
    Ok(())
}
