//! Runs the brute-force oracle suites and a few tiny exact solves.

use tvdd::oracle::{run_verify_suite, tiny_saddle};
use tvdd::prelude::*;

fn main() -> tvdd::Result<()> {
    for check in run_verify_suite(0) {
        println!("{} {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.detail);
    }

    // Two pixels with data 0 and 2: the TV term pulls them together.
    let f = ImageField::new(GridShape::new(1, 2)?, vec![0.0, 2.0])?;
    for alpha in [1.0, 2.0, 4.0] {
        let s = tiny_saddle(&FidelityModel::rof(alpha, f.clone())?)?;
        println!(
            "ROF alpha={alpha}: u* = [{:.6}, {:.6}], p* = {:.6}, residual {:.1e}",
            s.u.values()[0],
            s.u.values()[1],
            s.p.to_dofs()[0],
            s.residual
        );
    }
    Ok(())
}
