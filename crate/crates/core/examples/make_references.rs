//! Regenerates `data/sample64.pgm` and `data/reference_energies.json`.
//!
//! Each reference is the smallest energy seen over 10^5 iterations of the
//! single-domain primal-dual solver on the protocol instance of a task
//! (bundled sample, default corruption, seed 0).
//!
//! ```text
//! cargo run --release --example make_references
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use tvdd::harness::experiment::{prepare, ExperimentConfig, Task};
use tvdd::harness::io::{save_pgm, PgmEncoding};
use tvdd::harness::synthetic::bundled_sample;
use tvdd::oracle::reference_energy;

const ITERS: usize = 100_000;

fn main() -> tvdd::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    save_pgm(&bundled_sample(), data.join("sample64.pgm"), PgmEncoding::Binary)?;

    let mut table = BTreeMap::new();
    for task in Task::SOLVE_TASKS {
        let config = ExperimentConfig::new(task);
        let problem = prepare(&config)?;
        let energy = reference_energy(&problem.model, ITERS)?;
        let key = config.reference_key().expect("protocol instance");
        println!("{key}: {energy:.15e}");
        table.insert(key, energy);
    }
    std::fs::write(
        data.join("reference_energies.json"),
        serde_json::to_string_pretty(&table)? + "\n",
    )?;
    Ok(())
}
