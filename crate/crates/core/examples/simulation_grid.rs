//! Runs a small Monte Carlo grid from a TOML file and writes the rejection
//! rates as CSV. Rerunning skips cells already in the output.
//!
//! cargo run --release --example simulation_grid [grid.toml] [out.csv]

use dr_dose::simlab::{run_grid, SimGrid};

fn main() -> dr_dose::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/grid.toml").into());
    let out = args
        .next()
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("dr_dose_grid.csv"));
    let grid = SimGrid::load(&config)?;
    let done = run_grid(&grid, &out)?;
    for (sc, est) in &done {
        println!(
            "{} scenario {} n={} delta={}: rate {:.3} (se {:.3}, {} failed)",
            sc.model,
            sc.scenario.index(),
            sc.n,
            sc.delta,
            est.rate,
            est.se,
            est.failed
        );
    }
    println!("{} new cell(s); table at {}", done.len(), out.display());
    Ok(())
}
