//! Monte Carlo check of the five estimators against the seismic target.
//!
//! `cargo run --release --example monte_carlo -- [records] [seed]`

use epsd::{figure8_preset, run_mc, EpsdModel, SeismicModelParams};

fn main() -> epsd::Result<()> {
    let mut args = std::env::args().skip(1);
    let records: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(200);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);

    let model = EpsdModel::seismic(SeismicModelParams::default())?;
    let specs = figure8_preset(0.05)?;
    let report = run_mc(&model, &specs, records, 0.02, seed)?;

    println!("{records} records, seed {seed}");
    println!(
        "{:<14} {:>10} {:>10} {:>10} {:>10}",
        "transform", "power", "r(time)", "r(freq)", "cells"
    );
    for outcome in &report.outcomes {
        match &outcome.result {
            Ok(r) => println!(
                "{:<14} {:>10.4} {:>10.4} {:>10.4} {:>10}",
                outcome.spec.name(),
                r.metrics.total_power_ratio,
                r.metrics.time_marginal_r,
                r.metrics.freq_marginal_r,
                r.metrics.masked_cells
            ),
            Err(e) => println!("{:<14} failed: {e}", outcome.spec.name()),
        }
    }
    Ok(())
}
