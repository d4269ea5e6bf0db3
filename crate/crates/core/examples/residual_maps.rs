//! Residual grids of the five transforms for the seismic target.
//!
//! `cargo run --release --example residual_maps -- [out_dir]` writes one CSV per
//! transform and order when a directory is given.

use std::path::PathBuf;

use epsd::io::write_grid;
use epsd::pipeline::{residual_axes, run_residual_study};
use epsd::{figure8_preset, EpsdModel, SeismicModelParams};

fn main() -> epsd::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let model = EpsdModel::seismic(SeismicModelParams::default())?;
    let (freqs, times) = residual_axes(&model, 0.02, 0.25)?;
    let results = run_residual_study(&model, &figure8_preset(0.05)?, &freqs, &times, Some(25.0))?;
    println!("{:<14} {:>14} {:>14}", "transform", "mean |R(;1)|", "mean |R(;2)|");
    for r in &results {
        let first = r.aggregate_first.map_or("0 (exact)".to_string(), |v| format!("{v:.4}"));
        println!("{:<14} {first:>14} {:>14.4}", r.spec.name(), r.aggregate_second);
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            write_grid(&dir.join(format!("{}_r2.csv", r.spec.name())), &r.second)?;
            if let Some(g) = &r.first {
                write_grid(&dir.join(format!("{}_r1.csv", r.spec.name())), g)?;
            }
        }
    }
    Ok(())
}
