//! Single-record estimates are noisy; averaging along time trades time
//! resolution for variance.

use epsd::{epsd_estimate, smooth_time, srm_simulate, transform, EpsdModel, TransformSpec};

fn main() -> epsd::Result<()> {
    let s0 = 2.0;
    let model = EpsdModel::flat(s0, 20.0, 20.0)?;
    let record = &srm_simulate(&model, 1, 0.02, 3)?[0];
    let spec = TransformSpec::StftGauss { sigma: 0.5 };
    let raw = epsd_estimate(&transform(record, &spec, None)?, &spec)?;
    println!("target S0 = {s0}");
    println!("{:>10} {:>10} {:>12}", "halfwidth", "mean", "rel. spread");
    for h in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let g = smooth_time(&raw, h)?;
        // Interior cells at 2-15 Hz, away from both record ends.
        let mut vals = Vec::new();
        for (i, &f) in g.freqs().values().iter().enumerate() {
            if !(2.0..=15.0).contains(&f) {
                continue;
            }
            for (j, &t) in g.times().iter().enumerate() {
                if (5.0..=15.0).contains(&t) {
                    vals.push(g.get(i, j));
                }
            }
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
        println!("{h:>10} {mean:>10.3} {:>12.3}", var.sqrt() / mean);
    }
    Ok(())
}
