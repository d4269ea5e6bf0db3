//! STFT, S-transform and CWT of a two-tone chirp-free test signal, with the
//! matching EPSD estimates.

use std::f64::consts::PI;

use epsd::{epsd_estimate, transform, FrequencyAxis, ScaleAxis, TimeSeries, TransformSpec};

fn main() -> epsd::Result<()> {
    let dt = 0.02;
    let n = 1000;
    // 2 Hz in the first half, 6 Hz in the second half.
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 * dt;
            if t < 10.0 { (2.0 * PI * 2.0 * t).cos() } else { (2.0 * PI * 6.0 * t).cos() }
        })
        .collect();
    let ts = TimeSeries::new(x, dt)?;
    let freqs = FrequencyAxis::uniform(0.5, 0.5, 20)?;
    let scales = ScaleAxis::covering(0.01, 2f64.powf(0.1), 0.29955, 0.3)?;
    let specs = [
        TransformSpec::StftGauss { sigma: 0.5 },
        TransformSpec::STrans { kappa: 2.0 },
        TransformSpec::CwtMorse { beta: 20.0, gamma: 3.0, scales },
    ];
    for spec in &specs {
        let coeffs = transform(&ts, spec, Some(&freqs))?;
        let est = epsd_estimate(&coeffs, spec)?;
        println!("{}: {} rows × {} times", spec.name(), est.freqs().len(), est.times().len());
        for t in [5.0, 15.0] {
            let j = est.nearest_time(t);
            let (i, peak) = (0..est.freqs().len())
                .map(|i| (i, est.get(i, j)))
                .fold((0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
            println!("  t = {t:>4} s: peak at {:.2} Hz (EPSD {peak:.3})", est.freqs().values()[i]);
        }
    }
    Ok(())
}
