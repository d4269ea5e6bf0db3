//! Ensemble behaviour on stationary band-limited noise, where every answer is known.

use epsd::{run_mc, EpsdModel, SrmSimulator, TransformSpec};

const LEVEL: f64 = 2.0;
const BAND: f64 = 20.0;
const DURATION: f64 = 21.5;
const DT: f64 = 0.02;
const RECORDS: usize = 500;
const SEED: u64 = 99;

fn flat() -> EpsdModel {
    EpsdModel::flat(LEVEL, BAND, DURATION).unwrap()
}

#[test]
fn srm_marginals_are_gaussian() {
    let sim = SrmSimulator::new(&flat(), DT, SEED).unwrap();
    let records = sim.records(0, RECORDS);
    // Times 1 s apart: the lag correlation sin(2πBτ)/(2πBτ) vanishes at τ = 1.
    let mut xs = Vec::new();
    for r in &records {
        for k in 1..=20 {
            xs.push(r.samples()[k * 50]);
        }
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let c = |p: i32| xs.iter().map(|x| (x - m).powi(p)).sum::<f64>() / n;
    let var = c(2);
    let skew = c(3) / var.powf(1.5);
    let kurt = c(4) / (var * var);
    let sigma2 = 2.0 * LEVEL * BAND;
    // Standard errors at n = 10000: mean 0.01σ, variance 1.4%, skewness 0.025, kurtosis 0.05.
    assert!(m.abs() < 0.04 * sigma2.sqrt(), "mean {m}");
    assert!((var / sigma2 - 1.0).abs() < 0.06, "variance {var} vs {sigma2}");
    assert!(skew.abs() < 0.1, "skewness {skew}");
    assert!((kurt - 3.0).abs() < 0.2, "kurtosis {kurt}");
}

#[test]
fn ensemble_estimates_recover_a_flat_spectrum() {
    let specs = [TransformSpec::StftGauss { sigma: 1.0 }, TransformSpec::STrans { kappa: 1.0 }];
    let report = run_mc(&flat(), &specs, RECORDS, DT, SEED).unwrap();
    let freqs = report.freqs.values();
    let times = &report.times;
    for o in &report.outcomes {
        let r = o.result.as_ref().unwrap();
        let name = o.spec.name();
        let (mean, std, diff) = (r.mean.values(), r.std.values(), r.diff.values());
        for ((m, t), d) in mean.iter().zip(report.target.values()).zip(diff) {
            assert!((t + d - m).abs() <= 1e-12 * m.abs().max(1.0));
        }
        // Interior cells: clear of the band edges and of the record ends.
        let mut cells = Vec::new();
        for (i, &f) in freqs.iter().enumerate() {
            if !(2.0..=17.0).contains(&f) {
                continue;
            }
            for (j, &t) in times.iter().enumerate() {
                if (6.0..=15.5).contains(&t) {
                    cells.push((i, j));
                }
            }
        }
        let count = cells.len() as f64;
        let avg = cells.iter().map(|&c| mean[c]).sum::<f64>() / count;
        assert!((avg / LEVEL - 1.0).abs() < 0.03, "{name}: average {avg}");
        // A complex Gaussian coefficient has an exponential |c|², so std = mean.
        let cv = cells.iter().map(|&c| std[c] / mean[c]).sum::<f64>() / count;
        assert!((cv - 1.0).abs() < 0.08, "{name}: std/mean {cv}");
        let z_ok = cells
            .iter()
            .filter(|&&c| (mean[c] - LEVEL).abs() <= 3.0 * std[c] / (RECORDS as f64).sqrt())
            .count() as f64;
        assert!(z_ok / count > 0.98, "{name}: {} of cells within 3 standard errors", z_ok / count);
    }
}
