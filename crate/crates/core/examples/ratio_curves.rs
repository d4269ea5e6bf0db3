//! Ratio integrals that weight each derivative term of the residuals.

use epsd::{ratio_cwt, ratio_st, ratio_stft, ScaleAxis, TransformSpec};

fn main() -> epsd::Result<()> {
    // Box windows need a finite band for r(2,2,0,0); 25 Hz is the Nyquist
    // frequency at 50 Hz sampling.
    let band = Some(25.0);
    println!("STFT window width sweep");
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "width", "box r2200", "box r0020", "gauss r2200", "gauss r0020");
    for w in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let b = TransformSpec::StftBox { h: w };
        let g = TransformSpec::StftGauss { sigma: w };
        println!(
            "{w:>6} {:>12.5} {:>12.5} {:>12.5} {:>12.5}",
            ratio_stft(&b, 2, 2, 0, 0, band)?,
            ratio_stft(&b, 0, 0, 2, 0, band)?,
            ratio_stft(&g, 2, 2, 0, 0, None)?,
            ratio_stft(&g, 0, 0, 2, 0, None)?
        );
    }

    println!("\nS-transform, kappa = 1");
    println!("{:>6} {:>12} {:>12} {:>12}", "f", "r2200", "r0020", "r0101");
    let st = TransformSpec::STrans { kappa: 1.0 };
    for f in [0.5, 1.0, 2.0, 5.0, 10.0] {
        println!(
            "{f:>6} {:>12.5} {:>12.5} {:>12.5}",
            ratio_st(&st, f, 2, 2, 0, 0)?,
            ratio_st(&st, f, 0, 0, 2, 0)?,
            ratio_st(&st, f, 0, 1, 0, 1)?
        );
    }

    let scales = ScaleAxis::geometric(0.01, 2f64.sqrt(), 20)?;
    for spec in [
        TransformSpec::CwtHarmonic { m: 1.0, n: 2f64.sqrt(), scales: scales.clone() },
        TransformSpec::CwtMorse { beta: 20.0, gamma: 3.0, scales },
    ] {
        println!("\n{}", spec.name());
        println!("{:>6} {:>12} {:>12} {:>12} {:>12} {:>12}", "f", "rw10", "rw01", "rw20", "rw11", "rw02");
        for f in [0.5, 1.0, 2.0, 5.0, 10.0] {
            let r = |j, k| ratio_cwt(&spec, f, j, k);
            println!(
                "{f:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
                r(1, 0)?,
                r(0, 1)?,
                r(2, 0)?,
                r(1, 1)?,
                r(0, 2)?
            );
        }
    }
    Ok(())
}
