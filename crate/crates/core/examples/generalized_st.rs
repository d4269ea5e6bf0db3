//! S-transform with a frequency-dependent width K(f): wide windows at low
//! frequency, narrow ones at high frequency.

use epsd::{norm_constants, KappaCurve, TransformSpec};

fn main() -> epsd::Result<()> {
    let curves = [
        ("power law", KappaCurve::PowerLaw { kappa0: 1.0, f_ref: 2.0, p: 0.5 }),
        (
            "table",
            KappaCurve::Tabulated { freqs: vec![0.1, 1.0, 10.0], values: vec![3.0, 1.5, 0.6] },
        ),
    ];
    for (label, k) in curves {
        let spec = TransformSpec::STransGeneralized { k };
        println!("{label}");
        println!("{:>8} {:>8} {:>12} {:>12}", "f (Hz)", "K(f)", "window std", "1/(|f|C_nS0)");
        for f in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let kappa = spec.kappa_at(f).expect("S-transform");
            let c = norm_constants(&spec, Some(f))?;
            println!(
                "{f:>8} {kappa:>8.3} {:>12.3} {:>12.4}",
                kappa / f,
                c.coefficient_scale.expect("populated for the S-transform")
            );
        }
    }
    Ok(())
}
