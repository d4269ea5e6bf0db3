//! Normalization constants of every window and wavelet.

use epsd::{norm_constants, ScaleAxis, TransformSpec};

fn main() -> epsd::Result<()> {
    let scales = ScaleAxis::geometric(0.01, 2f64.sqrt(), 20)?;
    let specs = [
        (TransformSpec::StftBox { h: 1.0 }, None),
        (TransformSpec::StftGauss { sigma: 1.0 }, None),
        (TransformSpec::STrans { kappa: 1.0 }, Some(2.0)),
        (
            TransformSpec::CwtHarmonic { m: 1.0, n: 2.0, scales: scales.clone() },
            None,
        ),
        (
            TransformSpec::CwtMorse { beta: 20.0, gamma: 3.0, scales },
            None,
        ),
    ];
    for (spec, f) in &specs {
        let c = norm_constants(spec, *f)?;
        match f {
            Some(f) => println!("[{} at f = {f} Hz]", spec.name()),
            None => println!("[{}]", spec.name()),
        }
        print!("{}", c.to_text());
        println!();
    }
    Ok(())
}
