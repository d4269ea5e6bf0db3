//! D_κ by quadrature against the regression fit and the Gaussian limit C_nS0.

use epsd::{d_kappa, DKappaMethod};

fn main() -> epsd::Result<()> {
    println!("{:>8} {:>12} {:>12} {:>12} {:>9}", "kappa", "quadrature", "regression", "C_nS0", "q/C_nS0");
    let (lo, hi, n) = (0.1_f64, 3.0_f64, 12);
    for i in 0..n {
        let kappa = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
        let q = d_kappa(kappa, DKappaMethod::Quadrature)?;
        let r = d_kappa(kappa, DKappaMethod::Regression)?;
        let cns0 = 1.0 / (kappa * (4.0 * std::f64::consts::PI).sqrt());
        let flag = if r.warning { " (outside fit range)" } else { "" };
        println!(
            "{kappa:>8.4} {:>12.6} {:>12.6} {cns0:>12.6} {:>9.5}{flag}",
            q.value,
            r.value,
            q.value / cns0
        );
    }
    Ok(())
}
