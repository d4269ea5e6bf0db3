//! Spectral-representation records of the seismic target and their ensemble
//! variance against the target's total power.

use epsd::{srm_simulate, EpsdModel, SeismicModelParams};

fn main() -> epsd::Result<()> {
    let params = SeismicModelParams::default();
    let model = EpsdModel::seismic(params.clone())?;
    let records = srm_simulate(&model, 500, 0.02, 42)?;
    println!("{} records of {} samples", records.len(), records[0].len());
    println!("{:>6} {:>12} {:>12}", "t (s)", "variance", "E_T·λ0(t)");
    for t in [2.0, 4.0, 6.0, 8.0, 12.0, 16.0, 20.0] {
        let q = (t / 0.02_f64).round() as usize;
        let var = records.iter().map(|r| r.samples()[q].powi(2)).sum::<f64>() / records.len() as f64;
        println!("{t:>6} {var:>12.3} {:>12.3}", params.e_t * params.lambda0(t));
    }
    Ok(())
}
