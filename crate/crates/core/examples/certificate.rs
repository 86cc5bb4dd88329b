//! Assembles the blow-up certificate for the packaged JL blow-up parameters
//! with the conservative constants and with supplied ones.

use collapse_lab::certificates::ConstantSource;
use collapse_lab::demos::demo_config;

fn main() -> anyhow::Result<()> {
    let cfg = demo_config("jl_n3_blowup")?;
    for source in [ConstantSource::ConservativeJl { eta: 0.5 }, ConstantSource::Supplied { c1: 1.0, c2: 1.0 }] {
        let rep = cfg.certificate_with(source)?;
        println!(
            "{:?}: θ = {}, γ = {}, feasible {}, s0 = {:?}, r1 = {:?}, T* ≤ {:?}",
            rep.constants.source, rep.theta_exact, rep.gamma_exact, rep.feasible, rep.s0, rep.r1, rep.blow_up_time_bound
        );
    }
    Ok(())
}
