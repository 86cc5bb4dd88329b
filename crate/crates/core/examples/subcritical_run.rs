//! Integrates the packaged subcritical JL configuration and prints the
//! moment series every tenth output.

use collapse_lab::demos::demo_config;
use collapse_lab::io::simulate;

fn main() -> anyhow::Result<()> {
    let cfg = demo_config("jl_subcritical")?;
    let res = simulate(&cfg)?;
    println!("status {:?}, {} steps", res.status, res.diagnostics.accepted_steps);
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "t", "sup u", "mass", "phi", "psi");
    for row in res.series.rows.iter().step_by(10) {
        let m = row.moments.expect("moments configured");
        println!("{:>6.2} {:>12.6} {:>12.8} {:>12.6e} {:>12.6e}", row.t, row.sup_u, row.mass, m.phi, m.psi);
    }
    Ok(())
}
