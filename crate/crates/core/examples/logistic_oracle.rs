//! Constant data stay homogeneous; the solver follows the scalar logistic law.

use collapse_lab::demos::{demo_config, logistic_exact};
use collapse_lab::io::simulate;

fn main() -> anyhow::Result<()> {
    let cfg = demo_config("homogeneous_logistic")?;
    let res = simulate(&cfg)?;
    for u in res.snapshots.iter().step_by(10) {
        let exact = logistic_exact(0.5, 1.0, 1.0, 1.0, u.t);
        let err = u.values.iter().map(|v| (v - exact).abs()).fold(0.0, f64::max);
        println!("t = {:.1}: u = {:.10}, exact {:.10}, error {err:.2e}", u.t, u.values[0], exact);
    }
    Ok(())
}
