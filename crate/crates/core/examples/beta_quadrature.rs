//! Product integration against s^a (s0 − s)^b versus the Beta closed form.

use collapse_lab::quadrature::{beta_moment, jacobi_weighted_integral};

fn main() -> anyhow::Result<()> {
    println!("{:>6} {:>6} {:>22} {:>10}", "a", "b", "integral", "rel err");
    for (a, b) in [(-0.5, 1.0), (-0.9, -0.9), (0.25, 2.5), (2.9, -0.75)] {
        let s0 = 0.3;
        let got = jacobi_weighted_integral(a, b, s0, |_| 1.0)?;
        let exact = beta_moment(a, b, s0)?;
        println!("{a:>6} {b:>6} {got:>22.15e} {:>10.2e}", ((got - exact) / exact).abs());
    }
    Ok(())
}
