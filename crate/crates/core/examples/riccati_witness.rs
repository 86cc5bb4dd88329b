//! Closed-form blow-up time of y' = a y² − b against a crude explicit march.

use collapse_lab::certificates::riccati_blow_up_time;

fn march(a: f64, b: f64, y0: f64) -> f64 {
    let (mut t, mut y) = (0.0, y0);
    while y < 1e8 {
        // step shrinks with y so the last increments stay small
        let dt = 1e-4 / (a * y).max(1.0);
        y += dt * (a * y * y - b);
        t += dt;
    }
    t
}

fn main() -> anyhow::Result<()> {
    for (a, b, y0) in [(1.0, 1.0, 1.5), (2.0, 0.5, 3.0), (0.1, 4.0, 20.0)] {
        let w = riccati_blow_up_time(a, b, y0)?;
        println!(
            "a={a} b={b} y0={y0}: ρ = {:.3}, T = {:.6}, march ≈ {:.6}, ln3 bound {:.6}",
            w.rho,
            w.blow_up_time,
            march(a, b, y0),
            w.bound_ln3
        );
    }
    Ok(())
}
