//! Manufactured solution for −Δv + v = u in the ball of radius 4:
//! v = cos(kr) + 2, observed order of the elliptic solve.

use std::f64::consts::PI;
use std::sync::Arc;

use collapse_lab::elliptic::solve_pe_signal;
use collapse_lab::{RadialField, RadialGrid};

fn error(cells: usize) -> anyhow::Result<f64> {
    let radius = 4.0;
    let k = PI / radius;
    let grid = Arc::new(RadialGrid::uniform(cells, radius, 3)?);
    let v = |r: f64| (k * r).cos() + 2.0;
    let u = RadialField::from_fn(grid.clone(), |r| {
        let lap = if r == 0.0 { -3.0 * k * k } else { -k * k * (k * r).cos() - 2.0 * k * (k * r).sin() / r };
        v(r) - lap
    })?;
    let sig = solve_pe_signal(&u)?;
    Ok(sig.v.iter().zip(&grid.centers).map(|(a, &r)| (a - v(r)).abs()).fold(0.0, f64::max))
}

fn main() -> anyhow::Result<()> {
    let mut prev: Option<f64> = None;
    for cells in [32, 64, 128, 256] {
        let e = error(cells)?;
        let rate = prev.map_or(String::new(), |p| format!(", order {:.2}", (p / e).log2()));
        println!("N = {cells:>3}: max error {e:.3e}{rate}");
        prev = Some(e);
    }
    Ok(())
}
