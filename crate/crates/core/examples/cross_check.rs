//! Compares the density solver with the mass-function solver under refinement.

use std::sync::Arc;

use collapse_lab::solver::wform::check_cross;
use collapse_lab::solver::{Scheme, TimeStepper};
use collapse_lab::{CoefficientFn, ModelParams, RadialField, RadialGrid, Variant};

fn main() -> anyhow::Result<()> {
    let p = ModelParams {
        n: 3,
        radius: 1.0,
        m: 1.0,
        kappa: 0.2,
        lambda: CoefficientFn::constant(0.0),
        mu: CoefficientFn::constant(0.0),
        alpha: 0.0,
        mu1: 1.0,
        lambda1: None,
        m0: 1.0,
        m1: 0.5,
        variant: Variant::JL,
    };
    let mut previous: Option<f64> = None;
    for cells in [64, 128, 256] {
        let grid = Arc::new(RadialGrid::uniform(cells, 1.0, 3)?);
        let u0 = RadialField::from_fn(grid, |r| 1.0 + 0.5 * (std::f64::consts::PI * r).cos())?;
        let d = check_cross(&p, &u0, 0.05, 5, &TimeStepper::new(Scheme::Rk2))?.max_discrepancy;
        let ratio = previous.map_or(String::new(), |prev| format!(", ratio {:.2}", prev / d));
        println!("N = {cells:>3}: max discrepancy {d:.3e}{ratio}");
        previous = Some(d);
    }
    Ok(())
}
