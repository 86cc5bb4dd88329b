//! Admissible γ window and θ for a JL tuple, then a random feasibility sweep.

use collapse_lab::certificates::{feasibility_check, theta_for};
use collapse_lab::regions::{gamma_window, q, qi, to_f64};

fn main() -> anyhow::Result<()> {
    let (n, m, p, kappa, alpha) = (3, qi(1), qi(3), q(1, 5), qi(0));
    let w = gamma_window(n, m, p, kappa, alpha)?;
    let th = theta_for(n, m, p, kappa, alpha)?;
    println!("γ ∈ ({}, {}), {:?} branch, midpoint {:.6}", w.lower, w.upper, w.branch, to_f64(w.midpoint()));
    println!("θ = {} ({:?})", th.theta, th.branch);

    let report = feasibility_check(2000, 1);
    println!("random admissible tuples: {} sampled, {} failures", report.samples, report.failures);
    Ok(())
}
