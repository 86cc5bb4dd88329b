//! Builds the inequality ledger of a short subcritical run and prints the
//! per-check summary.

use collapse_lab::demos::demo_config;
use collapse_lab::io::simulate;
use collapse_lab::monitor::build_ledger;

fn main() -> anyhow::Result<()> {
    let mut cfg = demo_config("jl_subcritical")?;
    cfg.t_end = 0.1;
    let res = simulate(&cfg)?;
    let ledger = build_ledger(&cfg.model, &res.series, &res.snapshots, res.moments.as_ref(), &cfg.monitor)?;
    let summary = ledger.summary();
    for (id, c) in &summary.by_check {
        println!("{id:<16} checked {:>3} failed {:>2} worst margin {:?}", c.checked, c.failed, c.worst_margin);
    }
    println!("full pass: {}", summary.full_pass);
    Ok(())
}
