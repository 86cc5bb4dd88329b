//! Runs the concentrated-datum JL demo and writes its outputs to a directory
//! (first argument, default `blowup_out`).

use collapse_lab::demos::run_demo;

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "blowup_out".into());
    let report = run_demo("jl_n3_blowup", std::path::Path::new(&out))?;
    println!("status: {:?}", report.status);
    println!("max sup u: {:.3e}, steps {}", report.diagnostics.max_sup_u, report.diagnostics.accepted_steps);
    if let Some(b) = report.certificate.datum_moment {
        println!("initial moment {:.3e} ≥ {:.3e}: {}", b.lhs, b.rhs, b.lhs >= b.rhs);
    }
    println!("ledger: {} entries, {} failed; written to {out}", report.ledger.entries, report.ledger.failed);
    Ok(())
}
