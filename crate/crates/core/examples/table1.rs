//! κ-suprema for m = 1, α = 0 as exact rationals, plus one off-table query.

use collapse_lab::regions::{kappa_sup_main, q, qi, table1_csv};

fn main() -> anyhow::Result<()> {
    print!("{}", table1_csv());
    // Envelope exponent p = 4 with m = 6/5 and α = 1/2 in three dimensions.
    let bound = kappa_sup_main(3, q(6, 5), qi(4), q(1, 2))?;
    println!("n=3, m=6/5, p=4, α=1/2: sup κ = {} (empty: {})", bound.sup_kappa, bound.empty);
    Ok(())
}
