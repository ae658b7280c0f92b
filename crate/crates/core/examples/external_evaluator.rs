//! Any program that speaks the line protocol can be analysed: it prints
//! `HOSI/1 d=<dim>`, then answers each line of coordinates with one value.
//! A blank line closes a batch and needs no answer. Here a short `awk`
//! script plays that role.

use std::time::Duration;

use hosi::cli::external::ExternalEvaluator;
use hosi::moment::estimate_difference;
use hosi::{Executor, PickFreezeDesign, VarSubset};

// `-W interactive` keeps mawk from buffering its input; gawk ignores it.
const MODEL: &str = r#"awk -W interactive 'BEGIN { print "HOSI/1 d=2"; fflush() }
    NF == 0 { next }
    { print $1 * $1 + 0.5 * $2; fflush() }'"#;

fn main() -> hosi::Result<()> {
    let f = ExternalEvaluator::spawn(MODEL, Duration::from_secs(30))?;
    let exec = Executor::new(2);
    // f = x1^2 + x2/2: Var(x1^2) = 4/45, Var(x2/2) = 1/48
    for (j, exact) in [(1, 4.0 / 45.0), (2, 1.0 / 48.0)] {
        let u = VarSubset::singleton(2, j)?;
        let design = PickFreezeDesign::build(3, 20_000, 2, 2, u)?;
        let est = estimate_difference(&f, &design, &exec)?;
        println!("{u}: {:.5} ± {:.1e} (exact {exact:.5})", est.value, est.std_error);
    }
    Ok(())
}
