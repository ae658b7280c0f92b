//! Classical `p = 2` Sobol' indices of the g-function, next to their exact
//! values.
//!
//! ```text
//! cargo run --example basic_sobol
//! ```

use hosi::model::enumerate_subsets;
use hosi::moment::{estimate_difference, estimate_total_effect};
use hosi::oracles::ProductFunction;
use hosi::{Executor, IndexOracle, PickFreezeDesign, SubsetFilter, VarSubset};

fn main() -> hosi::Result<()> {
    let f = ProductFunction::g_function(&[0.0, 1.0, 4.5, 9.0])?;
    let exec = Executor::default();
    let variance = f.variance();
    println!("variance {variance:.6}");
    println!("{:<6} {:>9} {:>9} {:>9} {:>9}", "u", "S_u", "exact", "S^T_u", "exact");
    for u in enumerate_subsets(4, SubsetFilter::Singletons)? {
        let design = PickFreezeDesign::build(u.mask(), 200_000, 4, 2, u)?;
        let first = estimate_difference(&f, &design, &exec)?;
        let total = estimate_total_effect(&f, &design, &exec)?;
        // the total index of u is the variance left once -u is fixed
        let exact_total = variance - f.moment_ult(u.complement(), 2)?;
        println!(
            "{:<6} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            u.to_string(),
            first.value / variance,
            f.moment_ult(u, 2)? / variance,
            total.value / variance,
            exact_total / variance
        );
    }
    let all = VarSubset::full(4);
    assert!((f.moment_ult(all, 2)? - variance).abs() < 1e-12);
    Ok(())
}
