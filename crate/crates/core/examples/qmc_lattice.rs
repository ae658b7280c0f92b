//! Swapping Monte Carlo points for a randomly shifted Korobov lattice in the
//! pick-freeze design. The error is measured over independent shifts.

use hosi::moment::estimate_difference;
use hosi::oracles::ProductFunction;
use hosi::{Executor, IndexOracle, PickFreezeDesign, PointSet, VarSubset};

fn main() -> hosi::Result<()> {
    let f = ProductFunction::g_function(&[0.0, 1.0])?;
    let u = VarSubset::singleton(2, 1)?;
    let exact = f.moment_ult(u, 2)?;
    let exec = Executor::default();
    for n in [1_021usize, 4_093, 16_381] {
        let mut line = format!("n={n:<6}");
        for points in [PointSet::MonteCarlo, PointSet::ShiftedLattice] {
            let sq: f64 = (0..20u64)
                .map(|seed| {
                    let design = PickFreezeDesign::with_points(seed, n, 2, 2, u, points).unwrap();
                    (estimate_difference(&f, &design, &exec).unwrap().value - exact).powi(2)
                })
                .sum();
            line += &format!("  {points:?} rmse {:.2e}", (sq / 20.0).sqrt());
        }
        println!("{line}");
    }
    Ok(())
}
