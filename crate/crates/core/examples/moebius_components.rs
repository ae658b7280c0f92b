//! Closed indices estimated on the whole subset lattice, turned into ANOVA
//! components by the Möbius transform and back by the zeta transform.

use hosi::model::enumerate_subsets;
use hosi::moment::estimate_difference;
use hosi::oracles::ProductFunction;
use hosi::{
    moebius_transform, zeta_transform, Executor, IndexOracle, PickFreezeDesign, SubsetFilter, SubsetMap,
};

fn main() -> hosi::Result<()> {
    let f = ProductFunction::g_function(&[0.0, 1.0, 9.0])?;
    let exec = Executor::default();
    let p = 4;
    let mut closed = SubsetMap::new(3);
    for u in enumerate_subsets(3, SubsetFilter::All)? {
        let design = PickFreezeDesign::build(u.mask(), 300_000, 3, p as usize, u)?;
        let est = estimate_difference(&f, &design, &exec)?;
        closed.insert(u, est.value, Some(est.std_error))?;
    }
    let components = moebius_transform(&closed)?;
    println!("{:<8} {:>10} {:>10} {:>9}", "u", "sigma_u", "exact", "se");
    for (u, c) in components.iter() {
        println!(
            "{:<8} {:>10.5} {:>10.5} {:>9.1e}",
            u.to_string(),
            c.value,
            f.moment_component(u, p)?,
            c.std_error.unwrap_or(f64::NAN)
        );
    }
    let back = zeta_transform(&components)?;
    for (u, c) in closed.iter() {
        assert!((back.value(u).unwrap() - c.value).abs() < 1e-12);
    }
    Ok(())
}
