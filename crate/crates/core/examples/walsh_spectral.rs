//! Walsh indices of a step function in bases 2 and 3. A function constant
//! on base-`b` cells has a finite Walsh spectrum, so the exact index comes
//! straight from its coefficients.

use hosi::oracles::GridFunction;
use hosi::walsh::{estimate_ult_walsh, WalshSpectrum};
use hosi::{Executor, SpectralDesign, SpectralForm, VarSubset};

fn main() -> hosi::Result<()> {
    let exec = Executor::default();
    for (base, cells) in [(2u32, 8usize), (3, 9)] {
        let centre = |i: usize| (i as f64 + 0.5) / cells as f64;
        let values: Vec<f64> = (0..cells * cells)
            .map(|i| {
                let (a, b) = (centre(i / cells), centre(i % cells));
                2.0 * a + b + 3.0 * a * b
            })
            .collect();
        let grid = GridFunction::new(vec![cells, cells], values.clone())?;
        let levels = [cells; 2];
        let spectrum = WalshSpectrum::from_grid(base, &levels, &values)?;
        println!("base {base}, mean {:.4}", spectrum.mean().re);
        for mask in 1..4u64 {
            let u = VarSubset::new(mask, 2)?;
            let design = SpectralDesign::build(mask, 200_000, 2, 4, u, SpectralForm::Reduced)?;
            let est = estimate_ult_walsh(&grid, base, &design, &exec)?;
            println!(
                "  {u:<6} exact {:.6}  estimate {:.6} ± {:.1e}",
                spectrum.ult(u, 4).re,
                est.value,
                est.std_error
            );
        }
    }
    Ok(())
}
