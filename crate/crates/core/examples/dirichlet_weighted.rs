//! The odd-order multilinear operator with a Dirichlet kernel in the last
//! slot measures `Σ_{|k| <= N} |f^(k)|^{p-1}`: a weighted picture of the
//! low-frequency spectrum that `p - 1 = 2` turns into a truncated variance.

use hosi::oracles::{Factor, ProductFunction};
use hosi::spectral::estimate_weighted_spectral;
use hosi::walsh::estimate_weighted_walsh;
use hosi::{Executor, IndexOracle, SpectralDesign, SpectralForm, VarSubset};

fn main() -> hosi::Result<()> {
    let f = ProductFunction::new(vec![
        Factor::Cosine { mu: 1.0, tau: 0.5 },
        Factor::Linear { mu: 0.5, tau: 0.2 },
    ])?;
    let exec = Executor::default();
    for p in [3usize, 5] {
        for cutoff in [0u32, 1, 3] {
            let design = SpectralDesign::build(cutoff as u64, 200_000, 2, p, VarSubset::full(2), SpectralForm::Full)?;
            let est = estimate_weighted_spectral(&f, cutoff, &[0, 0], &design, &exec)?;
            println!(
                "fourier p={p} N={cutoff}: exact {:.6}  estimate {:.6} ± {:.1e}",
                f.fourier_weighted(p as u32, cutoff)?,
                est.value,
                est.std_error
            );
        }
    }
    let rect = ProductFunction::rectangle(&[0.5, 0.25])?;
    for level in 0..3 {
        let design = SpectralDesign::build(7, 200_000, 2, 3, VarSubset::full(2), SpectralForm::Full)?;
        let est = estimate_weighted_walsh(&rect, 2, level, &[0, 0], &design, &exec)?;
        println!(
            "walsh  p=3 m={level}: exact {:.6}  estimate {:.6} ± {:.1e}",
            rect.walsh_weighted(3, 2, level)?,
            est.value,
            est.std_error
        );
    }
    Ok(())
}
