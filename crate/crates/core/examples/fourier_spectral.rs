//! Fourier spectral indices `ul-tau_u^[4]` by the full and the reduced
//! cyclic design, checked against a trigonometric polynomial whose
//! coefficients are known.

use hosi::spectral::{estimate_ult_spectral, exact_ult_spectral, TrigPolynomial};
use hosi::{Executor, SpectralDesign, SpectralForm, VarSubset};
use num_complex::Complex64;

fn main() -> hosi::Result<()> {
    let c = |re: f64| Complex64::new(re, 0.0);
    let f = TrigPolynomial::from_terms(
        2,
        [
            (vec![0, 0], c(1.0)),
            (vec![1, 0], c(0.5)),
            (vec![-1, 0], c(0.5)),
            (vec![0, 2], Complex64::new(0.0, 0.3)),
            (vec![0, -2], Complex64::new(0.0, -0.3)),
            (vec![1, 1], c(0.2)),
            (vec![-1, -1], c(0.2)),
        ],
    )?;
    let exec = Executor::default();
    for mask in 1..4u64 {
        let u = VarSubset::new(mask, 2)?;
        let exact = exact_ult_spectral(&f, u, 4).re;
        print!("{u:<6} exact {exact:.6}");
        for form in [SpectralForm::Full, SpectralForm::Reduced] {
            let design = SpectralDesign::build(mask, 200_000, 2, 4, u, form)?;
            let est = estimate_ult_spectral(&f, &design, &exec)?;
            print!("  {form:?} {:.6} ± {:.1e}", est.value, est.std_error);
        }
        println!();
    }
    Ok(())
}
