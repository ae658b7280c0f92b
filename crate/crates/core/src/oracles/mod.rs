//! Reference values: closed forms for product, rectangle and additive
//! test functions, and exhaustive enumeration for grid functions.

mod additive;
mod discrepancy;
mod factor;
mod grid;
mod product;
pub mod special;

pub use additive::{AdditiveFunction, CenteredMoments};
pub use discrepancy::{
    resolve_additive_discrepancy, resolve_additive_p3_discrepancy, ConstantCheck,
    DiscrepancyReport,
};
pub use factor::{fourier_indicator_series, truncated_indicator_series, Factor, SeriesValue};
pub use grid::{GridFunction, GRID_MAX_CELLS, GRID_MAX_DIM};
pub use product::{ProductFunction, RectangleOracle};

use crate::error::{Error, Result};
use crate::model::{Family, VarSubset};

/// Exact values of closed indices `ul-tau_u` and components `sigma_u`.
///
/// Components default to the Möbius inversion of the closed indices.
pub trait IndexOracle {
    fn dim(&self) -> usize;

    fn moment_ult(&self, u: VarSubset, p: u32) -> Result<f64>;

    fn moment_component(&self, u: VarSubset, p: u32) -> Result<f64> {
        alternating(u, |v| self.moment_ult(v, p))
    }

    fn fourier_ult(&self, _u: VarSubset, _p: u32) -> Result<f64> {
        Err(Error::Unsupported("no Fourier oracle for this function".into()))
    }

    fn fourier_component(&self, u: VarSubset, p: u32) -> Result<f64> {
        alternating(u, |v| self.fourier_ult(v, p))
    }

    fn walsh_ult(&self, _u: VarSubset, _p: u32, _base: u32) -> Result<f64> {
        Err(Error::Unsupported("no Walsh oracle for this function".into()))
    }

    fn walsh_component(&self, u: VarSubset, p: u32, base: u32) -> Result<f64> {
        alternating(u, |v| self.walsh_ult(v, p, base))
    }

    /// `Σ_{k ∈ {-N..N}^d} |f^(k)|^{p-1}` over Fourier frequencies.
    fn fourier_weighted(&self, _p: u32, _cutoff: u32) -> Result<f64> {
        Err(Error::Unsupported("no weighted Fourier oracle for this function".into()))
    }

    /// `Σ_{k_j < b^m} |f^(k)|^{p-1}` over Walsh frequencies.
    fn walsh_weighted(&self, _p: u32, _base: u32, _level: u32) -> Result<f64> {
        Err(Error::Unsupported("no weighted Walsh oracle for this function".into()))
    }

    fn ult(&self, family: Family, u: VarSubset, p: u32) -> Result<f64> {
        match family {
            Family::Moment => self.moment_ult(u, p),
            Family::Fourier => self.fourier_ult(u, p),
            Family::Walsh { base } => self.walsh_ult(u, p, base),
        }
    }

    fn component(&self, family: Family, u: VarSubset, p: u32) -> Result<f64> {
        match family {
            Family::Moment => self.moment_component(u, p),
            Family::Fourier => self.fourier_component(u, p),
            Family::Walsh { base } => self.walsh_component(u, p, base),
        }
    }
}

fn alternating(u: VarSubset, ult: impl Fn(VarSubset) -> Result<f64>) -> Result<f64> {
    if u.is_empty() {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for v in u.subsets() {
        let sign = if (u.len() - v.len()) % 2 == 1 { -1.0 } else { 1.0 };
        acc += sign * ult(v)?;
    }
    Ok(acc)
}
