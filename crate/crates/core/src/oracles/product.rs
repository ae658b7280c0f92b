//! Product functions `f(x) = Π_j h_j(x_j)` and the hyperrectangle indicator.

use serde::{Deserialize, Serialize};

use super::factor::{fourier_indicator_series, Factor};
use super::IndexOracle;
use crate::error::{Error, Result};
use crate::model::{BlackBox, MomentDescriptor, VarSubset};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductFunction {
    factors: Vec<Factor>,
}

impl ProductFunction {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("a product needs at least one factor"));
        }
        for f in &factors {
            f.validate()?;
        }
        Ok(ProductFunction { factors })
    }

    /// Indicator of `Π_j [0, eps_j)`.
    pub fn rectangle(eps: &[f64]) -> Result<Self> {
        Self::new(
            eps.iter()
                .map(|&eps| Factor::Indicator { eps, offset: 0.0 })
                .collect(),
        )
    }

    /// Sobol' g-function with parameters `a_j`.
    pub fn g_function(a: &[f64]) -> Result<Self> {
        Self::new(a.iter().map(|&a| Factor::GFunction { a }).collect())
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn descriptors(&self) -> Vec<MomentDescriptor> {
        self.factors.iter().map(Factor::descriptor).collect()
    }

    pub fn mean(&self) -> f64 {
        self.factors.iter().map(Factor::mean).product()
    }

    pub fn variance(&self) -> f64 {
        self.factors.iter().map(|f| f.raw_moment(2)).product::<f64>() - self.mean().powi(2)
    }

    fn check(&self, u: VarSubset) -> Result<()> {
        if u.dim() != self.factors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.factors.len(),
                got: u.dim(),
            });
        }
        Ok(())
    }

    /// `Π_{j ∈ u} inside_j · Π_{j ∉ u} outside_j`.
    fn split_product(&self, u: VarSubset, inside: &[f64], outside: &[f64]) -> f64 {
        (0..self.factors.len())
            .map(|j| if u.contains(j) { inside[j] } else { outside[j] })
            .product()
    }

    /// `Π_{j ∉ u} outside_j · Π_{j ∈ u} (inside_j - outside_j)`, the Möbius
    /// inverse of [`Self::split_product`] for nonempty `u`.
    fn split_component(&self, u: VarSubset, inside: &[f64], outside: &[f64]) -> f64 {
        if u.is_empty() {
            return 0.0;
        }
        (0..self.factors.len())
            .map(|j| {
                if u.contains(j) {
                    inside[j] - outside[j]
                } else {
                    outside[j]
                }
            })
            .product()
    }

    fn moment_parts(&self, p: u32) -> (Vec<f64>, Vec<f64>) {
        let inside = self.factors.iter().map(|f| f.raw_moment(p)).collect();
        let outside = self.factors.iter().map(|f| f.mean().powi(p as i32)).collect();
        (inside, outside)
    }

    /// Closed-form moment component `sigma_u^(p)` from the factor descriptors
    /// (`p` in 2..=4).
    pub fn moment_component_closed(&self, u: VarSubset, p: u32) -> Result<f64> {
        self.check(u)?;
        if u.is_empty() {
            return Ok(0.0);
        }
        let mut value = 1.0;
        for (j, d) in self.descriptors().iter().enumerate() {
            let (mu, t2, g, k) = (d.mu, d.tau2, d.gamma, d.kappa);
            let t = t2.sqrt();
            value *= if u.contains(j) {
                match p {
                    2 => t2,
                    3 => t2 * (3.0 * mu + g * t),
                    4 => t2 * (6.0 * mu * mu + 4.0 * mu * g * t + k * t2),
                    _ => {
                        return Err(Error::Unsupported(format!(
                            "closed-form moment components cover p = 2, 3, 4, got {p}"
                        )))
                    }
                }
            } else {
                mu.powi(p as i32)
            };
        }
        Ok(value)
    }

    fn spectral_parts(&self, p: u32, base: Option<u32>) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut inside = Vec::with_capacity(self.factors.len());
        for f in &self.factors {
            inside.push(match base {
                None => f.fourier_power_sum(p)?,
                Some(b) => f.walsh_power_sum(p, b)?,
            });
        }
        let outside = self.factors.iter().map(|f| f.mean().abs().powi(p as i32)).collect();
        Ok((inside, outside))
    }

    /// Spectral component `sigma_u^[p]` (Fourier when `base` is `None`).
    pub fn spectral_component(&self, u: VarSubset, p: u32, base: Option<u32>) -> Result<f64> {
        self.check(u)?;
        let (inside, outside) = self.spectral_parts(p, base)?;
        Ok(self.split_component(u, &inside, &outside))
    }
}

impl BlackBox for ProductFunction {
    fn dim(&self) -> usize {
        self.factors.len()
    }
    fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.factors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.factors.len(),
                got: x.len(),
            });
        }
        Ok(self.factors.iter().zip(x).map(|(f, &xj)| f.eval(xj)).product())
    }
}

impl IndexOracle for ProductFunction {
    fn dim(&self) -> usize {
        self.factors.len()
    }

    fn moment_ult(&self, u: VarSubset, p: u32) -> Result<f64> {
        self.check(u)?;
        if u.is_empty() {
            return Ok(0.0);
        }
        let (inside, outside) = self.moment_parts(p);
        Ok(self.split_product(u, &inside, &outside) - self.mean().powi(p as i32))
    }

    fn moment_component(&self, u: VarSubset, p: u32) -> Result<f64> {
        self.check(u)?;
        let (inside, outside) = self.moment_parts(p);
        Ok(self.split_component(u, &inside, &outside))
    }

    fn fourier_ult(&self, u: VarSubset, p: u32) -> Result<f64> {
        self.spectral_ult(u, p, None)
    }

    fn fourier_component(&self, u: VarSubset, p: u32) -> Result<f64> {
        self.spectral_component(u, p, None)
    }

    fn walsh_ult(&self, u: VarSubset, p: u32, base: u32) -> Result<f64> {
        self.spectral_ult(u, p, Some(base))
    }

    fn walsh_component(&self, u: VarSubset, p: u32, base: u32) -> Result<f64> {
        self.spectral_component(u, p, Some(base))
    }

    fn fourier_weighted(&self, p: u32, cutoff: u32) -> Result<f64> {
        Ok(self.factors.iter().map(|f| f.fourier_weighted(p, cutoff)).product())
    }

    fn walsh_weighted(&self, p: u32, base: u32, level: u32) -> Result<f64> {
        self.factors
            .iter()
            .try_fold(1.0, |acc, f| Ok(acc * f.walsh_weighted(p, base, level)?))
    }
}

impl ProductFunction {
    fn spectral_ult(&self, u: VarSubset, p: u32, base: Option<u32>) -> Result<f64> {
        self.check(u)?;
        if u.is_empty() {
            return Ok(0.0);
        }
        let (inside, outside) = self.spectral_parts(p, base)?;
        Ok(self.split_product(u, &inside, &outside) - self.mean().powi(p as i32))
    }
}

/// Closed forms for the indicator of `Π_j [0, eps_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RectangleOracle {
    eps: Vec<f64>,
}

impl RectangleOracle {
    pub fn new(eps: &[f64]) -> Result<Self> {
        ProductFunction::rectangle(eps)?;
        Ok(RectangleOracle { eps: eps.to_vec() })
    }

    fn volume(&self) -> f64 {
        self.eps.iter().product()
    }

    /// `ul-tau_u^(p) = eps^p (Π_{j ∈ u} eps_j^{-(p-1)} - 1)`.
    pub fn moment_ult(&self, u: VarSubset, p: u32) -> f64 {
        let inner: f64 = u.positions().map(|j| self.eps[j].powi(1 - p as i32)).product();
        self.volume().powi(p as i32) * (inner - 1.0)
    }

    /// `sigma_u^(p) = eps^p Π_{j ∈ u} (eps_j^{-(p-1)} - 1)`.
    pub fn moment_component(&self, u: VarSubset, p: u32) -> f64 {
        if u.is_empty() {
            return 0.0;
        }
        let inner: f64 = u
            .positions()
            .map(|j| self.eps[j].powi(1 - p as i32) - 1.0)
            .product();
        self.volume().powi(p as i32) * inner
    }

    /// `Q_p(eps_j) = eps_j^p + T_p(eps_j)`; `(2/3) eps_j^3` for `p = 4` and
    /// `eps_j <= 1/2`, the certified series otherwise.
    pub fn fourier_factor(&self, j: usize, p: u32) -> Result<f64> {
        let e = self.eps[j];
        if p == 4 && e <= 0.5 {
            return Ok(2.0 / 3.0 * e.powi(3));
        }
        Ok(e.powi(p as i32) + fourier_indicator_series(e, p)?.value)
    }

    pub fn fourier_ult(&self, u: VarSubset, p: u32) -> Result<f64> {
        if u.is_empty() {
            return Ok(0.0);
        }
        let mut prod = 1.0;
        for j in 0..self.eps.len() {
            prod *= if u.contains(j) {
                self.fourier_factor(j, p)?
            } else {
                self.eps[j].powi(p as i32)
            };
        }
        Ok(prod - self.volume().powi(p as i32))
    }

    /// `sigma_u^[p] = eps^p Π_{j ∈ u} (Q_p(eps_j) / eps_j^p - 1)`.
    pub fn fourier_component(&self, u: VarSubset, p: u32) -> Result<f64> {
        if u.is_empty() {
            return Ok(0.0);
        }
        let mut prod = self.volume().powi(p as i32);
        for j in u.positions() {
            prod *= self.fourier_factor(j, p)? / self.eps[j].powi(p as i32) - 1.0;
        }
        Ok(prod)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::enumerate_subsets;
    use crate::model::SubsetFilter;

    fn s(d: usize, idx: &[usize]) -> VarSubset {
        VarSubset::from_indices(d, idx).unwrap()
    }

    #[test]
    fn rectangle_examples() {
        let r = RectangleOracle::new(&[0.1, 0.2]).unwrap();
        let u = s(2, &[1]);
        assert!((r.moment_ult(u, 3) - 7.92e-4).abs() < 1e-15);
        assert!((r.moment_ult(u, 2) + 0.02f64.powi(2) - 0.004).abs() < 1e-15);
        let comp = r.fourier_component(u, 4).unwrap();
        assert!((comp - 0.02f64.powi(4) * (2.0 / 3.0 / 0.1 - 1.0)).abs() < 1e-18);
        assert!((comp - 9.0667e-7).abs() < 1e-10);
        // the closed index for {1} equals its only component
        let ult = r.fourier_ult(u, 4).unwrap();
        assert!((ult - comp).abs() < 1e-18);
        assert!((ult + 0.02f64.powi(4) - 2.0 / 3.0 * 1e-3 * 0.2f64.powi(4)).abs() < 1e-18);
    }

    #[test]
    fn rectangle_closed_forms_match_product_oracle() {
        let eps = [0.1, 0.2, 0.3];
        let r = RectangleOracle::new(&eps).unwrap();
        let f = ProductFunction::rectangle(&eps).unwrap();
        for u in enumerate_subsets(3, SubsetFilter::All).unwrap() {
            for p in 2..=4 {
                let a = r.moment_ult(u, p);
                let b = f.moment_ult(u, p).unwrap();
                assert!((a - b).abs() < 1e-15, "{u} p={p}");
                let c = r.moment_component(u, p);
                let d = f.moment_component(u, p).unwrap();
                assert!((c - d).abs() < 1e-15);
            }
            let a = r.fourier_ult(u, 4).unwrap();
            let b = f.fourier_ult(u, 4).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_components_agree_with_raw_moments() {
        let f = ProductFunction::new(vec![
            Factor::Linear { mu: 1.0, tau: 0.4 },
            Factor::GFunction { a: 0.5 },
            Factor::Cosine { mu: 0.8, tau: 0.3 },
            Factor::Indicator { eps: 0.35, offset: 0.2 },
        ])
        .unwrap();
        for u in enumerate_subsets(4, SubsetFilter::All).unwrap() {
            for p in 2..=4 {
                let a = f.moment_component_closed(u, p).unwrap();
                let b = f.moment_component(u, p).unwrap();
                assert!((a - b).abs() < 1e-12, "{u} p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn linear_skewness_component() {
        let tau = 0.3;
        let f = ProductFunction::new(vec![Factor::Linear { mu: 1.0, tau }]).unwrap();
        let v = f.moment_component(s(1, &[1]), 3).unwrap();
        assert!((v - 3.0 * tau * tau).abs() < 1e-14);
    }

    #[test]
    fn zero_mean_outside_kills_product() {
        let f = ProductFunction::new(vec![
            Factor::Linear { mu: 1.0, tau: 0.5 },
            Factor::Cosine { mu: 0.0, tau: 1.0 },
        ])
        .unwrap();
        let u = s(2, &[1]);
        for p in 2..=4 {
            let ult = f.moment_ult(u, p).unwrap();
            assert!((ult + f.mean().powi(p as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn variance_equals_full_index() {
        let f = ProductFunction::g_function(&[0.0, 1.0, 9.0]).unwrap();
        let full = VarSubset::full(3);
        assert!((f.moment_ult(full, 2).unwrap() - f.variance()).abs() < 1e-14);
        assert!((f.fourier_ult(full, 2).unwrap() - f.variance()).abs() < 1e-12);
    }
}
