//! Additive functions `f(x) = Σ_j h_j(x_j)`.
//!
//! Writing `f = mu + Σ_j g_j` with centered `g_j`, the moment index has
//! `ul-tau_u^(p) + mu^p = ∫ (mu + Σ_{j ∈ u} g_j)^p`, which depends only on
//! the central moments of the `g_j`. Spectral indices see no interactions:
//! their components vanish off singletons.

use serde::{Deserialize, Serialize};

use super::factor::Factor;
use super::IndexOracle;
use crate::error::{Error, Result};
use crate::model::{BlackBox, VarSubset};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditiveFunction {
    terms: Vec<Factor>,
}

/// `∫ g_j^2`, `∫ g_j^3`, `∫ g_j^4` for a centered term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenteredMoments {
    pub tau2: f64,
    pub gamma: f64,
    pub kappa: f64,
}

impl AdditiveFunction {
    pub fn new(terms: Vec<Factor>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("an additive function needs at least one term"));
        }
        for t in &terms {
            t.validate()?;
        }
        Ok(AdditiveFunction { terms })
    }

    pub fn terms(&self) -> &[Factor] {
        &self.terms
    }

    pub fn mean(&self) -> f64 {
        self.terms.iter().map(Factor::mean).sum()
    }

    pub fn centered_moments(&self) -> Vec<CenteredMoments> {
        self.terms
            .iter()
            .map(|t| CenteredMoments {
                tau2: t.central_moment(2),
                gamma: t.central_moment(3),
                kappa: t.central_moment(4),
            })
            .collect()
    }

    fn check(&self, u: VarSubset) -> Result<()> {
        if u.dim() != self.terms.len() {
            return Err(Error::DimensionMismatch {
                expected: self.terms.len(),
                got: u.dim(),
            });
        }
        Ok(())
    }

    /// `∫ (mu + Σ_{j ∈ u} g_j)^p` by convolving central-moment sequences.
    fn power_mean(&self, u: VarSubset, p: u32) -> f64 {
        let p = p as usize;
        // moments[k] = E[S^k] for the partial sum S, starting from S = mu
        let mu = self.mean();
        let mut moments: Vec<f64> = (0..=p).map(|k| mu.powi(k as i32)).collect();
        for j in u.positions() {
            let term: Vec<f64> = (0..=p)
                .map(|k| if k == 0 { 1.0 } else { self.terms[j].central_moment(k as u32) })
                .collect();
            moments = (0..=p)
                .map(|k| {
                    (0..=k)
                        .map(|i| binomial(k, i) * moments[i] * term[k - i])
                        .sum()
                })
                .collect();
        }
        moments[p]
    }

    /// Closed-form `ul-tau_u^(3) = Σ_{j ∈ u} (3 mu tau_j^2 + gamma_j)`.
    pub fn moment_ult_p3(&self, u: VarSubset) -> f64 {
        let mu = self.mean();
        let m = self.centered_moments();
        u.positions().map(|j| 3.0 * mu * m[j].tau2 + m[j].gamma).sum()
    }

    /// Closed-form `ul-tau_u^(4) = Σ_{j ∈ u} (6 mu^2 tau_j^2 + 4 mu gamma_j + kappa_j)
    /// + 6 Σ_{j < k ∈ u} tau_j^2 tau_k^2`.
    pub fn moment_ult_p4(&self, u: VarSubset) -> f64 {
        let mu = self.mean();
        let m = self.centered_moments();
        let singles: f64 = u
            .positions()
            .map(|j| 6.0 * mu * mu * m[j].tau2 + 4.0 * mu * m[j].gamma + m[j].kappa)
            .sum();
        let pos: Vec<usize> = u.positions().collect();
        let mut pairs = 0.0;
        for (a, &j) in pos.iter().enumerate() {
            for &k in &pos[a + 1..] {
                pairs += m[j].tau2 * m[k].tau2;
            }
        }
        singles + 6.0 * pairs
    }

    /// Closed-form moment components for `p` in `{3, 4}`: singletons
    /// `3 mu tau^2 + gamma` and `6 mu^2 tau^2 + 4 mu gamma + kappa`, pairs
    /// `6 tau_j^2 tau_k^2` at `p = 4`, zero otherwise.
    pub fn moment_component_closed(&self, u: VarSubset, p: u32) -> Result<f64> {
        self.check(u)?;
        let mu = self.mean();
        let m = self.centered_moments();
        let pos: Vec<usize> = u.positions().collect();
        Ok(match (p, pos.as_slice()) {
            (3, [j]) => 3.0 * mu * m[*j].tau2 + m[*j].gamma,
            (4, [j]) => 6.0 * mu * mu * m[*j].tau2 + 4.0 * mu * m[*j].gamma + m[*j].kappa,
            (4, [j, k]) => 6.0 * m[*j].tau2 * m[*k].tau2,
            (3 | 4, _) => 0.0,
            _ => {
                return Err(Error::Unsupported(format!(
                    "closed-form additive components cover p = 3, 4, got {p}"
                )))
            }
        })
    }

    fn spectral_single(&self, j: usize, p: u32, base: Option<u32>) -> Result<f64> {
        let t = &self.terms[j];
        let total = match base {
            None => t.fourier_power_sum(p)?,
            Some(b) => t.walsh_power_sum(p, b)?,
        };
        Ok(total - t.mean().abs().powi(p as i32))
    }

    fn spectral_component(&self, u: VarSubset, p: u32, base: Option<u32>) -> Result<f64> {
        self.check(u)?;
        if p % 2 == 1 {
            return Err(Error::Unsupported(format!(
                "additive spectral oracle covers even p, got {p}"
            )));
        }
        let pos: Vec<usize> = u.positions().collect();
        match pos.as_slice() {
            [j] => self.spectral_single(*j, p, base),
            _ => Ok(0.0),
        }
    }

    fn spectral_ult(&self, u: VarSubset, p: u32, base: Option<u32>) -> Result<f64> {
        self.check(u)?;
        if p % 2 == 1 {
            return Err(Error::Unsupported(format!(
                "additive spectral oracle covers even p, got {p}"
            )));
        }
        u.positions().map(|j| self.spectral_single(j, p, base)).sum()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl BlackBox for AdditiveFunction {
    fn dim(&self) -> usize {
        self.terms.len()
    }
    fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.terms.len() {
            return Err(Error::DimensionMismatch {
                expected: self.terms.len(),
                got: x.len(),
            });
        }
        Ok(self.terms.iter().zip(x).map(|(t, &xj)| t.eval(xj)).sum())
    }
}

impl IndexOracle for AdditiveFunction {
    fn dim(&self) -> usize {
        self.terms.len()
    }

    fn moment_ult(&self, u: VarSubset, p: u32) -> Result<f64> {
        self.check(u)?;
        if u.is_empty() {
            return Ok(0.0);
        }
        Ok(self.power_mean(u, p) - self.mean().powi(p as i32))
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
        let q = p as i32 - 1;
        let mut total = self.mean().abs().powi(q);
        for t in &self.terms {
            total += t.fourier_weighted(p, cutoff) - t.mean().abs().powi(q);
        }
        Ok(total)
    }
}
