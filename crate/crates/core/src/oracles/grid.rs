//! Piecewise-constant functions on a tensor grid, with exhaustive oracles.
//!
//! Every integral over such a function is a finite weighted sum over
//! cells, so conditional means, ANOVA terms and pick-freeze integrals can
//! be computed exactly by enumeration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::factor::{dft_at, residue_weight};
use super::IndexOracle;
use crate::error::{Error, Result};
use crate::model::{BlackBox, VarSubset};
use crate::walsh::WalshSpectrum;

pub const GRID_MAX_DIM: usize = 3;
pub const GRID_MAX_CELLS: usize = 4096;

/// Values on `levels[0] × ... × levels[d-1]` equal cells, row-major with
/// the last axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    levels: Vec<usize>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(levels: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || levels.len() > GRID_MAX_DIM {
            return Err(Error::TooLarge {
                dim: levels.len(),
                reason: format!("grid functions support 1..={GRID_MAX_DIM} axes"),
            });
        }
        if levels.contains(&0) {
            return Err(Error::invalid("grid levels must be positive"));
        }
        let total = levels.iter().try_fold(1usize, |acc, &m| acc.checked_mul(m));
        match total {
            Some(t) if t <= GRID_MAX_CELLS => {
                if values.len() != t {
                    return Err(Error::DimensionMismatch {
                        expected: t,
                        got: values.len(),
                    });
                }
            }
            _ => {
                return Err(Error::TooLarge {
                    dim: levels.len(),
                    reason: format!("grids are limited to {GRID_MAX_CELLS} cells"),
                })
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("grid value {v} is not finite")));
        }
        Ok(GridFunction { levels, values })
    }

    /// Reads `{"levels": [...], "values": [...]}`.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let raw: GridFunction = serde_json::from_str(&text)?;
        Self::new(raw.levels, raw.values)
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    fn cell_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.levels).fold(0, |acc, (&i, &m)| acc * m + i)
    }

    fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.levels.len()];
        for (slot, &m) in idx.iter_mut().zip(&self.levels).rev() {
            *slot = flat % m;
            flat /= m;
        }
        idx
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.cells() as f64
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / self.cells() as f64
    }

    fn check(&self, u: VarSubset) -> Result<()> {
        if u.dim() != self.levels.len() {
            return Err(Error::DimensionMismatch {
                expected: self.levels.len(),
                got: u.dim(),
            });
        }
        Ok(())
    }

    /// `ul-f_u` (the average over the complement) stored on the full grid.
    pub fn conditional_mean(&self, u: VarSubset) -> Vec<f64> {
        let d = self.levels.len();
        let mut sums = vec![0.0; self.cells()];
        let mut counts = vec![0usize; self.cells()];
        let key = |idx: &[usize]| {
            let masked: Vec<usize> = (0..d).map(|j| if u.contains(j) { idx[j] } else { 0 }).collect();
            self.cell_index(&masked)
        };
        for flat in 0..self.cells() {
            let k = key(&self.multi_index(flat));
            sums[k] += self.values[flat];
            counts[k] += 1;
        }
        (0..self.cells())
            .map(|flat| {
                let k = key(&self.multi_index(flat));
                sums[k] / counts[k] as f64
            })
            .collect()
    }

    /// `ul-tau_u^(p) = E[ul-f_u^p] - mu^p`, averaging over the full grid.
    pub fn moment_ult_conditional(&self, u: VarSubset, p: u32) -> Result<f64> {
        self.check(u)?;
        if u.is_empty() {
            return Ok(0.0);
        }
        let cond = self.conditional_mean(u);
        let m: f64 = cond.iter().map(|v| v.powi(p as i32)).sum::<f64>() / self.cells() as f64;
        Ok(m - self.mean().powi(p as i32))
    }

    /// The defining pick-freeze integral
    /// `∫ Π_{k=1}^p f(x_u : z^(k)_{-u}) - mu^p`, enumerated over every
    /// combination of the shared cell and the `p` complement cells.
    pub fn moment_ult_pickfreeze(&self, u: VarSubset, p: u32) -> Result<f64> {
        self.check(u)?;
        if u.is_empty() {
            return Ok(0.0);
        }
        let d = self.levels.len();
        let inside: Vec<usize> = u.positions().collect();
        let outside: Vec<usize> = u.complement().positions().collect();
        let n_in: usize = inside.iter().map(|&j| self.levels[j]).product();
        let n_out: usize = outside.iter().map(|&j| self.levels[j]).product();
        let p = p as usize;
        let decode = |mut v: usize, axes: &[usize], idx: &mut [usize]| {
            for &j in axes.iter().rev() {
                idx[j] = v % self.levels[j];
                v /= self.levels[j];
            }
        };
        let mut total = 0.0;
        let mut idx = vec![0; d];
        let mut counter = vec![0usize; p];
        for a in 0..n_in {
            decode(a, &inside, &mut idx);
            counter.iter_mut().for_each(|c| *c = 0);
            loop {
                let mut prod = 1.0;
                for &c in &counter {
                    decode(c, &outside, &mut idx);
                    prod *= self.values[self.cell_index(&idx)];
                }
                total += prod;
                // odometer over the p complement cells
                let mut k = 0;
                while k < p {
                    counter[k] += 1;
                    if counter[k] < n_out {
                        break;
                    }
                    counter[k] = 0;
                    k += 1;
                }
                if k == p {
                    break;
                }
            }
        }
        let weight = n_in as f64 * (n_out as f64).powi(p as i32);
        Ok(total / weight - self.mean().powi(p as i32))
    }

    /// The ANOVA term `f_u` on the full grid.
    pub fn anova_term(&self, u: VarSubset) -> Vec<f64> {
        let mut out = vec![0.0; self.cells()];
        for v in u.subsets() {
            let sign = if (u.len() - v.len()) % 2 == 1 { -1.0 } else { 1.0 };
            let cond = if v.is_empty() {
                vec![self.mean(); self.cells()]
            } else {
                self.conditional_mean(v)
            };
            for (o, c) in out.iter_mut().zip(&cond) {
                *o += sign * c;
            }
        }
        out
    }

    /// `sigma_u^2 = ∫ f_u^2` for nonempty `u`.
    pub fn anova_variance(&self, u: VarSubset) -> Result<f64> {
        self.check(u)?;
        if u.is_empty() {
            return Ok(0.0);
        }
        let term = self.anova_term(u);
        Ok(term.iter().map(|v| v * v).sum::<f64>() / self.cells() as f64)
    }

    /// `ol-tau_u^2 = ½ E[(f(x) - f(x_{-u} : z_u))^2]`, enumerated.
    pub fn total_effect(&self, u: VarSubset) -> Result<f64> {
        self.check(u)?;
        let mut acc = 0.0;
        let inside: Vec<usize> = u.positions().collect();
        let n_in: usize = inside.iter().map(|&j| self.levels[j]).product();
        for flat in 0..self.cells() {
            let mut idx = self.multi_index(flat);
            for b in 0..n_in {
                let mut v = b;
                for &j in inside.iter().rev() {
                    idx[j] = v % self.levels[j];
                    v /= self.levels[j];
                }
                acc += (self.values[flat] - self.values[self.cell_index(&idx)]).powi(2);
            }
        }
        Ok(0.5 * acc / (self.cells() * n_in) as f64)
    }

    /// Exact Walsh spectrum; every level must be a power of `base`.
    pub fn walsh_spectrum(&self, base: u32) -> Result<WalshSpectrum> {
        WalshSpectrum::from_grid(base, &self.levels, &self.values)
    }

    /// Exact `Σ_{supp k ⊆ u} |f^(k)|^p` over Fourier frequencies, for even
    /// `p`, by residue-class lattice sums (no truncation).
    pub fn fourier_sigma_p_within(&self, u: VarSubset, p: u32) -> Result<f64> {
        self.check(u)?;
        if p < 2 || p % 2 == 1 {
            return Err(Error::Unsupported(format!(
                "exact Fourier power sums of grid functions need even p, got {p}"
            )));
        }
        let d = self.levels.len();
        let pf = p as f64;
        let mut axis_weight: Vec<Vec<f64>> = Vec::with_capacity(d);
        for (j, &m) in self.levels.iter().enumerate() {
            let mut w = vec![(m as f64).powf(-pf)];
            for r in 1..m {
                w.push(if u.contains(j) { residue_weight(m, r, pf)? } else { 0.0 });
            }
            axis_weight.push(w);
        }
        let mut total = 0.0;
        for flat in 0..self.cells() {
            let r = self.multi_index(flat);
            let w: f64 = r.iter().enumerate().map(|(j, &rj)| axis_weight[j][rj]).product();
            if w == 0.0 {
                continue;
            }
            total += self.dft_modulus(&r).powf(pf) * w;
        }
        Ok(total)
    }

    /// `|f^(k)|` at an integer frequency vector.
    pub fn fourier_modulus(&self, k: &[i64]) -> f64 {
        let mut weight = 1.0;
        let mut r = Vec::with_capacity(k.len());
        for (&kj, &m) in k.iter().zip(&self.levels) {
            let rj = kj.rem_euclid(m as i64) as usize;
            if kj == 0 {
                weight /= m as f64;
            } else if rj == 0 {
                return 0.0;
            } else {
                let chord = 2.0 * (std::f64::consts::PI * rj as f64 / m as f64).sin().abs();
                weight *= chord / (2.0 * std::f64::consts::PI * kj.unsigned_abs() as f64);
            }
            r.push(rj);
        }
        self.dft_modulus(&r) * weight
    }

    /// `|Σ_i v_i e^{-2πi r·i/M}|` over the full grid.
    fn dft_modulus(&self, r: &[usize]) -> f64 {
        if self.levels.len() == 1 {
            return dft_at(&self.values, r[0]);
        }
        let (mut re, mut im) = (0.0, 0.0);
        for flat in 0..self.cells() {
            let idx = self.multi_index(flat);
            let phase: f64 = idx
                .iter()
                .zip(r)
                .zip(&self.levels)
                .map(|((&i, &rj), &m)| ((i * rj) % m) as f64 / m as f64)
                .sum();
            let angle = -2.0 * std::f64::consts::PI * phase;
            re += self.values[flat] * angle.cos();
            im += self.values[flat] * angle.sin();
        }
        re.hypot(im)
    }
}

impl BlackBox for GridFunction {
    fn dim(&self) -> usize {
        self.levels.len()
    }
    fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.levels.len() {
            return Err(Error::DimensionMismatch {
                expected: self.levels.len(),
                got: x.len(),
            });
        }
        let idx: Vec<usize> = x
            .iter()
            .zip(&self.levels)
            .map(|(&xj, &m)| ((xj * m as f64) as usize).min(m - 1))
            .collect();
        Ok(self.values[self.cell_index(&idx)])
    }
}

impl IndexOracle for GridFunction {
    fn dim(&self) -> usize {
        self.levels.len()
    }

    fn moment_ult(&self, u: VarSubset, p: u32) -> Result<f64> {
        self.moment_ult_conditional(u, p)
    }

    fn fourier_ult(&self, u: VarSubset, p: u32) -> Result<f64> {
        if u.is_empty() {
            return Ok(0.0);
        }
        Ok(self.fourier_sigma_p_within(u, p)? - self.mean().powi(p as i32))
    }

    fn walsh_ult(&self, u: VarSubset, p: u32, base: u32) -> Result<f64> {
        self.check(u)?;
        Ok(self.walsh_spectrum(base)?.ult(u, p as usize).re)
    }

    fn fourier_weighted(&self, p: u32, cutoff: u32) -> Result<f64> {
        let d = self.levels.len();
        let side = 2 * cutoff as usize + 1;
        let mut total = 0.0;
        for flat in 0..side.pow(d as u32) {
            let mut rest = flat;
            let k: Vec<i64> = (0..d)
                .map(|_| {
                    let v = (rest % side) as i64 - cutoff as i64;
                    rest /= side;
                    v
                })
                .collect();
            total += self.fourier_modulus(&k).powi(p as i32 - 1);
        }
        Ok(total)
    }

    fn walsh_weighted(&self, p: u32, base: u32, level: u32) -> Result<f64> {
        self.walsh_spectrum(base)?
            .weighted(p as usize, level, &vec![0; self.levels.len()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{enumerate_subsets, SubsetFilter};

    fn s(d: usize, idx: &[usize]) -> VarSubset {
        VarSubset::from_indices(d, idx).unwrap()
    }

    #[test]
    fn pure_interaction() {
        let g = GridFunction::new(vec![2, 2], vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        assert_eq!(g.moment_ult(s(2, &[1]), 2).unwrap(), 0.0);
        assert_eq!(g.moment_ult(s(2, &[1, 2]), 2).unwrap(), 1.0);
        assert_eq!(g.moment_ult_pickfreeze(s(2, &[1]), 2).unwrap(), 0.0);
        assert_eq!(g.anova_variance(s(2, &[1, 2])).unwrap(), 1.0);
    }

    #[test]
    fn constant_grid_has_no_importance() {
        let g = GridFunction::new(vec![3, 2], vec![2.5; 6]).unwrap();
        for u in enumerate_subsets(2, SubsetFilter::All).unwrap() {
            for p in 2..=4 {
                assert!(g.moment_ult(u, p).unwrap().abs() < 1e-14);
                assert!(g.moment_ult_pickfreeze(u, p).unwrap().abs() < 1e-13);
            }
            assert!(g.total_effect(u).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn total_effect_complements_closed_index() {
        let vals: Vec<f64> = (0..12).map(|i| ((i * 5 + 1) % 7) as f64).collect();
        let g = GridFunction::new(vec![3, 4], vals).unwrap();
        let u = s(2, &[1]);
        let lhs = g.moment_ult(u, 2).unwrap() + g.total_effect(u.complement()).unwrap();
        assert!((lhs - g.variance()).abs() < 1e-12);
    }

    #[test]
    fn fourier_parseval_on_grid() {
        let vals: Vec<f64> = (0..12).map(|i| ((i * 7 + 3) % 5) as f64 - 1.0).collect();
        let g = GridFunction::new(vec![4, 3], vals).unwrap();
        for u in enumerate_subsets(2, SubsetFilter::Nonempty).unwrap() {
            let f = g.fourier_ult(u, 2).unwrap();
            let m = g.moment_ult(u, 2).unwrap();
            assert!((f - m).abs() < 1e-12, "{u}: {f} vs {m}");
        }
    }

    #[test]
    fn eval_reads_cells() {
        let g = GridFunction::new(vec![2, 3], vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(g.eval(&[0.7, 0.5]).unwrap(), 4.0);
        assert_eq!(g.eval(&[0.2, 0.9]).unwrap(), 2.0);
    }

    #[test]
    fn oversized_grids_are_refused() {
        assert!(GridFunction::new(vec![100, 100], vec![0.0; 10_000]).is_err());
        assert!(GridFunction::new(vec![2; 4], vec![0.0; 16]).is_err());
    }
}
