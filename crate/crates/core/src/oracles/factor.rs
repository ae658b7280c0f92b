//! One-dimensional factors of product and additive test functions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::special::{hurwitz_zeta, integrate_unit, riemann_zeta};
use crate::error::{Error, Result};
use crate::model::MomentDescriptor;
use crate::walsh::WalshSpectrum;

/// A factor `h : [0,1) -> R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor {
    /// `mu + tau · sqrt(12) (x - 1/2)`.
    Linear { mu: f64, tau: f64 },
    /// `mu + tau · sqrt(2) cos(2π x)`.
    Cosine { mu: f64, tau: f64 },
    /// Indicator of `[offset, offset + eps)` taken modulo one.
    Indicator { eps: f64, offset: f64 },
    /// `(|4x - 2| + a) / (1 + a)`.
    GFunction { a: f64 },
    /// Piecewise constant on equal cells.
    Table { values: Vec<f64> },
}

impl Factor {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Factor::Linear { mu, tau } | Factor::Cosine { mu, tau } => {
                mu.is_finite() && tau.is_finite()
            }
            Factor::Indicator { eps, offset } => {
                *eps > 0.0 && *eps < 1.0 && (0.0..1.0).contains(offset)
            }
            Factor::GFunction { a } => a.is_finite() && *a >= 0.0,
            Factor::Table { values } => !values.is_empty() && values.iter().all(|v| v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid factor parameters: {self:?}")))
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Factor::Linear { mu, tau } => mu + tau * 12f64.sqrt() * (x - 0.5),
            Factor::Cosine { mu, tau } => mu + tau * 2f64.sqrt() * (2.0 * PI * x).cos(),
            Factor::Indicator { eps, offset } => {
                let t = x - offset;
                let t = if t < 0.0 { t + 1.0 } else { t };
                if t < *eps {
                    1.0
                } else {
                    0.0
                }
            }
            Factor::GFunction { a } => ((4.0 * x - 2.0).abs() + a) / (1.0 + a),
            Factor::Table { values } => {
                let m = values.len();
                values[((x * m as f64) as usize).min(m - 1)]
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Factor::Indicator { eps, offset } => vec![*offset, (offset + eps).rem_euclid(1.0)],
            Factor::GFunction { .. } => vec![0.5],
            Factor::Table { values } => {
                let m = values.len();
                (1..m).map(|i| i as f64 / m as f64).collect()
            }
            _ => Vec::new(),
        }
    }

    /// `∫_0^1 h(x)^p dx`, exact for indicators and tables and by
    /// piecewise Gauss–Legendre otherwise.
    pub fn raw_moment(&self, p: u32) -> f64 {
        match self {
            Factor::Indicator { eps, .. } => {
                if p == 0 {
                    1.0
                } else {
                    *eps
                }
            }
            Factor::Table { values } => {
                values.iter().map(|v| v.powi(p as i32)).sum::<f64>() / values.len() as f64
            }
            Factor::Linear { mu, .. } | Factor::Cosine { mu, .. } => {
                let mut binom = 1.0;
                let mut sum = 0.0;
                for k in 0..=p {
                    sum += binom * mu.powi((p - k) as i32) * self.central_moment(k);
                    binom = binom * (p - k) as f64 / (k + 1) as f64;
                }
                sum
            }
            _ => integrate_unit(|x| self.eval(x).powi(p as i32), &self.breakpoints(), 4),
        }
    }

    /// `∫_0^1 (h(x) - mu)^p dx`.
    pub fn central_moment(&self, p: u32) -> f64 {
        let mu = self.mean();
        match self {
            Factor::Indicator { eps, .. } => {
                eps * (1.0 - mu).powi(p as i32) + (1.0 - eps) * (-mu).powi(p as i32)
            }
            Factor::Table { values } => {
                values.iter().map(|v| (v - mu).powi(p as i32)).sum::<f64>() / values.len() as f64
            }
            _ if p == 0 => 1.0,
            Factor::Linear { tau, .. } if p % 2 == 0 => {
                (tau * 3f64.sqrt()).powi(p as i32) / (p + 1) as f64
            }
            // E[cos^p] = C(p, p/2) / 2^p
            Factor::Cosine { tau, .. } if p % 2 == 0 => {
                let half = p / 2;
                let central: f64 = (1..=half).map(|i| (half + i) as f64 / i as f64).product();
                (tau * 2f64.sqrt()).powi(p as i32) * central / 2f64.powi(p as i32)
            }
            Factor::Linear { .. } | Factor::Cosine { .. } => 0.0,
            _ => integrate_unit(|x| (self.eval(x) - mu).powi(p as i32), &self.breakpoints(), 4),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Factor::Linear { mu, .. } | Factor::Cosine { mu, .. } => *mu,
            Factor::GFunction { .. } => 1.0,
            _ => self.raw_moment(1),
        }
    }

    /// `mu`, `tau^2` and the standardized third and fourth central moments.
    pub fn descriptor(&self) -> MomentDescriptor {
        let mu = self.mean();
        let tau2 = self.central_moment(2);
        let (gamma, kappa) = if tau2 > 0.0 {
            (
                self.central_moment(3) / tau2.powf(1.5),
                self.central_moment(4) / (tau2 * tau2),
            )
        } else {
            (0.0, 0.0)
        };
        MomentDescriptor {
            mu,
            tau2,
            gamma,
            kappa,
        }
    }

    /// `Σ_k |h^(k)|^p` over Fourier frequencies, for even `p >= 2`.
    pub fn fourier_power_sum(&self, p: u32) -> Result<f64> {
        if p < 2 || p % 2 == 1 {
            return Err(Error::Unsupported(format!(
                "closed-form Fourier power sums need even p, got {p}"
            )));
        }
        let pf = p as f64;
        Ok(match self {
            Factor::Linear { mu, tau } => {
                mu.abs().powf(pf) + 2.0 * (tau.abs() * 12f64.sqrt() / (2.0 * PI)).powf(pf) * riemann_zeta(pf)?
            }
            Factor::Cosine { mu, tau } => mu.abs().powf(pf) + 2.0 * (tau.abs() / 2f64.sqrt()).powf(pf),
            Factor::Indicator { eps, .. } => eps.powf(pf) + fourier_indicator_tail(*eps, p)?,
            Factor::GFunction { a } => {
                1.0 + 2.0
                    * (4.0 / (PI * PI * (1.0 + a))).powf(pf)
                    * (1.0 - 2f64.powf(-2.0 * pf))
                    * riemann_zeta(2.0 * pf)?
            }
            Factor::Table { values } => table_fourier_power_sum(values, p)?,
        })
    }

    /// `Σ_k |h^(k)|^p` over Walsh frequencies in base `b`, for even `p`.
    pub fn walsh_power_sum(&self, p: u32, base: u32) -> Result<f64> {
        if p < 2 || p % 2 == 1 {
            return Err(Error::Unsupported(format!(
                "closed-form Walsh power sums need even p, got {p}"
            )));
        }
        let pf = p as f64;
        match self {
            Factor::Table { values } => {
                let s = WalshSpectrum::from_grid(base, &[values.len()], values)?;
                Ok(s.sigma_p(p as usize).re)
            }
            Factor::Indicator { eps, offset } => {
                if *offset != 0.0 {
                    return Err(Error::Unsupported(
                        "Walsh measures depend on the indicator offset; only offset 0 is supported"
                            .into(),
                    ));
                }
                let cells = grid_cells_for(*eps, base).ok_or_else(|| {
                    Error::Unsupported(format!(
                        "indicator width {eps} is not a multiple of a power of 1/{base}"
                    ))
                })?;
                let values: Vec<f64> = (0..cells.1)
                    .map(|i| if i < cells.0 { 1.0 } else { 0.0 })
                    .collect();
                let s = WalshSpectrum::from_grid(base, &[cells.1], &values)?;
                Ok(s.sigma_p(p as usize).re)
            }
            Factor::Linear { mu, tau } if base == 2 => {
                // x = 1/2 - Σ_{m >= 1} 2^{-m-1} wal_{2^{m-1}}(x)
                let c = tau.abs() * 12f64.sqrt();
                Ok(mu.abs().powf(pf) + c.powf(pf) * 2f64.powf(-2.0 * pf) / (1.0 - 2f64.powf(-pf)))
            }
            _ => Err(Error::Unsupported(format!(
                "no exact Walsh spectrum for {self:?} in base {base}"
            ))),
        }
    }
}

impl Factor {
    /// `|h^(k)|` at the integer frequency `k`.
    pub fn fourier_modulus(&self, k: i64) -> f64 {
        let kf = k.unsigned_abs() as f64;
        match self {
            _ if k == 0 => self.mean().abs(),
            Factor::Linear { tau, .. } => tau.abs() * 12f64.sqrt() / (2.0 * PI * kf),
            Factor::Cosine { tau, .. } => {
                if kf == 1.0 {
                    tau.abs() / 2f64.sqrt()
                } else {
                    0.0
                }
            }
            Factor::Indicator { eps, .. } => ((PI * kf * eps).sin() / (PI * kf)).abs(),
            Factor::GFunction { a } => {
                if k % 2 == 0 {
                    0.0
                } else {
                    4.0 / (PI * PI * kf * kf * (1.0 + a))
                }
            }
            Factor::Table { values } => {
                let m = values.len() as i64;
                let r = k.rem_euclid(m) as usize;
                if r == 0 {
                    return 0.0;
                }
                dft_at(values, r) * 2.0 * (PI * r as f64 / m as f64).sin().abs() / (2.0 * PI * kf)
            }
        }
    }

    /// `Σ_{|k| <= N} |h^(k)|^{p-1}`.
    pub fn fourier_weighted(&self, p: u32, cutoff: u32) -> f64 {
        (-(cutoff as i64)..=cutoff as i64)
            .map(|k| self.fourier_modulus(k).powi(p as i32 - 1))
            .sum()
    }

    /// `Σ_{k < b^m} |h^(k)|^{p-1}` over Walsh frequencies.
    pub fn walsh_weighted(&self, p: u32, base: u32, level: u32) -> Result<f64> {
        match self {
            Factor::Table { values } => {
                WalshSpectrum::from_grid(base, &[values.len()], values)?.weighted(p as usize, level, &[0])
            }
            Factor::Indicator { eps, offset } if *offset == 0.0 => {
                let (k, cells) = grid_cells_for(*eps, base).ok_or_else(|| {
                    Error::Unsupported(format!(
                        "indicator width {eps} is not a multiple of a power of 1/{base}"
                    ))
                })?;
                let values: Vec<f64> = (0..cells).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
                WalshSpectrum::from_grid(base, &[cells], &values)?.weighted(p as usize, level, &[0])
            }
            Factor::Linear { mu, tau } if base == 2 => {
                let c = tau.abs() * 12f64.sqrt();
                let q = p as i32 - 1;
                Ok(mu.abs().powi(q) + (1..=level as i32).map(|m| (c * 2f64.powi(-m - 1)).powi(q)).sum::<f64>())
            }
            _ => Err(Error::Unsupported(format!(
                "no exact Walsh spectrum for {self:?} in base {base}"
            ))),
        }
    }
}

/// `(k, b^m)` with `eps = k / b^m`, for `b^m <= 4096`.
fn grid_cells_for(eps: f64, base: u32) -> Option<(usize, usize)> {
    let mut cells = base as usize;
    while cells <= 4096 {
        let k = (eps * cells as f64).round();
        if (k / cells as f64 - eps).abs() < 1e-14 {
            return Some((k as usize, cells));
        }
        cells *= base as usize;
    }
    None
}

/// Largest cutoff used by the truncated series.
const SERIES_CAP: u64 = 50_000_000;

/// `T_p(eps) = 2 Σ_{k >= 1} (sin(π k eps) / (π k))^p` for even `p`, the
/// nonzero-frequency part of `Σ_k |h^(k)|^p` for an interval of width `eps`.
///
/// `p = 2` is closed by Parseval (`eps - eps^2`). For `p >= 4` the series is
/// truncated at the first `K` where the tail bound `2 ζ(p, K+1) / π^p`
/// drops below `1e-12`; the returned [`SeriesValue`] reports `K` and the
/// bound.
pub fn fourier_indicator_series(eps: f64, p: u32) -> Result<SeriesValue> {
    if p < 2 || p % 2 == 1 {
        return Err(Error::Unsupported(format!("T_p needs even p, got {p}")));
    }
    if p == 2 {
        return Ok(SeriesValue {
            value: eps - eps * eps,
            terms: 0,
            tail_bound: 0.0,
        });
    }
    let pf = p as f64;
    let bound = |k: u64| -> Result<f64> { Ok(2.0 * hurwitz_zeta(pf, k as f64 + 1.0)? / PI.powf(pf)) };
    let mut cutoff = 1u64;
    while bound(cutoff)? >= 1e-12 {
        cutoff *= 2;
        if cutoff > SERIES_CAP {
            return Err(Error::TooLarge {
                dim: p as usize,
                reason: "series truncation exceeds the term budget".into(),
            });
        }
    }
    // bisect down to the smallest admissible cutoff
    let (mut lo, mut hi) = (cutoff / 2, cutoff);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if bound(mid)? < 1e-12 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(SeriesValue {
        value: truncated_indicator_series(eps, p, hi),
        terms: hi,
        tail_bound: bound(hi)?,
    })
}

/// Partial sum `2 Σ_{k=1}^{K} (sin(π k eps) / (π k))^p`.
pub fn truncated_indicator_series(eps: f64, p: u32, cutoff: u64) -> f64 {
    let mut acc = crate::exec::CompensatedSum::default();
    for k in (1..=cutoff).rev() {
        let kf = k as f64;
        acc.add(((PI * kf * eps).sin() / (PI * kf)).powi(p as i32));
    }
    2.0 * acc.value()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: u64,
    pub tail_bound: f64,
}

fn fourier_indicator_tail(eps: f64, p: u32) -> Result<f64> {
    if p == 4 && eps <= 0.5 {
        return Ok(2.0 / 3.0 * eps.powi(3) - eps.powi(4));
    }
    Ok(fourier_indicator_series(eps, p)?.value)
}

/// `Σ_k |h^(k)|^p` for a step function on `M` equal cells.
///
/// With `V(r) = Σ_i v_i e^{-2πi r i / M}`, `h^(0) = V(0)/M` and
/// `h^(k) = V(k mod M) (1 - e^{-2πi k/M}) / (2πi k)` otherwise. Grouping
/// `k` by residue leaves lattice sums `Σ_{k ≡ r} |k|^{-p}` that are
/// Hurwitz zeta values.
pub(crate) fn table_fourier_power_sum(values: &[f64], p: u32) -> Result<f64> {
    let m = values.len();
    let pf = p as f64;
    let mut total = (values.iter().sum::<f64>() / m as f64).abs().powf(pf);
    for r in 1..m {
        let dft = dft_at(values, r);
        total += dft.powf(pf) * residue_weight(m, r, pf)?;
    }
    Ok(total)
}

/// `|V(r)|`.
pub(crate) fn dft_at(values: &[f64], r: usize) -> f64 {
    let m = values.len();
    let (mut re, mut im) = (0.0, 0.0);
    for (i, &v) in values.iter().enumerate() {
        let angle = -2.0 * PI * ((r * i) % m) as f64 / m as f64;
        re += v * angle.cos();
        im += v * angle.sin();
    }
    re.hypot(im)
}

/// `Σ_{k ≡ r (mod M)} |1 - e^{-2πi k/M}|^p / |2π k|^p` for `0 < r < M`.
pub(crate) fn residue_weight(m: usize, r: usize, p: f64) -> Result<f64> {
    let chord = 2.0 * (PI * r as f64 / m as f64).sin().abs();
    let a = r as f64 / m as f64;
    let lattice = (hurwitz_zeta(p, a)? + hurwitz_zeta(p, 1.0 - a)?) / (m as f64).powf(p);
    Ok((chord / (2.0 * PI)).powf(p) * lattice)
}
