//! Walsh-side spectral importance over base-`b` digit arithmetic.
//!
//! A point of `[0,1)` is identified with its first `t` base-`b` digits,
//! `t = ceil(52 / log2 b)`, obtained by truncation. Digitwise subtraction
//! and addition modulo `b` (no carries) make `[0,1)` a group on which the
//! Walsh functions
//!
//! ```text
//! wal_k(x) = exp(2πi/b · Σ_i x_{i+1} κ_i),   k = Σ_i κ_i b^i
//! ```
//!
//! are characters. The cyclic operator of [`crate::spectral`] carries over
//! with `⊖` in place of `-`, and yields
//! `Σ_k f^(k)^ceil(p/2) · f^(⊖k)^floor(p/2)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::model::{BlackBox, VarSubset};
use crate::spectral::{
    index_estimate, run_cyclic, zero_estimate, CyclicGroup, SpectralDesign, SpectralEstimate,
    SpectralVariant,
};

/// Largest supported base.
pub const MAX_BASE: u32 = 1 << 16;

/// Digit arithmetic in a fixed base.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DigitArith {
    base: u32,
    digits: u32,
    scale: u128,
}

impl DigitArith {
    pub fn new(base: u32) -> Result<Self> {
        if !(2..=MAX_BASE).contains(&base) {
            return Err(Error::invalid(format!(
                "Walsh base must lie in 2..={MAX_BASE}, got {base}"
            )));
        }
        let digits = (52.0 / (base as f64).log2()).ceil() as u32;
        Ok(DigitArith {
            base,
            digits,
            scale: (base as u128).pow(digits),
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Digits kept per coordinate.
    pub fn precision(&self) -> u32 {
        self.digits
    }

    /// `floor(x · b^t)`, computed exactly from the binary representation.
    pub fn to_int(&self, x: f64) -> u128 {
        if x <= 0.0 {
            return 0;
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let (mant, shift) = if exp == 0 {
            (bits & ((1 << 52) - 1), 1074)
        } else {
            ((bits & ((1 << 52) - 1)) | (1 << 52), 1075 - exp)
        };
        let prod = mant as u128 * self.scale;
        if shift <= 0 {
            return prod.min(self.scale - 1);
        }
        if shift >= 128 {
            return 0;
        }
        (prod >> shift).min(self.scale - 1)
    }

    pub fn from_int(&self, n: u128) -> f64 {
        n as f64 / self.scale as f64
    }

    fn digitwise(&self, a: u128, b: u128, op: impl Fn(u128, u128) -> u128) -> u128 {
        if self.base == 2 {
            // both ⊕ and ⊖ are XOR in base 2
            return a ^ b;
        }
        let base = self.base as u128;
        let (mut a, mut b) = (a, b);
        let mut out = 0u128;
        let mut place = 1u128;
        for _ in 0..self.digits {
            out += op(a % base, b % base) % base * place;
            a /= base;
            b /= base;
            place *= base;
        }
        out
    }

    pub fn sub_int(&self, a: u128, b: u128) -> u128 {
        let base = self.base as u128;
        self.digitwise(a, b, |x, y| x + base - y)
    }

    pub fn add_int(&self, a: u128, b: u128) -> u128 {
        self.digitwise(a, b, |x, y| x + y)
    }

    /// Digits `x_1, ..., x_t` of `x`, most significant first.
    pub fn digits_of(&self, x: f64) -> Vec<u32> {
        self.int_digits(self.to_int(x))
    }

    fn int_digits(&self, mut n: u128) -> Vec<u32> {
        let base = self.base as u128;
        let mut out = vec![0; self.digits as usize];
        for slot in out.iter_mut().rev() {
            *slot = (n % base) as u32;
            n /= base;
        }
        out
    }
}

impl CyclicGroup for DigitArith {
    fn add(&self, a: f64, b: f64) -> f64 {
        self.from_int(self.add_int(self.to_int(a), self.to_int(b)))
    }
    fn sub(&self, a: f64, b: f64) -> f64 {
        self.from_int(self.sub_int(self.to_int(a), self.to_int(b)))
    }
    fn neg(&self, a: f64) -> f64 {
        self.from_int(self.sub_int(0, self.to_int(a)))
    }
}

/// A point of `[0,1)^d` as truncated base-`b` digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitVector {
    arith: DigitArith,
    coords: Vec<u128>,
}

impl DigitVector {
    pub fn from_point(base: u32, x: &[f64]) -> Result<Self> {
        let arith = DigitArith::new(base)?;
        for (index, &v) in x.iter().enumerate() {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::OutOfDomain { index, value: v });
            }
        }
        Ok(DigitVector {
            arith,
            coords: x.iter().map(|&v| arith.to_int(v)).collect(),
        })
    }

    /// Builds a vector from leading digits, most significant first, one list
    /// per coordinate. Unlisted digits are zero.
    pub fn from_digits(base: u32, digits: &[Vec<u32>]) -> Result<Self> {
        let arith = DigitArith::new(base)?;
        let t = arith.precision() as usize;
        let mut coords = Vec::with_capacity(digits.len());
        for ds in digits {
            if ds.len() > t {
                return Err(Error::invalid(format!(
                    "{} digits exceed the base-{base} precision of {t}",
                    ds.len()
                )));
            }
            if let Some(&bad) = ds.iter().find(|&&v| v >= base) {
                return Err(Error::invalid(format!("digit {bad} is not below {base}")));
            }
            let lead = ds.iter().fold(0u128, |acc, &v| acc * base as u128 + v as u128);
            coords.push(lead * (base as u128).pow((t - ds.len()) as u32));
        }
        Ok(DigitVector { arith, coords })
    }

    pub fn to_point(&self) -> Vec<f64> {
        self.coords.iter().map(|&n| self.arith.from_int(n)).collect()
    }

    pub fn digits(&self, coord: usize) -> Vec<u32> {
        self.arith.int_digits(self.coords[coord])
    }

    fn zip_with(&self, other: &Self, op: impl Fn(u128, u128) -> u128) -> Result<Self> {
        if self.arith != other.arith || self.coords.len() != other.coords.len() {
            return Err(Error::invalid("digit vectors differ in base or dimension"));
        }
        Ok(DigitVector {
            arith: self.arith,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    /// `self ⊖ other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| self.arith.sub_int(a, b))
    }

    /// `self ⊕ other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| self.arith.add_int(a, b))
    }

    /// `⊖self`.
    pub fn neg(&self) -> Self {
        DigitVector {
            arith: self.arith,
            coords: self.coords.iter().map(|&a| self.arith.sub_int(0, a)).collect(),
        }
    }
}

/// Base-`b` digits of a nonnegative integer index, least significant first.
fn index_digits(base: u32, mut k: u64) -> Vec<u32> {
    let mut out = Vec::new();
    while k > 0 {
        out.push((k % base as u64) as u32);
        k /= base as u64;
    }
    out
}

/// The index `⊖k` (digitwise negation).
pub fn negate_index(base: u32, k: u64) -> u64 {
    index_digits(base, k)
        .iter()
        .rev()
        .fold(0, |acc, &d| acc * base as u64 + ((base - d) % base) as u64)
}

/// `wal_k(x)` in one coordinate.
pub fn walsh_1d(base: u32, k: u64, x: f64) -> Result<Complex64> {
    let arith = DigitArith::new(base)?;
    let kd = index_digits(base, k);
    if kd.len() > arith.precision() as usize {
        return Err(Error::invalid(format!(
            "Walsh index {k} exceeds the {} digits kept per coordinate",
            arith.precision()
        )));
    }
    let xd = arith.digits_of(x);
    let phase: u64 = kd
        .iter()
        .zip(&xd)
        .map(|(&kappa, &xi)| kappa as u64 * xi as u64)
        .sum::<u64>()
        % base as u64;
    Ok(Complex64::from_polar(
        1.0,
        2.0 * PI * phase as f64 / base as f64,
    ))
}

/// `wal_k(x) = Π_j wal_{k_j}(x_j)`.
pub fn walsh_function(base: u32, k: &[u64], x: &[f64]) -> Result<Complex64> {
    if k.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: k.len(),
            got: x.len(),
        });
    }
    k.iter()
        .zip(x)
        .try_fold(Complex64::new(1.0, 0.0), |acc, (&kj, &xj)| {
            Ok(acc * walsh_1d(base, kj, xj)?)
        })
}

/// Closed form of `Σ_{k_j < b^m} wal_k(x) = b^{md} · 1[x ∈ [0, b^{-m})^d]`.
pub fn walsh_dirichlet(base: u32, level: u32, x: &[f64]) -> f64 {
    let width = (base as f64).powi(level as i32);
    if x.iter().all(|&v| v * width < 1.0) {
        width.powi(x.len() as i32)
    } else {
        0.0
    }
}

/// The same kernel as a literal sum of Walsh functions.
pub fn walsh_dirichlet_sum(base: u32, level: u32, x: &[f64]) -> Result<f64> {
    let side = (base as u64).pow(level);
    let mut total = 1.0;
    for &xj in x {
        let mut s = Complex64::default();
        for k in 0..side {
            s += walsh_1d(base, k, xj)?;
        }
        total *= s.re;
    }
    Ok(total)
}

/// Real part of `D_m^W(x) · wal_a(x)`; the last slot of the weighted
/// Walsh operator.
#[derive(Clone, Debug)]
pub struct ModulatedWalshDirichlet {
    base: u32,
    level: u32,
    offset: Vec<u64>,
}

impl ModulatedWalshDirichlet {
    pub fn new(base: u32, level: u32, offset: Vec<u64>) -> Self {
        ModulatedWalshDirichlet {
            base,
            level,
            offset,
        }
    }
}

impl BlackBox for ModulatedWalshDirichlet {
    fn dim(&self) -> usize {
        self.offset.len()
    }
    fn eval(&self, x: &[f64]) -> Result<f64> {
        let kernel = walsh_dirichlet(self.base, self.level, x);
        if kernel == 0.0 {
            return Ok(0.0);
        }
        Ok(kernel * walsh_function(self.base, &self.offset, x)?.re)
    }
}

/// Monte Carlo estimate of the Walsh multilinear operator
/// `<f_0, ..., f_{p-1}>_p^W` on a design over all coordinates.
pub fn walsh_multilinear(
    fs: &[&dyn BlackBox],
    base: u32,
    design: &SpectralDesign,
    exec: &Executor,
) -> Result<SpectralEstimate> {
    if !design.subset().is_full() {
        return Err(Error::invalid(
            "the multilinear operator needs a design over all coordinates",
        ));
    }
    let arith = DigitArith::new(base)?;
    let (prod, _) = run_cyclic(&arith, fs, design, exec)?;
    Ok(SpectralEstimate {
        value: prod.mean(),
        std_error: prod.std_error(),
        raw: prod.mean(),
        raw_std_error: prod.std_error(),
        experimental: false,
        ..zero_estimate(design, Some(base))
    })
}

/// Estimates the Walsh index `ul-tau_u^{W,[p]}` in base `b`.
pub fn estimate_ult_walsh(
    f: &dyn BlackBox,
    base: u32,
    design: &SpectralDesign,
    exec: &Executor,
) -> Result<SpectralEstimate> {
    let arith = DigitArith::new(base)?;
    if f.dim() != design.dim() {
        return Err(Error::DimensionMismatch {
            expected: design.dim(),
            got: f.dim(),
        });
    }
    if design.subset().is_empty() {
        return Ok(zero_estimate(design, Some(base)));
    }
    let fs = vec![f; design.order()];
    let (prod, evals) = run_cyclic(&arith, &fs, design, exec)?;
    Ok(index_estimate(design, &prod, &evals, Some(base)))
}

/// Estimates `Σ_{j_i < b^m} |f^(a ⊕ j)|^{p-1}` for odd `p >= 3` by pairing
/// `p - 1` copies of `f` with `D_m^W · wal_a`.
pub fn estimate_weighted_walsh(
    f: &dyn BlackBox,
    base: u32,
    level: u32,
    offset: &[u64],
    design: &SpectralDesign,
    exec: &Executor,
) -> Result<SpectralEstimate> {
    let p = design.order();
    if p % 2 == 0 || p < 3 {
        return Err(Error::invalid(format!(
            "the Dirichlet-weighted measure needs odd p >= 3, got {p}"
        )));
    }
    if offset.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: offset.len(),
        });
    }
    let kernel = ModulatedWalshDirichlet::new(base, level, offset.to_vec());
    let mut fs: Vec<&dyn BlackBox> = vec![f; p - 1];
    fs.push(&kernel);
    let est = walsh_multilinear(&fs, base, design, exec)?;
    Ok(SpectralEstimate {
        variant: SpectralVariant::WalshDirichletWeighted {
            level,
            offset: offset.to_vec(),
        },
        ..est
    })
}

/// Walsh coefficients of a function that is constant on the cells of a
/// base-`b` grid with `b^{m_j}` cells along axis `j`. Such a function has
/// no coefficients outside `k_j < b^{m_j}`, so the spectrum is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct WalshSpectrum {
    base: u32,
    levels: Vec<usize>,
    coeffs: Vec<Complex64>,
}

impl WalshSpectrum {
    /// Chrestenson transform of grid values (row-major, last axis fastest).
    pub fn from_grid(base: u32, levels: &[usize], values: &[f64]) -> Result<Self> {
        let values: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::from_complex_grid(base, levels, &values)
    }

    /// As [`WalshSpectrum::from_grid`], for complex-valued cells.
    pub fn from_complex_grid(base: u32, levels: &[usize], values: &[Complex64]) -> Result<Self> {
        DigitArith::new(base)?;
        let mut digits = Vec::with_capacity(levels.len());
        for &m in levels {
            digits.push(power_of(base, m).ok_or_else(|| {
                Error::Unsupported(format!(
                    "grid level {m} is not a power of the Walsh base {base}"
                ))
            })?);
        }
        let total: usize = levels.iter().product();
        if values.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                got: values.len(),
            });
        }
        let mut coeffs = values.to_vec();
        let mut stride = total;
        for (axis, &m) in levels.iter().enumerate() {
            stride /= m;
            let table = axis_table(base, digits[axis], m);
            let mut buf = vec![Complex64::default(); m];
            for outer in 0..total / (m * stride) {
                for inner in 0..stride {
                    let at = |i: usize| outer * m * stride + i * stride + inner;
                    for (k, slot) in buf.iter_mut().enumerate() {
                        *slot = (0..m).map(|i| coeffs[at(i)] * table[k * m + i]).sum::<Complex64>()
                            / m as f64;
                    }
                    for (k, &v) in buf.iter().enumerate() {
                        coeffs[at(k)] = v;
                    }
                }
            }
        }
        Ok(WalshSpectrum {
            base,
            levels: levels.to_vec(),
            coeffs,
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    fn offset_of(&self, k: &[u64]) -> Option<usize> {
        let mut off = 0;
        for (&kj, &m) in k.iter().zip(&self.levels) {
            if kj as usize >= m {
                return None;
            }
            off = off * m + kj as usize;
        }
        Some(off)
    }

    fn index_of(&self, mut off: usize) -> Vec<u64> {
        let mut k = vec![0; self.levels.len()];
        for (slot, &m) in k.iter_mut().zip(&self.levels).rev() {
            *slot = (off % m) as u64;
            off /= m;
        }
        k
    }

    /// `f^(k) = ∫ f(x) conj(wal_k(x)) dx`.
    pub fn coefficient(&self, k: &[u64]) -> Complex64 {
        if k.len() != self.dim() {
            return Complex64::default();
        }
        self.offset_of(k).map_or(Complex64::default(), |o| self.coeffs[o])
    }

    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<u64>, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(o, &c)| (self.index_of(o), c))
    }

    fn negated(&self, k: &[u64]) -> Vec<u64> {
        k.iter().map(|&kj| negate_index(self.base, kj)).collect()
    }

    fn support_within(k: &[u64], u: VarSubset) -> bool {
        k.iter()
            .enumerate()
            .all(|(j, &kj)| kj == 0 || u.contains(j))
    }

    /// `Σ_k f^(k)^ceil(p/2) f^(⊖k)^floor(p/2)` over frequencies supported in `u`.
    pub fn sigma_p_within(&self, u: VarSubset, p: usize) -> Complex64 {
        let up = p.div_ceil(2) as i32;
        let down = (p / 2) as i32;
        self.iter()
            .filter(|(k, _)| Self::support_within(k, u))
            .map(|(k, c)| c.powi(up) * self.coefficient(&self.negated(&k)).powi(down))
            .sum()
    }

    pub fn sigma_p(&self, p: usize) -> Complex64 {
        self.sigma_p_within(VarSubset::full(self.dim()), p)
    }

    /// Exact Walsh index `ul-tau_u^{W,[p]}`.
    pub fn ult(&self, u: VarSubset, p: usize) -> Complex64 {
        if u.is_empty() {
            return Complex64::default();
        }
        self.sigma_p_within(u, p) - self.mean().powi(p as i32)
    }

    /// Exact `Σ_{j_i < b^m} |f^(a ⊕ j)|^{p-1}`.
    pub fn weighted(&self, p: usize, level: u32, offset: &[u64]) -> Result<f64> {
        let arith = DigitArith::new(self.base)?;
        let side = (self.base as u64).pow(level);
        let mut total = 0.0;
        for (k, c) in self.iter() {
            let inside = k.iter().zip(offset).all(|(&kj, &aj)| {
                (arith.sub_int(kj as u128, aj as u128) as u64) < side
            });
            if inside {
                total += c.norm().powi(p as i32 - 1);
            }
        }
        Ok(total)
    }
}

/// Exact `<f_0, ..., f_{p-1}>^W = Σ_k Π_j f_j^((⊖1)^j k)` for grid spectra.
pub fn exact_multilinear_walsh(spectra: &[&WalshSpectrum]) -> Result<Complex64> {
    let first = spectra
        .first()
        .ok_or_else(|| Error::invalid("at least one spectrum required"))?;
    if spectra
        .iter()
        .any(|s| s.base != first.base || s.dim() != first.dim())
    {
        return Err(Error::invalid("spectra differ in base or dimension"));
    }
    let mut total = Complex64::default();
    for (k, c0) in first.iter() {
        let neg = first.negated(&k);
        let mut prod = c0;
        for (j, s) in spectra.iter().enumerate().skip(1) {
            prod *= s.coefficient(if j % 2 == 0 { &k } else { &neg });
        }
        total += prod;
    }
    Ok(total)
}

fn power_of(base: u32, m: usize) -> Option<u32> {
    let mut v = 1usize;
    let mut e = 0;
    while v < m {
        v = v.checked_mul(base as usize)?;
        e += 1;
    }
    (v == m).then_some(e)
}

/// `conj(wal_k(i / b^m))` for `k, i < b^m`, indexed `[k * side + i]`.
fn axis_table(base: u32, digits: u32, side: usize) -> Vec<Complex64> {
    let idx_digits = |mut v: usize| {
        let mut out = vec![0u64; digits as usize];
        for slot in out.iter_mut() {
            *slot = (v % base as usize) as u64;
            v /= base as usize;
        }
        out
    };
    let mut table = Vec::with_capacity(side * side);
    for k in 0..side {
        let kd = idx_digits(k);
        for i in 0..side {
            // x_{r+1} is the digit of i at place b^{m-1-r}
            let id = idx_digits(i);
            let phase: u64 = (0..digits as usize)
                .map(|r| kd[r] * id[digits as usize - 1 - r])
                .sum::<u64>()
                % base as u64;
            table.push(Complex64::from_polar(
                1.0,
                -2.0 * PI * phase as f64 / base as f64,
            ));
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fn_box;
    use crate::spectral::SpectralForm;
    use proptest::prelude::*;

    #[test]
    fn binary_digit_ops_examples() {
        let a = DigitArith::new(2).unwrap();
        assert_eq!(a.precision(), 52);
        assert_eq!(a.sub(0.75, 0.25), 0.5);
        assert_eq!(a.add(0.75, 0.5), 0.25);
        assert_eq!(a.neg(0.375), 0.375);
    }

    #[test]
    fn ternary_digit_ops_examples() {
        let a = DigitArith::new(3).unwrap();
        assert_eq!(a.precision(), 33);
        // 0.5 = 0.1111..., 0.25 = 0.0202... in base 3
        let x = a.sub(0.5, 0.25);
        assert_eq!(a.digits_of(x)[..4], [1, 2, 1, 2]);
        assert!((x - 0.625).abs() < 1e-12);
        assert_eq!(a.neg(0.0), 0.0);
    }

    #[test]
    fn ternary_two_thirds_doubles_to_one_third() {
        let two = DigitVector::from_digits(3, &[vec![2]]).unwrap();
        let sum = two.add(&two).unwrap();
        assert_eq!(sum, DigitVector::from_digits(3, &[vec![1]]).unwrap());
        assert_eq!(sum.digits(0)[..2], [1, 0]);
        assert!((sum.to_point()[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn binary_add_and_sub_coincide() {
        let byte = |v: u32| (0..8).rev().map(|i| (v >> i) & 1).collect::<Vec<u32>>();
        for a in 0..256 {
            let x = DigitVector::from_digits(2, &[byte(a)]).unwrap();
            for b in 0..256 {
                let y = DigitVector::from_digits(2, &[byte(b)]).unwrap();
                let sum = x.add(&y).unwrap();
                assert_eq!(sum, x.sub(&y).unwrap());
                assert_eq!(sum, DigitVector::from_digits(2, &[byte(a ^ b)]).unwrap());
            }
        }
    }

    #[test]
    fn to_int_truncates() {
        let a = DigitArith::new(2).unwrap();
        assert_eq!(a.to_int(0.5), 1 << 51);
        assert_eq!(a.to_int(1.0 - f64::EPSILON / 2.0), (1 << 52) - 1);
        let t = DigitArith::new(10).unwrap();
        assert_eq!(t.to_int(0.0), 0);
        assert_eq!(t.digits_of(0.25)[..3], [2, 5, 0]);
    }

    #[test]
    fn walsh_examples() {
        assert_eq!(walsh_1d(2, 1, 0.3).unwrap().re, 1.0);
        assert_eq!(walsh_1d(2, 1, 0.7).unwrap().re, -1.0);
        assert_eq!(walsh_1d(2, 3, 0.3).unwrap().re, -1.0);
        let w = walsh_1d(3, 1, 0.5).unwrap();
        assert!((w - Complex64::from_polar(1.0, 2.0 * PI / 3.0)).norm() < 1e-15);
        assert_eq!(negate_index(3, 5), 7); // 12_3 -> 21_3
        assert_eq!(negate_index(2, 13), 13);
    }

    #[test]
    fn dirichlet_closed_form_matches_literal_sum() {
        for base in [2u32, 3, 5] {
            for level in 0..3 {
                for i in 0..50 {
                    let x = [i as f64 / 50.0 + 0.003, (i * 7 % 50) as f64 / 50.0];
                    let lit = walsh_dirichlet_sum(base, level, &x).unwrap();
                    assert!((lit - walsh_dirichlet(base, level, &x)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn chrestenson_of_single_walsh_function() {
        let base = 3;
        let (k1, k2) = (4u64, 2u64);
        let levels = [9usize, 3];
        let values: Vec<f64> = (0..27)
            .map(|o| {
                let x = [((o / 3) as f64 + 0.5) / 9.0, ((o % 3) as f64 + 0.5) / 3.0];
                walsh_function(base, &[k1, k2], &x).unwrap().re
            })
            .collect();
        let s = WalshSpectrum::from_grid(base, &levels, &values).unwrap();
        // Re wal_k = (wal_k + wal_{⊖k}) / 2
        let neg = [negate_index(base, k1), negate_index(base, k2)];
        assert!((s.coefficient(&[k1, k2]).re - 0.5).abs() < 1e-12);
        assert!((s.coefficient(&neg).re - 0.5).abs() < 1e-12);
        let total: f64 = s.iter().map(|(_, c)| c.norm()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_levels_must_be_powers() {
        assert!(WalshSpectrum::from_grid(2, &[3], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn binary_sigma_four_monte_carlo() {
        // f = 1 + wal_1(x) on d = 1: sigma_4 = 1 + 1 = 2, ul-tau^[4] = 1
        let f = fn_box(1, |x| if x[0] < 0.5 { 2.0 } else { 0.0 });
        let s = WalshSpectrum::from_grid(2, &[2], &[2.0, 0.0]).unwrap();
        assert!((s.ult(VarSubset::full(1), 4).re - 1.0).abs() < 1e-12);
        for form in [SpectralForm::Full, SpectralForm::Reduced] {
            let design = SpectralDesign::build(9, 50_000, 1, 4, VarSubset::full(1), form).unwrap();
            let e = estimate_ult_walsh(&f, 2, &design, &Executor::default()).unwrap();
            assert!((e.raw - 2.0).abs() < 4.0 * e.raw_std_error + 1e-12, "{e:?}");
        }
    }

    proptest! {
        #[test]
        fn digit_group_laws(a in 0.0f64..1.0, b in 0.0f64..1.0, base in 2u32..12) {
            let g = DigitArith::new(base).unwrap();
            let (ia, ib) = (g.to_int(a), g.to_int(b));
            prop_assert_eq!(g.add_int(g.sub_int(ia, ib), ib), ia);
            prop_assert_eq!(g.sub_int(ia, ia), 0);
            prop_assert_eq!(g.add_int(ia, ib), g.add_int(ib, ia));
            prop_assert_eq!(g.sub_int(0, g.sub_int(0, ia)), ia);
        }

        #[test]
        fn walsh_is_character(a in 0.0f64..1.0, b in 0.0f64..1.0, k in 0u64..500, base in 2u32..7) {
            let g = DigitArith::new(base).unwrap();
            let diff = g.sub(a, b);
            let lhs = walsh_1d(base, k, diff).unwrap();
            let rhs = walsh_1d(base, k, a).unwrap() * walsh_1d(base, k, b).unwrap().conj();
            prop_assert!((lhs - rhs).norm() < 1e-9);
        }
    }
}
