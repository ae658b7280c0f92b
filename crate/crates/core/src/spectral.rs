//! Fourier-side spectral importance.
//!
//! The multilinear operator
//!
//! ```text
//! <f_0, ..., f_{p-1}>_p = ∫ Π_j f_j({(-1)^j (x_j - x_{j+1 mod p})}) dx_0 ... dx_{p-1}
//! ```
//!
//! is diagonal on complex exponentials, so `<f, ..., f>_p` collapses to a
//! sum over frequencies of `f^(k)^ceil(p/2) · f^(-k)^floor(p/2)`, i.e.
//! `Σ |f^(k)|^p` for real `f` and even `p`. Applying the cyclic
//! differences only to the coordinates in `u`, with independent complement
//! blocks, gives `ul-tau_u^[p] + mu^p`: the same sum restricted to
//! frequencies supported in `u`.
//!
//! The integral is `p·d` dimensional; the change of variables
//! `y_j = (-1)^j (x_j - x_{j+1})` makes it `(p-1)·d` dimensional with the
//! last argument `{(-1)^p (y_0 - y_1 + y_2 - ... ± y_{p-2})}`.
//!
//! Pairing `p-1` copies of `f` with the Dirichlet kernel `D_N` (odd `p`)
//! yields `Σ_{|k|∞ <= N} |f^(k)|^{p-1}`, a nonnegative truncated measure.
//!
//! Monte Carlo paths work on real `f`; complex arithmetic is confined to
//! [`TrigPolynomial`], the exact coefficient-space oracle.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{eval_checked, Executor, RunningStats};
use crate::model::{frac, BlackBox, VarSubset};
use crate::sampling::{PointGenerator, PointSet};

/// Which integral representation a spectral design samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralForm {
    /// `p` cyclic-difference blocks on `u`, `p·d` variates per replicate.
    Full,
    /// `p - 1` free blocks on `u` plus the alternating closure.
    Reduced,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralVariant {
    FullPd,
    ReducedPMinus1D,
    DirichletWeighted { cutoff: u32, modulation: Vec<i64> },
    WalshDirichletWeighted { level: u32, offset: Vec<u64> },
}

impl SpectralVariant {
    pub fn tag(&self) -> String {
        match self {
            SpectralVariant::FullPd => "full_pd".into(),
            SpectralVariant::ReducedPMinus1D => "reduced_p_minus_1_d".into(),
            SpectralVariant::DirichletWeighted { cutoff, modulation } => {
                format!("dirichlet_weighted(N={cutoff},m={modulation:?})")
            }
            SpectralVariant::WalshDirichletWeighted { level, offset } => {
                format!("walsh_dirichlet_weighted(m={level},a={offset:?})")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub subset: VarSubset,
    pub p: usize,
    /// The index itself (`raw - mu_hat^p` for index estimators; equal to
    /// `raw` for the multilinear operator and weighted measures).
    pub value: f64,
    /// Approximate: ignores the variability of `mu_hat` when it is subtracted.
    pub std_error: f64,
    /// Mean of the `p`-fold products: the estimate of `ul-tau + mu^p`.
    pub raw: f64,
    pub raw_std_error: f64,
    pub mu_hat: Option<f64>,
    pub n: usize,
    pub variant: SpectralVariant,
    pub seed: u64,
    /// Walsh base, `None` for the Fourier system.
    pub base: Option<u32>,
    /// Odd-order raw spectral indices have no sign guarantee.
    pub experimental: bool,
}

/// Sampling plan for the spectral estimators (Fourier and Walsh).
#[derive(Clone, Debug)]
pub struct SpectralDesign {
    seed: u64,
    n: usize,
    d: usize,
    p: usize,
    u: VarSubset,
    form: SpectralForm,
    points: PointSet,
    generator: PointGenerator,
}

impl SpectralDesign {
    pub fn build(
        seed: u64,
        n: usize,
        d: usize,
        p: usize,
        u: VarSubset,
        form: SpectralForm,
    ) -> Result<Self> {
        Self::with_points(seed, n, d, p, u, form, PointSet::MonteCarlo)
    }

    pub fn with_points(
        seed: u64,
        n: usize,
        d: usize,
        p: usize,
        u: VarSubset,
        form: SpectralForm,
        points: PointSet,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("at least two replicates are needed"));
        }
        if p < 2 {
            return Err(Error::invalid(format!("order p must be at least 2, got {p}")));
        }
        if u.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: u.dim(),
            });
        }
        let width = Self::width_of(d, p, u.len(), form);
        Ok(SpectralDesign {
            seed,
            n,
            d,
            p,
            u,
            form,
            points,
            generator: PointGenerator::new(points, seed, n, width),
        })
    }

    fn width_of(d: usize, p: usize, k: usize, form: SpectralForm) -> usize {
        match form {
            SpectralForm::Full => p * d,
            SpectralForm::Reduced => (p - 1) * k + p * (d - k),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn order(&self) -> usize {
        self.p
    }
    pub fn subset(&self) -> VarSubset {
        self.u
    }
    pub fn form(&self) -> SpectralForm {
        self.form
    }
    pub fn point_set(&self) -> PointSet {
        self.points
    }

    /// Uniform variates consumed per replicate.
    pub fn width(&self) -> usize {
        Self::width_of(self.d, self.p, self.u.len(), self.form)
    }

    pub(crate) fn variant(&self) -> SpectralVariant {
        match self.form {
            SpectralForm::Full => SpectralVariant::FullPd,
            SpectralForm::Reduced => SpectralVariant::ReducedPMinus1D,
        }
    }

    /// Writes the `p` evaluation points of replicate `i` into `out`
    /// (`p·d` values, slot-major).
    pub(crate) fn points_into<G: CyclicGroup>(
        &self,
        group: &G,
        i: usize,
        raw: &mut [f64],
        out: &mut [f64],
    ) {
        let (d, p) = (self.d, self.p);
        let k = self.u.len();
        self.generator.fill(i, raw);
        let cyclic_len = match self.form {
            SpectralForm::Full => p * k,
            SpectralForm::Reduced => (p - 1) * k,
        };
        let (cyc, comp) = raw.split_at(cyclic_len);
        let m = d - k;
        for j in 0..p {
            let slot = &mut out[j * d..(j + 1) * d];
            let (mut iu, mut ic) = (0, 0);
            for (pos, s) in slot.iter_mut().enumerate() {
                if self.u.contains(pos) {
                    *s = match self.form {
                        SpectralForm::Full => {
                            let a = cyc[j * k + iu];
                            let b = cyc[((j + 1) % p) * k + iu];
                            if j % 2 == 0 {
                                group.sub(a, b)
                            } else {
                                group.sub(b, a)
                            }
                        }
                        SpectralForm::Reduced if j + 1 < p => cyc[j * k + iu],
                        SpectralForm::Reduced => {
                            let mut acc = cyc[iu];
                            for t in 1..p - 1 {
                                let y = cyc[t * k + iu];
                                acc = if t % 2 == 1 {
                                    group.sub(acc, y)
                                } else {
                                    group.add(acc, y)
                                };
                            }
                            if p % 2 == 1 {
                                group.neg(acc)
                            } else {
                                acc
                            }
                        }
                    };
                    iu += 1;
                } else {
                    *s = comp[j * m + ic];
                    ic += 1;
                }
            }
        }
    }
}

/// Group structure on `[0,1)` used by the cyclic differences.
pub(crate) trait CyclicGroup: Sync {
    fn add(&self, a: f64, b: f64) -> f64;
    fn sub(&self, a: f64, b: f64) -> f64;
    fn neg(&self, a: f64) -> f64;
}

/// Addition modulo one.
pub(crate) struct Torus;

impl CyclicGroup for Torus {
    #[inline]
    fn add(&self, a: f64, b: f64) -> f64 {
        frac(a + b)
    }
    #[inline]
    fn sub(&self, a: f64, b: f64) -> f64 {
        let r = a - b;
        let r = if r < 0.0 { r + 1.0 } else { r };
        if r >= 1.0 {
            0.0
        } else {
            r
        }
    }
    #[inline]
    fn neg(&self, a: f64) -> f64 {
        self.sub(0.0, a)
    }
}

/// Product and pooled-evaluation statistics of `Π_j f_j(point_j)`.
pub(crate) fn run_cyclic<G: CyclicGroup>(
    group: &G,
    fs: &[&dyn BlackBox],
    design: &SpectralDesign,
    exec: &Executor,
) -> Result<(RunningStats, RunningStats)> {
    let (d, p) = (design.dim(), design.order());
    if fs.len() != p {
        return Err(Error::invalid(format!(
            "{} functions supplied for order p = {p}",
            fs.len()
        )));
    }
    for f in fs {
        if f.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: f.dim(),
            });
        }
    }
    let [prod, evals] = exec.run(design.n(), |range| {
        let len = range.len();
        let mut raw = vec![0.0; design.width()];
        let mut pts = vec![0.0; p * d];
        // slot-major so that each function sees one contiguous batch
        let mut slots = vec![0.0; p * len * d];
        for (r, i) in range.clone().enumerate() {
            design.points_into(group, i, &mut raw, &mut pts);
            for j in 0..p {
                let dst = (j * len + r) * d;
                slots[dst..dst + d].copy_from_slice(&pts[j * d..(j + 1) * d]);
            }
        }
        let mut values = vec![0.0; p * len];
        for (j, f) in fs.iter().enumerate() {
            eval_checked(
                *f,
                &slots[j * len * d..(j + 1) * len * d],
                &mut values[j * len..(j + 1) * len],
            )?;
        }
        let mut prod = RunningStats::default();
        let mut evals = RunningStats::default();
        for r in 0..len {
            let mut acc = 1.0;
            for j in 0..p {
                let v = values[j * len + r];
                acc *= v;
                evals.push(v);
            }
            prod.push(acc);
        }
        Ok([prod, evals])
    })?;
    Ok((prod, evals))
}

pub(crate) fn index_estimate(
    design: &SpectralDesign,
    prod: &RunningStats,
    evals: &RunningStats,
    base: Option<u32>,
) -> SpectralEstimate {
    let p = design.order();
    let raw = prod.mean();
    let mu = evals.mean();
    SpectralEstimate {
        subset: design.subset(),
        p,
        value: raw - mu.powi(p as i32),
        std_error: prod.std_error(),
        raw,
        raw_std_error: prod.std_error(),
        mu_hat: Some(mu),
        n: design.n(),
        variant: design.variant(),
        seed: design.seed(),
        base,
        experimental: p % 2 == 1,
    }
}

pub(crate) fn zero_estimate(design: &SpectralDesign, base: Option<u32>) -> SpectralEstimate {
    SpectralEstimate {
        subset: design.subset(),
        p: design.order(),
        value: 0.0,
        std_error: 0.0,
        raw: 0.0,
        raw_std_error: 0.0,
        mu_hat: None,
        n: design.n(),
        variant: design.variant(),
        seed: design.seed(),
        base,
        experimental: design.order() % 2 == 1,
    }
}

/// Monte Carlo estimate of `<f_0, ..., f_{p-1}>_p`. The design must act
/// on all coordinates (`u` = full set).
pub fn multilinear_product(
    fs: &[&dyn BlackBox],
    design: &SpectralDesign,
    exec: &Executor,
) -> Result<SpectralEstimate> {
    if !design.subset().is_full() {
        return Err(Error::invalid(
            "the multilinear operator needs a design over all coordinates",
        ));
    }
    let (prod, _) = run_cyclic(&Torus, fs, design, exec)?;
    Ok(SpectralEstimate {
        value: prod.mean(),
        std_error: prod.std_error(),
        raw: prod.mean(),
        raw_std_error: prod.std_error(),
        mu_hat: None,
        experimental: false,
        ..zero_estimate(design, None)
    })
}

/// Estimates `ul-tau_u^[p]` as the mean cyclic product minus `mu_hat^p`.
///
/// Odd `p` is accepted and flagged experimental: the estimand is then
/// `Σ f^(k)^ceil(p/2) f^(-k)^floor(p/2) - mu^p` over frequencies
/// supported in `u`, with no sign guarantee.
pub fn estimate_ult_spectral(
    f: &dyn BlackBox,
    design: &SpectralDesign,
    exec: &Executor,
) -> Result<SpectralEstimate> {
    if f.dim() != design.dim() {
        return Err(Error::DimensionMismatch {
            expected: design.dim(),
            got: f.dim(),
        });
    }
    if design.subset().is_empty() {
        return Ok(zero_estimate(design, None));
    }
    let fs = vec![f; design.order()];
    let (prod, evals) = run_cyclic(&Torus, &fs, design, exec)?;
    Ok(index_estimate(design, &prod, &evals, None))
}

/// Dirichlet kernel `D_N(x) = Π_j sin(2π(N+½)x_j) / sin(π x_j)`, with each
/// factor equal to `2N+1` at `x_j = 0`.
pub fn dirichlet_kernel(cutoff: u32, x: &[f64]) -> f64 {
    x.iter().map(|&xj| dirichlet_factor(cutoff, xj)).product()
}

fn dirichlet_factor(cutoff: u32, x: f64) -> f64 {
    let width = 2.0 * cutoff as f64 + 1.0;
    if x == 0.0 || x == 1.0 {
        return width;
    }
    // distance to the nearest integer
    let t = x.min(1.0 - x).abs();
    let s = (PI * x).sin();
    if s.abs() < 1e-9 {
        width * (1.0 - (width * width - 1.0) * (PI * t).powi(2) / 6.0)
    } else {
        (2.0 * PI * (cutoff as f64 + 0.5) * x).sin() / s
    }
}

/// Real part of `D_N(x) · e^{2πi m·x}`; the last slot of the weighted
/// operator.
#[derive(Clone, Debug)]
pub struct ModulatedDirichlet {
    cutoff: u32,
    modulation: Vec<i64>,
}

impl ModulatedDirichlet {
    pub fn new(cutoff: u32, modulation: Vec<i64>) -> Self {
        ModulatedDirichlet { cutoff, modulation }
    }
}

impl BlackBox for ModulatedDirichlet {
    fn dim(&self) -> usize {
        self.modulation.len()
    }
    fn eval(&self, x: &[f64]) -> Result<f64> {
        let phase: f64 = self
            .modulation
            .iter()
            .zip(x)
            .map(|(&m, &xj)| m as f64 * xj)
            .sum();
        Ok(dirichlet_kernel(self.cutoff, x) * (2.0 * PI * phase).cos())
    }
}

/// Estimates `<f, ..., f, D_N e^{2πi m·x}>_p = Σ_{k ∈ {-N..N}^d} |f^(k+m)|^{p-1}`
/// for odd `p >= 3`. The design must cover all coordinates.
pub fn estimate_weighted_spectral(
    f: &dyn BlackBox,
    cutoff: u32,
    modulation: &[i64],
    design: &SpectralDesign,
    exec: &Executor,
) -> Result<SpectralEstimate> {
    let p = design.order();
    if p % 2 == 0 || p < 3 {
        return Err(Error::invalid(format!(
            "the Dirichlet-weighted measure needs odd p >= 3, got {p}"
        )));
    }
    if modulation.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: modulation.len(),
        });
    }
    let kernel = ModulatedDirichlet::new(cutoff, modulation.to_vec());
    let mut fs: Vec<&dyn BlackBox> = vec![f; p - 1];
    fs.push(&kernel);
    let est = multilinear_product(&fs, design, exec)?;
    Ok(SpectralEstimate {
        variant: SpectralVariant::DirichletWeighted {
            cutoff,
            modulation: modulation.to_vec(),
        },
        ..est
    })
}

/// A finite Fourier series `Σ_k c_k e^{2πi k·x}` on `[0,1)^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    dim: usize,
    terms: BTreeMap<Vec<i64>, Complex64>,
}

impl TrigPolynomial {
    pub fn new(dim: usize) -> Self {
        TrigPolynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, Complex64)>,
    {
        let mut poly = Self::new(dim);
        for (k, c) in terms {
            poly.add_term(k, c)?;
        }
        Ok(poly)
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut poly = Self::new(dim);
        poly.terms.insert(vec![0; dim], Complex64::new(c, 0.0));
        poly
    }

    /// The single exponential `e^{2πi k·x}`.
    pub fn exponential(k: Vec<i64>) -> Self {
        let dim = k.len();
        let mut poly = Self::new(dim);
        poly.terms.insert(k, Complex64::new(1.0, 0.0));
        poly
    }

    /// `D_N(x) e^{2πi m·x}` as a polynomial.
    pub fn dirichlet(cutoff: u32, modulation: &[i64]) -> Self {
        let dim = modulation.len();
        let n = cutoff as i64;
        let side = (2 * n + 1) as usize;
        let mut poly = Self::new(dim);
        for idx in 0..side.pow(dim as u32) {
            let mut rest = idx;
            let k: Vec<i64> = modulation
                .iter()
                .map(|&m| {
                    let c = (rest % side) as i64 - n;
                    rest /= side;
                    c + m
                })
                .collect();
            poly.terms.insert(k, Complex64::new(1.0, 0.0));
        }
        poly
    }

    pub fn add_term(&mut self, k: Vec<i64>, c: Complex64) -> Result<()> {
        if k.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: k.len(),
            });
        }
        *self.terms.entry(k).or_default() += c;
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, k: &[i64]) -> Complex64 {
        self.terms.get(k).copied().unwrap_or_default()
    }

    pub fn mean(&self) -> Complex64 {
        self.coefficient(&vec![0; self.dim])
    }

    pub fn eval_complex(&self, x: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(k, c)| {
                let phase: f64 = k.iter().zip(x).map(|(&kj, &xj)| kj as f64 * xj).sum();
                c * Complex64::from_polar(1.0, 2.0 * PI * phase)
            })
            .sum()
    }

    /// Whether the coefficient at `-k` is the conjugate of that at `k`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.terms.iter().all(|(k, c)| {
            let neg: Vec<i64> = k.iter().map(|v| -v).collect();
            (self.coefficient(&neg) - c.conj()).norm() <= tol
        })
    }

    fn support_mask(k: &[i64]) -> u64 {
        k.iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .fold(0, |m, (j, _)| m | 1 << j)
    }

    fn filtered(&self, keep: impl Fn(u64) -> bool) -> Self {
        TrigPolynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| keep(Self::support_mask(k)))
                .map(|(k, c)| (k.clone(), *c))
                .collect(),
        }
    }

    /// The ANOVA term `f_u`: frequencies whose support is exactly `u`.
    pub fn anova_part(&self, u: VarSubset) -> Self {
        self.filtered(|m| m == u.mask())
    }

    /// Frequencies supported inside `u` (the conditional mean `ul-f_u`).
    pub fn restrict_to(&self, u: VarSubset) -> Self {
        self.filtered(|m| m & !u.mask() == 0)
    }
}

impl BlackBox for TrigPolynomial {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval_complex(x).re)
    }
}

/// Exact `<P_0, ..., P_{p-1}>_p = Σ_k Π_j P_j^((-1)^j k)`.
pub fn exact_multilinear(polys: &[&TrigPolynomial]) -> Result<Complex64> {
    let first = polys
        .first()
        .ok_or_else(|| Error::invalid("at least one polynomial required"))?;
    if polys.iter().any(|q| q.dim != first.dim) {
        return Err(Error::invalid("polynomials differ in dimension"));
    }
    let mut total = Complex64::default();
    for (k, c0) in &first.terms {
        let neg: Vec<i64> = k.iter().map(|v| -v).collect();
        let mut prod = *c0;
        for (j, q) in polys.iter().enumerate().skip(1) {
            prod *= q.coefficient(if j % 2 == 0 { k } else { &neg });
        }
        total += prod;
    }
    Ok(total)
}

/// `sigma_p(f) = Σ_k f^(k)^ceil(p/2) f^(-k)^floor(p/2)`, computed directly
/// from the coefficients.
pub fn exact_sigma_p(poly: &TrigPolynomial, p: usize) -> Complex64 {
    let up = p.div_ceil(2) as i32;
    let down = (p / 2) as i32;
    poly.terms
        .iter()
        .map(|(k, c)| {
            let neg: Vec<i64> = k.iter().map(|v| -v).collect();
            c.powi(up) * poly.coefficient(&neg).powi(down)
        })
        .sum()
}

/// Exact `ul-tau_u^[p] = sigma_p(restrict_to(u)) - mu^p`.
pub fn exact_ult_spectral(poly: &TrigPolynomial, u: VarSubset, p: usize) -> Complex64 {
    if u.is_empty() {
        return Complex64::default();
    }
    exact_sigma_p(&poly.restrict_to(u), p) - poly.mean().powi(p as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fn_box;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn dirichlet_examples() {
        assert_eq!(dirichlet_kernel(0, &[0.3, 0.77]), 1.0);
        assert_eq!(dirichlet_kernel(3, &[0.0]), 7.0);
        assert!((dirichlet_kernel(1, &[0.5]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_matches_cosine_sum() {
        for cutoff in 0..5u32 {
            for i in 0..200 {
                let x = i as f64 / 200.0 + 1e-3;
                let direct = 1.0
                    + 2.0
                        * (1..=cutoff)
                            .map(|k| (2.0 * PI * k as f64 * x).cos())
                            .sum::<f64>();
                assert!((dirichlet_kernel(cutoff, &[x]) - direct).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dirichlet_near_singularity_is_continuous() {
        let near = dirichlet_kernel(2, &[1e-12]);
        assert!((near - 5.0).abs() < 1e-9);
        let near_one = dirichlet_kernel(2, &[1.0 - 1e-12]);
        assert!((near_one - 5.0).abs() < 1e-9);
    }

    #[test]
    fn torus_difference_stays_in_range() {
        assert_eq!(Torus.sub(0.25, 0.25 + 1e-17), 0.0);
        assert_eq!(Torus.sub(0.2, 0.7), 0.5);
        assert_eq!(Torus.neg(0.0), 0.0);
    }

    #[test]
    fn sigma_examples() {
        let tone = TrigPolynomial::from_terms(1, [(vec![1], c(0.5)), (vec![-1], c(0.5))]).unwrap();
        assert!((exact_sigma_p(&tone, 4).re - 0.125).abs() < 1e-15);
        assert_eq!(exact_sigma_p(&TrigPolynomial::constant(2, 1.0), 5), c(1.0));
        let f = TrigPolynomial::from_terms(
            1,
            [(vec![0], c(1.0)), (vec![1], c(0.5)), (vec![-1], c(0.5))],
        )
        .unwrap();
        let u = VarSubset::full(1);
        assert!((exact_ult_spectral(&f, u, 4).re - 0.125).abs() < 1e-15);
        let parseval: f64 = f.terms().map(|(_, c)| c.norm_sqr()).sum();
        assert!((exact_sigma_p(&f, 2).re - parseval).abs() < 1e-15);
    }

    #[test]
    fn polynomial_evaluates_as_real_function() {
        let f = TrigPolynomial::from_terms(
            1,
            [(vec![1], c(0.5)), (vec![-1], c(0.5)), (vec![0], c(2.0))],
        )
        .unwrap();
        assert!(f.is_real(1e-15));
        let x = 0.1;
        assert!((f.eval(&[x]).unwrap() - (2.0 + (2.0 * PI * x).cos())).abs() < 1e-14);
    }

    #[test]
    fn constant_ones_multilinear() {
        let one = fn_box(2, |_| 1.0);
        let design = SpectralDesign::build(3, 100, 2, 3, VarSubset::full(2), SpectralForm::Full).unwrap();
        let e = multilinear_product(&[&one, &one, &one], &design, &Executor::serial()).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn parseval_single_tone_multilinear() {
        let f = fn_box(1, |x| 2f64.sqrt() * (2.0 * PI * x[0]).cos());
        let design =
            SpectralDesign::build(5, 200_000, 1, 2, VarSubset::full(1), SpectralForm::Full).unwrap();
        let e = multilinear_product(&[&f, &f], &design, &Executor::default()).unwrap();
        assert!((e.value - 1.0).abs() < 3.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn reduced_design_uses_fewer_variates() {
        let u = VarSubset::from_indices(3, &[1, 2]).unwrap();
        let full = SpectralDesign::build(1, 10, 3, 4, u, SpectralForm::Full).unwrap();
        let red = SpectralDesign::build(1, 10, 3, 4, u, SpectralForm::Reduced).unwrap();
        assert_eq!(full.width(), 12);
        assert_eq!(red.width(), 3 * 2 + 4);
    }

    #[test]
    fn reduced_closure_matches_full_differences() {
        // Feeding the full-form differences y_j into the reduced closure
        // must reproduce the full-form last argument, for even and odd p.
        for p in 2..=6 {
            let xs: Vec<f64> = (0..p).map(|j| ((j * 7 + 3) % 11) as f64 / 11.3).collect();
            let full: Vec<f64> = (0..p)
                .map(|j| {
                    let (a, b) = (xs[j], xs[(j + 1) % p]);
                    if j % 2 == 0 {
                        Torus.sub(a, b)
                    } else {
                        Torus.sub(b, a)
                    }
                })
                .collect();
            let mut acc = full[0];
            for (t, &y) in full.iter().enumerate().take(p - 1).skip(1) {
                acc = if t % 2 == 1 { Torus.sub(acc, y) } else { Torus.add(acc, y) };
            }
            if p % 2 == 1 {
                acc = Torus.neg(acc);
            }
            assert!((acc - full[p - 1]).abs() < 1e-12, "p={p}: {acc} vs {}", full[p - 1]);
        }
    }

    #[test]
    fn empty_subset_is_zero() {
        let f = fn_box(2, |x| x[0]);
        let design =
            SpectralDesign::build(1, 10, 2, 4, VarSubset::empty(2), SpectralForm::Full).unwrap();
        assert_eq!(estimate_ult_spectral(&f, &design, &Executor::serial()).unwrap().value, 0.0);
    }

    #[test]
    fn weighted_rejects_even_order() {
        let f = fn_box(1, |x| x[0]);
        let design = SpectralDesign::build(1, 10, 1, 4, VarSubset::full(1), SpectralForm::Full).unwrap();
        assert!(estimate_weighted_spectral(&f, 1, &[0], &design, &Executor::serial()).is_err());
    }
}
