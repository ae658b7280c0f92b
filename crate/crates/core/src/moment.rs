//! Moment-based subset importance `ul-tau_u^(p)`.
//!
//! `ul-tau_u^(p) + mu^p` is the expectation of a product of `p` function
//! values sharing the coordinates `x_u` and drawing the complement
//! independently for each factor. Two estimators are provided: one
//! subtracts a pooled estimate of `mu^p`, the other subtracts the product
//! of `p` fully independent evaluations and is unbiased. For `p = 2` they
//! reduce to the classical closed Sobol' index; the total index
//! `ol-tau_u^2` is estimated from squared differences.
//!
//! Odd `p` is allowed; the result may be negative and is reported as is.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{eval_checked, Executor, RunningStats};
use crate::model::{BlackBox, VarSubset};
use crate::sampling::{derive_seed, PickFreezeDesign};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentEstimator {
    /// Mean of products minus the pooled mean to the power `p`.
    ProductCentered,
    /// Mean of products minus the mean of fully independent products.
    ProductDifference,
    /// Half mean squared difference, estimating `ol-tau_u^2`.
    ClassicalTotal,
}

impl MomentEstimator {
    pub fn tag(self) -> &'static str {
        match self {
            MomentEstimator::ProductCentered => "product_centered",
            MomentEstimator::ProductDifference => "product_difference",
            MomentEstimator::ClassicalTotal => "classical_total",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub subset: VarSubset,
    pub p: usize,
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
    pub estimator: MomentEstimator,
    pub seed: u64,
    /// Set when the standard error ignores part of the estimator's
    /// variability (the pooled-mean subtraction of the centered estimator).
    pub approximate_se: bool,
}

impl IndexEstimate {
    fn zero(design: &PickFreezeDesign, estimator: MomentEstimator) -> Self {
        IndexEstimate {
            subset: design.subset(),
            p: design.order(),
            value: 0.0,
            std_error: 0.0,
            n: design.n(),
            estimator,
            seed: design.seed(),
            approximate_se: false,
        }
    }
}

fn check_design(f: &dyn BlackBox, design: &PickFreezeDesign) -> Result<()> {
    if f.dim() != design.dim() {
        return Err(Error::DimensionMismatch {
            expected: design.dim(),
            got: f.dim(),
        });
    }
    if design.n() < 2 {
        return Err(Error::invalid("at least two replicates are needed for a standard error"));
    }
    Ok(())
}

/// Writes `x_u : z_{-u}` into `out`.
#[inline]
fn glue_into(x_u: &[f64], z: &[f64], u: VarSubset, out: &mut [f64]) {
    out.copy_from_slice(z);
    for (slot, &x) in u.positions().zip(x_u) {
        out[slot] = x;
    }
}

/// Evaluates the `p` glued points of every replicate in `range`, plus the
/// `p` raw complement points when `with_baseline` is set.
///
/// Returns values laid out per replicate as `[glued_1..glued_p, raw_1..raw_p]`.
fn evaluate_chunk(
    f: &dyn BlackBox,
    design: &PickFreezeDesign,
    range: Range<usize>,
    with_baseline: bool,
) -> Result<Vec<f64>> {
    let (d, p, u) = (design.dim(), design.order(), design.subset());
    let k = u.len();
    let per = if with_baseline { 2 * p } else { p };
    let mut raw = vec![0.0; design.width()];
    let mut points = vec![0.0; range.len() * per * d];
    for (r, i) in range.clone().enumerate() {
        design.replicate(i, &mut raw);
        let (x_u, zs) = raw.split_at(k);
        let base = r * per * d;
        for (j, z) in zs.chunks_exact(d).enumerate() {
            glue_into(x_u, z, u, &mut points[base + j * d..base + (j + 1) * d]);
            if with_baseline {
                points[base + (p + j) * d..base + (p + j + 1) * d].copy_from_slice(z);
            }
        }
    }
    let mut values = vec![0.0; range.len() * per];
    eval_checked(f, &points, &mut values)?;
    Ok(values)
}

/// Centered estimator: `(1/n) Σ_i Π_k f(x_{i,u}:z^(k)_{i,-u}) - mu_hat^p`,
/// `mu_hat` pooled over all `n·p` evaluations.
///
/// The standard error is that of the product mean alone and is flagged
/// approximate.
pub fn estimate_centered(
    f: &dyn BlackBox,
    design: &PickFreezeDesign,
    exec: &Executor,
) -> Result<IndexEstimate> {
    check_design(f, design)?;
    if design.subset().is_empty() {
        return Ok(IndexEstimate::zero(design, MomentEstimator::ProductCentered));
    }
    let p = design.order();
    let [prod, evals] = exec.run(design.n(), |range| {
        let values = evaluate_chunk(f, design, range, false)?;
        let mut prod = RunningStats::default();
        let mut evals = RunningStats::default();
        for block in values.chunks_exact(p) {
            prod.push(block.iter().product());
            block.iter().for_each(|&v| evals.push(v));
        }
        Ok([prod, evals])
    })?;
    let mu = evals.mean();
    Ok(IndexEstimate {
        value: prod.mean() - mu.powi(p as i32),
        std_error: prod.std_error(),
        approximate_se: true,
        ..IndexEstimate::zero(design, MomentEstimator::ProductCentered)
    })
}

/// Difference estimator:
/// `(1/n) Σ_i [Π_k f(x_{i,u}:z^(k)_{i,-u}) - Π_k f(z^(k)_i)]`.
pub fn estimate_difference(
    f: &dyn BlackBox,
    design: &PickFreezeDesign,
    exec: &Executor,
) -> Result<IndexEstimate> {
    check_design(f, design)?;
    if design.subset().is_empty() {
        return Ok(IndexEstimate::zero(design, MomentEstimator::ProductDifference));
    }
    let p = design.order();
    let [diff] = exec.run(design.n(), |range| {
        let values = evaluate_chunk(f, design, range, true)?;
        let mut diff = RunningStats::default();
        for block in values.chunks_exact(2 * p) {
            let (glued, base) = block.split_at(p);
            diff.push(glued.iter().product::<f64>() - base.iter().product::<f64>());
        }
        Ok([diff])
    })?;
    Ok(IndexEstimate {
        value: diff.mean(),
        std_error: diff.std_error(),
        ..IndexEstimate::zero(design, MomentEstimator::ProductDifference)
    })
}

/// Total index `ol-tau_u^2 = ½ E[(f(a) - f(b))²]`, where `b` redraws the
/// coordinates in `u` of `a`. Uses `a = z^(1)` and `b = x_u : z^(1)_{-u}`
/// of a `p = 2` design.
pub fn estimate_total_effect(
    f: &dyn BlackBox,
    design: &PickFreezeDesign,
    exec: &Executor,
) -> Result<IndexEstimate> {
    check_design(f, design)?;
    if design.order() != 2 {
        return Err(Error::invalid("the total index uses a p = 2 design"));
    }
    if design.subset().is_empty() {
        return Ok(IndexEstimate::zero(design, MomentEstimator::ClassicalTotal));
    }
    let (d, u) = (design.dim(), design.subset());
    let k = u.len();
    let [sq] = exec.run(design.n(), |range| {
        let mut raw = vec![0.0; design.width()];
        let mut points = vec![0.0; range.len() * 2 * d];
        for (r, i) in range.clone().enumerate() {
            design.replicate(i, &mut raw);
            let (x_u, zs) = raw.split_at(k);
            let z1 = &zs[..d];
            let base = r * 2 * d;
            points[base..base + d].copy_from_slice(z1);
            glue_into(x_u, z1, u, &mut points[base + d..base + 2 * d]);
        }
        let mut values = vec![0.0; range.len() * 2];
        eval_checked(f, &points, &mut values)?;
        let mut sq = RunningStats::default();
        for pair in values.chunks_exact(2) {
            sq.push(0.5 * (pair[0] - pair[1]).powi(2));
        }
        Ok([sq])
    })?;
    Ok(IndexEstimate {
        value: sq.mean(),
        std_error: sq.std_error(),
        ..IndexEstimate::zero(design, MomentEstimator::ClassicalTotal)
    })
}

/// Consistency check of `ul-tau_u^2 + ol-tau_{-u}^2 = sigma^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplementarityReport {
    pub subset: VarSubset,
    pub under: IndexEstimate,
    pub total_complement: IndexEstimate,
    pub variance: IndexEstimate,
    /// `under + total_complement - variance`.
    pub residual: f64,
    /// Root sum of squared standard errors of the three independent parts.
    pub std_error: f64,
}

impl ComplementarityReport {
    /// Residual in units of its standard error; zero when both vanish.
    pub fn z_score(&self) -> f64 {
        if self.std_error == 0.0 {
            if self.residual == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.residual / self.std_error
        }
    }
}

/// Estimates the three quantities from independent sub-designs derived from
/// the seed of `design` (a `p = 2` design for `u`).
pub fn check_complementarity(
    f: &dyn BlackBox,
    design: &PickFreezeDesign,
    exec: &Executor,
) -> Result<ComplementarityReport> {
    if design.order() != 2 {
        return Err(Error::invalid("complementarity is a p = 2 identity"));
    }
    let u = design.subset();
    let under = estimate_difference(f, design, exec)?;
    let sub = |tag: u64, v: VarSubset| {
        PickFreezeDesign::with_points(
            derive_seed(design.seed(), tag),
            design.n(),
            design.dim(),
            2,
            v,
            design.point_set(),
        )
    };
    let total_complement = estimate_total_effect(f, &sub(1, u.complement())?, exec)?;
    let variance = estimate_total_effect(f, &sub(2, VarSubset::full(design.dim()))?, exec)?;
    let residual = under.value + total_complement.value - variance.value;
    let std_error = (under.std_error.powi(2)
        + total_complement.std_error.powi(2)
        + variance.std_error.powi(2))
    .sqrt();
    Ok(ComplementarityReport {
        subset: u,
        under,
        total_complement,
        variance,
        residual,
        std_error,
    })
}

/// Textbook two-point Sobol' formulas on a `p = 2` design, evaluated
/// serially point by point: `(centered, difference)` estimates of
/// `ul-tau_u^2`.
pub fn classical_sobol_p2(f: &dyn BlackBox, design: &PickFreezeDesign) -> Result<(f64, f64)> {
    if design.order() != 2 {
        return Err(Error::invalid("classical formulas need a p = 2 design"));
    }
    let (d, u, n) = (design.dim(), design.subset(), design.n());
    let mut a = vec![0.0; d];
    let mut b = vec![0.0; d];
    let (mut s_ab, mut s_mean, mut s_base) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (x_u, z) = design.replicate_blocks(i);
        glue_into(&x_u, &z[0], u, &mut a);
        glue_into(&x_u, &z[1], u, &mut b);
        let (fa, fb) = (f.eval(&a)?, f.eval(&b)?);
        s_ab += fa * fb;
        s_mean += fa + fb;
        s_base += f.eval(&z[0])? * f.eval(&z[1])?;
    }
    let n = n as f64;
    let mean = s_mean / (2.0 * n);
    Ok((s_ab / n - mean * mean, (s_ab - s_base) / n))
}
