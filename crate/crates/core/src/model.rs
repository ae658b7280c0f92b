//! Points, variable subsets and the black-box function contract.
//!
//! Every estimator in the crate consumes a [`BlackBox`] defined on the
//! half-open cube `[0,1)^d` and indexes its output by a [`VarSubset`].
//! Subsets are bitmasks over the coordinates, so `d` is capped at
//! [`MAX_DIM`]; exhaustive lattice enumeration is further capped at
//! [`MAX_LATTICE_DIM`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ambient dimension representable by a 64-bit subset mask.
pub const MAX_DIM: usize = 63;

/// Largest dimension for which the full subset lattice may be enumerated.
pub const MAX_LATTICE_DIM: usize = 20;

/// A point of the half-open unit cube `[0,1)^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    /// Validates the coordinates. A coordinate exactly equal to `1.0` is
    /// wrapped to `0.0` (fractional part); anything else outside `[0,1)`
    /// is rejected.
    pub fn new(mut coords: Vec<f64>) -> Result<Self> {
        for (index, c) in coords.iter_mut().enumerate() {
            *c = wrap_unit(*c).ok_or(Error::OutOfDomain { index, value: *c })?;
        }
        Ok(Point(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn wrap_unit(c: f64) -> Option<f64> {
    if (0.0..1.0).contains(&c) {
        Some(c)
    } else if c == 1.0 {
        Some(0.0)
    } else {
        None
    }
}

/// Fractional part `{z} = z - floor(z)`, guaranteed to land in `[0,1)`.
#[inline]
pub fn frac(z: f64) -> f64 {
    let r = z - z.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A subset `u` of the coordinates `{1, ..., d}`, stored as a bitmask.
///
/// Bit `j` (0-based) corresponds to coordinate `j + 1`. Ordering is by
/// mask value, which is also the enumeration order of
/// [`enumerate_subsets`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarSubset {
    mask: u64,
    dim: u8,
}

impl VarSubset {
    pub fn new(mask: u64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if mask & !low_bits(dim) != 0 {
            return Err(Error::invalid(format!(
                "mask {mask:#x} has bits beyond dimension {dim}"
            )));
        }
        Ok(VarSubset {
            mask,
            dim: dim as u8,
        })
    }

    pub fn empty(dim: usize) -> Self {
        Self::new(0, dim).expect("dimension within limits")
    }

    pub fn full(dim: usize) -> Self {
        Self::new(low_bits(dim), dim).expect("dimension within limits")
    }

    /// Builds a subset from 1-based coordinate indices.
    pub fn from_indices(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &j in indices {
            if j == 0 || j > dim {
                return Err(Error::invalid(format!(
                    "index {j} outside 1..={dim}"
                )));
            }
            mask |= 1 << (j - 1);
        }
        Self::new(mask, dim)
    }

    /// The singleton `{j}` for a 1-based index `j`.
    pub fn singleton(dim: usize, j: usize) -> Result<Self> {
        Self::from_indices(dim, &[j])
    }

    pub fn mask(self) -> u64 {
        self.mask
    }

    pub fn dim(self) -> usize {
        self.dim as usize
    }

    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    pub fn is_full(self) -> bool {
        self.mask == low_bits(self.dim())
    }

    /// Membership test for a 0-based coordinate position.
    pub fn contains(self, pos: usize) -> bool {
        pos < 64 && self.mask >> pos & 1 == 1
    }

    pub fn complement(self) -> Self {
        VarSubset {
            mask: !self.mask & low_bits(self.dim()),
            dim: self.dim,
        }
    }

    pub fn union(self, other: Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        VarSubset {
            mask: self.mask | other.mask,
            dim: self.dim,
        }
    }

    pub fn intersection(self, other: Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        VarSubset {
            mask: self.mask & other.mask,
            dim: self.dim,
        }
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn is_proper_subset_of(self, other: Self) -> bool {
        self.is_subset_of(other) && self.mask != other.mask
    }

    /// 0-based positions of the members, ascending.
    pub fn positions(self) -> impl Iterator<Item = usize> {
        let mask = self.mask;
        (0..64).filter(move |&j| mask >> j & 1 == 1)
    }

    /// 1-based indices of the members, ascending.
    pub fn indices(self) -> Vec<usize> {
        self.positions().map(|j| j + 1).collect()
    }

    /// All subsets `v ⊆ self`, ascending by mask.
    pub fn subsets(self) -> Vec<VarSubset> {
        let mut out = Vec::with_capacity(1 << self.len());
        let mut v = 0u64;
        loop {
            out.push(VarSubset {
                mask: v,
                dim: self.dim,
            });
            if v == self.mask {
                break;
            }
            v = (v.wrapping_sub(self.mask)) & self.mask;
        }
        out
    }

    /// Parses `{1,3}` style notation (1-based; `{}` is the empty set).
    pub fn parse(dim: usize, text: &str) -> Result<Self> {
        let t = text.trim();
        let inner = t
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| Error::Parse {
                pos: 0,
                msg: format!("subset `{t}` must be written as {{i,j,...}}"),
            })?;
        let mut idx = Vec::new();
        for part in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let j: usize = part.parse().map_err(|_| Error::Parse {
                pos: 0,
                msg: format!("`{part}` is not a coordinate index"),
            })?;
            idx.push(j);
        }
        Self::from_indices(dim, &idx)
    }
}

impl fmt::Display for VarSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, j) in self.positions().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", j + 1)?;
        }
        f.write_str("}")
    }
}

fn low_bits(dim: usize) -> u64 {
    if dim >= 64 {
        u64::MAX
    } else {
        (1u64 << dim) - 1
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::TooLarge {
            dim,
            reason: format!("dimension must lie in 1..={MAX_DIM}"),
        });
    }
    Ok(())
}

/// `x_u : z_{-u}`, the point taking coordinates in `u` from `x` and the
/// rest from `z`.
pub fn glue(x: &Point, z: &Point, u: VarSubset) -> Result<Point> {
    if x.dim() != z.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: z.dim(),
        });
    }
    if u.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: u.dim(),
        });
    }
    let coords = x
        .coords()
        .iter()
        .zip(z.coords())
        .enumerate()
        .map(|(j, (&a, &b))| if u.contains(j) { a } else { b })
        .collect();
    Ok(Point(coords))
}

/// Filters accepted by [`enumerate_subsets`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubsetFilter {
    All,
    Nonempty,
    Singletons,
    UpToSize(usize),
}

const MAX_ENUMERATED: usize = 1 << MAX_LATTICE_DIM;

/// Lists subsets of `{1..d}` in ascending mask order.
pub fn enumerate_subsets(dim: usize, filter: SubsetFilter) -> Result<Vec<VarSubset>> {
    check_dim(dim)?;
    match filter {
        SubsetFilter::All | SubsetFilter::Nonempty => {
            if dim > MAX_LATTICE_DIM {
                return Err(Error::TooLarge {
                    dim,
                    reason: format!(
                        "the full lattice has 2^{dim} subsets; enumerate at most d={MAX_LATTICE_DIM}, \
                         or select singletons, pairs or explicit subsets"
                    ),
                });
            }
            let start = if filter == SubsetFilter::All { 0 } else { 1 };
            Ok((start..1u64 << dim)
                .map(|m| VarSubset {
                    mask: m,
                    dim: dim as u8,
                })
                .collect())
        }
        SubsetFilter::Singletons => Ok((0..dim)
            .map(|j| VarSubset {
                mask: 1 << j,
                dim: dim as u8,
            })
            .collect()),
        SubsetFilter::UpToSize(k) => {
            let k = k.min(dim);
            let count: f64 = (0..=k).map(|i| binomial(dim, i)).sum();
            if count > MAX_ENUMERATED as f64 {
                return Err(Error::TooLarge {
                    dim,
                    reason: format!(
                        "{count:.0} subsets of size <= {k}; reduce the size bound or select subsets explicitly"
                    ),
                });
            }
            let mut out = Vec::with_capacity(count as usize);
            let mut stack = vec![(0u64, 0usize)];
            while let Some((mask, next)) = stack.pop() {
                out.push(VarSubset {
                    mask,
                    dim: dim as u8,
                });
                if (mask.count_ones() as usize) < k {
                    for j in next..dim {
                        stack.push((mask | 1 << j, j + 1));
                    }
                }
            }
            out.sort_unstable();
            Ok(out)
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Moment summary of one factor `h = mu + tau * g` with `∫g = 0` and
/// `∫g² = 1`; `gamma = ∫g³`, `kappa = ∫g⁴`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentDescriptor {
    pub mu: f64,
    pub tau2: f64,
    pub gamma: f64,
    pub kappa: f64,
}

impl MomentDescriptor {
    pub fn tau(&self) -> f64 {
        self.tau2.sqrt()
    }
}

/// Which generalization of the Sobol' index is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Pick-freeze moment indices `ul-tau_u^(p)`.
    Moment,
    /// Fourier spectral indices `ul-tau_u^[p]`.
    Fourier,
    /// Walsh spectral indices in base `base`.
    Walsh { base: u32 },
}

impl Family {
    pub fn tag(&self) -> String {
        match self {
            Family::Moment => "moment".into(),
            Family::Fourier => "fourier".into(),
            Family::Walsh { base } => format!("walsh{base}"),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

/// A real function on `[0,1)^d`.
///
/// Implementations must be deterministic and free of side effects; the
/// estimators evaluate them concurrently from several threads.
pub trait BlackBox: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> Result<f64>;

    /// Evaluates `points.len() / dim` points stored back to back.
    fn eval_batch(&self, points: &[f64], out: &mut [f64]) -> Result<()> {
        let d = self.dim();
        for (x, y) in points.chunks_exact(d).zip(out.iter_mut()) {
            *y = self.eval(x)?;
        }
        Ok(())
    }
}

impl<T: BlackBox + ?Sized> BlackBox for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> Result<f64> {
        (**self).eval(x)
    }
    fn eval_batch(&self, points: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).eval_batch(points, out)
    }
}

impl<T: BlackBox + ?Sized> BlackBox for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> Result<f64> {
        (**self).eval(x)
    }
    fn eval_batch(&self, points: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).eval_batch(points, out)
    }
}

impl<T: BlackBox + ?Sized> BlackBox for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> Result<f64> {
        (**self).eval(x)
    }
    fn eval_batch(&self, points: &[f64], out: &mut [f64]) -> Result<()> {
        (**self).eval_batch(points, out)
    }
}

/// Adapts a plain closure into a [`BlackBox`].
pub struct FnBox<F> {
    dim: usize,
    f: F,
}

impl<F> BlackBox for FnBox<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok((self.f)(x))
    }
}

pub fn fn_box<F>(dim: usize, f: F) -> FnBox<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    FnBox { dim, f }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn glue_examples() {
        let x = pt(&[0.1, 0.2, 0.3]);
        let z = pt(&[0.7, 0.8, 0.9]);
        let u = VarSubset::from_indices(3, &[1, 3]).unwrap();
        assert_eq!(glue(&x, &z, u).unwrap(), pt(&[0.1, 0.8, 0.3]));
        assert_eq!(glue(&x, &z, VarSubset::full(3)).unwrap(), x);
        assert_eq!(glue(&x, &z, VarSubset::empty(3)).unwrap(), z);
    }

    #[test]
    fn glue_rejects_mismatch() {
        let x = pt(&[0.1, 0.2]);
        let z = pt(&[0.7, 0.8, 0.9]);
        assert!(matches!(
            glue(&x, &z, VarSubset::empty(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn complement_examples() {
        let u = VarSubset::from_indices(3, &[1, 3]).unwrap();
        assert_eq!(u.complement().indices(), vec![2]);
        assert_eq!(VarSubset::empty(3).complement(), VarSubset::full(3));
        assert_eq!(VarSubset::full(3).complement(), VarSubset::empty(3));
    }

    #[test]
    fn enumerate_examples() {
        let all = enumerate_subsets(2, SubsetFilter::All).unwrap();
        let shown: Vec<String> = all.iter().map(|u| u.to_string()).collect();
        assert_eq!(shown, ["{}", "{1}", "{2}", "{1,2}"]);
        let s = enumerate_subsets(3, SubsetFilter::Singletons).unwrap();
        assert_eq!(
            s.iter().map(|u| u.indices()).collect::<Vec<_>>(),
            vec![vec![1], vec![2], vec![3]]
        );
        let ne = enumerate_subsets(2, SubsetFilter::Nonempty).unwrap();
        assert_eq!(ne.len(), 3);
        assert_eq!(ne[2].indices(), vec![1, 2]);
    }

    #[test]
    fn enumerate_up_to_size_is_sorted_and_counted() {
        let v = enumerate_subsets(5, SubsetFilter::UpToSize(2)).unwrap();
        assert_eq!(v.len(), 1 + 5 + 10);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        let big = enumerate_subsets(63, SubsetFilter::UpToSize(2)).unwrap();
        assert_eq!(big.len(), 1 + 63 + 63 * 62 / 2);
    }

    #[test]
    fn enumerate_refuses_huge_lattice() {
        let err = enumerate_subsets(21, SubsetFilter::All).unwrap_err();
        assert!(err.to_string().contains("singletons"));
        assert!(enumerate_subsets(64, SubsetFilter::Singletons).is_err());
    }

    #[test]
    fn point_wraps_one_and_rejects_outside() {
        assert_eq!(pt(&[1.0, 0.5]).coords(), &[0.0, 0.5]);
        assert!(Point::new(vec![-0.1]).is_err());
        assert!(Point::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn subset_display_and_parse() {
        let u = VarSubset::parse(4, "{1, 3}").unwrap();
        assert_eq!(u.to_string(), "{1,3}");
        assert_eq!(VarSubset::parse(4, "{}").unwrap(), VarSubset::empty(4));
        assert!(VarSubset::parse(2, "{3}").is_err());
        assert!(VarSubset::parse(2, "1,2").is_err());
    }

    #[test]
    fn lattice_laws_exhaustive() {
        for d in 1..=5 {
            let all = enumerate_subsets(d, SubsetFilter::All).unwrap();
            for &a in &all {
                assert_eq!(a.complement().complement(), a);
                assert_eq!(a.subsets().len(), 1 << a.len());
                for &b in &all {
                    assert_eq!(a.union(b), b.union(a));
                    assert_eq!(a.intersection(b), b.intersection(a));
                    assert_eq!(a.union(a.intersection(b)), a);
                    assert_eq!(a.is_subset_of(b), a.union(b) == b);
                    assert_eq!(a.is_proper_subset_of(b), a.is_subset_of(b) && a != b);
                    assert_eq!(
                        a.union(b).complement(),
                        a.complement().intersection(b.complement())
                    );
                }
            }
        }
    }

    #[test]
    fn frac_stays_in_unit_interval() {
        assert_eq!(frac(-1e-18), 0.0);
        assert_eq!(frac(-0.25), 0.75);
        assert_eq!(frac(1.0), 0.0);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn point3() -> impl Strategy<Value = Point> {
            proptest::collection::vec(0.0..1.0f64, 3).prop_map(|c| Point::new(c).unwrap())
        }

        proptest! {
            #[test]
            fn glue_symmetry_and_idempotence(x in point3(), z in point3(), m in 0u64..8) {
                let u = VarSubset::new(m, 3).unwrap();
                let y = glue(&x, &z, u).unwrap();
                prop_assert_eq!(&y, &glue(&z, &x, u.complement()).unwrap());
                prop_assert_eq!(&glue(&y, &z, u).unwrap(), &y);
            }
        }
    }
}
