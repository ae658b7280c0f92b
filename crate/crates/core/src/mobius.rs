//! Möbius and zeta transforms on the subset lattice.
//!
//! Closed indices `ul-tau_u` and per-subset components `sigma_u` are related
//! by `ul-tau_u = Σ_{v ⊆ u} sigma_v` and its inverse
//! `sigma_u = Σ_{v ⊆ u} (-1)^{|u - v|} ul-tau_v`.
//!
//! Full lattices go through the in-place subset-sum transform in
//! `O(d · 2^d)`. Partial families must be downward closed; each requested
//! subset is then summed directly. Standard errors propagate as the root of
//! the summed variances, which assumes independent inputs and is therefore
//! approximate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{VarSubset, MAX_LATTICE_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetValue {
    pub value: f64,
    pub std_error: Option<f64>,
}

/// Values attached to subsets of `{1, ..., d}`. A missing `∅` reads as 0.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SubsetMap {
    dim: usize,
    entries: BTreeMap<VarSubset, SubsetValue>,
}

impl SubsetMap {
    pub fn new(dim: usize) -> Self {
        SubsetMap {
            dim,
            entries: BTreeMap::new(),
        }
    }

    /// A map over the full lattice from a dense array indexed by mask.
    pub fn from_dense(dim: usize, values: &[f64]) -> Result<Self> {
        if dim > MAX_LATTICE_DIM {
            return Err(Error::TooLarge {
                dim,
                reason: format!("dense lattices are limited to d <= {MAX_LATTICE_DIM}"),
            });
        }
        if values.len() != 1 << dim {
            return Err(Error::DimensionMismatch {
                expected: 1 << dim,
                got: values.len(),
            });
        }
        let mut map = Self::new(dim);
        for (mask, &v) in values.iter().enumerate() {
            map.insert(VarSubset::new(mask as u64, dim)?, v, None)?;
        }
        Ok(map)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, u: VarSubset, value: f64, std_error: Option<f64>) -> Result<()> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.dim(),
            });
        }
        self.entries.insert(u, SubsetValue { value, std_error });
        Ok(())
    }

    pub fn get(&self, u: VarSubset) -> Option<SubsetValue> {
        match self.entries.get(&u) {
            Some(v) => Some(*v),
            None if u.is_empty() => Some(SubsetValue {
                value: 0.0,
                std_error: None,
            }),
            None => None,
        }
    }

    pub fn value(&self, u: VarSubset) -> Option<f64> {
        self.get(u).map(|v| v.value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarSubset, SubsetValue)> + '_ {
        self.entries.iter().map(|(u, v)| (*u, *v))
    }

    /// Whether every subset of `{1..d}` has a value (`∅` may be implicit).
    pub fn is_full_lattice(&self) -> bool {
        self.dim <= MAX_LATTICE_DIM
            && self.entries.len() + usize::from(!self.entries.contains_key(&VarSubset::empty(self.dim)))
                == 1 << self.dim
    }

    fn missing_below(&self) -> Vec<VarSubset> {
        let mut missing = std::collections::BTreeSet::new();
        for u in self.entries.keys() {
            for v in u.subsets() {
                if self.get(v).is_none() {
                    missing.insert(v);
                }
            }
        }
        missing.into_iter().collect()
    }

    fn check_closed(&self) -> Result<()> {
        if self.entries.keys().any(|u| u.len() > MAX_LATTICE_DIM) {
            return Err(Error::TooLarge {
                dim: self.dim,
                reason: format!("subsets with more than {MAX_LATTICE_DIM} members"),
            });
        }
        let missing = self.missing_below();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::IncompleteLattice {
                missing: missing.iter().map(|v| v.to_string()).collect(),
            })
        }
    }

    fn has_errors(&self) -> bool {
        self.entries.values().any(|v| v.std_error.is_some())
    }
}

fn transform(input: &SubsetMap, signed: bool) -> Result<SubsetMap> {
    input.check_closed()?;
    let with_se = input.has_errors();
    let mut out = SubsetMap::new(input.dim);
    if input.is_full_lattice() {
        let d = input.dim;
        let mut vals = vec![0.0; 1 << d];
        let mut vars = vec![0.0; 1 << d];
        for (u, v) in input.iter() {
            vals[u.mask() as usize] = v.value;
            vars[u.mask() as usize] = v.std_error.unwrap_or(0.0).powi(2);
        }
        for bit in 0..d {
            for mask in 0..1usize << d {
                if mask & (1 << bit) != 0 {
                    let lower = mask ^ (1 << bit);
                    if signed {
                        vals[mask] -= vals[lower];
                    } else {
                        vals[mask] += vals[lower];
                    }
                    vars[mask] += vars[lower];
                }
            }
        }
        for (mask, &v) in vals.iter().enumerate() {
            let se = with_se.then(|| vars[mask].sqrt());
            out.insert(VarSubset::new(mask as u64, d)?, v, se)?;
        }
    } else {
        for (u, _) in input.iter() {
            let mut acc = 0.0;
            let mut var = 0.0;
            for v in u.subsets() {
                let entry = input.get(v).expect("closedness checked");
                let sign = if signed && (u.len() - v.len()) % 2 == 1 { -1.0 } else { 1.0 };
                acc += sign * entry.value;
                var += entry.std_error.unwrap_or(0.0).powi(2);
            }
            out.insert(u, acc, with_se.then(|| var.sqrt()))?;
        }
    }
    Ok(out)
}

/// `sigma_u = Σ_{v ⊆ u} (-1)^{|u - v|} cum(v)` for every subset in `cum`.
pub fn moebius_transform(cum: &SubsetMap) -> Result<SubsetMap> {
    transform(cum, true)
}

/// `cum(u) = Σ_{v ⊆ u} comp(v)` for every subset in `comp`.
pub fn zeta_transform(comp: &SubsetMap) -> Result<SubsetMap> {
    transform(comp, false)
}
