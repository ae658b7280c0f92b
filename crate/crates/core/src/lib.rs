//! Higher-order Sobol' sensitivity indices.
//!
//! Three families generalize the classical `p = 2` indices:
//!
//! - moment indices `ul-tau_u^(p)`, estimated by pick-freeze designs
//!   ([`moment`]);
//! - Fourier spectral indices `ul-tau_u^[p]`, built on a cyclic
//!   multilinear operator ([`spectral`]);
//! - their Walsh counterparts over base-`b` digit arithmetic ([`walsh`]).
//!
//! [`mobius`] turns closed indices into ANOVA components, and [`oracles`]
//! holds closed-form and brute-force reference values.

pub mod cli;
pub mod error;
pub mod exec;
pub mod mobius;
pub mod model;
pub mod moment;
pub mod oracles;
pub mod sampling;
pub mod spectral;
pub mod walsh;

pub use error::{Error, Result};
pub use exec::Executor;
pub use mobius::{moebius_transform, zeta_transform, SubsetMap};
pub use model::{fn_box, BlackBox, Family, MomentDescriptor, Point, SubsetFilter, VarSubset};
pub use moment::{IndexEstimate, MomentEstimator};
pub use oracles::IndexOracle;
pub use sampling::{PickFreezeDesign, PointSet};
pub use spectral::{SpectralDesign, SpectralEstimate, SpectralForm};
