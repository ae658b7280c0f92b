//! Seedable sampling and pick-freeze designs.
//!
//! Replicate `i` of any design draws its variates from ChaCha8 stream `i`
//! under a key derived from the design seed, so a replicate can be
//! regenerated in isolation and results do not depend on how replicates
//! are distributed over threads. A randomly shifted rank-1 lattice can be
//! swapped in for the pseudo-random points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{frac, Point, VarSubset};

/// A deterministic uniform stream identified by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct SampleStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl SampleStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self::from_key(seed, &key_for(seed), stream_id)
    }

    fn from_key(seed: u64, key: &[u8; 32], stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::from_seed(*key);
        rng.set_stream(stream_id);
        SampleStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// One uniform variate on `[0,1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.next_f64();
        }
    }

    /// `d` consecutive variates as a point of `[0,1)^d`.
    pub fn uniform_point(&mut self, d: usize) -> Point {
        let mut c = vec![0.0; d];
        self.fill(&mut c);
        Point::new(c).expect("uniform variates lie in [0,1)")
    }
}

fn key_for(seed: u64) -> [u8; 32] {
    ChaCha8Rng::seed_from_u64(seed).get_seed()
}

/// Mixes a tag into a seed to obtain an independent child seed.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Which point set feeds a design.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointSet {
    #[default]
    MonteCarlo,
    ShiftedLattice,
}

/// Produces replicate `i` of an `n`-point set in `[0,1)^dim`.
#[derive(Clone, Debug)]
pub(crate) enum PointGenerator {
    Random {
        seed: u64,
        key: [u8; 32],
    },
    Lattice {
        n: u64,
        generator: Vec<u64>,
        shift: Vec<f64>,
    },
}

impl PointGenerator {
    pub(crate) fn new(kind: PointSet, seed: u64, n: usize, dim: usize) -> Self {
        match kind {
            PointSet::MonteCarlo => PointGenerator::Random {
                seed,
                key: key_for(seed),
            },
            PointSet::ShiftedLattice => {
                let mut s = SampleStream::new(derive_seed(seed, 0x1a77), 0);
                let mut shift = vec![0.0; dim];
                s.fill(&mut shift);
                PointGenerator::Lattice {
                    n: n as u64,
                    generator: korobov_generator(n as u64, dim),
                    shift,
                }
            }
        }
    }

    #[inline]
    pub(crate) fn fill(&self, i: usize, out: &mut [f64]) {
        match self {
            PointGenerator::Random { seed, key } => {
                SampleStream::from_key(*seed, key, i as u64).fill(out);
            }
            PointGenerator::Lattice {
                n,
                generator,
                shift,
            } => {
                for ((o, &g), &s) in out.iter_mut().zip(generator).zip(shift) {
                    *o = lattice_coord(i as u64, g, *n, s);
                }
            }
        }
    }
}

#[inline]
fn lattice_coord(index: u64, g: u64, n: u64, shift: f64) -> f64 {
    let r = ((index as u128 * g as u128) % n as u128) as f64 / n as f64;
    frac(r + shift)
}

/// Point `index` of the rank-1 Korobov lattice with `n` points in
/// dimension `d`, shifted by `shift` modulo one.
pub fn lattice_point(index: usize, n: usize, d: usize, shift: &Point) -> Result<Point> {
    if n == 0 || index >= n {
        return Err(Error::invalid(format!(
            "lattice index {index} outside 0..{n}"
        )));
    }
    if shift.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: shift.dim(),
        });
    }
    let g = korobov_generator(n as u64, d);
    let c = g
        .iter()
        .zip(shift.coords())
        .map(|(&gj, &s)| lattice_coord(index as u64, gj, n as u64, s))
        .collect();
    Point::new(c)
}

/// Korobov generating vector `(1, a, a^2, ...) mod n`.
///
/// `a` minimizes the `P_2` worst-case error criterion over a fixed,
/// deterministic candidate list when that search is cheap, and is
/// otherwise the unit nearest to `n` times the golden section.
pub fn korobov_generator(n: u64, d: usize) -> Vec<u64> {
    if d <= 1 || n <= 2 {
        return vec![1; d];
    }
    let golden = nearest_unit(n, (n as f64 * 0.618_033_988_749_894_9).round() as u64);
    let mut candidates: Vec<u64> = if n <= 66 {
        (1..n).filter(|&a| gcd(a, n) == 1).collect()
    } else {
        (1..=64u64)
            .map(|k| {
                let t = (k as f64 * 0.618_033_988_749_894_9).fract();
                nearest_unit(n, ((n as f64) * t).round() as u64)
            })
            .collect()
    };
    candidates.push(golden);
    candidates.sort_unstable();
    candidates.dedup();
    let budget = 20_000_000u64;
    let chosen = if n.saturating_mul(d as u64).saturating_mul(candidates.len() as u64) <= budget {
        candidates
            .iter()
            .copied()
            .map(|a| (p2_criterion(n, &powers(a, n, d)), a))
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
            .map(|(_, a)| a)
            .unwrap_or(golden)
    } else {
        golden
    };
    powers(chosen, n, d)
}

fn powers(a: u64, n: u64, d: usize) -> Vec<u64> {
    let mut g = Vec::with_capacity(d);
    let mut cur = 1 % n;
    for _ in 0..d {
        g.push(cur);
        cur = ((cur as u128 * a as u128) % n as u128) as u64;
    }
    g
}

fn p2_criterion(n: u64, g: &[u64]) -> f64 {
    let two_pi2 = 2.0 * std::f64::consts::PI.powi(2);
    let mut total = 0.0;
    for i in 0..n {
        let mut prod = 1.0;
        for &gj in g {
            let x = ((i as u128 * gj as u128) % n as u128) as f64 / n as f64;
            prod *= 1.0 + two_pi2 * (x * x - x + 1.0 / 6.0);
        }
        total += prod;
    }
    total / n as f64 - 1.0
}

fn nearest_unit(n: u64, start: u64) -> u64 {
    let start = start.clamp(1, n - 1);
    for off in 0..n {
        for cand in [start.saturating_sub(off), start + off] {
            if cand >= 1 && cand < n && gcd(cand, n) == 1 {
                return cand;
            }
        }
    }
    1
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The pick-freeze design for `ul-tau_u^(p)`.
///
/// Replicate `i` consists of a shared block `x_u` (|u| coordinates) and
/// `p` independent complement blocks `z^(1..p)`, each a full point of
/// `[0,1)^d`. The design is generated lazily: [`PickFreezeDesign::replicate`]
/// recomputes replicate `i` from the seed on demand.
#[derive(Clone, Debug)]
pub struct PickFreezeDesign {
    seed: u64,
    n: usize,
    d: usize,
    p: usize,
    u: VarSubset,
    points: PointSet,
    generator: PointGenerator,
}

impl PickFreezeDesign {
    pub fn build(seed: u64, n: usize, d: usize, p: usize, u: VarSubset) -> Result<Self> {
        Self::with_points(seed, n, d, p, u, PointSet::MonteCarlo)
    }

    pub fn with_points(
        seed: u64,
        n: usize,
        d: usize,
        p: usize,
        u: VarSubset,
        points: PointSet,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("replicate count n must be positive"));
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
        let width = u.len() + p * d;
        Ok(PickFreezeDesign {
            seed,
            n,
            d,
            p,
            u,
            points,
            generator: PointGenerator::new(points, seed, n, width),
        })
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
    pub fn point_set(&self) -> PointSet {
        self.points
    }

    /// Uniform variates per replicate: `|u| + p·d`.
    pub fn width(&self) -> usize {
        self.u.len() + self.p * self.d
    }

    /// Raw variates of replicate `i`: `x_u` first, then `z^(1)`, ..., `z^(p)`.
    pub fn replicate(&self, i: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.width());
        self.generator.fill(i, out);
    }

    /// Replicate `i` split into its `x_u` block and its `p` complement blocks.
    pub fn replicate_blocks(&self, i: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut raw = vec![0.0; self.width()];
        self.replicate(i, &mut raw);
        let k = self.u.len();
        let x = raw[..k].to_vec();
        let z = raw[k..].chunks_exact(self.d).map(<[f64]>::to_vec).collect();
        (x, z)
    }

    /// The whole design as `(x_blocks, z_blocks)`.
    pub fn materialize(&self) -> (Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>) {
        (0..self.n).map(|i| self.replicate_blocks(i)).unzip()
    }
}

/// Convenience wrapper for [`PickFreezeDesign::build`].
pub fn build_pickfreeze(
    seed: u64,
    n: usize,
    d: usize,
    p: usize,
    u: VarSubset,
) -> Result<PickFreezeDesign> {
    PickFreezeDesign::build(seed, n, d, p, u)
}
