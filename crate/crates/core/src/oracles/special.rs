//! Zeta functions and Gauss–Legendre quadrature.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// `B_{2k} / (2k)!` for `k = 1..=10`.
const BERNOULLI_SCALED: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 510.0 / 20922789888000.0,
    43867.0 / 798.0 / 6402373705728000.0,
    -174611.0 / 330.0 / 2432902008176640000.0,
];

/// Hurwitz zeta `ζ(s, a) = Σ_{n >= 0} (n + a)^{-s}` for `s > 1`, `a > 0`,
/// by Euler–Maclaurin summation.
pub fn hurwitz_zeta(s: f64, a: f64) -> Result<f64> {
    if !(s > 1.0) || !(a > 0.0) {
        return Err(Error::invalid(format!(
            "Hurwitz zeta needs s > 1 and a > 0, got s = {s}, a = {a}"
        )));
    }
    const HEAD: usize = 16;
    let mut sum = 0.0;
    for n in 0..HEAD {
        sum += (n as f64 + a).powf(-s);
    }
    let x = HEAD as f64 + a;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising factorial s (s+1) ... (s+2k-2) times x^{-s-2k+1}
    let mut rising = s;
    let mut power = x.powf(-s - 1.0);
    for (k, &b) in BERNOULLI_SCALED.iter().enumerate() {
        let term = b * rising * power;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        let j = 2.0 * k as f64;
        rising *= (s + j + 1.0) * (s + j + 2.0);
        power /= x * x;
    }
    Ok(sum)
}

/// Riemann zeta for `s > 1`.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    hurwitz_zeta(s, 1.0)
}

/// Gauss–Legendre rule with `n` nodes on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            deriv = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let step = pn / deriv;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[i] = (1.0 - x) / 2.0;
        nodes[n - 1 - i] = (1.0 + x) / 2.0;
        weights[i] = w / 2.0;
        weights[n - 1 - i] = w / 2.0;
    }
    (nodes, weights)
}

fn rule64() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(64))
}

/// `∫_0^1 g`, splitting at `breaks` and applying a 64-node rule to each
/// of `pieces` equal sub-intervals of every smooth piece.
pub fn integrate_unit(g: impl Fn(f64) -> f64, breaks: &[f64], pieces: usize) -> f64 {
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&b| b > 0.0 && b < 1.0)
        .collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let (nodes, weights) = rule64();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let h = (w[1] - w[0]) / pieces as f64;
        for piece in 0..pieces {
            let a = w[0] + piece as f64 * h;
            total += h * nodes
                .iter()
                .zip(weights)
                .map(|(&t, &wt)| wt * g(a + t * h))
                .sum::<f64>();
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_values() {
        assert!((riemann_zeta(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-15);
        assert!((riemann_zeta(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((riemann_zeta(8.0).unwrap() - PI.powi(8) / 9450.0).abs() < 1e-15);
        // ζ(2, 1/2) = 3 ζ(2)
        assert!((hurwitz_zeta(2.0, 0.5).unwrap() - PI * PI / 2.0).abs() < 1e-13);
        assert!(hurwitz_zeta(1.0, 0.5).is_err());
    }

    #[test]
    fn hurwitz_matches_direct_sum() {
        for &(s, a) in &[(3.0, 0.125), (2.5, 0.9), (6.0, 0.01), (2.0, 0.3)] {
            let direct: f64 = (0..2_000_000).map(|n| (n as f64 + a).powf(-s)).sum::<f64>()
                + (2_000_000.0 + a).powf(1.0 - s) / (s - 1.0);
            let z = hurwitz_zeta(s, a).unwrap();
            assert!((z - direct).abs() < 1e-9 * z, "s={s} a={a}: {z} vs {direct}");
        }
    }

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for k in 0..16 {
            let q: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(k)).sum();
            assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn piecewise_integration() {
        let v = integrate_unit(|x| (4.0 * x - 2.0).abs(), &[0.5], 1);
        assert!((v - 1.0).abs() < 1e-15);
        let c = integrate_unit(|x| (2.0 * PI * x).cos().powi(4), &[], 4);
        assert!((c - 0.375).abs() < 1e-15);
    }
}
