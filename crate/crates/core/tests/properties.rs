//! Structural invariants checked on random inputs.

use hosi::exec::Executor;
use hosi::mobius::{moebius_transform, zeta_transform, SubsetMap};
use hosi::model::VarSubset;
use hosi::moment::estimate_difference;
use hosi::oracles::{Factor, GridFunction, IndexOracle, ProductFunction, RectangleOracle};
use hosi::sampling::PickFreezeDesign;
use hosi::spectral::{
    estimate_ult_spectral, exact_sigma_p, exact_ult_spectral, SpectralDesign, SpectralForm,
    TrigPolynomial,
};
use hosi::walsh::estimate_ult_walsh;
use hosi::Family;
use num_complex::Complex64;
use proptest::prelude::*;

fn subsets(d: usize) -> impl Iterator<Item = VarSubset> {
    (0..1u64 << d).map(move |m| VarSubset::new(m, d).unwrap())
}

fn trig_poly(d: usize) -> impl Strategy<Value = TrigPolynomial> {
    let term = (
        prop::collection::vec(-2i64..=2, d),
        -1.0f64..1.0,
        -1.0f64..1.0,
    );
    prop::collection::vec(term, 1..12).prop_map(move |terms| {
        TrigPolynomial::from_terms(d, terms.into_iter().map(|(k, re, im)| (k, Complex64::new(re, im)))).unwrap()
    })
}

/// A product of factors that a grid of `cells` cells per axis represents
/// exactly: tables of that length and indicators on cell boundaries.
fn grid_product(cells: usize) -> impl Strategy<Value = Vec<Factor>> {
    let factor = prop_oneof![
        prop::collection::vec(-1.0f64..2.0, cells).prop_map(|values| Factor::Table { values }),
        (1..cells, 0..cells).prop_map(move |(w, o)| Factor::Indicator {
            eps: w as f64 / cells as f64,
            offset: (o.min(cells - w)) as f64 / cells as f64,
        }),
    ];
    prop::collection::vec(factor, 1..=3)
}

fn tabulate(factors: &[Factor], cells: usize) -> GridFunction {
    let d = factors.len();
    let total = cells.pow(d as u32);
    let values = (0..total)
        .map(|flat| {
            let mut rest = flat;
            let mut idx = vec![0; d];
            for slot in idx.iter_mut().rev() {
                *slot = rest % cells;
                rest /= cells;
            }
            factors
                .iter()
                .zip(&idx)
                .map(|(f, &i)| f.eval((i as f64 + 0.5) / cells as f64))
                .product()
        })
        .collect();
    GridFunction::new(vec![cells; d], values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sigma_splits_over_anova_parts(f in trig_poly(2), p in 2usize..=4) {
        let whole = exact_sigma_p(&f, p);
        let parts: Complex64 = subsets(2).map(|u| exact_sigma_p(&f.anova_part(u), p)).sum();
        prop_assert!((whole - parts).norm() < 1e-12);
    }

    #[test]
    fn closed_index_sums_parts_below(f in trig_poly(2), p in 2usize..=4) {
        for u in subsets(2).filter(|u| !u.is_empty()) {
            let below: Complex64 = u.subsets().into_iter().map(|v| exact_sigma_p(&f.anova_part(v), p)).sum();
            let closed = exact_ult_spectral(&f, u, p) + f.mean().powi(p as i32);
            prop_assert!((below - closed).norm() < 1e-12);
        }
    }

    #[test]
    fn closed_forms_match_tabulated_grids(factors in grid_product(4), p in 2u32..=4) {
        let f = ProductFunction::new(factors.clone()).unwrap();
        let g = tabulate(&factors, 4);
        for u in subsets(factors.len()) {
            let scale = 1.0 + g.moment_ult_pickfreeze(u, p).unwrap().abs();
            prop_assert!((f.moment_ult(u, p).unwrap() - g.moment_ult_pickfreeze(u, p).unwrap()).abs() < 1e-10 * scale);
            if p % 2 == 0 {
                let fourier = (f.fourier_ult(u, p).unwrap(), g.fourier_ult(u, p).unwrap());
                prop_assert!((fourier.0 - fourier.1).abs() < 1e-10 * (1.0 + fourier.1.abs()));
                // indicators off the origin have no closed Walsh form
                if let Ok(closed) = f.walsh_ult(u, p, 2) {
                    let exact = g.walsh_ult(u, p, 2).unwrap();
                    prop_assert!((closed - exact).abs() < 1e-10 * (1.0 + exact.abs()));
                }
            }
        }
    }

    #[test]
    fn even_order_exact_indices_are_monotone(factors in grid_product(4), p in prop::sample::select(vec![2u32, 4])) {
        let f = ProductFunction::new(factors.clone()).unwrap();
        let d = factors.len();
        for family in [Family::Moment, Family::Fourier, Family::Walsh { base: 2 }] {
            if f.ult(family, VarSubset::full(d), p).is_err() {
                continue;
            }
            for u in subsets(d) {
                let a = f.ult(family, u, p).unwrap();
                prop_assert!(a >= 0.0);
                for v in subsets(d).filter(|v| u.is_subset_of(*v)) {
                    prop_assert!(a <= f.ult(family, v, p).unwrap(), "{} {u} {v}", family.tag());
                }
            }
        }
    }

    #[test]
    fn narrower_rectangles_weigh_more(a in 0.01f64..0.49, b in 0.01f64..0.49, other in 0.05f64..0.5) {
        prop_assume!((a - b).abs() > 1e-3);
        let (narrow, wide) = if a < b { (a, b) } else { (b, a) };
        let r = RectangleOracle::new(&[narrow, wide, other]).unwrap();
        let first = VarSubset::from_indices(3, &[1]).unwrap();
        let second = VarSubset::from_indices(3, &[2]).unwrap();
        for p in [3, 4] {
            prop_assert!(r.moment_ult(first, p) > r.moment_ult(second, p));
        }
        prop_assert!(r.fourier_ult(first, 4).unwrap() > r.fourier_ult(second, 4).unwrap());
    }

    #[test]
    fn zeta_of_nonnegative_components_is_monotone(values in prop::collection::vec(0.0f64..1.0, 16)) {
        let mut comps = SubsetMap::new(4);
        for (u, &v) in subsets(4).zip(&values).skip(1) {
            comps.insert(u, v, None).unwrap();
        }
        let closed = zeta_transform(&comps).unwrap();
        for u in subsets(4) {
            for v in subsets(4).filter(|v| u.is_subset_of(*v)) {
                prop_assert!(closed.value(u).unwrap_or(0.0) <= closed.value(v).unwrap_or(0.0));
            }
        }
        let back = moebius_transform(&closed).unwrap();
        for (u, c) in comps.iter() {
            prop_assert!((back.value(u).unwrap() - c.value).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn spectral_estimates_ignore_worker_count(seed in any::<u64>(), n in 2usize..6000, base in 2u32..5, reduced in any::<bool>()) {
        let f = ProductFunction::g_function(&[0.0, 1.0, 4.0]).unwrap();
        let u = VarSubset::from_indices(3, &[1, 3]).unwrap();
        let form = if reduced { SpectralForm::Reduced } else { SpectralForm::Full };
        let design = SpectralDesign::build(seed, n, 3, 4, u, form).unwrap();
        let one = estimate_ult_spectral(&f, &design, &Executor::serial()).unwrap();
        let many = estimate_ult_spectral(&f, &design, &Executor::new(5)).unwrap();
        prop_assert_eq!(one.value.to_bits(), many.value.to_bits());
        prop_assert_eq!(one.std_error.to_bits(), many.std_error.to_bits());
        let one = estimate_ult_walsh(&f, base, &design, &Executor::serial()).unwrap();
        let many = estimate_ult_walsh(&f, base, &design, &Executor::new(3)).unwrap();
        prop_assert_eq!(one.value.to_bits(), many.value.to_bits());
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn difference_estimator_is_unbiased() {
    let f = ProductFunction::new(vec![
        Factor::Linear { mu: 1.0, tau: 0.5 },
        Factor::Cosine { mu: 0.5, tau: 0.7 },
        Factor::GFunction { a: 1.0 },
    ])
    .unwrap();
    let exec = Executor::serial();
    for p in 2..=4u32 {
        for u in subsets(3).filter(|u| !u.is_empty()) {
            let values: Vec<f64> = (0..200u64)
                .map(|seed| {
                    let design = PickFreezeDesign::build(seed, 1000, 3, p as usize, u).unwrap();
                    estimate_difference(&f, &design, &exec).unwrap().value
                })
                .collect();
            let (mean, se) = mean_and_se(&values);
            let exact = f.moment_ult(u, p).unwrap();
            assert!((mean - exact).abs() <= 4.0 * se, "p={p} u={u}: {mean} vs {exact} (se {se})");
        }
    }
}

#[test]
fn full_and_reduced_forms_agree_on_oracle_functions() {
    let functions: Vec<(&str, ProductFunction)> = vec![
        ("rectangle", ProductFunction::rectangle(&[0.5, 0.25]).unwrap()),
        ("g-function", ProductFunction::g_function(&[0.0, 1.0, 9.0]).unwrap()),
        (
            "mixed",
            ProductFunction::new(vec![
                Factor::Linear { mu: 1.0, tau: 0.5 },
                Factor::Table { values: vec![0.0, 1.0, 3.0, 2.0] },
            ])
            .unwrap(),
        ),
    ];
    let exec = Executor::default();
    for (name, f) in &functions {
        let d = IndexOracle::dim(f);
        let u = VarSubset::full(d);
        for (family, base) in [(Family::Fourier, None), (Family::Walsh { base: 2 }, Some(2))] {
            let estimate = |seed, form| {
                let design = SpectralDesign::build(seed, 100_000, d, 4, u, form).unwrap();
                match base {
                    Some(b) => estimate_ult_walsh(f, b, &design, &exec).unwrap(),
                    None => estimate_ult_spectral(f, &design, &exec).unwrap(),
                }
            };
            let a = estimate(31, SpectralForm::Full);
            let b = estimate(32, SpectralForm::Reduced);
            let combined = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            assert!(
                (a.value - b.value).abs() <= 3.0 * combined,
                "{name} {}: {} vs {} ({combined})",
                family.tag(),
                a.value,
                b.value
            );
            assert!(a.value > -3.0 * a.std_error && b.value > -3.0 * b.std_error);
        }
    }
}

#[test]
fn walsh_estimates_converge_to_grid_transforms() {
    let binary = GridFunction::new(vec![4, 8], (0..32).map(|i| ((i * 7) % 5) as f64 - 1.5).collect()).unwrap();
    let ternary = GridFunction::new(vec![9, 3], (0..27).map(|i| ((i * 5) % 7) as f64 * 0.3).collect()).unwrap();
    let exec = Executor::default();
    for (g, base) in [(&binary, 2u32), (&ternary, 3)] {
        for u in subsets(2).filter(|u| !u.is_empty()) {
            for p in [2usize, 4] {
                let design = SpectralDesign::build(40 + u.mask(), 100_000, 2, p, u, SpectralForm::Full).unwrap();
                let est = estimate_ult_walsh(g, base, &design, &exec).unwrap();
                let exact = g.walsh_ult(u, p as u32, base).unwrap();
                assert!(
                    (est.value - exact).abs() <= 3.0 * est.std_error,
                    "base {base} u={u} p={p}: {} vs {exact} (se {})",
                    est.value,
                    est.std_error
                );
            }
        }
    }
}
