mod common;

use std::collections::BTreeMap;

use common::*;
use daseinkit::contexts::{build_category, coarsenings, is_leq, CategoryOptions, ContextCategory};
use daseinkit::daseinise::{inner_selfadjoint, outer_selfadjoint};
use daseinkit::gauge::{conditional_expectation, find_s2_automorphism, takeuti_gauge};
use daseinkit::interp::StageFamily;
use daseinkit::linalg::{
    eigendecompose, is_psd, op_add, op_scale, random_hermitian, ComplexMatrix, HermitianOperator, C64,
};
use daseinkit::sheaf::{build_spectral_presheaf, heyting_suite};
use proptest::prelude::*;
use rand::Rng;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

fn minus(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    op_add(a, &op_scale(C64::new(-1.0, 0.0), b)).unwrap()
}

/// Operator with small integer eigenvalues, so spectra are often degenerate.
fn degenerate_operator<R: Rng>(r: &mut R, dim: usize) -> HermitianOperator {
    let (_, _, v) = random_context(r, dim);
    let values: Vec<f64> = (0..v.len()).map(|_| r.random_range(-2..=2) as f64).collect();
    v.synthesize(&values)
}

/// Category generated by one to three operators, some of them commuting.
fn random_category(seed: u64) -> ContextCategory {
    let mut r = rng(seed);
    let dim = r.random_range(2..=4);
    let count = r.random_range(1..=3);
    let mut ops = Vec::new();
    for _ in 0..count {
        let op = match (ops.last(), r.random_range(0..3)) {
            (Some(prev), 0) => {
                // a function of the previous generator commutes with it
                let d = eigendecompose(prev, &tol()).unwrap();
                let mut m = ComplexMatrix::zeros(dim);
                for p in d.projections() {
                    m = op_add(&m, &op_scale(C64::new(r.random_range(-1..=1) as f64, 0.0), p.matrix())).unwrap();
                }
                HermitianOperator::new(m.hermitian_part(), &tol()).unwrap()
            }
            (_, 1) => random_hermitian(&mut r, dim),
            _ => degenerate_operator(&mut r, dim),
        };
        ops.push(op);
    }
    build_category(&ops, &CategoryOptions::default(), &tol(), seed).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn decomposition_reconstructs(seed in any::<u64>(), dim in 2usize..=12, degenerate in any::<bool>()) {
        let mut r = rng(seed);
        let a = if degenerate { degenerate_operator(&mut r, dim) } else { random_hermitian(&mut r, dim) };
        let d = eigendecompose(&a, &tol()).unwrap();
        prop_assert!(d.reconstruct().dist(a.matrix()) <= 1e-10 * (1.0 + a.matrix().max_abs()));
        let mut sum = ComplexMatrix::zeros(dim);
        for p in d.projections() {
            prop_assert!(p.idempotency_defect() <= 1e-10);
            sum = op_add(&sum, p.matrix()).unwrap();
        }
        prop_assert!(sum.dist(&ComplexMatrix::identity(dim)) <= 1e-10);
        prop_assert!(d.eigenvalues().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn daseinisation_bounds(seed in any::<u64>(), dim in 2usize..=8) {
        let t = tol();
        let mut r = rng(seed);
        let a = if r.random_bool(0.5) { degenerate_operator(&mut r, dim) } else { random_hermitian(&mut r, dim) };
        let (_, _, v) = random_context(&mut r, dim);
        let outer = outer_selfadjoint(&a, &v, &t).unwrap();
        let inner = inner_selfadjoint(&a, &v, &t).unwrap();
        prop_assert!(is_psd(&minus(outer.operator.matrix(), a.matrix()), 1e-8).unwrap());
        prop_assert!(is_psd(&minus(a.matrix(), inner.operator.matrix()), 1e-8).unwrap());
        let spec = eigendecompose(&a, &t).unwrap();
        for x in outer.atom_values.iter().chain(&inner.atom_values) {
            prop_assert!(spec.eigenvalues().iter().any(|e| (e - x).abs() <= 1e-8));
        }
    }

    #[test]
    fn daseinisation_is_antitone_along_coarsening(seed in any::<u64>(), dim in 2usize..=5) {
        let t = tol();
        let mut r = rng(seed);
        let a = random_hermitian(&mut r, dim);
        let (_, _, v) = random_context(&mut r, dim);
        let fine = outer_selfadjoint(&a, &v, &t).unwrap();
        let fine_inner = inner_selfadjoint(&a, &v, &t).unwrap();
        for w in coarsenings(&v, &t).unwrap() {
            prop_assert!(is_leq(&w, &v, &t).unwrap());
            let coarse = outer_selfadjoint(&a, &w, &t).unwrap();
            let coarse_inner = inner_selfadjoint(&a, &w, &t).unwrap();
            prop_assert!(is_psd(&minus(coarse.operator.matrix(), fine.operator.matrix()), 1e-8).unwrap());
            prop_assert!(is_psd(&minus(fine_inner.operator.matrix(), coarse_inner.operator.matrix()), 1e-8).unwrap());
        }
    }

    #[test]
    fn members_are_fixed(seed in any::<u64>(), dim in 2usize..=8) {
        let t = tol();
        let mut r = rng(seed);
        let (_, _, v) = random_context(&mut r, dim);
        let values: Vec<f64> = (0..v.len()).map(|_| r.random_range(-3.0..3.0)).collect();
        let a = v.synthesize(&values);
        let outer = outer_selfadjoint(&a, &v, &t).unwrap();
        let inner = inner_selfadjoint(&a, &v, &t).unwrap();
        prop_assert!(outer.operator.matrix().dist(a.matrix()) <= 1e-8);
        prop_assert!(inner.operator.matrix().dist(a.matrix()) <= 1e-8);
    }

    #[test]
    fn conditional_expectation_is_a_unital_idempotent(seed in any::<u64>(), dim in 2usize..=8) {
        let mut r = rng(seed);
        let (_, _, v) = random_context(&mut r, dim);
        let m = ComplexMatrix::from_fn(dim, |_, _| C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
        let (e, _) = conditional_expectation(&m, &v).unwrap();
        let (ee, _) = conditional_expectation(&e, &v).unwrap();
        prop_assert!(ee.dist(&e) <= 1e-12);
        let (id, _) = conditional_expectation(&ComplexMatrix::identity(dim), &v).unwrap();
        prop_assert!(id.dist(&ComplexMatrix::identity(dim)) <= 1e-12);
        let member = v.synthesize(&(0..v.len()).map(|i| i as f64 - 1.5).collect::<Vec<_>>());
        let (fixed, _) = conditional_expectation(member.matrix(), &v).unwrap();
        prop_assert!(fixed.dist(member.matrix()) <= 1e-12);
    }

    #[test]
    fn category_order_and_meets(seed in any::<u64>()) {
        let cat = random_category(seed);
        let n = cat.len();
        for i in 0..n {
            prop_assert!(cat.leq(i, i));
            for j in 0..n {
                if i != j {
                    prop_assert!(!(cat.leq(i, j) && cat.leq(j, i)));
                }
                for k in 0..n {
                    if cat.leq(i, j) && cat.leq(j, k) {
                        prop_assert!(cat.leq(i, k));
                    }
                }
                let m = cat.meet(i, j);
                prop_assert!(m.is_some());
                let m = m.unwrap();
                prop_assert!(cat.leq(m, i) && cat.leq(m, j));
            }
        }
        prop_assert!(cat.trivial_index().is_some());
    }

    #[test]
    fn category_is_deterministic(seed in any::<u64>()) {
        let ids = |c: &ContextCategory| c.contexts().iter().map(|v| v.id().to_string()).collect::<Vec<_>>();
        prop_assert_eq!(ids(&random_category(seed)), ids(&random_category(seed)));
    }

    #[test]
    fn heyting_laws_and_functoriality(seed in any::<u64>()) {
        let cat = random_category(seed);
        let sigma = build_spectral_presheaf(&cat, &tol()).unwrap();
        let report = heyting_suite(&sigma, 60, &mut rng(seed)).unwrap();
        prop_assert!(report.failures.is_empty(), "{:?}", report.failures);
        prop_assert!(report.functorial);
        prop_assert!(sigma.first_noncommuting_triangle().is_none());
    }

    #[test]
    fn s2_search_replays(seed in any::<u64>()) {
        let t = tol();
        let cat = random_category(seed);
        let mut r = rng(seed ^ 0x5eed);
        let mut f1 = BTreeMap::new();
        let mut f2 = BTreeMap::new();
        for v in cat.contexts() {
            let vals: Vec<f64> = (0..v.len()).map(|_| r.random_range(-2..=2) as f64 * 0.5).collect();
            let mut perm: Vec<usize> = (0..v.len()).collect();
            for i in (1..perm.len()).rev() {
                perm.swap(i, r.random_range(0..=i));
            }
            let mut moved = vec![0.0; vals.len()];
            for (i, &j) in perm.iter().enumerate() {
                moved[j] = vals[i];
            }
            f1.insert(v.id().to_string(), vals);
            f2.insert(v.id().to_string(), moved);
        }
        let f1 = StageFamily::from_values(f1, &cat, &t).unwrap();
        let f2 = StageFamily::from_values(f2, &cat, &t).unwrap();
        let report = find_s2_automorphism(&f1, &f2, &cat, &t);
        prop_assert!(report.realizable);
        for (id, g) in report.automorphisms() {
            let image = g.apply(&f1.get(&id).unwrap().values);
            let target = &f2.get(&id).unwrap().values;
            prop_assert!(image.iter().zip(target).all(|(a, b)| (a - b).abs() <= 1e-9));
        }
    }

    #[test]
    fn reflection_is_involutive(seed in any::<u64>()) {
        let cat = random_category(seed);
        let mut r = rng(seed);
        let a = random_hermitian(&mut r, cat.dim());
        let report = takeuti_gauge(&a, &cat, &tol()).unwrap();
        prop_assert!(report.involutive);
        prop_assert!(report.swap_where_relation_holds);
        for (id, map) in &report.maps {
            let x: Vec<f64> = (0..cat.get(id).unwrap().len()).map(|_| r.random_range(-5.0..5.0)).collect();
            let back = map.apply(&map.apply(&x));
            prop_assert!(back.iter().zip(&x).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + b.abs())));
        }
    }
}
