//! Reference values recomputed independently of the library.

mod common;

use common::*;
use daseinkit::contexts::{bell, coarsenings, intersect, Context, IntersectOptions};
use daseinkit::daseinise::{outer_projection, outer_projection_brute_force};
use daseinkit::interp::{delta_interpret, verify_lemma2, OperatorExpr, OscillatorSystem};
use daseinkit::linalg::{eigendecompose, op_mul, pauli, HermitianOperator, C64};
use rand::Rng;

/// Physicists' Hermite polynomial by the three-term recurrence.
fn hermite(n: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    // an odd step count keeps 0 off the grid
    (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect()
}

#[test]
fn position_spectrum_three_levels() {
    // det(X − λ) = −λ³ + (1/2 + 1)λ for the 3-level truncation
    let expected = bisect_roots(|l| l * l * l - 1.5 * l, &[-3.0, -1.0, -0.5, 0.5, 1.0, 3.0]);
    assert_eq!(expected.len(), 3);
    let got = eigendecompose(&oscillator(3).x, &tol()).unwrap();
    for (g, e) in got.eigenvalues().iter().zip(&expected) {
        assert!((g - e).abs() < 1e-12, "{g} vs {e}");
    }
}

#[test]
fn position_spectrum_is_hermite_roots() {
    for n in 2..=10 {
        let expected = bisect_roots(|x| hermite(n, x), &grid(-6.0, 6.0, 12001));
        assert_eq!(expected.len(), n);
        let got = eigendecompose(&oscillator(n).x, &tol()).unwrap();
        assert_eq!(got.len(), n);
        for (g, e) in got.eigenvalues().iter().zip(&expected) {
            assert!((g - e).abs() < 1e-9, "N={n}: {g} vs {e}");
        }
    }
}

#[test]
fn truncated_hamiltonian_spectrum() {
    // X² + P² = aa† + a†a, and the truncated aa† loses its last diagonal entry
    for n in 2..=12 {
        let mut expected: Vec<f64> = (0..n - 1).map(|k| k as f64 + 0.5).collect();
        expected.push((n - 1) as f64 / 2.0);
        expected.sort_by(f64::total_cmp);
        expected.dedup();
        let got = eigendecompose(&oscillator(n).h, &tol()).unwrap();
        assert_eq!(got.eigenvalues().len(), expected.len(), "N={n}");
        for (g, e) in got.eigenvalues().iter().zip(&expected) {
            assert!((g - e).abs() < 1e-10, "N={n}: {g} vs {e}");
        }
    }
}

#[test]
fn trivial_stage_energy_three_levels() {
    // δ(P) = δ(X) = √1.5·I on the trivial stage, so H = (1.5 + 1.5)/2
    let (osc, cat) = oscillator_category(3);
    let sys = OscillatorSystem::from_oscillator(&osc);
    let family = delta_interpret(&sys.hamiltonian(), &sys.environment(), &cat, &tol()).unwrap();
    let trivial = cat.context(cat.trivial_index().unwrap());
    let values = &family.get(trivial.id()).unwrap().values;
    assert_eq!(values.len(), 1);
    assert!((values[0] - 1.5).abs() < 1e-12);
}

#[test]
fn bell_numbers_match_stirling_sums() {
    let mut s = vec![vec![0u64; 9]; 9];
    s[0][0] = 1;
    for n in 1..9 {
        for k in 1..=n {
            s[n][k] = k as u64 * s[n - 1][k] + s[n - 1][k - 1];
        }
    }
    for (n, row) in s.iter().enumerate() {
        assert_eq!(bell(n) as u64, row.iter().sum::<u64>(), "B({n})");
    }
    assert_eq!(bell(3), 5);
    let v = context_from_blocks(&standard_basis(3), &[0, 1, 2]);
    assert_eq!(coarsenings(&v, &tol()).unwrap().len(), 5);
}

fn standard_basis(dim: usize) -> Vec<Vec<C64>> {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect()
}

/// Finest common coarsening of two block labellings.
fn common_coarsening(a: &[usize], b: &[usize]) -> Vec<usize> {
    let n = a.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for i in 0..n {
        for j in 0..n {
            if a[i] == a[j] || b[i] == b[j] {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

#[test]
fn intersection_of_commuting_contexts() {
    let mut r = rng(11);
    for _ in 0..40 {
        let dim = r.random_range(2..=6);
        let basis = daseinkit::linalg::random_basis(&mut r, dim).unwrap();
        let (a, b) = (random_blocks(&mut r, dim), random_blocks(&mut r, dim));
        let (va, vb) = (context_from_blocks(&basis, &a), context_from_blocks(&basis, &b));
        let expected = context_from_blocks(&basis, &common_coarsening(&a, &b));
        let got = intersect(&va, &vb, &IntersectOptions::default()).unwrap();
        assert_eq!(got.id(), expected.id());
    }
}

#[test]
fn intersection_of_qubit_contexts_is_trivial() {
    let t = tol();
    let vz = daseinkit::contexts::context_from_operator(&pauli::z(), &t).unwrap();
    let vx = daseinkit::contexts::context_from_operator(&pauli::x(), &t).unwrap();
    let meet = intersect(&vz, &vx, &IntersectOptions::default()).unwrap();
    assert!(meet.is_trivial());
    assert_eq!(qubit_category().len(), 3);
}

/// Atoms of `v` appearing in a sum of atoms.
fn atom_subset(p: &HermitianOperator, v: &Context) -> Vec<bool> {
    v.coefficients(p.matrix()).iter().map(|c| c.re > 0.5).collect()
}

#[test]
fn outer_projection_matches_support_oracle() {
    // the smallest dominating sum of atoms keeps exactly the atoms with QP ≠ 0
    let t = tol();
    let mut r = rng(12);
    for _ in 0..200 {
        let dim = r.random_range(2..=3);
        let (_, _, v) = random_context(&mut r, dim);
        let rank = r.random_range(1..=dim);
        let p = random_projection(&mut r, dim, rank);
        let oracle: Vec<bool> = v
            .atoms()
            .iter()
            .map(|q| op_mul(q.matrix(), p.matrix()).unwrap().max_abs() > 1e-9)
            .collect();
        let fast = outer_projection(&p, &v, &t).unwrap();
        let brute = outer_projection_brute_force(&p, &v, &t).unwrap();
        assert_eq!(atom_subset(&fast, &v), oracle);
        assert_eq!(atom_subset(&brute, &v), oracle);
    }
}

#[test]
fn qubit_commutators() {
    // [σ_z, σ_x] = 2iσ_y
    let cat = qubit_category();
    let report = verify_lemma2(&pauli::z(), &pauli::x(), &cat, &tol()).unwrap();
    assert!((report.external_commutator - 2.0).abs() < 1e-15);
    assert!(report.max_stage_commutator <= 1e-9);
}

#[test]
fn hamiltonian_expression_matches_external_operator() {
    let osc = oscillator(4);
    let sys = OscillatorSystem::from_oscillator(&osc);
    let h = sys.hamiltonian();
    assert_eq!(h.symbols().into_iter().collect::<Vec<_>>(), ["P", "X"]);
    let external = h.eval_external(&sys.environment()).unwrap();
    assert!(external.dist(osc.h.matrix()) < 1e-12);
    let e = OperatorExpr::mul(OperatorExpr::symbol("P"), OperatorExpr::symbol("X"));
    assert!(e.eval_external(&sys.environment()).unwrap().hermiticity_defect() > 0.1);
}

#[test]
fn excluded_middle_for_spin_up() {
    // [σ_z = +1] keeps one atom of V_z and both of V_x; its negation is empty
    // because every atom restricts into it on the trivial stage
    let t = tol();
    let cat = qubit_category();
    let sigma = daseinkit::sheaf::build_spectral_presheaf(&cat, &t).unwrap();
    let s = sigma
        .proposition(&HermitianOperator::projector(&[pauli::ket0()], 2), &t)
        .unwrap();
    let not_s = sigma.not(&s).unwrap();
    assert!(not_s.is_empty());
    let lem = sigma.join(&s, &not_s).unwrap();
    let total = sigma.total();
    let vz = daseinkit::contexts::context_from_operator(&pauli::z(), &t).unwrap();
    let vx = daseinkit::contexts::context_from_operator(&pauli::x(), &t).unwrap();
    let (iz, ix) = (cat.index_of(vz.id()).unwrap(), cat.index_of(vx.id()).unwrap());
    assert_eq!(lem.at(iz).len(), 1);
    assert_eq!(lem.at(ix), total.at(ix));
    assert_eq!(lem.at(cat.trivial_index().unwrap()).len(), 1);
}
