#![allow(dead_code)]

use daseinkit::contexts::{build_category, CategoryOptions, Context, ContextCategory};
use daseinkit::linalg::{make_oscillator, pauli, random_basis, HermitianOperator, Oscillator, Tolerances, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn tol() -> Tolerances {
    Tolerances::default()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn qubit_category() -> ContextCategory {
    build_category(&[pauli::z(), pauli::x()], &CategoryOptions::default(), &tol(), 0).unwrap()
}

pub fn oscillator(levels: usize) -> Oscillator {
    make_oscillator(levels, 1.0, 1.0, 1.0).unwrap()
}

pub fn oscillator_category(levels: usize) -> (Oscillator, ContextCategory) {
    let osc = oscillator(levels);
    let ops: Vec<HermitianOperator> = osc.operators().into_iter().cloned().collect();
    let cat = build_category(&ops, &CategoryOptions::default(), &tol(), 0).unwrap();
    (osc, cat)
}

/// Context whose atoms group the vectors of `basis` by `blocks[i]`.
pub fn context_from_blocks(basis: &[Vec<C64>], blocks: &[usize]) -> Context {
    let dim = basis.len();
    let nblocks = blocks.iter().max().unwrap() + 1;
    let atoms = (0..nblocks)
        .filter_map(|b| {
            let vs: Vec<Vec<C64>> = (0..dim).filter(|&i| blocks[i] == b).map(|i| basis[i].clone()).collect();
            (!vs.is_empty()).then(|| HermitianOperator::projector(&vs, dim))
        })
        .collect();
    Context::from_atoms(atoms, &tol()).unwrap()
}

/// Random block labelling of `0..dim` with every label in `0..k` used.
pub fn random_blocks<R: Rng>(rng: &mut R, dim: usize) -> Vec<usize> {
    let k = rng.random_range(1..=dim);
    let mut blocks: Vec<usize> = (0..dim)
        .map(|i| if i < k { i } else { rng.random_range(0..k) })
        .collect();
    for i in (1..dim).rev() {
        let j = rng.random_range(0..=i);
        blocks.swap(i, j);
    }
    blocks
}

pub fn random_context<R: Rng>(rng: &mut R, dim: usize) -> (Vec<Vec<C64>>, Vec<usize>, Context) {
    let basis = random_basis(rng, dim).unwrap();
    let blocks = random_blocks(rng, dim);
    let v = context_from_blocks(&basis, &blocks);
    (basis, blocks, v)
}

/// Random projection onto the span of `rank` random vectors.
pub fn random_projection<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> HermitianOperator {
    let basis = random_basis(rng, dim).unwrap();
    HermitianOperator::projector(&basis[..rank], dim)
}

/// Roots of a real polynomial with known sign changes on `grid`, by bisection.
pub fn bisect_roots(f: impl Fn(f64) -> f64, grid: &[f64]) -> Vec<f64> {
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        if f(lo) == 0.0 {
            roots.push(lo);
            continue;
        }
        if f(lo).signum() == f(hi).signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo).signum() == f(mid).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}
