//! Finite projection lattices: distributivity against commutativity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Status;
use crate::daseinise::check_projection;
use crate::error::{Error, Result};
use crate::linalg::{eigenpairs, op_add, random_basis, ComplexMatrix, HermitianOperator, Tolerances, C64};

const RANGE_THRESHOLD: f64 = 1e-6;
const SAME_ELEMENT: f64 = 1e-7;
const MAX_DIM: usize = 4;
const MAX_GENERATORS: usize = 5;
pub const DEFAULT_MAX_LATTICE: usize = 4096;

/// Projection onto the range of a positive semidefinite matrix.
fn range_projection(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, vectors) = eigenpairs(m)?;
    let kept: Vec<Vec<C64>> = values
        .iter()
        .zip(vectors)
        .filter(|(l, _)| **l > RANGE_THRESHOLD)
        .map(|(_, v)| v)
        .collect();
    Ok(HermitianOperator::projector(&kept, m.dim()).matrix().clone())
}

fn complement(p: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_inner(ComplexMatrix::identity(p.dim()).into_inner() - p.inner())
}

fn join(p: &ComplexMatrix, q: &ComplexMatrix) -> Result<ComplexMatrix> {
    range_projection(&op_add(p, q)?)
}

fn meet(p: &ComplexMatrix, q: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(complement(&join(&complement(p), &complement(q))?))
}

fn commute(p: &ComplexMatrix, q: &ComplexMatrix) -> Result<bool> {
    Ok(p.commutator(q)?.max_abs() <= SAME_ELEMENT)
}

/// The sublattice generated by a set of projections under meet, join and
/// orthocomplement.
#[derive(Clone, Debug)]
pub struct ProjectionLattice {
    elements: Vec<ComplexMatrix>,
    ranks: Vec<usize>,
    meet: Vec<Vec<usize>>,
    join: Vec<Vec<usize>>,
}

impl ProjectionLattice {
    pub fn generate(generators: &[ComplexMatrix], dim: usize, max_lattice: usize) -> Result<Self> {
        let mut elements: Vec<ComplexMatrix> = Vec::new();
        let mut ranks: Vec<usize> = Vec::new();
        let insert = |m: ComplexMatrix, elements: &mut Vec<ComplexMatrix>, ranks: &mut Vec<usize>| -> Result<usize> {
            let rank = m.trace().re.round() as usize;
            if let Some(i) = (0..elements.len()).find(|&i| ranks[i] == rank && elements[i].dist(&m) <= SAME_ELEMENT) {
                return Ok(i);
            }
            if elements.len() >= max_lattice {
                return Err(Error::SizeLimitExceeded {
                    what: "projection lattice".into(),
                    limit: max_lattice,
                });
            }
            elements.push(m);
            ranks.push(rank);
            Ok(elements.len() - 1)
        };
        insert(ComplexMatrix::zeros(dim), &mut elements, &mut ranks)?;
        insert(ComplexMatrix::identity(dim), &mut elements, &mut ranks)?;
        for g in generators {
            insert(g.clone(), &mut elements, &mut ranks)?;
        }

        let mut meets = std::collections::HashMap::new();
        let mut joins = std::collections::HashMap::new();
        let mut k = 0;
        while k < elements.len() {
            let c = complement(&elements[k]);
            insert(c, &mut elements, &mut ranks)?;
            for j in 0..=k {
                let m = meet(&elements[k], &elements[j])?;
                let jn = join(&elements[k], &elements[j])?;
                let mi = insert(m, &mut elements, &mut ranks)?;
                let ji = insert(jn, &mut elements, &mut ranks)?;
                meets.insert((k, j), mi);
                joins.insert((k, j), ji);
            }
            k += 1;
        }
        let n = elements.len();
        let table = |map: &std::collections::HashMap<(usize, usize), usize>| -> Vec<Vec<usize>> {
            (0..n)
                .map(|i| (0..n).map(|j| map[&(i.max(j), i.min(j))]).collect())
                .collect()
        };
        Ok(Self {
            meet: table(&meets),
            join: table(&joins),
            elements,
            ranks,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &ComplexMatrix {
        &self.elements[i]
    }

    pub fn rank(&self, i: usize) -> usize {
        self.ranks[i]
    }

    pub fn meet(&self, i: usize, j: usize) -> usize {
        self.meet[i][j]
    }

    pub fn join(&self, i: usize, j: usize) -> usize {
        self.join[i][j]
    }

    /// First triple `(a, b, c)` with `a ∧ (b ∨ c) ≠ (a ∧ b) ∨ (a ∧ c)`.
    pub fn distributivity_failure(&self) -> Option<(usize, usize, usize)> {
        let n = self.len();
        for a in 0..n {
            for b in 0..n {
                for c in b + 1..n {
                    let lhs = self.meet(a, self.join(b, c));
                    let rhs = self.join(self.meet(a, b), self.meet(a, c));
                    if lhs != rhs {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }

    pub fn noncommuting_pair(&self) -> Result<Option<(usize, usize)>> {
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if !commute(&self.elements[i], &self.elements[j])? {
                    return Ok(Some((i, j)));
                }
            }
        }
        Ok(None)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma1Report {
    pub status: Status,
    pub dim: usize,
    pub generators: usize,
    pub lattice_size: usize,
    pub distributive: bool,
    pub distributivity_failure: Option<[usize; 3]>,
    pub noncommuting_pair: Option<[usize; 2]>,
}

/// Generates the sublattice and checks that it is distributive exactly when
/// all its elements commute.
pub fn verify_lemma1(
    projections: &[HermitianOperator],
    dim: usize,
    max_lattice: usize,
    tol: &Tolerances,
) -> Result<Lemma1Report> {
    if dim > MAX_DIM {
        return Err(Error::SizeLimitExceeded {
            what: "lattice dimension".into(),
            limit: MAX_DIM,
        });
    }
    if projections.len() > MAX_GENERATORS {
        return Err(Error::SizeLimitExceeded {
            what: "lattice generators".into(),
            limit: MAX_GENERATORS,
        });
    }
    for p in projections {
        if p.dim() != dim {
            return Err(Error::DimMismatch {
                left: dim,
                right: p.dim(),
            });
        }
        check_projection(p, tol)?;
    }
    let generators: Vec<ComplexMatrix> = projections.iter().map(|p| p.matrix().clone()).collect();
    let lattice = ProjectionLattice::generate(&generators, dim, max_lattice)?;
    let failure = lattice.distributivity_failure();
    let pair = lattice.noncommuting_pair()?;
    Ok(Lemma1Report {
        status: Status::from_bool(failure.is_some() == pair.is_some()),
        dim,
        generators: projections.len(),
        lattice_size: lattice.len(),
        distributive: failure.is_none(),
        distributivity_failure: failure.map(|(a, b, c)| [a, b, c]),
        noncommuting_pair: pair.map(|(a, b)| [a, b]),
    })
}

fn line(v: &[C64]) -> HermitianOperator {
    HermitianOperator::projector(&[v.to_vec()], v.len())
}

fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let n = crate::linalg::vector_norm(&v);
    v.into_iter().map(|z| z / n).collect()
}

fn random_subspace<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> Result<HermitianOperator> {
    let basis = random_basis(rng, dim)?;
    Ok(HermitianOperator::projector(&basis[..rank], dim))
}

/// Generators whose lattice is known to stay finite: subsets of a single
/// basis, lines in the plane, a pair of subspaces, or block-diagonal pairs
/// on `C² ⊕ C²`.
pub fn sample_generators<R: Rng>(rng: &mut R) -> Result<(Vec<HermitianOperator>, usize)> {
    match rng.random_range(0..4) {
        0 => {
            let dim = rng.random_range(2..=MAX_DIM);
            let basis = random_basis(rng, dim)?;
            let count = rng.random_range(1..=3);
            let gens = (0..count)
                .map(|_| {
                    let chosen: Vec<Vec<C64>> = basis.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
                    HermitianOperator::projector(&chosen, dim)
                })
                .collect();
            Ok((gens, dim))
        }
        1 => {
            let count = rng.random_range(1..=3);
            Ok(((0..count).map(|_| line(&random_unit(rng, 2))).collect(), 2))
        }
        2 => {
            let dim = rng.random_range(3..=MAX_DIM);
            let gens = (0..2)
                .map(|_| {
                    let rank = rng.random_range(1..dim);
                    random_subspace(rng, dim, rank)
                })
                .collect::<Result<_>>()?;
            Ok((gens, dim))
        }
        _ => {
            let gens = (0..2)
                .map(|_| {
                    let a = line(&random_unit(rng, 2));
                    let b = line(&random_unit(rng, 2));
                    HermitianOperator::from_hermitian_part(&ComplexMatrix::from_fn(4, |i, j| match (i < 2, j < 2) {
                        (true, true) => a.matrix().get(i, j),
                        (false, false) => b.matrix().get(i - 2, j - 2),
                        _ => C64::new(0.0, 0.0),
                    }))
                })
                .collect();
            Ok((gens, 4))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma1Trials {
    pub status: Status,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    pub distributive: usize,
    pub non_distributive: usize,
    pub largest_lattice: usize,
    pub failures: Vec<usize>,
}

/// Seeded randomized trials over [`sample_generators`].
pub fn lemma1_trials(trials: usize, seed: u64, max_lattice: usize, tol: &Tolerances) -> Result<Lemma1Trials> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Lemma1Trials {
        status: Status::Pass,
        seed,
        trials,
        passed: 0,
        distributive: 0,
        non_distributive: 0,
        largest_lattice: 0,
        failures: Vec::new(),
    };
    for t in 0..trials {
        let (gens, dim) = sample_generators(&mut rng)?;
        let report = verify_lemma1(&gens, dim, max_lattice, tol)?;
        out.largest_lattice = out.largest_lattice.max(report.lattice_size);
        if report.distributive {
            out.distributive += 1;
        } else {
            out.non_distributive += 1;
        }
        if report.status.is_pass() {
            out.passed += 1;
        } else {
            out.failures.push(t);
        }
    }
    out.status = Status::from_bool(out.failures.is_empty());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn commuting_diagonal_projections() {
        let gens = [
            HermitianOperator::diagonal(&[1.0, 0.0, 0.0]),
            HermitianOperator::diagonal(&[1.0, 1.0, 0.0]),
        ];
        let r = verify_lemma1(&gens, 3, DEFAULT_MAX_LATTICE, &tol()).unwrap();
        assert!(r.distributive);
        assert!(r.noncommuting_pair.is_none());
        assert!(r.status.is_pass());
        assert_eq!(r.lattice_size, 8);
    }

    #[test]
    fn two_lines_in_the_plane() {
        let gens = [line(&pauli::ket0()), line(&pauli::ket_plus())];
        let r = verify_lemma1(&gens, 2, DEFAULT_MAX_LATTICE, &tol()).unwrap();
        assert!(!r.distributive);
        assert!(r.noncommuting_pair.is_some());
        assert!(r.status.is_pass());
        assert_eq!(r.lattice_size, 6);
    }

    #[test]
    fn bounds_only() {
        let gens = [HermitianOperator::zeros(2), HermitianOperator::identity(2)];
        let r = verify_lemma1(&gens, 2, DEFAULT_MAX_LATTICE, &tol()).unwrap();
        assert!(r.distributive);
        assert_eq!(r.lattice_size, 2);
    }

    #[test]
    fn limits() {
        let g = vec![HermitianOperator::zeros(5)];
        assert!(matches!(
            verify_lemma1(&g, 5, 10, &tol()),
            Err(Error::SizeLimitExceeded { .. })
        ));
        let g = vec![HermitianOperator::zeros(2); 6];
        assert!(matches!(
            verify_lemma1(&g, 2, 10, &tol()),
            Err(Error::SizeLimitExceeded { .. })
        ));
        let g = [line(&pauli::ket0()), line(&pauli::ket_plus())];
        assert!(matches!(
            verify_lemma1(&g, 2, 4, &tol()),
            Err(Error::SizeLimitExceeded { .. })
        ));
        assert!(matches!(
            verify_lemma1(&[pauli::x()], 2, 10, &tol()),
            Err(Error::NotProjection { .. })
        ));
    }
}
