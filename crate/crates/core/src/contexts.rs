//! Contexts (abelian unital subalgebras given by their atoms) and the finite
//! context category generated by a set of operators.
//!
//! The category built here is the fragment generated by the spectral algebras
//! of the input operators, closed under pairwise intersection and optionally
//! under all coarsenings. Every check downstream quantifies over this
//! fragment only.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{eigendecompose, ComplexMatrix, HermitianOperator, Tolerances, C64};

/// An abelian unital *-subalgebra, stored as its atoms (minimal projections).
#[derive(Clone, Debug)]
pub struct Context {
    id: String,
    atoms: Vec<HermitianOperator>,
    ranks: Vec<usize>,
    dim: usize,
}

/// Canonical sort key of an atom: descending rank, then entries rounded to 8
/// decimals.
fn atom_key(atom: &ComplexMatrix, rank: usize) -> (std::cmp::Reverse<usize>, Vec<i64>) {
    let n = atom.dim();
    let mut entries = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            let z = atom.get(i, j);
            entries.push(round8(z.re));
            entries.push(round8(z.im));
        }
    }
    (std::cmp::Reverse(rank), entries)
}

fn round8(x: f64) -> i64 {
    (x * 1e8).round() as i64
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Context {
    /// Validates an orthogonal resolution of the identity and puts the atoms
    /// in canonical order.
    pub fn from_atoms(atoms: Vec<HermitianOperator>, tol: &Tolerances) -> Result<Self> {
        let dim = atoms
            .first()
            .map(|a| a.dim())
            .ok_or_else(|| Error::InvalidParameter("context needs at least one atom".into()))?;
        let mut sum = ComplexMatrix::zeros(dim);
        for (k, a) in atoms.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::DimMismatch {
                    left: dim,
                    right: a.dim(),
                });
            }
            let defect = a.idempotency_defect();
            if defect > tol.num {
                return Err(Error::NotProjection {
                    label: format!("atom {k}"),
                    defect,
                });
            }
            if a.matrix().max_abs() <= tol.num {
                return Err(Error::InvalidParameter(format!("atom {k} is zero")));
            }
            sum = crate::linalg::op_add(&sum, a.matrix())?;
        }
        let resolution = sum.dist(&ComplexMatrix::identity(dim));
        if resolution > tol.num * atoms.len().max(1) as f64 {
            return Err(Error::InvalidParameter(format!(
                "atoms do not resolve the identity (defect {resolution:.3e})"
            )));
        }
        for i in 0..atoms.len() {
            for j in (i + 1)..atoms.len() {
                let prod = crate::linalg::op_mul(atoms[i].matrix(), atoms[j].matrix())?;
                if prod.max_abs() > tol.num {
                    return Err(Error::InvalidParameter(format!("atoms {i} and {j} are not orthogonal")));
                }
            }
        }

        let mut keyed: Vec<_> = atoms
            .into_iter()
            .map(|a| {
                let rank = a.rank_estimate();
                (atom_key(a.matrix(), rank), rank, a)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));

        let mut hasher = Sha256::new();
        hasher.update((dim as u64).to_le_bytes());
        for (key, _, _) in &keyed {
            hasher.update((key.0 .0 as u64).to_le_bytes());
            for e in &key.1 {
                hasher.update(e.to_le_bytes());
            }
        }
        let digest: String = hasher.finalize().iter().take(6).map(|b| format!("{b:02x}")).collect();
        let id = format!("V{}-{}", keyed.len(), digest);
        let ranks = keyed.iter().map(|k| k.1).collect();
        let atoms = keyed.into_iter().map(|k| k.2).collect();
        Ok(Self { id, atoms, ranks, dim })
    }

    pub fn trivial(dim: usize, tol: &Tolerances) -> Self {
        Self::from_atoms(vec![HermitianOperator::identity(dim)], tol).expect("identity is a valid resolution")
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn atoms(&self) -> &[HermitianOperator] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &HermitianOperator {
        &self.atoms[i]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_trivial(&self) -> bool {
        self.atoms.len() == 1
    }

    /// Coefficients `tr(QMQ)/tr(Q)` of the conditional expectation onto this
    /// algebra, one per atom.
    pub fn coefficients(&self, m: &ComplexMatrix) -> Vec<C64> {
        self.atoms
            .iter()
            .zip(&self.ranks)
            .map(|(q, &r)| q.matrix().hs_inner(m) / r.max(1) as f64)
            .collect()
    }

    /// `Σ c_i Q_i`.
    pub fn synthesize_complex(&self, coeffs: &[C64]) -> ComplexMatrix {
        let mut m = DMatrix::from_element(self.dim, self.dim, C64::new(0.0, 0.0));
        for (q, c) in self.atoms.iter().zip(coeffs) {
            m += q.matrix().inner() * *c;
        }
        ComplexMatrix::from_inner(m)
    }

    /// The self-adjoint member `Σ v_i Q_i`.
    pub fn synthesize(&self, values: &[f64]) -> HermitianOperator {
        let coeffs: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        HermitianOperator::from_hermitian_part(&self.synthesize_complex(&coeffs))
    }

    /// Distance from `m` to the linear span of the atoms.
    pub fn membership_residual(&self, m: &ComplexMatrix) -> f64 {
        m.dist(&self.synthesize_complex(&self.coefficients(m)))
    }

    /// `‖[M, Q]‖_max` maximised over atoms.
    pub fn commutation_defect(&self, m: &ComplexMatrix) -> f64 {
        self.atoms
            .iter()
            .map(|q| m.commutator(q.matrix()).map(|c| c.max_abs()).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }

    /// All projections of the algebra, one per subset of atoms (bitmask order).
    pub fn all_projections(&self) -> Result<Vec<HermitianOperator>> {
        if self.atoms.len() > 20 {
            return Err(Error::SizeLimitExceeded {
                what: format!("projection enumeration of {}", self.id),
                limit: 1 << 20,
            });
        }
        Ok((0u32..(1u32 << self.atoms.len()))
            .map(|mask| self.subset_projection(mask))
            .collect())
    }

    pub(crate) fn subset_projection(&self, mask: u32) -> HermitianOperator {
        let values: Vec<f64> = (0..self.atoms.len())
            .map(|i| if mask >> i & 1 == 1 { 1.0 } else { 0.0 })
            .collect();
        self.synthesize(&values)
    }
}

impl PartialEq for Context {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Context {}

/// The commutative algebra generated by the spectral projections of `a`.
pub fn context_from_operator(a: &HermitianOperator, tol: &Tolerances) -> Result<Context> {
    let decomposition = eigendecompose(a, tol)?;
    Context::from_atoms(decomposition.projections().to_vec(), tol)
}

/// `Q′Q = Q`: the atom `q` lies under `coarse`.
fn dominated(coarse: &ComplexMatrix, q: &ComplexMatrix, tol: &Tolerances) -> bool {
    crate::linalg::op_mul(coarse, q)
        .map(|p| p.dist(q) <= tol.num)
        .unwrap_or(false)
}

/// `V1 ≤ V2` iff every atom of `V1` is a sum of atoms of `V2`.
pub fn is_leq(v1: &Context, v2: &Context, tol: &Tolerances) -> Result<bool> {
    if v1.dim != v2.dim {
        return Err(Error::DimMismatch {
            left: v1.dim,
            right: v2.dim,
        });
    }
    if v1.len() > v2.len() {
        return Ok(false);
    }
    for coarse in &v1.atoms {
        let mut sum = ComplexMatrix::zeros(v1.dim);
        for q in &v2.atoms {
            if dominated(coarse.matrix(), q.matrix(), tol) {
                sum = crate::linalg::op_add(&sum, q.matrix())?;
            }
        }
        if sum.dist(coarse.matrix()) > tol.num {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Cheap necessary condition for `V1 ≤ V2` via Hilbert-Schmidt overlaps: each
/// atom of `V2` has full overlap `tr(Q′Q) = rank Q` with some atom of `V1`.
fn maybe_leq(v1: &Context, v2: &Context) -> bool {
    if v1.len() > v2.len() {
        return false;
    }
    v2.atoms.iter().zip(&v2.ranks).all(|(q, &r)| {
        v1.atoms
            .iter()
            .any(|c| (c.matrix().hs_inner(q.matrix()).re - r as f64).abs() < 1e-6)
    })
}

#[derive(Clone, Copy, Debug)]
pub struct IntersectOptions {
    pub tol: Tolerances,
    pub max_retries: usize,
    pub seed: u64,
}

impl Default for IntersectOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            max_retries: 8,
            seed: 0,
        }
    }
}

fn pair_seed(seed: u64, a: &str, b: &str) -> u64 {
    let digest = Sha256::new()
        .chain_update(seed.to_le_bytes())
        .chain_update(a.as_bytes())
        .chain_update([0u8])
        .chain_update(b.as_bytes())
        .finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// `V1 ∩ V2` as algebras.
///
/// The span intersection is read off the principal angles between the two
/// atom spans in matrix space; atoms are then recovered by diagonalising a
/// random real combination of a Hermitian basis of the intersection.
pub fn intersect(v1: &Context, v2: &Context, opts: &IntersectOptions) -> Result<Context> {
    let tol = &opts.tol;
    if v1.dim != v2.dim {
        return Err(Error::DimMismatch {
            left: v1.dim,
            right: v2.dim,
        });
    }
    if is_leq(v1, v2, tol)? {
        return Ok(v1.clone());
    }
    if is_leq(v2, v1, tol)? {
        return Ok(v2.clone());
    }
    let n = v1.dim;

    let orthonormal = |v: &Context| {
        DMatrix::from_fn(n * n, v.len(), |row, col| {
            let (i, j) = (row / n, row % n);
            v.atoms[col].matrix().get(i, j) / (v.ranks[col] as f64).sqrt()
        })
    };
    let u = orthonormal(v1);
    let w = orthonormal(v2);
    let overlap = u.adjoint() * &w;
    let svd = overlap.svd(true, false);
    let left = svd.u.as_ref().ok_or(Error::NumericalFailure { dim: n })?;
    let threshold = 1.0 - tol.num.sqrt();
    let basis: Vec<ComplexMatrix> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s >= threshold)
        .map(|(k, _)| {
            let col = &u * left.column(k);
            ComplexMatrix::from_fn(n, |i, j| col[i * n + j])
        })
        .collect();
    let expected = basis.len();
    if expected == 0 {
        return Err(Error::DegenerateIntersection {
            left: v1.id.clone(),
            right: v2.id.clone(),
            retries: 0,
        });
    }

    let mut hermitian_basis = Vec::with_capacity(2 * expected);
    for b in &basis {
        hermitian_basis.push(b.hermitian_part());
        let skew = crate::linalg::op_scale(C64::new(0.0, -1.0), b);
        hermitian_basis.push(skew.hermitian_part());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(pair_seed(opts.seed, &v1.id, &v2.id));
    for _ in 0..opts.max_retries.max(1) {
        let mut generic = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for h in &hermitian_basis {
            let c: f64 = rng.random_range(-1.0..1.0);
            generic += h.inner() * C64::new(c, 0.0);
        }
        let generic = HermitianOperator::from_hermitian_part(&ComplexMatrix::from_inner(generic));
        let decomposition = match eigendecompose(&generic, tol) {
            Ok(d) => d,
            Err(_) => continue,
        };
        if decomposition.len() != expected {
            continue;
        }
        let candidate = match Context::from_atoms(decomposition.projections().to_vec(), tol) {
            Ok(c) => c,
            Err(_) => continue,
        };
        if is_leq(&candidate, v1, tol)? && is_leq(&candidate, v2, tol)? {
            return Ok(candidate);
        }
    }
    Err(Error::DegenerateIntersection {
        left: v1.id.clone(),
        right: v2.id.clone(),
        retries: opts.max_retries,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CategoryOptions {
    pub full_subcontexts: bool,
    pub max_contexts: usize,
    pub max_retries: usize,
}

impl Default for CategoryOptions {
    fn default() -> Self {
        Self {
            full_subcontexts: false,
            max_contexts: 5000,
            max_retries: 8,
        }
    }
}

/// Finite poset of contexts closed under intersection.
#[derive(Clone, Debug)]
pub struct ContextCategory {
    dim: usize,
    contexts: Vec<Context>,
    index: HashMap<String, usize>,
    leq: Vec<Vec<bool>>,
    generators: Vec<(String, String)>,
    covers: OnceLock<Vec<(usize, usize)>>,
}

/// Restricted-growth enumeration of all set partitions of `0..k`.
fn set_partitions(k: usize) -> Vec<Vec<usize>> {
    fn go(pos: usize, k: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == k {
            out.push(cur.clone());
            return;
        }
        let upper = if pos == 0 { 0 } else { max + 1 };
        for b in 0..=upper {
            cur.push(b);
            go(pos + 1, k, max.max(b), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    let mut cur = Vec::with_capacity(k);
    go(0, k, 0, &mut cur, &mut out);
    out
}

/// Bell number `B(k)`, saturating.
pub fn bell(k: usize) -> usize {
    let mut row = vec![1usize];
    for _ in 0..k {
        let mut next = vec![*row.last().unwrap()];
        for v in &row {
            next.push(next.last().unwrap().saturating_add(*v));
        }
        row = next;
    }
    row[0]
}

/// All coarsenings of `v`: one context per set partition of its atoms.
pub fn coarsenings(v: &Context, tol: &Tolerances) -> Result<Vec<Context>> {
    set_partitions(v.len())
        .into_iter()
        .map(|blocks| {
            let nblocks = blocks.iter().max().map(|m| m + 1).unwrap_or(0);
            let atoms = (0..nblocks)
                .map(|b| {
                    let mut m = ComplexMatrix::zeros(v.dim);
                    for (i, _) in blocks.iter().enumerate().filter(|(_, &x)| x == b) {
                        m = crate::linalg::op_add(&m, v.atoms[i].matrix())?;
                    }
                    Ok(HermitianOperator::from_hermitian_part(&m))
                })
                .collect::<Result<Vec<_>>>()?;
            Context::from_atoms(atoms, tol)
        })
        .collect()
}

pub fn build_category(
    ops: &[HermitianOperator],
    options: &CategoryOptions,
    tol: &Tolerances,
    seed: u64,
) -> Result<ContextCategory> {
    let dim = ops
        .first()
        .map(|a| a.dim())
        .ok_or_else(|| Error::InvalidParameter("need at least one generator".into()))?;
    for a in ops {
        if a.dim() != dim {
            return Err(Error::DimMismatch {
                left: dim,
                right: a.dim(),
            });
        }
    }
    let limit = options.max_contexts;
    let mut pool: BTreeMap<String, Context> = BTreeMap::new();
    let insert = |pool: &mut BTreeMap<String, Context>, c: Context| -> Result<()> {
        pool.entry(c.id.clone()).or_insert(c);
        if pool.len() > limit {
            return Err(Error::SizeLimitExceeded {
                what: "context count".into(),
                limit,
            });
        }
        Ok(())
    };

    let mut generators = Vec::with_capacity(ops.len());
    for (k, a) in ops.iter().enumerate() {
        let c = context_from_operator(a, tol)?;
        let label = a.label().map(str::to_string).unwrap_or_else(|| format!("op{k}"));
        generators.push((label, c.id.clone()));
        insert(&mut pool, c)?;
    }
    insert(&mut pool, Context::trivial(dim, tol))?;

    let opts = IntersectOptions {
        tol: *tol,
        max_retries: options.max_retries,
        seed,
    };
    let mut done: BTreeSet<(String, String)> = BTreeSet::new();
    loop {
        let ids: Vec<String> = pool.keys().cloned().collect();
        let pending: Vec<(String, String)> = ids
            .iter()
            .enumerate()
            .flat_map(|(i, a)| ids[i + 1..].iter().map(move |b| (a.clone(), b.clone())))
            .filter(|p| !done.contains(p))
            .collect();
        if pending.is_empty() {
            break;
        }
        let results: Vec<Result<Context>> = pending
            .par_iter()
            .map(|(a, b)| intersect(&pool[a], &pool[b], &opts))
            .collect();
        let before = pool.len();
        for (pair, r) in pending.into_iter().zip(results) {
            insert(&mut pool, r?)?;
            done.insert(pair);
        }
        if pool.len() == before {
            break;
        }
    }

    if options.full_subcontexts {
        // a subalgebra of an abelian algebra is a coarsening of it, so the
        // enlarged pool stays closed under intersection
        let bound: usize = pool.values().map(|c| bell(c.len())).fold(0, usize::saturating_add);
        if bound > limit.saturating_mul(4) {
            return Err(Error::SizeLimitExceeded {
                what: format!("coarsening closure (up to {bound} contexts)"),
                limit,
            });
        }
        let parents: Vec<Context> = pool.values().cloned().collect();
        for parent in parents {
            for c in coarsenings(&parent, tol)? {
                insert(&mut pool, c)?;
            }
        }
    }

    ContextCategory::from_contexts(pool.into_values().collect(), generators, tol)
}

impl ContextCategory {
    /// Assembles a category from contexts already known to be closed under
    /// intersection; computes the order relation.
    pub fn from_contexts(
        mut contexts: Vec<Context>,
        generators: Vec<(String, String)>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let dim = contexts
            .first()
            .map(|c| c.dim)
            .ok_or_else(|| Error::InvalidParameter("empty category".into()))?;
        contexts.sort_by(|a, b| (a.len(), &a.id).cmp(&(b.len(), &b.id)));
        contexts.dedup_by(|a, b| a.id == b.id);
        let index: HashMap<String, usize> = contexts.iter().enumerate().map(|(i, c)| (c.id.clone(), i)).collect();
        let n = contexts.len();
        let leq: Vec<Vec<bool>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            return Ok(true);
                        }
                        if !maybe_leq(&contexts[i], &contexts[j]) {
                            return Ok(false);
                        }
                        is_leq(&contexts[i], &contexts[j], tol)
                    })
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<_>>()?;
        for (label, id) in &generators {
            if !index.contains_key(id) {
                return Err(Error::InvalidParameter(format!(
                    "generator {label} refers to unknown context {id}"
                )));
            }
        }
        Ok(Self {
            dim,
            contexts,
            index,
            leq,
            generators,
            covers: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn context(&self, i: usize) -> &Context {
        &self.contexts[i]
    }

    pub fn get(&self, id: &str) -> Option<&Context> {
        self.index.get(id).map(|&i| &self.contexts[i])
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// `contexts[i] ≤ contexts[j]`.
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i][j]
    }

    pub fn leq_matrix(&self) -> &[Vec<bool>] {
        &self.leq
    }

    /// Indices of every context below `j` (including `j`).
    pub fn below(&self, j: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.leq[i][j]).collect()
    }

    pub fn generators(&self) -> &[(String, String)] {
        &self.generators
    }

    /// Context generated by the operator with this label.
    pub fn generator_context(&self, label: &str) -> Option<&Context> {
        self.generators
            .iter()
            .find(|(l, _)| l == label)
            .and_then(|(_, id)| self.get(id))
    }

    pub fn trivial_index(&self) -> Option<usize> {
        self.contexts.iter().position(|c| c.is_trivial())
    }

    pub fn maximal(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| (0..self.len()).all(|j| j == i || !self.leq[i][j]))
            .collect()
    }

    /// Covering pairs `(lower, upper)` of the Hasse diagram.
    pub fn covers(&self) -> &[(usize, usize)] {
        self.covers.get_or_init(|| {
            let n = self.len();
            let mut out = Vec::new();
            for j in 0..n {
                for i in 0..n {
                    if i == j || !self.leq[i][j] {
                        continue;
                    }
                    let direct = (0..n).all(|k| k == i || k == j || !(self.leq[i][k] && self.leq[k][j]));
                    if direct {
                        out.push((i, j));
                    }
                }
            }
            out
        })
    }

    /// Greatest lower bound of two contexts within the category, if unique.
    pub fn meet(&self, i: usize, j: usize) -> Option<usize> {
        let lower: Vec<usize> = (0..self.len()).filter(|&k| self.leq[k][i] && self.leq[k][j]).collect();
        lower.iter().copied().find(|&m| lower.iter().all(|&k| self.leq[k][m]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{make_oscillator, pauli};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn sigma_z_context() {
        let v = context_from_operator(&pauli::z(), &tol()).unwrap();
        assert_eq!(v.len(), 2);
        let p0 = ComplexMatrix::diagonal(&[1.0, 0.0]);
        let p1 = ComplexMatrix::diagonal(&[0.0, 1.0]);
        assert!(v.atoms().iter().any(|a| a.matrix().dist(&p0) < 1e-14));
        assert!(v.atoms().iter().any(|a| a.matrix().dist(&p1) < 1e-14));
    }

    #[test]
    fn identity_gives_trivial_context() {
        let v = context_from_operator(&HermitianOperator::identity(3), &tol()).unwrap();
        assert!(v.is_trivial());
        assert_eq!(v.id(), Context::trivial(3, &tol()).id());
    }

    #[test]
    fn oscillator_position_has_simple_spectrum() {
        let osc = make_oscillator(3, 1.0, 1.0, 1.0).unwrap();
        let v = context_from_operator(&osc.x, &tol()).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v.ranks(), &[1, 1, 1]);
    }

    #[test]
    fn set_partitions_count_bell() {
        for k in 1..=6 {
            assert_eq!(set_partitions(k).len(), bell(k));
        }
        assert_eq!(bell(3), 5);
        assert_eq!(bell(5), 52);
    }

    #[test]
    fn leq_basics() {
        let z = context_from_operator(&pauli::z(), &tol()).unwrap();
        let x = context_from_operator(&pauli::x(), &tol()).unwrap();
        let t = Context::trivial(2, &tol());
        assert!(is_leq(&t, &z, &tol()).unwrap());
        assert!(is_leq(&z, &z, &tol()).unwrap());
        assert!(!is_leq(&z, &x, &tol()).unwrap());
        assert!(!is_leq(&z, &t, &tol()).unwrap());
        assert!(matches!(
            is_leq(&z, &Context::trivial(3, &tol()), &tol()),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn invalid_atoms_rejected() {
        let half = HermitianOperator::diagonal(&[0.5, 0.0]);
        assert!(Context::from_atoms(vec![half], &tol()).is_err());
        let overlapping = vec![
            HermitianOperator::diagonal(&[1.0, 0.0]),
            HermitianOperator::diagonal(&[1.0, 1.0]),
        ];
        assert!(Context::from_atoms(overlapping, &tol()).is_err());
    }

    #[test]
    fn ids_are_canonical() {
        let a = Context::from_atoms(
            vec![
                HermitianOperator::diagonal(&[1.0, 0.0, 0.0]),
                HermitianOperator::diagonal(&[0.0, 1.0, 1.0]),
            ],
            &tol(),
        )
        .unwrap();
        let b = Context::from_atoms(
            vec![
                HermitianOperator::diagonal(&[0.0, 1.0, 1.0]),
                HermitianOperator::diagonal(&[1.0, 0.0, 0.0]),
            ],
            &tol(),
        )
        .unwrap();
        assert_eq!(a.id(), b.id());
        assert_eq!(a.ranks(), &[2, 1]);
    }

    #[test]
    fn coarsenings_of_three_atoms() {
        let v = Context::from_atoms(
            vec![
                HermitianOperator::diagonal(&[1.0, 0.0, 0.0]),
                HermitianOperator::diagonal(&[0.0, 1.0, 0.0]),
                HermitianOperator::diagonal(&[0.0, 0.0, 1.0]),
            ],
            &tol(),
        )
        .unwrap();
        let cs = coarsenings(&v, &tol()).unwrap();
        assert_eq!(cs.len(), 5);
        for c in &cs {
            assert!(is_leq(c, &v, &tol()).unwrap());
        }
        assert!(cs.iter().any(|c| c.is_trivial()));
        assert!(cs.iter().any(|c| c.id() == v.id()));
    }

    #[test]
    fn size_limit() {
        let osc = make_oscillator(3, 1.0, 1.0, 1.0).unwrap();
        let opts = CategoryOptions {
            max_contexts: 3,
            ..Default::default()
        };
        let ops = [osc.x.clone(), osc.p.clone(), osc.h.clone()];
        assert!(matches!(
            build_category(&ops, &opts, &tol(), 0),
            Err(Error::SizeLimitExceeded { .. })
        ));
    }
}
