//! The spectral presheaf over a context category, its clopen subobjects and
//! the Heyting algebra they form, and sieve-valued truth values.
//!
//! Characters of a finite-dimensional abelian algebra are in bijection with
//! its atoms, so `Σ(V)` is represented by atom indices and restriction along
//! `V′ ≤ V` sends an atom of `V` to the unique atom of `V′` above it.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::contexts::ContextCategory;
use crate::daseinise::{check_projection, outer_projection};
use crate::error::{Error, Result};
use crate::linalg::{op_mul, vector_norm, HermitianOperator, Tolerances, C64};

#[derive(Debug)]
pub struct SpectralPresheaf<'a> {
    category: &'a ContextCategory,
    /// `restrictions[(v, w)]` for `w ≤ v`: atom of `v` ↦ atom of `w`.
    restrictions: BTreeMap<(usize, usize), Vec<usize>>,
    down: Vec<Vec<usize>>,
    fingerprint: u64,
}

pub fn build_spectral_presheaf<'a>(cat: &'a ContextCategory, tol: &Tolerances) -> Result<SpectralPresheaf<'a>> {
    let n = cat.len();
    let mut restrictions = BTreeMap::new();
    for v in 0..n {
        for w in cat.below(v) {
            let upper = cat.context(v);
            let lower = cat.context(w);
            let map = if v == w {
                (0..upper.len()).collect()
            } else {
                upper
                    .atoms()
                    .iter()
                    .enumerate()
                    .map(|(k, q)| {
                        let candidates: Vec<usize> = lower
                            .atoms()
                            .iter()
                            .enumerate()
                            .filter(|(_, c)| {
                                op_mul(c.matrix(), q.matrix())
                                    .map(|m| m.dist(q.matrix()) <= tol.num)
                                    .unwrap_or(false)
                            })
                            .map(|(i, _)| i)
                            .collect();
                        if candidates.len() != 1 {
                            return Err(Error::RestrictionAmbiguous {
                                from: upper.id().to_string(),
                                to: lower.id().to_string(),
                                atom: k,
                                candidates: candidates.len(),
                            });
                        }
                        Ok(candidates[0])
                    })
                    .collect::<Result<Vec<usize>>>()?
            };
            restrictions.insert((v, w), map);
        }
    }

    let down = (0..n).map(|v| cat.below(v)).collect();
    let mut hasher = Sha256::new();
    for c in cat.contexts() {
        hasher.update(c.id().as_bytes());
        hasher.update([0u8]);
    }
    let fingerprint = u64::from_le_bytes(hasher.finalize()[..8].try_into().unwrap());
    let presheaf = SpectralPresheaf {
        category: cat,
        restrictions,
        down,
        fingerprint,
    };
    if let Some((upper, middle, lower)) = presheaf.first_noncommuting_triangle() {
        return Err(Error::FunctorialityViolation {
            upper: cat.context(upper).id().to_string(),
            middle: cat.context(middle).id().to_string(),
            lower: cat.context(lower).id().to_string(),
        });
    }
    Ok(presheaf)
}

impl<'a> SpectralPresheaf<'a> {
    pub fn category(&self) -> &'a ContextCategory {
        self.category
    }

    /// Number of characters at context `v`.
    pub fn section_len(&self, v: usize) -> usize {
        self.category.context(v).len()
    }

    pub fn restriction(&self, v: usize, w: usize) -> Option<&[usize]> {
        self.restrictions.get(&(v, w)).map(Vec::as_slice)
    }

    pub fn restrict(&self, v: usize, w: usize, atom: usize) -> usize {
        self.restrictions[&(v, w)][atom]
    }

    pub fn down(&self, v: usize) -> &[usize] {
        &self.down[v]
    }

    /// Searches all chains `lower ≤ middle ≤ upper` for a restriction triangle
    /// that fails to commute.
    pub fn first_noncommuting_triangle(&self) -> Option<(usize, usize, usize)> {
        for v in 0..self.category.len() {
            for &m in &self.down[v] {
                for &w in &self.down[m] {
                    let direct = &self.restrictions[&(v, w)];
                    let first = &self.restrictions[&(v, m)];
                    let second = &self.restrictions[&(m, w)];
                    if (0..direct.len()).any(|k| second[first[k]] != direct[k]) {
                        return Some((v, m, w));
                    }
                }
            }
        }
        None
    }

    /// Number of `(upper, middle, lower)` chains checked by
    /// [`Self::first_noncommuting_triangle`].
    pub fn triangle_count(&self) -> usize {
        (0..self.category.len())
            .map(|v| self.down[v].iter().map(|&m| self.down[m].len()).sum::<usize>())
            .sum()
    }

    pub fn empty(&self) -> ClopenSubobject {
        ClopenSubobject {
            fingerprint: self.fingerprint,
            sets: vec![BTreeSet::new(); self.category.len()],
        }
    }

    pub fn total(&self) -> ClopenSubobject {
        ClopenSubobject {
            fingerprint: self.fingerprint,
            sets: (0..self.category.len())
                .map(|v| (0..self.section_len(v)).collect())
                .collect(),
        }
    }

    /// Smallest clopen subobject containing atom `atom` at context `v`.
    pub fn principal(&self, v: usize, atom: usize) -> ClopenSubobject {
        let mut s = self.empty();
        for &w in &self.down[v] {
            s.sets[w].insert(self.restrict(v, w, atom));
        }
        s
    }

    /// Builds a subobject from raw sets, rejecting unstable families.
    pub fn subobject(&self, sets: Vec<BTreeSet<usize>>) -> Result<ClopenSubobject> {
        if sets.len() != self.category.len() {
            return Err(Error::PresheafMismatch);
        }
        let s = ClopenSubobject {
            fingerprint: self.fingerprint,
            sets,
        };
        if !self.is_stable(&s) {
            return Err(Error::InvalidParameter("family is not stable under restriction".into()));
        }
        Ok(s)
    }

    pub fn is_stable(&self, s: &ClopenSubobject) -> bool {
        (0..self.category.len()).all(|v| {
            s.sets[v].iter().all(|&q| {
                q < self.section_len(v)
                    && self.down[v]
                        .iter()
                        .all(|&w| s.sets[w].contains(&self.restrict(v, w, q)))
            })
        })
    }

    fn check(&self, s: &ClopenSubobject) -> Result<()> {
        if s.fingerprint != self.fingerprint || s.sets.len() != self.category.len() {
            return Err(Error::PresheafMismatch);
        }
        Ok(())
    }

    pub fn meet(&self, s: &ClopenSubobject, t: &ClopenSubobject) -> Result<ClopenSubobject> {
        self.check(s)?;
        self.check(t)?;
        Ok(ClopenSubobject {
            fingerprint: self.fingerprint,
            sets: s.sets.iter().zip(&t.sets).map(|(a, b)| a & b).collect(),
        })
    }

    pub fn join(&self, s: &ClopenSubobject, t: &ClopenSubobject) -> Result<ClopenSubobject> {
        self.check(s)?;
        self.check(t)?;
        Ok(ClopenSubobject {
            fingerprint: self.fingerprint,
            sets: s.sets.iter().zip(&t.sets).map(|(a, b)| a | b).collect(),
        })
    }

    /// Kripke implication: `q ∈ (S ⇒ T)(V)` iff for every `V′ ≤ V`,
    /// `q|V′ ∈ S(V′)` implies `q|V′ ∈ T(V′)`.
    pub fn implies(&self, s: &ClopenSubobject, t: &ClopenSubobject) -> Result<ClopenSubobject> {
        self.check(s)?;
        self.check(t)?;
        let sets = (0..self.category.len())
            .map(|v| {
                (0..self.section_len(v))
                    .filter(|&q| {
                        self.down[v].iter().all(|&w| {
                            let r = self.restrict(v, w, q);
                            !s.sets[w].contains(&r) || t.sets[w].contains(&r)
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(ClopenSubobject {
            fingerprint: self.fingerprint,
            sets,
        })
    }

    pub fn not(&self, s: &ClopenSubobject) -> Result<ClopenSubobject> {
        self.implies(s, &self.empty())
    }

    /// `S ≤ T` componentwise.
    pub fn le(&self, s: &ClopenSubobject, t: &ClopenSubobject) -> Result<bool> {
        self.check(s)?;
        self.check(t)?;
        Ok(s.sets.iter().zip(&t.sets).all(|(a, b)| a.is_subset(b)))
    }

    /// `S(V)` = atoms of `V` lying under the outer daseinisation of `P`.
    pub fn proposition(&self, p: &HermitianOperator, tol: &Tolerances) -> Result<ClopenSubobject> {
        check_projection(p, tol)?;
        let sets = self
            .category
            .contexts()
            .iter()
            .map(|v| {
                let d = outer_projection(p, v, tol)?;
                Ok(v.atoms()
                    .iter()
                    .enumerate()
                    .filter(|(_, q)| {
                        op_mul(d.matrix(), q.matrix())
                            .map(|m| m.dist(q.matrix()) <= tol.num)
                            .unwrap_or(false)
                    })
                    .map(|(i, _)| i)
                    .collect())
            })
            .collect::<Result<Vec<BTreeSet<usize>>>>()?;
        Ok(ClopenSubobject {
            fingerprint: self.fingerprint,
            sets,
        })
    }

    /// Random clopen subobject: either a union of principal subobjects or the
    /// stable interior of a random family.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> ClopenSubobject {
        let n = self.category.len();
        if rng.random_bool(0.5) {
            let mut s = self.empty();
            for _ in 0..rng.random_range(0..=3) {
                let v = rng.random_range(0..n);
                let q = rng.random_range(0..self.section_len(v));
                s = self.join(&s, &self.principal(v, q)).expect("same presheaf");
            }
            s
        } else {
            let density: f64 = rng.random_range(0.3..1.0);
            let raw: Vec<BTreeSet<usize>> = (0..n)
                .map(|v| (0..self.section_len(v)).filter(|_| rng.random_bool(density)).collect())
                .collect();
            let sets = (0..n)
                .map(|v| {
                    raw[v]
                        .iter()
                        .copied()
                        .filter(|&q| self.down[v].iter().all(|&w| raw[w].contains(&self.restrict(v, w, q))))
                        .collect()
                })
                .collect();
            ClopenSubobject {
                fingerprint: self.fingerprint,
                sets,
            }
        }
    }

    /// A subobject violating excluded middle, if the category admits one:
    /// the principal subobject of the first atom of a context with at least
    /// two atoms. Its negation is empty because every character restricts to
    /// the single character of the trivial context.
    pub fn excluded_middle_witness(&self) -> Result<Option<ExcludedMiddleWitness>> {
        let total = self.total();
        for v in self.category.maximal() {
            if self.section_len(v) < 2 {
                continue;
            }
            let s = self.principal(v, 0);
            let lem = self.join(&s, &self.not(&s)?)?;
            if lem != total {
                let failing: Vec<String> = (0..self.category.len())
                    .filter(|&w| lem.sets[w] != total.sets[w])
                    .map(|w| self.category.context(w).id().to_string())
                    .collect();
                return Ok(Some(ExcludedMiddleWitness {
                    subobject: s.to_entries(self.category),
                    failing_contexts: failing,
                }));
            }
        }
        Ok(None)
    }

    /// Sieve-valued truth value of `P` in the state `ψ` at every root.
    pub fn truth_value(&self, p: &HermitianOperator, psi: &[C64], tol: &Tolerances) -> Result<BTreeMap<String, Sieve>> {
        check_projection(p, tol)?;
        let norm = vector_norm(psi);
        if (norm - 1.0).abs() > tol.num || psi.len() != self.category.dim() {
            return Err(Error::NotUnitVector { norm });
        }
        let holds: Vec<bool> = self
            .category
            .contexts()
            .iter()
            .map(|v| {
                let d = outer_projection(p, v, tol)?;
                Ok(d.matrix().expectation(psi).re >= 1.0 - tol.num)
            })
            .collect::<Result<_>>()?;
        let mut out = BTreeMap::new();
        for v in 0..self.category.len() {
            let members: BTreeSet<usize> = self.down[v].iter().copied().filter(|&w| holds[w]).collect();
            let closed = members
                .iter()
                .all(|&w| self.down[w].iter().all(|u| members.contains(u)));
            let root = self.category.context(v).id().to_string();
            if !closed {
                return Err(Error::NotASieve { root });
            }
            let members = members
                .into_iter()
                .map(|w| self.category.context(w).id().to_string())
                .collect();
            out.insert(root.clone(), Sieve { root, members });
        }
        Ok(out)
    }
}

/// Per-context subsets of `Σ(V)` stable under restriction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClopenSubobject {
    fingerprint: u64,
    sets: Vec<BTreeSet<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubobjectEntry {
    pub context_id: String,
    pub atom_indices: Vec<usize>,
}

impl ClopenSubobject {
    pub fn at(&self, v: usize) -> &BTreeSet<usize> {
        &self.sets[v]
    }

    pub fn is_empty(&self) -> bool {
        self.sets.iter().all(BTreeSet::is_empty)
    }

    pub fn to_entries(&self, cat: &ContextCategory) -> Vec<SubobjectEntry> {
        self.sets
            .iter()
            .enumerate()
            .map(|(v, s)| SubobjectEntry {
                context_id: cat.context(v).id().to_string(),
                atom_indices: s.iter().copied().collect(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExcludedMiddleWitness {
    pub subobject: Vec<SubobjectEntry>,
    pub failing_contexts: Vec<String>,
}

/// Downward-closed set of contexts below a root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Sieve {
    pub root: String,
    pub members: BTreeSet<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeytingReport {
    pub samples: usize,
    pub checks: usize,
    /// Names of the laws that failed, with the sample index.
    pub failures: Vec<(String, usize)>,
    pub triangles: usize,
    pub functorial: bool,
    pub excluded_middle_witness: Option<ExcludedMiddleWitness>,
}

impl HeytingReport {
    /// Laws and functoriality hold, and excluded middle fails somewhere when
    /// two maximal contexts are incomparable.
    pub fn passes(&self, needs_witness: bool) -> bool {
        self.failures.is_empty() && self.functorial && (!needs_witness || self.excluded_middle_witness.is_some())
    }
}

/// Checks the Heyting algebra laws on `samples` random clopen subobjects,
/// together with functoriality of the restriction maps.
pub fn heyting_suite<R: Rng>(sigma: &SpectralPresheaf<'_>, samples: usize, rng: &mut R) -> Result<HeytingReport> {
    let xs: Vec<ClopenSubobject> = (0..samples.max(1)).map(|_| sigma.sample(rng)).collect();
    let n = xs.len();
    let (bottom, top) = (sigma.empty(), sigma.total());
    let mut failures = Vec::new();
    let mut checks = 0;
    for i in 0..n {
        let (s, t, u) = (&xs[i], &xs[(i + 1) % n], &xs[(7 * i + 3) % n]);
        let m = |a: &ClopenSubobject, b: &ClopenSubobject| sigma.meet(a, b);
        let j = |a: &ClopenSubobject, b: &ClopenSubobject| sigma.join(a, b);
        let laws: [(&str, bool); 12] = [
            ("stable", sigma.is_stable(s)),
            ("meet_commutative", m(s, t)? == m(t, s)?),
            ("join_commutative", j(s, t)? == j(t, s)?),
            ("meet_associative", m(&m(s, t)?, u)? == m(s, &m(t, u)?)?),
            ("join_associative", j(&j(s, t)?, u)? == j(s, &j(t, u)?)?),
            ("absorption", m(s, &j(s, t)?)? == *s && j(s, &m(s, t)?)? == *s),
            ("units", m(s, &top)? == *s && j(s, &bottom)? == *s),
            ("distributive", m(s, &j(t, u)?)? == j(&m(s, t)?, &m(s, u)?)?),
            (
                "adjunction",
                sigma.le(u, &sigma.implies(s, t)?)? == sigma.le(&m(u, s)?, t)?,
            ),
            ("implies_self", sigma.implies(s, s)? == top),
            ("implies_from_top", sigma.implies(&top, t)? == *t),
            ("double_negation", sigma.le(s, &sigma.not(&sigma.not(s)?)?)?),
        ];
        for (name, ok) in laws {
            checks += 1;
            if !ok {
                failures.push((name.to_string(), i));
            }
        }
    }
    Ok(HeytingReport {
        samples: n,
        checks,
        failures,
        triangles: sigma.triangle_count(),
        functorial: sigma.first_noncommuting_triangle().is_none(),
        excluded_middle_witness: sigma.excluded_middle_witness()?,
    })
}

/// Whether two maximal contexts of the category are incomparable and at
/// least one of them has two atoms.
pub fn admits_excluded_middle_failure(cat: &ContextCategory) -> bool {
    let maximal = cat.maximal();
    maximal.len() >= 2 && maximal.iter().any(|&v| cat.context(v).len() >= 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts::{build_category, CategoryOptions};
    use crate::linalg::pauli;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn qubit() -> ContextCategory {
        build_category(&[pauli::z(), pauli::x()], &CategoryOptions::default(), &tol(), 0).unwrap()
    }

    #[test]
    fn trivial_category() {
        let cat = build_category(
            &[HermitianOperator::identity(2)],
            &CategoryOptions::default(),
            &tol(),
            0,
        )
        .unwrap();
        assert_eq!(cat.len(), 1);
        let sigma = build_spectral_presheaf(&cat, &tol()).unwrap();
        assert_eq!(sigma.section_len(0), 1);
        assert_eq!(sigma.restriction(0, 0), Some(&[0usize][..]));
    }

    #[test]
    fn heyting_units() {
        let cat = qubit();
        let sigma = build_spectral_presheaf(&cat, &tol()).unwrap();
        let p0 = HermitianOperator::projector(&[pauli::ket0()], 2);
        let s = sigma.proposition(&p0, &tol()).unwrap();
        assert_eq!(sigma.meet(&s, &sigma.total()).unwrap(), s);
        assert_eq!(sigma.join(&s, &sigma.empty()).unwrap(), s);
        assert_eq!(sigma.implies(&s, &s).unwrap(), sigma.total());
        assert_eq!(sigma.implies(&sigma.total(), &s).unwrap(), s);
    }

    #[test]
    fn mismatched_presheaves() {
        let a = qubit();
        let b = build_category(&[pauli::z()], &CategoryOptions::default(), &tol(), 0).unwrap();
        let sa = build_spectral_presheaf(&a, &tol()).unwrap();
        let sb = build_spectral_presheaf(&b, &tol()).unwrap();
        assert!(matches!(
            sa.meet(&sa.total(), &sb.total()),
            Err(Error::PresheafMismatch)
        ));
    }

    #[test]
    fn unit_vector_required() {
        let cat = qubit();
        let sigma = build_spectral_presheaf(&cat, &tol()).unwrap();
        let p0 = HermitianOperator::projector(&[pauli::ket0()], 2);
        let psi = vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        assert!(matches!(
            sigma.truth_value(&p0, &psi, &tol()),
            Err(Error::NotUnitVector { .. })
        ));
    }

    #[test]
    fn unstable_family_rejected() {
        let cat = qubit();
        let sigma = build_spectral_presheaf(&cat, &tol()).unwrap();
        let top = cat.maximal()[0];
        let mut sets = vec![BTreeSet::new(); cat.len()];
        sets[top].insert(0);
        assert!(sigma.subobject(sets).is_err());
    }
}
