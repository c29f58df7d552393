//! Stage automorphisms: membership of operator products in each stage,
//! atom-permutation automorphisms between stage families, and the
//! reflection gauge on stage reals.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::contexts::{Context, ContextCategory};
use crate::daseinise::outer_from_decomposition;
use crate::error::{Error, Result};
use crate::interp::{StageFamily, Status};
use crate::linalg::{eigendecompose, op_mul, ComplexMatrix, HermitianOperator, Tolerances, C64};

/// `E_V(M) = Σ_Q tr(QMQ)/tr(Q) · Q`, with its coefficients.
pub fn conditional_expectation(m: &ComplexMatrix, v: &Context) -> Result<(ComplexMatrix, Vec<C64>)> {
    if m.dim() != v.dim() {
        return Err(Error::DimMismatch {
            left: v.dim(),
            right: m.dim(),
        });
    }
    let coeffs = v.coefficients(m);
    Ok((v.synthesize_complex(&coeffs), coeffs))
}

#[derive(Clone, Debug)]
pub enum S1Candidate {
    ConditionalExpectation,
    UserSupplied(BTreeMap<String, ComplexMatrix>),
}

#[derive(Clone, Debug, Serialize)]
pub struct S1Stage {
    pub context_id: String,
    /// `[re, im]` per atom.
    pub coefficients: Vec<[f64; 2]>,
    /// Distance of the candidate from the self-adjoint part of the stage.
    pub residual: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct S1Report {
    pub operator: String,
    pub candidate: &'static str,
    pub holds_everywhere: bool,
    pub per_stage: Vec<S1Stage>,
}

impl S1Report {
    pub fn holds_at(&self, context_id: &str) -> bool {
        self.per_stage.iter().any(|s| s.context_id == context_id && s.holds)
    }
}

fn membership_bound(m: &ComplexMatrix, tol: &Tolerances) -> f64 {
    tol.num * (1.0 + m.max_abs())
}

/// Checks whether a stage candidate for `m` lies in the self-adjoint part of
/// each context.
pub fn check_s1(
    m: &ComplexMatrix,
    label: &str,
    cat: &ContextCategory,
    candidate: &S1Candidate,
    tol: &Tolerances,
) -> Result<S1Report> {
    if m.dim() != cat.dim() {
        return Err(Error::DimMismatch {
            left: cat.dim(),
            right: m.dim(),
        });
    }
    let per_stage: Vec<S1Stage> = cat
        .contexts()
        .par_iter()
        .map(|v| -> Result<S1Stage> {
            let bound = membership_bound(m, tol);
            let (coeffs, residual) = match candidate {
                S1Candidate::ConditionalExpectation => {
                    let (_, coeffs) = conditional_expectation(m, v)?;
                    let residual = coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
                    (coeffs, residual)
                }
                S1Candidate::UserSupplied(members) => match members.get(v.id()) {
                    Some(c) => {
                        if c.dim() != v.dim() {
                            return Err(Error::DimMismatch {
                                left: v.dim(),
                                right: c.dim(),
                            });
                        }
                        let coeffs = v.coefficients(c);
                        let residual = v
                            .membership_residual(c)
                            .max(coeffs.iter().map(|z| z.im.abs()).fold(0.0, f64::max));
                        (coeffs, residual)
                    }
                    None => (Vec::new(), f64::INFINITY),
                },
            };
            Ok(S1Stage {
                context_id: v.id().to_string(),
                coefficients: coeffs.iter().map(|c| [c.re, c.im]).collect(),
                residual,
                holds: residual <= bound,
            })
        })
        .collect::<Result<_>>()?;
    let mut per_stage = per_stage;
    per_stage.sort_by(|a, b| a.context_id.cmp(&b.context_id));
    Ok(S1Report {
        operator: label.to_string(),
        candidate: match candidate {
            S1Candidate::ConditionalExpectation => "conditional_expectation",
            S1Candidate::UserSupplied(_) => "user_supplied",
        },
        holds_everywhere: per_stage.iter().all(|s| s.holds),
        per_stage,
    })
}

/// Stage family of the real parts of the conditional expectations of `m`,
/// restricted to the stages where the imaginary parts vanish.
pub fn s1_family(m: &ComplexMatrix, cat: &ContextCategory, tol: &Tolerances) -> Result<StageFamily> {
    let bound = membership_bound(m, tol);
    let mut values = BTreeMap::new();
    for v in cat.contexts() {
        let (_, coeffs) = conditional_expectation(m, v)?;
        if coeffs.iter().all(|c| c.im.abs() <= bound) {
            values.insert(v.id().to_string(), coeffs.iter().map(|c| c.re).collect());
        }
    }
    StageFamily::from_values(values, cat, tol)
}

/// An automorphism of a stage: `Σ a_i Q_i ↦ Σ a_i Q_{π(i)}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageAutomorphism {
    pub context_id: String,
    pub permutation: Vec<usize>,
}

impl StageAutomorphism {
    pub fn identity(v: &Context) -> Self {
        Self {
            context_id: v.id().to_string(),
            permutation: (0..v.len()).collect(),
        }
    }

    pub fn is_bijective(&self, atoms: usize) -> bool {
        let mut seen = vec![false; atoms];
        self.permutation.len() == atoms
            && self
                .permutation
                .iter()
                .all(|&j| j < atoms && !std::mem::replace(&mut seen[j], true))
    }

    /// Gelfand values after transport: the value of atom `i` moves to `π(i)`.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; values.len()];
        for (i, &j) in self.permutation.iter().enumerate() {
            out[j] = values[i];
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct S2Stage {
    pub context_id: String,
    pub witness: Option<Vec<usize>>,
    pub replay_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct S2Report {
    pub status: Status,
    pub realizable: bool,
    pub threshold: f64,
    pub per_stage: Vec<S2Stage>,
}

impl S2Report {
    pub fn automorphisms(&self) -> BTreeMap<String, StageAutomorphism> {
        self.per_stage
            .iter()
            .filter_map(|s| {
                s.witness.as_ref().map(|p| {
                    (
                        s.context_id.clone(),
                        StageAutomorphism {
                            context_id: s.context_id.clone(),
                            permutation: p.clone(),
                        },
                    )
                })
            })
            .collect()
    }
}

const MAX_LEAVES: usize = 4096;

/// Lexicographically least permutation sending `from` onto `to` within the
/// grouping tolerance whose replay passes `accept`.
fn least_matching_permutation(
    from: &[f64],
    to: &[f64],
    group: f64,
    accept: &dyn Fn(&[usize]) -> bool,
) -> Option<Vec<usize>> {
    fn go(
        i: usize,
        from: &[f64],
        to: &[f64],
        group: f64,
        used: &mut [bool],
        perm: &mut Vec<usize>,
        leaves: &mut usize,
        accept: &dyn Fn(&[usize]) -> bool,
    ) -> bool {
        if i == from.len() {
            *leaves += 1;
            return accept(perm);
        }
        for j in 0..to.len() {
            if used[j] || (from[i] - to[j]).abs() > group || *leaves >= MAX_LEAVES {
                continue;
            }
            used[j] = true;
            perm.push(j);
            if go(i + 1, from, to, group, used, perm, leaves, accept) {
                return true;
            }
            perm.pop();
            used[j] = false;
        }
        false
    }
    if from.len() != to.len() {
        return None;
    }
    let mut sorted_from = from.to_vec();
    let mut sorted_to = to.to_vec();
    sorted_from.sort_by(f64::total_cmp);
    sorted_to.sort_by(f64::total_cmp);
    if sorted_from.iter().zip(&sorted_to).any(|(a, b)| (a - b).abs() > group) {
        return None;
    }
    let mut perm = Vec::with_capacity(from.len());
    let mut used = vec![false; to.len()];
    let mut leaves = 0;
    go(0, from, to, group, &mut used, &mut perm, &mut leaves, accept).then_some(perm)
}

/// Searches, stage by stage, for an atom permutation transporting `f1` onto
/// `f2`.
pub fn find_s2_automorphism(f1: &StageFamily, f2: &StageFamily, cat: &ContextCategory, tol: &Tolerances) -> S2Report {
    let threshold = 10.0 * tol.num;
    let mut per_stage: Vec<S2Stage> = cat
        .contexts()
        .par_iter()
        .filter_map(|v| {
            let (a, b) = (f1.get(v.id()), f2.get(v.id()));
            if a.is_none() && b.is_none() {
                return None;
            }
            let (Some(a), Some(b)) = (a, b) else {
                return Some(S2Stage {
                    context_id: v.id().to_string(),
                    witness: None,
                    replay_error: None,
                });
            };
            let replay = |perm: &[usize]| -> f64 {
                let moved = StageAutomorphism {
                    context_id: v.id().to_string(),
                    permutation: perm.to_vec(),
                }
                .apply(&a.values);
                v.synthesize(&moved).matrix().dist(b.operator.matrix())
            };
            let witness = least_matching_permutation(&a.values, &b.values, tol.group, &|p| replay(p) <= threshold);
            Some(S2Stage {
                context_id: v.id().to_string(),
                replay_error: witness.as_deref().map(replay),
                witness,
            })
        })
        .collect();
    per_stage.sort_by(|a, b| a.context_id.cmp(&b.context_id));
    let realizable = per_stage.iter().all(|s| s.witness.is_some());
    S2Report {
        status: Status::from_bool(realizable),
        realizable,
        threshold,
        per_stage,
    }
}

/// Gelfand transform of a stage member: one real per atom.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageReals {
    pub context_id: String,
    pub values: Vec<f64>,
}

/// The reflection `x ↦ 2d − x` on stage reals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaugeMap {
    pub d: StageReals,
}

impl GaugeMap {
    pub fn context_id(&self) -> &str {
        &self.d.context_id
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.d.values.iter().zip(x).map(|(d, x)| 2.0 * d - x).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TakeutiAtom {
    pub l1: f64,
    pub l2: f64,
    pub l: f64,
    pub d: f64,
    /// `0 ≤ l1 ≤ l2` within tolerance.
    pub relation_holds: bool,
    /// The reflection exchanges `l1` and `l2` to machine precision.
    pub swaps: bool,
    /// Image of `l1` under negation after translation by `d`.
    pub literal_image: f64,
    pub literal_matches: bool,
    pub involutive: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TakeutiStage {
    pub context_id: String,
    pub relation_holds: bool,
    pub atoms: Vec<TakeutiAtom>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TakeutiReport {
    pub operator: String,
    pub status: Status,
    /// Stages where `0 ≤ l1 ≤ l2` holds at every atom.
    pub relation_stages: usize,
    pub stages: usize,
    pub swap_where_relation_holds: bool,
    pub involutive: bool,
    pub literal_mismatches: usize,
    pub per_stage: Vec<TakeutiStage>,
    #[serde(skip)]
    pub maps: BTreeMap<String, GaugeMap>,
}

fn machine_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 8.0 * f64::EPSILON * (1.0 + a.abs().max(b.abs()))
}

/// Compares the daseinised external square with the square of the
/// daseinisation at every atom and builds the reflection about their
/// midpoint.
pub fn takeuti_gauge(a: &HermitianOperator, cat: &ContextCategory, tol: &Tolerances) -> Result<TakeutiReport> {
    if a.dim() != cat.dim() {
        return Err(Error::DimMismatch {
            left: cat.dim(),
            right: a.dim(),
        });
    }
    let square = HermitianOperator::from_hermitian_part(&op_mul(a.matrix(), a.matrix())?);
    let da = eigendecompose(a, tol)?;
    let da2 = eigendecompose(&square, tol)?;
    let mut rows: Vec<(TakeutiStage, GaugeMap)> = cat
        .contexts()
        .par_iter()
        .map(|v| {
            let l1s = outer_from_decomposition(&da2, v, tol).atom_values;
            let l2s: Vec<f64> = outer_from_decomposition(&da, v, tol)
                .atom_values
                .iter()
                .map(|x| x * x)
                .collect();
            let ds: Vec<f64> = l1s
                .iter()
                .zip(&l2s)
                .map(|(l1, l2)| 0.5 * (l1 - l2).abs() + l1)
                .collect();
            let map = GaugeMap {
                d: StageReals {
                    context_id: v.id().to_string(),
                    values: ds.clone(),
                },
            };
            let img1 = map.apply(&l1s);
            let img2 = map.apply(&l2s);
            let back = map.apply(&img1);
            let atoms: Vec<TakeutiAtom> = (0..v.len())
                .map(|i| {
                    let (l1, l2, d) = (l1s[i], l2s[i], ds[i]);
                    let literal_image = -(l1 - d);
                    TakeutiAtom {
                        l1,
                        l2,
                        l: (l1 - l2).abs(),
                        d,
                        relation_holds: l1 >= -tol.num && l1 <= l2 + tol.num,
                        swaps: machine_close(img1[i], l2) && machine_close(img2[i], l1),
                        literal_image,
                        literal_matches: (literal_image - l2).abs() <= tol.num,
                        involutive: machine_close(back[i], l1),
                    }
                })
                .collect();
            let stage = TakeutiStage {
                context_id: v.id().to_string(),
                relation_holds: atoms.iter().all(|t| t.relation_holds),
                atoms,
            };
            (stage, map)
        })
        .collect();
    rows.sort_by(|a, b| a.0.context_id.cmp(&b.0.context_id));
    let all_atoms = || rows.iter().flat_map(|(s, _)| &s.atoms);
    // Within the relation tolerance l1 may exceed l2 by rounding, where the
    // midpoint is off by that excess.
    let swap_where_relation_holds = all_atoms()
        .filter(|t| t.relation_holds && t.l1 <= t.l2)
        .all(|t| t.swaps);
    let involutive = all_atoms().all(|t| t.involutive);
    let literal_mismatches = all_atoms().filter(|t| !t.literal_matches).count();
    let relation_stages = rows.iter().filter(|(s, _)| s.relation_holds).count();
    let stages = rows.len();
    let (per_stage, maps): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(TakeutiReport {
        operator: a.display_label().to_string(),
        status: Status::from_bool(swap_where_relation_holds && involutive),
        relation_stages,
        stages,
        swap_where_relation_holds,
        involutive,
        literal_mismatches,
        per_stage,
        maps: maps.into_iter().map(|m| (m.context_id().to_string(), m)).collect(),
    })
}

#[derive(Clone, Debug)]
pub enum StageMap {
    Gauge(GaugeMap),
    Permutation(StageAutomorphism),
}

#[derive(Clone, Debug, Serialize)]
pub struct AssembledStage {
    pub context_id: String,
    pub kind: &'static str,
    pub involutive: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CategoryAutomorphism {
    pub stages: Vec<AssembledStage>,
}

fn invalid(context: &str, reason: impl Into<String>) -> Error {
    Error::InvalidStageMap {
        context: context.to_string(),
        reason: reason.into(),
    }
}

/// Validates one stage map per context and records the family.
pub fn assemble_category_automorphism(
    per_stage: &BTreeMap<String, StageMap>,
    cat: &ContextCategory,
) -> Result<CategoryAutomorphism> {
    if let Some(extra) = per_stage.keys().find(|id| cat.get(id).is_none()) {
        return Err(invalid(extra, "not a context of the category"));
    }
    let mut ids: Vec<&str> = cat.contexts().iter().map(|v| v.id()).collect();
    ids.sort_unstable();
    let mut stages = Vec::with_capacity(ids.len());
    for id in ids {
        let v = cat.get(id).expect("listed above");
        let map = per_stage.get(id).ok_or_else(|| invalid(id, "missing stage map"))?;
        let stage = match map {
            StageMap::Permutation(p) => {
                if !p.is_bijective(v.len()) {
                    return Err(invalid(id, "atom map is not a bijection"));
                }
                let twice = p.apply(&p.apply(&(0..v.len()).map(|i| i as f64).collect::<Vec<_>>()));
                AssembledStage {
                    context_id: id.to_string(),
                    kind: "atom_permutation",
                    involutive: twice.iter().enumerate().all(|(i, &x)| x == i as f64),
                }
            }
            StageMap::Gauge(g) => {
                if g.d.values.len() != v.len() {
                    return Err(invalid(id, "stage reals do not match the atoms"));
                }
                if g.d.values.iter().any(|d| !d.is_finite()) {
                    return Err(invalid(id, "non-finite reflection centre"));
                }
                let probe: Vec<f64> = (0..v.len()).map(|i| i as f64 + 0.5).collect();
                AssembledStage {
                    context_id: id.to_string(),
                    kind: "reflection",
                    involutive: g
                        .apply(&g.apply(&probe))
                        .iter()
                        .zip(&probe)
                        .all(|(a, b)| machine_close(*a, *b)),
                }
            }
        };
        stages.push(stage);
    }
    Ok(CategoryAutomorphism { stages })
}
