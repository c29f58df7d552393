//! Stage-wise interpretation of operator expressions.
//!
//! Symbols are interpreted by their outer daseinisation at each stage and
//! sums, scalings and products are then taken inside the (abelian) stage.
//! The result is a [`StageFamily`]: one operator per context, which need not
//! form a presheaf.

pub mod lattice;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contexts::{Context, ContextCategory};
use crate::daseinise::{outer_from_decomposition, outer_selfadjoint};
use crate::error::{Error, Result};
use crate::linalg::{
    eigendecompose, op_add, op_mul, op_scale, ComplexMatrix, HermitianOperator, Oscillator, SpectralDecomposition,
    Tolerances, C64,
};

pub use lattice::{verify_lemma1, Lemma1Report, ProjectionLattice};

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorExpr {
    Symbol(String),
    Scale(f64, Box<OperatorExpr>),
    Add(Box<OperatorExpr>, Box<OperatorExpr>),
    Mul(Box<OperatorExpr>, Box<OperatorExpr>),
}

impl OperatorExpr {
    pub fn symbol(label: impl Into<String>) -> Self {
        Self::Symbol(label.into())
    }

    pub fn scale(c: f64, e: Self) -> Self {
        Self::Scale(c, Box::new(e))
    }

    pub fn add(a: Self, b: Self) -> Self {
        Self::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Self, b: Self) -> Self {
        Self::Mul(Box::new(a), Box::new(b))
    }

    /// `P²/2m + mω²X²/2` over the given symbol labels.
    pub fn oscillator_hamiltonian(p: &str, x: &str, mass: f64, omega: f64) -> Self {
        Self::add(
            Self::scale(1.0 / (2.0 * mass), Self::mul(Self::symbol(p), Self::symbol(p))),
            Self::scale(0.5 * mass * omega * omega, Self::mul(Self::symbol(x), Self::symbol(x))),
        )
    }

    pub fn symbols(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Self::Symbol(s) => {
                out.insert(s);
            }
            Self::Scale(_, e) => e.collect_symbols(out),
            Self::Add(a, b) | Self::Mul(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    /// Evaluates the expression on the external operators, without
    /// daseinisation. Products of non-commuting symbols are not Hermitian.
    pub fn eval_external(&self, env: &Environment) -> Result<ComplexMatrix> {
        match self {
            Self::Symbol(s) => env
                .get(s)
                .map(|a| a.matrix().clone())
                .ok_or_else(|| Error::UnboundSymbol(s.clone())),
            Self::Scale(c, e) => Ok(op_scale(C64::new(*c, 0.0), &e.eval_external(env)?)),
            Self::Add(a, b) => op_add(&a.eval_external(env)?, &b.eval_external(env)?),
            Self::Mul(a, b) => op_mul(&a.eval_external(env)?, &b.eval_external(env)?),
        }
    }

    fn eval_stage(&self, stage: &BTreeMap<&str, ComplexMatrix>) -> Result<ComplexMatrix> {
        match self {
            Self::Symbol(s) => stage
                .get(s.as_str())
                .cloned()
                .ok_or_else(|| Error::UnboundSymbol(s.clone())),
            Self::Scale(c, e) => Ok(op_scale(C64::new(*c, 0.0), &e.eval_stage(stage)?)),
            Self::Add(a, b) => op_add(&a.eval_stage(stage)?, &b.eval_stage(stage)?),
            Self::Mul(a, b) => op_mul(&a.eval_stage(stage)?, &b.eval_stage(stage)?),
        }
    }
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Symbol(s) => write!(f, "{s}"),
            Self::Scale(c, e) => write!(f, "{c}*({e})"),
            Self::Add(a, b) => write!(f, "({a} + {b})"),
            Self::Mul(a, b) => write!(f, "{a}{b}"),
        }
    }
}

pub type Environment = BTreeMap<String, HermitianOperator>;

/// A stage member together with its Gelfand values (one per atom).
#[derive(Clone, Debug)]
pub struct StageOperator {
    pub operator: HermitianOperator,
    pub values: Vec<f64>,
}

/// One operator per context, each lying in its context.
#[derive(Clone, Debug)]
pub struct StageFamily {
    stages: BTreeMap<String, StageOperator>,
    presheaf_compatible: bool,
}

fn stage_tolerance(m: &ComplexMatrix, tol: &Tolerances) -> f64 {
    10.0 * tol.num * (1.0 + m.max_abs())
}

/// Checks that `m` lies in `v` and returns its Gelfand values.
fn to_stage_operator(m: &ComplexMatrix, v: &Context, tol: &Tolerances) -> Result<StageOperator> {
    let bound = stage_tolerance(m, tol);
    let residual = v.membership_residual(m).max(v.commutation_defect(m));
    if residual > bound {
        return Err(Error::NotInContext {
            context: v.id().to_string(),
            residual,
        });
    }
    let coeffs = v.coefficients(m);
    let imag = coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if imag > bound {
        return Err(Error::NotInContext {
            context: v.id().to_string(),
            residual: imag,
        });
    }
    let values: Vec<f64> = coeffs.iter().map(|c| c.re).collect();
    Ok(StageOperator {
        operator: HermitianOperator::from_hermitian_part(m),
        values,
    })
}

impl StageFamily {
    /// Wraps externally supplied stage members, checking each lies in its
    /// context.
    pub fn from_members(
        members: BTreeMap<String, HermitianOperator>,
        cat: &ContextCategory,
        tol: &Tolerances,
    ) -> Result<Self> {
        let mut stages = BTreeMap::new();
        for (id, op) in members {
            let v = cat
                .get(&id)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown context {id}")))?;
            stages.insert(id, to_stage_operator(op.matrix(), v, tol)?);
        }
        let mut family = Self {
            stages,
            presheaf_compatible: false,
        };
        family.presheaf_compatible = family.check_presheaf_compatibility(cat, tol)?;
        Ok(family)
    }

    /// Family assembled from Gelfand values.
    pub fn from_values(values: BTreeMap<String, Vec<f64>>, cat: &ContextCategory, tol: &Tolerances) -> Result<Self> {
        let mut stages = BTreeMap::new();
        for (id, vals) in values {
            let v = cat
                .get(&id)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown context {id}")))?;
            if vals.len() != v.len() {
                return Err(Error::DimMismatch {
                    left: v.len(),
                    right: vals.len(),
                });
            }
            stages.insert(
                id,
                StageOperator {
                    operator: v.synthesize(&vals),
                    values: vals,
                },
            );
        }
        let mut family = Self {
            stages,
            presheaf_compatible: false,
        };
        family.presheaf_compatible = family.check_presheaf_compatibility(cat, tol)?;
        Ok(family)
    }

    pub fn get(&self, context_id: &str) -> Option<&StageOperator> {
        self.stages.get(context_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &StageOperator)> {
        self.stages.iter()
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// Diagnostic: whether coarse-graining the member at `V` onto each
    /// covered `V′` reproduces the member at `V′`.
    pub fn is_presheaf_compatible(&self) -> bool {
        self.presheaf_compatible
    }

    fn check_presheaf_compatibility(&self, cat: &ContextCategory, tol: &Tolerances) -> Result<bool> {
        for &(lower, upper) in cat.covers() {
            let (lo, up) = (cat.context(lower), cat.context(upper));
            let (Some(f_up), Some(f_lo)) = (self.stages.get(up.id()), self.stages.get(lo.id())) else {
                continue;
            };
            let coarse = outer_selfadjoint(&f_up.operator, lo, tol)?;
            if coarse.operator.matrix().dist(f_lo.operator.matrix()) > stage_tolerance(f_lo.operator.matrix(), tol) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Replaces the member at `context_id` by zero.
    fn zero_stage(&mut self, context_id: &str) {
        if let Some(s) = self.stages.get_mut(context_id) {
            s.values.iter_mut().for_each(|v| *v = 0.0);
            s.operator = HermitianOperator::zeros(s.operator.dim());
        }
    }
}

/// Spectral decompositions of every environment symbol used by `e`.
fn decompose_symbols(
    e: &OperatorExpr,
    env: &Environment,
    cat: &ContextCategory,
    tol: &Tolerances,
) -> Result<BTreeMap<String, SpectralDecomposition>> {
    let mut out = BTreeMap::new();
    for s in e.symbols() {
        let a = env.get(s).ok_or_else(|| Error::UnboundSymbol(s.to_string()))?;
        if a.dim() != cat.dim() {
            return Err(Error::DimMismatch {
                left: cat.dim(),
                right: a.dim(),
            });
        }
        out.insert(s.to_string(), eigendecompose(a, tol)?);
    }
    Ok(out)
}

/// δ-interpretation of `e` at every stage of `cat`.
pub fn delta_interpret(
    e: &OperatorExpr,
    env: &Environment,
    cat: &ContextCategory,
    tol: &Tolerances,
) -> Result<StageFamily> {
    let decompositions = decompose_symbols(e, env, cat, tol)?;
    let stages: Vec<(String, StageOperator)> = cat
        .contexts()
        .par_iter()
        .map(|v| {
            let daseinised: BTreeMap<&str, ComplexMatrix> = decompositions
                .iter()
                .map(|(s, d)| {
                    (
                        s.as_str(),
                        outer_from_decomposition(d, v, tol).operator.matrix().clone(),
                    )
                })
                .collect();
            let m = e.eval_stage(&daseinised)?;
            Ok((v.id().to_string(), to_stage_operator(&m, v, tol)?))
        })
        .collect::<Result<_>>()?;
    let mut family = StageFamily {
        stages: stages.into_iter().collect(),
        presheaf_compatible: false,
    };
    family.presheaf_compatible = family.check_presheaf_compatibility(cat, tol)?;
    Ok(family)
}

#[derive(Clone, Debug, Serialize)]
pub struct StageCommutator {
    pub context_id: String,
    pub norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma2Report {
    pub a: String,
    pub b: String,
    pub status: Status,
    pub threshold: f64,
    pub max_stage_commutator: f64,
    pub external_commutator: f64,
    /// Largest difference between the δ-interpreted `AB` and `BA` families.
    pub max_product_order_gap: f64,
    pub per_stage: Vec<StageCommutator>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    /// An empirical finding with no pass criterion attached.
    Reported,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Self::Pass
    }
}

/// Stage-wise commutators `‖[δ_V(A), δ_V(B)]‖_max`, against the external
/// commutator `‖[A, B]‖_max`.
pub fn verify_lemma2(
    a: &HermitianOperator,
    b: &HermitianOperator,
    cat: &ContextCategory,
    tol: &Tolerances,
) -> Result<Lemma2Report> {
    let da = eigendecompose(a, tol)?;
    let db = eigendecompose(b, tol)?;
    let per_stage: Vec<StageCommutator> = cat
        .contexts()
        .par_iter()
        .map(|v| {
            let x = outer_from_decomposition(&da, v, tol);
            let y = outer_from_decomposition(&db, v, tol);
            let c = x.operator.matrix().commutator(y.operator.matrix())?;
            Ok(StageCommutator {
                context_id: v.id().to_string(),
                norm: c.max_abs(),
            })
        })
        .collect::<Result<_>>()?;

    let la = a.label().unwrap_or("A").to_string();
    let lb = b.label().unwrap_or("B").to_string();
    let mut env = Environment::new();
    env.insert("A".into(), a.clone());
    env.insert("B".into(), b.clone());
    let ab = delta_interpret(
        &OperatorExpr::mul(OperatorExpr::symbol("A"), OperatorExpr::symbol("B")),
        &env,
        cat,
        tol,
    )?;
    let ba = delta_interpret(
        &OperatorExpr::mul(OperatorExpr::symbol("B"), OperatorExpr::symbol("A")),
        &env,
        cat,
        tol,
    )?;
    let max_product_order_gap = ab
        .iter()
        .map(|(id, s)| {
            s.operator
                .matrix()
                .dist(ba.get(id).expect("same category").operator.matrix())
        })
        .fold(0.0, f64::max);

    let threshold = 10.0 * tol.num;
    let max_stage_commutator = per_stage.iter().map(|s| s.norm).fold(0.0, f64::max);
    let external_commutator = a.matrix().commutator(b.matrix())?.max_abs();
    Ok(Lemma2Report {
        a: la,
        b: lb,
        status: Status::from_bool(max_stage_commutator <= threshold && max_product_order_gap <= threshold),
        threshold,
        max_stage_commutator,
        external_commutator,
        max_product_order_gap,
        per_stage,
    })
}

/// Distinct eigenvalues of each stage member.
#[derive(Clone, Debug, Serialize)]
pub struct InternalSpectrum {
    pub per_stage: BTreeMap<String, Vec<f64>>,
    /// Always `false`: the stage-indexed spectra are not required to form a
    /// presheaf.
    pub is_presheaf: bool,
}

impl InternalSpectrum {
    pub fn min_at(&self, context_id: &str) -> Option<f64> {
        self.per_stage.get(context_id).and_then(|s| s.first().copied())
    }
}

pub fn internal_spectrum(family: &StageFamily, tol: &Tolerances) -> InternalSpectrum {
    let per_stage = family
        .iter()
        .map(|(id, s)| {
            let mut values = s.values.clone();
            values.sort_by(f64::total_cmp);
            let range = values.last().unwrap_or(&0.0) - values.first().unwrap_or(&0.0);
            let gap = tol.group * (range + 1.0);
            values.dedup_by(|b, a| (*b - *a).abs() <= gap);
            (id.clone(), values)
        })
        .collect();
    InternalSpectrum {
        per_stage,
        is_presheaf: false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Delta0Rule {
    /// Zero `H_V` unless both daseinised spectra contain zero.
    SpectraOnly,
    /// Zero `H_V` unless some atom carries zero for both daseinised operators.
    #[default]
    JointAtom,
}

impl Delta0Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::SpectraOnly => "spectra_only",
            Self::JointAtom => "joint_atom",
        }
    }
}

impl std::str::FromStr for Delta0Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectra_only" => Ok(Self::SpectraOnly),
            "joint_atom" => Ok(Self::JointAtom),
            other => Err(Error::Parse(format!("unknown delta0 rule {other}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageClassification {
    pub context_id: String,
    pub zero_in_spec_p: bool,
    pub zero_in_spec_x: bool,
    pub joint_zero_atom: bool,
    pub zeroed: bool,
    /// Minimum of the δ-interpreted `H_V` before any zeroing.
    pub min_delta: f64,
    /// Minimum after applying the rule.
    pub min_delta0: f64,
}

#[derive(Clone, Debug)]
pub struct Delta0Result {
    pub rule: Delta0Rule,
    pub family: StageFamily,
    pub classification: Vec<StageClassification>,
}

fn zero_in(values: &[f64], tol: &Tolerances) -> bool {
    values.iter().any(|v| v.abs() <= tol.zero)
}

/// δ₀-interpretation of a Hamiltonian expression over the designated
/// momentum and position symbols.
pub fn delta0_interpret(
    h_expr: &OperatorExpr,
    env: &Environment,
    cat: &ContextCategory,
    rule: Delta0Rule,
    p_label: &str,
    x_label: &str,
    tol: &Tolerances,
) -> Result<Delta0Result> {
    let symbols = h_expr.symbols();
    for s in [p_label, x_label] {
        if !symbols.contains(s) {
            return Err(Error::MissingSymbol(s.to_string()));
        }
    }
    if let Some(extra) = symbols.iter().find(|s| **s != p_label && **s != x_label) {
        return Err(Error::InvalidParameter(format!(
            "hamiltonian may only use {p_label} and {x_label}, found {extra}"
        )));
    }
    let mut family = delta_interpret(h_expr, env, cat, tol)?;
    let p = env.get(p_label).ok_or_else(|| Error::UnboundSymbol(p_label.into()))?;
    let x = env.get(x_label).ok_or_else(|| Error::UnboundSymbol(x_label.into()))?;
    let dp = eigendecompose(p, tol)?;
    let dx = eigendecompose(x, tol)?;

    let mut classification = Vec::with_capacity(cat.len());
    let mut ids: Vec<&Context> = cat.contexts().iter().collect();
    ids.sort_by(|a, b| a.id().cmp(b.id()));
    for v in ids {
        let vp = outer_from_decomposition(&dp, v, tol).atom_values;
        let vx = outer_from_decomposition(&dx, v, tol).atom_values;
        let zero_in_spec_p = zero_in(&vp, tol);
        let zero_in_spec_x = zero_in(&vx, tol);
        let joint_zero_atom = vp
            .iter()
            .zip(&vx)
            .any(|(a, b)| a.abs() <= tol.zero && b.abs() <= tol.zero);
        let zeroed = match rule {
            Delta0Rule::SpectraOnly => !(zero_in_spec_p && zero_in_spec_x),
            Delta0Rule::JointAtom => !joint_zero_atom,
        };
        let stage = family.get(v.id()).expect("family covers the category");
        let min_delta = stage.values.iter().copied().fold(f64::INFINITY, f64::min);
        if zeroed {
            family.zero_stage(v.id());
        }
        let min_delta0 = if zeroed { 0.0 } else { min_delta };
        classification.push(StageClassification {
            context_id: v.id().to_string(),
            zero_in_spec_p,
            zero_in_spec_x,
            joint_zero_atom,
            zeroed,
            min_delta,
            min_delta0,
        });
    }
    family.presheaf_compatible = family.check_presheaf_compatibility(cat, tol)?;
    Ok(Delta0Result {
        rule,
        family,
        classification,
    })
}

/// Designated momentum/position pair and the constants of
/// `H = P²/2m + mω²X²/2`.
#[derive(Clone, Debug)]
pub struct OscillatorSystem {
    pub p: HermitianOperator,
    pub x: HermitianOperator,
    pub mass: f64,
    pub omega: f64,
}

impl OscillatorSystem {
    pub fn from_oscillator(osc: &Oscillator) -> Self {
        Self {
            p: osc.p.clone(),
            x: osc.x.clone(),
            mass: osc.mass,
            omega: osc.omega,
        }
    }

    pub fn environment(&self) -> Environment {
        let mut env = Environment::new();
        env.insert("P".into(), self.p.clone().with_label("P"));
        env.insert("X".into(), self.x.clone().with_label("X"));
        env
    }

    pub fn hamiltonian(&self) -> OperatorExpr {
        OperatorExpr::oscillator_hamiltonian("P", "X", self.mass, self.omega)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma3Report {
    pub rule: Delta0Rule,
    pub status: Status,
    pub threshold: f64,
    pub per_stage: Vec<StageClassification>,
    /// Stages whose δ₀ minimum is not zero.
    pub violations: Vec<String>,
    /// Stages where both daseinised spectra contain zero but `H_V` does not.
    pub sufficiency_gaps: Vec<String>,
    /// Stages the two rules treat differently.
    pub rule_disagreements: Vec<String>,
    /// Whether every stage is either zeroed or has zero in its spectrum.
    pub classification_consistent: bool,
}

/// Checks that the δ₀-interpreted Hamiltonian has minimum zero at every stage
/// and reports the stage-wise zero-in-spectrum implication.
pub fn verify_lemma3(
    cat: &ContextCategory,
    system: &OscillatorSystem,
    rule: Delta0Rule,
    tol: &Tolerances,
) -> Result<Lemma3Report> {
    let env = system.environment();
    let h = system.hamiltonian();
    let chosen = delta0_interpret(&h, &env, cat, rule, "P", "X", tol)?;
    let other_rule = match rule {
        Delta0Rule::SpectraOnly => Delta0Rule::JointAtom,
        Delta0Rule::JointAtom => Delta0Rule::SpectraOnly,
    };
    let other = delta0_interpret(&h, &env, cat, other_rule, "P", "X", tol)?;
    let spectrum = internal_spectrum(&chosen.family, tol);

    let threshold = tol.zero;
    let mut violations = Vec::new();
    let mut sufficiency_gaps = Vec::new();
    let mut consistent = true;
    for c in &chosen.classification {
        let min = spectrum.min_at(&c.context_id).unwrap_or(f64::INFINITY);
        if min > threshold {
            violations.push(c.context_id.clone());
        }
        if c.zero_in_spec_p && c.zero_in_spec_x && c.min_delta.abs() > threshold {
            sufficiency_gaps.push(c.context_id.clone());
        }
        let expected_zeroed = match rule {
            Delta0Rule::SpectraOnly => !(c.zero_in_spec_p && c.zero_in_spec_x),
            Delta0Rule::JointAtom => !c.joint_zero_atom,
        };
        let zero_or_zeroed = c.zeroed || c.min_delta.abs() <= threshold;
        let violation_listed = violations.contains(&c.context_id);
        consistent &= expected_zeroed == c.zeroed && (zero_or_zeroed != violation_listed);
    }
    let rule_disagreements = chosen
        .classification
        .iter()
        .zip(&other.classification)
        .filter(|(a, b)| a.zeroed != b.zeroed)
        .map(|(a, _)| a.context_id.clone())
        .collect();
    Ok(Lemma3Report {
        rule,
        status: Status::from_bool(violations.is_empty() && consistent),
        threshold,
        per_stage: chosen.classification,
        violations,
        sufficiency_gaps,
        rule_disagreements,
        classification_consistent: consistent,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SquareGap {
    pub context_id: String,
    /// `‖δ_V(A²) − δ_V(A)²‖_max`.
    pub gap: f64,
}

fn stage_square_gap(
    da: &SpectralDecomposition,
    da2: &SpectralDecomposition,
    v: &Context,
    tol: &Tolerances,
) -> Result<f64> {
    let sq = outer_from_decomposition(da2, v, tol);
    let d = outer_from_decomposition(da, v, tol);
    let d2 = op_mul(d.operator.matrix(), d.operator.matrix())?;
    Ok(sq.operator.matrix().dist(&d2))
}

fn square_decompositions(
    a: &HermitianOperator,
    tol: &Tolerances,
) -> Result<(SpectralDecomposition, SpectralDecomposition)> {
    let a2 = HermitianOperator::from_hermitian_part(&op_mul(a.matrix(), a.matrix())?);
    Ok((eigendecompose(a, tol)?, eigendecompose(&a2, tol)?))
}

/// Largest gap between daseinising the external square and squaring the
/// daseinisation, over all stages.
pub fn square_gap(a: &HermitianOperator, cat: &ContextCategory, tol: &Tolerances) -> Result<SquareGap> {
    let (da, da2) = square_decompositions(a, tol)?;
    let gaps: Vec<SquareGap> = cat
        .contexts()
        .par_iter()
        .map(|v| {
            Ok(SquareGap {
                context_id: v.id().to_string(),
                gap: stage_square_gap(&da, &da2, v, tol)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(gaps
        .into_iter()
        .fold(None::<SquareGap>, |best, g| match best {
            Some(b) if b.gap >= g.gap => Some(b),
            _ => Some(g),
        })
        .expect("category is nonempty"))
}

#[derive(Clone, Debug, Serialize)]
pub struct SquareWitness {
    pub operator: String,
    pub context_id: String,
    /// Set when the context is a coarsening of a category member: the
    /// member's id and the two atoms merged.
    pub coarsened_from: Option<(String, [usize; 2])>,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NonMultiplicativity {
    pub threshold: f64,
    pub category_gaps: Vec<(String, SquareGap)>,
    pub coarsenings_searched: usize,
    pub witness: Option<SquareWitness>,
}

/// Searches for `A, V` with `‖δ_V(A²) − δ_V(A)²‖_max > 100·τ_num`: first over
/// the category, then over the contexts obtained by merging two atoms of a
/// category member.
pub fn find_non_multiplicativity(
    operators: &[HermitianOperator],
    cat: &ContextCategory,
    tol: &Tolerances,
) -> Result<NonMultiplicativity> {
    let threshold = 100.0 * tol.num;
    let category_gaps = operators
        .iter()
        .map(|a| Ok((a.display_label().to_string(), square_gap(a, cat, tol)?)))
        .collect::<Result<Vec<_>>>()?;
    let best = category_gaps
        .iter()
        .filter(|(_, g)| g.gap > threshold)
        .max_by(|a, b| a.1.gap.total_cmp(&b.1.gap));
    if let Some((label, g)) = best {
        return Ok(NonMultiplicativity {
            threshold,
            witness: Some(SquareWitness {
                operator: label.clone(),
                context_id: g.context_id.clone(),
                coarsened_from: None,
                gap: g.gap,
            }),
            category_gaps,
            coarsenings_searched: 0,
        });
    }
    let mut members: Vec<&Context> = cat.contexts().iter().filter(|v| v.len() >= 3).collect();
    members.sort_by(|a, b| a.id().cmp(b.id()));
    let mut searched = 0;
    for a in operators {
        let (da, da2) = square_decompositions(a, tol)?;
        for v in &members {
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    let merged = op_add(v.atom(i).matrix(), v.atom(j).matrix())?;
                    let mut atoms: Vec<HermitianOperator> = (0..v.len())
                        .filter(|&k| k != i && k != j)
                        .map(|k| v.atom(k).clone())
                        .collect();
                    atoms.push(HermitianOperator::from_hermitian_part(&merged));
                    let w = Context::from_atoms(atoms, tol)?;
                    searched += 1;
                    let gap = stage_square_gap(&da, &da2, &w, tol)?;
                    if gap > threshold {
                        return Ok(NonMultiplicativity {
                            threshold,
                            category_gaps,
                            coarsenings_searched: searched,
                            witness: Some(SquareWitness {
                                operator: a.display_label().to_string(),
                                context_id: w.id().to_string(),
                                coarsened_from: Some((v.id().to_string(), [i, j])),
                                gap,
                            }),
                        });
                    }
                }
            }
        }
    }
    Ok(NonMultiplicativity {
        threshold,
        category_gaps,
        coarsenings_searched: searched,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts::{build_category, context_from_operator, CategoryOptions};
    use crate::linalg::{make_oscillator, pauli};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn unbound_symbol() {
        let cat = build_category(&[pauli::z()], &CategoryOptions::default(), &tol(), 0).unwrap();
        let env = Environment::new();
        assert!(matches!(
            delta_interpret(&OperatorExpr::symbol("A"), &env, &cat, &tol()),
            Err(Error::UnboundSymbol(_))
        ));
    }

    #[test]
    fn cancellation_gives_zero() {
        let cat = build_category(&[pauli::z(), pauli::x()], &CategoryOptions::default(), &tol(), 0).unwrap();
        let mut env = Environment::new();
        env.insert("A".into(), pauli::x());
        let e = OperatorExpr::add(
            OperatorExpr::symbol("A"),
            OperatorExpr::scale(-1.0, OperatorExpr::symbol("A")),
        );
        let f = delta_interpret(&e, &env, &cat, &tol()).unwrap();
        assert_eq!(f.len(), cat.len());
        for (_, s) in f.iter() {
            assert!(s.operator.matrix().max_abs() < 1e-14);
        }
        let spec = internal_spectrum(&f, &tol());
        assert!(spec.per_stage.values().all(|v| v == &vec![0.0]));
        assert!(!spec.is_presheaf);
    }

    #[test]
    fn products_commute_on_qubit_stages() {
        let cat = build_category(&[pauli::z()], &CategoryOptions::default(), &tol(), 0).unwrap();
        let mut env = Environment::new();
        env.insert("X".into(), pauli::x());
        env.insert("P".into(), pauli::z());
        let xp = delta_interpret(
            &OperatorExpr::mul(OperatorExpr::symbol("X"), OperatorExpr::symbol("P")),
            &env,
            &cat,
            &tol(),
        )
        .unwrap();
        let px = delta_interpret(
            &OperatorExpr::mul(OperatorExpr::symbol("P"), OperatorExpr::symbol("X")),
            &env,
            &cat,
            &tol(),
        )
        .unwrap();
        let vz = context_from_operator(&pauli::z(), &tol()).unwrap();
        let at_z = xp.get(vz.id()).unwrap();
        assert!(at_z.operator.matrix().dist(pauli::z().matrix()) < 1e-12);
        for (id, s) in xp.iter() {
            assert!(s.operator.matrix().dist(px.get(id).unwrap().operator.matrix()) < 1e-12);
        }
    }

    #[test]
    fn missing_designated_symbol() {
        let osc = make_oscillator(3, 1.0, 1.0, 1.0).unwrap();
        let cat = build_category(&[osc.x.clone()], &CategoryOptions::default(), &tol(), 0).unwrap();
        let system = OscillatorSystem::from_oscillator(&osc);
        let env = system.environment();
        let only_p = OperatorExpr::mul(OperatorExpr::symbol("P"), OperatorExpr::symbol("P"));
        assert!(matches!(
            delta0_interpret(&only_p, &env, &cat, Delta0Rule::JointAtom, "P", "X", &tol()),
            Err(Error::MissingSymbol(s)) if s == "X"
        ));
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("joint_atom".parse::<Delta0Rule>().unwrap(), Delta0Rule::JointAtom);
        assert_eq!("spectra_only".parse::<Delta0Rule>().unwrap(), Delta0Rule::SpectraOnly);
        assert!("both".parse::<Delta0Rule>().is_err());
        assert_eq!(Delta0Rule::default(), Delta0Rule::JointAtom);
    }
}
