//! Command-line orchestration: configuration in, artifacts and a
//! machine-readable report out.
//!
//! Exit codes: 0 when every executed check passes, 2 when a check fails,
//! 1 on errors.

pub mod artifacts;
pub mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::contexts::{build_category, ContextCategory};
use crate::error::{Error, Result};
use crate::gauge::{
    assemble_category_automorphism, check_s1, find_s2_automorphism, s1_family, takeuti_gauge, S1Candidate, StageMap,
};
use crate::interp::lattice::{lemma1_trials, DEFAULT_MAX_LATTICE};
use crate::interp::{
    delta0_interpret, delta_interpret, find_non_multiplicativity, internal_spectrum, verify_lemma1, verify_lemma2,
    verify_lemma3, Delta0Rule, Environment, OperatorExpr, OscillatorSystem, StageFamily, Status,
};
use crate::linalg::{eigendecompose, op_mul, HermitianOperator, Tolerances};
use crate::sheaf::{admits_excluded_middle_failure, build_spectral_presheaf, heyting_suite};
use crate::twogroup::{
    eckmann_hilton_check, group_suite, interchange_suite, FiniteCategory, FiniteGroup, DEFAULT_OBJECT_LIMIT,
};

pub use artifacts::{CONTEXTS_FILE, DASEINISATION_FILE, REPORT_FILE};
pub use config::{RunConfig, System};

pub const LEMMA1_TRIALS: usize = 100;
pub const HEYTING_SAMPLES: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Contexts,
    Daseinise,
    Spectrum,
    Verify,
    GaugeCheck,
    TwoGroup,
    All,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Contexts => "contexts",
            Self::Daseinise => "daseinise",
            Self::Spectrum => "spectrum",
            Self::Verify => "verify",
            Self::GaugeCheck => "gauge-check",
            Self::TwoGroup => "twogroup",
            Self::All => "all",
        }
    }

    fn runs(self, part: Self) -> bool {
        self == part || self == Self::All
    }
}

impl std::str::FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Self::Contexts,
            Self::Daseinise,
            Self::Spectrum,
            Self::Verify,
            Self::GaugeCheck,
            Self::TwoGroup,
            Self::All,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
        .ok_or_else(|| Error::Parse(format!("unknown subcommand {s}")))
    }
}

/// Command-line settings that take precedence over the configuration file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub rule: Option<Delta0Rule>,
    pub full_subcontexts: bool,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub exit_code: i32,
    pub cache_hit: bool,
    pub failed: Vec<String>,
    pub out_dir: PathBuf,
}

/// One verification result.
#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub lemma: String,
    pub status: Status,
    pub tolerances: Tolerances,
    pub per_stage: Value,
    pub witnesses: Value,
    pub details: Value,
}

fn to_value<T: Serialize>(v: T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Parse(e.to_string()))
}

fn entry(
    lemma: &str,
    status: Status,
    tol: &Tolerances,
    per_stage: impl Serialize,
    witnesses: impl Serialize,
    details: impl Serialize,
) -> Result<Entry> {
    Ok(Entry {
        lemma: lemma.to_string(),
        status,
        tolerances: *tol,
        per_stage: to_value(per_stage)?,
        witnesses: to_value(witnesses)?,
        details: to_value(details)?,
    })
}

fn skipped(lemma: &str, tol: &Tolerances, reason: &str) -> Result<Entry> {
    entry(
        lemma,
        Status::Skipped,
        tol,
        Vec::<()>::new(),
        Vec::<()>::new(),
        json!({ "reason": reason }),
    )
}

#[derive(Serialize)]
struct Tool {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct CategorySummary {
    dim: usize,
    contexts: usize,
    maximal: usize,
    covers: usize,
    generators: BTreeMap<String, String>,
}

/// Spectral facts about the inputs that decide which stages can carry zero.
#[derive(Serialize)]
struct OperatorSummary {
    min: f64,
    max: f64,
    distinct_eigenvalues: usize,
    zero_in_spectrum: bool,
}

#[derive(Serialize)]
struct SystemSummary {
    dim: usize,
    /// `odd` or `even`; truncated position and momentum have 0 in their
    /// spectra exactly for odd dimension.
    dim_parity: &'static str,
    operators: BTreeMap<String, OperatorSummary>,
}

fn system_summary(system: &System, tol: &Tolerances) -> Result<SystemSummary> {
    let operators = system
        .operators
        .iter()
        .map(|a| {
            let d = eigendecompose(a, tol)?;
            Ok((
                a.display_label().to_string(),
                OperatorSummary {
                    min: d.min(),
                    max: d.max(),
                    distinct_eigenvalues: d.len(),
                    zero_in_spectrum: d.has_zero(tol),
                },
            ))
        })
        .collect::<Result<_>>()?;
    Ok(SystemSummary {
        dim: system.dim,
        dim_parity: if system.dim % 2 == 1 { "odd" } else { "even" },
        operators,
    })
}

#[derive(Serialize)]
struct Timestamps {
    started_unix_ms: u128,
    finished_unix_ms: u128,
    durations_ms: BTreeMap<String, u128>,
}

#[derive(Serialize)]
struct Report<'a> {
    tool: Tool,
    command: &'static str,
    config: &'a RunConfig,
    config_hash: String,
    system: SystemSummary,
    category: CategorySummary,
    artifacts: BTreeMap<String, Value>,
    results: BTreeMap<String, Entry>,
    status: Status,
    timestamps: Timestamps,
}

fn unix_ms(t: SystemTime) -> u128 {
    t.duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// Caps the global thread pool from `DASEINKIT_THREADS`.
pub fn configure_threads() -> Result<()> {
    let Ok(text) = std::env::var("DASEINKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = text.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::InvalidParameter(format!("DASEINKIT_THREADS must be a positive integer, got {text:?}"))
    })?;
    // a pool built earlier in this process keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run(command: Command, config_path: &Path, out_dir: &Path, overrides: &Overrides) -> Result<Outcome> {
    let mut config = RunConfig::load(config_path)?;
    if let Some(rule) = overrides.rule {
        config.delta0_rule = rule;
    }
    if overrides.full_subcontexts {
        config.category.full_subcontexts = true;
    }
    run_config(command, &config, out_dir)
}

struct Timer(BTreeMap<String, u128>);

impl Timer {
    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        self.0.insert(name.to_string(), start.elapsed().as_millis());
        Ok(out)
    }
}

pub fn run_config(command: Command, config: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let started = SystemTime::now();
    let mut timer = Timer(BTreeMap::new());
    let hash = config.hash();
    let tol = config.tolerances;
    let system = config.system()?;
    std::fs::create_dir_all(out_dir)?;

    let contexts_path = out_dir.join(CONTEXTS_FILE);
    let (cat, cache_hit) = timer.time("contexts", || {
        if let Some(cat) = artifacts::load_cached_category(&contexts_path, &hash, &tol) {
            return Ok((cat, true));
        }
        let cat = build_category(&system.operators, &config.category, &tol, config.seed)?;
        artifacts::write_json(&contexts_path, &artifacts::ContextsFile::from_category(&cat, &hash))?;
        Ok((cat, false))
    })?;

    let mut artifact_info = BTreeMap::new();
    artifact_info.insert("contexts".to_string(), json!(CONTEXTS_FILE));
    let mut results = BTreeMap::new();

    if command.runs(Command::Daseinise) {
        let rows = timer.time("daseinise", || {
            let (bytes, rows) = artifacts::daseinisation_csv(&system.operators, &cat, &tol)?;
            artifacts::write_atomic(&out_dir.join(DASEINISATION_FILE), &bytes)?;
            Ok(rows)
        })?;
        artifact_info.insert(
            "daseinisation".to_string(),
            json!({ "file": DASEINISATION_FILE, "rows": rows }),
        );
    }
    if command.runs(Command::Spectrum) {
        let e = timer.time("spectrum", || spectrum_entry(&system, &cat, config.delta0_rule, &tol))?;
        results.insert("spectrum".to_string(), e);
    }
    if command.runs(Command::Verify) {
        for (name, e) in timer.time("verify", || verify_entries(config, &system, &cat, &tol))? {
            results.insert(name, e);
        }
    }
    if command.runs(Command::GaugeCheck) {
        for (name, e) in timer.time("gauge", || gauge_entries(&system, &cat, &tol))? {
            results.insert(name, e);
        }
    }
    if command.runs(Command::TwoGroup) {
        let e = timer.time("twogroup", || twogroup_entry(config, &cat, &tol))?;
        results.insert("twogroup".to_string(), e);
    }

    let failed: Vec<String> = results
        .iter()
        .filter(|(_, e)| e.status == Status::Fail)
        .map(|(k, _)| k.clone())
        .collect();
    let status = Status::from_bool(failed.is_empty());
    let report = Report {
        tool: Tool {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
        },
        command: command.as_str(),
        config,
        config_hash: hash,
        system: system_summary(&system, &tol)?,
        category: CategorySummary {
            dim: cat.dim(),
            contexts: cat.len(),
            maximal: cat.maximal().len(),
            covers: cat.covers().len(),
            generators: cat.generators().iter().cloned().collect(),
        },
        artifacts: artifact_info,
        results,
        status,
        timestamps: Timestamps {
            started_unix_ms: unix_ms(started),
            finished_unix_ms: unix_ms(SystemTime::now()),
            durations_ms: timer.0,
        },
    };
    artifacts::write_json(&out_dir.join(REPORT_FILE), &report)?;
    Ok(Outcome {
        status,
        exit_code: if status.is_pass() { 0 } else { 2 },
        cache_hit,
        failed,
        out_dir: out_dir.to_path_buf(),
    })
}

fn pair_operators<'a>(system: &'a System) -> Option<(&'a HermitianOperator, &'a HermitianOperator)> {
    let pair = system.pair.as_ref()?;
    Some((system.operator(&pair.p)?, system.operator(&pair.x)?))
}

fn oscillator_system(system: &System) -> Option<OscillatorSystem> {
    let pair = system.pair.as_ref()?;
    let (p, x) = pair_operators(system)?;
    Some(OscillatorSystem {
        p: p.clone(),
        x: x.clone(),
        mass: pair.m,
        omega: pair.omega,
    })
}

/// Stage spectra agree with the Gelfand values of each member.
fn spectra_consistent(family: &StageFamily, tol: &Tolerances) -> Result<bool> {
    let spectrum = internal_spectrum(family, tol);
    for (id, stage) in family.iter() {
        let eig = eigendecompose(&stage.operator, tol)?;
        let values = &spectrum.per_stage[id];
        let bound = 10.0 * tol.num * (1.0 + stage.operator.matrix().max_abs());
        if eig.len() != values.len() || eig.eigenvalues().iter().zip(values).any(|(a, b)| (a - b).abs() > bound) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn spectrum_entry(system: &System, cat: &ContextCategory, rule: Delta0Rule, tol: &Tolerances) -> Result<Entry> {
    if let Some(osc) = oscillator_system(system) {
        let env = osc.environment();
        let h = osc.hamiltonian();
        let delta = delta_interpret(&h, &env, cat, tol)?;
        let delta0 = delta0_interpret(&h, &env, cat, rule, "P", "X", tol)?;
        let s = internal_spectrum(&delta, tol);
        let s0 = internal_spectrum(&delta0.family, tol);
        let rows: Vec<Value> = s
            .per_stage
            .iter()
            .map(|(id, v)| json!({ "context_id": id, "delta": v, "delta0": s0.per_stage[id] }))
            .collect();
        let ok = spectra_consistent(&delta, tol)? && spectra_consistent(&delta0.family, tol)?;
        return entry(
            "internal_energy_spectrum",
            Status::from_bool(ok),
            tol,
            rows,
            Vec::<()>::new(),
            json!({
                "expression": h.to_string(),
                "rule": rule,
                "is_presheaf": s.is_presheaf,
                "delta_presheaf_compatible": delta.is_presheaf_compatible(),
                "delta0_presheaf_compatible": delta0.family.is_presheaf_compatible(),
            }),
        );
    }
    let mut rows = Vec::new();
    let mut ok = true;
    for a in &system.operators {
        let label = a.display_label();
        let mut env = Environment::new();
        env.insert(label.to_string(), a.clone());
        let family = delta_interpret(&OperatorExpr::symbol(label), &env, cat, tol)?;
        ok &= spectra_consistent(&family, tol)?;
        for (id, v) in internal_spectrum(&family, tol).per_stage {
            rows.push(json!({ "operator": label, "context_id": id, "delta": v }));
        }
    }
    entry(
        "internal_spectrum",
        Status::from_bool(ok),
        tol,
        rows,
        Vec::<()>::new(),
        json!({ "is_presheaf": false }),
    )
}

fn verify_entries(
    config: &RunConfig,
    system: &System,
    cat: &ContextCategory,
    tol: &Tolerances,
) -> Result<Vec<(String, Entry)>> {
    let mut out = Vec::new();

    let trials = lemma1_trials(LEMMA1_TRIALS, config.seed, DEFAULT_MAX_LATTICE, tol)?;
    let instance = if system.dim <= 4 && system.operators.len() >= 2 {
        let lowest = |a: &HermitianOperator| -> Result<HermitianOperator> {
            Ok(eigendecompose(a, tol)?.projections()[0].clone())
        };
        let gens = [lowest(&system.operators[0])?, lowest(&system.operators[1])?];
        Some(verify_lemma1(&gens, system.dim, DEFAULT_MAX_LATTICE, tol)?)
    } else {
        None
    };
    let lemma1_ok = trials.status.is_pass() && instance.as_ref().is_none_or(|r| r.status.is_pass());
    out.push((
        "lemma1".to_string(),
        entry(
            "lemma1",
            Status::from_bool(lemma1_ok),
            tol,
            Vec::<()>::new(),
            json!({ "failed_trials": trials.failures, "system_instance": instance }),
            json!({ "trials": trials }),
        )?,
    ));

    let mut lemma2 = Vec::new();
    let mut lemma2_rows = Vec::new();
    for i in 0..system.operators.len() {
        for j in i + 1..system.operators.len() {
            let r = verify_lemma2(&system.operators[i], &system.operators[j], cat, tol)?;
            for s in &r.per_stage {
                lemma2_rows.push(json!({ "pair": [r.a, r.b], "context_id": s.context_id, "commutator": s.norm }));
            }
            lemma2.push(r);
        }
    }
    let lemma2_status = if lemma2.is_empty() {
        Status::Skipped
    } else {
        Status::from_bool(lemma2.iter().all(|r| r.status.is_pass()))
    };
    let contrast: Vec<Value> = lemma2
        .iter()
        .map(|r| {
            json!({
                "pair": [r.a, r.b],
                "external_commutator": r.external_commutator,
                "max_stage_commutator": r.max_stage_commutator,
                "max_product_order_gap": r.max_product_order_gap,
            })
        })
        .collect();
    out.push((
        "lemma2".to_string(),
        entry(
            "lemma2",
            lemma2_status,
            tol,
            lemma2_rows,
            contrast,
            json!({ "threshold": 10.0 * tol.num }),
        )?,
    ));

    let nm = find_non_multiplicativity(&system.operators, cat, tol)?;
    let status = match (nm.witness.is_some(), system.builtin) {
        (true, _) => Status::Pass,
        (false, true) => Status::Fail,
        (false, false) => Status::Reported,
    };
    out.push((
        "non_multiplicativity".to_string(),
        entry(
            "non_multiplicativity",
            status,
            tol,
            nm.category_gaps
                .iter()
                .map(|(l, g)| json!({ "operator": l, "context_id": g.context_id, "gap": g.gap }))
                .collect::<Vec<_>>(),
            &nm.witness,
            json!({ "threshold": nm.threshold, "coarsenings_searched": nm.coarsenings_searched }),
        )?,
    ));

    match oscillator_system(system) {
        Some(osc) => {
            let report = verify_lemma3(cat, &osc, config.delta0_rule, tol)?;
            let rows: Vec<Value> = report
                .per_stage
                .iter()
                .map(|c| {
                    json!({
                        "context_id": c.context_id,
                        "zero_in_spec_p": c.zero_in_spec_p,
                        "zero_in_spec_x": c.zero_in_spec_x,
                        "joint_zero_atom": c.joint_zero_atom,
                        "zero_in_spec_h": c.min_delta.abs() <= tol.zero,
                    })
                })
                .collect();
            let premise_without_conclusion = |joint_only: bool| {
                report
                    .per_stage
                    .iter()
                    .filter(|c| {
                        let premise = if joint_only {
                            c.joint_zero_atom
                        } else {
                            c.zero_in_spec_p && c.zero_in_spec_x
                        };
                        premise && c.min_delta.abs() > tol.zero
                    })
                    .count()
            };
            let implication_failures = premise_without_conclusion(report.rule == Delta0Rule::JointAtom);
            out.push((
                "lemma1_3".to_string(),
                entry(
                    "lemma1_3",
                    Status::from_bool(implication_failures == 0),
                    tol,
                    rows,
                    json!({ "sufficiency_gaps": report.sufficiency_gaps }),
                    json!({
                        "rule": report.rule,
                        "premise": if report.rule == Delta0Rule::JointAtom { "joint_zero_atom" } else { "zero_in_both_spectra" },
                        "failures": implication_failures,
                    }),
                )?,
            ));
            out.push((
                "lemma3".to_string(),
                entry(
                    "lemma3",
                    report.status,
                    tol,
                    &report.per_stage,
                    json!({ "violations": report.violations, "rule_disagreements": report.rule_disagreements }),
                    json!({
                        "rule": report.rule,
                        "threshold": report.threshold,
                        "classification_consistent": report.classification_consistent,
                    }),
                )?,
            ));
        }
        None => {
            let reason = "no momentum/position pair designated";
            out.push(("lemma1_3".to_string(), skipped("lemma1_3", tol, reason)?));
            out.push(("lemma3".to_string(), skipped("lemma3", tol, reason)?));
        }
    }

    let sigma = build_spectral_presheaf(cat, tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let heyting = heyting_suite(&sigma, HEYTING_SAMPLES, &mut rng)?;
    let needs_witness = admits_excluded_middle_failure(cat);
    let first = &system.operators[0];
    let decomposition = eigendecompose(first, tol)?;
    let p = decomposition.projections()[0].clone();
    let psi = decomposition.eigenvectors()[0][0].clone();
    let sieves = sigma.truth_value(&p, &psi, tol)?;
    let proposition = sigma.proposition(&p, tol)?;
    out.push((
        "heyting".to_string(),
        entry(
            "heyting",
            Status::from_bool(heyting.passes(needs_witness)),
            tol,
            proposition.to_entries(cat),
            json!({ "excluded_middle": heyting.excluded_middle_witness, "law_failures": heyting.failures }),
            json!({
                "samples": heyting.samples,
                "checks": heyting.checks,
                "triangles": heyting.triangles,
                "functorial": heyting.functorial,
                "witness_required": needs_witness,
                "truth_value": {
                    "proposition": format!("lowest spectral projection of {}", first.display_label()),
                    "state": format!("lowest eigenvector of {}", first.display_label()),
                    "sieves": sieves.into_values().collect::<Vec<_>>(),
                },
            }),
        )?,
    ));
    Ok(out)
}

fn gauge_entries(system: &System, cat: &ContextCategory, tol: &Tolerances) -> Result<Vec<(String, Entry)>> {
    let mut out = Vec::new();
    let pair = match pair_operators(system) {
        Some(pair) => Some(pair),
        None if system.operators.len() >= 2 => Some((&system.operators[0], &system.operators[1])),
        None => None,
    };
    match pair {
        Some((a, b)) => {
            let (la, lb) = (a.display_label(), b.display_label());
            let ab = op_mul(a.matrix(), b.matrix())?;
            let ba = op_mul(b.matrix(), a.matrix())?;
            let s1_ab = check_s1(
                &ab,
                &format!("{la}{lb}"),
                cat,
                &S1Candidate::ConditionalExpectation,
                tol,
            )?;
            let s1_ba = check_s1(
                &ba,
                &format!("{lb}{la}"),
                cat,
                &S1Candidate::ConditionalExpectation,
                tol,
            )?;
            let holding: Vec<&str> = s1_ab
                .per_stage
                .iter()
                .filter(|s| s.holds && s1_ba.holds_at(&s.context_id))
                .map(|s| s.context_id.as_str())
                .collect();
            out.push((
                "s1".to_string(),
                entry(
                    "s1",
                    Status::Reported,
                    tol,
                    json!({ "ab": s1_ab.per_stage, "ba": s1_ba.per_stage }),
                    json!({ "stages_where_both_hold": holding }),
                    json!({
                        "candidate": s1_ab.candidate,
                        "products": [s1_ab.operator, s1_ba.operator],
                        "holds_everywhere": s1_ab.holds_everywhere && s1_ba.holds_everywhere,
                    }),
                )?,
            ));

            let f1 = s1_family(&ab, cat, tol)?;
            let f2 = s1_family(&ba, cat, tol)?;
            let s2 = find_s2_automorphism(&f1, &f2, cat, tol);
            let replay_ok = s2
                .per_stage
                .iter()
                .all(|s| s.replay_error.is_none_or(|e| e <= s2.threshold));
            out.push((
                "s2".to_string(),
                entry(
                    "s2",
                    Status::from_bool(replay_ok && s2.realizable),
                    tol,
                    &s2.per_stage,
                    s2.automorphisms().into_values().collect::<Vec<_>>(),
                    json!({
                        "stages": s2.per_stage.len(),
                        "realizable": s2.realizable,
                        "replay_threshold": s2.threshold,
                    }),
                )?,
            ));
        }
        None => {
            let reason = "needs two operators";
            out.push(("s1".to_string(), skipped("s1", tol, reason)?));
            out.push(("s2".to_string(), skipped("s2", tol, reason)?));
        }
    }

    let target = pair_operators(system).map(|(_, x)| x).unwrap_or(&system.operators[0]);
    let takeuti = takeuti_gauge(target, cat, tol)?;
    let maps: BTreeMap<String, StageMap> = takeuti
        .maps
        .iter()
        .map(|(id, g)| (id.clone(), StageMap::Gauge(g.clone())))
        .collect();
    let assembled = assemble_category_automorphism(&maps, cat)?;
    let assembled_ok = assembled.stages.iter().all(|s| s.involutive);
    let relation_failures: Vec<&str> = takeuti
        .per_stage
        .iter()
        .filter(|s| !s.relation_holds)
        .map(|s| s.context_id.as_str())
        .collect();
    out.push((
        "takeuti".to_string(),
        entry(
            "takeuti",
            Status::from_bool(takeuti.status.is_pass() && assembled_ok),
            tol,
            &takeuti.per_stage,
            json!({ "relation_fails_at": relation_failures }),
            json!({
                "operator": takeuti.operator,
                "stages": takeuti.stages,
                "relation_stages": takeuti.relation_stages,
                "swap_where_relation_holds": takeuti.swap_where_relation_holds,
                "involutive": takeuti.involutive,
                "literal_composite_mismatches": takeuti.literal_mismatches,
                "literal_composite_note": "negation after translation by d sends l1 to (l2 - l1)/2, not l2; the reflection x -> 2d - x is used",
                "category_automorphism_stages": assembled.stages.len(),
            }),
        )?,
    ));
    Ok(out)
}

fn twogroup_entry(config: &RunConfig, cat: &ContextCategory, tol: &Tolerances) -> Result<Entry> {
    let mut categories: Vec<(String, Result<FiniteCategory>)> = vec![
        ("context_poset".to_string(), FiniteCategory::from_context_category(cat)),
        (
            "group_Z3".to_string(),
            FiniteCategory::from_group(&FiniteGroup::cyclic(3)?),
        ),
        (
            "group_S3".to_string(),
            FiniteCategory::from_group(&FiniteGroup::symmetric(3)?),
        ),
    ];
    for (name, spec) in &config.twogroup.categories {
        categories.push((format!("user_{name}"), FiniteCategory::from_spec(spec)));
    }
    let mut rows = Vec::new();
    let mut ok = true;
    for (name, c) in categories {
        match interchange_suite(&c?, DEFAULT_OBJECT_LIMIT) {
            Ok(r) => {
                ok &= r.status.is_pass();
                rows.push(json!({ "category": name, "report": r }));
            }
            Err(Error::SizeLimitExceeded { what, limit }) => {
                rows.push(json!({ "category": name, "report": { "status": Status::Skipped, "reason": format!("{what} exceed {limit}") } }));
            }
            Err(e) => return Err(e),
        }
    }
    let groups = group_suite()?;
    ok &= groups.status.is_pass();
    let s3 = eckmann_hilton_check(&FiniteGroup::symmetric(3)?);
    entry(
        "twogroup",
        Status::from_bool(ok),
        tol,
        rows,
        json!({ "S3": s3.witness }),
        json!({ "groups": groups.groups, "mismatches": groups.mismatches }),
    )
}
