//! Stage-wise commutators, the zero-energy interpretation and squares.

use daseinkit::contexts::{build_category, CategoryOptions};
use daseinkit::interp::{
    delta_interpret, find_non_multiplicativity, internal_spectrum, verify_lemma2, verify_lemma3, Delta0Rule,
    OscillatorSystem,
};
use daseinkit::linalg::{make_oscillator, Tolerances};

fn main() -> daseinkit::Result<()> {
    let tol = Tolerances::default();
    let osc = make_oscillator(5, 1.0, 1.0, 1.0)?;
    let ops = [osc.x.clone(), osc.p.clone(), osc.h.clone()];
    let cat = build_category(&ops, &CategoryOptions::default(), &tol, 0)?;

    let c = verify_lemma2(&osc.x, &osc.p, &cat, &tol)?;
    println!(
        "[X, P]: external {:.3}, largest stage-wise {:.1e}",
        c.external_commutator, c.max_stage_commutator
    );

    let sys = OscillatorSystem::from_oscillator(&osc);
    let h = delta_interpret(&sys.hamiltonian(), &sys.environment(), &cat, &tol)?;
    let spectrum = internal_spectrum(&h, &tol);
    for (id, values) in &spectrum.per_stage {
        println!("spec H at {id}: {values:?}");
    }

    for rule in [Delta0Rule::JointAtom, Delta0Rule::SpectraOnly] {
        let r = verify_lemma3(&cat, &sys, rule, &tol)?;
        println!("{}: {:?}, violations {:?}", rule.as_str(), r.status, r.violations);
    }

    let nm = find_non_multiplicativity(&ops, &cat, &tol)?;
    match nm.witness {
        Some(w) => println!(
            "δ(A²) ≠ δ(A)² for {} at {} (gap {:.3})",
            w.operator, w.context_id, w.gap
        ),
        None => println!("no witness among {} coarsenings", nm.coarsenings_searched),
    }
    Ok(())
}
