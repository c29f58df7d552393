//! Sublattices generated by projections: distributive exactly when commuting.

use daseinkit::interp::lattice::{lemma1_trials, DEFAULT_MAX_LATTICE};
use daseinkit::interp::verify_lemma1;
use daseinkit::linalg::{pauli, HermitianOperator, Tolerances};

fn main() -> daseinkit::Result<()> {
    let tol = Tolerances::default();
    let zero = HermitianOperator::projector(&[pauli::ket0()], 2);
    let plus = HermitianOperator::projector(&[pauli::ket_plus()], 2);
    let one = HermitianOperator::projector(&[pauli::ket1()], 2);
    for (name, gens) in [("|0⟩, |1⟩", vec![zero.clone(), one]), ("|0⟩, |+⟩", vec![zero, plus])] {
        let r = verify_lemma1(&gens, 2, DEFAULT_MAX_LATTICE, &tol)?;
        println!(
            "{name}: {} elements, distributive {}, non-commuting pair {:?}",
            r.lattice_size, r.distributive, r.noncommuting_pair
        );
    }
    let trials = lemma1_trials(100, 0, DEFAULT_MAX_LATTICE, &tol)?;
    println!(
        "{} random trials: {} distributive, {} not, {} counterexamples",
        trials.trials,
        trials.distributive,
        trials.non_distributive,
        trials.failures.len()
    );
    Ok(())
}
