//! Propositions as clopen subobjects, sieve-valued truth and excluded middle.

use daseinkit::contexts::{build_category, CategoryOptions};
use daseinkit::linalg::{pauli, HermitianOperator, Tolerances};
use daseinkit::sheaf::build_spectral_presheaf;

fn main() -> daseinkit::Result<()> {
    let tol = Tolerances::default();
    let cat = build_category(&[pauli::z(), pauli::x()], &CategoryOptions::default(), &tol, 0)?;
    let sigma = build_spectral_presheaf(&cat, &tol)?;

    let up = HermitianOperator::projector(&[pauli::ket0()], 2);
    let s = sigma.proposition(&up, &tol)?;
    for e in s.to_entries(&cat) {
        println!("[σ_z = +1] at {}: atoms {:?}", e.context_id, e.atom_indices);
    }
    for (name, psi) in [("|0⟩", pauli::ket0()), ("|+⟩", pauli::ket_plus())] {
        for (root, sieve) in sigma.truth_value(&up, &psi, &tol)? {
            println!("state {name}: at {root} true on {:?}", sieve.members);
        }
    }
    if let Some(w) = sigma.excluded_middle_witness()? {
        println!("S ∨ ¬S fails at {:?}", w.failing_contexts);
    }
    Ok(())
}
