//! Outer and inner daseinisation of observables and projections.

use daseinkit::contexts::context_from_operator;
use daseinkit::daseinise::{inner_selfadjoint, outer_projection, outer_selfadjoint};
use daseinkit::linalg::{pauli, HermitianOperator, Tolerances};

fn main() -> daseinkit::Result<()> {
    let tol = Tolerances::default();
    let vz = context_from_operator(&pauli::z(), &tol)?;
    for a in [pauli::x(), pauli::z()] {
        let outer = outer_selfadjoint(&a, &vz, &tol)?;
        let inner = inner_selfadjoint(&a, &vz, &tol)?;
        println!(
            "{} on {}: outer {:?}, inner {:?}",
            a.display_label(),
            vz.id(),
            outer.atom_values,
            inner.atom_values
        );
    }

    // |+⟩⟨+| is dominated only by the identity within V_z
    let plus = HermitianOperator::projector(&[pauli::ket_plus()], 2);
    let p = outer_projection(&plus, &vz, &tol)?;
    println!(
        "outer(|+⟩⟨+|) = identity: {}",
        p.matrix().dist(HermitianOperator::identity(2).matrix()) < 1e-12
    );
    Ok(())
}
