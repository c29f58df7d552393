//! Contexts generated by a pair of observables and their order.

use daseinkit::contexts::{build_category, CategoryOptions, ContextCategory};
use daseinkit::linalg::{make_oscillator, pauli, Tolerances};

fn show(name: &str, cat: &ContextCategory) {
    println!("{name}: {} contexts", cat.len());
    for v in cat.contexts() {
        println!("  {} ranks {:?}", v.id(), v.ranks());
    }
    for &(lo, up) in cat.covers() {
        println!("  {} < {}", cat.context(lo).id(), cat.context(up).id());
    }
}

fn main() -> daseinkit::Result<()> {
    let tol = Tolerances::default();
    let qubit = build_category(&[pauli::z(), pauli::x()], &CategoryOptions::default(), &tol, 0)?;
    show("qubit", &qubit);

    let osc = make_oscillator(3, 1.0, 1.0, 1.0)?;
    let full = CategoryOptions {
        full_subcontexts: true,
        ..CategoryOptions::default()
    };
    let cat = build_category(&[osc.x.clone()], &full, &tol, 0)?;
    show("coarsenings of the position context, N = 3", &cat);
    Ok(())
}
