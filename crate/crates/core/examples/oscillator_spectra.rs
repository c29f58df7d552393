//! Spectra of the truncated oscillator's position, momentum and energy.

use daseinkit::linalg::{eigendecompose, make_oscillator, Tolerances};

fn main() -> daseinkit::Result<()> {
    let tol = Tolerances::default();
    for levels in [2, 3, 5] {
        let osc = make_oscillator(levels, 1.0, 1.0, 1.0)?;
        println!("N = {levels}");
        for op in osc.operators() {
            let d = eigendecompose(op, &tol)?;
            let values: Vec<String> = d.eigenvalues().iter().map(|e| format!("{e:+.6}")).collect();
            println!("  spec {} = [{}]", op.display_label(), values.join(", "));
        }
    }
    Ok(())
}
