//! Stage membership of products, stage automorphisms and the reflection gauge.

use std::collections::BTreeMap;

use daseinkit::contexts::{build_category, CategoryOptions};
use daseinkit::gauge::{check_s1, find_s2_automorphism, takeuti_gauge, S1Candidate};
use daseinkit::interp::StageFamily;
use daseinkit::linalg::{make_oscillator, op_mul, pauli, Tolerances};

fn main() -> daseinkit::Result<()> {
    let tol = Tolerances::default();
    let cat = build_category(&[pauli::z(), pauli::x()], &CategoryOptions::default(), &tol, 0)?;

    let zx = op_mul(pauli::z().matrix(), pauli::x().matrix())?;
    let s1 = check_s1(&zx, "ZX", &cat, &S1Candidate::ConditionalExpectation, &tol)?;
    for s in &s1.per_stage {
        println!(
            "ZX at {}: coefficients {:?}, in stage {}",
            s.context_id, s.coefficients, s.holds
        );
    }

    let mut f1 = BTreeMap::new();
    let mut f2 = BTreeMap::new();
    for v in cat.contexts() {
        let values: Vec<f64> = (0..v.len()).map(|i| i as f64).collect();
        f2.insert(v.id().to_string(), values.iter().rev().copied().collect());
        f1.insert(v.id().to_string(), values);
    }
    let f1 = StageFamily::from_values(f1, &cat, &tol)?;
    let f2 = StageFamily::from_values(f2, &cat, &tol)?;
    let s2 = find_s2_automorphism(&f1, &f2, &cat, &tol);
    for (id, g) in s2.automorphisms() {
        println!("stage automorphism at {id}: {:?}", g.permutation);
    }

    let osc = make_oscillator(5, 1.0, 1.0, 1.0)?;
    let cat = build_category(
        &osc.operators().map(|a| a.clone()),
        &CategoryOptions::default(),
        &tol,
        0,
    )?;
    let t = takeuti_gauge(&osc.x, &cat, &tol)?;
    println!(
        "reflection for X: relation on {}/{} stages, swaps {}, involutive {}",
        t.relation_stages, t.stages, t.swap_where_relation_holds, t.involutive
    );
    Ok(())
}
