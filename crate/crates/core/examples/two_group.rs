//! Automorphism 2-groups of small categories and the Eckmann-Hilton check.

use daseinkit::twogroup::{
    eckmann_hilton_check, interchange_suite, FiniteCategory, FiniteGroup, Verdict, DEFAULT_OBJECT_LIMIT,
};

fn main() -> daseinkit::Result<()> {
    for (name, c) in [
        ("chain of 3", FiniteCategory::chain(3)?),
        ("discrete on 3", FiniteCategory::discrete(3)?),
        (
            "S3 as one object",
            FiniteCategory::from_group(&FiniteGroup::symmetric(3)?)?,
        ),
    ] {
        let r = interchange_suite(&c, DEFAULT_OBJECT_LIMIT)?;
        println!(
            "{name}: {} automorphisms, {} 2-cells, {} quadruples, {} failures",
            r.autoequivalences, r.two_cells, r.quadruples, r.failures
        );
    }
    for g in [
        FiniteGroup::cyclic(6)?,
        FiniteGroup::symmetric(3)?,
        FiniteGroup::dicyclic(2)?,
    ] {
        let r = eckmann_hilton_check(&g);
        match (&r.verdict, &r.witness) {
            (Verdict::Inconsistent, Some(w)) => println!(
                "{}: decoration {:?} gives {} one way and {} the other",
                r.group, w.decoration, w.rows_first, w.columns_first
            ),
            _ => println!("{}: both evaluation orders agree", r.group),
        }
    }
    Ok(())
}
