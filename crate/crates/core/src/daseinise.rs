//! Outer and inner daseinisation at a single stage.
//!
//! On projections the outer daseinisation is the smallest projection of the
//! context dominating `P`, the inner one the largest projection below `P`.
//! Self-adjoint operators are daseinised through their spectral families:
//! each atom takes the smallest eigenvalue whose inner-daseinised spectral
//! projection already contains it.

use serde::Serialize;

use crate::contexts::Context;
use crate::error::{Error, Result};
use crate::linalg::{eigendecompose, op_mul, ComplexMatrix, HermitianOperator, SpectralDecomposition, Tolerances};

/// `δ_V(A)` together with its value on every atom of `V`.
#[derive(Clone, Debug)]
pub struct DaseinResult {
    pub context_id: String,
    pub operator: HermitianOperator,
    pub atom_values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DaseinRow {
    pub context_id: String,
    pub operator_label: String,
    pub atom_index: usize,
    pub atom_value: f64,
}

impl DaseinResult {
    pub fn rows(&self, label: &str) -> Vec<DaseinRow> {
        self.atom_values
            .iter()
            .enumerate()
            .map(|(i, &v)| DaseinRow {
                context_id: self.context_id.clone(),
                operator_label: label.to_string(),
                atom_index: i,
                atom_value: v,
            })
            .collect()
    }
}

pub(crate) fn check_projection(p: &HermitianOperator, tol: &Tolerances) -> Result<()> {
    let defect = p.idempotency_defect();
    if !(defect <= tol.num) || p.matrix().hermiticity_defect() > tol.herm {
        return Err(Error::NotProjection {
            label: p.display_label().to_string(),
            defect,
        });
    }
    Ok(())
}

fn sum_atoms(v: &Context, keep: impl Fn(&ComplexMatrix) -> bool) -> HermitianOperator {
    let values: Vec<f64> = v
        .atoms()
        .iter()
        .map(|q| if keep(q.matrix()) { 1.0 } else { 0.0 })
        .collect();
    v.synthesize(&values)
}

/// Smallest projection of `V` dominating `P`.
pub fn outer_projection(p: &HermitianOperator, v: &Context, tol: &Tolerances) -> Result<HermitianOperator> {
    check_projection(p, tol)?;
    Ok(sum_atoms(v, |q| {
        op_mul(q, p.matrix()).map(|m| m.max_abs() > tol.num).unwrap_or(false)
    }))
}

/// Largest projection of `V` below `P`.
pub fn inner_projection(p: &HermitianOperator, v: &Context, tol: &Tolerances) -> Result<HermitianOperator> {
    check_projection(p, tol)?;
    Ok(sum_atoms(v, |q| {
        op_mul(p.matrix(), q).map(|m| m.dist(q) <= tol.num).unwrap_or(false)
    }))
}

/// Outer daseinisation from a precomputed spectral decomposition.
pub fn outer_from_decomposition(decomposition: &SpectralDecomposition, v: &Context, tol: &Tolerances) -> DaseinResult {
    let families = decomposition.cumulative_families();
    let eigenvalues = decomposition.eigenvalues();
    let atom_values: Vec<f64> = v
        .atoms()
        .iter()
        .map(|q| {
            families
                .iter()
                .zip(eigenvalues)
                .find(|(e, _)| {
                    op_mul(e, q.matrix())
                        .map(|m| m.dist(q.matrix()) <= tol.num)
                        .unwrap_or(false)
                })
                .map(|(_, &l)| l)
                // E(λ_max) = I contains every atom
                .unwrap_or_else(|| decomposition.max())
        })
        .collect();
    DaseinResult {
        context_id: v.id().to_string(),
        operator: v.synthesize(&atom_values),
        atom_values,
    }
}

/// `δ^out_V(A)`.
pub fn outer_selfadjoint(a: &HermitianOperator, v: &Context, tol: &Tolerances) -> Result<DaseinResult> {
    if a.dim() != v.dim() {
        return Err(Error::DimMismatch {
            left: a.dim(),
            right: v.dim(),
        });
    }
    let decomposition = eigendecompose(a, tol)?;
    Ok(outer_from_decomposition(&decomposition, v, tol))
}

/// `δ^inn_V(A) = −δ^out_V(−A)`.
pub fn inner_selfadjoint(a: &HermitianOperator, v: &Context, tol: &Tolerances) -> Result<DaseinResult> {
    let outer = outer_selfadjoint(&a.negated(), v, tol)?;
    let atom_values: Vec<f64> = outer.atom_values.iter().map(|x| -x).collect();
    Ok(DaseinResult {
        context_id: outer.context_id,
        operator: v.synthesize(&atom_values),
        atom_values,
    })
}

/// Brute-force smallest dominating projection: enumerate every atom subset
/// of `V` and keep the minimal one dominating `P`. Exponential; for oracles.
pub fn outer_projection_brute_force(p: &HermitianOperator, v: &Context, tol: &Tolerances) -> Result<HermitianOperator> {
    check_projection(p, tol)?;
    let mut best: Option<(u32, HermitianOperator)> = None;
    for (mask, candidate) in v.all_projections()?.into_iter().enumerate() {
        let dominates = op_mul(candidate.matrix(), p.matrix())?.dist(p.matrix()) <= tol.num;
        if !dominates {
            continue;
        }
        let rank: usize = (0..v.len()).filter(|i| mask >> i & 1 == 1).map(|i| v.ranks()[i]).sum();
        if best.as_ref().map_or(true, |(r, _)| (rank as u32) < *r) {
            best = Some((rank as u32, candidate));
        }
    }
    Ok(best.expect("the identity always dominates").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contexts::context_from_operator;
    use crate::linalg::pauli;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn proj(v: &[crate::linalg::C64]) -> HermitianOperator {
        HermitianOperator::projector(&[v.to_vec()], v.len())
    }

    #[test]
    fn projection_examples() {
        let vz = context_from_operator(&pauli::z(), &tol()).unwrap();
        let p0 = proj(&pauli::ket0());
        let plus = proj(&pauli::ket_plus());
        let zero = HermitianOperator::zeros(2);
        let id = HermitianOperator::identity(2);

        assert!(outer_projection(&p0, &vz, &tol()).unwrap().matrix().dist(p0.matrix()) < 1e-14);
        assert!(outer_projection(&zero, &vz, &tol()).unwrap().matrix().max_abs() < 1e-14);
        assert!(outer_projection(&plus, &vz, &tol()).unwrap().matrix().dist(id.matrix()) < 1e-14);

        assert!(inner_projection(&id, &vz, &tol()).unwrap().matrix().dist(id.matrix()) < 1e-14);
        assert!(inner_projection(&p0, &vz, &tol()).unwrap().matrix().dist(p0.matrix()) < 1e-14);
        assert!(inner_projection(&plus, &vz, &tol()).unwrap().matrix().max_abs() < 1e-14);
    }

    #[test]
    fn not_a_projection() {
        let vz = context_from_operator(&pauli::z(), &tol()).unwrap();
        assert!(matches!(
            outer_projection(&pauli::x(), &vz, &tol()),
            Err(Error::NotProjection { .. })
        ));
        assert!(matches!(
            inner_projection(&HermitianOperator::diagonal(&[0.5, 0.0]), &vz, &tol()),
            Err(Error::NotProjection { .. })
        ));
    }

    #[test]
    fn sigma_x_on_sigma_z_stage() {
        let vz = context_from_operator(&pauli::z(), &tol()).unwrap();
        let outer = outer_selfadjoint(&pauli::x(), &vz, &tol()).unwrap();
        assert_eq!(outer.atom_values, vec![1.0, 1.0]);
        assert!(outer.operator.matrix().dist(&ComplexMatrix::identity(2)) < 1e-14);
        let inner = inner_selfadjoint(&pauli::x(), &vz, &tol()).unwrap();
        assert_eq!(inner.atom_values, vec![-1.0, -1.0]);
    }

    #[test]
    fn member_is_fixed() {
        let vz = context_from_operator(&pauli::z(), &tol()).unwrap();
        let outer = outer_selfadjoint(&pauli::z(), &vz, &tol()).unwrap();
        assert!(outer.operator.matrix().dist(pauli::z().matrix()) < 1e-14);
        let inner = inner_selfadjoint(&pauli::z(), &vz, &tol()).unwrap();
        assert!(inner.operator.matrix().dist(pauli::z().matrix()) < 1e-14);
    }

    #[test]
    fn trivial_stage_gives_extremes() {
        let t = Context::trivial(2, &tol());
        let a = HermitianOperator::diagonal(&[-3.0, 2.0]);
        assert_eq!(outer_selfadjoint(&a, &t, &tol()).unwrap().atom_values, vec![2.0]);
        assert_eq!(inner_selfadjoint(&a, &t, &tol()).unwrap().atom_values, vec![-3.0]);
    }
}
