//! Dense Hermitian operator algebra on small Hilbert spaces.
//!
//! Every tolerance check in the crate goes through [`ComplexMatrix::max_abs`],
//! the largest absolute entry, so thresholds do not scale with dimension.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Numerical thresholds shared by every module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Hermiticity: `‖M − M†‖_max`.
    pub herm: f64,
    /// Generic numerical equality.
    pub num: f64,
    /// Relative gap below which eigenvalues are merged into one cluster.
    pub group: f64,
    /// Zero-in-spectrum test.
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            num: 1e-10,
            group: 1e-8,
            zero: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("herm", self.herm),
            ("num", self.num),
            ("group", self.group),
            ("zero", self.zero),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "tolerance {name} must be a nonnegative number, got {v}"
                )));
            }
        }
        if self.group < self.num {
            return Err(Error::InvalidParameter(format!(
                "tolerance group ({}) must be at least num ({})",
                self.group, self.num
            )));
        }
        Ok(())
    }
}

/// Dense square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::from_element(dim, dim, ZERO))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, |i, j| f(i, j)))
    }

    /// Builds a matrix from row-major real and imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: Option<&[Vec<f64>]>) -> Result<Self> {
        let dim = re.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        for row in re {
            if row.len() != dim {
                return Err(Error::DimMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
        }
        if let Some(im) = im {
            if im.len() != dim {
                return Err(Error::DimMismatch {
                    left: dim,
                    right: im.len(),
                });
            }
            for row in im {
                if row.len() != dim {
                    return Err(Error::DimMismatch {
                        left: dim,
                        right: row.len(),
                    });
                }
            }
        }
        let m = Self::from_fn(dim, |i, j| C64::new(re[i][j], im.map(|im| im[i][j]).unwrap_or(0.0)));
        if m.0.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(m)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_fn(
            values.len(),
            |i, j| {
                if i == j {
                    C64::new(values[i], 0.0)
                } else {
                    ZERO
                }
            },
        )
    }

    /// `|v⟩⟨v|` for a (not necessarily normalised) vector.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn from_inner(m: DMatrix<C64>) -> Self {
        assert!(m.is_square(), "ComplexMatrix must be square");
        Self(m)
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `‖M‖_max`, the largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn dist(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.dist(&self.adjoint())
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Hilbert-Schmidt inner product `tr(A† B)`.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `⟨ψ|M|ψ⟩`.
    pub fn expectation(&self, psi: &[C64]) -> C64 {
        let m_psi = self.mul_vec(psi);
        psi.iter().zip(&m_psi).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let ab = op_mul(self, other)?;
        let ba = op_mul(other, self)?;
        op_add(&ab, &op_scale(C64::new(-1.0, 0.0), &ba))
    }

    /// Row-major `(re, im)` parts.
    pub fn to_parts(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let n = self.dim();
        let re = (0..n).map(|i| (0..n).map(|j| self.0[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| self.0[(i, j)].im).collect()).collect();
        (re, im)
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn check_dims(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

pub fn op_add(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(a, b)?;
    Ok(ComplexMatrix(&a.0 + &b.0))
}

/// Matrix product. The product of two non-commuting Hermitian matrices is
/// not Hermitian; callers decide whether to wrap the result.
pub fn op_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(a, b)?;
    Ok(ComplexMatrix(&a.0 * &b.0))
}

pub fn op_scale(c: C64, a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(&a.0 * c)
}

/// A matrix known to be self-adjoint within `τ_herm`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    label: Option<String>,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let deviation = matrix.hermiticity_defect();
        if !(deviation <= tol.herm) {
            return Err(Error::NotHermitian {
                label: "<unlabelled>".into(),
                deviation,
            });
        }
        Ok(Self { matrix, label: None })
    }

    pub fn labelled(matrix: ComplexMatrix, label: impl Into<String>, tol: &Tolerances) -> Result<Self> {
        let label = label.into();
        let deviation = matrix.hermiticity_defect();
        if !(deviation <= tol.herm) {
            return Err(Error::NotHermitian { label, deviation });
        }
        Ok(Self {
            matrix,
            label: Some(label),
        })
    }

    /// Takes the Hermitian part without checking. For results that are
    /// Hermitian by construction (sums of atoms with real weights).
    pub(crate) fn from_hermitian_part(matrix: &ComplexMatrix) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
            label: None,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
            label: None,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim),
            label: None,
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self {
            matrix: ComplexMatrix::diagonal(values),
            label: None,
        }
    }

    /// Orthogonal projection onto the span of an orthonormal family.
    pub fn projector(vectors: &[Vec<C64>], dim: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim);
        for v in vectors {
            m = ComplexMatrix(m.0 + ComplexMatrix::outer(v).0);
        }
        Self::from_hermitian_part(&m)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn display_label(&self) -> &str {
        self.label.as_deref().unwrap_or("<unlabelled>")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn negated(&self) -> Self {
        Self {
            matrix: op_scale(C64::new(-1.0, 0.0), &self.matrix),
            label: self.label.as_ref().map(|l| format!("-{l}")),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            matrix: op_scale(C64::new(c, 0.0), &self.matrix),
            label: None,
        }
    }

    pub fn rank_estimate(&self) -> usize {
        self.matrix.trace().re.round().max(0.0) as usize
    }

    /// Idempotency defect `‖P² − P‖_max`.
    pub fn idempotency_defect(&self) -> f64 {
        ComplexMatrix(&self.matrix.0 * &self.matrix.0).dist(&self.matrix)
    }

    pub fn eigendecompose(&self, tol: &Tolerances) -> Result<SpectralDecomposition> {
        eigendecompose(self, tol)
    }
}

/// Raw eigenpairs, ascending, without clustering.
pub fn eigenpairs(m: &ComplexMatrix) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    let n = m.dim();
    let herm = m.hermitian_part();
    let eig = herm
        .0
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or(Error::NumericalFailure { dim: n })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();
    Ok((values, vectors))
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    let (values, _) = eigenpairs(m)?;
    Ok(values.first().copied().unwrap_or(0.0))
}

/// PSD within `tol`: minimum eigenvalue of the Hermitian part ≥ −tol.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue(m)? >= -tol)
}

/// Spectral resolution with eigenvalues clustered into distinct values.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projections: Vec<HermitianOperator>,
    eigenvectors: Vec<Vec<Vec<C64>>>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projections(&self) -> &[HermitianOperator] {
        &self.projections
    }

    /// Orthonormal eigenvectors belonging to each cluster.
    pub fn eigenvectors(&self) -> &[Vec<Vec<C64>>] {
        &self.eigenvectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projections.first().map(|p| p.dim()).unwrap_or(0)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `Σ λ_i P_i`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim());
        for (l, p) in self.eigenvalues.iter().zip(&self.projections) {
            m = ComplexMatrix(m.0 + &p.matrix.0 * C64::new(*l, 0.0));
        }
        m
    }

    /// `E(λ) = Σ{P_i : λ_i ≤ λ + τ_zero}`.
    pub fn family_at(&self, lambda: f64, tol: &Tolerances) -> HermitianOperator {
        let mut m = ComplexMatrix::zeros(self.dim());
        for (l, p) in self.eigenvalues.iter().zip(&self.projections) {
            if *l <= lambda + tol.zero {
                m = ComplexMatrix(m.0 + &p.matrix.0);
            }
        }
        HermitianOperator::from_hermitian_part(&m)
    }

    /// Cumulative spectral family at each eigenvalue, ascending.
    pub fn cumulative_families(&self) -> Vec<ComplexMatrix> {
        let mut acc = ComplexMatrix::zeros(self.dim());
        self.projections
            .iter()
            .map(|p| {
                acc = ComplexMatrix(&acc.0 + &p.matrix.0);
                acc.clone()
            })
            .collect()
    }

    /// Whether some eigenvalue lies within `τ_zero` of zero.
    pub fn has_zero(&self, tol: &Tolerances) -> bool {
        self.eigenvalues.iter().any(|l| l.abs() <= tol.zero)
    }
}

pub fn eigendecompose(a: &HermitianOperator, tol: &Tolerances) -> Result<SpectralDecomposition> {
    let deviation = a.matrix.hermiticity_defect();
    if !(deviation <= tol.herm) {
        return Err(Error::NotHermitian {
            label: a.display_label().to_string(),
            deviation,
        });
    }
    let (values, vectors) = eigenpairs(&a.matrix)?;
    let n = values.len();
    let range = values[n - 1] - values[0];
    let gap = tol.group * (range + 1.0);

    let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..n {
        if values[k] - values[k - 1] > gap {
            clusters.push(vec![k]);
        } else {
            clusters.last_mut().unwrap().push(k);
        }
    }

    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut projections = Vec::with_capacity(clusters.len());
    let mut eigenvectors = Vec::with_capacity(clusters.len());
    for cluster in clusters {
        let mean = cluster.iter().map(|&k| values[k]).sum::<f64>() / cluster.len() as f64;
        let vecs: Vec<Vec<C64>> = cluster.iter().map(|&k| vectors[k].clone()).collect();
        eigenvalues.push(mean);
        projections.push(HermitianOperator::projector(&vecs, n));
        eigenvectors.push(vecs);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        projections,
        eigenvectors,
    })
}

/// Spectral family `E_A(λ)`.
pub fn spectral_family(a: &HermitianOperator, lambda: f64, tol: &Tolerances) -> Result<HermitianOperator> {
    Ok(eigendecompose(a, tol)?.family_at(lambda, tol))
}

/// Truncated harmonic oscillator on `levels` number states.
#[derive(Clone, Debug)]
pub struct Oscillator {
    pub levels: usize,
    pub mass: f64,
    pub omega: f64,
    pub hbar: f64,
    pub x: HermitianOperator,
    pub p: HermitianOperator,
    pub h: HermitianOperator,
}

impl Oscillator {
    pub fn operators(&self) -> [&HermitianOperator; 3] {
        [&self.x, &self.p, &self.h]
    }
}

/// Lowering operator `a|n⟩ = √n |n−1⟩` truncated to `levels` states.
pub fn lowering(levels: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(levels, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    })
}

/// Builds truncated `X`, `P` and `H = P²/2m + mω²X²/2` assembled from them.
pub fn make_oscillator(levels: usize, mass: f64, omega: f64, hbar: f64) -> Result<Oscillator> {
    if levels < 2 {
        return Err(Error::InvalidParameter(format!(
            "oscillator needs at least 2 levels, got {levels}"
        )));
    }
    for (name, v) in [("m", mass), ("omega", omega), ("hbar", hbar)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    let a = lowering(levels);
    let a_dag = a.adjoint();
    let x_scale = (hbar / (2.0 * mass * omega)).sqrt();
    let p_scale = (hbar * mass * omega / 2.0).sqrt();

    let x = op_scale(C64::new(x_scale, 0.0), &op_add(&a, &a_dag)?);
    let p = op_scale(
        C64::new(0.0, p_scale),
        &op_add(&a_dag, &op_scale(C64::new(-1.0, 0.0), &a))?,
    );
    let p2 = op_mul(&p, &p)?;
    let x2 = op_mul(&x, &x)?;
    let h = op_add(
        &op_scale(C64::new(1.0 / (2.0 * mass), 0.0), &p2),
        &op_scale(C64::new(0.5 * mass * omega * omega, 0.0), &x2),
    )?;

    Ok(Oscillator {
        levels,
        mass,
        omega,
        hbar,
        x: HermitianOperator {
            matrix: x,
            label: Some("X".into()),
        },
        p: HermitianOperator {
            matrix: p,
            label: Some("P".into()),
        },
        h: HermitianOperator {
            matrix: h.hermitian_part(),
            label: Some("H".into()),
        },
    })
}

/// Pauli matrices, used throughout tests and examples.
pub mod pauli {
    use super::*;

    pub fn x() -> HermitianOperator {
        HermitianOperator::from_hermitian_part(&ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]))
            .with_label("sigma_x")
    }

    pub fn y() -> HermitianOperator {
        HermitianOperator::from_hermitian_part(&ComplexMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => C64::new(0.0, -1.0),
            (1, 0) => C64::new(0.0, 1.0),
            _ => ZERO,
        }))
        .with_label("sigma_y")
    }

    pub fn z() -> HermitianOperator {
        HermitianOperator::diagonal(&[1.0, -1.0]).with_label("sigma_z")
    }

    pub fn ket0() -> Vec<C64> {
        vec![ONE, ZERO]
    }

    pub fn ket1() -> Vec<C64> {
        vec![ZERO, ONE]
    }

    pub fn ket_plus() -> Vec<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![C64::new(s, 0.0), C64::new(s, 0.0)]
    }

    pub fn ket_minus() -> Vec<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![C64::new(s, 0.0), C64::new(-s, 0.0)]
    }
}

/// Hermitian matrix with entries uniform in the unit square.
pub fn random_hermitian<R: rand::Rng>(rng: &mut R, dim: usize) -> HermitianOperator {
    let m = ComplexMatrix::from_fn(dim, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    HermitianOperator::from_hermitian_part(&m)
}

/// Orthonormal basis drawn from the eigenvectors of a random Hermitian matrix.
pub fn random_basis<R: rand::Rng>(rng: &mut R, dim: usize) -> Result<Vec<Vec<C64>>> {
    Ok(eigenpairs(random_hermitian(rng, dim).matrix())?.1)
}

pub fn vector_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn diagonal_decomposition() {
        let a = HermitianOperator::diagonal(&[1.0, -1.0]);
        let d = eigendecompose(&a, &tol()).unwrap();
        assert_eq!(d.eigenvalues(), &[-1.0, 1.0]);
        assert!(d.projections()[0].matrix().dist(&ComplexMatrix::diagonal(&[0.0, 1.0])) < 1e-14);
        assert!(d.projections()[1].matrix().dist(&ComplexMatrix::diagonal(&[1.0, 0.0])) < 1e-14);
    }

    #[test]
    fn identity_has_one_cluster() {
        let d = eigendecompose(&HermitianOperator::identity(3), &tol()).unwrap();
        assert_eq!(d.eigenvalues(), &[1.0]);
        assert!(d.projections()[0].matrix().dist(&ComplexMatrix::identity(3)) < 1e-14);
    }

    #[test]
    fn spectral_family_examples() {
        let a = HermitianOperator::diagonal(&[1.0, -1.0]);
        let e = spectral_family(&a, 0.0, &tol()).unwrap();
        assert!(e.matrix().dist(&ComplexMatrix::diagonal(&[0.0, 1.0])) < 1e-14);
        let e = spectral_family(&a, 1.0, &tol()).unwrap();
        assert!(e.matrix().dist(&ComplexMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(
            HermitianOperator::new(m, &tol()),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn two_level_oscillator() {
        let osc = make_oscillator(2, 1.0, 1.0, 1.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = ComplexMatrix::from_real_rows(&[&[0.0, s], &[s, 0.0]]);
        assert!(osc.x.matrix().dist(&x) < 1e-15);
        let p = ComplexMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => C64::new(0.0, -s),
            (1, 0) => C64::new(0.0, s),
            _ => ZERO,
        });
        assert!(osc.p.matrix().dist(&p) < 1e-15);
        // [X, P] = iħ diag(1, −1) after truncation
        let c = osc.x.matrix().commutator(osc.p.matrix()).unwrap();
        let expected = ComplexMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => C64::new(0.0, 1.0),
            (1, 1) => C64::new(0.0, -1.0),
            _ => ZERO,
        });
        assert!(c.dist(&expected) < 1e-15);
    }

    #[test]
    fn oscillator_rejects_bad_parameters() {
        assert!(make_oscillator(1, 1.0, 1.0, 1.0).is_err());
        assert!(make_oscillator(3, 0.0, 1.0, 1.0).is_err());
        assert!(make_oscillator(3, 1.0, -1.0, 1.0).is_err());
        assert!(make_oscillator(3, 1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn arithmetic() {
        let a = HermitianOperator::diagonal(&[2.0, 3.0]);
        let i = ComplexMatrix::identity(2);
        assert_eq!(op_mul(&i, a.matrix()).unwrap(), *a.matrix());
        let sum = op_add(
            &ComplexMatrix::diagonal(&[1.0, 0.0]),
            &ComplexMatrix::diagonal(&[0.0, 1.0]),
        )
        .unwrap();
        assert_eq!(sum, i);
        // σ_z σ_x = iσ_y
        let zx = op_mul(pauli::z().matrix(), pauli::x().matrix()).unwrap();
        let i_y = op_scale(C64::new(0.0, 1.0), pauli::y().matrix());
        assert!(zx.dist(&i_y) < 1e-15);
        assert!(zx.hermiticity_defect() > 1.0);
        assert!(matches!(
            op_mul(&i, &ComplexMatrix::identity(3)),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn near_degenerate_eigenvalues_merge() {
        let a = HermitianOperator::diagonal(&[1.0, 1.0 + 1e-12, 2.0]);
        let d = eigendecompose(&a, &tol()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.projections()[0].rank_estimate(), 2);
        assert_abs_diff_eq!(d.eigenvalues()[0], 1.0, epsilon = 1e-11);
    }

    #[test]
    fn tolerances_validate() {
        assert!(Tolerances::default().validate().is_ok());
        let bad = Tolerances {
            group: 1e-12,
            ..Tolerances::default()
        };
        assert!(bad.validate().is_err());
        let bad = Tolerances {
            zero: -1.0,
            ..Tolerances::default()
        };
        assert!(bad.validate().is_err());
    }
}
