//! Dense complex linear algebra: Hermitian eigensystems, unitary
//! exponentials and the numerical hygiene checks used throughout the crate.
//!
//! Everything is dense. The largest operators in this crate are 256 x 256
//! (eight qubits), which is well within reach of a direct eigensolver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used everywhere.
pub type C64 = Complex64;

/// Dense complex square matrix holding operators and unitaries.
pub type CMatrix = DMatrix<C64>;

/// Tolerance for Hermiticity and unitarity preconditions.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Components below this magnitude never anchor an eigenvector's phase.
const PHASE_ANCHOR_TOL: f64 = 1e-8;

const MAX_EIGEN_SWEEPS: usize = 10_000;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Kronecker product, `a` acting on the more significant factor.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Max entrywise |H - H^dagger|.
pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Max entrywise |U^dagger U - I|; zero for an exact unitary.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let prod = u.adjoint() * u;
    let n = prod.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

/// Checks the `ComplexMatrix` invariants: square, non-empty, finite.
pub fn validate(m: &CMatrix) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows().max(1),
            found: m.ncols(),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// Hermitian operator.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(diag(values)) V^dagger` for a complex function of the spectrum.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let factor = f(lambda);
            scaled.column_mut(j).scale_mut_complex(factor);
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(-i H t)` for the housed operator.
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.apply_fn(|lambda| C64::from_polar(1.0, -lambda * t))
    }

    /// `V diag(values) V^dagger`.
    pub fn reconstruct(&self) -> CMatrix {
        self.apply_fn(|lambda| C64::new(lambda, 0.0))
    }

    /// Index ranges of eigenvalue clusters closer than [`DEGENERACY_TOL`].
    pub fn clusters(&self) -> Vec<std::ops::Range<usize>> {
        cluster_ranges(&self.values, DEGENERACY_TOL)
    }
}

// nalgebra lacks an in-place complex column scale on views; keep the call
// site readable.
trait ScaleComplex {
    fn scale_mut_complex(&mut self, factor: C64);
}

impl<S> ScaleComplex for nalgebra::Matrix<C64, nalgebra::Dyn, nalgebra::U1, S>
where
    S: nalgebra::StorageMut<C64, nalgebra::Dyn, nalgebra::U1>,
{
    fn scale_mut_complex(&mut self, factor: C64) {
        for z in self.iter_mut() {
            *z *= factor;
        }
    }
}

fn cluster_ranges(sorted: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || (sorted[i] - sorted[i - 1]).abs() >= tol {
            out.push(start..i);
            start = i;
        }
    }
    out
}

fn first_significant(col: nalgebra::DVectorView<'_, C64>) -> usize {
    col.iter()
        .position(|z| z.norm() > PHASE_ANCHOR_TOL)
        .unwrap_or(0)
}

/// Hermitian eigendecomposition with a deterministic output convention.
///
/// Eigenvalues ascend. Inside a degenerate cluster the vectors are ordered by
/// the index of their first component with modulus above 1e-8, and every
/// vector is rotated so that this component is real and positive.
pub fn eig_hermitian(h: &CMatrix) -> Result<EigenSystem> {
    validate(h)?;
    let defect = hermiticity_defect(h);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    let n = h.nrows();
    // Symmetrize so the solver sees an exactly Hermitian input.
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = nalgebra::SymmetricEigen::try_new(sym, f64::EPSILON, MAX_EIGEN_SWEEPS)
        .ok_or(Error::ConvergenceFailure)?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::ConvergenceFailure);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();

    let mut columns: Vec<DVector<C64>> = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).into_owned())
        .collect();
    for col in columns.iter_mut() {
        let anchor = first_significant(col.as_view());
        let z = col[anchor];
        if z.norm() > 0.0 {
            let phase = z.conj() / z.norm();
            for entry in col.iter_mut() {
                *entry *= phase;
            }
        }
    }
    for range in cluster_ranges(&values, DEGENERACY_TOL) {
        columns[range].sort_by_key(|c| first_significant(c.as_view()));
    }

    let vectors = CMatrix::from_columns(&columns);
    Ok(EigenSystem { values, vectors })
}

/// `exp(-i H t)` through the eigendecomposition of `H`.
pub fn expm_i(h: &CMatrix, t: f64) -> Result<CMatrix> {
    Ok(eig_hermitian(h)?.propagator(t))
}

/// Global phase `theta` maximizing `Re Tr(e^{-i theta} U G^dagger)`.
pub fn overlap_phase(u: &CMatrix, goal: &CMatrix) -> f64 {
    (u * goal.adjoint()).trace().arg()
}
