//! Dense complex linear algebra over small bipartite Hilbert spaces.
//!
//! The joint basis is ordered C-major: `|i_C i_H>` sits at index
//! `i_C * d_H + i_H`. Every routine in the crate relies on this layout.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

/// Absolute tolerance on `max |M - M^dag|` for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues at or above `-PSD_TOL` count as nonnegative.
pub const PSD_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DimPair {
    pub d_c: usize,
    pub d_h: usize,
}

impl DimPair {
    pub fn new(d_c: usize, d_h: usize) -> Result<Self> {
        if d_c < 2 || d_h < 2 {
            return Err(Error::InvalidDims { d_c, d_h });
        }
        Ok(DimPair { d_c, d_h })
    }

    pub fn joint(&self) -> usize {
        self.d_c * self.d_h
    }

    #[inline]
    pub fn index(&self, i_c: usize, i_h: usize) -> usize {
        i_c * self.d_h + i_h
    }

    #[inline]
    pub fn split(&self, k: usize) -> (usize, usize) {
        (k / self.d_h, k % self.d_h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Cold,
    Hot,
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
}

pub fn from_rows(rows: &[&[C64]]) -> ComplexMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    ComplexMatrix::from_fn(n, m, |i, j| rows[i][j])
}

pub fn pauli_x() -> ComplexMatrix {
    from_rows(&[&[ZERO, ONE], &[ONE, ZERO]])
}

pub fn pauli_y() -> ComplexMatrix {
    from_rows(&[&[ZERO, -I], &[I, ZERO]])
}

pub fn pauli_z() -> ComplexMatrix {
    from_rows(&[&[ONE, ZERO], &[ZERO, -ONE]])
}

pub fn all_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff on mismatched shapes");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Kronecker product, first factor major: `(A⊗B)[i*m + k, j*n + l] = A[i,j] B[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

fn require_joint_square(m: &ComplexMatrix, dims: DimPair) -> Result<()> {
    let n = dims.joint();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n}"),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

/// Traces out `over`, returning the reduced operator on the other factor.
pub fn partial_trace(m: &ComplexMatrix, dims: DimPair, over: Subsystem) -> Result<ComplexMatrix> {
    require_joint_square(m, dims)?;
    let DimPair { d_c, d_h } = dims;
    let out = match over {
        Subsystem::Hot => ComplexMatrix::from_fn(d_c, d_c, |a, b| {
            (0..d_h).map(|k| m[(dims.index(a, k), dims.index(b, k))]).sum()
        }),
        Subsystem::Cold => ComplexMatrix::from_fn(d_h, d_h, |a, b| {
            (0..d_c).map(|k| m[(dims.index(k, a), dims.index(k, b))]).sum()
        }),
    };
    Ok(out)
}

/// Transposes the indices of subsystem `which` only.
pub fn partial_transpose(
    m: &ComplexMatrix,
    dims: DimPair,
    which: Subsystem,
) -> Result<ComplexMatrix> {
    require_joint_square(m, dims)?;
    let n = dims.joint();
    Ok(ComplexMatrix::from_fn(n, n, |r, s| {
        let (rc, rh) = dims.split(r);
        let (sc, sh) = dims.split(s);
        match which {
            Subsystem::Hot => m[(dims.index(rc, sh), dims.index(sc, rh))],
            Subsystem::Cold => m[(dims.index(sc, rh), dims.index(rc, sh))],
        }
    }))
}

pub fn hermiticity_deviation(m: &ComplexMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn require_hermitian(m: &ComplexMatrix) -> Result<()> {
    let deviation = hermiticity_deviation(m);
    if !(deviation <= HERMITIAN_TOL) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Symmetrised copy `(M + M^dag)/2`, so the eigensolver sees an exactly Hermitian input.
fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    require_hermitian(m)?;
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Eigenvalues and eigenvectors (columns) of a Hermitian matrix, unsorted.
pub fn hermitian_eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    require_hermitian(m)?;
    let eig = SymmetricEigen::new(hermitian_part(m));
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?[0])
}

/// Largest singular value.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|x| x.abs()).sum())
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `exp(-i t H)` for Hermitian `H`, via the spectral decomposition.
pub fn expm_hermitian_generator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let (vals, vecs) = hermitian_eigh(h)?;
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        let phase = C64::from_polar(1.0, -l * t);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    Ok(scaled * vecs.adjoint())
}

/// Matrix exponential. Hermitian and anti-Hermitian inputs go through the
/// eigendecomposition; anything else falls back to Padé scaling-and-squaring.
pub fn matrix_exp(m: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(m.nrows(), m.ncols(), "matrix_exp needs a square matrix");
    // anti-Hermitian: M = -i K with K = i M Hermitian, exp(M) = exp(-i K)
    let k = m * I;
    if hermiticity_deviation(&k) <= HERMITIAN_TOL * (1.0 + spectral_norm(m)) {
        if let Ok(u) = expm_hermitian_generator(&hermitian_part(&k), 1.0) {
            return u;
        }
    }
    if hermiticity_deviation(m) <= HERMITIAN_TOL * (1.0 + spectral_norm(m)) {
        let h = hermitian_part(m);
        if let Ok((vals, vecs)) = hermitian_eigh(&h) {
            let mut scaled = vecs.clone();
            for (j, &l) in vals.iter().enumerate() {
                let e = l.exp();
                scaled.column_mut(j).iter_mut().for_each(|z| *z *= e);
            }
            return scaled * vecs.adjoint();
        }
    }
    m.clone().exp()
}

/// `max |U^dag U - I|`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &identity(n))
}

/// Projector `|k><k|` in dimension `n`.
pub fn basis_projector(n: usize, k: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| if i == k && j == k { ONE } else { ZERO })
}
