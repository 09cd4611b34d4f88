//! Energy-preserving unitaries and their perturbations.

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, expm_hermitian_generator, identity, kron, pauli_x, pauli_y, spectral_norm,
    ComplexMatrix, C64,
};
use crate::states::{manifold_indices, EnergySpectrum};

/// Tolerance on `||[U, H]||` for a unitary to count as energy preserving.
pub const COMMUTATOR_TOL: f64 = 1e-10;

/// Rotation by `theta` inside the exchange manifold `{|n m>, |m n>}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldRotation {
    pub n: usize,
    pub m: usize,
    pub theta: f64,
    pub phi: f64,
    pub lam: f64,
    pub kappa: f64,
}

impl ManifoldRotation {
    /// Real rotation, all phases zero.
    pub fn real(n: usize, m: usize, theta: f64) -> Self {
        ManifoldRotation { n, m, theta, phi: 0.0, lam: 0.0, kappa: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryReport {
    pub matrix: ComplexMatrix,
    /// `||[U, H_C + H_H]||` for the Hamiltonian the unitary was built against.
    pub commutator_norm: f64,
    /// `||U - U_ref||` when a reference was supplied.
    pub epsilon: Option<f64>,
}

/// `||UH - HU||`.
pub fn commutator_norm(u: &ComplexMatrix, h_total: &ComplexMatrix) -> Result<f64> {
    if u.shape() != h_total.shape() || u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", h_total.nrows(), h_total.ncols()),
            found: format!("{}x{}", u.nrows(), u.ncols()),
        });
    }
    Ok(spectral_norm(&(u * h_total - h_total * u)))
}

/// Entries `[[U_ll, U_lh], [U_hl, U_hh]]` of one manifold block.
fn block(theta: f64, kappa: f64, lam: f64, phi: f64) -> [[C64; 2]; 2] {
    let (s, co) = theta.sin_cos();
    [
        [C64::from_polar(co, kappa + lam), -C64::from_polar(s, kappa - phi)],
        [C64::from_polar(s, kappa + phi), C64::from_polar(co, kappa - lam)],
    ]
}

fn resonant_qubit_hamiltonian() -> ComplexMatrix {
    let h = linalg::diag_real(&[0.0, 1.0]);
    kron(&h, &identity(2)) + kron(&identity(2), &h)
}

/// General energy-preserving two-qubit unitary acting on `(|01>, |10>)`.
pub fn two_qubit_unitary(theta: f64, kappa: f64, lam: f64, phi: f64) -> UnitaryReport {
    let mut u = identity(4);
    let b = block(theta, kappa, lam, phi);
    for (r, row) in [1usize, 2].iter().enumerate() {
        for (col, cidx) in [1usize, 2].iter().enumerate() {
            u[(*row, *cidx)] = b[r][col];
        }
    }
    let commutator_norm = commutator_norm(&u, &resonant_qubit_hamiltonian()).expect("4x4");
    UnitaryReport { matrix: u, commutator_norm, epsilon: None }
}

/// Phase-free form: `U[10,01] = sin(theta)`.
pub fn reduced_two_qubit_unitary(theta: f64) -> UnitaryReport {
    two_qubit_unitary(theta, 0.0, 0.0, 0.0)
}

/// Direct sum of manifold rotations for two copies of `spectrum`.
pub fn qudit_energy_preserving(
    spectrum: &EnergySpectrum,
    rotations: &[ManifoldRotation],
) -> Result<UnitaryReport> {
    spectrum.check_bohr_nondegenerate()?;
    let d = spectrum.dim();
    let mut u = identity(d * d);
    let mut seen: Vec<(usize, usize)> = Vec::new();
    for r in rotations {
        if r.n >= d || r.m >= d || r.n == r.m {
            return Err(Error::InvalidParameter(format!(
                "invalid manifold ({}, {}) for dimension {d}",
                r.n, r.m
            )));
        }
        let key = (r.n.min(r.m), r.n.max(r.m));
        if seen.contains(&key) {
            return Err(Error::DuplicateManifold(key.0, key.1));
        }
        seen.push(key);
        let (lo, hi) = manifold_indices(d, key.0, key.1);
        let b = block(r.theta, r.kappa, r.lam, r.phi);
        u[(lo, lo)] = b[0][0];
        u[(lo, hi)] = b[0][1];
        u[(hi, lo)] = b[1][0];
        u[(hi, hi)] = b[1][1];
    }
    let h = kron(&spectrum.hamiltonian(), &identity(d)) + kron(&identity(d), &spectrum.hamiltonian());
    let commutator_norm = commutator_norm(&u, &h)?;
    Ok(UnitaryReport { matrix: u, commutator_norm, epsilon: None })
}

/// Experiment coupling `(pi J / 2)(sx^H sy^C - sy^H sx^C)` in C-major order,
/// `J` in Hz and `hbar = 1`.
pub fn experiment_interaction(j: f64) -> ComplexMatrix {
    // hot-first sx^H sy^C is sy (x) sx with C first
    let a = kron(&pauli_y(), &pauli_x());
    let b = kron(&pauli_x(), &pauli_y());
    (a - b) * c(std::f64::consts::PI * j / 2.0, 0.0)
}

/// `exp(-i H_int t)`, commutator measured against the resonant qubit pair.
pub fn experiment_unitary(j: f64, t: f64) -> Result<UnitaryReport> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let u = expm_hermitian_generator(&experiment_interaction(j), t)?;
    let commutator_norm = commutator_norm(&u, &resonant_qubit_hamiltonian())?;
    Ok(UnitaryReport { matrix: u, commutator_norm, epsilon: None })
}

/// Rotation angle in the `(|01>, |10>)` manifold of a two-qubit unitary.
pub fn exchange_angle(u: &ComplexMatrix) -> f64 {
    u[(2, 1)].re.atan2(u[(1, 1)].re)
}

/// `exp(-i(H_int + Jx sx (x) sx) t)` with epsilon measured against the
/// `Jx = 0` member. The commutator is taken against `h_total`.
pub fn perturbed_unitary(j: f64, jx: f64, t: f64, h_total: &ComplexMatrix) -> Result<UnitaryReport> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let h = experiment_interaction(j) + kron(&pauli_x(), &pauli_x()) * c(jx, 0.0);
    let u = expm_hermitian_generator(&h, t)?;
    let reference = expm_hermitian_generator(&experiment_interaction(j), t)?;
    Ok(UnitaryReport {
        commutator_norm: commutator_norm(&u, h_total)?,
        epsilon: Some(spectral_norm(&(&u - &reference))),
        matrix: u,
    })
}
