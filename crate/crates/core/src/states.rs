//! Locally thermal bipartite states.
//!
//! All constructors return a validated [`BipartiteSystem`]: unit trace,
//! Hermitian, positive semidefinite and, when inverse temperatures are
//! attached, with both marginals equal to the Gibbs states.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, diag_real, hermiticity_deviation, kron, max_abs_diff, min_eigenvalue,
    partial_trace, partial_transpose, trace, ComplexMatrix, DimPair, Subsystem, C64, PSD_TOL,
};

/// Tolerance for "two gaps coincide".
pub const BOHR_TOL: f64 = 1e-9;
/// Entrywise tolerance when comparing marginals with Gibbs states.
pub const MARGINAL_TOL: f64 = 1e-9;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Slack used on closed-form population bounds.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpectrum {
    levels: Vec<f64>,
}

impl EnergySpectrum {
    /// Levels must be finite, strictly ascending and start at zero.
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidSpectrum("need at least two levels".into()));
        }
        if levels.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidSpectrum("non-finite level".into()));
        }
        if levels[0].abs() > 1e-12 {
            return Err(Error::InvalidSpectrum(format!(
                "ground level must be 0, got {}",
                levels[0]
            )));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpectrum("levels must be strictly ascending".into()));
        }
        Ok(EnergySpectrum { levels })
    }

    /// Two-level spectrum `{0, gap}`.
    pub fn qubit(gap: f64) -> Result<Self> {
        Self::new(vec![0.0, gap])
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn energy(&self, k: usize) -> f64 {
        self.levels[k]
    }

    /// Fails when two gaps `E_n - E_m` (n > m) agree within [`BOHR_TOL`].
    pub fn check_bohr_nondegenerate(&self) -> Result<()> {
        let d = self.dim();
        let mut gaps = Vec::with_capacity(d * (d - 1) / 2);
        for n in 0..d {
            for m in 0..n {
                gaps.push(((n, m), self.levels[n] - self.levels[m]));
            }
        }
        for (a, &(pa, ga)) in gaps.iter().enumerate() {
            for &(pb, gb) in &gaps[a + 1..] {
                if (ga - gb).abs() <= BOHR_TOL {
                    return Err(Error::DegenerateBohrSpectrum(
                        format!("E{}-E{}", pa.0, pa.1),
                        format!("E{}-E{}", pb.0, pb.1),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn has_nondegenerate_bohr(&self) -> bool {
        self.check_bohr_nondegenerate().is_ok()
    }

    /// True when every two distinct gaps differ by more than `tol`.
    pub fn gaps_separated_by(&self, tol: f64) -> bool {
        let d = self.dim();
        let mut gaps = Vec::new();
        for n in 0..d {
            for m in 0..n {
                gaps.push(self.levels[n] - self.levels[m]);
            }
        }
        gaps.sort_by(f64::total_cmp);
        gaps.windows(2).all(|w| w[1] - w[0] > tol)
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        diag_real(&self.levels)
    }

    /// Normalised Boltzmann weights `e^{-beta E_k} / Z`.
    pub fn gibbs_populations(&self, beta: f64) -> Vec<f64> {
        let exps: Vec<f64> = self.levels.iter().map(|e| -beta * e).collect();
        let shift = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = exps.iter().map(|x| (x - shift).exp()).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    }
}

/// Diagonal Gibbs state of `spectrum` at inverse temperature `beta`.
pub fn thermal_state(spectrum: &EnergySpectrum, beta: f64) -> ComplexMatrix {
    diag_real(&spectrum.gibbs_populations(beta))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteSystem {
    pub spectrum_c: EnergySpectrum,
    pub spectrum_h: EnergySpectrum,
    pub rho: ComplexMatrix,
    pub beta_c: Option<f64>,
    pub beta_h: Option<f64>,
}

impl BipartiteSystem {
    /// Validates the density-matrix invariants and, when both inverse
    /// temperatures are given, the thermal marginals.
    pub fn new(
        spectrum_c: EnergySpectrum,
        spectrum_h: EnergySpectrum,
        rho: ComplexMatrix,
        betas: Option<(f64, f64)>,
    ) -> Result<Self> {
        let sys = BipartiteSystem {
            spectrum_c,
            spectrum_h,
            rho,
            beta_c: betas.map(|b| b.0),
            beta_h: betas.map(|b| b.1),
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn dims(&self) -> DimPair {
        DimPair {
            d_c: self.spectrum_c.dim(),
            d_h: self.spectrum_h.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = self.dims();
        let n = dims.joint();
        if self.rho.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n}"),
                found: format!("{}x{}", self.rho.nrows(), self.rho.ncols()),
            });
        }
        if !linalg::all_finite(&self.rho) {
            return Err(Error::Infeasible("non-finite density matrix entry".into()));
        }
        let dev = hermiticity_deviation(&self.rho);
        if dev > linalg::HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = trace(&self.rho);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Infeasible(format!("trace {} differs from 1", tr.re)));
        }
        let lam = min_eigenvalue(&self.rho)?;
        if lam < -PSD_TOL {
            return Err(Error::Infeasible(format!(
                "not positive semidefinite (min eigenvalue {lam:e})"
            )));
        }
        if let (Some(bc), Some(bh)) = (self.beta_c, self.beta_h) {
            for (which, spec, beta, name) in [
                (Subsystem::Hot, &self.spectrum_c, bc, "C"),
                (Subsystem::Cold, &self.spectrum_h, bh, "H"),
            ] {
                let marginal = partial_trace(&self.rho, dims, which)?;
                let dev = max_abs_diff(&marginal, &thermal_state(spec, beta));
                if dev > MARGINAL_TOL {
                    return Err(Error::Infeasible(format!(
                        "marginal of {name} is not thermal (deviation {dev:e})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn marginal(&self, keep: Subsystem) -> ComplexMatrix {
        let over = match keep {
            Subsystem::Cold => Subsystem::Hot,
            Subsystem::Hot => Subsystem::Cold,
        };
        partial_trace(&self.rho, self.dims(), over).expect("validated shape")
    }

    /// `H_C ⊗ I`.
    pub fn h_c_joint(&self) -> ComplexMatrix {
        kron(&self.spectrum_c.hamiltonian(), &linalg::identity(self.spectrum_h.dim()))
    }

    /// `I ⊗ H_H`.
    pub fn h_h_joint(&self) -> ComplexMatrix {
        kron(&linalg::identity(self.spectrum_c.dim()), &self.spectrum_h.hamiltonian())
    }

    pub fn total_hamiltonian(&self) -> ComplexMatrix {
        self.h_c_joint() + self.h_h_joint()
    }

    /// Total energy of joint basis state `k`.
    pub fn total_energy(&self, k: usize) -> f64 {
        let (i_c, i_h) = self.dims().split(k);
        self.spectrum_c.energy(i_c) + self.spectrum_h.energy(i_h)
    }

    pub fn populations(&self) -> Vec<f64> {
        self.rho.diagonal().iter().map(|z| z.re).collect()
    }

    fn with_rho(&self, rho: ComplexMatrix) -> BipartiteSystem {
        BipartiteSystem {
            spectrum_c: self.spectrum_c.clone(),
            spectrum_h: self.spectrum_h.clone(),
            rho,
            beta_c: self.beta_c,
            beta_h: self.beta_h,
        }
    }
}

// ---------------------------------------------------------------------------
// two qubits

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitParams {
    pub beta_c: f64,
    pub beta_h: f64,
    /// Resonant gap, `H_C = H_H = E |1><1|`.
    pub e: f64,
    pub p00: f64,
    pub eta: f64,
    pub xi: f64,
}

impl TwoQubitParams {
    pub fn z_c(&self) -> f64 {
        1.0 + (-self.beta_c * self.e).exp()
    }

    pub fn z_h(&self) -> f64 {
        1.0 + (-self.beta_h * self.e).exp()
    }

    /// `[lower, upper]` admissible range of `P00`.
    pub fn p00_bounds(&self) -> (f64, f64) {
        let (zc, zh) = (self.z_c(), self.z_h());
        let lower = ((zc + zh - zc * zh) / (zc * zh)).max(0.0);
        let upper = (1.0 / zh).min(1.0 / zc);
        (lower, upper)
    }

    /// Largest admissible `|eta|` at the current `P00`.
    pub fn eta_cap(&self) -> f64 {
        let a = 1.0 / self.z_c() - self.p00;
        let b = 1.0 / self.z_h() - self.p00;
        (a.max(0.0) * b.max(0.0)).sqrt()
    }

    /// `P00` of the uncorrelated product of Gibbs states.
    pub fn product_p00(beta_c: f64, beta_h: f64, e: f64) -> f64 {
        1.0 / ((1.0 + (-beta_c * e).exp()) * (1.0 + (-beta_h * e).exp()))
    }

    pub fn check(&self) -> Result<()> {
        for (name, v) in [
            ("beta_C", self.beta_c),
            ("beta_H", self.beta_h),
            ("E", self.e),
            ("P00", self.p00),
            ("eta", self.eta),
            ("xi", self.xi),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} is not finite")));
            }
        }
        if self.e <= 0.0 {
            return Err(Error::InvalidParameter("gap E must be positive".into()));
        }
        let (zc, zh) = (self.z_c(), self.z_h());
        if self.p00 > 1.0 / zh + BOUND_SLACK {
            return Err(Error::Infeasible(format!(
                "P00 = {} exceeds upper bound 1/z_H = {}",
                self.p00,
                1.0 / zh
            )));
        }
        if self.p00 > 1.0 / zc + BOUND_SLACK {
            return Err(Error::Infeasible(format!(
                "P00 = {} exceeds 1/z_C = {}",
                self.p00,
                1.0 / zc
            )));
        }
        let lower = (zc + zh - zc * zh) / (zc * zh);
        if self.p00 < lower - BOUND_SLACK {
            return Err(Error::Infeasible(format!(
                "P00 = {} below lower bound (z_C + z_H - z_C z_H)/(z_C z_H) = {lower}",
                self.p00
            )));
        }
        if self.p00 < -BOUND_SLACK {
            return Err(Error::Infeasible(format!("P00 = {} is negative", self.p00)));
        }
        let cap = self.eta_cap();
        if self.eta.abs() > cap + BOUND_SLACK {
            return Err(Error::Infeasible(format!(
                "|eta| = {} exceeds sqrt((1/z_C - P00)(1/z_H - P00)) = {cap}",
                self.eta.abs()
            )));
        }
        Ok(())
    }
}

/// Two-qubit state with thermal marginals and `eta e^{i xi}` on the
/// `(|01>, |10>)` coherence.
pub fn two_qubit_state(p: &TwoQubitParams) -> Result<BipartiteSystem> {
    p.check()?;
    let (zc, zh) = (p.z_c(), p.z_h());
    let pops = [
        p.p00,
        1.0 / zc - p.p00,
        1.0 / zh - p.p00,
        (zc * zh - zc - zh) / (zc * zh) + p.p00,
    ];
    let mut rho = diag_real(&pops);
    let coh = C64::from_polar(1.0, p.xi) * p.eta;
    rho[(1, 2)] = coh;
    rho[(2, 1)] = coh.conj();
    let spec = EnergySpectrum::qubit(p.e)?;
    BipartiteSystem::new(spec.clone(), spec, rho, Some((p.beta_c, p.beta_h)))
}

/// Resonant experiment state `rho_H ⊗ rho_C + gamma|01><10| + h.c.`.
///
/// The input is written hot-first, as the experiment reports it. Stored
/// C-major, the hot-first `|01><10|` becomes `|10><01|`, so
/// `rho[10, 01] = gamma` and `rho[01, 10] = conj(gamma)`.
pub fn experiment_state(gamma: C64, beta_c: f64, beta_h: f64, e: f64) -> Result<BipartiteSystem> {
    experiment_state_detuned(gamma, beta_c, beta_h, e, e)
}

/// Same as [`experiment_state`] with separate gaps for C and H.
pub fn experiment_state_detuned(
    gamma: C64,
    beta_c: f64,
    beta_h: f64,
    e_c: f64,
    e_h: f64,
) -> Result<BipartiteSystem> {
    let spec_c = EnergySpectrum::qubit(e_c)?;
    let spec_h = EnergySpectrum::qubit(e_h)?;
    let mut rho = kron(&thermal_state(&spec_c, beta_c), &thermal_state(&spec_h, beta_h));
    rho[(2, 1)] += gamma;
    rho[(1, 2)] += gamma.conj();
    let cap = (rho[(1, 1)].re * rho[(2, 2)].re).sqrt();
    if gamma.norm() > cap + BOUND_SLACK {
        return Err(Error::Infeasible(format!(
            "|gamma| = {} exceeds sqrt(rho_01 rho_10) = {cap}: not positive semidefinite",
            gamma.norm()
        )));
    }
    BipartiteSystem::new(spec_c, spec_h, rho, Some((beta_c, beta_h)))
}

// ---------------------------------------------------------------------------
// qudits

/// Coherence between `|n m>` and `|m n>` (n < m), written
/// `rho[lo, hi] = eta e^{i xi} sqrt(rho_lo rho_hi)` with `lo = n d + m`,
/// `hi = m d + n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldCoherence {
    pub n: usize,
    pub m: usize,
    pub eta: f64,
    pub xi: f64,
}

/// Joint indices `(lo, hi)` of the exchange manifold of levels `n < m`.
pub fn manifold_indices(d: usize, n: usize, m: usize) -> (usize, usize) {
    let (a, b) = if n < m { (n, m) } else { (m, n) };
    (a * d + b, b * d + a)
}

fn check_manifold(d: usize, n: usize, m: usize) -> Result<()> {
    if n >= d || m >= d || n == m {
        return Err(Error::InvalidParameter(format!(
            "invalid manifold ({n}, {m}) for dimension {d}"
        )));
    }
    Ok(())
}

/// Builds a state from a full population vector (C-major) plus manifold
/// coherences. Both subsystems share `spectrum`.
pub fn qudit_from_populations(
    spectrum: &EnergySpectrum,
    beta_c: f64,
    beta_h: f64,
    populations: &[f64],
    coherences: &[ManifoldCoherence],
) -> Result<BipartiteSystem> {
    spectrum.check_bohr_nondegenerate()?;
    let d = spectrum.dim();
    if populations.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: format!("{} populations", d * d),
            found: populations.len().to_string(),
        });
    }
    for (k, &p) in populations.iter().enumerate() {
        if !(p >= -PSD_TOL) {
            return Err(Error::Infeasible(format!("population rho_{k} = {p} is negative")));
        }
    }
    let mut rho = diag_real(populations);
    let mut seen = Vec::new();
    for coh in coherences {
        check_manifold(d, coh.n, coh.m)?;
        let key = (coh.n.min(coh.m), coh.n.max(coh.m));
        if seen.contains(&key) {
            return Err(Error::DuplicateManifold(key.0, key.1));
        }
        seen.push(key);
        if !(0.0..=1.0).contains(&coh.eta) || !coh.xi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "eta_({},{}) = {} must lie in [0, 1]",
                key.0, key.1, coh.eta
            )));
        }
        let (lo, hi) = manifold_indices(d, key.0, key.1);
        let amp = coh.eta * (populations[lo].max(0.0) * populations[hi].max(0.0)).sqrt();
        let z = C64::from_polar(amp, coh.xi);
        rho[(lo, hi)] = z;
        rho[(hi, lo)] = z.conj();
    }
    BipartiteSystem::new(spectrum.clone(), spectrum.clone(), rho, Some((beta_c, beta_h)))
}

/// Default free-population positions for dimension `d`: every `(i_C, i_H)`
/// with both indices nonzero. The first row and column are then fixed by
/// the marginals.
pub fn default_free_indices(d: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 1..d {
        for j in 1..d {
            out.push(i * d + j);
        }
    }
    out
}

/// Solves the `2d` marginal equations for the populations not listed in
/// `free` (given as `(joint index, value)`).
pub fn solve_populations(
    d: usize,
    marg_c: &[f64],
    marg_h: &[f64],
    free: &[(usize, f64)],
) -> Result<Vec<f64>> {
    let n = d * d;
    let mut fixed = vec![None; n];
    for &(k, v) in free {
        if k >= n {
            return Err(Error::InvalidParameter(format!("free population index {k} out of range")));
        }
        if fixed[k].is_some() {
            return Err(Error::InvalidParameter(format!("free population {k} given twice")));
        }
        fixed[k] = Some(v);
    }
    let unknowns: Vec<usize> = (0..n).filter(|&k| fixed[k].is_none()).collect();
    if unknowns.len() != 2 * d - 1 {
        return Err(Error::InvalidParameter(format!(
            "expected {} free populations, got {}",
            (d - 1) * (d - 1),
            free.len()
        )));
    }
    // rows: C-marginal equations then H-marginal equations
    let mut a = DMatrix::<f64>::zeros(2 * d, unknowns.len());
    let mut rhs = DVector::<f64>::zeros(2 * d);
    for row in 0..d {
        rhs[row] = marg_c[row];
        rhs[d + row] = marg_h[row];
    }
    for (k, fk) in fixed.iter().enumerate().take(n) {
        let (ic, ih) = (k / d, k % d);
        match *fk {
            Some(v) => {
                rhs[ic] -= v;
                rhs[d + ih] -= v;
            }
            None => {
                let col = unknowns.iter().position(|&u| u == k).unwrap();
                a[(ic, col)] = 1.0;
                a[(d + ih, col)] = 1.0;
            }
        }
    }
    let svd = a.clone().svd(true, true);
    let rank = svd.rank(1e-10);
    if rank < unknowns.len() {
        return Err(Error::InvalidParameter(
            "free populations leave the remaining ones undetermined".into(),
        ));
    }
    let x = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let resid = (&a * &x - &rhs).amax();
    if resid > 1e-10 {
        return Err(Error::Infeasible(format!(
            "free populations inconsistent with thermal marginals (residual {resid:e})"
        )));
    }
    let mut pops = vec![0.0; n];
    for k in 0..n {
        pops[k] = match fixed[k] {
            Some(v) => v,
            None => x[unknowns.iter().position(|&u| u == k).unwrap()],
        };
    }
    Ok(pops)
}

/// General qudit locally thermal state: both subsystems share `spectrum`,
/// `free` pins `(d-1)^2` populations, the rest follow from the marginals.
pub fn qudit_locally_thermal(
    spectrum: &EnergySpectrum,
    beta_c: f64,
    beta_h: f64,
    free: &[(usize, f64)],
    coherences: &[ManifoldCoherence],
) -> Result<BipartiteSystem> {
    spectrum.check_bohr_nondegenerate()?;
    let d = spectrum.dim();
    let pops = solve_populations(
        d,
        &spectrum.gibbs_populations(beta_c),
        &spectrum.gibbs_populations(beta_h),
        free,
    )?;
    qudit_from_populations(spectrum, beta_c, beta_h, &pops, coherences)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QutritStateParams {
    pub beta_c: f64,
    pub beta_h: f64,
    pub e1: f64,
    pub e2: f64,
    pub rho0: f64,
    pub rho5: f64,
    pub rho7: f64,
    pub rho8: f64,
    pub eta13: f64,
    pub eta26: f64,
    pub eta57: f64,
    pub xi13: f64,
    pub xi26: f64,
    pub xi57: f64,
}

impl QutritStateParams {
    /// Caption parameters of the two-qutrit case study, with a common `eta`.
    pub fn case_study(eta: f64) -> Self {
        QutritStateParams {
            beta_c: 1.3,
            beta_h: 0.3,
            e1: 1.0,
            e2: 1.15,
            rho0: 0.3,
            rho5: 0.03,
            rho7: 0.07,
            rho8: 0.06,
            eta13: eta,
            eta26: eta,
            eta57: eta,
            xi13: 0.0,
            xi26: 0.0,
            xi57: 0.0,
        }
    }

    pub fn spectrum(&self) -> Result<EnergySpectrum> {
        EnergySpectrum::new(vec![0.0, self.e1, self.e2])
    }

    /// All nine populations, the five implied ones solved by substitution.
    pub fn populations(&self) -> Result<[f64; 9]> {
        let spec = self.spectrum()?;
        let gc = spec.gibbs_populations(self.beta_c);
        let gh = spec.gibbs_populations(self.beta_h);
        let (r0, r5, r7, r8) = (self.rho0, self.rho5, self.rho7, self.rho8);
        let r6 = gc[2] - r7 - r8;
        let r2 = gh[2] - r5 - r8;
        let r1 = gc[0] - r0 - r2;
        let r3 = gh[0] - r0 - r6;
        let r4 = gc[1] - r3 - r5;
        Ok([r0, r1, r2, r3, r4, r5, r6, r7, r8])
    }

    pub fn coherences(&self) -> [ManifoldCoherence; 3] {
        [
            ManifoldCoherence { n: 0, m: 1, eta: self.eta13, xi: self.xi13 },
            ManifoldCoherence { n: 0, m: 2, eta: self.eta26, xi: self.xi26 },
            ManifoldCoherence { n: 1, m: 2, eta: self.eta57, xi: self.xi57 },
        ]
    }
}

/// Two-qutrit state with free populations `rho_0, rho_5, rho_7, rho_8`.
pub fn two_qutrit_state(p: &QutritStateParams) -> Result<BipartiteSystem> {
    let spec = p.spectrum()?;
    let pops = p.populations()?;
    for (k, &v) in pops.iter().enumerate() {
        if v < -PSD_TOL {
            return Err(Error::Infeasible(format!("population rho_{k} = {v} is negative")));
        }
    }
    qudit_from_populations(&spec, p.beta_c, p.beta_h, &pops, &p.coherences())
}

// ---------------------------------------------------------------------------

/// Global dephasing in the eigenbasis of `H_C + H_H`: coherences between
/// different total energies are removed.
pub fn dephase(sys: &BipartiteSystem) -> BipartiteSystem {
    let n = sys.dims().joint();
    let energies: Vec<f64> = (0..n).map(|k| sys.total_energy(k)).collect();
    let rho = ComplexMatrix::from_fn(n, n, |i, j| {
        if (energies[i] - energies[j]).abs() <= BOHR_TOL {
            sys.rho[(i, j)]
        } else {
            c(0.0, 0.0)
        }
    });
    sys.with_rho(rho)
}

/// Dephasing in the product energy basis (the first TPM measurement).
pub fn dephase_local(sys: &BipartiteSystem) -> BipartiteSystem {
    let n = sys.dims().joint();
    let rho = ComplexMatrix::from_fn(n, n, |i, j| if i == j { sys.rho[(i, j)] } else { c(0.0, 0.0) });
    sys.with_rho(rho)
}

/// Smallest eigenvalue of the partial transpose over H.
pub fn min_pt_eigenvalue(sys: &BipartiteSystem) -> f64 {
    let pt = partial_transpose(&sys.rho, sys.dims(), Subsystem::Hot).expect("validated shape");
    min_eigenvalue(&pt).expect("partial transpose of a Hermitian matrix is Hermitian")
}

/// Peres-Horodecki verdict; only conclusive for 2x2 and 2x3 systems.
pub fn ppt_separable(sys: &BipartiteSystem) -> Option<bool> {
    let DimPair { d_c, d_h } = sys.dims();
    let conclusive = d_c * d_h <= 6;
    conclusive.then(|| min_pt_eigenvalue(sys) >= -PSD_TOL)
}
