//! Heat statistics: TPM and Margenau-Hill transition tables, heat
//! functionals, flow decomposition, exchange fluctuation theorem terms and
//! the closed forms for manifold-structured states.

use std::fmt::Write as _;

use crate::dynamics::ManifoldRotation;
use crate::error::{Error, Result};
use crate::linalg::{c, spectral_norm, ComplexMatrix, DimPair, Subsystem};
use crate::states::{manifold_indices, BipartiteSystem, EnergySpectrum, ManifoldCoherence};

/// Entries with `|p|` at or below this are treated as impossible events.
pub const NEGLIGIBLE: f64 = 1e-12;
/// Lower bound on Margenau-Hill entries.
pub const MH_LOWER_BOUND: f64 = -0.125;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Tpm,
    Mh,
}

/// Dense table of `p_{i -> f}` over joint product-basis indices.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    pub dims: DimPair,
    pub kind: TableKind,
    energies_c: Vec<f64>,
    energies_h: Vec<f64>,
    /// Row-major in `(initial, final)`.
    values: Vec<f64>,
}

impl TransitionTable {
    pub fn new(
        dims: DimPair,
        kind: TableKind,
        energies_c: Vec<f64>,
        energies_h: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let n = dims.joint();
        if values.len() != n * n || energies_c.len() != dims.d_c || energies_h.len() != dims.d_h {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", n * n),
                found: values.len().to_string(),
            });
        }
        Ok(TransitionTable { dims, kind, energies_c, energies_h, values })
    }

    pub fn joint_dim(&self) -> usize {
        self.dims.joint()
    }

    /// `p_{i -> f}` by joint indices.
    pub fn at(&self, i: usize, f: usize) -> f64 {
        self.values[i * self.joint_dim() + f]
    }

    pub fn get(&self, i_c: usize, i_h: usize, f_c: usize, f_h: usize) -> f64 {
        self.at(self.dims.index(i_c, i_h), self.dims.index(f_c, f_h))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn energies_c(&self) -> &[f64] {
        &self.energies_c
    }

    pub fn energies_h(&self) -> &[f64] {
        &self.energies_h
    }

    /// `(E_{f_C} - E_{i_C}, E_{f_H} - E_{i_H})`, final minus initial.
    pub fn energy_changes(&self, i: usize, f: usize) -> (f64, f64) {
        let (ic, ih) = self.dims.split(i);
        let (fc, fh) = self.dims.split(f);
        (
            self.energies_c[fc] - self.energies_c[ic],
            self.energies_h[fh] - self.energies_h[ih],
        )
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Entries below `-tol`, as `((i_C, i_H, f_C, f_H), value)`.
    pub fn negative_entries(&self, tol: f64) -> Vec<((usize, usize, usize, usize), f64)> {
        let n = self.joint_dim();
        let mut out = Vec::new();
        for i in 0..n {
            for f in 0..n {
                let v = self.at(i, f);
                if v < -tol {
                    let (ic, ih) = self.dims.split(i);
                    let (fc, fh) = self.dims.split(f);
                    out.push(((ic, ih, fc, fh), v));
                }
            }
        }
        out
    }

    /// `sum_f p_{i -> f}` for every `i`.
    pub fn initial_marginal(&self) -> Vec<f64> {
        let n = self.joint_dim();
        (0..n).map(|i| (0..n).map(|f| self.at(i, f)).sum()).collect()
    }

    /// `sum_i p_{i -> f}` for every `f`.
    pub fn final_marginal(&self) -> Vec<f64> {
        let n = self.joint_dim();
        (0..n).map(|f| (0..n).map(|i| self.at(i, f)).sum()).collect()
    }

    /// CSV with columns `i_C,i_H,f_C,f_H,value,dE_C,dE_H` (plus `stderr`
    /// when given), energy changes as final minus initial.
    pub fn to_csv(&self, stderr: Option<&[f64]>) -> String {
        let n = self.joint_dim();
        let mut out = String::from("i_C,i_H,f_C,f_H,value,dE_C,dE_H");
        if stderr.is_some() {
            out.push_str(",stderr");
        }
        out.push('\n');
        for i in 0..n {
            for f in 0..n {
                let (ic, ih) = self.dims.split(i);
                let (fc, fh) = self.dims.split(f);
                let (dc, dh) = self.energy_changes(i, f);
                let _ = write!(
                    out,
                    "{ic},{ih},{fc},{fh},{},{},{}",
                    fmt_f64(self.at(i, f)),
                    fmt_f64(dc),
                    fmt_f64(dh)
                );
                if let Some(se) = stderr {
                    let _ = write!(out, ",{}", fmt_f64(se[i * n + f]));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn check_dims(sys: &BipartiteSystem, u: &ComplexMatrix) -> Result<usize> {
    let n = sys.dims().joint();
    if u.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n} unitary"),
            found: format!("{}x{}", u.nrows(), u.ncols()),
        });
    }
    Ok(n)
}

fn table_for(sys: &BipartiteSystem, kind: TableKind, values: Vec<f64>) -> Result<TransitionTable> {
    TransitionTable::new(
        sys.dims(),
        kind,
        sys.spectrum_c.levels().to_vec(),
        sys.spectrum_h.levels().to_vec(),
        values,
    )
}

/// Two projective energy measurements: `p_{i->f} = |U_fi|^2 rho_ii`.
pub fn tpm_distribution(sys: &BipartiteSystem, u: &ComplexMatrix) -> Result<TransitionTable> {
    let n = check_dims(sys, u)?;
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        let p = sys.rho[(i, i)].re;
        for f in 0..n {
            values[i * n + f] = u[(f, i)].norm_sqr() * p;
        }
    }
    table_for(sys, TableKind::Tpm, values)
}

/// Margenau-Hill: `p_{i->f} = Re[U_fi (rho U^dag)_{if}]`.
pub fn mh_distribution(sys: &BipartiteSystem, u: &ComplexMatrix) -> Result<TransitionTable> {
    let n = check_dims(sys, u)?;
    let rho_udag = &sys.rho * u.adjoint();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for f in 0..n {
            values[i * n + f] = (u[(f, i)] * rho_udag[(i, f)]).re;
        }
    }
    table_for(sys, TableKind::Mh, values)
}

/// Signature shared by Margenau-Hill implementations.
pub type MhFn = fn(&BipartiteSystem, &ComplexMatrix) -> Result<TransitionTable>;

/// Largest deviation of the table marginals from the populations of
/// `rho` before and of `U rho U^dag` after.
pub fn marginal_deviation(table: &TransitionTable, rho: &ComplexMatrix, u: &ComplexMatrix) -> f64 {
    let fin = u * rho * u.adjoint();
    let a = table
        .initial_marginal()
        .iter()
        .enumerate()
        .map(|(k, v)| (v - rho[(k, k)].re).abs())
        .fold(0.0, f64::max);
    let b = table
        .final_marginal()
        .iter()
        .enumerate()
        .map(|(k, v)| (v - fin[(k, k)].re).abs())
        .fold(0.0, f64::max);
    a.max(b)
}

/// Marginal deviation against the undisturbed initial state of `sys`.
pub fn marginal_check(table: &TransitionTable, sys: &BipartiteSystem, u: &ComplexMatrix) -> f64 {
    marginal_deviation(table, &sys.rho, u)
}

/// `tr(rho H_C) - tr(U rho U^dag H_C)`; positive means heat left C.
pub fn heat_direct(sys: &BipartiteSystem, u: &ComplexMatrix) -> f64 {
    let h = sys.h_c_joint();
    let before = (&sys.rho * &h).trace().re;
    let after = (u * &sys.rho * u.adjoint() * &h).trace().re;
    before - after
}

/// `sum p (E_iC - E_fC)`.
pub fn heat_from_table(table: &TransitionTable) -> f64 {
    let n = table.joint_dim();
    let mut q = 0.0;
    for i in 0..n {
        for f in 0..n {
            q -= table.at(i, f) * table.energy_changes(i, f).0;
        }
    }
    q
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatReport {
    pub q: f64,
    /// Present when the report was built from a state and a unitary.
    pub q_tpm: Option<f64>,
    pub q_back: f64,
    pub q_direct: f64,
    pub negative_entries: Vec<((usize, usize, usize, usize), f64)>,
}

/// Splits the heat into back- and direct-flow parts using the positive and
/// negative components of each entry.
pub fn decompose_flows(table: &TransitionTable) -> HeatReport {
    let n = table.joint_dim();
    let pos = |v: f64| v.max(0.0);
    let neg = |v: f64| v.min(0.0);
    let (mut back, mut direct) = (0.0, 0.0);
    for i in 0..n {
        for f in 0..n {
            // -(E_fC - E_iC) = E_iC - E_fC
            let de = -table.energy_changes(i, f).0;
            if de > 0.0 {
                let fwd = table.at(i, f);
                let rev = table.at(f, i);
                back += (pos(fwd) - neg(rev)) * de;
                direct += (pos(rev) - neg(fwd)) * de;
            }
        }
    }
    HeatReport {
        q: back - direct,
        q_tpm: None,
        q_back: back,
        q_direct: direct,
        negative_entries: table.negative_entries(NEGLIGIBLE),
    }
}

/// Flow decomposition of the Margenau-Hill table plus the TPM heat.
pub fn heat_report(sys: &BipartiteSystem, u: &ComplexMatrix) -> Result<HeatReport> {
    let mh = mh_distribution(sys, u)?;
    let tpm = tpm_distribution(sys, u)?;
    let mut r = decompose_flows(&mh);
    r.q_tpm = Some(heat_from_table(&tpm));
    Ok(r)
}

// ---------------------------------------------------------------------------
// exchange fluctuation theorem

#[derive(Debug, Clone, PartialEq)]
pub struct XftReport {
    /// `< e^{dI + dbeta dE_{iC fC}} >` over the Margenau-Hill table.
    pub lhs: f64,
    /// Coherence term evaluated directly, when the unitary was available.
    pub chi_bar: Option<f64>,
    pub avg_delta_i: f64,
    pub resonance_ok: bool,
    /// Largest `|dE_C + dE_H|` over non-negligible entries.
    pub max_mismatch: f64,
}

impl XftReport {
    /// `1 + chi_bar`, using the direct value when present.
    pub fn one_plus_chi(&self) -> f64 {
        1.0 + self.chi_bar.unwrap_or(self.lhs - 1.0)
    }
}

fn betas(sys: &BipartiteSystem) -> Result<(f64, f64)> {
    match (sys.beta_c, sys.beta_h) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::InvalidParameter("inverse temperatures required".into())),
    }
}

/// Product of the marginal populations for every joint index.
fn product_populations(sys: &BipartiteSystem) -> Vec<f64> {
    let pc = sys.marginal(Subsystem::Cold);
    let ph = sys.marginal(Subsystem::Hot);
    let dims = sys.dims();
    (0..dims.joint())
        .map(|k| {
            let (a, b) = dims.split(k);
            pc[(a, a)].re * ph[(b, b)].re
        })
        .collect()
}

/// Default resonance tolerance for energy `scale`.
pub fn resonance_tolerance(scale: f64) -> f64 {
    1e-9 * scale.max(1.0)
}

/// XFT average; fails on a resonance mismatch above the default tolerance.
pub fn xft_lhs(table: &TransitionTable, sys: &BipartiteSystem) -> Result<XftReport> {
    let levels = sys.spectrum_c.levels().iter().chain(sys.spectrum_h.levels());
    let scale = levels.copied().fold(0.0, f64::max);
    xft_lhs_with_mismatch(table, sys, resonance_tolerance(scale))
}

/// XFT average accepting energy mismatches up to `allowed`.
pub fn xft_lhs_with_mismatch(
    table: &TransitionTable,
    sys: &BipartiteSystem,
    allowed: f64,
) -> Result<XftReport> {
    let (bc, bh) = betas(sys)?;
    let dbeta = bc - bh;
    let n = table.joint_dim();
    let prod = product_populations(sys);
    let info = |k: usize| -> Option<f64> {
        let p = sys.rho[(k, k)].re;
        (p > 0.0 && prod[k] > 0.0).then(|| (p / prod[k]).ln())
    };
    let levels = sys.spectrum_c.levels().iter().chain(sys.spectrum_h.levels());
    let tol = resonance_tolerance(levels.copied().fold(0.0, f64::max));
    let (mut lhs, mut avg_di, mut mismatch) = (0.0, 0.0, 0.0f64);
    for i in 0..n {
        for f in 0..n {
            let p = table.at(i, f);
            let (dc, dh) = table.energy_changes(i, f);
            if p.abs() > NEGLIGIBLE {
                mismatch = mismatch.max((dc + dh).abs());
            }
            let di = match (info(f), info(i)) {
                (Some(a), Some(b)) => a - b,
                _ if p.abs() <= NEGLIGIBLE => continue,
                _ => {
                    let k = if info(f).is_none() { f } else { i };
                    return Err(Error::LogDomain(sys.rho[(k, k)].re.min(prod[k])));
                }
            };
            lhs += p * (di - dbeta * dc).exp();
            avg_di += p * di;
        }
    }
    if mismatch > allowed.max(tol) {
        return Err(Error::ResonanceViolation { mismatch, tolerance: allowed.max(tol) });
    }
    Ok(XftReport {
        lhs,
        chi_bar: None,
        avg_delta_i: avg_di,
        resonance_ok: mismatch <= tol,
        max_mismatch: mismatch,
    })
}

/// `sum_{l, k != m} (rho_ll / rho_kk) Re{rho_km U_lk conj(U_lm)}`.
pub fn chi_bar(sys: &BipartiteSystem, u: &ComplexMatrix) -> Result<f64> {
    let n = check_dims(sys, u)?;
    let rho = &sys.rho;
    let mut total = 0.0;
    for k in 0..n {
        let pk = rho[(k, k)].re;
        for m in 0..n {
            if m == k {
                continue;
            }
            let rkm = rho[(k, m)];
            for l in 0..n {
                let num = rho[(l, l)].re * (rkm * u[(l, k)] * u[(l, m)].conj()).re;
                if num == 0.0 || (pk <= NEGLIGIBLE && num.abs() <= NEGLIGIBLE) {
                    continue;
                }
                if pk <= NEGLIGIBLE {
                    return Err(Error::Divergence(format!(
                        "population rho_{k} = {pk:e} in a denominator"
                    )));
                }
                total += num / pk;
            }
        }
    }
    Ok(total)
}

/// Full XFT report: table average plus the directly evaluated coherence term.
pub fn xft_report(sys: &BipartiteSystem, u: &ComplexMatrix) -> Result<XftReport> {
    let table = mh_distribution(sys, u)?;
    let mut r = xft_lhs(&table, sys)?;
    r.chi_bar = Some(chi_bar(sys, u)?);
    Ok(r)
}

/// `< e^{dbeta dE_{iC fC}} >` over a table.
pub fn exp_dbeta_average(table: &TransitionTable, sys: &BipartiteSystem) -> Result<f64> {
    let (bc, bh) = betas(sys)?;
    let n = table.joint_dim();
    let mut s = 0.0;
    for i in 0..n {
        for f in 0..n {
            s += table.at(i, f) * (-(bc - bh) * table.energy_changes(i, f).0).exp();
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JReport {
    pub j: f64,
    pub c_norm: f64,
    pub q_norm: f64,
}

impl JReport {
    /// `||c|| + ||q||`, an upper bound on `J`.
    pub fn bound(&self) -> f64 {
        self.c_norm + self.q_norm
    }
}

/// `J = Re tr{U^dag (rho_C (x) rho_H) U (c + q)}` with the classical and
/// coherent correlation matrices `c`, `q`.
pub fn j_term(sys: &BipartiteSystem, u: &ComplexMatrix) -> Result<JReport> {
    let n = check_dims(sys, u)?;
    let prod = product_populations(sys);
    if let Some(k) = prod.iter().position(|&p| p <= NEGLIGIBLE) {
        return Err(Error::Divergence(format!(
            "marginal product for joint index {k} is {:e}",
            prod[k]
        )));
    }
    let cm = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c((sys.rho[(i, i)].re - prod[i]) / prod[i], 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let qm = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(0.0, 0.0)
        } else {
            sys.rho[(i, j)] / prod[i]
        }
    });
    let pi = crate::linalg::diag_real(&prod);
    let evolved = u.adjoint() * pi * u;
    let j = (evolved * (&cm + &qm)).trace().re;
    Ok(JReport { j, c_norm: spectral_norm(&cm), q_norm: spectral_norm(&qm) })
}

// ---------------------------------------------------------------------------
// closed forms

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitClosedForm {
    pub pw_01_10: f64,
    pub pw_10_01: f64,
    pub ptpm_01_10: f64,
    pub ptpm_10_01: f64,
    pub q: f64,
    pub q_tpm: f64,
}

/// Closed-form exchange entries and heats for the two-qubit family with
/// gap `E = 1`-scaled energies.
pub fn two_qubit_closed_form(
    p: &crate::states::TwoQubitParams,
    theta: f64,
    lam: f64,
    phi: f64,
) -> TwoQubitClosedForm {
    let (zc, zh) = (p.z_c(), p.z_h());
    let (s, co) = theta.sin_cos();
    let psi = p.xi + phi + lam;
    let ptpm_01_10 = (1.0 / zc - p.p00) * s * s;
    let ptpm_10_01 = (1.0 / zh - p.p00) * s * s;
    let coh = p.eta * co * s * psi.cos();
    let q_tpm = p.e
        * s
        * s
        * (1.0 / (1.0 + (p.beta_c * p.e).exp()) - 1.0 / (1.0 + (p.beta_h * p.e).exp()));
    TwoQubitClosedForm {
        pw_01_10: ptpm_01_10 + coh,
        pw_10_01: ptpm_10_01 - coh,
        ptpm_01_10,
        ptpm_10_01,
        q: q_tpm - p.e * p.eta * psi.cos() * (2.0 * theta).sin(),
        q_tpm,
    }
}

/// One exchange transition `from -> to` with both distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeEntry {
    pub from: usize,
    pub to: usize,
    pub pw: f64,
    pub ptpm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuditClosedForm {
    pub entries: Vec<ExchangeEntry>,
    pub q_tpm: f64,
    /// `Q - Q_tpm`.
    pub delta_q: f64,
    pub delta_q_max: f64,
}

impl QuditClosedForm {
    pub fn q(&self) -> f64 {
        self.q_tpm + self.delta_q
    }
}

/// Exchange-manifold entries from populations, manifold coherences and
/// rotations, without building any matrix.
pub fn qudit_closed_form_pw(
    spectrum: &EnergySpectrum,
    populations: &[f64],
    coherences: &[ManifoldCoherence],
    rotations: &[ManifoldRotation],
) -> Result<QuditClosedForm> {
    spectrum.check_bohr_nondegenerate()?;
    let d = spectrum.dim();
    let mut out = QuditClosedForm { entries: Vec::new(), q_tpm: 0.0, delta_q: 0.0, delta_q_max: 0.0 };
    for coh in coherences {
        let (lo, hi) = manifold_indices(d, coh.n, coh.m);
        let gap = (spectrum.energy(coh.n) - spectrum.energy(coh.m)).abs();
        out.delta_q_max += coh.eta * (populations[lo] * populations[hi]).sqrt() * gap;
    }
    for r in rotations {
        let (n, m) = (r.n.min(r.m), r.n.max(r.m));
        let (lo, hi) = manifold_indices(d, n, m);
        let gap = spectrum.energy(m) - spectrum.energy(n);
        let (s, co) = r.theta.sin_cos();
        let (eta, xi) = coherences
            .iter()
            .find(|k| k.n.min(k.m) == n && k.n.max(k.m) == m)
            .map(|k| (k.eta, k.xi))
            .unwrap_or((0.0, 0.0));
        let amp = eta * (populations[lo] * populations[hi]).sqrt();
        let x = amp * s * co * (xi + r.phi + r.lam).cos();
        let (t_lo, t_hi) = (populations[lo] * s * s, populations[hi] * s * s);
        // lo = |n m>: C rises n -> m on lo -> hi
        out.entries.push(ExchangeEntry { from: lo, to: hi, pw: t_lo + x, ptpm: t_lo });
        out.entries.push(ExchangeEntry { from: hi, to: lo, pw: t_hi - x, ptpm: t_hi });
        out.q_tpm += gap * (t_hi - t_lo);
        out.delta_q -= gap * amp * (2.0 * r.theta).sin() * (xi + r.phi + r.lam).cos();
    }
    Ok(out)
}

/// `sum_{n<m} |rho[lo, hi]| (E_m - E_n)`, the largest coherent heat shift.
pub fn delta_q_max(sys: &BipartiteSystem) -> Result<f64> {
    let dims = sys.dims();
    if dims.d_c != dims.d_h {
        return Err(Error::DimensionMismatch {
            expected: "equal local dimensions".into(),
            found: format!("{}x{}", dims.d_c, dims.d_h),
        });
    }
    let d = dims.d_c;
    let mut total = 0.0;
    for n in 0..d {
        for m in n + 1..d {
            let (lo, hi) = manifold_indices(d, n, m);
            total += sys.rho[(lo, hi)].norm() * (sys.spectrum_c.energy(m) - sys.spectrum_c.energy(n));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{qudit_energy_preserving, reduced_two_qubit_unitary, two_qubit_unitary};
    use crate::linalg::identity;
    use crate::states::{
        dephase_local, experiment_state, two_qubit_state, two_qutrit_state, QutritStateParams,
        TwoQubitParams,
    };

    fn qubit_params(eta: f64, xi: f64) -> TwoQubitParams {
        TwoQubitParams { beta_c: 1.13, beta_h: 0.9618, e: 1.0, p00: 0.547, eta, xi }
    }

    #[test]
    fn identity_unitary() {
        let sys = two_qubit_state(&qubit_params(0.1, 0.3)).unwrap();
        let tpm = tpm_distribution(&sys, &identity(4)).unwrap();
        let mh = mh_distribution(&sys, &identity(4)).unwrap();
        for i in 0..4 {
            for f in 0..4 {
                let expect = if i == f { sys.rho[(i, i)].re } else { 0.0 };
                assert_eq!(tpm.at(i, f), expect);
                assert!((mh.at(i, f) - expect).abs() < 1e-15);
            }
        }
        assert_eq!(heat_from_table(&mh), 0.0);
        assert!(heat_direct(&sys, &identity(4)).abs() < 1e-15);
    }

    #[test]
    fn two_qubit_closed_forms() {
        for &(eta, xi, theta, lam, phi) in &[
            (0.1, 0.3, 0.4, 0.0, 0.0),
            (-0.19, 0.0, 1.2, 0.0, 0.0),
            (0.05, -1.0, 2.5, 0.4, -0.9),
        ] {
            let p = qubit_params(eta, xi);
            let sys = two_qubit_state(&p).unwrap();
            let u = two_qubit_unitary(theta, 0.7, lam, phi).matrix;
            let cf = two_qubit_closed_form(&p, theta, lam, phi);
            let mh = mh_distribution(&sys, &u).unwrap();
            let tpm = tpm_distribution(&sys, &u).unwrap();
            assert!((mh.at(1, 2) - cf.pw_01_10).abs() < 1e-14);
            assert!((mh.at(2, 1) - cf.pw_10_01).abs() < 1e-14);
            assert!((tpm.at(1, 2) - cf.ptpm_01_10).abs() < 1e-14);
            assert!((tpm.at(2, 1) - cf.ptpm_10_01).abs() < 1e-14);
            assert!((heat_direct(&sys, &u) - cf.q).abs() < 1e-14);
            assert!((heat_from_table(&mh) - cf.q).abs() < 1e-14);
            assert!((heat_from_table(&tpm) - cf.q_tpm).abs() < 1e-14);
            assert!(cf.q_tpm <= 0.0);
        }
    }

    #[test]
    fn tpm_is_blind_to_coherence() {
        let u = reduced_two_qubit_unitary(0.8).matrix;
        let a = tpm_distribution(&two_qubit_state(&qubit_params(0.0, 0.0)).unwrap(), &u).unwrap();
        let b = tpm_distribution(&two_qubit_state(&qubit_params(0.15, 0.4)).unwrap(), &u).unwrap();
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn marginals() {
        let sys = two_qubit_state(&qubit_params(0.15, 0.4)).unwrap();
        let u = reduced_two_qubit_unitary(0.8).matrix;
        let mh = mh_distribution(&sys, &u).unwrap();
        assert!(marginal_check(&mh, &sys, &u) < 1e-15);
        let tpm = tpm_distribution(&sys, &u).unwrap();
        assert!(marginal_deviation(&tpm, &dephase_local(&sys).rho, &u) < 1e-15);
        assert!(marginal_check(&tpm, &sys, &u) > 1e-3);
    }

    #[test]
    fn flows_split() {
        let sys = experiment_state(c(-0.19, 0.0), 1.13, 0.9618, 1.0).unwrap();
        let u = reduced_two_qubit_unitary(0.3).matrix;
        let mh = mh_distribution(&sys, &u).unwrap();
        assert!(mh.at(1, 2) < 0.0);
        let r = decompose_flows(&mh);
        assert!((r.q - heat_from_table(&mh)).abs() < 1e-15);
        // negative 01 -> 10 (C gains energy) feeds the backflow
        assert!((r.q_back - (mh.at(2, 1) - mh.at(1, 2))).abs() < 1e-15);
        assert_eq!(r.q_direct, 0.0);
        assert_eq!(r.negative_entries.len(), 1);
        let tpm = decompose_flows(&tpm_distribution(&sys, &u).unwrap());
        assert!(tpm.negative_entries.is_empty());
    }

    #[test]
    fn xft_and_j() {
        let sys = two_qubit_state(&qubit_params(0.1, 0.3)).unwrap();
        let u = two_qubit_unitary(0.9, 0.2, 0.1, -0.3).matrix;
        let r = xft_report(&sys, &u).unwrap();
        assert!(r.resonance_ok);
        assert!((r.lhs - 1.0 - r.chi_bar.unwrap()).abs() < 1e-12);
        let mh = mh_distribution(&sys, &u).unwrap();
        let jr = j_term(&sys, &u).unwrap();
        assert!((1.0 + jr.j - exp_dbeta_average(&mh, &sys).unwrap()).abs() < 1e-12);
        assert!(jr.j <= jr.bound() + 1e-12);

        let prod = two_qubit_state(&TwoQubitParams {
            p00: TwoQubitParams::product_p00(1.13, 0.9618, 1.0),
            ..qubit_params(0.0, 0.0)
        })
        .unwrap();
        let r = xft_report(&prod, &u).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-14 && r.avg_delta_i.abs() < 1e-14);
        let jr = j_term(&prod, &u).unwrap();
        assert!(jr.j.abs() < 1e-14 && jr.c_norm < 1e-14 && jr.q_norm == 0.0);
        assert_eq!(chi_bar(&sys, &identity(4)).unwrap(), 0.0);
    }

    #[test]
    fn xft_rejects_detuned() {
        let sys = crate::states::experiment_state_detuned(c(-0.05, 0.0), 1.0, 0.5, 1.0, 1.3).unwrap();
        let u = reduced_two_qubit_unitary(0.6).matrix;
        let mh = mh_distribution(&sys, &u).unwrap();
        assert!(matches!(xft_lhs(&mh, &sys), Err(Error::ResonanceViolation { .. })));
        let r = xft_lhs_with_mismatch(&mh, &sys, 0.31).unwrap();
        assert!(!r.resonance_ok);
    }

    #[test]
    fn qutrit_closed_form_matches() {
        let p = QutritStateParams { xi26: 0.3, ..QutritStateParams::case_study(1.0) };
        let sys = two_qutrit_state(&p).unwrap();
        let spec = p.spectrum().unwrap();
        let rots = [
            ManifoldRotation { n: 0, m: 1, theta: 0.4, phi: 0.3, lam: -0.2, kappa: 0.5 },
            ManifoldRotation::real(0, 2, 1.1),
            ManifoldRotation::real(1, 2, 1.1),
        ];
        let u = qudit_energy_preserving(&spec, &rots).unwrap().matrix;
        let cf = qudit_closed_form_pw(&spec, &p.populations().unwrap(), &p.coherences(), &rots).unwrap();
        let mh = mh_distribution(&sys, &u).unwrap();
        let tpm = tpm_distribution(&sys, &u).unwrap();
        assert_eq!(cf.entries.len(), 6);
        for e in &cf.entries {
            assert!((mh.at(e.from, e.to) - e.pw).abs() < 1e-14);
            assert!((tpm.at(e.from, e.to) - e.ptpm).abs() < 1e-14);
        }
        assert!((heat_direct(&sys, &u) - cf.q()).abs() < 1e-14);
        assert!((heat_from_table(&tpm) - cf.q_tpm).abs() < 1e-14);
        assert!((delta_q_max(&sys).unwrap() - cf.delta_q_max).abs() < 1e-14);
        assert!(cf.delta_q.abs() <= cf.delta_q_max + 1e-14);
    }

    #[test]
    fn csv_layout() {
        let sys = two_qubit_state(&qubit_params(0.1, 0.3)).unwrap();
        let t = mh_distribution(&sys, &reduced_two_qubit_unitary(0.5).matrix).unwrap();
        let csv = t.to_csv(None);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("i_C,i_H,f_C,f_H,value,dE_C,dE_H"));
        assert_eq!(csv.lines().count(), 17);
        let row: Vec<&str> = csv.lines().nth(7).unwrap().split(',').collect();
        // initial 01, final 10: C gains E
        assert_eq!(&row[..4], &["0", "1", "1", "0"]);
        assert_eq!(row[5].parse::<f64>().unwrap(), 1.0);
        let parsed: f64 = row[4].parse().unwrap();
        assert_eq!(parsed, t.at(1, 2));
    }
}
