//! Heat-flow inequalities. Each one holds whenever the Margenau-Hill
//! distribution is nonnegative, so a violation certifies negativity.

use std::fmt;

use crate::error::{Error, Result};
use crate::fluctuations::{heat_from_table, TransitionTable, XftReport};
use crate::states::EnergySpectrum;

/// Observed values must exceed a bound by more than this to count.
pub const VIOLATION_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InequalityId {
    T1,
    T2,
    T2Direct,
    T2Back,
    T3,
    T3Nonideal,
    T4Lower,
    T4Upper,
    I4,
    StrongBackflow,
}

impl InequalityId {
    pub fn as_str(&self) -> &'static str {
        match self {
            InequalityId::T1 => "T1",
            InequalityId::T2 => "T2",
            InequalityId::T2Direct => "T2-direct",
            InequalityId::T2Back => "T2-back",
            InequalityId::T3 => "T3",
            InequalityId::T3Nonideal => "T3-nonideal",
            InequalityId::T4Lower => "T4-lower",
            InequalityId::T4Upper => "T4-upper",
            InequalityId::I4 => "I4",
            InequalityId::StrongBackflow => "strong-backflow",
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which side of the bound the observation must stay on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `observed <= bound`
    Upper,
    /// `observed >= bound`
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessVerdict {
    pub id: InequalityId,
    pub bound: f64,
    pub observed: f64,
    pub side: Side,
    pub violated: bool,
    pub preconditions_ok: bool,
    /// `(condition, satisfied)` pairs.
    pub preconditions: Vec<(String, bool)>,
}

impl WitnessVerdict {
    fn new(id: InequalityId, bound: f64, observed: f64, side: Side, preconditions: Vec<(String, bool)>) -> Self {
        let preconditions_ok = preconditions.iter().all(|p| p.1);
        let outside = match side {
            Side::Upper => observed > bound + VIOLATION_MARGIN,
            Side::Lower => observed < bound - VIOLATION_MARGIN,
        };
        WitnessVerdict {
            id,
            bound,
            observed,
            side,
            violated: preconditions_ok && outside,
            preconditions_ok,
            preconditions,
        }
    }

    /// `1` violated, `0` not violated, `-1` preconditions failed.
    pub fn code(&self) -> i32 {
        if !self.preconditions_ok {
            -1
        } else if self.violated {
            1
        } else {
            0
        }
    }
}

fn nonzero_dbeta(beta_c: f64, beta_h: f64) -> Result<f64> {
    let db = beta_c - beta_h;
    if db == 0.0 || !db.is_finite() {
        return Err(Error::InvalidParameter("beta_C must differ from beta_H".into()));
    }
    Ok(db)
}

/// Side on which `Q` is bounded by `x / dbeta`: above when `dbeta > 0`.
fn side_for(dbeta: f64) -> Side {
    if dbeta > 0.0 {
        Side::Upper
    } else {
        Side::Lower
    }
}

/// Prefactor of the two-qubit bound, `(2 + e^{b_H E} + e^{b_C E}) / |e^{b_C E} - e^{b_H E}|`.
pub fn t1_prefactor(beta_c: f64, beta_h: f64, e: f64) -> Result<f64> {
    nonzero_dbeta(beta_c, beta_h)?;
    let (a, b) = ((beta_c * e).exp(), (beta_h * e).exp());
    Ok((2.0 + a + b) / (a - b).abs())
}

/// Two resonant qubits: `|Q| <= prefactor * |Q_tpm|`.
pub fn inequality_t1(q: f64, q_tpm: f64, beta_c: f64, beta_h: f64, e: f64) -> Result<WitnessVerdict> {
    let k = t1_prefactor(beta_c, beta_h, e)?;
    Ok(WitnessVerdict::new(InequalityId::T1, k * q_tpm.abs(), q.abs(), Side::Upper, Vec::new()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct T2Verdicts {
    pub symmetric: WitnessVerdict,
    pub direct: WitnessVerdict,
    pub back: WitnessVerdict,
    pub r: f64,
    pub delta: f64,
}

/// Two qubits with detuned gaps `E_C`, `E_H` and a unitary within
/// `epsilon` of an energy-preserving one.
#[allow(clippy::too_many_arguments)]
pub fn inequality_t2(
    q: f64,
    q_tpm: f64,
    beta_c: f64,
    beta_h: f64,
    e_c: f64,
    e_h: f64,
    epsilon: f64,
) -> Result<T2Verdicts> {
    if !(e_c > 0.0 && e_h > 0.0) || !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter("gaps must be positive and epsilon >= 0".into()));
    }
    let r = (1.0 + (beta_h * e_h).exp()) / (1.0 + (beta_c * e_c).exp());
    let e_bar = 0.5 * (e_c + e_h);
    let delta = (e_c - e_h).abs() / (2.0 * e_bar);
    let den = 1.0 - r - delta * (1.0 + r);
    let gap_ok = delta < (1.0 - r) / (1.0 + r) && den > 0.0;
    let flow_ok = q.abs() > 2.0 * epsilon * e_bar;
    let pre = vec![
        ("detuning below (1-R)/(1+R)".to_string(), gap_ok),
        ("|Q| > 2 epsilon E_bar".to_string(), flow_ok),
    ];
    let (sym_b, dir_b, back_b) = if gap_ok {
        let k = (1.0 + r + delta * (1.0 + r)) / den;
        let k_dir = (1.0 + r - delta * (1.0 + r)) / den;
        (
            k * q_tpm.abs() + 4.0 * e_bar * epsilon * (2.0 + delta * (1.0 + r)) / den,
            k_dir * q_tpm - 4.0 * e_bar * epsilon * (2.0 + delta * (1.0 + r)) / den,
            -k * q_tpm + 4.0 * e_bar * epsilon * (2.0 - r + delta * (1.0 + r)) / den,
        )
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(T2Verdicts {
        symmetric: WitnessVerdict::new(InequalityId::T2, sym_b, q.abs(), Side::Upper, pre.clone()),
        direct: WitnessVerdict::new(InequalityId::T2Direct, dir_b, q, Side::Lower, pre.clone()),
        back: WitnessVerdict::new(InequalityId::T2Back, back_b, q, Side::Upper, pre),
        r,
        delta,
    })
}

/// Fluctuation-theorem bound `Q <= (-<dI> + log(1 + chi_bar) - b_H eps) / dbeta`
/// (inequality reversed for `dbeta < 0`). `epsilon_work` selects the
/// nonideal variant.
pub fn inequality_t3(
    q: f64,
    xft: &XftReport,
    beta_c: f64,
    beta_h: f64,
    epsilon_work: Option<f64>,
) -> Result<WitnessVerdict> {
    let db = nonzero_dbeta(beta_c, beta_h)?;
    let arg = xft.one_plus_chi();
    if !(arg > 0.0) {
        return Err(Error::LogDomain(arg));
    }
    if !xft.avg_delta_i.is_finite() {
        return Err(Error::Divergence("<dI> is not finite".into()));
    }
    let eps = epsilon_work.unwrap_or(0.0);
    let bound = (-xft.avg_delta_i + arg.ln() - beta_h * eps) / db;
    let id = if epsilon_work.is_some() { InequalityId::T3Nonideal } else { InequalityId::T3 };
    Ok(WitnessVerdict::new(id, bound, q, side_for(db), Vec::new()))
}

/// `Q <= log(1 + J) / dbeta` (reversed for `dbeta < 0`).
pub fn inequality_i4(q: f64, j: f64, beta_c: f64, beta_h: f64) -> Result<WitnessVerdict> {
    let db = nonzero_dbeta(beta_c, beta_h)?;
    if !(1.0 + j > 0.0) {
        return Err(Error::LogDomain(1.0 + j));
    }
    Ok(WitnessVerdict::new(InequalityId::I4, (1.0 + j).ln() / db, q, side_for(db), Vec::new()))
}

/// `(lambda_-, lambda_+)` from a TPM table.
pub fn t4_lambdas(tpm: &TransitionTable) -> (f64, f64) {
    let n = tpm.joint_dim();
    let (mut minus, mut plus) = (0.0, 0.0);
    for i in 0..n {
        for f in 0..n {
            let gain = tpm.energy_changes(i, f).0;
            if gain < 0.0 {
                minus -= tpm.at(i, f) * gain;
            } else if gain > 0.0 {
                plus += tpm.at(i, f) * gain;
            }
        }
    }
    (minus, plus)
}

/// `Q in [Q_tpm - 2 lambda_-, Q_tpm + 2 lambda_+]`; returns `(lower, upper)`.
pub fn inequality_t4(q: f64, tpm: &TransitionTable) -> Result<(WitnessVerdict, WitnessVerdict)> {
    for levels in [tpm.energies_c(), tpm.energies_h()] {
        EnergySpectrum::new(levels.to_vec())?.check_bohr_nondegenerate()?;
    }
    let (lm, lp) = t4_lambdas(tpm);
    let q_tpm = heat_from_table(tpm);
    Ok((
        WitnessVerdict::new(InequalityId::T4Lower, q_tpm - 2.0 * lm, q, Side::Lower, Vec::new()),
        WitnessVerdict::new(InequalityId::T4Upper, q_tpm + 2.0 * lp, q, Side::Upper, Vec::new()),
    ))
}

/// Backflow beyond `log(d) / dbeta` requires entanglement.
pub fn strong_backflow(q: f64, beta_c: f64, beta_h: f64, d: usize) -> WitnessVerdict {
    let db = beta_c - beta_h;
    let ok = db > 0.0;
    let bound = if ok { (d as f64).ln() / db } else { f64::NAN };
    WitnessVerdict::new(
        InequalityId::StrongBackflow,
        bound,
        q,
        Side::Upper,
        vec![("beta_C > beta_H".to_string(), ok)],
    )
}
