//! Qubit-probe weak measurement of the Margenau-Hill row of one initial
//! energy state.
//!
//! The probe starts in `cos(e)|0> - sin(e)|1>`, couples through
//! `V = P_perp (x) I + P (x) sz` with `P` the projector on the target state,
//! the system then evolves under `U` and both are measured: the probe in the
//! `|+->` basis, the system in the energy basis. A second run without the
//! probe gives the undisturbed final populations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{basis_projector, c, identity, kron, pauli_z, trace_norm_hermitian, ComplexMatrix};
use crate::states::BipartiteSystem;

/// Shots per independently seeded random stream.
pub const SHOTS_PER_STREAM: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOutcomeStats {
    pub target: (usize, usize),
    pub epsilon: f64,
    /// Indexed by joint final state.
    pub q_plus: Vec<f64>,
    pub q_minus: Vec<f64>,
    pub p_undisturbed: Vec<f64>,
}

impl ProbeOutcomeStats {
    /// `q_+ - q_-` per final state.
    pub fn delta_q(&self) -> Vec<f64> {
        self.q_plus.iter().zip(&self.q_minus).map(|(a, b)| a - b).collect()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!("probe coupling {eps} outside (0, pi/2)")));
    }
    Ok(())
}

fn ancilla(eps: f64) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(2, 1, &[c(eps.cos(), 0.0), c(-eps.sin(), 0.0)])
}

fn plus_minus() -> [ComplexMatrix; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        ComplexMatrix::from_column_slice(2, 1, &[c(h, 0.0), c(h, 0.0)]),
        ComplexMatrix::from_column_slice(2, 1, &[c(h, 0.0), c(-h, 0.0)]),
    ]
}

fn coupling(n: usize, target: usize) -> ComplexMatrix {
    let p = basis_projector(n, target);
    let perp = identity(n) - &p;
    kron(&perp, &identity(2)) + kron(&p, &pauli_z())
}

/// Kraus operators `<+|V|a>`, `<-|V|a>` acting on the system.
pub fn probe_kraus(n: usize, target: usize, eps: f64) -> Result<[ComplexMatrix; 2]> {
    check_eps(eps)?;
    let v = coupling(n, target);
    let a = ancilla(eps);
    let [plus, minus] = plus_minus();
    let kraus = |out: &ComplexMatrix| -> ComplexMatrix {
        let left = kron(&identity(n), &out.adjoint());
        let right = kron(&identity(n), &a);
        left * &v * right
    };
    Ok([kraus(&plus), kraus(&minus)])
}

/// POVM effects `E_+-` induced on the system.
pub fn probe_effects(n: usize, target: usize, eps: f64) -> Result<[ComplexMatrix; 2]> {
    let [kp, km] = probe_kraus(n, target, eps)?;
    Ok([kp.adjoint() * kp, km.adjoint() * km])
}

fn target_index(sys: &BipartiteSystem, target: (usize, usize)) -> Result<usize> {
    let dims = sys.dims();
    if target.0 >= dims.d_c || target.1 >= dims.d_h {
        return Err(Error::InvalidParameter(format!("target {target:?} out of range")));
    }
    Ok(dims.index(target.0, target.1))
}

/// Outcome probabilities from exact evolution of system and probe.
pub fn probe_statistics(
    sys: &BipartiteSystem,
    u: &ComplexMatrix,
    target: (usize, usize),
    eps: f64,
) -> Result<ProbeOutcomeStats> {
    check_eps(eps)?;
    let n = sys.dims().joint();
    if u.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n} unitary"),
            found: format!("{}x{}", u.nrows(), u.ncols()),
        });
    }
    let k = target_index(sys, target)?;
    let a = ancilla(eps);
    let joint0 = kron(&sys.rho, &(&a * a.adjoint()));
    let v = coupling(n, k);
    let w = kron(u, &identity(2)) * v;
    let evolved = &w * joint0 * w.adjoint();
    let [plus, minus] = plus_minus();
    let prob = |f: usize, out: &ComplexMatrix| -> f64 {
        let proj = kron(&basis_projector(n, f), &(out * out.adjoint()));
        (proj * &evolved).trace().re
    };
    let fin = u * &sys.rho * u.adjoint();
    Ok(ProbeOutcomeStats {
        target,
        epsilon: eps,
        q_plus: (0..n).map(|f| prob(f, &plus)).collect(),
        q_minus: (0..n).map(|f| prob(f, &minus)).collect(),
        p_undisturbed: (0..n).map(|f| fin[(f, f)].re).collect(),
    })
}

/// `p^W_f = dq_f / (2 sin 2e) + p_f / 2`.
pub fn reconstruct_pw(stats: &ProbeOutcomeStats) -> Result<Vec<f64>> {
    let s = (2.0 * stats.epsilon).sin();
    if !(s > 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "sin(2 eps) = {s:e} too small for reconstruction"
        )));
    }
    Ok(stats
        .delta_q()
        .iter()
        .zip(&stats.p_undisturbed)
        .map(|(dq, pf)| dq / (2.0 * s) + pf / 2.0)
        .collect())
}

/// System state after the probe interaction, probe discarded.
pub fn post_probe_state(sys: &BipartiteSystem, target: (usize, usize), eps: f64) -> Result<ComplexMatrix> {
    let n = sys.dims().joint();
    let k = target_index(sys, target)?;
    let [kp, km] = probe_kraus(n, k, eps)?;
    Ok(&kp * &sys.rho * kp.adjoint() + &km * &sys.rho * km.adjoint())
}

/// `(1/2) ||rho' - rho||_1` for the probe disturbance.
pub fn probe_disturbance(sys: &BipartiteSystem, target: (usize, usize), eps: f64) -> Result<f64> {
    let after = post_probe_state(sys, target, eps)?;
    Ok(0.5 * trace_norm_hermitian(&(after - &sys.rho))?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledReconstruction {
    pub n_shots: u64,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Empirical frequencies of `(+, f)`, `(-, f)` and the undisturbed run.
    pub freq_plus: Vec<f64>,
    pub freq_minus: Vec<f64>,
    pub freq_undisturbed: Vec<f64>,
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let total: f64 = p.iter().map(|x| x.max(0.0)).sum();
    p.iter()
        .map(|x| {
            acc += x.max(0.0) / total;
            acc
        })
        .collect()
}

/// Counts for `shots` draws from `cdf`; the stream is a pure function of
/// `(seed, run, block)`, so the result does not depend on scheduling.
fn sample_counts(cdf: &[f64], shots: u64, seed: u64, run: u64, exec: Exec) -> Vec<u64> {
    let blocks = shots.div_ceil(SHOTS_PER_STREAM) as usize;
    let per_block = exec.map_range(blocks, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(run << 32 | b as u64);
        let start = b as u64 * SHOTS_PER_STREAM;
        let count = SHOTS_PER_STREAM.min(shots - start);
        let mut counts = vec![0u64; cdf.len()];
        for _ in 0..count {
            let r: f64 = rng.random();
            let k = cdf.partition_point(|&x| x <= r).min(cdf.len() - 1);
            counts[k] += 1;
        }
        counts
    });
    let mut total = vec![0u64; cdf.len()];
    for block in per_block {
        for (t, x) in total.iter_mut().zip(block) {
            *t += x;
        }
    }
    total
}

/// Finite-shot version of [`reconstruct_pw`]: `n_shots` probe runs and
/// `n_shots` undisturbed runs, deterministic in `seed`.
pub fn sampled_reconstruction(
    stats: &ProbeOutcomeStats,
    n_shots: u64,
    seed: u64,
    exec: Exec,
) -> Result<SampledReconstruction> {
    if n_shots == 0 {
        return Err(Error::InvalidParameter("n_shots must be >= 1".into()));
    }
    let s = (2.0 * stats.epsilon).sin();
    if !(s > 1e-9) {
        return Err(Error::InvalidParameter(format!("sin(2 eps) = {s:e} too small")));
    }
    let n = stats.p_undisturbed.len();
    let joint: Vec<f64> = stats.q_plus.iter().chain(&stats.q_minus).copied().collect();
    let probe_counts = sample_counts(&cumulative(&joint), n_shots, seed, 0, exec);
    let plain_counts = sample_counts(&cumulative(&stats.p_undisturbed), n_shots, seed, 1, exec);
    let nf = n_shots as f64;
    let freq_plus: Vec<f64> = probe_counts[..n].iter().map(|&k| k as f64 / nf).collect();
    let freq_minus: Vec<f64> = probe_counts[n..].iter().map(|&k| k as f64 / nf).collect();
    let freq_undisturbed: Vec<f64> = plain_counts.iter().map(|&k| k as f64 / nf).collect();
    let mut values = Vec::with_capacity(n);
    let mut stderr = Vec::with_capacity(n);
    for f in 0..n {
        let (qp, qm, pf) = (freq_plus[f], freq_minus[f], freq_undisturbed[f]);
        values.push((qp - qm) / (2.0 * s) + pf / 2.0);
        // X in {+1, -1, 0} per probe shot
        let var_x = qp + qm - (qp - qm).powi(2);
        let var = var_x / (4.0 * s * s * nf) + pf * (1.0 - pf) / (4.0 * nf);
        stderr.push(var.max(0.0).sqrt());
    }
    Ok(SampledReconstruction { n_shots, values, stderr, freq_plus, freq_minus, freq_undisturbed })
}
