//! Seeded random locally thermal instances with manifold coherences and
//! energy-preserving unitaries.
//!
//! Instance `k` of seed `s` is drawn from its own ChaCha stream, so any
//! subset of an ensemble can be regenerated independently and in any order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{qudit_energy_preserving, ManifoldRotation};
use crate::exec::Exec;
use crate::linalg::ComplexMatrix;
use crate::states::{qudit_from_populations, BipartiteSystem, EnergySpectrum, ManifoldCoherence};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub spectrum: EnergySpectrum,
    pub beta_c: f64,
    pub beta_h: f64,
    pub populations: Vec<f64>,
    pub coherences: Vec<ManifoldCoherence>,
    pub rotations: Vec<ManifoldRotation>,
    pub sys: BipartiteSystem,
    pub u: ComplexMatrix,
}

/// Knobs for the random draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub d: usize,
    /// Upper limit on manifold coherence strengths `eta`.
    pub eta_max: f64,
    /// Upper limit on rotation angles.
    pub theta_max: f64,
    /// Random phases on coherences and rotations.
    pub phases: bool,
}

impl EnsembleConfig {
    pub fn new(d: usize) -> Self {
        EnsembleConfig { d, eta_max: 1.0, theta_max: std::f64::consts::PI, phases: true }
    }
}

pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Ascending levels starting at 0 with all gaps distinct.
pub fn random_spectrum<R: Rng>(rng: &mut R, d: usize) -> EnergySpectrum {
    loop {
        let mut levels = vec![0.0];
        for _ in 1..d {
            let last = *levels.last().unwrap();
            levels.push(last + rng.random_range(0.3..1.5));
        }
        if let Ok(s) = EnergySpectrum::new(levels) {
            if d == 2 || s.gaps_separated_by(1e-3) {
                return s;
            }
        }
    }
}

/// Coupling of two marginals filled along a staircase after permuting
/// rows and columns; a vertex of the transport polytope.
fn corner_coupling<R: Rng>(rng: &mut R, a: &[f64], b: &[f64]) -> Vec<f64> {
    let (da, db) = (a.len(), b.len());
    let mut rows: Vec<usize> = (0..da).collect();
    let mut cols: Vec<usize> = (0..db).collect();
    rows.shuffle(rng);
    cols.shuffle(rng);
    let mut ra: Vec<f64> = a.to_vec();
    let mut rb: Vec<f64> = b.to_vec();
    let mut out = vec![0.0; da * db];
    let (mut i, mut j) = (0, 0);
    while i < da && j < db {
        let (r, c) = (rows[i], cols[j]);
        let m = ra[r].min(rb[c]);
        out[r * db + c] += m;
        ra[r] -= m;
        rb[c] -= m;
        if ra[r] <= rb[c] {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Joint populations with marginals `a` (C) and `b` (H): a random convex
/// mix of the product coupling (weight at least 5%) and corner couplings.
pub fn random_populations<R: Rng>(rng: &mut R, a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len() * b.len();
    let k = rng.random_range(1..=3);
    let mut weights: Vec<f64> = (0..=k).map(|_| rng.random::<f64>()).collect();
    weights[0] += 0.05 * weights.iter().sum::<f64>() / 0.95;
    let total: f64 = weights.iter().sum();
    let mut out = vec![0.0; n];
    for (i, x) in out.iter_mut().enumerate() {
        *x = weights[0] / total * a[i / b.len()] * b[i % b.len()];
    }
    for w in &weights[1..] {
        for (x, y) in out.iter_mut().zip(corner_coupling(rng, a, b)) {
            *x += w / total * y;
        }
    }
    out
}

/// One random instance; `beta_C > beta_H` always.
pub fn random_instance<R: Rng>(rng: &mut R, cfg: &EnsembleConfig) -> Instance {
    let d = cfg.d;
    let spectrum = random_spectrum(rng, d);
    let beta_h = rng.random_range(0.05..1.5);
    let beta_c = beta_h + rng.random_range(0.1..2.0);
    let pc = spectrum.gibbs_populations(beta_c);
    let ph = spectrum.gibbs_populations(beta_h);
    let populations = random_populations(rng, &pc, &ph);
    let mut coherences = Vec::new();
    let mut rotations = Vec::new();
    let phase = |rng: &mut R| if cfg.phases { rng.random_range(-std::f64::consts::PI..std::f64::consts::PI) } else { 0.0 };
    for n in 0..d {
        for m in n + 1..d {
            let eta = rng.random::<f64>() * cfg.eta_max;
            let xi = phase(rng);
            coherences.push(ManifoldCoherence { n, m, eta, xi });
            let theta = rng.random::<f64>() * cfg.theta_max;
            let (phi, lam, kappa) = (phase(rng), phase(rng), phase(rng));
            rotations.push(ManifoldRotation { n, m, theta, phi, lam, kappa });
        }
    }
    let sys = qudit_from_populations(&spectrum, beta_c, beta_h, &populations, &coherences)
        .expect("random populations satisfy the marginal constraints");
    let u = qudit_energy_preserving(&spectrum, &rotations)
        .expect("random spectrum has a nondegenerate Bohr spectrum")
        .matrix;
    Instance { spectrum, beta_c, beta_h, populations, coherences, rotations, sys, u }
}

/// Instance `index` of the ensemble identified by `seed`.
pub fn instance(seed: u64, index: u64, cfg: &EnsembleConfig) -> Instance {
    random_instance(&mut rng_for(seed, index), cfg)
}

/// Instances `0..count`, in index order.
pub fn ensemble(seed: u64, count: usize, cfg: &EnsembleConfig, exec: Exec) -> Vec<Instance> {
    exec.map_range(count, |k| instance(seed, k as u64, cfg))
}
