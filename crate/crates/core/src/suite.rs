//! Seeded property suite over random instances. The Margenau-Hill
//! implementation is a parameter so that a deliberately broken one can be
//! shown to fail.

use std::fmt::Write as _;

use rand::Rng;

use crate::analysis::analyze;
use crate::dynamics::commutator_norm;
use crate::ensemble::{instance, rng_for, EnsembleConfig, Instance};
use crate::error::Result;
use crate::exec::Exec;
use crate::fluctuations::{
    chi_bar, heat_direct, heat_from_table, j_term, qudit_closed_form_pw, tpm_distribution,
    xft_lhs, MhFn, TransitionTable, MH_LOWER_BOUND, NEGLIGIBLE,
};
use crate::linalg::ComplexMatrix;
use crate::probe::{probe_statistics, reconstruct_pw};
use crate::states::{dephase_local, BipartiteSystem};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_190_402;

/// Offset separating the auxiliary random stream from instance streams.
const AUX_STREAM: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub tolerance: f64,
    pub passed: usize,
    pub failed: usize,
    /// Skipped because the property does not apply to the instance.
    pub vacuous: usize,
    pub worst: f64,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub seed: u64,
    pub trials: usize,
    pub properties: Vec<PropertyOutcome>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.failed == 0)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyOutcome> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn render(&self) -> String {
        let mut s = format!("seed {} trials {}\n", self.seed, self.trials);
        for p in &self.properties {
            let status = if p.failed == 0 { "PASS" } else { "FAIL" };
            let _ = writeln!(
                s,
                "{status} {:<22} passed {:>5} failed {:>5} vacuous {:>5} worst {:.3e} (tol {:.0e})",
                p.name, p.passed, p.failed, p.vacuous, p.worst, p.tolerance
            );
            if let Some(f) = &p.first_failure {
                let _ = writeln!(s, "     first failure: {f}");
            }
        }
        s
    }
}

/// A check yields a deviation to compare with the tolerance, or `None`
/// when it does not apply.
type Check = fn(&Trial) -> Result<Option<f64>>;

struct Trial {
    inst: Instance,
    mh: TransitionTable,
    tpm: TransitionTable,
    probe_target: (usize, usize),
    probe_eps: f64,
}

const PROPERTIES: [(&str, f64, Check); 12] = [
    ("mh-normalization", 1e-10, |t| Ok(Some((t.mh.sum() - 1.0).abs()))),
    ("mh-lower-bound", 1e-10, |t| Ok(Some((MH_LOWER_BOUND - t.mh.min()).max(0.0)))),
    ("marginal-initial", 1e-10, |t| {
        let rho = &t.inst.sys.rho;
        Ok(Some(
            t.mh.initial_marginal()
                .iter()
                .enumerate()
                .map(|(k, v)| (v - rho[(k, k)].re).abs())
                .fold(0.0, f64::max),
        ))
    }),
    ("marginal-final", 1e-10, |t| {
        let fin = &t.inst.u * &t.inst.sys.rho * t.inst.u.adjoint();
        Ok(Some(
            t.mh.final_marginal()
                .iter()
                .enumerate()
                .map(|(k, v)| (v - fin[(k, k)].re).abs())
                .fold(0.0, f64::max),
        ))
    }),
    ("tpm-is-distribution", 1e-12, |t| {
        Ok(Some((t.tpm.sum() - 1.0).abs().max(-t.tpm.min()).max(0.0)))
    }),
    ("heat-consistency", 1e-12, |t| {
        Ok(Some((heat_from_table(&t.mh) - heat_direct(&t.inst.sys, &t.inst.u)).abs()))
    }),
    ("xft-identity", 1e-8, |t| {
        let lhs = xft_lhs(&t.mh, &t.inst.sys)?.lhs;
        Ok(Some((lhs - 1.0 - chi_bar(&t.inst.sys, &t.inst.u)?).abs()))
    }),
    ("closed-form", 1e-12, |t| {
        let i = &t.inst;
        let cf = qudit_closed_form_pw(&i.spectrum, &i.populations, &i.coherences, &i.rotations)?;
        let mut dev = (cf.q() - heat_from_table(&t.mh)).abs();
        for e in &cf.entries {
            dev = dev.max((e.pw - t.mh.at(e.from, e.to)).abs());
            dev = dev.max((e.ptpm - t.tpm.at(e.from, e.to)).abs());
        }
        Ok(Some(dev))
    }),
    ("energy-preservation", 1e-10, |t| {
        Ok(Some(commutator_norm(&t.inst.u, &t.inst.sys.total_hamiltonian())?))
    }),
    ("dephased-is-tpm", 1e-12, |t| {
        let sys = dephase_local(&t.inst.sys);
        let deph = crate::fluctuations::mh_distribution(&sys, &t.inst.u)?;
        Ok(Some(deph.values().iter().zip(t.tpm.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)))
    }),
    ("correlation-bound", 1e-12, |t| {
        let j = j_term(&t.inst.sys, &t.inst.u)?;
        Ok(Some((j.j.abs() - j.bound()).max(0.0)))
    }),
    ("probe-exactness", 1e-10, |t| {
        let (sys, u) = (&t.inst.sys, &t.inst.u);
        let stats = probe_statistics(sys, u, t.probe_target, t.probe_eps)?;
        let row = sys.dims().index(t.probe_target.0, t.probe_target.1);
        let mh = crate::fluctuations::mh_distribution(sys, u)?;
        Ok(Some(
            reconstruct_pw(&stats)?
                .iter()
                .enumerate()
                .map(|(f, x)| (x - mh.at(row, f)).abs())
                .fold(0.0, f64::max),
        ))
    }),
];

const SOUNDNESS: &str = "witness-soundness";

/// Soundness: with a nonnegative table no inequality may fire. Returns
/// `None` for tables with negative entries.
fn soundness(t: &Trial) -> Result<Option<f64>> {
    if t.mh.min() < -NEGLIGIBLE {
        return Ok(None);
    }
    let r = analyze(&t.inst.sys, &t.inst.u, None, None, Exec::Sequential)?;
    Ok(Some(if r.any_violation() { 1.0 } else { 0.0 }))
}

fn make_trial(seed: u64, k: usize, mh_fn: MhFn) -> Result<Trial> {
    let d = 2 + k % 2;
    let mut cfg = EnsembleConfig::new(d);
    // smaller coherences keep many tables nonnegative for the soundness check
    if k % 4 >= 2 {
        cfg.eta_max = 0.3;
    }
    let inst = instance(seed, k as u64, &cfg);
    let mh = mh_fn(&inst.sys, &inst.u)?;
    let tpm = tpm_distribution(&inst.sys, &inst.u)?;
    let mut rng = rng_for(seed, AUX_STREAM + k as u64);
    let probe_target = (rng.random_range(0..d), rng.random_range(0..d));
    let probe_eps = rng.random_range(0.05..std::f64::consts::FRAC_PI_2 - 0.05);
    Ok(Trial { inst, mh, tpm, probe_target, probe_eps })
}

/// Runs every property on `trials` instances (alternating `d = 2, 3`).
/// Deterministic in `seed` and independent of `exec`.
pub fn run_property_suite(seed: u64, trials: usize, mh_fn: MhFn, exec: Exec) -> SuiteReport {
    let per_trial: Vec<Vec<std::result::Result<Option<f64>, String>>> = exec.map_range(trials, |k| {
        let trial = match make_trial(seed, k, mh_fn) {
            Ok(t) => t,
            Err(e) => return vec![Err(e.to_string()); PROPERTIES.len() + 1],
        };
        let mut out: Vec<_> = PROPERTIES.iter().map(|(_, _, f)| f(&trial).map_err(|e| e.to_string())).collect();
        out.push(soundness(&trial).map_err(|e| e.to_string()));
        out
    });
    let names = PROPERTIES.iter().map(|(n, tol, _)| (*n, *tol)).chain([(SOUNDNESS, 0.5)]);
    let properties = names
        .enumerate()
        .map(|(p, (name, tolerance))| {
            let mut o = PropertyOutcome {
                name,
                tolerance,
                passed: 0,
                failed: 0,
                vacuous: 0,
                worst: 0.0,
                first_failure: None,
            };
            for (k, res) in per_trial.iter().enumerate() {
                match &res[p] {
                    Ok(None) => o.vacuous += 1,
                    Ok(Some(dev)) if *dev <= tolerance => {
                        o.passed += 1;
                        o.worst = o.worst.max(*dev);
                    }
                    Ok(Some(dev)) => {
                        o.failed += 1;
                        o.worst = if dev.is_nan() { f64::NAN } else { o.worst.max(*dev) };
                        o.first_failure.get_or_insert_with(|| format!("trial {k}: deviation {dev:e}"));
                    }
                    Err(e) => {
                        o.failed += 1;
                        o.first_failure.get_or_insert_with(|| format!("trial {k}: {e}"));
                    }
                }
            }
            o
        })
        .collect();
    SuiteReport { seed, trials, properties }
}

/// Broken Margenau-Hill: the sign of every coherence is flipped before
/// the table is formed.
pub fn mh_sign_flip_mutant(sys: &BipartiteSystem, u: &ComplexMatrix) -> Result<TransitionTable> {
    let mut flipped = sys.clone();
    let n = sys.rho.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                flipped.rho[(i, j)] = -sys.rho[(i, j)];
            }
        }
    }
    crate::fluctuations::mh_distribution(&flipped, u)
}
