//! Named parameter families. Each scenario owns a set of `state.*` and
//! `unitary.*` keys with defaults and turns a resolved parameter set into
//! a state and a unitary.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::config::{Config, Value};
use crate::dynamics::{
    exchange_angle, experiment_unitary, perturbed_unitary, qudit_energy_preserving, two_qubit_unitary,
    ManifoldRotation,
};
use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix};
use crate::states::{
    default_free_indices, experiment_state, experiment_state_detuned, qudit_locally_thermal, two_qubit_state,
    two_qutrit_state, BipartiteSystem, EnergySpectrum, ManifoldCoherence, QutritStateParams, TwoQubitParams,
};

const HBAR: f64 = 1.054_571_817e-34;
const K_B: f64 = 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    ExperimentTime,
    QubitThetaEta,
    QutritThetaGrid,
    NonidealEpsDelta,
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::ExperimentTime,
        Scenario::QubitThetaEta,
        Scenario::QutritThetaGrid,
        Scenario::NonidealEpsDelta,
        Scenario::Custom,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::ExperimentTime => "experiment-time",
            Scenario::QubitThetaEta => "qubit-theta-eta",
            Scenario::QutritThetaGrid => "qutrit-theta-grid",
            Scenario::NonidealEpsDelta => "nonideal-eps-delta",
            Scenario::Custom => "custom",
        }
    }

    /// Fixed keys and defaults. `NaN` marks a default derived from other keys.
    fn defaults(&self) -> &'static [(&'static str, f64)] {
        match self {
            Scenario::ExperimentTime => &[
                ("state.beta_C", 1.13),
                ("state.beta_H", 0.9618),
                ("state.gamma", -0.19),
                ("state.gamma_im", 0.0),
                ("state.E", 1.0),
                ("unitary.J", 215.1),
                ("unitary.t", 0.0),
            ],
            Scenario::QubitThetaEta => &[
                ("state.beta_C", 1.13),
                ("state.beta_H", 0.962),
                ("state.E", 1.0),
                ("state.P00", f64::NAN),
                ("state.eta", 0.0),
                ("state.xi", 0.0),
                ("unitary.theta", 0.0),
                ("unitary.phi", 0.0),
                ("unitary.lam", 0.0),
                ("unitary.kappa", 0.0),
            ],
            Scenario::QutritThetaGrid => &[
                ("state.beta_C", 1.3),
                ("state.beta_H", 0.3),
                ("state.E1", 1.0),
                ("state.E2", 1.15),
                ("state.rho0", 0.3),
                ("state.rho5", 0.03),
                ("state.rho7", 0.07),
                ("state.rho8", 0.06),
                ("state.eta", 1.0),
                ("state.eta13", f64::NAN),
                ("state.eta26", f64::NAN),
                ("state.eta57", f64::NAN),
                ("state.xi13", 0.0),
                ("state.xi26", 0.0),
                ("state.xi57", 0.0),
                ("unitary.theta01", 0.0),
                ("unitary.theta02", 0.0),
                ("unitary.theta12", f64::NAN),
                ("unitary.phi", 0.0),
                ("unitary.lam", 0.0),
            ],
            Scenario::NonidealEpsDelta => &[
                ("state.omega_C", 1.2e3),
                ("state.T_C", 3.48e-8),
                ("state.T_H", 1.74e-7),
                ("state.gamma", -0.19),
                ("state.Delta", 0.0),
                ("unitary.J", 220.0),
                ("unitary.t", 4e-3),
                ("unitary.Jx", 0.0),
            ],
            Scenario::Custom => &[("state.beta_C", f64::NAN), ("state.beta_H", f64::NAN)],
        }
    }

    /// Extra per-point output columns.
    pub fn extra_columns(&self) -> &'static [&'static str] {
        match self {
            Scenario::ExperimentTime => &["t_over_period", "theta"],
            Scenario::NonidealEpsDelta => &["epsilon", "E_H"],
            _ => &[],
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario '{s}'")))
    }
}

/// A state, a unitary and whatever the scenario knows beyond them.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub sys: BipartiteSystem,
    pub u: ComplexMatrix,
    /// Distance to the energy-preserving reference, when there is one.
    pub epsilon: Option<f64>,
    pub extra: Vec<(&'static str, f64)>,
}

/// Scenario plus resolved numeric parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub params: BTreeMap<String, f64>,
    /// Custom scenario only.
    pub levels: Option<Vec<f64>>,
}

/// `name_<n>_<m>` with `n < m`.
fn manifold_key(rest: &str, names: &[&str]) -> Option<(String, usize, usize)> {
    let mut parts = rest.split('_');
    let name = parts.next()?;
    let n = parts.next()?.parse().ok()?;
    let m = parts.next()?.parse().ok()?;
    (parts.next().is_none() && names.contains(&name) && n < m).then(|| (name.to_string(), n, m))
}

impl ScenarioSpec {
    /// Reads `scenario` and every `state.*` / `unitary.*` key, rejecting
    /// keys the scenario does not know.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let scenario: Scenario = cfg
            .str("scenario")?
            .ok_or_else(|| Error::Config("missing key 'scenario'".into()))?
            .parse()?;
        let mut params: BTreeMap<String, f64> =
            scenario.defaults().iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let mut levels = None;
        for ns in ["state", "unitary"] {
            for (rest, value) in cfg.section(ns) {
                let key = format!("{ns}.{rest}");
                if scenario == Scenario::Custom && key == "state.levels" {
                    let s = match value {
                        Value::Str(s) => s,
                        v => return Err(Error::Config(format!("state.levels must be a list, got {v}"))),
                    };
                    let parsed: std::result::Result<Vec<f64>, _> =
                        s.split(',').map(|x| x.trim().parse::<f64>()).collect();
                    levels = Some(parsed.map_err(|e| Error::Config(format!("state.levels: {e}")))?);
                    continue;
                }
                let x = match value {
                    Value::Num(x) => *x,
                    v => return Err(Error::Config(format!("{key} must be a number, got {v}"))),
                };
                if !params.contains_key(&key) && !Self::dynamic_key_ok(scenario, &key) {
                    return Err(Error::Config(format!("unknown parameter '{key}' for scenario {scenario}")));
                }
                params.insert(key, x);
            }
        }
        if scenario == Scenario::Custom && levels.is_none() {
            return Err(Error::Config("custom scenario needs state.levels".into()));
        }
        let spec = ScenarioSpec { scenario, params, levels };
        spec.check_custom_ranges()?;
        Ok(spec)
    }

    fn dynamic_key_ok(scenario: Scenario, key: &str) -> bool {
        if scenario != Scenario::Custom {
            return false;
        }
        if let Some(rest) = key.strip_prefix("state.") {
            if let Some(k) = rest.strip_prefix("rho") {
                return k.parse::<usize>().is_ok();
            }
            return manifold_key(rest, &["eta", "xi"]).is_some();
        }
        if let Some(rest) = key.strip_prefix("unitary.") {
            return manifold_key(rest, &["theta", "phi", "lam", "kappa"]).is_some();
        }
        false
    }

    fn check_custom_ranges(&self) -> Result<()> {
        let Some(levels) = &self.levels else { return Ok(()) };
        let d = levels.len();
        for key in self.params.keys() {
            let rest = key.split_once('.').map(|x| x.1).unwrap_or("");
            if let Some(k) = rest.strip_prefix("rho").and_then(|k| k.parse::<usize>().ok()) {
                if !default_free_indices(d).contains(&k) {
                    return Err(Error::Config(format!(
                        "{key}: free populations are rho<i*d+j> with i, j >= 1 (d = {d})"
                    )));
                }
            } else if let Some((_, _, m)) = manifold_key(rest, &["eta", "xi", "theta", "phi", "lam", "kappa"]) {
                if m >= d {
                    return Err(Error::Config(format!("{key}: level index out of range for d = {d}")));
                }
            }
        }
        Ok(())
    }

    /// True if `name` can be swept.
    pub fn has_param(&self, name: &str) -> bool {
        self.params.contains_key(name) || Self::dynamic_key_ok(self.scenario, name)
    }

    fn get(p: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
        match p.get(key) {
            Some(x) if !x.is_nan() => Ok(*x),
            _ => Err(Error::Config(format!("parameter {key} is required"))),
        }
    }

    /// Builds the point with `overrides` (axis values) applied on top.
    pub fn build(&self, overrides: &[(&str, f64)]) -> Result<Point> {
        let mut p = self.params.clone();
        for (k, v) in overrides {
            p.insert(k.to_string(), *v);
        }
        let g = |k: &str| Self::get(&p, k);
        let or = |k: &str, fallback: f64| -> f64 { p.get(k).copied().filter(|x| !x.is_nan()).unwrap_or(fallback) };
        match self.scenario {
            Scenario::ExperimentTime => {
                let (bc, bh, e) = (g("state.beta_C")?, g("state.beta_H")?, g("state.E")?);
                let sys = experiment_state(c(g("state.gamma")?, g("state.gamma_im")?), bc, bh, e)?;
                let (j, t) = (g("unitary.J")?, g("unitary.t")?);
                let u = experiment_unitary(j, t)?.matrix;
                let theta = exchange_angle(&u);
                Ok(Point { sys, u, epsilon: None, extra: vec![("t_over_period", j * t), ("theta", theta)] })
            }
            Scenario::QubitThetaEta => {
                let (bc, bh, e) = (g("state.beta_C")?, g("state.beta_H")?, g("state.E")?);
                let params = TwoQubitParams {
                    beta_c: bc,
                    beta_h: bh,
                    e,
                    p00: or("state.P00", TwoQubitParams::product_p00(bc, bh, e)),
                    eta: g("state.eta")?,
                    xi: g("state.xi")?,
                };
                let sys = two_qubit_state(&params)?;
                let u = two_qubit_unitary(g("unitary.theta")?, g("unitary.kappa")?, g("unitary.lam")?, g("unitary.phi")?)
                    .matrix;
                Ok(Point { sys, u, epsilon: None, extra: Vec::new() })
            }
            Scenario::QutritThetaGrid => {
                let eta = g("state.eta")?;
                let params = QutritStateParams {
                    beta_c: g("state.beta_C")?,
                    beta_h: g("state.beta_H")?,
                    e1: g("state.E1")?,
                    e2: g("state.E2")?,
                    rho0: g("state.rho0")?,
                    rho5: g("state.rho5")?,
                    rho7: g("state.rho7")?,
                    rho8: g("state.rho8")?,
                    eta13: or("state.eta13", eta),
                    eta26: or("state.eta26", eta),
                    eta57: or("state.eta57", eta),
                    xi13: g("state.xi13")?,
                    xi26: g("state.xi26")?,
                    xi57: g("state.xi57")?,
                };
                let sys = two_qutrit_state(&params)?;
                let (phi, lam) = (g("unitary.phi")?, g("unitary.lam")?);
                let t02 = g("unitary.theta02")?;
                let rot = |n, m, theta| ManifoldRotation { n, m, theta, phi, lam, kappa: 0.0 };
                let rots = [
                    rot(0, 1, g("unitary.theta01")?),
                    rot(0, 2, t02),
                    rot(1, 2, or("unitary.theta12", t02)),
                ];
                let u = qudit_energy_preserving(&params.spectrum()?, &rots)?.matrix;
                Ok(Point { sys, u, epsilon: None, extra: Vec::new() })
            }
            Scenario::NonidealEpsDelta => {
                // energies in units of hbar omega_C
                let unit = HBAR * g("state.omega_C")?;
                let (bc, bh) = (unit / (K_B * g("state.T_C")?), unit / (K_B * g("state.T_H")?));
                let delta = g("state.Delta")?;
                if !(delta > -1.0 && delta < 1.0) {
                    return Err(Error::InvalidParameter(format!("Delta = {delta} outside (-1, 1)")));
                }
                let e_h = (1.0 + delta) / (1.0 - delta);
                let sys = experiment_state_detuned(c(g("state.gamma")?, 0.0), bc, bh, 1.0, e_h)?;
                let r = perturbed_unitary(g("unitary.J")?, g("unitary.Jx")?, g("unitary.t")?, &sys.total_hamiltonian())?;
                let eps = r.epsilon.unwrap_or(0.0);
                Ok(Point { sys, u: r.matrix, epsilon: Some(eps), extra: vec![("epsilon", eps), ("E_H", e_h)] })
            }
            Scenario::Custom => self.build_custom(&p),
        }
    }

    fn build_custom(&self, p: &BTreeMap<String, f64>) -> Result<Point> {
        let spectrum = EnergySpectrum::new(self.levels.clone().unwrap_or_default())?;
        let d = spectrum.dim();
        let (bc, bh) = (Self::get(p, "state.beta_C")?, Self::get(p, "state.beta_H")?);
        let (pc, ph) = (spectrum.gibbs_populations(bc), spectrum.gibbs_populations(bh));
        let free: Vec<(usize, f64)> = default_free_indices(d)
            .into_iter()
            .map(|k| (k, p.get(&format!("state.rho{k}")).copied().unwrap_or(pc[k / d] * ph[k % d])))
            .collect();
        let val = |name: &str, n: usize, m: usize| p.get(&format!("{name}_{n}_{m}")).copied().unwrap_or(0.0);
        let mut cohs = Vec::new();
        let mut rots = Vec::new();
        for n in 0..d {
            for m in n + 1..d {
                cohs.push(ManifoldCoherence { n, m, eta: val("state.eta", n, m), xi: val("state.xi", n, m) });
                rots.push(ManifoldRotation {
                    n,
                    m,
                    theta: val("unitary.theta", n, m),
                    phi: val("unitary.phi", n, m),
                    lam: val("unitary.lam", n, m),
                    kappa: val("unitary.kappa", n, m),
                });
            }
        }
        let sys = qudit_locally_thermal(&spectrum, bc, bh, &free, &cohs)?;
        let u = qudit_energy_preserving(&spectrum, &rots)?.matrix;
        Ok(Point { sys, u, epsilon: None, extra: Vec::new() })
    }
}
