//! Parameter sweeps over one or two axes, and single-point runs, driven by
//! a [`Config`].

use std::fmt::Write as _;

use crate::analysis::{analyze, PointReport, ProbeRequest};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fluctuations::fmt_f64;
use crate::scenario::{Point, ScenarioSpec};
use crate::witnesses::InequalityId;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Columns every scenario provides, in default output order.
pub const BASE_COLUMNS: [&str; 16] = [
    "Q",
    "Q_tpm",
    "Q_back",
    "Q_direct",
    "min_pw",
    "negativity",
    "min_pt_eig",
    "T1",
    "T2",
    "T2_direct",
    "T2_back",
    "T3",
    "T4_lower",
    "T4_upper",
    "I4",
    "strong_backflow",
];

const PROBE_KEYS: [&str; 5] = ["target_C", "target_H", "epsilon", "shots", "seed"];

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    /// Evenly spaced points including both ends.
    pub fn values(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.n - 1) as f64;
        (0..self.n)
            .map(|k| if k == self.n - 1 { self.max } else { self.min + step * k as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scenario: ScenarioSpec,
    pub axes: Vec<Axis>,
    pub columns: Vec<String>,
    /// Resolved configuration for the metadata block.
    pub config: Config,
}

/// Rejects keys outside the known namespaces.
fn check_top_level_keys(cfg: &Config) -> Result<()> {
    for key in cfg.keys() {
        let ok = key == "scenario"
            || key.starts_with("state.")
            || key.starts_with("unitary.")
            || key == "output.columns"
            || key
                .strip_prefix("probe.")
                .is_some_and(|k| PROBE_KEYS.contains(&k))
            || ["sweep.axis1.", "sweep.axis2."].iter().any(|p| {
                key.strip_prefix(p)
                    .is_some_and(|k| ["name", "min", "max", "n"].contains(&k))
            });
        if !ok {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
    }
    Ok(())
}

fn parse_axis(cfg: &Config, idx: usize, scenario: &ScenarioSpec) -> Result<Option<Axis>> {
    let p = format!("sweep.axis{idx}");
    let name = cfg.str(&format!("{p}.name"))?;
    let Some(name) = name else {
        if cfg.keys().any(|k| k.starts_with(&format!("{p}."))) {
            return Err(Error::Config(format!("{p}.name is required")));
        }
        return Ok(None);
    };
    if !scenario.has_param(name) {
        return Err(Error::Config(format!(
            "axis {name} is not a parameter of scenario {}",
            scenario.scenario
        )));
    }
    let need = |k: &str| -> Result<f64> {
        cfg.num(&format!("{p}.{k}"))?
            .ok_or_else(|| Error::Config(format!("{p}.{k} is required")))
    };
    let (min, max, n) = (need("min")?, need("max")?, need("n")?);
    if !(min.is_finite() && max.is_finite()) {
        return Err(Error::Config(format!("{p}: range must be finite")));
    }
    if n.fract() != 0.0 || n < 2.0 {
        return Err(Error::Config(format!("{p}.n must be an integer >= 2")));
    }
    Ok(Some(Axis { name: name.to_string(), min, max, n: n as usize }))
}

impl SweepSpec {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        check_top_level_keys(cfg)?;
        let scenario = ScenarioSpec::from_config(cfg)?;
        let mut axes = Vec::new();
        for i in 1..=2 {
            if let Some(a) = parse_axis(cfg, i, &scenario)? {
                axes.push(a);
            }
        }
        if axes.is_empty() {
            return Err(Error::Config("a sweep needs sweep.axis1".into()));
        }
        if axes.len() == 2 && axes[0].name == axes[1].name {
            return Err(Error::Config("the two axes must differ".into()));
        }
        let available = available_columns(&scenario);
        let columns = match cfg.str("output.columns")? {
            None => available.clone(),
            Some(list) => {
                let cols: Vec<String> = list.split(',').map(|s| s.trim().to_string()).collect();
                for c in &cols {
                    if !available.contains(c) {
                        return Err(Error::Config(format!("unknown output column '{c}'")));
                    }
                }
                cols
            }
        };
        Ok(SweepSpec { scenario, axes, columns, config: cfg.clone() })
    }

    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    /// Axis values of cell `k`; the last axis varies fastest.
    pub fn coords(&self, k: usize) -> Vec<f64> {
        let mut rem = k;
        let mut out = vec![0.0; self.axes.len()];
        for (i, a) in self.axes.iter().enumerate().rev() {
            out[i] = a.values()[rem % a.n];
            rem /= a.n;
        }
        out
    }
}

pub fn available_columns(spec: &ScenarioSpec) -> Vec<String> {
    BASE_COLUMNS
        .iter()
        .chain(spec.scenario.extra_columns())
        .map(|s| s.to_string())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    /// Verdict code or flag.
    Code(i32),
    Missing,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Code(c) => Some(*c as f64),
            Cell::Missing => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Code(c) => c.to_string(),
            Cell::Missing => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coords: Vec<f64>,
    /// `ok` or `infeasible:<reason>`.
    pub status: String,
    pub cells: Vec<Cell>,
}

impl Row {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<Row>,
    pub infeasible: usize,
    pub timestamp: String,
}

fn verdict_code(r: &PointReport, ids: &[InequalityId]) -> Cell {
    ids.iter()
        .find_map(|id| r.verdict(*id))
        .map_or(Cell::Missing, |v| Cell::Code(v.code()))
}

/// Value of `column` for an analysed point.
pub fn column_value(column: &str, point: &Point, r: &PointReport) -> Cell {
    use InequalityId::*;
    match column {
        "Q" => Cell::Num(r.heat.q),
        "Q_tpm" => r.heat.q_tpm.map_or(Cell::Missing, Cell::Num),
        "Q_back" => Cell::Num(r.heat.q_back),
        "Q_direct" => Cell::Num(r.heat.q_direct),
        "min_pw" => Cell::Num(r.mh.min()),
        "negativity" => Cell::Code(r.negativity() as i32),
        "min_pt_eig" => Cell::Num(r.min_pt_eig),
        "T1" => verdict_code(r, &[T1]),
        "T2" => verdict_code(r, &[T2]),
        "T2_direct" => verdict_code(r, &[T2Direct]),
        "T2_back" => verdict_code(r, &[T2Back]),
        "T3" => verdict_code(r, &[T3, T3Nonideal]),
        "T4_lower" => verdict_code(r, &[T4Lower]),
        "T4_upper" => verdict_code(r, &[T4Upper]),
        "I4" => verdict_code(r, &[I4]),
        "strong_backflow" => verdict_code(r, &[StrongBackflow]),
        other => point
            .extra
            .iter()
            .find(|(k, _)| *k == other)
            .map_or(Cell::Missing, |(_, v)| Cell::Num(*v)),
    }
}

fn evaluate_cell(spec: &SweepSpec, k: usize) -> Row {
    let coords = spec.coords(k);
    let overrides: Vec<(&str, f64)> = spec.axes.iter().map(|a| a.name.as_str()).zip(coords.iter().copied()).collect();
    let outcome = spec
        .scenario
        .build(&overrides)
        .and_then(|pt| analyze(&pt.sys, &pt.u, pt.epsilon, None, Exec::Sequential).map(|r| (pt, r)));
    match outcome {
        Ok((pt, r)) => Row {
            coords,
            status: "ok".into(),
            cells: spec.columns.iter().map(|c| column_value(c, &pt, &r)).collect(),
        },
        Err(e) => Row {
            coords,
            status: format!("infeasible:{}", e.to_string().replace([',', '\n', '"'], ";")),
            cells: vec![Cell::Missing; spec.columns.len()],
        },
    }
}

/// Evaluates every grid cell. Rows come back in grid order whatever `exec` is.
pub fn run_sweep(spec: &SweepSpec, exec: Exec) -> SweepResult {
    let rows = exec.map_range(spec.cell_count(), |k| evaluate_cell(spec, k));
    let infeasible = rows.iter().filter(|r| !r.ok()).count();
    SweepResult {
        spec: spec.clone(),
        rows,
        infeasible,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    }
}

impl SweepResult {
    /// Values of `column` in row order; `None` where missing.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.spec.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.cells[idx].as_f64()).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let spec = &self.spec;
        let _ = writeln!(s, "# quasiheat {VERSION}");
        let _ = writeln!(s, "# timestamp = {}", self.timestamp);
        let _ = writeln!(s, "# scenario = {}", spec.scenario.scenario);
        let _ = writeln!(s, "# cells = {}", self.rows.len());
        let _ = writeln!(s, "# infeasible = {}", self.infeasible);
        for (k, v) in &spec.scenario.params {
            let shown = if v.is_nan() { "derived".to_string() } else { format!("{v:?}") };
            let _ = writeln!(s, "# {k} = {shown}");
        }
        if let Some(levels) = &spec.scenario.levels {
            let _ = writeln!(s, "# state.levels = {levels:?}");
        }
        for line in spec.config.to_lines() {
            if line.starts_with("sweep.") || line.starts_with("output.") {
                let _ = writeln!(s, "# {line}");
            }
        }
        let mut header: Vec<&str> = spec.axes.iter().map(|a| a.name.as_str()).collect();
        header.push("status");
        header.extend(spec.columns.iter().map(String::as_str));
        let _ = writeln!(s, "{}", header.join(","));
        for row in &self.rows {
            let mut fields: Vec<String> = row.coords.iter().map(|x| fmt_f64(*x)).collect();
            fields.push(row.status.clone());
            fields.extend(row.cells.iter().map(Cell::render));
            let _ = writeln!(s, "{}", fields.join(","));
        }
        s
    }
}

/// Optional probe request from `probe.*` keys.
pub fn probe_request(cfg: &Config) -> Result<Option<ProbeRequest>> {
    if !cfg.keys().any(|k| k.starts_with("probe.")) {
        return Ok(None);
    }
    let int = |k: &str, default: f64| -> Result<u64> {
        let x = cfg.num(&format!("probe.{k}"))?.unwrap_or(default);
        if x < 0.0 || x.fract() != 0.0 || x > u64::MAX as f64 {
            return Err(Error::Config(format!("probe.{k} must be a nonnegative integer")));
        }
        Ok(x as u64)
    };
    Ok(Some(ProbeRequest {
        target: (int("target_C", 0.0)? as usize, int("target_H", 0.0)? as usize),
        epsilon: cfg.num("probe.epsilon")?.unwrap_or(std::f64::consts::FRAC_PI_4),
        shots: int("shots", 0.0)?,
        seed: int("seed", 0.0)?,
    }))
}

/// Builds and analyses the single point described by `cfg` (no axes).
pub fn run_point(cfg: &Config, exec: Exec) -> Result<PointReport> {
    check_top_level_keys(cfg)?;
    if cfg.keys().any(|k| k.starts_with("sweep.")) {
        return Err(Error::Config("sweep.* keys are not allowed for a single point".into()));
    }
    let spec = ScenarioSpec::from_config(cfg)?;
    let probe = probe_request(cfg)?;
    let pt = spec.build(&[])?;
    let d = pt.sys.dims();
    if let Some(p) = &probe {
        if p.target.0 >= d.d_c || p.target.1 >= d.d_h {
            return Err(Error::Config(format!("probe target {:?} out of range", p.target)));
        }
    }
    analyze(&pt.sys, &pt.u, pt.epsilon, probe.as_ref(), exec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(text: &str) -> Result<SweepSpec> {
        SweepSpec::from_config(&Config::parse(text)?)
    }

    const QUBIT: &str = "scenario = \"qubit-theta-eta\"\nstate.P00 = 0.547\n\
        sweep.axis1.name = \"unitary.theta\"\nsweep.axis1.min = 0\nsweep.axis1.max = 1.5\nsweep.axis1.n = 4\n\
        sweep.axis2.name = \"state.eta\"\nsweep.axis2.min = -0.2\nsweep.axis2.max = 0.2\nsweep.axis2.n = 3\n";

    #[test]
    fn grid_order_and_row_count() {
        let s = spec(QUBIT).unwrap();
        assert_eq!(s.cell_count(), 12);
        assert_eq!(s.coords(0), vec![0.0, -0.2]);
        assert_eq!(s.coords(1), vec![0.0, 0.0]);
        assert_eq!(s.coords(11), vec![1.5, 0.2]);
        let r = run_sweep(&s, Exec::Parallel);
        assert_eq!(r.rows.len(), 12);
    }

    #[test]
    fn sequential_and_parallel_csv_agree() {
        let s = spec(QUBIT).unwrap();
        let strip = |t: String| t.lines().filter(|l| !l.starts_with("# timestamp")).collect::<Vec<_>>().join("\n");
        assert_eq!(strip(run_sweep(&s, Exec::Sequential).to_csv()), strip(run_sweep(&s, Exec::Parallel).to_csv()));
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(spec("scenario = \"qubit-theta-eta\"\n").is_err());
        assert!(spec(&QUBIT.replace("axis2.n = 3", "axis2.n = 1")).is_err());
        assert!(spec(&QUBIT.replace("axis2.n = 3", "axis2.n = 2.5")).is_err());
        assert!(spec(&QUBIT.replace("\"state.eta\"", "\"state.zeta\"")).is_err());
        assert!(spec(&format!("{QUBIT}output.columns = \"Q,nope\"\n")).is_err());
        assert!(spec(&format!("{QUBIT}sweep.axis3.n = 2\n")).is_err());
    }

    #[test]
    fn infeasible_cells_are_kept() {
        let text = QUBIT.replace("min = -0.2", "min = -0.9");
        let r = run_sweep(&spec(&text).unwrap(), Exec::Sequential);
        assert_eq!(r.rows.len(), 12);
        assert!(r.infeasible > 0);
        assert!(r.rows.iter().any(|x| x.status.starts_with("infeasible:")));
        let csv = r.to_csv();
        assert!(csv.contains(&format!("# infeasible = {}", r.infeasible)));
    }

    #[test]
    fn selected_columns_only() {
        let r = run_sweep(&spec(&format!("{QUBIT}output.columns = [\"Q\", \"T1\"]\n")).unwrap(), Exec::Sequential);
        let header = r.to_csv().lines().find(|l| !l.starts_with('#')).unwrap().to_string();
        assert_eq!(header, "unitary.theta,state.eta,status,Q,T1");
        assert!(r.column("Q_tpm").is_none());
    }
}
