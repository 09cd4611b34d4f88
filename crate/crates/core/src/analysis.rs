//! Everything that can be said about one state and one unitary.

use std::fmt::Write as _;

use crate::error::Result;
use crate::exec::Exec;
use crate::fluctuations::{
    delta_q_max, fmt_f64, heat_from_table, heat_report, marginal_check, mh_distribution, tpm_distribution,
    xft_lhs_with_mismatch, xft_report, HeatReport, JReport, TransitionTable, XftReport, NEGLIGIBLE,
};
use crate::fluctuations::j_term;
use crate::linalg::ComplexMatrix;
use crate::probe::{probe_statistics, reconstruct_pw, sampled_reconstruction, SampledReconstruction};
use crate::states::{min_pt_eigenvalue, BipartiteSystem};
use crate::witnesses::{
    inequality_i4, inequality_t1, inequality_t2, inequality_t3, inequality_t4, strong_backflow, InequalityId,
    WitnessVerdict,
};

/// Equal qubit gaps closer than this count as resonant for the two-qubit bound.
const GAP_MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRequest {
    pub target: (usize, usize),
    pub epsilon: f64,
    /// `0` skips sampling.
    pub shots: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub request: ProbeRequest,
    pub exact: Vec<f64>,
    pub sampled: Option<SampledReconstruction>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub sys: BipartiteSystem,
    pub u: ComplexMatrix,
    pub epsilon: Option<f64>,
    pub tpm: TransitionTable,
    pub mh: TransitionTable,
    pub marginal_deviation: f64,
    pub heat: HeatReport,
    pub xft: Option<XftReport>,
    pub j: Option<JReport>,
    pub verdicts: Vec<WitnessVerdict>,
    /// Inequalities that could not be evaluated, with the reason.
    pub skipped: Vec<(InequalityId, String)>,
    pub min_pt_eig: f64,
    pub delta_q_max: Option<f64>,
    pub probe: Option<ProbeReport>,
}

impl PointReport {
    pub fn negativity(&self) -> bool {
        self.mh.min() < -NEGLIGIBLE
    }

    pub fn verdict(&self, id: InequalityId) -> Option<&WitnessVerdict> {
        self.verdicts.iter().find(|v| v.id == id)
    }

    pub fn any_violation(&self) -> bool {
        self.verdicts.iter().any(|v| v.violated)
    }
}

fn betas(sys: &BipartiteSystem) -> Option<(f64, f64)> {
    Some((sys.beta_c?, sys.beta_h?))
}

/// Evaluates distributions, heat, XFT, correlations and every applicable
/// inequality. `epsilon` is the distance to an energy-preserving unitary
/// when `u` is not one.
pub fn analyze(
    sys: &BipartiteSystem,
    u: &ComplexMatrix,
    epsilon: Option<f64>,
    probe: Option<&ProbeRequest>,
    exec: Exec,
) -> Result<PointReport> {
    sys.validate()?;
    let tpm = tpm_distribution(sys, u)?;
    let mh = mh_distribution(sys, u)?;
    let marginal_deviation = marginal_check(&mh, sys, u);
    let heat = heat_report(sys, u)?;
    let q = heat.q;
    let q_tpm = heat_from_table(&tpm);
    let dims = sys.dims();
    let mut verdicts = Vec::new();
    let mut skipped = Vec::new();
    let mut xft = None;
    let mut j = None;

    if let Some((bc, bh)) = betas(sys) {
        let eps = epsilon.unwrap_or(0.0);
        if dims.d_c == 2 && dims.d_h == 2 {
            let (e_c, e_h) = (sys.spectrum_c.energy(1), sys.spectrum_h.energy(1));
            if (e_c - e_h).abs() <= GAP_MATCH_TOL && eps == 0.0 {
                match inequality_t1(q, q_tpm, bc, bh, e_c) {
                    Ok(v) => verdicts.push(v),
                    Err(e) => skipped.push((InequalityId::T1, e.to_string())),
                }
            } else {
                skipped.push((InequalityId::T1, "needs resonant gaps and an energy-preserving unitary".into()));
            }
            match inequality_t2(q, q_tpm, bc, bh, e_c, e_h, eps) {
                Ok(t2) => verdicts.extend([t2.symmetric, t2.direct, t2.back]),
                Err(e) => skipped.push((InequalityId::T2, e.to_string())),
            }
        }

        match xft_report(sys, u) {
            Ok(x) => {
                match inequality_t3(q, &x, bc, bh, None) {
                    Ok(v) => verdicts.push(v),
                    Err(e) => skipped.push((InequalityId::T3, e.to_string())),
                }
                xft = Some(x);
            }
            Err(crate::Error::ResonanceViolation { .. }) => match xft_lhs_with_mismatch(&mh, sys, f64::INFINITY) {
                Ok(x) => {
                    match inequality_t3(q, &x, bc, bh, Some(x.max_mismatch)) {
                        Ok(v) => verdicts.push(v),
                        Err(e) => skipped.push((InequalityId::T3Nonideal, e.to_string())),
                    }
                    xft = Some(x);
                }
                Err(e) => skipped.push((InequalityId::T3Nonideal, e.to_string())),
            },
            Err(e) => skipped.push((InequalityId::T3, e.to_string())),
        }

        match j_term(sys, u).and_then(|r| inequality_i4(q, r.j, bc, bh).map(|v| (r, v))) {
            Ok((r, v)) => {
                j = Some(r);
                verdicts.push(v);
            }
            Err(e) => skipped.push((InequalityId::I4, e.to_string())),
        }

        if eps == 0.0 {
            match inequality_t4(q, &tpm) {
                Ok((lo, hi)) => verdicts.extend([lo, hi]),
                Err(e) => skipped.push((InequalityId::T4Lower, e.to_string())),
            }
        } else {
            skipped.push((InequalityId::T4Lower, "needs an energy-preserving unitary".into()));
        }

        if dims.d_c == dims.d_h {
            verdicts.push(strong_backflow(q, bc, bh, dims.d_c));
        }
    }

    let probe = match probe {
        Some(req) => {
            let stats = probe_statistics(sys, u, req.target, req.epsilon)?;
            let exact = reconstruct_pw(&stats)?;
            let sampled = if req.shots > 0 {
                Some(sampled_reconstruction(&stats, req.shots, req.seed, exec)?)
            } else {
                None
            };
            Some(ProbeReport { request: req.clone(), exact, sampled })
        }
        None => None,
    };

    Ok(PointReport {
        sys: sys.clone(),
        u: u.clone(),
        epsilon,
        tpm,
        mh,
        marginal_deviation,
        heat,
        xft,
        j,
        verdicts,
        skipped,
        min_pt_eig: min_pt_eigenvalue(sys),
        delta_q_max: delta_q_max(sys).ok(),
        probe,
    })
}

/// Human-readable multi-section report.
pub fn render(r: &PointReport) -> String {
    let mut s = String::new();
    let dims = r.sys.dims();
    let _ = writeln!(s, "# state");
    let _ = writeln!(s, "dims = {}x{}", dims.d_c, dims.d_h);
    let _ = writeln!(s, "levels_C = {:?}", r.sys.spectrum_c.levels());
    let _ = writeln!(s, "levels_H = {:?}", r.sys.spectrum_h.levels());
    if let Some((bc, bh)) = betas(&r.sys) {
        let _ = writeln!(s, "beta_C = {bc}\nbeta_H = {bh}");
    }
    let _ = writeln!(s, "min_pt_eig = {}", fmt_f64(r.min_pt_eig));
    if let Some(e) = r.epsilon {
        let _ = writeln!(s, "epsilon = {}", fmt_f64(e));
    }
    let _ = writeln!(s, "marginal_deviation = {:e}", r.marginal_deviation);

    let _ = writeln!(s, "\n# heat");
    let _ = writeln!(s, "Q = {}", fmt_f64(r.heat.q));
    if let Some(t) = r.heat.q_tpm {
        let _ = writeln!(s, "Q_tpm = {}", fmt_f64(t));
    }
    let _ = writeln!(s, "Q_back = {}\nQ_direct = {}", fmt_f64(r.heat.q_back), fmt_f64(r.heat.q_direct));
    if let Some(m) = r.delta_q_max {
        let _ = writeln!(s, "delta_Q_max = {}", fmt_f64(m));
    }
    let _ = writeln!(s, "min_pw = {}", fmt_f64(r.mh.min()));
    let _ = writeln!(s, "negative_entries = {}", r.heat.negative_entries.len());
    for ((ic, ih, fc, fh), v) in &r.heat.negative_entries {
        let _ = writeln!(s, "  p({ic}{ih} -> {fc}{fh}) = {}", fmt_f64(*v));
    }

    if let Some(x) = &r.xft {
        let _ = writeln!(s, "\n# exchange fluctuation theorem");
        let _ = writeln!(s, "lhs = {}", fmt_f64(x.lhs));
        if let Some(cb) = x.chi_bar {
            let _ = writeln!(s, "chi_bar = {}", fmt_f64(cb));
        }
        let _ = writeln!(s, "avg_delta_I = {}", fmt_f64(x.avg_delta_i));
        let _ = writeln!(s, "max_mismatch = {:e}", x.max_mismatch);
    }
    if let Some(j) = &r.j {
        let _ = writeln!(s, "\n# correlations\nJ = {}\nJ_bound = {}", fmt_f64(j.j), fmt_f64(j.bound()));
    }

    let _ = writeln!(s, "\n# inequalities");
    for v in &r.verdicts {
        let state = match v.code() {
            1 => "VIOLATED",
            0 => "holds",
            _ => "preconditions failed",
        };
        let _ = writeln!(s, "{:<16} observed {:>24}  bound {:>24}  {state}", v.id.as_str(), fmt_f64(v.observed), fmt_f64(v.bound));
        for (cond, ok) in &v.preconditions {
            if !ok {
                let _ = writeln!(s, "{:<16} failed: {cond}", "");
            }
        }
    }
    for (id, why) in &r.skipped {
        let _ = writeln!(s, "{:<16} skipped: {why}", id.as_str());
    }

    if let Some(p) = &r.probe {
        let _ = writeln!(s, "\n# probe reconstruction of row ({}, {})", p.request.target.0, p.request.target.1);
        let _ = writeln!(s, "coupling = {}", p.request.epsilon);
        let row = dims.index(p.request.target.0, p.request.target.1);
        for (f, x) in p.exact.iter().enumerate() {
            let (fc, fh) = dims.split(f);
            let mut line = format!("  f = {fc}{fh}  exact {}  mh {}", fmt_f64(*x), fmt_f64(r.mh.at(row, f)));
            if let Some(sm) = &p.sampled {
                line += &format!("  sampled {} +- {}", fmt_f64(sm.values[f]), fmt_f64(sm.stderr[f]));
            }
            let _ = writeln!(s, "{line}");
        }
    }

    let _ = writeln!(s, "\n# margenau-hill table");
    s += &r.mh.to_csv(None);
    let _ = writeln!(s, "\n# tpm table");
    s += &r.tpm.to_csv(None);
    s
}
