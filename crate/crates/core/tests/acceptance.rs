//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use quasiheat::analysis::analyze;
use quasiheat::config::Config;
use quasiheat::dynamics::{experiment_unitary, two_qubit_unitary};
use quasiheat::ensemble::{ensemble, EnsembleConfig, Instance};
use quasiheat::exec::Exec;
use quasiheat::fluctuations::{
    chi_bar, delta_q_max, heat_direct, heat_from_table, marginal_check, mh_distribution, qudit_closed_form_pw,
    tpm_distribution, two_qubit_closed_form, xft_lhs, MH_LOWER_BOUND, NEGLIGIBLE,
};
use quasiheat::linalg::c;
use quasiheat::probe::{probe_statistics, reconstruct_pw, sampled_reconstruction};
use quasiheat::scenario::ScenarioSpec;
use quasiheat::states::{experiment_state, min_pt_eigenvalue, two_qubit_state, TwoQubitParams};
use quasiheat::sweep::{run_sweep, SweepResult, SweepSpec};
use quasiheat::witnesses::InequalityId;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn sweep(name: &str) -> Result<SweepResult, String> {
    let cfg = Config::from_file(&config_path(name)).map_err(|e| e.to_string())?;
    let spec = SweepSpec::from_config(&cfg).map_err(|e| e.to_string())?;
    let r = run_sweep(&spec, Exec::Parallel);
    ensure(r.infeasible == 0, || format!("{name}: {} infeasible cells", r.infeasible))?;
    Ok(r)
}

fn col(r: &SweepResult, name: &str) -> Vec<f64> {
    r.column(name)
        .unwrap_or_else(|| panic!("column {name}"))
        .into_iter()
        .map(|x| x.unwrap_or(f64::NAN))
        .collect()
}

fn flags(r: &SweepResult, name: &str) -> Vec<bool> {
    col(r, name).into_iter().map(|x| x == 1.0).collect()
}

/// Every set cell of `inner` is set in `outer`; returns the count of `inner`.
fn inside(inner: &[bool], outer: &[bool], what: &str) -> Result<usize, String> {
    let stray = inner.iter().zip(outer).filter(|(a, b)| **a && !**b).count();
    ensure(stray == 0, || format!("{what}: {stray} cells outside the negativity region"))?;
    Ok(inner.iter().filter(|x| **x).count())
}

/// Random ensembles shared by criteria 2-4 and 8.
fn random_instances() -> Vec<Instance> {
    let mut v = ensemble(101, 500, &EnsembleConfig::new(2), Exec::Parallel);
    v.extend(ensemble(202, 200, &EnsembleConfig::new(3), Exec::Parallel));
    v
}

fn c1_separability() -> Outcome {
    let (g, bc, bh) = (-0.19, 1.13, 0.9618);
    let sys = experiment_state(c(g, 0.0), bc, bh, 1.0).map_err(|e| e.to_string())?;
    let lam = min_pt_eigenvalue(&sys);
    // the partial transpose moves the coherence onto the |00>,|11> block
    let (p00, p11) = (sys.rho[(0, 0)].re, sys.rho[(3, 3)].re);
    let oracle = 0.5 * (p00 + p11) - ((0.5 * (p00 - p11)).powi(2) + g * g).sqrt();
    let others = sys.rho[(1, 1)].re.min(sys.rho[(2, 2)].re);
    let oracle = oracle.min(others);
    ensure((lam - oracle).abs() < 1e-12, || format!("eigensolver {lam} vs block oracle {oracle}"))?;
    ensure((0.0009..=0.0019).contains(&lam), || format!("min eigenvalue {lam} outside [0.0009, 0.0019]"))?;
    Ok(format!("min PT eigenvalue {lam:.6}"))
}

fn c2_xft(instances: &[Instance]) -> Outcome {
    let devs: Vec<Result<f64, String>> = Exec::Parallel.map(instances, |i| {
        let mh = mh_distribution(&i.sys, &i.u).map_err(|e| e.to_string())?;
        let lhs = xft_lhs(&mh, &i.sys).map_err(|e| e.to_string())?.lhs;
        let chi = chi_bar(&i.sys, &i.u).map_err(|e| e.to_string())?;
        Ok((lhs - 1.0 - chi).abs())
    });
    let mut worst = 0.0f64;
    for d in devs {
        worst = worst.max(d?);
    }
    ensure(worst < 1e-8, || format!("max deviation {worst:e}"))?;
    Ok(format!("{} instances (500 d=2, 200 d=3), max |lhs - (1 + chi)| = {worst:.2e}", instances.len()))
}

fn c3_marginals(instances: &[Instance]) -> Outcome {
    let worst = Exec::Parallel
        .map(instances, |i| marginal_check(&mh_distribution(&i.sys, &i.u).unwrap(), &i.sys, &i.u))
        .into_iter()
        .fold(0.0, f64::max);
    ensure(worst < 1e-10, || format!("max marginal deviation {worst:e}"))?;
    Ok(format!("max marginal deviation {worst:.2e}"))
}

fn c4_range(instances: &[Instance]) -> Outcome {
    let stats = Exec::Parallel.map(instances, |i| {
        let t = mh_distribution(&i.sys, &i.u).unwrap();
        ((t.sum() - 1.0).abs(), t.min())
    });
    let norm = stats.iter().map(|s| s.0).fold(0.0, f64::max);
    let min = stats.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    ensure(norm < 1e-10, || format!("normalization off by {norm:e}"))?;
    ensure(min >= MH_LOWER_BOUND - 1e-10, || format!("entry {min} below -1/8"))?;
    Ok(format!("max |sum - 1| = {norm:.2e}, smallest entry {min:.4}"))
}

fn c5_closed_forms() -> Outcome {
    let (bc, bh, e) = (1.13, 0.962, 1.0);
    let base = TwoQubitParams { beta_c: bc, beta_h: bh, e, p00: 0.0, eta: 0.0, xi: 0.0 };
    let (lo, hi) = base.p00_bounds();
    let mut grid = Vec::new();
    for a in 0..8 {
        let p00 = lo + (hi - lo) * (a as f64 + 0.5) / 8.0;
        for b in 0..5 {
            let frac = -1.0 + 2.0 * b as f64 / 4.0;
            for xi in [0.0, 1.1, 2.9] {
                for k in 0..30 {
                    let theta = PI * k as f64 / 29.0;
                    for (lam, phi) in [(0.0, 0.0), (0.7, -0.4), (-1.9, 2.2)] {
                        grid.push((p00, frac, xi, theta, lam, phi));
                    }
                }
            }
        }
    }
    let devs = Exec::Parallel.map(&grid, |&(p00, frac, xi, theta, lam, phi)| -> Result<f64, String> {
        let mut p = base;
        p.p00 = p00;
        p.eta = frac * p.eta_cap();
        p.xi = xi;
        let sys = two_qubit_state(&p).map_err(|e| e.to_string())?;
        let u = two_qubit_unitary(theta, 0.37, lam, phi).matrix;
        let mh = mh_distribution(&sys, &u).map_err(|e| e.to_string())?;
        let tpm = tpm_distribution(&sys, &u).map_err(|e| e.to_string())?;
        let cf = two_qubit_closed_form(&p, theta, lam, phi);
        Ok([
            cf.pw_01_10 - mh.at(1, 2),
            cf.pw_10_01 - mh.at(2, 1),
            cf.ptpm_01_10 - tpm.at(1, 2),
            cf.ptpm_10_01 - tpm.at(2, 1),
            cf.q - heat_direct(&sys, &u),
            cf.q_tpm - heat_from_table(&tpm),
        ]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs())))
    });
    let mut worst = 0.0f64;
    for d in devs {
        worst = worst.max(d?);
    }
    let mut qudits = ensemble(303, 1500, &EnsembleConfig::new(3), Exec::Parallel);
    qudits.extend(ensemble(404, 1000, &EnsembleConfig::new(4), Exec::Parallel));
    let qdevs = Exec::Parallel.map(&qudits, |i| -> Result<f64, String> {
        let cf = qudit_closed_form_pw(&i.spectrum, &i.populations, &i.coherences, &i.rotations)
            .map_err(|e| e.to_string())?;
        let mh = mh_distribution(&i.sys, &i.u).map_err(|e| e.to_string())?;
        let tpm = tpm_distribution(&i.sys, &i.u).map_err(|e| e.to_string())?;
        let mut dev = (cf.q() - heat_direct(&i.sys, &i.u)).abs();
        dev = dev.max((cf.q_tpm - heat_from_table(&tpm)).abs());
        dev = dev.max((cf.delta_q_max - delta_q_max(&i.sys).map_err(|e| e.to_string())?).abs());
        if cf.delta_q.abs() > cf.delta_q_max + 1e-12 {
            return Err(format!("|dQ| = {} exceeds its maximum {}", cf.delta_q.abs(), cf.delta_q_max));
        }
        for en in &cf.entries {
            dev = dev.max((en.pw - mh.at(en.from, en.to)).abs());
            dev = dev.max((en.ptpm - tpm.at(en.from, en.to)).abs());
        }
        Ok(dev)
    });
    for d in qdevs {
        worst = worst.max(d?);
    }
    ensure(worst < 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("{} qubit grid points + {} qudit instances, max deviation {worst:.2e}", grid.len(), qudits.len()))
}

fn c6_soundness() -> Outcome {
    let mut summary = Vec::new();
    for (d, seed) in [(2usize, 505u64), (3, 606)] {
        let mut cfg = EnsembleConfig::new(d);
        cfg.eta_max = 0.3;
        let pool = ensemble(seed, 2000, &cfg, Exec::Parallel);
        let results = Exec::Parallel.map(&pool, |i| -> Result<Option<Vec<InequalityId>>, String> {
            let r = analyze(&i.sys, &i.u, None, None, Exec::Sequential).map_err(|e| e.to_string())?;
            if r.mh.min() < -NEGLIGIBLE {
                return Ok(None);
            }
            Ok(Some(r.verdicts.iter().filter(|v| v.violated).map(|v| v.id).collect()))
        });
        let mut n = 0;
        for res in results {
            if let Some(fired) = res? {
                n += 1;
                ensure(fired.is_empty(), || format!("d={d}: {fired:?} fired on a nonnegative table"))?;
            }
        }
        ensure(n >= 500, || format!("d={d}: only {n} nonnegative instances"))?;
        summary.push(format!("d={d}: {n} nonnegative instances"));
    }
    Ok(format!("{}, no violations", summary.join(", ")))
}

fn c7_regions() -> Outcome {
    // experiment state against time
    let e = sweep("experiment-time.toml")?;
    let q = col(&e, "Q");
    let q_tpm = col(&e, "Q_tpm");
    let neg = flags(&e, "negativity");
    ensure(q_tpm.iter().all(|&x| x <= 1e-15), || "Q_tpm > 0 somewhere".into())?;
    let back: Vec<bool> = q.iter().map(|&x| x > 0.0).collect();
    let first = back.iter().position(|&b| b).ok_or("no backflow")?;
    let last = back.iter().rposition(|&b| b).unwrap();
    ensure(back[first..=last].iter().all(|&b| b), || "backflow cells are not one interval".into())?;
    // Between the zero of p(01->10) and that of p(10->10) every entry is
    // nonnegative, so a narrow backflow window without negativity is exact.
    let sys = experiment_state(c(-0.19, 0.0), 1.13, 0.9618, 1.0).map_err(|e| e.to_string())?;
    let (r01, r10, g) = (sys.rho[(1, 1)].re, sys.rho[(2, 2)].re, 0.19);
    let (th1, th2) = ((g / r01).atan(), (r10 / g).atan());
    let theta = col(&e, "theta");
    let gap: Vec<bool> = theta.iter().map(|&t| t > th1 - 1e-9 && t < th2 + 1e-9).collect();
    let stray = (0..q.len()).filter(|&k| back[k] && !neg[k] && !gap[k]).count();
    ensure(stray == 0, || format!("{stray} backflow cells without negativity outside the crossing window"))?;
    let span = theta[last] - theta[first];
    ensure(th2 - th1 < 0.02 * span, || format!("crossing window [{th1}, {th2}] is not narrow"))?;
    let n_neg = neg.iter().filter(|x| **x).count();
    let t1 = inside(&flags(&e, "T1"), &neg, "T1")?;
    ensure(t1 > 0 && t1 < e.rows.len(), || format!("T1 violated in {t1} of {} cells", e.rows.len()))?;
    let sb = flags(&e, "strong_backflow").iter().filter(|x| **x).count();
    ensure(sb == 0, || "strong backflow fired on the experiment state".into())?;
    let mut out = vec![format!(
        "(a) backflow t in [{:.2}, {:.2}] ms, negativity {n_neg}/{} cells (crossing window theta in [{th1:.4}, {th2:.4}]), T1 {t1}",
        e.rows[first].coords[0] * 1e3,
        e.rows[last].coords[0] * 1e3,
        e.rows.len()
    )];

    // two qubits over (theta, eta)
    let g = sweep("qubit-theta-eta.toml")?;
    let neg = flags(&g, "negativity");
    let t1 = flags(&g, "T1");
    let n_t1 = inside(&t1, &neg, "T1")?;
    let n_neg = neg.iter().filter(|x| **x).count();
    ensure(n_t1 > 0 && n_t1 < n_neg, || format!("T1 {n_t1} vs negativity {n_neg}"))?;
    let on_line = g
        .rows
        .iter()
        .zip(&t1)
        .filter(|(r, v)| **v && (r.coords[1] + 0.19).abs() < 1e-12)
        .count();
    ensure(on_line > 0, || "eta = -0.19 line misses the T1 region".into())?;
    out.push(format!("(b) T1 {n_t1} inside negativity {n_neg}, {on_line} on eta=-0.19"));

    // two qutrits over (theta01, theta02)
    for (name, need_both_t4) in [("qutrit-theta-grid.toml", true), ("qutrit-eta-half.toml", false)] {
        let r = sweep(name)?;
        let neg = flags(&r, "negativity");
        let t3 = inside(&flags(&r, "T3"), &neg, "T3")?;
        let lo = inside(&flags(&r, "T4_lower"), &neg, "T4-lower")?;
        let hi = inside(&flags(&r, "T4_upper"), &neg, "T4-upper")?;
        inside(&flags(&r, "I4"), &neg, "I4")?;
        ensure(t3 > 0 && lo + hi > 0, || format!("{name}: T3 {t3}, T4 {lo}/{hi}"))?;
        if need_both_t4 {
            ensure(lo > 0 && hi > 0, || format!("{name}: T4-lower {lo}, T4-upper {hi}"))?;
        }
        out.push(format!("({name}) T3 {t3}, T4-lower {lo}, T4-upper {hi}"));
    }
    Ok(out.join("; "))
}

fn c8_probe(instances: &[Instance]) -> Outcome {
    let sample: Vec<&Instance> = instances.iter().step_by(5).collect();
    let devs = Exec::Parallel.map(&sample, |i| -> Result<f64, String> {
        let mh = mh_distribution(&i.sys, &i.u).map_err(|e| e.to_string())?;
        let d = i.sys.dims();
        let mut worst = 0.0f64;
        for eps in [0.05, 0.2, FRAC_PI_4] {
            for row in 0..d.joint() {
                let st = probe_statistics(&i.sys, &i.u, d.split(row), eps).map_err(|e| e.to_string())?;
                for (f, x) in reconstruct_pw(&st).map_err(|e| e.to_string())?.iter().enumerate() {
                    worst = worst.max((x - mh.at(row, f)).abs());
                }
            }
        }
        Ok(worst)
    });
    let mut worst = 0.0f64;
    for d in devs {
        worst = worst.max(d?);
    }
    ensure(worst < 1e-10, || format!("exact reconstruction off by {worst:e}"))?;

    let sys = experiment_state(c(-0.19, 0.0), 1.13, 0.9618, 1.0).map_err(|e| e.to_string())?;
    let u = experiment_unitary(215.1, 0.5e-3).map_err(|e| e.to_string())?.matrix;
    let st = probe_statistics(&sys, &u, (0, 1), 0.2).map_err(|e| e.to_string())?;
    let exact = reconstruct_pw(&st).map_err(|e| e.to_string())?;
    let s = sampled_reconstruction(&st, 1_000_000, 17, Exec::Parallel).map_err(|e| e.to_string())?;
    let mut z = 0.0f64;
    for (f, x) in exact.iter().enumerate() {
        let dev = (s.values[f] - x).abs();
        if s.stderr[f] > 0.0 {
            z = z.max(dev / s.stderr[f]);
        } else {
            ensure(dev < 1e-12, || format!("entry {f}: zero error bar but deviation {dev:e}"))?;
        }
    }
    ensure(z < 5.0, || format!("sampled value {z:.2} standard errors from exact"))?;
    Ok(format!("{} instances x 3 couplings, max error {worst:.2e}; 1e6 shots within {z:.2} s.e.", sample.len()))
}

fn c9_nonideal() -> Outcome {
    let r = sweep("nonideal-eps-delta.toml")?;
    let t2 = flags(&r, "T2").iter().filter(|x| **x).count();
    ensure(t2 > 0, || "no T2 violation".into())?;
    let cfg = Config::from_file(&config_path("nonideal-eps-delta.toml")).map_err(|e| e.to_string())?;
    let spec = ScenarioSpec::from_config(&cfg).map_err(|e| e.to_string())?;
    let pt = spec.build(&[("unitary.Jx", 0.0), ("state.Delta", 0.0)]).map_err(|e| e.to_string())?;
    let rep = analyze(&pt.sys, &pt.u, pt.epsilon, None, Exec::Sequential).map_err(|e| e.to_string())?;
    let b1 = rep.verdict(InequalityId::T1).ok_or("T1 missing at the ideal point")?.bound;
    let b2 = rep.verdict(InequalityId::T2).ok_or("T2 missing at the ideal point")?.bound;
    ensure((b1 - b2).abs() < 1e-12, || format!("T1 bound {b1} vs T2 bound {b2}"))?;
    Ok(format!("T2 violated in {t2}/{} cells, |T1 - T2| at the ideal point {:.1e}", r.rows.len(), (b1 - b2).abs()))
}

fn c10_strong_backflow() -> Outcome {
    let sys = experiment_state(c(-0.19, 0.0), 1.13, 0.9618, 1.0).map_err(|e| e.to_string())?;
    ensure(min_pt_eigenvalue(&sys) > 0.0, || "experiment state is not PPT".into())?;
    let j = 215.1;
    let n = 2001;
    // one full period of the rotation, 1/J
    let times: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64 / j).collect();
    let fired = Exec::Parallel.map(&times, |&t| -> Result<bool, String> {
        let u = experiment_unitary(j, t).map_err(|e| e.to_string())?.matrix;
        let r = analyze(&sys, &u, None, None, Exec::Sequential).map_err(|e| e.to_string())?;
        Ok(r.verdict(InequalityId::StrongBackflow).ok_or("verdict missing")?.violated)
    });
    let mut count = 0;
    for f in fired {
        count += f? as usize;
    }
    ensure(count == 0, || format!("fired at {count} times"))?;
    Ok(format!("{n} times over one period, never fired"))
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let start = Instant::now();
    let instances = random_instances();
    let criteria: [Criterion; 10] = [
        ("separability number", Box::new(c1_separability)),
        ("exchange fluctuation identity", Box::new(|| c2_xft(&instances))),
        ("marginal identities", Box::new(|| c3_marginals(&instances))),
        ("range and normalization", Box::new(|| c4_range(&instances))),
        ("closed-form equivalence", Box::new(c5_closed_forms)),
        ("witness soundness", Box::new(c6_soundness)),
        ("parameter-space regions", Box::new(c7_regions)),
        ("probe exactness", Box::new(|| c8_probe(&instances))),
        ("nonideal tolerance map", Box::new(c9_nonideal)),
        ("strong backflow on separable state", Box::new(c10_strong_backflow)),
    ];
    let mut failures = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2}s): {detail}", k + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2}s): {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} of 10 passed in {:.1}s", 10 - failures, start.elapsed().as_secs_f64());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
