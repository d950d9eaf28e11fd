//! One function per subcommand: load inputs, call the library, tabulate.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use semidecay::asymptotics::{
    decay_profile, default_probes, equivalence_check_resolvent, fit_growth, integral_equivalence_check,
    nlogn_resolvent_check, DecayProfile, SideReport,
};
use semidecay::conditions::{
    gsf_integral_check, kreiss_constant, ritt_constant, ritt_power_resolvent_check, rk_bounded_check,
    stolz_containment, ConditionReport, IntegralConditionReport, StolzDomain,
};
use semidecay::operators::{parse_operator_spec, sampled_data_operator, Dimension, Sandwich};
use semidecay::perturbation::{perturbation_robustness, PerturbationSetup};
use semidecay::resolvent::{parseval_check, parseval_truncation, reconstruct_power, resolvent_sweep, SpectralGrid};
use semidecay::rvfunctions::{check_brv, int_bound_check, power_bound, GeometricGrid, RVFunction};
use semidecay::summability::{decay_to_sum, mult_op_summability_equiv, sum_to_decay, SummabilityParams, DEFAULT_PROBES};
use semidecay::{ComplexVector, DenseMatrix, DiagonalSymbol, Error, LinearOperator, C64};

use crate::output::{num, Outcome, PlotPoint, Table};
use crate::{Command, Failure, RunConfig};

type Run = std::result::Result<Outcome, Failure>;

const DEFAULT_N_MAX: u64 = 1 << 12;
const PARSEVAL_TAIL: f64 = 1e-12;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn load_operator(path: &Path, flag: &str) -> std::result::Result<LinearOperator, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("--{flag} {}: {e}", path.display())))?;
    parse_operator_spec(&text)
        .map(|s| s.operator)
        .map_err(|e| usage(format!("--{flag} {}: {e}", path.display())))
}

fn required_op(cfg: &RunConfig) -> std::result::Result<LinearOperator, Failure> {
    let path = cfg.op.as_ref().ok_or_else(|| usage("missing required flag --op"))?;
    load_operator(path, "op")
}

fn optional_op(path: &Option<std::path::PathBuf>, flag: &str) -> std::result::Result<Option<LinearOperator>, Failure> {
    path.as_ref().map(|p| load_operator(p, flag)).transpose()
}

/// Identity on the domain of `t`.
fn identity_like(t: &LinearOperator) -> std::result::Result<LinearOperator, Failure> {
    Ok(match t.dimension() {
        Dimension::Finite(n) => LinearOperator::identity(n),
        Dimension::Sequence { truncation } => LinearOperator::diagonal(DiagonalSymbol::constant(C64::new(1.0, 0.0)))?
            .with_space(t.space)
            .with_truncation(truncation),
    })
}

fn right_factor(cfg: &RunConfig, t: &LinearOperator) -> std::result::Result<LinearOperator, Failure> {
    match optional_op(&cfg.s, "s")? {
        Some(s) => Ok(s),
        None => identity_like(t),
    }
}

fn grid(cfg: &RunConfig) -> std::result::Result<SpectralGrid, Failure> {
    match &cfg.grid {
        Some(g) => SpectralGrid::parse(g).map_err(|e| usage(e.to_string())),
        None => Ok(SpectralGrid::default()),
    }
}

fn function(spec: &Option<String>, default: &str) -> std::result::Result<RVFunction, Failure> {
    RVFunction::parse(spec.as_deref().unwrap_or(default)).map_err(|e| usage(e.to_string()))
}

fn n_max(cfg: &RunConfig) -> u64 {
    cfg.n_max.unwrap_or(DEFAULT_N_MAX)
}

fn probe_count(cfg: &RunConfig, default: usize) -> usize {
    cfg.probes.unwrap_or(default)
}

fn decay_table(prof: &DecayProfile, series: &str) -> (Table, Vec<PlotPoint>) {
    let mut t = Table::new(&["n", "norm", "error"]);
    let mut plot = Vec::new();
    for s in &prof.samples {
        t.push(vec![s.n.to_string(), num(s.norm), num(s.error)]);
        plot.push(PlotPoint {
            x: s.n as f64,
            y: s.norm,
            series: series.into(),
        });
    }
    (t, plot)
}

fn side_rows(t: &mut Table, plot: &mut Vec<PlotPoint>, side: &SideReport, series: &str) {
    for &(x, y) in &side.values {
        t.push(vec![series.into(), num(x), num(y)]);
        plot.push(PlotPoint {
            x,
            y,
            series: series.into(),
        });
    }
}

fn condition_rows(t: &mut Table, plot: &mut Vec<PlotPoint>, rep: &ConditionReport) {
    let series = match rep.k {
        Some(k) => format!("{}_k{k}", rep.condition),
        None => rep.condition.clone(),
    };
    for w in rep.per_radius() {
        t.push(vec![series.clone(), num(w.r), num(w.theta), num(w.value)]);
        plot.push(PlotPoint {
            x: w.r - 1.0,
            y: w.value,
            series: series.clone(),
        });
    }
}

fn integral_rows(t: &mut Table, plot: &mut Vec<PlotPoint>, rep: &IntegralConditionReport) {
    for row in &rep.rows {
        t.push(vec![
            rep.condition.clone(),
            num(row.r),
            num(row.value),
            row.nodes.to_string(),
            row.converged.to_string(),
        ]);
        plot.push(PlotPoint {
            x: row.r - 1.0,
            y: row.value,
            series: rep.condition.clone(),
        });
    }
}

fn trend_word(t: semidecay::trend::Trend) -> &'static str {
    use semidecay::trend::Trend;
    match t {
        Trend::Stable => "stable",
        Trend::Growing => "growing",
        Trend::Indeterminate => "indeterminate",
    }
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Run {
    match cmd {
        Command::Powers => powers(cfg),
        Command::ResolventSweep => sweep(cfg),
        Command::Reconstruct => reconstruct(cfg),
        Command::Parseval => parseval(cfg),
        Command::Kreiss => kreiss(cfg),
        Command::Ritt => ritt(cfg),
        Command::Rk => rk(cfg),
        Command::Stolz => stolz(cfg),
        Command::Gsf => gsf(cfg),
        Command::IntegralEquiv => integral_equiv(cfg),
        Command::Equiv => equiv(cfg),
        Command::Nlogn => nlogn(cfg),
        Command::Perturb => perturb(cfg),
        Command::Summability => summability(cfg),
        Command::MultOp => mult_op(cfg),
        Command::RvCheck => rv_check(cfg),
        Command::SampledData => sampled_data(cfg),
    }
}

fn powers(cfg: &RunConfig) -> Run {
    let t = required_op(cfg)?;
    let s = optional_op(&cfg.s, "s")?;
    let left = optional_op(&cfg.s_left, "s-left")?;
    let n = n_max(cfg);
    let pair = Sandwich::new(&t).with_left(left.as_ref()).with_right(s.as_ref());
    let prof = decay_profile(&pair, n)?;
    let verdict = match prof.fitted_exponent() {
        Some(e) => format!("fitted exponent {e:.4}"),
        None => "no exponent fit".into(),
    };
    let (profile, plot) = decay_table(&prof, "norm");
    Ok(Outcome {
        verdict,
        parameters: json!({ "n_max": n }),
        report: to_value(&prof),
        profile,
        plot,
    })
}

fn sweep(cfg: &RunConfig) -> Run {
    let t = required_op(cfg)?;
    let s = optional_op(&cfg.s, "s")?;
    let left = optional_op(&cfg.s_left, "s-left")?;
    let k = cfg.k.unwrap_or(1);
    let g = grid(cfg)?;
    let pair = Sandwich::new(&t).with_left(left.as_ref()).with_right(s.as_ref());
    let prof = resolvent_sweep(&pair, k, &g)?;
    let fit = fit_growth(&prof).ok();
    let mut profile = Table::new(&["r", "excess", "theta", "sup_norm", "n_theta_used", "converged"]);
    let mut plot = Vec::new();
    for s in &prof.samples {
        profile.push(vec![
            num(s.r),
            num(s.excess),
            num(s.theta),
            num(s.sup_norm),
            s.n_theta_used.to_string(),
            s.converged.to_string(),
        ]);
        plot.push(PlotPoint {
            x: s.excess,
            y: s.sup_norm,
            series: format!("resolvent_k{k}"),
        });
    }
    let verdict = match fit {
        Some(f) => format!("growth exponent {:.4} in 1/(r−1)", -f.slope),
        None => "no growth fit".into(),
    };
    Ok(Outcome {
        verdict,
        parameters: json!({ "k": k, "grid": g }),
        report: json!({ "profile": prof, "fit": fit }),
        profile,
        plot,
    })
}

fn reconstruct(cfg: &RunConfig) -> Run {
    let t = required_op(cfg)?;
    let dense = t.to_dense()?;
    let n = cfg.n.unwrap_or(4);
    let k = cfg.k.unwrap_or(1);
    let r = cfg.r.unwrap_or(1.1);
    let n_theta = cfg.n_theta.unwrap_or(512);
    let mut profile = Table::new(&["n", "max_abs_error"]);
    let mut plot = Vec::new();
    let mut worst = 0.0f64;
    let mut last: Option<DenseMatrix> = None;
    for m in 0..=n {
        let rec = reconstruct_power(&t, m, k, r, n_theta)?;
        let err = rec.sub(&dense.pow(m)).max_abs();
        worst = worst.max(err);
        profile.push(vec![m.to_string(), num(err)]);
        plot.push(PlotPoint {
            x: m as f64,
            y: err,
            series: "max_abs_error".into(),
        });
        last = Some(rec);
    }
    Ok(Outcome {
        verdict: format!("max entrywise error {worst:.3e} for n ≤ {n}"),
        parameters: json!({ "n": n, "k": k, "r": r, "n_theta": n_theta }),
        report: json!({ "max_abs_error": worst, "reconstruction": last }),
        profile,
        plot,
    })
}

fn probe(t: &LinearOperator, seed: u64) -> std::result::Result<ComplexVector, Failure> {
    let mut v = default_probes(t, 1, seed)?;
    Ok(v.remove(0))
}

fn parseval(cfg: &RunConfig) -> Run {
    let t = required_op(cfg)?;
    let s = optional_op(&cfg.s, "s")?;
    let k = cfg.k.unwrap_or(1);
    let r = cfg.r.unwrap_or(2.0);
    let n_theta = cfg.n_theta.unwrap_or(1024);
    let x = probe(&t, cfg.seed)?;
    let n_trunc = parseval_truncation(&t, s.as_ref(), k, r, &x, PARSEVAL_TAIL)?;
    let rep = parseval_check(&t, s.as_ref(), k, r, &x, n_theta, n_trunc)?;
    let mut profile = Table::new(&["lhs", "rhs", "residual", "tail_bound", "n_theta", "n_trunc"]);
    profile.push(vec![
        num(rep.lhs),
        num(rep.rhs),
        num(rep.residual),
        num(rep.tail_bound),
        rep.n_theta.to_string(),
        rep.n_trunc.to_string(),
    ]);
    Ok(Outcome {
        verdict: format!("residual {:.3e} (tail ≤ {:.1e})", rep.residual, rep.tail_bound),
        parameters: json!({ "k": k, "r": r, "n_theta": n_theta, "tail_target": PARSEVAL_TAIL }),
        report: to_value(&rep),
        profile,
        plot: Vec::new(),
    })
}

fn condition_outcome(reports: &[&ConditionReport], parameters: Value, report: Value, verdict: String) -> Outcome {
    let mut profile = Table::new(&["condition", "r", "theta", "value"]);
    let mut plot = Vec::new();
    for rep in reports {
        condition_rows(&mut profile, &mut plot, rep);
    }
    Outcome {
        verdict,
        parameters,
        report,
        profile,
        plot,
    }
}

fn kreiss(cfg: &RunConfig) -> Run {
    let t = required_op(cfg)?;
    let g = grid(cfg)?;
    let k = cfg.k.unwrap_or(3);
    let rep = kreiss_constant(&t, &g, k)?;
    let verdict = format!(
        "Kreiss constant {:.4}, strong {:.4}, trend {}",
        rep.kreiss_constant,
        rep.strong_kreiss_constant,
        trend_word(rep.trend)
    );
    let rows: Vec<&ConditionReport> = rep.rows.iter().collect();
    Ok(condition_outcome(&rows, json!({ "k_max": k, "grid": g }), to_value(&rep), verdict))
}

fn ritt(cfg: &RunConfig) -> Run {
    let t = required_op(cfg)?;
    let g = grid(cfg)?;
    let rep = ritt_constant(&t, &g)?;
    let power = cfg.k.map(|k| ritt_power_resolvent_check(&t, k, &g)).transpose()?;
    let mut verdict = format!("Ritt constant {:.4}, trend {}", rep.constant, trend_word(rep.trend));
    if let Some(p) = &power {
        verdict.push_str(&format!("; power-resolvent trend {}", trend_word(p.trend)));
    }
    let mut rows = vec![&rep];
    rows.extend(power.iter());
    Ok(condition_outcome(
        &rows,
        json!({ "k": cfg.k, "grid": g }),
        json!({ "trend": rep.trend, "ritt": rep, "power_resolvent": power }),
        verdict,
    ))
}

fn rk(cfg: &RunConfig) -> Run {
    let t = required_op(cfg)?;
    let g = grid(cfg)?;
    let alpha = cfg.alpha.unwrap_or(1.0);
    let beta = cfg.beta.unwrap_or(0.0);
    let rep = rk_bounded_check(&t, alpha, beta, &g)?;
    let verdict = format!(
        "({alpha},{beta})-RK constant {:.4}, trend {}",
        rep.report.constant,
        trend_word(rep.report.trend)
    );
    Ok(condition_outcome(
        &[&rep.report],
        json!({ "alpha": alpha, "beta": beta, "grid": g }),
        to_value(&rep),
        verdict,
    ))
}

fn stolz(cfg: &RunConfig) -> Run {
    let t = required_op(cfg)?;
    let delta = cfg.delta.ok_or_else(|| usage("stolz needs --delta"))?;
    let c = cfg.c.ok_or_else(|| usage("stolz needs --c"))?;
    let domain = StolzDomain::new(delta, c).map_err(|e| usage(e.to_string()))?;
    let rep = stolz_containment(&t, &domain)?;
    let mut profile = Table::new(&["re", "im"]);
    let mut plot = Vec::new();
    for v in &rep.violators {
        profile.push(vec![num(v.re), num(v.im)]);
        plot.push(PlotPoint {
            x: v.re,
            y: v.im,
            series: "violator".into(),
        });
    }
    let verdict = if rep.contained {
        "member".to_string()
    } else {
        format!("not member ({} violating spectrum points)", rep.violators.len())
    };
    Ok(Outcome {
        verdict: verdict.clone(),
        parameters: json!({ "delta": delta, "c": c }),
        report: json!({ "verdict": verdict, "containment": rep }),
        profile,
        plot,
    })
}

fn integral_outcome(reps: &[&IntegralConditionReport], parameters: Value, report: Value, verdict: String) -> Outcome {
    let mut profile = Table::new(&["condition", "r", "value", "nodes", "converged"]);
    let mut plot = Vec::new();
    for rep in reps {
        integral_rows(&mut profile, &mut plot, rep);
    }
    Outcome {
        verdict,
        parameters,
        report,
        profile,
        plot,
    }
}

fn gsf(cfg: &RunConfig) -> Run {
    let t = required_op(cfg)?;
    let g = grid(cfg)?;
    let count = probe_count(cfg, 4);
    let probes = default_probes(&t, count, cfg.seed)?;
    let rep = gsf_integral_check(&t, &g, &probes)?;
    let verdict = format!(
        "integral sup {:.4} ({}), powers {} ; consistent {}",
        rep.sup,
        trend_word(rep.trend),
        trend_word(rep.companion_trend),
        rep.consistent
    );
    Ok(integral_outcome(&[&rep], json!({ "probes": count, "grid": g }), to_value(&rep), verdict))
}

fn integral_equiv(cfg: &RunConfig) -> Run {
    let t = required_op(cfg)?;
    let s = optional_op(&cfg.s, "s")?;
    let f = function(&cfg.f, "pow:1/2")?;
    let k = cfg.k.unwrap_or((f.alpha + 0.5).floor() as u32 + 1);
    let g = grid(cfg)?;
    let count = probe_count(cfg, 2);
    let probes = default_probes(&t, count, cfg.seed)?;
    let rep = integral_equivalence_check(&t, s.as_ref(), &f, k, &g, &probes)?;
    let mut profile = Table::new(&["side", "x", "value"]);
    let mut plot = Vec::new();
    side_rows(&mut profile, &mut plot, &rep.integral, "integral");
    side_rows(&mut profile, &mut plot, &rep.decay, "decay");
    let verdict = format!(
        "integral sup {:.4} ({}), decay sup {:.4} ({}), passes {}",
        rep.integral.sup,
        trend_word(rep.integral.trend),
        rep.decay.sup,
        trend_word(rep.decay.trend),
        rep.passes
    );
    Ok(Outcome {
        verdict,
        parameters: json!({ "f": f.label(), "k": k, "probes": count, "grid": g }),
        report: to_value(&rep),
        profile,
        plot,
    })
}

fn equiv(cfg: &RunConfig) -> Run {
    let t = required_op(cfg)?;
    let s = right_factor(cfg, &t)?;
    let f = function(&cfg.f, "pow:1/2")?;
    let k = cfg.k.unwrap_or(f.alpha.floor() as u32 + 1);
    let n = n_max(cfg);
    let g = grid(cfg)?;
    let rep = equivalence_check_resolvent(&t, &s, &f, k, n, &g)?;
    let mut profile = Table::new(&["side", "x", "value"]);
    let mut plot = Vec::new();
    side_rows(&mut profile, &mut plot, &rep.decay, "decay");
    side_rows(&mut profile, &mut plot, &rep.growth, "growth");
    let verdict = format!(
        "decay sup {:.4} ({}), growth sup {:.4} ({}), passes {}",
        rep.decay.sup,
        trend_word(rep.decay.trend),
        rep.growth.sup,
        trend_word(rep.growth.trend),
        rep.passes
    );
    Ok(Outcome {
        verdict,
        parameters: json!({ "f": f.label(), "k": k, "n_max": n, "grid": g }),
        report: to_value(&rep),
        profile,
        plot,
    })
}

fn nlogn(cfg: &RunConfig) -> Run {
    let t = required_op(cfg)?;
    let s = optional_op(&cfg.s, "s")?;
    let left = optional_op(&cfg.s_left, "s-left")?;
    let alpha = cfg.alpha.unwrap_or(0.0);
    let g = match &cfg.grid {
        Some(_) => grid(cfg)?,
        None => SpectralGrid::new(2, 20, 1024)?,
    };
    let radii: Vec<f64> = g.excesses().into_iter().map(|e| 1.0 + e).collect();
    let rep = nlogn_resolvent_check(&t, left.as_ref(), s.as_ref(), alpha, &radii)?;
    let mut profile = Table::new(&["r", "norm", "h", "ratio"]);
    let mut plot = Vec::new();
    for row in &rep.rows {
        profile.push(vec![num(row.r), num(row.norm), num(row.h), num(row.ratio)]);
        plot.push(PlotPoint {
            x: row.r - 1.0,
            y: row.ratio,
            series: "ratio".into(),
        });
    }
    let verdict = format!(
        "ratio in [{:.4}, {:.4}], trend {}",
        rep.inf_ratio,
        rep.sup_ratio,
        trend_word(rep.trend)
    );
    Ok(Outcome {
        verdict,
        parameters: json!({ "alpha": alpha, "radii": radii }),
        report: to_value(&rep),
        profile,
        plot,
    })
}

fn perturb(cfg: &RunConfig) -> Run {
    let t = required_op(cfg)?;
    let d = optional_op(&cfg.d, "d")?.ok_or_else(|| usage("perturb needs --d"))?;
    let s = right_factor(cfg, &t)?;
    let f = function(&cfg.f, "pow:1/2")?;
    let k = cfg.k.unwrap_or(f.alpha.floor() as u32 + 1);
    let n = n_max(cfg);
    let g = grid(cfg)?;
    let setup = PerturbationSetup::new(t, d, s, &g, cfg.seed)?;
    let rep = perturbation_robustness(&setup, &f, k, &g, n, cfg.seed)?;
    let (mut profile, mut plot) = decay_table(&rep.decay_t, "T");
    let (p2, plot2) = decay_table(&rep.decay_perturbed, "T+D");
    profile.rows.extend(p2.rows);
    profile.columns = vec!["n", "norm", "error"];
    plot.extend(plot2);
    let verdict = format!(
        "delta {:.4}, exponents {} vs {}, passes {}",
        rep.delta_hat,
        rep.exponent_t.map_or("none".into(), |e| format!("{e:.4}")),
        rep.exponent_perturbed.map_or("none".into(), |e| format!("{e:.4}")),
        rep.passes
    );
    Ok(Outcome {
        verdict,
        parameters: json!({ "f": f.label(), "k": k, "n_max": n, "grid": g }),
        report: to_value(&rep),
        profile,
        plot,
    })
}

fn summability(cfg: &RunConfig) -> Run {
    let t = required_op(cfg)?;
    let s = right_factor(cfg, &t)?;
    let f = function(&cfg.f, "const")?;
    let p = cfg.p.unwrap_or(2.0);
    let n = n_max(cfg);
    let count = probe_count(cfg, DEFAULT_PROBES);
    let params = SummabilityParams::new(p, f.clone()).map_err(|e| usage(e.to_string()))?;
    let rep = sum_to_decay(&t, &s, &params, n, count, cfg.seed)?;
    let converse = match &cfg.g {
        Some(g) => {
            let g = RVFunction::parse(g).map_err(|e| usage(e.to_string()))?;
            Some(decay_to_sum(&t, &s, &f, &g, p, n, count, cfg.seed)?)
        }
        None => None,
    };
    let mut profile = Table::new(&["n", "norm", "f_partial", "lhs", "rhs"]);
    let mut plot = Vec::new();
    for row in &rep.rows {
        profile.push(vec![row.n.to_string(), num(row.norm), num(row.f_partial), num(row.lhs), num(row.rhs)]);
        plot.push(PlotPoint {
            x: row.n as f64,
            y: row.lhs,
            series: "weighted_norm".into(),
        });
    }
    if let Some(c) = &converse {
        for row in &c.rows {
            plot.push(PlotPoint {
                x: row.n as f64,
                y: row.partial,
                series: "partial_sum".into(),
            });
        }
    }
    let mut verdict = format!("Ĉ = {:.4} ({}), passes {}", rep.c_hat, trend_word(rep.sums_trend), rep.passes);
    if let Some(c) = &converse {
        verdict.push_str(&format!("; converse Ĉ = {:.4}, passes {}", c.c_hat, c.passes));
    }
    Ok(Outcome {
        verdict,
        parameters: json!({ "f": f.label(), "g": cfg.g, "p": p, "n_max": n, "probes": count }),
        report: json!({ "sum_to_decay": rep, "decay_to_sum": converse }),
        profile,
        plot,
    })
}

fn mult_op(cfg: &RunConfig) -> Run {
    let t = required_op(cfg)?;
    let symbol = t
        .as_diagonal()
        .cloned()
        .ok_or_else(|| Failure::Usage("mult-op needs a diagonal operator in --op".into()))?;
    let alpha = cfg.alpha.unwrap_or(0.5);
    let p = cfg.p.unwrap_or(2.0);
    let q = cfg.q.unwrap_or(p);
    let n = n_max(cfg);
    let count = probe_count(cfg, DEFAULT_PROBES);
    let rep = mult_op_summability_equiv(&symbol, alpha, p, q, n, count, cfg.seed)?;
    let mut profile = Table::new(&["side", "x", "value"]);
    let mut plot = Vec::new();
    side_rows(&mut profile, &mut plot, &rep.decay, "decay");
    for (i, total) in rep.probe_totals.iter().enumerate() {
        profile.push(vec!["probe_total".into(), i.to_string(), num(*total)]);
    }
    let verdict = format!(
        "C₃ = {:.4}, Ĉ = {:.4}, equivalent {}",
        rep.c3, rep.c_hat, rep.equivalent
    );
    Ok(Outcome {
        verdict,
        parameters: json!({ "alpha": alpha, "p": p, "q": q, "n_max": n, "probes": count }),
        report: to_value(&rep),
        profile,
        plot,
    })
}

fn rv_check(cfg: &RunConfig) -> Run {
    let f = function(&cfg.f, "pow:1/2")?;
    let g = GeometricGrid::standard(f.t0);
    let brv = check_brv(&f, &g)?;
    let bound = power_bound(&f, &g)?;
    let integral = match cfg.beta {
        Some(beta) => {
            let s: Vec<f64> = (1..=20).map(|j| 0.5f64.powi(j)).filter(|s| s * f.t0 < 1.0).collect();
            Some(int_bound_check(&f, beta, &s)?)
        }
        None => None,
    };
    let mut profile = Table::new(&["check", "value", "passes"]);
    profile.push(vec!["max_phi".into(), num(brv.max_phi), brv.passes.to_string()]);
    profile.push(vec!["power_bound_constant".into(), num(bound.constant), bound.verified.to_string()]);
    let mut plot = Vec::new();
    if let Some(ib) = &integral {
        for row in &ib.rows {
            profile.push(vec![format!("int_ratio_s={}", num(row.s)), num(row.ratio), (row.ratio <= ib.bound).to_string()]);
            plot.push(PlotPoint {
                x: row.s,
                y: row.ratio,
                series: "int_ratio".into(),
            });
        }
    }
    let passes = brv.passes && integral.as_ref().map_or(true, |i| i.passes);
    Ok(Outcome {
        verdict: format!("{}: max φ {:.4} ≤ α = {}: {}", f.label(), brv.max_phi, f.alpha, passes),
        parameters: json!({ "f": f.label(), "beta": cfg.beta }),
        report: json!({ "brv": brv, "power_bound": bound, "int_bound": integral }),
        profile,
        plot,
    })
}

fn matrix_field(doc: &Value, key: &str) -> std::result::Result<DenseMatrix, Failure> {
    let m = doc.get(key).ok_or_else(|| usage(format!("sampled-data spec: missing field `{key}`")))?;
    let spec = json!({ "kind": "dense", "matrix": m });
    parse_operator_spec(&spec.to_string())
        .and_then(|s| s.operator.to_dense())
        .map_err(|e| usage(format!("sampled-data spec field `{key}`: {e}")))
}

fn sampled_data(cfg: &RunConfig) -> Run {
    let path = cfg.op.as_ref().ok_or_else(|| usage("missing required flag --op"))?;
    let text = fs::read_to_string(path).map_err(|e| usage(format!("--op {}: {e}", path.display())))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| usage(format!("--op {}: {e}", path.display())))?;
    let a = matrix_field(&doc, "A")?;
    let b = matrix_field(&doc, "B")?;
    let f = matrix_field(&doc, "F")?;
    let tau = doc
        .get("tau")
        .and_then(Value::as_f64)
        .ok_or_else(|| usage("sampled-data spec: field `tau` missing or not a number"))?;
    let t = sampled_data_operator(&a, &b, &f, tau).map_err(|e| match e {
        Error::InvalidArgument { .. } | Error::DimensionMismatch { .. } => usage(format!("sampled-data spec: {e}")),
        other => other.into(),
    })?;
    let dense = t.to_dense()?;
    let rho = dense.spectral_radius()?;
    let n = n_max(cfg);
    let prof = decay_profile(&Sandwich::new(&t), n)?;
    let (profile, plot) = decay_table(&prof, "norm");
    Ok(Outcome {
        verdict: format!("spectral radius {rho:.6}, sup ‖Tⁿ‖ {:.4}", prof.samples.iter().map(|s| s.norm).fold(0.0, f64::max)),
        parameters: json!({ "tau": tau, "n_max": n }),
        report: json!({ "operator": dense, "spectral_radius": rho, "powers": prof }),
        profile,
        plot,
    })
}
