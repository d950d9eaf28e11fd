//! Resolvent conditions of Kreiss, Ritt and (α,β)-RK type, δ-Stolz
//! domains, and the integral characterizations of power-boundedness and
//! of Ritt operators.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{power_samples, NORM_TOL};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::operators::{ComplexVector, LinearOperator, OperatorKind, Sandwich, ScalarKernel, Spectrum};
use crate::quadrature::adaptive_trapezoid;
use crate::resolvent::{resolvent_apply, sweep_sup, SpectralGrid, SpectralPoint};
use crate::trend::{classify, Trend};

/// Slack on the spectral radius test `r(T) ≤ 1`.
pub const SPECTRAL_SLACK: f64 = 1e-8;
pub const STOLZ_SLACK: f64 = 1e-12;
/// Excess of the circle used for near-boundary samples.
pub const BOUNDARY_EXCESS: f64 = 1.0 / 16384.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub r: f64,
    pub theta: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    /// Max over every evaluated point.
    pub constant: f64,
    pub k: Option<u32>,
    /// The global argmax first, then the per-radius maxima in schedule order.
    pub witnesses: Vec<Witness>,
    pub trend: Trend,
    pub grid: SpectralGrid,
    /// The radius schedule stopped early on ill-conditioning.
    pub truncated: bool,
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub fn per_radius(&self) -> &[Witness] {
        &self.witnesses[1.min(self.witnesses.len())..]
    }

    pub fn is_bounded(&self) -> bool {
        self.constant.is_finite() && self.trend != Trend::Growing
    }
}

fn require_spectral_radius(t: &LinearOperator) -> Result<()> {
    match t.spectral_radius() {
        Some(rho) if rho > 1.0 + SPECTRAL_SLACK => Err(Error::Hypothesis(format!(
            "spectral radius {rho} exceeds 1"
        ))),
        Some(_) => Ok(()),
        None => Err(Error::Unsupported(
            "spectral radius of this operator cannot be determined".into(),
        )),
    }
}

fn condition_sweep<F>(name: &str, k: Option<u32>, grid: &SpectralGrid, f: F) -> Result<ConditionReport>
where
    F: Fn(&SpectralPoint) -> Result<(f64, Option<f64>)> + Sync,
{
    let sweep = sweep_sup(grid, f)?;
    let per: Vec<Witness> = sweep
        .rows
        .iter()
        .map(|r| Witness {
            r: r.r,
            theta: r.theta,
            value: r.value,
        })
        .collect();
    let best = per
        .iter()
        .copied()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .ok_or_else(|| Error::Divergence("no radius could be evaluated".into()))?;
    let values: Vec<f64> = per.iter().map(|w| w.value).collect();
    let mut witnesses = vec![best];
    witnesses.extend(per);
    let mut notes = Vec::new();
    if sweep.truncated {
        notes.push("radius schedule stopped early: λI − T too ill-conditioned".into());
    }
    Ok(ConditionReport {
        condition: name.to_string(),
        constant: best.value,
        k,
        witnesses,
        trend: classify(&values),
        grid: *grid,
        truncated: sweep.truncated,
        notes,
    })
}

fn resolvent_norm(t: &LinearOperator, lambda: C64, k: u32) -> Result<(f64, Option<f64>)> {
    let rep = Sandwich::new(t).norm(&ScalarKernel::resolvent(lambda, k), NORM_TOL)?;
    Ok((rep.value, rep.condition))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KreissReport {
    /// Row `k` holds `sup (|λ|−1)ᵏ‖R(λ,T)ᵏ‖`.
    pub rows: Vec<ConditionReport>,
    pub kreiss_constant: f64,
    pub strong_kreiss_constant: f64,
    pub trend: Trend,
}

/// `(|λ|−1)ᵏ‖R(λ,T)ᵏ‖` for `k = 1..=k_max`.
pub fn kreiss_constant(t: &LinearOperator, grid: &SpectralGrid, k_max: u32) -> Result<KreissReport> {
    if k_max == 0 {
        return Err(Error::invalid("k_max", "must be ≥ 1"));
    }
    require_spectral_radius(t)?;
    let rows = (1..=k_max)
        .map(|k| {
            condition_sweep("kreiss", Some(k), grid, |p| {
                let (v, c) = resolvent_norm(t, p.lambda, k)?;
                Ok((p.excess.powi(k as i32) * v, c))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let trend = if rows.iter().any(|r| r.trend == Trend::Growing) {
        Trend::Growing
    } else if rows.iter().all(|r| r.trend == Trend::Stable) {
        Trend::Stable
    } else {
        Trend::Indeterminate
    };
    Ok(KreissReport {
        kreiss_constant: rows[0].constant,
        strong_kreiss_constant: rows.iter().map(|r| r.constant).fold(0.0, f64::max),
        rows,
        trend,
    })
}

/// `sup |λ−1|·‖R(λ,T)‖`, with angles clustered at 1.
pub fn ritt_constant(t: &LinearOperator, grid: &SpectralGrid) -> Result<ConditionReport> {
    require_spectral_radius(t)?;
    let grid = grid.with_near_one(true);
    condition_sweep("ritt", None, &grid, |p| {
        let (v, c) = resolvent_norm(t, p.lambda, 1)?;
        Ok((p.distance_to_one() * v, c))
    })
}

fn power_note(t: &LinearOperator) -> Result<(Trend, String)> {
    let p = power_samples(t, 1 << 10)?;
    Ok((p.trend, format!("sampled sup ‖Tⁿ‖ = {:.6e} ({:?})", p.sup, p.trend)))
}

/// `sup |λ−1|(|λ|−1)ᵏ‖R(λ,T)^{k+1}‖`, cross-checked against the Ritt verdict.
pub fn ritt_power_resolvent_check(t: &LinearOperator, k: u32, grid: &SpectralGrid) -> Result<ConditionReport> {
    if k == 0 {
        return Err(Error::invalid("k", "must be ≥ 1"));
    }
    require_spectral_radius(t)?;
    let g = grid.with_near_one(true);
    let mut rep = condition_sweep("ritt_power_resolvent", Some(k), &g, |p| {
        let (v, c) = resolvent_norm(t, p.lambda, k + 1)?;
        Ok((p.distance_to_one() * p.excess.powi(k as i32) * v, c))
    })?;
    let (ptrend, note) = power_note(t)?;
    rep.notes.push(note);
    if ptrend == Trend::Growing {
        rep.notes.push("powers grow: the power-boundedness hypothesis fails".into());
    }
    let ritt = ritt_constant(t, grid)?;
    if ritt.is_bounded() != rep.is_bounded() {
        rep.notes.push(format!(
            "verdict differs from ritt_constant ({:?})",
            ritt.trend
        ));
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RkReport {
    pub report: ConditionReport,
    pub alpha: f64,
    pub beta: f64,
    /// `(θ, |θ|^{1/α}‖R((1+2^{−14})e^{iθ},T)‖)` for `θ = ±2^{−i}`.
    pub boundary: Vec<(f64, f64)>,
}

/// `sup |λ−1|^α(|λ|−1)^β‖R(λ,T)‖/|λ|^{α+β−1}` plus near-boundary samples.
pub fn rk_bounded_check(t: &LinearOperator, alpha: f64, beta: f64, grid: &SpectralGrid) -> Result<RkReport> {
    if !(alpha >= 0.0 && beta >= 0.0) {
        return Err(Error::invalid("alpha", "α and β must be non-negative"));
    }
    require_spectral_radius(t)?;
    let g = grid.with_near_one(true);
    let report = condition_sweep("rk_bounded", None, &g, |p| {
        let (v, c) = resolvent_norm(t, p.lambda, 1)?;
        let w = p.distance_to_one().powf(alpha) * p.excess.powf(beta) / p.r.powf(alpha + beta - 1.0);
        Ok((w * v, c))
    })?;
    let mut boundary = Vec::new();
    if alpha > 0.0 {
        for i in 1..=14 {
            for sign in [1.0, -1.0] {
                let theta = sign * 0.5f64.powi(i);
                let p = SpectralPoint::from_excess(BOUNDARY_EXCESS, theta)?;
                let (v, _) = resolvent_norm(t, p.lambda, 1)?;
                boundary.push((theta, theta.abs().powf(1.0 / alpha) * v));
            }
        }
    }
    Ok(RkReport {
        report,
        alpha,
        beta,
        boundary,
    })
}

/// `S_c^δ = {λ ∈ 𝔻 : |1−λ|^δ/(1−|λ|) < c} ∪ {1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StolzDomain {
    pub delta: f64,
    pub c: f64,
}

impl StolzDomain {
    pub fn new(delta: f64, c: f64) -> Result<Self> {
        if !(delta >= 1.0 && c >= 1.0 && delta.is_finite() && c.is_finite()) {
            return Err(Error::invalid("stolz", "need δ ≥ 1 and c ≥ 1"));
        }
        Ok(StolzDomain { delta, c })
    }

    pub fn contains(&self, lambda: C64) -> bool {
        lambda == C64::new(1.0, 0.0) || {
            let m = lambda.norm();
            m < 1.0 && (1.0 - lambda).norm().powf(self.delta) / (1.0 - m) < self.c
        }
    }

    /// Membership in the closure, with absolute slack.
    pub fn closure_contains(&self, lambda: C64) -> bool {
        if lambda == C64::new(1.0, 0.0) {
            return true;
        }
        let m = lambda.norm();
        m <= 1.0 && (1.0 - lambda).norm().powf(self.delta) <= self.c * (1.0 - m) + STOLZ_SLACK
    }

    /// Smallest `c` whose closed domain holds every point, for this `δ`.
    pub fn minimal_constant(delta: f64, points: &[C64]) -> f64 {
        points
            .iter()
            .filter(|&&z| z != C64::new(1.0, 0.0))
            .map(|z| (1.0 - z).norm().powf(delta) / (1.0 - z.norm()))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StolzReport {
    pub domain: StolzDomain,
    pub contained: bool,
    pub violators: Vec<C64>,
    pub checked: usize,
    /// The spectrum was sampled rather than enumerated.
    pub sampled: bool,
}

const EXHAUSTIVE_INDICES: u64 = 1 << 16;

/// Spectrum points of `t`: all of them for finite operators, a dense
/// sample plus the limit for infinite diagonals.
pub fn spectrum_points(t: &LinearOperator) -> Result<(Vec<C64>, bool)> {
    match t.spectrum() {
        Some(Spectrum::Finite(v)) => Ok((v, false)),
        Some(Spectrum::SymbolClosure(s)) => {
            let mut pts: Vec<C64> = (1..=EXHAUSTIVE_INDICES).map(|j| s.value_at(j)).collect();
            let mut j = EXHAUSTIVE_INDICES as f64;
            while j < 2f64.powi(50) {
                j *= 1.1;
                pts.push(s.value_at(j as u64));
            }
            if let Some(l) = s.limit() {
                pts.push(l);
            }
            Ok((pts, true))
        }
        Some(Spectrum::Disc(_)) | None => Err(Error::Unsupported(
            "the spectrum of this operator is not enumerable".into(),
        )),
    }
}

pub fn stolz_containment(t: &LinearOperator, domain: &StolzDomain) -> Result<StolzReport> {
    let (pts, sampled) = spectrum_points(t)?;
    let violators: Vec<C64> = pts.iter().copied().filter(|&z| !domain.closure_contains(z)).collect();
    Ok(StolzReport {
        domain: *domain,
        contained: violators.is_empty(),
        violators,
        checked: pts.len(),
        sampled,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiMultReport {
    pub alpha: f64,
    pub stolz: StolzReport,
    /// `(n, ‖Tⁿ(I−T)‖, bound)`.
    pub rows: Vec<(u64, f64, f64)>,
    pub max_ratio: f64,
    pub passes: bool,
}

/// `max_{0≤s≤1} sⁿ(1−s)^α = (n/(n+α))ⁿ(α/(n+α))^α`.
pub fn quasi_peak(n: u64, alpha: f64) -> f64 {
    let nf = n as f64;
    (nf * (nf / (nf + alpha)).ln() + alpha * (alpha / (nf + alpha)).ln()).exp()
}

/// For diagonal `T` whose spectrum lies in a closed `(1/α)`-Stolz domain,
/// checks `‖Tⁿ(I−T)‖ ≤ c^α·(n/(n+α))ⁿ(α/(n+α))^α`.
pub fn quasi_mult_decay_check(t: &LinearOperator, alpha: f64, n_max: u64) -> Result<QuasiMultReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", "must lie in (0, 1)"));
    }
    if !matches!(t.kind, OperatorKind::Diagonal { .. }) {
        return Err(Error::Unsupported(
            "the spectral bound with C = 1 is only instantiated for diagonal operators".into(),
        ));
    }
    let delta = 1.0 / alpha;
    let (pts, _) = spectrum_points(t)?;
    let c = StolzDomain::minimal_constant(delta, &pts).max(2.0);
    let domain = StolzDomain::new(delta, c)?;
    let stolz = stolz_containment(t, &domain)?;
    if !stolz.contained {
        return Ok(QuasiMultReport {
            alpha,
            stolz,
            rows: Vec::new(),
            max_ratio: f64::NAN,
            passes: false,
        });
    }
    // |1−λ| ≤ c^α(1−|λ|)^α on the spectrum
    let scale = c.powf(alpha);
    let pair = Sandwich::new(t);
    let rows = crate::asymptotics::decay_schedule(n_max)
        .into_iter()
        .map(|n| {
            let v = pair.norm(&ScalarKernel::power(n).with_complement(1), NORM_TOL)?.value;
            Ok((n, v, scale * quasi_peak(n, alpha)))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_ratio = rows.iter().map(|r| r.1 / r.2).fold(0.0, f64::max);
    Ok(QuasiMultReport {
        alpha,
        stolz,
        rows,
        max_ratio,
        passes: max_ratio <= 1.0 + 1e-9,
    })
}

fn adjoint_of(t: &LinearOperator) -> Result<LinearOperator> {
    match &t.kind {
        OperatorKind::DenseMatrix { matrix } => LinearOperator::dense(matrix.adjoint()),
        OperatorKind::Diagonal { symbol } => {
            let s = symbol
                .conj()
                .ok_or_else(|| Error::Unsupported("conjugate of this symbol is not representable".into()))?;
            Ok(LinearOperator::diagonal(s)?.with_truncation(t.truncation))
        }
        _ => Err(Error::Unsupported("adjoint operator not available".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralConditionRow {
    pub r: f64,
    pub value: f64,
    pub nodes: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralConditionReport {
    pub condition: String,
    pub rows: Vec<IntegralConditionRow>,
    pub sup: f64,
    pub trend: Trend,
    /// Trend of the companion verdict (sampled powers or Ritt constant).
    pub companion_trend: Trend,
    pub companion_sup: f64,
    /// Both sides bounded, or both unbounded.
    pub consistent: bool,
}

fn integral_rows<F>(grid: &SpectralGrid, probes: &[ComplexVector], weight: impl Fn(f64) -> f64, integrand: F) -> Result<Vec<IntegralConditionRow>>
where
    F: Fn(&SpectralPoint, &ComplexVector) -> Result<f64> + Sync,
{
    grid.validate()?;
    if probes.is_empty() {
        return Err(Error::invalid("probes", "need at least one probe"));
    }
    let mut rows = Vec::new();
    for excess in grid.excesses() {
        let (mut best, mut nodes, mut converged) = (0.0f64, 0, true);
        for x in probes {
            let xn = x.norm_sqr();
            if xn == 0.0 {
                continue;
            }
            let g = |theta: f64| -> Result<f64> { integrand(&SpectralPoint::from_excess(excess, theta)?, x) };
            let ci = adaptive_trapezoid(&g, grid.n_theta, 1e-8, grid.max_theta)?;
            best = best.max(weight(excess) * ci.value / xn);
            nodes = nodes.max(ci.nodes);
            converged &= ci.converged;
        }
        rows.push(IntegralConditionRow {
            r: 1.0 + excess,
            value: best,
            nodes,
            converged,
        });
    }
    Ok(rows)
}

fn integral_report(name: &str, rows: Vec<IntegralConditionRow>, companion_trend: Trend, companion_sup: f64) -> IntegralConditionReport {
    let vals: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let trend = classify(&vals);
    let sup = vals.iter().cloned().fold(0.0, f64::max);
    let bounded = sup.is_finite() && trend != Trend::Growing;
    let companion_bounded = companion_sup.is_finite() && companion_trend != Trend::Growing;
    IntegralConditionReport {
        condition: name.to_string(),
        rows,
        sup,
        trend,
        companion_trend,
        companion_sup,
        consistent: bounded == companion_bounded,
    }
}

/// `sup_r (r−1)∫(‖R(re^{iθ},T)x‖² + ‖R(re^{iθ},T*)x‖²)dθ/‖x‖²` against
/// sampled `sup ‖Tⁿ‖`. Radii beyond `r = 2` are skipped.
pub fn gsf_integral_check(t: &LinearOperator, grid: &SpectralGrid, probes: &[ComplexVector]) -> Result<IntegralConditionReport> {
    require_spectral_radius(t)?;
    let adj = adjoint_of(t)?;
    let rows = integral_rows(grid, probes, |e| e, |p, x| {
        let a = resolvent_apply(t, p, 1, x)?.norm_sqr();
        let b = resolvent_apply(&adj, p, 1, x)?.norm_sqr();
        Ok(a + b)
    })?;
    let powers = power_samples(t, 1 << 10)?;
    Ok(integral_report("gsf_integral", rows, powers.trend, powers.sup))
}

/// `sup_r (r−1)^{2k−1}∫‖(re^{iθ}−1)R(re^{iθ},T)^{k+1}x‖²dθ/‖x‖²` against
/// the Ritt constant.
pub fn ritt_integral_check(t: &LinearOperator, k: u32, grid: &SpectralGrid, probes: &[ComplexVector]) -> Result<IntegralConditionReport> {
    if k == 0 {
        return Err(Error::invalid("k", "must be ≥ 1"));
    }
    require_spectral_radius(t)?;
    let rows = integral_rows(
        grid,
        probes,
        |e| e.powi(2 * k as i32 - 1),
        |p, x| {
            let y = resolvent_apply(t, p, k + 1, x)?;
            Ok(p.distance_to_one().powi(2) * y.norm_sqr())
        },
    )?;
    let ritt = ritt_constant(t, grid)?;
    Ok(integral_report("ritt_integral", rows, ritt.trend, ritt.constant))
}
