//! α-bounded regularly varying functions: a small catalog, a sampled
//! verifier, and the summation and integral bounds built on them.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::{E, LN_2};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::operators::KahanSum;
use crate::quadrature::{integrate, integrate_to_infinity};
use crate::trend::{classify, Trend};

/// `sup_{t>0} t/((e+t)log(e+t))`, attained near `t ≈ 5.834`.
pub const LOG_PHI_MAX: f64 = 0.317_844_432_899_373;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum RvKind {
    /// `t^a`.
    Power { exponent: f64 },
    /// `t^a (log(e+t))^q`.
    PowerLog { exponent: f64, log_power: f64 },
    /// `log(e+t)`.
    Log,
    /// `1`.
    Constant,
    /// `φ = 0` on `[2^{n²}, 2^{(n+1)²−1})` and `φ = 1` on
    /// `[2^{(n+1)²−1}, 2^{(n+1)²})`, `f(1) = 1`. Evaluated in base-2 logs so
    /// that `t = 2^{n²}` stays representable.
    PiecewiseExample,
    /// `g^γ`.
    Powered { base: Box<RvKind>, gamma: f64 },
    /// A user closure; the derivative falls back to centered differences.
    Custom {
        label: String,
        f: ScalarFn,
        f_prime: Option<ScalarFn>,
    },
}

impl fmt::Debug for RvKind {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "{}", self.label())
    }
}

/// `ln(e + e^x)` without overflow.
fn ln_e_plus_exp(x: f64) -> f64 {
    if x > 1.0 {
        x + (1.0 - x).exp().ln_1p()
    } else {
        (E + x.exp()).ln()
    }
}

/// `t/(e+t)` at `t = e^x`.
fn frac_at(x: f64) -> f64 {
    1.0 / (1.0 + (1.0 - x).exp())
}

fn piecewise_log2(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let m = (u + 1.0).sqrt().floor();
    let m_sq = m * m;
    if u >= m_sq - 1.0 && u < m_sq {
        (m - 1.0) + (u - (m_sq - 1.0))
    } else {
        u.sqrt().floor()
    }
}

fn piecewise_phi(u: f64) -> f64 {
    if u < 0.0 {
        return 0.0;
    }
    let m = (u + 1.0).sqrt().floor();
    if m >= 1.0 && u >= m * m - 1.0 && u < m * m {
        1.0
    } else {
        0.0
    }
}

impl RvKind {
    fn label(&self) -> String {
        match self {
            RvKind::Power { exponent } => format!("pow:{exponent}"),
            RvKind::PowerLog { exponent, log_power } => format!("pow_log:{exponent},{log_power}"),
            RvKind::Log => "log".into(),
            RvKind::Constant => "const".into(),
            RvKind::PiecewiseExample => "piecewise_phi".into(),
            RvKind::Powered { base, gamma } => format!("({})^{gamma}", base.label()),
            RvKind::Custom { label, .. } => label.clone(),
        }
    }

    /// `ln f(e^x)`.
    fn ln_value(&self, x: f64) -> f64 {
        match self {
            RvKind::Power { exponent } => exponent * x,
            RvKind::PowerLog { exponent, log_power } => exponent * x + log_power * ln_e_plus_exp(x).ln(),
            RvKind::Log => ln_e_plus_exp(x).ln(),
            RvKind::Constant => 0.0,
            RvKind::PiecewiseExample => LN_2 * piecewise_log2(x / LN_2),
            RvKind::Powered { base, gamma } => gamma * base.ln_value(x),
            RvKind::Custom { f, .. } => {
                let v = f(x.exp());
                if v > 0.0 {
                    v.ln()
                } else {
                    f64::NAN
                }
            }
        }
    }

    /// `φ(e^x) = t f′(t)/f(t)`.
    fn phi(&self, x: f64) -> f64 {
        match self {
            RvKind::Power { exponent } => *exponent,
            RvKind::PowerLog { exponent, log_power } => exponent + log_power * frac_at(x) / ln_e_plus_exp(x),
            RvKind::Log => frac_at(x) / ln_e_plus_exp(x),
            RvKind::Constant => 0.0,
            RvKind::PiecewiseExample => piecewise_phi(x / LN_2),
            RvKind::Powered { base, gamma } => gamma * base.phi(x),
            RvKind::Custom { f, f_prime, .. } => {
                let t = x.exp();
                let d = match f_prime {
                    Some(fp) => fp(t),
                    None => {
                        let h = 1e-6 * t;
                        (f(t + h) - f(t - h)) / (2.0 * h)
                    }
                };
                t * d / f(t)
            }
        }
    }
}

/// A function together with its claimed index bound `alpha` and the
/// threshold `t0` from which the bound is claimed.
#[derive(Debug, Clone)]
pub struct RVFunction {
    pub kind: RvKind,
    pub alpha: f64,
    pub t0: f64,
}

fn parse_number(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => s.trim().parse().ok(),
    }
}

impl RVFunction {
    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent >= 0.0 && exponent.is_finite()) {
            return Err(Error::invalid("exponent", "must be a finite non-negative number"));
        }
        Ok(RVFunction {
            kind: RvKind::Power { exponent },
            alpha: exponent,
            t0: 1.0,
        })
    }

    /// `t^a (log(e+t))^q`, claimed index `a + q·LOG_PHI_MAX`.
    pub fn power_log(exponent: f64, log_power: f64) -> Result<Self> {
        if !(exponent >= 0.0 && log_power >= 0.0 && exponent.is_finite() && log_power.is_finite()) {
            return Err(Error::invalid("pow_log", "exponents must be finite and non-negative"));
        }
        Ok(RVFunction {
            kind: RvKind::PowerLog { exponent, log_power },
            alpha: exponent + log_power * LOG_PHI_MAX * (1.0 + 1e-12),
            t0: 1.0,
        })
    }

    pub fn log() -> Self {
        RVFunction {
            kind: RvKind::Log,
            alpha: 1.0,
            t0: 1.0,
        }
    }

    pub fn constant() -> Self {
        RVFunction {
            kind: RvKind::Constant,
            alpha: 0.0,
            t0: 1.0,
        }
    }

    pub fn piecewise_example() -> Self {
        RVFunction {
            kind: RvKind::PiecewiseExample,
            alpha: 1.0,
            t0: 1.0,
        }
    }

    pub fn custom(label: &str, f: ScalarFn, f_prime: Option<ScalarFn>, alpha: f64, t0: f64) -> Result<Self> {
        if !(alpha >= 0.0 && t0 > 0.0) {
            return Err(Error::invalid("alpha", "need alpha ≥ 0 and t0 > 0"));
        }
        Ok(RVFunction {
            kind: RvKind::Custom {
                label: label.to_string(),
                f,
                f_prime,
            },
            alpha,
            t0,
        })
    }

    /// Parses `pow:a`, `pow_log:a,q`, `log`, `const` or `piecewise_phi`.
    /// Numbers may be written as fractions such as `1/2`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |why: String| Error::Parse {
            field: "f".into(),
            reason: why,
        };
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let nums = |count: usize| -> Result<Vec<f64>> {
            let a = arg.ok_or_else(|| bad(format!("`{name}` needs {count} parameter(s)")))?;
            let v: Option<Vec<f64>> = a.split(',').map(parse_number).collect();
            match v {
                Some(v) if v.len() == count => Ok(v),
                _ => Err(bad(format!("`{s}`: expected {count} numeric parameter(s)"))),
            }
        };
        match name {
            "pow" => Self::power(nums(1)?[0]),
            "pow_log" => {
                let p = nums(2)?;
                Self::power_log(p[0], p[1])
            }
            "log" => Ok(Self::log()),
            "const" => Ok(Self::constant()),
            "piecewise_phi" => Ok(Self::piecewise_example()),
            other => Err(bad(format!("unknown function `{other}`"))),
        }
    }

    pub fn label(&self) -> String {
        self.kind.label()
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    /// `ln f(t)`.
    pub fn ln_value(&self, t: f64) -> f64 {
        self.kind.ln_value(t.ln())
    }

    /// `ln f(e^x)`, usable where `t` itself would overflow.
    pub fn ln_value_at_log(&self, x: f64) -> f64 {
        self.kind.ln_value(x)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.ln_value(t).exp()
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.kind.phi(t.ln())
    }

    pub fn phi_at_log(&self, x: f64) -> f64 {
        self.kind.phi(x)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.phi(t) * self.value(t) / t
    }

    /// `f(1)·exp(∫₁ᵗ φ(s)/s ds)`, integrating in `log s`.
    pub fn reconstruct(&self, t: f64) -> Result<f64> {
        let x = t.ln();
        let i = integrate(|u| self.kind.phi(u), 0.0, x, 1e-13)?;
        Ok(self.value(1.0) * i.exp())
    }

    /// `ln(f(λt)/f(t))` with `t = 2^{log2_t}`.
    pub fn log2_ratio(&self, log2_t: f64, lambda: f64) -> f64 {
        if let RvKind::PiecewiseExample = self.kind {
            return piecewise_log2(log2_t + lambda.log2()) - piecewise_log2(log2_t);
        }
        let x = log2_t * LN_2;
        (self.kind.ln_value(x + lambda.ln()) - self.kind.ln_value(x)) / LN_2
    }
}

/// `h = f^γ` with index `αγ`.
pub fn gamma_power(f: &RVFunction, gamma: f64) -> Result<RVFunction> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    Ok(RVFunction {
        kind: RvKind::Powered {
            base: Box::new(f.kind.clone()),
            gamma,
        },
        alpha: f.alpha * gamma,
        t0: f.t0,
    })
}

/// Points `t_min·ratio^i ≤ t_max`, held as natural logs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricGrid {
    pub ln_min: f64,
    pub ln_max: f64,
    pub ratio: f64,
}

impl GeometricGrid {
    pub fn new(t_min: f64, t_max: f64, ratio: f64) -> Result<Self> {
        if !(t_min > 0.0 && t_max >= t_min && ratio > 1.0) {
            return Err(Error::invalid("grid", "need 0 < t_min ≤ t_max and ratio > 1"));
        }
        Ok(GeometricGrid {
            ln_min: t_min.ln(),
            ln_max: t_max.ln(),
            ratio,
        })
    }

    /// Grid between `2^a` and `2^b`, for ranges beyond f64.
    pub fn log2_range(a: f64, b: f64, ratio: f64) -> Result<Self> {
        if !(b >= a && ratio > 1.0) {
            return Err(Error::invalid("grid", "need a ≤ b and ratio > 1"));
        }
        Ok(GeometricGrid {
            ln_min: a * LN_2,
            ln_max: b * LN_2,
            ratio,
        })
    }

    /// Default grid `[t0, 10⁸]` with ratio 1.05.
    pub fn standard(t0: f64) -> Self {
        GeometricGrid {
            ln_min: t0.ln(),
            ln_max: 1e8f64.ln().max(t0.ln()),
            ratio: 1.05,
        }
    }

    pub fn log_points(&self) -> Vec<f64> {
        let step = self.ratio.ln();
        let n = ((self.ln_max - self.ln_min) / step).floor() as usize;
        (0..=n).map(|i| self.ln_min + i as f64 * step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrvReport {
    pub function: String,
    pub alpha: f64,
    pub max_phi: f64,
    /// `t` at which the max of φ was seen (as `ln t`).
    pub witness_ln_t: f64,
    /// Min of φ over the upper half of the grid; a liminf diagnostic only.
    pub tail_min_phi: f64,
    pub monotone: bool,
    pub samples: usize,
    pub passes: bool,
}

const PHI_SLACK: f64 = 1e-9;

/// Samples φ on the grid and checks `φ ≤ α` and monotonicity from `t0`.
pub fn check_brv(f: &RVFunction, grid: &GeometricGrid) -> Result<BrvReport> {
    let pts = grid.log_points();
    if grid.ln_min < f.t0.ln() - 1e-12 {
        return Err(Error::invalid("grid", "grid starts below the threshold t0"));
    }
    let mut max_phi = f64::NEG_INFINITY;
    let mut witness = grid.ln_min;
    let mut monotone = true;
    let mut prev = f64::NEG_INFINITY;
    let mut tail_min = f64::INFINITY;
    let mid = 0.5 * (grid.ln_min + grid.ln_max);
    for &x in &pts {
        let lv = f.ln_value_at_log(x);
        let phi = f.phi_at_log(x);
        if !lv.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidFunction(format!(
                "{} is not positive and finite at t = e^{x}",
                f.label()
            )));
        }
        if lv < prev - 1e-12 * prev.abs().max(1.0) {
            monotone = false;
        }
        prev = lv;
        if phi > max_phi {
            max_phi = phi;
            witness = x;
        }
        if x >= mid {
            tail_min = tail_min.min(phi);
        }
    }
    Ok(BrvReport {
        function: f.label(),
        alpha: f.alpha,
        max_phi,
        witness_ln_t: witness,
        tail_min_phi: tail_min,
        monotone,
        samples: pts.len(),
        passes: monotone && max_phi <= f.alpha + PHI_SLACK,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBoundWitness {
    /// `C = f(t0)/t0^α`.
    pub constant: f64,
    pub t0: f64,
    /// `max f(t)/(C t^α)` on the grid; at most 1 when the bound holds.
    pub max_ratio: f64,
    /// `max f(2t)/f(t)` on the grid, to compare with `2^α`.
    pub doubling: f64,
    pub verified: bool,
}

/// Witness constants for `f(t) ≤ C t^α` on `[t0, ∞)`.
pub fn power_bound(f: &RVFunction, grid: &GeometricGrid) -> Result<PowerBoundWitness> {
    let rep = check_brv(f, grid)?;
    if !rep.passes {
        return Err(Error::Hypothesis(format!(
            "{} is not {}-bounded regularly varying on the grid (max φ = {})",
            f.label(),
            f.alpha,
            rep.max_phi
        )));
    }
    let ln_c = f.ln_value(f.t0) - f.alpha * f.t0.ln();
    let mut max_ratio = f64::NEG_INFINITY;
    let mut doubling = f64::NEG_INFINITY;
    for x in grid.log_points() {
        max_ratio = max_ratio.max(f.ln_value_at_log(x) - ln_c - f.alpha * x);
        doubling = doubling.max(f.ln_value_at_log(x + LN_2) - f.ln_value_at_log(x));
    }
    let (max_ratio, doubling) = (max_ratio.exp(), doubling.exp());
    Ok(PowerBoundWitness {
        constant: ln_c.exp(),
        t0: f.t0,
        max_ratio,
        doubling,
        verified: max_ratio <= 1.0 + 1e-9 && doubling <= 2f64.powf(f.alpha) * (1.0 + 1e-9),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CnSumRow {
    pub r: f64,
    /// Partial sum; the full series lies in `[sum, sum + tail]`.
    pub sum: f64,
    pub tail: f64,
    pub terms: u64,
    /// `Σ c(n)/rⁿ · (r−1)^{β+1} f(1/(r−1))`.
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnSumReport {
    pub rows: Vec<CnSumRow>,
    pub sup_q: f64,
    /// `max c(n) f(n)/n^β` over the summed indices; used for the tails.
    pub envelope: f64,
    pub trend: Trend,
    pub passes: bool,
}

const CN_MAX_TERMS: u64 = 1 << 28;

/// Evaluates the ratio `Q(r)` of the weighted series to its predicted
/// growth along `radii` (sorted so that `r ↓ 1`).
pub fn cn_sum_bound_check<C>(f: &RVFunction, beta: f64, c: C, radii: &[f64]) -> Result<CnSumReport>
where
    C: Fn(u64) -> f64,
{
    if !(beta > f.alpha - 1.0) {
        return Err(Error::Hypothesis(format!(
            "β = {beta} must exceed α − 1 = {}",
            f.alpha - 1.0
        )));
    }
    if radii.is_empty() || radii.iter().any(|&r| !(r > 1.0 && r.is_finite())) {
        return Err(Error::Domain("every radius must exceed 1".into()));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(|a, b| b.total_cmp(a));
    let t_start = f.t0.ceil().max(1.0) as u64;
    let mut envelope = 0.0f64;
    let mut rows = Vec::with_capacity(radii.len());
    for &r in &radii {
        let ln_r = (r - 1.0).ln_1p();
        let mut acc = KahanSum::default();
        let mut n = 0u64;
        let mut tail = f64::INFINITY;
        while n < CN_MAX_TERMS {
            let cn = c(n);
            if !(cn > 0.0 && cn.is_finite()) {
                return Err(Error::invalid("c", format!("c({n}) = {cn} is not positive and finite")));
            }
            if n >= t_start {
                let ln_env = cn.ln() + f.ln_value(n as f64) - beta * (n as f64).ln();
                envelope = envelope.max(ln_env.exp());
            }
            acc.add((cn.ln() - n as f64 * ln_r).exp());
            n += 1;
            if n % 1024 == 0 && n > t_start {
                // terms past n are at most envelope·m^β/f(n)·r^{−m}
                let b = beta.max(0.0);
                let ratio = ((n + 1) as f64 / n as f64).powf(b) * (-ln_r).exp();
                if ratio < 1.0 {
                    let ln_first = envelope.ln() + beta * (n as f64).ln() - f.ln_value(n as f64) - n as f64 * ln_r;
                    tail = ln_first.exp() / (1.0 - ratio);
                    if tail <= 1e-16 * acc.total() {
                        break;
                    }
                }
            }
        }
        if !tail.is_finite() {
            return Err(Error::Divergence(format!("series at r = {r} did not settle")));
        }
        let sum = acc.total();
        let ln_scale = (beta + 1.0) * (r - 1.0).ln() + f.ln_value(1.0 / (r - 1.0));
        rows.push(CnSumRow {
            r,
            sum,
            tail,
            terms: n,
            q: sum * ln_scale.exp(),
        });
    }
    let qs: Vec<f64> = rows.iter().map(|r| r.q).collect();
    let sup_q = qs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let trend = classify(&qs);
    Ok(CnSumReport {
        rows,
        sup_q,
        envelope,
        trend,
        passes: sup_q.is_finite() && trend != Trend::Growing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntBoundRow {
    pub s: f64,
    pub integral: f64,
    /// `integral · s^{β+1} f(1/s)`.
    pub ratio: f64,
    pub cutoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntBoundReport {
    pub rows: Vec<IntBoundRow>,
    pub sup_ratio: f64,
    /// `δ = α − β`.
    pub delta: f64,
    /// `Γ(β+1) + 1/(1−δ)`.
    pub bound: f64,
    pub passes: bool,
}

/// Compares `∫_{t0}^∞ t^β e^{−st}/f(t) dt` with `s^{−(β+1)}/f(1/s)`.
pub fn int_bound_check(f: &RVFunction, beta: f64, s_schedule: &[f64]) -> Result<IntBoundReport> {
    if beta <= -1.0 {
        return Err(Error::Divergence(format!(
            "β = {beta} ≤ −1: the integral blows up at the lower end as t0 → 0 and the ratio is undefined"
        )));
    }
    if !(beta > f.alpha - 1.0) {
        return Err(Error::Hypothesis(format!(
            "β = {beta} must exceed α − 1 = {}",
            f.alpha - 1.0
        )));
    }
    let delta = f.alpha - beta;
    let bound = gamma(beta + 1.0) + 1.0 / (1.0 - delta);
    let mut rows = Vec::with_capacity(s_schedule.len());
    for &s in s_schedule {
        if !(s > 0.0 && s * f.t0 < 1.0) {
            return Err(Error::Domain(format!("s = {s} is not in (0, 1/t0)")));
        }
        let integrand = |t: f64| (beta * t.ln() - s * t - f.ln_value(t)).exp();
        let tail = integrate_to_infinity(integrand, f.t0, 1.0 / s, 1e-16)?;
        let ratio = tail.value * ((beta + 1.0) * s.ln() + f.ln_value(1.0 / s)).exp();
        rows.push(IntBoundRow {
            s,
            integral: tail.value,
            ratio,
            cutoff: tail.cutoff,
        });
    }
    let sup_ratio = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(IntBoundReport {
        rows,
        sup_ratio,
        delta,
        bound,
        passes: sup_ratio <= bound * (1.0 + 1e-9),
    })
}

/// `|log s|^{1−α}` for α < 1, `log|log s|` for α = 1 and `1` for α > 1.
pub fn h_alpha(alpha: f64, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < (-1.0f64).exp()) {
        return Err(Error::Domain(format!("s = {s} is not in (0, 1/e)")));
    }
    if !(alpha >= 0.0) {
        return Err(Error::invalid("alpha", "must be non-negative"));
    }
    let l = s.ln().abs();
    Ok(if alpha < 1.0 {
        l.powf(1.0 - alpha)
    } else if alpha == 1.0 {
        l.ln()
    } else {
        1.0
    })
}

/// Every catalog function, with its default claim.
pub fn catalog() -> Vec<RVFunction> {
    vec![
        RVFunction::power(0.5).expect("valid"),
        RVFunction::power(1.0).expect("valid"),
        RVFunction::power_log(0.5, 1.0).expect("valid"),
        RVFunction::log(),
        RVFunction::constant(),
        RVFunction::piecewise_example(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn power_is_exact() {
        let f = RVFunction::power(0.7).unwrap();
        let rep = check_brv(&f, &GeometricGrid::standard(1.0)).unwrap();
        assert!(rep.passes);
        assert_eq!(rep.max_phi, 0.7);
        let w = power_bound(&f, &GeometricGrid::standard(1.0)).unwrap();
        assert_eq!(w.constant, 1.0);
        assert!(w.verified);
    }

    #[test]
    fn log_passes_with_one() {
        let f = RVFunction::log();
        let rep = check_brv(&f, &GeometricGrid::standard(1.0)).unwrap();
        assert!(rep.passes && rep.max_phi < 1.0);
        // φ = t/((e+t)log(e+t)) evaluated directly at the witness
        let t = rep.witness_ln_t.exp();
        let direct = t / ((E + t) * (E + t).ln());
        assert!((rep.max_phi - direct).abs() < 1e-14);
        let w = power_bound(&f, &GeometricGrid::standard(1.0)).unwrap();
        assert!((w.constant - (E + 1.0).ln()).abs() < 1e-14);
        assert!(w.verified);
    }

    #[test]
    fn log_phi_max_is_the_supremum() {
        let best = (0..200_000)
            .map(|i| {
                let t = 5.0 + i as f64 * 1e-5;
                t / ((E + t) * (E + t).ln())
            })
            .fold(0.0, f64::max);
        assert!(best <= LOG_PHI_MAX && LOG_PHI_MAX - best < 1e-10);
    }

    #[test]
    fn piecewise_example_is_one_bounded() {
        let f = RVFunction::piecewise_example();
        let grid = GeometricGrid::log2_range(0.0, 400.0, 1.05).unwrap();
        let rep = check_brv(&f, &grid).unwrap();
        assert!(rep.passes);
        assert_eq!(rep.max_phi, 1.0);
        let h = gamma_power(&f, 2.0).unwrap();
        let rep = check_brv(&h, &grid).unwrap();
        assert!(rep.passes && rep.max_phi == 2.0);
    }

    #[test]
    fn piecewise_ratios() {
        let f = RVFunction::piecewise_example();
        for n0 in 1..6u32 {
            let lambda = 2f64.powi(2 * n0 as i32);
            for n in n0..60 {
                let u = (n * n) as f64;
                assert_eq!(f.log2_ratio(u, lambda), 0.0, "n = {n}");
            }
        }
        for n in 0..60u32 {
            let u = ((n + 1) * (n + 1) - 1) as f64;
            assert!(f.log2_ratio(u, 2.0) >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn reconstruction_matches_for_smooth_functions() {
        for f in catalog().into_iter().filter(|f| !matches!(f.kind, RvKind::PiecewiseExample)) {
            for x in [0.5f64, 3.0, 40.0, 1e4, 1e8] {
                let rel = (f.reconstruct(x).unwrap() / f.value(x) - 1.0).abs();
                assert!(rel < 1e-6, "{} at {x}: {rel}", f.label());
            }
        }
        // kinks sit at integer base-2 exponents; integrate piecewise there
        let f = RVFunction::piecewise_example();
        let u = 30.5f64;
        let mut acc = 0.0;
        for k in 0..=30 {
            let hi = (k as f64 + 1.0).min(u);
            acc += integrate(|v| f.phi_at_log(v * LN_2), k as f64, hi, 1e-14).unwrap();
        }
        assert!((acc - piecewise_log2(u)).abs() < 1e-9);
    }

    #[test]
    fn cn_sum_constant_is_r() {
        let radii: Vec<f64> = (1..=16).map(|j| 1.0 + 0.5f64.powi(j)).collect();
        let rep = cn_sum_bound_check(&RVFunction::constant(), 0.0, |_| 1.0, &radii).unwrap();
        for row in &rep.rows {
            assert!((row.q - row.r).abs() < 1e-12, "{row:?}");
        }
        assert!(rep.passes);
    }

    #[test]
    fn cn_sum_linear_is_r() {
        let radii: Vec<f64> = (1..=12).map(|j| 1.0 + 0.5f64.powi(j)).collect();
        let f = RVFunction::power(1.0).unwrap();
        let rep = cn_sum_bound_check(&f, 1.0, |_| 1.0, &radii).unwrap();
        for row in &rep.rows {
            assert!((row.q - row.r).abs() < 1e-12);
        }
    }

    #[test]
    fn cn_sum_sqrt_stays_bounded() {
        let radii: Vec<f64> = (1..=16).map(|j| 1.0 + 0.5f64.powi(j)).collect();
        let f = RVFunction::power(0.5).unwrap();
        let c = |n: u64| if n == 0 { 1.0 } else { (n as f64).powf(-0.5) };
        let rep = cn_sum_bound_check(&f, 0.0, c, &radii).unwrap();
        assert!(rep.passes, "{rep:?}");
        // Σ n^{−1/2} r^{−n} ~ Γ(1/2)(r−1)^{−1/2}
        let last = rep.rows.last().unwrap();
        assert!((last.q - std::f64::consts::PI.sqrt()).abs() < 0.02);
        assert!(cn_sum_bound_check(&f, -0.6, c, &radii).is_err());
    }

    #[test]
    fn int_bound_examples() {
        let s: Vec<f64> = (1..=16).map(|j| 0.5f64.powi(j)).collect();
        let rep = int_bound_check(&RVFunction::constant(), 0.0, &s).unwrap();
        for row in &rep.rows {
            // ∫_1^∞ e^{−st} dt = e^{−s}/s
            assert!((row.ratio - (-row.s).exp()).abs() < 1e-10, "{row:?}");
        }
        let rep = int_bound_check(&RVFunction::power(1.0).unwrap(), 1.0, &s).unwrap();
        for row in &rep.rows {
            assert!((row.ratio - (-row.s).exp()).abs() < 1e-10);
        }
        let rep = int_bound_check(&RVFunction::power(0.5).unwrap(), 0.0, &s).unwrap();
        assert!((rep.bound - 3.0).abs() < 1e-14);
        assert!(rep.passes && rep.sup_ratio <= 2.0);
        // ratio = s^{1/2}∫_1^∞ t^{−1/2}e^{−st} = Γ(1/2, s)
        let last = rep.rows.last().unwrap();
        let exact = std::f64::consts::PI.sqrt() * statrs::function::erf::erfc(last.s.sqrt());
        assert!((last.ratio - exact).abs() < 1e-9);
        assert!(int_bound_check(&RVFunction::constant(), -1.0, &s).is_err());
    }

    #[test]
    fn h_alpha_branches() {
        assert!((h_alpha(0.0, (-2.0f64).exp()).unwrap() - 2.0).abs() < 1e-15);
        assert!((h_alpha(1.0, (-E).exp()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(h_alpha(2.0, 0.1).unwrap(), 1.0);
        assert!(h_alpha(0.5, 0.5).is_err());
        assert!(h_alpha(0.5, 0.0).is_err());
    }

    #[test]
    fn parsing() {
        assert_eq!(RVFunction::parse("pow:1/2").unwrap().alpha, 0.5);
        let f = RVFunction::parse("pow_log:0.5,1").unwrap();
        assert!((f.alpha - 0.5 - LOG_PHI_MAX).abs() < 1e-9);
        assert!(RVFunction::parse("log").is_ok());
        assert!(RVFunction::parse("const").is_ok());
        assert!(RVFunction::parse("piecewise_phi").is_ok());
        assert!(RVFunction::parse("pow").is_err());
        assert!(RVFunction::parse("exp").is_err());
    }

    #[test]
    fn custom_uses_finite_differences() {
        let f = RVFunction::custom("sqrt", Arc::new(|t: f64| t.sqrt()), None, 0.5, 1.0).unwrap();
        assert!((f.phi(17.0) - 0.5).abs() < 1e-8);
        assert!(check_brv(&f, &GeometricGrid::standard(1.0)).unwrap().passes);
        let bad = RVFunction::custom("neg", Arc::new(|_t: f64| -1.0), None, 0.5, 1.0).unwrap();
        assert!(matches!(
            check_brv(&bad, &GeometricGrid::standard(1.0)),
            Err(Error::InvalidFunction(_))
        ));
    }

    proptest! {
        #[test]
        fn gamma_power_scales_phi(which in 0usize..6, gamma_ in 0.1f64..4.0, x in 0.0f64..60.0) {
            let f = &catalog()[which];
            let h = gamma_power(f, gamma_).unwrap();
            prop_assert!((h.phi_at_log(x) - gamma_ * f.phi_at_log(x)).abs() < 1e-12);
            let grid = GeometricGrid::new(1.0, 1e6, 1.2).unwrap();
            if check_brv(f, &grid).unwrap().passes {
                prop_assert!(check_brv(&h, &grid).unwrap().passes);
            }
        }

        #[test]
        fn doubling_bounded_by_two_to_alpha(which in 0usize..6, x in 0.0f64..200.0) {
            let f = &catalog()[which];
            let r = f.ln_value_at_log(x + LN_2) - f.ln_value_at_log(x);
            prop_assert!(r <= f.alpha * LN_2 + 1e-12);
        }
    }
}
