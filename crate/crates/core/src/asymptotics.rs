//! Decay and growth profiles, log-log exponent fits, and the two-sided
//! harnesses that compare decay of `‖TⁿS‖` with growth of the resolvent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::operators::{ComplexVector, LinearOperator, Sandwich, ScalarKernel};
use crate::quadrature::adaptive_trapezoid;
use crate::resolvent::{resolvent_apply, resolvent_sweep, GrowthProfile, SpectralGrid, SpectralPoint};
use crate::rvfunctions::{h_alpha, RVFunction};
use crate::trend::{classify, Trend};

pub const NORM_TOL: f64 = 1e-12;
pub const MIN_FIT_SAMPLES: usize = 8;
/// Fits use `n ≥ n_max/FIT_SPAN`.
pub const FIT_SPAN: u64 = 64;
pub const COMMUTATION_TOL: f64 = 1e-10;
pub const COMMUTATION_PROBES: usize = 20;
pub const PROBE_SUPPORT: usize = 64;
/// Relative change of a sup under one refinement still counted as stable.
pub const REFINEMENT_TOL: f64 = 0.10;

/// `{1..32}` followed by points spaced by `√2` from 64 up to `n_max`.
pub fn decay_schedule(n_max: u64) -> Vec<u64> {
    let mut s: Vec<u64> = (1..=n_max.min(32)).collect();
    let mut i = 0;
    loop {
        let n = (64.0 * 2f64.powf(i as f64 / 2.0)).round() as u64;
        if n > n_max {
            break;
        }
        s.push(n);
        i += 1;
    }
    if *s.last().unwrap_or(&0) != n_max {
        s.push(n_max);
    }
    s.dedup();
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub n: u64,
    pub norm: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Max absolute deviation of `log y` from the fitted line.
    pub residual: f64,
    pub samples: usize,
    pub x_min: f64,
    pub x_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub samples: Vec<DecaySample>,
    pub fit: Option<ExponentFit>,
    /// Why no fit is available, if it is not.
    pub fit_note: Option<String>,
}

impl DecayProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,norm,error\n");
        for d in &self.samples {
            let _ = writeln!(s, "{},{:.17e},{:.3e}", d.n, d.norm, d.error);
        }
        s
    }

    pub fn fitted_exponent(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

/// Least squares for `log y = slope·log x + intercept`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < MIN_FIT_SAMPLES {
        return Err(Error::invalid(
            "window",
            format!("{} samples; a fit needs at least {MIN_FIT_SAMPLES}", points.len()),
        ));
    }
    if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| !(p.1 > 0.0) || !(p.0 > 0.0)) {
        return Err(Error::invalid(
            "window",
            format!("sample {i} at x = {} has non-positive value {}", p.0, p.1),
        ));
    }
    let m = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("window", "all abscissae coincide"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - slope * x - intercept).abs())
        .fold(0.0, f64::max);
    Ok(ExponentFit {
        slope,
        intercept,
        residual,
        samples: points.len(),
        x_min: points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        x_max: points.iter().map(|p| p.0).fold(0.0, f64::max),
    })
}

/// `‖L Tⁿ R‖` on the decay schedule, with a fit over `n ≥ n_max/64`.
pub fn decay_profile(pair: &Sandwich<'_>, n_max: u64) -> Result<DecayProfile> {
    decay_profile_with_kernel(pair, ScalarKernel::identity(), n_max)
}

/// As [`decay_profile`] with `g(T)` inserted, e.g. `Tⁿ(I−T)` for a
/// complement kernel.
pub fn decay_profile_with_kernel(pair: &Sandwich<'_>, base: ScalarKernel, n_max: u64) -> Result<DecayProfile> {
    if n_max < 16 {
        return Err(Error::invalid("n_max", "must be at least 16"));
    }
    let schedule = decay_schedule(n_max);
    let samples: Vec<DecaySample> = schedule
        .par_iter()
        .map(|&n| {
            let rep = pair.norm(&base.with_power(n), NORM_TOL)?;
            Ok(DecaySample {
                n,
                norm: rep.value,
                error: rep.error,
            })
        })
        .collect::<Result<_>>()?;
    let lo = (n_max / FIT_SPAN).max(1);
    let window: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.n >= lo)
        .map(|s| (s.n as f64, s.norm))
        .collect();
    let (fit, fit_note) = match fit_exponent(&window) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(DecayProfile {
        samples,
        fit,
        fit_note,
    })
}

/// Slope of `log sup_norm` against `log(r − 1)`.
pub fn fit_growth(profile: &GrowthProfile) -> Result<ExponentFit> {
    let pts: Vec<(f64, f64)> = profile.samples.iter().map(|s| (s.excess, s.sup_norm)).collect();
    fit_exponent(&pts)
}

/// Sup of a weighted sequence with the trend of its running sup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideReport {
    /// `(n, f(n)‖TⁿS‖)` or `(r, weighted resolvent norm)`.
    pub values: Vec<(f64, f64)>,
    pub sup: f64,
    pub trend: Trend,
}

impl SideReport {
    pub fn new(values: Vec<(f64, f64)>) -> Self {
        let ys: Vec<f64> = values.iter().map(|v| v.1).collect();
        let sup = ys.iter().cloned().fold(0.0, f64::max);
        SideReport {
            trend: classify(&ys),
            values,
            sup,
        }
    }

    pub fn bounded(&self) -> bool {
        self.sup.is_finite() && self.trend != Trend::Growing
    }
}

pub(crate) fn weighted_decay(pair: &Sandwich<'_>, f: &RVFunction, n_max: u64) -> Result<SideReport> {
    let prof = decay_profile(pair, n_max)?;
    Ok(SideReport::new(
        prof.samples
            .iter()
            .map(|s| (s.n as f64, f.value(s.n as f64) * s.norm))
            .collect(),
    ))
}

fn weighted_growth(pair: &Sandwich<'_>, f: &RVFunction, k: u32, grid: &SpectralGrid) -> Result<(SideReport, bool)> {
    let prof = resolvent_sweep(pair, k, grid)?;
    let vals = prof
        .samples
        .iter()
        .map(|s| {
            let w = (k as f64 * s.excess.ln() + f.ln_value(1.0 / s.excess)).exp();
            (s.r, w * s.sup_norm)
        })
        .collect();
    Ok((SideReport::new(vals), prof.truncated))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REFINEMENT_TOL * a.abs().max(b.abs()) || a == b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Commutation {
    pub applicable: bool,
    /// `max ‖TSx − STx‖/‖x‖` over the probes.
    pub defect: f64,
    pub commutes: bool,
}

/// Checks `TS = ST` on seeded random probes.
pub fn commutation_check(t: &LinearOperator, s: &LinearOperator, seed: u64) -> Result<Commutation> {
    let n = t.probe_len(PROBE_SUPPORT);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut defect = 0.0f64;
    for _ in 0..COMMUTATION_PROBES {
        let x = t.random_probe(PROBE_SUPPORT, &mut rng)?;
        let (sx, tx) = match (s.apply(&x), t.apply(&x)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                return Ok(Commutation {
                    applicable: false,
                    defect: f64::NAN,
                    commutes: false,
                })
            }
        };
        let (tsx, stx) = match (t.apply(&sx.truncate(n)), s.apply(&tx.truncate(n))) {
            (Ok(a), Ok(b)) if sx.len() == n => (a, b),
            _ => {
                return Ok(Commutation {
                    applicable: false,
                    defect: f64::NAN,
                    commutes: false,
                })
            }
        };
        defect = defect.max(tsx.truncate(n).sub(&stx.truncate(n)).norm() / x.norm());
    }
    Ok(Commutation {
        applicable: true,
        defect,
        commutes: defect <= COMMUTATION_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub function: String,
    pub alpha: f64,
    pub k: u32,
    /// `f(n)‖TⁿS‖` over the decay schedule.
    pub decay: SideReport,
    /// `(r−1)^k f(1/(r−1)) sup_θ‖R(re^{iθ},T)ᵏS‖` over the grid.
    pub growth: SideReport,
    pub refined_decay_sup: f64,
    pub refined_growth_sup: f64,
    pub commutation: Commutation,
    pub grid_truncated: bool,
    pub passes: bool,
}

/// Computes both sides of the decay/resolvent-growth characterization for
/// `S` on the right of the powers and the resolvent.
pub fn equivalence_check_resolvent(
    t: &LinearOperator,
    s: &LinearOperator,
    f: &RVFunction,
    k: u32,
    n_max: u64,
    grid: &SpectralGrid,
) -> Result<EquivalenceReport> {
    if !(k as f64 > f.alpha) {
        return Err(Error::Hypothesis(format!(
            "the resolvent characterization needs k > α; got k = {k}, α = {}",
            f.alpha
        )));
    }
    let pair = Sandwich::new(t).right(s);
    let commutation = commutation_check(t, s, 0x5eed)?;
    let decay = weighted_decay(&pair, f, n_max)?;
    let (growth, truncated) = weighted_growth(&pair, f, k, grid)?;
    let refined_decay = weighted_decay(&pair, f, n_max * 4)?;
    let (refined_growth, truncated2) = weighted_growth(&pair, f, k, &grid.refined())?;
    let passes = decay.bounded()
        && growth.bounded()
        && close(decay.sup, refined_decay.sup)
        && close(growth.sup, refined_growth.sup);
    Ok(EquivalenceReport {
        function: f.label(),
        alpha: f.alpha,
        k,
        refined_decay_sup: refined_decay.sup,
        refined_growth_sup: refined_growth.sup,
        decay,
        growth,
        commutation,
        grid_truncated: truncated || truncated2,
        passes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlognRow {
    pub r: f64,
    pub norm: f64,
    pub h: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlognReport {
    pub alpha: f64,
    pub rows: Vec<NlognRow>,
    pub sup_ratio: f64,
    /// Min of the ratio over the schedule; a liminf estimate.
    pub inf_ratio: f64,
    pub trend: Trend,
    /// `sup n(log(n+1))^α ‖S₁TⁿS₂‖` over the decay schedule.
    pub decay_sup: f64,
    pub decay_trend: Trend,
}

/// Ratio of `‖S₁R(r,T)S₂‖` to `H_α(r−1)` for real `r ∈ (1, 4/3)`.
pub fn nlogn_resolvent_check(
    t: &LinearOperator,
    s1: Option<&LinearOperator>,
    s2: Option<&LinearOperator>,
    alpha: f64,
    radii: &[f64],
) -> Result<NlognReport> {
    if let Some(r) = radii.iter().find(|&&r| !(r > 1.0 && r < 4.0 / 3.0)) {
        return Err(Error::Domain(format!("radius {r} is outside (1, 4/3)")));
    }
    if radii.is_empty() {
        return Err(Error::invalid("radii", "empty schedule"));
    }
    let pair = Sandwich::new(t).with_left(s1).with_right(s2);
    let prof = decay_profile(&pair, 1 << 12)?;
    let decay: Vec<f64> = prof
        .samples
        .iter()
        .map(|s| {
            let n = s.n as f64;
            n * (n + 1.0).ln().powf(alpha) * s.norm
        })
        .collect();
    let decay_trend = classify(&decay);
    if decay_trend == Trend::Growing {
        return Err(Error::Hypothesis(
            "‖S₁TⁿS₂‖ does not look like O(1/(n(log n)^α)) on the schedule".into(),
        ));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(|a, b| b.total_cmp(a));
    let rows = radii
        .par_iter()
        .map(|&r| {
            let norm = pair
                .norm(&ScalarKernel::resolvent(crate::linalg::C64::new(r, 0.0), 1), NORM_TOL)?
                .value;
            let h = h_alpha(alpha, r - 1.0)?;
            Ok(NlognRow {
                r,
                norm,
                h,
                ratio: norm / h,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    Ok(NlognReport {
        alpha,
        sup_ratio: ratios.iter().cloned().fold(0.0, f64::max),
        inf_ratio: ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        trend: classify(&ratios),
        rows,
        decay_sup: decay.iter().cloned().fold(0.0, f64::max),
        decay_trend,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralRow {
    pub r: f64,
    /// Max over probes of `F_k(r²−1)·∫‖R(re^{iθ},T)ᵏSy‖²dθ/‖y‖²`.
    pub value: f64,
    pub nodes: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralReport {
    pub function: String,
    pub k: u32,
    pub rows: Vec<IntegralRow>,
    pub integral: SideReport,
    pub decay: SideReport,
    pub power_bound_trend: Trend,
    pub passes: bool,
}

/// `F_k(s) = s^{2k−1} f(1/s)²`.
pub fn f_k(f: &RVFunction, k: u32, s: f64) -> f64 {
    ((2.0 * k as f64 - 1.0) * s.ln() + 2.0 * f.ln_value(1.0 / s)).exp()
}

/// Seeded random probes suited to `op`'s domain.
pub fn default_probes(op: &LinearOperator, count: usize, seed: u64) -> Result<Vec<ComplexVector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| op.random_probe(PROBE_SUPPORT, &mut rng)).collect()
}

/// `sup ‖Tⁿ‖` samples and their trend up to `n_max`.
pub fn power_samples(t: &LinearOperator, n_max: u64) -> Result<SideReport> {
    let prof = decay_profile(&Sandwich::new(t), n_max)?;
    Ok(SideReport::new(
        prof.samples.iter().map(|s| (s.n as f64, s.norm)).collect(),
    ))
}

/// Integral form of the characterization: weighted `L²` norms of the
/// resolvent on circles, per probe, against `sup f(n)‖TⁿS‖`.
pub fn integral_equivalence_check(
    t: &LinearOperator,
    s: Option<&LinearOperator>,
    f: &RVFunction,
    k: u32,
    grid: &SpectralGrid,
    probes: &[ComplexVector],
) -> Result<IntegralReport> {
    if !(k as f64 > f.alpha + 0.5) {
        return Err(Error::Hypothesis(format!(
            "the integral characterization needs k > α + 1/2; got k = {k}, α = {}",
            f.alpha
        )));
    }
    if probes.is_empty() {
        return Err(Error::invalid("probes", "need at least one probe"));
    }
    grid.validate()?;
    let powers = power_samples(t, 1 << 10)?;
    if powers.trend == Trend::Growing {
        return Err(Error::Hypothesis(format!(
            "T does not look power-bounded: ‖Tⁿ‖ reaches {} and keeps growing",
            powers.sup
        )));
    }
    let mut rows = Vec::new();
    for excess in grid.excesses() {
        let r = 1.0 + excess;
        let weight = f_k(f, k, excess * (2.0 + excess));
        let mut best = 0.0f64;
        let mut nodes = 0;
        let mut converged = true;
        for y in probes {
            let yn2 = y.norm_sqr();
            if yn2 == 0.0 {
                continue;
            }
            let integrand = |theta: f64| -> Result<f64> {
                let p = SpectralPoint::from_excess(excess, theta)?;
                let v = resolvent_apply(t, &p, k, y)?;
                let v = match s {
                    Some(s) => s.apply(&v)?,
                    None => v,
                };
                Ok(v.norm_sqr())
            };
            let ci = adaptive_trapezoid(&integrand, grid.n_theta, 1e-8, grid.max_theta)?;
            best = best.max(weight * ci.value / yn2);
            nodes = nodes.max(ci.nodes);
            converged &= ci.converged;
        }
        rows.push(IntegralRow {
            r,
            value: best,
            nodes,
            converged,
        });
    }
    let integral = SideReport::new(rows.iter().map(|r| (r.r, r.value)).collect());
    let pair = Sandwich::new(t).with_right(s);
    let decay = weighted_decay(&pair, f, 1 << 12)?;
    let passes = integral.bounded() && decay.bounded();
    Ok(IntegralReport {
        function: f.label(),
        k,
        rows,
        integral,
        decay,
        power_bound_trend: powers.trend,
        passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{DenseMatrix, C64};
    use crate::operators::{kernel_norm, DiagonalSymbol};
    use proptest::prelude::*;

    fn example1() -> (LinearOperator, LinearOperator) {
        (
            LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j()).unwrap(),
            LinearOperator::diagonal(DiagonalSymbol::inv_pow(0.5, 1.0)).unwrap(),
        )
    }

    #[test]
    fn schedule_shape() {
        let s = decay_schedule(1 << 14);
        assert_eq!(&s[..3], &[1, 2, 3]);
        assert!(s.contains(&64) && s.contains(&(1 << 14)));
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        let window = s.iter().filter(|&&n| n >= (1 << 14) / FIT_SPAN).count();
        assert!(window >= MIN_FIT_SAMPLES);
    }

    #[test]
    fn fit_exact_and_perturbed() {
        let exact: Vec<(f64, f64)> = (1..40).map(|n| (n as f64, (n as f64).powi(-2))).collect();
        let fit = fit_exponent(&exact).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12 && fit.residual < 1e-12);
        let noisy: Vec<(f64, f64)> = (1..200)
            .map(|n| {
                let s = if n % 2 == 0 { 1.0 } else { -1.0 };
                (n as f64, 5.0 / n as f64 * (1.0 + 0.01 * s))
            })
            .collect();
        assert!((fit_exponent(&noisy).unwrap().slope + 1.0).abs() < 0.01);
        let mut bad = exact.clone();
        bad[3].1 = 0.0;
        let e = fit_exponent(&bad).unwrap_err();
        assert!(e.to_string().contains("sample 3"));
        assert!(fit_exponent(&exact[..5]).is_err());
    }

    #[test]
    fn zero_operator_profile() {
        let z = LinearOperator::zero(2);
        let id = LinearOperator::identity(2);
        let p = decay_profile(&Sandwich::new(&z).right(&id), 64).unwrap();
        assert!(p.samples.iter().all(|s| s.norm == 0.0));
        assert!(p.fit.is_none() && p.fit_note.is_some());

        let grid = SpectralGrid::new(1, 12, 64).unwrap();
        let g = resolvent_sweep(&Sandwich::new(&z), 1, &grid).unwrap();
        assert!(fit_growth(&g).unwrap().slope.abs() < 0.05);
    }

    #[test]
    fn example_one_brackets_and_exponent() {
        let (t, s) = example1();
        let p = decay_profile(&Sandwich::new(&t).right(&s), 1 << 14).unwrap();
        for d in &p.samples {
            let n = d.n as f64;
            let v = n.sqrt() * d.norm;
            let lo = (1.0 - 1.0 / n).powf(n);
            let hi = (0.5 / (n + 0.5)).sqrt() * (1.0 - 0.5 / (n + 0.5)).powf(n) * n.sqrt();
            assert!(v >= lo * (1.0 - 1e-12) && v <= hi * (1.0 + 1e-12), "n = {n}: {lo} ≤ {v} ≤ {hi}");
        }
        assert!((p.fitted_exponent().unwrap() + 0.5).abs() < 0.02);
    }

    #[test]
    fn ritt_decay_exponent() {
        let t = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j()).unwrap();
        let s = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j().complement()).unwrap();
        let p = decay_profile(&Sandwich::new(&t).right(&s), 1 << 14).unwrap();
        assert!((p.fitted_exponent().unwrap() + 1.0).abs() < 0.02);
        let k = decay_profile_with_kernel(&Sandwich::new(&t), ScalarKernel::identity().with_complement(1), 1 << 14).unwrap();
        for (a, b) in p.samples.iter().zip(&k.samples) {
            assert!((a.norm - b.norm).abs() <= 1e-12 * a.norm);
        }
    }

    #[test]
    fn diagonal_profile_matches_brute_force() {
        let (t, s) = example1();
        let p = decay_profile(&Sandwich::new(&t).right(&s), 1 << 10).unwrap();
        for d in p.samples.iter().filter(|d| [1, 7, 64, 1024].contains(&d.n)) {
            let brute = (1..=1_000_000u64)
                .map(|j| (1.0 - 1.0 / j as f64).powi(d.n as i32) / (j as f64).sqrt())
                .fold(0.0, f64::max);
            assert!((brute - d.norm).abs() <= d.error + 1e-13 * d.norm, "n = {}", d.n);
        }
    }

    #[test]
    fn submultiplicative_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = DenseMatrix::random(4, 4, &mut rng);
        let m = m.scale(C64::new(0.9 / m.spectral_radius().unwrap(), 0.0));
        let t = LinearOperator::dense(m).unwrap();
        let s = LinearOperator::dense(DenseMatrix::random(4, 4, &mut rng)).unwrap();
        let p = decay_profile(&Sandwich::new(&t).right(&s), 64).unwrap();
        let k = power_samples(&t, 64).unwrap().sup.max(1.0);
        for a in &p.samples {
            for b in p.samples.iter().filter(|b| b.n > a.n) {
                assert!(b.norm <= k * a.norm * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn trivial_equivalence() {
        let z = LinearOperator::zero(1);
        let id = LinearOperator::identity(1);
        let grid = SpectralGrid::new(1, 10, 64).unwrap();
        let rep = equivalence_check_resolvent(&z, &id, &RVFunction::constant(), 1, 64, &grid).unwrap();
        assert!(rep.decay.sup <= 1.0 && rep.growth.sup <= 1.0 + 1e-12);
        assert!(rep.passes && rep.commutation.commutes);
        let e = equivalence_check_resolvent(&z, &id, &RVFunction::power(1.0).unwrap(), 1, 64, &grid);
        assert!(matches!(e, Err(Error::Hypothesis(_))));
    }

    #[test]
    fn example_one_equivalence() {
        let (t, s) = example1();
        let grid = SpectralGrid::new(1, 14, 64).unwrap().with_near_one(true);
        let f = RVFunction::power(0.5).unwrap();
        let rep = equivalence_check_resolvent(&t, &s, &f, 1, 1 << 12, &grid).unwrap();
        assert!(rep.passes, "{rep:?}");
        // √(r−1)·‖R(r,T)S‖ tends to 1/2
        assert!((rep.growth.sup - 0.5).abs() < 0.02);
        assert!(rep.growth.values.iter().all(|v| v.1 >= 0.45 - 1e-9));
    }

    #[test]
    fn nlogn_example_three() {
        let b = DiagonalSymbol::inv_pow(1.0, 1.0);
        let t = LinearOperator::shift(DiagonalSymbol::constant(C64::new(1.0, 0.0)), crate::operators::SequenceSpace::C0).unwrap();
        let s = LinearOperator::diagonal(b).unwrap().with_space(crate::operators::SequenceSpace::C0);
        let radii: Vec<f64> = (4..=14).map(|j| 1.0 + 0.5f64.powi(j)).collect();
        let rep = nlogn_resolvent_check(&t, None, Some(&s), 0.0, &radii).unwrap();
        for row in &rep.rows {
            // Σ_j 1/(j r^j) = −log(1 − 1/r)
            let exact = -(1.0 - 1.0 / row.r).ln();
            assert!((row.norm - exact).abs() < 1e-9 * exact, "{row:?}");
        }
        assert!(rep.inf_ratio > 0.05 && rep.sup_ratio < 2.0);
        assert!(nlogn_resolvent_check(&t, None, Some(&s), 0.0, &[1.5]).is_err());
        // H_α ≡ 1 for α > 1
        let b2 = DiagonalSymbol::LogWeight { exponent: 1.0, log_power: 2.0, offset: 1.0 };
        let s2 = LinearOperator::diagonal(b2).unwrap().with_space(crate::operators::SequenceSpace::C0);
        let rep2 = nlogn_resolvent_check(&t, None, Some(&s2), 2.0, &radii[..3]).unwrap();
        for row in &rep2.rows {
            assert_eq!(row.ratio, row.norm);
        }
    }

    #[test]
    fn integral_trivial_case() {
        let z = LinearOperator::zero(2);
        let grid = SpectralGrid::new(1, 10, 64).unwrap();
        let probes = default_probes(&z, 3, 1).unwrap();
        let rep = integral_equivalence_check(&z, None, &RVFunction::constant(), 1, &grid, &probes).unwrap();
        for row in &rep.rows {
            let exact = (row.r * row.r - 1.0) * 2.0 * std::f64::consts::PI / (row.r * row.r);
            assert!((row.value - exact).abs() < 1e-12 * exact);
        }
        assert!(rep.passes);
        let e = integral_equivalence_check(&z, None, &RVFunction::power(0.5).unwrap(), 1, &grid, &probes);
        assert!(matches!(e, Err(Error::Hypothesis(_))));
    }

    #[test]
    fn integral_example_one_with_k_two() {
        let (t, s) = example1();
        let grid = SpectralGrid::new(1, 12, 256).unwrap();
        let probes = default_probes(&t, 2, 3).unwrap();
        let f = RVFunction::power(0.5).unwrap();
        let rep = integral_equivalence_check(&t, Some(&s), &f, 2, &grid, &probes).unwrap();
        assert!(rep.passes, "{rep:?}");
        // direct quadrature oracle at one radius for the first probe
        let row = &rep.rows[3];
        let y = &probes[0];
        let n = 1 << 14;
        let mut acc = 0.0;
        for m in 0..n {
            let lam = C64::from_polar(row.r, 2.0 * std::f64::consts::PI * m as f64 / n as f64);
            for (j, v) in y.as_slice().iter().enumerate() {
                let jf = (j + 1) as f64;
                let d = 1.0 - 1.0 / jf;
                acc += (v / ((lam - d) * (lam - d)) / jf.sqrt()).norm_sqr();
            }
        }
        let direct = f_k(&f, 2, row.r * row.r - 1.0) * acc * 2.0 * std::f64::consts::PI / n as f64 / y.norm_sqr();
        assert!(direct <= row.value * (1.0 + 1e-6));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn scaling_s_scales_both_sides(c in 0.1f64..10.0) {
            let (t, s) = example1();
            let sc = LinearOperator::diagonal(DiagonalSymbol::inv_pow(0.5, 1.0).affine(C64::new(0.0, 0.0), C64::new(c, 0.0))).unwrap();
            let grid = SpectralGrid::new(2, 8, 64).unwrap().without_refinement();
            let f = RVFunction::power(0.5).unwrap();
            let pair = Sandwich::new(&t).right(&s);
            let pair_c = Sandwich::new(&t).right(&sc);
            let (a, b) = (weighted_decay(&pair, &f, 256).unwrap(), weighted_decay(&pair_c, &f, 256).unwrap());
            prop_assert!((b.sup - c * a.sup).abs() <= 1e-12 * b.sup);
            let (a, _) = weighted_growth(&pair, &f, 1, &grid).unwrap();
            let (b, _) = weighted_growth(&pair_c, &f, 1, &grid).unwrap();
            prop_assert!((b.sup - c * a.sup).abs() <= 1e-12 * b.sup);
        }

        #[test]
        fn forward_direction_holds(which in 0usize..3, extra in 0u32..2) {
            let t = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j()).unwrap();
            let (s, f) = match which {
                0 => (DiagonalSymbol::inv_pow(0.5, 1.0), RVFunction::power(0.5).unwrap()),
                1 => (DiagonalSymbol::one_minus_inv_j().complement(), RVFunction::power(1.0).unwrap()),
                _ => (DiagonalSymbol::inv_pow(1.0, 1.0), RVFunction::power(1.0).unwrap()),
            };
            let s = LinearOperator::diagonal(s).unwrap();
            let k = f.alpha.floor() as u32 + 1 + extra;
            let grid = SpectralGrid::new(1, 12, 64).unwrap().without_refinement();
            let (g, _) = weighted_growth(&Sandwich::new(&t).right(&s), &f, k, &grid).unwrap();
            prop_assert!(g.sup.is_finite() && g.trend != Trend::Growing);
        }
    }

    #[test]
    fn kernel_norm_resolvent_example_two() {
        let t = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_sqrt_j()).unwrap();
        let s = LinearOperator::functional(DiagonalSymbol::inv_pow(1.0, 1.0)).unwrap();
        let r = 1.0 + 0.5f64.powi(6);
        let v = kernel_norm(Some(&s), &t, &ScalarKernel::resolvent(C64::new(r, 0.0), 1), None, 1e-12).unwrap();
        // ‖SR(r,T)‖² = Σ g(j) with g(s) = 1/((r−1)s + √s)² decreasing, so
        // ∫₁^∞ g/4 ≤ Σ g(j) ≤ g(1) + ∫₁^∞ g
        let i = 2.0 * (r.ln() - (r - 1.0).ln() - 1.0 / r);
        assert!(v.value.powi(2) >= i / 4.0 && v.value.powi(2) <= i + 1.0 / (r * r));
    }
}
