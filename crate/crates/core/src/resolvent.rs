//! Resolvents, resolvent powers, contour reconstruction of powers and the
//! operator Parseval identity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Lu, C64, ZERO};
use crate::operators::{
    operator_norm, resolvent_binomial, ComplexVector, LinearOperator, OperatorKind, PowerBound,
    Sandwich, ScalarKernel,
};

/// A point `λ = re^{iθ}` with `r > 1`.
///
/// The excess `r − 1` is stored separately so that radii very close to 1
/// keep full relative precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub r: f64,
    pub excess: f64,
    pub theta: f64,
    pub lambda: C64,
}

impl SpectralPoint {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r > 1.0 && r.is_finite()) {
            return Err(Error::Domain(format!("|λ| = {r} is not in |λ| > 1")));
        }
        Self::from_excess(r - 1.0, theta)
    }

    /// `λ = (1 + excess)e^{iθ}`.
    pub fn from_excess(excess: f64, theta: f64) -> Result<Self> {
        if !(excess > 0.0 && excess.is_finite() && theta.is_finite()) {
            return Err(Error::Domain(format!("radius excess {excess} must be positive")));
        }
        let r = 1.0 + excess;
        let theta = theta.rem_euclid(2.0 * PI);
        Ok(SpectralPoint {
            r,
            excess,
            theta,
            lambda: C64::from_polar(r, theta),
        })
    }

    /// `|λ − 1|`, accurate for λ close to 1.
    pub fn distance_to_one(&self) -> f64 {
        // |re^{iθ} − 1|² = (r−1)² + 4r·sin²(θ/2)
        let s = (self.theta / 2.0).sin();
        (self.excess * self.excess + 4.0 * self.r * s * s).sqrt()
    }
}

/// Radii `r_j = 1 + 2^{−j}` for `j_min ≤ j ≤ j_max` and `n_theta` angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub j_min: u32,
    pub j_max: u32,
    pub n_theta: usize,
    pub auto_refine: bool,
    /// Relative change of the per-circle sup below which doubling stops.
    pub tolerance: f64,
    pub max_theta: usize,
    /// Adds angles `±2^{−i}` clustered at λ = 1.
    pub near_one: bool,
}

impl Default for SpectralGrid {
    fn default() -> Self {
        SpectralGrid {
            j_min: 1,
            j_max: 20,
            n_theta: 1024,
            auto_refine: true,
            tolerance: 1e-3,
            max_theta: 1 << 16,
            near_one: false,
        }
    }
}

impl SpectralGrid {
    pub fn new(j_min: u32, j_max: u32, n_theta: usize) -> Result<Self> {
        let g = SpectralGrid {
            j_min,
            j_max,
            n_theta,
            ..Default::default()
        };
        g.validate()?;
        Ok(g)
    }

    /// Parses `jmin:jmax:ntheta`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = |why: &str| Error::Parse {
            field: "grid".into(),
            reason: format!("`{s}`: {why}"),
        };
        if parts.len() != 3 {
            return Err(bad("expected jmin:jmax:ntheta"));
        }
        let j_min = parts[0].trim().parse().map_err(|_| bad("jmin is not an integer"))?;
        let j_max = parts[1].trim().parse().map_err(|_| bad("jmax is not an integer"))?;
        let n = parts[2].trim().parse().map_err(|_| bad("ntheta is not an integer"))?;
        Self::new(j_min, j_max, n).map_err(|e| bad(&e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.j_min > self.j_max {
            return Err(Error::invalid("grid", "j_min exceeds j_max"));
        }
        if self.j_max > 50 {
            return Err(Error::invalid("grid", "j_max above 50 leaves no precision in r − 1"));
        }
        if self.n_theta < 64 || !self.n_theta.is_power_of_two() {
            return Err(Error::invalid("n_theta", "must be a power of two ≥ 64"));
        }
        if self.max_theta < self.n_theta {
            return Err(Error::invalid("max_theta", "must be at least n_theta"));
        }
        Ok(())
    }

    pub fn with_near_one(mut self, on: bool) -> Self {
        self.near_one = on;
        self
    }

    pub fn without_refinement(mut self) -> Self {
        self.auto_refine = false;
        self
    }

    /// `r − 1` for every radius, decreasing.
    pub fn excesses(&self) -> Vec<f64> {
        (self.j_min..=self.j_max).map(|j| 0.5f64.powi(j as i32)).collect()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.excesses().into_iter().map(|e| 1.0 + e).collect()
    }

    /// One refinement step: twice the angles and two more radii.
    pub fn refined(&self) -> Self {
        SpectralGrid {
            n_theta: self.n_theta * 2,
            max_theta: self.max_theta.max(self.n_theta * 2),
            j_max: (self.j_max + 2).min(50),
            ..*self
        }
    }

    fn cluster_angles(&self, j: u32) -> Vec<f64> {
        (0..=j + 4)
            .flat_map(|i| {
                let a = 0.5f64.powi(i as i32);
                [a, -a]
            })
            .collect()
    }
}

fn check_lambda(t: &LinearOperator, lambda: C64) -> Result<()> {
    if lambda.norm() <= 1.0 {
        return Err(Error::Domain(format!("|λ| = {} ≤ 1", lambda.norm())));
    }
    if let Some(rho) = t.spectral_radius() {
        if lambda.norm() <= rho {
            return Err(Error::Domain(format!(
                "|λ| = {} does not exceed the spectral radius {rho}",
                lambda.norm()
            )));
        }
    }
    Ok(())
}

/// `R(λ,T)ᵏx`.
pub fn resolvent_apply(t: &LinearOperator, point: &SpectralPoint, k: u32, x: &ComplexVector) -> Result<ComplexVector> {
    if k == 0 {
        return Err(Error::invalid("k", "resolvent power must be ≥ 1"));
    }
    resolvent_apply_at(t, point.lambda, k, x)
}

fn resolvent_apply_at(t: &LinearOperator, lambda: C64, k: u32, x: &ComplexVector) -> Result<ComplexVector> {
    check_lambda(t, lambda)?;
    match &t.kind {
        OperatorKind::DenseMatrix { matrix } if matrix.is_square() => {
            if x.len() != matrix.rows() {
                return Err(Error::DimensionMismatch {
                    expected: format!("ℂ^{}", matrix.rows()),
                    found: x.len(),
                });
            }
            let lu = Lu::factor(&matrix.shifted_negation(lambda))?;
            let mut v = x.as_slice().to_vec();
            for _ in 0..k {
                v = lu.solve(&v);
            }
            ComplexVector::new(v)
        }
        OperatorKind::Diagonal { symbol } => {
            t.apply(x)?; // dimension check
            let kern = ScalarKernel::resolvent(lambda, k);
            ComplexVector::new(
                x.as_slice()
                    .iter()
                    .enumerate()
                    .map(|(i, v)| kern.value(symbol.value_at(i as u64 + 1)) * v)
                    .collect(),
            )
        }
        OperatorKind::Composite { .. } if t.is_finite_dimensional() => {
            let d = LinearOperator::dense(t.to_dense()?)?;
            resolvent_apply_at(&d, lambda, k, x)
        }
        _ => neumann_apply(t, lambda, k, x, 1e-15),
    }
}

const NEUMANN_MAX_TERMS: u64 = 1_000_000;

/// Truncated `Σ binom(n+k−1,k−1) Tⁿx/λ^{n+k}` with a certified tail.
pub fn neumann_apply(t: &LinearOperator, lambda: C64, k: u32, x: &ComplexVector, tol: f64) -> Result<ComplexVector> {
    let pb: PowerBound = t.power_bound()?;
    let r = lambda.norm();
    let q = pb.rate / r;
    if q >= 1.0 {
        return Err(Error::Divergence(format!(
            "Neumann ratio ρ/|λ| = {q} is not below 1"
        )));
    }
    let xn = x.norm();
    let mut acc = x.scale(ZERO);
    let mut tn = x.clone();
    let inv = 1.0 / lambda;
    let mut lam_pow = inv.powu(k);
    for n in 0..NEUMANN_MAX_TERMS {
        let coeff = resolvent_binomial(n, k) * lam_pow;
        acc = acc.add(&tn.scale(coeff));
        // tail Σ_{m>n} binom(m+k−1,k−1) C ρ^m‖x‖/r^{m+k}
        let m = n + 1;
        let ratio = (m + k as u64) as f64 / (m + 1) as f64 * q;
        let next = resolvent_binomial(m, k) * pb.bound(m) * xn / r.powi(k as i32) / r.powf(m as f64);
        let tail = if pb.vanishes_from.is_some_and(|z| m >= z) {
            0.0
        } else if ratio < 1.0 {
            next / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        if tail <= tol * acc.norm().max(f64::MIN_POSITIVE) || tail == 0.0 {
            return Ok(acc);
        }
        tn = t.apply(&tn)?;
        if tn.norm() == 0.0 {
            return Ok(acc);
        }
        lam_pow *= inv;
    }
    Err(Error::Divergence("Neumann series did not reach its tolerance".into()))
}

/// `g(T)x` for a scalar kernel `g`.
pub fn apply_kernel(t: &LinearOperator, kernel: &ScalarKernel, x: &ComplexVector) -> Result<ComplexVector> {
    if let OperatorKind::Diagonal { symbol } = &t.kind {
        t.apply(x)?;
        if let Some((lambda, _)) = kernel.resolvent {
            check_lambda(t, lambda)?;
        }
        return ComplexVector::new(
            x.as_slice()
                .iter()
                .enumerate()
                .map(|(i, v)| kernel.value(symbol.value_at(i as u64 + 1)) * v)
                .collect(),
        );
    }
    let mut y = t.power_apply(kernel.power as i64, x)?;
    for _ in 0..kernel.complement {
        y = y.sub(&t.apply(&y)?);
    }
    if let Some((lambda, k)) = kernel.resolvent {
        y = resolvent_apply_at(t, lambda, k, &y)?;
    }
    if kernel.factor != 1.0 {
        y = y.scale(C64::new(kernel.factor, 0.0));
    }
    Ok(y)
}

/// `‖L g(T) R x‖` for a sandwich and a vector.
pub fn sandwich_apply(s: &Sandwich<'_>, kernel: &ScalarKernel, x: &ComplexVector) -> Result<ComplexVector> {
    let mut y = match s.right {
        Some(r) => r.apply(x)?,
        None => x.clone(),
    };
    y = apply_kernel(s.t, kernel, &y)?;
    if let Some(l) = s.left {
        y = l.apply(&y)?;
    }
    Ok(y)
}

/// `binom(n+k−1,k−1)^{−1}·(r^{n+k}/2π)∮ e^{iθ(n+k)} R(re^{iθ},T)ᵏ dθ` by the
/// `n_theta`-point trapezoid rule.
pub fn reconstruct_power(t: &LinearOperator, n: u64, k: u32, r: f64, n_theta: usize) -> Result<DenseMatrix> {
    if k == 0 {
        return Err(Error::invalid("k", "must be ≥ 1"));
    }
    if n_theta == 0 {
        return Err(Error::invalid("n_theta", "must be positive"));
    }
    let m = t.to_dense()?;
    if !m.is_square() {
        return Err(Error::invalid("T", "must be square"));
    }
    let rho = m.spectral_radius()?;
    if !(r > 1.0 && r > rho) {
        return Err(Error::Domain(format!(
            "contour radius {r} must exceed 1 and the spectral radius {rho}"
        )));
    }
    let dim = m.rows();
    let terms: Vec<DenseMatrix> = (0..n_theta)
        .into_par_iter()
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / n_theta as f64;
            let lambda = C64::from_polar(r, theta);
            let lu = Lu::factor(&m.shifted_negation(lambda))?;
            let mut p = DenseMatrix::identity(dim);
            for _ in 0..k {
                lu.solve_matrix_in_place(&mut p);
            }
            let phase = C64::from_polar(1.0, theta * (n + k as u64) as f64);
            Ok(p.scale(phase))
        })
        .collect::<Result<_>>()?;
    let mut sum = DenseMatrix::zeros(dim, dim);
    for term in &terms {
        sum = &sum + term;
    }
    let scale = r.powf((n + k as u64) as f64) / (n_theta as f64 * resolvent_binomial(n, k));
    Ok(sum.scale(C64::new(scale, 0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParsevalReport {
    /// `(1/2π)∫‖S R(re^{iθ},T)ᵏ x‖² dθ` by the trapezoid rule.
    pub lhs: f64,
    /// `Σ_{n ≤ n_trunc} ‖binom(n+k−1,k−1) S Tⁿx‖²/r^{2(n+k)}`.
    pub rhs: f64,
    pub residual: f64,
    /// Certified bound on the discarded series terms.
    pub tail_bound: f64,
    pub n_theta: usize,
    pub n_trunc: u64,
}

/// Tail `Σ_{n > n_trunc}` of the Parseval series, bounded through a power
/// bound `‖Tⁿ‖ ≤ Cρⁿ` and `‖S‖`.
fn parseval_tail(pb: &PowerBound, s_norm: f64, x_norm: f64, k: u32, r: f64, n_trunc: u64) -> Result<f64> {
    let m = n_trunc + 1;
    if pb.vanishes_from.is_some_and(|z| m >= z) {
        return Ok(0.0);
    }
    let q = (pb.rate / r).powi(2);
    let ratio = ((m + k as u64) as f64 / (m + 1) as f64).powi(2) * q;
    if ratio >= 1.0 {
        return Err(Error::Divergence(format!(
            "Parseval tail not certifiable: term ratio bound {ratio} ≥ 1 at n = {m}"
        )));
    }
    let first = (resolvent_binomial(m, k) * s_norm * pb.bound(m) * x_norm).powi(2)
        / r.powf(2.0 * (m + k as u64) as f64);
    Ok(first / (1.0 - ratio))
}

/// Smallest truncation whose certified Parseval tail is below `target`.
pub fn parseval_truncation(t: &LinearOperator, s: Option<&LinearOperator>, k: u32, r: f64, x: &ComplexVector, target: f64) -> Result<u64> {
    let pb = t.power_bound()?;
    let s_norm = match s {
        Some(s) => operator_norm(s, 1e-12)?.upper(),
        None => 1.0,
    };
    let mut n = 8u64;
    while n < 1 << 24 {
        if let Ok(tail) = parseval_tail(&pb, s_norm, x.norm(), k, r, n) {
            if tail <= target {
                // bisect down to the smallest adequate truncation
                let (mut lo, mut hi) = (n / 2, n);
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    match parseval_tail(&pb, s_norm, x.norm(), k, r, mid) {
                        Ok(t) if t <= target => hi = mid,
                        _ => lo = mid,
                    }
                }
                return Ok(hi);
            }
        }
        n *= 2;
    }
    Err(Error::Divergence("no truncation reaches the requested tail".into()))
}

/// Both sides of the operator Parseval identity.
pub fn parseval_check(
    t: &LinearOperator,
    s: Option<&LinearOperator>,
    k: u32,
    r: f64,
    x: &ComplexVector,
    n_theta: usize,
    n_trunc: u64,
) -> Result<ParsevalReport> {
    if k == 0 {
        return Err(Error::invalid("k", "must be ≥ 1"));
    }
    if n_theta == 0 {
        return Err(Error::invalid("n_theta", "must be positive"));
    }
    if !(r > 1.0) {
        return Err(Error::Domain(format!("radius {r} must exceed 1")));
    }
    let pb = t.power_bound().map_err(|e| {
        Error::Divergence(format!("tail bound not certifiable: {e}"))
    })?;
    let s_norm = match s {
        Some(s) => operator_norm(s, 1e-12)?.upper(),
        None => 1.0,
    };
    let tail_bound = parseval_tail(&pb, s_norm, x.norm(), k, r, n_trunc)?;
    let apply_s = |v: ComplexVector| -> Result<ComplexVector> {
        match s {
            Some(s) => s.apply(&v),
            None => Ok(v),
        }
    };
    let vals: Vec<f64> = (0..n_theta)
        .into_par_iter()
        .map(|i| {
            let lambda = C64::from_polar(r, 2.0 * PI * i as f64 / n_theta as f64);
            let y = resolvent_apply_at(t, lambda, k, x)?;
            Ok(apply_s(y)?.norm_sqr())
        })
        .collect::<Result<_>>()?;
    let lhs = vals.iter().sum::<f64>() / n_theta as f64;

    let mut rhs = crate::operators::KahanSum::default();
    let mut tn = x.clone();
    for n in 0..=n_trunc {
        let c = resolvent_binomial(n, k) / r.powf((n + k as u64) as f64);
        rhs.add(c * c * apply_s(tn.clone())?.norm_sqr());
        if n < n_trunc {
            tn = t.apply(&tn)?;
        }
    }
    let rhs = rhs.total();
    Ok(ParsevalReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        tail_bound,
        n_theta,
        n_trunc,
    })
}

/// Per-radius sup over the angle grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusSup {
    pub r: f64,
    pub excess: f64,
    pub value: f64,
    /// Angle of the maximizing node.
    pub theta: f64,
    pub n_theta: usize,
    pub converged: bool,
    /// Worst condition number seen on this circle, for dense operators.
    pub condition: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub rows: Vec<RadiusSup>,
    /// Set when the schedule stopped early because `λI − T` became too
    /// ill-conditioned.
    pub truncated: bool,
}

pub const CONDITION_LIMIT: f64 = 1e12;

/// Evaluates `f` on the grid and returns per-radius sups, doubling the
/// angle count when refinement is enabled.
pub fn sweep_sup<F>(grid: &SpectralGrid, f: F) -> Result<Sweep>
where
    F: Fn(&SpectralPoint) -> Result<(f64, Option<f64>)> + Sync,
{
    grid.validate()?;
    let mut rows = Vec::new();
    let mut truncated = false;
    for (idx, excess) in grid.excesses().into_iter().enumerate() {
        let j = grid.j_min + idx as u32;
        let eval = |thetas: &[f64]| -> Result<Vec<(f64, f64, Option<f64>)>> {
            thetas
                .par_iter()
                .map(|&th| {
                    let p = SpectralPoint::from_excess(excess, th)?;
                    let (v, c) = f(&p)?;
                    Ok((v, p.theta, c))
                })
                .collect()
        };
        let mut n = grid.n_theta;
        let base: Vec<f64> = crate::quadrature::nodes(n).collect();
        let mut pts = eval(&base)?;
        if grid.near_one {
            pts.extend(eval(&grid.cluster_angles(j))?);
        }
        let best = |pts: &[(f64, f64, Option<f64>)]| {
            pts.iter().fold((f64::NEG_INFINITY, 0.0), |acc, p| {
                if p.0 > acc.0 {
                    (p.0, p.1)
                } else {
                    acc
                }
            })
        };
        let (mut value, mut theta) = best(&pts);
        let mut converged = !grid.auto_refine;
        while grid.auto_refine && 2 * n <= grid.max_theta {
            let odd: Vec<f64> = (0..n).map(|m| PI * (2 * m + 1) as f64 / n as f64).collect();
            pts.extend(eval(&odd)?);
            n *= 2;
            let (v, th) = best(&pts);
            let change = (v - value).abs();
            value = v;
            theta = th;
            if change <= grid.tolerance * v.abs() {
                converged = true;
                break;
            }
        }
        let condition = pts.iter().filter_map(|p| p.2).reduce(f64::max);
        if condition.is_some_and(|c| c > CONDITION_LIMIT || !c.is_finite()) {
            truncated = true;
            break;
        }
        rows.push(RadiusSup {
            r: 1.0 + excess,
            excess,
            value,
            theta,
            n_theta: n,
            converged,
            condition,
        });
    }
    Ok(Sweep { rows, truncated })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub r: f64,
    pub excess: f64,
    pub sup_norm: f64,
    pub theta: f64,
    pub n_theta_used: usize,
    pub converged: bool,
}

/// Samples `(r, sup_θ‖L R(re^{iθ},T)ᵏ R‖)` for radii decreasing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthProfile {
    pub k: u32,
    pub samples: Vec<GrowthSample>,
    /// Schedule stopped early on ill-conditioning.
    pub truncated: bool,
}

impl GrowthProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,excess,sup_norm,n_theta_used,flags\n");
        for g in &self.samples {
            let mut flags = Vec::new();
            if !g.converged {
                flags.push("unconverged");
            }
            if self.truncated {
                flags.push("schedule_truncated");
            }
            let _ = writeln!(
                s,
                "{:.17e},{:.17e},{:.17e},{},{}",
                g.r,
                g.excess,
                g.sup_norm,
                g.n_theta_used,
                flags.join("|")
            );
        }
        s
    }
}

/// Per-radius sups of `‖L·R(λ,T)ᵏ·R‖` over the grid.
pub fn resolvent_sweep(pair: &Sandwich<'_>, k: u32, grid: &SpectralGrid) -> Result<GrowthProfile> {
    if k == 0 {
        return Err(Error::invalid("k", "must be ≥ 1"));
    }
    let sweep = sweep_sup(grid, |p| {
        let rep = pair.norm(&ScalarKernel::resolvent(p.lambda, k), 1e-12)?;
        Ok((rep.value, rep.condition))
    })?;
    Ok(GrowthProfile {
        k,
        samples: sweep
            .rows
            .iter()
            .map(|r| GrowthSample {
                r: r.r,
                excess: r.excess,
                sup_norm: r.value,
                theta: r.theta,
                n_theta_used: r.n_theta,
                converged: r.converged,
            })
            .collect(),
        truncated: sweep.truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::DiagonalSymbol;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scaled_random(seed: u64, n: usize, rho: f64) -> LinearOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DenseMatrix::random(n, n, &mut rng);
        let s = rho / m.spectral_radius().unwrap();
        LinearOperator::dense(m.scale(C64::new(s, 0.0))).unwrap()
    }

    #[test]
    fn resolvent_examples() {
        let zero = LinearOperator::dense(DenseMatrix::zeros(1, 1)).unwrap();
        let x = ComplexVector::from_real(&[3.0]).unwrap();
        let p = SpectralPoint::new(2.0, 0.0).unwrap();
        let y = resolvent_apply(&zero, &p, 1, &x).unwrap();
        assert!((y.as_slice()[0].re - 1.5).abs() < 1e-15);

        let d = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j()).unwrap();
        let e2 = ComplexVector::basis(2, 2).unwrap();
        let y = resolvent_apply(&d, &SpectralPoint::new(1.5, 0.0).unwrap(), 2, &e2).unwrap();
        assert!((y.as_slice()[1] - C64::new(1.0, 0.0)).norm() < 1e-15);

        assert!(SpectralPoint::new(1.0, 0.0).is_err());
    }

    #[test]
    fn resolvent_solves_the_equation() {
        let t = scaled_random(5, 6, 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = ComplexVector::random(6, &mut rng).unwrap();
        let p = SpectralPoint::new(1.2, 0.7).unwrap();
        let y = resolvent_apply(&t, &p, 1, &x).unwrap();
        let back = y.scale(p.lambda).sub(&t.apply(&y).unwrap());
        assert!(back.sub(&x).norm() < 1e-10 * x.norm());
    }

    #[test]
    fn neumann_matches_direct_solve() {
        let shift = LinearOperator::shift(DiagonalSymbol::inv_pow(1.0, 0.9), crate::operators::SequenceSpace::L2).unwrap();
        let x = ComplexVector::from_real(&[1.0, -2.0, 0.5, 3.0]).unwrap();
        let lambda = C64::new(1.3, 0.4);
        let y = neumann_apply(&shift, lambda, 2, &x, 1e-15).unwrap();
        // check (λ − T)² y = x
        let once = y.scale(lambda).sub(&shift.apply(&y).unwrap().truncate(y.len()));
        let twice = once.scale(lambda).sub(&shift.apply(&once).unwrap().truncate(once.len()));
        assert!(twice.sub(&x).norm() < 1e-12);
    }

    #[test]
    fn reconstruct_scalar() {
        let a = LinearOperator::dense(DenseMatrix::from_real_rows(&[vec![0.5]]).unwrap()).unwrap();
        let p = reconstruct_power(&a, 3, 1, 2.0, 64).unwrap();
        assert!((p[(0, 0)].re - 0.125).abs() < 1e-14);
        assert!(reconstruct_power(&a, 3, 1, 1.0, 64).is_err());
        let z = LinearOperator::dense(DenseMatrix::zeros(1, 1)).unwrap();
        assert!(reconstruct_power(&z, 1, 1, 2.0, 64).unwrap()[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn parseval_examples() {
        let z = LinearOperator::dense(DenseMatrix::zeros(1, 1)).unwrap();
        let x = ComplexVector::from_real(&[2.0]).unwrap();
        let rep = parseval_check(&z, None, 1, 1.7, &x, 64, 5).unwrap();
        assert!((rep.lhs - 4.0 / 1.7f64.powi(2)).abs() < 1e-14);
        assert!(rep.residual < 1e-14);
        assert_eq!(rep.tail_bound, 0.0);

        let h = LinearOperator::diagonal(DiagonalSymbol::explicit(vec![C64::new(0.5, 0.0)]).unwrap()).unwrap();
        let one = ComplexVector::from_real(&[1.0]).unwrap();
        let rep = parseval_check(&h, None, 1, 2.0, &one, 256, 60).unwrap();
        assert!((rep.rhs - 4.0 / 15.0).abs() < 1e-15);
        assert!(rep.residual < 1e-14);
    }

    #[test]
    fn resolvent_identity() {
        let t = scaled_random(9, 5, 0.95);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = ComplexVector::random(5, &mut rng).unwrap();
        let (l, m) = (SpectralPoint::new(1.3, 0.2).unwrap(), SpectralPoint::new(1.1, 2.0).unwrap());
        let lhs = resolvent_apply(&t, &l, 1, &x).unwrap().sub(&resolvent_apply(&t, &m, 1, &x).unwrap());
        let rr = resolvent_apply(&t, &l, 1, &resolvent_apply(&t, &m, 1, &x).unwrap()).unwrap();
        let rhs = rr.scale(m.lambda - l.lambda);
        assert!(lhs.sub(&rhs).norm() <= 1e-10 * lhs.norm());
    }

    #[test]
    fn sweep_of_zero_operator() {
        let z = LinearOperator::dense(DenseMatrix::zeros(1, 1)).unwrap();
        let grid = SpectralGrid::new(1, 6, 64).unwrap();
        let prof = resolvent_sweep(&Sandwich::new(&z), 1, &grid).unwrap();
        for s in &prof.samples {
            assert!((s.sup_norm - 1.0 / s.r).abs() < 1e-12);
        }
        assert!(prof.to_csv().starts_with("r,excess"));
    }

    #[test]
    fn example_one_resolvent_norm_is_five() {
        let t = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j()).unwrap();
        let s = LinearOperator::diagonal(DiagonalSymbol::inv_pow(0.5, 1.0)).unwrap();
        let rep = Sandwich::new(&t)
            .right(&s)
            .norm(&ScalarKernel::resolvent(C64::new(1.01, 0.0), 1), 1e-13)
            .unwrap();
        assert!((rep.value - 5.0).abs() < 1e-9);
    }

    #[test]
    fn grid_parsing() {
        let g = SpectralGrid::parse("2:14:256").unwrap();
        assert_eq!((g.j_min, g.j_max, g.n_theta), (2, 14, 256));
        assert!(SpectralGrid::parse("2:14").is_err());
        assert!(SpectralGrid::parse("2:14:100").is_err());
        assert!(SpectralGrid::parse("5:1:128").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn reconstruction_is_radius_invariant(seed in 0u64..1000, n in 0u64..12, k in 1u32..4) {
            let t = scaled_random(seed, 4, 0.9);
            let a = reconstruct_power(&t, n, k, 1.1, 512).unwrap();
            let b = reconstruct_power(&t, n, k, 1.3, 512).unwrap();
            let direct = t.to_dense().unwrap().pow(n);
            let scale = direct.max_abs().max(1.0);
            prop_assert!((&a - &b).max_abs() < 1e-8 * scale);
            prop_assert!((&a - &direct).max_abs() < 1e-8 * scale);
        }

        #[test]
        fn parseval_tail_is_monotone(seed in 0u64..1000, k in 1u32..4) {
            let t = scaled_random(seed, 3, 0.8);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = ComplexVector::random(3, &mut rng).unwrap();
            let short = parseval_check(&t, None, k, 1.5, &x, 1024, 40).unwrap();
            let long = parseval_check(&t, None, k, 1.5, &x, 1024, 80).unwrap();
            // the extra terms are covered by the short truncation's tail bound
            prop_assert!(long.rhs - short.rhs <= short.tail_bound * (1.0 + 1e-9) + 1e-15);
        }
    }
}
