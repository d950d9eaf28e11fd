//! Uniform trapezoid rule on the circle with automatic doubling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const DEFAULT_NODES: usize = 1024;
pub const MAX_NODES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleIntegral {
    /// `∫₀^{2π} f(θ) dθ`.
    pub value: f64,
    pub nodes: usize,
    /// Change between the last two refinements.
    pub last_change: f64,
    pub converged: bool,
}

/// `θ_m = 2πm/n`.
pub fn nodes(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |m| 2.0 * PI * m as f64 / n as f64)
}

/// Trapezoid sum `(2π/n) Σ f(θ_m)` evaluated in parallel with ordered
/// summation, so results do not depend on the thread count.
pub fn trapezoid<F>(f: &F, n: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let vals: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|m| f(2.0 * PI * m as f64 / n as f64))
        .collect::<Result<_>>()?;
    Ok(2.0 * PI * vals.iter().sum::<f64>() / n as f64)
}

/// Doubles the node count from `n0` until successive values differ by at
/// most `rtol` relative, or `n_max` is reached.
pub fn adaptive_trapezoid<F>(f: &F, n0: usize, rtol: f64, n_max: usize) -> Result<CircleIntegral>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if n0 == 0 || !n0.is_power_of_two() {
        return Err(Error::invalid("n_theta", "node count must be a power of two"));
    }
    let mut n = n0;
    let mut sum: f64 = {
        let vals: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|m| f(2.0 * PI * m as f64 / n as f64))
            .collect::<Result<_>>()?;
        vals.iter().sum()
    };
    let mut value = 2.0 * PI * sum / n as f64;
    loop {
        if 2 * n > n_max {
            return Ok(CircleIntegral {
                value,
                nodes: n,
                last_change: f64::NAN,
                converged: false,
            });
        }
        // new nodes are the odd ones of the doubled grid
        let m2 = 2 * n;
        let odd: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|m| f(2.0 * PI * (2 * m + 1) as f64 / m2 as f64))
            .collect::<Result<_>>()?;
        sum += odd.iter().sum::<f64>();
        n = m2;
        let next = 2.0 * PI * sum / n as f64;
        let change = (next - value).abs();
        value = next;
        if change <= rtol * value.abs() {
            return Ok(CircleIntegral {
                value,
                nodes: n,
                last_change: change,
                converged: true,
            });
        }
    }
}

/// `∫_a^b f` by double-exponential quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let out = ::quadrature::double_exponential::integrate(f, a, b, abs_tol);
    if !out.integral.is_finite() {
        return Err(Error::Divergence(format!("integral over [{a}, {b}] is not finite")));
    }
    Ok(out.integral)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailIntegral {
    pub value: f64,
    /// Right end of the last panel.
    pub cutoff: f64,
    pub panels: usize,
}

const MAX_PANELS: usize = 20_000;

/// `∫_a^∞ f` over panels that double in length up to `scale` and then have
/// length `scale`. Integration stops once a panel contributes less than
/// `rel` of the running total and the integrand at its end is below the
/// same fraction (per unit length).
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, rel: f64) -> Result<TailIntegral> {
    if !(a > 0.0 && scale > 0.0 && a.is_finite() && scale.is_finite()) {
        return Err(Error::invalid("interval", "need a > 0 and a finite positive length scale"));
    }
    let mut total = 0.0f64;
    let mut lo = a;
    for panels in 1..=MAX_PANELS {
        let hi = if lo < scale { (2.0 * lo).min(lo + scale).max(lo * 1.0001) } else { lo + scale };
        let guess = (hi - lo) * f(lo).abs().max(f(hi).abs());
        let part = integrate(&f, lo, hi, 1e-15 * (total.abs() + guess).max(f64::MIN_POSITIVE))?;
        total += part;
        lo = hi;
        let edge = f(hi).abs() * scale;
        if total != 0.0 && part.abs() <= rel * total.abs() && edge <= rel * total.abs() && hi > scale {
            return Ok(TailIntegral { value: total, cutoff: hi, panels });
        }
    }
    Err(Error::Divergence(format!("∫ from {a} to ∞ did not settle within {MAX_PANELS} panels")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_kernel_integral() {
        // ∫ dθ/|re^{iθ} − a|² = 2π/(r² − a²)
        let (r, a) = (1.1f64, 0.9f64);
        let f = |t: f64| Ok(1.0 / (r * r + a * a - 2.0 * r * a * t.cos()));
        let res = adaptive_trapezoid(&f, 64, 1e-14, MAX_NODES).unwrap();
        let exact = 2.0 * PI / (r * r - a * a);
        assert!(res.converged);
        assert!((res.value - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn rejects_bad_node_counts() {
        let f = |_t: f64| Ok(1.0);
        assert!(adaptive_trapezoid(&f, 100, 1e-10, MAX_NODES).is_err());
    }
}
