//! Scalar kernels of a diagonal symbol and their certified sups and sums.
//!
//! For a diagonal `T = diag(d_j)` every operator built from `T` by powers,
//! resolvents and diagonal weights is again diagonal, with entries
//! `w_j·g(d_j)` for a scalar kernel `g`. Its operator norm on any ℓ^q is
//! `sup_j |w_j g(d_j)|`, and a rank-one functional composed with it has ℓ²
//! norm `(Σ_j |w_j g(d_j)|²)^{1/2}`. Both are evaluated here with explicit
//! upper and lower bounds.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::region::Region;
use super::symbol::DiagonalSymbol;
use crate::error::{Error, Result};
use crate::linalg::{C64, ONE};

/// `z ↦ factor · zⁿ (1−z)^m (λ−z)^{−k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarKernel {
    pub power: u64,
    pub complement: u32,
    pub resolvent: Option<(C64, u32)>,
    pub factor: f64,
}

impl Default for ScalarKernel {
    fn default() -> Self {
        Self::identity()
    }
}

fn pow_abs(x: f64, n: u64) -> f64 {
    if n == 0 {
        1.0
    } else if n <= i32::MAX as u64 {
        x.powi(n as i32)
    } else {
        x.powf(n as f64)
    }
}

impl ScalarKernel {
    pub fn identity() -> Self {
        ScalarKernel {
            power: 0,
            complement: 0,
            resolvent: None,
            factor: 1.0,
        }
    }

    pub fn power(n: u64) -> Self {
        ScalarKernel {
            power: n,
            ..Self::identity()
        }
    }

    pub fn resolvent(lambda: C64, k: u32) -> Self {
        ScalarKernel {
            resolvent: if k == 0 { None } else { Some((lambda, k)) },
            ..Self::identity()
        }
    }

    pub fn with_power(mut self, n: u64) -> Self {
        self.power = n;
        self
    }

    pub fn with_complement(mut self, m: u32) -> Self {
        self.complement = m;
        self
    }

    pub fn with_factor(mut self, c: f64) -> Self {
        self.factor = c;
        self
    }

    /// Complex value of the kernel at `z`.
    pub fn value(&self, z: C64) -> C64 {
        let mut v = C64::new(self.factor, 0.0);
        if self.power > 0 {
            v *= z.powu(self.power.min(u32::MAX as u64) as u32);
        }
        if self.complement > 0 {
            v *= (ONE - z).powu(self.complement);
        }
        if let Some((lambda, k)) = self.resolvent {
            v /= (lambda - z).powu(k);
        }
        v
    }

    /// `|g(z)|`, computed in modulus form to avoid complex overflow.
    pub fn eval(&self, z: C64) -> f64 {
        let mut v = self.factor.abs() * pow_abs(z.norm(), self.power);
        if self.complement > 0 {
            v *= pow_abs((ONE - z).norm(), self.complement as u64);
        }
        if let Some((lambda, k)) = self.resolvent {
            v /= pow_abs((lambda - z).norm(), k as u64);
        }
        v
    }

    /// Upper bound of `|g|` over a region.
    pub fn upper(&self, region: &Region) -> f64 {
        let mut v = self.factor.abs();
        if self.power > 0 {
            v *= pow_abs(region.max_dist(C64::new(0.0, 0.0)), self.power);
        }
        if self.complement > 0 {
            v *= pow_abs(region.max_dist(ONE), self.complement as u64);
        }
        if let Some((lambda, k)) = self.resolvent {
            let d = region.min_dist(lambda);
            if d == 0.0 {
                return f64::INFINITY;
            }
            v /= pow_abs(d, k as u64);
        }
        v
    }

    /// Lower bound of `|g|` over a region.
    pub fn lower(&self, region: &Region) -> f64 {
        let mut v = self.factor.abs();
        if self.power > 0 {
            v *= pow_abs(region.min_dist(C64::new(0.0, 0.0)), self.power);
        }
        if self.complement > 0 {
            v *= pow_abs(region.min_dist(ONE), self.complement as u64);
        }
        if let Some((lambda, k)) = self.resolvent {
            v /= pow_abs(region.max_dist(lambda), k as u64);
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupMethod {
    /// Finitely many entries, evaluated one by one.
    Exhaustive,
    /// Closed-form critical points of the kernel, neighbouring integers
    /// and the limit.
    Calculus,
    /// Branch and bound over index blocks with enclosing regions.
    BranchAndBound,
}

/// A sup over `j` with a certified bracket `value ≤ sup ≤ upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupEstimate {
    pub value: f64,
    pub upper: f64,
    /// Index attaining `value`; `None` when the sup is the limit `j → ∞`.
    pub argmax: Option<u64>,
    pub method: SupMethod,
}

impl SupEstimate {
    pub fn relative_gap(&self) -> f64 {
        if self.value > 0.0 {
            (self.upper - self.value) / self.value
        } else if self.upper > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

/// Entry `j` of `Π weights · g(d)`.
fn entry(t: &DiagonalSymbol, weights: &[&DiagonalSymbol], kernel: &ScalarKernel, j: u64) -> f64 {
    let w: f64 = weights.iter().map(|w| w.value_at(j).norm()).product();
    if w == 0.0 {
        return 0.0;
    }
    w * kernel.eval(t.value_at(j))
}

fn limit_entry(t: &DiagonalSymbol, weights: &[&DiagonalSymbol], kernel: &ScalarKernel) -> Option<f64> {
    let mut w = 1.0;
    for s in weights {
        w *= s.limit()?.norm();
    }
    if w == 0.0 {
        return Some(0.0);
    }
    Some(w * kernel.eval(t.limit()?))
}

fn finite_len(t: &DiagonalSymbol, weights: &[&DiagonalSymbol]) -> Option<usize> {
    std::iter::once(t)
        .chain(weights.iter().copied())
        .filter_map(|s| s.len())
        .min()
}

fn check_resolvent(t: &DiagonalSymbol, kernel: &ScalarKernel) -> Result<()> {
    if let Some((lambda, _)) = kernel.resolvent {
        if t.region(1, None).min_dist(lambda) == 0.0 {
            return Err(Error::Domain(format!(
                "λ = {lambda} lies in the closure of the symbol range"
            )));
        }
    }
    Ok(())
}

/// `sup_j Π|w_j|·|g(d_j)|` to relative accuracy `tol`.
pub fn diagonal_sup(
    t: &DiagonalSymbol,
    weights: &[&DiagonalSymbol],
    kernel: &ScalarKernel,
    tol: f64,
) -> Result<SupEstimate> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    if let Some(n) = finite_len(t, weights) {
        let mut best = 0.0;
        let mut arg = 1;
        for j in 1..=n as u64 {
            let v = entry(t, weights, kernel, j);
            if v > best {
                best = v;
                arg = j;
            }
        }
        return Ok(SupEstimate {
            value: best,
            upper: best,
            argmax: Some(arg),
            method: SupMethod::Exhaustive,
        });
    }
    check_resolvent(t, kernel)?;
    if let Some(est) = calculus_sup(t, weights, kernel) {
        return Ok(est);
    }
    branch_and_bound(t, weights, kernel, tol)
}

#[derive(Debug, Clone, Copy)]
struct Block {
    upper: f64,
    a: u64,
    b: Option<u64>,
}

impl PartialEq for Block {
    fn eq(&self, other: &Self) -> bool {
        self.upper.total_cmp(&other.upper) == Ordering::Equal
    }
}
impl Eq for Block {}
impl PartialOrd for Block {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Block {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper.total_cmp(&other.upper)
    }
}

const BB_PREFIX: u64 = 64;
const BB_MAX_BLOCKS: usize = 400_000;
/// Beyond this index `j as f64` stops being exact, so blocks are not split.
const BB_INDEX_CAP: u64 = 1 << 52;

fn block_upper(t: &DiagonalSymbol, weights: &[&DiagonalSymbol], kernel: &ScalarKernel, a: u64, b: Option<u64>) -> f64 {
    let w: f64 = weights.iter().map(|w| w.abs_bounds(a, b).1).product();
    if w == 0.0 {
        return 0.0;
    }
    w * kernel.upper(&t.region(a, b))
}

/// Certified sup by branch and bound over index blocks.
pub fn branch_and_bound(
    t: &DiagonalSymbol,
    weights: &[&DiagonalSymbol],
    kernel: &ScalarKernel,
    tol: f64,
) -> Result<SupEstimate> {
    let mut best = 0.0f64;
    let mut arg = Some(1u64);
    let consider = |v: f64, j: Option<u64>, best: &mut f64, arg: &mut Option<u64>| {
        if v > *best {
            *best = v;
            *arg = j;
        }
    };
    for j in 1..=BB_PREFIX {
        consider(entry(t, weights, kernel, j), Some(j), &mut best, &mut arg);
    }
    let lim = limit_entry(t, weights, kernel)
        .ok_or_else(|| Error::Unsupported("symbol without a limit".into()))?;
    consider(lim, None, &mut best, &mut arg);

    let mut heap = BinaryHeap::new();
    let a0 = BB_PREFIX + 1;
    heap.push(Block {
        upper: block_upper(t, weights, kernel, a0, None),
        a: a0,
        b: None,
    });
    let mut frozen = 0.0f64;
    let mut pops = 0usize;
    while let Some(top) = heap.peek().copied() {
        if top.upper <= best * (1.0 + tol) || top.upper <= f64::MIN_POSITIVE {
            break;
        }
        if pops >= BB_MAX_BLOCKS {
            break;
        }
        heap.pop();
        pops += 1;
        match top.b {
            Some(b) if b == top.a => {
                consider(entry(t, weights, kernel, b), Some(b), &mut best, &mut arg);
            }
            Some(b) => {
                let m = top.a + (b - top.a) / 2;
                for j in [top.a, m, m + 1, b] {
                    consider(entry(t, weights, kernel, j), Some(j), &mut best, &mut arg);
                }
                for (lo, hi) in [(top.a, m), (m + 1, b)] {
                    let upper = block_upper(t, weights, kernel, lo, Some(hi));
                    if upper > best * (1.0 + tol) {
                        heap.push(Block { upper, a: lo, b: Some(hi) });
                    }
                }
            }
            None => {
                if top.a >= BB_INDEX_CAP {
                    frozen = frozen.max(top.upper);
                    continue;
                }
                let split = 2 * top.a;
                consider(entry(t, weights, kernel, split), Some(split), &mut best, &mut arg);
                let finite = block_upper(t, weights, kernel, top.a, Some(split - 1));
                heap.push(Block {
                    upper: finite,
                    a: top.a,
                    b: Some(split - 1),
                });
                heap.push(Block {
                    upper: block_upper(t, weights, kernel, split, None),
                    a: split,
                    b: None,
                });
            }
        }
    }
    let rest = heap.peek().map_or(0.0, |b| b.upper);
    let upper = best.max(rest).max(frozen);
    if !upper.is_finite() {
        return Err(Error::UnboundedTruncation(
            "kernel is not bounded on the symbol range".into(),
        ));
    }
    Ok(SupEstimate {
        value: best,
        upper,
        argmax: arg,
        method: SupMethod::BranchAndBound,
    })
}

/// Monomial description `d_j = 1 − c·u`, `u = j^{−e}` with `0 < c ≤ 1`.
fn power_law_parts(t: &DiagonalSymbol) -> Option<(f64, f64)> {
    match t {
        DiagonalSymbol::PowerLaw {
            base,
            scale,
            exponent,
        } if *base == 1.0 && *scale > 0.0 && *scale <= 1.0 => Some((*scale, *exponent)),
        _ => None,
    }
}

/// Exact sup for `T = diag(1 − c·j^{−e})` with monomial weights.
///
/// Writing `u = j^{−e}`, the entry is `F·u^τ·h(u)` with `h(u) = (1−cu)ⁿ` or
/// `|w+cu|^{−k}`. Its critical points solve an explicit equation, and the
/// sup over integers is attained next to one of them, at `j = 1`, or in the
/// limit `j → ∞`.
pub fn calculus_sup(
    t: &DiagonalSymbol,
    weights: &[&DiagonalSymbol],
    kernel: &ScalarKernel,
) -> Option<SupEstimate> {
    let (c, e) = power_law_parts(t)?;
    let complement = t.complement();
    let mut tau = kernel.complement as f64;
    for w in weights {
        match w {
            DiagonalSymbol::PowerLaw {
                base, exponent, ..
            } if *base == 0.0 => tau += exponent / e,
            w if **w == complement => tau += 1.0,
            _ => return None,
        }
    }
    let mut u_crit: Vec<f64> = Vec::new();
    match (kernel.power, kernel.resolvent) {
        (n, None) => {
            if n > 0 && tau > 0.0 {
                u_crit.push(tau / (c * (n as f64 + tau)));
            }
        }
        (0, Some((lambda, k))) => {
            let w = lambda - ONE;
            let k = k as f64;
            let (qa, qb, qc) = (tau - k, (2.0 * tau - k) * w.re, tau * w.norm_sqr());
            let mut roots = Vec::new();
            if qa.abs() < 1e-300 {
                if qb != 0.0 {
                    roots.push(-qc / qb);
                }
            } else {
                let disc = qb * qb - 4.0 * qa * qc;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    // numerically stable quadratic roots
                    let q = -0.5 * (qb + qb.signum() * sq);
                    if q != 0.0 {
                        roots.push(q / qa);
                        roots.push(qc / q);
                    } else {
                        roots.push(0.0);
                    }
                }
            }
            u_crit.extend(roots.into_iter().filter(|v| *v > 0.0).map(|v| v / c));
        }
        _ => return None,
    }
    let mut candidates: Vec<u64> = vec![1, 2];
    for u in u_crit {
        if u >= 1.0 || !u.is_finite() {
            continue;
        }
        let j = u.powf(-1.0 / e);
        if j >= BB_INDEX_CAP as f64 {
            // critical point beyond exact integer range: fall back
            return None;
        }
        let f = j.floor().max(1.0) as u64;
        candidates.extend([f.saturating_sub(1).max(1), f, f + 1, f + 2]);
    }
    let mut best = 0.0;
    let mut arg = Some(1);
    for j in candidates {
        let v = entry(t, weights, kernel, j);
        if v > best {
            best = v;
            arg = Some(j);
        }
    }
    if let Some(lim) = limit_entry(t, weights, kernel) {
        if lim > best {
            best = lim;
            arg = None;
        }
    }
    Some(SupEstimate {
        value: best,
        upper: best,
        argmax: arg,
        method: SupMethod::Calculus,
    })
}

/// `Σ_j Π|w_j|²·|g(d_j)|²` with a certified bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumEstimate {
    pub lower: f64,
    pub upper: f64,
    /// Index beyond which everything was bounded by the tail certificate.
    pub cutoff: u64,
}

impl SumEstimate {
    pub fn value(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn relative_gap(&self) -> f64 {
        if self.lower > 0.0 {
            (self.upper - self.lower) / self.lower
        } else {
            f64::INFINITY
        }
    }
}

const SUM_PREFIX: u64 = 1 << 15;
const SUM_BLOCK_RATIO: f64 = 1.0 / 8192.0;
const SUM_INDEX_CAP: u64 = u64::MAX / 4;

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Square sum `Σ_j |w_j g(d_j)|²` where at least one weight has a
/// closed-form square-sum tail. `tol` is the target relative size of the
/// tail certificate.
pub fn diagonal_square_sum(
    t: &DiagonalSymbol,
    weights: &[&DiagonalSymbol],
    kernel: &ScalarKernel,
    tol: f64,
) -> Result<SumEstimate> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    if let Some(n) = finite_len(t, weights) {
        let mut acc = KahanSum::default();
        for j in 1..=n as u64 {
            acc.add(entry(t, weights, kernel, j).powi(2));
        }
        let s = acc.total();
        return Ok(SumEstimate {
            lower: s,
            upper: s,
            cutoff: n as u64,
        });
    }
    check_resolvent(t, kernel)?;
    let tail_idx = weights
        .iter()
        .position(|w| w.square_sum_tail(1).is_some())
        .ok_or_else(|| {
            Error::UnboundedTruncation("no weight with a square-summable tail certificate".into())
        })?;
    let tail = |a: u64| -> f64 {
        let mut bound = weights[tail_idx].square_sum_tail(a).unwrap_or(f64::INFINITY);
        for (i, w) in weights.iter().enumerate() {
            if i != tail_idx {
                bound *= w.abs_bounds(a, None).1.powi(2);
            }
        }
        bound * kernel.upper(&t.region(a, None)).powi(2)
    };

    let mut lower = KahanSum::default();
    let mut upper = KahanSum::default();
    for j in 1..=SUM_PREFIX {
        let v = entry(t, weights, kernel, j).powi(2);
        lower.add(v);
        upper.add(v);
    }
    let mut a = SUM_PREFIX + 1;
    loop {
        let rest = tail(a);
        if rest <= tol * lower.total() || a >= SUM_INDEX_CAP {
            if !rest.is_finite() {
                return Err(Error::UnboundedTruncation("square-sum tail diverges".into()));
            }
            upper.add(rest);
            return Ok(SumEstimate {
                lower: lower.total(),
                upper: upper.total(),
                cutoff: a,
            });
        }
        let width = ((a as f64) * SUM_BLOCK_RATIO).max(1.0) as u64;
        let b = a.saturating_add(width - 1);
        let region = t.region(a, Some(b));
        let count = (b - a + 1) as f64;
        let (mut wlo, mut whi) = (1.0, 1.0);
        for w in weights {
            let (lo, hi) = w.abs_bounds(a, Some(b));
            wlo *= lo;
            whi *= hi;
        }
        lower.add(count * (wlo * kernel.lower(&region)).powi(2));
        upper.add(count * (whi * kernel.upper(&region)).powi(2));
        a = b + 1;
    }
}

/// `binom(n+k−1, k−1)` as a float.
pub fn resolvent_binomial(n: u64, k: u32) -> f64 {
    let mut v = 1.0;
    for i in 1..k as u64 {
        v *= (n + i) as f64 / i as f64;
    }
    v
}
