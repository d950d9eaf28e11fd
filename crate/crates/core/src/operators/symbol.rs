//! Diagonal symbols `j ↦ d_j` on ℕ = {1, 2, ...}.

use serde::{Deserialize, Serialize};

use super::region::Region;
use crate::error::{Error, Result};
use crate::linalg::{C64, ONE};

/// A sequence of complex numbers indexed by `j ≥ 1`.
///
/// Every variant except `Explicit` is infinite and comes with a limit as
/// `j → ∞` and with enclosing regions over index blocks, which is what makes
/// certified sups over all of ℕ possible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DiagonalSymbol {
    /// Finitely many values; the operator is finite-dimensional.
    Explicit { values: Vec<C64> },
    /// `base − scale·j^{−exponent}`, `exponent > 0`.
    PowerLaw {
        base: f64,
        scale: f64,
        exponent: f64,
    },
    /// `(1 − j^{−exponent})·exp(i·twist·j^{−exponent·twist_exponent})`.
    ///
    /// Approaches 1 tangentially when `twist_exponent < 1`.
    Rotated {
        exponent: f64,
        twist: f64,
        twist_exponent: f64,
    },
    /// `j^{−exponent}·log(offset + j)^{−log_power}` with `offset ≥ 1`.
    LogWeight {
        exponent: f64,
        log_power: f64,
        offset: f64,
    },
    /// `shift + scale·inner`.
    Affine {
        shift: C64,
        scale: C64,
        inner: Box<DiagonalSymbol>,
    },
}

impl DiagonalSymbol {
    pub fn explicit(values: Vec<C64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("values", "explicit symbol needs at least one value"));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("values", "non-finite symbol value"));
        }
        Ok(DiagonalSymbol::Explicit { values })
    }

    /// `1 − 1/j`.
    pub fn one_minus_inv_j() -> Self {
        Self::one_minus_inv_pow(1.0)
    }

    /// `1 − 1/√j`.
    pub fn one_minus_inv_sqrt_j() -> Self {
        Self::one_minus_inv_pow(0.5)
    }

    /// `1 − j^{−e}`.
    pub fn one_minus_inv_pow(e: f64) -> Self {
        DiagonalSymbol::PowerLaw {
            base: 1.0,
            scale: 1.0,
            exponent: e,
        }
    }

    /// `c·j^{−alpha}`.
    pub fn inv_pow(alpha: f64, c: f64) -> Self {
        DiagonalSymbol::PowerLaw {
            base: 0.0,
            scale: -c,
            exponent: alpha,
        }
    }

    pub fn constant(c: C64) -> Self {
        DiagonalSymbol::Affine {
            shift: c,
            scale: C64::new(0.0, 0.0),
            inner: Box::new(Self::one_minus_inv_j()),
        }
    }

    /// `b_j = 1/(j·log(j+1)^q)`.
    pub fn log_weight(q: f64) -> Self {
        DiagonalSymbol::LogWeight {
            exponent: 1.0,
            log_power: q,
            offset: 1.0,
        }
    }

    pub fn affine(self, shift: C64, scale: C64) -> Self {
        DiagonalSymbol::Affine {
            shift,
            scale,
            inner: Box::new(self),
        }
    }

    /// The complement symbol `1 − d_j`.
    pub fn complement(&self) -> Self {
        self.clone().affine(ONE, -ONE)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DiagonalSymbol::Explicit { values } => {
                Self::explicit(values.clone()).map(|_| ())
            }
            DiagonalSymbol::PowerLaw {
                base,
                scale,
                exponent,
            } => {
                if !(base.is_finite() && scale.is_finite()) {
                    return Err(Error::invalid("symbol", "non-finite power-law coefficient"));
                }
                if !(*exponent > 0.0 && exponent.is_finite()) {
                    return Err(Error::invalid("exponent", "must be positive"));
                }
                Ok(())
            }
            DiagonalSymbol::Rotated {
                exponent,
                twist,
                twist_exponent,
            } => {
                if !(*exponent > 0.0 && *twist_exponent > 0.0 && twist.is_finite()) {
                    return Err(Error::invalid("symbol", "rotated symbol needs positive exponents"));
                }
                if twist.abs() > std::f64::consts::PI {
                    return Err(Error::invalid("twist", "must lie in [-π, π]"));
                }
                Ok(())
            }
            DiagonalSymbol::LogWeight {
                exponent,
                log_power,
                offset,
            } => {
                if !(*exponent >= 0.0 && *log_power >= 0.0 && *offset >= 1.0) {
                    return Err(Error::invalid(
                        "symbol",
                        "log weight needs exponent ≥ 0, log_power ≥ 0, offset ≥ 1",
                    ));
                }
                Ok(())
            }
            DiagonalSymbol::Affine { shift, scale, inner } => {
                if !(shift.re.is_finite() && shift.im.is_finite() && scale.re.is_finite() && scale.im.is_finite()) {
                    return Err(Error::invalid("symbol", "non-finite affine coefficient"));
                }
                inner.validate()
            }
        }
    }

    /// Number of entries for explicit symbols, `None` for infinite ones.
    pub fn len(&self) -> Option<usize> {
        match self {
            DiagonalSymbol::Explicit { values } => Some(values.len()),
            DiagonalSymbol::Affine { inner, .. } => inner.len(),
            _ => None,
        }
    }

    pub fn is_finite_dimensional(&self) -> bool {
        self.len().is_some()
    }

    /// `d_j` for `j ≥ 1`. Out-of-range indices of explicit symbols read as 0.
    pub fn value_at(&self, j: u64) -> C64 {
        debug_assert!(j >= 1);
        let jf = j as f64;
        match self {
            DiagonalSymbol::Explicit { values } => {
                values.get((j - 1) as usize).copied().unwrap_or_default()
            }
            DiagonalSymbol::PowerLaw {
                base,
                scale,
                exponent,
            } => C64::new(base - scale * jf.powf(-exponent), 0.0),
            DiagonalSymbol::Rotated {
                exponent,
                twist,
                twist_exponent,
            } => {
                let u = jf.powf(-exponent);
                C64::from_polar(1.0 - u, twist * u.powf(*twist_exponent))
            }
            DiagonalSymbol::LogWeight {
                exponent,
                log_power,
                offset,
            } => C64::new(
                jf.powf(-exponent) * (offset + jf).ln().powf(-log_power),
                0.0,
            ),
            DiagonalSymbol::Affine { shift, scale, inner } => shift + scale * inner.value_at(j),
        }
    }

    /// Limit of `d_j` as `j → ∞`.
    pub fn limit(&self) -> Option<C64> {
        match self {
            DiagonalSymbol::Explicit { .. } => None,
            DiagonalSymbol::PowerLaw { base, .. } => Some(C64::new(*base, 0.0)),
            DiagonalSymbol::Rotated { .. } => Some(ONE),
            DiagonalSymbol::LogWeight {
                exponent,
                log_power,
                ..
            } => {
                if *exponent == 0.0 && *log_power == 0.0 {
                    Some(ONE)
                } else {
                    Some(C64::new(0.0, 0.0))
                }
            }
            DiagonalSymbol::Affine { shift, scale, inner } => {
                inner.limit().map(|l| shift + scale * l)
            }
        }
    }

    /// A region containing `{d_j : a ≤ j ≤ b}`; `b = None` means the
    /// unbounded block `[a, ∞)` together with the limit.
    pub fn region(&self, a: u64, b: Option<u64>) -> Region {
        match self {
            DiagonalSymbol::Explicit { values } => {
                let hi = b.unwrap_or(values.len() as u64).min(values.len() as u64);
                if a > hi {
                    return Region::Point(C64::new(0.0, 0.0));
                }
                let mut pts: Vec<Region> =
                    (a..=hi).map(|j| Region::Point(values[(j - 1) as usize])).collect();
                if b.map_or(true, |b| b > values.len() as u64) {
                    pts.push(Region::Point(C64::new(0.0, 0.0)));
                }
                Region::Union(pts)
            }
            DiagonalSymbol::PowerLaw { .. } | DiagonalSymbol::LogWeight { .. } => {
                // monotone real sequences: the block lies between its end values
                let first = self.value_at(a);
                let last = match b {
                    Some(b) => self.value_at(b),
                    None => self.limit().expect("infinite symbol has a limit"),
                };
                Region::Segment(first, last)
            }
            DiagonalSymbol::Rotated {
                exponent,
                twist,
                twist_exponent,
            } => {
                let u_hi = (a as f64).powf(-exponent);
                let u_lo = b.map_or(0.0, |b| (b as f64).powf(-exponent));
                let ang = |u: f64| twist * u.powf(*twist_exponent);
                let (p0, p1) = {
                    let (x, y) = (ang(u_lo), ang(u_hi));
                    (x.min(y), x.max(y))
                };
                Region::Sector {
                    rho: (1.0 - u_hi, 1.0 - u_lo),
                    psi: (p0, p1),
                }
            }
            DiagonalSymbol::Affine { shift, scale, inner } => {
                inner.region(a, b).affine(*shift, *scale)
            }
        }
    }

    /// The symbol `j ↦ conj(d_j)`, when it is representable.
    pub fn conj(&self) -> Option<DiagonalSymbol> {
        match self {
            DiagonalSymbol::Explicit { values } => Some(DiagonalSymbol::Explicit {
                values: values.iter().map(|v| v.conj()).collect(),
            }),
            DiagonalSymbol::PowerLaw { .. } | DiagonalSymbol::LogWeight { .. } => Some(self.clone()),
            DiagonalSymbol::Rotated { twist, .. } if *twist == 0.0 => Some(self.clone()),
            DiagonalSymbol::Rotated { .. } => None,
            DiagonalSymbol::Affine { shift, scale, inner } => Some(DiagonalSymbol::Affine {
                shift: shift.conj(),
                scale: scale.conj(),
                inner: Box::new(inner.conj()?),
            }),
        }
    }

    /// The symbol `j ↦ d_j + e_j`, when it is representable.
    pub fn sum(&self, other: &DiagonalSymbol) -> Option<DiagonalSymbol> {
        use DiagonalSymbol::*;
        let as_const = |s: &DiagonalSymbol| match s {
            Affine { shift, scale, .. } if *scale == C64::new(0.0, 0.0) => Some(*shift),
            _ => None,
        };
        if let Some(c) = as_const(other) {
            return Some(self.clone().affine(c, ONE));
        }
        if let Some(c) = as_const(self) {
            return Some(other.clone().affine(c, ONE));
        }
        let (a, b) = (self.folded(), other.folded());
        match (&a, &b) {
            (Explicit { values: a }, Explicit { values: b }) => {
                let n = a.len().max(b.len());
                let at = |v: &Vec<C64>, i: usize| v.get(i).copied().unwrap_or_default();
                Some(Explicit {
                    values: (0..n).map(|i| at(a, i) + at(b, i)).collect(),
                })
            }
            (
                PowerLaw { base: b1, scale: s1, exponent: e1 },
                PowerLaw { base: b2, scale: s2, exponent: e2 },
            ) if e1 == e2 => Some(PowerLaw {
                base: b1 + b2,
                scale: s1 + s2,
                exponent: *e1,
            }),
            (Affine { shift: a1, scale: c1, inner: i1 }, Affine { shift: a2, scale: c2, inner: i2 }) if i1 == i2 => {
                Some(Affine {
                    shift: a1 + a2,
                    scale: c1 + c2,
                    inner: i1.clone(),
                })
            }
            (Affine { shift, scale, inner }, x) | (x, Affine { shift, scale, inner }) if **inner == *x => {
                Some(Affine {
                    shift: *shift,
                    scale: scale + 1.0,
                    inner: inner.clone(),
                })
            }
            _ => None,
        }
    }

    /// A real affine map of a power law is again a power law.
    fn folded(&self) -> DiagonalSymbol {
        match self {
            DiagonalSymbol::Affine { shift, scale, inner } if shift.im == 0.0 && scale.im == 0.0 && scale.re != 0.0 => {
                match inner.folded() {
                    DiagonalSymbol::PowerLaw { base, scale: s, exponent } => DiagonalSymbol::PowerLaw {
                        base: shift.re + scale.re * base,
                        scale: scale.re * s,
                        exponent,
                    },
                    other => DiagonalSymbol::Affine {
                        shift: *shift,
                        scale: *scale,
                        inner: Box::new(other),
                    },
                }
            }
            other => other.clone(),
        }
    }

    /// Bounds `(min, max)` of `|d_j|` over the block.
    pub fn abs_bounds(&self, a: u64, b: Option<u64>) -> (f64, f64) {
        let r = self.region(a, b);
        let z = C64::new(0.0, 0.0);
        (r.min_dist(z), r.max_dist(z))
    }

    /// `sup_j |d_j|`, exact for every variant.
    pub fn sup_abs(&self) -> f64 {
        match self {
            DiagonalSymbol::Explicit { values } => values.iter().map(|v| v.norm()).fold(0.0, f64::max),
            _ => self.abs_bounds(1, None).1,
        }
    }

    /// True when `|d_j|` and the kernels built from it are eventually
    /// monotone, so block end points bracket the block.
    pub fn monotone_flag(&self) -> bool {
        !matches!(self, DiagonalSymbol::Explicit { .. })
    }

    /// Upper bound on `Σ_{j ≥ a} |d_j|²`, when one is available in closed form.
    pub fn square_sum_tail(&self, a: u64) -> Option<f64> {
        let af = a as f64;
        match self {
            DiagonalSymbol::Explicit { values } => Some(
                values
                    .iter()
                    .skip((a - 1) as usize)
                    .map(|v| v.norm_sqr())
                    .sum(),
            ),
            DiagonalSymbol::PowerLaw {
                base,
                scale,
                exponent,
            } if *base == 0.0 => {
                let s = 2.0 * exponent;
                if s <= 1.0 {
                    return None;
                }
                // Σ_{j≥a} j^{-s} ≤ a^{-s} + ∫_a^∞ t^{-s} dt
                Some(scale * scale * (af.powf(-s) + af.powf(1.0 - s) / (s - 1.0)))
            }
            DiagonalSymbol::LogWeight {
                exponent,
                log_power,
                offset,
            } => {
                let s = 2.0 * exponent;
                if s <= 1.0 {
                    return None;
                }
                let l = (offset + af).ln().powf(-2.0 * log_power);
                Some(l * (af.powf(-s) + af.powf(1.0 - s) / (s - 1.0)))
            }
            DiagonalSymbol::Affine { shift, scale, inner } if shift.norm() == 0.0 => {
                inner.square_sum_tail(a).map(|t| scale.norm_sqr() * t)
            }
            _ => None,
        }
    }

    /// Values `d_1, ..., d_n`.
    pub fn values(&self, n: usize) -> Vec<C64> {
        (1..=n as u64).map(|j| self.value_at(j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sums_of_representable_symbols() {
        let d = DiagonalSymbol::inv_pow(1.0, 1.0).affine(C64::new(0.0, 0.0), C64::new(0.4, 0.0));
        let s = DiagonalSymbol::one_minus_inv_j().sum(&d).unwrap();
        for j in [1u64, 2, 7, 1000] {
            let want = 1.0 - 1.0 / j as f64 + 0.4 / j as f64;
            assert!((s.value_at(j).re - want).abs() < 1e-15, "j = {j}");
        }
        let c = DiagonalSymbol::one_minus_inv_j().sum(&DiagonalSymbol::constant(C64::new(0.5, 0.0))).unwrap();
        assert!((c.value_at(2).re - 1.0).abs() < 1e-15);
        let twisted = DiagonalSymbol::Rotated {
            exponent: 1.0,
            twist: 1.0,
            twist_exponent: 0.5,
        };
        assert!(twisted.sum(&DiagonalSymbol::one_minus_inv_j()).is_none());
    }

    fn catalog() -> Vec<DiagonalSymbol> {
        vec![
            DiagonalSymbol::one_minus_inv_j(),
            DiagonalSymbol::one_minus_inv_sqrt_j(),
            DiagonalSymbol::inv_pow(0.5, 1.0),
            DiagonalSymbol::log_weight(1.0),
            DiagonalSymbol::Rotated {
                exponent: 1.0,
                twist: 1.0,
                twist_exponent: 0.5,
            },
            DiagonalSymbol::one_minus_inv_j().complement(),
        ]
    }

    #[test]
    fn values_of_named_symbols() {
        let d = DiagonalSymbol::one_minus_inv_j();
        assert!((d.value_at(3) - C64::new(2.0 / 3.0, 0.0)).norm() < 1e-15);
        let s = DiagonalSymbol::inv_pow(0.5, 1.0);
        assert!((s.value_at(4).re - 0.5).abs() < 1e-15);
        let c = DiagonalSymbol::one_minus_inv_j().complement();
        assert!((c.value_at(4).re - 0.25).abs() < 1e-15);
        assert_eq!(d.limit(), Some(ONE));
    }

    #[test]
    fn contraction_symbols_stay_in_disc() {
        for d in catalog().into_iter().filter(|d| !matches!(d, DiagonalSymbol::LogWeight { .. })) {
            for j in 1..5000 {
                assert!(d.value_at(j).norm() <= 1.0 + 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn regions_contain_block_values(which in 0usize..6, a in 1u64..5000, len in 0u64..200) {
            let d = &catalog()[which];
            let b = a + len;
            let region = d.region(a, Some(b));
            for j in a..=b {
                prop_assert!(region.min_dist(d.value_at(j)) < 1e-12);
            }
            let tail = d.region(a, None);
            for j in [a, a + 1, 10 * a, 1000 * a] {
                prop_assert!(tail.min_dist(d.value_at(j)) < 1e-12);
            }
        }

        #[test]
        fn tail_bound_dominates_brute_force(a in 1u64..2000) {
            let d = DiagonalSymbol::one_minus_inv_j();
            let (_, hi) = d.abs_bounds(a + 1, None);
            let brute = (a + 1..=10 * a).map(|j| d.value_at(j).norm()).fold(0.0, f64::max);
            prop_assert!(brute <= hi + 1e-15);
            let w = DiagonalSymbol::inv_pow(1.0, 1.0);
            let tail = w.square_sum_tail(a + 1).unwrap();
            let partial: f64 = (a + 1..=10 * a).map(|j| w.value_at(j).norm_sqr()).sum();
            prop_assert!(partial <= tail);
        }
    }
}
