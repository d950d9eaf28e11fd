//! Planar regions enclosing blocks of diagonal-symbol values.
//!
//! Branch-and-bound over a symbol needs, for a block of indices, a set that
//! contains every symbol value in the block together with the two distance
//! functions below. Both are exact for the shapes provided here.

use std::f64::consts::PI;

use crate::linalg::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Point(C64),
    /// Closed segment between two points.
    Segment(C64, C64),
    /// Annular sector `{ρe^{iψ} : ρ ∈ [rho.0, rho.1], ψ ∈ [psi.0, psi.1]}`
    /// with `-π ≤ psi.0 ≤ psi.1 ≤ π`.
    Sector { rho: (f64, f64), psi: (f64, f64) },
    /// `shift + scale·inner`.
    Affine {
        shift: C64,
        scale: C64,
        inner: Box<Region>,
    },
    Union(Vec<Region>),
}

impl Region {
    /// Distance from `p` to the nearest point of the region.
    pub fn min_dist(&self, p: C64) -> f64 {
        match self {
            Region::Point(z) => (p - z).norm(),
            Region::Segment(a, b) => segment_dist(p, *a, *b),
            Region::Sector { rho, psi } => sector_min_dist(p, *rho, *psi),
            Region::Affine {
                shift,
                scale,
                inner,
            } => {
                if scale.norm() == 0.0 {
                    (p - shift).norm()
                } else {
                    scale.norm() * inner.min_dist((p - shift) / scale)
                }
            }
            Region::Union(parts) => parts
                .iter()
                .map(|r| r.min_dist(p))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Distance from `p` to the farthest point of the region.
    pub fn max_dist(&self, p: C64) -> f64 {
        match self {
            Region::Point(z) => (p - z).norm(),
            Region::Segment(a, b) => (p - a).norm().max((p - b).norm()),
            Region::Sector { rho, psi } => sector_max_dist(p, *rho, *psi),
            Region::Affine {
                shift,
                scale,
                inner,
            } => {
                if scale.norm() == 0.0 {
                    (p - shift).norm()
                } else {
                    scale.norm() * inner.max_dist((p - shift) / scale)
                }
            }
            Region::Union(parts) => parts.iter().map(|r| r.max_dist(p)).fold(0.0, f64::max),
        }
    }

    pub fn affine(self, shift: C64, scale: C64) -> Region {
        Region::Affine {
            shift,
            scale,
            inner: Box::new(self),
        }
    }
}

fn segment_dist(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * d.conj()).re / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

fn angle_in(theta: f64, psi: (f64, f64)) -> bool {
    // psi lies inside [-π, π]; test theta and its 2π translates.
    [theta, theta - 2.0 * PI, theta + 2.0 * PI]
        .iter()
        .any(|&t| t >= psi.0 && t <= psi.1)
}

fn sector_min_dist(p: C64, rho: (f64, f64), psi: (f64, f64)) -> f64 {
    let r = p.norm();
    let theta = p.arg();
    if r >= rho.0 && r <= rho.1 && (angle_in(theta, psi) || r == 0.0) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    // arcs
    for &rad in &[rho.0, rho.1] {
        if angle_in(theta, psi) {
            best = best.min((r - rad).abs());
        }
        for &ang in &[psi.0, psi.1] {
            best = best.min((p - C64::from_polar(rad, ang)).norm());
        }
    }
    // radial edges
    for &ang in &[psi.0, psi.1] {
        best = best.min(segment_dist(
            p,
            C64::from_polar(rho.0, ang),
            C64::from_polar(rho.1, ang),
        ));
    }
    best
}

fn sector_max_dist(p: C64, rho: (f64, f64), psi: (f64, f64)) -> f64 {
    let mut best: f64 = 0.0;
    for &rad in &[rho.0, rho.1] {
        for &ang in &[psi.0, psi.1] {
            best = best.max((p - C64::from_polar(rad, ang)).norm());
        }
    }
    let antipode = p.arg() + PI;
    if p.norm() > 0.0 && angle_in(antipode, psi) {
        for &rad in &[rho.0, rho.1] {
            best = best.max((p - C64::from_polar(rad, antipode)).norm());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_sector(rho: (f64, f64), psi: (f64, f64), n: usize) -> Vec<C64> {
        let mut out = Vec::new();
        for i in 0..=n {
            for k in 0..=n {
                let r = rho.0 + (rho.1 - rho.0) * i as f64 / n as f64;
                let a = psi.0 + (psi.1 - psi.0) * k as f64 / n as f64;
                out.push(C64::from_polar(r, a));
            }
        }
        out
    }

    #[test]
    fn segment_distances() {
        let s = Region::Segment(C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        assert!((s.min_dist(C64::new(2.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((s.min_dist(C64::new(0.5, 2.0)) - 2.0).abs() < 1e-15);
        assert!((s.max_dist(C64::new(0.5, 2.0)) - (4.25f64).sqrt()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn sector_distances_bracket_samples(
            r0 in 0.0f64..0.9, dr in 0.0f64..0.3,
            a0 in -1.0f64..1.0, da in 0.0f64..1.5,
            px in -2.0f64..2.0, py in -2.0f64..2.0,
        ) {
            let rho = (r0, r0 + dr);
            let psi = (a0, a0 + da);
            let region = Region::Sector { rho, psi };
            let p = C64::new(px, py);
            let lo = region.min_dist(p);
            let hi = region.max_dist(p);
            let samples = sample_sector(rho, psi, 40);
            let smin = samples.iter().map(|z| (p - z).norm()).fold(f64::INFINITY, f64::min);
            let smax = samples.iter().map(|z| (p - z).norm()).fold(0.0, f64::max);
            prop_assert!(lo <= smin + 1e-12);
            prop_assert!(hi >= smax - 1e-12);
            // the bounds are tight up to the sampling resolution
            prop_assert!(smin - lo < 0.05);
            prop_assert!(hi - smax < 0.05);
        }

        #[test]
        fn affine_region_maps_distances(
            sx in -1.0f64..1.0, sy in -1.0f64..1.0, k in 0.1f64..3.0,
            px in -2.0f64..2.0, py in -2.0f64..2.0,
        ) {
            let base = Region::Segment(C64::new(0.0, 0.0), C64::new(1.0, 0.0));
            let shift = C64::new(sx, sy);
            let scale = C64::new(-k, 0.0);
            let mapped = base.clone().affine(shift, scale);
            let direct = Region::Segment(shift, shift + scale);
            let p = C64::new(px, py);
            prop_assert!((mapped.min_dist(p) - direct.min_dist(p)).abs() < 1e-12);
            prop_assert!((mapped.max_dist(p) - direct.max_dist(p)).abs() < 1e-12);
        }
    }
}
