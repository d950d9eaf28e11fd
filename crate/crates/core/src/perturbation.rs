//! Sherman–Morrison–Woodbury resolvent algebra and robustness of
//! power-boundedness and decay under small commuting perturbations.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{commutation_check, decay_profile, default_probes, weighted_decay, Commutation, DecayProfile, SideReport, NORM_TOL};
use crate::conditions::{gsf_integral_check, IntegralConditionReport};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Lu, C64};
use crate::operators::{ComplexVector, DiagonalSymbol, LinearOperator, OperatorKind, Sandwich, ScalarKernel};
use crate::resolvent::{resolvent_apply, sweep_sup, SpectralGrid, SpectralPoint};
use crate::rvfunctions::RVFunction;

pub const SMW_INNER_TOL: f64 = 1e-10;
pub const SMW_IDENTITY_TOL: f64 = 1e-9;
/// Relative slack on the resolvent comparison bounds.
pub const BOUND_SLACK: f64 = 1e-6;
pub const EXPONENT_TOL: f64 = 0.05;
/// Blow-up factors `(1−δ)^{−k}` above this are flagged.
pub const BLOWUP_FLAG: f64 = 10.0;
/// Radius of the extra circle used when estimating `δ`.
pub const OUTER_RADIUS: f64 = 2.0;

fn residual(m: &DenseMatrix, sol: &[C64], rhs: &[C64]) -> f64 {
    let mx = m.mul_vec(sol);
    let num = mx.iter().zip(rhs).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let den = rhs.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    num / den
}

/// `R(λ, A+BC)x = R(λ,A)x + R(λ,A)B(I − CR(λ,A)B)^{−1}CR(λ,A)x`.
pub fn smw_resolvent(
    a: &LinearOperator,
    b: &LinearOperator,
    c: &LinearOperator,
    lambda: &SpectralPoint,
    x: &ComplexVector,
) -> Result<ComplexVector> {
    let (a, b, c) = (a.to_dense()?, b.to_dense()?, c.to_dense()?);
    let n = a.rows();
    if !a.is_square() || b.rows() != n || c.cols() != n || b.cols() != c.rows() || x.len() != n {
        return Err(Error::invalid("operators", "incompatible shapes for A + BC"));
    }
    let shifted = a.shifted_negation(lambda.lambda);
    let lu = Lu::factor(&shifted).map_err(|e| Error::Hypothesis(format!("λ is not in the resolvent set of A: {e}")))?;
    let y = lu.solve(x.as_slice());
    let rb = lu.solve_matrix(&b);
    let mut inner = c.matmul(&rb).scale(C64::new(-1.0, 0.0));
    for i in 0..inner.rows() {
        inner[(i, i)] += C64::new(1.0, 0.0);
    }
    let cy = c.mul_vec(&y);
    let z = Lu::factor(&inner)
        .map(|f| f.solve(&cy))
        .map_err(|e| Error::Hypothesis(format!("SMW hypothesis violated: {e}")))?;
    let inner_res = residual(&inner, &z, &cy);
    if !(inner_res < SMW_INNER_TOL) && cy.iter().any(|v| *v != C64::new(0.0, 0.0)) {
        return Err(Error::Hypothesis(format!(
            "SMW hypothesis violated: inner residual {inner_res:.3e}"
        )));
    }
    let out: Vec<C64> = y.iter().zip(rb.mul_vec(&z)).map(|(u, v)| u + v).collect();
    let full = shifted.sub(&b.matmul(&c));
    let res = residual(&full, &out, x.as_slice());
    if !(res <= SMW_IDENTITY_TOL) {
        return Err(Error::Hypothesis(format!(
            "SMW hypothesis violated: residual {res:.3e}"
        )));
    }
    ComplexVector::new(out)
}

fn symbol_is_zero(s: &DiagonalSymbol) -> bool {
    let z = C64::new(0.0, 0.0);
    match s {
        DiagonalSymbol::Explicit { values } => values.iter().all(|v| *v == z),
        DiagonalSymbol::PowerLaw { base, scale, .. } => *base == 0.0 && *scale == 0.0,
        DiagonalSymbol::Affine { shift, scale, inner } => *shift == z && (*scale == z || symbol_is_zero(inner)),
        _ => false,
    }
}

pub fn is_zero_operator(d: &LinearOperator) -> bool {
    match &d.kind {
        OperatorKind::DenseMatrix { matrix } => matrix.max_abs() == 0.0,
        OperatorKind::Diagonal { symbol } => symbol_is_zero(symbol),
        _ => false,
    }
}

/// `T + D` for dense pairs and for diagonal pairs with a representable sum.
pub fn operator_sum(t: &LinearOperator, d: &LinearOperator) -> Result<LinearOperator> {
    if is_zero_operator(d) {
        return Ok(t.clone());
    }
    match (&t.kind, &d.kind) {
        (OperatorKind::Diagonal { symbol: a }, OperatorKind::Diagonal { symbol: b }) => {
            if let Some(s) = a.sum(b) {
                return Ok(LinearOperator::diagonal(s)?.with_truncation(t.truncation.max(d.truncation)));
            }
        }
        _ => {}
    }
    if t.is_finite_dimensional() && d.is_finite_dimensional() {
        let (a, b) = (t.to_dense()?, d.to_dense()?);
        if a.rows() != b.rows() || a.cols() != b.cols() {
            return Err(Error::invalid("d", "dimension differs from T"));
        }
        return LinearOperator::dense(a.add(&b));
    }
    Err(Error::Unsupported("T + D is not representable for these operator kinds".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSetup {
    pub t: LinearOperator,
    pub d: LinearOperator,
    pub s: LinearOperator,
    /// Sup of `‖R(λ,T)D‖` over the grid and the circle `|λ| = 2`.
    pub delta_hat: f64,
    /// Where the sup was attained.
    pub delta_witness: (f64, f64),
    pub grid: SpectralGrid,
    pub commutation: Commutation,
}

impl PerturbationSetup {
    pub fn new(t: LinearOperator, d: LinearOperator, s: LinearOperator, grid: &SpectralGrid, seed: u64) -> Result<Self> {
        let commutation = commutation_check(&t, &d, seed)?;
        if !commutation.applicable || !commutation.commutes {
            return Err(Error::Hypothesis(format!(
                "T and D do not commute on probes (defect {:.3e})",
                commutation.defect
            )));
        }
        let (delta_hat, delta_witness) = estimate_delta(&t, &d, grid)?;
        Ok(PerturbationSetup {
            t,
            d,
            s,
            delta_hat,
            delta_witness,
            grid: *grid,
            commutation,
        })
    }
}

fn rd_norm(t: &LinearOperator, d: &LinearOperator, lambda: C64) -> Result<(f64, Option<f64>)> {
    let rep = Sandwich::new(t).right(d).norm(&ScalarKernel::resolvent(lambda, 1), NORM_TOL)?;
    Ok((rep.value, rep.condition))
}

/// `sup ‖R(λ,T)D‖` on the grid plus the circle `|λ| = 2`, with its argmax.
pub fn estimate_delta(t: &LinearOperator, d: &LinearOperator, grid: &SpectralGrid) -> Result<(f64, (f64, f64))> {
    let sweep = sweep_sup(grid, |p| rd_norm(t, d, p.lambda))?;
    let mut best = (0.0f64, (f64::NAN, f64::NAN));
    for row in &sweep.rows {
        if row.value > best.0 || best.1 .0.is_nan() {
            best = (row.value, (row.r, row.theta));
        }
    }
    for theta in crate::quadrature::nodes(grid.n_theta) {
        let p = SpectralPoint::new(OUTER_RADIUS, theta)?;
        let (v, _) = rd_norm(t, d, p.lambda)?;
        if v > best.0 {
            best = (v, (OUTER_RADIUS, p.theta));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpotCheck {
    pub r: f64,
    pub theta: f64,
    pub k: u32,
    /// `‖R(λ,T+D)ᵏy‖`.
    pub perturbed: f64,
    /// `(1−δ)^{−k}‖R(λ,T)ᵏy‖`.
    pub bound: f64,
}

impl SpotCheck {
    pub fn holds(&self) -> bool {
        self.perturbed <= self.bound * (1.0 + BOUND_SLACK) + f64::MIN_POSITIVE
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub function: String,
    pub k: u32,
    pub delta_hat: f64,
    pub delta_witness: (f64, f64),
    pub commutation: Commutation,
    /// `(1−δ)^{−k}`.
    pub blow_up: f64,
    pub blow_up_flagged: bool,
    /// The sup `δ < 1` is certified only on the sampled grid.
    pub certification: String,
    pub gsf_t: Option<IntegralConditionReport>,
    pub gsf_perturbed: Option<IntegralConditionReport>,
    /// `sup_{T+D} / sup_T` against the allowed `(1−δ)^{−2}`.
    pub gsf_ratio: Option<f64>,
    pub gsf_within: Option<bool>,
    pub decay_t: DecayProfile,
    pub decay_perturbed: DecayProfile,
    pub exponent_t: Option<f64>,
    pub exponent_perturbed: Option<f64>,
    pub exponent_match: Option<bool>,
    /// `f(n)‖TⁿS‖` and `f(n)‖(T+D)ⁿS‖`.
    pub weighted_t: SideReport,
    pub weighted_perturbed: SideReport,
    /// `k`-th power comparisons on `S`-images of the probes.
    pub spot_checks: Vec<SpotCheck>,
    /// First-power comparisons on the probes themselves.
    pub first_power_checks: Vec<SpotCheck>,
    pub notes: Vec<String>,
    pub passes: bool,
}

const SPOT_ANGLES: usize = 8;
const PROBE_COUNT: usize = 3;

fn spots(
    t: &LinearOperator,
    td: &LinearOperator,
    k: u32,
    delta: f64,
    grid: &SpectralGrid,
    ys: &[ComplexVector],
) -> Result<Vec<SpotCheck>> {
    let factor = (1.0 - delta).powi(-(k as i32));
    let mut out = Vec::new();
    for excess in grid.excesses().into_iter().chain([OUTER_RADIUS - 1.0]) {
        for i in 0..SPOT_ANGLES {
            let theta = std::f64::consts::TAU * (i as f64 + 0.5) / SPOT_ANGLES as f64;
            let p = SpectralPoint::from_excess(excess, theta)?;
            for y in ys {
                let a = resolvent_apply(td, &p, k, y)?.norm();
                let b = resolvent_apply(t, &p, k, y)?.norm();
                out.push(SpotCheck {
                    r: p.r,
                    theta: p.theta,
                    k,
                    perturbed: a,
                    bound: factor * b,
                });
            }
        }
    }
    Ok(out)
}

/// Checks that `T+D` keeps `T`'s power-boundedness and decay rate when
/// `sup ‖R(λ,T)D‖ < 1`.
pub fn perturbation_robustness(
    setup: &PerturbationSetup,
    f: &RVFunction,
    k: u32,
    grid: &SpectralGrid,
    n_max: u64,
    seed: u64,
) -> Result<RobustnessReport> {
    if k == 0 {
        return Err(Error::invalid("k", "must be ≥ 1"));
    }
    let delta = setup.delta_hat;
    if !(delta < 1.0) {
        return Err(Error::Hypothesis(format!(
            "sup ‖R(λ,T)D‖ ≈ {delta} is not below 1; no robustness claim"
        )));
    }
    let (t, s) = (&setup.t, &setup.s);
    let weighted_t = weighted_decay(&Sandwich::new(t).right(s), f, n_max)?;
    if !weighted_t.bounded() {
        return Err(Error::Hypothesis(format!(
            "‖TⁿS‖ = O(1/f(n)) fails for f = {}",
            f.label()
        )));
    }
    let td = operator_sum(t, &setup.d)?;
    let mut notes = Vec::new();
    let blow_up = (1.0 - delta).powi(-(k as i32));
    let blow_up_flagged = blow_up > BLOWUP_FLAG;
    if blow_up_flagged {
        notes.push(format!("blow-up factor (1−δ)^−{k} = {blow_up:.3e}"));
    }

    let probes = default_probes(t, PROBE_COUNT, seed)?;
    let (gsf_t, gsf_perturbed) = match (gsf_integral_check(t, grid, &probes), gsf_integral_check(&td, grid, &probes)) {
        (Ok(a), Ok(b)) => (Some(a), Some(b)),
        (Err(e), _) | (_, Err(e)) => {
            notes.push(format!("integral power-boundedness check skipped: {e}"));
            (None, None)
        }
    };
    let (gsf_ratio, gsf_within) = match (&gsf_t, &gsf_perturbed) {
        (Some(a), Some(b)) => {
            let ratio = if a.sup > 0.0 { b.sup / a.sup } else if b.sup == 0.0 { 1.0 } else { f64::INFINITY };
            let allowed = (1.0 - delta).powi(-2) * (1.0 + BOUND_SLACK);
            let bounded = b.sup.is_finite() && b.trend != crate::trend::Trend::Growing;
            (Some(ratio), Some(ratio <= allowed && bounded))
        }
        _ => (None, None),
    };

    let decay_t = decay_profile(&Sandwich::new(t).right(s), n_max)?;
    let decay_perturbed = decay_profile(&Sandwich::new(&td).right(s), n_max)?;
    let weighted_perturbed = weighted_decay(&Sandwich::new(&td).right(s), f, n_max)?;
    let exponent_t = decay_t.fitted_exponent();
    let exponent_perturbed = decay_perturbed.fitted_exponent();
    let exponent_match = match (exponent_t, exponent_perturbed) {
        (Some(a), Some(b)) => Some((a - b).abs() <= EXPONENT_TOL),
        (Some(_), None) => Some(false),
        (None, _) => {
            notes.push("T's decay admits no power fit; exponent comparison skipped".into());
            None
        }
    };

    let ys = probes.iter().map(|x| s.apply(x)).collect::<Result<Vec<_>>>()?;
    let spot_checks = spots(t, &td, k, delta, grid, &ys)?;
    let first_power_checks = spots(t, &td, 1, delta, grid, &probes)?;

    let passes = gsf_within.unwrap_or(true)
        && exponent_match.unwrap_or(true)
        && weighted_perturbed.bounded()
        && spot_checks.iter().all(SpotCheck::holds)
        && first_power_checks.iter().all(SpotCheck::holds);
    Ok(RobustnessReport {
        function: f.label(),
        k,
        delta_hat: delta,
        delta_witness: setup.delta_witness,
        commutation: setup.commutation.clone(),
        blow_up,
        blow_up_flagged,
        certification: "grid-certified".into(),
        gsf_t,
        gsf_perturbed,
        gsf_ratio,
        gsf_within,
        decay_t,
        decay_perturbed,
        exponent_t,
        exponent_perturbed,
        exponent_match,
        weighted_t,
        weighted_perturbed,
        spot_checks,
        first_power_checks,
        notes,
        passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar(v: f64) -> LinearOperator {
        LinearOperator::dense(DenseMatrix::from_real_rows(&[vec![v]]).unwrap()).unwrap()
    }

    fn small_grid() -> SpectralGrid {
        SpectralGrid::new(1, 10, 64).unwrap()
    }

    #[test]
    fn smw_zero_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = LinearOperator::dense(DenseMatrix::random(4, 4, &mut rng).scale(C64::new(0.2, 0.0))).unwrap();
        let b = LinearOperator::dense_map(DenseMatrix::random(4, 2, &mut rng));
        let c = LinearOperator::dense_map(DenseMatrix::zeros(2, 4));
        let x = ComplexVector::random(4, &mut rng).unwrap();
        let p = SpectralPoint::new(1.5, 0.4).unwrap();
        let out = smw_resolvent(&a, &b, &c, &p, &x).unwrap();
        let direct = resolvent_apply(&a, &p, 1, &x).unwrap();
        assert!(out.sub(&direct).norm() < 1e-14);
    }

    #[test]
    fn smw_scalar() {
        let a = scalar(0.5);
        let b = scalar(0.1);
        let c = scalar(0.1);
        let x = ComplexVector::from_real(&[1.0]).unwrap();
        let p = SpectralPoint::new(2.0, 0.0).unwrap();
        let out = smw_resolvent(&a, &b, &c, &p, &x).unwrap();
        // 1/(2 − 0.5 − 0.01)
        let exact = 1.0 / 1.49;
        // R + R·b·(1 − c R b)^{-1}·c·R with R = 1/1.5
        let r = 1.0 / 1.5;
        let expanded = r + r * 0.1 * (1.0 / (1.0 - 0.1 * r * 0.1)) * 0.1 * r;
        assert!((out.as_slice()[0].re - exact).abs() < 1e-15);
        assert!((expanded - exact).abs() < 1e-15);
    }

    #[test]
    fn smw_violation_reported() {
        // CR(λ,A)B = 1 makes the inner operator singular
        let a = scalar(0.0);
        let b = scalar(1.0);
        let c = scalar(2.0);
        let p = SpectralPoint::new(2.0, 0.0).unwrap();
        let x = ComplexVector::from_real(&[1.0]).unwrap();
        match smw_resolvent(&a, &b, &c, &p, &x) {
            Err(Error::Hypothesis(m)) => assert!(m.contains("SMW hypothesis violated")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_perturbation_reproduces_baseline() {
        let t = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j()).unwrap();
        let s = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j().complement()).unwrap();
        let d = LinearOperator::diagonal(DiagonalSymbol::constant(C64::new(0.0, 0.0))).unwrap();
        let setup = PerturbationSetup::new(t, d, s, &small_grid(), 1).unwrap();
        assert_eq!(setup.delta_hat, 0.0);
        let rep = perturbation_robustness(&setup, &RVFunction::power(1.0).unwrap(), 1, &small_grid(), 1 << 10, 1).unwrap();
        assert_eq!(rep.gsf_t, rep.gsf_perturbed);
        assert_eq!(rep.decay_t, rep.decay_perturbed);
        assert_eq!(rep.weighted_t, rep.weighted_perturbed);
        assert_eq!(rep.gsf_ratio, Some(1.0));
        assert!(rep.spot_checks.iter().all(|c| c.perturbed == c.bound));
        assert!(rep.passes);
    }

    #[test]
    fn tiny_diagonal_perturbation() {
        let t = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j()).unwrap();
        let s = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j().complement()).unwrap();
        let d = LinearOperator::diagonal(DiagonalSymbol::inv_pow(1.0, 1e-3)).unwrap();
        let td = operator_sum(&t, &d).unwrap();
        for j in [1u64, 7, 1000] {
            let exact = 1.0 - 0.999 / j as f64;
            assert!((td.as_diagonal().unwrap().value_at(j).re - exact).abs() < 1e-15);
        }
        let setup = PerturbationSetup::new(t, d, s, &small_grid(), 2).unwrap();
        assert!(setup.delta_hat < 1.0);
        let rep = perturbation_robustness(&setup, &RVFunction::power(1.0).unwrap(), 1, &small_grid(), 1 << 14, 2).unwrap();
        assert!((rep.exponent_t.unwrap() + 1.0).abs() < 0.05);
        assert!((rep.exponent_perturbed.unwrap() + 1.0).abs() < 0.05);
        assert!(rep.passes, "{:?}", rep.notes);
        assert!(!rep.blow_up_flagged);
    }

    #[test]
    fn near_critical_shift_is_flagged() {
        let t = scalar(0.0);
        let d = scalar(0.99);
        let s = LinearOperator::identity(1);
        let grid = SpectralGrid::new(1, 20, 64).unwrap();
        let setup = PerturbationSetup::new(t, d, s, &grid, 3).unwrap();
        // ‖R(λ,0)·0.99‖ = 0.99/|λ|, largest on the innermost circle
        assert!((setup.delta_hat - 0.99 / (1.0 + 2f64.powi(-20))).abs() < 1e-12);
        let rep = perturbation_robustness(&setup, &RVFunction::power(1.0).unwrap(), 2, &small_grid(), 1 << 10, 3).unwrap();
        assert!(rep.blow_up_flagged);
        assert!((rep.blow_up - (1.0 - setup.delta_hat).powi(-2)).abs() < 1e-6 * rep.blow_up);
        assert!(rep.passes, "{:?}", rep.notes);
    }

    #[test]
    fn large_perturbation_rejected() {
        let setup = PerturbationSetup::new(scalar(0.0), scalar(1.5), LinearOperator::identity(1), &small_grid(), 4).unwrap();
        assert!(matches!(
            perturbation_robustness(&setup, &RVFunction::power(1.0).unwrap(), 1, &small_grid(), 64, 4),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn non_commuting_rejected() {
        let t = LinearOperator::dense(DenseMatrix::from_real_rows(&[vec![0.0, 0.5], vec![0.0, 0.0]]).unwrap()).unwrap();
        let d = LinearOperator::dense(DenseMatrix::from_real_rows(&[vec![0.1, 0.0], vec![0.0, 0.0]]).unwrap()).unwrap();
        assert!(matches!(
            PerturbationSetup::new(t, d, LinearOperator::identity(2), &small_grid(), 5),
            Err(Error::Hypothesis(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn smw_matches_direct_solve(seed in 0u64..10_000, theta in 0.0f64..6.28, r in 1.05f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = DenseMatrix::random(5, 5, &mut rng);
            let a = a.scale(C64::new(0.9 / a.spectral_norm(1e-12).value, 0.0));
            let p = SpectralPoint::new(r, theta).unwrap();
            let rinv = a.shifted_negation(p.lambda).inverse().unwrap();
            let b = DenseMatrix::random(5, 2, &mut rng);
            let c = DenseMatrix::random(2, 5, &mut rng);
            // scale so that ‖CR(λ,A)B‖ ≤ 0.5
            let nb = c.matmul(&rinv).matmul(&b).spectral_norm(1e-12).value;
            let b = b.scale(C64::new(0.5 / nb.max(1e-300), 0.0));
            let x = ComplexVector::random(5, &mut rng).unwrap();
            let out = smw_resolvent(
                &LinearOperator::dense(a.clone()).unwrap(),
                &LinearOperator::dense_map(b.clone()),
                &LinearOperator::dense_map(c.clone()),
                &p,
                &x,
            ).unwrap();
            let full = a.shifted_negation(p.lambda).sub(&b.matmul(&c));
            let direct = Lu::factor(&full).unwrap().solve(x.as_slice());
            for (u, v) in out.as_slice().iter().zip(&direct) {
                prop_assert!((u - v).norm() < 1e-10);
            }
            prop_assert!(residual(&full, out.as_slice(), x.as_slice()) < 1e-9);
        }

        #[test]
        fn perturbed_resolvent_bound(seed in 0u64..10_000, eps in 0.0f64..0.2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let vals: Vec<C64> = (0..4).map(|_| C64::from_polar(0.8 * rand::Rng::gen::<f64>(&mut rng), 6.28 * rand::Rng::gen::<f64>(&mut rng))).collect();
            let dv: Vec<C64> = vals.iter().map(|v| v * eps).collect();
            let t = LinearOperator::diagonal(DiagonalSymbol::explicit(vals).unwrap()).unwrap();
            let d = LinearOperator::diagonal(DiagonalSymbol::explicit(dv).unwrap()).unwrap();
            let g = SpectralGrid::new(1, 8, 64).unwrap();
            let (delta, _) = estimate_delta(&t, &d, &g).unwrap();
            prop_assume!(delta < 1.0);
            let td = operator_sum(&t, &d).unwrap();
            let probes = default_probes(&t, 2, seed).unwrap();
            for c in spots(&t, &td, 1, delta, &g, &probes).unwrap() {
                prop_assert!(c.holds(), "{c:?}");
            }
        }
    }
}
