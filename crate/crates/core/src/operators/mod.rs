//! Bounded operators on ℂⁿ and on sequence spaces, with exact or certified
//! norm evaluation for the operator families analyzed in this crate.

mod kernel;
mod region;
mod spec;
mod symbol;
mod vector;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use kernel::{
    branch_and_bound, calculus_sup, diagonal_square_sum, diagonal_sup, resolvent_binomial,
    ScalarKernel, SumEstimate, SupEstimate, SupMethod,
};
pub(crate) use kernel::KahanSum;
pub use region::Region;
pub use spec::{parse_operator_spec, parse_symbol, OperatorSpec};
pub use symbol::DiagonalSymbol;
pub use vector::ComplexVector;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Lu, C64, ONE, ZERO};

/// Default truncation for sequence-space kinds.
pub const DEFAULT_TRUNCATION: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SequenceSpace {
    #[default]
    L2,
    C0,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    DenseMatrix { matrix: DenseMatrix },
    Diagonal { symbol: DiagonalSymbol },
    /// Left shift `(Tx)_j = w_j x_{j+1}`.
    WeightedShift { weights: DiagonalSymbol },
    /// `x ↦ Σ_j w_j x_j`, a map into ℂ.
    RankOneFunctional { weights: DiagonalSymbol },
    /// Product of the factors; the last factor acts first.
    Composite { factors: Vec<LinearOperator> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Finite(usize),
    Sequence { truncation: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearOperator {
    #[serde(flatten)]
    pub kind: OperatorKind,
    #[serde(default)]
    pub space: SequenceSpace,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
}

fn default_truncation() -> usize {
    DEFAULT_TRUNCATION
}

/// Enumerable description of a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    Finite(Vec<C64>),
    /// Closure of the values of a symbol.
    SymbolClosure(DiagonalSymbol),
    /// Closed disc `|z| ≤ radius`.
    Disc(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    PowerIteration,
    Exhaustive,
    Calculus,
    BranchAndBound,
    SquareSum,
    ClosedForm,
    CertifiedSeries,
}

impl From<SupMethod> for NormMethod {
    fn from(m: SupMethod) -> Self {
        match m {
            SupMethod::Exhaustive => NormMethod::Exhaustive,
            SupMethod::Calculus => NormMethod::Calculus,
            SupMethod::BranchAndBound => NormMethod::BranchAndBound,
        }
    }
}

/// An operator norm with its absolute error bound and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub error: f64,
    pub method: NormMethod,
    /// 1-norm condition number of `λI − T` for dense resolvent kernels.
    pub condition: Option<f64>,
    /// Maximizing index for diagonal sups (`None` for a limit or n/a).
    pub argmax: Option<u64>,
}

impl NormReport {
    fn closed_form(value: f64) -> Self {
        NormReport {
            value,
            error: 0.0,
            method: NormMethod::ClosedForm,
            condition: None,
            argmax: None,
        }
    }

    fn from_sup(est: SupEstimate) -> Self {
        NormReport {
            value: est.value,
            error: (est.upper - est.value).max(0.0),
            method: est.method.into(),
            condition: None,
            argmax: est.argmax,
        }
    }

    pub fn upper(&self) -> f64 {
        self.value + self.error
    }
}

/// `‖Tⁿ‖ ≤ constant·rateⁿ` for all `n ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBound {
    pub constant: f64,
    pub rate: f64,
    /// `Tⁿ = 0` from this index on, when detected exactly.
    pub vanishes_from: Option<u64>,
}

impl PowerBound {
    pub fn bound(&self, n: u64) -> f64 {
        if self.vanishes_from.is_some_and(|m| n >= m) {
            return 0.0;
        }
        self.constant * self.rate.powf(n as f64)
    }
}

impl LinearOperator {
    fn with_kind(kind: OperatorKind) -> Self {
        LinearOperator {
            kind,
            space: SequenceSpace::L2,
            truncation: DEFAULT_TRUNCATION,
        }
    }

    pub fn dense(matrix: DenseMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid("matrix", "operator matrix must be square"));
        }
        Ok(Self::with_kind(OperatorKind::DenseMatrix { matrix }))
    }

    /// A rectangular matrix used as an input or output map.
    pub fn dense_map(matrix: DenseMatrix) -> Self {
        Self::with_kind(OperatorKind::DenseMatrix { matrix })
    }

    pub fn diagonal(symbol: DiagonalSymbol) -> Result<Self> {
        symbol.validate()?;
        Ok(Self::with_kind(OperatorKind::Diagonal { symbol }))
    }

    pub fn shift(weights: DiagonalSymbol, space: SequenceSpace) -> Result<Self> {
        weights.validate()?;
        Ok(LinearOperator {
            space,
            ..Self::with_kind(OperatorKind::WeightedShift { weights })
        })
    }

    pub fn functional(weights: DiagonalSymbol) -> Result<Self> {
        weights.validate()?;
        Ok(Self::with_kind(OperatorKind::RankOneFunctional { weights }))
    }

    pub fn composite(factors: Vec<LinearOperator>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("factors", "composite needs at least one factor"));
        }
        Ok(Self::with_kind(OperatorKind::Composite { factors }))
    }

    pub fn zero(n: usize) -> Self {
        Self::dense_map(DenseMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self::dense_map(DenseMatrix::identity(n))
    }

    pub fn with_space(mut self, space: SequenceSpace) -> Self {
        self.space = space;
        self
    }

    pub fn with_truncation(mut self, truncation: usize) -> Self {
        self.truncation = truncation.max(1);
        self
    }

    pub fn dimension(&self) -> Dimension {
        match &self.kind {
            OperatorKind::DenseMatrix { matrix } => Dimension::Finite(matrix.cols()),
            OperatorKind::Diagonal { symbol } => match symbol.len() {
                Some(n) => Dimension::Finite(n),
                None => Dimension::Sequence {
                    truncation: self.truncation,
                },
            },
            OperatorKind::Composite { factors } => factors.last().unwrap().dimension(),
            _ => Dimension::Sequence {
                truncation: self.truncation,
            },
        }
    }

    pub fn is_finite_dimensional(&self) -> bool {
        match &self.kind {
            OperatorKind::Composite { factors } => {
                factors.iter().all(|f| f.is_finite_dimensional())
            }
            OperatorKind::RankOneFunctional { weights } => weights.len().is_some(),
            _ => matches!(self.dimension(), Dimension::Finite(_)),
        }
    }

    pub fn as_dense(&self) -> Option<&DenseMatrix> {
        match &self.kind {
            OperatorKind::DenseMatrix { matrix } => Some(matrix),
            _ => None,
        }
    }

    pub fn as_diagonal(&self) -> Option<&DiagonalSymbol> {
        match &self.kind {
            OperatorKind::Diagonal { symbol } => Some(symbol),
            _ => None,
        }
    }

    /// Matrix of a finite-dimensional operator.
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        match &self.kind {
            OperatorKind::DenseMatrix { matrix } => Ok(matrix.clone()),
            OperatorKind::Diagonal { symbol } => match symbol {
                s if s.len().is_some() => Ok(DenseMatrix::from_diagonal(&s.values(s.len().unwrap()))),
                _ => Err(Error::Unsupported("infinite diagonal has no dense matrix".into())),
            },
            OperatorKind::RankOneFunctional { weights } if weights.len().is_some() => {
                let w = weights.values(weights.len().unwrap());
                DenseMatrix::from_rows(vec![w])
            }
            OperatorKind::Composite { factors } => {
                let mut it = factors.iter();
                let mut acc = it.next().unwrap().to_dense()?;
                for f in it {
                    let m = f.to_dense()?;
                    if acc.cols() != m.rows() {
                        return Err(Error::DimensionMismatch {
                            expected: format!("{} rows", acc.cols()),
                            found: m.rows(),
                        });
                    }
                    acc = acc.matmul(&m);
                }
                Ok(acc)
            }
            _ => Err(Error::Unsupported(
                "sequence-space operator has no dense matrix".into(),
            )),
        }
    }

    fn check_len(&self, x: &ComplexVector) -> Result<()> {
        match self.dimension() {
            Dimension::Finite(n) if x.len() != n => Err(Error::DimensionMismatch {
                expected: format!("ℂ^{n}"),
                found: x.len(),
            }),
            Dimension::Sequence { truncation } if x.len() > truncation => {
                Err(Error::DimensionMismatch {
                    expected: format!("sequences truncated at {truncation} coordinates"),
                    found: x.len(),
                })
            }
            _ => Ok(()),
        }
    }

    /// `op·x`; sequence-space results are truncated to the support of the
    /// image of the finitely supported input.
    pub fn apply(&self, x: &ComplexVector) -> Result<ComplexVector> {
        self.check_len(x)?;
        let xs = x.as_slice();
        let out = match &self.kind {
            OperatorKind::DenseMatrix { matrix } => matrix.mul_vec(xs),
            OperatorKind::Diagonal { symbol } => xs
                .iter()
                .enumerate()
                .map(|(i, v)| symbol.value_at(i as u64 + 1) * v)
                .collect(),
            OperatorKind::WeightedShift { weights } => {
                if xs.len() == 1 {
                    vec![ZERO]
                } else {
                    (1..xs.len())
                        .map(|i| weights.value_at(i as u64) * xs[i])
                        .collect()
                }
            }
            OperatorKind::RankOneFunctional { weights } => {
                let mut s = ZERO;
                for (i, v) in xs.iter().enumerate() {
                    s += weights.value_at(i as u64 + 1) * v;
                }
                vec![s]
            }
            OperatorKind::Composite { factors } => {
                let mut y = x.clone();
                for f in factors.iter().rev() {
                    y = f.apply(&y)?;
                }
                return Ok(y);
            }
        };
        ComplexVector::new(out)
    }

    /// `op*·y`. For sequence-space kinds the output covers `domain_len`
    /// coordinates (at least the support of the exact image).
    pub fn adjoint_apply_truncated(&self, y: &ComplexVector, domain_len: usize) -> Result<ComplexVector> {
        let ys = y.as_slice();
        let out = match &self.kind {
            OperatorKind::DenseMatrix { matrix } => {
                if ys.len() != matrix.rows() {
                    return Err(Error::DimensionMismatch {
                        expected: format!("ℂ^{}", matrix.rows()),
                        found: ys.len(),
                    });
                }
                matrix.adjoint().mul_vec(ys)
            }
            OperatorKind::Diagonal { .. } => {
                self.check_len(y)?;
                let OperatorKind::Diagonal { symbol } = &self.kind else { unreachable!() };
                ys.iter()
                    .enumerate()
                    .map(|(i, v)| symbol.value_at(i as u64 + 1).conj() * v)
                    .collect()
            }
            OperatorKind::WeightedShift { weights } => {
                let n = domain_len.max(ys.len() + 1);
                let mut out = vec![ZERO; n];
                for (i, v) in ys.iter().enumerate() {
                    out[i + 1] = weights.value_at(i as u64 + 1).conj() * v;
                }
                out
            }
            OperatorKind::RankOneFunctional { weights } => {
                if ys.len() != 1 {
                    return Err(Error::DimensionMismatch {
                        expected: "ℂ".into(),
                        found: ys.len(),
                    });
                }
                let n = weights.len().unwrap_or(domain_len.max(1));
                (1..=n as u64).map(|j| weights.value_at(j).conj() * ys[0]).collect()
            }
            OperatorKind::Composite { factors } => {
                let mut v = y.clone();
                for f in factors {
                    v = f.adjoint_apply_truncated(&v, domain_len)?;
                }
                return Ok(v);
            }
        };
        ComplexVector::new(out)
    }

    /// `op*·y` with sequence outputs padded to the input length.
    pub fn adjoint_apply(&self, y: &ComplexVector) -> Result<ComplexVector> {
        self.adjoint_apply_truncated(y, y.len())
    }

    /// `opⁿ·x`; negative `n` is rejected.
    pub fn power_apply(&self, n: i64, x: &ComplexVector) -> Result<ComplexVector> {
        if n < 0 {
            return Err(Error::invalid("n", format!("power must be non-negative, got {n}")));
        }
        self.check_len(x)?;
        let n = n as u64;
        match &self.kind {
            OperatorKind::DenseMatrix { matrix } if matrix.is_square() => {
                if n <= 8 {
                    let mut y = x.clone();
                    for _ in 0..n {
                        y = self.apply(&y)?;
                    }
                    Ok(y)
                } else {
                    ComplexVector::new(matrix.pow(n).mul_vec(x.as_slice()))
                }
            }
            OperatorKind::Diagonal { symbol } => {
                let k = ScalarKernel::power(n);
                ComplexVector::new(
                    x.as_slice()
                        .iter()
                        .enumerate()
                        .map(|(i, v)| k.value(symbol.value_at(i as u64 + 1)) * v)
                        .collect(),
                )
            }
            OperatorKind::RankOneFunctional { .. } if n > 1 => Err(Error::Unsupported(
                "powers of a functional are undefined".into(),
            )),
            _ => {
                let mut y = x.clone();
                for _ in 0..n {
                    y = self.apply(&y)?;
                }
                Ok(y)
            }
        }
    }

    pub fn spectrum(&self) -> Option<Spectrum> {
        match &self.kind {
            OperatorKind::DenseMatrix { matrix } if matrix.is_square() => {
                matrix.eigenvalues().ok().map(Spectrum::Finite)
            }
            OperatorKind::Diagonal { symbol } => Some(match symbol.len() {
                Some(n) => Spectrum::Finite(symbol.values(n)),
                None => Spectrum::SymbolClosure(symbol.clone()),
            }),
            OperatorKind::WeightedShift { weights } => {
                constant_weight(weights).map(|c| Spectrum::Disc(c.norm()))
            }
            _ => None,
        }
    }

    /// Spectral radius, when it can be determined.
    pub fn spectral_radius(&self) -> Option<f64> {
        match self.spectrum()? {
            Spectrum::Finite(v) => Some(v.iter().map(|z| z.norm()).fold(0.0, f64::max)),
            Spectrum::SymbolClosure(s) => Some(s.sup_abs()),
            Spectrum::Disc(r) => Some(r),
        }
    }

    /// `‖Tⁿ‖ ≤ C·ρⁿ` certificate.
    pub fn power_bound(&self) -> Result<PowerBound> {
        match &self.kind {
            OperatorKind::Diagonal { symbol } => Ok(PowerBound {
                constant: 1.0,
                rate: symbol.sup_abs(),
                vanishes_from: None,
            }),
            OperatorKind::WeightedShift { weights } => Ok(PowerBound {
                constant: 1.0,
                rate: weights.sup_abs(),
                vanishes_from: None,
            }),
            OperatorKind::DenseMatrix { matrix } if matrix.is_square() => {
                dense_power_bound(matrix)
            }
            _ => Err(Error::Unsupported(
                "no power-bound certificate for this operator kind".into(),
            )),
        }
    }

    pub fn random_probe(&self, support: usize, rng: &mut impl Rng) -> Result<ComplexVector> {
        let len = match self.dimension() {
            Dimension::Finite(n) => n,
            Dimension::Sequence { truncation } => support.min(truncation),
        };
        ComplexVector::random(len, rng)
    }

    /// Length of vectors in the domain used for probing.
    pub fn probe_len(&self, support: usize) -> usize {
        match self.dimension() {
            Dimension::Finite(n) => n,
            Dimension::Sequence { truncation } => support.min(truncation),
        }
    }
}

fn constant_weight(weights: &DiagonalSymbol) -> Option<C64> {
    match weights {
        DiagonalSymbol::Affine { shift, scale, .. } if scale.norm() == 0.0 => Some(*shift),
        _ => None,
    }
}

const POWER_BOUND_STEPS: u64 = 32;

fn dense_power_bound(t: &DenseMatrix) -> Result<PowerBound> {
    let n = t.rows();
    let mut norms = Vec::with_capacity(POWER_BOUND_STEPS as usize + 1);
    let mut p = DenseMatrix::identity(n);
    for _ in 0..=POWER_BOUND_STEPS {
        norms.push(p.spectral_norm(1e-12).value);
        p = p.matmul(t);
    }
    let m = POWER_BOUND_STEPS;
    if let Some(z) = (0..=m as usize).find(|&i| norms[i] == 0.0) {
        let constant = norms[..z].iter().copied().fold(0.0, f64::max);
        return Ok(PowerBound {
            constant,
            rate: 0.0,
            vanishes_from: Some(z as u64),
        });
    }
    // ‖T^{qm+i}‖ ≤ ‖T^m‖^q‖T^i‖, with a little slack for the norm estimates
    let slack = 1.0 + 1e-9;
    let rate = (norms[m as usize] * slack).powf(1.0 / m as f64);
    let constant = (0..m as usize)
        .map(|i| norms[i] * slack / rate.powi(i as i32))
        .fold(0.0, f64::max);
    Ok(PowerBound {
        constant,
        rate,
        vanishes_from: None,
    })
}

/// `‖op‖` with its error bound.
pub fn operator_norm(op: &LinearOperator, tol: f64) -> Result<NormReport> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    match &op.kind {
        OperatorKind::DenseMatrix { matrix } => Ok(dense_norm(matrix, tol)),
        OperatorKind::Diagonal { symbol } => Ok(NormReport::from_sup(diagonal_sup(
            symbol,
            &[],
            &ScalarKernel::identity(),
            tol,
        )?)),
        OperatorKind::WeightedShift { weights } => Ok(NormReport::closed_form(weights.sup_abs())),
        OperatorKind::RankOneFunctional { weights } => functional_norm(op.space, weights, None, None, &ScalarKernel::identity(), tol),
        OperatorKind::Composite { .. } if op.is_finite_dimensional() => {
            Ok(dense_norm(&op.to_dense()?, tol))
        }
        OperatorKind::Composite { factors } => {
            // collapse diagonal products
            let mut weights = Vec::new();
            for f in factors {
                match f.as_diagonal() {
                    Some(s) => weights.push(s),
                    None => {
                        return Err(Error::UnboundedTruncation(
                            "composite sequence-space operator without a norm certificate".into(),
                        ))
                    }
                }
            }
            let (t, rest) = weights.split_first().unwrap();
            Ok(NormReport::from_sup(diagonal_sup(
                t,
                rest,
                &ScalarKernel::identity().with_power(1),
                tol,
            )?))
        }
    }
}

fn dense_norm(m: &DenseMatrix, tol: f64) -> NormReport {
    let est = m.spectral_norm(tol.max(1e-15));
    NormReport {
        value: est.value,
        error: est.error,
        method: NormMethod::PowerIteration,
        condition: None,
        argmax: None,
    }
}

fn functional_norm(
    space: SequenceSpace,
    weights: &DiagonalSymbol,
    t: Option<&DiagonalSymbol>,
    right: Option<&DiagonalSymbol>,
    kernel: &ScalarKernel,
    tol: f64,
) -> Result<NormReport> {
    if space != SequenceSpace::L2 && weights.len().is_none() {
        return Err(Error::Unsupported(
            "functional norms on c0 are available for finitely supported weights only".into(),
        ));
    }
    let mut ws = vec![weights];
    if let Some(r) = right {
        ws.push(r);
    }
    let t = t.unwrap_or(weights);
    let est = diagonal_square_sum(t, &ws, kernel, tol)?;
    let (lo, hi) = (est.lower.sqrt(), est.upper.sqrt());
    Ok(NormReport {
        value: 0.5 * (lo + hi),
        error: 0.5 * (hi - lo),
        method: NormMethod::SquareSum,
        condition: None,
        argmax: None,
    })
}

/// Dense matrix of `g(T)` for a square `T`, with the 1-norm condition
/// number of `λI − T` when the kernel has a resolvent factor.
pub fn dense_kernel_matrix(t: &DenseMatrix, kernel: &ScalarKernel) -> Result<(DenseMatrix, Option<f64>)> {
    let n = t.rows();
    let mut m = if kernel.power > 0 { t.pow(kernel.power) } else { DenseMatrix::identity(n) };
    if kernel.complement > 0 {
        let c = t.shifted_negation(ONE).pow(kernel.complement as u64);
        m = m.matmul(&c);
    }
    let mut cond = None;
    if let Some((lambda, k)) = kernel.resolvent {
        let lu = Lu::factor(&t.shifted_negation(lambda))?;
        cond = Some(lu.condition_one());
        for _ in 0..k {
            lu.solve_matrix_in_place(&mut m);
        }
    }
    if kernel.factor != 1.0 {
        m = m.scale(C64::new(kernel.factor, 0.0));
    }
    Ok((m, cond))
}

fn dense_for(op: Option<&LinearOperator>, n: usize, side: &str) -> Result<Option<DenseMatrix>> {
    let Some(op) = op else { return Ok(None) };
    let m = op.to_dense()?;
    let ok = if side == "left" { m.cols() == n } else { m.rows() == n };
    if !ok {
        return Err(Error::DimensionMismatch {
            expected: format!("{side} factor compatible with ℂ^{n}"),
            found: if side == "left" { m.cols() } else { m.rows() },
        });
    }
    Ok(Some(m))
}

/// `‖L·g(T)·R‖` for a scalar kernel `g`, absent factors being identities.
///
/// This is the single entry point for every norm of the form `‖S Tⁿ‖`,
/// `‖Tⁿ(I−T)‖`, `‖R(λ,T)ᵏ S‖` and `‖S₁R(λ,T)S₂‖`.
pub fn kernel_norm(
    left: Option<&LinearOperator>,
    t: &LinearOperator,
    kernel: &ScalarKernel,
    right: Option<&LinearOperator>,
    tol: f64,
) -> Result<NormReport> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    if let Some((lambda, _)) = kernel.resolvent {
        if let Some(rho) = t.spectral_radius() {
            if lambda.norm() <= rho && !t.is_finite_dimensional() {
                return Err(Error::Domain(format!(
                    "|λ| = {} does not exceed the spectral radius {rho}",
                    lambda.norm()
                )));
            }
        }
    }
    match &t.kind {
        OperatorKind::DenseMatrix { matrix } => {
            let n = matrix.rows();
            let (mut m, cond) = dense_kernel_matrix(matrix, kernel)?;
            if let Some(l) = dense_for(left, n, "left")? {
                m = l.matmul(&m);
            }
            if let Some(r) = dense_for(right, n, "right")? {
                m = m.matmul(&r);
            }
            let mut rep = dense_norm(&m, tol);
            rep.condition = cond;
            Ok(rep)
        }
        OperatorKind::Diagonal { symbol } => {
            let right_sym = match right {
                None => None,
                Some(r) => match r.as_diagonal() {
                    Some(s) => Some(s),
                    None => return finite_fallback(left, t, kernel, right, tol),
                },
            };
            match left.map(|l| &l.kind) {
                None | Some(OperatorKind::Diagonal { .. }) => {
                    let mut ws = Vec::new();
                    if let Some(l) = left.and_then(|l| l.as_diagonal()) {
                        ws.push(l);
                    }
                    if let Some(r) = right_sym {
                        ws.push(r);
                    }
                    Ok(NormReport::from_sup(diagonal_sup(symbol, &ws, kernel, tol)?))
                }
                Some(OperatorKind::RankOneFunctional { weights }) => functional_norm(
                    left.unwrap().space,
                    weights,
                    Some(symbol),
                    right_sym,
                    kernel,
                    tol,
                ),
                _ => finite_fallback(left, t, kernel, right, tol),
            }
        }
        OperatorKind::WeightedShift { weights } => shift_kernel_norm(t.space, weights, left, kernel, right, tol),
        _ => finite_fallback(left, t, kernel, right, tol),
    }
}

/// `L·g(T)·R` for scalar kernels `g`, absent factors being identities.
#[derive(Debug, Clone, Copy)]
pub struct Sandwich<'a> {
    pub left: Option<&'a LinearOperator>,
    pub t: &'a LinearOperator,
    pub right: Option<&'a LinearOperator>,
}

impl<'a> Sandwich<'a> {
    pub fn new(t: &'a LinearOperator) -> Self {
        Sandwich {
            left: None,
            t,
            right: None,
        }
    }

    pub fn left(mut self, l: &'a LinearOperator) -> Self {
        self.left = Some(l);
        self
    }

    pub fn right(mut self, r: &'a LinearOperator) -> Self {
        self.right = Some(r);
        self
    }

    pub fn with_left(mut self, l: Option<&'a LinearOperator>) -> Self {
        self.left = l;
        self
    }

    pub fn with_right(mut self, r: Option<&'a LinearOperator>) -> Self {
        self.right = r;
        self
    }

    pub fn norm(&self, kernel: &ScalarKernel, tol: f64) -> Result<NormReport> {
        kernel_norm(self.left, self.t, kernel, self.right, tol)
    }
}

fn finite_fallback(
    left: Option<&LinearOperator>,
    t: &LinearOperator,
    kernel: &ScalarKernel,
    right: Option<&LinearOperator>,
    tol: f64,
) -> Result<NormReport> {
    let finite = t.is_finite_dimensional()
        && left.map_or(true, |l| l.is_finite_dimensional())
        && right.map_or(true, |r| r.is_finite_dimensional());
    if !finite {
        return Err(Error::Unsupported(
            "no certified norm evaluator for this operator combination".into(),
        ));
    }
    let td = LinearOperator::dense_map(t.to_dense()?);
    let l = left.map(|l| l.to_dense().map(LinearOperator::dense_map)).transpose()?;
    let r = right.map(|r| r.to_dense().map(LinearOperator::dense_map)).transpose()?;
    kernel_norm(l.as_ref(), &td, kernel, r.as_ref(), tol)
}

/// Norms for the constant-weight left shift with a diagonal right factor
/// `b` whose modulus is non-increasing.
fn shift_kernel_norm(
    space: SequenceSpace,
    weights: &DiagonalSymbol,
    left: Option<&LinearOperator>,
    kernel: &ScalarKernel,
    right: Option<&LinearOperator>,
    tol: f64,
) -> Result<NormReport> {
    let c = constant_weight(weights)
        .ok_or_else(|| Error::Unsupported("shift norms need constant weights".into()))?
        .norm();
    if left.is_some() || kernel.complement > 0 {
        return Err(Error::Unsupported(
            "shift norms support right diagonal factors only".into(),
        ));
    }
    let b = match right {
        None => None,
        Some(r) => match r.as_diagonal() {
            Some(s @ (DiagonalSymbol::LogWeight { .. } | DiagonalSymbol::PowerLaw { base: 0.0, .. })) => Some(s),
            _ => {
                return Err(Error::Unsupported(
                    "shift norms need a monotone decreasing diagonal weight".into(),
                ))
            }
        },
    };
    let bval = |j: u64| b.map_or(1.0, |s| s.value_at(j).norm());
    let f = kernel.factor.abs();
    match kernel.resolvent {
        None => {
            // TⁿS is a shifted diagonal: its norm on any ℓ^q or c0 is sup_{j>n}|c^n b_j|
            let n = kernel.power;
            Ok(NormReport::closed_form(f * c.powf(n as f64) * bval(n + 1)))
        }
        Some((lambda, k)) => {
            if kernel.power > 0 {
                return Err(Error::Unsupported("shift norms with mixed kernels".into()));
            }
            let r = lambda.norm();
            if r <= c {
                return Err(Error::Domain(format!("|λ| = {r} inside the spectrum")));
            }
            if b.is_none() {
                // Σ binom(n+k−1,k−1) cⁿ/r^{n+k} = (r−c)^{−k}
                return Ok(NormReport::closed_form(f / (r - c).powi(k as i32)));
            }
            if space != SequenceSpace::C0 {
                return Err(Error::Unsupported(
                    "weighted shift resolvents are evaluated in c0 only".into(),
                ));
            }
            // row 1 of R(λ,T)^k S dominates; its ℓ¹ sum is the c0 norm
            let q = c / r;
            let mut acc = KahanSum::default();
            let mut term_coeff = 1.0 / r.powi(k as i32);
            let mut n: u64 = 0;
            loop {
                acc.add(term_coeff * bval(n + 1));
                // later coefficients shrink by the ratio (m+k)/(m+1)·q ≤ (n+1+k)/(n+2)·q
                let next = term_coeff * (n + k as u64) as f64 / (n + 1) as f64 * q;
                let ratio = (n + 1 + k as u64) as f64 / (n + 2) as f64 * q;
                if ratio < 1.0 {
                    let tail = next * bval(n + 2) / (1.0 - ratio);
                    if tail <= tol * acc.total() {
                        let s = acc.total();
                        return Ok(NormReport {
                            value: f * (s + 0.5 * tail),
                            error: f * 0.5 * tail,
                            method: NormMethod::CertifiedSeries,
                            condition: None,
                            argmax: None,
                        });
                    }
                }
                term_coeff = next;
                n += 1;
                if n > 1 << 40 {
                    return Err(Error::Divergence("shift resolvent series too slow".into()));
                }
            }
        }
    }
}

/// `e^{Aτ} + (∫₀^τ e^{At}dt)·B·F`, the one-step operator of a sampled-data
/// feedback loop.
pub fn sampled_data_operator(a: &DenseMatrix, b: &DenseMatrix, f: &DenseMatrix, tau: f64) -> Result<LinearOperator> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid("tau", format!("must be positive, got {tau}")));
    }
    if !a.is_square() {
        return Err(Error::invalid("A", "must be square"));
    }
    let n = a.rows();
    if b.rows() != n || f.cols() != n || b.cols() != f.rows() {
        return Err(Error::DimensionMismatch {
            expected: format!("B: {n}×m and F: m×{n}"),
            found: b.rows(),
        });
    }
    // exp([[A, I], [0, 0]]τ) = [[e^{Aτ}, ∫₀^τ e^{At}dt], [0, I]]
    let mut aug = DenseMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)] * tau;
        }
        aug[(i, n + i)] = C64::new(tau, 0.0);
    }
    let e = aug.expm()?;
    let mut phi = DenseMatrix::zeros(n, n);
    let mut gamma = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            phi[(i, j)] = e[(i, j)];
            gamma[(i, j)] = e[(i, n + j)];
        }
    }
    let t = &phi + &gamma.matmul(&b.matmul(f));
    LinearOperator::dense(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn vecc(v: &[C64]) -> ComplexVector {
        ComplexVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn apply_examples() {
        let id = LinearOperator::identity(2);
        let x = vecc(&[c(1.0, 0.0), c(0.0, 2.0)]);
        assert_eq!(id.apply(&x).unwrap(), x);

        let d = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j()).unwrap();
        let e3 = ComplexVector::basis(3, 3).unwrap();
        let y = d.apply(&e3).unwrap();
        assert!((y.as_slice()[2] - c(2.0 / 3.0, 0.0)).norm() < 1e-15);

        let n = LinearOperator::dense(DenseMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap()).unwrap();
        let y = n.apply(&vecc(&[c(0.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert_eq!(y.as_slice(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            n.apply(&vecc(&[c(1.0, 0.0)])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn power_apply_examples() {
        let d = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j()).unwrap();
        let e2 = ComplexVector::basis(2, 2).unwrap();
        assert_eq!(d.power_apply(0, &e2).unwrap(), e2);
        let y = d.power_apply(10, &e2).unwrap();
        assert!((y.as_slice()[1].re - 0.5f64.powi(10)).abs() < 1e-18);
        let n = LinearOperator::dense(DenseMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap()).unwrap();
        let y = n.power_apply(2, &vecc(&[c(3.0, 1.0), c(-2.0, 5.0)])).unwrap();
        assert!(y.norm() == 0.0);
        assert!(n.power_apply(-1, &e2).is_err());
    }

    #[test]
    fn norm_examples() {
        let t = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j()).unwrap();
        let s = LinearOperator::diagonal(DiagonalSymbol::inv_pow(0.5, 1.0)).unwrap();
        let rep = kernel_norm(None, &t, &ScalarKernel::power(4), Some(&s), 1e-12).unwrap();
        let bound = (0.5f64 / 4.5).sqrt() * (1.0 - 0.5 / 4.5f64).powi(4);
        assert!(rep.value <= bound + 1e-15 && rep.value > 0.9 * bound);
        assert_eq!(operator_norm(&LinearOperator::zero(3), 1e-12).unwrap().value, 0.0);
        let m = LinearOperator::dense(DenseMatrix::from_real_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap()).unwrap();
        assert!((operator_norm(&m, 1e-12).unwrap().value - 2.0).abs() < 1e-10);
        let dn = operator_norm(&t, 1e-12).unwrap();
        assert_eq!(dn.value, 1.0);
    }

    #[test]
    fn diagonal_norm_matches_brute_force() {
        let sym = DiagonalSymbol::Rotated {
            exponent: 1.0,
            twist: 0.7,
            twist_exponent: 0.5,
        }
        .complement();
        let op = LinearOperator::diagonal(sym.clone()).unwrap();
        let rep = operator_norm(&op, 1e-12).unwrap();
        let brute = (1..=1_000_000u64).map(|j| sym.value_at(j).norm()).fold(0.0, f64::max);
        assert!(brute <= rep.upper() * (1.0 + 1e-12));
        assert!(rep.value >= brute * (1.0 - 1e-12));
    }

    #[test]
    fn sampled_data_examples() {
        let z = DenseMatrix::zeros(1, 1);
        let one = DenseMatrix::identity(1);
        let t = sampled_data_operator(&z, &z, &one, 1.0).unwrap();
        assert!((t.to_dense().unwrap()[(0, 0)] - ONE).norm() < 1e-14);
        let t = sampled_data_operator(&z, &one, &one, 2.0).unwrap();
        assert!((t.to_dense().unwrap()[(0, 0)] - c(3.0, 0.0)).norm() < 1e-13);
        let a = DenseMatrix::from_real_rows(&[vec![-1.0]]).unwrap();
        let t = sampled_data_operator(&a, &one, &z, 1.0).unwrap();
        assert!((t.to_dense().unwrap()[(0, 0)].re - (-1.0f64).exp()).abs() < 1e-14);
        assert!(sampled_data_operator(&a, &one, &z, 0.0).is_err());
    }

    #[test]
    fn sampled_data_matches_quadrature() {
        // A = [[0,1],[-2,-3]]: ∫e^{At} by composite Simpson
        let a = DenseMatrix::from_real_rows(&[vec![0.0, 1.0], vec![-2.0, -3.0]]).unwrap();
        let b = DenseMatrix::from_real_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let f = DenseMatrix::from_real_rows(&[vec![-1.0, 0.5]]).unwrap();
        let tau = 0.7;
        let t = sampled_data_operator(&a, &b, &f, tau).unwrap().to_dense().unwrap();
        let m = 2000;
        let h = tau / m as f64;
        let mut integral = DenseMatrix::zeros(2, 2);
        for i in 0..=m {
            let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let e = a.scale(c(i as f64 * h, 0.0)).expm().unwrap();
            integral = &integral + &e.scale(c(w * h / 3.0, 0.0));
        }
        let expect = &a.scale(c(tau, 0.0)).expm().unwrap() + &integral.matmul(&b.matmul(&f));
        assert!((&t - &expect).max_abs() < 1e-10);
    }

    #[test]
    fn c0_shift_norms() {
        let t = LinearOperator::shift(DiagonalSymbol::constant(ONE), SequenceSpace::C0).unwrap();
        let s = LinearOperator::diagonal(DiagonalSymbol::log_weight(0.0)).unwrap();
        // α = 0: Σ_j r^{-j}/j = −log(1 − 1/r)
        for r in [1.5, 1.1, 1.01] {
            let rep = kernel_norm(None, &t, &ScalarKernel::resolvent(c(r, 0.0), 1), Some(&s), 1e-12).unwrap();
            let exact = -(1.0 - 1.0 / r).ln();
            assert!((rep.value - exact).abs() <= 1e-10 * exact, "{r}: {rep:?} vs {exact}");
        }
        let rep = kernel_norm(None, &t, &ScalarKernel::power(5), Some(&s), 1e-12).unwrap();
        assert!((rep.value - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn functional_square_sum_norm() {
        let t = LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_sqrt_j()).unwrap();
        let s = LinearOperator::functional(DiagonalSymbol::inv_pow(1.0, 1.0)).unwrap();
        let rep = kernel_norm(Some(&s), &t, &ScalarKernel::power(1), None, 1e-12).unwrap();
        // Σ j^{-2}(1 − j^{-1/2})²
        let mut brute = 0.0;
        for j in (1..=2_000_000u64).rev() {
            let jf = j as f64;
            brute += (1.0 - jf.powf(-0.5)).powi(2) / (jf * jf);
        }
        assert!((rep.value.powi(2) - brute).abs() < 1e-6);
    }

    #[test]
    fn power_bound_certificate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DenseMatrix::random(4, 4, &mut rng);
        let rho = m.spectral_radius().unwrap();
        let t = m.scale(c(0.9 / rho, 0.0));
        let pb = dense_power_bound(&t).unwrap();
        let mut p = DenseMatrix::identity(4);
        for n in 0..200u64 {
            assert!(p.spectral_norm(1e-13).value <= pb.bound(n) * (1.0 + 1e-8));
            p = p.matmul(&t);
        }
        let nil = DenseMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let pb = dense_power_bound(&nil).unwrap();
        assert_eq!(pb.vanishes_from, Some(2));
        assert_eq!(pb.bound(5), 0.0);
    }

    fn operator_catalog() -> Vec<LinearOperator> {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        vec![
            LinearOperator::dense(DenseMatrix::random(5, 5, &mut rng)).unwrap(),
            LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j()).unwrap(),
            LinearOperator::diagonal(DiagonalSymbol::Rotated { exponent: 1.0, twist: 1.0, twist_exponent: 0.5 }).unwrap(),
            LinearOperator::shift(DiagonalSymbol::inv_pow(0.5, 1.0), SequenceSpace::L2).unwrap(),
            LinearOperator::composite(vec![
                LinearOperator::diagonal(DiagonalSymbol::one_minus_inv_j()).unwrap(),
                LinearOperator::shift(DiagonalSymbol::constant(ONE), SequenceSpace::L2).unwrap(),
            ])
            .unwrap(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn linearity_and_adjoint(seed in 0u64..u64::MAX, which in 0usize..5) {
            let op = &operator_catalog()[which];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let len = op.probe_len(5);
            let x = ComplexVector::random(len, &mut rng).unwrap();
            let y = ComplexVector::random(len, &mut rng).unwrap();
            let (a, b) = (c(rng.gen(), rng.gen()), c(rng.gen(), rng.gen()));
            let lhs = op.apply(&x.scale(a).add(&y.scale(b))).unwrap();
            let rhs = op.apply(&x).unwrap().scale(a).add(&op.apply(&y).unwrap().scale(b));
            let diff = lhs.sub(&rhs).norm();
            prop_assert!(diff <= 1e-12 * lhs.norm().max(rhs.norm()).max(1e-300));

            let ax = op.apply(&x).unwrap();
            let w = ComplexVector::random(ax.len(), &mut rng).unwrap();
            let aw = op.adjoint_apply_truncated(&w, len).unwrap();
            let l = ax.inner(&w);
            let r = x.inner(&aw.truncate(len));
            prop_assert!((l - r).norm() <= 1e-10 * (ax.norm() * w.norm()).max(1e-300));
        }

        #[test]
        fn power_apply_composes(seed in 0u64..1000, m in 0i64..12, n in 0i64..12, which in 0usize..3) {
            let op = &operator_catalog()[which];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = op.random_probe(6, &mut rng).unwrap();
            let a = op.power_apply(m + n, &x).unwrap();
            let b = op.power_apply(m, &op.power_apply(n, &x).unwrap()).unwrap();
            prop_assert!(a.sub(&b).norm() <= 1e-10 * a.norm().max(b.norm()).max(1e-300));
        }
    }
}
