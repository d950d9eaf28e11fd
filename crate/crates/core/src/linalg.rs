//! Small dense complex linear algebra: products, LU solves, the matrix
//! exponential and spectral-norm estimation.
//!
//! Everything here targets desk-scale matrices (dimension up to a few
//! hundred). Storage is row-major.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::invalid("rows", "matrix must have at least one row"));
        }
        let c = rows[0].len();
        if c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(Error::invalid("rows", "rows must be non-empty and of equal length"));
        }
        let data: Vec<C64> = rows.into_iter().flatten().collect();
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("rows", "entries must be finite"));
        }
        Ok(Self { rows: r, cols: c, data })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Matrix with i.i.d. entries whose real and imaginary parts are uniform
    /// on [-1, 1].
    pub fn random(rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        let data = (0..rows * cols)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[C64]) {
        for (i, &z) in col.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// Entrywise sum; panics on a shape mismatch.
    pub fn add(&self, other: &DenseMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(ZERO, |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let base = i * other.cols;
                for (j, &b) in orow.iter().enumerate() {
                    out.data[base + j] += a * b;
                }
            }
        }
        out
    }

    /// `self^n` by binary powering.
    pub fn pow(&self, mut n: u64) -> DenseMatrix {
        debug_assert!(self.is_square());
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.matmul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.matmul(&base);
            }
        }
        result
    }

    /// `shift·I − self`.
    pub fn shifted_negation(&self, shift: C64) -> DenseMatrix {
        let mut out = self.scale(-ONE);
        for i in 0..self.rows.min(self.cols) {
            out[(i, i)] += shift;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest singular value by power iteration on `A*A`.
    pub fn spectral_norm(&self, tol: f64) -> NormEstimate {
        spectral_norm(self, tol, MAX_POWER_ITERATIONS)
    }

    pub fn lu(&self) -> Result<Lu> {
        Lu::factor(self)
    }

    pub fn inverse(&self) -> Result<DenseMatrix> {
        let lu = self.lu()?;
        let mut inv = Self::identity(self.rows);
        lu.solve_matrix_in_place(&mut inv);
        Ok(inv)
    }

    /// Eigenvalues via a complex Schur decomposition.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        if !self.is_square() {
            return Err(Error::invalid("matrix", "eigenvalues need a square matrix"));
        }
        let m = nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data);
        let schur = nalgebra::Schur::try_new(m, 1e-14, 100_000)
            .ok_or_else(|| Error::Singular("Schur iteration did not converge".into()))?;
        let (_, t) = schur.unpack();
        Ok((0..self.rows).map(|i| t[(i, i)]).collect())
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(self
            .eigenvalues()?
            .into_iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    /// Matrix exponential by scaling and squaring with a diagonal [6/6] Padé
    /// approximant. The scaled matrix has 1-norm at most 1/2.
    pub fn expm(&self) -> Result<DenseMatrix> {
        if !self.is_square() {
            return Err(Error::invalid("matrix", "exponential needs a square matrix"));
        }
        let n = self.rows;
        let norm = self.norm_one();
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as i32
        } else {
            0
        };
        let a = self.scale(C64::new(2f64.powi(-squarings), 0.0));
        // [6/6] Padé coefficients c_j = (2q-j)! q! / ((2q)! j! (q-j)!)
        const C: [f64; 7] = [
            1.0,
            0.5,
            5.0 / 44.0,
            1.0 / 66.0,
            1.0 / 792.0,
            1.0 / 15840.0,
            1.0 / 665280.0,
        ];
        let mut power = Self::identity(n);
        let mut num = Self::zeros(n, n);
        let mut den = Self::zeros(n, n);
        for (j, &c) in C.iter().enumerate() {
            if j > 0 {
                power = power.matmul(&a);
            }
            let term = power.scale(C64::new(c, 0.0));
            num = &num + &term;
            den = if j % 2 == 0 { &den + &term } else { &den - &term };
        }
        let mut result = den.lu()?.solve_matrix(&num);
        for _ in 0..squarings {
            result = result.matmul(&result);
        }
        Ok(result)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.matmul(rhs)
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
    /// 1-norm of the factored matrix, kept for condition estimates.
    norm_one: f64,
}

impl Lu {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::invalid("matrix", "LU needs a square matrix"));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pivot_abs) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs <= scale * 1e-300 || pivot_abs == 0.0 {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                if factor != ZERO {
                    for j in k + 1..n {
                        let u = lu[k * n + j];
                        lu[i * n + j] -= factor * u;
                    }
                }
            }
        }
        Ok(Self {
            n,
            lu,
            perm,
            norm_one: a.norm_one(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    /// Solves `A^* x = b`.
    pub fn solve_adjoint(&self, b: &[C64]) -> Vec<C64> {
        // A = P^T L U, so A^* = U^* L^* P.
        let n = self.n;
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for j in 0..i {
                s -= self.lu[j * n + i].conj() * z[j];
            }
            z[i] = s / self.lu[i * n + i].conj();
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in i + 1..n {
                s -= self.lu[j * n + i].conj() * z[j];
            }
            z[i] = s;
        }
        let mut x = vec![ZERO; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        x
    }

    pub fn solve_matrix(&self, b: &DenseMatrix) -> DenseMatrix {
        let mut out = b.clone();
        self.solve_matrix_in_place(&mut out);
        out
    }

    pub fn solve_matrix_in_place(&self, b: &mut DenseMatrix) {
        for j in 0..b.cols {
            let col = self.solve(&b.column(j));
            b.set_column(j, &col);
        }
    }

    /// 1-norm condition number, computed from the explicit inverse.
    pub fn condition_one(&self) -> f64 {
        let mut inv = DenseMatrix::identity(self.n);
        self.solve_matrix_in_place(&mut inv);
        self.norm_one * inv.norm_one()
    }
}

pub const MAX_POWER_ITERATIONS: usize = 10_000;

/// Result of a norm computation together with its error certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    /// Absolute error bound on `value`.
    pub error: f64,
    pub iterations: usize,
}

impl NormEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error: 0.0,
            iterations: 0,
        }
    }

    pub fn relative_error(&self) -> f64 {
        if self.value > 0.0 {
            self.error / self.value
        } else {
            self.error
        }
    }
}

/// Power iteration on the Gram matrix `A*A` from two seeded starts.
///
/// The reported error is the eigen-residual bound `‖A*Av − μv‖ / (2σ)`,
/// which bounds the distance of the estimate to some singular value.
pub fn spectral_norm(a: &DenseMatrix, tol: f64, max_iter: usize) -> NormEstimate {
    if a.max_abs() == 0.0 {
        return NormEstimate::exact(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + (a.rows * 31 + a.cols) as u64);
    let ah = a.adjoint();
    let mut best = NormEstimate::exact(0.0);
    for _start in 0..2 {
        let mut v: Vec<C64> = (0..a.cols)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        normalize(&mut v);
        let mut estimate = NormEstimate::exact(0.0);
        for it in 1..=max_iter {
            let w = a.mul_vec(&v);
            let g = ah.mul_vec(&w);
            let mu: f64 = w.iter().map(|z| z.norm_sqr()).sum();
            let residual = g
                .iter()
                .zip(&v)
                .map(|(gi, vi)| (gi - vi * mu).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let sigma = mu.sqrt();
            estimate = NormEstimate {
                value: sigma,
                error: if sigma > 0.0 { residual / (2.0 * sigma) } else { 0.0 },
                iterations: it,
            };
            let gnorm = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if gnorm == 0.0 {
                break;
            }
            v = g.into_iter().map(|z| z / gnorm).collect();
            if residual <= tol * mu.max(f64::MIN_POSITIVE) * 0.5 {
                break;
            }
        }
        if estimate.value > best.value {
            best = estimate;
        }
    }
    best
}

pub(crate) fn normalize(v: &mut [C64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn nilpotent_norm_is_two() {
        let a = DenseMatrix::from_real_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        let est = a.spectral_norm(1e-14);
        assert!((est.value - 2.0).abs() < 1e-12, "{est:?}");
    }

    #[test]
    fn lu_solve_and_adjoint_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = DenseMatrix::random(6, 6, &mut rng);
        let b: Vec<C64> = (0..6).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let lu = a.lu().unwrap();
        let x = lu.solve(&b);
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-12);
        }
        let y = lu.solve_adjoint(&b);
        let r = a.adjoint().mul_vec(&y);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = DenseMatrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(a.lu(), Err(Error::Singular(_))));
    }

    #[test]
    fn expm_of_scalar_and_nilpotent() {
        let a = DenseMatrix::from_real_rows(&[vec![-1.0]]).unwrap();
        let e = a.expm().unwrap();
        assert!((e[(0, 0)].re - (-1f64).exp()).abs() < 1e-15);

        // exp([[0, t], [0, 0]]) = [[1, t], [0, 1]]
        let n = DenseMatrix::from_real_rows(&[vec![0.0, 3.0], vec![0.0, 0.0]]).unwrap();
        let e = n.expm().unwrap();
        assert!((e[(0, 1)].re - 3.0).abs() < 1e-13);
        assert!((e[(0, 0)].re - 1.0).abs() < 1e-14);

        // rotation generator: exp([[0, -θ], [θ, 0]]) has cos θ on the diagonal
        let th = 2.5;
        let r = DenseMatrix::from_real_rows(&[vec![0.0, -th], vec![th, 0.0]]).unwrap();
        let e = r.expm().unwrap();
        assert!((e[(0, 0)].re - th.cos()).abs() < 1e-13);
        assert!((e[(1, 0)].re - th.sin()).abs() < 1e-13);
    }

    #[test]
    fn eigenvalues_of_triangular_matrix() {
        let a = DenseMatrix::from_rows(vec![
            vec![c(0.5, 0.0), c(3.0, 1.0)],
            vec![c(0.0, 0.0), c(0.0, 0.9)],
        ])
        .unwrap();
        let mut ev: Vec<f64> = a.eigenvalues().unwrap().iter().map(|z| z.norm()).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] - 0.5).abs() < 1e-12 && (ev[1] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1, 3, 5, 8] {
            let a = DenseMatrix::random(n, n, &mut rng);
            let est = a.spectral_norm(1e-13);
            let m = nalgebra::DMatrix::from_row_slice(n, n, a.as_slice());
            let svd = m.singular_values();
            let smax = svd.iter().cloned().fold(0.0, f64::max);
            assert!((est.value - smax).abs() <= 1e-9 * smax, "n={n}: {} vs {smax}", est.value);
        }
    }

    #[test]
    fn binary_power_matches_repeated_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DenseMatrix::random(4, 4, &mut rng).scale(c(0.4, 0.0));
        let mut direct = DenseMatrix::identity(4);
        for _ in 0..13 {
            direct = direct.matmul(&a);
        }
        let fast = a.pow(13);
        assert!((&direct - &fast).max_abs() < 1e-13);
    }
}
