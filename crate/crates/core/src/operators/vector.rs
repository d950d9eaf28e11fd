use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

/// A non-empty finite list of finite complex numbers.
///
/// On sequence spaces it stands for the finitely supported sequence with
/// these leading coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<C64>", into = "Vec<C64>")]
pub struct ComplexVector(Vec<C64>);

impl TryFrom<Vec<C64>> for ComplexVector {
    type Error = Error;

    fn try_from(v: Vec<C64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ComplexVector> for Vec<C64> {
    fn from(v: ComplexVector) -> Self {
        v.0
    }
}

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("entries", "vector must have length ≥ 1"));
        }
        if let Some(i) = entries.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("entries", format!("non-finite entry at index {i}")));
        }
        Ok(ComplexVector(entries))
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![ZERO; len])
    }

    /// Unit vector `e_j` (1-based) of length `len`.
    pub fn basis(j: usize, len: usize) -> Result<Self> {
        if j == 0 || j > len {
            return Err(Error::invalid("j", format!("basis index {j} outside 1..={len}")));
        }
        let mut v = vec![ZERO; len];
        v[j - 1] = C64::new(1.0, 0.0);
        Self::new(v)
    }

    /// Entries with independent uniform real and imaginary parts in [−1, 1].
    pub fn random(len: usize, rng: &mut impl Rng) -> Result<Self> {
        Self::new(
            (0..len)
                .map(|_| C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
                .collect(),
        )
    }

    /// Random vector normalized to unit ℓ^q norm.
    pub fn random_unit(len: usize, q: f64, rng: &mut impl Rng) -> Result<Self> {
        let v = Self::random(len, rng)?;
        let n = v.norm_q(q);
        Ok(v.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// ℓ^q norm; `q = ∞` gives the sup norm.
    pub fn norm_q(&self, q: f64) -> f64 {
        if q.is_infinite() {
            self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
        } else if q == 2.0 {
            self.norm()
        } else {
            self.0.iter().map(|z| z.norm().powf(q)).sum::<f64>().powf(1.0 / q)
        }
    }

    /// `⟨x, y⟩ = Σ x_i conj(y_i)`, zero-padding the shorter vector.
    pub fn inner(&self, other: &ComplexVector) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn scale(&self, a: C64) -> ComplexVector {
        ComplexVector(self.0.iter().map(|z| z * a).collect())
    }

    fn zip_with(&self, other: &ComplexVector, f: impl Fn(C64, C64) -> C64) -> ComplexVector {
        let n = self.len().max(other.len());
        ComplexVector(
            (0..n)
                .map(|i| {
                    f(
                        self.0.get(i).copied().unwrap_or(ZERO),
                        other.0.get(i).copied().unwrap_or(ZERO),
                    )
                })
                .collect(),
        )
    }

    /// Coordinatewise sum, zero-padding the shorter vector.
    pub fn add(&self, other: &ComplexVector) -> ComplexVector {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ComplexVector) -> ComplexVector {
        self.zip_with(other, |a, b| a - b)
    }

    /// First `len` coordinates, zero-padded if needed.
    pub fn truncate(&self, len: usize) -> ComplexVector {
        let mut v = self.0.clone();
        v.resize(len.max(1), ZERO);
        ComplexVector(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_vectors() {
        assert!(ComplexVector::new(vec![]).is_err());
        assert!(ComplexVector::new(vec![C64::new(f64::NAN, 0.0)]).is_err());
        assert!(ComplexVector::basis(0, 3).is_err());
    }

    #[test]
    fn norms_and_inner_products() {
        let v = ComplexVector::new(vec![C64::new(3.0, 0.0), C64::new(0.0, 4.0)]).unwrap();
        assert_eq!(v.norm(), 5.0);
        assert_eq!(v.norm_q(1.0), 7.0);
        assert_eq!(v.norm_q(f64::INFINITY), 4.0);
        assert_eq!(v.inner(&v), C64::new(25.0, 0.0));
    }

    #[test]
    fn serde_round_trip_validates() {
        let v = ComplexVector::from_real(&[1.0, 2.0]).unwrap();
        let s = serde_json::to_string(&v).unwrap();
        let back: ComplexVector = serde_json::from_str(&s).unwrap();
        assert_eq!(v, back);
        assert!(serde_json::from_str::<ComplexVector>("[]").is_err());
    }
}
