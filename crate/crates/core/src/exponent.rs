use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::exact::{format_rational, rational_to_f64, ExactRational, RatSlice};

/// A tuple of exact rationals used as a multi-index or weight exponent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentVector(Vec<BigRational>);

impl ExponentVector {
    pub fn new(entries: Vec<BigRational>) -> Self {
        ExponentVector(entries)
    }

    pub fn from_integers(entries: &[i64]) -> Self {
        ExponentVector(
            entries
                .iter()
                .map(|&v| BigRational::from_integer(BigInt::from(v)))
                .collect(),
        )
    }

    /// Build from `(numerator, denominator)` pairs. Panics on a zero denominator.
    pub fn from_ratios(entries: &[(i64, i64)]) -> Self {
        ExponentVector(
            entries
                .iter()
                .map(|&(n, d)| BigRational::new(n.into(), d.into()))
                .collect(),
        )
    }

    pub fn zeros(n: usize) -> Self {
        ExponentVector(vec![BigRational::zero(); n])
    }

    pub fn ones(n: usize) -> Self {
        ExponentVector(vec![BigRational::one(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rational_to_f64).collect()
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|q| q.is_integer())
    }

    /// Integer entries as `i64`, or `None` if any entry is fractional or too large.
    pub fn to_integers(&self) -> Option<Vec<i64>> {
        self.0
            .iter()
            .map(|q| if q.is_integer() { q.numer().to_i64() } else { None })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|q| q.is_zero())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|q| !q.is_negative())
    }

    /// Largest entry, written ‖α‖∞ for nonnegative tuples.
    pub fn sup_norm(&self) -> BigRational {
        self.0
            .iter()
            .cloned()
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    /// Number of entries equal to the largest entry.
    pub fn max_multiplicity(&self) -> usize {
        let top = self.sup_norm();
        self.0.iter().filter(|q| **q == top).count()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "dimension mismatch");
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "dimension mismatch");
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        ExponentVector(self.0.iter().map(|a| a * k).collect())
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, q) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", format_rational(q))?;
        }
        write!(f, ")")
    }
}

impl Serialize for ExponentVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RatSlice(&self.0).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExponentVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw: Vec<ExactRational> = Vec::deserialize(deserializer)?;
        Ok(ExponentVector(raw.into_iter().map(|q| q.0).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sup_norm_and_multiplicity() {
        let a = ExponentVector::from_integers(&[3, 3, 1]);
        assert_eq!(a.sup_norm(), BigRational::from_integer(3.into()));
        assert_eq!(a.max_multiplicity(), 2);
        assert_eq!(ExponentVector::from_integers(&[2, 1]).max_multiplicity(), 1);
    }

    #[test]
    fn json_accepts_mixed_forms() {
        let v: ExponentVector = serde_json::from_str(r#"[1, [1,2], "3/4"]"#).unwrap();
        assert_eq!(v, ExponentVector::from_ratios(&[(1, 1), (1, 2), (3, 4)]));
        assert_eq!(v.to_string(), "(1,1/2,3/4)");
        assert_eq!(v.to_integers(), None);
    }
}
