//! Exact integer and rational linear algebra for monomial polyhedra.
//!
//! A monomial polyhedron is given by an integer matrix `B`; every
//! invariant used downstream (the covering matrix `A`, its inverse, the
//! exponents `p*`, `q*`, `m`, the weight exponent) is derived here with
//! arbitrary-precision arithmetic.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exact::{format_rational, ExactInt, IntRef, IntSlice, RatRef, RatSlice};
use crate::exponent::ExponentVector;

/// Largest dimension for which the row normalization is attempted.
pub const MAX_DIMENSION: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("matrix is singular (det B = 0): {0}")]
    Singular(IntegerMatrix),
    #[error("no row permutation gives det B > 0 with B^-1 >= 0, so the matrix does not define a bounded monomial polyhedron: {0}")]
    NotBounded(IntegerMatrix),
    #[error("dimension {0} exceeds the supported maximum of {MAX_DIMENSION}")]
    TooLarge(usize),
    #[error("invalid matrix shape: {0}")]
    Shape(String),
}

/// Square matrix of arbitrary-precision integers, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerMatrix {
    n: usize,
    entries: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn new(rows: Vec<Vec<BigInt>>) -> Result<Self, LatticeError> {
        let n = rows.len();
        if n == 0 {
            return Err(LatticeError::Shape("matrix has no rows".into()));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(LatticeError::Shape(format!(
                "row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        Ok(IntegerMatrix {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self, LatticeError> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![BigInt::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = BigInt::one();
        }
        IntegerMatrix { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.n).map(|i| self.get(i, j).clone()).collect()
    }

    /// Entries as `i64`; panics if any entry does not fit.
    pub fn to_i64_rows(&self) -> Vec<Vec<i64>> {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|v| v.to_i64().expect("matrix entry exceeds i64"))
                    .collect()
            })
            .collect()
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|v| v.to_f64().unwrap_or(f64::NAN))
                    .collect()
            })
            .collect()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        let n = self.n;
        let mut m = self.entries.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if m[k * n + k].is_zero() {
                match (k + 1..n).find(|&i| !m[i * n + k].is_zero()) {
                    Some(i) => {
                        for j in 0..n {
                            m.swap(k * n + j, i * n + j);
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &m[i * n + j] * &m[k * n + k] - &m[i * n + k] * &m[k * n + j];
                    m[i * n + j] = v / &prev;
                }
            }
            prev = m[k * n + k].clone();
        }
        sign * &m[n * n - 1]
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> IntegerMatrix {
        let n = self.n;
        let mut entries = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != skip_row) {
            for j in (0..n).filter(|&j| j != skip_col) {
                entries.push(self.get(i, j).clone());
            }
        }
        IntegerMatrix { n: n - 1, entries }
    }

    pub fn mul(&self, other: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut entries = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * other.get(k, j);
                }
            }
        }
        IntegerMatrix { n, entries }
    }

    pub fn scalar_identity(n: usize, c: &BigInt) -> IntegerMatrix {
        let mut m = IntegerMatrix::identity(n);
        for i in 0..n {
            m.entries[i * n + i] = c.clone();
        }
        m
    }

    pub fn column_sums(&self) -> Vec<BigInt> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn to_rational(&self) -> RationalMatrix {
        RationalMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|v| BigRational::from_integer(v.clone()))
                .collect(),
        }
    }

    pub fn is_permutation_matrix(&self) -> bool {
        let n = self.n;
        let entries_ok = self.entries.iter().all(|v| v.is_zero() || v.is_one());
        let rows_ok = (0..n).all(|i| self.row(i).iter().filter(|v| v.is_one()).count() == 1);
        let cols_ok = (0..n).all(|j| (0..n).filter(|&i| self.get(i, j).is_one()).count() == 1);
        entries_ok && rows_ok && cols_ok
    }

    pub fn permute_rows(&self, perm: &[usize]) -> IntegerMatrix {
        IntegerMatrix {
            n: self.n,
            entries: perm.iter().flat_map(|&i| self.row(i).to_vec()).collect(),
        }
    }

    /// Row vector times matrix: `v·M`.
    pub fn left_mul(&self, v: &[BigInt]) -> Vec<BigInt> {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| &v[i] * self.get(i, j)).sum())
            .collect()
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl Serialize for IntegerMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<IntSlice<'_>> = (0..self.n).map(|i| IntSlice(self.row(i))).collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IntegerMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<ExactInt>> = Vec::deserialize(deserializer)?;
        IntegerMatrix::new(
            rows.into_iter()
                .map(|r| r.into_iter().map(|v| v.0).collect())
                .collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Square matrix of exact rationals, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    n: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn identity(n: usize) -> Self {
        IntegerMatrix::identity(n).to_rational()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.row(i).iter().map(crate::exact::rational_to_f64).collect())
            .collect()
    }

    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut entries = vec![BigRational::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    entries[i * n + j] += self.get(i, k) * other.get(k, j);
                }
            }
        }
        RationalMatrix { n, entries }
    }

    /// Row vector times matrix: `v·M`.
    pub fn left_mul(&self, v: &[BigRational]) -> Vec<BigRational> {
        (0..self.n)
            .map(|j| {
                (0..self.n)
                    .map(|i| &v[i] * self.get(i, j))
                    .fold(BigRational::zero(), |a, b| a + b)
            })
            .collect()
    }

    /// Exact inverse by Gauss–Jordan elimination; `None` when singular.
    pub fn inverse(&self) -> Option<RationalMatrix> {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut inv = RationalMatrix::identity(n).entries;
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[r * n + col].is_zero())?;
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                    inv.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[col * n + col].clone();
            for j in 0..n {
                a[col * n + j] /= &p;
                inv[col * n + j] /= &p;
            }
            for r in 0..n {
                if r == col || a[r * n + col].is_zero() {
                    continue;
                }
                let factor = a[r * n + col].clone();
                for j in 0..n {
                    let t = &factor * &a[col * n + j];
                    a[r * n + j] -= t;
                    let t = &factor * &inv[col * n + j];
                    inv[r * n + j] -= t;
                }
            }
        }
        Some(RationalMatrix { n, entries: inv })
    }
}

impl Serialize for RationalMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<RatSlice<'_>> = (0..self.n).map(|i| RatSlice(self.row(i))).collect();
        rows.serialize(serializer)
    }
}

/// Adjugate (transposed cofactor matrix). `M·adj(M) = det(M)·I`.
pub fn adjugate(m: &IntegerMatrix) -> IntegerMatrix {
    let n = m.dim();
    if n == 1 {
        return IntegerMatrix::identity(1);
    }
    let mut entries = vec![BigInt::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let cof = m.minor(j, i).determinant();
            entries[i * n + j] = if (i + j) % 2 == 0 { cof } else { -cof };
        }
    }
    IntegerMatrix { n, entries }
}

/// Every exact invariant of a monomial polyhedron.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainAnalysis {
    /// Defining matrix after row normalization.
    pub b: IntegerMatrix,
    /// Rows of the input placed in each row of `b`.
    pub row_permutation: Vec<usize>,
    /// Number of row permutations satisfying the normalization; more than
    /// one means the lexicographically first was chosen.
    pub qualifying_permutations: u64,
    pub det_b: BigInt,
    pub delta: IntegerMatrix,
    pub column_gcds: Vec<BigInt>,
    pub a: IntegerMatrix,
    pub c: RationalMatrix,
    pub ones_a: Vec<BigInt>,
    pub m: usize,
    pub p_star: BigRational,
    /// `None` stands for q* = ∞ (the polydisc).
    pub q_star: Option<BigRational>,
    pub weight_exponent: ExponentVector,
    pub alpha_cover: ExponentVector,
    pub degree: BigInt,
    pub trivial: bool,
}

impl DomainAnalysis {
    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    pub fn det_a(&self) -> BigInt {
        self.a.determinant()
    }

    pub fn p_star_f64(&self) -> f64 {
        crate::exact::rational_to_f64(&self.p_star)
    }

    /// Log-weight exponent `(m−1)(p*−1)`.
    pub fn log_weight_power(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(self.m as i64 - 1)) * (&self.p_star - BigRational::one())
    }

    /// Human-readable summary, e.g. `p* = 4/3, q* = 4, m = 1`.
    pub fn summary(&self) -> String {
        if self.trivial {
            return format!(
                "trivial polydisc (A is a permutation matrix): p* = {}, q* = inf, m = {}",
                format_rational(&self.p_star),
                self.m
            );
        }
        let q = match &self.q_star {
            Some(q) => format_rational(q),
            None => "inf".to_string(),
        };
        format!(
            "p* = {}, q* = {}, m = {}",
            format_rational(&self.p_star),
            q,
            self.m
        )
    }
}

impl Serialize for DomainAnalysis {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("DomainAnalysis", 16)?;
        st.serialize_field("B", &self.b)?;
        st.serialize_field("rowPermutation", &self.row_permutation)?;
        st.serialize_field("qualifyingPermutations", &self.qualifying_permutations)?;
        st.serialize_field("detB", &IntRef(&self.det_b))?;
        st.serialize_field("Delta", &self.delta)?;
        st.serialize_field("columnGcds", &IntSlice(&self.column_gcds))?;
        st.serialize_field("A", &self.a)?;
        st.serialize_field("C", &self.c)?;
        st.serialize_field("onesA", &IntSlice(&self.ones_a))?;
        st.serialize_field("m", &self.m)?;
        st.serialize_field("pStar", &RatRef(&self.p_star))?;
        match &self.q_star {
            Some(q) => st.serialize_field("qStar", &RatRef(q))?,
            None => st.serialize_field("qStar", "infinity")?,
        }
        st.serialize_field("weightExponent", &self.weight_exponent)?;
        st.serialize_field("alphaCover", &self.alpha_cover)?;
        st.serialize_field("degree", &IntRef(&self.degree))?;
        st.serialize_field("trivial", &self.trivial)?;
        st.end()
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Normalizes `B`, then derives `Δ`, `A`, `C = A⁻¹` and the exponents.
///
/// Permuting rows of `B` permutes columns of `B⁻¹`, so entrywise
/// nonnegativity of the inverse does not depend on the permutation and only
/// the sign of the determinant must be fixed. Exactly half of the `n!`
/// permutations qualify; the lexicographically first is used.
pub fn analyze_domain(b: &IntegerMatrix) -> Result<DomainAnalysis, LatticeError> {
    let n = b.dim();
    if n < 2 {
        return Err(LatticeError::Shape(format!(
            "domain matrices must be at least 2x2, got {n}x{n}"
        )));
    }
    if n > MAX_DIMENSION {
        return Err(LatticeError::TooLarge(n));
    }
    let det = b.determinant();
    if det.is_zero() {
        return Err(LatticeError::Singular(b.clone()));
    }
    let adj = adjugate(b);
    // B⁻¹ = adj/det is nonnegative iff every adjugate entry has the sign of det or is zero.
    let inverse_nonneg = adj
        .entries
        .iter()
        .all(|v| v.is_zero() || v.is_positive() == det.is_positive());
    if !inverse_nonneg {
        return Err(LatticeError::NotBounded(b.clone()));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    if det.is_negative() {
        perm.swap(n - 2, n - 1);
    }
    let nb = b.permute_rows(&perm);
    let det_b = det.abs();
    let delta = adjugate(&nb);

    let column_gcds: Vec<BigInt> = (0..n)
        .map(|j| {
            delta
                .column(j)
                .iter()
                .fold(BigInt::zero(), |g, v| g.gcd(v))
        })
        .collect();
    let mut a_entries = delta.entries.clone();
    for i in 0..n {
        for j in 0..n {
            a_entries[i * n + j] = &a_entries[i * n + j] / &column_gcds[j];
        }
    }
    let a = IntegerMatrix { n, entries: a_entries };
    let det_a = a.determinant();
    let c = a
        .to_rational()
        .inverse()
        .expect("A is nonsingular because B is");

    let ones_a = a.column_sums();
    let max_one = ones_a.iter().max().cloned().expect("n >= 2");
    let m = ones_a.iter().filter(|v| **v == max_one).count();
    let two = BigRational::from_integer(2.into());
    let mq = BigRational::from_integer(max_one.clone());
    let p_star = &two * &mq / (&mq + BigRational::one());
    let q_star = if p_star.is_one() {
        None
    } else {
        Some(&p_star / (&p_star - BigRational::one()))
    };
    let ones: Vec<BigRational> = vec![BigRational::one(); n];
    let ones_c = c.left_mul(&ones);
    let weight_exponent =
        ExponentVector::new(ones_c.iter().map(|v| BigRational::one() - v).collect());
    let alpha_cover = ExponentVector::new(
        ones_a
            .iter()
            .map(|v| BigRational::from_integer(v - BigInt::one()))
            .collect(),
    );
    let trivial = a.is_permutation_matrix();

    Ok(DomainAnalysis {
        b: nb,
        row_permutation: perm,
        qualifying_permutations: factorial(n) / 2,
        det_b,
        delta,
        column_gcds,
        a,
        c,
        ones_a,
        m,
        p_star,
        q_star,
        weight_exponent,
        alpha_cover,
        degree: det_a.abs(),
        trivial,
    })
}

/// True iff `β·A⁻¹` is an integer row vector, i.e. `z^β` is fixed by every
/// deck transformation.
pub fn is_gamma_invariant(beta: &ExponentVector, analysis: &DomainAnalysis) -> bool {
    assert_eq!(beta.len(), analysis.dim(), "dimension mismatch");
    analysis
        .c
        .left_mul(beta.entries())
        .iter()
        .all(|q| q.is_integer())
}

/// All invariant `β` with `1 ⪯ β` and entries at most `max_degree`, in
/// lexicographic order.
pub fn gamma_invariant_lattice(analysis: &DomainAnalysis, max_degree: u32) -> Vec<ExponentVector> {
    let n = analysis.dim();
    let mut out = Vec::new();
    if max_degree == 0 {
        return out;
    }
    let full = analysis.degree.is_one();
    let mut current = vec![1i64; n];
    loop {
        let beta = ExponentVector::from_integers(&current);
        if full || is_gamma_invariant(&beta, analysis) {
            out.push(beta);
        }
        // Odometer increment, last coordinate fastest.
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if current[k] < max_degree as i64 {
                current[k] += 1;
                for v in current.iter_mut().skip(k + 1) {
                    *v = 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: &[&[i64]]) -> IntegerMatrix {
        IntegerMatrix::from_i64(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn adjugate_examples() {
        assert_eq!(adjugate(&mat(&[&[1, -1], &[0, 1]])), mat(&[&[1, 1], &[0, 1]]));
        assert_eq!(adjugate(&IntegerMatrix::identity(4)), IntegerMatrix::identity(4));
        let b = mat(&[&[1, 0, 0], &[-1, 1, 0], &[1, -1, 1]]);
        assert_eq!(adjugate(&b), mat(&[&[1, 0, 0], &[1, 1, 0], &[0, 1, 1]]));
    }

    #[test]
    fn hartogs_triangle() {
        let an = analyze_domain(&mat(&[&[1, -1], &[0, 1]])).unwrap();
        assert_eq!(an.a, mat(&[&[1, 1], &[0, 1]]));
        assert_eq!(an.ones_a, vec![BigInt::from(1), BigInt::from(2)]);
        assert_eq!(an.m, 1);
        assert_eq!(an.p_star, q(4, 3));
        assert_eq!(an.q_star, Some(q(4, 1)));
        assert!(!an.trivial);
        assert_eq!(an.summary(), "p* = 4/3, q* = 4, m = 1");
        // w = |z2| on the Hartogs triangle
        assert_eq!(an.weight_exponent, ExponentVector::from_integers(&[0, 1]));
    }

    #[test]
    fn three_dimensional_example() {
        let an = analyze_domain(&mat(&[&[1, 0, 0], &[-1, 1, 0], &[1, -1, 1]])).unwrap();
        assert_eq!(an.a, mat(&[&[1, 0, 0], &[1, 1, 0], &[0, 1, 1]]));
        assert_eq!(an.ones_a, vec![2.into(), 2.into(), 1.into()]);
        assert_eq!(an.m, 2);
        assert_eq!(an.p_star, q(4, 3));
        assert_eq!(an.degree, BigInt::one());
        assert!(!an.trivial);
        assert_eq!(an.alpha_cover, ExponentVector::from_integers(&[1, 1, 0]));
    }

    #[test]
    fn identity_is_trivial() {
        let an = analyze_domain(&IntegerMatrix::identity(3)).unwrap();
        assert!(an.trivial);
        assert_eq!(an.ones_a, vec![BigInt::one(); 3]);
        assert!(an.p_star.is_one());
        assert_eq!(an.q_star, None);
        assert_eq!(an.m, 3);
    }

    #[test]
    fn generalized_hartogs() {
        let an = analyze_domain(&mat(&[&[2, -1], &[0, 1]])).unwrap();
        assert_eq!(an.a, mat(&[&[1, 1], &[0, 2]]));
        assert_eq!(an.ones_a, vec![1.into(), 3.into()]);
        assert_eq!(an.m, 1);
        assert_eq!(an.p_star, q(3, 2));
        assert_eq!(an.q_star, Some(q(3, 1)));
        assert_eq!(an.degree, BigInt::from(2));
    }

    #[test]
    fn negative_determinant_is_fixed_by_swapping_rows() {
        let an = analyze_domain(&mat(&[&[0, 1], &[1, -1]])).unwrap();
        assert_eq!(an.row_permutation, vec![1, 0]);
        assert_eq!(an.b, mat(&[&[1, -1], &[0, 1]]));
        assert_eq!(an.qualifying_permutations, 1);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            analyze_domain(&mat(&[&[1, 2], &[2, 4]])),
            Err(LatticeError::Singular(_))
        ));
        assert!(matches!(
            analyze_domain(&mat(&[&[1, 1], &[0, 1]])),
            Err(LatticeError::NotBounded(_))
        ));
        assert!(matches!(
            analyze_domain(&IntegerMatrix::identity(9)),
            Err(LatticeError::TooLarge(9))
        ));
    }

    #[test]
    fn gamma_invariance_examples() {
        let poly = analyze_domain(&mat(&[&[1, 0, 0], &[-1, 1, 0], &[1, -1, 1]])).unwrap();
        assert!(is_gamma_invariant(&ExponentVector::from_integers(&[1, 1, 1]), &poly));
        let gen = analyze_domain(&mat(&[&[2, -1], &[0, 1]])).unwrap();
        assert!(!is_gamma_invariant(&ExponentVector::from_integers(&[0, 1]), &gen));
        assert!(is_gamma_invariant(&ExponentVector::zeros(2), &gen));
    }

    #[test]
    fn lattice_examples() {
        let id = analyze_domain(&IntegerMatrix::identity(3)).unwrap();
        assert_eq!(gamma_invariant_lattice(&id, 1), vec![ExponentVector::ones(3)]);
        // β·A⁻¹ = (β1, (β2−β1)/2) for A = [[1,1],[0,2]]
        let gen = analyze_domain(&mat(&[&[2, -1], &[0, 1]])).unwrap();
        assert_eq!(
            gamma_invariant_lattice(&gen, 2),
            vec![
                ExponentVector::from_integers(&[1, 1]),
                ExponentVector::from_integers(&[2, 2])
            ]
        );
        let poly = analyze_domain(&mat(&[&[1, 0, 0], &[-1, 1, 0], &[1, -1, 1]])).unwrap();
        assert_eq!(gamma_invariant_lattice(&poly, 2).len(), 8);
    }

    #[test]
    fn analysis_json_uses_num_den() {
        let an = analyze_domain(&mat(&[&[1, -1], &[0, 1]])).unwrap();
        let v = serde_json::to_value(&an).unwrap();
        assert_eq!(v["pStar"], serde_json::json!({"num": 4, "den": 3}));
        assert_eq!(v["A"], serde_json::json!([[1, 1], [0, 1]]));
        assert_eq!(v["C"][0][1], serde_json::json!({"num": -1, "den": 1}));
    }

    fn square(n: usize, lo: i64, hi: i64) -> impl Strategy<Value = Vec<Vec<i64>>> {
        prop::collection::vec(prop::collection::vec(lo..=hi, n), n)
    }

    fn any_small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (2usize..=4).prop_flat_map(|n| square(n, -5, 5))
    }

    /// Adjugates of nonnegative matrices with positive determinant always
    /// have a nonnegative inverse, so this strategy yields valid domains.
    fn valid_domain_matrix() -> impl Strategy<Value = IntegerMatrix> {
        (2usize..=4)
            .prop_flat_map(|n| square(n, 0, 3))
            .prop_filter_map("det of generator must be positive", |rows| {
                let nmat = IntegerMatrix::from_i64(&rows).unwrap();
                if nmat.determinant().is_positive() {
                    Some(adjugate(&nmat))
                } else {
                    None
                }
            })
    }

    fn check_invariants(an: &DomainAnalysis) -> Result<(), TestCaseError> {
        let n = an.dim();
        prop_assert!(an.det_b.is_positive());
        prop_assert_eq!(
            an.b.mul(&an.delta),
            IntegerMatrix::scalar_identity(n, &an.det_b)
        );
        let d = IntegerMatrix {
            n,
            entries: (0..n * n)
                .map(|k| {
                    if k / n == k % n {
                        an.column_gcds[k % n].clone()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect(),
        };
        // Δ = A·diag(gcds): each column of Δ is the matching column of A scaled.
        prop_assert_eq!(an.a.mul(&d), an.delta.clone());
        prop_assert!(an.delta.entries.iter().all(|v| !v.is_negative()));
        prop_assert!(an.a.entries.iter().all(|v| !v.is_negative()));
        prop_assert!(!an.det_a().is_zero());
        prop_assert_eq!(an.a.to_rational().mul(&an.c), RationalMatrix::identity(n));
        let one = BigRational::one();
        if an.trivial {
            prop_assert!(an.p_star.is_one());
        } else {
            let two = BigRational::from_integer(2.into());
            let qs = an.q_star.clone().unwrap();
            prop_assert!(an.p_star > one && an.p_star < two);
            prop_assert!(qs >= two);
            prop_assert_eq!(one.clone() / &an.p_star + one.clone() / &qs, one.clone());
        }
        prop_assert!(an.m >= 1 && an.m <= n);
        // w = ρ_{1−1C} is at most 1 on the domain.
        // On the domain y = B·t ⪰ 0 where t = −log|z|, and −log w = (1−1C)·B⁻¹·y.
        let b_inv = an.b.to_rational().inverse().unwrap();
        let lam = b_inv.left_mul(an.weight_exponent.entries());
        prop_assert!(lam.iter().all(|v| !v.is_negative()));
        Ok(())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn invariants_hold_for_random_matrices(rows in any_small_matrix()) {
            let b = IntegerMatrix::from_i64(&rows).unwrap();
            if let Ok(an) = analyze_domain(&b) {
                check_invariants(&an)?;
            }
        }

        #[test]
        fn invariants_hold_for_valid_domains(b in valid_domain_matrix()) {
            let an = analyze_domain(&b).unwrap();
            check_invariants(&an)?;
        }

        #[test]
        fn adjugate_identity(rows in any_small_matrix()) {
            let m = IntegerMatrix::from_i64(&rows).unwrap();
            let n = m.dim();
            prop_assert_eq!(m.mul(&adjugate(&m)), IntegerMatrix::scalar_identity(n, &m.determinant()));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn invariant_exponents_form_a_semigroup(
            b in valid_domain_matrix(),
            x in prop::collection::vec(0i64..6, 4),
            y in prop::collection::vec(0i64..6, 4),
        ) {
            let an = analyze_domain(&b).unwrap();
            let n = an.dim();
            let b1 = ExponentVector::from_integers(&x[..n]);
            let b2 = ExponentVector::from_integers(&y[..n]);
            if is_gamma_invariant(&b1, &an) && is_gamma_invariant(&b2, &an) {
                prop_assert!(is_gamma_invariant(&b1.add(&b2), &an));
            }
            // μA is invariant for every integer μ.
            let mu: Vec<BigInt> = x[..n].iter().map(|&v| BigInt::from(v)).collect();
            let beta = ExponentVector::new(
                an.a.left_mul(&mu).into_iter().map(BigRational::from_integer).collect(),
            );
            prop_assert!(is_gamma_invariant(&beta, &an));
        }

        #[test]
        fn lattice_matches_brute_force(b in valid_domain_matrix(), max_degree in 0u32..=6) {
            let an = analyze_domain(&b).unwrap();
            let n = an.dim();
            let max_degree = if n == 4 { max_degree.min(4) } else { max_degree };
            let got = gamma_invariant_lattice(&an, max_degree);
            // Brute force: integrality of β·adj(A)/det(A) using i64 only.
            let adj_a = adjugate(&an.a).to_i64_rows();
            let det_a = an.det_a().to_i64().unwrap();
            let mut want = Vec::new();
            let total = (max_degree as usize).pow(n as u32);
            for idx in 0..total {
                let mut beta = vec![0i64; n];
                let mut r = idx;
                for k in (0..n).rev() {
                    beta[k] = 1 + (r % max_degree as usize) as i64;
                    r /= max_degree as usize;
                }
                let ok = (0..n).all(|j| {
                    let s: i64 = (0..n).map(|i| beta[i] * adj_a[i][j]).sum();
                    s % det_a == 0
                });
                if ok {
                    want.push(ExponentVector::from_integers(&beta));
                }
            }
            prop_assert_eq!(got, want);
        }
    }
}
