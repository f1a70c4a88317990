//! Exact arithmetic: rationals modulo one, big-integer matrices, Smith normal
//! form, finite abelian groups and linear congruences over `Q/Z`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Default cap on the order of a group that may be enumerated.
pub const ENUMERATION_BOUND: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactAlgError {
    #[error("malformed rational {0:?}: expected \"p/q\" or an integer")]
    MalformedRational(String),
    #[error("invariant factor {value} at position {index} is below 2")]
    FactorTooSmall { index: usize, value: u64 },
    #[error("invariant factor {prev} does not divide {next}")]
    NotDivisibilityChain { prev: u64, next: u64 },
    #[error("group order {order} exceeds the enumeration bound {bound}")]
    TooLarge { order: u128, bound: u64 },
    #[error("element has {got} coordinates, group has {expected}")]
    RankMismatch { expected: usize, got: usize },
    #[error("matrix shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not unimodular")]
    NotUnimodular,
    #[error("zero or negative cyclic order in presentation")]
    BadPresentation,
    #[error("congruence has no solution")]
    NoSolution(NoSolution),
}

/// A reduced rational number in `[0, 1)`, representing an element of `Q/Z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QmodZ(BigRational);

impl QmodZ {
    pub fn zero() -> Self {
        QmodZ(BigRational::zero())
    }

    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_rational(BigRational::new(num.into(), den.into()))
    }

    pub fn from_rational(r: BigRational) -> Self {
        let fl = r.floor();
        QmodZ(r - fl)
    }

    pub fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        Self::from_rational(BigRational::new(num.clone(), den.clone()))
    }

    pub fn half() -> Self {
        QmodZ::new(1, 2)
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(0.0)
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        Self::from_rational(&self.0 * BigRational::from_integer(k.clone()))
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        self.mul_int(&BigInt::from(k))
    }

    /// Numerator over a fixed denominator `n`, provided the denominator of
    /// `self` divides `n`.
    pub fn numerator_over(&self, n: u64) -> Option<u64> {
        let scaled = &self.0 * BigRational::from_integer(BigInt::from(n));
        if scaled.is_integer() {
            scaled.to_integer().to_u64()
        } else {
            None
        }
    }
}

impl Default for QmodZ {
    fn default() -> Self {
        QmodZ::zero()
    }
}

impl PartialOrd for QmodZ {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QmodZ {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl Add for QmodZ {
    type Output = QmodZ;
    fn add(self, rhs: QmodZ) -> QmodZ {
        QmodZ::from_rational(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a QmodZ> for &'a QmodZ {
    type Output = QmodZ;
    fn add(self, rhs: &QmodZ) -> QmodZ {
        QmodZ::from_rational(&self.0 + &rhs.0)
    }
}

impl AddAssign for QmodZ {
    fn add_assign(&mut self, rhs: QmodZ) {
        *self = QmodZ::from_rational(&self.0 + rhs.0);
    }
}

impl<'a> AddAssign<&'a QmodZ> for QmodZ {
    fn add_assign(&mut self, rhs: &QmodZ) {
        *self = QmodZ::from_rational(&self.0 + &rhs.0);
    }
}

impl Sub for QmodZ {
    type Output = QmodZ;
    fn sub(self, rhs: QmodZ) -> QmodZ {
        QmodZ::from_rational(self.0 - rhs.0)
    }
}

impl<'a> Sub<&'a QmodZ> for &'a QmodZ {
    type Output = QmodZ;
    fn sub(self, rhs: &QmodZ) -> QmodZ {
        QmodZ::from_rational(&self.0 - &rhs.0)
    }
}

impl Neg for QmodZ {
    type Output = QmodZ;
    fn neg(self) -> QmodZ {
        QmodZ::from_rational(-self.0)
    }
}

impl<'a> Neg for &'a QmodZ {
    type Output = QmodZ;
    fn neg(self) -> QmodZ {
        QmodZ::from_rational(-self.0.clone())
    }
}

impl fmt::Display for QmodZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for QmodZ {
    type Err = ExactAlgError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s).map(QmodZ::from_rational)
    }
}

/// Parses `"p/q"` or `"p"` with an optional leading minus sign. Nothing else
/// is accepted: no whitespace, no decimal points, no zero denominators.
pub fn parse_rational(s: &str) -> Result<BigRational, ExactAlgError> {
    let bad = || ExactAlgError::MalformedRational(s.to_string());
    let is_int = |t: &str| {
        let digits = t.strip_prefix('-').unwrap_or(t);
        !digits.is_empty() && digits.bytes().all(|c| c.is_ascii_digit())
    };
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p, q),
        None => (s, "1"),
    };
    if !is_int(p) || !q.bytes().all(|c| c.is_ascii_digit()) || q.is_empty() {
        return Err(bad());
    }
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}

/// A phase in `R/Z` carried as an exact rational part plus a floating part.
#[derive(Clone, Debug, PartialEq)]
pub struct CirclePhase {
    pub exact: QmodZ,
    pub float: f64,
}

impl CirclePhase {
    pub fn exact(q: QmodZ) -> Self {
        CirclePhase { exact: q, float: 0.0 }
    }

    pub fn float(x: f64) -> Self {
        CirclePhase { exact: QmodZ::zero(), float: x }
    }

    /// The phase reduced into `[0, 1)`.
    pub fn value(&self) -> f64 {
        let v = self.exact.to_f64() + self.float;
        let r = v - v.floor();
        if r >= 1.0 {
            0.0
        } else {
            r
        }
    }

    /// Distance to zero on the circle.
    pub fn distance_to_zero(&self) -> f64 {
        let v = self.value();
        v.min(1.0 - v)
    }
}

impl Add for CirclePhase {
    type Output = CirclePhase;
    fn add(self, rhs: CirclePhase) -> CirclePhase {
        CirclePhase { exact: self.exact + rhs.exact, float: self.float + rhs.float }
    }
}

impl Neg for CirclePhase {
    type Output = CirclePhase;
    fn neg(self) -> CirclePhase {
        CirclePhase { exact: -self.exact, float: -self.float }
    }
}

/// Dense matrix of arbitrary-precision integers, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        let data = rows.iter().flat_map(|x| x.iter().map(|&v| BigInt::from(v))).collect();
        IntMatrix { rows: r, cols: c, data }
    }

    pub fn from_big_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> Result<Self, ExactAlgError> {
        if rows.iter().any(|x| x.len() != cols) {
            return Err(ExactAlgError::Shape("ragged rows".into()));
        }
        let r = rows.len();
        Ok(IntMatrix { rows: r, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn diagonal(entries: &[i64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * n + i] = BigInt::from(e);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn get_i64(&self, i: usize, j: usize) -> i64 {
        self.get(i, j).to_i64().expect("entry does not fit in i64")
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_i64()).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, rhs: &IntMatrix) -> Result<IntMatrix, ExactAlgError> {
        if self.cols != rhs.rows {
            return Err(ExactAlgError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let idx = i * rhs.cols + j;
                    out.data[idx] += a * rhs.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt, ExactAlgError> {
        if !self.is_square() {
            return Err(ExactAlgError::Shape("determinant of non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(sign * &a[n - 1][n - 1])
    }

    pub fn is_unimodular(&self) -> bool {
        self.determinant().map(|d| d.abs().is_one()).unwrap_or(false)
    }

    /// Inverse of a unimodular matrix, by exact Gauss-Jordan elimination.
    pub fn inverse_unimodular(&self) -> Result<IntMatrix, ExactAlgError> {
        let inv = self.inverse_rational()?;
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let q = &inv[i][j];
                if !q.is_integer() {
                    return Err(ExactAlgError::NotUnimodular);
                }
                out.set(i, j, q.to_integer());
            }
        }
        Ok(out)
    }

    /// Inverse over the rationals.
    pub fn inverse_rational(&self) -> Result<Vec<Vec<BigRational>>, ExactAlgError> {
        if !self.is_square() {
            return Err(ExactAlgError::Shape("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut row: Vec<BigRational> =
                    self.row(i).iter().map(|x| BigRational::from_integer(x.clone())).collect();
                row.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
                row
            })
            .collect();
        for c in 0..n {
            let p = (c..n).find(|&i| !a[i][c].is_zero()).ok_or(ExactAlgError::NotUnimodular)?;
            a.swap(c, p);
            let piv = a[c][c].clone();
            for x in a[c].iter_mut() {
                *x = &*x / &piv;
            }
            for i in 0..n {
                if i != c && !a[i][c].is_zero() {
                    let f = a[i][c].clone();
                    for j in 0..2 * n {
                        let v = &a[c][j] * &f;
                        a[i][j] -= v;
                    }
                }
            }
        }
        Ok(a.into_iter().map(|row| row[n..].to_vec()).collect())
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + i, r * self.cols + j);
        }
    }

    /// row[dst] += k * row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        for c in 0..self.cols {
            let v = self.get(src, c) * k;
            self.data[dst * self.cols + c] += v;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        for r in 0..self.rows {
            let v = self.get(r, src) * k;
            self.data[r * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.cols {
            let idx = i * self.cols + c;
            self.data[idx] = -std::mem::take(&mut self.data[idx]);
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// `U * M * V = D` with `U`, `V` unimodular and `D` diagonal, each diagonal
/// entry dividing the next.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    /// Diagonal entries of `D`, including trailing zeros up to `min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d.get(i, i).clone()).collect()
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (r, c) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut u = IntMatrix::identity(r);
    let mut v = IntMatrix::identity(c);

    'outer: for t in 0..r.min(c) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    let x = a.get(i, j);
                    if !x.is_zero() && best.map_or(true, |(bi, bj)| x.abs() < a.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break 'outer };
            a.swap_rows(t, pi);
            u.swap_rows(t, pi);
            a.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            let piv = a.get(t, t).clone();
            for i in t + 1..r {
                let q = -(a.get(i, t) / &piv);
                if !q.is_zero() {
                    a.add_row(i, t, &q);
                    u.add_row(i, t, &q);
                }
                if !a.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..c {
                let q = -(a.get(t, j) / &piv);
                if !q.is_zero() {
                    a.add_col(j, t, &q);
                    v.add_col(j, t, &q);
                }
                if !a.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| !a.get(i, j).is_multiple_of(&piv)));
            match bad {
                Some(i) => {
                    let one = BigInt::one();
                    a.add_row(t, i, &one);
                    u.add_row(t, i, &one);
                }
                None => break,
            }
        }
        if a.get(t, t).is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithForm { u, d: a, v }
}

/// Finite abelian group `Z/n_1 x ... x Z/n_l` in invariant-factor form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FinAbGroup {
    factors: Vec<u64>,
}

/// Element of a [`FinAbGroup`], one residue per invariant factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(pub Vec<u64>);

impl GroupElement {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Outcome of rewriting a presentation `Z/m_1 x ... x Z/m_k` into
/// invariant-factor form.
#[derive(Clone, Debug)]
pub struct NormalizedPresentation {
    pub group: FinAbGroup,
    /// Column `j` expresses new generator `j` in the old generators.
    pub new_in_old: Vec<Vec<BigInt>>,
    /// Row `i` gives the new coordinates of old generator `i`.
    pub old_in_new: Vec<GroupElement>,
}

impl FinAbGroup {
    pub fn new(factors: Vec<u64>) -> Result<Self, ExactAlgError> {
        for (i, &n) in factors.iter().enumerate() {
            if n < 2 {
                return Err(ExactAlgError::FactorTooSmall { index: i, value: n });
            }
        }
        for w in factors.windows(2) {
            if w[1] % w[0] != 0 {
                return Err(ExactAlgError::NotDivisibilityChain { prev: w[0], next: w[1] });
            }
        }
        Ok(FinAbGroup { factors })
    }

    pub fn trivial() -> Self {
        FinAbGroup { factors: vec![] }
    }

    pub fn cyclic(n: u64) -> Result<Self, ExactAlgError> {
        Self::new(vec![n])
    }

    /// Normalizes an arbitrary product of cyclic groups via Smith normal form.
    /// Orders equal to one are allowed and disappear.
    pub fn from_cyclic_orders(orders: &[u64]) -> Result<NormalizedPresentation, ExactAlgError> {
        if orders.iter().any(|&m| m == 0) {
            return Err(ExactAlgError::BadPresentation);
        }
        let k = orders.len();
        let diag: Vec<i64> = orders.iter().map(|&m| m as i64).collect();
        let snf = smith_normal_form(&IntMatrix::diagonal(&diag));
        let u_inv = snf.u.inverse_unimodular()?;
        let d = snf.diagonal();
        let keep: Vec<usize> = (0..k).filter(|&i| !d[i].is_one()).collect();
        let factors: Vec<u64> = keep.iter().map(|&i| d[i].to_u64().expect("factor overflow")).collect();
        let group = FinAbGroup::new(factors.clone())?;
        let new_in_old = keep.iter().map(|&j| (0..k).map(|i| u_inv.get(i, j).clone()).collect()).collect();
        let old_in_new = (0..k)
            .map(|i| {
                GroupElement(
                    keep.iter()
                        .zip(&factors)
                        .map(|(&j, &n)| snf.u.get(j, i).mod_floor(&BigInt::from(n)).to_u64().unwrap())
                        .collect(),
                )
            })
            .collect();
        Ok(NormalizedPresentation { group, new_in_old, old_in_new })
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> u128 {
        self.factors.iter().map(|&n| n as u128).product()
    }

    /// Smallest `N` with `N t = 0` for every `t`.
    pub fn exponent(&self) -> u64 {
        self.factors.last().copied().unwrap_or(1)
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    pub fn generator(&self, i: usize) -> GroupElement {
        let mut e = self.identity();
        e.0[i] = 1;
        e
    }

    pub fn element(&self, coords: &[i64]) -> Result<GroupElement, ExactAlgError> {
        if coords.len() != self.rank() {
            return Err(ExactAlgError::RankMismatch { expected: self.rank(), got: coords.len() });
        }
        Ok(GroupElement(
            coords.iter().zip(&self.factors).map(|(&x, &n)| x.rem_euclid(n as i64) as u64).collect(),
        ))
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement(
            a.0.iter().zip(&b.0).zip(&self.factors).map(|((&x, &y), &n)| (x + y) % n).collect(),
        )
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        GroupElement(a.0.iter().zip(&self.factors).map(|(&x, &n)| (n - x) % n).collect())
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, k: i64, a: &GroupElement) -> GroupElement {
        GroupElement(
            a.0.iter()
                .zip(&self.factors)
                .map(|(&x, &n)| ((x as i128 * k as i128).rem_euclid(n as i128)) as u64)
                .collect(),
        )
    }

    pub fn is_identity(&self, a: &GroupElement) -> bool {
        a.0.iter().all(|&x| x == 0)
    }

    pub fn element_order(&self, a: &GroupElement) -> u64 {
        a.0.iter()
            .zip(&self.factors)
            .map(|(&x, &n)| n / x.gcd(&n))
            .fold(1, |acc, o| acc.lcm(&o))
    }

    /// Mixed-radix index of an element, the last coordinate varying fastest.
    pub fn index_of(&self, a: &GroupElement) -> usize {
        a.0.iter().zip(&self.factors).fold(0usize, |acc, (&x, &n)| acc * n as usize + x as usize)
    }

    pub fn element_at(&self, mut index: usize) -> GroupElement {
        let mut coords = vec![0u64; self.rank()];
        for i in (0..self.rank()).rev() {
            let n = self.factors[i] as usize;
            coords[i] = (index % n) as u64;
            index /= n;
        }
        GroupElement(coords)
    }

    /// All elements in mixed-radix order; the identity comes first.
    pub fn enumerate(&self) -> Result<Vec<GroupElement>, ExactAlgError> {
        self.enumerate_bounded(ENUMERATION_BOUND)
    }

    pub fn enumerate_bounded(&self, bound: u64) -> Result<Vec<GroupElement>, ExactAlgError> {
        let order = self.order();
        if order > bound as u128 {
            return Err(ExactAlgError::TooLarge { order, bound });
        }
        Ok((0..order as usize).map(|i| self.element_at(i)).collect())
    }
}

impl fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.factors.iter().map(|n| format!("Z/{n}")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// Certificate that `A x = b (mod 1)` has no solution: an integer row `w`
/// with `w A x` integral for every admissible `x`, while `w b` is not.
#[derive(Clone, Debug, PartialEq)]
pub struct NoSolution {
    pub certificate: Vec<BigInt>,
    pub obstruction: QmodZ,
}

impl fmt::Display for NoSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.certificate.iter().map(|x| x.to_string()).collect();
        write!(f, "row [{}] pairs b to {}", w.join(", "), self.obstruction)
    }
}

/// Finds `x` with `A x = b (mod 1)`, where the denominator of `x_j` must divide
/// `moduli[j]`. Returns one solution; the others differ by solutions of the
/// homogeneous system.
pub fn solve_congruence(
    a: &IntMatrix,
    b: &[BigRational],
    moduli: &[u64],
) -> Result<Vec<QmodZ>, ExactAlgError> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m || moduli.len() != n {
        return Err(ExactAlgError::Shape(format!(
            "A is {m}x{n}, b has {}, moduli has {}",
            b.len(),
            moduli.len()
        )));
    }
    if moduli.iter().any(|&q| q == 0) {
        return Err(ExactAlgError::Shape("zero modulus".into()));
    }
    let mut big_d = BigInt::one();
    for &q in moduli {
        big_d = big_d.lcm(&BigInt::from(q));
    }
    for bi in b {
        big_d = big_d.lcm(bi.denom());
    }
    // Substituting x_j = y_j / N_j turns the system into B y = c (mod D).
    let mut big = IntMatrix::zeros(m, n + m);
    for i in 0..m {
        for j in 0..n {
            big.set(i, j, a.get(i, j) * (&big_d / BigInt::from(moduli[j])));
        }
        big.set(i, n + i, big_d.clone());
    }
    let c: Vec<BigInt> = b
        .iter()
        .map(|bi| (bi * BigRational::from_integer(big_d.clone())).to_integer())
        .collect();
    let snf = smith_normal_form(&big);
    let uc = snf.u.mul_vec(&c);
    let mut w = vec![BigInt::zero(); n + m];
    for k in 0..m {
        let dk = snf.d.get(k, k);
        if !uc[k].is_multiple_of(dk) {
            let certificate: Vec<BigInt> = snf.u.row(k).iter().map(|x| x * &big_d / dk).collect();
            let pairing: BigRational = certificate
                .iter()
                .zip(b)
                .map(|(wi, bi)| bi * BigRational::from_integer(wi.clone()))
                .sum();
            return Err(ExactAlgError::NoSolution(NoSolution {
                certificate,
                obstruction: QmodZ::from_rational(pairing),
            }));
        }
        w[k] = &uc[k] / dk;
    }
    let yz = snf.v.mul_vec(&w);
    Ok((0..n).map(|j| QmodZ::from_ratio(&yz[j], &BigInt::from(moduli[j]))).collect())
}
