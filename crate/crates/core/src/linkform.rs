//! Skew linking forms `L: T x T -> Q/Z` on finite abelian groups.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use thiserror::Error;

use crate::exactalg::{ExactAlgError, FinAbGroup, GroupElement, QmodZ};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkFormError {
    #[error("linking matrix is {rows}x{cols}, group has rank {rank}")]
    Shape { rows: usize, cols: usize, rank: usize },
    #[error("hyperbolic block needs n >= 2, got {0}")]
    HyperbolicOrder(u64),
    #[error("invalid linking form: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Group(#[from] ExactAlgError),
}

/// A failed axiom, with the offending indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NotSkew { i: usize, j: usize },
    NotWellDefined { i: usize, j: usize },
    Degenerate { witness: GroupElement },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotSkew { i, j } => write!(f, "entries ({i},{j}) and ({j},{i}) do not sum to zero"),
            Violation::NotWellDefined { i, j } => {
                write!(f, "entry ({i},{j}) is not killed by the order of generator {i}")
            }
            Violation::Degenerate { witness } => write!(f, "{witness} pairs trivially with everything"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkingForm {
    group: FinAbGroup,
    matrix: Vec<Vec<QmodZ>>,
    // numerators over the exponent, reduced mod the exponent
    nums: Vec<Vec<u64>>,
    exponent: u64,
}

impl LinkingForm {
    /// Builds a form without checking the axioms; see [`LinkingForm::validate`].
    pub fn new(group: FinAbGroup, matrix: Vec<Vec<QmodZ>>) -> Result<Self, LinkFormError> {
        let rank = group.rank();
        if matrix.len() != rank || matrix.iter().any(|r| r.len() != rank) {
            return Err(LinkFormError::Shape {
                rows: matrix.len(),
                cols: matrix.first().map_or(0, |r| r.len()),
                rank,
            });
        }
        let exponent = matrix
            .iter()
            .flatten()
            .fold(BigInt::from(group.exponent()), |acc, q| acc.lcm(q.denom()));
        let exponent: u64 = exponent.try_into().expect("denominators too large");
        let nums = matrix
            .iter()
            .map(|row| row.iter().map(|q| q.numerator_over(exponent).unwrap() % exponent).collect())
            .collect();
        Ok(LinkingForm { group, matrix, nums, exponent })
    }

    /// Builds and validates.
    pub fn checked(group: FinAbGroup, matrix: Vec<Vec<QmodZ>>) -> Result<Self, LinkFormError> {
        let form = Self::new(group, matrix)?;
        let v = form.validate();
        if v.is_empty() {
            Ok(form)
        } else {
            Err(LinkFormError::Invalid(v))
        }
    }

    /// The zero form on the trivial group.
    pub fn trivial() -> Self {
        Self::new(FinAbGroup::trivial(), vec![]).unwrap()
    }

    /// Form given on `Z/m_1 x ... x Z/m_k` with respect to the standard
    /// generators, rewritten on the invariant-factor basis.
    pub fn from_presentation(orders: &[u64], matrix: &[Vec<QmodZ>]) -> Result<Self, LinkFormError> {
        let k = orders.len();
        if matrix.len() != k || matrix.iter().any(|r| r.len() != k) {
            return Err(LinkFormError::Shape {
                rows: matrix.len(),
                cols: matrix.first().map_or(0, |r| r.len()),
                rank: k,
            });
        }
        let mut violations = Vec::new();
        for i in 0..k {
            for j in 0..k {
                if !(&matrix[i][j] + &matrix[j][i]).is_zero() && i <= j {
                    violations.push(Violation::NotSkew { i, j });
                }
                if !matrix[i][j].mul_i64(orders[i] as i64).is_zero() {
                    violations.push(Violation::NotWellDefined { i, j });
                }
            }
        }
        if !violations.is_empty() {
            return Err(LinkFormError::Invalid(violations));
        }
        let p = FinAbGroup::from_cyclic_orders(orders)?;
        let r = p.group.rank();
        let mut out = vec![vec![QmodZ::zero(); r]; r];
        for (a, row) in out.iter_mut().enumerate() {
            for (b, entry) in row.iter_mut().enumerate() {
                let mut acc = QmodZ::zero();
                for i in 0..k {
                    for l in 0..k {
                        let coeff = &p.new_in_old[a][i] * &p.new_in_old[b][l];
                        acc += matrix[i][l].mul_int(&coeff);
                    }
                }
                *entry = acc;
            }
        }
        Self::new(p.group, out)
    }

    /// `Z/n x Z/n` with matrix `[[0, 1/n], [-1/n, 0]]`.
    pub fn hyperbolic(n: u64) -> Result<Self, LinkFormError> {
        if n < 2 {
            return Err(LinkFormError::HyperbolicOrder(n));
        }
        let q = QmodZ::new(1, n as i64);
        let m = vec![vec![QmodZ::zero(), q.clone()], vec![-q, QmodZ::zero()]];
        Self::new(FinAbGroup::new(vec![n, n])?, m)
    }

    /// `Z/2` with matrix `[1/2]`.
    pub fn z2_diagonal() -> Self {
        Self::new(FinAbGroup::new(vec![2]).unwrap(), vec![vec![QmodZ::half()]]).unwrap()
    }

    /// Orthogonal sum, renormalized to invariant-factor form.
    pub fn orthogonal_sum(parts: &[LinkingForm]) -> Result<Self, LinkFormError> {
        let orders: Vec<u64> = parts.iter().flat_map(|p| p.group.factors().to_vec()).collect();
        let k = orders.len();
        let mut m = vec![vec![QmodZ::zero(); k]; k];
        let mut off = 0;
        for p in parts {
            let r = p.group.rank();
            for i in 0..r {
                for j in 0..r {
                    m[off + i][off + j] = p.matrix[i][j].clone();
                }
            }
            off += r;
        }
        Self::from_presentation(&orders, &m)
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.group
    }

    pub fn matrix(&self) -> &[Vec<QmodZ>] {
        &self.matrix
    }

    /// Common denominator of all values of the form.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// `L(t, t')` as a numerator over [`LinkingForm::exponent`].
    pub fn pair_num(&self, t: &GroupElement, u: &GroupElement) -> u64 {
        let n = self.exponent as u128;
        let mut acc: u128 = 0;
        for (i, &ti) in t.0.iter().enumerate() {
            if ti == 0 {
                continue;
            }
            for (j, &uj) in u.0.iter().enumerate() {
                acc = (acc + ti as u128 * uj as u128 % n * self.nums[i][j] as u128) % n;
            }
        }
        acc as u64
    }

    pub fn pair(&self, t: &GroupElement, u: &GroupElement) -> QmodZ {
        QmodZ::new(self.pair_num(t, u) as i64, self.exponent as i64)
    }

    /// The form `l * L`, which need not be nondegenerate.
    pub fn scaled(&self, level: u64) -> Self {
        let m = self
            .matrix
            .iter()
            .map(|r| r.iter().map(|q| q.mul_i64(level as i64)).collect())
            .collect();
        Self::new(self.group.clone(), m).unwrap()
    }

    /// All axiom violations; empty for a valid form.
    pub fn validate(&self) -> Vec<Violation> {
        let r = self.group.rank();
        let mut out = Vec::new();
        for i in 0..r {
            for j in i..r {
                if !(&self.matrix[i][j] + &self.matrix[j][i]).is_zero() {
                    out.push(Violation::NotSkew { i, j });
                }
            }
        }
        for i in 0..r {
            let n = self.group.factors()[i] as i64;
            for j in 0..r {
                if !self.matrix[i][j].mul_i64(n).is_zero() {
                    out.push(Violation::NotWellDefined { i, j });
                }
            }
        }
        if out.is_empty() {
            if let Some(w) = self.degeneracy_witness() {
                out.push(Violation::Degenerate { witness: w });
            }
        }
        out
    }

    /// A nonzero element pairing trivially with every generator, if any.
    pub fn degeneracy_witness(&self) -> Option<GroupElement> {
        let r = self.group.rank();
        let gens: Vec<GroupElement> = (0..r).map(|j| self.group.generator(j)).collect();
        let order = self.group.order() as usize;
        (1..order)
            .map(|i| self.group.element_at(i))
            .find(|t| gens.iter().all(|g| self.pair_num(t, g) == 0))
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.degeneracy_witness().is_none()
    }

    /// Regularity of `t` for the cocycle `exp(2 pi i l L)`, closed form:
    /// `2 l t = 0`. Valid for nondegenerate `L`.
    pub fn is_regular(&self, t: &GroupElement, level: u64) -> bool {
        self.group.is_identity(&self.group.scale(2 * level as i64, t))
    }

    /// Regularity by definition: `l L(t, s) = l L(s, t)` for every `s`.
    pub fn is_regular_by_scan(&self, t: &GroupElement, level: u64) -> bool {
        let n = self.exponent as u128;
        (0..self.group.order() as usize).all(|i| {
            let s = self.group.element_at(i);
            let a = self.pair_num(t, &s) as u128 * level as u128 % n;
            let b = self.pair_num(&s, t) as u128 * level as u128 % n;
            a == b
        })
    }

    /// Number of regular elements, closed form `prod gcd(2l, n_i)`.
    pub fn count_r(&self, level: u64) -> u128 {
        self.group.factors().iter().map(|&n| (2 * level).gcd(&n) as u128).product()
    }

    pub fn count_r_by_scan(&self, level: u64) -> u128 {
        (0..self.group.order() as usize)
            .filter(|&i| self.is_regular_by_scan(&self.group.element_at(i), level))
            .count() as u128
    }

    /// Matrix entries as `"p/q"` strings.
    pub fn matrix_strings(&self) -> Vec<Vec<String>> {
        self.matrix.iter().map(|r| r.iter().map(|q| q.to_string()).collect()).collect()
    }
}

/// Parses a square matrix of `"p/q"` strings.
pub fn parse_qmodz_matrix(rows: &[Vec<String>]) -> Result<Vec<Vec<QmodZ>>, ExactAlgError> {
    rows.iter().map(|r| r.iter().map(|s| s.parse()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn z4_quarter_is_rejected() {
        let f = LinkingForm::new(FinAbGroup::new(vec![4]).unwrap(), vec![vec![QmodZ::new(1, 4)]]).unwrap();
        assert_eq!(f.validate(), vec![Violation::NotSkew { i: 0, j: 0 }]);
    }

    #[test]
    fn z3_zero_is_degenerate() {
        let f = LinkingForm::new(FinAbGroup::new(vec![3]).unwrap(), vec![vec![QmodZ::zero()]]).unwrap();
        assert!(matches!(f.validate().as_slice(), [Violation::Degenerate { .. }]));
    }

    #[test]
    fn hyperbolic_blocks() {
        assert!(matches!(LinkingForm::hyperbolic(1), Err(LinkFormError::HyperbolicOrder(1))));
        let h2 = LinkingForm::hyperbolic(2).unwrap();
        assert!(h2.validate().is_empty());
        assert_eq!(h2.matrix()[1][0], QmodZ::half());
        let h3 = LinkingForm::hyperbolic(3).unwrap();
        assert!(h3.validate().is_empty());
        assert_eq!(h3.count_r(1), 1);
    }

    #[test]
    fn z2_diagonal_regularity() {
        let f = LinkingForm::z2_diagonal();
        assert!(f.validate().is_empty());
        assert_eq!(f.count_r(1), 2);
        assert_eq!(f.count_r_by_scan(1), 2);
    }

    #[test]
    fn sum_is_renormalized() {
        let f = LinkingForm::orthogonal_sum(&[LinkingForm::z2_diagonal(), LinkingForm::hyperbolic(3).unwrap()])
            .unwrap();
        assert_eq!(f.group().factors(), &[3, 6]);
        assert!(f.validate().is_empty());
        assert_eq!(f.count_r(1), 2);
        assert_eq!(f.count_r_by_scan(1), 2);
    }

    #[test]
    fn presentation_rejects_bad_input() {
        let m = vec![vec![QmodZ::new(1, 3)]];
        assert!(LinkingForm::from_presentation(&[2], &m).is_err());
    }

    #[test]
    fn scaled_form_can_degenerate() {
        let f = LinkingForm::z2_diagonal().scaled(2);
        assert!(!f.is_nondegenerate());
        // At level 2 every element of Z/2 is regular.
        assert_eq!(LinkingForm::z2_diagonal().count_r(2), 2);
    }

    fn block_sum() -> impl Strategy<Value = LinkingForm> {
        proptest::collection::vec(prop_oneof![Just(0u64), 2u64..6], 1..3).prop_map(|blocks| {
            let parts: Vec<LinkingForm> = blocks
                .into_iter()
                .map(|n| if n == 0 { LinkingForm::z2_diagonal() } else { LinkingForm::hyperbolic(n).unwrap() })
                .collect();
            LinkingForm::orthogonal_sum(&parts).unwrap()
        })
    }

    proptest! {
        #[test]
        fn closed_form_regularity_matches_scan(f in block_sum(), level in 1u64..4) {
            prop_assert!(f.validate().is_empty());
            for i in 0..f.group().order() as usize {
                let t = f.group().element_at(i);
                prop_assert_eq!(f.is_regular(&t, level), f.is_regular_by_scan(&t, level));
            }
            prop_assert_eq!(f.count_r(level), f.count_r_by_scan(level));
        }

        #[test]
        fn form_is_bilinear_and_skew(f in block_sum(), a in 0usize..400, b in 0usize..400, c in 0usize..400) {
            let g = f.group();
            let n = g.order() as usize;
            let (x, y, z) = (g.element_at(a % n), g.element_at(b % n), g.element_at(c % n));
            prop_assert_eq!(f.pair(&g.add(&x, &y), &z), f.pair(&x, &z) + f.pair(&y, &z));
            prop_assert!((f.pair(&x, &y) + f.pair(&y, &x)).is_zero());
        }
    }
}
