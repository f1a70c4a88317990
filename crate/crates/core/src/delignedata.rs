//! Cohomological data of a closed oriented `(4k+1)`-manifold, the cocycle
//! `S_M` in harmonic coordinates, and the classification of admissible
//! representations.
//!
//! A group element is `(eta, nu, c_free, c_tor)`: a point of the harmonic
//! torus, a spectral (coexact) part, a free lattice vector and a torsion
//! element. The splitting itself is never stored; only the pairing matrix
//! `P` of `s`, the values `sigma_free[i][j] = S_M(sigma(e_i), sigma(e_j))`
//! and the linking form are.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exactalg::{parse_rational, solve_congruence, CirclePhase, ExactAlgError, GroupElement, IntMatrix, QmodZ};
use crate::finheis::{self, FinHeisError, FiniteProjRep};
use crate::linkform::{LinkFormError, LinkingForm, Violation};
use crate::spectral::{ModeVec, SpectralError, SpectralModel};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid manifold data: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<DataViolation>),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("irrep index {index} out of range ({count} irreps)")]
    IrrepIndex { index: usize, count: usize },
    #[error(transparent)]
    Algebra(#[from] ExactAlgError),
    #[error(transparent)]
    LinkForm(#[from] LinkFormError),
    #[error(transparent)]
    FinHeis(#[from] FinHeisError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataViolation {
    Shape(String),
    PairingNotUnimodular { det: BigInt },
    SigmaNotSkew { i: usize, j: usize },
    SigmaDiagonal { i: usize, value: QmodZ },
    Linking(Violation),
}

impl fmt::Display for DataViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataViolation::Shape(s) => write!(f, "{s}"),
            DataViolation::PairingNotUnimodular { det } => write!(f, "pairing has determinant {det}, need +-1"),
            DataViolation::SigmaNotSkew { i, j } => {
                write!(f, "sigma_free entries ({i},{j}) and ({j},{i}) do not sum to zero")
            }
            DataViolation::SigmaDiagonal { i, value } => {
                write!(f, "sigma_free diagonal entry {i} is {value}, must be 0 or 1/2")
            }
            DataViolation::Linking(v) => write!(f, "linking form: {v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldData {
    pub name: Option<String>,
    pub k: u32,
    pub b: usize,
    pub pairing: IntMatrix,
    pub linking: LinkingForm,
    pub sigma_free: Vec<Vec<QmodZ>>,
}

impl ManifoldData {
    /// The circle: `k = 0`, `b = 1`, `P = [1]`, no torsion.
    pub fn circle() -> Self {
        ManifoldData {
            name: Some("S1".into()),
            k: 0,
            b: 1,
            pairing: IntMatrix::identity(1),
            linking: LinkingForm::trivial(),
            sigma_free: vec![vec![QmodZ::zero()]],
        }
    }

    /// Torsion-free data with `P = I` and `sigma_free = 0`.
    pub fn torsion_free(k: u32, b: usize) -> Self {
        ManifoldData {
            name: None,
            k,
            b,
            pairing: IntMatrix::identity(b),
            linking: LinkingForm::trivial(),
            sigma_free: vec![vec![QmodZ::zero(); b]; b],
        }
    }

    pub fn with_linking(mut self, linking: LinkingForm) -> Self {
        self.linking = linking;
        self
    }

    pub fn torsion_rank(&self) -> usize {
        self.linking.group().rank()
    }

    /// Every invariant violation; empty for valid data.
    pub fn validate(&self) -> Vec<DataViolation> {
        let b = self.b;
        let mut out = Vec::new();
        if self.pairing.rows() != b || self.pairing.cols() != b {
            out.push(DataViolation::Shape(format!(
                "pairing is {}x{}, expected {b}x{b}",
                self.pairing.rows(),
                self.pairing.cols()
            )));
        } else {
            let det = self.pairing.determinant().unwrap_or_else(|_| BigInt::zero());
            if !det.abs().is_one() {
                out.push(DataViolation::PairingNotUnimodular { det });
            }
        }
        if self.sigma_free.len() != b || self.sigma_free.iter().any(|r| r.len() != b) {
            out.push(DataViolation::Shape(format!("sigma_free must be {b}x{b}")));
        } else {
            for i in 0..b {
                if !self.sigma_free[i][i].mul_i64(2).is_zero() {
                    out.push(DataViolation::SigmaDiagonal { i, value: self.sigma_free[i][i].clone() });
                }
                for j in i + 1..b {
                    if !(&self.sigma_free[i][j] + &self.sigma_free[j][i]).is_zero() {
                        out.push(DataViolation::SigmaNotSkew { i, j });
                    }
                }
            }
        }
        out.extend(self.linking.validate().into_iter().map(DataViolation::Linking));
        out
    }

    pub fn checked(self) -> Result<Self, DataError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(DataError::Invalid(v))
        }
    }

    /// `sigma*S_M(c, c') = sum c_i c'_j sigma_ij`.
    pub fn sigma_pair(&self, c: &[i64], d: &[i64]) -> QmodZ {
        let mut acc = QmodZ::zero();
        for (i, &ci) in c.iter().enumerate() {
            if ci == 0 {
                continue;
            }
            for (j, &dj) in d.iter().enumerate() {
                acc += self.sigma_free[i][j].mul_i64(ci * dj);
            }
        }
        acc
    }

    /// `eta . P c`, the torus pairing `int eta ^ delta sigma(c)`.
    pub fn eta_pair(&self, eta: &[QmodZ], c: &[i64]) -> QmodZ {
        let pc = self.s_hom(c);
        eta.iter().zip(&pc).fold(QmodZ::zero(), |acc, (e, &p)| acc + e.mul_i64(p))
    }

    /// `s(xi) = P xi`, the covector of `s(xi)` in the dual lattice.
    pub fn s_hom(&self, xi: &[i64]) -> Vec<i64> {
        let v: Vec<BigInt> = xi.iter().map(|&x| BigInt::from(x)).collect();
        self.pairing
            .mul_vec(&v)
            .into_iter()
            .map(|x| i64::try_from(x).expect("s(xi) overflows i64"))
            .collect()
    }

    fn check_element(&self, f: &GElement) -> Result<(), DataError> {
        if f.eta.len() != self.b || f.c_free.len() != self.b {
            return Err(DataError::Dimension(format!(
                "element has eta of length {} and c_free of length {}, expected {}",
                f.eta.len(),
                f.c_free.len(),
                self.b
            )));
        }
        if f.c_tor.0.len() != self.torsion_rank() {
            return Err(DataError::Dimension(format!(
                "torsion part has {} coordinates, expected {}",
                f.c_tor.0.len(),
                self.torsion_rank()
            )));
        }
        Ok(())
    }

    /// `S_M(f, g)`. The spectral term `int nu ^ d nu'` is the float part;
    /// the torus, free and torsion terms are exact.
    pub fn cocycle(&self, model: &SpectralModel, f: &GElement, g: &GElement) -> Result<CirclePhase, DataError> {
        self.check_element(f)?;
        self.check_element(g)?;
        let float = if f.nu.is_zero() || g.nu.is_zero() { 0.0 } else { model.symplectic(&f.nu, &g.nu)? };
        Ok(CirclePhase { exact: self.cocycle_exact(f, g), float })
    }

    /// The exact part of [`ManifoldData::cocycle`].
    pub fn cocycle_exact(&self, f: &GElement, g: &GElement) -> QmodZ {
        self.eta_pair(&f.eta, &g.c_free) - self.eta_pair(&g.eta, &f.c_free)
            + self.sigma_pair(&f.c_free, &g.c_free)
            + self.linking.pair(&f.c_tor, &g.c_tor)
    }

    /// Canonical representative of `lambda` modulo `2 l P Z^b`. Since `P` is
    /// unimodular that lattice is `2 l Z^b`.
    pub fn reduce_lambda(&self, lambda: &[i64], level: u64) -> Vec<i64> {
        let m = 2 * level as i64;
        lambda.iter().map(|x| x.rem_euclid(m)).collect()
    }

    /// One label per equivalence class at level `l`.
    pub fn classify(&self, level: u64) -> Result<Classification, DataError> {
        self.clone().checked()?;
        if level == 0 {
            return Err(DataError::Dimension("level must be at least 1".into()));
        }
        let irreps = finheis::build_irreps_at_level(&self.linking, level)?;
        let r = self.linking.count_r(level);
        if irreps.len() as u128 != r {
            return Err(FinHeisError::Internal(format!("found {} irreps, expected {r}", irreps.len())).into());
        }
        let m = 2 * level;
        let n_lambda = (m as u128).pow(self.b as u32);
        let mut labels = Vec::new();
        for idx in 0..n_lambda {
            let mut rest = idx;
            let mut lambda = vec![0i64; self.b];
            for slot in lambda.iter_mut().rev() {
                *slot = (rest % m as u128) as i64;
                rest /= m as u128;
            }
            for irrep_index in 0..irreps.len() {
                labels.push(RepLabel { lambda: lambda.clone(), irrep_index });
            }
        }
        Ok(Classification { level, count: n_lambda * r, labels, irreps })
    }

    /// Whether `lambda_1 - lambda_2` lies in `2 l P Z^b`.
    pub fn lambdas_equivalent(&self, l1: &[i64], l2: &[i64], level: u64) -> Result<bool, DataError> {
        if l1.len() != self.b || l2.len() != self.b {
            return Err(DataError::Dimension(format!("labels must have {} entries", self.b)));
        }
        let pinv = self.pairing.inverse_unimodular()?;
        let d: Vec<BigInt> = l1.iter().zip(l2).map(|(a, b)| BigInt::from(a - b)).collect();
        let m = BigInt::from(2 * level);
        Ok(pinv.mul_vec(&d).iter().all(|x| x.is_multiple_of(&m)))
    }

    /// Equivalence of `(lambda_1, pi_1)` and `(lambda_2, pi_2)` for arbitrary
    /// representations of the level-`l` finite Heisenberg group.
    pub fn labels_equivalent_reps(
        &self,
        level: u64,
        l1: &[i64],
        pi1: &FiniteProjRep,
        l2: &[i64],
        pi2: &FiniteProjRep,
    ) -> Result<bool, DataError> {
        Ok(self.lambdas_equivalent(l1, l2, level)? && finheis::are_equivalent(pi1, pi2)?)
    }

    pub fn labels_equivalent(&self, level: u64, a: &RepLabel, b: &RepLabel) -> Result<bool, DataError> {
        let irreps = finheis::build_irreps_at_level(&self.linking, level)?;
        let get = |i: usize| irreps.get(i).ok_or(DataError::IrrepIndex { index: i, count: irreps.len() });
        self.labels_equivalent_reps(level, &a.lambda, get(a.irrep_index)?, &b.lambda, get(b.irrep_index)?)
    }

    /// `tau(t_i)` for each torsion generator: the solution of
    /// `P^T tau(t) = (L(t, theta(e_j)))_j` mod 1. Rows index generators.
    pub fn solve_tau(&self, theta: &[GroupElement]) -> Result<Vec<Vec<QmodZ>>, DataError> {
        if theta.len() != self.b {
            return Err(DataError::Dimension(format!("theta has {} columns, expected {}", theta.len(), self.b)));
        }
        let g = self.linking.group();
        let pt = self.pairing.transpose();
        let mut out = Vec::with_capacity(g.rank());
        for (i, &n) in g.factors().iter().enumerate() {
            let t = g.generator(i);
            let rhs: Vec<BigRational> = theta.iter().map(|th| self.linking.pair(&t, th).value().clone()).collect();
            let tau = solve_congruence(&pt, &rhs, &vec![n; self.b])
                .map_err(|e| FinHeisError::Internal(format!("tau system inconsistent: {e}")))?;
            out.push(tau);
        }
        Ok(out)
    }

    /// Label of the same representation after changing the decomposition by
    /// `theta`: `pi` is twisted by `mu = lambda . tau`.
    pub fn transport_decomposition(
        &self,
        theta: &[GroupElement],
        lambda: &[i64],
        pi: &FiniteProjRep,
    ) -> Result<Transported, DataError> {
        if lambda.len() != self.b {
            return Err(DataError::Dimension(format!("lambda has {} entries, expected {}", lambda.len(), self.b)));
        }
        let tau = self.solve_tau(theta)?;
        let mu: Vec<QmodZ> = tau
            .iter()
            .map(|row| row.iter().zip(lambda).fold(QmodZ::zero(), |acc, (q, &l)| acc + q.mul_i64(l)))
            .collect();
        let rep = finheis::twist(pi, &mu)?;
        Ok(Transported { tau, mu, rep })
    }

    /// Changes the splitting on the free part so that `sigma_free` becomes
    /// diagonal. Returns the new data and `tau_F`, whose row `i` is
    /// `tau(e_i)`.
    pub fn normalize_sigma(&self) -> Result<(ManifoldData, Vec<Vec<QmodZ>>), DataError> {
        let b = self.b;
        // X strictly upper triangular, X_ij = -sigma_ij; tau(e_i) = P^{-T} X_i.
        let pinv_t = self.pairing.inverse_unimodular()?.transpose();
        let mut tau = vec![vec![QmodZ::zero(); b]; b];
        for (i, row) in tau.iter_mut().enumerate() {
            for (r, slot) in row.iter_mut().enumerate() {
                let mut acc = QmodZ::zero();
                for j in i + 1..b {
                    let coeff = i64::try_from(pinv_t.get(r, j).clone()).expect("entry overflow");
                    acc += (-&self.sigma_free[i][j]).mul_i64(coeff);
                }
                *slot = acc;
            }
        }
        let mut out = self.clone();
        out.sigma_free = self.sigma_after_change(&tau);
        Ok((out, tau))
    }

    /// `sigma'_ij = sigma_ij + (P^T tau(e_i))_j - (P^T tau(e_j))_i`.
    pub fn sigma_after_change(&self, tau: &[Vec<QmodZ>]) -> Vec<Vec<QmodZ>> {
        let b = self.b;
        let x = |i: usize, j: usize| -> QmodZ {
            (0..b).fold(QmodZ::zero(), |acc, r| {
                acc + tau[i][r].mul_i64(i64::try_from(self.pairing.get(r, j).clone()).expect("entry overflow"))
            })
        };
        (0..b)
            .map(|i| (0..b).map(|j| &(&self.sigma_free[i][j] + &x(i, j)) - &x(j, i)).collect())
            .collect()
    }

    pub fn is_sigma_diagonal(&self) -> bool {
        (0..self.b).all(|i| (0..self.b).all(|j| i == j || self.sigma_free[i][j].is_zero()))
    }

    pub fn from_json_str(s: &str) -> Result<Self, DataError> {
        let file: ManifoldFile = serde_json::from_str(s).map_err(|e| DataError::Parse(e.to_string()))?;
        file.into_data()
    }

    pub fn to_file(&self) -> ManifoldFile {
        ManifoldFile {
            name: self.name.clone(),
            k: self.k,
            b: self.b,
            pairing: self.pairing.to_i64_rows().expect("pairing entries fit in i64"),
            torsion: self.linking.group().factors().to_vec(),
            linking: wrap(self.linking.matrix()),
            sigma_free: wrap(&self.sigma_free),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }
}

fn wrap(m: &[Vec<QmodZ>]) -> Vec<Vec<Rat>> {
    m.iter().map(|r| r.iter().map(|q| Rat(q.value().clone())).collect()).collect()
}

#[derive(Clone, Debug)]
pub struct Transported {
    pub tau: Vec<Vec<QmodZ>>,
    pub mu: Vec<QmodZ>,
    pub rep: FiniteProjRep,
}

/// `(eta, nu, c_free, c_tor)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GElement {
    pub eta: Vec<QmodZ>,
    pub nu: ModeVec,
    pub c_free: Vec<i64>,
    pub c_tor: GroupElement,
}

impl GElement {
    pub fn identity(m: &ManifoldData, n_modes: usize) -> Self {
        GElement {
            eta: vec![QmodZ::zero(); m.b],
            nu: ModeVec::zeros(n_modes),
            c_free: vec![0; m.b],
            c_tor: m.linking.group().identity(),
        }
    }

    pub fn translation(m: &ManifoldData, n_modes: usize, c: &[i64]) -> Self {
        GElement { c_free: c.to_vec(), ..Self::identity(m, n_modes) }
    }

    pub fn torsion(m: &ManifoldData, n_modes: usize, t: GroupElement) -> Self {
        GElement { c_tor: t, ..Self::identity(m, n_modes) }
    }

    pub fn add(&self, m: &ManifoldData, o: &GElement) -> GElement {
        GElement {
            eta: self.eta.iter().zip(&o.eta).map(|(a, b)| a + b).collect(),
            nu: self.nu.add(&o.nu),
            c_free: self.c_free.iter().zip(&o.c_free).map(|(a, b)| a + b).collect(),
            c_tor: m.linking.group().add(&self.c_tor, &o.c_tor),
        }
    }

    pub fn neg(&self, m: &ManifoldData) -> GElement {
        GElement {
            eta: self.eta.iter().map(|a| -a).collect(),
            nu: self.nu.neg(),
            c_free: self.c_free.iter().map(|a| -a).collect(),
            c_tor: m.linking.group().neg(&self.c_tor),
        }
    }

    /// The identity-component part `(eta, nu, 0, 0)`.
    pub fn identity_part(&self, m: &ManifoldData) -> GElement {
        GElement {
            eta: self.eta.clone(),
            nu: self.nu.clone(),
            c_free: vec![0; m.b],
            c_tor: m.linking.group().identity(),
        }
    }

    pub fn is_identity_component(&self) -> bool {
        self.c_free.iter().all(|&c| c == 0) && self.c_tor.0.iter().all(|&t| t == 0)
    }

    /// Random element: `eta` with denominators up to `max_den`, spectral
    /// amplitude `amp`, free part in `[-c_max, c_max]`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        m: &ManifoldData,
        model: &SpectralModel,
        max_den: i64,
        amp: f64,
        c_max: i64,
        with_torsion: bool,
    ) -> GElement {
        let eta = (0..m.b)
            .map(|_| {
                let d = rng.gen_range(1..=max_den);
                QmodZ::new(rng.gen_range(0..d), d)
            })
            .collect();
        let nu = if amp > 0.0 { model.random_vec(rng, amp) } else { ModeVec::zeros(model.len()) };
        let c_free = (0..m.b).map(|_| rng.gen_range(-c_max..=c_max)).collect();
        let g = m.linking.group();
        let c_tor = if with_torsion && !g.is_trivial() {
            GroupElement(g.factors().iter().map(|&n| rng.gen_range(0..n)).collect())
        } else {
            g.identity()
        };
        GElement { eta, nu, c_free, c_tor }
    }
}

/// `(lambda, irrep index)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RepLabel {
    pub lambda: Vec<i64>,
    pub irrep_index: usize,
}

impl fmt::Display for RepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l: Vec<String> = self.lambda.iter().map(|x| x.to_string()).collect();
        write!(f, "{}:{}", l.join(","), self.irrep_index)
    }
}

impl std::str::FromStr for RepLabel {
    type Err = DataError;

    /// `"l1,l2,...:i"`; an empty lambda is written `":i"`.
    fn from_str(s: &str) -> Result<Self, DataError> {
        let (l, i) = s.rsplit_once(':').ok_or_else(|| DataError::Parse(format!("label {s:?} lacks ':'")))?;
        let lambda = if l.trim().is_empty() {
            Vec::new()
        } else {
            l.split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|e| DataError::Parse(format!("label {s:?}: {e}"))))
                .collect::<Result<_, _>>()?
        };
        let irrep_index = i.trim().parse().map_err(|e| DataError::Parse(format!("label {s:?}: {e}")))?;
        Ok(RepLabel { lambda, irrep_index })
    }
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub level: u64,
    pub count: u128,
    pub labels: Vec<RepLabel>,
    pub irreps: Vec<FiniteProjRep>,
}

/// Rational serialized as a `"p/q"` string.
#[derive(Clone, Debug, PartialEq)]
pub struct Rat(pub BigRational);

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let r = &self.0;
        if r.denom().is_one() {
            s.serialize_str(&r.numer().to_string())
        } else {
            s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
        }
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map(Rat).map_err(|e| de::Error::custom(format!("rational {s:?}: {e}")))
    }
}

/// On-disk form of [`ManifoldData`]. The torsion group may be given as any
/// product of cyclic groups; `linking` refers to those generators.
/// Unknown fields are ignored, so classification reports parse back.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifoldFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub k: u32,
    pub b: usize,
    pub pairing: Vec<Vec<i64>>,
    #[serde(default)]
    pub torsion: Vec<u64>,
    #[serde(default)]
    pub linking: Vec<Vec<Rat>>,
    pub sigma_free: Vec<Vec<Rat>>,
}

impl ManifoldFile {
    pub fn into_data(self) -> Result<ManifoldData, DataError> {
        let unwrap = |m: Vec<Vec<Rat>>| -> Vec<Vec<QmodZ>> {
            m.into_iter().map(|r| r.into_iter().map(|q| QmodZ::from_rational(q.0)).collect()).collect()
        };
        if self.pairing.len() != self.b || self.pairing.iter().any(|r| r.len() != self.b) {
            return Err(DataError::Invalid(vec![DataViolation::Shape(format!("pairing must be {0}x{0}", self.b))]));
        }
        let linking = LinkingForm::from_presentation(&self.torsion, &unwrap(self.linking))?;
        Ok(ManifoldData {
            name: self.name,
            k: self.k,
            b: self.b,
            pairing: IntMatrix::from_rows(&self.pairing),
            linking,
            sigma_free: unwrap(self.sigma_free),
        })
    }
}

/// Machine-readable classification: the manifold fields followed by the
/// classes, so the output parses back with [`ManifoldData::from_json_str`].
#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    #[serde(flatten)]
    pub data: ManifoldFile,
    pub level: u64,
    pub count: u128,
    pub r: u128,
    pub classes: Vec<ClassRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassRow {
    pub lambda: Vec<i64>,
    pub irrep: usize,
    pub dim: usize,
}

impl ClassificationReport {
    pub fn new(m: &ManifoldData, c: &Classification) -> Self {
        ClassificationReport {
            data: m.to_file(),
            level: c.level,
            count: c.count,
            r: c.irreps.len() as u128,
            classes: c
                .labels
                .iter()
                .map(|l| ClassRow { lambda: l.lambda.clone(), irrep: l.irrep_index, dim: c.irreps[l.irrep_index].dim() })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::FinAbGroup;
    use crate::spectral::FourierPoly;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> QmodZ {
        QmodZ::new(n, d)
    }

    fn rp5_times_circle() -> ManifoldData {
        ManifoldData {
            name: None,
            k: 1,
            b: 1,
            pairing: IntMatrix::identity(1),
            linking: LinkingForm::z2_diagonal(),
            sigma_free: vec![vec![q(0, 1)]],
        }
    }

    #[test]
    fn validation_examples() {
        assert!(ManifoldData::circle().validate().is_empty());
        let mut bad = ManifoldData::circle();
        bad.pairing = IntMatrix::from_rows(&[vec![2]]);
        assert!(matches!(bad.validate()[0], DataViolation::PairingNotUnimodular { .. }));
        let mut bad = ManifoldData::circle();
        bad.sigma_free = vec![vec![q(1, 4)]];
        assert!(matches!(bad.validate()[0], DataViolation::SigmaDiagonal { .. }));
        let mut bad = ManifoldData::torsion_free(1, 2);
        bad.sigma_free[0][1] = q(1, 3);
        assert_eq!(bad.validate(), vec![DataViolation::SigmaNotSkew { i: 0, j: 1 }]);
    }

    #[test]
    fn circle_cos_sin_cocycle() {
        let model = SpectralModel::circle(1);
        let m = ManifoldData::circle();
        let cos = FourierPoly::from_i64(&[1], &[0]).to_mode_vec();
        let sin = FourierPoly::from_i64(&[0], &[1]).to_mode_vec();
        let f = GElement { nu: cos, ..GElement::identity(&m, 2) };
        let g = GElement { nu: sin, ..GElement::identity(&m, 2) };
        let s = m.cocycle(&model, &f, &g).unwrap();
        // trapezoid quadrature of int cos(t) d(sin t) = int cos^2
        let n = 4096;
        let h = std::f64::consts::TAU / n as f64;
        let oracle: f64 = (0..n).map(|i| (i as f64 * h).cos().powi(2) * h).sum();
        assert!((s.value() - oracle.rem_euclid(1.0)).abs() < 1e-12);
        assert!((s.value() - 0.141_592_653_589_793).abs() < 1e-12);
    }

    #[test]
    fn s_hom_examples() {
        let m = ManifoldData::circle();
        assert_eq!(m.s_hom(&[0]), vec![0]);
        assert_eq!(m.s_hom(&[1]), vec![1]);
        let mut m2 = ManifoldData::torsion_free(0, 2);
        m2.pairing = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(m2.s_hom(&[1, 0]), vec![0, 1]);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(ManifoldData::circle().classify(1).unwrap().count, 2);
        assert_eq!(ManifoldData::torsion_free(1, 1).classify(1).unwrap().count, 2);
        let rp5 = ManifoldData::torsion_free(1, 0).with_linking(LinkingForm::z2_diagonal());
        let c = rp5.classify(1).unwrap();
        assert_eq!(c.count, 2);
        assert_eq!(c.count, rp5.linking.count_r_by_scan(1));
        for l in 1..=4 {
            assert_eq!(ManifoldData::circle().classify(l).unwrap().count, 2 * l as u128);
        }
    }

    #[test]
    fn circle_label_equivalence() {
        let m = ManifoldData::circle();
        let lab = |l: i64| RepLabel { lambda: vec![l], irrep_index: 0 };
        assert!(m.labels_equivalent(1, &lab(0), &lab(0)).unwrap());
        assert!(m.labels_equivalent(1, &lab(0), &lab(2)).unwrap());
        assert!(!m.labels_equivalent(1, &lab(0), &lab(1)).unwrap());
        assert!(!m.labels_equivalent(2, &lab(0), &lab(2)).unwrap());
    }

    #[test]
    fn classify_emits_one_label_per_class() {
        let mut m = ManifoldData::torsion_free(1, 2).with_linking(LinkingForm::hyperbolic(2).unwrap());
        m.pairing = IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]);
        let c = m.classify(1).unwrap();
        for (i, a) in c.labels.iter().enumerate() {
            for (j, b) in c.labels.iter().enumerate() {
                let eq = m
                    .labels_equivalent_reps(1, &a.lambda, &c.irreps[a.irrep_index], &b.lambda, &c.irreps[b.irrep_index])
                    .unwrap();
                assert_eq!(eq, i == j);
            }
        }
        // every label in a larger box lands in exactly one class
        for l0 in -3..4 {
            for l1 in -3..4 {
                let hits = c
                    .labels
                    .iter()
                    .filter(|x| x.irrep_index == 0 && m.lambdas_equivalent(&x.lambda, &[l0, l1], 1).unwrap())
                    .count();
                assert_eq!(hits, 1);
            }
        }
    }

    #[test]
    fn transport_example() {
        let m = rp5_times_circle();
        let irreps = finheis::build_irreps(&m.linking).unwrap();
        let theta = vec![GroupElement(vec![1])];
        let tau = m.solve_tau(&theta).unwrap();
        assert_eq!(tau, vec![vec![q(1, 2)]]);
        let plus_i = irreps.iter().find(|r| (r.matrix(&GroupElement(vec![1]))[(0, 0)].im - 1.0).abs() < 1e-12).unwrap();
        let t = m.transport_decomposition(&theta, &[1], plus_i).unwrap();
        assert_eq!(t.mu, vec![q(1, 2)]);
        assert!((t.rep.matrix(&GroupElement(vec![1]))[(0, 0)].im + 1.0).abs() < 1e-12);
        let t0 = m.transport_decomposition(&[GroupElement(vec![0])], &[1], plus_i).unwrap();
        assert!(finheis::are_equivalent(&t0.rep, plus_i).unwrap());
        // lambda even: no change
        let t2 = m.transport_decomposition(&theta, &[2], plus_i).unwrap();
        assert!(finheis::are_equivalent(&t2.rep, plus_i).unwrap());
    }

    #[test]
    fn transport_composes() {
        let lf = LinkingForm::orthogonal_sum(&[LinkingForm::hyperbolic(4).unwrap(), LinkingForm::z2_diagonal()]).unwrap();
        let m = ManifoldData::torsion_free(1, 2).with_linking(lf);
        let g = m.linking.group().clone();
        let irreps = finheis::build_irreps(&m.linking).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let rand_el = |rng: &mut ChaCha8Rng| GroupElement(g.factors().iter().map(|&n| rng.gen_range(0..n)).collect());
            let th1: Vec<GroupElement> = (0..2).map(|_| rand_el(&mut rng)).collect();
            let th2: Vec<GroupElement> = (0..2).map(|_| rand_el(&mut rng)).collect();
            let sum: Vec<GroupElement> = th1.iter().zip(&th2).map(|(a, b)| g.add(a, b)).collect();
            let neg: Vec<GroupElement> = th1.iter().map(|a| g.neg(a)).collect();
            let lambda = [rng.gen_range(-3..4), rng.gen_range(-3..4)];
            let pi = &irreps[rng.gen_range(0..irreps.len())];
            let a = m.transport_decomposition(&th1, &lambda, pi).unwrap();
            let ab = m.transport_decomposition(&th2, &lambda, &a.rep).unwrap();
            let direct = m.transport_decomposition(&sum, &lambda, pi).unwrap();
            assert!(finheis::are_equivalent(&ab.rep, &direct.rep).unwrap());
            let back = m.transport_decomposition(&neg, &lambda, &a.rep).unwrap();
            assert!(finheis::are_equivalent(&back.rep, pi).unwrap());
        }
    }

    #[test]
    fn normalize_examples() {
        let m = ManifoldData::torsion_free(1, 2);
        let (n, tau) = m.normalize_sigma().unwrap();
        assert_eq!(n, m);
        assert!(tau.iter().flatten().all(|x| x.is_zero()));

        let mut m = ManifoldData::torsion_free(1, 2);
        m.sigma_free = vec![vec![q(1, 2), q(1, 3)], vec![q(-1, 3), q(0, 1)]];
        let (n, tau) = m.normalize_sigma().unwrap();
        assert!(n.is_sigma_diagonal());
        assert_eq!(n.sigma_free[0][0], q(1, 2));
        // undoing the change from the new splitting recovers 1/3
        let neg: Vec<Vec<QmodZ>> = tau.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        assert_eq!(n.sigma_after_change(&neg)[0][1], q(1, 3));
    }

    #[test]
    fn json_round_trip_and_diagnostics() {
        let m = rp5_times_circle();
        let back = ManifoldData::from_json_str(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let bad = "{\n  \"k\": 0,\n  \"b\": 1,\n  \"pairing\": [[1]],\n  \"sigma_free\": [[\"1/x\"]]\n}";
        let err = ManifoldData::from_json_str(bad).unwrap_err().to_string();
        assert!(err.contains("line 5"), "{err}");
        let float = "{\"k\":0,\"b\":1,\"pairing\":[[1]],\"sigma_free\":[[0.5]]}";
        assert!(ManifoldData::from_json_str(float).is_err());
    }

    #[test]
    fn torsion_presentation_is_normalized() {
        let s = r#"{"k":1,"b":0,"pairing":[],"torsion":[2,3],"linking":[["1/2","0"],["0","0"]],"sigma_free":[]}"#;
        let err = ManifoldData::from_json_str(s).unwrap().validate();
        // Z6 with a degenerate form: the 3-part pairs trivially
        assert!(matches!(err[0], DataViolation::Linking(Violation::Degenerate { .. })));
        let s = r#"{"k":1,"b":0,"pairing":[],"torsion":[2,1],"linking":[["1/2","0"],["0","0"]],"sigma_free":[]}"#;
        let m = ManifoldData::from_json_str(s).unwrap();
        assert_eq!(m.linking.group(), &FinAbGroup::new(vec![2]).unwrap());
        assert!(m.validate().is_empty());
    }

    fn nu_free(m: &ManifoldData, rng: &mut ChaCha8Rng) -> GElement {
        GElement::random(rng, m, &SpectralModel::circle(1), 12, 0.0, 5, true)
    }

    proptest! {
        #[test]
        fn cocycle_is_bilinear_and_skew(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lf = LinkingForm::orthogonal_sum(&[LinkingForm::hyperbolic(3).unwrap(), LinkingForm::z2_diagonal()]).unwrap();
            let mut m = ManifoldData::torsion_free(1, 2).with_linking(lf);
            m.sigma_free = vec![vec![q(1, 2), q(1, 5)], vec![q(-1, 5), q(0, 1)]];
            m.pairing = IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]);
            let (f, g, h) = (nu_free(&m, &mut rng), nu_free(&m, &mut rng), nu_free(&m, &mut rng));
            prop_assert!((m.cocycle_exact(&f, &g) + m.cocycle_exact(&g, &f)).is_zero());
            prop_assert!(m.cocycle_exact(&f, &f).mul_i64(2).is_zero());
            let lhs = m.cocycle_exact(&f.add(&m, &g), &h);
            prop_assert_eq!(lhs, m.cocycle_exact(&f, &h) + m.cocycle_exact(&g, &h));
            let model = SpectralModel::circle(3);
            let f = GElement::random(&mut rng, &m, &model, 12, 1.0, 5, true);
            let g = GElement::random(&mut rng, &m, &model, 12, 1.0, 5, true);
            let s = m.cocycle(&model, &f, &g).unwrap() + m.cocycle(&model, &g, &f).unwrap();
            prop_assert!(s.distance_to_zero() < 1e-10);
        }
    }
}
