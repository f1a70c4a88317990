//! Spectral data of the Laplacian on coclosed forms of middle degree and the
//! polarization it induces: the inner product `(a, b)_V = sum sqrt(l_j) a_j b_j`,
//! the complex structure `J = *d / sqrt(Laplacian)` and the symplectic form
//! `S(a, b) = int a ^ d b = (a, J b)_V`.
//!
//! Vectors are coefficient lists against an `L^2`-orthonormal eigenbasis.
//! On that basis `*d` maps each mode to `+-sqrt(l)` times its partner mode.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("mode {0} has a non-positive eigenvalue")]
    NonPositive(usize),
    #[error("mode {0} is paired with itself or an out-of-range index")]
    BadPartner(usize),
    #[error("modes {0} and {1} are paired but not mutually")]
    NotMutual(usize, usize),
    #[error("paired modes {0} and {1} have different eigenvalues")]
    EigenvalueMismatch(usize, usize),
    #[error("paired modes {0} and {1} must carry opposite signs")]
    SignMismatch(usize, usize),
    #[error("vector has {got} coefficients, model has {expected} modes")]
    Length { expected: usize, got: usize },
}

/// One eigenmode: `*d psi = sign * sqrt(eigenvalue) * psi_partner`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mode {
    pub eigenvalue: BigRational,
    pub partner: usize,
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralModel {
    modes: Vec<Mode>,
    sqrt_eig: Vec<f64>,
}

/// Coefficients against the orthonormal eigenbasis.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ModeVec(pub Vec<f64>);

impl ModeVec {
    pub fn zeros(n: usize) -> Self {
        ModeVec(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &ModeVec) -> ModeVec {
        ModeVec(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, k: f64) -> ModeVec {
        ModeVec(self.0.iter().map(|a| a * k).collect())
    }

    pub fn neg(&self) -> ModeVec {
        self.scale(-1.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }
}

impl SpectralModel {
    pub fn new(modes: Vec<Mode>) -> Result<Self, SpectralError> {
        let n = modes.len();
        for (i, m) in modes.iter().enumerate() {
            if !m.eigenvalue.is_positive() {
                return Err(SpectralError::NonPositive(i));
            }
            if m.partner >= n || m.partner == i {
                return Err(SpectralError::BadPartner(i));
            }
            let p = &modes[m.partner];
            if p.partner != i {
                return Err(SpectralError::NotMutual(i, m.partner));
            }
            if p.eigenvalue != m.eigenvalue {
                return Err(SpectralError::EigenvalueMismatch(i, m.partner));
            }
            if m.sign.abs() != 1 || p.sign != -m.sign {
                return Err(SpectralError::SignMismatch(i, m.partner));
            }
        }
        let sqrt_eig = modes.iter().map(|m| m.eigenvalue.to_f64().unwrap().sqrt()).collect();
        Ok(SpectralModel { modes, sqrt_eig })
    }

    /// Pairs of modes sharing the given eigenvalues, in order.
    pub fn synthetic(eigenvalues: &[BigRational]) -> Result<Self, SpectralError> {
        let mut modes = Vec::with_capacity(2 * eigenvalues.len());
        for (k, l) in eigenvalues.iter().enumerate() {
            modes.push(Mode { eigenvalue: l.clone(), partner: 2 * k + 1, sign: -1 });
            modes.push(Mode { eigenvalue: l.clone(), partner: 2 * k, sign: 1 });
        }
        Self::new(modes)
    }

    /// Functions on the circle: modes `cos(n t)/sqrt(pi)`, `sin(n t)/sqrt(pi)`
    /// for `n = 1..=n_max`, eigenvalue `n^2`, with `d cos = -n sin`.
    pub fn circle(n_max: usize) -> Self {
        let ev: Vec<BigRational> = (1..=n_max).map(|n| BigRational::from_integer(BigInt::from(n * n))).collect();
        Self::synthetic(&ev).expect("circle model is well formed")
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn sqrt_eigenvalue(&self, j: usize) -> f64 {
        self.sqrt_eig[j]
    }

    fn check(&self, a: &ModeVec) -> Result<(), SpectralError> {
        if a.len() != self.len() {
            return Err(SpectralError::Length { expected: self.len(), got: a.len() });
        }
        Ok(())
    }

    /// `(a, b)_V`.
    pub fn v_inner(&self, a: &ModeVec, b: &ModeVec) -> Result<f64, SpectralError> {
        self.check(a)?;
        self.check(b)?;
        Ok(a.0.iter().zip(&b.0).zip(&self.sqrt_eig).map(|((x, y), s)| s * x * y).sum())
    }

    pub fn apply_j(&self, a: &ModeVec) -> Result<ModeVec, SpectralError> {
        self.check(a)?;
        let mut out = ModeVec::zeros(self.len());
        for (p, m) in self.modes.iter().enumerate() {
            out.0[m.partner] += f64::from(m.sign) * a.0[p];
        }
        Ok(out)
    }

    /// `*d a`, the unnormalized operator.
    pub fn apply_j_tilde(&self, a: &ModeVec) -> Result<ModeVec, SpectralError> {
        self.check(a)?;
        let mut out = ModeVec::zeros(self.len());
        for (p, m) in self.modes.iter().enumerate() {
            out.0[m.partner] += f64::from(m.sign) * self.sqrt_eig[p] * a.0[p];
        }
        Ok(out)
    }

    /// `int a ^ d b`, computed as the `L^2` pairing of `a` with `*d b`.
    pub fn symplectic(&self, a: &ModeVec, b: &ModeVec) -> Result<f64, SpectralError> {
        let jb = self.apply_j_tilde(b)?;
        Ok(a.0.iter().zip(&jb.0).map(|(x, y)| x * y).sum())
    }

    /// Mode pairs `(x, y)` with `J psi_x = psi_y`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.modes
            .iter()
            .enumerate()
            .filter(|(_, m)| m.sign == 1)
            .map(|(x, m)| (x, m.partner))
            .collect()
    }

    /// Darboux coordinates `(a, b)` per pair for the form `scale * S`, so that
    /// `scale * S(v, w) = sum (b_j a'_j - a_j b'_j)` and the inner product
    /// `scale * S(J v, w)` is the standard one.
    pub fn darboux(&self, v: &ModeVec, scale: f64) -> Result<(Vec<f64>, Vec<f64>), SpectralError> {
        self.check(v)?;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (x, y) in self.pairs() {
            let w = (scale * self.sqrt_eig[x]).sqrt();
            a.push(v.0[x] * w);
            b.push(v.0[y] * w);
        }
        Ok((a, b))
    }

    /// Inverse of [`SpectralModel::darboux`].
    pub fn from_darboux(&self, a: &[f64], b: &[f64], scale: f64) -> ModeVec {
        let mut v = ModeVec::zeros(self.len());
        for (k, (x, y)) in self.pairs().into_iter().enumerate() {
            let w = (scale * self.sqrt_eig[x]).sqrt();
            v.0[x] = a[k] / w;
            v.0[y] = b[k] / w;
        }
        v
    }

    pub fn random_vec<R: Rng + ?Sized>(&self, rng: &mut R, amplitude: f64) -> ModeVec {
        ModeVec((0..self.len()).map(|_| rng.gen_range(-amplitude..amplitude)).collect())
    }
}

/// `r * pi` for rational `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiMultiple(pub BigRational);

impl PiMultiple {
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap() * PI
    }
}

/// Trigonometric polynomial `sum a_n cos(n t) + b_n sin(n t)`, `n >= 1`, with
/// rational coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FourierPoly {
    pub cos: Vec<BigRational>,
    pub sin: Vec<BigRational>,
}

impl FourierPoly {
    pub fn zero(n_max: usize) -> Self {
        FourierPoly { cos: vec![BigRational::zero(); n_max], sin: vec![BigRational::zero(); n_max] }
    }

    pub fn from_i64(cos: &[i64], sin: &[i64]) -> Self {
        let c = |x: &i64| BigRational::from_integer(BigInt::from(*x));
        let n = cos.len().max(sin.len());
        let mut p = Self::zero(n);
        for (i, x) in cos.iter().enumerate() {
            p.cos[i] = c(x);
        }
        for (i, x) in sin.iter().enumerate() {
            p.sin[i] = c(x);
        }
        p
    }

    pub fn n_max(&self) -> usize {
        self.cos.len()
    }

    /// Coefficients against the orthonormal basis of [`SpectralModel::circle`].
    pub fn to_mode_vec(&self) -> ModeVec {
        let s = PI.sqrt();
        let mut v = Vec::with_capacity(2 * self.n_max());
        for (a, b) in self.cos.iter().zip(&self.sin) {
            v.push(a.to_f64().unwrap() * s);
            v.push(b.to_f64().unwrap() * s);
        }
        ModeVec(v)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let n = (k + 1) as f64;
            acc += a.to_f64().unwrap() * (n * t).cos() + b.to_f64().unwrap() * (n * t).sin();
        }
        acc
    }

    pub fn derivative(&self) -> FourierPoly {
        let mut d = Self::zero(self.n_max());
        for k in 0..self.n_max() {
            let n = BigRational::from_integer(BigInt::from(k + 1));
            d.cos[k] = &self.sin[k] * &n;
            d.sin[k] = -(&self.cos[k] * &n);
        }
        d
    }

    /// `J` in raw coefficients: `cos(n t) -> -sin(n t)`, `sin(n t) -> cos(n t)`.
    pub fn apply_j(&self) -> FourierPoly {
        FourierPoly { cos: self.sin.clone(), sin: self.cos.iter().map(|a| -a.clone()).collect() }
    }

    /// `(p, q)_V` as a multiple of pi.
    pub fn v_inner(&self, q: &FourierPoly) -> PiMultiple {
        let mut acc = BigRational::zero();
        for k in 0..self.n_max().min(q.n_max()) {
            let n = BigRational::from_integer(BigInt::from(k + 1));
            acc += n * (&self.cos[k] * &q.cos[k] + &self.sin[k] * &q.sin[k]);
        }
        PiMultiple(acc)
    }

    /// `int p dq` over the circle, as a multiple of pi.
    pub fn symplectic(&self, q: &FourierPoly) -> PiMultiple {
        let mut acc = BigRational::zero();
        for k in 0..self.n_max().min(q.n_max()) {
            let n = BigRational::from_integer(BigInt::from(k + 1));
            acc += n * (&self.cos[k] * &q.sin[k] - &self.sin[k] * &q.cos[k]);
        }
        PiMultiple(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Trapezoid rule on a uniform grid, exact for trigonometric polynomials
    /// of degree below the number of nodes.
    fn quadrature(p: &FourierPoly, q: &FourierPoly) -> f64 {
        let m = 4 * (p.n_max() + q.n_max()) + 8;
        let dq = q.derivative();
        let h = 2.0 * PI / m as f64;
        (0..m).map(|i| p.eval(i as f64 * h) * dq.eval(i as f64 * h)).sum::<f64>() * h
    }

    #[test]
    fn cos_sin_pair_to_pi() {
        let c = FourierPoly::from_i64(&[1], &[0]);
        let s = FourierPoly::from_i64(&[0], &[1]);
        assert_eq!(c.symplectic(&s), PiMultiple(BigRational::from_integer(1.into())));
        let m = SpectralModel::circle(1);
        let v = m.symplectic(&c.to_mode_vec(), &s.to_mode_vec()).unwrap();
        assert!((v - PI).abs() < 1e-12);
        assert!((quadrature(&c, &s) - PI).abs() < 1e-12);
    }

    #[test]
    fn j_on_circle_modes() {
        let m = SpectralModel::circle(1);
        let cos = ModeVec(vec![1.0, 0.0]);
        let sin = ModeVec(vec![0.0, 1.0]);
        assert_eq!(m.apply_j(&cos).unwrap(), ModeVec(vec![0.0, -1.0]));
        assert_eq!(m.apply_j(&sin).unwrap(), ModeVec(vec![1.0, 0.0]));
        let two = SpectralModel::circle(2);
        let cos2 = ModeVec(vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(two.apply_j_tilde(&cos2).unwrap(), ModeVec(vec![0.0, 0.0, 0.0, -2.0]));
    }

    #[test]
    fn malformed_models_are_rejected() {
        let one = BigRational::from_integer(1.into());
        let bad = vec![
            Mode { eigenvalue: one.clone(), partner: 1, sign: 1 },
            Mode { eigenvalue: one.clone(), partner: 0, sign: 1 },
        ];
        assert_eq!(SpectralModel::new(bad), Err(SpectralError::SignMismatch(0, 1)));
        let selfpair = vec![Mode { eigenvalue: one, partner: 0, sign: 1 }];
        assert_eq!(SpectralModel::new(selfpair), Err(SpectralError::BadPartner(0)));
        let zero = vec![
            Mode { eigenvalue: BigRational::zero(), partner: 1, sign: 1 },
            Mode { eigenvalue: BigRational::zero(), partner: 0, sign: -1 },
        ];
        assert_eq!(SpectralModel::new(zero), Err(SpectralError::NonPositive(0)));
    }

    #[test]
    fn pair_map_squares_to_minus_eigenvalue() {
        let ev: Vec<BigRational> = [2, 3, 7].iter().map(|&x| BigRational::new(x.into(), 3.into())).collect();
        let m = SpectralModel::synthetic(&ev).unwrap();
        for j in 0..m.len() {
            let mut e = ModeVec::zeros(m.len());
            e.0[j] = 1.0;
            let jj = m.apply_j_tilde(&m.apply_j_tilde(&e).unwrap()).unwrap();
            let l = m.modes()[j].eigenvalue.to_f64().unwrap();
            assert!((jj.0[j] + l).abs() < 1e-12);
        }
    }

    fn poly(n: usize) -> impl Strategy<Value = FourierPoly> {
        (proptest::collection::vec(-9i64..9, n), proptest::collection::vec(-9i64..9, n))
            .prop_map(|(c, s)| FourierPoly::from_i64(&c, &s))
    }

    proptest! {
        #[test]
        fn exact_identity_on_circle(p in poly(6), q in poly(6)) {
            prop_assert_eq!(p.symplectic(&q), p.v_inner(&q.apply_j()));
            let x = quadrature(&p, &q);
            prop_assert!((x - p.symplectic(&q).to_f64()).abs() < 1e-9 * (1.0 + x.abs()));
        }

        #[test]
        fn float_identity_and_j_axioms(p in poly(5), q in poly(5)) {
            let m = SpectralModel::circle(5);
            let (a, b) = (p.to_mode_vec(), q.to_mode_vec());
            let s = m.symplectic(&a, &b).unwrap();
            let via_j = m.v_inner(&a, &m.apply_j(&b).unwrap()).unwrap();
            prop_assert!((s - via_j).abs() < 1e-10 * (1.0 + s.abs()));
            let ja = m.apply_j(&a).unwrap();
            let jja = m.apply_j(&ja).unwrap();
            prop_assert!(jja.add(&a).0.iter().all(|x| x.abs() < 1e-12));
            let jb = m.apply_j(&b).unwrap();
            let sj = m.symplectic(&ja, &jb).unwrap();
            prop_assert!((sj - s).abs() < 1e-9 * (1.0 + s.abs()));
            if !a.is_zero() {
                prop_assert!(m.symplectic(&ja, &a).unwrap() > 0.0);
            }
        }

        #[test]
        fn darboux_round_trip(p in poly(4), q in poly(4)) {
            let m = SpectralModel::circle(4);
            let (v, w) = (p.to_mode_vec(), q.to_mode_vec());
            let scale = 2.0 * PI;
            let (a, b) = m.darboux(&v, scale).unwrap();
            let (a2, b2) = m.darboux(&w, scale).unwrap();
            let s: f64 = (0..a.len()).map(|k| b[k] * a2[k] - a[k] * b2[k]).sum();
            let expect = scale * m.symplectic(&v, &w).unwrap();
            prop_assert!((s - expect).abs() < 1e-9 * (1.0 + s.abs()));
            let back = m.from_darboux(&a, &b, scale);
            prop_assert!(back.0.iter().zip(&v.0).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }
}
