//! Bosonic Fock space on a complex Hilbert space `W` with orthonormal basis
//! `e_1..e_n`, truncated at total degree `D`, and the Heisenberg action on it.
//!
//! Conventions, fixed by requiring unitarity on real parameters:
//!
//! * monomial norms `<e^m, e^m> = kappa^{|m|} m!`, so coherent vectors
//!   `eps_xi = sum_j xi^j / j!` satisfy `<eps_xi, eps_eta> = exp(kappa <xi, eta>)`;
//! * inner products are linear in the first argument;
//! * a group element is given by `v+` in `W` and `v-` in `conj(W)`, both as
//!   coordinate vectors, and acts by
//!   `eps_xi -> exp(-kappa/2 <v+, v-> - kappa <xi, v->) eps_{xi + v+}`,
//!   where `<a, b>` here is the bilinear sum `sum a_j b_j`;
//! * real Darboux coordinates `(a, b)` map to `v+ = (a + i b)/sqrt(kappa)`,
//!   `v- = (a - i b)/sqrt(kappa)`; with this scaling the multiplier is
//!   `exp(i S(v, v'))`, `S(v, v') = sum b_j a'_j - a_j b'_j`, for every `kappa`.

use std::collections::HashMap;
use std::sync::OnceLock;

use nalgebra::{Cholesky, DMatrix};
use rand::Rng;
use thiserror::Error;

use crate::exactalg::QmodZ;
use crate::linalg::{cis_turns, C64};
use crate::spectral::{ModeVec, SpectralError, SpectralModel};

/// Coherent labels closer than this are treated as equal when merging.
pub const LABEL_MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("expected {expected} coordinates, got {got}")]
    Length { expected: usize, got: usize },
    #[error("vector belongs to a space of dimension {got}, expected {expected}")]
    Space { expected: usize, got: usize },
    #[error("kappa must be positive, got {0}")]
    Kappa(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Group parameter `v = v+ + v-`. Real elements have `minus = conj(plus)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeisParam {
    pub plus: Vec<C64>,
    pub minus: Vec<C64>,
}

impl HeisParam {
    pub fn zero(n: usize) -> Self {
        HeisParam { plus: vec![C64::new(0.0, 0.0); n], minus: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn len(&self) -> usize {
        self.plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty()
    }

    /// From real Darboux coordinates.
    pub fn from_real(a: &[f64], b: &[f64], kappa: f64) -> Self {
        let s = kappa.sqrt();
        let plus = a.iter().zip(b).map(|(&x, &y)| C64::new(x, y) / s).collect();
        let minus = a.iter().zip(b).map(|(&x, &y)| C64::new(x, -y) / s).collect();
        HeisParam { plus, minus }
    }

    /// From complexified Darboux coordinates `a = a_re + i a_im` etc.
    pub fn from_complex(a: &[C64], b: &[C64], kappa: f64) -> Self {
        let s = kappa.sqrt();
        let i = C64::new(0.0, 1.0);
        let plus = a.iter().zip(b).map(|(&x, &y)| (x + i * y) / s).collect();
        let minus = a.iter().zip(b).map(|(&x, &y)| (x - i * y) / s).collect();
        HeisParam { plus, minus }
    }

    /// Complex Darboux coordinates `(a, b)`.
    pub fn to_complex_darboux(&self, kappa: f64) -> (Vec<C64>, Vec<C64>) {
        let s = kappa.sqrt();
        let i = C64::new(0.0, 1.0);
        let a = self.plus.iter().zip(&self.minus).map(|(&z, &u)| s * (z + u) / 2.0).collect();
        let b = self.plus.iter().zip(&self.minus).map(|(&z, &u)| s * (z - u) / (2.0 * i)).collect();
        (a, b)
    }

    pub fn add(&self, o: &HeisParam) -> HeisParam {
        HeisParam {
            plus: self.plus.iter().zip(&o.plus).map(|(a, b)| a + b).collect(),
            minus: self.minus.iter().zip(&o.minus).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn neg(&self) -> HeisParam {
        HeisParam { plus: self.plus.iter().map(|a| -a).collect(), minus: self.minus.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, c: C64) -> HeisParam {
        HeisParam { plus: self.plus.iter().map(|a| a * c).collect(), minus: self.minus.iter().map(|a| a * c).collect() }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.plus.iter().zip(&self.minus).all(|(z, u)| (z.conj() - u).norm() <= tol)
    }
}

/// The symplectic form `S(v, v') = sum b_j a'_j - a_j b'_j`, extended
/// bilinearly to complex parameters.
pub fn heisenberg_form(v: &HeisParam, w: &HeisParam, kappa: f64) -> C64 {
    let (a, b) = v.to_complex_darboux(kappa);
    let (a2, b2) = w.to_complex_darboux(kappa);
    (0..a.len()).map(|j| b[j] * a2[j] - a[j] * b2[j]).sum()
}

fn bilinear(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `<x, y> = sum x_j conj(y_j)`.
pub fn hermitian(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

/// Truncated symmetric algebra over `C^n` with the `kappa`-weighted inner
/// product.
#[derive(Clone, Debug)]
pub struct FockSpace {
    n_modes: usize,
    degree: usize,
    kappa: f64,
    basis: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    norms: Vec<f64>,
    raise: Vec<Vec<Option<usize>>>,
    lower: Vec<Vec<Option<usize>>>,
    extended: OnceLock<Box<FockSpace>>,
}

fn multi_indices(n: usize, degree: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for d in 0..=degree {
        let mut cur = vec![0u32; n];
        fill(&mut out, &mut cur, 0, d as u32);
    }
    out
}

fn fill(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    if pos + 1 >= cur.len() {
        if let Some(last) = cur.last_mut() {
            *last = left;
            out.push(cur.clone());
        } else if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for k in (0..=left).rev() {
        cur[pos] = k;
        fill(out, cur, pos + 1, left - k);
    }
    cur[pos] = 0;
}

impl FockSpace {
    pub fn new(n_modes: usize, degree: usize, kappa: f64) -> Result<Self, FockError> {
        if !(kappa > 0.0) {
            return Err(FockError::Kappa(kappa));
        }
        let basis = multi_indices(n_modes, degree);
        let index: HashMap<Vec<u32>, usize> = basis.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let norms = basis
            .iter()
            .map(|m| {
                let deg: u32 = m.iter().sum();
                let fact: f64 = m.iter().map(|&k| (1..=k).map(f64::from).product::<f64>()).product();
                kappa.powi(deg as i32) * fact
            })
            .collect();
        let mut raise = vec![vec![None; basis.len()]; n_modes];
        let mut lower = vec![vec![None; basis.len()]; n_modes];
        for (i, m) in basis.iter().enumerate() {
            for j in 0..n_modes {
                let mut up = m.clone();
                up[j] += 1;
                raise[j][i] = index.get(&up).copied();
                if m[j] > 0 {
                    let mut dn = m.clone();
                    dn[j] -= 1;
                    lower[j][i] = index.get(&dn).copied();
                }
            }
        }
        Ok(FockSpace { n_modes, degree, kappa, basis, index, norms, raise, lower, extended: OnceLock::new() })
    }

    /// Space whose modes are the `J`-pairs of a spectral model.
    pub fn for_model(model: &SpectralModel, degree: usize, kappa: f64) -> Result<Self, FockError> {
        Self::new(model.pairs().len(), degree, kappa)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn monomial_norm_sq(&self, m: &[u32]) -> Option<f64> {
        self.index.get(m).map(|&i| self.norms[i])
    }

    fn check_param(&self, p: &HeisParam) -> Result<(), FockError> {
        if p.plus.len() != self.n_modes || p.minus.len() != self.n_modes {
            return Err(FockError::Length { expected: self.n_modes, got: p.plus.len().max(p.minus.len()) });
        }
        Ok(())
    }

    fn check_vec(&self, x: &FockVec) -> Result<(), FockError> {
        if x.coeffs.len() != self.dim() {
            return Err(FockError::Space { expected: self.dim(), got: x.coeffs.len() });
        }
        Ok(())
    }

    pub fn vacuum(&self) -> FockVec {
        let mut c = vec![C64::new(0.0, 0.0); self.dim()];
        c[0] = C64::new(1.0, 0.0);
        FockVec { coeffs: c }
    }

    pub fn monomial(&self, m: &[u32]) -> Option<FockVec> {
        let i = *self.index.get(m)?;
        let mut c = vec![C64::new(0.0, 0.0); self.dim()];
        c[i] = C64::new(1.0, 0.0);
        Some(FockVec { coeffs: c })
    }

    /// Sum of the coherent series up to the truncation degree.
    pub fn coherent(&self, xi: &[C64]) -> Result<FockVec, FockError> {
        if xi.len() != self.n_modes {
            return Err(FockError::Length { expected: self.n_modes, got: xi.len() });
        }
        let coeffs = self
            .basis
            .iter()
            .map(|m| {
                m.iter().zip(xi).fold(C64::new(1.0, 0.0), |acc, (&k, &x)| {
                    let fact: f64 = (1..=k).map(f64::from).product();
                    acc * x.powu(k) / fact
                })
            })
            .collect();
        Ok(FockVec { coeffs })
    }

    pub fn inner(&self, x: &FockVec, y: &FockVec) -> Result<C64, FockError> {
        self.check_vec(x)?;
        self.check_vec(y)?;
        Ok(x.coeffs.iter().zip(&y.coeffs).zip(&self.norms).map(|((a, b), n)| a * b.conj() * *n).sum())
    }

    pub fn norm(&self, x: &FockVec) -> Result<f64, FockError> {
        Ok(self.inner(x, x)?.re.max(0.0).sqrt())
    }

    /// Multiplication by `e_j`; the top degree falls off.
    pub fn create(&self, j: usize, x: &FockVec) -> FockVec {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for (i, c) in x.coeffs.iter().enumerate() {
            if let Some(t) = self.raise[j][i] {
                out[t] += c;
            }
        }
        FockVec { coeffs: out }
    }

    /// Adjoint of [`FockSpace::create`]: `e^m -> kappa m_j e^{m - 1_j}`.
    pub fn annihilate(&self, j: usize, x: &FockVec) -> FockVec {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for (i, c) in x.coeffs.iter().enumerate() {
            if let Some(t) = self.lower[j][i] {
                out[t] += c * (self.kappa * f64::from(self.basis[i][j]));
            }
        }
        FockVec { coeffs: out }
    }

    fn exp_series<F: Fn(&FockVec) -> FockVec>(&self, x: &FockVec, step: F) -> FockVec {
        let mut acc = x.clone();
        let mut term = x.clone();
        for k in 1..=self.degree {
            term = step(&term).scale(C64::new(1.0 / k as f64, 0.0));
            if term.coeffs.iter().all(|c| *c == C64::new(0.0, 0.0)) {
                break;
            }
            acc = acc.add(&term);
        }
        acc
    }

    fn lowering(&self, u: &[C64], x: &FockVec) -> FockVec {
        self.exp_series(x, |t| {
            let mut out = FockVec::zeros(self.dim());
            for (j, &uj) in u.iter().enumerate() {
                if uj != C64::new(0.0, 0.0) {
                    out = out.add(&self.annihilate(j, t).scale(-uj));
                }
            }
            out
        })
    }

    fn raising(&self, z: &[C64], x: &FockVec) -> FockVec {
        self.exp_series(x, |t| {
            let mut out = FockVec::zeros(self.dim());
            for (j, &zj) in z.iter().enumerate() {
                if zj != C64::new(0.0, 0.0) {
                    out = out.add(&self.create(j, t).scale(zj));
                }
            }
            out
        })
    }

    fn extended(&self) -> &FockSpace {
        self.extended.get_or_init(|| {
            Box::new(FockSpace::new(self.n_modes, 2 * self.degree, self.kappa).expect("valid kappa"))
        })
    }

    fn embed(&self, big: &FockSpace, x: &FockVec) -> FockVec {
        let mut out = FockVec::zeros(big.dim());
        for (i, c) in x.coeffs.iter().enumerate() {
            out.coeffs[big.index[&self.basis[i]]] = *c;
        }
        out
    }

    /// Normal-ordered operator `exp(-kappa/2 <v+, v->) exp(v+ . a*) exp(-v- . a)`
    /// on the truncated space. The part pushed past degree `D` is dropped and
    /// its norm, measured up to degree `2D`, reported.
    pub fn act(&self, p: &HeisParam, x: &FockVec) -> Result<TruncatedAction, FockError> {
        self.check_param(p)?;
        self.check_vec(x)?;
        let pref = (-0.5 * self.kappa * bilinear(&p.plus, &p.minus)).exp();
        let lowered = self.lowering(&p.minus, x);
        let big = self.extended();
        let full = big.raising(&p.plus, &self.embed(big, &lowered)).scale(pref);
        let mut kept = FockVec::zeros(self.dim());
        let mut loss_sq = 0.0;
        for (i, c) in full.coeffs.iter().enumerate() {
            match self.index.get(&big.basis[i]) {
                Some(&k) => kept.coeffs[k] = *c,
                None => loss_sq += c.norm_sqr() * big.norms[i],
            }
        }
        let norm_loss = loss_sq.sqrt();
        Ok(TruncatedAction { result: kept, truncated: norm_loss > 0.0, norm_loss })
    }

    /// Closed form, truncated value and analytic tail bound for
    /// `<eps_xi, eps_eta>`.
    pub fn coherent_inner(&self, xi: &[C64], eta: &[C64]) -> Result<CoherentInner, FockError> {
        let x = self.kappa * hermitian(xi, eta);
        let closed = x.exp();
        let truncated = self.inner(&self.coherent(xi)?, &self.coherent(eta)?)?;
        Ok(CoherentInner { closed, truncated, tail_bound: exp_tail(x.norm(), self.degree) })
    }
}

/// `sum_{j > d} r^j / j!`.
pub fn exp_tail(r: f64, d: usize) -> f64 {
    let mut term = 1.0;
    for j in 1..=d {
        term *= r / j as f64;
    }
    let mut sum = 0.0;
    let mut j = d + 1;
    loop {
        term *= r / j as f64;
        sum += term;
        if term <= f64::EPSILON * sum || term == 0.0 {
            break;
        }
        j += 1;
        if j > d + 10_000 {
            break;
        }
    }
    sum
}

/// Smallest truncation degree, at least `min_degree`, whose tail bound for
/// an argument of modulus `r` is below `rel_tol * exp(r)`.
pub fn degree_for(r: f64, rel_tol: f64, min_degree: usize) -> usize {
    let mut d = min_degree;
    while exp_tail(r, d) > rel_tol * r.exp() {
        d += 1;
    }
    d
}

#[derive(Clone, Debug)]
pub struct CoherentInner {
    pub closed: C64,
    pub truncated: C64,
    pub tail_bound: f64,
}

#[derive(Clone, Debug)]
pub struct TruncatedAction {
    pub result: FockVec,
    pub truncated: bool,
    pub norm_loss: f64,
}

/// Coefficients on the monomial basis of a [`FockSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct FockVec {
    pub coeffs: Vec<C64>,
}

impl FockVec {
    pub fn zeros(n: usize) -> Self {
        FockVec { coeffs: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn add(&self, o: &FockVec) -> FockVec {
        FockVec { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &FockVec) -> FockVec {
        FockVec { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: C64) -> FockVec {
        FockVec { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }
}

/// Finite combination `sum_i c_i eps_{xi_i}` of coherent vectors, handled in
/// closed form.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CoherentSum {
    pub terms: Vec<(C64, Vec<C64>)>,
}

impl CoherentSum {
    pub fn single(c: C64, xi: Vec<C64>) -> Self {
        CoherentSum { terms: vec![(c, xi)] }
    }

    pub fn vacuum(n: usize) -> Self {
        Self::single(C64::new(1.0, 0.0), vec![C64::new(0.0, 0.0); n])
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: C64) -> CoherentSum {
        CoherentSum { terms: self.terms.iter().map(|(a, x)| (a * c, x.clone())).collect() }
    }

    pub fn add(&self, o: &CoherentSum) -> CoherentSum {
        let mut t = self.terms.clone();
        t.extend(o.terms.iter().cloned());
        CoherentSum { terms: t }.merged()
    }

    /// Combines terms whose labels agree to [`LABEL_MERGE_TOL`].
    pub fn merged(&self) -> CoherentSum {
        let mut out: Vec<(C64, Vec<C64>)> = Vec::new();
        for (c, x) in &self.terms {
            match out.iter_mut().find(|(_, y)| x.iter().zip(y.iter()).all(|(a, b)| (a - b).norm() <= LABEL_MERGE_TOL))
            {
                Some(slot) => slot.0 += c,
                None => out.push((*c, x.clone())),
            }
        }
        CoherentSum { terms: out }
    }

    pub fn sub(&self, o: &CoherentSum) -> CoherentSum {
        self.add(&o.scale(C64::new(-1.0, 0.0)))
    }

    /// Closed-form action on every term.
    pub fn act(&self, kappa: f64, p: &HeisParam) -> CoherentSum {
        let base = -0.5 * kappa * bilinear(&p.plus, &p.minus);
        CoherentSum {
            terms: self
                .terms
                .iter()
                .map(|(c, xi)| {
                    let s = (base - kappa * bilinear(xi, &p.minus)).exp();
                    (c * s, xi.iter().zip(&p.plus).map(|(a, b)| a + b).collect())
                })
                .collect(),
        }
    }

    pub fn inner(&self, kappa: f64, o: &CoherentSum) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                acc += a * b.conj() * (kappa * hermitian(x, y)).exp();
            }
        }
        acc
    }

    pub fn norm(&self, kappa: f64) -> f64 {
        self.inner(kappa, self).re.max(0.0).sqrt()
    }

    /// `|self - o|`, merging matching labels first so that nearly equal
    /// vectors do not cancel catastrophically.
    pub fn distance(&self, kappa: f64, o: &CoherentSum) -> f64 {
        let d = self.sub(o);
        let kept = CoherentSum { terms: d.terms.into_iter().filter(|(c, _)| c.norm() > 0.0).collect() };
        kept.norm(kappa)
    }

    pub fn to_fock(&self, space: &FockSpace) -> Result<FockVec, FockError> {
        let mut out = FockVec::zeros(space.dim());
        for (c, xi) in &self.terms {
            out = out.add(&space.coherent(xi)?.scale(*c));
        }
        Ok(out)
    }
}

/// Heisenberg parameter of a mode vector for the form `2 pi level S`.
pub fn polarize(model: &SpectralModel, nu: &ModeVec, level: u64, kappa: f64) -> Result<HeisParam, FockError> {
    let (a, b) = model.darboux(nu, std::f64::consts::TAU * level as f64)?;
    Ok(HeisParam::from_real(&a, &b, kappa))
}

/// Complexified parameter `nu_re + i nu_im`.
pub fn polarize_complex(
    model: &SpectralModel,
    re: &ModeVec,
    im: &ModeVec,
    level: u64,
    kappa: f64,
) -> Result<HeisParam, FockError> {
    let p = polarize(model, re, level, kappa)?;
    let q = polarize(model, im, level, kappa)?;
    Ok(p.add(&q.scale(C64::new(0.0, 1.0))))
}

/// `rho_lambda(eta, nu) = exp(2 pi i lambda(eta)) rho(nu)` on a coherent sum.
pub fn rho_lambda(
    model: &SpectralModel,
    lambda: &[i64],
    eta: &[QmodZ],
    nu: &ModeVec,
    kappa: f64,
    x: &CoherentSum,
) -> Result<CoherentSum, FockError> {
    if lambda.len() != eta.len() {
        return Err(FockError::Length { expected: lambda.len(), got: eta.len() });
    }
    let phase = lambda.iter().zip(eta).fold(QmodZ::zero(), |acc, (&l, e)| acc + e.mul_i64(l));
    let p = polarize(model, nu, 1, kappa)?;
    Ok(x.act(kappa, &p).scale(cis_turns(phase.to_f64())))
}

/// Complexified action: `eta` and `nu` may be complex; the torus character
/// becomes `exp(2 pi i lambda . eta)` with complex exponent.
pub fn act_complex(
    model: &SpectralModel,
    lambda: &[i64],
    eta: &[C64],
    nu_re: &ModeVec,
    nu_im: &ModeVec,
    kappa: f64,
    x: &CoherentSum,
) -> Result<CoherentSum, FockError> {
    if lambda.len() != eta.len() {
        return Err(FockError::Length { expected: lambda.len(), got: eta.len() });
    }
    let e: C64 = lambda.iter().zip(eta).map(|(&l, &h)| h * l as f64).sum();
    let phase = (C64::new(0.0, std::f64::consts::TAU) * e).exp();
    let p = polarize_complex(model, nu_re, nu_im, 1, kappa)?;
    Ok(x.act(kappa, &p).scale(phase))
}

/// Relative deviation of `rho(v) rho(v') eps_xi` from
/// `exp(i S(v, v')) rho(v + v') eps_xi`, computed in closed form.
pub fn cocycle_check(kappa: f64, v: &HeisParam, w: &HeisParam, xi: &[C64]) -> f64 {
    let start = CoherentSum::single(C64::new(1.0, 0.0), xi.to_vec());
    let lhs = start.act(kappa, w).act(kappa, v);
    let mult = (C64::new(0.0, 1.0) * heisenberg_form(v, w, kappa)).exp();
    let rhs = start.act(kappa, &v.add(w)).scale(mult);
    lhs.distance(kappa, &rhs) / rhs.norm(kappa).max(f64::MIN_POSITIVE)
}

/// Random real parameter with Darboux norm at most `radius`.
pub fn random_real_param<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64, kappa: f64) -> HeisParam {
    let mut a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = a.iter().chain(&b).map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let r = radius * rng.gen_range(0.0..1.0f64).sqrt() / norm;
    a.iter_mut().chain(b.iter_mut()).for_each(|x| *x *= r);
    HeisParam::from_real(&a, &b, kappa)
}

/// Random point of `W` with norm at most `radius`.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> Vec<C64> {
    let z: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = hermitian(&z, &z).re.sqrt().max(f64::MIN_POSITIVE);
    let r = radius * rng.gen_range(0.0..1.0f64) / norm;
    z.into_iter().map(|x| x * r).collect()
}

/// Gram matrix `exp(kappa <xi_i, xi_j>)` of coherent vectors, and whether it
/// is positive definite.
pub fn coherent_gram(kappa: f64, points: &[Vec<C64>]) -> (DMatrix<C64>, bool) {
    let k = points.len();
    let g = DMatrix::from_fn(k, k, |i, j| (kappa * hermitian(&points[i], &points[j])).exp());
    let pd = Cholesky::new(g.clone()).is_some();
    (g, pd)
}
