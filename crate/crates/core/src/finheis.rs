//! Irreducible projective representations of a finite abelian group with
//! cocycle `exp(2 pi i L(t, t'))`, where `L` is a skew bilinear form.
//!
//! The primary construction induces characters from a maximal isotropic
//! subgroup of the commutator form `L(t, s) - L(s, t)`; decomposing the
//! twisted regular representation is kept as an independent fallback.

use std::cmp::Ordering;

use num_bigint::BigInt;
use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exactalg::{solve_congruence, ExactAlgError, FinAbGroup, GroupElement, IntMatrix, QmodZ};
use crate::intertwine::{self, IntertwineError, MatrixRep};
use crate::linalg::{cis_turns, max_abs_diff, CMatrix, C64};
use crate::linkform::LinkingForm;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FinHeisError {
    #[error(transparent)]
    Group(#[from] ExactAlgError),
    #[error(transparent)]
    Numerics(#[from] IntertwineError),
    #[error("expected {expected} matrices, got {got}")]
    MatrixCount { expected: usize, got: usize },
    #[error("character value for generator {index} must be killed by {order}")]
    BadCharacter { index: usize, order: u64 },
    #[error("representations carry different cocycles")]
    CocycleMismatch,
    #[error("construction check failed: {0}")]
    Internal(String),
}

/// How irreducibles are produced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IrrepMethod {
    #[default]
    Induction,
    RegularDecomposition,
}

/// A projective representation, stored as one matrix per group element in
/// mixed-radix order.
#[derive(Clone, Debug)]
pub struct FiniteProjRep {
    form: LinkingForm,
    dim: usize,
    mats: Vec<CMatrix>,
}

impl FiniteProjRep {
    pub fn new(form: LinkingForm, mats: Vec<CMatrix>) -> Result<Self, FinHeisError> {
        let expected = form.group().order() as usize;
        if mats.len() != expected {
            return Err(FinHeisError::MatrixCount { expected, got: mats.len() });
        }
        let dim = mats[0].nrows();
        Ok(FiniteProjRep { form, dim, mats })
    }

    pub fn form(&self) -> &LinkingForm {
        &self.form
    }

    pub fn group(&self) -> &FinAbGroup {
        self.form.group()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, t: &GroupElement) -> &CMatrix {
        &self.mats[self.group().index_of(t)]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.mats
    }

    /// Matrices of the invariant-factor generators.
    pub fn generator_rep(&self) -> MatrixRep {
        let g = self.group();
        let gens = (0..g.rank()).map(|i| self.matrix(&g.generator(i)).clone()).collect();
        MatrixRep { dim: self.dim, generators: gens }
    }

    pub fn traces(&self) -> Vec<C64> {
        self.mats.iter().map(|m| m.trace()).collect()
    }

    /// `max |pi(t) pi(t') - exp(2 pi i L(t,t')) pi(t + t')|`.
    pub fn projective_defect(&self) -> f64 {
        let g = self.group();
        let n = self.mats.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let t = g.element_at(i);
            for j in 0..n {
                let s = g.element_at(j);
                let lhs = &self.mats[i] * &self.mats[j];
                let rhs = &self.mats[g.index_of(&g.add(&t, &s))] * cis_turns(self.form.pair(&t, &s).to_f64());
                worst = worst.max(max_abs_diff(&lhs, &rhs));
            }
        }
        worst
    }

    pub fn unitarity_defect(&self) -> f64 {
        let id = CMatrix::identity(self.dim, self.dim);
        self.mats.iter().map(|m| max_abs_diff(&(m.adjoint() * m), &id)).fold(0.0, f64::max)
    }
}

fn rep_order(a: &FiniteProjRep, b: &FiniteProjRep) -> Ordering {
    let key = |x: f64| (x * 1e9).round() as i64;
    a.dim.cmp(&b.dim).then_with(|| {
        for (x, y) in a.traces().iter().zip(b.traces()) {
            let o = key(x.re).cmp(&key(y.re)).then(key(x.im).cmp(&key(y.im)));
            if o != Ordering::Equal {
                return o;
            }
        }
        Ordering::Equal
    })
}

fn traces_match(a: &FiniteProjRep, b: &FiniteProjRep) -> bool {
    a.dim == b.dim && a.traces().iter().zip(b.traces()).all(|(x, y)| (x - y).norm() < 1e-8)
}

/// Equivalence through the commutant dimension of the generator matrices.
pub fn are_equivalent(a: &FiniteProjRep, b: &FiniteProjRep) -> Result<bool, FinHeisError> {
    if a.form != b.form {
        return Err(FinHeisError::CocycleMismatch);
    }
    Ok(intertwine::are_equivalent(&a.generator_rep(), &b.generator_rep())?)
}

/// `pi_mu(t) = exp(2 pi i mu(t)) pi(t)` for the character with values `mu[i]`
/// on the generators.
pub fn twist(rep: &FiniteProjRep, mu: &[QmodZ]) -> Result<FiniteProjRep, FinHeisError> {
    let g = rep.group();
    if mu.len() != g.rank() {
        return Err(ExactAlgError::RankMismatch { expected: g.rank(), got: mu.len() }.into());
    }
    for (index, (m, &n)) in mu.iter().zip(g.factors()).enumerate() {
        if !m.mul_i64(n as i64).is_zero() {
            return Err(FinHeisError::BadCharacter { index, order: n });
        }
    }
    let mats = rep
        .mats
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let t = g.element_at(i);
            let phase = t.0.iter().zip(mu).fold(QmodZ::zero(), |acc, (&ti, mi)| acc + mi.mul_i64(ti as i64));
            m * cis_turns(phase.to_f64())
        })
        .collect();
    FiniteProjRep::new(rep.form.clone(), mats)
}

/// All irreducibles, pairwise inequivalent, sorted by dimension and then by
/// trace vector.
pub fn build_irreps(form: &LinkingForm) -> Result<Vec<FiniteProjRep>, FinHeisError> {
    build_irreps_with(form, IrrepMethod::Induction)
}

/// Irreducibles for the cocycle `exp(2 pi i l L)`.
pub fn build_irreps_at_level(form: &LinkingForm, level: u64) -> Result<Vec<FiniteProjRep>, FinHeisError> {
    build_irreps(&form.scaled(level))
}

pub fn build_irreps_with(form: &LinkingForm, method: IrrepMethod) -> Result<Vec<FiniteProjRep>, FinHeisError> {
    form.group().enumerate()?;
    let candidates = match method {
        IrrepMethod::Induction => induced_candidates(form)?,
        IrrepMethod::RegularDecomposition => regular_candidates(form)?,
    };
    let mut out: Vec<FiniteProjRep> = Vec::new();
    for c in candidates {
        let mut dup = false;
        for r in &out {
            if traces_match(r, &c) && are_equivalent(r, &c)? {
                dup = true;
                break;
            }
        }
        if !dup {
            out.push(c);
        }
    }
    out.sort_by(rep_order);
    Ok(out)
}

struct Tables {
    group: FinAbGroup,
    elems: Vec<GroupElement>,
}

impl Tables {
    fn new(form: &LinkingForm) -> Result<Self, FinHeisError> {
        let group = form.group().clone();
        let elems = group.enumerate()?;
        Ok(Tables { group, elems })
    }

    fn add(&self, a: usize, b: usize) -> usize {
        self.group.index_of(&self.group.add(&self.elems[a], &self.elems[b]))
    }

    fn scale(&self, k: i64, a: usize) -> usize {
        self.group.index_of(&self.group.scale(k, &self.elems[a]))
    }
}

/// Commutator pairing `L(t, s) - L(s, t)` is trivial.
fn commutes(form: &LinkingForm, t: &GroupElement, s: &GroupElement) -> bool {
    form.pair(t, s) == form.pair(s, t)
}

fn choose2(m: u64) -> i64 {
    (m * m.saturating_sub(1) / 2) as i64
}

/// Characters `c` of a maximal isotropic subgroup `K` with
/// `c(k + k') = c(k) + c(k') - L(k, k')`, each induced up to `T`.
fn induced_candidates(form: &LinkingForm) -> Result<Vec<FiniteProjRep>, FinHeisError> {
    let tb = Tables::new(form)?;
    let n = tb.elems.len();
    let g = &tb.group;
    let gens: Vec<GroupElement> = (0..g.rank()).map(|i| g.generator(i)).collect();
    let radical: Vec<usize> =
        (0..n).filter(|&i| gens.iter().all(|s| commutes(form, &tb.elems[i], s))).collect();

    // Greedy chain {0} = K_0 < K_1 < ... < K_s = K, radical first.
    let mut in_k = vec![false; n];
    in_k[0] = true;
    let mut members = vec![0usize];
    let mut chain: Vec<usize> = Vec::new();
    let order_candidates: Vec<usize> = radical.iter().copied().chain(0..n).collect();
    for t in order_candidates {
        if in_k[t] || !chain.iter().all(|&h| commutes(form, &tb.elems[t], &tb.elems[h])) {
            continue;
        }
        chain.push(t);
        let mut grown = Vec::new();
        let mut mult = t;
        while !in_k[mult] {
            for &k in &members {
                let e = tb.add(k, mult);
                if !in_k[e] {
                    in_k[e] = true;
                    grown.push(e);
                }
            }
            mult = tb.add(mult, t);
        }
        members.extend(grown);
    }

    let mut characters: Vec<Vec<Option<QmodZ>>> = vec![{
        let mut c = vec![None; n];
        c[0] = Some(QmodZ::zero());
        c
    }];
    let mut known = vec![0usize];
    for &gi in &chain {
        let gel = &tb.elems[gi];
        let lgg = form.pair(gel, gel);
        let mut m = 1u64;
        while !known.contains(&tb.scale(m as i64, gi)) {
            m += 1;
        }
        let k0 = tb.scale(m as i64, gi);
        let mut next = Vec::new();
        for c in &characters {
            let rhs = c[k0].clone().unwrap() + lgg.mul_i64(choose2(m));
            let den = rhs.denom().clone() * BigInt::from(m);
            let den: u64 = den.try_into().map_err(|_| FinHeisError::Internal("denominator overflow".into()))?;
            let particular = solve_congruence(
                &IntMatrix::from_rows(&[vec![m as i64]]),
                &[rhs.value().clone()],
                &[den],
            )?;
            for j in 0..m {
                let cg = particular[0].clone() + QmodZ::new(j as i64, m as i64);
                let mut c2 = c.clone();
                for &k in &known {
                    let ck = c[k].clone().unwrap();
                    let lkg = form.pair(&tb.elems[k], gel);
                    for a in 1..m {
                        let e = tb.add(k, tb.scale(a as i64, gi));
                        let v = ck.clone() + cg.mul_i64(a as i64) - lgg.mul_i64(choose2(a)) - lkg.mul_i64(a as i64);
                        c2[e] = Some(v);
                    }
                }
                next.push(c2);
            }
        }
        characters = next;
        let mut grown = Vec::new();
        for &k in &known {
            for a in 1..m {
                grown.push(tb.add(k, tb.scale(a as i64, gi)));
            }
        }
        known.extend(grown);
    }
    if known.len() != members.len() {
        return Err(FinHeisError::Internal("chain does not exhaust the isotropic subgroup".into()));
    }

    // Coset representatives of T/K and the decomposition t = s_l + k.
    let mut coset_of = vec![usize::MAX; n];
    let mut reps: Vec<usize> = Vec::new();
    let mut split = vec![(0usize, 0usize); n];
    for t in 0..n {
        if coset_of[t] != usize::MAX {
            continue;
        }
        let l = reps.len();
        reps.push(t);
        for &k in &known {
            let e = tb.add(t, k);
            coset_of[e] = l;
            split[e] = (l, k);
        }
    }
    let d = reps.len();
    if d * known.len() != n {
        return Err(FinHeisError::Internal("cosets do not tile the group".into()));
    }

    let mut out = Vec::with_capacity(characters.len());
    for c in characters {
        let c: Vec<Option<QmodZ>> = c;
        for &x in &known {
            for &y in &known {
                let lhs = c[tb.add(x, y)].clone().unwrap();
                let rhs = c[x].clone().unwrap() + c[y].clone().unwrap() - form.pair(&tb.elems[x], &tb.elems[y]);
                if lhs != rhs {
                    return Err(FinHeisError::Internal("character fails the twisted multiplicativity".into()));
                }
            }
        }
        let mats = (0..n)
            .map(|t| {
                let mut m = CMatrix::zeros(d, d);
                for (j, &sj) in reps.iter().enumerate() {
                    let (l, k) = split[tb.add(t, sj)];
                    let phase = form.pair(&tb.elems[t], &tb.elems[sj]) - form.pair(&tb.elems[reps[l]], &tb.elems[k])
                        + c[k].clone().unwrap();
                    m[(l, j)] = cis_turns(phase.to_f64());
                }
                m
            })
            .collect();
        out.push(FiniteProjRep::new(form.clone(), mats)?);
    }
    Ok(out)
}

/// Irreducible summands of the twisted regular representation, cut out by
/// the eigenspaces of a random Hermitian element of its commutant.
fn regular_candidates(form: &LinkingForm) -> Result<Vec<FiniteProjRep>, FinHeisError> {
    let tb = Tables::new(form)?;
    let n = tb.elems.len();
    let phase = |a: usize, b: usize| cis_turns(form.pair(&tb.elems[a], &tb.elems[b]).to_f64());
    let left: Vec<CMatrix> = (0..n)
        .map(|t| {
            let mut m = CMatrix::zeros(n, n);
            for s in 0..n {
                m[(tb.add(t, s), s)] = phase(t, s);
            }
            m
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut a = CMatrix::zeros(n, n);
    for u in 0..n {
        let mut r = CMatrix::zeros(n, n);
        for s in 0..n {
            r[(tb.add(s, u), s)] = phase(s, u);
        }
        let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        a += &r * z + r.adjoint() * z.conj();
    }
    let eig = SymmetricEigen::new(a);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &idx {
        match groups.last_mut() {
            Some(gr) if (eig.eigenvalues[i] - eig.eigenvalues[*gr.last().unwrap()]).abs() < 1e-7 => gr.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let mut out = Vec::new();
    for gr in groups {
        let q = CMatrix::from_fn(n, gr.len(), |r, c| eig.eigenvectors[(r, gr[c])]);
        let mats = left.iter().map(|l| q.adjoint() * l * &q).collect();
        out.push(FiniteProjRep::new(form.clone(), mats)?);
    }
    Ok(out)
}
