//! Windowed realization of the induced representations `H_lambda` and
//! `H_{lambda, V} = H_lambda (x) V`.
//!
//! A section is a finitely supported map from the free lattice `Z^b` to Fock
//! content. Slot `xi` carries the identity-component representation with
//! parameter `lambda + 2 P xi`. Each slot stores an exact `Q/Z` phase
//! separately from its content so that every rational phase identity can be
//! checked exactly; the content is a vector of Fock states, one per basis
//! vector of `V`.
//!
//! For `f = (eta, nu, c)` with no torsion part,
//!
//! `(rho(f) Phi)(xi) = exp(2 pi i phi_f(xi)) rho(nu) Phi(xi - c)`,
//! `phi_f(xi) = S(c, xi) - eta.P c - S(c, c) + (lambda + 2 P xi).eta`,
//!
//! where `S(c, c') = sum c_i c'_j sigma_ij` is the free part of `S_M`.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::delignedata::{DataError, GElement, ManifoldData, RepLabel};
use crate::exactalg::{ExactAlgError, GroupElement, QmodZ};
use crate::finheis::{self, FinHeisError, FiniteProjRep};
use crate::fock::{self, CoherentSum, FockError, FockSpace, FockVec, HeisParam};
use crate::intertwine::{self, IntertwineError};
use crate::linalg::{cis_turns, direct_sum, frobenius, random_unitary, CMatrix, C64};
use crate::spectral::{ModeVec, SpectralModel};

#[derive(Debug, Error)]
pub enum InducedError {
    #[error("index {index:?} leaves the window of radius {radius}")]
    Overflow { index: Vec<i64>, radius: i64 },
    #[error("element has a torsion part; use the full action")]
    TorsionPart,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("extraction failed: {0}")]
    Extraction(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    FinHeis(#[from] FinHeisError),
    #[error(transparent)]
    Intertwine(#[from] IntertwineError),
    #[error(transparent)]
    Algebra(#[from] ExactAlgError),
}

/// `{-radius..radius}^b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub b: usize,
    pub radius: i64,
}

impl Window {
    pub fn new(b: usize, radius: i64) -> Result<Self, InducedError> {
        if radius < 1 {
            return Err(InducedError::Precondition(format!("window radius must be >= 1, got {radius}")));
        }
        Ok(Window { b, radius })
    }

    pub fn contains(&self, xi: &[i64]) -> bool {
        xi.len() == self.b && xi.iter().all(|x| x.abs() <= self.radius)
    }

    /// Points with every coordinate at most `radius - margin` in size.
    pub fn points_within(&self, margin: i64) -> Vec<Vec<i64>> {
        let r = self.radius - margin;
        if r < 0 {
            return Vec::new();
        }
        let mut out = vec![Vec::new()];
        for _ in 0..self.b {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (-r..=r).map(move |x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        out
    }

    pub fn points(&self) -> Vec<Vec<i64>> {
        self.points_within(0)
    }
}

/// Fock content usable in a slot.
pub trait FockState: Clone + std::fmt::Debug {
    fn act_param(&self, space: &FockSpace, p: &HeisParam) -> Result<Self, InducedError>;
    fn scaled(&self, c: C64) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn distance(&self, space: &FockSpace, o: &Self) -> f64;
    fn norm(&self, space: &FockSpace) -> f64;
}

impl FockState for CoherentSum {
    fn act_param(&self, space: &FockSpace, p: &HeisParam) -> Result<Self, InducedError> {
        Ok(self.act(space.kappa(), p))
    }
    fn scaled(&self, c: C64) -> Self {
        self.scale(c)
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn distance(&self, space: &FockSpace, o: &Self) -> f64 {
        CoherentSum::distance(self, space.kappa(), o)
    }
    fn norm(&self, space: &FockSpace) -> f64 {
        CoherentSum::norm(self, space.kappa())
    }
}

impl FockState for FockVec {
    /// Truncated action; the part pushed past the truncation degree is dropped.
    fn act_param(&self, space: &FockSpace, p: &HeisParam) -> Result<Self, InducedError> {
        Ok(space.act(p, self)?.result)
    }
    fn scaled(&self, c: C64) -> Self {
        self.scale(c)
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn distance(&self, space: &FockSpace, o: &Self) -> f64 {
        space.norm(&self.sub(o)).unwrap_or(f64::INFINITY)
    }
    fn norm(&self, space: &FockSpace) -> f64 {
        space.norm(self).unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Debug)]
pub struct Slot<C> {
    pub phase: QmodZ,
    pub comps: Vec<C>,
}

/// Finitely supported section of `H_lambda (x) V`; `dim_v = 1` is `H_lambda`.
#[derive(Clone, Debug)]
pub struct Section<C> {
    pub lambda: Vec<i64>,
    pub window: Window,
    pub dim_v: usize,
    pub slots: BTreeMap<Vec<i64>, Slot<C>>,
}

impl<C: FockState> Section<C> {
    pub fn new(lambda: Vec<i64>, window: Window, dim_v: usize) -> Self {
        Section { lambda, window, dim_v, slots: BTreeMap::new() }
    }

    pub fn insert(&mut self, xi: Vec<i64>, comps: Vec<C>) -> Result<(), InducedError> {
        if !self.window.contains(&xi) {
            return Err(InducedError::Overflow { index: xi, radius: self.window.radius });
        }
        if comps.len() != self.dim_v {
            return Err(InducedError::Dimension(format!("{} components, V has dimension {}", comps.len(), self.dim_v)));
        }
        self.slots.insert(xi, Slot { phase: QmodZ::zero(), comps });
        Ok(())
    }

    pub fn norm(&self, space: &FockSpace) -> f64 {
        self.slots.values().flat_map(|s| &s.comps).map(|c| c.norm(space).powi(2)).sum::<f64>().sqrt()
    }
}

/// Outcome of comparing two sections slot by slot.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionDiff {
    pub support_match: bool,
    pub phases_match: bool,
    /// `|a - b| / |b|` on the Fock content, phases excluded.
    pub fock_deviation: f64,
}

impl SectionDiff {
    pub fn passes(&self, tol: f64) -> bool {
        self.support_match && self.phases_match && self.fock_deviation <= tol
    }
}

pub fn compare<C: FockState>(space: &FockSpace, a: &Section<C>, b: &Section<C>) -> SectionDiff {
    let support_match = a.slots.keys().eq(b.slots.keys());
    let mut phases_match = support_match;
    let mut diff_sq = 0.0;
    for (xi, sa) in &a.slots {
        match b.slots.get(xi) {
            Some(sb) => {
                phases_match &= sa.phase == sb.phase;
                diff_sq += sa.comps.iter().zip(&sb.comps).map(|(x, y)| x.distance(space, y).powi(2)).sum::<f64>();
            }
            None => diff_sq += sa.comps.iter().map(|x| x.norm(space).powi(2)).sum::<f64>(),
        }
    }
    let scale = b.norm(space).max(f64::MIN_POSITIVE);
    SectionDiff { support_match, phases_match, fock_deviation: diff_sq.sqrt() / scale }
}

/// Fold every slot phase into the content, leaving exact phases zero.
pub fn absorb_phases<C: FockState>(s: &Section<C>) -> Section<C> {
    let mut out = s.clone();
    for slot in out.slots.values_mut() {
        let z = cis_turns(slot.phase.to_f64());
        slot.comps = slot.comps.iter().map(|c| c.scaled(z)).collect();
        slot.phase = QmodZ::zero();
    }
    out
}

fn apply_matrix<C: FockState>(m: &CMatrix, comps: &[C]) -> Vec<C> {
    (0..m.nrows())
        .map(|i| {
            let mut acc: Option<C> = None;
            for (j, c) in comps.iter().enumerate() {
                let z = m[(i, j)];
                if z.norm() == 0.0 {
                    continue;
                }
                let term = c.scaled(z);
                acc = Some(match acc {
                    Some(a) => a.plus(&term),
                    None => term,
                });
            }
            acc.unwrap_or_else(|| comps[0].scaled(C64::new(0.0, 0.0)))
        })
        .collect()
}

/// Manifold data, spectral model and Fock space bundled for the action.
#[derive(Clone, Debug)]
pub struct Induced {
    pub data: ManifoldData,
    pub model: SpectralModel,
    pub space: FockSpace,
}

impl Induced {
    pub fn new(data: ManifoldData, model: SpectralModel, degree: usize, kappa: f64) -> Result<Self, InducedError> {
        let data = data.checked()?;
        let space = FockSpace::for_model(&model, degree, kappa)?;
        Ok(Induced { data, model, space })
    }

    pub fn n_modes(&self) -> usize {
        self.space.n_modes()
    }

    pub fn param(&self, nu: &ModeVec) -> Result<HeisParam, InducedError> {
        Ok(fock::polarize(&self.model, nu, 1, self.space.kappa())?)
    }

    /// `phi_f(xi)` for the element `(eta, ., c)`.
    pub fn slot_phase(&self, lambda: &[i64], eta: &[QmodZ], c: &[i64], xi: &[i64]) -> QmodZ {
        let m = &self.data;
        let pxi = m.s_hom(xi);
        let shifted: Vec<i64> = lambda.iter().zip(&pxi).map(|(l, p)| l + 2 * p).collect();
        let torus = eta.iter().zip(&shifted).fold(QmodZ::zero(), |acc, (e, &l)| acc + e.mul_i64(l));
        m.sigma_pair(c, xi) - m.eta_pair(eta, c) - m.sigma_pair(c, c) + torus
    }

    fn check_section<C: FockState>(&self, s: &Section<C>) -> Result<(), InducedError> {
        if s.lambda.len() != self.data.b || s.window.b != self.data.b {
            return Err(InducedError::Dimension(format!(
                "section has lambda of length {} on a window of rank {}, data has b = {}",
                s.lambda.len(),
                s.window.b,
                self.data.b
            )));
        }
        Ok(())
    }

    /// Action of an element without torsion part.
    pub fn act_induced<C: FockState>(&self, f: &GElement, phi: &Section<C>) -> Result<Section<C>, InducedError> {
        self.check_section(phi)?;
        if f.c_tor.0.iter().any(|&t| t != 0) {
            return Err(InducedError::TorsionPart);
        }
        let p = if f.nu.is_zero() { None } else { Some(self.param(&f.nu)?) };
        let mut out = Section::new(phi.lambda.clone(), phi.window.clone(), phi.dim_v);
        for (zeta, slot) in &phi.slots {
            let xi: Vec<i64> = zeta.iter().zip(&f.c_free).map(|(a, b)| a + b).collect();
            if !phi.window.contains(&xi) {
                return Err(InducedError::Overflow { index: xi, radius: phi.window.radius });
            }
            let phase = &slot.phase + &self.slot_phase(&phi.lambda, &f.eta, &f.c_free, &xi);
            let comps = match &p {
                Some(p) => slot.comps.iter().map(|c| c.act_param(&self.space, p)).collect::<Result<_, _>>()?,
                None => slot.comps.clone(),
            };
            out.slots.insert(xi, Slot { phase, comps });
        }
        Ok(out)
    }

    /// `rho(f)(Phi (x) v) = rho(f - sigma(t)) Phi (x) pi(t) v`.
    pub fn act_full<C: FockState>(
        &self,
        pi: &FiniteProjRep,
        f: &GElement,
        psi: &Section<C>,
    ) -> Result<Section<C>, InducedError> {
        if pi.dim() != psi.dim_v {
            return Err(InducedError::Dimension(format!("pi has dimension {}, section {}", pi.dim(), psi.dim_v)));
        }
        let t = f.c_tor.clone();
        let free = GElement { c_tor: self.data.linking.group().identity(), ..f.clone() };
        let mut out = self.act_induced(&free, psi)?;
        if !self.data.linking.group().is_identity(&t) {
            let m = pi.matrix(&t);
            for slot in out.slots.values_mut() {
                slot.comps = apply_matrix(m, &slot.comps);
            }
        }
        Ok(out)
    }

    /// Compares `rho(f) rho(g) Psi` with `exp(2 pi i S_M(f, g)) rho(f + g) Psi`.
    /// The torsion term `L(t, t')` of the cocycle is carried by `pi` and so
    /// enters the Fock comparison rather than the exact phases.
    pub fn projective_relation_check<C: FockState>(
        &self,
        pi: &FiniteProjRep,
        f: &GElement,
        g: &GElement,
        psi: &Section<C>,
    ) -> Result<SectionDiff, InducedError> {
        let lhs = self.act_full(pi, f, &self.act_full(pi, g, psi)?)?;
        let mut rhs = self.act_full(pi, &f.add(&self.data, g), psi)?;
        let s = self.data.cocycle(&self.model, f, g)?;
        let torsion = self.data.linking.pair(&f.c_tor, &g.c_tor);
        let exact = &s.exact - &torsion;
        let z = cis_turns(s.float + torsion.to_f64());
        for slot in rhs.slots.values_mut() {
            slot.phase += &exact;
            slot.comps = slot.comps.iter().map(|c| c.scaled(z)).collect();
        }
        Ok(compare(&self.space, &lhs, &rhs))
    }

    /// Restriction to the identity component, evaluated independently slot by
    /// slot through `rho_{lambda + 2 P xi}`; returns the largest deviation.
    pub fn branching_check(&self, alpha: &GElement, phi: &Section<CoherentSum>) -> Result<f64, InducedError> {
        if !alpha.is_identity_component() {
            return Err(InducedError::Precondition("element is not in the identity component".into()));
        }
        let acted = absorb_phases(&self.act_induced(alpha, phi)?);
        let kappa = self.space.kappa();
        let mut worst: f64 = 0.0;
        for (xi, slot) in &phi.slots {
            let pxi = self.data.s_hom(xi);
            let lam: Vec<i64> = phi.lambda.iter().zip(&pxi).map(|(l, p)| l + 2 * p).collect();
            let out = acted.slots.get(xi).ok_or_else(|| InducedError::Precondition("slot moved".into()))?;
            for (c, o) in slot.comps.iter().zip(&out.comps) {
                let start = c.scale(cis_turns(slot.phase.to_f64()));
                let direct = fock::rho_lambda(&self.model, &lam, &alpha.eta, &alpha.nu, kappa, &start)?;
                let scale = direct.norm(kappa).max(f64::MIN_POSITIVE);
                worst = worst.max(o.distance(kappa, &direct) / scale);
            }
        }
        Ok(worst)
    }

    /// The intertwiner `H_{lambda, V} -> H_{lambda + 2 P xi0, V}`,
    /// `(T Phi)(xi) = exp(-2 pi i S(xi0, xi)) Phi(xi + xi0)`. Needs
    /// `2 sigma_free = 0`.
    pub fn equivalence_shift(&self, lambda: &[i64], xi0: &[i64]) -> Result<EquivalenceShift, InducedError> {
        let m = &self.data;
        if xi0.len() != m.b || lambda.len() != m.b {
            return Err(InducedError::Dimension("xi0 and lambda must have b entries".into()));
        }
        if m.sigma_free.iter().flatten().any(|q| !q.mul_i64(2).is_zero()) {
            return Err(InducedError::Precondition("2 sigma_free must vanish; normalize sigma first".into()));
        }
        let p = m.s_hom(xi0);
        let target = lambda.iter().zip(&p).map(|(l, q)| l + 2 * q).collect();
        Ok(EquivalenceShift { xi0: xi0.to_vec(), source_lambda: lambda.to_vec(), target_lambda: target })
    }

    /// Deviation of `T rho(f)` from `rho'(f) T` on `psi`.
    pub fn shift_intertwining_check<C: FockState>(
        &self,
        shift: &EquivalenceShift,
        pi: &FiniteProjRep,
        f: &GElement,
        psi: &Section<C>,
    ) -> Result<SectionDiff, InducedError> {
        let lhs = shift.apply(&self.data, &self.act_full(pi, f, psi)?)?;
        let rhs = self.act_full(pi, f, &shift.apply(&self.data, psi)?)?;
        Ok(compare(&self.space, &lhs, &rhs))
    }

    /// Change of decomposition by `theta` (given on the free basis), with the
    /// free part of the splitting kept.
    pub fn decomposition_map(
        &self,
        theta: &[GroupElement],
        lambda: &[i64],
        pi: &FiniteProjRep,
    ) -> Result<DecompositionChange, InducedError> {
        let m = &self.data;
        let tr = m.transport_decomposition(theta, lambda, pi)?;
        let b = m.b;
        let mut new_data = m.clone();
        for i in 0..b {
            for j in 0..b {
                new_data.sigma_free[i][j] = &m.sigma_free[i][j] - &m.linking.pair(&theta[i], &theta[j]);
            }
        }
        let new_data = new_data.checked()?;
        let target = Induced { data: new_data, model: self.model.clone(), space: self.space.clone() };
        Ok(DecompositionChange {
            theta: theta.to_vec(),
            tau: tr.tau,
            mu: tr.mu,
            old_rep: pi.clone(),
            new_rep: tr.rep,
            target,
        })
    }

    /// A random section supported on `points`, with coherent content of norm
    /// parameter at most `radius`.
    pub fn random_section<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        lambda: &[i64],
        window: &Window,
        dim_v: usize,
        points: &[Vec<i64>],
        radius: f64,
    ) -> Result<Section<CoherentSum>, InducedError> {
        let n = self.n_modes();
        let mut s = Section::new(lambda.to_vec(), window.clone(), dim_v);
        for p in points {
            let comps = (0..dim_v)
                .map(|_| {
                    let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    CoherentSum::single(c, fock::random_point(rng, n, radius))
                })
                .collect();
            s.insert(p.clone(), comps)?;
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceShift {
    pub xi0: Vec<i64>,
    pub source_lambda: Vec<i64>,
    pub target_lambda: Vec<i64>,
}

impl EquivalenceShift {
    pub fn apply<C: FockState>(&self, m: &ManifoldData, s: &Section<C>) -> Result<Section<C>, InducedError> {
        if s.lambda != self.source_lambda {
            return Err(InducedError::Precondition(format!(
                "section has lambda {:?}, shift expects {:?}",
                s.lambda, self.source_lambda
            )));
        }
        let mut out = Section::new(self.target_lambda.clone(), s.window.clone(), s.dim_v);
        for (zeta, slot) in &s.slots {
            let xi: Vec<i64> = zeta.iter().zip(&self.xi0).map(|(a, b)| a - b).collect();
            if !s.window.contains(&xi) {
                return Err(InducedError::Overflow { index: xi, radius: s.window.radius });
            }
            let phase = &slot.phase - &m.sigma_pair(&self.xi0, &xi);
            out.slots.insert(xi, Slot { phase, comps: slot.comps.clone() });
        }
        Ok(out)
    }
}

/// `F: H^omega_{lambda, V} -> H^{omega + theta}_{lambda, V_mu}` and the data
/// of the new decomposition.
#[derive(Clone, Debug)]
pub struct DecompositionChange {
    pub theta: Vec<GroupElement>,
    pub tau: Vec<Vec<QmodZ>>,
    pub mu: Vec<QmodZ>,
    pub old_rep: FiniteProjRep,
    pub new_rep: FiniteProjRep,
    /// The same group in the new coordinates.
    pub target: Induced,
}

impl DecompositionChange {
    fn theta_of(&self, m: &ManifoldData, xi: &[i64]) -> GroupElement {
        let g = m.linking.group();
        xi.iter().zip(&self.theta).fold(g.identity(), |acc, (&x, th)| g.add(&acc, &g.scale(x, th)))
    }

    fn tau_of(&self, t: &GroupElement) -> Vec<QmodZ> {
        let b = self.theta.len();
        (0..b)
            .map(|j| t.0.iter().zip(&self.tau).fold(QmodZ::zero(), |acc, (&ti, row)| acc + row[j].mul_i64(ti as i64)))
            .collect()
    }

    fn mu_of(&self, t: &GroupElement) -> QmodZ {
        t.0.iter().zip(&self.mu).fold(QmodZ::zero(), |acc, (&ti, m)| acc + m.mul_i64(ti as i64))
    }

    /// Coordinates of `f` in the new decomposition:
    /// `(eta - tau(t), nu, c, t + theta(c))`.
    pub fn convert(&self, m: &ManifoldData, f: &GElement) -> GElement {
        let g = m.linking.group();
        let tau_t = self.tau_of(&f.c_tor);
        GElement {
            eta: f.eta.iter().zip(&tau_t).map(|(a, b)| a - b).collect(),
            nu: f.nu.clone(),
            c_free: f.c_free.clone(),
            c_tor: g.add(&f.c_tor, &self.theta_of(m, &f.c_free)),
        }
    }

    /// `(F Phi)(xi) = exp(2 pi i mu(theta(xi))) (id (x) pi(theta(xi))) Phi(xi)`.
    pub fn apply<C: FockState>(&self, m: &ManifoldData, s: &Section<C>) -> Section<C> {
        let mut out = s.clone();
        for (xi, slot) in out.slots.iter_mut() {
            let t = self.theta_of(m, xi);
            slot.phase += self.mu_of(&t);
            slot.comps = apply_matrix(self.old_rep.matrix(&t), &slot.comps);
        }
        out
    }

    /// Deviation of `F rho(f)` from `rho'(f') F` on `psi`. The linking-form
    /// phases from products of `pi` matrices land in the content, so both
    /// sides are compared with phases absorbed.
    pub fn intertwining_check<C: FockState>(
        &self,
        source: &Induced,
        f: &GElement,
        psi: &Section<C>,
    ) -> Result<SectionDiff, InducedError> {
        let m = &source.data;
        let lhs = self.apply(m, &source.act_full(&self.old_rep, f, psi)?);
        let f2 = self.convert(m, f);
        let rhs = self.target.act_full(&self.new_rep, &f2, &self.apply(m, psi))?;
        Ok(compare(&source.space, &absorb_phases(&lhs), &absorb_phases(&rhs)))
    }
}

/// Unitary matrices `u_xi(e)` for in-window pairs.
#[derive(Clone, Debug, Default)]
pub struct UFamily {
    pub dim: usize,
    pub entries: HashMap<(Vec<i64>, Vec<i64>), CMatrix>,
}

impl UFamily {
    pub fn get(&self, xi: &[i64], e: &[i64]) -> Option<&CMatrix> {
        self.entries.get(&(xi.to_vec(), e.to_vec()))
    }
}

#[derive(Clone, Debug)]
pub struct CocycleReport {
    pub checked: usize,
    pub max_residual: f64,
    pub valid: bool,
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Checks `u_xi(e + e') = u_{xi + e'}(e) u_xi(e')` on every triple for
/// which all three matrices are present.
pub fn verify_u_cocycle(u: &UFamily, tol: f64) -> CocycleReport {
    let mut by_xi: HashMap<&Vec<i64>, Vec<&Vec<i64>>> = HashMap::new();
    for (xi, e) in u.entries.keys() {
        by_xi.entry(xi).or_default().push(e);
    }
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for (xi, steps) in &by_xi {
        for e1 in steps {
            let u1 = &u.entries[&((*xi).clone(), (*e1).clone())];
            let mid = add(xi, e1);
            for e in steps {
                let (Some(u2), Some(total)) = (u.get(&mid, e), u.get(xi, &add(e, e1))) else { continue };
                worst = worst.max(frobenius(&(total - u2 * u1)));
                checked += 1;
            }
        }
    }
    CocycleReport { checked, max_residual: worst, valid: worst <= tol }
}

#[derive(Clone, Debug)]
pub struct TFamily {
    pub t: HashMap<Vec<i64>, CMatrix>,
    pub report: CocycleReport,
}

/// `t_xi = u_0(xi)`, checked against `t_{e + xi} = u_xi(e) t_xi`.
pub fn build_t(u: &UFamily, tol: f64) -> TFamily {
    let origin: Vec<i64> = u.entries.keys().next().map(|(x, _)| vec![0; x.len()]).unwrap_or_default();
    let mut t: HashMap<Vec<i64>, CMatrix> = HashMap::new();
    for ((xi, e), m) in &u.entries {
        if *xi == origin {
            t.insert(e.clone(), m.clone());
        }
    }
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for ((xi, e), m) in &u.entries {
        let (Some(tx), Some(te)) = (t.get(xi), t.get(&add(xi, e))) else { continue };
        worst = worst.max(frobenius(&(te - m * tx)));
        checked += 1;
    }
    TFamily { t, report: CocycleReport { checked, max_residual: worst, valid: worst <= tol } }
}

/// A representation given only through its action on opaque slots, each
/// holding `H_{lambda'} (x) C^m` for an unknown `lambda'`.
pub trait SlotRep {
    fn slot_ids(&self) -> Vec<usize>;
    fn multiplicity(&self, id: usize) -> usize;
    /// Acts on a vector supported in slot `id`; returns the target slot, its
    /// exact phase and the content.
    fn act(
        &self,
        f: &GElement,
        id: usize,
        comps: &[CoherentSum],
    ) -> Result<(usize, QmodZ, Vec<CoherentSum>), InducedError>;
}

/// One planted summand `H_{lambda, V}` with `V` a sum of canonical irreps.
#[derive(Clone, Debug)]
pub struct PlantedSummand {
    pub lambda: Vec<i64>,
    pub irreps: Vec<usize>,
}

/// `W (oplus_i H_{lambda_i, V_i}) W^{-1}` for random slotwise unitaries `W`,
/// with slots exposed in shuffled order.
pub struct PlantedRep<'a> {
    induced: &'a Induced,
    window: Window,
    summands: Vec<PlantedSummand>,
    reps: Vec<FiniteProjRep>,
    // opaque id -> (summand, xi)
    slots: Vec<(usize, Vec<i64>)>,
    lookup: HashMap<(usize, Vec<i64>), usize>,
    w: Vec<CMatrix>,
}

fn rep_sum(irreps: &[FiniteProjRep], idx: &[usize]) -> Result<FiniteProjRep, InducedError> {
    let first = &irreps[idx[0]];
    let n = first.matrices().len();
    let mats = (0..n)
        .map(|k| {
            let blocks: Vec<&CMatrix> = idx.iter().map(|&i| &irreps[i].matrices()[k]).collect();
            direct_sum(&blocks)
        })
        .collect();
    Ok(FiniteProjRep::new(first.form().clone(), mats)?)
}

impl<'a> PlantedRep<'a> {
    pub fn new<R: Rng + ?Sized>(
        rng: &mut R,
        induced: &'a Induced,
        window: Window,
        summands: Vec<PlantedSummand>,
    ) -> Result<Self, InducedError> {
        let irreps = finheis::build_irreps(&induced.data.linking)?;
        let mut reps = Vec::new();
        for s in &summands {
            if s.irreps.is_empty() || s.irreps.iter().any(|&i| i >= irreps.len()) {
                return Err(InducedError::Precondition("summand needs valid irrep indices".into()));
            }
            reps.push(rep_sum(&irreps, &s.irreps)?);
        }
        let mut slots = Vec::new();
        for (i, _) in summands.iter().enumerate() {
            for p in window.points() {
                slots.push((i, p));
            }
        }
        slots.shuffle(rng);
        let lookup = slots.iter().enumerate().map(|(id, k)| (k.clone(), id)).collect();
        let w = slots.iter().map(|(i, _)| random_unitary(rng, reps[*i].dim())).collect();
        Ok(PlantedRep { induced, window, summands, reps, slots, lookup, w })
    }

    pub fn summands(&self) -> &[PlantedSummand] {
        &self.summands
    }

    /// Hidden position of a slot, for tests.
    pub fn hidden_position(&self, id: usize) -> (usize, &[i64]) {
        (self.slots[id].0, &self.slots[id].1)
    }

    pub fn hidden_unitary(&self, id: usize) -> &CMatrix {
        &self.w[id]
    }
}

impl SlotRep for PlantedRep<'_> {
    fn slot_ids(&self) -> Vec<usize> {
        (0..self.slots.len()).collect()
    }

    fn multiplicity(&self, id: usize) -> usize {
        self.reps[self.slots[id].0].dim()
    }

    fn act(
        &self,
        f: &GElement,
        id: usize,
        comps: &[CoherentSum],
    ) -> Result<(usize, QmodZ, Vec<CoherentSum>), InducedError> {
        let (i, xi) = &self.slots[id];
        let rep = &self.reps[*i];
        let mut s = Section::new(self.summands[*i].lambda.clone(), self.window.clone(), rep.dim());
        s.insert(xi.clone(), apply_matrix(&self.w[id].adjoint(), comps))?;
        let out = self.induced.act_full(rep, f, &s)?;
        let (target, slot) = out.slots.into_iter().next().expect("one slot in, one slot out");
        let tid = self.lookup[&(*i, target)];
        Ok((tid, slot.phase, apply_matrix(&self.w[tid], &slot.comps)))
    }
}

/// One recovered summand.
#[derive(Clone, Debug)]
pub struct ExtractedClass {
    pub base_slot: usize,
    pub lambda: Vec<i64>,
    pub pi: FiniteProjRep,
    pub labels: Vec<RepLabel>,
    pub u_report: CocycleReport,
    /// `t_xi` indexed by position relative to the base slot.
    pub t: TFamily,
}

fn read_vacuum_coeff(c: &CoherentSum) -> Result<C64, InducedError> {
    let mut acc = C64::new(0.0, 0.0);
    for (z, label) in &c.terms {
        if label.iter().any(|x| x.norm() > 1e-12) {
            if z.norm() > 1e-12 {
                return Err(InducedError::Extraction("probe left the vacuum line".into()));
            }
            continue;
        }
        acc += z;
    }
    Ok(acc)
}

/// Matrix on the multiplicity space of `f` mapping slot `id`, probed with
/// `vacuum (x) e_k`.
fn probe_matrix(
    rep: &dyn SlotRep,
    n_modes: usize,
    f: &GElement,
    id: usize,
) -> Result<(usize, QmodZ, CMatrix), InducedError> {
    let m = rep.multiplicity(id);
    let mut target = None;
    let mut phase = QmodZ::zero();
    let mut mat = CMatrix::zeros(m, m);
    for k in 0..m {
        let comps: Vec<CoherentSum> = (0..m)
            .map(|j| CoherentSum::single(C64::new(if j == k { 1.0 } else { 0.0 }, 0.0), vec![C64::new(0.0, 0.0); n_modes]))
            .collect();
        let (tid, ph, out) = rep.act(f, id, &comps)?;
        if target.is_some_and(|t| t != tid) {
            return Err(InducedError::Extraction("probe columns landed in different slots".into()));
        }
        target = Some(tid);
        phase = ph;
        for (r, c) in out.iter().enumerate() {
            mat[(r, k)] = read_vacuum_coeff(c)?;
        }
    }
    Ok((target.expect("multiplicity >= 1"), phase, mat))
}

/// Recovers labels from a slot representation: slot parameters from the torus
/// action, classes modulo `2 P Z^b`, the `u`-cocycle from free translations,
/// `t = u_0`, and `pi` from the torsion action on a base slot, decomposed
/// against the canonical irreps.
pub fn extract(induced: &Induced, rep: &dyn SlotRep, tol: f64) -> Result<Vec<ExtractedClass>, InducedError> {
    const PROBE_DEN: i64 = 1 << 20;
    let m = &induced.data;
    let n = induced.n_modes();
    let ids = rep.slot_ids();
    // slot parameters lambda' from exp(2 pi i lambda'(e_j / N))
    let mut lam: HashMap<usize, Vec<i64>> = HashMap::new();
    for &id in &ids {
        let mut l = Vec::with_capacity(m.b);
        for j in 0..m.b {
            let mut f = GElement::identity(m, induced.model.len());
            f.eta[j] = QmodZ::new(1, PROBE_DEN);
            let (tid, ph, _) = probe_matrix(rep, n, &f, id)?;
            if tid != id {
                return Err(InducedError::Extraction("torus element moved a slot".into()));
            }
            let v = ph.numerator_over(PROBE_DEN as u64).ok_or_else(|| {
                InducedError::Extraction(format!("torus phase {ph} is not a multiple of 1/{PROBE_DEN}"))
            })? as i64;
            l.push(if v > PROBE_DEN / 2 { v - PROBE_DEN } else { v });
        }
        lam.insert(id, l);
    }
    let pinv = m.pairing.inverse_unimodular()?;
    let irreps = finheis::build_irreps(&m.linking)?;
    let mut remaining: Vec<usize> = ids.clone();
    let mut out = Vec::new();
    while let Some(&base) = remaining.first() {
        let lb = lam[&base].clone();
        let mut members: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut rest = Vec::new();
        for &id in &remaining {
            if m.lambdas_equivalent(&lam[&id], &lb, 1)? {
                let d: Vec<num_bigint::BigInt> =
                    lam[&id].iter().zip(&lb).map(|(a, b)| num_bigint::BigInt::from((a - b) / 2)).collect();
                let rel: Vec<i64> = pinv.mul_vec(&d).into_iter().map(|x| i64::try_from(x).expect("small")).collect();
                members.insert(rel, id);
            } else {
                rest.push(id);
            }
        }
        remaining = rest;
        // harvest u relative to rho_{lambda_base}(sigma(e))
        let mut u = UFamily { dim: rep.multiplicity(base), entries: HashMap::new() };
        for (xi, &id) in &members {
            for (target, _) in &members {
                let e: Vec<i64> = target.iter().zip(xi).map(|(a, b)| a - b).collect();
                let f = GElement::translation(m, induced.model.len(), &e);
                let (tid, ph, raw) = probe_matrix(rep, n, &f, id)?;
                if tid != members[target] {
                    return Err(InducedError::Extraction("translation reached an unexpected slot".into()));
                }
                let expected = m.sigma_pair(&e, target) - m.sigma_pair(&e, &e);
                u.entries.insert((xi.clone(), e), raw * cis_turns((&ph - &expected).to_f64()));
            }
        }
        let u_report = verify_u_cocycle(&u, tol);
        let t = build_t(&u, tol);
        // pi from the torsion action on the base slot
        let g = m.linking.group();
        let mut mats = Vec::with_capacity(g.order() as usize);
        for k in 0..g.order() as usize {
            let f = GElement::torsion(m, induced.model.len(), g.element_at(k));
            let (tid, ph, mat) = probe_matrix(rep, n, &f, base)?;
            if tid != base {
                return Err(InducedError::Extraction("torsion element moved a slot".into()));
            }
            mats.push(mat * cis_turns(ph.to_f64()));
        }
        let pi = FiniteProjRep::new(m.linking.clone(), mats)?;
        if pi.projective_defect() > tol {
            return Err(InducedError::Extraction(format!("recovered pi has defect {:.3e}", pi.projective_defect())));
        }
        let lambda = m.reduce_lambda(&lb, 1);
        let mut labels = Vec::new();
        let mut total = 0;
        for (j, irrep) in irreps.iter().enumerate() {
            let mult = intertwine::hom_space(&pi.generator_rep(), &irrep.generator_rep())?.dim();
            total += mult * irrep.dim();
            labels.extend((0..mult).map(|_| RepLabel { lambda: lambda.clone(), irrep_index: j }));
        }
        if total != pi.dim() {
            return Err(InducedError::Extraction(format!("irreps account for {total} of {} dimensions", pi.dim())));
        }
        out.push(ExtractedClass { base_slot: base, lambda, pi, labels, u_report, t });
    }
    Ok(out)
}

/// Matches extracted labels against planted ones as multisets under
/// `labels_equivalent`.
pub fn labels_match(m: &ManifoldData, planted: &[PlantedSummand], found: &[ExtractedClass]) -> Result<bool, InducedError> {
    let irreps = finheis::build_irreps(&m.linking)?;
    let mut want: Vec<RepLabel> = planted
        .iter()
        .flat_map(|s| s.irreps.iter().map(|&i| RepLabel { lambda: s.lambda.clone(), irrep_index: i }))
        .collect();
    for class in found {
        for l in &class.labels {
            let mut hit = None;
            for (k, w) in want.iter().enumerate() {
                let eq = m.labels_equivalent_reps(
                    1,
                    &l.lambda,
                    &irreps[l.irrep_index],
                    &w.lambda,
                    &irreps[w.irrep_index],
                )?;
                if eq {
                    hit = Some(k);
                    break;
                }
            }
            match hit {
                Some(k) => {
                    want.swap_remove(k);
                }
                None => return Ok(false),
            }
        }
    }
    Ok(want.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::IntMatrix;
    use crate::linkform::LinkingForm;
    use num_rational::BigRational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> QmodZ {
        QmodZ::new(n, d)
    }

    fn small_model() -> SpectralModel {
        SpectralModel::synthetic(&[BigRational::from_integer(1.into()), BigRational::from_integer(4.into())]).unwrap()
    }

    fn one_slot(ind: &Induced, lambda: &[i64], xi: Vec<i64>, radius: i64) -> Section<CoherentSum> {
        let mut s = Section::new(lambda.to_vec(), Window::new(ind.data.b, radius).unwrap(), 1);
        s.insert(xi, vec![CoherentSum::vacuum(ind.n_modes())]).unwrap();
        s
    }

    #[test]
    fn identity_and_translation() {
        let ind = Induced::new(ManifoldData::circle(), small_model(), 4, 2.0).unwrap();
        let s = one_slot(&ind, &[3], vec![0], 2);
        let id = GElement::identity(&ind.data, ind.model.len());
        assert!(compare(&ind.space, &ind.act_induced(&id, &s).unwrap(), &s).passes(0.0));
        let t = GElement::translation(&ind.data, ind.model.len(), &[2]);
        let out = ind.act_induced(&t, &s).unwrap();
        assert_eq!(out.slots.keys().cloned().collect::<Vec<_>>(), vec![vec![2]]);
        assert!(out.slots[&vec![2]].phase.is_zero());
    }

    #[test]
    fn half_sigma_translation_phase() {
        let mut m = ManifoldData::circle();
        m.sigma_free = vec![vec![q(1, 2)]];
        let ind = Induced::new(m, small_model(), 4, 2.0).unwrap();
        let s = one_slot(&ind, &[0], vec![0], 2);
        let t = GElement::translation(&ind.data, ind.model.len(), &[1]);
        let out = ind.act_induced(&t, &s).unwrap();
        // S(1, 1) - S(1, 1) at the target slot
        assert!(out.slots[&vec![1]].phase.is_zero());
    }

    #[test]
    fn overflow_is_reported() {
        let ind = Induced::new(ManifoldData::circle(), small_model(), 4, 2.0).unwrap();
        let s = one_slot(&ind, &[0], vec![2], 2);
        let t = GElement::translation(&ind.data, ind.model.len(), &[1]);
        match ind.act_induced(&t, &s) {
            Err(InducedError::Overflow { index, .. }) => assert_eq!(index, vec![3]),
            other => panic!("{other:?}"),
        }
    }

    fn rp5_times_circle() -> ManifoldData {
        ManifoldData::torsion_free(1, 1).with_linking(LinkingForm::z2_diagonal())
    }

    #[test]
    fn torsion_acts_through_pi_only() {
        let ind = Induced::new(rp5_times_circle(), small_model(), 4, 2.0).unwrap();
        let irreps = finheis::build_irreps(&ind.data.linking).unwrap();
        let mut s = Section::new(vec![1], Window::new(1, 2).unwrap(), 1);
        s.insert(vec![1], vec![CoherentSum::vacuum(ind.n_modes())]).unwrap();
        let t = GElement::torsion(&ind.data, ind.model.len(), GroupElement(vec![1]));
        let out = ind.act_full(&irreps[1], &t, &s).unwrap();
        let z = out.slots[&vec![1]].comps[0].terms[0].0;
        assert!((z - irreps[1].matrix(&GroupElement(vec![1]))[(0, 0)]).norm() < 1e-15);
    }

    #[test]
    fn nu_free_relation_is_exact() {
        let mut m = ManifoldData::torsion_free(1, 2).with_linking(LinkingForm::hyperbolic(2).unwrap());
        m.sigma_free = vec![vec![q(1, 2), q(1, 3)], vec![q(-1, 3), q(0, 1)]];
        m.pairing = IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]);
        let ind = Induced::new(m, small_model(), 4, 2.0).unwrap();
        let irreps = finheis::build_irreps(&ind.data.linking).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = Window::new(2, 4).unwrap();
        for _ in 0..30 {
            let f = GElement::random(&mut rng, &ind.data, &ind.model, 9, 0.0, 1, true);
            let g = GElement::random(&mut rng, &ind.data, &ind.model, 9, 0.0, 1, true);
            let s = ind.random_section(&mut rng, &[1, -2], &w, irreps[0].dim(), &w.points_within(2), 0.5).unwrap();
            let d = ind.projective_relation_check(&irreps[0], &f, &g, &s).unwrap();
            assert!(d.support_match && d.phases_match);
            assert!(d.fock_deviation < 1e-13, "{}", d.fock_deviation);
        }
    }

    #[test]
    fn relation_with_fock_content() {
        let ind = Induced::new(rp5_times_circle(), SpectralModel::circle(2), 4, 2.0).unwrap();
        let irreps = finheis::build_irreps(&ind.data.linking).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = Window::new(1, 4).unwrap();
        for _ in 0..30 {
            let f = GElement::random(&mut rng, &ind.data, &ind.model, 9, 0.3, 1, true);
            let g = GElement::random(&mut rng, &ind.data, &ind.model, 9, 0.3, 1, true);
            let s = ind.random_section(&mut rng, &[1], &w, 1, &w.points_within(2), 0.5).unwrap();
            let d = ind.projective_relation_check(&irreps[1], &f, &g, &s).unwrap();
            assert!(d.passes(1e-8), "{d:?}");
        }
    }

    #[test]
    fn branching_is_slotwise() {
        let ind = Induced::new(ManifoldData::circle(), SpectralModel::circle(2), 4, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let w = Window::new(1, 3).unwrap();
        let s = ind.random_section(&mut rng, &[1], &w, 1, &w.points(), 0.5).unwrap();
        for _ in 0..20 {
            let mut a = GElement::random(&mut rng, &ind.data, &ind.model, 9, 0.4, 0, false);
            a.c_free = vec![0];
            assert!(ind.branching_check(&a, &s).unwrap() < 1e-10);
        }
        // torus only: slot xi scaled by exp(2 pi i (lambda + 2 xi) eta)
        let mut a = GElement::identity(&ind.data, ind.model.len());
        a.eta = vec![q(1, 7)];
        let out = ind.act_induced(&a, &s).unwrap();
        for (xi, slot) in &out.slots {
            assert_eq!(slot.phase, q(1 + 2 * xi[0], 7));
        }
    }

    #[test]
    fn circle_shift_by_one() {
        let ind = Induced::new(ManifoldData::circle(), SpectralModel::circle(2), 4, 2.0).unwrap();
        let pi = &finheis::build_irreps(&ind.data.linking).unwrap()[0];
        let shift = ind.equivalence_shift(&[0], &[1]).unwrap();
        assert_eq!(shift.target_lambda, vec![2]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = Window::new(1, 4).unwrap();
        for _ in 0..20 {
            let f = GElement::random(&mut rng, &ind.data, &ind.model, 9, 0.3, 1, false);
            let s = ind.random_section(&mut rng, &[0], &w, 1, &w.points_within(2), 0.5).unwrap();
            let d = ind.shift_intertwining_check(&shift, pi, &f, &s).unwrap();
            assert!(d.passes(1e-8), "{d:?}");
        }
        let zero = ind.equivalence_shift(&[0], &[0]).unwrap();
        let s = one_slot(&ind, &[0], vec![1], 4);
        assert!(compare(&ind.space, &zero.apply(&ind.data, &s).unwrap(), &s).passes(0.0));
        let back = ind.equivalence_shift(&[2], &[-1]).unwrap();
        let round = back.apply(&ind.data, &shift.apply(&ind.data, &s).unwrap()).unwrap();
        assert!(compare(&ind.space, &round, &s).passes(0.0));
    }

    #[test]
    fn shift_rejects_unnormalized_sigma() {
        let mut m = ManifoldData::torsion_free(1, 2);
        m.sigma_free = vec![vec![q(0, 1), q(1, 3)], vec![q(-1, 3), q(0, 1)]];
        let ind = Induced::new(m, small_model(), 4, 2.0).unwrap();
        assert!(matches!(ind.equivalence_shift(&[0, 0], &[1, 0]), Err(InducedError::Precondition(_))));
    }

    #[test]
    fn decomposition_change_intertwines() {
        let lf = LinkingForm::orthogonal_sum(&[LinkingForm::z2_diagonal(), LinkingForm::hyperbolic(3).unwrap()]).unwrap();
        let mut m = ManifoldData::torsion_free(1, 2).with_linking(lf);
        m.sigma_free = vec![vec![q(1, 2), q(0, 1)], vec![q(0, 1), q(0, 1)]];
        let ind = Induced::new(m, SpectralModel::circle(1), 4, 2.0).unwrap();
        let g = ind.data.linking.group().clone();
        let irreps = finheis::build_irreps(&ind.data.linking).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let w = Window::new(2, 4).unwrap();
        for trial in 0..20 {
            let theta: Vec<GroupElement> =
                (0..2).map(|_| GroupElement(g.factors().iter().map(|&n| rng.gen_range(0..n)).collect())).collect();
            let lambda = [rng.gen_range(-3..4), rng.gen_range(-3..4)];
            let pi = &irreps[trial % irreps.len()];
            let ch = ind.decomposition_map(&theta, &lambda, pi).unwrap();
            let f = GElement::random(&mut rng, &ind.data, &ind.model, 9, 0.3, 1, true);
            let s = ind.random_section(&mut rng, &lambda, &w, pi.dim(), &w.points_within(2), 0.5).unwrap();
            let d = ch.intertwining_check(&ind, &f, &s).unwrap();
            assert!(d.passes(1e-8), "{d:?}");
        }
    }

    #[test]
    fn trivial_u_families() {
        let mut u = UFamily { dim: 2, entries: HashMap::new() };
        let pts = Window::new(1, 2).unwrap().points();
        let chi = |e: i64| cis_turns(e as f64 / 5.0);
        for xi in &pts {
            for t in &pts {
                let e = t[0] - xi[0];
                u.entries.insert((xi.clone(), vec![e]), CMatrix::identity(2, 2) * chi(e));
            }
        }
        assert!(verify_u_cocycle(&u, 1e-12).valid);
        let t = build_t(&u, 1e-12);
        assert!(t.report.valid);
        assert!((t.t[&vec![2]][(0, 0)] - chi(2)).norm() < 1e-14);
    }

    #[test]
    fn round_trip_recovers_planted_labels() {
        let mut m = ManifoldData::torsion_free(1, 1).with_linking(LinkingForm::hyperbolic(2).unwrap());
        m.sigma_free = vec![vec![q(1, 2)]];
        let ind = Induced::new(m, SpectralModel::circle(1), 2, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let planted = vec![
            PlantedSummand { lambda: vec![3], irreps: vec![0] },
            PlantedSummand { lambda: vec![-2], irreps: vec![0, 0] },
        ];
        let rep = PlantedRep::new(&mut rng, &ind, Window::new(1, 2).unwrap(), planted.clone()).unwrap();
        let found = extract(&ind, &rep, 1e-9).unwrap();
        assert_eq!(found.len(), 2);
        for c in &found {
            assert!(c.u_report.valid && c.t.report.valid && c.u_report.checked > 0);
        }
        assert!(labels_match(&ind.data, &planted, &found).unwrap());
        // t_xi = W_xi W_base^{-1} up to a character
        let c = found.iter().find(|c| c.pi.dim() == 2).unwrap();
        let (summand, base_xi) = rep.hidden_position(c.base_slot);
        let base_xi = base_xi.to_vec();
        let wb = rep.hidden_unitary(c.base_slot).clone();
        let mut seen = 0;
        for id in rep.slot_ids() {
            let (i, xi) = rep.hidden_position(id);
            if i != summand {
                continue;
            }
            let rel = vec![xi[0] - base_xi[0]];
            let m = rep.hidden_unitary(id).adjoint() * &c.t.t[&rel] * &wb;
            let z = m[(0, 0)];
            assert!((z.norm() - 1.0).abs() < 1e-9);
            assert!(frobenius(&(m - CMatrix::identity(2, 2) * z)) < 1e-9);
            seen += 1;
        }
        assert_eq!(seen, 5);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn shift_then_back_is_identity(seed in 0u64..1000, x0 in -2i64..=2) {
            let ind = Induced::new(ManifoldData::circle(), SpectralModel::circle(1), 2, 2.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = Window::new(1, 4).unwrap();
            let s = ind.random_section(&mut rng, &[1], &w, 1, &w.points_within(2), 0.5).unwrap();
            let there = ind.equivalence_shift(&[1], &[x0]).unwrap();
            let back = ind.equivalence_shift(&there.target_lambda, &[-x0]).unwrap();
            let round = back.apply(&ind.data, &there.apply(&ind.data, &s).unwrap()).unwrap();
            proptest::prop_assert!(compare(&ind.space, &round, &s).passes(0.0));
        }
    }
}
