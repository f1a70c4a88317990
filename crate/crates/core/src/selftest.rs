//! Seeded property batteries behind the `selftest` command and the
//! acceptance run.
//!
//! Each property draws from its own generator, derived from the run seed and
//! the property name, so a failure is reproduced by the seed, the property and
//! the trial index alone.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::delignedata::{GElement, ManifoldData};
use crate::exactalg::{GroupElement, IntMatrix, QmodZ};
use crate::finheis::{self, FiniteProjRep};
use crate::fock::{self, CoherentSum, FockSpace};
use crate::induced::{self, Induced, PlantedRep, PlantedSummand, Window};
use crate::intertwine::{self, MatrixRep};
use crate::linalg::{cis_turns, frobenius, random_complex_matrix, random_hermitian, random_unitary, CMatrix, C64};
use crate::linkform::LinkingForm;
use crate::spectral::{FourierPoly, SpectralModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Fock,
    Spectral,
    Induced,
    FinHeis,
    Intertwine,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [Suite::FinHeis, Suite::Intertwine, Suite::Spectral, Suite::Fock, Suite::Induced];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Fock => "fock",
            Suite::Spectral => "spectral",
            Suite::Induced => "induced",
            Suite::FinHeis => "finheis",
            Suite::Intertwine => "intertwine",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [Suite::All].iter().chain(&Suite::EACH).find(|x| x.name() == s).copied().ok_or_else(|| {
            format!("unknown suite {s:?}; expected fock, spectral, induced, finheis, intertwine or all")
        })
    }
}

/// Window, mode count and truncation degree for the induced battery.
#[derive(Clone, Debug, PartialEq)]
pub struct InducedParams {
    pub radius: i64,
    pub modes: usize,
    pub degree: usize,
    pub round_trips: usize,
}

impl Default for InducedParams {
    fn default() -> Self {
        InducedParams { radius: 4, modes: 2, degree: 4, round_trips: 20 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Overrides every per-property trial count.
    pub trials: Option<usize>,
    /// Overrides every per-property tolerance.
    pub tol: Option<f64>,
    /// Negative control: perturbs one reference constant in each suite.
    pub tamper: bool,
    pub induced: InducedParams,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig { seed: 0, trials: None, tol: None, tamper: false, induced: InducedParams::default() }
    }
}

/// Enough to rerun a single failing trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub seed: u64,
    pub trial: usize,
    pub value: f64,
    pub params: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyResult {
    pub suite: String,
    pub name: String,
    pub trials: usize,
    pub tol: f64,
    pub worst: f64,
    pub failure: Option<Failure>,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "ok  " } else { "FAIL" };
        write!(
            f,
            "{status} {}/{}: {} trials, worst {:.3e}, tol {:.1e}",
            self.suite, self.name, self.trials, self.worst, self.tol
        )?;
        if let Some(x) = &self.failure {
            write!(f, "\n     first failure: seed {} trial {} value {:.3e} [{}]", x.seed, x.trial, x.value, x.params)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub results: Vec<PropertyResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.results.iter().all(PropertyResult::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyResult> {
        self.results.iter().filter(|r| !r.passed())
    }
}

fn fnv(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// The generator for one property.
pub fn property_rng(seed: u64, suite: &str, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv(suite).rotate_left(17) ^ fnv(name))
}

struct Tracker {
    suite: &'static str,
    name: &'static str,
    seed: u64,
    tol: f64,
    trials: usize,
    worst: f64,
    failure: Option<Failure>,
}

impl Tracker {
    fn new(cfg: &SelftestConfig, suite: &'static str, name: &'static str, tol: f64) -> Self {
        Tracker { suite, name, seed: cfg.seed, tol: cfg.tol.unwrap_or(tol), trials: 0, worst: 0.0, failure: None }
    }

    fn rng(&self) -> ChaCha8Rng {
        property_rng(self.seed, self.suite, self.name)
    }

    /// Records a deviation; NaN counts as failure.
    fn record(&mut self, value: f64, params: impl FnOnce() -> String) {
        let trial = self.trials;
        self.trials += 1;
        if value.is_nan() || value > self.worst {
            self.worst = value;
        }
        if (value.is_nan() || value > self.tol) && self.failure.is_none() {
            self.failure = Some(Failure { seed: self.seed, trial, value, params: params() });
        }
    }

    fn check(&mut self, ok: bool, params: impl FnOnce() -> String) {
        self.record(if ok { 0.0 } else { f64::INFINITY }, params);
    }

    fn error(&mut self, e: impl fmt::Display) {
        let trial = self.trials;
        self.trials += 1;
        self.worst = f64::INFINITY;
        if self.failure.is_none() {
            self.failure = Some(Failure { seed: self.seed, trial, value: f64::INFINITY, params: e.to_string() });
        }
    }

    fn finish(self) -> PropertyResult {
        PropertyResult {
            suite: self.suite.into(),
            name: self.name.into(),
            trials: self.trials,
            tol: self.tol,
            worst: self.worst,
            failure: self.failure,
        }
    }
}

const TAMPER: f64 = 1e-3;

pub fn run(suite: Suite, cfg: &SelftestConfig) -> Report {
    let suites: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
    let mut results = Vec::new();
    for s in suites {
        results.extend(match s {
            Suite::Fock => fock_suite(cfg),
            Suite::Spectral => spectral_suite(cfg),
            Suite::Induced => induced_suite(cfg),
            Suite::FinHeis => finheis_suite(cfg),
            Suite::Intertwine => intertwine_suite(cfg),
            Suite::All => unreachable!(),
        });
    }
    Report { seed: cfg.seed, results }
}

/// Linking forms with `|T| <= 64`, including the trivial one.
pub fn linking_battery() -> Vec<LinkingForm> {
    let h = |n| LinkingForm::hyperbolic(n).expect("n >= 2");
    let z2 = LinkingForm::z2_diagonal;
    let sum = |p: &[LinkingForm]| LinkingForm::orthogonal_sum(p).expect("orthogonal sum of valid forms");
    vec![
        LinkingForm::trivial(),
        z2(),
        sum(&[z2(), z2()]),
        sum(&[z2(), z2(), z2()]),
        h(2),
        h(3),
        h(4),
        h(5),
        h(6),
        h(7),
        h(8),
        sum(&[z2(), h(2)]),
        sum(&[z2(), h(3)]),
        sum(&[h(2), h(2)]),
        sum(&[z2(), z2(), h(2)]),
        sum(&[h(2), h(4)]),
        sum(&[z2(), h(4)]),
        sum(&[z2(), z2(), h(4)]),
        sum(&[h(2), h(2), z2(), z2()]),
    ]
}

fn finheis_suite(cfg: &SelftestConfig) -> Vec<PropertyResult> {
    let mut axioms = Tracker::new(cfg, "finheis", "projective_unitary_axioms", 1e-10);
    let mut counts = Tracker::new(cfg, "finheis", "irrep_count_and_dimensions", 0.0);
    let mut distinct = Tracker::new(cfg, "finheis", "pairwise_inequivalent", 0.0);
    for (k, form) in linking_battery().iter().enumerate() {
        for level in 1..=2u64 {
            let irreps = match finheis::build_irreps_at_level(form, level) {
                Ok(x) => x,
                Err(e) => {
                    counts.error(e);
                    continue;
                }
            };
            let params = || format!("battery form {k} ({}), level {level}", form.group());
            for (i, r) in irreps.iter().enumerate() {
                let r = if cfg.tamper && i == 0 { tamper_rep(r) } else { r.clone() };
                axioms.record(r.projective_defect().max(r.unitarity_defect()), params);
            }
            let order = form.group().order();
            let sum_sq: u128 = irreps.iter().map(|r| (r.dim() * r.dim()) as u128).sum();
            counts.check(irreps.len() as u128 == form.count_r(level) && sum_sq == order, params);
            let mut ok = true;
            for i in 0..irreps.len() {
                for j in i + 1..irreps.len() {
                    ok &= !finheis::are_equivalent(&irreps[i], &irreps[j]).unwrap_or(true);
                }
            }
            distinct.check(ok, params);
        }
    }
    vec![axioms.finish(), counts.finish(), distinct.finish()]
}

fn tamper_rep(r: &FiniteProjRep) -> FiniteProjRep {
    let mut mats = r.matrices().to_vec();
    let last = mats.len() - 1;
    mats[last] *= cis_turns(TAMPER);
    if mats.len() == 1 {
        mats[0] = CMatrix::identity(r.dim(), r.dim()) * C64::new(1.0 + TAMPER, 0.0);
    }
    FiniteProjRep::new(r.form().clone(), mats).expect("same shape")
}

fn intertwine_suite(cfg: &SelftestConfig) -> Vec<PropertyResult> {
    let trials = cfg.trials.unwrap_or(50);
    let mut schur = Tracker::new(cfg, "intertwine", "schur_hom_dimensions", 0.0);
    for (k, form) in linking_battery().iter().enumerate().filter(|(_, f)| f.group().order() <= 16) {
        let irreps = match finheis::build_irreps(form) {
            Ok(x) => x,
            Err(e) => {
                schur.error(e);
                continue;
            }
        };
        let reps: Vec<MatrixRep> = irreps.iter().map(FiniteProjRep::generator_rep).collect();
        for i in 0..reps.len() {
            let irr = intertwine::is_irreducible(&reps[i]).unwrap_or(false);
            schur.check(irr, || format!("battery form {k}, irrep {i} reducible"));
            for j in 0..reps.len() {
                let want = usize::from(i == j);
                let got = intertwine::hom_space(&reps[i], &reps[j]).map(|h| h.dim());
                schur.check(got.as_ref().ok() == Some(&want), || format!("battery form {k}, hom({i},{j}) = {got:?}"));
            }
        }
    }

    let mut unit = Tracker::new(cfg, "intertwine", "unitarize_residuals", 1e-9);
    let mut rng = unit.rng();
    let forms = [LinkingForm::hyperbolic(3).unwrap(), LinkingForm::hyperbolic(2).unwrap(), LinkingForm::z2_diagonal()];
    for t in 0..trials {
        let form = &forms[t % forms.len()];
        let irreps = finheis::build_irreps(form).expect("battery form");
        let pi = irreps[rng.gen_range(0..irreps.len())].generator_rep();
        let mult = rng.gen_range(1..=2usize);
        let mut r = pi.clone();
        for _ in 1..mult {
            r = r.direct_sum(&pi).expect("same generator count");
        }
        // intertwiners of pi^mult to its conjugate by W are W (A (x) I)
        let w = random_unitary(&mut rng, r.dim);
        let r2 = r.conjugate(&w);
        let a = random_complex_matrix(&mut rng, mult, mult) + CMatrix::identity(mult, mult) * C64::new(2.0, 0.0);
        let mut theta = &w * a.kronecker(&CMatrix::identity(pi.dim, pi.dim));
        if cfg.tamper {
            theta[(0, 0)] += C64::new(TAMPER, 0.0);
        }
        let params = || format!("trial {t}, dim {}, multiplicity {mult}", r.dim);
        match intertwine::unitarize(&theta, &r, &r2, 1e-8) {
            Ok(u) => unit.record(u.unitarity_residual.max(u.intertwining_residual), params),
            Err(e) => unit.record(f64::INFINITY, || format!("{}: {e}", params())),
        }
    }

    let mut spec = Tracker::new(cfg, "intertwine", "spectral_resolution_reconstruction", 1e-9);
    let mut rng = spec.rng();
    for t in 0..trials {
        let n = rng.gen_range(1..=6);
        let mut a = random_hermitian(&mut rng, n);
        if t % 3 == 0 {
            // repeated eigenvalues
            let u = random_unitary(&mut rng, n);
            let d: Vec<C64> = (0..n).map(|i| C64::new((i % 2) as f64, 0.0)).collect();
            a = &u * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)) * u.adjoint();
            a = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        }
        let scale = frobenius(&a).max(1.0);
        match intertwine::spectral_resolution(&a) {
            Ok(s) => {
                let mut back = s.reconstruct();
                if cfg.tamper {
                    back *= C64::new(1.0 + TAMPER, 0.0);
                }
                spec.record(frobenius(&(back - &a)) / scale, || format!("trial {t}, n = {n}"))
            }
            Err(e) => spec.record(f64::INFINITY, || format!("trial {t}: {e}")),
        }
    }
    vec![schur.finish(), unit.finish(), spec.finish()]
}

fn random_poly<R: Rng>(rng: &mut R, n: usize) -> FourierPoly {
    let c: Vec<i64> = (0..n).map(|_| rng.gen_range(-9..=9)).collect();
    let s: Vec<i64> = (0..n).map(|_| rng.gen_range(-9..=9)).collect();
    let mut p = FourierPoly::from_i64(&c, &s);
    // a few rational coefficients
    let k = rng.gen_range(0..n);
    p.cos[k] = BigRational::new(BigInt::from(rng.gen_range(-20..=20)), BigInt::from(rng.gen_range(1..=7)));
    p
}

fn spectral_suite(cfg: &SelftestConfig) -> Vec<PropertyResult> {
    const N_MAX: usize = 32;
    let trials = cfg.trials.unwrap_or(200);
    let model = SpectralModel::circle(N_MAX);
    let pi_ref = if cfg.tamper { std::f64::consts::PI * (1.0 + TAMPER) } else { std::f64::consts::PI };

    let mut exact = Tracker::new(cfg, "spectral", "symplectic_equals_v_inner_j_exact", 0.0);
    let mut float = Tracker::new(cfg, "spectral", "symplectic_float_identity", 1e-10);
    let mut rng = exact.rng();
    for t in 0..trials {
        let (p, q) = (random_poly(&mut rng, N_MAX), random_poly(&mut rng, N_MAX));
        let s = p.symplectic(&q);
        exact.check(s == p.v_inner(&q.apply_j()), || format!("trial {t}"));
        let x = model.symplectic(&p.to_mode_vec(), &q.to_mode_vec()).expect("lengths match");
        let reference = s.0.to_f64().unwrap_or(f64::NAN) * pi_ref;
        float.record((x - reference).abs() / (1.0 + reference.abs()), || format!("trial {t}, exact {} pi", s.0));
    }

    let mut jj = Tracker::new(cfg, "spectral", "j_squared_is_minus_one", 1e-12);
    let mut pos = Tracker::new(cfg, "spectral", "positivity", 0.0);
    let mut rng = jj.rng();
    for t in 0..trials {
        let a = model.random_vec(&mut rng, 1.0);
        let ja = model.apply_j(&a).expect("lengths match");
        let jja = model.apply_j(&ja).expect("lengths match");
        let dev = jja.add(&a).0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        jj.record(dev, || format!("trial {t}"));
        let p = random_poly(&mut rng, 4);
        let exact_jj = p.apply_j().apply_j();
        let neg = FourierPoly { cos: p.cos.iter().map(|x| -x).collect(), sin: p.sin.iter().map(|x| -x).collect() };
        jj.check(exact_jj == neg, || format!("trial {t}, exact J^2"));
        let s = model.symplectic(&ja, &a).expect("lengths match");
        pos.check(a.is_zero() || s > 0.0, || format!("trial {t}, S(Ja, a) = {s:e}"));
    }
    vec![exact.finish(), float.finish(), jj.finish(), pos.finish()]
}

fn fock_suite(cfg: &SelftestConfig) -> Vec<PropertyResult> {
    const KAPPA: f64 = 2.0;
    let kappa_ref = if cfg.tamper { KAPPA * (1.0 + TAMPER) } else { KAPPA };

    let mut tail = Tracker::new(cfg, "fock", "coherent_inner_within_tail_bound", 0.0);
    let space = FockSpace::new(2, 16, KAPPA).expect("small space");
    let mut rng = tail.rng();
    for t in 0..cfg.trials.unwrap_or(100) {
        let xi = fock::random_point(&mut rng, 2, 1.0);
        let eta = fock::random_point(&mut rng, 2, 1.0);
        match space.coherent_inner(&xi, &eta) {
            Ok(c) => {
                let closed = (kappa_ref * fock::hermitian(&xi, &eta)).exp();
                let excess = (c.truncated - closed).norm() - c.tail_bound * (1.0 + 1e-9) - 1e-14;
                tail.record(excess.max(0.0), || format!("trial {t}, D = 16, kappa = {KAPPA}"));
            }
            Err(e) => tail.error(e),
        }
    }

    let mut unit = Tracker::new(cfg, "fock", "unitarity", 1e-8);
    let mut rng = unit.rng();
    for t in 0..cfg.trials.unwrap_or(100) {
        let n = rng.gen_range(1..=4);
        let v = fock::random_real_param(&mut rng, n, 2.0, KAPPA);
        let mut x = CoherentSum::default();
        for _ in 0..3 {
            let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            x = x.add(&CoherentSum::single(c, fock::random_point(&mut rng, n, 1.0)));
        }
        let before = x.norm(KAPPA);
        let after = x.act(kappa_ref, &v).norm(KAPPA);
        unit.record((after - before).abs() / before.max(f64::MIN_POSITIVE), || format!("trial {t}, {n} modes"));
    }

    let mut coc = Tracker::new(cfg, "fock", "cocycle", 1e-10);
    let mut rng = coc.rng();
    for t in 0..cfg.trials.unwrap_or(500) {
        let n = rng.gen_range(1..=4);
        let v = fock::random_real_param(&mut rng, n, 1.5, KAPPA);
        let w = fock::random_real_param(&mut rng, n, 1.5, KAPPA);
        let xi = fock::random_point(&mut rng, n, 1.0);
        let d = if cfg.tamper {
            let start = CoherentSum::single(C64::new(1.0, 0.0), xi.clone());
            let lhs = start.act(KAPPA, &w).act(KAPPA, &v);
            let mult = (C64::new(0.0, 1.0) * fock::heisenberg_form(&v, &w, kappa_ref)).exp();
            let rhs = start.act(KAPPA, &v.add(&w)).scale(mult);
            lhs.distance(KAPPA, &rhs) / rhs.norm(KAPPA)
        } else {
            fock::cocycle_check(KAPPA, &v, &w, &xi)
        };
        coc.record(d, || format!("trial {t}, {n} modes"));
    }
    vec![tail.finish(), unit.finish(), coc.finish()]
}

/// Manifold data used by the induced battery, all with `b <= 2`.
pub fn induced_battery() -> Vec<ManifoldData> {
    let q = QmodZ::new;
    let circle = ManifoldData::circle();
    let rp5_s = ManifoldData { name: Some("RP5 x S-type".into()), ..ManifoldData::torsion_free(1, 1) }
        .with_linking(LinkingForm::z2_diagonal());
    let mut skew = ManifoldData::torsion_free(1, 2).with_linking(LinkingForm::hyperbolic(3).expect("n >= 2"));
    skew.name = Some("b=2, Z3 x Z3".into());
    skew.pairing = IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]);
    skew.sigma_free = vec![vec![q(1, 2), q(1, 3)], vec![q(-1, 3), q(0, 1)]];
    let mut mixed = ManifoldData::torsion_free(2, 2).with_linking(
        LinkingForm::orthogonal_sum(&[LinkingForm::z2_diagonal(), LinkingForm::hyperbolic(2).expect("n >= 2")])
            .expect("valid parts"),
    );
    mixed.name = Some("b=2, Z2 + Z2 x Z2".into());
    mixed.pairing = IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]);
    mixed.sigma_free = vec![vec![q(0, 1), q(1, 4)], vec![q(-1, 4), q(1, 2)]];
    vec![circle, rp5_s, skew, mixed]
}

fn induced_suite(cfg: &SelftestConfig) -> Vec<PropertyResult> {
    let p = &cfg.induced;
    let probes = cfg.trials.unwrap_or(200);
    let model = SpectralModel::circle(p.modes.max(1));
    let mut models = Vec::new();
    for data in induced_battery() {
        match Induced::new(data, model.clone(), p.degree, 2.0) {
            Ok(ind) => models.push(ind),
            Err(e) => {
                let mut t = Tracker::new(cfg, "induced", "setup", 0.0);
                t.error(e);
                return vec![t.finish()];
            }
        }
    }
    if p.radius < 3 {
        let mut t = Tracker::new(cfg, "induced", "setup", 0.0);
        t.error("window radius must be at least 3 so that two unit shifts stay inside");
        return vec![t.finish()];
    }
    let window = p.radius;
    let support_margin = 2;

    let mut exact_phase = Tracker::new(cfg, "induced", "projective_relation_exact_phases", 0.0);
    let mut fock_rel = Tracker::new(cfg, "induced", "projective_relation_fock", 1e-8);
    let mut rng = exact_phase.rng();
    for t in 0..probes {
        let ind = &models[t % models.len()];
        let irreps = finheis::build_irreps(&ind.data.linking).expect("battery form");
        let pi = &irreps[rng.gen_range(0..irreps.len())];
        let w = Window { b: ind.data.b, radius: window };
        let lambda: Vec<i64> = (0..ind.data.b).map(|_| rng.gen_range(-3..=3)).collect();
        let amp = if t % 4 == 0 { 0.0 } else { 0.3 };
        let f = GElement::random(&mut rng, &ind.data, &ind.model, 12, amp, 1, true);
        let g = GElement::random(&mut rng, &ind.data, &ind.model, 12, amp, 1, true);
        let params = || format!("probe {t}, data {:?}, lambda {lambda:?}", ind.data.name);
        let s = match ind.random_section(&mut rng, &lambda, &w, pi.dim(), &w.points_within(support_margin), 0.5) {
            Ok(s) => s,
            Err(e) => {
                exact_phase.error(e);
                continue;
            }
        };
        match ind.projective_relation_check(pi, &f, &g, &s) {
            Ok(d) => {
                exact_phase.check(d.support_match && d.phases_match, params);
                fock_rel.record(d.fock_deviation, params);
            }
            Err(e) => exact_phase.error(e),
        }
    }

    let mut branching = Tracker::new(cfg, "induced", "branching_slotwise", 1e-10);
    let mut rng = branching.rng();
    for t in 0..probes {
        let ind = &models[t % models.len()];
        let w = Window { b: ind.data.b, radius: window };
        let lambda: Vec<i64> = (0..ind.data.b).map(|_| rng.gen_range(-3..=3)).collect();
        let mut a = GElement::random(&mut rng, &ind.data, &ind.model, 12, 0.4, 0, false);
        if cfg.tamper {
            a.eta[0] += QmodZ::new(1, 1000);
        }
        let s = ind.random_section(&mut rng, &lambda, &w, 1, &w.points_within(support_margin), 0.5);
        let result = s.and_then(|s| {
            let mut d = ind.branching_check(&a, &s)?;
            if cfg.tamper {
                // compare against the untampered element
                let mut a0 = a.clone();
                a0.eta[0] = &a0.eta[0] - &QmodZ::new(1, 1000);
                let acted = induced::absorb_phases(&ind.act_induced(&a0, &s)?);
                let other = induced::absorb_phases(&ind.act_induced(&a, &s)?);
                d = d.max(induced::compare(&ind.space, &acted, &other).fock_deviation);
            }
            Ok(d)
        });
        match result {
            Ok(d) => branching.record(d, || format!("probe {t}, data {:?}", ind.data.name)),
            Err(e) => branching.error(e),
        }
    }

    let mut shift = Tracker::new(cfg, "induced", "equivalence_shift_intertwines", 1e-8);
    let mut rng = shift.rng();
    for t in 0..probes {
        let ind = &models[t % models.len()];
        let (normal, _) = ind.data.normalize_sigma().expect("valid battery data");
        let ind = Induced { data: normal, ..ind.clone() };
        let irreps = finheis::build_irreps(&ind.data.linking).expect("battery form");
        let pi = &irreps[rng.gen_range(0..irreps.len())];
        let w = Window { b: ind.data.b, radius: window };
        let lambda: Vec<i64> = (0..ind.data.b).map(|_| rng.gen_range(-3..=3)).collect();
        let xi0: Vec<i64> = (0..ind.data.b).map(|_| rng.gen_range(-1..=1)).collect();
        let f = GElement::random(&mut rng, &ind.data, &ind.model, 12, 0.3, 1, true);
        let params = || format!("probe {t}, data {:?}, lambda {lambda:?}, xi0 {xi0:?}", ind.data.name);
        let result = ind.equivalence_shift(&lambda, &xi0).and_then(|mut sh| {
            if cfg.tamper {
                sh.target_lambda[0] += 2;
            }
            // support kept one step further in so that the shift stays inside
            let s = ind.random_section(&mut rng, &lambda, &w, pi.dim(), &w.points_within(support_margin + 1), 0.5)?;
            ind.shift_intertwining_check(&sh, pi, &f, &s)
        });
        match result {
            Ok(d) => shift.record(if d.support_match && d.phases_match { d.fock_deviation } else { f64::INFINITY }, params),
            Err(e) => shift.error(e),
        }
    }

    let mut decomp = Tracker::new(cfg, "induced", "decomposition_map_intertwines", 1e-8);
    let mut rng = decomp.rng();
    let with_torsion: Vec<&Induced> = models.iter().filter(|m| !m.data.linking.group().is_trivial()).collect();
    for t in 0..probes {
        let ind = with_torsion[t % with_torsion.len()];
        let g = ind.data.linking.group();
        let theta: Vec<GroupElement> =
            (0..ind.data.b).map(|_| GroupElement(g.factors().iter().map(|&n| rng.gen_range(0..n)).collect())).collect();
        let irreps = finheis::build_irreps(&ind.data.linking).expect("battery form");
        let pi = &irreps[rng.gen_range(0..irreps.len())];
        let w = Window { b: ind.data.b, radius: window };
        let lambda: Vec<i64> = (0..ind.data.b).map(|_| rng.gen_range(-3..=3)).collect();
        let f = GElement::random(&mut rng, &ind.data, &ind.model, 12, 0.3, 1, true);
        let params = || format!("probe {t}, data {:?}, theta {theta:?}, lambda {lambda:?}", ind.data.name);
        let result = ind.decomposition_map(&theta, &lambda, pi).and_then(|mut ch| {
            if cfg.tamper {
                ch.mu[0] += QmodZ::new(1, g.factors()[0] as i64);
            }
            let s = ind.random_section(&mut rng, &lambda, &w, pi.dim(), &w.points_within(support_margin), 0.5)?;
            ch.intertwining_check(ind, &f, &s)
        });
        match result {
            Ok(d) => decomp.record(d.fock_deviation, params),
            Err(e) => decomp.error(e),
        }
    }

    let mut rt = Tracker::new(cfg, "induced", "round_trip_extraction", 0.0);
    let mut rng = rt.rng();
    for t in 0..p.round_trips {
        let ind = &models[t % models.len()];
        let ind = Induced::new(ind.data.clone(), SpectralModel::circle(1), 2, 2.0).expect("valid battery data");
        let planted = random_planting(&mut rng, &ind);
        let radius = if ind.data.b == 1 { 2 } else { 1 };
        let params = || format!("instance {t}, data {:?}, planted {planted:?}", ind.data.name);
        let result = Window::new(ind.data.b, radius)
            .and_then(|w| PlantedRep::new(&mut rng, &ind, w, planted.clone()))
            .and_then(|rep| {
                let found = induced::extract(&ind, &rep, 1e-8)?;
                let cocycles = found.iter().all(|c| c.u_report.valid && c.t.report.valid);
                let mut want = planted.clone();
                if cfg.tamper {
                    want[0].lambda[0] += 1;
                }
                Ok(cocycles && induced::labels_match(&ind.data, &want, &found)?)
            });
        match result {
            Ok(ok) => rt.check(ok, params),
            Err(e) => rt.record(f64::INFINITY, || format!("{}: {e}", params())),
        }
    }

    vec![exact_phase.finish(), fock_rel.finish(), branching.finish(), shift.finish(), decomp.finish(), rt.finish()]
}

/// One to three summands with pairwise inequivalent `lambda`, each carrying
/// one or two canonical irreps.
pub fn random_planting<R: Rng>(rng: &mut R, ind: &Induced) -> Vec<PlantedSummand> {
    let b = ind.data.b;
    let n_irreps = finheis::build_irreps(&ind.data.linking).map(|v| v.len()).unwrap_or(1);
    let n_classes = 1usize << b;
    let count = rng.gen_range(1..=n_classes.min(3));
    let mut classes: Vec<usize> = (0..n_classes).collect();
    for i in 0..count {
        let j = rng.gen_range(i..n_classes);
        classes.swap(i, j);
    }
    classes[..count]
        .iter()
        .map(|&cls| {
            let base: Vec<i64> = (0..b).map(|j| ((cls >> j) & 1) as i64).collect();
            let shift: Vec<i64> = (0..b).map(|_| rng.gen_range(-2..=2)).collect();
            let ps = ind.data.s_hom(&shift);
            let lambda = base.iter().zip(&ps).map(|(x, y)| x + 2 * y).collect();
            let k = rng.gen_range(1..=2);
            let irreps = (0..k).map(|_| rng.gen_range(0..n_irreps)).collect();
            PlantedSummand { lambda, irreps }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SelftestConfig {
        SelftestConfig {
            seed: 7,
            trials: Some(12),
            induced: InducedParams { round_trips: 4, ..InducedParams::default() },
            ..SelftestConfig::default()
        }
    }

    #[test]
    fn every_suite_passes_quickly() {
        let r = run(Suite::All, &quick());
        for x in &r.results {
            assert!(x.passed(), "{x}");
            assert!(x.trials > 0, "{x}");
        }
    }

    #[test]
    fn tamper_fails_every_suite() {
        let cfg = SelftestConfig { tamper: true, ..quick() };
        for s in Suite::EACH {
            let r = run(s, &cfg);
            assert!(!r.passed(), "suite {s} ignored the tamper");
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let a = run(Suite::Fock, &quick());
        let b = run(Suite::Fock, &quick());
        assert_eq!(a, b);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::All, Suite::Fock, Suite::Spectral, Suite::Induced, Suite::FinHeis, Suite::Intertwine] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn battery_sizes() {
        assert!(linking_battery().iter().all(|f| f.group().order() <= 64 && f.validate().is_empty()));
        assert!(induced_battery().into_iter().all(|m| m.b <= 2 && m.validate().is_empty()));
    }
}
