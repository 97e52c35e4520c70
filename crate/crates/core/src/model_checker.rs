//! Semantic oracle over the series models: decides one-variable pp-systems on
//! concrete parameters (three-valued), evaluates quantifier-free outputs, and
//! compares the two on seeded samples. Also spot-checks the value axioms.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coeff_field::FieldRef;
use crate::formula::{Atom, AtomKind, PPFormula, QFFormula, Term, Tri};
use crate::ore_poly::OrePoly;
use crate::qe_engine::{QeOutput, Stage};
use crate::rat::Rat;
use crate::series_field::{Lattice, SeriesElem, SeriesError};
use crate::solve::{density_witness, divide_witness, solve_affine, RootStatus, SolveError, SolveOpts};
use crate::value_geometry::{tau_rat, ups, ups_inv, DeltaPoint};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Yes(String),
    No(String),
    Unknown(String),
}

impl Verdict {
    pub fn tri(&self) -> Tri {
        match self {
            Verdict::Yes(_) => Tri::True,
            Verdict::No(_) => Tri::False,
            Verdict::Unknown(_) => Tri::Unknown,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub assignment: BTreeMap<String, SeriesElem>,
}

fn exact(x: &SeriesElem) -> SeriesElem {
    SeriesElem::from_terms(x.field(), x.lattice(), x.terms().to_vec(), DeltaPoint::Inf)
}

/// u·c + k.
#[derive(Clone)]
struct Lin {
    c: OrePoly,
    k: SeriesElem,
}

fn certify(kind: &AtomKind, value: &SeriesElem, err: &DeltaPoint) -> Tri {
    // value is exact; the true value differs by something of valuation ≥ err
    let v = value.v_lb();
    match kind {
        AtomKind::Eq => {
            if value.is_zero() && err.is_inf() {
                Tri::True
            } else if !value.is_zero() && &v < err {
                Tri::False
            } else {
                Tri::Unknown
            }
        }
        AtomKind::Cong(d) => {
            let d = DeltaPoint::Fin(d.clone());
            if v >= d && *err >= d {
                Tri::True
            } else if v < d && *err > v {
                Tri::False
            } else {
                Tri::Unknown
            }
        }
    }
}

/// Decides ∃u ⋀ atoms for a formula with one bound variable and every other
/// variable assigned.
pub fn solvable(phi: &PPFormula, inst: &Instance) -> Verdict {
    match solvable_inner(phi, inst) {
        Ok(v) => v,
        Err(e) => Verdict::Unknown(e),
    }
}

fn solvable_inner(phi: &PPFormula, inst: &Instance) -> Result<Verdict, String> {
    if phi.bound.len() != 1 {
        return Err(format!("{} bound variables; decide one at a time", phi.bound.len()));
    }
    let u = &phi.bound[0];
    let mut eqs: Vec<Lin> = vec![];
    let mut congs: Vec<(Lin, Rat)> = vec![];
    let mut closed = Tri::True;
    for a in &phi.atoms {
        let (c, rest) = a.term.split_var(u).ok_or("bound variable under λ")?;
        let k = rest.eval(&inst.assignment).map_err(|e| e.to_string())?;
        if c.is_zero() {
            closed = closed.and(a.holds_value(&k));
            continue;
        }
        let (g, cn) = c.normalize_monomial().map_err(|e| e.to_string())?;
        let k = k.mul(&SeriesElem::t_pow(c.field(), c.lattice(), g.clone()));
        match &a.kind {
            AtomKind::Eq => eqs.push(Lin { c: cn, k }),
            AtomKind::Cong(d) => congs.push((Lin { c: cn, k }, d + &g)),
        }
    }
    if closed == Tri::False {
        return Ok(Verdict::No("a parameter-only atom fails".into()));
    }
    // combine equations exactly: c_big·λ = c_small·s + R
    while eqs.len() >= 2 {
        eqs.sort_by_key(|e| std::cmp::Reverse(e.c.deg0()));
        let big = eqs.remove(0);
        let small = eqs[0].clone();
        let g = big.c.generalized_right_divide(&small.c).map_err(|e| e.to_string())?;
        // u·R = −k_big·λ + s(k_small)
        let k = big.k.mul(&g.scale).sub(&g.quot.module_apply(&small.k));
        if g.rem.is_zero() {
            if !k.is_zero() {
                return Ok(Verdict::No("equations are inconsistent".into()));
            }
            continue;
        }
        let (gg, rn) = g.rem.normalize_monomial().map_err(|e| e.to_string())?;
        eqs.push(Lin { c: rn, k: k.mul(&SeriesElem::t_pow(big.c.field(), big.c.lattice(), gg)) });
    }
    let (pivot, pivot_is_eq) = if let Some(e) = eqs.first() {
        (e.clone(), true)
    } else if !congs.is_empty() {
        let i = (0..congs.len()).max_by(|&a, &b| {
            let ra = ups(&congs[a].0.c.profile(), &congs[a].1);
            let rb = ups(&congs[b].0.c.profile(), &congs[b].1);
            ra.cmp(&rb).then(b.cmp(&a))
        });
        (congs[i.unwrap()].0.clone(), false)
    } else {
        return Ok(match closed {
            Tri::True => Verdict::Yes("no constraint on the variable".into()),
            _ => Verdict::Unknown("parameter-only atom undecided".into()),
        });
    };
    let p = pivot.c.p();
    let need = congs.iter().map(|(l, d)| ups(&l.c.profile(), d)).max();
    let (m, r) = pivot.c.split_t_power();
    let target = match &need {
        Some(n) => Rat::max(tau_rat(p, n, m as i64), Rat::zero()) + Rat::int(2),
        None => Rat::int(2),
    };
    let rhs = pivot.k.neg();
    let set = solve_affine(&r, &rhs, &SolveOpts::new(target)).map_err(|e| format!("solver: {}", e))?;
    let emb = set.embedding.clone();
    let expected = (p as u64).pow(r.deg0() as u32);
    let mut all_false = set.total() as u64 == expected;
    let mut note = String::new();
    for ball in &set.balls {
        if let RootStatus::Defect(e) = &ball.status {
            all_false = false;
            note = format!("lattice defect at exponent {}", e);
            continue;
        }
        let center = match exact(&ball.center).sigma_pow(-(m as i64)) {
            Ok(c) => c,
            Err(SeriesError::OutsideLattice(e)) => {
                all_false = false;
                note = format!("lattice defect: σ^-{} leaves the lattice at exponent {}", m, e);
                continue;
            }
            Err(e) => return Err(e.to_string()),
        };
        let radius = match &ball.radius {
            DeltaPoint::Inf => DeltaPoint::Inf,
            DeltaPoint::Fin(x) => DeltaPoint::Fin(tau_rat(p, x, -(m as i64))),
        };
        // Without an equation the center is itself a candidate: its atom
        // values are exact. The ball radius only matters for refutation.
        let mut verdict = Tri::True;
        let mut at_center = Tri::True;
        for (l, d) in &congs {
            let c = l.c.embed(&emb);
            let val = c.module_apply(&center).add(&l.k.embed(&emb));
            let err = match &radius {
                DeltaPoint::Inf => DeltaPoint::Inf,
                DeltaPoint::Fin(x) => DeltaPoint::Fin(ups_inv(&c.profile(), x)),
            };
            verdict = verdict.and(certify(&AtomKind::Cong(d.clone()), &val, &err));
            at_center = at_center.and(certify(&AtomKind::Cong(d.clone()), &val, &DeltaPoint::Inf));
        }
        if !pivot_is_eq && at_center == Tri::True && verdict != Tri::False {
            verdict = Tri::True;
        }
        match verdict {
            Tri::True if closed == Tri::True => {
                let what = if pivot_is_eq { "solution" } else { "witness" };
                return Ok(Verdict::Yes(format!("{} {} (radius {})", what, center, radius)));
            }
            Tri::False => {}
            _ => all_false = false,
        }
    }
    if all_false {
        return Ok(Verdict::No(format!("all {} candidate solutions violate a congruence", expected)));
    }
    if note.is_empty() {
        note = "candidate solutions not certified at this precision".into();
    }
    Ok(Verdict::Unknown(note))
}

// ---------------------------------------------------------------- sampling

#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub samples: usize,
    pub seed: u64,
    pub precision: Rat,
}

impl SamplerConfig {
    pub fn new(samples: usize, seed: u64) -> SamplerConfig {
        SamplerConfig { samples, seed, precision: Rat::int(16) }
    }
}

fn dens(l: Lattice) -> Vec<i64> {
    match l {
        Lattice::Full => vec![1, 1, 2],
        Lattice::Tame(q) => vec![q as i64],
    }
}

pub fn random_value<R: Rng>(rng: &mut R, f: &FieldRef, l: Lattice) -> SeriesElem {
    if rng.gen_bool(0.08) {
        return SeriesElem::zero(f, l);
    }
    let n = rng.gen_range(1..=3);
    SeriesElem::random(rng, f, l, n, -2, 5, &dens(l))
}

/// A value with valuation near δ (or zero), for landing on either side of a threshold.
fn near<R: Rng>(rng: &mut R, f: &FieldRef, l: Lattice, d: &Rat) -> SeriesElem {
    if rng.gen_bool(0.3) {
        return SeriesElem::zero(f, l);
    }
    let steps: &[Rat] = &[Rat::int(-1), Rat::new(-1, 2), Rat::zero(), Rat::new(1, 2), Rat::int(1)];
    let mut e = d + steps.choose(rng).unwrap();
    if !l.contains(&e) {
        e = e.floor();
    }
    let lead = SeriesElem::monomial(f, l, f.random_nonzero(rng), e.clone());
    lead.add(&SeriesElem::random(rng, f, l, 1, 0, 2, &[1]).shift(&(&e + &Rat::one())))
}

/// Fixes one parameter per atom so that the atom lands exactly on, or just
/// around, its threshold under the current assignment.
fn plant<R: Rng>(rng: &mut R, atoms: &[Atom], assign: &mut BTreeMap<String, SeriesElem>, free: &[String]) {
    let mut locked: Vec<String> = vec![];
    let mut order: Vec<&Atom> = atoms.iter().collect();
    order.shuffle(rng);
    for a in order {
        let t = &a.term;
        let (f, l) = (t.field().clone(), t.lattice());
        let cands: Vec<_> = t
            .monos()
            .iter()
            .filter(|m| free.contains(&m.var) && !locked.contains(&m.var))
            .filter(|m| t.monos().iter().filter(|x| x.var == m.var).count() == 1)
            .collect();
        let Some(mono) = cands.choose(rng) else { continue };
        let mut rest_assign = assign.clone();
        rest_assign.insert(mono.var.clone(), SeriesElem::zero(&f, l));
        let Ok(rest) = t.eval(&rest_assign) else { continue };
        let goal = match &a.kind {
            AtomKind::Eq => SeriesElem::zero(&f, l),
            AtomKind::Cong(d) => near(rng, &f, l, d),
        };
        let n = goal.sub(&rest);
        let z = if n.is_zero() {
            SeriesElem::zero(&f, l)
        } else if mono.coeff.deg0() == 0 && mono.coeff.coeff(0).is_monomial() {
            match mono.coeff.coeff(0).inv() {
                Ok(i) => n.mul(&i),
                Err(_) => continue,
            }
        } else {
            match divide_witness(&n, &mono.coeff, &(n.v_lb().finite().cloned().unwrap_or(Rat::zero()) + Rat::int(6))) {
                Ok(w) if std::sync::Arc::ptr_eq(&w.embedding.from, &w.embedding.to) => exact(&w.m),
                _ => continue,
            }
        };
        let k = mono.path.len();
        let y = if k == 0 {
            z
        } else {
            match z.sigma_pow(k as i64) {
                Ok(s) => s.mul(&OrePoly::path_basis(&f, l, &mono.path)),
                Err(_) => continue,
            }
        };
        assign.insert(mono.var.clone(), y);
        locked.push(mono.var.clone());
    }
}

/// Assignments for the free variables of a stage: uniform, planted on the
/// input atoms (with a random value for the bound variable), or planted on the
/// output atoms' thresholds, in rotation.
pub fn sample_stage<R: Rng>(rng: &mut R, stage: &Stage, i: usize) -> Instance {
    let t0 = &stage.input.atoms[0].term;
    let (f, l) = (t0.field().clone(), t0.lattice());
    let free: Vec<String> = stage.input.free_vars().into_iter().collect();
    let mut assign: BTreeMap<String, SeriesElem> = free.iter().map(|v| (v.clone(), random_value(rng, &f, l))).collect();
    match i % 3 {
        0 => {}
        1 => {
            assign.insert(stage.var.clone(), random_value(rng, &f, l));
            plant(rng, &stage.input.atoms, &mut assign, &free);
            assign.remove(&stage.var);
        }
        _ => {
            if stage.output.atoms.is_empty() {
                assign.insert(stage.var.clone(), random_value(rng, &f, l));
                plant(rng, &stage.input.atoms, &mut assign, &free);
                assign.remove(&stage.var);
            } else {
                plant(rng, &stage.output.atoms, &mut assign, &free);
            }
        }
    }
    Instance { assignment: assign }
}

// ---------------------------------------------------------------- compare

#[derive(Debug, Clone, Serialize)]
pub struct Disagreement {
    pub stage: String,
    pub assignment: BTreeMap<String, String>,
    pub pp_verdict: String,
    pub qf_value: String,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct StageReport {
    pub var: String,
    pub input: String,
    pub output: String,
    pub samples: usize,
    pub agree: usize,
    pub disagree: usize,
    pub unknown: usize,
    pub yes: usize,
    pub no: usize,
    /// Output atoms seen both holding and failing.
    pub atoms_both_sides: usize,
    pub atoms_total: usize,
    pub unknown_reasons: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub formula: String,
    pub result: String,
    pub stages: Vec<StageReport>,
    /// Samples where the mode-rewritten output differs from the model output.
    pub tf_checked: usize,
    pub tf_premise_violations: usize,
    pub disagreements: Vec<Disagreement>,
    pub trace: Option<String>,
}

impl CompareReport {
    pub fn samples(&self) -> usize {
        self.stages.iter().map(|s| s.samples).sum()
    }

    pub fn unknown(&self) -> usize {
        self.stages.iter().map(|s| s.unknown).sum()
    }

    pub fn disagree(&self) -> usize {
        self.stages.iter().map(|s| s.disagree).sum()
    }

    pub fn yes(&self) -> usize {
        self.stages.iter().map(|s| s.yes).sum()
    }

    pub fn no(&self) -> usize {
        self.stages.iter().map(|s| s.no).sum()
    }
}

fn short_reason(v: &Verdict) -> String {
    match v {
        Verdict::Unknown(s) => s.split(':').next().unwrap_or(s).split(" at ").next().unwrap_or(s).to_string(),
        _ => String::new(),
    }
}

fn compare_stage(stage: &Stage, cfg: &SamplerConfig, rng: &mut ChaCha8Rng, dis: &mut Vec<Disagreement>) -> StageReport {
    let mut rep = StageReport {
        var: stage.var.clone(),
        input: stage.input.to_string(),
        output: stage.output.to_string(),
        atoms_total: stage.output.atoms.len(),
        ..Default::default()
    };
    let mut sides = vec![(false, false); stage.output.atoms.len()];
    for i in 0..cfg.samples {
        let inst = sample_stage(rng, stage, i);
        rep.samples += 1;
        for (j, a) in stage.output.atoms.iter().enumerate() {
            match a.eval(&inst.assignment) {
                Ok(Tri::True) => sides[j].0 = true,
                Ok(Tri::False) => sides[j].1 = true,
                _ => {}
            }
        }
        let pp = solvable(&stage.input, &inst);
        let qf = stage.output.eval(&inst.assignment).unwrap_or(Tri::Unknown);
        match pp {
            Verdict::Yes(_) => rep.yes += 1,
            Verdict::No(_) => rep.no += 1,
            Verdict::Unknown(_) => {
                *rep.unknown_reasons.entry(short_reason(&pp)).or_insert(0) += 1;
            }
        }
        match (pp.tri(), qf) {
            (Tri::Unknown, _) | (_, Tri::Unknown) => rep.unknown += 1,
            (a, b) if a == b => rep.agree += 1,
            _ => {
                rep.disagree += 1;
                if dis.len() < 20 {
                    dis.push(Disagreement {
                        stage: stage.var.clone(),
                        assignment: inst.assignment.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
                        pp_verdict: format!("{:?}", pp),
                        qf_value: format!("{:?}", qf),
                    });
                }
            }
        }
    }
    rep.atoms_both_sides = sides.iter().filter(|(a, b)| *a && *b).count();
    rep
}

/// Stage-by-stage comparison of a pp-formula with its elimination output.
pub fn compare(out: &QeOutput, cfg: &SamplerConfig) -> CompareReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dis = vec![];
    let stages: Vec<StageReport> = out.stages.iter().map(|s| compare_stage(s, cfg, &mut rng, &mut dis)).collect();
    let (mut tf_checked, mut tf_viol) = (0, 0);
    if out.qf != out.model_qf {
        let vars: Vec<String> = out.model_qf.vars().union(&out.qf.vars()).cloned().collect();
        if let Some(t) = out.model_qf.atoms.first().map(|a| a.term.clone()) {
            for i in 0..cfg.samples {
                let mut assign: BTreeMap<String, SeriesElem> =
                    vars.iter().map(|v| (v.clone(), random_value(&mut rng, t.field(), t.lattice()))).collect();
                if i % 2 == 1 {
                    plant(&mut rng, &out.model_qf.atoms, &mut assign, &vars);
                }
                let a = out.model_qf.eval(&assign).unwrap_or(Tri::Unknown);
                let b = out.qf.eval(&assign).unwrap_or(Tri::Unknown);
                if a != Tri::Unknown && b != Tri::Unknown {
                    tf_checked += 1;
                    if a != b {
                        tf_viol += 1;
                    }
                }
            }
        }
    }
    let trace = if dis.is_empty() { None } else { Some(out.trace.to_json()) };
    CompareReport {
        formula: out.trace.input.clone(),
        result: out.qf.to_string(),
        stages,
        tf_checked,
        tf_premise_violations: tf_viol,
        disagreements: dis,
        trace,
    }
}

/// Compares a pp-formula with an arbitrary quantifier-free formula over the
/// same free variables (one bound variable).
pub fn compare_formulas(phi: &PPFormula, psi: &QFFormula, cfg: &SamplerConfig) -> CompareReport {
    let stage = Stage { var: phi.bound.first().cloned().unwrap_or_default(), input: phi.clone(), output: psi.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dis = vec![];
    let rep = compare_stage(&stage, cfg, &mut rng, &mut dis);
    CompareReport {
        formula: phi.to_string(),
        result: psi.to_string(),
        stages: vec![rep],
        tf_checked: 0,
        tf_premise_violations: 0,
        disagreements: dis,
        trace: None,
    }
}

// ---------------------------------------------------------------- axioms

#[derive(Debug, Clone, Serialize, Default)]
pub struct AxiomCheck {
    pub name: String,
    pub passed: usize,
    pub failed: usize,
    /// Instances the lattice cannot realize (exponent outside the lattice).
    pub defects: usize,
    /// Witness expansions whose exponents accumulate below the target, so the
    /// finite computation cannot reach it.
    pub stalled: usize,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub field: String,
    pub lattice: String,
    pub samples: usize,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.failed == 0)
    }

    pub fn defects(&self) -> usize {
        self.checks.iter().map(|c| c.defects).sum()
    }
}

fn w(x: &SeriesElem) -> DeltaPoint {
    x.v().expect("exact sample")
}

fn record(c: &mut AxiomCheck, ok: bool, what: impl FnOnce() -> String) {
    if ok {
        c.passed += 1;
    } else {
        c.failed += 1;
        if c.first_failure.is_none() {
            c.first_failure = Some(what());
        }
    }
}

fn random_sep_poly<R: Rng>(rng: &mut R, f: &FieldRef, l: Lattice) -> OrePoly {
    let d = rng.gen_range(1..=2);
    loop {
        let mut cs = vec![];
        for i in 0..=d {
            let k = rng.gen_range(1..=2);
            let mut c = SeriesElem::random(rng, f, l, k, 0, 3, &dens(l));
            if i == 0 && c.is_zero() {
                c = SeriesElem::one(f, l);
            }
            cs.push(c);
        }
        let q = OrePoly::from_coeffs(f, l, cs);
        if q.is_separable() && q.in_i() {
            return q;
        }
    }
}

/// Random-instance verification of the valuation and V_δ axiom schemes.
pub fn check_axioms(f: &FieldRef, l: Lattice, samples: usize, seed: u64) -> AxiomReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = f.p();
    let names = [
        "w(x) = inf iff x = 0",
        "ultrametric w(x+y) >= min",
        "w(-x) = w(x)",
        "scalar law w(x*mu) = w(x) + v(mu)",
        "t-action w(x*t) = tau(w(x))",
        "monotone t-action",
        "V closed under addition",
        "V_d(m) iff V_tau(d)(m*t)",
        "V decreasing in d",
        "V_d(m) iff V_(d+v(mu))(m*mu)",
        "density: V_d(m - n*t) has a witness",
        "division: m in V_0 with m*q = n for n in V_0",
    ];
    let mut checks: Vec<AxiomCheck> = names.iter().map(|n| AxiomCheck { name: n.to_string(), ..Default::default() }).collect();
    for _ in 0..samples {
        let x = random_value(&mut rng, f, l);
        let y = random_value(&mut rng, f, l);
        let k = rng.gen_range(1..=2);
        let mu = SeriesElem::random(&mut rng, f, l, k, -2, 3, &dens(l));
        let d = Rat::new(rng.gen_range(-6..12), *dens(l).choose(&mut rng).unwrap());
        let (wx, wy) = (w(&x), w(&y));
        record(&mut checks[0], wx.is_inf() == x.is_zero(), || format!("x = {}", x));
        let s = x.add(&y);
        record(&mut checks[1], w(&s) >= DeltaPoint::min(wx.clone(), wy.clone()), || format!("x = {}, y = {}", x, y));
        record(&mut checks[2], w(&x.neg()) == wx, || format!("x = {}", x));
        if !mu.is_zero() {
            let want = wx.shift(&mu.v().unwrap().finite().cloned().unwrap());
            record(&mut checks[3], w(&x.mul(&mu)) == want, || format!("x = {}, mu = {}", x, mu));
        }
        let xt = x.frobenius();
        record(&mut checks[4], w(&xt) == crate::value_geometry::tau(p, &wx, 1), || format!("x = {}", x));
        let yt = y.frobenius();
        record(&mut checks[5], (wx < wy) == (w(&xt) < w(&yt)), || format!("x = {}, y = {}", x, y));
        let dd = DeltaPoint::Fin(d.clone());
        let in_v = |z: &SeriesElem, e: &Rat| w(z) >= DeltaPoint::Fin(e.clone());
        if in_v(&x, &d) && in_v(&y, &d) {
            record(&mut checks[6], in_v(&s, &d), || format!("x = {}, y = {}, d = {}", x, y, d));
        } else {
            record(&mut checks[6], true, String::new);
        }
        record(&mut checks[7], in_v(&x, &d) == in_v(&xt, &tau_rat(p, &d, 1)), || format!("x = {}, d = {}", x, d));
        let d2 = &d + &Rat::new(1, 2);
        record(&mut checks[8], !in_v(&x, &d2) || in_v(&x, &d), || format!("x = {}", x));
        if !mu.is_zero() {
            let vm = mu.v().unwrap().finite().cloned().unwrap();
            record(&mut checks[9], in_v(&x, &d) == in_v(&x.mul(&mu), &(&d + &vm)), || format!("x = {}, mu = {}", x, mu));
        }
        match density_witness(&x, &d) {
            Ok(n) => record(&mut checks[10], w(&x.sub(&n.frobenius())) >= dd, || format!("x = {}, d = {}", x, d)),
            Err(SolveError::Defect(_)) => checks[10].defects += 1,
            Err(e) => record(&mut checks[10], false, || e.to_string()),
        }
        let q = random_sep_poly(&mut rng, f, l);
        let k = rng.gen_range(1..=3);
        let n = SeriesElem::random(&mut rng, f, l, k, 0, 4, &dens(l));
        match divide_witness(&n, &q, &Rat::int(8)) {
            Ok(wit) if wit.status == RootStatus::Stalled => checks[11].stalled += 1,
            Ok(wit) => {
                let ok = wit.m.v_lb() >= DeltaPoint::Fin(Rat::zero()) && wit.residual >= DeltaPoint::Fin(Rat::int(8));
                record(&mut checks[11], ok, || format!("n = {}, q = {}, residual {}", n, q, wit.residual));
            }
            Err(SolveError::Defect(_)) => checks[11].defects += 1,
            Err(e) => {
                if matches!(l, Lattice::Tame(_)) {
                    checks[11].defects += 1;
                } else {
                    record(&mut checks[11], false, || format!("n = {}, q = {}: {}", n, q, e));
                }
            }
        }
    }
    AxiomReport { field: f.spec(), lattice: l.spec(), samples, checks }
}

/// Convenience: a one-variable formula's truth on an assignment, via `solvable`.
pub fn decide(phi: &PPFormula, assign: &BTreeMap<String, SeriesElem>) -> Verdict {
    solvable(phi, &Instance { assignment: assign.clone() })
}

pub fn term_value(t: &Term, assign: &BTreeMap<String, SeriesElem>) -> Option<SeriesElem> {
    t.eval(assign).ok()
}
