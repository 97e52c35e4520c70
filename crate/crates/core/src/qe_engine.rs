//! Elimination of one module variable from a positive-primitive system
//! u·r₀ = b₀ ∧ ⋀ u·t^{nᵢ}·rᵢ ≡_{δᵢ} bᵢ, with a replayable derivation trace.
//!
//! Every rewrite is exact: divisions go through the generalized (scaled)
//! Euclidean division and normalization into ℐ uses monomials only, so the
//! parameters stay symbolic and no series is ever inverted.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coeff_field::{extend_until_kernel_full, FFElem, FiniteField};
use crate::formula::{Atom, AtomKind, PPFormula, QFFormula, Term};
use crate::ore_poly::{all_paths, OreError, OrePoly};
use crate::rat::Rat;
use crate::series_field::{Lattice, SeriesElem, SeriesError};
use crate::text::Ctx;
use crate::value_geometry::{tau_rat, ups, ups_inv, DeltaPoint};

pub const TRACE_SCHEMA: &str = "ore-qe/trace/v1";
const MAX_STEPS: usize = 20_000;

#[derive(Debug, thiserror::Error)]
pub enum QeError {
    #[error(transparent)]
    Ore(#[from] OreError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("variable {0} occurs under λ after expansion")]
    LambdaLeft(String),
    #[error("invariant breach: {msg}")]
    Invariant { msg: String, trace: Box<Trace> },
    #[error("replay mismatch: {0}")]
    Replay(String),
    #[error("bad trace: {0}")]
    BadTrace(String),
}

// ---------------------------------------------------------------- modes

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomEntry {
    pub poly: String,
    pub nontrivial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    TorsionFree,
    TTor,
    Axioms(Vec<AxiomEntry>),
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::TorsionFree => "torsion-free",
            Mode::TTor => "ttor",
            Mode::Axioms(_) => "axioms",
        }
    }

    /// Axiom files hold lines `poly : trivial` or `poly : nontrivial`; `#` starts a comment.
    pub fn parse_axioms(src: &str) -> Result<Vec<AxiomEntry>, String> {
        let mut out = vec![];
        for (i, line) in src.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (poly, kind) = line.rsplit_once(':').ok_or_else(|| format!("line {}: expected `poly : trivial|nontrivial`", i + 1))?;
            let nontrivial = match kind.trim() {
                "trivial" => false,
                "nontrivial" => true,
                k => return Err(format!("line {}: unknown annihilator kind {:?}", i + 1, k)),
            };
            out.push(AxiomEntry { poly: poly.trim().to_string(), nontrivial });
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------- systems

/// u·r = rhs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub r: OrePoly,
    pub rhs: Term,
}

/// u·tⁿ·r ≡_δ rhs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Congruence {
    pub n: usize,
    pub r: OrePoly,
    pub delta: Rat,
    pub rhs: Term,
}

impl Congruence {
    pub fn full(&self) -> OrePoly {
        self.r.shift_t(self.n)
    }

    pub fn reach(&self) -> Rat {
        ups(&self.r.profile(), &self.delta)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PPSystem {
    pub var: String,
    pub equations: Vec<Equation>,
    pub congruences: Vec<Congruence>,
    pub side: Vec<Atom>,
}

impl PPSystem {
    /// Reads the atoms mentioning `var`; λ on `var` must already be expanded.
    pub fn from_atoms(var: &str, atoms: &[Atom]) -> Result<PPSystem, QeError> {
        let mut sys = PPSystem { var: var.to_string(), equations: vec![], congruences: vec![], side: vec![] };
        for a in atoms {
            let (c, rest) = a.term.split_var(var).ok_or_else(|| QeError::LambdaLeft(var.to_string()))?;
            let rhs = rest.neg();
            if c.is_zero() {
                sys.side.push(a.clone());
                continue;
            }
            match &a.kind {
                AtomKind::Eq => sys.equations.push(Equation { r: c, rhs }),
                AtomKind::Cong(d) => sys.congruences.push(Congruence { n: 0, r: c, delta: d.clone(), rhs }),
            }
        }
        Ok(sys)
    }

    pub fn to_formula(&self) -> PPFormula {
        let u = |q: &OrePoly| Term::mono(&self.var, vec![], q.clone());
        let mut atoms = vec![];
        for e in &self.equations {
            atoms.push(Atom::eq(u(&e.r).sub(&e.rhs)));
        }
        for c in &self.congruences {
            atoms.push(Atom::cong(c.delta.clone(), u(&c.full()).sub(&c.rhs)));
        }
        atoms.extend(self.side.iter().cloned());
        PPFormula { bound: vec![self.var.clone()], atoms }
    }

    /// Σ degrees of the separable parts.
    pub fn sepdeg(&self) -> usize {
        self.equations.iter().map(|e| e.r.split_t_power().1.deg0()).sum::<usize>()
            + self.congruences.iter().map(|c| c.r.split_t_power().1.deg0()).sum::<usize>()
    }

    fn p(&self) -> Option<u32> {
        self.equations.first().map(|e| e.r.p()).or_else(|| self.congruences.first().map(|c| c.r.p()))
    }

    fn max_n(&self) -> usize {
        self.congruences.iter().map(|c| c.n).max().unwrap_or(0)
    }

    /// Index of the congruence with the largest Υ(rᵢ, δᵢ); ties go to the earliest.
    fn argmax_reach(&self) -> (usize, Rat) {
        let mut best = (0, self.congruences[0].reach());
        for (i, c) in self.congruences.iter().enumerate().skip(1) {
            let m = c.reach();
            if m > best.1 {
                best = (i, m);
            }
        }
        best
    }
}

impl fmt::Display for PPSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

/// Result of one rule application.
#[derive(Debug, Clone)]
pub struct Applied {
    pub sys: PPSystem,
    pub thresholds: BTreeMap<String, String>,
    pub flags: Vec<String>,
}

fn applied(sys: PPSystem) -> Applied {
    Applied { sys, thresholds: BTreeMap::new(), flags: vec![] }
}

fn th(a: &mut Applied, k: &str, v: impl ToString) {
    a.thresholds.insert(k.to_string(), v.to_string());
}

fn val(x: &SeriesElem) -> Rat {
    match x.v() {
        Ok(DeltaPoint::Fin(r)) => r,
        _ => Rat::zero(),
    }
}

fn t_poly(q: &OrePoly, k: usize) -> OrePoly {
    OrePoly::t_pow(q.field(), q.lattice(), k)
}

// ---------------------------------------------------------------- rules

/// Moves every coefficient into ℐ, splits off t-powers of congruence
/// coefficients, and turns variable-free atoms into side conditions.
pub fn normalize_i(sys: &PPSystem) -> Result<Option<Applied>, QeError> {
    let mut out = PPSystem { var: sys.var.clone(), equations: vec![], congruences: vec![], side: sys.side.clone() };
    let mut shifts = vec![];
    for e in &sys.equations {
        if e.r.is_zero() {
            out.side.push(Atom::eq(e.rhs.clone()));
            continue;
        }
        let (g, rn) = e.r.normalize_monomial()?;
        let mu = SeriesElem::t_pow(e.r.field(), e.r.lattice(), g.clone());
        if !g.is_zero() {
            shifts.push(g);
        }
        out.equations.push(Equation { r: rn, rhs: e.rhs.mul_scalar(&mu) });
    }
    for c in &sys.congruences {
        let full = c.full();
        if full.is_zero() {
            out.side.push(Atom::cong(c.delta.clone(), c.rhs.clone()));
            continue;
        }
        let (m, rs) = full.split_t_power();
        let (g, rn) = rs.normalize_monomial()?;
        let mu = SeriesElem::t_pow(full.field(), full.lattice(), g.clone());
        if !g.is_zero() {
            shifts.push(g.clone());
        }
        out.congruences.push(Congruence { n: m, r: rn, delta: &c.delta + &g, rhs: c.rhs.mul_scalar(&mu) });
    }
    if out == *sys {
        return Ok(None);
    }
    let mut a = applied(out);
    if !shifts.is_empty() {
        th(&mut a, "shifts", shifts.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(","));
    }
    Ok(Some(a))
}

/// One Euclid step between two equations, keeping a separable coefficient.
pub fn reduce_equations_step(sys: &PPSystem) -> Result<Option<Applied>, QeError> {
    if sys.equations.len() < 2 {
        return Ok(None);
    }
    let Some(a) = sys
        .equations
        .iter()
        .enumerate()
        .filter(|(_, e)| e.r.is_separable())
        .min_by_key(|(i, e)| (e.r.deg0(), *i))
        .map(|(i, _)| i)
    else {
        return Ok(None);
    };
    let b = if a == 0 { 1 } else { 0 };
    let (ea, eb) = (&sys.equations[a], &sys.equations[b]);
    // the larger-degree side is divided by the other
    let (big, small, replace) = if eb.r.deg0() >= ea.r.deg0() { (eb, ea, b) } else { (ea, eb, a) };
    let g = big.r.generalized_right_divide(&small.r)?;
    let rhs = big.rhs.mul_scalar(&g.scale).sub(&small.rhs.mul_poly(&g.quot));
    let mut out = sys.clone();
    let mut ap;
    if g.rem.is_zero() {
        out.equations.remove(replace);
        out.side.push(Atom::eq(rhs));
        ap = applied(out);
        th(&mut ap, "case", "divides");
    } else {
        out.equations[replace] = Equation { r: g.rem, rhs };
        ap = applied(out);
        th(&mut ap, "case", if replace == b { "reduce-other" } else { "reduce-separable" });
    }
    th(&mut ap, "scale_val", val(&g.scale));
    Ok(Some(ap))
}

/// Runs Euclid steps until at most one equation is left.
pub fn reduce_equations(sys: &PPSystem) -> Result<PPSystem, QeError> {
    let mut cur = sys.clone();
    loop {
        if let Some(a) = normalize_i(&cur)? {
            cur = a.sys;
        }
        match reduce_equations_step(&cur)? {
            Some(a) => cur = a.sys,
            None => return Ok(cur),
        }
    }
}

/// Replaces the first non-separable equation u·t^m·r′ = b by the equations
/// u·Λ_d̄(r′) = λ_d̄(b), one for each d̄ of length m.
pub fn make_separable(sys: &PPSystem) -> Result<Option<Applied>, QeError> {
    let Some(i) = sys.equations.iter().position(|e| !e.r.is_separable() && !e.r.is_zero()) else {
        return Ok(None);
    };
    let e = &sys.equations[i];
    let (m, rs) = e.r.split_t_power();
    let comps = rs.lambda_decompose(m)?;
    let mut out = sys.clone();
    out.equations.remove(i);
    let mut new_eqs = vec![];
    for (path, q) in comps {
        let rhs = e.rhs.lambda_path(&path)?;
        if q.is_zero() {
            out.side.push(Atom::eq(rhs));
        } else {
            new_eqs.push(Equation { r: q, rhs });
        }
    }
    for (k, ne) in new_eqs.into_iter().enumerate() {
        out.equations.insert(i + k, ne);
    }
    let mut a = applied(out);
    th(&mut a, "m", m);
    Ok(Some(a))
}

/// With u·c = b₀ for a scalar c, every congruence becomes a parameter atom.
pub fn substitute_scalar(sys: &PPSystem) -> Result<Option<Applied>, QeError> {
    if sys.equations.len() != 1 || sys.equations[0].r.deg0() != 0 || sys.equations[0].r.is_zero() {
        return Ok(None);
    }
    let e = &sys.equations[0];
    let mut out = PPSystem { var: sys.var.clone(), equations: vec![], congruences: vec![], side: sys.side.clone() };
    let mut ds = vec![];
    for c in &sys.congruences {
        let g = c.full().generalized_right_divide(&e.r)?;
        debug_assert!(g.rem.is_zero());
        let d = &c.delta + &val(&g.scale);
        ds.push(d.to_string());
        out.side.push(Atom::cong(d, e.rhs.mul_poly(&g.quot).sub(&c.rhs.mul_scalar(&g.scale))));
    }
    let mut a = applied(out);
    th(&mut a, "case", "scalar");
    if !ds.is_empty() {
        th(&mut a, "deltas", ds.join(","));
    }
    Ok(Some(a))
}

/// Makes deg r₀ exceed the degree of every t-free congruence coefficient.
pub fn degree_reduce(sys: &PPSystem) -> Result<Option<Applied>, QeError> {
    let Some(e) = sys.equations.first() else { return Ok(None) };
    let d0 = e.r.deg0();
    let Some(k) = sys.congruences.iter().position(|c| c.n == 0 && c.r.deg0() >= d0) else {
        return Ok(None);
    };
    let c = &sys.congruences[k];
    let g = c.r.generalized_right_divide(&e.r)?;
    let mut out = sys.clone();
    let d = &c.delta + &val(&g.scale);
    out.congruences[k] = Congruence { n: 0, r: g.rem, delta: d.clone(), rhs: c.rhs.mul_scalar(&g.scale).sub(&e.rhs.mul_poly(&g.quot)) };
    let mut a = applied(out);
    th(&mut a, "index", k);
    th(&mut a, "delta", d);
    Ok(Some(a))
}

/// Equation plus congruences with some nᵢ ≥ 1: the equation is softened to a
/// congruence at the least δ with Υ(r₀, δ) ≥ maxᵢ τ^{−nᵢ}(Υ(rᵢ, δᵢ)).
fn soften(sys: &PPSystem) -> Result<Applied, QeError> {
    let p = sys.p().unwrap();
    let e = &sys.equations[0];
    let m = sys.congruences.iter().map(|c| tau_rat(p, &c.reach(), -(c.n as i64))).max().unwrap();
    let d = ups_inv(&e.r.profile(), &m);
    let mut out = sys.clone();
    let e = out.equations.remove(0);
    out.congruences.insert(0, Congruence { n: 0, r: e.r, delta: d.clone(), rhs: e.rhs });
    let mut a = applied(out);
    th(&mut a, "reach", m);
    th(&mut a, "delta_prime", d);
    Ok(a)
}

fn case_a_shape(sys: &PPSystem) -> bool {
    sys.equations.len() == 1 && !sys.congruences.is_empty() && sys.max_n() >= 1
}

/// u·r = b and u·t ≡_δ b₁.
pub fn apply_cas6(sys: &PPSystem) -> Result<Option<Applied>, QeError> {
    if !(case_a_shape(sys) && sys.congruences.len() == 1 && sys.congruences[0].n == 1 && sys.congruences[0].r.is_one()) {
        return Ok(None);
    }
    soften(sys).map(Some)
}

/// u·r₀ = b₀ with all congruence coefficients scalars.
pub fn apply_cas_constante(sys: &PPSystem) -> Result<Option<Applied>, QeError> {
    if !(case_a_shape(sys) && sys.congruences.iter().all(|c| c.r.deg0() == 0)) {
        return Ok(None);
    }
    soften(sys).map(Some)
}

pub fn apply_case_a(sys: &PPSystem) -> Result<Option<Applied>, QeError> {
    if !case_a_shape(sys) {
        return Ok(None);
    }
    soften(sys).map(Some)
}

/// u·t ≡_{μ₁} b₁ and u·r ≡_{μ₂} b₂ become b₁·r^σ ≡_{μ₃} b₂·t.
pub fn apply_cas1(sys: &PPSystem) -> Result<Option<Applied>, QeError> {
    if !sys.equations.is_empty() || sys.congruences.len() != 2 {
        return Ok(None);
    }
    let (c0, c1) = (&sys.congruences[0], &sys.congruences[1]);
    let is_t = |c: &Congruence| c.n == 1 && c.r.is_one();
    let (a, b) = if is_t(c0) && c1.n == 0 {
        (c0, c1)
    } else if is_t(c1) && c0.n == 0 {
        (c1, c0)
    } else {
        return Ok(None);
    };
    let p = a.r.p();
    let rs = b.r.pow_sigma(1)?;
    let left = ups_inv(&rs.profile(), &a.delta);
    let right = tau_rat(p, &b.delta, 1);
    let (branch, mu3) = if left >= right { ("i", right.clone()) } else { ("ii", left.clone()) };
    let t = t_poly(&b.r, 1);
    let mut out = PPSystem { var: sys.var.clone(), equations: vec![], congruences: vec![], side: sys.side.clone() };
    out.side.push(Atom::cong(mu3.clone(), a.rhs.mul_poly(&rs).sub(&b.rhs.mul_poly(&t))));
    let mut ap = applied(out);
    th(&mut ap, "branch", branch);
    th(&mut ap, "ups_inv_rsigma_mu1", left);
    th(&mut ap, "tau_mu2", right);
    th(&mut ap, "mu3", mu3);
    Ok(Some(ap))
}

/// No equation, some nᵢ ≥ 1: conjugate everything through t^{n₀} and rename
/// u·t^{n₀} to u.
pub fn apply_case_a_prime(sys: &PPSystem) -> Result<Option<Applied>, QeError> {
    if !sys.equations.is_empty() || sys.max_n() == 0 {
        return Ok(None);
    }
    let p = sys.p().unwrap();
    let n0 = sys.max_n();
    let mut out = sys.clone();
    for c in out.congruences.iter_mut() {
        let k = n0 - c.n;
        c.r = c.r.pow_sigma(k as i64)?;
        c.delta = tau_rat(p, &c.delta, k as i64);
        c.rhs = c.rhs.mul_poly(&t_poly(&c.r, k));
        c.n = 0;
    }
    let scalar = out.congruences.iter().all(|c| c.r.deg0() == 0);
    let mut a = applied(out);
    th(&mut a, "n0", n0);
    if scalar {
        th(&mut a, "chain", "scalar");
    }
    Ok(Some(a))
}

fn harden(sys: &PPSystem) -> Applied {
    let (i, m) = sys.argmax_reach();
    let mut out = sys.clone();
    let c = out.congruences.remove(i);
    out.equations.push(Equation { r: c.r, rhs: c.rhs });
    let mut a = applied(out);
    th(&mut a, "index", i);
    th(&mut a, "reach", m);
    a
}

fn case_b_prime_shape(sys: &PPSystem) -> bool {
    sys.equations.is_empty() && !sys.congruences.is_empty() && sys.max_n() == 0
}

/// Two congruences: the one with the larger Υ(rᵢ, δᵢ) becomes an equation.
pub fn apply_cas3(sys: &PPSystem) -> Result<Option<Applied>, QeError> {
    if !(case_b_prime_shape(sys) && sys.congruences.len() == 2) {
        return Ok(None);
    }
    Ok(Some(harden(sys)))
}

pub fn apply_case_b_prime(sys: &PPSystem) -> Result<Option<Applied>, QeError> {
    if !case_b_prime_shape(sys) {
        return Ok(None);
    }
    Ok(Some(harden(sys)))
}

fn case_b_shape(sys: &PPSystem) -> bool {
    sys.equations.len() == 1
        && !sys.congruences.is_empty()
        && sys.max_n() == 0
        && sys.congruences.iter().all(|c| c.r.deg0() < sys.equations[0].r.deg0())
}

/// Hardens the congruence with maximal Υ and turns the old equation into a
/// congruence via r₀λ = r*·s + r₃.
fn swap(sys: &PPSystem) -> Result<Applied, QeError> {
    let (i, mu) = sys.argmax_reach();
    let e = &sys.equations[0];
    let c = &sys.congruences[i];
    let g = e.r.generalized_right_divide(&c.r)?;
    let prof = e.r.scalar_right(&g.scale).profile();
    let d = ups_inv(&prof, &mu);
    let back = ups(&prof, &d);
    let mut out = sys.clone();
    out.equations[0] = Equation { r: c.r.clone(), rhs: c.rhs.clone() };
    out.congruences[i] = Congruence { n: 0, r: g.rem, delta: d.clone(), rhs: e.rhs.mul_scalar(&g.scale).sub(&c.rhs.mul_poly(&g.quot)) };
    let mut a = applied(out);
    th(&mut a, "index", i);
    th(&mut a, "reach", &mu);
    th(&mut a, "delta", &d);
    th(&mut a, "scale_val", val(&g.scale));
    if back != mu {
        a.flags.push(format!("Υ(r₀λ, δ) = {} differs from Υ(r*, δ*) = {}", back, mu));
    }
    Ok(a)
}

pub fn apply_cas2(sys: &PPSystem) -> Result<Option<Applied>, QeError> {
    if !(case_b_shape(sys) && sys.congruences.len() == 1) {
        return Ok(None);
    }
    swap(sys).map(Some)
}

pub fn apply_case_b(sys: &PPSystem) -> Result<Option<Applied>, QeError> {
    if !case_b_shape(sys) {
        return Ok(None);
    }
    swap(sys).map(Some)
}

/// A lone separable equation is always solvable.
pub fn close_equation(sys: &PPSystem) -> Result<Option<Applied>, QeError> {
    if sys.equations.len() != 1 || !sys.congruences.is_empty() || !sys.equations[0].r.is_separable() {
        return Ok(None);
    }
    let mut out = sys.clone();
    out.equations.clear();
    let mut a = applied(out);
    th(&mut a, "case", "solvable");
    Ok(Some(a))
}

/// V_θ(λ_path(y)·tⁿq) ↦ V_δ(λ_path(y)) with δ = τ^{−n}(Υ(q, θ)), q moved into ℐ first.
pub fn apply_tf(atom: &Atom) -> Result<Option<(Atom, BTreeMap<String, String>)>, QeError> {
    let AtomKind::Cong(theta) = &atom.kind else { return Ok(None) };
    let t = &atom.term;
    if t.monos().len() != 1 || !t.constant_part().is_zero() || t.monos()[0].coeff.is_one() {
        return Ok(None);
    }
    let mono = &t.monos()[0];
    let (n, q) = mono.coeff.split_t_power();
    let (g, qn) = q.normalize_monomial()?;
    let p = q.p();
    let d = tau_rat(p, &ups(&qn.profile(), &(theta + &g)), -(n as i64));
    let unit = OrePoly::one(q.field(), q.lattice());
    let out = Atom::cong(d.clone(), Term::mono(&mono.var, mono.path.clone(), unit));
    let mut m = BTreeMap::new();
    m.insert("n".into(), n.to_string());
    m.insert("theta".into(), theta.to_string());
    m.insert("delta".into(), d.to_string());
    Ok(Some((out, m)))
}

/// Mode-dependent index annotation for the equation coefficients met during elimination.
pub fn resolve_index(mode: &Mode, coeffs: &[OrePoly]) -> String {
    match mode {
        Mode::TorsionFree => "torsion-free: every proper pp-inclusion has infinite index".into(),
        Mode::Axioms(list) if list.is_empty() => "axioms: all annihilators trivial".into(),
        Mode::Axioms(list) => {
            let parts: Vec<String> =
                list.iter().map(|a| format!("ann({}) {}", a.poly, if a.nontrivial { "nontrivial" } else { "trivial" })).collect();
            format!("axioms: {}", parts.join("; "))
        }
        Mode::TTor => {
            let mut parts = vec![];
            for q in coeffs {
                if q.deg0() == 0 {
                    continue;
                }
                parts.push(format!("ann({}) dim {}", q, ttor_dimension(q)));
            }
            if parts.is_empty() {
                "ttor: no annihilator constraints".into()
            } else {
                format!("ttor: {}", parts.join("; "))
            }
        }
    }
}

/// Fix(σ)-dimension of ann(q): measured over a splitting extension when q has
/// constant coefficients, the degree otherwise.
pub fn ttor_dimension(q: &OrePoly) -> usize {
    let d = q.deg0();
    let consts: Option<Vec<FFElem>> = q
        .coeffs()
        .iter()
        .map(|a| {
            if !a.is_exact() {
                return None;
            }
            match a.terms() {
                [] => Some(FFElem(0)),
                [(e, c)] if e.is_zero() => Some(*c),
                _ => None,
            }
        })
        .collect();
    let Some(cs) = consts else { return d };
    let f = q.field();
    match extend_until_kernel_full(f, &cs, d, 24) {
        Ok(e) => {
            let mapped: Vec<FFElem> = cs.iter().map(|&c| e.map(c)).collect();
            e.to.additive_kernel(&mapped).map(|k| k.len()).unwrap_or(d)
        }
        Err(_) => d,
    }
}

// ---------------------------------------------------------------- λ expansion

fn fresh(base: &str, path: &[usize], taken: &std::collections::BTreeSet<String>) -> String {
    let mut name = format!("{}_{}", base, path.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("_"));
    while taken.contains(&name) {
        name.push('x');
    }
    name
}

/// Splits `var` into λ-components u_d̄ (u = Σ u_d̄·t^ℓ·c_d̄) when λ is applied to it.
pub fn expand_var(atoms: &[Atom], var: &str) -> Result<(Vec<Atom>, Vec<String>), QeError> {
    let depth = atoms.iter().map(|a| a.term.lambda_depth(var)).max().unwrap_or(0);
    if depth == 0 || atoms.is_empty() {
        return Ok((atoms.to_vec(), vec![var.to_string()]));
    }
    let t0 = &atoms[0].term;
    let (f, l) = (t0.field().clone(), t0.lattice());
    let n = l.basis_size(f.p());
    let taken: std::collections::BTreeSet<String> = atoms.iter().flat_map(|a| a.term.vars()).collect();
    let mut repl = Term::zero(&f, l);
    let mut names = vec![];
    for path in all_paths(n, depth) {
        let name = fresh(var, &path, &taken);
        let c = OrePoly::path_basis(&f, l, &path);
        repl = repl.add(&Term::mono(&name, vec![], OrePoly::monomial(depth, c)));
        names.push(name);
    }
    let out = atoms.iter().map(|a| Ok(Atom { kind: a.kind.clone(), term: a.term.substitute(var, &repl)? })).collect::<Result<Vec<_>, QeError>>()?;
    Ok((out, names))
}

/// Expands every bound variable that occurs under λ.
pub fn expand_lambda_quantifier(phi: &PPFormula) -> Result<PPFormula, QeError> {
    let mut atoms = phi.atoms.clone();
    let mut bound = vec![];
    for v in &phi.bound {
        let (a, names) = expand_var(&atoms, v)?;
        atoms = a;
        bound.extend(names);
    }
    Ok(PPFormula { bound, atoms })
}

// ---------------------------------------------------------------- trace

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub var: String,
    pub rule: String,
    pub before: String,
    pub after: String,
    pub thresholds: BTreeMap<String, String>,
    pub sepdeg: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub schema: String,
    pub field: String,
    pub lattice: String,
    pub mode: String,
    pub axioms: Vec<AxiomEntry>,
    pub input: String,
    pub steps: Vec<Step>,
    pub flags: Vec<String>,
    pub index_note: String,
    pub result: String,
}

impl Trace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(s: &str) -> Result<Trace, QeError> {
        let t: Trace = serde_json::from_str(s).map_err(|e| QeError::BadTrace(e.to_string()))?;
        if t.schema != TRACE_SCHEMA {
            return Err(QeError::BadTrace(format!("unknown schema {:?}", t.schema)));
        }
        Ok(t)
    }

    pub fn rules(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.rule.as_str()).collect()
    }
}

/// One eliminated variable: ∃var ⋀ input ↔ output.
#[derive(Debug, Clone)]
pub struct Stage {
    pub var: String,
    pub input: PPFormula,
    pub output: QFFormula,
}

#[derive(Debug, Clone)]
pub struct QeOutput {
    /// Final formula, after the mode's rewriting.
    pub qf: QFFormula,
    /// The formula before mode-specific rewriting (the one valid in every separably closed model).
    pub model_qf: QFFormula,
    pub stages: Vec<Stage>,
    pub trace: Trace,
}

// ---------------------------------------------------------------- driver

type Rule = fn(&PPSystem) -> Result<Option<Applied>, QeError>;

struct Engine<'a> {
    steps: Vec<Step>,
    flags: Vec<String>,
    script: Option<&'a [Step]>,
    eq_coeffs: Vec<OrePoly>,
}

impl<'a> Engine<'a> {
    fn record(&mut self, rule: &str, before: &PPSystem, a: &Applied) -> Result<(), QeError> {
        let step = Step {
            var: before.var.clone(),
            rule: rule.to_string(),
            before: before.to_string(),
            after: a.sys.to_string(),
            thresholds: a.thresholds.clone(),
            sepdeg: [before.sepdeg(), a.sys.sepdeg()],
        };
        self.check_script(&step)?;
        for f in &a.flags {
            self.flags.push(format!("{} [{}]: {}", rule, before.var, f));
        }
        self.steps.push(step);
        Ok(())
    }

    fn check_script(&self, step: &Step) -> Result<(), QeError> {
        if let Some(s) = self.script {
            let i = self.steps.len();
            match s.get(i) {
                Some(exp) if exp == step => Ok(()),
                Some(exp) => Err(QeError::Replay(format!("step {}: expected {} got {}", i, exp.rule, step.rule))),
                None => Err(QeError::Replay(format!("step {}: trace has no such step", i))),
            }
        } else {
            Ok(())
        }
    }

    fn partial_trace(&self) -> Trace {
        Trace {
            schema: TRACE_SCHEMA.into(),
            field: String::new(),
            lattice: String::new(),
            mode: String::new(),
            axioms: vec![],
            input: String::new(),
            steps: self.steps.clone(),
            flags: self.flags.clone(),
            index_note: String::new(),
            result: String::new(),
        }
    }

    fn breach(&self, msg: String) -> QeError {
        QeError::Invariant { msg, trace: Box::new(self.partial_trace()) }
    }

    fn try_rules(&mut self, sys: &mut PPSystem, rules: &[(&str, Rule)]) -> Result<bool, QeError> {
        for (name, f) in rules {
            if let Some(a) = f(sys)? {
                self.record(name, sys, &a)?;
                *sys = a.sys;
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Main loop for one variable; returns the parameter-only atoms.
    fn run(&mut self, mut sys: PPSystem) -> Result<Vec<Atom>, QeError> {
        let mut last_b: Option<usize> = None;
        for _ in 0..MAX_STEPS {
            if let Some(a) = normalize_i(&sys)? {
                self.record("normalizeI", &sys, &a)?;
                sys = a.sys;
            }
            for e in &sys.equations {
                if e.r.is_separable() && !self.eq_coeffs.contains(&e.r) {
                    self.eq_coeffs.push(e.r.clone());
                }
            }
            let several = sys.equations.len() > 1;
            let inseparable = sys.equations.iter().any(|e| !e.r.is_separable());
            if several || inseparable {
                let has_sep = sys.equations.iter().any(|e| e.r.is_separable());
                let rule: (&str, Rule) = if has_sep { ("sep", reduce_equations_step) } else { ("sepequation", make_separable) };
                if !self.try_rules(&mut sys, &[rule])? {
                    return Err(self.breach("no equation rule applies".into()));
                }
                continue;
            }
            if sys.equations.len() == 1 {
                if self.try_rules(&mut sys, &[("sep", substitute_scalar)])? {
                    return Ok(sys.side);
                }
                if self.try_rules(&mut sys, &[("degree-reduce", degree_reduce)])? {
                    continue;
                }
                if self.try_rules(&mut sys, &[("caseB", close_equation)])? {
                    return Ok(sys.side);
                }
                if sys.max_n() >= 1 {
                    let r: [(&str, Rule); 3] = [("cas6", apply_cas6), ("cas_constante", apply_cas_constante), ("caseA", apply_case_a)];
                    if !self.try_rules(&mut sys, &r)? {
                        return Err(self.breach("case A inapplicable".into()));
                    }
                    continue;
                }
                let sd = sys.sepdeg();
                if let Some(prev) = last_b {
                    if sd >= prev {
                        return Err(self.breach(format!("separability degree {} did not drop below {}", sd, prev)));
                    }
                }
                last_b = Some(sd);
                if !self.try_rules(&mut sys, &[("cas2", apply_cas2), ("caseB", apply_case_b)])? {
                    return Err(self.breach("case B inapplicable".into()));
                }
                continue;
            }
            if sys.congruences.is_empty() {
                return Ok(sys.side);
            }
            if sys.max_n() >= 1 {
                if !self.try_rules(&mut sys, &[("cas1", apply_cas1), ("caseA′", apply_case_a_prime)])? {
                    return Err(self.breach("case A′ inapplicable".into()));
                }
                continue;
            }
            if !self.try_rules(&mut sys, &[("cas3", apply_cas3), ("caseB′", apply_case_b_prime)])? {
                return Err(self.breach("case B′ inapplicable".into()));
            }
        }
        Err(self.breach(format!("step budget {} exhausted", MAX_STEPS)))
    }
}

/// Eliminates the variable of a single system.
pub fn eliminate_system(sys: &PPSystem, mode: &Mode) -> Result<(QFFormula, Trace), QeError> {
    let mut eng = Engine { steps: vec![], flags: vec![], script: None, eq_coeffs: vec![] };
    let side = eng.run(sys.clone())?;
    let mut qf = QFFormula::from_atoms(side);
    qf.index_note = resolve_index(mode, &eng.eq_coeffs);
    let mut t = eng.partial_trace();
    t.mode = mode.name().into();
    t.input = sys.to_string();
    t.index_note = qf.index_note.clone();
    t.result = qf.to_string();
    Ok((qf, t))
}

fn run_formula(phi: &PPFormula, ctx: &Ctx, mode: &Mode, script: Option<&[Step]>) -> Result<QeOutput, QeError> {
    let mut eng = Engine { steps: vec![], flags: vec![], script, eq_coeffs: vec![] };
    let mut atoms = phi.atoms.clone();
    let mut queue: Vec<String> = phi.bound.clone();
    let mut stages = vec![];
    // innermost (last-declared) variable first
    while let Some(v) = queue.pop() {
        let (expanded, names) = expand_var(&atoms, &v)?;
        atoms = expanded;
        if names.len() != 1 || names[0] != v {
            queue.extend(names);
            continue;
        }
        let (with, without): (Vec<Atom>, Vec<Atom>) = atoms.into_iter().partition(|a| a.term.has_var(&v));
        if with.is_empty() {
            atoms = without;
            continue;
        }
        let sys = PPSystem::from_atoms(&v, &with)?;
        let side = eng.run(sys)?;
        let out = QFFormula::from_atoms(side.clone());
        stages.push(Stage { var: v.clone(), input: PPFormula { bound: vec![v.clone()], atoms: with }, output: out.clone() });
        if out.falsum {
            atoms = vec![Atom::eq(Term::constant(SeriesElem::one(&ctx.field, ctx.lattice)))];
            queue.clear();
            continue;
        }
        atoms = without;
        atoms.extend(out.atoms);
    }
    let model_qf = QFFormula::from_atoms(atoms.clone());
    let mut final_atoms = vec![];
    if *mode == Mode::TorsionFree && !model_qf.falsum {
        for a in &model_qf.atoms {
            match apply_tf(a)? {
                Some((b, ths)) => {
                    let step = Step {
                        var: String::new(),
                        rule: "tf".into(),
                        before: a.to_string(),
                        after: b.to_string(),
                        thresholds: ths,
                        sepdeg: [0, 0],
                    };
                    eng.check_script(&step)?;
                    eng.steps.push(step);
                    final_atoms.push(b);
                }
                None => final_atoms.push(a.clone()),
            }
        }
    } else {
        final_atoms = atoms;
    }
    let mut qf = QFFormula::from_atoms(final_atoms);
    let mut model_qf = model_qf;
    let note = resolve_index(mode, &eng.eq_coeffs);
    qf.index_note = note.clone();
    model_qf.index_note = note.clone();
    if let Some(s) = script {
        if s.len() != eng.steps.len() {
            return Err(QeError::Replay(format!("trace has {} steps, replay produced {}", s.len(), eng.steps.len())));
        }
    }
    let axioms = match mode {
        Mode::Axioms(l) => l.clone(),
        _ => vec![],
    };
    let trace = Trace {
        schema: TRACE_SCHEMA.into(),
        field: ctx.field.spec(),
        lattice: ctx.lattice.spec(),
        mode: mode.name().into(),
        axioms,
        input: phi.to_string(),
        steps: eng.steps,
        flags: eng.flags,
        index_note: note,
        result: qf.to_string(),
    };
    Ok(QeOutput { qf, model_qf, stages, trace })
}

/// Eliminates every bound variable of φ.
pub fn eliminate(phi: &PPFormula, ctx: &Ctx, mode: &Mode) -> Result<QeOutput, QeError> {
    run_formula(phi, ctx, mode, None)
}

/// Re-runs a trace step by step and checks that it reproduces the same JSON.
pub fn replay(trace: &Trace) -> Result<QeOutput, QeError> {
    if trace.schema != TRACE_SCHEMA {
        return Err(QeError::BadTrace(format!("unknown schema {:?}", trace.schema)));
    }
    let field = FiniteField::from_spec(&trace.field).map_err(|e| QeError::BadTrace(e.to_string()))?;
    let lattice = Lattice::from_spec(&trace.lattice).ok_or_else(|| QeError::BadTrace(format!("bad lattice {:?}", trace.lattice)))?;
    let ctx = Ctx::new(field, lattice);
    let mode = match trace.mode.as_str() {
        "torsion-free" => Mode::TorsionFree,
        "ttor" => Mode::TTor,
        "axioms" => Mode::Axioms(trace.axioms.clone()),
        m => return Err(QeError::BadTrace(format!("unknown mode {:?}", m))),
    };
    let phi = crate::formula::parse_pp(&trace.input, &ctx).map_err(|e| QeError::BadTrace(e.to_string()))?;
    let out = run_formula(&phi, &ctx, &mode, Some(&trace.steps))?;
    if out.trace.to_json() != trace.to_json() {
        return Err(QeError::Replay("replayed trace differs".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_pp, parse_term};

    fn ctx(p: u32, k: u32) -> Ctx {
        Ctx::new(FiniteField::get(p, k).unwrap(), Lattice::Full)
    }

    fn sys_of(src: &str, c: &Ctx) -> PPSystem {
        let f = parse_pp(src, c).unwrap();
        let s = PPSystem::from_atoms(&f.bound[0], &f.atoms).unwrap();
        normalize_i(&s).unwrap().map(|a| a.sys).unwrap_or(s)
    }

    fn qe(src: &str, c: &Ctx) -> QeOutput {
        eliminate(&parse_pp(src, c).unwrap(), c, &Mode::TTor).unwrap()
    }

    #[test]
    fn density_and_totality_give_true() {
        let c = ctx(2, 1);
        assert_eq!(qe("E u . V[3](u*t - b)", &c).qf.to_string(), "true");
        assert_eq!(qe("E u . u*(t + 1) = b", &c).qf.to_string(), "true");
        assert_eq!(qe("E u . u*(t^2 + T*t + 1) = b", &c).qf.to_string(), "true");
    }

    #[test]
    fn cas1_branch_i_example() {
        let c = ctx(2, 1);
        let s = sys_of("E u . V[0](u*t - b1) & V[0](u*(t - T) - b2)", &c);
        let a = apply_cas1(&s).unwrap().unwrap();
        assert_eq!(a.thresholds["branch"], "i");
        assert_eq!(a.thresholds["mu3"], "0");
        let want = parse_term("b1*(t - T^2) - b2*t", &c).unwrap();
        assert_eq!(a.sys.side, vec![Atom::cong(Rat::zero(), want)]);
        let out = qe("E u . V[0](u*t - b1) & V[0](u*(t - T) - b2)", &c);
        assert!(out.trace.rules().contains(&"cas1"));
    }

    #[test]
    fn cas1_branch_ii() {
        let c = ctx(2, 1);
        let s = sys_of("E u . V[0](u*t - b1) & V[1](u*(t + 1) - b2)", &c);
        let a = apply_cas1(&s).unwrap().unwrap();
        assert_eq!(a.thresholds["branch"], "ii");
        assert_eq!(a.thresholds["mu3"], "0");
    }

    #[test]
    fn cas6_least_threshold() {
        let c = ctx(2, 1);
        let s = sys_of("E u . u*(t + 1) = b & V[2](u*t - b1)", &c);
        let a = apply_cas6(&s).unwrap().unwrap();
        // least δ′ with τ(Υ(t+1, δ′)) ≥ 2
        assert_eq!(a.thresholds["delta_prime"], "1");
        let prof = c.parse_ore("t+1").unwrap().profile();
        assert!(tau_rat(2, &ups(&prof, &Rat::int(1)), 1) >= Rat::int(2));
        assert!(tau_rat(2, &ups(&prof, &Rat::new(1, 2)), 1) < Rat::int(2));
    }

    #[test]
    fn cas3_hardens_larger_reach() {
        let c = ctx(3, 1);
        let s = sys_of("E u . V[0](u*(t+1) - b1) & V[5](u*(t+T) - b2)", &c);
        let a = apply_cas3(&s).unwrap().unwrap();
        assert_eq!(a.thresholds["index"], "1");
        assert_eq!(a.sys.equations.len(), 1);
        assert_eq!(a.sys.equations[0].r, c.parse_ore("t+T").unwrap());
    }

    #[test]
    fn reduce_equations_examples() {
        let c = ctx(2, 1);
        let s = reduce_equations(&sys_of("E u . u*(t+1) = y1 & u*(t+1) = y2", &c)).unwrap();
        assert_eq!(s.equations.len(), 1);
        assert_eq!(s.side, vec![Atom::eq(parse_term("y2 - y1", &c).unwrap())]);

        let s = reduce_equations(&sys_of("E u . u*(t+T) = y1 & u*((t+T)*(t+1)) = y2", &c)).unwrap();
        assert_eq!(s.equations.len(), 1);
        assert_eq!(s.side, vec![Atom::eq(parse_term("y2 - y1*(t+1)", &c).unwrap())]);

        let out = qe("E u . u*(t+1) = y1 & u*T = y2", &c);
        assert!(out.qf.vars().iter().all(|v| v.starts_with('y')));
        assert_eq!(out.qf.atoms.len(), 1);
    }

    #[test]
    fn make_separable_pure_t() {
        let c = ctx(2, 1);
        let s = sys_of("E u . u*t = y", &c);
        let a = make_separable(&s).unwrap().unwrap();
        assert_eq!(a.sys.equations.len(), 1);
        assert!(a.sys.equations[0].r.is_one());
        assert_eq!(a.sys.equations[0].rhs.to_string(), "L0(y)");
        assert_eq!(make_separable(&sys_of("E u . u*(t+1) = y", &c)).unwrap().map(|_| ()), None);
    }

    #[test]
    fn tf_examples() {
        let c = ctx(2, 1);
        let a = Atom::cong(Rat::int(2), parse_term("u*(t - T)", &c).unwrap());
        let (b, _) = apply_tf(&a).unwrap().unwrap();
        assert_eq!(b, Atom::cong(Rat::int(1), parse_term("u", &c).unwrap()));
        let a = Atom::cong(Rat::int(2), parse_term("u*t", &c).unwrap());
        let (b, _) = apply_tf(&a).unwrap().unwrap();
        assert_eq!(b, Atom::cong(Rat::int(1), parse_term("u", &c).unwrap()));
        assert!(apply_tf(&Atom::cong(Rat::int(1), parse_term("u", &c).unwrap())).unwrap().is_none());
    }

    #[test]
    fn index_notes() {
        let c = ctx(2, 1);
        assert!(resolve_index(&Mode::TorsionFree, &[]).contains("infinite"));
        assert_eq!(resolve_index(&Mode::Axioms(vec![]), &[]), "axioms: all annihilators trivial");
        let q = c.parse_ore("t + 1").unwrap();
        assert!(resolve_index(&Mode::TTor, &[q]).contains("dim 1"));
        let q2 = c.parse_ore("t^2 + t + 1").unwrap();
        assert_eq!(ttor_dimension(&q2), 2);
    }

    #[test]
    fn expansion_identity_without_lambda() {
        let c = ctx(2, 1);
        let f = parse_pp("E u . u*(t+1) = y", &c).unwrap();
        assert_eq!(expand_lambda_quantifier(&f).unwrap(), f);
        let g = parse_pp("E u . L0(u)*(t+1) = y & u = z", &c).unwrap();
        let e = expand_lambda_quantifier(&g).unwrap();
        assert_eq!(e.bound, vec!["u_0"]);
        assert_eq!(e.to_string(), "E u_0 . u_0*(t + (1)) + y = 0 & u_0*(t) + z = 0");
    }

    #[test]
    fn traces_replay() {
        let c = ctx(2, 2);
        for src in [
            "E u . V[0](u*t - b1) & V[0](u*(t - T) - b2)",
            "E u . u*(t^2 + T) = y & V[1](u*(t + w) - z) & V[-1](u*t^2 - x)",
            "E u v . u*(t+1) = v*T & V[2](v*t - y)",
        ] {
            let out = eliminate(&parse_pp(src, &c).unwrap(), &c, &Mode::TorsionFree).unwrap();
            let back = replay(&Trace::from_json(&out.trace.to_json()).unwrap()).unwrap();
            assert_eq!(back.trace.to_json(), out.trace.to_json());
        }
    }
}
