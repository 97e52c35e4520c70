//! Solvers over the series model: roots of x·q = n by Newton polygons of the
//! additive polynomial, linear factorization, and the divisibility and density
//! witnesses.

use std::fmt;

use crate::coeff_field::{extension, Embedding, FFElem, FieldError, FieldRef};
use crate::ore_poly::{OreError, OrePoly};
use crate::rat::Rat;
use crate::series_field::{SeriesElem, SeriesError};
use crate::value_geometry::{ups, DeltaPoint};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("polynomial is not σ-separable")]
    NotSeparable,
    #[error("zero polynomial")]
    Zero,
    #[error("polynomial is not in I")]
    NotInI,
    #[error("extension cap: no extension of degree ≤ {0} solves the residue equation")]
    ExtensionCap(u32),
    #[error("insufficient precision: known below {0} only")]
    InsufficientPrecision(Rat),
    #[error("exponent {0} is outside the lattice")]
    Defect(Rat),
    #[error("expansion did not converge: residual stuck at {0}")]
    Stalled(DeltaPoint),
    #[error("factorization check failed at precision {0}")]
    FactorCheck(Rat),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Ore(#[from] OreError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RootStatus {
    /// The center is an exact solution.
    Exact,
    /// Certified to the requested precision.
    Converged,
    /// Step cap hit before reaching the target; the ball is still certified.
    Stalled,
    /// The next term needs an exponent outside the lattice.
    Defect(Rat),
}

/// A ball B(center, radius) containing exactly `mult` solutions (with multiplicity).
#[derive(Debug, Clone)]
pub struct RootBall {
    pub center: SeriesElem,
    pub radius: DeltaPoint,
    pub mult: usize,
    pub status: RootStatus,
    /// w(center·q − n).
    pub residual: DeltaPoint,
}

impl RootBall {
    /// The center truncated at the certified radius.
    pub fn root(&self) -> SeriesElem {
        self.center.with_prec(self.radius.clone())
    }

    pub fn ok(&self) -> bool {
        matches!(self.status, RootStatus::Exact | RootStatus::Converged)
    }
}

/// Solutions of x·q = n (or roots of q when n = 0).
#[derive(Debug, Clone)]
pub struct RootSet {
    pub field: FieldRef,
    /// From the input field into `field`.
    pub embedding: Embedding,
    pub balls: Vec<RootBall>,
}

impl RootSet {
    /// Every solution isolated and certified.
    pub fn complete(&self) -> bool {
        self.balls.iter().all(|b| b.mult == 1 && b.ok())
    }

    pub fn defect(&self) -> Option<Rat> {
        self.balls.iter().find_map(|b| match &b.status {
            RootStatus::Defect(e) => Some(e.clone()),
            _ => None,
        })
    }

    pub fn roots(&self) -> Vec<SeriesElem> {
        self.balls.iter().map(|b| b.root()).collect()
    }

    pub fn total(&self) -> usize {
        self.balls.iter().map(|b| b.mult).sum()
    }
}

#[derive(Debug, Clone)]
pub struct SolveOpts {
    pub target: Rat,
    pub max_steps: usize,
    /// Largest field size reachable by extension.
    pub max_field: u64,
}

impl SolveOpts {
    pub fn new(target: Rat) -> SolveOpts {
        SolveOpts { target, max_steps: 64, max_field: 1 << 20 }
    }
}

struct Segment {
    e: Rat,
    origin: bool,
    /// ā_i for the q-points on the segment, zero elsewhere.
    coeffs: Vec<FFElem>,
    rhs: FFElem,
    i_a: usize,
    count: usize,
}

fn cross(o: &(Rat, Rat), a: &(Rat, Rat), b: &(Rat, Rat)) -> Rat {
    &(&(&a.0 - &o.0) * &(&b.1 - &o.1)) - &(&(&a.1 - &o.1) * &(&b.0 - &o.0))
}

/// Segments of the Newton polygon of ρ + Σ aᵢ y^{pⁱ}, in decreasing root valuation.
fn newton_segments(field: &FieldRef, leads: &[Option<(Rat, FFElem)>], rho: Option<&(Rat, FFElem)>) -> Vec<Segment> {
    let p = field.p() as i64;
    // (x, y, index or None for the constant)
    let mut pts: Vec<(Rat, Rat, Option<usize>, FFElem)> = vec![];
    if let Some((v, c)) = rho {
        pts.push((Rat::zero(), v.clone(), None, *c));
    }
    let mut pw = 1i64;
    for (i, l) in leads.iter().enumerate() {
        if let Some((g, c)) = l {
            pts.push((Rat::int(pw), g.clone(), Some(i), *c));
        }
        pw = pw.saturating_mul(p);
    }
    let mut hull: Vec<usize> = vec![];
    for k in 0..pts.len() {
        while hull.len() >= 2 {
            let o = &pts[hull[hull.len() - 2]];
            let a = &pts[hull[hull.len() - 1]];
            let b = &pts[k];
            if cross(&(o.0.clone(), o.1.clone()), &(a.0.clone(), a.1.clone()), &(b.0.clone(), b.1.clone())) <= Rat::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let mut segs = vec![];
    for w in hull.windows(2) {
        let (a, b) = (&pts[w[0]], &pts[w[1]]);
        let slope = &(&b.1 - &a.1) / &(&b.0 - &a.0);
        let on: Vec<&(Rat, Rat, Option<usize>, FFElem)> =
            pts.iter().filter(|q| q.0 >= a.0 && q.0 <= b.0 && q.1 == &a.1 + &(&slope * &(&q.0 - &a.0))).collect();
        let i_b = b.2.unwrap();
        let mut coeffs = vec![field.zero(); i_b + 1];
        let mut rhs = field.zero();
        let mut i_a = None;
        for q in &on {
            match q.2 {
                Some(i) => {
                    coeffs[i] = q.3;
                    i_a = Some(i_a.map_or(i, |x: usize| x.min(i)));
                }
                None => rhs = field.neg(q.3),
            }
        }
        let i_a = i_a.unwrap();
        let origin = a.2.is_none();
        let pa = (p as usize).pow(i_a as u32);
        let pb = (p as usize).pow(i_b as u32);
        let count = if origin { pb } else { pb - pa };
        segs.push(Segment { e: -slope, origin, coeffs, rhs, i_a, count });
    }
    segs
}

enum Outcome {
    Done(Vec<RootBall>),
    NeedExt(u32),
}

/// Residue-field candidates for a segment, or the extension degree that provides them.
fn candidates(field: &FieldRef, seg: &Segment, max_field: u64) -> Result<Result<Vec<(FFElem, usize)>, u32>, SolveError> {
    let p = field.p() as usize;
    let want = seg.coeffs.len() - 1 - seg.i_a;
    let mult = p.pow(seg.i_a as u32);
    let ok = |f: &FieldRef, coeffs: &[FFElem], rhs: FFElem| -> Result<Option<Vec<FFElem>>, SolveError> {
        match f.additive_solve(coeffs, rhs)? {
            Some((part, basis)) if basis.len() == want => {
                let mut all: Vec<FFElem> = f.span(&basis).into_iter().map(|k| f.add(part, k)).collect();
                if !seg.origin {
                    all.retain(|c| c.0 != 0);
                }
                Ok(Some(all))
            }
            _ => Ok(None),
        }
    };
    if let Some(mut all) = ok(field, &seg.coeffs, seg.rhs)? {
        // residues outside the prime field first, then by packed value
        all.sort_by_key(|c| ((c.0 as u64) < field.p() as u64, c.0));
        return Ok(Ok(all.into_iter().map(|c| (c, mult)).collect()));
    }
    let mut m = 2;
    while field.size().saturating_pow(m) <= max_field {
        let e = extension(field, m)?;
        let coeffs: Vec<FFElem> = seg.coeffs.iter().map(|&c| e.map(c)).collect();
        if ok(&e.to, &coeffs, e.map(seg.rhs))?.is_some() {
            return Ok(Err(m));
        }
        m += 1;
    }
    Err(SolveError::ExtensionCap(field.k() * (m - 1)))
}

struct Branch {
    x: SeriesElem,
    rho: SeriesElem,
    last_e: Option<Rat>,
    mult: usize,
    depth: usize,
}

fn run(q: &OrePoly, n: &SeriesElem, opts: &SolveOpts) -> Result<Outcome, SolveError> {
    let field = q.field().clone();
    let lattice = q.lattice();
    let leads: Vec<Option<(Rat, FFElem)>> = q.coeffs().iter().map(|c| c.leading().cloned()).collect();
    let d = q.degree().ok_or(SolveError::Zero)?;
    let p = field.p() as usize;
    let total = p.pow(d as u32);
    let prof = q.profile();
    let mut out = vec![];
    let mut stack = vec![Branch { x: SeriesElem::zero(&field, lattice), rho: n.neg(), last_e: None, mult: total, depth: 0 }];
    while let Some(b) = stack.pop() {
        let rho_lead = b.rho.leading().cloned();
        let residual = b.rho.v_lb();
        if rho_lead.is_none() && !b.rho.is_exact() {
            // residual hidden below its precision
            let pr = b.rho.prec().finite().unwrap().clone();
            let segs = newton_segments(&field, &leads, None);
            let mut r = DeltaPoint::Fin(ups(&prof, &pr));
            for s in segs.iter().filter(|s| b.last_e.as_ref().map_or(true, |l| s.e > *l)) {
                r = DeltaPoint::min(r, DeltaPoint::Fin(s.e.clone()));
            }
            let status = if r >= DeltaPoint::Fin(opts.target.clone()) { RootStatus::Converged } else { RootStatus::Stalled };
            out.push(RootBall { center: b.x, radius: r, mult: b.mult, status, residual });
            continue;
        }
        let segs: Vec<Segment> = newton_segments(&field, &leads, rho_lead.as_ref())
            .into_iter()
            .filter(|s| b.last_e.as_ref().map_or(true, |l| s.e > *l))
            .collect();
        if b.depth >= opts.max_steps {
            let r = segs.iter().map(|s| DeltaPoint::Fin(s.e.clone())).min().unwrap_or(DeltaPoint::Inf);
            out.push(RootBall { center: b.x, radius: r, mult: b.mult, status: RootStatus::Stalled, residual });
            continue;
        }
        let mut rest = b.mult;
        let mut above: Option<Rat> = None;
        for s in &segs {
            if s.e >= opts.target {
                above = Some(above.map_or(s.e.clone(), |a| Rat::min(a, s.e.clone())));
                continue;
            }
            if !lattice.contains(&s.e) {
                out.push(RootBall {
                    center: b.x.clone(),
                    radius: DeltaPoint::Fin(s.e.clone()),
                    mult: s.count,
                    status: RootStatus::Defect(s.e.clone()),
                    residual: residual.clone(),
                });
                rest -= s.count;
                continue;
            }
            let cands = match candidates(&field, s, opts.max_field)? {
                Ok(c) => c,
                Err(m) => return Ok(Outcome::NeedExt(m)),
            };
            for (c, m) in cands.into_iter().rev() {
                let term = SeriesElem::monomial(&field, lattice, c, s.e.clone());
                let x = b.x.add(&term);
                let rho = b.rho.add(&q.module_apply(&term));
                stack.push(Branch { x, rho, last_e: Some(s.e.clone()), mult: m, depth: b.depth + 1 });
                rest -= m;
            }
        }
        if rest > 0 {
            let radius = match above {
                Some(a) => DeltaPoint::Fin(a),
                None => DeltaPoint::Inf,
            };
            let status = if radius.is_inf() { RootStatus::Exact } else { RootStatus::Converged };
            out.push(RootBall { center: b.x, radius, mult: rest, status, residual });
        }
    }
    Ok(Outcome::Done(out))
}

/// All solutions of x·q = n, up to the target precision, extending the
/// coefficient field when a residue equation needs it.
pub fn solve_affine(q: &OrePoly, n: &SeriesElem, opts: &SolveOpts) -> Result<RootSet, SolveError> {
    if q.is_zero() {
        return Err(SolveError::Zero);
    }
    let mut emb = Embedding::identity(q.field());
    let (mut qq, mut nn) = (q.clone(), n.clone());
    loop {
        match run(&qq, &nn, opts)? {
            Outcome::Done(mut balls) => {
                balls.sort_by(|a, b| b.radius.cmp(&a.radius).then_with(|| a.center.to_string().cmp(&b.center.to_string())));
                return Ok(RootSet { field: qq.field().clone(), embedding: emb, balls });
            }
            Outcome::NeedExt(m) => {
                let e = extension(qq.field(), m)?;
                qq = qq.embed(&e);
                nn = nn.embed(&e);
                emb = emb.compose(&e);
            }
        }
    }
}

/// Roots of x·q = 0 for σ-separable q.
pub fn roots_to_precision(q: &OrePoly, n: &Rat) -> Result<RootSet, SolveError> {
    if q.is_zero() {
        return Err(SolveError::Zero);
    }
    if !q.is_separable() {
        return Err(SolveError::NotSeparable);
    }
    solve_affine(q, &SeriesElem::zero(q.field(), q.lattice()), &SolveOpts::new(n.clone()))
}

/// One solution of x·q = n, following the largest-valuation branch and
/// preferring non-prime-field residues. With n = 0 it returns a nonzero root.
pub fn descend(q: &OrePoly, n: &SeriesElem, opts: &SolveOpts) -> Result<(RootBall, Embedding), SolveError> {
    if q.is_zero() {
        return Err(SolveError::Zero);
    }
    let mut emb = Embedding::identity(q.field());
    let (mut qq, mut nn) = (q.clone(), n.clone());
    'outer: loop {
        let field = qq.field().clone();
        let lattice = qq.lattice();
        let leads: Vec<Option<(Rat, FFElem)>> = qq.coeffs().iter().map(|c| c.leading().cloned()).collect();
        let prof = qq.profile();
        let mut x = SeriesElem::zero(&field, lattice);
        let mut rho = nn.neg();
        let mut last_e: Option<Rat> = None;
        for _ in 0..opts.max_steps {
            let lead = rho.leading().cloned();
            if lead.is_none() {
                if rho.is_exact() && last_e.is_some() {
                    return Ok((RootBall { center: x, radius: DeltaPoint::Inf, mult: 1, status: RootStatus::Exact, residual: DeltaPoint::Inf }, emb));
                }
                if !rho.is_exact() {
                    let pr = rho.prec().finite().unwrap().clone();
                    let r = DeltaPoint::Fin(ups(&prof, &pr));
                    let status = if r >= DeltaPoint::Fin(opts.target.clone()) { RootStatus::Converged } else { RootStatus::Stalled };
                    return Ok((RootBall { center: x, radius: r, mult: 1, status, residual: rho.v_lb() }, emb));
                }
            }
            let segs: Vec<Segment> = newton_segments(&field, &leads, lead.as_ref())
                .into_iter()
                .filter(|s| last_e.as_ref().map_or(true, |l| s.e > *l))
                .collect();
            let Some(s) = segs.into_iter().next() else {
                return Ok((RootBall { center: x, radius: DeltaPoint::Inf, mult: 1, status: RootStatus::Exact, residual: rho.v_lb() }, emb));
            };
            if s.e >= opts.target && last_e.is_some() {
                return Ok((RootBall { center: x, radius: DeltaPoint::Fin(s.e.clone()), mult: s.count, status: RootStatus::Converged, residual: rho.v_lb() }, emb));
            }
            if !lattice.contains(&s.e) {
                return Err(SolveError::Defect(s.e));
            }
            let c = match candidates(&field, &s, opts.max_field)? {
                Ok(c) => c[0].0,
                Err(m) => {
                    let e = extension(&field, m)?;
                    qq = qq.embed(&e);
                    nn = nn.embed(&e);
                    emb = emb.compose(&e);
                    continue 'outer;
                }
            };
            let term = SeriesElem::monomial(&field, lattice, c, s.e.clone());
            x = x.add(&term);
            rho = rho.add(&qq.module_apply(&term));
            last_e = Some(s.e);
        }
        let r = newton_segments(&field, &leads, rho.leading())
            .into_iter()
            .filter(|s| last_e.as_ref().map_or(true, |l| s.e > *l))
            .map(|s| DeltaPoint::Fin(s.e))
            .next()
            .unwrap_or(DeltaPoint::Inf);
        return Ok((RootBall { center: x, radius: r, mult: 1, status: RootStatus::Stalled, residual: rho.v_lb() }, emb));
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinearFactor {
    /// t − f with v(f) ≥ 0.
    MonicRoot(SeriesElem),
    /// t·f′ − 1 with v(f′) > 0.
    UnitRoot(SeriesElem),
    /// A constant with v(c) = 0.
    Constant(SeriesElem),
}

impl LinearFactor {
    pub fn to_poly(&self) -> OrePoly {
        match self {
            LinearFactor::MonicRoot(f) => OrePoly::from_coeffs(f.field(), f.lattice(), vec![f.neg(), SeriesElem::one(f.field(), f.lattice())]),
            LinearFactor::UnitRoot(f) => OrePoly::from_coeffs(f.field(), f.lattice(), vec![SeriesElem::one(f.field(), f.lattice()).neg(), f.clone()]),
            LinearFactor::Constant(c) => OrePoly::constant(c.clone()),
        }
    }

    pub fn payload(&self) -> &SeriesElem {
        match self {
            LinearFactor::MonicRoot(f) | LinearFactor::UnitRoot(f) | LinearFactor::Constant(f) => f,
        }
    }
}

impl fmt::Display for LinearFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_poly())
    }
}

#[derive(Debug, Clone)]
pub struct Factorization {
    pub field: FieldRef,
    pub embedding: Embedding,
    pub factors: Vec<LinearFactor>,
    /// Precision to which the product matches q.
    pub precision: Rat,
}

impl Factorization {
    pub fn product(&self) -> OrePoly {
        let f0 = &self.factors[0];
        let mut acc = OrePoly::one(f0.payload().field(), f0.payload().lattice());
        for f in &self.factors {
            acc = acc.mul(&f.to_poly());
        }
        acc
    }
}

/// Do q and r agree below precision n in every coefficient?
pub fn agrees_to(q: &OrePoly, r: &OrePoly, n: &Rat) -> bool {
    let d = q.coeffs().len().max(r.coeffs().len());
    (0..d).all(|i| {
        let diff = q.coeff(i).sub(&r.coeff(i));
        diff.v_lb() >= DeltaPoint::Fin(n.clone())
    })
}

/// Factor q ∈ ℐ into linear factors in ℐ followed by a unit constant.
pub fn factor_linear(q: &OrePoly, n: &Rat) -> Result<Factorization, SolveError> {
    if q.is_zero() {
        return Err(SolveError::Zero);
    }
    if !q.in_i() {
        return Err(SolveError::NotInI);
    }
    let mut margin = Rat::int(4) + n.abs();
    for _ in 0..5 {
        match factor_attempt(q, &(n + &margin)) {
            Ok(fz) => {
                let target = q.embed(&fz.embedding);
                if agrees_to(&fz.product(), &target, n) {
                    return Ok(Factorization { precision: n.clone(), ..fz });
                }
            }
            Err(SolveError::Stalled(_)) => {}
            Err(e) => return Err(e),
        }
        margin = &margin + &margin;
    }
    Err(SolveError::FactorCheck(n.clone()))
}

fn factor_attempt(q: &OrePoly, work: &Rat) -> Result<Factorization, SolveError> {
    let mut emb = Embedding::identity(q.field());
    let mut g = q.clone();
    let mut factors: Vec<LinearFactor> = vec![];
    while g.deg0() >= 1 {
        if !g.is_separable() {
            // t is a left factor: g = t·g'
            let rest1 = g.coeffs()[1..].to_vec();
            factors.push(LinearFactor::MonicRoot(SeriesElem::zero(g.field(), g.lattice())));
            g = OrePoly::from_coeffs(g.field(), g.lattice(), rest1);
            continue;
        }
        let zero = SeriesElem::zero(g.field(), g.lattice());
        let (ball, e) = descend(&g, &zero, &SolveOpts::new(work.clone()))?;
        if !ball.ok() {
            return Err(SolveError::Stalled(ball.residual));
        }
        if !std::sync::Arc::ptr_eq(&e.to, g.field()) {
            g = g.embed(&e);
            factors = factors.into_iter().map(|f| embed_factor(&f, &e)).collect();
            emb = emb.compose(&e);
        }
        let x = ball.center;
        let p = g.p() as usize;
        let mut f = SeriesElem::one(g.field(), g.lattice());
        for _ in 0..p - 1 {
            f = f.mul(&x);
        }
        let lin = OrePoly::from_coeffs(g.field(), g.lattice(), vec![f.neg(), SeriesElem::one(g.field(), g.lattice())]);
        let (c, r) = g.right_divide(&lin, None)?;
        if r.coeffs().iter().any(|a| a.v_lb() < DeltaPoint::Fin(work.clone())) {
            return Err(SolveError::Stalled(r.coeff(0).v_lb()));
        }
        let vf = f.v()?;
        if vf >= DeltaPoint::Fin(Rat::zero()) {
            factors.push(LinearFactor::MonicRoot(f));
            g = c;
        } else {
            let gap = match &vf {
                DeltaPoint::Fin(v) => v.clone(),
                DeltaPoint::Inf => unreachable!(),
            };
            let finv = f.inv_to(Some(&(work - &gap)))?;
            factors.push(LinearFactor::UnitRoot(finv));
            g = c.scalar_left(&f);
        }
    }
    factors.push(LinearFactor::Constant(g.coeff(0)));
    Ok(Factorization { field: g.field().clone(), embedding: emb, factors, precision: work.clone() })
}

fn embed_factor(f: &LinearFactor, e: &Embedding) -> LinearFactor {
    match f {
        LinearFactor::MonicRoot(x) => LinearFactor::MonicRoot(x.embed(e)),
        LinearFactor::UnitRoot(x) => LinearFactor::UnitRoot(x.embed(e)),
        LinearFactor::Constant(x) => LinearFactor::Constant(x.embed(e)),
    }
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub m: SeriesElem,
    pub embedding: Embedding,
    pub residual: DeltaPoint,
    pub status: RootStatus,
}

/// m with m·q = n and w(m) = Υ(q, w(n)).
pub fn divide_witness(n: &SeriesElem, q: &OrePoly, target: &Rat) -> Result<Witness, SolveError> {
    if q.is_zero() {
        return Err(SolveError::Zero);
    }
    let (f, l) = (q.field().clone(), q.lattice());
    let delta = match n.v()? {
        DeltaPoint::Fin(d) => d,
        DeltaPoint::Inf => {
            return Ok(Witness { m: SeriesElem::zero(&f, l), embedding: Embedding::identity(&f), residual: DeltaPoint::Inf, status: RootStatus::Exact });
        }
    };
    let mu = ups(&q.profile(), &delta);
    if !l.contains(&mu) {
        return Err(SolveError::Defect(mu));
    }
    // q̃ = k_μ·q·k_δ⁻¹ and ñ = n·k_δ⁻¹ reduce to the V₀ case
    let k_mu = SeriesElem::t_pow(&f, l, mu.clone());
    let k_d_inv = SeriesElem::t_pow(&f, l, -&delta);
    let qt = q.scalar_left(&k_mu).scalar_right(&k_d_inv);
    let nt = n.mul(&k_d_inv);
    let rel = target - &mu;
    let (ball, emb) = descend(&qt, &nt, &SolveOpts::new(rel))?;
    let m = ball.center.mul(&k_mu.embed(&emb));
    let m = m.with_prec(ball.radius.shift(&mu));
    let check = q.embed(&emb).module_apply(&ball.center.mul(&k_mu.embed(&emb))).sub(&n.embed(&emb));
    Ok(Witness { m, embedding: emb, residual: check.v_lb(), status: ball.status })
}

/// n with w(m − σ(n)) ≥ δ, by p-th roots of the δ-prefix of m.
pub fn density_witness(m: &SeriesElem, delta: &Rat) -> Result<SeriesElem, SolveError> {
    if let DeltaPoint::Fin(pr) = m.prec() {
        if pr < delta {
            return Err(SolveError::InsufficientPrecision(pr.clone()));
        }
    }
    let prefix: Vec<(Rat, FFElem)> = m.terms().iter().filter(|(e, _)| e < delta).cloned().collect();
    let pre = SeriesElem::from_terms(m.field(), m.lattice(), prefix, DeltaPoint::Inf);
    match pre.sigma_pow(-1) {
        Ok(n) => Ok(n),
        Err(SeriesError::OutsideLattice(e)) => Err(SolveError::Defect(e)),
        Err(e) => Err(e.into()),
    }
}
