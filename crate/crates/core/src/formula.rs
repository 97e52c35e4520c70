//! Terms, atoms and positive-primitive formulas of the valued-module language,
//! with a parser, a canonical printer and λ-normalization.
//!
//! Surface syntax:
//! ```text
//! formula := ['E' var+ '.'] conj | 'true' | 'false'
//! conj    := atom ('&' atom)*
//! atom    := term '=' term | term '=[' q ']' term | term '≡[' q ']' term | 'V[' q ']' '(' term ')'
//! term    := ['-'] mono (('+' | '-') mono)*
//! mono    := ['L' i('.' i)* '('] var [')'] ['*' product] | series-product
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::coeff_field::FieldRef;
use crate::ore_poly::OrePoly;
use crate::rat::Rat;
use crate::series_field::{Lattice, SeriesElem, SeriesError, Val};
use crate::text::{parse_product, Ctx, Cursor, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tri {
    True,
    False,
    Unknown,
}

impl Tri {
    pub fn and(self, o: Tri) -> Tri {
        match (self, o) {
            (Tri::False, _) | (_, Tri::False) => Tri::False,
            (Tri::True, Tri::True) => Tri::True,
            _ => Tri::Unknown,
        }
    }

    pub fn from_bool(b: bool) -> Tri {
        if b {
            Tri::True
        } else {
            Tri::False
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mono {
    pub var: String,
    pub path: Vec<usize>,
    pub coeff: OrePoly,
}

/// Σ λ_path(var)·coeff + constant.
#[derive(Clone, PartialEq, Eq)]
pub struct Term {
    field: FieldRef,
    lattice: Lattice,
    monos: Vec<Mono>,
    constant: SeriesElem,
}

impl Term {
    pub fn zero(field: &FieldRef, lattice: Lattice) -> Term {
        Term { field: field.clone(), lattice, monos: vec![], constant: SeriesElem::zero(field, lattice) }
    }

    pub fn constant(c: SeriesElem) -> Term {
        let mut t = Term::zero(&c.field().clone(), c.lattice());
        t.constant = c;
        t
    }

    pub fn mono(var: &str, path: Vec<usize>, coeff: OrePoly) -> Term {
        let (f, l) = (coeff.field().clone(), coeff.lattice());
        let mut t = Term::zero(&f, l);
        if !coeff.is_zero() {
            t.monos.push(Mono { var: var.to_string(), path, coeff });
        }
        t
    }

    pub fn var(field: &FieldRef, lattice: Lattice, name: &str) -> Term {
        Term::mono(name, vec![], OrePoly::one(field, lattice))
    }

    pub fn field(&self) -> &FieldRef {
        &self.field
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn monos(&self) -> &[Mono] {
        &self.monos
    }

    pub fn constant_part(&self) -> &SeriesElem {
        &self.constant
    }

    pub fn is_zero(&self) -> bool {
        self.monos.is_empty() && self.constant.is_zero()
    }

    /// No variables at all.
    pub fn is_closed(&self) -> bool {
        self.monos.is_empty()
    }

    fn from_parts(field: &FieldRef, lattice: Lattice, monos: Vec<Mono>, constant: SeriesElem) -> Term {
        let mut map: BTreeMap<(String, Vec<usize>), OrePoly> = BTreeMap::new();
        for m in monos {
            let key = (m.var, m.path);
            let c = match map.remove(&key) {
                Some(old) => old.add(&m.coeff),
                None => m.coeff,
            };
            map.insert(key, c);
        }
        let monos = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((var, path), coeff)| Mono { var, path, coeff })
            .collect();
        Term { field: field.clone(), lattice, monos, constant }
    }

    pub fn add(&self, o: &Term) -> Term {
        let mut m = self.monos.clone();
        m.extend(o.monos.iter().cloned());
        Term::from_parts(&self.field, self.lattice, m, self.constant.add(&o.constant))
    }

    pub fn neg(&self) -> Term {
        let m = self.monos.iter().map(|x| Mono { coeff: x.coeff.neg(), ..x.clone() }).collect();
        Term::from_parts(&self.field, self.lattice, m, self.constant.neg())
    }

    pub fn sub(&self, o: &Term) -> Term {
        self.add(&o.neg())
    }

    /// Right multiplication by an Ore polynomial.
    pub fn mul_poly(&self, q: &OrePoly) -> Term {
        let m = self.monos.iter().map(|x| Mono { coeff: x.coeff.mul(q), ..x.clone() }).collect();
        Term::from_parts(&self.field, self.lattice, m, q.module_apply(&self.constant))
    }

    pub fn mul_scalar(&self, mu: &SeriesElem) -> Term {
        self.mul_poly(&OrePoly::constant(mu.clone()))
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.monos.iter().map(|m| m.var.clone()).collect()
    }

    pub fn has_var(&self, v: &str) -> bool {
        self.monos.iter().any(|m| m.var == v)
    }

    /// Longest λ-path applied to `v`.
    pub fn lambda_depth(&self, v: &str) -> usize {
        self.monos.iter().filter(|m| m.var == v).map(|m| m.path.len()).max().unwrap_or(0)
    }

    /// (coefficient of the bare variable v, remaining term). None when v occurs under λ.
    pub fn split_var(&self, v: &str) -> Option<(OrePoly, Term)> {
        let mut c = OrePoly::zero(&self.field, self.lattice);
        let mut rest = vec![];
        for m in &self.monos {
            if m.var == v {
                if !m.path.is_empty() {
                    return None;
                }
                c = c.add(&m.coeff);
            } else {
                rest.push(m.clone());
            }
        }
        Some((c, Term::from_parts(&self.field, self.lattice, rest, self.constant.clone())))
    }

    /// λ_k pushed through sums and right multiplications.
    pub fn lambda(&self, k: usize) -> Result<Term, SeriesError> {
        let n = self.lattice.basis_size(self.field.p());
        let mut out = vec![];
        for m in &self.monos {
            // λ_k(y·q) = Σ_j λ_j(y)·Λ_k(c_j·q)
            for j in 0..n {
                let cj = SeriesElem::basis(&self.field, self.lattice, j);
                let c = m.coeff.scalar_left(&cj).lambda_coeffwise(&[k])?;
                let mut path = vec![j];
                path.extend(m.path.iter().copied());
                out.push(Mono { var: m.var.clone(), path, coeff: c });
            }
        }
        let t = Term::from_parts(&self.field, self.lattice, out, self.constant.lambda(k)?);
        Ok(t.collapse())
    }

    /// λ_{d₁}∘…∘λ_{d_m}.
    pub fn lambda_path(&self, path: &[usize]) -> Result<Term, SeriesError> {
        let mut t = self.clone();
        for &d in path.iter().rev() {
            t = t.lambda(d)?;
        }
        Ok(t)
    }

    /// Folds Σ_j λ_{[j]+rest}(y)·t·c_j·X back into λ_rest(y)·X.
    pub fn collapse(&self) -> Term {
        let n = self.lattice.basis_size(self.field.p());
        let mut cur = self.clone();
        loop {
            let mut groups: BTreeMap<(String, Vec<usize>), Vec<Option<OrePoly>>> = BTreeMap::new();
            for m in &cur.monos {
                if m.path.is_empty() {
                    continue;
                }
                let key = (m.var.clone(), m.path[1..].to_vec());
                let slot = groups.entry(key).or_insert_with(|| vec![None; n]);
                slot[m.path[0]] = strip_tc(&m.coeff, &SeriesElem::basis(&self.field, self.lattice, m.path[0]));
            }
            let hit = groups.into_iter().find_map(|(key, xs)| {
                let first = xs[0].clone()?;
                if xs.iter().all(|x| x.as_ref() == Some(&first)) {
                    Some((key, first))
                } else {
                    None
                }
            });
            let Some(((var, rest), x)) = hit else {
                return cur;
            };
            let mut monos: Vec<Mono> =
                cur.monos.iter().filter(|m| !(m.var == var && m.path.len() == rest.len() + 1 && m.path[1..] == rest[..])).cloned().collect();
            monos.push(Mono { var, path: rest, coeff: x });
            cur = Term::from_parts(&cur.field, cur.lattice, monos, cur.constant.clone());
        }
    }

    /// Replaces the variable v (bare or under λ) by a term.
    pub fn substitute(&self, v: &str, repl: &Term) -> Result<Term, SeriesError> {
        let mut out = Term::from_parts(&self.field, self.lattice, vec![], self.constant.clone());
        for m in &self.monos {
            if m.var == v {
                out = out.add(&repl.lambda_path(&m.path)?.mul_poly(&m.coeff));
            } else {
                out = out.add(&Term::mono(&m.var, m.path.clone(), m.coeff.clone()));
            }
        }
        Ok(out)
    }

    pub fn rename(&self, from: &str, to: &str) -> Term {
        let m = self.monos.iter().map(|x| if x.var == from { Mono { var: to.to_string(), ..x.clone() } } else { x.clone() }).collect();
        Term::from_parts(&self.field, self.lattice, m, self.constant.clone())
    }

    pub fn eval(&self, assign: &BTreeMap<String, SeriesElem>) -> Result<SeriesElem, EvalError> {
        let mut acc = self.constant.clone();
        for m in &self.monos {
            let x = assign.get(&m.var).ok_or_else(|| EvalError::Unassigned(m.var.clone()))?;
            acc = acc.add(&m.coeff.module_apply(&x.lambda_path(&m.path)?));
        }
        Ok(acc)
    }
}

/// X with C = t·c·X, if C has that shape.
fn strip_tc(c: &OrePoly, cj: &SeriesElem) -> Option<OrePoly> {
    if c.coeffs().is_empty() || !c.coeffs()[0].is_zero() {
        return None;
    }
    let y = OrePoly::from_coeffs(c.field(), c.lattice(), c.coeffs()[1..].to_vec());
    Some(y.scalar_left(&cj.inv().ok()?))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("no value for variable {0}")]
    Unassigned(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomKind {
    Eq,
    Cong(Rat),
}

/// Eq: term = 0; Cong(δ): V_δ(term).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub kind: AtomKind,
    pub term: Term,
}

impl Atom {
    pub fn eq(term: Term) -> Atom {
        Atom { kind: AtomKind::Eq, term }
    }

    pub fn cong(delta: Rat, term: Term) -> Atom {
        Atom { kind: AtomKind::Cong(delta), term }
    }

    /// Truth of a closed term's atom, three-valued under finite precision.
    pub fn holds_value(&self, x: &SeriesElem) -> Tri {
        match (&self.kind, x.valuation()) {
            (_, Val::Zero) => Tri::True,
            (AtomKind::Eq, Val::Known(_)) => Tri::False,
            (AtomKind::Eq, Val::UnknownBelow(_)) => Tri::Unknown,
            (AtomKind::Cong(d), Val::Known(e)) => Tri::from_bool(&e >= d),
            (AtomKind::Cong(d), Val::UnknownBelow(n)) => {
                if &n >= d {
                    Tri::True
                } else {
                    Tri::Unknown
                }
            }
        }
    }

    pub fn eval(&self, assign: &BTreeMap<String, SeriesElem>) -> Result<Tri, EvalError> {
        Ok(self.holds_value(&self.term.eval(assign)?))
    }

    pub fn map_term<F: FnOnce(&Term) -> Term>(&self, f: F) -> Atom {
        Atom { kind: self.kind.clone(), term: f(&self.term) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PPFormula {
    pub bound: Vec<String>,
    pub atoms: Vec<Atom>,
}

impl PPFormula {
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut s: BTreeSet<String> = self.atoms.iter().flat_map(|a| a.term.vars()).collect();
        for b in &self.bound {
            s.remove(b);
        }
        s
    }

    /// Drops bound variables that do not occur.
    pub fn prune(mut self) -> PPFormula {
        let used: BTreeSet<String> = self.atoms.iter().flat_map(|a| a.term.vars()).collect();
        self.bound.retain(|b| used.contains(b));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QFFormula {
    pub atoms: Vec<Atom>,
    /// A closed atom evaluated to false.
    pub falsum: bool,
    pub index_note: String,
}

impl QFFormula {
    pub fn truth() -> QFFormula {
        QFFormula { atoms: vec![], falsum: false, index_note: String::new() }
    }

    /// Folds closed atoms into the truth constant and drops duplicates.
    pub fn from_atoms(atoms: Vec<Atom>) -> QFFormula {
        let mut out: Vec<Atom> = vec![];
        let mut falsum = false;
        for a in atoms {
            if a.term.is_closed() && a.term.constant_part().is_exact() {
                if a.holds_value(a.term.constant_part()) == Tri::False {
                    falsum = true;
                }
                continue;
            }
            if !out.contains(&a) {
                out.push(a);
            }
        }
        if falsum {
            out.clear();
        }
        QFFormula { atoms: out, falsum, index_note: String::new() }
    }

    pub fn eval(&self, assign: &BTreeMap<String, SeriesElem>) -> Result<Tri, EvalError> {
        if self.falsum {
            return Ok(Tri::False);
        }
        let mut acc = Tri::True;
        for a in &self.atoms {
            acc = acc.and(a.eval(assign)?);
        }
        Ok(acc)
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.atoms.iter().flat_map(|a| a.term.vars()).collect()
    }
}

// ---------------------------------------------------------------- printing

fn fmt_path(path: &[usize]) -> String {
    path.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(".")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = vec![];
        for m in &self.monos {
            let v = if m.path.is_empty() { m.var.clone() } else { format!("L{}({})", fmt_path(&m.path), m.var) };
            if m.coeff.is_one() {
                parts.push(v);
            } else {
                parts.push(format!("{}*({})", v, m.coeff));
            }
        }
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push(format!("({})", self.constant));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term[{}]", self)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            AtomKind::Eq => write!(f, "{} = 0", self.term),
            AtomKind::Cong(d) => write!(f, "V[{}]({})", d, self.term),
        }
    }
}

impl fmt::Display for PPFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.bound.is_empty() {
            write!(f, "E {} . ", self.bound.join(" "))?;
        }
        if self.atoms.is_empty() {
            return write!(f, "true");
        }
        write!(f, "{}", self.atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" & "))
    }
}

impl fmt::Display for QFFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.falsum {
            return write!(f, "false");
        }
        if self.atoms.is_empty() {
            return write!(f, "true");
        }
        write!(f, "{}", self.atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" & "))
    }
}

// ---------------------------------------------------------------- parsing

const RESERVED: &[&str] = &["t", "T", "w", "E", "V", "O", "true", "false"];

fn is_lambda_ident(s: &str) -> bool {
    s.len() > 1 && s.starts_with('L') && s[1..].chars().all(|c| c.is_ascii_digit())
}

fn parse_var(c: &mut Cursor) -> Result<String, ParseError> {
    let save = c.pos;
    match c.take_ident() {
        Some(v) if !RESERVED.contains(&v.as_str()) && !is_lambda_ident(&v) => Ok(v),
        _ => {
            c.pos = save;
            Err(c.err("expected a variable name"))
        }
    }
}

fn parse_mono(c: &mut Cursor, ctx: &Ctx) -> Result<Term, ParseError> {
    if let Some(id) = c.peek_ident() {
        if is_lambda_ident(&id) {
            c.take_ident();
            let mut path: Vec<usize> = vec![id[1..].parse().map_err(|_| c.err("bad λ index"))?];
            while c.eat('.') {
                let d = c.digits().ok_or_else(|| c.err("expected a λ index"))?;
                path.push(d.parse().map_err(|_| c.err("bad λ index"))?);
            }
            let n = ctx.lattice.basis_size(ctx.p());
            if path.iter().any(|&d| d >= n) {
                return Err(c.err(&format!("λ index out of range (basis size {})", n)));
            }
            c.expect('(')?;
            let v = parse_var(c)?;
            c.expect(')')?;
            return finish_var(c, ctx, v, path);
        }
        let is_o = id == "O" && c.peek_at(1) == Some('(');
        if !RESERVED.contains(&id.as_str()) && !is_o {
            let v = parse_var(c)?;
            return finish_var(c, ctx, v, vec![]);
        }
    }
    let q = parse_product(c, ctx)?;
    if q.deg0() > 0 {
        return Err(c.err("a constant term may not contain t"));
    }
    Ok(Term::constant(q.coeff(0)))
}

fn finish_var(c: &mut Cursor, ctx: &Ctx, v: String, path: Vec<usize>) -> Result<Term, ParseError> {
    let coeff = if c.eat('*') { parse_product(c, ctx)? } else { OrePoly::one(&ctx.field, ctx.lattice) };
    Ok(Term::mono(&v, path, coeff))
}

pub fn parse_term_at(c: &mut Cursor, ctx: &Ctx) -> Result<Term, ParseError> {
    let mut neg = c.eat('-');
    let mut acc = Term::zero(&ctx.field, ctx.lattice);
    loop {
        let m = parse_mono(c, ctx)?;
        acc = if neg { acc.sub(&m) } else { acc.add(&m) };
        if c.eat('+') {
            neg = false;
        } else if c.peek() == Some('-') {
            c.bump();
            neg = true;
        } else {
            return Ok(acc);
        }
    }
}

fn bracket_delta(c: &mut Cursor) -> Result<Rat, ParseError> {
    c.expect('[')?;
    let d = c.rational()?;
    c.expect(']')?;
    Ok(d)
}

fn parse_atom(c: &mut Cursor, ctx: &Ctx) -> Result<Atom, ParseError> {
    if c.peek_ident().as_deref() == Some("V") && c.peek_at(1) == Some('[') {
        c.take_ident();
        let d = bracket_delta(c)?;
        c.expect('(')?;
        let t = parse_term_at(c, ctx)?;
        c.expect(')')?;
        return Ok(Atom::cong(d, t));
    }
    let lhs = parse_term_at(c, ctx)?;
    if c.eat('≡') {
        let d = bracket_delta(c)?;
        let rhs = parse_term_at(c, ctx)?;
        return Ok(Atom::cong(d, lhs.sub(&rhs)));
    }
    c.expect('=')?;
    if c.peek() == Some('[') {
        let d = bracket_delta(c)?;
        let rhs = parse_term_at(c, ctx)?;
        return Ok(Atom::cong(d, lhs.sub(&rhs)));
    }
    let rhs = parse_term_at(c, ctx)?;
    Ok(Atom::eq(lhs.sub(&rhs)))
}

fn parse_conj(c: &mut Cursor, ctx: &Ctx) -> Result<Vec<Atom>, ParseError> {
    if c.peek_ident().as_deref() == Some("true") {
        c.take_ident();
        return Ok(vec![]);
    }
    let mut atoms = vec![parse_atom(c, ctx)?];
    while c.eat('&') {
        atoms.push(parse_atom(c, ctx)?);
    }
    Ok(atoms)
}

pub fn parse_pp(src: &str, ctx: &Ctx) -> Result<PPFormula, ParseError> {
    let mut c = Cursor::new(src);
    let mut bound = vec![];
    if c.peek_ident().as_deref() == Some("E") {
        c.take_ident();
        while !c.eat('.') {
            if c.eat(',') {
                continue;
            }
            let v = parse_var(&mut c)?;
            if bound.contains(&v) {
                return Err(c.err(&format!("variable {} bound twice", v)));
            }
            bound.push(v);
        }
    }
    let atoms = parse_conj(&mut c, ctx)?;
    if !c.at_end() {
        return Err(c.err("trailing input"));
    }
    Ok(PPFormula { bound, atoms })
}

pub fn parse_qf(src: &str, ctx: &Ctx) -> Result<QFFormula, ParseError> {
    let mut c = Cursor::new(src);
    if c.peek_ident().as_deref() == Some("false") {
        c.take_ident();
        if !c.at_end() {
            return Err(c.err("trailing input"));
        }
        return Ok(QFFormula { atoms: vec![], falsum: true, index_note: String::new() });
    }
    let atoms = parse_conj(&mut c, ctx)?;
    if !c.at_end() {
        return Err(c.err("trailing input"));
    }
    Ok(QFFormula { atoms, falsum: false, index_note: String::new() })
}

pub fn parse_term(src: &str, ctx: &Ctx) -> Result<Term, ParseError> {
    let mut c = Cursor::new(src);
    let t = parse_term_at(&mut c, ctx)?;
    if !c.at_end() {
        return Err(c.err("trailing input"));
    }
    Ok(t)
}
