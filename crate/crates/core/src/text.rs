//! Shared tokenizer and expression parser for series and Ore polynomials.
//!
//! Grammar (whitespace ignored):
//! ```text
//! sum     := ['-'] product (('+' | '-') product)*
//! product := factor ('*' factor)*
//! factor  := primary ['^' exponent]
//! primary := 't' | 'T' | 'w' | integer | 'O(' 'T' ['^' exponent] ')' | '(' sum ')'
//! ```

use crate::coeff_field::FieldRef;
use crate::ore_poly::OrePoly;
use crate::rat::Rat;
use crate::series_field::{Lattice, SeriesElem};
use crate::value_geometry::DeltaPoint;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at offset {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

pub struct Cursor<'a> {
    chars: Vec<char>,
    pub pos: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str) -> Cursor<'a> {
        Cursor { chars: src.chars().collect(), pos: 0, _src: src }
    }

    pub fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    pub fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    pub fn peek_at(&mut self, k: usize) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos + k).copied()
    }

    pub fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    pub fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn eat_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        let n = s.chars().count();
        if self.chars.len() >= self.pos + n && self.chars[self.pos..self.pos + n].iter().copied().eq(s.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected {:?}", c)))
        }
    }

    pub fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    pub fn err(&self, msg: &str) -> ParseError {
        ParseError { pos: self.pos, msg: msg.to_string() }
    }

    /// An identifier [a-zA-Z_][a-zA-Z0-9_]*, without consuming it.
    pub fn peek_ident(&mut self) -> Option<String> {
        self.skip_ws();
        let mut i = self.pos;
        let mut s = String::new();
        while let Some(&c) = self.chars.get(i) {
            if c.is_ascii_alphanumeric() || c == '_' {
                if s.is_empty() && c.is_ascii_digit() {
                    break;
                }
                s.push(c);
                i += 1;
            } else {
                break;
            }
        }
        if s.is_empty() {
            None
        } else {
            Some(s)
        }
    }

    pub fn take_ident(&mut self) -> Option<String> {
        let s = self.peek_ident()?;
        self.pos += s.chars().count();
        Some(s)
    }

    pub fn digits(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some(self.chars[start..self.pos].iter().collect())
        }
    }

    /// A rational "a", "-a", "a/b" (no parentheses).
    pub fn rational(&mut self) -> Result<Rat, ParseError> {
        let neg = self.eat('-');
        let n = self.digits().ok_or_else(|| self.err("expected a number"))?;
        let mut s = if neg { format!("-{}", n) } else { n };
        if self.eat('/') {
            let d = self.digits().ok_or_else(|| self.err("expected a denominator"))?;
            s = format!("{}/{}", s, d);
        }
        s.parse().map_err(|_| self.err("bad rational"))
    }

    /// Exponent after '^': an integer or a parenthesized rational.
    pub fn exponent(&mut self) -> Result<Rat, ParseError> {
        if self.eat('(') {
            let r = self.rational()?;
            self.expect(')')?;
            Ok(r)
        } else {
            let n = self.digits().ok_or_else(|| self.err("expected an exponent"))?;
            n.parse().map_err(|_| self.err("bad exponent"))
        }
    }
}

/// Parsing context: the coefficient field and exponent lattice.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub field: FieldRef,
    pub lattice: Lattice,
}

impl Ctx {
    pub fn new(field: FieldRef, lattice: Lattice) -> Ctx {
        Ctx { field, lattice }
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn zero_poly(&self) -> OrePoly {
        OrePoly::zero(&self.field, self.lattice)
    }

    pub fn series_zero(&self) -> SeriesElem {
        SeriesElem::zero(&self.field, self.lattice)
    }

    pub fn parse_ore(&self, s: &str) -> Result<OrePoly, ParseError> {
        let mut c = Cursor::new(s);
        let q = parse_sum(&mut c, self)?;
        if !c.at_end() {
            return Err(c.err("trailing input"));
        }
        Ok(q)
    }

    pub fn parse_series(&self, s: &str) -> Result<SeriesElem, ParseError> {
        let q = self.parse_ore(s)?;
        if q.deg0() > 0 {
            return Err(ParseError { pos: 0, msg: "series literal contains t".into() });
        }
        Ok(q.coeff(0))
    }
}

pub fn parse_sum(c: &mut Cursor, ctx: &Ctx) -> Result<OrePoly, ParseError> {
    let mut neg = c.eat('-');
    let mut acc = ctx.zero_poly();
    loop {
        let t = parse_product(c, ctx)?;
        acc = if neg { acc.sub(&t) } else { acc.add(&t) };
        if c.eat('+') {
            neg = false;
        } else if c.eat('-') {
            neg = true;
        } else {
            return Ok(acc);
        }
    }
}

pub fn parse_product(c: &mut Cursor, ctx: &Ctx) -> Result<OrePoly, ParseError> {
    let mut acc = parse_factor(c, ctx)?;
    while c.peek() == Some('*') {
        c.bump();
        let f = parse_factor(c, ctx)?;
        acc = acc.mul(&f);
    }
    Ok(acc)
}

/// Can a factor start here?
pub fn factor_starts(c: &mut Cursor) -> bool {
    match c.peek() {
        Some('(') => true,
        Some(ch) if ch.is_ascii_digit() => true,
        Some('O') => c.peek_at(1) == Some('('),
        Some(_) => matches!(c.peek_ident().as_deref(), Some("t") | Some("T") | Some("w")),
        None => false,
    }
}

pub fn parse_factor(c: &mut Cursor, ctx: &Ctx) -> Result<OrePoly, ParseError> {
    let (f, l) = (&ctx.field, ctx.lattice);
    if c.eat('(') {
        let inner = parse_sum(c, ctx)?;
        c.expect(')')?;
        if c.eat('^') {
            let e = c.exponent()?;
            let n = e.to_i64().filter(|n| *n >= 0).ok_or_else(|| c.err("power must be a natural number"))?;
            let mut acc = OrePoly::one(f, l);
            for _ in 0..n {
                acc = acc.mul(&inner);
            }
            return Ok(acc);
        }
        return Ok(inner);
    }
    if let Some(d) = c.digits() {
        let n: i64 = d.parse().map_err(|_| c.err("integer too large"))?;
        return Ok(OrePoly::constant(SeriesElem::constant(f, l, f.from_int(n))));
    }
    if c.peek() == Some('O') && c.peek_at(1) == Some('(') {
        c.bump();
        c.bump();
        if c.take_ident().as_deref() != Some("T") {
            return Err(c.err("expected T inside O(..)"));
        }
        let e = if c.eat('^') { c.exponent()? } else { Rat::one() };
        c.expect(')')?;
        return Ok(OrePoly::constant(SeriesElem::zero(f, l).with_prec(DeltaPoint::Fin(e))));
    }
    match c.peek_ident().as_deref() {
        Some("t") => {
            c.take_ident();
            let n = if c.eat('^') { c.exponent()? } else { Rat::one() };
            let n = n.to_i64().filter(|n| *n >= 0).ok_or_else(|| c.err("t power must be natural"))?;
            Ok(OrePoly::t_pow(f, l, n as usize))
        }
        Some("T") => {
            c.take_ident();
            let e = if c.eat('^') { c.exponent()? } else { Rat::one() };
            if !l.contains(&e) {
                return Err(c.err("exponent outside the lattice"));
            }
            Ok(OrePoly::constant(SeriesElem::t_pow(f, l, e)))
        }
        Some("w") => {
            c.take_ident();
            let n = if c.eat('^') { c.exponent()? } else { Rat::one() };
            let n = n.to_i64().filter(|n| *n >= 0).ok_or_else(|| c.err("w power must be natural"))?;
            let g = f.gen();
            let mut acc = f.one();
            for _ in 0..n {
                acc = f.mul(acc, g);
            }
            Ok(OrePoly::constant(SeriesElem::constant(f, l, acc)))
        }
        _ => Err(c.err("expected t, T, w, a number or '('")),
    }
}
