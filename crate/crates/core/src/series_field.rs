//! Truncated generalized power series Σ c_e T^e over 𝔽_{p^k}: the concrete
//! valued field. Exponents live in ℚ (perfect model) or ℤ[1/ℓ] (tame model).

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coeff_field::{Embedding, FFElem, FieldRef};
use crate::rat::Rat;
use crate::value_geometry::DeltaPoint;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("cannot invert indistinguishable-from-zero")]
    InvertZero,
    #[error("inverse of a non-monomial with infinite precision needs a target precision")]
    NeedPrecision,
    #[error("lambda index {0} out of range")]
    LambdaIndex(usize),
    #[error("exponent {0} leaves the exponent lattice")]
    OutsideLattice(Rat),
    #[error("valuation unknown below {0}")]
    UnknownValuation(Rat),
    #[error("field mismatch")]
    FieldMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lattice {
    /// ℚ exponents, σ bijective, n = 1 and λ₀ = σ⁻¹.
    Full,
    /// ℤ[1/ℓ] exponents with ℓ coprime to p; p-basis 1, T, …, T^{p−1}.
    Tame(u32),
}

impl Lattice {
    /// Size n of the p-basis.
    pub fn basis_size(&self, p: u32) -> usize {
        match self {
            Lattice::Full => 1,
            Lattice::Tame(_) => p as usize,
        }
    }

    pub fn contains(&self, e: &Rat) -> bool {
        match self {
            Lattice::Full => true,
            Lattice::Tame(l) => {
                let mut d = e.denom();
                let l = BigInt::from(*l);
                if l.is_one() {
                    return d.is_one();
                }
                while (&d % &l).is_zero() {
                    d /= &l;
                }
                d.is_one()
            }
        }
    }

    /// Coset index of e modulo p·lattice (0 for the full kind).
    pub fn coset(&self, p: u32, e: &Rat) -> usize {
        match self {
            Lattice::Full => 0,
            Lattice::Tame(_) => {
                let pb = BigInt::from(p);
                let a = e.numer().mod_floor(&pb);
                let b = e.denom().mod_floor(&pb);
                // b is invertible mod p since ℓ is coprime to p
                let binv = b.modpow(&BigInt::from(p - 2), &pb);
                (a * binv).mod_floor(&pb).to_usize().unwrap()
            }
        }
    }

    pub fn spec(&self) -> String {
        match self {
            Lattice::Full => "full".into(),
            Lattice::Tame(l) => format!("tame:{}", l),
        }
    }

    pub fn from_spec(s: &str) -> Option<Lattice> {
        let s = s.trim();
        if s == "full" {
            return Some(Lattice::Full);
        }
        let l = s.strip_prefix("tame:")?.parse().ok()?;
        Some(Lattice::Tame(l))
    }
}

/// Valuation at the current precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Val {
    Known(Rat),
    /// Exactly zero.
    Zero,
    /// No terms below the precision bound.
    UnknownBelow(Rat),
}

#[derive(Clone)]
pub struct SeriesElem {
    field: FieldRef,
    lattice: Lattice,
    terms: Vec<(Rat, FFElem)>,
    prec: DeltaPoint,
}

impl PartialEq for SeriesElem {
    fn eq(&self, o: &SeriesElem) -> bool {
        self.terms == o.terms && self.prec == o.prec && same_field(&self.field, &o.field)
    }
}
impl Eq for SeriesElem {}

fn same_field(a: &FieldRef, b: &FieldRef) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl SeriesElem {
    pub fn zero(field: &FieldRef, lattice: Lattice) -> SeriesElem {
        SeriesElem { field: field.clone(), lattice, terms: vec![], prec: DeltaPoint::Inf }
    }

    pub fn one(field: &FieldRef, lattice: Lattice) -> SeriesElem {
        SeriesElem::constant(field, lattice, field.one())
    }

    pub fn constant(field: &FieldRef, lattice: Lattice, c: FFElem) -> SeriesElem {
        SeriesElem::monomial(field, lattice, c, Rat::zero())
    }

    pub fn monomial(field: &FieldRef, lattice: Lattice, c: FFElem, e: Rat) -> SeriesElem {
        let terms = if c.0 == 0 { vec![] } else { vec![(e, c)] };
        SeriesElem { field: field.clone(), lattice, terms, prec: DeltaPoint::Inf }
    }

    /// T^e.
    pub fn t_pow(field: &FieldRef, lattice: Lattice, e: Rat) -> SeriesElem {
        SeriesElem::monomial(field, lattice, field.one(), e)
    }

    /// Builds a canonical element: sorted, merged, zero-free, truncated.
    pub fn from_terms(field: &FieldRef, lattice: Lattice, mut terms: Vec<(Rat, FFElem)>, prec: DeltaPoint) -> SeriesElem {
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Rat, FFElem)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            if let DeltaPoint::Fin(n) = &prec {
                if e >= *n {
                    break;
                }
            }
            match out.last_mut() {
                Some(last) if last.0 == e => last.1 = field.add(last.1, c),
                _ => out.push((e, c)),
            }
        }
        out.retain(|(_, c)| c.0 != 0);
        SeriesElem { field: field.clone(), lattice, terms: out, prec }
    }

    pub fn field(&self) -> &FieldRef {
        &self.field
    }
    pub fn lattice(&self) -> Lattice {
        self.lattice
    }
    pub fn terms(&self) -> &[(Rat, FFElem)] {
        &self.terms
    }
    pub fn prec(&self) -> &DeltaPoint {
        &self.prec
    }
    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_inf()
    }

    /// True when no terms are stored (exact zero or indistinguishable from zero).
    pub fn is_termless(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.prec.is_inf()
    }

    pub fn is_one(&self) -> bool {
        self.is_exact() && self.terms.len() == 1 && self.terms[0].0.is_zero() && self.terms[0].1 == self.field.one()
    }

    pub fn is_monomial(&self) -> bool {
        self.is_exact() && self.terms.len() == 1
    }

    pub fn with_prec(&self, n: DeltaPoint) -> SeriesElem {
        let prec = DeltaPoint::min(self.prec.clone(), n);
        SeriesElem::from_terms(&self.field, self.lattice, self.terms.clone(), prec)
    }

    pub fn truncate(&self, n: &Rat) -> SeriesElem {
        self.with_prec(DeltaPoint::Fin(n.clone()))
    }

    pub fn valuation(&self) -> Val {
        match (self.terms.first(), &self.prec) {
            (Some((e, _)), _) => Val::Known(e.clone()),
            (None, DeltaPoint::Inf) => Val::Zero,
            (None, DeltaPoint::Fin(n)) => Val::UnknownBelow(n.clone()),
        }
    }

    /// v(x) when known (+∞ for zero), an error when hidden below precision.
    pub fn v(&self) -> Result<DeltaPoint, SeriesError> {
        match self.valuation() {
            Val::Known(e) => Ok(DeltaPoint::Fin(e)),
            Val::Zero => Ok(DeltaPoint::Inf),
            Val::UnknownBelow(n) => Err(SeriesError::UnknownValuation(n)),
        }
    }

    /// A certain lower bound for the valuation.
    pub fn v_lb(&self) -> DeltaPoint {
        match self.valuation() {
            Val::Known(e) => DeltaPoint::Fin(e),
            Val::Zero => DeltaPoint::Inf,
            Val::UnknownBelow(n) => DeltaPoint::Fin(n),
        }
    }

    pub fn leading(&self) -> Option<&(Rat, FFElem)> {
        self.terms.first()
    }

    pub fn coeff_at(&self, e: &Rat) -> FFElem {
        self.terms.iter().find(|(x, _)| x == e).map(|(_, c)| *c).unwrap_or(FFElem(0))
    }

    pub fn residue(&self) -> Result<FFElem, SeriesError> {
        match self.valuation() {
            Val::Known(e) if e.is_negative() => Err(SeriesError::UnknownValuation(e)),
            Val::UnknownBelow(n) if !n.is_positive() => Err(SeriesError::UnknownValuation(n)),
            _ => Ok(self.coeff_at(&Rat::zero())),
        }
    }

    fn check(&self, o: &SeriesElem) {
        assert!(same_field(&self.field, &o.field), "series over different fields");
    }

    pub fn add(&self, o: &SeriesElem) -> SeriesElem {
        self.check(o);
        let prec = DeltaPoint::min(self.prec.clone(), o.prec.clone());
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        SeriesElem::from_terms(&self.field, self.lattice, terms, prec)
    }

    pub fn neg(&self) -> SeriesElem {
        let f = &self.field;
        SeriesElem {
            field: f.clone(),
            lattice: self.lattice,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), f.neg(*c))).collect(),
            prec: self.prec.clone(),
        }
    }

    pub fn sub(&self, o: &SeriesElem) -> SeriesElem {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &SeriesElem) -> SeriesElem {
        self.check(o);
        let prec = DeltaPoint::min(self.prec_sum(&o.v_lb()), o.prec_sum(&self.v_lb()));
        let f = &self.field;
        let mut terms = Vec::with_capacity(self.terms.len() * o.terms.len());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e = e1 + e2;
                if let DeltaPoint::Fin(n) = &prec {
                    if e >= *n {
                        continue;
                    }
                }
                terms.push((e, f.mul(*c1, *c2)));
            }
        }
        SeriesElem::from_terms(f, self.lattice, terms, prec)
    }

    fn prec_sum(&self, v: &DeltaPoint) -> DeltaPoint {
        match (&self.prec, v) {
            (DeltaPoint::Fin(a), DeltaPoint::Fin(b)) => DeltaPoint::Fin(a + b),
            _ => DeltaPoint::Inf,
        }
    }

    pub fn scale(&self, c: FFElem) -> SeriesElem {
        let f = &self.field;
        let terms = self.terms.iter().map(|(e, x)| (e.clone(), f.mul(*x, c))).collect();
        SeriesElem::from_terms(f, self.lattice, terms, self.prec.clone())
    }

    /// x·T^g.
    pub fn shift(&self, g: &Rat) -> SeriesElem {
        SeriesElem {
            field: self.field.clone(),
            lattice: self.lattice,
            terms: self.terms.iter().map(|(e, c)| (e + g, *c)).collect(),
            prec: self.prec.shift(g),
        }
    }

    /// Inverse; exact for monomials, otherwise to precision min(N − 2γ, target).
    pub fn inv_to(&self, target: Option<&Rat>) -> Result<SeriesElem, SeriesError> {
        let (g, c) = self.terms.first().cloned().ok_or(SeriesError::InvertZero)?;
        let f = &self.field;
        let cinv = f.inv(c);
        if self.terms.len() == 1 && self.prec.is_inf() {
            return Ok(SeriesElem::monomial(f, self.lattice, cinv, -&g));
        }
        let own = match &self.prec {
            DeltaPoint::Fin(n) => Some(n - &(&g + &g)),
            DeltaPoint::Inf => None,
        };
        let n_res = match (own, target) {
            (Some(a), Some(b)) => Rat::min(a, b.clone()),
            (Some(a), None) => a,
            (None, Some(b)) => b.clone(),
            (None, None) => return Err(SeriesError::NeedPrecision),
        };
        let rel = &n_res + &g;
        // y = x/(cT^γ) − 1, v(y) > 0
        let y = self.shift(&-&g).scale(cinv).sub(&SeriesElem::one(f, self.lattice)).neg();
        let one = SeriesElem::one(f, self.lattice).truncate(&rel);
        let mut s = one.clone();
        let mut pw = one;
        loop {
            pw = pw.mul(&y).truncate(&rel);
            if pw.terms.is_empty() {
                break;
            }
            s = s.add(&pw);
        }
        Ok(s.scale(cinv).shift(&-&g))
    }

    pub fn inv(&self) -> Result<SeriesElem, SeriesError> {
        self.inv_to(None)
    }

    /// σ(x): (e, c) ↦ (pe, c^p).
    pub fn frobenius(&self) -> SeriesElem {
        let p = self.p();
        let f = &self.field;
        let pr = Rat::int(p as i64);
        SeriesElem {
            field: f.clone(),
            lattice: self.lattice,
            terms: self.terms.iter().map(|(e, c)| (e * &pr, f.frobenius(*c, 1))).collect(),
            prec: match &self.prec {
                DeltaPoint::Fin(n) => DeltaPoint::Fin(n * &pr),
                DeltaPoint::Inf => DeltaPoint::Inf,
            },
        }
    }

    /// σⁿ(x) for any integer n; negative powers must stay in the lattice.
    pub fn sigma_pow(&self, n: i64) -> Result<SeriesElem, SeriesError> {
        if n == 0 {
            return Ok(self.clone());
        }
        let p = self.p();
        let f = &self.field;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            let e2 = e.scale_pow(p, n);
            if !self.lattice.contains(&e2) {
                return Err(SeriesError::OutsideLattice(e2));
            }
            terms.push((e2, f.frobenius(*c, n)));
        }
        let prec = match &self.prec {
            DeltaPoint::Fin(x) => DeltaPoint::Fin(x.scale_pow(p, n)),
            DeltaPoint::Inf => DeltaPoint::Inf,
        };
        Ok(SeriesElem { field: f.clone(), lattice: self.lattice, terms, prec })
    }

    /// λᵢ(x): the unique yᵢ with x = Σ σ(yᵢ)·Tⁱ.
    pub fn lambda(&self, i: usize) -> Result<SeriesElem, SeriesError> {
        let p = self.p();
        let n = self.lattice.basis_size(p);
        if i >= n {
            return Err(SeriesError::LambdaIndex(i));
        }
        if let Lattice::Full = self.lattice {
            return self.sigma_pow(-1);
        }
        let f = &self.field;
        let ir = Rat::int(i as i64);
        let pr = Rat::int(p as i64);
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| self.lattice.coset(p, e) == i)
            .map(|(e, c)| (&(e - &ir) / &pr, f.frobenius(*c, -1)))
            .collect();
        let prec = match &self.prec {
            DeltaPoint::Fin(x) => DeltaPoint::Fin(&(x - &ir) / &pr),
            DeltaPoint::Inf => DeltaPoint::Inf,
        };
        Ok(SeriesElem::from_terms(f, self.lattice, terms, prec))
    }

    /// λ_{d₁}∘…∘λ_{d_m}(x), outermost index first.
    pub fn lambda_path(&self, path: &[usize]) -> Result<SeriesElem, SeriesError> {
        let mut x = self.clone();
        for &d in path.iter().rev() {
            x = x.lambda(d)?;
        }
        Ok(x)
    }

    /// The basis element c_i = Tⁱ (c₀ = 1).
    pub fn basis(field: &FieldRef, lattice: Lattice, i: usize) -> SeriesElem {
        SeriesElem::t_pow(field, lattice, Rat::int(i as i64))
    }

    pub fn embed(&self, e: &Embedding) -> SeriesElem {
        SeriesElem {
            field: e.to.clone(),
            lattice: self.lattice,
            terms: self.terms.iter().map(|(x, c)| (x.clone(), e.map(*c))).collect(),
            prec: self.prec.clone(),
        }
    }

    pub fn in_lattice(&self) -> bool {
        self.terms.iter().all(|(e, _)| self.lattice.contains(e))
    }

    /// Random element with `n` terms, exponents a/den with a in `lo..hi`.
    pub fn random<R: Rng>(rng: &mut R, field: &FieldRef, lattice: Lattice, n: usize, lo: i64, hi: i64, dens: &[i64]) -> SeriesElem {
        let mut terms = vec![];
        for _ in 0..n {
            let d = dens[rng.gen_range(0..dens.len())];
            let e = Rat::new(rng.gen_range(lo * d..hi * d), d);
            if lattice.contains(&e) {
                terms.push((e, field.random_nonzero(rng)));
            }
        }
        SeriesElem::from_terms(field, lattice, terms, DeltaPoint::Inf)
    }
}

pub fn fmt_exp(e: &Rat) -> String {
    if *e == Rat::one() {
        "T".into()
    } else if e.is_integer() && !e.is_negative() {
        format!("T^{}", e)
    } else {
        format!("T^({})", e)
    }
}

impl fmt::Display for SeriesElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = vec![];
        for (e, c) in &self.terms {
            let cs = self.field.fmt_elem(*c);
            let wrapped = if cs.contains('+') || cs.contains('*') { format!("({})", cs) } else { cs.clone() };
            parts.push(if e.is_zero() {
                wrapped
            } else if *c == self.field.one() {
                fmt_exp(e)
            } else {
                format!("{}*{}", wrapped, fmt_exp(e))
            });
        }
        if let DeltaPoint::Fin(n) = &self.prec {
            parts.push(format!("O({})", fmt_exp(n)));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl fmt::Debug for SeriesElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff_field::FiniteField;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn f2() -> FieldRef {
        FiniteField::get(2, 1).unwrap()
    }
    fn f4() -> FieldRef {
        FiniteField::get(2, 2).unwrap()
    }
    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }
    fn poly(f: &FieldRef, l: Lattice, es: &[(i64, i64)]) -> SeriesElem {
        SeriesElem::from_terms(f, l, es.iter().map(|&(a, b)| (r(a, b), f.one())).collect(), DeltaPoint::Inf)
    }

    #[test]
    fn arithmetic_examples() {
        let f = f2();
        let x = poly(&f, Lattice::Full, &[(0, 1), (1, 1)]);
        assert_eq!(x.mul(&x), poly(&f, Lattice::Full, &[(0, 1), (2, 1)]));
        let inv = x.inv_to(Some(&r(4, 1))).unwrap();
        assert_eq!(inv.to_string(), "1 + T + T^2 + T^3 + O(T^4)");
        assert_eq!(x.add(&SeriesElem::zero(&f, Lattice::Full)), x);
        assert_eq!(SeriesElem::zero(&f, Lattice::Full).truncate(&r(3, 1)).inv(), Err(SeriesError::InvertZero));
    }

    #[test]
    fn frobenius_examples() {
        let f = f4();
        let l = Lattice::Tame(3);
        let t = SeriesElem::t_pow(&f, l, r(1, 1));
        assert_eq!(t.frobenius(), SeriesElem::t_pow(&f, l, r(2, 1)));
        let x = SeriesElem::monomial(&f, l, f.gen(), r(1, 3));
        let w2 = f.mul(f.gen(), f.gen());
        assert_eq!(x.frobenius(), SeriesElem::monomial(&f, l, w2, r(2, 3)));
        assert!(SeriesElem::zero(&f, l).frobenius().is_zero());
    }

    #[test]
    fn lambda_examples() {
        let f = f2();
        let l = Lattice::Tame(1);
        let x = poly(&f, l, &[(1, 1), (2, 1), (3, 1)]);
        assert_eq!(x.lambda(0).unwrap(), poly(&f, l, &[(1, 1)]));
        assert_eq!(x.lambda(1).unwrap(), poly(&f, l, &[(0, 1), (1, 1)]));
        assert!(SeriesElem::zero(&f, l).lambda(1).unwrap().is_zero());
        assert!(x.lambda(2).is_err());
        let l3 = Lattice::Tame(3);
        let y = poly(&f, l3, &[(1, 3)]);
        assert_eq!(y.lambda(1).unwrap(), poly(&f, l3, &[(-1, 3)]));
        assert!(y.lambda(0).unwrap().is_zero());
    }

    #[test]
    fn valuation_examples() {
        let f = f4();
        let l = Lattice::Full;
        assert_eq!(poly(&f, l, &[(3, 1), (5, 1)]).valuation(), Val::Known(r(3, 1)));
        let x = SeriesElem::constant(&f, l, f.gen()).add(&SeriesElem::t_pow(&f, l, r(1, 1)));
        assert_eq!(x.residue().unwrap(), f.gen());
        let y = x.truncate(&r(5, 1));
        assert_eq!(y.sub(&y).valuation(), Val::UnknownBelow(r(5, 1)));
    }

    fn arb(seed: u64, l: Lattice) -> SeriesElem {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f = FiniteField::get(3, 2).unwrap();
        SeriesElem::random(&mut rng, &f, l, 5, -3, 6, &[1, 2, 4])
    }

    proptest! {
        #[test]
        fn lambda_reconstructs(seed in 0u64..5000) {
            let l = Lattice::Tame(2);
            let x = arb(seed, l);
            let mut sum = SeriesElem::zero(x.field(), l);
            for i in 0..3 {
                sum = sum.add(&x.lambda(i).unwrap().frobenius().mul(&SeriesElem::basis(x.field(), l, i)));
            }
            prop_assert_eq!(sum, x);
        }

        #[test]
        fn lambda_additive(a in 0u64..3000, b in 0u64..3000) {
            let l = Lattice::Tame(2);
            let (x, y) = (arb(a, l), arb(b, l));
            for i in 0..3 {
                prop_assert_eq!(x.add(&y).lambda(i).unwrap(), x.lambda(i).unwrap().add(&y.lambda(i).unwrap()));
            }
        }

        #[test]
        fn valuation_axioms(a in 0u64..3000, b in 0u64..3000) {
            let (x, y) = (arb(a, Lattice::Full), arb(b, Lattice::Full));
            prop_assume!(!x.is_zero() && !y.is_zero());
            let (vx, vy) = (x.v().unwrap(), y.v().unwrap());
            let vxy = x.mul(&y).v().unwrap();
            prop_assert_eq!(vxy, DeltaPoint::Fin(vx.finite().unwrap() + vy.finite().unwrap()));
            let s = x.add(&y).v().unwrap();
            prop_assert!(s >= DeltaPoint::min(vx.clone(), vy.clone()));
            if vx != vy {
                prop_assert_eq!(s, DeltaPoint::min(vx.clone(), vy.clone()));
            }
            let vs = x.frobenius().v().unwrap();
            prop_assert_eq!(vs.clone(), crate::value_geometry::tau(3, &vx, 1));
            if vx > DeltaPoint::Fin(Rat::zero()) {
                prop_assert!(vs > vx);
            }
        }

        #[test]
        fn precision_prefix(a in 0u64..3000, b in 0u64..3000, n in 2i64..9) {
            let (x, y) = (arb(a, Lattice::Full), arb(b, Lattice::Full));
            let lo = x.truncate(&Rat::int(n)).mul(&y.truncate(&Rat::int(n)));
            let hi = x.mul(&y);
            for (e, c) in lo.terms() {
                prop_assert_eq!(hi.coeff_at(e), *c);
            }
            prop_assert_eq!(hi.with_prec(lo.prec().clone()), lo);
        }

        #[test]
        fn inverse_is_inverse(a in 0u64..3000) {
            let x = arb(a, Lattice::Full);
            prop_assume!(!x.is_zero());
            let n = Rat::int(8);
            let y = x.inv_to(Some(&n)).unwrap();
            let prod = x.mul(&y);
            let g = x.v().unwrap().finite().unwrap().clone();
            let expect = SeriesElem::one(x.field(), Lattice::Full).with_prec(prod.prec().clone());
            prop_assert_eq!(prod.clone(), expect);
            prop_assert!(*prod.prec() >= DeltaPoint::Fin(&n + &g));
        }
    }
}
