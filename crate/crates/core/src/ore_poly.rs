//! The skew polynomial ring K[t;σ] with coefficients on the right:
//! q = Σ tⁱ·aᵢ and a·t = t·σ(a).

use std::collections::BTreeMap;
use std::fmt;

use crate::coeff_field::{Embedding, FieldRef};
use crate::rat::Rat;
use crate::series_field::{Lattice, SeriesElem, SeriesError, Val};
use crate::value_geometry::{DeltaPoint, ValueProfile};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OreError {
    #[error("division by the zero polynomial")]
    DivByZero,
    #[error("degree precondition violated: deg {0} < deg {1}")]
    Degree(usize, usize),
    #[error("coefficients must be integral")]
    NotIntegral,
    #[error("zero polynomial")]
    Zero,
    #[error("division identity failed to re-check")]
    IdentityFailed,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Clone, PartialEq, Eq)]
pub struct OrePoly {
    field: FieldRef,
    lattice: Lattice,
    coeffs: Vec<SeriesElem>,
}

/// Output of the generalized right division: q₁·scale = q₂·quot + rem.
#[derive(Debug, Clone)]
pub struct GenDiv {
    pub scale: SeriesElem,
    pub steps: usize,
    pub quot: OrePoly,
    pub rem: OrePoly,
}

impl OrePoly {
    pub fn from_coeffs(field: &FieldRef, lattice: Lattice, mut coeffs: Vec<SeriesElem>) -> OrePoly {
        while coeffs.last().map(|c| c.is_termless()).unwrap_or(false) {
            coeffs.pop();
        }
        OrePoly { field: field.clone(), lattice, coeffs }
    }

    pub fn zero(field: &FieldRef, lattice: Lattice) -> OrePoly {
        OrePoly { field: field.clone(), lattice, coeffs: vec![] }
    }

    pub fn constant(a: SeriesElem) -> OrePoly {
        let (f, l) = (a.field().clone(), a.lattice());
        OrePoly::from_coeffs(&f, l, vec![a])
    }

    pub fn one(field: &FieldRef, lattice: Lattice) -> OrePoly {
        OrePoly::constant(SeriesElem::one(field, lattice))
    }

    /// tⁱ·a.
    pub fn monomial(i: usize, a: SeriesElem) -> OrePoly {
        let (f, l) = (a.field().clone(), a.lattice());
        let mut c = vec![SeriesElem::zero(&f, l); i];
        c.push(a);
        OrePoly::from_coeffs(&f, l, c)
    }

    pub fn t_pow(field: &FieldRef, lattice: Lattice, i: usize) -> OrePoly {
        OrePoly::monomial(i, SeriesElem::one(field, lattice))
    }

    pub fn field(&self) -> &FieldRef {
        &self.field
    }
    pub fn lattice(&self) -> Lattice {
        self.lattice
    }
    pub fn p(&self) -> u32 {
        self.field.p()
    }
    pub fn coeffs(&self) -> &[SeriesElem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> SeriesElem {
        self.coeffs.get(i).cloned().unwrap_or_else(|| SeriesElem::zero(&self.field, self.lattice))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial counted as 0.
    pub fn deg0(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lead(&self) -> Option<&SeriesElem> {
        self.coeffs.last()
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_exact())
    }

    /// σ-separable: nonzero constant term.
    pub fn is_separable(&self) -> bool {
        self.coeffs.first().map(|c| !c.is_termless()).unwrap_or(false)
    }

    /// Is this a degree-0 polynomial equal to 1?
    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn profile(&self) -> ValueProfile {
        let entries = self
            .coeffs
            .iter()
            .map(|c| match c.valuation() {
                Val::Known(e) => Some(e),
                _ => None,
            })
            .collect();
        ValueProfile::new(self.p(), entries)
    }

    /// Least coefficient valuation.
    pub fn min_val(&self) -> Option<Rat> {
        self.profile().entries.into_iter().flatten().min()
    }

    pub fn is_integral(&self) -> bool {
        self.min_val().map(|m| !m.is_negative()).unwrap_or(true)
    }

    /// ℐ: integral with some coefficient of valuation 0.
    pub fn in_i(&self) -> bool {
        self.min_val().map(|m| m.is_zero()).unwrap_or(false)
    }

    pub fn add(&self, o: &OrePoly) -> OrePoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let c = (0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect();
        OrePoly::from_coeffs(&self.field, self.lattice, c)
    }

    pub fn neg(&self) -> OrePoly {
        OrePoly { field: self.field.clone(), lattice: self.lattice, coeffs: self.coeffs.iter().map(|c| c.neg()).collect() }
    }

    pub fn sub(&self, o: &OrePoly) -> OrePoly {
        self.add(&o.neg())
    }

    /// (Σ tⁱaᵢ)(Σ tʲbⱼ) = Σ t^{i+j} σʲ(aᵢ) bⱼ.
    pub fn mul(&self, o: &OrePoly) -> OrePoly {
        if self.is_zero() || o.is_zero() {
            return OrePoly::zero(&self.field, self.lattice);
        }
        let mut out = vec![SeriesElem::zero(&self.field, self.lattice); self.coeffs.len() + o.coeffs.len() - 1];
        for (j, b) in o.coeffs.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            for (i, a) in self.coeffs.iter().enumerate() {
                let mut s = a.clone();
                for _ in 0..j {
                    s = s.frobenius();
                }
                out[i + j] = out[i + j].add(&s.mul(b));
            }
        }
        OrePoly::from_coeffs(&self.field, self.lattice, out)
    }

    /// q·μ.
    pub fn scalar_right(&self, mu: &SeriesElem) -> OrePoly {
        OrePoly::from_coeffs(&self.field, self.lattice, self.coeffs.iter().map(|a| a.mul(mu)).collect())
    }

    /// μ·q = Σ tⁱ σⁱ(μ) aᵢ.
    pub fn scalar_left(&self, mu: &SeriesElem) -> OrePoly {
        let mut m = mu.clone();
        let mut out = vec![];
        for a in &self.coeffs {
            out.push(m.mul(a));
            m = m.frobenius();
        }
        OrePoly::from_coeffs(&self.field, self.lattice, out)
    }

    /// tⁿ·q.
    pub fn shift_t(&self, n: usize) -> OrePoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![SeriesElem::zero(&self.field, self.lattice); n];
        c.extend(self.coeffs.iter().cloned());
        OrePoly::from_coeffs(&self.field, self.lattice, c)
    }

    /// Writes q = tⁿ·r with r σ-separable (r = 0 when q = 0).
    pub fn split_t_power(&self) -> (usize, OrePoly) {
        match self.coeffs.iter().position(|c| !c.is_termless()) {
            None => (0, self.clone()),
            Some(n) => (n, OrePoly::from_coeffs(&self.field, self.lattice, self.coeffs[n..].to_vec())),
        }
    }

    /// x·q = Σ σⁱ(x) aᵢ.
    pub fn module_apply(&self, x: &SeriesElem) -> SeriesElem {
        let mut acc = SeriesElem::zero(&self.field, self.lattice);
        let mut s = x.clone();
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                s = s.frobenius();
            }
            if !a.is_zero() {
                acc = acc.add(&s.mul(a));
            }
        }
        acc
    }

    /// Coefficient-wise σⁿ.
    pub fn pow_sigma(&self, n: i64) -> Result<OrePoly, SeriesError> {
        let c = self.coeffs.iter().map(|a| a.sigma_pow(n)).collect::<Result<Vec<_>, _>>()?;
        Ok(OrePoly::from_coeffs(&self.field, self.lattice, c))
    }

    /// Coefficient-wise a ↦ a^{1/σ} = Σᵢ λᵢ(a)·cᵢ, iterated m times.
    pub fn sqrt_sigma(&self, m: usize) -> Result<OrePoly, SeriesError> {
        let n = self.lattice.basis_size(self.p());
        let mut cur = self.coeffs.clone();
        for _ in 0..m {
            cur = cur
                .iter()
                .map(|a| {
                    let mut s = SeriesElem::zero(&self.field, self.lattice);
                    for i in 0..n {
                        s = s.add(&a.lambda(i)?.mul(&SeriesElem::basis(&self.field, self.lattice, i)));
                    }
                    Ok(s)
                })
                .collect::<Result<Vec<_>, SeriesError>>()?;
        }
        Ok(OrePoly::from_coeffs(&self.field, self.lattice, cur))
    }

    /// Coefficient-wise λ_k.
    pub fn lambda_coeffwise(&self, path: &[usize]) -> Result<OrePoly, SeriesError> {
        let c = self.coeffs.iter().map(|a| a.lambda_path(path)).collect::<Result<Vec<_>, _>>()?;
        Ok(OrePoly::from_coeffs(&self.field, self.lattice, c))
    }

    /// q^μ = Σ tⁱ μ^{σⁱ} aᵢ μ⁻¹.
    pub fn mu_conjugate(&self, mu: &SeriesElem) -> Result<OrePoly, SeriesError> {
        let inv = mu.inv()?;
        Ok(self.scalar_left(mu).scalar_right(&inv))
    }

    /// Components √σᵐ(q_d̄) of tᵐq = Σ_d̄ √σᵐ(q_d̄)·tᵐ·c_d̄, keyed by d̄ ∈ nᵐ.
    pub fn lambda_decompose(&self, m: usize) -> Result<BTreeMap<Vec<usize>, OrePoly>, SeriesError> {
        let n = self.lattice.basis_size(self.p());
        let mut out = BTreeMap::new();
        for path in all_paths(n, m) {
            out.insert(path.clone(), self.lambda_coeffwise(&path)?);
        }
        Ok(out)
    }

    /// c_d̄ = c_{d₁}^{σ^{m−1}}⋯c_{d_m} as a series.
    pub fn path_basis(field: &FieldRef, lattice: Lattice, path: &[usize]) -> SeriesElem {
        let p = field.p() as i64;
        let mut e = 0i64;
        for &d in path {
            e = e * p + d as i64;
        }
        SeriesElem::t_pow(field, lattice, Rat::int(e))
    }

    /// Least k with minimal coefficient valuation, and q·a_k⁻¹.
    pub fn normalize_to_i(&self, target: Option<&Rat>) -> Result<(SeriesElem, OrePoly), OreError> {
        let prof = self.profile();
        let m = self.min_val().ok_or(OreError::Zero)?;
        let k = prof.entries.iter().position(|e| e.as_ref() == Some(&m)).unwrap();
        let mu = self.coeffs[k].inv_to(target)?;
        Ok((mu.clone(), self.scalar_right(&mu)))
    }

    /// Exact normalization by the monomial T^{−γ_min}; returns (−γ_min, q·T^{−γ_min}).
    pub fn normalize_monomial(&self) -> Result<(Rat, OrePoly), OreError> {
        let m = self.min_val().ok_or(OreError::Zero)?;
        let g = -m;
        let mu = SeriesElem::t_pow(&self.field, self.lattice, g.clone());
        Ok((g, self.scalar_right(&mu)))
    }

    /// q₁ = q₂·c + r with deg r < deg q₂, over the field K.
    pub fn right_divide(&self, q2: &OrePoly, prec: Option<&Rat>) -> Result<(OrePoly, OrePoly), OreError> {
        let e = q2.degree().ok_or(OreError::DivByZero)?;
        let be = q2.lead().unwrap().clone();
        let mut r = self.clone();
        let mut c = OrePoly::zero(&self.field, self.lattice);
        let mut guard = 0;
        while let Some(dr) = r.degree() {
            if dr < e {
                break;
            }
            let k = dr - e;
            let beta = sigma_n(&be, k);
            let x = r.lead().unwrap().mul(&beta.inv_to(prec)?);
            let step = OrePoly::monomial(k, x);
            c = c.add(&step);
            r = r.sub(&q2.mul(&step));
            // an approximate inverse can leave the same degree with a termless lead
            guard += 1;
            if guard > 4 * (self.deg0() + 2) {
                return Err(OreError::IdentityFailed);
            }
        }
        Ok((c, r))
    }

    /// q₁·λ = q₂·c + r over the integral ring, λ a product of σ-powers of q₂'s
    /// leading coefficient. Exact whenever the inputs are.
    pub fn generalized_right_divide(&self, q2: &OrePoly) -> Result<GenDiv, OreError> {
        let e = q2.degree().ok_or(OreError::DivByZero)?;
        let n = self.degree().unwrap_or(0);
        if !self.is_zero() && n < e {
            return Err(OreError::Degree(n, e));
        }
        if !self.is_integral() || !q2.is_integral() {
            return Err(OreError::NotIntegral);
        }
        let (f, l) = (&self.field, self.lattice);
        let be = q2.lead().unwrap().clone();
        let mut rem = self.clone();
        let mut quot = OrePoly::zero(f, l);
        let mut scale = SeriesElem::one(f, l);
        let mut steps = 0;
        while let Some(dr) = rem.degree() {
            if dr < e {
                break;
            }
            let k = dr - e;
            let beta = sigma_n(&be, k);
            let a = rem.lead().unwrap().clone();
            let exact = beta.is_monomial() && a.is_exact() && a.v_lb() >= beta.v_lb();
            let x = if exact {
                a.mul(&beta.inv()?)
            } else {
                rem = rem.scalar_right(&beta);
                quot = quot.scalar_right(&beta);
                scale = scale.mul(&beta);
                steps += 1;
                a
            };
            let stepq = OrePoly::monomial(k, x);
            quot = quot.add(&stepq);
            rem = rem.sub(&q2.mul(&stepq));
            if rem.degree() == Some(dr) {
                return Err(OreError::IdentityFailed);
            }
        }
        let out = GenDiv { scale, steps, quot, rem };
        if self.is_exact() && q2.is_exact() && self.scalar_right(&out.scale) != q2.mul(&out.quot).add(&out.rem) {
            return Err(OreError::IdentityFailed);
        }
        Ok(out)
    }

    /// (q₁, q₂) in ℐ with r₁·q₂ = r₂·q₁, by the Euclidean chain.
    pub fn ore_closure(r1: &OrePoly, r2: &OrePoly) -> Result<(OrePoly, OrePoly), OreError> {
        if r1.is_zero() || r2.is_zero() {
            return Err(OreError::Zero);
        }
        if r1.deg0() < r2.deg0() {
            let (q2, q1) = OrePoly::ore_closure(r2, r1)?;
            return Ok((q1, q2));
        }
        let (f, l) = (r1.field.clone(), r1.lattice);
        let (_, r1n) = r1.normalize_monomial()?;
        let (_, r2n) = r2.normalize_monomial()?;
        // s_i = r1n·X_i + r2n·Y_i
        let (mut s_prev, mut s_cur) = (r1n.clone(), r2n.clone());
        let (mut x_prev, mut x_cur) = (OrePoly::one(&f, l), OrePoly::zero(&f, l));
        let (mut y_prev, mut y_cur) = (OrePoly::zero(&f, l), OrePoly::one(&f, l));
        loop {
            let g = s_prev.generalized_right_divide(&s_cur)?;
            let s_next = g.rem;
            let x_next = x_prev.scalar_right(&g.scale).sub(&x_cur.mul(&g.quot));
            let y_next = y_prev.scalar_right(&g.scale).sub(&y_cur.mul(&g.quot));
            if s_next.is_zero() {
                // r1n·X = r2n·(−Y), and r_in = r_i·μ_i with μ_i = T^{−γ_i}
                let (g1, _) = r1.normalize_monomial()?;
                let (g2, _) = r2.normalize_monomial()?;
                let q2 = x_next.scalar_left(&SeriesElem::t_pow(&f, l, g1));
                let q1 = y_next.neg().scalar_left(&SeriesElem::t_pow(&f, l, g2));
                let (g, q2n) = q2.normalize_monomial()?;
                let q1n = q1.scalar_right(&SeriesElem::t_pow(&f, l, g));
                if r1.is_exact() && r2.is_exact() && r1.mul(&q2n) != r2.mul(&q1n) {
                    return Err(OreError::IdentityFailed);
                }
                return Ok((q1n, q2n));
            }
            s_prev = std::mem::replace(&mut s_cur, s_next);
            x_prev = std::mem::replace(&mut x_cur, x_next);
            y_prev = std::mem::replace(&mut y_cur, y_next);
        }
    }

    pub fn embed(&self, e: &Embedding) -> OrePoly {
        OrePoly { field: e.to.clone(), lattice: self.lattice, coeffs: self.coeffs.iter().map(|c| c.embed(e)).collect() }
    }

    /// Truncate every coefficient at precision n.
    pub fn truncate(&self, n: &Rat) -> OrePoly {
        OrePoly::from_coeffs(&self.field, self.lattice, self.coeffs.iter().map(|c| c.truncate(n)).collect())
    }

    /// Least precision over the coefficients.
    pub fn prec(&self) -> DeltaPoint {
        self.coeffs.iter().map(|c| c.prec().clone()).min().unwrap_or(DeltaPoint::Inf)
    }
}

pub fn sigma_n(a: &SeriesElem, k: usize) -> SeriesElem {
    let mut s = a.clone();
    for _ in 0..k {
        s = s.frobenius();
    }
    s
}

pub fn all_paths(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |d| {
                    let mut q = p.clone();
                    q.push(d);
                    q
                })
            })
            .collect();
    }
    out
}

impl fmt::Display for OrePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = vec![];
        for (i, a) in self.coeffs.iter().enumerate().rev() {
            if a.is_termless() && a.is_exact() {
                continue;
            }
            let tp = match i {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{}", i),
            };
            parts.push(if i == 0 {
                format!("({})", a)
            } else if a.is_one() {
                tp
            } else {
                format!("{}*({})", tp, a)
            });
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for OrePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff_field::FiniteField;
    use crate::text::Ctx;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn ctx(p: u32, k: u32, l: Lattice) -> Ctx {
        Ctx::new(FiniteField::get(p, k).unwrap(), l)
    }

    #[test]
    fn commutation_and_products() {
        let c = ctx(2, 2, Lattice::Full);
        assert_eq!(c.parse_ore("w*t").unwrap(), c.parse_ore("t*w^2").unwrap());
        let prod = c.parse_ore("(t - w)*(t - w^2)").unwrap();
        assert_eq!(prod, c.parse_ore("t^2 + 1").unwrap());
        let q = c.parse_ore("t^2*(1+T) + t*(w) + (T^3)").unwrap();
        assert_eq!(q.mul(&OrePoly::one(&c.field, Lattice::Full)), q);
    }

    #[test]
    fn print_parse_round_trip() {
        let c = ctx(2, 2, Lattice::Full);
        for s in ["t^2*(1+T) + t*(w) + (T^3)", "t - T", "t*(T) + (1)", "(w*T^(1/3) + O(T^2))"] {
            let q = c.parse_ore(s).unwrap();
            let printed = q.to_string();
            assert_eq!(c.parse_ore(&printed).unwrap(), q, "{}", printed);
            assert_eq!(c.parse_ore(&printed).unwrap().to_string(), printed);
        }
    }

    #[test]
    fn division_examples() {
        let c = ctx(2, 1, Lattice::Full);
        let (q, r) = c.parse_ore("t^2 + 1").unwrap().right_divide(&c.parse_ore("t + 1").unwrap(), None).unwrap();
        assert_eq!(q, c.parse_ore("t + 1").unwrap());
        assert!(r.is_zero());
        let a = c.parse_ore("t*(T) + (1 + T)").unwrap();
        let (q, r) = a.right_divide(&a, None).unwrap();
        assert!(q.is_one() && r.is_zero());
        let (q, r) = c.parse_ore("t").unwrap().right_divide(&c.parse_ore("t - T").unwrap(), None).unwrap();
        assert!(q.is_one());
        assert_eq!(r, c.parse_ore("T").unwrap());
    }

    #[test]
    fn generalized_division_examples() {
        let c = ctx(2, 1, Lattice::Full);
        let q = c.parse_ore("t + 1").unwrap();
        let g = q.generalized_right_divide(&q).unwrap();
        assert!(g.scale.is_one() && g.steps == 0 && g.quot.is_one() && g.rem.is_zero());
        let q1 = c.parse_ore("t^2").unwrap();
        let q2 = c.parse_ore("t*T - 1").unwrap();
        let g = q1.generalized_right_divide(&q2).unwrap();
        assert_eq!(q1.scalar_right(&g.scale), q2.mul(&g.quot).add(&g.rem));
        assert!(g.rem.degree().unwrap_or(0) < 1 && g.quot.is_integral() && g.rem.is_integral());
        let q2 = c.parse_ore("T").unwrap();
        let g = q.generalized_right_divide(&q2).unwrap();
        assert!(g.rem.is_zero());
        assert_eq!(q.scalar_right(&g.scale), q2.mul(&g.quot));
        assert!(g.quot.is_integral() && g.steps >= 1);
    }

    #[test]
    fn closure_examples() {
        let c = ctx(2, 1, Lattice::Full);
        let r = c.parse_ore("t + T").unwrap();
        let (q1, q2) = OrePoly::ore_closure(&r, &r).unwrap();
        assert!(q1.is_one() && q2.is_one());
        let (r1, r2) = (c.parse_ore("t").unwrap(), c.parse_ore("t + 1").unwrap());
        let (q1, q2) = OrePoly::ore_closure(&r1, &r2).unwrap();
        assert_eq!(r1.mul(&q2), r2.mul(&q1));
        assert!(q1.in_i() && q2.in_i());
        let (r1, r2) = (c.parse_ore("t*T + 1").unwrap(), c.parse_ore("t^2 + (T)").unwrap());
        let (q1, q2) = OrePoly::ore_closure(&r1, &r2).unwrap();
        assert_eq!(r1.mul(&q2), r2.mul(&q1));
        assert!(q1.in_i() && q2.in_i());
    }

    #[test]
    fn sigma_calculus() {
        let c = ctx(2, 1, Lattice::Tame(1));
        let q = c.parse_ore("T").unwrap();
        let t = c.parse_ore("t").unwrap();
        assert_eq!(t.mul(&q.pow_sigma(1).unwrap()), q.mul(&t));
        assert_eq!(c.parse_ore("t*(T^2)").unwrap().sqrt_sigma(1).unwrap(), c.parse_ore("t*(T)").unwrap());
        let conj = t.mu_conjugate(&c.parse_series("T").unwrap()).unwrap();
        assert_eq!(conj, c.parse_ore("t*(T)").unwrap());
        assert!(c.parse_ore("t - T").unwrap().in_i());
    }

    #[test]
    fn normalize_spec_example() {
        // T·t is t·T² in the ring; the written form "t·T − T³" normalizes to t − T².
        let c = ctx(2, 1, Lattice::Full);
        let q = c.parse_ore("t*T - T^3").unwrap();
        let (mu, n) = q.normalize_to_i(None).unwrap();
        assert_eq!(mu, c.parse_series("T^(-1)").unwrap());
        assert_eq!(n, c.parse_ore("t - T^2").unwrap());
    }

    #[test]
    fn module_action_examples() {
        let c = ctx(2, 1, Lattice::Full);
        let tt = c.parse_series("T").unwrap();
        assert_eq!(c.parse_ore("t").unwrap().module_apply(&tt), c.parse_series("T^2").unwrap());
        assert!(c.parse_ore("t - T").unwrap().module_apply(&tt).is_zero());
        let tinv = c.parse_series("T^(-1)").unwrap();
        assert!(c.parse_ore("t*T - 1").unwrap().module_apply(&tinv).is_zero());
    }

    #[test]
    fn lambda_decomposition() {
        let c = ctx(2, 1, Lattice::Tame(1));
        let q = c.parse_ore("1 + t*(T^2)").unwrap();
        let comps = q.lambda_decompose(1).unwrap();
        assert_eq!(comps[&vec![0]], c.parse_ore("1 + t*(T)").unwrap());
        assert!(comps[&vec![1]].is_zero());
        let full = ctx(2, 1, Lattice::Full);
        let q = full.parse_ore("1 + t*(T^3)").unwrap();
        let comps = q.lambda_decompose(2).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[&vec![0, 0]], q.sqrt_sigma(2).unwrap());
        assert!(c.zero_poly().lambda_decompose(2).unwrap().values().all(|x| x.is_zero()));
    }

    fn rand_poly(seed: u64, c: &Ctx, deg: usize) -> OrePoly {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..=deg).map(|_| SeriesElem::random(&mut rng, &c.field, c.lattice, 3, 0, 4, &[1, 3])).collect();
        OrePoly::from_coeffs(&c.field, c.lattice, coeffs)
    }

    fn reexpand(q: &OrePoly, m: usize) -> OrePoly {
        let (f, l) = (q.field().clone(), q.lattice());
        let mut acc = OrePoly::zero(&f, l);
        for (path, comp) in q.lambda_decompose(m).unwrap() {
            let cb = OrePoly::path_basis(&f, l, &path);
            acc = acc.add(&comp.mul(&OrePoly::t_pow(&f, l, m)).scalar_right(&cb));
        }
        acc
    }

    proptest! {
        #[test]
        fn ring_axioms(a in 0u64..1000, b in 0u64..1000, d in 0u64..1000) {
            let c = ctx(2, 2, Lattice::Full);
            let (x, y, z) = (rand_poly(a, &c, 2), rand_poly(b, &c, 1), rand_poly(d, &c, 2));
            prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
            prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
            if !x.is_zero() && !y.is_zero() {
                prop_assert_eq!(x.mul(&y).degree().unwrap(), x.degree().unwrap() + y.degree().unwrap());
            }
        }

        #[test]
        fn division_contracts(a in 0u64..1000, b in 0u64..1000) {
            let c = ctx(3, 1, Lattice::Full);
            let (x, y) = (rand_poly(a, &c, 3), rand_poly(b, &c, 1));
            prop_assume!(!y.is_zero() && x.deg0() >= y.deg0());
            let g = x.generalized_right_divide(&y).unwrap();
            prop_assert_eq!(x.scalar_right(&g.scale), y.mul(&g.quot).add(&g.rem));
            prop_assert!(g.rem.is_zero() || g.rem.deg0() < y.deg0());
            prop_assert!(g.quot.is_integral() && g.rem.is_integral());
            if y.lead().unwrap().is_monomial() {
                let (q, r) = x.right_divide(&y, None).unwrap();
                prop_assert_eq!(x.clone(), y.mul(&q).add(&r));
            }
        }

        #[test]
        fn t_commutes_with_sigma(a in 0u64..1000) {
            let c = ctx(2, 2, Lattice::Full);
            let q = rand_poly(a, &c, 2);
            let t = OrePoly::t_pow(&c.field, c.lattice, 1);
            prop_assert_eq!(t.mul(&q.pow_sigma(1).unwrap()), q.mul(&t));
        }

        #[test]
        fn decomposition_reexpands(a in 0u64..1000, m in 1usize..3) {
            let c = ctx(3, 1, Lattice::Tame(2));
            let q = rand_poly(a, &c, 2);
            prop_assert_eq!(reexpand(&q, m), q.shift_t(m));
        }

        #[test]
        fn valuation_lower_bound(a in 0u64..1000, b in 0u64..1000) {
            let c = ctx(2, 2, Lattice::Full);
            let q = rand_poly(a, &c, 2);
            prop_assume!(!q.is_zero());
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(b);
            let x = SeriesElem::random(&mut rng, &c.field, c.lattice, 3, -2, 3, &[1, 2]);
            let lhs = q.module_apply(&x).v_lb();
            let rhs = crate::value_geometry::upsilon_inv(&q.profile(), &x.v_lb()).unwrap();
            prop_assert!(lhs >= rhs);
        }

        #[test]
        fn product_of_i_is_i(a in 0u64..1000, b in 0u64..1000) {
            let c = ctx(2, 1, Lattice::Full);
            let (x, y) = (rand_poly(a, &c, 2), rand_poly(b, &c, 2));
            prop_assume!(!x.is_zero() && !y.is_zero());
            let (_, xn) = x.normalize_monomial().unwrap();
            let (_, yn) = y.normalize_monomial().unwrap();
            prop_assert!(xn.mul(&yn).in_i());
        }
    }
}
