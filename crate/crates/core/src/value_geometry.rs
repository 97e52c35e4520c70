//! Value group arithmetic: Γ = Δ = ℚ with τ = ×p, and the min-plus maps Υ, Υ⁻¹.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rat::Rat;

pub type GammaElem = Rat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValueError {
    #[error("zero polynomial has no value profile")]
    ZeroProfile,
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("threshold must be finite")]
    InfiniteThreshold,
}

/// A point of Δ: a rational or the top element. Serialized as "a/b" or "inf".
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DeltaPoint {
    Fin(Rat),
    Inf,
}

impl DeltaPoint {
    pub fn fin(r: Rat) -> DeltaPoint {
        DeltaPoint::Fin(r)
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, DeltaPoint::Inf)
    }

    pub fn finite(&self) -> Option<&Rat> {
        match self {
            DeltaPoint::Fin(r) => Some(r),
            DeltaPoint::Inf => None,
        }
    }

    /// δ + γ, the action of Γ on Δ.
    pub fn shift(&self, g: &Rat) -> DeltaPoint {
        match self {
            DeltaPoint::Fin(r) => DeltaPoint::Fin(r + g),
            DeltaPoint::Inf => DeltaPoint::Inf,
        }
    }

    pub fn min(a: DeltaPoint, b: DeltaPoint) -> DeltaPoint {
        if a <= b {
            a
        } else {
            b
        }
    }
}

impl Ord for DeltaPoint {
    fn cmp(&self, o: &DeltaPoint) -> Ordering {
        match (self, o) {
            (DeltaPoint::Inf, DeltaPoint::Inf) => Ordering::Equal,
            (DeltaPoint::Inf, _) => Ordering::Greater,
            (_, DeltaPoint::Inf) => Ordering::Less,
            (DeltaPoint::Fin(a), DeltaPoint::Fin(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for DeltaPoint {
    fn partial_cmp(&self, o: &DeltaPoint) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for DeltaPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaPoint::Fin(r) => write!(f, "{}", r),
            DeltaPoint::Inf => write!(f, "inf"),
        }
    }
}

impl Serialize for DeltaPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DeltaPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<DeltaPoint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl std::str::FromStr for DeltaPoint {
    type Err = crate::rat::ParseRatError;
    fn from_str(s: &str) -> Result<DeltaPoint, Self::Err> {
        match s.trim() {
            "inf" | "+inf" | "∞" | "+∞" => Ok(DeltaPoint::Inf),
            other => Ok(DeltaPoint::Fin(other.parse()?)),
        }
    }
}

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Checks the characteristic. p ≥ 2 also gives the 2-contracting property
/// σ_v(γ) = pγ ≥ 2γ for γ ≥ 0.
pub fn check_prime(p: u32) -> Result<u32, ValueError> {
    if is_prime(p) {
        Ok(p)
    } else {
        Err(ValueError::NotPrime(p))
    }
}

/// τⁿ(δ) = pⁿ·δ.
pub fn tau(p: u32, d: &DeltaPoint, n: i64) -> DeltaPoint {
    match d {
        DeltaPoint::Inf => DeltaPoint::Inf,
        DeltaPoint::Fin(r) => DeltaPoint::Fin(r.scale_pow(p, n)),
    }
}

pub fn tau_rat(p: u32, r: &Rat, n: i64) -> Rat {
    r.scale_pow(p, n)
}

/// Valuations of the coefficients a₀..a_d; `None` marks a zero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueProfile {
    pub p: u32,
    pub entries: Vec<Option<Rat>>,
}

impl ValueProfile {
    pub fn new(p: u32, entries: Vec<Option<Rat>>) -> ValueProfile {
        ValueProfile { p, entries }
    }

    pub fn from_rats(p: u32, gs: &[Rat]) -> ValueProfile {
        ValueProfile { p, entries: gs.iter().cloned().map(Some).collect() }
    }

    pub fn degree(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    fn finite(&self) -> impl Iterator<Item = (usize, &Rat)> {
        self.entries.iter().enumerate().filter_map(|(i, g)| g.as_ref().map(|g| (i, g)))
    }

    fn check(&self) -> Result<(), ValueError> {
        if self.finite().next().is_none() {
            Err(ValueError::ZeroProfile)
        } else {
            Ok(())
        }
    }

    /// Shift every entry by γ (profile of q·μ with v(μ) = γ).
    pub fn shifted(&self, g: &Rat) -> ValueProfile {
        ValueProfile { p: self.p, entries: self.entries.iter().map(|e| e.as_ref().map(|x| x + g)).collect() }
    }
}

/// Υ⁻¹(q, μ) = minᵢ pⁱμ + γᵢ.
pub fn upsilon_inv(prof: &ValueProfile, mu: &DeltaPoint) -> Result<DeltaPoint, ValueError> {
    prof.check()?;
    let mu = match mu {
        DeltaPoint::Inf => return Ok(DeltaPoint::Inf),
        DeltaPoint::Fin(m) => m,
    };
    let best = prof
        .finite()
        .map(|(i, g)| &mu.scale_pow(prof.p, i as i64) + g)
        .min()
        .expect("checked nonempty");
    Ok(DeltaPoint::Fin(best))
}

/// Indices attaining the minimum in Υ⁻¹(q, μ), in increasing order.
pub fn tie_set(prof: &ValueProfile, mu: &Rat) -> Vec<usize> {
    let vals: Vec<(usize, Rat)> =
        prof.finite().map(|(i, g)| (i, &mu.scale_pow(prof.p, i as i64) + g)).collect();
    let Some(m) = vals.iter().map(|(_, v)| v.clone()).min() else { return vec![] };
    vals.into_iter().filter(|(_, v)| *v == m).map(|(i, _)| i).collect()
}

/// Υ(q, δ) = maxᵢ (δ − γᵢ)/pⁱ with the least index attaining Υ⁻¹ at the result.
pub fn upsilon(prof: &ValueProfile, d: &DeltaPoint) -> Result<(DeltaPoint, usize), ValueError> {
    prof.check()?;
    let d = match d {
        DeltaPoint::Inf => {
            let i = prof.finite().next().map(|(i, _)| i).unwrap_or(0);
            return Ok((DeltaPoint::Inf, i));
        }
        DeltaPoint::Fin(d) => d,
    };
    let mu = prof
        .finite()
        .map(|(i, g)| (d - g).scale_pow(prof.p, -(i as i64)))
        .max()
        .expect("checked nonempty");
    let w = tie_set(prof, &mu)[0];
    Ok((DeltaPoint::Fin(mu), w))
}

/// Finite-only convenience wrappers used throughout the engine.
pub fn ups(prof: &ValueProfile, d: &Rat) -> Rat {
    match upsilon(prof, &DeltaPoint::Fin(d.clone())).expect("nonzero profile").0 {
        DeltaPoint::Fin(r) => r,
        DeltaPoint::Inf => unreachable!(),
    }
}

pub fn ups_inv(prof: &ValueProfile, m: &Rat) -> Rat {
    match upsilon_inv(prof, &DeltaPoint::Fin(m.clone())).expect("nonzero profile") {
        DeltaPoint::Fin(r) => r,
        DeltaPoint::Inf => unreachable!(),
    }
}

/// (τ−1)⁻¹(γ) = γ/(p−1), the unique δ with pδ = δ + γ.
pub fn tau_minus_one_inv(p: u32, g: &Rat) -> Rat {
    g / &Rat::int(p as i64 - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }
    fn fin(n: i64, d: i64) -> DeltaPoint {
        DeltaPoint::Fin(r(n, d))
    }

    #[test]
    fn tau_examples() {
        assert_eq!(tau(2, &fin(0, 1), 1), fin(0, 1));
        assert_eq!(tau(2, &DeltaPoint::Inf, 3), DeltaPoint::Inf);
        assert_eq!(tau(2, &fin(3, 2), -1), fin(3, 4));
        assert_eq!(tau(2, &tau(2, &fin(3, 2), -1), 1), fin(3, 2));
    }

    #[test]
    fn upsilon_inv_examples() {
        let t_minus_t = ValueProfile::from_rats(2, &[r(1, 1), r(0, 1)]);
        assert_eq!(upsilon_inv(&t_minus_t, &fin(1, 1)).unwrap(), fin(2, 1));
        let tb_minus_1 = ValueProfile::from_rats(2, &[r(0, 1), r(1, 1)]);
        assert_eq!(upsilon_inv(&tb_minus_1, &fin(0, 1)).unwrap(), fin(0, 1));
        assert_eq!(upsilon_inv(&tb_minus_1, &DeltaPoint::Inf).unwrap(), DeltaPoint::Inf);
        let zero = ValueProfile::new(2, vec![None, None]);
        assert_eq!(upsilon_inv(&zero, &fin(0, 1)), Err(ValueError::ZeroProfile));
    }

    #[test]
    fn upsilon_examples() {
        let q = ValueProfile::from_rats(2, &[r(1, 1), r(0, 1)]);
        assert_eq!(upsilon(&q, &fin(4, 1)).unwrap(), (fin(3, 1), 0));
        assert_eq!(upsilon(&q, &fin(1, 1)).unwrap().0, fin(1, 2));
        let q2 = ValueProfile::from_rats(2, &[r(0, 1), r(1, 1)]);
        assert_eq!(upsilon(&q2, &fin(-2, 1)).unwrap().0, fin(-3, 2));
    }

    #[test]
    fn tau_minus_one_examples() {
        assert_eq!(tau_minus_one_inv(2, &r(0, 1)), r(0, 1));
        assert_eq!(tau_minus_one_inv(2, &r(1, 1)), r(1, 1));
        assert_eq!(tau_minus_one_inv(3, &r(1, 1)), r(1, 2));
    }

    #[test]
    fn primes() {
        assert!(check_prime(2).is_ok());
        assert!(check_prime(7).is_ok());
        assert!(check_prime(9).is_err());
        assert!(check_prime(1).is_err());
    }

    fn profile_strategy() -> impl Strategy<Value = ValueProfile> {
        (prop_oneof![Just(2u32), Just(3), Just(5)], prop::collection::vec(prop::option::weighted(0.8, (-12i64..12, 1i64..4)), 1..5))
            .prop_filter("nonzero", |(_, e)| e.iter().any(|x| x.is_some()))
            .prop_map(|(p, e)| ValueProfile::new(p, e.into_iter().map(|o| o.map(|(a, b)| r(a, b))).collect()))
    }

    proptest! {
        #[test]
        fn round_trips(q in profile_strategy(), a in -40i64..40, b in 1i64..7) {
            let d = r(a, b);
            let (mu, w) = upsilon(&q, &DeltaPoint::Fin(d.clone())).unwrap();
            prop_assert_eq!(upsilon_inv(&q, &mu).unwrap(), DeltaPoint::Fin(d.clone()));
            let m = mu.finite().unwrap().clone();
            prop_assert_eq!(tie_set(&q, &m)[0], w);
            let back = upsilon(&q, &upsilon_inv(&q, &DeltaPoint::Fin(d.clone())).unwrap()).unwrap().0;
            prop_assert_eq!(back, DeltaPoint::Fin(d));
        }

        #[test]
        fn monotone_and_adjoint(q in profile_strategy(), a in -30i64..30, c in -30i64..30, b in 1i64..5) {
            let (x, y) = (r(a, b), r(c, b));
            if x < y {
                prop_assert!(ups(&q, &x) < ups(&q, &y));
                prop_assert!(ups_inv(&q, &x) < ups_inv(&q, &y));
            }
            prop_assert_eq!(ups(&q, &y) <= x, y <= ups_inv(&q, &x));
        }

        #[test]
        fn maximality(q in profile_strategy(), a in -30i64..30, e in 1i64..20) {
            let d = r(a, 3);
            let mu = ups(&q, &d);
            let above = &mu + &r(e, 17);
            prop_assert!(ups_inv(&q, &above) > d);
        }

        #[test]
        fn unique_fixed_point(p in prop_oneof![Just(2u32), Just(3), Just(7)], g in -20i64..20, a in -40i64..40) {
            let g = Rat::int(g);
            let rho = tau_minus_one_inv(p, &g);
            prop_assert_eq!(tau_rat(p, &rho, 1), &rho + &g);
            let d = r(a, 3);
            let lhs = tau_rat(p, &d, 1);
            let rhs = &d + &g;
            prop_assert_eq!(lhs.cmp(&rhs), d.cmp(&rho));
        }
    }
}
