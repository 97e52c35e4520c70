//! Exact rationals. Values that fit in `i64` stay on the fast path and are
//! promoted to `BigRational` on overflow, so results never lose precision.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone)]
pub enum Rat {
    Small(Ratio<i64>),
    Big(BigRational),
}

fn big_of(r: &Ratio<i64>) -> BigRational {
    BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

impl Rat {
    pub fn new(n: i64, d: i64) -> Rat {
        assert!(d != 0, "zero denominator");
        Rat::Small(Ratio::new(n, d))
    }

    pub fn int(n: i64) -> Rat {
        Rat::Small(Ratio::from_integer(n))
    }

    pub fn zero() -> Rat {
        Rat::int(0)
    }

    pub fn one() -> Rat {
        Rat::int(1)
    }

    fn demote(b: BigRational) -> Rat {
        match (b.numer().to_i64(), b.denom().to_i64()) {
            (Some(n), Some(d)) => Rat::Small(Ratio::new_raw(n, d)),
            _ => Rat::Big(b),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Rat::Small(r) => big_of(r),
            Rat::Big(b) => b.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Rat::Small(r) => r.is_zero(),
            Rat::Big(b) => b.is_zero(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Rat::Small(r) => r.is_negative(),
            Rat::Big(b) => b.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Rat::Small(r) => r.is_positive(),
            Rat::Big(b) => b.is_positive(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Rat::Small(r) => r.is_integer(),
            Rat::Big(b) => b.is_integer(),
        }
    }

    pub fn numer(&self) -> BigInt {
        self.to_big().numer().clone()
    }

    pub fn denom(&self) -> BigInt {
        self.to_big().denom().clone()
    }

    pub fn floor(&self) -> Rat {
        match self {
            Rat::Small(r) => Rat::Small(r.floor()),
            Rat::Big(b) => Rat::demote(b.floor()),
        }
    }

    pub fn ceil(&self) -> Rat {
        match self {
            Rat::Small(r) => Rat::Small(r.ceil()),
            Rat::Big(b) => Rat::demote(b.ceil()),
        }
    }

    /// Integer value, when integral and small.
    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Rat::Small(r) if r.is_integer() => Some(*r.numer()),
            _ => None,
        }
    }

    /// Multiply by `p^n` for any integer `n`.
    pub fn scale_pow(&self, p: u32, n: i64) -> Rat {
        let mut f = Rat::one();
        let base = Rat::int(p as i64);
        for _ in 0..n.unsigned_abs() {
            f = &f * &base;
        }
        if n >= 0 {
            self * &f
        } else {
            self / &f
        }
    }

    pub fn abs(&self) -> Rat {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn min(a: Rat, b: Rat) -> Rat {
        if a <= b {
            a
        } else {
            b
        }
    }

    pub fn max(a: Rat, b: Rat) -> Rat {
        if a >= b {
            a
        } else {
            b
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl<'a> $tr<&'a Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, o: &'a Rat) -> Rat {
                if let (Rat::Small(a), Rat::Small(b)) = (self, o) {
                    if let Some(r) = a.$checked(b) {
                        return Rat::Small(r);
                    }
                }
                Rat::demote(self.to_big().$m(o.to_big()))
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, o: Rat) -> Rat {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Rat> for Rat {
            type Output = Rat;
            fn $m(self, o: &'a Rat) -> Rat {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<Rat> for &'a Rat {
            type Output = Rat;
            fn $m(self, o: Rat) -> Rat {
                self.$m(&o)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match self {
            Rat::Small(r) if *r.numer() != i64::MIN => Rat::Small(-r),
            _ => Rat::demote(-self.to_big()),
        }
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        -&self
    }
}

impl PartialEq for Rat {
    fn eq(&self, o: &Rat) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Rat {}

impl PartialOrd for Rat {
    fn partial_cmp(&self, o: &Rat) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Rat {
    fn cmp(&self, o: &Rat) -> Ordering {
        match (self, o) {
            (Rat::Small(a), Rat::Small(b)) => {
                // cross-multiply in i128 to avoid overflow
                let l = *a.numer() as i128 * *b.denom() as i128;
                let r = *b.numer() as i128 * *a.denom() as i128;
                l.cmp(&r)
            }
            _ => self.to_big().cmp(&o.to_big()),
        }
    }
}

impl Hash for Rat {
    fn hash<H: Hasher>(&self, h: &mut H) {
        // Small and Big never represent the same value (Big only when it doesn't fit).
        match self {
            Rat::Small(r) => {
                r.numer().hash(h);
                r.denom().hash(h);
            }
            Rat::Big(b) => {
                b.numer().hash(h);
                b.denom().hash(h);
            }
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.to_big();
        if b.is_integer() {
            write!(f, "{}", b.numer())
        } else {
            write!(f, "{}/{}", b.numer(), b.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational {0:?}")]
pub struct ParseRatError(pub String);

impl FromStr for Rat {
    type Err = ParseRatError;
    fn from_str(s: &str) -> Result<Rat, ParseRatError> {
        let s = s.trim();
        let err = || ParseRatError(s.to_string());
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| err())?;
        let d: BigInt = d.parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        Ok(Rat::demote(BigRational::new(n, d)))
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Rat {
        Rat::int(n)
    }
}

impl Zero for Rat {
    fn zero() -> Rat {
        Rat::int(0)
    }
    fn is_zero(&self) -> bool {
        Rat::is_zero(self)
    }
}

impl One for Rat {
    fn one() -> Rat {
        Rat::int(1)
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
