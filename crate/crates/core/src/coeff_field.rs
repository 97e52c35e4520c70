//! Finite fields 𝔽_{p^k} with Frobenius, embeddings and additive-polynomial kernels.
//!
//! Elements are packed as `Σ cᵢ pⁱ` over the power basis of 𝔽_p[x]/(f), which
//! keeps them `Copy`. Small fields get log/exp tables.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use parking_lot::RwLock;
use rand::Rng;

use crate::value_geometry::is_prime;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("field too large: {p}^{k}")]
    TooLarge { p: u32, k: u32 },
    #[error("modulus is not irreducible")]
    Reducible,
    #[error("malformed field spec {0:?}")]
    BadSpec(String),
    #[error("all-zero additive polynomial")]
    ZeroOperator,
    #[error("extension cap reached at degree {k}: kernel dimension {achieved} < {wanted}")]
    ExtensionCap { k: u32, achieved: usize, wanted: usize },
    #[error("no embedding of {0} into {1}")]
    NoEmbedding(String, String),
}

pub const MAX_FIELD_SIZE: u64 = 1 << 31;
const TABLE_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FFElem(pub u32);

pub struct FiniteField {
    p: u32,
    k: u32,
    size: u64,
    modulus: Vec<u32>,
    tables: Option<(Vec<u32>, Vec<u32>)>,
}

pub type FieldRef = Arc<FiniteField>;

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.spec())
    }
}

impl PartialEq for FiniteField {
    fn eq(&self, o: &FiniteField) -> bool {
        self.p == o.p && self.modulus == o.modulus
    }
}
impl Eq for FiniteField {}

// ---- 𝔽_p[x] helpers, low degree first ----

fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    trim(out.into_iter().map(|x| x as u32).collect())
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut a = trim(a.to_vec());
    let m = trim(m.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv_mod_p(m[dm], p);
    while a.len() > dm {
        let da = a.len() - 1;
        let c = (a[da] as u64 * lead_inv as u64 % p as u64) as u32;
        if c != 0 {
            for i in 0..=dm {
                let sub = c as u64 * m[i] as u64 % p as u64;
                a[da - dm + i] = ((a[da - dm + i] as u64 + p as u64 - sub) % p as u64) as u32;
            }
        }
        a = trim(a);
    }
    a
}

fn poly_sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = *a.get(i).unwrap_or(&0);
            let y = *b.get(i).unwrap_or(&0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn poly_powmod(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
    let mut r = vec![1];
    let mut b = poly_rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            r = poly_rem(&poly_mul(&r, &b, p), m, p);
        }
        b = poly_rem(&poly_mul(&b, &b, p), m, p);
        e >>= 1;
    }
    r
}

/// Ben-Or irreducibility test.
fn is_irreducible(f: &[u32], p: u32) -> bool {
    let k = f.len() - 1;
    if k <= 1 {
        return k == 1;
    }
    let x = vec![0, 1];
    let mut xp = x.clone();
    for _ in 1..=k / 2 {
        xp = poly_powmod(&xp, p as u64, f, p);
        let g = poly_gcd(&poly_sub(&xp, &x, p), f, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = vec![];
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl FiniteField {
    /// 𝔽_{p^k} with the least irreducible modulus (ordered by packed lower coefficients).
    pub fn new(p: u32, k: u32) -> Result<FiniteField, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let _size = (p as u64).checked_pow(k).filter(|s| *s <= MAX_FIELD_SIZE).ok_or(FieldError::TooLarge { p, k })?;
        let mut lower = 0u64;
        loop {
            let mut f: Vec<u32> = (0..k).map(|i| ((lower / (p as u64).pow(i)) % p as u64) as u32).collect();
            f.push(1);
            if is_irreducible(&f, p) {
                return FiniteField::with_modulus(p, f);
            }
            lower += 1;
        }
    }

    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<FiniteField, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let modulus = trim(modulus);
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 || modulus.iter().any(|c| *c >= p) {
            return Err(FieldError::BadSpec(format!("{:?}", modulus)));
        }
        if !is_irreducible(&modulus, p) {
            return Err(FieldError::Reducible);
        }
        let k = (modulus.len() - 1) as u32;
        let size = (p as u64).checked_pow(k).filter(|s| *s <= MAX_FIELD_SIZE).ok_or(FieldError::TooLarge { p, k })?;
        let mut f = FiniteField { p, k, size, modulus, tables: None };
        if size <= TABLE_LIMIT {
            let g = f.primitive_element();
            let n = (size - 1) as usize;
            let mut exp = vec![0u32; 2 * n];
            let mut log = vec![0u32; size as usize];
            let mut x = f.one();
            for i in 0..n {
                exp[i] = x.0;
                log[x.0 as usize] = i as u32;
                x = f.mul_poly(x, g);
            }
            for i in n..2 * n {
                exp[i] = exp[i - n];
            }
            f.tables = Some((log, exp));
        }
        Ok(f)
    }

    /// Shared instance of the default 𝔽_{p^k}.
    pub fn get(p: u32, k: u32) -> Result<FieldRef, FieldError> {
        static CACHE: OnceLock<RwLock<HashMap<(u32, u32), FieldRef>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(f) = cache.read().get(&(p, k)) {
            return Ok(f.clone());
        }
        let f = Arc::new(FiniteField::new(p, k)?);
        Ok(cache.write().entry((p, k)).or_insert(f).clone())
    }

    /// Parses "p^k" or "p^k:c0,c1,...,ck".
    pub fn from_spec(s: &str) -> Result<FieldRef, FieldError> {
        let bad = || FieldError::BadSpec(s.to_string());
        let (head, modulus) = match s.split_once(':') {
            Some((h, m)) => (h, Some(m)),
            None => (s, None),
        };
        let (p, k) = match head.trim().split_once('^') {
            Some((p, k)) => (p.trim().parse::<u32>().map_err(|_| bad())?, k.trim().parse::<u32>().map_err(|_| bad())?),
            None => (head.trim().parse::<u32>().map_err(|_| bad())?, 1),
        };
        match modulus {
            None => FiniteField::get(p, k),
            Some(m) => {
                let cs: Vec<u32> = m.split(',').map(|c| c.trim().parse::<u32>().map_err(|_| bad())).collect::<Result<_, _>>()?;
                if cs.len() != k as usize + 1 {
                    return Err(bad());
                }
                let d = FiniteField::get(p, k)?;
                if d.modulus == cs {
                    return Ok(d);
                }
                Ok(Arc::new(FiniteField::with_modulus(p, cs)?))
            }
        }
    }

    pub fn spec(&self) -> String {
        let m: Vec<String> = self.modulus.iter().map(|c| c.to_string()).collect();
        format!("{}^{}:{}", self.p, self.k, m.join(","))
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn size(&self) -> u64 {
        self.size
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> FFElem {
        FFElem(0)
    }
    pub fn one(&self) -> FFElem {
        FFElem(1)
    }

    /// The class of x.
    pub fn gen(&self) -> FFElem {
        self.from_coords(&[0, 1])
    }

    pub fn from_int(&self, n: i64) -> FFElem {
        FFElem(n.rem_euclid(self.p as i64) as u32)
    }

    pub fn coords(&self, a: FFElem) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.k as usize);
        let mut x = a.0;
        for _ in 0..self.k {
            v.push(x % self.p);
            x /= self.p;
        }
        v
    }

    pub fn from_coords(&self, c: &[u32]) -> FFElem {
        let c = poly_rem(&c.iter().map(|x| x % self.p).collect::<Vec<_>>(), &self.modulus, self.p);
        let mut x = 0u32;
        for &d in c.iter().rev() {
            x = x * self.p + d;
        }
        FFElem(x)
    }

    pub fn add(&self, a: FFElem, b: FFElem) -> FFElem {
        if self.p == 2 {
            return FFElem(a.0 ^ b.0);
        }
        if self.k == 1 {
            return FFElem((a.0 + b.0) % self.p);
        }
        let (mut x, mut y, mut out, mut scale) = (a.0, b.0, 0u32, 1u32);
        for _ in 0..self.k {
            out += ((x % self.p + y % self.p) % self.p) * scale;
            x /= self.p;
            y /= self.p;
            scale = scale.wrapping_mul(self.p);
        }
        FFElem(out)
    }

    pub fn neg(&self, a: FFElem) -> FFElem {
        if self.p == 2 {
            return a;
        }
        let (mut x, mut out, mut scale) = (a.0, 0u32, 1u32);
        for _ in 0..self.k {
            out += ((self.p - x % self.p) % self.p) * scale;
            x /= self.p;
            scale = scale.wrapping_mul(self.p);
        }
        FFElem(out)
    }

    pub fn sub(&self, a: FFElem, b: FFElem) -> FFElem {
        self.add(a, self.neg(b))
    }

    fn mul_poly(&self, a: FFElem, b: FFElem) -> FFElem {
        let r = poly_rem(&poly_mul(&self.coords(a), &self.coords(b), self.p), &self.modulus, self.p);
        self.from_coords(&r)
    }

    pub fn mul(&self, a: FFElem, b: FFElem) -> FFElem {
        if a.0 == 0 || b.0 == 0 {
            return FFElem(0);
        }
        if self.k == 1 {
            return FFElem((a.0 as u64 * b.0 as u64 % self.p as u64) as u32);
        }
        match &self.tables {
            Some((log, exp)) => FFElem(exp[(log[a.0 as usize] + log[b.0 as usize]) as usize]),
            None => self.mul_poly(a, b),
        }
    }

    pub fn pow(&self, a: FFElem, e: u64) -> FFElem {
        if e == 0 {
            return self.one();
        }
        if a.0 == 0 {
            return a;
        }
        if let Some((log, exp)) = &self.tables {
            let n = self.size - 1;
            let i = (log[a.0 as usize] as u64 * (e % n)) % n;
            return FFElem(exp[i as usize]);
        }
        let mut r = self.one();
        let mut b = a;
        let mut e = e % (self.size - 1);
        if e == 0 {
            return self.one();
        }
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: FFElem) -> FFElem {
        assert!(a.0 != 0, "inverse of zero");
        if let Some((log, exp)) = &self.tables {
            let n = (self.size - 1) as u32;
            return FFElem(exp[((n - log[a.0 as usize]) % n) as usize]);
        }
        self.pow(a, self.size - 2)
    }

    pub fn div(&self, a: FFElem, b: FFElem) -> FFElem {
        self.mul(a, self.inv(b))
    }

    /// x^{pⁿ}; negative n uses σ^{k−|n| mod k}.
    pub fn frobenius(&self, a: FFElem, n: i64) -> FFElem {
        let m = n.rem_euclid(self.k as i64) as u32;
        if m == 0 || a.0 <= 1 || self.k == 1 {
            return a;
        }
        self.pow(a, (self.p as u64).pow(m))
    }

    pub fn is_zero(&self, a: FFElem) -> bool {
        a.0 == 0
    }

    pub fn elements(&self) -> impl Iterator<Item = FFElem> {
        (0..self.size as u32).map(FFElem)
    }

    pub fn random<R: Rng>(&self, rng: &mut R) -> FFElem {
        FFElem(rng.gen_range(0..self.size) as u32)
    }

    pub fn random_nonzero<R: Rng>(&self, rng: &mut R) -> FFElem {
        FFElem(rng.gen_range(1..self.size) as u32)
    }

    fn primitive_element(&self) -> FFElem {
        let n = self.size - 1;
        let fs = prime_factors(n);
        for x in 1..self.size as u32 {
            let g = FFElem(x);
            if fs.iter().all(|r| self.pow_slow(g, n / r) != self.one()) {
                return g;
            }
        }
        unreachable!("multiplicative group is cyclic")
    }

    fn pow_slow(&self, a: FFElem, mut e: u64) -> FFElem {
        let mut r = self.one();
        let mut b = a;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul_poly(r, b);
            }
            b = self.mul_poly(b, b);
            e >>= 1;
        }
        r
    }

    /// Prints an element as a polynomial in `w` (the class of x).
    pub fn fmt_elem(&self, a: FFElem) -> String {
        let cs = self.coords(a);
        let mut parts = vec![];
        for (i, &c) in cs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "w".to_string(),
                _ => format!("w^{}", i),
            };
            parts.push(match (c, i) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{}*{}", c, mono),
            });
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join("+")
        }
    }

    /// The 𝔽_p-linear map x ↦ Σ aᵢ x^{pⁱ} as a k×k matrix (column j = image of xʲ).
    pub fn additive_operator(&self, coeffs: &[FFElem]) -> Vec<Vec<u32>> {
        let k = self.k as usize;
        let mut m = vec![vec![0u32; k]; k];
        for j in 0..k {
            let mut basis = vec![0u32; j + 1];
            basis[j] = 1;
            let img = self.additive_apply(coeffs, self.from_coords(&basis));
            for (i, c) in self.coords(img).into_iter().enumerate() {
                m[i][j] = c;
            }
        }
        m
    }

    pub fn additive_apply(&self, coeffs: &[FFElem], x: FFElem) -> FFElem {
        let mut acc = self.zero();
        let mut xp = x;
        for &a in coeffs {
            acc = self.add(acc, self.mul(a, xp));
            xp = self.frobenius(xp, 1);
        }
        acc
    }

    /// 𝔽_p-basis of the kernel of x ↦ Σ aᵢ x^{pⁱ}.
    pub fn additive_kernel(&self, coeffs: &[FFElem]) -> Result<Vec<FFElem>, FieldError> {
        Ok(self.additive_solve(coeffs, self.zero())?.map(|(_, k)| k).unwrap_or_default())
    }

    /// Solves Σ aᵢ x^{pⁱ} = β: a particular solution and a kernel basis, or `None`.
    pub fn additive_solve(&self, coeffs: &[FFElem], beta: FFElem) -> Result<Option<(FFElem, Vec<FFElem>)>, FieldError> {
        if coeffs.iter().all(|c| c.0 == 0) {
            return Err(FieldError::ZeroOperator);
        }
        let k = self.k as usize;
        let p = self.p;
        let m = self.additive_operator(coeffs);
        // augmented matrix [M | β]
        let mut a: Vec<Vec<u32>> = m.iter().cloned().collect();
        for (i, c) in self.coords(beta).into_iter().enumerate() {
            a[i].push(c);
        }
        let mut pivots = vec![];
        let mut row = 0;
        for col in 0..k {
            let Some(r) = (row..k).find(|&r| a[r][col] != 0) else { continue };
            a.swap(row, r);
            let inv = inv_mod_p(a[row][col], p);
            for c in 0..=k {
                a[row][c] = (a[row][c] as u64 * inv as u64 % p as u64) as u32;
            }
            for r2 in 0..k {
                if r2 != row && a[r2][col] != 0 {
                    let f = a[r2][col];
                    for c in 0..=k {
                        let s = (f as u64 * a[row][c] as u64 % p as u64) as u32;
                        a[r2][c] = (a[r2][c] + p - s) % p;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        if (row..k).any(|r| a[r][k] != 0) {
            return Ok(None);
        }
        let mut part = vec![0u32; k];
        for (r, &c) in pivots.iter().enumerate() {
            part[c] = a[r][k];
        }
        let mut basis = vec![];
        for free in (0..k).filter(|c| !pivots.contains(c)) {
            let mut v = vec![0u32; k];
            v[free] = 1;
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = (p - a[r][free]) % p;
            }
            basis.push(self.from_coords(&v));
        }
        let d = coeffs.iter().rposition(|c| c.0 != 0).unwrap();
        assert!(basis.len() <= d, "kernel dimension exceeds degree");
        Ok(Some((self.from_coords(&part), basis)))
    }

    /// Every 𝔽_p-combination of a basis.
    pub fn span(&self, basis: &[FFElem]) -> Vec<FFElem> {
        let mut out = vec![self.zero()];
        for &b in basis {
            let mut next = Vec::with_capacity(out.len() * self.p as usize);
            for &x in &out {
                for c in 0..self.p {
                    next.push(self.add(x, self.mul(self.from_int(c as i64), b)));
                }
            }
            out = next;
        }
        out
    }
}

/// A field homomorphism 𝔽_{p^k} → 𝔽_{p^{k'}} fixed by the image of x.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub from: FieldRef,
    pub to: FieldRef,
    image: FFElem,
}

impl Embedding {
    pub fn identity(f: &FieldRef) -> Embedding {
        Embedding { from: f.clone(), to: f.clone(), image: f.gen() }
    }

    pub fn map(&self, a: FFElem) -> FFElem {
        if Arc::ptr_eq(&self.from, &self.to) {
            return a;
        }
        let mut acc = self.to.zero();
        let mut pw = self.to.one();
        for c in self.from.coords(a) {
            acc = self.to.add(acc, self.to.mul(self.to.from_int(c as i64), pw));
            pw = self.to.mul(pw, self.image);
        }
        acc
    }

    pub fn compose(&self, next: &Embedding) -> Embedding {
        Embedding { from: self.from.clone(), to: next.to.clone(), image: next.map(self.image) }
    }
}

/// Embeds `small` into `big` (k | k'), by searching the subfield for a root
/// of the small modulus. Cached per pair.
pub fn embed(small: &FieldRef, big: &FieldRef) -> Result<Embedding, FieldError> {
    static CACHE: OnceLock<RwLock<HashMap<(String, String), FFElem>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    let no = || FieldError::NoEmbedding(small.spec(), big.spec());
    if small.p != big.p || big.k % small.k != 0 {
        return Err(no());
    }
    if small == big {
        return Ok(Embedding { from: small.clone(), to: big.clone(), image: big.gen() });
    }
    let key = (small.spec(), big.spec());
    if let Some(&img) = cache.read().get(&key) {
        return Ok(Embedding { from: small.clone(), to: big.clone(), image: img });
    }
    let eval = |x: FFElem| {
        let mut acc = big.zero();
        for &c in small.modulus.iter().rev() {
            acc = big.add(big.mul(acc, x), big.from_int(c as i64));
        }
        acc
    };
    let g = big.primitive_element();
    let h = big.pow(g, (big.size - 1) / (small.size - 1));
    let mut x = big.one();
    let mut found = if eval(big.zero()).0 == 0 { Some(big.zero()) } else { None };
    for _ in 0..small.size - 1 {
        if found.is_some() {
            break;
        }
        if eval(x).0 == 0 {
            found = Some(x);
            break;
        }
        x = big.mul(x, h);
    }
    let img = found.ok_or_else(no)?;
    cache.write().insert(key, img);
    Ok(Embedding { from: small.clone(), to: big.clone(), image: img })
}

/// The degree-m extension of `f` with its embedding.
pub fn extension(f: &FieldRef, m: u32) -> Result<Embedding, FieldError> {
    let big = FiniteField::get(f.p, f.k * m)?;
    embed(f, &big)
}

/// Smallest extension (degree multiple ≤ `cap_k`) where the kernel of
/// Σ aᵢ x^{pⁱ} has dimension d.
pub fn extend_until_kernel_full(f: &FieldRef, coeffs: &[FFElem], d: usize, cap_k: u32) -> Result<Embedding, FieldError> {
    let mut achieved = 0;
    let mut m = 1;
    while f.k * m <= cap_k {
        if let Ok(e) = extension(f, m) {
            let mapped: Vec<FFElem> = coeffs.iter().map(|&c| e.map(c)).collect();
            let dim = e.to.additive_kernel(&mapped)?.len();
            if dim == d {
                return Ok(e);
            }
            achieved = achieved.max(dim);
        }
        m += 1;
    }
    Err(FieldError::ExtensionCap { k: f.k * (m - 1), achieved, wanted: d })
}
