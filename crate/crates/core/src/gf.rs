//! Arithmetic over finite fields GF(q), q = p^m.
//!
//! Elements are stored as the integer value of their base-p digit vector:
//! digit `i` is the coefficient of `x^i` in the polynomial residue. For each
//! extension field the modulus is the lexicographically least monic
//! irreducible polynomial of degree `m` over GF(p), which gives the fixed
//! moduli below for the binary fields used by the simulator:
//!
//! | q  | modulus       |
//! |----|---------------|
//! | 4  | x^2 + x + 1   |
//! | 8  | x^3 + x + 1   |
//! | 16 | x^4 + x + 1   |
//! | 32 | x^5 + x^2 + 1 |
//!
//! These choices are part of the public contract and are stable across
//! versions.

use std::fmt;

use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

/// Fields up to this order keep full `q x q` multiplication and addition
/// tables; larger ones fall back to log/antilog lookups.
const FULL_TABLE_LIMIT: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("field order {0} is not a prime power")]
    NotPrimePower(u32),
    #[error("field order {0} is outside the supported range 2..={MAX_ORDER}")]
    Unsupported(u32),
    #[error("division by zero in GF({0})")]
    DivisionByZero(u32),
    #[error("value {value} is not an element of GF({q})")]
    OutOfRange { value: u32, q: u32 },
}

/// An element of GF(q), as the integer value of its base-p digit vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[repr(transparent)]
pub struct FieldElement(pub u16);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn value(self) -> u32 {
        self.0 as u32
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Arithmetic context for GF(q). Immutable once built.
#[derive(Clone)]
pub struct FieldSpec {
    q: u32,
    p: u32,
    m: u32,
    /// Monic modulus, lowest degree first, length `m + 1`. Just `[0, 1]` for
    /// prime fields.
    modulus: Vec<u32>,
    exp: Vec<u16>,
    log: Vec<u16>,
    mul_table: Option<Vec<u16>>,
    add_table: Option<Vec<u16>>,
    neg: Vec<u16>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("q", &self.q)
            .field("p", &self.p)
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

/// Factor `q = p^m`; `None` when `q` is not a prime power.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            break;
        }
        p += 1;
    }
    if q % p != 0 {
        // q itself is prime
        return Some((q, 1));
    }
    let mut rest = q;
    let mut m = 0;
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

/// Polynomials over GF(p) as coefficient vectors, lowest degree first.
/// Used only to build the tables; the hot path never touches these.
mod poly {
    pub fn trim(mut a: Vec<u32>) -> Vec<u32> {
        while a.len() > 1 && *a.last().unwrap() == 0 {
            a.pop();
        }
        a
    }

    pub fn digits(mut value: u32, p: u32, len: usize) -> Vec<u32> {
        let mut out = vec![0; len];
        for d in out.iter_mut() {
            *d = value % p;
            value /= p;
        }
        out
    }

    pub fn to_value(digits: &[u32], p: u32) -> u32 {
        digits.iter().rev().fold(0, |acc, &d| acc * p + d)
    }

    pub fn inv_mod(a: u32, p: u32) -> u32 {
        (1..p).find(|&b| a * b % p == 1).expect("nonzero element of a prime field")
    }

    /// Remainder of `a` divided by `b` over GF(p); `b` must be nonzero.
    pub fn rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let b = trim(b.to_vec());
        let mut r = trim(a.to_vec());
        let db = b.len() - 1;
        let lead_inv = inv_mod(b[db], p);
        while r.len() > db && !(r.len() == 1 && r[0] == 0) {
            let dr = r.len() - 1;
            let factor = r[dr] * lead_inv % p;
            for (i, &bc) in b.iter().enumerate() {
                let idx = dr - db + i;
                r[idx] = (r[idx] + p - factor * bc % p) % p;
            }
            // leading term is now zero
            r.pop();
            if r.is_empty() {
                r.push(0);
            }
            r = trim(r);
        }
        r
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        trim(out)
    }

    /// Trial division by every monic polynomial of degree 1..=m/2.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let m = f.len() - 1;
        for deg in 1..=m / 2 {
            let count = p.pow(deg as u32);
            for low in 0..count {
                let mut g = digits(low, p, deg);
                g.push(1);
                let r = rem(f, &g, p);
                if r.len() == 1 && r[0] == 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Lexicographically least monic irreducible polynomial of degree `m`,
    /// ordered by the integer value of its lower coefficients.
    pub fn least_irreducible(p: u32, m: u32) -> Vec<u32> {
        let count = p.pow(m);
        for low in 0..count {
            let mut f = digits(low, p, m as usize);
            f.push(1);
            if is_irreducible(&f, p) {
                return f;
            }
        }
        unreachable!("irreducible polynomials exist for every degree")
    }
}

fn factor_distinct(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
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

impl FieldSpec {
    /// Build GF(q). Fails unless `q` is a prime power in `2..=65536`.
    pub fn new(q: u32) -> Result<FieldSpec, FieldError> {
        if q < 2 || q > MAX_ORDER {
            return Err(FieldError::Unsupported(q));
        }
        let (p, m) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        let modulus = if m == 1 {
            vec![0, 1]
        } else {
            poly::least_irreducible(p, m)
        };

        // Reference multiplication through polynomial reduction; only used
        // to find a generator and fill the log tables.
        let slow_mul = |a: u32, b: u32| -> u32 {
            if m == 1 {
                return (a as u64 * b as u64 % p as u64) as u32;
            }
            let prod = poly::mul(
                &poly::digits(a, p, m as usize),
                &poly::digits(b, p, m as usize),
                p,
            );
            poly::to_value(&poly::rem(&prod, &modulus, p), p)
        };
        let slow_pow = |mut base: u32, mut e: u32| -> u32 {
            let mut acc = 1;
            while e > 0 {
                if e & 1 == 1 {
                    acc = slow_mul(acc, base);
                }
                base = slow_mul(base, base);
                e >>= 1;
            }
            acc
        };

        let order = q - 1;
        let prime_factors = factor_distinct(order);
        let generator = (1..q)
            .find(|&g| {
                g != 0 && prime_factors.iter().all(|&r| slow_pow(g, order / r) != 1)
            })
            .unwrap_or(1);

        let mut exp = vec![0u16; 2 * order as usize];
        let mut log = vec![0u16; q as usize];
        let mut x = 1u32;
        for i in 0..order as usize {
            exp[i] = x as u16;
            exp[i + order as usize] = x as u16;
            log[x as usize] = i as u16;
            x = slow_mul(x, generator);
        }

        let neg: Vec<u16> = (0..q)
            .map(|a| {
                let d = poly::digits(a, p, m as usize);
                let n: Vec<u32> = d.iter().map(|&c| (p - c) % p).collect();
                poly::to_value(&n, p) as u16
            })
            .collect();

        let mut field = FieldSpec {
            q,
            p,
            m,
            modulus,
            exp,
            log,
            mul_table: None,
            add_table: None,
            neg,
        };
        if q <= FULL_TABLE_LIMIT {
            let mut mt = vec![0u16; (q * q) as usize];
            let mut at = vec![0u16; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    let idx = (a * q + b) as usize;
                    mt[idx] = field.mul_slow(a as u16, b as u16);
                    at[idx] = field.add_slow(a as u16, b as u16);
                }
            }
            field.mul_table = Some(mt);
            field.add_table = Some(at);
        }
        Ok(field)
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.m
    }

    /// Monic modulus coefficients, lowest degree first (`[0, 1]` for prime
    /// fields, where it is unused).
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn element(&self, value: u32) -> Result<FieldElement, FieldError> {
        if value < self.q {
            Ok(FieldElement(value as u16))
        } else {
            Err(FieldError::OutOfRange { value, q: self.q })
        }
    }

    /// All elements in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(|v| FieldElement(v as u16))
    }

    fn add_slow(&self, a: u16, b: u16) -> u16 {
        if self.p == 2 {
            return a ^ b;
        }
        if self.m == 1 {
            return ((a as u32 + b as u32) % self.p) as u16;
        }
        let (mut a, mut b) = (a as u32, b as u32);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.m {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out as u16
    }

    fn mul_slow(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        let order = (self.q - 1) as usize;
        let la = self.log[a as usize] as usize;
        let lb = self.log[b as usize] as usize;
        debug_assert!(la + lb < 2 * order);
        self.exp[la + lb]
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match &self.add_table {
            Some(t) => FieldElement(t[a.0 as usize * self.q as usize + b.0 as usize]),
            None => FieldElement(self.add_slow(a.0, b.0)),
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match &self.mul_table {
            Some(t) => FieldElement(t[a.0 as usize * self.q as usize + b.0 as usize]),
            None => FieldElement(self.mul_slow(a.0, b.0)),
        }
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero(self.q));
        }
        let order = (self.q - 1) as usize;
        let la = self.log[a.0 as usize] as usize;
        Ok(FieldElement(self.exp[(order - la) % order]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `dst[i] -= factor * src[i]` for every position.
    pub fn sub_scaled(&self, dst: &mut [FieldElement], factor: FieldElement, src: &[FieldElement]) {
        debug_assert_eq!(dst.len(), src.len());
        if factor.is_zero() {
            return;
        }
        let neg_factor = self.neg(factor);
        self.add_scaled(dst, neg_factor, src);
    }

    /// `dst[i] += factor * src[i]` for every position.
    pub fn add_scaled(&self, dst: &mut [FieldElement], factor: FieldElement, src: &[FieldElement]) {
        debug_assert_eq!(dst.len(), src.len());
        if factor.is_zero() {
            return;
        }
        match (&self.mul_table, &self.add_table) {
            (Some(mt), Some(at)) => {
                let q = self.q as usize;
                let row = &mt[factor.0 as usize * q..(factor.0 as usize + 1) * q];
                if self.p == 2 {
                    for (d, s) in dst.iter_mut().zip(src) {
                        d.0 ^= row[s.0 as usize];
                    }
                } else {
                    for (d, s) in dst.iter_mut().zip(src) {
                        d.0 = at[d.0 as usize * q + row[s.0 as usize] as usize];
                    }
                }
            }
            _ => {
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = self.add(*d, self.mul(factor, *s));
                }
            }
        }
    }

    /// `dst[i] *= factor` for every position.
    pub fn scale(&self, dst: &mut [FieldElement], factor: FieldElement) {
        for d in dst.iter_mut() {
            *d = self.mul(*d, factor);
        }
    }
}
