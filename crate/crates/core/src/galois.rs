//! Finite fields GF(p^e) backed by log/antilog tables.
//!
//! Elements are canonical integers in `[0, q)`: the value `Σ cᵢ·pⁱ` stands for
//! the polynomial `Σ cᵢ·xⁱ` modulo the field's defining polynomial. Fields are
//! immutable once built and shared behind an [`Arc`]; two fields with the same
//! `(p, e)` are always identical because construction is deterministic.
//!
//! The raw `u32` operations on [`GaloisField`] are what the linear algebra uses
//! in its inner loops. [`FieldElement`] is the checked wrapper that carries its
//! field and reports mismatches.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_FIELD_ORDER: u64 = 1 << 16;

/// Fields up to this order get a full addition table.
const ADD_TABLE_MAX: u32 = 256;

/// Shared handle to a field.
pub type Field = Arc<GaloisField>;

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` into `(p, e)` with `q = p^e`, if `q` is a prime power.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

/// GF(p^e) with tables keyed by a fixed primitive element `g`.
pub struct GaloisField {
    p: u32,
    e: u32,
    order: u32,
    modulus: Vec<u32>,
    /// `exp[k] = g^k`, stored twice over so that `exp[log a + log b]` never wraps.
    exp: Vec<u32>,
    log: Vec<u32>,
    neg: Vec<u32>,
    add: Vec<u16>,
}

impl GaloisField {
    /// Returns the (cached) field GF(p^e).
    ///
    /// The defining polynomial is the lexicographically smallest monic
    /// primitive polynomial of degree `e`, coefficients compared
    /// low-degree-first. For `e = 1` the primitive element is the smallest
    /// primitive root mod `p` and the modulus is `x - g`.
    pub fn new(p: u32, e: u32) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if e == 0 {
            return Err(Error::InvalidParameters("field degree must be positive".into()));
        }
        let order = (p as u64).checked_pow(e).unwrap_or(u64::MAX);
        if order > MAX_FIELD_ORDER {
            return Err(Error::FieldTooLarge { p, e });
        }
        static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Field>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(f) = cache.lock().unwrap().get(&(p, e)) {
            return Ok(f.clone());
        }
        let field = Arc::new(Self::build(p, e, order as u32));
        cache.lock().unwrap().insert((p, e), field.clone());
        Ok(field)
    }

    /// Field of order `q`, which must be a prime power.
    pub fn with_order(q: u32) -> Result<Field> {
        let (p, e) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        Self::new(p, e)
    }

    fn build(p: u32, e: u32, order: u32) -> Self {
        let (modulus, powers) = if e == 1 {
            let g = (1..p.max(2))
                .find(|&g| multiplicative_order_mod(g, p) == p - 1)
                .expect("every prime has a primitive root");
            let powers = (0..p - 1)
                .scan(1u64, |acc, _| {
                    let v = *acc as u32;
                    *acc = *acc * g as u64 % p as u64;
                    Some(v)
                })
                .collect();
            (vec![(p - g) % p, 1], powers)
        } else {
            find_primitive(p, e, order)
        };

        let n = (order - 1) as usize;
        let mut exp = Vec::with_capacity(2 * n);
        exp.extend_from_slice(&powers);
        exp.extend_from_slice(&powers);
        let mut log = vec![u32::MAX; order as usize];
        for (k, &v) in powers.iter().enumerate() {
            log[v as usize] = k as u32;
        }

        let neg = (0..order)
            .map(|a| map_digits(p, e, a, 0, |x, _| (p - x) % p))
            .collect();
        let add = if order <= ADD_TABLE_MAX {
            let mut t = vec![0u16; (order * order) as usize];
            for a in 0..order {
                for b in 0..order {
                    t[(a * order + b) as usize] = map_digits(p, e, a, b, |x, y| (x + y) % p) as u16;
                }
            }
            t
        } else {
            Vec::new()
        };

        GaloisField { p, e, order, modulus, exp, log, neg, add }
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.e
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Defining polynomial, low-degree coefficient first, monic.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// The primitive element the tables are keyed by.
    pub fn generator(&self) -> u32 {
        self.exp[1 % self.exp.len().max(1)]
    }

    pub fn contains(&self, a: u32) -> bool {
        a < self.order
    }

    /// Reduces an integer into the prime subfield.
    pub fn from_int(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.e == 1 {
            let s = a + b;
            if s >= self.p {
                s - self.p
            } else {
                s
            }
        } else if self.p == 2 {
            a ^ b
        } else if !self.add.is_empty() {
            self.add[(a * self.order + b) as usize] as u32
        } else {
            map_digits(self.p, self.e, a, b, |x, y| (x + y) % self.p)
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
        }
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        let n = self.order - 1;
        Ok(self.exp[((n - self.log[a as usize]) % n) as usize])
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^k` for any integer exponent; negative exponents need `a ≠ 0`.
    pub fn pow(&self, a: u32, k: i64) -> Result<u32> {
        if a == 0 {
            return match k.signum() {
                0 => Ok(1),
                1 => Ok(0),
                _ => Err(Error::DivisionByZero),
            };
        }
        let n = (self.order - 1) as i64;
        let l = self.log[a as usize] as i64;
        Ok(self.exp[(l * k.rem_euclid(n)).rem_euclid(n) as usize])
    }

    /// `g^k`.
    pub fn exp(&self, k: i64) -> u32 {
        let n = (self.order - 1) as i64;
        self.exp[k.rem_euclid(n) as usize]
    }

    /// Discrete log to base `g`; `None` for zero.
    pub fn log(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.log[a as usize])
    }

    /// Multiplicative order of a nonzero element.
    pub fn element_order(&self, a: u32) -> Option<u32> {
        let l = self.log(a)?;
        let n = self.order - 1;
        Some(n / gcd(l, n))
    }

    fn check_quadratic(&self, q0: u32) -> Result<()> {
        if (q0 as u64) * (q0 as u64) != self.order as u64 {
            return Err(Error::NotQuadraticExtension { order: self.order, base: q0 });
        }
        Ok(())
    }

    /// `x ↦ x^{q0}` on GF(q0²).
    pub fn conjugate(&self, a: u32, q0: u32) -> Result<u32> {
        self.check_quadratic(q0)?;
        Ok(self.frobenius(a, q0))
    }

    #[inline]
    fn frobenius(&self, a: u32, power: u32) -> u32 {
        if a == 0 {
            return 0;
        }
        let n = (self.order - 1) as u64;
        self.exp[(self.log[a as usize] as u64 * power as u64 % n) as usize]
    }

    /// Whether `a` lies in the subfield of order `q0` (`a^{q0} = a`).
    ///
    /// `q0` must be the square root of the field order or the order itself.
    pub fn in_subfield(&self, a: u32, q0: u32) -> Result<bool> {
        if q0 != self.order {
            self.check_quadratic(q0)?;
        }
        Ok(self.frobenius(a, q0) == a)
    }

    /// An element of multiplicative order exactly `n`: `g^{(q-1)/n}`.
    pub fn root_of_unity(&self, n: u32) -> Result<u32> {
        let m = self.order - 1;
        if n == 0 || !m.is_multiple_of(n) {
            return Err(Error::NoSuchRoot { order: self.order, n });
        }
        Ok(self.exp[(m / n) as usize % m as usize])
    }

    /// Image of `a ∈ sub` under the embedding `sub → self`.
    ///
    /// The embedding sends the generator of `sub` to the smallest power
    /// `h = g^{j·(Q-1)/(q-1)}` that is a root of `sub`'s modulus, so it is a
    /// ring homomorphism (integers map to themselves).
    pub fn embed(&self, sub: &GaloisField, a: u32) -> Result<u32> {
        if sub.p != self.p || !self.e.is_multiple_of(sub.e) {
            return Err(Error::FieldMismatch { left: sub.order, right: self.order });
        }
        if !sub.contains(a) {
            return Err(Error::InvalidParameters(format!("{a} is not an element of GF({})", sub.order)));
        }
        if a == 0 {
            return Ok(0);
        }
        let h = self.subfield_generator_image(sub);
        self.pow(h, sub.log[a as usize] as i64)
    }

    fn subfield_generator_image(&self, sub: &GaloisField) -> u32 {
        let big = (self.order - 1) as i64;
        let small = (sub.order - 1) as i64;
        let step = big / small;
        (1..=small)
            .filter(|&j| gcd(j as u32, small as u32) == 1)
            .map(|j| self.exp(j * step))
            .find(|&h| {
                // Horner evaluation of the sub-field modulus at h.
                sub.modulus.iter().rev().fold(0u32, |acc, &c| self.add(self.mul(acc, h), c)) == 0
            })
            .expect("a primitive root of the subfield modulus exists in every extension")
    }

    /// Checked element handle.
    pub fn element(self: &Arc<Self>, value: u32) -> Result<FieldElement> {
        FieldElement::new(self.clone(), value)
    }
}

impl PartialEq for GaloisField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e
    }
}

impl Eq for GaloisField {}

impl fmt::Debug for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p, self.e)
    }
}

impl fmt::Display for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.order)
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn multiplicative_order_mod(g: u32, p: u32) -> u32 {
    let mut x = g as u64 % p as u64;
    if x == 0 {
        return 0;
    }
    let mut k = 1;
    while x != 1 {
        x = x * g as u64 % p as u64;
        k += 1;
    }
    k
}

/// Applies `f` digit-wise to the base-`p` expansions of `a` and `b`.
fn map_digits(p: u32, e: u32, mut a: u32, mut b: u32, f: impl Fn(u32, u32) -> u32) -> u32 {
    let mut out = 0;
    let mut place = 1;
    for _ in 0..e {
        out += f(a % p, b % p) * place;
        a /= p;
        b /= p;
        place *= p;
    }
    out
}

/// Smallest monic primitive polynomial of degree `e` over GF(p), plus the
/// powers `x^0 .. x^{q-2}` it generates.
fn find_primitive(p: u32, e: u32, order: u32) -> (Vec<u32>, Vec<u32>) {
    let e_us = e as usize;
    // Candidate index: c0 is the most significant digit so that candidates
    // come out in low-degree-first lexicographic order.
    for idx in 0..order {
        let mut coeffs = vec![0u32; e_us];
        let mut rest = idx;
        for i in (0..e_us).rev() {
            coeffs[i] = rest % p;
            rest /= p;
        }
        if coeffs[0] == 0 {
            continue;
        }
        if let Some(powers) = powers_of_x(p, &coeffs, order) {
            let mut modulus = coeffs;
            modulus.push(1);
            return (modulus, powers);
        }
    }
    unreachable!("primitive polynomials exist in every degree")
}

/// Powers of `x` modulo `x^e + Σ cᵢxⁱ` if `x` has order `q - 1`, else `None`.
fn powers_of_x(p: u32, coeffs: &[u32], order: u32) -> Option<Vec<u32>> {
    let e = coeffs.len();
    let mut state = vec![0u32; e];
    state[0] = 1;
    let encode = |s: &[u32]| s.iter().rev().fold(0u32, |acc, &d| acc * p + d);
    let mut powers = Vec::with_capacity((order - 1) as usize);
    for k in 0..order - 1 {
        let v = encode(&state);
        if k > 0 && v == 1 {
            return None;
        }
        powers.push(v);
        let top = state[e - 1];
        for i in (1..e).rev() {
            state[i] = state[i - 1];
        }
        state[0] = 0;
        for i in 0..e {
            state[i] = (state[i] + (p - coeffs[i]) * top) % p;
        }
    }
    (encode(&state) == 1).then_some(powers)
}

/// An element together with the field it belongs to.
#[derive(Clone)]
pub struct FieldElement {
    field: Field,
    value: u32,
}

impl FieldElement {
    pub fn new(field: Field, value: u32) -> Result<Self> {
        if !field.contains(value) {
            return Err(Error::InvalidParameters(format!("{value} is not an element of {field}")));
        }
        Ok(FieldElement { field, value })
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch { left: self.field.order, right: other.field.order });
        }
        Ok(())
    }

    fn with(&self, value: u32) -> Self {
        FieldElement { field: self.field.clone(), value }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(self.with(self.field.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(self.with(self.field.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(self.with(self.field.mul(self.value, other.value)))
    }

    pub fn neg(&self) -> Self {
        self.with(self.field.neg(self.value))
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(self.with(self.field.inv(self.value)?))
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        Ok(self.with(self.field.pow(self.value, k)?))
    }

    pub fn conjugate(&self, q0: u32) -> Result<Self> {
        Ok(self.with(self.field.conjugate(self.value, q0)?))
    }

    pub fn in_subfield(&self, q0: u32) -> Result<bool> {
        self.field.in_subfield(self.value, q0)
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.value == other.value
    }
}

impl Eq for FieldElement {}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self.value, self.field)
    }
}
