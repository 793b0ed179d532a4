//! Table-driven arithmetic in GF(p^m) for odd p.
//!
//! Elements are dense integers whose base-p digits are the coefficients of
//! the polynomial-basis representation (digit `i` multiplies `α^i`). The
//! field carries full exponent and logarithm tables with respect to the root
//! `α` of a primitive modulus, plus a trace table, so multiplication, powers,
//! Frobenius, trace and the quadratic character are all O(1) lookups.

use serde::Serialize;

use crate::arith::{is_prime, mod_pow, prime_factors};
use crate::error::{Error, Result};

/// Largest supported field size. Tables cost about 10 bytes per element.
pub const MAX_FIELD_SIZE: u64 = 1 << 26;

const NO_LOG: u32 = u32::MAX;

/// An element of GF(p^m) in its base-p integer encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct FieldElem(u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    pub const fn rep(self) -> u32 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// For reps already known to be below `q`.
    pub(crate) const fn from_rep_unchecked(rep: u32) -> Self {
        FieldElem(rep)
    }
}

/// Immutable description of GF(p^m) with a distinguished primitive element.
#[derive(Clone, Debug)]
pub struct FieldCtx {
    p: u32,
    m: u32,
    q: u32,
    n: u32,
    modulus: Vec<u32>,
    pow_p: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    trace: Vec<u16>,
}

impl FieldCtx {
    /// Builds GF(p^m). Without an explicit modulus the lexicographically
    /// smallest primitive polynomial is used, comparing coefficients from the
    /// constant term upwards. An explicit modulus is given low degree first
    /// and must have degree exactly `m`; it is normalised to be monic.
    pub fn new(p: u64, m: u32, modulus: Option<&[u64]>) -> Result<Self> {
        if p == 2 {
            return Err(Error::EvenCharacteristic);
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 {
            return Err(Error::InvalidDegree);
        }
        let q = (p as u128)
            .checked_pow(m)
            .filter(|&q| q <= MAX_FIELD_SIZE as u128)
            .ok_or(Error::FieldTooLarge { p, m })? as u64;
        let n = q - 1;

        let modulus = match modulus {
            Some(coeffs) => {
                let f = normalise_modulus(coeffs, p, m)?;
                if !is_primitive(&f, p, n) {
                    return Err(Error::NotPrimitivePolynomial);
                }
                f
            }
            None => smallest_primitive(p, m, n),
        };
        Ok(Self::from_primitive(p as u32, m, q as u32, modulus))
    }

    fn from_primitive(p: u32, m: u32, q: u32, modulus: Vec<u32>) -> Self {
        let n = q - 1;
        let pow_p: Vec<u32> = (0..m).map(|i| p.pow(i)).collect();

        let mut exp = Vec::with_capacity(n as usize);
        let mut log = vec![NO_LOG; q as usize];
        let mut cur = vec![0u32; m as usize];
        cur[0] = 1;
        for i in 0..n {
            let rep = digits_to_rep(&cur, p);
            debug_assert_eq!(log[rep as usize], NO_LOG, "modulus is not primitive");
            exp.push(rep);
            log[rep as usize] = i;
            times_x(&mut cur, &modulus, p);
        }

        let mut ctx = FieldCtx {
            p,
            m,
            q,
            n,
            modulus,
            pow_p,
            exp,
            log,
            trace: Vec::new(),
        };

        // Tr is F_p-linear, so the trace of each basis vector α^i fixes it.
        let basis_trace: Vec<u32> = (0..m)
            .map(|i| {
                let e = FieldElem(ctx.pow_p[i as usize]);
                let mut acc = FieldElem::ZERO;
                for j in 0..m {
                    acc = ctx.add(acc, ctx.frobenius(e, j));
                }
                assert!(acc.0 < p, "trace left the prime field");
                acc.0
            })
            .collect();
        ctx.trace = (0..q)
            .map(|rep| {
                let mut r = rep;
                let mut t = 0u64;
                for &bt in &basis_trace {
                    t += (r % p) as u64 * bt as u64;
                    r /= p;
                }
                (t % p as u64) as u16
            })
            .collect();
        ctx
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Field size `p^m`.
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Multiplicative group order `p^m - 1`.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Monic modulus, constant term first, length `m + 1`.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// `α^i` for `i` in `[0, n)`.
    pub fn exp_table(&self) -> &[u32] {
        &self.exp
    }

    pub fn elem(&self, rep: u64) -> Result<FieldElem> {
        if rep < self.q as u64 {
            Ok(FieldElem(rep as u32))
        } else {
            Err(Error::ElementOutOfRange {
                rep,
                q: self.q as u64,
            })
        }
    }

    /// `α^k` for any integer `k`.
    pub fn alpha_pow(&self, k: i64) -> FieldElem {
        FieldElem(self.exp[k.rem_euclid(self.n as i64) as usize])
    }

    /// Discrete logarithm to base α, `None` for zero.
    pub fn log(&self, x: FieldElem) -> Option<u32> {
        match self.log[x.0 as usize] {
            NO_LOG => None,
            l => Some(l),
        }
    }

    /// Embeds `c mod p` into the prime subfield.
    pub fn from_prime(&self, c: i64) -> FieldElem {
        FieldElem(c.rem_euclid(self.p as i64) as u32)
    }

    /// Coefficient vector of `x` in the polynomial basis.
    pub fn digits(&self, x: FieldElem) -> Vec<u32> {
        let mut r = x.0;
        (0..self.m)
            .map(|_| {
                let d = r % self.p;
                r /= self.p;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, digits: &[u32]) -> FieldElem {
        FieldElem(digits_to_rep(digits, self.p))
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0u32;
        for &w in &self.pow_p {
            let d = (x % self.p + y % self.p) % self.p;
            out += d * w;
            x /= self.p;
            y /= self.p;
        }
        FieldElem(out)
    }

    pub fn neg(&self, a: FieldElem) -> FieldElem {
        let mut x = a.0;
        let mut out = 0u32;
        for &w in &self.pow_p {
            let d = x % self.p;
            out += ((self.p - d) % self.p) * w;
            x /= self.p;
        }
        FieldElem(out)
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    /// `c · x` for `c` in the prime field.
    pub fn scale(&self, c: u32, x: FieldElem) -> FieldElem {
        let c = c % self.p;
        let mut r = x.0;
        let mut out = 0u32;
        for &w in &self.pow_p {
            out += ((r % self.p) * c % self.p) * w;
            r /= self.p;
        }
        FieldElem(out)
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        match (self.log(a), self.log(b)) {
            (Some(la), Some(lb)) => {
                let s = la as u64 + lb as u64;
                FieldElem(self.exp[(s % self.n as u64) as usize])
            }
            _ => FieldElem::ZERO,
        }
    }

    pub fn inv(&self, a: FieldElem) -> Option<FieldElem> {
        self.log(a)
            .map(|la| FieldElem(self.exp[((self.n - la) % self.n) as usize]))
    }

    /// `a^k` for any non-negative `k`, with `0^0 = 1`.
    pub fn pow(&self, a: FieldElem, k: u128) -> FieldElem {
        if k == 0 {
            return FieldElem::ONE;
        }
        match self.log(a) {
            None => FieldElem::ZERO,
            Some(la) => {
                let n = self.n as u128;
                FieldElem(self.exp[(la as u128 * (k % n) % n) as usize])
            }
        }
    }

    /// `x^(p^l)`; `l` is taken modulo `m`.
    pub fn frobenius(&self, x: FieldElem, l: u32) -> FieldElem {
        match self.log(x) {
            None => FieldElem::ZERO,
            Some(lx) => {
                let e = mod_pow(self.p as u64, (l % self.m) as u64, self.n as u64);
                FieldElem(self.exp[(lx as u64 * e % self.n as u64) as usize])
            }
        }
    }

    /// Absolute trace onto F_p.
    pub fn trace(&self, x: FieldElem) -> u32 {
        self.trace[x.0 as usize] as u32
    }

    /// Quadratic character: 1 on non-zero squares, -1 on non-squares, 0 at 0.
    pub fn quadratic_character(&self, x: FieldElem) -> i8 {
        match self.log(x) {
            None => 0,
            Some(l) if l % 2 == 0 => 1,
            Some(_) => -1,
        }
    }

    /// The subfield of order `p^k` in coordinate order (zero first, then
    /// increasing powers of its generator). `k` must divide `m`.
    pub fn subfield(&self, k: u32) -> Vec<FieldElem> {
        assert!(
            k > 0 && self.m.is_multiple_of(k),
            "subfield degree must divide m"
        );
        let order = self.p.pow(k) - 1;
        let step = self.n / order;
        std::iter::once(FieldElem::ZERO)
            .chain((0..order).map(|j| FieldElem(self.exp[(j * step) as usize])))
            .collect()
    }

    /// Coordinate position of `x`: 0 for zero, `1 + log x` otherwise.
    pub fn point_of(&self, x: FieldElem) -> usize {
        self.log(x).map_or(0, |l| l as usize + 1)
    }

    /// Inverse of [`FieldCtx::point_of`].
    pub fn elem_at_point(&self, point: usize) -> FieldElem {
        if point == 0 {
            FieldElem::ZERO
        } else {
            FieldElem(self.exp[point - 1])
        }
    }

    /// All elements in coordinate order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.q as usize).map(|i| self.elem_at_point(i))
    }
}

fn digits_to_rep(digits: &[u32], p: u32) -> u32 {
    digits.iter().rev().fold(0u32, |acc, &d| acc * p + d)
}

/// `cur ← cur · x mod f` on a coefficient vector.
fn times_x(cur: &mut [u32], f: &[u32], p: u32) {
    let m = cur.len();
    let carry = cur[m - 1];
    for i in (1..m).rev() {
        cur[i] = (cur[i - 1] + p - carry * f[i] % p) % p;
    }
    cur[0] = (p - carry * f[0] % p) % p;
}

fn normalise_modulus(coeffs: &[u64], p: u64, m: u32) -> Result<Vec<u32>> {
    let bad = |reason: &str| Error::BadModulus {
        expected: m,
        reason: reason.to_string(),
    };
    if coeffs.len() != m as usize + 1 {
        return Err(bad("wrong number of coefficients"));
    }
    if coeffs.iter().any(|&c| c >= p) {
        return Err(bad("coefficient out of range"));
    }
    let lead = coeffs[m as usize];
    if lead == 0 {
        return Err(bad("leading coefficient is zero"));
    }
    let inv = mod_pow(lead, p - 2, p);
    Ok(coeffs.iter().map(|&c| (c * inv % p) as u32).collect())
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u32], p: u64) -> Vec<u64> {
    let m = f.len() - 1;
    let mut prod = vec![0u64; 2 * m];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for k in (m..prod.len()).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for t in 0..m {
            prod[k - m + t] = (prod[k - m + t] + c * (p - f[t] as u64)) % p;
        }
    }
    prod.truncate(m);
    prod
}

fn x_pow_mod(f: &[u32], p: u64, mut e: u64) -> Vec<u64> {
    let m = f.len() - 1;
    let mut base = vec![0u64; m];
    if m == 1 {
        base[0] = (p - f[0] as u64) % p;
    } else {
        base[1] = 1;
    }
    let mut acc = vec![0u64; m];
    acc[0] = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &base, f, p);
        }
        base = poly_mulmod(&base, &base, f, p);
        e >>= 1;
    }
    acc
}

/// The class of x has multiplicative order exactly `n`. In a quotient ring
/// that is not a field the unit group has fewer than `n` elements, so this
/// also certifies irreducibility.
fn is_primitive(f: &[u32], p: u64, n: u64) -> bool {
    if f[0] == 0 {
        return false;
    }
    let is_one = |v: &[u64]| v[0] == 1 && v[1..].iter().all(|&c| c == 0);
    is_one(&x_pow_mod(f, p, n))
        && prime_factors(n)
            .into_iter()
            .all(|r| !is_one(&x_pow_mod(f, p, n / r)))
}

fn smallest_primitive(p: u64, m: u32, n: u64) -> Vec<u32> {
    let count = p.pow(m);
    for key in 0..count {
        // c_0 is the most significant digit of the key.
        let mut f = vec![0u32; m as usize + 1];
        let mut k = key;
        for i in (0..m as usize).rev() {
            f[i] = (k % p) as u32;
            k /= p;
        }
        f[m as usize] = 1;
        if is_primitive(&f, p, n) {
            return f;
        }
    }
    unreachable!("every finite field has a primitive polynomial")
}
