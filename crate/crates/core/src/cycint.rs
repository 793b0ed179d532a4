//! Exact arithmetic in the ring of integers Z[ζ_p].
//!
//! Values are stored in the basis `ζ^0, …, ζ^(p-2)`; the relation
//! `ζ^(p-1) = -(1 + ζ + … + ζ^(p-2))` makes the representation canonical, so
//! structural equality is ring equality.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CycInt {
    p: u32,
    coeffs: Vec<i64>,
}

impl CycInt {
    pub fn zero(p: u32) -> Self {
        assert!(p >= 2, "p must be at least 2");
        CycInt {
            p,
            coeffs: vec![0; p as usize - 1],
        }
    }

    pub fn from_int(p: u32, c: i64) -> Self {
        let mut z = Self::zero(p);
        z.coeffs[0] = c;
        z
    }

    pub fn one(p: u32) -> Self {
        Self::from_int(p, 1)
    }

    /// `ζ^k` for any integer `k`.
    pub fn zeta_pow(p: u32, k: i64) -> Self {
        let mut full = vec![0i64; p as usize];
        full[k.rem_euclid(p as i64) as usize] = 1;
        Self::from_full(p, full)
    }

    /// `Σ_t counts[t] ζ^t`, with `t` read modulo `p`.
    pub fn from_histogram(p: u32, counts: &[u64]) -> Self {
        let mut full = vec![0i64; p as usize];
        for (t, &c) in counts.iter().enumerate() {
            full[t % p as usize] += c as i64;
        }
        Self::from_full(p, full)
    }

    /// Reduces a length-`p` coefficient vector over `ζ^0..ζ^(p-1)`.
    pub fn from_full(p: u32, mut full: Vec<i64>) -> Self {
        assert_eq!(full.len(), p as usize);
        let top = full.pop().unwrap();
        for c in &mut full {
            *c -= top;
        }
        CycInt { p, coeffs: full }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// The rational integer this value equals, if it lies in Z.
    pub fn as_integer(&self) -> Option<i64> {
        self.coeffs[1..]
            .iter()
            .all(|&c| c == 0)
            .then_some(self.coeffs[0])
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.p == other.p {
            Ok(())
        } else {
            Err(Error::MixedModulus {
                left: self.p,
                right: other.p,
            })
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(CycInt {
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(-1))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let p = self.p as usize;
        let mut full = vec![0i64; p];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                full[(i + j) % p] += a * b;
            }
        }
        Ok(Self::from_full(self.p, full))
    }

    pub fn scale(&self, c: i64) -> Self {
        CycInt {
            p: self.p,
            coeffs: self.coeffs.iter().map(|&x| x * c).collect(),
        }
    }

    /// `self · ζ^k`.
    pub fn shift(&self, k: i64) -> Self {
        self.galois_map(1, k)
    }

    /// Applies the automorphism `ζ ↦ ζ^c` (`c` prime to `p`).
    pub fn galois(&self, c: i64) -> Self {
        assert!(
            c.rem_euclid(self.p as i64) != 0,
            "Galois twist needs c prime to p"
        );
        self.galois_map(c, 0)
    }

    /// Complex conjugate, `ζ ↦ ζ^(-1)`.
    pub fn conj(&self) -> Self {
        self.galois(-1)
    }

    /// `|self|^2 = self · conj(self)`, which always lies in the real
    /// subring; for character sums it is a rational integer.
    pub fn norm_sq(&self) -> Self {
        self * &self.conj()
    }

    fn galois_map(&self, c: i64, shift: i64) -> Self {
        let p = self.p as i64;
        let mut full = vec![0i64; p as usize];
        for (i, &a) in self.coeffs.iter().enumerate() {
            full[(c * i as i64 + shift).rem_euclid(p) as usize] += a;
        }
        Self::from_full(self.p, full)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.p);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl fmt::Display for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = self.as_integer() {
            return write!(f, "{c}");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sign = match (first, c < 0) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            let mag = c.unsigned_abs();
            let term = match (i, mag) {
                (0, _) => format!("{mag}"),
                (1, 1) => "ζ".to_string(),
                (_, 1) => format!("ζ^{i}"),
                (1, _) => format!("{mag}ζ"),
                _ => format!("{mag}ζ^{i}"),
            };
            write!(f, "{sign}{term}")?;
            first = false;
        }
        Ok(())
    }
}

// Operator forms panic on mixed moduli; use the `try_` methods to get an error.
impl Add for &CycInt {
    type Output = CycInt;
    fn add(self, rhs: &CycInt) -> CycInt {
        self.try_add(rhs).expect("mixed cyclotomic moduli")
    }
}

impl Sub for &CycInt {
    type Output = CycInt;
    fn sub(self, rhs: &CycInt) -> CycInt {
        self.try_sub(rhs).expect("mixed cyclotomic moduli")
    }
}

impl Mul for &CycInt {
    type Output = CycInt;
    fn mul(self, rhs: &CycInt) -> CycInt {
        self.try_mul(rhs).expect("mixed cyclotomic moduli")
    }
}

impl Neg for &CycInt {
    type Output = CycInt;
    fn neg(self) -> CycInt {
        self.scale(-1)
    }
}
