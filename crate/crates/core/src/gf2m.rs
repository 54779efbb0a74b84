//! Arithmetic in GF(2^m) for even `m`.
//!
//! Elements are stored in polynomial basis (bit `i` is the coefficient of
//! `x^i`). Multiplication and inversion go through log/antilog tables that
//! are built once per [`Field`]. The primitive element is always the residue
//! class of `x`, and its order is checked when the field is created.

use std::fmt;
use std::ops::{Add, AddAssign};

use crate::error::{Error, Result};

/// Primitive polynomials over GF(2), one per supported even degree.
const MODULI: [(u32, u32); 7] = [
    (4, 0x13),     // x^4 + x + 1
    (6, 0x43),     // x^6 + x + 1
    (8, 0x11d),    // x^8 + x^4 + x^3 + x^2 + 1
    (10, 0x409),   // x^10 + x^3 + 1
    (12, 0x1053),  // x^12 + x^6 + x^4 + x + 1
    (14, 0x4443),  // x^14 + x^10 + x^6 + x + 1
    (16, 0x1100b), // x^16 + x^12 + x^3 + x + 1
];

pub const MIN_DEGREE: u32 = 4;
pub const MAX_DEGREE: u32 = 16;

/// An element of GF(2^m).
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf(pub u16);

impl Gf {
    pub const ZERO: Gf = Gf(0);
    pub const ONE: Gf = Gf(1);

    #[inline]
    pub fn value(self) -> u16 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf({:#x})", self.0)
    }
}

impl fmt::Display for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

// Addition in characteristic two is XOR and needs no field context.
impl Add for Gf {
    type Output = Gf;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Gf) -> Gf {
        Gf(self.0 ^ rhs.0)
    }
}

impl AddAssign for Gf {
    #[inline]
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: Gf) {
        self.0 ^= rhs.0;
    }
}

/// GF(2^m) together with its modulus, primitive element and lookup tables.
#[derive(Clone)]
pub struct Field {
    m: u32,
    modulus: u32,
    order: u32,
    /// `exp[i] = λ^i` for `i` in `0..2*order` so products never need a reduction.
    exp: Vec<u16>,
    /// `log[a]` for nonzero `a`; `log[0]` is unused.
    log: Vec<u32>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("m", &self.m)
            .field("modulus", &format_args!("{:#x}", self.modulus))
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.modulus == other.modulus
    }
}

impl Eq for Field {}

impl Field {
    /// Builds GF(2^m) from the built-in modulus table.
    pub fn new(m: u32) -> Result<Self> {
        if !m.is_multiple_of(2) {
            return Err(Error::InvalidParameters(format!(
                "field degree m={m} must be even"
            )));
        }
        let modulus = MODULI
            .iter()
            .find(|(deg, _)| *deg == m)
            .map(|(_, poly)| *poly)
            .ok_or_else(|| {
                Error::UnsupportedScale(format!(
                    "field degree m={m} outside supported range {MIN_DEGREE}..={MAX_DEGREE}"
                ))
            })?;
        Self::with_modulus(m, modulus)
    }

    fn with_modulus(m: u32, modulus: u32) -> Result<Self> {
        let size = 1u32 << m;
        let order = size - 1;
        let mut exp = vec![0u16; 2 * order as usize];
        let mut log = vec![0u32; size as usize];
        let mut seen = vec![false; size as usize];
        let mut acc: u32 = 1;
        for i in 0..order {
            if seen[acc as usize] {
                // λ^i repeated before reaching the full order
                return Err(Error::Internal(format!(
                    "modulus {modulus:#x} is not primitive for m={m}"
                )));
            }
            seen[acc as usize] = true;
            exp[i as usize] = acc as u16;
            log[acc as usize] = i;
            acc <<= 1;
            if acc & size != 0 {
                acc ^= modulus;
            }
        }
        if acc != 1 {
            return Err(Error::Internal(format!(
                "modulus {modulus:#x} is not primitive for m={m}"
            )));
        }
        for i in order..2 * order {
            exp[i as usize] = exp[(i - order) as usize];
        }
        Ok(Field {
            m,
            modulus,
            order,
            exp,
            log,
        })
    }

    /// Extension degree.
    pub fn degree(&self) -> u32 {
        self.m
    }

    /// The modulus polynomial as an (m+1)-bit integer.
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Field size `Q = 2^m`.
    pub fn size(&self) -> u32 {
        self.order + 1
    }

    /// Multiplicative group order `Q - 1`.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// The primitive element λ, i.e. the residue class of `x`.
    pub fn primitive(&self) -> Gf {
        Gf(2)
    }

    /// Bytes used to serialize one element.
    pub fn symbol_bytes(&self) -> usize {
        self.m.div_ceil(8) as usize
    }

    /// Interprets `v` as an element, rejecting values with bits at or above `m`.
    pub fn element(&self, v: u32) -> Result<Gf> {
        if v >= self.size() {
            return Err(Error::InvalidParameters(format!(
                "value {v:#x} is not an element of GF(2^{})",
                self.m
            )));
        }
        Ok(Gf(v as u16))
    }

    #[inline]
    pub fn add(&self, a: Gf, b: Gf) -> Gf {
        a + b
    }

    #[inline]
    pub fn mul(&self, a: Gf, b: Gf) -> Gf {
        if a.0 == 0 || b.0 == 0 {
            return Gf::ZERO;
        }
        let idx = self.log[a.0 as usize] + self.log[b.0 as usize];
        Gf(self.exp[idx as usize])
    }

    pub fn inv(&self, a: Gf) -> Result<Gf> {
        if a.0 == 0 {
            return Err(Error::Domain("inverse of zero".into()));
        }
        let l = self.log[a.0 as usize];
        Ok(Gf(self.exp[((self.order - l) % self.order) as usize]))
    }

    pub fn div(&self, a: Gf, b: Gf) -> Result<Gf> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e`, with `0^0 = 1`.
    pub fn pow(&self, a: Gf, e: u64) -> Gf {
        if e == 0 {
            return Gf::ONE;
        }
        if a.0 == 0 {
            return Gf::ZERO;
        }
        let l = self.log[a.0 as usize] as u64 * (e % self.order as u64);
        Gf(self.exp[(l % self.order as u64) as usize])
    }

    /// `λ^e` for any exponent.
    pub fn exp(&self, e: u64) -> Gf {
        Gf(self.exp[(e % self.order as u64) as usize])
    }

    /// Discrete log base λ of a nonzero element.
    pub fn log(&self, a: Gf) -> Result<u32> {
        if a.0 == 0 {
            return Err(Error::Domain("logarithm of zero".into()));
        }
        Ok(self.log[a.0 as usize])
    }

    /// The subgroup of cubes and its two cosets under γ = λ.
    pub fn cosets(&self) -> CosetTriple {
        let len = (self.order / 3) as u64;
        let g: Vec<Gf> = (0..len).map(|i| self.exp(3 * i)).collect();
        let gamma = self.primitive();
        let gamma2 = self.mul(gamma, gamma);
        let gamma_g = g.iter().map(|&e| self.mul(gamma, e)).collect();
        let gamma2_g = g.iter().map(|&e| self.mul(gamma2, e)).collect();
        CosetTriple {
            g,
            gamma_g,
            gamma2_g,
        }
    }
}

/// `G = {λ^{3i}}` and its cosets `γG`, `γ²G`, each listed in the order of `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetTriple {
    pub g: Vec<Gf>,
    pub gamma_g: Vec<Gf>,
    pub gamma2_g: Vec<Gf>,
}
