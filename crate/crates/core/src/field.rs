//! Arithmetic in the symbol field GF(2^m), `1 <= m <= 16`, and in the index
//! ring Z_q used for row coordinates.
//!
//! Symbols are stored as [`FieldElem`], a plain `u16` newtype. All arithmetic
//! goes through a [`FieldSpec`], which owns log/antilog tables built once at
//! construction from a generator of the multiplicative group. A `FieldSpec`
//! is cheap to clone (the tables sit behind an `Arc`).
//!
//! The default reduction polynomial for each `m` is fixed by
//! [`DEFAULT_POLYS`]. Shards written with one build must decode with another,
//! so this table must never change.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest supported extension degree. A symbol always fits in two bytes.
pub const MAX_DEGREE: u32 = 16;

/// Default reduction polynomial for each extension degree `m` (index `m - 1`),
/// as a bitmask including the leading `x^m` term.
///
/// | m  | polynomial                     |
/// |----|--------------------------------|
/// | 1  | x + 1                          |
/// | 2  | x^2 + x + 1                    |
/// | 3  | x^3 + x + 1                    |
/// | 4  | x^4 + x + 1                    |
/// | 5  | x^5 + x^2 + 1                  |
/// | 6  | x^6 + x + 1                    |
/// | 7  | x^7 + x + 1                    |
/// | 8  | x^8 + x^4 + x^3 + x^2 + 1      |
/// | 9  | x^9 + x^4 + 1                  |
/// | 10 | x^10 + x^3 + 1                 |
/// | 11 | x^11 + x^2 + 1                 |
/// | 12 | x^12 + x^6 + x^4 + x + 1       |
/// | 13 | x^13 + x^4 + x^3 + x + 1       |
/// | 14 | x^14 + x^10 + x^6 + x + 1      |
/// | 15 | x^15 + x + 1                   |
/// | 16 | x^16 + x^12 + x^3 + x + 1      |
///
/// Every entry for `m >= 2` is primitive, so `x` (the element `2`) generates
/// the multiplicative group.
pub const DEFAULT_POLYS: [u32; 16] = [
    0b11, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B,
];

/// One element of GF(2^m). Only meaningful together with the [`FieldSpec`]
/// it was produced by.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElem(pub u16);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    #[inline]
    pub fn value(self) -> u16 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u16> for FieldElem {
    fn from(v: u16) -> Self {
        FieldElem(v)
    }
}

struct Tables {
    /// `exp[i] = g^i` for `i` in `0..2 * order`, doubled so products of two
    /// logs index without a modulo.
    exp: Vec<u16>,
    /// `log[a]` for `a != 0`; `log[0]` is unused.
    log: Vec<u32>,
    generator: u16,
}

/// The symbol field GF(2^m) with a fixed reduction polynomial.
#[derive(Clone)]
pub struct FieldSpec {
    m: u32,
    poly: u32,
    tables: Arc<Tables>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("m", &self.m)
            .field("reduction_poly", &format_args!("{:#b}", self.poly))
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.poly == other.poly
    }
}

impl Eq for FieldSpec {}

/// Degree of a GF(2) polynomial given as a bitmask; `None` for zero.
fn poly_degree(p: u32) -> Option<u32> {
    (p != 0).then(|| 31 - p.leading_zeros())
}

/// Remainder of `a` divided by `b` over GF(2).
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b).expect("division by zero polynomial");
    while let Some(da) = poly_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Irreducibility over GF(2) by trial division with every polynomial of
/// degree `1..=deg/2`.
pub fn is_irreducible(poly: u32) -> bool {
    let Some(deg) = poly_degree(poly) else {
        return false;
    };
    if deg == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        for divisor in (1u32 << d)..(1u32 << (d + 1)) {
            if poly_rem(poly, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

/// Carry-less multiply followed by reduction. Used to build the tables and as
/// a table-free reference in tests.
pub fn mul_reference(a: u16, b: u16, m: u32, poly: u32) -> u16 {
    let mut acc: u32 = 0;
    let mut a = a as u32;
    let mut b = b as u32;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> m & 1 == 1 {
            a ^= poly;
        }
    }
    acc as u16
}

impl FieldSpec {
    /// Builds GF(2^m) with the default polynomial from [`DEFAULT_POLYS`].
    pub fn new(m: u32) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&m) {
            return Err(Error::FieldDegree(m));
        }
        Self::with_poly(m, DEFAULT_POLYS[m as usize - 1])
    }

    /// Builds GF(2^m) with an explicit reduction polynomial. The polynomial
    /// must have degree exactly `m` and be irreducible.
    pub fn with_poly(m: u32, poly: u32) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&m) {
            return Err(Error::FieldDegree(m));
        }
        if poly_degree(poly) != Some(m) || !is_irreducible(poly) {
            return Err(Error::ReduciblePolynomial { m, poly });
        }
        let order = (1usize << m) - 1;
        // smallest element whose powers hit every nonzero element
        let generator = (1..=order as u16)
            .find(|&g| {
                let mut x = 1u16;
                for i in 1..=order {
                    x = mul_reference(x, g, m, poly);
                    if x == 1 {
                        return i == order;
                    }
                }
                false
            })
            .expect("multiplicative group of a field is cyclic");

        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u32; order + 1];
        let mut x = 1u16;
        for i in 0..order {
            exp[i] = x;
            exp[i + order] = x;
            log[x as usize] = i as u32;
            x = mul_reference(x, generator, m, poly);
        }
        Ok(FieldSpec {
            m,
            poly,
            tables: Arc::new(Tables {
                exp,
                log,
                generator,
            }),
        })
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    /// Full bitmask of the reduction polynomial, leading term included.
    pub fn reduction_poly(&self) -> u32 {
        self.poly
    }

    /// Number of elements, `2^m`.
    pub fn size(&self) -> usize {
        1 << self.m
    }

    /// Order of the multiplicative group, `2^m - 1`.
    pub fn order(&self) -> usize {
        self.size() - 1
    }

    /// The generator used for the log tables: the smallest primitive element.
    pub fn generator(&self) -> FieldElem {
        FieldElem(self.tables.generator)
    }

    /// Checks that `v` is a valid element of this field.
    pub fn elem(&self, v: u16) -> Result<FieldElem> {
        if (v as usize) < self.size() {
            Ok(FieldElem(v))
        } else {
            Err(Error::ElementOutOfRange {
                value: v,
                m: self.m,
            })
        }
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(a.0 ^ b.0)
    }

    /// Same as [`add`](Self::add); characteristic 2.
    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(a.0 ^ b.0)
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 == 0 || b.0 == 0 {
            return FieldElem::ZERO;
        }
        let t = &self.tables;
        FieldElem(t.exp[(t.log[a.0 as usize] + t.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let t = &self.tables;
        let l = t.log[a.0 as usize] as usize;
        Ok(FieldElem(t.exp[(self.order() - l) % self.order()]))
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElem, e: u64) -> FieldElem {
        if e == 0 {
            return FieldElem::ONE;
        }
        if a.0 == 0 {
            return FieldElem::ZERO;
        }
        let t = &self.tables;
        let l = t.log[a.0 as usize] as u64 * (e % self.order() as u64);
        FieldElem(t.exp[(l % self.order() as u64) as usize])
    }

    /// `g^i` for the table generator `g`.
    pub fn exp(&self, i: usize) -> FieldElem {
        FieldElem(self.tables.exp[i % self.order()])
    }

    /// Iterator over every nonzero element in ascending integer order.
    pub fn nonzero_elements(&self) -> impl Iterator<Item = FieldElem> {
        (1..self.size()).map(|v| FieldElem(v as u16))
    }
}

/// The index ring Z_q. Row coordinates live here; `x - delta` wraps mod `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexRing {
    q: usize,
}

impl IndexRing {
    pub fn new(q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParams(format!(
                "index ring modulus q={q} must be >= 2"
            )));
        }
        Ok(IndexRing { q })
    }

    pub fn modulus(&self) -> usize {
        self.q
    }

    /// `(a - b) mod q` for `a, b` in `[0, q)`.
    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < self.q && b < self.q);
        (a + self.q - b) % self.q
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        (a + b) % self.q
    }
}
