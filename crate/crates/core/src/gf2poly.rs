//! Dense polynomials over the two-element field.
//!
//! Coefficients are packed 64 per word, little-endian by exponent: bit `k`
//! of the sequence is the coefficient of `t^k`. The same type is used for
//! polynomials in `t`, in `r`, and as a plain bit row by the linear algebra
//! code, so nothing here fixes the name of the variable except the text form.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;

use thiserror::Error;

const WORD_BITS: usize = 64;

/// Degree of a polynomial; the zero polynomial has degree `NegInfinity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(usize),
}

impl Degree {
    pub fn finite(self) -> Option<usize> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

impl PartialOrd for Degree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Degree {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Degree::NegInfinity, Degree::NegInfinity) => Ordering::Equal,
            (Degree::NegInfinity, _) => Ordering::Less,
            (_, Degree::NegInfinity) => Ordering::Greater,
            (Degree::Finite(a), Degree::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => f.write_str("-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParsePolyError {
    #[error("empty polynomial text")]
    Empty,
    #[error("malformed term `{0}`")]
    BadTerm(String),
    #[error("invalid hex string: {0}")]
    BadHex(String),
}

/// A polynomial over Z/2 with bit-packed coefficients.
///
/// Storage is kept canonical: the last word is never zero, so the derived
/// equality is equality of polynomials.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitPoly {
    words: Vec<u64>,
}

impl BitPoly {
    pub fn zero() -> Self {
        BitPoly { words: Vec::new() }
    }

    pub fn one() -> Self {
        BitPoly::monomial(0)
    }

    /// `t^k`.
    pub fn monomial(k: usize) -> Self {
        let mut words = vec![0u64; k / WORD_BITS + 1];
        words[k / WORD_BITS] = 1u64 << (k % WORD_BITS);
        BitPoly { words }
    }

    /// Sum of `t^e` over the given exponents; repeated exponents cancel.
    pub fn from_exponents<I: IntoIterator<Item = usize>>(exponents: I) -> Self {
        let mut p = BitPoly::zero();
        for e in exponents {
            p.flip(e);
        }
        p
    }

    pub fn from_words(mut words: Vec<u64>) -> Self {
        trim(&mut words);
        BitPoly { words }
    }

    /// Low bits of `bits` as a polynomial (bit `k` = coefficient of `t^k`).
    pub fn from_u64(bits: u64) -> Self {
        BitPoly::from_words(vec![bits])
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn degree(&self) -> Degree {
        match self.words.last() {
            None => Degree::NegInfinity,
            Some(&w) => Degree::Finite(
                (self.words.len() - 1) * WORD_BITS + (WORD_BITS - 1 - w.leading_zeros() as usize),
            ),
        }
    }

    /// Degree as an option, `None` for zero.
    pub fn deg(&self) -> Option<usize> {
        self.degree().finite()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn low_degree(&self) -> Option<usize> {
        self.words
            .iter()
            .position(|&w| w != 0)
            .map(|i| i * WORD_BITS + self.words[i].trailing_zeros() as usize)
    }

    pub fn coeff(&self, k: usize) -> bool {
        self.words
            .get(k / WORD_BITS)
            .is_some_and(|w| (w >> (k % WORD_BITS)) & 1 == 1)
    }

    pub fn flip(&mut self, k: usize) {
        let w = k / WORD_BITS;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] ^= 1u64 << (k % WORD_BITS);
        trim(&mut self.words);
    }

    pub fn set(&mut self, k: usize, value: bool) {
        if self.coeff(k) != value {
            self.flip(k);
        }
    }

    /// Number of nonzero coefficients.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Exponents with a nonzero coefficient, ascending.
    pub fn exponents(&self) -> Exponents<'_> {
        Exponents {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    /// `self += other * t^shift`.
    pub fn add_shifted(&mut self, other: &BitPoly, shift: usize) {
        if other.is_zero() {
            return;
        }
        let word_shift = shift / WORD_BITS;
        let bit_shift = shift % WORD_BITS;
        let needed = other.words.len() + word_shift + usize::from(bit_shift != 0);
        if self.words.len() < needed {
            self.words.resize(needed, 0);
        }
        if bit_shift == 0 {
            for (dst, &src) in self.words[word_shift..].iter_mut().zip(&other.words) {
                *dst ^= src;
            }
        } else {
            let mut carry = 0u64;
            for (i, &src) in other.words.iter().enumerate() {
                self.words[word_shift + i] ^= (src << bit_shift) | carry;
                carry = src >> (WORD_BITS - bit_shift);
            }
            self.words[word_shift + other.words.len()] ^= carry;
        }
        trim(&mut self.words);
    }

    /// `self * t^k`.
    pub fn shl(&self, k: usize) -> BitPoly {
        let mut out = BitPoly::zero();
        out.add_shifted(self, k);
        out
    }

    /// Drops every coefficient of exponent `>= n`.
    pub fn truncate(&mut self, n: usize) {
        let full = n / WORD_BITS;
        if full >= self.words.len() {
            return;
        }
        self.words.truncate(full + 1);
        let rem = n % WORD_BITS;
        self.words[full] &= if rem == 0 { 0 } else { (1u64 << rem) - 1 };
        trim(&mut self.words);
    }

    pub fn truncated(&self, n: usize) -> BitPoly {
        let mut out = self.clone();
        out.truncate(n);
        out
    }

    /// Product over Z/2. Shift-and-XOR over the set bits of the sparser factor.
    pub fn mul(&self, other: &BitPoly) -> BitPoly {
        let (sparse, dense) = if self.weight() <= other.weight() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = BitPoly::zero();
        if sparse.is_zero() {
            return out;
        }
        out.words.reserve(self.words.len() + other.words.len());
        for e in sparse.exponents() {
            out.add_shifted(dense, e);
        }
        out
    }

    /// `g(t) -> g(t^2)`: bit `k` moves to bit `2k`. Equal to `g * g` over Z/2.
    pub fn substitute_square(&self) -> BitPoly {
        let mut words = Vec::with_capacity(2 * self.words.len());
        for &w in &self.words {
            words.push(spread_bits(w as u32));
            words.push(spread_bits((w >> 32) as u32));
        }
        BitPoly::from_words(words)
    }

    pub fn square(&self) -> BitPoly {
        self.substitute_square()
    }

    /// Inverse of [`substitute_square`](Self::substitute_square); `None` if
    /// some odd exponent is present.
    pub fn unsubstitute_square(&self) -> Option<BitPoly> {
        let mut words = Vec::with_capacity(self.words.len().div_ceil(2));
        for pair in self.words.chunks(2) {
            let lo = pair[0];
            let hi = pair.get(1).copied().unwrap_or(0);
            if (lo | hi) & 0xAAAA_AAAA_AAAA_AAAA != 0 {
                return None;
            }
            words.push(u64::from(compact_bits(lo)) | (u64::from(compact_bits(hi)) << 32));
        }
        Some(BitPoly::from_words(words))
    }

    pub fn pow(&self, mut n: u64) -> BitPoly {
        let mut result = BitPoly::one();
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.square();
            }
        }
        result
    }

    /// Evaluates `self` at another polynomial: `self(inner)`.
    pub fn compose(&self, inner: &BitPoly) -> BitPoly {
        let Some(d) = self.deg() else {
            return BitPoly::zero();
        };
        let mut acc = BitPoly::zero();
        for k in (0..=d).rev() {
            acc = acc.mul(inner);
            if self.coeff(k) {
                acc.flip(0);
            }
        }
        acc
    }

    /// Compact form: bytes little-endian by exponent, each byte as two hex
    /// digits. Zero is `"00"`.
    pub fn to_hex(&self) -> String {
        if self.is_zero() {
            return "00".to_string();
        }
        let nbytes = self.deg().unwrap() / 8 + 1;
        let mut s = String::with_capacity(2 * nbytes);
        for i in 0..nbytes {
            let byte = (self.words[i / 8] >> (8 * (i % 8))) as u8;
            s.push_str(&format!("{byte:02x}"));
        }
        s
    }

    pub fn from_hex(s: &str) -> Result<BitPoly, ParsePolyError> {
        let s = s.trim();
        if s.is_empty() || s.len() % 2 != 0 {
            return Err(ParsePolyError::BadHex(s.to_string()));
        }
        let mut words = vec![0u64; (s.len() / 2).div_ceil(8)];
        for (i, chunk) in s.as_bytes().chunks(2).enumerate() {
            let text = std::str::from_utf8(chunk).map_err(|_| ParsePolyError::BadHex(s.into()))?;
            let byte =
                u8::from_str_radix(text, 16).map_err(|_| ParsePolyError::BadHex(s.to_string()))?;
            words[i / 8] |= u64::from(byte) << (8 * (i % 8));
        }
        Ok(BitPoly::from_words(words))
    }

    /// Text form in an arbitrary variable name, descending exponents.
    pub fn to_text(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut terms: Vec<String> = self
            .exponents()
            .map(|e| match e {
                0 => "1".to_string(),
                1 => var.to_string(),
                _ => format!("{var}^{e}"),
            })
            .collect();
        terms.reverse();
        terms.join("+")
    }

    /// Parses the text form in the given variable. Terms may repeat; they
    /// are summed mod 2.
    pub fn parse_text(s: &str, var: &str) -> Result<BitPoly, ParsePolyError> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(ParsePolyError::Empty);
        }
        if s == "0" {
            return Ok(BitPoly::zero());
        }
        let mut p = BitPoly::zero();
        for term in s.split('+') {
            let e = if term == "1" {
                0
            } else if term == var {
                1
            } else if let Some(rest) = term.strip_prefix(var).and_then(|r| r.strip_prefix('^')) {
                rest.parse::<usize>()
                    .map_err(|_| ParsePolyError::BadTerm(term.to_string()))?
            } else {
                return Err(ParsePolyError::BadTerm(term.to_string()));
            };
            p.flip(e);
        }
        Ok(p)
    }
}

impl fmt::Display for BitPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text("t"))
    }
}

impl fmt::Debug for BitPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitPoly({})", self)
    }
}

impl FromStr for BitPoly {
    type Err = ParsePolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BitPoly::parse_text(s, "t")
    }
}

impl AddAssign<&BitPoly> for BitPoly {
    fn add_assign(&mut self, rhs: &BitPoly) {
        self.add_shifted(rhs, 0);
    }
}

impl Add<&BitPoly> for &BitPoly {
    type Output = BitPoly;

    fn add(self, rhs: &BitPoly) -> BitPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for BitPoly {
    type Output = BitPoly;

    fn add(mut self, rhs: BitPoly) -> BitPoly {
        self += &rhs;
        self
    }
}

impl Mul<&BitPoly> for &BitPoly {
    type Output = BitPoly;

    fn mul(self, rhs: &BitPoly) -> BitPoly {
        BitPoly::mul(self, rhs)
    }
}

pub struct Exponents<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Exponents<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * WORD_BITS + bit);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

fn trim(words: &mut Vec<u64>) {
    while words.last() == Some(&0) {
        words.pop();
    }
}

fn spread_bits(x: u32) -> u64 {
    let mut x = u64::from(x);
    x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

fn compact_bits(mut x: u64) -> u32 {
    x &= 0x5555_5555_5555_5555;
    x = (x | (x >> 1)) & 0x3333_3333_3333_3333;
    x = (x | (x >> 2)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x >> 4)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x >> 8)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x >> 16)) & 0x0000_0000_FFFF_FFFF;
    x as u32
}
