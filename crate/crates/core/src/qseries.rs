//! Truncated power series over Z/2 in `x`, with an explicit precision.
//!
//! A [`QSeries`] of precision `N` knows its coefficients of `x^0..x^{N-1}`
//! and nothing above. Every operation returns the largest precision it can
//! justify: sums and products take the minimum, `U_2`/`U_3`/`T_p` divide it
//! by 2/3/`p`. Bits at or above the precision are never stored.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::gf2poly::BitPoly;
use crate::semilinear::{RElement, UOperator};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("{op} of a series of precision {precision} has no valid coefficients")]
    PrecisionExhausted { op: &'static str, precision: usize },
    #[error("T_p needs a prime p > 3, got {0}")]
    InvalidPrime(u64),
    #[error("p_(3,i) needs i in {{1, 2}}, got {0}")]
    InvalidResidue(u8),
    #[error("series needs r^{exponent} but the degree bound is {dmax}")]
    NotAPolynomial { exponent: usize, dmax: usize },
    #[error("precision {precision} is too low; need more than {needed}")]
    PrecisionTooLow { precision: usize, needed: usize },
}

#[derive(Clone, PartialEq, Eq)]
pub struct QSeries {
    bits: BitPoly,
    precision: usize,
}

/// Outcome of comparing two series: they agree (or not) below `bound`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SeriesComparison {
    pub bound: usize,
    pub equal: bool,
}

#[derive(Serialize)]
struct SeriesJson {
    precision: usize,
    bits_hex: String,
}

impl QSeries {
    /// Keeps the coefficients of `bits` below `precision`.
    pub fn new(mut bits: BitPoly, precision: usize) -> Self {
        bits.truncate(precision);
        QSeries { bits, precision }
    }

    pub fn zero(precision: usize) -> Self {
        QSeries {
            bits: BitPoly::zero(),
            precision,
        }
    }

    pub fn from_exponents<I: IntoIterator<Item = usize>>(exponents: I, precision: usize) -> Self {
        QSeries::new(
            BitPoly::from_exponents(exponents.into_iter().filter(|&e| e < precision)),
            precision,
        )
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn bits(&self) -> &BitPoly {
        &self.bits
    }

    /// Coefficient of `x^n`, `None` at or above the precision.
    pub fn coeff(&self, n: usize) -> Option<bool> {
        (n < self.precision).then(|| self.bits.coeff(n))
    }

    /// Zero to the known precision.
    pub fn is_zero(&self) -> bool {
        self.bits.is_zero()
    }

    pub fn exponents(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.exponents()
    }

    /// Forgets coefficients at and above `precision` (never raises it).
    pub fn with_precision(&self, precision: usize) -> QSeries {
        QSeries::new(self.bits.clone(), precision.min(self.precision))
    }

    pub fn compare(&self, other: &QSeries) -> SeriesComparison {
        let bound = self.precision.min(other.precision);
        SeriesComparison {
            bound,
            equal: self.bits.truncated(bound) == other.bits.truncated(bound),
        }
    }

    /// Agreement below the common precision.
    pub fn agrees_with(&self, other: &QSeries) -> bool {
        self.compare(other).equal
    }

    pub fn add(&self, other: &QSeries) -> QSeries {
        QSeries::new(
            &self.bits + &other.bits,
            self.precision.min(other.precision),
        )
    }

    pub fn mul(&self, other: &QSeries) -> QSeries {
        let precision = self.precision.min(other.precision);
        let (sparse, dense) = if self.bits.weight() <= other.bits.weight() {
            (&self.bits, &other.bits)
        } else {
            (&other.bits, &self.bits)
        };
        let dense = dense.truncated(precision);
        let mut out = BitPoly::zero();
        for e in sparse.exponents().take_while(|&e| e < precision) {
            out.add_shifted(&dense.truncated(precision - e), e);
        }
        QSeries::new(out, precision)
    }

    pub fn square(&self) -> QSeries {
        QSeries::new(self.bits.substitute_square(), self.precision)
    }

    pub fn pow(&self, mut n: u64) -> QSeries {
        let mut result = QSeries::new(BitPoly::one(), self.precision);
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

    fn decimate(&self, d: usize, op: &'static str) -> Result<QSeries, SeriesError> {
        let precision = self.precision / d;
        if precision == 0 {
            return Err(SeriesError::PrecisionExhausted {
                op,
                precision: self.precision,
            });
        }
        let exps = self.bits.exponents().filter(|e| e % d == 0).map(|e| e / d);
        Ok(QSeries::from_exponents(exps, precision))
    }

    /// `sum a_n x^n -> sum a_{2n} x^n`.
    pub fn u2(&self) -> Result<QSeries, SeriesError> {
        self.decimate(2, "U_2")
    }

    /// `sum a_n x^n -> sum a_{3n} x^n`.
    pub fn u3(&self) -> Result<QSeries, SeriesError> {
        self.decimate(3, "U_3")
    }

    /// `sum a_n x^n -> sum a_{pn} x^n + sum a_n x^{pn}` for a prime `p > 3`.
    /// The result has precision `floor(N/p)`.
    pub fn tp(&self, p: u64) -> Result<QSeries, SeriesError> {
        if p <= 3 || !is_prime(p) {
            return Err(SeriesError::InvalidPrime(p));
        }
        let p = p as usize;
        let precision = self.precision / p;
        if precision == 0 {
            return Err(SeriesError::PrecisionExhausted {
                op: "T_p",
                precision: self.precision,
            });
        }
        let mut out = BitPoly::zero();
        for e in self.bits.exponents() {
            if e % p == 0 && e / p < precision {
                out.flip(e / p);
            }
            if e * p < precision {
                out.flip(e * p);
            }
        }
        Ok(QSeries {
            bits: out,
            precision,
        })
    }

    /// Keeps the terms whose exponent is `i` mod 3.
    pub fn p3i(&self, i: u8) -> Result<QSeries, SeriesError> {
        if !(i == 1 || i == 2) {
            return Err(SeriesError::InvalidResidue(i));
        }
        let exps = self.bits.exponents().filter(|e| e % 3 == i as usize);
        Ok(QSeries::from_exponents(exps, self.precision))
    }

    /// `"x^1+x^9+x^25"`, ascending; zero is `"0"`.
    pub fn to_exponent_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        self.exponents()
            .map(|e| format!("x^{e}"))
            .collect::<Vec<_>>()
            .join("+")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SeriesJson {
            precision: self.precision,
            bits_hex: self.bits.to_hex(),
        })
        .expect("plain struct")
    }
}

impl fmt::Debug for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "QSeries({} + O(x^{}))",
            self.to_exponent_text(),
            self.precision
        )
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesConst {
    /// `sum_{n>0} x^{n^2} + x^{2n^2} + x^{3n^2} + x^{6n^2}`
    R,
    /// `sum_{n odd} x^{n^2}`
    F,
    /// `F(x^3)`
    G,
    /// `sum_{n odd, 3 not dividing n} x^{n^2}`
    D,
}

/// The series by direct enumeration of exponents below `precision`.
pub fn series_const(which: SeriesConst, precision: usize) -> QSeries {
    let squares = (1usize..)
        .map(|n| (n, n * n))
        .take_while(|&(_, sq)| sq < precision);
    let exps: Vec<usize> = match which {
        SeriesConst::R => squares
            .flat_map(|(_, sq)| [sq, 2 * sq, 3 * sq, 6 * sq])
            .collect(),
        SeriesConst::F => squares
            .filter(|(n, _)| n % 2 == 1)
            .map(|(_, sq)| sq)
            .collect(),
        SeriesConst::G => squares
            .filter(|(n, _)| n % 2 == 1)
            .map(|(_, sq)| 3 * sq)
            .collect(),
        SeriesConst::D => squares
            .filter(|(n, _)| n % 2 == 1 && n % 3 != 0)
            .map(|(_, sq)| sq)
            .collect(),
    };
    QSeries::from_exponents(exps, precision)
}

/// Evaluates `f` at the series `r` by Horner's rule.
pub fn series_of_r_poly(f: &RElement, precision: usize) -> QSeries {
    let r = series_const(SeriesConst::R, precision);
    let mut acc = QSeries::zero(precision);
    if let Some(d) = f.deg() {
        for k in (0..=d).rev() {
            acc = acc.mul(&r);
            if f.poly().coeff(k) {
                acc = acc.add(&QSeries::new(BitPoly::one(), precision));
            }
        }
    }
    acc
}

/// Series of `r^0, ..., r^dmax` at a fixed precision.
#[derive(Clone, Debug)]
pub struct RPowers {
    powers: Vec<QSeries>,
    precision: usize,
}

impl RPowers {
    pub fn new(dmax: usize, precision: usize) -> Self {
        let r = series_const(SeriesConst::R, precision);
        let mut powers = Vec::with_capacity(dmax + 1);
        powers.push(QSeries::new(BitPoly::one(), precision));
        for k in 1..=dmax {
            let next = powers[k - 1].mul(&r);
            powers.push(next);
        }
        RPowers { powers, precision }
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn dmax(&self) -> usize {
        self.powers.len() - 1
    }

    pub fn power(&self, k: usize) -> &QSeries {
        &self.powers[k]
    }

    /// # Panics
    /// If `f` has degree above [`dmax`](Self::dmax).
    pub fn eval(&self, f: &RElement) -> QSeries {
        let mut acc = BitPoly::zero();
        for k in f.poly().exponents() {
            acc += self.powers[k].bits();
        }
        QSeries {
            bits: acc,
            precision: self.precision,
        }
    }

    /// Greedy inverse of [`eval`](Self::eval): `r^k = x^k + ...`, so the
    /// lowest surviving exponent names the next power of `r` to remove.
    /// Works at `s.precision()`, which must not exceed the table's.
    pub fn reconstruct(&self, s: &QSeries, dmax: usize) -> Result<RElement, SeriesError> {
        let dmax = dmax.min(self.dmax());
        if dmax >= s.precision() {
            return Err(SeriesError::PrecisionTooLow {
                precision: s.precision(),
                needed: dmax,
            });
        }
        assert!(
            s.precision() <= self.precision,
            "series precision exceeds the r-power table"
        );
        let mut residual = s.bits().clone();
        let mut out = BitPoly::zero();
        while let Some(k) = residual.low_degree() {
            if k > dmax {
                return Err(SeriesError::NotAPolynomial { exponent: k, dmax });
            }
            residual += &self.powers[k].bits().truncated(s.precision());
            out.flip(k);
        }
        Ok(RElement(out))
    }
}

/// The polynomial in `r` of degree at most `dmax` whose series is `s`.
pub fn r_poly_of_series(s: &QSeries, dmax: usize) -> Result<RElement, SeriesError> {
    if dmax >= s.precision() {
        return Err(SeriesError::PrecisionTooLow {
            precision: s.precision(),
            needed: dmax,
        });
    }
    RPowers::new(dmax, s.precision()).reconstruct(s, dmax)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct U3Check {
    pub nmax: usize,
    pub precision: usize,
    pub compared_to: usize,
    pub passed: bool,
    pub first_failure: Option<usize>,
}

/// Compares `U_3` on the series of `r^n` with the series of `U(r^n)` for
/// every `n <= nmax`. Needs `floor(N/3) > 2 nmax`.
pub fn check_u3_equals_u(nmax: usize, precision: usize) -> Result<U3Check, SeriesError> {
    if precision / 3 <= 2 * nmax {
        return Err(SeriesError::PrecisionTooLow {
            precision,
            needed: 6 * nmax + 2,
        });
    }
    let powers = RPowers::new(nmax, precision);
    let u = UOperator::new(nmax);
    let compared_to = precision / 3;
    let mut first_failure = None;
    for n in 0..=nmax {
        let lhs = powers.power(n).u3()?;
        let rhs = powers
            .eval(&u.apply(&RElement::r_pow(n)))
            .with_precision(compared_to);
        if !lhs.agrees_with(&rhs) {
            first_failure = Some(n);
            break;
        }
    }
    Ok(U3Check {
        nmax,
        precision,
        compared_to,
        passed: first_failure.is_none(),
        first_failure,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossCheck {
    pub name: &'static str,
    pub precision: usize,
    pub equal: bool,
}

/// Polynomial-in-`r` evaluation of `F`, `G`, and `p_(3,1)(F)` against the
/// direct exponent enumerations.
pub fn cross_representation_checks(precision: usize) -> Vec<CrossCheck> {
    let (f, g) = crate::semilinear::constants();
    let f_series = series_of_r_poly(&f, precision);
    let g_series = series_of_r_poly(&g, precision);
    let d_series = f_series.p3i(1).expect("valid residue");
    [
        ("F", f_series, SeriesConst::F),
        ("G", g_series, SeriesConst::G),
        ("D", d_series, SeriesConst::D),
    ]
    .into_iter()
    .map(|(name, s, which)| CrossCheck {
        name,
        precision,
        equal: s.compare(&series_const(which, precision))
            == SeriesComparison {
                bound: precision,
                equal: true,
            },
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semilinear::{constants, u_monomial_table};

    fn xs(exps: &[usize], n: usize) -> QSeries {
        QSeries::from_exponents(exps.iter().copied(), n)
    }

    #[test]
    fn constants_by_enumeration() {
        assert_eq!(series_const(SeriesConst::F, 30), xs(&[1, 9, 25], 30));
        assert_eq!(series_const(SeriesConst::D, 50), xs(&[1, 25, 49], 50));
        assert_eq!(
            series_const(SeriesConst::R, 10),
            xs(&[1, 2, 3, 4, 6, 8, 9], 10)
        );
        assert_eq!(series_const(SeriesConst::G, 30), xs(&[3, 27], 30));
    }

    #[test]
    fn decimation_examples() {
        let n = 900;
        let f = series_const(SeriesConst::F, n);
        let g = series_const(SeriesConst::G, n);
        assert!(f.u2().unwrap().is_zero());
        assert_eq!(f.u2().unwrap().precision(), 450);
        assert!(g.u3().unwrap().agrees_with(&f));
        assert_eq!(g.u3().unwrap().precision(), 300);
        let r = series_const(SeriesConst::R, n);
        assert!(r.u3().unwrap().agrees_with(&r));
        assert!(matches!(
            xs(&[], 1).u2(),
            Err(SeriesError::PrecisionExhausted { .. })
        ));
        assert!(matches!(
            xs(&[], 2).u3(),
            Err(SeriesError::PrecisionExhausted { .. })
        ));
    }

    #[test]
    fn tp_examples() {
        let n = 7000;
        let fg = series_const(SeriesConst::F, n).add(&series_const(SeriesConst::G, n));
        let t7 = fg.tp(7).unwrap();
        assert_eq!(t7.precision(), 1000);
        assert!(t7.is_zero());
        assert!(QSeries::zero(100).tp(5).unwrap().is_zero());
        assert_eq!(xs(&[1], 100).tp(5).unwrap(), xs(&[5], 20));
        assert_eq!(xs(&[1], 100).tp(4), Err(SeriesError::InvalidPrime(4)));
        assert_eq!(xs(&[1], 100).tp(3), Err(SeriesError::InvalidPrime(3)));
        assert!(matches!(
            xs(&[1], 6).tp(7),
            Err(SeriesError::PrecisionExhausted { .. })
        ));
    }

    #[test]
    fn p3i_examples() {
        let n = 2000;
        let f = series_const(SeriesConst::F, n);
        assert_eq!(f.p3i(1).unwrap(), series_const(SeriesConst::D, n));
        assert!(series_const(SeriesConst::G, n).p3i(1).unwrap().is_zero());
        let r = series_const(SeriesConst::R, n);
        let zero_part = QSeries::from_exponents(r.exponents().filter(|e| e % 3 == 0), n);
        assert_eq!(r.p3i(1).unwrap().add(&r.p3i(2).unwrap()).add(&zero_part), r);
        assert_eq!(r.p3i(0), Err(SeriesError::InvalidResidue(0)));
    }

    #[test]
    fn r_poly_round_trips() {
        let n = 400;
        let (f, g) = constants();
        assert_eq!(
            series_of_r_poly(&RElement::r_pow(1), n),
            series_const(SeriesConst::R, n)
        );
        assert_eq!(series_of_r_poly(&f, n), series_const(SeriesConst::F, n));
        assert_eq!(series_of_r_poly(&g, n), series_const(SeriesConst::G, n));
        let fg = series_of_r_poly(&(&f + &g), n);
        assert_eq!(r_poly_of_series(&fg, 2).unwrap(), &f + &g);
        assert!(matches!(
            r_poly_of_series(&xs(&[1], 10), 5),
            Err(SeriesError::NotAPolynomial { dmax: 5, .. })
        ));
        assert!(r_poly_of_series(&QSeries::zero(10), 5).unwrap().is_zero());
        assert!(matches!(
            r_poly_of_series(&fg, n),
            Err(SeriesError::PrecisionTooLow { .. })
        ));
    }

    #[test]
    fn horner_matches_power_table() {
        let n = 1500;
        let powers = RPowers::new(60, n);
        let f = RElement(BitPoly::from_u64(0xdead_beef_1234_5678 >> 4));
        assert_eq!(powers.eval(&f), series_of_r_poly(&f, n));
        assert_eq!(powers.reconstruct(&powers.eval(&f), 60).unwrap(), f);
    }

    #[test]
    fn u3_matches_u() {
        let rep = check_u3_equals_u(4, 256).unwrap();
        assert!(rep.passed);
        let table = u_monomial_table(6);
        let n = 600;
        let lhs = series_of_r_poly(&RElement::r_pow(6), n).u3().unwrap();
        assert!(lhs.agrees_with(&series_of_r_poly(&table[6], n)));
        assert!(check_u3_equals_u(64, 300).is_err());
    }

    #[test]
    fn cross_checks_small() {
        assert!(cross_representation_checks(500).iter().all(|c| c.equal));
    }

    #[test]
    fn precision_bookkeeping() {
        let a = xs(&[1, 5], 40);
        let b = xs(&[2], 25);
        assert_eq!(a.add(&b).precision(), 25);
        assert_eq!(a.mul(&b), xs(&[3, 7], 25));
        assert_eq!(a.coeff(5), Some(true));
        assert_eq!(a.coeff(40), None);
        let cmp = a.compare(&xs(&[1, 5, 30], 30));
        assert_eq!(
            cmp,
            SeriesComparison {
                bound: 30,
                equal: true
            }
        );
        assert_eq!(a.to_exponent_text(), "x^1+x^5");
        assert_eq!(a.to_json(), r#"{"precision":40,"bits_hex":"22"}"#);
    }

    #[test]
    fn corruption_above_precision_is_invisible() {
        let n = 4096;
        let exact = series_const(SeriesConst::R, 2 * n).mul(&series_const(SeriesConst::F, 2 * n));
        for bump in [n, n + 1, n + 7, 2 * n - 1] {
            let mut corrupted = exact.bits().clone();
            corrupted.flip(bump);
            let a = QSeries::new(exact.bits().clone(), n);
            let b = QSeries::new(corrupted, n);
            assert_eq!(a, b);
            for p in [5, 7, 11, 13] {
                assert_eq!(a.tp(p).unwrap(), b.tp(p).unwrap());
            }
            assert_eq!(a.u2().unwrap(), b.u2().unwrap());
            assert_eq!(a.u3().unwrap(), b.u3().unwrap());
            // and the exact answer at the lower precision agrees with the truncated one
            assert!(exact.tp(7).unwrap().agrees_with(&a.tp(7).unwrap()));
        }
    }
}
