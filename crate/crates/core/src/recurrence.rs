//! The families `A_n` and `C_n = A_n + t^n` in Z/2[t].
//!
//! `C_{n+4} = C_{n+3} + (t^4+t^3+t^2+t) C_n + t^n (t^2+t)` from the seeds
//! `0, 1, t, t^2`. Every `C_{4m}` is a sum of earlier `C_k`; the expander
//! here finds that sum using only the `k` not divisible by 4, which have
//! pairwise distinct degrees `k - 1` and so give a unique combination.

use std::io;

use serde::Serialize;
use thiserror::Error;

use crate::gf2linalg::{IncrementalEchelon, Insertion};
use crate::gf2poly::{BitPoly, Degree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecurrenceError {
    #[error("C_{k} depends on earlier C_j with j not divisible by 4")]
    RestrictedFamilyDependent { k: usize },
    #[error("C_{n} with n = 4*{m} is not a sum of earlier C_k")]
    NotExpressible { m: usize, n: usize },
    #[error("expander already past m = {requested} (next is {next})")]
    AlreadyPast { requested: usize, next: usize },
}

fn shift_sum_step(window: &[BitPoly; 4], n: usize, inhomogeneous: bool) -> BitPoly {
    let mut next = window[3].clone();
    for s in 1..=4 {
        next.add_shifted(&window[0], s);
    }
    if inhomogeneous {
        next.flip(n + 1);
        next.flip(n + 2);
    }
    next
}

/// `A_0, ..., A_nmax` with `A_{n+4} = A_{n+3} + (t^4+t^3+t^2+t) A_n`.
pub fn a_seq(nmax: usize) -> Vec<BitPoly> {
    let mut window = [
        BitPoly::one(),
        BitPoly::from_u64(0b11),
        BitPoly::from_u64(0b110),
        BitPoly::from_u64(0b1100),
    ];
    let mut out = Vec::with_capacity(nmax + 1);
    for n in 0..=nmax {
        out.push(window[0].clone());
        let next = shift_sum_step(&window, n, false);
        window.rotate_left(1);
        window[3] = next;
    }
    out
}

/// `C_0, ..., C_nmax`.
pub fn c_seq(nmax: usize) -> Vec<BitPoly> {
    CnStream::new().take(nmax + 1).collect()
}

/// Sequential generator of the `C_n`, holding only the last four values.
#[derive(Clone, Debug)]
pub struct CnStream {
    window: [BitPoly; 4],
    index: usize,
}

impl CnStream {
    pub fn new() -> Self {
        CnStream {
            window: [
                BitPoly::zero(),
                BitPoly::one(),
                BitPoly::monomial(1),
                BitPoly::monomial(2),
            ],
            index: 0,
        }
    }

    /// Index of the value the next call to `next` returns.
    pub fn index(&self) -> usize {
        self.index
    }
}

impl Default for CnStream {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for CnStream {
    type Item = BitPoly;

    fn next(&mut self) -> Option<BitPoly> {
        let out = self.window[0].clone();
        let next = shift_sum_step(&self.window, self.index, true);
        self.window.rotate_left(1);
        self.window[3] = next;
        self.index += 1;
        Some(out)
    }
}

/// `C_{4m}` as the XOR of `C_k` over `support`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CombinationReport {
    pub m: usize,
    pub support: Vec<usize>,
    pub verified: bool,
}

/// Streams the `C_n` and expresses `C_0, C_4, C_8, ...` in turn.
#[derive(Clone, Debug)]
pub struct C4mExpander {
    stream: CnStream,
    history: Vec<BitPoly>,
    echelon: IncrementalEchelon,
    // echelon input id -> k
    fed: Vec<usize>,
    next_m: usize,
}

impl Default for C4mExpander {
    fn default() -> Self {
        Self::new()
    }
}

impl C4mExpander {
    pub fn new() -> Self {
        C4mExpander {
            stream: CnStream::new(),
            history: Vec::new(),
            echelon: IncrementalEchelon::new(),
            fed: Vec::new(),
            next_m: 0,
        }
    }

    /// The `m` the next call to [`next_report`](Self::next_report) handles.
    pub fn next_m(&self) -> usize {
        self.next_m
    }

    /// All `C_n` generated so far.
    pub fn history(&self) -> &[BitPoly] {
        &self.history
    }

    fn ensure(&mut self, n: usize) {
        while self.history.len() <= n {
            let c = self.stream.next().unwrap();
            self.history.push(c);
        }
    }

    pub fn next_report(&mut self) -> Result<CombinationReport, RecurrenceError> {
        let m = self.next_m;
        let n = 4 * m;
        self.ensure(n);
        let start = self.fed.last().map_or(0, |k| k + 1);
        for k in start..n {
            if k % 4 == 0 {
                continue;
            }
            match self.echelon.insert(self.history[k].clone()) {
                Insertion::Independent { .. } => self.fed.push(k),
                Insertion::Dependent { .. } => {
                    return Err(RecurrenceError::RestrictedFamilyDependent { k })
                }
            }
        }
        let red = self.echelon.reduce(&self.history[n]);
        if !red.residual.is_zero() {
            return Err(RecurrenceError::NotExpressible { m, n });
        }
        let support: Vec<usize> = red.combination.exponents().map(|id| self.fed[id]).collect();
        let mut recomposed = BitPoly::zero();
        for &k in &support {
            recomposed += &self.history[k];
        }
        self.next_m += 1;
        Ok(CombinationReport {
            m,
            verified: recomposed == self.history[n],
            support,
        })
    }

    /// Advances to `m` and returns its report.
    pub fn express(&mut self, m: usize) -> Result<CombinationReport, RecurrenceError> {
        if m < self.next_m {
            return Err(RecurrenceError::AlreadyPast {
                requested: m,
                next: self.next_m,
            });
        }
        loop {
            let report = self.next_report()?;
            if report.m == m {
                return Ok(report);
            }
        }
    }
}

pub fn express_c4m(m: usize) -> Result<CombinationReport, RecurrenceError> {
    C4mExpander::new().express(m)
}

/// Reports for every `m` with `4m < bound`.
pub fn express_below(bound: usize) -> Result<Vec<CombinationReport>, RecurrenceError> {
    let mut ex = C4mExpander::new();
    (0..bound.div_ceil(4)).map(|_| ex.next_report()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeViolation {
    pub n: usize,
    pub degree: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeLawReport {
    pub nmax: usize,
    pub passed: bool,
    pub first_violation: Option<DegreeViolation>,
}

/// `deg C_n = n - 1` when `4` does not divide `n`, and `< n - 1` when it does.
pub fn degree_law_holds(n: usize, c: &BitPoly) -> bool {
    let d = c.degree();
    if n % 4 == 0 {
        match d {
            Degree::NegInfinity => true,
            Degree::Finite(d) => d + 1 < n,
        }
    } else {
        d == Degree::Finite(n - 1)
    }
}

pub fn degree_law_check(nmax: usize) -> DegreeLawReport {
    let first_violation = CnStream::new()
        .take(nmax + 1)
        .enumerate()
        .find(|(n, c)| !degree_law_holds(*n, c))
        .map(|(n, c)| DegreeViolation {
            n,
            degree: c.degree().to_string(),
        });
    DegreeLawReport {
        nmax,
        passed: first_violation.is_none(),
        first_violation,
    }
}

#[derive(Debug, Serialize)]
struct CnCsvRow {
    n: usize,
    degree: String,
    hex: String,
}

/// CSV with header `n,degree,hex`, one row per `C_n`, `n <= nmax`.
pub fn write_cn_csv<W: io::Write>(out: W, nmax: usize) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for (n, c) in CnStream::new().take(nmax + 1).enumerate() {
        w.serialize(CnCsvRow {
            n,
            degree: c.degree().to_string(),
            hex: c.to_hex(),
        })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> BitPoly {
        s.parse().unwrap()
    }

    /// Naive recurrence on u128 integers as bit vectors.
    fn c_oracle(nmax: usize) -> Vec<u128> {
        let mut c: Vec<u128> = vec![0, 1, 2, 4];
        for n in 0..nmax.saturating_sub(3) {
            let p = c[n];
            let next = c[n + 3] ^ (p << 1) ^ (p << 2) ^ (p << 3) ^ (p << 4) ^ (0b110u128 << n);
            c.push(next);
        }
        c.truncate(nmax + 1);
        c
    }

    #[test]
    fn seeds_and_first_steps() {
        let c = c_seq(9);
        assert_eq!(
            &c[..6],
            &[t("0"), t("1"), t("t"), t("t^2"), t("t"), t("t^4")]
        );
        assert_eq!(c[8], t("t^5"));
        let a = a_seq(4);
        assert_eq!(&a[..4], &[t("1"), t("t+1"), t("t^2+t"), t("t^3+t^2")]);
        assert_eq!(a[4], t("t^4+t"));
    }

    #[test]
    fn matches_oracle() {
        let c = c_seq(100);
        for (n, (got, want)) in c.iter().zip(c_oracle(100)).enumerate() {
            let want = BitPoly::from_words(vec![want as u64, (want >> 64) as u64]);
            assert_eq!(got, &want, "C_{n}");
        }
    }

    #[test]
    fn c_is_a_plus_monomial() {
        let a = a_seq(300);
        let c = c_seq(300);
        for n in 0..=300 {
            assert_eq!(&a[n] + &BitPoly::monomial(n), c[n]);
            assert!(a[n].deg().unwrap() <= n);
        }
        assert_eq!(c_seq(0), vec![BitPoly::zero()]);
    }

    #[test]
    fn small_expressions() {
        assert_eq!(express_c4m(0).unwrap().support, Vec::<usize>::new());
        let r1 = express_c4m(1).unwrap();
        assert_eq!(r1.support, vec![2]);
        assert!(r1.verified);
        let r2 = express_c4m(2).unwrap();
        assert_eq!(r2.support, vec![3, 5, 6]);
        assert!(r2.verified);
    }

    #[test]
    fn expander_rejects_going_back() {
        let mut ex = C4mExpander::new();
        ex.express(3).unwrap();
        assert_eq!(ex.next_m(), 4);
        assert_eq!(
            ex.express(1),
            Err(RecurrenceError::AlreadyPast {
                requested: 1,
                next: 4
            })
        );
    }

    #[test]
    fn supports_avoid_multiples_of_four() {
        for rep in express_below(400).unwrap() {
            assert!(rep.verified);
            assert!(rep.support.iter().all(|k| k % 4 != 0 && *k < 4 * rep.m));
        }
    }

    #[test]
    fn degree_law_small() {
        assert!(degree_law_check(8).passed);
        assert!(degree_law_check(3).passed);
        assert!(!degree_law_holds(5, &t("t^3")));
        assert!(!degree_law_holds(8, &t("t^7")));
    }

    #[test]
    fn csv_rows() {
        let mut buf = Vec::new();
        write_cn_csv(&mut buf, 5).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "n,degree,hex");
        assert_eq!(lines[1], "0,-inf,00");
        assert_eq!(lines[6], "5,4,10");
    }

    #[test]
    fn report_json() {
        let json = serde_json::to_string(&express_c4m(2).unwrap()).unwrap();
        assert_eq!(json, r#"{"m":2,"support":[3,5,6],"verified":true}"#);
    }
}
