//! The semi-linear operator `U` on Z/2[r] and the maps built from it.
//!
//! `F = r(r+1)^3` and `G = r^3(r+1)`. A map is semi-linear when it is
//! Z/2-linear and sends `G*f` to `F*phi(f)`; `{1, r, r^2, r^3}` is a basis of
//! Z/2[r] over Z/2[G], so such a map is fixed by four images. `U` sends those
//! to `1, r, r^2, r^3+r^2+r`.

use std::fmt;
use std::ops::{Add, Mul};

use thiserror::Error;

use crate::gf2linalg::{IncrementalEchelon, Insertion};
use crate::gf2poly::BitPoly;

/// An element of Z/2[r].
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct RElement(pub BitPoly);

impl RElement {
    pub fn zero() -> Self {
        RElement(BitPoly::zero())
    }

    pub fn one() -> Self {
        RElement(BitPoly::one())
    }

    /// `r^k`.
    pub fn r_pow(k: usize) -> Self {
        RElement(BitPoly::monomial(k))
    }

    pub fn poly(&self) -> &BitPoly {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn deg(&self) -> Option<usize> {
        self.0.deg()
    }

    pub fn pow(&self, n: u64) -> Self {
        RElement(self.0.pow(n))
    }

    pub fn square(&self) -> Self {
        RElement(self.0.square())
    }
}

impl fmt::Display for RElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.to_text("r"))
    }
}

impl fmt::Debug for RElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RElement({self})")
    }
}

impl Add<&RElement> for &RElement {
    type Output = RElement;

    fn add(self, rhs: &RElement) -> RElement {
        RElement(&self.0 + &rhs.0)
    }
}

impl Add for RElement {
    type Output = RElement;

    fn add(self, rhs: RElement) -> RElement {
        RElement(self.0 + rhs.0)
    }
}

impl Mul<&RElement> for &RElement {
    type Output = RElement;

    fn mul(self, rhs: &RElement) -> RElement {
        RElement(self.0.mul(&rhs.0))
    }
}

impl Mul for RElement {
    type Output = RElement;

    fn mul(self, rhs: RElement) -> RElement {
        RElement(self.0.mul(&rhs.0))
    }
}

/// `F = r^4+r^3+r^2+r`.
pub fn f_elem() -> RElement {
    RElement(BitPoly::from_u64(0b11110))
}

/// `G = r^4+r^3`.
pub fn g_elem() -> RElement {
    RElement(BitPoly::from_u64(0b11000))
}

pub fn constants() -> (RElement, RElement) {
    (f_elem(), g_elem())
}

/// `U(r^0), ..., U(r^nmax)`, built from the four seeds by
/// `U(r^{n+4}) = U(r^{n+3}) + (r^4+r^3+r^2+r) U(r^n)`.
pub fn u_monomial_table(nmax: usize) -> Vec<RElement> {
    let mut table: Vec<BitPoly> = vec![
        BitPoly::one(),
        BitPoly::monomial(1),
        BitPoly::monomial(2),
        BitPoly::from_u64(0b1110),
    ];
    table.truncate(nmax + 1);
    while table.len() <= nmax {
        let n = table.len() - 4;
        let mut next = table[n + 3].clone();
        for shift in 1..=4 {
            next.add_shifted(&table[n], shift);
        }
        table.push(next);
    }
    table.into_iter().map(RElement).collect()
}

/// `U` extended linearly over a precomputed monomial table.
#[derive(Clone, Debug)]
pub struct UOperator {
    table: Vec<RElement>,
}

impl UOperator {
    /// Operator able to act on elements of r-degree at most `nmax`.
    pub fn new(nmax: usize) -> Self {
        UOperator {
            table: u_monomial_table(nmax),
        }
    }

    pub fn max_degree(&self) -> usize {
        self.table.len() - 1
    }

    pub fn table(&self) -> &[RElement] {
        &self.table
    }

    /// # Panics
    /// If `f` has degree above [`max_degree`](Self::max_degree).
    pub fn apply(&self, f: &RElement) -> RElement {
        if let Some(d) = f.deg() {
            assert!(
                d <= self.max_degree(),
                "degree {d} exceeds U table bound {}",
                self.max_degree()
            );
        }
        let mut acc = BitPoly::zero();
        for n in f.0.exponents() {
            acc += &self.table[n].0;
        }
        RElement(acc)
    }

    /// `T(f) = U(f(F)) + f(G)` for `f` given as a polynomial in one variable.
    pub fn t_apply(&self, f: &BitPoly) -> RElement {
        let at_f = RElement(f.compose(&f_elem().0));
        &self.apply(&at_f) + &alpha_apply(f)
    }
}

/// `U(f)` with a table sized to `f`.
pub fn u_apply(f: &RElement) -> RElement {
    UOperator::new(f.deg().unwrap_or(0)).apply(f)
}

/// The isomorphism Z/2[F] -> Z/2[G], `F^n -> G^n`. The argument is the
/// abstract one-variable polynomial; the result is it evaluated at `G`.
pub fn alpha_apply(f: &BitPoly) -> RElement {
    RElement(f.compose(&g_elem().0))
}

/// `T = U + alpha` on Z/2[F].
pub fn t_apply(f: &BitPoly) -> RElement {
    UOperator::new(4 * f.deg().unwrap_or(0)).t_apply(f)
}

/// `F^0, ..., F^n`.
pub fn f_powers(n: usize) -> Vec<RElement> {
    let f = f_elem();
    let mut out = vec![RElement::one()];
    for _ in 0..n {
        let next = out.last().unwrap() * &f;
        out.push(next);
    }
    out
}

/// Writes `e` as a polynomial in `F`, or `None` when `e` is not in Z/2[F].
/// `F^k` has r-degree `4k`, so the powers form a triangular family.
pub fn express_in_f(e: &RElement) -> Option<BitPoly> {
    let Some(d) = e.deg() else {
        return Some(BitPoly::zero());
    };
    let mut ech = IncrementalEchelon::new();
    for p in f_powers(d / 4) {
        let ins = ech.insert(p.0);
        debug_assert!(matches!(ins, Insertion::Independent { .. }));
    }
    let red = ech.reduce(&e.0);
    red.residual.is_zero().then_some(red.combination)
}

/// Coordinates of an element over Z/2[G] on the basis `{1, r, r^2, r^3}`:
/// `f = g[0](G) + r g[1](G) + r^2 g[2](G) + r^3 g[3](G)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GDecomposition {
    pub g: [BitPoly; 4],
}

impl GDecomposition {
    pub fn recompose(&self) -> RElement {
        let g = g_elem().0;
        let mut acc = BitPoly::zero();
        for (i, gi) in self.g.iter().enumerate() {
            acc.add_shifted(&gi.compose(&g), i);
        }
        RElement(acc)
    }
}

/// Division by `G = r^4 + r^3`: returns `(q, rem)` with `f = q G + rem` and
/// `deg rem < 4`. Each step replaces the leading `r^k` by `r^{k-4}(G + r^3)`.
fn div_rem_by_g(f: &BitPoly) -> (BitPoly, BitPoly) {
    let mut rem = f.clone();
    let mut q = BitPoly::zero();
    while let Some(k) = rem.deg() {
        if k < 4 {
            break;
        }
        rem.flip(k);
        rem.flip(k - 1);
        q.flip(k - 4);
    }
    (q, rem)
}

pub fn decompose_over_g(f: &RElement) -> GDecomposition {
    let mut out = GDecomposition::default();
    let mut cur = f.0.clone();
    let mut j = 0;
    while !cur.is_zero() {
        let (q, rem) = div_rem_by_g(&cur);
        for i in rem.exponents() {
            out.g[i].flip(j);
        }
        cur = q;
        j += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("element {0} is not in N2 = Z/2[G^2]{{G, F, F^2 G}}")]
pub struct NotInN2(pub String);

/// Coordinates over Z/2[G^2] on the basis `{G, F, F^2 G}`: the element is
/// `c_g(G^2) G + c_f(G^2) F + c_f2g(G^2) F^2 G`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct N2Coordinates {
    pub c_g: BitPoly,
    pub c_f: BitPoly,
    pub c_f2g: BitPoly,
}

impl N2Coordinates {
    pub fn n2_basis() -> [RElement; 3] {
        let (f, g) = constants();
        let f2g = &f.square() * &g;
        [g, f, f2g]
    }

    pub fn recompose(&self) -> RElement {
        let g2 = g_elem().square().0;
        let basis = Self::n2_basis();
        let mut acc = BitPoly::zero();
        for (c, b) in [&self.c_g, &self.c_f, &self.c_f2g].into_iter().zip(&basis) {
            acc += &c.compose(&g2).mul(&b.0);
        }
        RElement(acc)
    }
}

/// Exact coordinates on the N2 basis, solved against the basis elements
/// `G^{2n} b` up to one filtration step past the degree of `f`.
pub fn decompose_n2(f: &RElement) -> Result<N2Coordinates, NotInN2> {
    let Some(d) = f.deg() else {
        return Ok(N2Coordinates::default());
    };
    let g2 = g_elem().square();
    let basis = N2Coordinates::n2_basis();
    let mut ech = IncrementalEchelon::new();
    let mut g2n = RElement::one();
    for _ in 0..=d / 8 + 1 {
        for b in &basis {
            ech.insert((&g2n * b).0);
        }
        g2n = &g2n * &g2;
    }
    let red = ech.reduce(&f.0);
    if !red.residual.is_zero() {
        return Err(NotInN2(f.to_string()));
    }
    let mut out = N2Coordinates::default();
    for id in red.combination.exponents() {
        let n = id / 3;
        match id % 3 {
            0 => out.c_g.flip(n),
            1 => out.c_f.flip(n),
            _ => out.c_f2g.flip(n),
        }
    }
    Ok(out)
}

/// The projection N2/N1 -> K1/N1, returned as the `F` coordinate: the class
/// of `c_f(G^2) F`.
pub fn pr1(coords: &N2Coordinates) -> BitPoly {
    coords.c_f.clone()
}

/// `U(f^2) = U(f)^2` and `U(G f) = F U(f)`.
pub fn u_laws_hold(f: &RElement) -> bool {
    let (big_f, g) = constants();
    let u = UOperator::new(2 * f.deg().unwrap_or(0) + 4);
    let uf = u.apply(f);
    u.apply(&f.square()) == uf.square() && u.apply(&(&g * f)) == &big_f * &uf
}

/// `T(F^n)` lies in Z/2[F], involving only `F^k` with `k <= n - 2` and
/// `k = n mod 2`.
pub fn t_support_law_holds(n: usize) -> bool {
    let Some(c) = express_in_f(&t_apply(&BitPoly::monomial(n))) else {
        return false;
    };
    c.exponents().all(|k| k + 2 <= n && k % 2 == n % 2)
}

/// `(U^2 + I)(F^i G^k) = F^i T(F^k)`.
pub fn u2_plus_i_identity_holds(i: usize, k: usize) -> bool {
    let (f, g) = constants();
    let fi = f.pow(i as u64);
    let x = &fi * &g.pow(k as u64);
    let u = UOperator::new(x.deg().unwrap());
    let lhs = &u.apply(&u.apply(&x)) + &x;
    lhs == &fi * &t_apply(&BitPoly::monomial(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> RElement {
        RElement(BitPoly::parse_text(s, "r").unwrap())
    }

    fn t(s: &str) -> BitPoly {
        s.parse().unwrap()
    }

    #[test]
    fn constants_relations() {
        let (f, g) = constants();
        assert_eq!(&f + &g, r("r^2+r"));
        assert!((&(&f.pow(4) + &g.pow(4)) + &(&f * &g)).is_zero());
        assert_eq!(f.0.to_string(), "t^4+t^3+t^2+t");
        assert_eq!(f, &r("r") * &r("r+1").pow(3));
        assert_eq!(g, &r("r^3") * &r("r+1"));
    }

    #[test]
    fn monomial_table_entries() {
        let table = u_monomial_table(8);
        assert_eq!(table.len(), 9);
        assert_eq!(table[3], r("r^3+r^2+r"));
        assert_eq!(table[4], r("r^4"));
        assert_eq!(table[6], r("r^6+r^4+r^2"));
        assert_eq!(u_monomial_table(0), vec![RElement::one()]);
    }

    #[test]
    fn u_examples() {
        let (f, g) = constants();
        assert_eq!(u_apply(&g), f);
        assert_eq!(u_apply(&f), g);
        assert_eq!(u_apply(&f.pow(3)), &g.pow(3) + &f);
        assert_eq!(u_apply(&g.pow(5)), f.pow(5));
    }

    #[test]
    #[should_panic(expected = "exceeds U table bound")]
    fn u_operator_rejects_large_degree() {
        UOperator::new(4).apply(&RElement::r_pow(5));
    }

    #[test]
    fn alpha_and_t_examples() {
        let (f, g) = constants();
        assert_eq!(alpha_apply(&BitPoly::one()), RElement::one());
        assert_eq!(alpha_apply(&t("t")), g);
        assert_eq!(alpha_apply(&t("t^2+t")), &g.square() + &g);
        assert!(t_apply(&BitPoly::one()).is_zero());
        assert!(t_apply(&t("t")).is_zero());
        assert!(t_apply(&t("t^2")).is_zero());
        assert_eq!(t_apply(&t("t^3")), f);
        let t7 = express_in_f(&t_apply(&t("t^7"))).expect("T stabilizes Z/2[F]");
        assert!(
            t7.exponents().all(|k| k <= 5 && k % 2 == 1),
            "T(F^7) = {t7}"
        );
    }

    #[test]
    fn express_in_f_rejects_g() {
        assert_eq!(express_in_f(&g_elem()), None);
        assert_eq!(express_in_f(&f_elem().pow(3)), Some(t("t^3")));
    }

    #[test]
    fn g_decomposition_examples() {
        let d = decompose_over_g(&r("r^4"));
        assert_eq!(d.g, [t("t"), t("0"), t("0"), t("1")]);
        let d = decompose_over_g(&r("r^6"));
        assert_eq!(d.g, [t("t"), t("t"), t("t"), t("1")]);
        let d = decompose_over_g(&f_elem());
        assert_eq!(d.g, [t("t"), t("1"), t("1"), t("0")]);
        let x = r("r^37+r^20+r^9+r^2+1");
        assert_eq!(decompose_over_g(&x).recompose(), x);
    }

    #[test]
    fn n2_examples() {
        let (f, g) = constants();
        let c = decompose_n2(&g).unwrap();
        assert_eq!((c.c_g, c.c_f, c.c_f2g), (t("1"), t("0"), t("0")));
        let c = decompose_n2(&(&f + &g)).unwrap();
        assert_eq!(
            (c.c_g.clone(), c.c_f.clone(), c.c_f2g.clone()),
            (t("1"), t("1"), t("0"))
        );
        assert_eq!(pr1(&c), t("1"));
        let u2 = &(&f + &g).square() * &g;
        let c = decompose_n2(&u2).unwrap();
        assert_eq!(
            (c.c_g.clone(), c.c_f.clone(), c.c_f2g.clone()),
            (t("t"), t("0"), t("1"))
        );
        assert_eq!(c.recompose(), u2);
        assert!(pr1(&decompose_n2(&g).unwrap()).is_zero());
        assert!(decompose_n2(&RElement::r_pow(1)).is_err());
        assert!(decompose_n2(&RElement::one()).is_err());
        assert_eq!(
            decompose_n2(&RElement::zero()).unwrap(),
            N2Coordinates::default()
        );
    }

    #[test]
    fn operator_laws_small() {
        assert!(u_laws_hold(&r("r^7+r^2+1")));
        assert!(u_laws_hold(&RElement::zero()));
        assert!((0..=40).all(t_support_law_holds));
        assert!((0..=2).all(|i| (0..=12).all(|k| u2_plus_i_identity_holds(i, k))));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(200))]
        #[test]
        fn u_laws_random(words in proptest::collection::vec(proptest::prelude::any::<u64>(), 0..4)) {
            proptest::prop_assert!(u_laws_hold(&RElement(BitPoly::from_words(words))));
        }

        #[test]
        fn n2_round_trip(c in proptest::collection::vec(proptest::prelude::any::<u8>(), 3)) {
            let coords = N2Coordinates {
                c_g: BitPoly::from_u64(c[0] as u64),
                c_f: BitPoly::from_u64(c[1] as u64),
                c_f2g: BitPoly::from_u64(c[2] as u64),
            };
            proptest::prop_assert_eq!(decompose_n2(&coords.recompose()).unwrap(), coords);
        }

        #[test]
        fn g_round_trip(w in proptest::prelude::any::<u64>()) {
            let f = RElement(BitPoly::from_u64(w));
            proptest::prop_assert_eq!(decompose_over_g(&f).recompose(), f);
        }
    }

    #[test]
    fn u_does_not_stabilize_l() {
        // G^3 = G^2 u0 lies in L, but U(G^3) = F^3 is not a Z/2[G]-combination of u0, u1, u2.
        let (f, g) = constants();
        assert_eq!(u_apply(&g.pow(3)), f.pow(3));
        let u2 = &(&f + &g).square() * &g;
        let mut ech = IncrementalEchelon::new();
        let mut gn = RElement::one();
        for _ in 0..=6 {
            for u in [&g, &f, &u2] {
                ech.insert((&gn * u).0);
            }
            gn = &gn * &g;
        }
        assert!(!ech.contains(&f.pow(3).0));
        assert!(ech.contains(&g.pow(3).0));
    }
}
