//! The spaces `L`, `L*` and `K_m` inside `M(odd)`, in g-coordinates.
//!
//! An element `(r^2+r) g(r^2)` of `M(odd)` is stored by `g`. In these
//! coordinates `U + I` sends `t^n` to `C_n`, so `K_m`, the kernel of `U + I`
//! on `L* = {deg g <= 4m+3}`, is the left kernel of the rows `C_0..C_{4m+3}`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::gf2linalg::BitMatrix;
use crate::gf2poly::BitPoly;
use crate::recurrence::c_seq;
use crate::semilinear::{decompose_n2, pr1, NotInN2, RElement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("K_{m} has dimension {dim}, expected {expected}")]
    WrongDimension {
        m: usize,
        dim: usize,
        expected: usize,
    },
    #[error("K_{m} basis has g-degrees {found:?}, expected 0, 4, ..., 4m")]
    WrongDegrees { m: usize, found: Vec<usize> },
    #[error("C_{n} has degree above {bound}; U+I would leave L*")]
    LeavesLStar { n: usize, bound: usize },
    #[error(transparent)]
    NotInN2(#[from] NotInN2),
}

/// `(r^2+r) g(r^2)`, stored by `g`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct OddElement {
    pub g: BitPoly,
}

impl OddElement {
    pub fn new(g: BitPoly) -> Self {
        OddElement { g }
    }

    /// `F + G = r^2 + r`.
    pub fn f_plus_g() -> Self {
        OddElement::new(BitPoly::one())
    }

    pub fn r_degree(&self) -> Option<usize> {
        self.g.deg().map(|d| 2 * d + 2)
    }

    pub fn to_r(&self) -> RElement {
        RElement(self.g.substitute_square().mul(&BitPoly::from_u64(0b110)))
    }

    /// Recovers `g` when `f` has the form `(r^2+r) g(r^2)`.
    pub fn from_r(f: &RElement) -> Option<OddElement> {
        // divide by r, then by r + 1 via running XOR (synthetic division)
        let p = f.poly();
        if p.is_zero() {
            return Some(OddElement::default());
        }
        if p.coeff(0) {
            return None;
        }
        let d = p.deg().unwrap();
        let mut q = BitPoly::zero();
        let mut carry = false;
        // f / r = h, h = (r+1) q  =>  q_{k-1} = h_k + q_k, from the top down
        for k in (1..d).rev() {
            carry ^= p.coeff(k + 1);
            if carry {
                q.flip(k - 1);
            }
        }
        // remainder of h / (r+1) is h(1) = q_0 + h_0 with h_0 = f_1
        if carry != p.coeff(1) {
            return None;
        }
        q.unsubstitute_square().map(OddElement::new)
    }
}

/// `g -> sum of C_n over the exponents n of g`, i.e. `U + I` in g-coordinates.
pub fn u_plus_i_on_gcoords(g: &BitPoly, c: &[BitPoly]) -> BitPoly {
    let mut acc = BitPoly::zero();
    for n in g.exponents() {
        acc += &c[n];
    }
    acc
}

/// Matrix of `U + I` on `L*` for the given `m`: row `n` is `C_n`.
pub fn u_plus_i_rows(m: usize) -> Result<BitMatrix, KernelError> {
    let dim = 4 * m + 4;
    let c = c_seq(dim - 1);
    for (n, cn) in c.iter().enumerate() {
        if cn.deg().is_some_and(|d| d >= dim) {
            return Err(KernelError::LeavesLStar { n, bound: dim - 1 });
        }
    }
    Ok(BitMatrix::from_rows(c, dim).expect("degrees checked above"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KmBasis {
    pub m: usize,
    /// Element `j` has g-degree `4j`; no element has a bit at another
    /// element's leading exponent.
    pub elements: Vec<OddElement>,
}

impl KmBasis {
    pub fn g_degrees(&self) -> Vec<usize> {
        self.elements.iter().map(|e| e.g.deg().unwrap()).collect()
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn top(&self) -> &OddElement {
        self.elements.last().expect("K_m is never empty")
    }
}

/// Reduced kernel of `U + I` on `L*`, ordered by g-degree.
pub fn km_basis(m: usize) -> Result<KmBasis, KernelError> {
    let rows = u_plus_i_rows(m)?;
    // {g : sum g_n C_n = 0} is the kernel of the transpose
    let mut elements: Vec<OddElement> = rows
        .transpose()
        .kernel_basis()
        .into_iter()
        .map(OddElement::new)
        .collect();
    elements.sort_by_key(|e| e.g.deg());
    if elements.len() != m + 1 {
        return Err(KernelError::WrongDimension {
            m,
            dim: elements.len(),
            expected: m + 1,
        });
    }
    let basis = KmBasis { m, elements };
    let degrees = basis.g_degrees();
    if degrees.iter().enumerate().any(|(j, &d)| d != 4 * j) {
        return Err(KernelError::WrongDegrees { m, found: degrees });
    }
    Ok(basis)
}

/// `u_i G^{2n}` for `i <= 2`, `n <= m`, in g-coordinates: `g_i (t^4+t^3)^n`
/// with `g_0, g_1, g_2 = t, t+1, t^3+t^2`.
pub fn l_basis(m: usize) -> Vec<OddElement> {
    let gs = [
        BitPoly::from_u64(0b10),
        BitPoly::from_u64(0b11),
        BitPoly::from_u64(0b1100),
    ];
    let h = BitPoly::from_u64(0b11000);
    let mut hn = BitPoly::one();
    let mut out = Vec::with_capacity(3 * m + 3);
    for _ in 0..=m {
        for g in &gs {
            out.push(OddElement::new(g.mul(&hn)));
        }
        hn = hn.mul(&h);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelEquality {
    pub m: usize,
    pub dim_on_l: usize,
    pub dim_on_l_star: usize,
    pub equal: bool,
}

/// Compares the kernels of `(U + I)^2` on `L` and on `L*`.
pub fn kernel_equality_check(m: usize) -> Result<KernelEquality, KernelError> {
    let dim = 4 * m + 4;
    let rows = u_plus_i_rows(m)?;
    let square = rows.mul(&rows).expect("square matrix");
    // left kernel of the squared map on L*
    let on_l_star = square.transpose().kernel_basis();

    let l = BitMatrix::from_rows(l_basis(m).into_iter().map(|e| e.g).collect(), dim)
        .expect("L lies in L*");
    // images of the L basis under (U+I)^2, then their left kernel mapped back
    let images = l.mul(&square).expect("shapes agree");
    let on_l: Vec<BitPoly> = images
        .transpose()
        .kernel_basis()
        .iter()
        .map(|c| l.combine_rows(c))
        .collect();

    let union = BitMatrix::from_rows(on_l.iter().chain(&on_l_star).cloned().collect(), dim)
        .expect("all in L*");
    let dim_l = BitMatrix::from_rows(on_l.clone(), dim).unwrap().rank();
    let dim_star = on_l_star.len();
    let equal = dim_l == dim_star && union.rank() == dim_star;
    Ok(KernelEquality {
        m,
        dim_on_l: dim_l,
        dim_on_l_star: dim_star,
        equal,
    })
}

/// The `F`-coordinate of `pr 1` of each basis element.
pub fn pr1_of_basis(basis: &KmBasis) -> Result<Vec<BitPoly>, KernelError> {
    basis
        .elements
        .iter()
        .map(|e| Ok(pr1(&decompose_n2(&e.to_r())?)))
        .collect()
}

/// For the element of g-degree `4m` in `K_m`, `pr 1` is `(G^{2m} + lower) F`:
/// its `F`-coordinate has degree exactly `m`.
pub fn pr1_shape_check(m: usize) -> Result<bool, KernelError> {
    let basis = km_basis(m)?;
    let c = pr1(&decompose_n2(&basis.top().to_r())?);
    Ok(c.deg() == Some(m))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelReport {
    pub m: usize,
    pub dim: usize,
    pub gdegrees: Vec<usize>,
    pub lemma211: bool,
    pub pr1: bool,
}

pub fn kernel_report(m: usize) -> Result<KernelReport, KernelError> {
    let basis = km_basis(m)?;
    let eq = kernel_equality_check(m)?;
    let pr1_ok = pr1_of_basis(&basis)?
        .iter()
        .enumerate()
        .all(|(j, c)| c.deg() == Some(j));
    Ok(KernelReport {
        m,
        dim: basis.dim(),
        gdegrees: basis.g_degrees(),
        lemma211: eq.equal && eq.dim_on_l == 2 * m + 2,
        pr1: pr1_ok,
    })
}

/// Reports for `m = 0..=max_m`, computed in parallel, returned in order.
pub fn kernel_reports(max_m: usize) -> Vec<Result<KernelReport, KernelError>> {
    (0..=max_m).into_par_iter().map(kernel_report).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semilinear::{constants, u_apply};

    fn t(s: &str) -> BitPoly {
        s.parse().unwrap()
    }

    #[test]
    fn odd_element_round_trip() {
        let e = OddElement::new(t("t^3+t^2"));
        let (f, g) = constants();
        assert_eq!(e.to_r(), &(&f + &g).square() * &g);
        assert_eq!(OddElement::from_r(&e.to_r()), Some(e.clone()));
        assert_eq!(e.r_degree(), Some(8));
        assert_eq!(OddElement::from_r(&RElement::r_pow(1)), None);
        assert_eq!(OddElement::from_r(&RElement::r_pow(2)), None);
        assert_eq!(OddElement::from_r(&RElement::one()), None);
        assert_eq!(OddElement::from_r(&f), Some(OddElement::new(t("t+1"))));
        assert_eq!(OddElement::from_r(&g), Some(OddElement::new(t("t"))));
        for k in 0..40 {
            let e = OddElement::new(BitPoly::from_u64(0x9e37_79b9_7f4a_7c15 >> k));
            assert_eq!(OddElement::from_r(&e.to_r()), Some(e));
        }
    }

    #[test]
    fn u_plus_i_examples() {
        let c = c_seq(8);
        assert!(u_plus_i_on_gcoords(&t("1"), &c).is_zero());
        assert_eq!(u_plus_i_on_gcoords(&t("t"), &c), t("1"));
        assert!(u_plus_i_on_gcoords(&t("t^4+t^2"), &c).is_zero());
    }

    #[test]
    fn u_plus_i_matches_r_side() {
        // (U+I)((r^2+r) r^{2n}) = (r^2+r) C_n(r^2)
        let c = c_seq(30);
        for n in 0..=30 {
            let e = OddElement::new(BitPoly::monomial(n));
            let f = e.to_r();
            let image = &u_apply(&f) + &f;
            assert_eq!(
                OddElement::from_r(&image),
                Some(OddElement::new(c[n].clone()))
            );
        }
    }

    #[test]
    fn small_kernels() {
        assert_eq!(km_basis(0).unwrap().elements, vec![OddElement::new(t("1"))]);
        let k1 = km_basis(1).unwrap();
        assert_eq!(
            k1.elements,
            vec![OddElement::new(t("1")), OddElement::new(t("t^4+t^2"))]
        );
        let k2 = km_basis(2).unwrap();
        assert_eq!(k2.g_degrees(), vec![0, 4, 8]);
        assert_eq!(k2.elements[2].g, t("t^8+t^6+t^5+t^3"));
        let c = c_seq(11);
        for e in &k2.elements {
            assert!(u_plus_i_on_gcoords(&e.g, &c).is_zero());
        }
    }

    #[test]
    fn kernels_nest() {
        let k5 = km_basis(5).unwrap();
        let k6 = km_basis(6).unwrap();
        assert_eq!(&k6.elements[..6], &k5.elements[..]);
    }

    #[test]
    fn l_basis_shape() {
        let l0 = l_basis(0);
        assert_eq!(
            l0,
            vec![
                OddElement::new(t("t")),
                OddElement::new(t("t+1")),
                OddElement::new(t("t^3+t^2"))
            ]
        );
        let (f, g) = constants();
        let u = [g.clone(), f.clone(), &(&f + &g).square() * &g];
        for m in 0..6 {
            let l = l_basis(m);
            assert_eq!(l.len(), 3 * m + 3);
            for (idx, e) in l.iter().enumerate() {
                assert!(e.g.deg().unwrap() <= 4 * m + 3);
                let expected = &u[idx % 3] * &g.pow(2 * (idx / 3) as u64);
                assert_eq!(e.to_r(), expected);
            }
        }
    }

    #[test]
    fn kernel_equality_small() {
        let r0 = kernel_equality_check(0).unwrap();
        assert_eq!((r0.dim_on_l, r0.dim_on_l_star, r0.equal), (2, 2, true));
        let r1 = kernel_equality_check(1).unwrap();
        assert_eq!((r1.dim_on_l, r1.dim_on_l_star, r1.equal), (4, 4, true));
    }

    #[test]
    fn pr1_small() {
        let k1 = km_basis(1).unwrap();
        let p = pr1_of_basis(&k1).unwrap();
        assert_eq!(p[0], t("1"));
        assert_eq!(p[1].deg(), Some(1));
        for m in 0..=8 {
            assert!(pr1_shape_check(m).unwrap(), "m = {m}");
        }
    }

    #[test]
    fn report_json_shape() {
        let rep = kernel_report(1).unwrap();
        let json = serde_json::to_string(&rep).unwrap();
        assert_eq!(
            json,
            r#"{"m":1,"dim":2,"gdegrees":[0,4],"lemma211":true,"pr1":true}"#
        );
    }
}
