//! The nine end-to-end checks, sized by [`SuiteBounds`].
//!
//! `SuiteBounds::full()` holds the headline bounds; `quick()` is the CI subset.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::adapted::{
    build_adapted, is_nilpotent, pr1_equivariance, stabilization_checks, tp_as_xy_series,
    verify_grid,
};
use crate::gf2poly::BitPoly;
use crate::kernelspaces::{kernel_equality_check, km_basis, OddElement};
use crate::qseries::{check_u3_equals_u, cross_representation_checks, series_of_r_poly};
use crate::recurrence::{degree_law_check, express_below};
use crate::semilinear::{t_support_law_holds, u2_plus_i_identity_holds, u_laws_hold, RElement};

pub const SEED: u64 = 0x6d6f_6432_6865_636b;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteBounds {
    pub c4m_bound: usize,
    pub degree_law_nmax: usize,
    pub kernel_max_m: usize,
    pub kernel_equality_max_m: usize,
    pub random_trials: usize,
    pub random_degree: usize,
    pub t_support_nmax: usize,
    pub identity_max_i: usize,
    pub identity_max_k: usize,
    pub cross_precision: usize,
    pub u3_nmax: usize,
    pub u3_precision: usize,
    pub u2_trials: usize,
    pub grade: usize,
    pub stabilize_primes: Vec<u64>,
    pub stabilize_samples: usize,
    pub stabilize_precision: usize,
}

impl SuiteBounds {
    pub fn full() -> Self {
        SuiteBounds {
            c4m_bound: 10_000,
            degree_law_nmax: 10_000,
            kernel_max_m: 200,
            kernel_equality_max_m: 64,
            random_trials: 1000,
            random_degree: 512,
            t_support_nmax: 512,
            identity_max_i: 2,
            identity_max_k: 128,
            cross_precision: 10_000,
            u3_nmax: 64,
            u3_precision: 4096,
            u2_trials: 100,
            grade: 4,
            stabilize_primes: vec![5, 7, 11, 13],
            stabilize_samples: 4,
            stabilize_precision: 4096,
        }
    }

    pub fn quick() -> Self {
        SuiteBounds {
            c4m_bound: 2000,
            degree_law_nmax: 2000,
            kernel_max_m: 40,
            kernel_equality_max_m: 16,
            random_trials: 200,
            random_degree: 512,
            t_support_nmax: 128,
            identity_max_i: 2,
            identity_max_k: 32,
            cross_precision: 2000,
            u3_nmax: 32,
            u3_precision: 2048,
            u2_trials: 20,
            grade: 2,
            stabilize_primes: vec![5, 7, 11, 13],
            stabilize_samples: 2,
            stabilize_precision: 1024,
        }
    }

    pub fn for_level(level: Level) -> Self {
        match level {
            Level::Quick => Self::quick(),
            Level::Full => Self::full(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    fn new(id: u8, name: &'static str, passed: bool, detail: String) -> Self {
        CriterionOutcome {
            id,
            name,
            passed,
            detail,
        }
    }

    /// `[PASS] 3 kernel-dimensions: ...`
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("[{tag}] {} {}: {}", self.id, self.name, self.detail)
    }
}

fn random_poly(rng: &mut ChaCha8Rng, max_degree: usize) -> BitPoly {
    let words = max_degree / 64 + 1;
    BitPoly::from_words((0..words).map(|_| rng.gen()).collect()).truncated(max_degree + 1)
}

pub fn c4m_replay(b: &SuiteBounds) -> CriterionOutcome {
    let name = "c4m-replay";
    let detail = match express_below(b.c4m_bound) {
        Ok(reports) => {
            let bad = reports
                .iter()
                .find(|r| !r.verified || r.support.iter().any(|k| k % 4 == 0 || *k >= 4 * r.m));
            match bad {
                None => {
                    let msg = format!(
                        "all {} C_4m with 4m < {} expressed",
                        reports.len(),
                        b.c4m_bound
                    );
                    return CriterionOutcome::new(1, name, true, msg);
                }
                Some(r) => format!("m = {} failed recomposition", r.m),
            }
        }
        Err(e) => e.to_string(),
    };
    CriterionOutcome::new(1, name, false, detail)
}

pub fn degree_law(b: &SuiteBounds) -> CriterionOutcome {
    let r = degree_law_check(b.degree_law_nmax);
    let detail = match &r.first_violation {
        None => format!("n <= {}", r.nmax),
        Some(v) => format!("violated at n = {} (degree {})", v.n, v.degree),
    };
    CriterionOutcome::new(2, "degree-law", r.passed, detail)
}

pub fn kernel_dimensions(b: &SuiteBounds) -> CriterionOutcome {
    let first_bad = (0..=b.kernel_max_m)
        .into_par_iter()
        .map(|m| {
            let ok = km_basis(m).is_ok_and(|k| {
                k.dim() == m + 1 && k.g_degrees() == (0..=m).map(|i| 4 * i).collect::<Vec<_>>()
            });
            (!ok).then_some(m)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .next();
    let detail = match first_bad {
        None => format!(
            "dim K_m = m+1, g-degrees 0,4,..,4m for m <= {}",
            b.kernel_max_m
        ),
        Some(m) => format!("wrong basis at m = {m}"),
    };
    CriterionOutcome::new(3, "kernel-dimensions", first_bad.is_none(), detail)
}

pub fn kernel_equality(b: &SuiteBounds) -> CriterionOutcome {
    let first_bad = (0..=b.kernel_equality_max_m)
        .into_par_iter()
        .map(|m| {
            let ok = kernel_equality_check(m).is_ok_and(|e| e.equal && e.dim_on_l == 2 * m + 2);
            (!ok).then_some(m)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .next();
    let detail = match first_bad {
        None => format!(
            "(U+I)^2 kernels on L and L* agree, dim 2m+2, m <= {}",
            b.kernel_equality_max_m
        ),
        Some(m) => format!("kernels differ at m = {m}"),
    };
    CriterionOutcome::new(4, "kernel-equality", first_bad.is_none(), detail)
}

pub fn operator_laws(b: &SuiteBounds) -> CriterionOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let samples: Vec<RElement> = (0..b.random_trials)
        .map(|_| RElement(random_poly(&mut rng, b.random_degree)))
        .collect();
    let u_bad = samples.par_iter().position_first(|f| !u_laws_hold(f));
    let t_bad = (0..=b.t_support_nmax)
        .into_par_iter()
        .find_first(|&n| !t_support_law_holds(n));
    let id_bad = (0..=b.identity_max_i)
        .flat_map(|i| (0..=b.identity_max_k).map(move |k| (i, k)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .find_first(|&(i, k)| !u2_plus_i_identity_holds(i, k));
    let passed = u_bad.is_none() && t_bad.is_none() && id_bad.is_none();
    let detail = if passed {
        format!(
            "U laws on {} random f (deg <= {}), T support n <= {}, (U^2+I) identity i <= {}, k <= {}",
            b.random_trials, b.random_degree, b.t_support_nmax, b.identity_max_i, b.identity_max_k
        )
    } else {
        format!("U laws trial {u_bad:?}, T support n {t_bad:?}, identity (i, k) {id_bad:?}")
    };
    CriterionOutcome::new(5, "operator-laws", passed, detail)
}

pub fn series_cross_checks(b: &SuiteBounds) -> CriterionOutcome {
    let checks = cross_representation_checks(b.cross_precision);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.equal).map(|c| c.name).collect();
    let detail = if failed.is_empty() {
        format!("F, G, D agree to precision {}", b.cross_precision)
    } else {
        format!("mismatch for {}", failed.join(", "))
    };
    CriterionOutcome::new(6, "series-cross-checks", failed.is_empty(), detail)
}

pub fn hecke_u2_u3(b: &SuiteBounds) -> CriterionOutcome {
    let name = "u3-equals-u";
    let u3 = match check_u3_equals_u(b.u3_nmax, b.u3_precision) {
        Ok(r) => r,
        Err(e) => return CriterionOutcome::new(7, name, false, e.to_string()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let precision = b.u3_precision;
    // r-degree 2 + 4 deg g stays well inside the precision
    let max_g = (precision / 8).max(1);
    let odd: Vec<OddElement> = (0..b.u2_trials)
        .map(|_| OddElement::new(random_poly(&mut rng, max_g)))
        .collect();
    let u2_bad = odd.par_iter().position_first(|e| {
        !series_of_r_poly(&e.to_r(), precision)
            .u2()
            .is_ok_and(|s| s.is_zero())
    });
    let passed = u3.passed && u2_bad.is_none();
    let detail = if passed {
        format!(
            "U_3 = U on r^n, n <= {} at N = {}; U_2 kills {} random odd elements",
            b.u3_nmax, b.u3_precision, b.u2_trials
        )
    } else {
        format!(
            "U_3 first failure {:?}, U_2 failure at trial {u2_bad:?}",
            u3.first_failure
        )
    };
    CriterionOutcome::new(7, name, passed, detail)
}

pub fn adapted_grid_check(b: &SuiteBounds) -> CriterionOutcome {
    let name = "adapted-grid";
    let d = b.grade;
    let run = || -> Result<(bool, String), crate::adapted::AdaptedError> {
        let (model, grid) = build_adapted(d)?;
        let relations = verify_grid(&model, &grid)?.iter().all(|c| c.holds);
        let origin = grid
            .get(0, 0)
            .is_some_and(|e| e.element == OddElement::f_plus_g());
        let (x, y) = (&model.x_matrix, &model.y_matrix);
        let structure = x.mul(y)? == y.mul(x)? && is_nilpotent(x) && is_nilpotent(y);
        let mut series = Vec::new();
        for p in [5, 11] {
            let s = tp_as_xy_series(p, d, &model, &grid)?;
            series.push((p, !s.constant_term, s.coeffs));
        }
        let mut equivariant = true;
        for p in [7, 13] {
            equivariant &= pr1_equivariance(&model, &grid, p)?.iter().all(|c| c.holds);
        }
        let passed = relations && origin && structure && equivariant && series.iter().all(|s| s.1);
        let terms: Vec<String> = series
            .iter()
            .map(|(p, _, c)| format!("T_{p} = {}", xy_text(c)))
            .collect();
        let detail = format!(
            "grade {d} in K_{}: relations {relations}, m00 = F+G {origin}, X/Y commute and nilpotent {structure}, pr1 equivariant {equivariant}; {}",
            model.m,
            terms.join("; ")
        );
        Ok((passed, detail))
    };
    match run() {
        Ok((passed, detail)) => CriterionOutcome::new(8, name, passed, detail),
        Err(e) => CriterionOutcome::new(8, name, false, e.to_string()),
    }
}

/// `X + X Y^2 + ...`, or `0`.
pub fn xy_text(coeffs: &[(usize, usize)]) -> String {
    if coeffs.is_empty() {
        return "0".to_string();
    }
    let mono = |&(a, b): &(usize, usize)| -> String {
        let part = |v: &str, e: usize| match e {
            0 => String::new(),
            1 => v.to_string(),
            e => format!("{v}^{e}"),
        };
        let s = format!("{}{}", part("X", a), part("Y", b));
        if s.is_empty() {
            "1".to_string()
        } else {
            s
        }
    };
    coeffs.iter().map(mono).collect::<Vec<_>>().join(" + ")
}

pub fn stabilization(b: &SuiteBounds) -> CriterionOutcome {
    let name = "stabilization";
    match stabilization_checks(
        &b.stabilize_primes,
        b.stabilize_samples,
        b.stabilize_precision,
    ) {
        Ok(r) => {
            let detail = match r.cases.iter().find(|c| !c.holds) {
                None if r.t5_d5_to_d => format!(
                    "{} cases for p in {:?} at precision >= {}; T_5 D^5 = D",
                    r.cases.len(),
                    b.stabilize_primes,
                    b.stabilize_precision
                ),
                None => "T_5 does not send D^5 to D".to_string(),
                Some(c) => format!("p = {} on {} ({:?} -> {:?})", c.p, c.sample, c.from, c.to),
            };
            CriterionOutcome::new(9, name, r.passed, detail)
        }
        Err(e) => CriterionOutcome::new(9, name, false, e.to_string()),
    }
}

pub type Criterion = fn(&SuiteBounds) -> CriterionOutcome;

pub const CRITERIA: [Criterion; 9] = [
    c4m_replay,
    degree_law,
    kernel_dimensions,
    kernel_equality,
    operator_laws,
    series_cross_checks,
    hecke_u2_u3,
    adapted_grid_check,
    stabilization,
];

/// Runs every criterion in order.
pub fn run_all(b: &SuiteBounds) -> Vec<CriterionOutcome> {
    CRITERIA.iter().map(|c| c(b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xy_text_forms() {
        assert_eq!(xy_text(&[]), "0");
        assert_eq!(xy_text(&[(0, 0), (1, 0), (2, 3)]), "1 + X + X^2Y^3");
    }

    #[test]
    fn random_poly_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert!(random_poly(&mut rng, 100).deg().is_none_or(|d| d <= 100));
        }
    }

    #[test]
    fn outcome_line() {
        let o = CriterionOutcome::new(2, "degree-law", true, "n <= 8".into());
        assert_eq!(o.line(), "[PASS] 2 degree-law: n <= 8");
    }
}
