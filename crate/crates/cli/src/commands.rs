use mod2hecke::adapted::{
    build_adapted, stabilization_checks, tp_as_xy_series, verify_grid, X_PRIME,
};
use mod2hecke::kernelspaces::{kernel_equality_check, kernel_reports, km_basis};
use mod2hecke::qseries::{check_u3_equals_u, cross_representation_checks};
use mod2hecke::recurrence::{degree_law_check, express_below, CnStream};
use mod2hecke::suite::{run_all, xy_text, Level, SuiteBounds};
use serde_json::{json, to_value, Value};

use crate::report::Report;

fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

pub fn cn_gen(max: usize) -> Report {
    let mut r = Report::new("cn gen", true, format!("C_0 .. C_{max}"));
    r.headers = vec!["n", "degree", "hex"];
    let mut entries = Vec::new();
    for (n, c) in CnStream::new().take(max + 1).enumerate() {
        r.transcript.push(format!("C_{n} = {c}"));
        r.rows
            .push(vec![n.to_string(), c.degree().to_string(), c.to_hex()]);
        entries.push(json!({ "n": n, "degree": c.degree().to_string(), "hex": c.to_hex() }));
    }
    r.result = Value::Array(entries);
    r
}

pub fn cn_express(max: usize) -> Report {
    let command = "cn express";
    let reports = match express_below(max) {
        Ok(reports) => reports,
        Err(e) => return Report::failure(command, e),
    };
    let bad = reports.iter().find(|x| !x.verified).map(|x| x.m);
    let summary = match bad {
        None => format!("all C_{{4m}}, 4m<{max}, expressed"),
        Some(m) => format!("recomposition of C_{{4m}} failed at m = {m}"),
    };
    let mut r = Report::new(command, bad.is_none(), summary);
    r.headers = vec!["m", "support", "verified"];
    for x in &reports {
        r.transcript.push(format!(
            "C_{} = sum of C_k, k in {{{}}}",
            4 * x.m,
            join(&x.support, ", ")
        ));
        r.rows.push(vec![
            x.m.to_string(),
            join(&x.support, " "),
            x.verified.to_string(),
        ]);
    }
    r.result = json!({ "bound": max, "reports": reports });
    r
}

pub fn cn_degree_law(max: usize) -> Report {
    let rep = degree_law_check(max);
    let summary = match &rep.first_violation {
        None => format!("degree law holds for n <= {max}"),
        Some(v) => format!("degree law fails at n = {} (degree {})", v.n, v.degree),
    };
    let mut r = Report::new("cn degree-law", rep.passed, summary);
    r.headers = vec!["nmax", "passed", "first_violation"];
    let first = rep
        .first_violation
        .as_ref()
        .map_or(String::new(), |v| v.n.to_string());
    r.rows = vec![vec![max.to_string(), rep.passed.to_string(), first]];
    r.result = to_value(&rep).unwrap();
    r
}

pub fn kernel_verify(max_m: usize) -> Report {
    let command = "kernel verify";
    let mut reports = Vec::new();
    for rep in kernel_reports(max_m) {
        match rep {
            Ok(rep) => reports.push(rep),
            Err(e) => return Report::failure(command, e),
        }
    }
    let ok = |x: &mod2hecke::kernelspaces::KernelReport| {
        x.dim == x.m + 1
            && x.gdegrees.iter().copied().eq((0..=x.m).map(|i| 4 * i))
            && x.lemma211
            && x.pr1
    };
    let bad = reports.iter().find(|x| !ok(x)).map(|x| x.m);
    let summary = match bad {
        None => format!("dim K_m = m+1 for all m <= {max_m}"),
        Some(m) => format!("K_{m} has the wrong shape"),
    };
    let mut r = Report::new(command, bad.is_none(), summary);
    r.headers = vec!["m", "dim", "gdegrees", "lemma211", "pr1"];
    for x in &reports {
        r.transcript.push(format!(
            "m={} dim={} gdegrees={{{}}} lemma211={} pr1={}",
            x.m,
            x.dim,
            join(&x.gdegrees, ","),
            x.lemma211,
            x.pr1
        ));
        r.rows.push(vec![
            x.m.to_string(),
            x.dim.to_string(),
            join(&x.gdegrees, " "),
            x.lemma211.to_string(),
            x.pr1.to_string(),
        ]);
    }
    r.result = to_value(&reports).unwrap();
    r
}

pub fn kernel_basis(m: usize) -> Report {
    let command = "kernel basis";
    let basis = match km_basis(m) {
        Ok(b) => b,
        Err(e) => return Report::failure(command, e),
    };
    let mut r = Report::new(
        command,
        true,
        format!("K_{m} has dimension {}", basis.dim()),
    );
    r.headers = vec!["index", "gdegree", "hex"];
    let mut entries = Vec::new();
    for (j, e) in basis.elements.iter().enumerate() {
        let deg = e.g.degree().to_string();
        r.transcript.push(format!("g_{j} = {}", e.g));
        r.rows.push(vec![j.to_string(), deg.clone(), e.g.to_hex()]);
        entries.push(json!({ "index": j, "gdegree": deg, "hex": e.g.to_hex() }));
    }
    r.result = json!({ "m": m, "elements": entries });
    r
}

pub fn kernel_equality(max_m: usize) -> Report {
    let command = "kernel lemma211";
    let mut checks = Vec::new();
    for m in 0..=max_m {
        match kernel_equality_check(m) {
            Ok(c) => checks.push(c),
            Err(e) => return Report::failure(command, e),
        }
    }
    let bad = checks
        .iter()
        .find(|c| !(c.equal && c.dim_on_l == 2 * c.m + 2))
        .map(|c| c.m);
    let summary = match bad {
        None => format!("(U+I)^2 kernels on L and L* agree for m <= {max_m}"),
        Some(m) => format!("(U+I)^2 kernels differ at m = {m}"),
    };
    let mut r = Report::new(command, bad.is_none(), summary);
    r.headers = vec!["m", "dim_on_l", "dim_on_l_star", "equal"];
    for c in &checks {
        r.rows.push(vec![
            c.m.to_string(),
            c.dim_on_l.to_string(),
            c.dim_on_l_star.to_string(),
            c.equal.to_string(),
        ]);
    }
    r.result = to_value(&checks).unwrap();
    r
}

pub fn series_check_u3(max: usize, precision: usize) -> Report {
    let command = "series check-u3";
    let rep = match check_u3_equals_u(max, precision) {
        Ok(rep) => rep,
        Err(e) => return Report::failure(command, e),
    };
    let summary = match rep.first_failure {
        None => format!(
            "U_3 = U on r^n for n <= {max}, compared to x^{}",
            rep.compared_to
        ),
        Some(n) => format!("U_3 differs from U on r^{n}"),
    };
    let mut r = Report::new(command, rep.passed, summary);
    r.headers = vec![
        "nmax",
        "precision",
        "compared_to",
        "passed",
        "first_failure",
    ];
    r.rows = vec![vec![
        max.to_string(),
        precision.to_string(),
        rep.compared_to.to_string(),
        rep.passed.to_string(),
        rep.first_failure.map_or(String::new(), |n| n.to_string()),
    ]];
    r.result = to_value(&rep).unwrap();
    r
}

pub fn series_check_f(precision: usize) -> Report {
    let checks = cross_representation_checks(precision);
    let passed = checks.iter().all(|c| c.equal);
    let summary = if passed {
        format!("F, G, D agree with their enumerations to precision {precision}")
    } else {
        let bad: Vec<&str> = checks.iter().filter(|c| !c.equal).map(|c| c.name).collect();
        format!("mismatch for {}", bad.join(", "))
    };
    let mut r = Report::new("series check-f", passed, summary);
    r.headers = vec!["name", "precision", "equal"];
    for c in &checks {
        r.rows.push(vec![
            c.name.to_string(),
            c.precision.to_string(),
            c.equal.to_string(),
        ]);
    }
    r.result = to_value(&checks).unwrap();
    r
}

pub fn adapted_build(grade: usize) -> Report {
    let command = "adapted build";
    let (model, grid) = match build_adapted(grade) {
        Ok(x) => x,
        Err(e) => return Report::failure(command, e),
    };
    let checks = match verify_grid(&model, &grid) {
        Ok(c) => c,
        Err(e) => return Report::failure(command, e),
    };
    let passed = checks.iter().all(|c| c.holds);
    let summary = if passed {
        format!(
            "grade {grade} grid in K_{}, all shift relations exact",
            model.m
        )
    } else {
        let c = checks.iter().find(|c| !c.holds).unwrap();
        format!(
            "T_{} m_({},{}) is not the expected neighbour",
            c.prime, c.i, c.j
        )
    };
    let mut r = Report::new(command, passed, summary);
    r.headers = vec!["i", "j", "g_hex"];
    for e in &grid.entries {
        r.rows
            .push(vec![e.i.to_string(), e.j.to_string(), e.g_hex.clone()]);
        r.transcript
            .push(format!("m_({},{}): g = {}", e.i, e.j, e.element.g));
    }
    for c in &checks {
        let (name, neighbour) = if c.prime == X_PRIME {
            ("X", c.i.checked_sub(1).map(|i| (i, c.j)))
        } else {
            ("Y", c.j.checked_sub(1).map(|j| (c.i, j)))
        };
        let target = neighbour.map_or("0".to_string(), |(i, j)| format!("m_({i},{j})"));
        let status = if c.holds { "ok" } else { "FAILED" };
        r.transcript
            .push(format!("{name} m_({},{}) = {target}  {status}", c.i, c.j));
    }
    r.result = json!({ "m": model.m, "grid": to_value(&grid).unwrap(), "relations": checks });
    r
}

pub fn adapted_tp_series(p: u64, grade: usize) -> Report {
    let command = "adapted tp-series";
    let series =
        build_adapted(grade).and_then(|(model, grid)| tp_as_xy_series(p, grade, &model, &grid));
    let s = match series {
        Ok(s) => s,
        Err(e) => return Report::failure(command, e),
    };
    let passed = !s.constant_term;
    let summary = if passed {
        format!("T_{p} = {} mod grade > {grade}", xy_text(&s.coeffs))
    } else {
        format!("T_{p} has a constant term: {}", xy_text(&s.coeffs))
    };
    let mut r = Report::new(command, passed, summary);
    r.headers = vec!["a", "b"];
    r.rows = s
        .coeffs
        .iter()
        .map(|(a, b)| vec![a.to_string(), b.to_string()])
        .collect();
    r.transcript = vec![format!("u_{p}(X,Y) = {}", xy_text(&s.coeffs))];
    r.result = to_value(&s).unwrap();
    r
}

pub fn adapted_stabilize(primes: &[u64], samples: usize, precision: usize) -> Report {
    let command = "adapted stabilize";
    let rep = match stabilization_checks(primes, samples, precision) {
        Ok(rep) => rep,
        Err(e) => return Report::failure(command, e),
    };
    let summary = if rep.passed {
        format!(
            "{} cases hold at precision >= {precision}; T_5 D^5 = D",
            rep.cases.len()
        )
    } else if let Some(c) = rep.cases.iter().find(|c| !c.holds) {
        format!("T_{} on {} does not land in {:?}", c.p, c.sample, c.to)
    } else {
        "T_5 does not send D^5 to D".to_string()
    };
    let mut r = Report::new(command, rep.passed, summary);
    r.headers = vec!["p", "sample", "from", "to", "precision", "holds"];
    for c in &rep.cases {
        r.rows.push(vec![
            c.p.to_string(),
            c.sample.clone(),
            format!("{:?}", c.from),
            format!("{:?}", c.to),
            c.precision.to_string(),
            c.holds.to_string(),
        ]);
    }
    r.result = to_value(&rep).unwrap();
    r
}

pub fn verify_all(level: Level) -> Report {
    let bounds = SuiteBounds::for_level(level);
    let outcomes = run_all(&bounds);
    let failed: Vec<u8> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.id)
        .collect();
    let summary = if failed.is_empty() {
        format!(
            "{} of {} criteria pass ({level:?})",
            outcomes.len(),
            outcomes.len()
        )
    } else {
        format!("criteria {} failed ({level:?})", join(&failed, ", "))
    };
    let mut r = Report::new("verify all", failed.is_empty(), summary);
    r.headers = vec!["id", "name", "passed", "detail"];
    for o in &outcomes {
        r.transcript.push(o.line());
        r.rows.push(vec![
            o.id.to_string(),
            o.name.to_string(),
            o.passed.to_string(),
            o.detail.clone(),
        ]);
    }
    r.result = json!({ "bounds": bounds, "criteria": outcomes });
    r
}
