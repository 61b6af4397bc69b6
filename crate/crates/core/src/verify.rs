//! Property suites: chip identities, periodicity of the restricted system,
//! positivity, agreement of the solution methods, and the emergence of wall
//! boundaries from regularized symmetric data.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, VarId, VarTable};
use crate::matrix::PolyMatrix;
use crate::network::{p_matrix, reflected_entry, regularized_p, regularized_p_tilde, s_matrix, Chip};
use crate::scalar::Scalar;
use crate::surface::{
    build_symmetric_data, generic_data, regularized_array, Direction, Grid, SteppedSurface, SurfaceKind,
    SymmetricFamily, Window,
};
use crate::tsystem::{applicable_methods, corner_cross_check, solve_capped, Method, Oracle, Point, DEFAULT_MAX_TERMS};

/// One checked instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub description: String,
    pub expected: String,
    pub got: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub findings: usize,
}

/// Outcome of a suite. Findings are observations that are reported but do
/// not fail the suite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub cases: Vec<Case>,
    pub findings: Vec<String>,
    pub summary: Summary,
}

impl Report {
    pub fn new(suite: &str) -> Self {
        Report {
            suite: suite.into(),
            cases: Vec::new(),
            findings: Vec::new(),
            summary: Summary::default(),
        }
    }

    pub fn check(&mut self, description: impl Into<String>, expected: impl fmt::Display, got: impl fmt::Display, pass: bool) {
        if pass {
            self.summary.passed += 1;
        } else {
            self.summary.failed += 1;
        }
        self.cases.push(Case {
            description: description.into(),
            expected: expected.to_string(),
            got: got.to_string(),
            pass,
        });
    }

    /// Records a case whose computation failed.
    pub fn error(&mut self, description: impl Into<String>, expected: impl fmt::Display, err: &Error) {
        self.check(description, expected, format!("error: {err}"), false);
    }

    pub fn finding(&mut self, note: impl Into<String>) {
        self.summary.findings += 1;
        self.findings.push(note.into());
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn merge(&mut self, other: Report) {
        self.summary.passed += other.summary.passed;
        self.summary.failed += other.summary.failed;
        self.summary.findings += other.summary.findings;
        self.cases.extend(other.cases);
        self.findings.extend(other.findings);
    }

    /// Human-readable rendering; passing cases are listed without values.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "suite {}: {} passed, {} failed, {} findings\n",
            self.suite, self.summary.passed, self.summary.failed, self.summary.findings
        );
        for c in &self.cases {
            if c.pass {
                out.push_str(&format!("  pass  {}\n", c.description));
            } else {
                out.push_str(&format!("  FAIL  {}\n        expected {}\n        got      {}\n", c.description, c.expected, c.got));
            }
        }
        for f in &self.findings {
            out.push_str(&format!("  note  {f}\n"));
        }
        out
    }
}

/// Suites the command line can run, by name.
pub const SUITES: [&str; 5] = ["identities", "periodicity", "positivity", "equivalence", "boundary"];

/// Each result of the theory and the suite that exercises it.
pub const COVERAGE: &[(&str, &str)] = &[
    ("chip exchange relations and the mutation identity", "identities"),
    ("projectivity, inverses and sign conjugations of chips", "identities"),
    ("the signed permutation P and its conjugation action on chips", "identities"),
    ("collapse relations for one and for r rows", "identities"),
    ("diamond products of the regularized network", "identities"),
    ("determinant and factorization of the full regularized network", "identities"),
    ("wall limits of the regularized networks and their first rows", "identities"),
    ("network solution on the flat surface", "equivalence"),
    ("row-one network solution on arbitrary surfaces", "equivalence"),
    ("discrete Wronskian", "equivalence"),
    ("minor formula on the flat surface", "equivalence"),
    ("minor formula on arbitrary and truncated surfaces", "equivalence"),
    ("non-intersecting path expansion of the minors", "equivalence"),
    ("Laurent positivity of unrestricted solutions", "positivity"),
    ("Laurent positivity of restricted solutions", "positivity"),
    ("periodicity of the restricted system", "periodicity"),
    ("half-period twist", "periodicity"),
    ("walls emerge from regularized symmetric data", "boundary"),
];

// ---------------------------------------------------------------------------
// identities

fn cst(c: i64) -> LaurentPoly {
    LaurentPoly::constant(c)
}

fn show(m: &PolyMatrix, table: &VarTable) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| m.get(i, j).canonical_text(table))
                .collect::<Vec<_>>()
                .join(", ")
        })
        .collect();
    format!("[{}]", rows.join("; "))
}

fn product(ms: &[PolyMatrix]) -> Result<PolyMatrix> {
    let mut acc = ms[0].clone();
    for m in &ms[1..] {
        acc = acc.try_mul(m)?;
    }
    Ok(acc)
}

fn u(n: usize, row: usize, a: &LaurentPoly, b: &LaurentPoly, c: &LaurentPoly) -> Result<PolyMatrix> {
    Chip::u(row, a.clone(), b.clone(), c.clone()).matrix(n)
}

fn v(n: usize, row: usize, a: &LaurentPoly, b: &LaurentPoly, c: &LaurentPoly) -> Result<PolyMatrix> {
    Chip::v(row, a.clone(), b.clone(), c.clone()).matrix(n)
}

fn limit(m: &PolyMatrix, vars: &BTreeSet<VarId>) -> Result<PolyMatrix> {
    Ok(m.map(|e| e.subst_zero(vars))?)
}

fn var_set(vs: &[LaurentPoly]) -> BTreeSet<VarId> {
    vs.iter().flat_map(|v| v.variables()).collect()
}

/// Compares two matrices computed by `f`, recording errors as failures.
fn matrix_case(
    rep: &mut Report,
    table: &VarTable,
    desc: String,
    f: impl FnOnce() -> Result<(PolyMatrix, PolyMatrix)>,
) {
    match f() {
        Ok((got, want)) => {
            let pass = got == want;
            rep.check(desc, show(&want, table), show(&got, table), pass);
        }
        Err(e) => rep.error(desc, "a matrix identity", &e),
    }
}

/// Symbolic identities of chips and networks for every `r` in the range.
/// Identities involving regularized arrays run for `r <= array_max`.
pub fn check_identities(rmin: usize, rmax: usize, array_max: usize) -> Result<Report> {
    let mut rep = Report::new("identities");
    let mut table = VarTable::new();
    let names = ["a", "b", "c", "d", "e", "f", "u", "v", "w", "lambda"];
    let sym: HashMap<&str, LaurentPoly> = names.iter().map(|&n| (n, table.var_named(n))).collect();
    let (a, b, c, d, e, f) = (&sym["a"], &sym["b"], &sym["c"], &sym["d"], &sym["e"], &sym["f"]);
    let (uu, vv, w, lam) = (&sym["u"], &sym["v"], &sym["w"], &sym["lambda"]);

    rank_one_collapse(&mut rep, &table, a, b);

    for r in rmin..=rmax {
        let n = r + 1;
        let p = p_matrix(r);
        let s = s_matrix(r);
        let sign_r = if r % 2 == 0 { 1 } else { -1 };
        let sign_r1 = -sign_r;

        for i in 1..r {
            matrix_case(&mut rep, &table, format!("r={r} i={i}: U_i(a,b,c) V_i+1(b,c,d) = V_i+1(a,c,d) U_i(a,b,d)"), || {
                Ok((
                    u(n, i, a, b, c)?.try_mul(&v(n, i + 1, b, c, d)?)?,
                    v(n, i + 1, a, c, d)?.try_mul(&u(n, i, a, b, d)?)?,
                ))
            });
            matrix_case(&mut rep, &table, format!("r={r} i={i}: V_i(a,b,c) U_i+1(d,e,f) = U_i+1(d,e,f) V_i(a,b,c)"), || {
                Ok((
                    v(n, i, a, b, c)?.try_mul(&u(n, i + 1, d, e, f)?)?,
                    u(n, i + 1, d, e, f)?.try_mul(&v(n, i, a, b, c)?)?,
                ))
            });
        }
        for i in 1..=r {
            // b b' = u v + a c with u solved for: w plays b'.
            let u_rel = match (b * w - a * c).try_mul(&vv.inverse()?) {
                Ok(x) => x,
                Err(err) => return Err(err.into()),
            };
            matrix_case(&mut rep, &table, format!("r={r} i={i}: mutation exchange holds when b b' = u v + a c"), || {
                Ok((
                    u(n, i, a, b, &u_rel)?.try_mul(&v(n, i, vv, b, c)?)?,
                    v(n, i, vv, a, w)?.try_mul(&u(n, i, w, c, &u_rel)?)?,
                ))
            });
            let desc = format!("r={r} i={i}: mutation exchange forces b b' = u v + a c");
            match mutation_converse(n, i, a, b, c, uu, vv, w) {
                Ok((pass, got)) => rep.check(desc, "every entry of the difference is a monomial times b b' - u v - a c", got, pass),
                Err(err) => rep.error(desc, "difference divisible by the relation", &err),
            }
            matrix_case(&mut rep, &table, format!("r={r} i={i}: U_i(la,lb,lc) = U_i(a,b,c)"), || {
                Ok((u(n, i, &(lam * a), &(lam * b), &(lam * c))?, u(n, i, a, b, c)?))
            });
            matrix_case(&mut rep, &table, format!("r={r} i={i}: V_i(la,lb,lc) = V_i(a,b,c)"), || {
                Ok((v(n, i, &(lam * a), &(lam * b), &(lam * c))?, v(n, i, a, b, c)?))
            });
            matrix_case(&mut rep, &table, format!("r={r} i={i}: U_i(a,b,c) U_i(b,a,-c) = I"), || {
                Ok((u(n, i, a, b, c)?.try_mul(&u(n, i, b, a, &-c)?)?, PolyMatrix::identity(n)))
            });
            matrix_case(&mut rep, &table, format!("r={r} i={i}: V_i(a,b,c) V_i(-a,c,b) = I"), || {
                Ok((v(n, i, a, b, c)?.try_mul(&v(n, i, &-a, c, b)?)?, PolyMatrix::identity(n)))
            });
            matrix_case(&mut rep, &table, format!("r={r} i={i}: S U_i(a,b,c) S = U_i(a,b,-c)"), || {
                Ok((product(&[s.clone(), u(n, i, a, b, c)?, s.clone()])?, u(n, i, a, b, &-c)?))
            });
            matrix_case(&mut rep, &table, format!("r={r} i={i}: U_i(a,b,-c) = U_i(-a,-b,c)"), || {
                Ok((u(n, i, a, b, &-c)?, u(n, i, &-a, &-b, c)?))
            });
            matrix_case(&mut rep, &table, format!("r={r} i={i}: S V_i(a,b,c) S = V_i(a,-b,-c)"), || {
                Ok((product(&[s.clone(), v(n, i, a, b, c)?, s.clone()])?, v(n, i, a, &-b, &-c)?))
            });
            matrix_case(&mut rep, &table, format!("r={r} i={i}: V_i(a,-b,-c) = V_i(-a,b,c)"), || {
                Ok((v(n, i, a, &-b, &-c)?, v(n, i, &-a, b, c)?))
            });
            matrix_case(&mut rep, &table, format!("r={r} i={i}: P U_i(a,b,c) P = V_r+1-i((-1)^(r-1) c, a, b)"), || {
                Ok((
                    product(&[p.clone(), u(n, i, a, b, c)?, p.clone()])?,
                    v(n, r + 1 - i, &(&cst(sign_r1) * c), a, b)?,
                ))
            });
            matrix_case(&mut rep, &table, format!("r={r} i={i}: P V_i(a,b,c) P = U_r+1-i(b, c, (-1)^(r-1) a)"), || {
                Ok((
                    product(&[p.clone(), v(n, i, a, b, c)?, p.clone()])?,
                    u(n, r + 1 - i, b, c, &(&cst(sign_r1) * a))?,
                ))
            });
            // diamonds with a c + u v = 0, i.e. a = -u v / c
            let a_rel = -(&(uu * vv) * &c.inverse()?);
            matrix_case(&mut rep, &table, format!("r={r} i={i}: U_i(a,b,v) V_i(u,b,c) with ac+uv=0 has block [b/c, u/c; v/c, 0]"), || {
                let mut want = PolyMatrix::identity(n);
                let ci = c.inverse()?;
                want.set(i - 1, i - 1, b * &ci);
                want.set(i - 1, i, uu * &ci);
                want.set(i, i - 1, vv * &ci);
                want.set(i, i, LaurentPoly::zero());
                Ok((u(n, i, &a_rel, b, vv)?.try_mul(&v(n, i, uu, b, c)?)?, want))
            });
            matrix_case(&mut rep, &table, format!("r={r} i={i}: V_i(u,a,b) U_i(b,c,v) with ac+uv=0 has block [0, u/c; v/c, b/c]"), || {
                let mut want = PolyMatrix::identity(n);
                let ci = c.inverse()?;
                want.set(i - 1, i - 1, LaurentPoly::zero());
                want.set(i - 1, i, uu * &ci);
                want.set(i, i - 1, vv * &ci);
                want.set(i, i, b * &ci);
                Ok((v(n, i, uu, &a_rel, b)?.try_mul(&u(n, i, b, c, vv)?)?, want))
            });
        }
        matrix_case(&mut rep, &table, format!("r={r}: P^2 = I"), || Ok((p.try_mul(&p)?, PolyMatrix::identity(n))));
        matrix_case(&mut rep, &table, format!("r={r}: S^2 = I"), || Ok((s.try_mul(&s)?, PolyMatrix::identity(n))));
        matrix_case(&mut rep, &table, format!("r={r}: S P = (-1)^r P S"), || {
            Ok((s.try_mul(&p)?, p.try_mul(&s)?.scale(&cst(sign_r))))
        });
        let det_sign = if (r * (r + 1) * (r + 2) / 2) % 2 == 0 { 1 } else { -1 };
        match p.det() {
            Ok(dp) => rep.check(format!("r={r}: det P = (-1)^(r(r+1)(r+2)/2)"), det_sign, dp.canonical_text(&table), dp == cst(det_sign)),
            Err(err) => rep.error(format!("r={r}: det P"), det_sign, &err.into()),
        }
        collapse_on_plus_data(&mut rep, r)?;
        if r <= array_max {
            array_identities(&mut rep, r, det_sign)?;
        }
    }
    Ok(rep)
}

/// With `u` free, `U(a,b,u)V(v,b,c) - V(v,a,b')U(b',c,u)` must vanish exactly
/// on `b b' = u v + a c`: each entry is a monomial multiple of the relation.
#[allow(clippy::too_many_arguments)]
fn mutation_converse(
    n: usize,
    i: usize,
    a: &LaurentPoly,
    b: &LaurentPoly,
    c: &LaurentPoly,
    uu: &LaurentPoly,
    vv: &LaurentPoly,
    w: &LaurentPoly,
) -> Result<(bool, String)> {
    let lhs = u(n, i, a, b, uu)?.try_mul(&v(n, i, vv, b, c)?)?;
    let rhs = v(n, i, vv, a, w)?.try_mul(&u(n, i, w, c, uu)?)?;
    let rel = b * w - uu * vv - a * c;
    let mut nonzero = 0;
    for x in 0..n {
        for y in 0..n {
            let diff = lhs.get(x, y) - rhs.get(x, y);
            if diff.is_zero() {
                continue;
            }
            nonzero += 1;
            match diff.div_exact(&rel) {
                Ok(q) if q.len() == 1 => {}
                _ => return Ok((false, format!("entry ({x},{y}) is {diff}"))),
            }
        }
    }
    Ok((nonzero > 0, format!("{nonzero} nonzero entries, all monomial multiples")))
}

/// The rank-one collapse: with `U(a,b) = U(a,b,1)` and `V(a,b) = V(1,a,b)`,
/// `U(-b,-a) P V(a,b) = P` and `V(-b,-a) P U(a,b) = P`.
fn rank_one_collapse(rep: &mut Report, table: &VarTable, a: &LaurentPoly, b: &LaurentPoly) {
    let p = p_matrix(1);
    let one = LaurentPoly::one();
    matrix_case(rep, table, "r=1: U(-b,-a) P V(a,b) = P".into(), || {
        Ok((product(&[u(2, 1, &-b, &-a, &one)?, p.clone(), v(2, 1, &one, a, b)?])?, p.clone()))
    });
    matrix_case(rep, table, "r=1: V(-b,-a) P U(a,b) = P".into(), || {
        Ok((product(&[v(2, 1, &one, &-b, &-a)?, p.clone(), u(2, 1, a, b, &one)?])?, p.clone()))
    });
}

/// Collapse of reflected chip pairs across `P` on free symmetric data
/// with zeros left of column 0, for columns `j = 1..=3`.
fn collapse_on_plus_data(rep: &mut Report, r: usize) -> Result<()> {
    let ri = r as i64;
    let jmax = 3;
    let mut table = VarTable::new();
    let window = Window::new(1, ri, -ri - 1 - jmax, jmax);
    let sym = build_symmetric_data(SymmetricFamily::Plus { r: ri }, window, false, &mut table)?;
    let t = |i: i64, j: i64| -> LaurentPoly {
        if i == 0 || i == ri + 1 {
            LaurentPoly::one()
        } else {
            sym.data.get(i, j).unwrap().clone()
        }
    };
    let n = r + 1;
    let p = p_matrix(r);
    for i in 1..=ri {
        for j in 1..=jmax {
            let iu = i as usize;
            let m = (ri + 1 - i) as usize;
            matrix_case(rep, &table, format!("r={r} i={i} j={j}: reflected V chip, P, U chip collapse to P on symmetric data"), || {
                Ok((
                    product(&[
                        v(n, m, &t(ri - i, -ri - j), &t(ri + 1 - i, -ri - 1 - j), &t(ri + 1 - i, -ri - j))?,
                        p.clone(),
                        u(n, iu, &t(i, j - 1), &t(i, j), &t(i + 1, j - 1))?,
                    ])?,
                    p.clone(),
                ))
            });
            matrix_case(rep, &table, format!("r={r} i={i} j={j}: reflected U chip, P, V chip collapse to P on symmetric data"), || {
                Ok((
                    product(&[
                        u(n, m, &t(ri + 1 - i, -ri - 1 - j), &t(ri + 1 - i, -ri - j), &t(ri + 2 - i, -ri - 1 - j))?,
                        p.clone(),
                        v(n, iu, &t(i - 1, j), &t(i, j - 1), &t(i, j))?,
                    ])?,
                    p.clone(),
                ))
            });
        }
    }
    Ok(())
}

/// `a_l(x)`: the row surviving in the first column of the reflected limit.
pub fn a_ell(l: i64, x: i64) -> i64 {
    if l.rem_euclid(2) == 0 {
        2 * ((x + 1).div_euclid(2))
    } else {
        2 * x.div_euclid(2) + 1
    }
}

fn array_identities(rep: &mut Report, r: usize, det_sign: i64) -> Result<()> {
    let mut table = VarTable::new();
    let avars: Vec<LaurentPoly> = (1..=r).map(|m| table.var_named(&format!("a[{m}]"))).collect();
    let bvars: Vec<LaurentPoly> = (1..=r).map(|m| table.var_named(&format!("b[{m}]"))).collect();
    let aset = var_set(&avars);
    let bset = var_set(&bvars);
    let n = r + 1;
    let p = p_matrix(r);
    let sign_r = if r % 2 == 0 { 1 } else { -1 };

    let arr = regularized_array(r, &avars)?;
    let mut ok = true;
    let mut bad = String::from("all zero");
    for i in 1..=r {
        for j in 1..=r {
            let rel = &(&arr[i - 1][j] * &arr[i + 1][j]) + &(&arr[i][j + 1] * &arr[i][j - 1]);
            if !rel.is_zero() {
                ok = false;
                bad = format!("({i},-{j}) gives {}", rel.canonical_text(&table));
            }
        }
    }
    rep.check(format!("r={r}: regularized array satisfies the bilinear relation"), "all zero", bad, ok);
    let last: Vec<String> = (0..=r + 1).map(|i| arr[i][r + 1].canonical_text(&table)).collect();
    let want: Vec<String> = (0..=r + 1)
        .map(|i| cst(if (r * i) % 2 == 0 { 1 } else { -1 }).canonical_text(&table))
        .collect();
    rep.check(format!("r={r}: last column of the regularized array is (-1)^(ri)"), want.join(" "), last.join(" "), last == want);

    let full = regularized_p(r, r + 1, &avars)?;
    match full.det() {
        Ok(dp) => rep.check(
            format!("r={r}: det P_r+1(a) = (-1)^(r(r+1)(r+2)/2)"),
            det_sign,
            dp.canonical_text(&table),
            dp == cst(det_sign),
        ),
        Err(err) => rep.error(format!("r={r}: det P_r+1(a)"), det_sign, &err.into()),
    }

    // factorization: rows 2i+eps on the left, 2i on the right
    let s_half = r / 2;
    let eps = r % 2;
    let one = LaurentPoly::one();
    let mut factors = Vec::new();
    for i in (1 - eps)..=s_half {
        let sgn = if eps == 1 { 1 } else { -1 };
        factors.push(u(n, 2 * i + eps, &one, &one, &(&cst(sgn) * &avars[2 * (s_half - i)]))?);
    }
    factors.push(p.clone());
    for i in 1..=s_half {
        factors.push(u(n, 2 * i, &one, &one, &avars[2 * i - 1])?);
    }
    matrix_case(rep, &table, format!("r={r}: P_r+1(a) factors as U chips around P"), || Ok((full.clone(), product(&factors)?)));

    matrix_case(rep, &table, format!("r={r}: P_r+1(a) tends to P as a -> 0"), || Ok((limit(&full, &aset)?, p.clone())));

    for j in 1..=r {
        let pj = regularized_p(r, j, &avars)?;
        let target = 2 * (j / 2) + 1;
        let desc = format!("r={r} j={j}: first row of lim P_j(a) is the unit vector e_{target}");
        match limit(&pj, &aset) {
            Ok(lim) => {
                let row: Vec<LaurentPoly> = (0..n).map(|c| lim.get(0, c).clone()).collect();
                let want: Vec<LaurentPoly> = (0..n).map(|c| cst((c + 1 == target) as i64)).collect();
                let txt = |v: &[LaurentPoly]| v.iter().map(|x| x.canonical_text(&table)).collect::<Vec<_>>().join(" ");
                rep.check(desc, txt(&want), txt(&row), row == want);
            }
            Err(err) => rep.error(desc, format!("e_{target}"), &err),
        }
    }

    for l in [1i64, 2] {
        let full_t = regularized_p_tilde(r, l, r + 1, &bvars)?;
        matrix_case(rep, &table, format!("r={r} l={l}: reflected P~_r+1(b) tends to (-1)^r P as b -> 0"), || {
            Ok((limit(&full_t, &bset)?, p.scale(&cst(sign_r))))
        });
        for j in 1..=r {
            let target = a_ell(l, j as i64);
            let desc = format!("r={r} l={l} j={j}: first column of lim P~_j(b) b_1,l+1+j is e_{target}");
            let res = (|| -> Result<Vec<LaurentPoly>> {
                let pt = regularized_p_tilde(r, l, j, &bvars)?;
                let scale = reflected_entry(r, j, &bvars)?;
                (0..n)
                    .map(|x| Ok((pt.get(x, 0) * &scale).subst_zero(&bset)?))
                    .collect()
            })();
            let want: Vec<LaurentPoly> = (0..n).map(|x| cst((x as i64 + 1 == target) as i64)).collect();
            let txt = |v: &[LaurentPoly]| v.iter().map(|x| x.canonical_text(&table)).collect::<Vec<_>>().join(" ");
            match res {
                Ok(col) => rep.check(desc, txt(&want), txt(&col), col == want),
                Err(err) => rep.error(desc, txt(&want), &err),
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// periodicity

/// Initial values for the restricted system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum DataMode {
    Symbolic,
    /// Random positive rationals from a seed; a smoke test only.
    Rational { seed: u64 },
}

/// The restricted system's flat surface over its legal sites.
pub fn restricted_surface(r: i64, l: i64) -> Result<SteppedSurface> {
    SteppedSurface::flat(SurfaceKind::Restricted { r, l }, Window::new(1, r, 1, l), 0)
}

/// Random positive rationals with numerator and denominator in `1..=9`.
pub fn rational_data(window: Window, seed: u64) -> Grid<BigRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Grid::from_fn(window, |_, _| {
        let num: i64 = rng.gen_range(1..=9);
        let den: i64 = rng.gen_range(1..=9);
        BigRational::new(num.into(), den.into())
    })
}

/// `T_{i,j,k}` at every site for `k` in `0..=kmax`.
fn restricted_orbit<V: Scalar>(
    surface: &SteppedSurface,
    data: &Grid<V>,
    kmax: i64,
    max_terms: usize,
) -> Result<HashMap<(i64, i64, i64), V>> {
    let mut oracle = Oracle::new(surface, data).with_max_terms(max_terms);
    let w = surface.window();
    let mut out = HashMap::new();
    for k in 0..=kmax {
        for (i, j) in w.sites() {
            if (i + j + k).rem_euclid(2) == 0 {
                out.insert((i, j, k), oracle.value(i, j, k)?);
            }
        }
    }
    Ok(out)
}

fn periodicity_cases<V: Scalar>(
    rep: &mut Report,
    values: &HashMap<(i64, i64, i64), V>,
    r: i64,
    l: i64,
    label: &str,
    show: &dyn Fn(&V) -> String,
) {
    let n = 2 * (r + l + 2);
    let shifted = |p: i64| -> Option<(i64, i64, i64)> {
        let mut keys: Vec<_> = values.keys().copied().filter(|&(_, _, k)| k < n).collect();
        keys.sort();
        keys.into_iter().find(|key| values.get(&(key.0, key.1, key.2 + p)) != Some(&values[key]))
    };
    let desc = format!("r={r} l={l} {label}: N = {n} is a period over a full period");
    match shifted(n) {
        None => rep.check(desc, format!("T(k+{n}) = T(k)"), "equal at every site", true),
        Some((i, j, k)) => rep.check(
            desc,
            show(&values[&(i, j, k)]),
            values.get(&(i, j, k + n)).map_or("missing".into(), |v| show(v)),
            false,
        ),
    }
    let minimal = (1..=n).find(|&p| p % 2 == 0 && shifted(p).is_none());
    let found = minimal.map_or("none".to_string(), |p| p.to_string());
    rep.check(
        format!("r={r} l={l} {label}: minimal period {found} divides N = {n}"),
        format!("a divisor of {n}"),
        format!("minimal period {found}"),
        minimal.map_or(false, |p| n % p == 0),
    );
    // for odd r+l the twist pairs sites of opposite parity, so start from
    // the right-hand side
    let half = n / 2;
    let mut bad = None;
    let mut keys: Vec<_> = values.keys().copied().filter(|&(_, _, k)| k < n).collect();
    keys.sort();
    for (i, j, k) in keys {
        let (ti, tj) = (r + 1 - i, l + 1 - j);
        if values.get(&(ti, tj, k + half)) != Some(&values[&(i, j, k)]) {
            bad = Some((ti, tj, k));
            break;
        }
    }
    let desc = format!("r={r} l={l} {label}: T(i,j,k+N/2) = T(r+1-i,l+1-j,k)");
    match bad {
        None => rep.check(desc, "twisted values equal", "equal at every site", true),
        Some((i, j, k)) => rep.check(
            desc,
            show(&values[&(r + 1 - i, l + 1 - j, k)]),
            values.get(&(i, j, k + half)).map_or("missing".into(), |v| show(v)),
            false,
        ),
    }
}

/// Periodicity and the half-period twist of the restricted system, over
/// `k` in `0..=2N`. Symbolic runs also return the orbit for positivity.
pub fn check_periodicity(
    r: i64,
    l: i64,
    mode: DataMode,
    max_terms: usize,
) -> Result<(Report, Vec<(String, LaurentPoly)>, VarTable)> {
    if r < 1 || l < 1 {
        return Err(Error::Usage("periodicity needs r, l >= 1".into()));
    }
    let mut rep = Report::new("periodicity");
    let surface = restricted_surface(r, l)?;
    let n = 2 * (r + l + 2);
    let mut table = VarTable::new();
    let mut orbit = Vec::new();
    match mode {
        DataMode::Symbolic => {
            let data = generic_data(surface.window(), &mut table);
            let values = restricted_orbit(&surface, &data, 2 * n, max_terms)?;
            let tb = table.clone();
            periodicity_cases(&mut rep, &values, r, l, "symbolic", &|v: &LaurentPoly| v.canonical_text(&tb));
            let mut keys: Vec<_> = values.keys().copied().filter(|&(_, _, k)| k < n).collect();
            keys.sort();
            for key in keys {
                orbit.push((format!("restricted r={r} l={l} T{:?}", key), values[&key].clone()));
            }
        }
        DataMode::Rational { seed } => {
            let data = rational_data(surface.window(), seed);
            let values = restricted_orbit(&surface, &data, 2 * n, max_terms)?;
            let label = format!("rational seed {seed} (smoke)");
            periodicity_cases(&mut rep, &values, r, l, &label, &|v: &BigRational| v.to_string());
            let negative = values.values().filter(|v| !v.is_positive()).count();
            rep.check(
                format!("r={r} l={l} {label}: all values positive"),
                "0 non-positive values",
                format!("{negative} non-positive values"),
                negative == 0,
            );
        }
    }
    Ok((rep, orbit, table))
}

// ---------------------------------------------------------------------------
// positivity

/// Every coefficient of every listed polynomial is non-negative.
pub fn check_positivity(items: &[(String, LaurentPoly)], table: &VarTable) -> Report {
    let mut rep = Report::new("positivity");
    for (name, p) in items {
        let bad = p.terms().find(|(_, c)| c.is_negative());
        match bad {
            None => rep.check(format!("{name}: {} terms", p.len()), "non-negative coefficients", "non-negative", true),
            Some((m, c)) => {
                let term = LaurentPoly::term(table, m.clone(), c.clone());
                rep.check(name.clone(), "non-negative coefficients", format!("term {}", term.canonical_text(table)), false);
            }
        }
    }
    rep
}

// ---------------------------------------------------------------------------
// equivalence

/// Counts for the method agreement sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalencePlan {
    pub flat: usize,
    pub mutated: usize,
    pub truncated: usize,
    pub max_mutations: usize,
    pub max_k: i64,
}

impl Default for EquivalencePlan {
    fn default() -> Self {
        EquivalencePlan {
            flat: 25,
            mutated: 30,
            truncated: 8,
            max_mutations: 4,
            max_k: 4,
        }
    }
}

/// Applies up to `steps` random mutations that keep the surface within `|k| <= 2`.
pub fn random_mutations(surface: &mut SteppedSurface, steps: usize, rng: &mut ChaCha8Rng) -> Vec<(i64, i64, Direction)> {
    let w = surface.window();
    let mut dummy = Grid::from_fn(w, |_, _| BigRational::from_integer(1.into()));
    let mut done = Vec::new();
    let mut tries = 0;
    while done.len() < steps && tries < 200 {
        tries += 1;
        let i = rng.gen_range(w.imin..=w.imax);
        let j = rng.gen_range(w.jmin + 1..w.jmax);
        let dir = if rng.gen_bool(0.5) { Direction::Forward } else { Direction::Backward };
        let h = surface.height(i, j).unwrap();
        let next = if dir == Direction::Forward { h + 2 } else { h - 2 };
        if next.abs() > 2 {
            continue;
        }
        if surface.mutate(&mut dummy, i, j, dir).is_ok() {
            done.push((i, j, dir));
        }
    }
    done
}

struct Sample {
    kind: SurfaceKind,
    window: Window,
    mutations: usize,
}

fn kind_label(kind: SurfaceKind) -> String {
    match kind {
        SurfaceKind::Ainf => "A_inf".into(),
        SurfaceKind::Ar { r } => format!("A_{r}"),
        other => format!("{other:?}"),
    }
}

/// Samples queries on flat and mutated `A_inf` and `A_r` surfaces and
/// checks that every applicable method agrees with the recursion, and that
/// the completed-cone recomputation of the corners agrees too. Returns the
/// symbolic values for the positivity suite.
pub fn check_equivalence(seed: u64, plan: EquivalencePlan) -> Result<(Report, Vec<(String, LaurentPoly)>, VarTable)> {
    let mut rep = Report::new("equivalence");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = VarTable::new();
    let mut values = Vec::new();
    let mut samples = Vec::new();
    let kinds = [
        SurfaceKind::Ainf,
        SurfaceKind::Ar { r: 1 },
        SurfaceKind::Ar { r: 2 },
        SurfaceKind::Ar { r: 3 },
    ];
    for n in 0..plan.flat + plan.mutated {
        let kind = kinds[n % kinds.len()];
        let window = match kind {
            SurfaceKind::Ar { r } => Window::new(1, r, -10, 10),
            _ => Window::new(-9, 9, -12, 12),
        };
        let mutations = if n < plan.flat { 0 } else { rng.gen_range(1..=plan.max_mutations) };
        samples.push(Sample { kind, window, mutations });
    }
    let mut truncated = 0;
    let mut extra = 0;
    let mut idx = 0;
    while idx < samples.len() || (truncated < plan.truncated && extra < 400) {
        let sample = if idx < samples.len() {
            let s = &samples[idx];
            Sample { kind: s.kind, window: s.window, mutations: s.mutations }
        } else {
            extra += 1;
            let r = rng.gen_range(1..=3);
            Sample {
                kind: SurfaceKind::Ar { r },
                window: Window::new(1, r, -10, 10),
                mutations: rng.gen_range(0..=plan.max_mutations),
            }
        };
        let hunting = idx >= samples.len();
        idx += 1;
        let mut surface = SteppedSurface::flat(sample.kind, sample.window, 0)?;
        let applied = random_mutations(&mut surface, sample.mutations, &mut rng);
        let (ilo, ihi) = match sample.kind {
            SurfaceKind::Ar { r } => (1, r),
            _ => (-1, 1),
        };
        let i = rng.gen_range(ilo..=ihi);
        let j = rng.gen_range(-1..=1);
        let h = surface.height(i, j).unwrap();
        let mut k = rng.gen_range(-plan.max_k..=plan.max_k);
        if (i + j + k).rem_euclid(2) != 0 {
            k += if k < plan.max_k { 1 } else { -1 };
        }
        if k == h {
            k = if h + 2 <= plan.max_k { h + 2 } else { h - 2 };
        }
        let p = Point::new(i, j, k);
        let is_truncated = match sample.kind {
            SurfaceKind::Ar { r } => {
                let (s, kk) = if k < h { (surface.reflected(), -k) } else { (surface.clone(), k) };
                s.shadow(i, j, kk).map_or(false, |d| d.bottom == 0 || d.top == r + 1)
            }
            _ => false,
        };
        if hunting && !is_truncated {
            continue;
        }
        if is_truncated {
            truncated += 1;
        }
        let data = generic_data(sample.window, &mut table);
        let label = format!(
            "{} {}{} T{p}{}",
            kind_label(sample.kind),
            if applied.is_empty() { "flat" } else { "flat+" },
            if applied.is_empty() { String::new() } else { format!("{} mutations", applied.len()) },
            if is_truncated { " truncated shadow" } else { "" }
        );
        let oracle = match solve_capped(Method::Oracle, &surface, &data, p, DEFAULT_MAX_TERMS) {
            Ok(res) => res.value,
            Err(e) => {
                rep.error(format!("{label}: oracle"), "a value", &e);
                continue;
            }
        };
        let methods = applicable_methods(&surface, p);
        let mut agree = Vec::new();
        let mut bad = Vec::new();
        for m in methods.iter().copied().filter(|&m| m != Method::Oracle) {
            match solve_capped(m, &surface, &data, p, DEFAULT_MAX_TERMS) {
                Ok(res) if res.value == oracle => agree.push(m.name()),
                Ok(res) => bad.push(format!("{m} gave {}", res.value.canonical_text(&table))),
                Err(Error::TooLarge(msg)) => rep.finding(format!("{label}: {m} skipped, {msg}")),
                Err(e) => bad.push(format!("{m} failed: {e}")),
            }
        }
        let pass = bad.is_empty() && agree.len() + 1 >= 2;
        rep.check(
            format!("{label}: oracle = {}", agree.join(" = ")),
            oracle.canonical_text(&table),
            if bad.is_empty() { "all agree".to_string() } else { bad.join("; ") },
            pass,
        );
        match corner_cross_check(&surface, &data, p, &mut table) {
            Ok(_) => rep.check(format!("{label}: completed-cone corners agree"), "same value", "same value", true),
            Err(Error::OutOfWindow { .. }) => rep.finding(format!("{label}: completion does not fit the window")),
            Err(e) => rep.error(format!("{label}: completed-cone corners agree"), "same value", &e),
        }
        values.push((label, oracle));
    }
    rep.check(
        "truncated A_r shadows sampled",
        format!("at least {}", plan.truncated),
        truncated,
        truncated >= plan.truncated,
    );
    Ok((rep, values, table))
}

// ---------------------------------------------------------------------------
// boundary emergence

/// Runs the unrestricted `A_r` recursion on regularized doubly-symmetric
/// data, sends the regularization variables to 0, and compares with the
/// walls and with the restricted recursion. `k` ranges over `-kmax..=kmax`.
pub fn check_boundary_emergence(r: i64, l: i64, kmax: i64, max_terms: usize) -> Result<(Report, Vec<(String, LaurentPoly)>, VarTable)> {
    let mut rep = Report::new("boundary");
    let mut table = VarTable::new();
    let window = Window::new(1, r, -r - kmax - 1, l + r + kmax + 2);
    let sym = build_symmetric_data(SymmetricFamily::Periodic { r, l }, window, true, &mut table)?;
    let surface = SteppedSurface::flat(SurfaceKind::Ar { r }, window, 0)?;
    let restricted = restricted_surface(r, l)?;
    let rdata = Grid::from_fn(restricted.window(), |i, j| sym.data.get(i, j).unwrap().clone());
    let vars: BTreeSet<VarId> = var_set(&sym.a_vars).union(&var_set(&sym.b_vars)).copied().collect();
    let mut oracle = Oracle::new(&surface, &sym.data).with_max_terms(max_terms);
    let mut roracle = Oracle::new(&restricted, &rdata).with_max_terms(max_terms);
    let mut values = Vec::new();
    let mut checks = [(0usize, 0usize); 4];
    for k in -kmax..=kmax {
        for j in -r..=l + r + 1 {
            for i in 1..=r {
                if (i + j + k).rem_euclid(2) != 0 {
                    continue;
                }
                let (slot, want): (usize, Option<LaurentPoly>) = if j == 0 || j == l + 1 {
                    (0, Some(LaurentPoly::one()))
                } else if (1..=l).contains(&j) {
                    (2, None)
                } else if i == 1 && j < 0 {
                    (1, Some(LaurentPoly::zero()))
                } else if i == r && j > l + 1 {
                    (3, Some(LaurentPoly::zero()))
                } else {
                    continue;
                };
                let here = format!("r={r} l={l} T({i},{j},{k})");
                // the recursion can meet exact zeros away from the regularized
                // squares; the minor formula has no divisions by values
                let raw = match oracle.value(i, j, k) {
                    Ok(v) => v,
                    Err(Error::NeedsRegularization(msg)) => {
                        rep.finding(format!("{here}: recursion meets a zero, {msg}; using the minor formula"));
                        match solve_capped(Method::GeneralMinor, &surface, &sym.data, Point::new(i, j, k), max_terms) {
                            Ok(res) => res.value,
                            Err(e) => {
                                rep.error(format!("{here} by the minor formula"), "a value", &e);
                                continue;
                            }
                        }
                    }
                    Err(e) => {
                        rep.error(here, "a value", &e);
                        continue;
                    }
                };
                let lim = match raw.subst_zero(&vars) {
                    Ok(v) => v,
                    Err(e) => {
                        rep.finding(format!("{here}: no limit, {e}"));
                        continue;
                    }
                };
                let want = match want {
                    Some(w) => w,
                    None => match roracle.value(i, j, k) {
                        Ok(v) => {
                            values.push((format!("restricted {here}"), v.clone()));
                            v
                        }
                        Err(e) => {
                            rep.error(here, "restricted value", &e);
                            continue;
                        }
                    },
                };
                checks[slot].0 += 1;
                if lim != want {
                    checks[slot].1 += 1;
                    rep.check(
                        format!("{here} after the limit"),
                        want.canonical_text(&table),
                        lim.canonical_text(&table),
                        false,
                    );
                }
            }
        }
    }
    let names = [
        "wall columns 0 and l+1 equal 1",
        "row 1 vanishes on the r columns left of the wall",
        "interior equals the restricted recursion",
        "row r vanishes on the r columns right of the wall",
    ];
    for (slot, name) in names.iter().enumerate() {
        let (count, bad) = checks[slot];
        rep.check(
            format!("r={r} l={l} |k|<={kmax}: {name}"),
            format!("{count} points agree"),
            format!("{} points agree", count - bad),
            bad == 0 && count > 0,
        );
    }
    Ok((rep, values, table))
}

// ---------------------------------------------------------------------------
// dispatch

/// Parameters for `run_suite`. Without `r` and `l` each suite runs its
/// default set of cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteParams {
    pub r: Option<i64>,
    pub l: Option<i64>,
    pub kmax: Option<i64>,
    pub seed: u64,
    pub max_terms: usize,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            r: None,
            l: None,
            kmax: None,
            seed: 0,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }
}

/// Largest `r * l` run symbolically; larger systems use rationals.
pub const SYMBOLIC_LIMIT: i64 = 6;

pub const PERIODICITY_SYMBOLIC: [(i64, i64); 4] = [(1, 1), (1, 2), (1, 3), (2, 2)];
pub const PERIODICITY_RATIONAL: [(i64, i64); 2] = [(2, 3), (3, 3)];
pub const POSITIVITY_RESTRICTED: [(i64, i64); 3] = [(1, 2), (1, 3), (2, 2)];
pub const BOUNDARY_CASES: [(i64, i64); 3] = [(1, 2), (2, 1), (2, 2)];

fn pairs(params: &SuiteParams, default: &[(i64, i64)]) -> Vec<(i64, i64)> {
    match (params.r, params.l) {
        (Some(r), Some(l)) => vec![(r, l)],
        (Some(r), None) => default.iter().copied().filter(|p| p.0 == r).collect(),
        (None, Some(l)) => default.iter().copied().filter(|p| p.1 == l).collect(),
        (None, None) => default.to_vec(),
    }
}

/// Runs one suite by name.
pub fn run_suite(name: &str, params: &SuiteParams) -> Result<Report> {
    let mut rep = Report::new(name);
    match name {
        "identities" => {
            let rmax = params.r.unwrap_or(5).max(1) as usize;
            let rmin = if params.r.is_some() { rmax } else { 1 };
            rep.merge(check_identities(rmin, rmax, rmax.min(4))?);
        }
        "periodicity" => {
            let mut cases: Vec<(i64, i64, DataMode)> = Vec::new();
            if params.r.is_some() || params.l.is_some() {
                let all: Vec<_> = PERIODICITY_SYMBOLIC.iter().chain(PERIODICITY_RATIONAL.iter()).copied().collect();
                for (r, l) in pairs(params, &all) {
                    let mode = if r * l <= SYMBOLIC_LIMIT { DataMode::Symbolic } else { DataMode::Rational { seed: params.seed } };
                    cases.push((r, l, mode));
                }
            } else {
                cases.extend(PERIODICITY_SYMBOLIC.iter().map(|&(r, l)| (r, l, DataMode::Symbolic)));
                cases.extend(PERIODICITY_RATIONAL.iter().map(|&(r, l)| (r, l, DataMode::Rational { seed: params.seed })));
            }
            if cases.is_empty() {
                return Err(Error::Usage("no periodicity case matches the given r and l".into()));
            }
            for (r, l, mode) in cases {
                rep.merge(check_periodicity(r, l, mode, params.max_terms)?.0);
            }
        }
        "positivity" => {
            for (r, l) in pairs(params, &POSITIVITY_RESTRICTED) {
                let (_, orbit, table) = check_periodicity(r, l, DataMode::Symbolic, params.max_terms)?;
                rep.merge(check_positivity(&orbit, &table));
            }
            if params.r.is_none() && params.l.is_none() {
                let (_, values, table) = check_equivalence(params.seed, EquivalencePlan::default())?;
                rep.merge(check_positivity(&values, &table));
            }
        }
        "equivalence" => {
            rep.merge(check_equivalence(params.seed, EquivalencePlan::default())?.0);
        }
        "boundary" => {
            let cases = pairs(params, &BOUNDARY_CASES);
            if cases.is_empty() {
                return Err(Error::Usage("no boundary case matches the given r and l".into()));
            }
            for (r, l) in cases {
                let kmax = params.kmax.unwrap_or(r + l + 2);
                rep.merge(check_boundary_emergence(r, l, kmax, params.max_terms)?.0);
            }
        }
        other => return Err(Error::Usage(format!("unknown suite {other}; known: {}", SUITES.join(", ")))),
    }
    Ok(rep)
}
