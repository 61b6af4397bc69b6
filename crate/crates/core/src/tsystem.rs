//! Solvers for `T_{i,j,k}`: the memoised recursion and the network formulas.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{LaurentError, LaurentPoly, VarId, VarTable};
use crate::matrix::PolyMatrix;
use crate::network::{domain_network, network_matrix, Chip, ChipWord, PathGraph};
use crate::scalar::Scalar;
use crate::surface::{Grid, InitialData, ShadowDomain, SteppedSurface, SurfaceKind, SymmetricData};

/// A lattice point `(i, j, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub i: i64,
    pub j: i64,
    pub k: i64,
}

impl Point {
    pub fn new(i: i64, j: i64, k: i64) -> Self {
        Point { i, j, k }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.i, self.j, self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Oracle,
    T1Network,
    Wronskian,
    FlatMinor,
    GeneralMinor,
    Lgv,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Oracle,
        Method::T1Network,
        Method::Wronskian,
        Method::FlatMinor,
        Method::GeneralMinor,
        Method::Lgv,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::T1Network => "t1-network",
            Method::Wronskian => "wronskian",
            Method::FlatMinor => "flat-minor",
            Method::GeneralMinor => "general-minor",
            Method::Lgv => "lgv",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Method> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown method {s}")))
    }
}

/// Deterministic work counters of a solve.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub divisions: usize,
    pub chips: usize,
    pub matrix_size: usize,
    pub shadow_size: usize,
    pub terms: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub method: Method,
    pub value: LaurentPoly,
    pub stats: SolveStats,
}

static LAURENT_VIOLATIONS: AtomicUsize = AtomicUsize::new(0);

/// Number of non-Laurent quotients the recursion has met in this process.
/// Any nonzero value on formal data is a bug.
pub fn laurent_violations() -> usize {
    LAURENT_VIOLATIONS.load(Ordering::Relaxed)
}

fn division_error(e: LaurentError, p: Point) -> Error {
    match e {
        LaurentError::DivideByZero => Error::NeedsRegularization(format!("zero divisor at {p}")),
        LaurentError::NotDivisible { remainder } => {
            LAURENT_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
            Error::LaurentViolation(format!("division at {p} leaves remainder {remainder}"))
        }
        e => Error::Laurent(e),
    }
}

/// Memoised recursion from the initial data, upward above the surface and
/// downward below it. Every division is exact.
pub struct Oracle<'a, V: Scalar> {
    surface: &'a SteppedSurface,
    data: &'a Grid<V>,
    memo: HashMap<(i64, i64, i64), V>,
    divisions: usize,
    max_terms: usize,
}

/// Default cap on the number of terms of any product the solvers form.
pub const DEFAULT_MAX_TERMS: usize = 1_000_000;

impl<'a, V: Scalar> Oracle<'a, V> {
    pub fn new(surface: &'a SteppedSurface, data: &'a Grid<V>) -> Self {
        Oracle {
            surface,
            data,
            memo: HashMap::new(),
            divisions: 0,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self
    }

    pub fn divisions(&self) -> usize {
        self.divisions
    }

    pub fn value(&mut self, i: i64, j: i64, k: i64) -> Result<V> {
        if (i + j + k).rem_euclid(2) != 0 {
            return Err(Error::Usage(format!("point ({i},{j},{k}) has odd parity")));
        }
        self.eval(i, j, k)
    }

    fn eval(&mut self, i: i64, j: i64, k: i64) -> Result<V> {
        if self.surface.kind().is_boundary(i, j) {
            return Ok(V::one());
        }
        let h = self.surface.height(i, j).ok_or(Error::OutOfWindow { i, j })?;
        if k == h {
            return Ok(self.data.get(i, j).unwrap().clone());
        }
        if let Some(v) = self.memo.get(&(i, j, k)) {
            return Ok(v.clone());
        }
        let s = if k > h { -1 } else { 1 };
        let e = self.eval(i, j + 1, k + s)?;
        let w = self.eval(i, j - 1, k + s)?;
        let n = self.eval(i + 1, j, k + s)?;
        let so = self.eval(i - 1, j, k + s)?;
        let base = self.eval(i, j, k + 2 * s)?;
        let bound = e.size().saturating_mul(w.size()) + n.size().saturating_mul(so.size());
        if bound > self.max_terms {
            return Err(Error::TooLarge(format!(
                "T({i},{j},{k}) needs a product of up to {bound} terms, cap {}",
                self.max_terms
            )));
        }
        let num = e.mul(&w)?.add(&n.mul(&so)?)?;
        self.divisions += 1;
        let v = num
            .div_exact(&base)
            .map_err(|err| division_error(err, Point::new(i, j, k)))?;
        self.memo.insert((i, j, k), v.clone());
        Ok(v)
    }
}

/// The methods that apply to a query on a surface.
pub fn applicable_methods(surface: &SteppedSurface, p: Point) -> Vec<Method> {
    let mut out = vec![Method::Oracle];
    let kind = surface.kind();
    match kind {
        SurfaceKind::Ainf => {}
        SurfaceKind::Ar { .. } => {
            if p.i == 1 {
                out.push(Method::T1Network);
            }
            out.push(Method::Wronskian);
        }
        _ => return out,
    }
    if flat_minor_fits(surface, p) {
        out.push(Method::FlatMinor);
    }
    out.push(Method::GeneralMinor);
    out.push(Method::Lgv);
    out
}

fn flat_minor_fits(surface: &SteppedSurface, p: Point) -> bool {
    let Some(c) = surface.flat_offset() else {
        return false;
    };
    let kk = p.k - c;
    if kk < surface.height(p.i, p.j).map_or(i64::MAX, |h| h - c) {
        return false;
    }
    match surface.kind() {
        SurfaceKind::Ainf => true,
        SurfaceKind::Ar { r } => kk <= 1 || (p.i - kk + 1 >= 1 && p.i + kk - 1 <= r),
        _ => false,
    }
}

/// Solves with one method.
pub fn solve(method: Method, surface: &SteppedSurface, data: &InitialData, p: Point) -> Result<SolveResult> {
    solve_capped(method, surface, data, p, DEFAULT_MAX_TERMS)
}

/// `solve` with an explicit cap on intermediate and final term counts.
pub fn solve_capped(
    method: Method,
    surface: &SteppedSurface,
    data: &InitialData,
    p: Point,
    max_terms: usize,
) -> Result<SolveResult> {
    let mut stats = SolveStats::default();
    let value = match method {
        Method::Oracle => {
            let mut o = Oracle::new(surface, data).with_max_terms(max_terms);
            let v = o.value(p.i, p.j, p.k)?;
            stats.divisions = o.divisions();
            v
        }
        Method::T1Network => {
            if p.i != 1 {
                return Err(not_applicable(method, "only row 1"));
            }
            t1_network(surface, data, p.j, p.k, &mut stats)?
        }
        Method::Wronskian => wronskian(surface, data, p, &mut stats)?,
        Method::FlatMinor => flat_minor(surface, data, p, &mut stats)?,
        Method::GeneralMinor => general_minor(surface, data, p, false, &mut stats)?,
        Method::Lgv => general_minor(surface, data, p, true, &mut stats)?,
    };
    stats.terms = value.len();
    if stats.terms > max_terms {
        return Err(Error::TooLarge(format!("{} terms exceed the cap {max_terms}", stats.terms)));
    }
    Ok(SolveResult { method, value, stats })
}

fn not_applicable(method: Method, reason: &str) -> Error {
    Error::NotApplicable {
        method: method.name().into(),
        reason: reason.into(),
    }
}

fn require_rank(surface: &SteppedSurface, method: Method) -> Result<i64> {
    match surface.kind() {
        SurfaceKind::Ar { r } => Ok(r),
        _ => Err(not_applicable(method, "needs an A_r surface")),
    }
}

/// `T_{1,j,k} = [N(j0,j1)]_{1,1} t_{1,j1}`; points below the surface use the
/// reflected surface.
fn t1_network(surface: &SteppedSurface, data: &InitialData, j: i64, k: i64, stats: &mut SolveStats) -> Result<LaurentPoly> {
    require_rank(surface, Method::T1Network)?;
    let h = surface.height(1, j).ok_or(Error::OutOfWindow { i: 1, j })?;
    if k < h {
        return t1_network(&surface.reflected(), data, j, -k, stats);
    }
    let (j0, j1) = surface.projection(j, k)?;
    let n = network_matrix(surface, data, j0, j1)?;
    stats.chips += ((j1 - j0) * surface.kind().rank().unwrap()) as usize;
    stats.matrix_size = n.rows();
    let t = surface.value(data, 1, j1)?;
    Ok(n.get(0, 0) * &t)
}

/// `T_{i,j,k} = det_{1<=a,b<=i} T_{1, j+a-b, k+a+b-i-1}`.
fn wronskian(surface: &SteppedSurface, data: &InitialData, p: Point, stats: &mut SolveStats) -> Result<LaurentPoly> {
    let r = require_rank(surface, Method::Wronskian)?;
    if p.i < 1 || p.i > r {
        return Err(Error::OutOfWindow { i: p.i, j: p.j });
    }
    let n = p.i as usize;
    let mut m = PolyMatrix::zeros(n, n);
    for a in 1..=p.i {
        for b in 1..=p.i {
            let v = t1_network(surface, data, p.j + a - b, p.k + a + b - p.i - 1, stats)?;
            m.set((a - 1) as usize, (b - 1) as usize, v);
        }
    }
    stats.matrix_size = n;
    Ok(m.det()?)
}

/// Flat surface: minor of the diamond network around the point, times the
/// corner prefactor.
fn flat_minor(surface: &SteppedSurface, data: &InitialData, p: Point, stats: &mut SolveStats) -> Result<LaurentPoly> {
    if !flat_minor_fits(surface, p) {
        return Err(not_applicable(Method::FlatMinor, "needs a flat surface with the diamond inside the rows"));
    }
    let c = surface.flat_offset().unwrap();
    let kk = p.k - c;
    let (i, j) = (p.i, p.j);
    let t = |x: i64, y: i64| surface.value(data, x, y);
    if kk <= 1 {
        return t(i, j);
    }
    let base = i - kk + 1;
    let inside = |x: i64, y: i64| (x - i).abs() + (y - j).abs() <= kk - 1;
    let mut chips = Vec::new();
    for y in (j - kk + 2)..=(j + kk - 1) {
        for x in (i - kk + 1)..=(i + kk - 1) {
            if !(inside(x, y) && inside(x, y - 1)) {
                continue;
            }
            let m = (x - base) as usize;
            // (x,y) sits on the upper level exactly when x + y is odd
            let chip = if (x + y).rem_euclid(2) == 1 {
                Chip::u(m, t(x, y - 1)?, t(x, y)?, t(x + 1, y - 1)?)
            } else {
                Chip::v(m, t(x - 1, y)?, t(x, y - 1)?, t(x, y)?)
            };
            chips.push(chip);
        }
    }
    let size = (2 * kk - 2) as usize;
    let word = ChipWord::new(chips);
    stats.chips = word.len();
    stats.matrix_size = size;
    stats.shadow_size = (2 * kk * kk - 2 * kk + 1) as usize;
    let n = word.product(size)?;
    let minor = n.leading_minor((kk - 1) as usize)?;
    let mut pre = LaurentPoly::one();
    for a in 1..kk {
        pre = &pre * &t(i - kk + a, j + 1 - a)?.inverse().map_err(|_| Error::NotUnit(format!("t[{},{}]", i - kk + a, j + 1 - a)))?;
    }
    for b in 1..=kk {
        pre = &pre * &t(i - kk + b, j + b - 1)?;
    }
    Ok(&minor * &pre)
}

/// Arbitrary surface: minor of the shadow network times the corner
/// prefactor. With `lgv` the minor is computed as a sum over disjoint path
/// families instead of a determinant.
fn general_minor(
    surface: &SteppedSurface,
    data: &InitialData,
    p: Point,
    lgv: bool,
    stats: &mut SolveStats,
) -> Result<LaurentPoly> {
    let method = if lgv { Method::Lgv } else { Method::GeneralMinor };
    if !matches!(surface.kind(), SurfaceKind::Ainf | SurfaceKind::Ar { .. }) {
        return Err(not_applicable(method, "needs an A_inf or A_r surface"));
    }
    let h = surface.height(p.i, p.j).ok_or(Error::OutOfWindow { i: p.i, j: p.j })?;
    if p.k < h {
        return general_minor(&surface.reflected(), data, Point::new(p.i, p.j, -p.k), lgv, stats);
    }
    let dom = surface.shadow(p.i, p.j, p.k)?;
    minor_formula(surface, data, &dom, lgv, stats)
}

/// `|N(D)| * prod t_L^-1 * prod t_R` for a domain `D` of a surface.
fn minor_formula(
    surface: &SteppedSurface,
    data: &InitialData,
    dom: &ShadowDomain,
    lgv: bool,
    stats: &mut SolveStats,
) -> Result<LaurentPoly> {
    let (word, size) = domain_network(surface, data, dom)?;
    let kappa = dom.kappa();
    stats.chips = word.len();
    stats.matrix_size = size;
    stats.shadow_size = dom.points.len();
    let minor = if lgv {
        let g = PathGraph::from_word(&word, size)?;
        let ends: Vec<usize> = (1..=kappa).collect();
        g.disjoint_family_weight(&ends, &ends, LGV_MAX_PATHS, LGV_MAX_LAYERS)?
    } else {
        word.product(size)?.leading_minor(kappa)?
    };
    let mut pre = LaurentPoly::one();
    for &(x, y) in &dom.left_corners {
        let v = surface.value(data, x, y)?;
        pre = &pre * &v.inverse().map_err(|_| Error::NotUnit(format!("t[{x},{y}]")))?;
    }
    for &(x, y) in &dom.right_corners {
        pre = &pre * &surface.value(data, x, y)?;
    }
    Ok(&minor * &pre)
}

/// Recomputes `T_p` on the completion of its shadow, where the corners are
/// those of the whole cone section and the shadow's corners only appear
/// after the horizontal path weights telescope. Sites of the completion
/// outside the shadow get fresh variables `s[x,y]`, which must cancel.
/// Returns the value, or `CornerAmbiguity` if it differs from the
/// general-minor value.
pub fn corner_cross_check(
    surface: &SteppedSurface,
    data: &InitialData,
    p: Point,
    table: &mut VarTable,
) -> Result<LaurentPoly> {
    let h = surface.height(p.i, p.j).ok_or(Error::OutOfWindow { i: p.i, j: p.j })?;
    if p.k < h {
        return corner_cross_check(&surface.reflected(), data, Point::new(p.i, p.j, -p.k), table);
    }
    let mut stats = SolveStats::default();
    let direct = general_minor(surface, data, p, false, &mut stats)?;
    let dom = surface.shadow(p.i, p.j, p.k)?;
    let done = surface.completion(p.i, p.j, p.k)?;
    let w = done.window();
    let mut fresh = Grid::from_fn(w, |_, _| LaurentPoly::one());
    for (x, y) in w.sites() {
        let v = if dom.contains(x, y) {
            data.get(x, y).ok_or(Error::OutOfWindow { i: x, j: y })?.clone()
        } else {
            table.var_named(&format!("s[{x},{y}]"))
        };
        fresh.set(x, y, v);
    }
    let section = done.cone_section(p.i, p.j, p.k)?;
    let telescoped = minor_formula(&done, &fresh, &section, false, &mut stats)?;
    if telescoped != direct {
        return Err(Error::CornerAmbiguity(format!(
            "T{p}: shadow corners give {direct}, completed cone gives {telescoped}"
        )));
    }
    Ok(telescoped)
}

pub const LGV_MAX_PATHS: usize = 6;
pub const LGV_MAX_LAYERS: usize = 40;

/// Result of a solve on regularized symmetric data after the limit.
#[derive(Debug, Clone, PartialEq)]
pub enum Limit {
    Value(LaurentPoly),
    /// A regularization variable kept a negative power.
    Singular(String),
}

/// Solves on regularized data, then sends the regularization variables to 0.
pub fn solve_regularized(method: Method, surface: &SteppedSurface, sym: &SymmetricData, p: Point) -> Result<(Limit, SolveResult)> {
    let res = solve(method, surface, &sym.data, p)?;
    let vars: BTreeSet<VarId> = sym
        .a_vars
        .iter()
        .chain(sym.b_vars.iter())
        .flat_map(|v| v.variables())
        .collect();
    let lim = match res.value.subst_zero(&vars) {
        Ok(v) => Limit::Value(v),
        Err(LaurentError::NegativeExponent { monomial }) => Limit::Singular(monomial),
        Err(e) => return Err(e.into()),
    };
    Ok((lim, res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::VarTable;
    use crate::surface::{generic_data, Window};

    #[test]
    fn oracle_low_levels() {
        let mut table = VarTable::new();
        let w = Window::new(-3, 3, -3, 3);
        let s = SteppedSurface::flat(SurfaceKind::Ainf, w, 0).unwrap();
        let d = generic_data(w, &mut table);
        let mut o = Oracle::new(&s, &d);
        assert_eq!(o.value(0, 1, 1).unwrap(), d.get(0, 1).unwrap().clone());
        let t = |i, j| d.get(i, j).unwrap().clone();
        let expect = &(&(&t(0, 1) * &t(0, -1)) + &(&t(1, 0) * &t(-1, 0))) * &t(0, 0).inverse().unwrap();
        assert_eq!(o.value(0, 0, 2).unwrap(), expect);
        assert!(o.value(0, 0, 1).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
    }
}
