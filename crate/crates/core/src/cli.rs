//! Command-line front end. Settings come from an optional JSON config file
//! and from flags; flags win.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, VarTable};
use crate::network::{network_matrix, uv_decompose, ChipWord};
use crate::surface::{build_symmetric_data, generic_data, Direction, Grid, InitialData, SteppedSurface, SurfaceKind, SymmetricFamily, Window};
use crate::tsystem::{applicable_methods, solve_capped, solve_regularized, Limit, Method, Oracle, Point, SolveStats, DEFAULT_MAX_TERMS};
use crate::verify::{rational_data, run_suite, SuiteParams, SUITES};

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_MAX_WINDOW: usize = 64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TOO_LARGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "octahedron", version, about = "Exact solutions of the octahedron recurrence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Ainf,
    Ar,
    RightHalf,
    LeftHalf,
    Restricted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DataArg {
    Symbolic,
    Plus,
    Minus,
    Restricted,
    Rational,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Method name or `all`.
    #[arg(long, global = true)]
    method: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Largest window side length.
    #[arg(long, global = true)]
    max_window: Option<usize>,
    /// Largest polynomial size, in terms.
    #[arg(long, global = true)]
    max_terms: Option<usize>,
}

#[derive(Debug, Args, Default)]
struct SurfaceArgs {
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long)]
    r: Option<i64>,
    #[arg(long)]
    l: Option<i64>,
    /// Even offset of the flat surface.
    #[arg(long)]
    offset: Option<i64>,
    /// Window as `imin,imax,jmin,jmax`.
    #[arg(long)]
    window: Option<String>,
    /// Mutation `i,j,forward|backward`; repeatable.
    #[arg(long = "mutation")]
    mutations: Vec<String>,
    #[arg(long, value_enum)]
    data: Option<DataArg>,
    /// Replace the zero squares of family data by regularized arrays and
    /// report the limit.
    #[arg(long)]
    regularized: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate queries with one or all applicable methods.
    Solve {
        #[command(flatten)]
        surface: SurfaceArgs,
        /// Query `i,j,k`; repeatable.
        #[arg(long = "query")]
        queries: Vec<String>,
    },
    /// Evaluate queries by the recursion only.
    Oracle {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long = "query")]
        queries: Vec<String>,
    },
    /// Print the chip word and network matrix of a slice `j0..j1`.
    Decompose {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        j0: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        j1: Option<i64>,
    },
    /// Apply mutations and print the resulting surface and data.
    Mutate {
        #[command(flatten)]
        surface: SurfaceArgs,
    },
    /// Run verification suites.
    Verify {
        /// Suite names; all suites when empty.
        suites: Vec<String>,
        #[arg(long)]
        r: Option<i64>,
        #[arg(long)]
        l: Option<i64>,
        #[arg(long)]
        kmax: Option<i64>,
    },
}

/// Surface description in the config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Flat {
        #[serde(default)]
        offset: i64,
    },
    /// Explicit heights, `rows[i - imin][j - jmin]`.
    Heights { imin: i64, jmin: i64, rows: Vec<Vec<i64>> },
}

/// One mutation step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutationSpec {
    pub i: i64,
    pub j: i64,
    pub direction: Direction,
}

/// Initial data description in the config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSpec {
    /// A fresh variable `t[i,j]` per site.
    Symbolic,
    /// Symmetric family data.
    Family {
        symmetric: SymmetricFamily,
        #[serde(default)]
        regularized: bool,
    },
    /// Explicit values, `rows[i - imin][j - jmin]`, each an integer, a
    /// variable name or canonical polynomial text.
    Values { imin: i64, jmin: i64, rows: Vec<Vec<String>> },
    /// Random positive rationals; recursion only.
    Rational { seed: Option<u64> },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default)]
    pub suites: Vec<String>,
    pub r: Option<i64>,
    pub l: Option<i64>,
    pub kmax: Option<i64>,
}

/// The JSON run configuration. Every field is optional except `version`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub command: Option<String>,
    pub boundary: Option<SurfaceKind>,
    pub window: Option<Window>,
    pub surface: Option<SurfaceSpec>,
    #[serde(default)]
    pub mutations: Vec<MutationSpec>,
    pub data: Option<DataSpec>,
    #[serde(default)]
    pub queries: Vec<[i64; 3]>,
    pub method: Option<String>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub max_window: Option<usize>,
    pub max_terms: Option<usize>,
    pub slice: Option<[i64; 2]>,
    pub verify: Option<VerifySpec>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Usage(format!("config: {e}")))?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::Usage(format!("config version {} is not supported; expected {CONFIG_VERSION}", cfg.version)));
        }
        if cfg.max_window == Some(0) || cfg.max_terms == Some(0) {
            return Err(Error::Usage("resource caps must be positive".into()));
        }
        Ok(cfg)
    }
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::TooLarge(_) => EXIT_TOO_LARGE,
        Error::Usage(_)
        | Error::InvalidSurface(_)
        | Error::NotMutable { .. }
        | Error::OutOfWindow { .. }
        | Error::BelowSurface { .. }
        | Error::NotApplicable { .. }
        | Error::Laurent(crate::laurent::LaurentError::Parse(_)) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parses arguments, runs, and returns the exit code. Output goes to `out`,
/// diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Settings after merging the config file and the flags.
struct Settings {
    cfg: RunConfig,
    format: Format,
    seed: u64,
    max_window: usize,
    max_terms: usize,
    method: Option<String>,
}

fn load_settings(common: &CommonArgs) -> Result<Settings> {
    let cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig {
            version: CONFIG_VERSION,
            ..RunConfig::default()
        },
    };
    let max_window = common.max_window.or(cfg.max_window).unwrap_or(DEFAULT_MAX_WINDOW);
    let max_terms = common.max_terms.or(cfg.max_terms).unwrap_or(DEFAULT_MAX_TERMS);
    if max_window == 0 || max_terms == 0 {
        return Err(Error::Usage("resource caps must be positive".into()));
    }
    Ok(Settings {
        format: common.format.or(cfg.format).unwrap_or(Format::Text),
        seed: common.seed.or(cfg.seed).unwrap_or(0),
        method: common.method.clone().or_else(|| cfg.method.clone()),
        max_window,
        max_terms,
        cfg,
    })
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let mut st = load_settings(&cli.common)?;
    let name = match &cli.command {
        Command::Solve { .. } => "solve",
        Command::Oracle { .. } => "oracle",
        Command::Decompose { .. } => "decompose",
        Command::Mutate { .. } => "mutate",
        Command::Verify { .. } => "verify",
    };
    if let Some(c) = &st.cfg.command {
        if c != name {
            return Err(Error::Usage(format!("config is for command {c}, not {name}")));
        }
    }
    let buf = match cli.command {
        Command::Solve { surface, queries } => {
            apply_surface_args(&mut st, &surface)?;
            apply_queries(&mut st, &queries)?;
            cmd_solve(&st, false)?
        }
        Command::Oracle { surface, queries } => {
            apply_surface_args(&mut st, &surface)?;
            apply_queries(&mut st, &queries)?;
            cmd_solve(&st, true)?
        }
        Command::Decompose { surface, j0, j1 } => {
            apply_surface_args(&mut st, &surface)?;
            let slice = st.cfg.slice;
            let j0 = j0.or(slice.map(|s| s[0]));
            let j1 = j1.or(slice.map(|s| s[1]));
            match (j0, j1) {
                (Some(a), Some(b)) if a <= b => st.cfg.slice = Some([a, b]),
                _ => return Err(Error::Usage("decompose needs --j0 <= --j1".into())),
            }
            cmd_decompose(&st)?
        }
        Command::Mutate { surface } => {
            apply_surface_args(&mut st, &surface)?;
            cmd_mutate(&st)?
        }
        Command::Verify { suites, r, l, kmax } => {
            let mut spec = st.cfg.verify.clone().unwrap_or_default();
            if !suites.is_empty() {
                spec.suites = suites;
            }
            spec.r = r.or(spec.r);
            spec.l = l.or(spec.l);
            spec.kmax = kmax.or(spec.kmax);
            cmd_verify(&st, &spec)?
        }
    };
    out.write_all(buf.text.as_bytes()).map_err(|e| Error::Usage(format!("write failed: {e}")))?;
    Ok(buf.code)
}

struct Output {
    text: String,
    code: i32,
}

// ---------------------------------------------------------------------------
// argument merging

fn parse_ints(text: &str, n: usize, what: &str) -> Result<Vec<i64>> {
    let parts: std::result::Result<Vec<i64>, _> = text.split(',').map(|p| p.trim().parse::<i64>()).collect();
    match parts {
        Ok(v) if v.len() == n => Ok(v),
        _ => Err(Error::Usage(format!("{what} must be {n} comma-separated integers, got {text}"))),
    }
}

fn apply_queries(st: &mut Settings, queries: &[String]) -> Result<()> {
    if !queries.is_empty() {
        st.cfg.queries = queries
            .iter()
            .map(|q| parse_ints(q, 3, "query").map(|v| [v[0], v[1], v[2]]))
            .collect::<Result<_>>()?;
    }
    if st.cfg.queries.is_empty() {
        return Err(Error::Usage("no queries given".into()));
    }
    Ok(())
}

fn apply_surface_args(st: &mut Settings, a: &SurfaceArgs) -> Result<()> {
    let cfg = &mut st.cfg;
    let prior = cfg.boundary;
    let r = a.r.or(prior.and_then(|k| k.rank()));
    let l = a.l.or(match prior {
        Some(SurfaceKind::LeftHalf { l, .. }) | Some(SurfaceKind::Restricted { l, .. }) => Some(l),
        _ => None,
    });
    let need = |v: Option<i64>, what: &str| v.ok_or_else(|| Error::Usage(format!("--{what} is required for this kind")));
    if let Some(kind) = a.kind {
        cfg.boundary = Some(match kind {
            KindArg::Ainf => SurfaceKind::Ainf,
            KindArg::Ar => SurfaceKind::Ar { r: need(r, "r")? },
            KindArg::RightHalf => SurfaceKind::RightHalf { r: need(r, "r")? },
            KindArg::LeftHalf => SurfaceKind::LeftHalf { r: need(r, "r")?, l: need(l, "l")? },
            KindArg::Restricted => SurfaceKind::Restricted { r: need(r, "r")?, l: need(l, "l")? },
        });
    } else if a.r.is_some() || a.l.is_some() {
        cfg.boundary = Some(match prior {
            None | Some(SurfaceKind::Ainf) | Some(SurfaceKind::Ar { .. }) => SurfaceKind::Ar { r: need(r, "r")? },
            Some(SurfaceKind::RightHalf { .. }) => SurfaceKind::RightHalf { r: need(r, "r")? },
            Some(SurfaceKind::LeftHalf { .. }) => SurfaceKind::LeftHalf { r: need(r, "r")?, l: need(l, "l")? },
            Some(SurfaceKind::Restricted { .. }) => SurfaceKind::Restricted { r: need(r, "r")?, l: need(l, "l")? },
        });
    }
    if let Some(offset) = a.offset {
        cfg.surface = Some(SurfaceSpec::Flat { offset });
    }
    if let Some(w) = &a.window {
        let v = parse_ints(w, 4, "window")?;
        if v[0] > v[1] || v[2] > v[3] {
            return Err(Error::Usage("window is empty".into()));
        }
        cfg.window = Some(Window::new(v[0], v[1], v[2], v[3]));
    }
    if !a.mutations.is_empty() {
        cfg.mutations = a
            .mutations
            .iter()
            .map(|m| {
                let parts: Vec<&str> = m.split(',').map(str::trim).collect();
                let bad = || Error::Usage(format!("mutation must be i,j,forward|backward, got {m}"));
                if parts.len() != 3 {
                    return Err(bad());
                }
                let i = parts[0].parse().map_err(|_| bad())?;
                let j = parts[1].parse().map_err(|_| bad())?;
                let direction = match parts[2] {
                    "forward" => Direction::Forward,
                    "backward" => Direction::Backward,
                    _ => return Err(bad()),
                };
                Ok(MutationSpec { i, j, direction })
            })
            .collect::<Result<_>>()?;
    }
    if let Some(d) = a.data {
        let kind = cfg.boundary.unwrap_or(SurfaceKind::Ainf);
        let rank = kind.rank();
        let family_l = || match kind {
            SurfaceKind::LeftHalf { l, .. } | SurfaceKind::Restricted { l, .. } => Some(l),
            _ => a.l,
        };
        cfg.data = Some(match d {
            DataArg::Symbolic => DataSpec::Symbolic,
            DataArg::Rational => DataSpec::Rational { seed: None },
            DataArg::Plus => DataSpec::Family {
                symmetric: SymmetricFamily::Plus { r: need(rank, "r")? },
                regularized: a.regularized,
            },
            DataArg::Minus => DataSpec::Family {
                symmetric: SymmetricFamily::Minus { r: need(rank, "r")?, l: need(family_l(), "l")? },
                regularized: a.regularized,
            },
            DataArg::Restricted => DataSpec::Family {
                symmetric: SymmetricFamily::Periodic { r: need(rank, "r")?, l: need(family_l(), "l")? },
                regularized: a.regularized,
            },
        });
    } else if a.regularized {
        match &mut cfg.data {
            Some(DataSpec::Family { regularized, .. }) => *regularized = true,
            _ => return Err(Error::Usage("--regularized needs family data".into())),
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// building surfaces and data

/// Data over the surface window, symbolic or rational.
enum Data {
    Symbolic(InitialData),
    Regularized(crate::surface::SymmetricData),
    Rational(Grid<BigRational>),
}

struct Setup {
    surface: SteppedSurface,
    data: Data,
    table: VarTable,
}

fn kind_of(st: &Settings) -> SurfaceKind {
    st.cfg.boundary.unwrap_or(SurfaceKind::Ainf)
}

/// Window covering the queries and mutations with `margin` to spare,
/// clipped to the legal range of the kind.
fn derived_window(st: &Settings, margin: i64) -> Result<Window> {
    let kind = kind_of(st);
    let offset = match &st.cfg.surface {
        Some(SurfaceSpec::Flat { offset }) => *offset,
        _ => 0,
    };
    let mut pts: Vec<(i64, i64, i64)> = st.cfg.queries.iter().map(|q| (q[0], q[1], (q[2] - offset).abs())).collect();
    pts.extend(st.cfg.mutations.iter().map(|m| (m.i, m.j, 1)));
    if pts.is_empty() {
        pts.push((1, 0, 1));
    }
    let reach = pts.iter().map(|p| p.2).max().unwrap() + margin;
    let mut imin = pts.iter().map(|p| p.0).min().unwrap() - reach;
    let mut imax = pts.iter().map(|p| p.0).max().unwrap() + reach;
    let mut jmin = pts.iter().map(|p| p.1).min().unwrap() - reach;
    let mut jmax = pts.iter().map(|p| p.1).max().unwrap() + reach;
    if let Some(r) = kind.rank() {
        imin = 1;
        imax = r;
    }
    match kind {
        SurfaceKind::RightHalf { .. } => jmin = 1,
        SurfaceKind::LeftHalf { l, .. } => jmax = l,
        SurfaceKind::Restricted { l, .. } => {
            jmin = 1;
            jmax = l;
        }
        _ => {}
    }
    if imin > imax || jmin > jmax {
        return Err(Error::Usage(format!("no legal sites for {kind:?}")));
    }
    Ok(Window::new(imin, imax, jmin, jmax))
}

fn check_window(w: Window, max_window: usize) -> Result<()> {
    if w.width() > max_window || w.height() > max_window {
        return Err(Error::TooLarge(format!(
            "window {}x{} exceeds the cap {max_window}",
            w.height(),
            w.width()
        )));
    }
    Ok(())
}

fn grid_window(imin: i64, jmin: i64, rows: usize, cols: usize) -> Result<Window> {
    if rows == 0 || cols == 0 {
        return Err(Error::Usage("explicit grid is empty".into()));
    }
    Ok(Window::new(imin, imin + rows as i64 - 1, jmin, jmin + cols as i64 - 1))
}

fn rectangular<T>(rows: &[Vec<T>]) -> Result<usize> {
    let cols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Usage("explicit grid rows differ in length".into()));
    }
    Ok(cols)
}

/// Integer, bare variable name, or canonical polynomial text.
fn parse_value(text: &str, table: &mut VarTable) -> Result<LaurentPoly> {
    let t = text.trim();
    if let Ok(c) = t.parse::<i64>() {
        return Ok(LaurentPoly::constant(c));
    }
    if !t.is_empty() && !t.starts_with('+') && !t.starts_with('-') && !t.contains('·') && !t.contains(' ') {
        return Ok(table.var_named(t));
    }
    Ok(LaurentPoly::parse_canonical(t, table)?)
}

/// Builds the surface and data. With `carry_data` the mutations transform
/// the data; otherwise they only move the surface and the data spec gives
/// the values on the final surface.
fn build(st: &Settings, margin: i64, carry_data: bool) -> Result<Setup> {
    let kind = kind_of(st);
    let mut table = VarTable::new();
    let explicit_window = match (&st.cfg.surface, &st.cfg.data) {
        (Some(SurfaceSpec::Heights { imin, jmin, rows }), _) => Some(grid_window(*imin, *jmin, rows.len(), rectangular(rows)?)?),
        (_, Some(DataSpec::Values { imin, jmin, rows })) => Some(grid_window(*imin, *jmin, rows.len(), rectangular(rows)?)?),
        _ => st.cfg.window,
    };
    let window = match explicit_window {
        Some(w) => w,
        None => derived_window(st, margin)?,
    };
    check_window(window, st.max_window)?;
    let mut surface = match &st.cfg.surface {
        None => SteppedSurface::flat(kind, window, 0)?,
        Some(SurfaceSpec::Flat { offset }) => {
            if offset % 2 != 0 {
                return Err(Error::Usage("flat offset must be even".into()));
            }
            SteppedSurface::flat(kind, window, *offset)?
        }
        Some(SurfaceSpec::Heights { imin, jmin, rows }) => {
            SteppedSurface::new(kind, window, |i, j| rows[(i - imin) as usize][(j - jmin) as usize])?
        }
    };
    let mut data = match st.cfg.data.clone().unwrap_or(DataSpec::Symbolic) {
        DataSpec::Symbolic => Data::Symbolic(generic_data(window, &mut table)),
        DataSpec::Values { imin, jmin, rows } => {
            if grid_window(imin, jmin, rows.len(), rectangular(&rows)?)? != window {
                return Err(Error::Usage("explicit values must cover the surface window exactly".into()));
            }
            let grid = Grid::try_from_fn(window, |i, j| parse_value(&rows[(i - imin) as usize][(j - jmin) as usize], &mut table))?;
            Data::Symbolic(grid)
        }
        DataSpec::Family { symmetric, regularized } => {
            let sym = build_symmetric_data(symmetric, window, regularized, &mut table)?;
            if regularized {
                Data::Regularized(sym)
            } else {
                Data::Symbolic(sym.data)
            }
        }
        DataSpec::Rational { seed } => Data::Rational(rational_data(window, seed.unwrap_or(st.seed))),
    };
    for m in &st.cfg.mutations {
        if !carry_data {
            let mut heights_only = Grid::from_fn(window, |_, _| BigRational::from_integer(1.into()));
            surface.mutate(&mut heights_only, m.i, m.j, m.direction)?;
            continue;
        }
        match &mut data {
            Data::Symbolic(d) => surface.mutate(d, m.i, m.j, m.direction)?,
            Data::Regularized(s) => surface.mutate(&mut s.data, m.i, m.j, m.direction)?,
            Data::Rational(d) => surface.mutate(d, m.i, m.j, m.direction)?,
        }
    }
    Ok(Setup { surface, data, table })
}

/// Runs `f` on a setup, enlarging a derived window once if it was too small.
fn with_setup<T>(st: &Settings, carry_data: bool, mut f: impl FnMut(&mut Setup) -> Result<T>) -> Result<T> {
    let margin = 2;
    let first = build(st, margin, carry_data).and_then(|mut s| f(&mut s));
    let derived = st.cfg.window.is_none()
        && !matches!(st.cfg.surface, Some(SurfaceSpec::Heights { .. }))
        && !matches!(st.cfg.data, Some(DataSpec::Values { .. }));
    match first {
        Err(Error::OutOfWindow { .. }) if derived => build(st, 2 * margin + 4, carry_data).and_then(|mut s| f(&mut s)),
        other => other,
    }
}

// ---------------------------------------------------------------------------
// commands

#[derive(Serialize)]
struct Record {
    query: [i64; 3],
    method: String,
    polynomial: Option<String>,
    stats: SolveStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn methods_for(st: &Settings, surface: &SteppedSurface, p: Point, oracle_only: bool) -> Result<Vec<Method>> {
    if oracle_only {
        return Ok(vec![Method::Oracle]);
    }
    match st.method.as_deref() {
        None | Some("all") => Ok(applicable_methods(surface, p)),
        Some(name) => Ok(vec![name.parse()?]),
    }
}

fn cmd_solve(st: &Settings, oracle_only: bool) -> Result<Output> {
    with_setup(st, false, |setup| {
        let mut records = Vec::new();
        let mut disagree = false;
        for q in &st.cfg.queries {
            let p = Point::new(q[0], q[1], q[2]);
            let methods = methods_for(st, &setup.surface, p, oracle_only)?;
            let mut first: Option<String> = None;
            for m in methods {
                let (poly, stats) = solve_one(st, setup, m, p)?;
                if let Some(f) = &first {
                    disagree |= *f != poly;
                } else {
                    first = Some(poly.clone());
                }
                records.push(Record {
                    query: *q,
                    method: m.name().into(),
                    polynomial: Some(poly),
                    stats,
                    error: None,
                });
            }
        }
        let mut text = String::new();
        for rec in &records {
            match st.format {
                Format::Text => text.push_str(&format!(
                    "T({},{},{}) [{}] = {}\n",
                    rec.query[0],
                    rec.query[1],
                    rec.query[2],
                    rec.method,
                    rec.polynomial.as_deref().unwrap_or("")
                )),
                Format::Structured => {
                    text.push_str(&serde_json::to_string(rec).expect("record serializes"));
                    text.push('\n');
                }
            }
        }
        if disagree && st.format == Format::Text {
            text.push_str("methods disagree\n");
        }
        Ok(Output {
            text,
            code: if disagree { EXIT_FAILURE } else { EXIT_OK },
        })
    })
}

fn solve_one(st: &Settings, setup: &mut Setup, m: Method, p: Point) -> Result<(String, SolveStats)> {
    match &setup.data {
        Data::Symbolic(d) => {
            let res = solve_capped(m, &setup.surface, d, p, st.max_terms)?;
            Ok((res.value.canonical_text(&setup.table), res.stats))
        }
        Data::Regularized(sym) => {
            let (lim, res) = solve_regularized(m, &setup.surface, sym, p)?;
            match lim {
                Limit::Value(v) => Ok((v.canonical_text(&setup.table), res.stats)),
                Limit::Singular(mono) => Err(Error::NeedsRegularization(format!("no limit at {p}: {mono} survives"))),
            }
        }
        Data::Rational(d) => {
            if m != Method::Oracle {
                return Err(Error::Usage("rational data supports the oracle method only".into()));
            }
            let mut o = Oracle::new(&setup.surface, d).with_max_terms(st.max_terms);
            let v = o.value(p.i, p.j, p.k)?;
            let stats = SolveStats {
                divisions: o.divisions(),
                terms: 1,
                ..SolveStats::default()
            };
            Ok((v.to_string(), stats))
        }
    }
}

fn cmd_decompose(st: &Settings) -> Result<Output> {
    let [j0, j1] = st.cfg.slice.expect("slice set by the caller");
    with_setup(st, false, |setup| {
        let d = match &setup.data {
            Data::Symbolic(d) => d,
            Data::Regularized(s) => &s.data,
            Data::Rational(_) => return Err(Error::Usage("decompose needs polynomial data".into())),
        };
        let word = uv_decompose(&setup.surface, d, j0, j1)?;
        let matrix = network_matrix(&setup.surface, d, j0, j1)?;
        let word_text = word.to_text(&setup.table);
        let rows: Vec<Vec<String>> = (0..matrix.rows())
            .map(|i| (0..matrix.cols()).map(|j| matrix.get(i, j).canonical_text(&setup.table)).collect())
            .collect();
        // the printed word must reproduce the printed matrix
        let mut check_table = setup.table.clone();
        let reparsed = ChipWord::parse(&word_text, &mut check_table)?.product(matrix.rows())?;
        if reparsed != matrix {
            return Err(Error::InvariantViolation("chip word text does not reproduce the network matrix".into()));
        }
        let text = match st.format {
            Format::Text => {
                let mut t = format!("slice {j0}..{j1}, size {}\nword {}\n", matrix.rows(), word_text);
                for row in &rows {
                    t.push_str(&format!("[{}]\n", row.join(", ")));
                }
                t
            }
            Format::Structured => {
                let rec = json!({"slice": [j0, j1], "size": matrix.rows(), "word": word_text, "matrix": rows});
                format!("{rec}\n")
            }
        };
        Ok(Output { text, code: EXIT_OK })
    })
}

fn cmd_mutate(st: &Settings) -> Result<Output> {
    with_setup(st, true, |setup| {
        let w = setup.surface.window();
        let value = |i: i64, j: i64| -> String {
            match &setup.data {
                Data::Symbolic(d) => d.get(i, j).unwrap().canonical_text(&setup.table),
                Data::Regularized(s) => s.data.get(i, j).unwrap().canonical_text(&setup.table),
                Data::Rational(d) => d.get(i, j).unwrap().to_string(),
            }
        };
        let heights: Vec<Vec<i64>> = (w.imin..=w.imax)
            .map(|i| (w.jmin..=w.jmax).map(|j| setup.surface.height(i, j).unwrap()).collect())
            .collect();
        let mut values = BTreeMap::new();
        for (i, j) in w.sites() {
            values.insert(format!("{i},{j}"), value(i, j));
        }
        let text = match st.format {
            Format::Text => {
                let mut t = format!("window {},{},{},{}\n", w.imin, w.imax, w.jmin, w.jmax);
                for (i, row) in (w.imin..).zip(&heights) {
                    let cells: Vec<String> = row.iter().map(|h| format!("{h:3}")).collect();
                    t.push_str(&format!("k[{i:3}] {}\n", cells.join("")));
                }
                for (i, j) in w.sites() {
                    t.push_str(&format!("x({i},{j}) = {}\n", value(i, j)));
                }
                t
            }
            Format::Structured => {
                let rec = json!({
                    "window": w,
                    "surface": {"type": "heights", "imin": w.imin, "jmin": w.jmin, "rows": heights},
                    "values": values,
                });
                format!("{rec}\n")
            }
        };
        Ok(Output { text, code: EXIT_OK })
    })
}

fn cmd_verify(st: &Settings, spec: &VerifySpec) -> Result<Output> {
    let suites: Vec<String> = if spec.suites.is_empty() {
        SUITES.iter().map(|s| s.to_string()).collect()
    } else {
        spec.suites.clone()
    };
    let params = SuiteParams {
        r: spec.r,
        l: spec.l,
        kmax: spec.kmax,
        seed: st.seed,
        max_terms: st.max_terms,
    };
    let mut text = String::new();
    let mut ok = true;
    for name in &suites {
        let rep = run_suite(name, &params)?;
        ok &= rep.passed();
        match st.format {
            Format::Text => text.push_str(&rep.to_text()),
            Format::Structured => {
                text.push_str(&serde_json::to_string(&rep).expect("report serializes"));
                text.push('\n');
            }
        }
    }
    Ok(Output {
        text,
        code: if ok { EXIT_OK } else { EXIT_FAILURE },
    })
}
