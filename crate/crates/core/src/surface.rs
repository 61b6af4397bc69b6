//! Stepped surfaces, initial data on them, mutations, projections, shadows,
//! and the symmetric data families used for the restricted system.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, VarTable};
use crate::scalar::Scalar;

/// Boundary conditions of the system a surface lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurfaceKind {
    /// The unrestricted lattice.
    Ainf,
    /// Rows `1..=r`; rows `0` and `r+1` hold the constant 1.
    Ar { r: i64 },
    /// Rows `1..=r`, columns `j >= 1`; column 0 holds 1.
    RightHalf { r: i64 },
    /// Rows `1..=r`, columns `j <= l`; column `l+1` holds 1.
    LeftHalf { r: i64, l: i64 },
    /// Rows `1..=r`, columns `1..=l`; columns 0 and `l+1` hold 1.
    Restricted { r: i64, l: i64 },
}

impl SurfaceKind {
    pub fn rank(&self) -> Option<i64> {
        match *self {
            SurfaceKind::Ainf => None,
            SurfaceKind::Ar { r }
            | SurfaceKind::RightHalf { r }
            | SurfaceKind::LeftHalf { r, .. }
            | SurfaceKind::Restricted { r, .. } => Some(r),
        }
    }

    fn col_bounds(&self) -> (Option<i64>, Option<i64>) {
        match *self {
            SurfaceKind::Ainf | SurfaceKind::Ar { .. } => (None, None),
            SurfaceKind::RightHalf { .. } => (Some(1), None),
            SurfaceKind::LeftHalf { l, .. } => (None, Some(l)),
            SurfaceKind::Restricted { l, .. } => (Some(1), Some(l)),
        }
    }

    /// True for the constant-1 rows and columns bordering the legal range.
    pub fn is_boundary(&self, i: i64, j: i64) -> bool {
        if let Some(r) = self.rank() {
            if i == 0 || i == r + 1 {
                return true;
            }
        }
        let (lo, hi) = self.col_bounds();
        lo.map_or(false, |lo| j == lo - 1) || hi.map_or(false, |hi| j == hi + 1)
    }

    /// True for points inside the legal row and column range.
    pub fn is_legal(&self, i: i64, j: i64) -> bool {
        if let Some(r) = self.rank() {
            if i < 1 || i > r {
                return false;
            }
        }
        let (lo, hi) = self.col_bounds();
        lo.map_or(true, |lo| j >= lo) && hi.map_or(true, |hi| j <= hi)
    }

    pub fn has_column_walls(&self) -> bool {
        !matches!(self, SurfaceKind::Ainf | SurfaceKind::Ar { .. })
    }
}

/// Finite rectangle of lattice sites, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub imin: i64,
    pub imax: i64,
    pub jmin: i64,
    pub jmax: i64,
}

impl Window {
    pub fn new(imin: i64, imax: i64, jmin: i64, jmax: i64) -> Self {
        assert!(imin <= imax && jmin <= jmax, "empty window");
        Window {
            imin,
            imax,
            jmin,
            jmax,
        }
    }

    pub fn contains(&self, i: i64, j: i64) -> bool {
        i >= self.imin && i <= self.imax && j >= self.jmin && j <= self.jmax
    }

    pub fn width(&self) -> usize {
        (self.jmax - self.jmin + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.imax - self.imin + 1) as usize
    }

    pub fn size(&self) -> usize {
        self.width() * self.height()
    }

    fn index(&self, i: i64, j: i64) -> usize {
        (i - self.imin) as usize * self.width() + (j - self.jmin) as usize
    }

    /// Sites in row-major order.
    pub fn sites(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (self.imin..=self.imax).flat_map(move |i| (self.jmin..=self.jmax).map(move |j| (i, j)))
    }
}

/// A value for each site of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<V> {
    window: Window,
    values: Vec<V>,
}

pub type InitialData<V = LaurentPoly> = Grid<V>;

impl<V: Clone> Grid<V> {
    pub fn from_fn(window: Window, mut f: impl FnMut(i64, i64) -> V) -> Self {
        let values = window.sites().map(|(i, j)| f(i, j)).collect();
        Grid { window, values }
    }

    pub fn try_from_fn<E>(window: Window, mut f: impl FnMut(i64, i64) -> std::result::Result<V, E>) -> std::result::Result<Self, E> {
        let values = window
            .sites()
            .map(|(i, j)| f(i, j))
            .collect::<std::result::Result<Vec<_>, E>>()?;
        Ok(Grid { window, values })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn get(&self, i: i64, j: i64) -> Option<&V> {
        self.window
            .contains(i, j)
            .then(|| &self.values[self.window.index(i, j)])
    }

    pub fn set(&mut self, i: i64, j: i64, v: V) {
        assert!(self.window.contains(i, j), "site outside window");
        let idx = self.window.index(i, j);
        self.values[idx] = v;
    }

    pub fn map<W: Clone>(&self, f: impl Fn(&V) -> W) -> Grid<W> {
        Grid {
            window: self.window,
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = ((i64, i64), &V)> + '_ {
        self.window.sites().zip(self.values.iter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Raise a local minimum by 2.
    Forward,
    /// Lower a local maximum by 2.
    Backward,
}

/// Height function `k(i,j)` on a window, with `i+j+k` even and unit steps
/// between neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct SteppedSurface {
    kind: SurfaceKind,
    heights: Grid<i64>,
}

const NEIGHBOURS: [(i64, i64); 4] = [(0, -1), (0, 1), (-1, 0), (1, 0)];

impl SteppedSurface {
    pub fn new(kind: SurfaceKind, window: Window, height: impl FnMut(i64, i64) -> i64) -> Result<Self> {
        let s = SteppedSurface {
            kind,
            heights: Grid::from_fn(window, height),
        };
        s.validate()?;
        Ok(s)
    }

    /// `k(i,j) = ((i+j) mod 2) + offset` with `offset` even.
    pub fn flat(kind: SurfaceKind, window: Window, offset: i64) -> Result<Self> {
        if offset.rem_euclid(2) != 0 {
            return Err(Error::InvalidSurface(format!("flat offset {offset} is odd")));
        }
        SteppedSurface::new(kind, window, |i, j| (i + j).rem_euclid(2) + offset)
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn window(&self) -> Window {
        self.heights.window()
    }

    pub fn heights(&self) -> &Grid<i64> {
        &self.heights
    }

    pub fn height(&self, i: i64, j: i64) -> Option<i64> {
        self.heights.get(i, j).copied()
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.window();
        for (i, j) in w.sites() {
            if !self.kind.is_legal(i, j) {
                return Err(Error::InvalidSurface(format!(
                    "site ({i},{j}) is outside the legal range of {:?}",
                    self.kind
                )));
            }
            let k = self.height(i, j).unwrap();
            if (i + j + k).rem_euclid(2) != 0 {
                return Err(Error::InvalidSurface(format!("parity fails at ({i},{j},{k})")));
            }
            for (di, dj) in [(0, 1), (1, 0)] {
                if let Some(k2) = self.height(i + di, j + dj) {
                    if (k2 - k).abs() != 1 {
                        return Err(Error::InvalidSurface(format!(
                            "heights at ({i},{j}) and ({},{}) differ by {}",
                            i + di,
                            j + dj,
                            k2 - k
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The offset if the surface is flat.
    pub fn flat_offset(&self) -> Option<i64> {
        let w = self.window();
        let off = self.height(w.imin, w.jmin)? - (w.imin + w.jmin).rem_euclid(2);
        self.heights
            .iter()
            .all(|((i, j), &k)| k == (i + j).rem_euclid(2) + off)
            .then_some(off)
    }

    /// The surface with every height negated.
    pub fn reflected(&self) -> SteppedSurface {
        SteppedSurface {
            kind: self.kind,
            heights: self.heights.map(|k| -k),
        }
    }

    /// Value at a site: boundary constants are 1, otherwise read from data.
    pub fn value<V: Scalar>(&self, data: &Grid<V>, i: i64, j: i64) -> Result<V> {
        if self.kind.is_boundary(i, j) {
            return Ok(V::one());
        }
        data.get(i, j).cloned().ok_or(Error::OutOfWindow { i, j })
    }

    /// Applies one mutation at `(i,j)`, updating heights and data.
    pub fn mutate<V: Scalar>(&mut self, data: &mut Grid<V>, i: i64, j: i64, dir: Direction) -> Result<()> {
        let k0 = self.height(i, j).ok_or(Error::OutOfWindow { i, j })?;
        let target = match dir {
            Direction::Forward => k0 + 1,
            Direction::Backward => k0 - 1,
        };
        let mut nb_vals = Vec::with_capacity(4);
        for (di, dj) in NEIGHBOURS {
            let (x, y) = (i + di, j + dj);
            if self.kind.is_boundary(x, y) {
                nb_vals.push(V::one());
                continue;
            }
            let h = self.height(x, y).ok_or(Error::OutOfWindow { i: x, j: y })?;
            if h != target {
                return Err(Error::NotMutable {
                    i,
                    j,
                    reason: format!("neighbour ({x},{y}) has height {h}, expected {target}"),
                });
            }
            nb_vals.push(data.get(x, y).cloned().ok_or(Error::OutOfWindow { i: x, j: y })?);
        }
        let old = data.get(i, j).cloned().ok_or(Error::OutOfWindow { i, j })?;
        let num = nb_vals[0]
            .mul(&nb_vals[1])?
            .add(&nb_vals[2].mul(&nb_vals[3])?)?;
        let new = num.div_exact(&old).map_err(|e| match e {
            crate::laurent::LaurentError::DivideByZero => {
                Error::NeedsRegularization(format!("zero value at ({i},{j})"))
            }
            e => Error::LaurentViolation(e.to_string()),
        })?;
        data.set(i, j, new);
        self.heights.set(i, j, 2 * target - k0);
        Ok(())
    }

    /// `(j0, j1)` for the point `(1, j, k)`: the outermost row-1 sites whose
    /// heights lie on the two light rays through the point.
    pub fn projection(&self, j: i64, k: i64) -> Result<(i64, i64)> {
        let h = self.height(1, j).ok_or(Error::OutOfWindow { i: 1, j })?;
        if k < h {
            return Err(Error::BelowSurface { i: 1, j, k });
        }
        if (1 + j + k).rem_euclid(2) != 0 {
            return Err(Error::Usage(format!("point (1,{j},{k}) has odd parity")));
        }
        // k_{1,j'} - j' is non-increasing and k_{1,j'} + j' non-decreasing in j',
        // so the first hit scanning outward from j is the extreme one.
        let mut j0 = j;
        while self.height(1, j0).ok_or(Error::OutOfWindow { i: 1, j: j0 })? - j0 != k - j {
            j0 -= 1;
        }
        let mut j1 = j;
        while self.height(1, j1).ok_or(Error::OutOfWindow { i: 1, j: j1 })? + j1 != k + j {
            j1 += 1;
        }
        Ok((j0, j1))
    }

    /// Shadow of `(i,j,k)`: the initial-data sites its value depends on,
    /// with the corner sites entering the minor formula. These are the sites
    /// strictly inside the cone `|x-i| + |y-j| < k - k_{x,y}` together with
    /// their neighbours.
    pub fn shadow(&self, i: i64, j: i64, k: i64) -> Result<ShadowDomain> {
        self.cone_domain(i, j, k, false)
    }

    /// All sites with `|x-i| + |y-j| <= k - k_{x,y}` connected to the apex,
    /// with corners read off the same way as for the shadow.
    pub fn cone_section(&self, i: i64, j: i64, k: i64) -> Result<ShadowDomain> {
        self.cone_domain(i, j, k, true)
    }

    fn cone_domain(&self, i: i64, j: i64, k: i64, closed: bool) -> Result<ShadowDomain> {
        let h = self.height(i, j).ok_or(Error::OutOfWindow { i, j })?;
        if k < h {
            return Err(Error::BelowSurface { i, j, k });
        }
        if (i + j + k).rem_euclid(2) != 0 {
            return Err(Error::Usage(format!("point ({i},{j},{k}) has odd parity")));
        }
        let g = |x: i64, y: i64| -> Option<i64> {
            self.height(x, y).map(|kx| k - kx - (x - i).abs() - (y - j).abs())
        };
        let mut interior = BTreeSet::new();
        let mut points = BTreeSet::new();
        points.insert((i, j));
        let (mut low_wall, mut high_wall) = (false, false);
        if k > h {
            let mut queue = VecDeque::new();
            interior.insert((i, j));
            queue.push_back((i, j));
            while let Some((x, y)) = queue.pop_front() {
                for (dx, dy) in NEIGHBOURS {
                    let (u, v) = (x + dx, y + dy);
                    if self.kind.is_boundary(u, v) {
                        if self.kind.has_column_walls() && !self.kind.rank().map_or(false, |r| u == 0 || u == r + 1) {
                            return Err(Error::NotApplicable {
                                method: "shadow".into(),
                                reason: format!("shadow of ({i},{j},{k}) reaches the column wall"),
                            });
                        }
                        if u == 0 {
                            low_wall = true;
                        } else {
                            high_wall = true;
                        }
                        continue;
                    }
                    let gu = g(u, v).ok_or(Error::OutOfWindow { i: u, j: v })?;
                    if closed {
                        if gu >= 0 && points.insert((u, v)) {
                            if gu > 0 {
                                interior.insert((u, v));
                            }
                            queue.push_back((u, v));
                        }
                    } else {
                        points.insert((u, v));
                        if gu > 0 && interior.insert((u, v)) {
                            queue.push_back((u, v));
                        }
                    }
                }
            }
        }
        let mut rows: BTreeMap<i64, (i64, i64)> = BTreeMap::new();
        for &(x, y) in &points {
            let e = rows.entry(x).or_insert((y, y));
            e.0 = e.0.min(y);
            e.1 = e.1.max(y);
        }
        let bottom = if low_wall { 0 } else { *rows.keys().next().unwrap() };
        let top = if high_wall {
            self.kind.rank().unwrap() + 1
        } else {
            *rows.keys().next_back().unwrap()
        };
        let kappa = (i - bottom + 1) as usize;
        let mut left = Vec::with_capacity(kappa - 1);
        let mut right = Vec::with_capacity(kappa);
        for a in 0..kappa as i64 {
            let x = bottom + a;
            let (lo, hi) = rows.get(&x).copied().unwrap_or((j, j));
            if x < i {
                left.push((x, lo));
            }
            right.push((x, hi));
        }
        Ok(ShadowDomain {
            apex: (i, j, k),
            points,
            interior,
            bottom,
            top,
            left_corners: left,
            right_corners: right,
        })
    }

    /// The shadow of `(i,j,k)` completed by the faces of its cone down to a
    /// flat surface below it. Outside the shadow the completion follows the
    /// cone faces, and below them the flat surface.
    pub fn completion(&self, i: i64, j: i64, k: i64) -> Result<SteppedSurface> {
        if !matches!(self.kind, SurfaceKind::Ainf | SurfaceKind::Ar { .. }) {
            return Err(Error::NotApplicable {
                method: "completion".into(),
                reason: "needs an A_inf or A_r surface".into(),
            });
        }
        let dom = self.shadow(i, j, k)?;
        let low = dom
            .points
            .iter()
            .filter_map(|&(x, y)| self.height(x, y))
            .min()
            .unwrap();
        let base = if (low - 1).rem_euclid(2) == 0 { low - 1 } else { low - 2 };
        let radius = k - base;
        let w = self.window();
        let (rlo, rhi) = match self.kind.rank() {
            Some(r) => ((i - radius).max(1), (i + radius).min(r)),
            None => (i - radius, i + radius),
        };
        if rlo < w.imin || rhi > w.imax || j - radius < w.jmin || j + radius > w.jmax {
            return Err(Error::OutOfWindow { i: i - radius, j: j - radius });
        }
        SteppedSurface::new(self.kind, w, |x, y| {
            let face = k - (x - i).abs() - (y - j).abs();
            let flat = base + (x + y).rem_euclid(2);
            self.height(x, y).unwrap().min(face).max(flat)
        })
    }
}

/// Sites a value depends on, plus the corner sites of its minor formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShadowDomain {
    pub apex: (i64, i64, i64),
    /// All sites of the domain (boundary constants excluded).
    pub points: BTreeSet<(i64, i64)>,
    /// Sites strictly inside the light cone.
    pub interior: BTreeSet<(i64, i64)>,
    /// Lowest row; may be the constant row 0.
    pub bottom: i64,
    /// Highest row; may be the constant row `r+1`.
    pub top: i64,
    /// Corner sites `L_1..L_{κ-1}`, bottom to top.
    pub left_corners: Vec<(i64, i64)>,
    /// Corner sites `R_1..R_κ`, bottom to top.
    pub right_corners: Vec<(i64, i64)>,
}

impl ShadowDomain {
    /// Number of right corners, which is also the size of the minor.
    pub fn kappa(&self) -> usize {
        self.right_corners.len()
    }

    pub fn contains(&self, i: i64, j: i64) -> bool {
        self.points.contains(&(i, j))
    }
}

/// Name of the initial-data variable at a site.
pub fn t_name(i: i64, j: i64) -> String {
    format!("t[{i},{j}]")
}

/// Generic initial data: one fresh variable per site, interned row-major.
pub fn generic_data(window: Window, table: &mut VarTable) -> InitialData {
    Grid::from_fn(window, |i, j| table.var_named(&t_name(i, j)))
}

/// The array `a_{i,-j}` for `0 <= i, j <= r+1`, indexed `[i][j]`.
///
/// Rows 0 and `r+1` and column 0 are 1, column 1 is the seed `a_1..a_r`, and
/// the remaining columns follow from
/// `a_{i-1,-j} a_{i+1,-j} + a_{i,-j-1} a_{i,-j+1} = 0`.
pub fn regularized_array(r: usize, seed: &[LaurentPoly]) -> Result<Vec<Vec<LaurentPoly>>> {
    assert_eq!(seed.len(), r, "seed must have r entries");
    let n = r + 2;
    let mut a = vec![vec![LaurentPoly::one(); n]; n];
    for i in 1..=r {
        a[i][1] = seed[i - 1].clone();
    }
    for j in 1..=r {
        for i in 1..=r {
            let num = -(&a[i - 1][j] * &a[i + 1][j]);
            a[i][j + 1] = num.div_exact(&a[i][j - 1])?;
        }
    }
    Ok(a)
}

/// Families of symmetric initial data on the flat surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SymmetricFamily {
    /// Free for `j >= 1`, 1 at `j = 0`, zeros on `-r..=-1`, reflected beyond.
    Plus { r: i64 },
    /// Free for `j <= l`, 1 at `j = l+1`, zeros on `l+2..=l+r+1`, reflected beyond.
    Minus { r: i64, l: i64 },
    /// Both conditions; periodic with period `2(r+l+2)`.
    Periodic { r: i64, l: i64 },
}

/// Data of a symmetric family, with its regularization variables.
#[derive(Debug, Clone)]
pub struct SymmetricData {
    pub data: InitialData,
    /// Variables `a_1..a_r` replacing the zeros left of column 0.
    pub a_vars: Vec<LaurentPoly>,
    /// Variables `b_1..b_r` replacing the zeros right of column `l+1`.
    pub b_vars: Vec<LaurentPoly>,
}

fn sign(r: i64, i: i64) -> i64 {
    if (r * i).rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Builds symmetric data on `window` (rows `1..=r`).
///
/// With `regularized` the zero squares are replaced by the regularized
/// arrays in fresh variables `a[m]` and `b[m]`.
pub fn build_symmetric_data(
    family: SymmetricFamily,
    window: Window,
    regularized: bool,
    table: &mut VarTable,
) -> Result<SymmetricData> {
    let (r, l) = match family {
        SymmetricFamily::Plus { r } => (r, 0),
        SymmetricFamily::Minus { r, l } | SymmetricFamily::Periodic { r, l } => (r, l),
    };
    if window.imin != 1 || window.imax != r {
        return Err(Error::Usage(format!("symmetric data needs rows 1..={r}")));
    }
    let ru = r as usize;
    // free variables first, row-major
    let mut free: BTreeMap<(i64, i64), LaurentPoly> = BTreeMap::new();
    let free_cols: Vec<i64> = match family {
        SymmetricFamily::Periodic { .. } => (1..=l).collect(),
        _ => Vec::new(),
    };
    for i in 1..=r {
        for &j in &free_cols {
            free.insert((i, j), table.var_named(&t_name(i, j)));
        }
    }
    let mut var = |table: &mut VarTable, i: i64, j: i64| -> LaurentPoly {
        free.entry((i, j))
            .or_insert_with(|| table.var_named(&t_name(i, j)))
            .clone()
    };
    // pre-intern the free variables of the window in row-major order
    if !matches!(family, SymmetricFamily::Periodic { .. }) {
        for (i, j) in window.sites() {
            let free_here = match family {
                SymmetricFamily::Plus { .. } => j >= 1,
                SymmetricFamily::Minus { .. } => j <= l,
                SymmetricFamily::Periodic { .. } => false,
            };
            if free_here {
                var(table, i, j);
            }
        }
    }
    let needs_a = !matches!(family, SymmetricFamily::Minus { .. });
    let needs_b = !matches!(family, SymmetricFamily::Plus { .. });
    let (a_vars, a_arr) = if regularized && needs_a {
        let v: Vec<_> = (1..=r).map(|m| table.var_named(&format!("a[{m}]"))).collect();
        let arr = regularized_array(ru, &v)?;
        (v, Some(arr))
    } else {
        (Vec::new(), None)
    };
    let (b_vars, b_arr) = if regularized && needs_b {
        let v: Vec<_> = (1..=r).map(|m| table.var_named(&format!("b[{m}]"))).collect();
        let arr = regularized_array(ru, &v)?;
        (v, Some(arr))
    } else {
        (Vec::new(), None)
    };
    // value at column 0 / l+1 is 1; free sites are variables
    let base_plus = |table: &mut VarTable, var: &mut dyn FnMut(&mut VarTable, i64, i64) -> LaurentPoly, i: i64, j: i64| {
        if j == 0 {
            LaurentPoly::one()
        } else {
            var(table, i, j)
        }
    };
    let zero_left = |i: i64, jp: i64| -> LaurentPoly {
        match &a_arr {
            Some(arr) => arr[i as usize][(-jp) as usize].clone(),
            None => LaurentPoly::zero(),
        }
    };
    let zero_right = |i: i64, jp: i64| -> LaurentPoly {
        match &b_arr {
            Some(arr) => arr[i as usize][(jp - l - 1) as usize].clone(),
            None => LaurentPoly::zero(),
        }
    };
    let mut values = Vec::with_capacity(window.size());
    for (i, j) in window.sites() {
        let v = match family {
            SymmetricFamily::Plus { .. } => {
                if j >= 0 {
                    base_plus(table, &mut var, i, j)
                } else if j >= -r {
                    zero_left(i, j)
                } else {
                    let s = LaurentPoly::constant(sign(r, i));
                    &s * &base_plus(table, &mut var, r + 1 - i, -r - 1 - j)
                }
            }
            SymmetricFamily::Minus { .. } => {
                if j <= l {
                    var(table, i, j)
                } else if j == l + 1 {
                    LaurentPoly::one()
                } else if j <= l + r + 1 {
                    zero_right(i, j)
                } else {
                    let m = j - l - r - 2;
                    let jj = l + 1 - m;
                    let base = if jj == l + 1 { LaurentPoly::one() } else { var(table, r + 1 - i, jj) };
                    &LaurentPoly::constant(sign(r, i)) * &base
                }
            }
            SymmetricFamily::Periodic { .. } => {
                let n = 2 * (r + l + 2);
                let jp = (j + r + 1).rem_euclid(n) - r - 1;
                if jp == 0 || jp == l + 1 {
                    LaurentPoly::one()
                } else if (1..=l).contains(&jp) {
                    var(table, i, jp)
                } else if (-r..=-1).contains(&jp) {
                    zero_left(i, jp)
                } else if jp == -r - 1 {
                    LaurentPoly::constant(sign(r, i))
                } else if (l + 2..=l + r + 1).contains(&jp) {
                    zero_right(i, jp)
                } else {
                    let m = jp - l - r - 2;
                    let jj = l + 1 - m;
                    let base = if jj == l + 1 { LaurentPoly::one() } else { var(table, r + 1 - i, jj) };
                    &LaurentPoly::constant(sign(r, i)) * &base
                }
            }
        };
        values.push(v);
    }
    Ok(SymmetricData {
        data: Grid { window, values },
        a_vars,
        b_vars,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_surface_is_valid_and_flat() {
        let s = SteppedSurface::flat(SurfaceKind::Ar { r: 3 }, Window::new(1, 3, -4, 4), 0).unwrap();
        assert_eq!(s.flat_offset(), Some(0));
        assert_eq!(s.height(1, 0), Some(1));
        assert_eq!(s.height(2, 0), Some(0));
        assert!(SteppedSurface::flat(SurfaceKind::Ainf, Window::new(0, 1, 0, 1), 1).is_err());
    }

    #[test]
    fn invalid_steps_rejected() {
        let err = SteppedSurface::new(SurfaceKind::Ainf, Window::new(0, 0, 0, 1), |_, j| 2 * j);
        assert!(matches!(err, Err(Error::InvalidSurface(_))));
        let err = SteppedSurface::new(SurfaceKind::Ar { r: 2 }, Window::new(0, 2, 0, 1), |i, j| (i + j) % 2);
        assert!(matches!(err, Err(Error::InvalidSurface(_))));
    }

    #[test]
    fn projection_on_flat_surface() {
        let s = SteppedSurface::flat(SurfaceKind::Ar { r: 2 }, Window::new(1, 2, -8, 8), 0).unwrap();
        assert_eq!(s.projection(0, 3).unwrap(), (-2, 2));
        assert_eq!(s.projection(0, 5).unwrap(), (-4, 4));
        assert_eq!(s.projection(1, 0).unwrap(), (1, 1));
    }

    #[test]
    fn flat_shadow_is_a_diamond() {
        let s = SteppedSurface::flat(SurfaceKind::Ainf, Window::new(-6, 6, -6, 6), 0).unwrap();
        let d = s.shadow(0, 0, 4).unwrap();
        assert!(d.points.iter().all(|&(x, y)| x.abs() + y.abs() <= 3));
        assert_eq!(d.points.len(), 25);
        assert_eq!(d.kappa(), 4);
        assert_eq!(d.left_corners, vec![(-3, 0), (-2, -1), (-1, -2)]);
        assert_eq!(d.right_corners, vec![(-3, 0), (-2, 1), (-1, 2), (0, 3)]);
    }

    #[test]
    fn mutation_round_trip() {
        let mut table = VarTable::new();
        let w = Window::new(-2, 2, -2, 2);
        let mut s = SteppedSurface::flat(SurfaceKind::Ainf, w, 0).unwrap();
        let mut d = generic_data(w, &mut table);
        let (s0, d0) = (s.clone(), d.clone());
        s.mutate(&mut d, 0, 0, Direction::Forward).unwrap();
        assert_eq!(s.height(0, 0), Some(2));
        assert!(matches!(
            s.mutate(&mut d, 0, 1, Direction::Forward),
            Err(Error::NotMutable { .. })
        ));
        s.mutate(&mut d, 0, 0, Direction::Backward).unwrap();
        assert_eq!((s, d), (s0, d0));
    }
}
