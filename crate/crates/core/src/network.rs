//! U/V chips, their products along a stepped surface, the signed permutation
//! `P` and sign matrix `S`, regularized networks, and path-graph readings of
//! chip words.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, VarTable};
use crate::matrix::PolyMatrix;
use crate::surface::{regularized_array, Grid, InitialData, ShadowDomain, SteppedSurface, SurfaceKind, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChipKind {
    U,
    V,
}

/// A chip acting on rows `row` and `row+1` (1-based).
///
/// `U(a,b,c) = [[1, 0], [c/b, a/b]]` and `V(a,b,c) = [[b/c, a/c], [0, 1]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chip {
    pub kind: ChipKind,
    pub row: usize,
    pub args: [LaurentPoly; 3],
}

impl Chip {
    pub fn u(row: usize, a: LaurentPoly, b: LaurentPoly, c: LaurentPoly) -> Self {
        Chip {
            kind: ChipKind::U,
            row,
            args: [a, b, c],
        }
    }

    pub fn v(row: usize, a: LaurentPoly, b: LaurentPoly, c: LaurentPoly) -> Self {
        Chip {
            kind: ChipKind::V,
            row,
            args: [a, b, c],
        }
    }

    /// The 2x2 block. The divisor (`b` for U, `c` for V) must be a unit.
    pub fn block(&self) -> Result<[[LaurentPoly; 2]; 2]> {
        let [a, b, c] = &self.args;
        let div = match self.kind {
            ChipKind::U => b,
            ChipKind::V => c,
        };
        let inv = div
            .inverse()
            .map_err(|_| Error::NotUnit(format!("{:?}{} divisor {}", self.kind, self.row, div)))?;
        Ok(match self.kind {
            ChipKind::U => [
                [LaurentPoly::one(), LaurentPoly::zero()],
                [c * &inv, a * &inv],
            ],
            ChipKind::V => [[b * &inv, a * &inv], [LaurentPoly::zero(), LaurentPoly::one()]],
        })
    }

    /// The chip as an `n x n` matrix.
    pub fn matrix(&self, n: usize) -> Result<PolyMatrix> {
        if self.row == 0 || self.row + 1 > n {
            return Err(Error::Usage(format!("chip on row {} does not fit size {n}", self.row)));
        }
        let blk = self.block()?;
        let mut m = PolyMatrix::identity(n);
        let i = self.row - 1;
        for a in 0..2 {
            for b in 0..2 {
                m.set(i + a, i + b, blk[a][b].clone());
            }
        }
        Ok(m)
    }

    fn render(&self, table: &VarTable) -> String {
        let args: Vec<String> = self
            .args
            .iter()
            .map(|a| a.canonical_text(table).replace(' ', ""))
            .collect();
        let k = match self.kind {
            ChipKind::U => 'U',
            ChipKind::V => 'V',
        };
        format!("{k}{}({})", self.row, args.join(";"))
    }
}

/// An ordered product of chips, leftmost first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChipWord {
    pub chips: Vec<Chip>,
}

impl ChipWord {
    pub fn new(chips: Vec<Chip>) -> Self {
        ChipWord { chips }
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    /// The product of the chips as an `n x n` matrix.
    pub fn product(&self, n: usize) -> Result<PolyMatrix> {
        let mut m = PolyMatrix::identity(n);
        for c in &self.chips {
            m = multiply_chip(&m, c, n)?;
        }
        Ok(m)
    }

    /// Whitespace-separated `U{i}(a;b;c)` tokens.
    pub fn to_text(&self, table: &VarTable) -> String {
        self.chips
            .iter()
            .map(|c| c.render(table))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse(text: &str, table: &mut VarTable) -> Result<ChipWord> {
        let mut chips = Vec::new();
        for token in text.split_whitespace() {
            let bad = || Error::Usage(format!("malformed chip token {token}"));
            let kind = match token.chars().next() {
                Some('U') => ChipKind::U,
                Some('V') => ChipKind::V,
                _ => return Err(bad()),
            };
            let open = token.find('(').ok_or_else(bad)?;
            if !token.ends_with(')') {
                return Err(bad());
            }
            let row: usize = token[1..open].parse().map_err(|_| bad())?;
            let inner = &token[open + 1..token.len() - 1];
            let parts: Vec<&str> = inner.split(';').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let mut args = Vec::with_capacity(3);
            for p in parts {
                args.push(LaurentPoly::parse_canonical(p, table)?);
            }
            let args: [LaurentPoly; 3] = args.try_into().unwrap();
            chips.push(Chip { kind, row, args });
        }
        Ok(ChipWord { chips })
    }
}

/// `m * chip`, touching only the two affected columns.
fn multiply_chip(m: &PolyMatrix, chip: &Chip, n: usize) -> Result<PolyMatrix> {
    if chip.row == 0 || chip.row + 1 > n {
        return Err(Error::Usage(format!("chip on row {} does not fit size {n}", chip.row)));
    }
    let blk = chip.block()?;
    let i = chip.row - 1;
    let mut out = m.clone();
    for r in 0..n {
        let x = m.get(r, i);
        let y = m.get(r, i + 1);
        let c0 = x.try_mul(&blk[0][0])?.try_add(&y.try_mul(&blk[1][0])?)?;
        let c1 = x.try_mul(&blk[0][1])?.try_add(&y.try_mul(&blk[1][1])?)?;
        out.set(r, i, c0);
        out.set(r, i + 1, c1);
    }
    Ok(out)
}

/// True when the square with upper-right corner `(x,y)` (rows `x-1, x`,
/// columns `y-1, y`) has `(x-1,y-1)-(x,y)` as its only equal-height diagonal.
/// Otherwise the lozenges use the other diagonal, which is also the
/// convention when both diagonals qualify.
fn rising_diagonal(surface: &SteppedSurface, x: i64, y: i64) -> bool {
    let h = |i: i64, j: i64| surface.height(i, j);
    match (h(x, y), h(x - 1, y - 1), h(x - 1, y), h(x, y - 1)) {
        (Some(a), Some(b), Some(c), Some(d)) => a == b && c != d,
        _ => false,
    }
}

/// Chip for the horizontal edge `(x,y-1)-(x,y)`, on matrix row `x - offset`.
/// The third vertex of the chip's triangle is fixed by the diagonal of the
/// adjacent square.
fn edge_chip(surface: &SteppedSurface, data: &InitialData, x: i64, y: i64, offset: i64) -> Result<Chip> {
    let k_left = surface.height(x, y - 1).ok_or(Error::OutOfWindow { i: x, j: y - 1 })?;
    let k_here = surface.height(x, y).ok_or(Error::OutOfWindow { i: x, j: y })?;
    let t = |i: i64, j: i64| surface.value(data, i, j);
    let row = (x - offset) as usize;
    if k_left == k_here - 1 {
        let c = if rising_diagonal(surface, x + 1, y) { t(x + 1, y)? } else { t(x + 1, y - 1)? };
        Ok(Chip::u(row, t(x, y - 1)?, t(x, y)?, c))
    } else {
        let a = if rising_diagonal(surface, x, y) { t(x - 1, y - 1)? } else { t(x - 1, y)? };
        Ok(Chip::v(row, a, t(x, y - 1)?, t(x, y)?))
    }
}

/// Chips of one column, stacked by rows in increasing order. A chip goes in
/// front of the partial column product when the square below it uses the
/// rising diagonal, behind it otherwise.
fn column_word(surface: &SteppedSurface, data: &InitialData, y: i64, rows: &[i64], offset: i64) -> Result<Vec<Chip>> {
    let mut col: VecDeque<Chip> = VecDeque::new();
    for &x in rows {
        let chip = edge_chip(surface, data, x, y, offset)?;
        if rising_diagonal(surface, x, y) {
            col.push_front(chip);
        } else {
            col.push_back(chip);
        }
    }
    Ok(col.into_iter().collect())
}

/// Chip word of the network between columns `j0` and `j1` on an `A_r`
/// surface (rows `0` and `r+1` read as 1).
pub fn uv_decompose(surface: &SteppedSurface, data: &InitialData, j0: i64, j1: i64) -> Result<ChipWord> {
    let r = surface
        .kind()
        .rank()
        .ok_or_else(|| Error::Usage("network needs a finite rank".into()))?;
    let rows: Vec<i64> = (1..=r).collect();
    let mut chips = Vec::new();
    for y in (j0 + 1)..=j1 {
        chips.extend(column_word(surface, data, y, &rows, 0)?);
    }
    Ok(ChipWord { chips })
}

/// `N(j0, j1)` as an `(r+1) x (r+1)` matrix.
pub fn network_matrix(surface: &SteppedSurface, data: &InitialData, j0: i64, j1: i64) -> Result<PolyMatrix> {
    let r = surface
        .kind()
        .rank()
        .ok_or_else(|| Error::Usage("network needs a finite rank".into()))?;
    uv_decompose(surface, data, j0, j1)?.product((r + 1) as usize)
}

/// Chip word of a shadow domain, with the matrix size it acts on.
///
/// Chips come from every horizontal edge inside the domain. Matrix row 1 is
/// a padding row below the bottom, so the chip of lattice row `x` acts on
/// matrix rows `x - bottom + 1` and `x - bottom + 2`.
pub fn domain_network(surface: &SteppedSurface, data: &InitialData, dom: &ShadowDomain) -> Result<(ChipWord, usize)> {
    let mut cols: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for &(x, y) in &dom.points {
        if dom.contains(x, y - 1) {
            cols.entry(y).or_default().push(x);
        }
    }
    let mut chips = Vec::new();
    for (y, mut rows) in cols {
        rows.sort_unstable();
        chips.extend(column_word(surface, data, y, &rows, dom.bottom - 1)?);
    }
    let size = (dom.top - dom.bottom + 2) as usize;
    Ok((ChipWord { chips }, size))
}

/// `P = [(-1)^{(r-1)(i-1)} δ_{i+j, r+2}]`, size `r+1`.
pub fn p_matrix(r: usize) -> PolyMatrix {
    let n = r + 1;
    let mut m = PolyMatrix::zeros(n, n);
    for i in 1..=n {
        let j = r + 2 - i;
        let s = if ((r - 1) * (i - 1)) % 2 == 0 { 1 } else { -1 };
        m.set(i - 1, j - 1, LaurentPoly::constant(s));
    }
    m
}

/// `S = diag((-1)^{i-1})`, size `r+1`.
pub fn s_matrix(r: usize) -> PolyMatrix {
    let n = r + 1;
    let mut m = PolyMatrix::zeros(n, n);
    for i in 0..n {
        m.set(i, i, LaurentPoly::constant(if i % 2 == 0 { 1 } else { -1 }));
    }
    m
}

/// `P_j({a})`: the flat network over columns `-j+1..=0` with data given by
/// the regularized array in the variables `a`.
pub fn regularized_p(r: usize, j: usize, a: &[LaurentPoly]) -> Result<PolyMatrix> {
    let arr = regularized_array(r, a)?;
    let ri = r as i64;
    let window = Window::new(1, ri, -ri - 1, 0);
    let surface = SteppedSurface::flat(SurfaceKind::Ar { r: ri }, window, 0)?;
    let data: InitialData = Grid::from_fn(window, |i, y| arr[i as usize][(-y) as usize].clone());
    network_matrix(&surface, &data, -(j as i64), 0)
}

/// `P̃_j({b})`: the flat network over columns `l+2..=l+1+j`. The array is
/// the regularized array read from column `l+1` rightwards, so the variables
/// `b` sit in column `l+2`; its last column is `(-1)^{ri}`, matching the
/// reflection of the left array.
pub fn regularized_p_tilde(r: usize, l: i64, j: usize, b: &[LaurentPoly]) -> Result<PolyMatrix> {
    let arr = regularized_array(r, b)?;
    let ri = r as i64;
    let window = Window::new(1, ri, l + 1, l + ri + 2);
    let surface = SteppedSurface::flat(SurfaceKind::Ar { r: ri }, window, 0)?;
    let data: InitialData = Grid::from_fn(window, |i, y| arr[i as usize][(y - l - 1) as usize].clone());
    network_matrix(&surface, &data, l + 1, l + 1 + j as i64)
}

/// `b_{1, l+1+j}` of the reflected array.
pub fn reflected_entry(r: usize, j: usize, b: &[LaurentPoly]) -> Result<LaurentPoly> {
    let arr = regularized_array(r, b)?;
    Ok(arr[1][j].clone())
}

/// Layered weighted graph read off a chip word: layer `m` carries the edges
/// of chip `m` plus weight-1 edges on the rows it does not touch.
#[derive(Debug, Clone)]
pub struct PathGraph {
    pub size: usize,
    /// Per layer, edges `(from, to, weight)` with 1-based rows.
    pub layers: Vec<Vec<(usize, usize, LaurentPoly)>>,
}

impl PathGraph {
    pub fn from_word(word: &ChipWord, size: usize) -> Result<PathGraph> {
        let mut layers = Vec::with_capacity(word.len());
        for chip in &word.chips {
            if chip.row == 0 || chip.row + 1 > size {
                return Err(Error::Usage(format!("chip on row {} does not fit size {size}", chip.row)));
            }
            let blk = chip.block()?;
            let mut edges = Vec::new();
            for x in 1..=size {
                if x != chip.row && x != chip.row + 1 {
                    edges.push((x, x, LaurentPoly::one()));
                }
            }
            for a in 0..2 {
                for b in 0..2 {
                    if !blk[a][b].is_zero() {
                        edges.push((chip.row + a, chip.row + b, blk[a][b].clone()));
                    }
                }
            }
            layers.push(edges);
        }
        Ok(PathGraph { size, layers })
    }

    /// Total weight of vertex-disjoint path families joining `sources[m]` to
    /// `sinks[m]`, found by exhaustive enumeration layer by layer.
    pub fn disjoint_family_weight(
        &self,
        sources: &[usize],
        sinks: &[usize],
        max_paths: usize,
        max_layers: usize,
    ) -> Result<LaurentPoly> {
        if sources.len() != sinks.len() {
            return Err(Error::Usage("sources and sinks differ in number".into()));
        }
        if sources.len() > max_paths {
            return Err(Error::TooLarge(format!("{} paths exceed the cap {max_paths}", sources.len())));
        }
        if self.layers.len() > max_layers {
            return Err(Error::TooLarge(format!(
                "{} layers exceed the cap {max_layers}",
                self.layers.len()
            )));
        }
        let mut out_edges: Vec<HashMap<usize, Vec<(usize, LaurentPoly)>>> = Vec::new();
        for layer in &self.layers {
            let mut m: HashMap<usize, Vec<(usize, LaurentPoly)>> = HashMap::new();
            for (f, t, w) in layer {
                m.entry(*f).or_default().push((*t, w.clone()));
            }
            out_edges.push(m);
        }
        let mut states: BTreeMap<Vec<usize>, LaurentPoly> = BTreeMap::new();
        states.insert(sources.to_vec(), LaurentPoly::one());
        for edges in &out_edges {
            let mut next: BTreeMap<Vec<usize>, LaurentPoly> = BTreeMap::new();
            for (pos, w) in &states {
                let mut partial: Vec<(Vec<usize>, LaurentPoly)> = vec![(Vec::new(), w.clone())];
                for p in pos {
                    let mut grown = Vec::new();
                    if let Some(opts) = edges.get(p) {
                        for (prefix, pw) in &partial {
                            for (to, ew) in opts {
                                if prefix.contains(to) {
                                    continue;
                                }
                                let mut np = prefix.clone();
                                np.push(*to);
                                grown.push((np, pw.try_mul(ew)?));
                            }
                        }
                    }
                    partial = grown;
                }
                for (np, pw) in partial {
                    let slot = next.entry(np).or_insert_with(LaurentPoly::zero);
                    *slot = slot.try_add(&pw)?;
                }
            }
            next.retain(|_, w| !w.is_zero());
            states = next;
        }
        Ok(states.remove(sinks).unwrap_or_else(LaurentPoly::zero))
    }
}

impl fmt::Display for ChipWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .chips
            .iter()
            .map(|c| {
                let k = match c.kind {
                    ChipKind::U => 'U',
                    ChipKind::V => 'V',
                };
                format!("{k}{}({};{};{})", c.row, c.args[0], c.args[1], c.args[2])
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chip_blocks() {
        let mut t = VarTable::new();
        let a = t.var_named("a");
        let b = t.var_named("b");
        let c = t.var_named("c");
        let u = Chip::u(1, a.clone(), b.clone(), c.clone()).matrix(2).unwrap();
        assert_eq!(u.get(1, 0), &(&c * &b.inverse().unwrap()));
        assert_eq!(u.get(1, 1), &(&a * &b.inverse().unwrap()));
        assert!(u.get(0, 1).is_zero());
        let bad = Chip::v(1, a.clone(), b.clone(), &a + &c);
        assert!(matches!(bad.block(), Err(Error::NotUnit(_))));
    }

    #[test]
    fn p_and_s_basics() {
        for r in 1..=5 {
            let p = p_matrix(r);
            let s = s_matrix(r);
            assert!(p.mul(&p).is_identity());
            assert!(s.mul(&s).is_identity());
        }
    }

    #[test]
    fn word_text_round_trip() {
        let mut t = VarTable::new();
        let a = t.var_named("t[1,-2]");
        let b = t.var_named("t[2,0]");
        let w = ChipWord::new(vec![
            Chip::u(1, a.clone(), b.clone(), LaurentPoly::one()),
            Chip::v(2, &a + &b, -b.clone(), a.pow(-2).unwrap()),
        ]);
        let s = w.to_text(&t);
        assert_eq!(ChipWord::parse(&s, &mut t).unwrap(), w);
    }
}
