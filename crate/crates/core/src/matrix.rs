//! Dense matrices over Laurent polynomials.

use std::fmt;

use crate::laurent::{LaurentError, LaurentPoly};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    data: Vec<LaurentPoly>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            data: vec![LaurentPoly::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = PolyMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, LaurentPoly::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<LaurentPoly>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        PolyMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Zero-based entry access.
    pub fn get(&self, i: usize, j: usize) -> &LaurentPoly {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: LaurentPoly) {
        self.data[i * self.cols + j] = v;
    }

    pub fn try_mul(&self, other: &PolyMatrix) -> Result<PolyMatrix, LaurentError> {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = PolyMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j).try_add(&a.try_mul(b)?)?;
                    out.set(i, j, cur);
                }
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        self.try_mul(other).expect("operands come from different variable tables")
    }

    pub fn scale(&self, c: &LaurentPoly) -> PolyMatrix {
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&LaurentPoly) -> Result<LaurentPoly, LaurentError>) -> Result<PolyMatrix, LaurentError> {
        let data = self.data.iter().map(f).collect::<Result<Vec<_>, _>>()?;
        Ok(PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let v = self.get(i, j);
                    if i == j {
                        v.is_one()
                    } else {
                        v.is_zero()
                    }
                })
            })
    }

    /// Submatrix on the given (zero-based) rows and columns.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    /// Division-free determinant by cofactor expansion, memoised over
    /// column subsets.
    pub fn det(&self) -> Result<LaurentPoly, LaurentError> {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Ok(LaurentPoly::one());
        }
        assert!(n <= 20, "matrix too large for subset expansion");
        // f[mask] = det of rows 0..popcount(mask) restricted to columns in mask.
        let mut f: Vec<Option<LaurentPoly>> = vec![None; 1 << n];
        f[0] = Some(LaurentPoly::one());
        let mut masks: Vec<usize> = (1..(1usize << n)).collect();
        masks.sort_by_key(|m| m.count_ones());
        for mask in masks {
            let row = mask.count_ones() as usize - 1;
            let mut acc = LaurentPoly::zero();
            for c in 0..n {
                if mask & (1 << c) == 0 {
                    continue;
                }
                let entry = self.get(row, c);
                // sign from the number of chosen columns to the right of c
                let right = (mask >> (c + 1)).count_ones() as usize;
                if !entry.is_zero() {
                    if let Some(sub) = &f[mask & !(1 << c)] {
                        if !sub.is_zero() {
                            let term = entry.try_mul(sub)?;
                            acc = if right % 2 == 0 {
                                acc.try_add(&term)?
                            } else {
                                acc.try_sub(&term)?
                            };
                        }
                    }
                }
            }
            f[mask] = Some(acc);
        }
        Ok(f[(1 << n) - 1].take().unwrap())
    }

    /// Minor on the first `k` rows and columns.
    pub fn leading_minor(&self, k: usize) -> Result<LaurentPoly, LaurentError> {
        let idx: Vec<usize> = (0..k).collect();
        self.submatrix(&idx, &idx).det()
    }
}

impl fmt::Display for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::VarTable;

    #[test]
    fn det_small() {
        let mut t = VarTable::new();
        let a = t.var_named("a");
        let b = t.var_named("b");
        let c = t.var_named("c");
        let d = t.var_named("d");
        let m = PolyMatrix::from_rows(vec![vec![a.clone(), b.clone()], vec![c.clone(), d.clone()]]);
        assert_eq!(m.det().unwrap(), &(&a * &d) - &(&b * &c));
        let p = PolyMatrix::from_rows(vec![
            vec![0.into(), 0.into(), 1.into()],
            vec![0.into(), 1.into(), 0.into()],
            vec![1.into(), 0.into(), 0.into()],
        ]);
        assert_eq!(p.det().unwrap(), LaurentPoly::constant(-1));
        assert!(PolyMatrix::identity(4).det().unwrap().is_one());
    }

    #[test]
    fn det_is_multiplicative() {
        let mut t = VarTable::new();
        let x: Vec<LaurentPoly> = (0..9).map(|i| t.var_named(&format!("x{i}"))).collect();
        let y: Vec<LaurentPoly> = (0..9).map(|i| t.var_named(&format!("y{i}"))).collect();
        let mx = PolyMatrix::from_rows(x.chunks(3).map(|r| r.to_vec()).collect());
        let my = PolyMatrix::from_rows(y.chunks(3).map(|r| r.to_vec()).collect());
        let lhs = mx.mul(&my).det().unwrap();
        let rhs = &mx.det().unwrap() * &my.det().unwrap();
        assert_eq!(lhs, rhs);
    }
}
