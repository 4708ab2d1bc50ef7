//! Exact rational matrices for the weight calculus and its oracles. Small
//! and dense; everything is Gaussian elimination over `Ratio<i128>`.

use crate::rational::{rat_int, Rat};
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = rat_int(1);
        }
        m
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(r, c);
        for i in 0..r {
            assert_eq!(rows[i].len(), c);
            for j in 0..c {
                m[(i, j)] = rat_int(rows[i][j] as i128);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_vec(&self, i: usize) -> Vec<Rat> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn matmul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn select_columns(&self, idx: &[usize]) -> QMatrix {
        let mut out = QMatrix::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (jj, &j) in idx.iter().enumerate() {
                out[(i, jj)] = self[(i, j)];
            }
        }
        out
    }

    /// Reduced row echelon form; returns the pivot column of each nonzero row
    /// in order.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0usize;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(piv) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            if piv != row {
                for j in 0..m.cols {
                    let tmp = m[(piv, j)];
                    m[(piv, j)] = m[(row, j)];
                    m[(row, j)] = tmp;
                }
            }
            let d = m[(row, col)];
            for j in 0..m.cols {
                m[(row, j)] /= d;
            }
            for r in 0..m.rows {
                if r != row && !m[(r, col)].is_zero() {
                    let f = m[(r, col)];
                    for j in 0..m.cols {
                        let v = m[(row, j)];
                        m[(r, j)] -= f * v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel, as columns.
    pub fn nullspace(&self) -> QMatrix {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = QMatrix::zeros(self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            out[(fc, k)] = rat_int(1);
            for (prow, &pc) in pivots.iter().enumerate() {
                out[(pc, k)] = -r[(prow, fc)];
            }
        }
        out
    }

    pub fn det(&self) -> Rat {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let n = self.rows;
        let mut det = rat_int(1);
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !m[(r, col)].is_zero()) else {
                return Rat::zero();
            };
            if piv != col {
                for j in 0..n {
                    let tmp = m[(piv, j)];
                    m[(piv, j)] = m[(col, j)];
                    m[(col, j)] = tmp;
                }
                det = -det;
            }
            det *= m[(col, col)];
            for r in col + 1..n {
                if !m[(r, col)].is_zero() {
                    let f = m[(r, col)] / m[(col, col)];
                    for j in col..n {
                        let v = m[(col, j)];
                        m[(r, j)] -= f * v;
                    }
                }
            }
        }
        det
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_and_rank() {
        let m = QMatrix::from_int_rows(&[vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]]);
        assert_eq!(m.rank(), 2);
        let ns = m.nullspace();
        assert_eq!(ns.cols(), 1);
        let prod = m.matmul(&ns);
        assert!(prod.data.iter().all(|r| r.is_zero()));
    }

    #[test]
    fn det_of_known() {
        let m = QMatrix::from_int_rows(&[vec![2, 1], vec![1, 1]]);
        assert_eq!(m.det(), rat_int(1));
        let s = QMatrix::from_int_rows(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(s.det(), Rat::zero());
    }
}
