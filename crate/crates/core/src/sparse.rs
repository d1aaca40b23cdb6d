//! Compressed sparse row storage for the symmetric forms built by assembly.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Rows per parallel task in matrix-vector products.
const ROW_CHUNK: usize = 256;

/// Square CSR matrix. Column indices within a row are sorted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists, which must be sorted by column.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let nnz = rows.iter().map(Vec::len).sum();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        offsets.push(0);
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            for (c, v) in row {
                debug_assert!(c < n);
                cols.push(c);
                vals.push(v);
            }
            offsets.push(cols.len());
        }
        CsrMatrix { n, offsets, cols, vals }
    }

    pub fn zeros(n: usize) -> Self {
        CsrMatrix { n, offsets: vec![0; n + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.offsets[i]..self.offsets[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        c.binary_search(&j).map_or(0.0, |k| v[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = self · x`. Rows are processed in parallel; each row is summed
    /// sequentially, so results do not depend on the thread count.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.par_chunks_mut(ROW_CHUNK).enumerate().for_each(|(chunk, ys)| {
            for (k, yi) in ys.iter_mut().enumerate() {
                let i = chunk * ROW_CHUNK + k;
                let (c, v) = self.row(i);
                *yi = c.iter().zip(v).map(|(&j, a)| a * x[j]).sum();
            }
        });
    }

    /// `uᵀ self v` for a symmetric matrix, computed from the upper triangle so
    /// that swapping `u` and `v` gives a bitwise identical value.
    pub fn symmetric_form(&self, u: &[f64], v: &[f64]) -> f64 {
        let partial: Vec<f64> = (0..self.n)
            .collect::<Vec<_>>()
            .par_chunks(ROW_CHUNK)
            .map(|rows| {
                let mut s = 0.0;
                for &i in rows {
                    let (c, vals) = self.row(i);
                    for (&j, a) in c.iter().zip(vals) {
                        if j == i {
                            s += a * (u[i] * v[i]);
                        } else if j > i {
                            s += a * (u[i] * v[j] + u[j] * v[i]);
                        }
                    }
                }
                s
            })
            .collect();
        partial.iter().sum()
    }

    pub fn scale(&mut self, c: f64) {
        self.vals.iter_mut().for_each(|v| *v *= c);
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, a) in c.iter().zip(v) {
                worst = worst.max((a - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, a) in c.iter().zip(v) {
                m[(i, j)] += a;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CsrMatrix {
        CsrMatrix::from_rows(vec![vec![(0, 2.0), (1, -1.0)], vec![(0, -1.0), (1, 2.0), (2, -1.0)], vec![(1, -1.0), (2, 2.0)]])
    }

    #[test]
    fn apply_and_dense_agree() {
        let m = sample();
        let x = [1.0, 2.0, 3.0];
        let mut y = [0.0; 3];
        m.apply(&x, &mut y);
        let d = m.to_dense() * nalgebra::DVector::from_column_slice(&x);
        assert_eq!(y.to_vec(), d.as_slice().to_vec());
        assert_eq!(m.diagonal(), vec![2.0; 3]);
        assert_eq!(m.asymmetry(), 0.0);
    }

    #[test]
    fn symmetric_form_is_exactly_symmetric() {
        let m = sample();
        let u = [0.1, 0.7, -0.3];
        let v = [1.3, -0.2, 0.9];
        assert_eq!(m.symmetric_form(&u, &v), m.symmetric_form(&v, &u));
        let mut y = [0.0; 3];
        m.apply(&v, &mut y);
        let direct: f64 = u.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!((direct - m.symmetric_form(&u, &v)).abs() < 1e-15);
    }
}
