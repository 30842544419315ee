//! Minimal dense matrix helpers for the desk-scale problems in this crate
//! (dimensions stay in the single digits).
//!
//! Matrices are stored column-major: entry (row, col) lives at
//! `data[col * dim + row]`, so a column is a contiguous slice.

/// Square column-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mat {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(dim: usize) -> Self {
        Mat {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Mat::zeros(dim);
        for j in 0..dim {
            m.data[j * dim + j] = 1.0;
        }
        m
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.dim + row]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[col * self.dim + row] = value;
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.data[col * self.dim..(col + 1) * self.dim]
    }

    /// `self * other`.
    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Mat::zeros(d);
        for j in 0..d {
            for k in 0..d {
                let w = other.get(k, j);
                if w != 0.0 {
                    for i in 0..d {
                        out.data[j * d + i] += self.get(i, k) * w;
                    }
                }
            }
        }
        out
    }

    /// `self * v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.dim, v.len());
        let d = self.dim;
        let mut out = vec![0.0; d];
        for (k, &w) in v.iter().enumerate() {
            if w != 0.0 {
                for i in 0..d {
                    out[i] += self.get(i, k) * w;
                }
            }
        }
        out
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    /// Returns `None` when a pivot falls below `pivot_tol`, i.e. the matrix
    /// is singular for our purposes.
    pub fn inverse(&self, pivot_tol: f64) -> Option<Mat> {
        let d = self.dim;
        let mut a = self.clone();
        let mut inv = Mat::identity(d);
        for col in 0..d {
            let mut pivot_row = col;
            let mut pivot_abs = a.get(col, col).abs();
            for r in col + 1..d {
                let v = a.get(r, col).abs();
                if v > pivot_abs {
                    pivot_abs = v;
                    pivot_row = r;
                }
            }
            if pivot_abs < pivot_tol {
                return None;
            }
            if pivot_row != col {
                for j in 0..d {
                    let (x, y) = (a.get(col, j), a.get(pivot_row, j));
                    a.set(col, j, y);
                    a.set(pivot_row, j, x);
                    let (x, y) = (inv.get(col, j), inv.get(pivot_row, j));
                    inv.set(col, j, y);
                    inv.set(pivot_row, j, x);
                }
            }
            let p = a.get(col, col);
            for j in 0..d {
                a.set(col, j, a.get(col, j) / p);
                inv.set(col, j, inv.get(col, j) / p);
            }
            for r in 0..d {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                if f != 0.0 {
                    for j in 0..d {
                        a.set(r, j, a.get(r, j) - f * a.get(col, j));
                        inv.set(r, j, inv.get(r, j) - f * inv.get(col, j));
                    }
                }
            }
        }
        Some(inv)
    }
}
