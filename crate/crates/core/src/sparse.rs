//! Compressed-sparse-row storage for the real symmetric ramp Hamiltonians.

use faer::{c64, Mat};

#[derive(Clone, Debug)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|t| t.2 != 0.0);
        let mut row_ptr = vec![0usize; dim + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dim,
            row_ptr,
            cols: merged.iter().map(|t| t.1 as u32).collect(),
            vals: merged.iter().map(|t| t.2).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[range.clone()]
            .iter()
            .zip(&self.vals[range])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn diagonal(&self, r: usize) -> f64 {
        self.row(r).filter(|&(c, _)| c == r).map(|(_, v)| v).sum()
    }

    /// Sum of absolute off-diagonal entries in row `r`.
    pub fn off_diagonal_radius(&self, r: usize) -> f64 {
        self.row(r).filter(|&(c, _)| c != r).map(|(_, v)| v.abs()).sum()
    }

    /// `y = A x` for a complex vector.
    #[inline]
    pub fn apply(&self, x: &[c64], y: &mut [c64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = c64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[k] as usize] * self.vals[k];
            }
            *yr = acc;
        }
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let m = CsrMatrix::from_triplets(3, vec![(0, 1, 1.0), (0, 1, 2.0), (2, 2, 0.0), (1, 0, 3.0)]);
        assert_eq!(m.nnz(), 2);
        let d = m.to_dense();
        assert_eq!(d[(0, 1)], 3.0);
        assert_eq!(d[(1, 0)], 3.0);
        assert_eq!(d[(2, 2)], 0.0);
        assert_eq!(m.off_diagonal_radius(0), 3.0);
    }

    #[test]
    fn apply_matches_dense() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0)]);
        let x = [c64::new(1.0, 1.0), c64::new(0.0, 2.0)];
        let mut y = [c64::new(0.0, 0.0); 2];
        m.apply(&x, &mut y);
        assert_eq!(y[0], c64::new(2.0, 4.0));
        assert_eq!(y[1], c64::new(1.0, 1.0));
    }
}
