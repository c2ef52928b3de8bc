//! Banded LU factorization with partial pivoting for the collocation Jacobian.

use crate::error::{MelanError, Result};

/// Square matrix with `kl` sub- and `ku` super-diagonals, stored by columns with
/// `kl` extra rows of head room for the fill-in produced by row interchanges.
#[derive(Debug, Clone)]
pub(crate) struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub(crate) fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ld,
            data: vec![0.0; ld * n],
        }
    }

    #[inline]
    fn idx(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.n && col < self.n);
        debug_assert!(row + self.kl + self.ku >= col && col + self.kl >= row);
        col * self.ld + self.kl + self.ku + row - col
    }

    pub(crate) fn add(&mut self, row: usize, col: usize, value: f64) {
        assert!(
            col <= row + self.ku && row <= col + self.kl,
            "entry ({row}, {col}) outside the band"
        );
        let k = self.idx(row, col);
        self.data[k] += value;
    }

    #[cfg(test)]
    pub(crate) fn get(&self, row: usize, col: usize) -> f64 {
        if col > row + self.ku || row > col + self.kl {
            0.0
        } else {
            self.data[self.idx(row, col)]
        }
    }

    /// Solves `A x = rhs` in place, consuming the matrix.
    pub(crate) fn solve(mut self, rhs: &mut [f64]) -> Result<()> {
        let n = self.n;
        let kl = self.kl;
        let reach = self.kl + self.ku;
        assert_eq!(rhs.len(), n);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut piv = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(MelanError::SingularSystem { pivot: k });
            }
            let last_col = (k + reach).min(n - 1);
            if piv != k {
                for j in k..=last_col {
                    let a = self.idx(k, j);
                    let b = self.idx(piv, j);
                    self.data.swap(a, b);
                }
                rhs.swap(k, piv);
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = self.idx(i, k);
                let factor = self.data[ik] / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.data[ik] = 0.0;
                for j in k + 1..=last_col {
                    let kj = self.data[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.data[ij] -= factor * kj;
                }
                rhs[i] -= factor * rhs[k];
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + reach).min(n - 1);
            let mut acc = rhs[k];
            for (j, r) in rhs.iter().enumerate().take(last_col + 1).skip(k + 1) {
                acc -= self.data[self.idx(k, j)] * r;
            }
            rhs[k] = acc / self.data[self.idx(k, k)];
        }
        Ok(())
    }
}
