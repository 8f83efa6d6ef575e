//! Sparse row storage and a banded LU factorization.
//!
//! Polar-grid operators have bandwidth `n_theta`, so a band factorization
//! without pivoting is both simple and fast; the matrices it is applied to
//! are diagonally dominant M-matrices or small perturbations of them.

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from per-row `(column, value)` lists; duplicate columns add.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseMatrix { n, row_ptr, cols, vals }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(c, v)| v * x[c]).sum()).collect()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut rows = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for (c, v) in self.row(i) {
                rows[c].push((i, v));
            }
        }
        SparseMatrix::from_rows(rows)
    }

    /// `max_i sum_j |a_ij|`.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Lower and upper bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let (mut kl, mut ku) = (0, 0);
        for i in 0..self.n {
            for (c, _) in self.row(i) {
                if c < i {
                    kl = kl.max(i - c);
                } else {
                    ku = ku.max(c - i);
                }
            }
        }
        (kl, ku)
    }

    /// `A - s I`.
    pub fn shifted(&self, s: f64) -> SparseMatrix {
        let rows = (0..self.n)
            .map(|i| {
                let mut r: Vec<(usize, f64)> = self.row(i).collect();
                r.push((i, -s));
                r
            })
            .collect();
        SparseMatrix::from_rows(rows)
    }
}

/// LU factors of a banded matrix, stored row-major within the band.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    band: Vec<f64>,
}

impl BandedLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        let (kl, ku) = a.bandwidths();
        let n = a.n;
        let w = kl + ku + 1;
        let mut band = vec![0.0; n * w];
        for i in 0..n {
            for (c, v) in a.row(i) {
                band[i * w + c + kl - i] += v;
            }
        }
        let scale = a.norm_inf().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let pivot = band[k * w + kl];
            if !(pivot.abs() > 1e-14 * scale) {
                return Err(Error::Singular(format!("pivot {pivot:e} at row {k}")));
            }
            let row_end = (k + ku + 1).min(n);
            for i in k + 1..(k + kl + 1).min(n) {
                let ik = i * w + k + kl - i;
                let l = band[ik] / pivot;
                if l == 0.0 {
                    continue;
                }
                band[ik] = l;
                let (head, tail) = band.split_at_mut(i * w);
                let krow = &head[k * w..];
                let irow = &mut tail[..w];
                for j in k + 1..row_end {
                    irow[j + kl - i] -= l * krow[j + kl - k];
                }
            }
        }
        Ok(BandedLu { n, kl, ku, band })
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.band[i * (self.kl + self.ku + 1) + j + self.kl - i]
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(self.kl);
            let mut s = x[i];
            for j in lo..i {
                s -= self.at(i, j) * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + self.ku + 1).min(n);
            let mut s = x[i];
            for j in i + 1..hi {
                s -= self.at(i, j) * x[j];
            }
            x[i] = s / self.at(i, i);
        }
        x
    }

    /// Solves `A^T x = b` with the same factors.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        // U^T z = b
        for i in 0..n {
            x[i] /= self.at(i, i);
            let xi = x[i];
            for j in i + 1..(i + self.ku + 1).min(n) {
                x[j] -= self.at(i, j) * xi;
            }
        }
        // L^T x = z
        for i in (0..n).rev() {
            let xi = x[i];
            for j in i.saturating_sub(self.kl)..i {
                x[j] -= self.at(i, j) * xi;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded(n: usize, kl: usize, ku: usize, seed: u64) -> SparseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|i| {
                let mut r = Vec::new();
                let mut off = 0.0;
                for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                    if j != i && rng.random_bool(0.6) {
                        let v: f64 = rng.random_range(-1.0..1.0);
                        off += v.abs();
                        r.push((j, v));
                    }
                }
                r.push((i, off + 1.0));
                r
            })
            .collect();
        SparseMatrix::from_rows(rows)
    }

    proptest! {
        #[test]
        fn solves_and_transpose_solves(seed in 0u64..1000, n in 5usize..60, kl in 0usize..6, ku in 0usize..6) {
            let a = random_banded(n, kl, ku, seed);
            let lu = BandedLu::factor(&a).unwrap();
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let b = a.matvec(&x);
            let y = lu.solve(&b);
            let bt = a.transpose().matvec(&x);
            let yt = lu.solve_transpose(&bt);
            for i in 0..n {
                prop_assert!((y[i] - x[i]).abs() < 1e-10);
                prop_assert!((yt[i] - x[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn duplicate_entries_accumulate() {
        let a = SparseMatrix::from_rows(vec![vec![(0, 1.0), (0, 2.0)], vec![(1, 1.0)]]);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.shifted(1.0).get(1, 1), 0.0);
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = SparseMatrix::from_rows(vec![vec![(0, 0.0), (1, 1.0)], vec![(0, 1.0), (1, 1.0)]]);
        assert!(matches!(BandedLu::factor(&a), Err(Error::Singular(_))));
    }
}
