//! Dense-band Cholesky factorization for symmetric positive definite systems.

use crate::error::{Error, Result};

/// Lower band of an SPD matrix, factorized in place.
///
/// Row `r` stores columns `r - w ..= r` at offsets `0 ..= w`.
#[derive(Debug, Clone, Default)]
pub struct BandCholesky {
    n: usize,
    w: usize,
    data: Vec<f64>,
}

impl BandCholesky {
    pub fn new(n: usize, w: usize) -> Self {
        Self {
            n,
            w,
            data: vec![0.0; n * (w + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.w
    }

    pub fn clear(&mut self) {
        self.data.fill(0.0);
    }

    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        r * (self.w + 1) + (c + self.w - r)
    }

    /// Adds `v` to entry `(r, c)`; requires `c ≤ r ≤ c + w`.
    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(c <= r && r - c <= self.w);
        let k = self.idx(r, c);
        self.data[k] += v;
    }

    /// Factorizes into `L Lᵀ`.
    pub fn factor(&mut self) -> Result<()> {
        let w = self.w;
        let stride = w + 1;
        for r in 0..self.n {
            let r0 = r.saturating_sub(w);
            for c in r0..=r {
                let k0 = r0.max(c.saturating_sub(w));
                let mut s = self.data[r * stride + (c + w - r)];
                let ro = r * stride + w - r;
                let co = c * stride + w - c;
                for k in k0..c {
                    s -= self.data[ro + k] * self.data[co + k];
                }
                if c == r {
                    if !(s > 0.0) {
                        return Err(Error::Solver(format!("non-positive pivot {s} at row {r}")));
                    }
                    self.data[ro + r] = s.sqrt();
                } else {
                    self.data[ro + c] = s / self.data[co + c];
                }
            }
        }
        Ok(())
    }

    /// Solves `L Lᵀ x = b` in place after [`Self::factor`].
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let w = self.w;
        let stride = w + 1;
        for r in 0..self.n {
            let ro = r * stride + w - r;
            let mut s = b[r];
            for k in r.saturating_sub(w)..r {
                s -= self.data[ro + k] * b[k];
            }
            b[r] = s / self.data[ro + r];
        }
        for r in (0..self.n).rev() {
            let x = b[r] / self.data[r * stride + w];
            b[r] = x;
            for k in r.saturating_sub(w)..r {
                b[k] -= self.data[r * stride + (k + w - r)] * x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_system() {
        let n = 6;
        let mut a = BandCholesky::new(n, 1);
        for r in 0..n {
            a.add(r, r, 2.0);
            if r > 0 {
                a.add(r, r - 1, -1.0);
            }
        }
        a.factor().unwrap();
        // exact solution of the 1-D Laplacian with unit right end
        let mut b = vec![0.0; n];
        b[n - 1] = 1.0;
        a.solve_in_place(&mut b);
        for (k, x) in b.iter().enumerate() {
            assert!((x - (k + 1) as f64 / (n + 1) as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn wider_band_matches_dense_product() {
        let n = 9;
        let w = 3;
        let mut dense = vec![vec![0.0; n]; n];
        let mut a = BandCholesky::new(n, w);
        for r in 0..n {
            for c in r.saturating_sub(w)..=r {
                let v = if r == c { 10.0 + r as f64 } else { 1.0 / (1.0 + (r + 2 * c) as f64) };
                dense[r][c] = v;
                dense[c][r] = v;
                a.add(r, c, v);
            }
        }
        a.factor().unwrap();
        let x_true: Vec<f64> = (0..n).map(|k| (k as f64).sin()).collect();
        let mut b: Vec<f64> = (0..n).map(|r| (0..n).map(|c| dense[r][c] * x_true[c]).sum()).collect();
        a.solve_in_place(&mut b);
        for k in 0..n {
            assert!((b[k] - x_true[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn indefinite_matrix_fails() {
        let mut a = BandCholesky::new(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 0, 2.0);
        a.add(1, 1, 1.0);
        assert!(a.factor().is_err());
    }
}
